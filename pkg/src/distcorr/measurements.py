"""Von Neumann measurements on subsystem A and local quantum channels.

Measurement bases are charted by products of Givens rotations. For
``dim_a = d`` there is one rotation per pair ``(k, l)``, ``k < l``, taken in
the order ``(0,1), (0,2), ..., (0,d-1), (1,2), ..., (d-2,d-1)``, and each
rotation carries two parameters ``(theta, phi)``::

    G[k, k] = cos(theta/2)             G[k, l] = -exp(-i phi) sin(theta/2)
    G[l, k] = exp(i phi) sin(theta/2)  G[l, l] = cos(theta/2)

so ``U = G_01 G_02 ... G_{d-2,d-1}`` uses ``d (d - 1)`` parameters. The
diagonal phases left over by the Givens decomposition of a general unitary
do not change the projectors and are dropped. For a qubit, ``(theta, phi)``
are the Bloch angles of the first outcome.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .state_space import (
    DensityMatrix,
    as_matrix,
    make_rng,
    partial_trace_array,
    random_unitary,
)

PROJ_TOL = 1e-10
TP_TOL = 1e-10
ZERO_PROB = 1e-12


def n_params(dim_a: int) -> int:
    return dim_a * (dim_a - 1)


def givens_unitary(dim_a: int, params) -> np.ndarray:
    """Unitary for a parameter vector, or a stack ``(..., d(d-1))`` of them."""
    params = np.asarray(params, dtype=float)
    if params.shape[-1] != n_params(dim_a):
        raise ValueError(
            f"dim_a={dim_a} needs {n_params(dim_a)} parameters, got {params.shape[-1]}"
        )
    batch = params.shape[:-1]
    u = np.broadcast_to(np.eye(dim_a, dtype=complex), batch + (dim_a, dim_a)).copy()
    for idx, (k, l) in enumerate(combinations(range(dim_a), 2)):
        theta, phi = params[..., 2 * idx], params[..., 2 * idx + 1]
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        ph = np.exp(1j * phi)
        # right-multiply by G_kl: only columns k and l change
        uk, ul = u[..., :, k].copy(), u[..., :, l]
        u[..., :, k] = uk * c[..., None] + ul * (ph * s)[..., None]
        u[..., :, l] = -uk * (ph.conj() * s)[..., None] + ul * c[..., None]
    return u


def params_from_unitary(u) -> np.ndarray:
    """Parameters whose :func:`givens_unitary` has the same columns as ``u`` up to phases."""
    w = np.array(as_matrix(u), dtype=complex)
    d = w.shape[0]
    out = np.zeros(n_params(d))
    for idx, (k, l) in enumerate(combinations(range(d), 2)):
        a, b = w[k, k], w[l, k]
        theta = 2 * np.arctan2(abs(b), abs(a))
        phi = np.angle(b) - np.angle(a) if abs(b) > 0 and abs(a) > 0 else np.angle(b)
        out[2 * idx], out[2 * idx + 1] = theta, phi
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        e = np.exp(1j * phi)
        rk, rl = w[k].copy(), w[l].copy()
        # apply G^dag to rows k, l
        w[k] = c * rk + np.conj(e) * s * rl
        w[l] = -e * s * rk + c * rl
    return out


def fourier_basis(d: int) -> np.ndarray:
    j = np.arange(d)
    return np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)


def projectors_from_unitary(u: np.ndarray) -> np.ndarray:
    """``M_j = U |j><j| U^dag`` stacked on axis -3 (works on batches)."""
    cols = np.swapaxes(u, -1, -2)  # (..., j, a)
    return cols[..., :, :, None] * cols[..., :, None, :].conj()


@dataclass(frozen=True, eq=False)
class VonNeumannMeasurement:
    dim_a: int
    projectors: np.ndarray
    params: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        p = np.asarray(self.projectors, dtype=complex)
        d = self.dim_a
        if p.shape != (d, d, d):
            raise ValueError(f"expected {d} projectors of size {d}x{d}, got {p.shape}")
        for j in range(d):
            if np.max(np.abs(p[j] @ p[j] - p[j])) > PROJ_TOL:
                raise ValueError(f"M_{j} is not idempotent")
            if abs(np.trace(p[j]).real - 1) > PROJ_TOL:
                raise ValueError(f"M_{j} is not rank one")
            for k in range(j):
                if np.max(np.abs(p[j] @ p[k])) > PROJ_TOL:
                    raise ValueError(f"M_{j} and M_{k} are not orthogonal")
        if np.max(np.abs(p.sum(axis=0) - np.eye(d))) > PROJ_TOL:
            raise ValueError("projectors do not resolve the identity")
        object.__setattr__(self, "projectors", p)

    @classmethod
    def from_basis(cls, u) -> "VonNeumannMeasurement":
        u = as_matrix(u)
        return cls(u.shape[0], projectors_from_unitary(u), params_from_unitary(u))


def measurement_from_params(dim_a: int, theta) -> VonNeumannMeasurement:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    u = givens_unitary(dim_a, theta)
    return VonNeumannMeasurement(dim_a, projectors_from_unitary(u), theta.copy())


def random_measurement(dim_a: int, seed=None) -> VonNeumannMeasurement:
    """Measurement in a Haar-random basis."""
    return VonNeumannMeasurement.from_basis(random_unitary(dim_a, seed))


# --- conditional states ----------------------------------------------------

def unnormalized_conditionals(rho: np.ndarray, dims: tuple[int, int], projectors: np.ndarray) -> np.ndarray:
    """``Tr_A[(M_j (x) I) rho]`` for a (batched) stack of projector families.

    ``projectors`` has shape ``(..., m, d_A, d_A)``; the result has shape
    ``(..., m, d_B, d_B)`` and its traces are the outcome probabilities.
    """
    d_a, d_b = dims
    t = rho.reshape(d_a, d_b, d_a, d_b)
    return np.einsum("...jab,bxay->...jxy", projectors, t)


PAULIS = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])


def qubit_conditionals(rho: np.ndarray, dims: tuple[int, int]):
    """Fast :func:`unnormalized_conditionals` for ``dim_a = 2`` in chart coordinates.

    With Bloch vector ``n`` of the first outcome the projectors are
    ``(I +- n.sigma)/2``, so the conditionals are
    ``(rho_B +- sum_k n_k Tr_A[(sigma_k (x) I) rho]) / 2``. Returns a function
    of a ``(..., 2)`` array of ``(theta, phi)``.
    """
    if dims[0] != 2:
        raise ValueError("qubit_conditionals needs dim_a = 2")
    d_b = dims[1]
    blocks = unnormalized_conditionals(rho, dims, np.concatenate([np.eye(2)[None], PAULIS]))
    half_b = 0.5 * blocks[0]
    r = 0.5 * blocks[1:].reshape(3, d_b * d_b)

    def conditionals(params):
        params = np.asarray(params, dtype=float)
        theta, phi = params[..., 0], params[..., 1]
        st = np.sin(theta)
        n = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)
        half = (n @ r).reshape(params.shape[:-1] + (d_b, d_b))
        out = np.empty(params.shape[:-1] + (2, d_b, d_b), dtype=complex)
        out[..., 0, :, :] = half_b + half
        out[..., 1, :, :] = half_b - half
        return out

    return conditionals


@dataclass(frozen=True, eq=False)
class ConditionalEnsemble:
    """Outcome probabilities and conditional B states of a measurement.

    Zero-probability outcomes (``p'_j <= 1e-12``) are flagged in ``null`` and
    their ``states`` entry is all zeros.
    """

    probabilities: np.ndarray
    states: np.ndarray
    null: np.ndarray

    @property
    def outcomes(self) -> list[tuple[float, np.ndarray | None]]:
        return [(float(p), None if z else s)
                for p, s, z in zip(self.probabilities, self.states, self.null)]

    def average(self) -> np.ndarray:
        return np.einsum("j,jxy->xy", self.probabilities, self.states)


def conditional_ensemble(rho: DensityMatrix, m: VonNeumannMeasurement) -> ConditionalEnsemble:
    if m.dim_a != rho.dim_a:
        raise ValueError(f"measurement acts on dimension {m.dim_a}, state has dim_a={rho.dim_a}")
    x = unnormalized_conditionals(rho.matrix, rho.dims, m.projectors)
    p = np.einsum("jxx->j", x).real
    null = p <= ZERO_PROB
    safe = np.where(null, 1.0, p)
    states = np.where(null[:, None, None], 0.0, x / safe[:, None, None])
    return ConditionalEnsemble(np.where(null, 0.0, p), states, null)


def apply_measurement(rho: DensityMatrix, m: VonNeumannMeasurement) -> DensityMatrix:
    """Non-selective post-measurement state ``sum_j (M_j x I) rho (M_j x I)``."""
    if m.dim_a != rho.dim_a:
        raise ValueError(f"measurement acts on dimension {m.dim_a}, state has dim_a={rho.dim_a}")
    eye_b = np.eye(rho.dim_b)
    out = np.zeros_like(rho.matrix)
    for proj in m.projectors:
        big = np.kron(proj, eye_b)
        out += big @ rho.matrix @ big
    return DensityMatrix(0.5 * (out + out.conj().T), rho.dim_a, rho.dim_b)


# --- channels ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Trace-preserving channel; ``target`` is 'A', 'B' or 'global'."""

    kraus_ops: tuple
    target: str = "global"

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d = ops[0].shape[1]
        res = float(np.max(np.abs(sum(k.conj().T @ k for k in ops) - np.eye(d))))
        if res > TP_TOL:
            raise ValueError(f"Kraus operators are not trace preserving (residual {res:.3e})")
        if self.target not in ("A", "B", "global"):
            raise ValueError(f"target must be 'A', 'B' or 'global', got {self.target!r}")
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[1]

    def on(self, target: str) -> "KrausChannel":
        return KrausChannel(self.kraus_ops, target)


def apply_channel(rho: DensityMatrix, channel: KrausChannel) -> DensityMatrix:
    d = {"A": rho.dim_a, "B": rho.dim_b, "global": rho.dim}[channel.target]
    if channel.dim != d:
        raise ValueError(f"channel acts on dimension {channel.dim}, target has {d}")
    out = np.zeros_like(rho.matrix)
    for k in channel.kraus_ops:
        if channel.target == "A":
            k = np.kron(k, np.eye(rho.dim_b))
        elif channel.target == "B":
            k = np.kron(np.eye(rho.dim_a), k)
        out += k @ rho.matrix @ k.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T), rho.dim_a, rho.dim_b)


def apply_kraus(m: np.ndarray, kraus_ops) -> np.ndarray:
    """Channel action on a bare matrix."""
    return sum(k @ m @ k.conj().T for k in kraus_ops)


def _check_param(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def weyl_operators(d: int) -> list[np.ndarray]:
    """Generalized Pauli operators ``X^a Z^b``, identity first."""
    x = np.roll(np.eye(d), 1, axis=0)
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return [np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b)
            for a in range(d) for b in range(d)]


def depolarizing(p: float, dim: int = 2, target: str = "global") -> KrausChannel:
    """``rho -> (1 - p) rho + p I/d``."""
    _check_param("depolarizing probability", p)
    w = weyl_operators(dim)
    ops = [np.sqrt(1 - p + p / dim**2) * w[0]]
    ops += [np.sqrt(p / dim**2) * op for op in w[1:]]
    return KrausChannel(tuple(ops), target)


def dephasing(p: float, dim: int = 2, target: str = "global") -> KrausChannel:
    """``rho -> (1 - p) rho + p diag(rho)`` in the computational basis."""
    _check_param("dephasing probability", p)
    ops = [np.sqrt(1 - p) * np.eye(dim)]
    for k in range(dim):
        e = np.zeros((dim, dim))
        e[k, k] = 1.0
        ops.append(np.sqrt(p) * e)
    return KrausChannel(tuple(ops), target)


def amplitude_damping(gamma: float, dim: int = 2, target: str = "global") -> KrausChannel:
    """Qubit amplitude damping towards ``|0>``."""
    _check_param("damping rate", gamma)
    if dim != 2:
        raise ValueError("amplitude damping is defined for qubits only")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return KrausChannel((k0, k1), target)


BUILTIN_CHANNELS = {
    "depolarizing": depolarizing,
    "dephasing": dephasing,
    "amplitude_damping": amplitude_damping,
}


def builtin_channel(name: str, param: float, dim: int = 2, target: str = "global") -> KrausChannel:
    try:
        factory = BUILTIN_CHANNELS[name]
    except KeyError:
        raise KeyError(f"unknown channel {name!r}; choose from {sorted(BUILTIN_CHANNELS)}") from None
    return factory(param, dim, target)


def random_channel(dim: int, n_kraus: int = 3, seed=None, target: str = "global") -> KrausChannel:
    """Random channel from a Haar-ish isometry ``C^d -> C^d (x) C^k``."""
    rng = make_rng(seed)
    g = rng.standard_normal((dim * n_kraus, dim)) + 1j * rng.standard_normal((dim * n_kraus, dim))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    ops = tuple(q[i * dim:(i + 1) * dim] for i in range(n_kraus))
    return KrausChannel(ops, target)


def reduced_b(rho: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    return partial_trace_array(rho, dims, [1])
