"""Bipartite density matrices: validation, tensor products, partial traces,
entropy, the standard state families and the JSON state-file format.

Basis ordering is A-major throughout the package: ``|i>_A (x) |j>_B`` has
index ``i * dim_b + j``, which is exactly what :func:`numpy.kron` produces.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import xlogy
from scipy.stats import unitary_group

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
PROB_TOL = 1e-12
LN2 = np.log(2.0)


class InvalidStateError(ValueError):
    """A matrix failed one of the density-matrix invariants.

    ``residual`` holds the size of the offending violation.
    """

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


def as_matrix(x) -> np.ndarray:
    """Return the complex ndarray behind a DensityMatrix or array-like."""
    if isinstance(x, DensityMatrix):
        return x.matrix
    return np.asarray(x, dtype=complex)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density matrix on ``H_A (x) H_B``.

    Construction checks Hermiticity, unit trace and positivity. Tripartite
    states are represented with ``dim_a = d_A * d_B`` and ``dim_b = d_E``.
    """

    matrix: np.ndarray
    dim_a: int
    dim_b: int

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        n = self.dim_a * self.dim_b
        if self.dim_a < 1 or self.dim_b < 1:
            raise InvalidStateError("subsystem dimensions must be positive")
        if m.shape != (n, n):
            raise InvalidStateError(
                f"matrix shape {m.shape} does not match dims "
                f"{self.dim_a}x{self.dim_b}"
            )
        check_density(m)

    @classmethod
    def from_array(cls, m, dims: tuple[int, int] | None = None) -> "DensityMatrix":
        m = np.asarray(m, dtype=complex)
        if dims is None:
            dims = (m.shape[0], 1)
        return cls(m, int(dims[0]), int(dims[1]))

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)


def check_density(m: np.ndarray) -> None:
    """Raise :class:`InvalidStateError` if ``m`` is not a density matrix."""
    herm = float(np.max(np.abs(m - m.conj().T), initial=0.0))
    if herm > HERMITIAN_TOL:
        raise InvalidStateError(f"matrix is not Hermitian (residual {herm:.3e})", herm)
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(
            f"trace is {tr:.17g}, not 1 (residual {abs(tr - 1):.3e})", abs(tr - 1.0)
        )
    lmin = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
    if lmin < -PSD_TOL:
        raise InvalidStateError(
            f"matrix is not positive semidefinite (min eigenvalue {lmin:.3e})", -lmin
        )


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def spectrum(rho) -> Spectrum:
    """Eigen-decomposition with descending eigenvalues clamped to [0, 1].

    Eigenvalues below ``-PSD_TOL`` are rejected rather than clamped.
    """
    m = as_matrix(rho)
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    if w[0] < -PSD_TOL:
        raise InvalidStateError(f"negative eigenvalue {w[0]:.3e}", -float(w[0]))
    w = np.clip(w[::-1], 0.0, 1.0)
    return Spectrum(w, v[:, ::-1])


def tensor_product(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("tensor_product expects square matrices")
    return np.kron(a, b)


def partial_trace_array(m, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` lists the subsystem dimensions in tensor order; the kept
    subsystems appear in the result in their original order.
    """
    m = np.asarray(m)
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    t = m.reshape(dims + dims)
    # einsum letters: row indices 0..n-1, column indices n..2n-1
    row = list(range(n))
    col = [n + k if k in keep else k for k in range(n)]
    out = [k for k in keep] + [n + k for k in keep]
    t = np.einsum(t, row + col, out)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


def partial_trace(rho: DensityMatrix, keep: str) -> DensityMatrix:
    """Reduced state of subsystem ``keep`` ('A' or 'B')."""
    keep = keep.upper()
    if keep == "A":
        m = partial_trace_array(rho.matrix, rho.dims, [0])
        return DensityMatrix(m, rho.dim_a, 1)
    if keep == "B":
        m = partial_trace_array(rho.matrix, rho.dims, [1])
        return DensityMatrix(m, rho.dim_b, 1)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def entropy_of_eigenvalues(w) -> np.ndarray:
    """``-sum w log2 w`` over the last axis, with ``0 log 0 = 0``."""
    w = np.clip(np.asarray(w, dtype=float), 0.0, None)
    return -xlogy(w, w).sum(axis=-1) / LN2


def von_neumann_entropy(rho) -> float:
    """Von Neumann entropy in bits."""
    m = as_matrix(rho)
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return float(max(entropy_of_eigenvalues(w), 0.0))


# --- state families -------------------------------------------------------

def _ket(*amps) -> np.ndarray:
    v = np.asarray(amps, dtype=complex)
    return v / np.linalg.norm(v)


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


BELL_KETS = {
    "phi+": _ket(1, 0, 0, 1),
    "phi-": _ket(1, 0, 0, -1),
    "psi+": _ket(0, 1, 1, 0),
    "psi-": _ket(0, 1, -1, 0),
}


def make_bell(which: str = "phi+") -> DensityMatrix:
    return DensityMatrix(projector(BELL_KETS[which]), 2, 2)


def make_werner(z: float) -> DensityMatrix:
    """``z |Phi+><Phi+| + (1 - z) I/4``."""
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"Werner parameter must lie in [0, 1], got {z}")
    m = z * projector(BELL_KETS["phi+"]) + (1.0 - z) * np.eye(4) / 4
    return DensityMatrix(m, 2, 2)


def make_isotropic(fidelity: float, d: int = 2) -> DensityMatrix:
    """Isotropic state with singlet fraction ``fidelity`` on ``d x d``."""
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError(f"isotropic fidelity must lie in [0, 1], got {fidelity}")
    phi = projector(np.eye(d).reshape(-1) / np.sqrt(d))
    rest = (np.eye(d * d) - phi) / (d * d - 1)
    return DensityMatrix(fidelity * phi + (1.0 - fidelity) * rest, d, d)


def make_bell_diagonal(p: float) -> DensityMatrix:
    """Rank-two Bell-diagonal family ``p |Phi+><Phi+| + (1 - p) |Psi+><Psi+|``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Bell-diagonal weight must lie in [0, 1], got {p}")
    m = p * projector(BELL_KETS["phi+"]) + (1.0 - p) * projector(BELL_KETS["psi+"])
    return DensityMatrix(m, 2, 2)


def _check_probabilities(p) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > PROB_TOL:
        raise ValueError(f"invalid probability vector {p!r}")
    return p


def make_product(rho_a, rho_b) -> DensityMatrix:
    a, b = as_matrix(rho_a), as_matrix(rho_b)
    return DensityMatrix(tensor_product(a, b), a.shape[0], b.shape[0])


def make_classical_quantum(p, basis, states) -> DensityMatrix:
    """``sum_i p_i |i><i|_A (x) rho_B^i`` with ``|i>`` the columns of ``basis``."""
    p = _check_probabilities(p)
    basis = as_matrix(basis)
    states = [as_matrix(s) for s in states]
    if len(states) != p.size or p.size > basis.shape[1]:
        raise ValueError("need one conditional state per probability and per basis vector")
    d_a, d_b = basis.shape[0], states[0].shape[0]
    m = sum(pi * np.kron(projector(basis[:, i]), s) for i, (pi, s) in enumerate(zip(p, states)))
    return DensityMatrix(m, d_a, d_b)


def make_separable(p, pairs) -> DensityMatrix:
    """``sum_i p_i rho_A^i (x) rho_B^i``."""
    p = _check_probabilities(p)
    pairs = [(as_matrix(a), as_matrix(b)) for a, b in pairs]
    if len(pairs) != p.size:
        raise ValueError("need one product pair per probability")
    m = sum(pi * np.kron(a, b) for pi, (a, b) in zip(p, pairs))
    return DensityMatrix(m, pairs[0][0].shape[0], pairs[0][1].shape[0])


# --- random sampling ------------------------------------------------------

def make_rng(seed) -> np.random.Generator:
    """Generator from an int, SeedSequence or existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def child_rngs(seed, n: int) -> list[np.random.Generator]:
    """``n`` independent generators; the first k do not depend on ``n``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(n)]


def random_density_array(dim: int, rank: int | None = None, seed=None) -> np.ndarray:
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}], got {rank}")
    rng = make_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return m / np.trace(m).real


def random_density(dim, rank: int | None = None, seed=None) -> DensityMatrix:
    """Ginibre-ensemble state ``G G^dag / Tr[G G^dag]``.

    ``dim`` is either a single dimension or a ``(dim_a, dim_b)`` pair.
    """
    dims = (dim, 1) if np.isscalar(dim) else tuple(dim)
    m = random_density_array(dims[0] * dims[1], rank, seed)
    return DensityMatrix(m, *dims)


def random_pure(dim: int, seed=None) -> np.ndarray:
    rng = make_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return projector(v / np.linalg.norm(v))


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary."""
    if dim == 1:
        return np.ones((1, 1), dtype=complex)
    return unitary_group.rvs(dim, random_state=make_rng(seed))


def random_product(dims: tuple[int, int], seed=None) -> DensityMatrix:
    rng = make_rng(seed)
    return make_product(random_density_array(dims[0], seed=rng),
                        random_density_array(dims[1], seed=rng))


def random_classical_quantum(dims: tuple[int, int], seed=None) -> tuple[DensityMatrix, np.ndarray, np.ndarray, list]:
    """Random cq state with a Haar register basis.

    Returns ``(state, p, basis, conditional_states)``.
    """
    rng = make_rng(seed)
    d_a, d_b = dims
    p = rng.dirichlet(np.ones(d_a))
    basis = random_unitary(d_a, rng)
    states = [random_density_array(d_b, seed=rng) for _ in range(d_a)]
    return make_classical_quantum(p, basis, states), p, basis, states


def random_separable(dims: tuple[int, int], terms: int = 3, seed=None) -> DensityMatrix:
    rng = make_rng(seed)
    p = rng.dirichlet(np.ones(terms))
    pairs = [(random_density_array(dims[0], seed=rng), random_density_array(dims[1], seed=rng))
             for _ in range(terms)]
    return make_separable(p, pairs)


# --- state files ----------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def state_to_json(rho: DensityMatrix) -> str:
    """Serialize to the state-file format with 17 significant digits."""
    rows = []
    for row in rho.matrix:
        cells = ", ".join(f"[{_fmt(z.real)}, {_fmt(z.imag)}]" for z in row)
        rows.append(f"    [{cells}]")
    body = ",\n".join(rows)
    return (f'{{\n  "dim_a": {rho.dim_a},\n  "dim_b": {rho.dim_b},\n'
            f'  "matrix": [\n{body}\n  ]\n}}\n')


class StateFileError(ValueError):
    """The state file is malformed (as opposed to physically invalid)."""


def state_from_json(text: str) -> DensityMatrix:
    """Parse a state file; physics violations raise InvalidStateError."""
    try:
        data = json.loads(text)
        d_a, d_b = int(data["dim_a"]), int(data["dim_b"])
        arr = np.asarray(data["matrix"], dtype=float)
    except (ValueError, KeyError, TypeError) as exc:
        raise StateFileError(f"malformed state file: {exc}") from exc
    n = d_a * d_b
    if arr.shape != (n, n, 2):
        raise StateFileError(f"matrix must have shape ({n}, {n}, 2), got {arr.shape}")
    return DensityMatrix(arr[..., 0] + 1j * arr[..., 1], d_a, d_b)


def save_state(rho: DensityMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(state_to_json(rho))


def load_state(path) -> DensityMatrix:
    with open(path, encoding="utf-8") as fh:
        return state_from_json(fh.read())
