"""Quantum distances behind a common contract.

Every distance is built as a *prepared reference*: ``measure.against(sigma)``
does the work that depends only on the second argument once and returns a
function that evaluates ``d(rho || sigma)`` for a whole stack of ``rho``
matrices of shape ``(..., n, n)``. This is what makes the measurement
search in :mod:`distcorr.correlations` cheap. ``measure(rho, sigma)`` is the
plain scalar entry point.

Asymmetric distances take the argument they are convex in first.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._linalg import SQRT_ZERO, eigvalsh, sqrt_psd as _sqrt_psd, trace_sqrt_psd as _trace_sqrt_psd
from .state_space import HERMITIAN_TOL, PSD_TOL, as_matrix, entropy_of_eigenvalues

SUPPORT_TOL = 1e-10


class Prop(str, enum.Enum):
    NON_NEGATIVE = "a"
    INDISCERNIBLES = "b"
    SYMMETRY = "c"
    TRIANGLE = "d"
    UNITARY_INVARIANCE = "e"
    CPTP_MONOTONE = "f"
    CONVEX_FIRST = "g"
    CQ_DECOMPOSITION = "h"
    RESTRICTED_ADDITIVITY = "restricted_additivity"


def _herm(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + np.swapaxes(m, -1, -2).conj())


def _check_hermitian(m: np.ndarray) -> None:
    if m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {m.shape}")
    res = float(np.max(np.abs(m - np.swapaxes(m, -1, -2).conj()), initial=0.0))
    if res > HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian (residual {res:.3e})")


def _apply(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``V diag(w) V^dag`` for stacks."""
    return (v * w[..., None, :]) @ np.swapaxes(v, -1, -2).conj()


def matrix_function(m, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply ``f`` to the eigenvalues of a Hermitian matrix (or stack)."""
    m = np.asarray(as_matrix(m), dtype=complex)
    _check_hermitian(m)
    w, v = np.linalg.eigh(_herm(m))
    return _apply(f(w), v)


def matrix_sqrt(m) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix."""
    m = np.asarray(as_matrix(m), dtype=complex)
    _check_hermitian(m)
    w, v = np.linalg.eigh(_herm(m))
    if np.any(w < -PSD_TOL):
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w.min():.3e})")
    w = np.where(w > SQRT_ZERO, w, 0.0)
    return _apply(np.sqrt(w), v)


def matrix_log2(m) -> np.ndarray:
    """Base-2 logarithm restricted to the support.

    Eigenvalues at or below ``SUPPORT_TOL`` map to 0, so the result is the
    logarithm on the support and vanishes on the kernel.
    """
    m = np.asarray(as_matrix(m), dtype=complex)
    _check_hermitian(m)
    w, v = np.linalg.eigh(_herm(m))
    if np.any(w < -PSD_TOL):
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w.min():.3e})")
    supp = w > SUPPORT_TOL
    return _apply(np.where(supp, np.log2(np.where(supp, w, 1.0)), 0.0), v)


def _tr_prod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``Re Tr[a b]`` over stacks, without forming the product."""
    return np.einsum("...ij,...ji->...", a, b).real


# --- prepared references ---------------------------------------------------

def _relative_entropy_against(sigma: np.ndarray):
    w, v = np.linalg.eigh(_herm(sigma))
    supp = w > SUPPORT_TOL
    log_sigma = _apply(np.where(supp, np.log2(np.where(supp, w, 1.0)), 0.0), v)
    kernel = v[:, ~supp]
    kernel_proj = kernel @ kernel.conj().T

    def f(rho):
        neg_entropy = -entropy_of_eigenvalues(eigvalsh(rho))
        out = np.maximum(neg_entropy - _tr_prod(rho, log_sigma), 0.0)
        if kernel.shape[1]:
            leak = _tr_prod(rho, kernel_proj)
            out = np.where(leak > SUPPORT_TOL, np.inf, out)
        return out

    return f


def _trace_against(sigma: np.ndarray):
    def f(rho):
        return np.clip(0.5 * np.abs(eigvalsh(rho - sigma)).sum(axis=-1), 0.0, 1.0)

    return f


def _bures_sq_against(sigma: np.ndarray):
    s = _sqrt_psd(sigma)

    def f(rho):
        root_fid = _trace_sqrt_psd(s @ rho @ s)
        return np.clip(2.0 * (1.0 - root_fid), 0.0, 2.0)

    return f


def _hellinger_sq_against(sigma: np.ndarray):
    s = _sqrt_psd(sigma)

    def f(rho):
        affinity = _tr_prod(_sqrt_psd(rho), s)
        return np.clip(2.0 * (1.0 - affinity), 0.0, 2.0)

    return f


def _qjsd_against(sigma: np.ndarray):
    s_sigma = entropy_of_eigenvalues(eigvalsh(sigma))

    def f(rho):
        s_mid = entropy_of_eigenvalues(eigvalsh(0.5 * (rho + sigma)))
        s_rho = entropy_of_eigenvalues(eigvalsh(rho))
        return np.clip(s_mid - 0.5 * s_rho - 0.5 * s_sigma, 0.0, 1.0)

    return f


@dataclass(frozen=True)
class DistanceMeasure:
    """A named distance with the properties it claims to satisfy."""

    name: str
    cli_name: str
    claims: frozenset
    units: str
    _prepare: Callable[[np.ndarray], Callable[[np.ndarray], np.ndarray]]

    def against(self, sigma):
        """Vectorized ``rho -> d(rho || sigma)`` for a fixed ``sigma``."""
        return self._prepare(np.asarray(as_matrix(sigma), dtype=complex))

    def __call__(self, rho, sigma) -> float:
        rho, sigma = as_matrix(rho), as_matrix(sigma)
        if rho.shape != sigma.shape:
            raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
        return float(self.against(sigma)(rho))

    evaluate = __call__

    def __repr__(self) -> str:
        return f"DistanceMeasure({self.name!r})"


_COMMON = {Prop.NON_NEGATIVE, Prop.INDISCERNIBLES, Prop.UNITARY_INVARIANCE,
           Prop.CPTP_MONOTONE, Prop.CONVEX_FIRST, Prop.CQ_DECOMPOSITION,
           Prop.RESTRICTED_ADDITIVITY}

RELATIVE_ENTROPY = DistanceMeasure(
    "relative_entropy", "relative-entropy", frozenset(_COMMON), "bits", _relative_entropy_against)
TRACE = DistanceMeasure(
    "trace", "trace", frozenset(_COMMON | {Prop.SYMMETRY, Prop.TRIANGLE}), "dimensionless",
    _trace_against)
# the squared Bures and Hellinger distances are not metrics: no triangle claim
BURES_SQ = DistanceMeasure(
    "bures_sq", "bures2", frozenset(_COMMON | {Prop.SYMMETRY}), "dimensionless",
    _bures_sq_against)
HELLINGER_SQ = DistanceMeasure(
    "hellinger_sq", "hellinger2", frozenset(_COMMON | {Prop.SYMMETRY}), "dimensionless",
    _hellinger_sq_against)
QJSD = DistanceMeasure(
    "qjsd", "qjsd", frozenset(_COMMON | {Prop.SYMMETRY}), "bits", _qjsd_against)

DISTANCES: dict[str, DistanceMeasure] = {
    d.name: d for d in (RELATIVE_ENTROPY, TRACE, BURES_SQ, HELLINGER_SQ, QJSD)
}


def get_distance(name: str | DistanceMeasure) -> DistanceMeasure:
    """Look up a distance by package name or CLI name."""
    if isinstance(name, DistanceMeasure):
        return name
    for d in DISTANCES.values():
        if name in (d.name, d.cli_name):
            return d
    raise KeyError(f"unknown distance {name!r}; choose from "
                   f"{', '.join(d.cli_name for d in DISTANCES.values())}")


def relative_entropy(rho, sigma) -> float:
    """``Tr[rho (log2 rho - log2 sigma)]`` in bits; ``inf`` off the support."""
    return RELATIVE_ENTROPY(rho, sigma)


def trace_distance(rho, sigma) -> float:
    return TRACE(rho, sigma)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    s = _sqrt_psd(as_matrix(rho))
    return float(_trace_sqrt_psd(s @ as_matrix(sigma) @ s)) ** 2


def bures_sq(rho, sigma) -> float:
    """``2 (1 - sqrt(F))``."""
    return BURES_SQ(rho, sigma)


def hellinger_sq(rho, sigma) -> float:
    """``2 (1 - Tr[sqrt(rho) sqrt(sigma)])``."""
    return HELLINGER_SQ(rho, sigma)


def qjsd(rho, sigma) -> float:
    """Quantum Jensen-Shannon divergence in bits."""
    return QJSD(rho, sigma)
