"""Independent reference computations used as test oracles.

Nothing here imports the package: states, entropies and the measurement
search are rebuilt from numpy primitives so that agreement is evidence
rather than tautology.
"""
import numpy as np
from scipy.optimize import minimize

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def werner_matrix(z):
    phi = np.zeros(4, dtype=complex)
    phi[0] = phi[3] = 1 / np.sqrt(2)
    return z * np.outer(phi, phi.conj()) + (1 - z) * np.eye(4) / 4


def entropy_bits(m):
    w = np.linalg.eigvalsh(m)
    w = w[w > 1e-15]
    return float(-(w * np.log2(w)).sum())


def reduce_a(m):
    return np.trace(m.reshape(2, 2, 2, 2), axis1=1, axis2=3)


def reduce_b(m):
    return np.trace(m.reshape(2, 2, 2, 2), axis1=0, axis2=2)


def _entropy_bits_stack(ms):
    w = np.linalg.eigvalsh(ms)
    safe = np.where(w > 1e-15, w, 1.0)
    return -(np.where(w > 1e-15, w * np.log2(safe), 0.0)).sum(axis=-1)


def conditional_entropy_after(m, theta, phi):
    """``sum_j p_j S(rho_B|j)`` for qubit bases with Bloch angles (theta, phi).

    ``theta`` and ``phi`` may be arrays of equal shape.
    """
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    n = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], -1)
    ns = np.tensordot(n, np.array([SX, SY, SZ]), axes=(-1, 0))
    total = np.zeros(theta.shape)
    for sign in (1, -1):
        proj = (np.eye(2) + sign * ns) / 2
        big = np.einsum("...ab,xy->...axby", proj, np.eye(2)).reshape(theta.shape + (4, 4))
        cond = np.trace((big @ m @ big).reshape(theta.shape + (2, 2, 2, 2)), axis1=-4, axis2=-2)
        p = np.trace(cond, axis1=-2, axis2=-1).real
        safe = np.where(p > 1e-14, p, 1.0)
        total += np.where(p > 1e-14, p * _entropy_bits_stack(cond / safe[..., None, None]), 0.0)
    return total


def discord_brute_force(m, step_deg=1.0):
    """Discord (measurement on A) by a full-sphere grid plus Nelder-Mead polish."""
    thetas = np.deg2rad(np.arange(0, 180 + 1e-9, step_deg))
    phis = np.deg2rad(np.arange(0, 360, step_deg))
    t, p = np.meshgrid(thetas, phis, indexing="ij")
    values = conditional_entropy_after(m, t, p)
    k = np.unravel_index(np.argmin(values), values.shape)
    start = np.array([t[k], p[k]])
    res = minimize(lambda x: float(conditional_entropy_after(m, x[0], x[1])), start,
                   method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-13})
    cond_min = min(float(values[k]), float(res.fun))
    mi = entropy_bits(reduce_a(m)) + entropy_bits(reduce_b(m)) - entropy_bits(m)
    return mi - (entropy_bits(reduce_b(m)) - cond_min)


def werner_discord_closed_form(z):
    """Analytic Werner discord; every measurement basis is optimal by symmetry."""
    def h(ps):
        ps = np.asarray(ps, dtype=float)
        ps = ps[ps > 0]
        return float(-(ps * np.log2(ps)).sum())
    mi = 2 - h([(1 - z) / 4] * 3 + [(1 + 3 * z) / 4])
    # conditional states have eigenvalues (1 +- z)/2, rho_B = I/2
    classical = 1 - h([(1 - z) / 2, (1 + z) / 2])
    return mi - classical
