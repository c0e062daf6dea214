"""Stacked Hermitian kernels with closed forms for 2x2 blocks.

The measurement search evaluates distances on thousands of tiny matrices;
LAPACK call overhead dominates there, so qubit-sized blocks take the
analytic route.
"""
import numpy as np

# eigenvalues this small are numerical zeros; keeps sqrt() from turning
# 1e-17 noise into 3e-9 contributions
SQRT_ZERO = 1e-13


def eigvalsh(m: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of Hermitian matrices stacked on the last two axes."""
    if m.shape[-1] == 2:
        a = m[..., 0, 0].real
        d = m[..., 1, 1].real
        b = m[..., 1, 0]
        half_tr = 0.5 * (a + d)
        r = np.sqrt((0.5 * (a - d)) ** 2 + b.real ** 2 + b.imag ** 2)
        return np.stack([half_tr - r, half_tr + r], axis=-1)
    return np.linalg.eigvalsh(m)


def sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Principal square root of stacked PSD matrices.

    Eigenvalues at or below ``SQRT_ZERO`` are treated as exact zeros.
    """
    if m.shape[-1] == 2:
        # sqrt(M) = (M + sqrt(det) I) / sqrt(tr + 2 sqrt(det))
        w = eigvalsh(m)
        w = np.where(w > SQRT_ZERO, w, 0.0)
        s = np.sqrt(w[..., 0] * w[..., 1])
        t = np.sqrt(w[..., 0] + w[..., 1] + 2 * s)
        eye = np.eye(2)
        # zero matrix: t == 0, result is 0
        safe_t = np.where(t > 0, t, 1.0)
        out = (m + s[..., None, None] * eye) / safe_t[..., None, None]
        return np.where((t > 0)[..., None, None], out, 0.0)
    w, v = np.linalg.eigh(m)
    w = np.where(w > SQRT_ZERO, w, 0.0)
    return (v * np.sqrt(w)[..., None, :]) @ np.swapaxes(v, -1, -2).conj()


def trace_sqrt_psd(m: np.ndarray) -> np.ndarray:
    """``Tr sqrt(M)`` for stacked PSD matrices."""
    w = eigvalsh(m)
    return np.sqrt(np.where(w > SQRT_ZERO, w, 0.0)).sum(axis=-1)
