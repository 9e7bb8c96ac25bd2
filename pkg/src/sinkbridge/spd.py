"""Dense symmetric-matrix primitives.

Everything here goes through the symmetric eigendecomposition rather than
Cholesky so that near-singular positive semi-definite inputs are handled
gracefully.  All constructors symmetrize with (A + A')/2 to kill round-off
drift, and all tolerance checks are relative to the spectral scale.
"""

import numpy as np

from .errors import DomainError, ShapeError

# Constructor tolerances: absolute eigenvalue noise allowed on PSD inputs and
# relative eigenvalue gap required of SPD inputs.
PSD_ATOL = 1e-10
SPD_RTOL = 1e-12


def symmetrize(a) -> np.ndarray:
    """Return the symmetric part (A + A')/2 of a square matrix."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    return 0.5 * (a + a.T)


def check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"dimension mismatch: {a.shape} vs {b.shape}")


def spectral_norm(a) -> float:
    return float(np.linalg.norm(np.atleast_2d(a), 2))


def eig_range(a) -> tuple[float, float]:
    """Smallest and largest eigenvalue of the symmetrized input."""
    w = np.linalg.eigvalsh(symmetrize(a))
    return float(w[0]), float(w[-1])


def clamp_psd(a) -> np.ndarray:
    """Validated PSD constructor.

    Symmetrizes, then clamps eigenvalue noise in [-atol*(1+||a||), 0) to
    zero.  Genuinely negative eigenvalues raise a DomainError.
    """
    a = symmetrize(a)
    w, u = np.linalg.eigh(a)
    floor = -PSD_ATOL * (1.0 + spectral_norm(a))
    if w[0] < floor:
        raise DomainError(f"matrix is not PSD: min eigenvalue {w[0]:.3e}")
    w = np.maximum(w, 0.0)
    return symmetrize((u * w) @ u.T)


def require_spd(a) -> np.ndarray:
    """Validated SPD constructor: symmetrize and check eig_min > rtol*eig_max."""
    a = symmetrize(a)
    lo, hi = eig_range(a)
    if not (lo > SPD_RTOL * max(hi, 0.0)):
        raise DomainError(f"matrix is not SPD: eigenvalue range [{lo:.3e}, {hi:.3e}]")
    return a


def is_spd(a) -> bool:
    try:
        require_spd(a)
    except (DomainError, ShapeError):
        return False
    return True


def sym_inv(a) -> np.ndarray:
    """Inverse of an SPD matrix via eigendecomposition; preserves symmetry exactly."""
    a = require_spd(a)
    w, u = np.linalg.eigh(a)
    return symmetrize((u / w) @ u.T)


def principal_sqrt(a) -> np.ndarray:
    """Principal symmetric square root of an SPD matrix."""
    a = require_spd(a)
    w, u = np.linalg.eigh(a)
    return symmetrize((u * np.sqrt(w)) @ u.T)


def psd_sqrt(a) -> np.ndarray:
    """Square root of a PSD matrix, clamping eigenvalue noise to zero."""
    a = clamp_psd(a)
    w, u = np.linalg.eigh(a)
    return symmetrize((u * np.sqrt(np.maximum(w, 0.0))) @ u.T)


def geometric_mean(u, v) -> np.ndarray:
    """Geometric mean of two SPD matrices.

    Computed as v^{1/2} (v^{-1/2} u v^{-1/2})^{1/2} v^{1/2}; symmetric in its
    arguments, and equal to (uv)^{1/2} when u and v commute.
    """
    u = require_spd(u)
    v = require_spd(v)
    check_same_dim(u, v)
    w, q = np.linalg.eigh(v)
    v_half = (q * np.sqrt(w)) @ q.T
    v_inv_half = (q / np.sqrt(w)) @ q.T
    inner = principal_sqrt(v_inv_half @ u @ v_inv_half)
    return symmetrize(v_half @ inner @ v_half)


def loewner_leq(a, b, tol: float = 1e-10) -> bool:
    """True iff a <= b in the Loewner order, up to spectral-scale noise tol."""
    a = symmetrize(a)
    b = symmetrize(b)
    check_same_dim(a, b)
    diff = b - a
    lo, _ = eig_range(diff)
    return lo >= -tol * (1.0 + spectral_norm(diff))


def loewner_lt(a, b, tol: float = 1e-10) -> bool:
    """True iff a < b strictly: eig_min(b - a) clears the noise floor."""
    a = symmetrize(a)
    b = symmetrize(b)
    check_same_dim(a, b)
    diff = b - a
    lo, _ = eig_range(diff)
    return lo > tol * (1.0 + spectral_norm(diff))


def ando_hemmen_check(u, v) -> bool:
    """Check the square-root Lipschitz inequality on an SPD pair.

    ||u^{1/2} - v^{1/2}||_2 <= (l_min(u)^{1/2} + l_min(v)^{1/2})^{-1} ||u - v||_2.
    Returns True when it holds; a False return signals a numerics bug, since
    the inequality is a theorem.
    """
    u = require_spd(u)
    v = require_spd(v)
    check_same_dim(u, v)
    lhs = spectral_norm(principal_sqrt(u) - principal_sqrt(v))
    lo_u, _ = eig_range(u)
    lo_v, _ = eig_range(v)
    rhs = spectral_norm(u - v) / (np.sqrt(lo_u) + np.sqrt(lo_v))
    return lhs <= rhs * (1.0 + 1e-12) + 1e-14
