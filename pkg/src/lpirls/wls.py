"""Weighted least squares, the inner step of every IRLS iteration."""

import numpy as np
import scipy.linalg as sla

from .model import SingularSystem

_JITTER = (1e-14, 1e-13, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)
_RANK_TOL = 1e-13


def solve_wls(a_matrix, y, weights, method="qr"):
    """Minimize ``sum_i w_i (a_i^T x - y_i)^2`` over x.

    Solved by Householder QR of ``W^(1/2) A`` with weights rescaled by their
    maximum (the minimizer does not change). Near an IRLS fixed point with
    p < 1 the weights spread over many orders of magnitude, and forming
    ``A^T W A`` would square an already large condition number.

    If R is numerically rank deficient the minimum-norm minimizer is taken
    from an SVD of ``W^(1/2) A``. ``method="normal"`` instead solves the
    normal equations by Cholesky, adding a diagonal shift
    ``lam * trace(A^T W A) / n`` with ``lam`` escalating from 1e-14 to 1e-8
    whenever the factorization fails.

    Raises
    ------
    SingularSystem
        If every shift still leaves the system numerically singular.
    """
    a = np.asarray(a_matrix, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(weights, dtype=float)
    if w.shape != y.shape or a.shape[0] != y.shape[0]:
        raise ValueError("shape mismatch between A, y and weights")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be positive and finite")

    s = np.sqrt(w / w.max())
    sa = a * s[:, None]
    sy = y * s
    if method not in ("qr", "normal"):
        raise ValueError("method must be 'qr' or 'normal'")
    if method == "qr":
        if a.shape[0] >= a.shape[1]:
            q, r = np.linalg.qr(sa)
            d = np.abs(np.diag(r))
            if d.min() > _RANK_TOL * d.max():
                x = sla.solve_triangular(r, q.T @ sy, check_finite=False)
                if np.all(np.isfinite(x)):
                    return x
        # rank deficient: minimum-norm solution from the SVD of W^(1/2) A
        try:
            x = sla.lstsq(sa, sy, cond=_RANK_TOL, lapack_driver="gelsd")[0]
        except (np.linalg.LinAlgError, ValueError):
            x = None
        if x is not None and np.all(np.isfinite(x)):
            return x
    return _jittered_normal_equations(sa, sy)


def _jittered_normal_equations(sa, sy):
    gram = sa.T @ sa
    rhs = sa.T @ sy
    n = gram.shape[0]
    scale = np.trace(gram) / n
    for lam in (0.0,) + _JITTER:
        try:
            factor = sla.cho_factor(gram + lam * scale * np.eye(n))
        except np.linalg.LinAlgError:
            continue
        x = sla.cho_solve(factor, rhs)
        if np.all(np.isfinite(x)):
            return x
    raise SingularSystem("A^T W A is singular even after diagonal jitter")


def spectral_norm(a_matrix, max_iters=1000, tol=1e-12, seed=0):
    """Largest singular value of ``a_matrix`` by power iteration on ``A^T A``."""
    a = np.asarray(a_matrix, dtype=float)
    if a.size == 0:
        raise ValueError("empty matrix")
    v = np.random.default_rng(seed).standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iters):
        u = a.T @ (a @ v)
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return 0.0
        v = u / nu
        new = np.sqrt(nu)
        if abs(new - est) <= tol * new:
            break
        est = new
    return float(np.linalg.norm(a @ v))
