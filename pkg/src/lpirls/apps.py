"""Synthetic data generators, baselines, metrics and application pipelines.

Random streams
--------------
Every generator derives independent Philox (counter-based) streams from
``numpy.random.SeedSequence(seed)``, one per field, so a seed fixes the
output regardless of platform or of how many trials run in parallel:

========  =====================================================
stream    contents
========  =====================================================
0         feature matrix A
1         ground truth x*
2         corrupted / shuffled / positive-sign index selection
3         outlier values, permutation, or salt-vs-pepper coin
4         dense noise
========  =====================================================
"""

import math

import numpy as np

from .irls import irls_solve
from .model import BestKTerm, IrlsConfig, RegressionInstance, ZeroGroundTruth
from .wls import spectral_norm

N_STREAMS = 5


def streams(seed):
    """The per-field random generators for ``seed``."""
    children = np.random.SeedSequence(int(seed)).spawn(N_STREAMS)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


# Generators ------------------------------------------------------------------


def gen_rr(m, n, k, sigma=0.0, seed=0):
    """Robust regression data: k responses replaced by standard normal outliers.

    The remaining responses are ``a_i^T x* + sigma * noise``.
    """
    if not 0 <= k <= m:
        raise ValueError("need 0 <= k <= m")
    g_a, g_x, g_idx, g_out, g_noise = streams(seed)
    a = g_a.standard_normal((m, n))
    x = g_x.standard_normal(n)
    idx = np.sort(g_idx.choice(m, size=k, replace=False))
    y = a @ x
    if sigma > 0:
        y = y + sigma * g_noise.standard_normal(m)
    y[idx] = g_out.standard_normal(k)
    if sigma == 0:
        # an outlier may coincide with the clean value only with probability 0
        support = tuple(int(i) for i in np.flatnonzero(a @ x - y))
    else:
        support = tuple(int(i) for i in idx)
    return RegressionInstance(
        a, y, x_star=x, k=k, support_star=support, noise_sigma=float(sigma),
        meta={"generator": "rr", "m": m, "n": n, "k": k, "sigma": float(sigma), "seed": int(seed)},
    )


def gen_slr(m, n, sigma=0.0, shuffle_ratio=0.5, seed=0):
    """Shuffled (unlabeled) regression: ``y = Pi A x* + noise``.

    ``ceil(shuffle_ratio * m)`` responses are permuted among themselves. The
    instance's ``k`` counts the responses that actually moved, and
    ``meta["permutation"]`` holds ``perm`` with ``y_clean = (A x*)[perm]``.
    """
    if not 0 <= shuffle_ratio <= 1:
        raise ValueError("shuffle_ratio must lie in [0, 1]")
    g_a, g_x, g_idx, g_perm, g_noise = streams(seed)
    a = g_a.standard_normal((m, n))
    x = g_x.standard_normal(n)
    y0 = a @ x
    n_shuffle = math.ceil(shuffle_ratio * m - 1e-12)
    chosen = g_idx.choice(m, size=n_shuffle, replace=False)
    perm = np.arange(m)
    perm[chosen] = chosen[g_perm.permutation(n_shuffle)]
    y = y0[perm]
    if sigma > 0:
        y = y + sigma * g_noise.standard_normal(m)
    moved = np.flatnonzero(y0[perm] != y0)
    return RegressionInstance(
        a, y, x_star=x, k=int(moved.size), support_star=tuple(int(i) for i in moved),
        noise_sigma=float(sigma),
        meta={"generator": "slr", "m": m, "n": n, "sigma": float(sigma),
              "shuffle_ratio": float(shuffle_ratio), "seed": int(seed),
              "permutation": perm.tolist()},
    )


def gen_rpr(m, n, num_positive_sign, seed=0):
    """Real phase retrieval data ``y_i = |a_i^T x*|`` posed as robust regression.

    Rows outside a random set of ``num_positive_sign`` indices have their
    response sign flipped; rows with negative response then have both row and
    response negated. The residual against the recorded ``x*`` is nonzero
    exactly off the chosen set; against ``-x*`` it is nonzero exactly on it.
    """
    if not 0 <= num_positive_sign <= m:
        raise ValueError("need 0 <= num_positive_sign <= m")
    g_a, g_x, g_idx, _, _ = streams(seed)
    a = g_a.standard_normal((m, n))
    x = g_x.standard_normal(n)
    idx = g_idx.choice(m, size=num_positive_sign, replace=False)
    ax = a @ x
    y = -ax
    y[idx] = ax[idx]
    neg = y < 0
    y[neg] = -y[neg]
    a[neg] = -a[neg]
    k = m - num_positive_sign
    support = tuple(int(i) for i in np.flatnonzero(a @ x - y))
    return RegressionInstance(
        a, y, x_star=x, k=k, support_star=support, noise_sigma=0.0,
        meta={"generator": "rpr", "m": m, "n": n, "num_positive_sign": int(num_positive_sign),
              "seed": int(seed)},
    )


def salt_pepper_corrupt(image_vector, corruption_ratio, seed=0):
    """Set ``ceil(ratio * m)`` random pixels to 0 or 1 with equal probability."""
    if not 0 <= corruption_ratio <= 1:
        raise ValueError("corruption_ratio must lie in [0, 1]")
    f = np.array(image_vector, dtype=float)
    _, _, g_idx, g_coin, _ = streams(seed)
    count = math.ceil(corruption_ratio * f.size - 1e-12)
    idx = g_idx.choice(f.size, size=count, replace=False)
    f[idx] = g_coin.integers(0, 2, size=count).astype(float)
    return f


def synthetic_face_matrix(m=500, n=60, rank=5, seed=0):
    """Nonnegative rank-``rank`` matrix with ``n + 1`` columns and entries in [0, 1].

    Stands in for a stack of images of one face under varying illumination.
    """
    g_u, g_v, _, _, _ = streams(seed)
    u = g_u.uniform(size=(m, rank))
    v = g_v.uniform(size=(rank, n + 1))
    f = u @ v
    return f / f.max()


# Metrics and baselines -------------------------------------------------------


def relative_error(x_hat, x_star, up_to_sign=False):
    """``||x_hat - x*|| / ||x*||``, optionally minimized over the sign of x*."""
    x_hat = np.asarray(x_hat, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    ref = np.linalg.norm(x_star)
    if ref == 0:
        raise ZeroGroundTruth("||x_star|| is zero")
    err = np.linalg.norm(x_hat - x_star)
    if up_to_sign:
        err = min(err, np.linalg.norm(x_hat + x_star))
    return float(err / ref)


def least_squares(a_matrix, y):
    return np.linalg.lstsq(np.asarray(a_matrix, dtype=float), np.asarray(y, dtype=float), rcond=None)[0]


def subgradient_baseline(inst, max_iters=10000, return_objectives=False):
    """Subgradient descent on ``||A x - y||_1`` from x = 0.

    Step ``t`` (0-based) has length ``1 / ||A||_2 / (t + 1)`` along
    ``-A^T sign(A x - y)``. Returns the best iterate seen; with
    ``return_objectives`` also the objective of every iterate.
    """
    a, y = inst.a_matrix, inst.y
    step0 = 1.0 / spectral_norm(a)
    x = np.zeros(a.shape[1])
    best_x, best_obj = x, np.abs(y).sum()
    objs = np.empty(max_iters + 1)
    objs[0] = best_obj
    for t in range(max_iters):
        g = a.T @ np.sign(a @ x - y)
        x = x - step0 / (t + 1) * g
        obj = np.abs(a @ x - y).sum()
        objs[t + 1] = obj
        if obj < best_obj:
            best_x, best_obj = x, obj
    if return_objectives:
        return best_x, objs
    return best_x


# Pipelines -------------------------------------------------------------------


def phase_retrieval_pipeline(inst, p=0.1, max_iters=50, alpha=None):
    """Recover ``+-x*`` from ``y = |A x*|`` (sign-adjusted rows) by l_p regression.

    ``alpha`` defaults to the smaller of the two candidate residual
    sparsities, ``min(k, m - k)``. Returns ``(x_hat, rel_error_up_to_sign)``.
    """
    if alpha is None:
        alpha = min(inst.k, inst.m - inst.k)
    res = irls_solve(inst, IrlsConfig(p=p, smoothing=BestKTerm(), alpha=alpha, max_iters=max_iters))
    err = None
    if inst.x_star is not None:
        err = relative_error(res.x_hat, inst.x_star, up_to_sign=True)
    return res.x_hat, err


def restoration_pipeline(face_matrix, column_index, corruption_ratio, p=0.1, seed=0,
                         method="irls", max_iters=50, alpha=None):
    """Restore one salt-and-pepper-corrupted column from the remaining ones.

    ``method`` is ``"irls"`` (l_p regression), ``"ls"`` (least squares on
    the corrupted column) or ``"ls_star"`` (least squares on the clean
    column, a reference that never sees the corruption). ``alpha`` defaults
    to the number of corrupted pixels. Returns ``(restored, rel_error)``.
    """
    f_all = np.asarray(face_matrix, dtype=float)
    m = f_all.shape[0]
    f = f_all[:, column_index]
    f_rest = np.delete(f_all, column_index, axis=1)
    corrupted = salt_pepper_corrupt(f, corruption_ratio, seed)
    if method == "irls":
        if alpha is None:
            alpha = min(math.ceil(corruption_ratio * m - 1e-12), m - 1)
        inst = RegressionInstance(f_rest, corrupted)
        res = irls_solve(inst, IrlsConfig(p=p, smoothing=BestKTerm(), alpha=alpha, max_iters=max_iters))
        x_hat = res.x_hat
    elif method == "ls":
        x_hat = least_squares(f_rest, corrupted)
    elif method == "ls_star":
        x_hat = least_squares(f_rest, f)
    else:
        raise ValueError(f"unknown method {method!r}")
    restored = f_rest @ x_hat
    return restored, float(np.linalg.norm(restored - f) / np.linalg.norm(f))
