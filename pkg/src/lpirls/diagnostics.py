"""Checks of the convergence theory on small instances.

Range-space-property constants (exact for n <= 2, randomized lower bounds
otherwise), the Gaussian sample-size condition, enumeration oracles for
l_p regression and its basis-pursuit dual, and the constants and bounds
appearing in the global-linear and local-superlinear rate statements.
"""

import itertools
import math

import numpy as np

from .model import (
    DimensionTooLarge,
    InvalidRegime,
    NoSparseSolution,
    NoUniqueSolution,
    NoValidC,
    RspReport,
    TheoryConstants,
)

GRID_SIZE = 4096
GOLDEN_TOL = 1e-10
CONSISTENCY_TOL = 1e-10
TIE_TOL = 1e-10


# Range space property --------------------------------------------------------


def support_ratios(d, p, k):
    """Worst-case ratio ``sum_S |d_i|^p / sum_{S^c} |d_i|^p`` over ``|S| <= k``.

    ``d`` may be a single vector or a 2-d array of row vectors. The maximizing
    S is the k largest ``|d_i|`` (lowest index first on ties). Returns
    ``(ratios, order)`` with ``order`` the magnitude ranking of each row.
    """
    d = np.atleast_2d(np.asarray(d, dtype=float))
    mag = np.abs(d) ** p
    order = np.argsort(-mag, axis=1, kind="stable")
    srt = np.take_along_axis(mag, order, axis=1)
    top = srt[:, :k].sum(axis=1)
    rest = srt[:, k:].sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(rest > 0, top / np.where(rest > 0, rest, 1.0), np.where(top > 0, np.inf, 0.0))
    return ratios, order


def _report(a, p, k, d, method, ratio=None, order=None):
    if ratio is None:
        ratio, order = support_ratios(d, p, k)
        ratio, order = ratio[0], order[0]
    support = tuple(sorted(int(i) for i in order[:k]))
    return RspReport(p=p, k=k, eta=float(ratio), method=method,
                     witness_direction=np.asarray(d, dtype=float), witness_support=support)


def _sparse_range_vector(a, k):
    """A nonzero d in range(A) with at most k nonzeros, if dimension counting forces one.

    With U an orthonormal basis of range(A), the last m - k rows of U have
    a nontrivial null space whenever m - k < rank(A).
    """
    m = a.shape[0]
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    rank = int(np.sum(s > s[0] * max(a.shape) * np.finfo(float).eps)) if s[0] > 0 else 0
    if rank == 0 or m - k >= rank:
        return None
    u = u[:, :rank]
    c = np.linalg.svd(u[k:])[2][-1] if k < m else np.eye(rank)[0]
    d = u @ c
    d[k:] = 0.0
    return d


def _parallel_rows_direction(a, k):
    """For n = 2: a direction u with ``A u`` at most k-sparse, or None.

    ``A u`` vanishes on the zero rows and on every row parallel to u's normal.
    """
    m = a.shape[0]
    norms = np.linalg.norm(a, axis=1)
    zero = norms == 0
    best_rows = np.flatnonzero(zero)
    best_u = None
    for i in np.flatnonzero(~zero):
        cross = np.abs(a[:, 0] * a[i, 1] - a[:, 1] * a[i, 0])
        group = np.flatnonzero(zero | (cross <= 1e-12 * norms * norms[i]))
        if group.size > best_rows.size or best_u is None:
            best_rows, best_u = group, np.array([-a[i, 1], a[i, 0]]) / norms[i]
    if best_u is None or m - best_rows.size > k:
        return None
    d = a @ best_u
    d[best_rows] = 0.0
    return d


def rsp_exact(a_matrix, p, k):
    """Exact stable-RSP constant ``eta*`` of order k for matrices with n <= 2.

    For n = 1 the range is a line and a single evaluation suffices. For
    n = 2 directions ``d = A (cos t, sin t)`` are scanned over a 4096-point
    grid of ``t in [0, pi)`` together with every angle at which some
    ``d_i`` vanishes (the ratio's kinks, where its maximum sits for p = 1),
    then the best candidates are refined by golden-section search.
    """
    a = np.asarray(a_matrix, dtype=float)
    m, n = a.shape
    if n > 2 or m > 20:
        raise DimensionTooLarge(f"exact RSP needs n <= 2 and m <= 20, got {a.shape}")
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    if k == 0:
        d = a[:, 0]
        return RspReport(p, 0, 0.0, "exact", d, ())
    d_sparse = _sparse_range_vector(a, k)
    if d_sparse is not None:
        return _report(a, p, k, d_sparse, "exact")
    if n == 1:
        return _report(a, p, k, a[:, 0], "exact")
    d_par = _parallel_rows_direction(a, k)
    if d_par is not None:
        return _report(a, p, k, d_par, "exact")

    def f(theta):
        u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return support_ratios(u @ a.T, p, k)[0]

    grid = np.arange(GRID_SIZE) * (math.pi / GRID_SIZE)
    vals = f(grid)
    # kinks: u normal to row i makes d_i exactly zero (no trigonometric rounding,
    # which matters for p < 1 where |d_i|^p has a cusp there)
    normals = np.stack([-a[:, 1], a[:, 0]], axis=1)
    normals = normals[np.linalg.norm(normals, axis=1) > 0]
    kink_vals = support_ratios(normals @ a.T, p, k)[0] if len(normals) else np.array([-1.0])
    j = int(np.argmax(kink_vals))
    best_d, best_v = (normals[j] @ a.T if len(normals) else None), kink_vals[j]

    h = math.pi / GRID_SIZE
    for i in np.argsort(-vals, kind="stable")[:16]:
        t, v = _golden_max(lambda s: f(np.array([s]))[0], grid[i] - h, grid[i] + h)
        if v > best_v:
            best_d, best_v = a @ np.array([math.cos(t), math.sin(t)]), v
    return _report(a, p, k, best_d, "exact")


def _golden_max(fun, lo, hi, tol=GOLDEN_TOL):
    invphi = (math.sqrt(5) - 1) / 2
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = fun(c), fun(d)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = fun(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = fun(d)
    return (c, fc) if fc >= fd else (d, fd)


def rsp_randomized_lower_bound(a_matrix, p, k, num_samples, seed=0, chunk=8192):
    """Certified lower bound on the stable-RSP constant by sphere sampling.

    Directions ``x`` are drawn uniformly on the unit sphere (normalized
    Gaussians, drawn sequentially so a smaller ``num_samples`` with the same
    seed sees a prefix of the same sample). Returns the largest ratio over
    ``d = A x`` with its witness. If dimension counting guarantees a vector
    in range(A) with at most k nonzeros, ``eta`` is ``inf``.
    """
    a = np.asarray(a_matrix, dtype=float)
    m, n = a.shape
    if num_samples < 1:
        raise ValueError("num_samples must be positive")
    if k > 0:
        d_sparse = _sparse_range_vector(a, k)
        if d_sparse is not None:
            return _report(a, p, k, d_sparse, "randomized_lower_bound")
    rng = np.random.default_rng(seed)
    best = (-1.0, None, None)
    done = 0
    while done < num_samples:
        size = min(chunk, num_samples - done)
        x = rng.standard_normal((size, n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        d = x @ a.T
        ratios, order = support_ratios(d, p, k)
        i = int(np.argmax(ratios))
        if ratios[i] > best[0]:
            best = (float(ratios[i]), d[i], order[i])
        done += size
    return _report(a, p, k, best[1], "randomized_lower_bound", best[0], best[2])


def gaussian_rsp_condition(m, n, k, eta, delta):
    """Whether the sample-size condition for Gaussian A to have the stable RSP holds.

    Checks ``(m-n)^2/(m-n+1) >= 2k ln(em/k) (1.67 + 1/eta + sqrt(18 ln(2.5/delta)) / sqrt(2k ln(em/k)))^2``.
    """
    if k < 1:
        raise InvalidRegime("k must be at least 1")
    if m - n < 2 * k:
        raise InvalidRegime(f"need m - n >= 2k, got m - n = {m - n}, k = {k}")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    lhs, rhs = gaussian_rsp_sides(m, n, k, eta, delta)
    return lhs >= rhs


def gaussian_rsp_sides(m, n, k, eta, delta):
    lhs = (m - n) ** 2 / (m - n + 1)
    width = 2 * k * math.log(math.e * m / k)
    rhs = width * (1.67 + 1 / eta + math.sqrt(18 * math.log(2.5 / delta)) / math.sqrt(width)) ** 2
    return lhs, rhs


# Enumeration oracles ------------------------------------------------------------


def _lp_sum(r, p):
    r = np.abs(r)
    if p == 0:
        return float(np.count_nonzero(r > CONSISTENCY_TOL))
    return float(np.sum(r**p))


def _pick_unique(cands, objective, what):
    if not cands:
        raise NoSparseSolution(f"no support yields a consistent {what}")
    vals = np.array([objective(c) for c in cands])
    best = int(np.argmin(vals))
    scale = max(1.0, abs(vals[best]))
    for c, v in zip(cands, vals):
        if v - vals[best] <= TIE_TOL * scale and np.linalg.norm(c - cands[best]) > 1e-8 * max(
            1.0, np.linalg.norm(cands[best])
        ):
            raise NoUniqueSolution(f"two distinct {what} minimizers with objective {vals[best]:.6g}")
    return cands[best]


def _consistent_solve(mat, rhs):
    x = np.linalg.lstsq(mat, rhs, rcond=None)[0]
    scale = max(1.0, np.linalg.norm(rhs))
    if np.linalg.norm(mat @ x - rhs) > CONSISTENCY_TOL * scale:
        return None
    return x


def brute_force_lp_min(inst, p, k=None):
    """Minimize ``||A x - y||_p^p`` over x whose residual has at most k nonzeros.

    Every support S with ``|S| <= k`` is tried: the remaining equations
    ``a_i^T x = y_i`` are solved in the least-squares sense and kept when
    consistent. Under the range space property of order k this is the
    global minimizer of the l_p regression problem.

    Raises
    ------
    NoSparseSolution
        No support gives a consistent system.
    NoUniqueSolution
        Two distinct candidates tie for the minimal objective.
    """
    a, y = inst.a_matrix, inst.y
    m, n = a.shape
    k = inst.k if k is None else k
    if k is None:
        raise ValueError("k must be given or carried by the instance")
    if m > 25 or n > 4:
        raise DimensionTooLarge("brute force needs m <= 25 and n <= 4")
    cands = []
    for size in range(k + 1):
        for s in itertools.combinations(range(m), size):
            keep = np.setdiff1d(np.arange(m), s)
            x = _consistent_solve(a[keep], y[keep])
            if x is not None and not any(np.allclose(x, c, rtol=0, atol=1e-9) for c in cands):
                cands.append(x)
    return _pick_unique(cands, lambda x: _lp_sum(a @ x - y, p), "regression")


def vertex_lp_min(inst, p):
    """Global minimizer of ``||A x - y||_p^p`` (0 < p <= 1) by vertex enumeration.

    The objective is concave on every region of constant residual signs,
    so a minimizer interpolates n linearly independent rows. All n-subsets
    of rows are tried. Independent of any sparsity assumption.
    """
    a, y = inst.a_matrix, inst.y
    m, n = a.shape
    if math.comb(m, n) > 200_000:
        raise DimensionTooLarge("too many row subsets")
    cands = []
    for rows in itertools.combinations(range(m), n):
        sub = a[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, y[list(rows)])
        if not any(np.allclose(x, c, rtol=0, atol=1e-9) for c in cands):
            cands.append(x)
    return _pick_unique(cands, lambda x: _lp_sum(a @ x - y, p), "regression")


def range_complement_basis(a_matrix):
    """Rows forming an orthonormal basis of ``range(A)^perp`` (so ``null(D) = range(A)``)."""
    a = np.asarray(a_matrix, dtype=float)
    q, _ = np.linalg.qr(a, mode="complete")
    rank = np.linalg.matrix_rank(a)
    return q[:, rank:].T


def brute_force_basis_pursuit(d_matrix, z, p, k):
    """Minimize ``||r||_p^p`` subject to ``D r = z`` over r with at most k nonzeros."""
    d_matrix = np.asarray(d_matrix, dtype=float)
    z = np.asarray(z, dtype=float)
    m = d_matrix.shape[1]
    cands = []
    for size in range(k + 1):
        for t in itertools.combinations(range(m), size):
            r = np.zeros(m)
            if size:
                sol = _consistent_solve(d_matrix[:, list(t)], z)
                if sol is None:
                    continue
                r[list(t)] = sol
            elif np.linalg.norm(z) > CONSISTENCY_TOL * max(1.0, np.linalg.norm(z)):
                continue
            if not any(np.allclose(r, c, rtol=0, atol=1e-9) for c in cands):
                cands.append(r)
    return _pick_unique(cands, lambda r: _lp_sum(r, p), "basis pursuit")


def basis_pursuit_equivalence_check(inst, p, k=None, tol=1e-8):
    """Whether the regression optimum and the basis-pursuit optimum give the same residual.

    D spans ``range(A)^perp`` and ``z = -D y``; both problems are solved by
    independent support enumerations.
    """
    k = inst.k if k is None else k
    x_hat = brute_force_lp_min(inst, p, k)
    d = range_complement_basis(inst.a_matrix)
    r_bp = brute_force_basis_pursuit(d, -d @ inst.y, p, k)
    r_reg = inst.a_matrix @ x_hat - inst.y
    return bool(np.linalg.norm(r_bp - r_reg) <= tol * max(1.0, np.linalg.norm(r_reg)))


# Rate constants and bounds --------------------------------------------------


def _radius_condition(c, p, eta):
    return 2 * c ** (1 - p) * eta * (eta + 1) < (1 - c) ** (2 - p)


def largest_radius_constant(p, eta, tol=1e-6, c_min=1e-9):
    """Largest c in (0, 1), to ``tol``, with ``2 c^(1-p) eta (eta+1) < (1-c)^(2-p)``."""
    if not _radius_condition(c_min, p, eta):
        raise NoValidC(f"no valid c for eta = {eta}, p = {p}")
    lo, hi = c_min, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _radius_condition(mid, p, eta):
            lo = mid
        else:
            hi = mid
    return lo


def local_rate_constants(inst, p, eta):
    """Radius constant c, contraction factor mu and radius for local superlinear convergence.

    ``mu = 2 eta (eta+1) (1-c)^(p-2) min_{i in S*} |r*_i|^(p-1)`` and the
    basin is ``||A x - A x*||_1 <= c min_{i in S*} |r*_i|``.
    """
    if inst.x_star is None or inst.support_star is None:
        raise ValueError("instance needs x_star and support_star")
    if len(inst.support_star) == 0:
        raise ValueError("support_star is empty; the residual is already zero")
    r_star = inst.r_star
    rmin = float(np.min(np.abs(r_star[list(inst.support_star)])))
    c = largest_radius_constant(p, eta)
    mu = 2 * eta * (eta + 1) * (1 - c) ** (p - 2) * rmin ** (p - 1)
    return TheoryConstants(eta=eta, c=c, mu=mu, p=p, min_abs_residual=rmin)


def global_linear_rate(eta, m):
    """Per-iteration contraction ``1 - (3 - 4 eta)^2 / (294 eta m)`` of the l1 objective gap."""
    if not 0 < eta < 0.75:
        raise InvalidRegime("global linear rate needs 0 < eta < 3/4")
    return 1 - (3 - 4 * eta) ** 2 / (294 * eta * m)


def global_linear_envelope(trace_residuals, r_star, eta):
    """Gaps ``||r_(t+1)||_1 - ||r*||_1`` and their bounds ``rate^t * 3 ||r_1||_1``, t >= 1."""
    r1 = np.abs(trace_residuals[0]).sum()
    rate = global_linear_rate(eta, len(r_star))
    ref = np.abs(r_star).sum()
    gaps = np.array([np.abs(r).sum() - ref for r in trace_residuals[1:]])
    bounds = rate ** np.arange(1, len(gaps) + 1) * 3 * r1
    return gaps, bounds


def empirical_order(errors, floor=0.0):
    """Median three-point estimate of the convergence order of an error sequence.

    Each triple gives ``log(e_(t+1)/e_t) / log(e_t/e_(t-1))``. Errors at or
    below ``floor`` (the machine-precision regime) end the sequence. Returns
    nan if fewer than three usable errors remain.
    """
    e = []
    for v in np.asarray(errors, dtype=float):
        if not v > floor:
            break
        e.append(float(v))
    q = [math.log(e[t + 1] / e[t]) / math.log(e[t] / e[t - 1])
         for t in range(1, len(e) - 1) if e[t] != e[t - 1]]
    if not q:
        return math.nan
    return float(np.median(q))
