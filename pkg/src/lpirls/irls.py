"""Iteratively reweighted least squares for l_p regression, 0 <= p <= 1."""

import math

import numpy as np

from .model import (
    BestKTerm,
    ExponentialDecay,
    Fixed,
    IrlsConfig,
    IrlsResult,
    IterationRecord,
    IterationTrace,
    MissingStepNorm,
    RegressionInstance,
    ResidualQuantile,
    SmoothingState,
)
from .wls import solve_wls


def best_k_term_error(v, alpha):
    """l1 distance from ``v`` to its best ``alpha``-sparse approximation.

    Equals the sum of the ``m - alpha`` smallest magnitudes of ``v``.
    """
    a = np.abs(np.asarray(v, dtype=float))
    m = a.size
    if not 0 <= alpha <= m:
        raise ValueError("alpha must lie in [0, m]")
    if alpha == m:
        return 0.0
    return float(np.sort(a)[: m - alpha].sum())


def kth_largest_magnitude(v, j):
    """The j-th largest entry of ``|v|`` (1-based)."""
    a = np.abs(np.asarray(v, dtype=float))
    return float(np.sort(a)[a.size - j])


def update_weights(residual, eps, p):
    """IRLS weights ``max(|r_i|, eps)^(p-2)``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return np.maximum(np.abs(residual), eps) ** (p - 2.0)


def update_epsilon(state, residual, alpha, eps_floor, x_step=None):
    """Advance the smoothing parameter after a weighted least-squares step.

    ``x_step`` is ``||x^(t+1) - x^(t)||_2`` and is only used (and then
    required) by :class:`ExponentialDecay`.
    """
    rule = state.rule
    eps = state.eps_current
    m = np.size(residual)
    if isinstance(rule, Fixed):
        pass
    elif isinstance(rule, ExponentialDecay):
        if x_step is None:
            raise MissingStepNorm("exponential decay needs the step norm")
        if x_step <= 2.0 * rule.beta * eps:
            eps = rule.beta * eps
    elif isinstance(rule, ResidualQuantile):
        _check_alpha(alpha, m)
        eps = min(eps, kth_largest_magnitude(residual, alpha + 1) / m)
    elif isinstance(rule, BestKTerm):
        _check_alpha(alpha, m)
        eps = min(eps, best_k_term_error(residual, alpha) / m)
    else:
        raise TypeError(f"unknown smoothing rule {rule!r}")
    return SmoothingState(max(eps, eps_floor), rule)


def _check_alpha(alpha, m):
    if alpha is None:
        raise ValueError("this smoothing rule needs alpha (or an instance with k)")
    if not 0 <= alpha < m:
        raise ValueError("alpha must satisfy 0 <= alpha < m")


def _h(r, eps, p):
    a = np.abs(np.asarray(r, dtype=float))
    inside = a <= eps
    out = np.empty_like(a)
    if p == 0:
        out[~inside] = np.log(a[~inside])
        out[inside] = 0.5 * a[inside] ** 2 / eps**2 + math.log(eps) - 0.5
    else:
        out[~inside] = a[~inside] ** p / p
        out[inside] = 0.5 * a[inside] ** 2 / eps ** (2.0 - p) + (1.0 / p - 0.5) * eps**p
    return out


def smoothed_objective(residual, eps, p):
    """Smoothed l_p objective ``H_eps(r) = sum_i h_eps(r_i)``.

    For ``0 < p <= 1`` each term is ``|r|^p / p`` outside ``[-eps, eps]`` and
    the matching quadratic inside (a scaled Huber loss at p = 1). For
    ``p = 0`` the outer branch is ``log|r|`` (smoothed sum-of-logs).
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    return float(_h(residual, eps, p).sum())


def quadratic_majorizer(v, r, eps, p):
    """``Q_eps(v, r)``: quadratic model of ``H_eps`` around ``r`` evaluated at ``v``."""
    v = np.asarray(v, dtype=float)
    r = np.asarray(r, dtype=float)
    if v.shape != r.shape:
        raise ValueError("v and r must have the same shape")
    denom = np.maximum(np.abs(r), eps) ** (2.0 - p)
    return float(np.sum(_h(r, eps, p) + 0.5 * (v**2 - r**2) / denom))


def lp_objective(residual, p, eps=None):
    """``||r||_p^p / p``; for ``p = 0`` the sum of ``log max(|r_i|, eps)``."""
    a = np.abs(np.asarray(residual, dtype=float))
    if p == 0:
        floor = eps if eps is not None else np.finfo(float).tiny
        return float(np.log(np.maximum(a, floor)).sum())
    return float(np.sum(a**p) / p)


def _resolve_alpha(inst, cfg):
    if cfg.alpha is not None:
        alpha = cfg.alpha
    elif inst.k is not None:
        alpha = inst.k
    else:
        alpha = None
    if alpha is not None and alpha >= inst.m:
        raise ValueError("alpha must be smaller than m")
    return alpha


def irls_solve(inst: RegressionInstance, cfg: IrlsConfig) -> IrlsResult:
    """Run IRLS on ``min_x ||A x - y||_p``.

    Each iteration solves the weighted least-squares problem, then updates
    the smoothing parameter from the new residual, then the weights. The
    loop stops when ``||x_t - x_{t-1}|| / ||x_t||`` drops below
    ``cfg.stop_rel_change``, after ``cfg.max_iters`` solves, or (if
    ``cfg.stop_on_stall``) when the l_p objective stops decreasing.
    """
    a, y = inst.a_matrix, inst.y
    m, n = a.shape
    p = cfg.p
    alpha = _resolve_alpha(inst, cfg)
    if alpha is None and isinstance(cfg.smoothing, (ResidualQuantile, BestKTerm)):
        raise ValueError("smoothing rule needs alpha but neither cfg.alpha nor inst.k is set")

    x_star = inst.x_star
    xs_norm = None if x_star is None else float(np.linalg.norm(x_star))
    state = SmoothingState.initial(cfg.smoothing)
    trace = IterationTrace()

    def record(x, x_prev):
        nonlocal state
        r = a @ x - y
        step = float(np.linalg.norm(x - x_prev))
        state = update_epsilon(state, r, alpha, cfg.eps_floor, step)
        eps = state.eps_current
        sigma = best_k_term_error(r, alpha) if alpha is not None else math.nan
        rel = None
        if x_star is not None and xs_norm > 0:
            rel = float(np.linalg.norm(x - x_star) / xs_norm)
        trace.append(
            IterationRecord(
                t=len(trace) + 1,
                x=x,
                residual=r,
                eps=eps,
                sigma=sigma,
                obj_lp=lp_objective(r, p, eps),
                obj_smoothed=smoothed_objective(r, eps, p),
                rel_error=rel,
            )
        )
        return update_weights(r, eps, p)

    x_prev = np.zeros(n)
    if isinstance(cfg.init, str) and cfg.init == "unit":
        w = np.ones(m)
    else:
        x0 = np.zeros(n) if isinstance(cfg.init, str) else np.asarray(cfg.init, dtype=float).copy()
        if x0.shape != (n,):
            raise ValueError("initial x has the wrong length")
        w = record(x0, x_prev)
        x_prev = x0

    stop = "max_iters"
    for _ in range(cfg.max_iters):
        x = solve_wls(a, y, w, method=cfg.wls_method)
        w = record(x, x_prev)
        nx = np.linalg.norm(x)
        change = np.linalg.norm(x_prev - x)
        if (change < cfg.stop_rel_change * nx) if nx > 0 else change == 0:
            stop = "rel_change"
            break
        if cfg.stop_on_stall and len(trace) >= 2:
            prev, cur = trace[-2].obj_lp, trace[-1].obj_lp
            if prev - cur <= cfg.stall_tol * max(1.0, abs(prev)):
                stop = "stalled"
                break
        x_prev = x
    return IrlsResult(x_hat=trace[-1].x, trace=trace, stop_reason=stop)
