"""Core data types shared by the solver, diagnostics and application code."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence, Union

import numpy as np


class LpIrlsError(Exception):
    """Base class for all errors raised by this package."""


class SingularSystem(LpIrlsError):
    """The weighted normal equations could not be factorized."""


class MissingStepNorm(LpIrlsError):
    """Exponential-decay smoothing was asked to update without a step norm."""


class DimensionTooLarge(LpIrlsError):
    """An exact (enumerative) diagnostic was called outside its tractable range."""


class InvalidRegime(LpIrlsError):
    """Parameters fall outside the regime where a bound is defined."""


class NoSparseSolution(LpIrlsError):
    """No support of the allowed size gives a consistent linear system."""


class NoUniqueSolution(LpIrlsError):
    """Two distinct candidates attain the same minimal objective."""


class NoValidC(LpIrlsError):
    """No radius constant satisfies the local convergence condition."""


class ZeroGroundTruth(LpIrlsError):
    """Relative error requested against an all-zero reference."""


# Smoothing rules -----------------------------------------------------------


@dataclass(frozen=True)
class Fixed:
    """Keep the smoothing parameter constant."""

    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("Fixed smoothing requires eps > 0")


@dataclass(frozen=True)
class ExponentialDecay:
    """Multiply eps by ``beta`` whenever the iterate moved by at most ``2*beta*eps``."""

    eps0: float = 1.0
    beta: float = 0.5

    def __post_init__(self):
        if not self.eps0 > 0:
            raise ValueError("eps0 must be positive")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")


@dataclass(frozen=True)
class ResidualQuantile:
    """eps <- min(eps, (alpha+1)-th largest |r_i| / m)."""


@dataclass(frozen=True)
class BestKTerm:
    """eps <- min(eps, sigma / m), sigma the best alpha-term l1 approximation error."""


SmoothingRule = Union[Fixed, ExponentialDecay, ResidualQuantile, BestKTerm]

DYNAMIC_RULES = (ExponentialDecay, ResidualQuantile, BestKTerm)


@dataclass(frozen=True)
class SmoothingState:
    eps_current: float
    rule: SmoothingRule

    @classmethod
    def initial(cls, rule: SmoothingRule) -> "SmoothingState":
        if isinstance(rule, Fixed):
            return cls(rule.eps, rule)
        if isinstance(rule, ExponentialDecay):
            return cls(rule.eps0, rule)
        return cls(math.inf, rule)


# Problem instances -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RegressionInstance:
    """A robust regression problem ``min_x ||A x - y||_p``.

    Parameters
    ----------
    a_matrix : (m, n) array
        Feature matrix, one sample per row.
    y : (m,) array
        Responses.
    x_star : (n,) array, optional
        Ground-truth coefficients, when known.
    k : int, optional
        Number of corrupted responses (sparsity of ``A x_star - y``).
    support_star : tuple of int, optional
        Indices of the corrupted responses.
    noise_sigma : float, optional
        Standard deviation of dense noise added on top of the sparse
        corruption. ``0.0`` marks noiseless synthetic data (sparsity is
        checked exactly), a positive value marks approximately sparse data
        (sparsity is not checked) and ``None`` means unknown provenance
        (sparsity checked with a 1e-12 threshold).
    meta : dict
        Free-form provenance (generator name, parameters, seed, ...).
    """

    a_matrix: np.ndarray
    y: np.ndarray
    x_star: np.ndarray | None = None
    k: int | None = None
    support_star: tuple[int, ...] | None = None
    noise_sigma: float | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        a = np.array(self.a_matrix, dtype=float)
        y = np.array(self.y, dtype=float)
        if y.ndim == 2 and 1 in y.shape:
            y = y.ravel()
        a.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "a_matrix", a)
        object.__setattr__(self, "y", y)
        if self.x_star is not None:
            x = np.array(self.x_star, dtype=float).ravel()
            x.setflags(write=False)
            object.__setattr__(self, "x_star", x)
        if self.support_star is not None:
            object.__setattr__(self, "support_star", tuple(int(i) for i in self.support_star))

    @property
    def m(self) -> int:
        return self.a_matrix.shape[0]

    @property
    def n(self) -> int:
        return self.a_matrix.shape[1]

    def residual(self, x: np.ndarray) -> np.ndarray:
        return self.a_matrix @ x - self.y

    @property
    def r_star(self) -> np.ndarray | None:
        if self.x_star is None:
            return None
        return self.residual(self.x_star)


def validate_instance(inst: RegressionInstance) -> list[str]:
    """Return a list of human-readable invariant violations (empty if valid)."""
    problems = []
    a, y = inst.a_matrix, inst.y
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        return ["a_matrix must be a non-empty 2-d array"]
    if y.ndim != 1 or y.shape[0] != a.shape[0]:
        return ["dimension mismatch"]
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(y))):
        problems.append("non-finite entries")
    if inst.x_star is not None and inst.x_star.shape != (a.shape[1],):
        problems.append("x_star length does not match column count")
        return problems
    if inst.k is not None and not 0 <= inst.k <= a.shape[0]:
        problems.append("k out of range")
    if inst.support_star is not None and any(not 0 <= i < a.shape[0] for i in inst.support_star):
        problems.append("support_star index out of range")

    if inst.x_star is None or (inst.noise_sigma is not None and inst.noise_sigma > 0):
        return problems

    r = inst.residual(inst.x_star)
    tol = 0.0 if inst.noise_sigma == 0 else 1e-12
    nonzero = np.flatnonzero(np.abs(r) > tol)
    if inst.k is not None and nonzero.size > inst.k:
        problems.append(f"residual not {inst.k}-sparse")
    if inst.support_star is not None and set(nonzero.tolist()) != set(inst.support_star):
        problems.append("support_star does not match residual support")
    return problems


# Solver configuration and output ----------------------------------------------


@dataclass(frozen=True)
class IrlsConfig:
    """Settings for :func:`lpirls.irls.irls_solve`.

    ``init`` is ``"unit"`` (unit weights, i.e. a least-squares first iterate),
    ``"zero"`` (start from x = 0) or an explicit starting vector.
    ``alpha=None`` falls back to the instance's ``k``. ``wls_method="normal"``
    solves the inner problem through the Cholesky-factored normal equations
    instead of QR; it is less accurate once weights span many decades and is
    kept for comparison with normal-equation implementations.
    """

    p: float = 1.0
    smoothing: SmoothingRule = field(default_factory=BestKTerm)
    alpha: int | None = None
    max_iters: int = 50
    stop_rel_change: float = 1e-15
    eps_floor: float = 1e-16
    init: Union[str, Sequence[float], np.ndarray] = "unit"
    stop_on_stall: bool = False
    stall_tol: float = 1e-15
    wls_method: str = "qr"

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        if self.alpha is not None and self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not self.eps_floor > 0:
            raise ValueError("eps_floor must be positive")
        if self.stop_rel_change < 0:
            raise ValueError("stop_rel_change must be non-negative")
        if self.wls_method not in ("qr", "normal"):
            raise ValueError("wls_method must be 'qr' or 'normal'")
        if isinstance(self.init, str) and self.init not in ("unit", "zero"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass(frozen=True, eq=False)
class IterationRecord:
    t: int
    x: np.ndarray
    residual: np.ndarray
    eps: float
    sigma: float
    obj_lp: float
    obj_smoothed: float
    rel_error: float | None


class IterationTrace(list):
    """List of :class:`IterationRecord` with column accessors."""

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(rec, name) for rec in self], dtype=float)

    @property
    def eps(self) -> np.ndarray:
        return self.column("eps")

    @property
    def sigma(self) -> np.ndarray:
        return self.column("sigma")

    @property
    def obj_lp(self) -> np.ndarray:
        return self.column("obj_lp")

    @property
    def obj_smoothed(self) -> np.ndarray:
        return self.column("obj_smoothed")

    @property
    def rel_error(self) -> np.ndarray:
        return np.array([np.nan if rec.rel_error is None else rec.rel_error for rec in self])

    @property
    def xs(self) -> np.ndarray:
        return np.array([rec.x for rec in self])


@dataclass(frozen=True, eq=False)
class IrlsResult:
    x_hat: np.ndarray
    trace: IterationTrace
    stop_reason: str  # "rel_change", "max_iters" or "stalled"

    @property
    def iterations(self) -> int:
        return len(self.trace)


# Diagnostics -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RspReport:
    """Stable range-space-property constant for ``(p, k)``.

    ``eta`` is ``math.inf`` when the range of A contains a vector supported
    on at most k coordinates (the property fails at this order).
    ``method`` is ``"exact"`` or ``"randomized_lower_bound"``.
    """

    p: float
    k: int
    eta: float
    method: str
    witness_direction: np.ndarray
    witness_support: tuple[int, ...]

    @property
    def infinite(self) -> bool:
        return math.isinf(self.eta)

    @property
    def holds(self) -> bool:
        """Whether the (non-stable) property of order k holds, i.e. eta < 1."""
        return self.eta < 1

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "k": self.k,
            "eta": "inf" if self.infinite else self.eta,
            "rsp_fails": self.infinite or self.eta >= 1,
            "method": self.method,
            "witness_support": list(self.witness_support),
            "witness_direction": self.witness_direction.tolist(),
        }


@dataclass(frozen=True)
class TheoryConstants:
    eta: float
    c: float
    mu: float
    p: float
    min_abs_residual: float

    @property
    def radius(self) -> float:
        """Local convergence radius on ``||A x - A x*||_1``."""
        return self.c * self.min_abs_residual
