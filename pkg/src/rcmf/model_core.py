"""Model scalars, Gibbs weights, critical values and the drift-function calculus.

The mean-field random-cluster model on n vertices has edge probability
p = lambda/n and cluster weight q; a configuration with |A| open edges out of
|E| and c(A) components carries weight p^|A| (1-p)^(|E|-|A|) q^c(A).

The drift calculus predicts the one-step evolution of the giant-component
fraction theta under component-activation dynamics:

    beta(d)   unique positive root of  exp(-d x) = 1 - x          (d > 1)
    phi(theta) = beta(lambda*k) * k,   k = (1 + (q-1) theta) / q
    f(theta)  = theta - phi(theta)                                 (the drift)

phi is defined only when lambda*k > 1, i.e. theta > theta_min with
theta_min = (q - lambda) / (lambda (q-1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

ROOT_TOL = 1e-12
_MAX_BISECT = 200


@dataclass(frozen=True)
class ModelParams:
    """Scalars (n, q, lambda); p = lambda/n is derived, never stored."""

    n: int
    q: float
    lam: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if self.q <= 0:
            raise ValueError(f"q must be positive, got {self.q}")
        if self.lam <= 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not 0.0 < self.lam / self.n < 1.0:
            raise ValueError(f"p = lambda/n = {self.lam / self.n} outside (0,1)")

    @property
    def p(self) -> float:
        return self.lam / self.n

    @classmethod
    def from_edge_probability(cls, n: int, p: float, q: float) -> "ModelParams":
        if not 0.0 < p < 1.0:
            raise ValueError(f"p must be in (0,1), got {p}")
        return cls(n=n, q=q, lam=p * n)


@dataclass(frozen=True)
class ConfigSummary:
    """Counts (|A|, |E|, c(A)) summarizing one edge configuration."""

    open_edges: int
    total_edges: int
    components: int

    def __post_init__(self):
        if not 0 <= self.open_edges <= self.total_edges:
            raise ValueError("need 0 <= open_edges <= total_edges")
        if self.components < 1:
            raise ValueError("component count must be >= 1")


@dataclass(frozen=True)
class DriftEvaluation:
    theta: float
    k_value: float
    theta_min: float
    phi_value: Optional[float] = None
    drift_value: Optional[float] = None


def gibbs_log_weight(summary: ConfigSummary, params: ModelParams) -> float:
    """Unnormalized log Gibbs weight |A| ln p + (|E|-|A|) ln(1-p) + c ln q."""
    p = params.p
    if p <= 0.0 or p >= 1.0:
        raise ValueError(f"log weight diverges at p={p}")
    a = summary.open_edges
    return (a * math.log(p)
            + (summary.total_edges - a) * math.log1p(-p)
            + summary.components * math.log(params.q))


def critical_lambda(q: float) -> float:
    """Critical mean-degree: q on (0,2], else 2 (q-1)/(q-2) ln(q-1)."""
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    if q <= 2:
        return float(q)
    return 2.0 * (q - 1.0) / (q - 2.0) * math.log(q - 1.0)


def beta_root(d: float) -> float:
    """Unique positive root of exp(-d x) = 1 - x, by bracketed bisection.

    Defined only for d > 1 (the supercritical giant-component fraction).
    Bisection rather than Newton: the bracket degenerates as d -> 1+ and
    bisection cannot escape it.
    """
    if d <= 1.0:
        raise ValueError(f"no positive root: requires d > 1, got {d}")

    def f(x: float) -> float:
        # expm1 keeps the sign reliable near x -> 0 where exp(-dx) ~ 1 - x
        return math.expm1(-d * x) + x

    # left end far below any reachable root (root ~ 2(d-1) as d -> 1+)
    lo, hi = 1e-18, 1.0 - ROOT_TOL
    flo = f(lo)
    if flo >= 0.0:
        raise ValueError(f"degenerate bracket at d={d}: root below {lo}")
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    root = 0.5 * (lo + hi)
    if abs(f(root)) >= ROOT_TOL:
        raise ArithmeticError(f"bisection did not converge at d={d}")
    return root


def drift_evaluate(theta: float, lam: float, q: float) -> DriftEvaluation:
    """Evaluate k, theta_min, and (when defined) phi and the drift f."""
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must be in (0,1], got {theta}")
    if q <= 1.0:
        raise ValueError(f"drift calculus needs q > 1, got {q}")
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    k = (1.0 + (q - 1.0) * theta) / q
    theta_min = (q - lam) / (lam * (q - 1.0))
    # cushion of 1e-14: within it the root sits below fp resolution and phi
    # is indistinguishable from 0, so it is reported as undefined
    if lam * k > 1.0 + 1e-14:
        phi = beta_root(lam * k) * k
        return DriftEvaluation(theta=theta, k_value=k, theta_min=theta_min,
                               phi_value=phi, drift_value=theta - phi)
    return DriftEvaluation(theta=theta, k_value=k, theta_min=theta_min)


def _drift_or_none(theta: float, lam: float, q: float) -> Optional[float]:
    ev = drift_evaluate(theta, lam, q)
    return ev.drift_value


def has_positive_drift_root(lam: float, q: float, grid_step: float = 0.001) -> bool:
    """Scan f(theta) on (max(theta_min, grid_step), 1] for a root.

    Coarse grid scan first; sign changes are confirmed by bisecting the
    bracketing pair down to ROOT_TOL.  Near-zero grid values (|f| < 1e-9)
    count as tangential roots.
    """
    if q <= 1.0:
        raise ValueError(f"requires q > 1, got {q}")
    if not 0.0 < grid_step <= 0.1:
        raise ValueError(f"grid_step must be in (0, 0.1], got {grid_step}")
    theta_min = (q - lam) / (lam * (q - 1.0))
    lo = max(theta_min, grid_step)
    if lo >= 1.0:
        f1 = _drift_or_none(1.0, lam, q)
        return f1 is not None and abs(f1) < 1e-9

    n_pts = max(2, int(math.ceil((1.0 - lo) / grid_step)) + 1)
    thetas = [min(1.0, lo + i * (1.0 - lo) / (n_pts - 1)) for i in range(n_pts)]
    prev_theta = None
    prev_f = None
    for theta in thetas:
        f = _drift_or_none(theta, lam, q)
        if f is None:
            prev_theta, prev_f = None, None
            continue
        if abs(f) < 1e-9:
            return True
        if prev_f is not None and (prev_f < 0.0) != (f < 0.0):
            a, b = prev_theta, theta
            fa = prev_f
            while b - a > ROOT_TOL:
                m = 0.5 * (a + b)
                fm = _drift_or_none(m, lam, q)
                if fm is None:  # cannot happen inside a defined bracket
                    break
                if (fm < 0.0) == (fa < 0.0):
                    a, fa = m, fm
                else:
                    b = m
            return True
        prev_theta, prev_f = theta, f
    return False


def find_lambda_s(q: float, tol: float = 1e-8) -> float:
    """Smallest lambda in (1, q] whose drift function has a positive root.

    Operational definition of the lower metastability boundary: the paper-level
    object has no closed form, so it is located as the onset of a drift root,
    by bisection over lambda.  Only meaningful for q > 2.
    """
    if q <= 2.0:
        raise ValueError(f"no metastability window for q <= 2, got q={q}")
    lo, hi = 1.0, float(q)
    if not has_positive_drift_root(hi, q):
        raise ValueError(f"degenerate window: no drift root even at lambda=q={q}")
    if has_positive_drift_root(lo + tol, q):
        raise ValueError(f"degenerate window: drift root already at lambda={lo + tol}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if has_positive_drift_root(mid, q):
            hi = mid
        else:
            lo = mid
    return hi
