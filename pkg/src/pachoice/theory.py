"""Closed-form predictions: regime classification, fixed points, mean-field.

Everything here is driven by the per-step growth identities of the process.
Writing W = 2m + 2k + beta for the weight added per step, the scaled leading
degree x = M/n has mean-field drift

    drift(x)   = (m / W) x + k (1 - (1 - x / W)^d)

for a single type, and for type i with probability p_i

    type_drift(x, i) = (m / W) x + p_i k (1 - (1 - x / (p_i W))^d)

which equals p_i * drift(x / p_i).  The drift slope at zero,
rho = (m + d k) / W, separates three regimes:

  rho < 1  subcritical    -- max degree grows like n^rho;
  rho = 1  critical       -- max degree grows like c n / ln n with
                             c_i = 2 p_i W^2 / (k d (d - 1));
  rho > 1  supercritical  -- condensation: max degree of type i reaches
                             fraction p_i x* of n, where x* is the unique
                             positive root of drift(x) = x (the root exists
                             and is unique because drift is concave with
                             slope rho > 1 at zero and drift(W) = m + k < W).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, NotCritical, NotSupercritical
from .model import ModelParams


class Regime(str, Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class TheorySummary:
    """Predicted asymptotics; only the active regime's fields are set."""

    rho: float
    regime: Regime
    x_star: Optional[float] = None
    condensate_fraction_by_type: Optional[tuple[float, ...]] = None
    critical_constant_by_type: Optional[tuple[float, ...]] = None
    subcritical_exponent: Optional[float] = None


def drift(x: float, params: ModelParams) -> float:
    """Mean-field per-step growth of the scaled leading degree (one type)."""
    W = params.total_weight_rate
    if not 0.0 <= x <= W:
        raise DomainError(f"x must lie in [0, {W}], got {x}")
    return (params.m / W) * x + params.k * (1.0 - (1.0 - x / W) ** params.d)


def drift_slope(x: float, params: ModelParams) -> float:
    """Derivative of :func:`drift`."""
    W = params.total_weight_rate
    if not 0.0 <= x <= W:
        raise DomainError(f"x must lie in [0, {W}], got {x}")
    return params.m / W + params.k * params.d / W * (1.0 - x / W) ** (params.d - 1)


def type_drift(x: float, type_index: int, params: ModelParams) -> float:
    """Mean-field drift of the scaled leading degree of one type."""
    p = params.type_probs[type_index]
    W = params.total_weight_rate
    cap = p * W
    if not 0.0 <= x <= cap:
        raise DomainError(f"x must lie in [0, {cap}], got {x}")
    return (params.m / W) * x + p * params.k * (1.0 - (1.0 - x / cap) ** params.d)


def regime_parameter(params: ModelParams) -> float:
    """Drift slope at zero: (m + d k) / (2m + 2k + beta)."""
    return (params.m + params.d * params.k) / params.total_weight_rate


def _regime(params: ModelParams) -> Regime:
    # rho = 1  <=>  beta == d k - m - 2 k; the comparison between the stored
    # float beta and this integer is exact, so textbook parameter choices
    # (beta = 0 etc.) can never be silently misclassified.
    boundary = params.d * params.k - params.m - 2 * params.k
    if params.beta == boundary:
        return Regime.CRITICAL
    if params.beta < boundary:
        return Regime.SUPERCRITICAL
    return Regime.SUBCRITICAL


def solve_fixed_point(params: ModelParams, method: str = "bisect", tol: float = 1e-13) -> float:
    """Unique positive root of drift(x) = x (supercritical only).

    Bisection on a verified sign-change bracket; ``method="newton"`` runs the
    same bracketing to 1e-8 and polishes with Newton steps (the two agree to
    ~1e-10 and both leave |drift(x) - x| below 1e-12).
    """
    if _regime(params) is not Regime.SUPERCRITICAL:
        raise NotSupercritical("drift(x) = x has no positive root unless rho > 1")
    W = params.total_weight_rate

    def h(x: float) -> float:
        return drift(x, params) - x

    hi = W
    if not h(hi) < 0.0:
        raise ArithmeticError("expected drift(W) - W < 0")  # m + k < W always
    lo = W / 2.0
    while h(lo) <= 0.0:
        lo /= 2.0
        if lo < 1e-300:
            raise ArithmeticError("failed to bracket the positive root")

    stop = 1e-8 if method == "newton" else tol
    while hi - lo > stop:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    if method == "newton":
        for _ in range(20):
            slope = drift_slope(x, params) - 1.0
            step = h(x) / slope
            x_new = x - step
            if not lo / 2 <= x_new <= hi * 2:
                break
            x = x_new
            if abs(step) < 1e-15:
                break
    elif method != "bisect":
        raise ValueError(f"unknown method {method!r}")
    return x


def critical_constant(params: ModelParams, type_index: int) -> float:
    """Predicted liminf of M_i(n) ln(n) / n at criticality:
    2 p_i W^2 / (k d (d - 1))."""
    if _regime(params) is not Regime.CRITICAL:
        raise NotCritical("constant defined only at rho = 1")
    p = params.type_probs[type_index]
    W = params.total_weight_rate
    return 2.0 * p * W * W / (params.k * params.d * (params.d - 1))


def classify_regime(params: ModelParams) -> TheorySummary:
    """Regime label plus the regime's predicted constants."""
    rho = regime_parameter(params)
    regime = _regime(params)
    if regime is Regime.SUPERCRITICAL:
        x_star = solve_fixed_point(params)
        return TheorySummary(
            rho=rho,
            regime=regime,
            x_star=x_star,
            condensate_fraction_by_type=tuple(p * x_star for p in params.type_probs),
        )
    if regime is Regime.CRITICAL:
        return TheorySummary(
            rho=rho,
            regime=regime,
            critical_constant_by_type=tuple(
                critical_constant(params, i) for i in range(params.num_types)
            ),
        )
    return TheorySummary(rho=rho, regime=regime, subcritical_exponent=rho)


# ---------------------------------------------------------------------------
# mean-field recursion
# ---------------------------------------------------------------------------

def mean_field_trajectory(
    params: ModelParams,
    type_index: int,
    n0: int = 1,
    y0: float = 1.0,
    n_max: int = 10**6,
    checkpoints: Optional[Sequence[int]] = None,
):
    """Deterministic drift recursion y(n+1) = y(n) + type_drift(y(n)/n).

    The ratio y(n)/n is clamped into the drift's domain [0, p_i W] before
    each evaluation.  Returns ``(ns, ys)`` as int64/float64 arrays; with
    ``checkpoints`` given, only those n (plus ``n_max``) are recorded.
    """
    if n0 < 1:
        raise ValueError("n0 must be at least 1")
    if y0 < 0.0:
        raise ValueError("y0 must be nonnegative")
    if n_max < n0:
        raise ValueError("n_max must be at least n0")
    p = params.type_probs[type_index]
    W = params.total_weight_rate
    cap = p * W
    mW = params.m / W
    pk = p * params.k
    d = params.d

    if checkpoints is None:
        record = None
        ns = np.arange(n0, n_max + 1, dtype=np.int64)
        ys = np.empty(n_max - n0 + 1, dtype=np.float64)
        ys[0] = y0
    else:
        record = sorted({int(c) for c in checkpoints} | {n_max})
        if record[0] < n0:
            raise ValueError("checkpoints must not precede n0")
        ns = np.array(record, dtype=np.int64)
        ys = np.empty(len(record), dtype=np.float64)

    y = float(y0)
    ri = 0
    if record is not None and record[0] == n0:
        ys[0] = y
        ri = 1
    for n in range(n0, n_max):
        z = y / n
        if z > cap:
            z = cap
        y += mW * z + pk * (1.0 - (1.0 - z / cap) ** d)
        if record is None:
            ys[n - n0 + 1] = y
        elif ri < len(record) and n + 1 == record[ri]:
            ys[ri] = y
            ri += 1
    return ns, ys


def extrapolate_limit(z1: float, z2: float, z3: float) -> float:
    """Aitken limit estimate from three geometrically spaced tail values.

    For z(n) = L - A n^(-c) sampled at n, rho n, rho^2 n the correction
    ratio is constant, so the Aitken transform recovers L exactly; on the
    recursion's tail it removes the leading algebraic transient.
    """
    denom = (z3 - z2) - (z2 - z1)
    if denom == 0.0:
        return z3
    return z3 - (z3 - z2) ** 2 / denom


def mean_field_limit(
    params: ModelParams,
    type_index: int,
    n0: int = 1,
    y0: float = 1.0,
    n_max: int = 10**6,
) -> tuple[float, float]:
    """Estimated limit of y(n)/n plus the raw final ratio y(n_max)/n_max.

    The limit is extrapolated from the ratios at n_max/100, n_max/10 and
    n_max; the raw ratio still carries the slow n^-(1-slope) transient.
    """
    cps = [max(n0, n_max // 100), max(n0, n_max // 10), n_max]
    ns, ys = mean_field_trajectory(params, type_index, n0, y0, n_max, checkpoints=cps)
    zs = ys / ns
    return float(extrapolate_limit(zs[-3], zs[-2], zs[-1])), float(zs[-1])
