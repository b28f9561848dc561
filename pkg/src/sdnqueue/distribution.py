"""Exact sojourn-time distribution for the single node with controller detour.

With stable stations the sojourn time is a signed mixture of an exponential
(rate a_l = mu_l - gamma_l, the no-detour path), an Erlang-2 stage (two switch
passes) and an exponential at the controller rate a_c = mu_c - gamma_c.  The
partial-fraction coefficients divide by (a_c - a_l)^2, so direct evaluation
loses all precision when the two effective rates approach each other; pdf and
ccdf are therefore evaluated through an algebraically identical regrouping

    pdf(t)  = a_l e^(-a_l t) (1-q) + q a_l^2 a_c t^2 phi(x) e^(-a_l t)
    ccdf(t) = e^(-a_l t) [ (1-q) + q (1 + a_l t + a_l^2 t^2 phi(x)) ]

with x = (a_c - a_l) t and phi(x) = (e^(-x) - 1 + x) / x^2, which is uniformly
stable and passes continuously through the equal-rates (Erlang-3) limit.
The coefficient fields b1/b2/d keep the classical partial-fraction values and
are reported for inspection; b1 can be negative, so the mixture must never be
sampled from, only summed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import ControllerParams, NodeParams, SolvedRates, UnstableSystemError

# Relative rate gap below which the partial-fraction coefficients are reported
# as degenerate (evaluation itself never divides by the gap).
DEGENERATE_TOL = 1e-9

# phi(x) Maclaurin coefficients 1/(k+2)! with alternating sign, |x| < 0.5.
_PHI_COEFFS = [(-1.0) ** k / math.factorial(k + 2) for k in range(14)]
_PHI_SERIES_CUTOFF = 0.5


@dataclass(frozen=True)
class SojournDistribution:
    """Sojourn-time law of one node, frozen at a specific operating point.

    a_switch      effective switch rate mu_l - gamma_l (1/s)
    a_controller  effective controller rate mu_c - gamma_c (1/s)
    b1, b2, d     partial-fraction coefficients of the exponential, Erlang-2
                  and controller components; b1 + b2 + d = 1, signs follow
                  a_controller - a_switch (signed decomposition, not a
                  probability mixture)
    q_nf          new-flow probability that generated the law
    degenerate    True when the two effective rates are equal to within
                  DEGENERATE_TOL; b1/b2/d are then reported as the limiting
                  weights (1 - q_nf, 0, 0) with weight q_nf on an implicit
                  Erlang-3 component, and evaluation uses the analytic limit
    """

    a_switch: float
    a_controller: float
    b1: float
    b2: float
    d: float
    q_nf: float
    degenerate: bool

    def mean(self) -> float:
        """Mean sojourn time (1 + q)/a_l + q/a_c."""
        return (1.0 + self.q_nf) / self.a_switch + self.q_nf / self.a_controller


def build_distribution(node: NodeParams, ctrl: ControllerParams,
                       rates: SolvedRates) -> SojournDistribution:
    """Construct the sojourn law from a solved, stable operating point."""
    sat = rates.saturated_stations()
    if sat:
        raise UnstableSystemError(sat)
    a_l = node.mu_switch - rates.gamma_switch
    a_c = ctrl.mu_controller - rates.gamma_controller
    q = node.q_nf
    gap = a_c - a_l
    degenerate = abs(gap) <= DEGENERATE_TOL * max(a_l, a_c)
    if degenerate:
        b1, b2, d = 1.0 - q, 0.0, 0.0
    else:
        b2 = q * a_c / gap
        d = q * a_l * a_l / (gap * gap)
        b1 = 1.0 - q - q * a_l * a_c / (gap * gap)
    return SojournDistribution(a_switch=a_l, a_controller=a_c, b1=b1, b2=b2,
                               d=d, q_nf=q, degenerate=degenerate)


def _phi(x: np.ndarray) -> np.ndarray:
    """(e^-x - 1 + x) / x^2, series-evaluated near 0 to avoid cancellation."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < _PHI_SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        acc = np.full_like(xs, _PHI_COEFFS[-1])
        for c in reversed(_PHI_COEFFS[:-1]):
            acc = acc * xs + c
        out[small] = acc
    if not np.all(small):
        xb = x[~small]
        out[~small] = (np.exp(-xb) - 1.0 + xb) / (xb * xb)
    return out


def _validate_times(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("time must be >= 0")
    scalar = arr.ndim == 0
    return (arr.reshape(1) if scalar else arr), scalar


def pdf(dist: SojournDistribution, t):
    """Sojourn-time density at t (seconds); accepts scalars or arrays."""
    arr, scalar = _validate_times(t)
    a_l, a_c, q = dist.a_switch, dist.a_controller, dist.q_nf
    x = (a_c - a_l) * arr
    e_l = np.exp(-a_l * arr)
    small = np.abs(x) < _PHI_SERIES_CUTOFF
    out = np.empty_like(arr)
    if np.any(small):
        ts = arr[small]
        out[small] = e_l[small] * ((1.0 - q) * a_l
                                   + q * a_l * a_l * a_c * ts * ts * _phi(x[small]))
    if not np.all(small):
        big = ~small
        tb = arr[big]
        gap = a_c - a_l
        e_c = np.exp(-a_c * tb)
        bracket = e_c - e_l[big] + x[big] * e_l[big]
        out[big] = (1.0 - q) * a_l * e_l[big] + q * a_l * a_l * a_c * bracket / (gap * gap)
    return float(out[0]) if scalar else out


def ccdf(dist: SojournDistribution, t):
    """P(sojourn > t); 1 at t = 0, nonincreasing, -> 0 as t -> inf."""
    arr, scalar = _validate_times(t)
    a_l, a_c, q = dist.a_switch, dist.a_controller, dist.q_nf
    x = (a_c - a_l) * arr
    e_l = np.exp(-a_l * arr)
    small = np.abs(x) < _PHI_SERIES_CUTOFF
    out = np.empty_like(arr)
    if np.any(small):
        ts = arr[small]
        alt = a_l * ts
        out[small] = e_l[small] * ((1.0 - q)
                                   + q * (1.0 + alt + alt * alt * _phi(x[small])))
    if not np.all(small):
        big = ~small
        tb = arr[big]
        gap = a_c - a_l
        e_c = np.exp(-a_c * tb)
        bracket = (a_l * a_l * e_c
                   + (gap * a_c * (a_l * tb + 1.0) - a_l * a_c) * e_l[big])
        out[big] = (1.0 - q) * e_l[big] + q * bracket / (gap * gap)
    return float(out[0]) if scalar else out


def prob_within_deadline(dist: SojournDistribution, deadline: float) -> float:
    """Probability that a packet's sojourn time is at most the deadline."""
    if deadline < 0.0:
        raise ValueError("deadline must be >= 0")
    return 1.0 - float(ccdf(dist, deadline))


# Bisection width at which the quantile search stops (absolute seconds); a
# Newton polish afterwards drives the residual in probability space to
# machine level, which plain t-space bisection cannot guarantee when the
# density is of order 1e5/s.
_QUANTILE_T_TOL = 1e-12


def quantile(dist: SojournDistribution, p: float) -> float:
    """Smallest t with P(sojourn <= t) >= p, for p in [0, 1)."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must be in [0, 1), got {p}")
    if p == 0.0:
        return 0.0
    target = 1.0 - p  # ccdf value at the quantile
    hi = dist.mean()
    while float(ccdf(dist, hi)) > target:
        hi *= 2.0
    lo = 0.0
    while hi - lo > _QUANTILE_T_TOL:
        mid = 0.5 * (lo + hi)
        if float(ccdf(dist, mid)) > target:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    for _ in range(3):
        density = float(pdf(dist, t))
        if density <= 0.0:
            break
        step = (float(ccdf(dist, t)) - target) / density
        t_new = t + step
        if t_new < 0.0 or not math.isfinite(t_new):
            break
        t = t_new
    return t
