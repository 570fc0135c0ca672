"""Quality metrics derived from the rates: visibility, contrast, CAR,
and closed-form optimization of the mean pair number."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .detection import DetectorModel, click_prob
from .distributions import PairSource, SourceKind, TruncationPolicy, pmf_values, truncation_index
from .polarization import RateMethod, Setting, closed_form_rates, coincidence_rate

__all__ = [
    "VisibilityResult",
    "CarResult",
    "Objective",
    "MuOptimum",
    "visibility_exact",
    "visibility_approx",
    "car",
    "optimize_mu",
]


@dataclass(frozen=True)
class VisibilityResult:
    """Two-photon interference visibility and HH/HV contrast."""

    visibility: float
    contrast: float
    method: RateMethod


@dataclass(frozen=True)
class CarResult:
    """Coincidence-to-accidental ratio with its two ingredient rates."""

    matched_rate: float
    unmatched_rate: float
    car: float
    method: RateMethod


class Objective(Enum):
    MAX_VISIBILITY = "max-visibility"
    MAX_CONCURRENCE = "max-concurrence"
    MAX_COINCIDENCE_TIMES_VISIBILITY = "max-coincidence-times-visibility"


@dataclass(frozen=True)
class MuOptimum:
    """Result of a mean-pair-number optimization.

    ``unimodal`` is False when the coarse scan saw more than one local
    maximum; the returned point is then the best sample, not a certified
    optimum.
    """

    mu: float
    value: float
    unimodal: bool
    objective: Objective


def _ratio_metrics(r_hh: float, r_hv: float, method: RateMethod) -> VisibilityResult:
    total = r_hh + r_hv
    visibility = (r_hh - r_hv) / total if total > 0 else 1.0
    contrast = r_hh / r_hv if r_hv > 0 else math.inf
    return VisibilityResult(visibility, contrast, method)


def visibility_exact(
    source: PairSource,
    alpha_s: float,
    alpha_i: float,
    dark_s: float = 0.0,
    dark_i: float = 0.0,
    policy: TruncationPolicy = TruncationPolicy(),
) -> VisibilityResult:
    """Visibility from the exact-series HH and HV rates."""
    if not source.kind.entangled:
        raise ValueError(f"visibility requires an entangled kind, got {source.kind.value}")
    det_s = DetectorModel(alpha_s, dark_s)
    det_i = DetectorModel(alpha_i, dark_i)
    hh = coincidence_rate(source, Setting.HH, det_s, det_i, policy).value
    hv = coincidence_rate(source, Setting.HV, det_s, det_i, policy).value
    return _ratio_metrics(hh, hv, RateMethod.EXACT_SERIES)


def visibility_approx(kind: SourceKind, mu: float) -> VisibilityResult:
    """Efficiency-independent leading-order visibility and contrast.

    Distinguishable pairs: v = 1/(1+mu), contrast 1 + 2/mu.
    Indistinguishable pairs: v = (mu+2)/(3*mu+2), contrast 2 + 2/mu.
    """
    if not kind.entangled:
        raise ValueError(f"visibility requires an entangled kind, got {kind.value}")
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    if kind is SourceKind.DIS_ENTANGLED:
        v = 1.0 / (1.0 + mu)
        contrast = 1.0 + 2.0 / mu if mu > 0 else math.inf
    else:
        v = (mu + 2.0) / (3.0 * mu + 2.0)
        contrast = 2.0 + 2.0 / mu if mu > 0 else math.inf
    return VisibilityResult(v, contrast, RateMethod.CLOSED_FORM)


def car(
    source: PairSource,
    alpha_s: float,
    alpha_i: float,
    dark_s: float = 0.0,
    dark_i: float = 0.0,
    policy: TruncationPolicy = TruncationPolicy(),
    method: RateMethod = RateMethod.EXACT_SERIES,
) -> CarResult:
    """Coincidence-to-accidental ratio of a correlated pair source.

    The matched rate pairs clicks produced by the same pulse; the
    unmatched (accidental) rate pairs clicks of two independent pulses,
    so it is the product of the two arms' single-count rates.
    """
    if not source.kind.correlated:
        raise ValueError(f"CAR requires a correlated kind, got {source.kind.value}")
    mu = source.mu
    if method is RateMethod.CLOSED_FORM:
        matched = mu * alpha_s * alpha_i + (mu * alpha_s + dark_s) * (mu * alpha_i + dark_i)
        if source.kind is SourceKind.THERMAL_CORRELATED:
            matched += mu * mu * alpha_s * alpha_i
        unmatched = (mu * alpha_s + dark_s) * (mu * alpha_i + dark_i)
    elif method is RateMethod.EXACT_SERIES:
        det_s = DetectorModel(alpha_s, dark_s)
        det_i = DetectorModel(alpha_i, dark_i)
        x_max = truncation_index(source, policy)
        weights = pmf_values(source, x_max)
        qs = [click_prob(det_s, x) for x in range(x_max + 1)]
        qi = [click_prob(det_i, x) for x in range(x_max + 1)]
        matched = math.fsum(w * a * b for w, a, b in zip(weights, qs, qi))
        unmatched = math.fsum(w * a for w, a in zip(weights, qs)) * math.fsum(
            w * b for w, b in zip(weights, qi)
        )
    else:
        raise ValueError(f"unsupported CAR method {method}")
    ratio = matched / unmatched if unmatched > 0 else math.inf
    return CarResult(matched, unmatched, ratio, method)


def _objective_fn(
    kind: SourceKind,
    alpha_s: float,
    alpha_i: float,
    dark_s: float,
    dark_i: float,
    objective: Objective,
):
    if objective is Objective.MAX_CONCURRENCE:
        # late import keeps the module dependency one-way
        from .tomography import assemble_r, concurrence, reconstruct

        def f(mu: float) -> float:
            r = assemble_r(kind, mu, alpha_s, alpha_i, dark_s, dark_i)
            return concurrence(reconstruct(r.r))

        return f

    def f(mu: float) -> float:
        rep = closed_form_rates(kind, mu, alpha_s, alpha_i, dark_s, dark_i)
        total = rep.r_hh + rep.r_hv
        v = (rep.r_hh - rep.r_hv) / total if total > 0 else 1.0
        if objective is Objective.MAX_VISIBILITY:
            return v
        return rep.r_hh * v

    return f


def _golden_max(f, log_lo: float, log_hi: float, rel_tol: float):
    """Golden-section maximization of f(exp(t)) on [log_lo, log_hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = log_lo, log_hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = f(math.exp(c))
    fd = f(math.exp(d))
    while (b - a) > rel_tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(math.exp(d))
    return (c, fc) if fc >= fd else (d, fd)


def optimize_mu(
    kind: SourceKind,
    alpha_s: float,
    alpha_i: float,
    dark_s: float,
    dark_i: float,
    objective: Objective,
    mu_range: tuple[float, float],
    samples: int = 65,
    rel_tol: float = 1e-6,
) -> MuOptimum:
    """Maximize a closed-form objective over the mean pair number.

    The bracket is first sampled on a log grid to test unimodality.  A
    unimodal profile is refined by golden-section search on log(mu) to
    ``rel_tol`` relative accuracy; endpoints are returned exactly when
    they win (monotone objectives).  A non-unimodal profile sets the
    warning flag and returns the best sample as-is.
    """
    lo, hi = mu_range
    if not (0 < lo < hi) or not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError(f"mu_range must satisfy 0 < lo < hi, got {mu_range}")
    if samples < 3:
        raise ValueError(f"samples must be >= 3, got {samples}")
    f = _objective_fn(kind, alpha_s, alpha_i, dark_s, dark_i, objective)
    log_lo, log_hi = math.log(lo), math.log(hi)
    grid = [math.exp(log_lo + (log_hi - log_lo) * j / (samples - 1)) for j in range(samples)]
    grid[0], grid[-1] = lo, hi
    ys = [f(m) for m in grid]

    peak = max(range(samples), key=lambda j: ys[j])
    tol = lambda v: 1e-12 * abs(v) + 1e-300
    rising = all(ys[j + 1] >= ys[j] - tol(ys[j]) for j in range(peak))
    falling = all(ys[j + 1] <= ys[j] + tol(ys[j]) for j in range(peak, samples - 1))
    if not (rising and falling):
        return MuOptimum(grid[peak], ys[peak], False, objective)

    a = log_lo if peak == 0 else math.log(grid[peak - 1])
    b = log_hi if peak == samples - 1 else math.log(grid[peak + 1])
    t, ft = _golden_max(f, a, b, rel_tol)
    best_mu, best_val = math.exp(t), ft
    # prefer an exact endpoint when it is at least as good (monotone case)
    for m, y in ((lo, ys[0]), (hi, ys[-1])):
        if y >= best_val:
            best_mu, best_val = m, y
    return MuOptimum(best_mu, best_val, True, objective)
