"""Independent validation oracles for the rate series.

Two cross-checks that deliberately avoid the analytic machinery of the
rate modules:

* :func:`enumerate_rate` sums the exact detection probability over every
  generated pattern: all 2^x polarization assignments of distinguishable
  pairs (visited individually as bitmasks), the x+1 collapsed pattern
  indices of indistinguishable pairs, and, for the diagonal-basis
  setting, a +/- photon-number distribution built by applying creation
  operators step by step.  Binomial photon splittings are built by
  repeated convolution of a fair coin rather than from binomial
  coefficients.

* :func:`mc_rate` samples the same generative chain (pair number,
  pattern, per-arm clicks) with a seeded PCG64 generator and reports a
  mean with its standard error.  For a fixed seed, trial count and
  configuration the result is reproducible bit for bit: trials are
  consumed in fixed-size blocks, block b uses the b-th child of
  numpy's SeedSequence(seed), draws happen in a fixed order within a
  block, and the per-block success counts are integers, so the final
  reduction is exact in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .detection import ClickMode, DetectorModel, click_prob
from .distributions import PairSource, SourceKind, pmf_values
from .polarization import HplusModel, UnsupportedSetting

__all__ = [
    "XMaxTooLarge",
    "OracleSetting",
    "EnumeratedRate",
    "McEstimate",
    "ladder_plus_distribution",
    "enumerate_rate",
    "mc_rate",
    "sample_patterns",
]

# 2^x patterns are visited one by one; 14 keeps that below ~16k states.
X_MAX_LIMIT = 14


class XMaxTooLarge(ValueError):
    """Requested enumeration depth would exceed the exhaustive-pattern budget."""


class OracleSetting(Enum):
    HH = "hh"
    HV = "hv"
    HPLUS = "hplus"
    SINGLE_S = "single-s"
    SINGLE_I = "single-i"
    CAR_MATCHED = "car-matched"
    CAR_UNMATCHED = "car-unmatched"
    TIMEBIN_AA = "timebin-aa"
    TIMEBIN_AB = "timebin-ab"
    TIMEBIN_APLUS = "timebin-aplus"


_TIMEBIN_MAP = {
    OracleSetting.TIMEBIN_AA: OracleSetting.HH,
    OracleSetting.TIMEBIN_AB: OracleSetting.HV,
    OracleSetting.TIMEBIN_APLUS: OracleSetting.HPLUS,
}


@dataclass(frozen=True)
class EnumeratedRate:
    """Exhaustively enumerated rate plus the pmf mass beyond x_max."""

    value: float
    tail_bound: float
    x_max: int


@dataclass(frozen=True)
class McEstimate:
    """Monte-Carlo estimate of a click or coincidence probability."""

    mean: float
    std_error: float
    trials: int
    seed: int


def _coin_weights(x: int) -> list[float]:
    """Binomial(x, 1/2) pmf by convolving x fair coins."""
    w = [1.0]
    for _ in range(x):
        nxt = [0.0] * (len(w) + 1)
        for j, v in enumerate(w):
            nxt[j] += 0.5 * v
            nxt[j + 1] += 0.5 * v
        w = nxt
    return w


@lru_cache(maxsize=None)
def ladder_plus_distribution(x: int, k: int) -> tuple[float, ...]:
    """+/- basis photon-number law of the x-k H, k V idler Fock state.

    Built operationally: starting from vacuum, apply the H-mode creation
    operator (a+ + a-)/sqrt(2) x-k times and the V-mode operator
    (a+ - a-)/sqrt(2) k times, tracking amplitudes over the +-photon
    count with the usual sqrt(n+1) ladder factors, then normalize by
    sqrt((x-k)! k!) and square.
    """
    if not (0 <= k <= x):
        raise ValueError(f"need 0 <= k <= x, got k={k}, x={x}")
    amps = [1.0]
    total = 0
    for sign, count in ((1.0, x - k), (-1.0, k)):
        for _ in range(count):
            nxt = [0.0] * (total + 2)
            for p, a in enumerate(amps):
                if a == 0.0:
                    continue
                nxt[p + 1] += a * math.sqrt(p + 1) / math.sqrt(2.0)
                nxt[p] += sign * a * math.sqrt(total + 1 - p) / math.sqrt(2.0)
            amps = nxt
            total += 1
    norm = math.factorial(x - k) * math.factorial(k)
    return tuple(a * a / norm for a in amps)


def _per_x_probability(
    kind: SourceKind,
    setting: OracleSetting,
    x: int,
    det_s: DetectorModel,
    det_i: DetectorModel,
    hplus_model: HplusModel,
) -> float:
    qs = [click_prob(det_s, n) for n in range(x + 1)]
    qi = [click_prob(det_i, n) for n in range(x + 1)]

    if kind.correlated:
        if setting in (OracleSetting.HH, OracleSetting.CAR_MATCHED):
            return qs[x] * qi[x]
        if setting is OracleSetting.HV:
            return qs[x] * qi[0]
        if setting is OracleSetting.SINGLE_S:
            return qs[x]
        if setting is OracleSetting.SINGLE_I:
            return qi[x]
        raise UnsupportedSetting(
            f"{setting.value} is undefined for correlated kind {kind.value}"
        )

    if setting in (OracleSetting.CAR_MATCHED, OracleSetting.CAR_UNMATCHED):
        raise UnsupportedSetting(f"{setting.value} requires a correlated kind")

    if kind is SourceKind.DIS_ENTANGLED:
        # visit all 2^x pair-polarization patterns; y = number of VV pairs
        terms = []
        if setting is OracleSetting.HPLUS:
            coin = _coin_weights(x)
            idler = math.fsum(coin[j] * qi[j] for j in range(x + 1))
        for pattern in range(1 << x):
            y = pattern.bit_count()
            if setting is OracleSetting.HH:
                terms.append(qs[x - y] * qi[x - y])
            elif setting is OracleSetting.HV:
                terms.append(qs[x - y] * qi[y])
            elif setting is OracleSetting.HPLUS:
                terms.append(qs[x - y] * idler)
            elif setting is OracleSetting.SINGLE_S:
                terms.append(qs[x - y])
            else:
                terms.append(qi[x - y])
        return math.fsum(terms) / (1 << x)

    # indistinguishable: collapsed pattern index k is uniform on 0..x
    terms = []
    for k in range(x + 1):
        if setting is OracleSetting.HH:
            terms.append(qs[x - k] * qi[x - k])
        elif setting is OracleSetting.HV:
            terms.append(qs[x - k] * qi[k])
        elif setting is OracleSetting.HPLUS:
            if hplus_model is HplusModel.COHERENT:
                w = ladder_plus_distribution(x, k)
            else:
                w = _coin_weights(x)
            terms.append(qs[x - k] * math.fsum(w[p] * qi[p] for p in range(x + 1)))
        elif setting is OracleSetting.SINGLE_S:
            terms.append(qs[x - k])
        else:
            terms.append(qi[x - k])
    return math.fsum(terms) / (x + 1)


def enumerate_rate(
    source: PairSource,
    setting: OracleSetting,
    det_s: DetectorModel,
    det_i: DetectorModel,
    x_max: int,
    hplus_model: HplusModel = HplusModel.COHERENT,
) -> EnumeratedRate:
    """Exhaustive-enumeration rate up to ``x_max`` generated pairs.

    The neglected contribution is at most the pmf mass beyond x_max
    (every per-x probability is <= 1); that mass is reported as
    ``tail_bound`` so callers can fold it into comparisons.
    """
    if x_max < 0:
        raise ValueError(f"x_max must be >= 0, got {x_max}")
    if x_max > X_MAX_LIMIT:
        raise XMaxTooLarge(f"x_max={x_max} exceeds the enumeration budget of {X_MAX_LIMIT}")
    if setting in _TIMEBIN_MAP:
        if not source.kind.entangled:
            raise UnsupportedSetting(f"{setting.value} requires an entangled kind")
        det_s = DetectorModel(det_s.alpha / 2.0, det_s.dark, det_s.mode)
        det_i = DetectorModel(det_i.alpha / 2.0, det_i.dark, det_i.mode)
        setting = _TIMEBIN_MAP[setting]

    weights = pmf_values(source, x_max)
    tail = max(0.0, 1.0 - math.fsum(weights))

    if setting is OracleSetting.CAR_UNMATCHED:
        if not source.kind.correlated:
            raise UnsupportedSetting(f"{setting.value} requires a correlated kind")
        a = math.fsum(weights[x] * click_prob(det_s, x) for x in range(x_max + 1))
        b = math.fsum(weights[x] * click_prob(det_i, x) for x in range(x_max + 1))
        # |A'B' - AB| <= tail*(A + B + tail) when each factor gains <= tail
        return EnumeratedRate(a * b, tail * (a + b + tail), x_max)

    value = math.fsum(
        weights[x]
        * _per_x_probability(source.kind, setting, x, det_s, det_i, hplus_model)
        for x in range(x_max + 1)
    )
    return EnumeratedRate(value, tail, x_max)


def _draw_pairs(rng: np.random.Generator, source: PairSource, n: int) -> np.ndarray:
    mu = source.mu
    if source.kind is SourceKind.THERMAL_CORRELATED:
        return rng.geometric(1.0 / (1.0 + mu), n) - 1
    if source.kind is SourceKind.INDIS_ENTANGLED:
        return rng.negative_binomial(2, 1.0 / (1.0 + mu / 2.0), n)
    return rng.poisson(mu, n)


def sample_patterns(kind: SourceKind, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw one pattern variable per pulse: the VV count for
    distinguishable pairs (Binomial(x, 1/2)), the collapsed index k for
    indistinguishable pairs (uniform on 0..x), zero for correlated kinds."""
    x = np.asarray(x)
    if kind is SourceKind.DIS_ENTANGLED:
        return rng.binomial(x, 0.5)
    if kind is SourceKind.INDIS_ENTANGLED:
        return rng.integers(0, x + 1)
    return np.zeros_like(x)


def _click_probs(det: DetectorModel, photons: np.ndarray) -> np.ndarray:
    return 1.0 - (1.0 - det.dark) * np.power(1.0 - det.alpha, photons)


@lru_cache(maxsize=8)
def _ladder_cum_tables(x_cap: int) -> np.ndarray:
    """Padded cumulative +/- distributions for vectorized inverse sampling."""
    cum = np.ones((x_cap + 1, x_cap + 1, x_cap + 1))
    for x in range(x_cap + 1):
        for k in range(x + 1):
            w = ladder_plus_distribution(x, k)
            cum[x, k, : x + 1] = np.cumsum(w)
            cum[x, k, x:] = 1.0
    return cum


def _mc_block(
    rng: np.random.Generator,
    source: PairSource,
    setting: OracleSetting,
    det_s: DetectorModel,
    det_i: DetectorModel,
    n: int,
    hplus_model: HplusModel,
) -> int:
    kind = source.kind
    x = _draw_pairs(rng, source, n)

    if setting is OracleSetting.CAR_UNMATCHED:
        x2 = _draw_pairs(rng, source, n)
        ps, pi = _click_probs(det_s, x), _click_probs(det_i, x2)
    elif kind.correlated:
        if setting in (OracleSetting.HH, OracleSetting.CAR_MATCHED):
            ps, pi = _click_probs(det_s, x), _click_probs(det_i, x)
        elif setting is OracleSetting.HV:
            ps = _click_probs(det_s, x)
            pi = np.full(n, det_i.dark)
        elif setting is OracleSetting.SINGLE_S:
            ps, pi = _click_probs(det_s, x), None
        elif setting is OracleSetting.SINGLE_I:
            ps, pi = _click_probs(det_i, x), None
        else:
            raise UnsupportedSetting(
                f"{setting.value} is undefined for correlated kind {kind.value}"
            )
    else:
        if setting in (OracleSetting.CAR_MATCHED, OracleSetting.CAR_UNMATCHED):
            raise UnsupportedSetting(f"{setting.value} requires a correlated kind")
        pat = sample_patterns(kind, x, rng)
        h = x - pat
        if setting is OracleSetting.HH:
            ps, pi = _click_probs(det_s, h), _click_probs(det_i, h)
        elif setting is OracleSetting.HV:
            ps, pi = _click_probs(det_s, h), _click_probs(det_i, pat)
        elif setting is OracleSetting.SINGLE_S:
            ps, pi = _click_probs(det_s, h), None
        elif setting is OracleSetting.SINGLE_I:
            ps, pi = _click_probs(det_i, h), None
        else:  # HPLUS
            ps = _click_probs(det_s, h)
            if kind is SourceKind.DIS_ENTANGLED:
                plus = rng.binomial(x, 0.5)
            elif hplus_model is HplusModel.INDEPENDENT:
                plus = rng.binomial(x, 0.5)
            else:
                cum = _ladder_cum_tables(int(x.max()) if n else 0)
                rows = cum[x, pat]
                plus = (rows < rng.random(n)[:, None]).sum(axis=1)
            pi = _click_probs(det_i, plus)

    hit = rng.random(n) < ps
    if pi is not None:
        hit &= rng.random(n) < pi
    return int(hit.sum())


def mc_rate(
    source: PairSource,
    setting: OracleSetting,
    det_s: DetectorModel,
    det_i: DetectorModel,
    trials: int,
    seed: int,
    hplus_model: HplusModel = HplusModel.COHERENT,
    block_size: int = 1_000_000,
) -> McEstimate:
    """Monte-Carlo estimate of a rate by simulating the generative chain.

    Within each block the draw order is fixed: pair numbers first (twice
    for the unmatched setting), then the pattern variable, then any
    extra splitting variable, then the signal and idler click uniforms.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if det_s.mode is not ClickMode.EXACT or det_i.mode is not ClickMode.EXACT:
        raise ValueError("Monte-Carlo sampling requires EXACT click mode")
    if setting in _TIMEBIN_MAP:
        if not source.kind.entangled:
            raise UnsupportedSetting(f"{setting.value} requires an entangled kind")
        det_s = DetectorModel(det_s.alpha / 2.0, det_s.dark, det_s.mode)
        det_i = DetectorModel(det_i.alpha / 2.0, det_i.dark, det_i.mode)
        setting = _TIMEBIN_MAP[setting]

    n_blocks = (trials + block_size - 1) // block_size
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    successes = 0
    left = trials
    for child in children:
        n = min(block_size, left)
        rng = np.random.Generator(np.random.PCG64(child))
        successes += _mc_block(rng, source, setting, det_s, det_i, n, hplus_model)
        left -= n
    p = successes / trials
    se = math.sqrt(p * (1.0 - p) / (trials - 1)) if trials > 1 else 0.0
    return McEstimate(p, se, trials, seed)
