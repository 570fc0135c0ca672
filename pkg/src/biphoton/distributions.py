"""Pair-number statistics of pulsed photon-pair sources.

Four source kinds are modelled, each fully parameterised by the mean
pair number ``mu`` per pulse:

* ``INDIS_ENTANGLED``   -- entangled pairs emitted into a single
  temporal mode; the pair number follows a negative-binomial law of
  order 2.
* ``DIS_ENTANGLED``     -- entangled pairs spread over many mutually
  distinguishable modes; Poissonian pair number.
* ``DIS_CORRELATED``    -- correlated (non-entangled) pairs over many
  modes; Poissonian pair number.
* ``THERMAL_CORRELATED`` -- correlated pairs in a single mode; thermal
  (geometric) pair number.

All series over the pair number are truncated with a certified tail
bound so that the neglected probability mass is provably below a
caller-chosen epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "CapExceeded",
    "SourceKind",
    "PairSource",
    "TruncationPolicy",
    "pmf",
    "pmf_values",
    "mean",
    "second_moment",
    "truncation_index",
]


class CapExceeded(ValueError):
    """Certified truncation would need more terms than the hard cap allows."""


class SourceKind(Enum):
    INDIS_ENTANGLED = "indis-entangled"
    DIS_ENTANGLED = "dis-entangled"
    DIS_CORRELATED = "dis-correlated"
    THERMAL_CORRELATED = "thermal-correlated"

    @property
    def entangled(self) -> bool:
        return self in (SourceKind.INDIS_ENTANGLED, SourceKind.DIS_ENTANGLED)

    @property
    def correlated(self) -> bool:
        return not self.entangled

    @property
    def poissonian(self) -> bool:
        return self in (SourceKind.DIS_ENTANGLED, SourceKind.DIS_CORRELATED)


@dataclass(frozen=True)
class PairSource:
    """A photon-pair source of a given kind with mean pair number ``mu``."""

    kind: SourceKind
    mu: float

    def __post_init__(self) -> None:
        if not isinstance(self.kind, SourceKind):
            raise TypeError(f"kind must be a SourceKind, got {self.kind!r}")
        if not (isinstance(self.mu, (int, float)) and math.isfinite(self.mu)):
            raise ValueError(f"mu must be finite, got {self.mu!r}")
        if self.mu < 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")


@dataclass(frozen=True)
class TruncationPolicy:
    """Tail requirement for pair-number series.

    ``tail_epsilon`` bounds the total probability mass allowed beyond the
    truncation index; ``hard_cap`` bounds the index itself.  Exceeding the
    cap raises :class:`CapExceeded` rather than truncating silently.
    """

    tail_epsilon: float = 1e-12
    hard_cap: int = 200

    def __post_init__(self) -> None:
        if not (0.0 < self.tail_epsilon < 1.0):
            raise ValueError(
                f"tail_epsilon must lie in (0, 1), got {self.tail_epsilon}"
            )
        if self.hard_cap < 0:
            raise ValueError(f"hard_cap must be >= 0, got {self.hard_cap}")


def _pmf0(source: PairSource) -> float:
    """P(x=0), the start of the multiplicative recurrence."""
    mu = source.mu
    if source.kind is SourceKind.INDIS_ENTANGLED:
        return 1.0 / (1.0 + mu / 2.0) ** 2
    if source.kind is SourceKind.THERMAL_CORRELATED:
        return 1.0 / (1.0 + mu)
    return math.exp(-mu)


def _ratio(source: PairSource, x: int) -> float:
    """pmf(x+1)/pmf(x).  Non-increasing in x for every supported kind."""
    mu = source.mu
    if source.kind is SourceKind.INDIS_ENTANGLED:
        r = (mu / 2.0) / (1.0 + mu / 2.0)
        return r * (x + 2) / (x + 1)
    if source.kind is SourceKind.THERMAL_CORRELATED:
        return mu / (1.0 + mu)
    return mu / (x + 1)


def pmf(source: PairSource, x: int) -> float:
    """Probability of generating exactly ``x`` pairs in one pulse.

    Evaluated by multiplicative recurrence from P(0); no factorials or
    large powers appear, so the result stays finite for any ``x``.
    """
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if source.mu == 0.0:
        return 1.0 if x == 0 else 0.0
    p = _pmf0(source)
    for n in range(x):
        p *= _ratio(source, n)
    return p


def pmf_values(source: PairSource, x_max: int) -> list[float]:
    """pmf(0..x_max) in one recurrence sweep."""
    if x_max < 0:
        raise ValueError(f"x_max must be >= 0, got {x_max}")
    if source.mu == 0.0:
        return [1.0] + [0.0] * x_max
    out = [0.0] * (x_max + 1)
    p = _pmf0(source)
    out[0] = p
    for n in range(x_max):
        p *= _ratio(source, n)
        out[n + 1] = p
    return out


def mean(source: PairSource) -> float:
    """First moment of the pair number; equals ``mu`` for every kind."""
    return source.mu


def second_moment(source: PairSource) -> float:
    """Second moment E[x^2] of the pair number."""
    mu = source.mu
    if source.kind is SourceKind.INDIS_ENTANGLED:
        return mu + 1.5 * mu * mu
    if source.kind is SourceKind.THERMAL_CORRELATED:
        return mu + 2.0 * mu * mu
    return mu + mu * mu


def truncation_index(source: PairSource, policy: TruncationPolicy) -> int:
    """Smallest certified index ``x_max`` with tail mass below epsilon.

    The certificate: successive pmf ratios are non-increasing for every
    supported kind, so for any x with ratio(x+1) < 1 the tail beyond x is
    bounded by the geometric sum pmf(x+1) / (1 - ratio(x+1)).  The first
    x whose bound drops below ``tail_epsilon`` is returned.  If no index
    up to ``hard_cap`` is certified, :class:`CapExceeded` is raised;
    the series is never truncated silently.
    """
    if source.mu == 0.0:
        return 0
    eps = policy.tail_epsilon
    p = _pmf0(source)
    for x in range(policy.hard_cap + 1):
        p_next = p * _ratio(source, x)
        q = _ratio(source, x + 1)
        if q < 1.0 and p_next / (1.0 - q) < eps:
            return x
        p = p_next
    raise CapExceeded(
        f"no truncation index up to hard_cap={policy.hard_cap} certifies "
        f"tail < {eps:g} for {source.kind.value} source with mu={source.mu:g}"
    )
