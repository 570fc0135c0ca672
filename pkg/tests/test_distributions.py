"""Pair-number statistics: pmf values, moments, certified truncation."""

import math
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biphoton import (
    CapExceeded,
    PairSource,
    SourceKind,
    TruncationPolicy,
    mean,
    pmf,
    pmf_values,
    second_moment,
    truncation_index,
)

ALL_KINDS = list(SourceKind)

# smallest x_max with exact tail < 1e-12 at mu=0.1, from 60-digit partial
# sums (see _exact_min_index); the certified bound must land on the same
# indexes here because it is tight for these parameters
MIN_INDEX_MU01 = {
    SourceKind.DIS_ENTANGLED: 7,
    SourceKind.DIS_CORRELATED: 7,
    SourceKind.INDIS_ENTANGLED: 9,
    SourceKind.THERMAL_CORRELATED: 11,
}


def _pmf_mp(kind: SourceKind, mu, x: int):
    mu = mp.mpf(mu)
    if kind is SourceKind.INDIS_ENTANGLED:
        return (1 + x) * (mu / 2) ** x / (1 + mu / 2) ** (x + 2)
    if kind is SourceKind.THERMAL_CORRELATED:
        return mu**x / (1 + mu) ** (x + 1)
    return mp.e ** (-mu) * mu**x / mp.factorial(x)


def _exact_min_index(kind: SourceKind, mu, eps) -> int:
    """Reference: first x_max whose exact tail mass is below eps."""
    with mp.workdps(60):
        acc = mp.mpf(0)
        for x in range(500):
            acc += _pmf_mp(kind, mu, x)
            if 1 - acc < mp.mpf(eps):
                return x
    raise AssertionError("tail never certified")


def test_zero_mu_is_point_mass():
    for kind in ALL_KINDS:
        src = PairSource(kind, 0.0)
        assert pmf(src, 0) == 1.0
        assert pmf(src, 3) == 0.0
        assert truncation_index(src, TruncationPolicy()) == 0


def test_poisson_pmf_at_zero():
    assert pmf(PairSource(SourceKind.DIS_ENTANGLED, 0.1), 0) == math.exp(-0.1)


def test_single_mode_entangled_pmf_matches_rational_form():
    # (1+x) (mu/2)^x / (1+mu/2)^(x+2) evaluated in exact rational arithmetic
    for mu in (Fraction(1, 10), Fraction(1, 2), Fraction(2)):
        src = PairSource(SourceKind.INDIS_ENTANGLED, float(mu))
        for x in range(12):
            want = (1 + x) * (mu / 2) ** x / (1 + mu / 2) ** (x + 2)
            assert pmf(src, x) == pytest.approx(float(want), rel=1e-13)
    # frozen spot value: 3 (1/20)^2 / (21/20)^4 = 400/64827
    got = pmf(PairSource(SourceKind.INDIS_ENTANGLED, 0.1), 2)
    assert got == pytest.approx(400 / 64827, rel=1e-13)
    assert got == pytest.approx(0.006170268560939115, rel=1e-13)


def test_thermal_pmf_matches_rational_form():
    for mu in (Fraction(1, 10), Fraction(3, 2)):
        src = PairSource(SourceKind.THERMAL_CORRELATED, float(mu))
        for x in range(12):
            want = mu**x / (1 + mu) ** (x + 1)
            assert pmf(src, x) == pytest.approx(float(want), rel=1e-13)


def test_poisson_pmf_matches_direct_form():
    for kind in (SourceKind.DIS_ENTANGLED, SourceKind.DIS_CORRELATED):
        src = PairSource(kind, 0.4)
        for x in range(15):
            want = math.exp(-0.4) * 0.4**x / math.factorial(x)
            assert pmf(src, x) == pytest.approx(want, rel=1e-13)


def test_pmf_values_matches_pointwise_pmf():
    for kind in ALL_KINDS:
        src = PairSource(kind, 0.7)
        assert pmf_values(src, 20) == [pmf(src, x) for x in range(21)]


def test_moment_closed_forms():
    for kind in ALL_KINDS:
        assert mean(PairSource(kind, 0.4)) == 0.4
    assert second_moment(PairSource(SourceKind.INDIS_ENTANGLED, 1.0)) == 2.5
    assert second_moment(PairSource(SourceKind.THERMAL_CORRELATED, 1.0)) == 3.0
    assert second_moment(PairSource(SourceKind.DIS_ENTANGLED, 1.0)) == 2.0


def test_truncated_sums_reproduce_moments():
    policy = TruncationPolicy(tail_epsilon=1e-12, hard_cap=200)
    for kind in ALL_KINDS:
        for mu in (0.01, 0.1, 0.5, 1.0, 2.0):
            src = PairSource(kind, mu)
            x_max = truncation_index(src, policy)
            w = pmf_values(src, x_max)
            tol = policy.tail_epsilon * x_max * x_max * 10
            assert 1 - policy.tail_epsilon <= math.fsum(w) <= 1 + 1e-15
            assert math.fsum(x * w[x] for x in range(x_max + 1)) == pytest.approx(
                mean(src), abs=tol, rel=1e-12
            )
            assert math.fsum(x * x * w[x] for x in range(x_max + 1)) == pytest.approx(
                second_moment(src), abs=tol, rel=1e-12
            )


def test_truncation_index_certified_and_tight():
    for kind, want in MIN_INDEX_MU01.items():
        src = PairSource(kind, 0.1)
        got = truncation_index(src, TruncationPolicy(tail_epsilon=1e-12))
        assert got == want
    # across a parameter grid the bound may overshoot the exact minimal
    # index slightly but must never certify a tail that is not there
    for kind in ALL_KINDS:
        for mu in (0.05, 0.5, 1.0, 3.0):
            for eps in (1e-9, 1e-12):
                src = PairSource(kind, mu)
                got = truncation_index(src, TruncationPolicy(tail_epsilon=eps))
                exact = _exact_min_index(kind, mu, eps)
                assert exact <= got <= exact + 2
                with mp.workdps(60):
                    tail = 1 - sum(_pmf_mp(kind, mu, x) for x in range(got + 1))
                assert tail < mp.mpf(eps)


def test_truncation_cap_exceeded():
    src = PairSource(SourceKind.INDIS_ENTANGLED, 10.0)
    with pytest.raises(CapExceeded):
        truncation_index(src, TruncationPolicy(tail_epsilon=1e-15, hard_cap=40))


def test_input_validation():
    with pytest.raises(ValueError):
        PairSource(SourceKind.DIS_ENTANGLED, -0.1)
    with pytest.raises(ValueError):
        PairSource(SourceKind.DIS_ENTANGLED, math.inf)
    with pytest.raises(TypeError):
        PairSource("poisson", 0.1)
    with pytest.raises(ValueError):
        TruncationPolicy(tail_epsilon=0.0)
    with pytest.raises(ValueError):
        TruncationPolicy(tail_epsilon=1.5)
    with pytest.raises(ValueError):
        TruncationPolicy(hard_cap=-1)
    with pytest.raises(ValueError):
        pmf(PairSource(SourceKind.DIS_ENTANGLED, 0.1), -1)


@settings(max_examples=60, deadline=None)
@given(
    kind=st.sampled_from(ALL_KINDS),
    mu=st.floats(min_value=1e-4, max_value=3.0, allow_nan=False),
)
def test_normalization_under_certified_truncation(kind, mu):
    src = PairSource(kind, mu)
    policy = TruncationPolicy(tail_epsilon=1e-10, hard_cap=400)
    x_max = truncation_index(src, policy)
    total = math.fsum(pmf_values(src, x_max))
    assert 1 - policy.tail_epsilon <= total <= 1 + 1e-14


@settings(max_examples=60, deadline=None)
@given(
    kind=st.sampled_from(ALL_KINDS),
    mu=st.floats(min_value=1e-4, max_value=5.0, allow_nan=False),
)
def test_pmf_ratios_non_increasing(kind, mu):
    # the truncation certificate relies on this monotonicity
    src = PairSource(kind, mu)
    vals = pmf_values(src, 25)
    ratios = [vals[x + 1] / vals[x] for x in range(25) if vals[x] > 0]
    for a, b in zip(ratios, ratios[1:]):
        assert b <= a * (1 + 1e-12)
