"""Time-bin entangled pair rates via the polarization correspondence.

A time-bin qubit occupies one of two slots behind an unbalanced
interferometer.  Each analyzer output collects a photon from a given
slot only when it takes the matching interferometer arm, which happens
with amplitude 1/2; the net effect on the threshold detector is a
halved efficiency, alpha -> alpha/2, while dark counts are untouched.
``mu`` counts the mean pair number over the two slots together.

Slot-basis settings map onto polarization settings: same-slot (aa) to
HH, opposite-slot (ab) to HV, and slot-vs-superposition (a+) to HPLUS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .detection import DetectorModel
from .distributions import PairSource, SourceKind, TruncationPolicy
from .polarization import (
    HplusModel,
    RateEntry,
    RateMethod,
    Setting,
    UnsupportedSetting,
    coincidence_rate,
)

__all__ = ["TimebinPort", "TimebinSetting", "timebin_rate", "fringe_per_pair"]


class TimebinPort(Enum):
    AA = "aa"
    AB = "ab"
    APLUS = "aplus"


_PORT_TO_SETTING = {
    TimebinPort.AA: Setting.HH,
    TimebinPort.AB: Setting.HV,
    TimebinPort.APLUS: Setting.HPLUS,
}


@dataclass(frozen=True)
class TimebinSetting:
    """Analyzer port pairing plus the summed interferometer phase."""

    port: TimebinPort
    phase_sum: float = 0.0


def timebin_rate(
    kind: SourceKind,
    port: TimebinPort,
    mu: float,
    alpha_s: float,
    alpha_i: float,
    dark_s: float = 0.0,
    dark_i: float = 0.0,
    method: RateMethod = RateMethod.EXACT_SERIES,
    policy: TruncationPolicy = TruncationPolicy(),
    hplus_model: HplusModel = HplusModel.COHERENT,
) -> RateEntry:
    """Coincidence rate of a time-bin analyzer setting."""
    if not kind.entangled:
        raise UnsupportedSetting(f"time-bin rates require an entangled kind, got {kind.value}")
    if isinstance(port, TimebinSetting):
        port = port.port
    setting = _PORT_TO_SETTING[port]

    if method is RateMethod.EXACT_SERIES:
        det_s = DetectorModel(alpha_s / 2.0, dark_s)
        det_i = DetectorModel(alpha_i / 2.0, dark_i)
        return coincidence_rate(PairSource(kind, mu), setting, det_s, det_i, policy, hplus_model)
    if method is not RateMethod.CLOSED_FORM:
        raise ValueError(f"unsupported time-bin method {method}")

    if kind is SourceKind.DIS_ENTANGLED:
        acc = (mu * alpha_s / 4 + dark_s) * (mu * alpha_i / 4 + dark_i)
        if port is TimebinPort.AA:
            value = mu * alpha_s * alpha_i / 8 + acc
        elif port is TimebinPort.AB:
            value = acc
        else:
            value = mu * alpha_s * alpha_i / 16 + acc
    else:
        dark = mu * alpha_s * dark_i / 4 + mu * alpha_i * dark_s / 4 + dark_s * dark_i
        if port is TimebinPort.AA:
            value = alpha_s * alpha_i * (mu * mu / 8 + mu / 8) + dark
        elif port is TimebinPort.AB:
            value = mu * mu * alpha_s * alpha_i / 16 + dark
        else:
            value = alpha_s * alpha_i * (3 * mu * mu / 32 + mu / 16) + dark
    model = hplus_model if port is TimebinPort.APLUS else None
    return RateEntry(value, setting, RateMethod.CLOSED_FORM, 0, model)


def fringe_per_pair(phase_sum: float) -> float:
    """Single-pair same-slot coincidence fringe versus the summed phase.

    (1 + cos(phase)) / 16: peak 1/8 at zero phase, zero at pi, where the
    opposite-slot fringe peaks instead.
    """
    return (1.0 + math.cos(phase_sum)) / 16.0
