"""Threshold single-photon detector model.

A detector is characterised by a combined collection/detection
efficiency ``alpha`` and a per-gate dark-count probability ``dark``.
It cannot resolve photon number: it either clicks or it does not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

__all__ = ["ClickMode", "DetectorModel", "click_prob"]


class ClickMode(Enum):
    EXACT = "exact"
    LINEARIZED = "linearized"


@dataclass(frozen=True)
class DetectorModel:
    """Threshold detector with efficiency ``alpha`` and dark probability ``dark``."""

    alpha: float
    dark: float = 0.0
    mode: ClickMode = field(default=ClickMode.EXACT)

    def __post_init__(self) -> None:
        if not (0 <= self.alpha <= 1):
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not (0 <= self.dark < 1):
            raise ValueError(f"dark must lie in [0, 1), got {self.dark}")
        if not isinstance(self.mode, ClickMode):
            raise TypeError(f"mode must be a ClickMode, got {self.mode!r}")


def click_prob(det: DetectorModel, x: int):
    """Probability that the detector clicks when ``x`` photons arrive.

    EXACT mode: 1 - (1 - dark) * (1 - alpha)^x, the complement of "no
    photon fires and no dark count fires".  LINEARIZED mode: x * alpha
    + dark, the small-signal expansion; it can exceed 1 and is meant
    for closed-form derivations, not as a probability.

    Arithmetic is plain Python, so exact types such as
    :class:`fractions.Fraction` pass through unchanged in EXACT mode.
    """
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if det.mode is ClickMode.LINEARIZED:
        return x * det.alpha + det.dark
    # algebraically 1 - (1-dark)(1-alpha)^x, arranged so a lone dark
    # count comes back as exactly `dark` instead of 1 - (1 - dark)
    return det.dark + (1 - det.dark) * (1 - (1 - det.alpha) ** x)
