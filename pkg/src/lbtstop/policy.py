"""Transmit/skip rules applied after each ECCA phase."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

THRESHOLD = "threshold"
ALWAYS = "always"
FORCED = "forced"


@dataclass(frozen=True)
class StoppingPolicy:
    """Decides whether to transmit once the link has been probed.

    ``threshold`` transmits iff the probed rate is at least ``cutoff``
    (bits/s/Hz). ``always`` transmits after the first phase; whether it still
    pays for the probe is a simulation setting. ``forced`` transmits on the
    ``phases``-th probe regardless of the rate.
    """

    kind: str = THRESHOLD
    cutoff: float = 0.0
    phases: int = 1

    def __post_init__(self):
        if self.kind not in (THRESHOLD, ALWAYS, FORCED):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if not self.cutoff >= 0:
            raise ValueError("cutoff must be nonnegative")
        if self.phases < 1:
            raise ValueError("phases must be >= 1")

    @classmethod
    def threshold(cls, cutoff: float) -> "StoppingPolicy":
        return cls(THRESHOLD, cutoff=float(cutoff))

    @classmethod
    def always_transmit(cls) -> "StoppingPolicy":
        return cls(ALWAYS)

    @classmethod
    def forced(cls, phases: int) -> "StoppingPolicy":
        return cls(FORCED, phases=int(phases))

    def transmit(self, rate, phase):
        """Vectorised decision for probed ``rate`` after the ``phase``-th ECCA phase (1-based)."""
        rate = np.asarray(rate)
        if self.kind == THRESHOLD:
            return rate >= self.cutoff
        if self.kind == ALWAYS:
            return np.ones(rate.shape, dtype=bool)
        return np.broadcast_to(np.asarray(phase) >= self.phases, rate.shape)

    def __str__(self) -> str:
        if self.kind == THRESHOLD:
            return f"Threshold({self.cutoff:g})"
        if self.kind == ALWAYS:
            return "AlwaysTransmit"
        return f"Forced({self.phases})"
