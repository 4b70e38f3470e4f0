"""Regulation and protocol parameters for load based equipment.

All quantities are stored in SI units: seconds, hertz, bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .exceptions import DegenerateInputError

Q_MIN = 4
Q_MAX = 32
# CCA observation floor, also applied to ECCA slots.
T_ECCA_FLOOR = 20e-6


def cot_bound(q: int) -> float:
    """Regulatory (exclusive) upper bound on the channel occupancy time, seconds."""
    # single rounding, so cot_bound(32) == 13e-3 exactly
    return 13.0 * q / 32000.0


def max_admissible_cot(q: int) -> float:
    """Largest representable occupancy time strictly below :func:`cot_bound`."""
    return math.nextafter(cot_bound(q), 0.0)


@dataclass(frozen=True)
class LbtParams:
    """ECCA and transmission parameters.

    Parameters
    ----------
    q : int
        Maximum ECCA counter value.
    t_ecca : float
        Duration of one ECCA observation slot, seconds.
    t_cot_max : float
        Maximum channel occupancy time, seconds.
    tau : float
        Share of the occupancy time spent probing the link.
    p : float
        Probability that a single ECCA check finds the channel clear.
    bandwidth : float
        Operating channel bandwidth, Hz.
    """

    q: int = 32
    t_ecca: float = 20e-6
    t_cot_max: float = 12e-3
    tau: float = 0.1
    p: float = 0.5
    bandwidth: float = 1e6

    def replace(self, **changes) -> "LbtParams":
        return replace(self, **changes)

    @property
    def listening_time(self) -> float:
        """Expected time of one ECCA phase plus probing, seconds."""
        return self.tau * self.t_cot_max + expected_checks(self) * self.t_ecca

    @property
    def transmission_time(self) -> float:
        return (1.0 - self.tau) * self.t_cot_max


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()
    warnings: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok and not self.warnings:
            return "pass"
        lines = [f"violation: {v}" for v in self.violations]
        lines += [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines)


def validate(params: LbtParams) -> ValidationReport:
    """Check ``params`` against the ETSI limits.

    Violations are returned as data; nothing is raised. An ECCA slot shorter
    than 20 us only produces a warning so exploratory sweeps stay possible.
    """
    violations = []
    warnings = []
    q = params.q
    if int(q) != q:
        violations.append(f"q must be an integer, got {q!r}")
    if q < Q_MIN:
        violations.append(f"q below {Q_MIN}")
    if q > Q_MAX:
        violations.append(f"q above {Q_MAX}")
    if not params.t_cot_max > 0:
        violations.append("t_cot_max must be positive")
    if not params.t_cot_max < cot_bound(q):
        violations.append(
            f"t_cot_max not < 13/32*q ms ({params.t_cot_max * 1e3:g} ms >= "
            f"{cot_bound(q) * 1e3:g} ms)"
        )
    if params.t_ecca < 0:
        violations.append("t_ecca must be nonnegative")
    elif params.t_ecca < T_ECCA_FLOOR:
        warnings.append(f"t_ecca below the 20 us CCA floor ({params.t_ecca * 1e6:g} us)")
    if not 0.0 <= params.tau <= 1.0:
        violations.append("tau outside [0, 1]")
    if not 0.0 < params.p <= 1.0:
        violations.append("p outside (0, 1]")
    if not params.bandwidth > 0:
        violations.append("bandwidth must be positive")
    return ValidationReport(tuple(violations), tuple(warnings))


def expected_checks(params: LbtParams) -> float:
    """Mean number of ECCA checks in one phase, (q + 1) / (2p)."""
    return (params.q + 1) / (2.0 * params.p)


def zeta(params: LbtParams) -> float:
    """Listening-plus-probing overhead normalised by the transmission time."""
    if params.tau >= 1.0:
        raise DegenerateInputError("zeta is undefined for tau = 1 (no transmission time)")
    if params.t_cot_max <= 0:
        raise DegenerateInputError("zeta is undefined for t_cot_max <= 0")
    return params.listening_time / params.transmission_time
