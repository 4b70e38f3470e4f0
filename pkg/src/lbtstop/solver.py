"""Maximum ergodic throughput of the optimal stopping rule.

The optimum lambda* is the unique root of

    h(lam) = W * E[(R - lam/W)^+] - zeta * lam,

and the optimal rule transmits at the first probe with R >= lambda*/W. It is
found by iterating the threshold-policy throughput map g, whose fixed point
is lambda*, and cross-checked by bisection on h.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .analysis import threshold_throughput
from .channel import ChannelModel
from .exceptions import BracketFailure, MaxIterExceeded, SolverError, ZeroOverheadError
from .params import LbtParams, Q_MAX, Q_MIN, cot_bound, max_admissible_cot, zeta
from .policy import StoppingPolicy

log = logging.getLogger(__name__)

FIXED_POINT = "fixed_point"
BISECTION = "bisection"

STEP_RTOL = 1e-12
RESIDUAL_RTOL = 1e-9
MAX_ITER = 100_000


@dataclass(frozen=True)
class SolverResult:
    lambda_star: float
    bandwidth: float
    iterations: int
    residual: float
    method: str
    trace: tuple = field(default=(), repr=False, compare=False)
    degenerate: bool = False

    @property
    def threshold(self) -> float:
        """Optimal stopping threshold, bits/s/Hz."""
        return self.lambda_star / self.bandwidth

    @property
    def trace_monotone(self) -> bool:
        """True when the iterates never decrease after the first step.

        Decreases below 1e-12 relative are quadrature noise and ignored.
        """
        tail = self.trace[1:]
        return all(b >= a - 1e-12 * abs(a) for a, b in zip(tail, tail[1:]))


def residual(model: ChannelModel, overhead: float, bandwidth: float, lam: float) -> float:
    return bandwidth * model.tail_integral(lam / bandwidth) - overhead * lam


def _scale(model: ChannelModel, bandwidth: float) -> float:
    return bandwidth * model.mean


def _check_overhead(overhead: float):
    if not overhead > 0:
        raise ZeroOverheadError(
            "zeta must be positive; with no listening or probing cost the "
            "optimum is the essential supremum of W*R"
        )


def _finish(model, overhead, bandwidth, lam, iterations, method, trace, residual_rtol):
    res = abs(residual(model, overhead, bandwidth, lam))
    if res > residual_rtol * _scale(model, bandwidth):
        raise SolverError(
            f"{method}: residual {res:.3g} exceeds {residual_rtol:g} * W*E[R] at lambda={lam:.12g}"
        )
    return SolverResult(lam, bandwidth, iterations, res, method, tuple(trace))


def _degenerate(bandwidth, method):
    log.warning("channel has zero mean rate; optimal throughput is 0")
    return SolverResult(0.0, bandwidth, 0, 0.0, method, (0.0,), degenerate=True)


def fixed_point(
    model: ChannelModel,
    overhead: float,
    bandwidth: float,
    lambda0: float = 0.0,
    tol: float | None = None,
    max_iter: int = MAX_ITER,
    residual_rtol: float = RESIDUAL_RTOL,
) -> SolverResult:
    """Iterate lam <- g(lam) from ``lambda0`` until successive iterates differ by < tol."""
    if lambda0 < 0:
        raise ValueError("lambda0 must be nonnegative")
    _check_overhead(overhead)
    scale = _scale(model, bandwidth)
    if scale == 0.0:
        return _degenerate(bandwidth, FIXED_POINT)
    if tol is None:
        tol = STEP_RTOL * scale

    lam = float(lambda0)
    trace = [lam]
    for it in range(1, max_iter + 1):
        nxt = threshold_throughput(model, overhead, bandwidth, lam)
        trace.append(nxt)
        if abs(nxt - lam) <= tol:
            return _finish(model, overhead, bandwidth, nxt, it, FIXED_POINT, trace, residual_rtol)
        lam = nxt
    raise MaxIterExceeded(f"fixed-point iteration did not converge in {max_iter} steps", trace)


def bisection(
    model: ChannelModel,
    overhead: float,
    bandwidth: float,
    tol: float | None = None,
    residual_rtol: float = RESIDUAL_RTOL,
) -> SolverResult:
    """Bisect h on [0, W*E[R]/zeta]; h is strictly decreasing there."""
    _check_overhead(overhead)
    scale = _scale(model, bandwidth)
    if scale == 0.0:
        return _degenerate(bandwidth, BISECTION)
    if tol is None:
        tol = STEP_RTOL * scale

    lo, hi = 0.0, scale / overhead
    h_lo = residual(model, overhead, bandwidth, lo)
    if h_lo < -tol:
        raise BracketFailure(f"h(0) = {h_lo:.3g} < 0; channel model is inconsistent")
    h_hi = residual(model, overhead, bandwidth, hi)
    if h_hi > tol:
        raise BracketFailure(f"h({hi:.6g}) = {h_hi:.3g} > 0 at the upper bracket")

    trace = []
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        iterations += 1
        if residual(model, overhead, bandwidth, mid) > 0:
            lo = mid
        else:
            hi = mid
        trace.append(0.5 * (lo + hi))
    return _finish(model, overhead, bandwidth, 0.5 * (lo + hi), iterations, BISECTION, trace, residual_rtol)


def solve_fixed_point(
    params: LbtParams,
    model: ChannelModel,
    lambda0: float = 0.0,
    tol: float | None = None,
    max_iter: int = MAX_ITER,
) -> SolverResult:
    return fixed_point(model, zeta(params), params.bandwidth, lambda0, tol, max_iter)


def solve_bisection(params: LbtParams, model: ChannelModel, tol: float | None = None) -> SolverResult:
    return bisection(model, zeta(params), params.bandwidth, tol)


def solve(params: LbtParams, model: ChannelModel, method: str = FIXED_POINT, **kwargs) -> SolverResult:
    if method == FIXED_POINT:
        return solve_fixed_point(params, model, **kwargs)
    if method == BISECTION:
        return solve_bisection(params, model, **kwargs)
    raise ValueError(f"unknown method {method!r}")


def optimal_policy(result: SolverResult) -> StoppingPolicy:
    """Threshold rule: transmit iff the probed rate is at least lambda*/W."""
    return StoppingPolicy.threshold(result.threshold)


@dataclass(frozen=True)
class RegulationPoint:
    q: int
    t_cot_max: float
    lambda_star: float


@dataclass(frozen=True)
class RegulationResult:
    best: RegulationPoint
    table: tuple[RegulationPoint, ...]

    @property
    def q(self) -> int:
        return self.best.q

    @property
    def t_cot_max(self) -> float:
        return self.best.t_cot_max

    @property
    def lambda_star(self) -> float:
        return self.best.lambda_star


def regulation_optimum(
    t_ecca: float,
    tau: float,
    p: float,
    model: ChannelModel,
    bandwidth: float,
    q_values=range(Q_MIN, Q_MAX + 1),
    cot_fractions=(1.0,),
) -> RegulationResult:
    """Search the admissible (q, t_cot_max) grid for the largest lambda*.

    A fraction of 1.0 stands for the largest representable occupancy time
    below the regulatory bound; other fractions scale the bound itself.
    """
    table = []
    for q in q_values:
        for frac in cot_fractions:
            cot = max_admissible_cot(q) if frac >= 1.0 else frac * cot_bound(q)
            params = LbtParams(q=q, t_ecca=t_ecca, t_cot_max=cot, tau=tau, p=p, bandwidth=bandwidth)
            lam = solve_fixed_point(params, model).lambda_star
            table.append(RegulationPoint(q, cot, lam))
    if not table:
        raise ValueError("empty regulation grid")
    best = max(table, key=lambda pt: pt.lambda_star)
    return RegulationResult(best, tuple(table))
