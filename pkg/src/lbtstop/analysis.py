"""Renewal-reward quantities of a communication period.

A period is a sequence of ECCA phases, each followed by a link probe, ended
by one data transmission. Throughput of a stationary policy is the ratio of
expected bits to expected duration of a period.
"""

from __future__ import annotations

from dataclasses import dataclass

from .channel import ChannelModel
from .exceptions import DegenerateInputError
from .params import LbtParams, expected_checks, zeta


@dataclass(frozen=True)
class PeriodStats:
    expected_duration: float
    expected_bits: float

    @property
    def throughput(self) -> float:
        return self.expected_bits / self.expected_duration


def expected_ecca_checks(params: LbtParams) -> float:
    return expected_checks(params)


def expected_period_duration(params: LbtParams, n: int) -> float:
    """Mean duration of a period that transmits after exactly ``n`` ECCA phases."""
    if n < 1:
        raise ValueError("a period has at least one ECCA phase")
    return (
        params.t_cot_max
        + (n - 1) * params.tau * params.t_cot_max
        + n * expected_checks(params) * params.t_ecca
    )


def _stop_probability(model: ChannelModel, threshold: float) -> float:
    stop = model.stop_probability(threshold)
    if stop <= 0.0:
        raise DegenerateInputError(
            f"threshold {threshold:g} bits/s/Hz lies above the channel support; "
            "the period never ends"
        )
    return stop


def expected_stopped_duration(params: LbtParams, model: ChannelModel, lam: float) -> float:
    """Mean period duration when transmitting at the first R >= lam / W."""
    stop = _stop_probability(model, lam / params.bandwidth)
    return params.transmission_time + params.listening_time / stop


def stopped_mean_rate(model: ChannelModel, threshold: float) -> float:
    """E[R | R >= threshold], the mean rate of the period that transmits.

    Uses E[R | R >= t] = t + int_t^inf (1 - F_R) / P(R >= t); integrating
    the conditional CDF itself, as is sometimes written, diverges.
    """
    stop = _stop_probability(model, threshold)
    return threshold + model.tail_integral(threshold) / stop


def expected_stopped_bits(params: LbtParams, model: ChannelModel, lam: float) -> float:
    threshold = lam / params.bandwidth
    return params.transmission_time * params.bandwidth * stopped_mean_rate(model, threshold)


def stopped_period_stats(params: LbtParams, model: ChannelModel, lam: float) -> PeriodStats:
    return PeriodStats(
        expected_duration=expected_stopped_duration(params, model, lam),
        expected_bits=expected_stopped_bits(params, model, lam),
    )


def threshold_throughput(model: ChannelModel, overhead: float, bandwidth: float, x: float) -> float:
    """Throughput of the threshold policy with cutoff ``x / bandwidth``.

    ``overhead`` is the normalised listening cost zeta. Stays finite when the
    cutoff lies beyond the channel support (the value is then 0).
    """
    if x < 0:
        raise ValueError("threshold throughput needs x >= 0")
    th = x / bandwidth
    stop = model.stop_probability(th)
    return bandwidth * (th * stop + model.tail_integral(th)) / (stop + overhead)


def fixed_point_map_g(params: LbtParams, model: ChannelModel, x: float) -> float:
    """g(x) = E[bits] / E[duration] of the threshold policy at x / W."""
    return threshold_throughput(model, zeta(params), params.bandwidth, x)


def fixed_point_residual(params: LbtParams, model: ChannelModel, lam: float) -> float:
    """E[(W R - lam)^+] - zeta * lam; zero exactly at the optimal throughput."""
    return params.bandwidth * model.tail_integral(lam / params.bandwidth) - zeta(params) * lam


def baseline_throughput(params: LbtParams, model: ChannelModel, probe: bool = True) -> float:
    """Throughput of transmitting after every ECCA phase.

    With ``probe`` the probing slice is still spent and only the remaining
    (1 - tau) share of the occupancy time carries data.
    """
    ecca_time = expected_checks(params) * params.t_ecca
    data_time = params.transmission_time if probe else params.t_cot_max
    return data_time * params.bandwidth * model.mean / (params.t_cot_max + ecca_time)
