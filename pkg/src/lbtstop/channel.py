"""Distributions of the per-period spectral efficiency R (bits/s/Hz)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate, special

from .exceptions import QuadratureError

QUAD_RTOL = 1e-9
# 1 - F_R at the upper integration limit.
TAIL_CUTOFF = 1e-12


def _check_rate(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise ValueError("spectral efficiency must be nonnegative")
    return r


def _scalar_or_array(values, like):
    return float(values) if np.ndim(like) == 0 else values


class ChannelModel:
    """Common interface: ``cdf``, ``sf``, ``tail_integral``, ``mean``, ``sample``."""

    def cdf(self, r):
        raise NotImplementedError

    def sf(self, r):
        """Survival function 1 - F_R(r)."""
        r = _check_rate(r)
        return _scalar_or_array(1.0 - np.asarray(self.cdf(r)), r)

    def stop_probability(self, threshold: float) -> float:
        """P(R >= threshold); differs from ``sf`` only at atoms."""
        return float(self.sf(threshold))

    def tail_integral(self, threshold: float) -> float:
        """Integral of 1 - F_R from ``threshold`` to infinity, i.e. E[(R - threshold)^+]."""
        raise NotImplementedError

    @property
    def mean(self) -> float:
        return self.tail_integral(0.0)

    @property
    def support_max(self) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError


@dataclass(frozen=True)
class GammaFading(ChannelModel):
    """R = log_b(1 + G * snr) with G ~ Gamma(k, 1).

    The unit scale makes E[G] = k, so the mean SNR is ``k * snr`` rather
    than ``snr`` whenever k != 1.
    """

    k: float = 1.0
    snr_db: float = 10.0
    log_base: float = 2.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"Gamma shape must be positive, got {self.k}")
        if not math.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        if not (self.log_base > 1.0):
            raise ValueError("log_base must exceed 1")

    @property
    def snr(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)

    def _gain_at(self, r):
        # fading gain G that yields spectral efficiency r
        return np.expm1(np.asarray(r, dtype=float) * math.log(self.log_base)) / self.snr

    def _rate_at(self, g):
        return np.log1p(np.asarray(g, dtype=float) * self.snr) / math.log(self.log_base)

    def cdf(self, r):
        r = _check_rate(r)
        return _scalar_or_array(special.gammainc(self.k, self._gain_at(r)), r)

    def sf(self, r):
        r = _check_rate(r)
        return _scalar_or_array(special.gammaincc(self.k, self._gain_at(r)), r)

    def _upper_limit(self, threshold: float, sf_threshold: float) -> float:
        target = max(min(TAIL_CUTOFF, TAIL_CUTOFF * sf_threshold), 1e-300)
        g_up = special.gammainccinv(self.k, target)
        return max(float(self._rate_at(g_up)), threshold)

    def tail_integral(self, threshold: float) -> float:
        threshold = float(_check_rate(threshold))
        s0 = self.sf(threshold)
        if s0 == 0.0:
            return 0.0
        upper = self._upper_limit(threshold, s0)
        if upper <= threshold:
            return 0.0
        value, abserr = integrate.quad(
            self.sf, threshold, upper, epsabs=0.0, epsrel=QUAD_RTOL, limit=400
        )
        if not abserr <= max(10 * QUAD_RTOL * abs(value), 1e-300):
            raise QuadratureError(
                f"tail integral at {threshold:g}: error estimate {abserr:.3g} "
                f"exceeds tolerance for value {value:.6g}"
            )
        return value

    @cached_property
    def mean(self) -> float:
        return self.tail_integral(0.0)

    @property
    def support_max(self) -> float:
        return math.inf

    def sample_gain(self, rng: np.random.Generator, size=None):
        return rng.gamma(self.k, 1.0, size)

    def sample(self, rng: np.random.Generator, size=None):
        g = self.sample_gain(rng, size)
        return _scalar_or_array(self._rate_at(g), g)


@dataclass(frozen=True)
class PointMass(ChannelModel):
    """Deterministic spectral efficiency ``r0``."""

    r0: float = 1.0

    def __post_init__(self):
        if not self.r0 >= 0:
            raise ValueError(f"r0 must be nonnegative, got {self.r0}")

    def cdf(self, r):
        r = _check_rate(r)
        return _scalar_or_array(np.where(r >= self.r0, 1.0, 0.0), r)

    def stop_probability(self, threshold: float) -> float:
        return 1.0 if float(_check_rate(threshold)) <= self.r0 else 0.0

    def tail_integral(self, threshold: float) -> float:
        threshold = float(_check_rate(threshold))
        return max(self.r0 - threshold, 0.0)

    @property
    def support_max(self) -> float:
        return self.r0

    def sample(self, rng: np.random.Generator, size=None):
        if size is None:
            return self.r0
        return np.full(size, self.r0, dtype=float)


@dataclass(frozen=True, eq=False)
class Empirical(ChannelModel):
    """Empirical distribution of observed spectral efficiencies."""

    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=float).ravel())
        if s.size == 0:
            raise ValueError("empirical channel needs at least one sample")
        if not np.all(np.isfinite(s)) or s[0] < 0:
            raise ValueError("empirical samples must be finite and nonnegative")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        # suffix sums let tail_integral run in O(log n)
        suffix = np.concatenate([np.cumsum(s[::-1])[::-1], [0.0]])
        object.__setattr__(self, "_suffix", suffix)

    @classmethod
    def from_file(cls, path) -> "Empirical":
        return cls(np.loadtxt(path, dtype=float, ndmin=1))

    def __repr__(self) -> str:
        return f"Empirical(n={self.samples.size})"

    def cdf(self, r):
        r = _check_rate(r)
        idx = np.searchsorted(self.samples, r, side="right")
        return _scalar_or_array(idx / self.samples.size, r)

    def stop_probability(self, threshold: float) -> float:
        threshold = float(_check_rate(threshold))
        below = np.searchsorted(self.samples, threshold, side="left")
        return (self.samples.size - below) / self.samples.size

    def tail_integral(self, threshold: float) -> float:
        threshold = float(_check_rate(threshold))
        n = self.samples.size
        idx = int(np.searchsorted(self.samples, threshold, side="right"))
        return max((self._suffix[idx] - threshold * (n - idx)) / n, 0.0)

    @property
    def support_max(self) -> float:
        return float(self.samples[-1])

    def sample(self, rng: np.random.Generator, size=None):
        return rng.choice(self.samples, size=size)
