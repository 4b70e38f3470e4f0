"""scikit-learn style wrapper around the throughput solver.

``fit`` learns the optimal stopping threshold from observed spectral
efficiencies (or from a parametric channel model); ``predict`` then gives the
transmit/skip decision for newly probed rates.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .analysis import baseline_throughput, threshold_throughput
from .channel import ChannelModel, Empirical, GammaFading
from .params import LbtParams, validate, zeta
from .solver import optimal_policy, solve


def _as_rates(X) -> np.ndarray:
    X = check_array(X, ensure_2d=False, dtype=np.float64)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected a single column of spectral efficiencies, got {X.shape[1]}")
        X = X[:, 0]
    if np.any(X < 0):
        raise ValueError("spectral efficiencies must be nonnegative")
    return X


class OptimalStoppingLBT(BaseEstimator):
    """Throughput-optimal transmit/skip rule for load based equipment.

    Parameters
    ----------
    q, t_ecca, t_cot_max, tau, p, bandwidth
        ECCA and transmission parameters in SI units, see
        :class:`lbtstop.params.LbtParams`.
    channel : ChannelModel, optional
        Channel used when ``fit`` is called without data. Defaults to
        Rayleigh fading at 10 dB.
    method : {"fixed_point", "bisection"}
    tol : float, optional
        Absolute solver tolerance in bits/s.

    Attributes
    ----------
    lambda_star_ : float
        Maximum ergodic throughput, bits/s.
    threshold_ : float
        Stopping threshold lambda_star_ / bandwidth, bits/s/Hz.
    zeta_ : float
    channel_ : ChannelModel
    result_ : SolverResult
    policy_ : StoppingPolicy
    """

    def __init__(
        self,
        q=32,
        t_ecca=20e-6,
        t_cot_max=12e-3,
        tau=0.1,
        p=0.5,
        bandwidth=1e6,
        channel=None,
        method="fixed_point",
        tol=None,
    ):
        self.q = q
        self.t_ecca = t_ecca
        self.t_cot_max = t_cot_max
        self.tau = tau
        self.p = p
        self.bandwidth = bandwidth
        self.channel = channel
        self.method = method
        self.tol = tol

    def _params(self) -> LbtParams:
        params = LbtParams(self.q, self.t_ecca, self.t_cot_max, self.tau, self.p, self.bandwidth)
        report = validate(params)
        if not report.ok:
            raise ValueError("invalid LBT parameters: " + "; ".join(report.violations))
        return params

    def fit(self, X=None, y=None):
        """Solve for the optimal threshold.

        ``X`` holds observed spectral efficiencies (bits/s/Hz); when omitted
        the ``channel`` model is used instead. ``y`` is ignored.
        """
        params = self._params()
        if X is not None:
            model: ChannelModel = Empirical(_as_rates(X))
        elif self.channel is not None:
            model = self.channel
        else:
            model = GammaFading()
        kwargs = {} if self.tol is None else {"tol": self.tol}
        self.params_ = params
        self.channel_ = model
        self.zeta_ = zeta(params)
        self.result_ = solve(params, model, self.method, **kwargs)
        self.lambda_star_ = self.result_.lambda_star
        self.threshold_ = self.result_.threshold
        self.policy_ = optimal_policy(self.result_)
        return self

    def decision_function(self, X):
        """Margin of each probed rate over the threshold; >= 0 means transmit."""
        check_is_fitted(self, "threshold_")
        return _as_rates(X) - self.threshold_

    def predict(self, X):
        """1 to transmit, 0 to skip and run another ECCA phase."""
        return (self.decision_function(X) >= 0).astype(int)

    def score(self, X, y=None):
        """Throughput (bits/s) of the fitted rule on the empirical distribution of ``X``."""
        check_is_fitted(self, "threshold_")
        model = Empirical(_as_rates(X))
        return threshold_throughput(model, self.zeta_, self.params_.bandwidth, self.lambda_star_)

    def baseline_score(self, X=None, probe=True):
        """Throughput of transmitting after every ECCA phase, for comparison."""
        check_is_fitted(self, "threshold_")
        model = self.channel_ if X is None else Empirical(_as_rates(X))
        return baseline_throughput(self.params_, model, probe)
