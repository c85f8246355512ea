"""scikit-learn style wrappers: constructor holds parameters, ``fit`` computes, results end in ``_``."""
from __future__ import annotations

import math
from fractions import Fraction

from sklearn.base import BaseEstimator

from . import certify, experiment, halasz
from ._validation import check_dist, check_positive_int
from .errors import DomainError


class _Fitted:
    def _check_fitted(self, attr: str):
        if not hasattr(self, attr):
            raise DomainError(f"{type(self).__name__} is not fitted")


class CertificateSearch(_Fitted, BaseEstimator):
    """Find (``search=True``) or verify a certificate for a law ``alpha``.

    After ``fit``: ``certificate_`` and ``report_``. ``predict(n)`` returns the bound ``p^(n/r)``.
    """

    def __init__(self, r: int = 1, support_bound: int = 2, q_floor=certify.DEFAULT_Q_FLOOR, certificate=None):
        self.r = r
        self.support_bound = support_bound
        self.q_floor = q_floor
        self.certificate = certificate

    def fit(self, alpha, y=None):
        alpha = check_dist(alpha)
        r = check_positive_int(self.r, "r")
        if self.certificate is None:
            cert = certify.find_certificate(alpha, r, check_positive_int(self.support_bound, "support_bound"),
                                            Fraction(self.q_floor))
        else:
            cert = self.certificate
        self.alpha_ = alpha
        self.certificate_ = cert
        self.report_ = certify.verify(alpha, cert)
        return self

    def predict(self, n):
        self._check_fitted("certificate_")
        return certify.certificate_bound(self.certificate_, check_positive_int(n, "n"))


class SingularityEstimator(_Fitted, BaseEstimator):
    """Monte Carlo singularity frequency of an ``n x n`` matrix with i.i.d. entries drawn from the fitted law."""

    def __init__(self, n: int = 10, trials: int = 10_000, seed: int = 0, prime="auto",
                 fixed_rows=None, block_size: int = experiment.DEFAULT_BLOCK, threads: int = 1):
        self.n = n
        self.trials = trials
        self.seed = seed
        self.prime = prime
        self.fixed_rows = fixed_rows
        self.block_size = block_size
        self.threads = threads

    def fit(self, dist, y=None):
        cfg = experiment.ExperimentConfig(n=check_positive_int(self.n, "n"),
                                          trials=check_positive_int(self.trials, "trials"),
                                          master_seed=int(self.seed), dist=check_dist(dist),
                                          fixed_rows=self.fixed_rows, prime=self.prime,
                                          block_size=check_positive_int(self.block_size, "block_size"))
        self.config_ = cfg
        self.result_ = experiment.run_singularity(cfg, threads=check_positive_int(self.threads, "threads"))
        self.estimate_ = self.result_.estimate
        self.interval_ = self.result_.wilson
        return self

    def score(self, dist=None, y=None) -> float:
        self._check_fitted("result_")
        return float(self.estimate_)


class SpectrumEstimator(_Fitted, BaseEstimator):
    """Spectrum of a row model against a hyperplane; ``eps2=None`` picks the admissible value automatically."""

    def __init__(self, eps1=Fraction(1, 100), eps2=None):
        self.eps1 = eps1
        self.eps2 = eps2

    def fit(self, model: halasz.RowModel, V: halasz.HyperplaneQ):
        params = halasz.HalaszParams.auto(model, eps1=Fraction(self.eps1))
        if self.eps2 is not None:
            if not 0 < float(self.eps2) <= 1:
                raise DomainError("eps2 must lie in (0, 1]")
            params.log_eps2 = math.log(float(self.eps2))
        self.params_ = params
        self.report_ = halasz.spectrum_sandwich(model, V, params)
        self.spectrum_ = self.report_.spectrum
        self.Q_ = V.Q
        return self

    def transform(self, X):
        """Lambda-norms of the elements ``X``."""
        self._check_fitted("spectrum_")
        return [halasz.lambda_norm(int(x), self.spectrum_, self.Q_) for x in X]
