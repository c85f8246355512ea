"""Singularity-probability bounds for random matrices with discrete entries."""
from .certify import Certificate, CertificateReport, certificate_bound, find_certificate, verify
from .dist import CosinePoly, DiscreteDist, SymmetricDist, bernoulli, gamma, min_on_period, pm2, uniform
from .errors import SingboundError
from .estimators import CertificateSearch, SingularityEstimator, SpectrumEstimator
from .experiment import (ExperimentConfig, ExperimentResult, SchurReducer, exhaustive_singularity,
                         run_rational_eigenvalue, run_singularity, schur_reduce)
from .fieldq import MatrixQ, PrimeField
from .gap import Gap
from .halasz import HalaszParams, HyperplaneQ, RowModel

__all__ = [
    "Certificate", "CertificateReport", "certificate_bound", "find_certificate", "verify",
    "CosinePoly", "DiscreteDist", "SymmetricDist", "bernoulli", "gamma", "min_on_period", "pm2", "uniform",
    "SingboundError", "CertificateSearch", "SingularityEstimator", "SpectrumEstimator",
    "ExperimentConfig", "ExperimentResult", "SchurReducer", "exhaustive_singularity",
    "run_rational_eigenvalue", "run_singularity", "schur_reduce",
    "MatrixQ", "PrimeField", "Gap", "HalaszParams", "HyperplaneQ", "RowModel",
]

__version__ = "0.1.0"
