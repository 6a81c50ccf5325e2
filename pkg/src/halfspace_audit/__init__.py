"""Auditing classifiers for statistical parity over halfspace subgroups."""

from .auditor import AuditConfig, AuditReport, Mode, Verdict, audit, audit_step, evaluate_certificate, verdict
from .core import (
    AuditInputError,
    Dataset,
    EmptyGroupError,
    Halfspace,
    MassConstraint,
    evaluate_halfspace,
    fixed_mass_halfspace_empirical,
    fixed_mass_halfspace_gaussian,
    gaussian_quantile,
)
from .metrics import (
    EstimateWithCI,
    FairnessMeasurement,
    agreement_rate,
    deviation,
    estimate_rate,
    hoeffding_sample_size,
    lemma_identity_residual,
    weighted_unfairness,
)
from .oracle import OracleRequest, OracleResult, learn_fixed_mass_halfspace

__version__ = "0.1.0"
