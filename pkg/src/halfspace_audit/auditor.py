"""Fairness auditing by a sweep over subgroup masses.

For every mass ``mu`` on an evenly spaced grid over ``[a, b]`` the oracle is
asked twice for a fixed-mass halfspace: once fitting the classifier labels
and once fitting their negation.  The fit to ``c`` maximizes agreement, the
fit to ``-c`` minimizes it, and since at fixed mass the deviation is an affine
function of agreement, one of the two attains the largest ``|deviation|``.
Both candidates are measured on a held-out estimation split and the larger
mass-weighted deviation is kept; the best grid point is the certificate.
"""

from __future__ import annotations

import enum
import logging
import struct
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .core import AuditInputError, Dataset, EmptyGroupError, Halfspace, MassConstraint
from .metrics import EstimateWithCI, FairnessMeasurement, weighted_unfairness
from .oracle import ORACLES, OracleRequest, OracleResult, learn_fixed_mass_halfspace

log = logging.getLogger(__name__)


class Mode(str, enum.Enum):
    CONSTRUCTIVE = "constructive"
    NONCONSTRUCTIVE = "nonconstructive"


class Verdict(str, enum.Enum):
    FAIR = "fair"
    UNFAIR = "unfair"


@dataclass(frozen=True)
class AuditConfig:
    a: float = 0.5
    b: float = 0.5
    n: int = 1
    epsilon: float = 0.05
    delta: float = 0.05
    oracle: str = "chow"
    mode: Mode = Mode.CONSTRUCTIVE
    gamma_threshold: float = 0.05
    seed: int = 0
    split_fraction: float = 0.5
    oracle_options: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "oracle_options", dict(self.oracle_options))
        if not 0.0 < self.a <= self.b < 1.0:
            raise AuditInputError(f"need 0 < a <= b < 1, got a={self.a}, b={self.b}")
        if int(self.n) != self.n or self.n < 1:
            raise AuditInputError("grid count n must be a positive integer")
        if not 0.0 < self.epsilon < 1.0 or not 0.0 < self.delta < 1.0:
            raise AuditInputError("epsilon and delta must lie in (0, 1)")
        if not 0.0 < self.split_fraction < 1.0:
            raise AuditInputError("split_fraction must lie in (0, 1)")
        if self.oracle not in ORACLES:
            raise AuditInputError(f"unknown oracle {self.oracle!r}; choose one of {sorted(ORACLES)}")
        if not 0.0 <= self.gamma_threshold <= 1.0:
            raise AuditInputError("gamma_threshold must lie in [0, 1]")

    def grid(self) -> list[float]:
        """``a + k (b - a) / n`` for k = 0..n; a single point when a == b."""
        if self.a == self.b:
            return [self.a]
        width = self.b - self.a
        return [self.a + (k * width) / self.n for k in range(self.n + 1)]

    @property
    def oracle_delta(self) -> float:
        return self.delta / (2 * self.n)

    @property
    def candidate_confidence(self) -> float:
        """Per-measurement confidence: half of delta, union-bounded over 2 candidates per grid point."""
        return 1.0 - (self.delta / 2.0) / (2 * len(self.grid()))

    def to_dict(self) -> dict:
        return {
            "a": self.a, "b": self.b, "n": self.n, "epsilon": self.epsilon, "delta": self.delta,
            "oracle": self.oracle, "mode": self.mode.value, "gamma_threshold": self.gamma_threshold,
            "seed": self.seed, "split_fraction": self.split_fraction,
            "oracle_options": dict(sorted(self.oracle_options.items())),
        }


@dataclass(frozen=True)
class StepRecord:
    mu: float
    plus: OracleResult
    minus: OracleResult
    plus_measurement: FairnessMeasurement | None
    minus_measurement: FairnessMeasurement | None
    side: str

    @property
    def chosen(self) -> OracleResult:
        return self.plus if self.side == "+" else self.minus

    @property
    def measurement(self) -> FairnessMeasurement | None:
        return self.plus_measurement if self.side == "+" else self.minus_measurement

    @property
    def gamma_hat(self) -> float:
        m = self.measurement
        return 0.0 if m is None else m.gamma


@dataclass(frozen=True)
class AuditReport:
    config: AuditConfig
    trace: tuple[StepRecord, ...]
    best_index: int
    gamma_hat: EstimateWithCI
    verdict: Verdict
    n_learn: int
    n_est: int

    @property
    def best(self) -> StepRecord:
        return self.trace[self.best_index]

    @property
    def certificate(self) -> Halfspace:
        """Always available in memory; only constructive reports publish it."""
        return self.best.chosen.halfspace

    @property
    def published_certificate(self) -> Halfspace | None:
        if self.config.mode is Mode.CONSTRUCTIVE and self.verdict is Verdict.UNFAIR:
            return self.certificate
        return None


def mu_seed(seed: int, mu: float, side: int) -> int:
    """Oracle seed keyed on the grid value, so refining the grid re-runs old points identically."""
    bits = struct.unpack("<Q", struct.pack("<d", float(mu)))[0]
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, bits, side])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def split_dataset(data: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    perm = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5911])).permutation(data.n)
    n_learn = int(round(fraction * data.n))
    n_learn = min(max(n_learn, 2), data.n - 2)
    return data.subset(np.sort(perm[:n_learn])), data.subset(np.sort(perm[n_learn:]))


def _measure(data_est: Dataset, h: Halfspace, confidence: float) -> FairnessMeasurement | None:
    try:
        return weighted_unfairness(data_est, None, h, confidence)
    except EmptyGroupError:
        return None


def _abs_dev(m: FairnessMeasurement | None) -> float:
    return -1.0 if m is None else abs(m.deviation)


def audit_step(data_learn: Dataset, data_est: Dataset, mu: float, cfg: AuditConfig) -> StepRecord:
    mc = MassConstraint(mu, tolerance=1.0 / data_learn.n)
    results = []
    for side, labels in ((0, data_learn.labels), (1, -data_learn.labels)):
        req = OracleRequest(
            data_learn.with_labels(labels), mc, cfg.epsilon, cfg.oracle_delta,
            mu_seed(cfg.seed, mu, side), cfg.oracle_options,
        )
        results.append(learn_fixed_mass_halfspace(req, cfg.oracle))
    plus, minus = results
    conf = cfg.candidate_confidence
    m_plus = _measure(data_est, plus.halfspace, conf)
    m_minus = _measure(data_est, minus.halfspace, conf)
    side = "-" if _abs_dev(m_plus) < _abs_dev(m_minus) else "+"
    return StepRecord(mu, plus, minus, m_plus, m_minus, side)


def verdict(gamma_hat: EstimateWithCI, gamma_threshold: float) -> Verdict:
    """Unfair only when the lower confidence limit clears the threshold."""
    return Verdict.UNFAIR if gamma_hat.point - gamma_hat.half_width >= gamma_threshold else Verdict.FAIR


def audit(data: Dataset, cfg: AuditConfig) -> AuditReport:
    if data.n < 4:
        raise AuditInputError("auditing needs at least 4 samples")
    learn, est = split_dataset(data, cfg.split_fraction, cfg.seed)
    trace = []
    for mu in cfg.grid():
        rec = audit_step(learn, est, mu, cfg)
        log.debug("mu=%.4f side=%s gamma_hat=%.5f", mu, rec.side, rec.gamma_hat)
        trace.append(rec)
    # Strict '>' keeps the smaller mu on ties.
    best = 0
    for i, rec in enumerate(trace):
        if rec.gamma_hat > trace[best].gamma_hat:
            best = i
    m = trace[best].measurement
    if m is None:
        gamma = EstimateWithCI(0.0, 1.0, 1.0 - cfg.delta / 2.0, est.n)
    else:
        gamma = EstimateWithCI(m.gamma, m.gamma_half_width, 1.0 - cfg.delta / 2.0, est.n)
    return AuditReport(cfg, tuple(trace), best, gamma, verdict(gamma, cfg.gamma_threshold),
                       learn.n, est.n)


def evaluate_certificate(data: Dataset, c_labels, h: Halfspace, confidence: float = 0.95) -> FairnessMeasurement:
    """Fresh-sample measurement of a (possibly third-party) certificate."""
    return weighted_unfairness(data, c_labels, h, confidence)
