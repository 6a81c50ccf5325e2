"""Empirical fairness quantities with Hoeffding confidence intervals.

Everything here is computed from integer counts on the empirical measure,
so the agreement identity linking mass-weighted deviation to agreement holds
exactly on any sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import AuditInputError, Dataset, EmptyGroupError, Halfspace, as_labels

DEFAULT_CONFIDENCE = 0.95


def hoeffding_half_width(n_samples: int, confidence: float) -> float:
    """Two-sided Hoeffding half-width for a mean of ``n_samples`` indicators."""
    if n_samples < 1:
        raise AuditInputError("n_samples must be >= 1")
    if not 0.0 < confidence < 1.0:
        raise AuditInputError("confidence must lie in (0, 1)")
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n_samples))


def hoeffding_sample_size(epsilon: float, delta: float) -> int:
    """Smallest N with N >= ln(2/delta) / (2 epsilon^2)."""
    if not 0.0 < epsilon < 1.0 or not 0.0 < delta < 1.0:
        raise AuditInputError("epsilon and delta must lie in (0, 1)")
    return math.ceil(math.log(2.0 / delta) / (2.0 * epsilon * epsilon))


@dataclass(frozen=True)
class EstimateWithCI:
    point: float
    half_width: float
    confidence: float
    n_samples: int

    @property
    def lower(self) -> float:
        return self.point - self.half_width

    @property
    def upper(self) -> float:
        return self.point + self.half_width

    @classmethod
    def from_count(cls, count: int, n: int, confidence: float) -> "EstimateWithCI":
        return cls(count / n, hoeffding_half_width(n, confidence), confidence, n)


@dataclass(frozen=True)
class FairnessMeasurement:
    """Mass, positive rates, deviation and mass-weighted unfairness of one subgroup.

    ``mass``, ``pos_rate_global`` and ``pos_rate_group`` are each reported at
    the per-event confidence obtained by splitting ``1 - confidence`` three
    ways, so ``gamma_half_width`` bounds ``|gamma - gamma_true|`` at
    ``confidence`` (gamma = Pr{c}Pr{g} - Pr{c and g}, each term moving by at
    most one Hoeffding width).
    """

    mass: EstimateWithCI
    pos_rate_global: EstimateWithCI
    pos_rate_group: EstimateWithCI
    deviation: float
    gamma: float
    gamma_half_width: float
    confidence: float

    @property
    def gamma_estimate(self) -> EstimateWithCI:
        return EstimateWithCI(self.gamma, self.gamma_half_width, self.confidence, self.mass.n_samples)


def _labels_for(data: Dataset, c_labels) -> np.ndarray:
    y = data.labels if c_labels is None else as_labels(c_labels)
    if y.shape[0] != data.n:
        raise AuditInputError("classifier labels do not match the dataset size")
    return y


def estimate_rate(
    data: Dataset,
    predicate: Callable[[np.ndarray, np.ndarray], np.ndarray],
    confidence: float = DEFAULT_CONFIDENCE,
) -> EstimateWithCI:
    """Empirical frequency of ``predicate(features, labels)`` (vectorized, boolean)."""
    hits = np.asarray(predicate(data.features, data.labels), dtype=bool)
    if hits.shape != (data.n,):
        raise AuditInputError("predicate must return one boolean per sample")
    return EstimateWithCI.from_count(int(hits.sum()), data.n, confidence)


def _counts(data: Dataset, c_labels, g: Halfspace):
    y = _labels_for(data, c_labels)
    in_g = g.contains(data.features)
    pos = y == 1
    n_g = int(in_g.sum())
    return data.n, int(pos.sum()), n_g, int((pos & in_g).sum()), int((~pos & ~in_g).sum())


def deviation(data: Dataset, c_labels, g: Halfspace) -> float:
    """Pr{c=1} - Pr{c=1 | x in g} on the empirical measure."""
    n, n_c, n_g, n_cg, _ = _counts(data, c_labels, g)
    if n_g == 0:
        raise EmptyGroupError()
    return n_c / n - n_cg / n_g


def deviation_negation_form(data: Dataset, c_labels, g: Halfspace) -> float:
    """The same deviation written via complements: (Pr{~c}Pr{~g} - Pr{~c and ~g}) / Pr{g}."""
    n, n_c, n_g, _, n_ncng = _counts(data, c_labels, g)
    if n_g == 0:
        raise EmptyGroupError()
    return ((n - n_c) / n * ((n - n_g) / n) - n_ncng / n) / (n_g / n)


def weighted_unfairness(
    data: Dataset, c_labels, g: Halfspace, confidence: float = DEFAULT_CONFIDENCE
) -> FairnessMeasurement:
    n, n_c, n_g, n_cg, _ = _counts(data, c_labels, g)
    if n_g == 0:
        raise EmptyGroupError()
    conf_each = 1.0 - (1.0 - confidence) / 3.0
    mass = EstimateWithCI.from_count(n_g, n, conf_each)
    dev = n_c / n - n_cg / n_g
    return FairnessMeasurement(
        mass=mass,
        pos_rate_global=EstimateWithCI.from_count(n_c, n, conf_each),
        pos_rate_group=EstimateWithCI.from_count(n_cg, n_g, conf_each),
        deviation=dev,
        gamma=mass.point * abs(dev),
        gamma_half_width=3.0 * mass.half_width,
        confidence=confidence,
    )


def agreement_rate(
    data: Dataset, c_labels, h: Halfspace, confidence: float = DEFAULT_CONFIDENCE
) -> EstimateWithCI:
    y = _labels_for(data, c_labels)
    agree = int(np.sum(h.predict(data.features) == y))
    return EstimateWithCI.from_count(agree, data.n, confidence)


def lemma_identity_residual(data: Dataset, c_labels, g: Halfspace) -> float:
    """|2 Pr{g} d(c,g) - (Pr{~c}Pr{~g} + Pr{c}Pr{g} - Pr{c = g})| on the sample."""
    n, n_c, n_g, n_cg, n_ncng = _counts(data, c_labels, g)
    if n_g == 0:
        raise EmptyGroupError()
    p_c, p_g = n_c / n, n_g / n
    lhs = 2.0 * p_g * (p_c - n_cg / n_g)
    rhs = (1.0 - p_c) * (1.0 - p_g) + p_c * p_g - (n_cg + n_ncng) / n
    return abs(lhs - rhs)
