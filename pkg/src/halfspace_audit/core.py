"""Domain types and halfspace geometry.

A halfspace is stored as a unit normal ``w`` and a threshold ``t``; it labels
``x`` as +1 iff ``w . x >= t`` (so the tie ``w . x == t`` is positive).  The
same object serves as a subgroup indicator and as a classifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

UNIT_TOL = 1e-12


class AuditInputError(ValueError):
    """Invalid argument to one of the package operations."""


class EmptyGroupError(AuditInputError):
    """A subgroup has zero empirical mass, so its conditional rate is undefined."""

    def __init__(self, msg: str = "group has zero empirical mass"):
        super().__init__(msg)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """An i.i.d. sample: features ``(N, d)`` and labels in {-1, +1}.

    ``meta`` records provenance (generator name, seed, parameters).  Arrays
    are copied and made read-only on construction.
    """

    features: np.ndarray
    labels: np.ndarray
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise AuditInputError("features must be a non-empty (N, d) array with d >= 1")
        if not np.all(np.isfinite(X)):
            raise AuditInputError("features contain NaN or Inf")
        y = as_labels(self.labels)
        if y.shape[0] != X.shape[0]:
            raise AuditInputError(
                f"features/labels length mismatch: {X.shape[0]} != {y.shape[0]}"
            )
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "labels", _frozen(y))
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def with_labels(self, labels, **meta) -> "Dataset":
        return Dataset(self.features, labels, {**self.meta, **meta})

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.features[idx], self.labels[idx], self.meta)


def as_labels(labels) -> np.ndarray:
    """Validate a label vector and return it as int8 in {-1, +1}."""
    y = np.asarray(labels)
    if y.ndim != 1:
        raise AuditInputError("labels must be one-dimensional")
    if not np.all((y == 1) | (y == -1)):
        raise AuditInputError("labels must be -1 or +1")
    return y.astype(np.int8)


def project(X: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Projections ``X @ W`` accumulated coordinate by coordinate.

    The fixed left-to-right order makes every projection bit-identical no
    matter whether one direction or a batch of directions is evaluated, so
    thresholds picked from one call reproduce exact counts in another.
    ``W`` may be ``(d,)`` or ``(d, C)``; the result is ``(N,)`` or ``(C, N)``.
    """
    X = np.asarray(X, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if W.shape[0] != X.shape[1]:
        raise AuditInputError(
            f"dimension mismatch: features have d={X.shape[1]}, normal has d={W.shape[0]}"
        )
    if W.ndim == 1:
        out = X[:, 0] * W[0]
        for j in range(1, W.shape[0]):
            out = out + X[:, j] * W[j]
        return out
    out = W[0][:, None] * X[None, :, 0]
    for j in range(1, W.shape[0]):
        out = out + W[j][:, None] * X[None, :, j]
    return out


def normalize(w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64).ravel()
    norm = float(np.linalg.norm(w))
    if not np.isfinite(norm) or norm == 0.0:
        raise AuditInputError("normal vector must be finite and non-zero")
    return w / norm


def _require_unit(w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64).ravel()
    if abs(float(np.linalg.norm(w)) - 1.0) > UNIT_TOL:
        raise AuditInputError("normal vector must have unit Euclidean norm")
    return w


@dataclass(frozen=True, eq=False)
class Halfspace:
    """``x -> +1 if normal . x >= threshold else -1``.

    A normal that is not already unit length (within 1e-12) is renormalized
    on construction; a unit one is stored bit-for-bit, so thresholds computed
    from its projections stay exact.
    """

    normal: np.ndarray
    threshold: float

    def __post_init__(self):
        w = np.array(self.normal, dtype=np.float64).ravel()
        if not abs(float(np.linalg.norm(w)) - 1.0) <= UNIT_TOL:
            w = normalize(w)
        object.__setattr__(self, "normal", _frozen(w))
        t = float(self.threshold)
        if math.isnan(t):
            raise AuditInputError("threshold is NaN")
        object.__setattr__(self, "threshold", t)

    @property
    def d(self) -> int:
        return self.normal.shape[0]

    def projections(self, X) -> np.ndarray:
        return project(X, self.normal)

    def contains(self, X) -> np.ndarray:
        """Boolean membership ``normal . x >= threshold`` for each row of X."""
        return self.projections(X) >= self.threshold

    def predict(self, X) -> np.ndarray:
        return np.where(self.contains(X), 1, -1).astype(np.int8)

    def negate(self) -> "Halfspace":
        return Halfspace(-self.normal, -self.threshold)

    def __eq__(self, other):
        if not isinstance(other, Halfspace):
            return NotImplemented
        return self.threshold == other.threshold and np.array_equal(self.normal, other.normal)

    def __hash__(self):
        return hash((self.normal.tobytes(), self.threshold))

    def __repr__(self):
        return f"Halfspace(normal={self.normal.tolist()}, threshold={self.threshold!r})"


@dataclass(frozen=True)
class MassConstraint:
    """Target positive rate ``mu`` of a halfspace, enforced empirically up to ``tolerance``."""

    mu: float
    tolerance: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise AuditInputError(f"mu must lie in (0, 1), got {self.mu}")
        if not self.tolerance >= 0.0:
            raise AuditInputError("tolerance must be non-negative")


def evaluate_halfspace(h: Halfspace, x) -> int:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != h.d:
        raise AuditInputError(f"dimension mismatch: x has d={x.shape[0]}, halfspace has d={h.d}")
    return int(h.predict(x[None, :])[0])


# Acklam's rational approximation to the inverse normal CDF.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    if p > 1.0 - _P_LOW:
        return -_acklam(1.0 - p)
    q = p - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
        ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    )


def gaussian_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def gaussian_quantile(p: float) -> float:
    """Inverse standard normal CDF, accurate to ~1e-9 absolute on [1e-12, 1 - 1e-12]."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise AuditInputError(f"p must lie in (0, 1), got {p}")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        # Work in the lower tail: 1 - p is exact here and keeps precision.
        return -gaussian_quantile(1.0 - p)
    z = _acklam(p)
    # One Newton step on Phi, in the lower tail where Phi(z) is computed accurately.
    pdf = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return z - (gaussian_cdf(z) - p) / pdf


def fixed_mass_halfspace_gaussian(w, mu: float) -> Halfspace:
    """Halfspace with normal ``w`` and mass exactly ``mu`` under N(0, I)."""
    w = _require_unit(w)
    MassConstraint(mu)
    return Halfspace(w, gaussian_quantile(1.0 - mu))


def positive_count(mu: float, n: int) -> int:
    """``ceil(mu * n)``, computed exactly on the binary value of ``mu``."""
    return min(n, max(1, math.ceil(Fraction(mu) * n)))


def threshold_for_count(proj: np.ndarray, k: int) -> float:
    """The k-th largest projection, so that ``proj >= t`` holds for >= k samples."""
    n = proj.shape[0]
    return float(np.partition(proj, n - k)[n - k])


def fixed_mass_halfspace_empirical(w, mu: float, data: Dataset | np.ndarray) -> Halfspace:
    """Halfspace with normal ``w`` containing exactly ``ceil(mu*N)`` samples.

    Ties at the threshold are all included, so with duplicate projections the
    count can exceed ``ceil(mu*N)``; see :func:`empirical_mass`.
    """
    w = _require_unit(w)
    MassConstraint(mu)
    X = data.features if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    proj = project(X, w)
    return Halfspace(w, threshold_for_count(proj, positive_count(mu, proj.shape[0])))


def empirical_mass(h: Halfspace, data: Dataset | np.ndarray) -> float:
    X = data.features if isinstance(data, Dataset) else data
    return float(np.mean(h.contains(X)))


def mass_deviation(h: Halfspace, mc: MassConstraint, data: Dataset | np.ndarray) -> float:
    return abs(empirical_mass(h, data) - mc.mu)
