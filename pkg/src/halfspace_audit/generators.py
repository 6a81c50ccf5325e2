"""Seeded synthetic instances and closed-form reference values."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    AuditInputError, Dataset, Halfspace, gaussian_cdf, gaussian_quantile, normalize, project,
)
from .metrics import DEFAULT_CONFIDENCE, FairnessMeasurement, weighted_unfairness


def _rngs(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def gaussian_moments_ok(X: np.ndarray) -> bool:
    """Per-coordinate mean within 4/sqrt(N) of 0 and variance within 4 sqrt(2/N) of 1."""
    n = X.shape[0]
    if n < 2:
        return True
    mean_ok = np.all(np.abs(X.mean(axis=0)) <= 4.0 / math.sqrt(n))
    var_ok = np.all(np.abs(X.var(axis=0) - 1.0) <= 4.0 * math.sqrt(2.0 / n))
    return bool(mean_ok and var_ok)


def sample_gaussian(d: int, n: int, seed: int) -> np.ndarray:
    if d < 1 or n < 1:
        raise AuditInputError("need d >= 1 and N >= 1")
    X = np.random.default_rng(seed).standard_normal((n, d))
    if not gaussian_moments_ok(X):
        warnings.warn("Gaussian sample failed its moment self-check", RuntimeWarning, stacklevel=2)
    return X


@dataclass(frozen=True, eq=False)
class PlantedSpec:
    d: int
    v: np.ndarray
    t_plant: float = 0.0
    label_noise: float = 0.0

    def __post_init__(self):
        v = normalize(self.v)
        if v.shape[0] != self.d:
            raise AuditInputError("planted normal has the wrong dimension")
        if not 0.0 <= self.label_noise < 0.5:
            raise AuditInputError("label_noise must lie in [0, 0.5)")
        object.__setattr__(self, "v", v)

    @property
    def halfspace(self) -> Halfspace:
        return Halfspace(self.v, self.t_plant)


def plant_classifier(features: np.ndarray, spec: PlantedSpec, seed: int) -> np.ndarray:
    y = spec.halfspace.predict(features)
    if spec.label_noise > 0.0:
        flip = np.random.default_rng(seed).random(y.shape[0]) < spec.label_noise
        y = np.where(flip, -y, y).astype(np.int8)
    return y


def planted_dataset(
    d: int, n: int, seed: int, mu_plant: float = 0.5, noise: float = 0.0, v=None
) -> tuple[Dataset, PlantedSpec]:
    """Gaussian features labeled by a planted halfspace of Gaussian mass ``mu_plant``."""
    feat_rng, dir_rng, noise_rng = np.random.SeedSequence(seed).spawn(3)
    X = sample_gaussian(d, n, feat_rng)
    if v is None:
        v = np.random.default_rng(dir_rng).standard_normal(d)
    t = 0.0 if mu_plant == 0.5 else gaussian_quantile(1.0 - mu_plant)
    spec = PlantedSpec(d, v, t, noise)
    y = plant_classifier(X, spec, noise_rng)
    meta = {"generator": "gaussian-planted", "seed": seed, "d": d, "n": n,
            "mu_plant": mu_plant, "noise": noise}
    return Dataset(X, y, meta), spec


def mod_period(u, T: float):
    """``u - T floor(u / T)``, in [0, T) for negative ``u`` too."""
    u = np.asarray(u, dtype=np.float64)
    r = u - T * np.floor(u / T)
    # Rounding can land exactly on T for tiny negative u.
    return np.where(r >= T, r - T, r)


@dataclass(frozen=True, eq=False)
class ClweSpec:
    d: int
    s: np.ndarray
    T: float
    sigma: float
    n: int
    seed: int

    def __post_init__(self):
        if self.T <= 0:
            raise AuditInputError("period T must be positive")
        if self.sigma < 0:
            raise AuditInputError("sigma must be non-negative")
        s = normalize(self.s)
        if s.shape[0] != self.d:
            raise AuditInputError("secret has the wrong dimension")
        object.__setattr__(self, "s", s)

    @classmethod
    def random(cls, d: int, n: int, T: float, seed: int, sigma: float | None = None) -> "ClweSpec":
        """Secret drawn uniformly on the sphere from ``seed``; sigma defaults to 0.01 T."""
        ss = np.random.SeedSequence([seed, 0x5EC])
        s = np.random.default_rng(ss).standard_normal(d)
        return cls(d, s, T, 0.01 * T if sigma is None else sigma, n, seed)

    @property
    def witnesses(self) -> tuple[Halfspace, Halfspace]:
        """``sgn(s.x - T/6)`` and ``sgn(-s.x + T/3)``; they overlap on s.x in [T/6, T/3]."""
        return Halfspace(self.s, self.T / 6.0), Halfspace(-self.s, -self.T / 3.0)

    def band_probability(self) -> float:
        return gaussian_cdf(self.T / 3.0) - gaussian_cdf(self.T / 6.0)


@dataclass(frozen=True)
class ClweInstance:
    dataset: Dataset
    spec: ClweSpec
    hypothesis: str
    witnesses: tuple[Halfspace, Halfspace] | None


def clwe_instance(spec: ClweSpec, hypothesis: str = "alternative") -> ClweInstance:
    """Gaussian features labeled +1 iff ``mod_T(s.x + z) <= T/2`` (alternative),
    or by fair coins independent of x (null)."""
    if hypothesis not in ("alternative", "null"):
        raise AuditInputError("hypothesis must be 'alternative' or 'null'")
    feat_rng, noise_rng = _rngs(spec.seed, 2)
    X = feat_rng.standard_normal((spec.n, spec.d))
    if hypothesis == "alternative":
        z = noise_rng.normal(0.0, spec.sigma, spec.n) if spec.sigma > 0 else np.zeros(spec.n)
        r = mod_period(project(X, spec.s) + z, spec.T)
        y = np.where(r <= spec.T / 2.0, 1, -1)
        witnesses = spec.witnesses
    else:
        y = np.where(noise_rng.random(spec.n) < 0.5, 1, -1)
        witnesses = None
    meta = {"generator": f"clwe-{'alt' if witnesses else 'null'}", "seed": spec.seed,
            "d": spec.d, "n": spec.n, "T": spec.T, "sigma": spec.sigma}
    return ClweInstance(Dataset(X, y, meta), spec, hypothesis, witnesses)


@dataclass(frozen=True)
class WitnessReport:
    h1: FairnessMeasurement
    h2: FairnessMeasurement

    @property
    def max_gamma(self) -> float:
        return max(self.h1.gamma, self.h2.gamma)


def witness_unfairness(
    spec: ClweSpec, dataset: Dataset, confidence: float = DEFAULT_CONFIDENCE
) -> WitnessReport:
    h1, h2 = spec.witnesses
    return WitnessReport(
        weighted_unfairness(dataset, None, h1, confidence),
        weighted_unfairness(dataset, None, h2, confidence),
    )


# Cell encoding: race black=-1 / white=+1, gender man=-1 / woman=+1.
BLACK, WHITE, MAN, WOMAN = -1.0, 1.0, -1.0, 1.0
TABLE1_HIRED = {(BLACK, MAN): 50, (BLACK, WOMAN): 0, (WHITE, MAN): 0, (WHITE, WOMAN): 50}
TABLE1_CELL_SIZE = 50


def table_example_dataset() -> Dataset:
    """200 applicants, 50 per (race, gender) cell; every black man and white woman hired."""
    rows, labels = [], []
    for (race, gender), hired in TABLE1_HIRED.items():
        rows += [(race, gender)] * TABLE1_CELL_SIZE
        labels += [1] * hired + [-1] * (TABLE1_CELL_SIZE - hired)
    return Dataset(np.array(rows), np.array(labels), {"generator": "table1"})


TABLE1_GROUPS = {
    "women": Halfspace([0.0, 1.0], 0.0),
    "men": Halfspace([0.0, -1.0], 0.0),
    "black": Halfspace([-1.0, 0.0], 0.0),
    "white": Halfspace([1.0, 0.0], 0.0),
    # (-1, +1) projects to sqrt(2) on this normal, every other cell to <= 0.
    "black_women": Halfspace([-1.0, 1.0], 1.0),
}


def closed_form_gamma_homogeneous(theta: float) -> float:
    """Exact unfairness of a homogeneous subgroup at angle ``theta`` to a
    homogeneous classifier under N(0, I)."""
    if not 0.0 <= theta <= math.pi:
        raise AuditInputError("theta must lie in [0, pi]")
    return 0.5 * abs(theta / math.pi - 0.5)
