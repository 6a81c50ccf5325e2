"""Agnostic learners for fixed-mass halfspaces.

Each oracle takes labeled samples and a target mass ``mu`` and returns a
halfspace containing exactly ``ceil(mu*N)`` samples (distinct projections)
that approximately minimizes disagreement with the labels.  Three
interchangeable implementations are provided:

``chow``
    Direction of the label-weighted mean of the features.  Recovers a
    homogeneous halfspace's normal under centered Gaussian marginals.
``brute``
    Exhaustive search over a fixed direction grid, d <= 3 only.
``local``
    Randomized hill climbing from several starts, one of them the Chow
    direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from .core import (
    AuditInputError,
    Dataset,
    Halfspace,
    MassConstraint,
    normalize,
    positive_count,
    project,
    threshold_for_count,
)

DEGENERATE_NORM = 1e-10
BRUTE_MAX_DIM = 3
DEFAULT_DIRECTIONS = {1: 2, 2: 720, 3: 2000}
_CHUNK = 128


@dataclass(frozen=True)
class OracleRequest:
    data: Dataset
    mu: MassConstraint
    epsilon: float = 0.05
    delta: float = 0.05
    seed: int = 0
    options: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise AuditInputError("epsilon must lie in (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise AuditInputError("delta must lie in (0, 1)")
        if self.data.n < 2:
            raise AuditInputError("an oracle needs at least 2 samples")
        if isinstance(self.mu, (int, float)):
            object.__setattr__(self, "mu", MassConstraint(float(self.mu)))


@dataclass(frozen=True)
class OracleResult:
    halfspace: Halfspace
    train_disagreement: float
    oracle_name: str
    work_units: int
    empirical_mass: float
    mass_ok: bool
    degenerate: bool = False


def _disagreement_counts(proj: np.ndarray, y: np.ndarray, k: int):
    """Thresholds and mistake counts for a batch of projections (C, N)."""
    n = proj.shape[1]
    thresholds = np.partition(proj, n - k, axis=1)[:, n - k]
    inside = proj >= thresholds[:, None]
    mistakes = np.count_nonzero(inside != (y == 1)[None, :], axis=1)
    return thresholds, mistakes


def _finish(req: OracleRequest, w: np.ndarray, name: str, work: int, degenerate=False):
    X, y = req.data.features, req.data.labels
    proj = project(X, w)
    k = positive_count(req.mu.mu, req.data.n)
    h = Halfspace(w, threshold_for_count(proj, k))
    inside = proj >= h.threshold
    mass = float(np.mean(inside))
    return OracleResult(
        halfspace=h,
        train_disagreement=float(np.mean(inside != (y == 1))),
        oracle_name=name,
        work_units=work,
        empirical_mass=mass,
        mass_ok=abs(mass - req.mu.mu) <= req.mu.tolerance + 1.0 / req.data.n,
        degenerate=degenerate,
    )


def random_unit(rng: np.random.Generator, d: int) -> np.ndarray:
    while True:
        v = rng.standard_normal(d)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm


def chow_direction(data: Dataset):
    """Normalized label-weighted mean ``(1/N) sum y_i x_i`` and its raw norm."""
    m = np.mean(data.features * data.labels[:, None].astype(np.float64), axis=0)
    return m, float(np.linalg.norm(m))


def chow_oracle(req: OracleRequest) -> OracleResult:
    m, norm = chow_direction(req.data)
    if norm < DEGENERATE_NORM:
        w = random_unit(np.random.default_rng(req.seed), req.data.d)
        return _finish(req, w, "chow", 1, degenerate=True)
    return _finish(req, m / norm, "chow", 1)


def direction_grid(d: int, size: int | None = None) -> np.ndarray:
    """Candidate unit normals, shape (G, d).

    d=1: {+1, -1}; d=2: uniform angular grid starting at angle 0;
    d=3: Fibonacci sphere.
    """
    if d > BRUTE_MAX_DIM or d < 1:
        raise AuditInputError(
            f"the brute-force oracle supports d <= {BRUTE_MAX_DIM} (got d={d}); "
            "use the 'chow' or 'local' oracle instead"
        )
    if d == 1:
        return np.array([[1.0], [-1.0]])
    size = DEFAULT_DIRECTIONS[d] if size is None else int(size)
    if size < 1:
        raise AuditInputError("direction grid size must be >= 1")
    if d == 2:
        ang = 2.0 * math.pi * np.arange(size) / size
        return np.column_stack([np.cos(ang), np.sin(ang)])
    i = np.arange(size) + 0.5
    z = 1.0 - 2.0 * i / size
    r = np.sqrt(1.0 - z * z)
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    W = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return W / np.linalg.norm(W, axis=1, keepdims=True)


@dataclass(frozen=True)
class CandidateSet:
    """Every fixed-mass halfspace the brute-force oracle considered."""

    directions: np.ndarray
    thresholds: np.ndarray
    mistakes: np.ndarray
    n: int

    def halfspace(self, i: int) -> Halfspace:
        return Halfspace(self.directions[i], self.thresholds[i])

    @property
    def agreement(self) -> np.ndarray:
        return (self.n - self.mistakes) / self.n


def brute_force_candidates(data: Dataset, mu: float, directions: int | None = None) -> CandidateSet:
    W = direction_grid(data.d, directions)
    k = positive_count(mu, data.n)
    ths, errs = [], []
    for start in range(0, W.shape[0], _CHUNK):
        block = W[start:start + _CHUNK]
        t, e = _disagreement_counts(project(data.features, block.T), data.labels, k)
        ths.append(t)
        errs.append(e)
    return CandidateSet(W, np.concatenate(ths), np.concatenate(errs), data.n)


def brute_force_oracle(req: OracleRequest) -> OracleResult:
    cands = brute_force_candidates(req.data, req.mu.mu, req.options.get("directions"))
    best = int(np.argmin(cands.mistakes))  # first index wins ties
    return _finish(req, cands.directions[best], "brute", cands.directions.shape[0])


def local_search_oracle(req: OracleRequest) -> OracleResult:
    restarts = int(req.options.get("restarts", 10))
    iterations = int(req.options.get("iterations", 200))
    if restarts < 1 or iterations < 1:
        raise AuditInputError("local search needs restarts >= 1 and iterations >= 1")
    step0 = float(req.options.get("step", 0.5))
    step_floor = float(req.options.get("step_floor", 1e-4))

    X, y = req.data.features, req.data.labels
    d = req.data.d
    k = positive_count(req.mu.mu, req.data.n)
    rng = np.random.default_rng(req.seed)

    def mistakes(w):
        _, e = _disagreement_counts(project(X, w)[None, :], y, k)
        return int(e[0])

    chow, norm = chow_direction(req.data)
    best_w, best_err, work = None, None, 0
    for r in range(restarts):
        w = random_unit(rng, d)
        if r == 0 and norm >= DEGENERATE_NORM:
            w = chow / norm
        err = mistakes(w)
        work += 1
        step = step0
        for _ in range(iterations):
            cand = normalize(w + step * random_unit(rng, d))
            cand_err = mistakes(cand)
            work += 1
            if cand_err < err:
                w, err = cand, cand_err
            else:
                step = max(step / 2.0, step_floor)
        if best_err is None or err < best_err:
            best_w, best_err = w, err
    return _finish(req, best_w, "local", work)


ORACLES: dict[str, Callable[[OracleRequest], OracleResult]] = {
    "chow": chow_oracle,
    "brute": brute_force_oracle,
    "local": local_search_oracle,
}


def learn_fixed_mass_halfspace(req: OracleRequest, which: str = "chow") -> OracleResult:
    try:
        oracle = ORACLES[which]
    except KeyError:
        raise AuditInputError(
            f"unknown oracle {which!r}; choose one of {sorted(ORACLES)}"
        ) from None
    return oracle(req)
