import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfspace_audit.core import AuditInputError, Dataset, Halfspace, MassConstraint, positive_count
from halfspace_audit.generators import planted_dataset, sample_gaussian
from halfspace_audit.metrics import agreement_rate, deviation
from halfspace_audit.oracle import (
    OracleRequest,
    brute_force_candidates,
    brute_force_oracle,
    chow_oracle,
    direction_grid,
    learn_fixed_mass_halfspace,
    local_search_oracle,
)


def angle_deg(u, v):
    c = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.degrees(math.acos(np.clip(c, -1.0, 1.0)))


def null_dataset(d, n, seed):
    rng = np.random.default_rng(seed)
    return Dataset(rng.standard_normal((n, d)), rng.choice([-1, 1], n))


class TestDispatch:
    def test_unknown_selector(self):
        ds = null_dataset(2, 10, 0)
        with pytest.raises(AuditInputError, match="unknown oracle"):
            learn_fixed_mass_halfspace(OracleRequest(ds, MassConstraint(0.5)), "ptas")

    def test_too_few_samples(self):
        with pytest.raises(AuditInputError):
            OracleRequest(Dataset([[0.0]], [1]), MassConstraint(0.5))

    def test_constant_labels_force_disagreement(self):
        rng = np.random.default_rng(1)
        ds = Dataset(rng.standard_normal((1000, 3)), np.ones(1000))
        for which in ("chow", "brute", "local"):
            res = learn_fixed_mass_halfspace(
                OracleRequest(ds, MassConstraint(0.3), options={"iterations": 5, "restarts": 2}), which)
            assert res.train_disagreement == pytest.approx(0.7)


class TestBruteForce:
    def test_planted_2d_grid_resolution(self):
        ds, spec = planted_dataset(2, 20000, 0)
        res = brute_force_oracle(OracleRequest(ds, MassConstraint(0.5)))
        # half the angular gap, through the theta/pi disagreement law, plus sampling noise
        assert res.train_disagreement <= (math.pi / 720) / math.pi + 0.005

    def test_planted_17_degrees(self):
        v = [math.cos(math.radians(17)), math.sin(math.radians(17))]
        ds, _ = planted_dataset(2, 50000, 4, v=v)
        res = brute_force_oracle(OracleRequest(ds, MassConstraint(0.5)))
        assert angle_deg(res.halfspace.normal, v) <= 0.5

    def test_1d(self):
        X = np.random.default_rng(2).standard_normal((1001, 1))
        ds = Dataset(X, np.where(X[:, 0] >= 0, 1, -1))
        res = brute_force_oracle(OracleRequest(ds, MassConstraint(0.5)))
        assert res.halfspace.normal.tolist() == [1.0]
        assert res.halfspace.threshold == np.median(X)
        # only the gap between the sample's positive rate and the target mass remains
        gap = abs(int((X >= 0).sum()) - 501) / 1001
        assert res.train_disagreement == pytest.approx(gap, abs=1e-12)
        assert res.train_disagreement <= 0.05

    def test_rejects_d4(self):
        ds = null_dataset(4, 50, 3)
        with pytest.raises(AuditInputError, match="chow"):
            brute_force_oracle(OracleRequest(ds, MassConstraint(0.5)))

    def test_null_labels(self):
        ds = null_dataset(2, 100000, 5)
        res = brute_force_oracle(OracleRequest(ds, MassConstraint(0.5)))
        assert 0.48 < res.train_disagreement < 0.5

    def test_grids_are_unit(self):
        for d in (1, 2, 3):
            W = direction_grid(d)
            np.testing.assert_allclose(np.linalg.norm(W, axis=1), 1.0, atol=1e-12)


class TestChow:
    def test_recovers_planted_direction(self):
        ds, spec = planted_dataset(10, 100000, 8)
        res = chow_oracle(OracleRequest(ds, MassConstraint(0.5)))
        assert angle_deg(res.halfspace.normal, spec.v) <= 2.0
        assert not res.degenerate

    def test_null_mean_norm_is_clt_sized(self):
        # mean of y x has norm ~ sqrt(d / N) = 0.0014, far above the 1e-10 fallback threshold
        ds = null_dataset(2, 10**6, 9)
        m = np.mean(ds.features * ds.labels[:, None], axis=0)
        assert 1e-10 < np.linalg.norm(m) < 0.01
        assert not chow_oracle(OracleRequest(ds, MassConstraint(0.5))).degenerate

    def test_degenerate_fallback(self):
        X = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        ds = Dataset(X, np.ones(4))
        res = chow_oracle(OracleRequest(ds, MassConstraint(0.5), seed=3))
        assert res.degenerate
        assert res == chow_oracle(OracleRequest(ds, MassConstraint(0.5), seed=3))


class TestLocalSearch:
    def test_planted_10d(self):
        ds, _ = planted_dataset(10, 50000, 12)
        res = local_search_oracle(OracleRequest(ds, MassConstraint(0.5), seed=1))
        assert res.train_disagreement <= 0.02

    def test_rejects_zero_iterations(self):
        ds = null_dataset(2, 20, 0)
        with pytest.raises(AuditInputError):
            local_search_oracle(OracleRequest(ds, MassConstraint(0.5), options={"iterations": 0}))

    def test_improves_on_chow_for_offcenter_mass(self):
        ds, _ = planted_dataset(5, 20000, 13, mu_plant=0.2)
        req = OracleRequest(ds, MassConstraint(0.2), seed=2)
        assert local_search_oracle(req).train_disagreement <= chow_oracle(req).train_disagreement


class TestInvariants:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(0.05, 0.95), st.sampled_from(["chow", "brute", "local"]))
    def test_exact_mass_and_determinism(self, seed, mu, which):
        ds = null_dataset(2, 500, seed)
        req = OracleRequest(ds, MassConstraint(mu), seed=seed,
                            options={"restarts": 2, "iterations": 20, "directions": 90})
        res = learn_fixed_mass_halfspace(req, which)
        assert int(res.halfspace.contains(ds.features).sum()) == positive_count(mu, ds.n)
        assert res.mass_ok
        again = learn_fixed_mass_halfspace(req, which)
        assert again.halfspace == res.halfspace
        assert again.train_disagreement == res.train_disagreement

    def test_brute_force_dominates(self):
        # The grid optimum loses at most half the angular gap over pi to the continuum.
        slack = (math.pi / 720) / math.pi
        for seed in range(5):
            ds, _ = planted_dataset(2, 5000, 100 + seed, noise=0.1)
            req = OracleRequest(ds, MassConstraint(0.5), seed=seed)
            brute = brute_force_oracle(req).train_disagreement
            assert brute <= chow_oracle(req).train_disagreement + slack
            assert brute <= local_search_oracle(req).train_disagreement + slack

    def test_local_search_reproducible_bits(self):
        ds, _ = planted_dataset(4, 3000, 7)
        req = OracleRequest(ds, MassConstraint(0.4), seed=99)
        a, b = local_search_oracle(req), local_search_oracle(req)
        assert a.halfspace.normal.tobytes() == b.halfspace.normal.tobytes()
        assert a.work_units == b.work_units


class TestDuality:
    @pytest.mark.parametrize("seed", range(5))
    def test_argmin_agreement_is_argmax_deviation(self, seed):
        ds, _ = planted_dataset(2, 4000, seed, noise=0.2)
        cands = brute_force_candidates(ds, 0.5, 180)
        devs = np.array([deviation(ds, None, cands.halfspace(i)) for i in range(len(cands.thresholds))])
        agree = np.array([agreement_rate(ds, None, cands.halfspace(i)).point
                          for i in range(len(cands.thresholds))])
        np.testing.assert_array_equal(agree, cands.agreement)
        assert np.argmin(agree) == np.argmax(devs)
        assert np.argmax(agree) == np.argmin(devs)
