import json
import math

import numpy as np
import pytest
import scipy.linalg

from fwdreg.core_linalg import Dataset, gram
from fwdreg.errors import MissingGroundTruth
from fwdreg.simulate import (
    SimConfig,
    oracle_threshold,
    simulate_dataset,
)


class TestSimConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SimConfig(n=1, p=5, s0=2)
        with pytest.raises(ValueError):
            SimConfig(n=10, p=5, s0=6)
        with pytest.raises(ValueError):
            SimConfig(n=10, p=5, s0=2, design="spiral")
        with pytest.raises(ValueError):
            SimConfig(n=10, p=5, s0=2, design="toeplitz", rho=1.0)

    def test_json_round_trip(self):
        cfg = SimConfig(n=50, p=10, s0=3, design="toeplitz", rho=0.4, seed=9)
        assert SimConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


class TestSimulateDataset:
    def test_noiseless(self):
        ds = simulate_dataset(SimConfig(n=40, p=8, s0=2, noise_sd=0.0, seed=1))
        assert np.all(ds.epsilon == 0)
        np.testing.assert_allclose(ds.y, ds.x @ ds.theta0, atol=1e-14)

    def test_reconstruction_exact(self):
        ds = simulate_dataset(SimConfig(n=60, p=12, s0=3, noise_sd=0.7, seed=2))
        gap = ds.y - ds.x @ ds.theta0 - ds.epsilon
        assert np.max(np.abs(gap)) < 1e-12 * np.max(np.abs(ds.y))

    def test_deterministic_under_seed(self):
        cfg = SimConfig(n=30, p=6, s0=2, design="equicorrelated", rho=0.3, seed=5)
        a, b = simulate_dataset(cfg), simulate_dataset(cfg)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
        assert np.array_equal(a.theta0, b.theta0)

    def test_standardization_postcondition(self):
        for design, rho in (("independent", 0.0), ("equicorrelated", 0.5),
                            ("toeplitz", 0.6)):
            ds = simulate_dataset(
                SimConfig(n=50, p=10, s0=2, design=design, rho=rho, seed=3)
            )
            assert np.max(np.abs(ds.x.mean(axis=0))) < 1e-12
            assert np.max(np.abs((ds.x**2).mean(axis=0) - 1.0)) < 1e-12

    def test_support_size_and_pattern(self):
        cfg = SimConfig(n=40, p=20, s0=4, theta_pattern="signed_alternating",
                        c=2.0, seed=11)
        ds = simulate_dataset(cfg)
        assert np.count_nonzero(ds.theta0) == 4

    def test_independent_gram_concentration(self):
        n = 10_000
        ds = simulate_dataset(
            SimConfig(n=n, p=20, s0=1, design="equicorrelated", rho=0.0, seed=4)
        )
        g = gram(ds)
        off = g - np.diag(np.diag(g))
        assert np.max(np.abs(off)) < 6.0 / math.sqrt(n)

    def test_toeplitz_gram_converges(self):
        rho, p = 0.5, 10
        pop = scipy.linalg.toeplitz(rho ** np.arange(p))

        def median_dist(n):
            ds_list = [
                simulate_dataset(
                    SimConfig(n=n, p=p, s0=1, design="toeplitz", rho=rho, seed=s)
                )
                for s in range(11)
            ]
            return float(np.median(
                [np.linalg.norm(gram(d) - pop) for d in ds_list]
            ))

        ratio = median_dist(1000) / median_dist(4000)
        assert 2.0 / 1.5 <= ratio <= 2.0 * 1.5


class TestOracleThreshold:
    def test_noiseless_floors(self):
        ds = simulate_dataset(SimConfig(n=30, p=5, s0=1, noise_sd=0.0, seed=6))
        choice = oracle_threshold(ds, phi=1.0)
        assert choice.t == 1e-12
        assert choice.floored

    def test_formula_plug_in(self):
        # hand instance with E_n[x eps] = 0.1 exactly
        x = np.array([[1.0], [-1.0]])
        eps = np.array([0.1, -0.1])
        ds = Dataset(x=x, y=eps.copy(), theta0=np.zeros(1), epsilon=eps)
        choice = oracle_threshold(ds, phi=1.0, safety=1.0)
        assert choice.t == pytest.approx(0.04, abs=1e-15)
        assert not choice.floored

    def test_requires_ground_truth(self):
        ds = Dataset(x=np.array([[1.0], [-1.0]]), y=np.zeros(2))
        with pytest.raises(MissingGroundTruth):
            oracle_threshold(ds, phi=1.0)

    def test_log_p_over_n_scale(self):
        """Median chosen threshold tracks 2 log(2p)/n within a factor 4."""
        n, p, phi, safety = 400, 200, 1.0, 1.0
        ts = []
        for seed in range(100):
            ds = simulate_dataset(
                SimConfig(n=n, p=p, s0=1, noise_sd=1.0, seed=seed)
            )
            ts.append(oracle_threshold(ds, phi=phi, safety=safety).t)
        ref = safety**2 * 2.0 * math.log(2 * p) / n / phi**2
        ratio = float(np.median(ts)) / ref
        assert 0.25 <= ratio <= 4.0
