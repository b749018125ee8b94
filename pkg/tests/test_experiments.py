import json

import numpy as np
import pytest

from cvxpmf.estimator import empirical_pmf
from cvxpmf.experiments import (
    ExperimentConfig,
    catalog,
    convergence_experiment,
    draw_sample,
    empirical_cdf_on_grid,
    five_numbers,
    knot_capture_experiment,
    sup_cdf_distance,
)
from cvxpmf.pmf import knots
from cvxpmf.seeding import derive_rng


def test_catalog(pmfs):
    assert catalog("p0").mass[0] == pytest.approx(11 / 66, abs=1e-15)
    assert knots(catalog("p1")).interior == (2, 5, 9)
    assert catalog("p5").mass[0] == pytest.approx((1 - 2.0**-11) ** -1 * 0.5, abs=1e-15)
    for key in ("p1", "p2", "p3", "p4"):
        assert catalog(key).S == 10
    with pytest.raises(KeyError):
        catalog("p9")


def test_draw_sample(pmfs):
    p = pmfs["p0"]
    s = draw_sample(p, 10000, derive_rng(1, 2))
    assert s.n == 10000
    assert s.max_value <= p.S
    assert np.abs(empirical_pmf(s).mass - p.mass[: s.max_value + 1]).max() <= 0.02
    again = draw_sample(p, 10000, derive_rng(1, 2))
    assert again.counts.tobytes() == s.counts.tobytes()
    with pytest.raises(ValueError):
        draw_sample(p, 0, derive_rng(1))


def test_config_validation_and_json():
    cfg = ExperimentConfig.from_json(json.dumps({"pmfs": ["p0"], "sample_sizes": [50], "replications": 3}))
    assert cfg.replications == 3
    assert cfg.grid().size == 601
    assert cfg.grid()[0] == -3.0 and cfg.grid()[-1] == pytest.approx(3.0)
    full = cfg.full_scale()
    assert (full.replications, full.limit_draws, full.repetitions) == (1000, 5000, 100)
    with pytest.raises(ValueError):
        ExperimentConfig(replications=0)
    with pytest.raises(ValueError):
        ExperimentConfig(grid_step=0)
    with pytest.raises(ValueError):
        ExperimentConfig.from_json('{"bogus": 1}')


def test_empirical_cdf_and_distance():
    grid = np.linspace(-3, 3, 601)
    x = np.random.default_rng(0).normal(size=(500, 3))
    F = empirical_cdf_on_grid(x, grid)
    assert F.shape == (3, 601)
    assert np.all(np.diff(F, axis=1) >= 0)
    assert sup_cdf_distance(F, empirical_cdf_on_grid(x.copy(), grid)) == 0.0
    G = empirical_cdf_on_grid(x + 10.0, grid)
    assert 0.0 <= sup_cdf_distance(F, G) <= 1.0


def test_five_numbers():
    s = five_numbers([1, 2, 3, 4, 5])
    assert s == {"min": 1.0, "q1": 2.0, "median": 3.0, "q3": 4.0, "max": 5.0}


def test_knot_capture_small_and_reproducible():
    cfg = ExperimentConfig(pmfs=["p1", "p4"], sample_sizes=[50, 800], replications=40, seed=3)
    rows = knot_capture_experiment(cfg)
    assert [(r.pmf, r.n) for r in rows] == [("p1", 50), ("p1", 800), ("p4", 50), ("p4", 800)]
    for r in rows:
        assert 0.0 <= r.frequency_pct <= 100.0
        assert r.certificate_failures == 0
        assert r.counted == 40
    assert rows[2].frequency_pct == 0.0
    again = knot_capture_experiment(cfg)
    assert [r.captured for r in again] == [r.captured for r in rows]


def test_knot_capture_independent_of_workers():
    cfg = ExperimentConfig(pmfs=["p2"], sample_sizes=[800], replications=16, seed=8)
    serial = knot_capture_experiment(cfg)
    cfg.workers = 2
    parallel = knot_capture_experiment(cfg)
    assert serial == parallel


def test_convergence_small():
    cfg = ExperimentConfig(pmfs=["p0"], sample_sizes=[100], replications=20, limit_draws=40,
                           repetitions=3, seed=2)
    (res,) = convergence_experiment(cfg)
    assert len(res.D) == 3
    assert all(0.0 <= d <= 2.0 for d in res.D)
    assert res.summary["min"] <= res.summary["median"] <= res.summary["max"]


@pytest.mark.slow
def test_knot_capture_trend(pmfs):
    cfg = ExperimentConfig(pmfs=["p1", "p2"], sample_sizes=[50, 200, 800, 3200], replications=200, seed=21)
    rows = knot_capture_experiment(cfg)
    for key in ("p1", "p2"):
        freqs = [r.frequency_pct for r in rows if r.pmf == key]
        assert all(b >= a - 3.0 for a, b in zip(freqs, freqs[1:])), freqs
        assert freqs[-1] > freqs[0]


@pytest.mark.slow
def test_support_bound_large_n():
    cfg = ExperimentConfig(pmfs=["p1"], sample_sizes=[51200], replications=300, seed=5)
    (row,) = knot_capture_experiment(cfg)
    assert row.support_ok_pct >= 99.0
