"""Monte Carlo experiments: knot capture and convergence to the weak limit.

Every replication draws from its own generator, derived from the master
seed and the replication's coordinates, so results do not depend on the
order in which replications run or on the number of worker processes.
"""

from __future__ import annotations

import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .estimator import CertificateFailure, Sample, lse
from .limit import limit_minimizer, simulate_w
from .pmf import MixtureWeights, Pmf, knots, mixture_compose, triangular, truncated_geometric
from .seeding import derive_rng

CAPTURE_STREAM = 10
CONVERGENCE_STREAM = 20
LIMIT_STREAM = 30

# Mixture weights of the catalog pmfs; p3 is rescaled by 12/13 because the printed row sums to 13/12.
TABLE1 = {
    "p1": {2: 1 / 6, 5: 1 / 6, 9: 1 / 2, 11: 1 / 6},
    "p2": {4: 1 / 6, 6: 1 / 6, 8: 1 / 12, 10: 1 / 2, 11: 1 / 12},
    "p3": {3: 2 / 13, 4: 1 / 13, 5: 3 / 13, 7: 1 / 13, 9: 2 / 13, 10: 2 / 13, 11: 2 / 13},
    "p4": {2: 1 / 12, 3: 1 / 6, 4: 1 / 12, 5: 1 / 12, 6: 1 / 12, 7: 1 / 12, 8: 1 / 12,
           9: 1 / 12, 10: 1 / 6, 11: 1 / 12},
}
CATALOG_IDS = ("p0", "p1", "p2", "p3", "p4", "p5")


def catalog(pmf_id: str) -> Pmf:
    if pmf_id == "p0":
        return triangular(11)
    if pmf_id in TABLE1:
        return mixture_compose(MixtureWeights.from_mapping(TABLE1[pmf_id]))
    if pmf_id == "p5":
        return truncated_geometric(0.5, 10)
    raise KeyError(f"unknown catalog pmf {pmf_id!r}; choose from {', '.join(CATALOG_IDS)}")


def resolve_pmf(spec: str) -> Pmf:
    """Catalog id or path to a pmf JSON file."""
    if spec in CATALOG_IDS:
        return catalog(spec)
    from .io import pmf_from_json

    return pmf_from_json(Path(spec).read_text())


def _stream_id(name: str) -> int:
    return zlib.crc32(name.encode())


def draw_sample(p: Pmf, n: int, rng: np.random.Generator) -> Sample:
    """n i.i.d. observations from p by inverse-cdf sampling."""
    if n < 1:
        raise ValueError("n must be >= 1")
    F = np.cumsum(p.mass)
    x = np.searchsorted(F, rng.random(n), side="right")
    np.minimum(x, p.S, out=x)
    return Sample(np.bincount(x, minlength=p.S + 1))


@dataclass
class ExperimentConfig:
    pmfs: list[str] = field(default_factory=lambda: ["p1", "p2", "p3", "p4"])
    sample_sizes: list[int] = field(default_factory=lambda: [50, 200, 800, 3200])
    replications: int = 200  # M
    limit_draws: int = 1000  # M'
    repetitions: int = 20  # independent D values per (pmf, n)
    seed: int = 0
    grid_lo: float = -3.0
    grid_hi: float = 3.0
    grid_step: float = 0.01
    tol: float = 1e-8
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.replications < 1 or self.limit_draws < 1 or self.repetitions < 1:
            raise ValueError("replications, limit_draws and repetitions must be >= 1")
        if self.grid_step <= 0 or self.grid_hi <= self.grid_lo:
            raise ValueError("invalid evaluation grid")
        if any(n < 1 for n in self.sample_sizes):
            raise ValueError("sample sizes must be >= 1")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    def full_scale(self) -> "ExperimentConfig":
        return replace(self, replications=1000, limit_draws=5000, repetitions=100)

    def grid(self) -> np.ndarray:
        count = int(round((self.grid_hi - self.grid_lo) / self.grid_step)) + 1
        return self.grid_lo + self.grid_step * np.arange(count)


def _run(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


# ---------------------------------------------------------------- knot capture


def _capture_task(args):
    pmf_id, p, true_knots, n, seed, tol, rep = args
    rng = derive_rng(seed, CAPTURE_STREAM, _stream_id(pmf_id), n, rep)
    try:
        res = lse(draw_sample(p, n, rng), tol=tol)
    except CertificateFailure:
        return None
    captured = set(true_knots) <= set(res.knots)
    support_ok = res.p_hat.S <= p.S + 1
    return captured, support_ok


@dataclass
class CaptureRow:
    pmf: str
    n: int
    replications: int
    counted: int
    captured: int
    frequency_pct: float
    support_ok_pct: float
    certificate_failures: int


def knot_capture_experiment(cfg: ExperimentConfig) -> list[CaptureRow]:
    """Frequency (in %) with which the estimated knots contain every interior knot of p0."""
    rows = []
    for pmf_id in cfg.pmfs:
        p = resolve_pmf(pmf_id)
        true_knots = knots(p).interior
        for n in cfg.sample_sizes:
            tasks = [(pmf_id, p, true_knots, n, cfg.seed, cfg.tol, i) for i in range(cfg.replications)]
            out = _run(_capture_task, tasks, cfg.workers)
            ok = [o for o in out if o is not None]
            counted = len(ok)
            captured = sum(c for c, _ in ok)
            support = sum(s for _, s in ok)
            rows.append(
                CaptureRow(
                    pmf=pmf_id,
                    n=n,
                    replications=cfg.replications,
                    counted=counted,
                    captured=captured,
                    frequency_pct=100.0 * captured / counted if counted else float("nan"),
                    support_ok_pct=100.0 * support / counted if counted else float("nan"),
                    certificate_failures=cfg.replications - counted,
                )
            )
    return rows


# ------------------------------------------------------------------ convergence


def empirical_cdf_on_grid(samples: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Column-wise empirical cdfs: ``out[j, t] = mean(samples[:, j] <= grid[t])``."""
    samples = np.asarray(samples, dtype=float)
    srt = np.sort(samples, axis=0)
    m = srt.shape[0]
    return np.stack([np.searchsorted(srt[:, j], grid, side="right") / m for j in range(srt.shape[1])])


def sup_cdf_distance(cdf_a: np.ndarray, cdf_b: np.ndarray) -> float:
    return float(np.abs(cdf_a - cdf_b).max())


def five_numbers(x) -> dict:
    q = np.percentile(np.asarray(x, dtype=float), [0, 25, 50, 75, 100])
    return dict(zip(("min", "q1", "median", "q3", "max"), (float(v) for v in q)))


def _limit_task(args):
    pmf_id, p, K, seed, i = args
    w = simulate_w(p, derive_rng(seed, LIMIT_STREAM, _stream_id(pmf_id), i))
    return limit_minimizer(w, K).g_hat


def limit_draws(pmf_id: str, p: Pmf, count: int, seed: int, workers: int = 1) -> np.ndarray:
    """``count`` draws of g_hat, as rows of a (count, S + 2) array."""
    K = knots(p)
    tasks = [(pmf_id, p, K, seed, i) for i in range(count)]
    return np.array(_run(_limit_task, tasks, workers))


def _error_task(args):
    pmf_id, p, n, seed, tol, rep, i = args
    rng = derive_rng(seed, CONVERGENCE_STREAM, _stream_id(pmf_id), n, rep, i)
    res = lse(draw_sample(p, n, rng), tol=tol)
    est = np.zeros(p.S + 2)
    m = min(est.size, res.values.size)
    est[:m] = res.values[:m]
    return np.sqrt(n) * (est - p.padded(p.S + 2))


@dataclass
class ConvergenceResult:
    pmf: str
    n: int
    D: list[float]

    @property
    def summary(self) -> dict:
        return five_numbers(self.D)


def convergence_experiment(cfg: ExperimentConfig) -> list[ConvergenceResult]:
    """Distribution of D_{n,M,M'}: sup over coordinates and grid of the cdf gap.

    The limit cdfs come from ``cfg.limit_draws`` draws and are computed once
    per pmf; each repetition draws ``cfg.replications`` fresh estimation
    errors and yields one D value.
    """
    grid = cfg.grid()
    results = []
    for pmf_id in cfg.pmfs:
        p = resolve_pmf(pmf_id)
        target = empirical_cdf_on_grid(limit_draws(pmf_id, p, cfg.limit_draws, cfg.seed, cfg.workers), grid)
        for n in cfg.sample_sizes:
            tasks = [
                (pmf_id, p, n, cfg.seed, cfg.tol, r, i)
                for r in range(cfg.repetitions)
                for i in range(cfg.replications)
            ]
            errs = np.array(_run(_error_task, tasks, cfg.workers))
            errs = errs.reshape(cfg.repetitions, cfg.replications, p.S + 2)
            D = [sup_cdf_distance(empirical_cdf_on_grid(errs[r], grid), target) for r in range(cfg.repetitions)]
            results.append(ConvergenceResult(pmf_id, n, D))
    return results


def config_dict(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)
