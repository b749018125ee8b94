"""Simulation of the Gaussian weak limit of the convex LSE.

For a convex pmf p0 on {0..S} with interior knots s_1 < ... < s_m, the limit
of sqrt(n) (phat_n - p0) on {0..S+1} is the projection g_hat of a Gaussian
vector W onto the cone of sequences convex on every [s_j, s_{j+1}]
(s_0 = 0, s_{m+1} = S + 1).  The projection is computed with Dykstra's
algorithm, one cone per knot interval.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pmf import KnotSet, Pmf, knots
from .projection import DYKSTRA_MAX_CYCLES, DYKSTRA_TOL, ConeSpec, NonConvergence, dykstra
from .seeding import derive_rng

CERT_TOL = 1e-8
LIMIT_STREAM = 1


@dataclass(frozen=True)
class GaussianSample:
    """One draw of W on {0..S+1}; W(S+1) = 0."""

    w: np.ndarray

    @property
    def S(self) -> int:
        return self.w.size - 2


@dataclass(frozen=True)
class LimitCertificate:
    """Characterization of g_hat: H_hat >= H on {0..S+2}, with equality on ``equality_points``."""

    residuals: np.ndarray  # H_hat(x) - H(x), x = 0..S+2
    equality_points: tuple[int, ...]
    min_residual: float
    max_equality_gap: float
    G_end: float  # G_hat(S+1)
    feasibility: float  # most negative Laplacian inside the cones
    tol: float

    @property
    def passed(self) -> bool:
        return (
            self.min_residual >= -self.tol
            and self.max_equality_gap <= self.tol
            and abs(self.G_end) <= self.tol
            and self.feasibility >= -self.tol
        )


@dataclass(frozen=True)
class LimitSample:
    g_hat: np.ndarray  # {0..S+1}
    G_hat: np.ndarray  # {0..S+1}
    H_hat: np.ndarray  # {0..S+2}
    certificate: LimitCertificate
    cycles: int = 0


def knot_cones(K: KnotSet) -> list[ConeSpec]:
    """Cones [s_j, s_{j+1}], j = 0..m, over the grid {0..S+1}."""
    return [ConeSpec(a, b) for a, b in K.intervals()]


def simulate_w(p0: Pmf, rng: np.random.Generator) -> GaussianSample:
    """W(k) = U(F(k)) - U(F(k-1)) for a Brownian bridge U.

    Built from independent V_k ~ N(0, p0(k)): with T = sum_k V_k (variance 1),
    U(F(k)) = sum_{j<=k} V_j - F(k) T, hence W(k) = V_k - p0(k) T.  Summing
    over k telescopes to zero and W(S+1) = 0.
    """
    p = p0.mass
    v = rng.standard_normal(p.size) * np.sqrt(p)
    w = np.zeros(p.size + 1)
    w[:-1] = v - p * v.sum()
    return GaussianSample(w)


def _double_partial_sums(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    G = np.cumsum(x)
    H = np.concatenate(([0.0], np.cumsum(G)))
    return G, H


def certificate_limit(g_hat, w: GaussianSample, K: KnotSet, tol: float = CERT_TOL) -> LimitCertificate:
    """Check the optimality conditions of ``g_hat`` for the projection of ``w`` onto C(K)."""
    g = np.asarray(g_hat.g_hat if isinstance(g_hat, LimitSample) else g_hat, dtype=float)
    wv = w.w
    S = wv.size - 2
    G_hat, H_hat = _double_partial_sums(g)
    _, H = _double_partial_sums(wv)
    res = H_hat - H
    eq = set(K.boundaries) | {S + 2}
    worst_lap = 0.0
    for c in knot_cones(K):
        for k in c.interior:
            lap = g[k + 1] - 2.0 * g[k] + g[k - 1]
            worst_lap = min(worst_lap, lap)
            if lap > tol:
                eq.add(k)
    eq_pts = tuple(sorted(eq))
    gaps = np.abs(res[list(eq_pts)])
    return LimitCertificate(
        residuals=res,
        equality_points=eq_pts,
        min_residual=float(res.min()),
        max_equality_gap=float(gaps.max()),
        G_end=float(G_hat[S + 1]),
        feasibility=float(worst_lap),
        tol=tol,
    )


def limit_minimizer(
    w: GaussianSample,
    K: KnotSet,
    tol: float = DYKSTRA_TOL,
    max_cycles: int = DYKSTRA_MAX_CYCLES,
) -> LimitSample:
    """g_hat = argmin sum_k (g(k) - W(k))^2 / 2 over C(K), with G_hat, H_hat and certificate."""
    if K.S != w.S:
        raise ValueError("knot set and Gaussian sample live on different grids")
    state = dykstra(w.w, knot_cones(K), tol=tol, max_cycles=max_cycles)
    g = state.g
    G_hat, H_hat = _double_partial_sums(g)
    return LimitSample(
        g_hat=g,
        G_hat=G_hat,
        H_hat=H_hat,
        certificate=certificate_limit(g, w, K),
        cycles=state.cycles,
    )


def _check_interior_knot(K: KnotSet, s: int):
    if s not in K.interior:
        raise ValueError(f"{s} is not an interior knot")


def localized_left(w: GaussianSample, K: KnotSet, s: int, tol: float = DYKSTRA_TOL) -> np.ndarray:
    """Minimizer over {0..s} of the criterion restricted to the cones ending at or before s."""
    _check_interior_knot(K, s)
    cones = [c for c in knot_cones(K) if c.hi <= s]
    return dykstra(w.w[: s + 1], cones, tol=tol).g


def localized_right(w: GaussianSample, K: KnotSet, s: int, tol: float = DYKSTRA_TOL) -> np.ndarray:
    """Minimizer over {s..S+1} of the criterion restricted to the cones starting at or after s."""
    _check_interior_knot(K, s)
    cones = [ConeSpec(c.lo - s, c.hi - s) for c in knot_cones(K) if c.lo >= s]
    return dykstra(w.w[s:], cones, tol=tol).g


def left_localization_holds(ls: LimitSample, w: GaussianSample, s: int, tol: float = CERT_TOL) -> bool:
    """G_hat(s) == U(F_p0(s)), i.e. the partial sums of g_hat and W agree at s."""
    return abs(ls.G_hat[s] - w.w[: s + 1].sum()) <= tol


def right_localization_holds(ls: LimitSample, w: GaussianSample, s: int, tol: float = CERT_TOL) -> bool:
    return abs(ls.G_hat[s - 1] - w.w[:s].sum()) <= tol


def sample_limit_distribution(
    p0: Pmf,
    N: int,
    seed: int,
    K: KnotSet | None = None,
    stream: int = LIMIT_STREAM,
) -> list[tuple[GaussianSample, LimitSample]]:
    """N independent (W, g_hat) draws; draw i uses the generator derived from (seed, stream, i)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if K is None:
        K = knots(p0)
    out = []
    for i in range(N):
        w = simulate_w(p0, derive_rng(seed, stream, i))
        try:
            ls = limit_minimizer(w, K)
        except NonConvergence as exc:
            raise NonConvergence(f"draw {i}: {exc}", exc.cycles, exc.change) from exc
        out.append((w, ls))
    return out
