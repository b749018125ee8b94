"""Least-squares projections onto cones of discretely convex sequences.

A cone is described by an integer interval ``[lo, hi]`` of the ambient grid
{0..L}; its members are the sequences whose discrete Laplacian is
nonnegative at lo+1, ..., hi-1.  Coordinates outside the interval are left
alone.  Intersections of such cones are handled with Dykstra's cyclic
projection algorithm, and a brute-force enumeration of KKT systems is kept
around as an independent oracle for small problems.

The single-cone solver is a primal active-set method.  Its working set is a
subset of the constrained interior points on which the Laplacian is pinned
to zero, so every equality-constrained subproblem is a least-squares fit by
a piecewise-linear function whose breakpoints are the remaining points.
Multipliers come for free: with r = g - y, the multiplier of the constraint
at k is the double partial sum sum_{j<k} sum_{i<=j} r(i).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

KKT_TOL = 1e-9
DYKSTRA_TOL = 1e-10
DYKSTRA_MAX_CYCLES = 100_000
ORACLE_MAX_LEN = 12


class NonConvergence(RuntimeError):
    """Raised when an iterative projection stops before meeting its tolerance."""

    def __init__(self, message, cycles=None, change=None):
        super().__init__(message)
        self.cycles = cycles
        self.change = change


@dataclass(frozen=True)
class ConeSpec:
    """Convexity on the integer interval ``[lo, hi]`` (constraints at interior points)."""

    lo: int
    hi: int

    def __post_init__(self):
        if not 0 <= self.lo < self.hi:
            raise ValueError(f"invalid cone interval [{self.lo}, {self.hi}]")

    @property
    def vacuous(self) -> bool:
        return self.hi - self.lo <= 1

    @property
    def interior(self) -> range:
        return range(self.lo + 1, self.hi)


@dataclass
class DykstraState:
    g: np.ndarray
    u: list = field(default_factory=list)
    cycles: int = 0
    change: float = np.inf


def second_differences(g) -> np.ndarray:
    """Laplacian at positions 1..len-2 (array of length len-2)."""
    g = np.asarray(g, dtype=float)
    return g[2:] - 2.0 * g[1:-1] + g[:-2]


def double_cumsum(r) -> np.ndarray:
    """lam(k) = sum_{j<k} sum_{i<=j} r(i) for k = 0..len(r); lam(0) = 0."""
    return np.concatenate(([0.0], np.cumsum(np.cumsum(r))))


def _hat_fit(y: np.ndarray, breaks: np.ndarray) -> np.ndarray:
    """Least-squares fit of y by a piecewise-linear function with the given breakpoints."""
    n = y.size
    idx = np.arange(n)
    q = breaks.size
    if q == n:
        return y.copy()
    B = np.empty((n, q))
    eye = np.eye(q)
    for t in range(q):
        B[:, t] = np.interp(idx, breaks, eye[t])
    coef, *_ = np.linalg.lstsq(B, y, rcond=None)
    return B @ coef


def convex_fit(y, constrained=None, tol=None, max_iter=None) -> np.ndarray:
    """Project ``y`` onto sequences with nonnegative Laplacian at ``constrained``.

    ``constrained`` is a boolean mask over positions 0..n-1; only interior
    positions (1..n-2) may be set.  Defaults to every interior position.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if n <= 2:
        return y.copy()
    if constrained is None:
        cmask = np.zeros(n, dtype=bool)
        cmask[1:-1] = True
    else:
        cmask = np.asarray(constrained, dtype=bool).copy()
        if cmask[0] or cmask[-1]:
            raise ValueError("end points cannot carry a convexity constraint")
    C = np.flatnonzero(cmask)
    if C.size == 0:
        return y.copy()
    scale = max(1.0, float(np.abs(y).max()))
    if tol is None:
        tol = 1e-13 * scale * (1.0 + n * n)
    if max_iter is None:
        max_iter = 50 * (C.size + 1)

    always_free = np.flatnonzero(~cmask)  # includes both end points
    working = cmask.copy()  # True where the Laplacian is pinned to zero

    def eqp():
        breaks = np.union1d(always_free, np.flatnonzero(cmask & ~working))
        return _hat_fit(y, breaks)

    g = eqp()
    for _ in range(max_iter):
        g_star = eqp()
        p = g_star - g
        dp = second_differences(p)[C - 1]
        dg = second_differences(g)[C - 1]
        cand = (~working[C]) & (dp < -1e-15 * scale)
        if np.any(cand):
            ratios = np.full(C.size, np.inf)
            ratios[cand] = np.maximum(dg[cand], 0.0) / -dp[cand]
            b = int(np.argmin(ratios))
            if ratios[b] < 1.0:
                g = g + ratios[b] * p
                working[C[b]] = True
                continue
        g = g_star
        lam = double_cumsum(g - y)[C]
        lam_w = np.where(working[C], lam, np.inf)
        b = int(np.argmin(lam_w))
        if lam_w[b] >= -tol:
            return g
        working[C[b]] = False
    raise NonConvergence(f"active-set solver exceeded {max_iter} iterations")


def kkt_residual(y, g, constrained=None) -> float:
    """Largest violation of the optimality conditions of ``convex_fit``.

    Covers primal feasibility, dual feasibility, stationarity along the
    unconstrained directions and complementary slackness.
    """
    y = np.asarray(y, dtype=float)
    g = np.asarray(g, dtype=float)
    n = y.size
    if n <= 2:
        return float(np.abs(g - y).max()) if n else 0.0
    if constrained is None:
        cmask = np.zeros(n, dtype=bool)
        cmask[1:-1] = True
    else:
        cmask = np.asarray(constrained, dtype=bool)
    r = g - y
    lam = double_cumsum(r)  # length n + 1
    lap = np.zeros(n)
    lap[1:-1] = second_differences(g)
    viol = [0.0]
    viol.append(abs(lam[n]))
    viol.append(abs(lam[n - 1]))
    free = ~cmask
    free[0] = free[-1] = False
    if np.any(free):
        viol.append(float(np.abs(lam[:n][free]).max()))
    if np.any(cmask):
        lc = lam[:n][cmask]
        dc = lap[cmask]
        viol.append(float(np.max(-dc)))
        viol.append(float(np.max(-lc)))
        viol.append(float(np.max(np.minimum(np.abs(lc), np.abs(dc)))))
    return float(max(viol))


def project_convex(y, cone: ConeSpec) -> np.ndarray:
    """Euclidean projection of ``y`` onto the sequences convex on ``cone``."""
    y = np.asarray(y, dtype=float)
    if y.size < cone.hi + 1:
        raise ValueError("sequence shorter than the cone interval")
    out = y.copy()
    if cone.vacuous:
        return out
    out[cone.lo : cone.hi + 1] = convex_fit(y[cone.lo : cone.hi + 1])
    return out


def cone_violation(g, cones) -> float:
    """Largest negative Laplacian over the interiors of ``cones`` (0 if feasible)."""
    g = np.asarray(g, dtype=float)
    worst = 0.0
    for c in cones:
        if c.vacuous:
            continue
        worst = max(worst, float(np.max(-second_differences(g[c.lo : c.hi + 1]))))
    return worst


def dykstra(
    y,
    cones,
    tol: float = DYKSTRA_TOL,
    max_cycles: int = DYKSTRA_MAX_CYCLES,
    feas_tol: float = KKT_TOL,
) -> DykstraState:
    """Dykstra's cyclic projections onto the intersection of ``cones``.

    Cones whose interval has no interior point impose nothing and are
    skipped.  Stops after a full cycle whose sup-norm change is below
    ``tol`` with every cone satisfied to ``feas_tol``.
    """
    y = np.asarray(y, dtype=float)
    active = [c for c in cones if not c.vacuous]
    for c in active:
        if c.hi >= y.size:
            raise ValueError("cone interval exceeds the grid")
    g = y.copy()
    state = DykstraState(g=g, u=[np.zeros(c.hi - c.lo + 1) for c in active])
    if not active:
        state.change = 0.0
        return state
    for cycle in range(1, max_cycles + 1):
        prev = g.copy()
        for c, u in zip(active, state.u):
            block = slice(c.lo, c.hi + 1)
            z = g[block] - u
            proj = convex_fit(z)
            u[:] = proj - z
            g[block] = proj
        state.cycles = cycle
        state.change = float(np.abs(g - prev).max())
        if state.change < tol and cone_violation(g, active) <= feas_tol:
            return state
    raise NonConvergence(
        f"Dykstra stopped after {max_cycles} cycles with change {state.change:.3e}",
        cycles=max_cycles,
        change=state.change,
    )


def dykstra_project(y, cones, tol: float = DYKSTRA_TOL, max_cycles: int = DYKSTRA_MAX_CYCLES):
    return dykstra(y, cones, tol=tol, max_cycles=max_cycles).g


def _constraint_rows(n: int, cones) -> np.ndarray:
    rows = []
    for c in cones:
        for k in c.interior:
            a = np.zeros(n)
            a[k - 1], a[k], a[k + 1] = 1.0, -2.0, 1.0
            rows.append(a)
    return np.array(rows).reshape(-1, n)


def kkt_oracle(y, cones, tol: float = 1e-10) -> np.ndarray:
    """Exhaustive active-set enumeration for tiny problems.

    Tries every subset of the pooled constraint rows as an equality system,
    solves the resulting KKT system and returns the candidate that is both
    primal feasible and has nonnegative multipliers.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if n > ORACLE_MAX_LEN:
        raise ValueError(f"oracle limited to grids of length <= {ORACLE_MAX_LEN}")
    A = _constraint_rows(n, cones)
    m = A.shape[0]
    if m == 0:
        return y.copy()
    for size in range(m + 1):
        for subset in itertools.combinations(range(m), size):
            if size == 0:
                g = y.copy()
                lam = np.zeros(0)
            else:
                As = A[list(subset)]
                K = np.block([[np.eye(n), -As.T], [As, np.zeros((size, size))]])
                sol = np.linalg.solve(K, np.concatenate((y, np.zeros(size))))
                g, lam = sol[:n], sol[n:]
            if np.all(A @ g >= -tol) and np.all(lam >= -tol):
                return g
    raise RuntimeError("no KKT point found; constraint system is inconsistent")
