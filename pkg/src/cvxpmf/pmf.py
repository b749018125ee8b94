"""Finitely supported pmfs on {0, ..., S} and the convex-pmf toolbox.

Sequences are represented as 1-d float arrays indexed from 0.  Any index
outside the stored range reads as zero, so a pmf on {0..S} is implicitly
the zero-extended sequence on the nonnegative integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

MASS_ATOL = 1e-12
KNOT_TOL = 1e-10
RENORM_TOL = 1e-10


@dataclass(frozen=True)
class Pmf:
    """Probability mass function on {0, ..., S} with S >= 1."""

    mass: np.ndarray

    def __post_init__(self):
        m = np.array(self.mass, dtype=float)
        if m.ndim != 1:
            raise ValueError("mass must be one-dimensional")
        if m.size < 2:
            raise ValueError("support must contain at least two points (S >= 1)")
        if not np.all(np.isfinite(m)):
            raise ValueError("mass must be finite")
        if np.any(m < 0):
            raise ValueError("mass must be nonnegative")
        if m[-1] <= 0:
            raise ValueError("mass[S] must be positive")
        if abs(m.sum() - 1.0) > MASS_ATOL:
            raise ValueError(f"mass sums to {m.sum()!r}, not 1")
        m.setflags(write=False)
        object.__setattr__(self, "mass", m)

    @classmethod
    def from_values(cls, values, atol: float = MASS_ATOL) -> "Pmf":
        """Build a pmf from a numerically computed sequence.

        Entries with ``|v| <= atol`` are zeroed, trailing zeros are trimmed and
        the result is rescaled to sum exactly to one.  Used for estimator
        outputs whose tails carry floating-point dust.
        """
        v = np.array(values, dtype=float)
        v[np.abs(v) <= atol] = 0.0
        nz = np.flatnonzero(v)
        if nz.size == 0:
            raise ValueError("all-zero sequence")
        v = v[: nz[-1] + 1]
        total = v.sum()
        if abs(total - 1.0) > RENORM_TOL:
            raise ValueError(f"sequence sums to {total!r}, not 1")
        return cls(v / total)

    @property
    def S(self) -> int:
        return self.mass.size - 1

    def __len__(self):
        return self.mass.size

    def __getitem__(self, k: int) -> float:
        if 0 <= k < self.mass.size:
            return float(self.mass[k])
        return 0.0

    def padded(self, length: int) -> np.ndarray:
        """Zero-extended copy of the mass; never shorter than S + 1."""
        out = np.zeros(max(length, self.mass.size))
        out[: self.mass.size] = self.mass
        return out

    def mean(self) -> float:
        return float(np.arange(self.mass.size) @ self.mass)


@dataclass(frozen=True)
class KnotSet:
    """Interior knots of a convex pmf on {0..S}, with s_0 = 0 and s_{m+1} = S + 1."""

    interior: tuple[int, ...]
    S: int

    def __post_init__(self):
        pts = tuple(int(k) for k in self.interior)
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("interior knots must be strictly increasing")
        if pts and (pts[0] < 1 or pts[-1] > self.S):
            raise ValueError("interior knots must lie in {1, ..., S}")
        object.__setattr__(self, "interior", pts)

    @property
    def boundaries(self) -> tuple[int, ...]:
        """The full chain s_0 = 0 < s_1 < ... < s_m < s_{m+1} = S + 1."""
        return (0, *self.interior, self.S + 1)

    def intervals(self) -> list[tuple[int, int]]:
        b = self.boundaries
        return list(zip(b[:-1], b[1:]))

    def __contains__(self, k) -> bool:
        return k in self.interior

    def __len__(self):
        return len(self.interior)


@dataclass(frozen=True)
class MixtureWeights:
    """Weights of the triangular mixture; ``pi[j - 1]`` is the weight of T_j."""

    pi: np.ndarray = field()

    def __post_init__(self):
        w = np.array(self.pi, dtype=float)
        if w.ndim != 1 or w.size < 2:
            raise ValueError("need weights for at least T_1 and T_2")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if w[-1] <= 0:
            raise ValueError("last weight must be positive")
        if abs(w.sum() - 1.0) > MASS_ATOL:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "pi", w)

    @classmethod
    def from_mapping(cls, weights: Mapping[int, float]) -> "MixtureWeights":
        jmax = max(int(j) for j in weights)
        w = np.zeros(jmax)
        for j, v in weights.items():
            j = int(j)
            if j < 1:
                raise ValueError("triangular index must be >= 1")
            w[j - 1] = float(v)
        return cls(w)

    def __getitem__(self, j: int) -> float:
        if 1 <= j <= self.pi.size:
            return float(self.pi[j - 1])
        return 0.0

    def as_dict(self) -> dict[int, float]:
        return {j + 1: float(v) for j, v in enumerate(self.pi) if v != 0.0}


def _as_array(p) -> np.ndarray:
    if isinstance(p, Pmf):
        return p.mass
    return np.asarray(p, dtype=float)


def cdf(p: Pmf) -> np.ndarray:
    """F_p on {0, ..., S + 1}."""
    m = _as_array(p)
    return np.cumsum(np.append(m, 0.0))


def h_values(p, zmax: int) -> np.ndarray:
    """H_p(z) = sum_{k < z} F_p(k) for z = 0..zmax, with H_p(0) = 0."""
    m = _as_array(p)
    seq = np.zeros(max(zmax, m.size))
    seq[: m.size] = m
    F = np.cumsum(seq)[:zmax]
    return np.concatenate(([0.0], np.cumsum(F)))


def h_process(p, z: int) -> float:
    if z < 0:
        raise ValueError("z must be nonnegative")
    return float(h_values(p, z)[z])


def laplacian(p, k: int) -> float:
    """Discrete Laplacian p(k+1) - 2 p(k) + p(k-1) of the zero-extended sequence."""
    if k < 1:
        raise ValueError("the Laplacian is defined for k >= 1")
    m = _as_array(p)

    def at(i):
        return float(m[i]) if 0 <= i < m.size else 0.0

    return at(k + 1) - 2.0 * at(k) + at(k - 1)


def laplacians(p) -> np.ndarray:
    """Array whose entry k is the Laplacian at k, for k = 1..S+1 (entry 0 unused, set to 0)."""
    m = _as_array(p)
    ext = np.concatenate((m, [0.0, 0.0]))
    out = np.zeros(m.size + 1)
    out[1:] = ext[2:] - 2.0 * ext[1:-1] + ext[:-2]
    return out


def is_convex(p, tol: float = KNOT_TOL) -> bool:
    return bool(np.all(laplacians(p)[1:] >= -tol))


def knots(p: Pmf, tol: float = KNOT_TOL) -> KnotSet:
    """Interior knots (points in {1..S} with Laplacian > tol)."""
    lap = laplacians(p)
    S = _as_array(p).size - 1
    interior = [k for k in range(1, S + 1) if lap[k] > tol]
    return KnotSet(tuple(interior), S)


def triangular(j: int) -> Pmf:
    """T_j(i) = 2 (j - i)_+ / (j (j + 1)), supported on {0, ..., j - 1}."""
    if j < 2:
        raise ValueError("triangular pmf needs j >= 2 (j = 1 is a Dirac mass)")
    i = np.arange(j)
    return Pmf(2.0 * (j - i) / (j * (j + 1)))


def _triangular_array(j: int, length: int) -> np.ndarray:
    i = np.arange(length)
    return 2.0 * np.clip(j - i, 0, None) / (j * (j + 1))


def mixture_compose(w: MixtureWeights) -> Pmf:
    J = w.pi.size
    out = np.zeros(J)
    for j in range(1, J + 1):
        if w.pi[j - 1] != 0.0:
            out += w.pi[j - 1] * _triangular_array(j, J)
    return Pmf(out)


def mixture_decompose(p: Pmf, tol: float = KNOT_TOL) -> MixtureWeights:
    """pi_j = j (j + 1) / 2 * Laplacian(p)(j) for j = 1..S+1.

    Raises ValueError for non-convex input or weights that do not sum to one
    within 1e-10.
    """
    if not is_convex(p, tol):
        raise ValueError("mixture representation exists only for convex pmfs")
    lap = laplacians(p)[1:]
    j = np.arange(1, lap.size + 1)
    pi = j * (j + 1) / 2.0 * lap
    pi[lap <= tol] = 0.0
    total = pi.sum()
    if abs(total - 1.0) > RENORM_TOL:
        raise ValueError(f"mixing weights sum to {total!r}")
    return MixtureWeights(pi / total)


def truncated_geometric(q: float, S: int) -> Pmf:
    """p(i) = q^i (1 - q) / (1 - q^(S+1)) on {0, ..., S}."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    if S < 1:
        raise ValueError("S must be >= 1")
    i = np.arange(S + 1)
    return Pmf(q**i * (1.0 - q) / (1.0 - q ** (S + 1)))


def norm(x: Sequence[float], r=2) -> float:
    a = np.abs(np.asarray(x, dtype=float))
    if r == np.inf or r == "inf":
        return float(a.max()) if a.size else 0.0
    if r == 1:
        return float(a.sum())
    if r == 2:
        return float(np.sqrt(a @ a))
    raise ValueError("r must be 1, 2 or inf")


def shift_values(values, kappa: int) -> np.ndarray:
    """Translate observations supported on {kappa, ...} to start at 0."""
    v = np.asarray(values, dtype=np.int64) - int(kappa)
    if np.any(v < 0):
        raise ValueError("observation below kappa")
    return v
