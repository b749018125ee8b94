"""Convex least-squares estimation of a pmf from integer observations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pmf import Pmf, laplacians
from .projection import convex_fit

CERT_TOL = 1e-8
TRAILING_TOL = 1e-12
DEFAULT_BUFFER = 4
MAX_DOUBLINGS = 12


class CertificateFailure(RuntimeError):
    """No grid produced an estimate passing the optimality certificate."""


@dataclass(frozen=True)
class Sample:
    """Multiset of nonnegative integers, stored as counts over {0..max}."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("counts must be a nonempty 1-d array")
        if np.any(c < 0):
            raise ValueError("counts must be nonnegative")
        if c.sum() < 1:
            raise ValueError("sample must contain at least one observation")
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1]
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @classmethod
    def from_values(cls, values) -> "Sample":
        v = np.asarray(values, dtype=np.int64).ravel()
        if v.size == 0:
            raise ValueError("sample must contain at least one observation")
        if np.any(v < 0):
            raise ValueError("observations must be nonnegative integers")
        return cls(np.bincount(v))

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def max_value(self) -> int:
        return self.counts.size - 1

    def values(self) -> np.ndarray:
        return np.repeat(np.arange(self.counts.size), self.counts)

    def frequencies(self, length: int | None = None) -> np.ndarray:
        """Empirical pmf as a plain array, zero padded to ``length``."""
        size = self.counts.size if length is None else max(length, self.counts.size)
        out = np.zeros(size)
        out[: self.counts.size] = self.counts / self.n
        return out


@dataclass(frozen=True)
class Certificate:
    """Fenchel characterization evaluated on a grid z = 0..len(residuals)-1.

    ``residuals[z] = H_phat(z) - H_pn(z)``; ``knot_gaps`` holds the residuals
    at the knots of the candidate.  ``feasibility`` is the most negative
    Laplacian of the zero-extended candidate (0 when convex).
    """

    residuals: np.ndarray
    knots: tuple[int, ...]
    knot_gaps: np.ndarray
    min_residual: float
    max_knot_gap: float
    feasibility: float
    tol: float

    @property
    def passed(self) -> bool:
        return (
            self.min_residual >= -self.tol
            and self.max_knot_gap <= self.tol
            and self.feasibility >= -self.tol
        )


@dataclass(frozen=True)
class LseResult:
    p_hat: Pmf
    values: np.ndarray  # estimate on the solver grid {0..Z}
    empirical: np.ndarray  # p_n on the same grid
    grid_len: int  # Z
    n: int
    certificate: Certificate

    @property
    def knots(self) -> tuple[int, ...]:
        return self.certificate.knots


def empirical_pmf(sample: Sample) -> Pmf:
    """p_n(j) = #{X_i = j} / n.

    A sample made only of zeros is a Dirac mass at 0, which is not a valid
    ``Pmf`` (S >= 1); ValueError is raised in that case.
    """
    if sample.max_value < 1:
        raise ValueError("all observations are 0; the empirical pmf is a Dirac mass")
    return Pmf(sample.counts / sample.n)


def fenchel_check(p_hat, p_n, tol: float = CERT_TOL, knot_tol: float = CERT_TOL) -> Certificate:
    """Evaluate H_phat >= H_pn everywhere with equality at the knots of phat."""
    a = np.asarray(p_hat.mass if isinstance(p_hat, Pmf) else p_hat, dtype=float)
    b = np.asarray(p_n.mass if isinstance(p_n, Pmf) else p_n, dtype=float)
    size = max(a.size, b.size) + 1
    x = np.zeros(size)
    x[: a.size] = a
    yv = np.zeros(size)
    yv[: b.size] = b
    # residual at z = 0..size+1; beyond that it stays constant once both pmfs are exhausted
    res = np.concatenate(([0.0], np.cumsum(np.cumsum(x - yv))))
    lap = laplacians(x)  # index k = 1..size
    knot_idx = tuple(int(k) for k in np.flatnonzero(lap > knot_tol) if k >= 1)
    gaps = np.abs(res[list(knot_idx)]) if knot_idx else np.zeros(0)
    return Certificate(
        residuals=res,
        knots=knot_idx,
        knot_gaps=gaps,
        min_residual=float(res.min()),
        max_knot_gap=float(gaps.max()) if gaps.size else 0.0,
        feasibility=float(min(0.0, lap[1:].min())),
        tol=tol,
    )


def lse(sample: Sample, buffer: int = DEFAULT_BUFFER, tol: float = CERT_TOL) -> LseResult:
    """Convex least-squares estimate of the pmf underlying ``sample``.

    The problem lives on all nonnegative integers; it is solved on the grid
    {0..Z}, Z = max observation + buffer, and the grid is enlarged (buffer
    doubled) until the estimate has no mass at Z and passes the Fenchel
    certificate.
    """
    if buffer < 1:
        raise ValueError("buffer must be >= 1")
    if sample.max_value < 1:
        raise ValueError("all observations are 0; the empirical pmf is a Dirac mass")
    b = buffer
    last = None
    for _ in range(MAX_DOUBLINGS):
        Z = sample.max_value + b
        y = sample.frequencies(Z + 1)
        g = convex_fit(y)
        cert = fenchel_check(g, y, tol=tol)
        last = cert
        if abs(g[Z]) < TRAILING_TOL and cert.passed:
            return LseResult(
                p_hat=Pmf.from_values(g),
                values=g,
                empirical=y,
                grid_len=Z,
                n=sample.n,
                certificate=cert,
            )
        b *= 2
    raise CertificateFailure(
        f"no grid up to buffer {b // 2} passed the certificate "
        f"(min residual {last.min_residual:.3e}, max knot gap {last.max_knot_gap:.3e})"
    )


def localized_lse(sample: Sample, z: int, z_prime: int) -> np.ndarray:
    """Minimizer of sum_{k=z}^{z'} (p_n(k) - p(k))^2 / 2 over convex (p(z), ..., p(z')).

    Agreement with the full estimate on {z..z'} holds for large n when z - 1
    and z' are double knots of the true pmf (or z = 0, z' >= S + 1); those
    hypotheses are not checked here.
    """
    if not 0 <= z < z_prime:
        raise ValueError("need 0 <= z < z'")
    y = sample.frequencies(z_prime + 1)[z : z_prime + 1]
    return convex_fit(y)


def localized_discrepancy(result: LseResult, local: np.ndarray, z: int) -> float:
    """Sup-norm distance between a localized fit on {z..} and the full estimate."""
    full = np.zeros(z + local.size)
    m = min(full.size, result.values.size)
    full[:m] = result.values[:m]
    return float(np.abs(full[z:] - local).max())


@dataclass(frozen=True)
class HDiagnostic:
    z: np.ndarray
    value: np.ndarray  # sqrt(n) (H_phat - H_pn)
    knots: tuple[int, ...]


def h_diagnostic(sample: Sample, result: LseResult | None = None) -> HDiagnostic:
    """The process sqrt(n) (H_phat(z) - H_pn(z)) with the knots of phat."""
    if result is None:
        result = lse(sample)
    res = result.certificate.residuals
    return HDiagnostic(
        z=np.arange(res.size),
        value=np.sqrt(result.n) * res,
        knots=result.knots,
    )
