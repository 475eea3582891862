"""Carleman weights on star graphs and numerical verification of the inequality.

The weighted a-priori estimate

    (R^2 eps / 8 mu) sum_k || e^{phi^k} q ||^2  <=  sum_k || e^{phi^k} (d_t + i Laplacian) q ||^2

holds for every admissible q (continuous at the vertex with zero flux there),
all mu, eps, R > 0, with the N weights phi^k built from cyclic shifts of one
integer-ish direction vector per edge.  This module constructs those vectors
exactly, draws random admissible samples with closed-form derivatives, and
evaluates both sides by tensor trapezoid quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .uncertainty import gamma_star

__all__ = [
    "AlphaVectors",
    "CarlemanWeight",
    "ZcompSample",
    "CarlemanMargin",
    "WeightOverflowError",
    "alpha_vectors",
    "sample_zcomp",
    "membership_residual",
    "carleman_sides",
    "write_margin_csv",
]


class WeightOverflowError(ArithmeticError):
    """exp(phi) overflows on the sample support; shrink the support or mu, R."""


@dataclass(frozen=True)
class AlphaVectors:
    """The N cyclic direction vectors, stored as exact rationals.

    For an even number of edges the base vector is (1, -1, ..., 1, -1); for
    N = 2m+1 it is m+1 entries of -1 followed by m entries of (m+1)/m.  Each
    vector sums to zero, every component slot sums to zero across the family,
    sum_k (alpha_j^k)^2 does not depend on j, every entry has magnitude >= 1
    and the largest magnitude is twice the critical star exponent.
    """

    n_edges: int
    vectors: tuple[tuple[Fraction, ...], ...]

    def as_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.vectors])


def alpha_vectors(n_edges: int) -> AlphaVectors:
    if n_edges < 2:
        raise ValueError("a star needs at least 2 edges")
    if n_edges % 2 == 0:
        base = tuple(Fraction(1) if j % 2 == 0 else Fraction(-1) for j in range(n_edges))
    else:
        m = (n_edges - 1) // 2
        base = tuple(Fraction(-1) for _ in range(m + 1)) + tuple(
            Fraction(m + 1, m) for _ in range(m)
        )
    vectors = []
    row = base
    for _ in range(n_edges):
        vectors.append(row)
        row = row[-1:] + row[:-1]
    out = AlphaVectors(n_edges, tuple(vectors))
    _assert_invariants(out)
    return out


def _assert_invariants(av: AlphaVectors) -> None:
    N = av.n_edges
    for row in av.vectors:
        if sum(row) != 0:
            raise AssertionError("vector does not sum to zero")
    for j in range(N):
        if sum(av.vectors[k][j] for k in range(N)) != 0:
            raise AssertionError("component column does not sum to zero")
    sq = [sum(av.vectors[k][j] ** 2 for k in range(N)) for j in range(N)]
    if len(set(sq)) != 1:
        raise AssertionError("sum of squares depends on the edge")
    mags = [abs(v) for row in av.vectors for v in row]
    if min(mags) < 1:
        raise AssertionError("entry magnitude below 1")
    if Fraction(max(mags)) != Fraction(2 * gamma_star(N)).limit_denominator(10**6):
        raise AssertionError("largest magnitude is not twice the critical exponent")


@dataclass(frozen=True)
class CarlemanWeight:
    """phi_j^k(t,x) = mu (alpha_j^k x + R t(1-t))^2 - (1+eps) R^2 t(1-t) / (16 mu)."""

    mu: float
    eps: float
    R: float

    def __post_init__(self):
        if self.mu <= 0 or self.eps <= 0 or self.R <= 0:
            raise ValueError("mu, eps and R must be positive")

    def phi(self, alpha_jk: float, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        drift = self.R * t * (1.0 - t)
        return self.mu * (alpha_jk * x + drift) ** 2 - (1.0 + self.eps) * self.R**2 * t * (
            1.0 - t
        ) / (16.0 * self.mu)

    @property
    def lhs_prefactor(self) -> float:
        return self.R**2 * self.eps / (8.0 * self.mu)


# ---------------------------------------------------------------------------
# admissible samples with closed-form derivatives
# ---------------------------------------------------------------------------


def _bump012(s: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """value, first and second derivative of exp(1 - 1/(1-s^2)) extended by zero."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0 - 1e-12
    v = np.zeros(s.shape)
    d1 = np.zeros(s.shape)
    d2 = np.zeros(s.shape)
    si = s[inside]
    g = 1.0 - si**2
    val = np.exp(1.0 - 1.0 / g)
    p1 = -2.0 * si / g**2  # d/ds (1 - 1/g)
    p2 = -2.0 / g**2 - 8.0 * si**2 / g**3
    v[inside] = val
    d1[inside] = p1 * val
    d2[inside] = (p2 + p1**2) * val
    return v, d1, d2


@dataclass(frozen=True)
class _SpaceProfile:
    kind: str  # 'bump' (even at the center) | 'xbump' (odd factor at 0)
    center: float
    width: float

    def eval(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        s = (np.asarray(x, dtype=float) - self.center) / self.width
        v, d1, d2 = _bump012(s)
        if self.kind == "bump":
            return v, d1 / self.width, d2 / self.width**2
        if self.kind == "xbump":
            x = np.asarray(x, dtype=float)
            return x * v, v + x * d1 / self.width, 2.0 * d1 / self.width + x * d2 / self.width**2
        raise ValueError(self.kind)


@dataclass(frozen=True)
class _TimeEnvelope:
    center: float
    width: float

    def eval(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s = (np.asarray(t, dtype=float) - self.center) / self.width
        v, d1, _ = _bump012(s)
        return v, d1 / self.width


@dataclass(frozen=True)
class _Term:
    coeffs: tuple[complex, ...]  # one per edge
    time: _TimeEnvelope
    space: _SpaceProfile


@dataclass(frozen=True)
class ZcompSample:
    """Random admissible family q = (q_j): smooth, compactly supported inside
    (0,1) x (0, support_x), equal at the vertex, zero flux there.

    Built from a vertex profile shared by all edges (zero slope at 0), interior
    bumps vanishing identically near 0, and one odd corrector x*bump whose
    per-edge coefficients sum to zero; all derivatives are closed form, so the
    quadrature of (d_t + i d_xx) q carries no differencing error.
    """

    n_edges: int
    terms: tuple[_Term, ...]
    support_x: float
    seed: int

    def values(self, t: np.ndarray, x: np.ndarray) -> np.ndarray:
        return self._eval(t, x, defect=False)

    def defect(self, t: np.ndarray, x: np.ndarray) -> np.ndarray:
        """(d_t + i d_xx) q on the tensor grid, shape (n_edges, nt, nx)."""
        return self._eval(t, x, defect=True)

    def _eval(self, t, x, defect: bool) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        out = np.zeros((self.n_edges, len(t), len(x)), dtype=complex)
        for term in self.terms:
            T, Tp = term.time.eval(t)
            X, _, Xpp = term.space.eval(x)
            if defect:
                block = Tp[:, None] * X[None, :] + 1j * T[:, None] * Xpp[None, :]
            else:
                block = T[:, None] * X[None, :]
            coeffs = np.asarray(term.coeffs, dtype=complex)
            out += coeffs[:, None, None] * block[None, :, :]
        return out

    def vertex_trace(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(values (n_edges, nt), x-derivatives (n_edges, nt)) at x = 0."""
        t = np.asarray(t, dtype=float)
        vals = np.zeros((self.n_edges, len(t)), dtype=complex)
        ders = np.zeros((self.n_edges, len(t)), dtype=complex)
        x0 = np.array([0.0])
        for term in self.terms:
            T, _ = term.time.eval(t)
            X, Xp, _ = term.space.eval(x0)
            coeffs = np.asarray(term.coeffs, dtype=complex)
            vals += coeffs[:, None] * T[None, :] * X[0]
            ders += coeffs[:, None] * T[None, :] * Xp[0]
        return vals, ders


def _draw_time(rng) -> _TimeEnvelope:
    width = rng.uniform(0.2, 0.3)
    center = rng.uniform(width + 0.02, 0.98 - width)
    return _TimeEnvelope(center, width)


def sample_zcomp(n_edges: int, seed: int, n_bumps: int = 2, x_max: float = 4.0) -> ZcompSample:
    """Deterministic admissible sample for the given seed."""
    if n_edges < 2:
        raise ValueError("a star needs at least 2 edges")
    rng = np.random.default_rng(seed)
    terms: list[_Term] = []

    def cnormal(size):
        return rng.normal(size=size) + 1j * rng.normal(size=size)

    shared = complex(cnormal(()))
    terms.append(
        _Term((shared,) * n_edges, _draw_time(rng), _SpaceProfile("bump", 0.0, rng.uniform(0.6, 1.0)))
    )
    for _ in range(n_bumps):
        width = rng.uniform(0.3, 0.6)
        center = rng.uniform(width + 0.2, x_max - width - 0.05)
        coeffs = tuple(cnormal(n_edges))
        terms.append(_Term(coeffs, _draw_time(rng), _SpaceProfile("bump", center, width)))
    corr = cnormal(n_edges)
    corr = corr - np.mean(corr)
    terms.append(_Term(tuple(corr), _draw_time(rng), _SpaceProfile("xbump", 0.0, rng.uniform(0.4, 0.8))))
    return ZcompSample(n_edges, tuple(terms), float(x_max), int(seed))


def membership_residual(sample: ZcompSample, t: np.ndarray | None = None) -> tuple[float, float]:
    """(worst vertex-value mismatch, worst flux sum) over the time grid."""
    if t is None:
        t = np.linspace(0.0, 1.0, 401)
    vals, ders = sample.vertex_trace(t)
    cont = float(np.max(np.abs(vals - vals[0:1, :])))
    flux = float(np.max(np.abs(np.sum(ders, axis=0))))
    return cont, flux


# ---------------------------------------------------------------------------
# quadrature of the inequality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CarlemanMargin:
    lhs: float
    rhs: float
    quad_error: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.margin >= -self.quad_error


_EXP_LIMIT = 700.0


def _integrate(weighted: np.ndarray, t: np.ndarray, x: np.ndarray) -> float:
    return float(np.trapezoid(np.trapezoid(weighted, x, axis=-1), t, axis=-1).sum())


def carleman_sides(
    sample: ZcompSample,
    weight: CarlemanWeight,
    alphas: AlphaVectors,
    nt: int = 201,
    nx: int = 801,
) -> CarlemanMargin:
    """Evaluate both sides of the inequality by tensor trapezoid quadrature.

    The quadrature error is estimated by re-integrating on the stride-2
    subgrid (second-order quadrature, so a third of the difference bounds the
    fine-grid error); a negative margin smaller than that estimate is noise,
    anything beyond it is a genuine violation.
    """
    if alphas.n_edges != sample.n_edges:
        raise ValueError("alpha vectors and sample disagree on the edge count")
    t = np.linspace(0.0, 1.0, nt)
    x = np.linspace(0.0, sample.support_x, nx)
    alpha = alphas.as_array()
    amax = float(np.max(np.abs(alpha)))
    peak = float(np.max(weight.phi(amax, t[:, None], x[None, :])))
    if 2.0 * peak > _EXP_LIMIT:
        raise WeightOverflowError(f"max phi = {peak:.1f} would overflow exp; reduce mu, R or the support")
    q2 = np.abs(sample.values(t, x)) ** 2
    d2 = np.abs(sample.defect(t, x)) ** 2

    def both(tt, xx, qq2, dd2):
        lhs_sum = 0.0
        rhs_sum = 0.0
        drift = weight.R * tt * (1.0 - tt)
        sink = (1.0 + weight.eps) * weight.R**2 * tt * (1.0 - tt) / (16.0 * weight.mu)
        for k in range(alphas.n_edges):
            arg = alpha[k][:, None, None] * xx[None, None, :] + drift[None, :, None]
            w = np.exp(2.0 * (weight.mu * arg**2 - sink[None, :, None]))
            lhs_sum += _integrate(w * qq2, tt, xx)
            rhs_sum += _integrate(w * dd2, tt, xx)
        return weight.lhs_prefactor * lhs_sum, rhs_sum

    lhs, rhs = both(t, x, q2, d2)
    lhs_c, rhs_c = both(t[::2], x[::2], q2[:, ::2, ::2], d2[:, ::2, ::2])
    err = (abs(lhs - lhs_c) + abs(rhs - rhs_c)) / 3.0
    return CarlemanMargin(lhs=lhs, rhs=rhs, quad_error=err)


def write_margin_csv(rows, path) -> None:
    """rows of (N, seed, mu, eps, R, lhs, rhs, margin)."""
    lines = ["N,seed,mu,eps,R,lhs,rhs,margin"]
    for r in rows:
        lines.append(",".join(repr(v) for v in r))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
