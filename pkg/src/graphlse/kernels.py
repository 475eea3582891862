"""Exact propagation kernels for the layered line and the half-line solution map.

Everything here is built from the free kernel

    k_t(z) = exp(i z^2 / 4t) / sqrt(4 pi i t),

the layered kernel h_t (a Wiener-series combination of shifted copies of k_t)
and finite atom sums over them.  The observation point stays on the leftmost
layer (x <= 0); the solution there is a sum of integrals of first-row kernels
p_t^{1,k} against the initial data on each layer, or equivalently a single
free convolution (k_t * eta)(a_1 x) against a transported source profile eta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .evolution import PiecewiseCoefficient
from .exppoly import LayerParams, WienerSeries, alpha_prefactor, ef_recursion, layer_params

__all__ = [
    "KernelAtom",
    "SourceAtom",
    "EtaProfile",
    "QuadratureDomainError",
    "free_kernel",
    "kernel_h",
    "h_atoms",
    "kernel_p1k",
    "eta_profile",
    "solve_negative_halfline",
    "two_step_psi",
]


class QuadratureDomainError(ValueError):
    """The sampled initial data does not cover enough of the line for the target accuracy."""


def free_kernel(t: float, z) -> np.ndarray:
    """k_t(z) with the principal square-root branch for t > 0; k_{-t} = conj(k_t)."""
    if t == 0:
        raise ValueError("the free kernel is singular at t = 0")
    z = np.asarray(z, dtype=float)
    if t > 0:
        return np.exp(1j * z**2 / (4.0 * t)) / np.sqrt(4j * math.pi * t)
    return np.conj(np.exp(1j * z**2 / (-4.0 * t)) / np.sqrt(-4j * math.pi * t))


@dataclass(frozen=True)
class KernelAtom:
    """One weighted, shifted copy of the free kernel: weight * k_t(scale * x + shift)."""

    weight: complex
    scale: float
    shift: float

    def __post_init__(self):
        if self.scale == 0:
            raise ValueError("atom scale must be nonzero")

    def __call__(self, t: float, x) -> np.ndarray:
        return self.weight * free_kernel(t, self.scale * np.asarray(x, dtype=float) + self.shift)


def h_atoms(series: WienerSeries) -> tuple[KernelAtom, ...]:
    """h_t(x) = sum_m c_m k_t(x - 2 l (m . a_mid)) as kernel atoms."""
    p = series.params
    out = []
    for idx, c in series.coefficients.items():
        shift = 2.0 * p.l * sum(n * am for n, am in zip(idx, p.a_mid))
        out.append(KernelAtom(c, 1.0, -shift))
    return tuple(out)


def kernel_h(t: float, x, series: WienerSeries) -> np.ndarray:
    """Layered kernel h_t(x); reduces to the free kernel when there are two layers."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=complex)
    for atom in h_atoms(series):
        out += atom(t, x)
    return out


def h_magnitude_bound(t: float, series: WienerSeries) -> float:
    """sup_x |h_t(x)| <= (sum |c_m|) / sqrt(4 pi |t|) since the phases are unimodular."""
    return sum(abs(c) for c in series.coefficients.values()) / math.sqrt(4.0 * math.pi * abs(t))


def _layer_interval(params: LayerParams, k: int) -> tuple[float, float]:
    N = params.n_layers
    l = params.l
    if k == 1:
        return (-math.inf, 0.0)
    if k == N:
        return ((N - 2) * l, math.inf)
    return ((k - 2) * l, (k - 1) * l)


def _p_terms(params: LayerParams, k: int) -> list[tuple[complex, float, float]]:
    """Terms (weight, y_coeff, const) with kernel argument a_1 x + y_coeff * y + const.

    The k = 1 direct term is special: it rides on k_t instead of h_t and is
    returned by _direct_term instead.
    """
    N = params.n_layers
    a = params.a
    l = params.l
    a1 = a[0]
    terms: list[tuple[complex, float, float]] = []
    if k == 1:
        _, F = ef_recursion(N - 1, 1, params)
        for idx, c in F.terms.items():
            shift = 2.0 * l * sum(n * am for n, am in zip(idx, params.a_mid))
            terms.append((-a1 * c, +a1, -shift))
        return terms
    if k == N:
        al = alpha_prefactor(N, params)
        const = a[N - 1] * (N - 2) * l - l * sum(a[1 : N - 1])
        terms.append((a1 * al, -a[N - 1], const))
        return terms
    al = alpha_prefactor(k, params)
    base = -l * sum(a[1:k])
    E, F = ef_recursion(N - 1, k, params)
    for idx, c in E.terms.items():
        shift = 2.0 * l * sum(n * am for n, am in zip(idx, params.a_mid))
        terms.append((a1 * al * c, -a[k - 1], a[k - 1] * (k - 1) * l + base - shift))
    for idx, c in F.terms.items():
        shift = 2.0 * l * sum(n * am for n, am in zip(idx, params.a_mid))
        terms.append((-a1 * al * c, +a[k - 1], -a[k - 1] * (k - 1) * l + base - shift))
    return terms


def kernel_p1k(k: int, t: float, x, y, params: LayerParams, series: WienerSeries) -> np.ndarray:
    """First-row kernel p_t^{1,k}(x, y) for observation x <= 0 and source y in layer k."""
    N = params.n_layers
    if not 1 <= k <= N:
        raise ValueError("layer index out of range")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x > 1e-12):
        raise ValueError("first-row kernels are defined for observation points x <= 0")
    lo, hi = _layer_interval(params, k)
    if np.any(y < lo - 1e-9) or np.any(y > hi + 1e-9):
        raise ValueError(f"source points outside layer {k} = ({lo}, {hi})")
    a1 = params.a[0]
    out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    if k == 1:
        out = out + a1 * free_kernel(t, a1 * x - a1 * y)
    for w, ycoef, const in _p_terms(params, k):
        out = out + w * kernel_h(t, a1 * x + ycoef * y + const, series)
    return out


@dataclass(frozen=True)
class SourceAtom:
    """Affine transport of a source interval onto the convolution axis.

    Contributes  weight * integral_{y_lo}^{y_hi} k_t(X - (scale y + shift)) u0(y) dy
    to the solution at X = a_1 x, and  (weight/|scale|) u0((z - shift)/scale)
    on the image interval to the transported profile eta(z).
    """

    weight: complex
    scale: float
    shift: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if self.scale == 0:
            raise ValueError("atom scale must be nonzero")
        if not self.y_lo < self.y_hi:
            raise ValueError("empty source interval")

    def z_interval(self) -> tuple[float, float]:
        za = self.scale * self.y_lo + self.shift
        zb = self.scale * self.y_hi + self.shift
        return (za, zb) if za < zb else (zb, za)

    def eta_values(self, u0: Callable, z) -> np.ndarray:
        # half-open (lo, hi] so that stacked atoms define the profile once at
        # shared endpoints (the direct copy owns y = 0, the psi part does not)
        z = np.asarray(z, dtype=float)
        y = (z - self.shift) / self.scale
        lo, hi = self.z_interval()
        mask = (z > lo) & (z <= hi)
        out = np.zeros(z.shape, dtype=complex)
        if np.any(mask):
            out[mask] = (self.weight / abs(self.scale)) * np.asarray(u0(y[mask]), dtype=complex)
        return out


def _psi_source_atoms(params: LayerParams) -> tuple[SourceAtom, ...]:
    """Atoms of the positively supported profile psi (the h_t part of the solution).

    Obtained by the changes of variables that turn every h_t integral over a
    layer into an integral over (0, infinity); each image interval indeed
    lies in z >= 0.
    """
    N = params.n_layers
    atoms: list[SourceAtom] = []
    for k in range(1, N + 1):
        lo, hi = _layer_interval(params, k)
        for w, ycoef, const in _p_terms(params, k):
            # kernel argument a1 x + ycoef y + const = X - z with z = -ycoef y - const
            atoms.append(SourceAtom(w, -ycoef, -const, lo, hi))
    for atom in atoms:
        lo, _ = atom.z_interval()
        if lo < -1e-12:
            raise AssertionError("psi atom spills onto the negative axis")
    return tuple(atoms)


@dataclass(frozen=True)
class EtaProfile:
    """The transported source eta with (k_t * eta)(a_1 x) equal to the solution at x <= 0.

    eta agrees with u0(y / a_1) exactly on y <= 0 (the direct atom) and adds
    positively supported psi copies shifted along the Wiener lattice.  The
    profile stores atoms acting on u0, plus optionally u0 itself so it can be
    evaluated pointwise.
    """

    atoms: tuple[SourceAtom, ...]
    front_scale: float
    u0: Callable | None = None

    def __call__(self, y) -> np.ndarray:
        if self.u0 is None:
            raise ValueError("profile was built without initial data bound to it")
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape, dtype=complex)
        for atom in self.atoms:
            out += atom.eta_values(self.u0, y)
        return out

    def convolve(self, t: float, x, u0_nodes: np.ndarray, u0_values: np.ndarray) -> np.ndarray:
        """(k_t * eta)(front_scale * x) by transporting each atom back to the
        u0 sample grid (trapezoid in the source variable)."""
        x = np.asarray(x, dtype=float)
        X = self.front_scale * x
        out = np.zeros(x.shape, dtype=complex)
        for atom in self.atoms:
            ys, vals = _restrict(u0_nodes, u0_values, atom.y_lo, atom.y_hi)
            if len(ys) < 2:
                continue
            kern = free_kernel(t, X[:, None] - (atom.scale * ys + atom.shift)[None, :])
            out += atom.weight * np.trapezoid(kern * vals[None, :], ys, axis=1)
        return out


def eta_profile(params: LayerParams, series: WienerSeries, u0: Callable | None = None) -> EtaProfile:
    """Assemble eta = direct copy of u0 on y <= 0 plus the Wiener-shifted psi atoms."""
    a1 = params.a[0]
    atoms = [SourceAtom(a1, a1, 0.0, -math.inf, 0.0)]
    psi = _psi_source_atoms(params)
    for idx, c in series.coefficients.items():
        lattice = 2.0 * params.l * sum(n * am for n, am in zip(idx, params.a_mid))
        for atom in psi:
            atoms.append(
                SourceAtom(c * atom.weight, atom.scale, atom.shift + lattice, atom.y_lo, atom.y_hi)
            )
    return EtaProfile(tuple(atoms), front_scale=a1, u0=u0)


def _restrict(nodes: np.ndarray, values: np.ndarray, lo: float, hi: float):
    mask = (nodes >= lo - 1e-12) & (nodes <= hi + 1e-12)
    return nodes[mask], values[mask]


def _tail_estimate(nodes, values, t, weight_sum) -> float:
    mag = abs(values[0]) + abs(values[-1])
    return mag * weight_sum / math.sqrt(4.0 * math.pi * abs(t))


def solve_negative_halfline(
    u0: tuple[np.ndarray, np.ndarray],
    sigma: PiecewiseCoefficient,
    t: float,
    x_grid: np.ndarray,
    series: WienerSeries,
    guard_tol: float = 1e-6,
) -> np.ndarray:
    """Solution of the layered line problem at time t on observation points x <= 0.

    ``u0`` is (nodes, values) sampling the initial data on a grid that covers
    its support; the integrals over each layer use trapezoid quadrature on the
    given nodes.  Fails when the sampled data is visibly truncated (boundary
    samples too large for the requested accuracy).
    """
    if t == 0:
        raise ValueError("representation is for t != 0")
    nodes, values = (np.asarray(u0[0], dtype=float), np.asarray(u0[1], dtype=complex))
    if nodes.shape != values.shape or nodes.ndim != 1:
        raise ValueError("u0 must be (nodes, values) arrays of equal length")
    x_grid = np.asarray(x_grid, dtype=float)
    if np.any(x_grid > 1e-12):
        raise ValueError("observation points must satisfy x <= 0")
    params = layer_params(sigma.values, sigma.spacing)
    weight_sum = sum(abs(c) for c in series.coefficients.values()) + 1.0
    scale = float(np.max(np.abs(values))) or 1.0
    if _tail_estimate(nodes, values, t, weight_sum) > guard_tol * scale:
        raise QuadratureDomainError(
            "initial data is not small at the sampled domain ends; enlarge the grid"
        )
    a1 = params.a[0]
    out = np.zeros(x_grid.shape, dtype=complex)
    for k in range(1, params.n_layers + 1):
        lo, hi = _layer_interval(params, k)
        ys, vals = _restrict(nodes, values, lo, hi)
        if len(ys) < 2:
            continue
        if k == 1:
            kern = free_kernel(t, a1 * x_grid[:, None] - a1 * ys[None, :])
            out += a1 * np.trapezoid(kern * vals[None, :], ys, axis=1)
        for w, ycoef, const in _p_terms(params, k):
            args = a1 * x_grid[:, None] + ycoef * ys[None, :] + const
            out += w * np.trapezoid(kernel_h(t, args, series) * vals[None, :], ys, axis=1)
    return out


def two_step_psi(u0: Callable, a1: float, a2: float) -> tuple[EtaProfile, EtaProfile]:
    """The two transported profiles of a two-layer line.

    psi solves the x < 0 side through (k_t * psi)(a_1 x); psi_tilde the x > 0
    side through (k_t * psi_tilde)(a_2 x).  The reflection and transmission
    weights (a_2 - a_1)/(a_1 + a_2) and 2 a_1/(a_1 + a_2) sum to one, so equal
    layers collapse psi to the plain rescaled copy of u0.
    """
    if a1 <= 0 or a2 <= 0:
        raise ValueError("layer amplitudes must be positive")
    refl = (a2 - a1) / (a1 + a2)
    psi = EtaProfile(
        (
            SourceAtom(a1, a1, 0.0, -math.inf, 0.0),
            SourceAtom(refl * a1, -a1, 0.0, -math.inf, 0.0),
            SourceAtom((2.0 * a1 / (a1 + a2)) * a2, a2, 0.0, 0.0, math.inf),
        ),
        front_scale=a1,
        u0=u0,
    )
    psit = EtaProfile(
        (
            SourceAtom((2.0 * a2 / (a1 + a2)) * a1, a1, 0.0, -math.inf, 0.0),
            SourceAtom(a2, a2, 0.0, 0.0, math.inf),
            SourceAtom(-refl * a2, -a2, 0.0, 0.0, math.inf),
        ),
        front_scale=a2,
        u0=u0,
    )
    return psi, psit
