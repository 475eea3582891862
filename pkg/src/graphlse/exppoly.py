"""Layer transfer matrices and almost-periodic exponential polynomials.

A coefficient line with N layers sigma = a_i^{-2} couples left- and
right-moving plane-wave amplitudes across each jump through a 2x2 transfer
matrix.  Products of those matrices have entries that are finite sums

    sum_m  c_m  exp(+-2 i xi l (m . a_mid)),   a_mid = (a_2, ..., a_{N-1}),

with integer multi-indices m, which this module manipulates exactly: the
E / F recursion that generates the entries, the scattering coefficients built
from them, and the constructive Wiener-algebra inversion of the denominator
entry whose coefficients define the layered propagation kernel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

__all__ = [
    "LayerParams",
    "ExpPolynomial",
    "WienerSeries",
    "DegenerateDenominatorError",
    "ContractionError",
    "layer_params",
    "transfer_matrix",
    "chain_product",
    "ef_recursion",
    "chain_lower_entries",
    "determinant_product",
    "alpha_prefactor",
    "coefficients_C",
    "invert_E",
    "write_series_csv",
]

PRUNE_TOL = 1e-16  # coefficients below this magnitude are dropped


class DegenerateDenominatorError(ArithmeticError):
    """|E_{N-1,1}| fell below tolerance; the theory forbids this, so it flags a bug."""


class ContractionError(ArithmeticError):
    """Empirical contraction ratio reached 1; the theory forbids this."""


@dataclass(frozen=True)
class LayerParams:
    """Layer amplitudes a_1..a_N with breakpoint spacing l and derived jump data.

    delta_j = a_j - a_{j+1}, eps_j = a_j + a_{j+1}, gamma_j = delta_j / eps_j
    for junctions j = 1..N-1; |gamma_j| < 1 always since the a_i are positive.
    """

    a: tuple[float, ...]
    l: float
    delta: tuple[float, ...]
    eps: tuple[float, ...]
    gamma: tuple[float, ...]

    @property
    def n_layers(self) -> int:
        return len(self.a)

    @property
    def a_mid(self) -> tuple[float, ...]:
        """The contraction vector (a_2, ..., a_{N-1}) of the exponent lattice."""
        return self.a[1:-1]

    def lam(self, j: int, xi) -> np.ndarray:
        """Unimodular phase exp(-i xi delta_j (j-1) l), j in 1..N-1."""
        self._check_j(j)
        return np.exp(-1j * np.asarray(xi, dtype=float) * self.delta[j - 1] * (j - 1) * self.l)

    def mu(self, j: int, xi) -> np.ndarray:
        """gamma_j exp(-i xi eps_j (j-1) l), magnitude |gamma_j|."""
        self._check_j(j)
        return self.gamma[j - 1] * np.exp(
            -1j * np.asarray(xi, dtype=float) * self.eps[j - 1] * (j - 1) * self.l
        )

    def _check_j(self, j: int) -> None:
        if not 1 <= j <= self.n_layers - 1:
            raise ValueError(f"junction index {j} outside 1..{self.n_layers - 1}")


def layer_params(a, l: float = 1.0) -> LayerParams:
    a = tuple(float(v) for v in a)
    if len(a) < 1:
        raise ValueError("need at least one layer")
    if any(v <= 0 for v in a):
        raise ValueError("layer amplitudes must be positive")
    if l <= 0:
        raise ValueError("breakpoint spacing must be positive")
    delta = tuple(a[j] - a[j + 1] for j in range(len(a) - 1))
    eps = tuple(a[j] + a[j + 1] for j in range(len(a) - 1))
    gamma = tuple(d / e for d, e in zip(delta, eps))
    return LayerParams(a, float(l), delta, eps, gamma)


@dataclass(frozen=True)
class ExpPolynomial:
    """Finite sum  sum_m terms[m] exp(sign * 2 i xi l (m . a_mid)).

    Multi-indices m run over the middle layers; conjugation flips ``sign`` and
    conjugates the coefficients.  The value at xi = 0 is the coefficient sum.
    """

    terms: Mapping[tuple[int, ...], complex]
    sign: int
    a_mid: tuple[float, ...]
    l: float

    def __post_init__(self):
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        width = len(self.a_mid)
        for idx in self.terms:
            if len(idx) != width:
                raise ValueError("multi-index width does not match a_mid")

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape, dtype=complex)
        for idx, c in self.terms.items():
            s = sum(n * am for n, am in zip(idx, self.a_mid))
            out += c * np.exp(self.sign * 2j * xi * self.l * s)
        return out

    @property
    def coefficient_sum(self) -> complex:
        return complex(sum(self.terms.values()))

    def conj(self) -> "ExpPolynomial":
        return ExpPolynomial(
            {k: complex(v).conjugate() for k, v in self.terms.items()}, -self.sign, self.a_mid, self.l
        )

    def __add__(self, other: "ExpPolynomial") -> "ExpPolynomial":
        self._compatible(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return ExpPolynomial(_prune(out), self.sign, self.a_mid, self.l)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return ExpPolynomial(
                _prune({k: other * v for k, v in self.terms.items()}), self.sign, self.a_mid, self.l
            )
        self._compatible(other)
        out: dict[tuple[int, ...], complex] = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                key = tuple(i + j for i, j in zip(k1, k2))
                out[key] = out.get(key, 0.0) + v1 * v2
        return ExpPolynomial(_prune(out), self.sign, self.a_mid, self.l)

    __rmul__ = __mul__

    def reflect(self, shift: tuple[int, ...]) -> "ExpPolynomial":
        """Multiply by exp(-sign * 2 i xi l (shift . a_mid)) and flip the sign field.

        The new indices are shift - m; they must stay componentwise >= 0,
        which is exactly the support statement behind the kernel expansion.
        """
        out = {}
        for idx, c in self.terms.items():
            key = tuple(s - i for s, i in zip(shift, idx))
            if min(key, default=0) < 0:
                raise ValueError("reflection produced a negative multi-index")
            out[key] = out.get(key, 0.0) + c
        return ExpPolynomial(out, -self.sign, self.a_mid, self.l)

    def _compatible(self, other: "ExpPolynomial") -> None:
        if self.sign != other.sign or self.a_mid != other.a_mid or self.l != other.l:
            raise ValueError("exponential polynomials live on different lattices")


def _prune(terms: dict) -> dict:
    return {k: complex(v) for k, v in terms.items() if abs(v) > PRUNE_TOL}


def _zero_index(params: LayerParams) -> tuple[int, ...]:
    return (0,) * max(params.n_layers - 2, 0)


def transfer_matrix(j: int, xi: float, params: LayerParams) -> np.ndarray:
    """Conjugated transfer matrix across junction j at frequency xi.

    (eps_j / 2 a_j) [[lam_j, conj(mu_j)], [mu_j, conj(lam_j)]]; its determinant
    is a_{j+1}/a_j independently of xi.
    """
    params._check_j(j)
    lam = complex(params.lam(j, xi))
    mu = complex(params.mu(j, xi))
    pref = params.eps[j - 1] / (2.0 * params.a[j - 1])
    return pref * np.array([[lam, np.conj(mu)], [mu, np.conj(lam)]])


def chain_product(j: int, k: int, xi: float, params: LayerParams) -> np.ndarray:
    """Brute-force product T_j(xi) ... T_k(xi) (left multiplication), k <= j."""
    if k > j:
        raise ValueError("chain product needs k <= j")
    params._check_j(k)
    params._check_j(j)
    M = np.eye(2, dtype=complex)
    for m in range(k, j + 1):
        M = transfer_matrix(m, xi, params) @ M
    return M


def ef_recursion(j: int, k: int, params: LayerParams) -> tuple[ExpPolynomial, ExpPolynomial]:
    """Exact E_{j,k} (sign +1) and F_{j,k} (sign -1) polynomials, 1 <= k <= j <= N-1.

    Seeds E_{k,k} = 1, F_{k,k} = gamma_k; each junction m in (k, j] updates

        E_m = E_{m-1} + gamma_m e^{+2 i xi l (a_{k+1}+...+a_m)} F_{m-1}
        F_m = F_{m-1} + gamma_m e^{-2 i xi l (a_{k+1}+...+a_m)} E_{m-1}

    and all coefficients are real polynomials in the gamma's with multi-index
    entries in {0, 1}.
    """
    if not 1 <= k <= j <= params.n_layers - 1:
        raise ValueError(f"need 1 <= k <= j <= {params.n_layers - 1}")
    zero = _zero_index(params)
    width = len(zero)
    E = ExpPolynomial({zero: 1.0}, +1, params.a_mid, params.l)
    F = ExpPolynomial({zero: params.gamma[k - 1]}, -1, params.a_mid, params.l)
    for m in range(k + 1, j + 1):
        shift = [0] * width
        for q in range(k + 1, m + 1):
            shift[q - 2] = 1  # position of a_q inside a_mid
        shift = tuple(shift)
        g = params.gamma[m - 1]
        E_new = E + g * F.reflect(shift)
        F_new = F + g * E.reflect(shift)
        E, F = E_new, F_new
    return E, F


def chain_lower_entries(j: int, k: int, xi, params: LayerParams) -> tuple[np.ndarray, np.ndarray]:
    """Closed forms of entries (2,1) and (2,2) of T_j ... T_k from the E/F polynomials."""
    E, F = ef_recursion(j, k, params)
    xi = np.asarray(xi, dtype=float)
    pref = 1.0
    lams = np.ones(xi.shape, dtype=complex)
    for m in range(k, j + 1):
        pref *= params.eps[m - 1] / (2.0 * params.a[m - 1])
        lams = lams * params.lam(m, xi)
    phase = np.exp(-2j * xi * params.l * (k - 1) * params.a[k - 1])
    entry_21 = pref * np.conj(lams) * phase * F(xi)
    entry_22 = pref * np.conj(lams) * np.conj(E(xi))
    return entry_21, entry_22


def determinant_product(j: int, k: int, params: LayerParams) -> float:
    """|A_{j,k}|^2 - |B_{j,k}|^2, which is xi independent:
    prod_{m=k..j} (eps_m / 2 a_m)^2 (1 - gamma_m^2)."""
    if not 1 <= k <= j <= params.n_layers - 1:
        raise ValueError("index out of range")
    out = 1.0
    for m in range(k, j + 1):
        out *= (params.eps[m - 1] / (2.0 * params.a[m - 1])) ** 2 * (1.0 - params.gamma[m - 1] ** 2)
    return out


def alpha_prefactor(k: int, params: LayerParams) -> float:
    """Transmission prefactor alpha_k = prod_{m<k} (eps_m / 2 a_m)(1 - gamma_m^2); alpha_1 = 1."""
    if not 1 <= k <= params.n_layers:
        raise ValueError("index out of range")
    out = 1.0
    for m in range(1, k):
        out *= params.eps[m - 1] / (2.0 * params.a[m - 1]) * (1.0 - params.gamma[m - 1] ** 2)
    return out


def _denominator(params: LayerParams, xi) -> np.ndarray:
    """conj(E)_{N-1,1}(xi) with a degeneracy guard."""
    N = params.n_layers
    if N == 2:
        return np.ones(np.shape(np.asarray(xi, dtype=float)), dtype=complex)
    E, _ = ef_recursion(N - 1, 1, params)
    val = np.conj(E(xi))
    if np.min(np.abs(val)) < 1e-12:
        raise DegenerateDenominatorError("|E_{N-1,1}| < 1e-12 on the sampled frequencies")
    return val


def coefficients_C(k: int, xi, params: LayerParams) -> tuple[np.ndarray, np.ndarray]:
    """Scattering coefficients (C^-_{1k}(xi), C^+_{1k}(xi)) of the first-row kernels.

    C^-_{11} = a_1 / 2 pi and C^+_{1N} = 0 always; the rest are quotients of
    conjugated E / F polynomials against conj(E_{N-1,1}), scaled by alpha_k and
    the accumulated lambda phases.
    """
    N = params.n_layers
    if not 1 <= k <= N:
        raise ValueError("index out of range")
    xi = np.asarray(xi, dtype=float)
    c11 = params.a[0] / (2.0 * math.pi)
    ones = np.ones(xi.shape, dtype=complex)
    if N == 1:
        return c11 * ones, 0.0 * ones
    denom = _denominator(params, xi)
    if k == 1:
        _, F = ef_recursion(N - 1, 1, params)
        return c11 * ones, -c11 * F(xi) / denom
    lam_acc = np.ones(xi.shape, dtype=complex)
    for m in range(1, k):
        lam_acc = lam_acc * params.lam(m, xi)
    pref = alpha_prefactor(k, params) / np.conj(lam_acc) * c11
    if k == N:
        return pref / denom, 0.0 * ones
    E, F = ef_recursion(N - 1, k, params)
    cminus = pref * np.conj(E(xi)) / denom
    cplus = -pref * np.exp(-2j * xi * params.l * (k - 1) * params.a[k - 1]) * F(xi) / denom
    return cminus, cplus


@dataclass(frozen=True)
class WienerSeries:
    """Truncated nonnegative-index expansion of 1 / E_{N-1,1}.

    ``poly`` has sign +1 and real coefficients; the same coefficients expand
    1 / conj(E_{N-1,1}) with sign -1.  ``rho`` is the largest |F_{j,1}/E_{j,1}|
    seen on the sampled frequency grid (the empirical contraction ratio of the
    constructive inversion; the true supremum over all frequencies may be
    slightly larger) and ``tail_bound`` = rho^(order+1) / (1 - rho).
    """

    poly: ExpPolynomial
    order: int
    rho: float
    tail_bound: float
    params: LayerParams

    @property
    def coefficients(self) -> dict[tuple[int, ...], float]:
        return {k: v.real for k, v in self.poly.terms.items()}

    def residual_on(self, xi) -> float:
        """max |S(xi) * conj(E_{N-1,1})(xi) - 1| over the given frequencies."""
        denom = _denominator(self.params, xi)
        val = np.conj(self.poly(xi))
        return float(np.max(np.abs(val * denom - 1.0)))


def default_xi_grid(params: LayerParams, n: int = 2048) -> np.ndarray:
    """Frequencies spanning two periods of the slowest exponent (or [-8, 8])."""
    if params.n_layers > 2 and params.a_mid:
        span = 2.0 * math.pi / (params.l * min(params.a_mid))
    else:
        span = 4.0
    return np.linspace(-2.0 * span, 2.0 * span, n)


def invert_E(params: LayerParams, K: int, xi_grid: np.ndarray | None = None) -> WienerSeries:
    """Constructive Wiener inversion of E_{N-1,1}, truncated at total weight K.

    Follows the level-by-level geometric expansion: with
    G_j = e^{2 i xi l (a_2+...+a_{j-1})} F_{j-1,1} / E_{j-1,1} mapping into the
    unit disk, 1/E_{j,1} = (1/E_{j-1,1}) sum_n (-gamma_j e^{2 i xi l a_j} G_j)^n.
    Every retained multi-index is componentwise >= 0.  The empirical
    contraction ratio rho is measured on ``xi_grid`` and certifies the
    truncation tail as rho^(K+1)/(1-rho).
    """
    if K < 0:
        raise ValueError("truncation order must be >= 0")
    N = params.n_layers
    zero = _zero_index(params)
    width = len(zero)
    if xi_grid is None:
        xi_grid = default_xi_grid(params)

    def prune_weight(p: ExpPolynomial) -> ExpPolynomial:
        kept = {idx: c for idx, c in p.terms.items() if sum(idx) <= K}
        return ExpPolynomial(_prune(kept), p.sign, p.a_mid, p.l)

    inv = ExpPolynomial({zero: 1.0}, +1, params.a_mid, params.l)
    rho = 0.0
    for j in range(1, N):
        E_j, F_j = ef_recursion(j, 1, params)
        ratio = np.abs(F_j(xi_grid) / E_j(xi_grid))
        rho = max(rho, float(np.max(ratio)))
    if rho >= 1.0:
        raise ContractionError(f"contraction ratio {rho} >= 1 on the frequency grid")

    for j in range(2, N):
        E_prev, F_prev = ef_recursion(j - 1, 1, params)
        shift = [0] * width
        for q in range(2, j):
            shift[q - 2] = 1
        G = prune_weight(F_prev.reflect(tuple(shift)) * inv)
        g = params.gamma[j - 1]
        unit = [0] * width
        unit[j - 2] = 1
        unit = tuple(unit)
        term = ExpPolynomial({zero: 1.0}, +1, params.a_mid, params.l)
        series = ExpPolynomial({zero: 1.0}, +1, params.a_mid, params.l)
        for _ in range(K):
            term = prune_weight(term * G)
            term = ExpPolynomial(
                _prune({tuple(i + u for i, u in zip(idx, unit)): -g * c for idx, c in term.terms.items()}),
                +1,
                params.a_mid,
                params.l,
            )
            term = prune_weight(term)
            if not term.terms:
                break
            series = series + term
        inv = prune_weight(inv * series)

    bad = [idx for idx in inv.terms if min(idx, default=0) < 0]
    if bad:
        raise AssertionError(f"negative multi-index in inversion output: {bad[:3]}")
    imag = max((abs(c.imag) for c in inv.terms.values()), default=0.0)
    if imag > 1e-12:
        raise AssertionError("inversion coefficients should be real")
    tail = rho ** (K + 1) / (1.0 - rho)
    return WienerSeries(poly=inv, order=K, rho=rho, tail_bound=tail, params=params)


def write_series_csv(series: WienerSeries, path) -> None:
    """Dump: header with (N, a, l, K, rho), then rows n_2..n_{N-1}, re_c, im_c."""
    p = series.params
    a_txt = " ".join(repr(v) for v in p.a)
    lines = [
        f"# N={p.n_layers} a=[{a_txt}] l={p.l!r} K={series.order} rho={series.rho!r}",
        ",".join([f"n_{m}" for m in range(2, p.n_layers)] + ["re_c", "im_c"]),
    ]
    for idx in sorted(series.poly.terms):
        c = complex(series.poly.terms[idx])
        lines.append(",".join([str(i) for i in idx] + [repr(c.real), repr(c.imag)]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
