"""The smoothing kernel F_beta, the approximate functional equation and root numbers.

F_beta(u) = (1/2 pi i) int_{(c)} L_inf(s + beta) u^-s ds/s with
L_inf(s) = (2 (2 pi)^-s Gamma(s))^d.  The integral does not depend on c > 0,
so the quadrature line is placed at the saddle point of the integrand's
modulus, which keeps every term of the trapezoid sum of the same size as
the result.  For small u the line is moved left of the pole at s = 0 and the
residue L_inf(beta) is added back.

Kernels used inside sums are tabulated once as piecewise Chebyshev series in
v = log u of F(u) exp(2 pi d u^(1/d)), which removes the dominant decay so
interpolation is accurate in the relative sense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.optimize import brentq
from scipy.special import digamma

from .errors import ComputationError, ConvergenceError, CutoffError, DomainError, RootNumberError
from .numerics import compensated_sum, complex_loggamma

_LOG2 = math.log(2.0)
_LOG2PI = math.log(2.0 * math.pi)


def log_gamma_factor(s, d: int):
    return d * (_LOG2 - np.asarray(s) * _LOG2PI + complex_loggamma(s))


def gamma_factor(s, d: int):
    """L_inf(s) = (2 (2 pi)^-s Gamma(s))^d."""
    if d < 1:
        raise DomainError("d must be >= 1")
    return np.exp(log_gamma_factor(s, d))


def _decay_exponent(d: int, u):
    return 2.0 * math.pi * d * np.asarray(u, dtype=float) ** (1.0 / d)


def _saddle(d: int, sigma: float, logu: float) -> float:
    """Root in c of d (psi(c + sigma) - log 2 pi) - log u - 1/c."""
    lo = max(0.0, -sigma) + 1e-9

    def g(c):
        return d * (digamma(c + sigma) - _LOG2PI) - logu - 1.0 / c

    hi = max(1.0, 2 * lo)
    while g(hi) < 0:
        hi *= 2.0
        if hi > 1e8:
            raise ConvergenceError("saddle point search diverged")
    return brentq(g, lo, hi, xtol=1e-10)


_TAIL_REL = 1e-18
_CHUNK = 256


def _line_sum(d, beta, logu, c, h, shift):
    """Trapezoid sum for the line Re s = c, integrand scaled by exp(shift)."""
    def terms(k):
        s = c + 1j * h * k
        return np.exp(log_gamma_factor(s + beta, d) - s * logu - np.log(s) + shift)

    k0 = np.arange(-_CHUNK, _CHUNK + 1)
    vals = terms(k0)
    peak = np.abs(vals).max()
    parts = [vals]
    for sign in (1, -1):
        start = _CHUNK + 1
        while True:
            k = sign * np.arange(start, start + _CHUNK)
            v = terms(k)
            parts.append(v)
            if np.abs(v).max() < _TAIL_REL * peak:
                break
            start += _CHUNK
            if start > 1_000_000:
                raise ConvergenceError("kernel integrand does not decay along the line")
    allv = np.concatenate(parts)
    return compensated_sum(allv) * h / (2.0 * math.pi), float(np.abs(allv).sum() * h / (2.0 * math.pi))


def kernel_quadrature(d: int, beta, u: float, scaled: bool = False) -> complex:
    """Direct evaluation of F_beta(u) (times exp(2 pi d u^(1/d)) if ``scaled``)."""
    if not u > 0:
        raise DomainError("kernel argument u must be positive")
    beta = complex(beta)
    sigma = beta.real
    logu = math.log(u)
    # always integrate the scaled integrand so large u cannot underflow
    shift = float(_decay_exponent(d, u))
    unscale = 1.0 if scaled else math.exp(-shift)
    c = _saddle(d, sigma, logu)
    if c < 0.5 and sigma >= 0.4:
        # left of s = 0, right of the first gamma pole at s = -beta
        cl = min(0.5 * sigma, 1.0)
        h = min(0.25, cl / 6.0)
        val, _ = _line_sum(d, beta, logu, -cl, h, shift)
        residue = np.exp(complex(log_gamma_factor(beta, d)) + shift)
        return complex((residue + val) * unscale)
    c = max(c, 0.25)
    h = min(0.25, min(c, c + sigma) / 6.0)
    val, _ = _line_sum(d, beta, logu, c, h, shift)
    return complex(val * unscale)


def incomplete_gamma_kernel(beta, u: float) -> complex:
    """The d = 1 closed form 2 (2 pi)^-beta Gamma(beta, 2 pi u)."""
    from .numerics import upper_incomplete_gamma

    beta = complex(beta)
    return complex(2.0 * np.exp(-beta * _LOG2PI) * upper_incomplete_gamma(beta, 2 * math.pi * u))


@dataclass(frozen=True)
class _Band:
    lo: float
    hi: float
    coeffs: np.ndarray


class AFEKernel:
    """Tabulated F_beta for fixed (d, beta), accurate to ``tol`` relative.

    Arguments outside [u_min, u_max] fall back to direct quadrature.
    """

    DEGREE = 20

    def __init__(self, d: int, beta, tol: float = 1e-11, u_min: float = 1e-20, u_max: float | None = None):
        if d < 1:
            raise DomainError("d must be >= 1")
        if not 0 < tol < 1e-3:
            raise DomainError("kernel tolerance must lie in (0, 1e-3)")
        self.d = d
        self.beta = complex(beta)
        self.tol = tol
        if u_max is None:
            # F(u) has dropped by ~1e-45 relative here
            u_max = (45 * math.log(10) / (2 * math.pi * d)) ** d
        self.u_min, self.u_max = u_min, u_max
        self._bands = self._build(math.log(u_min), math.log(u_max))
        self._edges = np.array([b.lo for b in self._bands] + [self._bands[-1].hi])
        self._coeffs = np.array([b.coeffs for b in self._bands])
        self.max_probe_error = self.validate()

    # -- construction

    def _g(self, v: float) -> complex:
        return kernel_quadrature(self.d, self.beta, math.exp(v), scaled=True)

    def _fit(self, lo, hi):
        n = self.DEGREE + 1
        x = np.cos(np.pi * (np.arange(n) + 0.5) / n)
        vals = np.array([self._g(0.5 * (hi + lo) + 0.5 * (hi - lo) * xi) for xi in x])
        cr = cheb.chebfit(x, vals.real, self.DEGREE)
        ci = cheb.chebfit(x, vals.imag, self.DEGREE)
        return cr + 1j * ci, np.abs(vals).max()

    def _build(self, vlo, vhi):
        bands = []
        edges = np.arange(vlo, vhi, 1.0).tolist() + [vhi]
        stack = [(a, b, 0) for a, b in zip(edges[:-1], edges[1:])][::-1]
        while stack:
            a, b, depth = stack.pop()
            coeffs, scale = self._fit(a, b)
            tail = np.abs(coeffs[-3:]).max()
            if tail > 0.05 * self.tol * scale and depth < 8:
                mid = 0.5 * (a + b)
                stack.append((mid, b, depth + 1))
                stack.append((a, mid, depth + 1))
                continue
            bands.append(_Band(a, b, coeffs))
        return bands

    def validate(self, probes_per_band: int = 1) -> float:
        """Max relative deviation from direct quadrature at off-node points."""
        worst = 0.0
        for i, band in enumerate(self._bands):
            for k in range(probes_per_band):
                frac = (0.5 + k + 0.37 * ((i * 7 + k) % 3)) / (probes_per_band + 1)
                v = band.lo + (band.hi - band.lo) * min(frac, 0.97)
                ref = self._g(v)
                got = self._eval_scaled(np.array([v]))[0]
                worst = max(worst, abs(got - ref) / max(abs(ref), 1e-300))
        if worst > self.tol:
            raise ConvergenceError(f"kernel interpolation error {worst:.2e} exceeds tol {self.tol:.1e}")
        return worst

    # -- evaluation

    def _eval_scaled(self, v: np.ndarray) -> np.ndarray:
        idx = np.clip(np.searchsorted(self._edges, v, side="right") - 1, 0, len(self._bands) - 1)
        lo, hi = self._edges[idx], self._edges[idx + 1]
        x = (2.0 * v - (lo + hi)) / (hi - lo)
        b1 = np.zeros(v.shape, dtype=complex)
        b2 = np.zeros(v.shape, dtype=complex)
        for k in range(self.DEGREE, 0, -1):
            b1, b2 = 2.0 * x * b1 - b2 + self._coeffs[idx, k], b1
        return x * b1 - b2 + self._coeffs[idx, 0]

    def __call__(self, u):
        """F_beta(u) for scalar or array u > 0."""
        scalar = np.ndim(u) == 0
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(~(u > 0)):
            raise DomainError("kernel argument u must be positive")
        out = np.empty(u.shape, dtype=complex)
        inside = (u >= self.u_min) & (u <= self.u_max)
        for start in range(0, u.size, 1 << 20):
            sl = slice(start, start + (1 << 20))
            ins = inside[sl]
            if np.any(ins):
                uu = u[sl][ins]
                vals = self._eval_scaled(np.log(uu)) * np.exp(-_decay_exponent(self.d, uu))
                tmp = out[sl]
                tmp[ins] = vals
                out[sl] = tmp
        for i in np.nonzero(~inside)[0]:
            out[i] = kernel_quadrature(self.d, self.beta, float(u[i]))
        return out[0] if scalar else out

    def magnitude_bound(self, u):
        """|F(u)| with the interpolation tolerance folded in."""
        return np.abs(self(u)) * (1.0 + self.tol)


@lru_cache(maxsize=32)
def get_kernel(d: int, beta: complex, tol: float = 1e-11) -> AFEKernel:
    return AFEKernel(d, beta, tol)


# ---------------------------------------------------------------- AFE sums


@lru_cache(maxsize=8)
def _envelope(d: int, size: int) -> np.ndarray:
    from .lfunction import coefficient_envelope

    return coefficient_envelope(d, size)


def envelope(d: int, n_max: int) -> np.ndarray:
    """d_{2d}(n) sqrt(n) for n <= n_max (tables cached in power-of-two sizes)."""
    size = 1 << max(10, int(n_max).bit_length())
    return _envelope(d, size)[: n_max + 1]


def truncation_point(kernel: AFEKernel, scale_x: float, sigma_eff: float, target: float) -> int:
    """Least M with bound(n) = n^(1/2 + 0.05 - sigma_eff) |F(n scale_x)| below ``target`` for n >= M.

    The decay of F is super-exponential, so scanning a geometric grid for
    the first point below target and stepping back one grid cell is safe.
    """
    d = kernel.d
    n = 1.0
    prev = 1.0
    while True:
        u = n * scale_x
        mag = float(np.abs(kernel(u))) if u <= kernel.u_max else 0.0
        bound = mag * n ** (0.55 - sigma_eff) * (1.0 + math.log(n)) ** (2 * d - 1) * n
        if bound < target and u > 1e-3:
            return int(math.ceil(prev)) if prev > 1 else max(1, int(math.ceil(n)))
        prev = n
        n *= 1.02 if n > 50 else 1.25
        if n > 1e13:
            raise ComputationError("kernel does not decay; truncation point not found")


@dataclass(frozen=True, eq=False)
class AFEWeights:
    """Weights w1[n] = n^-beta F_beta(n y) and w2[n] = N^(1-beta) n^(beta-2) F_{2-beta}(n/(N y))."""

    d: int
    beta: complex
    conductor: int
    y: float
    w1: np.ndarray
    w2: np.ndarray
    tail1: float
    tail2: float

    @property
    def m1(self) -> int:
        return self.w1.size - 1

    @property
    def m2(self) -> int:
        return self.w2.size - 1


def afe_weights(d: int, beta, conductor: int, y: float, tol: float = 1e-12) -> AFEWeights:
    beta = complex(beta)
    if not y > 0:
        raise DomainError("y must be positive")
    N = float(conductor)
    k1 = get_kernel(d, beta)
    k2 = get_kernel(d, 2.0 - beta)
    norm2 = abs(np.exp((1.0 - beta) * math.log(N)))
    scale = abs(k1(y)) + norm2 * abs(k2(1.0 / (N * y)))
    target = tol * scale
    m1 = truncation_point(k1, y, beta.real, target)
    m2 = truncation_point(k2, 1.0 / (N * y), 2.0 - beta.real, target / norm2)
    n1 = np.arange(1, m1 + 1, dtype=float)
    n2 = np.arange(1, m2 + 1, dtype=float)
    w1 = np.zeros(m1 + 1, dtype=complex)
    w2 = np.zeros(m2 + 1, dtype=complex)
    w1[1:] = np.exp(-beta * np.log(n1)) * k1(n1 * y)
    w2[1:] = np.exp((1.0 - beta) * math.log(N) + (beta - 2.0) * np.log(n2)) * k2(n2 / (N * y))
    tail1 = _tail_bound(k1, d, m1, y, -beta.real, 1.0)
    tail2 = _tail_bound(k2, d, m2, 1.0 / (N * y), beta.real - 2.0, norm2)
    return AFEWeights(d, beta, int(conductor), float(y), w1, w2, tail1, tail2)


def _tail_bound(kernel, d, m, scale_x, power, factor):
    """sum_{m < n <= 2m+64} d_2d(n) sqrt(n) n^power |F(n scale_x)|; beyond that the
    kernel has decayed by a further factor exceeding the whole window."""
    hi = 2 * m + 64
    n = np.arange(m + 1, hi + 1, dtype=float)
    env = envelope(d, hi)[m + 1:]
    u = n * scale_x
    mags = np.where(u <= kernel.u_max, np.abs(kernel(np.minimum(u, kernel.u_max))), 0.0)
    return float(factor * np.sum(env * n ** power * mags) * (1 + kernel.tol))


@dataclass(frozen=True)
class CompletedValue:
    value: complex
    y_used: float
    truncation_n: int
    error_estimate: float


def _dot(coeffs: np.ndarray, weights: np.ndarray, name: str) -> tuple[complex, float]:
    m = weights.size - 1
    if coeffs.size - 1 < m:
        raise CutoffError(m, coeffs.size - 1)
    terms = coeffs[1: m + 1] * weights[1:]
    return complex(compensated_sum(terms)), float(1e-15 * np.abs(terms).sum() + 1e-300)


def _values(table):
    return table.values if hasattr(table, "values") else np.asarray(table)


def afe_parts(weights: AFEWeights, coeffs, dual_coeffs):
    """(S1, S2, error) with L-hat = S1 + w S2."""
    s1, e1 = _dot(_values(coeffs), weights.w1, "first AFE sum")
    s2, e2 = _dot(_values(dual_coeffs), weights.w2, "second AFE sum")
    return s1, s2, e1 + e2 + weights.tail1, weights.tail2 + e2


def afe_value(beta, y: float, w, coeffs, dual_coeffs, conductor: int, d: int,
              tol: float = 1e-12, weights: AFEWeights | None = None) -> CompletedValue:
    """L-hat(beta) = sum c_n n^-beta F_beta(n y) + w N^(1-beta) sum c*_n n^(beta-2) F_{2-beta}(n/(N y))."""
    if weights is None:
        weights = afe_weights(d, beta, conductor, y, tol)
    s1, s2, err1, err2 = afe_parts(weights, coeffs, dual_coeffs)
    w = complex(w)
    err = err1 + abs(w) * err2
    return CompletedValue(s1 + w * s2, weights.y, max(weights.m1, weights.m2), float(err))


def default_y_pair(conductor: int) -> tuple[float, float]:
    y0 = 1.0 / math.sqrt(conductor)
    return y0 / 1.3, y0 * 1.3


def solve_root_number_from_parts(p1, p2) -> complex:
    """w from (S1, S2, err1, err2) at two y values, with the unit-modulus check."""
    s1a, s2a, e1a, e2a = p1
    s1b, s2b, e1b, e2b = p2
    den = s2b - s2a
    noise = e1a + e1b + e2a + e2b
    if abs(den) < 1e3 * noise or abs(den) == 0:
        raise RootNumberError(f"ill-conditioned root-number solve (|S2(y2)-S2(y1)| = {abs(den):.3e}); try another y pair")
    w = (s1a - s1b) / den
    if abs(abs(w) - 1.0) > 1e-4:
        raise RootNumberError(f"solved root number has |w| = {abs(w):.8f}; coefficients or conductor inconsistent")
    return complex(w)


def solve_root_number(beta, coeffs, dual_coeffs, conductor: int, d: int,
                      y1: float | None = None, y2: float | None = None, tol: float = 1e-12) -> complex:
    """w = (S1(y1) - S1(y2)) / (N^(1-beta) (S2(y2) - S2(y1)))."""
    if y1 is None or y2 is None:
        y1, y2 = default_y_pair(conductor)
    if y1 == y2:
        raise DomainError("need two distinct y values")
    p1 = afe_parts(afe_weights(d, beta, conductor, y1, tol), coeffs, dual_coeffs)
    p2 = afe_parts(afe_weights(d, beta, conductor, y2, tol), coeffs, dual_coeffs)
    return solve_root_number_from_parts(p1, p2)


@dataclass(frozen=True)
class FEResidual:
    residual: float
    error_estimate: float


def functional_equation_check(beta, w, coeffs, dual_coeffs, conductor: int, d: int,
                              tol: float = 1e-12) -> FEResidual:
    """|L-hat(rho, beta) - w N^(1-beta) L-hat(rho*, 2-beta)| with the two sides at unrelated y."""
    beta = complex(beta)
    w = complex(w)
    y0 = 1.0 / math.sqrt(conductor)
    lhs = afe_value(beta, y0 * 1.25, w, coeffs, dual_coeffs, conductor, d, tol)
    w_dual = 1.0 / w
    rhs = afe_value(2.0 - beta, y0 / 1.6, w_dual, dual_coeffs, coeffs, conductor, d, tol)
    factor = w * np.exp((1.0 - beta) * math.log(conductor))
    res = abs(lhs.value - factor * rhs.value)
    return FEResidual(float(res), float(lhs.error_estimate + abs(factor) * rhs.error_estimate))


def functional_equation_residual(beta, w, coeffs, dual_coeffs, conductor: int, d: int, tol: float = 1e-12) -> float:
    return functional_equation_check(beta, w, coeffs, dual_coeffs, conductor, d, tol).residual


def direct_series(coeffs, beta, n_max: int) -> complex:
    """sum_{n <= n_max} c_n n^-beta (valid as an L-value for Re beta > 3/2)."""
    c = _values(coeffs)
    if c.size - 1 < n_max:
        raise CutoffError(n_max, c.size - 1)
    n = np.arange(1, n_max + 1, dtype=float)
    return complex(compensated_sum(c[1: n_max + 1] * np.exp(-complex(beta) * np.log(n))))
