"""Elliptic-curve local data and Dirichlet coefficients of L(E, rho, s).

The Euler factor at q is P_q(E, rho, q^-s)^-1 with
P_q(T) = det(1 - Frob_q^-1 T | (H^1(E) (x) V_rho)^{I_q}).  At good q, if the
Frobenius eigenvalues on H^1 are alpha, beta and Q(T) is the local
polynomial of rho, then P_q(T) = Q(alpha T) Q(beta T).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from sympy import factorint, sieve

from . import _pointcount
from .artin import ArtinRep, CharacterSum, lemma2_threshold
from .characters import DirichletCharacter
from .errors import ComputationError, DomainError, UnsupportedConfigurationError


class Reduction(enum.Enum):
    GOOD = "good"
    SPLIT_MULT = "split_mult"
    NONSPLIT_MULT = "nonsplit_mult"
    ADDITIVE = "additive"


@dataclass(frozen=True)
class EllipticCurve:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    conductor: int
    b2: int = field(init=False)
    b4: int = field(init=False)
    b6: int = field(init=False)
    b8: int = field(init=False)
    c4: int = field(init=False)
    c6: int = field(init=False)
    discriminant: int = field(init=False)

    def __post_init__(self):
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        c4 = b2 * b2 - 24 * b4
        c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
        disc = -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        if disc == 0:
            raise DomainError("singular Weierstrass equation (discriminant 0)")
        for name, value in zip(("b2", "b4", "b6", "b8", "c4", "c6", "discriminant"),
                               (b2, b4, b6, b8, c4, c6, disc)):
            object.__setattr__(self, name, value)
        if self.conductor < 1:
            raise DomainError("conductor must be positive")
        bad_n = set(factorint(self.conductor))
        bad_d = set(factorint(abs(disc)))
        if bad_n != bad_d:
            raise DomainError(
                f"conductor {self.conductor} and discriminant {disc} have different prime support; "
                "the model must be minimal"
            )

    @classmethod
    def from_ainvs(cls, ainvs, conductor: int) -> EllipticCurve:
        if len(ainvs) != 5:
            raise DomainError("need five Weierstrass coefficients [a1,a2,a3,a4,a6]")
        return cls(*(int(v) for v in ainvs), conductor=int(conductor))

    @property
    def ainvs(self) -> tuple:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def is_good(self, q: int) -> bool:
        return self.discriminant % q != 0


def _count_points_bruteforce(curve: EllipticCurve, q: int) -> int:
    a1, a2, a3, a4, a6 = curve.ainvs
    count = 1
    for x in range(q):
        for y in range(q):
            if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % q == 0:
                count += 1
    return count


def _hasse_check(a: int, q: int):
    if a * a > 4 * q:
        raise ComputationError(f"Hasse bound violated: a_{q} = {a}")


def trace_of_frobenius(curve: EllipticCurve, q: int) -> int:
    """a_q = q + 1 - #E(F_q) at a prime of good reduction."""
    if not curve.is_good(q):
        raise DomainError(f"E has bad reduction at {q}; use reduction_type for the local factor")
    if q < 5:
        a = q + 1 - _count_points_bruteforce(curve, q)
    else:
        a = int(traces_of_frobenius(curve, np.array([q], dtype=np.int64))[0])
    _hasse_check(a, q)
    return a


_UNKNOWN = np.iinfo(np.int64).min
_trace_cache: dict = {}


def traces_of_frobenius(curve: EllipticCurve, primes, seed: int = 1,
                        direct_limit: int = _pointcount.DIRECT_LIMIT, use_cache: bool = True) -> np.ndarray:
    """Vectorised a_q for good primes q >= 5 (compiled; Hasse bound asserted).

    Primes up to ``direct_limit`` are counted by the O(q) Legendre sum, larger
    ones by baby-step giant-step.  Results are memoised per curve.
    """
    primes = np.asarray(primes, dtype=np.int64)
    if primes.size == 0:
        return np.zeros(0, dtype=np.int64)
    if np.any(primes < 5):
        raise DomainError("traces_of_frobenius handles q >= 5; use trace_of_frobenius")
    cache = _trace_cache.get(curve.ainvs) if use_cache else None
    top = int(primes.max())
    if cache is not None and cache.size > top:
        out = cache[primes]
        todo = out == _UNKNOWN
    else:
        out = np.full(primes.size, _UNKNOWN, dtype=np.int64)
        todo = np.ones(primes.size, dtype=bool)
    if np.any(todo):
        qs = primes[todo]
        A = (-27 * curve.c4) % qs if abs(curve.c4) < 2**40 else np.array([(-27 * curve.c4) % int(q) for q in qs])
        B = (-54 * curve.c6) % qs if abs(curve.c6) < 2**40 else np.array([(-54 * curve.c6) % int(q) for q in qs])
        out[todo] = _pointcount.traces(A.astype(np.int64), B.astype(np.int64), qs, seed, direct_limit)
    bad = out * out > 4 * primes
    if np.any(bad):
        raise ComputationError(f"Hasse bound violated at q = {int(primes[bad][0])}")
    if use_cache:
        if cache is None or cache.size <= top:
            grown = np.full(top + 1, _UNKNOWN, dtype=np.int64)
            if cache is not None:
                grown[: cache.size] = cache
            cache = grown
            _trace_cache[curve.ainvs] = cache
        cache[primes] = out
    return out


def _singular_point(curve: EllipticCurve, q: int):
    a1, a2, a3, a4, a6 = curve.ainvs
    if q > 2:
        # complete the square: y' = y + (a1 x + a3)/2, y'^2 = g(x)
        inv2 = pow(2, -1, q)
        inv4 = inv2 * inv2 % q
        g2, g1, g0 = curve.b2 * inv4 % q, curve.b4 * inv2 % q, curve.b6 * inv4 % q
        x = np.arange(q, dtype=np.int64)
        gx = ((x * x % q * x) % q + g2 * (x * x % q) + g1 * x + g0) % q
        dg = (3 * (x * x % q) + 2 * g2 * x + g1) % q
        hits = np.nonzero((gx == 0) & (dg == 0))[0]
        if hits.size != 1:
            raise ComputationError(f"expected one singular point mod {q}, found {hits.size}")
        x0 = int(hits[0])
        y0 = (-(a1 * x0 + a3) * inv2) % q
        return x0, y0
    for x0 in range(q):
        for y0 in range(q):
            f = y0 * y0 + a1 * x0 * y0 + a3 * y0 - x0 ** 3 - a2 * x0 * x0 - a4 * x0 - a6
            fx = a1 * y0 - 3 * x0 * x0 - 2 * a2 * x0 - a4
            fy = 2 * y0 + a1 * x0 + a3
            if f % q == 0 and fx % q == 0 and fy % q == 0:
                return x0, y0
    raise ComputationError(f"no singular point found mod {q}")


def reduction_type(curve: EllipticCurve, q: int) -> Reduction:
    if curve.is_good(q):
        return Reduction.GOOD
    if curve.c4 % q == 0:
        return Reduction.ADDITIVE
    x0, _ = _singular_point(curve, q)
    # tangent slopes at the node: m^2 + a1 m - (3 x0 + a2) = 0
    a1, a2 = curve.a1, curve.a2
    if q == 2:
        split = any((m * m + a1 * m - (3 * x0 + a2)) % 2 == 0 for m in range(2))
    else:
        disc = (a1 * a1 + 4 * (3 * x0 + a2)) % q
        split = pow(disc, (q - 1) // 2, q) == 1
    return Reduction.SPLIT_MULT if split else Reduction.NONSPLIT_MULT


def bad_prime_trace(curve: EllipticCurve, q: int) -> int:
    return {Reduction.SPLIT_MULT: 1, Reduction.NONSPLIT_MULT: -1, Reduction.ADDITIVE: 0}[reduction_type(curve, q)]


def _check_collision(curve: EllipticCurve, rho: ArtinRep):
    for q in rho.ramified_primes():
        if curve.conductor % q == 0:
            raise UnsupportedConfigurationError(
                f"E and rho are both ramified at q = {q}; this configuration is not supported"
            )


def _good_polynomial(a: int, q: int, Q) -> np.ndarray:
    """Coefficients of Q(alpha T) Q(beta T) with alpha + beta = a, alpha beta = q."""
    Q = list(Q)
    k = len(Q) - 1
    psum = [2, a]
    for _ in range(2, k + 1):
        psum.append(a * psum[-1] - q * psum[-2])
    out = []
    for n in range(2 * k + 1):
        total = 0
        for j in range(max(0, n - k), n // 2 + 1):
            l = n - j
            if j == l:
                total += Q[j] * Q[j] * q ** j
            else:
                total += Q[j] * Q[l] * q ** j * psum[l - j]
        out.append(total)
    return np.array(out, dtype=complex)


def _rep_poly(rho: ArtinRep, q: int):
    poly = rho.local_polynomial(q)
    if rho.is_integral:
        return [int(round(c.real)) for c in poly]
    return [complex(c) for c in poly]


def local_polynomial(curve: EllipticCurve, rho: ArtinRep, q: int, a_q: int | None = None) -> np.ndarray:
    """P_q(E, rho, T) as a coefficient array (constant term first)."""
    _check_collision(curve, rho)
    Q = _rep_poly(rho, q)
    if curve.is_good(q):
        a = trace_of_frobenius(curve, q) if a_q is None else a_q
        return _good_polynomial(a, q, Q)
    a = bad_prime_trace(curve, q)
    return np.array([c * a ** j for j, c in enumerate(Q)], dtype=complex)


def _inverse_series(P: np.ndarray, kmax: int) -> np.ndarray:
    b = np.zeros(kmax + 1, dtype=complex)
    b[0] = 1.0
    for k in range(1, kmax + 1):
        s = 0j
        for j in range(1, min(k, len(P) - 1) + 1):
            s -= P[j] * b[k - j]
        b[k] = s
    return b


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """c_0 .. c_X (c_0 = 0 unused)."""

    values: np.ndarray
    cutoff: int
    curve: EllipticCurve | None = None
    rep: ArtinRep | None = None

    def __getitem__(self, n):
        return self.values[n]

    def conj(self) -> CoefficientTable:
        rep = self.rep.dual() if self.rep is not None else None
        return CoefficientTable(self.values.conj(), self.cutoff, self.curve, rep)


def primes_up_to(x: int) -> np.ndarray:
    if x < 2:
        return np.zeros(0, dtype=np.int64)
    return np.fromiter(sieve.primerange(2, x + 1), dtype=np.int64)


def _assemble(cutoff: int, euler: dict) -> np.ndarray:
    """Multiplicative extension from euler[q] = (b_1, b_2, ...) with q^k <= cutoff."""
    qs = sorted(euler)
    powers, vals = [], []
    for q in qs:
        qk = q
        for b in euler[q]:
            if qk > cutoff:
                break
            powers.append(qk)
            vals.append(b)
            qk *= q
    return _pointcount.assemble(cutoff, np.array(powers, dtype=np.int64), np.array(vals, dtype=np.complex128))


def dirichlet_coefficients(curve: EllipticCurve, rho: ArtinRep, cutoff: int, seed: int = 1) -> CoefficientTable:
    """c_n of L(E, rho, s) = prod_q P_q(q^-s)^-1 for n <= cutoff."""
    if cutoff < 1:
        raise DomainError("cutoff must be >= 1")
    _check_collision(curve, rho)
    primes = primes_up_to(cutoff)
    root = math.isqrt(cutoff)
    special = {int(q) for q in primes if q <= max(root, 3) or curve.conductor % q == 0}
    special |= {q for q in rho.ramified_primes() if q <= cutoff}
    euler = {}
    for q in sorted(special):
        kmax = int(math.log(cutoff) / math.log(q)) + 1
        while q ** kmax > cutoff:
            kmax -= 1
        P = local_polynomial(curve, rho, q)
        euler[q] = tuple(_inverse_series(P, kmax)[1:])
    rest = np.array([q for q in primes if int(q) not in special], dtype=np.int64)
    if rest.size:
        a = traces_of_frobenius(curve, rest, seed)
        tr = frobenius_traces(rho, rest)
        # for q > sqrt(X) only c_q = a_q tr rho(Frob_q) is needed
        for q, v in zip(rest.tolist(), (a * tr).tolist()):
            euler[q] = (v,)
    values = _assemble(cutoff, euler)
    values[0] = 0
    if rho.is_integral:
        values = values.real.round() + 0j
    return CoefficientTable(values, cutoff, curve, rho)


def frobenius_traces(rho: ArtinRep, primes: np.ndarray) -> np.ndarray:
    """tr rho(Frob_q) on V^{I_q} for each q, vectorised for character sums."""
    if isinstance(rho, CharacterSum):
        total = np.zeros(primes.shape, dtype=complex)
        for chi in rho.components:
            total += chi.values(primes)
        if rho.is_integral:
            total = total.real.round() + 0j
        return total
    return np.array([-complex(rho.local_polynomial(int(q))[1]) if len(rho.local_polynomial(int(q))) > 1 else 0
                     for q in primes])


def twist_coefficients(table: CoefficientTable, chi: DirichletCharacter) -> CoefficientTable:
    """c_n(rho (x) chi) = chi(n) c_n(rho), valid above the twisting threshold."""
    chi = chi.primitive()
    rho = table.rep
    if rho is not None:
        for lc in chi.locals:
            need = lemma2_threshold(rho, lc.p).threshold
            if lc.conductor_exponent < need:
                raise UnsupportedConfigurationError(
                    f"twist at p = {lc.p} needs n_p(chi) >= {need}; coefficient shortcut invalid"
                )
            if table.curve is not None and table.curve.conductor % lc.p == 0:
                raise UnsupportedConfigurationError(f"E has bad reduction at the twisting prime {lc.p}")
    n = np.arange(table.cutoff + 1)
    vals = table.values * chi.values(n)
    twisted = rho.twist(chi) if rho is not None else None
    return CoefficientTable(vals, table.cutoff, table.curve, twisted)


def pair_conductor(curve: EllipticCurve, rho: ArtinRep, p: int | None = None, a: int | None = None) -> int:
    """N(E, rho) = N_E^d N_rho^2; with (p, a) the twisted N p^(2 a d).

    With p and a given, ``rho`` is the untwisted representation and the
    result is the conductor of E (x) rho (x) chi for any primitive chi mod
    p^a with a at or above the twisting threshold.
    """
    _check_collision(curve, rho)
    d = rho.dim
    if p is None:
        return curve.conductor ** d * rho.conductor ** 2
    if not curve.is_good(p) or curve.conductor % p == 0:
        raise DomainError(f"E must have good reduction at p = {p}")
    if a is None or a < 1:
        raise DomainError("twist exponent a must be >= 1")
    need = lemma2_threshold(rho, p).threshold
    if a < need:
        raise DomainError(f"a = {a} is below the twisting threshold {need} at p = {p}")
    rho_p = rho.local_conductor_exponent(p)
    base = curve.conductor ** d * (rho.conductor // p ** rho_p) ** 2
    return base * p ** (2 * a * d)


def divisor_function_table(k: int, cutoff: int) -> np.ndarray:
    """d_k(n) for n <= cutoff (d_k(0) = 0), as float."""
    euler = {}
    for q in primes_up_to(cutoff).tolist():
        kmax = 1
        while q ** (kmax + 1) <= cutoff:
            kmax += 1
        euler[q] = tuple(math.comb(k + j - 1, j) for j in range(1, kmax + 1))
    vals = _assemble(cutoff, euler).real
    vals[0] = 0
    return vals


def coefficient_envelope(d: int, cutoff: int) -> np.ndarray:
    """d_{2d}(n) sqrt(n), the bound on |c_n| for dim rho = d."""
    return divisor_function_table(2 * d, cutoff) * np.sqrt(np.arange(cutoff + 1))
