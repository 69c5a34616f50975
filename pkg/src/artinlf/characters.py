"""Dirichlet characters modulo odd prime powers and their CRT products.

A local character modulo p^a is stored as an index j against a fixed
generator g of (Z/p^a)^*:  chi(g^k) = exp(2 pi i j k / phi(p^a)).  Values are
kept as integer exponents until the last moment so identities such as
orthogonality can be checked exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache, reduce

import numpy as np
from sympy import factorint, isprime

from .errors import DomainError, UnsupportedModulusError
from .numerics import compensated_sum


def phi_prime_power(p: int, a: int) -> int:
    return 1 if a == 0 else (p - 1) * p ** (a - 1)


def _check_odd_prime(p: int):
    if p == 2:
        raise UnsupportedModulusError("characters modulo powers of 2 are not supported")
    if not _is_prime(p):
        raise DomainError(f"{p} is not prime")


@lru_cache(maxsize=4096)
def _is_prime(p: int) -> bool:
    return bool(isprime(p))


@lru_cache(maxsize=None)
def find_generator(p: int, a: int) -> int:
    """Smallest generator of the cyclic group (Z/p^a Z)^*, p odd."""
    _check_odd_prime(p)
    if a < 1:
        raise DomainError("exponent a must be >= 1")
    cofactors = [(p - 1) // r for r in factorint(p - 1)]
    for g in range(2, p ** a):
        if g % p == 0:
            continue
        if any(pow(g, e, p) == 1 for e in cofactors):
            continue
        if a >= 2 and pow(g, p - 1, p * p) == 1:
            continue
        return g
    raise AssertionError("unreachable: (Z/p^a)^* is cyclic for odd p")


@lru_cache(maxsize=64)
def discrete_log_table(p: int, a: int) -> np.ndarray:
    """dlog[r] = k with g^k = r mod p^a, and -1 where gcd(r, p) > 1."""
    m = p ** a
    table = np.full(m, -1, dtype=np.int64)
    if a == 0:
        table[0] = 0
        return table
    g = find_generator(p, a)
    x = 1
    for k in range(phi_prime_power(p, a)):
        table[x] = k
        x = x * g % m
    table.setflags(write=False)
    return table


@dataclass(frozen=True, order=True)
class LocalCharacter:
    p: int
    a: int
    index: int

    def __post_init__(self):
        _check_odd_prime(self.p)
        if self.a < 0:
            raise DomainError("exponent a must be >= 0")
        object.__setattr__(self, "index", self.index % self.phi)

    def __hash__(self) -> int:
        return hash((self.p, self.a, self.index))

    @property
    def modulus(self) -> int:
        return self.p ** self.a

    @cached_property
    def phi(self) -> int:
        return phi_prime_power(self.p, self.a)

    @property
    def generator(self) -> int:
        return 1 if self.a == 0 else find_generator(self.p, self.a)

    @property
    def conductor_exponent(self) -> int:
        """Least b such that chi is trivial on units congruent to 1 mod p^b."""
        # the order must divide phi(p^b) = (p - 1) p^(b-1)
        order = self.order
        if order == 1:
            return 0
        v = 0
        while order % self.p == 0:
            order //= self.p
            v += 1
        return v + 1

    @property
    def order(self) -> int:
        return self.phi // math.gcd(self.index, self.phi)

    def exponent(self, n: int):
        """Exponent e with chi(n) = exp(2 pi i e / phi), or None off units."""
        if n % self.p == 0 and self.a > 0:
            return None
        k = int(discrete_log_table(self.p, self.a)[n % self.modulus])
        return self.index * k % self.phi

    def exponents(self, n) -> np.ndarray:
        """Vectorised :meth:`exponent`; -1 marks non-units."""
        k = discrete_log_table(self.p, self.a)[np.asarray(n) % self.modulus]
        return np.where(k < 0, -1, (self.index * k) % self.phi)

    def __call__(self, n: int) -> complex:
        e = self.exponent(n)
        return 0j if e is None else np.exp(2j * np.pi * e / self.phi)

    def conj(self) -> LocalCharacter:
        return LocalCharacter(self.p, self.a, -self.index)

    def lift(self, a: int) -> LocalCharacter:
        """The same function on units, viewed modulo p^a for a >= self.a."""
        if a < self.a:
            raise DomainError("can only lift to a larger exponent")
        if a == self.a:
            return self
        if self.a == 0:
            return LocalCharacter(self.p, a, 0)
        g_big = find_generator(self.p, a)
        log_small = int(discrete_log_table(self.p, self.a)[g_big % self.modulus])
        scale = phi_prime_power(self.p, a) // self.phi
        return LocalCharacter(self.p, a, self.index * log_small * scale)

    def __mul__(self, other: LocalCharacter) -> LocalCharacter:
        if other.p != self.p:
            raise DomainError("local characters at different primes")
        a = max(self.a, other.a)
        return LocalCharacter(self.p, a, self.lift(a).index + other.lift(a).index)


_EXACT_PHASES = {Fraction(0): 1 + 0j, Fraction(1, 4): 1j, Fraction(1, 2): -1 + 0j, Fraction(3, 4): -1j}


@dataclass(frozen=True)
class DirichletCharacter:
    """CRT product of local characters at pairwise distinct odd primes."""

    locals: tuple = field(default=())

    def __post_init__(self):
        parts = tuple(sorted(lc for lc in self.locals if lc.a > 0))
        primes = [lc.p for lc in parts]
        if len(set(primes)) != len(primes):
            raise DomainError("local characters must sit at distinct primes")
        object.__setattr__(self, "locals", parts)
        object.__setattr__(self, "_hash", hash(parts))

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def trivial(cls) -> DirichletCharacter:
        return cls(())

    @classmethod
    def from_local(cls, p: int, a: int, index: int) -> DirichletCharacter:
        return cls((LocalCharacter(p, a, index),))

    @classmethod
    def parse(cls, text: str) -> DirichletCharacter:
        """Parse ``"p:a:index"`` triples joined by ``*``; ``"1"`` is trivial."""
        text = text.strip()
        if text in ("", "1", "trivial"):
            return cls.trivial()
        locs = []
        for part in text.split("*"):
            try:
                p, a, j = (int(t) for t in part.split(":"))
            except ValueError:
                raise DomainError(f"bad character triple {part!r}; expected p:a:index") from None
            locs.append(LocalCharacter(p, a, j))
        result = cls.trivial()
        for lc in locs:
            result = result * cls((lc,))
        return result

    def __str__(self) -> str:
        return "*".join(f"{lc.p}:{lc.a}:{lc.index}" for lc in self.locals) or "1"

    @property
    def modulus(self) -> int:
        return math.prod(lc.modulus for lc in self.locals)

    @property
    def conductor(self) -> int:
        return math.prod(lc.p ** lc.conductor_exponent for lc in self.locals)

    def local_at(self, p: int) -> LocalCharacter | None:
        for lc in self.locals:
            if lc.p == p:
                return lc
        return None

    def conductor_exponent(self, p: int) -> int:
        lc = self.local_at(p)
        return 0 if lc is None else lc.conductor_exponent

    @property
    def is_principal(self) -> bool:
        return all(lc.index == 0 for lc in self.locals)

    @property
    def order(self) -> int:
        return reduce(math.lcm, (lc.order for lc in self.locals), 1)

    def exponent(self, n: int):
        """chi(n) as a Fraction e in [0, 1) with chi(n) = exp(2 pi i e), or None."""
        total = Fraction(0)
        for lc in self.locals:
            e = lc.exponent(n)
            if e is None:
                return None
            total += Fraction(e, lc.phi)
        return total % 1

    def __call__(self, n: int) -> complex:
        e = self.exponent(n)
        if e is None:
            return 0j
        if e in _EXACT_PHASES:
            return _EXACT_PHASES[e]
        return complex(np.exp(2j * np.pi * float(e)))

    def values(self, n) -> np.ndarray:
        """chi evaluated on an integer array (0 off the units)."""
        n = np.asarray(n, dtype=np.int64)
        if not self.locals:
            return np.ones(n.shape, dtype=complex)
        big = reduce(math.lcm, (lc.phi for lc in self.locals), 1)
        total = np.zeros(n.shape, dtype=np.int64)
        unit = np.ones(n.shape, dtype=bool)
        for lc in self.locals:
            e = lc.exponents(n)
            unit &= e >= 0
            total = (total + np.where(e >= 0, e, 0) * (big // lc.phi)) % big
        return np.where(unit, np.exp(2j * np.pi * total / big), 0)

    def conj(self) -> DirichletCharacter:
        return DirichletCharacter(tuple(lc.conj() for lc in self.locals))

    def __mul__(self, other: DirichletCharacter) -> DirichletCharacter:
        return _dirichlet_product(self, other)

    def primitive(self) -> DirichletCharacter:
        """The primitive character inducing this one."""
        return _primitive(self)


@lru_cache(maxsize=65536)
def _dirichlet_product(chi: DirichletCharacter, other: DirichletCharacter) -> DirichletCharacter:
    mine = {lc.p: lc for lc in chi.locals}
    for lc in other.locals:
        mine[lc.p] = mine[lc.p] * lc if lc.p in mine else lc
    return DirichletCharacter(tuple(mine.values()))


@lru_cache(maxsize=65536)
def _primitive(chi: DirichletCharacter) -> DirichletCharacter:
    locs = []
    for lc in chi.locals:
        f = lc.conductor_exponent
        if f == 0:
            continue
        if f == lc.a:
            locs.append(lc)
            continue
        # invert lift: index_a = j * log_f(g_a) * phi_a / phi_f
        phi_f = phi_prime_power(lc.p, f)
        scale = lc.phi // phi_f
        log_small = int(discrete_log_table(lc.p, f)[find_generator(lc.p, lc.a) % lc.p ** f])
        j = (lc.index // scale) * pow(log_small, -1, phi_f) % phi_f
        locs.append(LocalCharacter(lc.p, f, j))
    return DirichletCharacter(tuple(locs))


def product(chi: DirichletCharacter, psi: DirichletCharacter) -> DirichletCharacter:
    return chi * psi


def conductor(chi: DirichletCharacter) -> int:
    return chi.conductor


def char_eval(chi: DirichletCharacter, n: int) -> complex:
    return chi(n)


def enumerate_characters(p: int, a: int) -> list[LocalCharacter]:
    """All phi(p^a) characters modulo p^a in ascending index order."""
    _check_odd_prime(p)
    return [LocalCharacter(p, a, j) for j in range(phi_prime_power(p, a))]


def primitive_indices(p: int, a: int) -> np.ndarray:
    """Indices j of the primitive characters modulo p^a, ascending."""
    _check_odd_prime(p)
    if a < 1:
        raise DomainError("exponent a must be >= 1")
    j = np.arange(phi_prime_power(p, a))
    if a == 1:
        return j[1:]
    return j[j % p != 0]


def enumerate_primitive(p: int, a: int) -> list[LocalCharacter]:
    return [LocalCharacter(p, a, int(j)) for j in primitive_indices(p, a)]


def _mobius_prime_power(e: int) -> int:
    return 1 if e == 0 else (-1 if e == 1 else 0)


def primitive_char_sum(n: int, p: int, a: int) -> int:
    """Sum of chi(n) over primitive chi mod p^a, via the divisor formula.

    sum_{b | (n-1, p^a)} phi(b) mu(p^a / b).
    """
    _check_odd_prime(p)
    if a < 1:
        raise DomainError("exponent a must be >= 1")
    if n % p == 0:
        raise DomainError(f"n = {n} is not coprime to p = {p}")
    m = p ** a
    g = math.gcd(n - 1, m)
    v = 0
    while g % p == 0:
        g //= p
        v += 1
    return sum(phi_prime_power(p, j) * _mobius_prime_power(a - j) for j in range(v + 1))


def primitive_char_sum_bruteforce(n: int, p: int, a: int) -> complex:
    return compensated_sum(np.array([lc(n) for lc in enumerate_primitive(p, a)]))


def _single_prime_modulus(chi: DirichletCharacter) -> int:
    if len(chi.locals) > 1:
        raise DomainError("Gauss sums are only defined here for prime-power moduli")
    return chi.modulus


def gauss_sum(chi: DirichletCharacter, h: int) -> complex:
    """tau_h(chi) = sum_{r mod m} chi(r) exp(2 pi i h r / m), m = modulus of chi."""
    m = _single_prime_modulus(chi)
    r = np.arange(m)
    return compensated_sum(chi.values(r) * np.exp(2j * np.pi * ((h * r) % m) / m))


def all_gauss_sums(chi: DirichletCharacter) -> np.ndarray:
    """tau_h(chi) for h = 0 .. m-1 through one inverse FFT."""
    m = _single_prime_modulus(chi)
    return m * np.fft.ifft(chi.values(np.arange(m)))
