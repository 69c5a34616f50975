"""Lower-numbering ramification filtration of cyclotomic towers over Q_p.

For K_n = Q_p(mu_{p^n}) the group Gal(K_n/Q_p) is (Z/p^n)^*, and for
p^(v-1) <= i <= p^v - 1 the i-th ramification group is the subgroup of
units congruent to 1 mod p^v.  The groups of K_n/K_m are the intersections
with Gal(K_n/K_m), since lower numbering passes to subgroups.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .characters import _check_odd_prime, phi_prime_power
from .errors import DomainError


@dataclass(frozen=True)
class CyclotomicTower:
    p: int
    m: int
    n: int

    def __post_init__(self):
        _check_odd_prime(self.p)
        if not 0 <= self.m <= self.n:
            raise DomainError("need 0 <= m <= n")

    @property
    def degree(self) -> int:
        return phi_prime_power(self.p, self.n) // phi_prime_power(self.p, self.m)


@dataclass(frozen=True)
class RamificationFiltration:
    """Group orders g_i stored as breaks: ``breaks[k] = (last_i, g)``.

    g_i = breaks[k][1] for breaks[k-1][0] < i <= breaks[k][0]; beyond the last
    break every g_i is 1.
    """

    breaks: tuple

    def size(self, i: int) -> int:
        if i < 0:
            raise DomainError("ramification index must be >= 0")
        for last, g in self.breaks:
            if i <= last:
                return g
        return 1

    @property
    def sizes(self) -> list[int]:
        """Dense g_0, g_1, ... up to the first index with g_i = 1."""
        top = self.breaks[-1][0] + 1 if self.breaks else 0
        return [self.size(i) for i in range(top + 1)]


def _level(p: int, i: int) -> int:
    """The v with p^(v-1) <= i <= p^v - 1 (and 0 for i = 0)."""
    v = 0
    while p ** v - 1 < i:
        v += 1
    return v


def filtration(tower: CyclotomicTower) -> RamificationFiltration:
    p, m, n = tower.p, tower.m, tower.n
    if m == n:
        return RamificationFiltration(())

    def order(v: int) -> int:
        # |U^max(v,m) / U^n|, with U^0 the full unit group
        w = max(v, m)
        if w == 0:
            return phi_prime_power(p, n)
        return p ** (n - min(w, n))

    breaks = [(0, order(0))]
    for v in range(1, n):
        g = order(v)
        if g == 1:
            break
        last = p ** v - 1
        if breaks[-1][1] == g:
            breaks[-1] = (last, g)
        else:
            breaks.append((last, g))
    return RamificationFiltration(tuple(breaks))


def eta(tower: CyclotomicTower, i: int) -> Fraction:
    """(g_1 + ... + g_i) / g_0, exactly."""
    if i < 0:
        raise DomainError("i must be >= 0")
    filt = filtration(tower)
    g0 = filt.size(0)
    total = 0
    lo = 1
    for last, g in filt.breaks:
        hi = min(last, i)
        if hi >= lo:
            total += (hi - lo + 1) * g
        lo = max(lo, last + 1)
    if i >= lo:
        total += i - lo + 1
    return Fraction(total, g0)


def eta_lower_bound(p: int, m: int, s: int) -> int:
    """p^(m-1) (1 + (s-m)(p-1)) - 1, the lower bound for eta(p^s - 1)."""
    if not 1 <= m <= s:
        raise DomainError("need 1 <= m <= s")
    return p ** (m - 1) * (1 + (s - m) * (p - 1)) - 1


def different_exponent(tower: CyclotomicTower) -> int:
    """sum_{i >= 0} (g_i - 1), the valuation of the different (Hilbert)."""
    filt = filtration(tower)
    total = 0
    lo = 0
    for last, g in filt.breaks:
        total += (last - lo + 1) * (g - 1)
        lo = last + 1
    return total


def cyclotomic_discriminant_exponent(p: int, n: int) -> int:
    """v_p of disc(Q_p(mu_{p^n})) = n phi(p^n) - p^(n-1)."""
    if n == 0:
        return 0
    return n * phi_prime_power(p, n) - p ** (n - 1)
