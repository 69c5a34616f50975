"""Artin representations: direct sums of Dirichlet characters, or external tables.

Both variants expose the same small surface: ``dim``, local conductor
exponents, the local polynomial det(1 - Frob_q T | V^{I_q}), ``dual`` and
``twist``.  The external variant is the extension point for non-abelian
representations whose Frobenius data is computed elsewhere.
"""

from __future__ import annotations

import math
import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sympy import isprime, primerange

from .characters import DirichletCharacter, LocalCharacter, phi_prime_power
from .errors import MissingDataError, TableFormatError, UnsupportedConfigurationError
from .ramification import CyclotomicTower, _level, filtration


@dataclass(frozen=True)
class TwistThreshold:
    p: int
    threshold: int


class ArtinRep:
    """Common interface; see :class:`CharacterSum` and :class:`ExternalRep`."""

    dim: int

    def local_conductor_exponent(self, q: int) -> int:
        raise NotImplementedError

    def ramified_primes(self) -> list[int]:
        raise NotImplementedError

    def local_polynomial(self, q: int) -> np.ndarray:
        raise NotImplementedError

    def twist(self, chi: DirichletCharacter) -> ArtinRep:
        raise NotImplementedError

    def dual(self) -> ArtinRep:
        raise NotImplementedError

    @property
    def conductor(self) -> int:
        return math.prod(q ** self.local_conductor_exponent(q) for q in self.ramified_primes())

    @property
    def is_integral(self) -> bool:
        """True when every Frobenius polynomial has integer coefficients."""
        return False


@dataclass(frozen=True)
class CharacterSum(ArtinRep):
    """rho = chi_1 (+) ... (+) chi_d, each stored as a primitive character."""

    components: tuple = field(default=())

    def __post_init__(self):
        comps = tuple(chi.primitive() for chi in self.components)
        if not comps:
            comps = (DirichletCharacter.trivial(),)
        object.__setattr__(self, "components", comps)

    @classmethod
    def parse(cls, text: str) -> CharacterSum:
        """``"trivial"`` or characters (see DirichletCharacter.parse) joined by ``+``."""
        text = text.strip()
        if text in ("", "trivial", "1"):
            return cls((DirichletCharacter.trivial(),))
        return cls(tuple(DirichletCharacter.parse(part) for part in text.split("+")))

    def __str__(self) -> str:
        return "+".join(str(c) for c in self.components)

    @property
    def dim(self) -> int:
        return len(self.components)

    def local_conductor_exponent(self, q: int) -> int:
        return sum(chi.conductor_exponent(q) for chi in self.components)

    def ramified_primes(self) -> list[int]:
        return sorted({lc.p for chi in self.components for lc in chi.locals})

    def local_polynomial(self, q: int) -> np.ndarray:
        poly = np.ones(1, dtype=complex)
        for chi in self.components:
            if chi.conductor % q:
                poly = np.convolve(poly, [1.0, -chi(q)])
        return poly

    @property
    def is_integral(self) -> bool:
        """True when the components are closed under Galois conjugation, so every
        local polynomial has integer coefficients."""
        counts = Counter(self.components)
        for chi, mult in counts.items():
            n = chi.order
            for k in range(2, n):
                if math.gcd(k, n) == 1:
                    power = DirichletCharacter(tuple(LocalCharacter(lc.p, lc.a, lc.index * k) for lc in chi.locals))
                    if counts.get(power, 0) != mult:
                        return False
        return True

    def twist(self, chi: DirichletCharacter) -> CharacterSum:
        return CharacterSum(tuple(c * chi for c in self.components))

    def dual(self) -> CharacterSum:
        return CharacterSum(tuple(c.conj() for c in self.components))

    def sorted_key(self):
        return tuple(sorted(str(c) for c in self.components))


def _coerce_coefficient(value):
    value = complex(value)
    if value.imag == 0 and value.real == round(value.real) and abs(value.real) < 2**53:
        return int(round(value.real))
    return value


@dataclass(frozen=True)
class ExternalRep(ArtinRep):
    """Local data for an Artin representation computed outside this package.

    ``polys[q]`` holds det(1 - Frob_q T | V^{I_q}) as coefficients c0..ck.
    Primes up to ``cutoff`` that are not listed are taken as unramified with
    trivial Frobenius, i.e. (1 - T)^dim.  ``twisted_by`` records a Dirichlet
    twist applied lazily.
    """

    dim: int
    conductor_exponents: dict
    polys: dict
    thresholds: dict
    cutoff: int
    twisted_by: DirichletCharacter = field(default_factory=DirichletCharacter.trivial)
    conjugated: bool = False

    def _twist_exponent(self, q: int) -> int:
        return self.twisted_by.conductor_exponent(q)

    def local_conductor_exponent(self, q: int) -> int:
        f = self._twist_exponent(q)
        if f:
            return f * self.dim
        return self.conductor_exponents.get(q, 0)

    def ramified_primes(self) -> list[int]:
        primes = {q for q, e in self.conductor_exponents.items() if e}
        primes |= {lc.p for lc in self.twisted_by.primitive().locals}
        return sorted(primes)

    def local_polynomial(self, q: int) -> np.ndarray:
        if self._twist_exponent(q):
            return np.ones(1, dtype=complex)
        if q in self.polys:
            poly = np.array(self.polys[q], dtype=complex)
        elif q <= self.cutoff:
            poly = np.array([(-1) ** k * math.comb(self.dim, k) for k in range(self.dim + 1)], dtype=complex)
        else:
            raise MissingDataError(f"external representation has no data at q = {q} > cutoff {self.cutoff}")
        if self.conjugated:
            poly = poly.conj()
        zeta = self.twisted_by(q)
        if zeta != 1:
            poly = poly * zeta ** np.arange(len(poly))
        return poly

    @property
    def is_integral(self) -> bool:
        return self.twisted_by.order <= 2 and all(
            isinstance(_coerce_coefficient(c), int) for poly in self.polys.values() for c in poly
        )

    def threshold(self, p: int) -> int:
        if not self.conductor_exponents.get(p, 0):
            return 1
        if p not in self.thresholds:
            raise MissingDataError(f"external representation declares no twist threshold at p = {p}")
        return self.thresholds[p]

    def twist(self, chi: DirichletCharacter) -> ExternalRep:
        chi = chi.primitive()
        for lc in chi.locals:
            if lc.conductor_exponent < self.threshold(lc.p):
                raise UnsupportedConfigurationError(
                    f"twist by conductor {lc.p}^{lc.conductor_exponent} is below the declared threshold "
                    f"{self.threshold(lc.p)} at p = {lc.p}"
                )
            if self._twist_exponent(lc.p):
                raise UnsupportedConfigurationError(f"repeated twist at p = {lc.p} is not supported")
        combined = self.twisted_by * chi
        return ExternalRep(self.dim, self.conductor_exponents, self.polys, self.thresholds, self.cutoff,
                           combined, self.conjugated)

    def dual(self) -> ExternalRep:
        # Artin representations are unitary: the dual's Frobenius eigenvalues are the conjugates.
        return ExternalRep(self.dim, self.conductor_exponents, self.polys, self.thresholds, self.cutoff,
                           self.twisted_by.conj(), not self.conjugated)


def twist(rho: ArtinRep, chi: DirichletCharacter) -> ArtinRep:
    return rho.twist(chi)


def dual(rho: ArtinRep) -> ArtinRep:
    return rho.dual()


def local_conductor_exponent(rho: ArtinRep, q: int) -> int:
    return rho.local_conductor_exponent(q)


def lemma2_threshold(rho: ArtinRep, p: int) -> TwistThreshold:
    """Smallest n_p(chi) from which n_p(rho x chi) = n_p(chi) dim rho is guaranteed."""
    if isinstance(rho, CharacterSum):
        return TwistThreshold(p, 1 + max(chi.conductor_exponent(p) for chi in rho.components))
    if isinstance(rho, ExternalRep):
        return TwistThreshold(p, rho.threshold(p))
    raise TypeError(f"unknown representation type {type(rho).__name__}")


def bruteforce_conductor_exponent(chi: DirichletCharacter, p: int) -> int:
    """n_p(chi) by evaluating chi on every unit congruent to 1 mod p^b."""
    lc = chi.local_at(p)
    if lc is None:
        return 0
    m = lc.modulus
    for b in range(lc.a + 1):
        step = p ** b
        units = np.arange(1, m + 1, step) if b else np.array([u for u in range(1, m) if u % p])
        vals = DirichletCharacter((lc,)).values(units)
        if np.all(np.abs(vals - 1) < 1e-9):
            return b
    return lc.a


def artin_conductor_from_filtration(rho: CharacterSum, p: int) -> Fraction:
    """n_p(rho) from the ramification-group sum, for abelian rho.

    sum_i (g_i / g_0) (dim - (1/g_i) sum_{s in G_i} Tr rho(s)) over the lower
    filtration of Q_p(mu_{p^n})/Q_p, with the inner averages evaluated by
    brute-force summation over each G_i.
    """
    locs = [chi.local_at(p) for chi in rho.components]
    n = max((lc.a for lc in locs if lc is not None), default=0)
    if n == 0:
        return Fraction(0)
    tower = CyclotomicTower(p, 0, n)
    filt = filtration(tower)
    g0 = filt.size(0)
    modulus = p ** n
    total = Fraction(0)
    lo = 0
    for last, g in filt.breaks:
        v = _level(p, lo)
        if v == 0:
            group = np.array([s for s in range(1, modulus) if s % p])
        else:
            group = np.arange(1, modulus + 1, p ** v) % modulus
        trace_avg = 0
        for lc in locs:
            if lc is None:
                trace_avg += 1
                continue
            mean = complex(np.mean(DirichletCharacter((lc,)).values(group)))
            k = round(mean.real)
            if abs(mean - k) > 1e-9:
                raise AssertionError("character average over a subgroup must be 0 or 1")
            trace_avg += k
        total += (last - lo + 1) * Fraction(g, g0) * (rho.dim - trace_avg)
        lo = last + 1
    return total


# ---------------------------------------------------------------- external tables


def _parse_coefficient(token: str, lineno: int):
    try:
        if "," in token:
            re_s, im_s = token.split(",")
            return complex(float(re_s), float(im_s))
        return int(token)
    except ValueError:
        try:
            return float(token)
        except ValueError:
            raise TableFormatError(f"bad coefficient {token!r}", lineno) from None


def parse_external(text: str) -> ExternalRep:
    dim = None
    exps, polys, thresholds = {}, {}, {}
    cutoff = None
    poly_lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        try:
            if head == "dim":
                (dim,) = (int(t) for t in rest)
            elif head == "cutoff":
                (cutoff,) = (int(t) for t in rest)
            elif head == "threshold":
                p, t = (int(v) for v in rest)
                thresholds[p] = t
            elif head == "conductor":
                q, e = (int(v) for v in rest)
                exps[q] = e
            elif head.lstrip("-").isdigit():
                q = int(head)
                if not rest:
                    raise TableFormatError("polynomial line needs coefficients", lineno)
                polys[q] = tuple(_parse_coefficient(t, lineno) for t in rest)
                poly_lines[q] = lineno
            else:
                raise TableFormatError(f"unknown keyword {head!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, TableFormatError):
                raise
            raise TableFormatError(f"malformed {head!r} line", lineno) from None
    if dim is None or dim < 1:
        raise TableFormatError("missing or invalid 'dim' header")
    if cutoff is None:
        raise TableFormatError("missing 'cutoff' line")
    for q, poly in polys.items():
        lineno = poly_lines[q]
        if not isprime(q):
            raise TableFormatError(f"{q} is not prime", lineno)
        if complex(poly[0]) != 1:
            raise TableFormatError(f"constant coefficient at q = {q} must be 1", lineno)
        if len(poly) - 1 > dim:
            raise TableFormatError(f"inconsistent degree {len(poly) - 1} > dim {dim} at q = {q}", lineno)
    for q, e in exps.items():
        if e < 0 or not isprime(q):
            raise TableFormatError(f"bad conductor entry for q = {q}")
        if e and q <= cutoff and q not in polys:
            raise TableFormatError(f"ramified prime {q} needs an explicit polynomial line")
    for p, t in thresholds.items():
        if t < 1:
            raise TableFormatError(f"threshold at p = {p} must be >= 1")
    return ExternalRep(dim, exps, polys, thresholds, cutoff)


def ingest_external(path) -> ExternalRep:
    with open(path) as fh:
        return parse_external(fh.read())


def _format_coefficient(c) -> str:
    c = _coerce_coefficient(c)
    if isinstance(c, int):
        return str(c)
    return f"{c.real!r},{c.imag!r}"


def format_external(rep: ExternalRep) -> str:
    lines = [f"dim {rep.dim}"]
    lines += [f"conductor {q} {e}" for q, e in sorted(rep.conductor_exponents.items())]
    lines += [f"threshold {p} {t}" for p, t in sorted(rep.thresholds.items())]
    lines.append(f"cutoff {rep.cutoff}")
    for q in sorted(rep.polys):
        lines.append(" ".join([str(q)] + [_format_coefficient(c) for c in rep.polys[q]]))
    return "\n".join(lines) + "\n"


def write_external(rep: ExternalRep, path) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".artin-", suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(format_external(rep))
    os.replace(tmp, path)


def external_from_characters(rho: CharacterSum, cutoff: int) -> ExternalRep:
    """Tabulate an internal representation in the external format."""
    polys = {int(q): tuple(_coerce_coefficient(c) for c in rho.local_polynomial(int(q)))
             for q in primerange(2, cutoff + 1)}
    exps = {q: rho.local_conductor_exponent(q) for q in rho.ramified_primes()}
    thresholds = {q: lemma2_threshold(rho, q).threshold for q in rho.ramified_primes()}
    return ExternalRep(rho.dim, exps, polys, thresholds, cutoff)


__all__ = [
    "ArtinRep", "CharacterSum", "ExternalRep", "TwistThreshold", "twist", "dual",
    "local_conductor_exponent", "lemma2_threshold", "bruteforce_conductor_exponent",
    "artin_conductor_from_filtration", "parse_external", "ingest_external", "format_external",
    "write_external", "external_from_characters", "LocalCharacter", "phi_prime_power",
]
