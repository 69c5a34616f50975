"""Desk-scale invariant checks for every module, run by ``artinlf selftest``.

Each check raises AssertionError (or a package error) on failure.  The
``lanczos`` fault corrupts one gamma coefficient for the duration of the
run, which the numerics checks must detect.
"""

from __future__ import annotations

import math
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

REGISTRY: dict[str, list] = {}


def check(module: str):
    def deco(fn):
        REGISTRY.setdefault(module, []).append(fn)
        return fn
    return deco


def _close(a, b, tol, what):
    if not abs(a - b) <= tol * max(1.0, abs(b)):
        raise AssertionError(f"{what}: {a!r} vs {b!r}")


# ---------------------------------------------------------------- numerics


@check("numerics")
def gamma_recursion():
    from .numerics import complex_gamma

    z = np.array([0.3 + 0.2j, 1.7 - 3j, 4.5 + 0.1j, -2.5 + 1j, 10 + 10j])
    lhs = complex_gamma(z + 1)
    rhs = z * complex_gamma(z)
    err = np.max(np.abs(lhs - rhs) / np.abs(rhs))
    if err > 1e-12:
        raise AssertionError(f"Gamma(z+1) = z Gamma(z) violated by {err:.2e}")
    for n in range(1, 15):
        _close(complex_gamma(n).real, math.factorial(n - 1), 1e-12, f"Gamma({n})")


@check("numerics")
def gamma_reflection():
    from .numerics import complex_gamma

    z = np.array([0.25 + 0.5j, 0.6 - 1.2j, 0.1 + 2j])
    lhs = complex_gamma(z) * complex_gamma(1 - z)
    rhs = np.pi / np.sin(np.pi * z)
    if np.max(np.abs(lhs / rhs - 1)) > 1e-12:
        raise AssertionError("reflection formula violated")


@check("numerics")
def incomplete_gamma_exp():
    from .numerics import upper_incomplete_gamma

    for x in (0.1, 1.0, 3.0, 20.0):
        _close(upper_incomplete_gamma(1.0, x).real, math.exp(-x), 1e-12, f"Gamma(1,{x})")


@check("numerics")
def line_integral():
    from .numerics import QuadratureSpec, complex_gamma, vertical_line_integral

    res = vertical_line_integral(lambda s: complex_gamma(s + 1) / s, QuadratureSpec())
    _close(res.value.real, math.exp(-1), 1e-10, "integral of Gamma(s+1)/s")


# ---------------------------------------------------------------- characters


@check("characters")
def primitive_sum_identity():
    from .characters import primitive_char_sum, primitive_char_sum_bruteforce

    for p, a in ((3, 1), (3, 2), (3, 3), (5, 2), (7, 2)):
        for n in range(1, p ** a):
            if n % p:
                if abs(primitive_char_sum(n, p, a) - primitive_char_sum_bruteforce(n, p, a)) > 1e-9:
                    raise AssertionError(f"divisor formula fails at n={n}, p^a={p}^{a}")


@check("characters")
def orthogonality():
    from .characters import enumerate_characters

    for p, a in ((3, 2), (5, 1), (7, 1)):
        chars = enumerate_characters(p, a)
        m = p ** a
        mat = np.array([[c(n) for n in range(m)] for c in chars])
        gram = mat @ mat.conj().T
        phi = len(chars)
        if np.max(np.abs(gram - phi * np.eye(phi))) > 1e-9:
            raise AssertionError(f"orthogonality fails mod {m}")


@check("characters")
def gauss_sum_modulus():
    from .characters import all_gauss_sums, enumerate_primitive
    from .characters import DirichletCharacter

    for lc in enumerate_primitive(3, 3):
        tau = all_gauss_sums(DirichletCharacter((lc,)))
        _close(abs(tau[1]), math.sqrt(27), 1e-10, "|tau_1|")
        if abs(tau[0]) > 1e-10:
            raise AssertionError("tau_0 of a non-principal character must vanish")


# ---------------------------------------------------------------- ramification


@check("ramification")
def lemma1_bound():
    from .ramification import CyclotomicTower, eta, eta_lower_bound

    for p in (3, 5):
        for m in (1, 2):
            for n in range(m, 6):
                for s in range(m, n + 1):
                    if eta(CyclotomicTower(p, m, n), p ** s - 1) < eta_lower_bound(p, m, s):
                        raise AssertionError(f"eta bound fails at p={p}, m={m}, n={n}, s={s}")


@check("ramification")
def different_equals_discriminant():
    from .ramification import CyclotomicTower, cyclotomic_discriminant_exponent, different_exponent

    for p in (3, 5, 7):
        for n in range(1, 4):
            if different_exponent(CyclotomicTower(p, 0, n)) != cyclotomic_discriminant_exponent(p, n):
                raise AssertionError(f"Hilbert formula fails for p={p}, n={n}")


# ---------------------------------------------------------------- artin


def _small_rep_suite():
    import itertools

    from .artin import CharacterSum
    from .characters import DirichletCharacter, enumerate_characters

    pool = [DirichletCharacter.trivial()]
    for p, a in ((3, 1), (5, 1), (3, 2)):
        pool += [DirichletCharacter((lc,)) for lc in enumerate_characters(p, a)[1:3]]
    reps = []
    for dim in (1, 2, 3):
        reps += [CharacterSum(c) for c in itertools.combinations(pool, dim)][:12]
    return reps


@check("artin")
def lemma2_equality():
    from .artin import bruteforce_conductor_exponent, lemma2_threshold
    from .characters import enumerate_primitive, DirichletCharacter

    for rho in _small_rep_suite():
        t = lemma2_threshold(rho, 3).threshold
        for a in range(t, 4):
            for lc in enumerate_primitive(3, a)[:4]:
                chi = DirichletCharacter((lc,))
                tw = rho.twist(chi)
                brute = sum(bruteforce_conductor_exponent(c, 3) for c in tw.components)
                if brute != a * rho.dim or tw.local_conductor_exponent(3) != brute:
                    raise AssertionError(f"twisted conductor mismatch for {rho} x {chi}")


@check("artin")
def dual_twist_commute():
    from .characters import DirichletCharacter

    chi = DirichletCharacter.from_local(3, 3, 2)
    for rho in _small_rep_suite():
        if rho.twist(chi).dual().sorted_key() != rho.dual().twist(chi.conj()).sorted_key():
            raise AssertionError(f"dual and twist do not commute for {rho}")


@check("artin")
def filtration_conductor():
    from .artin import CharacterSum, artin_conductor_from_filtration

    for rho in _small_rep_suite():
        if isinstance(rho, CharacterSum):
            if artin_conductor_from_filtration(rho, 3) != Fraction(rho.local_conductor_exponent(3)):
                raise AssertionError(f"ramification-sum conductor mismatch for {rho}")


# ---------------------------------------------------------------- lfunction


def _curve11():
    from .lfunction import EllipticCurve

    return EllipticCurve.from_ainvs([0, -1, 1, 0, 0], 11)


@check("lfunction")
def known_coefficients():
    from .artin import CharacterSum
    from .lfunction import dirichlet_coefficients

    c = dirichlet_coefficients(_curve11(), CharacterSum(()), 12).values.real
    expected = [1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2]
    if list(np.round(c[1:]).astype(int)) != expected:
        raise AssertionError(f"11a coefficients wrong: {c[1:]}")


@check("lfunction")
def multiplicativity():
    from .artin import CharacterSum
    from .characters import DirichletCharacter
    from .lfunction import dirichlet_coefficients

    chi = DirichletCharacter.from_local(5, 1, 1)
    c = dirichlet_coefficients(_curve11(), CharacterSum((chi, chi.conj())), 1000).values
    for m in range(2, 32):
        for n in range(2, 1000 // m + 1):
            if math.gcd(m, n) == 1 and abs(c[m * n] - c[m] * c[n]) > 1e-9 * max(1, abs(c[m * n])):
                raise AssertionError(f"c_{m * n} != c_{m} c_{n}")


@check("lfunction")
def bsgs_matches_direct():
    from .lfunction import primes_up_to, traces_of_frobenius

    E = _curve11()
    ps = primes_up_to(20000)
    ps = ps[(ps >= 5) & (ps != 11)][-300:]
    a = traces_of_frobenius(E, ps, direct_limit=0, use_cache=False)
    b = traces_of_frobenius(E, ps, direct_limit=10 ** 9, use_cache=False)
    if np.any(a != b):
        raise AssertionError("baby-step giant-step disagrees with direct counting")


# ---------------------------------------------------------------- afe


@check("afe")
def kernel_oracle():
    from .afe import get_kernel, incomplete_gamma_kernel

    for beta in (1.0, 1.25, 1 + 0.5j):
        k = get_kernel(1, complex(beta))
        for u in np.geomspace(1e-3, 10, 15):
            ref = incomplete_gamma_kernel(beta, u)
            if abs(k(u) / ref - 1) > 1e-9:
                raise AssertionError(f"F_beta({u}) disagrees with the incomplete gamma closed form")


@check("afe")
def y_invariance_and_root_number():
    from .afe import afe_value, solve_root_number
    from .artin import CharacterSum
    from .lfunction import dirichlet_coefficients

    c = dirichlet_coefficients(_curve11(), CharacterSum(()), 3000)
    cs = c.conj()
    w = solve_root_number(1.25, c, cs, 11, 1)
    _close(w.real, 1.0, 1e-6, "root number of 11a")
    v1 = afe_value(1.25, 0.2, w, c, cs, 11, 1).value
    v2 = afe_value(1.25, 0.4, w, c, cs, 11, 1).value
    if abs(v1 - v2) > 1e-6 * abs(v1):
        raise AssertionError("completed value depends on y")


# ---------------------------------------------------------------- average


@check("average")
def poisson():
    from .average import poisson_check, twisted_poisson_check
    from .characters import DirichletCharacter

    _close(float(poisson_check(1.0)), 0.0, 1e-10, "untwisted Poisson")
    for j in (1, 2, 5):
        if twisted_poisson_check(DirichletCharacter.from_local(3, 3, j), 10.0) > 1e-8:
            raise AssertionError("twisted Poisson identity fails")


@check("average")
def gamma_window_algebra():
    from .average import gamma_window, sigma_threshold

    rng = np.random.default_rng(7)
    for _ in range(200):
        d = int(rng.integers(1, 7))
        sigma = float(rng.uniform(1.0001, 1.4999))
        if (not gamma_window(d, sigma).empty) != (sigma > sigma_threshold(d)):
            raise AssertionError(f"window/threshold mismatch at d={d}, sigma={sigma}")


@check("average")
def small_experiment():
    from .artin import CharacterSum
    from .average import ExperimentConfig, run_experiment

    cfg = ExperimentConfig(_curve11(), CharacterSum(()), 3, 2, 3, 1.4, 0.65)
    for r in run_experiment(cfg).records:
        if r.decomposition_residual > 1e-6 or r.nonvanishing_count < 1 or not r.sigma1_support_ok:
            raise AssertionError(f"experiment invariants fail at a={r.a}")


# ---------------------------------------------------------------- cli


@check("cli")
def charsum_command():
    import contextlib
    import io

    from .cli import main

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(["charsum", "--n", "4", "--p", "3", "--a", "2"])
    if code != 0 or buf.getvalue().strip() != "-2":
        raise AssertionError(f"charsum printed {buf.getvalue()!r} (exit {code})")


# ---------------------------------------------------------------- runner


@contextmanager
def _fault(name: str | None):
    if not name:
        yield
        return
    if name != "lanczos":
        from .errors import DomainError

        raise DomainError(f"unknown fault {name!r}; available: lanczos")
    from . import numerics

    saved = numerics._LANCZOS_COEFFS.copy()
    numerics._LANCZOS_COEFFS[3] *= 1.0 + 1e-6
    try:
        yield
    finally:
        numerics._LANCZOS_COEFFS[:] = saved


def run_selftest(module_filter: str | None = None, fault: str | None = None) -> int:
    from .afe import get_kernel

    modules = [m for m in REGISTRY if module_filter in (None, "", m)]
    if not modules:
        from .errors import DomainError

        raise DomainError(f"no checks registered for {module_filter!r}; modules: {', '.join(REGISTRY)}")
    failures = 0
    with _fault(fault):
        get_kernel.cache_clear()
        for module in modules:
            for fn in REGISTRY[module]:
                t0 = time.perf_counter()
                try:
                    fn()
                    status = "PASS"
                    detail = ""
                except Exception as exc:  # report every failure, keep going
                    failures += 1
                    status = "FAIL"
                    detail = f"  {type(exc).__name__}: {exc}"
                print(f"{module:<13} {fn.__name__:<32} {status} {time.perf_counter() - t0:7.2f}s{detail}")
        get_kernel.cache_clear()
    print(f"{failures} failure(s)")
    return 0 if failures == 0 else 4
