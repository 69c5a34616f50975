import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artinlf.afe import gamma_factor
from artinlf.artin import CharacterSum
from artinlf.characters import DirichletCharacter, enumerate_characters, primitive_char_sum
from artinlf.errors import DomainError, UnsupportedConfigurationError
from artinlf.average import (
    CharacterBatch,
    ExperimentConfig,
    coprime_theta,
    diagonal_offdiagonal_split,
    gamma_window,
    poisson_check,
    poisson_sides,
    primitive_char_sums,
    report_rows,
    run_experiment,
    sigma_threshold,
    twisted_poisson_sides,
)
from artinlf.lfunction import EllipticCurve


def test_sigma_threshold_values():
    assert sigma_threshold(2) == 1.1
    assert Fraction(sigma_threshold(1)).limit_denominator(100) == Fraction(5, 6)
    assert sigma_threshold(3) == pytest.approx(17 / 14, abs=1e-15)


def test_gamma_window_values():
    w = gamma_window(1, 1.4)
    assert w.lo == pytest.approx(0.5) and w.hi == pytest.approx(0.7222222222)
    w = gamma_window(2, 1.4)
    assert w.lo == pytest.approx(0.25) and w.hi == pytest.approx(4.2 / 7.2)
    assert gamma_window(2, 1.05).empty
    with pytest.raises(DomainError):
        gamma_window(2, 1.6)


@settings(max_examples=300)
@given(st.integers(1, 6), st.floats(1.0001, 1.4999))
def test_window_nonempty_iff_above_threshold(d, sigma):
    assert (not gamma_window(d, sigma).empty) == (sigma > sigma_threshold(d))


def test_poisson_closed_form():
    r = poisson_sides(1.0)
    coth = 1 / math.tanh(math.pi)
    assert abs(coth - 1.0037418732) < 1e-10
    assert r.lhs.real == pytest.approx(coth, abs=1e-12)
    assert r.rhs.real == pytest.approx(coth, abs=1e-12)


def test_poisson_against_mpmath():
    y = 0.5
    ref = float(mpmath.nsum(lambda n: 1 / (mpmath.pi * (1 + (n / y) ** 2)), [-mpmath.inf, mpmath.inf]))
    assert poisson_sides(y).lhs.real == pytest.approx(ref, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 200))
def test_poisson_identity(y):
    assert poisson_check(y) < 1e-10 * max(1.0, y)


def test_poisson_large_y_dominated_by_zero_frequency():
    y = 3.0
    r = poisson_sides(y)
    assert r.rhs.real == pytest.approx(y * (1 + 2 * math.exp(-2 * math.pi * y)), rel=1e-12)


@pytest.mark.parametrize("j", range(1, 18))
def test_twisted_poisson_mod27(j):
    chi = DirichletCharacter.from_local(3, 3, j)
    for y in (0.7, 10.0, 100.0):
        r = twisted_poisson_sides(chi, y)
        assert r.residual < 1e-8 * max(1.0, abs(r.rhs))
    r0 = twisted_poisson_sides(chi, 10.0, include_zero=False)
    assert abs(r0.rhs - twisted_poisson_sides(chi, 10.0).rhs) < 1e-10


def test_twisted_poisson_brute_force_lhs():
    chi = DirichletCharacter.from_local(5, 1, 1)
    y = 2.0
    n = np.arange(-200000, 200001)
    brute = np.sum(chi.values(n) / (math.pi * (1 + (n / y) ** 2)))
    assert twisted_poisson_sides(chi, y).lhs == pytest.approx(brute, abs=1e-5)


def test_twisted_poisson_conjugation():
    chi = DirichletCharacter.from_local(3, 3, 5)
    a = twisted_poisson_sides(chi, 4.0)
    b = twisted_poisson_sides(chi.conj(), 4.0)
    assert abs(a.lhs.conjugate() - b.lhs) < 1e-12 and abs(a.rhs.conjugate() - b.rhs) < 1e-12


def test_primitive_char_sums_matches_divisor_formula():
    for p, a in ((3, 2), (3, 4), (5, 2), (7, 1)):
        n = np.arange(1, 3 * p ** a)
        vec = primitive_char_sums(n, p, a)
        ref = [primitive_char_sum(int(k), p, a) if k % p else 0 for k in n]
        assert np.array_equal(vec, ref)


def test_character_batch_matches_direct():
    batch = CharacterBatch(3, 3)
    rng = np.random.default_rng(0)
    n = rng.integers(1, 10000, 300)
    vals = rng.normal(size=300) + 1j * rng.normal(size=300)
    s = batch.sums(n, vals)
    cs = batch.conj_sums(n, vals)
    for k, j in enumerate(batch.indices):
        chi = batch.character(j)
        cv = chi.values(n)
        assert s[k] == pytest.approx(np.sum(cv * vals), abs=1e-9)
        assert cs[k] == pytest.approx(np.sum(cv.conj() * vals), abs=1e-9)
    assert batch.count == 12


def test_coprime_theta_direct():
    y, p = 7.0, 3
    H = lambda n: 1 / (mpmath.pi * (1 + (n / y) ** 2))  # noqa: E731
    full = mpmath.nsum(H, [-mpmath.inf, mpmath.inf])
    multiples = mpmath.nsum(lambda k: H(p * k), [-mpmath.inf, mpmath.inf])
    assert coprime_theta(y, p) == pytest.approx(float(full - multiples), rel=1e-12)


@pytest.fixture(scope="module")
def small_report(curve11, rho_trivial):
    cfg = ExperimentConfig(curve11, rho_trivial, 3, 2, 4, 1.4, 0.65)
    return run_experiment(cfg)


def test_experiment_decomposition(small_report):
    for r in small_report.records:
        assert r.decomposition_residual < 1e-6
        assert abs(r.A1 + r.Sigma1 + r.Sigma2 - r.total) < 1e-12 * abs(r.total)
        assert r.nonvanishing_count >= 1
        assert r.sigma1_support_ok
        assert np.all(np.abs(np.abs(r.root_numbers) - 1) < 1e-4)
        assert r.primitive_count == (3 ** r.a - 3 ** (r.a - 1)) - (3 ** (r.a - 1) - 3 ** (r.a - 2) if r.a > 1 else 1)


def test_experiment_main_term(small_report):
    r = small_report.by_a(4)
    target = abs(gamma_factor(1.4, 1))
    assert abs(abs(r.A1) / r.primitive_count - target) < 0.05 * target


def test_experiment_thread_independence(curve11, rho_trivial, small_report):
    cfg = ExperimentConfig(curve11, rho_trivial, 3, 2, 4, 1.4, 0.65, threads=3)
    rows_a = report_rows(small_report, timing=False)
    rows_b = report_rows(run_experiment(cfg), timing=False)
    assert rows_a == rows_b


def test_experiment_config_validation(curve11, rho_trivial, rho_chi5_pair):
    with pytest.raises(UnsupportedConfigurationError):
        ExperimentConfig(curve11, rho_trivial, 11)
    with pytest.raises(DomainError):
        ExperimentConfig(curve11, rho_trivial, 3, beta=1.6)
    with pytest.raises(DomainError):
        ExperimentConfig(curve11, rho_trivial, 3, gamma=0.9)
    with pytest.raises(DomainError):
        ExperimentConfig(curve11, rho_chi5_pair, 3, beta=1.05, gamma=0.3)
    with pytest.raises(DomainError):
        ExperimentConfig(curve11, rho_trivial, 2)
    cfg = ExperimentConfig(curve11, CharacterSum((DirichletCharacter.from_local(3, 2, 1),)), 3)
    assert cfg.a_min == 4


def test_diagonal_scaling(curve11, rho_trivial):
    cfg = ExperimentConfig(curve11, rho_trivial, 3, 2, 5, 1.4, 0.65)
    s3 = diagonal_offdiagonal_split(cfg, 3)
    s4 = diagonal_offdiagonal_split(cfg, 4)
    s5 = diagonal_offdiagonal_split(cfg, 5)
    d, sigma, gam, p = 1, 1.4, 0.65, 3
    # diag ~ P^(4d(1-sigma)) * count * y, with y = P^(2 d gamma) and count ~ P
    predicted = p ** (4 * d * (1 - sigma) + 2 * d * gam + 1)
    assert s4.diag / s3.diag == pytest.approx(predicted, rel=0.05)
    assert s5.diag / s4.diag == pytest.approx(predicted, rel=0.05)
    assert s5.offdiag / s5.diag < s3.offdiag / s3.diag
    for s, a in ((s3, 3), (s4, 4), (s5, 5)):
        assert s.max_gauss_abs <= p ** a
