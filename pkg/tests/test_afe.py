import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artinlf.afe import (
    AFEKernel,
    afe_value,
    afe_weights,
    default_y_pair,
    direct_series,
    functional_equation_check,
    gamma_factor,
    get_kernel,
    incomplete_gamma_kernel,
    kernel_quadrature,
    solve_root_number,
)
from artinlf.artin import CharacterSum
from artinlf.characters import DirichletCharacter
from artinlf.errors import CutoffError, DomainError, RootNumberError
from artinlf.lfunction import EllipticCurve, dirichlet_coefficients, pair_conductor, twist_coefficients


def mp_kernel(d, beta, u):
    """(1/2 pi i) int_{Re s = 2} L_inf(s + beta) u^-s ds / s by mpmath quadrature."""
    mpmath.mp.dps = 30
    beta = mpmath.mpc(beta)

    def f(t):
        s = 2 + 1j * t
        return (2 * (2 * mpmath.pi) ** (-(s + beta)) * mpmath.gamma(s + beta)) ** d * mpmath.mpf(u) ** (-s) / s

    val = mpmath.quad(f, [-mpmath.inf, -20, 0, 20, mpmath.inf]) / (2 * mpmath.pi)
    return complex(val)


@pytest.fixture(scope="module")
def table11(curve11, rho_trivial):
    c = dirichlet_coefficients(curve11, rho_trivial, 120000)
    return c, c.conj()


def test_gamma_factor_values():
    assert gamma_factor(1, 1) == pytest.approx(1 / math.pi, rel=1e-14)
    assert gamma_factor(1, 2) == pytest.approx(1 / math.pi ** 2, rel=1e-14)
    assert gamma_factor(2, 1) == pytest.approx(1 / (2 * math.pi ** 2), rel=1e-14)


def test_kernel_limits():
    k = get_kernel(1, complex(1.0))
    assert k(1e-12) == pytest.approx(1 / math.pi, rel=1e-9)
    assert k(1.0) == pytest.approx(math.exp(-2 * math.pi) / math.pi, rel=1e-10)
    assert abs(k(1.0).real - 5.944e-4) < 1e-6
    k2 = get_kernel(2, complex(1.0))
    val = abs(k2(10.0))
    assert val < 1e-8 and 10.0 ** 10 * val < 1e-3


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 10), st.sampled_from([1.0, 1.25, 1.4, 1 + 0.5j, 0.6, 0.75 - 0.3j]))
def test_kernel_d1_matches_closed_form(u, beta):
    k = get_kernel(1, complex(beta))
    ref = complex(mpmath.gammainc(beta, 2 * mpmath.pi * u)) * 2 * (2 * math.pi) ** (-beta)
    assert abs(k(u) / ref - 1) < 1e-9
    assert abs(incomplete_gamma_kernel(beta, u) / ref - 1) < 1e-12


@pytest.mark.parametrize("d, beta, u", [(2, 1.4, 0.3), (2, 0.6, 0.05), (2, 1.25 + 0.5j, 2.0), (3, 1.4, 1.0), (4, 0.7, 5.0)])
def test_kernel_higher_degree_matches_mpmath(d, beta, u):
    ref = mp_kernel(d, beta, u)
    got = get_kernel(d, complex(beta))(u)
    assert abs(got / ref - 1) < 1e-9
    assert abs(kernel_quadrature(d, beta, u) / ref - 1) < 1e-10


def test_kernel_outside_table_uses_quadrature():
    k = AFEKernel(1, 1.0, u_min=1e-3, u_max=5.0)
    for u in (1e-5, 8.0):
        assert k(u) == pytest.approx(incomplete_gamma_kernel(1.0, u), rel=1e-10)


def test_kernel_rejects_bad_arguments():
    k = get_kernel(1, complex(1.0))
    with pytest.raises(DomainError):
        k(-1.0)
    with pytest.raises(DomainError):
        AFEKernel(0, 1.0)


def test_root_number_11a(table11):
    c, cs = table11
    w = solve_root_number(1.25, c, cs, 11, 1)
    assert abs(abs(w) - 1) < 1e-6 and abs(w.imag) < 1e-6
    assert w.real == pytest.approx(1.0, abs=1e-6)
    y1, y2 = default_y_pair(11)
    w_other = solve_root_number(1.25, c, cs, 11, 1, y1 * 0.7, y2 * 1.6)
    assert abs(w - w_other) < 1e-5


def test_y_invariance_11a(table11):
    c, cs = table11
    w = solve_root_number(1.25, c, cs, 11, 1)
    for y in (0.1, 0.3, 0.8):
        a = afe_value(1.25, y, w, c, cs, 11, 1)
        b = afe_value(1.25, 2 * y, w, c, cs, 11, 1)
        assert abs(a.value - b.value) <= 1e-6 * abs(a.value)
        assert a.error_estimate < 1e-9


def test_beta2_matches_direct_series(table11):
    c, cs = table11
    w = solve_root_number(2.0, c, cs, 11, 1)
    v = afe_value(2.0, 0.3, w, c, cs, 11, 1)
    assert abs(v.value / gamma_factor(2.0, 1) - direct_series(c, 2.0, 100000)) < 1e-6


def test_functional_equation_residual(table11):
    c, cs = table11
    w = solve_root_number(1.25, c, cs, 11, 1)
    assert functional_equation_check(1.25, w, c, cs, 11, 1).residual < 1e-6
    assert functional_equation_check(1.1 + 0.3j, w, c, cs, 11, 1).residual < 1e-6


def test_functional_equation_detects_perturbation(table11):
    c, cs = table11
    w = solve_root_number(1.25, c, cs, 11, 1)
    clean = functional_equation_check(1.25, w, c, cs, 11, 1).residual
    for n in (2, 3, 5, 7, 10):
        bad = c.values.copy()
        bad[n] *= 1.1
        res = functional_equation_check(1.25, w, bad, bad.conj(), 11, 1).residual
        assert res > 1e6 * max(clean, 1e-15)
        if n == 2:
            assert res > 1e-3


def test_central_zero_for_odd_curve(rho_trivial):
    e37 = EllipticCurve.from_ainvs([0, 0, 1, -1, 0], 37)
    c = dirichlet_coefficients(e37, rho_trivial, 20000)
    w = solve_root_number(1.25, c, c.conj(), 37, 1)
    assert w.real == pytest.approx(-1.0, abs=1e-6)
    v = afe_value(1.0, 1 / math.sqrt(37), w, c, c.conj(), 37, 1)
    assert abs(v.value) < 1e-9


def test_self_dual_pair_root_number_real(curve11, rho_chi5_pair):
    N = pair_conductor(curve11, rho_chi5_pair)
    c = dirichlet_coefficients(curve11, rho_chi5_pair, 60000)
    w = solve_root_number(1.25, c, c.conj(), N, 2)
    assert abs(w.imag) < 1e-6 and abs(abs(w) - 1) < 1e-6


def test_twist_conjugation_symmetry(curve11, rho_trivial):
    base = dirichlet_coefficients(curve11, rho_trivial, 30000)
    chi = DirichletCharacter.from_local(3, 2, 1)
    c = twist_coefficients(base, chi)
    cbar = twist_coefficients(base, chi.conj())
    N = pair_conductor(curve11, rho_trivial, 3, 2)
    w = solve_root_number(1.3, c, cbar, N, 1)
    wbar = solve_root_number(1.3, cbar, c, N, 1)
    y = 1 / math.sqrt(N)
    v = afe_value(1.3, y, w, c, cbar, N, 1).value
    vbar = afe_value(1.3, y, wbar, cbar, c, N, 1).value
    assert abs(v - vbar.conjugate()) < 1e-10 * abs(v)
    assert abs(wbar - w.conjugate()) < 1e-8


def test_cutoff_error_when_table_short(table11):
    c, cs = table11
    short = c.values[:5]
    with pytest.raises(CutoffError):
        afe_value(1.25, 1e-4, 1.0, short, short, 11, 1)


def test_root_number_inconsistency_detected(table11):
    c, cs = table11
    with pytest.raises(RootNumberError):
        solve_root_number(1.25, c, cs, 13, 1)
    with pytest.raises(DomainError):
        solve_root_number(1.25, c, cs, 11, 1, 0.3, 0.3)


def test_weights_truncation_certified():
    wts = afe_weights(1, 1.25, 11, 0.3)
    assert wts.tail1 < 1e-12 and wts.tail2 < 1e-12
    assert wts.m1 > 10 and wts.m2 > 10
