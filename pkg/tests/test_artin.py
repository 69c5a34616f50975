import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artinlf.artin import (
    CharacterSum,
    ExternalRep,
    artin_conductor_from_filtration,
    bruteforce_conductor_exponent,
    dual,
    external_from_characters,
    format_external,
    ingest_external,
    lemma2_threshold,
    local_conductor_exponent,
    parse_external,
    twist,
    write_external,
)
from artinlf.characters import DirichletCharacter, enumerate_characters, enumerate_primitive
from artinlf.errors import MissingDataError, TableFormatError, UnsupportedConfigurationError

C3 = DirichletCharacter.from_local(3, 1, 1)
C5 = DirichletCharacter.from_local(5, 1, 1)
C9 = DirichletCharacter.from_local(3, 2, 1)
C27 = DirichletCharacter.from_local(3, 3, 1)


def chars(p, a):
    return [DirichletCharacter((lc,)) for lc in enumerate_characters(p, a)]


def test_twist_examples():
    rho = CharacterSum((C5,))
    assert twist(rho, DirichletCharacter.trivial()) == rho
    assert twist(rho, C27).conductor == 135
    back = twist(twist(rho, C27), C27.conj())
    assert back.sorted_key() == rho.sorted_key()


def test_conductor_exponent_examples():
    rho = CharacterSum((C9, C3))
    assert local_conductor_exponent(rho, 3) == 3
    assert local_conductor_exponent(CharacterSum((C5,)), 3) == 0
    assert CharacterSum((C3, C5)).conductor == 15


def test_threshold_examples():
    rho = CharacterSum((C9, C3))
    assert lemma2_threshold(rho, 3).threshold == 3
    assert twist(rho, C27).local_conductor_exponent(3) == 6
    assert lemma2_threshold(CharacterSum((C5,)), 3).threshold == 1
    for chi in (C3, C9, C27):
        assert twist(CharacterSum((C5,)), chi).local_conductor_exponent(3) == chi.conductor_exponent(3)


def test_below_threshold_cancellation():
    rho = CharacterSum((C9, C9.conj()))
    tw = twist(rho, C9.conj())
    assert tw.local_conductor_exponent(3) < 2 * 2


def test_dual_examples():
    quad = DirichletCharacter.from_local(5, 1, 2)
    rho = CharacterSum((quad, DirichletCharacter.from_local(3, 1, 1)))
    assert dual(rho).sorted_key() == rho.sorted_key()
    assert dual(CharacterSum((C9,))).components[0] == C9.conj().primitive()


def _suite():
    pool = [DirichletCharacter.trivial()]
    for p, a in ((3, 1), (5, 1), (3, 2), (3, 3)):
        pool += chars(p, a)[1:4]
    for dim in (1, 2, 3, 4):
        for comb in itertools.islice(itertools.combinations(pool, dim), 0, None, 7):
            yield CharacterSum(comb)


SUITE = list(_suite())


@pytest.mark.parametrize("rho", SUITE[::5], ids=str)
def test_lemma2_equality_bruteforce(rho):
    t = lemma2_threshold(rho, 3).threshold
    for a in range(t, 5):
        for lc in enumerate_primitive(3, a)[::3]:
            chi = DirichletCharacter((lc,))
            tw = rho.twist(chi)
            brute = sum(bruteforce_conductor_exponent(c, 3) for c in tw.components)
            assert brute == a * rho.dim == tw.local_conductor_exponent(3)


@pytest.mark.parametrize("rho", SUITE[::3], ids=str)
def test_dual_preserves_conductor_and_commutes_with_twist(rho):
    assert dual(rho).conductor == rho.conductor
    assert dual(dual(rho)).sorted_key() == rho.sorted_key()
    chi = DirichletCharacter.from_local(3, 3, 5)
    assert rho.twist(chi).dual().sorted_key() == rho.dual().twist(chi.conj()).sorted_key()


@pytest.mark.parametrize("rho", SUITE[::4], ids=str)
def test_filtration_conductor_matches(rho):
    for p in (3, 5):
        assert artin_conductor_from_filtration(rho, p) == Fraction(rho.local_conductor_exponent(p))


@settings(deadline=None, max_examples=60)
@given(st.sampled_from(SUITE), st.sampled_from([2, 3, 5, 7, 11, 13, 101]))
def test_local_polynomial_shape(rho, q):
    poly = rho.local_polynomial(q)
    assert poly[0] == 1
    unramified = sum(1 for c in rho.components if c.conductor_exponent(q) == 0)
    assert len(poly) - 1 == unramified


def test_external_roundtrip(tmp_path):
    rho = CharacterSum((C3, C3.conj()))
    ext = external_from_characters(rho, 200)
    path = tmp_path / "rep.txt"
    write_external(ext, path)
    back = ingest_external(path)
    assert format_external(back) == format_external(ext)
    for q in (2, 3, 5, 7, 199):
        assert np.array_equal(back.local_polynomial(q), rho.local_polynomial(q))
    assert back.is_integral


def test_external_complex_roundtrip():
    rho = CharacterSum((C9, C5))
    ext = external_from_characters(rho, 60)
    back = parse_external(format_external(ext))
    for q in (2, 7, 59):
        assert np.array_equal(back.local_polynomial(q), rho.local_polynomial(q))
    for q in (2, 7, 59):
        assert np.allclose(back.dual().local_polynomial(q), rho.dual().local_polynomial(q), atol=1e-14)


def test_external_trivial():
    ext = parse_external("dim 1\ncutoff 100\n")
    assert np.array_equal(ext.local_polynomial(97), [1, -1])
    assert ext.conductor == 1
    with pytest.raises(MissingDataError):
        ext.local_polynomial(101)


def test_external_twist_threshold():
    ext = parse_external("dim 2\nconductor 3 2\nthreshold 3 3\ncutoff 50\n3 1 1\n")
    with pytest.raises(UnsupportedConfigurationError):
        ext.twist(C9)
    tw = ext.twist(C27)
    assert tw.local_conductor_exponent(3) == 6
    assert np.array_equal(tw.local_polynomial(3), [1])
    missing = parse_external("dim 1\nconductor 3 1\ncutoff 50\n3 1\n")
    with pytest.raises(MissingDataError):
        missing.twist(C27)


@pytest.mark.parametrize("text, needle", [
    ("dim 1\ncutoff 10\n2 1 -1 1\n", "line 3"),
    ("dim 1\ncutoff 10\n4 1 -1\n", "not prime"),
    ("dim 1\ncutoff 10\n2 2 -1\n", "constant coefficient"),
    ("cutoff 10\n", "dim"),
    ("dim 1\n", "cutoff"),
    ("dim 1\ncutoff 10\nbogus 3\n", "unknown keyword"),
    ("dim 1\ncutoff 10\n2 1 x\n", "bad coefficient"),
    ("dim 1\nconductor 3 1\ncutoff 10\n", "explicit polynomial"),
])
def test_external_rejects_malformed(text, needle):
    with pytest.raises(TableFormatError, match=needle):
        parse_external(text)


def test_external_degree_error_names_line():
    with pytest.raises(TableFormatError) as info:
        parse_external("dim 1\ncutoff 10\n2 1 -1 1\n")
    assert str(info.value).startswith("line 3:")


def test_characters_sum_parse():
    rho = CharacterSum.parse("3:1:1+5:1:1")
    assert rho.dim == 2 and rho.conductor == 15
    assert CharacterSum.parse("trivial").dim == 1


def test_external_rep_is_artin_rep():
    assert isinstance(parse_external("dim 1\ncutoff 3\n"), ExternalRep)
