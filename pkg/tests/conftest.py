import pytest

from artinlf.artin import CharacterSum
from artinlf.characters import DirichletCharacter
from artinlf.lfunction import EllipticCurve


@pytest.fixture(scope="session")
def curve11():
    return EllipticCurve.from_ainvs([0, -1, 1, 0, 0], 11)


@pytest.fixture(scope="session")
def chi5():
    return DirichletCharacter.from_local(5, 1, 1)


@pytest.fixture(scope="session")
def rho_trivial():
    return CharacterSum(())


@pytest.fixture(scope="session")
def rho_chi5_pair(chi5):
    return CharacterSum((chi5, chi5.conj()))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results):
            terminalreporter.write_line(results[key])
