import numpy as np

from artinlf import numerics
from artinlf.cli import main


def test_full_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "0 failure(s)" in out
    assert "FAIL" not in out


def test_fault_injection_detected_and_restored(capsys):
    saved = numerics._LANCZOS_COEFFS.copy()
    assert main(["selftest", "--filter", "numerics", "--inject-fault", "lanczos"]) == 4
    out = capsys.readouterr().out
    assert "gamma_recursion" in out and "FAIL" in out
    assert np.array_equal(numerics._LANCZOS_COEFFS, saved)


def test_unknown_fault_is_validation_error():
    assert main(["selftest", "--inject-fault", "nosuch"]) == 3
