import pytest

from mallowsAvoid.cli import verify
from mallowsAvoid.cli.verify import CHECKS, run_suite
from mallowsAvoid.core.errors import VerificationError

FAST_CHECKS = [
    "ejemplos de permutaciones",
    "involuciones",
    "biyección de Lehmer",
    "conteo de Catalan",
    "recurrencias frente al oráculo",
    "proyección e independencia",
    "cotas de X monótonas",
    "ley de 123",
    "asintótica uniforme",
    "raíces en forma cerrada",
]
SLOW_CHECKS = [name for name, _ in CHECKS if name not in FAST_CHECKS]


def test_check_names_are_unique():
    names = [name for name, _ in CHECKS]
    assert len(names) == len(set(names))
    assert set(FAST_CHECKS) <= set(names)


@pytest.mark.parametrize("name", FAST_CHECKS)
def test_fast_check_passes(name):
    report = run_suite([name])
    assert [r.name for r in report.results] == [name]
    assert report.passed, report.manifest()


@pytest.mark.slow
@pytest.mark.parametrize("name", SLOW_CHECKS)
def test_slow_check_passes(name):
    report = run_suite([name])
    assert report.passed, report.manifest()


def test_failures_are_reported(monkeypatch):
    def broken():
        raise ZeroDivisionError("división por cero")

    monkeypatch.setattr(verify, "CHECKS", [
        ("pasa", lambda: (True, "ok")),
        ("falla", lambda: (False, "valor fuera de rango")),
        ("explota", broken),
    ])
    report = run_suite()
    assert not report.passed
    assert [r.name for r in report.failures] == ["falla", "explota"]
    assert "ZeroDivisionError" in report.failures[1].detail
    assert report.manifest()[0].startswith("[OK] pasa")
    with pytest.raises(VerificationError):
        run_suite(raise_on_failure=True)
