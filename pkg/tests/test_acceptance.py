"""The fourteen acceptance criteria at their stated tolerances.

Each criterion prints one ``[PASS]``/``[FAIL]`` line (visible with ``-s`` or
in the captured output of a failure) and the test asserts the verdict,
including the runtime budget enforced by :func:`rowcon.acceptance.run_criterion`.
"""

import pytest

from rowcon.acceptance import CRITERIA, AcceptanceContext, run_acceptance, run_criterion
from rowcon.numlin import DEFAULT_TOL

SEED = 20240611


@pytest.fixture(scope="module")
def context():
    return AcceptanceContext(SEED, DEFAULT_TOL)


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"{c[0]:02d}-{c[1]}" for c in CRITERIA])
def test_criterion(number, context, capsys):
    result = run_criterion(number, context)
    with capsys.disabled():
        print("\n" + result.line(), f"({result.runtime_s:.2f}s)")
    assert result.passed, (result.error, result.metrics)


def test_report_layout():
    report, results = run_acceptance(SEED, DEFAULT_TOL, only=[1, 2])
    assert [r.number for r in results] == [1, 2]
    assert report["passed"] and report["first_failure"] is None
    assert report["seed"] == SEED and "version" in report
    assert all("runtime" not in c for c in report["criteria"])
    again, _ = run_acceptance(SEED, DEFAULT_TOL, only=[1, 2])
    assert again == report
