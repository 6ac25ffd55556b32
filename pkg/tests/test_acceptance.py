"""Acceptance battery: each numbered criterion runs at its stated tolerance
and reports one pass/fail line under pytest -v."""
import pytest

from varan import acceptance

CRITERIA = [getattr(acceptance, f"criterion_{i:02d}") for i in range(1, 13)]


@pytest.mark.parametrize(
    "criterion", CRITERIA, ids=[f"criterion_{i:02d}" for i in range(1, 13)]
)
def test_criterion(criterion):
    res = criterion()
    line = (
        f"criterion {res.number:2d} [{'PASS' if res.passed else 'FAIL'}] {res.name}: "
        f"measured={res.measured} expected={res.expected} tol={res.tolerance}"
    )
    print(line)
    assert res.passed, line
