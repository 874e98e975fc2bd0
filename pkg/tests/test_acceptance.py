"""Acceptance suite: one test per criterion, at the stated tolerances.

The checks live in kscatter.verify (shared with the `kscatter verify` CLI);
every hard criterion must pass exactly, the final identity check is
reported without asserting.
"""

import pytest

from kscatter import verify


@pytest.fixture(scope="module")
def results():
    return {res.name: res for res in verify.run_all(slow_tier=False, seed=0)}


def _require(results, key):
    res = next(r for name, r in results.items() if name.startswith(key))
    print(res.line())
    assert res.ok, res.detail


def test_criterion_1_q1_golden(results):
    _require(results, "1 ")


def test_criterion_2_q2_golden(results):
    _require(results, "2 ")


def test_criterion_3_q3(results):
    _require(results, "3 ")


def test_criterion_4_oracle_sweep(results):
    _require(results, "4 ")


def test_criterion_5_k2_closed_forms(results):
    _require(results, "5 ")


def test_criterion_6_chi_4_6(results):
    _require(results, "6 ")


def test_criterion_7_route_equivalence(results):
    _require(results, "7 ")


def test_criterion_8_property_suites(results):
    _require(results, "8 ")


def test_criterion_9_soft_identity_reported(results):
    res = next(r for name, r in results.items() if name.startswith("9 "))
    print(res.line())
    # soft check: reported, never asserted
    assert not res.hard


@pytest.mark.slow
def test_slow_scaling_consistency():
    res = verify.check_scaling_consistency()
    print(res.line())
    assert res.ok, res.detail
