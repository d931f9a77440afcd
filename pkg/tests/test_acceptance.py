"""Acceptance criteria, one test each, at the stated sizes and tolerances.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL line per
criterion. The same checks back ``robustseed verify --level full``.
"""
from __future__ import annotations

import pytest

from robustseed import verification as V


def _report(res: V.CheckResult, budget_s: float | None = None) -> None:
    print(res.line())
    assert res.passed, res.detail
    if budget_s is not None:
        assert res.seconds < budget_s, f"took {res.seconds:.1f}s, budget {budget_s}s"


def test_01_robust_cost_oracle_equivalence():
    _report(V.check_robust_cost_equivalence(instances=1000, rtol=1e-9), budget_s=30)


def test_02_clip_off_reduction():
    _report(V.check_clip_off_reduction(trajectories=100, n=200, k=10))


def test_03_uniformity_band_no_counterexample():
    _report(V.check_uniform_band(pairs=10_000))


def test_04_potential_identity_and_bounds():
    _report(V.check_potential_identity())


@pytest.mark.slow
def test_05_conditional_cost_monte_carlo():
    _report(V.check_conditional_cost(samples=10_000), budget_s=120)


@pytest.mark.slow
def test_06_expected_potential_desk_scale():
    _report(V.check_desk_expectation(runs=2000, factor=100.0))


@pytest.mark.slow
def test_07_synthetic_table_trend():
    _report(V.check_synthetic_trend(repetitions=10, data_seeds=V.SEPARATED_SEEDS), budget_s=180)


def test_08_exact_z_discard():
    _report(V.check_exact_z())


@pytest.mark.slow
def test_09_runtime_linearity():
    _report(V.check_runtime_linearity(n=10_000, d=10, k=20, trials=5, limit=2.5), budget_s=300)


def test_10_determinism():
    _report(V.check_determinism())
