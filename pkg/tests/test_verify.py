import math

import pytest

from epr_witness.errors import DomainError
from epr_witness.verify import ClosedForms, PointResult, default_grid, run_verification, verify_point
from epr_witness.witness import hbt_witness_value

SMALL_GRID = [(0.25, 0.0), (0.25, 0.3), (0.5, 0.8), (0.5, math.sqrt(0.75))]


def test_default_grid_shape():
    grid = default_grid()
    assert len(grid) == 25
    for nbar, m in grid:
        assert 0 < nbar <= 2
        assert 0 <= m <= math.sqrt(nbar * (nbar + 1)) + 1e-12

    # f = 1 행은 순수 경계
    boundary = [(n, m) for n, m in grid if m > 0 and abs(m * m - n * (n + 1)) < 1e-9]
    assert len(boundary) == 5


def test_default_grid_rejects_bad_input():
    with pytest.raises(DomainError):
        default_grid(steps=0)
    with pytest.raises(DomainError):
        default_grid(nbar_max=-1)


def test_small_grid_passes():
    report = run_verification(SMALL_GRID, tolerance=1e-6, cutoff=24)
    assert report.passed
    assert report.max_deviation < 1e-6
    assert not report.errors
    assert all(r.cutoff == 24 for r in report.results)
    assert {"witness", "visibility", "sx2_no", "var_sz"} <= set(report.results[0].deviations)


def test_pure_boundary_point_passes():
    nbar = 0.5
    result = verify_point(nbar, math.sqrt(nbar * (nbar + 1)), cutoff=24)
    assert result.passed(1e-6)


def test_corrupted_formula_fails_with_named_point():
    broken = ClosedForms(witness=lambda nbar, m: hbt_witness_value(nbar, m).value + 0.01)
    report = run_verification(SMALL_GRID[:2], tolerance=1e-6, cutoff=24, forms=broken)
    assert not report.passed
    failure = report.failures[0]
    assert (failure.nbar, failure.m) == SMALL_GRID[0]
    assert failure.failed_quantities(1e-6) == ["witness"]
    assert failure.to_dict(1e-6)["failed"] == ["witness"]


def test_error_is_recorded_not_raised():
    result = verify_point(0.1, 1.0, cutoff=8)
    assert result.error is not None
    assert "UnphysicalStateError" in result.error
    assert not result.passed(1e-6)


def test_nan_deviation_fails():
    result = PointResult(1.0, 0.5, deviations={"witness": float("nan")})
    assert result.failed_quantities(1e-6) == ["witness"]


@pytest.mark.slow
def test_default_grid_passes_with_converged_cutoffs():
    report = run_verification(default_grid(), tolerance=1e-6)
    assert report.passed, [r.to_dict(1e-6) for r in report.failures]


def test_deviation_is_absolute_for_large_quantities():
    nbar, m = 1.0, math.sqrt(2)
    exact = ClosedForms().variances(nbar, m)
    # (n̄(n̄+1) + m²)/2 = 2
    assert exact["var_sx"] > 1

    def shifted(nbar, m):
        values = ClosedForms().variances(nbar, m)
        values["var_sx"] += 1.5e-6
        return values

    result = verify_point(nbar, m, cutoff=40, forms=ClosedForms(variances=shifted))
    assert result.error is None
    assert result.deviations["var_sx"] > 1e-6
    assert result.failed_quantities(1e-6) == ["var_sx"]
