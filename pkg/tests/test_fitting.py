"""Tests of parabola fitting and apparent wall localization."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magiclbm.errors import FitError, LocalizationError
from magiclbm.fitting import (
    DEGENERACY_FLOOR,
    ParabolaFit,
    WallLocationResult,
    fit_parabola,
    wall_location,
)


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------


def test_fit_recovers_unit_parabola_roots():
    # u = x (1 - x) sampled strictly inside its roots must hand back the
    # roots 0 and 1 to near machine precision.
    x = np.arange(0.1, 0.95, 0.1)
    fit = fit_parabola(x, x * (1.0 - x))
    roots = np.sort(fit.roots)
    assert abs(roots[0] - 0.0) < 1e-12
    assert abs(roots[1] - 1.0) < 1e-12
    # Root-mean-square deviation of exact parabola data sits at the
    # rounding floor of the sampled values.
    assert fit.residual < 1e-15


def test_fit_evaluates_like_the_sampled_polynomial():
    x = np.linspace(-2.0, 3.0, 11)
    u = 1.5 * x * x - 2.0 * x + 0.25
    fit = fit_parabola(x, u)
    assert fit(0.0) == pytest.approx(0.25, abs=1e-12)
    assert fit(2.0) == pytest.approx(1.5 * 4 - 4 + 0.25, abs=1e-12)


@given(
    r1=st.floats(-1.0, 0.4),
    r2=st.floats(0.6, 2.0),
    curvature=st.floats(0.1, 10.0),
)
def test_fit_recovers_synthetic_roots(r1, r2, curvature):
    x = np.linspace(0.0, 1.0, 9)
    u = -curvature * (x - r1) * (x - r2)
    fit = fit_parabola(x, u)
    roots = np.sort(fit.roots)
    assert roots[0] == pytest.approx(r1, abs=1e-8)
    assert roots[1] == pytest.approx(r2, abs=1e-8)


def test_fit_reports_residual_for_noisy_data():
    rng = np.random.default_rng(9)
    x = np.linspace(0.0, 1.0, 21)
    u = x * (1.0 - x) + 1e-6 * rng.normal(size=x.size)
    fit = fit_parabola(x, u)
    assert fit.residual > 0.0
    assert isinstance(fit, ParabolaFit)


def test_fit_rejects_mismatched_lengths():
    with pytest.raises(FitError, match="differ in length"):
        fit_parabola(np.arange(4.0), np.arange(5.0))


def test_fit_rejects_too_few_distinct_points():
    x = np.array([0.0, 0.0, 1.0])
    u = np.array([1.0, 1.0, 2.0])
    with pytest.raises(FitError, match="at least 3 distinct"):
        fit_parabola(x, u)


def test_fit_rejects_linear_data():
    x = np.linspace(0.0, 4.0, 9)
    with pytest.raises(FitError, match="no curvature"):
        fit_parabola(x, 2.0 * x + 1.0)


def test_degeneracy_floor_is_strict():
    assert DEGENERACY_FLOOR == 1e-14


# ---------------------------------------------------------------------------
# Wall localization
# ---------------------------------------------------------------------------


def _fit_with_roots(r_lower, r_upper):
    x = np.linspace(min(r_lower, 0.0) + 0.5, max(r_upper, 0.0) - 0.5, 9)
    u = -(x - r_lower) * (x - r_upper)
    return fit_parabola(x, u)


def test_lower_wall_offset_counts_outward():
    # A root half a spacing below the boundary node is an offset of +1/2.
    fit = _fit_with_roots(-0.5, 10.5)
    result = wall_location(fit, x_b=0.0, dx=1.0, side="lower")
    assert isinstance(result, WallLocationResult)
    assert result.delta_q == pytest.approx(0.5, abs=1e-10)
    assert result.side == "lower"
    assert result.root == pytest.approx(-0.5, abs=1e-10)


def test_upper_wall_offset_counts_outward():
    fit = _fit_with_roots(-0.5, 10.5)
    result = wall_location(fit, x_b=10.0, dx=1.0, side="upper")
    assert result.delta_q == pytest.approx(0.5, abs=1e-10)


def test_wall_offset_scales_with_spacing():
    fit = _fit_with_roots(-1.0, 21.0)
    result = wall_location(fit, x_b=0.0, dx=2.0, side="lower")
    assert result.delta_q == pytest.approx(0.5, abs=1e-10)


def test_inward_root_gives_negative_offset():
    fit = _fit_with_roots(0.25, 9.75)
    result = wall_location(fit, x_b=0.0, dx=1.0, side="lower")
    assert result.delta_q == pytest.approx(-0.25, abs=1e-10)


def test_wall_location_rejects_unknown_side():
    fit = _fit_with_roots(-0.5, 10.5)
    with pytest.raises(ValueError):
        wall_location(fit, x_b=0.0, dx=1.0, side="middle")


def test_wall_location_requires_real_roots():
    x = np.linspace(0.0, 1.0, 9)
    fit = fit_parabola(x, (x - 0.5) ** 2 + 1.0)
    with pytest.raises(LocalizationError, match="no real roots"):
        wall_location(fit, x_b=0.0, dx=1.0, side="lower")


def test_wall_location_rejects_far_roots():
    # Roots five spacings away from the boundary node are not a wall.
    fit = _fit_with_roots(5.0, 20.0)
    with pytest.raises(LocalizationError, match="outside the window"):
        wall_location(fit, x_b=0.0, dx=1.0, side="lower")


def test_window_admits_offsets_between_minus_one_and_two():
    lower_edge = wall_location(
        _fit_with_roots(-1.99, 30.0), x_b=0.0, dx=1.0, side="lower"
    )
    assert lower_edge.delta_q == pytest.approx(1.99, abs=1e-8)
    inner_edge = wall_location(
        _fit_with_roots(0.99, 30.0), x_b=0.0, dx=1.0, side="lower"
    )
    assert inner_edge.delta_q == pytest.approx(-0.99, abs=1e-8)
