"""Tests of the steady-state experiments and magic-product measurements.

Grids here are deliberately small: the half-spacing wall crossing at the
magic relaxation product is exact at any resolution, so a short channel
probes the same property the production sizes do, in a fraction of the
time.  The off-magic oracle is the closed form of the discrete steady
profile on sixteen nodes, frozen below.
"""

import math

import numpy as np
import pytest

from magiclbm.errors import (
    ConfigurationError,
    ConvergenceError,
    LocalizationError,
    MeasurementError,
)
from magiclbm.collision import diffusivity_from_params
from magiclbm.experiments import (
    D1Q3Experiment,
    D2Q9Experiment,
    MagicSweep,
    SteadyStateCriterion,
    density_profile,
    exact_poiseuille,
    exact_poisson_1d,
    find_magic_root,
    measure_diffusivity,
    measure_sound_speed,
    measure_viscosity,
    predict_magic,
    run_to_steady,
    sweep_product,
    velocity_profile,
    wall_offset,
)

# Small-grid stand-ins for the production channels.
LINE = dict(n=16)
CHANNEL = dict(nx=6, ny=11)


def line_offset(variant, sigma1, sigma2, side="lower"):
    exp = D1Q3Experiment(variant=variant, sigma1=sigma1, sigma2=sigma2, **LINE)
    f, _ = run_to_steady(exp)
    return wall_offset(exp, f, side=side).delta_q


def channel_offset(driving, sigma5, sigma8, **kwargs):
    exp = D2Q9Experiment(driving=driving, sigma5=sigma5, sigma8=sigma8,
                         **{**CHANNEL, **kwargs})
    f, _ = run_to_steady(exp)
    return wall_offset(exp, f).delta_q


# ---------------------------------------------------------------------------
# Predicted magic products
# ---------------------------------------------------------------------------


def test_predicted_products():
    assert predict_magic("d1q3-a") == pytest.approx(1.0 / 8.0)
    assert predict_magic("d1q3-b") == pytest.approx(3.0 / 8.0)
    assert predict_magic("force-split-half") == pytest.approx(3.0 / 8.0)
    assert predict_magic("force-population") == pytest.approx(3.0 / 16.0)
    assert predict_magic("pressure", -2.0, 1.0) == pytest.approx(3.0 / 16.0)
    assert predict_magic("pressure", -2.5, 2.5) == pytest.approx(3.0 / 8.0)


def test_pressure_predictor_formula():
    # -(3/8)(alpha + 4) / (alpha + 2 beta - 4) at a generic point.
    alpha, beta = -1.8, 1.4
    expected = -(3.0 / 8.0) * (alpha + 4.0) / (alpha + 2.0 * beta - 4.0)
    assert predict_magic("pressure", alpha, beta) == pytest.approx(expected)


def test_pressure_predictor_requires_parameters():
    with pytest.raises(ConfigurationError, match="alpha, beta"):
        predict_magic("pressure")


def test_pressure_predictor_rejects_singular_denominator():
    with pytest.raises(ConfigurationError, match="singular"):
        predict_magic("pressure", 0.0, 2.0)


def test_unknown_variant_is_rejected():
    with pytest.raises(ConfigurationError, match="unknown scheme variant"):
        predict_magic("d3q19")


# ---------------------------------------------------------------------------
# Line scheme steady states
# ---------------------------------------------------------------------------


def test_line_magic_product_puts_wall_at_half_spacing():
    assert line_offset("a", 1.0, 0.125) == pytest.approx(0.5, abs=1e-10)
    assert line_offset("b", 1.0, 0.375) == pytest.approx(0.5, abs=1e-10)


def test_line_profile_is_symmetric():
    exp = D1Q3Experiment(variant="a", sigma1=1.0, sigma2=0.125, **LINE)
    f, _ = run_to_steady(exp)
    lower = wall_offset(exp, f, side="lower").delta_q
    upper = wall_offset(exp, f, side="upper").delta_q
    assert lower == pytest.approx(upper, abs=1e-10)
    x, rho = density_profile(exp, f)
    assert np.allclose(rho, rho[::-1], atol=1e-18)


def test_line_off_magic_offset_matches_closed_form():
    # On sixteen nodes the discrete steady profile gives the apparent
    # wall at q^2 + 15 q - (15/2 + 2 P) = 0 with P the sigma product, so
    # at P = 1/4 the offset is (-15 + sqrt(257)) / 2.
    expected = (-15.0 + math.sqrt(257.0)) / 2.0
    assert line_offset("a", 1.0, 0.25) == pytest.approx(expected, abs=1e-8)


def test_line_offset_depends_only_on_the_product():
    product = 0.2
    offsets = [
        line_offset("a", sa, product / sa)
        for sa in (1.0, 0.5, 2.0, product)
    ]
    spread = max(offsets) - min(offsets)
    assert spread < 1e-9


def test_line_density_profile_matches_diffusion_solution():
    # Away from the walls the profile must follow the source-balance
    # parabola of the continuum problem with the formula diffusivity.
    exp = D1Q3Experiment(variant="a", n=24, sigma1=1.0, sigma2=0.125)
    f, _ = run_to_steady(exp)
    x, rho = density_profile(exp, f)
    kappa = diffusivity_from_params("a", exp.sigma1, exp.zeta)
    length = exp.n  # walls sit half a spacing outside the end nodes
    scaled = (x + 0.5) / length
    expected = exact_poisson_1d(exp.source * length * length, kappa, scaled)
    assert np.allclose(rho, expected, rtol=5e-3, atol=1e-12)


# ---------------------------------------------------------------------------
# Channel steady states
# ---------------------------------------------------------------------------


def test_split_half_magic_product_puts_wall_at_half_spacing():
    assert channel_offset("force-split-half", 0.375, 1.0) == pytest.approx(
        0.5, abs=1e-8
    )


def test_population_magic_product_puts_wall_at_half_spacing():
    assert channel_offset("force-population", 0.1875, 1.0) == pytest.approx(
        0.5, abs=1e-8
    )


def test_pressure_magic_product_puts_wall_at_half_spacing():
    # The inlet and outlet columns carry boundary layers that decay
    # along the channel, so the mid-channel fit needs some distance
    # from both ends; forty columns leave the crossing clean.
    offset = channel_offset("pressure", 0.1875, 1.0, nx=40)
    assert offset == pytest.approx(0.5, abs=1e-5)


def test_channel_offset_depends_only_on_the_product():
    product = 0.3
    offsets = [
        channel_offset("force-split-half", sa, product / sa)
        for sa in (0.375, 1.0, 1.5)
    ]
    assert max(offsets) - min(offsets) < 1e-9


def test_channel_profile_matches_poiseuille_solution():
    exp = D2Q9Experiment(driving="force-split-half", sigma5=0.375, sigma8=1.0,
                         nx=6, ny=17)
    f, _ = run_to_steady(exp)
    y, jx = velocity_profile(exp, f)
    nu = exp.sigma8 / 3.0
    height = exp.ny  # walls half a spacing beyond both boundary rows
    expected = exact_poiseuille(exp.fx, nu, height, y + 0.5)
    assert np.allclose(jx, expected, rtol=5e-3, atol=1e-12)


def test_pressure_offset_is_insensitive_to_drive_amplitude():
    # The imposed density offset only scales the linear solution, so the
    # crossing location cannot see it.
    small = channel_offset("pressure", 0.1875, 1.0, delta_p=1e-6)
    large = channel_offset("pressure", 0.1875, 1.0, delta_p=3e-6)
    assert small == pytest.approx(large, abs=1e-6)


def test_channel_offset_is_uniform_along_the_flow():
    exp = D2Q9Experiment(driving="force-split-half", sigma5=0.3, sigma8=1.0,
                         nx=12, ny=9)
    f, _ = run_to_steady(exp)
    left = wall_offset(exp, f, column=3).delta_q
    right = wall_offset(exp, f, column=9).delta_q
    assert left == pytest.approx(right, abs=1e-9)


def test_channel_lower_and_upper_offsets_agree():
    exp = D2Q9Experiment(driving="force-population", sigma5=0.1875, sigma8=1.0,
                         **CHANNEL)
    f, _ = run_to_steady(exp)
    lower = wall_offset(exp, f, side="lower").delta_q
    upper = wall_offset(exp, f, side="upper").delta_q
    assert lower == pytest.approx(upper, abs=1e-8)


# ---------------------------------------------------------------------------
# Convergence control
# ---------------------------------------------------------------------------


def test_starved_criterion_raises_convergence_error():
    criterion = SteadyStateCriterion(tolerance=1e-15, check_every=100, max_steps=100)
    exp = D1Q3Experiment(variant="a", sigma1=1.0, sigma2=0.125, n=16,
                         criterion=criterion)
    with pytest.raises(ConvergenceError) as excinfo:
        run_to_steady(exp)
    assert excinfo.value.steps == 100
    assert excinfo.value.last_change > 0.0


def test_quiescent_state_converges_at_first_check():
    exp = D1Q3Experiment(variant="a", sigma1=1.0, sigma2=0.125, n=16, source=0.0)
    f, steps = run_to_steady(exp)
    assert steps == exp.criterion.check_every
    assert np.all(f == 0.0)


def test_warm_start_resumes_from_steady_state():
    exp = D1Q3Experiment(variant="a", sigma1=1.0, sigma2=0.2, **LINE)
    f, first = run_to_steady(exp)
    g, second = run_to_steady(exp, init=f)
    assert second == exp.criterion.check_every
    assert first > second
    assert wall_offset(exp, g).delta_q == pytest.approx(
        wall_offset(exp, f).delta_q, abs=1e-12
    )


def test_criterion_validates_its_fields():
    with pytest.raises(ConfigurationError):
        SteadyStateCriterion(tolerance=-1.0)
    with pytest.raises(ConfigurationError):
        SteadyStateCriterion(check_every=0)
    with pytest.raises(ConfigurationError):
        SteadyStateCriterion(check_every=100, max_steps=50)


# ---------------------------------------------------------------------------
# Sweeps and root finding
# ---------------------------------------------------------------------------


def test_sweep_orders_samples_and_adds_split_pair():
    exp = D1Q3Experiment(variant="a", sigma1=1.0, sigma2=0.125, **LINE)
    sweep = sweep_product(exp, [0.25, 0.0625, 0.125])
    assert isinstance(sweep, MagicSweep)
    assert sweep.prediction == pytest.approx(0.125)
    assert sweep.root is None
    assert len(sweep.samples) == 4  # three products plus the swapped pair
    products = [row[2] for row in sweep.samples]
    assert products == sorted(products)
    # The swapped factorization shares the median product.
    median = [row for row in sweep.samples if row[2] == pytest.approx(0.125)]
    assert len(median) == 2
    assert {row[0] for row in median} == {1.0, 0.125}


def test_sweep_brackets_the_magic_product():
    exp = D1Q3Experiment(variant="a", sigma1=1.0, sigma2=0.125, **LINE)
    sweep = sweep_product(exp, [0.0625, 0.125, 0.25], split_check=False)
    offsets = {row[2]: row[3] for row in sweep.samples}
    assert offsets[0.0625] < 0.5 < offsets[0.25]
    # The offset grows monotonically with the product, so the crossing
    # is unique.
    values = [row[3] for row in sweep.samples]
    assert values == sorted(values)


def test_sweep_rejects_empty_product_list():
    exp = D1Q3Experiment(variant="a", **LINE)
    with pytest.raises(ConfigurationError, match="at least one product"):
        sweep_product(exp, [])


def test_root_find_recovers_line_magic_product():
    exp = D1Q3Experiment(variant="a", sigma1=1.0, sigma2=0.125, **LINE)
    sweep = find_magic_root(exp, bracket=(0.05, 0.3))
    assert sweep.root == pytest.approx(0.125, abs=1e-3)
    assert sweep.prediction == pytest.approx(0.125)
    assert len(sweep.samples) >= 3
    # Every recorded evaluation keeps the fixed first factor.
    assert all(row[0] == 1.0 for row in sweep.samples)


def test_root_find_needs_a_sign_change():
    exp = D1Q3Experiment(variant="a", sigma1=1.0, sigma2=0.125, **LINE)
    with pytest.raises(LocalizationError, match="no sign change"):
        find_magic_root(exp, bracket=(0.2, 0.3))


def test_root_find_rejects_bad_bracket():
    exp = D1Q3Experiment(variant="a", **LINE)
    with pytest.raises(ConfigurationError, match="bracket"):
        find_magic_root(exp, bracket=(0.3, 0.1))


def test_root_find_respects_evaluation_budget():
    exp = D1Q3Experiment(variant="a", sigma1=1.0, sigma2=0.125, **LINE)
    with pytest.raises(LocalizationError, match="budget"):
        find_magic_root(exp, bracket=(0.05, 0.3), product_tol=1e-9, max_evals=5)


# ---------------------------------------------------------------------------
# Transport measurements
# ---------------------------------------------------------------------------


def test_measured_diffusivity_matches_formula_variant_a():
    kappa = measure_diffusivity("a", 0.8, 0.125)
    expected = diffusivity_from_params("a", 0.8, 1.0 / 3.0)
    assert kappa == pytest.approx(expected, rel=2e-2)


def test_measured_diffusivity_matches_formula_variant_b():
    kappa = measure_diffusivity("b", 0.8, 0.125)
    expected = diffusivity_from_params("b", 0.8, 1.0)
    assert kappa == pytest.approx(expected, rel=2e-2)


def test_diffusivity_ignores_the_second_relaxation_rate():
    # The decay fit carries a kinetic systematic that shrinks with the
    # wavelength; 128 nodes push it well under the half-percent claim.
    slow = measure_diffusivity("a", 0.8, 0.2, n=128, steps=4000, skip=400)
    fast = measure_diffusivity("a", 0.8, 1.2, n=128, steps=4000, skip=400)
    assert slow == pytest.approx(fast, rel=5e-3)


def test_measured_viscosity_matches_formula():
    nu = measure_viscosity(0.375, 0.6)
    assert nu == pytest.approx(0.6 / 3.0, rel=2e-2)


def test_measured_sound_speed_matches_convention():
    c = measure_sound_speed(alpha=-2.0, beta=1.0)
    assert c == pytest.approx(math.sqrt(1.0 / 3.0), rel=1e-2)


def test_exhausted_mode_raises_measurement_error():
    with pytest.raises(MeasurementError, match="mode exhausted"):
        measure_diffusivity("a", 0.8, 0.125, n=16, steps=60, skip=55)


# ---------------------------------------------------------------------------
# Closed-form references
# ---------------------------------------------------------------------------


def test_exact_poisson_profile_oracle():
    assert exact_poisson_1d(2.0, 1.0, 0.5) == pytest.approx(0.25)
    assert exact_poisson_1d(2.0, 1.0, 0.0) == 0.0


def test_exact_poisson_rejects_nonpositive_diffusivity():
    with pytest.raises(ValueError):
        exact_poisson_1d(1.0, 0.0, 0.5)


def test_exact_poiseuille_profile_oracle():
    assert exact_poiseuille(0.2, 0.1, 10.0, 5.0) == pytest.approx(25.0)
    assert exact_poiseuille(0.2, 0.1, 10.0, 0.0) == 0.0
    assert exact_poiseuille(0.2, 0.1, 10.0, 10.0) == pytest.approx(0.0, abs=1e-15)
