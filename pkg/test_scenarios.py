"""
End-to-end scenario tests: simulated PPT verdicts against the closed forms
"""

import math

import numpy as np
import pytest

from src.core import predicates as pred
from src.core.entangle import is_npt, trace_distance, von_neumann_entropy
from src.core.errors import ConfigurationError, NoSignChangeError
from src.core.noisechan import MonteCarlo, Quadrature
from src.core.scenarios import (
    Axis,
    ScenarioConfig,
    ScenarioId,
    boundary_bisect,
    grid_points,
    prepare_initial,
    run_scenario,
    run_scenarios,
    sample_points,
    validate,
)
from src.core.hamiltonians import ModelKind, RefocusSchedule


def config(sid, lam=0.0, width=0.0, **fields):
    return ScenarioConfig.build(id=sid, prep_width=lam, interaction_width=width, **fields)


def prepare_entropy(lam):
    return von_neumann_entropy(prepare_initial(ScenarioId.ISING_TUNABLE, lam))


def test_ising_preparation_is_plus_plus():
    rho = prepare_initial(ScenarioId.ISING_TUNABLE, 0.0)
    assert np.allclose(rho.populations(), 0.25, atol=1e-14)
    assert rho.purity() == pytest.approx(1.0)


def test_rotation_preparation_flips_second_qubit():
    rho = prepare_initial(ScenarioId.XY_FAMILY, 0.0)
    assert np.allclose(rho.populations(), [0, 1, 0, 0], atol=1e-14)


def test_noisy_preparation_loses_purity():
    rho = prepare_initial(ScenarioId.ISING_TUNABLE, 1.0)
    a = math.exp(-0.5)
    assert rho.purity() == pytest.approx(((1 + a * a) / 2) ** 2, abs=1e-12)


def test_noiseless_ising_makes_a_maximally_entangled_state():
    result = run_scenario(config(ScenarioId.ISING_TUNABLE))
    assert result.verdict.entangled
    assert result.verdict.negativity == pytest.approx(0.5, abs=1e-12)
    assert result.predicate.entangled
    assert result.model is ModelKind.ISING
    assert result.method == "closed-form"
    assert result.seed is None
    assert set(result.timings) == {"prepare", "interaction", "verdict"}


def test_ising_past_the_preparation_threshold_is_separable():
    result = run_scenario(config(ScenarioId.ISING_TUNABLE, 1.4, 0.0))
    assert not result.verdict.entangled
    assert not result.predicate.entangled


def test_tunable_ising_boundary_matches_closed_form():
    report = boundary_bisect(config(ScenarioId.ISING_TUNABLE), Axis.PREP_WIDTH, (0.0, 3.0))
    assert report.threshold == pytest.approx(1.3276, abs=1e-3)
    assert report.deviation < 1e-5
    assert report.fixed == {"interaction_width": 0.0}
    assert report.iterations > 0


def test_laplace_boundary_matches_closed_form():
    report = boundary_bisect(config(ScenarioId.ISING_LAPLACE), Axis.PREP_WIDTH, (0.0, 3.0))
    assert report.threshold == pytest.approx(0.59460, abs=1e-3)
    assert report.deviation < 1e-5


def test_interaction_axis_boundary():
    report = boundary_bisect(config(ScenarioId.ISING_TUNABLE, lam=1.0), Axis.INTERACTION_WIDTH, (0.0, 3.0))
    assert report.threshold == pytest.approx(pred.ising_omega_max(1.0), abs=1e-5)


def test_perfect_preparation_never_crosses_along_interaction_width():
    with pytest.raises(NoSignChangeError) as err:
        boundary_bisect(config(ScenarioId.ISING_TUNABLE), Axis.INTERACTION_WIDTH, (0.0, 3.0))
    assert err.value.lo_entangled and err.value.hi_entangled


def test_boundary_rejects_bad_bracket():
    with pytest.raises(ConfigurationError):
        boundary_bisect(config(ScenarioId.ISING_TUNABLE), Axis.PREP_WIDTH, (1.0, 0.5))
    with pytest.raises(ConfigurationError):
        boundary_bisect(config(ScenarioId.ISING_TUNABLE), Axis.PREP_WIDTH, (-1.0, 2.0))


@pytest.mark.parametrize("capital_lambda", [0.2, 0.5, 1.0])
def test_untunable_boundary_reports(capital_lambda):
    base = config(ScenarioId.ISING_UNTUNABLE, width=capital_lambda)
    report = boundary_bisect(base, Axis.PREP_WIDTH, (0.0, 3.0))
    assert 0.0 < report.threshold < 3.0
    assert report.closed_form_threshold == pytest.approx(pred.ising_lambda_max(2.0 * capital_lambda))
    assert report.scenario is ScenarioId.ISING_UNTUNABLE


def test_untunable_exact_pulse_matches_tunable_noiseless_gate():
    schedule = RefocusSchedule.through(0.9 * math.pi)
    untunable = run_scenario(config(ScenarioId.ISING_UNTUNABLE, 0.5, 0.0, refocus=schedule))
    tunable = run_scenario(config(ScenarioId.ISING_TUNABLE, 0.5, 0.0))
    assert trace_distance(untunable.final_state, tunable.final_state) < 1e-12


def test_duration_noise_model_is_trace_preserving():
    result = run_scenario(config(ScenarioId.ISING_UNTUNABLE, 0.3, 0.4,
                                 untunable_noise="duration", duration_share=0.25))
    assert abs(np.trace(result.final_state.data) - 1.0) < 1e-12


@pytest.mark.parametrize("sid", [ScenarioId.XYZ_TUNABLE, ScenarioId.XY_FAMILY])
@pytest.mark.parametrize("phi", [1.0, math.pi, 5.0])
def test_output_does_not_depend_on_zz_phase(sid, phi):
    extra = {"mean_theta_minus": 0.4} if sid is ScenarioId.XYZ_TUNABLE else {}
    base = run_scenario(config(sid, 0.7, 0.5, **extra))
    phased = run_scenario(config(sid, 0.7, 0.5, phi=phi, **extra))
    assert trace_distance(base.final_state, phased.final_state) < 1e-12


def test_xyz_model_classification():
    result = run_scenario(config(ScenarioId.XYZ_TUNABLE, 0.2, 0.1, mean_theta_minus=0.3))
    assert result.model is ModelKind.XYZ
    assert run_scenario(config(ScenarioId.XY_FAMILY, 0.2, 0.1)).model is ModelKind.XY


def test_closed_form_and_quadrature_agree():
    rng = np.random.default_rng(2024)
    gaussian = [ScenarioId.ISING_TUNABLE, ScenarioId.ISING_UNTUNABLE, ScenarioId.XYZ_TUNABLE, ScenarioId.XY_FAMILY]
    laplace = [ScenarioId.ISING_LAPLACE, ScenarioId.ISING_UNTUNABLE_LAPLACE]
    for _ in range(100):
        if rng.uniform() < 0.7:
            sid, limit, tol = gaussian[rng.integers(len(gaussian))], 1.5, 1e-9
        else:
            sid, limit, tol = laplace[rng.integers(len(laplace))], 0.5, 1e-8
        lam, width = rng.uniform(0.0, limit, 2)
        if sid is ScenarioId.ISING_UNTUNABLE_LAPLACE:
            # pulse harmonics reach twice the angle
            width *= 0.5
        extra = {"mean_theta_minus": float(rng.uniform(0.0, math.pi))} if sid is ScenarioId.XYZ_TUNABLE else {}
        closed = run_scenario(config(sid, lam, width, **extra))
        quad = run_scenario(config(sid, lam, width, method=Quadrature(), **extra))
        assert trace_distance(closed.final_state, quad.final_state) < tol, (sid, lam, width)


def test_monte_carlo_is_reproducible_per_seed():
    c = config(ScenarioId.ISING_TUNABLE, 0.8, 0.6, method=MonteCarlo(2000, seed=5))
    first, again = run_scenario(c), run_scenario(c)
    assert np.array_equal(first.final_state.data, again.final_state.data)
    assert first.seed == 5
    other = run_scenario(config(ScenarioId.ISING_TUNABLE, 0.8, 0.6, method=MonteCarlo(2000, seed=6)))
    assert not np.array_equal(first.final_state.data, other.final_state.data)


def test_monte_carlo_converges_to_closed_form():
    closed = run_scenario(config(ScenarioId.ISING_TUNABLE, 0.8, 0.6))
    mc = run_scenario(config(ScenarioId.ISING_TUNABLE, 0.8, 0.6, method=MonteCarlo(200_000, seed=1)))
    assert trace_distance(closed.final_state, mc.final_state) < 1e-2


@pytest.mark.parametrize("lam, expected", [(2.0, 1.9735), (1.3276, 1.7449)])
def test_initial_entropy_of_noisy_preparation(lam, expected):
    result = run_scenario(config(ScenarioId.ISING_TUNABLE, lam, 0.0))
    assert result.initial_entropy == pytest.approx(expected, abs=1e-3)


def test_initial_entropy_grows_with_preparation_noise():
    entropies = [prepare_entropy(lam) for lam in np.linspace(0.0, 3.0, 100)]
    assert all(b > a for a, b in zip(entropies, entropies[1:]))
    assert entropies[0] == pytest.approx(0.0, abs=1e-9)
    assert entropies[-1] < 2.0


def test_batch_run_matches_single_runs():
    configs = [config(ScenarioId.ISING_TUNABLE, lam, 0.5) for lam in (0.0, 0.9, 1.8)]
    for batched, c in zip(run_scenarios(configs), configs):
        single = run_scenario(c)
        assert batched.verdict.entangled == single.verdict.entangled
        assert batched.verdict.min_pt_eigenvalue == pytest.approx(single.verdict.min_pt_eigenvalue, abs=1e-12)


def test_verdict_tolerance_widens_the_indeterminate_band():
    loose = config(ScenarioId.ISING_TUNABLE, verdict_tolerance=0.6)
    assert run_scenario(loose).verdict.label == "indeterminate"
    batched = run_scenarios([loose, config(ScenarioId.ISING_TUNABLE)])
    assert [r.verdict.label for r in batched] == ["indeterminate", "entangled"]
    assert batched[0].verdict.tolerance == 0.6
    with pytest.raises(ConfigurationError):
        config(ScenarioId.ISING_TUNABLE, verdict_tolerance=0.0)


@pytest.mark.parametrize("fields", [
    {"id": "ising-tunable", "mean_theta_minus": 0.3},
    {"id": "ising-tunable", "prep_width": -1.0},
    {"id": "ising-tunable", "phi": 0.2},
    {"id": "ising-tunable", "refocus": RefocusSchedule()},
    {"id": "ising-tunable", "untunable_noise": "duration"},
    {"id": "xyz-tunable", "xyz_sampling": "both"},
    {"id": "xy-family", "method": "closed-form"},
    {"id": "ising-untunable", "duration_share": 1.5},
    {"id": "nonsense"},
    {"id": "ising-tunable", "interaction_width": math.inf},
])
def test_invalid_configurations(fields):
    with pytest.raises(ConfigurationError):
        ScenarioConfig.build(**fields)


def test_prepare_initial_rejects_bad_input():
    with pytest.raises(ConfigurationError):
        prepare_initial("nonsense", 0.0)
    with pytest.raises(ConfigurationError):
        prepare_initial(ScenarioId.ISING_TUNABLE, -0.5)


def test_grid_points_carry_theta_minus_for_xyz_only():
    points = grid_points(ScenarioId.XYZ_TUNABLE, [0.0, 1.0], [0.5], 0.2)
    assert points == [(0.0, 0.5, 0.2), (1.0, 0.5, 0.2)]
    assert grid_points(ScenarioId.ISING_TUNABLE, [0.0], [0.5], 0.2) == [(0.0, 0.5, None)]


def test_sample_points_are_seeded():
    assert sample_points(ScenarioId.XYZ_TUNABLE, 5, seed=3) == sample_points(ScenarioId.XYZ_TUNABLE, 5, seed=3)
    widths = [w for _, w, _ in sample_points(ScenarioId.XYZ_TUNABLE, 50, seed=3)]
    assert max(widths) <= 1.5


@pytest.mark.parametrize("sid, top", [
    (ScenarioId.ISING_TUNABLE, 3.0),
    (ScenarioId.ISING_LAPLACE, 1.0),
])
def test_ising_grid_validates(sid, top):
    axis = np.linspace(0.0, top, 20)
    report = validate(sid, grid_points(sid, axis, axis))
    assert report.points == 400
    assert report.compared + report.skipped_in_guard_band == 400
    assert report.passed, report.examples
    assert report.max_disagreement_margin is None


def test_untunable_grid_validates_with_full_duration_share():
    axis = np.linspace(0.0, 1.5, 20)
    extra = {"untunable_noise": "duration", "duration_share": 1.0}
    for sid in (ScenarioId.ISING_UNTUNABLE, ScenarioId.ISING_UNTUNABLE_LAPLACE):
        report = validate(sid, grid_points(sid, axis, axis), extra=extra)
        assert report.passed, report.examples


def test_validation_with_reference_method():
    points = grid_points(ScenarioId.ISING_TUNABLE, [0.3, 1.1], [0.4, 2.0])
    report = validate(ScenarioId.ISING_TUNABLE, points, reference_method=Quadrature())
    assert report.passed
    assert report.max_method_distance < 1e-9
    assert report.reference_method == "quadrature(61)"
    assert set(report.timings) == {"predicate", "closed-form", "quadrature(61)"}


def test_xy_family_closed_form_weights_are_exact():
    report = validate(ScenarioId.XY_FAMILY, grid_points(ScenarioId.XY_FAMILY, [0.0, 0.7, 2.0], [0.0, 1.2, 2.5]))
    assert report.passed
    assert report.max_weight_deviation < 1e-12


def test_xy_family_output_is_maximally_entangled_in_the_block():
    clean = run_scenario(config(ScenarioId.XY_FAMILY))
    assert clean.verdict.negativity == pytest.approx(0.5, abs=1e-12)
    assert clean.final_state.purity() == pytest.approx(1.0, abs=1e-12)
    noisy = run_scenario(config(ScenarioId.XY_FAMILY, 0.7, 1.2)).final_state.populations()
    assert noisy[1] == pytest.approx(noisy[2], abs=1e-12)
    assert noisy[3] < 1e-12


def test_xy_family_is_always_entangled():
    axis = np.linspace(0.0, 5.0, 10)
    configs = [config(ScenarioId.XY_FAMILY, lam, w) for lam in axis for w in axis]
    for result in run_scenarios(configs):
        assert result.verdict.min_pt_eigenvalue < 0.0
        assert result.predicate.entangled


@pytest.mark.slow
def test_xyz_random_points_validate():
    report = validate(ScenarioId.XYZ_TUNABLE, sample_points(ScenarioId.XYZ_TUNABLE, 500, seed=42),
                      method=Quadrature())
    assert report.points == 500
    assert report.passed, report.examples


@pytest.mark.slow
@pytest.mark.parametrize("side", ["entangled", "separable"])
def test_xyz_sufficient_bounds_hold_in_simulation(side):
    rng = np.random.default_rng(11 if side == "entangled" else 12)
    a = rng.uniform(0.01, 0.99, 1000)
    if side == "entangled":
        b = rng.uniform([pred.xyz_entangled_bound(x) + 1e-3 for x in a], 1.0)
    else:
        b = rng.uniform(1e-4, [pred.xyz_separable_bound(x) - 1e-3 for x in a])
    # invert a = exp(-lambda^2/2), b = exp(-2 omega^2), z = cos(2 zbar)
    lam = np.sqrt(-2.0 * np.log(a))
    width = np.sqrt(-0.5 * np.log(b))
    configs = [config(ScenarioId.XYZ_TUNABLE, float(l), float(w), mean_theta_minus=0.5 * math.acos(z),
                      xyz_sampling="independent")
               for l, w in zip(lam, width) for z in (0.0, 1.0, -1.0)]
    for result in run_scenarios(configs):
        if side == "entangled":
            assert is_npt(result.verdict.min_pt_eigenvalue)
        else:
            assert result.verdict.min_pt_eigenvalue >= -1e-9


@pytest.mark.slow
def test_xy_family_monte_carlo_weights():
    report = validate(ScenarioId.XY_FAMILY, [(1.0, 1.0, None), (0.8, 1.2, None), (1.5, 0.4, None)],
                      method=MonteCarlo(1_000_000, seed=42))
    assert report.max_weight_deviation < 2e-3
    assert report.method == "monte-carlo(1000000)"
