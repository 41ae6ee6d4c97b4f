"""
Tests for noise distributions, averaging methods and unitary channels
"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.core.errors import ContractViolation, HarmonicFitError
from src.core.hamiltonians import zz_unitary
from src.core.noisechan import (
    AngleDistribution,
    ClosedForm,
    HarmonicFamily,
    MonteCarlo,
    Quadrature,
    UnitaryFamily,
    average_matrix,
    average_state,
    average_through,
    characteristic_weight,
    fit_harmonics,
    method_label,
    quadrature_rule,
    sample_angle,
    sample_angles,
    substream,
    superoperator,
)
from src.core.smallmat import DensityMatrix, evolve

ZZ = UnitaryFamily("zz", (1.0,), build=zz_unitary)


def plus_plus():
    plus = np.array([1.0, 1.0]) / math.sqrt(2)
    return DensityMatrix.from_ket(np.kron(plus, plus))


def test_distribution_validation():
    with pytest.raises(ContractViolation):
        AngleDistribution.gaussian(0.0, -0.1)
    with pytest.raises(ContractViolation):
        AngleDistribution.laplace(math.nan, 0.1)
    assert AngleDistribution.laplace(0.0, 0.5).standard_deviation == pytest.approx(math.sqrt(2))
    assert AngleDistribution.gaussian(1.0, 0.0).deterministic


def test_method_validation_and_labels():
    with pytest.raises(ContractViolation):
        Quadrature(nodes=4)
    with pytest.raises(ContractViolation):
        MonteCarlo(samples=0)
    assert method_label(ClosedForm()) == "closed-form"
    assert method_label(Quadrature()) == "quadrature(61)"
    assert method_label(MonteCarlo(1000, seed=3)) == "monte-carlo(1000)"
    assert MonteCarlo(1000, seed=3).for_task(7) == MonteCarlo(1000, 3, 7)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_characteristic_weights(t):
    g = characteristic_weight(AngleDistribution.gaussian(0.0, 0.8), t)
    assert g == pytest.approx(math.exp(-0.5 * (0.8 * t) ** 2))
    lap = characteristic_weight(AngleDistribution.laplace(0.0, 0.3), t)
    assert lap == pytest.approx(1.0 / (1.0 + 4.0 * (0.3 * t) ** 2))
    shifted = characteristic_weight(AngleDistribution.gaussian(math.pi, 0.0), t)
    assert shifted == pytest.approx(complex(math.cos(math.pi * t), math.sin(math.pi * t)))


@pytest.mark.parametrize("width", [0.1, 0.7, 1.5])
@pytest.mark.parametrize("t", [0.25, 1.0, 2.0])
def test_hermite_rule_matches_closed_form(width, t):
    d = AngleDistribution.gaussian(0.4, width)
    angles, w = quadrature_rule(d, Quadrature())
    assert w.sum() == pytest.approx(1.0, abs=1e-13)
    assert np.dot(w, np.exp(1j * t * angles)) == pytest.approx(characteristic_weight(d, t), abs=1e-10)


@pytest.mark.parametrize("scale", [0.1, 0.3, 0.5])
@pytest.mark.parametrize("t", [0.5, 1.0])
def test_laguerre_rule_matches_closed_form(scale, t):
    d = AngleDistribution.laplace(0.2, scale)
    angles, w = quadrature_rule(d, Quadrature())
    assert np.dot(w, np.exp(1j * t * angles)) == pytest.approx(characteristic_weight(d, t), abs=1e-8)


def test_substreams_are_reproducible_and_distinct():
    d = AngleDistribution.gaussian(0.0, 1.0)
    first = sample_angles(d, substream(42, 3, 1), 100)
    again = sample_angles(d, substream(42, 3, 1), 100)
    other_task = sample_angles(d, substream(42, 4, 1), 100)
    other_stage = sample_angles(d, substream(42, 3, 2), 100)
    assert np.array_equal(first, again)
    assert not np.array_equal(first, other_task)
    assert not np.array_equal(first, other_stage)


def test_single_draw_matches_batch_head():
    d = AngleDistribution.gaussian(0.3, 0.2)
    assert sample_angle(d, substream(7)) == sample_angles(d, substream(7), 1)[0]
    assert sample_angle(AngleDistribution.gaussian(1.5, 0.0), substream(7)) == 1.5
    with pytest.raises(ContractViolation):
        sample_angles(d, substream(7), 0)


def test_laplace_samples_have_scale_twice_width():
    d = AngleDistribution.laplace(0.0, 0.5)
    draws = sample_angles(d, substream(1), 200_000)
    assert np.std(draws) == pytest.approx(d.standard_deviation, rel=0.02)


def test_fit_recovers_trigonometric_polynomial():
    a = np.array([[1.0, 2.0], [0.5, -1.0]], dtype=complex)
    terms = dict(fit_harmonics(lambda x: np.exp(0.5j * x) * a + np.exp(-2j * x) * a.conj()))
    assert set(terms) == {0.5, -2.0}
    assert np.allclose(terms[0.5], a, atol=1e-12)


def test_fit_rejects_off_grid_frequencies():
    with pytest.raises(HarmonicFitError):
        fit_harmonics(lambda x: np.cos(0.3 * x) * np.eye(2))


def test_harmonic_family_requires_hermitian_pairs():
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(ContractViolation):
        HarmonicFamily(terms=((1.0, a),))
    family = HarmonicFamily(terms=((0.0, np.eye(2) / 2), (1.0, a), (-1.0, a.conj().T)))
    assert family.multipliers == (0.0, 1.0, -1.0)
    assert np.allclose(family.at(0.0), np.eye(2) / 2 + a + a.conj().T)


def test_opaque_family_fallback():
    family = HarmonicFamily.from_evaluator(lambda x: np.cos(0.3 * x) * np.eye(2))
    d = AngleDistribution.gaussian(0.0, 1.0)
    with pytest.raises(HarmonicFitError):
        average_matrix(family, d, ClosedForm())
    quad = average_matrix(family, d, Quadrature())
    assert np.allclose(quad, math.exp(-0.045) * np.eye(2), atol=1e-10)
    mc = average_matrix(family, d, MonteCarlo(50_000, seed=5))
    assert np.allclose(mc, math.exp(-0.045) * np.eye(2), atol=1e-2)


def test_deterministic_average_is_the_gate():
    rho = plus_plus()
    out = ZZ.apply_averaged(rho, AngleDistribution.gaussian(math.pi, 0.0), ClosedForm())
    assert np.allclose(out.data, evolve(rho, zz_unitary(math.pi)).data, atol=1e-14)


def test_superoperator_acts_on_row_major_vec():
    u = zz_unitary(0.9)
    rho = plus_plus()
    vec = superoperator(u) @ rho.data.reshape(-1)
    assert np.allclose(vec.reshape(4, 4), evolve(rho, u).data, atol=1e-14)


def test_unitary_family_identity_is_name_and_params():
    other = UnitaryFamily("zz", (1.0,), build=lambda a: zz_unitary(a))
    assert other == ZZ
    assert hash(other) == hash(ZZ)
    assert UnitaryFamily("zz", (2.0,), build=zz_unitary) != ZZ
    with pytest.raises(ContractViolation):
        UnitaryFamily("empty")


@pytest.mark.parametrize("width", [0.2, 0.8, 1.5])
def test_channel_methods_agree(width):
    rho = plus_plus()
    d = AngleDistribution.gaussian(math.pi, width)
    closed = ZZ.apply_averaged(rho, d, ClosedForm())
    quad = ZZ.apply_averaged(rho, d, Quadrature())
    assert np.allclose(closed.data, quad.data, atol=1e-10)
    mc = ZZ.apply_averaged(rho, d, MonteCarlo(100_000, seed=11))
    assert np.allclose(closed.data, mc.data, atol=1e-2)


def test_dephasing_shrinks_coherence():
    # Coherence between |00> and |01> picks up exp(-i angle/2)
    rho = plus_plus()
    out = ZZ.apply_averaged(rho, AngleDistribution.gaussian(0.0, 1.0), ClosedForm())
    assert abs(out.data[0, 1]) == pytest.approx(0.25 * math.exp(-0.125), abs=1e-12)


def test_average_state_matches_family_average():
    rho = plus_plus()
    d = AngleDistribution.laplace(math.pi, 0.4)
    direct = average_state(ZZ.family(rho), d, ClosedForm())
    channel = ZZ.apply_averaged(rho, d, ClosedForm())
    assert np.allclose(direct.data, channel.data, atol=1e-14)


@given(st.floats(0.0, 1.5), st.floats(0.0, 1.5), st.integers(0, 1000))
def test_stages_preserve_trace_and_hermiticity(w1, w2, seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = DensityMatrix(g @ g.conj().T / np.trace(g @ g.conj().T).real)
    scaled = UnitaryFamily("zz", (2.0,), build=lambda a: zz_unitary(2.0 * a))
    stages = [(ZZ, AngleDistribution.gaussian(0.3, w1)), (scaled, AngleDistribution.laplace(-0.2, w2))]
    for method in (ClosedForm(), MonteCarlo(200, seed=seed)):
        out = average_through(rho, stages, method)
        assert abs(np.trace(out.data) - 1.0) < 1e-12
        assert np.allclose(out.data, out.data.conj().T, atol=1e-14)
