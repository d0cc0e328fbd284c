"""Threshold detection, heralding, and coincidence probabilities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dense_oracle import dense_density, product_basis, random_state
from sfgswap.detection import (
    AnalyzerSetting,
    CoincidenceEfficiencies,
    DetectorModel,
    accidental_state,
    click_prob,
    coincidence_prob,
    herald_amplitude_branches,
    herald_projection,
    joint_click_pattern_probs,
    mix_dark_counts,
    threshold_povm,
)
from sfgswap.fock import DensityOperator, PureState, expectation


def test_click_prob_values():
    assert click_prob(0.3, 0) == 0.0
    assert click_prob(0.3, 1) == pytest.approx(0.3)
    assert click_prob(0.3, 2) == pytest.approx(1.0 - 0.7 ** 2)
    assert click_prob(1.0, 5) == 1.0


def test_detector_model_validation():
    with pytest.raises(ValueError):
        DetectorModel(1.5)
    with pytest.raises(ValueError):
        DetectorModel(0.5, dark_prob_per_window=1.0)


def test_analyzer_setting_range():
    with pytest.raises(ValueError):
        AnalyzerSetting(-0.1)
    with pytest.raises(ValueError):
        AnalyzerSetting(math.pi)


def test_threshold_povm_two_photons():
    reg = ("dH", "dV")
    rho = DensityOperator.from_pure(PureState.basis(reg, (2, 0), n_max=2))
    povm = threshold_povm(reg, "dH", "dV", AnalyzerSetting(0.0),
                          DetectorModel(0.6), n_max=2)
    assert expectation(rho, povm) == pytest.approx(1.0 - 0.4 ** 2)


def test_threshold_povm_rotated_analyzer():
    reg = ("dH", "dV")
    rho = DensityOperator.from_pure(PureState.basis(reg, (1, 0), n_max=2))
    theta = 0.3
    povm = threshold_povm(reg, "dH", "dV", AnalyzerSetting(theta),
                          DetectorModel(0.8), n_max=2)
    # An H photon reaches the rotated H arm with probability cos^2(theta).
    assert expectation(rho, povm) == pytest.approx(0.8 * math.cos(theta) ** 2)


@pytest.mark.parametrize("basis,seed", [("D", 0), ("A", 1), ("D", 2), ("A", 3)])
def test_herald_dual_route_equivalence(basis, seed):
    rng = np.random.default_rng(40 + seed)
    reg = ("aH", "cH", "cV", "dH")
    # At most one c photon, as required by the first-order interaction.
    basis_occ = [occ for occ in product_basis(4, 2)
                 if sum(occ) <= 2 and occ[1] + occ[2] <= 1]
    amps = {}
    for p in rng.choice(len(basis_occ), size=5, replace=False):
        amps[basis_occ[p]] = complex(rng.normal(), rng.normal())
    psi = PureState(reg, amps, n_max=2).normalized()
    det = DetectorModel(0.85)
    rho = herald_projection(DensityOperator.from_pure(psi), basis, det)
    mix = DensityOperator.from_branches(
        herald_amplitude_branches([psi], basis, det), register=("dH",), n_max=2)
    dense = product_basis(1, 2)
    assert np.abs(dense_density(rho, dense) - dense_density(mix, dense)).max() < 1e-12
    assert rho.trace() >= 0.0


def test_herald_rejects_two_converted_photons():
    psi = PureState(("cH", "cV", "dH"), {(1, 1, 0): 1.0}, n_max=2)
    with pytest.raises(ValueError):
        herald_projection(DensityOperator.from_pure(psi), "D", DetectorModel(1.0))
    with pytest.raises(ValueError):
        herald_amplitude_branches([psi], "D", DetectorModel(1.0))


def test_herald_basis_validation():
    psi = PureState(("cH", "cV", "dH"), {(1, 0, 0): 1.0}, n_max=2)
    with pytest.raises(ValueError):
        herald_projection(DensityOperator.from_pure(psi), "X", DetectorModel(1.0))


def test_herald_on_diagonal_photon():
    # |D> on the c modes heralds with probability eta_d; |A> is orthogonal.
    amps = {(1, 0, 1): 1 / math.sqrt(2), (0, 1, 1): 1 / math.sqrt(2)}
    psi = PureState(("cH", "cV", "dH"), amps, n_max=2)
    rho = DensityOperator.from_pure(psi)
    assert herald_projection(rho, "D", DetectorModel(0.85)).trace() == pytest.approx(0.85)
    assert herald_projection(rho, "A", DetectorModel(0.85)).trace() == pytest.approx(0.0)


def test_coincidence_prob_matches_pattern_marginal():
    rng = np.random.default_rng(9)
    reg = ("dH", "dV", "eH", "eV")
    psi = random_state(rng, reg, n_max=2)
    rho = DensityOperator.from_pure(psi)
    effs = CoincidenceEfficiencies(0.9, 0.8, 0.7, 0.6)
    theta1, theta2 = 0.2, -0.4
    probs = joint_click_pattern_probs(rho, theta1, theta2, effs)
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-12)
    for which, pick in (("HV", lambda d, e: d[0] and e[1]),
                        ("VH", lambda d, e: d[1] and e[0])):
        marginal = sum(v for (dc, ec), v in probs.items() if pick(dc, ec))
        direct = coincidence_prob(rho, (theta1, theta2), which, effs)
        assert direct == pytest.approx(marginal, abs=1e-12)
    with pytest.raises(ValueError):
        coincidence_prob(rho, (0.0, 0.0), "XY", effs)


def test_accidental_state_trace():
    psi = PureState(("aH", "dH"), {(0, 0): 0.8, (1, 1): 0.6}, n_max=2)
    acc = accidental_state(psi)
    assert acc.register == ("dH",)
    assert acc.trace() == pytest.approx(1.0)


@settings(max_examples=60, deadline=None)
@given(p_sfg=st.floats(0, 1), p_acd=st.floats(0, 1), dark=st.floats(0, 1))
def test_mix_dark_counts_is_a_convex_mixture(p_sfg, p_acd, dark):
    mixed = mix_dark_counts(p_sfg, p_acd, dark)
    assert min(p_sfg, p_acd) - 1e-12 <= mixed <= max(p_sfg, p_acd) + 1e-12


def test_mix_dark_counts_validation():
    with pytest.raises(ValueError):
        mix_dark_counts(1.2, 0.0, 0.0)
