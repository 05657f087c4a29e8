import math

import numpy as np
import pytest

from thermal_modes import (
    G2Matrix,
    ModeIndex,
    ModeSpectrum,
    eigenvalue_ratio,
    fidelity,
    g2_distance,
    schmidt_number,
    visibility,
)
from thermal_modes.hbt import G2Estimate
from thermal_modes.metrics import ComparisonReport, MissingIndexError, fidelity_curve


def spectrum_from(values: dict, c: float = 2.0) -> ModeSpectrum:
    return ModeSpectrum(
        c=c, eigenvalues={ModeIndex(m, n): v for (m, n), v in values.items()}
    )


class TestFidelity:
    def test_identical_spectra_give_one(self, model):
        s = ModeSpectrum.from_model(model, max_order=6)
        assert fidelity(s, s, 3, 3) == pytest.approx(1.0, rel=1e-14)

    def test_scale_invariance(self, model):
        s = ModeSpectrum.from_model(model, max_order=6)
        scaled = ModeSpectrum(
            c=s.c,
            eigenvalues={k: 7.3 * v for k, v in s.eigenvalues.items()},
            normalization="relative",
        )
        assert fidelity(scaled, s, 3, 3) == pytest.approx(1.0, rel=1e-14)

    def test_hand_value_two_modes(self):
        # p = (1/2, 1/2), q = (1, 0): F = sqrt(1/2).
        a = spectrum_from({(0, 0): 0.5, (1, 0): 0.5})
        b = spectrum_from({(0, 0): 1.0, (1, 0): 0.0})
        assert fidelity(a, b, 1, 0) == pytest.approx(math.sqrt(0.5), rel=1e-14)

    def test_bounds(self, model):
        theory = ModeSpectrum.from_model(model, max_order=4)
        noisy = ModeSpectrum(
            c=theory.c,
            eigenvalues={
                k: v * (1.0 + 0.1 * math.sin(7.0 * i))
                for i, (k, v) in enumerate(sorted(theory.eigenvalues.items()))
            },
            normalization="relative",
        )
        value = fidelity(noisy, theory, 2, 2)
        assert 0.9 < value < 1.0

    def test_missing_index_reported(self, model):
        theory = ModeSpectrum.from_model(model, max_order=2)
        with pytest.raises(MissingIndexError):
            fidelity(theory, theory, 5, 5)

    def test_zero_window_rejected(self):
        a = spectrum_from({(0, 0): 0.0, (1, 0): 1.0})
        b = spectrum_from({(0, 0): 1.0, (1, 0): 1.0})
        with pytest.raises(ValueError):
            fidelity(a, b, 0, 0)

    def test_curve_is_per_order(self, model):
        theory = ModeSpectrum.from_model(model, max_order=8)
        curve = fidelity_curve(theory, theory, 4)
        assert [order for order, _ in curve] == [0, 1, 2, 3, 4]
        assert all(value == pytest.approx(1.0, rel=1e-13) for _, value in curve)


def matrix_from(values: dict) -> G2Matrix:
    entries = {k: G2Estimate(value=v, stderr=0.0, samples=1) for k, v in values.items()}
    return G2Matrix(filters1=(), filters2=(), entries=entries)


class TestG2Distance:
    def test_zero_for_identical(self):
        m = matrix_from({(0, 0): 2.0, (0, 1): 1.0})
        assert g2_distance(m, m) == 0.0

    def test_euclidean_hand_value(self):
        a = matrix_from({(0, 0): 2.0, (0, 1): 1.0})
        b = matrix_from({(0, 0): 2.3, (0, 1): 0.6})
        assert g2_distance(a, b) == pytest.approx(math.sqrt(0.09 + 0.16), rel=1e-14)

    def test_mismatched_index_sets_rejected(self):
        a = matrix_from({(0, 0): 2.0})
        b = matrix_from({(0, 0): 2.0, (0, 1): 1.0})
        with pytest.raises(MissingIndexError):
            g2_distance(a, b)


class TestSchmidtNumber:
    def test_single_mode_is_one(self):
        assert schmidt_number([1.0]) == pytest.approx(1.0)
        assert schmidt_number([0.0, 3.7, 0.0]) == pytest.approx(1.0)

    def test_uniform_distribution(self):
        assert schmidt_number([0.25] * 4) == pytest.approx(4.0, rel=1e-14)

    def test_geometric_1d_closed_form(self, model):
        # K = (sum q^n)^2 / sum q^(2n) = (1 + q)/(1 - q) for a full
        # geometric spectrum.
        q = eigenvalue_ratio(model.beta(), 1)
        values = q ** np.arange(4000)
        expected = (1.0 + q) / (1.0 - q)
        assert schmidt_number(values) == pytest.approx(expected, rel=1e-12)

    def test_2d_is_square_of_1d(self, model):
        q = eigenvalue_ratio(model.beta(), 1)
        values_1d = q ** np.arange(2000)
        values_2d = np.outer(values_1d, values_1d).ravel()
        assert schmidt_number(values_2d) == pytest.approx(
            schmidt_number(values_1d) ** 2, rel=1e-10
        )

    def test_frozen_value_at_measured_beta(self, model):
        # (1 + q)/(1 - q) at beta = 0.24, evaluated by hand.
        q = eigenvalue_ratio(model.beta(), 1)
        assert (1.0 + q) / (1.0 - q) == pytest.approx(8.393118874676112, rel=1e-12)

    def test_scale_invariant(self):
        values = [0.5, 0.3, 0.2]
        assert schmidt_number(values) == pytest.approx(
            schmidt_number([10.0 * v for v in values]), rel=1e-14
        )

    def test_spectrum_input(self, model):
        spectrum = ModeSpectrum.from_model(model, max_order=12)
        assert schmidt_number(spectrum) > 1.0

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            schmidt_number([0.0, 0.0])
        with pytest.raises(ValueError):
            schmidt_number([1.0, -0.5])


class TestVisibility:
    def test_ideal_projector_contrast(self):
        # g2_same = 2, g2_cross = 1: V = 1/3.
        assert visibility(2.0, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-14)

    def test_no_contrast(self):
        assert visibility(1.5, 1.5) == 0.0

    def test_positive_inputs_required(self):
        with pytest.raises(ValueError):
            visibility(0.0, 1.0)


class TestComparisonReport:
    def test_round_trip_dict(self):
        report = ComparisonReport(
            fidelity=0.997,
            distance=0.04,
            max_order=(3, 3),
            fidelity_by_order=((0, 1.0), (1, 0.999), (2, 0.998), (3, 0.997)),
        )
        data = report.to_dict()
        assert data["fidelity"] == 0.997
        assert data["max_order"] == [3, 3]
        assert data["fidelity_by_order"][1] == [1, 0.999]

    def test_invalid_fidelity_rejected(self):
        with pytest.raises(ValueError):
            ComparisonReport(
                fidelity=1.5, distance=0.0, max_order=(1, 1), fidelity_by_order=()
            )
