import math

import numpy as np
import pytest

from thermal_modes import (
    GridSpec,
    SchellModel,
    compare_to_analytic,
    discretize_kernel,
    eigendecompose,
    eigenvalue_ratio,
)
from thermal_modes.nystrom import EnvelopeTruncationWarning


def default_grid(model, points=512, sigmas=5.0):
    return GridSpec(half_width=sigmas * model.sigma_I, points=points)


class TestGridSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            GridSpec(half_width=0.0, points=64)
        with pytest.raises(ValueError):
            GridSpec(half_width=1.0, points=8)

    def test_spacing_and_coordinates(self):
        grid = GridSpec(half_width=2.0, points=17)
        x = grid.coordinates()
        assert x[0] == -2.0 and x[-1] == 2.0
        assert grid.spacing == pytest.approx(x[1] - x[0])


class TestDiscretizeKernel:
    def test_diagonal_is_intensity_times_spacing(self, model):
        grid = default_grid(model, points=64)
        kernel = discretize_kernel(model, grid)
        x = grid.coordinates()
        expected = model.intensity(x) * grid.spacing
        assert np.allclose(np.diag(kernel), expected, rtol=1e-13)

    def test_exactly_symmetric(self, model):
        kernel = discretize_kernel(model, default_grid(model, points=128))
        assert np.max(np.abs(kernel - kernel.T)) == 0.0

    def test_trace_matches_gaussian_integral(self, model):
        # trace(K) ~ integral of I(x) = A sigma_I sqrt(2 pi)
        kernel = discretize_kernel(model, default_grid(model, points=512, sigmas=6.0))
        expected = model.amplitude * model.sigma_I * math.sqrt(2.0 * math.pi)
        assert np.trace(kernel) == pytest.approx(expected, rel=1e-8)

    def test_envelope_warning_for_small_domain(self, model):
        with pytest.warns(EnvelopeTruncationWarning):
            discretize_kernel(model, GridSpec(half_width=2.0 * model.sigma_I, points=64))


class TestEigendecompose:
    def test_leading_ratio_matches_closed_form(self, model):
        kernel = discretize_kernel(model, default_grid(model))
        spectrum = eigendecompose(kernel, default_grid(model), count=12)
        ratio = spectrum.eigenvalues[1] / spectrum.eigenvalues[0]
        assert ratio == pytest.approx(eigenvalue_ratio(model.beta(), 1), rel=1e-6)

    def test_coherent_limit_single_dominant_mode(self):
        nearly_coherent = SchellModel(1.0, 100.0, 633e-9)
        grid = default_grid(nearly_coherent)
        spectrum = eigendecompose(discretize_kernel(nearly_coherent, grid), grid, count=3)
        assert spectrum.eigenvalues[1] / spectrum.eigenvalues[0] < 1e-3

    def test_fundamental_matches_analytic_mode(self, model):
        from thermal_modes import derive_kernel_params, hg_mode

        grid = default_grid(model)
        spectrum = eigendecompose(discretize_kernel(model, grid), grid, count=1)
        c = derive_kernel_params(model).c
        analytic = hg_mode(c, 0, grid.coordinates())
        diff = spectrum.modes[0] - analytic
        assert math.sqrt(grid.spacing * float(diff @ diff)) < 1e-6

    def test_modes_orthonormal_under_quadrature(self, model):
        grid = default_grid(model)
        spectrum = eigendecompose(discretize_kernel(model, grid), grid, count=10)
        gram = spectrum.modes @ spectrum.modes.T * grid.spacing
        assert np.max(np.abs(gram - np.eye(10))) < 1e-8

    def test_rejects_asymmetric_kernel(self, model):
        grid = default_grid(model, points=32)
        kernel = discretize_kernel(model, grid)
        kernel[0, 1] += 1.0
        with pytest.raises(ValueError):
            eigendecompose(kernel, grid, count=2)

    def test_count_bounds(self, model):
        grid = default_grid(model, points=32)
        kernel = discretize_kernel(model, grid)
        with pytest.raises(ValueError):
            eigendecompose(kernel, grid, count=0)
        with pytest.raises(ValueError):
            eigendecompose(kernel, grid, count=33)


class TestCompareToAnalytic:
    def test_fine_grid_accuracy(self, model):
        grid = default_grid(model)
        spectrum = eigendecompose(discretize_kernel(model, grid), grid, count=10)
        report = compare_to_analytic(spectrum, model, count=10)
        assert report.max_eigenvalue_rel_error < 1e-6
        assert report.max_mode_l2_error < 1e-6

    def test_convergence_with_resolution(self, model):
        errors = {}
        for points in (32, 128, 512):
            grid = default_grid(model, points=points)
            spectrum = eigendecompose(discretize_kernel(model, grid), grid, count=5)
            errors[points] = compare_to_analytic(spectrum, model, count=5).eigenvalue_rel_error
        # Spectral convergence: the coarse grid has visible error, finer grids
        # sit at the floating-point floor.
        assert np.max(errors[32]) > 1e-4
        assert np.max(errors[128]) < 1e-12
        assert np.max(errors[512]) < 1e-12

    def test_spectrum_stable_under_domain_growth(self, model):
        # Doubling L at fixed spacing once the envelope is negligible.
        grid1 = GridSpec(half_width=5.0 * model.sigma_I, points=512)
        grid2 = GridSpec(half_width=10.0 * model.sigma_I, points=1023)
        assert grid2.spacing == pytest.approx(grid1.spacing, rel=1e-12)
        s1 = eigendecompose(discretize_kernel(model, grid1), grid1, count=10)
        s2 = eigendecompose(discretize_kernel(model, grid2), grid2, count=10)
        assert np.max(np.abs(s2.eigenvalues / s1.eigenvalues - 1.0)) < 1e-8

    def test_count_exceeding_available_rejected(self, model):
        grid = default_grid(model, points=64)
        spectrum = eigendecompose(discretize_kernel(model, grid), grid, count=4)
        with pytest.raises(ValueError):
            compare_to_analytic(spectrum, model, count=5)
