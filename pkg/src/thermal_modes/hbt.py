"""Mode-filtered Hanbury Brown-Twiss interferometer simulation.

Both arms of the interferometer are modeled in their mode-matched reduced
form: a filter acts as an overlap integral between the source-plane field and
a detection mode (ideal eigenmode projector, binary step phase mask in front
of a fiber, or a displaced Gaussian fiber mode).  Singles and coincidence
rates follow from the detected per-realization powers, normalized exactly as
in the experiment, so filter imperfections propagate into the correlation
matrix rather than being assumed away.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import erf, gammaln

from .gsm import (
    MAX_HG_ORDER,
    ModeIndex,
    SchellModel,
    derive_kernel_params,
    eigenvalue,
    eigenvalue_ratio,
    hg_mode_table,
)
from .speckle import (
    EnsembleConfig,
    FieldRealization,
    InsufficientSamplesError,
    accumulate_realizations,
    map_realizations,
)

__all__ = [
    "DetectionOptics",
    "IdealProjector",
    "GaussianBucket",
    "StepPhaseMask",
    "G2Estimate",
    "G2Matrix",
    "ZeroPowerError",
    "NonConvergenceError",
    "MaskResolutionWarning",
    "ScanTruncationWarning",
    "matched_focal_length",
    "filter_overlap",
    "g2_ideal",
    "g2_monte_carlo",
    "g2_matrix_monte_carlo",
    "g2_scan",
    "partial_intensity",
    "measured_spectrum",
    "fiber_convolution",
    "calibrate_mask",
    "mode_mismatch_witness",
]


class ZeroPowerError(RuntimeError):
    """An arm detected numerically zero average power; g2 is undefined."""


class NonConvergenceError(RuntimeError):
    """Mask calibration failed to reach its target within the iteration cap."""


class MaskResolutionWarning(UserWarning):
    """Quadrature grid too coarse for the requested mode order."""


class ScanTruncationWarning(UserWarning):
    """Modal series truncated before reaching the requested tail tolerance."""


@dataclass(frozen=True)
class DetectionOptics:
    """Fiber waist, coupling-lens focal length and wavenumber of one arm."""

    fiber_waist: float
    focal_length: float
    wavenumber: float

    def __post_init__(self) -> None:
        if min(self.fiber_waist, self.focal_length, self.wavenumber) <= 0:
            raise ValueError("all optics parameters must be positive")

    def detection_waist_parameter(self) -> float:
        """Waist parameter of the back-projected fiber mode in the source plane."""
        return self.wavenumber**2 * self.fiber_waist**2 / (4.0 * self.focal_length**2)

    def is_matched(self, c: float, tol: float = 1e-9) -> bool:
        return abs(self.detection_waist_parameter() / c - 1.0) < tol


def matched_focal_length(model: SchellModel, fiber_waist: float) -> float:
    """Focal length for which the back-projected fiber waist equals the eigenmode waist.

    Inverts ``k^2 w_f^2 / (4 f^2) = c``.
    """
    if fiber_waist <= 0:
        raise ValueError("fiber_waist must be positive")
    c = derive_kernel_params(model).c
    return model.wavenumber * fiber_waist / (2.0 * math.sqrt(c))


# ---------------------------------------------------------------------------
# Detection-mode overlaps


def gaussian_displacement_overlaps(c: float, count: int, displacement: float) -> np.ndarray:
    """Overlaps of eigenmodes 0..count-1 with a displaced matched fundamental.

    Closed form ``alpha_k(d) = exp(-c d^2/2) (d sqrt(c))^k / sqrt(k!)``
    (evaluated in log space); reduces to a Kronecker delta at zero
    displacement.
    """
    k = np.arange(count)
    if displacement == 0.0:
        out = np.zeros(count)
        out[0] = 1.0
        return out
    amp = math.sqrt(c) * displacement
    log_mag = -0.5 * c * displacement**2 + k * math.log(abs(amp)) - 0.5 * gammaln(k + 1)
    sign = np.where((k % 2 == 1) & (amp < 0), -1.0, 1.0)
    return sign * np.exp(log_mag)


def mismatched_center_overlaps(c: float, c_det: float, count: int) -> np.ndarray:
    """Overlaps of eigenmodes with a centered Gaussian of different waist parameter.

    Odd orders vanish by parity; even orders follow the closed Gaussian
    moment formula with ratio ``(c - c_det)/(c + c_det)``.
    """
    if c_det <= 0:
        raise ValueError("detection waist parameter must be positive")
    out = np.zeros(count)
    gamma = (c - c_det) / (c + c_det)
    prefactor = (4.0 * c * c_det / math.pi**2) ** 0.25 * math.sqrt(math.pi / (c + c_det))
    for k in range(0, count, 2):
        j = k // 2
        log_comb = 0.5 * gammaln(k + 1) - j * math.log(2.0) - gammaln(j + 1)
        out[k] = prefactor * math.exp(log_comb) * (abs(gamma) ** j if gamma != 0 else (j == 0))
        if gamma < 0 and j % 2 == 1:
            out[k] = -out[k]
    return out


def _quadrature_grid(c: float, count: int, extra_extent: float = 0.0, points: int = 4096) -> np.ndarray:
    scale = 1.0 / math.sqrt(2.0 * c)
    extent = (math.sqrt(2.0 * count + 1.0) + 6.0) * scale + extra_extent
    dx_needed = math.pi * scale / (8.0 * math.sqrt(2.0 * count + 1.0))
    x = np.linspace(-extent, extent, points)
    if x[1] - x[0] > dx_needed:
        warnings.warn(
            f"quadrature spacing {x[1] - x[0]:.3e} exceeds the 8-points-per-oscillation "
            f"bound {dx_needed:.3e} for order {count - 1}",
            MaskResolutionWarning,
            stacklevel=3,
        )
    return x


def detection_overlaps(
    c: float,
    count: int,
    displacement: float = 0.0,
    c_det: float | None = None,
    points: int = 4096,
) -> np.ndarray:
    """Coupling amplitudes of eigenmodes 0..count-1 into a Gaussian detection mode.

    Uses closed forms for the matched waist and for the centered mismatched
    case; general (displaced and mismatched) overlaps fall back to quadrature.
    """
    if c_det is None or c_det == c:
        return gaussian_displacement_overlaps(c, count, displacement)
    if displacement == 0.0:
        return mismatched_center_overlaps(c, c_det, count)
    x = _quadrature_grid(c, count, extra_extent=abs(displacement), points=points)
    table = hg_mode_table(c, count - 1, x)
    det = (2.0 * c_det / math.pi) ** 0.25 * np.exp(-c_det * (x - displacement) ** 2)
    return table @ det * (x[1] - x[0])


def step_mask_sign(steps: Sequence[float], x) -> np.ndarray:
    """Binary mask transmission: alternating +-1 across each step, +1 rightmost."""
    x = np.asarray(x, dtype=float)
    below = np.searchsorted(np.asarray(steps), x)
    return np.where((len(steps) - below) % 2 == 0, 1.0, -1.0)


def step_mask_overlaps(
    c: float,
    steps: Sequence[float],
    count: int,
    displacement: float = 0.0,
    c_det: float | None = None,
    points: int = 4096,
) -> np.ndarray:
    """Quadrature overlaps of eigenmodes with (mask x displaced fundamental)."""
    x = _quadrature_grid(c, count, extra_extent=abs(displacement), points=points)
    table = hg_mode_table(c, count - 1, x)
    cd = c if c_det is None else c_det
    det = (2.0 * cd / math.pi) ** 0.25 * np.exp(-cd * (x - displacement) ** 2)
    return table @ (step_mask_sign(steps, x) * det) * (x[1] - x[0])


# ---------------------------------------------------------------------------
# Mode filters


@dataclass(frozen=True)
class IdealProjector:
    """Lossless projector onto a single Hermite-Gaussian eigenmode."""

    index: ModeIndex

    def axis_overlaps(self, c: float, count: int, axis: int) -> np.ndarray:
        target = self.index.m if axis == 0 else self.index.n
        out = np.zeros(count)
        if target < count:
            out[target] = 1.0
        return out

    def label(self) -> str:
        return f"ideal_{self.index.m}_{self.index.n}"


@dataclass(frozen=True)
class GaussianBucket:
    """Bare fiber (fundamental Gaussian detection mode), possibly displaced."""

    displacement: tuple[float, float] = (0.0, 0.0)
    c_det: float | None = None

    def __post_init__(self) -> None:
        if not all(math.isfinite(d) for d in self.displacement):
            raise ValueError("displacement must be finite")

    def axis_overlaps(self, c: float, count: int, axis: int) -> np.ndarray:
        return detection_overlaps(c, count, self.displacement[axis], self.c_det)

    def label(self) -> str:
        return f"bucket_{self.displacement[0]:g}_{self.displacement[1]:g}"


@dataclass(frozen=True)
class StepPhaseMask:
    """Binary {0, pi} step phase mask in front of a centered fiber.

    Step positions are physical lengths in the source plane, one sorted tuple
    per axis; an empty tuple means no mask on that axis.
    """

    index: ModeIndex
    steps_x: tuple[float, ...]
    steps_y: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        for steps in (self.steps_x, self.steps_y):
            if any(b <= a for a, b in zip(steps, steps[1:])):
                raise ValueError("step positions must be strictly increasing")

    @classmethod
    def for_mode(cls, index: ModeIndex, c: float) -> "StepPhaseMask":
        """Default mask with steps at the Hermite-polynomial zeros of the target mode."""
        return cls(
            index=index,
            steps_x=_hermite_zero_steps(index.m, c),
            steps_y=_hermite_zero_steps(index.n, c),
        )

    def axis_overlaps(self, c: float, count: int, axis: int) -> np.ndarray:
        steps = self.steps_x if axis == 0 else self.steps_y
        return step_mask_overlaps(c, steps, count)

    def label(self) -> str:
        return f"mask_{self.index.m}_{self.index.n}"

    def to_dict(self, c: float) -> dict:
        """Serialize with step positions in units of 1/sqrt(2c)."""
        scale = math.sqrt(2.0 * c)
        return {
            "index": [self.index.m, self.index.n],
            "steps_x_scaled": [s * scale for s in self.steps_x],
            "steps_y_scaled": [s * scale for s in self.steps_y],
        }

    @classmethod
    def from_dict(cls, data: dict, c: float) -> "StepPhaseMask":
        scale = math.sqrt(2.0 * c)
        return cls(
            index=ModeIndex(*data["index"]),
            steps_x=tuple(s / scale for s in data["steps_x_scaled"]),
            steps_y=tuple(s / scale for s in data["steps_y_scaled"]),
        )


ModeFilter = IdealProjector | GaussianBucket | StepPhaseMask


def _hermite_zero_steps(order: int, c: float) -> tuple[float, ...]:
    if order == 0:
        return ()
    roots = np.polynomial.hermite.hermgauss(order)[0]
    return tuple(roots / math.sqrt(2.0 * c))


def filter_overlap(filt: ModeFilter, mode_index: ModeIndex, c: float) -> float:
    """Amplitude with which one 2D eigenmode couples into the detected mode."""
    ox = filt.axis_overlaps(c, mode_index.m + 1, axis=0)
    oy = filt.axis_overlaps(c, mode_index.n + 1, axis=1)
    return float(ox[mode_index.m] * oy[mode_index.n])


# ---------------------------------------------------------------------------
# Correlation estimates


def g2_ideal(filter1_index: ModeIndex, filter2_index: ModeIndex) -> float:
    """Analytic normalized g2 for perfectly matched ideal projectors: 1 + delta."""
    return 2.0 if filter1_index == filter2_index else 1.0


@dataclass(frozen=True)
class G2Estimate:
    value: float
    stderr: float
    samples: int


def _jackknife_g2(p1: np.ndarray, p2: np.ndarray) -> G2Estimate:
    n = len(p1)
    if n < 2:
        raise InsufficientSamplesError("g2 needs at least 2 realizations")
    if p1.mean() <= 0.0 or p2.mean() <= 0.0:
        raise ZeroPowerError("an arm detected zero average power")
    sp = float((p1 * p2).sum())
    s1 = float(p1.sum())
    s2 = float(p2.sum())
    value = (sp / n) / ((s1 / n) * (s2 / n))
    m = n - 1
    theta = ((sp - p1 * p2) / m) / (((s1 - p1) / m) * ((s2 - p2) / m))
    stderr = math.sqrt((m / n) * float(((theta - theta.mean()) ** 2).sum()))
    return G2Estimate(value=value, stderr=stderr, samples=n)


def _overlap_for_field(filt: ModeFilter, c: float, coeff_shape: tuple) -> np.ndarray | tuple:
    if len(coeff_shape) == 1:
        return filt.axis_overlaps(c, coeff_shape[0], axis=0)
    return (
        filt.axis_overlaps(c, coeff_shape[0], axis=0),
        filt.axis_overlaps(c, coeff_shape[1], axis=1),
    )


def _arm_powers(coeff: np.ndarray, overlap) -> np.ndarray:
    if coeff.ndim == 2:
        amp = coeff @ overlap
    else:
        ox, oy = overlap
        amp = np.einsum("rmn,m,n->r", coeff, ox, oy)
    return np.abs(amp) ** 2


def g2_monte_carlo(
    ensemble: Iterable[FieldRealization],
    filter1: ModeFilter,
    filter2: ModeFilter,
    optics: DetectionOptics | None = None,
    allow_mismatch: bool = False,
) -> G2Estimate:
    """Normalized g2 between two filtered arms, estimated over an ensemble.

    Per realization the detected power in each arm is the squared magnitude of
    the modal-coefficient/overlap contraction; the returned ratio
    ``<P1 P2> / (<P1><P2>)`` carries a delete-one jackknife standard error.
    """
    fields = list(ensemble)
    if not fields:
        raise InsufficientSamplesError("empty ensemble")
    c = fields[0].c
    if optics is not None and not allow_mismatch and not optics.is_matched(c):
        raise ValueError(
            "detection optics are not mode-matched to the source "
            "(pass allow_mismatch=True to override)"
        )
    coeff = np.stack([f.coefficients for f in fields])
    shape = coeff.shape[1:]
    p1 = _arm_powers(coeff, _overlap_for_field(filter1, c, shape))
    p2 = _arm_powers(coeff, _overlap_for_field(filter2, c, shape))
    return _jackknife_g2(p1, p2)


@dataclass(frozen=True)
class G2Matrix:
    """Normalized g2 over all pairs of arm-1 and arm-2 filters."""

    filters1: tuple[ModeFilter, ...]
    filters2: tuple[ModeFilter, ...]
    entries: dict[tuple[int, int], G2Estimate]

    def value(self, i: int, j: int) -> float:
        return self.entries[(i, j)].value

    def stderr(self, i: int, j: int) -> float:
        return self.entries[(i, j)].stderr


def g2_matrix_monte_carlo(
    model: SchellModel,
    config: EnsembleConfig,
    filters1: Sequence[ModeFilter],
    filters2: Sequence[ModeFilter] | None = None,
    threads: int = 1,
) -> G2Matrix:
    """g2 over all filter pairs from a single streamed ensemble.

    Per-filter powers are computed once per realization block, so the cost is
    linear in the number of filters rather than pairs.
    """
    if filters2 is None:
        filters2 = filters1
    c = derive_kernel_params(model).c
    all_filters = list(filters1) + list(filters2)
    shape = (
        (config.mode_cutoff,) if config.dimensions == 1 else (config.mode_cutoff,) * 2
    )
    overlaps = [_overlap_for_field(f, c, shape) for f in all_filters]

    def block_powers(coeff: np.ndarray) -> np.ndarray:
        return np.stack([_arm_powers(coeff, o) for o in overlaps], axis=1)

    powers = map_realizations(model, config, block_powers, threads=threads)
    n1 = len(filters1)
    entries = {
        (i, j): _jackknife_g2(powers[:, i], powers[:, n1 + j])
        for i in range(len(filters1))
        for j in range(len(filters2))
    }
    return G2Matrix(filters1=tuple(filters1), filters2=tuple(filters2), entries=entries)


# ---------------------------------------------------------------------------
# Analytic displacement scans and spectra


def _scan_denominator(
    model: SchellModel,
    displacements: np.ndarray,
    c_det: float | None,
    tail_tol: float,
) -> tuple[np.ndarray, np.ndarray]:
    """``sum_k lambda_k alpha_k(d)^2`` and the alpha table, truncated adaptively."""
    params = derive_kernel_params(model)
    q = eigenvalue_ratio(model.beta(), 1)
    lam0 = eigenvalue(model, 0)
    count = 64
    while True:
        alphas = np.stack(
            [detection_overlaps(params.c, count, d, c_det) for d in displacements],
            axis=1,
        )
        lam = lam0 * q ** np.arange(count)
        denom = lam @ alphas**2
        # Bessel bounds the discarded weight: the remaining alpha_k^2 sum to at
        # most 1 - sum_included, each weighted by at most lambda_count.
        remainder = lam0 * q**count * np.clip(1.0 - np.sum(alphas**2, axis=0), 0.0, None)
        if np.all(remainder <= tail_tol * denom):
            break
        if count > MAX_HG_ORDER:
            warnings.warn(
                f"modal series not converged to tail tolerance {tail_tol:g} "
                f"within {MAX_HG_ORDER} modes",
                ScanTruncationWarning,
                stacklevel=3,
            )
            break
        count = min(2 * count, MAX_HG_ORDER + 1)
    return denom, alphas


def g2_scan(
    model: SchellModel,
    mask_index: int | ModeIndex,
    displacements,
    c_det: float | None = None,
    tail_tol: float = 1e-10,
) -> np.ndarray:
    """Analytic g2 between a mode-m filter arm and a fiber scanned across the beam.

    ``g2(d) = 1 + lambda_m alpha_m(d)^2 / sum_k lambda_k alpha_k(d)^2`` where
    ``alpha_k`` is the overlap of eigenmode k with the (optionally mismatched)
    displaced detection fundamental.
    """
    m = mask_index.m if isinstance(mask_index, ModeIndex) else int(mask_index)
    if m < 0:
        raise ValueError("mask order must be non-negative")
    d = np.atleast_1d(np.asarray(displacements, dtype=float))
    q = eigenvalue_ratio(model.beta(), 1)
    lam0 = eigenvalue(model, 0)
    denom, alphas = _scan_denominator(model, d, c_det, tail_tol)
    if m < len(alphas):
        alpha_m = alphas[m]
    else:
        params = derive_kernel_params(model)
        alpha_m = np.array([detection_overlaps(params.c, m + 1, di, c_det)[m] for di in d])
    return 1.0 + lam0 * q**m * alpha_m**2 / denom


def mode_mismatch_witness(
    model: SchellModel,
    mask_order: int,
    c_det: float,
    match_tol: float = 1e-9,
) -> float:
    """Centered g2 for an even-order filter against a fiber of waist parameter ``c_det``.

    Equals 1 exactly when the detection waist matches the eigenmode waist and
    exceeds 1 otherwise, which is the operational mode-matching criterion.
    """
    if mask_order < 2 or mask_order % 2 != 0:
        raise ValueError("the witness is defined for even mask orders >= 2")
    c = derive_kernel_params(model).c
    if abs(c_det / c - 1.0) < match_tol:
        return 1.0
    return float(g2_scan(model, mask_order, [0.0], c_det=c_det)[0])


def partial_intensity(source, index: ModeIndex) -> float:
    """Mean detected power behind an ideal projector on mode ``index``.

    Analytic when given a :class:`SchellModel` (the 2D eigenvalue itself),
    statistical when given an ensemble of field realizations.  Ratios to the
    (0, 0) value estimate the normalized eigenvalue spectrum.
    """
    if isinstance(source, SchellModel):
        return (
            eigenvalue(source, index.m) * eigenvalue(source, index.n) / source.amplitude
        )
    coeff = np.stack([f.coefficients for f in source])
    if coeff.ndim == 2:
        if index.n != 0:
            raise ValueError("1D ensembles carry only (m, 0) modes")
        if index.m >= coeff.shape[1]:
            raise ValueError("mode order beyond the synthesis cutoff")
        return float(np.mean(np.abs(coeff[:, index.m]) ** 2))
    if index.m >= coeff.shape[1] or index.n >= coeff.shape[2]:
        raise ValueError("mode order beyond the synthesis cutoff")
    return float(np.mean(np.abs(coeff[:, index.m, index.n]) ** 2))


def measured_spectrum(
    model: SchellModel,
    config: EnsembleConfig,
    max_order: int,
    threads: int = 1,
):
    """Monte Carlo eigenvalue spectrum from per-mode partial intensities.

    Streams the ensemble, accumulating mean projector powers for all indices
    with ``m + n <= max_order``; returned relative to the (0, 0) value.
    """
    from .gsm import ModeSpectrum

    if max_order >= config.mode_cutoff:
        raise ValueError("max_order must be below the synthesis cutoff")
    sums = accumulate_realizations(
        model, config, lambda block: np.sum(np.abs(block) ** 2, axis=0), threads=threads
    )
    mean_power = sums / config.realizations
    c = derive_kernel_params(model).c
    if config.dimensions == 1:
        values = {ModeIndex(m, 0): float(mean_power[m]) for m in range(max_order + 1)}
    else:
        values = {
            ModeIndex(m, n): float(mean_power[m, n])
            for m in range(max_order + 1)
            for n in range(max_order + 1 - m)
        }
    return ModeSpectrum(c=c, eigenvalues=values, normalization="raw").normalized("relative")


def fiber_convolution(
    order: int,
    c: float,
    positions,
    c_det: float | None = None,
    points: int = 4096,
) -> np.ndarray:
    """Back-propagation test profile ``|conv(phi_m, phi_0)|^2`` versus fiber position."""
    if order < 0:
        raise ValueError("mode order must be non-negative")
    positions = np.atleast_1d(np.asarray(positions, dtype=float))
    cd = c if c_det is None else c_det
    xi = _quadrature_grid(c, order + 1, extra_extent=float(np.max(np.abs(positions))), points=points)
    phi_m = hg_mode_table(c, order, xi)[order]
    det = (2.0 * cd / math.pi) ** 0.25 * np.exp(-cd * (positions[:, None] - xi[None, :]) ** 2)
    amplitude = det @ phi_m * (xi[1] - xi[0])
    return np.abs(amplitude) ** 2


# ---------------------------------------------------------------------------
# Step-mask calibration


def _masked_fundamental_overlap(steps: Sequence[float], c: float) -> float:
    """``int s(x) phi_0(x)^2 dx`` evaluated exactly with error functions."""
    edges = np.concatenate([[-np.inf], np.asarray(steps, dtype=float), [np.inf]])
    cdf = np.empty(len(edges))
    cdf[0], cdf[-1] = 0.0, 1.0
    cdf[1:-1] = 0.5 * (1.0 + erf(math.sqrt(2.0 * c) * edges[1:-1]))
    masses = np.diff(cdf)
    signs = np.array([(-1.0) ** (len(masses) - 1 - i) for i in range(len(masses))])
    return float(np.dot(signs, masses))


def _golden_minimize(fun, lo: float, hi: float, tol: float = 1e-12, iters: int = 200) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - inv_phi * (b - a)
    x2 = a + inv_phi * (b - a)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(iters):
        if b - a < tol:
            break
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_phi * (b - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (b - a)
            f2 = fun(x2)
    return 0.5 * (a + b)


def _calibrate_steps(
    order: int,
    c: float,
    initial: Sequence[float] | None,
    tol: float,
    max_iter: int,
) -> tuple[float, ...]:
    if order == 0:
        return ()
    steps = list(initial if initial is not None else _hermite_zero_steps(order, c))
    if len(steps) != order:
        raise ValueError("number of steps must equal the mode order")
    extent = 8.0 / math.sqrt(2.0 * c)

    def objective(candidate: list[float]) -> float:
        return _masked_fundamental_overlap(candidate, c) ** 2

    gap = 1e-9 / math.sqrt(2.0 * c)  # keep steps strictly increasing
    for _ in range(max_iter):
        for j in range(order):
            lo = steps[j - 1] + gap if j > 0 else -extent
            hi = steps[j + 1] - gap if j < order - 1 else extent

            def line(x, j=j):
                trial = steps.copy()
                trial[j] = x
                return objective(trial)

            steps[j] = _golden_minimize(line, lo, hi)
        if objective(steps) <= tol:
            return tuple(steps)
    raise NonConvergenceError(
        f"mask calibration for order {order} did not reach {tol:g} "
        f"within {max_iter} sweeps (objective {objective(steps):.3e})"
    )


def calibrate_mask(
    index: ModeIndex,
    c: float,
    initial: StepPhaseMask | None = None,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> StepPhaseMask:
    """Refine step positions so the mask rejects the fundamental at the fiber center.

    Coordinate descent with a golden-section line search on each step,
    minimizing the squared overlap of the masked fundamental with the
    centered detection fundamental; deterministic for a given start.
    """
    init_x = initial.steps_x if initial is not None else None
    init_y = initial.steps_y if initial is not None else None
    return StepPhaseMask(
        index=index,
        steps_x=_calibrate_steps(index.m, c, init_x, tol, max_iter),
        steps_y=_calibrate_steps(index.n, c, init_y, tol, max_iter),
    )
