"""Gaussian Schell-model source and its coherent-mode decomposition.

The source is fully described by three lengths: the intensity waist
``sigma_I``, the coherence radius ``sigma_mu`` and the wavelength.  The
mutual coherence function factorizes into a Gaussian intensity envelope and
a Gaussian degree of coherence, which makes the eigenmodes of the coherence
kernel Hermite-Gaussian functions with a closed-form geometric eigenvalue
spectrum.  Everything in this module is a pure function of immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

__all__ = [
    "MAX_HG_ORDER",
    "SchellModel",
    "KernelParams",
    "ModeIndex",
    "ModeSpectrum",
    "derive_kernel_params",
    "eigenvalue",
    "eigenvalue_ratio",
    "hg_mode",
    "hg_mode_table",
    "g1_kernel",
    "siegert_g2",
]

# Highest Hermite-Gaussian order the normalized recurrence supports without
# accuracy loss; well above anything the geometric spectrum makes relevant.
MAX_HG_ORDER = 200


@dataclass(frozen=True)
class SchellModel:
    """Gaussian Schell-model source parameters.

    Parameters
    ----------
    sigma_I:
        Beam intensity waist (m): intensity profile ``A exp(-x^2/2 sigma_I^2)``.
    sigma_mu:
        Coherence radius (m): degree of coherence ``exp(-dx^2/2 sigma_mu^2)``.
    wavelength:
        Vacuum wavelength (m).
    amplitude:
        Peak intensity ``A`` in arbitrary units.
    """

    sigma_I: float
    sigma_mu: float
    wavelength: float
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        for name in ("sigma_I", "sigma_mu", "wavelength", "amplitude"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and positive, got {value!r}")

    def beta(self) -> float:
        """Ratio of coherence radius to beam waist; small beta means many modes."""
        return self.sigma_mu / self.sigma_I

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    def intensity(self, x):
        """Mean intensity profile at transverse position ``x``."""
        x = np.asarray(x, dtype=float)
        return self.amplitude * np.exp(-(x**2) / (2.0 * self.sigma_I**2))


@dataclass(frozen=True)
class KernelParams:
    """Derived inverse-area parameters (a, b, c) of the coherence kernel.

    ``a`` is the coefficient of ``(x1^2 + x2^2)`` in the kernel exponent,
    ``b`` the coefficient of ``(x1 - x2)^2``, and ``c = sqrt(a^2 + 2ab)`` the
    waist parameter of the Hermite-Gaussian eigenmodes.
    """

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.b >= 0):
            raise ValueError("kernel parameters require a > 0 and b >= 0")
        expected = math.sqrt(self.a**2 + 2.0 * self.a * self.b)
        if not math.isclose(self.c, expected, rel_tol=1e-12):
            raise ValueError("c must equal sqrt(a^2 + 2ab)")


def derive_kernel_params(model: SchellModel) -> KernelParams:
    """Kernel parameters of the coherence function of ``model``.

    The kernel ``G1(x1, x2) = A exp(-a (x1^2 + x2^2)) exp(-b (x1 - x2)^2)``
    gives ``a = 1/(4 sigma_I^2)`` and ``b = 1/(2 sigma_mu^2)``.
    """
    a = 1.0 / (4.0 * model.sigma_I**2)
    b = 1.0 / (2.0 * model.sigma_mu**2)
    c = math.sqrt(a * a + 2.0 * a * b)
    return KernelParams(a=a, b=b, c=c)


@dataclass(frozen=True, order=True)
class ModeIndex:
    """Two-dimensional Hermite-Gaussian mode index (m along x, n along y)."""

    m: int
    n: int = 0

    def __post_init__(self) -> None:
        if self.m < 0 or self.n < 0:
            raise ValueError(f"mode indices must be non-negative, got {self}")

    @property
    def order(self) -> int:
        return self.m + self.n


def eigenvalue(model: SchellModel, n: int) -> float:
    """n-th 1D eigenvalue of the coherence kernel of ``model``.

    ``lambda_n = A sqrt(pi/(a+b+c)) (b/(a+b+c))^n``: a geometric spectrum
    whose common ratio depends only on beta.
    """
    if n < 0:
        raise ValueError("mode order must be non-negative")
    p = derive_kernel_params(model)
    s = p.a + p.b + p.c
    return model.amplitude * math.sqrt(math.pi / s) * (p.b / s) ** n


def eigenvalue_ratio(beta: float, n: int = 1) -> float:
    """``lambda_n / lambda_0`` from beta alone.

    Independent closed form ``(beta^2/2 + 1 + beta sqrt((beta/2)^2 + 1))^-n``;
    agrees with :func:`eigenvalue` ratios to machine precision.
    """
    if not (math.isfinite(beta) and beta > 0):
        raise ValueError("beta must be finite and positive")
    if n < 0:
        raise ValueError("mode order must be non-negative")
    q = 1.0 / (beta**2 / 2.0 + 1.0 + beta * math.sqrt((beta / 2.0) ** 2 + 1.0))
    return q**n


def hg_mode(c: float, n: int, x) -> np.ndarray:
    """L2-normalized Hermite-Gaussian eigenmode of waist parameter ``c``.

    ``phi_n(x) = (2c/pi)^(1/4) H_n(x sqrt(2c)) exp(-c x^2) / sqrt(2^n n!)``,
    evaluated through the normalized three-term recurrence so that no
    factorial or Hermite value ever overflows.
    """
    values = hg_mode_table(c, n, x)[n]
    return float(values[0]) if np.ndim(x) == 0 else values


def hg_mode_table(c: float, n_max: int, x) -> np.ndarray:
    """All modes ``phi_0 .. phi_n_max`` sampled at ``x``, shape ``(n_max+1, len(x))``."""
    if not (math.isfinite(c) and c > 0):
        raise ValueError("waist parameter c must be finite and positive")
    if n_max < 0:
        raise ValueError("mode order must be non-negative")
    if n_max > MAX_HG_ORDER:
        raise ValueError(f"mode order {n_max} exceeds supported maximum {MAX_HG_ORDER}")
    u = np.atleast_1d(np.asarray(x, dtype=float)) * math.sqrt(2.0 * c)
    table = np.empty((n_max + 1, u.size), dtype=float)
    # psi_k(u) = H_k(u) exp(-u^2/2) / sqrt(2^k k! sqrt(pi)); phi = (2c)^(1/4) psi
    table[0] = math.pi ** (-0.25) * np.exp(-0.5 * u * u)
    if n_max >= 1:
        table[1] = math.sqrt(2.0) * u * table[0]
    for k in range(1, n_max):
        table[k + 1] = (
            math.sqrt(2.0 / (k + 1)) * u * table[k]
            - math.sqrt(k / (k + 1)) * table[k - 1]
        )
    return (2.0 * c) ** 0.25 * table


def g1_kernel(model: SchellModel, x1, x2):
    """First-order coherence function ``G1(x1, x2)`` of the 1D source.

    ``sqrt(I(x1) I(x2)) mu(x1 - x2)`` with Gaussian intensity and degree of
    coherence; symmetric in its arguments and equal to ``I(x)`` on the diagonal.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    envelope = np.exp(-(x1**2 + x2**2) / (4.0 * model.sigma_I**2))
    mu = np.exp(-((x1 - x2) ** 2) / (2.0 * model.sigma_mu**2))
    return model.amplitude * envelope * mu


def siegert_g2(model: SchellModel, x1, x2):
    """Intensity correlation ``G2(x1, x2) = <I1><I2> + |G1(x1, x2)|^2``."""
    return model.intensity(x1) * model.intensity(x2) + np.abs(g1_kernel(model, x1, x2)) ** 2


_NORMALIZATIONS = ("raw", "relative", "unit-trace")


@dataclass(frozen=True)
class ModeSpectrum:
    """Ordered two-dimensional eigenvalue spectrum ``lambda_mn``.

    ``normalization`` records the convention of the stored values: ``raw``
    (physical units), ``relative`` (divided by ``lambda_00``) or
    ``unit-trace`` (summing to one over the stored window).
    """

    c: float
    eigenvalues: Mapping[ModeIndex, float] = field(repr=False)
    normalization: str = "raw"

    def __post_init__(self) -> None:
        if self.normalization not in _NORMALIZATIONS:
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if any(v < 0 for v in self.eigenvalues.values()):
            raise ValueError("eigenvalues must be non-negative")

    @classmethod
    def from_model(
        cls,
        model: SchellModel,
        max_order: int = 20,
        normalization: str = "relative",
    ) -> "ModeSpectrum":
        """Analytic separable 2D spectrum over all indices with ``m + n <= max_order``."""
        params = derive_kernel_params(model)
        lam0 = eigenvalue(model, 0)
        q = eigenvalue_ratio(model.beta(), 1)
        # Separable 2D kernel G1(x1,y1;x2,y2) = G1x G1y / A, so
        # lambda_mn = lambda_m lambda_n / A = (lambda_0^2/A) q^(m+n).
        values = {
            ModeIndex(m, n): (lam0**2 / model.amplitude) * q ** (m + n)
            for m in range(max_order + 1)
            for n in range(max_order + 1 - m)
        }
        return cls(c=params.c, eigenvalues=values, normalization="raw").normalized(
            normalization
        )

    def normalized(self, kind: str) -> "ModeSpectrum":
        """Return the spectrum rescaled to the requested convention."""
        if kind not in _NORMALIZATIONS:
            raise ValueError(f"unknown normalization {kind!r}")
        if kind == self.normalization and kind != "raw":
            return self
        if kind == "raw" and self.normalization != "raw":
            raise ValueError("cannot recover raw units from a normalized spectrum")
        if kind == "relative":
            scale = self.eigenvalues[ModeIndex(0, 0)]
        elif kind == "unit-trace":
            scale = sum(self.eigenvalues.values())
        else:
            return self
        if scale <= 0:
            raise ValueError("cannot normalize a spectrum with no weight")
        values = {k: v / scale for k, v in self.eigenvalues.items()}
        return ModeSpectrum(c=self.c, eigenvalues=values, normalization=kind)

    def __getitem__(self, index: ModeIndex) -> float:
        return self.eigenvalues[index]

    def indices(self) -> list[ModeIndex]:
        return sorted(self.eigenvalues)
