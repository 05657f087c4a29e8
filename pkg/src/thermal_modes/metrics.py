"""Quantitative comparison of spectra and correlation matrices against theory."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gsm import ModeIndex, ModeSpectrum
from .hbt import G2Matrix

__all__ = [
    "ComparisonReport",
    "MissingIndexError",
    "fidelity",
    "fidelity_curve",
    "g2_distance",
    "schmidt_number",
    "visibility",
]


class MissingIndexError(KeyError):
    """A spectrum or matrix lacks an index required for the comparison."""


def _window(spectrum: ModeSpectrum, m_max: int, n_max: int) -> np.ndarray:
    values = np.empty((m_max + 1, n_max + 1))
    for m in range(m_max + 1):
        for n in range(n_max + 1):
            try:
                values[m, n] = spectrum.eigenvalues[ModeIndex(m, n)]
            except KeyError as exc:
                raise MissingIndexError(f"spectrum has no entry for ({m}, {n})") from exc
    return values


def fidelity(
    lambda_exp: ModeSpectrum, lambda_th: ModeSpectrum, m_max: int, n_max: int
) -> float:
    """Bhattacharyya overlap of two eigenvalue distributions over a mode window.

    Both spectra are normalized internally, so the result is invariant to an
    overall rescaling of either input; 1 exactly when the normalized
    distributions coincide over the window.
    """
    a = _window(lambda_exp, m_max, n_max)
    b = _window(lambda_th, m_max, n_max)
    sa, sb = a.sum(), b.sum()
    if sa <= 0 or sb <= 0:
        raise ValueError("spectra must carry positive weight in the window")
    return float(np.sum(np.sqrt(a * b)) / math.sqrt(sa * sb))


def fidelity_curve(
    lambda_exp: ModeSpectrum, lambda_th: ModeSpectrum, max_order: int
) -> list[tuple[int, float]]:
    """Fidelity as a function of the square window size M = N = order."""
    return [
        (order, fidelity(lambda_exp, lambda_th, order, order))
        for order in range(max_order + 1)
    ]


def g2_distance(g2_exp: G2Matrix, g2_th: G2Matrix) -> float:
    """Euclidean norm of elementwise g2 differences over the shared index set."""
    if set(g2_exp.entries) != set(g2_th.entries):
        raise MissingIndexError("g2 matrices cover different filter-pair index sets")
    total = sum(
        (g2_exp.entries[key].value - g2_th.entries[key].value) ** 2 for key in g2_exp.entries
    )
    return math.sqrt(total)


def schmidt_number(spectrum) -> float:
    """Participation ratio ``(sum lambda)^2 / sum lambda^2`` of a spectrum.

    Scale-invariant and always >= 1; accepts a :class:`ModeSpectrum` or any
    array of non-negative eigenvalues.
    """
    if isinstance(spectrum, ModeSpectrum):
        values = np.array(list(spectrum.eigenvalues.values()))
    else:
        values = np.asarray(spectrum, dtype=float)
    if np.any(values < 0):
        raise ValueError("eigenvalues must be non-negative")
    square_sum = float(np.sum(values**2))
    if square_sum == 0:
        raise ValueError("spectrum has no nonzero eigenvalue")
    return float(np.sum(values)) ** 2 / square_sum


def visibility(g2_same: float, g2_cross: float) -> float:
    """Correlation contrast ``(g2_same - g2_cross)/(g2_same + g2_cross)``."""
    if g2_same <= 0 or g2_cross <= 0:
        raise ValueError("g2 values must be positive")
    return (g2_same - g2_cross) / (g2_same + g2_cross)


@dataclass(frozen=True)
class ComparisonReport:
    """Fidelity and distance summary over a range of mode windows."""

    fidelity: float
    distance: float
    max_order: tuple[int, int]
    fidelity_by_order: tuple[tuple[int, float], ...]
    distance_by_order: tuple[tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        if not (0.0 <= self.fidelity <= 1.0 + 1e-12):
            raise ValueError("fidelity must lie in [0, 1]")
        if self.distance < 0:
            raise ValueError("distance must be non-negative")

    def to_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "distance": self.distance,
            "max_order": list(self.max_order),
            "fidelity_by_order": [list(p) for p in self.fidelity_by_order],
            "distance_by_order": [list(p) for p in self.distance_by_order],
        }
