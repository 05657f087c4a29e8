"""Monte Carlo synthesis of pseudothermal field realizations.

Fields are built directly from the coherent-mode expansion: each realization
is a sum of Hermite-Gaussian eigenmodes with independent circular complex
Gaussian coefficients of variance equal to the mode eigenvalue.  This is a
statistical stand-in for a rotating ground-glass source observed within its
correlation time, and is exactly consistent with the decomposition under
test.  Randomness comes from counter-based streams keyed by
``(seed, realization_index)``, so ensembles are reproducible bit-for-bit
regardless of generation order or thread count.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .gsm import SchellModel, derive_kernel_params, eigenvalue, eigenvalue_ratio, hg_mode_table
from .nystrom import GridSpec

__all__ = [
    "EnsembleConfig",
    "FieldRealization",
    "G1Estimate",
    "SiegertReport",
    "InsufficientSamplesError",
    "CutoffWarning",
    "recommended_cutoff",
    "sample_field",
    "sample_fields",
    "map_realizations",
    "accumulate_realizations",
    "estimate_g1",
    "verify_siegert",
    "dump_ensemble",
    "load_ensemble",
]

ENSEMBLE_FORMAT_VERSION = 1


class InsufficientSamplesError(ValueError):
    """Raised when an estimator is asked for more than the ensemble can give."""


class CutoffWarning(UserWarning):
    """Synthesis truncated while the discarded eigenvalues are not negligible."""


@dataclass(frozen=True)
class EnsembleConfig:
    """How an ensemble is generated.

    ``mode_cutoff`` counts synthesis modes per axis; ``dimensions`` selects a
    1D line source or the separable 2D source.
    """

    realizations: int
    mode_cutoff: int
    seed: int
    grid: GridSpec
    dimensions: int = 1

    def __post_init__(self) -> None:
        if self.realizations < 1:
            raise ValueError("need at least one realization")
        if self.mode_cutoff < 1:
            raise ValueError("mode_cutoff must be positive")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.dimensions not in (1, 2):
            raise ValueError("dimensions must be 1 or 2")


def recommended_cutoff(model: SchellModel, tol: float = 1e-6) -> int:
    """Smallest per-axis mode count whose first discarded eigenvalue ratio is below ``tol``."""
    q = eigenvalue_ratio(model.beta(), 1)
    return max(1, math.ceil(math.log(tol) / math.log(q)))


def _check_cutoff(model: SchellModel, config: EnsembleConfig, tol: float = 1e-6) -> None:
    ratio = eigenvalue_ratio(model.beta(), config.mode_cutoff)
    if ratio >= tol:
        warnings.warn(
            f"mode_cutoff={config.mode_cutoff} leaves lambda_cutoff/lambda_0="
            f"{ratio:.2e} >= {tol:.0e}; synthesized coherence will be truncated",
            CutoffWarning,
            stacklevel=3,
        )


def _mode_amplitudes(model: SchellModel, config: EnsembleConfig) -> np.ndarray:
    """Per-axis standard deviations sqrt(lambda_n) of the modal coefficients."""
    lam = np.array([eigenvalue(model, n) for n in range(config.mode_cutoff)])
    if config.dimensions == 2:
        # 2D eigenvalues are lambda_m lambda_n / A for the separable kernel.
        lam = lam / math.sqrt(model.amplitude)
    return np.sqrt(lam)


def _coefficient_block(
    sigma: np.ndarray, config: EnsembleConfig, start: int, stop: int
) -> np.ndarray:
    """Modal coefficients for realizations ``start..stop-1``, leading axis realization."""
    cut = config.mode_cutoff
    shape = (cut, cut) if config.dimensions == 2 else (cut,)
    out = np.empty((stop - start, *shape), dtype=np.complex128)
    scale = sigma if config.dimensions == 1 else np.outer(sigma, sigma)
    for i in range(start, stop):
        rng = np.random.Generator(np.random.Philox(key=[config.seed, i]))
        z = rng.standard_normal((*shape, 2))
        out[i - start] = scale * (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2.0)
    return out


@dataclass(eq=False)
class FieldRealization:
    """One complex field sample, stored as modal coefficients.

    ``coefficients`` already include the sqrt-eigenvalue weights, so the field
    is ``E(x) = sum_n coefficients[n] phi_n(x)`` (and the separable double sum
    in 2D).
    """

    coefficients: np.ndarray
    c: float
    grid: GridSpec
    index: int

    @property
    def dimensions(self) -> int:
        return self.coefficients.ndim

    def at(self, x, y=None):
        """Field amplitude at transverse position(s)."""
        n_max = self.coefficients.shape[0] - 1
        px = hg_mode_table(self.c, n_max, x)
        if self.dimensions == 1:
            values = self.coefficients @ px
        else:
            py = hg_mode_table(self.c, n_max, 0.0 if y is None else y)
            values = np.einsum("mn,mi,nj->ij", self.coefficients, px, py)
        return values if values.size > 1 else complex(values.reshape(-1)[0])

    def amplitudes(self) -> np.ndarray:
        """Field sampled on the configured grid (1D vector or 2D array)."""
        x = self.grid.coordinates()
        table = hg_mode_table(self.c, self.coefficients.shape[0] - 1, x)
        if self.dimensions == 1:
            return self.coefficients @ table
        return table.T @ self.coefficients @ table


def sample_field(model: SchellModel, config: EnsembleConfig, index: int) -> FieldRealization:
    """The ``index``-th realization of the ensemble; identical (seed, index) give identical fields."""
    if not (0 <= index < config.realizations):
        raise ValueError(f"index {index} outside [0, {config.realizations})")
    _check_cutoff(model, config)
    sigma = _mode_amplitudes(model, config)
    coeff = _coefficient_block(sigma, config, index, index + 1)[0]
    return FieldRealization(
        coefficients=coeff, c=derive_kernel_params(model).c, grid=config.grid, index=index
    )


def sample_fields(model: SchellModel, config: EnsembleConfig) -> list[FieldRealization]:
    """The whole ensemble as a list (coefficients only; grids are synthesized on demand)."""
    _check_cutoff(model, config)
    sigma = _mode_amplitudes(model, config)
    c = derive_kernel_params(model).c
    coeff = _coefficient_block(sigma, config, 0, config.realizations)
    return [
        FieldRealization(coefficients=coeff[i], c=c, grid=config.grid, index=i)
        for i in range(config.realizations)
    ]


def _blocks(total: int, block_size: int) -> list[tuple[int, int]]:
    return [(s, min(s + block_size, total)) for s in range(0, total, block_size)]


def map_realizations(
    model: SchellModel,
    config: EnsembleConfig,
    func: Callable[[np.ndarray], np.ndarray],
    threads: int = 1,
    block_size: int = 512,
) -> np.ndarray:
    """Apply ``func`` to blocks of modal coefficients, concatenated in realization order.

    ``func`` receives a coefficient block with leading realization axis and
    must return an array with the same leading length.  The block layout is
    fixed by ``block_size`` alone, so the result is independent of ``threads``.
    """
    _check_cutoff(model, config)
    sigma = _mode_amplitudes(model, config)
    spans = _blocks(config.realizations, block_size)

    def run(span):
        start, stop = span
        return func(_coefficient_block(sigma, config, start, stop))

    if threads <= 1:
        parts = [run(span) for span in spans]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, spans))
    return np.concatenate(parts, axis=0)


def accumulate_realizations(
    model: SchellModel,
    config: EnsembleConfig,
    func: Callable[[np.ndarray], np.ndarray],
    threads: int = 1,
    block_size: int = 512,
) -> np.ndarray:
    """Sum ``func(block)`` over all coefficient blocks, reduced in fixed block order."""
    _check_cutoff(model, config)
    sigma = _mode_amplitudes(model, config)
    spans = _blocks(config.realizations, block_size)

    def run(span):
        start, stop = span
        return func(_coefficient_block(sigma, config, start, stop))

    if threads <= 1:
        parts = (run(span) for span in spans)
    else:
        pool = ThreadPoolExecutor(max_workers=threads)
        parts = pool.map(run, spans)
    total = None
    for part in parts:
        total = part if total is None else total + part
    if threads > 1:
        pool.shutdown()
    return total


def _coefficient_matrix(ensemble: Iterable[FieldRealization]) -> tuple[np.ndarray, float]:
    fields = list(ensemble)
    if not fields:
        raise InsufficientSamplesError("empty ensemble")
    return np.stack([f.coefficients for f in fields]), fields[0].c


def _values_at(coeff: np.ndarray, c: float, x: float) -> np.ndarray:
    phi = hg_mode_table(c, coeff.shape[1] - 1, x)[:, 0]
    if coeff.ndim == 2:
        return coeff @ phi
    raise ValueError("point estimators support 1D ensembles only")


@dataclass(frozen=True)
class G1Estimate:
    value: complex
    stderr: float
    samples: int


def _jackknife_se_of_mean(z: np.ndarray) -> float:
    # Delete-one jackknife of the sample mean; identical to the usual
    # standard error but kept in jackknife form for consistency with the
    # ratio estimators elsewhere.
    n = len(z)
    centered = np.abs(z - z.mean()) ** 2
    return math.sqrt(centered.sum() / (n * (n - 1)))


def estimate_g1(ensemble: Iterable[FieldRealization], x1: float, x2: float) -> G1Estimate:
    """Sample estimate of ``<E*(x1) E(x2)>`` with jackknife standard error."""
    coeff, c = _coefficient_matrix(ensemble)
    if len(coeff) < 2:
        raise InsufficientSamplesError("estimate_g1 needs at least 2 realizations")
    z = np.conj(_values_at(coeff, c, x1)) * _values_at(coeff, c, x2)
    return G1Estimate(value=complex(z.mean()), stderr=_jackknife_se_of_mean(z), samples=len(z))


@dataclass(frozen=True)
class SiegertReport:
    """Two independent estimates of G2 and their discrepancy in standard errors."""

    direct: float
    reconstructed: float
    stderr: float
    discrepancy_sigmas: float
    consistent: bool


def verify_siegert(
    ensemble: Iterable[FieldRealization],
    x1: float,
    x2: float,
    sigma_threshold: float = 5.0,
) -> SiegertReport:
    """Check ``<I1 I2> = <I1><I2> + |G1|^2`` on one ensemble.

    The left side is estimated directly, the right side from the same
    realizations; their difference is jackknifed to express the discrepancy
    in standard errors.
    """
    coeff, c = _coefficient_matrix(ensemble)
    n = len(coeff)
    if n < 100:
        raise InsufficientSamplesError("verify_siegert needs at least 100 realizations")
    e1 = _values_at(coeff, c, x1)
    e2 = _values_at(coeff, c, x2)
    i1 = np.abs(e1) ** 2
    i2 = np.abs(e2) ** 2
    z = np.conj(e1) * e2

    direct = float((i1 * i2).mean())
    reconstructed = float(i1.mean() * i2.mean() + abs(z.mean()) ** 2)

    sp, s1, s2, sz = (i1 * i2).sum(), i1.sum(), i2.sum(), z.sum()
    m = n - 1
    lhs_i = (sp - i1 * i2) / m
    rhs_i = ((s1 - i1) / m) * ((s2 - i2) / m) + np.abs((sz - z) / m) ** 2
    d = lhs_i - rhs_i
    stderr = math.sqrt((m / n) * float(((d - d.mean()) ** 2).sum()))

    difference = direct - reconstructed
    if stderr > 0:
        sigmas = abs(difference) / stderr
    else:
        sigmas = 0.0 if difference == 0 else math.inf
    return SiegertReport(
        direct=direct,
        reconstructed=reconstructed,
        stderr=stderr,
        discrepancy_sigmas=sigmas,
        consistent=sigmas < sigma_threshold,
    )


def dump_ensemble(
    path: str | Path,
    model: SchellModel,
    config: EnsembleConfig,
    dtype: str = "complex128",
    threads: int = 1,
) -> dict:
    """Write grid-sampled fields to ``<path>.bin`` with a JSON sidecar at ``<path>.json``.

    Returns the sidecar dictionary (which includes a digest of the binary file).
    """
    if dtype not in ("complex64", "complex128"):
        raise ValueError("dtype must be complex64 or complex128")
    path = Path(path)
    x = config.grid.coordinates()
    c = derive_kernel_params(model).c
    table = hg_mode_table(c, config.mode_cutoff - 1, x)

    def to_grids(block: np.ndarray) -> np.ndarray:
        if config.dimensions == 1:
            return block @ table
        return np.einsum("rmn,mi,nj->rij", block, table, table)

    grids = map_realizations(model, config, to_grids, threads=threads).astype(dtype)
    binary = path.with_suffix(".bin")
    binary.write_bytes(grids.tobytes())
    sidecar = {
        "format_version": ENSEMBLE_FORMAT_VERSION,
        "model": {
            "sigma_I": model.sigma_I,
            "sigma_mu": model.sigma_mu,
            "wavelength": model.wavelength,
            "amplitude": model.amplitude,
        },
        "grid": {"half_width": config.grid.half_width, "points": config.grid.points},
        "seed": config.seed,
        "mode_cutoff": config.mode_cutoff,
        "dimensions": config.dimensions,
        "realizations": config.realizations,
        "dtype": dtype,
        "shape": list(grids.shape),
        "sha256": hashlib.sha256(grids.tobytes()).hexdigest(),
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return sidecar


def load_ensemble(path: str | Path) -> tuple[np.ndarray, dict]:
    """Read back a dumped ensemble; returns (grids, sidecar)."""
    path = Path(path)
    sidecar = json.loads(path.with_suffix(".json").read_text())
    if sidecar.get("format_version") != ENSEMBLE_FORMAT_VERSION:
        raise ValueError(f"unsupported ensemble format: {sidecar.get('format_version')!r}")
    raw = path.with_suffix(".bin").read_bytes()
    if hashlib.sha256(raw).hexdigest() != sidecar["sha256"]:
        raise ValueError("ensemble binary does not match its sidecar digest")
    grids = np.frombuffer(raw, dtype=sidecar["dtype"]).reshape(sidecar["shape"])
    return grids, sidecar
