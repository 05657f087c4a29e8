"""Command-line entry point: spectrum | hbt | scan | report.

Each run validates its configuration, computes everything in memory, then
publishes all output files together with a manifest carrying the resolved
configuration and content digests.  Numbers are serialized with 17
significant digits so reruns with the same seed are byte-identical,
whatever the thread count.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .gsm import ModeIndex, ModeSpectrum, derive_kernel_params
from .hbt import (
    GaussianBucket,
    IdealProjector,
    g2_ideal,
    g2_matrix_monte_carlo,
    g2_scan,
)
from .metrics import ComparisonReport, fidelity
from .nystrom import compare_to_analytic, discretize_kernel, eigendecompose

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

MANIFEST_NAME = "run_manifest.json"
LOCK_NAME = ".lock"


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


class OutputCollector:
    """Buffers every output file and publishes them with a manifest at the end."""

    def __init__(self, directory: Path, snapshot: dict, seed: int, command: str):
        self.directory = directory
        self.snapshot = snapshot
        self.seed = seed
        self.command = command
        self._files: list[tuple[str, bytes]] = []

    def add_csv(self, name: str, header: list[str], rows) -> None:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row))
        self._files.append((name, ("\n".join(lines) + "\n").encode("utf-8")))

    def add_json(self, name: str, payload) -> None:
        self._files.append((name, (json.dumps(payload, indent=2) + "\n").encode("utf-8")))

    def publish(self) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        entries = []
        for name, blob in self._files:
            path = self.directory / name
            _atomic_write_bytes(path, blob)
            entries.append({"path": name, "sha256": hashlib.sha256(blob).hexdigest()})
        manifest = {
            "tool": "thermal-modes",
            "version": __version__,
            "command": self.command,
            "seed": self.seed,
            "config": self.snapshot,
            "outputs": entries,
        }
        manifest_path = self.directory / MANIFEST_NAME
        _atomic_write_bytes(manifest_path, (json.dumps(manifest, indent=2) + "\n").encode("utf-8"))
        return manifest_path


def _atomic_write_bytes(path: Path, blob: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(blob)
    os.replace(tmp, path)


class OutputLock:
    """One run per output directory, enforced with an exclusive lock file."""

    def __init__(self, directory: Path):
        self.path = directory / LOCK_NAME
        directory.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise RuntimeError(
                f"output directory {directory} is locked by another run "
                f"(remove {self.path} if that run is dead)"
            ) from None
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)

    def release(self) -> None:
        self.path.unlink(missing_ok=True)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_spectrum(cfg: RunConfig, out: OutputCollector, threads: int, formats: tuple[str, ...]) -> None:
    spectrum = ModeSpectrum.from_model(cfg.model, cfg.spectrum.max_order, "relative")
    rows = [(idx.m, idx.n, spectrum[idx]) for idx in spectrum.indices()]
    if "csv" in formats:
        out.add_csv("spectrum.csv", ["m", "n", "lambda_rel"], rows)
    if "json" in formats:
        out.add_json(
            "spectrum.json",
            {"normalization": "relative", "entries": [{"m": m, "n": n, "value": v} for m, n, v in rows]},
        )
    if cfg.spectrum.numerical:
        kernel = discretize_kernel(cfg.model, cfg.grid)
        numerical = eigendecompose(kernel, cfg.grid, cfg.spectrum.numerical_modes)
        report = compare_to_analytic(numerical, cfg.model, cfg.spectrum.numerical_modes)
        from .gsm import eigenvalue

        check_rows = [
            (
                k,
                eigenvalue(cfg.model, k),
                numerical.eigenvalues[k],
                report.eigenvalue_rel_error[k],
                report.mode_l2_error[k],
            )
            for k in range(cfg.spectrum.numerical_modes)
        ]
        out.add_csv(
            "numerical_check.csv",
            ["mode", "analytic", "numerical", "rel_error", "l2_error"],
            check_rows,
        )


def _default_filters(cfg: RunConfig) -> list:
    if cfg.filters:
        return list(cfg.filters)
    return [
        IdealProjector(ModeIndex(m, n))
        for m in range(cfg.hbt_max_order + 1)
        for n in range(cfg.hbt_max_order + 1 - m)
    ]


def cmd_hbt(cfg: RunConfig, out: OutputCollector, threads: int, formats: tuple[str, ...]) -> None:
    filters = _default_filters(cfg)
    matrix = g2_matrix_monte_carlo(cfg.model, cfg.ensemble, filters, threads=threads)
    rows = [
        (str(i), str(j), filters[i].label(), filters[j].label(),
         matrix.value(i, j), matrix.stderr(i, j))
        for i in range(len(filters))
        for j in range(len(filters))
    ]
    if "csv" in formats:
        out.add_csv("g2_matrix.csv", ["i", "j", "filter1", "filter2", "g2", "stderr"], rows)
    if "json" in formats:
        out.add_json(
            "g2_matrix.json",
            {
                "filters": [f.label() for f in filters],
                "realizations": cfg.ensemble.realizations,
                "entries": [
                    {"i": int(i), "j": int(j), "g2": float(g), "stderr": float(s)}
                    for i, j, _, _, g, s in rows
                ],
            },
        )


def cmd_scan(cfg: RunConfig, out: OutputCollector, threads: int, formats: tuple[str, ...]) -> None:
    c = derive_kernel_params(cfg.model).c
    scale = 1.0 / math.sqrt(2.0 * c)
    opts = cfg.scan
    displacements = np.linspace(
        -opts.max_displacement_scaled * scale, opts.max_displacement_scaled * scale, opts.samples
    )
    c_det = None if opts.c_det_factor == 1.0 else opts.c_det_factor * c
    analytic = g2_scan(cfg.model, opts.mask_order, displacements, c_det=c_det)

    mc_values: list = [""] * len(displacements)
    mc_errors: list = [""] * len(displacements)
    if opts.monte_carlo:
        ensemble = dataclasses.replace(cfg.ensemble, dimensions=1)
        projector = IdealProjector(ModeIndex(opts.mask_order, 0))
        buckets = [GaussianBucket(displacement=(d, 0.0), c_det=c_det) for d in displacements]
        matrix = g2_matrix_monte_carlo(cfg.model, ensemble, [projector], buckets, threads=threads)
        mc_values = [matrix.value(0, j) for j in range(len(buckets))]
        mc_errors = [matrix.stderr(0, j) for j in range(len(buckets))]

    rows = [
        (displacements[i], analytic[i], mc_values[i], mc_errors[i])
        for i in range(len(displacements))
    ]
    if "csv" in formats:
        out.add_csv("scan.csv", ["r_f", "g2_analytic", "g2_mc", "stderr"], rows)
    if "json" in formats:
        out.add_json(
            "scan.json",
            {
                "mask_order": opts.mask_order,
                "points": [
                    {
                        "r_f": float(d),
                        "g2_analytic": float(a),
                        "g2_mc": None if v == "" else float(v),
                        "stderr": None if e == "" else float(e),
                    }
                    for d, a, v, e in rows
                ],
            },
        )


def _read_csv_rows(path: Path, columns: int) -> list[list[float]]:
    rows = []
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != columns:
            raise ConfigError(f"{path}:{lineno}: expected {columns} columns, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: non-numeric value in {line!r}") from None
    return rows


def cmd_report(
    cfg: RunConfig,
    out: OutputCollector,
    spectrum_path: Path,
    g2_path: Path | None,
    formats: tuple[str, ...],
) -> None:
    c = derive_kernel_params(cfg.model).c
    measured = {}
    for m, n, value in _read_csv_rows(spectrum_path, 3):
        measured[ModeIndex(int(m), int(n))] = value
    exp = ModeSpectrum(c=c, eigenvalues=measured, normalization="raw")
    max_total = max(idx.order for idx in measured)
    theory = ModeSpectrum.from_model(cfg.model, max_total, "relative")

    fid_rows = []
    for total in range(max_total + 1):
        m_max, n_max = (total + 1) // 2, total // 2
        if all(ModeIndex(m, n) in measured for m in range(m_max + 1) for n in range(n_max + 1)):
            fid_rows.append((total, fidelity(exp, theory, m_max, n_max)))
    if "csv" in formats:
        out.add_csv("report_fidelity.csv", ["max_total_order", "fidelity"], fid_rows)

    dist_rows = []
    if g2_path is not None:
        pairs = [
            (ModeIndex(int(r[0]), int(r[1])), ModeIndex(int(r[2]), int(r[3])), r[4])
            for r in _read_csv_rows(g2_path, 6)
        ]
        max_pair_order = max(max(i1.order, i2.order) for i1, i2, _ in pairs)
        for total in range(max_pair_order + 1):
            selected = [
                (value - g2_ideal(i1, i2)) ** 2
                for i1, i2, value in pairs
                if max(i1.order, i2.order) <= total
            ]
            dist_rows.append((total, math.sqrt(sum(selected))))
        if "csv" in formats:
            out.add_csv("report_distance.csv", ["max_total_order", "distance"], dist_rows)

    report = ComparisonReport(
        fidelity=fid_rows[-1][1] if fid_rows else 1.0,
        distance=dist_rows[-1][1] if dist_rows else 0.0,
        max_order=(max_total, max_total),
        fidelity_by_order=tuple(fid_rows),
        distance_by_order=tuple(dist_rows),
    )
    if "json" in formats:
        out.add_json("report.json", report.to_dict())


# ---------------------------------------------------------------------------
# Argument parsing and dispatch


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermal-modes",
        description="Coherent-mode decomposition and mode-filtered HBT simulation "
        "for Gaussian Schell-model light",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("spectrum", "analytic eigenvalue table, optionally cross-checked numerically"),
        ("hbt", "Monte Carlo g2 matrix over configured filter pairs"),
        ("scan", "g2 versus fiber displacement for one mask order"),
        ("report", "fidelity and distance of measured files against theory"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, type=Path, help="TOML run configuration")
        cmd.add_argument("--seed", type=int, default=None, help="override ensemble seed")
        cmd.add_argument("--out", type=Path, default=None, help="override output directory")
        cmd.add_argument("--threads", type=int, default=1, help="worker threads (speed only)")
        cmd.add_argument(
            "--format", choices=("csv", "json", "both"), default=None, help="output formats"
        )
        if name == "report":
            cmd.add_argument("--spectrum", required=True, type=Path, help="measured spectrum CSV")
            cmd.add_argument("--g2", type=Path, default=None, help="measured g2 matrix CSV")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, out_dir=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.format is None:
        formats = cfg.output.formats
    elif args.format == "both":
        formats = ("csv", "json")
    else:
        formats = (args.format,)

    out = OutputCollector(
        directory=cfg.output.directory,
        snapshot=cfg.snapshot,
        seed=cfg.ensemble.seed,
        command=args.command,
    )
    try:
        lock = OutputLock(cfg.output.directory)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        if args.command == "spectrum":
            cmd_spectrum(cfg, out, args.threads, formats)
        elif args.command == "hbt":
            cmd_hbt(cfg, out, args.threads, formats)
        elif args.command == "scan":
            cmd_scan(cfg, out, args.threads, formats)
        else:
            cmd_report(cfg, out, args.spectrum, args.g2, formats)
        out.publish()
    except ConfigError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        lock.release()
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
