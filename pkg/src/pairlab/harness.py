"""Declarative experiment runner with seeded, scheduling-independent output.

A config (JSON file) picks a mode, a degree specification, a replicate count
and a seed; ``run`` executes the replicates (optionally on a process pool),
writes a records CSV plus a summary JSON, and returns pass/fail verdicts with
the tolerances that produced them.  Replicate streams come from
``substream(seed, cell_index, replicate_index)``, so artifacts are
byte-identical at any worker count.  Wall-clock times are logged and kept on
the in-memory summary only, never written to the deterministic artifacts.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
from scipy import stats

from . import __version__
from .degree_model import (
    DegreeSequence,
    build_subpower_sequence,
    empirical_distribution,
    molloy_reed_sum,
    nu,
    read_degree_file,
    validate_subpower,
)
from .diagnostics import poisson_limit_check, trajectory_deviation
from .exploration import explore_component
from .pairing import (
    PointSpace,
    count_loops,
    count_parallel_pairs,
    double_factorial_odd,
    enumerate_pairings,
    predicted_simple_probability,
    project_components,
    sample_pairing,
)
from .rng import substream

log = logging.getLogger(__name__)

MODES = ("poisson_check", "scaling", "trajectory", "oracle_validation")

DEFAULT_TOLERANCES: dict[str, Any] = {
    "sigma": 3.0,
    "enumeration_cap": 6,
    "max_attempts": 1000,
    "abs_tol_loops": 0.03,
    "abs_tol_parallel": 0.04,
    "abs_tol_simple": 0.01,
    "chi2_alpha": 1e-3,
    "trajectory_threshold": 0.01,
    "trajectory_j_max": 5,
    "scaling_factor": 3.0,
    "max_degree_ratio_low": 0.5,
    "max_degree_ratio_high": 1.5,
}


class ConfigError(ValueError):
    """Malformed experiment config; the message names the offending field."""


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    replicates: int
    seed: int
    workers: int
    output_dir: str
    degrees: dict[str, Any] | None
    grid: dict[str, Any] | None
    tolerances: dict[str, Any]
    raw: dict[str, Any] = field(repr=False, default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config root must be an object")
        mode = data.get("mode")
        if mode not in MODES:
            raise ConfigError(f"mode: expected one of {MODES}, got {mode!r}")
        replicates = data.get("replicates", 1)
        if not isinstance(replicates, int) or replicates < 1:
            raise ConfigError("replicates: must be a positive integer")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigError("seed: must be a 64-bit unsigned integer")
        workers = data.get("workers", 1)
        if not isinstance(workers, int) or workers < 1:
            raise ConfigError("workers: must be a positive integer")
        output_dir = data.get("output_dir", "out")
        degrees = data.get("degrees")
        grid = data.get("grid")
        if mode == "scaling":
            if not isinstance(grid, dict):
                raise ConfigError("grid: required for scaling mode")
            for key in ("gammas", "sizes"):
                if not isinstance(grid.get(key), list) or not grid[key]:
                    raise ConfigError(f"grid.{key}: non-empty list required")
        else:
            if not isinstance(degrees, dict) or "kind" not in degrees:
                raise ConfigError("degrees: object with 'kind' required")
        tolerances = dict(DEFAULT_TOLERANCES)
        extra = data.get("tolerances", {})
        if not isinstance(extra, dict):
            raise ConfigError("tolerances: must be an object")
        tolerances.update(extra)
        return cls(
            mode=mode,
            replicates=replicates,
            seed=seed,
            workers=workers,
            output_dir=output_dir,
            degrees=degrees,
            grid=grid,
            tolerances=tolerances,
            raw=data,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
        return cls.from_dict(data)

    def echo(self) -> dict[str, Any]:
        """Canonical form of the config, as written into the summary.

        Worker count and output directory are execution environment, not
        experiment identity, so they stay out of the echo and the hash.
        """
        return {
            "mode": self.mode,
            "replicates": self.replicates,
            "seed": self.seed,
            "degrees": self.degrees,
            "grid": self.grid,
            "tolerances": self.tolerances,
        }

    def hash(self) -> str:
        blob = json.dumps(self.echo(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def resolve_degrees(spec: dict[str, Any]) -> DegreeSequence:
    """Materialize a degree spec: explicit list, file, subpower, or regular."""
    kind = spec.get("kind")
    if kind == "file":
        return read_degree_file(spec["path"])
    if kind == "explicit":
        return DegreeSequence(tuple(int(d) for d in spec["degrees"]))
    if kind == "subpower":
        return build_subpower_sequence(
            int(spec["n"]),
            float(spec["gamma"]),
            float(spec.get("c", 1.0)),
            float(spec["target_nu"]),
        )
    if kind == "regular":
        n, d = int(spec["n"]), int(spec["d"])
        return DegreeSequence(tuple([d] * n))
    raise ConfigError(f"degrees.kind: unknown kind {kind!r}")


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    value: float
    target: float
    tolerance: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "value": self.value,
            "target": self.target,
            "tolerance": self.tolerance,
        }


@dataclass
class RunSummary:
    config: dict[str, Any]
    config_hash: str
    version: str
    cells: list[dict[str, Any]]
    verdicts: list[Verdict]
    wall_clock: dict[str, float]
    artifacts: list[str]

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def deterministic_dict(self) -> dict[str, Any]:
        """Everything except wall-clock, which varies run to run."""
        return {
            "config": self.config,
            "config_hash": self.config_hash,
            "version": self.version,
            "cells": self.cells,
            "verdicts": [v.as_dict() for v in self.verdicts],
            "passed": self.passed,
        }


# ---------------------------------------------------------------------------
# chunked replicate execution (deterministic at any worker count)

def _chunk_ranges(replicates: int, workers: int) -> list[tuple[int, int]]:
    chunks = max(1, min(replicates, workers * 4))
    size = math.ceil(replicates / chunks)
    return [(lo, min(lo + size, replicates)) for lo in range(0, replicates, size)]


def _run_chunked(
    worker: Callable[[tuple], list[tuple]],
    static: tuple,
    replicates: int,
    workers: int,
) -> list[tuple]:
    ranges = _chunk_ranges(replicates, workers)
    tasks = [static + rng for rng in ranges]
    if workers <= 1 or len(tasks) == 1:
        results = [worker(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(worker, tasks))
    return [row for chunk in results for row in chunk]


def _poisson_chunk(task: tuple) -> list[tuple]:
    degrees, seed, cell_index, lo, hi = task
    space = PointSpace.from_degree_sequence(DegreeSequence(degrees))
    rows = []
    for rep in range(lo, hi):
        rng = substream(seed, cell_index, rep)
        report = project_components(sample_pairing(space, rng))
        rows.append(
            (rep, report.loops, report.parallel_pairs,
             int(report.simple), report.largest)
        )
    return rows


def _scaling_chunk(task: tuple) -> list[tuple]:
    n, gamma, c, target_nu, seed, cell_index, lo, hi = task
    seq = build_subpower_sequence(n, gamma, c, target_nu)
    space = PointSpace.from_degree_sequence(seq)
    nu_actual = nu(empirical_distribution(seq))
    scale = n ** (1.0 / gamma) * math.log(n)
    rows = []
    for rep in range(lo, hi):
        rng = substream(seed, cell_index, rep)
        report = project_components(sample_pairing(space, rng))
        rows.append(
            (gamma, n, nu_actual, rep, report.largest, report.largest / scale)
        )
    return rows


def _trajectory_chunk(task: tuple) -> list[tuple]:
    degrees, seed, cell_index, root, j_max, lo, hi = task
    seq = DegreeSequence(degrees)
    dist = empirical_distribution(seq)
    track = [j for j in range(1, j_max + 1) if j in dist.counts]
    rows = []
    for rep in range(lo, hi):
        rng = substream(seed, cell_index, rep)
        trace = explore_component(seq, root, rng, record_trace=True)
        for j in track:
            rows.append((rep, j, trajectory_deviation(trace, dist, j)))
    return rows


def _oracle_chunk(task: tuple) -> list[tuple]:
    degrees, seed, cell_index, lo, hi = task
    space = PointSpace.from_degree_sequence(DegreeSequence(degrees))
    rows = []
    for rep in range(lo, hi):
        rng = substream(seed, cell_index, rep)
        rows.append((rep, sample_pairing(space, rng).key()))
    return rows


# ---------------------------------------------------------------------------
# mode implementations

def _run_poisson(config: ExperimentConfig) -> tuple[list, list[dict], list[Verdict]]:
    from .pairing import ComponentReport

    seq = resolve_degrees(config.degrees)
    nu_value = nu(empirical_distribution(seq))
    rows = _run_chunked(
        _poisson_chunk,
        (seq.degrees, config.seed, 0),
        config.replicates,
        config.workers,
    )
    reports = [
        ComponentReport(
            component_sizes=(), largest=r[4], loops=r[1],
            parallel_pairs=r[2], simple=bool(r[3]),
        )
        for r in rows
    ]
    check = poisson_limit_check(reports, nu_value, min_reports=1)
    tol = config.tolerances
    verdicts = [
        Verdict("mean_loops", abs(check.mean_loops - check.target_loops)
                <= tol["abs_tol_loops"], check.mean_loops,
                check.target_loops, tol["abs_tol_loops"]),
        Verdict("mean_parallel", abs(check.mean_parallel - check.target_parallel)
                <= tol["abs_tol_parallel"], check.mean_parallel,
                check.target_parallel, tol["abs_tol_parallel"]),
        Verdict("p_simple", abs(check.p_simple - check.target_simple)
                <= tol["abs_tol_simple"], check.p_simple,
                check.target_simple, tol["abs_tol_simple"]),
        Verdict("corr_z", abs(check.z_corr) <= tol["sigma"],
                check.z_corr, 0.0, tol["sigma"]),
    ]
    cell = {
        "nu": nu_value,
        "n": seq.n,
        "replicates": config.replicates,
        "mean_loops": check.mean_loops,
        "mean_parallel": check.mean_parallel,
        "p_simple": check.p_simple,
        "corr": check.corr,
    }
    header = ["replicate", "loops", "parallel_pairs", "simple", "largest"]
    return [header] + [list(r) for r in rows], [cell], verdicts


def _run_scaling(config: ExperimentConfig) -> tuple[list, list[dict], list[Verdict]]:
    grid = config.grid
    gammas = sorted(float(g) for g in grid["gammas"])
    sizes = sorted(int(n) for n in grid["sizes"])
    c = float(grid.get("c", 1.0))
    target_nu = float(grid.get("target_nu", 0.9))
    tol = config.tolerances
    cells_spec = [(g, n) for g in gammas for n in sizes]
    all_rows: list[tuple] = []
    cells: list[dict] = []
    verdicts: list[Verdict] = []
    cell_errors: list[str] = []
    for cell_index, (gamma, n) in enumerate(cells_spec):
        try:
            rows = _run_chunked(
                _scaling_chunk,
                (n, gamma, c, target_nu, config.seed, cell_index),
                config.replicates,
                config.workers,
            )
        except ValueError as exc:  # build failure: record, keep the grid going
            cell_errors.append(f"gamma={gamma} n={n}: {exc}")
            cells.append({"gamma": gamma, "n": n, "error": str(exc)})
            continue
        all_rows.extend(rows)
        normalized = np.array([r[5] for r in rows])
        seq = build_subpower_sequence(n, gamma, c, target_nu)
        ratio = seq.max_degree / n ** (1.0 / gamma)
        cells.append({
            "gamma": gamma,
            "n": n,
            "nu": rows[0][2],
            "max_degree_ratio": ratio,
            "q50": float(np.quantile(normalized, 0.5)),
            "q95": float(np.quantile(normalized, 0.95)),
            "q_max": float(normalized.max()),
        })
        mid = (tol["max_degree_ratio_low"] + tol["max_degree_ratio_high"]) / 2
        half = (tol["max_degree_ratio_high"] - tol["max_degree_ratio_low"]) / 2
        verdicts.append(Verdict(
            f"max_degree_ratio[gamma={gamma},n={n}]",
            tol["max_degree_ratio_low"] <= ratio <= tol["max_degree_ratio_high"],
            ratio, mid, half,
        ))
    for gamma in gammas:
        q95s = [c_["q95"] for c_ in cells
                if c_.get("gamma") == gamma and "q95" in c_]
        if len(q95s) >= 2:
            factor = max(q95s) / min(q95s)
            verdicts.append(Verdict(
                f"q95_factor[gamma={gamma}]",
                factor <= tol["scaling_factor"],
                factor, 1.0, tol["scaling_factor"],
            ))
    header = ["gamma", "n", "nu", "replicate", "largest", "normalized"]
    return [header] + [list(r) for r in all_rows], cells, verdicts


def _run_trajectory(config: ExperimentConfig) -> tuple[list, list[dict], list[Verdict]]:
    seq = resolve_degrees(config.degrees)
    dist = empirical_distribution(seq)
    tol = config.tolerances
    j_max = int(tol["trajectory_j_max"])
    root = int(np.argmax(seq.degrees))  # max-degree root stresses the path most
    rows = _run_chunked(
        _trajectory_chunk,
        (seq.degrees, config.seed, 0, root, j_max),
        config.replicates,
        config.workers,
    )
    cells = []
    verdicts = []
    for j in sorted({r[1] for r in rows}):
        devs = np.array([r[2] for r in rows if r[1] == j])
        med = float(np.median(devs))
        cells.append({
            "j": j,
            "median_deviation": med,
            "max_deviation": float(devs.max()),
        })
        verdicts.append(Verdict(
            f"median_deviation[j={j}]",
            med <= tol["trajectory_threshold"],
            med, 0.0, tol["trajectory_threshold"],
        ))
    header = ["replicate", "j", "deviation"]
    return [header] + [list(r) for r in rows], cells, verdicts


def _run_oracle(config: ExperimentConfig) -> tuple[list, list[dict], list[Verdict]]:
    seq = resolve_degrees(config.degrees)
    tol = config.tolerances
    cap = int(tol["enumeration_cap"])
    pairings = list(enumerate_pairings(seq, max_pairs=cap))
    keys = [p.key() for p in pairings]
    index = {k: i for i, k in enumerate(keys)}
    exact = {
        "count": len(pairings),
        "double_factorial": double_factorial_odd(seq.two_m // 2),
        "p_simple_exact": sum(
            1 for p in pairings
            if count_loops(p) == 0 and count_parallel_pairs(p) == 0
        ) / len(pairings),
    }
    rows = _run_chunked(
        _oracle_chunk,
        (seq.degrees, config.seed, 0),
        config.replicates,
        config.workers,
    )
    counts = np.zeros(len(pairings), dtype=np.int64)
    for _, key in rows:
        counts[index[key]] += 1
    chi2_stat, p_value = stats.chisquare(counts)
    expected = config.replicates / len(pairings)
    se = math.sqrt(expected * (1 - 1 / len(pairings)))
    max_z = float(np.max(np.abs(counts - expected)) / se)
    cells = [{
        "n_pairings": len(pairings),
        "chi2": float(chi2_stat),
        "p_value": float(p_value),
        "max_frequency_z": max_z,
        **exact,
    }]
    verdicts = [
        Verdict("pairing_count", len(pairings) == exact["double_factorial"],
                len(pairings), exact["double_factorial"], 0.0),
        Verdict("uniformity_chi2_p", p_value >= tol["chi2_alpha"],
                float(p_value), 1.0, tol["chi2_alpha"]),
        Verdict("max_frequency_z", max_z <= tol["sigma"],
                max_z, 0.0, tol["sigma"]),
    ]
    out_rows = [["pairing_index", "count", "expected"]]
    out_rows += [[i, int(counts[i]), expected] for i in range(len(pairings))]
    return out_rows, cells, verdicts


_MODE_RUNNERS = {
    "poisson_check": _run_poisson,
    "scaling": _run_scaling,
    "trajectory": _run_trajectory,
    "oracle_validation": _run_oracle,
}


def _write_csv(path: Path, rows: list[list]) -> None:
    def fmt(x):
        if isinstance(x, float):
            return repr(x)
        return x

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in rows:
            writer.writerow([fmt(x) for x in row])


def run(config: ExperimentConfig) -> RunSummary:
    """Execute the configured experiment and write records.csv + summary.json."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.monotonic()
    rows, cells, verdicts = _MODE_RUNNERS[config.mode](config)
    elapsed = time.monotonic() - t0
    log.info("mode=%s wall_clock=%.3fs", config.mode, elapsed)

    tag = f"{config.mode}_{config.hash()}_seed{config.seed}"
    csv_path = out / f"{tag}.csv"
    json_path = out / f"{tag}.json"
    _write_csv(csv_path, rows)
    summary = RunSummary(
        config=config.echo(),
        config_hash=config.hash(),
        version=__version__,
        cells=cells,
        verdicts=verdicts,
        wall_clock={config.mode: elapsed},
        artifacts=[str(csv_path), str(json_path)],
    )
    json_path.write_text(
        json.dumps(summary.deterministic_dict(), sort_keys=True, indent=2)
        + "\n"
    )
    return summary


def describe(config: ExperimentConfig) -> dict[str, Any]:
    """Dry-run report: scalar functionals and predictions, no sampling."""
    if config.mode == "scaling":
        grid = config.grid
        spec = {
            "kind": "subpower",
            "n": max(int(n) for n in grid["sizes"]),
            "gamma": min(float(g) for g in grid["gammas"]),
            "c": float(grid.get("c", 1.0)),
            "target_nu": float(grid.get("target_nu", 0.9)),
        }
    else:
        spec = config.degrees
    seq = resolve_degrees(spec)
    dist = empirical_distribution(seq)
    nu_value = nu(dist)
    p_simple = predicted_simple_probability(nu_value)
    report = {
        "n": seq.n,
        "two_m": seq.two_m,
        "d_bar": float(dist.d_bar),
        "max_degree": seq.max_degree,
        "nu": nu_value,
        "molloy_reed_sum": molloy_reed_sum(dist),
        "predicted_p_simple": p_simple,
        "predicted_attempts": math.inf if p_simple == 0 else 1.0 / p_simple,
        # mate + owner + pool + positions, 8 bytes each
        "memory_estimate_bytes": seq.two_m * 8 * 4,
    }
    if seq.gamma is not None:
        from .degree_model import degree_cap

        report["degree_cap"] = degree_cap(seq.n, seq.gamma, seq.c)
    return report


def validate_degree_file(
    path: str | Path, gamma: float | None = None, c: float | None = None
) -> dict[str, Any]:
    """Load a degree file, run invariants, and optionally the subpower check."""
    seq = read_degree_file(path)
    report: dict[str, Any] = {
        "n": seq.n,
        "two_m": seq.two_m,
        "max_degree": seq.max_degree,
        "valid": True,
    }
    if gamma is not None and c is not None:
        sub = validate_subpower(seq, gamma, c)
        report["subpower_valid"] = sub.valid
        report["valid"] = sub.valid
        report["cap"] = sub.cap
    return report
