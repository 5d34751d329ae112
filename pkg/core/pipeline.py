"""
Experiment orchestration behind the ``forward``, ``invert``, ``verify`` and ``sweep`` commands.

Every command takes a validated ``ExperimentConfig``, fans the per-frequency
work out to a thread pool, gathers the results in k order and only then
writes its files, so the output depends on the configuration and seed alone.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urlparse

import numpy as np

from core.exceptions import ConfigError, DataSourceError
from core.forward import (
    ConductivityProfile,
    DataG,
    ProfileFactory,
    add_noise,
    solve_forward_family,
    data_from_solution,
    synth_data,
)
from core.functional import FunctionalParams, fit_convexity_constants, run_verification
from core.grid import Grid1D, KGrid, make_grid, make_k_grid
from core.ingestion import DATA_COLUMNS, DataSource, FileDataSource, S3DataSource
from core.optimizer import DescentConfig, DescentHistory, minimize, probe_step_size
from core.reconstruction import ErrorReport, InversionResult, assemble_result, below_one, error_metrics
from core.results import write_json, write_table
from core.transform import (
    FieldPair,
    LiftPair,
    boundary_from_data,
    build_lift,
    compare_boundary_modes,
    exact_chain,
    lift_distance,
)
from core.validation import ExperimentConfig
from core.workers import parallel_map, resolve_workers

logger = logging.getLogger(__name__)

PACKAGE_VERSION = "0.1.0"
PROBE_GAMMA = 0.25


class DataSourceFactory:
    """Factory for creating the appropriate data source based on its location."""

    @staticmethod
    def create_data_source(source: str, **kwargs) -> DataSource:
        """
        Create appropriate data source based on *source*.

        Args:
            source: Path of a data table, or an ``s3://bucket/key`` location
            **kwargs: ``endpoint_url`` for S3, ``encoding`` for files

        Returns:
            Appropriate data source instance

        Raises:
            DataSourceError: If source type cannot be determined
        """
        if urlparse(source).scheme == "s3":
            return S3DataSource(endpoint_url=kwargs.get("endpoint_url"))
        if os.path.isfile(source) or source.endswith((".tsv", ".txt")):
            return FileDataSource(encoding=kwargs.get("encoding", "utf-8"))
        raise DataSourceError(f"Cannot determine data source for source: {source}")


@dataclass(frozen=True)
class Setup:
    grid: Grid1D
    k_grid: KGrid
    profile: ConductivityProfile


def build_setup(config: ExperimentConfig) -> Setup:
    grid = make_grid(config.z_max, config.n_nodes)
    kg = make_k_grid(config.k_min, config.k_max, config.n_k)
    profile = ProfileFactory.create_profile(config.profile, grid, **config.profile_params())
    return Setup(grid=grid, k_grid=kg, profile=profile)


def load_data(config: ExperimentConfig) -> DataG:
    source = DataSourceFactory.create_data_source(
        config.data_source, endpoint_url=config.s3_endpoint_url
    )
    return source.read(config.data_source)


def reference_pairs(
    profile: ConductivityProfile, kg: KGrid, epsilon: float, max_workers: int | None = None
) -> list[FieldPair]:
    """True pairs per frequency with q from the sensitivity solve."""
    return parallel_map(lambda k: exact_chain(profile, float(k), epsilon)[0], kg.values, max_workers)


def reference_lifts(data: DataG, grid: Grid1D, epsilon: float, mode: str) -> list[LiftPair]:
    return [
        build_lift(boundary_from_data(data, float(k), epsilon, mode), grid) for k in data.k_grid.values
    ]


def descent_config(config: ExperimentConfig, k: float, gamma: float) -> DescentConfig:
    return DescentConfig(
        gamma=gamma,
        max_iters=config.max_iters,
        grad_tol=config.grad_tol,
        R=config.R,
        lam=config.lam,
        epsilon=config.epsilon,
        k=k,
        representation=config.representation,
        snapshot_every=config.snapshot_every,
    )


def invert_data(
    data: DataG,
    grid: Grid1D,
    config: ExperimentConfig,
    references: list[FieldPair] | None = None,
    max_workers: int | None = None,
) -> tuple[InversionResult, list[LiftPair]]:
    """Minimize the weighted functional for every frequency and assemble sigma.

    Args:
        data: Measured (or synthetic) boundary data
        grid: Depth grid of the unknown fields
        config: Single-point configuration
        references: Optional true pairs, one per frequency, for error tracking
        max_workers: Threads used across frequencies

    Returns:
        The inversion result and the boundary lift of each frequency
    """
    kg = data.k_grid
    epsilon = config.epsilon

    def solve(i: int) -> tuple[FieldPair, DescentHistory, LiftPair]:
        k = float(kg.values[i])
        compare_boundary_modes(data, k, epsilon)
        lift = build_lift(boundary_from_data(data, k, epsilon, config.boundary_mode), grid)
        start = lift.as_pair(k, epsilon)
        if config.gamma == "auto":
            gamma = probe_step_size(start, descent_config(config, k, PROBE_GAMMA), lift, initial=PROBE_GAMMA)
        else:
            gamma = float(config.gamma)
        reference = references[i] if references is not None else None
        fp, history = minimize(start, descent_config(config, k, gamma), lift, reference)
        return fp, history, lift

    outcomes = parallel_map(solve, range(kg.n_k), max_workers)
    minimizers = [fp for fp, _, _ in outcomes]
    histories = [history for _, history, _ in outcomes]
    lifts = [lift for _, _, lift in outcomes]
    params = [FunctionalParams(lam=config.lam, epsilon=epsilon, k=float(k), R=config.R) for k in kg.values]
    result = assemble_result(minimizers, histories, kg, params, data.noise_level)
    return result, lifts


def _out_dir(config: ExperimentConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_manifest(out: Path, command: str, config: ExperimentConfig, outputs: list[Path]) -> Path:
    return write_json(out / "manifest.json", {
        "command": command,
        "version": PACKAGE_VERSION,
        "config": config.to_dict(),
        "outputs": sorted(p.name for p in outputs),
    })


def data_table(data: DataG) -> np.ndarray:
    return np.column_stack([
        data.k_grid.values, data.g_values, data.g_prime, data.v0_values, data.v0_prime,
    ])


def run_forward(config: ExperimentConfig) -> list[Path]:
    """Synthesize boundary data and the chain fields per frequency."""
    setup = build_setup(config)
    workers = resolve_workers(config.threads)
    out = _out_dir(config)
    epsilon = config.epsilon

    solution = solve_forward_family(setup.profile, setup.k_grid, workers)
    data = data_from_solution(solution)
    chains = parallel_map(lambda k: exact_chain(setup.profile, float(k), epsilon), setup.k_grid.values, workers)

    outputs = [
        write_table(out / "profile.tsv", ["z", "sigma"],
                    np.column_stack([setup.grid.nodes, setup.profile.values.values])),
        write_table(out / "data.tsv", DATA_COLUMNS, data_table(data)),
    ]
    for i, (fwd, (fp, p)) in enumerate(zip(solution.slices, chains)):
        rows = np.column_stack([
            setup.grid.nodes, fwd.v_scattered.values, fwd.v_total.values,
            fwd.w.values, p.values, fp.q.values, fp.r.values,
        ])
        outputs.append(write_table(
            out / f"chain_k{i}.tsv", ["z", "v_scattered", "v_total", "w", "p", "q", "r"], rows
        ))
    outputs.append(write_manifest(out, "forward", config, outputs))
    return outputs


@dataclass
class InversionRun:
    result: InversionResult
    report: ErrorReport | None
    truth: ConductivityProfile | None


def invert_config(config: ExperimentConfig, max_workers: int | None = None) -> InversionRun:
    """Data (loaded or synthetic, with noise), inversion and errors for one configuration point."""
    setup = build_setup(config)
    epsilon = config.epsilon
    truth = None if config.data_source else setup.profile
    if config.data_source:
        clean = load_data(config)
        if clean.k_grid != setup.k_grid:
            raise ConfigError(f"data k-grid {clean.k_grid} does not match the configured {setup.k_grid}")
    else:
        clean = synth_data(setup.profile, setup.k_grid, max_workers)
    data = add_noise(clean, config.delta, config.seed)

    references = None
    if truth is not None:
        references = reference_pairs(truth, setup.k_grid, epsilon, max_workers)
    result, lifts = invert_data(data, setup.grid, config, references, max_workers)

    report = None
    if truth is not None:
        report = error_metrics(
            result, truth, [fp.q for fp in references], [fp.r for fp in references]
        )
        clean_lifts = reference_lifts(clean, setup.grid, epsilon, config.boundary_mode)
        report.lift_distances = [lift_distance(a, b) for a, b in zip(lifts, clean_lifts)]
    return InversionRun(result=result, report=report, truth=truth)


def run_invert(config: ExperimentConfig) -> list[Path]:
    """Invert the configured data and write sigma, per-k sigma, convergence and errors."""
    workers = resolve_workers(config.threads)
    out = _out_dir(config)
    run = invert_config(config, workers)
    result = run.result
    z = result.sigma_comp.grid.nodes
    sigma_true = run.truth.values.values if run.truth is not None else np.full(len(z), np.nan)

    outputs = [
        write_table(out / "sigma.tsv", ["z", "sigma_comp", "sigma_true", "spread", "below_one"],
                    np.column_stack([z, result.sigma_comp.values, sigma_true,
                                     result.spread.values, below_one(result.sigma_comp)])),
        write_table(out / "sigma_per_k.tsv", ["z"] + [f"sigma_k{i}" for i in range(result.k_grid.n_k)],
                    np.column_stack([z] + [s.values for s in result.sigma_per_k])),
        write_table(out / "convergence.tsv", ["k", "iteration", "J", "grad_norm", "error", "projected"],
                    np.vstack([h.table(fp.k) for h, fp in zip(result.histories, result.minimizers)])),
    ]
    if run.report is not None:
        outputs.append(write_json(out / "errors.json", run.report.to_dict()))
    outputs.append(write_manifest(out, "invert", config, outputs))
    return outputs


def run_verify(config: ExperimentConfig) -> list[Path]:
    """Carleman, convexity and gradient checks at the middle frequency of the grid."""
    setup = build_setup(config)
    workers = resolve_workers(config.threads)
    out = _out_dir(config)
    data = synth_data(setup.profile, setup.k_grid, workers)
    k = float(setup.k_grid.values[setup.k_grid.n_k // 2])
    lift = build_lift(boundary_from_data(data, k, config.epsilon, config.boundary_mode), setup.grid)

    report = run_verification(
        lift, k, config.epsilon, config.R,
        lambdas=config.verify_lambdas,
        carleman_lambdas=config.carleman_lambdas,
        samples=config.verify_samples,
        seed=config.seed,
        max_workers=workers,
    )
    outputs = [
        write_json(out / "verify_report.json", {**report.to_dict(), "k": k}),
        write_table(out / "carleman.tsv", ["lambda", "sample", "lhs", "d2_term", "lower_term", "ratio"],
                    report.carleman_table),
        write_table(out / "convexity.tsv",
                    ["lambda", "sample", "gap", "scaled_distance", "carleman_distance"],
                    report.convexity_table),
        write_table(out / "gradient_check.tsv",
                    ["point", "direction", "analytic", "finite_difference", "relative_error"],
                    report.gradient_table),
    ]
    outputs.append(write_manifest(out, "verify", config, outputs))
    return outputs


SWEEP_COLUMNS = [
    "epsilon", "lambda", "delta", "sigma_l2_error", "sigma_rel_error",
    "max_pair_error", "mean_iterations", "convexity_positive",
]


def run_sweep(config: ExperimentConfig) -> list[Path]:
    """One inversion per combination of the list-valued keys, plus a convexity count per point."""
    if not config.swept:
        raise ConfigError("sweep needs at least one list-valued key among epsilon, lambda, delta")
    workers = resolve_workers(config.threads)
    out = _out_dir(config)
    setup = build_setup(config)
    clean = load_data(config) if config.data_source else synth_data(setup.profile, setup.k_grid, workers)
    k = float(setup.k_grid.values[setup.k_grid.n_k // 2])

    rows = []
    all_positive: dict[float, bool] = {}
    for point in config.sweep_points():
        logger.info("sweep point epsilon=%g lambda=%g delta=%g", point.epsilon, point.lam, point.delta)
        run = invert_config(point, workers)
        lift = build_lift(boundary_from_data(clean, k, point.epsilon, point.boundary_mode), setup.grid)
        fits, _ = fit_convexity_constants(
            lift, k, point.epsilon, point.R, [point.lam], point.verify_samples, point.seed, workers
        )
        all_positive[point.lam] = all_positive.get(point.lam, True) and fits[0].all_positive
        report = run.report
        rows.append((
            point.epsilon, point.lam, point.delta,
            report.sigma_l2_error if report else np.nan,
            report.sigma_rel_error if report else np.nan,
            max(report.pair_errors) if report else np.nan,
            float(np.mean([h.n_iters for h in run.result.histories])),
            fits[0].n_positive,
        ))

    lambda1 = min((lam for lam, ok in all_positive.items() if ok), default=None)
    logger.info("sweep finished points=%d empirical_lambda1=%s", len(rows), lambda1)
    outputs = [
        write_table(out / "sweep.tsv", SWEEP_COLUMNS, np.array(rows)),
        write_json(out / "sweep_summary.json", {
            "swept": list(config.swept), "points": len(rows), "empirical_lambda1": lambda1,
        }),
    ]
    outputs.append(write_manifest(out, "sweep", config, outputs))
    return outputs


COMMANDS = {
    "forward": run_forward,
    "invert": run_invert,
    "verify": run_verify,
    "sweep": run_sweep,
}
