"""Parameter sweeps: one fresh oracle, solve and evaluation per grid point and trial."""

import itertools
import math
import threading
import time
import traceback
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from fuzzyquery.config import settings
from fuzzyquery.core.datasets import load_csv
from fuzzyquery.core.denoise import DenoisedMembershipOracle
from fuzzyquery.core.evaluation import evaluate
from fuzzyquery.core.fuzzy import lloyd_fuzzy
from fuzzyquery.core.logging_service import get_logging_service
from fuzzyquery.core.oracle import TargetOracle
from fuzzyquery.core.solvers import solve
from fuzzyquery.core.synthetic import generate_synthetic
from fuzzyquery.core.targets import build_target, check_sequential_preconditions
from fuzzyquery.errors import ConfigError
from fuzzyquery.schemas.clustering import Clustering, Dataset
from fuzzyquery.schemas.harness import SweepConfig, SweepRecord
from fuzzyquery.schemas.solver import SolverConfig
from fuzzyquery.utils.config_loader import config_loader

SOLVER_ORDER = ("two-phase", "sequential", "two-cluster", "lloyd")
METRICS = ("center_error", "membership_error", "argmax_accuracy", "unmatched_accuracy", "total_queries")


class Instance(BaseModel):
    """Dataset, labels and target shared read-only by the runs of a grid point"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    dataset: Dataset
    labels: Optional[np.ndarray] = None
    target: Clustering


def run_seed(master: int, grid_index: int, trial: int) -> int:
    """Per-run seed, a function of (master seed, grid index, trial) only"""
    state = np.random.SeedSequence([master, grid_index, trial]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def grid_points(config: SweepConfig) -> List[Dict[str, Any]]:
    if not config.grid:
        return [{}]
    keys = list(config.grid)
    return [dict(zip(keys, values)) for values in itertools.product(*(config.grid[key] for key in keys))]


def _set_path(data: Dict[str, Any], path: List[str], value: Any, key: str):
    node = data
    for part in path[:-1]:
        if not isinstance(node.get(part), dict):
            raise ConfigError(f"grid key '{key}' does not name a config field")
        node = node[part]
    if path[-1] not in node:
        raise ConfigError(f"grid key '{key}' does not name a config field")
    node[path[-1]] = value


def resolve_point(config: SweepConfig, point: Dict[str, Any]) -> Tuple[SweepConfig, Optional[float]]:
    """Config with one grid point applied, plus the query budget nu if the grid sets one.

    Grid keys are `nu`, `zeta` (synthetic size ratio), `k` (synthetic cluster
    count, sizes follow `SyntheticSpec.with_k`), `alpha` (solver and target
    together), solver fields such as `eta` or `m`, or dotted paths into the
    sweep config (`dataset.synthetic.point_std`).
    """
    data = config.model_dump()
    data["grid"] = {}
    nu = None
    k = None
    for key, value in point.items():
        if key == "nu":
            nu = float(value)
            if nu <= 0:
                raise ConfigError(f"query budget nu must be > 0, got {value}")
            continue
        if key in ("zeta", "k", "dataset.synthetic.k"):
            if config.dataset.kind != "synthetic":
                raise ConfigError(f"{key} applies to synthetic datasets only")
            if key != "zeta":
                k = int(value)
                if k < 1:
                    raise ConfigError(f"grid value k must be >= 1, got {value}")
            continue
        if key == "alpha":
            data["solver"]["alpha"] = value
            data["target"]["alpha"] = value
            continue
        path = key.split(".")
        if len(path) == 1 and key in SolverConfig.model_fields:
            path = ["solver", key]
        _set_path(data, path, value, key)

    resolved = config_loader.validate(SweepConfig, data, source=f"grid point {point}")
    synthetic = resolved.dataset.synthetic
    if k is not None:
        synthetic = synthetic.with_k(k)
    if "zeta" in point:
        synthetic = synthetic.with_zeta(float(point["zeta"]))
    if synthetic is not resolved.dataset.synthetic:
        update: Dict[str, Any] = {"dataset": resolved.dataset.model_copy(update={"synthetic": synthetic})}
        if k is not None and resolved.target.k is not None:
            update["target"] = resolved.target.model_copy(update={"k": k})
        resolved = resolved.model_copy(update=update)
    return resolved, nu


def build_instance(config: SweepConfig) -> Instance:
    source = config.dataset
    if source.kind == "synthetic":
        dataset, labels = generate_synthetic(source.synthetic)
    else:
        dataset, labels = load_csv(source.path, source.label_column)

    spec = config.target
    k = spec.k
    if k is None and source.kind == "synthetic":
        k = source.synthetic.k
    target = build_target(
        dataset.points,
        k,
        spec.alpha,
        mode=spec.mode,
        labels=labels,
        seed=config.seed,
        max_iter=spec.max_iter,
        tol=spec.tol,
    )
    return Instance(dataset=dataset, labels=labels, target=target)


def solver_config_for(config: SweepConfig, solver: str, nu: Optional[float], seed: int) -> SolverConfig:
    update: Dict[str, Any] = {"seed": seed}
    m = config.budget.m_for(solver, nu) if nu is not None else config.solver.m
    update["m"] = m
    if config.budget.r_from_m:
        update["r"] = max(1, math.ceil(m / config.solver.eta1))
    return config.solver.model_copy(update=update)


def _run_one(
    instance: Instance,
    config: SweepConfig,
    solver: str,
    nu: Optional[float],
    grid_index: int,
    trial: int,
    point: Dict[str, Any],
) -> SweepRecord:
    seed = run_seed(config.seed, grid_index, trial)
    started = time.perf_counter()
    record: Dict[str, Any] = {
        "grid_index": grid_index,
        "trial": trial,
        "solver": solver,
        "seed": seed,
        "params": point,
    }
    target = instance.target
    try:
        if solver == "lloyd":
            estimate = lloyd_fuzzy(
                instance.dataset.points,
                target.k,
                config.target.alpha,
                init=seed,
                max_iter=config.target.max_iter,
                tol=config.target.tol,
                seed=seed,
            ).clustering
            report = evaluate(target, estimate, instance.labels)
            record.update(status="ok", report=report)
        else:
            cfg = solver_config_for(config, solver, nu, seed)
            record["solver_config"] = cfg.model_dump()
            oracle = TargetOracle(target, noise_sigma=config.noise_sigma, seed=seed)
            solver_oracle = oracle if config.kappa is None else DenoisedMembershipOracle(oracle, config.kappa)
            result = solve(solver, instance.dataset.points, solver_oracle, target.k, cfg)
            report = evaluate(target, result.estimate, instance.labels, oracle.ledger)
            record.update(
                status="ok",
                report=report,
                per_stage_counts=result.per_stage_counts,
                total_queries=oracle.ledger.total,
            )
    except Exception as e:
        get_logging_service().log_error(
            type(e).__name__,
            str(e),
            {"grid_index": grid_index, "trial": trial, "solver": solver, "traceback": traceback.format_exc()},
        )
        record.update(status="failed", error_type=type(e).__name__, error=str(e))

    record["duration"] = time.perf_counter() - started
    get_logging_service().log_sweep_run(grid_index, trial, record["status"], record["duration"])
    return SweepRecord(**record)


def _record_key(record: SweepRecord) -> Tuple[int, int, int]:
    return record.grid_index, record.trial, SOLVER_ORDER.index(record.solver)


def run_sweep(
    config: SweepConfig,
    workers: Optional[int] = None,
    on_record: Optional[Callable[[SweepRecord], None]] = None,
) -> List[SweepRecord]:
    """Run every (grid point, trial, solver) combination.

    Runs execute concurrently but own their oracle and seed, so the records
    (ignoring durations) depend only on the config. `on_record` sees each
    record as it completes, one at a time. Failed runs become failed records;
    config errors abort before anything runs.
    """
    points = grid_points(config)
    resolved = [resolve_point(config, point) for point in points]

    instances: Dict[str, Instance] = {}
    jobs = []
    for grid_index, (point, (point_config, nu)) in enumerate(zip(points, resolved)):
        cache_key = point_config.dataset.model_dump_json() + point_config.target.model_dump_json()
        if cache_key not in instances:
            instances[cache_key] = build_instance(point_config)
        instance = instances[cache_key]
        if "sequential" in point_config.solvers:
            check_sequential_preconditions(instance.target, point_config.solver.eta1, point_config.solver.eta2)
        for trial in range(point_config.trials):
            for solver in point_config.solvers:
                jobs.append((instance, point_config, solver, nu, grid_index, trial, point))

    records: List[SweepRecord] = []
    emit_lock = threading.Lock()
    with ThreadPoolExecutor(max_workers=workers or settings.sweep_workers) as pool:
        futures = [pool.submit(_run_one, *job) for job in jobs]
        for future in as_completed(futures):
            record = future.result()
            with emit_lock:
                records.append(record)
                if on_record is not None:
                    on_record(record)

    records.sort(key=_record_key)
    logger = get_logging_service()
    failed = sum(1 for record in records if record.status == "failed")
    logger.log_metric("sweep_runs", len(records), {"sweep": config.name})
    logger.log_metric("sweep_failures", failed, {"sweep": config.name})
    return records


def records_frame(records: Sequence[SweepRecord]) -> pd.DataFrame:
    rows = []
    for record in records:
        row: Dict[str, Any] = {
            "grid_index": record.grid_index,
            "trial": record.trial,
            "solver": record.solver,
            "status": record.status,
            "total_queries": record.total_queries if record.status == "ok" else np.nan,
        }
        row.update(record.params)
        report = record.report
        for metric in METRICS[:-1]:
            value = getattr(report, metric) if report is not None else None
            row[metric] = np.nan if value is None else value
        rows.append(row)
    return pd.DataFrame(rows)


def aggregate(records: Sequence[SweepRecord]) -> pd.DataFrame:
    """Per grid point and solver: run and failure counts, then mean, median
    and 25/75% quantiles of every metric over the successful runs"""
    frame = records_frame(records)
    if frame.empty:
        return pd.DataFrame(columns=["grid_index", "solver", "runs", "failures"])

    params = [c for c in frame.columns if c not in {"grid_index", "trial", "solver", "status", *METRICS}]
    keys = ["grid_index", "solver", *params]
    grouped = frame.groupby(keys, sort=True, dropna=False)

    pieces = [
        grouped.agg(
            runs=("status", "size"),
            failures=("status", lambda s: int((s == "failed").sum())),
        )
    ]
    for metric in METRICS:
        stats = grouped[metric].agg(
            mean="mean",
            median="median",
            q25=lambda s: s.quantile(0.25),
            q75=lambda s: s.quantile(0.75),
        )
        pieces.append(stats.add_prefix(f"{metric}_"))
    return pd.concat(pieces, axis=1).reset_index()
