import json
import logging
import sys
from functools import lru_cache
from typing import Any, Dict, List, Optional

from fuzzyquery.config import settings


class LoggingService:
    def __init__(self):
        self.logger_name = settings.logger_name
        self.logger = logging.getLogger(self.logger_name)
        if not self.logger.handlers:
            handler = logging.StreamHandler(sys.stderr)
            handler.setFormatter(logging.Formatter("%(message)s"))
            self.logger.addHandler(handler)
        self.logger.setLevel(settings.log_level)

        self.cloud_logger = None
        if settings.enable_cloud_logging:
            try:
                from google.cloud import logging as cloud_logging

                client = cloud_logging.Client(project=settings.gcp_project_id)
                self.cloud_logger = client.logger(self.logger_name)
            except Exception as e:
                self.logger.warning(json.dumps({"event": "cloud_logging_disabled", "reason": str(e)}))

    def _log(self, payload: Dict[str, Any], severity: str = "INFO"):
        level = logging.getLevelName(severity)
        if not isinstance(level, int):
            level = logging.INFO
        self.logger.log(level, json.dumps(payload, default=str))

        if self.cloud_logger is not None:
            try:
                self.cloud_logger.log_struct(payload, severity=severity)
            except Exception as e:
                if settings.debug:
                    print(f"Logging failed: {e}", file=sys.stderr)

    def log_solver_start(self, solver: str, n: int, k: int, seed: int):
        self._log(
            {
                "event": "solver_started",
                "solver": solver,
                "n": n,
                "k": k,
                "seed": seed,
            },
            severity="DEBUG",
        )

    def log_solver_complete(self, solver: str, total_queries: int, per_stage: Dict[str, int]):
        self._log(
            {
                "event": "solver_completed",
                "solver": solver,
                "total_queries": total_queries,
                "per_stage": per_stage,
            },
            severity="INFO",
        )

    def log_stage(self, solver: str, stage: str, queries: int):
        self._log(
            {
                "event": "stage_completed",
                "solver": solver,
                "stage": stage,
                "queries": queries,
            },
            severity="DEBUG",
        )

    def log_reseed(self, cluster: int, iteration: int, point_index: int):
        self._log(
            {
                "event": "degenerate_cluster_reseeded",
                "cluster": cluster,
                "iteration": iteration,
                "point_index": point_index,
            },
            severity="WARNING",
        )

    def log_target_built(self, mode: str, n: int, k: int, consistent: bool, violations: int):
        self._log(
            {
                "event": "target_built",
                "mode": mode,
                "n": n,
                "k": k,
                "consistent": consistent,
                "monotonicity_violations": violations,
            },
            severity="INFO" if consistent else "WARNING",
        )

    def log_precondition(self, check: str, message: str, values: Dict[str, Any]):
        self._log(
            {
                "event": "precondition_warning",
                "check": check,
                "message": message,
                "values": values,
            },
            severity="WARNING",
        )

    def log_reduction_bootstrap(self, path: str, anchors: List[int], pair_queries: int, triplet_queries: int):
        self._log(
            {
                "event": "reduction_bootstrapped",
                "path": path,
                "anchors": anchors,
                "pair_queries": pair_queries,
                "triplet_queries": triplet_queries,
            },
            severity="INFO",
        )

    def log_row_clamped(self, index: int, residual: float):
        self._log(
            {
                "event": "membership_row_clamped",
                "index": index,
                "residual": residual,
            },
            severity="WARNING",
        )

    def log_dataset_loaded(self, source: str, n: int, d: int, n_classes: Optional[int]):
        self._log(
            {
                "event": "dataset_loaded",
                "source": source,
                "n": n,
                "d": d,
                "n_classes": n_classes,
            },
            severity="INFO",
        )

    def log_sweep_run(self, grid_index: int, trial: int, status: str, duration: float):
        self._log(
            {
                "event": "sweep_run_recorded",
                "grid_index": grid_index,
                "trial": trial,
                "status": status,
                "duration_seconds": duration,
            },
            severity="INFO" if status == "ok" else "WARNING",
        )

    def log_error(self, error_type: str, error_message: str, context: Dict[str, Any]):
        self._log(
            {
                "event": "error",
                "error_type": error_type,
                "error_message": error_message,
                "context": context,
            },
            severity="ERROR",
        )

    def log_metric(self, metric_name: str, value: float, labels: Dict[str, str] = None):
        self._log(
            {
                "event": "metric",
                "metric_name": metric_name,
                "value": value,
                "labels": labels or {},
            },
            severity="INFO",
        )


@lru_cache(maxsize=1)
def get_logging_service() -> LoggingService:
    return LoggingService()
