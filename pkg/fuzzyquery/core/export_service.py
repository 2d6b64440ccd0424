import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from fuzzyquery.config import settings
from fuzzyquery.errors import ConfigError
from fuzzyquery.schemas.clustering import Clustering, Dataset
from fuzzyquery.schemas.harness import SweepRecord
from fuzzyquery.schemas.oracle import QueryLedger
from fuzzyquery.schemas.solver import SolverResult

PathLike = Union[str, Path]


class ExportService:
    """Reads and writes datasets, clusterings, results, sweep records and query logs"""

    def __init__(self, omit_threshold: Optional[int] = None):
        self.omit_threshold = omit_threshold if omit_threshold is not None else settings.membership_omit_threshold

    @staticmethod
    def _prepare(path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def write_dataset_csv(self, path: PathLike, dataset: Dataset, labels=None) -> Path:
        path = self._prepare(path)
        frame = pd.DataFrame(dataset.points, columns=[f"x{c}" for c in range(dataset.d)])
        if labels is not None:
            frame["label"] = np.asarray(labels)
        frame.to_csv(path, index=False)
        return path

    def _clustering_payload(self, clustering: Clustering, include_memberships: bool) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "k": clustering.k,
            "n": clustering.n,
            "consistent": clustering.consistent,
            "centers": clustering.centers.tolist(),
        }
        if include_memberships:
            payload["memberships"] = clustering.memberships.tolist()
        return payload

    def write_clustering_json(self, path: PathLike, clustering: Clustering, kind: str = "target", **extra) -> Path:
        path = self._prepare(path)
        payload = {"schema_version": settings.schema_version, "kind": kind, **extra}
        payload.update(self._clustering_payload(clustering, include_memberships=True))
        path.write_text(json.dumps(payload, indent=2, default=str))
        return path

    def read_clustering_json(self, path: PathLike) -> Clustering:
        """Target or result file back into a Clustering; memberships must be present"""
        data = self._read_json(path)
        body = data.get("estimate", data)
        if "memberships" not in body:
            raise ConfigError(f"{Path(path).name} carries no memberships (omitted for size?)")
        return Clustering(
            centers=body["centers"],
            memberships=body["memberships"],
            consistent=bool(body.get("consistent", False)),
        )

    def result_payload(self, result: SolverResult) -> Dict[str, Any]:
        include = result.estimate.n * result.estimate.k <= self.omit_threshold
        return {
            "schema_version": settings.schema_version,
            "kind": "result",
            "solver": result.solver,
            "seed": result.seed,
            "config": result.config.model_dump(),
            "estimate": self._clustering_payload(result.estimate, include_memberships=include),
            "memberships_omitted": not include,
            "per_stage_counts": result.per_stage_counts,
            "ledger": result.ledger_snapshot.counts(),
            "cluster_order": result.cluster_order,
            "diagnostics": result.diagnostics,
        }

    def write_result_json(self, path: PathLike, result: SolverResult) -> Path:
        path = self._prepare(path)
        path.write_text(json.dumps(self.result_payload(result), indent=2, default=str))
        return path

    def write_records_jsonl(self, path: PathLike, records: Iterable[SweepRecord]) -> Path:
        path = self._prepare(path)
        with path.open("w", encoding="utf-8") as fh:
            for record in records:
                fh.write(record.model_dump_json() + "\n")
        return path

    def read_records_jsonl(self, path: PathLike) -> List[SweepRecord]:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"records file not found: {path}")
        records = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                records.append(SweepRecord.model_validate_json(line))
        return records

    def write_query_log(self, path: PathLike, ledger: QueryLedger) -> Path:
        if ledger.log is None:
            raise ConfigError("the oracle was created without query logging")
        path = self._prepare(path)
        with path.open("w", encoding="utf-8") as fh:
            for entry in ledger.log:
                fh.write(json.dumps(entry) + "\n")
        return path

    def write_summary_csv(self, path: PathLike, summary: pd.DataFrame) -> Path:
        path = self._prepare(path)
        summary.to_csv(path, index=False)
        return path

    @staticmethod
    def _read_json(path: PathLike) -> Dict[str, Any]:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path.name} is not valid JSON: {e}") from e
        version = str(data.get("schema_version", ""))
        if version != settings.schema_version:
            raise ConfigError(
                f"{path.name} has schema version '{version}', expected '{settings.schema_version}'"
            )
        return data
