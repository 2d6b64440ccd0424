from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from fuzzyquery.core.logging_service import get_logging_service
from fuzzyquery.errors import ConfigError, ParseError
from fuzzyquery.schemas.clustering import Dataset


def load_csv(
    path: Union[str, Path],
    label_column: Optional[str] = None,
    require_label: bool = True,
) -> Tuple[Dataset, Optional[np.ndarray]]:
    """Headered CSV of real features, optionally with a label column.

    Parse errors name the 1-based data row (header excluded) and the column.
    With `require_label=False` a missing label column yields no labels.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"dataset file not found: {path}")
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    frame.columns = [str(c).strip() for c in frame.columns]

    labels = None
    if label_column is not None and (require_label or label_column in frame.columns):
        if label_column not in frame.columns:
            raise ConfigError(f"label column '{label_column}' not in {path.name}", {"columns": list(frame.columns)})
        labels = frame.pop(label_column).str.strip().to_numpy()
        if all(_is_number(v) for v in labels):
            numeric = pd.to_numeric(pd.Series(labels))
            labels = numeric.astype(np.int64).to_numpy() if (numeric % 1 == 0).all() else numeric.to_numpy()

    if frame.shape[1] == 0:
        raise ConfigError(f"{path.name} has no feature columns")
    features = np.empty(frame.shape, dtype=float)
    for c, column in enumerate(frame.columns):
        values = pd.to_numeric(frame[column].str.strip(), errors="coerce")
        bad = np.flatnonzero(values.isna().to_numpy() | ~np.isfinite(values.to_numpy(dtype=float, na_value=np.nan)))
        if bad.size:
            row = int(bad[0])
            raise ParseError(
                f"non-numeric value {frame[column].iloc[row]!r} at row {row + 1}, column '{column}'",
                row=row + 1,
                column=column,
            )
        features[:, c] = values.to_numpy(dtype=float)

    dataset = Dataset(points=features)
    n_classes = len(np.unique(labels)) if labels is not None else None
    get_logging_service().log_dataset_loaded(str(path), dataset.n, dataset.d, n_classes)
    return dataset, labels


def _is_number(value: str) -> bool:
    try:
        float(value)
    except ValueError:
        return False
    return True
