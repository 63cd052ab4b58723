import json
import math
from pathlib import Path
from typing import Any, List, Optional

import numpy as np
import pandas as pd
import yaml

CSV_FLOAT_FORMAT = "%.17g"


def load_yaml(path: str) -> dict:
    with open(path, "r") as f:
        return yaml.safe_load(f)


def _finite_or_none(obj: Any) -> Any:
    """JSON has no inf/NaN tokens; such values are written as null."""
    if isinstance(obj, dict):
        return {k: _finite_or_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_or_none(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def save_json(obj: dict, path: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(_finite_or_none(obj), f, indent=2, allow_nan=False)


def load_json(path: str) -> dict:
    with open(path, "r") as f:
        return json.load(f)


def save_csv(df: pd.DataFrame, path: str) -> None:
    # fixed float format keeps same-seed reruns byte-identical
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)


def load_csv(path: str, required_columns: Optional[List[str]] = None) -> pd.DataFrame:
    df = pd.read_csv(path)
    if required_columns is not None:
        missing = [c for c in required_columns if c not in df.columns]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
    return df
