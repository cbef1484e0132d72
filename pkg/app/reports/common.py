"""
JSON helpers shared by the report generators.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pandas as pd


def sanitize_for_json(obj):
    """Recursively convert numpy/pandas types to native Python; NaN and inf become None."""
    if isinstance(obj, dict):
        return {str(k): sanitize_for_json(v) for k, v in obj.items() if k is not None}
    if isinstance(obj, (list, tuple)):
        return [sanitize_for_json(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return sanitize_for_json(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return None if (math.isnan(v) or math.isinf(v)) else v
    if isinstance(obj, Path):
        return str(obj)
    if pd.api.types.is_scalar(obj) and pd.isna(obj):
        return None
    return obj


def write_json(data: dict, path: Path) -> Path:
    """Sorted keys and repr floats so identical data gives identical bytes."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sanitize_for_json(data), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
