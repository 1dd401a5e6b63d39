# app/services/storage.py

"""
Artifact writing: CSV tables through pandas (17 significant digits, byte-stable),
JSON documents through pydantic, and the plain-text state format.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel

from app.config import FORMAT_VERSION
from app.errors import ContractViolation
from app.models.schemas import EntanglementRecord, PureState, ScalingPoint, SweepResult, validated

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def artifact_path(stem: str, suffix: str) -> Path:
    path = Path(stem)
    if path.suffix in (".csv", ".json"):
        path = path.with_suffix("")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.with_name(path.name + suffix)


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path


def records_frame(records: Sequence[EntanglementRecord], with_entropy: bool = False) -> pd.DataFrame:
    columns = {
        "mask": [r.part.mask for r in records],
        "n_A": [r.part.n_a for r in records],
        "purity": [r.purity for r in records],
        "participation": [r.participation for r in records],
        "n_AB": [r.n_ab for r in records],
    }
    if with_entropy:
        columns["entropy"] = [r.entropy for r in records]
    return pd.DataFrame(columns)


def sweep_frame(sweep: SweepResult) -> pd.DataFrame:
    return pd.DataFrame({"g": [p.g for p in sweep.points], "mu": [p.mu for p in sweep.points], "sigma": [p.sigma for p in sweep.points]})


def scaling_frame(points: Sequence[ScalingPoint]) -> pd.DataFrame:
    return pd.DataFrame([p.model_dump() for p in points])


def write_csv(frame: pd.DataFrame, stem: str) -> Path:
    return _write_frame(frame, artifact_path(stem, ".csv"))


def build_document(command: str, config: BaseModel, result: Any) -> Dict[str, Any]:
    """Every JSON artifact carries the format version, the command and its resolved config."""
    if isinstance(result, BaseModel):
        result = result.model_dump(mode="json")
    return {
        "format_version": FORMAT_VERSION,
        "command": command,
        "config": config.model_dump(mode="json"),
        "result": result,
    }


def _json_safe(value: Any) -> Any:
    """Non-finite floats become null."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(item) for item in value]
    return value


def dump_document(document: Dict[str, Any]) -> str:
    return json.dumps(_json_safe(document), indent=2, allow_nan=False)


def write_json(document: Dict[str, Any], stem: Optional[str]) -> Optional[Path]:
    """Writes <stem>.json, or returns None so the caller prints to stdout."""
    if stem is None:
        return None
    path = artifact_path(stem, ".json")
    path.write_text(dump_document(document) + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


# =======================
# STATE FILES
# =======================

def save_state(state: PureState, path: str) -> Path:
    """Header line 'n=<int>', then one 're im' line per amplitude."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    columns = np.column_stack([state.amplitudes.real, state.amplitudes.imag])
    np.savetxt(target, columns, fmt=FLOAT_FORMAT, header=f"n={state.n}", comments="")
    return target


def load_state(path: str) -> PureState:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            header = handle.readline().strip()
            if not header.startswith("n="):
                raise ContractViolation(f"{path}: first line must be 'n=<int>', got {header!r}")
            n = int(header[2:])
            columns = np.loadtxt(handle, dtype=np.float64, ndmin=2)
    except (OSError, ValueError) as e:
        if isinstance(e, ContractViolation):
            raise
        raise ContractViolation(f"cannot read state file {path}: {e}") from e

    if columns.shape != (1 << n, 2):
        raise ContractViolation(f"{path}: expected {1 << n} lines of 're im', got shape {columns.shape}")
    return validated(PureState, n=n, amplitudes=columns[:, 0] + 1j * columns[:, 1])
