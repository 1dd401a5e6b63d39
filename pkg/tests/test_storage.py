"""
Tests for artifacts and state files (services/storage.py)
"""

import json

import numpy as np
import pandas as pd
import pytest

from app.errors import ContractViolation
from app.models.schemas import GroundConfig
from app.services.measures import entanglement_records
from app.services.partitions import balanced_bipartitions, family_iter
from app.services.state import haar_random_state
from app.services.storage import (
    artifact_path,
    build_document,
    dump_document,
    load_state,
    records_frame,
    save_state,
    write_csv,
    write_json,
)


class TestStateFiles:
    """Plain-text 'n=' header plus 're im' lines."""

    def test_save_and_load_exact(self, tmp_path):
        state = haar_random_state(5, seed=8)
        path = save_state(state, str(tmp_path / "psi.txt"))
        assert path.read_text(encoding="utf-8").splitlines()[0] == "n=5"
        loaded = load_state(str(path))
        assert np.array_equal(loaded.amplitudes, state.amplitudes)

    def test_missing_header(self, tmp_path):
        path = tmp_path / "psi.txt"
        path.write_text("1 0\n0 0\n", encoding="utf-8")
        with pytest.raises(ContractViolation):
            load_state(str(path))

    def test_wrong_line_count(self, tmp_path):
        path = tmp_path / "psi.txt"
        path.write_text("n=2\n1 0\n0 0\n", encoding="utf-8")
        with pytest.raises(ContractViolation):
            load_state(str(path))

    def test_unnormalized_file(self, tmp_path):
        path = tmp_path / "psi.txt"
        path.write_text("n=1\n0.9 0\n0 0\n", encoding="utf-8")
        with pytest.raises(ContractViolation):
            load_state(str(path))


class TestArtifacts:
    """CSV tables and JSON documents."""

    def test_artifact_path_strips_known_suffix(self, tmp_path):
        assert artifact_path(str(tmp_path / "run.csv"), ".json") == tmp_path / "run.json"

    def test_records_csv_columns_and_precision(self, tmp_path):
        state = haar_random_state(6, seed=2)
        records = entanglement_records(state, family_iter(balanced_bipartitions(6)), with_entropy=True)
        path = write_csv(records_frame(records, with_entropy=True), str(tmp_path / "dist"))
        frame = pd.read_csv(path, float_precision="round_trip")
        assert list(frame.columns) == ["mask", "n_A", "purity", "participation", "n_AB", "entropy"]
        assert len(frame) == 20
        assert frame["purity"].tolist() == [r.purity for r in records]

    def test_csv_is_byte_stable(self, tmp_path):
        state = haar_random_state(6, seed=2)
        records = entanglement_records(state, family_iter(balanced_bipartitions(6)))
        first = write_csv(records_frame(records), str(tmp_path / "a")).read_bytes()
        second = write_csv(records_frame(records), str(tmp_path / "b")).read_bytes()
        assert first == second
        assert b"\r\n" not in first

    def test_document_layout(self, tmp_path):
        config = GroundConfig(n=4, g=0.5)
        document = build_document("ground", config, {"energy": -3.0})
        path = write_json(document, str(tmp_path / "ground"))
        loaded = json.loads(path.read_text(encoding="utf-8"))
        assert loaded["format_version"] == "1"
        assert loaded["command"] == "ground"
        assert loaded["config"]["n"] == 4
        assert loaded["result"] == {"energy": -3.0}

    def test_json_without_stem(self):
        assert write_json({"a": 1}, None) is None

    def test_non_finite_values_written_as_null(self):
        document = build_document("scaling", GroundConfig(n=4, g=0.5), {"exponent": float("-inf"), "rss": [1.0, float("nan")]})
        text = dump_document(document)
        assert "Infinity" not in text and "NaN" not in text
        loaded = json.loads(text)
        assert loaded["result"] == {"exponent": None, "rss": [1.0, None]}
