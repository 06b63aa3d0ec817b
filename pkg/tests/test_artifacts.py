import numpy as np
import pandas as pd
import pytest

from mhd_wavelab import ArtifactIOError
from mhd_wavelab.artifacts import (
    SUMMARY_NAME,
    encode_summary,
    ensure_output_dir,
    field_frame,
    read_summary,
    write_summary,
    write_table,
)
from mhd_wavelab.experiments import ScanRow


class TestSummary:
    """Test summary.json."""

    def test_sorted_and_deterministic(self):
        """Test key order does not depend on insertion order."""
        a = encode_summary({"b": 1, "a": {"y": 2.0, "x": [1, 2]}})
        b = encode_summary({"a": {"x": [1, 2], "y": 2.0}, "b": 1})

        assert a == b
        assert a.endswith(b"\n")
        assert a.index(b'"a"') < a.index(b'"b"')

    def test_numpy_and_non_finite(self):
        """Test numpy values become plain JSON and NaN becomes a string."""
        data = encode_summary({"v": np.float64(0.5), "arr": np.arange(3), "bad": float("nan")})

        assert b'"v": 0.5' in data
        assert b'"bad": "nan"' in data

    def test_write_and_read(self, tmp_path):
        """Test a written summary reads back."""
        path = write_summary(tmp_path, {"command": "verify-eigen", "passed": True})

        assert path.name == SUMMARY_NAME
        assert read_summary(path) == {"command": "verify-eigen", "passed": True}

    def test_structs(self):
        """Test msgspec structs are encoded through their fields."""
        row = ScanRow(label="a", kind="shock", eta=0.1, theta=0.01, nodes=8, W0=0.01, T_lo=1.0, T_hi=2.0)

        assert b'"label": "a"' in encode_summary({"row": row})

    def test_unwritable_directory(self, tmp_path):
        """Test write failures raise ArtifactIOError."""
        with pytest.raises(ArtifactIOError):
            write_summary(tmp_path / "missing", {"a": 1})

    def test_read_missing(self, tmp_path):
        """Test a missing summary raises ArtifactIOError."""
        with pytest.raises(ArtifactIOError):
            read_summary(tmp_path / SUMMARY_NAME)


class TestTables:
    """Test CSV tables."""

    def test_rows_are_flattened(self, tmp_path):
        """Test nested mappings become dotted columns and lists are joined."""
        path = write_table(tmp_path, "rows.csv", [{"label": "a", "ratios": {"S": 1.0}, "z": [1, 2]}])

        frame = pd.read_csv(path)
        assert list(frame.columns) == ["label", "ratios.S", "z"]
        assert frame.loc[0, "z"] == "1;2"

    def test_line_endings(self, tmp_path):
        """Test tables use LF line endings and a header row."""
        path = write_table(tmp_path, "t.csv", [{"a": 1.5}, {"a": 2.5}])

        assert path.read_bytes() == b"a\n1.5\n2.5\n"

    def test_field_frame(self, tmp_path):
        """Test the field table has x first and extra columns last."""
        x = np.linspace(0.0, 1.0, 3)
        frame = field_frame(x, np.zeros((3, 2)), ["u1", "S"], w1=np.ones(3))

        assert list(frame.columns) == ["x", "u1", "S", "w1"]
        path = write_table(tmp_path, "field.csv", frame)
        assert pd.read_csv(path).shape == (3, 4)

    def test_output_dir_is_created(self, tmp_path):
        """Test nested output directories are created."""
        out = ensure_output_dir(tmp_path / "a" / "b")

        assert out.is_dir()

    def test_output_dir_over_file(self, tmp_path):
        """Test a file in the way raises ArtifactIOError."""
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding="utf-8")

        with pytest.raises(ArtifactIOError):
            ensure_output_dir(blocker / "sub")
