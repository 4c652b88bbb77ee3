"""Tests for JSON and CSV helpers."""

import json

import numpy as np
import pytest

from orientlam.exceptions import ConfigInvalidError
from orientlam.utils.serialization import (
    csv_text,
    dumps,
    format_real,
    matrix_to_list,
    parse_matrix,
    read_json,
    write_csv,
    write_json,
)


class TestFormatting:
    """Tests for real formatting."""

    def test_format_real_round_trips(self):
        """Test the shortest form parses back to the same float."""
        value = 0.1 + 0.2
        assert float(format_real(value)) == value
        assert format_real(np.float64(1.0)) == "1.0"

    def test_dumps_trailing_newline(self):
        """Test dumps ends documents with a newline."""
        assert dumps({"a": 1}) == '{"a": 1}\n'

    def test_dumps_rejects_nan(self):
        """Test NaN is not written."""
        with pytest.raises(ValueError):
            dumps({"a": float("nan")})

    def test_matrix_to_list(self):
        """Test conversion to plain floats."""
        rows = matrix_to_list(np.diag([-1.0, 2.0]))
        assert rows == [[-1.0, 0.0], [0.0, 2.0]]
        assert isinstance(rows[0][0], float)


class TestCSV:
    """Tests for CSV output."""

    def test_csv_text(self):
        """Test booleans, None and floats are rendered."""
        text = csv_text(("a", "b", "c", "d"), [(True, None, 0.5, "x")])
        assert text == "a,b,c,d\ntrue,,0.5,x\n"

    def test_write_csv_creates_parent(self, tmp_path):
        """Test write_csv creates missing directories."""
        path = write_csv(tmp_path / "out" / "t.csv", ("x",), [(1.0,), (2.0,)])
        assert path.read_text(encoding="utf-8") == "x\n1.0\n2.0\n"


class TestJSON:
    """Tests for JSON files."""

    def test_write_and_read(self, tmp_path):
        """Test a document survives a file round trip."""
        data = {"matrix": [[1.0, 2.0], [3.0, 4.0]]}
        path = write_json(tmp_path / "doc.json", data)
        assert read_json(path) == data


class TestParseMatrix:
    """Tests for parse_matrix."""

    def test_inline(self):
        """Test inline JSON rows."""
        np.testing.assert_array_equal(parse_matrix("[[-1, 0], [0, 1]]"), np.diag([-1.0, 1.0]))

    def test_file(self, tmp_path):
        """Test a path with and without the '@' prefix."""
        path = tmp_path / "m.json"
        path.write_text(json.dumps([[2, 0], [0, 3]]), encoding="utf-8")
        np.testing.assert_array_equal(parse_matrix(str(path)), np.diag([2.0, 3.0]))
        np.testing.assert_array_equal(parse_matrix(f"@{path}"), np.diag([2.0, 3.0]))

    def test_missing_file(self, tmp_path):
        """Test a missing file raises ConfigInvalidError."""
        with pytest.raises(ConfigInvalidError) as exc_info:
            parse_matrix(str(tmp_path / "missing.json"))
        assert exc_info.value.field == "matrix"

    def test_bad_json(self):
        """Test malformed JSON raises."""
        with pytest.raises(ConfigInvalidError, match="not valid JSON"):
            parse_matrix("[[1, 2], [3")

    def test_bad_shape(self):
        """Test a non-square matrix raises."""
        with pytest.raises(ConfigInvalidError):
            parse_matrix("[[1, 2, 3]]")
