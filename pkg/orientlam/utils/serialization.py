"""JSON and CSV helpers with byte-stable real formatting."""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Union

import numpy as np

from orientlam.constants import DEFAULT_ENCODING
from orientlam.exceptions import ConfigInvalidError, InvalidMatrixError
from orientlam.utils.matrix import as_matrix

logger = logging.getLogger(__name__)


def format_real(value: float) -> str:
    """Shortest round-trip decimal form of a float."""
    return repr(float(value))


def matrix_to_list(matrix: np.ndarray) -> List[List[float]]:
    """Convert a matrix to a JSON array of rows."""
    return [[float(x) for x in row] for row in matrix]


def vector_to_list(vector: np.ndarray) -> List[float]:
    """Convert a vector to a JSON array."""
    return [float(x) for x in vector]


def dumps(data: Any) -> str:
    """Serialize to JSON with a trailing newline; floats use shortest round-trip form."""
    return json.dumps(data, allow_nan=False) + "\n"


def write_json(path: Union[str, Path], data: Any) -> Path:
    """
    Write JSON document to a file.

    Args:
        path: Destination path
        data: JSON-compatible data

    Returns:
        Path written
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(dumps(data), encoding=DEFAULT_ENCODING)
    logger.debug(f"Wrote JSON to {target}")
    return target


def read_json(path: Union[str, Path]) -> Any:
    """Read a JSON document from a file."""
    return json.loads(Path(path).read_text(encoding=DEFAULT_ENCODING))


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_real(value)
    if value is None:
        return ""
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Render rows as CSV text with '\\n' line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """
    Write a CSV table.

    Args:
        path: Destination path
        header: Column names
        rows: Row values; floats are written in shortest round-trip form

    Returns:
        Path written
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(csv_text(header, rows), encoding=DEFAULT_ENCODING)
    logger.debug(f"Wrote CSV to {target}")
    return target


def parse_matrix(text: str) -> np.ndarray:
    """
    Parse a matrix given inline as JSON rows or as a path to a JSON file.

    Args:
        text: JSON array of rows, or path (optionally prefixed with '@')

    Returns:
        Validated matrix

    Raises:
        ConfigInvalidError: If the value cannot be parsed as a supported matrix
    """
    source = text.strip()
    if source.startswith("@") or not source.startswith("["):
        path = Path(source.lstrip("@"))
        try:
            source = path.read_text(encoding=DEFAULT_ENCODING)
        except OSError as e:
            raise ConfigInvalidError(f"Cannot read matrix file {path}: {e}", field="matrix") from e
    try:
        return as_matrix(json.loads(source))
    except json.JSONDecodeError as e:
        raise ConfigInvalidError(f"Matrix is not valid JSON: {e}", field="matrix") from e
    except InvalidMatrixError as e:
        raise ConfigInvalidError(str(e), field="matrix") from e
