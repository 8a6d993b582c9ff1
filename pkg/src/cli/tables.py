"""
This module contains the CSV layer: locale-free formatting of result rows into
polars dataframes, the configuration trailer, and reading files back.
"""

import math
import sys
from collections.abc import Iterable, Mapping
from enum import Enum
from pathlib import Path

import polars as pl

from constants.tolerances import CSV_SIGNIFICANT_DIGITS
from utils.errors import ConfigError

TRAILER_MARKER = "# scenario"


def format_cell(value) -> str | None:
    """
    Render one value for the CSV: floats with 17 significant digits, booleans
    as ``true``/``false``, None as an empty cell.

    Example:
        >>> format_cell(1 / 3)
        '0.33333333333333331'
    """
    if value is None:
        return None
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, f".{CSV_SIGNIFICANT_DIGITS}g")
    return str(value)


def rows_to_frame(rows: Iterable[Mapping], columns: list[str]) -> pl.DataFrame:
    """
    Build a string-typed dataframe with a fixed column order.

    Args:
        rows (Iterable[Mapping]): Result rows; missing keys become nulls.
        columns (list[str]): Column order.

    Returns:
        pl.DataFrame: The formatted frame.
    """
    data = {c: [format_cell(row.get(c)) for row in rows] for c in columns}
    return pl.DataFrame(data, schema={c: pl.String for c in columns})


def render_csv(df: pl.DataFrame, config: Mapping[str, str], notes: Iterable[str] = ()) -> str:
    """
    CSV text with a header, the rows and a trailer recording the configuration.
    """
    lines = [f"# {note}" for note in notes]
    lines.append(TRAILER_MARKER)
    lines += [f"# {key} = {value}" for key, value in config.items()]
    return df.write_csv(line_terminator="\n") + "\n".join(lines) + "\n"


def write_output(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def read_output(path: Path | str) -> tuple[pl.DataFrame, str]:
    """
    Read a result file back.

    Args:
        path (Path | str): CSV written by the CLI.

    Returns:
        tuple[pl.DataFrame, str]: String-typed rows and the configuration
        trailer as ``key = value`` lines.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"result file {path} does not exist")
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if TRAILER_MARKER not in lines:
        raise ConfigError(f"{path} has no scenario trailer")
    start = lines.index(TRAILER_MARKER) + 1
    trailer = "\n".join(line[2:] for line in lines[start:] if line.startswith("# "))
    df = pl.read_csv(path, comment_prefix="#", infer_schema=False)
    return df, trailer


def number(value: str | None) -> float | None:
    """
    Parse a cell written by ``format_cell``.
    """
    if value is None or value == "":
        return None
    return float(value)
