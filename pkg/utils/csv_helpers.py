import csv
import json
from collections.abc import Iterable, Sequence
from typing import Any, TextIO


def format_number(value: Any) -> str:
    """
    Render one CSV cell. Floats use 17 significant digits so they parse back to the
    same double.
    Args:
        value: float | int | bool | str
    Returns:
        str: '0.69314718055994529', '3', 'true'
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_rows(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """
    Write a header row and the data rows, in the given order.
    Args:
        stream: TextIO: Destination.
        header: Sequence[str]: Column names.
        rows: Iterable[Sequence[Any]]: Data rows.
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])


def write_json(stream: TextIO, payload: dict[str, Any]) -> None:
    """
    Write a JSON payload. Non-finite floats are emitted as strings.
    Args:
        stream: TextIO: Destination.
        payload: dict[str, Any]: The document.
    """

    def clean(value: Any) -> Any:
        if isinstance(value, float) and (value != value or value in (float("inf"), float("-inf"))):
            return str(value)
        if isinstance(value, dict):
            return {k: clean(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [clean(v) for v in value]
        return value

    json.dump(clean(payload), stream, indent=2)
    stream.write("\n")
