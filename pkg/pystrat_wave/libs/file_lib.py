# MODULES
import csv as _csv
from pathlib import Path as _Path
from typing import (
    Dict as _Dict,
    Iterable as _Iterable,
    List as _List,
    Optional as _Optional,
    Sequence as _Sequence,
    Tuple as _Tuple,
    Union as _Union,
)

KeyValue = _Union[str, int, float, bool]


def format_number(value: float) -> str:
    """
    Formats a float with 17 significant digits so that parsing it back is exact.

    Args:
        value (float): The number to format.

    Returns:
        str: The decimal representation.
    """
    return format(float(value), ".16e")


def format_value(value: KeyValue) -> str:
    """
    Formats a key-value entry: floats with format_number, everything else with str.

    Args:
        value (KeyValue): The value to format.

    Returns:
        str: The text representation.
    """
    if isinstance(value, float):
        return format_number(value)

    return str(value)


def open_csv_file(
    path: _Path,
    encoding: str = "utf-8",
) -> _Tuple[_List[str], _List[_List[float]]]:
    """
    Opens a numeric CSV file with a header row.

    Args:
        path (Path): The path to the CSV file.
        encoding (str, optional): The encoding of the file. Defaults to "utf-8".

    Returns:
        Tuple[List[str], List[List[float]]]: The header and the numeric rows.

    Raises:
        FileNotFoundError: If the specified path does not exist.
        FileExistsError: If the specified path is not a file.
        ValueError: If the file is empty or a row has the wrong width.
    """
    if not path.exists():
        raise FileNotFoundError(f"Path {path} does not exist")

    if not path.is_file():
        raise FileExistsError(f"Path {path} is not a file")

    with open(path, encoding=encoding, newline="") as csv_file:
        reader = _csv.reader(csv_file)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"File {path} is empty") from None

        rows = []
        for line_number, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"File {path} line {line_number}: expected {len(header)} columns, got {len(row)}"
                )
            rows.append([float(item) for item in row])

    return header, rows


def save_csv_file(
    path: _Path,
    header: _Sequence[str],
    rows: _Iterable[_Sequence[float]],
    encoding: str = "utf-8",
    overwrite: bool = True,
) -> None:
    """
    Save numeric rows as a CSV file with a header row.

    Args:
        path (Path): The path where the CSV file will be saved.
        header (Sequence[str]): The column names.
        rows (Iterable[Sequence[float]]): The numeric rows.
        encoding (str, optional): The encoding to be used when writing the file. Defaults to "utf-8".
        overwrite (bool, optional): Whether an existing file is replaced. Defaults to True.
    """
    if path.exists() and not overwrite:
        return

    with open(path, "w", encoding=encoding, newline="") as csv_file:
        writer = _csv.writer(csv_file, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(item) for item in row])


def parse_key_value_text(
    text: str,
    errors: _Optional[_List[_Tuple[int, str]]] = None,
) -> _List[_Tuple[int, str, str]]:
    """
    Parses `key = value` lines, skipping blank lines and `#` comments.

    Args:
        text (str): The text to parse.
        errors (Optional[List[Tuple[int, str]]], optional): When given, malformed lines are collected here as (line number, message) instead of raised. Defaults to None.

    Returns:
        List[Tuple[int, str, str]]: (line number, key, raw value) triples in file order.

    Raises:
        ValueError: If a non-comment line has no `=` or an empty key.
    """
    entries = []
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue

        key, separator, value = line.partition("=")
        key = key.strip()
        if not separator or not key:
            message = f"expected `key = value`, got {raw_line.strip()!r}"
            if errors is None:
                raise ValueError(f"line {line_number}: {message}")
            errors.append((line_number, message))
            continue

        entries.append((line_number, key, value.strip()))

    return entries


def open_key_value_file(
    path: _Path,
    encoding: str = "utf-8",
) -> _Dict[str, str]:
    """
    Opens a `key = value` file and returns its raw entries.

    Args:
        path (Path): The path to the file.
        encoding (str, optional): The encoding of the file. Defaults to "utf-8".

    Returns:
        Dict[str, str]: The raw values by key.

    Raises:
        FileNotFoundError: If the specified path does not exist.
        FileExistsError: If the specified path is not a file.
    """
    if not path.exists():
        raise FileNotFoundError(f"Path {path} does not exist")

    if not path.is_file():
        raise FileExistsError(f"Path {path} is not a file")

    with open(path, encoding=encoding) as file:
        text = file.read()

    return {key: value for _, key, value in parse_key_value_text(text)}


def save_key_value_file(
    path: _Path,
    data: _Dict[str, KeyValue],
    encoding: str = "utf-8",
    sort_keys: bool = False,
) -> None:
    """
    Save a mapping as a `key = value` file, one entry per line.

    Args:
        path (Path): The path where the file will be saved.
        data (Dict[str, KeyValue]): The entries to save.
        encoding (str, optional): The encoding to be used when writing the file. Defaults to "utf-8".
        sort_keys (bool, optional): Whether the keys are written in sorted order. Defaults to False.
    """
    keys = sorted(data) if sort_keys else list(data)

    with open(path, "w", encoding=encoding, newline="\n") as file:
        for key in keys:
            file.write(f"{key} = {format_value(data[key])}\n")
