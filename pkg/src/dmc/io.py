"""Matrix file formats.

CSV: one sample per line, ``,`` delimiter, ``.`` decimal point, LF line
endings, optional single header line.

Binary (``DMC1``): the 4-byte magic ``b"DMC1"``, then ``n`` and ``p`` as
little-endian uint32, then ``n * p`` little-endian float64 values in
row-major order.
"""
import csv
import io
import struct
from pathlib import Path

import numpy as np

from .exceptions import ParseError
from .validation import check_data_matrix

MAGIC = b"DMC1"
_HEADER = struct.Struct("<4sII")


def format_float(x):
    """Shortest round-trip text for a float."""
    return repr(float(x))


def _parse_csv(text, header, source):
    rows, width = [], None
    reader = csv.reader(io.StringIO(text, newline=""))
    for lineno, fields in enumerate(reader, start=1):
        if header and lineno == 1:
            continue
        if not fields or (len(fields) == 1 and not fields[0].strip()):
            continue
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise ParseError(
                f"{source}: ragged row at line {lineno}: expected {width} fields, got {len(fields)}",
                line=lineno,
            )
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            bad = next(f for f in fields if not _is_float(f))
            raise ParseError(f"{source}: non-numeric field {bad!r} at line {lineno}", line=lineno) from None
    if not rows:
        raise ParseError(f"{source}: no data rows")
    return np.array(rows, dtype=np.float64)


def _is_float(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def _parse_binary(data, source):
    if len(data) < _HEADER.size:
        raise ParseError(f"{source}: truncated header ({len(data)} bytes)", offset=len(data))
    magic, n, p = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ParseError(f"{source}: bad magic {magic!r}", offset=0)
    expected = _HEADER.size + 8 * n * p
    if len(data) < expected:
        raise ParseError(
            f"{source}: truncated payload at byte offset {len(data)}; expected {expected} bytes "
            f"for a {n}x{p} matrix",
            offset=len(data),
        )
    if len(data) > expected:
        raise ParseError(f"{source}: {len(data) - expected} trailing bytes after offset {expected}",
                         offset=expected)
    return np.frombuffer(data, dtype="<f8", count=n * p, offset=_HEADER.size).astype(np.float64).reshape(n, p)


def parse_matrix(data, header=False, source="<bytes>"):
    """Parse bytes in either format; ``DMC1`` is detected by its magic."""
    if data[:4] == MAGIC:
        return _parse_binary(data, source)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{source}: not UTF-8 text and no DMC1 magic ({exc.reason} at byte {exc.start})",
                         offset=exc.start) from None
    return _parse_csv(text, header, source)


def load_matrix(path, header=False):
    path = Path(path)
    X = parse_matrix(path.read_bytes(), header=header, source=str(path))
    return check_data_matrix(X, name=str(path))


def matrix_to_bytes(X):
    X = np.ascontiguousarray(X, dtype="<f8")
    if X.ndim != 2:
        raise ValueError("matrix must be 2-D")
    return _HEADER.pack(MAGIC, X.shape[0], X.shape[1]) + X.tobytes()


def matrix_to_csv(X, header=None):
    lines = [",".join(header)] if header else []
    lines.extend(",".join(format_float(v) for v in row) for row in np.asarray(X, dtype=np.float64))
    return "\n".join(lines) + "\n"


def save_matrix(path, X, fmt=None):
    """Write ``X`` as CSV when the path ends in ``.csv`` (or ``fmt="csv"``), else as DMC1."""
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "binary")
    if fmt == "csv":
        path.write_text(matrix_to_csv(X), encoding="utf-8", newline="\n")
    else:
        path.write_bytes(matrix_to_bytes(X))
    return path
