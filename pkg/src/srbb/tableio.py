"""Comment-header text files.

Every file starts with ``# key: value`` lines followed by plain CSV, so
``grep -v '^#'`` leaves something any CSV reader accepts.  Floats are written
with ``repr`` which round-trips exactly.
"""
from __future__ import annotations

import csv
import hashlib
import io

from .errors import ChecksumError


def fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def rows_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def checksum(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def dumps(header: dict, columns, rows, with_checksum: bool = True) -> str:
    body = rows_text(columns, rows)
    lines = [f"# {k}: {v}" for k, v in header.items()]
    if with_checksum:
        lines.append(f"# checksum: {checksum(body)}")
    return "\n".join(lines) + "\n" + body


def loads(text: str, verify: bool = True):
    """Return ``(header, columns, rows)`` with rows as lists of strings."""
    header = {}
    body_lines = []
    for line in text.splitlines(keepends=True):
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition(":")
            header[key.strip()] = val.strip()
        else:
            body_lines.append(line)
    body = "".join(body_lines)
    if verify and "checksum" in header and checksum(body) != header["checksum"]:
        raise ChecksumError("row checksum does not match header")
    reader = list(csv.reader(io.StringIO(body)))
    if not reader:
        return header, [], []
    return header, reader[0], reader[1:]


def write(path, header, columns, rows, with_checksum=True):
    with open(path, "w", newline="") as fh:
        fh.write(dumps(header, columns, rows, with_checksum))


def read(path, verify=True):
    with open(path) as fh:
        return loads(fh.read(), verify)
