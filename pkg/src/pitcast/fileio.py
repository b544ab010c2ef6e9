"""CSV and config-file formats.

Snapshot CSV      obligor_id,ttc_pd,defaulted[,grade]   (defaulted is 0 or 1)
TTC curve CSV     obligor_id,horizon,ttc_pd              (long format)
Matrix CSV        header of grade labels (optionally led by a corner cell),
                  then one row per source grade: from_grade,p1,...,pk.
                  The last grade is the default state.
Config            flat key=value lines; '#' starts a comment.

Floats are written with 12 significant digits and a '.' decimal point; NaN
is written as an empty field.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import InputFormatError, PitcastError
from .factor import PortfolioSnapshot
from .ttc import TransitionMatrix, TtcCurve, validate_matrix

FLOAT_FORMAT = "%.12g"
SNAPSHOT_COLUMNS = ("obligor_id", "ttc_pd", "defaulted")


def _read_rows(path) -> list[list[str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise InputFormatError(f"cannot read file: {exc.strerror or exc}", path=path) from exc
    if not rows:
        raise InputFormatError("file is empty", path=path)
    return [[c.strip() for c in row] for row in rows]


def _parse_float(text: str, path, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InputFormatError(f"not a number: {text!r}", path=path, row=row, column=column) from None
    if not math.isfinite(value):
        raise InputFormatError(f"not a finite number: {text!r}", path=path, row=row, column=column)
    return value


def _parse_int(text: str, path, row: int, column: str) -> int:
    value = _parse_float(text, path, row, column)
    if value != int(value):
        raise InputFormatError(f"expected an integer, got {text!r}", path=path, row=row, column=column)
    return int(value)


def _header_index(header, required, path) -> dict:
    missing = [c for c in required if c not in header]
    if missing:
        raise InputFormatError(f"missing column(s) {', '.join(missing)}; header is {','.join(header)}", path=path, row=1)
    return {name: header.index(name) for name in header}


def read_snapshot_table(path) -> tuple[PortfolioSnapshot, list[str] | None]:
    """Read a snapshot CSV. Returns the snapshot and the grade column if present."""
    rows = _read_rows(path)
    idx = _header_index(rows[0], SNAPSHOT_COLUMNS, path)
    ids, pds, flags, grades = [], [], [], []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(rows[0]):
            raise InputFormatError(f"expected {len(rows[0])} fields, got {len(row)}", path=path, row=r)
        ids.append(row[idx["obligor_id"]])
        pds.append(_parse_float(row[idx["ttc_pd"]], path, r, "ttc_pd"))
        flag = _parse_int(row[idx["defaulted"]], path, r, "defaulted")
        if flag not in (0, 1):
            raise InputFormatError(f"defaulted must be 0 or 1, got {flag}", path=path, row=r, column="defaulted")
        flags.append(flag)
        if "grade" in idx:
            grades.append(row[idx["grade"]])
    if not ids:
        raise InputFormatError("snapshot has no obligor rows", path=path)
    try:
        snap = PortfolioSnapshot(np.array(pds), sum(flags), tuple(ids))
    except PitcastError as exc:
        raise type(exc)(f"{path}: {exc}") from exc
    return snap, (grades if "grade" in idx else None)


def read_snapshot(path) -> PortfolioSnapshot:
    return read_snapshot_table(path)[0]


def write_snapshot(path, snapshot: PortfolioSnapshot, defaulted=None, grades=None) -> None:
    """Write a snapshot; ``defaulted`` flags default to the first ``defaults`` obligors."""
    if defaulted is None:
        defaulted = np.zeros(snapshot.n, dtype=int)
        defaulted[: snapshot.defaults] = 1
    cols = {
        "obligor_id": list(snapshot.obligor_ids),
        "ttc_pd": snapshot.ttc_pds,
        "defaulted": np.asarray(defaulted, dtype=int),
    }
    if grades is not None:
        cols["grade"] = list(grades)
    write_table(path, pd.DataFrame(cols))


def read_transition_matrix(path) -> TransitionMatrix:
    rows = _read_rows(path)
    header = rows[0]
    body = rows[1:]
    k = len(body)
    if len(header) == k + 1:
        header = header[1:]
    if len(header) != k:
        raise InputFormatError(f"header lists {len(header)} grades but there are {k} rows", path=path, row=1)
    probs = np.empty((k, k))
    for r, row in enumerate(body, start=2):
        if len(row) != k + 1:
            raise InputFormatError(f"expected {k + 1} fields, got {len(row)}", path=path, row=r)
        if row[0] != header[r - 2]:
            raise InputFormatError(
                f"row label {row[0]!r} does not match grade {header[r - 2]!r}", path=path, row=r, column="from_grade"
            )
        for j, text in enumerate(row[1:]):
            probs[r - 2, j] = _parse_float(text, path, r, header[j])
    return validate_matrix(TransitionMatrix(tuple(header), probs))


def write_transition_matrix(path, m: TransitionMatrix) -> None:
    df = pd.DataFrame(m.probs, columns=list(m.grades))
    df.insert(0, "from_grade", list(m.grades))
    write_table(path, df)


def read_ttc_curves(path) -> dict[str, TtcCurve]:
    rows = _read_rows(path)
    idx = _header_index(rows[0], ("obligor_id", "horizon", "ttc_pd"), path)
    per = {}
    for r, row in enumerate(rows[1:], start=2):
        oid = row[idx["obligor_id"]]
        h = _parse_int(row[idx["horizon"]], path, r, "horizon")
        per.setdefault(oid, {})[h] = _parse_float(row[idx["ttc_pd"]], path, r, "ttc_pd")
    curves = {}
    for oid, by_h in per.items():
        if sorted(by_h) != list(range(1, len(by_h) + 1)):
            raise InputFormatError(f"obligor {oid!r} must have horizons 1..{len(by_h)} without gaps", path=path)
        try:
            curves[oid] = TtcCurve([by_h[h] for h in range(1, len(by_h) + 1)])
        except PitcastError as exc:
            raise type(exc)(f"{path}: obligor {oid!r}: {exc}") from exc
    return curves


def table_to_csv(df: pd.DataFrame) -> str:
    buf = io.StringIO()
    df.to_csv(buf, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
    return buf.getvalue()


def write_table(path, df: pd.DataFrame) -> None:
    """Write ``df`` as CSV; byte-identical for identical input."""
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(table_to_csv(df), encoding="utf-8")
    except OSError as exc:
        raise InputFormatError(f"cannot write file: {exc.strerror or exc}", path=path) from exc


def read_table(path) -> pd.DataFrame:
    """Read back a CSV written by :func:`write_table`."""
    try:
        return pd.read_csv(path, keep_default_na=False, na_values=[""], dtype={"obligor_id": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise InputFormatError(f"cannot parse CSV: {exc}", path=path) from exc


def read_config(path) -> dict[str, str]:
    """Parse a flat ``key = value`` file. Keys are normalized to snake_case."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputFormatError(f"cannot read config: {exc.strerror or exc}", path=path) from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputFormatError(f"expected key=value, got {raw.strip()!r}", path=path, row=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise InputFormatError("empty key", path=path, row=lineno)
        out[key.replace("-", "_").lower()] = value
    return out
