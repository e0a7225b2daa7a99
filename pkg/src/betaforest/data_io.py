"""CSV ingestion with schema inference and validation.

Files are UTF-8, comma-separated, header row, '.' decimal. The outcome
column must lie strictly inside (0,1). Integer-valued columns with few
distinct values default to categorical unless a hint says otherwise.
"""

import csv

import numpy as np

from .dataset import ColumnKind, ColumnSchema, Dataset

__all__ = ["load_csv", "load_features", "CsvFormatError"]

CATEGORICAL_CARDINALITY_LIMIT = 10


class CsvFormatError(ValueError):
    pass


def _read_table(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file, expected a header row") from None
        rows = list(reader)
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise CsvFormatError(f"{path}: duplicate column names {dupes}")
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise CsvFormatError(f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}")
        for j, cell in enumerate(row):
            if cell.strip() == "":
                raise CsvFormatError(f"{path}: missing value at row {i + 2}, column {header[j]!r}")
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    return header, rows


def _parse_float(cell, path, row, col):
    try:
        return float(cell)
    except ValueError:
        raise CsvFormatError(f"{path}: unparseable cell {cell!r} at row {row}, column {col!r}") from None


def _label(v):
    """Canonical string label for a category value (1.0 -> '1')."""
    v = float(v)
    return str(int(v)) if v.is_integer() else str(v)


def _infer_kind(values):
    """Categorical iff all cells are integers with few distinct values."""
    distinct = sorted(set(values))
    if all(float(v).is_integer() for v in distinct) and len(distinct) <= CATEGORICAL_CARDINALITY_LIMIT:
        return ColumnKind.CATEGORICAL
    return ColumnKind.NUMERIC


def load_csv(path, outcome, schema_hints=None):
    """Load a dataset; outcome names the target column.

    schema_hints maps column name -> ColumnKind (or its string value)
    and overrides inference.
    """
    hints = {k: ColumnKind(v) for k, v in (schema_hints or {}).items()}
    header, rows = _read_table(path)
    if outcome not in header:
        raise CsvFormatError(f"{path}: outcome column {outcome!r} not found")
    y_col = header.index(outcome)
    y = np.array([_parse_float(r[y_col], path, i + 2, outcome) for i, r in enumerate(rows)])
    bad = np.flatnonzero((y <= 0.0) | (y >= 1.0) | ~np.isfinite(y))
    if bad.size:
        shown = ", ".join(str(int(b) + 2) for b in bad[:10])
        raise CsvFormatError(
            f"{path}: outcome values must lie strictly inside (0,1); offending rows: {shown}"
            + ("..." if bad.size > 10 else "")
        )
    schema = []
    columns = []
    for j, name in enumerate(header):
        if j == y_col:
            continue
        raw = [r[j] for r in rows]
        values = [_parse_float(c, path, i + 2, name) for i, c in enumerate(raw)]
        kind = hints.get(name, _infer_kind(values))
        if kind is ColumnKind.CATEGORICAL:
            cats = tuple(_label(c) for c in sorted(set(values)))
            lookup = {c: k for k, c in enumerate(cats)}
            codes = [lookup[_label(v)] for v in values]
            schema.append(ColumnSchema(name, ColumnKind.CATEGORICAL, cats))
            columns.append(np.asarray(codes, dtype=np.float64))
        else:
            schema.append(ColumnSchema(name, kind))
            columns.append(np.asarray(values, dtype=np.float64))
    return Dataset(np.column_stack(columns), y, schema)


def load_features(path, schema, outcome=None):
    """Load a CSV and conform it to a trained model's feature schema.

    Columns are matched by name; categorical labels unseen at training
    time get code -1 (they route right at subset splits). Returns
    (X, y) with y None when no outcome column is requested.
    """
    header, rows = _read_table(path)
    missing = [c.name for c in schema if c.name not in header]
    if missing:
        raise CsvFormatError(f"{path}: missing feature columns {missing}")
    y = None
    if outcome is not None:
        if outcome not in header:
            raise CsvFormatError(f"{path}: outcome column {outcome!r} not found")
        ycol = header.index(outcome)
        y = np.array([_parse_float(r[ycol], path, i + 2, outcome) for i, r in enumerate(rows)])
        bad = np.flatnonzero((y <= 0.0) | (y >= 1.0) | ~np.isfinite(y))
        if bad.size:
            shown = ", ".join(str(int(b) + 2) for b in bad[:10])
            raise CsvFormatError(f"{path}: outcome values must lie strictly inside (0,1); offending rows: {shown}")
    cols = []
    for c in schema:
        j = header.index(c.name)
        values = [_parse_float(r[j], path, i + 2, c.name) for i, r in enumerate(rows)]
        if c.kind is ColumnKind.CATEGORICAL:
            lookup = {lab: k for k, lab in enumerate(c.categories)}
            codes = [lookup.get(_label(v), -1) for v in values]
            cols.append(np.asarray(codes, dtype=np.float64))
        else:
            cols.append(np.asarray(values, dtype=np.float64))
    return np.column_stack(cols), y
