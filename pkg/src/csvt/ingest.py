"""Delimited-text loading and the real-data benchmark presets."""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .estimator import EstimateReport, TnRule, csvt


class CsvFormatError(ValueError):
    """Malformed input file; the message carries the offending location."""


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class CsvSpec:
    delimiter: str = ","
    has_header: bool = False
    label_column: int | None = None  # negative indices count from the end
    orientation: str = "rows"  # "rows": one sample per line; "cols": one sample per column

    def __post_init__(self):
        if len(self.delimiter) != 1 or not (self.delimiter.isprintable() or self.delimiter == "\t"):
            raise ValueError(f"delimiter must be a single printable character, got {self.delimiter!r}")
        if self.orientation not in ("rows", "cols"):
            raise ValueError(f"orientation must be 'rows' or 'cols', got {self.orientation!r}")


def load_csv(path, spec: CsvSpec = CsvSpec()) -> np.ndarray:
    """Read a numeric table into a ``p x n`` matrix (samples as columns).

    Blank lines are skipped.  With ``orientation="rows"`` each line is a
    sample and the table is transposed; with ``"cols"`` each line is a
    variable.  The label column, if given, is dropped before parsing.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    rows: list[list[float]] = []
    width = None
    drop = None
    with path.open(newline="") as fh:
        reader = csv.reader(fh, delimiter=spec.delimiter)
        for lineno, fields in enumerate(reader, start=1):
            if not fields or all(not f.strip() for f in fields):
                continue
            if width is None:
                width = len(fields)
                drop = _label_index(spec.label_column, width, lineno)
                if spec.has_header:
                    continue
            elif len(fields) != width:
                raise CsvFormatError(
                    f"{path}:{lineno}: expected {width} fields, found {len(fields)}"
                )
            values = []
            for col, text in enumerate(fields, start=1):
                if col - 1 == drop:
                    continue
                try:
                    values.append(float(text))
                except ValueError:
                    raise CsvFormatError(
                        f"{path}:{lineno}: column {col}: not a number: {text.strip()!r}"
                    ) from None
            rows.append(values)
    if not rows or not rows[0]:
        raise CsvFormatError(f"{path}: no numeric data")
    table = np.array(rows, dtype=np.float64)
    if not np.isfinite(table).all():
        raise CsvFormatError(f"{path}: non-finite values in data")
    return np.ascontiguousarray(table.T) if spec.orientation == "rows" else table


def _label_index(label_column, width, lineno):
    if label_column is None:
        return None
    idx = label_column + width if label_column < 0 else label_column
    if not 0 <= idx < width:
        raise CsvFormatError(f"line {lineno}: label column {label_column} out of range for {width} fields")
    return idx


def estimate_file(path, spec: CsvSpec = CsvSpec(), tn: TnRule = "log", strategy: str = "auto") -> EstimateReport:
    return csvt(load_csv(path, spec), tn, strategy)


@dataclass(frozen=True)
class DatasetPreset:
    name: str
    expected_n: int
    expected_p: int
    true_k: int
    expected_k_hat: int
    # expected layout: measurement columns, then the class label last
    csv: CsvSpec = CsvSpec(label_column=-1)


PRESETS = {
    "iris": DatasetPreset("iris", 150, 4, 3, 2),
    "crab": DatasetPreset("crab", 200, 5, 2, 2),
    "usps": DatasetPreset("usps", 7291, 256, 10, 10),
    "poker": DatasetPreset("poker", 25010, 10, 10, 10),
}


@dataclass(frozen=True)
class PresetResult:
    preset: DatasetPreset
    status: str  # "PASS", "FAIL" or "SKIPPED"
    report: EstimateReport | None = None
    load_time: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == "PASS"


def preset_check(preset: DatasetPreset | str, path, spec: CsvSpec | None = None) -> PresetResult:
    """Estimate on a local copy of a benchmark dataset and compare with the
    recorded result.

    A missing file gives ``SKIPPED``; a file with the wrong shape raises
    :class:`DimensionMismatchError`.
    """
    if isinstance(preset, str):
        preset = PRESETS[preset]
    path = Path(path) if path is not None else None
    if path is None or not path.is_file():
        return PresetResult(preset, "SKIPPED")
    t0 = time.perf_counter()
    X = load_csv(path, spec or preset.csv)
    load_time = time.perf_counter() - t0
    p, n = X.shape
    if (n, p) != (preset.expected_n, preset.expected_p):
        raise DimensionMismatchError(
            f"{preset.name}: expected n={preset.expected_n}, p={preset.expected_p}; got n={n}, p={p}"
        )
    report = csvt(X)
    status = "PASS" if report.k_hat == preset.expected_k_hat else "FAIL"
    return PresetResult(preset, status, report, load_time)
