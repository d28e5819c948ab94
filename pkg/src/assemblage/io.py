"""CSV ingestion and flat-file output.

Input layouts (UTF-8, header row, ``.`` decimal separator):

components  ``date,<code1>,<code2>,...`` index levels
headline    ``date,value`` index levels
weights     ``code,weight`` headline weights (renormalized to sum to one)
grouping    ``code,group``
benchmarks  ``date,<name1>,...`` rates already in annualized percent;
            empty cells are missing

Dates are ``YYYY-MM`` or ``YYYY-MM-DD``. Floats are written with ``repr``
so files round-trip exactly and reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .transforms import GrowthPanel, PriceIndexPanel, month_str, to_month, to_months


def _read(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ConfigError(f"{path} is empty")
    return [c.strip() for c in rows[0]], rows[1:]


def _float(text: str, where: str) -> float:
    text = text.strip()
    if text == "" or text.upper() in ("NA", "NAN"):
        return np.nan
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{where}: {text!r} is not a number") from None


def read_dated(path) -> tuple[np.ndarray, np.ndarray, tuple]:
    """Read a ``date,col1,...`` file into (dates, values, column names)."""
    header, rows = _read(path)
    if len(header) < 2 or header[0].lower() != "date":
        raise ConfigError(f"{path}: first column must be 'date' followed by data columns")
    try:
        dates = to_months([r[0] for r in rows])
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    vals = np.empty((len(rows), len(header) - 1))
    for i, r in enumerate(rows):
        if len(r) != len(header):
            raise ConfigError(f"{path}: row {i + 2} has {len(r)} fields, header has {len(header)}")
        vals[i] = [_float(c, f"{path} row {i + 2}") for c in r[1:]]
    return dates, vals, tuple(header[1:])


def read_mapping(path, value_kind=float) -> dict:
    header, rows = _read(path)
    if len(header) != 2:
        raise ConfigError(f"{path}: expected two columns, got {header}")
    out = {}
    for i, r in enumerate(rows):
        if len(r) != 2:
            raise ConfigError(f"{path}: row {i + 2} must have two fields")
        key = r[0].strip()
        if key in out:
            raise ConfigError(f"{path}: duplicate code {key!r}")
        out[key] = _float(r[1], f"{path} row {i + 2}") if value_kind is float else r[1].strip()
    return out


def load_panel(components, headline, weights) -> PriceIndexPanel:
    """Build a panel from the three input files, trimmed to their common dates."""
    cd, cv, codes = read_dated(components)
    hd, hv, _ = read_dated(headline)
    w = read_mapping(weights)
    missing = [c for c in codes if c not in w]
    if missing:
        raise ConfigError(f"no headline weight for {', '.join(missing)}")
    hw = np.array([w[c] for c in codes], dtype=float)
    if np.any(hw < 0) or hw.sum() <= 0:
        raise ConfigError("headline weights must be nonnegative with a positive total")
    hw = hw / hw.sum()
    common, ic, ih = np.intersect1d(cd, hd, return_indices=True)
    if common.size == 0:
        raise ConfigError("component and headline files share no dates")
    return PriceIndexPanel(common, cv[ic], codes, hw, hv[ih, 0])


def load_benchmarks(path) -> GrowthPanel:
    d, v, names = read_dated(path)
    return GrowthPanel(d, v, None, names)


def load_grouping(path) -> dict:
    return read_mapping(path, value_kind=str)


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "" if np.isnan(x) else repr(x)
    if isinstance(x, np.datetime64):
        return month_str(x)
    return str(x)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) for x in r])
    return path


def write_dicts(path, rows: list[dict], header=None) -> Path:
    if header is None:
        header = list(dict.fromkeys(k for r in rows for k in r))
    return write_csv(path, header, [[r.get(k) for k in header] for r in rows])


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n",
                    encoding="utf-8")
    return path


def write_panel(out_dir, panel: PriceIndexPanel, *, benchmarks: GrowthPanel | None = None,
                grouping: dict | None = None) -> dict:
    """Write a panel in the input layout; returns the file paths by role."""
    out = Path(out_dir)
    dates = [month_str(d) for d in panel.dates]
    paths = {
        "components": write_csv(out / "components.csv", ["date", *panel.labels],
                                ([d, *row] for d, row in zip(dates, panel.levels))),
        "headline": write_csv(out / "headline.csv", ["date", "value"],
                              ([d, v] for d, v in zip(dates, panel.headline_levels))),
        "weights": write_csv(out / "weights.csv", ["code", "weight"],
                             zip(panel.labels, panel.headline_weights)),
    }
    if benchmarks is not None:
        paths["benchmarks"] = write_csv(
            out / "benchmarks.csv", ["date", *benchmarks.labels],
            ([month_str(d), *row] for d, row in zip(benchmarks.dates, benchmarks.rates)))
    if grouping is not None:
        paths["grouping"] = write_csv(out / "grouping.csv", ["code", "group"],
                                      ((c, grouping[c]) for c in panel.labels))
    return paths


def parse_month(text, what="date") -> np.datetime64:
    try:
        return to_month(text)
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}") from None
