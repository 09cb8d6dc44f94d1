"""CSV loading and preprocessing of CPCB station-day exports.

Rows without an AQI bucket are dropped first; remaining gaps in the seven
pollutant columns are filled with the column median of the kept rows.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .it2core import POLLUTANTS, TERMS, ParameterTable, term_name


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class RawRecord:
    station: str
    date: str
    values: Mapping[str, float | None]
    aqi: float | None = None
    bucket: str | None = None
    row: int = 0

    def __post_init__(self):
        if not self.station:
            raise ValueError("station id must be non-empty")


@dataclass(frozen=True)
class CleanRecord:
    station: str
    date: str
    values: Mapping[str, float]
    bucket: str
    aqi: float | None = None
    row: int = 0

    def __post_init__(self):
        for p in POLLUTANTS:
            v = self.values.get(p)
            if v is None or not math.isfinite(v) or v < 0:
                raise ValueError(f"row {self.row}: {p} must be a finite non-negative number, got {v!r}")
        if self.bucket not in TERMS:
            raise ValueError(f"row {self.row}: unknown AQI bucket {self.bucket!r}")


@dataclass
class ColumnReport:
    recognized: dict[str, str]
    ignored: list[str]
    row_errors: list[tuple[int, str]] = field(default_factory=list)


@dataclass
class DatasetStats:
    rows_in: int = 0
    rows_dropped: int = 0
    rows_kept: int = 0
    medians: dict[str, float | None] = field(default_factory=dict)
    missing_before: dict[str, int] = field(default_factory=dict)
    missing_after: dict[str, int] = field(default_factory=dict)
    impute_scope: str = "global"

    def to_dict(self) -> dict:
        return {
            "rows_in": self.rows_in,
            "rows_dropped": self.rows_dropped,
            "rows_kept": self.rows_kept,
            "impute_scope": self.impute_scope,
            "medians": self.medians,
            "missing_before": self.missing_before,
            "missing_after": self.missing_after,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [
            f"rows in:      {self.rows_in}",
            f"rows dropped: {self.rows_dropped} (missing AQI bucket)",
            f"rows kept:    {self.rows_kept}",
            f"imputation:   median, {self.impute_scope} scope",
            "",
            f"{'column':<8}{'median':>12}{'missing before':>16}{'after':>8}{'availability':>14}",
        ]
        for p in POLLUTANTS:
            med = self.medians.get(p)
            med_s = "-" if med is None else f"{med:.3f}"
            before = self.missing_before.get(p, 0)
            avail = 1 - before / self.rows_kept if self.rows_kept else 0.0
            lines.append(
                f"{p:<8}{med_s:>12}{before:>16}{self.missing_after.get(p, 0):>8}{avail:>14.3f}"
            )
        return "\n".join(lines) + "\n"


def _norm(name: str) -> str:
    return "".join(ch for ch in name if ch.isalnum()).lower()


_POLLUTANT_KEYS = {_norm(p): p for p in POLLUTANTS}


def _map_columns(header: Sequence[str]) -> ColumnReport:
    roles = {"date": "date", "datetime": "date", "aqi": "aqi",
             "aqibucket": "bucket", "bucket": "bucket", "aqicategory": "bucket"}
    by_key = {_norm(c): c for c in header}
    recognized: dict[str, str] = {}
    # StationId wins over City when both are present.
    station_col = by_key.get("stationid") or by_key.get("station") or by_key.get("city")
    if station_col:
        recognized["station"] = station_col
    ignored = []
    for col in header:
        key = _norm(col)
        if col == station_col:
            continue
        if key in _POLLUTANT_KEYS:
            recognized[_POLLUTANT_KEYS[key]] = col
        elif key in roles and roles[key] not in recognized:
            recognized[roles[key]] = col
        else:
            ignored.append(col)
    missing = [k for k in ("station", "date", *POLLUTANTS) if k not in recognized]
    if missing:
        raise DataError(f"missing mandatory columns: {', '.join(missing)}")
    return ColumnReport(recognized, ignored)


def _num(cell: str) -> float | None:
    cell = cell.strip()
    if not cell:
        return None
    v = float(cell)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {cell!r}")
    return v


def read_csv(stream: Iterable[str]) -> tuple[list[RawRecord], ColumnReport]:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("file is empty (no header row)") from None
    report = _map_columns(header)
    pos = {key: header.index(col) for key, col in report.recognized.items()}
    records = []
    for rowno, row in enumerate(reader, start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            row = row + [""] * (len(header) - len(row))
        try:
            values = {p: _num(row[pos[p]]) for p in POLLUTANTS}
            aqi = _num(row[pos["aqi"]]) if "aqi" in pos else None
            bucket_raw = row[pos["bucket"]].strip() if "bucket" in pos else ""
            bucket = term_name(bucket_raw) if bucket_raw else None
            station = row[pos["station"]].strip()
            records.append(RawRecord(station, row[pos["date"]].strip(), values, aqi, bucket, rowno))
        except (ValueError, KeyError) as exc:
            msg = exc.args[0] if exc.args else str(exc)
            report.row_errors.append((rowno, str(msg)))
    return records, report


def load_csv(path) -> tuple[list[RawRecord], ColumnReport]:
    with open(path, newline="", encoding="utf-8") as fh:
        return read_csv(fh)


def median(values: Sequence[float]) -> float:
    """Median; even counts average the two central values."""
    return statistics.median(values)


def preprocess(records: Sequence[RawRecord], impute_scope: str = "global") -> tuple[list[CleanRecord], DatasetStats]:
    if impute_scope not in ("global", "station"):
        raise ValueError(f"impute scope must be 'global' or 'station', got {impute_scope!r}")
    if not records:
        raise DataError("no records to preprocess")
    stats = DatasetStats(rows_in=len(records), impute_scope=impute_scope)
    kept = [r for r in records if r.bucket is not None]
    stats.rows_kept = len(kept)
    stats.rows_dropped = stats.rows_in - stats.rows_kept
    if not kept:
        raise DataError(f"all {stats.rows_in} rows lack an AQI bucket")

    stats.missing_before = {p: sum(r.values.get(p) is None for r in kept) for p in POLLUTANTS}
    global_med: dict[str, float | None] = {}
    for p in POLLUTANTS:
        present = [r.values[p] for r in kept if r.values.get(p) is not None]
        global_med[p] = median(present) if present else None
    stats.medians = dict(global_med)
    for p in POLLUTANTS:
        if global_med[p] is None and stats.missing_before[p]:
            raise DataError(f"column {p} is missing in every labelled row; median undefined")

    station_med: dict[tuple[str, str], float] = {}
    if impute_scope == "station":
        groups: dict[tuple[str, str], list[float]] = defaultdict(list)
        for r in kept:
            for p in POLLUTANTS:
                if r.values.get(p) is not None:
                    groups[(r.station, p)].append(r.values[p])
        station_med = {k: median(v) for k, v in groups.items()}

    out = []
    for r in kept:
        filled = {}
        for p in POLLUTANTS:
            v = r.values.get(p)
            if v is None:
                # A station with no readings for p falls back to the global median.
                v = station_med.get((r.station, p), global_med[p])
            filled[p] = v
        out.append(CleanRecord(r.station, r.date, filled, r.bucket, r.aqi, r.row))
    stats.missing_after = {p: sum(c.values[p] is None for c in out) for p in POLLUTANTS}
    return out, stats


def as_raw(records: Iterable[CleanRecord]) -> list[RawRecord]:
    return [RawRecord(c.station, c.date, dict(c.values), c.aqi, c.bucket, c.row) for c in records]


def validate_units(records: Iterable[CleanRecord], table: ParameterTable, factor: float = 1.5) -> list[str]:
    """Warnings for values outside [0, factor * top-term UMF right end]; data untouched."""
    bounds = {p: factor * table[(p, table.top_term(p))].umf.d for p in POLLUTANTS}
    warnings = []
    for r in records:
        for p in POLLUTANTS:
            v = r.values[p]
            if v < 0 or v > bounds[p]:
                warnings.append(
                    f"row {r.row} ({r.station} {r.date}): {p}={v:g} outside [0, {bounds[p]:g}]"
                )
    return warnings


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


OUTPUT_HEADER = ["StationId", "Date", *POLLUTANTS, "AQI", "AQI_Bucket"]


def write_clean_csv(records: Iterable[CleanRecord], stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(OUTPUT_HEADER)
    for r in records:
        w.writerow([r.station, r.date, *(_fmt(r.values[p]) for p in POLLUTANTS), _fmt(r.aqi), r.bucket])


def clean_csv_text(records: Iterable[CleanRecord]) -> str:
    buf = io.StringIO()
    write_clean_csv(records, buf)
    return buf.getvalue()


def load_clean(path) -> list[CleanRecord]:
    """Read a cleaned CSV (every pollutant present, bucket present)."""
    raw, report = load_csv(path)
    if report.row_errors:
        rowno, msg = report.row_errors[0]
        raise DataError(f"{path}: row {rowno}: {msg}")
    out = []
    for r in raw:
        if r.bucket is None or any(r.values[p] is None for p in POLLUTANTS):
            raise DataError(f"{path}: row {r.row} is not clean (run preprocess first)")
        out.append(CleanRecord(r.station, r.date, dict(r.values), r.bucket, r.aqi, r.row))
    return out


def sample_path() -> Path:
    from importlib import resources

    return Path(str(resources.files("it2aqi.data").joinpath("sample_station_day.csv")))


__all__ = [
    "CleanRecord",
    "ColumnReport",
    "DataError",
    "DatasetStats",
    "RawRecord",
    "as_raw",
    "load_clean",
    "load_csv",
    "median",
    "preprocess",
    "read_csv",
    "validate_units",
    "write_clean_csv",
]
