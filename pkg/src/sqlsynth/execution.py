"""Query execution against database engines: timing, timeouts, retention.

Two driver kinds: an in-process SQLite engine for CI and desk-scale runs,
and a generic DB-API driver that imports a configured module (Presto, Hive,
anything PEP 249) for real deployments. Runtime is wall clock around
statement execution plus full result consumption, measured serially per
engine so labels are uncontended.
"""

from __future__ import annotations

import importlib
import sqlite3
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EngineConnectionError, LoadError
from .schema import SchemaCatalog, render_create_statements

DEFAULT_TIMEOUT_MS = 600_000  # ten minutes
DEFAULT_MIN_EMPTY_RUNTIME_MS = 10_000  # empty results faster than this are dropped

BUCKET_LT_1S = "lt_1s"
BUCKET_1S_1M = "s1_to_1m"
BUCKET_1M_5M = "m1_to_5m"
BUCKET_GT_5M = "gt_5m"

#: Half-open, lower-inclusive runtime buckets in milliseconds.
_BUCKET_EDGES = (
    (1_000, BUCKET_LT_1S),
    (60_000, BUCKET_1S_1M),
    (300_000, BUCKET_1M_5M),
)


@dataclass
class EngineSpec:
    engine_id: str
    driver: str  # "sqlite" | "dbapi"
    options: dict = field(default_factory=dict)
    worker_count: int = 1  # informational, recorded with the labels

    def to_dict(self) -> dict:
        return {
            "engine_id": self.engine_id,
            "driver": self.driver,
            "options": self.options,
            "worker_count": self.worker_count,
        }


@dataclass
class RuntimeLabel:
    query_id: str
    engine_id: str
    runtime_ms: int
    row_count: int | None
    timed_out: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "runtime_ms": self.runtime_ms,
            "row_count": self.row_count,
            "timed_out": self.timed_out,
            "error": self.error,
        }


def bucket_runtime(label: RuntimeLabel) -> str:
    """Bucket per the partition [0,1s) [1s,1m) [1m,5m) [5m,inf)."""
    for edge, name in _BUCKET_EDGES:
        if label.runtime_ms < edge:
            return name
    return BUCKET_GT_5M


def apply_retention(labels, min_empty_runtime_ms: int = DEFAULT_MIN_EMPTY_RUNTIME_MS):
    """Split labels into (kept, dropped-with-reason).

    Empty-result labels faster than the threshold are dropped (they teach a
    cost model nothing), as are errored labels; everything else is kept.
    """
    kept: list[RuntimeLabel] = []
    dropped: list[tuple[RuntimeLabel, str]] = []
    for label in labels:
        if label.error is not None:
            dropped.append((label, f"error: {label.error}"))
        elif label.row_count == 0 and label.runtime_ms < min_empty_runtime_ms:
            dropped.append(
                (label, f"empty result in {label.runtime_ms} ms < {min_empty_runtime_ms} ms")
            )
        else:
            kept.append(label)
    return kept, dropped


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------


class SqliteSession:
    """One open SQLite connection; timeouts via progress-handler interrupt."""

    _PROGRESS_STEP = 5_000  # VM instructions between deadline checks

    def __init__(self, database: str):
        try:
            self.conn = sqlite3.connect(database)
        except sqlite3.Error as exc:
            raise EngineConnectionError(f"cannot open sqlite database {database!r}: {exc}")

    def run(self, sql: str, timeout_ms: int):
        """Execute and consume ``sql``; returns (row_count, timed_out, error)."""
        deadline = time.monotonic() + timeout_ms / 1000.0
        self.conn.set_progress_handler(lambda: 1 if time.monotonic() > deadline else 0,
                                       self._PROGRESS_STEP)
        try:
            cursor = self.conn.execute(sql)
            rows = 0
            while True:
                chunk = cursor.fetchmany(1024)
                if not chunk:
                    break
                rows += len(chunk)
            return rows, False, None
        except sqlite3.OperationalError as exc:
            if "interrupted" in str(exc).lower():
                return None, True, None
            return None, False, str(exc)
        except sqlite3.Error as exc:
            return None, False, str(exc)
        finally:
            self.conn.set_progress_handler(None, 0)

    def executescript(self, script: str):
        self.conn.executescript(script)

    def executemany(self, sql: str, rows):
        self.conn.executemany(sql, rows)
        self.conn.commit()

    def close(self):
        self.conn.close()


class DbApiSession:
    """Generic PEP 249 session; timeouts enforced by a watchdog thread that
    cancels/closes the cursor when the deadline passes."""

    def __init__(self, module: str, connect_args: dict, module_obj=None):
        dbapi = module_obj if module_obj is not None else importlib.import_module(module)
        try:
            self.conn = dbapi.connect(**connect_args)
        except Exception as exc:
            raise EngineConnectionError(f"cannot connect via {module}: {exc}")

    def run(self, sql: str, timeout_ms: int):
        result: dict = {}

        def work():
            try:
                cursor = self.conn.cursor()
                cursor.execute(sql)
                rows = 0
                while True:
                    chunk = cursor.fetchmany(1024)
                    if not chunk:
                        break
                    rows += len(chunk)
                result["rows"] = rows
            except Exception as exc:  # per-query failures are data, not errors
                result["error"] = str(exc)

        thread = threading.Thread(target=work, daemon=True)
        thread.start()
        thread.join(timeout_ms / 1000.0)
        if thread.is_alive():
            for method in ("cancel", "close"):
                try:
                    getattr(self.conn, method)()
                    break
                except Exception:
                    continue
            return None, True, None
        if "error" in result:
            return None, False, result["error"]
        return result.get("rows", 0), False, None

    def close(self):
        try:
            self.conn.close()
        except Exception:
            pass


class EngineValueSampler:
    """Column-value sampler backed by a live engine session.

    Satisfies the schema module's ValueSampler protocol so column profiling
    can run against data already loaded in an engine instead of flat files.
    """

    def __init__(self, session):
        self.session = session

    def sample(self, table: str, column: str, limit: int) -> list:
        sql = f"SELECT {column} FROM {table} LIMIT {int(limit)}"
        conn = self.session.conn
        if hasattr(conn, "execute"):  # sqlite3 connections execute directly
            cursor = conn.execute(sql)
        else:
            cursor = conn.cursor()
            cursor.execute(sql)
        return [row[0] for row in cursor.fetchall()]


def connect(engine: EngineSpec):
    """Open a session for ``engine``; EngineConnectionError when unreachable."""
    if engine.driver == "sqlite":
        return SqliteSession(engine.options.get("database", ":memory:"))
    if engine.driver == "dbapi":
        return DbApiSession(
            module=engine.options["module"],
            connect_args=engine.options.get("connect_args", {}),
            module_obj=engine.options.get("module_obj"),
        )
    raise EngineConnectionError(f"unknown driver kind {engine.driver!r}")


# ---------------------------------------------------------------------------
# Batch execution
# ---------------------------------------------------------------------------


def execute_batch(
    records,
    engine: EngineSpec,
    timeout_ms: int = DEFAULT_TIMEOUT_MS,
    session=None,
) -> list[RuntimeLabel]:
    """Run every record serially on ``engine`` and label it.

    The engine must be reachable at batch start (EngineConnectionError
    otherwise); per-query failures are captured in the labels and never
    abort the batch. Timed-out labels carry runtime equal to the timeout.
    """
    if timeout_ms <= 0:
        raise ValueError("timeout_ms must be > 0")
    own_session = session is None
    if own_session:
        session = connect(engine)
    try:
        labels = []
        for record in records:
            started = time.perf_counter()
            row_count, timed_out, error = session.run(record.sql, timeout_ms)
            elapsed_ms = int((time.perf_counter() - started) * 1000)
            if timed_out:
                elapsed_ms = timeout_ms
            labels.append(
                RuntimeLabel(
                    query_id=record.id,
                    engine_id=engine.engine_id,
                    runtime_ms=elapsed_ms,
                    row_count=row_count,
                    timed_out=timed_out,
                    error=error,
                )
            )
        return labels
    finally:
        if own_session:
            session.close()


# ---------------------------------------------------------------------------
# Test-database loading
# ---------------------------------------------------------------------------


def restrict_dataset(
    catalog: SchemaCatalog,
    data_dir: str | Path,
    session,
    max_rows_per_table: int,
) -> dict[str, int]:
    """Create the catalog's tables in ``session`` and load at most
    ``max_rows_per_table`` rows per table from ``<table>.tbl`` (pipe
    delimited) or ``<table>.csv`` files; returns loaded counts."""
    if max_rows_per_table < 1:
        raise LoadError(f"max_rows_per_table must be >= 1, got {max_rows_per_table}")
    data_dir = Path(data_dir)
    session.executescript("\n".join(render_create_statements(catalog)))
    counts: dict[str, int] = {}
    for table in catalog.tables:
        rows = _read_rows(data_dir, table.name, len(table.columns), max_rows_per_table)
        placeholders = ", ".join("?" for _ in table.columns)
        try:
            session.executemany(
                f"INSERT INTO {table.name} VALUES ({placeholders})", rows
            )
        except Exception as exc:
            raise LoadError(f"loading table {table.name!r} failed: {exc}") from exc
        counts[table.name] = len(rows)
    return counts


def runtime_bucket_rows(records) -> list[dict]:
    """Histogram rows (setting, engine, bucket, count) over labeled records,
    for the workload-balance report."""
    counts: dict[tuple[str, str, str], int] = {}
    for record in records:
        if record.origin == "mechanical":
            setting = "mechanical"
        else:
            ps = record.prompt_setting or {}
            setting = f"{ps.get('shots', '?')}-shot:{ps.get('bias', '?')}"
        for engine_id, label in sorted(record.labels.items()):
            bucket = bucket_runtime(
                RuntimeLabel(
                    query_id=record.id,
                    engine_id=engine_id,
                    runtime_ms=label["runtime_ms"],
                    row_count=label.get("row_count"),
                    timed_out=label.get("timed_out", False),
                    error=label.get("error"),
                )
            )
            key = (setting, engine_id, bucket)
            counts[key] = counts.get(key, 0) + 1
    bucket_order = {BUCKET_LT_1S: 0, BUCKET_1S_1M: 1, BUCKET_1M_5M: 2, BUCKET_GT_5M: 3}
    rows = [
        {"setting": setting, "engine": engine, "bucket": bucket, "count": count}
        for (setting, engine, bucket), count in sorted(
            counts.items(), key=lambda kv: (kv[0][0], kv[0][1], bucket_order[kv[0][2]])
        )
    ]
    return rows


def _read_rows(data_dir: Path, table: str, column_count: int, cap: int) -> list[tuple]:
    tbl_path = data_dir / f"{table}.tbl"
    csv_path = data_dir / f"{table}.csv"
    rows: list[tuple] = []
    if tbl_path.exists():
        with open(tbl_path, encoding="utf-8") as fh:
            for line in fh:
                if len(rows) >= cap:
                    break
                fields = line.rstrip("\n").split("|")
                if fields and fields[-1] == "":
                    fields = fields[:-1]  # .tbl files carry a trailing delimiter
                if len(fields) != column_count:
                    raise LoadError(
                        f"{tbl_path.name}: expected {column_count} fields, got {len(fields)}"
                    )
                rows.append(tuple(fields))
    elif csv_path.exists():
        import csv as _csv

        with open(csv_path, newline="", encoding="utf-8") as fh:
            reader = _csv.reader(fh)
            next(reader, None)  # header
            for fields in reader:
                if len(rows) >= cap:
                    break
                rows.append(tuple(fields))
    else:
        raise LoadError(f"no data file for table {table!r} in {data_dir}")
    return rows
