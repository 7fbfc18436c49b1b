from __future__ import annotations

from pathlib import Path

import pytest

from sqlsynth.errors import EngineConnectionError, LoadError
from sqlsynth.execution import (
    BUCKET_1M_5M,
    BUCKET_1S_1M,
    BUCKET_GT_5M,
    BUCKET_LT_1S,
    EngineSpec,
    RuntimeLabel,
    SqliteSession,
    apply_retention,
    bucket_runtime,
    connect,
    execute_batch,
    restrict_dataset,
)
from sqlsynth.records import make_record

SAMPLE_DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "tpch_sample"


def label(ms, rows=1, timed_out=False, error=None):
    return RuntimeLabel(
        query_id="q", engine_id="e", runtime_ms=ms, row_count=rows, timed_out=timed_out,
        error=error,
    )


class TestBuckets:
    @pytest.mark.parametrize(
        "ms,expected",
        [
            (0, BUCKET_LT_1S),
            (500, BUCKET_LT_1S),
            (999, BUCKET_LT_1S),
            (1_000, BUCKET_1S_1M),
            (59_999, BUCKET_1S_1M),
            (60_000, BUCKET_1M_5M),
            (299_999, BUCKET_1M_5M),
            (300_000, BUCKET_GT_5M),
            (600_000, BUCKET_GT_5M),
        ],
    )
    def test_boundaries(self, ms, expected):
        assert bucket_runtime(label(ms)) == expected

    def test_timed_out_ten_minutes(self):
        assert bucket_runtime(label(600_000, rows=None, timed_out=True)) == BUCKET_GT_5M


class TestRetention:
    def test_fast_empty_dropped(self):
        kept, dropped = apply_retention([label(3_000, rows=0)])
        assert not kept
        assert len(dropped) == 1 and "empty" in dropped[0][1]

    def test_slow_empty_kept(self):
        kept, dropped = apply_retention([label(12_000, rows=0)])
        assert len(kept) == 1 and not dropped

    def test_boundary_exactly_threshold_kept(self):
        kept, _ = apply_retention([label(10_000, rows=0)])
        assert len(kept) == 1

    def test_just_below_threshold_dropped(self):
        _, dropped = apply_retention([label(9_999, rows=0)])
        assert len(dropped) == 1

    def test_fast_nonempty_kept(self):
        kept, _ = apply_retention([label(100, rows=500)])
        assert len(kept) == 1

    def test_errored_dropped_with_reason(self):
        kept, dropped = apply_retention([label(50, rows=None, error="boom")])
        assert not kept
        assert dropped[0][1] == "error: boom"

    def test_kept_invariant(self):
        labels = [label(ms, rows=rows) for ms in (100, 9_999, 10_000) for rows in (0, 3)]
        kept, _ = apply_retention(labels)
        for item in kept:
            assert item.row_count >= 1 or item.runtime_ms >= 10_000


class TestSqliteExecution:
    def _engine(self):
        return EngineSpec(engine_id="sqlite-mem", driver="sqlite")

    def _session_with_table(self):
        session = SqliteSession(":memory:")
        session.executescript(
            "CREATE TABLE region (r_regionkey integer, r_name char(25));"
        )
        session.executemany(
            "INSERT INTO region VALUES (?, ?)",
            [(i, f"R{i}") for i in range(5)],
        )
        return session

    def test_count_query(self):
        session = self._session_with_table()
        records = [make_record("SELECT COUNT(*) FROM region", "mechanical", "s")]
        labels = execute_batch(records, self._engine(), timeout_ms=5_000, session=session)
        assert labels[0].row_count == 1
        assert labels[0].runtime_ms >= 0
        assert not labels[0].timed_out and labels[0].error is None

    def test_row_counts_consume_results(self):
        session = self._session_with_table()
        records = [make_record("SELECT r_name FROM region", "mechanical", "s")]
        labels = execute_batch(records, self._engine(), timeout_ms=5_000, session=session)
        assert labels[0].row_count == 5

    def test_error_query_is_data_not_exception(self):
        session = self._session_with_table()
        records = [
            make_record("SELECT ghost FROM region", "mechanical", "s"),
            make_record("SELECT COUNT(*) FROM region", "mechanical", "s"),
        ]
        labels = execute_batch(records, self._engine(), timeout_ms=5_000, session=session)
        assert labels[0].error is not None and labels[0].row_count is None
        assert labels[1].error is None  # batch continued

    def test_timeout_clamps_runtime(self):
        session = SqliteSession(":memory:")
        session.executescript("CREATE TABLE n (x integer);")
        session.executemany("INSERT INTO n VALUES (?)", [(i,) for i in range(300)])
        slow = make_record(
            "SELECT COUNT(*) FROM n a, n b, n c, n d WHERE a.x + b.x + c.x + d.x > 0",
            "mechanical",
            "s",
        )
        labels = execute_batch([slow], self._engine(), timeout_ms=150, session=session)
        assert labels[0].timed_out
        assert labels[0].runtime_ms == 150
        assert labels[0].row_count is None

    def test_rerun_same_row_counts(self):
        engine = EngineSpec(engine_id="sqlite-mem", driver="sqlite")
        record = make_record(
            "SELECT r_regionkey FROM region WHERE r_regionkey < 3", "mechanical", "s"
        )
        for _ in range(2):
            session = self._session_with_table()
            labels = execute_batch([record], engine, timeout_ms=5_000, session=session)
            assert labels[0].row_count == 3

    def test_unreachable_engine(self, tmp_path):
        engine = EngineSpec(
            engine_id="bad",
            driver="sqlite",
            options={"database": str(tmp_path / "missing" / "nope.db")},
        )
        with pytest.raises(EngineConnectionError):
            connect(engine)

    def test_unknown_driver(self):
        with pytest.raises(EngineConnectionError):
            connect(EngineSpec(engine_id="x", driver="warp"))


class _FakeCursor:
    def __init__(self, rows, fail=False):
        self._rows = list(rows)
        self._fail = fail

    def execute(self, sql):
        if self._fail:
            raise RuntimeError("fake engine rejected the query")

    def fetchmany(self, n):
        chunk, self._rows = self._rows[:n], self._rows[n:]
        return chunk


class _FakeConn:
    def __init__(self, rows, fail=False):
        self.rows = rows
        self.fail = fail
        self.closed = False

    def cursor(self):
        return _FakeCursor(self.rows, self.fail)

    def close(self):
        self.closed = True


class _FakeDbApi:
    def __init__(self, rows, fail=False, refuse=False):
        self.rows = rows
        self.fail = fail
        self.refuse = refuse

    def connect(self, **kwargs):
        if self.refuse:
            raise ConnectionError("connection refused")
        return _FakeConn(self.rows, self.fail)


class TestDbApiDriver:
    def test_row_counting(self):
        engine = EngineSpec(
            engine_id="presto-w1",
            driver="dbapi",
            options={"module": "fake", "module_obj": _FakeDbApi(rows=[(1,)] * 7)},
        )
        labels = execute_batch(
            [make_record("SELECT 1", "mechanical", "s")], engine, timeout_ms=2_000
        )
        assert labels[0].row_count == 7

    def test_query_error_captured(self):
        engine = EngineSpec(
            engine_id="presto-w1",
            driver="dbapi",
            options={"module": "fake", "module_obj": _FakeDbApi(rows=[], fail=True)},
        )
        labels = execute_batch(
            [make_record("SELECT 1", "mechanical", "s")], engine, timeout_ms=2_000
        )
        assert "rejected" in labels[0].error

    def test_connect_failure(self):
        engine = EngineSpec(
            engine_id="presto-w1",
            driver="dbapi",
            options={"module": "fake", "module_obj": _FakeDbApi(rows=[], refuse=True)},
        )
        with pytest.raises(EngineConnectionError):
            execute_batch([make_record("SELECT 1", "mechanical", "s")], engine)


class TestRestrictDataset:
    def test_loads_sample_capped(self, tpch_catalog_inferred):
        session = SqliteSession(":memory:")
        counts = restrict_dataset(tpch_catalog_inferred, SAMPLE_DATA_DIR, session, 40_000)
        assert counts["region"] == 5
        assert counts["nation"] == 25
        assert counts["lineitem"] > 100

    def test_cap_truncates(self, tpch_catalog_inferred):
        session = SqliteSession(":memory:")
        counts = restrict_dataset(tpch_catalog_inferred, SAMPLE_DATA_DIR, session, 10)
        assert all(count <= 10 for count in counts.values())
        assert counts["lineitem"] == 10

    def test_zero_cap_rejected(self, tpch_catalog_inferred):
        session = SqliteSession(":memory:")
        with pytest.raises(LoadError):
            restrict_dataset(tpch_catalog_inferred, SAMPLE_DATA_DIR, session, 0)

    def test_missing_file_rejected(self, tpch_catalog_inferred, tmp_path):
        session = SqliteSession(":memory:")
        with pytest.raises(LoadError):
            restrict_dataset(tpch_catalog_inferred, tmp_path, session, 100)

    def test_loaded_data_queryable(self, tpch_catalog_inferred):
        session = SqliteSession(":memory:")
        restrict_dataset(tpch_catalog_inferred, SAMPLE_DATA_DIR, session, 40_000)
        rows, timed_out, error = session.run(
            "SELECT n_name FROM nation INNER JOIN region ON n_regionkey = r_regionkey "
            "WHERE r_name = 'EUROPE'",
            5_000,
        )
        assert error is None and not timed_out
        assert rows == 5  # France, Germany, Romania, Russia, United Kingdom

    def test_csv_fallback(self, tmp_path):
        from sqlsynth.schema import ingest_ddl

        catalog = ingest_ddl("CREATE TABLE t (a integer, b varchar(5))")
        (tmp_path / "t.csv").write_text("a,b\n1,x\n2,y\n3,z\n", encoding="utf-8")
        session = SqliteSession(":memory:")
        counts = restrict_dataset(catalog, tmp_path, session, 2)
        assert counts == {"t": 2}


class TestEngineValueSampler:
    def test_samples_from_loaded_engine(self, tpch_catalog_inferred):
        from sqlsynth.execution import EngineValueSampler
        from sqlsynth.schema import profile_columns

        session = SqliteSession(":memory:")
        restrict_dataset(tpch_catalog_inferred, SAMPLE_DATA_DIR, session, 40_000)
        sampler = EngineValueSampler(session)
        values = sampler.sample("region", "r_name", 3)
        assert values == ["AFRICA", "AMERICA", "ASIA"]

        profiled = profile_columns(tpch_catalog_inferred, sampler, sample_cap=500)
        flag = profiled.table("lineitem").column("l_returnflag").metadata
        assert flag.enumerated_values == ["A", "N", "R"]
        session.close()


class TestBucketTotality:
    def test_every_nonnegative_duration_buckets(self):
        from hypothesis import given, settings
        from hypothesis import strategies as st

        @given(st.integers(min_value=0, max_value=10**12))
        @settings(max_examples=300, deadline=None)
        def run(ms):
            bucket = bucket_runtime(label(ms))
            assert bucket in (BUCKET_LT_1S, BUCKET_1S_1M, BUCKET_1M_5M, BUCKET_GT_5M)
            if ms < 1_000:
                assert bucket == BUCKET_LT_1S
            elif ms < 60_000:
                assert bucket == BUCKET_1S_1M
            elif ms < 300_000:
                assert bucket == BUCKET_1M_5M
            else:
                assert bucket == BUCKET_GT_5M

        run()
