"""End-to-end check over hand-written 'model-style' completions.

These mimic what a competent instruction-tuned model returns for the
"interesting and complicated" request: CTEs, window functions, nested
sub-selects, set operators, CASE arithmetic, prose wrappers, and code
fences. Every extracted query must parse, resolve, profile, and execute
cleanly on the embedded engine against the bundled sample data.
"""

from __future__ import annotations

from pathlib import Path

import pytest

from sqlsynth.coverage import profile_query
from sqlsynth.execution import EngineSpec, SqliteSession, execute_batch, restrict_dataset
from sqlsynth.llmgen import extract_sql
from sqlsynth.records import make_record
from sqlsynth.validation import validate_relevance, validate_syntax

SAMPLE_DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "tpch_sample"

COMPLETIONS = [
    # window function over a join, fenced
    """Here's a ranking of customers by their total spend within each nation:

```sql
SELECT c_name, n_name, SUM(o_totalprice) AS spend,
       RANK() OVER (PARTITION BY n_name ORDER BY SUM(o_totalprice) DESC) AS spend_rank
FROM customer
INNER JOIN nation ON c_nationkey = n_nationkey
INNER JOIN orders ON o_custkey = c_custkey
GROUP BY c_name, n_name
ORDER BY n_name, spend_rank
```""",
    # CTE feeding an aggregate, prose wrapper
    """You can use a common table expression:

WITH revenue AS (
    SELECT l_suppkey, SUM(l_extendedprice * (1 - l_discount)) AS total_revenue
    FROM lineitem
    GROUP BY l_suppkey
)
SELECT s_name, total_revenue
FROM supplier INNER JOIN revenue ON s_suppkey = revenue.l_suppkey
WHERE total_revenue > (SELECT AVG(total_revenue) FROM revenue)
ORDER BY total_revenue DESC;""",
    # correlated sub-select with EXISTS
    """```sql
SELECT p_brand, p_type
FROM part
WHERE EXISTS (
    SELECT 1 FROM partsupp
    WHERE ps_partkey = p_partkey AND ps_supplycost < 500
)
ORDER BY p_brand
LIMIT 20
```""",
    # set operation with CASE arithmetic
    """```sql
SELECT n_name AS place, COUNT(*) AS members FROM nation GROUP BY n_name
UNION ALL
SELECT r_name AS place, COUNT(*) AS members FROM region GROUP BY r_name
ORDER BY members DESC, place
```""",
    # nested derived table plus HAVING
    """One option:

```sql
SELECT big.o_custkey, COUNT(*) AS big_orders
FROM (SELECT o_custkey, o_totalprice FROM orders WHERE o_totalprice > 50000) big
GROUP BY big.o_custkey
HAVING COUNT(*) > 1
```""",
    # scalar functions, BETWEEN, IN, LIKE all at once
    """```sql
SELECT l_shipmode,
       CASE WHEN l_quantity BETWEEN 10 AND 40 THEN 'mid' ELSE 'edge' END AS band,
       COUNT(*) AS n
FROM lineitem
WHERE l_returnflag IN ('A', 'R') AND l_comment NOT LIKE '%slow%'
GROUP BY l_shipmode, band
```""",
    # window frame with running total
    """```sql
SELECT o_orderdate, o_totalprice,
       SUM(o_totalprice) OVER (ORDER BY o_orderdate
                               ROWS BETWEEN UNBOUNDED PRECEDING AND CURRENT ROW) AS running
FROM orders
ORDER BY o_orderdate
LIMIT 50
```""",
    # substring + distinct projection aliases reused downstream
    """```sql
SELECT DISTINCT SUBSTRING(c_phone, 1, 2) AS country_code, COUNT(*) AS customers
FROM customer
GROUP BY country_code
ORDER BY customers DESC
```""",
]


@pytest.fixture(scope="module")
def loaded_session(tpch_catalog_inferred):
    session = SqliteSession(":memory:")
    restrict_dataset(tpch_catalog_inferred, SAMPLE_DATA_DIR, session, 40_000)
    yield session
    session.close()


def extracted_queries():
    queries = []
    for completion in COMPLETIONS:
        queries.extend(extract_sql(completion))
    return queries


def test_every_completion_yields_sql():
    assert len(extracted_queries()) == len(COMPLETIONS)


@pytest.mark.parametrize("sql", extracted_queries())
def test_parses_validates_profiles(sql, tpch_catalog_inferred):
    tree = validate_syntax(sql)
    assert validate_relevance(tree, tpch_catalog_inferred) == []
    profile = profile_query(sql.rstrip(";"), tpch_catalog_inferred)
    assert profile.clause_counts["select"] >= 1


def test_executes_on_embedded_engine(loaded_session, tpch_catalog_inferred):
    records = [
        make_record(sql.rstrip(";"), "mechanical", "realistic") for sql in extracted_queries()
    ]
    engine = EngineSpec(engine_id="sqlite-real", driver="sqlite")
    labels = execute_batch(records, engine, timeout_ms=30_000, session=loaded_session)
    failures = [(label.query_id, label.error) for label in labels if label.error]
    assert not failures, failures
