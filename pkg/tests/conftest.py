from __future__ import annotations

from pathlib import Path

import pytest

from sqlsynth.schema import ingest_ddl, infer_foreign_keys

REPO_ROOT = Path(__file__).resolve().parent.parent
TPCH_DDL_PATH = REPO_ROOT / "data" / "tpch_schema.sql"

TINY_DDL = """
CREATE TABLE region (
  r_regionkey integer NOT NULL,
  r_name char(25) NOT NULL,
  PRIMARY KEY (r_regionkey)
);
CREATE TABLE nation (
  n_nationkey integer NOT NULL,
  n_name char(25) NOT NULL,
  n_regionkey integer NOT NULL,
  PRIMARY KEY (n_nationkey),
  FOREIGN KEY (n_regionkey) REFERENCES region (r_regionkey)
);
"""


@pytest.fixture(scope="session")
def tpch_ddl() -> str:
    return TPCH_DDL_PATH.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def tpch_catalog(tpch_ddl):
    return ingest_ddl(tpch_ddl, name="tpch")


@pytest.fixture(scope="session")
def tpch_catalog_inferred(tpch_catalog):
    return infer_foreign_keys(tpch_catalog)


@pytest.fixture()
def tiny_catalog():
    return ingest_ddl(TINY_DDL, name="tiny")


def strip_declared_fks(ddl: str) -> str:
    """TPC-H DDL with every FOREIGN KEY clause removed (for inference tests)."""
    lines = [line for line in ddl.splitlines() if "FOREIGN KEY" not in line]
    out = []
    for i, line in enumerate(lines):
        nxt = lines[i + 1].strip() if i + 1 < len(lines) else ""
        if line.rstrip().endswith(",") and nxt.startswith(")"):
            line = line.rstrip()[:-1]
        out.append(line)
    return "\n".join(out)


@pytest.fixture(scope="session")
def tpch_bare_catalog(tpch_ddl):
    """TPC-H catalog ingested without any declared foreign keys."""
    return ingest_ddl(strip_declared_fks(tpch_ddl), name="tpch-bare")
