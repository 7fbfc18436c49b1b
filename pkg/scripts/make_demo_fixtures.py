#!/usr/bin/env python3
"""Regenerate the demo fixtures under data/demo/.

Builds the stub-backend completion files the demo config needs (iterating
until the coverage-steered regeneration round stops producing new prompts)
and the example prediction CSVs for the evaluate command. Deterministic:
rerunning must not produce a diff.
"""

from __future__ import annotations

import csv
import random
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from sqlsynth import pipeline as pipeline_mod  # noqa: E402
from sqlsynth.config import load_config  # noqa: E402
from sqlsynth.llmgen import PROMPT_REQUEST, StubBackend, prompt_hash  # noqa: E402
from sqlsynth.pipeline import run_pipeline  # noqa: E402
from sqlsynth.util import stable_hash_hex  # noqa: E402

DEMO_DIR = REPO / "data" / "demo"
STUB_DIR = DEMO_DIR / "stub_completions"


class CollectingBackend(StubBackend):
    """Stub backend that records prompts with no canned file yet."""

    missing: dict[str, str] = {}

    def complete(self, prompt, params):
        path = self.directory / f"{prompt_hash(prompt)}.json"
        if not path.exists():
            CollectingBackend.missing[prompt_hash(prompt)] = prompt
            return []
        return super().complete(prompt, params)


def tables_of(prompt: str) -> list[str]:
    lines = prompt.splitlines()
    return [t.strip() for t in lines[lines.index(PROMPT_REQUEST) + 1].split(",")]


# A few representative columns per table for synthesized completions.
TEXT_COLUMN = {
    "region": "r_name", "nation": "n_name", "part": "p_brand",
    "supplier": "s_name", "partsupp": "ps_comment", "customer": "c_mktsegment",
    "orders": "o_orderpriority", "lineitem": "l_shipmode",
}
NUMERIC_COLUMN = {
    "region": "r_regionkey", "nation": "n_nationkey", "part": "p_retailprice",
    "supplier": "s_acctbal", "partsupp": "ps_supplycost", "customer": "c_acctbal",
    "orders": "o_totalprice", "lineitem": "l_extendedprice",
}
JOIN_CONDITIONS = {
    frozenset(("nation", "region")): "nation.n_regionkey = region.r_regionkey",
    frozenset(("supplier", "nation")): "supplier.s_nationkey = nation.n_nationkey",
    frozenset(("customer", "nation")): "customer.c_nationkey = nation.n_nationkey",
    frozenset(("partsupp", "part")): "partsupp.ps_partkey = part.p_partkey",
    frozenset(("partsupp", "supplier")): "partsupp.ps_suppkey = supplier.s_suppkey",
    frozenset(("orders", "customer")): "orders.o_custkey = customer.c_custkey",
    frozenset(("lineitem", "orders")): "lineitem.l_orderkey = orders.o_orderkey",
    frozenset(("lineitem", "part")): "lineitem.l_partkey = part.p_partkey",
    frozenset(("lineitem", "supplier")): "lineitem.l_suppkey = supplier.s_suppkey",
    frozenset(("lineitem", "partsupp")):
        "lineitem.l_partkey = partsupp.ps_partkey AND lineitem.l_suppkey = partsupp.ps_suppkey",
}


def join_clause(tables: list[str]) -> str:
    joined = [tables[0]]
    clause = tables[0]
    remaining = set(tables[1:])
    while remaining:
        for candidate in sorted(remaining):
            condition = next(
                (
                    JOIN_CONDITIONS[frozenset((candidate, present))]
                    for present in joined
                    if frozenset((candidate, present)) in JOIN_CONDITIONS
                ),
                None,
            )
            if condition:
                clause += f" INNER JOIN {candidate} ON {condition}"
                joined.append(candidate)
                remaining.remove(candidate)
                break
        else:
            raise RuntimeError(f"cannot connect {remaining} to {joined}")
    return clause


def synthesize_completions(prompt: str) -> list[str]:
    """Plausible 'model output' for a prompt: fenced SQL, prose-wrapped SQL,
    and (for a deterministic third of prompts) one broken completion."""
    tables = tables_of(prompt)
    anchor = tables[0]
    text_col = f"{anchor}.{TEXT_COLUMN[anchor]}"
    num_col = f"{anchor}.{NUMERIC_COLUMN[anchor]}"
    frm = join_clause(tables)
    grouped = (
        f"SELECT {text_col}, COUNT(*), AVG({num_col})\n"
        f"FROM {frm}\n"
        f"GROUP BY {text_col}\n"
        f"HAVING COUNT(*) > 1\n"
        f"ORDER BY COUNT(*) DESC"
    )
    simple = f"SELECT DISTINCT {text_col} FROM {frm} WHERE {num_col} > 10 ORDER BY {text_col}"
    completions = [
        f"Here is a query using all the tables:\n\n```sql\n{grouped}\n```",
        f"You could try: {simple};",
    ]
    # every third prompt also returns something unusable, so the demo shows
    # rejection accounting in action
    if int(stable_hash_hex(prompt, length=4), 16) % 3 == 0:
        completions.append("I'm not sure, maybe SELECT FROM WHERE?")
    else:
        completions.append(f"```sql\nSELECT COUNT(*) FROM {frm}\n```")
    return completions


def build_stub_fixtures() -> None:
    if STUB_DIR.exists():
        shutil.rmtree(STUB_DIR)
    STUB_DIR.mkdir(parents=True)
    pipeline_mod.make_backend = lambda config: CollectingBackend(STUB_DIR)

    for round_index in range(6):
        CollectingBackend.missing = {}
        config = load_config(DEMO_DIR / "demo.toml")
        with tempfile.TemporaryDirectory() as tmp:
            config.out_dir = str(Path(tmp) / "out")
            config.execution.enabled = False  # fixture building needs no labels
            run_pipeline(config)
        if not CollectingBackend.missing:
            print(f"fixtures stable after {round_index} extension round(s)")
            break
        for _hash, prompt in sorted(CollectingBackend.missing.items()):
            StubBackend.store(STUB_DIR, prompt, synthesize_completions(prompt))
        print(f"round {round_index}: added {len(CollectingBackend.missing)} completion files")
    else:
        raise RuntimeError("prompt set did not stabilize; investigate directive feedback")


def build_prediction_csvs() -> None:
    """Two prediction sources over the same measured runtimes: a noisy one
    and a tighter one, for the evaluate/baseline demo."""
    rng = random.Random(77)
    engines = ["prestodb-w1", "prestodb-w4", "spark-sql-w1", "spark-sql-w4"]
    scale = {"prestodb-w1": 1.0, "prestodb-w4": 0.45, "spark-sql-w1": 1.6, "spark-sql-w4": 0.7}
    queries = [f"q{i:03d}" for i in range(40)]
    rows_noisy = []
    rows_tight = []
    for query in queries:
        base = rng.uniform(200, 120_000)
        for engine in engines:
            true_ms = base * scale[engine] * rng.uniform(0.9, 1.1)
            noisy = true_ms * rng.uniform(0.45, 2.2)
            tight = true_ms * rng.uniform(0.75, 1.33)
            rows_noisy.append((query, engine, f"{noisy:.1f}", f"{true_ms:.1f}"))
            rows_tight.append((query, engine, f"{tight:.1f}", f"{true_ms:.1f}"))
    for name, rows in (("predictions_mech.csv", rows_noisy), ("predictions_sdg.csv", rows_tight)):
        with open(DEMO_DIR / name, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["query_id", "engine_id", "predicted_ms", "true_ms"])
            writer.writerows(rows)
        print(f"{name}: {len(rows)} rows")


def verify() -> None:
    """A real run against the generated fixtures must see zero failures."""
    import importlib

    importlib.reload(pipeline_mod)
    config = load_config(DEMO_DIR / "demo.toml")
    with tempfile.TemporaryDirectory() as tmp:
        config.out_dir = str(Path(tmp) / "out")
        manifest = pipeline_mod.run_pipeline(config)
    counts = manifest["counts"]
    assert counts["llm_failures"] == 0, counts
    assert counts["kept"] > 0
    print(
        f"verified: {counts['generated']} generated, {counts['kept']} kept, "
        f"{counts['llm_calls']} backend calls, 0 failures"
    )


if __name__ == "__main__":
    build_stub_fixtures()
    build_prediction_csvs()
    verify()
