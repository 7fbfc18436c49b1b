"""Structural profiling of validated queries and corpus-level coverage.

Counting contract (fixed here, used by every metric):

* ``join_count``: explicit JOIN nodes, plus k-1 for each comma-list of k
  relations, summed over all SELECT cores including sub-selects.
* ``clause_counts``: each clause keyword counts once per occurrence,
  including inside sub-selects (``select`` counts SELECT cores; ``order_by``
  and ``limit`` count per query expression carrying them).
* ``operator_counts``: total occurrences in the tree; all comparison
  operators pool into ``comparison``.
* ``function_counts``: every function call by lower-cased name (CAST and
  typed literals are syntax, not functions).
* ``subselect_count``: SELECT cores minus one.
* reference multisets: every resolved occurrence counts, so a column used
  in SELECT, GROUP BY, and ORDER BY counts three times.
"""

from __future__ import annotations

import csv
import statistics
from collections import Counter
from dataclasses import dataclass, field

from .errors import EmptyInputError, UnknownObjectError
from .schema import SchemaCatalog
from .sqltree import (
    Between,
    Binary,
    FuncCall,
    InList,
    InSubquery,
    Join,
    Like,
    Query,
    SelectCore,
    Unary,
    parse_select,
    walk,
)
from .validation import REJECT_UNKNOWN_OBJECT, resolve_references

CLAUSE_KEYS = ("select", "where", "group_by", "order_by", "having", "limit")
OPERATOR_KEYS = ("and", "or", "not", "comparison", "in", "between", "like")
FACET_KEYS = ("joins", "clauses", "operators", "functions")
PRESENCE_CLAUSES = ("group_by", "order_by", "having")

_COMPARISON_OPS = frozenset({"=", "<>", "!=", "<", "<=", ">", ">="})


@dataclass
class ComplexityProfile:
    join_count: int
    clause_counts: dict
    operator_counts: dict
    function_counts: dict
    subselect_count: int
    referenced_tables: dict
    referenced_columns: dict

    def facet_totals(self) -> dict:
        return {
            "joins": self.join_count,
            "clauses": sum(self.clause_counts.values()),
            "operators": sum(self.operator_counts.values()),
            "functions": sum(self.function_counts.values()),
        }

    def to_dict(self) -> dict:
        return {
            "join_count": self.join_count,
            "clause_counts": self.clause_counts,
            "operator_counts": self.operator_counts,
            "function_counts": self.function_counts,
            "subselect_count": self.subselect_count,
            "referenced_tables": self.referenced_tables,
            "referenced_columns": self.referenced_columns,
        }

    @staticmethod
    def from_dict(data: dict) -> "ComplexityProfile":
        return ComplexityProfile(**data)


def profile_query(sql: str, catalog: SchemaCatalog) -> ComplexityProfile:
    """Profile one query under the counting contract above.

    The query must already have passed syntax validation and resolve
    against the catalog; unresolved identifiers raise UnknownObjectError.
    """
    tree = parse_select(sql)
    refs = resolve_references(tree, catalog)
    if REJECT_UNKNOWN_OBJECT in refs.codes:
        raise UnknownObjectError("; ".join(refs.notes) or "unresolved identifier")

    join_count = 0
    select_count = 0
    clause_counts = {key: 0 for key in CLAUSE_KEYS}
    operator_counts = {key: 0 for key in OPERATOR_KEYS}
    function_counts: Counter = Counter()

    for node in walk(tree):
        if isinstance(node, SelectCore):
            select_count += 1
            if len(node.from_refs) > 1:
                join_count += len(node.from_refs) - 1
            if node.where is not None:
                clause_counts["where"] += 1
            if node.group_by:
                clause_counts["group_by"] += 1
            if node.having is not None:
                clause_counts["having"] += 1
        elif isinstance(node, Join):
            join_count += 1
        elif isinstance(node, Query):
            if node.order_by:
                clause_counts["order_by"] += 1
            if node.limit is not None:
                clause_counts["limit"] += 1
        elif isinstance(node, Binary):
            if node.op in ("and", "or"):
                operator_counts[node.op] += 1
            elif node.op in _COMPARISON_OPS:
                operator_counts["comparison"] += 1
        elif isinstance(node, Unary):
            if node.op == "not":
                operator_counts["not"] += 1
        elif isinstance(node, (InList, InSubquery)):
            operator_counts["in"] += 1
        elif isinstance(node, Between):
            operator_counts["between"] += 1
        elif isinstance(node, Like):
            operator_counts["like"] += 1
        elif isinstance(node, FuncCall):
            function_counts[node.name] += 1

    clause_counts["select"] = select_count
    return ComplexityProfile(
        join_count=join_count,
        clause_counts=clause_counts,
        operator_counts=operator_counts,
        function_counts=dict(sorted(function_counts.items())),
        subselect_count=select_count - 1,
        referenced_tables=dict(sorted(refs.tables.items())),
        referenced_columns=dict(sorted(refs.columns.items())),
    )


# ---------------------------------------------------------------------------
# Corpus aggregation
# ---------------------------------------------------------------------------


@dataclass
class FacetStats:
    mean: float
    std: float  # population standard deviation
    min: float
    max: float

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "min": self.min, "max": self.max}


@dataclass
class CoverageTargets:
    min_table_freq: float = 0.02  # share of queries that must touch each table
    min_clause_freq: float = 0.10  # share of queries carrying each steerable clause
    min_column_freq: float = 0.005  # columns below this presence count as unused

    def to_dict(self) -> dict:
        return {
            "min_table_freq": self.min_table_freq,
            "min_clause_freq": self.min_clause_freq,
            "min_column_freq": self.min_column_freq,
        }


@dataclass
class CoverageGap:
    kind: str  # table_underused | column_unused | operation_underused
    subject: str
    observed_freq: float
    target_freq: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "subject": self.subject,
            "observed_freq": self.observed_freq,
            "target_freq": self.target_freq,
        }


@dataclass
class CoverageReport:
    setting: str
    query_count: int
    facets: dict  # facet name -> FacetStats
    table_reference_freq: dict  # occurrence share over all table references
    column_reference_freq: dict  # occurrence share over all column references
    table_presence_freq: dict  # share of queries referencing the table
    column_presence_freq: dict
    clause_presence_freq: dict  # group_by / order_by / having presence shares
    gap_list: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "setting": self.setting,
            "query_count": self.query_count,
            "facets": {name: stats.to_dict() for name, stats in self.facets.items()},
            "table_reference_freq": self.table_reference_freq,
            "column_reference_freq": self.column_reference_freq,
            "table_presence_freq": self.table_presence_freq,
            "column_presence_freq": self.column_presence_freq,
            "clause_presence_freq": self.clause_presence_freq,
            "gap_list": [gap.to_dict() for gap in self.gap_list],
        }


def aggregate_coverage(
    profiles: list[ComplexityProfile],
    setting: str,
    catalog: SchemaCatalog,
    targets: CoverageTargets | None = None,
) -> CoverageReport:
    """Fold per-query profiles into a corpus report with gap detection.

    Frequency maps are zero-filled over the catalog so untouched tables and
    columns are visible; reference frequencies are occurrence shares (their
    numerators sum to the total reference count), while presence
    frequencies are per-query shares used against the targets.
    """
    if not profiles:
        raise EmptyInputError("cannot aggregate coverage over zero profiles")
    targets = targets or CoverageTargets()
    n = len(profiles)

    facets = {}
    for facet in FACET_KEYS:
        values = [p.facet_totals()[facet] for p in profiles]
        facets[facet] = FacetStats(
            mean=statistics.fmean(values),
            std=statistics.pstdev(values),
            min=min(values),
            max=max(values),
        )

    clause_presence = {
        clause: sum(1 for p in profiles if p.clause_counts.get(clause, 0) > 0) / n
        for clause in PRESENCE_CLAUSES
    }

    table_occurrences: Counter = Counter()
    column_occurrences: Counter = Counter()
    table_hits: Counter = Counter()
    column_hits: Counter = Counter()
    for profile in profiles:
        table_occurrences.update(profile.referenced_tables)
        column_occurrences.update(profile.referenced_columns)
        table_hits.update(set(profile.referenced_tables))
        column_hits.update(set(profile.referenced_columns))

    all_tables = [t.name for t in catalog.tables]
    all_columns = [f"{t.name}.{c.name}" for t in catalog.tables for c in t.columns]
    total_table_refs = sum(table_occurrences.values())
    total_column_refs = sum(column_occurrences.values())
    table_reference_freq = {
        t: (table_occurrences.get(t, 0) / total_table_refs if total_table_refs else 0.0)
        for t in all_tables
    }
    column_reference_freq = {
        c: (column_occurrences.get(c, 0) / total_column_refs if total_column_refs else 0.0)
        for c in all_columns
    }
    table_presence_freq = {t: table_hits.get(t, 0) / n for t in all_tables}
    column_presence_freq = {c: column_hits.get(c, 0) / n for c in all_columns}

    gaps: list[CoverageGap] = []
    for table in all_tables:
        observed = table_presence_freq[table]
        if observed < targets.min_table_freq:
            gaps.append(CoverageGap("table_underused", table, observed, targets.min_table_freq))
    for column in all_columns:
        if column_presence_freq[column] == 0.0 and targets.min_column_freq > 0:
            gaps.append(CoverageGap("column_unused", column, 0.0, targets.min_column_freq))
    for clause in PRESENCE_CLAUSES:
        observed = clause_presence[clause]
        if observed < targets.min_clause_freq:
            gaps.append(
                CoverageGap("operation_underused", clause, observed, targets.min_clause_freq)
            )

    return CoverageReport(
        setting=setting,
        query_count=n,
        facets=facets,
        table_reference_freq=table_reference_freq,
        column_reference_freq=column_reference_freq,
        table_presence_freq=table_presence_freq,
        column_presence_freq=column_presence_freq,
        clause_presence_freq=clause_presence,
        gap_list=gaps,
    )


# ---------------------------------------------------------------------------
# Regeneration directives
# ---------------------------------------------------------------------------


@dataclass
class RegenDirectives:
    subschema_weights: dict = field(default_factory=dict)  # subschema id -> weight > 0
    column_filters: dict = field(default_factory=dict)  # table -> sorted column list
    bias_override: str | None = None

    def is_empty(self) -> bool:
        return not self.subschema_weights and not self.column_filters and self.bias_override is None

    def to_dict(self) -> dict:
        return {
            "subschema_weights": self.subschema_weights,
            "column_filters": self.column_filters,
            "bias_override": self.bias_override,
        }


def plan_regeneration(
    report: CoverageReport, subschemas, catalog: SchemaCatalog
) -> RegenDirectives:
    """Turn coverage gaps into concrete steering for the next batch.

    Under-referenced tables raise the sampling weight of every subschema
    containing them (proportionally to the shortfall); unused columns yield
    per-table column filters (the unused columns plus the table's key
    columns, so joins stay expressible); the most underused steerable
    clause becomes the bias override, with ``having`` steered through
    ``group_by`` since HAVING requires grouping. Deterministic given the
    report.
    """
    directives = RegenDirectives()
    if not report.gap_list:
        return directives

    table_gaps = {g.subject: g for g in report.gap_list if g.kind == "table_underused"}
    if table_gaps:
        weights = {}
        for subschema in subschemas:
            weight = 1.0
            for table in subschema.tables:
                gap = table_gaps.get(table)
                if gap is not None:
                    weight += (gap.target_freq - gap.observed_freq) / gap.target_freq
            weights[subschema.id] = weight
        directives.subschema_weights = weights

    unused_by_table: dict[str, list[str]] = {}
    for gap in report.gap_list:
        if gap.kind != "column_unused":
            continue
        table, column = gap.subject.split(".", 1)
        unused_by_table.setdefault(table, []).append(column)
    for table_name, columns in sorted(unused_by_table.items()):
        table = catalog.table(table_name)
        if table is None:
            continue
        keep = set(columns) | set(table.primary_key)
        for fk in catalog.fk_edges:
            if fk.from_table == table_name:
                keep.update(fk.from_columns)
            if fk.to_table == table_name:
                keep.update(fk.to_columns)
        directives.column_filters[table_name] = sorted(keep)

    operation_gaps = [g for g in report.gap_list if g.kind == "operation_underused"]
    if operation_gaps:
        worst = min(
            operation_gaps, key=lambda g: (g.observed_freq / g.target_freq, g.subject)
        )
        directives.bias_override = "group_by" if worst.subject == "having" else worst.subject
    return directives


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def facet_stats_rows(reports: list[CoverageReport]) -> list[dict]:
    rows = []
    for report in reports:
        for facet in FACET_KEYS:
            stats = report.facets[facet]
            rows.append(
                {
                    "setting": report.setting,
                    "facet": facet,
                    "mean": f"{stats.mean:.6g}",
                    "std": f"{stats.std:.6g}",
                    "min": f"{stats.min:g}",
                    "max": f"{stats.max:g}",
                }
            )
    return rows


def clause_presence_rows(reports: list[CoverageReport]) -> list[dict]:
    rows = []
    for report in reports:
        for clause in PRESENCE_CLAUSES:
            rows.append(
                {
                    "setting": report.setting,
                    "clause": clause,
                    "presence": f"{report.clause_presence_freq[clause]:.6g}",
                }
            )
    return rows


def write_csv(rows: list[dict], path) -> None:
    if not rows:
        raise EmptyInputError("no rows to export")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
