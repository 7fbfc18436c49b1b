"""End-to-end orchestration: preprocess, subschemas, generate, validate,
coverage-steer, execute, with JSONL checkpoints and a run manifest.

Stage outputs land in the configured output directory:

* ``catalog.json``       schema catalog (after inference and profiling)
* ``subschemas.jsonl``   enumerated generation targets
* ``records.jsonl``      every candidate with its validation verdict
* ``kept.jsonl``         the deduplicated kept corpus
* ``coverage.json``      per-setting and overall coverage reports
* ``coverage_facets.csv`` / ``coverage_clauses.csv`` tabular exports
* ``labeled.jsonl``      kept records with runtime labels (execution runs)
* ``manifest.json``      counts, accounting, file map, config snapshot

Everything stochastic draws through seeds derived from the global seed plus
stage/batch labels, so a rerun with the same config is byte-identical up to
(and excluding) measured runtimes. The manifest carries no timestamps for
the same reason. With ``resume=True`` existing checkpoints are loaded
instead of recomputed.
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import PipelineConfig
from .coverage import (
    RegenDirectives,
    aggregate_coverage,
    clause_presence_rows,
    facet_stats_rows,
    plan_regeneration,
    profile_query,
    write_csv,
)
from .errors import BackendError, SqlsynthError
from .execution import SqliteSession, apply_retention, connect, execute_batch, restrict_dataset
from .llmgen import (
    HttpBackend,
    PromptSetting,
    StubBackend,
    build_prompt,
    extract_sql,
    generate_llm,
    prompt_hash,
)
from .mechgen import generate_mechanical, select_seed_examples
from .records import ORIGIN_LLM, QueryRecord, load_records, make_record, save_records
from .schema import (
    CsvDirSampler,
    derive_column_prefixes,
    infer_foreign_keys,
    ingest_ddl,
    load_catalog,
    profile_columns,
    save_catalog,
)
from .subschema import build_join_graph, enumerate_subschemas, load_subschemas, save_subschemas
from .util import SCHEMA_VERSION, derive_seed, dump_json, load_json
from .validation import (
    REJECT_SYNTAX,
    VERDICT_ACCEPTED,
    VERDICT_REJECTED,
    ValidationReport,
    deduplicate,
    validate_relevance,
    validate_syntax,
)

logger = logging.getLogger(__name__)

FILES = {
    "catalog": "catalog.json",
    "subschemas": "subschemas.jsonl",
    "records": "records.jsonl",
    "kept": "kept.jsonl",
    "coverage": "coverage.json",
    "facets_csv": "coverage_facets.csv",
    "clauses_csv": "coverage_clauses.csv",
    "training": "training.jsonl",
    "labeled": "labeled.jsonl",
    "manifest": "manifest.json",
}


@dataclass
class BatchAccounting:
    batch: int
    generated: int = 0
    kept: int = 0
    rejected: int = 0
    dedup_dropped: int = 0
    rejected_by_reason: dict = field(default_factory=dict)
    llm_calls: int = 0
    llm_failures: int = 0

    def to_dict(self) -> dict:
        return {
            "batch": self.batch,
            "generated": self.generated,
            "kept": self.kept,
            "rejected": self.rejected,
            "dedup_dropped": self.dedup_dropped,
            "rejected_by_reason": self.rejected_by_reason,
            "llm_calls": self.llm_calls,
            "llm_failures": self.llm_failures,
        }


def config_snapshot(config: PipelineConfig) -> dict:
    return {
        "name": config.name,
        "seed": config.seed,
        "loop_limit": config.loop_limit,
        "kept_target": config.kept_target,
        "ddl_path": config.ddl_path,
        "infer_fks": config.infer_fks,
        "sample_data_dir": config.sample_data_dir,
        "subschema": {
            "min_tables": config.subschema.min_tables,
            "max_tables": config.subschema.max_tables,
            "llm_sample_count": config.subschema.llm_sample_count,
        },
        "mechanical": config.mechanical.to_dict(),
        "mech_per_subschema": config.mech_per_subschema,
        "llm": {
            "enabled": config.llm.enabled,
            "settings": [s.label for s in config.llm.settings],
            "backend": config.llm.backend,
            "model": config.llm.model,
            "params": config.llm.params.to_dict(),
        },
        "validators": {
            "literal_placeholder_dedup": config.literal_placeholder_dedup,
            "require_exact_tables": config.require_exact_tables,
        },
        "selection": {"size": config.selection_size, "mode": config.selection_mode},
        "coverage_targets": config.coverage_targets.to_dict(),
        "execution": {
            "enabled": config.execution.enabled,
            "timeout_ms": config.execution.timeout_ms,
            "min_empty_runtime_ms": config.execution.min_empty_runtime_ms,
            "max_rows_per_table": config.execution.max_rows_per_table,
            "engines": [e.to_dict() for e in config.execution.engines],
        },
    }


def make_backend(config: PipelineConfig):
    if config.llm.backend == "stub":
        return StubBackend(config.llm.stub_dir)
    return HttpBackend(
        url=config.llm.url,
        model=config.llm.model,
        auth_env=config.llm.auth_env,
        timeout=config.llm.timeout,
    )


def run_pipeline(config: PipelineConfig, resume: bool = False) -> dict:
    """Run the full pipeline; returns the manifest dict (also written to
    ``manifest.json``). Stage-fatal errors raise after the manifest-so-far
    is flushed; per-item failures are recorded and never abort."""
    config.validate()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {key: out / name for key, name in FILES.items()}

    # -- preprocessing -----------------------------------------------------
    if resume and paths["catalog"].exists():
        catalog = load_catalog(paths["catalog"])
    else:
        catalog = ingest_ddl(Path(config.ddl_path).read_text(encoding="utf-8"), name=config.name)
        if config.infer_fks:
            prefixes = derive_column_prefixes(catalog)
            prefixes.update(config.prefix_overrides)
            catalog = infer_foreign_keys(catalog, prefixes)
        if config.sample_data_dir:
            catalog = profile_columns(
                catalog,
                CsvDirSampler(config.sample_data_dir, catalog),
                sample_cap=config.sample_cap,
                enum_threshold=config.enum_threshold,
                label_columns=set(config.label_columns),
            )
        save_catalog(catalog, paths["catalog"])

    # -- subschema enumeration ----------------------------------------------
    if resume and paths["subschemas"].exists():
        subschemas = load_subschemas(paths["subschemas"])
    else:
        graph = build_join_graph(catalog)
        subschemas = enumerate_subschemas(
            graph,
            max_tables=config.subschema.max_tables,
            min_tables=config.subschema.min_tables,
            safety_limit=config.subschema.safety_limit,
        )
        save_subschemas(subschemas, paths["subschemas"])
    subschema_by_id = {s.id: s for s in subschemas}

    # -- generation loop -----------------------------------------------------
    generation_done = resume and paths["kept"].exists() and paths["records"].exists()
    if generation_done:
        kept_records = load_records(paths["kept"])
        manifest_prev = load_json(paths["manifest"]) if paths["manifest"].exists() else {}
        batches = manifest_prev.get("batches", [])
        gaps_remaining = manifest_prev.get("counts", {}).get("gaps_remaining", 0)
    else:
        kept_records, batches, gaps_remaining = _generate(
            config, catalog, subschemas, subschema_by_id, paths
        )

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "kind": "manifest",
        "name": config.name,
        "seed": config.seed,
        "config": config_snapshot(config),
        "files": {
            key: FILES[key]
            for key in ("catalog", "subschemas", "records", "kept",
                        "coverage", "facets_csv", "clauses_csv")
            if paths[key].exists()
        },
        "batches": batches,
        "counts": {
            "tables": len(catalog.tables),
            "fk_edges": len(catalog.fk_edges),
            "subschemas": len(subschemas),
            "batches": len(batches),
            "generated": sum(b["generated"] for b in batches),
            "kept": len(kept_records),
            "rejected": sum(b["rejected"] for b in batches),
            "dedup_dropped": sum(b["dedup_dropped"] for b in batches),
            "llm_calls": sum(b["llm_calls"] for b in batches),
            "llm_failures": sum(b["llm_failures"] for b in batches),
            "gaps_remaining": gaps_remaining,
        },
        "rejected_by_reason": _merge_reason_counts(batches),
    }

    # manifest reflects completed stages even if a later stage fails
    dump_json(manifest, paths["manifest"])

    # -- training-subset selection ----------------------------------------------
    if config.selection_size is not None:
        training = select_training_subset(
            kept_records, config.selection_size, config.selection_mode
        )
        save_records(training, paths["training"])
        manifest["files"]["training"] = FILES["training"]
        manifest["counts"]["training_selected"] = len(training)
        dump_json(manifest, paths["manifest"])

    # -- execution labeling ---------------------------------------------------
    if config.execution.enabled:
        labeled, label_counts = _execute(config, catalog, kept_records)
        save_records(labeled, paths["labeled"])
        manifest["files"]["labeled"] = FILES["labeled"]
        manifest["counts"].update(label_counts)
        dump_json(manifest, paths["manifest"])

    return manifest


def _merge_reason_counts(batches) -> dict:
    merged: dict = {}
    for batch in batches:
        for reason, count in batch["rejected_by_reason"].items():
            merged[reason] = merged.get(reason, 0) + count
    return dict(sorted(merged.items()))


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


def _generate(config, catalog, subschemas, subschema_by_id, paths):
    backend = make_backend(config) if config.llm.enabled else None
    all_records: list[QueryRecord] = []
    kept_records: list[QueryRecord] = []
    mech_pools: dict[str, list[QueryRecord]] = {s.id: [] for s in subschemas}
    batches: list[dict] = []
    directives = RegenDirectives()
    reports = []
    gaps_remaining = 0

    batch = 0
    while True:
        accounting = BatchAccounting(batch=batch)
        candidates: list[QueryRecord] = []

        if config.mech_per_subschema > 0:
            mech_config = _batch_mech_config(config, batch)
            for subschema in subschemas:
                records = generate_mechanical(
                    subschema, catalog, mech_config, config.mech_per_subschema
                )
                for record in records:
                    record.batch = batch
                mech_pools[subschema.id].extend(records)
                candidates.extend(records)

        if backend is not None:
            llm_candidates = _llm_batch(
                config, catalog, subschemas, mech_pools, directives, backend, batch, accounting
            )
            candidates.extend(llm_candidates)

        accounting.generated = len(candidates)

        # validation
        accepted: list[QueryRecord] = []
        for record in candidates:
            report = _validate_record(record, catalog, subschema_by_id.get(record.subschema_id),
                                      config)
            record.validation = report
            all_records.append(record)
            if report.verdict == VERDICT_ACCEPTED:
                accepted.append(record)
            else:
                accounting.rejected += 1
                for reason in report.rejection_reasons:
                    accounting.rejected_by_reason[reason] = (
                        accounting.rejected_by_reason.get(reason, 0) + 1
                    )

        # deduplication against the cumulative kept corpus
        merged_kept, dropped = deduplicate(
            kept_records + accepted, literal_placeholders=config.literal_placeholder_dedup
        )
        new_kept = merged_kept[len(kept_records):]
        kept_records = merged_kept
        accounting.dedup_dropped = len(dropped)
        for record in dropped:
            accounting.rejected_by_reason["duplicate"] = (
                accounting.rejected_by_reason.get("duplicate", 0) + 1
            )
        accounting.kept = len(new_kept)
        batches.append(accounting.to_dict())

        # coverage over the cumulative kept corpus
        reports, directives, gaps_remaining = _coverage(
            config, catalog, subschemas, kept_records
        )

        batch += 1
        if batch > config.loop_limit:
            break
        if gaps_remaining == 0:
            break
        if config.kept_target is not None and len(kept_records) >= config.kept_target:
            break

    save_records(all_records, paths["records"])
    save_records(kept_records, paths["kept"])
    reports_payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "coverage",
        "reports": [report.to_dict() for report in reports],
    }
    dump_json(reports_payload, paths["coverage"])
    if reports:
        write_csv(facet_stats_rows(reports), paths["facets_csv"])
        write_csv(clause_presence_rows(reports), paths["clauses_csv"])
    return kept_records, batches, gaps_remaining


def _batch_mech_config(config, batch):
    from dataclasses import replace

    return replace(config.mechanical, seed=derive_seed(config.seed, "mechanical-batch", batch))


def _validate_record(record, catalog, subschema, config) -> ValidationReport:
    try:
        tree = validate_syntax(record.sql)
    except SqlsynthError:
        return ValidationReport(
            query_id=record.id, verdict=VERDICT_REJECTED, rejection_reasons=[REJECT_SYNTAX]
        )
    codes = validate_relevance(
        tree, catalog, subschema=subschema, require_exact_tables=config.require_exact_tables
    )
    if codes:
        return ValidationReport(
            query_id=record.id, verdict=VERDICT_REJECTED, rejection_reasons=codes
        )
    return ValidationReport(query_id=record.id, verdict=VERDICT_ACCEPTED)


def _llm_batch(config, catalog, subschemas, mech_pools, directives, backend, batch, accounting):
    chosen = _choose_subschemas(config, subschemas, directives, batch)
    settings = _batch_settings(config, directives)
    tasks = []
    for subschema in chosen:
        for setting in settings:
            pool = mech_pools[subschema.id]
            if len(pool) < setting.shots:
                logger.warning(
                    "skipping %s on %s: pool of %d can't seed %d shots",
                    setting.label, subschema.id, len(pool), setting.shots,
                )
                continue
            examples = select_seed_examples(
                pool,
                setting.shots,
                bias=None if setting.bias == "none" else setting.bias,
                bias_weight=0.9,
                rng_seed=derive_seed(config.seed, "examples", batch, subschema.id, setting.label),
            )
            prompt = build_prompt(
                subschema,
                catalog,
                setting,
                examples,
                column_filter=directives.column_filters or None,
            )
            tasks.append((subschema, setting, prompt))

    def call(task):
        _, _, prompt = task
        attempts = config.llm.retries + 1
        for attempt in range(attempts):
            try:
                return generate_llm(prompt, backend, config.llm.params)
            except BackendError as exc:
                if not exc.retryable or attempt == attempts - 1:
                    return exc
        return BackendError("unreachable")  # pragma: no cover

    with ThreadPoolExecutor(max_workers=max(1, config.llm.concurrency)) as pool:
        results = list(pool.map(call, tasks))

    candidates = []
    for (subschema, setting, prompt), result in zip(tasks, results):
        accounting.llm_calls += 1
        if isinstance(result, BackendError):
            accounting.llm_failures += 1
            logger.warning("backend failure for %s on %s: %s", setting.label, subschema.id, result)
            continue
        for completion in result:
            for sql in extract_sql(completion):
                candidates.append(
                    make_record(
                        sql,
                        ORIGIN_LLM,
                        subschema.id,
                        batch=batch,
                        prompt_setting=setting.to_dict(),
                        prompt_hash=prompt_hash(prompt),
                        model_name=config.llm.model,
                        generation_params=config.llm.params.to_dict(),
                    )
                )
    return candidates


def _choose_subschemas(config, subschemas, directives, batch):
    count = min(config.subschema.llm_sample_count, len(subschemas))
    rng = random.Random(derive_seed(config.seed, "subschema-choice", batch))
    weights = directives.subschema_weights or {}
    # weighted sampling without replacement (exponential-key trick)
    keyed = sorted(
        subschemas,
        key=lambda s: rng.random() ** (1.0 / weights.get(s.id, 1.0)),
        reverse=True,
    )
    return keyed[:count]


def _batch_settings(config, directives):
    settings = list(config.llm.settings)
    if directives.bias_override:
        overridden = [PromptSetting(shots=s.shots, bias=directives.bias_override)
                      for s in settings]
        unique = []
        for setting in overridden:
            if setting not in unique:
                unique.append(setting)
        return unique
    return settings


def _coverage(config, catalog, subschemas, kept_records):
    by_setting: dict[str, list] = {}
    all_profiles = []
    for record in kept_records:
        profile = profile_query(record.sql, catalog)
        record.profile = profile.to_dict()
        label = (
            "mechanical"
            if record.origin == "mechanical"
            else PromptSetting.from_dict(record.prompt_setting).label
        )
        by_setting.setdefault(label, []).append(profile)
        all_profiles.append(profile)
    reports = [
        aggregate_coverage(profiles, label, catalog, config.coverage_targets)
        for label, profiles in sorted(by_setting.items())
    ]
    if not all_profiles:
        return [], RegenDirectives(), 0
    overall = aggregate_coverage(all_profiles, "all", catalog, config.coverage_targets)
    reports.append(overall)
    directives = plan_regeneration(overall, subschemas, catalog)
    return reports, directives, len(overall.gap_list)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


def _run_engine(config, catalog, kept_records, engine):
    """One engine worker: load data when configured, run the batch serially."""
    if engine.driver == "sqlite" and config.execution.data_dir:
        session = SqliteSession(engine.options.get("database", ":memory:"))
        restrict_dataset(
            catalog, config.execution.data_dir, session, config.execution.max_rows_per_table
        )
    else:
        session = connect(engine)
    try:
        return execute_batch(
            kept_records, engine, timeout_ms=config.execution.timeout_ms, session=session
        )
    finally:
        session.close()


def _execute(config, catalog, kept_records):
    engines = list(config.execution.engines)
    # one serial worker per engine, engines in parallel; results merged in
    # config order so the labeled output stays byte-stable
    with ThreadPoolExecutor(max_workers=max(1, len(engines))) as pool:
        futures = [pool.submit(_run_engine, config, catalog, kept_records, e) for e in engines]
        per_engine = [future.result() for future in futures]

    executed = 0
    labels_kept = 0
    labels_dropped = 0
    labeled_ids = set()
    for engine, labels in zip(engines, per_engine):
        executed += len(labels)
        kept, dropped = apply_retention(labels, config.execution.min_empty_runtime_ms)
        labels_kept += len(kept)
        labels_dropped += len(dropped)
        by_query = {label.query_id: label for label in kept}
        for record in kept_records:
            label = by_query.get(record.id)
            if label is not None:
                record.labels[engine.engine_id] = label.to_dict()
                labeled_ids.add(record.id)
    labeled = [record for record in kept_records if record.id in labeled_ids]
    return labeled, {
        "executed": executed,
        "labels_kept": labels_kept,
        "labels_dropped": labels_dropped,
        "labeled_records": len(labeled),
    }


def select_training_subset(kept_records, size: int, mode: str = "stratified"):
    """Pick the training subset from the kept corpus.

    ``first_n`` takes the first ``size`` kept records; ``stratified`` takes
    them round-robin across origin/prompt-setting groups (preserving each
    group's order) so no setting dominates the training set.
    """
    if size >= len(kept_records):
        return list(kept_records)
    if mode == "first_n":
        return kept_records[:size]
    if mode != "stratified":
        raise ValueError(f"unknown selection mode {mode!r}")
    groups: dict[str, list] = {}
    order: list[str] = []
    for record in kept_records:
        if record.origin == "mechanical":
            label = "mechanical"
        else:
            label = PromptSetting.from_dict(record.prompt_setting).label
        if label not in groups:
            groups[label] = []
            order.append(label)
        groups[label].append(record)
    picked = []
    index = 0
    while len(picked) < size:
        progressed = False
        for label in order:
            bucket = groups[label]
            if index < len(bucket):
                picked.append(bucket[index])
                progressed = True
                if len(picked) == size:
                    break
        if not progressed:
            break
        index += 1
    # keep corpus order in the output for diff-friendliness
    chosen = {id(record) for record in picked}
    return [record for record in kept_records if id(record) in chosen]
