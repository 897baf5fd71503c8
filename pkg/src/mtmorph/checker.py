"""Evaluating metamorphic relations over result-model pairs.

`check_mr` turns one relation and a (T1, T2) pair into per-clause verdicts.
`run_metamorphic_pipeline` drives the whole loop for one test model: execute
once, then for every relation mutate, re-execute, and check.
`run_regression` repeats the pipeline for a list of test models against a
(possibly new) program version.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .engine import execute_transformation
from .errors import ExecutionError, InfeasibleMutationError, MetamodelMismatchError, UnknownTypeError
from .jsonio import write_json
from .model import Metamodel, Model, count_instances
from .mrgen import MetamorphicRelation, Mutation
from .mtl import TransformationProgram
from .mutator import apply_mutation


@dataclass(frozen=True)
class ClauseVerdict:
    type_name: str
    expected_delta: int
    observed_delta: int

    @property
    def passed(self) -> bool:
        return self.expected_delta == self.observed_delta


@dataclass(frozen=True)
class MRReport:
    mr_id: str
    mutation: Mutation | None
    verdicts: tuple[ClauseVerdict, ...]
    skipped: bool = False
    skip_reason: str | None = None
    duration_ms: float = 0.0
    model_name: str | None = None

    @property
    def passed(self) -> bool:
        return not self.skipped and all(v.passed for v in self.verdicts)

    @property
    def failed(self) -> bool:
        return not self.skipped and any(not v.passed for v in self.verdicts)


def check_mr(mr: MetamorphicRelation, t1: Model, t2: Model) -> MRReport:
    """One verdict per clause: observed delta is the instance-count change
    from T1 to T2."""
    if t1.metamodel_name != t2.metamodel_name:
        raise MetamodelMismatchError(
            f"result models conform to '{t1.metamodel_name}' and "
            f"'{t2.metamodel_name}'")
    started = time.perf_counter()
    verdicts = []
    for clause in mr.clauses:
        try:
            observed = count_instances(t2, clause.type_name) - \
                count_instances(t1, clause.type_name)
        except UnknownTypeError as exc:
            raise MetamodelMismatchError(
                f"relation '{mr.id}' was generated for a different target "
                f"metamodel: {exc}") from exc
        verdicts.append(ClauseVerdict(clause.type_name, clause.delta, observed))
    elapsed = (time.perf_counter() - started) * 1000.0
    return MRReport(mr_id=mr.id, mutation=mr.mutation, verdicts=tuple(verdicts),
                    duration_ms=elapsed)


def run_metamorphic_pipeline(
    program: TransformationProgram,
    c1: Model,
    mrs: list[MetamorphicRelation],
    src_mm: Metamodel,
    tgt_mm: Metamodel,
    model_name: str | None = None,
) -> list[MRReport]:
    """Execute once on C1, then check every relation against its follow-up.

    Relations whose mutation is infeasible on this test model come back as
    skipped reports, not failures.  Reports are sorted by relation id.
    """
    t1, _ = execute_transformation(program, c1, src_mm, tgt_mm)
    reports = []
    for mr in mrs:
        started = time.perf_counter()
        try:
            c2 = apply_mutation(c1, mr.mutation, src_mm)
        except InfeasibleMutationError as exc:
            reports.append(MRReport(
                mr_id=mr.id, mutation=mr.mutation, verdicts=(),
                skipped=True, skip_reason=str(exc),
                duration_ms=(time.perf_counter() - started) * 1000.0,
                model_name=model_name))
            continue
        try:
            t2, _ = execute_transformation(program, c2, src_mm, tgt_mm)
        except ExecutionError as exc:
            raise ExecutionError(f"[{mr.id}] {exc}") from exc
        report = check_mr(mr, t1, t2)
        reports.append(MRReport(
            mr_id=report.mr_id, mutation=report.mutation,
            verdicts=report.verdicts,
            duration_ms=(time.perf_counter() - started) * 1000.0,
            model_name=model_name))
    return sorted(reports, key=lambda r: r.mr_id)


def run_regression(
    baseline_mrs: list[MetamorphicRelation],
    new_program: TransformationProgram,
    models: list[Model],
    src_mm: Metamodel,
    tgt_mm: Metamodel,
    labels: list[str] | None = None,
) -> list[MRReport]:
    """Pipeline every (model, relation) pair against the new program version;
    rows are tagged with the model label and sorted by (model, relation)."""
    if labels is None:
        labels = [f"model{i + 1}" for i in range(len(models))]
    if len(labels) != len(models):
        raise ValueError("one label per model is required")
    reports: list[MRReport] = []
    for label, model in zip(labels, models):
        reports.extend(run_metamorphic_pipeline(
            new_program, model, baseline_mrs, src_mm, tgt_mm, model_name=label))
    return sorted(reports, key=lambda r: (r.model_name or "", r.mr_id))


# --- report serialization -----------------------------------------------------------

def reports_to_dict(reports: list[MRReport]) -> dict:
    results = []
    for report in sorted(reports, key=lambda r: (r.model_name or "", r.mr_id)):
        entry: dict[str, object] = {
            "mr": report.mr_id,
            "pass": report.passed,
            "skipped": report.skipped,
            "clauses": [
                {"type": v.type_name, "expected": v.expected_delta,
                 "observed": v.observed_delta, "pass": v.passed}
                for v in report.verdicts
            ],
        }
        if report.model_name is not None:
            entry["model"] = report.model_name
        if report.skip_reason is not None:
            entry["reason"] = report.skip_reason
        results.append(entry)
    return {
        "results": results,
        "summary": {
            "total": len(reports),
            "passed": sum(1 for r in reports if r.passed),
            "failed": sum(1 for r in reports if r.failed),
            "skipped": sum(1 for r in reports if r.skipped),
        },
    }


def save_report(reports: list[MRReport], path) -> None:
    write_json(reports_to_dict(reports), path)


def format_report_table(reports: list[MRReport]) -> str:
    """Human-readable result table; failing clauses are spelled out."""
    if not reports:
        return "no relations checked"
    with_models = any(r.model_name for r in reports)
    lines = []
    header = (["MODEL"] if with_models else []) + ["MR", "RESULT", "DETAIL"]
    rows = []
    for report in reports:
        if report.skipped:
            result, detail = "skip", report.skip_reason or ""
        elif report.passed:
            result, detail = "pass", ""
        else:
            failing = [f"{v.type_name}: expected {v.expected_delta:+d}, "
                       f"observed {v.observed_delta:+d}"
                       for v in report.verdicts if not v.passed]
            result, detail = "FAIL", "; ".join(failing)
        row = ([report.model_name or ""] if with_models else []) + \
            [report.mr_id, result, detail]
        rows.append(row)
    widths = [max(len(header[i]), *(len(row[i]) for row in rows))
              for i in range(len(header))]
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip())
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i])
                               for i, cell in enumerate(row)).rstrip())
    passed = sum(1 for r in reports if r.passed)
    failed = sum(1 for r in reports if r.failed)
    skipped = sum(1 for r in reports if r.skipped)
    lines.append(f"{len(reports)} checked: {passed} passed, {failed} failed, "
                 f"{skipped} skipped")
    if skipped:
        names = sorted({r.mr_id for r in reports if r.skipped})
        lines.append("skipped (infeasible on this test model): " + ", ".join(names))
    return "\n".join(lines)


def write_report_csv(reports: list[MRReport], path) -> None:
    """Delimited per-clause export alongside the JSON report."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["model", "mr", "clause_type", "expected", "observed",
                         "clause_pass", "mr_pass", "skipped"])
        for report in sorted(reports, key=lambda r: (r.model_name or "", r.mr_id)):
            if report.skipped:
                writer.writerow([report.model_name or "", report.mr_id, "", "",
                                 "", "", str(report.passed).lower(), "true"])
                continue
            for v in report.verdicts:
                writer.writerow([
                    report.model_name or "", report.mr_id, v.type_name,
                    v.expected_delta, v.observed_delta,
                    str(v.passed).lower(), str(report.passed).lower(), "false",
                ])
