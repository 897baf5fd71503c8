"""`mtmorph` command line: execute, mine relations, check, and regress.

Exit codes follow a CI-friendly contract: 0 success, 1 operational error
(unreadable or invalid inputs, execution failure), 2 at least one relation
failed, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import checker, engine, mrgen, model, mtl, mutator
from .errors import MtmorphError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MR_FAILURE = 2
EXIT_USAGE = 64


class UsageError(Exception):
    """Bad flag combinations that argparse alone cannot express."""


class _Parser(argparse.ArgumentParser):
    """argparse with the usage exit code this tool promises."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    parser = _Parser(prog="mtmorph", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", metavar="COMMAND",
                                     parser_class=_Parser, required=True)

    run = commands.add_parser(
        "run", help="execute a transformation, writing the target model and traces")
    run.add_argument("--transform", required=True, help="transformation file (.mtl)")
    run.add_argument("--source-mm", required=True, help="source metamodel (JSON)")
    run.add_argument("--target-mm", required=True, help="target metamodel (JSON)")
    run.add_argument("--model", required=True, help="source model (JSON)")
    run.add_argument("--out", required=True, help="target model output path")
    run.add_argument("--trace", required=True, help="trace model output path")
    run.add_argument("--json", action="store_true",
                     help="machine-readable summary on standard output")
    run.set_defaults(handler=cmd_run)

    gen = commands.add_parser(
        "gen-mrs", help="derive metamorphic relations from one or more executions")
    gen.add_argument("--traces", required=True, nargs="+",
                     help="trace model files, one per execution")
    gen.add_argument("--models", required=True, nargs="+",
                     help="source models paired with --traces")
    gen.add_argument("--targets", required=True, nargs="+",
                     help="target models paired with --traces")
    gen.add_argument("--source-mm", required=True)
    gen.add_argument("--target-mm", required=True)
    gen.add_argument("--transform", help="transformation file; enables guard "
                     "witness synthesis and the full coverage report")
    gen.add_argument("--out", required=True, help="relation file output path")
    gen.add_argument("--ocl", help="also write an OCL-style rendering here")
    gen.add_argument("--json", action="store_true")
    gen.set_defaults(handler=cmd_genmrs)

    check = commands.add_parser(
        "check", help="run the metamorphic pipeline for one test model")
    check.add_argument("--transform", required=True)
    check.add_argument("--source-mm", required=True)
    check.add_argument("--target-mm", required=True)
    check.add_argument("--model", required=True)
    check.add_argument("--mrs", required=True, help="relation file (JSON)")
    check.add_argument("--report", required=True, help="report output path")
    check.add_argument("--seed-fault", metavar="KIND:RULE[:INDEX]",
                       help="plant a fault before checking, e.g. "
                       "drop-template:Class2Table:2")
    check.add_argument("--csv", help="also write per-clause rows here")
    check.add_argument("--plot", help="also render a summary figure here (PNG)")
    check.add_argument("--json", action="store_true")
    check.set_defaults(handler=cmd_check)

    regress = commands.add_parser(
        "regress", help="check relations against a program version for many models")
    regress.add_argument("--transform", required=True,
                         help="the (new) transformation version")
    regress.add_argument("--source-mm", required=True)
    regress.add_argument("--target-mm", required=True)
    regress.add_argument("--models", required=True, nargs="+")
    regress.add_argument("--mrs", required=True)
    regress.add_argument("--report", required=True)
    regress.add_argument("--csv", help="also write per-clause rows here")
    regress.add_argument("--plot", help="also render an outcome matrix here (PNG)")
    regress.add_argument("--json", action="store_true")
    regress.set_defaults(handler=cmd_regress)

    verify = commands.add_parser(
        "verify-fixture", help="re-run a bundled fixture and compare against "
        "its expected outputs")
    verify.add_argument("name", help="fixture name, e.g. class2relational")
    verify.set_defaults(handler=cmd_verify_fixture)

    return parser


def _require_files(*paths: str) -> None:
    for path in paths:
        if path is not None and not Path(path).is_file():
            raise MtmorphError(f"input file not found: {path}")


def _load_common(args):
    src_mm = model.load_metamodel(args.source_mm)
    tgt_mm = model.load_metamodel(args.target_mm)
    program = mtl.load_transformation(args.transform)
    diagnostics = mtl.analyze(program, src_mm, tgt_mm)
    if diagnostics:
        raise MtmorphError(
            "transformation does not analyze cleanly:\n  "
            + "\n  ".join(str(d) for d in diagnostics))
    return src_mm, tgt_mm, program


def cmd_run(args) -> int:
    _require_files(args.transform, args.source_mm, args.target_mm, args.model)
    src_mm, tgt_mm, program = _load_common(args)
    source = model.load_model(args.model, src_mm)
    target, traces = engine.execute_transformation(program, source, src_mm, tgt_mm)
    model.save_model(target, args.out)
    engine.save_traces(traces, args.trace)
    if args.json:
        print(json.dumps({"elements": len(target.elements),
                          "traces": len(traces.traces)}, sort_keys=True))
    else:
        print(f"wrote {args.out} ({len(target.elements)} elements) and "
              f"{args.trace} ({len(traces.traces)} traces)")
    return EXIT_OK


def cmd_genmrs(args) -> int:
    if not len(args.traces) == len(args.models) == len(args.targets):
        raise UsageError("--traces, --models, and --targets must be paired "
                         "(same number of files)")
    _require_files(args.source_mm, args.target_mm, args.transform,
                   *args.traces, *args.models, *args.targets)
    src_mm = model.load_metamodel(args.source_mm)
    tgt_mm = model.load_metamodel(args.target_mm)
    trace_models = [engine.load_traces(path) for path in args.traces]
    source_models = [model.load_model(path, src_mm) for path in args.models]
    target_models = [model.load_model(path, tgt_mm) for path in args.targets]
    program = mtl.load_transformation(args.transform) if args.transform else None

    try:
        patterns = mrgen.extract_patterns(trace_models, source_models,
                                          target_models)
    except ValueError as exc:
        raise MtmorphError(str(exc)) from exc
    generation = mrgen.generate_mrs(patterns, src_mm, tgt_mm, program)

    transformation = trace_models[0].transformation_name if trace_models \
        else (program.name if program else "unknown")
    mrgen.save_mrs(transformation, list(generation.relations), args.out)
    if args.ocl:
        Path(args.ocl).write_text(mrgen.render_mrs_ocl(list(generation.relations)),
                                  encoding="utf-8")

    for entry in generation.skipped:
        print(f"skipped {entry.type_name}: {entry.reason}", file=sys.stderr)

    if args.json:
        print(json.dumps({
            "relations": [mr.id for mr in generation.relations],
            "skipped": [{"type": s.type_name, "reason": s.reason}
                        for s in generation.skipped],
        }, sort_keys=True))
    elif program is not None:
        print(mrgen.coverage_report(program, trace_models).format())
        print(f"wrote {len(generation.relations)} relation(s) to {args.out}")
    else:
        firings = {}
        for trace_model in trace_models:
            for trace in trace_model.traces:
                firings[trace.rule_name] = firings.get(trace.rule_name, 0) + 1
        for name in sorted(firings):
            print(f"  rule {name}: {firings[name]} firing(s)")
        print(f"wrote {len(generation.relations)} relation(s) to {args.out}")
    return EXIT_OK


def cmd_check(args) -> int:
    _require_files(args.transform, args.source_mm, args.target_mm,
                   args.model, args.mrs)
    src_mm, tgt_mm, program = _load_common(args)
    if args.seed_fault:
        seed = mutator.parse_fault_seed(args.seed_fault)
        program = mutator.seed_fault(program, seed, src_mm, tgt_mm)
    c1 = model.load_model(args.model, src_mm)
    _, relations = mrgen.load_mrs(args.mrs)
    reports = checker.run_metamorphic_pipeline(program, c1, relations,
                                               src_mm, tgt_mm)
    return _emit_reports(reports, args)


def cmd_regress(args) -> int:
    _require_files(args.transform, args.source_mm, args.target_mm,
                   args.mrs, *args.models)
    src_mm, tgt_mm, program = _load_common(args)
    models = [model.load_model(path, src_mm) for path in args.models]
    _, relations = mrgen.load_mrs(args.mrs)
    labels = [Path(path).name for path in args.models]
    reports = checker.run_regression(relations, program, models,
                                     src_mm, tgt_mm, labels=labels)
    return _emit_reports(reports, args)


def _emit_reports(reports, args) -> int:
    checker.save_report(reports, args.report)
    if getattr(args, "csv", None):
        checker.write_report_csv(reports, args.csv)
    if getattr(args, "plot", None):
        from . import plots  # matplotlib import deferred until needed

        plots.render_report_figure(reports, args.plot)
    if args.json:
        print(json.dumps(checker.reports_to_dict(reports)["summary"],
                         sort_keys=True))
    else:
        print(checker.format_report_table(reports))
    failed = any(r.failed for r in reports)
    return EXIT_MR_FAILURE if failed else EXIT_OK


def cmd_verify_fixture(args) -> int:
    from . import fixtures

    result = fixtures.verify_fixture(args.name)
    if result.passed:
        print(f"fixture '{args.name}': ok")
        return EXIT_OK
    print(f"fixture '{args.name}': FAILED: {result.divergence}", file=sys.stderr)
    return EXIT_ERROR


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help exits 0; usage errors exit 64
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"mtmorph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MtmorphError as exc:
        print(f"mtmorph: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entry_point() -> None:
    sys.exit(main())
