"""Bundled golden fixtures: executable end-to-end examples of the pipeline.

Each fixture directory holds the inputs (metamodels, a test model, the
transformation) next to the expected outputs in canonical form.  Verifying
a fixture re-runs the CLI into a scratch directory and compares bytes, so
the fixtures double as documentation and as regression anchors.
"""

from __future__ import annotations

import json
import tempfile
from dataclasses import dataclass
from pathlib import Path

from ..errors import MtmorphError

_ROOT = Path(__file__).parent

FIXTURE_NAMES = ("class2relational",)


@dataclass(frozen=True)
class FixtureResult:
    name: str
    passed: bool
    divergence: str | None = None


def fixture_dir(name: str, root: Path | None = None) -> Path:
    base = Path(root) if root is not None else _ROOT
    path = base / name
    if not path.is_dir():
        raise MtmorphError(f"unknown fixture '{name}'")
    return path


def verify_fixture(name: str, root: Path | None = None) -> FixtureResult:
    """Run the fixture through run / gen-mrs / check and compare against the
    expected files; reports the first divergence."""
    from .. import cli

    fixture = fixture_dir(name, root)

    def diverged(message: str) -> FixtureResult:
        return FixtureResult(name=name, passed=False, divergence=message)

    with tempfile.TemporaryDirectory(prefix="mtmorph-fixture-") as scratch_dir:
        scratch = Path(scratch_dir)
        target = scratch / "target.json"
        traces = scratch / "traces.json"
        mrs = scratch / "mrs.json"
        ocl = scratch / "mrs.ocl.txt"
        report = scratch / "report.json"

        status = cli.main([
            "run",
            "--transform", str(fixture / "class2relational.mtl"),
            "--source-mm", str(fixture / "class.mm.json"),
            "--target-mm", str(fixture / "relational.mm.json"),
            "--model", str(fixture / "model.json"),
            "--out", str(target),
            "--trace", str(traces),
        ])
        if status != 0:
            return diverged(f"run exited with status {status}")
        for produced, expected_name in ((target, "expected_target.json"),
                                        (traces, "expected_traces.json")):
            mismatch = _compare(produced, fixture / expected_name)
            if mismatch:
                return diverged(mismatch)

        status = cli.main([
            "gen-mrs",
            "--traces", str(traces),
            "--models", str(fixture / "model.json"),
            "--targets", str(target),
            "--source-mm", str(fixture / "class.mm.json"),
            "--target-mm", str(fixture / "relational.mm.json"),
            "--transform", str(fixture / "class2relational.mtl"),
            "--out", str(mrs),
            "--ocl", str(ocl),
        ])
        if status != 0:
            return diverged(f"gen-mrs exited with status {status}")
        for produced, expected_name in ((mrs, "expected_mrs.json"),
                                        (ocl, "expected_mrs.ocl.txt")):
            mismatch = _compare(produced, fixture / expected_name)
            if mismatch:
                return diverged(mismatch)

        status = cli.main([
            "check",
            "--transform", str(fixture / "class2relational.mtl"),
            "--source-mm", str(fixture / "class.mm.json"),
            "--target-mm", str(fixture / "relational.mm.json"),
            "--model", str(fixture / "model.json"),
            "--mrs", str(mrs),
            "--report", str(report),
        ])
        if status != 0:
            return diverged(f"check exited with status {status}")
        summary = json.loads(report.read_text(encoding="utf-8"))["summary"]
        if summary["failed"] or summary["skipped"]:
            return diverged(f"check summary not all-pass: {summary}")

    return FixtureResult(name=name, passed=True)


def _compare(produced: Path, expected: Path) -> str | None:
    if not expected.is_file():
        return f"{expected.name}: expected file missing from fixture"
    if produced.read_bytes() != expected.read_bytes():
        return f"{expected.name}: produced output differs"
    return None
