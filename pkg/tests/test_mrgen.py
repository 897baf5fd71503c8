from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from mtmorph.engine import Trace, TraceModel, execute_transformation
from mtmorph.errors import InconsistentPatternError
from mtmorph.model import AttributeDef, Element, ElementType, Metamodel, Model
from mtmorph.mrgen import (
    MRClause,
    MetamorphicRelation,
    Mutation,
    RulePattern,
    coverage_report,
    extract_patterns,
    generate_mrs,
    load_mrs,
    render_mr_ocl,
    render_mrs_ocl,
    save_mrs,
    synthesize_witness,
)
from mtmorph.mtl import Comparison, Guard, parse_transformation

from genutil import random_triple


def fixture_run(c2r):
    target, traces = execute_transformation(c2r.program, c2r.model,
                                            c2r.src_mm, c2r.tgt_mm)
    return target, traces


def test_extract_fixture_patterns(c2r):
    target, traces = fixture_run(c2r)
    patterns = extract_patterns([traces], [c2r.model], [target])
    assert patterns == [
        RulePattern("Class2Table", ("Class",), {"Table": 1, "Column": 1}),
        RulePattern("DataType2Type", ("DataType",), {"Type": 1}),
    ]


def test_extract_empty():
    assert extract_patterns([], [], []) == []


def test_extract_idempotent_across_runs(c2r):
    target, traces = fixture_run(c2r)
    once = extract_patterns([traces], [c2r.model], [target])
    twice = extract_patterns([traces, traces], [c2r.model, c2r.model],
                             [target, target])
    assert once == twice


def test_extract_inconsistent_pattern():
    mm_src = Metamodel("S", (ElementType("A"),))
    mm_tgt = Metamodel("G", (ElementType("X"),))
    src = Model(mm_src, (Element("a1", "A"),))
    one = Model(mm_tgt, (Element("t1", "X"),))
    two = Model(mm_tgt, (Element("t1", "X"), Element("t2", "X")))
    first = TraceModel("T", (Trace("R", ("a1",), ("t1",)),))
    second = TraceModel("T", (Trace("R", ("a1",), ("t1", "t2")),))
    with pytest.raises(InconsistentPatternError, match="'R'"):
        extract_patterns([first, second], [src, src], [one, two])


def test_extract_unpaired_lists():
    with pytest.raises(ValueError, match="paired"):
        extract_patterns([TraceModel("T", ())], [], [])


def test_generate_fixture_mrs(c2r):
    target, traces = fixture_run(c2r)
    patterns = extract_patterns([traces], [c2r.model], [target])
    generation = generate_mrs(patterns, c2r.src_mm, c2r.tgt_mm, c2r.program)
    assert generation.skipped == ()
    add_class, add_datatype = generation.relations
    assert add_class.id == "add-Class"
    assert add_class.mutation == Mutation("Class", {})
    assert add_class.clauses == (MRClause("Column", 1), MRClause("Table", 1),
                                 MRClause("Type", 0))
    assert add_class.provenance == ("Class2Table",)
    assert add_datatype.id == "add-DataType"
    assert add_datatype.clauses == (MRClause("Column", 0), MRClause("Table", 0),
                                    MRClause("Type", 1))
    assert add_datatype.provenance == ("DataType2Type",)


def test_unobserved_type_yields_no_relation(c2r):
    target, traces = fixture_run(c2r)
    only_datatype = TraceModel(traces.transformation_name, tuple(
        t for t in traces.traces if t.rule_name == "DataType2Type"))
    patterns = extract_patterns([only_datatype], [c2r.model], [target])
    generation = generate_mrs(patterns, c2r.src_mm, c2r.tgt_mm, c2r.program)
    assert [mr.id for mr in generation.relations] == ["add-DataType"]
    assert [s.type_name for s in generation.skipped] == ["Class"]


def test_multi_source_types_skipped():
    src_mm = Metamodel("S", (ElementType("A"), ElementType("B")))
    tgt_mm = Metamodel("G", (ElementType("X"), ElementType("Y")))
    patterns = [
        RulePattern("RA", ("A",), {"X": 1}),
        RulePattern("RAB", ("A", "B"), {"Y": 1}),
    ]
    generation = generate_mrs(patterns, src_mm, tgt_mm)
    # A is consumed by a multi-source rule too, so both types are skipped
    assert generation.relations == ()
    reasons = {s.type_name: s.reason for s in generation.skipped}
    assert "multi-source" in reasons["A"] and "multi-source" in reasons["B"]


def test_generation_without_program(c2r):
    target, traces = fixture_run(c2r)
    patterns = extract_patterns([traces], [c2r.model], [target])
    generation = generate_mrs(patterns, c2r.src_mm, c2r.tgt_mm)
    assert [mr.id for mr in generation.relations] == ["add-Class", "add-DataType"]


def test_delta_linearity(c2r):
    # union of two covering runs equals any single covering run
    target, traces = fixture_run(c2r)
    single = extract_patterns([traces], [c2r.model], [target])
    union = extract_patterns([traces, traces], [c2r.model, c2r.model],
                             [target, target])
    one = generate_mrs(single, c2r.src_mm, c2r.tgt_mm, c2r.program)
    both = generate_mrs(union, c2r.src_mm, c2r.tgt_mm, c2r.program)
    assert one == both


def test_dropped_rule_still_generates_from_old_traces(c2r):
    # relations are mined from traces alone; a program version that lost the
    # rule does not block generation (regression checking then catches it)
    target, traces = fixture_run(c2r)
    patterns = extract_patterns([traces], [c2r.model], [target])
    smaller = parse_transformation(
        "transformation Class2Relational from Class to Relational;\n"
        "rule Class2Table { from c : Class!Class to out : Relational!Table ("
        " name <- c.name ) }")
    generation = generate_mrs(patterns, c2r.src_mm, c2r.tgt_mm, smaller)
    add_datatype = [mr for mr in generation.relations if mr.id == "add-DataType"]
    assert add_datatype and add_datatype[0].clause("Type").delta == 1


# --- witness synthesis ---------------------------------------------------------

INT_TYPE = ElementType("A", (AttributeDef("n", "integer"),
                             AttributeDef("s", "string"),
                             AttributeDef("b", "boolean")))


def guard(*comparisons) -> Guard:
    return Guard(tuple(Comparison(*c) for c in comparisons))


@pytest.mark.parametrize("comparisons,check", [
    ((("n", "=", 7),), lambda w: w["n"] == 7),
    ((("n", "<", 5),), lambda w: w["n"] == 4),
    ((("n", "<=", 5),), lambda w: w["n"] == 5),
    ((("n", ">", 5),), lambda w: w["n"] == 6),
    ((("n", ">=", 5),), lambda w: w["n"] == 5),
    ((("n", "<>", 0),), lambda w: w["n"] != 0),
    ((("n", ">", 3), ("n", "<", 10)), lambda w: 3 < w["n"] < 10),
    ((("s", "=", "yes"),), lambda w: w["s"] == "yes"),
    ((("s", "<>", ""),), lambda w: w["s"] != ""),
    ((("b", "=", True),), lambda w: w["b"] is True),
    ((("b", "<>", True),), lambda w: w["b"] is False),
])
def test_witness_synthesis_satisfies(comparisons, check):
    g = guard(*comparisons)
    witness = synthesize_witness(g, INT_TYPE)
    assert witness is not None and check(witness)
    assert g.satisfied_by(witness)


@pytest.mark.parametrize("comparisons", [
    (("n", ">", 5), ("n", "<", 3)),
    (("n", "=", 1), ("n", "=", 2)),
    (("n", "=", 1), ("n", "<>", 1)),
    (("s", "=", "a"), ("s", "=", "b")),
    (("b", "=", True), ("b", "<>", True)),
    (("missing", "=", 1),),
])
def test_witness_synthesis_unsatisfiable(comparisons):
    assert synthesize_witness(guard(*comparisons), INT_TYPE) is None


def test_unsatisfiable_guard_skips_type():
    src_mm = Metamodel("S", (INT_TYPE,))
    tgt_mm = Metamodel("G", (ElementType("X"),))
    program = parse_transformation(
        "transformation T from S to G;\n"
        "rule R { from a : A (a.n > 5 and a.n < 3) to x : X () }")
    patterns = [RulePattern("R", ("A",), {"X": 1})]
    generation = generate_mrs(patterns, src_mm, tgt_mm, program)
    assert generation.relations == ()
    assert "unsatisfiable" in generation.skipped[0].reason


def test_witnessed_guard_flows_into_mutation():
    src_mm = Metamodel("S", (INT_TYPE,))
    tgt_mm = Metamodel("G", (ElementType("X"),))
    program = parse_transformation(
        "transformation T from S to G;\n"
        "rule R { from a : A (a.n > 41) to x : X () }")
    patterns = [RulePattern("R", ("A",), {"X": 1})]
    generation = generate_mrs(patterns, src_mm, tgt_mm, program)
    (mr,) = generation.relations
    assert mr.mutation.attrs == {"n": 42}
    assert mr.clause("X").delta == 1


# --- rendering -----------------------------------------------------------------

def test_render_add_datatype_matches_expected_lines(c2r):
    target, traces = fixture_run(c2r)
    patterns = extract_patterns([traces], [c2r.model], [target])
    generation = generate_mrs(patterns, c2r.src_mm, c2r.tgt_mm, c2r.program)
    by_id = {mr.id: mr for mr in generation.relations}
    assert render_mr_ocl(by_id["add-DataType"]).splitlines() == [
        "T1_Type.allInstances()->size()=T2_Type.allInstances()->size()-1",
        "T1_Column.allInstances()->size()=T2_Column.allInstances()->size()",
        "T1_Table.allInstances()->size()=T2_Table.allInstances()->size()",
    ]
    assert render_mr_ocl(by_id["add-Class"]).splitlines() == [
        "T1_Column.allInstances()->size()=T2_Column.allInstances()->size()-1",
        "T1_Table.allInstances()->size()=T2_Table.allInstances()->size()-1",
        "T1_Type.allInstances()->size()=T2_Type.allInstances()->size()",
    ]


def test_render_all_zero_deltas():
    mr = MetamorphicRelation("add-A", Mutation("A"),
                             (MRClause("X", 0), MRClause("Y", 0)))
    assert render_mr_ocl(mr).splitlines() == [
        "T1_X.allInstances()->size()=T2_X.allInstances()->size()",
        "T1_Y.allInstances()->size()=T2_Y.allInstances()->size()",
    ]


def test_render_delta_two():
    mr = MetamorphicRelation("add-A", Mutation("A"), (MRClause("X", 2),))
    assert render_mr_ocl(mr) == \
        "T1_X.allInstances()->size()=T2_X.allInstances()->size()-2"


def test_render_multiple_relations_has_headers():
    mrs = [MetamorphicRelation("add-A", Mutation("A"), (MRClause("X", 1),)),
           MetamorphicRelation("add-B", Mutation("B"), (MRClause("X", 0),))]
    text = render_mrs_ocl(mrs)
    assert text.startswith("-- add-A\n")
    assert "\n\n-- add-B\n" in text
    assert text.endswith("\n")


# --- coverage ------------------------------------------------------------------

def test_coverage_all_fired(c2r):
    _, traces = fixture_run(c2r)
    report = coverage_report(c2r.program, [traces])
    assert report.rule_firings == (("DataType2Type", 1), ("Class2Table", 1))
    assert report.unfired_rules == ()
    assert report.excluded_types == ()


def test_coverage_empty_traces(c2r):
    report = coverage_report(c2r.program, [])
    assert report.unfired_rules == ("DataType2Type", "Class2Table")
    assert {s.type_name for s in report.excluded_types} == {"Class", "DataType"}


def test_coverage_unfired_rule_flagged(c2r):
    _, traces = fixture_run(c2r)
    only_datatype = TraceModel(traces.transformation_name, tuple(
        t for t in traces.traces if t.rule_name == "DataType2Type"))
    report = coverage_report(c2r.program, [only_datatype])
    assert report.unfired_rules == ("Class2Table",)
    assert [s.type_name for s in report.excluded_types] == ["Class"]
    assert "Class2Table" in report.format()


def test_coverage_unknown_rule_listed(c2r):
    foreign = TraceModel("Class2Relational",
                         (Trace("Ghost", ("c1",), ("t1",)),))
    report = coverage_report(c2r.program, [foreign])
    assert report.unknown_rules == ("Ghost",)


# --- relation file I/O -----------------------------------------------------------

def test_mrs_file_roundtrip(tmp_path, c2r):
    target, traces = fixture_run(c2r)
    patterns = extract_patterns([traces], [c2r.model], [target])
    generation = generate_mrs(patterns, c2r.src_mm, c2r.tgt_mm, c2r.program)
    path = tmp_path / "mrs.json"
    save_mrs("Class2Relational", list(generation.relations), path)
    name, loaded = load_mrs(path)
    assert name == "Class2Relational"
    assert tuple(loaded) == generation.relations


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_one_clause_per_target_type(seed):
    rng = random.Random(seed)
    src_mm, tgt_mm, program, model = random_triple(rng)
    target, traces = execute_transformation(program, model, src_mm, tgt_mm)
    patterns = extract_patterns([traces], [model], [target])
    generation = generate_mrs(patterns, src_mm, tgt_mm, program)
    for mr in generation.relations:
        assert sorted(c.type_name for c in mr.clauses) == \
            sorted(tgt_mm.type_names())
        assert all(c.delta >= 0 for c in mr.clauses)
        nonzero = sum(c.delta for c in mr.clauses)
        if mr.provenance:
            assert nonzero > 0
