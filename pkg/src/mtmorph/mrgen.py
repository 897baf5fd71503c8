"""Mining rule patterns from traces and instantiating metamorphic relations.

Each observed rule yields one pattern: its source type signature and the
multiset of target types it creates per firing.  For every source type
consumed only by observed single-source rules, an add-one-element relation
is emitted whose clauses predict, for every target type, the instance-count
delta between the original and the follow-up result models.  Types consumed
by multi-source rules are skipped (their contribution depends on current
instance counts, so no constant delta exists), as are types whose guards
cannot be satisfied by any attribute valuation.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InconsistentPatternError, ParseError, UnknownTypeError
from .jsonio import (
    expect_int,
    expect_list,
    expect_object,
    expect_str,
    read_json,
    write_json,
)
from .model import KIND_DEFAULTS, Metamodel, Model, kind_of_value
from .engine import TraceModel
from .mtl import Guard, TransformationProgram


@dataclass(frozen=True)
class RulePattern:
    rule_name: str
    source_signature: tuple[str, ...]      # order-normalized type names
    target_multiset: dict[str, int]        # target type -> created per firing


@dataclass(frozen=True)
class Mutation:
    """Add one fresh instance of a source type, optionally with attribute
    values (the guard witness) that make the consuming rule fire."""

    type_name: str
    attrs: dict[str, object] = field(default_factory=dict)
    kind: str = "add"


@dataclass(frozen=True)
class MRClause:
    type_name: str
    delta: int


@dataclass(frozen=True)
class MetamorphicRelation:
    id: str
    mutation: Mutation
    clauses: tuple[MRClause, ...]
    provenance: tuple[str, ...] = ()

    def clause(self, type_name: str) -> MRClause | None:
        for clause in self.clauses:
            if clause.type_name == type_name:
                return clause
        return None


@dataclass(frozen=True)
class SkippedType:
    type_name: str
    reason: str


@dataclass(frozen=True)
class MrGeneration:
    relations: tuple[MetamorphicRelation, ...]
    skipped: tuple[SkippedType, ...]


def extract_patterns(
    trace_models: list[TraceModel],
    source_models: list[Model],
    target_models: list[Model],
) -> list[RulePattern]:
    """One pattern per observed rule; element types are read from the paired
    models.  Raises InconsistentPatternError when a rule shows two different
    shapes across firings (a conditional rule the count pattern cannot express)."""
    if not len(trace_models) == len(source_models) == len(target_models):
        raise ValueError("trace, source, and target model lists must be paired")

    patterns: dict[str, RulePattern] = {}
    for trace_model, source, target in zip(trace_models, source_models,
                                           target_models):
        for trace in trace_model.traces:
            signature = tuple(sorted(
                _typed(source, element_id, trace.rule_name)
                for element_id in trace.source_ids))
            multiset = dict(Counter(
                _typed(target, element_id, trace.rule_name)
                for element_id in trace.target_ids))
            seen = patterns.get(trace.rule_name)
            if seen is None:
                patterns[trace.rule_name] = RulePattern(
                    trace.rule_name, signature, multiset)
            elif seen.source_signature != signature or \
                    seen.target_multiset != multiset:
                raise InconsistentPatternError(
                    f"rule '{trace.rule_name}' observed with differing shapes: "
                    f"{list(seen.source_signature)} -> {seen.target_multiset} "
                    f"vs {list(signature)} -> {multiset}"
                )
    return [patterns[name] for name in sorted(patterns)]


def _typed(model: Model, element_id: str, rule_name: str) -> str:
    element = model.element(element_id)
    if element is None:
        raise ValueError(
            f"trace for rule '{rule_name}' references element '{element_id}' "
            f"missing from the paired model"
        )
    return element.type_name


# --- guard witness synthesis -----------------------------------------------------

_INT_FALLBACK = 0


def synthesize_witness(guard: Guard, element_type) -> dict[str, object] | None:
    """Attribute values making the guard hold, or None when unsatisfiable.

    Conjunctions are solved per attribute: equality pins the literal,
    strict bounds move one past the literal, inequality walks to the next
    unused value of the kind.
    """
    by_attr: dict[str, list] = {}
    for comparison in guard.comparisons:
        by_attr.setdefault(comparison.attr, []).append(comparison)

    witness: dict[str, object] = {}
    for attr_name, comparisons in by_attr.items():
        attr = element_type.attribute(attr_name)
        if attr is None:
            return None
        if attr.kind == "integer":
            value = _solve_integer(comparisons)
        elif attr.kind == "string":
            value = _solve_string(comparisons)
        else:
            value = _solve_boolean(comparisons)
        if value is None:
            return None
        witness[attr_name] = value
    return witness


def _solve_integer(comparisons: list) -> int | None:
    low: int | None = None
    high: int | None = None
    pinned: set[int] = set()
    banned: set[int] = set()
    for c in comparisons:
        if not isinstance(c.value, int) or isinstance(c.value, bool):
            return None
        if c.op == "=":
            pinned.add(c.value)
        elif c.op == "<>":
            banned.add(c.value)
        elif c.op == "<":
            high = c.value - 1 if high is None else min(high, c.value - 1)
        elif c.op == "<=":
            high = c.value if high is None else min(high, c.value)
        elif c.op == ">":
            low = c.value + 1 if low is None else max(low, c.value + 1)
        elif c.op == ">=":
            low = c.value if low is None else max(low, c.value)
    if low is not None and high is not None and low > high:
        return None
    if pinned:
        if len(pinned) > 1:
            return None
        value = next(iter(pinned))
        if value in banned:
            return None
        if (low is not None and value < low) or (high is not None and value > high):
            return None
        return value
    if low is not None:
        candidate = low
    elif high is not None:
        candidate = high
    else:
        candidate = _INT_FALLBACK
    while candidate in banned:
        candidate += 1
        if high is not None and candidate > high:
            return None
    return candidate


def _solve_string(comparisons: list) -> str | None:
    pinned: set[str] = set()
    banned: set[str] = set()
    for c in comparisons:
        if not isinstance(c.value, str):
            return None
        if c.op == "=":
            pinned.add(c.value)
        elif c.op == "<>":
            banned.add(c.value)
        else:
            return None  # ordering is illegal for strings
    if pinned:
        if len(pinned) > 1:
            return None
        value = next(iter(pinned))
        return None if value in banned else value
    candidate = ""
    while candidate in banned:
        candidate += "x"
    return candidate


def _solve_boolean(comparisons: list) -> bool | None:
    forced: set[bool] = set()
    for c in comparisons:
        if not isinstance(c.value, bool):
            return None
        if c.op == "=":
            forced.add(c.value)
        elif c.op == "<>":
            forced.add(not c.value)
        else:
            return None
    if len(forced) > 1:
        return None
    return next(iter(forced)) if forced else False


# --- relation generation ----------------------------------------------------------

def generate_mrs(
    patterns: list[RulePattern],
    src_mm: Metamodel,
    tgt_mm: Metamodel,
    program: TransformationProgram | None = None,
) -> MrGeneration:
    """Instantiate one add-element relation per eligible source type.

    A type is eligible when it appears in at least one observed pattern and
    every observed pattern containing it is single-source.  With the program
    at hand, guard witnesses are synthesized so the added element actually
    fires; deltas then sum over exactly the rules the witness satisfies.
    """
    target_types = sorted(tgt_mm.type_names())
    for pattern in patterns:
        for type_name in list(pattern.source_signature) + \
                list(pattern.target_multiset):
            if src_mm.type(type_name) is None and tgt_mm.type(type_name) is None:
                raise UnknownTypeError(
                    f"pattern for rule '{pattern.rule_name}' names unknown "
                    f"type '{type_name}'"
                )

    relations: list[MetamorphicRelation] = []
    skipped: list[SkippedType] = []
    for source_type in sorted(src_mm.type_names()):
        containing = [p for p in patterns if source_type in p.source_signature]
        if not containing:
            skipped.append(SkippedType(
                source_type, "no observed rule consumes this type"))
            continue
        if any(len(p.source_signature) > 1 for p in containing):
            skipped.append(SkippedType(
                source_type,
                "consumed by a multi-source rule; the count delta depends on "
                "the test model"))
            continue

        witness: dict[str, object] = {}
        satisfied = {p.rule_name for p in containing}
        if program is not None:
            etype = src_mm.type(source_type)
            rules_on_type = [r for r in program.rules
                             if r.source_types() == (source_type,)]
            guarded = [r for r in rules_on_type if r.guard is not None]
            if guarded:
                witness = synthesize_witness(guarded[0].guard, etype)
                if witness is None:
                    skipped.append(SkippedType(
                        source_type,
                        f"guard of rule '{guarded[0].name}' is unsatisfiable"))
                    continue
            full_attrs = {a.name: witness.get(a.name, KIND_DEFAULTS[a.kind])
                          for a in etype.attributes}
            known = {r.name: r for r in rules_on_type}
            satisfied = set()
            for pattern in containing:
                rule = known.get(pattern.rule_name)
                if rule is None or rule.guard is None or \
                        rule.guard.satisfied_by(full_attrs):
                    satisfied.add(pattern.rule_name)

        deltas = {type_name: 0 for type_name in target_types}
        provenance = []
        for pattern in containing:
            if pattern.rule_name not in satisfied:
                continue
            provenance.append(pattern.rule_name)
            for type_name, count in pattern.target_multiset.items():
                deltas[type_name] += count
        relations.append(MetamorphicRelation(
            id=f"add-{source_type}",
            mutation=Mutation(type_name=source_type, attrs=dict(witness)),
            clauses=tuple(MRClause(type_name, deltas[type_name])
                          for type_name in target_types),
            provenance=tuple(sorted(provenance)),
        ))
    return MrGeneration(tuple(relations), tuple(skipped))


# --- coverage reporting -----------------------------------------------------------

@dataclass(frozen=True)
class CoverageReport:
    transformation: str
    rule_firings: tuple[tuple[str, int], ...]    # program order
    unfired_rules: tuple[str, ...]
    excluded_types: tuple[SkippedType, ...]
    unknown_rules: tuple[str, ...]               # in traces but not the program

    def format(self) -> str:
        lines = [f"coverage for '{self.transformation}':"]
        for name, firings in self.rule_firings:
            flag = "  [UNFIRED]" if firings == 0 else ""
            lines.append(f"  rule {name}: {firings} firing(s){flag}")
        if self.unfired_rules:
            lines.append(
                "unfired rules contribute no relations: "
                + ", ".join(self.unfired_rules))
        if self.excluded_types:
            lines.append("source types excluded from relation generation:")
            for entry in self.excluded_types:
                lines.append(f"  {entry.type_name}: {entry.reason}")
        if self.unknown_rules:
            lines.append("traces name rules absent from the program: "
                         + ", ".join(self.unknown_rules))
        return "\n".join(lines)


def coverage_report(program: TransformationProgram,
                    trace_models: list[TraceModel]) -> CoverageReport:
    """Firing counts per rule across all trace models, plus the source types
    that relation generation would exclude and why."""
    firings = Counter()
    for trace_model in trace_models:
        for trace in trace_model.traces:
            firings[trace.rule_name] += 1

    rule_firings = tuple((rule.name, firings.get(rule.name, 0))
                         for rule in program.rules)
    unfired = tuple(name for name, count in rule_firings if count == 0)
    unknown = tuple(sorted(name for name in firings
                           if program.rule(name) is None))

    consumed = sorted({type_name for rule in program.rules
                       for type_name in rule.source_types()})
    excluded: list[SkippedType] = []
    for source_type in consumed:
        fired_rules = [rule for rule in program.rules
                       if firings.get(rule.name, 0) > 0
                       and source_type in rule.source_types()]
        if not fired_rules:
            excluded.append(SkippedType(
                source_type, "no fired rule consumes this type"))
            continue
        if any(len(rule.source_vars) > 1 for rule in fired_rules):
            excluded.append(SkippedType(
                source_type, "consumed by a multi-source rule"))
        # a fired rule's guard is satisfiable by evidence, so guards add no
        # further exclusions here
    return CoverageReport(
        transformation=program.name,
        rule_firings=rule_firings,
        unfired_rules=unfired,
        excluded_types=tuple(excluded),
        unknown_rules=unknown,
    )


# --- OCL-style rendering -----------------------------------------------------------

def render_mr_ocl(mr: MetamorphicRelation) -> str:
    """One comparison line per clause: growing types first, then unchanged
    types, each group alphabetical."""
    nonzero = sorted((c for c in mr.clauses if c.delta != 0),
                     key=lambda c: c.type_name)
    zero = sorted((c for c in mr.clauses if c.delta == 0),
                  key=lambda c: c.type_name)
    lines = []
    for clause in nonzero:
        lines.append(
            f"T1_{clause.type_name}.allInstances()->size()="
            f"T2_{clause.type_name}.allInstances()->size()-{clause.delta}")
    for clause in zero:
        lines.append(
            f"T1_{clause.type_name}.allInstances()->size()="
            f"T2_{clause.type_name}.allInstances()->size()")
    return "\n".join(lines)


# --- relation file I/O --------------------------------------------------------------

def relations_to_dict(transformation: str,
                      relations: list[MetamorphicRelation]) -> dict:
    entries = []
    for mr in sorted(relations, key=lambda m: m.id):
        mutation: dict[str, object] = {"kind": mr.mutation.kind,
                                       "type": mr.mutation.type_name}
        if mr.mutation.attrs:
            mutation["attrs"] = dict(mr.mutation.attrs)
        entry: dict[str, object] = {
            "id": mr.id,
            "mutation": mutation,
            "clauses": [{"type": c.type_name, "delta": c.delta}
                        for c in sorted(mr.clauses, key=lambda c: c.type_name)],
        }
        if mr.provenance:
            entry["provenance"] = list(mr.provenance)
        entries.append(entry)
    data: dict[str, object] = {"transformation": transformation}
    if entries:
        data["relations"] = entries
    return data


def relations_from_dict(data: object, ctx: str = "relations") \
        -> tuple[str, list[MetamorphicRelation]]:
    obj = expect_object(data, ctx, required=("transformation",),
                        optional=("relations",))
    relations = []
    for i, raw in enumerate(expect_list(obj.get("relations", []),
                                        f"{ctx}.relations")):
        rctx = f"{ctx}.relations[{i}]"
        robj = expect_object(raw, rctx, required=("id", "mutation", "clauses"),
                             optional=("provenance",))
        mctx = f"{rctx}.mutation"
        mobj = expect_object(robj["mutation"], mctx, required=("kind", "type"),
                             optional=("attrs",))
        kind = expect_str(mobj["kind"], f"{mctx}.kind")
        if kind != "add":
            raise ParseError(f"{mctx}: unknown mutation kind '{kind}'")
        attrs_obj = mobj.get("attrs", {})
        if not isinstance(attrs_obj, dict):
            raise ParseError(f"{mctx}.attrs: expected an object")
        for name, value in attrs_obj.items():
            if kind_of_value(value) is None:
                raise ParseError(
                    f"{mctx}.attrs.{name}: expected a string, integer, or boolean")
        clauses = []
        for j, craw in enumerate(expect_list(robj["clauses"], f"{rctx}.clauses")):
            cctx = f"{rctx}.clauses[{j}]"
            cobj = expect_object(craw, cctx, required=("type", "delta"))
            clauses.append(MRClause(
                type_name=expect_str(cobj["type"], f"{cctx}.type"),
                delta=expect_int(cobj["delta"], f"{cctx}.delta"),
            ))
        relations.append(MetamorphicRelation(
            id=expect_str(robj["id"], f"{rctx}.id"),
            mutation=Mutation(
                type_name=expect_str(mobj["type"], f"{mctx}.type"),
                attrs=dict(attrs_obj)),
            clauses=tuple(clauses),
            provenance=tuple(expect_str(p, f"{rctx}.provenance[{k}]")
                             for k, p in enumerate(expect_list(
                                 robj.get("provenance", []),
                                 f"{rctx}.provenance"))),
        ))
    return expect_str(obj["transformation"], f"{ctx}.transformation"), relations


def save_mrs(transformation: str, relations: list[MetamorphicRelation],
             path: str | Path) -> None:
    write_json(relations_to_dict(transformation, relations), path)


def load_mrs(path: str | Path) -> tuple[str, list[MetamorphicRelation]]:
    data = read_json(path)
    try:
        return relations_from_dict(data)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def render_mrs_ocl(relations: list[MetamorphicRelation]) -> str:
    """Multi-relation rendering: a comment header per relation id."""
    blocks = []
    for mr in sorted(relations, key=lambda m: m.id):
        blocks.append(f"-- {mr.id}\n{render_mr_ocl(mr)}")
    return "\n\n".join(blocks) + "\n" if blocks else ""
