"""Transformation execution with explicit trace recording.

Execution is two-phase.  Phase 1 matches every rule against every tuple of
distinct source elements with the declared types (Cartesian product, in
source order) whose guard holds, creates one fresh target element per
target template, and records one trace per firing.  Phase 2 evaluates
bindings; forward links between templates and links to the images of
referenced source elements resolve through the trace model, so binding
order never matters.  Module constants referenced by the program become one
distinguished element each, created between the phases and appearing in no
trace.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

from .errors import AnalysisError, ExecutionError, ParseError, ValidationError
from .jsonio import expect_list, expect_object, expect_str, read_json, write_json
from .model import Element, KIND_DEFAULTS, Metamodel, Model
from .mtl import (
    ConstantRef,
    LiteralExpr,
    SourceFeature,
    TargetVarRef,
    TransformationProgram,
    analyze,
)


@dataclass(frozen=True)
class Trace:
    """One rule firing: which source elements produced which target elements."""

    rule_name: str
    source_ids: tuple[str, ...]
    target_ids: tuple[str, ...]

    def __post_init__(self):
        if not self.source_ids or not self.target_ids:
            raise ValidationError(
                f"trace for rule '{self.rule_name}' must list at least one "
                f"source and one target element"
            )


@dataclass(frozen=True)
class TraceModel:
    """All traces of one execution, canonically ordered by rule name and
    source ids; (rule, sources) pairs are unique because each match fires
    exactly once."""

    transformation_name: str
    traces: tuple[Trace, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.traces,
                               key=lambda t: (t.rule_name, t.source_ids)))
        keys = [(t.rule_name, t.source_ids) for t in ordered]
        if len(set(keys)) != len(keys):
            raise ValidationError("duplicate (rule, sources) trace")
        object.__setattr__(self, "traces", ordered)


def execute_transformation(
    program: TransformationProgram,
    source: Model,
    src_mm: Metamodel,
    tgt_mm: Metamodel,
) -> tuple[Model, TraceModel]:
    """Run the program on a source model; returns the target model and the
    trace model.  Identical inputs always yield identical outputs."""
    diagnostics = analyze(program, src_mm, tgt_mm)
    if diagnostics:
        raise AnalysisError("; ".join(str(d) for d in diagnostics))
    if source.metamodel_name != src_mm.name:
        raise ExecutionError(
            f"source model conforms to '{source.metamodel_name}', "
            f"expected '{src_mm.name}'"
        )

    counter = itertools.count(1)

    def fresh_id() -> str:
        return f"t{next(counter)}"

    # phase 1: match and create
    firings = []  # (rule, matched elements, [(template, element id)])
    traces: list[Trace] = []
    for rule in program.rules:
        candidates = [[el for el in source.elements if el.type_name == type_name]
                      for _, type_name in rule.source_vars]
        for combo in itertools.product(*candidates):
            ids = [el.id for el in combo]
            if len(set(ids)) != len(ids):
                continue
            if rule.guard is not None and not rule.guard.satisfied_by(combo[0].attrs):
                continue
            created = [(template, fresh_id()) for template in rule.targets]
            firings.append((rule, combo, created))
            traces.append(Trace(rule.name, tuple(ids),
                                tuple(ident for _, ident in created)))

    # module constants: one element per referenced constant, no trace
    constant_ids: dict[str, str] = {}
    constant_elements: list[Element] = []
    referenced = program.referenced_constants()
    for name, type_name in program.constants:
        if name not in referenced:
            continue
        etype = tgt_mm.type(type_name)
        for ref in etype.references:
            if ref.required:
                raise ExecutionError(
                    f"constant '{name}': required reference '{ref.name}' of "
                    f"'{type_name}' cannot be bound"
                )
        attrs = {a.name: KIND_DEFAULTS[a.kind]
                 for a in etype.attributes if a.required}
        ident = fresh_id()
        constant_ids[name] = ident
        constant_elements.append(Element(ident, type_name, attrs, {}))

    # image resolution: an element's image is the element created by the
    # first target template of the trace it heads
    heads: dict[str, list[Trace]] = {}
    for trace in traces:
        heads.setdefault(trace.source_ids[0], []).append(trace)

    def image_of(element_id: str) -> str | None:
        owners = heads.get(element_id, [])
        if len(owners) > 1:
            rules = sorted({t.rule_name for t in owners})
            raise ExecutionError(
                f"element '{element_id}' heads firings of rules "
                f"{rules}; reference image is ambiguous"
            )
        return owners[0].target_ids[0] if owners else None

    # phase 2: evaluate bindings
    built: list[Element] = []
    for rule, combo, created in firings:
        env = {var: el for (var, _), el in zip(rule.source_vars, combo)}
        siblings = {template.var: ident for template, ident in created}
        for template, ident in created:
            attrs: dict[str, object] = {}
            refs: dict[str, list[str]] = {}
            for binding in template.bindings:
                expr = binding.expr
                if isinstance(expr, LiteralExpr):
                    attrs[binding.feature] = expr.value
                elif isinstance(expr, SourceFeature):
                    src_el = env[expr.var]
                    src_type = src_mm.type(src_el.type_name)
                    if src_type.attribute(expr.feature) is not None:
                        if expr.feature in src_el.attrs:
                            attrs[binding.feature] = src_el.attrs[expr.feature]
                    else:
                        # referenced elements without an image are dropped;
                        # a required feature left empty errors below
                        images = [image_of(target_id) for target_id
                                  in src_el.refs.get(expr.feature, ())]
                        refs.setdefault(binding.feature, []).extend(
                            image for image in images if image is not None)
                elif isinstance(expr, TargetVarRef):
                    refs.setdefault(binding.feature, []).append(siblings[expr.var])
                else:
                    assert isinstance(expr, ConstantRef)
                    refs.setdefault(binding.feature, []).append(
                        constant_ids[expr.name])
            built.append(Element(ident, template.type_name, attrs,
                                 {k: tuple(v) for k, v in refs.items()}))

    for el in built:
        etype = tgt_mm.type(el.type_name)
        for attr in etype.attributes:
            if attr.required and attr.name not in el.attrs:
                raise ExecutionError(
                    f"element '{el.id}' ({el.type_name}): required attribute "
                    f"'{attr.name}' left unbound"
                )
        for ref in etype.references:
            targets = el.refs.get(ref.name, ())
            if ref.required and not targets:
                raise ExecutionError(
                    f"element '{el.id}' ({el.type_name}): required reference "
                    f"'{ref.name}' left unbound"
                )
            if not ref.many and len(targets) > 1:
                raise ExecutionError(
                    f"element '{el.id}' ({el.type_name}): reference "
                    f"'{ref.name}' resolved to {len(targets)} targets but is "
                    f"not many-valued"
                )

    try:
        target = Model(tgt_mm, tuple(built + constant_elements))
    except Exception as exc:
        raise ExecutionError(f"target model does not conform: {exc}") from exc
    return target, TraceModel(program.name, tuple(traces))


# --- trace serialization ---------------------------------------------------------

def trace_model_to_dict(trace_model: TraceModel) -> dict:
    data: dict[str, object] = {"transformation": trace_model.transformation_name}
    if trace_model.traces:
        data["traces"] = [
            {"rule": t.rule_name, "sources": list(t.source_ids),
             "targets": list(t.target_ids)}
            for t in trace_model.traces
        ]
    return data


def trace_model_from_dict(data: object, ctx: str = "traces") -> TraceModel:
    obj = expect_object(data, ctx, required=("transformation",),
                        optional=("traces",))
    traces = []
    for i, raw in enumerate(expect_list(obj.get("traces", []), f"{ctx}.traces")):
        tctx = f"{ctx}.traces[{i}]"
        tobj = expect_object(raw, tctx, required=("rule", "sources", "targets"))
        traces.append(Trace(
            rule_name=expect_str(tobj["rule"], f"{tctx}.rule"),
            source_ids=tuple(expect_str(s, f"{tctx}.sources[{k}]")
                             for k, s in enumerate(
                                 expect_list(tobj["sources"], f"{tctx}.sources"))),
            target_ids=tuple(expect_str(t, f"{tctx}.targets[{k}]")
                             for k, t in enumerate(
                                 expect_list(tobj["targets"], f"{tctx}.targets"))),
        ))
    return TraceModel(
        transformation_name=expect_str(obj["transformation"], f"{ctx}.transformation"),
        traces=tuple(traces),
    )


def save_traces(trace_model: TraceModel, path: str | Path) -> None:
    write_json(trace_model_to_dict(trace_model), path)


def load_traces(path: str | Path) -> TraceModel:
    data = read_json(path)
    try:
        return trace_model_from_dict(data)
    except (ParseError, ValidationError) as exc:
        raise type(exc)(f"{path}: {exc}") from exc
