"""Deterministic random generator for (metamodels, program, model) triples,
plus the independent counting oracles the properties are checked against.

Everything is driven by a caller-supplied random.Random so that hypothesis
(or a plain seed loop) can replay any case exactly.
"""

from __future__ import annotations

import random

from mtmorph.engine import execute_transformation
from mtmorph.model import (
    AttributeDef,
    Element,
    ElementType,
    Metamodel,
    Model,
    ReferenceDef,
)
from mtmorph.mrgen import synthesize_witness
from mtmorph.mtl import (
    Binding,
    Comparison,
    ConstantRef,
    Guard,
    LiteralExpr,
    Rule,
    SourceFeature,
    TargetTemplate,
    TargetVarRef,
    TransformationProgram,
)

SOURCE_TYPE_NAMES = ("A", "B", "C")
TARGET_TYPE_NAMES = ("X", "Y", "Z", "W")
STRING_POOL = ("", "x", "foo", "Person")
INT_OPS = ("=", "<>", "<", "<=", ">", ">=")
EQ_OPS = ("=", "<>")


def scan_count(model: Model, type_name: str) -> int:
    # independent oracle: plain scan, no library counting involved
    return sum(1 for el in model.elements if el.type_name == type_name)


def measured_deltas(program, c1, c2, src_mm, tgt_mm) -> dict[str, int]:
    """Execute both runs and count instances by direct scan."""
    t1, _ = execute_transformation(program, c1, src_mm, tgt_mm)
    t2, _ = execute_transformation(program, c2, src_mm, tgt_mm)
    return {name: scan_count(t2, name) - scan_count(t1, name)
            for name in tgt_mm.type_names()}


def random_value(rng: random.Random, kind: str):
    if kind == "integer":
        return rng.randint(-5, 9)
    if kind == "string":
        return rng.choice(STRING_POOL)
    return rng.random() < 0.5


def random_source_metamodel(rng: random.Random) -> Metamodel:
    names = SOURCE_TYPE_NAMES[:rng.randint(1, 3)]
    types = []
    for name in names:
        attributes = tuple(
            AttributeDef(f"f{i}", rng.choice(("string", "integer", "boolean")),
                         required=rng.random() < 0.4)
            for i in range(rng.randint(0, 3)))
        references = ()
        if rng.random() < 0.4:
            references = (ReferenceDef("r0", rng.choice(names),
                                       required=False,
                                       many=rng.random() < 0.5),)
        types.append(ElementType(name, attributes, references))
    return Metamodel("Src", tuple(types))


def random_target_metamodel(rng: random.Random) -> Metamodel:
    names = TARGET_TYPE_NAMES[:rng.randint(1, 4)]
    types = []
    for name in names:
        attributes = tuple(
            AttributeDef(f"g{i}", rng.choice(("string", "integer", "boolean")),
                         required=rng.random() < 0.3)
            for i in range(rng.randint(0, 2)))
        references = ()
        if rng.random() < 0.3:
            references = (ReferenceDef("q0", rng.choice(names),
                                       required=False,
                                       many=rng.random() < 0.5),)
        types.append(ElementType(name, attributes, references))
    return Metamodel("Tgt", tuple(types))


def random_guard(rng: random.Random, etype: ElementType) -> Guard | None:
    if not etype.attributes or rng.random() > 0.35:
        return None
    comparisons = []
    for _ in range(rng.randint(1, 2)):
        attr = rng.choice(etype.attributes)
        op = rng.choice(INT_OPS if attr.kind == "integer" else EQ_OPS)
        comparisons.append(Comparison(attr.name, op, random_value(rng, attr.kind)))
    return Guard(tuple(comparisons))


def random_program(rng: random.Random, src_mm: Metamodel, tgt_mm: Metamodel,
                   allow_multi_source: bool = False) -> TransformationProgram:
    constants = ()
    if rng.random() < 0.3:
        constants = (("k0", rng.choice(tgt_mm.type_names())),)

    ruled = [t for t in src_mm.types if rng.random() < 0.75]
    if not ruled:
        ruled = [src_mm.types[0]]

    # skeletons first so reference-navigation bindings can see every rule
    skeletons = {}
    for etype in ruled:
        template_types = [rng.choice(tgt_mm.type_names())
                          for _ in range(rng.randint(1, 2))]
        skeletons[etype.name] = template_types

    rules = []
    constant_used = False
    navigated_types: set[str] = set()
    for etype in ruled:
        template_types = skeletons[etype.name]
        templates = []
        for index, type_name in enumerate(template_types):
            var = f"o{index + 1}"
            ttype = tgt_mm.type(type_name)
            bindings = []
            for attr in ttype.attributes:
                if not attr.required and rng.random() > 0.5:
                    continue
                # a required target feature may only copy an attribute that is
                # guaranteed present on every matched element
                compatible = [a for a in etype.attributes
                              if a.kind == attr.kind
                              and (a.required or not attr.required)]
                if compatible and rng.random() < 0.5:
                    bindings.append(Binding(attr.name, SourceFeature(
                        "s0", rng.choice(compatible).name)))
                else:
                    bindings.append(Binding(attr.name, LiteralExpr(
                        random_value(rng, attr.kind))))
            for ref in ttype.references:
                if rng.random() > 0.4:
                    continue
                choices = []
                siblings = [f"o{i + 1}" for i, t in enumerate(template_types)
                            if t == ref.target]
                if siblings:
                    choices.append(("sibling", rng.choice(siblings)))
                if constants and constants[0][1] == ref.target:
                    choices.append(("const", constants[0][0]))
                nav = _navigable_reference(etype, skeletons, ref)
                if nav is not None:
                    choices.append(("nav", nav))
                if not choices:
                    continue
                choice, payload = rng.choice(choices)
                if choice == "sibling":
                    bindings.append(Binding(ref.name, TargetVarRef(payload)))
                elif choice == "const":
                    bindings.append(Binding(ref.name, ConstantRef(payload)))
                    constant_used = True
                else:
                    bindings.append(Binding(ref.name, SourceFeature("s0", payload)))
                    navigated_types.add(etype.reference(payload).target)
            templates.append(TargetTemplate(var, type_name, tuple(bindings)))
        rules.append(Rule(
            name=f"R{etype.name}",
            source_vars=(("s0", etype.name),),
            guard=random_guard(rng, etype),
            targets=tuple(templates),
        ))

    if allow_multi_source and len(src_mm.types) >= 2 and rng.random() < 0.5:
        # an element may head many firings of a multi-source rule, so its
        # head type must never be resolved through a navigation binding
        head_candidates = [t.name for t in src_mm.types
                           if t.name not in navigated_types]
        if head_candidates:
            head = rng.choice(head_candidates)
            partner = rng.choice([t.name for t in src_mm.types if t.name != head])
            ttype = tgt_mm.type(rng.choice(tgt_mm.type_names()))
            bindings = tuple(Binding(a.name, LiteralExpr(random_value(rng, a.kind)))
                             for a in ttype.attributes if a.required)
            rules.append(Rule(
                name="RMulti",
                source_vars=(("m0", head), ("m1", partner)),
                guard=None,
                targets=(TargetTemplate("mo1", ttype.name, bindings),),
            ))

    if not constant_used:
        constants = ()
    return TransformationProgram("P", "Src", "Tgt", constants, tuple(rules))


def _navigable_reference(etype: ElementType, skeletons: dict, ref) -> str | None:
    """A source reference usable as a binding: the referenced type has a rule
    whose first template creates exactly the feature's target type, and
    multiplicities cannot overflow."""
    for src_ref in etype.references:
        templates = skeletons.get(src_ref.target)
        if templates is None or templates[0] != ref.target:
            continue
        if not ref.many and src_ref.many:
            continue
        return src_ref.name
    return None


def random_model(rng: random.Random, src_mm: Metamodel,
                 program: TransformationProgram | None = None,
                 max_elements: int = 20) -> Model:
    if not src_mm.types:
        return Model(src_mm, ())
    count = rng.randint(0, max_elements)
    guards = {}
    if program is not None:
        for rule in program.rules:
            if rule.guard is not None and len(rule.source_vars) == 1:
                guards[rule.source_vars[0][1]] = rule.guard

    elements = []
    for i in range(count):
        etype = rng.choice(src_mm.types)
        attrs: dict[str, object] = {}
        for attr in etype.attributes:
            if attr.required or rng.random() < 0.5:
                attrs[attr.name] = random_value(rng, attr.kind)
        guard = guards.get(etype.name)
        if guard is not None and rng.random() < 0.5:
            witness = synthesize_witness(guard, etype)
            if witness is not None:
                attrs.update(witness)
        elements.append(Element(f"e{i + 1}", etype.name, attrs, {}))

    # second pass: optional references to any existing element of the right type
    wired = []
    for el in elements:
        etype = src_mm.type(el.type_name)
        refs: dict[str, tuple[str, ...]] = {}
        for ref in etype.references:
            if rng.random() > 0.4:
                continue
            pool = [other.id for other in elements if other.type_name == ref.target]
            if not pool:
                continue
            how_many = rng.randint(1, 2) if ref.many else 1
            refs[ref.name] = tuple(rng.sample(pool, min(how_many, len(pool))))
        wired.append(Element(el.id, el.type_name, el.attrs, refs))
    return Model(src_mm, tuple(wired))


def random_triple(rng: random.Random, allow_multi_source: bool = False):
    src_mm = random_source_metamodel(rng)
    tgt_mm = random_target_metamodel(rng)
    program = random_program(rng, src_mm, tgt_mm,
                             allow_multi_source=allow_multi_source)
    model = random_model(rng, src_mm, program)
    return src_mm, tgt_mm, program, model
