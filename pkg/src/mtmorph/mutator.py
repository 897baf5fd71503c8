"""Follow-up model construction and transformation fault seeding.

`apply_mutation` builds a follow-up test model by adding exactly one fresh
element; everything about the addition is deterministic (ids, attribute
defaults, first-compatible required references) so downstream outputs stay
diffable.  `seed_fault` plants a single structural bug in a program while
keeping it statically clean, which is how the generated relations are shown
to detect defects.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import (
    InfeasibleMutationError,
    InvalidLocusError,
    UnknownTypeError,
    UnsatisfiableSeedError,
)
from .model import Element, KIND_DEFAULTS, Metamodel, Model, kind_of_value
from .mrgen import Mutation
from .mtl import (
    Binding,
    ConstantRef,
    LiteralExpr,
    Rule,
    SourceFeature,
    TargetTemplate,
    TargetVarRef,
    TransformationProgram,
    analyze,
)

FAULT_KINDS = ("retarget-template", "drop-template", "drop-rule", "dup-template")

_SEED_FLAG = re.compile(r"^(?P<kind>[a-z-]+):(?P<rule>[A-Za-z_]\w*)(:(?P<index>\d+))?$")


def apply_mutation(c1: Model, mutation: Mutation, src_mm: Metamodel) -> Model:
    """Return C1 plus one fresh element of the mutation's type.

    The new element takes guard-witness attribute values where present and
    kind defaults otherwise; required references are filled with the first
    compatible element in id order.  C1 itself is untouched.
    """
    etype = src_mm.type(mutation.type_name)
    if etype is None:
        raise UnknownTypeError(
            f"mutation adds unknown type '{mutation.type_name}'")

    suffix = 1
    taken = {el.id for el in c1.elements}
    while f"mut{suffix}" in taken:
        suffix += 1
    fresh_id = f"mut{suffix}"

    attrs: dict[str, object] = {}
    for attr in etype.attributes:
        if attr.name in mutation.attrs:
            value = mutation.attrs[attr.name]
            if kind_of_value(value) != attr.kind:
                raise InfeasibleMutationError(
                    f"witness value {value!r} for attribute '{attr.name}' "
                    f"does not have kind '{attr.kind}'")
            attrs[attr.name] = value
        else:
            attrs[attr.name] = KIND_DEFAULTS[attr.kind]

    refs: dict[str, tuple[str, ...]] = {}
    for ref in etype.references:
        if not ref.required:
            continue
        compatible = sorted(el.id for el in c1.elements
                            if el.type_name == ref.target)
        if not compatible:
            raise InfeasibleMutationError(
                f"required reference '{ref.name}' of '{etype.name}' has no "
                f"compatible target in the test model")
        refs[ref.name] = (compatible[0],)

    fresh = Element(fresh_id, mutation.type_name, attrs, refs)
    return Model(c1.metamodel, c1.elements + (fresh,))


# --- fault seeding ------------------------------------------------------------------

@dataclass(frozen=True)
class FaultSeed:
    kind: str
    rule_name: str
    template_index: int | None = None  # 1-based

    def __post_init__(self):
        if self.kind not in FAULT_KINDS:
            raise InvalidLocusError(f"unknown fault kind '{self.kind}'")


def parse_fault_seed(text: str) -> FaultSeed:
    """Parse the `kind:rule[:templateIndex]` flag syntax."""
    match = _SEED_FLAG.match(text)
    if match is None:
        raise InvalidLocusError(
            f"malformed fault seed '{text}', expected kind:rule[:templateIndex]")
    index = match.group("index")
    return FaultSeed(
        kind=match.group("kind"),
        rule_name=match.group("rule"),
        template_index=int(index) if index is not None else None,
    )


def seed_fault(program: TransformationProgram, seed: FaultSeed,
               src_mm: Metamodel, tgt_mm: Metamodel) -> TransformationProgram:
    """Plant the fault at the seed's locus; the result differs from the
    input in exactly one rule and still analyzes cleanly."""
    rule = program.rule(seed.rule_name)
    if rule is None:
        raise InvalidLocusError(f"no rule named '{seed.rule_name}'")

    if seed.kind == "drop-rule":
        if seed.template_index is not None:
            raise InvalidLocusError("drop-rule takes no template index")
        mutated_rules = tuple(r for r in program.rules if r.name != rule.name)
        return _replace_rules(program, mutated_rules)

    index = seed.template_index
    if index is None:
        raise InvalidLocusError(
            f"{seed.kind} requires a template index (kind:rule:index)")
    if not 1 <= index <= len(rule.targets):
        raise InvalidLocusError(
            f"rule '{rule.name}' has {len(rule.targets)} template(s), "
            f"index {index} is out of range")
    template = rule.targets[index - 1]

    if seed.kind == "drop-template":
        if len(rule.targets) == 1:
            raise UnsatisfiableSeedError(
                f"rule '{rule.name}' has a single template; dropping it "
                f"would leave no target")
        kept = tuple(t for i, t in enumerate(rule.targets) if i != index - 1)
        kept = tuple(_strip_refs_to(t, template.var) for t in kept)
        return _swap_rule(program, rule, Rule(rule.name, rule.source_vars,
                                              rule.guard, kept))

    if seed.kind == "dup-template":
        names = {v for v, _ in rule.source_vars} | {t.var for t in rule.targets}
        copy_var = f"{template.var}_dup"
        bump = 2
        while copy_var in names:
            copy_var = f"{template.var}_dup{bump}"
            bump += 1
        bindings = tuple(
            Binding(b.feature, TargetVarRef(copy_var))
            if isinstance(b.expr, TargetVarRef) and b.expr.var == template.var
            else b
            for b in template.bindings)
        copy = TargetTemplate(copy_var, template.type_name, bindings)
        targets = (rule.targets[:index] + (copy,) + rule.targets[index:])
        return _swap_rule(program, rule, Rule(rule.name, rule.source_vars,
                                              rule.guard, targets))

    assert seed.kind == "retarget-template"
    for candidate in tgt_mm.types:
        if candidate.name == template.type_name:
            continue
        mutated = _retarget(program, rule, index - 1, candidate.name,
                            src_mm, tgt_mm)
        if mutated is not None and not analyze(mutated, src_mm, tgt_mm):
            return mutated
    raise UnsatisfiableSeedError(
        f"no alternative target type can replace '{template.type_name}' in "
        f"rule '{rule.name}'")


def _replace_rules(program: TransformationProgram,
                   rules: tuple[Rule, ...]) -> TransformationProgram:
    return TransformationProgram(
        name=program.name,
        source_metamodel=program.source_metamodel,
        target_metamodel=program.target_metamodel,
        constants=program.constants,
        rules=rules,
    )


def _swap_rule(program: TransformationProgram, old: Rule,
               new: Rule) -> TransformationProgram:
    return _replace_rules(program, tuple(
        new if r.name == old.name else r for r in program.rules))


def _strip_refs_to(template: TargetTemplate, var: str) -> TargetTemplate:
    bindings = tuple(b for b in template.bindings
                     if not (isinstance(b.expr, TargetVarRef) and b.expr.var == var))
    return TargetTemplate(template.var, template.type_name, bindings)


def _retarget(program: TransformationProgram, rule: Rule, index: int,
              new_type: str, src_mm: Metamodel,
              tgt_mm: Metamodel) -> TransformationProgram | None:
    """Swap the template's type, dropping bindings (in this rule only) the
    new type cannot carry; None when a required feature would go unbound."""
    etype = tgt_mm.type(new_type)
    template = rule.targets[index]
    var_types = dict(rule.source_vars)

    kept: list[Binding] = []
    for binding in template.bindings:
        attr = etype.attribute(binding.feature)
        ref = etype.reference(binding.feature)
        expr = binding.expr
        if isinstance(expr, LiteralExpr):
            ok = attr is not None and kind_of_value(expr.value) == attr.kind
        elif isinstance(expr, SourceFeature):
            source_type = src_mm.type(var_types[expr.var])
            src_attr = source_type.attribute(expr.feature)
            if src_attr is not None:
                ok = attr is not None and attr.kind == src_attr.kind
            else:
                ok = ref is not None
        elif isinstance(expr, TargetVarRef):
            sibling = next((t for t in rule.targets if t.var == expr.var), None)
            ok = ref is not None and sibling is not None and \
                sibling.type_name == ref.target
        else:
            assert isinstance(expr, ConstantRef)
            ok = ref is not None and \
                program.constant_type(expr.name) == ref.target
        if ok:
            kept.append(binding)

    new_template = TargetTemplate(template.var, new_type, tuple(kept))
    targets = []
    for i, t in enumerate(rule.targets):
        if i == index:
            targets.append(new_template)
            continue
        # sibling links into the retargeted template survive only if the
        # feature's declared target matches the new type
        bindings = []
        owner = tgt_mm.type(t.type_name)
        for binding in t.bindings:
            if isinstance(binding.expr, TargetVarRef) and \
                    binding.expr.var == template.var:
                ref = owner.reference(binding.feature) if owner else None
                if ref is None or ref.target != new_type:
                    continue
            bindings.append(binding)
        targets.append(TargetTemplate(t.var, t.type_name, tuple(bindings)))

    bound = {b.feature for b in kept}
    for attr in etype.attributes:
        if attr.required and attr.name not in bound:
            return None
    for ref in etype.references:
        if ref.required and ref.name not in bound:
            return None

    return _swap_rule(program, rule,
                      Rule(rule.name, rule.source_vars, rule.guard,
                           tuple(targets)))
