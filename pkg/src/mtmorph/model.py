"""Metamodels and models: the shared vocabulary of the toolkit.

A metamodel declares named element types with typed attributes and typed
references (flat type system, no inheritance).  A model is a set of
identified, typed elements conforming to one metamodel.  Both are immutable
after construction; construction itself validates every invariant, so no
partially valid value can escape.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConformanceError, ParseError, UnknownTypeError, ValidationError
from .jsonio import (
    expect_bool,
    expect_list,
    expect_object,
    expect_str,
    read_json,
    write_json,
)

ATTRIBUTE_KINDS = ("string", "integer", "boolean")

KIND_DEFAULTS: dict[str, object] = {"string": "", "integer": 0, "boolean": False}


def kind_of_value(value: object) -> str | None:
    """Attribute kind of a runtime value, or None if no kind fits."""
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, str):
        return "string"
    return None


@dataclass(frozen=True)
class AttributeDef:
    name: str
    kind: str
    required: bool = False

    def __post_init__(self):
        if self.kind not in ATTRIBUTE_KINDS:
            raise ValidationError(
                f"attribute '{self.name}': unknown kind '{self.kind}'"
            )


@dataclass(frozen=True)
class ReferenceDef:
    name: str
    target: str
    required: bool = False
    many: bool = False


@dataclass(frozen=True)
class ElementType:
    name: str
    attributes: tuple[AttributeDef, ...] = ()
    references: tuple[ReferenceDef, ...] = ()

    def __post_init__(self):
        seen: set[str] = set()
        for feature in [a.name for a in self.attributes] + [r.name for r in self.references]:
            if feature in seen:
                raise ValidationError(
                    f"type '{self.name}': duplicate feature name '{feature}'"
                )
            seen.add(feature)

    def attribute(self, name: str) -> AttributeDef | None:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        return None

    def reference(self, name: str) -> ReferenceDef | None:
        for ref in self.references:
            if ref.name == name:
                return ref
        return None


@dataclass(frozen=True)
class Metamodel:
    name: str
    types: tuple[ElementType, ...] = ()

    def __post_init__(self):
        names: set[str] = set()
        for etype in self.types:
            if etype.name in names:
                raise ValidationError(f"duplicate type name '{etype.name}'")
            names.add(etype.name)
        for etype in self.types:
            for ref in etype.references:
                if ref.target not in names:
                    raise ValidationError(
                        f"type '{etype.name}': reference '{ref.name}' targets "
                        f"unknown type '{ref.target}'"
                    )

    def type(self, name: str) -> ElementType | None:
        for etype in self.types:
            if etype.name == name:
                return etype
        return None

    def type_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.types)


@dataclass(frozen=True)
class Element:
    """One model element.  Reference target lists are normalized to sorted,
    duplicate-free tuples, so structural equality is set equality."""

    id: str
    type_name: str
    attrs: dict[str, object] = field(default_factory=dict)
    refs: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        normalized = {
            name: tuple(sorted(set(targets)))
            for name, targets in self.refs.items()
            if targets
        }
        object.__setattr__(self, "refs", normalized)
        object.__setattr__(self, "attrs", dict(self.attrs))


class Model:
    """A validated set of elements conforming to one metamodel.

    Element order is preserved from the source (it drives deterministic rule
    matching); equality is order-insensitive.
    """

    __slots__ = ("metamodel", "elements", "_by_id")

    def __init__(self, metamodel: Metamodel, elements: tuple[Element, ...] = ()):
        self.metamodel = metamodel
        self.elements = tuple(elements)
        self._by_id: dict[str, Element] = {}
        self._validate()

    @property
    def metamodel_name(self) -> str:
        return self.metamodel.name

    def element(self, element_id: str) -> Element | None:
        return self._by_id.get(element_id)

    def _validate(self) -> None:
        for el in self.elements:
            if el.id in self._by_id:
                raise ConformanceError(f"duplicate element id '{el.id}'")
            self._by_id[el.id] = el
        for el in self.elements:
            etype = self.metamodel.type(el.type_name)
            if etype is None:
                raise ConformanceError(
                    f"element '{el.id}': unknown type '{el.type_name}'"
                )
            for name, value in el.attrs.items():
                attr = etype.attribute(name)
                if attr is None:
                    raise ConformanceError(
                        f"element '{el.id}': type '{etype.name}' has no attribute '{name}'"
                    )
                if kind_of_value(value) != attr.kind:
                    raise ConformanceError(
                        f"element '{el.id}': attribute '{name}' expects kind "
                        f"'{attr.kind}', got {value!r}"
                    )
            for attr in etype.attributes:
                if attr.required and attr.name not in el.attrs:
                    raise ConformanceError(
                        f"element '{el.id}': required attribute '{attr.name}' missing"
                    )
            for name, targets in el.refs.items():
                ref = etype.reference(name)
                if ref is None:
                    raise ConformanceError(
                        f"element '{el.id}': type '{etype.name}' has no reference '{name}'"
                    )
                if not ref.many and len(targets) > 1:
                    raise ConformanceError(
                        f"element '{el.id}': reference '{name}' holds "
                        f"{len(targets)} targets but is not many-valued"
                    )
                for target_id in targets:
                    target = self._by_id.get(target_id)
                    if target is None:
                        raise ConformanceError(
                            f"element '{el.id}': reference '{name}' targets "
                            f"missing element '{target_id}'"
                        )
                    if target.type_name != ref.target:
                        raise ConformanceError(
                            f"element '{el.id}': reference '{name}' targets "
                            f"'{target_id}' of type '{target.type_name}', "
                            f"expected '{ref.target}'"
                        )
            for ref in etype.references:
                if ref.required and not el.refs.get(ref.name):
                    raise ConformanceError(
                        f"element '{el.id}': required reference '{ref.name}' missing"
                    )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Model):
            return NotImplemented
        return (self.metamodel_name == other.metamodel_name
                and self._by_id == other._by_id)

    def __repr__(self) -> str:
        return f"Model({self.metamodel_name!r}, {len(self.elements)} elements)"


def count_instances(model: Model, type_name: str) -> int:
    """Number of elements of exactly `type_name` (flat types, no subtyping)."""
    if model.metamodel.type(type_name) is None:
        raise UnknownTypeError(
            f"type '{type_name}' does not exist in metamodel '{model.metamodel_name}'"
        )
    return sum(1 for el in model.elements if el.type_name == type_name)


# --- serialization -----------------------------------------------------------

def metamodel_to_dict(mm: Metamodel) -> dict:
    types = []
    for etype in mm.types:
        entry: dict[str, object] = {"name": etype.name}
        if etype.attributes:
            entry["attributes"] = [
                {"name": a.name, "kind": a.kind, "required": a.required}
                for a in etype.attributes
            ]
        if etype.references:
            entry["references"] = [
                {"name": r.name, "target": r.target, "required": r.required,
                 "many": r.many}
                for r in etype.references
            ]
        types.append(entry)
    data: dict[str, object] = {"name": mm.name}
    if types:
        data["types"] = types
    return data


def metamodel_from_dict(data: object, ctx: str = "metamodel") -> Metamodel:
    obj = expect_object(data, ctx, required=("name",), optional=("types",))
    types = []
    for i, raw in enumerate(expect_list(obj.get("types", []), f"{ctx}.types")):
        tctx = f"{ctx}.types[{i}]"
        tobj = expect_object(raw, tctx, required=("name",),
                             optional=("attributes", "references"))
        attributes = []
        for j, araw in enumerate(expect_list(tobj.get("attributes", []),
                                             f"{tctx}.attributes")):
            actx = f"{tctx}.attributes[{j}]"
            aobj = expect_object(araw, actx, required=("name", "kind"),
                                 optional=("required",))
            kind = expect_str(aobj["kind"], f"{actx}.kind")
            if kind not in ATTRIBUTE_KINDS:
                raise ParseError(f"{actx}: unknown attribute kind '{kind}'")
            attributes.append(AttributeDef(
                name=expect_str(aobj["name"], f"{actx}.name"),
                kind=kind,
                required=expect_bool(aobj.get("required", False), f"{actx}.required"),
            ))
        references = []
        for j, rraw in enumerate(expect_list(tobj.get("references", []),
                                             f"{tctx}.references")):
            rctx = f"{tctx}.references[{j}]"
            robj = expect_object(rraw, rctx, required=("name", "target"),
                                 optional=("required", "many"))
            references.append(ReferenceDef(
                name=expect_str(robj["name"], f"{rctx}.name"),
                target=expect_str(robj["target"], f"{rctx}.target"),
                required=expect_bool(robj.get("required", False), f"{rctx}.required"),
                many=expect_bool(robj.get("many", False), f"{rctx}.many"),
            ))
        types.append(ElementType(
            name=expect_str(tobj["name"], f"{tctx}.name"),
            attributes=tuple(attributes),
            references=tuple(references),
        ))
    return Metamodel(name=expect_str(obj["name"], f"{ctx}.name"), types=tuple(types))


def load_metamodel(path: str | Path) -> Metamodel:
    data = read_json(path)
    try:
        return metamodel_from_dict(data)
    except (ParseError, ValidationError) as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def save_metamodel(mm: Metamodel, path: str | Path) -> None:
    write_json(metamodel_to_dict(mm), path)


def model_to_dict(model: Model) -> dict:
    elements = []
    for el in sorted(model.elements, key=lambda e: e.id):
        entry: dict[str, object] = {"id": el.id, "type": el.type_name}
        if el.attrs:
            entry["attrs"] = dict(el.attrs)
        if el.refs:
            entry["refs"] = {name: list(targets) for name, targets in el.refs.items()}
        elements.append(entry)
    data: dict[str, object] = {"metamodel": model.metamodel_name}
    if elements:
        data["elements"] = elements
    return data


def model_from_dict(data: object, mm: Metamodel, ctx: str = "model") -> Model:
    obj = expect_object(data, ctx, required=("metamodel",), optional=("elements",))
    declared = expect_str(obj["metamodel"], f"{ctx}.metamodel")
    if declared != mm.name:
        raise ConformanceError(
            f"{ctx}: declares metamodel '{declared}', expected '{mm.name}'"
        )
    elements = []
    for i, raw in enumerate(expect_list(obj.get("elements", []), f"{ctx}.elements")):
        ectx = f"{ctx}.elements[{i}]"
        eobj = expect_object(raw, ectx, required=("id", "type"),
                             optional=("attrs", "refs"))
        attrs_obj = eobj.get("attrs", {})
        if not isinstance(attrs_obj, dict):
            raise ParseError(f"{ectx}.attrs: expected an object")
        attrs: dict[str, object] = {}
        for name, value in attrs_obj.items():
            if kind_of_value(value) is None:
                raise ParseError(
                    f"{ectx}.attrs.{name}: expected a string, integer, or boolean"
                )
            attrs[name] = value
        refs_obj = eobj.get("refs", {})
        if not isinstance(refs_obj, dict):
            raise ParseError(f"{ectx}.refs: expected an object")
        refs: dict[str, tuple[str, ...]] = {}
        for name, targets in refs_obj.items():
            targets = expect_list(targets, f"{ectx}.refs.{name}")
            refs[name] = tuple(
                expect_str(t, f"{ectx}.refs.{name}[{k}]")
                for k, t in enumerate(targets)
            )
        elements.append(Element(
            id=expect_str(eobj["id"], f"{ectx}.id"),
            type_name=expect_str(eobj["type"], f"{ectx}.type"),
            attrs=attrs,
            refs=refs,
        ))
    return Model(mm, tuple(elements))


def load_model(path: str | Path, mm: Metamodel) -> Model:
    data = read_json(path)
    try:
        return model_from_dict(data, mm)
    except (ParseError, ConformanceError) as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def save_model(model: Model, path: str | Path) -> None:
    write_json(model_to_dict(model), path)
