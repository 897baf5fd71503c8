"""Parser, AST, and static analysis for the rule-based transformation DSL.

The language is a small ATL-shaped surface: a header naming the
transformation and its source/target metamodels, optional module constants,
and matched rules.  Each rule binds one or more typed source variables
(the first may carry a guard), and instantiates one or more target
templates whose features are filled by bindings.

Concrete syntax (ASCII, `--` comments to end of line)::

    transformation Name from SourceMM to TargetMM;
    const ident : Type;                      -- optional, repeatable
    rule R {
      from a : SourceMM!A (a.size > 3 and a.kind = 'x'), b : B
      to
        out : TargetMM!X (
          name <- a.name,                    -- copy a source attribute
          label <- 'literal',                -- assign a constant
          part <- other,                     -- link a sibling template
          items <- a.children,               -- link images of referenced elements
          marker <- @ident                   -- link a module constant
        ),
        other : Y ()
    }

Metamodel qualifiers (`SourceMM!A`) are checked against the header and then
discarded; the type system is flat.  `parse_transformation` enforces every
scoping invariant (it raises AnalysisError); `analyze` checks the program
against concrete metamodels and returns diagnostics instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import AnalysisError, MtlSyntaxError
from .model import Metamodel, kind_of_value

KEYWORDS = frozenset({
    "transformation", "from", "to", "rule", "const", "and", "true", "false",
})

COMPARISON_OPS = ("=", "<>", "<", "<=", ">", ">=")

# ordering comparisons are only meaningful for integers
ORDERING_OPS = frozenset({"<", "<=", ">", ">="})

_TWO_CHAR_SYMBOLS = ("<-", "<=", ">=", "<>")
_ONE_CHAR_SYMBOLS = "{}(),;:.!@=<>"


# --- AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class SourceFeature:
    """Navigation `var.feature`: copies an attribute value, or links the
    trace-resolved images of referenced source elements, depending on what
    the feature is in the source metamodel."""

    var: str
    feature: str


@dataclass(frozen=True)
class LiteralExpr:
    value: str | int | bool


@dataclass(frozen=True)
class TargetVarRef:
    """Link to the sibling element created by another template of the rule."""

    var: str


@dataclass(frozen=True)
class ConstantRef:
    """Link to the per-execution element backing a module constant."""

    name: str


BindingExpr = SourceFeature | LiteralExpr | TargetVarRef | ConstantRef


@dataclass(frozen=True)
class Binding:
    feature: str
    expr: BindingExpr


@dataclass(frozen=True)
class Comparison:
    attr: str
    op: str
    value: str | int | bool


@dataclass(frozen=True)
class Guard:
    """Conjunction of attribute comparisons on the rule's first source variable."""

    comparisons: tuple[Comparison, ...]

    def satisfied_by(self, attrs: dict[str, object]) -> bool:
        return all(_compare(attrs.get(c.attr), c.op, c.value)
                   for c in self.comparisons)


def _compare(value: object, op: str, literal: object) -> bool:
    if value is None or kind_of_value(value) != kind_of_value(literal):
        return False
    if op == "=":
        return value == literal
    if op == "<>":
        return value != literal
    if not isinstance(value, int) or isinstance(value, bool):
        return False
    assert isinstance(literal, int)
    if op == "<":
        return value < literal
    if op == "<=":
        return value <= literal
    if op == ">":
        return value > literal
    if op == ">=":
        return value >= literal
    raise ValueError(f"unknown comparison operator {op!r}")


@dataclass(frozen=True)
class TargetTemplate:
    var: str
    type_name: str
    bindings: tuple[Binding, ...] = ()


@dataclass(frozen=True)
class Rule:
    name: str
    source_vars: tuple[tuple[str, str], ...]
    guard: Guard | None
    targets: tuple[TargetTemplate, ...]

    def source_types(self) -> tuple[str, ...]:
        return tuple(t for _, t in self.source_vars)

    def signature(self) -> tuple[str, ...]:
        """Order-normalized source type signature."""
        return tuple(sorted(self.source_types()))


@dataclass(frozen=True)
class TransformationProgram:
    name: str
    source_metamodel: str
    target_metamodel: str
    constants: tuple[tuple[str, str], ...] = ()
    rules: tuple[Rule, ...] = ()

    def rule(self, name: str) -> Rule | None:
        for rule in self.rules:
            if rule.name == name:
                return rule
        return None

    def constant_type(self, name: str) -> str | None:
        for cname, ctype in self.constants:
            if cname == name:
                return ctype
        return None

    def referenced_constants(self) -> frozenset[str]:
        names = set()
        for rule in self.rules:
            for template in rule.targets:
                for binding in template.bindings:
                    if isinstance(binding.expr, ConstantRef):
                        names.add(binding.expr.name)
        return frozenset(names)


@dataclass(frozen=True)
class Diagnostic:
    message: str
    rule: str | None = None

    def __str__(self) -> str:
        return f"rule '{self.rule}': {self.message}" if self.rule else self.message


# --- tokenizer ------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # ident | kw | string | int | sym | eof
    value: str | int
    line: int
    col: int

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        if self.kind == "string":
            return f"string '{self.value}'"
        return f"'{self.value}'"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", int(text[i:j]), line, start_col))
            col += j - i
            i = j
            continue
        if ch == "'":
            j = i + 1
            while j < n and text[j] not in "'\n":
                j += 1
            if j >= n or text[j] != "'":
                raise MtlSyntaxError("unterminated string literal", line, start_col)
            tokens.append(Token("string", text[i + 1:j], line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        two = text[i:i + 2]
        if two in _TWO_CHAR_SYMBOLS:
            tokens.append(Token("sym", two, line, start_col))
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR_SYMBOLS:
            tokens.append(Token("sym", ch, line, start_col))
            i += 1
            col += 1
            continue
        raise MtlSyntaxError(f"unexpected character {ch!r}", line, start_col)
    tokens.append(Token("eof", "", line, col))
    return tokens


# --- parser -------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind != "eof":
            self.pos += 1
        return token

    def fail(self, expected: str) -> MtlSyntaxError:
        found = self.peek()
        return MtlSyntaxError(f"expected {expected}, found {found.describe()}",
                              found.line, found.col)

    def accept_sym(self, symbol: str) -> bool:
        if self.peek().kind == "sym" and self.peek().value == symbol:
            self.advance()
            return True
        return False

    def expect_sym(self, symbol: str) -> None:
        if not self.accept_sym(symbol):
            raise self.fail(f"'{symbol}'")

    def accept_kw(self, word: str) -> bool:
        if self.peek().kind == "kw" and self.peek().value == word:
            self.advance()
            return True
        return False

    def expect_kw(self, word: str) -> None:
        if not self.accept_kw(word):
            raise self.fail(f"'{word}'")

    def expect_ident(self, what: str) -> str:
        if self.peek().kind != "ident":
            raise self.fail(what)
        return str(self.advance().value)

    def parse_program(self) -> TransformationProgram:
        self.expect_kw("transformation")
        name = self.expect_ident("transformation name")
        self.expect_kw("from")
        source_mm = self.expect_ident("source metamodel name")
        self.expect_kw("to")
        target_mm = self.expect_ident("target metamodel name")
        self.expect_sym(";")

        constants = []
        while self.accept_kw("const"):
            cname = self.expect_ident("constant name")
            self.expect_sym(":")
            ctype = self.parse_type(target_mm)
            self.expect_sym(";")
            constants.append((cname, ctype))

        rules = []
        while self.accept_kw("rule"):
            rules.append(self.parse_rule(source_mm, target_mm))
        if self.peek().kind != "eof":
            raise self.fail("'rule' or end of input")

        return TransformationProgram(
            name=name,
            source_metamodel=source_mm,
            target_metamodel=target_mm,
            constants=tuple(constants),
            rules=tuple(rules),
        )

    def parse_type(self, expected_metamodel: str) -> str:
        first = self.expect_ident("type name")
        if self.accept_sym("!"):
            second = self.expect_ident("type name")
            if first != expected_metamodel:
                raise AnalysisError(
                    f"type qualifier '{first}' does not match metamodel "
                    f"'{expected_metamodel}'"
                )
            return second
        return first

    def parse_rule(self, source_mm: str, target_mm: str) -> Rule:
        name = self.expect_ident("rule name")
        self.expect_sym("{")
        self.expect_kw("from")

        source_vars = [self.parse_source_var(source_mm)]
        guard = None
        if self.peek().kind == "sym" and self.peek().value == "(":
            guard, qualifiers = self.parse_guard()
            # the guard constrains the rule's first source variable only
            first_var = source_vars[0][0]
            for qualifier in qualifiers:
                if qualifier != first_var:
                    raise AnalysisError(
                        f"rule '{name}': guard qualifier '{qualifier}' must "
                        f"name the first source variable '{first_var}'"
                    )
        while self.accept_sym(","):
            source_vars.append(self.parse_source_var(source_mm))

        self.expect_kw("to")
        targets = [self.parse_template(target_mm)]
        while self.accept_sym(","):
            targets.append(self.parse_template(target_mm))
        self.expect_sym("}")

        return Rule(name=name, source_vars=tuple(source_vars), guard=guard,
                    targets=tuple(targets))

    def parse_source_var(self, source_mm: str) -> tuple[str, str]:
        var = self.expect_ident("source variable name")
        self.expect_sym(":")
        return var, self.parse_type(source_mm)

    def parse_guard(self) -> tuple[Guard, list[str]]:
        self.expect_sym("(")
        qualifiers: list[str] = []
        comparisons = [self.parse_comparison(qualifiers)]
        while self.accept_kw("and"):
            comparisons.append(self.parse_comparison(qualifiers))
        self.expect_sym(")")
        return Guard(tuple(comparisons)), qualifiers

    def parse_comparison(self, qualifiers: list[str]) -> Comparison:
        first = self.expect_ident("attribute name")
        if self.accept_sym("."):
            attr = self.expect_ident("attribute name")
            qualifiers.append(first)
        else:
            attr = first
        token = self.peek()
        if token.kind != "sym" or token.value not in COMPARISON_OPS:
            raise self.fail("a comparison operator")
        op = str(self.advance().value)
        return Comparison(attr=attr, op=op, value=self.parse_literal())

    def parse_literal(self) -> str | int | bool:
        token = self.peek()
        if token.kind == "string":
            return str(self.advance().value)
        if token.kind == "int":
            value = self.advance().value
            assert isinstance(value, int)
            return value
        if self.accept_kw("true"):
            return True
        if self.accept_kw("false"):
            return False
        raise self.fail("a literal (string, integer, true, or false)")

    def parse_template(self, target_mm: str) -> TargetTemplate:
        var = self.expect_ident("target variable name")
        self.expect_sym(":")
        type_name = self.parse_type(target_mm)
        self.expect_sym("(")
        bindings = []
        if not self.accept_sym(")"):
            bindings.append(self.parse_binding())
            while self.accept_sym(","):
                bindings.append(self.parse_binding())
            self.expect_sym(")")
        return TargetTemplate(var=var, type_name=type_name,
                              bindings=tuple(bindings))

    def parse_binding(self) -> Binding:
        feature = self.expect_ident("feature name")
        self.expect_sym("<-")
        token = self.peek()
        if token.kind in ("string", "int") or \
                (token.kind == "kw" and token.value in ("true", "false")):
            return Binding(feature, LiteralExpr(self.parse_literal()))
        if self.accept_sym("@"):
            return Binding(feature, ConstantRef(self.expect_ident("constant name")))
        name = self.expect_ident("an expression")
        if self.accept_sym("."):
            return Binding(feature, SourceFeature(name, self.expect_ident("feature name")))
        return Binding(feature, TargetVarRef(name))


def parse_transformation(text: str) -> TransformationProgram:
    """Parse DSL source text into a program whose scoping invariants all hold.

    Raises MtlSyntaxError (with line and column) for malformed text and
    AnalysisError for scope violations: unknown variables or constants,
    duplicate names, duplicate rule signatures, guards not on the first
    source variable, mismatched metamodel qualifiers.
    """
    program = _Parser(text).parse_program()
    _check_scopes(program)
    return program


def load_transformation(path: str | Path) -> TransformationProgram:
    return parse_transformation(Path(path).read_text(encoding="utf-8"))


def _check_scopes(program: TransformationProgram) -> None:
    const_names = [name for name, _ in program.constants]
    if len(set(const_names)) != len(const_names):
        raise AnalysisError("duplicate constant name")

    rule_names: set[str] = set()
    signatures: dict[tuple[str, ...], str] = {}
    for rule in program.rules:
        if rule.name in rule_names:
            raise AnalysisError(f"duplicate rule name '{rule.name}'")
        rule_names.add(rule.name)

        signature = rule.signature()
        if signature in signatures:
            raise AnalysisError(
                f"rules '{signatures[signature]}' and '{rule.name}' share the "
                f"source type signature {list(signature)}"
            )
        signatures[signature] = rule.name

        source_names = [v for v, _ in rule.source_vars]
        target_names = [t.var for t in rule.targets]
        all_names = source_names + target_names
        if len(set(all_names)) != len(all_names):
            raise AnalysisError(f"rule '{rule.name}': duplicate variable name")

        for template in rule.targets:
            seen_features: set[str] = set()
            for binding in template.bindings:
                if binding.feature in seen_features:
                    raise AnalysisError(
                        f"rule '{rule.name}': feature '{binding.feature}' bound "
                        f"twice on '{template.var}'"
                    )
                seen_features.add(binding.feature)
                expr = binding.expr
                if isinstance(expr, SourceFeature) and expr.var not in source_names:
                    raise AnalysisError(
                        f"rule '{rule.name}': unknown source variable '{expr.var}'"
                    )
                if isinstance(expr, TargetVarRef) and expr.var not in target_names:
                    if expr.var in source_names:
                        raise AnalysisError(
                            f"rule '{rule.name}': '{expr.var}' is a source "
                            f"variable and cannot be bound directly"
                        )
                    raise AnalysisError(
                        f"rule '{rule.name}': unknown variable '{expr.var}'"
                    )
                if isinstance(expr, ConstantRef) and \
                        expr.name not in const_names:
                    raise AnalysisError(
                        f"rule '{rule.name}': unknown constant '@{expr.name}'"
                    )


# --- static analysis against metamodels ----------------------------------------

def analyze(program: TransformationProgram, src_mm: Metamodel,
            tgt_mm: Metamodel) -> list[Diagnostic]:
    """Check every type, feature, and kind the program names against the
    metamodels.  Returns one diagnostic per violation; empty means clean."""
    diagnostics: list[Diagnostic] = []

    def report(message: str, rule: Rule | None = None) -> None:
        diagnostics.append(Diagnostic(message, rule.name if rule else None))

    if program.source_metamodel != src_mm.name:
        report(f"program reads from '{program.source_metamodel}' but the "
               f"source metamodel is '{src_mm.name}'")
    if program.target_metamodel != tgt_mm.name:
        report(f"program writes to '{program.target_metamodel}' but the "
               f"target metamodel is '{tgt_mm.name}'")

    for cname, ctype in program.constants:
        if tgt_mm.type(ctype) is None:
            report(f"constant '{cname}': unknown target type '{ctype}'")

    for rule in program.rules:
        var_types: dict[str, str] = {}
        for var, type_name in rule.source_vars:
            if src_mm.type(type_name) is None:
                report(f"unknown source type '{type_name}'", rule)
            else:
                var_types[var] = type_name

        if rule.guard is not None:
            first_var, first_type = rule.source_vars[0]
            guarded = src_mm.type(first_type)
            if guarded is not None:
                for comparison in rule.guard.comparisons:
                    attr = guarded.attribute(comparison.attr)
                    if attr is None:
                        report(f"guard names unknown attribute "
                               f"'{comparison.attr}' on '{first_type}'", rule)
                        continue
                    if comparison.op in ORDERING_OPS and attr.kind != "integer":
                        report(f"guard applies ordering operator "
                               f"'{comparison.op}' to {attr.kind} attribute "
                               f"'{comparison.attr}'", rule)
                    elif kind_of_value(comparison.value) != attr.kind:
                        report(f"guard compares attribute '{comparison.attr}' "
                               f"({attr.kind}) with a "
                               f"{kind_of_value(comparison.value)} literal", rule)

        template_types = {t.var: t.type_name for t in rule.targets}
        for template in rule.targets:
            etype = tgt_mm.type(template.type_name)
            if etype is None:
                report(f"unknown target type '{template.type_name}'", rule)
                continue
            for binding in template.bindings:
                attr = etype.attribute(binding.feature)
                ref = etype.reference(binding.feature)
                if attr is None and ref is None:
                    report(f"'{template.type_name}' has no feature "
                           f"'{binding.feature}'", rule)
                    continue
                expr = binding.expr
                if isinstance(expr, LiteralExpr):
                    if attr is None:
                        report(f"literal bound to reference "
                               f"'{binding.feature}'", rule)
                    elif kind_of_value(expr.value) != attr.kind:
                        report(f"attribute '{binding.feature}' expects kind "
                               f"'{attr.kind}', binding provides "
                               f"{kind_of_value(expr.value)}", rule)
                elif isinstance(expr, SourceFeature):
                    source_type_name = var_types.get(expr.var)
                    if source_type_name is None:
                        continue  # the unknown-type diagnostic already covers it
                    source_type = src_mm.type(source_type_name)
                    src_attr = source_type.attribute(expr.feature)
                    src_ref = source_type.reference(expr.feature)
                    if src_attr is None and src_ref is None:
                        report(f"'{source_type_name}' has no feature "
                               f"'{expr.feature}'", rule)
                    elif src_attr is not None:
                        if attr is None:
                            report(f"attribute value '{expr.var}.{expr.feature}' "
                                   f"bound to reference '{binding.feature}'", rule)
                        elif src_attr.kind != attr.kind:
                            report(f"attribute '{binding.feature}' expects kind "
                                   f"'{attr.kind}', '{expr.var}.{expr.feature}' "
                                   f"has kind '{src_attr.kind}'", rule)
                    else:
                        if ref is None:
                            report(f"reference navigation "
                                   f"'{expr.var}.{expr.feature}' bound to "
                                   f"attribute '{binding.feature}'", rule)
                elif isinstance(expr, TargetVarRef):
                    if ref is None:
                        report(f"element '{expr.var}' bound to attribute "
                               f"'{binding.feature}'", rule)
                    elif template_types.get(expr.var) != ref.target:
                        report(f"reference '{binding.feature}' expects "
                               f"'{ref.target}', '{expr.var}' creates "
                               f"'{template_types.get(expr.var)}'", rule)
                elif isinstance(expr, ConstantRef):
                    const_type = program.constant_type(expr.name)
                    if ref is None:
                        report(f"constant '@{expr.name}' bound to attribute "
                               f"'{binding.feature}'", rule)
                    elif const_type != ref.target:
                        report(f"reference '{binding.feature}' expects "
                               f"'{ref.target}', constant '@{expr.name}' has "
                               f"type '{const_type}'", rule)

    return diagnostics


# --- pretty printer --------------------------------------------------------------

def format_literal(value: str | int | bool) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f"'{value}'"
    return str(value)


def format_expr(expr: BindingExpr) -> str:
    if isinstance(expr, LiteralExpr):
        return format_literal(expr.value)
    if isinstance(expr, SourceFeature):
        return f"{expr.var}.{expr.feature}"
    if isinstance(expr, TargetVarRef):
        return expr.var
    return f"@{expr.name}"


def format_program(program: TransformationProgram) -> str:
    """Render a program back to concrete syntax; reparsing yields an equal AST."""
    lines = [f"transformation {program.name} "
             f"from {program.source_metamodel} to {program.target_metamodel};", ""]
    for cname, ctype in program.constants:
        lines.append(f"const {cname} : {ctype};")
    if program.constants:
        lines.append("")
    for rule in program.rules:
        lines.append(f"rule {rule.name} {{")
        source_parts = []
        for i, (var, type_name) in enumerate(rule.source_vars):
            part = f"{var} : {type_name}"
            if i == 0 and rule.guard is not None:
                clauses = " and ".join(
                    f"{var}.{c.attr} {c.op} {format_literal(c.value)}"
                    for c in rule.guard.comparisons)
                part += f" ({clauses})"
            source_parts.append(part)
        lines.append(f"  from {', '.join(source_parts)}")
        lines.append("  to")
        for i, template in enumerate(rule.targets):
            suffix = "," if i + 1 < len(rule.targets) else ""
            if not template.bindings:
                lines.append(f"    {template.var} : {template.type_name} (){suffix}")
                continue
            lines.append(f"    {template.var} : {template.type_name} (")
            for j, binding in enumerate(template.bindings):
                comma = "," if j + 1 < len(template.bindings) else ""
                lines.append(f"      {binding.feature} <- "
                             f"{format_expr(binding.expr)}{comma}")
            lines.append(f"    ){suffix}")
        lines.append("}")
        lines.append("")
    return "\n".join(lines)
