"""
.kab / .prop 문서 파서 및 pretty-printer
- lark LALR 문법
- Transformer는 (스코프 -> AST) 클로저를 만들고, 스코프가 이름을 상수/변수로 해석

이름 해석
- .kab: Δ0(CONSTANTS, ABOX에 쓰인 개체, temp, @레이블)에 있으면 상수, 아니면 변수
- .prop: 양화사(exists/forall, UCQ 안의 exists)로 묶이면 변수, 아니면 상수
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedEOF, UnexpectedInput

from .dllite import (
    ABox, Assertion, Atom, CQ, ConceptInclusion, Constant, ECQ, ECQ_FALSE, ECQ_TRUE, ECQAnd,
    ECQExists, ECQNot, EmbeddedUCQ, ExistsRole, Functionality, LABEL_PREFIX, NamedConcept, Role,
    RoleDisjointness, TBox, TEMP, TRUE_UCQ, UCQ, Var, ecq_forall, ecq_or, term_key,
)
from .errors import KabSemanticError, KabSyntaxError, OpenFormula
from .kab import Action, AssertionTemplate, EffectSpec, KabSpec, ProcessRule, SkolemTemplate
from .mucalc import (
    FALSE, TRUE, And, Box, Diamond, Exists, Forall, Implies, Mu, MuFormula, Not, Nu, Or, PredVar,
    Query, check_monotone, free_predicate_vars,
)

logger = logging.getLogger(__name__)


# ============================================================
# 문법
# ============================================================

_COMMON_GRAMMAR = r"""
    name_list: NAME ("," NAME)*

    ?term: NAME | LABEL
    qatom: NAME "(" term ("," term)* ")"

    cq: [cq_exists] qatom ("," qatom)*
      | "true"                                 -> cq_true
    cq_exists: "exists" name_list "."
    ucq: cq ("or" cq)*

    NAME: /[A-Za-z][A-Za-z0-9_]*/
    LABEL: /@[A-Za-z0-9_]+/
    COMMENT: /#[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

KAB_GRAMMAR = r"""
    start: section*

    ?section: constants | tbox | abox | action | process

    constants: "CONSTANTS" "{" (term ";")* "}"

    tbox: "TBOX" "{" axiom* "}"
    ?axiom: concept "isa" concept ";"          -> isa
          | concept "disjoint" concept ";"     -> disjoint
          | role "roledisjoint" role ";"       -> roledisjoint
          | "funct" role ";"                   -> funct
    ?concept: NAME                             -> named_concept
            | "exists" role                    -> exists_concept
    ?role: NAME                                -> role_name
         | "inv" NAME                          -> inverse_role

    abox: "ABOX" "{" (ground_atom ";")* "}"
    ground_atom: NAME "(" term ("," term)* ")"

    action: "ACTION" NAME "(" [name_list] ")" "{" effect* "}"
    effect: "effect" "[" ucq "]" ["and" ecq] "~>" "{" [template ("," template)*] "}" ";"
    template: NAME "(" [head_term ("," head_term)*] ")"
    ?head_term: term
              | NAME "(" [term ("," term)*] ")"  -> skolem

    process: "PROCESS" "{" rule* "}"
    rule: ecq "->" NAME "(" [name_list] ")" ";"

    ?ecq: ecq_and
        | ecq "|" ecq_and                      -> ecq_disj
    ?ecq_and: ecq_unary
            | ecq_and "&" ecq_unary            -> ecq_conj
    ?ecq_unary: "!" ecq_unary                  -> ecq_not
              | "exists" NAME "." ecq_unary    -> ecq_exists
              | "forall" NAME "." ecq_unary    -> ecq_forall
              | "[" ucq "]"                    -> ecq_ucq
              | qatom                          -> ecq_atom
              | "true"                         -> ecq_true
              | "false"                        -> ecq_false
              | "(" ecq ")"
""" + _COMMON_GRAMMAR

PROPERTY_GRAMMAR = r"""
    properties: property*
    property: NAME ":" formula ";"

    ?formula: disj
            | disj "->" formula                -> implies
    ?disj: conj
         | disj "|" conj                       -> or_formula
    ?conj: unary
         | conj "&" unary                      -> and_formula
    ?unary: "!" unary                          -> neg
          | "<>" unary                         -> diamond
          | "[]" unary                         -> box
          | "exists" NAME "." unary            -> exists
          | "forall" NAME "." unary            -> forall
          | "mu" NAME "." unary                -> mu
          | "nu" NAME "." unary                -> nu
          | "[" ucq "]"                        -> query
          | qatom                              -> atom_query
          | "true"                             -> true
          | "false"                            -> false
          | NAME                               -> predvar
          | "(" formula ")"
""" + _COMMON_GRAMMAR


@lru_cache(maxsize=None)
def _kab_parser() -> Lark:
    return Lark(KAB_GRAMMAR, start="start", parser="lalr")


@lru_cache(maxsize=None)
def _property_parser() -> Lark:
    return Lark(PROPERTY_GRAMMAR, start=["properties", "formula"], parser="lalr")


# ============================================================
# 이름 스코프
# ============================================================

@dataclass(frozen=True)
class _Scope:
    """constants가 있으면 .kab 규칙, 없으면 .prop 규칙"""
    constants: Optional[FrozenSet[str]] = None
    bound: FrozenSet[str] = frozenset()

    def bind(self, names: Iterable[str]) -> "_Scope":
        return _Scope(self.constants, self.bound | frozenset(names))

    def term(self, name: str):
        if name in self.bound:
            return Var(name)
        if name.startswith(LABEL_PREFIX):
            return Constant(name)
        if self.constants is not None and name not in self.constants:
            return Var(name)
        return Constant(name)


Builder = Callable[[_Scope], object]


def _build_ucq(cqs: List[Tuple[List[str], List[Builder]]], scope: _Scope) -> UCQ:
    """CQ마다 exists로 묶지 않은 변수가 UCQ의 free 변수 (이름순)"""
    built = []
    free = set()
    for existential, atoms in cqs:
        inner = scope.bind(existential)
        resolved = tuple(atom(inner) for atom in atoms)
        local = frozenset(Var(n) for n in existential)
        built.append((local, resolved))
        free.update(t for a in resolved for t in a.args if isinstance(t, Var) and t not in local)
    if free and any(not atoms for _, atoms in built):
        raise KabSemanticError("true cannot be a disjunct of a query with free variables")
    for local, _ in built:
        clash = local & free
        if clash:
            names = ", ".join(sorted(v.name for v in clash))
            raise KabSemanticError(f"variables {names} are both free and existential in one query")
    head = tuple(sorted(free, key=term_key))
    return UCQ(head, tuple(CQ(head, atoms) for _, atoms in built))


def _atom_ucq(atom: Builder, scope: _Scope) -> UCQ:
    return _build_ucq([([], [atom])], scope)


# ============================================================
# Transformer
# ============================================================

@v_args(inline=True)
class _QueryTransformer(Transformer):
    """공통 부분: 이름 목록, atom, UCQ"""

    def name_list(self, *names):
        return [str(n) for n in names]

    def qatom(self, predicate, *terms):
        names = [str(t) for t in terms]
        return lambda scope: Atom(str(predicate), tuple(scope.term(n) for n in names))

    def cq_exists(self, names):
        return names

    def cq(self, existential, *atoms):
        return (existential or [], list(atoms))

    def cq_true(self):
        return ([], [])

    def ucq(self, *cqs):
        return lambda scope: _build_ucq(list(cqs), scope)


@v_args(inline=True)
class _KabTransformer(_QueryTransformer):
    # ---------- sections ----------
    def start(self, *sections):
        return list(sections)

    def constants(self, *names):
        return ("constants", [str(n) for n in names])

    def tbox(self, *axioms):
        return ("tbox", list(axioms))

    def abox(self, *atoms):
        return ("abox", list(atoms))

    def action(self, name, params, *effects):
        return ("action", str(name), params or [], list(effects))

    def process(self, *rules):
        return ("process", list(rules))

    # ---------- TBox ----------
    def isa(self, lhs, rhs):
        return ConceptInclusion(lhs, rhs)

    def disjoint(self, lhs, rhs):
        return ConceptInclusion(lhs, rhs, negated=True)

    def roledisjoint(self, lhs, rhs):
        return RoleDisjointness(lhs, rhs)

    def funct(self, role):
        return Functionality(role)

    def named_concept(self, name):
        return NamedConcept(str(name))

    def exists_concept(self, role):
        return ExistsRole(role)

    def role_name(self, name):
        return Role(str(name))

    def inverse_role(self, name):
        return Role(str(name), inverse=True)

    def ground_atom(self, predicate, *terms):
        return Assertion(str(predicate), tuple(Constant(str(t)) for t in terms))

    # ---------- actions ----------
    def effect(self, qplus, qminus, *templates):
        templates = [t for t in templates if t is not None]

        def build(scope: _Scope) -> EffectSpec:
            return EffectSpec(
                qplus(scope),
                tuple(t(scope) for t in templates),
                qminus(scope) if qminus is not None else ECQ_TRUE,
            )
        return build

    def template(self, predicate, *args):
        args = [a for a in args if a is not None]

        def build(scope: _Scope) -> AssertionTemplate:
            return AssertionTemplate(str(predicate), tuple(_head_term(a, scope) for a in args))
        return build

    def skolem(self, function, *args):
        names = [str(a) for a in args if a is not None]
        return lambda scope: SkolemTemplate(str(function), tuple(scope.term(n) for n in names))

    def rule(self, condition, action, arguments):
        return (condition, str(action), arguments or [])

    # ---------- ECQ ----------
    def ecq_disj(self, left, right):
        return lambda scope: ecq_or(left(scope), right(scope))

    def ecq_conj(self, left, right):
        return lambda scope: ECQAnd(left(scope), right(scope))

    def ecq_not(self, body):
        return lambda scope: ECQNot(body(scope))

    def ecq_exists(self, name, body):
        return lambda scope: ECQExists(Var(str(name)), body(scope.bind([str(name)])))

    def ecq_forall(self, name, body):
        return lambda scope: ecq_forall(Var(str(name)), body(scope.bind([str(name)])))

    def ecq_ucq(self, ucq):
        return lambda scope: EmbeddedUCQ(ucq(scope))

    def ecq_atom(self, atom):
        return lambda scope: EmbeddedUCQ(_atom_ucq(atom, scope))

    def ecq_true(self):
        return lambda scope: ECQ_TRUE

    def ecq_false(self):
        return lambda scope: ECQ_FALSE


def _head_term(arg, scope: _Scope):
    if callable(arg):
        return arg(scope)
    return scope.term(str(arg))


@v_args(inline=True)
class _PropertyTransformer(_QueryTransformer):
    def properties(self, *entries):
        return list(entries)

    def property(self, name, formula):
        return (str(name), formula(_Scope()))

    def implies(self, left, right):
        return lambda scope: Implies(left(scope), right(scope))

    def or_formula(self, left, right):
        return lambda scope: Or(left(scope), right(scope))

    def and_formula(self, left, right):
        return lambda scope: And(left(scope), right(scope))

    def neg(self, body):
        return lambda scope: Not(body(scope))

    def diamond(self, body):
        return lambda scope: Diamond(body(scope))

    def box(self, body):
        return lambda scope: Box(body(scope))

    def exists(self, name, body):
        return lambda scope: Exists(Var(str(name)), body(scope.bind([str(name)])))

    def forall(self, name, body):
        return lambda scope: Forall(Var(str(name)), body(scope.bind([str(name)])))

    def mu(self, name, body):
        return lambda scope: Mu(str(name), body(scope))

    def nu(self, name, body):
        return lambda scope: Nu(str(name), body(scope))

    def query(self, ucq):
        return lambda scope: Query(EmbeddedUCQ(ucq(scope)))

    def atom_query(self, atom):
        return lambda scope: Query(EmbeddedUCQ(_atom_ucq(atom, scope)))

    def true(self):
        return lambda scope: TRUE

    def false(self):
        return lambda scope: FALSE

    def predvar(self, name):
        return lambda scope: PredVar(str(name))


def _parse(parser: Lark, text: str, start: Optional[str] = None):
    try:
        if start is None:
            return parser.parse(text)
        return parser.parse(text, start=start)
    except UnexpectedEOF:
        lines = text.splitlines() or [""]
        raise KabSyntaxError("unexpected end of input", len(lines), len(lines[-1]) + 1) from None
    except UnexpectedInput as e:
        token = getattr(e, "token", None)
        found = f" {str(token)!r}" if token is not None else ""
        raise KabSyntaxError(f"unexpected input{found}", e.line, e.column) from None


# ============================================================
# .kab
# ============================================================

def parse_kab(text: str, check_consistency: bool = True) -> KabSpec:
    """
    .kab 문서 -> 검증된 KabSpec

    Raises:
        KabSyntaxError: 문법 오류 (줄/열 포함)
        KabSemanticError: 불변식 위반 (check_consistency면 A0 불일치 포함)
    """
    sections = _KabTransformer().transform(_parse(_kab_parser(), text))

    axioms, assertions, declared = [], [], []
    actions, rules = [], []
    for section in sections:
        kind = section[0]
        if kind == "constants":
            declared.extend(section[1])
        elif kind == "tbox":
            axioms.extend(section[1])
        elif kind == "abox":
            assertions.extend(section[1])
        elif kind == "action":
            actions.append(section[1:])
        else:
            rules.extend(section[1])

    tbox = TBox(tuple(axioms))
    a0 = ABox(assertions)
    constants = frozenset(Constant(n) for n in declared)
    delta0 = {c.name for c in constants} | {TEMP.name} | {c.name for c in tbox.label_constants}
    delta0.update(t.name for a in a0 for t in a.args)
    scope = _Scope(constants=frozenset(delta0))

    built_actions = []
    for name, params, effects in actions:
        reserved = [p for p in params if p in delta0]
        if reserved:
            raise KabSemanticError(f"action {name}: parameters {reserved} collide with constants")
        built_actions.append(Action(name, tuple(Var(p) for p in params), tuple(e(scope) for e in effects)))

    process = []
    for condition, action, arguments in rules:
        reserved = [a for a in arguments if a in delta0]
        if reserved:
            raise KabSemanticError(f"rule for {action}: arguments {reserved} collide with constants")
        process.append(ProcessRule(condition(scope), action, tuple(Var(a) for a in arguments)))

    spec = KabSpec(tbox, a0, tuple(built_actions), tuple(process), constants)
    spec.validate(check_consistency=check_consistency)
    logger.debug(
        "parsed KAB: %d axioms, %d assertions, %d actions, %d rules",
        len(tbox.axioms), len(a0), len(built_actions), len(process),
    )
    return spec


# ============================================================
# .prop
# ============================================================

def _check_property(phi: MuFormula) -> MuFormula:
    unbound = free_predicate_vars(phi)
    if unbound:
        raise OpenFormula(f"unbound predicate variables {sorted(unbound)}")
    check_monotone(phi)
    return phi


def parse_property(text: str) -> MuFormula:
    """
    공식 하나 -> 닫힌 MuFormula

    Raises:
        KabSyntaxError, OpenFormula, NonMonotoneFixpoint
    """
    builder = _PropertyTransformer().transform(_parse(_property_parser(), text, start="formula"))
    return _check_property(builder(_Scope()))


def parse_properties(text: str) -> List[Tuple[str, MuFormula]]:
    """`이름: 공식;` 목록 (선언 순서)"""
    entries = _PropertyTransformer().transform(_parse(_property_parser(), text, start="properties"))
    seen = set()
    for name, phi in entries:
        if name in seen:
            raise KabSemanticError(f"duplicate property name: {name}")
        seen.add(name)
        _check_property(phi)
    return entries


# ============================================================
# Pretty-printing
# ============================================================

def _format_cq(cq: CQ) -> str:
    if not cq.atoms:
        return "true"
    existential = sorted(cq.existential_vars, key=term_key)
    atoms = ", ".join(str(a) for a in cq.atoms)
    if existential:
        return f"exists {', '.join(v.name for v in existential)}. {atoms}"
    return atoms


def format_ucq(ucq: UCQ) -> str:
    return " or ".join(_format_cq(cq) for cq in ucq.cqs)


def format_ecq(query: ECQ) -> str:
    if isinstance(query, EmbeddedUCQ):
        return "true" if query.ucq == TRUE_UCQ else f"[{format_ucq(query.ucq)}]"
    if isinstance(query, ECQNot):
        return "!" + format_ecq(query.body)
    if isinstance(query, ECQAnd):
        return f"({format_ecq(query.left)} & {format_ecq(query.right)})"
    return f"exists {query.var.name}.{format_ecq(query.body)}"


def format_formula(phi: MuFormula) -> str:
    """parse_property로 같은 AST가 되는 문자열 (이항 연산자는 항상 괄호)"""
    if isinstance(phi, Query):
        if not isinstance(phi.ecq, EmbeddedUCQ):
            raise ValueError("only embedded UCQ leaves have a property syntax")
        return format_ecq(phi.ecq)
    if isinstance(phi, Not):
        return "!" + format_formula(phi.body)
    if isinstance(phi, And):
        return f"({format_formula(phi.left)} & {format_formula(phi.right)})"
    if isinstance(phi, Or):
        return f"({format_formula(phi.left)} | {format_formula(phi.right)})"
    if isinstance(phi, Implies):
        return f"({format_formula(phi.left)} -> {format_formula(phi.right)})"
    if isinstance(phi, Exists):
        return f"exists {phi.var.name}.{format_formula(phi.body)}"
    if isinstance(phi, Forall):
        return f"forall {phi.var.name}.{format_formula(phi.body)}"
    if isinstance(phi, Diamond):
        return "<>" + format_formula(phi.body)
    if isinstance(phi, Box):
        return "[]" + format_formula(phi.body)
    if isinstance(phi, PredVar):
        return phi.name
    keyword = "mu" if isinstance(phi, Mu) else "nu"
    return f"{keyword} {phi.var}.{format_formula(phi.body)}"


def format_properties(entries: Iterable[Tuple[str, MuFormula]]) -> str:
    return "".join(f"{name}: {format_formula(phi)};\n" for name, phi in entries)


def _format_head(template: AssertionTemplate) -> str:
    return f"{template.predicate}({', '.join(str(a) for a in template.args)})"


def format_kab(spec: KabSpec) -> str:
    """parse_kab로 같은 KabSpec이 되는 .kab 문서"""
    lines: List[str] = []
    if spec.constants:
        lines.append("CONSTANTS {")
        lines.extend(f"  {c.name};" for c in sorted(spec.constants, key=term_key))
        lines.append("}")
    lines.append("TBOX {")
    lines.extend(f"  {axiom};" for axiom in spec.tbox.axioms)
    lines.append("}")
    lines.append("ABOX {")
    lines.extend(f"  {a};" for a in spec.a0.assertions)
    lines.append("}")
    for action in spec.actions:
        params = ", ".join(p.name for p in action.params)
        lines.append(f"ACTION {action.name}({params}) {{")
        for effect in action.effects:
            guard = "" if effect.qminus == ECQ_TRUE else f" and {format_ecq(effect.qminus)}"
            head = ", ".join(_format_head(t) for t in effect.head)
            lines.append(f"  effect [{format_ucq(effect.qplus)}]{guard} ~> {{ {head} }};")
        lines.append("}")
    lines.append("PROCESS {")
    for rule in spec.process:
        args = ", ".join(a.name for a in rule.arguments)
        lines.append(f"  {format_ecq(rule.condition)} -> {rule.action}({args});")
    lines.append("}")
    return "\n".join(lines) + "\n"


def labels_report(spec: KabSpec) -> Dict[str, str]:
    """레이블 -> 공리 문자열"""
    return {label.name: str(axiom) for axiom, label in spec.tbox.labels.items()}


def parse_abox(text: str) -> ABox:
    """`ABOX { ... }` 블록만 있는 문서 -> ABox"""
    sections = _KabTransformer().transform(_parse(_kab_parser(), text))
    assertions = []
    for section in sections:
        if section[0] != "abox":
            raise KabSemanticError("expected only ABOX sections")
        assertions.extend(section[1])
    return ABox(assertions)
