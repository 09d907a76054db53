"""
KAB 명세 모듈
- 액션/효과/프로세스 규칙/KabSpec 표현 및 불변식 검증
- 한 단계 실행 도구: legal_assignments, do_effects, calls, ground
"""
import logging
from collections.abc import Mapping as MappingABC
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from .dllite import (
    ABox, AnswerFn, Assertion, Constant, ECQ, ECQ_TRUE, ECQAnd, EmbeddedUCQ, GroundTerm,
    SkolemCall, STATE, TBox, TEMP, UCQ, VIOL, Var, certain_answers, ecq_answer_vars, ecq_constants,
    ecq_free_vars, ecq_predicates, eval_ecq, is_consistent, term_key,
)
from .errors import KabSemanticError, MissingCallBinding
from .repair import answer_function

logger = logging.getLogger(__name__)

RESERVED_PREDICATES = (STATE, VIOL)


# ============================================================
# 효과 템플릿
# ============================================================

@dataclass(frozen=True)
class SkolemTemplate:
    """효과 head의 f(x, ...)"""
    function: str
    args: Tuple[Union[Var, Constant], ...] = ()

    def __str__(self) -> str:
        return f"{self.function}({', '.join(str(a) for a in self.args)})"


TermTemplate = Union[Constant, Var, SkolemTemplate]


@dataclass(frozen=True)
class AssertionTemplate:
    predicate: str
    args: Tuple[TermTemplate, ...]

    def __str__(self) -> str:
        return f"{self.predicate}({', '.join(str(a) for a in self.args)})"


def template_vars(template: AssertionTemplate) -> Iterator[Var]:
    for arg in template.args:
        if isinstance(arg, Var):
            yield arg
        elif isinstance(arg, SkolemTemplate):
            yield from (a for a in arg.args if isinstance(a, Var))


def _template_constants(template: AssertionTemplate) -> Iterator[Constant]:
    for arg in template.args:
        if isinstance(arg, Constant):
            yield arg
        elif isinstance(arg, SkolemTemplate):
            yield from (a for a in arg.args if isinstance(a, Constant))


@dataclass(frozen=True)
class EffectSpec:
    """[q+] and Q- ~> head"""
    qplus: UCQ
    head: Tuple[AssertionTemplate, ...]
    qminus: ECQ = ECQ_TRUE

    @property
    def condition(self) -> ECQ:
        if self.qminus == ECQ_TRUE:
            return EmbeddedUCQ(self.qplus)
        return ECQAnd(EmbeddedUCQ(self.qplus), self.qminus)


@dataclass(frozen=True)
class Action:
    name: str
    params: Tuple[Var, ...] = ()
    effects: Tuple[EffectSpec, ...] = ()


@dataclass(frozen=True)
class ProcessRule:
    """Q -> alpha(arguments); arguments는 Q의 free 변수를 액션 파라미터에 위치별로 대응"""
    condition: ECQ
    action: str
    arguments: Tuple[Var, ...] = ()


# ============================================================
# 서비스 호출 맵
# ============================================================

class ServiceCallMap(MappingABC):
    """결정적 서비스 호출 맵 m: SkolemCall -> Constant (불변)"""

    __slots__ = ("_items", "_lookup", "_hash")

    def __init__(self, items: Optional[Mapping[SkolemCall, Constant]] = None):
        lookup = dict(items or {})
        self._items = tuple(sorted(lookup.items(), key=lambda kv: term_key(kv[0])))
        self._lookup = lookup
        self._hash = hash(self._items)

    def __getitem__(self, call: SkolemCall) -> Constant:
        return self._lookup[call]

    def __iter__(self) -> Iterator[SkolemCall]:
        return (call for call, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, ServiceCallMap):
            return self._items == other._items
        return super().__eq__(other)

    def __repr__(self) -> str:
        return "{" + ", ".join(f"{c}->{v}" for c, v in self._items) + "}"

    @property
    def pairs(self) -> Tuple[Tuple[SkolemCall, Constant], ...]:
        return self._items

    def extend(self, theta: Mapping[SkolemCall, Constant]) -> "ServiceCallMap":
        """m ∪ theta (공통 키에서 값이 다르면 ValueError)"""
        merged = dict(self._lookup)
        for call, value in theta.items():
            if merged.setdefault(call, value) != value:
                raise ValueError(f"service call {call} already returned {merged[call]}")
        return ServiceCallMap(merged)

    def argument_constants(self) -> FrozenSet[Constant]:
        return frozenset(a for call in self._lookup for a in call.args)


# ============================================================
# KabSpec
# ============================================================

@dataclass(frozen=True)
class KabSpec:
    """
    K = (T, A0, Γ, Π)
    - constants: CONSTANTS 섹션의 추가 Δ0 상수
    - delta0 = constants + temp + TBox 레이블 + adom(A0)
    """
    tbox: TBox
    a0: ABox
    actions: Tuple[Action, ...] = ()
    process: Tuple[ProcessRule, ...] = ()
    constants: FrozenSet[Constant] = frozenset()

    @cached_property
    def delta0(self) -> FrozenSet[Constant]:
        initial = frozenset(t for t in self.a0.adom() if isinstance(t, Constant))
        return self.constants | {TEMP} | self.tbox.label_constants | initial

    @cached_property
    def action_table(self) -> Dict[str, Action]:
        return {a.name: a for a in self.actions}

    def action(self, name: str) -> Action:
        try:
            return self.action_table[name]
        except KeyError:
            raise KabSemanticError(f"unknown action: {name}") from None

    def predicates(self) -> Dict[str, int]:
        """TBox/A0/액션/규칙에 쓰인 술어와 arity"""
        vocab = self.tbox.vocabulary()
        for a in self.a0:
            vocab.setdefault(a.predicate, len(a.args))
        for action in self.actions:
            for effect in action.effects:
                for pred, arity in ecq_predicates(effect.condition).items():
                    vocab.setdefault(pred, arity)
                for t in effect.head:
                    vocab.setdefault(t.predicate, len(t.args))
        for rule in self.process:
            for pred, arity in ecq_predicates(rule.condition).items():
                vocab.setdefault(pred, arity)
        return vocab

    def validate(self, check_consistency: bool = True) -> "KabSpec":
        """모든 불변식 검사 (위반 시 KabSemanticError)"""
        _check_arities(self)
        declared = self.tbox.vocabulary()
        for predicate in RESERVED_PREDICATES:
            if predicate in declared:
                raise KabSemanticError(f"{predicate} is reserved")
        for a in self.a0:
            if any(isinstance(t, SkolemCall) for t in a.args):
                raise KabSemanticError(f"initial ABox contains a service call: {a}")
            if a.predicate in RESERVED_PREDICATES:
                raise KabSemanticError(f"{a.predicate} is reserved")
        if len(self.action_table) != len(self.actions):
            raise KabSemanticError("duplicate action names")
        for action in self.actions:
            _check_action(action, self.delta0)
        for rule in self.process:
            _check_rule(rule, self)
        if check_consistency and not is_consistent(self.tbox, self.a0):
            raise KabSemanticError("initial ABox is inconsistent with the TBox")
        return self


def _check_arities(spec: KabSpec) -> None:
    seen: Dict[str, int] = dict(spec.tbox.vocabulary())
    pairs: List[Tuple[str, int]] = [(a.predicate, len(a.args)) for a in spec.a0]
    for action in spec.actions:
        for effect in action.effects:
            pairs.extend(ecq_predicates(effect.condition).items())
            pairs.extend((t.predicate, len(t.args)) for t in effect.head)
    for rule in spec.process:
        pairs.extend(ecq_predicates(rule.condition).items())
    for predicate, arity in pairs:
        if arity not in (1, 2):
            raise KabSemanticError(f"{predicate} must be a concept or a role")
        if seen.setdefault(predicate, arity) != arity:
            raise KabSemanticError(f"{predicate} is used with arities {seen[predicate]} and {arity}")


def _check_action(action: Action, delta0: FrozenSet[Constant]) -> None:
    params = set(action.params)
    if len(params) != len(action.params):
        raise KabSemanticError(f"action {action.name} has repeated parameters")
    for effect in action.effects:
        scope = set(effect.qplus.free) | params
        unscoped = ecq_free_vars(effect.qminus) - scope
        if unscoped:
            names = ", ".join(sorted(v.name for v in unscoped))
            raise KabSemanticError(f"action {action.name}: filter variables {names} not in q+")
        for template in effect.head:
            if template.predicate in RESERVED_PREDICATES:
                raise KabSemanticError(f"{template.predicate} is reserved")
            for var in template_vars(template):
                if var not in scope:
                    raise KabSemanticError(
                        f"action {action.name}: head variable {var} is neither free in q+ nor a parameter"
                    )
            for const in _template_constants(template):
                if const not in delta0:
                    raise KabSemanticError(f"action {action.name}: head constant {const} not in Δ0")
        stray = (ecq_constants(effect.condition)) - delta0
        if stray:
            raise KabSemanticError(f"action {action.name}: query constants {sorted(c.name for c in stray)} not in Δ0")


def _check_rule(rule: ProcessRule, spec: KabSpec) -> None:
    action = spec.action(rule.action)
    if len(rule.arguments) != len(action.params):
        raise KabSemanticError(
            f"rule for {action.name} passes {len(rule.arguments)} arguments, expected {len(action.params)}"
        )
    if len(set(rule.arguments)) != len(rule.arguments):
        raise KabSemanticError(f"rule for {action.name} repeats an argument")
    if ecq_free_vars(rule.condition) != frozenset(rule.arguments):
        raise KabSemanticError(
            f"rule for {action.name}: condition free variables must be exactly its arguments"
        )
    stray = ecq_constants(rule.condition) - spec.delta0
    if stray:
        raise KabSemanticError(f"rule for {action.name}: constants {sorted(c.name for c in stray)} not in Δ0")


# ============================================================
# 한 단계 실행
# ============================================================

Assignment = Tuple[Action, Tuple[Constant, ...]]


def legal_assignments(abox: ABox, spec: KabSpec, query_mode: str = "certain") -> List[Assignment]:
    """
    Π의 규칙 Q -> α 중 Q의 답으로 얻는 (α, 파라미터 값) 목록

    Returns:
        액션 이름, 값 순으로 정렬된 중복 없는 목록
    """
    answer_fn = answer_function(query_mode)
    found: Dict[Tuple[str, Tuple[Constant, ...]], Assignment] = {}
    for rule in spec.process:
        action = spec.action(rule.action)
        order = ecq_answer_vars(rule.condition)
        for row in eval_ecq(rule.condition, spec.tbox, abox, answer_fn=answer_fn):
            values = dict(zip(order, row))
            args = tuple(values[v] for v in rule.arguments)
            found.setdefault((action.name, args), (action, args))
    return [found[k] for k in sorted(found, key=lambda k: (k[0], [term_key(t) for t in k[1]]))]


def substitution(action: Action, values: Iterable[Constant]) -> Dict[Var, Constant]:
    return dict(zip(action.params, values))


def _instantiate(template: AssertionTemplate, rho: Mapping[Var, GroundTerm]) -> Assertion:
    def term(arg):
        if isinstance(arg, Var):
            if arg not in rho:
                raise KabSemanticError(f"variable {arg} is unbound in effect head")
            return rho[arg]
        if isinstance(arg, SkolemTemplate):
            return SkolemCall(arg.function, tuple(term(a) for a in arg.args))
        return arg

    return Assertion(template.predicate, tuple(term(a) for a in template.args))


def do_effects(
    tbox: TBox, abox: ABox, action: Action, values: Iterable[Constant],
    answer_fn: AnswerFn = certain_answers,
) -> FrozenSet[Assertion]:
    """do(T, A, ασ): 각 효과의 ([q+] ∧ Q-)σ 답 ρ마다 head σρ (Skolem 항은 ground 호출로)"""
    sigma = substitution(action, values)
    facts = set()
    for effect in action.effects:
        condition = effect.condition
        order = ecq_answer_vars(condition, sigma)
        for row in eval_ecq(condition, tbox, abox, sigma, answer_fn):
            rho = dict(sigma)
            rho.update(zip(order, row))
            facts.update(_instantiate(t, rho) for t in effect.head)
    return frozenset(facts)


def calls(facts: Iterable[Assertion]) -> FrozenSet[SkolemCall]:
    """CALLS(E)"""
    return frozenset(t for a in facts for t in a.args if isinstance(t, SkolemCall))


def ground(facts: Iterable[Assertion], theta: Mapping[SkolemCall, Constant]) -> ABox:
    """모든 서비스 호출을 θ 값으로 치환"""
    grounded = []
    for a in facts:
        args = []
        for t in a.args:
            if isinstance(t, SkolemCall):
                if t not in theta:
                    raise MissingCallBinding(f"no value for service call {t}")
                t = theta[t]
            args.append(t)
        grounded.append(Assertion(a.predicate, tuple(args)))
    return ABox(grounded)
