"""
µ-calculus 모듈 (µL_A^EQL)
- 공식 AST, 자유 변수/단조성 검사
- IT fragment 판별, τ 변환
- 유한 전이 시스템 위의 Kleene 고정점 모델 체킹
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, List, Mapping, NamedTuple, Optional, Union

from .dllite import (
    CQ, ECQ, ECQ_TRUE, Atom, EmbeddedUCQ, GroundTerm, UCQ, VIOL, Var,
    ecq_free_vars, ecq_holds, term_key,
)
from .errors import NonMonotoneFixpoint, OpenFormula
from .repair import answer_function
from .ts import TransitionSystem

logger = logging.getLogger(__name__)


# ============================================================
# AST
# ============================================================

@dataclass(frozen=True)
class Query:
    ecq: ECQ


@dataclass(frozen=True)
class Not:
    body: "MuFormula"


@dataclass(frozen=True)
class And:
    left: "MuFormula"
    right: "MuFormula"


@dataclass(frozen=True)
class Or:
    left: "MuFormula"
    right: "MuFormula"


@dataclass(frozen=True)
class Implies:
    left: "MuFormula"
    right: "MuFormula"


@dataclass(frozen=True)
class Exists:
    var: Var
    body: "MuFormula"


@dataclass(frozen=True)
class Forall:
    var: Var
    body: "MuFormula"


@dataclass(frozen=True)
class Diamond:
    body: "MuFormula"


@dataclass(frozen=True)
class Box:
    body: "MuFormula"


@dataclass(frozen=True)
class PredVar:
    name: str


@dataclass(frozen=True)
class Mu:
    var: str
    body: "MuFormula"


@dataclass(frozen=True)
class Nu:
    var: str
    body: "MuFormula"


MuFormula = Union[Query, Not, And, Or, Implies, Exists, Forall, Diamond, Box, PredVar, Mu, Nu]

TRUE = Query(ECQ_TRUE)
FALSE = Not(TRUE)

_BINARY = (And, Or, Implies)
_QUANTIFIERS = (Exists, Forall)
_MODAL = (Diamond, Box)
_FIXPOINTS = (Mu, Nu)


def viol_free() -> MuFormula:
    """¬∃x.[Viol(x)]"""
    x = Var("x")
    return Not(Exists(x, Query(EmbeddedUCQ(UCQ((x,), (CQ((x,), (Atom(VIOL, (x,)),)),))))))


NO_VIOL = viol_free()


def children(phi: MuFormula) -> List[MuFormula]:
    if isinstance(phi, _BINARY):
        return [phi.left, phi.right]
    if isinstance(phi, (Query, PredVar)):
        return []
    return [phi.body]


# ============================================================
# 자유 변수 / 단조성
# ============================================================

@lru_cache(maxsize=8192)
def free_individual_vars(phi: MuFormula) -> FrozenSet[Var]:
    if isinstance(phi, Query):
        return ecq_free_vars(phi.ecq)
    if isinstance(phi, _QUANTIFIERS):
        return free_individual_vars(phi.body) - {phi.var}
    found: FrozenSet[Var] = frozenset()
    for child in children(phi):
        found |= free_individual_vars(child)
    return found


@lru_cache(maxsize=8192)
def free_predicate_vars(phi: MuFormula) -> FrozenSet[str]:
    if isinstance(phi, PredVar):
        return frozenset({phi.name})
    if isinstance(phi, _FIXPOINTS):
        return free_predicate_vars(phi.body) - {phi.var}
    found: FrozenSet[str] = frozenset()
    for child in children(phi):
        found |= free_predicate_vars(child)
    return found


def is_closed(phi: MuFormula) -> bool:
    return not free_individual_vars(phi) and not free_predicate_vars(phi)


def check_monotone(phi: MuFormula) -> None:
    """고정점 변수가 짝수 개의 부정 아래에만 나타나는지 검사"""
    _check_monotone(phi, {}, False)


def _check_monotone(phi: MuFormula, binders: Dict[str, bool], negated: bool) -> None:
    if isinstance(phi, PredVar):
        if phi.name in binders and binders[phi.name] != negated:
            raise NonMonotoneFixpoint(f"{phi.name} occurs under an odd number of negations")
        return
    if isinstance(phi, _FIXPOINTS):
        _check_monotone(phi.body, {**binders, phi.var: negated}, negated)
    elif isinstance(phi, Not):
        _check_monotone(phi.body, binders, not negated)
    elif isinstance(phi, Implies):
        _check_monotone(phi.left, binders, not negated)
        _check_monotone(phi.right, binders, negated)
    else:
        for child in children(phi):
            _check_monotone(child, binders, negated)


def substitute_predvar(phi: MuFormula, name: str, replacement: MuFormula) -> MuFormula:
    """자유 출현 Z를 replacement로 치환"""
    if isinstance(phi, PredVar):
        return replacement if phi.name == name else phi
    if isinstance(phi, Query):
        return phi
    if isinstance(phi, _FIXPOINTS):
        if phi.var == name:
            return phi
        return type(phi)(phi.var, substitute_predvar(phi.body, name, replacement))
    if isinstance(phi, _BINARY):
        return type(phi)(
            substitute_predvar(phi.left, name, replacement),
            substitute_predvar(phi.right, name, replacement),
        )
    if isinstance(phi, _QUANTIFIERS):
        return type(phi)(phi.var, substitute_predvar(phi.body, name, replacement))
    return type(phi)(substitute_predvar(phi.body, name, replacement))


# ============================================================
# IT fragment / τ
# ============================================================

def is_it_fragment(phi: MuFormula) -> bool:
    """모든 모달 연산자가 <>[], [][], <><>, []<> 쌍으로만 나타나는지 (표면 구문)"""
    if isinstance(phi, _MODAL):
        inner = phi.body
        if not isinstance(inner, _MODAL):
            return False
        return is_it_fragment(inner.body)
    return all(is_it_fragment(child) for child in children(phi))


def tau(phi: MuFormula) -> MuFormula:
    """
    τ 변환
    - <>Ψ  ->  <><>(¬∃x.Viol(x) ∧ τ(Ψ))
    - []Ψ  ->  []<>(¬∃x.Viol(x) → τ(Ψ))
    """
    if isinstance(phi, Diamond):
        return Diamond(Diamond(And(NO_VIOL, tau(phi.body))))
    if isinstance(phi, Box):
        return Box(Diamond(Implies(NO_VIOL, tau(phi.body))))
    if isinstance(phi, (Query, PredVar)):
        return phi
    if isinstance(phi, _BINARY):
        return type(phi)(tau(phi.left), tau(phi.right))
    if isinstance(phi, (_QUANTIFIERS + _FIXPOINTS)):
        return type(phi)(phi.var, tau(phi.body))
    return Not(tau(phi.body))


# ============================================================
# 모델 체킹
# ============================================================

class CheckResult(NamedTuple):
    verdict: bool
    extension: FrozenSet[int]


class ModelChecker:
    """
    유한 전이 시스템 위의 공식 확장 계산
    - 예측 변수가 없는 부분공식은 (공식, 관련 개체 변수 값)으로 메모
    - 양화 후보는 시스템 전체 active domain, 상태별 adom 소속은 양화 노드에서 확인
    """

    def __init__(self, ts: TransitionSystem, query_mode: str = "certain"):
        self.ts = ts
        self.answer_fn = answer_function(query_mode)
        self.all_states = frozenset(range(len(ts.states)))
        self.domain = sorted(ts.active_domain, key=term_key)
        self.adoms = [s.abox.adom() for s in ts.states]
        self._successors = [ts.successors(i) for i in range(len(ts.states))]
        self._memo: Dict[tuple, FrozenSet[int]] = {}
        self.iterations = 0

    def extension(
        self, phi: MuFormula,
        valuation: Optional[Mapping[Var, GroundTerm]] = None,
        predicates: Optional[Mapping[str, FrozenSet[int]]] = None,
    ) -> FrozenSet[int]:
        return self._ext(phi, dict(valuation or {}), dict(predicates or {}))

    def _ext(self, phi: MuFormula, v: Dict[Var, GroundTerm], V: Dict[str, FrozenSet[int]]) -> FrozenSet[int]:
        if free_predicate_vars(phi):
            return self._compute(phi, v, V)
        relevant = tuple(sorted(
            ((var.name, term_key(v[var])) for var in free_individual_vars(phi) if var in v)
        ))
        key = (phi, relevant)
        cached = self._memo.get(key)
        if cached is None:
            cached = self._compute(phi, v, V)
            self._memo[key] = cached
        return cached

    def _pre_exists(self, target: FrozenSet[int]) -> FrozenSet[int]:
        return frozenset(s for s in self.all_states if self._successors[s] & target)

    def _pre_forall(self, target: FrozenSet[int]) -> FrozenSet[int]:
        return frozenset(s for s in self.all_states if self._successors[s] <= target)

    def _compute(self, phi: MuFormula, v: Dict[Var, GroundTerm], V: Dict[str, FrozenSet[int]]) -> FrozenSet[int]:
        if isinstance(phi, Query):
            missing = ecq_free_vars(phi.ecq) - set(v)
            if missing:
                raise OpenFormula(f"unbound variables {sorted(x.name for x in missing)}")
            binding = {x: v[x] for x in ecq_free_vars(phi.ecq)}
            return frozenset(
                s for s in self.all_states
                if ecq_holds(phi.ecq, self.ts.tbox, self.ts.abox(s), binding, self.answer_fn)
            )
        if isinstance(phi, Not):
            return self.all_states - self._ext(phi.body, v, V)
        if isinstance(phi, And):
            return self._ext(phi.left, v, V) & self._ext(phi.right, v, V)
        if isinstance(phi, Or):
            return self._ext(phi.left, v, V) | self._ext(phi.right, v, V)
        if isinstance(phi, Implies):
            return (self.all_states - self._ext(phi.left, v, V)) | self._ext(phi.right, v, V)
        if isinstance(phi, Exists):
            result = set()
            for d in self.domain:
                body = self._ext(phi.body, {**v, phi.var: d}, V)
                result.update(s for s in body if d in self.adoms[s])
            return frozenset(result)
        if isinstance(phi, Forall):
            result = set(self.all_states)
            for d in self.domain:
                body = self._ext(phi.body, {**v, phi.var: d}, V)
                result.difference_update(s for s in self.all_states - body if d in self.adoms[s])
            return frozenset(result)
        if isinstance(phi, Diamond):
            return self._pre_exists(self._ext(phi.body, v, V))
        if isinstance(phi, Box):
            return self._pre_forall(self._ext(phi.body, v, V))
        if isinstance(phi, PredVar):
            if phi.name not in V:
                raise OpenFormula(f"unbound predicate variable {phi.name}")
            return V[phi.name]
        # Mu / Nu: Kleene 반복
        current = frozenset() if isinstance(phi, Mu) else self.all_states
        while True:
            self.iterations += 1
            following = self._ext(phi.body, v, {**V, phi.var: current})
            if following == current:
                return current
            current = following


def model_check(ts: TransitionSystem, phi: MuFormula, query_mode: str = "certain") -> CheckResult:
    """
    닫힌 공식의 모델 체킹

    Raises:
        OpenFormula: 자유 개체/예측 변수
        NonMonotoneFixpoint: 단조가 아닌 고정점 본문
    """
    if not is_closed(phi):
        names = sorted(v.name for v in free_individual_vars(phi)) + sorted(free_predicate_vars(phi))
        raise OpenFormula(f"formula is not closed: free {', '.join(names)}")
    check_monotone(phi)
    checker = ModelChecker(ts, query_mode)
    extension = checker.extension(phi)
    logger.debug("fixpoint iterations: %d", checker.iterations)
    return CheckResult(ts.initial in extension, extension)
