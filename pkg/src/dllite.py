"""
DL-Lite_A 지식베이스 모듈
- 항(Constant, SkolemCall, Var), assertion, ABox, TBox 표현
- UCQ PerfectRef 재작성 및 certain answer 계산
- ECQ(EQL-Lite(UCQ)) 평가 (active domain 의미론)
- FO 재작성 기반 일관성 검사 (q^f_unsat, q^n_unsat)
"""
import itertools
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import (
    Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union,
)

logger = logging.getLogger(__name__)


# 예약 이름
STATE = "State"
VIOL = "Viol"
FRESH_PREFIX = "$v"
LABEL_PREFIX = "@"


# ============================================================
# 항(term)
# ============================================================

@dataclass(frozen=True)
class Constant:
    """개체 상수 (표준 이름)"""
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class SkolemCall:
    """ground 서비스 호출 f(c1,...,cn)"""
    function: str
    args: Tuple[Constant, ...] = ()

    def __post_init__(self):
        if not all(isinstance(a, Constant) for a in self.args):
            raise TypeError(f"service call {self.function} must have constant arguments")

    def __str__(self) -> str:
        return f"{self.function}({','.join(a.name for a in self.args)})"


@dataclass(frozen=True)
class Var:
    """질의 변수"""
    name: str

    def __str__(self) -> str:
        return self.name


GroundTerm = Union[Constant, SkolemCall]
QueryTerm = Union[Var, Constant]

TEMP = Constant("temp")


def term_key(term) -> tuple:
    """Constant/Var/SkolemCall 혼합 정렬용 키"""
    if isinstance(term, Constant):
        return (0, term.name)
    if isinstance(term, Var):
        return (1, term.name)
    return (2, term.function, tuple(term_key(a) for a in term.args))


def is_fresh_value(term) -> bool:
    return isinstance(term, Constant) and term.name.startswith(FRESH_PREFIX)


# ============================================================
# Assertion / ABox
# ============================================================

@dataclass(frozen=True)
class Assertion:
    """개념 assertion N(t) 또는 역할 assertion P(t1,t2)"""
    predicate: str
    args: Tuple[GroundTerm, ...]

    @property
    def is_concept(self) -> bool:
        return len(self.args) == 1

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(str(a) for a in self.args)})"


def assertion_key(assertion: Assertion) -> tuple:
    return (assertion.predicate, tuple(term_key(t) for t in assertion.args))


def fact(predicate: str, *names: str) -> Assertion:
    """테스트/코드용 축약 생성자: fact("P", "a", "b") -> P(a,b)"""
    return Assertion(predicate, tuple(Constant(n) for n in names))


class ABox:
    """
    assertion 집합 (불변)
    - 동등성/해시는 집합 기준
    - assertions는 정규 정렬된 튜플
    """

    __slots__ = ("_facts", "_sorted", "_index", "_adom", "_hash")

    def __init__(self, assertions: Iterable[Assertion] = ()):
        self._facts: FrozenSet[Assertion] = frozenset(assertions)
        self._sorted: Optional[Tuple[Assertion, ...]] = None
        self._index: Optional[Dict[str, Tuple[Assertion, ...]]] = None
        self._adom: Optional[FrozenSet[GroundTerm]] = None
        self._hash = hash(self._facts)

    @property
    def facts(self) -> FrozenSet[Assertion]:
        return self._facts

    @property
    def assertions(self) -> Tuple[Assertion, ...]:
        if self._sorted is None:
            self._sorted = tuple(sorted(self._facts, key=assertion_key))
        return self._sorted

    def facts_of(self, predicate: str) -> Tuple[Assertion, ...]:
        if self._index is None:
            index: Dict[str, List[Assertion]] = {}
            for a in self.assertions:
                index.setdefault(a.predicate, []).append(a)
            self._index = {k: tuple(v) for k, v in index.items()}
        return self._index.get(predicate, ())

    def adom(self) -> FrozenSet[GroundTerm]:
        if self._adom is None:
            self._adom = frozenset(t for a in self._facts for t in a.args)
        return self._adom

    def sorted_adom(self) -> List[GroundTerm]:
        return sorted(self.adom(), key=term_key)

    def union(self, other: Iterable[Assertion]) -> "ABox":
        return ABox(self._facts | frozenset(other))

    def difference(self, other: Iterable[Assertion]) -> "ABox":
        return ABox(self._facts - frozenset(other))

    def rename(self, mapping: Mapping[GroundTerm, GroundTerm]) -> "ABox":
        """값 치환 h(A)"""
        return ABox(
            Assertion(a.predicate, tuple(mapping.get(t, t) for t in a.args)) for a in self._facts
        )

    def __contains__(self, item) -> bool:
        return item in self._facts

    def __iter__(self) -> Iterator[Assertion]:
        return iter(self.assertions)

    def __len__(self) -> int:
        return len(self._facts)

    def __le__(self, other: "ABox") -> bool:
        return self._facts <= other._facts

    def __eq__(self, other) -> bool:
        return isinstance(other, ABox) and self._facts == other._facts

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "ABox({" + ", ".join(str(a) for a in self.assertions) + "})"


# ============================================================
# TBox
# ============================================================

@dataclass(frozen=True)
class Role:
    """P 또는 P^-"""
    name: str
    inverse: bool = False

    def __str__(self) -> str:
        return f"inv {self.name}" if self.inverse else self.name


@dataclass(frozen=True)
class NamedConcept:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ExistsRole:
    role: Role

    def __str__(self) -> str:
        return f"exists {self.role}"


BasicConcept = Union[NamedConcept, ExistsRole]


@dataclass(frozen=True)
class ConceptInclusion:
    """B1 isa B2 (negated=False) 또는 B1 disjoint B2 (negated=True)"""
    lhs: BasicConcept
    rhs: BasicConcept
    negated: bool = False

    def __str__(self) -> str:
        return f"{self.lhs} {'disjoint' if self.negated else 'isa'} {self.rhs}"


@dataclass(frozen=True)
class RoleDisjointness:
    lhs: Role
    rhs: Role

    def __str__(self) -> str:
        return f"{self.lhs} roledisjoint {self.rhs}"


@dataclass(frozen=True)
class Functionality:
    role: Role

    def __str__(self) -> str:
        return f"funct {self.role}"


Axiom = Union[ConceptInclusion, RoleDisjointness, Functionality]


def _concept_predicates(concept: BasicConcept) -> Tuple[str, int]:
    if isinstance(concept, NamedConcept):
        return concept.name, 1
    return concept.role.name, 2


@dataclass(frozen=True)
class TBox:
    """
    T = T_p + T_n + T_f
    - axioms는 선언 순서 유지, 중복 제거
    - 부정 포함/함수성 assertion마다 레이블 상수 @ax1, @ax2, ... (선언 순서)
    """
    axioms: Tuple[Axiom, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "axioms", tuple(dict.fromkeys(self.axioms)))

    @cached_property
    def positive_inclusions(self) -> Tuple[ConceptInclusion, ...]:
        return tuple(a for a in self.axioms if isinstance(a, ConceptInclusion) and not a.negated)

    @cached_property
    def negative_concept_inclusions(self) -> Tuple[ConceptInclusion, ...]:
        return tuple(a for a in self.axioms if isinstance(a, ConceptInclusion) and a.negated)

    @cached_property
    def negative_role_inclusions(self) -> Tuple[RoleDisjointness, ...]:
        return tuple(a for a in self.axioms if isinstance(a, RoleDisjointness))

    @cached_property
    def functionalities(self) -> Tuple[Functionality, ...]:
        return tuple(a for a in self.axioms if isinstance(a, Functionality))

    @cached_property
    def labeled_axioms(self) -> Tuple[Axiom, ...]:
        """T_n + T_f (선언 순서)"""
        return tuple(
            a for a in self.axioms
            if not (isinstance(a, ConceptInclusion) and not a.negated)
        )

    @cached_property
    def labels(self) -> Dict[Axiom, Constant]:
        return {
            axiom: Constant(f"{LABEL_PREFIX}ax{i}")
            for i, axiom in enumerate(self.labeled_axioms, start=1)
        }

    @cached_property
    def label_constants(self) -> FrozenSet[Constant]:
        return frozenset(self.labels.values())

    def positive_only(self) -> "TBox":
        return TBox(self.positive_inclusions)

    def vocabulary(self) -> Dict[str, int]:
        """술어 이름 -> arity"""
        vocab: Dict[str, int] = {}
        for axiom in self.axioms:
            if isinstance(axiom, ConceptInclusion):
                for concept in (axiom.lhs, axiom.rhs):
                    name, arity = _concept_predicates(concept)
                    vocab[name] = arity
            elif isinstance(axiom, RoleDisjointness):
                vocab[axiom.lhs.name] = 2
                vocab[axiom.rhs.name] = 2
            else:
                vocab[axiom.role.name] = 2
        return vocab


# ============================================================
# 질의: Atom / CQ / UCQ
# ============================================================

@dataclass(frozen=True)
class Atom:
    predicate: str
    args: Tuple[QueryTerm, ...]

    def __str__(self) -> str:
        return f"{self.predicate}({', '.join(str(a) for a in self.args)})"


def atom_key(atom: Atom) -> tuple:
    return (atom.predicate, tuple(term_key(t) for t in atom.args))


@dataclass(frozen=True)
class CQ:
    """
    conjunctive query
    - head: UCQ의 free 튜플과 위치별로 대응하는 항 (재작성 후 상수/중복 변수 가능)
    - inequalities: q^f_unsat 전용 (구문적 비교)
    """
    head: Tuple[QueryTerm, ...]
    atoms: Tuple[Atom, ...] = ()
    inequalities: Tuple[Tuple[QueryTerm, QueryTerm], ...] = ()

    @property
    def free_vars(self) -> Tuple[Var, ...]:
        return tuple(dict.fromkeys(t for t in self.head if isinstance(t, Var)))

    @property
    def variables(self) -> FrozenSet[Var]:
        found = {t for a in self.atoms for t in a.args if isinstance(t, Var)}
        found.update(t for pair in self.inequalities for t in pair if isinstance(t, Var))
        found.update(self.free_vars)
        return frozenset(found)

    @property
    def existential_vars(self) -> FrozenSet[Var]:
        return self.variables - frozenset(self.free_vars)


@dataclass(frozen=True)
class UCQ:
    """CQ 합집합 (cqs가 비면 false)"""
    free: Tuple[Var, ...]
    cqs: Tuple[CQ, ...]

    def __post_init__(self):
        for cq in self.cqs:
            if len(cq.head) != len(self.free):
                raise ValueError("every CQ head must align with the UCQ free tuple")

    @property
    def is_boolean(self) -> bool:
        return not self.free


TRUE_UCQ = UCQ((), (CQ(()),))


def atom_query(atom: Atom) -> UCQ:
    """단일 atom UCQ (free = 원자 안의 변수, 이름순)"""
    free = tuple(sorted({t for t in atom.args if isinstance(t, Var)}, key=term_key))
    return UCQ(free, (CQ(free, (atom,)),))


def conjunctive_query(atoms: Sequence[Atom], free: Sequence[Var] = ()) -> UCQ:
    free = tuple(free)
    return UCQ(free, (CQ(free, tuple(atoms)),))


# ============================================================
# 평가 (ABox를 데이터베이스로 취급)
# ============================================================

Binding = Dict[Var, GroundTerm]


def _resolve(term, binding: Mapping[Var, GroundTerm]):
    if isinstance(term, Var):
        return binding.get(term, term)
    return term


def _match(atom: Atom, fact_: Assertion, binding: Binding) -> Optional[Binding]:
    if len(atom.args) != len(fact_.args):
        return None
    result = dict(binding)
    for qt, gt in zip(atom.args, fact_.args):
        if isinstance(qt, Var):
            seen = result.get(qt)
            if seen is None:
                result[qt] = gt
            elif seen != gt:
                return None
        elif qt != gt:
            return None
    return result


def _homomorphisms(atoms: Tuple[Atom, ...], abox: ABox, binding: Binding) -> Iterator[Binding]:
    if not atoms:
        yield binding
        return
    # 이미 묶인 항이 가장 많은 atom부터
    best = max(
        range(len(atoms)),
        key=lambda i: sum(1 for t in atoms[i].args if not isinstance(t, Var) or t in binding),
    )
    atom = atoms[best]
    rest = atoms[:best] + atoms[best + 1:]
    for candidate in abox.facts_of(atom.predicate):
        extended = _match(atom, candidate, binding)
        if extended is not None:
            yield from _homomorphisms(rest, abox, extended)


def _cq_matches(cq: CQ, abox: ABox) -> Iterator[Binding]:
    for h in _homomorphisms(cq.atoms, abox, {}):
        if any(_resolve(s, h) == _resolve(t, h) for s, t in cq.inequalities):
            continue
        yield h


def evaluate_cq(cq: CQ, abox: ABox) -> FrozenSet[tuple]:
    """CQ 평가; head에만 있는 변수는 adom 전체를 순회"""
    answers = set()
    domain: Optional[List[GroundTerm]] = None
    for h in _cq_matches(cq, abox):
        open_vars = [v for v in cq.free_vars if v not in h]
        if not open_vars:
            answers.add(tuple(_resolve(t, h) for t in cq.head))
            continue
        if domain is None:
            domain = abox.sorted_adom()
        for values in itertools.product(domain, repeat=len(open_vars)):
            full = dict(h)
            full.update(zip(open_vars, values))
            answers.add(tuple(_resolve(t, full) for t in cq.head))
    return frozenset(answers)


def evaluate_ucq(ucq: UCQ, abox: ABox) -> FrozenSet[tuple]:
    """UCQ를 ABox 위에서 그대로 평가 (TBox 없음)"""
    answers: FrozenSet[tuple] = frozenset()
    for cq in ucq.cqs:
        answers |= evaluate_cq(cq, abox)
    return answers


def holds(ucq: UCQ, abox: ABox) -> bool:
    """boolean UCQ의 참/거짓 (첫 매치에서 중단)"""
    for cq in ucq.cqs:
        for _ in _cq_matches(cq, abox):
            return True
    return False


def match_images(ucq: UCQ, abox: ABox) -> Iterator[FrozenSet[Assertion]]:
    """각 매치가 사용한 ABox assertion 집합"""
    for cq in ucq.cqs:
        for h in _cq_matches(cq, abox):
            yield frozenset(
                Assertion(a.predicate, tuple(_resolve(t, h) for t in a.args)) for a in cq.atoms
            )


# ============================================================
# PerfectRef 재작성
# ============================================================

def _occurrences(cq: CQ) -> Dict[Var, int]:
    counts: Dict[Var, int] = {}
    for a in cq.atoms:
        for t in a.args:
            if isinstance(t, Var):
                counts[t] = counts.get(t, 0) + 1
    return counts


def _is_unbound(term, cq: CQ, counts: Dict[Var, int]) -> bool:
    if not isinstance(term, Var) or term in cq.free_vars:
        return False
    if any(term in pair for pair in cq.inequalities):
        return False
    return counts.get(term, 0) == 1


def _fresh_var(cq: CQ) -> Var:
    used = {v.name for v in cq.variables}
    i = 0
    while f"_r{i}" in used:
        i += 1
    return Var(f"_r{i}")


def _eta(role: Role, first: QueryTerm, second: QueryTerm) -> Atom:
    """역할 R의 atom: P(x,y) 또는 P^-이면 P(y,x)"""
    if role.inverse:
        return Atom(role.name, (second, first))
    return Atom(role.name, (first, second))


def _gamma(concept: BasicConcept, term: QueryTerm, filler: Var) -> Atom:
    """기본 개념 B의 atom: N(x), P(x,_), P(_,x)"""
    if isinstance(concept, NamedConcept):
        return Atom(concept.name, (term,))
    return _eta(concept.role, term, filler)


def _apply_inclusion(inclusion: ConceptInclusion, atom: Atom, cq: CQ, counts) -> Optional[Atom]:
    rhs = inclusion.rhs
    if len(atom.args) == 1:
        if isinstance(rhs, NamedConcept) and rhs.name == atom.predicate:
            return _gamma(inclusion.lhs, atom.args[0], _fresh_var(cq))
        return None
    if not isinstance(rhs, ExistsRole) or rhs.role.name != atom.predicate:
        return None
    first, second = atom.args
    if not rhs.role.inverse and _is_unbound(second, cq, counts):
        return _gamma(inclusion.lhs, first, _fresh_var(cq))
    if rhs.role.inverse and _is_unbound(first, cq, counts):
        return _gamma(inclusion.lhs, second, _fresh_var(cq))
    return None


def _substitute(cq: CQ, subst: Mapping[Var, QueryTerm]) -> CQ:
    return CQ(
        tuple(_resolve(t, subst) for t in cq.head),
        tuple(Atom(a.predicate, tuple(_resolve(t, subst) for t in a.args)) for a in cq.atoms),
        tuple((_resolve(s, subst), _resolve(t, subst)) for s, t in cq.inequalities),
    )


def _unify(left: Atom, right: Atom, head_vars: FrozenSet[Var]) -> Optional[Dict[Var, QueryTerm]]:
    """두 atom의 mgu; 변수끼리는 head 변수를 대표로 유지"""
    if left.predicate != right.predicate or len(left.args) != len(right.args):
        return None
    subst: Dict[Var, QueryTerm] = {}

    def find(term):
        while isinstance(term, Var) and term in subst:
            term = subst[term]
        return term

    for s, t in zip(left.args, right.args):
        s, t = find(s), find(t)
        if s == t:
            continue
        if isinstance(s, Var) and isinstance(t, Var):
            if s in head_vars and t not in head_vars:
                subst[t] = s
            else:
                subst[s] = t
        elif isinstance(s, Var):
            subst[s] = t
        elif isinstance(t, Var):
            subst[t] = s
        else:
            return None
    return {v: find(v) for v in subst}


def _canonical(cq: CQ) -> CQ:
    """중복 atom 제거, 존재 변수를 _e0, _e1, ... 로 정규화"""
    heads = frozenset(cq.free_vars)

    def provisional(atom: Atom) -> tuple:
        return (atom.predicate, tuple(
            (2, "") if isinstance(t, Var) and t not in heads else term_key(t) for t in atom.args
        ))

    renaming: Dict[Var, Var] = {}
    for atom in sorted(set(cq.atoms), key=provisional):
        for t in atom.args:
            if isinstance(t, Var) and t not in heads and t not in renaming:
                renaming[t] = Var(f"_e{len(renaming)}")
    for pair in cq.inequalities:
        for t in pair:
            if isinstance(t, Var) and t not in heads and t not in renaming:
                renaming[t] = Var(f"_e{len(renaming)}")
    renamed = _substitute(cq, renaming)
    atoms = tuple(sorted(set(renamed.atoms), key=atom_key))
    inequalities = tuple(sorted(
        {tuple(sorted(pair, key=term_key)) for pair in renamed.inequalities},
        key=lambda p: (term_key(p[0]), term_key(p[1])),
    ))
    return CQ(renamed.head, atoms, inequalities)


def _cq_key(cq: CQ) -> tuple:
    return (
        len(cq.atoms),
        tuple(atom_key(a) for a in cq.atoms),
        tuple(term_key(t) for t in cq.head),
        tuple((term_key(s), term_key(t)) for s, t in cq.inequalities),
    )


def _rewrite_steps(cq: CQ, positives: Tuple[ConceptInclusion, ...]) -> Iterator[CQ]:
    counts = _occurrences(cq)
    for i, atom in enumerate(cq.atoms):
        for inclusion in positives:
            replacement = _apply_inclusion(inclusion, atom, cq, counts)
            if replacement is not None:
                atoms = cq.atoms[:i] + (replacement,) + cq.atoms[i + 1:]
                yield CQ(cq.head, atoms, cq.inequalities)
    head_vars = frozenset(cq.free_vars)
    for i, j in itertools.combinations(range(len(cq.atoms)), 2):
        mgu = _unify(cq.atoms[i], cq.atoms[j], head_vars)
        if mgu is not None:
            yield _substitute(cq, mgu)


@lru_cache(maxsize=4096)
def _perfect_ref(q: UCQ, positives: Tuple[ConceptInclusion, ...]) -> UCQ:
    seen: Dict[CQ, None] = {}
    frontier: List[CQ] = []
    for cq in q.cqs:
        c = _canonical(cq)
        if c not in seen:
            seen[c] = None
            frontier.append(c)
    while frontier:
        current = frontier.pop()
        for produced in _rewrite_steps(current, positives):
            c = _canonical(produced)
            if c not in seen:
                seen[c] = None
                frontier.append(c)
    logger.debug("rewrote %d CQs into %d", len(q.cqs), len(seen))
    return UCQ(q.free, tuple(sorted(seen, key=_cq_key)))


def rewrite_ucq(q: UCQ, positive_inclusions: Iterable[ConceptInclusion]) -> UCQ:
    """rew(q): T_p를 질의에 컴파일 (T_p가 비면 q 그대로)"""
    positives = tuple(sorted(set(positive_inclusions), key=str))
    if not positives:
        return q
    return _perfect_ref(q, positives)


def bind_ucq(q: UCQ, binding: Mapping[Var, GroundTerm]) -> UCQ:
    """free 변수 일부를 상수로 치환; 남은 free 변수만 유지"""
    positions = [i for i, v in enumerate(q.free) if v in binding]
    if not positions:
        return q
    keep = [i for i in range(len(q.free)) if i not in positions]
    cqs: List[CQ] = []
    for cq in q.cqs:
        subst: Dict[Var, QueryTerm] = {}
        consistent = True
        for i in positions:
            value = binding[q.free[i]]
            term = _resolve(cq.head[i], subst)
            if isinstance(term, Var):
                subst[term] = value
            elif term != value:
                consistent = False
                break
        if consistent:
            bound = _substitute(cq, subst)
            cqs.append(CQ(tuple(bound.head[i] for i in keep), bound.atoms, bound.inequalities))
    return UCQ(tuple(q.free[i] for i in keep), tuple(cqs))


AnswerFn = Callable[..., FrozenSet[tuple]]


def certain_answers(
    q: UCQ, tbox: TBox, abox: ABox, binding: Optional[Mapping[Var, GroundTerm]] = None
) -> FrozenSet[tuple]:
    """
    certain answers: rew(q, T_p)를 ABox 위에서 평가

    Returns:
        q.free(binding으로 묶인 변수 제외) 순서의 튜플 집합; boolean이면 {()} 또는 빈 집합
    """
    rewritten = rewrite_ucq(q, tbox.positive_inclusions)
    if binding:
        rewritten = bind_ucq(rewritten, binding)
    return evaluate_ucq(rewritten, abox)


def as_substitutions(q: UCQ, answers: Iterable[tuple]) -> List[Dict[Var, GroundTerm]]:
    return [dict(zip(q.free, row)) for row in sorted(answers, key=lambda r: [term_key(t) for t in r])]


# ============================================================
# ECQ (EQL-Lite(UCQ))
# ============================================================

@dataclass(frozen=True)
class EmbeddedUCQ:
    """[q]"""
    ucq: UCQ


@dataclass(frozen=True)
class ECQNot:
    body: "ECQ"


@dataclass(frozen=True)
class ECQAnd:
    left: "ECQ"
    right: "ECQ"


@dataclass(frozen=True)
class ECQExists:
    var: Var
    body: "ECQ"


ECQ = Union[EmbeddedUCQ, ECQNot, ECQAnd, ECQExists]

ECQ_TRUE = EmbeddedUCQ(TRUE_UCQ)
ECQ_FALSE = ECQNot(ECQ_TRUE)


def ecq_or(left: ECQ, right: ECQ) -> ECQ:
    return ECQNot(ECQAnd(ECQNot(left), ECQNot(right)))


def ecq_implies(left: ECQ, right: ECQ) -> ECQ:
    return ECQNot(ECQAnd(left, ECQNot(right)))


def ecq_forall(var: Var, body: ECQ) -> ECQ:
    return ECQNot(ECQExists(var, ECQNot(body)))


@lru_cache(maxsize=4096)
def ecq_free_vars(query: ECQ) -> FrozenSet[Var]:
    if isinstance(query, EmbeddedUCQ):
        return frozenset(query.ucq.free)
    if isinstance(query, ECQNot):
        return ecq_free_vars(query.body)
    if isinstance(query, ECQAnd):
        return ecq_free_vars(query.left) | ecq_free_vars(query.right)
    return ecq_free_vars(query.body) - {query.var}


def ecq_constants(query: ECQ) -> FrozenSet[Constant]:
    if isinstance(query, EmbeddedUCQ):
        return frozenset(
            t for cq in query.ucq.cqs for a in cq.atoms for t in a.args if isinstance(t, Constant)
        )
    if isinstance(query, ECQAnd):
        return ecq_constants(query.left) | ecq_constants(query.right)
    return ecq_constants(query.body)


def ecq_predicates(query: ECQ) -> Dict[str, int]:
    if isinstance(query, EmbeddedUCQ):
        return {a.predicate: len(a.args) for cq in query.ucq.cqs for a in cq.atoms}
    if isinstance(query, ECQAnd):
        return {**ecq_predicates(query.left), **ecq_predicates(query.right)}
    return ecq_predicates(query.body)


Relation = Tuple[Tuple[Var, ...], FrozenSet[tuple]]


def _reorder(variables: Tuple[Var, ...], rows: Iterable[tuple]) -> Relation:
    order = sorted(range(len(variables)), key=lambda i: variables[i].name)
    return (
        tuple(variables[i] for i in order),
        frozenset(tuple(row[i] for i in order) for row in rows),
    )


def _join(left: Relation, right: Relation) -> Relation:
    lvars, lrows = left
    rvars, rrows = right
    common = [v for v in lvars if v in rvars]
    extra = [v for v in rvars if v not in lvars]
    lidx = [lvars.index(v) for v in common]
    ridx = [rvars.index(v) for v in common]
    eidx = [rvars.index(v) for v in extra]
    index: Dict[tuple, List[tuple]] = {}
    for row in rrows:
        index.setdefault(tuple(row[i] for i in ridx), []).append(row)
    joined = []
    for row in lrows:
        for match in index.get(tuple(row[i] for i in lidx), ()):
            joined.append(row + tuple(match[i] for i in eidx))
    return _reorder(tuple(lvars) + tuple(extra), joined)


def _eval_ecq(
    query: ECQ, tbox: TBox, abox: ABox, env: Mapping[Var, GroundTerm],
    answer_fn: AnswerFn, domain: List[GroundTerm],
) -> Relation:
    if isinstance(query, EmbeddedUCQ):
        q = query.ucq
        local = {v: env[v] for v in q.free if v in env}
        rows = answer_fn(q, tbox, abox, local or None)
        return _reorder(tuple(v for v in q.free if v not in local), rows)
    if isinstance(query, ECQNot):
        variables, rows = _eval_ecq(query.body, tbox, abox, env, answer_fn, domain)
        everything = itertools.product(domain, repeat=len(variables))
        return variables, frozenset(r for r in everything if r not in rows)
    if isinstance(query, ECQAnd):
        left = _eval_ecq(query.left, tbox, abox, env, answer_fn, domain)
        if not left[1]:
            variables = set(left[0]) | (ecq_free_vars(query.right) - set(env))
            return tuple(sorted(variables, key=lambda v: v.name)), frozenset()
        right = _eval_ecq(query.right, tbox, abox, env, answer_fn, domain)
        return _join(left, right)
    # ECQExists: 바깥 바인딩은 가려짐
    inner_env = {v: d for v, d in env.items() if v != query.var}
    variables, rows = _eval_ecq(query.body, tbox, abox, inner_env, answer_fn, domain)
    if query.var not in variables:
        return variables, rows if domain else frozenset()
    idx = variables.index(query.var)
    return (
        variables[:idx] + variables[idx + 1:],
        frozenset(r[:idx] + r[idx + 1:] for r in rows),
    )


def ecq_answer_vars(query: ECQ, binding: Optional[Mapping[Var, GroundTerm]] = None) -> Tuple[Var, ...]:
    bound = set(binding or ())
    return tuple(sorted((v for v in ecq_free_vars(query) if v not in bound), key=lambda v: v.name))


def eval_ecq(
    query: ECQ, tbox: TBox, abox: ABox,
    binding: Optional[Mapping[Var, GroundTerm]] = None,
    answer_fn: Optional[AnswerFn] = None,
) -> FrozenSet[tuple]:
    """
    ECQ 평가 (active domain 의미론)

    Args:
        binding: 일부 free 변수의 값
        answer_fn: UCQ leaf 평가 함수 (기본 certain_answers, CQA는 repair.cqa_answers)

    Returns:
        ecq_answer_vars(query, binding) 순서의 튜플 집합; 닫힌 질의는 {()} (참) 또는 빈 집합 (거짓)
    """
    env = {v: d for v, d in (binding or {}).items() if v in ecq_free_vars(query)}
    variables, rows = _eval_ecq(
        query, tbox, abox, env, answer_fn or certain_answers, abox.sorted_adom()
    )
    return rows


def ecq_holds(
    query: ECQ, tbox: TBox, abox: ABox,
    binding: Optional[Mapping[Var, GroundTerm]] = None,
    answer_fn: Optional[AnswerFn] = None,
) -> bool:
    """binding 적용 후 닫힌 ECQ의 참/거짓"""
    return bool(eval_ecq(query, tbox, abox, binding, answer_fn))


# ============================================================
# 일관성 (FO 재작성)
# ============================================================

def unsat_query_funct(axiom: Functionality) -> UCQ:
    """q^f_unsat: ∃x,x1,x2. η(R,x,x1) ∧ η(R,x,x2) ∧ x1 ≠ x2 (재작성 없음)"""
    x, x1, x2 = Var("x"), Var("x1"), Var("x2")
    atoms = (_eta(axiom.role, x, x1), _eta(axiom.role, x, x2))
    return UCQ((), (CQ((), atoms, ((x1, x2),)),))


def unsat_query_neg(
    axiom: Union[ConceptInclusion, RoleDisjointness],
    positive_inclusions: Iterable[ConceptInclusion] = (),
) -> UCQ:
    """q^n_unsat: 부정 포함의 양쪽을 동시에 만족하는 개체 존재 여부를 T_p로 재작성"""
    if isinstance(axiom, ConceptInclusion):
        x = Var("x")
        atoms = (_gamma(axiom.lhs, x, Var("y1")), _gamma(axiom.rhs, x, Var("y2")))
    else:
        x1, x2 = Var("x1"), Var("x2")
        atoms = (_eta(axiom.lhs, x1, x2), _eta(axiom.rhs, x1, x2))
    return rewrite_ucq(UCQ((), (CQ((), atoms),)), positive_inclusions)


@lru_cache(maxsize=256)
def violation_queries(tbox: TBox) -> Tuple[Tuple[Axiom, UCQ], ...]:
    """레이블 순서의 (axiom, unsat query) 목록"""
    queries = []
    for axiom in tbox.labeled_axioms:
        if isinstance(axiom, Functionality):
            queries.append((axiom, unsat_query_funct(axiom)))
        else:
            queries.append((axiom, unsat_query_neg(axiom, tbox.positive_inclusions)))
    return tuple(queries)


def is_consistent(tbox: TBox, abox: ABox) -> bool:
    """어떤 unsat query도 ABox 위에서 참이 아니면 T-consistent"""
    return not any(holds(q, abox) for _, q in violation_queries(tbox))
