"""
오라클 모듈 (테스트 전용 참조 구현)
- restrained chase 기반 certain answer / 일관성
- 부분집합 열거 b-repair
- 가지치기 없는 유한 도메인 전이 시스템
- history-preserving bisimulation, dominance 검사

재작성/충돌 그래프/commitment 경로와 코드를 공유하지 않는다.
"""
import itertools
import logging
from collections import deque
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Set, Tuple

from .dllite import (
    ABox, Assertion, ConceptInclusion, Constant, CQ, Functionality, GroundTerm, NamedConcept,
    Role, RoleDisjointness, TBox, UCQ, VIOL, Var, is_consistent,
)
from .errors import DepthInsufficient, LimitExceeded, TooLarge
from .kab import KabSpec, ServiceCallMap, calls, do_effects, ground, legal_assignments
from .repair import answer_function, b_repairs, c_repair, viol
from .schema import BuildLimits, ChaseConfig
from .ts import (
    REPAIR_SEMANTICS, STATE_MARKER, ActionLabel, RepairLabel, TransitionSystem, TsState,
)

logger = logging.getLogger(__name__)

MAX_REPAIR_INPUT = 16
MAX_BISIMULATION_STATES = 200
MAX_TRIPLES = 200000


# ============================================================
# Restrained chase
# ============================================================

Fact = Tuple[str, Tuple[GroundTerm, ...]]


def _members(concept, facts: Set[Fact]) -> Set[GroundTerm]:
    if isinstance(concept, NamedConcept):
        return {args[0] for pred, args in facts if pred == concept.name and len(args) == 1}
    role = concept.role
    index = 1 if role.inverse else 0
    return {args[index] for pred, args in facts if pred == role.name and len(args) == 2}


def _pairs(role: Role, facts: Set[Fact]) -> Set[Tuple[GroundTerm, GroundTerm]]:
    pairs = {args for pred, args in facts if pred == role.name and len(args) == 2}
    if role.inverse:
        return {(b, a) for a, b in pairs}
    return pairs


def chase(tbox: TBox, abox: ABox, cfg: Optional[ChaseConfig] = None) -> Set[Fact]:
    """
    T_p로 ABox를 실체화 (∃ 단계는 후속자가 없을 때만)

    Raises:
        DepthInsufficient: strict 모드에서 max_depth에 적용 가능한 단계가 남음
    """
    cfg = cfg or ChaseConfig()
    positives = [a for a in tbox.axioms if isinstance(a, ConceptInclusion) and not a.negated]
    bound = cfg.max_depth if cfg.max_depth is not None else 2 * len(positives) + 2
    facts: Set[Fact] = {(a.predicate, a.args) for a in abox.facts}
    depth: Dict[GroundTerm, int] = {t: 0 for a in abox.facts for t in a.args}
    counter = itertools.count()

    changed = True
    while changed:
        changed = False
        for inclusion in positives:
            for individual in sorted(_members(inclusion.lhs, facts), key=str):
                rhs = inclusion.rhs
                if isinstance(rhs, NamedConcept):
                    fact_ = (rhs.name, (individual,))
                    if fact_ not in facts:
                        facts.add(fact_)
                        changed = True
                    continue
                if individual in _members(rhs, facts):
                    continue
                if depth[individual] >= bound:
                    if cfg.strict:
                        raise DepthInsufficient(f"chase needs more than {bound} levels")
                    continue
                null = Constant(f"{cfg.null_prefix}{next(counter)}")
                depth[null] = depth[individual] + 1
                args = (null, individual) if rhs.role.inverse else (individual, null)
                facts.add((rhs.role.name, args))
                changed = True
    return facts


def _cq_answers(cq: CQ, facts: Set[Fact], named: List[GroundTerm]) -> Set[tuple]:
    """중첩 루프 조인; head 값은 named 개체로 제한"""
    bindings: List[Dict[Var, GroundTerm]] = [{}]
    for atom in cq.atoms:
        extended = []
        for binding in bindings:
            for pred, args in facts:
                if pred != atom.predicate or len(args) != len(atom.args):
                    continue
                candidate = dict(binding)
                ok = True
                for term, value in zip(atom.args, args):
                    if isinstance(term, Var):
                        if candidate.setdefault(term, value) != value:
                            ok = False
                            break
                    elif term != value:
                        ok = False
                        break
                if ok:
                    extended.append(candidate)
        bindings = extended
    answers = set()
    allowed = set(named)
    for binding in bindings:
        if any(binding.get(s, s) == binding.get(t, t) for s, t in cq.inequalities):
            continue
        open_vars = [t for t in dict.fromkeys(cq.head) if isinstance(t, Var) and t not in binding]
        for values in itertools.product(named, repeat=len(open_vars)):
            full = dict(binding)
            full.update(zip(open_vars, values))
            row = tuple(full.get(t, t) for t in cq.head)
            if all(v in allowed for v in row):
                answers.add(row)
    return answers


def oracle_certain_answers(
    q: UCQ, tbox: TBox, abox: ABox, cfg: Optional[ChaseConfig] = None
) -> FrozenSet[tuple]:
    """chase 후 준동형 평가 (답은 adom(A)로 제한)"""
    facts = chase(tbox, abox, cfg)
    named = sorted(abox.adom(), key=str)
    answers: Set[tuple] = set()
    for cq in q.cqs:
        answers |= _cq_answers(cq, facts, named)
    return frozenset(answers)


def oracle_consistency(tbox: TBox, abox: ABox, cfg: Optional[ChaseConfig] = None) -> bool:
    """chase 위에서 부정 포함/함수성을 직접 확인"""
    facts = chase(tbox, abox, cfg)
    for axiom in tbox.axioms:
        if isinstance(axiom, ConceptInclusion) and axiom.negated:
            if _members(axiom.lhs, facts) & _members(axiom.rhs, facts):
                return False
        elif isinstance(axiom, RoleDisjointness):
            if _pairs(axiom.lhs, facts) & _pairs(axiom.rhs, facts):
                return False
        elif isinstance(axiom, Functionality):
            fillers: Dict[GroundTerm, GroundTerm] = {}
            for subject, filler in _pairs(axiom.role, facts):
                if fillers.setdefault(subject, filler) != filler:
                    return False
    return True


# ============================================================
# 부분집합 열거 repair
# ============================================================

def oracle_b_repairs(abox: ABox, tbox: TBox, cfg: Optional[ChaseConfig] = None) -> FrozenSet[ABox]:
    """모든 부분집합 중 일관된 극대 집합"""
    if len(abox) > MAX_REPAIR_INPUT:
        raise TooLarge(f"subset enumeration is limited to {MAX_REPAIR_INPUT} assertions")
    cfg = cfg or ChaseConfig(strict=False)
    facts = abox.assertions
    consistent = [
        frozenset(subset)
        for size in range(len(facts) + 1)
        for subset in itertools.combinations(facts, size)
        if oracle_consistency(tbox, ABox(subset), cfg)
    ]
    maximal = [s for s in consistent if not any(s < other for other in consistent)]
    return frozenset(ABox(s) for s in maximal)


# ============================================================
# 가지치기 없는 전이 시스템
# ============================================================

def oracle_domain(spec: KabSpec, spare: int = 2) -> List[Constant]:
    """Δ0 ∪ adom(A0) ∪ 여분 값 spare개"""
    base = sorted(spec.delta0, key=lambda c: c.name)
    return base + [Constant(f"d{i}") for i in range(spare)]


def _full_action_successors(state: TsState, spec: KabSpec, semantics: str, domain: List[Constant]):
    query_mode = "cqa" if semantics == "it" else "certain"
    for action, values in legal_assignments(state.abox, spec, query_mode):
        facts = do_effects(spec.tbox, state.abox, action, values, answer_function(query_mode))
        new = sorted((c for c in calls(facts) if c not in state.call_map), key=str)
        for choice in itertools.product(domain, repeat=len(new)):
            theta_new = dict(zip(new, choice))
            theta = {c: state.call_map[c] for c in calls(facts) if c in state.call_map}
            theta.update(theta_new)
            abox = ground(facts, theta)
            if semantics == "standard" and not is_consistent(spec.tbox, abox):
                continue
            if semantics in REPAIR_SEMANTICS:
                abox = abox.union([STATE_MARKER])
            digest = "; ".join(f"{c}={v}" for c, v in theta_new.items())
            yield ActionLabel(action.name, values, digest), TsState(abox, state.call_map.extend(theta_new))


def _full_repair_successors(state: TsState, spec: KabSpec, semantics: str):
    pre = state.abox.difference([STATE_MARKER])
    repairs = b_repairs(pre, spec.tbox) if semantics in ("b", "eb") else (c_repair(pre, spec.tbox),)
    extra = []
    if semantics in ("eb", "ec"):
        extra = [Assertion(VIOL, (d,)) for d in viol(pre, spec.tbox)]
    for repair in repairs:
        yield RepairLabel(semantics), TsState(repair.union(extra), state.call_map)


def oracle_full_ts(
    spec: KabSpec, semantics: str, domain: Iterable[Constant], limits: Optional[BuildLimits] = None
) -> TransitionSystem:
    """θ가 domain 전체를 도는 문자 그대로의 구성"""
    domain = sorted(set(domain), key=lambda c: c.name)
    missing = spec.delta0 - set(domain)
    if missing:
        raise ValueError(f"domain must contain Δ0; missing {sorted(c.name for c in missing)}")
    limits = limits or BuildLimits()
    initial = TsState(spec.a0, ServiceCallMap())
    index: Dict[TsState, int] = {initial: 0}
    states = [initial]
    edges = []
    queue = deque([0])
    while queue:
        sid = queue.popleft()
        state = states[sid]
        if state.is_temp:
            successors = _full_repair_successors(state, spec, semantics)
        else:
            successors = _full_action_successors(state, spec, semantics, domain)
        for label, target in successors:
            if target not in index:
                if limits.max_states is not None and len(states) >= limits.max_states:
                    raise LimitExceeded("max_states", limits.max_states)
                index[target] = len(states)
                states.append(target)
                queue.append(index[target])
            edges.append((sid, label, index[target]))
    return TransitionSystem(semantics, spec, tuple(states), tuple(dict.fromkeys(edges)), limits)


# ============================================================
# History-preserving bisimulation
# ============================================================

Pairing = FrozenSet[Tuple[GroundTerm, GroundTerm]]


def _extensions(
    source: ABox, target: ABox, h: Mapping[GroundTerm, GroundTerm]
) -> Iterator[Dict[GroundTerm, GroundTerm]]:
    """h를 확장해 adom(source)->adom(target) 전단사이고 h(source) = target인 모든 h'"""
    src_dom, dst_dom = source.adom(), target.adom()
    if len(src_dom) != len(dst_dom):
        return
    inverse = {v: k for k, v in h.items()}
    for value in src_dom:
        if value in h and h[value] not in dst_dom:
            return
    for value in dst_dom:
        if value in inverse and inverse[value] not in src_dom:
            return
    unmapped = sorted((v for v in src_dom if v not in h), key=str)
    free = sorted((v for v in dst_dom if v not in inverse), key=str)
    if len(unmapped) != len(free):
        return
    target_facts = target.facts
    for image in itertools.permutations(free):
        extended = dict(h)
        extended.update(zip(unmapped, image))
        if source.rename(extended).facts == target_facts:
            yield extended


def check_bisimilar(
    ts1: TransitionSystem, ts2: TransitionSystem,
    max_states: int = MAX_BISIMULATION_STATES, max_triples: int = MAX_TRIPLES,
) -> bool:
    """
    (s1, h, s2) 삼중쌍 위의 최대 고정점
    - h는 Δ0를 고정하는 부분 전단사, 전이마다 확장만 가능
    """
    if len(ts1.states) > max_states or len(ts2.states) > max_states:
        raise TooLarge(f"bisimulation check is limited to {max_states} states per system")
    fixed = {c: c for c in ts1.delta0 | ts2.delta0}
    Triple = Tuple[int, Pairing, int]

    def freeze(h: Dict) -> Pairing:
        return frozenset(h.items())

    initial = [(0, freeze(h), 0) for h in _extensions(ts1.abox(0), ts2.abox(0), fixed)]
    forth: Dict[Triple, Dict[int, Set[Triple]]] = {}
    back: Dict[Triple, Dict[int, Set[Triple]]] = {}
    queue = deque(initial)
    seen: Set[Triple] = set(initial)
    while queue:
        triple = queue.popleft()
        s1, pairing, s2 = triple
        h = dict(pairing)
        forth[triple] = {t: set() for t in ts1.successors(s1)}
        back[triple] = {t: set() for t in ts2.successors(s2)}
        for t1 in ts1.successors(s1):
            for t2 in ts2.successors(s2):
                for extended in _extensions(ts1.abox(t1), ts2.abox(t2), h):
                    child = (t1, freeze(extended), t2)
                    forth[triple][t1].add(child)
                    back[triple][t2].add(child)
                    if child not in seen:
                        seen.add(child)
                        queue.append(child)
                        if len(seen) > max_triples:
                            raise TooLarge(f"more than {max_triples} candidate triples")

    alive = set(seen)
    changed = True
    while changed:
        changed = False
        for triple in list(alive):
            ok = all(children & alive for children in forth[triple].values()) and \
                all(children & alive for children in back[triple].values())
            if not ok:
                alive.discard(triple)
                changed = True
    logger.debug("bisimulation: %d candidate triples, %d alive", len(seen), len(alive))
    return any(t in alive for t in initial)


# ============================================================
# Dominance
# ============================================================

def _macro_steps(ts: TransitionSystem, sid: int) -> List[Tuple[List[ABox], int]]:
    """액션 한 번 (+ repair)으로 가는 (확인할 ABox들, 도착 상태)"""
    steps = []
    for target in sorted(ts.successors(sid)):
        state = ts.states[target]
        if state.is_temp:
            pre = state.abox.difference([STATE_MARKER])
            for repaired in sorted(ts.successors(target)):
                steps.append(([pre, ts.abox(repaired)], repaired))
        else:
            steps.append(([state.abox], target))
    return steps


def _containments(
    sources: List[ABox], target: ABox, h: Mapping[GroundTerm, GroundTerm]
) -> Iterator[Dict[GroundTerm, GroundTerm]]:
    """h를 단사로 확장해 h(source) ⊆ target"""
    values = sorted({v for s in sources for v in s.adom() if v not in h}, key=str)
    used = set(h.values())
    candidates = sorted((v for v in target.adom() if v not in used), key=str)
    for image in itertools.permutations(candidates, len(values)):
        extended = dict(h)
        extended.update(zip(values, image))
        if all(s.rename(extended).facts <= target.facts for s in sources):
            yield extended


def check_dominated(ts: TransitionSystem, dominant: TransitionSystem, max_steps: int = 3) -> bool:
    """
    ts의 액션 단계 max_steps 이하 모든 run에 대해 dominant에 같은 길이의 run이 있고
    값 대응 h 아래 상태별로 ABox가 포함되는지 (State(temp) 제외)
    """
    base = {c: c for c in ts.delta0}
    initial = frozenset(
        (0, frozenset(h.items())) for h in _containments([ts.abox(0)], dominant.abox(0), base)
    )
    memo: Dict[Tuple[int, FrozenSet, int], bool] = {}

    def explore(sid: int, configs: FrozenSet, remaining: int) -> bool:
        if not configs:
            return False
        if remaining == 0:
            return True
        key = (sid, configs, remaining)
        if key in memo:
            return memo[key]
        result = True
        for checked, target in _macro_steps(ts, sid):
            following = frozenset(
                (d2, frozenset(h2.items()))
                for d, pairing in configs
                for d2 in dominant.successors(d)
                for h2 in _containments(checked, dominant.abox(d2), dict(pairing))
            )
            if not explore(target, following, remaining - 1):
                result = False
                break
        memo[key] = result
        return result

    return explore(0, initial, max_steps)
