"""
전이 시스템 모듈
- 6가지 실행 의미론: standard, b, c, eb, ec, it
- equality commitment로 서비스 호출 결과를 유한 분기로 축약
- 정규 fresh 값 할당 ($v0, $v1, ...)으로 구조가 같은 상태를 합침
"""
import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple, Union

from .dllite import (
    ABox, Assertion, Constant, FRESH_PREFIX, GroundTerm, SkolemCall, STATE, TBox, TEMP, VIOL,
    is_consistent, term_key,
)
from .errors import InconsistentInitialAbox, LimitExceeded
from .kab import Action, KabSpec, ServiceCallMap, calls, do_effects, ground, legal_assignments
from .repair import answer_function, b_repairs, c_repair, viol
from .schema import BuildLimits

logger = logging.getLogger(__name__)


SEMANTICS = ("standard", "b", "c", "eb", "ec", "it")
REPAIR_SEMANTICS = frozenset({"b", "c", "eb", "ec"})

STATE_MARKER = Assertion(STATE, (TEMP,))


# ============================================================
# 상태/레이블
# ============================================================

@dataclass(frozen=True)
class TsState:
    """⟨A, m⟩"""
    abox: ABox
    call_map: ServiceCallMap

    @property
    def is_temp(self) -> bool:
        return STATE_MARKER in self.abox


@dataclass(frozen=True)
class ActionLabel:
    action: str
    args: Tuple[Constant, ...]
    commitment: str = ""

    def __str__(self) -> str:
        text = f"{self.action}({','.join(a.name for a in self.args)})"
        return f"{text} [{self.commitment}]" if self.commitment else text


@dataclass(frozen=True)
class RepairLabel:
    kind: str

    def __str__(self) -> str:
        return f"repair:{self.kind}"


Label = Union[ActionLabel, RepairLabel]


def run_domain(state: TsState) -> FrozenSet[GroundTerm]:
    """상태까지 누적된 값: adom(A) + im(m)"""
    return state.abox.adom() | frozenset(state.call_map.values())


# ============================================================
# Equality commitment
# ============================================================

@dataclass(frozen=True)
class EqualityCommitment:
    """
    새 호출들의 배치
    - cells: (anchor 상수 또는 None, 같은 값을 갖는 새 호출들)
    - anchor가 None인 셀은 fresh 값을 받음
    """
    cells: Tuple[Tuple[Optional[Constant], Tuple[SkolemCall, ...]], ...] = ()

    @property
    def new_calls(self) -> Tuple[SkolemCall, ...]:
        return tuple(c for _, block in self.cells for c in block)

    def digest(self) -> str:
        parts = []
        fresh = 0
        for anchor, block in self.cells:
            if anchor is None:
                target = f"new{fresh}"
                fresh += 1
            else:
                target = anchor.name
            parts.append("~".join([str(c) for c in block] + [target]))
        return "; ".join(parts)

    def partition(self, universe: Sequence[Union[Constant, SkolemCall]],
                  call_map: ServiceCallMap) -> List[FrozenSet]:
        """universe(상수 + 호출) 위의 전체 분할"""
        cells: Dict[object, Set] = {}
        for term in universe:
            if isinstance(term, Constant):
                key = term
            elif term in call_map:
                key = call_map[term]
            else:
                key = next(
                    (anchor if anchor is not None else ("fresh", i))
                    for i, (anchor, block) in enumerate(self.cells) if term in block
                )
            cells.setdefault(key, set()).add(term)
        return [frozenset(c) for c in cells.values()]


def _set_partitions(items: Sequence[SkolemCall]) -> Iterator[List[List[SkolemCall]]]:
    """restricted growth string 순서의 집합 분할"""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partial in _set_partitions(rest):
        yield [[first]] + partial
        for i in range(len(partial)):
            yield partial[:i] + [[first] + partial[i]] + partial[i + 1:]


def _anchor_choices(
    blocks: List[List[SkolemCall]], anchors: Sequence[Constant], used: FrozenSet[Constant]
) -> Iterator[List[Optional[Constant]]]:
    if not blocks:
        yield []
        return
    for anchor in list(anchors) + [None]:
        if anchor is not None and anchor in used:
            continue
        rest_used = used | {anchor} if anchor is not None else used
        for tail in _anchor_choices(blocks[1:], anchors, rest_used):
            yield [anchor] + tail


def enumerate_commitments(
    new_calls: Sequence[SkolemCall], anchors: Sequence[Constant]
) -> List[EqualityCommitment]:
    """
    새 호출의 모든 배치 (셀마다 상수 최대 1개)

    Args:
        new_calls: m에 없는 호출
        anchors: 기존 상수 (Δ0, adom(A), im(m), do 결과의 상수)
    """
    new_calls = sorted(set(new_calls), key=term_key)
    anchors = sorted(set(anchors), key=term_key)
    result = []
    for blocks in _set_partitions(new_calls):
        blocks = sorted((sorted(b, key=term_key) for b in blocks), key=lambda b: term_key(b[0]))
        for choice in _anchor_choices(blocks, anchors, frozenset()):
            result.append(EqualityCommitment(
                tuple((anchor, tuple(block)) for anchor, block in zip(choice, blocks))
            ))
    return result


def _anchors(spec: KabSpec, state: TsState, facts: FrozenSet[Assertion]) -> FrozenSet[Constant]:
    found = set(spec.delta0)
    found.update(t for t in state.abox.adom() if isinstance(t, Constant))
    found.update(state.call_map.values())
    for a in facts:
        for t in a.args:
            if isinstance(t, Constant):
                found.add(t)
            else:
                found.update(t.args)
    return frozenset(found)


def equality_commitments(
    spec: KabSpec, state: TsState, action: Action, values: Tuple[Constant, ...],
    query_mode: str = "certain",
) -> List[EqualityCommitment]:
    """ασ를 state에서 실행할 때의 정규 순서 commitment 목록 (새 호출이 없으면 1개)"""
    facts = do_effects(spec.tbox, state.abox, action, values, answer_function(query_mode))
    return _commitments_for(spec, state, facts)


def _commitments_for(spec: KabSpec, state: TsState, facts: FrozenSet[Assertion]) -> List[EqualityCommitment]:
    new_calls = [c for c in calls(facts) if c not in state.call_map]
    return enumerate_commitments(new_calls, _anchors(spec, state, facts))


# ============================================================
# Fresh 값 할당
# ============================================================

@dataclass(frozen=True)
class FreshValueSource:
    """
    상태 내용만으로 정해지는 fresh 값 할당
    - start부터 사용되지 않은 가장 작은 인덱스
    - reverse=True면 셀 순서를 뒤집어 배정 (다른 유효한 대표 선택)
    """
    prefix: str = FRESH_PREFIX
    start: int = 0
    reverse: bool = False

    def mint(self, count: int, used: FrozenSet[Constant]) -> List[Constant]:
        minted: List[Constant] = []
        index = self.start
        while len(minted) < count:
            candidate = Constant(f"{self.prefix}{index}")
            if candidate not in used:
                minted.append(candidate)
            index += 1
        return minted[::-1] if self.reverse else minted


DEFAULT_FRESH = FreshValueSource()


def canonical_theta(
    commitment: EqualityCommitment, state: TsState, spec: KabSpec,
    fresh: FreshValueSource = DEFAULT_FRESH,
) -> Dict[SkolemCall, Constant]:
    """commitment를 존중하는 유일한 대표 θ (새 호출에 대해서만)"""
    used = set(spec.delta0)
    used.update(t for t in state.abox.adom() if isinstance(t, Constant))
    used.update(state.call_map.values())
    used.update(state.call_map.argument_constants())
    fresh_cells = [block for anchor, block in commitment.cells if anchor is None]
    names = iter(fresh.mint(len(fresh_cells), frozenset(used)))
    theta: Dict[SkolemCall, Constant] = {}
    for anchor, block in commitment.cells:
        value = anchor if anchor is not None else next(names)
        for call in block:
            theta[call] = value
    return theta


# ============================================================
# 후속 상태
# ============================================================

def action_successors(
    state: TsState, spec: KabSpec, semantics: str, fresh: FreshValueSource = DEFAULT_FRESH,
) -> List[Tuple[ActionLabel, TsState]]:
    """
    액션 단계: (α, σ, H)마다 후속 상태 하나
    - standard: T-inconsistent 결과 제거
    - it: CQA로 평가, 모순 결과 유지
    - b/c/eb/ec: State(temp) 표시 후 유지
    """
    query_mode = "cqa" if semantics == "it" else "certain"
    answer_fn = answer_function(query_mode)
    successors = []
    for action, values in legal_assignments(state.abox, spec, query_mode):
        facts = do_effects(spec.tbox, state.abox, action, values, answer_fn)
        for commitment in _commitments_for(spec, state, facts):
            theta_new = canonical_theta(commitment, state, spec, fresh)
            theta = {c: state.call_map[c] for c in calls(facts) if c in state.call_map}
            theta.update(theta_new)
            abox = ground(facts, theta)
            if semantics == "standard" and not is_consistent(spec.tbox, abox):
                continue
            if semantics in REPAIR_SEMANTICS:
                abox = abox.union([STATE_MARKER])
            label = ActionLabel(action.name, values, commitment.digest())
            successors.append((label, TsState(abox, state.call_map.extend(theta_new))))
    return successors


def repair_successors(state: TsState, spec: KabSpec, semantics: str) -> List[Tuple[RepairLabel, TsState]]:
    """repair 단계: State(temp)를 제거한 ABox의 b/c-repair (eb/ec는 Viol 장식)"""
    pre = state.abox.difference([STATE_MARKER])
    if semantics in ("b", "eb"):
        repairs = b_repairs(pre, spec.tbox)
    else:
        repairs = (c_repair(pre, spec.tbox),)
    decoration: List[Assertion] = []
    if semantics in ("eb", "ec"):
        decoration = [Assertion(VIOL, (label,)) for label in sorted(viol(pre, spec.tbox), key=term_key)]
    label = RepairLabel(semantics)
    return [(label, TsState(r.union(decoration), state.call_map)) for r in repairs]


# ============================================================
# 전이 시스템
# ============================================================

@dataclass(frozen=True)
class TransitionSystem:
    """BFS 발견 순서로 id가 붙은 유한 전이 시스템 (초기 상태 id 0)"""
    semantics: str
    spec: KabSpec
    states: Tuple[TsState, ...]
    edges: Tuple[Tuple[int, Label, int], ...]
    limits: BuildLimits
    initial: int = 0

    @property
    def tbox(self) -> TBox:
        return self.spec.tbox

    @property
    def delta0(self) -> FrozenSet[Constant]:
        return self.spec.delta0

    def abox(self, sid: int) -> ABox:
        return self.states[sid].abox

    @cached_property
    def successor_table(self) -> Tuple[FrozenSet[int], ...]:
        table: List[Set[int]] = [set() for _ in self.states]
        for src, _, dst in self.edges:
            table[src].add(dst)
        return tuple(frozenset(s) for s in table)

    def successors(self, sid: int) -> FrozenSet[int]:
        return self.successor_table[sid]

    @cached_property
    def active_domain(self) -> FrozenSet[GroundTerm]:
        domain = set()
        for state in self.states:
            domain.update(state.abox.adom())
        return frozenset(domain)

    def find_state(self, abox: ABox) -> List[int]:
        return [i for i, s in enumerate(self.states) if s.abox == abox]

    def summary(self) -> Dict[str, int]:
        return {
            "states": len(self.states),
            "edges": len(self.edges),
            "temp_states": sum(1 for s in self.states if s.is_temp),
        }


def build_ts(
    spec: KabSpec, semantics: str = "standard", limits: Optional[BuildLimits] = None,
    fresh: FreshValueSource = DEFAULT_FRESH,
) -> TransitionSystem:
    """
    BFS 최소 고정점 빌드 (구조적 동일 상태는 한 id)

    Raises:
        InconsistentInitialAbox: A0가 T-inconsistent
        LimitExceeded: BuildLimits 한계 도달
    """
    if semantics not in SEMANTICS:
        raise ValueError(f"unknown semantics: {semantics}")
    limits = limits or BuildLimits()
    if not is_consistent(spec.tbox, spec.a0):
        raise InconsistentInitialAbox("initial ABox is inconsistent with the TBox")

    initial = TsState(spec.a0, ServiceCallMap())
    registry: Dict[TsState, int] = {initial: 0}
    states: List[TsState] = [initial]
    depth: List[int] = [0]
    edges: List[Tuple[int, Label, int]] = []
    edge_set: Set[Tuple[int, Label, int]] = set()
    queue = deque([0])

    while queue:
        sid = queue.popleft()
        state = states[sid]
        if state.is_temp:
            successors = repair_successors(state, spec, semantics)
        else:
            successors = action_successors(state, spec, semantics, fresh)
        for label, target in successors:
            tid = registry.get(target)
            if tid is None:
                _check_limits(limits, len(states), depth[sid] + 1, target)
                tid = len(states)
                registry[target] = tid
                states.append(target)
                depth.append(depth[sid] + 1)
                queue.append(tid)
            edge = (sid, label, tid)
            if edge not in edge_set:
                edge_set.add(edge)
                edges.append(edge)

    logger.info("built %s system: %d states, %d edges", semantics, len(states), len(edges))
    return TransitionSystem(semantics, spec, tuple(states), tuple(edges), limits)


def _check_limits(limits: BuildLimits, count: int, depth: int, target: TsState) -> None:
    if limits.max_states is not None and count >= limits.max_states:
        logger.warning("state limit %d reached", limits.max_states)
        raise LimitExceeded("max_states", limits.max_states)
    if limits.max_depth is not None and depth > limits.max_depth:
        raise LimitExceeded("max_depth", limits.max_depth)
    if limits.max_run_domain is not None and len(run_domain(target)) > limits.max_run_domain:
        raise LimitExceeded("max_run_domain", limits.max_run_domain)
