"""
분석 모듈
- 의존 그래프 및 weak acyclicity 판정 (SCC 기반)
- consistent approximant K^p, positive dominant K^+ 구성
"""
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Optional, Set, Tuple

import networkx as nx

from .dllite import (
    ECQ, ECQ_TRUE, Assertion, Atom, ConceptInclusion, ECQAnd, ECQNot, EmbeddedUCQ, VIOL, Var,
    atom_query, rewrite_ucq,
)
from .errors import KabSemanticError
from .kab import (
    Action, AssertionTemplate, EffectSpec, KabSpec, ProcessRule, SkolemTemplate, template_vars,
)

logger = logging.getLogger(__name__)

Node = Tuple[str, int]
Edge = Tuple[Node, Node]

DOMINANT_SUFFIX = "_plus"


# ============================================================
# 의존 그래프
# ============================================================

@dataclass(frozen=True)
class DependencyGraph:
    """노드 (술어, 위치), 일반 간선과 special 간선(값 생성)"""
    nodes: FrozenSet[Node] = frozenset()
    ordinary_edges: FrozenSet[Edge] = frozenset()
    special_edges: FrozenSet[Edge] = frozenset()

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self.nodes)
        graph.add_edges_from(self.ordinary_edges, special=False)
        for src, dst in self.special_edges:
            graph.add_edge(src, dst, special=True)
        return graph

    def masked(self, predicates: Iterable[str]) -> "DependencyGraph":
        """주어진 술어의 노드와 관련 간선 제거"""
        hidden = set(predicates)
        keep = lambda node: node[0] not in hidden
        return DependencyGraph(
            frozenset(n for n in self.nodes if keep(n)),
            frozenset(e for e in self.ordinary_edges if keep(e[0]) and keep(e[1])),
            frozenset(e for e in self.special_edges if keep(e[0]) and keep(e[1])),
        )


def _position_sources(effect: EffectSpec, spec: KabSpec) -> Dict[Var, Set[Node]]:
    """rew(q+)에서 각 변수가 나타나는 (술어, 위치)"""
    sources: Dict[Var, Set[Node]] = {}
    rewritten = rewrite_ucq(effect.qplus, spec.tbox.positive_inclusions)
    for cq in rewritten.cqs:
        for atom in cq.atoms:
            for position, term in enumerate(atom.args, start=1):
                if isinstance(term, Var):
                    sources.setdefault(term, set()).add((atom.predicate, position))
    return sources


def _guard_positions(
    query: ECQ, var: Var, positives: Tuple[ConceptInclusion, ...], positive: bool = True,
) -> Optional[Set[Node]]:
    """
    query를 만족하는 모든 답에서 var 값이 놓이는 (술어, 위치)의 상위 집합
    - 보장할 수 없으면 (부정 아래, 한정자에 가려짐, active domain 전체) None
    """
    if isinstance(query, EmbeddedUCQ):
        if not positive or var not in query.ucq.free:
            return None
        index = query.ucq.free.index(var)
        found: Set[Node] = set()
        for cq in rewrite_ucq(query.ucq, positives).cqs:
            term = cq.head[index]
            if not isinstance(term, Var):
                continue
            hits = {
                (atom.predicate, position)
                for atom in cq.atoms
                for position, arg in enumerate(atom.args, start=1)
                if arg == term
            }
            if not hits:
                return None
            found |= hits
        return found
    if isinstance(query, ECQNot):
        return _guard_positions(query.body, var, positives, not positive)
    if isinstance(query, ECQAnd):
        left = _guard_positions(query.left, var, positives, positive)
        right = _guard_positions(query.right, var, positives, positive)
        if positive:
            if left is None and right is None:
                return None
            return (left or set()) | (right or set())
        # 부정된 논리곱 = 논리합: 양쪽 모두 보장해야 함
        if left is None or right is None:
            return None
        return left | right
    if query.var == var:
        return None
    return _guard_positions(query.body, var, positives, positive)


def _parameter_sources(spec: KabSpec, nodes: FrozenSet[Node]) -> Dict[Tuple[str, Var], Set[Node]]:
    """파라미터별 출처: 그 파라미터를 바인딩하는 프로세스 규칙 조건의 rew() 위치"""
    positives = spec.tbox.positive_inclusions
    sources: Dict[Tuple[str, Var], Set[Node]] = {}
    for rule in spec.process:
        action = spec.action(rule.action)
        for argument, param in zip(rule.arguments, action.params):
            guarded = _guard_positions(rule.condition, argument, positives)
            sources.setdefault((action.name, param), set()).update(nodes if guarded is None else guarded)
    return sources


def dependency_graph(spec: KabSpec) -> DependencyGraph:
    """
    의존 그래프
    - N1(x) in rew(q+), N2(x) in head -> 일반 간선
    - N1(x) in rew(q+), N2(f(..x..)) in head -> special 간선
    - q+에 없는 파라미터는 바인딩하는 규칙 조건의 위치를 출처로 사용
    """
    nodes = frozenset(
        (predicate, position)
        for predicate, arity in spec.predicates().items()
        for position in range(1, arity + 1)
    )
    parameter_sources = _parameter_sources(spec, nodes)
    ordinary: Set[Edge] = set()
    special: Set[Edge] = set()
    for action in spec.actions:
        for effect in action.effects:
            sources = _position_sources(effect, spec)
            for param in action.params:
                if param not in sources:
                    sources[param] = parameter_sources.get((action.name, param), set())
            for template in effect.head:
                for position, arg in enumerate(template.args, start=1):
                    target = (template.predicate, position)
                    if isinstance(arg, Var):
                        ordinary.update((src, target) for src in sources.get(arg, ()))
                    elif isinstance(arg, SkolemTemplate):
                        for inner in arg.args:
                            if isinstance(inner, Var):
                                special.update((src, target) for src in sources.get(inner, ()))
    return DependencyGraph(nodes, frozenset(ordinary), frozenset(special))


def is_weakly_acyclic(graph: DependencyGraph) -> bool:
    """special 간선을 포함하는 강연결요소가 없으면 True"""
    component_of: Dict[Node, int] = {}
    for i, component in enumerate(nx.strongly_connected_components(graph.to_networkx())):
        for node in component:
            component_of[node] = i
    for src, dst in graph.special_edges:
        if component_of[src] == component_of[dst]:
            logger.info("special edge %s -> %s lies on a cycle", src, dst)
            return False
    return True


def compare_graphs(first: DependencyGraph, second: DependencyGraph, mask: Iterable[str] = (VIOL,)) -> bool:
    """mask 술어를 제외한 간선 집합 비교"""
    mask = tuple(mask)
    a, b = first.masked(mask), second.masked(mask)
    return a.ordinary_edges == b.ordinary_edges and a.special_edges == b.special_edges


# ============================================================
# K^p / K^+
# ============================================================

def _copy_violations_effect(action: Action, constants: Iterable[str]) -> EffectSpec:
    """e_v = [Viol(x)] ~> {Viol(x)} (파라미터, Δ0와 겹치지 않는 변수명)"""
    taken = {p.name for p in action.params} | set(constants)
    name, i = "x", 0
    while name in taken:
        i += 1
        name = f"x{i}"
    x = Var(name)
    return EffectSpec(atom_query(Atom(VIOL, (x,))), (AssertionTemplate(VIOL, (x,)),))


def consistent_approximant(spec: KabSpec) -> KabSpec:
    """
    K^p
    - TBox를 T_p로 축소
    - A0에 모든 레이블의 Viol 추가
    - 모든 액션에 e_v 추가, 프로세스 그대로
    """
    labels = sorted(spec.tbox.label_constants, key=lambda c: c.name)
    a0 = spec.a0.union(Assertion(VIOL, (label,)) for label in labels)
    names = {c.name for c in spec.delta0}
    actions = tuple(
        Action(a.name, a.params, a.effects + (_copy_violations_effect(a, names),))
        for a in spec.actions
    )
    return KabSpec(
        spec.tbox.positive_only(), a0, actions, spec.process,
        spec.constants | frozenset(labels),
    )


def positive_dominant(spec: KabSpec) -> KabSpec:
    """
    K^+ (K^p 기반)
    - 파라미터 제거 (q+의 free 변수로 이동), Q- 필터 제거
    - 모든 규칙 true -> α+()
    """
    approximant = consistent_approximant(spec)
    actions = []
    for action in approximant.actions:
        effects = []
        for effect in action.effects:
            free = set(effect.qplus.free)
            for template in effect.head:
                for var in template_vars(template):
                    if var not in free:
                        raise KabSemanticError(
                            f"action {action.name}: parameter {var} occurs in a head but not in q+"
                        )
            effects.append(EffectSpec(effect.qplus, effect.head))
        actions.append(Action(action.name + DOMINANT_SUFFIX, (), tuple(effects)))
    process = tuple(ProcessRule(ECQ_TRUE, a.name, ()) for a in actions)
    return KabSpec(approximant.tbox, approximant.a0, tuple(actions), process, approximant.constants)

