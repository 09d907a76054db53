"""
ABox repair 모듈
- b-repair: 최대 T-consistent 부분집합 (충돌 그래프의 maximal independent set)
- c-repair: 모든 b-repair의 교집합
- viol: 위반된 TBox assertion 레이블
- CQA (AR 의미론) 질의 응답
"""
import itertools
import logging
from functools import lru_cache
from typing import FrozenSet, List, Mapping, Optional, Tuple

import networkx as nx

from .dllite import (
    ABox, AnswerFn, Constant, ECQ, GroundTerm, TBox, UCQ, Var,
    assertion_key, certain_answers, eval_ecq, holds, is_consistent, match_images,
    violation_queries,
)

logger = logging.getLogger(__name__)

# 이 크기 미만의 ABox는 부분집합 열거
SUBSET_THRESHOLD = 12


# ============================================================
# 충돌 그래프
# ============================================================

def conflicts(abox: ABox, tbox: TBox) -> nx.Graph:
    """
    충돌 그래프: unsat query 매치 이미지(크기 1~2)를 간선으로

    Returns:
        nx.Graph (graph["self_conflicting"]에 단독으로 모순인 assertion 집합)
    """
    graph = nx.Graph()
    graph.add_nodes_from(abox.assertions)
    self_conflicting = set()
    for _, query in violation_queries(tbox):
        for image in match_images(query, abox):
            if len(image) == 1:
                self_conflicting.update(image)
            else:
                first, second = sorted(image, key=assertion_key)
                graph.add_edge(first, second)
    graph.graph["self_conflicting"] = frozenset(self_conflicting)
    return graph


def _repair_key(repair: ABox) -> tuple:
    return (-len(repair), tuple(assertion_key(a) for a in repair.assertions))


def _subset_repairs(abox: ABox, tbox: TBox) -> List[ABox]:
    facts = abox.assertions
    found: List[ABox] = []
    for size in range(len(facts), -1, -1):
        for subset in itertools.combinations(facts, size):
            candidate = ABox(subset)
            if any(candidate <= r for r in found):
                continue
            if is_consistent(tbox, candidate):
                found.append(candidate)
    return found


def _independent_set_repairs(abox: ABox, tbox: TBox) -> List[ABox]:
    graph = conflicts(abox, tbox)
    graph.remove_nodes_from(graph.graph["self_conflicting"])
    if graph.number_of_nodes() == 0:
        return [ABox()]
    # 여집합 그래프의 maximal clique = 원 그래프의 maximal independent set
    return [ABox(clique) for clique in nx.find_cliques(nx.complement(graph))]


@lru_cache(maxsize=1024)
def _b_repairs(abox: ABox, tbox: TBox, subset_threshold: int) -> Tuple[ABox, ...]:
    if is_consistent(tbox, abox):
        return (abox,)
    if len(abox) < subset_threshold:
        repairs = _subset_repairs(abox, tbox)
    else:
        repairs = _independent_set_repairs(abox, tbox)
    logger.debug("%d b-repairs for ABox of size %d", len(repairs), len(abox))
    return tuple(sorted(set(repairs), key=_repair_key))


# ============================================================
# Repair 연산
# ============================================================

def b_repairs(abox: ABox, tbox: TBox, subset_threshold: int = SUBSET_THRESHOLD) -> Tuple[ABox, ...]:
    """
    b-repair 집합 (정규 정렬)

    Args:
        subset_threshold: 이 크기 미만이면 부분집합 열거, 이상이면 충돌 그래프 사용
    """
    return _b_repairs(abox, tbox, subset_threshold)


def c_repair(abox: ABox, tbox: TBox) -> ABox:
    """모든 b-repair의 교집합 = 어떤 충돌에도 속하지 않는 assertion"""
    if is_consistent(tbox, abox):
        return abox
    graph = conflicts(abox, tbox)
    graph.remove_nodes_from(graph.graph["self_conflicting"])
    return ABox(a for a in abox.assertions if a in graph and graph.degree(a) == 0)


def viol(abox: ABox, tbox: TBox) -> FrozenSet[Constant]:
    """A가 위반하는 T_n/T_f assertion의 레이블"""
    return frozenset(
        tbox.labels[axiom] for axiom, query in violation_queries(tbox) if holds(query, abox)
    )


# ============================================================
# CQA (AR 의미론)
# ============================================================

def cqa_answers(
    q: UCQ, tbox: TBox, abox: ABox, binding: Optional[Mapping[Var, GroundTerm]] = None
) -> FrozenSet[tuple]:
    """모든 b-repair에서 certain answer인 튜플"""
    repairs = b_repairs(abox, tbox)
    answers = certain_answers(q, tbox, repairs[0], binding)
    for repair in repairs[1:]:
        if not answers:
            break
        answers = answers & certain_answers(q, tbox, repair, binding)
    return answers


def cqa_eval_ecq(
    query: ECQ, tbox: TBox, abox: ABox, binding: Optional[Mapping[Var, GroundTerm]] = None
) -> FrozenSet[tuple]:
    """leaf를 cqa_answers로 평가하는 ECQ"""
    return eval_ecq(query, tbox, abox, binding, answer_fn=cqa_answers)


def answer_function(query_mode: str) -> AnswerFn:
    """query_mode -> UCQ leaf 평가 함수"""
    if query_mode == "certain":
        return certain_answers
    if query_mode == "cqa":
        return cqa_answers
    raise ValueError(f"unknown query mode: {query_mode}")

