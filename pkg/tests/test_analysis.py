"""
의존 그래프 / weak acyclicity / K^p, K^+ 테스트
"""
import pytest

from src.analysis import (
    DOMINANT_SUFFIX, DependencyGraph, compare_graphs, consistent_approximant, dependency_graph,
    is_weakly_acyclic, positive_dominant,
)
from src.dllite import ECQ_TRUE, Assertion, Constant, VIOL
from src.errors import KabSemanticError, LimitExceeded
from src.parser import parse_kab
from src.schema import BuildLimits
from src.ts import build_ts


class TestDependencyGraph:
    """간선 구성"""

    def test_running_example_edges(self, running_spec):
        graph = dependency_graph(running_spec)
        assert (("C", 1), ("G", 1)) in graph.special_edges
        assert (("C", 1), ("D", 1)) in graph.ordinary_edges
        assert (("C", 1), ("C", 1)) in graph.ordinary_edges
        assert graph.nodes == {("C", 1), ("D", 1), ("G", 1)}

    def test_rewriting_adds_sources(self, enrollment_spec):
        """Person(p)는 Student(p), enrolled(p, _)로도 재작성되므로 둘 다 출처"""
        graph = dependency_graph(enrollment_spec)
        assert (("Student", 1), ("Person", 1)) in graph.ordinary_edges
        assert (("enrolled", 1), ("Person", 1)) in graph.ordinary_edges
        assert (("Applicant", 1), ("enrolled", 2)) in graph.special_edges
        assert (("enrolled", 1), ("Graduate", 1)) in graph.ordinary_edges

    def test_networkx_edge_flags(self, running_spec):
        nx_graph = dependency_graph(running_spec).to_networkx()
        assert nx_graph.edges[("C", 1), ("G", 1)]["special"] is True
        assert nx_graph.edges[("C", 1), ("D", 1)]["special"] is False

    def test_masked(self):
        graph = DependencyGraph(
            frozenset({("A", 1), ("B", 1)}),
            frozenset({(("A", 1), ("B", 1))}),
            frozenset(),
        )
        masked = graph.masked(["B"])
        assert masked.nodes == {("A", 1)}
        assert masked.ordinary_edges == frozenset()


class TestWeakAcyclicity:
    """SCC 안의 special 간선 여부"""

    @pytest.mark.parametrize("fixture", ["running_spec", "enrollment_spec", "orders_spec"])
    def test_fixtures_are_weakly_acyclic(self, request, fixture):
        spec = request.getfixturevalue(fixture)
        assert is_weakly_acyclic(dependency_graph(spec)) is True

    def test_gcycle_is_not(self, gcycle_spec):
        assert is_weakly_acyclic(dependency_graph(gcycle_spec)) is False

    def test_self_loop_special_edge(self):
        spec = parse_kab(
            "ABOX { C(a); }\n"
            "ACTION grow(p) { effect [C(p)] ~> { C(f(p)) }; }\n"
            "PROCESS { C(y) -> grow(y); }"
        )
        assert is_weakly_acyclic(dependency_graph(spec)) is False

    def test_head_only_parameter_uses_rule_condition(self):
        """q+에 없는 파라미터도 규칙 조건 G(y)를 출처로 삼아 순환을 찾음"""
        spec = parse_kab(
            "ABOX { C(a); E(a); }\n"
            "ACTION gamma2(p) { effect [C(p)] ~> { G(f(p)) }; effect [E(z)] ~> { E(z) }; }\n"
            "ACTION gamma3(p) { effect [E(z)] ~> { C(g(p)), E(z) }; }\n"
            "PROCESS { C(y) -> gamma2(y); G(y) -> gamma3(y); }"
        )
        graph = dependency_graph(spec)
        assert (("G", 1), ("C", 1)) in graph.special_edges
        assert is_weakly_acyclic(graph) is False
        with pytest.raises(LimitExceeded):
            build_ts(spec, "standard", BuildLimits(max_states=200))

    def test_head_only_parameter_rewritten_sources(self):
        """규칙 조건 Student(x)는 enrolled(x, _)로도 재작성됨"""
        spec = parse_kab(
            "TBOX { exists enrolled isa Student; }\n"
            "ABOX { enrolled(ann, math); }\n"
            "ACTION tag(p) { effect [enrolled(z, w)] ~> { Tagged(p) }; }\n"
            "PROCESS { Student(x) -> tag(x); }"
        )
        graph = dependency_graph(spec)
        assert (("Student", 1), ("Tagged", 1)) in graph.ordinary_edges
        assert (("enrolled", 1), ("Tagged", 1)) in graph.ordinary_edges
        assert (("enrolled", 2), ("Tagged", 1)) not in graph.ordinary_edges

    def test_unguarded_parameter_depends_on_every_position(self):
        """부정 조건으로만 바인딩된 파라미터는 모든 위치가 출처"""
        spec = parse_kab(
            "ABOX { C(a); D(b); }\n"
            "ACTION mark(p) { effect [C(z)] ~> { C(h(p)) }; }\n"
            "PROCESS { !D(y) -> mark(y); }"
        )
        graph = dependency_graph(spec)
        assert {src for src, _ in graph.special_edges} == graph.nodes
        assert is_weakly_acyclic(graph) is False


class TestApproximants:
    """K^p와 K^+"""

    def test_consistent_approximant(self, running_spec):
        approx = consistent_approximant(running_spec)
        assert approx.tbox.axioms == ()
        assert Assertion(VIOL, (Constant("@ax1"),)) in approx.a0
        assert all(len(a.effects) == len(b.effects) + 1 for a, b in zip(approx.actions, running_spec.actions))
        assert approx.process == running_spec.process

    def test_approximant_keeps_dependency_graph(self, fixture_suites):
        """Viol을 가리면 원래 KAB와 같은 의존 그래프"""
        for spec, _ in fixture_suites:
            approx = consistent_approximant(spec)
            assert compare_graphs(dependency_graph(spec), dependency_graph(approx))

    def test_positive_dominant(self, running_spec):
        dominant = positive_dominant(running_spec)
        assert [a.name for a in dominant.actions] == ["gamma1" + DOMINANT_SUFFIX, "gamma2" + DOMINANT_SUFFIX]
        assert all(a.params == () for a in dominant.actions)
        assert all(rule.condition == ECQ_TRUE and rule.arguments == () for rule in dominant.process)
        assert all(e.qminus == ECQ_TRUE for a in dominant.actions for e in a.effects)

    def test_positive_dominant_stays_weakly_acyclic(self, fixture_suites):
        for spec, _ in fixture_suites:
            assert is_weakly_acyclic(dependency_graph(positive_dominant(spec)))

    def test_parameter_only_in_head_rejected(self):
        spec = parse_kab(
            "ABOX { C(a); }\n"
            "ACTION act(p) { effect [C(x)] ~> { D(p) }; }\n"
            "PROCESS { C(y) -> act(y); }"
        )
        with pytest.raises(KabSemanticError):
            positive_dominant(spec)
