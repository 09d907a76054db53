"""
DL-Lite 추론 테스트 (재작성, certain answer, ECQ, 일관성)
"""
import pytest

from src.dllite import (
    ABox, Atom, ConceptInclusion, Constant, ECQ_FALSE, ECQ_TRUE, ECQAnd, ECQExists, ECQNot,
    EmbeddedUCQ, ExistsRole, Functionality, NamedConcept, Role, RoleDisjointness, TBox, Var,
    atom_query, bind_ucq, certain_answers, conjunctive_query, ecq_forall, ecq_free_vars, ecq_holds,
    ecq_or, eval_ecq, evaluate_ucq, fact, is_consistent, rewrite_ucq, violation_queries,
)


x, y, z = Var("x"), Var("y"), Var("z")
a, b = Constant("a"), Constant("b")


def isa(lhs, rhs):
    return ConceptInclusion(lhs, rhs)


A, B, C = NamedConcept("A"), NamedConcept("B"), NamedConcept("C")
P = Role("P")


class TestABox:
    """ABox 값 객체"""

    def test_set_semantics(self):
        """중복 assertion은 하나로, 동등성은 집합 기준"""
        first = ABox([fact("C", "a"), fact("C", "a"), fact("D", "a")])
        second = ABox([fact("D", "a"), fact("C", "a")])
        assert len(first) == 2
        assert first == second
        assert hash(first) == hash(second)

    def test_sorted_assertions(self):
        """assertions는 정규 정렬"""
        abox = ABox([fact("P", "b", "a"), fact("C", "b"), fact("C", "a")])
        assert [str(f) for f in abox.assertions] == ["C(a)", "C(b)", "P(b,a)"]

    def test_adom_and_rename(self):
        abox = ABox([fact("P", "a", "b")])
        assert abox.adom() == {a, b}
        renamed = abox.rename({b: Constant("c")})
        assert renamed == ABox([fact("P", "a", "c")])

    def test_union_difference(self):
        abox = ABox([fact("C", "a")])
        grown = abox.union([fact("D", "a")])
        assert fact("D", "a") in grown
        assert grown.difference([fact("C", "a")]) == ABox([fact("D", "a")])
        assert abox <= grown


class TestTBox:
    """TBox 레이블"""

    def test_labels_follow_declaration_order(self):
        """부정 포함/함수성에만 @ax1, @ax2, ... 부여"""
        disjoint = ConceptInclusion(A, B, negated=True)
        funct = Functionality(P)
        tbox = TBox((isa(A, C), disjoint, funct))
        assert tbox.labels == {disjoint: Constant("@ax1"), funct: Constant("@ax2")}
        assert tbox.positive_only().axioms == (isa(A, C),)

    def test_axiom_strings(self):
        assert str(ConceptInclusion(ExistsRole(Role("P", inverse=True)), A)) == "exists inv P isa A"
        assert str(RoleDisjointness(P, Role("Q"))) == "P roledisjoint Q"
        assert str(Functionality(P)) == "funct P"

    def test_vocabulary(self):
        tbox = TBox((isa(ExistsRole(P), A),))
        assert tbox.vocabulary() == {"P": 2, "A": 1}


class TestRewriting:
    """PerfectRef 재작성"""

    def test_empty_tbox_keeps_query(self):
        q = atom_query(Atom("A", (x,)))
        assert rewrite_ucq(q, ()) == q

    def test_concept_chain(self):
        """A isa B, B isa C: C(x)의 재작성은 A, B, C"""
        q = atom_query(Atom("C", (x,)))
        rewritten = rewrite_ucq(q, (isa(A, B), isa(B, C)))
        predicates = {cq.atoms[0].predicate for cq in rewritten.cqs}
        assert predicates == {"A", "B", "C"}

    def test_existential_role(self):
        """A isa exists P: ∃y.P(x,y)는 A(x)로도 재작성"""
        q = conjunctive_query([Atom("P", (x, y))], free=[x])
        rewritten = rewrite_ucq(q, (isa(A, ExistsRole(P)),))
        assert any(cq.atoms == (Atom("A", (x,)),) for cq in rewritten.cqs)

    def test_bound_variable_blocks_existential(self):
        """join 변수는 ∃ 공리로 재작성하지 않음"""
        q = conjunctive_query([Atom("P", (x, y)), Atom("B", (y,))], free=[x])
        rewritten = rewrite_ucq(q, (isa(A, ExistsRole(P)),))
        assert all("A" not in {at.predicate for at in cq.atoms} for cq in rewritten.cqs)

    def test_reduce_enables_rewrite(self):
        """P(x,y), P(x,z)는 통합 후 A(x)로 재작성"""
        q = conjunctive_query([Atom("P", (x, y)), Atom("P", (x, z))], free=[x])
        rewritten = rewrite_ucq(q, (isa(A, ExistsRole(P)),))
        assert any(cq.atoms == (Atom("A", (x,)),) for cq in rewritten.cqs)

    def test_bind_ucq(self):
        q = conjunctive_query([Atom("P", (x, y))], free=[x, y])
        bound = bind_ucq(q, {x: a})
        assert bound.free == (y,)
        assert evaluate_ucq(bound, ABox([fact("P", "a", "b"), fact("P", "b", "a")])) == {(b,)}


class TestCertainAnswers:
    """certain answer"""

    def test_plain_evaluation(self):
        q = atom_query(Atom("A", (x,)))
        assert certain_answers(q, TBox(), ABox([fact("A", "a")])) == {(a,)}

    def test_inclusion_answers(self):
        tbox = TBox((isa(A, B),))
        abox = ABox([fact("A", "a"), fact("B", "b")])
        assert certain_answers(atom_query(Atom("B", (x,))), tbox, abox) == {(a,), (b,)}

    def test_inverse_role(self):
        """exists inv P isa C: P(a,b)이면 C(b)"""
        tbox = TBox((isa(ExistsRole(Role("P", inverse=True)), C),))
        abox = ABox([fact("P", "a", "b")])
        assert certain_answers(atom_query(Atom("C", (x,))), tbox, abox) == {(b,)}

    def test_boolean_query(self):
        tbox = TBox((isa(A, ExistsRole(P)),))
        q = conjunctive_query([Atom("P", (x, y))])
        assert certain_answers(q, tbox, ABox([fact("A", "a")])) == {()}
        assert certain_answers(q, tbox, ABox([fact("B", "a")])) == frozenset()

    def test_binding(self):
        q = conjunctive_query([Atom("P", (x, y))], free=[x, y])
        abox = ABox([fact("P", "a", "b"), fact("P", "b", "b")])
        assert certain_answers(q, TBox(), abox, {y: b}) == {(a,), (b,)}


class TestECQ:
    """EQL-Lite(UCQ) 평가 (active domain)"""

    def test_true_false(self):
        abox = ABox([fact("A", "a")])
        assert ecq_holds(ECQ_TRUE, TBox(), abox)
        assert not ecq_holds(ECQ_FALSE, TBox(), abox)

    def test_negation_closes_over_adom(self):
        """¬A(x)의 답은 adom 중 A가 아닌 값"""
        query = ECQNot(EmbeddedUCQ(atom_query(Atom("A", (x,)))))
        abox = ABox([fact("A", "a"), fact("B", "b")])
        assert eval_ecq(query, TBox(), abox) == {(b,)}

    def test_negation_is_epistemic(self):
        """A isa exists P: ∃y.P(x,y)가 a에 대해 certain이면 부정은 거짓"""
        tbox = TBox((isa(A, ExistsRole(P)),))
        has_p = EmbeddedUCQ(conjunctive_query([Atom("P", (x, y))], free=[x]))
        abox = ABox([fact("A", "a")])
        assert eval_ecq(has_p, tbox, abox) == {(a,)}
        assert eval_ecq(ECQNot(has_p), tbox, abox) == frozenset()

    def test_conjunction_join(self):
        left = EmbeddedUCQ(atom_query(Atom("A", (x,))))
        right = EmbeddedUCQ(atom_query(Atom("P", (x, y))))
        abox = ABox([fact("A", "a"), fact("P", "a", "b"), fact("P", "b", "a")])
        assert eval_ecq(ECQAnd(left, right), TBox(), abox) == {(a, b)}

    def test_exists_and_forall(self):
        body = EmbeddedUCQ(atom_query(Atom("A", (x,))))
        abox = ABox([fact("A", "a"), fact("B", "b")])
        assert ecq_holds(ECQExists(x, body), TBox(), abox)
        assert not ecq_holds(ecq_forall(x, body), TBox(), abox)
        everyone = ABox([fact("A", "a"), fact("A", "b")])
        assert ecq_holds(ecq_forall(x, body), TBox(), everyone)

    def test_or(self):
        query = ecq_or(EmbeddedUCQ(atom_query(Atom("A", (x,)))), EmbeddedUCQ(atom_query(Atom("B", (x,)))))
        abox = ABox([fact("A", "a"), fact("B", "b"), fact("C", "c")])
        assert eval_ecq(query, TBox(), abox) == {(a,), (b,)}

    def test_free_vars(self):
        query = ECQExists(y, EmbeddedUCQ(atom_query(Atom("P", (x, y)))))
        assert ecq_free_vars(query) == {x}

    def test_binding_argument(self):
        query = EmbeddedUCQ(atom_query(Atom("A", (x,))))
        abox = ABox([fact("A", "a")])
        assert ecq_holds(query, TBox(), abox, {x: a})
        assert not ecq_holds(query, TBox(), abox, {x: b})


class TestConsistency:
    """FO 재작성 기반 일관성"""

    def test_concept_disjointness(self, disjoint_tbox, conflict_abox):
        assert not is_consistent(disjoint_tbox, conflict_abox)
        assert is_consistent(disjoint_tbox, ABox([fact("C", "a"), fact("D", "b")]))

    def test_disjointness_through_inclusion(self):
        """A isa B, B disjoint C: A(a), C(a)는 모순"""
        tbox = TBox((isa(A, B), ConceptInclusion(B, C, negated=True)))
        assert not is_consistent(tbox, ABox([fact("A", "a"), fact("C", "a")]))

    def test_disjointness_through_existential(self):
        """exists P disjoint B, A isa exists P: A(a), B(a)는 모순"""
        tbox = TBox((isa(A, ExistsRole(P)), ConceptInclusion(ExistsRole(P), B, negated=True)))
        assert not is_consistent(tbox, ABox([fact("A", "a"), fact("B", "a")]))

    def test_functionality(self):
        tbox = TBox((Functionality(P),))
        assert not is_consistent(tbox, ABox([fact("P", "a", "b"), fact("P", "a", "c")]))
        assert is_consistent(tbox, ABox([fact("P", "a", "b"), fact("P", "c", "b")]))

    def test_role_disjointness(self):
        tbox = TBox((RoleDisjointness(P, Role("Q")),))
        assert not is_consistent(tbox, ABox([fact("P", "a", "b"), fact("Q", "a", "b")]))
        assert is_consistent(tbox, ABox([fact("P", "a", "b"), fact("Q", "b", "a")]))

    def test_violation_queries_in_label_order(self):
        disjoint = ConceptInclusion(A, B, negated=True)
        funct = Functionality(P)
        tbox = TBox((funct, isa(A, C), disjoint))
        assert [axiom for axiom, _ in violation_queries(tbox)] == [funct, disjoint]

    @pytest.mark.parametrize("abox", [
        ABox(),
        ABox([fact("A", "a")]),
        ABox([fact("P", "a", "a")]),
    ])
    def test_positive_tbox_always_consistent(self, abox):
        tbox = TBox((isa(A, ExistsRole(P)), isa(ExistsRole(P), B)))
        assert is_consistent(tbox, abox)


class TestInvariants:
    """값 이름 바꾸기와 ABox 확장에 대한 성질 (무작위 인스턴스)"""

    @pytest.mark.parametrize("seed", range(0, 200, 2))
    def test_certain_answers_monotone_in_abox(self, seed, random_instance):
        tbox, abox, q, extra = random_instance(seed)
        assert certain_answers(q, tbox, abox) <= certain_answers(q, tbox, abox.union(extra))

    @pytest.mark.parametrize("seed", range(0, 200, 2))
    def test_eval_ecq_commutes_with_renaming(self, seed, random_instance):
        """질의에 없는 값의 이름을 바꾸면 답도 같이 바뀜"""
        tbox, abox, q, _ = random_instance(seed)
        query = ECQAnd(EmbeddedUCQ(q), ECQNot(EmbeddedUCQ(atom_query(Atom("A", (x,))))))
        mentioned = {t for cq in q.cqs for atom in cq.atoms for t in atom.args if isinstance(t, Constant)}
        renaming = {
            Constant(n): Constant("r" + n) for n in ("a", "b", "c") if Constant(n) not in mentioned
        }
        expected = {tuple(renaming.get(t, t) for t in row) for row in eval_ecq(query, tbox, abox)}
        assert eval_ecq(query, tbox, abox.rename(renaming)) == expected
