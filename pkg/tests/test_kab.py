"""
KAB 명세 및 한 단계 실행 테스트
"""
import pytest

from src.dllite import (
    ABox, Assertion, Atom, Constant, ECQ_TRUE, ECQNot, EmbeddedUCQ, FRESH_PREFIX, SkolemCall, TBox,
    TEMP, Var, atom_query, fact,
)
from src.errors import KabSemanticError, MissingCallBinding
from src.kab import (
    Action, AssertionTemplate, EffectSpec, KabSpec, ProcessRule, ServiceCallMap, SkolemTemplate,
    calls, do_effects, ground, legal_assignments,
)
from src.parser import parse_kab
from src.ts import build_ts

x, p = Var("x"), Var("p")
a = Constant("a")
f_a = SkolemCall("f", (a,))


def copy_effect(predicate: str) -> EffectSpec:
    """[N(x)] ~> {N(x)}"""
    return EffectSpec(atom_query(Atom(predicate, (x,))), (AssertionTemplate(predicate, (x,)),))


class TestKabSpec:
    """KabSpec 불변식"""

    def test_delta0(self, running_spec):
        """Δ0 = temp + 레이블 + adom(A0)"""
        assert running_spec.delta0 == {TEMP, Constant("@ax1"), a}

    def test_action_lookup(self, running_spec):
        assert running_spec.action("gamma2").params == (Var("p"),)
        with pytest.raises(KabSemanticError):
            running_spec.action("gamma9")

    def test_predicates(self, running_spec):
        assert running_spec.predicates() == {"C": 1, "D": 1, "G": 1}

    def test_inconsistent_a0_rejected(self, disjoint_tbox, conflict_abox):
        spec = KabSpec(disjoint_tbox, conflict_abox)
        with pytest.raises(KabSemanticError):
            spec.validate()
        assert spec.validate(check_consistency=False) is spec

    def test_unscoped_head_variable(self):
        effect = EffectSpec(ECQ_TRUE.ucq, (AssertionTemplate("C", (Var("y"),)),))
        spec = KabSpec(TBox(), ABox([fact("C", "a")]), (Action("act", (), (effect,)),))
        with pytest.raises(KabSemanticError, match="head variable"):
            spec.validate()

    def test_arity_clash(self):
        effect = EffectSpec(atom_query(Atom("C", (x,))), (AssertionTemplate("C", (x, x)),))
        spec = KabSpec(TBox(), ABox([fact("C", "a")]), (Action("act", (), (effect,)),))
        with pytest.raises(KabSemanticError, match="arities"):
            spec.validate()

    def test_rule_arguments_must_match_condition(self):
        action = Action("act", (p,), (copy_effect("C"),))
        rule = ProcessRule(ECQ_TRUE, "act", (x,))
        spec = KabSpec(TBox(), ABox([fact("C", "a")]), (action,), (rule,))
        with pytest.raises(KabSemanticError, match="free variables"):
            spec.validate()

    def test_head_constant_outside_delta0(self):
        effect = EffectSpec(ECQ_TRUE.ucq, (AssertionTemplate("C", (Constant("zz"),)),))
        spec = KabSpec(TBox(), ABox([fact("C", "a")]), (Action("act", (), (effect,)),))
        with pytest.raises(KabSemanticError, match="Δ0"):
            spec.validate()

    def test_state_predicate_reserved(self):
        spec = KabSpec(TBox(), ABox([Assertion("State", (TEMP,))]))
        with pytest.raises(KabSemanticError, match="reserved"):
            spec.validate()

    @pytest.mark.parametrize("text", [
        "ABOX { Viol(a); }",
        "TBOX { Viol isa C; }\nABOX { C(a); }",
        "ABOX { C(a); }\nACTION act() { effect [C(x)] ~> { Viol(x) }; }",
    ])
    def test_viol_predicate_reserved(self, text):
        with pytest.raises(KabSemanticError, match="Viol is reserved"):
            parse_kab(text)


class TestServiceCallMap:
    """서비스 호출 맵"""

    def test_extend(self):
        m = ServiceCallMap().extend({f_a: Constant("b")})
        assert m[f_a] == Constant("b")
        assert m.argument_constants() == {a}
        assert m.extend({f_a: Constant("b")}) == m

    def test_extend_conflict(self):
        m = ServiceCallMap({f_a: Constant("b")})
        with pytest.raises(ValueError):
            m.extend({f_a: Constant("c")})

    def test_hashable_and_order_free(self):
        g_a = SkolemCall("g", (a,))
        first = ServiceCallMap({f_a: a, g_a: a})
        second = ServiceCallMap({g_a: a, f_a: a})
        assert first == second
        assert hash(first) == hash(second)


class TestExecution:
    """legal_assignments / do / calls / ground"""

    def test_legal_assignments(self, running_spec):
        """A0 = {C(a)}: gamma1()과 gamma2(a)"""
        found = [(action.name, values) for action, values in legal_assignments(running_spec.a0, running_spec)]
        assert found == [("gamma1", ()), ("gamma2", (a,))]

    def test_no_legal_gamma2_without_c(self, running_spec):
        abox = ABox([fact("D", "a")])
        found = [action.name for action, _ in legal_assignments(abox, running_spec)]
        assert found == ["gamma1"]

    def test_do_gamma1(self, running_spec):
        """gamma1은 C(x)마다 D(x), C(x)"""
        facts = do_effects(running_spec.tbox, running_spec.a0, running_spec.action("gamma1"), ())
        assert facts == {fact("C", "a"), fact("D", "a")}

    def test_do_gamma2_produces_call(self, running_spec):
        facts = do_effects(running_spec.tbox, running_spec.a0, running_spec.action("gamma2"), (a,))
        assert facts == {Assertion("G", (f_a,))}
        assert calls(facts) == {f_a}

    def test_effect_filter(self):
        """Q- 필터가 거짓인 답은 제외"""
        qminus = EmbeddedUCQ(atom_query(Atom("D", (x,))))
        effect = EffectSpec(atom_query(Atom("C", (x,))), (AssertionTemplate("E", (x,)),), ECQNot(qminus))
        action = Action("act", (), (effect,))
        abox = ABox([fact("C", "a"), fact("C", "b"), fact("D", "b")])
        assert do_effects(TBox(), abox, action, ()) == {fact("E", "a")}

    def test_skolem_head(self):
        effect = EffectSpec(
            atom_query(Atom("C", (x,))),
            (AssertionTemplate("R", (x, SkolemTemplate("f", (x,)))),),
        )
        facts = do_effects(TBox(), ABox([fact("C", "a")]), Action("act", (), (effect,)), ())
        assert facts == {Assertion("R", (a, f_a))}

    def test_ground(self):
        facts = [Assertion("G", (f_a,)), fact("C", "a")]
        assert ground(facts, {f_a: Constant("b")}) == ABox([fact("G", "b"), fact("C", "a")])

    def test_ground_missing_binding(self):
        with pytest.raises(MissingCallBinding):
            ground([Assertion("G", (f_a,))], {})


def rename_term(term, renaming):
    if isinstance(term, SkolemCall):
        return SkolemCall(term.function, tuple(renaming.get(t, t) for t in term.args))
    return renaming.get(term, term)


class TestRenaming:
    """명세에 없는 값 이름을 바꾸면 do 결과도 같이 바뀜"""

    @pytest.mark.parametrize("fixture", ["running_spec", "enrollment_spec", "orders_spec"])
    def test_do_effects_commutes_with_renaming(self, request, fixture):
        spec = request.getfixturevalue(fixture)
        checked = 0
        for state in build_ts(spec, "standard").states:
            renaming = {
                t: Constant("r" + t.name[len(FRESH_PREFIX):])
                for t in state.abox.adom() if t.name.startswith(FRESH_PREFIX)
            }
            renamed_abox = state.abox.rename(renaming)
            for action, args in legal_assignments(state.abox, spec):
                expected = {
                    Assertion(f.predicate, tuple(rename_term(t, renaming) for t in f.args))
                    for f in do_effects(spec.tbox, state.abox, action, args)
                }
                renamed_args = tuple(renaming.get(v, v) for v in args)
                assert do_effects(spec.tbox, renamed_abox, action, renamed_args) == expected
                checked += bool(renaming)
        assert checked > 0
