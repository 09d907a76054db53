"""
pytest 설정 및 fixture
"""
import os
import random
import sys
import pytest

# 프로젝트 루트 경로 추가
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.dllite import (  # noqa: E402
    ABox, Atom, ConceptInclusion, Constant, ExistsRole, Functionality, NamedConcept, Role,
    RoleDisjointness, TBox, Var, conjunctive_query, fact,
)
from src.parser import parse_kab, parse_properties  # noqa: E402

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")


def data_path(name: str) -> str:
    return os.path.join(DATA_DIR, name)


def read_data(name: str) -> str:
    with open(data_path(name), encoding="utf-8") as f:
        return f.read()


@pytest.fixture
def data_file():
    """data/ 아래 파일 경로"""
    return data_path


@pytest.fixture
def read_text():
    """data/ 아래 파일 내용"""
    return read_data


@pytest.fixture
def running_text():
    """실행 예제 .kab 텍스트"""
    return read_data("running.kab")


@pytest.fixture
def running_spec(running_text):
    """실행 예제: C disjoint D, gamma1은 모순, gamma2는 f 호출"""
    return parse_kab(running_text)


@pytest.fixture
def gcycle_spec():
    """weak acyclicity를 깨는 g-cycle 변형"""
    return parse_kab(read_data("gcycle.kab"))


@pytest.fixture
def enrollment_spec():
    return parse_kab(read_data("enrollment.kab"))


@pytest.fixture
def orders_spec():
    return parse_kab(read_data("orders.kab"))


@pytest.fixture
def disjoint_tbox():
    """C disjoint D"""
    return TBox((ConceptInclusion(NamedConcept("C"), NamedConcept("D"), negated=True),))


@pytest.fixture
def conflict_abox():
    """{C(a), D(a)}"""
    return ABox([fact("C", "a"), fact("D", "a")])


@pytest.fixture
def running_properties():
    return parse_properties(read_data("running.prop"))


@pytest.fixture
def reach_properties():
    """낙관적/강건한 도달 가능성"""
    return dict(parse_properties(read_data("reach.prop")))


@pytest.fixture
def fixture_suites():
    """(KAB, 속성 모음) 쌍: 실행 예제 + 2개 fixture"""
    return [
        (parse_kab(read_data(kab)), parse_properties(read_data(prop)))
        for kab, prop in (
            ("running.kab", "running.prop"),
            ("enrollment.kab", "enrollment.prop"),
            ("orders.kab", "orders.prop"),
        )
    ]


# ============================================================
# 무작위 인스턴스 생성
# ============================================================

CONCEPT_NAMES = ["A", "B", "C"]
ROLE_NAMES = ["P", "Q"]
INDIVIDUALS = ["a", "b", "c"]
VARIABLES = [Var("x"), Var("y"), Var("z")]


def random_role(rng: random.Random) -> Role:
    return Role(rng.choice(ROLE_NAMES), inverse=rng.random() < 0.3)


def random_concept(rng: random.Random):
    if rng.random() < 0.5:
        return NamedConcept(rng.choice(CONCEPT_NAMES))
    return ExistsRole(random_role(rng))


def random_tbox(rng: random.Random) -> TBox:
    axioms = []
    for _ in range(rng.randint(0, 4)):
        kind = rng.random()
        if kind < 0.6:
            axioms.append(ConceptInclusion(random_concept(rng), random_concept(rng)))
        elif kind < 0.8:
            axioms.append(ConceptInclusion(random_concept(rng), random_concept(rng), negated=True))
        elif kind < 0.9:
            axioms.append(RoleDisjointness(random_role(rng), random_role(rng)))
        else:
            axioms.append(Functionality(random_role(rng)))
    return TBox(tuple(axioms))


def random_abox(rng: random.Random) -> ABox:
    facts = []
    for _ in range(rng.randint(1, 6)):
        if rng.random() < 0.5:
            facts.append(fact(rng.choice(CONCEPT_NAMES), rng.choice(INDIVIDUALS)))
        else:
            facts.append(fact(rng.choice(ROLE_NAMES), rng.choice(INDIVIDUALS), rng.choice(INDIVIDUALS)))
    return ABox(facts)


def random_term(rng: random.Random):
    if rng.random() < 0.15:
        return Constant(rng.choice(INDIVIDUALS))
    return rng.choice(VARIABLES)


def random_query(rng: random.Random):
    atoms = []
    for _ in range(rng.randint(1, 3)):
        if rng.random() < 0.4:
            atoms.append(Atom(rng.choice(CONCEPT_NAMES), (random_term(rng),)))
        else:
            atoms.append(Atom(rng.choice(ROLE_NAMES), (random_term(rng), random_term(rng))))
    used = sorted({t for atom in atoms for t in atom.args if isinstance(t, Var)}, key=lambda v: v.name)
    free = [v for v in used if rng.random() < 0.5]
    return conjunctive_query(atoms, free)


def make_random_instance(seed: int):
    """(TBox, ABox, UCQ, 추가 ABox)"""
    rng = random.Random(seed)
    return random_tbox(rng), random_abox(rng), random_query(rng), random_abox(rng)


@pytest.fixture
def random_instance():
    """seed -> (TBox, ABox, UCQ, 추가 ABox)"""
    return make_random_instance
