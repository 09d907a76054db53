"""
fixture KAB 일괄 빌드 + 속성 검증 리포트
"""

import json
import os
import sys
import time

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, BASE_DIR)

from src.analysis import dependency_graph, is_weakly_acyclic  # noqa: E402
from src.cli import verify_properties  # noqa: E402
from src.errors import LimitExceeded  # noqa: E402
from src.parser import parse_kab, parse_properties  # noqa: E402
from src.schema import BuildLimits  # noqa: E402
from src.ts import SEMANTICS, build_ts  # noqa: E402

DATA_DIR = os.path.join(BASE_DIR, 'data')
OUTPUT_PATH = os.path.join(DATA_DIR, 'fixture_results.json')

# (KAB, 속성 파일) - 속성 파일이 없으면 빌드만
FIXTURES = [
    ('running.kab', 'running.prop'),
    ('enrollment.kab', 'enrollment.prop'),
    ('orders.kab', 'orders.prop'),
    ('gcycle.kab', None),
]

# weakly acyclic이 아닌 KAB용 한계
CYCLIC_LIMITS = BuildLimits(max_states=500, max_depth=50)


def read(name):
    with open(os.path.join(DATA_DIR, name), encoding='utf-8') as f:
        return f.read()


def run_fixture(kab_name, prop_name):
    spec = parse_kab(read(kab_name))
    properties = parse_properties(read(prop_name)) if prop_name else []
    weakly_acyclic = is_weakly_acyclic(dependency_graph(spec))
    limits = None if weakly_acyclic else CYCLIC_LIMITS
    print(f"   {kab_name}: {'weakly acyclic' if weakly_acyclic else 'not weakly acyclic'}")

    rows = []
    for semantics in SEMANTICS:
        started = time.perf_counter()
        try:
            ts = build_ts(spec, semantics, limits)
        except LimitExceeded as e:
            print(f"      {semantics:>8}: {e.message}")
            rows.append({'semantics': semantics, 'limit': e.kind})
            continue
        built = time.perf_counter() - started

        response = verify_properties(spec, properties, semantics, ts=ts)
        checked = time.perf_counter() - started - built
        summary = ts.summary()
        passed = sum(r.verdict for r in response.results)
        print(f"      {semantics:>8}: {summary['states']} states, {summary['edges']} edges, "
              f"{summary['temp_states']} intermediate | {passed}/{len(response.results)} true "
              f"| build {built:.2f}s, check {checked:.2f}s")
        rows.append({
            'semantics': semantics,
            **summary,
            'verdicts': {r.name: r.verdict for r in response.results},
            'build_seconds': round(built, 3),
            'check_seconds': round(checked, 3),
        })
    return {'kab': kab_name, 'weakly_acyclic': weakly_acyclic, 'runs': rows}


def main():
    print("=" * 50)
    print("KAB fixture 빌드 및 검증")
    print("=" * 50)

    print("\n[1/2] fixture 빌드...")
    results = [run_fixture(kab_name, prop_name) for kab_name, prop_name in FIXTURES]

    print("\n[2/2] 결과 저장...")
    with open(OUTPUT_PATH, 'w', encoding='utf-8') as f:
        json.dump(results, f, indent=2, ensure_ascii=False)
    print(f"   로컬: {OUTPUT_PATH}")

    print("\n완료!")
    return OUTPUT_PATH


if __name__ == "__main__":
    main()
