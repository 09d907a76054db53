"""
명령행 드라이버
- check / wa / build / verify / repairs / translate-tau
- 종료 코드: 0 성공(참), 1 실패(거짓), 2 사용법/파싱 오류, 3 LimitExceeded

사용 예:
    python -m src.cli verify data/running.kab data/reach.prop --semantics b
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .analysis import dependency_graph, is_weakly_acyclic
from .dllite import is_consistent
from .errors import (
    InconsistentInitialAbox, KabSemanticError, KabSyntaxError, KabToolkitError, LimitExceeded,
    NonMonotoneFixpoint, OpenFormula,
)
from .export import dependency_graph_to_dot, ts_to_dot, ts_to_json
from .kab import KabSpec
from .mucalc import MuFormula, is_it_fragment, model_check, tau
from .parser import (
    format_properties, labels_report, parse_abox, parse_kab, parse_properties,
)
from .repair import b_repairs, c_repair
from .schema import LOG_LEVEL, BuildLimits, PropertyResult, VerifyResponse
from .ts import REPAIR_SEMANTICS, SEMANTICS, TransitionSystem, build_ts

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_USAGE = 2
EXIT_LIMIT = 3

INPUT_ERRORS = (KabSyntaxError, KabSemanticError, OpenFormula, NonMonotoneFixpoint)


# ============================================================
# 공용 동작 (CLI / 서버)
# ============================================================

def default_query_mode(semantics: str) -> str:
    return "cqa" if semantics == "it" else "certain"


def make_limits(max_states=None, max_depth=None, max_run_domain=None) -> BuildLimits:
    """지정된 값만 덮어쓴 BuildLimits"""
    overrides = {
        key: value for key, value in (
            ("max_states", max_states), ("max_depth", max_depth), ("max_run_domain", max_run_domain),
        ) if value is not None
    }
    return BuildLimits(**overrides)


def verify_properties(
    spec: KabSpec,
    properties: Sequence[Tuple[str, MuFormula]],
    semantics: str,
    query_mode: Optional[str] = None,
    require_it_fragment: bool = False,
    limits: Optional[BuildLimits] = None,
    ts: Optional[TransitionSystem] = None,
) -> VerifyResponse:
    """
    전이 시스템을 만들고 속성들을 검사

    Raises:
        KabSemanticError: require_it_fragment인데 IT fragment 밖의 속성
        LimitExceeded, InconsistentInitialAbox: 빌드 실패
    """
    query_mode = query_mode or default_query_mode(semantics)
    warnings: List[str] = []
    fragments = {}
    for name, phi in properties:
        fragments[name] = is_it_fragment(phi)
        if semantics in REPAIR_SEMANTICS and not fragments[name]:
            message = f"property {name} is outside the IT fragment under {semantics} semantics"
            if require_it_fragment:
                raise KabSemanticError(message)
            warnings.append(message)
            logger.warning(message)

    ts = ts or build_ts(spec, semantics, limits)
    results = []
    for name, phi in properties:
        result = model_check(ts, phi, query_mode)
        results.append(PropertyResult(
            name=name, verdict=result.verdict, it_fragment=fragments[name],
            extension_size=len(result.extension),
        ))
    return VerifyResponse(
        semantics=semantics, query_mode=query_mode, states=len(ts.states),
        results=results, warnings=warnings,
    )


def translate_properties(properties: Sequence[Tuple[str, MuFormula]]) -> List[Tuple[str, MuFormula]]:
    return [(name, tau(phi)) for name, phi in properties]


# ============================================================
# 서브커맨드
# ============================================================

def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def cmd_check(args) -> int:
    spec = parse_kab(_read(args.kab), check_consistency=False)
    for label, axiom in labels_report(spec).items():
        print(f"{label}: {axiom}")
    if is_consistent(spec.tbox, spec.a0):
        print("consistent")
        return EXIT_OK
    print("inconsistent")
    return EXIT_FALSE


def cmd_wa(args) -> int:
    graph = dependency_graph(parse_kab(_read(args.kab)))
    if args.dot:
        _write(args.dot, dependency_graph_to_dot(graph))
    if is_weakly_acyclic(graph):
        print("weakly acyclic")
        return EXIT_OK
    print("not weakly acyclic")
    return EXIT_FALSE


def _limits(args) -> BuildLimits:
    return make_limits(args.max_states, args.max_depth, args.max_run_domain)


def cmd_build(args) -> int:
    spec = parse_kab(_read(args.kab), check_consistency=False)
    ts = build_ts(spec, args.semantics, _limits(args))
    summary = ts.summary()
    print(f"{args.semantics}: {summary['states']} states, {summary['edges']} edges, "
          f"{summary['temp_states']} intermediate")
    if args.dot:
        _write(args.dot, ts_to_dot(ts))
    if args.json:
        _write(args.json, ts_to_json(ts))
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = parse_kab(_read(args.kab), check_consistency=False)
    properties = parse_properties(_read(args.prop))
    response = verify_properties(
        spec, properties, args.semantics, args.query_mode,
        args.require_it_fragment, _limits(args),
    )
    for warning in response.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    for result in response.results:
        print(f"{result.name}: {'true' if result.verdict else 'false'}")
    return EXIT_OK if all(r.verdict for r in response.results) else EXIT_FALSE


def cmd_repairs(args) -> int:
    spec = parse_kab(_read(args.kab), check_consistency=False)
    abox = parse_abox(_read(args.abox))
    repairs = b_repairs(abox, spec.tbox) if args.kind == "b" else (c_repair(abox, spec.tbox),)
    for repair in repairs:
        print("{" + ", ".join(str(a) for a in repair.assertions) + "}")
    return EXIT_OK


def cmd_translate_tau(args) -> int:
    print(format_properties(translate_properties(parse_properties(_read(args.prop)))), end="")
    return EXIT_OK


# ============================================================
# 인자 파싱
# ============================================================

def _add_limit_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-states", type=int, default=None)
    parser.add_argument("--max-depth", type=int, default=None)
    parser.add_argument("--max-run-domain", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kab", description="KAB 검증 도구")
    parser.add_argument("-v", "--verbose", action="store_true", help="DEBUG 로그 출력")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="A0 일관성 검사")
    p.add_argument("kab")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("wa", help="weak acyclicity 검사")
    p.add_argument("kab")
    p.add_argument("--dot", default=None)
    p.set_defaults(handler=cmd_wa)

    p = sub.add_parser("build", help="전이 시스템 빌드")
    p.add_argument("kab")
    p.add_argument("--semantics", choices=SEMANTICS, default="standard")
    _add_limit_options(p)
    p.add_argument("--dot", default=None)
    p.add_argument("--json", default=None)
    p.set_defaults(handler=cmd_build)

    p = sub.add_parser("verify", help="속성 모델 체킹")
    p.add_argument("kab")
    p.add_argument("prop")
    p.add_argument("--semantics", choices=SEMANTICS, default="standard")
    p.add_argument("--query-mode", choices=("certain", "cqa"), default=None)
    p.add_argument("--require-it-fragment", action="store_true")
    _add_limit_options(p)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("repairs", help="ABox repair 계산")
    p.add_argument("kab")
    p.add_argument("--abox", required=True)
    p.add_argument("--kind", choices=("b", "c"), default="b")
    p.set_defaults(handler=cmd_repairs)

    p = sub.add_parser("translate-tau", help="τ 변환 출력")
    p.add_argument("prop")
    p.set_defaults(handler=cmd_translate_tau)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        if any(getattr(args, k, None) is not None and getattr(args, k) <= 0
               for k in ("max_states", "max_depth", "max_run_domain")):
            raise KabSemanticError("limits must be positive")
        return args.handler(args)
    except INPUT_ERRORS as e:
        print(f"error [{e.code}]: {e.message}", file=sys.stderr)
        return EXIT_USAGE
    except LimitExceeded as e:
        print(f"error [{e.code}]: {e.message}", file=sys.stderr)
        return EXIT_LIMIT
    except InconsistentInitialAbox as e:
        print(f"error [{e.code}]: {e.message}", file=sys.stderr)
        return EXIT_FALSE
    except KabToolkitError as e:
        print(f"error [{e.code}]: {e.message}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
