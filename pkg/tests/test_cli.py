"""
명령행 드라이버 테스트 (종료 코드, 출력)
"""
import json
import re

import pytest

from src.cli import EXIT_FALSE, EXIT_LIMIT, EXIT_OK, EXIT_USAGE, make_limits, run
from src.mucalc import is_it_fragment
from src.parser import parse_properties


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestCheckAndWa:
    """check / wa"""

    def test_check_running(self, data_file, capsys):
        assert run(["check", data_file("running.kab")]) == EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert out == ["@ax1: C disjoint D", "consistent"]

    def test_check_inconsistent(self, tmp_path, capsys):
        path = write(tmp_path, "bad.kab", "TBOX { C disjoint D; }\nABOX { C(a); D(a); }")
        assert run(["check", path]) == EXIT_FALSE
        assert capsys.readouterr().out.splitlines()[-1] == "inconsistent"

    def test_wa(self, data_file, capsys):
        assert run(["wa", data_file("running.kab")]) == EXIT_OK
        assert run(["wa", data_file("gcycle.kab")]) == EXIT_FALSE
        assert "not weakly acyclic" in capsys.readouterr().out

    def test_wa_dot(self, data_file, tmp_path):
        dot = tmp_path / "dep.dot"
        run(["wa", data_file("gcycle.kab"), "--dot", str(dot)])
        text = dot.read_text(encoding="utf-8")
        assert text.startswith("digraph dependency {")
        assert '"C[1]" -> "G[1]" [label="*", color=red];' in text


class TestBuild:
    """build"""

    def test_build_summary(self, data_file, capsys):
        assert run(["build", data_file("running.kab")]) == EXIT_OK
        assert capsys.readouterr().out.startswith("standard: 9 states,")

    def test_build_b_has_intermediate_states(self, data_file, capsys):
        assert run(["build", data_file("running.kab"), "--semantics", "b"]) == EXIT_OK
        match = re.search(r"(\d+) intermediate", capsys.readouterr().out)
        assert match is not None
        assert int(match.group(1)) > 0

    def test_limit_exceeded(self, data_file, capsys):
        assert run(["build", data_file("running.kab"), "--max-states", "2"]) == EXIT_LIMIT
        assert "LIMIT_EXCEEDED" in capsys.readouterr().err

    def test_gcycle_hits_limit(self, data_file):
        assert run(["build", data_file("gcycle.kab"), "--max-states", "200"]) == EXIT_LIMIT

    def test_non_positive_limit(self, data_file):
        assert run(["build", data_file("running.kab"), "--max-states", "0"]) == EXIT_USAGE

    def test_json_is_deterministic(self, data_file, tmp_path):
        """같은 입력이면 바이트 단위로 같은 JSON"""
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        run(["build", data_file("running.kab"), "--semantics", "eb", "--json", str(first)])
        run(["build", data_file("running.kab"), "--semantics", "eb", "--json", str(second)])
        assert first.read_bytes() == second.read_bytes()
        exported = json.loads(first.read_text(encoding="utf-8"))
        assert exported["semantics"] == "eb"
        assert exported["states"][0]["abox"] == ["C(a)"]

    def test_dot_output(self, data_file, tmp_path):
        dot = tmp_path / "ts.dot"
        run(["build", data_file("running.kab"), "--semantics", "b", "--dot", str(dot)])
        text = dot.read_text(encoding="utf-8")
        assert text.startswith('digraph "ts_b" {')
        assert "style=dashed" in text

    def test_inconsistent_initial_abox(self, tmp_path):
        path = write(tmp_path, "bad.kab", "TBOX { C disjoint D; }\nABOX { C(a); D(a); }")
        assert run(["build", path]) == EXIT_FALSE


class TestVerify:
    """verify"""

    def test_reachability_under_b(self, data_file, capsys):
        code = run(["verify", data_file("running.kab"), data_file("reach.prop"), "--semantics", "b"])
        assert code == EXIT_FALSE
        out = capsys.readouterr().out.splitlines()
        assert out == ["optimistic_d: true", "robust_d: false"]

    def test_all_true(self, data_file, tmp_path, capsys):
        prop = write(tmp_path, "p.prop", "init: [C(a)];\nstep: <>true;")
        assert run(["verify", data_file("running.kab"), prop]) == EXIT_OK
        assert capsys.readouterr().out.splitlines() == ["init: true", "step: true"]

    def test_outside_it_fragment_warns(self, data_file, tmp_path, capsys):
        prop = write(tmp_path, "p.prop", "step: <>true;")
        assert run(["verify", data_file("running.kab"), prop, "--semantics", "b"]) == EXIT_OK
        assert "IT fragment" in capsys.readouterr().err

    def test_require_it_fragment(self, data_file, tmp_path):
        prop = write(tmp_path, "p.prop", "step: <>true;")
        args = ["verify", data_file("running.kab"), prop, "--semantics", "b", "--require-it-fragment"]
        assert run(args) == EXIT_USAGE

    def test_open_property_is_usage_error(self, data_file, tmp_path, capsys):
        prop = write(tmp_path, "p.prop", "bad: mu Z.(Y | <>Z);")
        assert run(["verify", data_file("running.kab"), prop]) == EXIT_USAGE
        assert "OPEN_FORMULA" in capsys.readouterr().err


class TestErrors:
    """사용법 / 파싱 오류"""

    def test_syntax_error(self, tmp_path, capsys):
        path = write(tmp_path, "bad.kab", "TBOX {\n  C disjoint ;\n}")
        assert run(["check", path]) == EXIT_USAGE
        assert "PARSE_ERROR" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run(["check", str(tmp_path / "missing.kab")]) == EXIT_USAGE

    def test_unknown_command(self):
        assert run(["explode"]) == EXIT_USAGE

    def test_unknown_semantics(self, data_file):
        assert run(["build", data_file("running.kab"), "--semantics", "optimal"]) == EXIT_USAGE


class TestRepairsAndTau:
    """repairs / translate-tau"""

    def test_b_repairs(self, data_file, capsys):
        args = ["repairs", data_file("running.kab"), "--abox", data_file("conflict.abox")]
        assert run(args) == EXIT_OK
        assert capsys.readouterr().out.splitlines() == ["{C(a)}", "{D(a)}"]

    def test_c_repair(self, data_file, capsys):
        args = ["repairs", data_file("running.kab"), "--abox", data_file("conflict.abox"), "--kind", "c"]
        assert run(args) == EXIT_OK
        assert capsys.readouterr().out.splitlines() == ["{}"]

    def test_translate_tau(self, data_file, capsys):
        assert run(["translate-tau", data_file("running.prop")]) == EXIT_OK
        translated = parse_properties(capsys.readouterr().out)
        assert len(translated) == 12
        assert all(is_it_fragment(phi) for _, phi in translated)


class TestMakeLimits:
    def test_overrides_only_given(self):
        limits = make_limits(max_states=5)
        assert limits.max_states == 5
        assert limits.max_depth == 256

    @pytest.mark.parametrize("value", [0, -3])
    def test_rejects_non_positive(self, value):
        with pytest.raises(ValueError):
            make_limits(max_depth=value)
