"""
내보내기 모듈
- 전이 시스템 JSON (TsExport 스키마, 같은 입력이면 바이트 단위 동일)
- 전이 시스템 / 의존 그래프 DOT
"""
from typing import List

from .analysis import DependencyGraph
from .dllite import term_key
from .schema import CallExport, EdgeExport, StateExport, TsExport
from .ts import RepairLabel, TransitionSystem


def ts_to_export(ts: TransitionSystem) -> TsExport:
    states = [
        StateExport(
            id=i,
            abox=[str(a) for a in state.abox.assertions],
            map=[CallExport(call=str(c), value=str(v)) for c, v in state.call_map.pairs],
        )
        for i, state in enumerate(ts.states)
    ]
    edges = [EdgeExport(src=src, dst=dst, label=str(label)) for src, label, dst in ts.edges]
    domain = [str(t) for t in sorted(ts.active_domain, key=term_key)]
    return TsExport(
        semantics=ts.semantics, states=states, edges=edges,
        initial=ts.initial, active_domain=domain, limits=ts.limits,
    )


def ts_to_json(ts: TransitionSystem) -> str:
    return ts_to_export(ts).model_dump_json(indent=2) + "\n"


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _quote(text: str) -> str:
    return '"' + _escape(text) + '"'


def ts_to_dot(ts: TransitionSystem) -> str:
    """상태 레이블은 ABox, repair 간선은 점선, State(temp) 상태는 회색"""
    lines: List[str] = [f"digraph {_quote('ts_' + ts.semantics)} {{", "  node [shape=box];"]
    for i, state in enumerate(ts.states):
        text = "\\n".join(_escape(str(a)) for a in state.abox.assertions) or "∅"
        style = ", style=filled, fillcolor=lightgrey" if state.is_temp else ""
        shape = ", peripheries=2" if i == ts.initial else ""
        lines.append(f'  s{i} [label="s{i}\\n{text}"{style}{shape}];')
    for src, label, dst in ts.edges:
        dashed = ", style=dashed" if isinstance(label, RepairLabel) else ""
        lines.append(f"  s{src} -> s{dst} [label={_quote(str(label))}{dashed}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dependency_graph_to_dot(graph: DependencyGraph) -> str:
    """special 간선은 빨간색과 '*' 레이블"""
    def node_id(node) -> str:
        return _quote(f"{node[0]}[{node[1]}]")

    lines: List[str] = ["digraph dependency {"]
    lines.extend(f"  {node_id(n)};" for n in sorted(graph.nodes))
    for src, dst in sorted(graph.ordinary_edges):
        lines.append(f"  {node_id(src)} -> {node_id(dst)};")
    for src, dst in sorted(graph.special_edges):
        lines.append(f"  {node_id(src)} -> {node_id(dst)} [label=\"*\", color=red];")
    lines.append("}")
    return "\n".join(lines) + "\n"
