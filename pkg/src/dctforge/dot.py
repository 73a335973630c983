"""DOT rendering of the analyzed state-transition graph.

Reachable states are white-filled, unreachable ones black-filled, and
don't-care edges dashed.  Nodes and edges are emitted in StateId order so
the output is deterministic.
"""

from __future__ import annotations

__all__ = ["render_stg"]


def render_stg(name: str, total_width: int, rs: set[int],
               trans: set[tuple[int, int]], dct: set[tuple[int, int]]) -> str:
    lines = [f'digraph "{name}" {{', "  rankdir=LR;"]
    for state in range(1 << total_width):
        label = format(state, f"0{total_width}b")
        if state in rs:
            style = 'style=filled, fillcolor=white'
        else:
            style = 'style=filled, fillcolor=black, fontcolor=white'
        lines.append(f'  s{state} [label="{label}", {style}];')
    for a, b in sorted(trans):
        attr = " [style=dashed]" if (a, b) in dct else ""
        lines.append(f"  s{a} -> s{b}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
