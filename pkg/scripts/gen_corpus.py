#!/usr/bin/env python3
"""Regenerate the bundled corpus under src/dctforge/corpus/v1/.

The base circuits are written from the literal sources below; the Trojan
variants are produced through inject_trojan and re-serialized, so the
shipped files always match what the library would build.
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from dctforge.circuit import make_state_spec, print_rtl, validate
from dctforge.blif import parse_blif
from dctforge.rtl import parse_rtl
from dctforge.trojanlab import StuckAt, TriggerSpec, inject_trojan

OUT = Path(__file__).resolve().parents[1] / "src" / "dctforge" / "corpus" / "v1"

IMA = """\
circuit ima_adpcm_ctrl
input inValid:1
input inSamp:16
output outValid:1 = pcmSq == 3'd5
reg pcmSq:3 reset 0 next case(pcmSq){ 3'd0: inValid ? 3'd1 : 3'd0; 3'd1: 3'd2; 3'd2: 3'd3; 3'd3: 3'd4; 3'd4: 3'd5; 3'd5: 3'd0; default: 3'd0 }
"""

COUNTER = """\
circuit counter3
input en:1
output wrap:1 = cnt == 3'd7
reg cnt:3 reset 0 next en ? cnt + 3'd1 : cnt
"""

IMA_GATE = """\
# Hand bit-blasted version of ima_adpcm_ctrl: pcmSq split into q2 q1 q0.
.model ima_gate
.inputs inValid
.outputs outValid
.latch n2 q2 0
.latch n1 q1 0
.latch n0 q0 0
.names q2 q1 q0 n2
011 1
100 1
.names q2 q1 q0 n1
001 1
010 1
.names q2 q1 q0 inValid n0
0001 1
010- 1
100- 1
.names q2 q1 q0 outValid
101 1
.end
"""


def ima_variant_source(source_state: int, dest_state: int) -> str:
    """Base FSM, with an explicit arm for the trigger source when the
    default arm (to 0) does not already supply the wanted edge."""
    if dest_state == 0:
        return IMA
    arm = f"3'd{source_state}: 3'd{dest_state}; "
    return IMA.replace("default:", arm + "default:")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)

    (OUT / "ima.snl").write_text(IMA, encoding="utf-8")
    (OUT / "counter.snl").write_text(COUNTER, encoding="utf-8")
    (OUT / "ima_gate.blif").write_text(IMA_GATE, encoding="utf-8")
    validate(parse_rtl(IMA))
    validate(parse_rtl(COUNTER))
    validate(parse_blif(IMA_GATE))

    base = parse_rtl(IMA)
    spec = make_state_spec(base, ["pcmSq"])
    payload = StuckAt("outValid", 1)

    trojan = inject_trojan(
        base, TriggerSpec(frozenset({(6, 0), (7, 0)}), spec), payload)
    (OUT / "ima_trojan.snl").write_text(print_rtl(trojan), encoding="utf-8")

    variant = 0
    for source_state in (6, 7):
        for dest_state in range(6):
            variant += 1
            circuit = parse_rtl(ima_variant_source(source_state, dest_state))
            spec_v = make_state_spec(circuit, ["pcmSq"])
            injected = inject_trojan(
                circuit,
                TriggerSpec(frozenset({(source_state, dest_state)}), spec_v),
                payload)
            path = OUT / f"ima_trojan_{variant:02d}.snl"
            path.write_text(print_rtl(injected), encoding="utf-8")

    for p in sorted(OUT.iterdir()):
        print(f"wrote {p}")


if __name__ == "__main__":
    main()
