"""BLIF subset frontend and gate-level/RTL agreement."""

from __future__ import annotations

import pytest

from dctforge import expr as ex
from dctforge.blif import parse_blif
from dctforge.circuit import make_state_spec
from dctforge.detect import compute_dct
from dctforge.engine import ExploreConfig, Mode
from dctforge.errors import (DuplicateName, ParseError, UndrivenSignal,
                             UnsupportedDirective)

from bruteforce import BitPlanes, support_leaves


def test_buffer_cover():
    c = parse_blif(".model buf\n.inputs a\n.outputs y\n.names a y\n1 1\n.end\n")
    net = dict((n, e) for n, _, e in c.nets)["y"]
    assert net is ex.ref("a", 1)


def test_single_latch():
    c = parse_blif(".model l\n.inputs d\n.outputs q\n.latch d q 0\n.end\n")
    reg = c.registers[0]
    assert (reg.name, reg.width, reg.reset_value) == ("q", 1, 0)
    assert reg.next is ex.ref("d", 1)


def test_latch_with_clock_form():
    c = parse_blif(".model l\n.inputs d clk\n.outputs q\n"
                   ".latch d q re clk 1\n.end\n")
    assert c.registers[0].reset_value == 1


def test_constant_covers():
    c = parse_blif(".model k\n.outputs t f\n.names t\n1\n.names f\n.end\n")
    nets = {n: e for n, _, e in c.nets}
    assert ex.evaluate(nets["t"], {}) == 1
    assert ex.evaluate(nets["f"], {}) == 0


def test_dash_expansion_semantics():
    text = (".model m\n.inputs a b c\n.outputs y\n"
            ".names a b c y\n1-0 1\n01- 1\n.end\n")
    c = parse_blif(text)
    y = {n: e for n, _, e in c.nets}["y"]
    leaves = support_leaves(y)
    bp = BitPlanes(leaves)
    for k in range(bp.count):
        env = bp.assignment_env(k)
        a = env[("ref", "a")]
        b = env[("ref", "b")]
        cc = env[("ref", "c")]
        want = int((a and not cc) or ((not a) and b))
        assert ex.evaluate(y, env) == want
    # Each product references every input of the cover (minterm expansion).
    assert y.op == "or"


def test_gate_level_ima_structure(ima_gate):
    assert len(ima_gate.registers) == 3
    assert [r.name for r in ima_gate.registers] == ["q2", "q1", "q0"]
    assert all(r.width == 1 for r in ima_gate.registers)
    assert ima_gate.input_widths() == {"inValid": 1}


def test_frontend_agreement_rs_trans_dct(ima, ima_gate):
    """The hand bit-blasted netlist and the RTL version must agree on
    reachable states, the transition relation, and the don't-care set."""
    cfg_rtl = ExploreConfig(state_spec=make_state_spec(ima, ["pcmSq"]),
                            depth=7, mode=Mode.BFS_PRUNE,
                            monitored_outputs=("outValid",))
    cfg_gate = ExploreConfig(
        state_spec=make_state_spec(ima_gate, ["q2", "q1", "q0"]),
        depth=7, mode=Mode.BFS_PRUNE, monitored_outputs=("outValid",))
    rep_rtl = compute_dct(ima, cfg_rtl)
    rep_gate = compute_dct(ima_gate, cfg_gate)
    assert rep_rtl.rs == rep_gate.rs
    assert rep_rtl.trans == rep_gate.trans
    assert rep_rtl.dct == rep_gate.dct
    assert rep_gate.dct == {(6, 0), (7, 0)}


def test_unsupported_directive():
    with pytest.raises(UnsupportedDirective):
        parse_blif(".model m\n.inputs a\n.outputs y\n.gate AND a y\n.end\n")


def test_undriven_signal():
    with pytest.raises(UndrivenSignal):
        parse_blif(".model m\n.inputs a\n.outputs y\n.names a ghost y\n11 1\n.end\n")


def test_offset_rows_rejected():
    with pytest.raises(ParseError):
        parse_blif(".model m\n.inputs a\n.outputs y\n.names a y\n1 0\n.end\n")


def test_duplicate_driver():
    with pytest.raises(DuplicateName):
        parse_blif(".model m\n.inputs a\n.outputs y\n"
                   ".names a y\n1 1\n.names a y\n0 1\n.end\n")


def test_missing_end():
    with pytest.raises(ParseError):
        parse_blif(".model m\n.inputs a\n.outputs a\n")


def test_continuation_lines():
    c = parse_blif(".model m\n.inputs a b \\\nc\n.outputs y\n"
                   ".names a b c y\n111 1\n.end\n")
    assert len(c.inputs) == 3
