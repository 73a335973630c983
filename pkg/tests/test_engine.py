"""Exploration engine: stepping semantics, scheduling modes, metadata."""

from __future__ import annotations

import random
from dataclasses import replace as dc_replace

import pytest

from dctforge import corpus
from dctforge import expr as ex
from dctforge.circuit import Circuit, Register, make_state_spec
from dctforge.detect import oracle_analyze
from dctforge.engine import (FIXPOINT, ExploreConfig, Kind, Mode, explore,
                             project, reset_state, step_cycle, symbolic_state)
from dctforge.errors import PathExplosion
from dctforge.rtl import parse_rtl
from dctforge.trojanlab import gen_random_fsm

from conftest import config_for


def behavior_tuples(meta):
    return {(b.src, b.dst, b.output, b.value) for b in meta.rbs}


def test_reset_state_ima(ima):
    s = reset_state(ima)
    assert s.regs["pcmSq"] is ex.const(3, 0)
    assert s.pc == ()
    assert s.num_steps == 0


def test_reset_state_no_registers():
    c = parse_rtl("circuit id\ninput a:1\noutput y:1 = a\n")
    assert reset_state(c).regs == {}


def test_reset_state_trojan_registers(ima_trojan):
    s = reset_state(ima_trojan)
    assert s.regs["trojan_state"] is ex.const(2, 0)
    assert s.regs["trojan_ena"] is ex.const(1, 0)


def test_symbolic_state_covers_domain(ima, ima_cfg):
    s = symbolic_state(ima, ima_cfg.state_spec)
    assert project(s, ima_cfg.state_spec, ima_cfg) == set(range(8))


def test_symbolic_state_one_bit_register():
    c = parse_rtl("circuit t\nreg r:1 reset 0 next ~r\noutput y:1 = r\n")
    cfg = config_for(c, ["r"], depth=1)
    s = symbolic_state(c, cfg.state_spec)
    assert project(s, cfg.state_spec, cfg) == {0, 1}


def test_step_from_reset_splits_on_input(ima, ima_cfg):
    succs = step_cycle(ima, reset_state(ima), ima_cfg)
    projections = sorted(sorted(project(s, ima_cfg.state_spec, ima_cfg))
                         for s in succs)
    assert projections == [[0], [1]]
    assert all(s.num_steps == 1 for s in succs)


def test_step_symbolic_reaches_dct_edges(ima, ima_cfg):
    meta = explore(ima, [symbolic_state(ima, ima_cfg.state_spec)],
                   dc_replace(ima_cfg, depth=1, mode=Mode.BFS), Kind.STATES)
    assert {(6, 0), (7, 0)} <= meta.trans


def test_step_self_loop_single_successor():
    c = parse_rtl("circuit s\nreg r:2 reset 3 next r\noutput y:2 = r\n")
    cfg = config_for(c, ["r"], depth=1)
    succs = step_cycle(c, reset_state(c), cfg)
    assert len(succs) == 1
    assert project(succs[0], cfg.state_spec, cfg) == {3}


def test_project_examples(ima, ima_cfg):
    spec = ima_cfg.state_spec
    assert project(reset_state(ima), spec, ima_cfg) == {0}
    meta = explore(ima, [symbolic_state(ima, spec)],
                   dc_replace(ima_cfg, depth=1, mode=Mode.BFS), Kind.STATES)
    default_succs = [s for s in meta.sym_states if s.origin in (6, 7)]
    assert default_succs
    assert project(default_succs[0], spec, ima_cfg) == {0}


def test_explore_ima_reach(ima, ima_cfg):
    meta = explore(ima, [reset_state(ima)], ima_cfg, Kind.REACH)
    assert meta.rs == {0, 1, 2, 3, 4, 5}
    assert behavior_tuples(meta) == {
        (0, 0, "outValid", 0), (0, 1, "outValid", 0), (1, 2, "outValid", 0),
        (2, 3, "outValid", 0), (3, 4, "outValid", 0), (4, 5, "outValid", 0),
        (5, 0, "outValid", 1)}


def test_explore_depth_zero_returns_init_projections(ima, ima_cfg):
    meta = explore(ima, [reset_state(ima)], dc_replace(ima_cfg, depth=0),
                   Kind.REACH)
    assert meta.rs == {0}
    assert meta.paths_explored == 0


def test_states_mode_returns_frontier(ima, ima_cfg):
    meta = explore(ima, [symbolic_state(ima, ima_cfg.state_spec)],
                   dc_replace(ima_cfg, depth=1, mode=Mode.BFS), Kind.STATES)
    assert len(meta.sym_states) == 8  # 6 used arms (one splits in two) + default
    assert len(meta.trans) == 9
    for s in meta.sym_states:
        assert s.num_steps == 1


def test_monotonicity_of_bounded_reachability(ima, ima_cfg, counter,
                                              counter_cfg):
    for circuit, cfg in ((ima, ima_cfg), (counter, counter_cfg)):
        prev: set[int] = set()
        for depth in range(0, 9):
            meta = explore(circuit, [reset_state(circuit)],
                           dc_replace(cfg, depth=depth), Kind.REACH)
            assert prev <= meta.rs
            prev = meta.rs


def test_prune_equivalent_to_bfs_and_cheaper(ima, ima_cfg):
    bfs = explore(ima, [reset_state(ima)],
                  dc_replace(ima_cfg, mode=Mode.BFS), Kind.REACH)
    prune = explore(ima, [reset_state(ima)],
                    dc_replace(ima_cfg, mode=Mode.BFS_PRUNE), Kind.REACH)
    assert bfs.rs == prune.rs
    assert behavior_tuples(bfs) == behavior_tuples(prune)
    assert prune.paths_explored < bfs.paths_explored


def test_partial_rs_subset_of_bfs(ima, ima_cfg):
    partial = explore(ima, [reset_state(ima)],
                      dc_replace(ima_cfg, mode=Mode.PARTIAL), Kind.REACH)
    bfs = explore(ima, [reset_state(ima)],
                  dc_replace(ima_cfg, mode=Mode.BFS), Kind.REACH)
    assert partial.rs <= bfs.rs
    assert partial.rs == {0}  # the else-first single path never leaves idle


def test_fixpoint_reports_diameter(ima, ima_cfg):
    meta = explore(ima, [reset_state(ima)], dc_replace(ima_cfg, depth=FIXPOINT),
                   Kind.REACH)
    assert meta.rs == {0, 1, 2, 3, 4, 5}
    assert meta.discovered_diameter == 5
    # The closing layer still recorded state 5's outgoing behavior.
    assert (5, 0, "outValid", 1) in behavior_tuples(meta)


def test_depth_not_converged_flag(ima, ima_cfg):
    shallow = explore(ima, [reset_state(ima)], dc_replace(ima_cfg, depth=3),
                      Kind.REACH)
    assert not shallow.depth_converged
    deep = explore(ima, [reset_state(ima)], dc_replace(ima_cfg, depth=7),
                   Kind.REACH)
    assert deep.depth_converged


def test_prune_warning_when_nonspec_feeds_spec(caplog):
    src = """\
circuit gated
input go:1
reg mode:1 reset 0 next go
reg st:2 reset 0 next mode ? st + 2'd1 : st
output y:2 = st
"""
    c = parse_rtl(src)
    cfg = config_for(c, ["st"], depth=4)
    with caplog.at_level("WARNING", logger="dctforge.engine"):
        explore(c, [reset_state(c)], cfg, Kind.REACH)
    assert any("outside the state spec" in r.message for r in caplog.records)


def test_path_explosion_cap(ima, ima_cfg):
    tiny = dc_replace(ima_cfg, path_cap=1)
    with pytest.raises(PathExplosion):
        explore(ima, [symbolic_state(ima, ima_cfg.state_spec)],
                dc_replace(tiny, depth=1, mode=Mode.BFS), Kind.STATES)


def test_assumes_restrict_next_state():
    src = """\
circuit a
input d:2
reg r:2 reset 0 next d
output y:2 = r
"""
    c = parse_rtl(src)
    cfg = config_for(c, ["r"], depth=1,
                     assumes=(ex.ult(ex.ref("r", 2), ex.const(2, 2)),))
    meta = explore(c, [reset_state(c)], cfg, Kind.REACH)
    assert meta.rs == {0, 1}


def test_determinism_across_worker_counts(ima_trojan):
    cfg1 = config_for(ima_trojan, ["pcmSq"], jobs=1)
    cfg4 = config_for(ima_trojan, ["pcmSq"], jobs=4)
    m1 = explore(ima_trojan, [reset_state(ima_trojan)], cfg1, Kind.REACH)
    m4 = explore(ima_trojan, [reset_state(ima_trojan)], cfg4, Kind.REACH)
    assert m1.rs == m4.rs
    assert behavior_tuples(m1) == behavior_tuples(m4)
    assert m1.paths_explored == m4.paths_explored
    assert m1.paths_pruned == m4.paths_pruned


def test_engine_matches_oracle_on_random_fsms():
    rng = random.Random(4242)
    for _ in range(15):
        seed = rng.randrange(1 << 30)
        c = gen_random_fsm(seed, state_bits=rng.randrange(2, 5),
                           input_bits=rng.randrange(1, 4),
                           reachable_fraction=rng.choice([0.4, 0.6, 0.8]),
                           dct_count=rng.randrange(0, 2))
        spec = make_state_spec(c, ["st"])
        depth = 1 << spec.total_width
        cfg = config_for(c, ["st"], depth=depth)
        meta = explore(c, [reset_state(c)], cfg, Kind.REACH)
        om = oracle_analyze(c, spec, depth)
        assert meta.rs == om.rs, seed
        assert behavior_tuples(meta) == {(b.src, b.dst, b.output, b.value)
                                         for b in om.rbs}, seed
        s2 = explore(c, [symbolic_state(c, spec)],
                     dc_replace(cfg, depth=1, mode=Mode.BFS), Kind.STATES)
        assert s2.trans == om.trans, seed


def test_gate_level_enumeration_stepping(ima_gate):
    cfg = config_for(ima_gate, ["q2", "q1", "q0"], depth=1)
    succs = step_cycle(ima_gate, reset_state(ima_gate), cfg)
    projections = sorted(sorted(project(s, cfg.state_spec, cfg))
                         for s in succs)
    assert projections == [[0], [1]]
