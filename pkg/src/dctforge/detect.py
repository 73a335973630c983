"""Don't-care transition computation and Trojan detection.

A don't-care transition (DCT) is an edge of the transition relation whose
source StateId is unreachable from reset while its destination is
reachable.  compute_dct runs two stages: a bounded forward exploration
from reset for the reachable set, then a single fully symbolic cycle for
the transition relation.  detect_trojan adds a third stage that resumes
exploration from the stage-2 frontier states whose projection is a DCT
destination, keeping their full register valuations and path constraints
(so any side effect a trigger accumulated is preserved), and reports
behavior tuples absent from the stage-1 baseline.

The forward stages honor the configured exploration mode; stage 2 always
runs full BFS, since the single symbolic step must produce the complete
transition relation and the complete frontier regardless of how stage 1
was scheduled.

oracle_analyze is the independent ground truth: exhaustive concrete
simulation over full register valuations, feasible only for small
circuits, used to cross-check the symbolic engine.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace as dc_replace
from enum import Enum

from . import expr as ex
from .circuit import (Circuit, StateSpec, decode_state, net_topo_order,
                      state_concat_expr)
from .engine import (Behavior, ExploreConfig, Kind, Metadata, Mode, SymState,
                     explore, project, reset_state, symbolic_state)
from .errors import StageThreeExplosion, TooLargeForOracle
from .solve import min_value, pc_sat

__all__ = ["DctWitness", "DctReport", "TrojanReport", "Verdict",
           "compute_dct", "detect_trojan", "diff_behaviors",
           "oracle_analyze", "oracle_dct", "replay_dct_witness",
           "ORACLE_BITS_CAP"]

ORACLE_BITS_CAP = 20


class Verdict(Enum):
    TROJAN_DETECTED = "TrojanDetected"
    NO_DCT = "NoDct"
    CLEAN = "Clean"


@dataclass(frozen=True)
class DctWitness:
    source: int
    inputs: dict[str, int]
    registers: dict[str, int]  # full source register valuation


@dataclass
class DctReport:
    rs: set[int]
    trans: set[tuple[int, int]]
    dct: set[tuple[int, int]]
    dest: set[int]
    witnesses: dict[tuple[int, int], DctWitness]
    constraint_dumps: dict[tuple[int, int], str]
    stage1: Metadata
    stage2: Metadata

    @property
    def paths_explored(self) -> int:
        return self.stage1.paths_explored + self.stage2.paths_explored

    @property
    def paths_pruned(self) -> int:
        return self.stage1.paths_pruned + self.stage2.paths_pruned


@dataclass
class TrojanReport:
    dct: DctReport
    rbs: set[Behavior]  # stage-1 baseline
    per_dest: dict[int, tuple[set[Behavior], set[Behavior]]]  # dest -> (RBS', DBS)
    verdict: Verdict
    stage3_paths: int = 0

    @property
    def dbs(self) -> set[Behavior]:
        out: set[Behavior] = set()
        for _, d in self.per_dest.values():
            out |= d
        return out


def _source_var_expr(c: Circuit, spec: StateSpec) -> ex.Expr:
    """The stage-2 initial symbolic state as an expression (the variables
    symbolic_state introduced for the spec registers)."""
    regs = c.register_map()
    parts = {n: ex.var(n, regs[n].width, -1) for n in spec.registers}
    return state_concat_expr(spec, parts)


def _extract_witness(c: Circuit, spec: StateSpec, state: SymState,
                     source: int, cfg: ExploreConfig) -> DctWitness:
    """Deterministic witness: pin the source StateId, then take the
    lexicographically smallest feasible value for each input and each
    non-spec register, in declaration order."""
    src_expr = _source_var_expr(c, spec)
    pc = state.pc + (ex.eq(src_expr, ex.const(spec.total_width, source)),)
    inputs: dict[str, int] = {}
    for name, w in c.inputs:
        v = min_value(ex.var(name, w, 0), pc, limits=cfg.limits)
        inputs[name] = v
        pc = pc + (ex.eq(ex.var(name, w, 0), ex.const(w, v)),)
    registers = dict(decode_state(c, spec, source))
    for r in c.registers:
        if r.name in registers:
            continue
        v = min_value(ex.var(r.name, r.width, -1), pc, limits=cfg.limits)
        registers[r.name] = v
        pc = pc + (ex.eq(ex.var(r.name, r.width, -1), ex.const(r.width, v)),)
    return DctWitness(source, inputs, registers)


def _stage2_config(cfg: ExploreConfig) -> ExploreConfig:
    return dc_replace(cfg, depth=1, mode=Mode.BFS)


def _run_stages(c: Circuit, cfg: ExploreConfig) -> tuple[Metadata, Metadata]:
    stage1 = explore(c, [reset_state(c)], cfg, Kind.REACH)
    stage2 = explore(c, [symbolic_state(c, cfg.state_spec)],
                     _stage2_config(cfg), Kind.STATES)
    return stage1, stage2


def _build_dct_report(c: Circuit, cfg: ExploreConfig, stage1: Metadata,
                      stage2: Metadata) -> DctReport:
    spec = cfg.state_spec
    rs = set(stage1.rs)
    trans = set(stage2.trans)
    dct = {(a, b) for (a, b) in trans if a not in rs and b in rs}
    dest = {b for _, b in dct}
    witnesses: dict[tuple[int, int], DctWitness] = {}
    dumps: dict[tuple[int, int], str] = {}
    src_expr = _source_var_expr(c, spec)
    s2cfg = _stage2_config(cfg)
    for edge in sorted(dct):
        a, b = edge
        for st in stage2.sym_states:
            if project(st, spec, s2cfg) != {b}:
                continue
            pinned = st.pc + (ex.eq(src_expr, ex.const(spec.total_width, a)),)
            if not pc_sat(pinned, cfg.limits,
                          [st.witness_env] if st.witness_env else ()):
                continue
            witnesses[edge] = _extract_witness(c, spec, st, a, cfg)
            dumps[edge] = "\n".join(ex.pp(conj) for conj in st.pc)
            break
    return DctReport(rs, trans, dct, dest, witnesses, dumps, stage1, stage2)


def compute_dct(c: Circuit, cfg: ExploreConfig) -> DctReport:
    """Two-stage DCT detection: bounded reach from reset, one symbolic
    cycle for the transition relation, then the unreachable-to-reachable
    filter.  Each DCT edge carries a concrete witness and the
    pretty-printed path constraint of the path that produced it."""
    stage1, stage2 = _run_stages(c, cfg)
    return _build_dct_report(c, cfg, stage1, stage2)


def diff_behaviors(base: set[Behavior], probe: set[Behavior]) -> set[Behavior]:
    """Behaviors in base that are absent from probe, compared on
    (src, dst, output, value); witnesses are ignored for membership."""
    return set(base) - set(probe)


def detect_trojan(c: Circuit, cfg: ExploreConfig) -> TrojanReport:
    """Three-stage detection.  Stage 3 starts from stage-2 frontier states
    projecting into a DCT destination and reports every behavior tuple not
    observed in stage 1."""
    stage1, stage2 = _run_stages(c, cfg)
    report = _build_dct_report(c, cfg, stage1, stage2)
    if not report.dct:
        return TrojanReport(report, set(stage1.rbs), {}, Verdict.NO_DCT)

    spec = cfg.state_spec
    s2cfg = _stage2_config(cfg)
    selected: list[tuple[int, SymState]] = []
    for st in stage2.sym_states:
        proj = project(st, spec, s2cfg)
        if len(proj) == 1:
            d = next(iter(proj))
            if d in report.dest:
                selected.append((d, st))
    if len(selected) > cfg.path_cap:
        raise StageThreeExplosion(len(selected), cfg.path_cap)

    per_dest: dict[int, tuple[set[Behavior], set[Behavior]]] = {}
    stage3_paths = 0
    for d in sorted(report.dest):
        rbs_d: set[Behavior] = set()
        for dd, st in selected:
            if dd != d:
                continue
            meta = explore(c, [dc_replace(st, num_steps=0)], cfg, Kind.REACH)
            rbs_d |= meta.rbs
            stage3_paths += meta.paths_explored
        per_dest[d] = (rbs_d, diff_behaviors(rbs_d, stage1.rbs))

    deviant = any(dbs for _, dbs in per_dest.values())
    verdict = Verdict.TROJAN_DETECTED if deviant else Verdict.CLEAN
    return TrojanReport(report, set(stage1.rbs), per_dest, verdict,
                        stage3_paths)


def _oracle_step(c: Circuit, valuation: dict[str, int], inputs: dict[str, int],
                 out_names: tuple[str, ...] = ()) -> tuple[dict[str, int],
                                                           dict[str, int]]:
    """One concrete clock cycle: returns (next valuation, output values)."""
    env: dict[tuple, int] = {}
    for name, value in inputs.items():
        env[("ref", name)] = value
    for name, value in valuation.items():
        env[("ref", name)] = value
    for name, _, e in net_topo_order(c):
        env[("ref", name)] = ex.evaluate(e, env)
    out_map = c.output_exprs()
    outputs = {name: ex.evaluate(out_map[name], env) for name in out_names}
    nxt = {r.name: ex.evaluate(r.next, env) for r in c.registers}
    return nxt, outputs


def _live_inputs(c: Circuit, monitored: tuple[str, ...]) -> set[str]:
    """Inputs referenced (transitively) by register next-state logic, nets,
    or a monitored output; the rest cannot influence the analysis."""
    roots = [r.next for r in c.registers] + [e for _, _, e in c.nets]
    out_map = c.output_exprs()
    roots += [out_map[n] for n in monitored]
    names = {node.aux[0] for node in ex.postorder(roots) if node.op == "ref"}
    return {n for n, _ in c.inputs if n in names}


def _input_assignments(c: Circuit,
                       monitored: tuple[str, ...]) -> list[dict[str, int]]:
    """All assignments over the live inputs; dead inputs are pinned to 0,
    which cannot change any recorded value."""
    live = _live_inputs(c, monitored)
    names = [n for n, _ in c.inputs]
    domains = [range(1 << w) if n in live else (0,) for n, w in c.inputs]
    return [dict(zip(names, combo)) for combo in itertools.product(*domains)]


def oracle_analyze(c: Circuit, spec: StateSpec, depth: int | None,
                   monitored: tuple[str, ...] | None = None) -> Metadata:
    """Exhaustive concrete ground truth.

    RS and RBS come from a depth-bounded breadth-first simulation over
    full register valuations from reset (depth None runs to the valuation
    fixpoint); Trans comes from enumerating every (valuation, input) pair.
    The Metadata schema matches engine.explore so results diff directly.
    """
    reg_bits = sum(r.width for r in c.registers)
    input_bits = sum(w for _, w in c.inputs)
    if reg_bits + input_bits > ORACLE_BITS_CAP:
        raise TooLargeForOracle(reg_bits + input_bits, ORACLE_BITS_CAP)
    if monitored is None:
        monitored = tuple(n for n, _, _ in c.outputs)

    assignments = _input_assignments(c, monitored)
    reg_names = [r.name for r in c.registers]

    def proj(valuation: dict[str, int]) -> int:
        value = 0
        regs = c.register_map()
        for n in spec.registers:
            value = (value << regs[n].width) | valuation[n]
        return value

    reset_val = {r.name: r.reset_value for r in c.registers}
    rs: set[int] = {proj(reset_val)}
    rbs: set[Behavior] = set()
    visited = {tuple(reset_val[n] for n in reg_names)}
    frontier = [reset_val]
    layer = 0
    last_new_layer = 0
    while frontier and (depth is None or layer < depth):
        layer += 1
        next_frontier = []
        new_this_layer = False
        for valuation in frontier:
            s1 = proj(valuation)
            for inputs in assignments:
                nxt, outs = _oracle_step(c, valuation, inputs, monitored)
                s2 = proj(nxt)
                if s2 not in rs:
                    new_this_layer = True
                rs.add(s2)
                witness = tuple(sorted(inputs.items()))
                for name in monitored:
                    rbs.add(Behavior(s1, s2, name, outs[name], witness))
                key = tuple(nxt[n] for n in reg_names)
                if key not in visited:
                    visited.add(key)
                    next_frontier.append(nxt)
        frontier = next_frontier
        if new_this_layer:
            last_new_layer = layer
        if depth is None and not frontier:
            break

    trans: set[tuple[int, int]] = set()
    domains = [range(1 << r.width) for r in c.registers]
    for combo in itertools.product(*domains):
        valuation = dict(zip(reg_names, combo))
        s1 = proj(valuation)
        for inputs in assignments:
            nxt, _ = _oracle_step(c, valuation, inputs)
            trans.add((s1, proj(nxt)))

    return Metadata(kind=Kind.REACH, rs=rs, trans=trans, rbs=rbs,
                    sym_states=[], discovered_diameter=last_new_layer,
                    paths_explored=0, paths_pruned=0)


def oracle_dct(meta: Metadata) -> set[tuple[int, int]]:
    return {(a, b) for (a, b) in meta.trans
            if a not in meta.rs and b in meta.rs}


def replay_dct_witness(c: Circuit, spec: StateSpec,
                       edge: tuple[int, int], witness: DctWitness) -> bool:
    """Concretely simulate one cycle from the witness register valuation
    under the witness inputs; True iff the claimed destination is reached."""
    nxt, _ = _oracle_step(c, dict(witness.registers), dict(witness.inputs))
    regs = c.register_map()
    value = 0
    for n in spec.registers:
        value = (value << regs[n].width) | nxt[n]
    return witness.source == edge[0] and value == edge[1]
