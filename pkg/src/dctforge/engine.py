"""Bounded symbolic execution over circuits, one clock cycle at a time.

Every cycle injects fresh symbolic variables for the circuit inputs, then
evaluates nets, outputs, and register next-state expressions under
synchronous semantics.  Paths split on Case/Mux controls reachable from
the state-spec registers' next-state logic; whatever symbolic state
remains after splitting is resolved by enumerating the feasible next
StateId values and pinning each one into the path constraint (this is the
only splitting mechanism gate-level circuits need, since they carry no
Case/Mux nodes at all).

Exploration modes:

* BFS          -- full breadth-first exploration, layer by layer.
* BFS_PRUNE    -- BFS, but a successor whose projected state set was
                  already encountered is terminated after its metadata is
                  recorded; justified by monotonicity of bounded cut
                  reachability, and unsound only when registers outside
                  the state spec feed the state-spec logic (a structural
                  warning is logged in that case).
* PARTIAL      -- keeps exactly one successor per step (deterministic
                  first-feasible choice, taking Mux else-branches first),
                  modelling a single-path input partition.  Reachable
                  sets computed this way may be under-approximations, so
                  downstream don't-care reports may contain false
                  positives; the mode exists to demonstrate that.

Metadata kinds: Reach records the reachable StateId set and the observed
behavior tuples (source, destination, output, value) with outputs sampled
as functions of the pre-edge state and the cycle's inputs; States records
the transition relation and returns the surviving frontier so later
stages can resume from it with all side effects intact.

Depth may be an explicit cycle count or FIXPOINT, which runs until a
layer discovers no new StateId (that closing layer also guarantees every
state contributes outgoing behaviors) and reports the discovered
diameter.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace as dc_replace
from enum import Enum
from typing import Mapping

from . import expr as ex
from .circuit import (Circuit, StateSpec, decode_state, net_topo_order,
                      state_concat_expr)
from .cnf import Encoder
from .errors import (CapExceeded, DctForgeError, PathExplosion,
                     UnknownOutput)
from .sat import check_sat
from .solve import DEFAULT_VALUE_CAP, SolverLimits, all_values, min_value

__all__ = ["Mode", "Kind", "FIXPOINT", "ExploreConfig", "SymState",
           "Behavior", "Metadata", "reset_state", "symbolic_state",
           "step_cycle", "project", "explore"]

log = logging.getLogger("dctforge.engine")

FIXPOINT = None  # depth sentinel
DEFAULT_PATH_CAP = 4096


class Mode(Enum):
    BFS = "bfs"
    BFS_PRUNE = "bfs-prune"
    PARTIAL = "partial"


class Kind(Enum):
    REACH = "reach"
    STATES = "states"


@dataclass(frozen=True)
class ExploreConfig:
    state_spec: StateSpec
    depth: int | None  # clock cycles, or FIXPOINT (None)
    mode: Mode = Mode.BFS_PRUNE
    monitored_outputs: tuple[str, ...] = ()
    assumes: tuple[ex.Expr, ...] = ()
    value_cap: int = DEFAULT_VALUE_CAP
    path_cap: int = DEFAULT_PATH_CAP
    jobs: int = 1
    limits: SolverLimits = field(default_factory=SolverLimits)

    def __post_init__(self):
        if self.depth is not None and self.depth < 0:
            raise DctForgeError("depth must be >= 0 or FIXPOINT")


@dataclass(frozen=True, eq=False)
class SymState:
    """One symbolic execution path: register valuation, path constraint,
    elapsed cycles.  witness_env caches a satisfying assignment of the
    path constraint and is used only to short-circuit solver calls."""
    regs: Mapping[str, ex.Expr]
    pc: tuple[ex.Expr, ...]
    num_steps: int
    var_epoch: int
    origin: int | None = None
    witness_env: Mapping | None = None


@dataclass(frozen=True)
class Behavior:
    src: int
    dst: int
    output: str
    value: int
    witness: tuple | None = field(default=None, compare=False)


@dataclass
class Metadata:
    kind: Kind
    rs: set[int]
    trans: set[tuple[int, int]]
    rbs: set[Behavior]
    sym_states: list[SymState]
    discovered_diameter: int | None = None
    paths_explored: int = 0
    paths_pruned: int = 0
    depth_converged: bool = True


def reset_state(c: Circuit) -> SymState:
    """All registers at their reset values, empty path constraint."""
    regs = {r.name: ex.const(r.width, r.reset_value) for r in c.registers}
    return SymState(regs, (), 0, 0, witness_env={})


def symbolic_state(c: Circuit, spec: StateSpec) -> SymState:
    """Every register (in the spec or not) bound to a fresh symbolic
    variable, so one step from here covers every possible source state
    including trigger side effects in non-spec registers."""
    regs = {r.name: ex.var(r.name, r.width, -1) for r in c.registers}
    return SymState(regs, (), 0, 0, witness_env=None)


def _distinct_var_concat(e: ex.Expr) -> bool:
    """True when e is a single Var or a concatenation of distinct Vars."""
    if e.op == "var":
        return True
    if e.op != "concat":
        return False
    return (all(a.op == "var" for a in e.args)
            and len({a.aux for a in e.args}) == len(e.args))


def project(s: SymState, spec: StateSpec, cfg: ExploreConfig) -> set[int]:
    """Feasible StateId values of the spec registers under s.pc."""
    concat = ex.simplify(state_concat_expr(spec, dict(s.regs)))
    if concat.op == "const":
        return {concat.aux[0]}
    if not s.pc and _distinct_var_concat(concat):
        if (1 << concat.width) > cfg.value_cap:
            raise CapExceeded(cfg.value_cap)
        return set(range(1 << concat.width))
    return all_values(concat, s.pc, cap=cfg.value_cap, limits=cfg.limits,
                      hint_env=s.witness_env)


@dataclass
class _StepResult:
    state: SymState
    src_expr: ex.Expr               # pre-step spec concatenation
    out_exprs: dict[str, ex.Expr]   # monitored outputs, pre-edge sample


def _first_split_node(roots: list[ex.Expr]) -> ex.Expr | None:
    """Outermost Case with a symbolic scrutinee or Mux with a symbolic
    condition, in deterministic preorder over the given roots."""
    seen: set[ex.Expr] = set()
    for root in roots:
        stack = [root]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            if node.op == "case" and node.args[0].op != "const":
                return node
            if node.op == "mux" and node.args[0].op != "const":
                return node
            stack.extend(reversed(node.args))
    return None


def _alternatives(node: ex.Expr, mode: Mode) -> list[tuple[ex.Expr, ex.Expr]]:
    """(guard, replacement) pairs for one Case/Mux node, in the order the
    scheduler should try them."""
    if node.op == "mux":
        cond, then, els = node.args
        pairs = [(cond, then), (ex.not_(cond), els)]
        if mode is Mode.PARTIAL:
            pairs.reverse()
        return pairs
    scrut = node.args[0]
    arms = sorted(zip(node.aux, node.args[1:-1]), key=lambda kv: kv[0])
    pairs = [(ex.eq(scrut, ex.const(scrut.width, k)), arm) for k, arm in arms]
    default_guard = ex.and_all(
        [ex.ne(scrut, ex.const(scrut.width, k)) for k, _ in arms])
    pairs.append((default_guard, node.args[-1]))
    return pairs


def _guard_extensions(guard: ex.Expr, base_env: Mapping) -> list[dict]:
    """Candidate environments extending base_env over the guard's unbound
    variables; tried before falling back to the SAT solver."""
    unbound = [n for n in ex.support(guard)
               if n.op == "var" and ("var",) + n.aux not in base_env]
    if not unbound:
        return [dict(base_env)]
    candidates = []
    # Structural shot: eq(x, const) where x is a Var or a Var concatenation.
    if guard.op == "eq":
        a, b = guard.args
        if b.op == "const" and _distinct_var_concat(a):
            env = dict(base_env)
            parts = (a,) if a.op == "var" else a.args
            shift = a.width
            for part in parts:
                shift -= part.width
                env[("var",) + part.aux] = (b.aux[0] >> shift) & ex.mask(part.width)
            for v in unbound:
                env.setdefault(("var",) + v.aux, 0)
            candidates.append(env)
    for fill in (0, None, 1):  # None = per-variable all-ones
        env = dict(base_env)
        for v in unbound:
            env[("var",) + v.aux] = ex.mask(v.width) if fill is None else fill
        candidates.append(env)
    return candidates


def _sat_with_env(pc: tuple, limits: SolverLimits,
                  candidates: list[Mapping]) -> tuple[bool, dict | None]:
    """Satisfiability of pc plus a satisfying assignment when available."""
    conjuncts = []
    for c in pc:
        s = ex.simplify(c)
        if s.op == "const":
            if s.aux[0] == 0:
                return False, None
            continue
        conjuncts.append(s)
    if not conjuncts:
        return True, dict(candidates[0]) if candidates else {}
    for env in candidates:
        try:
            if all(ex.evaluate(c, env) == 1 for c in conjuncts):
                return True, dict(env)
        except KeyError:
            continue
    enc = Encoder(limits.clause_cap)
    lits = [enc.bits(c)[0] for c in conjuncts]
    for lit in lits:
        enc.assert_lit(lit)
    formula = enc.to_formula()
    if limits.dumper is not None:
        limits.dumper.dump(formula, "step-feasibility")
    outcome = check_sat(formula, limits.conflict_limit)
    if not outcome.is_sat:
        return False, None
    env = {}
    for conj in conjuncts:
        for leaf in ex.support(conj):
            if leaf.op != "var":
                continue
            key = ("var",) + leaf.aux
            if key in env:
                continue
            value = 0
            for i in range(leaf.width):
                if outcome.lit_value(formula.bit_map[(leaf, i)]):
                    value |= 1 << i
            env[key] = value
    return True, env


def _step(c: Circuit, s: SymState, cfg: ExploreConfig) -> list[_StepResult]:
    spec = cfg.state_spec
    inputs_env = {name: ex.var(name, w, s.var_epoch) for name, w in c.inputs}
    env: dict[str, ex.Expr] = dict(inputs_env)
    env.update(s.regs)
    for name, _, e in net_topo_order(c):
        env[name] = ex.simplify(ex.substitute(e, env))

    next_exprs = {r.name: ex.simplify(ex.substitute(r.next, env))
                  for r in c.registers}
    out_all = c.output_exprs()
    outs = {}
    for name in cfg.monitored_outputs:
        if name not in out_all:
            from .errors import UnknownOutput
            raise UnknownOutput(name)
        outs[name] = ex.simplify(ex.substitute(out_all[name], env))

    base_pc = s.pc
    if cfg.assumes:
        post_env: dict[str, ex.Expr] = dict(inputs_env)
        post_env.update(next_exprs)
        for name, _, e in net_topo_order(c):
            post_env[name] = ex.simplify(ex.substitute(e, post_env))
        base_pc = base_pc + tuple(
            ex.simplify(ex.substitute(a, post_env)) for a in cfg.assumes)

    base_env = s.witness_env if s.witness_env is not None else {}
    src_expr = ex.simplify(state_concat_expr(spec, dict(s.regs)))

    # Resolve Case/Mux controls of the spec registers' next-state logic.
    worklist = [(next_exprs, outs, base_pc, s.witness_env)]
    resolved = []
    while worklist:
        nx, oo, pc, wenv = worklist.pop(0)
        node = _first_split_node([nx[r] for r in spec.registers])
        if node is None:
            feasible, env2 = _sat_with_env(
                pc, cfg.limits, [wenv] if wenv is not None else
                _guard_extensions(ex.const(1, 1), base_env))
            if feasible:
                resolved.append((nx, oo, pc, env2))
            continue
        for guard, replacement in _alternatives(node, cfg.mode):
            guard_s = ex.simplify(guard)
            pc2 = pc + (guard_s,)
            seed = wenv if wenv is not None else base_env
            feasible, env2 = _sat_with_env(
                pc2, cfg.limits, _guard_extensions(guard_s, seed))
            if not feasible:
                continue
            nx2 = {r: ex.simplify(ex.replace_node(e, node, replacement))
                   for r, e in nx.items()}
            oo2 = {o: ex.simplify(ex.replace_node(e, node, replacement))
                   for o, e in oo.items()}
            worklist.append((nx2, oo2, pc2, env2))
            if cfg.mode is Mode.PARTIAL:
                break

    results: list[_StepResult] = []
    for nx, oo, pc, wenv in resolved:
        concat = ex.simplify(state_concat_expr(spec, nx))
        if concat.op == "const":
            values = [concat.aux[0]]
            pinned = True
        elif cfg.mode is Mode.PARTIAL:
            v = min_value(concat, pc, limits=cfg.limits)
            if v is None:
                continue
            values = [v]
            pinned = False
        else:
            values = sorted(all_values(concat, pc, cap=cfg.value_cap,
                                       limits=cfg.limits, hint_env=wenv))
            pinned = False
        for v in values:
            if pinned:
                pc3 = pc
            else:
                pc3 = pc + (ex.eq(concat, ex.const(spec.total_width, v)),)
            slices = decode_state(c, spec, v)
            regs3 = {}
            for r in c.registers:
                if r.name in slices:
                    regs3[r.name] = ex.const(r.width, slices[r.name])
                else:
                    regs3[r.name] = nx[r.name]
            env3 = wenv
            if not pinned and wenv is not None:
                try:
                    if ex.evaluate(concat, wenv) != v:
                        env3 = None
                except KeyError:
                    env3 = None
            results.append(_StepResult(
                SymState(regs3, pc3, s.num_steps + 1, s.var_epoch + 1,
                         witness_env=env3),
                src_expr, oo))
        if len(results) > cfg.path_cap:
            raise PathExplosion(len(results), cfg.path_cap)
    return results


def step_cycle(c: Circuit, s: SymState, cfg: ExploreConfig) -> list[SymState]:
    """Advance one clock cycle; every returned successor has a satisfiable
    path constraint."""
    return [r.state for r in _step(c, s, cfg)]


def _log_event(**fields) -> None:
    if log.isEnabledFor(logging.DEBUG):
        log.debug(json.dumps(fields, sort_keys=True))


def _prune_soundness_warning(c: Circuit, spec: StateSpec) -> None:
    """BFS_PRUNE keys on the projected StateId only; warn when registers
    outside the spec feed the spec registers' next-state logic."""
    net_map = {n: e for n, _, e in c.nets}
    spec_set = set(spec.registers)
    regs = c.register_map()
    seen_sigs: set[str] = set()
    frontier = [regs[r].next for r in spec.registers]
    while frontier:
        e = frontier.pop()
        for node in ex.postorder([e]):
            if node.op != "ref":
                continue
            name = node.aux[0]
            if name in seen_sigs:
                continue
            seen_sigs.add(name)
            if name in net_map:
                frontier.append(net_map[name])
            elif name in regs and name not in spec_set:
                log.warning(
                    "register %r outside the state spec feeds state-spec "
                    "logic; pruning by StateId may under-approximate", name)
                return


def _record_sources(res: _StepResult, cfg: ExploreConfig) -> list[int]:
    succ = res.state
    src = ex.simplify(res.src_expr)
    if src.op == "const":
        return [src.aux[0]]
    return sorted(all_values(src, succ.pc, cap=cfg.value_cap,
                             limits=cfg.limits, hint_env=succ.witness_env))


def _record_behaviors(res: _StepResult, src_vals: list[int], dst: int,
                      cfg: ExploreConfig, rbs: set[Behavior]) -> None:
    succ = res.state
    for out in cfg.monitored_outputs:
        oe = res.out_exprs[out]
        if len(src_vals) == 1:
            queries = [(src_vals[0], succ.pc)]
        else:
            queries = [(s1, succ.pc + (ex.eq(res.src_expr,
                                             ex.const(res.src_expr.width, s1)),))
                       for s1 in src_vals]
        for s1, pc in queries:
            if oe.op == "const":
                vals = {oe.aux[0]}
            else:
                vals = all_values(oe, pc, cap=cfg.value_cap, limits=cfg.limits,
                                  hint_env=succ.witness_env)
            for v in sorted(vals):
                rbs.add(Behavior(s1, dst, out, v))


def explore(c: Circuit, init: list[SymState], cfg: ExploreConfig,
            kind: Kind) -> Metadata:
    """Worklist exploration per the configured mode; see the module
    docstring for the semantics of each mode and metadata kind."""
    if not init:
        raise DctForgeError("explore needs at least one initial state")
    spec = cfg.state_spec
    if cfg.mode is Mode.BFS_PRUNE:
        _prune_soundness_warning(c, spec)

    seen: set[int] = set()
    for s in init:
        seen |= project(s, spec, cfg)
    meta = Metadata(kind=kind, rs=set(seen) if kind is Kind.REACH else set(),
                    trans=set(), rbs=set(), sym_states=[])
    frontier = list(init)
    layer = 0
    last_new_layer = 0
    final_layer_added = False

    while frontier:
        if cfg.depth is not None and layer >= cfg.depth:
            break
        layer += 1
        if cfg.jobs > 1 and len(frontier) > 1:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
                step_results = list(pool.map(
                    lambda st: _step(c, st, cfg), frontier))
        else:
            step_results = [_step(c, st, cfg) for st in frontier]
        meta.paths_explored += len(frontier)

        new_frontier: list[SymState] = []
        layer_added = False
        for results in step_results:
            for res in results:
                succ = res.state
                proj = project(succ, spec, cfg)
                src_vals = _record_sources(res, cfg)
                if kind is Kind.REACH:
                    meta.rs |= proj
                    for d in sorted(proj):
                        _record_behaviors(res, src_vals, d, cfg, meta.rbs)
                else:
                    for s1 in src_vals:
                        for s2 in sorted(proj):
                            meta.trans.add((s1, s2))
                new_ids = proj - seen
                if new_ids:
                    layer_added = True
                if cfg.mode is Mode.BFS_PRUNE and not new_ids:
                    meta.paths_pruned += 1
                    _log_event(event="path_pruned", layer=layer,
                               state=sorted(proj))
                    continue
                seen |= proj
                succ = dc_replace(succ, origin=min(src_vals) if src_vals
                                  else None)
                new_frontier.append(succ)
                _log_event(event="path_spawned", layer=layer,
                           state=sorted(proj), num_steps=succ.num_steps)
        frontier = new_frontier
        if layer_added:
            last_new_layer = layer
        if cfg.depth is None and not layer_added:
            break
        if cfg.depth is not None and layer >= cfg.depth:
            final_layer_added = layer_added
            break

    if cfg.depth is None:
        meta.discovered_diameter = last_new_layer
    else:
        meta.depth_converged = not final_layer_added
        if final_layer_added:
            log.warning("new states appeared at the final layer %d; "
                        "increase depth or use fixpoint mode", layer)
    if kind is Kind.STATES:
        meta.sym_states = frontier
    _log_event(event="explore_done", layers=layer,
               paths=meta.paths_explored, pruned=meta.paths_pruned)
    return meta
