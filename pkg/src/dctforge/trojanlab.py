"""Trojan construction and random-FSM generation for property testing.

inject_trojan adds the two-step trigger FSM (arm on visiting a designated
source state, fire on the hop to a designated destination, then sticky)
plus a stuck-at payload mux on one output.  The trigger only observes the
victim FSM, and the payload is gated by an enable register that stays
zero along every honestly reachable path, so injection preserves the
circuit's honest reachable set and behavior.

gen_random_fsm builds seeded FSM circuits with a known reachable set and
a known number of don't-care edges, giving the oracle-equivalence
property tests exact ground truth.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import expr as ex
from .circuit import Circuit, Register, StateSpec, state_concat_expr, validate
from .errors import (DctForgeError, DuplicateName, InfeasibleParams,
                     UnknownOutput, WidthMismatch)

__all__ = ["StuckAt", "PayloadSpec", "TriggerSpec", "inject_trojan",
           "gen_random_fsm"]

TROJAN_STATE = "trojan_state"
TROJAN_ENA = "trojan_ena"

_IDLE, _ACTIVE, _WORK = 0, 1, 2


@dataclass(frozen=True)
class StuckAt:
    """Force an output to a constant once the trigger has fired."""
    output: str
    value: int


PayloadSpec = StuckAt  # sole payload kind in scope


@dataclass(frozen=True)
class TriggerSpec:
    dct_edges: frozenset[tuple[int, int]]
    state_spec: StateSpec

    def __post_init__(self):
        if not self.dct_edges:
            raise DctForgeError("trigger needs at least one edge")
        limit = 1 << self.state_spec.total_width
        for a, b in self.dct_edges:
            if not (0 <= a < limit and 0 <= b < limit):
                raise WidthMismatch(
                    f"trigger edge ({a},{b}) does not fit "
                    f"{self.state_spec.total_width} state bits")


def _membership(proj: ex.Expr, values: list[int]) -> ex.Expr:
    return ex.or_all([ex.eq(proj, ex.const(proj.width, v)) for v in values])


def inject_trojan(c: Circuit, trig: TriggerSpec, pay: PayloadSpec) -> Circuit:
    """Return a copy of c with the trigger FSM and payload added.

    The trigger register arms when the observed FSM projection is one of
    the edge sources, fires when it then sees an edge destination, and
    sticks; unspecified trigger-state values hold (mirroring a case
    statement without a default).  The enable register latches once the
    trigger reaches its work state, and the payload rewrites the chosen
    output to a mux between the stuck value and the original logic.
    """
    out_widths = c.output_widths()
    if pay.output not in out_widths:
        raise UnknownOutput(pay.output)
    if not (0 <= pay.value < (1 << out_widths[pay.output])):
        raise WidthMismatch(
            f"payload value {pay.value} does not fit output "
            f"{pay.output!r} of width {out_widths[pay.output]}", pay.output)
    existing = {n for n, _ in c.inputs} | {r.name for r in c.registers} | \
        {n for n, _, _ in c.nets}
    for name in (TROJAN_STATE, TROJAN_ENA):
        if name in existing:
            raise DuplicateName(name)
    regs = c.register_map()
    for n in trig.state_spec.registers:
        if n not in regs:
            raise DctForgeError(f"trigger watches unknown register {n!r}")

    proj = state_concat_expr(
        trig.state_spec,
        {n: ex.ref(n, regs[n].width) for n in trig.state_spec.registers})
    sources = sorted({a for a, _ in trig.dct_edges})
    dests = sorted({b for _, b in trig.dct_edges})

    tstate = ex.ref(TROJAN_STATE, 2)
    arm = ex.mux(_membership(proj, sources),
                 ex.const(2, _ACTIVE), ex.const(2, _IDLE))
    fire = ex.mux(_membership(proj, dests),
                  ex.const(2, _WORK), ex.const(2, _ACTIVE))
    tstate_next = ex.case(tstate,
                          [(_IDLE, arm), (_ACTIVE, fire),
                           (_WORK, ex.const(2, _WORK))],
                          tstate)
    ena = ex.ref(TROJAN_ENA, 1)
    ena_next = ex.mux(ex.eq(tstate, ex.const(2, _WORK)), ex.const(1, 1), ena)

    outputs = []
    for name, w, e in c.outputs:
        if name == pay.output:
            e = ex.mux(ena, ex.const(w, pay.value), e)
        outputs.append((name, w, e))

    injected = Circuit(
        c.name + "_trojan", c.inputs, tuple(outputs),
        c.registers + (Register(TROJAN_STATE, 2, _IDLE, tstate_next),
                       Register(TROJAN_ENA, 1, 0, ena_next)),
        c.nets)
    validate(injected)
    return injected


def gen_random_fsm(seed: int, state_bits: int = 3, input_bits: int = 1,
                   reachable_fraction: float = 0.75,
                   dct_count: int = 1) -> Circuit:
    """Seeded FSM with exactly `dct_count` don't-care edges.

    The reachable subset always contains the reset state 0, is closed
    under transitions, and is fully reachable through a random spanning
    chain.  `dct_count` of the unreachable states map every input to a
    reachable target (one don't-care edge each); the remaining unreachable
    states self-loop.  A one-bit output flags one designated transition.
    """
    if not (1 <= state_bits <= 4 and 1 <= input_bits <= 3):
        raise InfeasibleParams(
            f"state_bits={state_bits}, input_bits={input_bits} out of range")
    n_states = 1 << state_bits
    n_inputs = 1 << input_bits
    n_reach = max(1, round(reachable_fraction * n_states))
    if n_reach > n_states or dct_count < 0 or \
            n_reach + dct_count > n_states:
        raise InfeasibleParams(
            f"{n_reach} reachable + {dct_count} don't-care sources exceed "
            f"{n_states} states")

    rng = random.Random(seed)
    others = rng.sample(range(1, n_states), n_reach - 1)
    reach = [0] + others
    unreachable = sorted(set(range(n_states)) - set(reach))
    dct_sources = sorted(rng.sample(unreachable, dct_count))

    # Transition table over reachable states, then a spanning chain so every
    # member of the reachable set really is reachable from reset.
    table = {s: [rng.choice(reach) for _ in range(n_inputs)] for s in reach}
    spanning: list[tuple[int, int, int]] = []
    used: dict[int, set[int]] = {s: set() for s in reach}
    for i, target in enumerate(reach[1:], start=1):
        parents = [p for p in reach[:i] if len(used[p]) < n_inputs]
        parent = rng.choice(parents)
        free = [v for v in range(n_inputs) if v not in used[parent]]
        inp = rng.choice(free)
        used[parent].add(inp)
        table[parent][inp] = target
        spanning.append((parent, inp, target))

    st = ex.ref("st", state_bits)
    inp_ref = ex.ref("in0", input_bits)

    def arm_for(targets: list[int]) -> ex.Expr:
        if all(t == targets[0] for t in targets):
            return ex.const(state_bits, targets[0])
        arms = [(v, ex.const(state_bits, targets[v]))
                for v in range(n_inputs - 1)]
        return ex.case(inp_ref, arms, ex.const(state_bits, targets[-1]))

    arms: list[tuple[int, ex.Expr]] = []
    for s in reach:
        arms.append((s, arm_for(table[s])))
    common_target = None
    if dct_sources and len(dct_sources) == len(unreachable):
        picks = [rng.choice(reach) for _ in dct_sources]
        if all(p == picks[0] for p in picks):
            common_target = picks[0]
        dct_targets = dict(zip(dct_sources, picks))
    else:
        dct_targets = {u: rng.choice(reach) for u in dct_sources}
    if common_target is not None:
        # Every unreachable state funnels through the default arm.
        default = ex.const(state_bits, common_target)
    else:
        for u in unreachable:
            if u in dct_targets:
                arms.append((u, ex.const(state_bits, dct_targets[u])))
            else:
                arms.append((u, ex.const(state_bits, u)))
        default = ex.const(state_bits, 0)
    arms.sort(key=lambda kv: kv[0])
    next_expr = ex.case(st, arms, default)

    if spanning:
        flag_src, _, flag_dst = spanning[rng.randrange(len(spanning))]
    else:
        flag_src, flag_dst = 0, table[0][0]
    flag = ex.and_(ex.eq(st, ex.const(state_bits, flag_src)),
                   ex.eq(next_expr, ex.const(state_bits, flag_dst)))

    c = Circuit(f"fsm_s{seed}",
                (("in0", input_bits),),
                (("flag", 1, flag),),
                (Register("st", state_bits, 0, next_expr),),
                ())
    validate(c)
    return c
