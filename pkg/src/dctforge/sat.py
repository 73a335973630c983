"""Deterministic CDCL SAT solver.

Two-watched-literal propagation, first-UIP clause learning, decaying
activity scores with ties broken by lowest variable index, phase saving
(initial phase false), and Luby-sequence restarts.  Identical input
always produces the identical outcome and model.  Search stops with
ResourceOut once the conflict budget is exhausted.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cnf import CnfFormula

__all__ = ["SatOutcome", "check_sat", "DEFAULT_CONFLICT_LIMIT"]

DEFAULT_CONFLICT_LIMIT = 10 ** 6
_RESTART_BASE = 64
_VAR_DECAY = 0.95


@dataclass(frozen=True)
class SatOutcome:
    """Sat (with a total model), Unsat, or ResourceOut(limit name)."""
    status: str  # "sat" | "unsat" | "resource-out"
    model: tuple[bool, ...] | None = None  # 1-indexed; model[0] unused
    limit_name: str | None = None

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"

    @property
    def is_unsat(self) -> bool:
        return self.status == "unsat"

    def lit_value(self, lit: int) -> bool:
        value = self.model[abs(lit)]
        return value if lit > 0 else not value


def _luby(i: int) -> int:
    """i-th element (1-based) of the Luby restart sequence."""
    k = 1
    while (1 << (k + 1)) - 1 <= i:
        k += 1
    if i == (1 << k) - 1:
        return 1 << (k - 1)
    return _luby(i - (1 << (k - 1)) + 1)


class _Solver:
    def __init__(self, formula: CnfFormula, conflict_limit: int):
        self.nv = formula.num_vars
        self.conflict_limit = conflict_limit
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.assign = [0] * (self.nv + 1)   # 0 unknown, 1 true, -1 false
        self.level = [0] * (self.nv + 1)
        self.reason: list[int | None] = [None] * (self.nv + 1)
        self.activity = [0.0] * (self.nv + 1)
        self.phase = [False] * (self.nv + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.var_inc = 1.0
        self.ok = True
        for cl in formula.clauses:
            self._add_clause(cl)

    def _value(self, lit: int) -> int:
        v = self.assign[abs(lit)]
        return v if lit > 0 else -v

    def _add_clause(self, lits: list[int]) -> None:
        if not self.ok:
            return
        uniq: list[int] = []
        for l in lits:
            if -l in uniq:
                return  # tautology
            if l not in uniq:
                uniq.append(l)
        if not uniq:
            self.ok = False
            return
        if len(uniq) == 1:
            if not self._enqueue(uniq[0], None):
                self.ok = False
            return
        ci = len(self.clauses)
        self.clauses.append(uniq)
        self.watches.setdefault(uniq[0], []).append(ci)
        self.watches.setdefault(uniq[1], []).append(ci)

    def _enqueue(self, lit: int, reason_ci: int | None) -> bool:
        val = self._value(lit)
        if val == 1:
            return True
        if val == -1:
            return False
        v = abs(lit)
        self.assign[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason_ci
        self.trail.append(lit)
        return True

    def _propagate(self) -> int | None:
        """Returns a conflicting clause index, or None."""
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            falsified = -p
            ws = self.watches.get(falsified)
            if not ws:
                continue
            self.watches[falsified] = []
            keep = self.watches[falsified]
            for idx, ci in enumerate(ws):
                cl = self.clauses[ci]
                if cl[0] == falsified:
                    cl[0], cl[1] = cl[1], cl[0]
                # cl[1] is the falsified watch now.
                if self._value(cl[0]) == 1:
                    keep.append(ci)
                    continue
                moved = False
                for k in range(2, len(cl)):
                    if self._value(cl[k]) != -1:
                        cl[1], cl[k] = cl[k], cl[1]
                        self.watches.setdefault(cl[1], []).append(ci)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(ci)
                if not self._enqueue(cl[0], ci):
                    keep.extend(ws[idx + 1:])
                    return ci
        return None

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for i in range(1, self.nv + 1):
                self.activity[i] *= 1e-100
            self.var_inc *= 1e-100

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        learnt: list[int] = [0]
        seen = [False] * (self.nv + 1)
        counter = 0
        p = None
        idx = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        ci = confl
        while True:
            cl = self.clauses[ci]
            for q in cl:
                if q == p:
                    continue  # the literal this reason clause asserted
                v = abs(q)
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            seen[abs(p)] = False
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            ci = self.reason[abs(p)]
        learnt[0] = -p
        if len(learnt) == 1:
            bt_level = 0
        else:
            bt_level = max(self.level[abs(q)] for q in learnt[1:])
        return learnt, bt_level

    def _backtrack(self, target_level: int) -> None:
        if len(self.trail_lim) <= target_level:
            return
        split = self.trail_lim[target_level]
        for lit in self.trail[split:]:
            v = abs(lit)
            self.phase[v] = lit > 0
            self.assign[v] = 0
            self.reason[v] = None
        del self.trail[split:]
        del self.trail_lim[target_level:]
        self.qhead = len(self.trail)

    def _decide(self) -> int | None:
        best = None
        best_act = -1.0
        for v in range(1, self.nv + 1):
            if self.assign[v] == 0 and self.activity[v] > best_act:
                best = v
                best_act = self.activity[v]
        if best is None:
            return None
        return best if self.phase[best] else -best

    def _learn(self, learnt: list[int]) -> None:
        if len(learnt) == 1:
            self._enqueue(learnt[0], None)
            return
        # Watch the asserting literal and one literal from the backtrack level.
        watch2 = max(range(1, len(learnt)),
                     key=lambda i: (self.level[abs(learnt[i])], -i))
        learnt[1], learnt[watch2] = learnt[watch2], learnt[1]
        ci = len(self.clauses)
        self.clauses.append(learnt)
        self.watches.setdefault(learnt[0], []).append(ci)
        self.watches.setdefault(learnt[1], []).append(ci)
        self._enqueue(learnt[0], ci)

    def solve(self) -> SatOutcome:
        if not self.ok:
            return SatOutcome("unsat")
        conflicts = 0
        restart_idx = 1
        conflicts_since_restart = 0
        restart_limit = _RESTART_BASE * _luby(restart_idx)
        while True:
            confl = self._propagate()
            if confl is not None:
                conflicts += 1
                conflicts_since_restart += 1
                if len(self.trail_lim) == 0:
                    return SatOutcome("unsat")
                if conflicts >= self.conflict_limit:
                    return SatOutcome("resource-out",
                                      limit_name="conflict-budget")
                learnt, bt_level = self._analyze(confl)
                self._backtrack(bt_level)
                self._learn(learnt)
                self.var_inc /= _VAR_DECAY
                continue
            if conflicts_since_restart >= restart_limit:
                conflicts_since_restart = 0
                restart_idx += 1
                restart_limit = _RESTART_BASE * _luby(restart_idx)
                self._backtrack(0)
                continue
            decision = self._decide()
            if decision is None:
                model = tuple(self.assign[v] == 1 for v in range(self.nv + 1))
                return SatOutcome("sat", model=model)
            self.trail_lim.append(len(self.trail))
            self._enqueue(decision, None)


def check_sat(formula: CnfFormula,
              conflict_limit: int = DEFAULT_CONFLICT_LIMIT) -> SatOutcome:
    """Solve a CNF formula; Sat models are asserted against every clause."""
    outcome = _Solver(formula, conflict_limit).solve()
    if outcome.is_sat:
        for cl in formula.clauses:
            assert any(outcome.lit_value(l) for l in cl), \
                "solver produced a model violating a clause"
    return outcome
