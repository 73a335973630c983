"""Query layer on top of the encoder and the CDCL core.

A path constraint is a tuple of width-1 expressions understood as a
conjunction.  all_values enumerates every feasible value of an expression
under a path constraint by iterative solving with blocking clauses;
min_value finds the lexicographically smallest feasible value by pinning
bits from the most significant end down.  Results depend only on the
query structure, never on CNF variable numbering, so reports built from
them are reproducible across runs and worker counts.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from typing import Iterable, Mapping

from . import expr as ex
from .cnf import DEFAULT_CLAUSE_CAP, Encoder
from .errors import CapExceeded, WidthMismatch
from .sat import DEFAULT_CONFLICT_LIMIT, check_sat

log = logging.getLogger("dctforge.solve")

__all__ = ["PathConstraint", "SolverLimits", "CnfDumper", "pc_sat",
           "all_values", "min_value", "DEFAULT_VALUE_CAP"]

PathConstraint = tuple  # of width-1 Expr conjuncts

DEFAULT_VALUE_CAP = 64
ALL_VALUES_WIDTH_CAP = 24


class SolverLimits:
    def __init__(self, conflict_limit: int = DEFAULT_CONFLICT_LIMIT,
                 clause_cap: int = DEFAULT_CLAUSE_CAP,
                 dumper: "CnfDumper | None" = None):
        self.conflict_limit = conflict_limit
        self.clause_cap = clause_cap
        self.dumper = dumper


_DEFAULT_LIMITS = SolverLimits()


class CnfDumper:
    """Writes one numbered DIMACS file per solver query into a directory."""

    def __init__(self, directory: str):
        self.directory = directory
        self._lock = threading.Lock()
        self._counter = 0
        os.makedirs(directory, exist_ok=True)

    def dump(self, formula, label: str) -> None:
        with self._lock:
            self._counter += 1
            n = self._counter
        path = os.path.join(self.directory, f"query{n:05d}.cnf")
        with open(path, "w", encoding="utf-8") as f:
            f.write(formula.to_dimacs(comment=label))


def _try_env(conjuncts: Iterable[ex.Expr], env: Mapping) -> bool:
    try:
        return all(ex.evaluate(c, env) == 1 for c in conjuncts)
    except KeyError:
        return False


def _symbolic_conjuncts(pc: Iterable[ex.Expr]) -> list[ex.Expr] | None:
    """Simplified non-trivial conjuncts, or None if one is constant false."""
    out = []
    for c in pc:
        if c.width != 1:
            raise WidthMismatch(
                f"path-constraint conjunct must be 1 bit wide, got {c.width}")
        s = ex.simplify(c)
        if s.op == "const":
            if s.aux[0] == 0:
                return None
            continue
        out.append(s)
    return out


def _solve(enc: Encoder, limits: SolverLimits, label: str):
    formula = enc.to_formula()
    if limits.dumper is not None:
        limits.dumper.dump(formula, label)
    outcome = check_sat(formula, limits.conflict_limit)
    if log.isEnabledFor(logging.DEBUG):
        log.debug(json.dumps({"event": "solver_stats", "label": label,
                              "vars": formula.num_vars,
                              "clauses": len(formula.clauses),
                              "status": outcome.status}, sort_keys=True))
    return outcome


def pc_sat(pc: Iterable[ex.Expr], limits: SolverLimits = _DEFAULT_LIMITS,
           hint_envs: Iterable[Mapping] = ()) -> bool:
    """Is the conjunction of pc satisfiable?  Candidate assignments in
    hint_envs are tried by concrete evaluation before falling back to SAT."""
    conjuncts = _symbolic_conjuncts(pc)
    if conjuncts is None:
        return False
    if not conjuncts:
        return True
    for env in hint_envs:
        if _try_env(conjuncts, env):
            return True
    enc = Encoder(limits.clause_cap)
    for c in conjuncts:
        enc.assert_lit(enc.bits(c)[0])
    return _solve(enc, limits, "pc-sat").is_sat


def all_values(e: ex.Expr, pc: Iterable[ex.Expr], cap: int = DEFAULT_VALUE_CAP,
               limits: SolverLimits = _DEFAULT_LIMITS,
               hint_env: Mapping | None = None) -> set[int]:
    """Exactly { v : pc and (e = v) is satisfiable }, via blocking clauses.

    Raises CapExceeded once more than cap distinct values are found.
    """
    if e.width > ALL_VALUES_WIDTH_CAP:
        raise WidthMismatch(
            f"all_values needs width <= {ALL_VALUES_WIDTH_CAP}, got {e.width}")
    if cap < 1:
        raise CapExceeded(cap)
    conjuncts = _symbolic_conjuncts(pc)
    if conjuncts is None:
        return set()
    e = ex.simplify(e)
    enc = Encoder(limits.clause_cap)
    for c in conjuncts:
        enc.assert_lit(enc.bits(c)[0])
    bits = enc.bits(e)
    formula = enc.to_formula()

    found: set[int] = set()

    def block(value: int) -> bool:
        """Exclude value; returns False when no other value can exist."""
        clause = []
        for i, lit in enumerate(bits):
            if abs(lit) == 1:
                continue
            clause.append(-lit if (value >> i) & 1 else lit)
        if not clause:
            return False
        formula.clauses.append(clause)
        return True

    if hint_env is not None and _try_env(conjuncts, hint_env):
        try:
            value = ex.evaluate(e, hint_env)
        except KeyError:
            value = None
        if value is not None:
            found.add(value)
            if not block(value):
                return found

    while True:
        if limits.dumper is not None:
            limits.dumper.dump(formula, "all-values")
        outcome = check_sat(formula, limits.conflict_limit)
        if outcome.is_unsat:
            return found
        if not outcome.is_sat:
            from .errors import ResourceOut
            raise ResourceOut(outcome.limit_name)
        value = 0
        for i, lit in enumerate(bits):
            if outcome.lit_value(lit):
                value |= 1 << i
        found.add(value)
        if len(found) > cap:
            raise CapExceeded(cap)
        if not block(value):
            return found


def min_value(e: ex.Expr, pc: Iterable[ex.Expr],
              limits: SolverLimits = _DEFAULT_LIMITS) -> int | None:
    """Smallest feasible value of e under pc (None when pc is unsat).

    Deterministic regardless of solver internals: bits are pinned to zero
    from the most significant position whenever still satisfiable.
    """
    conjuncts = _symbolic_conjuncts(pc)
    if conjuncts is None:
        return None
    e = ex.simplify(e)
    enc = Encoder(limits.clause_cap)
    for c in conjuncts:
        enc.assert_lit(enc.bits(c)[0])
    bits = enc.bits(e)
    formula = enc.to_formula()

    if limits.dumper is not None:
        limits.dumper.dump(formula, "min-value")
    if not check_sat(formula, limits.conflict_limit).is_sat:
        return None
    value = 0
    for i in reversed(range(len(bits))):
        lit = bits[i]
        if lit == 1:
            value |= 1 << i
            continue
        if lit == -1:
            continue
        formula.clauses.append([-lit])
        if check_sat(formula, limits.conflict_limit).is_sat:
            continue
        formula.clauses.pop()
        formula.clauses.append([lit])
        value |= 1 << i
    return value
