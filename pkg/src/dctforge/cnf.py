"""Tseitin bit-blasting of expression DAGs to CNF.

Variable 1 is a reserved constant forced true, so constant bits encode as
the literals 1 and -1 and every gate helper can treat constants, shared
literals, and fresh variables uniformly.  Adders and subtractors use
ripple-carry form; comparisons use a borrow chain; shifts by a symbolic
amount become mux stages.  bit_map records, for every encoded expression
bit, the CNF literal carrying it (possibly negative, possibly the
constant literal).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import expr as ex
from .errors import ResourceOut

__all__ = ["CnfFormula", "Encoder", "bit_blast"]

DEFAULT_CLAUSE_CAP = 10 ** 7


@dataclass
class CnfFormula:
    num_vars: int
    clauses: list[list[int]]
    bit_map: dict[tuple[ex.Expr, int], int] = field(default_factory=dict)

    def to_dimacs(self, comment: str = "") -> str:
        lines = []
        if comment:
            for row in comment.splitlines():
                lines.append(f"c {row}")
        lines.append(f"p cnf {self.num_vars} {len(self.clauses)}")
        for cl in self.clauses:
            lines.append(" ".join(map(str, cl)) + " 0")
        return "\n".join(lines) + "\n"


class Encoder:
    """Accumulates clauses while encoding expressions bottom-up; reusable
    across several roots so shared sub-DAGs encode once."""

    def __init__(self, clause_cap: int = DEFAULT_CLAUSE_CAP):
        self.clause_cap = clause_cap
        self.clauses: list[list[int]] = [[1]]
        self.num_vars = 1
        self._bits: dict[ex.Expr, list[int]] = {}
        self.bit_map: dict[tuple[ex.Expr, int], int] = {}

    @property
    def TRUE(self) -> int:
        return 1

    @property
    def FALSE(self) -> int:
        return -1

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def add_clause(self, lits: list[int]) -> None:
        if len(self.clauses) >= self.clause_cap:
            raise ResourceOut("clause-cap")
        self.clauses.append(lits)

    def assert_lit(self, lit: int) -> None:
        self.add_clause([lit])

    # Gate helpers; each returns a literal and short-circuits constants.

    def mk_and(self, a: int, b: int) -> int:
        if a == self.FALSE or b == self.FALSE or a == -b:
            return self.FALSE
        if a == self.TRUE:
            return b
        if b == self.TRUE or a == b:
            return a
        out = self.new_var()
        self.add_clause([-out, a])
        self.add_clause([-out, b])
        self.add_clause([out, -a, -b])
        return out

    def mk_or(self, a: int, b: int) -> int:
        return -self.mk_and(-a, -b)

    def mk_xor(self, a: int, b: int) -> int:
        if a == self.FALSE:
            return b
        if b == self.FALSE:
            return a
        if a == self.TRUE:
            return -b
        if b == self.TRUE:
            return -a
        if a == b:
            return self.FALSE
        if a == -b:
            return self.TRUE
        out = self.new_var()
        self.add_clause([-out, a, b])
        self.add_clause([-out, -a, -b])
        self.add_clause([out, -a, b])
        self.add_clause([out, a, -b])
        return out

    def mk_maj(self, a: int, b: int, c: int) -> int:
        for x, y, z in ((a, b, c), (a, c, b), (b, c, a)):
            if x == y:
                return x
            if x == -y:
                return z
        consts = [l for l in (a, b, c) if abs(l) == 1]
        if consts:
            lit = consts[0]
            others = [a, b, c]
            others.remove(lit)
            return self.mk_and(*others) if lit == self.FALSE else self.mk_or(*others)
        out = self.new_var()
        self.add_clause([-out, a, b])
        self.add_clause([-out, a, c])
        self.add_clause([-out, b, c])
        self.add_clause([out, -a, -b])
        self.add_clause([out, -a, -c])
        self.add_clause([out, -b, -c])
        return out

    def mk_mux(self, c: int, t: int, e: int) -> int:
        if c == self.TRUE:
            return t
        if c == self.FALSE:
            return e
        if t == e:
            return t
        if t == self.TRUE and e == self.FALSE:
            return c
        if t == self.FALSE and e == self.TRUE:
            return -c
        out = self.new_var()
        self.add_clause([-out, -c, t])
        self.add_clause([out, -c, -t])
        self.add_clause([-out, c, e])
        self.add_clause([out, c, -e])
        return out

    def mk_and_many(self, lits: list[int]) -> int:
        lits = [l for l in lits if l != self.TRUE]
        if any(l == self.FALSE for l in lits):
            return self.FALSE
        uniq: list[int] = []
        for l in lits:
            if -l in uniq:
                return self.FALSE
            if l not in uniq:
                uniq.append(l)
        if not uniq:
            return self.TRUE
        if len(uniq) == 1:
            return uniq[0]
        out = self.new_var()
        for l in uniq:
            self.add_clause([-out, l])
        self.add_clause([out] + [-l for l in uniq])
        return out

    def mk_or_many(self, lits: list[int]) -> int:
        return -self.mk_and_many([-l for l in lits])

    # Word-level encodings.

    def _adder(self, abits: list[int], bbits: list[int], carry: int) -> list[int]:
        out = []
        for a, b in zip(abits, bbits):
            t = self.mk_xor(a, b)
            out.append(self.mk_xor(t, carry))
            carry = self.mk_maj(a, b, carry)
        return out

    def _eq_bits(self, abits: list[int], bbits: list[int]) -> int:
        return self.mk_and_many(
            [-self.mk_xor(a, b) for a, b in zip(abits, bbits)])

    def _eq_const(self, abits: list[int], value: int) -> int:
        return self.mk_and_many(
            [a if (value >> i) & 1 else -a for i, a in enumerate(abits)])

    def _ult(self, abits: list[int], bbits: list[int]) -> int:
        borrow = self.FALSE
        for a, b in zip(abits, bbits):
            borrow = self.mk_maj(-a, b, borrow)
        return borrow

    def bits(self, root: ex.Expr) -> list[int]:
        """Encode root (and anything it shares) returning LSB-first literals."""
        if root in self._bits:
            return self._bits[root]
        for node in ex.postorder([root]):
            if node in self._bits:
                continue
            self._bits[node] = self._encode(node)
            for i, lit in enumerate(self._bits[node]):
                self.bit_map[(node, i)] = lit
        return self._bits[root]

    def _encode(self, node: ex.Expr) -> list[int]:
        op = node.op
        b = self._bits
        if op == "const":
            v = node.aux[0]
            return [self.TRUE if (v >> i) & 1 else self.FALSE
                    for i in range(node.width)]
        if op in ("ref", "var"):
            return [self.new_var() for _ in range(node.width)]
        if op == "not":
            return [-l for l in b[node.args[0]]]
        if op == "neg":
            zero = [self.FALSE] * node.width
            return self._adder(zero, [-l for l in b[node.args[0]]], self.TRUE)
        if op == "redor":
            return [self.mk_or_many(b[node.args[0]])]
        if op == "redand":
            return [self.mk_and_many(b[node.args[0]])]
        if op in ("and", "or", "xor"):
            fn = {"and": self.mk_and, "or": self.mk_or, "xor": self.mk_xor}[op]
            return [fn(x, y) for x, y in zip(b[node.args[0]], b[node.args[1]])]
        if op == "add":
            return self._adder(b[node.args[0]], b[node.args[1]], self.FALSE)
        if op == "sub":
            return self._adder(b[node.args[0]],
                               [-l for l in b[node.args[1]]], self.TRUE)
        if op == "eq":
            return [self._eq_bits(b[node.args[0]], b[node.args[1]])]
        if op == "ne":
            return [-self._eq_bits(b[node.args[0]], b[node.args[1]])]
        if op == "ult":
            return [self._ult(b[node.args[0]], b[node.args[1]])]
        if op == "shl":
            cur = list(b[node.args[0]])
            for k, sbit in enumerate(b[node.args[1]]):
                amount = 1 << k
                if amount >= node.width:
                    shifted = [self.FALSE] * node.width
                else:
                    shifted = [self.FALSE] * amount + cur[:node.width - amount]
                cur = [self.mk_mux(sbit, s, c) for s, c in zip(shifted, cur)]
            return cur
        if op == "mux":
            c = b[node.args[0]][0]
            return [self.mk_mux(c, t, e)
                    for t, e in zip(b[node.args[1]], b[node.args[2]])]
        if op == "case":
            scrut = b[node.args[0]]
            result = list(b[node.args[-1]])
            for key, arm in reversed(list(zip(node.aux, node.args[1:-1]))):
                sel = self._eq_const(scrut, key)
                result = [self.mk_mux(sel, t, e)
                          for t, e in zip(b[arm], result)]
            return result
        if op == "slice":
            lo, hi = node.aux
            return b[node.args[0]][lo:hi + 1]
        if op == "concat":
            out: list[int] = []
            for a in reversed(node.args):
                out.extend(b[a])
            return out
        if op == "zext":
            pad = node.width - node.args[0].width
            return b[node.args[0]] + [self.FALSE] * pad
        raise AssertionError(op)

    def to_formula(self) -> CnfFormula:
        return CnfFormula(self.num_vars, self.clauses, dict(self.bit_map))


def bit_blast(e: ex.Expr, pc, clause_cap: int = DEFAULT_CLAUSE_CAP) -> CnfFormula:
    """CNF equisatisfiable with (pc AND e); e must be one bit wide."""
    from .errors import WidthMismatch
    if e.width != 1:
        raise WidthMismatch(f"bit_blast query must be 1 bit wide, got {e.width}")
    enc = Encoder(clause_cap)
    for conj in pc:
        enc.assert_lit(enc.bits(conj)[0])
    enc.assert_lit(enc.bits(e)[0])
    return enc.to_formula()
