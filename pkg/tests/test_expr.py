"""Expression layer: hash-consing, evaluation, simplification."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dctforge import expr as ex
from dctforge.errors import WidthMismatch

from bruteforce import BitPlanes, ExprGen, naive_eval, support_leaves


def test_hash_consing_shares_nodes():
    a = ex.and_(ex.ref("x", 4), ex.const(4, 3))
    b = ex.and_(ex.ref("x", 4), ex.const(4, 3))
    assert a is b
    assert a.eid == b.eid
    assert ex.and_(ex.ref("x", 4), ex.const(4, 5)) is not a


def test_var_identity_includes_step():
    assert ex.var("inValid", 1, 0) is ex.var("inValid", 1, 0)
    assert ex.var("inValid", 1, 0) is not ex.var("inValid", 1, 1)


def test_constructor_width_checks():
    with pytest.raises(WidthMismatch):
        ex.and_(ex.ref("a", 3), ex.ref("b", 4))
    with pytest.raises(WidthMismatch):
        ex.mux(ex.ref("c", 2), ex.ref("a", 3), ex.ref("b", 3))
    with pytest.raises(WidthMismatch):
        ex.const(3, 8)
    with pytest.raises(WidthMismatch):
        ex.slice_(ex.ref("a", 3), 1, 3)
    with pytest.raises(WidthMismatch):
        ex.case(ex.ref("s", 2), [(1, ex.const(1, 0)), (1, ex.const(1, 1))],
                ex.const(1, 0))


def test_simplify_mux_constant_condition():
    a, b = ex.ref("a", 4), ex.ref("b", 4)
    assert ex.simplify(ex.mux(ex.const(1, 1), a, b)) is a
    assert ex.simplify(ex.mux(ex.const(1, 0), a, b)) is b


def test_simplify_case_unused_state_hits_default():
    # A 3-bit selector with arms 0..5 only: values 6 and 7 fall through.
    arms = [(k, ex.const(3, (k + 1) % 6)) for k in range(6)]
    e = ex.case(ex.const(3, 6), arms, ex.const(3, 0))
    assert ex.simplify(e) is ex.const(3, 0)
    e7 = ex.case(ex.const(3, 7), arms, ex.const(3, 0))
    assert ex.simplify(e7) is ex.const(3, 0)
    e2 = ex.case(ex.const(3, 2), arms, ex.const(3, 0))
    assert ex.simplify(e2) is ex.const(3, 3)


def test_simplify_identity_and_annihilator_rules():
    x = ex.ref("x", 4)
    zero, ones = ex.const(4, 0), ex.const(4, 15)
    assert ex.simplify(ex.and_(x, zero)) is zero
    assert ex.simplify(ex.and_(x, ones)) is x
    assert ex.simplify(ex.or_(x, ones)) is ones
    assert ex.simplify(ex.or_(x, zero)) is x
    assert ex.simplify(ex.xor(x, x)) is zero
    assert ex.simplify(ex.add(x, zero)) is x
    assert ex.simplify(ex.sub(x, x)) is zero
    assert ex.simplify(ex.eq(x, x)) is ex.const(1, 1)


def test_simplify_random_exprs_agree_exhaustively():
    # 1,000 random expressions with <= 8-bit support, checked on every
    # assignment against an independent evaluator.
    rng = random.Random(1234)
    gen = ExprGen(rng, n_vars=2, var_width=4)
    for _ in range(1000):
        e = gen.gen(rng.randrange(1, 5))
        s = ex.simplify(e)
        leaves = support_leaves(e, s)
        if not leaves:
            assert naive_eval(e, {}) == naive_eval(s, {})
            continue
        bp = BitPlanes(leaves)
        assert bp.planes(e) == bp.planes(s), ex.pp(e)


def test_simplify_idempotent():
    rng = random.Random(99)
    gen = ExprGen(rng)
    for _ in range(300):
        s = ex.simplify(gen.gen(4))
        assert ex.simplify(s) is s


def test_evaluate_matches_naive_evaluator():
    rng = random.Random(7)
    gen = ExprGen(rng)
    for _ in range(200):
        e = gen.gen(4)
        leaves = support_leaves(e)
        env = {("var",) + v.aux: rng.randrange(1 << v.width) for v in leaves}
        assert ex.evaluate(e, env) == naive_eval(e, env)


@given(st.integers(0, 255), st.integers(0, 255))
def test_add_sub_mod_256(a, b):
    ea, eb = ex.const(8, a), ex.const(8, b)
    assert ex.evaluate(ex.add(ea, eb), {}) == (a + b) % 256
    assert ex.evaluate(ex.sub(ea, eb), {}) == (a - b) % 256


@given(st.integers(0, 7), st.integers(0, 7))
def test_comparison_semantics(a, b):
    ea, eb = ex.const(3, a), ex.const(3, b)
    assert ex.evaluate(ex.ult(ea, eb), {}) == int(a < b)
    assert ex.evaluate(ex.eq(ea, eb), {}) == int(a == b)


@settings(max_examples=60)
@given(st.integers(0, 15), st.integers(0, 7))
def test_shl_semantics(a, s):
    e = ex.shl(ex.const(4, a), ex.const(3, s))
    assert ex.evaluate(e, {}) == ((a << s) & 15 if s < 4 else 0)


def test_concat_slice_roundtrip():
    hi, lo = ex.const(3, 5), ex.const(2, 2)
    e = ex.concat(hi, lo)
    assert ex.evaluate(e, {}) == (5 << 2) | 2
    assert ex.evaluate(ex.slice_(e, 2, 4), {}) == 5
    assert ex.evaluate(ex.slice_(e, 0, 1), {}) == 2


def test_substitute_replaces_refs():
    x = ex.ref("x", 3)
    e = ex.add(x, ex.const(3, 1))
    out = ex.substitute(e, {"x": ex.const(3, 6)})
    assert ex.evaluate(out, {}) == 7
    with pytest.raises(WidthMismatch):
        ex.substitute(e, {"x": ex.const(4, 6)})


def test_replace_node_targets_identity():
    x = ex.ref("x", 3)
    m = ex.mux(ex.ref("c", 1), ex.const(3, 1), ex.const(3, 2))
    e = ex.add(m, x)
    out = ex.replace_node(e, m, ex.const(3, 1))
    assert out is ex.add(ex.const(3, 1), x)


def test_pp_stable_and_readable():
    e = ex.mux(ex.eq(ex.ref("s", 3), ex.const(3, 5)),
               ex.const(1, 1), ex.const(1, 0))
    assert ex.pp(e) == "s == 3'd5 ? 1'd1 : 1'd0"
    assert ex.pp(ex.var("pcmSq", 3, -1)) == "$pcmSq.init"
