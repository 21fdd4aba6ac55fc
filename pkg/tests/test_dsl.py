from __future__ import annotations

import math

import numpy as np
import pytest

from opv import bounds as bd
from opv import funcatalog as fc
from opv import matfun as mf
from opv import perspectives as ps
from opv.dsl import (
    ArityMismatch,
    DslError,
    DslSyntaxError,
    DslTypeError,
    DslUnknownFunction,
    Evaluator,
    FUNCTIONS,
    evaluate,
    free_names,
    parse,
    parse_expr,
    print_canonical,
)
from opv.dsl.ast import BinOp, Call, Inv, Name, Neg, Num, Relation
from opv.dsl.parser import tokenize
from opv.errors import OpvError, UnboundName
from opv.verify import RECORDS, build_instance

from conftest import crandn

# parsing


def test_parse_difference_of_calls():
    tree = parse("abs2(V) - abs2(T)")
    assert tree == BinOp("-", Call("abs2", (Name("V"),)), Call("abs2", (Name("T"),)))


def test_parse_relation():
    tree = parse("S(A,B) <= B - A")
    assert tree == Relation(("<=",), (Call("S", (Name("A"), Name("B"))), BinOp("-", Name("B"), Name("A"))))


def test_empty_argument_is_positioned():
    with pytest.raises(DslSyntaxError) as info:
        parse("geoQ(T,V,)")
    err = info.value
    assert (err.line, err.col) == (1, 10)
    assert err.pos == 9
    assert "NUMBER" in err.expected
    assert str(err).startswith("1:10:")


def test_multiline_position():
    with pytest.raises(DslSyntaxError) as info:
        parse("abs2(T)\n  <= * abs2(V)")
    assert (info.value.line, info.value.col) == (2, 6)


def test_unknown_function_and_arity():
    with pytest.raises(DslUnknownFunction) as info:
        parse("abs2(T) + foo(T)")
    assert info.value.pos == 10
    with pytest.raises(ArityMismatch) as info:
        parse("abs2(T, V)")
    assert info.value.pos == 9


def test_parse_expr_rejects_relation():
    with pytest.raises(DslSyntaxError):
        parse_expr("abs2(T) <= abs2(V)")
    assert parse_expr("inv(abs2(T))") == Inv(Call("abs2", (Name("T"),)))


def test_bad_character():
    with pytest.raises(DslSyntaxError) as info:
        parse("abs2(T) @ abs2(V)")
    assert info.value.pos == 8


def test_literals_are_unsigned():
    assert parse("-0.5") == Neg(Num(0.5))
    with pytest.raises(ValueError):
        Num(-1.0)
    with pytest.raises(ValueError):
        Num(math.inf)


def test_positions_ignored_by_equality():
    assert parse("abs2( V )-abs2(T)") == parse("abs2(V) - abs2(T)")


# canonical printing


@pytest.mark.parametrize("text", ["abs2(V) - abs2(T)", "S(A, B) <= B - A"])
def test_round_trip_examples(text):
    tree = parse(text)
    assert print_canonical(tree) == text
    assert parse(print_canonical(tree)) == tree


def test_literal_preserved():
    assert print_canonical(parse("0.5 * abs2(T)")) == "0.5 * abs2(T)"
    assert parse("0.5").value == 0.5
    for v in (0.1, 1 / 3, 2.5e-300, 1e22, 7.0):
        assert parse(print_canonical(Num(v))).value == v


GOLDEN = [
    ("((a))", "a"),
    ("(a + b) + c", "a + b + c"),
    ("a + (b + c)", "a + (b + c)"),
    ("a - (b - c)", "a - (b - c)"),
    ("(a - b) - c", "a - b - c"),
    ("(a * b) + (c * d)", "a * b + c * d"),
    ("(a + b) * c", "(a + b) * c"),
    ("a / (b * c)", "a / (b * c)"),
    ("(a / b) * c", "a / b * c"),
    ("-(a + b)", "-(a + b)"),
    ("-(a * b)", "-(a * b)"),
    ("(-a) * b", "-a * b"),
    ("a * (-b)", "a * -b"),
    ("--a", "--a"),
    ("inv((a + b))", "inv(a + b)"),
    ("f2((a), (b + c))", "f2(a, b + c)"),
    ("(a) <= ((b)) == (c - d)", "a <= b == c - d"),
]


@pytest.mark.parametrize("src,canon", GOLDEN)
def test_minimal_parentheses(src, canon):
    src = src.replace("f2", "S")
    canon = canon.replace("f2", "S")
    tree = parse(src)
    assert print_canonical(tree) == canon
    assert parse(canon) == tree


# random trees

_NAMES = ["T", "V", "A", "B", "x", "nu", "m2", "M2", "s", "f"]
_CALLS = sorted(n for n, d in FUNCTIONS.items() if d.arity <= 4)


def random_expr(rng: np.random.Generator, depth: int):
    if depth <= 0 or rng.uniform() < 0.2:
        if rng.uniform() < 0.5:
            choice = rng.integers(4)
            if choice == 0:
                v = float(rng.integers(0, 10))
            elif choice == 1:
                v = float(rng.uniform(0, 10))
            elif choice == 2:
                v = float(10.0 ** rng.uniform(-300, 300))
            else:
                v = round(float(rng.uniform(0, 1)), 2)
            return Num(v)
        return Name(_NAMES[rng.integers(len(_NAMES))])
    kind = rng.integers(4)
    if kind == 0:
        fn = _CALLS[rng.integers(len(_CALLS))]
        return Call(fn, tuple(random_expr(rng, depth - 1) for _ in range(FUNCTIONS[fn].arity)))
    if kind == 1:
        return Neg(random_expr(rng, depth - 1))
    if kind == 2:
        return Inv(random_expr(rng, depth - 1))
    op = "+-*/"[rng.integers(4)]
    return BinOp(op, random_expr(rng, depth - 1), random_expr(rng, depth - 1))


def random_tree(rng: np.random.Generator):
    if rng.uniform() < 0.4:
        k = int(rng.integers(1, 4))
        ops = tuple(("<=", ">=", "==")[rng.integers(3)] for _ in range(k))
        return Relation(ops, tuple(random_expr(rng, 4) for _ in range(k + 1)))
    return random_expr(rng, 5)


def test_round_trip_random_trees():
    rng = np.random.default_rng(7)
    for _ in range(100):
        tree = random_tree(rng)
        text = print_canonical(tree)
        assert parse(text) == tree, text
        assert print_canonical(parse(text)) == text


# evaluation


def test_evaluate_abs2():
    out = evaluate(parse("abs2(T)"), {"T": np.diag([2.0])})
    np.testing.assert_array_equal(out, np.array([[4.0]]))


def test_evaluate_entropy_upper_bound(rng):
    for n in (1, 3, 5):
        env = {"T": crandn(rng, n), "V": crandn(rng, n)}
        assert evaluate(parse("entQ(T,V) <= abs2(V) - abs2(T)"), env).holds


def test_tsallis_one_reduction(rng):
    for n in (1, 2, 4):
        env = {"T": crandn(rng, n), "V": crandn(rng, n)}
        a = evaluate(parse("tsallisQ(T,V,1)"), env)
        b = evaluate(parse("abs2(V) - abs2(T)"), env)
        assert mf.rel_frobenius(a, b) < 1e-12


def test_relation_chain_and_failure(rng):
    t = crandn(rng, 3)
    env = {"T": t, "V": 2 * t}
    res = evaluate(parse("abs2(T) <= abs2(V) <= 4 * abs2(T)"), env)
    assert res.holds and len(res.pairs) == 2
    assert res.pairs[1].verdict is not mf.Verdict.FAILS
    res = evaluate(parse("abs2(V) <= abs2(T)"), env)
    assert res.verdict is mf.Verdict.FAILS and not res.holds
    assert res.to_json()["links"][0]["op"] == "<="


def test_scalar_relation():
    res = evaluate(parse("ln(2) <= 2 - 1"), {})
    assert res.holds
    assert not evaluate(parse("rpow(2, 3) == 9"), {}).holds


def test_type_errors(rng):
    env = {"T": crandn(rng, 2), "x": np.ones(2), "nu": 0.5}
    for text in ("abs2(T) + 1", "abs2(T) * abs2(T)", "abs2(nu)", "nu / abs2(T)", "-x", "abs2(T) <= 1"):
        with pytest.raises(DslTypeError):
            evaluate(parse(text), env)
    with pytest.raises(DslTypeError):
        evaluate(parse("x"), env)
    with pytest.raises(DslTypeError):
        evaluate(parse("invadj(T)"), env)


def test_unbound_name():
    with pytest.raises(UnboundName):
        evaluate(parse("abs2(W)"), {"T": np.eye(2)})


def test_dimension_mismatch():
    with pytest.raises(OpvError):
        evaluate(parse("abs2(T) - abs2(V)"), {"T": np.eye(2), "V": np.eye(3)})


def test_errors_carry_expression_context():
    env = {"T": np.eye(2), "V": np.zeros((2, 2))}
    with pytest.raises(OpvError) as info:
        evaluate(parse("abs2(T) + entQ(T, V)"), env)
    assert info.value.dsl_pos == 10
    assert info.value.dsl_expr == "entQ(T, V)"


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        evaluate(parse("abs2(T) / (1 - 1)"), {"T": np.eye(2)})


def test_rebind_keeps_unrelated_cache(rng):
    t, v = crandn(rng, 3), crandn(rng, 3)
    ev = Evaluator({"T": t, "V": v, "s": 1.0})
    tree = parse("entQ(T, V) - s * abs2(T)")
    first = ev.value(tree)
    ent = parse("entQ(T, V)")
    cached = ev.value(ent)
    ev.rebind(s=2.0)
    assert ev.value(ent) is cached
    second = ev.value(tree)
    np.testing.assert_allclose(second - first, -mf.abs2(t), atol=1e-12)


def test_free_names():
    assert free_names(parse("geoQ(T, V, nu) <= nabla(abs2(T), abs2(V), 0.5)")) == {"T", "V", "nu"}


# catalog text against direct library calls

def _direct_call(fn, args, kappa):
    """Direct library calls, bypassing the DSL function registry."""
    if fn == "abs2":
        return mf.abs2(args[0])
    if fn == "nabla":
        return ps.arith_mean(*args)
    if fn == "sharp":
        return ps.geo_mean(*args)
    if fn == "bang":
        return ps.harm_mean(*args)
    if fn == "geoQ":
        return ps.quad_geo_mean(*args, kappa)
    if fn == "geoQmod":
        return ps.quad_geo_mean_modulus_form(*args, kappa)
    if fn == "entQ":
        return ps.quad_rel_entropy(*args, kappa)
    if fn == "tsallisQ":
        return ps.quad_tsallis(*args, kappa)
    if fn == "persp":
        return ps.perspective(*args)
    if fn == "perspQ":
        return ps.quad_perspective(*args, kappa)
    if fn == "absPersp":
        return ps.abs_perspective(*args, kappa)
    if fn == "absPerspMean":
        return bd.abs_perspective_mean(*args, bd.DEFAULT_NODES, kappa)
    if fn == "fapply":
        f, x = args
        return mf.apply_fun(x, f.eval, f.dom)
    if fn == "sandwich":
        x, y = (mf.as_hermitian(a) for a in args)
        return mf.hermitian_part(x @ y @ x)
    if fn == "invadj":
        return np.linalg.inv(mf.as_matrix(args[0]).conj().T)
    if fn == "qf":
        a, x = args
        return float(np.real(np.vdot(x, mf.as_hermitian(a) @ x)))
    if fn == "fval":
        f, x = args
        return float(np.real(f(float(x))))
    if fn == "imean":
        return fc.integral_mean(*args)
    if fn == "Lp":
        return fc.p_log_mean(*args)
    if fn == "identric":
        return fc.identric(*args)
    if fn == "ln":
        return math.log(args[0])
    if fn == "rpow":
        return float(args[0]) ** float(args[1])
    if fn == "Tt":
        return fc.t_fun(*args)
    if fn == "fder":
        return fc.derivative_of(args[0])
    if fn == "fderl":
        return fc.derivative_times_identity(args[0])
    if fn == "fsub":
        f = args[0]
        return fc.ScalarFunction(f"fsub({f.name})", f.dom, f.subgrad)
    if fn in fc.CATALOG_IDS:
        return fc.make_catalog_function(fn, tuple(args))
    raise AssertionError(f"no direct call for {fn}")


def direct_value(node, env, kappa=mf.KAPPA_MAX):
    if isinstance(node, Num):
        return float(node.value)
    if isinstance(node, Name):
        v = env[node.id]
        return mf.as_matrix(v) if isinstance(v, np.ndarray) and v.ndim == 2 else v
    if isinstance(node, Neg):
        return -direct_value(node.operand, env, kappa)
    if isinstance(node, Inv):
        v = direct_value(node.operand, env, kappa)
        if isinstance(v, np.ndarray):
            return mf.hermitian_part(np.linalg.inv(mf.as_hermitian(v)))
        return 1.0 / v
    if isinstance(node, BinOp):
        a = direct_value(node.left, env, kappa)
        b = direct_value(node.right, env, kappa)
        return {"+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b, "/": lambda: a / b}[node.op]()
    if isinstance(node, Call):
        args = [direct_value(a, env, kappa) for a in node.args]
        out = _direct_call(node.fn, args, kappa)
        return mf.as_matrix(out) if isinstance(out, np.ndarray) and out.ndim == 2 else out
    raise AssertionError(node)


CLAUSE_RECORDS = [r for r in RECORDS if r.clauses]


@pytest.mark.parametrize("rec", CLAUSE_RECORDS, ids=[r.id for r in CLAUSE_RECORDS])
def test_catalog_text_matches_direct_calls(rec):
    for dim in (1, 3):
        inst = build_instance(rec, seed=11, dim=dim, index=0)
        env = dict(inst.env)
        if rec.anchor == "sweep":
            env["s"] = env["mid"]
        ev = Evaluator(env)
        for tree in rec.trees:
            for member in tree.operands:
                got = ev.value(member)
                want = direct_value(member, env)
                if isinstance(want, np.ndarray):
                    assert np.array_equal(got, want), (rec.id, print_canonical(member))
                else:
                    assert got == want, (rec.id, print_canonical(member))


def test_hand_composed_members_agree(rng):
    t, v = crandn(rng, 4), crandn(rng, 4)
    env = {"T": t, "V": v}
    at, av = mf.abs2(t), mf.abs2(v)
    ev = Evaluator(env)
    np.testing.assert_array_equal(ev.value(parse("nabla(abs2(T), abs2(V), 0.5)")), ps.arith_mean(at, av, 0.5))
    np.testing.assert_array_equal(ev.value(parse("geoQ(T, V, 0.5)")), ps.quad_geo_mean(t, v, 0.5))
    np.testing.assert_array_equal(ev.value(parse("abs2(V) - abs2(T)")), av - at)
    np.testing.assert_array_equal(ev.value(parse("entQ(T, V)")), ps.quad_rel_entropy(t, v))


# single-token deletion


def corpus():
    texts = [c for r in RECORDS for c in r.clauses]
    texts += ["abs2(V) - abs2(T)", "S(A, B) <= B - A", "geoQ(T, V, 0.5) <= nabla(abs2(T), abs2(V), 0.5)"]
    return texts


def _group_end(tokens, k):
    """Offset of the ")" closing the innermost group that encloses token k, else None."""
    stack, pairs = [], {}
    for i, tok in enumerate(tokens):
        if tok.text == "(":
            stack.append(i)
        elif tok.text == ")":
            pairs[stack.pop()] = i
    best = None
    for o, c in pairs.items():
        if o < k < c and (best is None or o > best[0]):
            best = (o, c)
    return None if best is None else tokens[best[1]].pos


def deletion_outcomes(text):
    tokens = tokenize(text)[:-1]
    for k, tok in enumerate(tokens):
        mutated = text[: tok.pos] + " " + text[tok.end:]
        try:
            parse(mutated)
        except DslError as exc:
            end = None if tok.text in "()" else _group_end(tokens, k)
            if end is None:
                limit = len(mutated)
            else:
                limit = end - len(tok.text) + 1
            yield tok, exc, limit, tokens[k - 1] if k else None
        else:
            yield tok, None, None, None


def test_single_token_deletion_fuzz():
    errors = at_token = 0
    for text in corpus():
        for tok, exc, limit, prev in deletion_outcomes(text):
            if exc is None:
                continue
            errors += 1
            assert exc.line >= 1 and exc.col >= 1
            if isinstance(exc, DslUnknownFunction) and prev is not None and exc.pos == prev.pos:
                # the deletion turned the preceding name into a call
                continue
            assert tok.pos <= exc.pos <= limit, (text, tok, str(exc))
            at_token += exc.pos <= tok.pos + 1
    assert errors > 1000
    # a large share of errors point at the deletion site itself
    print(f"deletion fuzz: {errors} errors, {at_token / errors:.1%} at the deleted token")
    assert at_token / errors > 0.4
