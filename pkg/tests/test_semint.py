import math
import random

import pytest

from linmetric.core import (
    Const,
    EMPTY_ENV,
    FnApp,
    I,
    R,
    Star,
    SymbolRegistry,
    Var,
    default_registry,
    env_of,
    parse_env,
    parse_term,
    parse_type,
    typecheck,
)
from linmetric.dynamics import beta_normalize, evaluate
from linmetric.semden import BOTTOM, UNIT, ProbeBattery
from linmetric.semint import (
    ModelError,
    WireFunction,
    decompose,
    export_diagram,
    first_order_distance,
    format_int_term,
    int_distance,
    int_term_denotation,
    interp_int,
    reset_trace_stats,
    symmetry,
    trace,
    trace_stats,
    wire_signature,
)

REG = default_registry()
BATTERY = ProbeBattery(REG, seed=0)


def fg_registry() -> SymbolRegistry:
    return SymbolRegistry.from_config(
        {
            "symbols": [
                {"name": "f", "arity": 2, "builtin": "add"},
                {"name": "g", "arity": 2, "builtin": "min"},
                {"name": "add", "arity": 2, "builtin": "add"},
                {"name": "sin", "arity": 1, "builtin": "sin"},
            ]
        }
    )


# -- wire signatures -----------------------------------------------------------


def test_wire_signature_three_functions():
    env = parse_env("x:R -o R, y:R -o R, z:R -o R")
    sig = wire_signature(env, R)
    assert (sig.m, sig.n) == (3, 4)
    assert sig.in_labels == ("x", "y", "z")
    assert sig.out_labels == ("x", "y", "z", "ret")


def test_wire_signature_closed_real():
    sig = wire_signature(EMPTY_ENV, R)
    assert (sig.m, sig.n) == (0, 1)


def test_wire_signature_unit_query():
    env = parse_env("k:R -o I")
    sig = wire_signature(env, I)
    assert (sig.m, sig.n) == (1, 2)
    assert sig.in_types == ("I",)
    assert sig.out_types == ("R", "I")


# -- trace laws ------------------------------------------------------------------


def test_trace_yanking():
    sym = symmetry(("R", "R"), 1)
    tr = trace(sym, 1)
    assert tr((7.0,)) == (7.0,)
    assert tr((-2.5,)) == (-2.5,)


def test_trace_zero_width_is_identity():
    wf = WireFunction(("R",), ("R",), lambda i: (i[0],))
    assert trace(wf, 0) is wf


def test_trace_converges_within_bound():
    reset_trace_stats()
    sym = symmetry(("R", "R"), 1)
    trace(sym, 1)((1.0,))
    assert trace_stats["traces"] >= 1
    assert trace_stats["max_iterations"] <= 2


def _random_wire_function(rng: random.Random, n_in: int, n_out: int) -> WireFunction:
    """Outputs built from passthroughs, constants, and symbol applications."""
    plans = []
    for _ in range(n_out):
        kind = rng.choice(["pass", "const", "sin", "add"])
        if kind == "pass":
            plans.append(("pass", rng.randrange(n_in)))
        elif kind == "const":
            plans.append(("const", rng.uniform(-5, 5)))
        elif kind == "sin":
            plans.append(("sin", rng.randrange(n_in)))
        else:
            plans.append(("add", rng.randrange(n_in), rng.randrange(n_in)))

    def step(inputs):
        out = []
        for plan in plans:
            if plan[0] == "pass":
                out.append(inputs[plan[1]])
            elif plan[0] == "const":
                out.append(plan[1])
            elif plan[0] == "sin":
                v = inputs[plan[1]]
                out.append(BOTTOM if v is BOTTOM else math.sin(v))
            else:
                a, b = inputs[plan[1]], inputs[plan[2]]
                out.append(BOTTOM if a is BOTTOM or b is BOTTOM else a + b)
        return tuple(out)

    return WireFunction(("R",) * n_in, ("R",) * n_out, step)


def test_trace_naturality_on_random_functions():
    rng = random.Random(42)
    for _ in range(100):
        f = _random_wire_function(rng, 2, 2)
        tr_f = trace(f, 1)
        g_plan = rng.choice([math.sin, math.cos, lambda a: a, lambda a: a - 1.0])
        for x in (-1.0, 0.0, 2.5):
            # naturality in the straight-through input: tr(f o (g (x) id)) = tr(f) o g
            def pre(inputs):
                return f((g_plan(inputs[0]), inputs[1]))

            lhs = trace(WireFunction(("R", "R"), ("R", "R"), pre), 1)((x,))
            rhs = tr_f((g_plan(x),))
            assert lhs == rhs


def test_trace_detects_non_monotone_step():
    # a step that keeps changing its feedback value is flagged
    state = {"i": 0}

    def step(inputs):
        state["i"] += 1
        return (inputs[0], float(state["i"]))

    wf = WireFunction(("R", "R"), ("R", "R"), step)
    with pytest.raises(ModelError):
        trace(wf, 1)((0.0,))


# -- interpretation ---------------------------------------------------------------


def test_interp_constant():
    wf = interp_int(EMPTY_ENV, Const(3.0))
    assert wf(()) == (3.0,)


def test_interp_unit_query():
    env = parse_env("k:R -o I")
    wf = interp_int(env, parse_term("k 2.0"))
    assert wf((UNIT,)) == (2.0, UNIT)


def test_interp_query_closure_applied():
    # sending a query and applying the symbol wrapper yields the composite
    m = parse_term(r"(\k:(R -o R). k 4.0) (\x:R. sin(x))")
    wf = interp_int(EMPTY_ENV, m)
    assert wf(()) == (math.sin(4.0),)


def test_interp_second_order_composition():
    n = parse_term(r"(\k:((R -o R) -o R). cos(k (\x:R. sin(x)))) (\k:(R -o R). k 2.0)")
    wf = interp_int(EMPTY_ENV, n)
    assert wf(()) == (math.cos(math.sin(2.0)),)


def test_interp_matches_eval_on_observables():
    cases = [
        "sin(cos(2.0))",
        "1.0 * 2.0 * 3.0",
        "let x (x) y = 1.0 * 2.0 in y * x",
        r"(\p:(R (x) R). let a (x) b = p in add(a, b)) (0.5 * 0.25)",
        "let * = * in 4.0 * *",
    ]
    for text in cases:
        m = parse_term(text)
        ty = typecheck(EMPTY_ENV, m)
        wf = interp_int(EMPTY_ENV, m)
        got = wf(())
        want = _flatten_value(evaluate(m))
        assert got == tuple(want), text


def _flatten_value(v):
    from linmetric.core import Pair as P, Const as C, Star as S

    if isinstance(v, C):
        return [v.value]
    if isinstance(v, S):
        return [UNIT]
    if isinstance(v, P):
        return _flatten_value(v.left) + _flatten_value(v.right)
    raise AssertionError(v)


def test_interp_open_function_wires():
    env = parse_env("x:R -o R")
    wf = interp_int(env, parse_term("x 3.0"))
    # input: x's reply; outputs: query to x, then the result (the reply)
    assert wf((10.0,)) == (3.0, 10.0)


# -- decomposition -----------------------------------------------------------------


def test_decompose_unit_query():
    env = parse_env("k:R -o I")
    hs, part = decompose(env, parse_term("k 2.0"))
    assert hs == [Const(2.0), Var("x1")]
    assert part == [frozenset(), frozenset({1})]


def test_decompose_constant():
    hs, _ = decompose(EMPTY_ENV, Const(3.0))
    assert hs == [Const(3.0)]


def test_decompose_figure_example():
    reg = fg_registry()
    env = parse_env("x:R -o R, y:R -o R, z:R -o R")
    m = parse_term("f(x (y 0.0), z 2.0)", reg)
    n = parse_term("g(x (z 1.0), y 3.0)", reg)
    hm, _ = decompose(env, m, reg)
    hn, _ = decompose(env, n, reg)
    assert hm == [Var("x2"), Const(0.0), Const(2.0), FnApp("f", (Var("x1"), Var("x3")))]
    assert hn == [Var("x3"), Const(3.0), Const(1.0), FnApp("g", (Var("x1"), Var("x2")))]
    labels = {"x1": "x", "x2": "y", "x3": "z"}
    assert [format_int_term(h, labels) for h in hm] == ["y", "0", "2", "f(x, z)"]
    assert sorted(format_int_term(h, labels) for h in hm) == sorted(["y", "f(x, z)", "0", "2"])
    assert sorted(format_int_term(h, labels) for h in hn) == sorted(["z", "g(x, y)", "3", "1"])


def test_decompose_requires_normal_form():
    with pytest.raises(ModelError):
        decompose(EMPTY_ENV, parse_term(r"(\x:R. x) 1.0"))


def test_decompose_lambda_queries():
    m = parse_term(r"\k:(R -o R). k 0.0")
    hs, _ = decompose(EMPTY_ENV, m)
    assert hs == [Const(0.0), Var("x1")]


def test_decompose_let_pair():
    env = parse_env("p:R (x) R")
    hs, _ = decompose(env, parse_term("let a (x) b = p in b * a"))
    assert hs == [Var("x2"), Var("x1")]


def test_decompose_let_star_drops_unit_reply():
    env = parse_env("k:R -o I")
    hs, part = decompose(env, parse_term("let * = k 2.0 in 5.0"))
    assert hs == [Const(2.0), Const(5.0)]
    assert part == [frozenset(), frozenset()]


def test_decompose_extensionality_on_examples():
    reg = fg_registry()
    cases = [
        ("x:R -o R, y:R -o R, z:R -o R", "f(x (y 0.0), z 2.0)"),
        ("x:R -o R, y:R -o R, z:R -o R", "g(x (z 1.0), y 3.0)"),
        ("k:R -o I", "k 2.0"),
        ("", r"\k:(R -o R). k 0.0"),
        ("p:R (x) R", "let a (x) b = p in b * a"),
        ("", r"\k:(R -o R). add(k 1.0, 2.0)"),
    ]
    rng = random.Random(5)
    for env_text, term_text in cases:
        env = parse_env(env_text)
        m = parse_term(term_text, reg)
        hs, _ = decompose(env, m, reg)
        wf = interp_int(env, m, reg)
        sig = wire_signature(env, typecheck(env, m, reg))
        for _ in range(25):
            ins = tuple(
                UNIT if t == "I" else rng.uniform(-20, 20) for t in sig.in_types
            )
            got = wf(ins)
            assign = {f"x{i + 1}": v for i, v in enumerate(ins)}
            want = tuple(int_term_denotation(h, assign, reg) for h in hs)
            for a, b in zip(got, want):
                if a is UNIT or b is UNIT:
                    assert a is b
                else:
                    assert abs(a - b) <= 1e-9


# -- distances ---------------------------------------------------------------------


def test_int_distance_unit_queries():
    env = parse_env("k:R -o I")
    d = int_distance(env, I, parse_term("k 2.0"), parse_term("k 3.0"), BATTERY)
    assert (d.lo, d.hi) == (1.0, 1.0)
    assert not d.normalized


def test_int_distance_query_closures():
    ty = parse_type("(R -o R) -o R")
    m = parse_term(r"\k:(R -o R). k 0.0")
    n = parse_term(r"\k:(R -o R). k 1.0")
    d = int_distance(EMPTY_ENV, ty, m, n, BATTERY)
    assert (d.lo, d.hi) == (1.0, 1.0)


def test_int_distance_constant_wrapper_still_separates():
    reg = SymbolRegistry.from_config(
        {
            "symbols": [
                {"name": "c", "arity": 1, "builtin": "const", "value": 7.0},
                {"name": "add", "arity": 2, "builtin": "add"},
            ]
        }
    )
    battery = ProbeBattery(reg, seed=0)
    ty = parse_type("(R -o R) -o R")
    m = parse_term(r"\k:(R -o R). c(k 0.0)", reg)
    n = parse_term(r"\k:(R -o R). c(k 1.0)", reg)
    d = int_distance(EMPTY_ENV, ty, m, n, battery, registry=reg)
    assert (d.lo, d.hi) == (1.0, 1.0)


def test_int_distance_normalizes_and_flags():
    ty = R
    m = parse_term(r"(\x:R. x) 1.0")
    n = parse_term("1.0")
    d = int_distance(EMPTY_ENV, ty, m, n, BATTERY)
    assert d.normalized
    assert (d.lo, d.hi) == (0.0, 0.0)


def test_int_distance_same_skeleton_literals():
    env = parse_env("k:R -o R")
    m = parse_term("add(k 1.0, 5.0)")
    n = parse_term("add(k 2.0, 7.0)")
    d = int_distance(env, R, m, n, BATTERY)
    # per-wire: |1-2| on the query wire; result add(x1,5) vs add(x1,7) has sup 2
    assert d.lo == 3.0
    assert d.hi == 3.0


def test_first_order_distance_cases():
    assert first_order_distance(Var("x1"), Var("x1"), BATTERY, REG).lo == 0.0
    d = first_order_distance(Const(2.0), Const(3.0), BATTERY, REG)
    assert (d.lo, d.hi) == (1.0, 1.0)
    d = first_order_distance(Var("x1"), Var("x2"), BATTERY, REG)
    assert d.hi == math.inf
    assert d.lo > 0.0
    d = first_order_distance(
        FnApp("sin", (Var("x1"),)), FnApp("cos", (Var("x1"),)), BATTERY, REG
    )
    assert d.hi == pytest.approx(math.sqrt(2.0))
    assert d.lo <= d.hi
    assert d.lo >= 1.3


def test_first_order_distance_unit_wire():
    assert first_order_distance(Var("x1"), Star(), BATTERY, REG, wire_type="I").hi == 0.0


# -- diagrams ----------------------------------------------------------------------


def test_export_diagram_constant():
    dot = export_diagram(EMPTY_ENV, Const(3.0))
    assert "digraph wires" in dot
    assert 'label="3"' in dot
    assert "rank=sink" in dot


def test_export_diagram_unit_query():
    env = parse_env("k:R -o I")
    dot = export_diagram(env, parse_term("k 2.0"))
    assert 'label="2"' in dot
    assert "i0" in dot and "o1" in dot


def test_export_diagram_deterministic():
    reg = fg_registry()
    env = parse_env("x:R -o R, y:R -o R, z:R -o R")
    m = parse_term("f(x (y 0.0), z 2.0)", reg)
    assert export_diagram(env, m, reg) == export_diagram(env, m, reg)


def _assert_extensional(env_text, term_text, reg=None, samples=40):
    reg = reg if reg is not None else REG
    env = parse_env(env_text)
    m = parse_term(term_text, reg)
    ty = typecheck(env, m, reg)
    hs, _ = decompose(env, m, reg)
    wf = interp_int(env, m, reg)
    sig = wire_signature(env, ty)
    assert len(hs) == sig.n
    rng = random.Random(99)
    for _ in range(samples):
        ins = tuple(UNIT if t == "I" else rng.uniform(-10, 10) for t in sig.in_types)
        got = wf(ins)
        assign = {f"x{i + 1}": v for i, v in enumerate(ins)}
        want = tuple(int_term_denotation(h, assign, reg) for h in hs)
        for a, b in zip(got, want):
            if a is UNIT or b is UNIT:
                assert a is b
            else:
                assert abs(a - b) <= 1e-9
    return hs


def test_decompose_env_function_applied_to_env_function():
    # the argument's wires thread through the head variable's ports
    hs = _assert_extensional("x:(R -o I) -o R, k:R -o I", "x k")
    assert hs == [Var("x3"), Var("x1"), Var("x2")]


def test_decompose_env_function_applied_to_wrapper():
    hs = _assert_extensional("x:(R -o R) -o R", r"x (\v:R. sin(v))")
    assert hs == [FnApp("sin", (Var("x1"),)), Var("x2")]


def test_decompose_tensor_of_functions_env():
    _assert_extensional(
        "p:(R -o R) (x) (R -o I)",
        "let f (x) k = p in let * = k (f 1.0) in 2.0",
    )


def test_decompose_higher_order_result():
    _assert_extensional("", r"\x:(R -o R). \y:R. x (add(y, 1.0))")


def test_decompose_unit_function_chain():
    # the unit value in argument position takes parentheses: k (*)
    _assert_extensional("k:I -o I, j:I -o R", "let * = k (*) in j (*)")


def test_decompose_argument_under_pair():
    _assert_extensional("f:R -o R (x) R", "let a (x) b = f 3.0 in add(a, b)")


def test_decompose_second_order_with_inner_symbol():
    _assert_extensional(
        "h:(R -o R) -o R (x) R",
        r"let a (x) b = h (\v:R. cos(v)) in add(a, b)",
    )


def test_wire_signature_agrees_with_polarity():
    from linmetric.core import polarity
    from linmetric.gen import gen_type

    rng = random.Random(17)
    for _ in range(200):
        tys = [gen_type(rng, 2, rng.randint(1, 4)) for _ in range(rng.randint(0, 3))]
        res = gen_type(rng, 2, rng.randint(1, 4))
        env = parse_env(", ".join(f"v{i}:{_ptype(t)}" for i, t in enumerate(tys)))
        sig = wire_signature(env, res)
        p_env = polarity(tys)
        p_res = polarity([res])
        assert sig.m == p_env.plus + p_res.minus
        assert sig.n == p_env.minus + p_res.plus


def _ptype(t):
    from linmetric.core import print_type

    return print_type(t)


def test_interp_captured_environment_through_application():
    # the argument closure consumes an ambient variable; its wire must
    # thread through the feedback composition
    env = parse_env("w:R")
    m = parse_term(r"(\k:(R -o R). k 2.0) (\x:R. add(x, w))")
    wf = interp_int(env, m)
    assert wf((5.0,)) == (7.0,)
    assert wf((-1.5,)) == (0.5,)


def test_interp_three_level_nesting_agrees_with_eval():
    m = parse_term(
        r"(\h:((R -o R) -o R). cos(h (\x:R. sin(x))))"
        r" (\k:(R -o R). add(k 1.0, k2))",
        REG,
    )
    # free variable k2 : R keeps one wire open
    env = parse_env("k2:R")
    wf = interp_int(env, m)
    got = wf((0.25,))
    want = math.cos(math.sin(1.0) + 0.25)
    assert abs(got[0] - want) <= 1e-12


def test_int_distance_on_non_normal_pair_with_env():
    env = parse_env("w:R")
    m = parse_term(r"(\k:(R -o R). k 2.0) (\x:R. add(x, w))")
    n = parse_term("add(3.0, w)")
    d = int_distance(env, R, m, n, BATTERY)
    assert d.normalized
    # normal forms are add(2,w) vs add(3,w): single aligned literal gap
    assert (d.lo, d.hi) == (1.0, 1.0)


def test_first_order_distance_folds_literal_subterms():
    h1 = FnApp("cos", (Const(-2.43),))
    h2 = FnApp("cos", (FnApp("add", (Const(0.0), Const(-2.43))),))
    d = first_order_distance(h1, h2, BATTERY, REG)
    assert (d.lo, d.hi) == (0.0, 0.0)


def test_int_distance_zero_on_folded_equal_pair():
    env = parse_env("w:R")
    m = parse_term("add(w, cos(-2.43))")
    n = parse_term("add(w, cos(add(0.0, -2.43)))")
    d = int_distance(env, R, m, n, BATTERY)
    assert (d.lo, d.hi) == (0.0, 0.0)
