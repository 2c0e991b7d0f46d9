"""Syntactic metrics and the cross-engine comparison layer.

Four engines bound the distance between two typed terms:

* ``obs_lower_bound`` enumerates closing/observing contexts and reports
  the largest separation actually witnessed (a sound lower bound for
  every admissible metric);
* the denotational and interactive engines live in ``semden``/``semint``
  and report enclosures;
* ``equ_upper_bound`` synthesizes a quantitative derivation whose bound
  is a sound upper bound for every admissible metric.

``ordering_report`` runs them all and asserts the interval-consistency
chain obs ≤ den ≤ int ≤ equ that the theory predicts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    App,
    Const,
    Context,
    DistInterval,
    EMPTY_ENV,
    EPS,
    Env,
    FnApp,
    HOLE,
    Hole,
    INF,
    Lam,
    LetPair,
    LetStar,
    LinError,
    Pair,
    R,
    STAR,
    Star,
    SymbolRegistry,
    Term,
    TLolli,
    TReal,
    TTensor,
    TUnit,
    Ty,
    TypeError_,
    Var,
    check_context,
    children,
    default_registry,
    is_observable,
    plug,
    print_term,
    print_type,
    typecheck,
)
from .dynamics import alpha_eq, eq_canonical, eq_decide, evaluate
from .semden import ProbeBattery, den_distance, ground_l1
from .semint import int_distance


class CertificateError(LinError):
    """A quantitative derivation failed validation."""


# ---------------------------------------------------------------------------
# Quantitative derivations


@dataclass(frozen=True)
class QDerivation:
    pass


@dataclass(frozen=True)
class Judgment:
    env: Env
    ty: Ty
    lhs: Term
    rhs: Term
    r: float


@dataclass(frozen=True)
class Eq0(QDerivation):
    """Zero distance from a derivable equality (validated by eq_decide)."""

    env: Env
    ty: Ty
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class ConstAxiom(QDerivation):
    a: float
    b: float
    r: float


@dataclass(frozen=True)
class SymRule(QDerivation):
    sub: QDerivation


@dataclass(frozen=True)
class Trans(QDerivation):
    left: QDerivation
    right: QDerivation


@dataclass(frozen=True)
class CtxRule(QDerivation):
    ctx: Context
    env: Env
    ty: Ty
    sub: QDerivation


def _check_node(d: QDerivation, registry: SymbolRegistry, path: str) -> Judgment:
    if isinstance(d, Eq0):
        t1 = typecheck(d.env, d.lhs, registry)
        t2 = typecheck(d.env, d.rhs, registry)
        if t1 != d.ty or t2 != d.ty:
            raise CertificateError(f"{path}: Eq0 sides do not have the stated type")
        if not eq_decide(d.lhs, d.rhs, registry):
            raise CertificateError(f"{path}: Eq0 on terms not provably equal")
        return Judgment(d.env, d.ty, d.lhs, d.rhs, 0.0)
    if isinstance(d, ConstAxiom):
        if abs(d.a - d.b) > d.r + EPS:
            raise CertificateError(f"{path}: constant axiom |{d.a} - {d.b}| > {d.r}")
        return Judgment(EMPTY_ENV, R, Const(d.a), Const(d.b), d.r)
    if isinstance(d, SymRule):
        j = _check_node(d.sub, registry, path + ".sym")
        return Judgment(j.env, j.ty, j.rhs, j.lhs, j.r)
    if isinstance(d, Trans):
        jl = _check_node(d.left, registry, path + ".left")
        jr = _check_node(d.right, registry, path + ".right")
        if jl.env.bindings != jr.env.bindings or jl.ty != jr.ty:
            raise CertificateError(f"{path}: transitivity across different judgments")
        if not alpha_eq(jl.rhs, jr.lhs):
            raise CertificateError(f"{path}: transitivity endpoints do not meet")
        return Judgment(jl.env, jl.ty, jl.lhs, jr.rhs, jl.r + jr.r)
    if isinstance(d, CtxRule):
        j = _check_node(d.sub, registry, path + ".ctx")
        if not check_context(d.ctx, (j.env, j.ty), (d.env, d.ty), registry):
            raise CertificateError(f"{path}: context does not map the sub-judgment")
        return Judgment(d.env, d.ty, plug(d.ctx, j.lhs), plug(d.ctx, j.rhs), j.r)
    raise CertificateError(f"{path}: unknown rule {type(d).__name__}")


def check_qderivation(d: QDerivation, registry: Optional[SymbolRegistry] = None) -> float:
    """Validate every node and return the certified bound at the root."""
    registry = registry if registry is not None else default_registry()
    return _check_node(d, registry, "root").r


def qderivation_judgment(d: QDerivation, registry: Optional[SymbolRegistry] = None) -> Judgment:
    registry = registry if registry is not None else default_registry()
    return _check_node(d, registry, "root")


def qderivation_to_dict(d: QDerivation) -> dict:
    if isinstance(d, Eq0):
        return {"rule": "eq0", "lhs": print_term(d.lhs), "rhs": print_term(d.rhs)}
    if isinstance(d, ConstAxiom):
        return {"rule": "const", "a": d.a, "b": d.b, "r": d.r}
    if isinstance(d, SymRule):
        return {"rule": "sym", "sub": qderivation_to_dict(d.sub)}
    if isinstance(d, Trans):
        return {
            "rule": "trans",
            "left": qderivation_to_dict(d.left),
            "right": qderivation_to_dict(d.right),
        }
    if isinstance(d, CtxRule):
        return {"rule": "ctx", "context": print_term(d.ctx), "sub": qderivation_to_dict(d.sub)}
    raise AssertionError(d)


# ---------------------------------------------------------------------------
# Equational upper bounds


def _literal_diffs(a: Term, b: Term, ma: dict, mb: dict) -> Optional[list[tuple[tuple, float, float]]]:
    """Positions where two alpha-aligned terms differ, literals only."""
    if isinstance(a, Const) and isinstance(b, Const):
        if a.value == b.value:
            return []
        return [((), a.value, b.value)]
    if type(a) is not type(b):
        return None
    if isinstance(a, Var):
        return [] if ma.get(a.name, a.name) == mb.get(b.name, b.name) else None
    if isinstance(a, (Star, Hole)):
        return []
    if isinstance(a, FnApp):
        if a.symbol != b.symbol or len(a.args) != len(b.args):
            return None
        out = []
        for i, (x, y) in enumerate(zip(a.args, b.args)):
            sub = _literal_diffs(x, y, ma, mb)
            if sub is None:
                return None
            out += [((i,) + p, u, v) for p, u, v in sub]
        return out
    if isinstance(a, Lam):
        if a.ann != b.ann:
            return None
        tag = f"#b{len(ma)}"
        sub = _literal_diffs(a.body, b.body, {**ma, a.var: tag}, {**mb, b.var: tag})
        if sub is None:
            return None
        return [((0,) + p, u, v) for p, u, v in sub]
    if isinstance(a, LetPair):
        s = _literal_diffs(a.scrutinee, b.scrutinee, ma, mb)
        if s is None:
            return None
        t1, t2 = f"#b{len(ma)}", f"#b{len(ma)}'"
        body = _literal_diffs(
            a.body, b.body, {**ma, a.var1: t1, a.var2: t2}, {**mb, b.var1: t1, b.var2: t2}
        )
        if body is None:
            return None
        return [((0,) + p, u, v) for p, u, v in s] + [((1,) + p, u, v) for p, u, v in body]
    # App, Pair, LetStar: positional children
    subs = []
    for i, (x, y) in enumerate(zip(children(a), children(b))):
        sub = _literal_diffs(x, y, ma, mb)
        if sub is None:
            return None
        subs += [((i,) + p, u, v) for p, u, v in sub]
    return subs


def _replace_at(t: Term, path: tuple, new: Term) -> Term:
    if not path:
        return new
    kids = list(children(t))
    kids[path[0]] = _replace_at(kids[path[0]], path[1:], new)
    from .dynamics import _rebuild

    return _rebuild(t, kids)


def equ_upper_bound(
    env: Env,
    ty: Ty,
    m: Term,
    n: Term,
    registry: Optional[SymbolRegistry] = None,
) -> tuple[float, Optional[QDerivation]]:
    """Upper bound with a machine-checkable derivation, or infinity.

    Both terms are canonicalized; if the canonical forms agree up to
    numeric literals at aligned positions, the bound is the sum of the
    literal gaps, realized by a chain of single-literal replacements.
    """
    registry = registry if registry is not None else default_registry()
    if typecheck(env, m, registry) != ty or typecheck(env, n, registry) != ty:
        raise TypeError_("equ_upper_bound: terms do not have the stated type")
    cm = eq_canonical(m, registry)
    cn = eq_canonical(n, registry)
    if alpha_eq(cm, cn):
        return 0.0, Eq0(env, ty, m, n)
    diffs = _literal_diffs(cm, cn, {}, {})
    if diffs is None:
        return INF, None
    steps: list[QDerivation] = []
    current = cm
    for path, a, b in diffs:
        ctx = _replace_at(current, path, HOLE)
        steps.append(CtxRule(ctx, env, ty, ConstAxiom(a, b, abs(a - b))))
        current = _replace_at(current, path, Const(b))
    chain: QDerivation = steps[0]
    for s in steps[1:]:
        chain = Trans(chain, s)
    cert: QDerivation = chain
    if not alpha_eq(m, cm):
        cert = Trans(Eq0(env, ty, m, cm), cert)
    if not alpha_eq(cn, n):
        cert = Trans(cert, Eq0(env, ty, cn, n))
    r = sum(abs(a - b) for _, a, b in diffs)
    return r, cert


# ---------------------------------------------------------------------------
# Metric logical relations


def _eval_pair(m: Term, n: Term, registry: SymbolRegistry) -> tuple[Term, Term]:
    return evaluate(m, registry), evaluate(n, registry)


def log_relate(
    v: Term,
    u: Term,
    ty: Ty,
    r: float,
    depth: int = 2,
    registry: Optional[SymbolRegistry] = None,
    battery: Optional[ProbeBattery] = None,
    witness: Optional[list] = None,
) -> str:
    """Tri-state logical relation test: 'holds' | 'fails' | 'unknown'.

    Exact (hence definitive) at observable types.  At function types the
    universally quantified clause is probed with finitely many argument
    pairs: a counterexample is definitive (appended to ``witness`` if a
    list is supplied), absence of one is not.
    """
    registry = registry if registry is not None else default_registry()
    battery = battery if battery is not None else ProbeBattery(registry)
    if is_observable(ty):
        d = ground_l1(*_eval_pair(v, u, registry), ty)
        if d <= r + EPS:
            return "holds"
        if witness is not None:
            witness.append(("observable", v, u, d, r))
        return "fails"
    if r == INF:
        return "unknown"
    if isinstance(ty, TTensor):
        vv, uu = _eval_pair(v, u, registry)
        obs = _observable_part_l1(vv, uu, ty)
        if obs > r + EPS:
            if witness is not None:
                witness.append(("observable-part", vv, uu, obs, r))
            return "fails"
        for comp_v, comp_u, comp_ty in _function_components(vv, uu, ty):
            sub = log_relate(comp_v, comp_u, comp_ty, r - obs, depth, registry, battery, witness)
            if sub == "fails":
                return "fails"
        return "unknown"
    if isinstance(ty, TLolli):
        if depth <= 0:
            return "unknown"
        vv, uu = _eval_pair(v, u, registry)
        if not (isinstance(vv, Lam) and isinstance(uu, Lam)):
            return "unknown"
        for arg_v, arg_u, s in _argument_pairs(ty.arg, registry):
            body_v = App(vv, arg_v)
            body_u = App(uu, arg_u)
            sub = log_relate(body_v, body_u, ty.res, r + s, depth - 1, registry, battery, witness)
            if sub == "fails":
                if witness is not None:
                    witness.append(("argument-pair", arg_v, arg_u, s))
                return "fails"
        return "unknown"
    raise AssertionError(ty)


def _observable_part_l1(v: Term, u: Term, ty: Ty) -> float:
    if is_observable(ty):
        return ground_l1(v, u, ty)
    if isinstance(ty, TTensor):
        return _observable_part_l1(v.left, u.left, ty.left) + _observable_part_l1(
            v.right, u.right, ty.right
        )
    return 0.0


def _function_components(v: Term, u: Term, ty: Ty):
    if isinstance(ty, TLolli):
        yield v, u, ty
    elif isinstance(ty, TTensor):
        yield from _function_components(v.left, u.left, ty.left)
        yield from _function_components(v.right, u.right, ty.right)


def _argument_pairs(ty: Ty, registry: SymbolRegistry):
    """Finitely many (V, U, s) with V and U provably within distance s."""
    values = probe_values(ty, registry)
    for v in values:
        yield v, v, 0.0
    # literal-perturbed pairs: distance certified by the literal gap
    for v in values[:4]:
        lits = [s for s in _all_const_paths(v)]
        if lits:
            path, a = lits[0]
            for delta in (0.5, 2.0):
                yield v, _replace_at(v, path, Const(a + delta)), delta + 1e-12


def _all_const_paths(t: Term, path: tuple = ()):  # leftmost first
    if isinstance(t, Const):
        yield path, t.value
    for i, c in enumerate(children(t)):
        yield from _all_const_paths(c, path + (i,))


def log_distance_observable(
    m: Term, n: Term, ty: Ty, registry: Optional[SymbolRegistry] = None
) -> float:
    """Exact logical distance for closed terms of observable type."""
    registry = registry if registry is not None else default_registry()
    if not is_observable(ty):
        raise TypeError_("type is not observable; use obs_lower_bound instead")
    return ground_l1(*_eval_pair(m, n, registry), ty)


# ---------------------------------------------------------------------------
# Observational lower bounds


@dataclass(frozen=True)
class ObsWitness:
    """A context, the values it produced, and the separation achieved."""

    context: Term
    lhs_value: Term
    rhs_value: Term
    value: float

    def to_dict(self) -> dict:
        return {
            "context": print_term(self.context),
            "lhs_value": print_term(self.lhs_value),
            "rhs_value": print_term(self.rhs_value),
            "value": self.value,
        }


@dataclass(frozen=True)
class ObsBudget:
    apply_depth: int = 2
    values_per_type: int = 5
    max_contexts: int = 300


def probe_values(ty: Ty, registry: SymbolRegistry, limit: int = 8) -> list[Term]:
    """Closed syntactic values of a type, deterministic, possibly empty."""
    out = _probe_values(ty, registry, depth=3)
    return out[:limit]


_PROBE_REALS = (0.0, 1.0, -1.0, 0.5, 10.0)


def _probe_values(ty: Ty, registry: SymbolRegistry, depth: int) -> list[Term]:
    if depth < 0:
        return []
    if isinstance(ty, TReal):
        return [Const(a) for a in _PROBE_REALS]
    if isinstance(ty, TUnit):
        return [STAR]
    if isinstance(ty, TTensor):
        ls = _probe_values(ty.left, registry, depth - 1)
        rs = _probe_values(ty.right, registry, depth - 1)
        return [Pair(a, b) for a, b in itertools.islice(itertools.product(ls, rs), 8)]
    if isinstance(ty, TLolli):
        out = []
        x = "p"
        for body in _consumers(Var(x), ty.arg, ty.res, registry, depth - 1):
            out.append(Lam(x, ty.arg, body))
        return out
    raise AssertionError(ty)


def _consumers(scrut: Term, src: Ty, dst: Ty, registry: SymbolRegistry, depth: int) -> list[Term]:
    """Bodies consuming ``scrut : src`` linearly and producing ``dst``."""
    if depth < 0:
        return []
    unary = [s for s in registry.names() if registry.arity(s) == 1]
    binary = [s for s in registry.names() if registry.arity(s) == 2]
    if isinstance(dst, TReal):
        if isinstance(src, TReal):
            out = [scrut]
            out += [FnApp(s, (scrut,)) for s in unary[:2]]
            out += [FnApp(s, (scrut, Const(1.0))) for s in binary[:1]]
            return out
        if isinstance(src, TUnit):
            return [LetStar(scrut, Const(a)) for a in (0.0, 1.0)]
        if isinstance(src, TTensor):
            lefts = _consumers(Var("a_"), src.left, R, registry, depth - 1)
            rights = _consumers(Var("b_"), src.right, R, registry, depth - 1)
            out = []
            for s in binary[:1]:
                for l in lefts[:2]:
                    for r_ in rights[:2]:
                        out.append(LetPair("a_", "b_", scrut, FnApp(s, (l, r_))))
            # unit-halves need no symbol
            if isinstance(src.right, TUnit):
                for l in lefts[:2]:
                    out.append(LetPair("a_", "b_", scrut, LetStar(Var("b_"), l)))
            if isinstance(src.left, TUnit):
                for r_ in rights[:2]:
                    out.append(LetPair("a_", "b_", scrut, LetStar(Var("a_"), r_)))
            return out
        if isinstance(src, TLolli):
            out = []
            for arg in _probe_values(src.arg, registry, depth - 1)[:3]:
                applied = App(scrut, arg)
                out += _consumers(applied, src.res, R, registry, depth - 1)[:2]
            return out
    if isinstance(dst, TUnit):
        if isinstance(src, TUnit):
            return [scrut]
        if isinstance(src, TLolli):
            out = []
            for arg in _probe_values(src.arg, registry, depth - 1)[:2]:
                out += _consumers(App(scrut, arg), src.res, dst, registry, depth - 1)[:2]
            return out
        if isinstance(src, TTensor):
            out = []
            for rest in _consumers(Var("b_"), src.right, dst, registry, depth - 1):
                if isinstance(src.left, TUnit):
                    out.append(LetPair("a_", "b_", scrut, LetStar(Var("a_"), rest)))
            return out[:2]
        return []  # an R resource can never be disposed into I
    if isinstance(dst, TTensor):
        # keep one side passive: scrut feeds the left, literals fill the right
        out = []
        for l in _consumers(scrut, src, dst.left, registry, depth - 1)[:2]:
            for r_ in _probe_values(dst.right, registry, depth - 1)[:2]:
                out.append(Pair(l, r_))
        return out
    return []


def _observable_components(v: Term, ty: Ty) -> list[float]:
    """Real components reachable through tensors only, left to right."""
    if isinstance(ty, TReal):
        return [v.value]  # type: ignore[union-attr]
    if isinstance(ty, TTensor):
        return _observable_components(v.left, ty.left) + _observable_components(v.right, ty.right)  # type: ignore[union-attr]
    return []


def _elaborations(ctx: Term, ty: Ty, registry: SymbolRegistry, budget: ObsBudget, depth: int):
    """Closed observing contexts reachable from ``ctx : ty``."""
    yield ctx, ty
    if depth <= 0:
        return
    if isinstance(ty, TLolli):
        for w in probe_values(ty.arg, registry, budget.values_per_type):
            yield from _elaborations(App(ctx, w), ty.res, registry, budget, depth - 1)
    if isinstance(ty, TTensor):
        has_fn_right = not is_observable(ty.right)
        has_fn_left = not is_observable(ty.left)
        if has_fn_right:
            for sub, sub_ty in _elaborations(Var("v_"), ty.right, registry, budget, depth - 1):
                if sub == Var("v_"):
                    continue
                yield (
                    LetPair("u_", "v_", ctx, Pair(Var("u_"), sub)),
                    TTensor(ty.left, sub_ty),
                )
        if has_fn_left:
            for sub, sub_ty in _elaborations(Var("u_"), ty.left, registry, budget, depth - 1):
                if sub == Var("u_"):
                    continue
                yield (
                    LetPair("u_", "v_", ctx, Pair(sub, Var("v_"))),
                    TTensor(sub_ty, ty.right),
                )


def obs_lower_bound(
    env: Env,
    ty: Ty,
    m: Term,
    n: Term,
    budget: Optional[ObsBudget] = None,
    registry: Optional[SymbolRegistry] = None,
) -> tuple[float, ObsWitness]:
    """Largest separation found by closing and observing contexts.

    Sound lower bound for the observational metric; the witness replays
    by evaluating the stored context around both terms.
    """
    registry = registry if registry is not None else default_registry()
    budget = budget if budget is not None else ObsBudget()

    base_contexts: list[tuple[Term, Ty]] = []
    if len(env) == 0:
        base_contexts.append((HOLE, ty))
    else:
        closed = HOLE
        for name, t in reversed(tuple(env)):
            closed = Lam(name, t, closed)
        pools = [probe_values(t, registry, budget.values_per_type) for _, t in env]
        for combo in itertools.islice(itertools.product(*pools), budget.max_contexts):
            c: Term = closed
            for w in combo:
                c = App(c, w)
            base_contexts.append((c, ty))

    best = 0.0
    best_witness = None
    count = 0
    for base, base_ty in base_contexts:
        for ctx, cty in _elaborations(base, base_ty, registry, budget, budget.apply_depth):
            count += 1
            if count > budget.max_contexts:
                break
            try:
                vm = evaluate(plug(ctx, m), registry)
                vn = evaluate(plug(ctx, n), registry)
            except LinError:
                continue
            comps_m = _observable_components(vm, cty)
            comps_n = _observable_components(vn, cty)
            got = float(sum(abs(a - b) for a, b in zip(comps_m, comps_n)))
            if got > best or best_witness is None:
                best = got
                best_witness = ObsWitness(ctx, vm, vn, got)
        if count > budget.max_contexts:
            break
    if best_witness is None:
        best_witness = ObsWitness(HOLE, m, n, 0.0)
    return best, best_witness


def replay_obs_witness(
    w: ObsWitness, m: Term, n: Term, registry: Optional[SymbolRegistry] = None
) -> bool:
    registry = registry if registry is not None else default_registry()
    vm = evaluate(plug(w.context, m), registry)
    vn = evaluate(plug(w.context, n), registry)
    return vm == w.lhs_value and vn == w.rhs_value


# ---------------------------------------------------------------------------
# Engines with a uniform interface


@dataclass
class EngineConfig:
    registry: SymbolRegistry
    battery: ProbeBattery
    budget: ObsBudget = field(default_factory=ObsBudget)
    depth: int = 2

    @staticmethod
    def make(registry: Optional[SymbolRegistry] = None, seed: int = 0) -> "EngineConfig":
        registry = registry if registry is not None else default_registry()
        return EngineConfig(registry=registry, battery=ProbeBattery(registry, seed=seed))


def den_engine(env: Env, ty: Ty, m: Term, n: Term, cfg: EngineConfig) -> DistInterval:
    upper, _ = equ_upper_bound(env, ty, m, n, cfg.registry)
    return den_distance(
        env, ty, m, n, cfg.battery, depth=cfg.depth, upper_bound=upper, registry=cfg.registry
    )


def int_engine(env: Env, ty: Ty, m: Term, n: Term, cfg: EngineConfig) -> DistInterval:
    return int_distance(env, ty, m, n, cfg.battery, registry=cfg.registry)


def equ_engine(env: Env, ty: Ty, m: Term, n: Term, cfg: EngineConfig) -> DistInterval:
    hi, cert = equ_upper_bound(env, ty, m, n, cfg.registry)
    lo, _ = obs_lower_bound(env, ty, m, n, cfg.budget, cfg.registry)
    return DistInterval(min(lo, hi), hi, hi_certificate=cert)


ENGINES = {"den": den_engine, "int": int_engine, "equ": equ_engine}


# ---------------------------------------------------------------------------
# Admissibility suite


@dataclass
class SuiteReport:
    engine: str
    checks: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def admissibility_suite(
    engine: str,
    corpus: dict,
    cfg: Optional[EngineConfig] = None,
) -> SuiteReport:
    """Runs the four admissibility checks against one distance engine.

    ``corpus`` maps check names to lists of instances:
      constants: [(a, b)]
      tensor_prefixes: [(env, ty, M, N, expected_prefix_l1)]
      contexts: [(env, ty, M, N, ctx, dst_env, dst_ty)]
      equal_pairs: [(env, ty, M, N)]
    """
    cfg = cfg if cfg is not None else EngineConfig.make()
    run = ENGINES[engine]
    report = SuiteReport(engine)

    for a, b in corpus.get("constants", []):
        report.checks += 1
        d = run(EMPTY_ENV, R, Const(a), Const(b), cfg)
        want = abs(a - b)
        if abs(d.lo - want) > EPS or abs(d.hi - want) > EPS:
            report.violations.append(("constants-exact", a, b, d.lo, d.hi))

    for env, ty, m, n, want in corpus.get("tensor_prefixes", []):
        report.checks += 1
        d = run(env, ty, m, n, cfg)
        if d.lo < want - EPS:
            report.violations.append(("prefix-lower", print_term(m), print_term(n), d.lo, want))

    for env, ty, m, n, ctx, dst_env, dst_ty in corpus.get("contexts", []):
        report.checks += 1
        d_pair = run(env, ty, m, n, cfg)
        d_ctx = run(dst_env, dst_ty, plug(ctx, m), plug(ctx, n), cfg)
        if d_pair.is_exact() and d_ctx.is_exact():
            if d_ctx.lo > d_pair.lo + EPS:
                report.violations.append(
                    ("context-nonexpansive", print_term(ctx), print_term(m), print_term(n), d_ctx.lo, d_pair.lo)
                )
        elif d_ctx.lo > d_pair.hi + EPS:
            report.violations.append(
                ("context-interval", print_term(ctx), print_term(m), print_term(n), d_ctx.lo, d_pair.hi)
            )

    for env, ty, m, n in corpus.get("equal_pairs", []):
        report.checks += 1
        if not eq_decide(m, n, cfg.registry):
            report.violations.append(("equal-pair-precondition", print_term(m), print_term(n)))
            continue
        d = run(env, ty, m, n, cfg)
        if d.hi > EPS:
            report.violations.append(("equal-pair-zero", print_term(m), print_term(n), d.hi))

    return report


# ---------------------------------------------------------------------------
# Ordering report


def _enc(x: float):
    return "inf" if x == INF else x


def ordering_report(
    env: Env,
    ty: Ty,
    m: Term,
    n: Term,
    cfg: Optional[EngineConfig] = None,
) -> dict:
    """Run all engines on one pair and check interval consistency.

    The chain asserted is: obs ≤ den.hi, den.lo ≤ int.hi, int.lo ≤ equ,
    obs ≤ equ.  A violation indicates an engine bug, not a property of
    the pair.
    """
    cfg = cfg if cfg is not None else EngineConfig.make()
    t1 = typecheck(env, m, cfg.registry)
    t2 = typecheck(env, n, cfg.registry)
    if t1 != ty or t2 != ty:
        raise TypeError_(
            f"pair does not have the stated type: {print_type(t1)} vs {print_type(t2)}"
        )
    obs_lo, witness = obs_lower_bound(env, ty, m, n, cfg.budget, cfg.registry)
    equ_hi, cert = equ_upper_bound(env, ty, m, n, cfg.registry)
    den = den_distance(
        env, ty, m, n, cfg.battery, depth=cfg.depth, upper_bound=equ_hi, registry=cfg.registry
    )
    ints = int_distance(env, ty, m, n, cfg.battery, registry=cfg.registry)

    chain_ok = (
        obs_lo <= den.hi + EPS
        and den.lo <= ints.hi + EPS
        and ints.lo <= equ_hi + EPS
        and obs_lo <= equ_hi + EPS
    )
    return {
        "pair": {
            "gamma": ", ".join(f"{x}:{print_type(t)}" for x, t in env),
            "type": print_type(ty),
            "M": print_term(m),
            "N": print_term(n),
        },
        "metrics": {
            "obs": {"lo": _enc(obs_lo), "witness": witness.to_dict()},
            "den": {"lo": _enc(den.lo), "hi": _enc(den.hi)},
            "int": {"lo": _enc(ints.lo), "hi": _enc(ints.hi), "normalized": ints.normalized},
            "equ": {
                "hi": _enc(equ_hi),
                "certificate": qderivation_to_dict(cert) if cert is not None else None,
            },
        },
        "chain_ok": chain_ok,
    }
