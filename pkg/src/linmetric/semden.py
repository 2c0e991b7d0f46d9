"""Plain denotational model: values, interpretation, distances.

Terms denote non-expansive maps between metric domains: reals with the
absolute distance (extended with a bottom element at infinite distance
from everything), a one-point unit, tensor products carrying the L1 sum
metric, and function spaces carrying the sup metric.

The sup in the function-space metric ranges over an infinite domain, so
the distance engine reports sound enclosures: lower bounds obtained by
probing with a deterministic battery of sample points, upper bounds
supplied by the caller (typically from an equational certificate).
"""

from __future__ import annotations

import itertools
import random
import zlib
from dataclasses import dataclass
from typing import Callable, Optional

from .core import (
    App,
    Const,
    DistInterval,
    EPS,
    Env,
    FnApp,
    INF,
    Lam,
    LetPair,
    LetStar,
    Pair,
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
    default_registry,
    is_observable,
    is_one_point,
)


# ---------------------------------------------------------------------------
# Semantic values


class SemValue:
    __slots__ = ()


class _Bottom(SemValue):
    __slots__ = ()

    def __repr__(self):
        return "Bottom"


class _Unit(SemValue):
    __slots__ = ()

    def __repr__(self):
        return "UnitVal"


BOTTOM = _Bottom()
UNIT = _Unit()


@dataclass(frozen=True)
class RealVal(SemValue):
    value: float


@dataclass(frozen=True)
class PairVal(SemValue):
    left: SemValue
    right: SemValue


@dataclass(frozen=True)
class Closure(SemValue):
    """A non-expansive function packaged as a python callable."""

    fn: Callable[[SemValue], SemValue]

    def __call__(self, arg: SemValue) -> SemValue:
        return self.fn(arg)


SemEnvPoint = tuple  # tuple of SemValue, one per environment binding


def sem_equal(a: SemValue, b: SemValue) -> bool:
    """Exact equality on first-order fragments; closures by identity."""
    if isinstance(a, RealVal) and isinstance(b, RealVal):
        return a.value == b.value
    if a is BOTTOM or b is BOTTOM:
        return a is b
    if a is UNIT or b is UNIT:
        return a is b
    if isinstance(a, PairVal) and isinstance(b, PairVal):
        return sem_equal(a.left, b.left) and sem_equal(a.right, b.right)
    return a is b


# ---------------------------------------------------------------------------
# Interpretation


def interp_den(
    env: Env, term: Term, registry: Optional[SymbolRegistry] = None
) -> Callable[[SemEnvPoint], SemValue]:
    """Compositional interpretation of ``env |- term`` as a function."""
    registry = registry if registry is not None else default_registry()
    names = env.names()

    def run(point: SemEnvPoint) -> SemValue:
        if len(point) != len(names):
            raise TypeError_(f"environment point has arity {len(point)}, expected {len(names)}")
        return _interp(term, dict(zip(names, point)), registry)

    return run


def _interp(t: Term, scope: dict[str, SemValue], registry: SymbolRegistry) -> SemValue:
    if isinstance(t, Var):
        return scope[t.name]
    if isinstance(t, Const):
        return RealVal(t.value)
    if isinstance(t, Star):
        return UNIT
    if isinstance(t, FnApp):
        sym = registry.get(t.symbol)
        args = [_interp(a, scope, registry) for a in t.args]
        if any(not isinstance(a, RealVal) for a in args):
            return BOTTOM  # strict: bottom in, bottom out
        return RealVal(sym(*[a.value for a in args]))
    if isinstance(t, App):
        f = _interp(t.fn, scope, registry)
        a = _interp(t.arg, scope, registry)
        if not isinstance(f, Closure):
            if f is BOTTOM:
                return BOTTOM
            raise TypeError_("application of a non-function denotation")
        return f(a)
    if isinstance(t, Lam):
        captured = dict(scope)

        def fn(v: SemValue, _t=t, _c=captured) -> SemValue:
            inner = dict(_c)
            inner[_t.var] = v
            return _interp(_t.body, inner, registry)

        return Closure(fn)
    if isinstance(t, Pair):
        return PairVal(_interp(t.left, scope, registry), _interp(t.right, scope, registry))
    if isinstance(t, LetStar):
        s = _interp(t.scrutinee, scope, registry)
        if s is BOTTOM:
            return BOTTOM
        return _interp(t.body, scope, registry)
    if isinstance(t, LetPair):
        s = _interp(t.scrutinee, scope, registry)
        if s is BOTTOM:
            return BOTTOM
        if not isinstance(s, PairVal):
            raise TypeError_("let (x) scrutinee did not denote a pair")
        inner = dict(scope)
        inner[t.var1] = s.left
        inner[t.var2] = s.right
        return _interp(t.body, inner, registry)
    raise AssertionError(t)


def value_to_sem(v: Term, registry: Optional[SymbolRegistry] = None) -> SemValue:
    """Denotation of a closed value."""
    registry = registry if registry is not None else default_registry()
    return _interp(v, {}, registry)


# ---------------------------------------------------------------------------
# Ground distances


def ground_l1(v: Term, u: Term, ty: Ty) -> float:
    """Exact L1 distance between closed values of an observable type."""
    if isinstance(ty, TReal):
        if not (isinstance(v, Const) and isinstance(u, Const)):
            raise TypeError_("expected real constants")
        return abs(v.value - u.value)
    if isinstance(ty, TUnit):
        if not (isinstance(v, Star) and isinstance(u, Star)):
            raise TypeError_("expected unit values")
        return 0.0
    if isinstance(ty, TTensor):
        if not (isinstance(v, Pair) and isinstance(u, Pair)):
            raise TypeError_("expected pair values")
        return ground_l1(v.left, u.left, ty.left) + ground_l1(v.right, u.right, ty.right)
    raise TypeError_(f"type {ty!r} is not observable")


def sem_l1(a: SemValue, b: SemValue, ty: Ty) -> float:
    """Exact distance between denotations at an observable type."""
    if a is BOTTOM or b is BOTTOM:
        return 0.0 if (a is BOTTOM and b is BOTTOM) else INF
    if isinstance(ty, TReal):
        return abs(a.value - b.value)  # type: ignore[union-attr]
    if isinstance(ty, TUnit):
        return 0.0
    if isinstance(ty, TTensor):
        return sem_l1(a.left, b.left, ty.left) + sem_l1(a.right, b.right, ty.right)  # type: ignore[union-attr]
    raise TypeError_(f"type {ty!r} is not observable")


# ---------------------------------------------------------------------------
# Probe batteries

DEFAULT_GRID = (-10.0, -1.0, -0.5, 0.0, 0.5, 1.0, 10.0)


class ProbeBattery:
    """Deterministic finite samples of each semantic domain.

    Reals come from a fixed grid plus seeded uniform draws; functions
    come from a combinator pool (constants, projections into registry
    symbols, compositions up to the configured depth).  Every generated
    function is non-expansive by construction.
    """

    def __init__(
        self,
        registry: Optional[SymbolRegistry] = None,
        seed: int = 0,
        depth: int = 2,
        grid: tuple[float, ...] = DEFAULT_GRID,
        draws: int = 25,
        max_samples: int = 48,
    ):
        self.registry = registry if registry is not None else default_registry()
        self.seed = seed
        self.depth = depth
        self.draws = draws
        self.max_samples = max_samples
        rng = random.Random(seed)
        self.reals = list(grid) + [rng.uniform(-100.0, 100.0) for _ in range(draws)]
        self._fn_cache: dict[Ty, list[SemValue]] = {}

    # -- scalar-valued combinators ------------------------------------------

    def _real_probes(self, src: Ty, depth: int) -> list[Callable[[SemValue], SemValue]]:
        """Non-expansive maps src -> R, as python callables."""
        reg = self.registry
        unary = [n for n in reg.names() if reg.arity(n) == 1]
        binary = [n for n in reg.names() if reg.arity(n) == 2]

        def lift_real(g: Callable[[float], float]) -> Callable[[SemValue], SemValue]:
            def f(v: SemValue) -> SemValue:
                if v is BOTTOM:
                    return BOTTOM
                return RealVal(g(v.value))  # type: ignore[union-attr]

            return f

        if isinstance(src, TReal):
            out = [lift_real(lambda a: a)]
            for n in unary:
                out.append(lift_real(reg.get(n).evaluator))
            for n in binary:
                for c in (0.0, 1.0, -1.0):
                    out.append(lift_real(lambda a, _f=reg.get(n).evaluator, _c=c: _f(a, _c)))
            if depth > 1:
                base = out[: 1 + len(unary)]
                for g in list(base):
                    for n in unary:
                        out.append(
                            lift_real(
                                lambda a, _g=g, _f=reg.get(n).evaluator: _f(_g(RealVal(a)).value)
                            )
                        )
            return out
        if isinstance(src, TUnit):
            return [lambda v, _c=c: RealVal(_c) for c in (0.0, 1.0)]
        if isinstance(src, TTensor):
            lefts = self._real_probes(src.left, depth - 1) or []
            rights = self._real_probes(src.right, depth - 1) or []

            def via_left(h):
                return lambda v: BOTTOM if v is BOTTOM else h(v.left)

            def via_right(h):
                return lambda v: BOTTOM if v is BOTTOM else h(v.right)

            out = [via_left(h) for h in lefts[:4]] + [via_right(h) for h in rights[:4]]
            binary_names = [n for n in self.registry.names() if self.registry.arity(n) == 2]
            for n in binary_names:
                fsym = self.registry.get(n).evaluator
                for hl in lefts[:2]:
                    for hr in rights[:2]:

                        def combined(v, _hl=hl, _hr=hr, _f=fsym):
                            if v is BOTTOM:
                                return BOTTOM
                            a, b = _hl(v.left), _hr(v.right)
                            if a is BOTTOM or b is BOTTOM:
                                return BOTTOM
                            return RealVal(_f(a.value, b.value))

                        out.append(combined)
            return out
        if isinstance(src, TLolli):
            if depth <= 0:
                return []
            args = self.samples(src.arg)[:3]
            posts = self._real_probes(src.res, depth - 1)[:3] if not isinstance(src.res, TReal) else [lambda v: v]
            out = []
            for a in args:
                for h in posts:

                    def probe(v, _a=a, _h=h):
                        if v is BOTTOM:
                            return BOTTOM
                        return _h(v(_a))

                    out.append(probe)
            return out
        raise AssertionError(src)

    # -- samples -------------------------------------------------------------

    def samples(self, ty: Ty) -> list[SemValue]:
        if isinstance(ty, TReal):
            return [RealVal(a) for a in self.reals[: self.max_samples]]
        if isinstance(ty, TUnit):
            return [UNIT]
        if isinstance(ty, TTensor):
            ls = self.samples(ty.left)
            rs = self.samples(ty.right)
            out = []
            for i, (a, b) in enumerate(itertools.product(ls, rs)):
                if i >= self.max_samples:
                    break
                out.append(PairVal(a, b))
            return out
        if isinstance(ty, TLolli):
            if ty not in self._fn_cache:
                self._fn_cache[ty] = self._function_samples(ty)
            return self._fn_cache[ty]
        raise AssertionError(ty)

    def _function_samples(self, ty: TLolli) -> list[SemValue]:
        out: list[SemValue] = []
        # constant maps: always non-expansive
        for v in self.samples(ty.res)[:6]:
            out.append(Closure(lambda _x, _v=v: _v))
        out.extend(self._structured_functions(ty))
        if len(out) < self.max_samples and isinstance(ty.res, TReal):
            # pad with seeded constant maps up to the requested battery size
            rng = random.Random(self.seed ^ zlib.crc32(repr(ty).encode()))
            while len(out) < self.max_samples:
                c = rng.uniform(-100.0, 100.0)
                out.append(Closure(lambda _x, _c=c: RealVal(_c)))
        return out[: self.max_samples]

    def _structured_functions(self, ty: TLolli) -> list[SemValue]:
        out: list[SemValue] = []
        # active maps, shaped by the result type
        if isinstance(ty.res, TReal):
            for h in self._real_probes(ty.arg, self.depth):
                out.append(Closure(h))
        elif isinstance(ty.res, TUnit):
            out.append(Closure(lambda _x: UNIT))
        elif isinstance(ty.res, TTensor):
            # one active component at a time keeps the map non-expansive
            if isinstance(ty.res.left, TReal):
                for h in self._real_probes(ty.arg, self.depth)[:4]:
                    for w in self.samples(ty.res.right)[:2]:
                        out.append(Closure(lambda x, _h=h, _w=w: PairVal(_h(x), _w)))
            if isinstance(ty.res.right, TReal):
                for h in self._real_probes(ty.arg, self.depth)[:4]:
                    for w in self.samples(ty.res.left)[:2]:
                        out.append(Closure(lambda x, _h=h, _w=w: PairVal(_w, _h(x))))
        elif isinstance(ty.res, TLolli):
            inner = TLolli(ty.res.arg, ty.res.res)
            if isinstance(ty.res.res, TReal):
                # x |-> (y |-> f(h(x), g(y))): non-expansive in each stage
                hs = self._real_probes(ty.arg, 1)[:3]
                gs = self._real_probes(inner.arg, 1)[:3] if not isinstance(inner.arg, TUnit) else []
                binary = [n for n in self.registry.names() if self.registry.arity(n) == 2]
                for n in binary[:1]:
                    fsym = self.registry.get(n).evaluator
                    for h in hs:
                        for g in gs:

                            def curried(x, _h=h, _g=g, _f=fsym):
                                hx = _h(x)

                                def stage(y, _hx=hx):
                                    gy = _g(y)
                                    if _hx is BOTTOM or gy is BOTTOM:
                                        return BOTTOM
                                    return RealVal(_f(_hx.value, gy.value))

                                return Closure(stage)

                            out.append(Closure(curried))
        return out

    def env_samples(self, env: Env, limit: int = 64) -> list[SemEnvPoint]:
        if len(env) == 0:
            return [()]
        pools = [self.samples(t) for _, t in env]
        out = []
        for i, combo in enumerate(itertools.product(*pools)):
            if i >= limit:
                break
            out.append(tuple(combo))
        return out


# ---------------------------------------------------------------------------
# Distance engine


@dataclass(frozen=True)
class LoWitness:
    """Environment and argument probes achieving the reported lower bound."""

    env_point: SemEnvPoint
    arg_path: tuple


def value_dist_lower(
    a: SemValue, b: SemValue, ty: Ty, battery: ProbeBattery, depth: int
) -> tuple[float, tuple]:
    """Lower bound on the hom distance between two denotations, with path."""
    if is_observable(ty):
        return sem_l1(a, b, ty), ()
    if isinstance(ty, TTensor):
        dl, pl = value_dist_lower(a.left, b.left, ty.left, battery, depth)  # type: ignore[union-attr]
        dr, pr = value_dist_lower(a.right, b.right, ty.right, battery, depth)  # type: ignore[union-attr]
        return dl + dr, (("pair", pl, pr),)
    if isinstance(ty, TLolli):
        if a is BOTTOM or b is BOTTOM:
            return (0.0, ()) if (a is BOTTOM and b is BOTTOM) else (INF, ())
        if depth <= 0:
            return 0.0, ()
        best, path = 0.0, ()
        for i, arg in enumerate(battery.samples(ty.arg)):
            d, sub = value_dist_lower(a(arg), b(arg), ty.res, battery, depth - 1)  # type: ignore[operator]
            if d > best:
                best, path = d, (("apply", i) + sub,)
        return best, path
    raise AssertionError(ty)


def den_distance(
    env: Env,
    ty: Ty,
    m: Term,
    n: Term,
    battery: Optional[ProbeBattery] = None,
    depth: int = 2,
    upper_bound: float = INF,
    registry: Optional[SymbolRegistry] = None,
) -> DistInterval:
    """Sound enclosure of the denotational distance between two terms.

    The lower bound is witnessed by battery points; the upper bound is
    taken from the caller (an equational certificate dominates this
    metric) except in the exactly-computable cases.
    """
    registry = registry if registry is not None else default_registry()
    battery = battery if battery is not None else ProbeBattery(registry)
    from .core import typecheck

    if typecheck(env, m, registry) != ty or typecheck(env, n, registry) != ty:
        raise TypeError_("den_distance: terms do not have the stated type")
    if is_one_point(ty):
        return DistInterval(0.0, 0.0)
    if len(env) == 0 and is_observable(ty):
        from .dynamics import evaluate

        d = ground_l1(evaluate(m, registry), evaluate(n, registry), ty)
        return DistInterval(d, d, lo_witness=LoWitness((), ()))
    points = battery.env_samples(env)
    if not points:
        raise TypeError_("den_distance: battery has no samples for this environment")
    fm = interp_den(env, m, registry)
    fn = interp_den(env, n, registry)
    lo, witness = 0.0, None
    for point in points:
        d, path = value_dist_lower(fm(point), fn(point), ty, battery, depth)
        if d > lo:
            lo, witness = d, LoWitness(point, path)
    hi = max(upper_bound, lo) if upper_bound < INF else INF
    if lo > upper_bound + EPS:
        raise AssertionError(
            f"lower bound {lo} exceeds certified upper bound {upper_bound}: engine bug"
        )
    return DistInterval(lo, hi, lo_witness=witness)


def replay_lo(
    env: Env,
    ty: Ty,
    m: Term,
    n: Term,
    witness: LoWitness,
    battery: ProbeBattery,
    depth: int = 2,
    registry: Optional[SymbolRegistry] = None,
) -> float:
    """Recompute the distance achieved by a stored witness point."""
    registry = registry if registry is not None else default_registry()
    a = interp_den(env, m, registry)(witness.env_point)
    b = interp_den(env, n, registry)(witness.env_point)
    d, _ = value_dist_lower(a, b, ty, battery, depth)
    return d
