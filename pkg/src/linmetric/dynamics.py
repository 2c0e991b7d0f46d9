"""Operational semantics and a sound equality decision procedure.

Evaluation is big-step and total on typed closed terms.  Normalization
contracts beta and let redexes under binders; each contraction strictly
shrinks the term (the language is linear), so both terminate.

``eq_canonical`` rewrites a term into a canonical representative of its
equational class using beta, the let laws, eta-contraction of all three
connectives, evaluation of symbols on literal arguments, and the two
let-commuting conversions (used to hoist and deterministically order
let bindings).  ``eq_decide`` compares canonical forms up to
alpha-renaming; it is sound but deliberately incomplete.
"""

from __future__ import annotations

import itertools
from typing import Optional

from .core import (
    App,
    Const,
    FnApp,
    Lam,
    LetPair,
    LetStar,
    LinError,
    Pair,
    Star,
    SymbolRegistry,
    Term,
    Var,
    children,
    default_registry,
    free_vars,
    term_size,
)


class EvalError(LinError):
    """Evaluation hit a configuration problem (e.g. unregistered symbol)."""


_fresh_counter = itertools.count()


def fresh_name(base: str, avoid: set[str]) -> str:
    if base not in avoid:
        return base
    while True:
        cand = f"{base}_{next(_fresh_counter)}"
        if cand not in avoid:
            return cand


def substitute(term: Term, var: str, value: Term) -> Term:
    """Capture-avoiding substitution term[value/var]."""
    fv_value = free_vars(value)

    def go(t: Term) -> Term:
        if isinstance(t, Var):
            return value if t.name == var else t
        if isinstance(t, (Const, Star)):
            return t
        if isinstance(t, FnApp):
            return FnApp(t.symbol, tuple(go(a) for a in t.args))
        if isinstance(t, App):
            return App(go(t.fn), go(t.arg))
        if isinstance(t, Pair):
            return Pair(go(t.left), go(t.right))
        if isinstance(t, LetStar):
            return LetStar(go(t.scrutinee), go(t.body))
        if isinstance(t, Lam):
            if t.var == var:
                return t
            if t.var in fv_value and var in free_vars(t.body):
                avoid = fv_value | free_vars(t.body) | {var}
                nv = fresh_name(t.var, avoid)
                body = substitute(t.body, t.var, Var(nv))
                return Lam(nv, t.ann, go(body))
            return Lam(t.var, t.ann, go(t.body))
        if isinstance(t, LetPair):
            scrut = go(t.scrutinee)
            if var in (t.var1, t.var2):
                return LetPair(t.var1, t.var2, scrut, t.body)
            v1, v2, body = t.var1, t.var2, t.body
            if var in free_vars(body):
                avoid = fv_value | free_vars(body) | {var}
                if v1 in fv_value:
                    nv = fresh_name(v1, avoid)
                    body = substitute(body, v1, Var(nv))
                    v1 = nv
                    avoid = avoid | {nv}
                if v2 in fv_value:
                    nv = fresh_name(v2, avoid)
                    body = substitute(body, v2, Var(nv))
                    v2 = nv
            return LetPair(v1, v2, scrut, go(body))
        raise AssertionError(t)

    return go(term)


def evaluate(term: Term, registry: Optional[SymbolRegistry] = None) -> Term:
    """Big-step evaluation of a closed typed term to a value.

    In a linear term every redex firing consumes a syntax node, so the
    number of reduction events is bounded by the initial size; exceeding
    it means the input was not typeable and evaluation aborts.
    """
    registry = registry if registry is not None else default_registry()
    limit = term_size(term)
    events = [0]

    def fire():
        events[0] += 1
        if events[0] > limit:
            raise EvalError("reduction events exceeded the term size (untyped input?)")

    def go(t: Term) -> Term:
        if isinstance(t, (Const, Star, Lam)):
            return t
        if isinstance(t, Var):
            raise EvalError(f"free variable {t.name!r} during evaluation")
        if isinstance(t, FnApp):
            sym = registry.get(t.symbol)
            vals = []
            for a in t.args:
                v = go(a)
                if not isinstance(v, Const):
                    raise EvalError(f"argument of {t.symbol!r} evaluated to a non-number")
                vals.append(v.value)
            fire()
            return Const(sym(*vals))
        if isinstance(t, App):
            f = go(t.fn)
            if not isinstance(f, Lam):
                raise EvalError("application head is not a function value")
            v = go(t.arg)
            fire()
            return go(substitute(f.body, f.var, v))
        if isinstance(t, Pair):
            return Pair(go(t.left), go(t.right))
        if isinstance(t, LetStar):
            s = go(t.scrutinee)
            if not isinstance(s, Star):
                raise EvalError("let * scrutinee did not evaluate to *")
            fire()
            return go(t.body)
        if isinstance(t, LetPair):
            s = go(t.scrutinee)
            if not isinstance(s, Pair):
                raise EvalError("let (x) scrutinee did not evaluate to a pair")
            fire()
            body = substitute(t.body, t.var1, s.left)
            body = substitute(body, t.var2, s.right)
            return go(body)
        raise AssertionError(t)

    return go(term)


# ---------------------------------------------------------------------------
# Normalization


def _contract(t: Term) -> Optional[Term]:
    """One redex contraction at the root, or None."""
    if isinstance(t, App) and isinstance(t.fn, Lam):
        return substitute(t.fn.body, t.fn.var, t.arg)
    if isinstance(t, LetStar) and isinstance(t.scrutinee, Star):
        return t.body
    if isinstance(t, LetPair) and isinstance(t.scrutinee, Pair):
        body = substitute(t.body, t.var1, t.scrutinee.left)
        return substitute(body, t.var2, t.scrutinee.right)
    return None


def _rebuild(t: Term, new_children: list[Term]) -> Term:
    if isinstance(t, FnApp):
        return FnApp(t.symbol, tuple(new_children))
    if isinstance(t, App):
        return App(new_children[0], new_children[1])
    if isinstance(t, Lam):
        return Lam(t.var, t.ann, new_children[0])
    if isinstance(t, Pair):
        return Pair(new_children[0], new_children[1])
    if isinstance(t, LetStar):
        return LetStar(new_children[0], new_children[1])
    if isinstance(t, LetPair):
        return LetPair(t.var1, t.var2, new_children[0], new_children[1])
    raise AssertionError(t)


def _step_normal_order(t: Term) -> Optional[Term]:
    contracted = _contract(t)
    if contracted is not None:
        return contracted
    kids = children(t)
    for i, c in enumerate(kids):
        stepped = _step_normal_order(c)
        if stepped is not None:
            out = list(kids)
            out[i] = stepped
            return _rebuild(t, out)
    return None


def beta_normalize(term: Term) -> Term:
    """Leftmost-outermost reduction to beta/let normal form."""
    steps = 0
    limit = term_size(term) + 1
    while True:
        nxt = _step_normal_order(term)
        if nxt is None:
            return term
        term = nxt
        steps += 1
        if steps > limit:
            raise AssertionError("normalization exceeded the size bound of a linear term")


def is_beta_normal(t: Term) -> bool:
    if _contract(t) is not None:
        return False
    return all(is_beta_normal(c) for c in children(t))


def alpha_eq(a: Term, b: Term) -> bool:
    return _alpha(a, b, {}, {})


def _alpha(a: Term, b: Term, ma: dict, mb: dict) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        return ma.get(a.name, a.name) == mb.get(b.name, b.name)
    if isinstance(a, Const):
        return a.value == b.value
    if isinstance(a, Star):
        return True
    if isinstance(a, FnApp):
        return a.symbol == b.symbol and len(a.args) == len(b.args) and all(
            _alpha(x, y, ma, mb) for x, y in zip(a.args, b.args)
        )
    if isinstance(a, App):
        return _alpha(a.fn, b.fn, ma, mb) and _alpha(a.arg, b.arg, ma, mb)
    if isinstance(a, Pair):
        return _alpha(a.left, b.left, ma, mb) and _alpha(a.right, b.right, ma, mb)
    if isinstance(a, Lam):
        if a.ann != b.ann:
            return False
        tag = f"#b{len(ma)}"
        return _alpha(a.body, b.body, {**ma, a.var: tag}, {**mb, b.var: tag})
    if isinstance(a, LetStar):
        return _alpha(a.scrutinee, b.scrutinee, ma, mb) and _alpha(a.body, b.body, ma, mb)
    if isinstance(a, LetPair):
        if not _alpha(a.scrutinee, b.scrutinee, ma, mb):
            return False
        t1, t2 = f"#b{len(ma)}", f"#b{len(ma)}'"
        return _alpha(
            a.body, b.body, {**ma, a.var1: t1, a.var2: t2}, {**mb, b.var1: t1, b.var2: t2}
        )
    raise AssertionError(a)


# ---------------------------------------------------------------------------
# Canonical forms for the equational theory


def _eta_contract(t: Term) -> Term:
    kids = [_eta_contract(c) for c in children(t)]
    if kids:
        t = _rebuild(t, kids)
    if isinstance(t, Lam) and isinstance(t.body, App):
        arg = t.body.arg
        if isinstance(arg, Var) and arg.name == t.var and t.var not in free_vars(t.body.fn):
            return t.body.fn
    if isinstance(t, LetStar) and isinstance(t.body, Star):
        return t.scrutinee
    if isinstance(t, LetPair) and isinstance(t.body, Pair):
        l, r = t.body.left, t.body.right
        if (
            isinstance(l, Var)
            and isinstance(r, Var)
            and l.name == t.var1
            and r.name == t.var2
            and not ({t.var1, t.var2} & free_vars(t.scrutinee))
        ):
            return t.scrutinee
    return t


def _fold_literals(t: Term, registry: SymbolRegistry) -> Term:
    kids = [_fold_literals(c, registry) for c in children(t)]
    if kids:
        t = _rebuild(t, kids)
    if isinstance(t, FnApp) and all(isinstance(a, Const) for a in t.args):
        sym = registry.get(t.symbol)
        return Const(sym(*[a.value for a in t.args]))
    return t


def _is_let(t: Term) -> bool:
    return isinstance(t, (LetStar, LetPair))


def _let_parts(t: Term):
    if isinstance(t, LetStar):
        return (), t.scrutinee, t.body
    return (t.var1, t.var2), t.scrutinee, t.body


def _make_let(binders, scrut: Term, body: Term) -> Term:
    if binders:
        return LetPair(binders[0], binders[1], scrut, body)
    return LetStar(scrut, body)


def _rename_binders(binders, body: Term, clashes: set[str], avoid: set[str]):
    """Rename the binders that appear in ``clashes``, avoiding ``avoid``."""
    out = []
    avoid = set(avoid) | set(binders)
    for v in binders:
        if v in clashes:
            nv = fresh_name(v + "_", avoid)
            body = substitute(body, v, Var(nv))
            avoid.add(nv)
            out.append(nv)
        else:
            out.append(v)
    return tuple(out), body


def _hoist_lets(t: Term) -> Term:
    """Pull let bindings outward to a prenex chain under each lambda.

    Both orientations of the commuting conversions are derivable, so the
    outward one is a legitimate canonicalization choice.  Termination:
    un-nesting a let from a scrutinee shrinks the sum of scrutinee sizes,
    extraction from an operator child shrinks the sum of let depths and
    leaves scrutinee sizes unchanged.
    """
    kids = [_hoist_lets(c) for c in children(t)]
    if kids:
        t = _rebuild(t, kids)
    if isinstance(t, Lam):
        return t  # a let is never hoisted past a binder it may mention
    if _is_let(t):
        binders, scrut, body = _let_parts(t)
        if _is_let(scrut):
            # let b = (let ib = s in ibody) in body
            #   -> let ib = s in (let b = ibody in body)
            ib, iscrut, ibody = _let_parts(scrut)
            clashes = set(ib) & (free_vars(body) | set(binders))
            ib, ibody = _rename_binders(ib, ibody, clashes, free_vars(body) | set(binders) | free_vars(ibody))
            return _hoist_lets(_make_let(ib, iscrut, _make_let(binders, ibody, body)))
        return t
    lifted = _extract_let(t)
    if lifted is not None:
        return _hoist_lets(lifted)
    return t


def _extract_let(t: Term) -> Optional[Term]:
    """Float a let out of an immediate child of an operator node."""
    if isinstance(t, Lam) or _is_let(t) or not children(t):
        return None
    kids = list(children(t))
    for i, c in enumerate(kids):
        if _is_let(c):
            binders, scrut, body = _let_parts(c)
            sibling_fv: set[str] = set()
            for j, k in enumerate(kids):
                if j != i:
                    sibling_fv |= free_vars(k)
            clashes = set(binders) & sibling_fv
            binders, body = _rename_binders(binders, body, clashes, sibling_fv | free_vars(body))
            kids_new = list(kids)
            kids_new[i] = body
            return _make_let(binders, scrut, _rebuild(t, kids_new))
    return None


def _mask_literals(t: Term) -> Term:
    if isinstance(t, Const):
        return Const(0.0)
    kids = [_mask_literals(c) for c in children(t)]
    return _rebuild(t, kids) if kids else t


def _let_sort_key(t: Term) -> tuple[str, str]:
    # primary key ignores literal values so that two terms differing only
    # in literals order their independent lets identically
    from .core import print_term

    binders, scrut, _ = _let_parts(t)
    return print_term(_mask_literals(scrut)), print_term(scrut)


def _sort_lets(t: Term) -> Term:
    kids = [_sort_lets(c) for c in children(t)]
    if kids:
        t = _rebuild(t, kids)
    changed = True
    while changed:
        changed = False
        if _is_let(t) and _is_let(_let_parts(t)[2]):
            b1, s1, inner = _let_parts(t)
            b2, s2, body = _let_parts(inner)
            independent = not (set(b1) & free_vars(s2)) and not (set(b2) & free_vars(s1))
            if independent and _let_sort_key(inner) < _let_sort_key(t):
                t = _make_let(b2, s2, _sort_lets(_make_let(b1, s1, body)))
                changed = True
    return t


def eq_canonical(term: Term, registry: Optional[SymbolRegistry] = None) -> Term:
    """Canonical representative; every rewrite step is derivable."""
    registry = registry if registry is not None else default_registry()
    t = beta_normalize(term)
    for _ in range(term_size(term) + 8):
        # order lets before eta-contraction can dissolve a chain, so that
        # permuted chains reach the same representative
        t2 = _hoist_lets(t)
        t2 = _sort_lets(t2)
        t2 = _eta_contract(t2)
        t2 = _fold_literals(t2, registry)
        t2 = beta_normalize(t2)
        if t2 == t:
            break
        t = t2
    return t


def eq_decide(m: Term, n: Term, registry: Optional[SymbolRegistry] = None) -> bool:
    """True only if the equality is derivable (shared canonical form)."""
    registry = registry if registry is not None else default_registry()
    return alpha_eq(eq_canonical(m, registry), eq_canonical(n, registry))
