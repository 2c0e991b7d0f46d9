"""Interactive model: wire functions, trace feedback, wire decomposition.

A term ``Γ ⊢ M : σ`` denotes a strategy exchanging values with its
environment over wires.  Every type flattens into atomic wires tagged
``R`` or ``I``: the positive atoms of Γ plus the negative atoms of σ are
the inputs, the negative atoms of Γ plus the positive atoms of σ are the
outputs, enumerated left to right.  R-wires carry a real or a bottom
element; I-wires carry the one-point domain.

Composition (application, pair destruction) feeds wires back through a
least-fixpoint trace over the flat wire domains, so every feedback loop
converges in at most ``width + 1`` rounds.

For a beta-normal term the whole strategy is equivalent to a tuple of
first-order terms, one per output wire, over variables naming the input
wires.  ``decompose`` computes them symbolically; ``int_distance`` sums
per-wire distances between two such decompositions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

from .core import (
    App,
    Const,
    Derivation,
    DistInterval,
    Env,
    FnApp,
    INF,
    Lam,
    LetPair,
    LetStar,
    LinError,
    Pair,
    Star,
    STAR,
    SymbolRegistry,
    Term,
    TLolli,
    TTensor,
    Ty,
    TypeError_,
    Var,
    default_registry,
    derive,
    fmt_real,
    neg_atoms,
    pos_atoms,
)
from .dynamics import beta_normalize, is_beta_normal
from .semden import BOTTOM, UNIT, ProbeBattery


class ModelError(LinError):
    """Internal invariant violation in the interactive model."""


# ---------------------------------------------------------------------------
# Wire bookkeeping


def env_pos_atoms(env: Env) -> tuple[str, ...]:
    out: tuple[str, ...] = ()
    for _, t in env:
        out += pos_atoms(t)
    return out


def env_neg_atoms(env: Env) -> tuple[str, ...]:
    out: tuple[str, ...] = ()
    for _, t in env:
        out += neg_atoms(t)
    return out


def _block_labels(name: str, atoms: tuple[str, ...]) -> list[str]:
    if len(atoms) == 1:
        return [name]
    return [f"{name}.{i + 1}" for i in range(len(atoms))]


@dataclass(frozen=True)
class WireSignature:
    """Input/output wire counts and types of a typed term."""

    m: int
    n: int
    in_types: tuple[str, ...]
    out_types: tuple[str, ...]
    in_labels: tuple[str, ...]
    out_labels: tuple[str, ...]


def wire_signature(env: Env, ty: Ty) -> WireSignature:
    in_types: list[str] = []
    in_labels: list[str] = []
    out_types: list[str] = []
    out_labels: list[str] = []
    for name, t in env:
        atoms = pos_atoms(t)
        in_types += atoms
        in_labels += _block_labels(name, atoms)
    ret_neg = neg_atoms(ty)
    in_types += ret_neg
    in_labels += _block_labels("ret", ret_neg)
    for name, t in env:
        atoms = neg_atoms(t)
        out_types += atoms
        out_labels += _block_labels(name, atoms)
    ret_pos = pos_atoms(ty)
    out_types += ret_pos
    out_labels += _block_labels("ret", ret_pos)
    return WireSignature(
        len(in_types), len(out_types),
        tuple(in_types), tuple(out_types),
        tuple(in_labels), tuple(out_labels),
    )


def bottom_of(atom: str):
    return UNIT if atom == "I" else BOTTOM


# ---------------------------------------------------------------------------
# Wire functions and trace

trace_stats = {"traces": 0, "max_iterations": 0}


def reset_trace_stats():
    trace_stats["traces"] = 0
    trace_stats["max_iterations"] = 0


@dataclass(frozen=True)
class WireFunction:
    """Monotone non-expansive map between tuples of flat wire values."""

    in_types: tuple[str, ...]
    out_types: tuple[str, ...]
    step: Callable[[tuple], tuple]
    feedback_width: int = 0

    def __call__(self, inputs: tuple) -> tuple:
        if len(inputs) != len(self.in_types):
            raise TypeError_(f"expected {len(self.in_types)} wire inputs, got {len(inputs)}")
        out = self.step(tuple(inputs))
        if len(out) != len(self.out_types):
            raise ModelError("wire function produced a tuple of the wrong width")
        return out


def _wire_leq(a, b) -> bool:
    return a is BOTTOM or a == b or (a is UNIT and b is UNIT)


def _iterate_feedback(
    fn: Callable[[tuple], tuple], z_types: tuple[str, ...]
) -> tuple:
    """Least fixpoint of ``fn`` on the flat feedback tuple.

    Raises ModelError if an update is not an increase in the flat order.
    """
    width = len(z_types)
    z = tuple(bottom_of(t) for t in z_types)
    iterations = 0
    for _ in range(width + 2):
        z_new = fn(z)
        if z_new == z:
            break
        for old, new in zip(z, z_new):
            if not _wire_leq(old, new):
                raise ModelError("non-monotone feedback step detected")
        z = z_new
        iterations += 1
    else:
        raise ModelError("feedback did not converge within width + 1 rounds")
    trace_stats["traces"] += 1
    trace_stats["max_iterations"] = max(trace_stats["max_iterations"], iterations)
    if iterations > width + 1:
        raise ModelError("feedback iteration bound exceeded")
    return z


def trace(f: WireFunction, z_width: int) -> WireFunction:
    """Feedback of the last ``z_width`` wires of ``f`` onto themselves."""
    if z_width == 0:
        return f
    if z_width > min(len(f.in_types), len(f.out_types)):
        raise TypeError_("feedback width exceeds the wire signature")
    in_keep = f.in_types[: len(f.in_types) - z_width]
    out_keep = f.out_types[: len(f.out_types) - z_width]
    z_in = f.in_types[len(in_keep):]
    z_out = f.out_types[len(out_keep):]
    if z_in != z_out:
        raise TypeError_(f"feedback wires disagree: {z_in} vs {z_out}")

    def step(inputs: tuple) -> tuple:
        def advance(z: tuple) -> tuple:
            return f(inputs + z)[len(out_keep):]

        z = _iterate_feedback(advance, z_in)
        return f(inputs + z)[: len(out_keep)]

    return WireFunction(in_keep, out_keep, step, feedback_width=z_width)


def symmetry(types: tuple[str, ...], k: int) -> WireFunction:
    """Swap the first k wires with the rest."""

    def step(inputs: tuple) -> tuple:
        return inputs[k:] + inputs[:k]

    return WireFunction(types, types[k:] + types[:k], step)


# ---------------------------------------------------------------------------
# Interpretation


def interp_int(env: Env, term: Term, registry: Optional[SymbolRegistry] = None) -> WireFunction:
    registry = registry if registry is not None else default_registry()
    d = derive(env, term, registry)
    return _interp(d, registry)


def _env_pos_indices(env: Env, names: tuple[str, ...]) -> list[int]:
    """Input positions of the pos atoms of the named subsequence."""
    picked = set(names)
    idx, out = 0, []
    for name, t in env:
        k = len(pos_atoms(t))
        if name in picked:
            out.extend(range(idx, idx + k))
        idx += k
    return out


def _env_neg_layout(env: Env) -> dict[str, tuple[int, int]]:
    idx, out = 0, {}
    for name, t in env:
        k = len(neg_atoms(t))
        out[name] = (idx, idx + k)
        idx += k
    return out


def _assemble_neg(env: Env, pieces: dict[str, tuple]) -> tuple:
    out: tuple = ()
    for name, _t in env:
        out += pieces[name]
    return out


def _split_neg_by_env(env: Env, values: tuple) -> dict[str, tuple]:
    layout = _env_neg_layout(env)
    return {name: values[a:b] for name, (a, b) in layout.items()}


def _interp(d: Derivation, reg: SymbolRegistry) -> WireFunction:
    t, env, ty = d.term, d.env, d.ty
    sig = wire_signature(env, ty)

    if isinstance(t, Var):
        p = len(pos_atoms(ty))

        def step(inputs: tuple) -> tuple:
            return inputs[p:] + inputs[:p]

        return WireFunction(sig.in_types, sig.out_types, step)

    if isinstance(t, Const):
        return WireFunction(sig.in_types, sig.out_types, lambda _i, _a=t.value: (_a,))

    if isinstance(t, Star):
        return WireFunction(sig.in_types, sig.out_types, lambda _i: (UNIT,))

    if isinstance(t, Lam):
        inner = _interp(d.children[0], reg)
        return WireFunction(sig.in_types, sig.out_types, inner.step, inner.feedback_width)

    if isinstance(t, FnApp):
        subs = [_interp(c, reg) for c in d.children]
        split_names = d.splits[0]
        sub_envs = [c.env for c in d.children]
        pos_idx = [_env_pos_indices(env, names) for names in split_names]
        sym = reg.get(t.symbol)

        def step(inputs: tuple) -> tuple:
            neg_pieces: dict[str, tuple] = {}
            results = []
            for wf, idxs, senv in zip(subs, pos_idx, sub_envs):
                out = wf(tuple(inputs[i] for i in idxs))
                neg_pieces.update(_split_neg_by_env(senv, out[:-1]))
                results.append(out[-1])
            if any(r is BOTTOM for r in results):
                r = BOTTOM
            else:
                r = sym(*results)
            return _assemble_neg(env, neg_pieces) + (r,)

        return WireFunction(sig.in_types, sig.out_types, step)

    if isinstance(t, Pair):
        dl, dr = d.children
        wl, wr = _interp(dl, reg), _interp(dr, reg)
        li = _env_pos_indices(env, d.splits[0][0])
        ri = _env_pos_indices(env, d.splits[0][1])
        nl = len(neg_atoms(dl.ty))
        nr = len(neg_atoms(dr.ty))

        def step(inputs: tuple) -> tuple:
            envin = inputs[: len(inputs) - nl - nr]
            ret_neg = inputs[len(inputs) - nl - nr:]
            out_l = wl(tuple(envin[i] for i in li) + ret_neg[:nl])
            out_r = wr(tuple(envin[i] for i in ri) + ret_neg[nl:])
            kl = len(env_neg_atoms(dl.env))
            kr = len(env_neg_atoms(dr.env))
            pieces = _split_neg_by_env(dl.env, out_l[:kl])
            pieces.update(_split_neg_by_env(dr.env, out_r[:kr]))
            return _assemble_neg(env, pieces) + out_l[kl:] + out_r[kr:]

        return WireFunction(sig.in_types, sig.out_types, step)

    if isinstance(t, App):
        df, da = d.children
        wf_, wa = _interp(df, reg), _interp(da, reg)
        assert isinstance(df.ty, TLolli)
        sigma = df.ty.arg
        sp = pos_atoms(sigma)
        sn = neg_atoms(sigma)
        fi = _env_pos_indices(env, d.splits[0][0])
        ai = _env_pos_indices(env, d.splits[0][1])
        ret_neg_len = len(neg_atoms(ty))
        kf = len(env_neg_atoms(df.env))
        ka = len(env_neg_atoms(da.env))

        def step(inputs: tuple) -> tuple:
            envin = inputs[: len(inputs) - ret_neg_len]
            t_neg = inputs[len(inputs) - ret_neg_len:]
            f_in = tuple(envin[i] for i in fi)
            a_in = tuple(envin[i] for i in ai)
            state = {}

            def advance(z: tuple) -> tuple:
                s_pos, s_neg = z[: len(sp)], z[len(sp):]
                out_f = wf_(f_in + s_pos + t_neg)
                out_a = wa(a_in + s_neg)
                state["f"], state["a"] = out_f, out_a
                return out_a[ka:] + out_f[kf: kf + len(sn)]

            _iterate_feedback(advance, tuple(sp) + tuple(sn))
            out_f, out_a = state["f"], state["a"]
            pieces = _split_neg_by_env(df.env, out_f[:kf])
            pieces.update(_split_neg_by_env(da.env, out_a[:ka]))
            return _assemble_neg(env, pieces) + out_f[kf + len(sn):]

        return WireFunction(
            sig.in_types, sig.out_types, step, feedback_width=len(sp) + len(sn)
        )

    if isinstance(t, LetStar):
        ds, db = d.children
        ws, wb = _interp(ds, reg), _interp(db, reg)
        si = _env_pos_indices(env, d.splits[0][0])
        bi = _env_pos_indices(env, d.splits[0][1])
        ret_neg_len = len(neg_atoms(ty))
        ks = len(env_neg_atoms(ds.env))

        def step(inputs: tuple) -> tuple:
            envin = inputs[: len(inputs) - ret_neg_len]
            t_neg = inputs[len(inputs) - ret_neg_len:]
            out_s = ws(tuple(envin[i] for i in si))
            out_b = wb(tuple(envin[i] for i in bi) + t_neg)
            kb = len(env_neg_atoms(db.env))
            pieces = _split_neg_by_env(ds.env, out_s[:ks])
            pieces.update(_split_neg_by_env(db.env, out_b[:kb]))
            return _assemble_neg(env, pieces) + out_b[kb:]

        return WireFunction(sig.in_types, sig.out_types, step)

    if isinstance(t, LetPair):
        ds, db = d.children
        ws, wb = _interp(ds, reg), _interp(db, reg)
        assert isinstance(ds.ty, TTensor)
        sp = pos_atoms(ds.ty)
        sn = neg_atoms(ds.ty)
        si = _env_pos_indices(env, d.splits[0][0])
        bi = _env_pos_indices(env, d.splits[0][1])
        ret_neg_len = len(neg_atoms(ty))
        ks = len(env_neg_atoms(ds.env))
        # body env is (Δ', x:σ1, y:σ2); its trailing pos atoms are the cut
        kb = len(env_neg_atoms(db.env)) - len(sn)

        def step(inputs: tuple) -> tuple:
            envin = inputs[: len(inputs) - ret_neg_len]
            t_neg = inputs[len(inputs) - ret_neg_len:]
            s_in = tuple(envin[i] for i in si)
            b_in = tuple(envin[i] for i in bi)
            state = {}

            def advance(z: tuple) -> tuple:
                c_pos, c_neg = z[: len(sp)], z[len(sp):]
                out_s = ws(s_in + c_neg)
                out_b = wb(b_in + c_pos + t_neg)
                state["s"], state["b"] = out_s, out_b
                return out_s[ks:] + out_b[kb: kb + len(sn)]

            _iterate_feedback(advance, tuple(sp) + tuple(sn))
            out_s, out_b = state["s"], state["b"]
            pieces = _split_neg_by_env(ds.env, out_s[:ks])
            body_outer_env = Env(db.env.bindings[:-2])
            pieces.update(_split_neg_by_env(body_outer_env, out_b[:kb]))
            return _assemble_neg(env, pieces) + out_b[kb + len(sn):]

        return WireFunction(
            sig.in_types, sig.out_types, step, feedback_width=len(sp) + len(sn)
        )

    raise AssertionError(t)


# ---------------------------------------------------------------------------
# Wire decomposition of beta-normal terms

IntTerm = Term  # restricted to Var/Const/Star/FnApp over wire variables


def int_term_vars(h: IntTerm) -> set[str]:
    if isinstance(h, Var):
        return {h.name}
    if isinstance(h, FnApp):
        out: set[str] = set()
        for a in h.args:
            out |= int_term_vars(a)
        return out
    return set()


class _Decomposer:
    def __init__(self, registry: SymbolRegistry):
        self.registry = registry
        self.equations: dict[str, IntTerm] = {}
        self.counter = itertools.count()

    def fresh(self) -> Var:
        return Var(f"?{next(self.counter)}")

    def cut(self, n: int) -> list[Var]:
        return [self.fresh() for _ in range(n)]

    def define(self, placeholder: Var, value: IntTerm):
        self.equations[placeholder.name] = value

    def resolve(self, h: IntTerm, _stack: frozenset = frozenset()) -> IntTerm:
        if isinstance(h, Var) and h.name.startswith("?"):
            if h.name in _stack:
                raise ModelError("cyclic wire dependency in decomposition")
            if h.name not in self.equations:
                raise ModelError(f"unresolved cut wire {h.name}")
            return self.resolve(self.equations[h.name], _stack | {h.name})
        if isinstance(h, FnApp):
            return FnApp(h.symbol, tuple(self.resolve(a, _stack) for a in h.args))
        return h

    # Each case maps symbolic input wires to symbolic output wires,
    # mirroring the executable interpretation above.
    def go(self, d: Derivation, inputs: list[IntTerm]) -> list[IntTerm]:
        t, env, ty = d.term, d.env, d.ty

        if isinstance(t, Var):
            p = len(pos_atoms(ty))
            return inputs[p:] + inputs[:p]
        if isinstance(t, Const):
            return [Const(t.value)]
        if isinstance(t, Star):
            return [STAR]
        if isinstance(t, Lam):
            return self.go(d.children[0], inputs)
        if isinstance(t, FnApp):
            pos_idx = [_env_pos_indices(env, names) for names in d.splits[0]]
            neg_pieces: dict[str, list[IntTerm]] = {}
            heads = []
            for child, idxs in zip(d.children, pos_idx):
                out = self.go(child, [inputs[i] for i in idxs])
                for name, (a, b) in _env_neg_layout(child.env).items():
                    neg_pieces[name] = out[a:b]
                heads.append(out[-1])
            merged: list[IntTerm] = []
            for name, _ in env:
                merged += neg_pieces[name]
            return merged + [FnApp(t.symbol, tuple(heads))]
        if isinstance(t, Pair):
            dl, dr = d.children
            li = _env_pos_indices(env, d.splits[0][0])
            ri = _env_pos_indices(env, d.splits[0][1])
            nl = len(neg_atoms(dl.ty))
            nr = len(neg_atoms(dr.ty))
            envin = inputs[: len(inputs) - nl - nr]
            ret_neg = inputs[len(inputs) - nl - nr:]
            out_l = self.go(dl, [envin[i] for i in li] + ret_neg[:nl])
            out_r = self.go(dr, [envin[i] for i in ri] + ret_neg[nl:])
            kl = len(env_neg_atoms(dl.env))
            kr = len(env_neg_atoms(dr.env))
            pieces = {}
            for name, (a, b) in _env_neg_layout(dl.env).items():
                pieces[name] = out_l[a:b]
            for name, (a, b) in _env_neg_layout(dr.env).items():
                pieces[name] = out_r[a:b]
            merged = []
            for name, _ in env:
                merged += pieces[name]
            return merged + out_l[kl:] + out_r[kr:]
        if isinstance(t, App):
            df, da = d.children
            sigma = df.ty.arg  # type: ignore[union-attr]
            sp, sn = pos_atoms(sigma), neg_atoms(sigma)
            fi = _env_pos_indices(env, d.splits[0][0])
            ai = _env_pos_indices(env, d.splits[0][1])
            ret_neg_len = len(neg_atoms(ty))
            envin = inputs[: len(inputs) - ret_neg_len]
            t_neg = inputs[len(inputs) - ret_neg_len:]
            c_pos = self.cut(len(sp))
            c_neg = self.cut(len(sn))
            out_f = self.go(df, [envin[i] for i in fi] + c_pos + t_neg)
            out_a = self.go(da, [envin[i] for i in ai] + c_neg)
            kf = len(env_neg_atoms(df.env))
            ka = len(env_neg_atoms(da.env))
            for ph, val in zip(c_neg, out_f[kf: kf + len(sn)]):
                self.define(ph, val)
            for ph, val in zip(c_pos, out_a[ka:]):
                self.define(ph, val)
            pieces = {}
            for name, (a, b) in _env_neg_layout(df.env).items():
                pieces[name] = out_f[a:b]
            for name, (a, b) in _env_neg_layout(da.env).items():
                pieces[name] = out_a[a:b]
            merged = []
            for name, _ in env:
                merged += pieces[name]
            return merged + out_f[kf + len(sn):]
        if isinstance(t, LetStar):
            ds, db = d.children
            si = _env_pos_indices(env, d.splits[0][0])
            bi = _env_pos_indices(env, d.splits[0][1])
            ret_neg_len = len(neg_atoms(ty))
            envin = inputs[: len(inputs) - ret_neg_len]
            t_neg = inputs[len(inputs) - ret_neg_len:]
            out_s = self.go(ds, [envin[i] for i in si])
            out_b = self.go(db, [envin[i] for i in bi] + t_neg)
            ks = len(env_neg_atoms(ds.env))
            kb = len(env_neg_atoms(db.env))
            pieces = {}
            for name, (a, b) in _env_neg_layout(ds.env).items():
                pieces[name] = out_s[a:b]
            for name, (a, b) in _env_neg_layout(db.env).items():
                pieces[name] = out_b[a:b]
            merged = []
            for name, _ in env:
                merged += pieces[name]
            return merged + out_b[kb:]
        if isinstance(t, LetPair):
            ds, db = d.children
            sp, sn = pos_atoms(ds.ty), neg_atoms(ds.ty)
            si = _env_pos_indices(env, d.splits[0][0])
            bi = _env_pos_indices(env, d.splits[0][1])
            ret_neg_len = len(neg_atoms(ty))
            envin = inputs[: len(inputs) - ret_neg_len]
            t_neg = inputs[len(inputs) - ret_neg_len:]
            c_pos = self.cut(len(sp))
            c_neg = self.cut(len(sn))
            out_s = self.go(ds, [envin[i] for i in si] + c_neg)
            out_b = self.go(db, [envin[i] for i in bi] + c_pos + t_neg)
            ks = len(env_neg_atoms(ds.env))
            kb = len(env_neg_atoms(db.env)) - len(sn)
            for ph, val in zip(c_pos, out_s[ks:]):
                self.define(ph, val)
            for ph, val in zip(c_neg, out_b[kb: kb + len(sn)]):
                self.define(ph, val)
            body_outer_env = Env(db.env.bindings[:-2])
            pieces = {}
            for name, (a, b) in _env_neg_layout(ds.env).items():
                pieces[name] = out_s[a:b]
            for name, (a, b) in _env_neg_layout(body_outer_env).items():
                pieces[name] = out_b[a:b]
            merged = []
            for name, _ in env:
                merged += pieces[name]
            return merged + out_b[kb + len(sn):]
        raise AssertionError(t)


def decompose(
    env: Env, term: Term, registry: Optional[SymbolRegistry] = None
) -> tuple[list[IntTerm], list[frozenset[int]]]:
    """First-order wire terms of a beta-normal term, one per output wire.

    Variables ``x1 .. xm`` name the input wires; the returned partition
    lists, per output wire, the 1-based input indices its term consumes
    (unused wires belong to no block).
    """
    registry = registry if registry is not None else default_registry()
    if not is_beta_normal(term):
        raise ModelError("decompose requires a beta-normal term")
    d = derive(env, term, registry)
    sig = wire_signature(env, d.ty)
    dec = _Decomposer(registry)
    inputs: list[IntTerm] = [Var(f"x{i + 1}") for i in range(sig.m)]
    outs = dec.go(d, inputs)
    resolved = [dec.resolve(h) for h in outs]
    partition = []
    seen: set[str] = set()
    for h in resolved:
        vs = int_term_vars(h)
        if vs & seen:
            raise ModelError("input wire used by two output terms")
        seen |= vs
        partition.append(frozenset(int(v[1:]) for v in vs))
    return resolved, partition


def int_term_denotation(h: IntTerm, assignment: dict[str, object], registry: SymbolRegistry):
    """Value of a wire term under an assignment of input wire values."""
    if isinstance(h, Var):
        return assignment[h.name]
    if isinstance(h, Const):
        return h.value
    if isinstance(h, Star):
        return UNIT
    if isinstance(h, FnApp):
        args = [int_term_denotation(a, assignment, registry) for a in h.args]
        if any(a is BOTTOM for a in args):
            return BOTTOM
        return registry.get(h.symbol)(*args)
    raise AssertionError(h)


def format_int_term(h: IntTerm, labels: dict[str, str] | None = None) -> str:
    if isinstance(h, Var):
        return labels.get(h.name, h.name) if labels else h.name
    if isinstance(h, Const):
        return fmt_real(h.value)
    if isinstance(h, Star):
        return "*"
    if isinstance(h, FnApp):
        return f"{h.symbol}({', '.join(format_int_term(a, labels) for a in h.args)})"
    raise AssertionError(h)


# ---------------------------------------------------------------------------
# Distances between wire terms


def _int_term_closed_value(h: IntTerm, registry: SymbolRegistry) -> float:
    v = int_term_denotation(h, {}, registry)
    if not isinstance(v, float):
        raise ModelError("expected a closed real wire term")
    return v


def fold_int_term(h: IntTerm, registry: SymbolRegistry) -> IntTerm:
    """Evaluate symbol applications on all-literal arguments.

    Denotation-preserving, so distances over folded terms equal
    distances over the originals; folding aligns skeletons that differ
    only in evaluated sub-expressions.
    """
    if isinstance(h, FnApp):
        args = tuple(fold_int_term(a, registry) for a in h.args)
        if all(isinstance(a, Const) for a in args):
            return Const(registry.get(h.symbol)(*[a.value for a in args]))
        return FnApp(h.symbol, args)
    return h


def _same_skeleton(h1: IntTerm, h2: IntTerm) -> Optional[list[tuple]]:
    """If the terms differ only in literals/symbols at matching positions,
    return the list of differences; otherwise None."""
    if isinstance(h1, Const) and isinstance(h2, Const):
        return [] if h1.value == h2.value else [("lit", h1.value, h2.value)]
    if isinstance(h1, Var) and isinstance(h2, Var):
        return [] if h1.name == h2.name else None
    if isinstance(h1, Star) and isinstance(h2, Star):
        return []
    if isinstance(h1, FnApp) and isinstance(h2, FnApp):
        if len(h1.args) != len(h2.args):
            return None
        out = [] if h1.symbol == h2.symbol else [("sym", h1.symbol, h2.symbol)]
        for a, b in zip(h1.args, h2.args):
            sub = _same_skeleton(a, b)
            if sub is None:
                return None
            out += sub
        return out
    return None


def _monotone_symbols(h: IntTerm, registry: SymbolRegistry) -> bool:
    monotone = {"add", "min", "max"}
    if isinstance(h, FnApp):
        name_ok = h.symbol in monotone
        return name_ok and all(_monotone_symbols(a, registry) for a in h.args)
    return True


def _sampled_gap(
    h1: IntTerm, h2: IntTerm, battery: ProbeBattery, registry: SymbolRegistry
) -> float:
    """Max |h1 - h2| over battery assignments to the shared variables,
    refined by a few rounds of local bisection per variable."""
    vs = sorted(int_term_vars(h1) | int_term_vars(h2))

    def gap(assign: dict[str, object]) -> float:
        a = int_term_denotation(h1, assign, registry)
        b = int_term_denotation(h2, assign, registry)
        if a is BOTTOM or b is BOTTOM or a is UNIT or b is UNIT:
            return 0.0
        return abs(a - b)

    if not vs:
        return gap({})
    grid = battery.reals[:16]
    best, best_assign = 0.0, {v: 0.0 for v in vs}
    for combo in itertools.islice(itertools.product(grid, repeat=len(vs)), 4096):
        assign = dict(zip(vs, combo))
        g = gap(assign)
        if g > best:
            best, best_assign = g, assign
    # coordinate descent with local bisection
    span = 8.0
    for _round in range(3):
        for v in vs:
            base = best_assign[v]
            for cand in (base - span, base - span / 2, base + span / 2, base + span):
                trial = dict(best_assign)
                trial[v] = cand
                g = gap(trial)
                if g > best:
                    best, best_assign = g, trial
        span /= 2
    return best


def first_order_distance(
    h1: IntTerm,
    h2: IntTerm,
    battery: ProbeBattery,
    registry: SymbolRegistry,
    wire_type: str = "R",
) -> DistInterval:
    """Enclosure of sup over shared wire inputs of |h1 - h2|."""
    if wire_type == "I":
        return DistInterval(0.0, 0.0)
    h1 = fold_int_term(h1, registry)
    h2 = fold_int_term(h2, registry)
    if h1 == h2:
        return DistInterval(0.0, 0.0)
    v1, v2 = int_term_vars(h1), int_term_vars(h2)
    if not v1 and not v2:
        d = abs(_int_term_closed_value(h1, registry) - _int_term_closed_value(h2, registry))
        return DistInterval(d, d)
    diffs = _same_skeleton(h1, h2)
    if diffs is not None:
        hi = 0.0
        for kind, a, b in diffs:
            if kind == "lit":
                hi += abs(a - b)
            else:
                hi += registry.gap(a, b)
        lo = _sampled_gap(h1, h2, battery, registry)
        lo = min(lo, hi)
        return DistInterval(lo, hi)
    lo = _sampled_gap(h1, h2, battery, registry)
    return DistInterval(lo, INF)


def int_distance(
    env: Env,
    ty: Ty,
    m: Term,
    n: Term,
    battery: Optional[ProbeBattery] = None,
    registry: Optional[SymbolRegistry] = None,
) -> DistInterval:
    """Interactive distance: per-wire sum over the decompositions.

    Non-normal inputs are normalized first and the result is flagged; it
    is then a lower-bound reading for the original pair (normalization
    never increases this metric).
    """
    registry = registry if registry is not None else default_registry()
    battery = battery if battery is not None else ProbeBattery(registry)
    tym = derive(env, m, registry).ty
    tyn = derive(env, n, registry).ty
    if tym != ty or tyn != ty:
        raise TypeError_("type mismatch in int_distance")
    normalized = False
    if not is_beta_normal(m):
        m, normalized = beta_normalize(m), True
    if not is_beta_normal(n):
        n, normalized = beta_normalize(n), True
    hm, _ = decompose(env, m, registry)
    hn, _ = decompose(env, n, registry)
    sig = wire_signature(env, ty)
    total = DistInterval(0.0, 0.0)
    for h1, h2, wt in zip(hm, hn, sig.out_types):
        total = total + first_order_distance(h1, h2, battery, registry, wire_type=wt)
    return DistInterval(total.lo, total.hi, normalized=normalized)


# ---------------------------------------------------------------------------
# Diagram export


def export_diagram(env: Env, term: Term, registry: Optional[SymbolRegistry] = None) -> str:
    """Graphviz DOT rendering of the wire strategy of a term.

    Inputs on the left rank, outputs on the right; boxes for constants
    and symbol applications; output edges labeled with their wire terms.
    Node names b<k> and edge names w<k> are stable for golden tests.
    """
    registry = registry if registry is not None else default_registry()
    normalized = False
    if not is_beta_normal(term):
        term, normalized = beta_normalize(term), True
    d = derive(env, term, registry)
    sig = wire_signature(env, d.ty)
    hs, _ = decompose(env, term, registry)
    labels = {f"x{i + 1}": sig.in_labels[i] for i in range(sig.m)}

    lines = ["digraph wires {", "  rankdir=LR;", '  node [fontname="Courier"];']
    if normalized:
        lines.append("  // input was normalized before rendering")
    for i in range(sig.m):
        lines.append(f'  i{i} [shape=plaintext, label="{sig.in_labels[i]}:{sig.in_types[i]}"];')
    for j in range(sig.n):
        text = format_int_term(hs[j], labels)
        lines.append(
            f'  o{j} [shape=plaintext, label="H{j + 1}={text}"];'
        )
    box_counter = itertools.count()
    wire_counter = itertools.count()

    def emit(h: IntTerm) -> str:
        """Returns the source node of the wire carrying h."""
        if isinstance(h, Var):
            return f"i{int(h.name[1:]) - 1}"
        if isinstance(h, (Const, Star)):
            k = next(box_counter)
            label = "*" if isinstance(h, Star) else fmt_real(h.value)
            lines.append(f'  b{k} [shape=box, label="{label}"];')
            return f"b{k}"
        if isinstance(h, FnApp):
            k = next(box_counter)
            lines.append(f'  b{k} [shape=box, label="{h.symbol}"];')
            for a in h.args:
                src = emit(a)
                w = next(wire_counter)
                lines.append(f'  {src} -> b{k} [label="w{w}"];')
            return f"b{k}"
        raise AssertionError(h)

    for j, h in enumerate(hs):
        src = emit(h)
        w = next(wire_counter)
        lines.append(f'  {src} -> o{j} [label="w{w}:{sig.out_types[j]}"];')
    if sig.m:
        lines.append("  { rank=source; " + "; ".join(f"i{i}" for i in range(sig.m)) + "; }")
    lines.append("  { rank=sink; " + "; ".join(f"o{j}" for j in range(sig.n)) + "; }")
    lines.append("}")
    return "\n".join(lines) + "\n"
