"""Object language: types, terms, environments, linear typechecking.

The calculus is a linear lambda calculus over the reals.  Types are
``R`` (reals), ``I`` (unit), tensor and linear function types.  Every
variable in scope must be consumed exactly once; two-premise typing
rules split the environment into order-preserving interleavings
(merges), which the checker infers from variable usage.

Surface syntax (ASCII):

    term  := \\x:T. term | let * = term in term
           | let x (x) y = term in term | tensor
    tensor:= app (* app)*
    app   := atom atom*
    atom  := var | number | * | [-] | sym(term, ...) | (term)
    type  := tprod (-o type)?          -- right associative
    tprod := tatom ((x) tatom)*        -- left associative
    tatom := R | I | (type)

``*`` is the unit value in atom position and the tensor constructor
infix; ``f(...)`` is only permitted for registered symbol names.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

EPS = 1e-9
INF = math.inf

ExtReal = float  # non-negative float or math.inf


def fmt_real(a: float) -> str:
    """Compact rendering used in wire listings and diagram labels."""
    if math.isfinite(a) and a == int(a) and abs(a) < 1e15:
        return str(int(a))
    return repr(a)


class LinError(Exception):
    """Base class for user-facing errors."""


class ParseError(LinError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} (at offset {pos})")
        self.pos = pos


class TypeError_(LinError):
    """Typing failure: unbound/reused/unused variable or mismatch."""


class RegistryError(LinError):
    """Unknown symbol or ill-formed registry configuration."""


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class Ty:
    pass


@dataclass(frozen=True)
class TReal(Ty):
    def __repr__(self):
        return "R"


@dataclass(frozen=True)
class TUnit(Ty):
    def __repr__(self):
        return "I"


@dataclass(frozen=True)
class TTensor(Ty):
    left: Ty
    right: Ty

    def __repr__(self):
        return f"({self.left!r} (x) {self.right!r})"


@dataclass(frozen=True)
class TLolli(Ty):
    arg: Ty
    res: Ty

    def __repr__(self):
        return f"({self.arg!r} -o {self.res!r})"


R = TReal()
I = TUnit()


def tensor_of(types: Iterable[Ty]) -> Ty:
    """Left-associated n-fold tensor."""
    acc: Optional[Ty] = None
    for t in types:
        acc = t if acc is None else TTensor(acc, t)
    if acc is None:
        return I
    return acc


def print_type(t: Ty, *, _ctx: int = 0) -> str:
    # _ctx: 0 top, 1 tensor operand, 2 lolli left operand
    if isinstance(t, TReal):
        return "R"
    if isinstance(t, TUnit):
        return "I"
    if isinstance(t, TTensor):
        left = print_type(t.left, _ctx=1 if isinstance(t.left, TLolli) else 0)
        if isinstance(t.left, TLolli):
            left = f"({left})"
        right = print_type(t.right)
        if isinstance(t.right, (TTensor, TLolli)):
            right = f"({right})"
        s = f"{left} (x) {right}"
        return s
    if isinstance(t, TLolli):
        left = print_type(t.arg)
        if isinstance(t.arg, TLolli):
            left = f"({left})"
        right = print_type(t.res)
        s = f"{left} -o {right}"
        if _ctx != 0:
            s = f"({s})"
        return s
    raise AssertionError(t)


def is_observable(t: Ty) -> bool:
    """Built from R, I and tensor only: values are tuples of reals/units."""
    if isinstance(t, (TReal, TUnit)):
        return True
    if isinstance(t, TTensor):
        return is_observable(t.left) and is_observable(t.right)
    return False


def is_one_point(t: Ty) -> bool:
    """The plain-function interpretation of t is a single point.

    Unit and tensors of units are one-point; so is any function space
    into a one-point codomain (only the constant map inhabits it).
    """
    if isinstance(t, TReal):
        return False
    if isinstance(t, TUnit):
        return True
    if isinstance(t, TTensor):
        return is_one_point(t.left) and is_one_point(t.right)
    if isinstance(t, TLolli):
        return is_one_point(t.res)
    raise AssertionError(t)


def type_order(t: Ty) -> int:
    if isinstance(t, (TReal, TUnit)):
        return 0
    if isinstance(t, TTensor):
        return max(type_order(t.left), type_order(t.right))
    if isinstance(t, TLolli):
        return max(type_order(t.arg) + 1, type_order(t.res))
    raise AssertionError(t)


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Const(Term):
    value: float


@dataclass(frozen=True)
class Star(Term):
    pass


@dataclass(frozen=True)
class FnApp(Term):
    symbol: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Lam(Term):
    var: str
    ann: Ty
    body: Term


@dataclass(frozen=True)
class Pair(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class LetStar(Term):
    scrutinee: Term
    body: Term


@dataclass(frozen=True)
class LetPair(Term):
    var1: str
    var2: str
    scrutinee: Term
    body: Term


@dataclass(frozen=True)
class Hole(Term):
    """The unique hole of a one-hole context."""


STAR = Star()
HOLE = Hole()

# A Context is a Term containing exactly one Hole.
Context = Term


def subterms(t: Term):
    yield t
    for child in children(t):
        yield from subterms(child)


def children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, (Var, Const, Star, Hole)):
        return ()
    if isinstance(t, FnApp):
        return t.args
    if isinstance(t, App):
        return (t.fn, t.arg)
    if isinstance(t, Lam):
        return (t.body,)
    if isinstance(t, Pair):
        return (t.left, t.right)
    if isinstance(t, LetStar):
        return (t.scrutinee, t.body)
    if isinstance(t, LetPair):
        return (t.scrutinee, t.body)
    raise AssertionError(t)


def term_size(t: Term) -> int:
    return 1 + sum(term_size(c) for c in children(t))


def free_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, (Const, Star, Hole)):
        return set()
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.var}
    if isinstance(t, LetPair):
        return free_vars(t.scrutinee) | (free_vars(t.body) - {t.var1, t.var2})
    out: set[str] = set()
    for c in children(t):
        out |= free_vars(c)
    return out


def is_value(t: Term) -> bool:
    if isinstance(t, (Const, Star, Lam)):
        return True
    if isinstance(t, Pair):
        return is_value(t.left) and is_value(t.right)
    return False


def plug(ctx: Context, m: Term) -> Term:
    """Fill the hole, without capture avoidance: contexts bind on purpose."""
    if isinstance(ctx, Hole):
        return m
    if isinstance(ctx, (Var, Const, Star)):
        return ctx
    if isinstance(ctx, FnApp):
        return FnApp(ctx.symbol, tuple(plug(a, m) for a in ctx.args))
    if isinstance(ctx, App):
        return App(plug(ctx.fn, m), plug(ctx.arg, m))
    if isinstance(ctx, Lam):
        return Lam(ctx.var, ctx.ann, plug(ctx.body, m))
    if isinstance(ctx, Pair):
        return Pair(plug(ctx.left, m), plug(ctx.right, m))
    if isinstance(ctx, LetStar):
        return LetStar(plug(ctx.scrutinee, m), plug(ctx.body, m))
    if isinstance(ctx, LetPair):
        return LetPair(ctx.var1, ctx.var2, plug(ctx.scrutinee, m), plug(ctx.body, m))
    raise AssertionError(ctx)


def hole_count(ctx: Term) -> int:
    return sum(1 for s in subterms(ctx) if isinstance(s, Hole))


# ---------------------------------------------------------------------------
# Environments: ordered (name, type) lists, names distinct


@dataclass(frozen=True)
class Env:
    bindings: tuple[tuple[str, Ty], ...] = ()

    def __post_init__(self):
        names = [n for n, _ in self.bindings]
        if len(set(names)) != len(names):
            raise TypeError_(f"duplicate variable in environment: {names}")

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.bindings)

    def types(self) -> tuple[Ty, ...]:
        return tuple(t for _, t in self.bindings)

    def lookup(self, name: str) -> Ty:
        for n, t in self.bindings:
            if n == name:
                return t
        raise TypeError_(f"unbound variable {name!r}")

    def extend(self, name: str, ty: Ty) -> "Env":
        if name in self.names():
            raise TypeError_(f"variable {name!r} rebound in environment")
        return Env(self.bindings + ((name, ty),))

    def restrict(self, names: set[str]) -> "Env":
        return Env(tuple(b for b in self.bindings if b[0] in names))

    def __len__(self):
        return len(self.bindings)

    def __iter__(self):
        return iter(self.bindings)


EMPTY_ENV = Env()


def env_of(*pairs: tuple[str, Ty]) -> Env:
    return Env(tuple(pairs))


# ---------------------------------------------------------------------------
# Symbol registry


BUILTIN_KINDS = ("add", "sin", "cos", "const", "scale_le1", "min", "max")


def _make_evaluator(kind: str, value: Optional[float]) -> tuple[int, Callable[..., float]]:
    if kind == "add":
        return 2, lambda a, b: a + b
    if kind == "sin":
        return 1, math.sin
    if kind == "cos":
        return 1, math.cos
    if kind == "const":
        if value is None:
            raise RegistryError("builtin 'const' requires a value")
        return 1, lambda _a, _v=value: _v
    if kind == "scale_le1":
        if value is None or abs(value) > 1.0:
            raise RegistryError("builtin 'scale_le1' requires a value with |value| <= 1")
        return 1, lambda a, _v=value: _v * a
    if kind == "min":
        return 2, min
    if kind == "max":
        return 2, max
    raise RegistryError(f"unknown builtin kind {kind!r}")


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    evaluator: Callable[..., float]

    def __call__(self, *args: float) -> float:
        return self.evaluator(*args)


class SymbolRegistry:
    """The ambient set of non-expansive function symbols.

    Frozen after construction.  ``gap(f, g)`` is an optional upper bound
    on ``sup_x |f(x) - g(x)|`` for same-arity symbols, used when bounding
    distances between wire terms with differing symbols.
    """

    def __init__(self, symbols: Iterable[Symbol] = (), gaps: dict[tuple[str, str], float] | None = None):
        self._symbols = {s.name: s for s in symbols}
        self._gaps = dict(gaps or {})

    def __contains__(self, name: str) -> bool:
        return name in self._symbols

    def get(self, name: str) -> Symbol:
        try:
            return self._symbols[name]
        except KeyError:
            raise RegistryError(f"unregistered symbol {name!r}") from None

    def arity(self, name: str) -> int:
        return self.get(name).arity

    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self._symbols))

    def gap(self, f: str, g: str) -> ExtReal:
        if f == g:
            return 0.0
        return self._gaps.get((f, g), self._gaps.get((g, f), INF))

    def validate_nonexpansive(self, seed: int = 0, samples: int = 1000, span: float = 50.0) -> None:
        """Sampled check that every evaluator is L1-non-expansive."""
        rng = random.Random(seed)
        for name in self.names():
            sym = self.get(name)
            for _ in range(samples):
                xs = [rng.uniform(-span, span) for _ in range(sym.arity)]
                ys = [rng.uniform(-span, span) for _ in range(sym.arity)]
                lhs = abs(sym(*xs) - sym(*ys))
                rhs = sum(abs(a - b) for a, b in zip(xs, ys))
                if lhs > rhs + 1e-9:
                    raise RegistryError(
                        f"symbol {name!r} is not non-expansive: |f{tuple(xs)} - f{tuple(ys)}| = {lhs} > {rhs}"
                    )

    @staticmethod
    def from_config(config: dict) -> "SymbolRegistry":
        symbols = []
        for entry in config.get("symbols", []):
            name = entry["name"]
            kind = entry.get("builtin")
            if kind not in BUILTIN_KINDS:
                raise RegistryError(f"symbol {name!r}: unknown builtin kind {kind!r}")
            arity, fn = _make_evaluator(kind, entry.get("value"))
            declared = entry.get("arity", arity)
            if declared != arity:
                raise RegistryError(f"symbol {name!r}: builtin {kind!r} has arity {arity}, not {declared}")
            symbols.append(Symbol(name, arity, fn))
        gaps = {}
        for entry in config.get("gaps", []):
            gaps[(entry["a"], entry["b"])] = float(entry["bound"])
        return SymbolRegistry(symbols, gaps)

    @staticmethod
    def from_file(path: str) -> "SymbolRegistry":
        with open(path, "r", encoding="utf-8") as fh:
            return SymbolRegistry.from_config(json.load(fh))


def default_registry() -> SymbolRegistry:
    return SymbolRegistry(
        [
            Symbol("add", 2, lambda a, b: a + b),
            Symbol("sin", 1, math.sin),
            Symbol("cos", 1, math.cos),
        ],
        gaps={("sin", "cos"): math.sqrt(2.0)},
    )


# ---------------------------------------------------------------------------
# Distance intervals


@dataclass(frozen=True)
class DistInterval:
    """Sound enclosure [lo, hi] of a true metric value."""

    lo: ExtReal
    hi: ExtReal
    lo_witness: object = None
    hi_certificate: object = None
    normalized: bool = False

    def __post_init__(self):
        if self.lo > self.hi + EPS:
            raise AssertionError(f"ill-formed interval [{self.lo}, {self.hi}]")

    def is_exact(self) -> bool:
        return self.hi - self.lo <= EPS

    def __add__(self, other: "DistInterval") -> "DistInterval":
        return DistInterval(self.lo + other.lo, self.hi + other.hi,
                            normalized=self.normalized or other.normalized)


EXACT_ZERO = DistInterval(0.0, 0.0)


# ---------------------------------------------------------------------------
# Polarity

@dataclass(frozen=True)
class Polarity:
    plus: int
    minus: int

    def __add__(self, other: "Polarity") -> "Polarity":
        return Polarity(self.plus + other.plus, self.minus + other.minus)


def type_polarity(t: Ty) -> Polarity:
    """Counts of positive/negative atomic occurrences; R and I both count."""
    if isinstance(t, (TReal, TUnit)):
        return Polarity(1, 0)
    if isinstance(t, TTensor):
        l, r = type_polarity(t.left), type_polarity(t.right)
        return Polarity(l.plus + r.plus, l.minus + r.minus)
    if isinstance(t, TLolli):
        a, r = type_polarity(t.arg), type_polarity(t.res)
        return Polarity(a.minus + r.plus, a.plus + r.minus)
    raise AssertionError(t)


def polarity(types: Iterable[Ty]) -> Polarity:
    out = Polarity(0, 0)
    for t in types:
        out = out + type_polarity(t)
    return out


def pos_atoms(t: Ty) -> tuple[str, ...]:
    """Positive atomic occurrences left to right, each 'R' or 'I'."""
    if isinstance(t, TReal):
        return ("R",)
    if isinstance(t, TUnit):
        return ("I",)
    if isinstance(t, TTensor):
        return pos_atoms(t.left) + pos_atoms(t.right)
    if isinstance(t, TLolli):
        return neg_atoms(t.arg) + pos_atoms(t.res)
    raise AssertionError(t)


def neg_atoms(t: Ty) -> tuple[str, ...]:
    if isinstance(t, (TReal, TUnit)):
        return ()
    if isinstance(t, TTensor):
        return neg_atoms(t.left) + neg_atoms(t.right)
    if isinstance(t, TLolli):
        return pos_atoms(t.arg) + neg_atoms(t.res)
    raise AssertionError(t)


# ---------------------------------------------------------------------------
# Parsing


_SYMBOL_CHARS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_0123456789'"


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: list[tuple[str, str, int]] = []
        self._lex()
        self.idx = 0

    def _lex(self):
        text, n = self.text, len(self.text)
        i = 0
        while i < n:
            c = text[i]
            if c.isspace():
                i += 1
                continue
            start = i
            if c == "-" and text[i : i + 2] == "-o":
                self.tokens.append(("-o", "-o", start))
                i += 2
            elif c == "[" and text[i : i + 3] == "[-]":
                self.tokens.append(("[-]", "[-]", start))
                i += 3
            elif c in "()\\.,*=":
                self.tokens.append((c, c, start))
                i += 1
            elif c == ":":
                self.tokens.append((":", ":", start))
                i += 1
            elif c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
                j = i + 1
                while j < n and (text[j].isdigit() or text[j] == "."):
                    j += 1
                if j < n and text[j] in "eE":
                    j += 1
                    if j < n and text[j] in "+-":
                        j += 1
                    while j < n and text[j].isdigit():
                        j += 1
                try:
                    value = float(text[i:j])
                except ValueError:
                    raise ParseError(f"bad numeric literal {text[i:j]!r}", start)
                self.tokens.append(("num", text[i:j], start))
                i = j
            elif c.isalpha() or c == "_":
                j = i
                while j < n and text[j] in _SYMBOL_CHARS:
                    j += 1
                self.tokens.append(("ident", text[i:j], start))
                i = j
            else:
                raise ParseError(f"unexpected character {c!r}", i)
        self.tokens.append(("eof", "", n))

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.idx]

    def peekn(self, k: int) -> tuple[str, str, int]:
        return self.tokens[min(self.idx + k, len(self.tokens) - 1)]

    def at_tensor_marker(self) -> bool:
        # the three-token sequence '(' 'x' ')' used in types and let patterns
        return (
            self.peek()[0] == "("
            and self.peekn(1)[:2] == ("ident", "x")
            and self.peekn(2)[0] == ")"
        )

    def eat_tensor_marker(self):
        self.expect("(")
        self.expect("ident")
        self.expect(")")

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.idx]
        if tok[0] != "eof":
            self.idx += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok


class _Parser:
    def __init__(self, text: str, registry: SymbolRegistry):
        self.lx = _Lexer(text)
        self.registry = registry

    # -- types

    def parse_type(self) -> Ty:
        left = self._parse_tensor_type()
        if self.lx.peek()[0] == "-o":
            self.lx.next()
            return TLolli(left, self.parse_type())
        return left

    def _parse_tensor_type(self) -> Ty:
        t = self._parse_atom_type()
        while self.lx.at_tensor_marker():
            self.lx.eat_tensor_marker()
            t = TTensor(t, self._parse_atom_type())
        return t

    def _parse_atom_type(self) -> Ty:
        kind, text, pos = self.lx.next()
        if kind == "ident" and text == "R":
            return R
        if kind == "ident" and text == "I":
            return I
        if kind == "(":
            t = self.parse_type()
            self.lx.expect(")")
            return t
        raise ParseError(f"expected a type, found {text!r}", pos)

    # -- terms

    def parse_term(self) -> Term:
        kind, text, pos = self.lx.peek()
        if kind == "\\":
            self.lx.next()
            _, name, npos = self.lx.expect("ident")
            if name in self.registry:
                raise ParseError(f"{name!r} is a registered symbol, not a variable", npos)
            self.lx.expect(":")
            ann = self.parse_type()
            self.lx.expect(".")
            return Lam(name, ann, self.parse_term())
        if kind == "ident" and text == "let":
            return self._parse_let()
        return self._parse_tensor()

    def _parse_let(self) -> Term:
        self.lx.next()  # let
        kind, text, pos = self.lx.peek()
        if kind == "*":
            self.lx.next()
            self.lx.expect("=")
            scrut = self.parse_term_until_in()
            self._expect_kw("in")
            return LetStar(scrut, self.parse_term())
        _, v1, p1 = self.lx.expect("ident")
        if not self.lx.at_tensor_marker():
            tok = self.lx.peek()
            raise ParseError(f"expected '(x)' in pair pattern, found {tok[1]!r}", tok[2])
        self.lx.eat_tensor_marker()
        _, v2, p2 = self.lx.expect("ident")
        for name, p in ((v1, p1), (v2, p2)):
            if name in self.registry:
                raise ParseError(f"{name!r} is a registered symbol, not a variable", p)
        self.lx.expect("=")
        scrut = self.parse_term_until_in()
        self._expect_kw("in")
        return LetPair(v1, v2, scrut, self.parse_term())

    def parse_term_until_in(self) -> Term:
        # 'in' is a plain identifier; the term grammar never produces a bare
        # 'in' in application position, so parse greedily and stop on it.
        return self.parse_term()

    def _expect_kw(self, word: str):
        kind, text, pos = self.lx.next()
        if kind != "ident" or text != word:
            raise ParseError(f"expected {word!r}, found {text!r}", pos)

    def _parse_tensor(self) -> Term:
        t = self._parse_app()
        while self.lx.peek()[0] == "*":
            # '*' in infix position is tensor; in atom position it is unit.
            self.lx.next()
            t = Pair(t, self._parse_app())
        return t

    def _parse_app(self) -> Term:
        head_pos = self.lx.peek()[2]
        head = self._parse_atom()
        args = []
        while self._starts_atom():
            args.append(self._parse_atom())
        if args and isinstance(head, (Const, Star)):
            raise ParseError("a constant cannot be applied", head_pos)
        for a in args:
            head = App(head, a)
        return head

    def _starts_atom(self) -> bool:
        kind, text, _ = self.lx.peek()
        if kind in ("num", "(", "[-]", "\\"):
            return True
        if kind == "ident":
            return text != "in"
        return False

    def _parse_atom(self) -> Term:
        kind, text, pos = self.lx.next()
        if kind == "num":
            return Const(float(text))
        if kind == "*":
            return STAR
        if kind == "[-]":
            return HOLE
        if kind == "\\":
            self.lx.idx -= 1
            return self.parse_term()
        if kind == "(":
            t = self.parse_term()
            self.lx.expect(")")
            return t
        if kind == "ident":
            if text in ("let", "in"):
                raise ParseError(f"unexpected keyword {text!r}", pos)
            nxt = self.lx.peek()
            attached_call = nxt[0] == "(" and nxt[2] == pos + len(text)
            if attached_call:
                if text not in self.registry:
                    raise ParseError(f"unknown symbol name {text!r}", pos)
                self.lx.next()
                args = [self.parse_term()]
                while self.lx.peek()[0] == ",":
                    self.lx.next()
                    args.append(self.parse_term())
                self.lx.expect(")")
                sym = self.registry.get(text)
                if len(args) != sym.arity:
                    raise ParseError(
                        f"symbol {text!r} has arity {sym.arity}, got {len(args)} arguments", pos
                    )
                return FnApp(text, tuple(args))
            if text in self.registry:
                raise ParseError(f"registered symbol {text!r} must be applied as {text}(...)", pos)
            return Var(text)
        raise ParseError(f"unexpected token {text!r}", pos)


def parse_term(text: str, registry: Optional[SymbolRegistry] = None) -> Term:
    registry = registry if registry is not None else default_registry()
    p = _Parser(text, registry)
    t = p.parse_term()
    kind, text_, pos = p.lx.peek()
    if kind != "eof":
        raise ParseError(f"trailing input {text_!r}", pos)
    return t


def parse_type(text: str) -> Ty:
    p = _Parser(text, SymbolRegistry())
    t = p.parse_type()
    kind, text_, pos = p.lx.peek()
    if kind != "eof":
        raise ParseError(f"trailing input {text_!r}", pos)
    return t


def parse_env(text: str) -> Env:
    """Environment syntax: 'x:R -o R, y:R' (comma separated, ordered)."""
    text = text.strip()
    if not text:
        return EMPTY_ENV
    bindings = []
    for part in text.split(","):
        if ":" not in part:
            raise ParseError(f"bad environment entry {part!r}", 0)
        name, ty = part.split(":", 1)
        bindings.append((name.strip(), parse_type(ty.strip())))
    return Env(tuple(bindings))


# ---------------------------------------------------------------------------
# Printing


def print_term(t: Term) -> str:
    return _print(t, 0)


def _print(t: Term, prec: int) -> str:
    # prec: 0 = top, 1 = tensor operand, 2 = application head/argument
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return repr(t.value)
    if isinstance(t, Star):
        return "(*)" if prec >= 3 else "*"  # in argument position * reads as tensor
    if isinstance(t, Hole):
        return "[-]"
    if isinstance(t, FnApp):
        return f"{t.symbol}({', '.join(_print(a, 0) for a in t.args)})"
    if isinstance(t, App):
        s = f"{_print(t.fn, 2)} {_print(t.arg, 3)}"
        return f"({s})" if prec >= 3 else s
    if isinstance(t, Lam):
        ann = print_type(t.ann)
        if not isinstance(t.ann, (TReal, TUnit)):
            ann = f"({ann})"
        s = f"\\{t.var}:{ann}. {_print(t.body, 0)}"
        return f"({s})" if prec >= 1 else s
    if isinstance(t, Pair):
        s = f"{_print(t.left, 1)} * {_print(t.right, 2)}"
        return f"({s})" if prec >= 2 else s
    if isinstance(t, LetStar):
        s = f"let * = {_print(t.scrutinee, 0)} in {_print(t.body, 0)}"
        return f"({s})" if prec >= 1 else s
    if isinstance(t, LetPair):
        s = f"let {t.var1} (x) {t.var2} = {_print(t.scrutinee, 0)} in {_print(t.body, 0)}"
        return f"({s})" if prec >= 1 else s
    raise AssertionError(t)


# ---------------------------------------------------------------------------
# Typechecking

@dataclass(frozen=True)
class Derivation:
    """Records how each two-premise node split its environment."""

    term: Term
    env: Env
    ty: Ty
    splits: tuple[tuple[tuple[str, ...], ...], ...] = ()
    children: tuple["Derivation", ...] = ()


class _Checker:
    def __init__(self, registry: SymbolRegistry, hole: Optional[tuple[Env, Ty]] = None):
        self.registry = registry
        self.hole = hole

    def check(self, env: Env, t: Term) -> Derivation:
        fv = self._needed(t)
        missing = fv - set(env.names())
        if missing:
            raise TypeError_(f"unbound variable(s): {sorted(missing)}")
        unused = set(env.names()) - fv
        if unused:
            raise TypeError_(f"unused variable(s): {sorted(unused)} (linearity violation)")
        return self._check(env, t)

    def _needed(self, t: Term) -> set[str]:
        """Free variables, with duplicate-use detection along the way."""
        if isinstance(t, Var):
            return {t.name}
        if isinstance(t, (Const, Star)):
            return set()
        if isinstance(t, Hole):
            if self.hole is None:
                raise TypeError_("hole in a plain term")
            return set(self.hole[0].names())
        if isinstance(t, Lam):
            inner = self._needed(t.body)
            if t.var not in inner:
                raise TypeError_(f"bound variable {t.var!r} unused (linearity violation)")
            return inner - {t.var}
        if isinstance(t, LetPair):
            inner = self._needed(t.body)
            for v in (t.var1, t.var2):
                if v not in inner:
                    raise TypeError_(f"bound variable {v!r} unused (linearity violation)")
            parts = [self._needed(t.scrutinee), inner - {t.var1, t.var2}]
        elif isinstance(t, FnApp):
            parts = [self._needed(a) for a in t.args]
        else:
            parts = [self._needed(c) for c in children(t)]
        out: set[str] = set()
        for p in parts:
            dup = out & p
            if dup:
                raise TypeError_(f"variable(s) used twice: {sorted(dup)} (linearity violation)")
            out |= p
        return out

    def _split(self, env: Env, *needed: set[str]) -> tuple[Env, ...]:
        return tuple(env.restrict(n) for n in needed)

    def _check(self, env: Env, t: Term) -> Derivation:
        if isinstance(t, Var):
            if len(env) != 1 or env.bindings[0][0] != t.name:
                raise TypeError_(f"variable {t.name!r}: environment must be exactly its binding")
            return Derivation(t, env, env.bindings[0][1])
        if isinstance(t, Const):
            if len(env) != 0:
                raise TypeError_("constant in a non-empty environment")
            return Derivation(t, env, R)
        if isinstance(t, Star):
            if len(env) != 0:
                raise TypeError_("unit in a non-empty environment")
            return Derivation(t, env, I)
        if isinstance(t, Hole):
            henv, hty = self.hole  # type: ignore[misc]
            if env.bindings != henv.bindings:
                raise TypeError_(
                    f"hole expects environment {list(henv.bindings)}, got {list(env.bindings)}"
                )
            return Derivation(t, env, hty)
        if isinstance(t, FnApp):
            sym = self.registry.get(t.symbol)
            if len(t.args) != sym.arity:
                raise TypeError_(f"symbol {t.symbol!r} has arity {sym.arity}, got {len(t.args)}")
            needed = [free_or_hole(a, self.hole) for a in t.args]
            envs = self._split(env, *needed)
            subs = []
            for a, e in zip(t.args, envs):
                d = self._check(e, a)
                if d.ty != R:
                    raise TypeError_(f"argument of {t.symbol!r} must be R, got {print_type(d.ty)}")
                subs.append(d)
            return Derivation(t, env, R, (tuple(e.names() for e in envs),), tuple(subs))
        if isinstance(t, App):
            nf, na = free_or_hole(t.fn, self.hole), free_or_hole(t.arg, self.hole)
            ef, ea = self._split(env, nf, na)
            df = self._check(ef, t.fn)
            if not isinstance(df.ty, TLolli):
                raise TypeError_(f"application head has type {print_type(df.ty)}, not a function")
            da = self._check(ea, t.arg)
            if da.ty != df.ty.arg:
                raise TypeError_(
                    f"argument type {print_type(da.ty)} does not match {print_type(df.ty.arg)}"
                )
            return Derivation(t, env, df.ty.res, ((ef.names(), ea.names()),), (df, da))
        if isinstance(t, Lam):
            inner = env.extend(t.var, t.ann)
            db = self._check(inner, t.body)
            return Derivation(t, env, TLolli(t.ann, db.ty), (), (db,))
        if isinstance(t, Pair):
            nl, nr = free_or_hole(t.left, self.hole), free_or_hole(t.right, self.hole)
            el, er = self._split(env, nl, nr)
            dl = self._check(el, t.left)
            dr = self._check(er, t.right)
            return Derivation(t, env, TTensor(dl.ty, dr.ty), ((el.names(), er.names()),), (dl, dr))
        if isinstance(t, LetStar):
            ns = free_or_hole(t.scrutinee, self.hole)
            nb = free_or_hole(t.body, self.hole)
            es, eb = self._split(env, ns, nb)
            ds = self._check(es, t.scrutinee)
            if ds.ty != I:
                raise TypeError_(f"let * scrutinee must be I, got {print_type(ds.ty)}")
            db = self._check(eb, t.body)
            return Derivation(t, env, db.ty, ((es.names(), eb.names()),), (ds, db))
        if isinstance(t, LetPair):
            ns = free_or_hole(t.scrutinee, self.hole)
            nb = free_or_hole(t.body, self.hole) - {t.var1, t.var2}
            es, eb = self._split(env, ns, nb)
            ds = self._check(es, t.scrutinee)
            if not isinstance(ds.ty, TTensor):
                raise TypeError_(f"let (x) scrutinee must be a tensor, got {print_type(ds.ty)}")
            if t.var1 == t.var2:
                raise TypeError_(f"let (x) binds {t.var1!r} twice")
            inner = eb.extend(t.var1, ds.ty.left).extend(t.var2, ds.ty.right)
            db = self._check(inner, t.body)
            return Derivation(t, env, db.ty, ((es.names(), eb.names()),), (ds, db))
        raise AssertionError(t)


def free_or_hole(t: Term, hole: Optional[tuple[Env, Ty]]) -> set[str]:
    fv = free_vars(t)
    if hole is not None and hole_count(t) > 0:
        fv |= set(hole[0].names())
    return fv


def typecheck(env: Env, term: Term, registry: Optional[SymbolRegistry] = None) -> Ty:
    """Returns the unique type of ``term`` under ``env`` or raises TypeError_."""
    return derive(env, term, registry).ty


def derive(env: Env, term: Term, registry: Optional[SymbolRegistry] = None) -> Derivation:
    registry = registry if registry is not None else default_registry()
    return _Checker(registry).check(env, term)


def check_context(
    ctx: Context,
    src: tuple[Env, Ty],
    dst: tuple[Env, Ty],
    registry: Optional[SymbolRegistry] = None,
) -> bool:
    """True iff plugging any src-typed term yields a dst-typed term.

    The hole is checked as an opaque leaf that consumes exactly the source
    environment.
    """
    registry = registry if registry is not None else default_registry()
    if hole_count(ctx) != 1:
        return False
    checker = _Checker(registry, hole=src)
    try:
        d = checker.check(dst[0], ctx)
    except LinError:
        return False
    return d.ty == dst[1]
