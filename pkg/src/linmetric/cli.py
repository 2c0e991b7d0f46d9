"""Command-line frontend.

Exit codes: 0 success, 1 user error (parse/type/configuration), 2
internal invariant violation (ordering-chain break, non-monotone trace).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from .core import (
    EMPTY_ENV,
    LinError,
    SymbolRegistry,
    default_registry,
    parse_env,
    parse_term,
    print_term,
    print_type,
    typecheck,
)
from .dynamics import beta_normalize, evaluate, is_beta_normal
from .metrics import (
    EngineConfig,
    ObsBudget,
    admissibility_suite,
    den_engine,
    equ_upper_bound,
    obs_lower_bound,
    ordering_report,
    qderivation_to_dict,
)
from .semden import ProbeBattery
from .semint import (
    ModelError,
    decompose,
    export_diagram,
    format_int_term,
    int_distance,
    interp_int,
    reset_trace_stats,
    trace_stats,
    wire_signature,
)
from . import gen

USER_ERROR = 1
INTERNAL_ERROR = 2


def _enc(x):
    import math

    return "inf" if x == math.inf else x


def load_registry(args) -> SymbolRegistry:
    path = getattr(args, "symbols", None) or os.environ.get("LINMETRIC_SYMBOLS")
    if path:
        return SymbolRegistry.from_file(path)
    return default_registry()


def read_term_file(path: str, registry: SymbolRegistry):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_term(fh.read(), registry)


def cmd_typecheck(args) -> int:
    registry = load_registry(args)
    env = parse_env(args.env) if args.env else EMPTY_ENV
    term = read_term_file(args.file, registry)
    ty = typecheck(env, term, registry)
    print(print_type(ty))
    return 0


def cmd_eval(args) -> int:
    registry = load_registry(args)
    term = read_term_file(args.file, registry)
    typecheck(EMPTY_ENV, term, registry)
    print(print_term(evaluate(term, registry)))
    return 0


def cmd_normalize(args) -> int:
    registry = load_registry(args)
    env = parse_env(args.env) if args.env else EMPTY_ENV
    term = read_term_file(args.file, registry)
    typecheck(env, term, registry)
    print(print_term(beta_normalize(term)))
    return 0


def cmd_dist(args) -> int:
    registry = load_registry(args)
    env = parse_env(args.env) if args.env else EMPTY_ENV
    m = read_term_file(args.file_m, registry)
    n = read_term_file(args.file_n, registry)
    ty = typecheck(env, m, registry)
    ty_n = typecheck(env, n, registry)
    if ty != ty_n:
        raise LinError(
            f"terms have different types: {print_type(ty)} vs {print_type(ty_n)}"
        )
    cfg = EngineConfig(
        registry=registry,
        battery=ProbeBattery(registry, seed=args.seed),
        budget=ObsBudget(max_contexts=args.budget),
    )
    exit_code = 0
    if args.metric == "all":
        report = ordering_report(env, ty, m, n, cfg)
        if not report["chain_ok"]:
            exit_code = INTERNAL_ERROR
    elif args.metric == "obs":
        lo, witness = obs_lower_bound(env, ty, m, n, cfg.budget, registry)
        report = {"obs": {"lo": _enc(lo), "witness": witness.to_dict()}}
    elif args.metric == "den":
        d = den_engine(env, ty, m, n, cfg)
        report = {"den": {"lo": _enc(d.lo), "hi": _enc(d.hi)}}
    elif args.metric == "int":
        d = int_distance(env, ty, m, n, cfg.battery, registry=registry)
        report = {"int": {"lo": _enc(d.lo), "hi": _enc(d.hi), "normalized": d.normalized}}
    else:  # equ
        hi, cert = equ_upper_bound(env, ty, m, n, registry)
        report = {
            "equ": {
                "hi": _enc(hi),
                "certificate": qderivation_to_dict(cert) if cert is not None else None,
            }
        }
    if args.json:
        print(json.dumps(report, sort_keys=True))
    else:
        print(json.dumps(report, sort_keys=True, indent=2))
    return exit_code


def cmd_wires(args) -> int:
    registry = load_registry(args)
    env = parse_env(args.env) if args.env else EMPTY_ENV
    term = read_term_file(args.file, registry)
    ty = typecheck(env, term, registry)
    if not is_beta_normal(term):
        term = beta_normalize(term)
        print("note: term was normalized before wire decomposition")
    hs, _ = decompose(env, term, registry)
    sig = wire_signature(env, ty)
    labels = {f"x{i + 1}": sig.in_labels[i] for i in range(sig.m)}
    print("  ".join(f"H{j + 1}={format_int_term(h, labels)}" for j, h in enumerate(hs)))
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(export_diagram(env, term, registry))
    return 0


def _check_ordering(args) -> tuple[int, str]:
    registry = gen.corpus_registry()
    cfg = EngineConfig(
        registry=registry,
        battery=ProbeBattery(registry, seed=args.seed),
        budget=ObsBudget(values_per_type=3, max_contexts=60),
    )
    pairs = gen.typed_pair_corpus(args.seed, args.count, registry)
    ok = 0
    for env, ty, m, n in pairs:
        report = ordering_report(env, ty, m, n, cfg)
        if report["chain_ok"]:
            ok += 1
    line = f"{ok}/{len(pairs)} chain_ok"
    return (0 if ok == len(pairs) else INTERNAL_ERROR), line


def _check_trace(args) -> tuple[int, str]:
    from .semint import WireFunction, symmetry, trace

    rng = random.Random(args.seed)
    registry = gen.corpus_registry()
    reset_trace_stats()
    failures = 0
    count = args.count
    for _ in range(count):
        wf = gen.random_wire_function(rng, 2, 2, registry)
        tr = trace(wf, 1)
        # naturality in the forward input: tr(f o (g (x) id)) = tr(f) o g
        pre = WireFunction(("R", "R"), ("R", "R"), lambda i, _w=wf: _w((i[0] - 1.0, i[1])))
        for x in (-1.0, 0.0, 2.5):
            if trace(pre, 1)((x,)) != tr((x - 1.0,)):
                failures += 1
        # yanking: tracing a crossing is the identity
        v = rng.uniform(-5, 5)
        if trace(symmetry(("R", "R"), 1), 1)((v,)) != (v,):
            failures += 1
    line = (
        f"trace: {count} functions, yanking+naturality, failures={failures}, "
        f"max_iterations={trace_stats['max_iterations']}"
    )
    return (0 if failures == 0 else INTERNAL_ERROR), line


def _check_decompose(args) -> tuple[int, str]:
    registry = gen.corpus_registry()
    rng = random.Random(args.seed)
    corpus = gen.beta_normal_corpus(args.seed, args.count, registry=registry)
    from .semden import UNIT
    from .semint import int_term_denotation

    failures = 0
    for env, ty, term in corpus:
        hs, _ = decompose(env, term, registry)
        wf = interp_int(env, term, registry)
        sig = wire_signature(env, ty)
        for _ in range(50):
            ins = tuple(UNIT if t == "I" else rng.uniform(-20, 20) for t in sig.in_types)
            got = wf(ins)
            assign = {f"x{i + 1}": v for i, v in enumerate(ins)}
            want = tuple(int_term_denotation(h, assign, registry) for h in hs)
            for a, b in zip(got, want):
                if a is UNIT or b is UNIT:
                    if a is not b:
                        failures += 1
                elif abs(a - b) > 1e-9:
                    failures += 1
    line = f"decompose: {len(corpus)} terms x 50 probes, mismatches={failures}"
    return (0 if failures == 0 else INTERNAL_ERROR), line


def _check_admissibility(args) -> tuple[int, str]:
    registry = gen.corpus_registry()
    cfg = EngineConfig(
        registry=registry,
        battery=ProbeBattery(registry, seed=args.seed),
        budget=ObsBudget(values_per_type=3, max_contexts=60),
    )
    corpus = gen.admissibility_corpus(args.seed, args.count, registry)
    lines = []
    bad = 0
    for engine in ("den", "int", "equ"):
        report = admissibility_suite(engine, corpus, cfg)
        status = "pass" if report.ok else f"FAIL ({len(report.violations)} violations)"
        lines.append(f"{engine}: {report.checks} checks, {status}")
        bad += len(report.violations)
    return (0 if bad == 0 else INTERNAL_ERROR), "\n".join(lines)


def cmd_check(args) -> int:
    runner = {
        "ordering": _check_ordering,
        "trace": _check_trace,
        "decompose": _check_decompose,
        "admissibility": _check_admissibility,
    }[args.suite]
    code, line = runner(args)
    print(line)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linmetric", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--symbols", help="registry config JSON (or env LINMETRIC_SYMBOLS)")
        sp.add_argument("--env", help='environment, e.g. "k:R -o I, x:R"')

    sp = sub.add_parser("typecheck", help="print the type of a term file")
    sp.add_argument("file")
    common(sp)
    sp.set_defaults(fn=cmd_typecheck)

    sp = sub.add_parser("eval", help="evaluate a closed term file")
    sp.add_argument("file")
    sp.add_argument("--symbols")
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("normalize", help="print the beta-normal form")
    sp.add_argument("file")
    common(sp)
    sp.set_defaults(fn=cmd_normalize)

    sp = sub.add_parser("dist", help="distance report for two term files")
    sp.add_argument("file_m")
    sp.add_argument("file_n")
    common(sp)
    sp.add_argument("--metric", choices=["obs", "den", "int", "equ", "all"], default="all")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--budget", type=int, default=300, help="max observing contexts")
    sp.add_argument("--json", action="store_true", help="compact single-line JSON")
    sp.set_defaults(fn=cmd_dist)

    sp = sub.add_parser("wires", help="wire decomposition of a beta-normal term")
    sp.add_argument("file")
    common(sp)
    sp.add_argument("--dot", help="write a Graphviz diagram to this path")
    sp.set_defaults(fn=cmd_wires)

    sp = sub.add_parser("check", help="run a property suite")
    sp.add_argument(
        "--suite",
        choices=["admissibility", "ordering", "trace", "decompose"],
        required=True,
    )
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=100)
    sp.set_defaults(fn=cmd_check)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ModelError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return INTERNAL_ERROR
    except (LinError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USER_ERROR


if __name__ == "__main__":
    sys.exit(main())
