"""Command-line front end tying the library into reproducible experiments.

Every report-producing verb emits a self-describing document: the parsed
configuration, the content hashes of the input artifacts, the design
decisions in force, and the results.  Paths never enter the document, so
the same inputs produce byte-identical reports from any working directory.

Exit codes: 0 success, 2 parameter/validation/parse problem, 3 a verified
assertion failed (a sandwich or bound violation, a failed suite criterion).
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .chaining import (
    EXHAUSTIVE_MAX_POINTS,
    build_partition_greedy,
    chain_bound,
    exhaustive_gamma,
    verify_sup_bound,
)
from .contraction import CoordinateMap, apply_map, check_condition, compare_suprema, fit_min_C
from .core import (
    EXACT_ENUMERATION_MAX_DIM,
    ProcessKind,
    Seed,
    SetKind,
    generate_set,
    load_set,
    save_set,
)
from .decomposition import decompose_by_sweep, verify_two_sided
from .errors import ParameterError, ParseError, ProcsupError
from .moments import (
    MomentModel,
    bernoulli_norm_exact,
    bernoulli_norm_proxy,
    gaussian_norm_exact,
)
from .oleszkiewicz import (
    NormKind,
    VectorSystem,
    generate_functionals,
    load_vector_system,
    strong_moment_ratio,
    weak_moment_constant,
    check_weak_contraction,
)
from .reports import build_report, safe_ratio, to_csv, to_json
from .suprema import brute_force_bernoulli_sup, mc_sup

_REL_SLACK = 1e-9

# Friendly aliases accepted by `gen --kind` on top of the canonical names.
_KIND_ALIASES = {
    "sphere": SetKind.RANDOM_SPHERE,
    "simplex": SetKind.SIMPLEX_VERTICES,
    "ellipsoid": SetKind.ELLIPSOID_SAMPLE,
    "cube": SetKind.CUBE_VERTICES,
    "blocks": SetKind.DISJOINT_BLOCKS,
}


def _kind_choices() -> list[str]:
    return sorted({k.value for k in SetKind} | set(_KIND_ALIASES))


def _resolve_set_kind(name: str) -> SetKind:
    return _KIND_ALIASES.get(name) or SetKind(name)


def _emit(doc: dict, args: argparse.Namespace) -> None:
    text = to_csv(doc) if args.format == "csv" else to_json(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _stamp(args: argparse.Namespace) -> str | None:
    if args.stamp is None:
        return None
    if args.stamp == "now":
        return datetime.now(timezone.utc).isoformat()
    return args.stamp


def _report(args: argparse.Namespace, command: str, config: dict, inputs: dict, results) -> dict:
    return build_report(command, config, inputs, results, stamp=_stamp(args))


def cmd_gen(args: argparse.Namespace) -> int:
    kind = _resolve_set_kind(args.kind)
    ts = generate_set(kind, args.dim, args.count, Seed(args.seed), tuple(args.params))
    save_set(ts, args.out)
    print(f"wrote {args.out}: {ts.name} ({len(ts)} points, dim {ts.dim}, hash {ts.content_hash()[:12]})")
    return 0


def cmd_moments(args: argparse.Namespace) -> int:
    """Per-point moment decompositions, with the sandwich asserted when exact."""
    ts = load_set(args.set)
    enumerable = ts.dim <= EXACT_ENUMERATION_MAX_DIM
    rows = []
    violations = 0
    for i, t in enumerate(ts.points):
        for p in args.p:
            dec = bernoulli_norm_proxy(t, p)
            row = {
                "point": i,
                "p": p,
                "ell1_part": dec.ell1,
                "tail_l2": dec.tail,
                "proxy": dec.value,
                "gaussian_exact": gaussian_norm_exact(t, p),
            }
            if enumerable:
                exact = bernoulli_norm_exact(t, p)
                ratio = safe_ratio(dec.value, exact)
                row["bernoulli_exact"] = exact
                row["sandwich_ratio"] = ratio
                if exact > 0 and not (1.0 - _REL_SLACK) <= ratio <= 4.0 * (1.0 + _REL_SLACK):
                    violations += 1
            rows.append(row)
    results = {
        "set": ts.name,
        "rows": rows,
        "sandwich": {"checked": enumerable, "violations": violations},
    }
    config = {"p": list(args.p), "format": args.format}
    doc = _report(args, "moments", config, {"set": ts.content_hash()}, results)
    _emit(doc, args)
    return 3 if violations else 0


def cmd_sup(args: argparse.Namespace) -> int:
    ts = load_set(args.set)
    kind = ProcessKind(args.kind)
    if kind is ProcessKind.GAUSSIAN:
        if args.exact:
            raise ParameterError("no exact supremum oracle for the Gaussian process")
        est = mc_sup(kind, ts, args.samples, Seed(args.seed))
    elif args.exact or ts.dim <= EXACT_ENUMERATION_MAX_DIM:
        est = brute_force_bernoulli_sup(ts)
    else:
        est = mc_sup(kind, ts, args.samples, Seed(args.seed))
    results = {
        "set": ts.name,
        "dim": ts.dim,
        "points": len(ts),
        "value": est.value,
        "stderr": est.stderr,
        "method": est.method.value,
        "samples": est.samples,
    }
    config = {
        "kind": kind.value,
        "exact": bool(args.exact),
        "samples": args.samples,
        "seed": args.seed,
        "format": args.format,
    }
    doc = _report(args, "sup", config, {"set": ts.content_hash()}, results)
    _emit(doc, args)
    return 0


def _model_from_args(args: argparse.Namespace) -> MomentModel:
    if args.model == "monte-carlo":
        return MomentModel.monte_carlo(ProcessKind(args.process), args.samples, Seed(args.seed))
    return {
        "bernoulli-proxy": MomentModel.bernoulli_proxy,
        "bernoulli-exact": MomentModel.bernoulli_exact,
        "gaussian-exact": MomentModel.gaussian_exact,
    }[args.model]()


def cmd_gamma(args: argparse.Namespace) -> int:
    """Chaining functional of a set: greedy tree by default, exhaustive on request."""
    ts = load_set(args.set)
    model = _model_from_args(args)
    if args.exhaustive:
        if len(ts) > EXHAUSTIVE_MAX_POINTS:
            raise ParameterError(
                f"exhaustive search handles at most {EXHAUSTIVE_MAX_POINTS} points, got {len(ts)}"
            )
        bound = exhaustive_gamma(ts, model)
        method = "exhaustive"
    else:
        bound = chain_bound(ts, build_partition_greedy(ts), model)
        method = "greedy"
    results = {
        "set": ts.name,
        "method": method,
        "model": model.label,
        "value": bound.value,
        "per_point": list(bound.per_point),
        "tree": bound.tree.to_dict(),
    }
    config = {
        "model": args.model,
        "exhaustive": bool(args.exhaustive),
        "process": args.process,
        "samples": args.samples,
        "seed": args.seed,
        "format": args.format,
    }
    doc = _report(args, "gamma", config, {"set": ts.content_hash()}, results)
    _emit(doc, args)
    return 0


def cmd_verify_t2(args: argparse.Namespace) -> int:
    ts = load_set(args.set)
    kind = ProcessKind(args.kind)
    report = verify_sup_bound(
        ts, kind, samples=args.samples, seed=Seed(args.seed), exact=True if args.exact else None
    )
    config = {
        "kind": kind.value,
        "exact": bool(args.exact),
        "samples": args.samples,
        "seed": args.seed,
        "format": args.format,
    }
    doc = _report(args, "verify-t2", config, {"set": ts.content_hash()}, report.to_dict())
    _emit(doc, args)
    return 3 if report.violation else 0


def cmd_contract(args: argparse.Namespace) -> int:
    """Map a set coordinatewise, fit the contraction constant, compare suprema."""
    ts = load_set(args.source)
    cmap = CoordinateMap(args.map, tuple(args.map_params))
    pair = apply_map(ts, cmap)
    p_max = args.p_max if args.p_max is not None else ts.dim
    fit = fit_min_C(pair, p_max=p_max, tol=args.tol)
    suprema = compare_suprema(pair, samples=args.samples, seed=Seed(args.seed))
    results = {
        "source": ts.name,
        "image_points": len(pair.image),
        "fit": fit.to_dict(),
        "suprema": suprema.to_dict(),
    }
    code = 0
    if args.check_at is not None:
        check = check_condition(pair, args.check_at, p_max)
        results["check"] = {
            "c": args.check_at,
            "satisfied": check.satisfied,
            "margin": check.margin,
            "worst_pair": list(check.worst_pair),
        }
        if not check.satisfied:
            code = 3
    config = {
        "map": cmap.label,
        "p_max": p_max,
        "tol": args.tol,
        "check_at": args.check_at,
        "samples": args.samples,
        "seed": args.seed,
        "format": args.format,
    }
    doc = _report(args, "contract", config, {"source": ts.content_hash()}, results)
    _emit(doc, args)
    return code


def cmd_decompose(args: argparse.Namespace) -> int:
    ts = load_set(args.set)
    kind = ProcessKind(args.kind)
    result = decompose_by_sweep(
        ts,
        kind,
        samples=args.samples,
        seed=Seed(args.seed),
        per_point=args.per_point,
        k_constant=args.k,
    )
    two_sided = verify_two_sided(ts, result)
    results = {
        "set": ts.name,
        "decomposition": result.to_dict(),
        "two_sided": two_sided.to_dict(),
    }
    config = {
        "kind": kind.value,
        "samples": args.samples,
        "seed": args.seed,
        "per_point": bool(args.per_point),
        "k": args.k,
        "format": args.format,
    }
    doc = _report(args, "decompose", config, {"set": ts.content_hash()}, results)
    _emit(doc, args)
    return 0


def _load_system(path: str, norm: NormKind) -> VectorSystem:
    """Read a vector system, accepting a plain finite-set file as the terms.

    A set file carries no ambient norm, so the caller's ``--norm`` choice
    fills it in; real vector-system files keep their own tag.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ParseError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if isinstance(doc, dict) and doc.get("format") == "vector-system":
        return load_vector_system(path)
    ts = load_set(path)
    return VectorSystem(name=ts.name, vectors=ts.points, norm=norm)


def cmd_oleszkiewicz(args: argparse.Namespace) -> int:
    """Weak/strong moment comparison of two vector systems under one norm."""
    norm = NormKind(args.norm)
    x_sys = _load_system(args.x, norm)
    y_sys = _load_system(args.y, norm)
    funcs = generate_functionals(x_sys.norm, x_sys.dim, args.extra_functionals, Seed(args.seed))
    weak = weak_moment_constant(x_sys, y_sys, funcs, p_max=args.p_max)
    contraction = check_weak_contraction(x_sys, y_sys, funcs, p_max=args.p_max, tol=args.tol)
    strong = strong_moment_ratio(x_sys, y_sys, samples=args.samples, seed=Seed(args.seed))
    results = {
        "x": x_sys.name,
        "y": y_sys.name,
        "norm": x_sys.norm.value,
        "functionals": len(funcs),
        "weak": weak.to_dict(),
        "contraction": contraction.to_dict(),
        "strong": strong.to_dict(),
        "strong_over_weak": safe_ratio(strong.ratio, weak.value),
    }
    config = {
        "norm": norm.value,
        "extra_functionals": args.extra_functionals,
        "p_max": args.p_max,
        "tol": args.tol,
        "samples": args.samples,
        "seed": args.seed,
        "format": args.format,
    }
    inputs = {"x": x_sys.content_hash(), "y": y_sys.content_hash()}
    doc = _report(args, "oleszkiewicz", config, inputs, results)
    _emit(doc, args)
    return 0


def _sanitize_details(details: dict) -> dict:
    # Wall-clock figures measure the machine, not the inputs; dropping them
    # keeps suite reports byte-stable run to run.
    return {k: v for k, v in details.items() if k != "runtime_s"}


def cmd_suite(args: argparse.Namespace) -> int:
    from . import acceptance

    if args.only:
        unknown = sorted(set(args.only) - {i + 1 for i in range(len(acceptance.ALL_CRITERIA))})
        if unknown:
            raise ParameterError(f"no such criterion: {unknown}")
        criteria = [acceptance.ALL_CRITERIA[i - 1] for i in sorted(set(args.only))]
    else:
        criteria = list(acceptance.ALL_CRITERIA)
    results = []
    for criterion in criteria:
        outcome = criterion(args.seed)
        print(outcome.line)
        entry = outcome.to_dict()
        entry["details"] = _sanitize_details(entry.get("details", {}))
        results.append(entry)
    passed = all(r["passed"] for r in results)
    config = {"seed": args.seed, "only": sorted(set(args.only)) if args.only else None,
              "format": args.format}
    doc = _report(args, "suite", config, {}, {"criteria": results, "all_passed": passed})
    if args.out:
        _emit(doc, args)
    print(f"{sum(r['passed'] for r in results)}/{len(results)} criteria passed")
    return 0 if passed else 3


def _add_report_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="PATH", help="write the report to this file instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="report serialization (default: json)")
    p.add_argument("--stamp", nargs="?", const="now", metavar="TEXT",
                   help="embed a run label; bare --stamp uses the current UTC time "
                        "(reports are byte-stable only without it)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="procsup",
        description="Suprema of canonical Bernoulli/Gaussian processes over finite sets: "
                    "bounds, decompositions, and verification harnesses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a named family of index sets")
    p.add_argument("--kind", required=True, choices=_kind_choices())
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--params", type=float, nargs="*", default=[],
                   help="extra generator parameters (radius, scale, axes, block size)")
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("moments", help="moment decompositions and the sandwich check")
    p.add_argument("--set", required=True, metavar="PATH")
    p.add_argument("--p", type=int, nargs="+", default=[1, 2, 4, 8],
                   help="moment orders (default: 1 2 4 8)")
    _add_report_flags(p)
    p.set_defaults(handler=cmd_moments)

    p = sub.add_parser("sup", help="expected supremum of the canonical process")
    p.add_argument("--set", required=True, metavar="PATH")
    p.add_argument("--kind", choices=("bernoulli", "gaussian"), default="bernoulli")
    p.add_argument("--exact", action="store_true",
                   help="force exact enumeration (Bernoulli only, dim <= "
                        f"{EXACT_ENUMERATION_MAX_DIM})")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    _add_report_flags(p)
    p.set_defaults(handler=cmd_sup)

    p = sub.add_parser("gamma", help="chaining functional via admissible partition trees")
    p.add_argument("--set", required=True, metavar="PATH")
    p.add_argument("--model",
                   choices=("bernoulli-proxy", "bernoulli-exact", "gaussian-exact", "monte-carlo"),
                   default="gaussian-exact")
    p.add_argument("--exhaustive", action="store_true",
                   help=f"search all admissible trees (at most {EXHAUSTIVE_MAX_POINTS} points)")
    p.add_argument("--process", choices=("bernoulli", "gaussian"), default="bernoulli",
                   help="process for the monte-carlo model")
    p.add_argument("--samples", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=0)
    _add_report_flags(p)
    p.set_defaults(handler=cmd_gamma)

    p = sub.add_parser("verify-t2", help="check E sup <= 4 x chain bound on one set")
    p.add_argument("--set", required=True, metavar="PATH")
    p.add_argument("--kind", choices=("bernoulli", "gaussian"), default="bernoulli")
    p.add_argument("--exact", action="store_true", help="force the exact supremum route")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    _add_report_flags(p)
    p.set_defaults(handler=cmd_verify_t2)

    p = sub.add_parser("contract", help="coordinatewise maps: fit C and compare suprema")
    p.add_argument("--source", required=True, metavar="PATH")
    p.add_argument("--map", required=True, choices=("scale", "clamp", "abs", "soft_threshold"))
    p.add_argument("--map-params", type=float, nargs="*", default=[])
    p.add_argument("--p-max", type=int, default=None,
                   help="largest trim count checked (default: the dimension)")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--check-at", type=float, default=None, metavar="C",
                   help="also assert the condition at this constant (exit 3 if it fails)")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    _add_report_flags(p)
    p.set_defaults(handler=cmd_contract)

    p = sub.add_parser("decompose", help="best threshold split against the measured supremum")
    p.add_argument("--set", required=True, metavar="PATH")
    p.add_argument("--kind", choices=("bernoulli", "gaussian"), default="bernoulli")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--per-point", action="store_true",
                   help="refine the winning global threshold per point")
    p.add_argument("--k", type=float, default=1.0,
                   help="constant used by the moment-order selector (default: 1)")
    _add_report_flags(p)
    p.set_defaults(handler=cmd_decompose)

    p = sub.add_parser("oleszkiewicz", help="weak vs strong moment comparison of two systems")
    p.add_argument("--x", required=True, metavar="PATH",
                   help="vector-system file (or a finite-set file; --norm supplies the norm)")
    p.add_argument("--y", required=True, metavar="PATH")
    p.add_argument("--norm", choices=("sup", "euclidean"), default="sup")
    p.add_argument("--extra-functionals", type=int, default=8)
    p.add_argument("--p-max", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    _add_report_flags(p)
    p.set_defaults(handler=cmd_oleszkiewicz)

    p = sub.add_parser("suite", help="run the acceptance criteria")
    p.add_argument("--seed", type=int, default=20260815)
    p.add_argument("--only", type=int, nargs="*", default=None, metavar="N",
                   help="criterion numbers to run (default: all)")
    _add_report_flags(p)
    p.set_defaults(handler=cmd_suite)

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    """Parse and execute one invocation; the library's error taxonomy maps to exit 2."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except ProcsupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
