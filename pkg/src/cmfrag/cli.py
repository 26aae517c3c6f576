"""Command-line adapter over the library; no numerics live here."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import limits
from .cm import SimpleSamplingFailure, sample_cm, sample_simple
from .degseq import DegreeModel, is_feasible, moments, read_degree_file, realize
from .fragcat import enumerate_fragments, gamma, p_simple, pstar
from .harness import ExperimentSpec, run
from .kakeya import DEFAULT_EPS, analyze, threshold_report
from .multigraph import Fragment, count_cycles, extract_fragment

EXIT_OK, EXIT_INTERNAL, EXIT_VALIDATION = 0, 1, 2


class UsageError(ValueError):
    pass


def _input(args, need_sequence: bool):
    """Resolve ``--model`` / ``--degrees`` into a model and/or a sequence."""
    model = DegreeModel.from_json(args.model) if getattr(args, "model", None) else None
    seq = read_degree_file(args.degrees) if getattr(args, "degrees", None) else None
    if need_sequence and seq is None:
        if model is None:
            raise UsageError("need --degrees FILE or --model FILE with --n")
        if not getattr(args, "n", None):
            raise UsageError("--model needs --n to realize a degree sequence")
        seq = realize(model, args.n)
    return model, seq


def _require_seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for stochastic subcommands")
    return args.seed


def _emit(args, payload, text: str | None = None) -> None:
    """Write ``payload`` as JSON or CSV (or preformatted ``text``) to --out or stdout."""
    if text is None:
        if args.format == "csv":
            text = _to_csv(payload)
        else:
            text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _to_csv(payload) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = payload if isinstance(payload, list) else [payload]
    keys = sorted({k for r in rows for k in r})
    w.writerow(keys)
    for r in rows:
        w.writerow([json.dumps(r[k]) if isinstance(r.get(k), (dict, list)) else r.get(k, "") for k in keys])
    return buf.getvalue()


# --------------------------------------------------------------------------
# subcommands


def cmd_sample(args) -> None:
    _, d = _input(args, True)
    seed = _require_seed(args)
    if args.simple:
        if not is_feasible(d):
            raise UsageError("degree sequence is not graphical")
        res = sample_simple(d, seed, args.max_tries)
        G, attempts = res.graph, res.attempts
    else:
        G, attempts = sample_cm(d, seed), 1
    lines = G.edge_list_lines()
    if args.format == "json":
        edges = [list(map(int, s.split())) for s in lines]
        _emit(args, {"n": d.n, "m": d.half_edges, "seed": seed, "attempts": attempts, "edges": edges})
    else:
        head = f"# n={d.n} m={d.half_edges} seed={seed} attempts={attempts}\n"
        _emit(args, None, head + "".join(s + "\n" for s in lines))


def cmd_cycles(args) -> None:
    _, d = _input(args, True)
    seed = _require_seed(args)
    c = count_cycles(sample_cm(d, seed), args.K)
    _emit(args, {"n": d.n, "seed": seed, "counts": {str(k): v for k, v in c.as_dict().items()}})


def cmd_fragment(args) -> None:
    if args.code:
        model, _ = _input(args, False)
        if model is None:
            raise UsageError("--code needs --model")
        H = Fragment.from_code(args.code)
        out = {
            "code": H.code,
            "cycle_type": {str(k): v for k, v in H.cycle_type.items()},
            "aut": H.aut,
            "authe": H.authe,
            "gamma": gamma(H),
            "pstar": pstar(H, model),
        }
        if H.is_simple:
            out["psimple"] = p_simple(H, model)
        _emit(args, out)
        return
    _, d = _input(args, True)
    seed = _require_seed(args)
    H = extract_fragment(sample_cm(d, seed))
    _emit(args, {"code": H.code, "cycle_type": {str(k): v for k, v in H.cycle_type.items()}, "seed": seed})


def cmd_limits(args) -> None:
    if args.nu is not None:
        nu = args.nu
    else:
        model, d = _input(args, False)
        if model is not None:
            nu = float(model.nu)
        elif d is not None:
            nu = moments(d).nu_n
            if nu is None:
                raise UsageError("nu undefined for the all-zero sequence")
        else:
            raise UsageError("need --nu, --model or --degrees")
    out = {
        "nu": nu,
        "Q": limits.Q(nu),
        "p_acyc": limits.p_acyc(nu),
        "prob_simple": limits.prob_simple_limit(nu),
        "xi": {str(k): limits.xi(k, nu) for k in range(1, args.K + 1)},
    }
    if nu < 1:
        out["expected_total_cycles"] = limits.expected_total_cycles(nu)
    _emit(args, out)


def cmd_catalogue(args) -> None:
    model, _ = _input(args, False)
    if model is None:
        raise UsageError("catalogue needs --model")
    cat = enumerate_fragments(model, args.floor, args.variant)
    if args.format == "csv":
        _emit(args, [e.to_dict() for e in cat.entries])
    else:
        _emit(args, None, cat.to_jsonl())
    sys.stderr.write(json.dumps(cat.summary(), sort_keys=True) + "\n")


def cmd_kakeya(args) -> None:
    model, _ = _input(args, False)
    if model is None:
        raise UsageError("kakeya needs --model")
    nu = float(model.nu)
    if 0 < nu < 1:
        _emit(args, analyze(model, args.eps).to_dict())
    else:
        rep = threshold_report(model)
        rep["intervals"] = None
        _emit(args, rep)


def cmd_verify(args) -> None:
    spec = ExperimentSpec.from_json(args.spec)
    if args.seed is not None:
        spec.seed = args.seed
    if args.workers:
        spec.workers = args.workers
    rep = run(spec)
    _emit(args, None, rep.to_csv() if args.format == "csv" else rep.to_json() + "\n")


def cmd_nu0(args) -> None:
    v = limits.solve_nu0(args.tol)
    if args.format == "json":
        _emit(args, {"nu0": v, "Q": limits.Q(v), "tol": args.tol})
    else:
        _emit(args, None, f"{v:.7f}\n")


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmfrag", description="Configuration-model cycles, fragments and limit laws.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, inputs=True, default_format="json"):
        if inputs:
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--model", help="model JSON {'lambdas': {k: p}, 'truncation': K}")
            g.add_argument("--degrees", help="degree file: one integer per line, or JSON {'counts': {...}}")
        sp.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default=default_format)

    sp = sub.add_parser("sample", help="draw one configuration-model multigraph")
    common(sp, default_format="csv")
    sp.add_argument("--n", type=int, help="vertex count when realizing --model")
    sp.add_argument("--simple", action="store_true", help="reject until simple")
    sp.add_argument("--max-tries", type=int, default=10_000)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("cycles", help="cycle counts of one sample")
    common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--K", type=int, default=4)
    sp.set_defaults(func=cmd_cycles)

    sp = sub.add_parser("fragment", help="fragment of a sample, or probabilities of --code")
    common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--code", help="fragment code to evaluate under --model")
    sp.set_defaults(func=cmd_fragment)

    sp = sub.add_parser("limits", help="closed-form limit quantities")
    common(sp)
    sp.add_argument("--nu", type=float)
    sp.add_argument("--K", type=int, default=6)
    sp.set_defaults(func=cmd_limits)

    sp = sub.add_parser("catalogue", help="fragments above a probability floor (JSON lines)")
    common(sp)
    sp.add_argument("--floor", type=float, default=1e-6)
    sp.add_argument("--variant", choices=("pstar", "simple"), default="pstar")
    sp.set_defaults(func=cmd_catalogue)

    sp = sub.add_parser("kakeya", help="partial-sum set and threshold report")
    common(sp)
    sp.add_argument("--eps", type=float, default=DEFAULT_EPS)
    sp.set_defaults(func=cmd_kakeya)

    sp = sub.add_parser("verify", help="run an experiment spec")
    common(sp, inputs=False)
    sp.add_argument("--spec", required=True, help="experiment spec JSON")
    sp.add_argument("--workers", type=int, default=0)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("nu0", help="solve Q(nu) = 1/2")
    common(sp, inputs=False, default_format="csv")
    sp.add_argument("--tol", type=float, default=1e-7)
    sp.set_defaults(func=cmd_nu0)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_VALIDATION if e.code else EXIT_OK
    try:
        args.func(args)
    except (ValueError, SimpleSamplingFailure, FileNotFoundError, json.JSONDecodeError) as e:
        sys.stderr.write(json.dumps({"error": type(e).__name__, "message": str(e)}) + "\n")
        return EXIT_VALIDATION
    except Exception as e:  # noqa: BLE001
        sys.stderr.write(json.dumps({"error": "internal", "message": f"{type(e).__name__}: {e}"}) + "\n")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
