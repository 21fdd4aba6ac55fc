"""Command-line front end ``opv``.

Subcommands: ``compute`` evaluates an expression, ``check`` decides a
relation (catalog record or free text), ``fuzz`` runs a campaign and
``list`` prints the catalog.

Exit codes are a stable contract: 0 holds, 1 fails, 2 usage or input
error, 3 borderline.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import matfun as mf
from .bounds import DEFAULT_PAD
from .dsl import Evaluator, free_names, parse
from .dsl.ast import Relation, print_canonical
from .errors import OpvError
from .verify import campaign as cp
from .verify import catalog as cat

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_USAGE = 2
EXIT_BORDERLINE = 3

_VERDICT_EXIT = {
    mf.Verdict.HOLDS: EXIT_HOLDS,
    mf.Verdict.FAILS: EXIT_FAILS,
    mf.Verdict.BORDERLINE: EXIT_BORDERLINE,
}

# names computed from T and V when they are bound but the window is not
_WINDOW_NAMES = {"m", "M", "m2", "M2", "mid", "r", "s"}


class UsageError(Exception):
    pass


# argument parsing


def _dims(text: str) -> tuple:
    try:
        dims = tuple(int(d) for d in text.split(",") if d.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid dimension list {text!r}") from None
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError("dims must be a nonempty list of positive integers")
    return dims


def _nonnegative(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return n


def _positive(text: str) -> int:
    n = _nonnegative(text)
    if n == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="random seed (default: $OPV_SEED, else 42)")
    common.add_argument("--tol", type=float, default=mf.ATOL, help="absolute Loewner tolerance")
    common.add_argument("--rtol", type=float, default=mf.RTOL, help="relative Loewner tolerance")
    common.add_argument("--pad", type=float, default=DEFAULT_PAD, help="relative padding of the spectral window")
    common.add_argument("--kappa", type=float, default=mf.KAPPA_MAX, help="condition number guard")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", default=None, help="write the output to this file")

    inputs = argparse.ArgumentParser(add_help=False)
    inputs.add_argument("--bind", action="append", default=[], metavar="NAME=PATH",
                        help="bind NAME to the JSON value in PATH (repeatable)")
    inputs.add_argument("--random", action="store_true", help="bind every needed name to a seeded random instance")
    inputs.add_argument("--dim", type=_positive, default=3, help="dimension for --random")
    inputs.add_argument("--index", type=_nonnegative, default=0, help="trial index for --random")
    inputs.add_argument("--diagonal", action="store_true", help="diagonal random instances")
    inputs.add_argument("--nu", type=float, default=None, help="value bound to nu")
    inputs.add_argument("--t", type=float, default=None, help="value bound to t")

    parser = argparse.ArgumentParser(prog="opv", description="Operator perspective inequalities")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common, inputs], help="evaluate an expression")
    p.add_argument("text", nargs="?", help="expression (alternative to --expr)")
    p.add_argument("--expr", default=None)
    p.set_defaults(run=cmd_compute)

    p = sub.add_parser("check", parents=[common, inputs], help="decide a relation")
    p.add_argument("text", nargs="?", help="relation (alternative to --expr)")
    p.add_argument("--expr", default=None)
    p.add_argument("--ineq", default=None, help="catalog record id (write --ineq=-TQ for ids starting with '-')")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("fuzz", parents=[common], help="run a fuzz campaign")
    p.add_argument("--ineq", action="append", default=None,
                   help="record ids, comma separated or repeated (default: the whole catalog)")
    p.add_argument("--dims", type=_dims, default=cp.DEFAULT_DIMS)
    p.add_argument("--trials", type=_nonnegative, default=cp.DEFAULT_TRIALS)
    p.add_argument("--diagonal", action="store_true")
    p.add_argument("--workers", type=_positive, default=1)
    p.set_defaults(run=cmd_fuzz)

    p = sub.add_parser("list", help="list the inequality catalog")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", default=None)
    p.set_defaults(run=cmd_list)
    return parser


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    raw = os.environ.get("OPV_SEED")
    if raw is None or not raw.strip():
        return cp.DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"OPV_SEED must be an integer, got {raw!r}") from None


# bindings and environments


def load_value(path: str):
    """A bound value from a JSON file: matrix JSON, a number, or a tagged value."""
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if isinstance(obj, dict) and "entries" in obj:
        return mf.from_json(obj)
    if isinstance(obj, (dict, int, float)) and not isinstance(obj, bool):
        return cp.value_from_json(obj)
    raise UsageError(f"{path}: expected matrix JSON, a number or a tagged value")


def parse_bindings(items) -> dict:
    env = {}
    for item in items:
        name, sep, path = item.partition("=")
        if not sep or not name.isidentifier() or not path:
            raise UsageError(f"--bind expects NAME=PATH, got {item!r}")
        env[name] = load_value(path)
    return env


def _adhoc_record(text: str) -> cat.InequalityRecord:
    return cat.InequalityRecord("expr", (text,), "command line")


def build_env(args, rec: cat.InequalityRecord, seed: int):
    """Environment for ``rec`` from ``--bind`` or ``--random``: ``(env, instance or None)``."""
    if args.random and args.bind:
        raise UsageError("--random and --bind cannot be combined")
    inst = None
    if args.random:
        inst = cp.build_instance(rec, seed, args.dim, args.index, args.diagonal, args.pad)
        env = inst.env
    else:
        env = parse_bindings(args.bind)
        needed = set()
        for tree in rec.trees:
            needed |= free_names(tree)
        if "T" in env and "V" in env and (needed & _WINDOW_NAMES or rec.anchor):
            try:
                cp.add_window_names(env, rec.anchor, args.pad)
            except OpvError:
                pass  # the window needs an invertible V; unbound names are reported later
    if args.nu is not None:
        env["nu"] = args.nu
    if args.t is not None:
        env["t"] = args.t
    return env, inst


# rendering


def _real_if_close(a: np.ndarray) -> np.ndarray:
    return a.real if np.all(np.abs(a.imag) <= 1e-14 * max(1.0, float(np.max(np.abs(a))))) else a


def render_matrix(a: np.ndarray) -> str:
    body = np.array2string(_real_if_close(np.asarray(a)), precision=6, suppress_small=True, max_line_width=120)
    eigs = np.linalg.eigvalsh(mf.hermitian_part(a))
    return f"{body}\neigenvalues: {np.array2string(eigs, precision=6, max_line_width=120)}"


def render_verdict(v) -> str:
    return f"verdict: {v.verdict.value}  min_eig={v.min_eig:.6g}  tol={v.tol:.3g}  margin={v.margin:.6g}"


def emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2)


# commands


def _expr_text(args) -> str:
    if args.text and args.expr:
        raise UsageError("give the expression either positionally or with --expr, not both")
    text = args.text or args.expr
    if not text:
        raise UsageError("an expression is required")
    return text


def cmd_compute(args) -> int:
    text = _expr_text(args)
    tree = parse(text)
    if isinstance(tree, Relation):
        raise UsageError("compute takes an expression; use check for relations")
    env, inst = build_env(args, _adhoc_record(text), resolve_seed(args.seed))
    result = Evaluator(env, atol=args.tol, rtol=args.rtol, kappa_max=args.kappa).run(tree)
    canon = print_canonical(tree)
    if args.format == "json":
        out = {"expr": canon}
        if isinstance(result, np.ndarray):
            out["result"] = mf.to_json(result)
            out["eigenvalues"] = [float(w) for w in np.linalg.eigvalsh(result)]
        else:
            out["result"] = float(result)
        if inst is not None:
            out["instance"] = inst.to_json()
        emit(_dump(out), args.out)
    else:
        lines = [f"expr: {canon}"]
        if isinstance(result, np.ndarray):
            lines.append(render_matrix(result))
        else:
            lines.append(f"value: {result:.12g}")
        emit("\n".join(lines), args.out)
    return EXIT_HOLDS


def cmd_check(args) -> int:
    seed = resolve_seed(args.seed)
    if args.ineq is not None:
        if args.text or args.expr:
            raise UsageError("--ineq cannot be combined with an expression")
        rec = cat.get_record(args.ineq)
        env, inst = build_env(args, rec, seed)
        verdict = cp.check_record(rec, env, atol=args.tol, rtol=args.rtol, kappa_max=args.kappa)
        head = {"record": rec.id, "paper_eq": rec.paper_eq, "clauses": list(rec.clauses)}
        if rec.builtin is not None:
            head["note"] = rec.note
    else:
        text = _expr_text(args)
        tree = parse(text)
        if not isinstance(tree, Relation):
            raise UsageError("check takes a relation such as 'A >= B'")
        env, inst = build_env(args, _adhoc_record(text), seed)
        ev = Evaluator(env, atol=args.tol, rtol=args.rtol, kappa_max=args.kappa, refine=True)
        verdict = ev.relation(tree)
        head = {"expr": print_canonical(tree)}
    if args.format == "json":
        out = dict(head, verdict=verdict.to_json())
        if inst is not None:
            out["instance"] = inst.to_json()
        emit(_dump(out), args.out)
    else:
        lines = []
        if "record" in head:
            lines.append(f"record {head['record']}: {head['paper_eq']}")
            lines.extend(f"  {c}" for c in head["clauses"] or [head.get("note", "")])
        else:
            lines.append(f"expr: {head['expr']}")
        if inst is not None:
            lines.append(f"instance: seed={inst.seed} dim={inst.dim} index={inst.index}")
        lines.append(render_verdict(verdict))
        emit("\n".join(lines), args.out)
    return _VERDICT_EXIT[verdict.verdict]


def _fuzz_ids(values):
    if not values:
        return None
    ids = []
    for v in values:
        ids.extend(x.strip() for x in v.split(",") if x.strip())
    return ids


def format_summary(report: cp.CampaignReport) -> str:
    cfg = report.config
    lines = [f"campaign seed={cfg.seed} dims={','.join(map(str, cfg.dims))} trials={cfg.trials}"]
    for r in report.records:
        worst = "n/a" if r.worst_min_eig == float("inf") else f"{r.worst_min_eig:.3e}"
        status = "ok" if r.passed else "FAIL"
        lines.append(f"{r.record:10s} {status:4s} worst_min_eig={worst:>11s} "
                     f"borderline={r.borderline} failures={len(r.failures)}")
    lines.append(f"records={len(report.records)} failures={report.failures}")
    return "\n".join(lines)


def cmd_fuzz(args) -> int:
    report = cp.fuzz_campaign(
        _fuzz_ids(args.ineq),
        args.dims,
        args.trials,
        resolve_seed(args.seed),
        args.tol,
        args.rtol,
        diagonal=args.diagonal,
        pad=args.pad,
        kappa_max=args.kappa,
        workers=args.workers,
    )
    if args.out is not None:
        emit(_dump(report.to_json()), args.out)
    if args.format == "json" and args.out is None:
        emit(_dump(report.to_json()), None)
    else:
        emit(format_summary(report), None)
    return report.exit_code


def cmd_list(args) -> int:
    if args.format == "json":
        emit(_dump({"count": len(cat.RECORDS), "records": [r.to_json() for r in cat.RECORDS]}), args.out)
        return EXIT_HOLDS
    lines = []
    for r in cat.RECORDS:
        body = " ; ".join(r.clauses) if r.clauses else r.note
        req = ", ".join(sorted(r.requires)) or "-"
        lines.append(f"{r.id}\t{r.paper_eq}\t[{r.relation}] {body}\trequires: {req}")
    emit("\n".join(lines), args.out)
    return EXIT_HOLDS


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with exit status 2
        return int(exc.code or 0)
    try:
        return args.run(args)
    except (UsageError, OpvError, OSError, ValueError, KeyError, ArithmeticError, np.linalg.LinAlgError) as exc:
        msg = str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)
        where = getattr(exc, "dsl_expr", None)
        if where:
            msg = f"{msg} (in {where})"
        print(f"opv: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
