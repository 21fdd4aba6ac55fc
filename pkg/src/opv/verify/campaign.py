"""Instances, single-record checks and fuzz campaigns."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import matfun as mf
from ..bounds import DEFAULT_PAD, rayleigh_anchor, spectral_window
from ..dsl import Evaluator, RelationVerdict, free_names
from ..errors import OpvError, RequirementViolated, UnboundName
from ..funcatalog import ScalarFunction, parse_function_name
from . import catalog as cat
from .generate import (
    GEN_KAPPA,
    gen_invertible,
    gen_pd,
    gen_singular,
    gen_unit_vector,
    trial_seed,
)

DEFAULT_SEED = 42
DEFAULT_DIMS = (1, 2, 3, 5, 8)
DEFAULT_TRIALS = 200

# convex catalog functions cycled through by trial index
FUNCTION_POOL = (
    "pow(2)",
    "pow(3)",
    "pow(-1)",
    "pow(-0.5)",
    "pow(1.5)",
    "neg_pow(0.5)",
    "neg_pow(0.25)",
    "neg_log()",
    "tsallis(2)",
    "tsallis(1.5)",
    "xlogx()",
    "identity()",
)

# one trial in this many binds a singular V for records that allow it
SINGULAR_EVERY = 5


@dataclass
class Instance:
    record_id: str
    seed: int
    dim: int
    index: int
    diagonal: bool
    env: dict

    def to_json(self) -> dict:
        return {
            "record": self.record_id,
            "seed": self.seed,
            "dim": self.dim,
            "index": self.index,
            "diagonal": self.diagonal,
            "env": {k: value_to_json(v) for k, v in sorted(self.env.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> Instance:
        env = {k: value_from_json(v) for k, v in obj["env"].items()}
        return cls(obj["record"], obj["seed"], obj["dim"], obj["index"], obj["diagonal"], env)


def value_to_json(v):
    if isinstance(v, ScalarFunction):
        return {"function": v.name}
    if isinstance(v, np.ndarray) and v.ndim == 2:
        return {"matrix": mf.to_json(v)}
    if isinstance(v, np.ndarray) and v.ndim == 1:
        return {"vector": [[float(z.real), float(z.imag)] for z in v]}
    return float(v)


def value_from_json(v):
    if isinstance(v, dict):
        if "function" in v:
            return parse_function_name(v["function"])
        if "matrix" in v:
            return mf.from_json(v["matrix"])
        if "vector" in v:
            return np.array([complex(re, im) for re, im in v["vector"]])
    return float(v)


# Every environment name draws from its own child stream of the trial seed,
# so an instance can generate only the names its record uses while staying
# a pure function of (seed, record, dim, index).
STREAMS = ("T", "V", "A", "B", "X", "x", "y", "nu", "t", "z", "s")


def _needed_names(rec: cat.InequalityRecord) -> set:
    names = {"T", "V"}
    for tree in rec.trees:
        names |= free_names(tree)
    if rec.builtin is not None:
        names |= {"t"}
    if "r" in names:
        names.add("x")
    if rec.anchor:
        names.add("s")
    return names


def build_instance(
    record: cat.InequalityRecord | str,
    seed: int,
    dim: int,
    index: int,
    diagonal: bool = False,
    pad: float = DEFAULT_PAD,
    kappa_gen: float = GEN_KAPPA,
) -> Instance:
    """The instance for trial ``index`` of ``record`` at dimension ``dim``."""
    rec = cat.get_record(record) if isinstance(record, str) else record
    children = trial_seed(seed, rec.id, dim, index).spawn(len(STREAMS))
    rng = {name: np.random.default_rng(ss) for name, ss in zip(STREAMS, children)}
    need = _needed_names(rec)
    singular = rec.singular_v and index % SINGULAR_EVERY == SINGULAR_EVERY - 1
    env = {"T": gen_invertible(dim, rng["T"], kappa_gen, diagonal)}
    if singular:
        env["V"] = gen_singular(dim, rng["V"], diagonal)
    else:
        env["V"] = gen_invertible(dim, rng["V"], kappa_gen, diagonal)
    for name in ("A", "B", "X"):
        if name in need:
            env[name] = gen_pd(dim, rng[name], diagonal)
    for name in ("x", "y"):
        if name in need:
            env[name] = gen_unit_vector(dim, rng[name])
    if "nu" in need:
        env["nu"] = float(rec.nu_grid[rng["nu"].integers(len(rec.nu_grid))])
    if "t" in need:
        env["t"] = float(cat.TSALLIS_GRID[rng["t"].integers(len(cat.TSALLIS_GRID))])
    if "z" in need:
        env["z"] = float(math.exp(rng["z"].uniform(-3.0, 3.0)))
    if "f" in need:
        env["f"] = parse_function_name(FUNCTION_POOL[index % len(FUNCTION_POOL)])
    if not singular:
        add_window_names(env, rec.anchor, pad, float(rng["s"].uniform()))
    return Instance(rec.id, int(seed), int(dim), int(index), bool(diagonal), env)


def add_window_names(env: dict, anchor: str | None = None, pad: float = DEFAULT_PAD, u: float = 0.5) -> dict:
    """Bind the spectral window names derived from ``T`` and ``V``.

    Adds ``m, M, m2, M2, mid``, the Rayleigh anchor ``r`` when a vector
    ``x`` is bound, and the anchor ``s`` at position ``u`` in [0, 1]: linear
    across the window for ``anchor == "window"``, logarithmic across
    ``[m2/4, 4 M2]`` for ``anchor == "positive"``. Names already bound are
    left alone.
    """
    win = spectral_window(env["T"], env["V"], pad)
    derived = dict(m=win.m, M=win.M, m2=win.m2, M2=win.M2, mid=win.mid)
    if "x" in env:
        derived["r"] = rayleigh_anchor(env["T"], env["V"], env["x"])
    if anchor == "window":
        derived["s"] = win.m2 + u * (win.M2 - win.m2)
    elif anchor == "positive":
        lo, hi = math.log(win.m2 / 4), math.log(4 * win.M2)
        derived["s"] = math.exp(lo + u * (hi - lo))
    for k, v in derived.items():
        env.setdefault(k, v)
    return env


def check_requirements(rec: cat.InequalityRecord, env: dict, kappa_max: float = mf.KAPPA_MAX) -> None:
    needed = set()
    for tree in rec.trees:
        needed |= free_names(tree)
    if rec.builtin is not None:
        needed |= {"T", "V", "t"}
    if rec.anchor == "sweep":
        needed.discard("s")
        needed |= {"m2", "M2"}
    missing = sorted(n for n in needed if n not in env)
    if missing:
        raise UnboundName(f"{rec.id}: unbound name(s) {', '.join(missing)}")
    req = rec.requires
    if cat.V_INVERTIBLE in req:
        try:
            mf.check_invertible(env["V"], kappa_max)
        except OpvError as exc:
            raise RequirementViolated(f"{rec.id} needs an invertible V: {exc}") from None
    if cat.WEIGHT in req and not 0.0 <= env["nu"] <= 1.0:
        raise RequirementViolated(f"{rec.id} needs nu in [0, 1], got {env['nu']}")
    if cat.WEIGHT_OPEN in req and not 0.0 < env["nu"] < 1.0:
        raise RequirementViolated(f"{rec.id} needs nu in (0, 1), got {env['nu']}")
    if cat.T_POSITIVE in req and not env["t"] > 0:
        raise RequirementViolated(f"{rec.id} needs t > 0, got {env['t']}")
    if cat.CONVEX_F in req and not getattr(env["f"], "is_convex", False):
        raise RequirementViolated(f"{rec.id} needs a convex catalog function, got {env['f']}")
    if cat.WINDOW in req:
        m2, M2 = env["m2"], env["M2"]
        if not 0 < m2 < M2:
            raise RequirementViolated(f"{rec.id} needs 0 < m^2 < M^2")
        w = np.linalg.eigvalsh(mf.quotient_square(env["T"], env["V"], kappa_max))
        slack = 1e-12 * M2
        if w[0] < m2 - slack or w[-1] > M2 + slack:
            raise RequirementViolated(f"{rec.id}: spectrum of |V T^-1|^2 escapes the window")


def sweep_anchors(env: dict, count: int = cat.SWEEP_ANCHORS) -> np.ndarray:
    return np.linspace(env["m2"], env["M2"], count)


def check_record(
    rec: cat.InequalityRecord | str,
    env: dict,
    *,
    atol: float = mf.ATOL,
    rtol: float = mf.RTOL,
    kappa_max: float = mf.KAPPA_MAX,
    refine: bool = True,
) -> RelationVerdict:
    """Evaluate every clause of ``rec`` under ``env``.

    The result collects one verdict per link of every chain (and per anchor
    for sweep records); borderline links are recomputed at extended
    precision when ``refine`` is set.
    """
    rec = cat.get_record(rec) if isinstance(rec, str) else rec
    check_requirements(rec, env, kappa_max)
    if rec.builtin is not None:
        direct, product = rec.builtin(env, kappa_max)
        return RelationVerdict(("==",), (cat.builtin_verdict(direct, product, atol, rtol),))
    ev = Evaluator(env, atol=atol, rtol=rtol, kappa_max=kappa_max, refine=refine)
    anchors = sweep_anchors(env) if rec.anchor == "sweep" else [None]
    ops, pairs = [], []
    for s in anchors:
        if s is not None:
            ev.rebind(s=float(s))
        for tree in rec.trees:
            res = ev.relation(tree)
            ops.extend(res.ops)
            pairs.extend(res.pairs)
    return RelationVerdict(tuple(ops), tuple(pairs))


def record_members(rec: cat.InequalityRecord | str, env: dict, kappa_max: float = mf.KAPPA_MAX) -> list:
    """The evaluated members of every chain, clause by clause (no sweep)."""
    rec = cat.get_record(rec) if isinstance(rec, str) else rec
    ev = Evaluator(env, kappa_max=kappa_max)
    if rec.builtin is not None:
        return [list(rec.builtin(env, kappa_max))]
    return [[ev.value(op) for op in tree.operands] for tree in rec.trees]


@dataclass
class FuzzReport:
    record: str
    trials: int
    dims: list
    seed: int
    worst_min_eig: float = math.inf
    worst_margin: float = math.inf
    borderline: int = 0
    failures: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def merge(self, other: FuzzReport) -> None:
        self.worst_min_eig = min(self.worst_min_eig, other.worst_min_eig)
        self.worst_margin = min(self.worst_margin, other.worst_margin)
        self.borderline += other.borderline
        self.failures.extend(other.failures)
        self.elapsed += other.elapsed

    def to_json(self, elapsed: bool = True) -> dict:
        out = {
            "record": self.record,
            "trials": self.trials,
            "dims": list(self.dims),
            "seed": self.seed,
            "worst_min_eig": _finite_or_none(self.worst_min_eig),
            "worst_margin": _finite_or_none(self.worst_margin),
            "borderline": self.borderline,
            "failures": sorted(self.failures, key=lambda f: (f["dim"], f["index"])),
        }
        if elapsed:
            out["elapsed"] = self.elapsed
        return out


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


@dataclass(frozen=True)
class CampaignConfig:
    seed: int = DEFAULT_SEED
    dims: tuple = DEFAULT_DIMS
    trials: int = DEFAULT_TRIALS
    atol: float = mf.ATOL
    rtol: float = mf.RTOL
    pad: float = DEFAULT_PAD
    diagonal: bool = False
    kappa_gen: float = GEN_KAPPA
    kappa_max: float = mf.KAPPA_MAX

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "tol": self.atol,
            "rtol": self.rtol,
            "dims": list(self.dims),
            "trials": self.trials,
            "pad": self.pad,
            "diagonal": self.diagonal,
            "kappa_gen": self.kappa_gen,
        }


def run_trial(rec: cat.InequalityRecord, dim: int, index: int, cfg: CampaignConfig):
    """Returns ``(verdict or None, failure dict or None)`` for one trial."""
    inst = build_instance(rec, cfg.seed, dim, index, cfg.diagonal, cfg.pad, cfg.kappa_gen)
    try:
        verdict = check_record(rec, inst.env, atol=cfg.atol, rtol=cfg.rtol, kappa_max=cfg.kappa_max)
    except (OpvError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return None, {
            "dim": dim,
            "index": index,
            "error": f"{type(exc).__name__}: {exc}",
            "instance": inst.to_json(),
        }
    if verdict.verdict is mf.Verdict.FAILS:
        return verdict, {
            "dim": dim,
            "index": index,
            "min_eig": verdict.min_eig,
            "margin": verdict.margin,
            "verdict": verdict.to_json(),
            "instance": inst.to_json(),
        }
    return verdict, None


def _run_unit(args) -> FuzzReport:
    rec_id, dim, cfg = args
    rec = cat.get_record(rec_id)
    rep = FuzzReport(rec_id, cfg.trials, [dim], cfg.seed)
    start = time.perf_counter()
    for index in range(cfg.trials):
        verdict, failure = run_trial(rec, dim, index, cfg)
        if failure is not None:
            rep.failures.append(failure)
        if verdict is not None:
            rep.worst_min_eig = min(rep.worst_min_eig, verdict.min_eig)
            rep.worst_margin = min(rep.worst_margin, verdict.margin)
            if verdict.verdict is mf.Verdict.BORDERLINE:
                rep.borderline += 1
    rep.elapsed = time.perf_counter() - start
    return rep


@dataclass
class CampaignReport:
    config: CampaignConfig
    records: list

    @property
    def failures(self) -> int:
        return sum(len(r.failures) for r in self.records)

    @property
    def exit_code(self) -> int:
        return 0 if self.failures == 0 else 1

    def to_json(self, elapsed: bool = True) -> dict:
        return {"campaign": self.config.to_json(), "records": [r.to_json(elapsed) for r in self.records]}


def fuzz_campaign(
    ids=None,
    dims=DEFAULT_DIMS,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    atol: float = mf.ATOL,
    rtol: float = mf.RTOL,
    *,
    diagonal: bool = False,
    pad: float = DEFAULT_PAD,
    kappa_gen: float = GEN_KAPPA,
    kappa_max: float = mf.KAPPA_MAX,
    workers: int = 1,
) -> CampaignReport:
    """Run ``trials`` instances of every record at every dimension.

    Work is split into (record, dimension) units; with ``workers > 1`` they
    run in separate processes. Results are merged in catalog order, so the
    report does not depend on scheduling.
    """
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    ids = [r.id for r in cat.RECORDS] if ids is None else list(ids)
    for rid in ids:
        cat.get_record(rid)
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ValueError("dims must be a nonempty list of positive integers")
    cfg = CampaignConfig(int(seed), dims, int(trials), atol, rtol, pad, diagonal, kappa_gen, kappa_max)
    if trials == 0:
        return CampaignReport(cfg, [])
    units = [(rid, d, cfg) for rid in ids for d in dims]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_unit, units))
    else:
        parts = [_run_unit(u) for u in units]
    merged: dict[str, FuzzReport] = {}
    for rid in ids:
        merged[rid] = FuzzReport(rid, cfg.trials, list(dims), cfg.seed)
    for part in parts:
        merged[part.record].merge(part)
    return CampaignReport(cfg, [merged[rid] for rid in ids])


def replay(seed: int, record_id: str, dim: int, index: int, diagonal: bool = False,
           pad: float = DEFAULT_PAD, kappa_gen: float = GEN_KAPPA, *,
           atol: float = mf.ATOL, rtol: float = mf.RTOL, kappa_max: float = mf.KAPPA_MAX):
    """Rebuild one trial and check it again: ``(instance, verdict)``.

    Pass the campaign's tolerances to reproduce its verdict exactly.
    """
    inst = build_instance(record_id, seed, dim, index, diagonal, pad, kappa_gen)
    return inst, check_record(record_id, inst.env, atol=atol, rtol=rtol, kappa_max=kappa_max)
