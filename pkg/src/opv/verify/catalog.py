"""The inequality catalog.

Each record stores one or more relation chains as canonical DSL text plus
what an instance must provide. Environment names used by the records:

``T, V``
    the operator pair (``T`` invertible; ``V`` invertible unless the record
    allows a singular one)
``A, B, X``
    positive definite matrices
``x, y``
    unit vectors
``nu, t, z``
    a weight in ``[0, 1]``, a positive Tsallis parameter, a positive scalar
``f``
    a convex catalog function
``m, M, m2, M2, mid``
    the spectral window of ``|V T^{-1}|`` and ``mid = (m^2 + M^2)/2``
``r``
    the Rayleigh anchor ``||V x||^2 / ||T x||^2``
``s``
    a free anchor (see :attr:`InequalityRecord.anchor`)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .. import matfun as mf
from .. import perspectives as ps
from ..dsl import parse, print_canonical
from ..errors import UnknownRecord
from ..dsl.ast import Relation

NU_GRID = tuple(round(0.1 * k, 1) for k in range(11))
NU_INTERIOR = NU_GRID[1:-1]
TSALLIS_GRID = (0.25, 0.5, 1.0, 2.0)
SWEEP_ANCHORS = 20

# requirement tags
V_INVERTIBLE = "V invertible"
WINDOW = "window"
WEIGHT = "weight in [0,1]"
WEIGHT_OPEN = "weight in (0,1)"
T_POSITIVE = "t > 0"
CONVEX_F = "f convex"


@dataclass(frozen=True)
class InequalityRecord:
    id: str
    clauses: tuple  # canonical DSL text, one relation chain each
    paper_eq: str
    requires: frozenset = frozenset()
    anchor: str | None = None  # "window", "positive" or "sweep"
    nu_grid: tuple = NU_GRID
    singular_v: bool = False  # instances may bind a singular V
    builtin: Callable | None = field(default=None, compare=False)
    note: str = ""

    @cached_property
    def trees(self) -> tuple:
        return tuple(parse(c) for c in self.clauses)

    @property
    def relation(self) -> str:
        if self.builtin is not None:
            return "=="
        ops = []
        for tree in self.trees:
            ops.extend(tree.ops)
        return " ".join(ops)

    @property
    def lhs(self) -> str | None:
        return print_canonical(self.trees[0].operands[0]) if self.clauses else None

    @property
    def rhs(self) -> str | None:
        return print_canonical(self.trees[0].operands[-1]) if self.clauses else None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "paper_eq": self.paper_eq,
            "relation": self.relation,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "clauses": list(self.clauses),
            "requires": sorted(self.requires),
            "anchor": self.anchor,
        }


def _neg_tsallis_identity(env: dict, kappa_max: float):
    """Both sides of the negative-parameter Tsallis identity for ``t`` in env."""
    return ps.tsallis_negative_identity(env["T"], env["V"], env["t"], kappa_max)


def builtin_verdict(direct, product, atol: float = mf.ATOL, rtol: float = mf.RTOL) -> mf.LoewnerVerdict:
    """Equality verdict for a possibly non-Hermitian pair: ``-||D - P||_2`` against the tolerance."""
    tol = mf.loewner_tol(np.linalg.norm(direct), np.linalg.norm(product), atol, rtol)
    return mf.LoewnerVerdict.from_min_eig(-float(np.linalg.norm(direct - product, 2)), tol)


def _canon(text: str) -> str:
    tree = parse(text)
    if not isinstance(tree, Relation):
        raise ValueError(f"catalog clause is not a relation: {text}")
    return print_canonical(tree)


def _rec(id, clauses, paper_eq, requires=(), **kw) -> InequalityRecord:
    if isinstance(clauses, str):
        clauses = (clauses,)
    return InequalityRecord(id, tuple(_canon(c) for c in clauses), paper_eq, frozenset(requires), **kw)


# reusable fragments
_P = "perspQ(f, T, V)"
_GAP = "(fval(fder(f), M2) - fval(fder(f), m2))"
_IMEAN_LOWER = (
    "2 * imean(f, m2, M2) * abs2(T)"
    " - (fval(f, M2) * (M2 * abs2(T) - abs2(V)) + fval(f, m2) * (abs2(V) - m2 * abs2(T))) / (M2 - m2)"
)


def _tangent(a: str) -> str:
    return f"fval(f, {a}) * abs2(T) + fval(fsub(f), {a}) * (abs2(V) - {a} * abs2(T))"


def _chain_first(a: str) -> str:
    return f"fval(f, {a}) * abs2(T) + perspQ(fderl(f), T, V) - {a} * perspQ(fder(f), T, V)"


def _chain_second(a: str) -> str:
    return f"fval(f, {a}) * abs2(T) + fval(fder(f), {a}) * (abs2(V) - {a} * abs2(T)) + {_GAP} * absPersp(T, V, {a})"


_GEO_MID = "(1 - nu) * rpow(mid, nu) * abs2(T) + nu * rpow(mid, nu - 1) * abs2(V)"
_ENT_MID = "ln(mid) * abs2(T) + inv(mid) * (abs2(V) - mid * abs2(T))"
_QT = "qf(abs2(T), x)"
_QV = "qf(abs2(V), x)"

_GENERAL = (V_INVERTIBLE, WINDOW, CONVEX_F)

RECORDS: tuple[InequalityRecord, ...] = (
    # foundations
    _rec("jen", "qf(fapply(f, X), x) >= fval(f, qf(X, x))",
         "Eq. (Jen), Jensen's type inequality for selfadjoint operators", (CONVEX_F,)),
    _rec("jen2", "qf(persp(f, B, A), x) / qf(A, x) >= fval(f, qf(B, x) / qf(A, x))",
         "Eq. (Jen2), Jensen's type inequality for the perspective", (CONVEX_F,)),
    _rec("ka", "bang(A, B, nu) <= sharp(A, B, nu) <= nabla(A, B, nu)",
         "Eq. (KA), operator Young inequalities", (WEIGHT,)),
    # quadratic means and entropies
    _rec("e.1.4", "geoQ(fapply(pow(0.5), A), fapply(pow(0.5), B), nu) == sharp(A, B, nu)",
         "Eq. (e.1.4), square roots recover the Kubo-Ando geometric mean", (WEIGHT,)),
    _rec("e.1.5", "geoQ(T, V, nu) == geoQmod(T, V, nu)",
         "Eq. (e.1.5), the two forms of the quadratic geometric mean", (WEIGHT,), singular_v=True),
    _rec("e.1.6", "nabla(abs2(T), abs2(V), nu) >= geoQ(T, V, nu)",
         "Eq. (e.1.6), quadratic arithmetic-geometric mean inequality", (WEIGHT,), singular_v=True),
    _rec("e.1.7", "geoQ(T, V, nu) >= bang(abs2(T), abs2(V), nu)",
         "Eq. (e.1.7), quadratic geometric-harmonic mean inequality", (V_INVERTIBLE, WEIGHT)),
    _rec("e.1.8", "nabla(abs2(T), abs2(V), 0.5) >= geoQ(T, V, 0.5) >= bang(abs2(T), abs2(V), 0.5)",
         "Eq. (e.1.8), the chain at weight 1/2", (V_INVERTIBLE,)),
    _rec("e.1.9", ("inv(geoQ(T, V, nu)) == geoQ(invadj(T), invadj(V), nu)",
                   "geoQ(T, V, 1 - nu) == geoQ(V, T, nu)"),
         "Eq. (e.1.9), inverse and weight-flip identities", (V_INVERTIBLE, WEIGHT)),
    _rec("e.1.6.a", "Tt(z, -t) == (1 - rpow(z, -t)) / t == (rpow(z, t) - 1) / (t * rpow(z, t)) == Tt(z, t) * rpow(z, -t)",
         "Eq. (e.1.6.a), scalar identity for the Tsallis map", (T_POSITIVE,)),
    InequalityRecord("-TQ", (), "Eq. (-TQ), negative-parameter Tsallis identity, t > 0",
                     frozenset((V_INVERTIBLE, T_POSITIVE)), builtin=_neg_tsallis_identity,
                     note="tsallisQ(T,V,-t) equals tsallisQ(T,V,t) geoQ(T,V,t)^-1 |T|^2 (plain product)"),
    _rec("e.1.10", "tsallisQ(T, V, -t) <= entQ(T, V) <= tsallisQ(T, V, t)",
         "Eq. (e.1.10), Tsallis bounds for the quadratic relative entropy", (V_INVERTIBLE, T_POSITIVE)),
    _rec("e.1.11", "abs2(T) - sandwich(abs2(T), inv(abs2(V))) <= entQ(T, V) <= abs2(V) - abs2(T)",
         "Eq. (e.1.11), the case t = 1", (V_INVERTIBLE,)),
    _rec("e.2.3", "2 * (abs2(T) - sandwich(abs2(T), inv(geoQ(T, V, 0.5)))) <= entQ(T, V) <= 2 * (geoQ(T, V, 0.5) - abs2(T))",
         "Eq. (e.2.3), the case t = 1/2", (V_INVERTIBLE,)),
    # lower bounds for the quadratic perspective
    _rec("e.2.1", f"{_P} >= {_tangent('s')}",
         "Eq. (e.2.1), supporting-line lower bound at any anchor", _GENERAL, anchor="sweep"),
    _rec("e.2.1.a", f"{_P} >= {_tangent('mid')}",
         "Eq. (e.2.1.a), lower bound at the window midpoint", _GENERAL),
    _rec("e.2.6", f"{_P} >= {_tangent('r')}",
         "Eq. (e.2.6), lower bound at the Rayleigh anchor", _GENERAL),
    _rec("e.2.7", f"qf({_P}, x) / {_QT} >= fval(f, r)",
         "Eq. (e.2.7), Jensen's type inequality for the quadratic perspective", _GENERAL),
    _rec("e.2.8", f"qf({_P}, y) >= fval(f, r) * qf(abs2(T), y) + fval(fsub(f), r) * (qf(abs2(V), y) - r * qf(abs2(T), y))",
         "Eq. (e.2.8), two-vector form", _GENERAL),
    _rec("e.2.9", f"{_P} >= {_IMEAN_LOWER}",
         "Eq. (e.2.9), integral-mean lower bound", _GENERAL),
    # upper bounds
    _rec("e.2.11", f"{_P} <= {_chain_first('s')} <= {_chain_second('s')}",
         "Eq. (e.2.11), upper bound chain at an anchor in the window", _GENERAL, anchor="window"),
    _rec("e.2.11.a",
         f"{_P} <= {_chain_first('mid')} <= {_chain_second('mid')}"
         f" <= fval(f, mid) * abs2(T) + fval(fder(f), mid) * (abs2(V) - mid * abs2(T)) + 0.5 * (M2 - m2) * {_GAP} * abs2(T)",
         "Eq. (e.2.11.a), upper bound chain at the window midpoint", _GENERAL),
    _rec("e.2.16", f"{_P} <= {_chain_first('r')} <= {_chain_second('r')}",
         "Eq. (e.2.16), upper bound chain at the Rayleigh anchor", _GENERAL),
    _rec("e.2.17",
         f"qf({_P}, x) <= fval(f, r) * {_QT} + qf(perspQ(fderl(f), T, V), x) - r * qf(perspQ(fder(f), T, V), x)"
         f" <= fval(f, r) * {_QT} + {_GAP} * qf(absPersp(T, V, r), x)",
         "Eq. (e.2.17), scalar upper bound chain", _GENERAL),
    _rec("e.2.18",
         f"{_P} <= imean(f, m2, M2) * abs2(T) + perspQ(fderl(f), T, V) - mid * perspQ(fder(f), T, V)"
         f" <= {_IMEAN_LOWER} + {_GAP} * absPerspMean(T, V, m2, M2)",
         "Eq. (e.2.18), integral-mean upper bound chain", _GENERAL),
    # quadratic geometric mean
    _rec("e.3.1",
         "geoQ(T, V, nu) <= (1 - nu) * rpow(s, nu) * abs2(T) + nu * rpow(s, nu - 1) * abs2(V)"
         " == nabla(rpow(s, nu) * abs2(T), rpow(s, nu - 1) * abs2(V), nu)",
         "Eq. (e.3.1), tangent bound for the convex function -x^nu", (V_INVERTIBLE, WEIGHT), anchor="positive"),
    _rec("e.3.2", f"geoQ(T, V, nu) <= {_GEO_MID}",
         "Eq. (e.3.2), midpoint tangent bound for the geometric mean", (V_INVERTIBLE, WINDOW, WEIGHT)),
    _rec("e.3.3", "geoQ(T, V, nu) <= (1 - nu) * rpow(r, nu) * abs2(T) + nu * rpow(inv(r), 1 - nu) * abs2(V)",
         "Eq. (e.3.3), Rayleigh tangent bound for the geometric mean", (V_INVERTIBLE, WEIGHT)),
    _rec("e.3.4", f"qf(geoQ(T, V, nu), x) <= rpow({_QT}, 1 - nu) * rpow({_QV}, nu)",
         "Eq. (e.3.4), vector bound for the geometric mean", (V_INVERTIBLE, WEIGHT)),
    _rec("YY", f"qf(geoQ(T, V, nu), x) <= (1 - nu) * {_QT} + nu * {_QV}",
         "Eq. (YY), vector form of the arithmetic-geometric mean inequality", (WEIGHT,)),
    _rec("e.3.4.a", f"rpow({_QT}, 1 - nu) * rpow({_QV}, nu) <= (1 - nu) * {_QT} + nu * {_QV}",
         "Eq. (e.3.4.a), scalar arithmetic-geometric mean inequality", (V_INVERTIBLE, WEIGHT)),
    _rec("e.3.4.b", f"qf(geoQ(T, V, nu), x) <= rpow({_QT}, 1 - nu) * rpow({_QV}, nu) <= (1 - nu) * {_QT} + nu * {_QV}",
         "Eq. (e.3.4.b), vector inequality improving (YY)", (V_INVERTIBLE, WEIGHT)),
    _rec("e.3.5",
         "geoQ(T, V, nu) <= 2 * rpow(Lp(m2, M2, nu), nu) * abs2(T)"
         " - (rpow(M2, nu) * (M2 * abs2(T) - abs2(V)) + rpow(m2, nu) * (abs2(V) - m2 * abs2(T))) / (M2 - m2)",
         "Eq. (e.3.5), from (e.2.9) with the p-logarithmic mean", (V_INVERTIBLE, WINDOW, WEIGHT_OPEN),
         nu_grid=NU_INTERIOR),
    _rec("e.3.7",
         "geoQ(T, V, nu) >= rpow(mid, nu) * abs2(T) + nu * geoQ(T, V, nu) - nu * mid * geoQ(T, V, nu - 1)"
         f" >= {_GEO_MID} + nu * (rpow(M2, nu - 1) - rpow(m2, nu - 1)) * absPersp(T, V, mid)"
         f" >= {_GEO_MID} + 0.5 * nu * (M2 - m2) * (rpow(M2, nu - 1) - rpow(m2, nu - 1)) * abs2(T)",
         "Eq. (e.3.7), then by (e.2.11.a)", (V_INVERTIBLE, WINDOW, WEIGHT)),
    _rec("e.3.8",
         "0.5 * nu * (M2 - m2) * (rpow(M2, 1 - nu) - rpow(m2, 1 - nu)) / (rpow(m2, 1 - nu) * rpow(M2, 1 - nu)) * abs2(T)"
         f" >= {_GEO_MID} - geoQ(T, V, nu) >= 0 * abs2(T)",
         "Eq. (e.3.8), a simple reverse for (e.3.2); the scalar bound is read as a multiple of |T|^2",
         (V_INVERTIBLE, WINDOW, WEIGHT)),
    # quadratic relative entropy
    _rec("e.6.2", "entQ(T, V) <= ln(s) * abs2(T) - abs2(T) + inv(s) * abs2(V)",
         "Eq. (e.6.2), tangent bound for the convex function -ln", (V_INVERTIBLE,), anchor="positive"),
    _rec("e.6.3", f"entQ(T, V) <= {_ENT_MID}",
         "Eq. (e.6.3), midpoint tangent bound for the entropy", (V_INVERTIBLE, WINDOW)),
    _rec("e.6.4", "entQ(T, V) <= ln(r) * abs2(T) + inv(r) * abs2(V) - abs2(T)",
         "Eq. (e.6.4), Rayleigh tangent bound for the entropy", (V_INVERTIBLE,)),
    _rec("e.6.5", f"qf(entQ(T, V), x) <= {_QT} * ln(r)",
         "Eq. (e.6.5), vector bound for the entropy", (V_INVERTIBLE,)),
    _rec("e.6.5.a", "entQ(T, V) <= abs2(V) - abs2(T)",
         "Eq. (e.6.5.a), the upper half of (e.1.11)", (V_INVERTIBLE,)),
    _rec("e.6.5.b", f"qf(entQ(T, V), x) <= {_QV} - {_QT}",
         "Eq. (e.6.5.b), vector form of (e.6.5.a)", (V_INVERTIBLE,)),
    _rec("e.6.5.c", f"qf(entQ(T, V), x) <= {_QT} * ln(r) <= {_QV} - {_QT}",
         "Eq. (e.6.5.c), elementary inequality for the logarithm, improving (e.6.5.b)", (V_INVERTIBLE,)),
    _rec("e.6.6",
         "entQ(T, V) <= 2 * ln(identric(m2, M2)) * abs2(T)"
         " - (ln(M2) * (M2 * abs2(T) - abs2(V)) + ln(m2) * (abs2(V) - m2 * abs2(T))) / (M2 - m2)",
         "Eq. (e.6.6), integral-mean bound with the identric mean", (V_INVERTIBLE, WINDOW)),
    _rec("e.6.8",
         "entQ(T, V) >= ln(mid) * abs2(T) + abs2(T) - mid * sandwich(abs2(T), inv(abs2(V)))"
         f" >= {_ENT_MID} - (M2 - m2) / (m2 * M2) * absPersp(T, V, mid)"
         f" >= {_ENT_MID} - 0.5 * (M2 - m2) * (M2 - m2) / (m2 * M2) * abs2(T)",
         "Eq. (e.6.8), lower chain for the entropy from (e.2.11.a)", (V_INVERTIBLE, WINDOW)),
    _rec("e.6.9",
         f"0.5 * (M2 - m2) * (M2 - m2) / (m2 * M2) * abs2(T) >= {_ENT_MID} - entQ(T, V) >= 0 * abs2(T)",
         "Eq. (e.6.9), a simple reverse of (e.6.3); the scalar bound is read as a multiple of |T|^2",
         (V_INVERTIBLE, WINDOW)),
)

CATALOG: dict[str, InequalityRecord] = {r.id: r for r in RECORDS}


def get_record(record_id: str) -> InequalityRecord:
    try:
        return CATALOG[record_id]
    except KeyError:
        raise UnknownRecord(f"unknown catalog record {record_id!r}") from None
