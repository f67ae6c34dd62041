"""Batch front end: ``toricmirror <command> --input doc.json``.

Reports are JSON with sorted keys (CSV for the flat tables of ``box``, ``chi``
and ``gram``). Exit status is 0 when every check passes, 1 on a check
failure and 2 on input or schema errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import warnings
from fractions import Fraction
from itertools import product
from typing import Callable, Optional

import mpmath

from . import __version__
from .errors import (BasisNotFound, ConditionAViolated, ConditionBViolated,
                     ConditionCViolated, FanIncomplete, FanNotSimplicial, InputError,
                     NotWeakFano, RankDeficient, ToricError, TruncationWarning,
                     UserBasisInvalid)

SCHEMA_VERSION = 1
DIGITS_ENV = "TORICMIRROR_DIGITS"
DEFAULT_DIGITS = 30
DEFAULT_ORDER = 4

INPUT_ERRORS = (InputError, RankDeficient, ConditionAViolated, ConditionBViolated,
                ConditionCViolated, FanIncomplete, FanNotSimplicial, BasisNotFound,
                UserBasisInvalid, NotWeakFano)

log = logging.getLogger("toricmirror")


# ---------------------------------------------------------------------------
# input document

def _exact(x, what: str) -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise InputError(f"{what}: exact fields take integers or 'n/d' strings, got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(f"{what}: cannot parse {x!r} as a rational") from None
    raise InputError(f"{what}: unsupported value {x!r}")


def _number(x, what: str) -> Fraction:
    """Evaluation points: rationals, decimal strings or JSON numbers (read via their text)."""
    if isinstance(x, float):
        return Fraction(repr(x))
    return _exact(x, what)


def _int_matrix(rows, what: str, ncols: Optional[int] = None) -> list[list[int]]:
    if not isinstance(rows, list) or not rows:
        raise InputError(f"{what} must be a non-empty list of rows")
    out = []
    for row in rows:
        if not isinstance(row, list) or any(isinstance(v, bool) or not isinstance(v, int) for v in row):
            raise InputError(f"{what}: rows must be lists of integers")
        out.append(list(row))
    width = ncols if ncols is not None else len(out[0])
    if any(len(row) != width for row in out):
        raise InputError(f"{what}: every row needs {width} entries")
    return out


KNOWN_KEYS = {"schema_version", "name", "rank_L", "weights", "eta", "basis_p",
              "weak_fano", "digits", "cap", "q", "z"}


def parse_document(doc) -> dict:
    if not isinstance(doc, dict):
        raise InputError("input must be a JSON object")
    unknown = sorted(set(doc) - KNOWN_KEYS)
    if unknown:
        raise InputError(f"unknown keys {unknown}")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise InputError(f"schema_version must be {SCHEMA_VERSION}")
    r = doc.get("rank_L")
    if isinstance(r, bool) or not isinstance(r, int) or r < 1:
        raise InputError("rank_L must be a positive integer")
    weights = _int_matrix(doc.get("weights"), "weights", r)
    eta = doc.get("eta")
    if not isinstance(eta, list) or len(eta) != r:
        raise InputError(f"eta must list {r} rationals")
    out = {
        "name": str(doc.get("name", "")),
        "r": r,
        "weights": weights,
        "eta": [_exact(x, "eta") for x in eta],
        "basis_p": None,
        "weak_fano": doc.get("weak_fano", True),
        "digits": doc.get("digits"),
        "cap": _exact(doc["cap"], "cap") if "cap" in doc else None,
        "q": None,
        "z": _number(doc["z"], "z") if "z" in doc else None,
    }
    if not isinstance(out["weak_fano"], bool):
        raise InputError("weak_fano must be true or false")
    if "basis_p" in doc:
        out["basis_p"] = _int_matrix(doc["basis_p"], "basis_p", r)
        if len(out["basis_p"]) != r:
            raise InputError(f"basis_p must have {r} rows")
    if out["digits"] is not None and (isinstance(out["digits"], bool)
                                      or not isinstance(out["digits"], int) or out["digits"] < 5):
        raise InputError("digits must be an integer ≥ 5")
    if "q" in doc:
        q = doc["q"]
        out["q"] = [_number(x, "q") for x in (q if isinstance(q, list) else [q])]
    return out


def _parse_point(text: str, what: str) -> list[Fraction]:
    try:
        return [Fraction(t.strip()) for t in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise InputError(f"--{what}: cannot parse {text!r}") from None


# ---------------------------------------------------------------------------
# formatting

class Formatter:
    def __init__(self, digits: int):
        self.digits = digits

    def __call__(self, x):
        if isinstance(x, bool) or x is None or isinstance(x, str):
            return x
        if isinstance(x, int):
            return x
        if isinstance(x, Fraction):
            return str(x)
        if isinstance(x, float):
            return mpmath.nstr(mpmath.mpf(x), min(self.digits, 15))
        if isinstance(x, complex):
            return {"re": self(x.real), "im": self(x.imag)}
        if isinstance(x, mpmath.mpc):
            return {"re": self(x.real), "im": self(x.imag)}
        if isinstance(x, mpmath.mpf):
            return mpmath.nstr(x, self.digits)
        if isinstance(x, dict):
            return {self.key(k): self(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [self(v) for v in x]
        if isinstance(x, (frozenset, set)):
            return sorted(self(v) for v in x)
        if hasattr(x, "item"):           # numpy scalar
            return self(x.item())
        raise TypeError(f"cannot format {type(x).__name__}")

    def key(self, k) -> str:
        if isinstance(k, str):
            return k
        if isinstance(k, (tuple, list)):
            return "(" + ",".join(str(v) for v in k) + ")"
        return str(k)

    def cls(self, a) -> list:
        """OrbClass as per-sector coefficient lists."""
        return [self(list(a.sector(v))) for v in range(len(a.comps))]


def _one_based(idx) -> list[int]:
    return [i + 1 for i in sorted(idx)]


# ---------------------------------------------------------------------------
# context

class Context:
    def __init__(self, doc: dict, args: argparse.Namespace):
        from .stack import StackInitialData, select_nef_basis, validate

        self.doc = doc
        self.args = args
        self.digits = args.digits or doc["digits"] or int(os.environ.get(DIGITS_ENV, DEFAULT_DIGITS))
        mpmath.mp.dps = self.digits
        self.fmt = Formatter(self.digits)
        if args.order is not None:
            self.order = Fraction(args.order)
        elif doc["cap"] is not None:
            self.order = doc["cap"]
        else:
            self.order = Fraction(DEFAULT_ORDER)
        if self.order < 0:
            raise InputError("--order must be non-negative")
        self.tol = args.tol
        self.inertia = validate(StackInitialData.make(doc["weights"], doc["eta"]))
        self.basis = select_nef_basis(self.inertia, doc["basis_p"], weak_fano=doc["weak_fano"])
        self._coh = self._chern = None

    @property
    def coh(self):
        if self._coh is None:
            from .cohomology import OrbifoldCohomology
            self._coh = OrbifoldCohomology(self.basis)
        return self._coh

    @property
    def chern(self):
        if self._chern is None:
            from .chern import Chern
            self._chern = Chern(self.coh, self.digits)
        return self._chern

    def q(self) -> list[Fraction]:
        q = _parse_point(self.args.q, "q") if self.args.q else self.doc["q"]
        if q is None:
            raise InputError("this command needs q (--q or the input document)")
        r = self.basis.r
        if len(q) == 1 and r > 1:
            q = q * r
        if len(q) != r:
            raise InputError(f"q needs {r} entries")
        return q

    def z(self) -> Fraction:
        if self.args.z:
            (z,) = _parse_point(self.args.z, "z")
        else:
            z = self.doc["z"] if self.doc["z"] is not None else Fraction(1)
        if z == 0:
            raise InputError("z must be nonzero")
        return z

    def tol_or(self, default: float) -> float:
        return self.tol if self.tol is not None else default


def _mp(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


# ---------------------------------------------------------------------------
# commands; each returns (result, failures, table)

def box_rows(ctx: Context) -> list[dict]:
    rows = []
    for s in ctx.inertia.box:
        free, tor = s.v
        rows.append({"index": s.index, "d": [str(x) for x in s.d], "v_free": list(free),
                     "v_torsion": list(tor), "age": str(s.age), "n_v": s.n_v,
                     "support": _one_based(s.support), "inv": s.inv})
    return rows


def cmd_validate(ctx: Context):
    from .stack import weak_fano_check
    X, B = ctx.inertia, ctx.basis
    res = {
        "n": X.n, "m": X.m, "r": X.r,
        "minimal_anticones": [_one_based(I) for I in X.minimal_anticones],
        "anticone_count": len(X.anticones),
        "rays": [{"free": list(f), "torsion": list(t)} for f, t in X.rays],
        "N_torsion": list(X.N.torsion),
        "m_prime": X.m_prime,
        "redundant": _one_based(X.redundant),
        "box": box_rows(ctx),
        "basis_p": [list(row) for row in B.P],
        "rho_hat": list(B.rho_hat), "rho": list(B.rho),
        "rho_nonnegative": B.rho_nonnegative,
        "weak_fano": weak_fano_check(B) if ctx.doc["weak_fano"] else {"weak_fano": False},
    }
    return res, [], None


def cmd_box(ctx: Context):
    rows = box_rows(ctx)
    table = [["index", "d", "v_free", "v_torsion", "age", "n_v", "support", "inv"]]
    for r in rows:
        table.append([r["index"], " ".join(r["d"]), " ".join(map(str, r["v_free"])),
                      " ".join(map(str, r["v_torsion"])), r["age"], r["n_v"],
                      " ".join(map(str, r["support"])), r["inv"]])
    return {"box": rows, "count": len(rows)}, [], table


def cmd_cohomology(ctx: Context):
    from . import lattice as la
    coh = ctx.coh
    sectors = []
    for v, R in enumerate(coh.rings):
        sectors.append({"sector": v, "dim": R.dim, "top_degree": R.top,
                        "basis": [R.monomial_name(i) for i in range(R.dim)],
                        "degrees": list(R.degree_of), "top_integral": str(R.top_integral)})
    det = la.det(coh.gram())
    failures = [] if det != 0 else [{"check": "poincare_pairing", "det": "0"}]
    return {"dimension": coh.dimension, "sectors": sectors,
            "pairing_determinant": str(det)}, failures, None


def cmd_gamma(ctx: Context):
    ch = ctx.chern
    order = int(ctx.order)
    tol = ctx.tol_or(1e-10)
    errs = {v: ch.gamma_todd_identity_check(v, order) for v in range(len(ctx.coh.rings))}
    failures = [{"check": "gamma_todd", "sector": v, "error": ctx.fmt(e)}
                for v, e in errs.items() if e >= tol]
    res = {"gamma_class": ctx.fmt.cls(ch.gamma_class_TX()),
           "todd_class": ctx.fmt.cls(ch.todd_class_TX()),
           "identity_error": {str(v): ctx.fmt(e) for v, e in errs.items()},
           "order": order, "tolerance": tol}
    return res, failures, None


def cmd_chi(ctx: Context):
    from .chern import KClass
    from .errors import NonIntegerChi
    B = ctx.basis
    k = int(ctx.order)
    rows, failures = [], []
    for c in product(range(-k, k + 1), repeat=B.r):
        xi = tuple(int(x) for x in B.from_coords(c))
        try:
            val = ctx.chern.chi(KClass.line(xi), tol=ctx.tol_or(1e-8))
            rows.append({"p_coords": list(c), "xi": list(xi), "chi": val})
        except NonIntegerChi as e:
            failures.append({"check": "chi_integral", "xi": list(xi),
                             "value": ctx.fmt(e.witness)})
    table = [["p_coords", "xi", "chi"]] + [[" ".join(map(str, r["p_coords"])),
                                            " ".join(map(str, r["xi"])), r["chi"]] for r in rows]
    return {"line_bundles": rows}, failures, table


def cmd_gram(ctx: Context):
    from . import lattice as la
    from .chern import KClass, line_bundle_basis, mukai_gram
    ch = ctx.chern
    tol = ctx.tol_or(1e-8)
    xs = line_bundle_basis(ch)
    G = mukai_gram(ch, xs)
    Gi = [[int(mpmath.nint(mpmath.re(x))) for x in row] for row in G]
    int_err = max(float(abs(x - gi)) for row, grow in zip(G, Gi) for x, gi in zip(row, grow))
    lines = [KClass.line(x) for x in xs]
    sol_err = max(float(abs(ch.sol_pairing(a, b) - G[i][j]))
                  for i, a in enumerate(lines) for j, b in enumerate(lines))
    det = int(la.det(Gi))
    failures = []
    if int_err >= tol:
        failures.append({"check": "gram_integral", "error": ctx.fmt(int_err)})
    if abs(det) != 1:
        failures.append({"check": "gram_unimodular", "det": det})
    if sol_err >= tol:
        failures.append({"check": "sol_pairing", "error": ctx.fmt(sol_err)})
    res = {"basis_xi": [list(x) for x in xs], "gram": Gi, "determinant": det,
           "max_integer_distance": ctx.fmt(int_err), "sol_pairing_discrepancy": ctx.fmt(sol_err),
           "tolerance": tol}
    table = [[f"L{j}" for j in range(len(xs))]] + Gi
    return res, failures, table


def _laurent(ctx: Context, L: dict) -> dict:
    return {str(k): [str(x) for x in L[k]] for k in sorted(L)}


def cmd_ifun(ctx: Context):
    from .hypergeom import IFunction
    coh = ctx.coh
    I = IFunction(coh).series(ctx.order)
    terms = []
    for d in I.keys():
        v, L = I.terms[d]
        terms.append({"d": [str(x) for x in d], "q_exponent": [str(x) for x in coh.basis.q_exponent(d)],
                      "sector": v, "z_powers": _laurent(ctx, L)})
    return {"terms": terms, "sector_bases": [[R.monomial_name(i) for i in range(R.dim)]
                                             for R in coh.rings]}, [], None


def cmd_mirror_map(ctx: Context):
    from .hypergeom import mirror_map
    mm = mirror_map(ctx.coh, ctx.order)
    res = {
        "log_part": [str(x) for x in mm.log_part] if mm.log_part else [],
        "corrections": [{"d": [str(x) for x in d], "class": ctx.fmt.cls(c)}
                        for d, c in sorted(mm.corrections.items())],
        "extra_ray_coefficients": {str(j + 1): ctx.fmt.cls(c) for j, c in sorted(mm.frD.items())},
        "trivial": mm.is_trivial(),
    }
    return res, [], None


def cmd_gkz_check(ctx: Context):
    from .errors import AnnihilationFailure
    from .hypergeom import gkz_annihilation_check
    try:
        reps = gkz_annihilation_check(ctx.coh, ctx.order)
    except AnnihilationFailure as e:
        return {"message": str(e)}, [{"check": "gkz", "witness": ctx.fmt(e.witness)}], None
    res = {"generators": [{"d": list(r.generator), "coefficients_checked": r.checked}
                          for r in reps],
           "message": f"exact zero through order {ctx.order}"}
    return res, [], None


def cmd_central_charge(ctx: Context):
    from .hypergeom import central_charge
    from .chern import KClass
    q, z = ctx.q(), ctx.z()
    qm, zm = [_mp(x) for x in q], _mp(z)
    tol = ctx.tol_or(1e-12)
    ch = ctx.chern
    out, failures = {}, []
    for label, V in (("structure_sheaf", KClass.line((0,) * ctx.basis.r)),
                     ("skyscraper", ch.skyscraper())):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", TruncationWarning)
            val = central_charge(ch, V, qm, zm, ctx.order, tol=tol)
        notes = [str(w.message) for w in caught if issubclass(w.category, TruncationWarning)]
        out[label] = {"value": ctx.fmt(mpmath.mpc(val)), "truncation": notes}
        if notes:
            failures.append({"check": "truncation", "class": label, "message": notes[0]})
    out["q"] = [str(x) for x in q]
    out["z"] = str(z)
    return out, failures, None


def cmd_lg_check(ctx: Context):
    from .mirror_lg import (build_lg, jacobi_critical_points, kouchnirenko_face_check,
                            relation_strings, volume_rank_check)
    model = build_lg(ctx.basis)
    q = ctx.q()
    qc = [complex(float(x)) for x in q]
    failures = []
    from .errors import IdentityViolated
    try:
        vol = volume_rank_check(model, ctx.coh.dimension)
    except IdentityViolated as e:
        vol = {"ok": False, "witness": list(e.witness)}
        failures.append({"check": "volume_rank", "witness": list(e.witness)})
    crit = jacobi_critical_points(model, qc, check=False)
    tol = ctx.tol_or(1e-10)
    if crit.count != crit.expected:
        failures.append({"check": "critical_count", "found": crit.count, "expected": crit.expected})
    if crit.max_residual >= tol:
        failures.append({"check": "batyrev_residual", "residual": ctx.fmt(crit.max_residual)})
    faces = kouchnirenko_face_check(model, qc, raise_on_witness=False)
    wits = [f for f in faces if f.witness is not None]
    for f in wits:
        failures.append({"check": "kouchnirenko", "face": _one_based(f.face),
                         "component": list(f.witness[1])})
    res = {
        "potential": model.describe(),
        "batyrev_relations": relation_strings(ctx.basis),
        "volume_rank": vol,
        "critical_points": {
            "count": crit.count, "expected": crit.expected, "paths": crit.paths,
            "max_residual": ctx.fmt(crit.max_residual),
            "values": [ctx.fmt(complex(c.value)) for c in crit.points],
            "multiplicities": [c.multiplicity for c in crit.points],
        },
        "faces_checked": len(faces),
        "degenerate_faces": [_one_based(f.face) for f in wits],
        "q": [str(x) for x in q],
    }
    return res, failures, None


def cmd_verify_mirror(ctx: Context):
    from .mirror_lg import build_lg
    from .oscint import verify_mirror_identities
    q, z = ctx.q(), ctx.z()
    if any(x <= 0 for x in q) or z <= 0:
        raise InputError("verify-mirror needs positive real q and z")
    rep = verify_mirror_identities(ctx.chern, build_lg(ctx.basis), [_mp(x) for x in q],
                                   float(z), ctx.order, tol=ctx.tol_or(1e-6))
    rep["q"] = [str(x) for x in q]
    rep["z"] = str(z)
    rep.pop("conventions")
    failures = [{"check": k, "relative_error": ctx.fmt(rep[k]["relative_error"])}
                for k in ("structure_sheaf", "skyscraper") if not rep[k]["ok"]]
    return rep, failures, None


COMMANDS: dict[str, Callable] = {
    "validate": cmd_validate,
    "box": cmd_box,
    "cohomology": cmd_cohomology,
    "gamma": cmd_gamma,
    "chi": cmd_chi,
    "gram": cmd_gram,
    "ifun": cmd_ifun,
    "mirror-map": cmd_mirror_map,
    "gkz-check": cmd_gkz_check,
    "central-charge": cmd_central_charge,
    "lg-check": cmd_lg_check,
    "verify-mirror": cmd_verify_mirror,
}


def conventions() -> dict:
    from .oscint import CONVENTIONS
    rec = dict(CONVENTIONS)
    rec["log_q_branch"] = "principal branch unless log q is supplied"
    return rec


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toricmirror",
                                description="Checks for toric orbifolds and their Landau-Ginzburg mirrors.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--input", required=True, help="input document (JSON)")
    p.add_argument("--order", help="truncation order |d| ≤ order (rational allowed)")
    p.add_argument("--digits", type=int, help=f"working precision (default ${DIGITS_ENV} or {DEFAULT_DIGITS})")
    p.add_argument("--q", help="comma-separated q values, e.g. 1/100 or 0.01,0.02")
    p.add_argument("--z", help="z value")
    p.add_argument("--tol", type=float, help="tolerance for numerical checks")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def _write(report: dict, table, fmt: str, out) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(table)
        out.write(buf.getvalue())
    else:
        out.write(json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n")


def _error(command: str, kind: str, err: Exception, fmt: Formatter) -> dict:
    rec = {"schema_version": SCHEMA_VERSION, "command": command, "ok": False,
           "error": {"kind": kind, "type": type(err).__name__, "message": str(err)}}
    witness = getattr(err, "witness", None)
    if witness is not None:
        try:
            rec["error"]["witness"] = fmt(witness)
        except TypeError:
            rec["error"]["witness"] = repr(witness)
    return rec


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    fallback = Formatter(DEFAULT_DIGITS)
    if args.digits is not None and args.digits < 5:
        _write(_error(args.command, "input", InputError("--digits must be ≥ 5"), fallback), None, "json", out)
        return 2
    try:
        with open(args.input, encoding="utf-8") as fh:
            doc = parse_document(json.load(fh))
        ctx = Context(doc, args)
        if args.format == "csv" and args.command not in ("box", "chi", "gram"):
            raise InputError("csv output is available for box, chi and gram")
    except (OSError, json.JSONDecodeError) as e:
        _write(_error(args.command, "input", e, fallback), None, "json", out)
        return 2
    except INPUT_ERRORS as e:
        _write(_error(args.command, "input", e, fallback), None, "json", out)
        return 2
    with mpmath.workdps(ctx.digits):
        try:
            result, failures, table = COMMANDS[args.command](ctx)
        except INPUT_ERRORS as e:
            _write(_error(args.command, "input", e, ctx.fmt), None, "json", out)
            return 2
        except ToricError as e:
            rep = _error(args.command, "check", e, ctx.fmt)
            rep["failures"] = [{"check": type(e).__name__, "message": str(e)}]
            _write(rep, None, "json", out)
            return 1
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "name": doc["name"],
        "digits": ctx.digits,
        "certified_order": str(ctx.order),
        "conventions": conventions(),
        "result": ctx.fmt(result),
        "failures": ctx.fmt(failures),
        "ok": not failures,
    }
    _write(report, table, args.format, out)
    return 0 if not failures else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
