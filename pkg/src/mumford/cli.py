"""Command-line front end: one subcommand per operation, canonical JSON (or CSV) on stdout.

Exit codes: 0 success, 1 a mathematical check failed, 2 invalid input or budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from typing import Any, Sequence

from . import amalgam, catalog, curves, schottky, strat
from .grpcat import NonHomomorphism, NotEmbeddable, spec_to_json

BUDGET_ENV = "MUMFORD_BUDGET"


class CheckFailed(Exception):
    """Carries a report whose mathematical check failed (exit 1)."""

    def __init__(self, report: Any):
        super().__init__("check failed")
        self.report = report


# ---------------------------------------------------------------------------
# output


def _jsonable(x: Any) -> Any:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    if hasattr(x, "to_json"):
        return _jsonable(x.to_json())
    return str(x)


def _emit(report: Any, fmt: str, out) -> None:
    data = _jsonable(report)
    if fmt == "csv":
        rows = data.get("rows") if isinstance(data, dict) else data
        if not isinstance(rows, list) or not rows or not all(isinstance(r, dict) for r in rows):
            rows = [data] if isinstance(data, dict) else [{"value": data}]
        keys = sorted({k for r in rows for k in r})
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v for k, v in r.items()})
        out.write(buf.getvalue())
    else:
        out.write(json.dumps(data, sort_keys=True, indent=None) + "\n")


def _load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path} is not valid JSON: {exc}") from None


def _tree(path: str) -> amalgam.TreeOfGroups:
    return amalgam.TreeOfGroups.from_json(_load_json(path))


def _rational(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}") from None


def _partition(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"partition must be comma-separated integers: {s!r}") from None


# ---------------------------------------------------------------------------
# amalgam and catalog commands


def cmd_mu(a) -> Any:
    return {"mu": amalgam.mu(_tree(a.tree))}


def cmd_branch(a) -> Any:
    b = amalgam.branch_count(_tree(a.tree))
    return {"total": b.total, "max3": b.max3, "maxp": b.maxp, "indecomposable": b.indecomposable}


def cmd_ramify(a) -> Any:
    r = amalgam.ramification(_tree(a.tree))
    return {"branch_groups": [spec_to_json(g) for g in r.branch_groups], "indices": list(r.indices)}


def cmd_realizable(a) -> Any:
    t = _tree(a.tree)
    bad = amalgam.validate(t)
    if bad:
        return {"realizable": "no", "violations": [str(v) for v in bad]}
    fam = catalog.match_family(t)
    return {"realizable": amalgam.realizable(t), "family": None if fam is None else fam.family_id}


def cmd_enumerate(a) -> Any:
    fn = catalog.enumerate_two_branch if a.kind == "two" else catalog.enumerate_three_branch
    rows = []
    for inst in fn(a.p, a.qmax, a.nmax):
        row = {"family_id": inst.family_id, "params": dict(inst.params), "truncated": inst.truncated,
               "mu": amalgam.mu(inst.tree), "branch": amalgam.branch_count(inst.tree).total}
        if a.trees:
            row["tree"] = inst.tree.to_json()
        rows.append(row)
    return {"p": a.p, "count": len(rows), "rows": rows}


def _row_report(r: catalog.BoundRow) -> dict:
    return {"family_id": r.family_id, "params": dict(r.params), "N0": r.N0, "mu": r.mu, "g0": r.g0,
            "mu_computed": r.mu_computed, "checks": r.checks(), "ok": r.ok,
            "suitable": catalog.suitable(r.N0, r.mu) if r.mu > 0 else False}


def cmd_tables(a) -> Any:
    rows = [_row_report(r) for r in catalog.bound_tables(a.p, a.q)]
    if a.table:
        rows = [r for r in rows if r["family_id"].startswith(a.table + ".")]
    rep = {"p": a.p, "q": a.q, "rows": rows, "all_ok": all(r["ok"] for r in rows)}
    if not rep["all_ok"]:
        raise CheckFailed(rep)
    return rep


def cmd_bound(a) -> Any:
    out: dict[str, Any] = {}
    if a.g is not None:
        fv = catalog.f_bound(a.g)
        out["F"] = {"g": a.g, "exact": fv.exact, "floor": fv.floor}
        if a.p is not None:
            ab = catalog.aut_bound(a.g, a.p)
            out["aut_bound"] = {"value": ab.value, "bound": ab.bound, "exception": ab.exception, "max_g": ab.max_g}
    if a.N0 is not None:
        if a.mu is None:
            raise ValueError("--N0 needs --mu")
        out["suitable"] = catalog.suitable(a.N0, a.mu)
        out["g0"] = 1 + a.mu * a.N0
    if not out:
        raise ValueError("give --g (with optional --p) or --N0 with --mu")
    return out


# ---------------------------------------------------------------------------
# schottky commands


def _cert(c: schottky.SchottkyCertificate, hom_out: str | None = None) -> Any:
    rep = c.to_json()
    if c.hom is not None:
        rep["name"] = c.hom.name
        rep["params"] = c.hom.params
        rep["mu"] = amalgam.mu(c.hom.tree)
        if hom_out:
            with open(hom_out, "w", encoding="utf-8") as fh:
                json.dump(schottky.hom_to_json(c.hom), fh, sort_keys=True)
    if not c.valid:
        raise CheckFailed(rep)
    return rep


def cmd_schottky_verify(a) -> Any:
    hom = schottky.hom_from_json(_load_json(a.hom))
    return _cert(schottky.verify_hom(hom, budget=a.budget))


def cmd_schottky_build(a) -> Any:
    fn, names = schottky.NAMED.get(a.name, (None, ()))
    if fn is None:
        raise ValueError(f"unknown construction {a.name!r}; known: {', '.join(schottky.NAMED)}")
    params = {}
    for k in names:
        v = getattr(a, k, None)
        if v is None:
            if k == "pgl":
                v = False
            else:
                raise ValueError(f"{a.name} needs --{k.replace('_', '-')}")
        params[k] = v
    hom = schottky.build_named(a.name, **params)
    return _cert(schottky.verify_hom(hom, budget=a.budget), a.out)


def cmd_schottky_search(a) -> Any:
    t = _tree(a.tree)
    s = a.s if a.s is not None else schottky.least_common_exponent(t)
    r = schottky.search_hom(t, s, budget=a.budget)
    if r is None:
        return {"found": False, "s": s}
    rep = {"found": True, "s": s, "image": r.image, "predicted": r.predicted, "matches": r.matches,
           "certificate": r.certificate.to_json()}
    if r.matches is False or not r.certificate.valid:
        raise CheckFailed(rep)
    return rep


def cmd_schottky_count(a) -> Any:
    t = _tree(a.tree)
    cands = schottky.count_candidates(a.candidates, a.order) if a.order > 1 else []
    r = schottky.count_index_homs(t, a.order, cands, budget=a.budget)
    return {"order": a.order, "kernels": r.kernels,
            "per_candidate": [{"name": c.name, "homs": c.homs, "automorphisms": c.automorphisms, "kernels": c.kernels}
                              for c in r.per_candidate]}


# ---------------------------------------------------------------------------
# curves and strat commands


def _curve_from_args(a) -> curves.HomogPoly3:
    if getattr(a, "curve", None):
        return curves.HomogPoly3.from_json(_load_json(a.curve))
    if not a.family or a.q is None:
        raise ValueError("give --curve FILE or --family with --q")
    return curves.build_curve(a.family, a.q, w=a.w, lam=a.lam, lam_s=a.lam_s)


def cmd_curve_build(a) -> Any:
    return _curve_from_args(a).to_json()


def cmd_curve_report(a) -> Any:
    C = _curve_from_args(a)
    try:
        r = curves.genus_report(C, a.ext, budget=a.budget)
    except curves.NonNodal as exc:
        raise CheckFailed({"error": str(exc)}) from None
    return r.to_json()


def cmd_strat_tame(a) -> Any:
    if a.i is not None:
        c, o = strat.tame_coeff(a.i, a.m, a.n, a.p), strat.tame_oracle(a.i, a.m, a.n, a.p)
        rep = {"coeff": c, "oracle": o, "agree": c == o}
        if c != o:
            raise CheckFailed(rep)
        return rep
    bad, total = [], 0
    for m in range(1, a.m + 1):
        if m % a.p == 0:
            continue
        for n in range(a.n + 1):
            for i in range(m):
                total += 1
                if strat.tame_coeff(i, m, n, a.p) != strat.tame_oracle(i, m, n, a.p):
                    bad.append([i, m, n])
    rep = {"p": a.p, "cells": total, "mismatches": bad}
    if bad:
        raise CheckFailed(rep)
    return rep


def cmd_strat_as(a) -> Any:
    res = strat.as_series(a.p, max(a.nx, a.nmax), a.nt)
    rows = []
    for n in range(1, a.nmax + 1):
        f = strat.as_f(n, a.p, a.imax, res=res)
        v = strat.as_derivative(res, 1, n).valuation()
        rows.append({"n": n, "f": f.f, "val_dt": v, "val_predicted": 1 + n - 2 * n * a.p,
                     "exceeds_n": f.exceeds_n, "exceeds_3n_over_2": f.exceeds_3n_over_2})
    return {"p": a.p, "identity_ok": res.identity_ok, "rows": rows}


# ---------------------------------------------------------------------------
# reproduction


TABLE_ALIASES = {"n0-lcm": "8.4", "n0-strict": "8.5", "mu-twelfth": "prop-8.1", "small-mu-thresholds": "lists-6.3"}


def cmd_repro(a) -> Any:
    t = TABLE_ALIASES.get(a.table, a.table)
    if t in ("8.4", "8.5"):
        p = a.p
        qs = [q for q in range(2, a.qmax + 1) if catalog._ppower(q, p)]
        rows = []
        for q in qs:
            for r in catalog.bound_tables(p, q):
                if r.family_id.startswith(t + "."):
                    rows.append(dict(_row_report(r), q=q))
        rep = {"table": t, "p": p, "rows": rows, "all_ok": all(r["ok"] for r in rows)}
        if not rep["all_ok"]:
            raise CheckFailed(rep)
        return rep
    if t == "prop-8.1":
        rows = [{"family_id": i.family_id, "mu": amalgam.mu(i.tree),
                 "realizable_simple": amalgam.realizable_simple(i.tree.vertices[0][1], i.tree.edges[0].group,
                                                                i.tree.vertices[1][1], a.p)}
                for i in catalog.mu_twelfth(a.p)]
        ok = all(r["mu"] == Fraction(1, 12) and r["realizable_simple"] for r in rows)
        rep = {"p": a.p, "count": len(rows), "rows": rows, "all_ok": ok}
        if not ok:
            raise CheckFailed(rep)
        return rep
    if t == "lists-6.3":
        rows = [{"label": c.label, "claim": c.claim, "below": c.below, "above": c.above, "ok": c.ok, "note": c.note}
                for c in catalog.threshold_checks()]
        failed = [r["label"] for r in rows if not r["ok"]]
        rep = {"rows": rows, "failed": failed, "all_ok": not failed}
        if failed:
            raise CheckFailed(rep)
        return rep
    raise ValueError(f"unknown table {t!r}")  # pragma: no cover - argparse choices


# ---------------------------------------------------------------------------
# parser


def _default_budget() -> int:
    env = os.environ.get(BUDGET_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            pass
    return 10**7


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mumford", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--budget", type=int, default=None,
                    help=f"element/scan budget (default ${BUDGET_ENV} or 10^7); exceeding it exits 2")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.set_defaults(fn=fn)
        return sp

    def tree_arg(sp):
        sp.add_argument("--tree", required=True, help="tree-of-groups JSON file")

    sp = add("mu", cmd_mu, "mu(tree) = sum 1/|edge group| - sum 1/|vertex group| (the genus-index formula)")
    tree_arg(sp)
    sp = add("branch", cmd_branch, "branch-point count by both counting formulas")
    tree_arg(sp)
    sp = add("ramify", cmd_ramify, "ramification groups and indices at the branch points")
    tree_arg(sp)
    sp = add("realizable", cmd_realizable, "realizability verdict: yes, no or unknown")
    tree_arg(sp)
    sp = add("enumerate", cmd_enumerate, "two- and three-branch-point family instances")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--kind", choices=("two", "three"), default="two")
    sp.add_argument("--qmax", type=int, default=9)
    sp.add_argument("--nmax", type=int, default=3)
    sp.add_argument("--trees", action="store_true", help="include the trees")
    sp = add("tables", cmd_tables, "N0 bound table rows at one (p, q), printed against recomputed values")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--table", choices=("8.4", "8.5"))
    sp = add("bound", cmd_bound, "F(g), the automorphism bound, and suitability of (N0, mu)")
    sp.add_argument("--g", type=int)
    sp.add_argument("--p", type=int)
    sp.add_argument("--N0", type=int)
    sp.add_argument("--mu", type=_rational)

    sp = add("schottky-verify", cmd_schottky_verify, "certify a homomorphism with torsion-free kernel; genus twice")
    sp.add_argument("--hom", required=True, help="hom JSON file")
    sp = add("schottky-build", cmd_schottky_build, "build and certify a named construction")
    sp.add_argument("--name", required=True, choices=sorted(schottky.NAMED))
    for k in ("q", "d", "l", "n", "g", "m", "choice", "a", "a2"):
        sp.add_argument(f"--{k}", type=int)
    sp.add_argument("--partition", type=_partition)
    sp.add_argument("--pgl", action="store_true")
    sp.add_argument("--out", help="also write the hom JSON here")
    sp = add("schottky-search", cmd_schottky_search, "search for a hom into PGL2(F_{p^s}); PSL/PGL image prediction")
    tree_arg(sp)
    sp.add_argument("--s", type=int)
    sp = add("schottky-count", cmd_schottky_count, "count normal Schottky kernels of a given index among candidates")
    tree_arg(sp)
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--candidates", choices=("h2", "d3d2"), default="h2")

    def curve_args(sp):
        sp.add_argument("--curve", help="curve JSON file")
        sp.add_argument("--family", choices=curves.FAMILIES)
        sp.add_argument("--q", type=int)
        sp.add_argument("--w", type=int)
        sp.add_argument("--lam", type=int)
        sp.add_argument("--lam-s", dest="lam_s", type=int)

    sp = add("curve-build", cmd_curve_build, "the plane curve equations with PGL2 symmetry")
    curve_args(sp)
    sp = add("curve-report", cmd_curve_report, "singular points over F_{Q^ext}, node types, Pluecker genus")
    curve_args(sp)
    sp.add_argument("--ext", type=int, default=1)
    sp = add("strat-tame", cmd_strat_tame, "tame divided-derivative coefficients binom(i/m, n) against series")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--i", type=int, help="single cell; otherwise the grid m' <= m, n' <= n")
    sp = add("strat-as", cmd_strat_as, "Artin-Schreier divided derivatives: series identity, valuations, f(n)")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--nx", type=int, default=8)
    sp.add_argument("--nt", type=int)
    sp.add_argument("--nmax", type=int, default=5)
    sp.add_argument("--imax", type=int)
    sp = add("repro", cmd_repro, "recompute the bound tables, the mu = 1/12 list or the small-mu thresholds")
    sp.add_argument("--table", required=True, choices=("8.4", "8.5", "prop-8.1", "lists-6.3", *TABLE_ALIASES),
                    help="n0-lcm (8.4), n0-strict (8.5), mu-twelfth (prop-8.1), small-mu-thresholds (lists-6.3)")
    sp.add_argument("--p", type=int, default=5)
    sp.add_argument("--qmax", type=int, default=9)
    return ap


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if a.budget is None:
        a.budget = _default_budget()
    try:
        report = a.fn(a)
    except CheckFailed as exc:
        _emit(exc.report, a.format, out)
        return 1
    except NonHomomorphism as exc:
        _emit({"error": str(exc), "witness": str(exc.witness)}, a.format, out)
        return 1
    except (schottky.BudgetExceeded, curves.BudgetExceeded, MemoryError) as exc:
        _emit({"error": f"budget exceeded: {exc}"}, a.format, out)
        return 2
    except (ValueError, NotEmbeddable, KeyError, strat.PrecisionError) as exc:
        _emit({"error": str(exc)}, a.format, out)
        return 2
    _emit(report, a.format, out)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
