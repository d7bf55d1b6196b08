"""Command-line front end.

Exit status: 0 on success, 1 when a check fails (a JSON mismatch report is
printed), 2 on input, parse or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__, suite
from .correlator import CheckReport, check_dilaton_closed_form, check_wallcrossing_identity
from .localization import (
    assemble_J_function,
    check_genus0_resummation,
    check_residue,
    enumerate_fixed_points,
    node_data,
    residue_relation,
)
from .model import (
    ModelError,
    ModelSpec,
    classify_state,
    epsilon_gamma,
    parse_gamma,
    quintic,
    selection_rule,
    virtual_dimension,
)
from .mu import BroadMode, StateVector, extract_I_functions, mu_ring, mu_series
from .series import format_rational, laurent_truncate_minus, laurent_truncate_plus

THREADS_ENV = "WALLCROSS_THREADS"
MAX_T_DEGREE = 12
MAX_LIGHT = 10


class UsageError(ValueError):
    pass


# -- parsing helpers -------------------------------------------------------------


def load_model(source: str) -> ModelSpec:
    """A JSON/TOML model file, the name ``quintic``, or inline ``r:w1,w2,...``."""
    path = Path(source)
    if path.is_file():
        return ModelSpec.load(path)
    if source == "quintic":
        return quintic()
    if ":" in source:
        r, _, weights = source.partition(":")
        return ModelSpec(int(r), tuple(int(w) for w in weights.split(",") if w))
    raise FileNotFoundError(f"model file not found: {source}")


def parse_ints(text: str) -> list[int]:
    return [int(x) for x in text.replace(" ", "").split(",") if x]


def parse_perturb(items: list[str] | None) -> dict:
    """``b1,b2,...=delta`` entries, delta a rational."""
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"perturbation {item!r} must look like 2,2=1")
        out[tuple(sorted(parse_ints(key)))] = Fraction(value)
    return out


def bounded(value: int, name: str, limit: int = MAX_T_DEGREE) -> int:
    if not 0 <= value <= limit:
        raise UsageError(f"{name} must be between 0 and {limit}")
    return value


# -- output ----------------------------------------------------------------------


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def monomial_text(md: dict) -> str:
    return "*".join(g if e == 1 else f"{g}^{e}" for g, e in md.items()) or "1"


def vector_output(vec: StateVector, fmt: str) -> str:
    if fmt == "json":
        return dump_json(vec.to_json())
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["component", "monomial", "num", "den"])
        for a, comp in enumerate(vec.components, 1):
            for item in comp.to_json():
                w.writerow([f"phi{a}", monomial_text(item["monomial"]), item["num"], item["den"]])
        return buf.getvalue().rstrip("\n")
    return vec.to_text()


def mapping_output(data: dict, fmt: str) -> str:
    if fmt == "json":
        return dump_json(data)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in data.items():
            w.writerow([k, v if isinstance(v, str) else json.dumps(v, sort_keys=True)])
        return buf.getvalue().rstrip("\n")
    lines = []
    for k, v in data.items():
        lines.append(f"{k}: {v if isinstance(v, str) else json.dumps(v, sort_keys=True)}")
    return "\n".join(lines)


def table_output(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return dump_json(rows)
    if not rows:
        return ""
    keys = list(rows[0])
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, keys, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: json.dumps(v) if isinstance(v, (list, bool)) or v is None else v for k, v in row.items()})
        return buf.getvalue().rstrip("\n")
    cells = [["-" if row[k] is None else str(row[k]) for k in keys] for row in rows]
    widths = [max(len(k), *(len(c[i]) for c in cells)) for i, k in enumerate(keys)]
    lines = ["  ".join(k.ljust(wd) for k, wd in zip(keys, widths))]
    lines += ["  ".join(c.ljust(wd) for c, wd in zip(row, widths)) for row in cells]
    return "\n".join(line.rstrip() for line in lines)


def report_output(report: CheckReport, fmt: str) -> tuple[str, int]:
    if not report.ok or fmt == "json":
        return dump_json(report.to_json()), 0 if report.ok else 1
    return report.summary(), 0


# -- commands --------------------------------------------------------------------


def cmd_mu(args) -> tuple[str, int]:
    model = load_model(args.model)
    variables = parse_ints(args.vars) if args.vars else list(range(1, model.r + 1))
    ring = mu_ring(model, bounded(args.max_deg, "--max-deg"), variables, twisted=args.twisted)
    vec = mu_series(model, ring, variables, args.broad_mode, twisted=args.twisted)
    if args.part == "plus":
        vec = vec.map(laurent_truncate_plus)
    elif args.part == "minus":
        vec = vec.map(laurent_truncate_minus)
    return vector_output(vec, args.format), 0


def cmd_ifunc(args) -> tuple[str, int]:
    model = load_model(args.model)
    n = bounded(args.max_deg, "--max-deg")
    I0, I1 = extract_I_functions(model, n)

    def coefficients(s):
        return [format_rational(s.coefficient({"t2": d})) for d in range(n + 1)]

    if args.format == "text":
        return f"I0 = {I0.to_text()}\nI1 = {I1.to_text()}", 0
    data = {"max_degree": n, "I0": coefficients(I0), "I1": coefficients(I1)}
    if args.format == "csv":
        rows = [{"degree": d, "I0": a, "I1": b} for d, (a, b) in enumerate(zip(data["I0"], data["I1"]))]
        return table_output(rows, "csv"), 0
    return dump_json(data), 0


def _gamma(args, model):
    gamma = parse_gamma(args.gamma, model.r)
    gamma.check_range(model.r)
    return gamma


def cmd_vdim(args) -> tuple[str, int]:
    model = load_model(args.model)
    gamma = _gamma(args, model)
    data = {
        "ordinary": format_rational(virtual_dimension(model, gamma)),
        "master": format_rational(virtual_dimension(model, gamma, master=True)),
    }
    return mapping_output(data, args.format), 0


def cmd_selection(args) -> tuple[str, int]:
    model = load_model(args.model)
    gamma = _gamma(args, model)
    holds = selection_rule(model, gamma)
    if args.format == "json":
        return dump_json({"gamma": str(gamma), "selection_rule": holds}), 0
    return mapping_output({"gamma": str(gamma), "selection_rule": str(holds).lower()}, args.format), 0


def cmd_epsilon(args) -> tuple[str, int]:
    model = load_model(args.model)
    gamma = _gamma(args, model)
    return mapping_output({"gamma": str(gamma), "epsilon": format_rational(epsilon_gamma(model, gamma))}, args.format), 0


def cmd_classify(args) -> tuple[str, int]:
    model = load_model(args.model)
    states = [args.state] if args.state is not None else range(1, model.r + 1)
    rows = [{"state": a, "kind": classify_state(model, a).value} for a in states]
    return table_output(rows, args.format), 0


def cmd_node_data(args) -> tuple[str, int]:
    model = load_model(args.model)
    values = parse_ints(args.J)
    if not values or len(values) > MAX_LIGHT:
        raise UsageError(f"--J needs between 1 and {MAX_LIGHT} entries")
    d = node_data(model, values).to_dict()
    rows = [{k: d[k] for k in ("values", "k", "ell", "a_infinity", "r_prime", "c")}]
    return table_output(rows, args.format), 0


def cmd_fixed_points(args) -> tuple[str, int]:
    model = load_model(args.model)
    gamma = _gamma(args, model)
    if gamma.n > MAX_LIGHT:
        raise UsageError(f"at most {MAX_LIGHT} light markings")
    rows = []
    for datum in enumerate_fixed_points(model, gamma, args.genus0):
        d = datum.to_dict()
        rows.append({
            "component": datum.label(),
            "J": d["J"],
            "k": d["k"],
            "ell": d["ell"],
            "a_infinity": d["a_infinity"],
            "r_prime": d["r_prime"],
            "c": d["c"],
        })
    return table_output(rows, args.format), 0


def cmd_jfunc(args) -> tuple[str, int]:
    model = load_model(args.model)
    res = assemble_J_function(
        model, bounded(args.t_deg, "--t-deg"), bounded(args.u_deg, "--u-deg", 4), bounded(args.psi_deg, "--psi-deg", 6)
    )
    if not res.report.ok:
        return dump_json(res.report.to_json()), 1
    if args.format == "json":
        return dump_json({"J": res.resummed.to_json(), "check": res.report.to_json()}), 0
    return f"{res.resummed.to_text()}\n{res.report.summary()}", 0


def cmd_check(args) -> tuple[str, int]:
    model = load_model(args.model)
    kind = args.check
    if kind == "wallcross":
        report = check_wallcrossing_identity(
            model,
            args.genus,
            bounded(args.t_deg, "--t-deg"),
            bounded(args.u_deg, "--u-deg", 4),
            bounded(args.psi_deg, "--psi-deg", 6),
            g0_mask=args.g0_mask,
            broad_mode=args.broad_mode,
            perturb=parse_perturb(args.perturb),
            selection=not args.no_selection,
            narrow_only=args.narrow_only,
        )
    elif kind == "dilaton":
        report = check_dilaton_closed_form(model, args.genus, bounded(args.t_deg, "--t-deg"))
    elif kind == "genus0":
        report = check_genus0_resummation(model, bounded(args.t_deg, "--t-deg"), parse_perturb(args.perturb))
    elif kind == "residue":
        gamma = _gamma(args, model)
        if gamma.n > MAX_LIGHT:
            raise UsageError(f"at most {MAX_LIGHT} light markings")
        d = parse_ints(args.d) if args.d else None
        if args.genus0:
            rel = residue_relation(model, gamma, d, genus_zero_variant=True, twisted=args.twisted, heavy_psi=args.heavy_psi)
            return dump_json(rel.to_dict()), 0
        report = check_residue(model, gamma, d, args.twisted)
    elif kind == "mu-aggregation":
        models = [model]
        report = suite.mu_aggregation(models, bounded(args.max_deg, "--max-deg", 6))
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(kind)
    return report_output(report, args.format)


def _criterion(index_seed):
    index, seed = index_seed
    return suite.run_criterion(index, seed)


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer") from None


def run_verify_all(seed: int) -> list:
    """Run every acceptance criterion, in parallel when the thread env var asks for it."""
    jobs = [(i, seed) for i in range(len(suite.CRITERIA))]
    workers = thread_count()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_criterion, jobs))
    return [_criterion(j) for j in jobs]


def format_verify_all(results: list, seed: int, fmt: str) -> tuple[str, int]:
    """Deterministic report (no timings) and exit status."""
    ok = all(rep.ok for _, rep in results)
    if fmt == "json":
        body = {
            "seed": seed,
            "ok": ok,
            "criteria": [dict(rep.to_json(), criterion=name) for name, rep in results],
        }
        return dump_json(body), 0 if ok else 1
    lines = [f"verify-all seed={seed}"]
    for name, rep in results:
        lines.append(f"{'PASS' if rep.ok else 'FAIL'} criterion {name}: {rep.compared} compared")
    lines.append("ALL PASS" if ok else "SOME CHECKS FAILED")
    return "\n".join(lines), 0 if ok else 1


def cmd_verify_all(args) -> tuple[str, int]:
    return format_verify_all(run_verify_all(args.seed), args.seed, args.format)


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wallcross", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, gamma=False, fmt=True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--model", required=True, help="model file (JSON/TOML), 'quintic' or 'r:w1,w2,...'")
        if gamma:
            p.add_argument("--gamma", required=True, help='insertion profile "g=G;a1,a2|b1,b2"')
        if fmt:
            p.add_argument("--format", choices=("text", "json", "csv"), default="text")
        p.set_defaults(func=fn)
        return p

    p = add("mu", cmd_mu, "the mu-series")
    p.add_argument("--vars", help="light states, e.g. 2,3 (default: all)")
    p.add_argument("--max-deg", type=int, required=True)
    p.add_argument("--twisted", action="store_true")
    p.add_argument("--broad-mode", type=BroadMode.parse, default=BroadMode.AS_WRITTEN,
                   help="as-written (default) or narrow")
    p.add_argument("--part", choices=("full", "plus", "minus"), default="full")

    p = add("ifunc", cmd_ifunc, "I_0 and I_1 of a Calabi-Yau model")
    p.add_argument("--max-deg", type=int, required=True)

    add("vdim", cmd_vdim, "virtual dimension (ordinary and master space)", gamma=True)
    add("selection", cmd_selection, "selection rule", gamma=True)
    add("epsilon", cmd_epsilon, "sign constant epsilon_gamma", gamma=True)

    p = add("classify", cmd_classify, "narrow/broad classification")
    p.add_argument("--state", type=int)

    p = add("node-data", cmd_node_data, "k, ell, a_infinity, r', c for J-values")
    p.add_argument("--J", required=True, help="values b_j on J, e.g. 2,2,2")

    p = add("fixed-points", cmd_fixed_points, "fixed-point components", gamma=True)
    p.add_argument("--genus0", action="store_true", help="genus-zero variant (one heavy marking)")

    p = add("jfunc", cmd_jfunc, "big J-function in both forms")
    p.add_argument("--t-deg", type=int, required=True)
    p.add_argument("--u-deg", type=int, default=0)
    p.add_argument("--psi-deg", type=int, default=1)

    check = sub.add_parser("check", help="identity checks")
    csub = check.add_subparsers(dest="check", required=True)

    def add_check(name, help_text, gamma=False):
        p = csub.add_parser(name, help=help_text)
        p.add_argument("--model", required=True)
        p.add_argument("--format", choices=("text", "json", "csv"), default="text")
        if gamma:
            p.add_argument("--gamma", required=True)
        p.set_defaults(func=cmd_check)
        return p

    p = add_check("wallcross", "F^0_g(u,t) = F^infinity_g(u + mu^+(t,-psi))")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--t-deg", type=int, required=True)
    p.add_argument("--u-deg", type=int, required=True)
    p.add_argument("--psi-deg", type=int, default=3)
    p.add_argument("--g0-mask", dest="g0_mask", action="store_true", default=None,
                   help="ignore u-degree <= 1 (default on in genus 0)")
    p.add_argument("--no-g0-mask", dest="g0_mask", action="store_false")
    p.add_argument("--broad-mode", type=BroadMode.parse, default=BroadMode.AS_WRITTEN)
    p.add_argument("--no-selection", action="store_true", help="keep symbols violating the selection rule")
    p.add_argument("--narrow-only", action="store_true", help="drop symbols with a broad insertion")
    p.add_argument("--perturb", action="append", help="negative control, e.g. 2,2,2,2,2=1")

    p = add_check("dilaton", "dilaton reduction against the I_0, I_1 closed form")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--t-deg", type=int, required=True)

    p = add_check("genus0", "genus-zero resummation into mu^-")
    p.add_argument("--t-deg", type=int, required=True)
    p.add_argument("--perturb", action="append")

    p = add_check("residue", "localization residue relation", gamma=True)
    p.add_argument("--d", help="descendant powers at the light markings, e.g. 1,0,2")
    p.add_argument("--twisted", action="store_true")
    p.add_argument("--genus0", action="store_true", help="print the genus-zero scalar relation")
    p.add_argument("--heavy-psi", type=int, default=0)

    p = add_check("mu-aggregation", "multiset aggregation against sequence enumeration")
    p.add_argument("--max-deg", type=int, default=5)

    p = sub.add_parser("verify-all", help="run the whole acceptance suite")
    p.add_argument("--seed", type=int, default=suite.DEFAULT_SEED)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text, status = args.func(args)
    except (UsageError, ModelError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if text:
        print(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
