"""Command-line entry point.

    acsigma norm --in problem.json --mode exact
    acsigma vf --in path.json
    acsigma counterexample --kmax 6

Single results go to stdout as JSON, tables as CSV with a header row.
Exit codes: 0 success, 2 invalid input, 3 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from fractions import Fraction

import jsonschema

from .approx import identity_approximants
from .bvnorm import (
    DomainError,
    FiniteFunction,
    NormCertificate,
    PreconditionError,
    ResourceLimitError,
    bv_norm,
)
from .counterexample import PrecisionError, counterexample_build, counterexample_gap, succ_tail_bounds
from .exact import ExactComplex, fraction_to_str
from .geometry import LineSpec, Polyline, SigmaSet, variation_factor
from .operators import (
    ORDERINGS,
    OperatorSpec,
    SpecError,
    order_indices,
    partial_sum_trace,
    rearrangement_check,
    split_and_omega,
    validate_spec,
)
from .order import prec_sort, spiral_key
from .spoke import certified_bounds, decompose, detect_spokes, spoke_norm

EXIT_OK, EXIT_INVALID, EXIT_RESOURCE = 0, 2, 3

_DECIMAL = {"type": "string", "pattern": r"^\s*[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?(/\d+)?\s*$"}
_PAIR = {"type": "array", "items": _DECIMAL, "minItems": 2, "maxItems": 2}
_INT_PAIR = {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "points": {"type": "array", "items": _PAIR, "minItems": 1},
        "values": {"type": "array", "items": _PAIR},
        "polyline": {"type": "array", "items": _PAIR, "minItems": 1},
        "operator": {
            "type": "object",
            "additionalProperties": False,
            "required": ["thetas", "lambdas"],
            "properties": {
                "thetas": {"type": "array", "items": _INT_PAIR, "minItems": 1},
                "lambdas": {"type": "array", "items": {"type": "array", "items": _DECIMAL}},
            },
        },
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lmax": {"type": "integer", "minimum": 2},
                "mode": {"enum": ["exact", "bnb", "heuristic"]},
                "precision_bits": {"type": "integer", "minimum": 8},
                "seed": {"type": "integer"},
                "k_max": {"type": "integer", "minimum": 2},
                "omega": _PAIR,
                "permutation": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "r_seq": {"type": "array", "items": _DECIMAL},
                "eps_seq": {"type": "array", "items": _DECIMAL},
                "n_max": {"type": "integer", "minimum": 1},
            },
        },
    },
}


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# input


def load_problem(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"schema violation at {where}: {exc.message}") from exc
    return doc


def _point(pair) -> ExactComplex:
    return ExactComplex(Fraction(pair[0].strip()), Fraction(pair[1].strip()))


def sigma_of(doc: dict) -> SigmaSet:
    if "points" in doc:
        pts = [_point(p) for p in doc["points"]]
        if len(set(pts)) != len(pts):
            raise InputError("points contain duplicates")
        return SigmaSet(pts)
    if "operator" in doc:
        return spec_of(doc).sigma
    raise InputError("the problem needs 'points' or 'operator'")


def function_of(doc: dict) -> FiniteFunction:
    if "points" not in doc or "values" not in doc:
        raise InputError("this command needs 'points' and 'values'")
    pts = [_point(p) for p in doc["points"]]
    vals = [_point(v) for v in doc["values"]]
    if len(pts) != len(vals):
        raise InputError("'values' must have one entry per point")
    if len(set(pts)) != len(pts):
        raise InputError("points contain duplicates")
    return FiniteFunction(SigmaSet(pts), dict(zip(pts, vals)))


def spec_of(doc: dict) -> OperatorSpec:
    if "operator" not in doc:
        raise InputError("this command needs an 'operator' block")
    op = doc["operator"]
    if len(op["thetas"]) != len(op["lambdas"]):
        raise InputError("one lambda list per theta is required")
    scales = [[Fraction(s.strip()) for s in row] for row in op["lambdas"]]
    spec = OperatorSpec.from_scales([tuple(t) for t in op["thetas"]], scales)
    spec.check_structure()
    return spec


# ---------------------------------------------------------------------------
# output


def _num(x):
    if isinstance(x, Fraction):
        return fraction_to_str(x)
    return x


def emit_json(obj, out) -> None:
    out.write(json.dumps(obj, indent=2) + "\n")


def emit_csv(header, rows, out) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_num(v) for v in r])
    out.write(buf.getvalue())


# ---------------------------------------------------------------------------
# commands


_MODES = {"exact": "exhaustive", "bnb": "branch-bound", "heuristic": "heuristic"}


def _params(doc, args) -> dict:
    p = dict(doc.get("params", {}))
    for key in ("mode", "lmax", "seed", "precision_bits", "kmax"):
        v = getattr(args, key, None)
        if v is not None:
            p["k_max" if key == "kmax" else key] = v
    return p


def cmd_norm(args, doc, out) -> None:
    f = function_of(doc)
    p = _params(doc, args)
    if args.replay:
        try:
            with open(args.replay) as fh:
                prev = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read {args.replay}: {exc}") from exc
        cert = prev.get("certificate", prev)
        verts = tuple(_point(v) for v in cert["vertex_list"])
        if any(v not in f.domain for v in verts):
            raise InputError("certificate vertices must lie in the domain")
        wl = cert.get("witness_line")
        line = LineSpec(wl["a"], wl["b"], Fraction(wl["c"])) if wl else None
        c = NormCertificate(verts, cert["cvar"], cert["vf"], line, cert["product"])
        ok = c.verify(f)
        emit_json({"verified": ok, "product": c.product, "lower": f.sup_norm() + c.product}, out)
        if not ok:
            raise InputError("certificate does not reproduce")
        return
    res = bv_norm(f, mode=_MODES[p.get("mode", "exact")], list_budget=p.get("lmax"),
                  threads=args.threads, seed=p.get("seed", 0))
    body = res.to_json()
    body["sup_norm"] = f.sup_norm()
    emit_json(body, out)


def cmd_vf(args, doc, out) -> None:
    verts = doc.get("polyline", doc.get("points"))
    if not verts:
        raise InputError("vf needs 'polyline' or 'points'")
    res = variation_factor(Polyline([_point(v) for v in verts]))
    emit_json({"vf": res.vf, "rho": f"{res.rho.numerator}/{res.rho.denominator}",
               "witness_line": res.witness_line.to_json()}, out)


def cmd_spoke(args, doc, out) -> None:
    f = function_of(doc)
    spokes = detect_spokes(f.domain)
    dec = decompose(f, spokes)
    b = certified_bounds(f, spokes, search_mode=None)
    emit_json({
        "N": spokes.N,
        "rays": [list(r) for r in spokes.rays],
        "origin_present": spokes.origin_present,
        "f0": dec.f0.to_json(),
        "spoke_norm": spoke_norm(f, spokes),
        "bv_lower": b.lower,
        "bv_upper": b.upper,
        "sources": b.sources,
    }, out)


def cmd_cutoff(args, doc, out) -> None:
    sigma = sigma_of(doc)
    p = _params(doc, args)
    if "r_seq" in p or "eps_seq" in p:
        rs = [Fraction(s) for s in p.get("r_seq", [])]
        es = [Fraction(s) for s in p.get("eps_seq", [])]
    else:
        n_max = p.get("n_max", 10)
        rs = es = [Fraction(1, n) for n in range(1, n_max + 1)]
    rows = identity_approximants(sigma, rs, es, mode=_MODES[p.get("mode", "bnb")], list_budget=p.get("lmax"))
    header = ["n", "r", "eps", "g_norm", "err_x", "err_y", "err_lambda", "bound", "exact", "ok"]
    emit_csv(header, ([r.n, r.r, r.eps, r.g_norm, r.err_x, r.err_y, r.err_lambda, r.bound, r.exact, r.ok]
                      for r in rows), out)


def cmd_order(args, doc, out) -> None:
    if args.order and "operator" in doc:
        spec = spec_of(doc)
        perm = doc.get("params", {}).get("permutation")
        idx = order_indices(spec, args.order, perm)
        emit_csv(["rank", "n", "m", "re", "im", "modulus"],
                 ([i, n, m, spec.eigenvalue(n, m).x, spec.eigenvalue(n, m).y, abs(spec.eigenvalue(n, m))]
                  for i, (n, m) in enumerate(idx)), out)
        return
    sigma = sigma_of(doc)
    emit_csv(["rank", "re", "im", "level", "position"],
             ([i, z.x, z.y, spiral_key(z).level, spiral_key(z).pos] for i, z in enumerate(prec_sort(sigma))), out)


def cmd_operator(args, doc, out) -> None:
    spec = spec_of(doc)
    p = _params(doc, args)
    if args.action == "validate":
        rep = validate_spec(spec, search_mode="branch-bound" if len(spec.sigma) <= 7 else None)
        body = rep.as_dict()
        body.update({"N": spec.N, "sigma_size": len(spec.sigma)})
        body["cumulative"] = [{"n": n, "M": M, "lower": lo, "upper": hi} for n, M, lo, hi in rep.per_ray]
        emit_json(body, out)
    elif args.action == "trace":
        ordering = args.order or "succ"
        tr = partial_sum_trace(spec, ordering, permutation=p.get("permutation"))
        if args.gaps:
            emit_csv(["start", "stop", "delta_ub", "bracket", "k_bracket", "eps", "eps_bound", "ok"],
                     ([g.start, g.stop, g.delta_upper, g.bracket, g.k_bracket, g.eps, g.eps_bound, g.ok]
                      for g in tr.gaps), out)
        else:
            emit_csv(["position", "n", "m", "re", "im", "coef_re", "coef_im", "inc_lower", "inc_upper"],
                     ([s.position, s.index[0], s.index[1], s.eigenvalue.x, s.eigenvalue.y,
                       s.coefficient.x, s.coefficient.y, s.increment_lower, s.increment_upper]
                      for s in tr.steps), out)
    elif args.action == "split":
        omega = _point(p["omega"]) if "omega" in p else ExactComplex(1, 0)
        rep = split_and_omega(spec, omega, seed=p.get("seed", 0))
        emit_json({
            "omega": omega.to_json(),
            "re_identity": rep.identity_re,
            "im_identity": rep.identity_im,
            "calculus_constants": {k: {"value": v, "argmax": a} for k, (v, a) in rep.constants.items()},
        }, out)
    elif args.action == "rearrange":
        size = len(spec.indices())
        perm = p.get("permutation")
        if perm is None:
            perm = list(range(size))
            random.Random(p.get("seed", 0)).shuffle(perm)
        rep = rearrangement_check(spec, perm)
        emit_json({
            "K": rep.K,
            "max_positive_halfline": {"norm_ub": rep.worst_positive[0], "t": _num(rep.worst_positive[1])},
            "max_negative_halfline": {"norm_ub": rep.worst_negative[0], "t": _num(rep.worst_negative[1])},
            "half_lines_within_K": rep.half_lines_ok,
            "same_sum": rep.same_sum,
        }, out)


def cmd_counterexample(args, doc, out) -> None:
    p = _params(doc, args)
    k_max = p.get("k_max", 6)
    ce = counterexample_build(k_max, p.get("precision_bits", 64))
    tails = {r.k: r for r in succ_tail_bounds(ce)}
    header = ["k", "vf", "chi_norm_lb", "small_ub", "gap_decomp_lb", "gap_direct_lb", "gap_lb",
              "d_min", "d_max", "succ_tail_eps", "succ_tail_bound", "succ_window_ub"]
    rows = []
    for k in range(2, k_max + 1):
        g = counterexample_gap(ce, k)
        t = tails[k]
        rows.append([k, g.vf, g.chi_lower, g.small_upper, g.decomposition, g.direct, g.gap,
                     g.d_min, g.d_max, t.eps, t.tail_bound, t.window_sup])
    emit_csv(header, rows, out)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="acsigma", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=int(os.environ.get("ACSIGMA_THREADS", 1)))
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, need_in=True):
        p.add_argument("--in", dest="infile", required=need_in)
        p.add_argument("--mode", choices=["exact", "bnb", "heuristic"])
        p.add_argument("--lmax", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--precision-bits", dest="precision_bits", type=int)
        return p

    pn = common(sub.add_parser("norm", help="BV norm of a function with a certificate"))
    pn.add_argument("--replay", help="JSON with a certificate to re-verify")
    common(sub.add_parser("vf", help="variation factor of a polyline"))
    common(sub.add_parser("spoke", help="spoke decomposition, spoke norm and certified bounds"))
    common(sub.add_parser("cutoff", help="cut-off approximants of x, y and the identity"))
    po = common(sub.add_parser("order", help="spiral order of points or an index order"))
    po.add_argument("--order", choices=ORDERINGS)
    pop = common(sub.add_parser("operator", help="construction data experiments"))
    pop.add_argument("action", choices=["validate", "trace", "split", "rearrange"])
    pop.add_argument("--order", choices=ORDERINGS)
    pop.add_argument("--gaps", action="store_true", help="emit the window table instead of the steps")
    pc = common(sub.add_parser("counterexample", help="arc spectra gap table"), need_in=False)
    pc.add_argument("--kmax", type=int)
    return ap


COMMANDS = {
    "norm": cmd_norm, "vf": cmd_vf, "spoke": cmd_spoke, "cutoff": cmd_cutoff,
    "order": cmd_order, "operator": cmd_operator, "counterexample": cmd_counterexample,
}


def run_command(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        err.write("error: --threads must be positive\n")
        return EXIT_INVALID
    try:
        doc = load_problem(args.infile) if getattr(args, "infile", None) else {}
        COMMANDS[args.command](args, doc, out)
    except ResourceLimitError as exc:
        err.write(f"resource limit: {exc}\n")
        return EXIT_RESOURCE
    except PrecisionError as exc:
        err.write(f"precision limit: {exc}\n")
        return EXIT_RESOURCE
    except (InputError, SpecError, DomainError, PreconditionError, ValueError, KeyError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID
    return EXIT_OK


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
