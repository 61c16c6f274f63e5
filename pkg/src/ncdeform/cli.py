"""``ncdeform`` command line: run a verification suite and emit a JSON report.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for
configuration or expression errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from itertools import combinations

import numpy as np

from . import coalgebra_star as cs
from . import momentum_flow as mf
from . import realization as rz
from .config import ConfigError, RunConfig, load_config
from .parser import EvalError, ParseError, evaluate, parse_expr, to_text
from .scalar import I
from .weyl import Polynomial

__all__ = ["main", "run_subcommand", "COMMANDS"]

COMMANDS = ("axioms", "zops", "box", "invariants", "snyder", "flow", "kinverse", "coproduct", "star", "eval")


def _report_status(rep: rz.VerificationReport) -> str:
    return "pass" if rep.all_passed else "fail"


def _summary(rep: rz.VerificationReport) -> dict:
    counts: dict = {}
    for r in rep.results:
        c = counts.setdefault(r.identity, {"checked": 0, "failed": 0})
        c["checked"] += 1
        c["failed"] += 0 if r.passed else 1
    return counts


def _exact(rep: rz.VerificationReport) -> dict:
    return {"status": _report_status(rep), "summary": _summary(rep), "results": rep.to_json()}


def cmd_axioms(cfg: RunConfig, args) -> dict:
    return _exact(rz.check_axioms(cfg.realization_spec(), cfg.max_degree))


def cmd_zops(cfg: RunConfig, args) -> dict:
    spec = cfg.realization_spec()
    if spec.f_kind != "sqrt_one_minus_B":
        raise ConfigError("zops needs f = 'sqrt': Z exists only for f(B) = sqrt(1 - B)")
    return _exact(rz.check_z_suite(spec, cfg.max_degree))


def cmd_box(cfg: RunConfig, args) -> dict:
    return _exact(rz.check_box(cfg.realization_spec(), cfg.max_degree))


def cmd_invariants(cfg: RunConfig, args) -> dict:
    spec = cfg.realization_spec()
    i2, rep = rz.invariant_I2(spec)
    rep.extend(rz.check_tensor_lift(spec))
    rep.extend(rz.check_inverse_realization(spec, cfg.max_degree))
    out = _exact(rep)
    out["I2"] = i2.to_json()
    return out


def cmd_snyder(cfg: RunConfig, args) -> dict:
    _, rep = rz.snyder_map(cfg.realization_spec(), cfg.max_degree)
    return _exact(rep)


def _need_sqrt(cfg: RunConfig, cmd: str):
    if cfg.f != "sqrt":
        raise ConfigError(f"{cmd} is wired only for f = 'sqrt'")


def _samples(rng, n, count, scale):
    return [(rng.uniform(-scale, scale, n), rng.uniform(-scale, scale, n)) for _ in range(count)]


def cmd_flow(cfg: RunConfig, args) -> dict:
    _need_sqrt(cfg, "flow")
    p = cfg.params
    rng = np.random.default_rng(cfg.seed if args.seed is None else args.seed)
    count = args.samples or 100
    tol = cfg.tolerances["ode"]
    err, skipped = 0.0, 0
    for k, q in _samples(rng, p.n, count, 1.0):
        try:
            a = mf.flow_closed_form(k, q, 1.0, p).p
            b = mf.flow_ode(k, q, 1.0, p, 1000).p
        except mf.DomainError:
            skipped += 1
            continue
        err = max(err, float(np.max(np.abs(a - b))))
    k, q = _samples(rng, p.n, 1, 1.0)[0]
    exact = mf.flow_closed_form(k, q, 1.0, p).p
    e1 = np.max(np.abs(mf.flow_ode(k, q, 1.0, p, 8).p - exact))
    e2 = np.max(np.abs(mf.flow_ode(k, q, 1.0, p, 16).p - exact))
    ratio = float(e1 / e2) if e2 > 0 else float("inf")
    checks = [
        {"check": "closed form vs RK4", "samples": count - skipped, "skipped": skipped, "max_abs_err": err, "tol": tol,
         "status": "pass" if err < tol else "fail"},
        {"check": "RK4 step-doubling ratio", "samples": 1, "ratio": ratio, "range": [12, 20],
         "status": "pass" if 12 <= ratio <= 20 else "fail"},
    ]
    return {"status": "pass" if all(c["status"] == "pass" for c in checks) else "fail", "results": checks}


def cmd_kinverse(cfg: RunConfig, args) -> dict:
    _need_sqrt(cfg, "kinverse")
    p = cfg.params
    rng = np.random.default_rng(cfg.seed if args.seed is None else args.seed)
    count = args.samples or 100
    tol_n = cfg.tolerances["newton"]
    rt, ident, failures = 0.0, 0.0, 0
    for k, _ in _samples(rng, p.n, count, 0.5):
        try:
            back = mf.big_k_inverse(mf.big_k(k, p), p, tol=tol_n)
            rt = max(rt, float(np.max(np.abs(back - k))))
            rep = mf.check_k_identities(k, p, tol=cfg.tolerances["ode"], newton_tol=tol_n)
            ident = max(ident, max(c["abs_err"] for c in rep["checks"]))
        except (mf.NoConvergence, mf.DomainError):
            failures += 1
    checks = [
        {"check": "K^-1(K(k)) = k", "samples": count, "max_abs_err": rt, "tol": 1e-10, "status": "pass" if rt < 1e-10 else "fail"},
        {"check": "Zinv and box via K^-1", "samples": count, "max_abs_err": ident, "tol": cfg.tolerances["ode"],
         "status": "pass" if ident < cfg.tolerances["ode"] else "fail"},
        {"check": "newton convergence", "samples": count, "failures": failures, "status": "pass" if failures == 0 else "fail"},
    ]
    return {"status": "pass" if all(c["status"] == "pass" for c in checks) else "fail", "results": checks}


def cmd_coproduct(cfg: RunConfig, args) -> dict:
    _need_sqrt(cfg, "coproduct")
    p = cfg.params
    rng = np.random.default_rng(cfg.seed if args.seed is None else args.seed)
    count = args.samples or 20
    checks = [cs.coproduct_exact_orders(p, max(cfg.order, 3))]
    worst = [0.0, 0.0, 0.0]
    for k, q in _samples(rng, p.n, count, cs.coproduct_momentum_scale(p)):
        rep = cs.coproduct_check(p, k, q)
        for row in rep["orders"]:
            worst[row["order"]] = max(worst[row["order"]], row["rel_err"])
    for order, tol in zip(range(3), (1e-6, 1e-6, 1e-5)):
        checks.append({"check": f"eps-fit order {order}", "samples": count, "max_rel_err": worst[order], "tol": tol,
                       "status": "pass" if worst[order] < tol else "fail"})
    if p.s == 0 or all(x == 0 for x in p.a):
        k, q = _samples(rng, p.n, 1, 0.3)[0]
        special = cs.special_coproducts(p, k, q, cfg.order, cfg.tolerances["float_match"])
        checks.extend(special["checks"])
    ok = all(c["status"] in ("pass", "exact-pass") for c in checks)
    return {"status": "pass" if ok else "fail", "results": checks}


def cmd_star(cfg: RunConfig, args) -> dict:
    p = cfg.params
    n = p.n
    order = max(cfg.order, 2)
    dsum = cs.dsum_series(p, order)
    xs = [Polynomial.variable(n, m) for m in range(n)]
    one = Polynomial.one(n)
    checks = []
    products = {}
    for mu in range(n):
        unital = cs.star_polynomials(one, xs[mu], p, order, dsum) == xs[mu] and cs.star_polynomials(xs[mu], one, p, order, dsum) == xs[mu]
        checks.append({"check": "unital", "indices": [mu], "status": "exact-pass" if unital else "fail"})
    for mu, nu in combinations(range(n), 2):
        ab = cs.star_polynomials(xs[mu], xs[nu], p, order, dsum)
        ba = cs.star_polynomials(xs[nu], xs[mu], p, order, dsum)
        products[f"x_{mu}*x_{nu}"] = ab.to_json()
        want = (xs[nu].scale(p.a[mu]) - xs[mu].scale(p.a[nu])).scale(I)
        checks.append({"check": "star commutator", "indices": [mu, nu], "status": "exact-pass" if ab - ba == want else "fail"})
    ok = all(c["status"] == "exact-pass" for c in checks)
    return {"status": "pass" if ok else "fail", "results": checks, "products": products}


def cmd_eval(cfg: RunConfig, args) -> dict:
    if not args.expr:
        raise ConfigError("eval needs an expression argument")
    ast = parse_expr(args.expr)
    value = evaluate(ast, cfg.realization_spec())
    return {"status": "pass", "expr": to_text(ast), "value": value.to_json(), "text": str(value)}


_DISPATCH = {
    "axioms": cmd_axioms,
    "zops": cmd_zops,
    "box": cmd_box,
    "invariants": cmd_invariants,
    "snyder": cmd_snyder,
    "flow": cmd_flow,
    "kinverse": cmd_kinverse,
    "coproduct": cmd_coproduct,
    "star": cmd_star,
    "eval": cmd_eval,
}


def run_subcommand(cfg: RunConfig, cmd: str, args=None):
    """Run ``cmd``; return ``(exit_code, report)``."""
    if args is None:
        args = argparse.Namespace(seed=None, samples=None, expr=None)
    if cmd not in _DISPATCH:
        raise ConfigError(f"unknown command {cmd!r}")
    body = _DISPATCH[cmd](cfg, args)
    report = {"command": cmd, "config": cfg.to_json()}
    report.update(body)
    return (0 if body["status"] == "pass" else 1), report


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncdeform", description=__doc__.splitlines()[0])
    ap.add_argument("cmd", choices=COMMANDS)
    ap.add_argument("expr", nargs="?", help="expression for the eval command")
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--seed", type=int, default=None, help="override the config seed")
    ap.add_argument("--samples", type=int, default=None, help="number of random samples for float suites")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        code, report = run_subcommand(cfg, args.cmd, args)
    except (ConfigError, ParseError, EvalError) as exc:
        print(json.dumps({"command": args.cmd, "status": "error", "error": str(exc)}), file=sys.stderr)
        return 2
    text = json.dumps(report, indent=1, sort_keys=True, default=str)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
