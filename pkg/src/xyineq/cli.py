"""Command-line entry point: ``xyineq compute | sweep | bound | report-diff``.

Exit codes: 0 pass, 1 inequality failure, 2 bad input, 3 engine budget,
4 no crossing in the critical bound.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import quantum as qu
from .bound import BoundConstants, critical_threshold
from .classical import classical_expectation, classical_expectation_mc, parse_observable
from .errors import BudgetError, ModelError, NoCrossingError, QuadratureError
from .harness import SweepConfig, default_config, run_sweep
from .ising import IsingEnumeration, IsingModel
from .model import GibbsEstimate, ModelSpec, load_model

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET, EXIT_NO_CROSSING = 0, 1, 2, 3, 4


def _emit(payload: dict, as_json: bool, text: str) -> None:
    print(json.dumps(payload, sort_keys=True) if as_json else text)


def compute(spec: ModelSpec, obs_text: str, engine: str = "exact", nodes: int = 32,
            sweeps: int = 100_000, seed: int = 0) -> GibbsEstimate:
    """One Gibbs expectation of a product observable, by model type and engine."""
    obs = parse_observable(obs_text)
    if not obs:
        raise ModelError("observable must name at least one factor", "obs")
    for f in obs:
        if not 0 <= f.site < spec.n:
            raise ModelError(f"site {f.site} outside 0..{spec.n - 1}", "obs")
    if spec.model == "classical-xy":
        if any(f.axis not in (1, 2) for f in obs):
            raise ModelError("classical observables use axes 1 and 2", "obs")
        if engine == "mc":
            return classical_expectation_mc(spec, obs, sweeps, seed=seed)
        return classical_expectation(spec, obs, nodes)
    if engine == "mc":
        raise ModelError(f"the mc engine serves classical models only, not {spec.model!r}", "engine")
    if spec.model == "ising":
        mask = 0
        for f in obs:
            mask ^= 1 << f.site  # s_x^2 = 1
        value = IsingEnumeration(IsingModel.from_spec(spec)).expectation(mask)
        return GibbsEstimate(value, 0.0, "enumeration")
    op = qu.product_operator([(f.site, f.axis) for f in obs], spec.n, spec.spin)
    value = qu.gibbs_expectation(qu.assemble_hamiltonian(spec), spec.beta, op)
    return GibbsEstimate(value, 0.0, "diagonalisation")


def cmd_compute(args) -> int:
    spec = load_model(args.model)
    if args.beta is not None:
        spec = spec.with_beta(args.beta)
    est = compute(spec, args.obs, args.engine, args.nodes, args.sweeps, args.seed)
    payload = {"value": est.value, "error": est.error, "method": est.method, "converged": est.converged,
               "details": est.details}
    _emit(payload, args.json, f"{est.value:.6f} +/- {est.error:.2e} ({est.method})")
    return EXIT_PASS


def _load_config(path: str | None, seed: int | None) -> SweepConfig:
    if path is None:
        config = default_config()
    else:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ModelError(f"JSON parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        config = SweepConfig.from_dict(data)
    if seed is not None:
        config = SweepConfig(config.campaigns, seed, config.fd_step, config.tolerances)
    return config


def cmd_sweep(args) -> int:
    config = _load_config(args.config, args.seed)
    start = time.perf_counter()
    report = run_sweep(config, threads=args.threads)
    elapsed = time.perf_counter() - start
    if args.out:
        Path(args.out).write_text(report.to_json())
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    s = report.summary
    if args.json:
        print(json.dumps({k: v for k, v in s.items() if k != "worst"}, sort_keys=True))
    else:
        for line in report.lines():
            print(line)
        print(f"total: {s['checks']} checks, {s['failures']} failures, {s['errors']} errors "
              f"in {elapsed:.1f} s")
    return EXIT_PASS if s["failures"] == 0 else EXIT_FAIL


def cmd_bound(args) -> int:
    try:
        consts = BoundConstants(args.j3, args.i3, args.k3, args.k3p)
    except ValueError as exc:
        raise ModelError(str(exc), "constants") from None
    if args.ising_upper is not None and args.ising_upper <= 0:
        raise ModelError("must be positive", "ising-upper")
    r = critical_threshold(consts)
    payload = {"t_star": r.t_star, "beta_star": r.beta_star, "t": r.t_value, "r_plus": r.r_plus_value,
               "residual": r.residual, "bracket": list(r.bracket), "rounded": r.rounded}
    lines = [f"T* = {r.t_star:.6f} (T_c >= {r.rounded} at 3 s.f.)",
             f"certificate: beta* = {r.beta_star:.9f}, t = {r.t_value:.9f}, r_plus = {r.r_plus_value:.9f}, "
             f"residual = {r.residual:.2e}, bracket = [{r.bracket[0]:.6g}, {r.bracket[1]:.6g}]"]
    if args.ising_upper is not None:
        high = args.ising_upper / 4
        payload["interval"] = [r.t_star, high]
        lines.append(f"interval: {r.t_star:.4f} <= T_c <= {high:.4f} (rounded {r.t_star:.3f}, {high:.3f})")
    _emit(payload, args.json, "\n".join(lines))
    return EXIT_PASS


def _index(report: dict) -> dict:
    return {(c["campaign"], c["index"], c.get("theorem", c["check"])): c for c in report["checks"]}


def cmd_report_diff(args) -> int:
    """Compare two sweep reports check by check; exit 1 if any verdict or margin differs."""
    try:
        a, b = (json.loads(Path(p).read_text()) for p in (args.old, args.new))
        ia, ib = _index(a), _index(b)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ModelError(f"not a sweep report: {exc}") from None
    diffs = []
    for key in sorted(set(ia) | set(ib), key=str):
        if key not in ia or key not in ib:
            diffs.append({"key": list(key), "change": "added" if key in ib else "removed"})
            continue
        ca, cb = ia[key], ib[key]
        if ca.get("pass") != cb.get("pass") or ("error" in ca) != ("error" in cb):
            diffs.append({"key": list(key), "change": "verdict", "old": ca.get("pass"), "new": cb.get("pass")})
        elif "margin" in ca and abs(ca["margin"] - cb["margin"]) > args.margin_tol:
            diffs.append({"key": list(key), "change": "margin", "old": ca["margin"], "new": cb["margin"]})
    if args.json:
        print(json.dumps({"differences": diffs}, sort_keys=True))
    else:
        for d in diffs:
            extra = f" {d['old']} -> {d['new']}" if "old" in d else ""
            print(f"{d['change']}: campaign {d['key'][0]} instance {d['key'][1]} {d['key'][2]}{extra}")
        print(f"{len(diffs)} differences")
    return EXIT_PASS if not diffs else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xyineq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="one Gibbs expectation for a model file")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--obs", required=True, help='product observable as axis:site pairs, e.g. "1:0,1:1"')
    p.add_argument("--beta", type=float, help="override the file's inverse temperature")
    p.add_argument("--engine", choices=("exact", "mc"), default="exact")
    p.add_argument("--nodes", type=int, default=32, help="initial quadrature nodes per site")
    p.add_argument("--sweeps", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("sweep", help="run a verification campaign")
    p.add_argument("config", nargs="?", help="sweep config JSON (default: the built-in campaign)")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--csv", help="write the flat CSV export here")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bound", help="solve for the critical-temperature lower bound")
    defaults = BoundConstants()
    for name in ("j3", "i3", "k3", "k3p"):
        p.add_argument(f"--{name}", type=float, default=getattr(defaults, name))
    p.add_argument("--ising-upper", type=float, help="Ising critical temperature upper bound to chain with")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("report-diff", help="compare two sweep reports")
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("--margin-tol", type=float, default=0.0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report_diff)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except NoCrossingError as exc:
        print(f"no crossing: {exc}", file=sys.stderr)
        return EXIT_NO_CROSSING
    except (BudgetError, QuadratureError) as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, OSError) as exc:
        # model errors and argument range checks
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT

if __name__ == "__main__":
    sys.exit(main())
