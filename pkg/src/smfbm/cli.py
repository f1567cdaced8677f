"""Command-line front end.

Every command writes its outputs plus a ``<stem>.manifest.json`` run
manifest. ``smfbm replay MANIFEST`` re-executes a manifest and reproduces the
outputs byte for byte.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.
"""

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import diagnostics as dg
from . import increments as inc
from .exceptions import DomainError
from .kernels import MixCoeffs, ProcessSpec, TimeGrid, cov_matrix, validate_coeffs, validate_hurst
from .simulate import SamplerConfig, sample

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _range3(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:end:count, got {text!r}")
    start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise argparse.ArgumentTypeError("count must be >= 1")
    return text


def _ladder(text):
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected lo:hi exponents, got {text!r}")
    lo, hi = int(parts[0]), int(parts[1])
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError("need 0 <= lo <= hi")
    return text


def _ladder_values(text, min_n=1):
    lo, hi = (int(p) for p in text.split(":"))
    ns = [2**k for k in range(lo, hi + 1)]
    ns = [n for n in ns if n >= min_n]
    if not ns:
        raise UsageError(f"--n-ladder {text} yields no n >= {min_n}")
    return ns


def _sweep_values(text):
    start, end, count = text.split(":")
    return [float(x) for x in np.linspace(float(start), float(end), int(count) + 1)]


def _grid_from_args(args):
    if getattr(args, "grid_file", None):
        raw = Path(args.grid_file).read_text(encoding="utf-8").replace(",", " ").split()
        return TimeGrid([float(x) for x in raw])
    if not getattr(args, "grid", None):
        raise UsageError("--grid or --grid-file is required")
    start, end, count = args.grid.split(":")
    return TimeGrid.uniform(float(start), float(end), int(count))


def _spec_from_args(args):
    try:
        return ProcessSpec.from_kind(args.process, a=args.a, b=args.b, hurst=args.hurst)
    except DomainError as exc:
        raise UsageError(str(exc))


def _coeffs_hurst(args):
    try:
        return validate_coeffs((args.a, args.b)), validate_hurst(args.hurst)
    except DomainError as exc:
        raise UsageError(str(exc))


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, indent=2) + "\n")


def _sibling(out, suffix):
    p = Path(out)
    return str(p.with_name(p.stem + suffix))


def _params(args):
    skip = {"handler", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _write_manifest(args, outputs, seed=None):
    manifest = {
        "command": args.command,
        "subcommand": getattr(args, "subcommand", None),
        "parameters": _params(args),
        "seed": seed,
        "version": __version__,
        "outputs": [str(o) for o in outputs],
    }
    path = _sibling(args.out, ".manifest.json")
    _write_json(path, manifest)
    return path


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_cov(args):
    spec = _spec_from_args(args)
    grid = _grid_from_args(args)
    cov = cov_matrix(spec, grid)
    header = [f"t_{k}" for k in range(len(grid))]
    _write_csv(args.out, header, cov.entries.tolist())
    _write_manifest(args, [args.out])


def cmd_simulate(args):
    spec = _spec_from_args(args)
    grid = _grid_from_args(args)
    try:
        cfg = SamplerConfig(spec, grid, args.paths, args.seed, args.method)
    except DomainError as exc:
        raise UsageError(str(exc))
    ens = sample(cfg, threads=args.threads)
    meta = _sibling(args.out, ".meta.json")
    ens.write_csv(args.out)
    ens.write_metadata(meta)
    _write_manifest(args, [args.out, meta], seed=args.seed)


def _report(args, operation, inputs, outputs, trend_fits=None, verdict=None, spec=None):
    if spec is None:
        spec = ProcessSpec.smfbm(args.a, args.b, args.hurst)
    if verdict is None:
        verdict = dg.semimart_verdict(spec.coeffs, spec.hurst)
    return dg.DiagnosticsReport(
        spec=spec.to_dict(),
        operation=operation,
        inputs=inputs,
        outputs=outputs,
        trend_fits=trend_fits or {},
        verdict=verdict,
        citations=list(verdict.citations),
    )


def diag_markov(args):
    spec = _spec_from_args(args)
    defect = dg.markov_defect(args.s, args.t, args.u, spec)
    rep = _report(args, "markov", {"s": args.s, "t": args.t, "u": args.u}, {"defect": defect}, spec=spec)
    return rep, []


def diag_qv(args):
    coeffs, hurst = _coeffs_hurst(args)
    ns = _ladder_values(args.n_ladder)
    qv = dg.qv_ladder(args.t, ns, coeffs, hurst)
    limit = {
        dg.QvLimit.DIVERGES: None,
        dg.QvLimit.FINITE_AB: (coeffs.a**2 + coeffs.b**2) * args.t if coeffs.b != 0 else coeffs.a**2 * args.t,
        dg.QvLimit.FINITE_A: coeffs.a**2 * args.t,
    }[qv.limit_class]
    fits = {}
    if len(ns) >= 2:
        if qv.limit_class is dg.QvLimit.DIVERGES:
            fits["growth_exponent"] = dg.loglog_slope(ns, qv.a_n)
            fits["expected_exponent"] = 1.0 - 2.0 * hurst
        elif qv.limit_class is dg.QvLimit.FINITE_A:
            gaps = np.abs(np.asarray(qv.a_n) - limit)
            if np.all(gaps > 0):
                fits["convergence_exponent"] = dg.loglog_slope(ns, gaps)
                fits["expected_exponent"] = 1.0 - 2.0 * hurst
    rep = _report(
        args,
        "qv",
        {"T": args.t, "n_values": ns},
        {"a_n": qv.a_n, "limit_class": qv.limit_class, "limit": limit},
        trend_fits=fits,
    )
    return rep, [("n", "a_n"), list(zip(ns, qv.a_n))]


def diag_quasimart(args):
    coeffs, hurst = _coeffs_hurst(args)
    ns = _ladder_values(args.n_ladder, min_n=2)
    sums = [dg.quasi_mart_sum(args.t, n, coeffs, hurst)[0] for n in ns]
    a, b = coeffs
    limit = (2.0 ** (2.0 * hurst) - 2.0) / math.sqrt(a * a * args.t + b * b * args.t ** (2.0 * hurst))
    fits = {"expected_exponent": 1.5 - 2.0 * hurst, "uv_limit": limit}
    if len(ns) >= 2 and all(s > 0 for s in sums):
        fits["growth_exponent"] = dg.loglog_slope(ns, sums)
    rep = _report(args, "quasimart", {"T": args.t, "n_values": ns}, {"I_n": sums}, trend_fits=fits)
    return rep, [("n", "I_n"), list(zip(ns, sums))]


def diag_condl2(args):
    coeffs, hurst = _coeffs_hurst(args)
    res = dg.cond_l2_sum(args.t, args.n, coeffs, hurst, max_n=args.max_n)
    outputs = {
        "total": res.total,
        "per_j": res.per_j,
        "lambda_max": res.lambda_max,
        "lambda_max_bound": res.lambda_max_bound,
        "lambda_max_bound_ok": res.lambda_max_bound_ok,
    }
    if hurst == 0.75:
        lb = dg.cond_l2_lower_bound(args.t, args.n, coeffs)
        outputs["lower_bound_total"] = math.fsum(lb)
        outputs["lower_bound_ok"] = bool(np.all(res.per_j >= lb))
    rep = _report(args, "condl2", {"T": args.t, "n": args.n}, outputs)
    return rep, []


def diag_l2probe(args):
    coeffs, hurst = _coeffs_hurst(args)
    try:
        est, conv = dg.l2_mixed_partial_probe(args.t, coeffs, hurst, levels=args.levels)
    except DomainError as exc:
        raise UsageError(str(exc))
    rep = _report(args, "l2probe", {"T": args.t, "levels": args.levels}, {"estimates": est, "converged": conv})
    return rep, []


def diag_verdict(args):
    coeffs, hurst = _coeffs_hurst(args)
    v = dg.semimart_verdict(coeffs, hurst)
    rep = _report(args, "verdict", {}, {"is_semimartingale": v.is_semimartingale, "regime": v.regime}, verdict=v)
    return rep, []


DIAG_HANDLERS = {
    "markov": diag_markov,
    "qv": diag_qv,
    "quasimart": diag_quasimart,
    "condl2": diag_condl2,
    "l2probe": diag_l2probe,
    "verdict": diag_verdict,
}


def cmd_diag(args):
    rep, table = DIAG_HANDLERS[args.subcommand](args)
    outputs = [args.out]
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rep.to_json())
    if table:
        csv_path = _sibling(args.out, ".csv")
        _write_csv(csv_path, list(table[0]), table[1])
        outputs.append(csv_path)
    _write_manifest(args, outputs)


def _interval_row(a, b, hurst, u, v, s, t):
    coeffs = MixCoeffs(a, b)
    pair = inc.IntervalPair(u, v, s, t)
    R = inc.nonoverlap_cov_mfbm(pair, coeffs, hurst)
    C = inc.nonoverlap_cov_smfbm(pair, coeffs, hurst)
    D = inc.cov_gap(pair, coeffs, hurst)
    rho_s = rho_m = None
    if v == s and math.isclose(t - s, v - u, rel_tol=1e-12) and b != 0:
        rho_s, rho_m = inc.adjacent_corr_pair(u, v - u, coeffs, hurst)
    return [a, b, hurst, u, v, s, t, R, C, D, rho_m, rho_s]


def compare_intervals(args):
    if args.r is not None:
        u, v, s, t = args.u, args.u + args.r, args.u + args.r, args.u + 2.0 * args.r
    else:
        if None in (args.v, args.s, args.t):
            raise UsageError("give --r, or all of --v --s --t")
        u, v, s, t = args.u, args.v, args.s, args.t
    base = {"a": args.a, "b": args.b, "hurst": args.hurst}
    if args.sweep:
        name, _, rng = args.sweep.partition("=")
        if name not in base:
            raise UsageError(f"--sweep parameter must be one of a, b, hurst; got {name!r}")
        values = _sweep_values(rng)
    else:
        name, values = "hurst", [args.hurst]
    rows = []
    for val in values:
        p = dict(base, **{name: val})
        try:
            validate_coeffs((p["a"], p["b"]))
            validate_hurst(p["hurst"])
            rows.append(_interval_row(p["a"], p["b"], p["hurst"], u, v, s, t))
        except DomainError as exc:
            raise UsageError(str(exc))
    header = ["a", "b", "hurst", "u", "v", "s", "t", "R", "C", "D", "rho_mfbm", "rho_smfbm"]
    return header, rows


def compare_lag(args):
    coeffs, hurst = _coeffs_hurst(args)
    if args.p < 0:
        raise UsageError("--p must be >= 0")
    ns = _ladder_values(args.n_ladder)
    rows = []
    for n in ns:
        c = inc.lag_cov(args.p, n, coeffs, hurst)
        asym = inc.lag_cov_asymptote(args.p, n, coeffs, hurst)
        ratio = c / asym if asym != 0 else None
        rows.append([args.p, n, c, asym, ratio])
    return ["p", "n", "C", "asymptote", "ratio"], rows


def cmd_compare(args):
    handler = compare_intervals if args.subcommand == "intervals" else compare_lag
    header, rows = handler(args)
    _write_csv(args.out, header, rows)
    _write_manifest(args, [args.out])


COMMANDS = {"cov": cmd_cov, "simulate": cmd_simulate, "diag": cmd_diag, "compare": cmd_compare}


def cmd_replay(args):
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    params = dict(manifest["parameters"])
    if args.out:
        params["out"] = args.out
    if args.threads is not None:
        params["threads"] = args.threads
    ns = argparse.Namespace(**params)
    ns.config = None
    COMMANDS[ns.command](ns)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _default_threads():
    env = os.environ.get("SMFBM_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _add_common(p):
    p.add_argument("--out", required=True, help="output file")
    p.add_argument("--config", help="JSON file of option defaults (flags override it)")
    p.add_argument(
        "--threads", type=_positive_int, default=_default_threads(), help="parallelism cap (default $SMFBM_THREADS or 1)"
    )


def _add_params(p, process=False):
    if process:
        p.add_argument("--process", choices=["bm", "fbm", "sfbm", "mfbm", "smfbm"], default="smfbm")
    p.add_argument("--a", type=float, default=1.0, help="weight of the Brownian part")
    p.add_argument("--b", type=float, default=1.0, help="weight of the fractional part")
    p.add_argument("--hurst", type=float, default=0.5, help="Hurst index in (0, 1)")


def _add_grid(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--grid", type=_range3, help="uniform grid start:end:count (count intervals)")
    g.add_argument("--grid-file", help="file with explicit grid points")


def build_parser():
    parser = argparse.ArgumentParser(prog="smfbm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    leaves = {}

    p = sub.add_parser("cov", help="covariance matrix on a grid")
    _add_params(p, process=True)
    _add_grid(p)
    _add_common(p)
    leaves[("cov", None)] = p

    p = sub.add_parser("simulate", help="sample paths")
    _add_params(p, process=True)
    _add_grid(p)
    p.add_argument("--paths", type=_positive_int, default=1000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--method", choices=["direct", "constructive"], default="direct")
    _add_common(p)
    leaves[("simulate", None)] = p

    p = sub.add_parser("diag", help="semimartingale diagnostics")
    dsub = p.add_subparsers(dest="subcommand", required=True)
    q = dsub.add_parser("markov", help="Markov defect at s < t < u")
    _add_params(q, process=True)
    q.add_argument("--s", type=float, required=True)
    q.add_argument("--t", type=float, required=True)
    q.add_argument("--u", type=float, required=True)
    leaves[("diag", "markov")] = q
    q = dsub.add_parser("qv", help="expected quadratic variation on n = 2**lo .. 2**hi")
    _add_params(q)
    q.add_argument("--t", type=float, default=1.0, help="horizon T")
    q.add_argument("--n-ladder", type=_ladder, default="2:16")
    leaves[("diag", "qv")] = q
    q = dsub.add_parser("quasimart", help="one-step quasi-martingale sums I_n")
    _add_params(q)
    q.add_argument("--t", type=float, default=1.0, help="horizon T")
    q.add_argument("--n-ladder", type=_ladder, default="10:16")
    leaves[("diag", "quasimart")] = q
    q = dsub.add_parser("condl2", help="full-past conditional L2 sums")
    _add_params(q)
    q.add_argument("--t", type=float, default=1.0, help="horizon T")
    q.add_argument("--n", type=_positive_int, default=512)
    q.add_argument("--max-n", type=_positive_int, default=1024)
    leaves[("diag", "condl2")] = q
    q = dsub.add_parser("l2probe", help="square-integrability probe of the mixed partial")
    _add_params(q)
    q.add_argument("--t", type=float, default=1.0, help="horizon T")
    q.add_argument("--levels", type=int, default=32)
    leaves[("diag", "l2probe")] = q
    q = dsub.add_parser("verdict", help="semimartingale classification")
    _add_params(q)
    leaves[("diag", "verdict")] = q
    for key, q in leaves.items():
        if key[0] == "diag":
            _add_common(q)

    p = sub.add_parser("compare", help="mfBm vs smfBm comparison sweeps")
    csub = p.add_subparsers(dest="subcommand", required=True)
    q = csub.add_parser("intervals", help="R, C, D and adjacent correlations")
    _add_params(q)
    q.add_argument("--u", type=float, default=0.0)
    q.add_argument("--r", type=float, help="adjacent intervals [u, u+r], [u+r, u+2r]")
    q.add_argument("--v", type=float)
    q.add_argument("--s", type=float)
    q.add_argument("--t", type=float)
    q.add_argument("--sweep", help="NAME=start:end:count with NAME in a, b, hurst")
    _add_common(q)
    leaves[("compare", "intervals")] = q
    q = csub.add_parser("lag", help="lag covariances C(p, n) against their asymptote")
    _add_params(q)
    q.add_argument("--p", type=int, default=0)
    q.add_argument("--n-ladder", type=_ladder, default="0:17")
    _add_common(q)
    leaves[("compare", "lag")] = q

    p = sub.add_parser("replay", help="re-run a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="redirect the primary output")
    p.add_argument("--threads", type=_positive_int)
    return parser, leaves


def parse_args(argv=None):
    parser, leaves = build_parser()
    args = parser.parse_args(argv)
    config = getattr(args, "config", None)
    if config:
        try:
            values = json.loads(Path(config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read --config {config}: {exc}")
        if not isinstance(values, dict):
            parser.error("--config must hold a JSON object")
        leaf = leaves[(args.command, getattr(args, "subcommand", None))]
        known = {a.dest for a in leaf._actions}
        unknown = set(k.replace("-", "_") for k in values) - known
        if unknown:
            parser.error(f"unknown keys in --config: {', '.join(sorted(unknown))}")
        leaf.set_defaults(**{k.replace("-", "_"): v for k, v in values.items()})
        args = parser.parse_args(argv)
    return args


def main(argv=None):
    args = parse_args(argv)
    if args.command == "replay":
        handler = cmd_replay
    else:
        handler = COMMANDS[args.command]
    try:
        handler(args)
    except (UsageError, DomainError) as exc:
        print(f"smfbm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except np.linalg.LinAlgError as exc:
        print(f"smfbm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
