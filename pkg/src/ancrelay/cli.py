"""Command-line interface.

Exit codes: 0 ok, 1 invalid input, 2 numerical/degenerate, 3 verification failed.
"""

from __future__ import annotations

import argparse
import io
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .bounds import MAC_BOUND_LABEL, RateReport, rate_report
from .greedy import GreedyError, greedy_scaling
from .network import LayeredNetwork, NetworkError, load_network
from .oracle import GridTooLarge
from .saturation import DegenerateHyperplane

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def fmt(x: float) -> str:
    return f"{x:.12g}"


def _evaluate(net: LayeredNetwork):
    beta, _ = greedy_scaling(net)
    return beta, rate_report(net, beta)


def _sweep_point(args):
    net, ps = args
    _, rep = _evaluate(net.with_source_power(ps))
    return rep


def source_powers(ps_min: float, ps_max: float, points: int, linear: bool = False) -> np.ndarray:
    if not ps_min > 0 or not ps_max >= ps_min:
        raise UsageError("need 0 < ps-min <= ps-max")
    if points < 2:
        raise UsageError("need at least 2 points")
    if linear:
        return np.linspace(ps_min, ps_max, points)
    return np.logspace(np.log10(ps_min), np.log10(ps_max), points)


def sweep(net: LayeredNetwork, powers, jobs: int = 1) -> list[RateReport]:
    """Rate reports for each source power, in input order."""
    work = [(net, float(p)) for p in powers]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, work))
    return [_sweep_point(w) for w in work]


def write_sweep_csv(reports, out, meta: str = "") -> None:
    out.write(f"# ancrelay sweep{(' ' + meta) if meta else ''}; bound: {MAC_BOUND_LABEL}\n")
    out.write("P_s,greedy_rate,baseline_rate,mac_bound,gap\n")
    for r in reports:
        out.write(",".join(fmt(v) for v in (
            r.source_power, r.rate_bits, r.baseline_rate, r.mac_upper_bound, r.gap_to_bound
        )) + "\n")


def _rate_csv(net, beta, rep, out, meta):
    names = [f"beta_{l + 1}_{i + 1}" for l, n in enumerate(net.layer_sizes) for i in range(n)]
    out.write(f"# ancrelay rate{(' ' + meta) if meta else ''}; bound: {MAC_BOUND_LABEL}\n")
    out.write(",".join(["P_s", "snr_t", "greedy_rate", "baseline_rate", "mac_bound", "gap"]
                       + names) + "\n")
    vals = [rep.source_power, rep.snr_t, rep.rate_bits, rep.baseline_rate,
            rep.mac_upper_bound, rep.gap_to_bound] + list(beta.flat)
    out.write(",".join(fmt(v) for v in vals) + "\n")


def _rate_pretty(net, beta, rep, out):
    out.write(f"source power      {fmt(rep.source_power)}\n")
    for l, b in enumerate(beta.layers, start=1):
        out.write(f"beta layer {l:<6} " + " ".join(fmt(v) for v in b) + "\n")
    out.write(f"SNR_t             {fmt(rep.snr_t)}\n")
    out.write(f"greedy rate       {fmt(rep.rate_bits)} bit\n")
    out.write(f"all-max baseline  {fmt(rep.baseline_rate)} bit\n")
    out.write(f"bound             {fmt(rep.mac_upper_bound)} bit  [{MAC_BOUND_LABEL}]\n")
    out.write(f"gap to bound      {fmt(rep.gap_to_bound)} bit\n")


def cmd_rate(args, out) -> int:
    net = load_network(args.net)
    if args.ps is not None:
        net = net.with_source_power(args.ps)
    beta, rep = _evaluate(net)
    if args.format == "csv":
        _rate_csv(net, beta, rep, out, f"net={args.net}")
    else:
        _rate_pretty(net, beta, rep, out)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    net = load_network(args.net)
    powers = source_powers(args.ps_min, args.ps_max, args.points, args.linear)
    reports = sweep(net, powers, args.jobs)
    if args.format == "csv":
        write_sweep_csv(reports, out, f"net={args.net}")
    else:
        out.write(f"{'P_s':>14} {'greedy':>10} {'baseline':>10} {'bound':>10} {'gap':>10}\n")
        for r in reports:
            out.write(f"{r.source_power:14.6g} {r.rate_bits:10.6f} {r.baseline_rate:10.6f} "
                      f"{r.mac_upper_bound:10.6f} {r.gap_to_bound:10.6f}\n")
    return EXIT_OK


def random_diamond(n: int, seed: int) -> LayeredNetwork:
    rng = np.random.default_rng(seed)
    return LayeredNetwork.diamond(
        rng.uniform(0.5, 3.0, n), rng.uniform(0.5, 3.0, n), rng.uniform(1.0, 10.0, n),
        float(rng.choice([1.0, 10.0, 100.0])),
    )


def cmd_verify(args, out) -> int:
    from .verify import run_verification

    if args.net:
        net = load_network(args.net)
        if args.ps is not None:
            net = net.with_source_power(args.ps)
    else:
        net = random_diamond(args.relays, args.seed)
        out.write(f"# random {args.relays}-relay diamond, seed {args.seed}\n")
    checks, summary = run_verification(net, args.resolution)
    for c in checks:
        out.write(c.line() + "\n")
    if summary["exact_class"]:
        out.write("exact class: greedy vector is expected to be optimal\n")
    out.write(f"oracle r={summary['resolution']}: greedy SNR {fmt(summary['greedy_snr'])}, "
              f"oracle SNR {fmt(summary['oracle_snr'])}, "
              f"relative shortfall {summary['relative_shortfall']:.3e}\n")
    ok = all(c.ok for c in checks)
    out.write("PASS\n" if ok else "FAIL\n")
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ancrelay", description="Amplify-and-forward rates for layered relay networks")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("rate", help="greedy scaling vector and rate report for one network")
    r.add_argument("--net", required=True, help="network config (JSON)")
    r.add_argument("--ps", type=float, help="override the source power")
    r.add_argument("--format", choices=("csv", "pretty"), default="pretty")
    r.set_defaults(func=cmd_rate)

    s = sub.add_parser("sweep", help="rates over a range of source powers (CSV)")
    s.add_argument("--net", required=True)
    s.add_argument("--ps-min", type=float, required=True)
    s.add_argument("--ps-max", type=float, required=True)
    s.add_argument("--points", type=int, default=50)
    s.add_argument("--linear", action="store_true", help="linear instead of log spacing")
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    s.add_argument("--format", choices=("csv", "pretty"), default="csv")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="certify the solver against the grid oracle")
    src = v.add_mutually_exclusive_group(required=True)
    src.add_argument("--net")
    src.add_argument("--relays", type=int, help="random diamond with this many relays")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--ps", type=float)
    v.add_argument("--resolution", type=int)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except (NetworkError, UsageError, GridTooLarge, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (DegenerateHyperplane, GreedyError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
