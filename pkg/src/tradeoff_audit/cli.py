"""Command-line front end.

Subcommands:

* ``test``      — run a domination test on sample files, emit JSON.
* ``band``      — compute a confidence band, emit CSV + SVG.
* ``sep-check`` — evaluate a separation condition, emit JSON.
* ``simulate``  — run a Monte Carlo experiment sweep, emit CSVs + SVG.
* ``oracle``    — exact curve of a finite-support pair, emit CSV.

Exit status: 0 success; 2 precondition failure (e.g. sample size too
small for the class margin); 1 I/O or parse errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import bands, curves, margins, sim, testing, witness

SCHEMA_VERSION = 1
OUT_ENV = "TRADEOFF_AUDIT_OUT"


class CliError(Exception):
    """Bad flags or malformed inputs; exits with status 1."""


def parse_curve_spec(spec: str) -> curves.TradeoffCurve:
    """`epsdelta:<e>,<d>` | `tv:<e>` | `gdp:<mu>` | `laplace:<mu>` |
    `curved:<rho>` | `pl:<csv path with header alpha,beta>`."""
    try:
        kind, _, arg = spec.partition(":")
        if kind == "epsdelta":
            e, d = arg.split(",")
            return curves.EpsDelta(float(e), float(d))
        if kind == "tv":
            return curves.TvTolerant(float(arg))
        if kind == "gdp":
            return curves.GaussianShift(float(arg))
        if kind == "laplace":
            return curves.LaplaceShift(float(arg))
        if kind == "curved":
            return curves.CurvedRho(float(arg))
        if kind == "pl":
            rows = np.loadtxt(arg, delimiter=",", skiprows=1, ndmin=2)
            return curves.PiecewiseLinear(rows[:, 0], rows[:, 1])
    except (ValueError, OSError, curves.CurveError) as exc:
        raise CliError(f"bad curve spec {spec!r}: {exc}") from exc
    raise CliError(f"bad curve spec {spec!r}: unknown kind {kind!r}")


def parse_class_spec(spec: str) -> witness.WitnessClass:
    """`halflines` | `intervals:<K>` | `alphabet:<k>`."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "halflines" and not arg:
            return witness.HalfLines()
        if kind == "intervals":
            return witness.IntervalUnion(int(arg))
        if kind == "alphabet":
            return witness.FiniteAlphabet(int(arg))
    except (ValueError, witness.ErmError) as exc:
        raise CliError(f"bad class spec {spec!r}: {exc}") from exc
    raise CliError(f"bad class spec {spec!r}")


def parse_generator_spec(spec: str) -> sim.GeneratorSpec:
    kind, _, arg = spec.partition(":")
    try:
        if kind == "gaussian":
            return sim.GaussianShiftPair(float(arg))
        if kind == "laplace":
            return sim.LaplaceShiftPair(float(arg))
        if kind == "bump":
            ks, dq = arg.split(",")
            return sim.BumpPair(int(ks), float(dq))
        if kind == "basepair":
            return sim.BasePair(parse_curve_spec(arg))
    except (ValueError, CliError) as exc:
        raise CliError(f"bad generator spec {spec!r}: {exc}") from exc
    raise CliError(f"bad generator spec {spec!r}")


def _load_data(args) -> witness.SampleData:
    if getattr(args, "input", None):
        return witness.load_samples_csv(args.input)
    if getattr(args, "alphabet_input", None):
        return witness.load_alphabet_csv(args.alphabet_input)
    if getattr(args, "x", None) and getattr(args, "y", None):
        return witness.load_sample_files(args.x, args.y)
    raise CliError("need --input, --alphabet-input, or both --x and --y")


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _witness_json(ws, data):
    if ws is None:
        return None
    return {
        "cell_ranges": [list(r) for r in ws.cell_ranges],
        "intervals": [
            [float(a), float(b)] for a, b in ws.intervals(data)
        ],
    }


def _margins_json(m):
    return {
        "n": m.n,
        "delta": m.delta,
        "vc_dim": m.vc_dim,
        "eta": m.eta,
        "tau": m.tau,
    }


def _setup_matplotlib():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # deterministic SVG output: fixed hash salt, no embedded timestamps
    plt.rcParams["svg.hashsalt"] = "tradeoff-audit"
    return plt


def _save_svg(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def _new_figure(plt):
    # fixed 800x600 viewport
    return plt.figure(figsize=(8, 6), dpi=100)


def _cmd_test(args) -> int:
    data = _load_data(args)
    f0 = parse_curve_spec(args.f0)
    wclass = parse_class_spec(args.witness_class)
    if args.method == "mlr":
        outcome = testing.mlr_test(data, f0, args.delta)
    elif args.method == "adaptive":
        outcome = testing.adaptive_test(data, f0, args.delta, args.kmax)
    else:
        config = testing.TestConfig(
            f0=f0,
            witness_class=wclass,
            delta=args.delta,
            margin_kind=args.margin,
        )
        outcome = testing.general_test(data, config)
    result = {
        "schema": SCHEMA_VERSION,
        "reject": outcome.reject,
        "witness": _witness_json(outcome.witness, data),
        "k": outcome.piece_index,
        "slack": outcome.slack,
        "margins": _margins_json(outcome.margins),
        "selected_level": outcome.selected_level,
    }
    path = _out_dir(args) / "test_result.json"
    path.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    print(path)
    return 0


def _cmd_band(args) -> int:
    truth = None
    if args.gen:
        spec = parse_generator_spec(args.gen)
        data = sim.sample_pair(spec, args.n, args.seed)
        truth = spec.truth_curve()
    else:
        data = _load_data(args)
    wclass = parse_class_spec(args.witness_class)
    alphas = np.linspace(0.0, 1.0, args.grid)
    result = bands.compute_band(data, wclass, args.delta, alphas=alphas)
    out = _out_dir(args)
    bands.write_band_csv(result, out / "band.csv")

    plt = _setup_matplotlib()
    fig = _new_figure(plt)
    ax = fig.add_subplot(111)
    ax.plot(result.alphas, result.upper, label="upper", color="tab:blue")
    ax.plot(
        result.alphas, result.lower_gcm, label="lower (convexified)",
        color="tab:orange",
    )
    if truth is not None:
        ax.plot(
            result.alphas,
            truth.evaluate(result.alphas),
            label="true curve",
            color="black",
            linestyle="--",
        )
    ax.set_xlabel("type-I error budget")
    ax.set_ylabel("type-II error")
    ax.set_title("confidence band for the trade-off curve")
    ax.legend()
    _save_svg(fig, out / "band.svg")
    plt.close(fig)
    print(out / "band.csv")
    return 0


def _cmd_sep_check(args) -> int:
    spec = testing.SeparationSpec(
        f0=parse_curve_spec(args.f0),
        f1=parse_curve_spec(args.f1),
        n=args.n,
        delta=args.delta,
        vc_dim=args.vc_dim,
        eta1=args.eta1,
        eta2=args.eta2,
    )
    report = testing.check_separation(spec, args.mode, args.grid)
    result = {
        "schema": SCHEMA_VERSION,
        "mode": args.mode,
        "holds": report.holds,
        "worst_alpha": report.worst_alpha,
        "worst_margin": report.worst_margin,
    }
    path = _out_dir(args) / "sep_check.json"
    path.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    print(path)
    return 0


def _cmd_simulate(args) -> int:
    config = sim.ExperimentConfig()
    if args.family:
        config = dataclasses.replace(config, families=(args.family,))
    report = sim.run_experiment(
        args.kind,
        config=config,
        reps=args.reps,
        parallelism=args.parallelism,
        master_seed=args.seed,
    )
    out = _out_dir(args)
    report.to_csv(out / f"simulate_{args.kind}.csv")
    report.aggregates_to_csv(out / f"simulate_{args.kind}_rates.csv")

    plt = _setup_matplotlib()
    fig = _new_figure(plt)
    ax = fig.add_subplot(111)
    agg = report.aggregates()
    labels = sorted(agg)
    ax.bar(range(len(labels)), [agg[k] for k in labels])
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels([f"{c}|{cls}" for c, cls in labels], rotation=90, fontsize=5)
    ax.set_ylabel("rate")
    ax.set_title(f"{args.kind}: per-cell rates")
    fig.tight_layout()
    _save_svg(fig, out / f"simulate_{args.kind}.svg")
    plt.close(fig)
    print(out / f"simulate_{args.kind}.csv")
    return 0


def _cmd_oracle(args) -> int:
    if args.counts:
        data = witness.load_alphabet_csv(args.counts)
        p = data.cx / data.cx.sum()
        q = data.cy / data.cy.sum()
    else:
        if not (args.p and args.q):
            raise CliError("oracle np-curve needs --p and --q or --counts")
        try:
            p = np.array([float(v) for v in args.p.split(",")])
            q = np.array([float(v) for v in args.q.split(",")])
        except ValueError as exc:
            raise CliError(f"bad weight list: {exc}") from exc
    curve = curves.np_curve_discrete(p, q)
    out = _out_dir(args)
    path = out / "np_curve.csv"
    with open(path, "w") as fh:
        fh.write("alpha,beta\n")
        for a, b in zip(curve.alphas, curve.betas):
            fh.write(f"{a:.17g},{b:.17g}\n")
    print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tradeoff-audit",
        description="Finite-sample testing and confidence bands for "
        "Neyman-Pearson trade-off curves",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p):
        p.add_argument("--x", help="newline-delimited sample file from P")
        p.add_argument("--y", help="newline-delimited sample file from Q")
        p.add_argument("--input", help="CSV with header value,source")
        p.add_argument(
            "--alphabet-input",
            dest="alphabet_input",
            help="CSV with header symbol,count_p,count_q",
        )
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")

    p = sub.add_parser("test", help="run a domination test")
    add_io(p)
    p.add_argument("--f0", required=True, help="benchmark curve spec")
    p.add_argument(
        "--class",
        dest="witness_class",
        default="halflines",
        help="witness class spec",
    )
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument(
        "--method", choices=("mlr", "general", "adaptive"), default="general"
    )
    p.add_argument("--margin", choices=("normalized", "dkw"), default="normalized")
    p.add_argument("--kmax", type=int, default=4)
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("band", help="compute a confidence band")
    add_io(p)
    p.add_argument("--gen", help="generator spec (alternative to sample files)")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--class", dest="witness_class", default="halflines"
    )
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--grid", type=int, default=201)
    p.set_defaults(func=_cmd_band)

    p = sub.add_parser("sep-check", help="evaluate a separation condition")
    p.add_argument("--f0", required=True)
    p.add_argument("--f1", required=True)
    p.add_argument(
        "--mode", choices=("mlr", "general", "misspecified"), default="general"
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--vc-dim", dest="vc_dim", type=int, default=2)
    p.add_argument("--eta1", type=float, default=0.0)
    p.add_argument("--eta2", type=float, default=0.0)
    p.add_argument("--grid", type=int, default=1001)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sep_check)

    p = sub.add_parser("simulate", help="run a Monte Carlo experiment")
    p.add_argument("kind", choices=("power", "coverage", "adaptive"))
    p.add_argument("--family", choices=("gaussian", "laplace"))
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("oracle", help="exact curve of a discrete pair")
    p.add_argument("what", choices=("np-curve",))
    p.add_argument("--p", help="comma-separated weights for P")
    p.add_argument("--q", help="comma-separated weights for Q")
    p.add_argument("--counts", help="CSV with header symbol,count_p,count_q")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_oracle)

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on unknown flags; that code is reserved for
        # precondition failures here, so remap parse errors to 1
        return 0 if not exc.code else 1
    try:
        return args.func(args)
    except (margins.MarginError,) as exc:
        print(f"precondition failure: {exc}", file=sys.stderr)
        return 2
    except (
        CliError,
        witness.DataError,
        witness.ErmError,
        witness.InstanceTooLarge,
        curves.CurveError,
        OSError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
