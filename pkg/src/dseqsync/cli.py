"""Command-line front end for the CFO estimation experiments.

Subcommands: gen-seq, zc-symmetry, ratio-curve, mse-sweep, crlb, lemma-var,
optimize, multiuser. Global flags --config/--seed/--out/--trials override the
config file; --plot renders a PNG figure next to the CSV output.
"""

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from dseqsync import report, simulate
from dseqsync.analysis import lemma_aux_variance, lemma_sumdiff_variance
from dseqsync.config import load_config
from dseqsync.design import ThetaCodebook, derive_vue, optimize_aux, optimize_sumdiff
from dseqsync.estimators import aux_ratio_closed_form, sumdiff_ratio_closed_form
from dseqsync.sequences import (
    AuxParams,
    SumDiffParams,
    aux_pair,
    sumdiff_pair,
    zc_generate,
    zc_time_symbol,
)


def _build_parser() -> argparse.ArgumentParser:
    # Global flags are accepted both before and after the subcommand.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="INI config file")
    common.add_argument(
        "--seed", type=int, default=argparse.SUPPRESS, help="master seed override"
    )
    common.add_argument("--out", default=argparse.SUPPRESS, help="output CSV path")
    common.add_argument(
        "--trials", type=int, default=argparse.SUPPRESS, help="trial count override"
    )
    common.add_argument(
        "--plot",
        action="store_true",
        default=argparse.SUPPRESS,
        help="render a PNG figure next to the CSV",
    )

    parser = argparse.ArgumentParser(
        prog="dseqsync",
        description="Double-sequence CFO estimation experiments under few-bit ADCs",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser(
        "gen-seq", parents=[common], help="dump a synchronization sequence as CSV"
    )
    gen.add_argument(
        "--kind",
        default="zc",
        choices=["zc", "zc-symbol", "aux0", "aux1", "sum", "diff"],
        help="which sequence to generate",
    )
    sub.add_parser(
        "zc-symmetry", parents=[common], help="matched-filter symmetry metric vs bit depth"
    )
    sub.add_parser("ratio-curve", parents=[common], help="ratio metric across the design range")
    sub.add_parser("mse-sweep", parents=[common], help="MSE versus snr_db | cfo | bits")
    sub.add_parser("crlb", parents=[common], help="1-bit MSE against the Fisher bound")
    lemma = sub.add_parser(
        "lemma-var", parents=[common], help="closed-form variance over a CFO grid"
    )
    lemma.add_argument("--points", type=int, default=21, help="CFO grid size")
    sub.add_parser("multiuser", parents=[common], help="multi-user MSE across CFO ranges")
    sub.add_parser(
        "optimize", parents=[common], help="design-parameter grid search from UE statistics"
    )
    return parser


def _default_out(command: str) -> str:
    return f"{command.replace('-', '_')}.csv"


def _make_sequence(cfg, kind):
    aux = AuxParams.from_k_prime(cfg.design.theta, cfg.design.k_prime, cfg.n)
    sd = SumDiffParams(eta=cfg.design.eta_for(cfg.n), n=cfg.n)
    if kind == "zc":
        return zc_generate(cfg.n_zc[0], cfg.zc_root)
    if kind == "zc-symbol":
        return zc_time_symbol(cfg.n_zc[0], cfg.zc_root, cfg.n)
    if kind in ("aux0", "aux1"):
        return aux_pair(aux)[0 if kind == "aux0" else 1]
    return sumdiff_pair(sd)[0 if kind == "sum" else 1]


def _cmd_gen_seq(cfg, args, out):
    seq = _make_sequence(cfg, args.kind)
    rows = [(i, f"{v.real:.17g}", f"{v.imag:.17g}") for i, v in enumerate(seq)]
    simulate.write_csv(out, ["index", "re", "im"], rows)
    if args.plot:
        report.plot_sequence(seq, str(Path(out).with_suffix(".png")), title=args.kind)


def _cmd_zc_symmetry(cfg, args, out):
    rows = simulate.run_zc_symmetry(cfg)
    header, csv_rows = simulate.zc_symmetry_csv_rows(rows)
    simulate.write_csv(out, header, csv_rows)
    if args.plot:
        report.plot_zc_symmetry(rows, str(Path(out).with_suffix(".png")))


def _cmd_ratio_curve(cfg, args, out):
    rows = simulate.run_ratio_curve(cfg)
    header, csv_rows = simulate.ratio_curve_csv_rows(rows)
    simulate.write_csv(out, header, csv_rows)
    if args.plot:
        report.plot_ratio_curve(rows, str(Path(out).with_suffix(".png")))


def _cmd_mse_sweep(cfg, args, out):
    rows = simulate.run_mse_sweep(cfg)
    header, csv_rows = simulate.sweep_csv_rows(rows)
    simulate.write_csv(out, header, csv_rows)
    if args.plot:
        report.plot_mse_sweep(rows, str(Path(out).with_suffix(".png")))


def _cmd_crlb(cfg, args, out):
    rows = simulate.run_crlb_compare(cfg)
    header, csv_rows = simulate.crlb_csv_rows(rows)
    simulate.write_csv(out, header, csv_rows)
    if args.plot:
        report.plot_crlb_compare(rows, str(Path(out).with_suffix(".png")))


def _cmd_multiuser(cfg, args, out):
    rows = simulate.run_multiuser(cfg)
    header, csv_rows = simulate.multiuser_csv_rows(rows)
    simulate.write_csv(out, header, csv_rows)
    if args.plot:
        report.plot_multiuser(rows, str(Path(out).with_suffix(".png")))


def _cmd_lemma_var(cfg, args, out):
    aux = AuxParams.from_k_prime(cfg.design.theta, cfg.design.k_prime, cfg.n)
    sd = SumDiffParams(eta=cfg.design.eta_for(cfg.n), n=cfg.n)
    kappa = 0.0
    if cfg.bits[0] != math.inf:
        from dseqsync.quantizer import kappa_for_bits

        kappa = kappa_for_bits(cfg.bits[0])
    gamma = 10.0 ** (cfg.snr_db[0] / 10.0)
    rows = []
    for method in cfg.methods:
        if method == "aux":
            mus = aux.theta + np.linspace(-0.95, 0.95, args.points) * aux.delta
            for mu in mus:
                alpha = aux_ratio_closed_form(mu, aux)
                var = lemma_aux_variance(
                    cfg.n, kappa, aux.theta, aux.delta, mu, gamma, alpha
                ).variance
                rows.append((method, f"{mu:.10g}", f"{var:.10g}"))
        elif method == "sumdiff":
            branch = 4.0 * math.pi / cfg.n
            mus = sd.eta + np.linspace(0.05, 0.95, args.points) * branch
            for mu in mus:
                beta = sumdiff_ratio_closed_form(mu, sd)
                var = lemma_sumdiff_variance(
                    cfg.n, kappa, sd.eta, mu, gamma, beta
                ).variance
                rows.append((method, f"{mu:.10g}", f"{var:.10g}"))
    simulate.write_csv(out, ["method", "mu", "variance"], rows)


def _read_stats_csv(path: str):
    """UE statistics: snr_db,bits,cfo_normalized rows, several per UE allowed."""
    per_ue: dict[tuple[float, float], list[float]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (float(row["snr_db"]), float(row["bits"]))
            per_ue.setdefault(key, []).append(float(row["cfo_normalized"]))
    return per_ue


def _cmd_optimize(cfg, args, out):
    if not cfg.stats_csv:
        raise ValueError("optimize needs [optimize] stats_csv in the config")
    per_ue = _read_stats_csv(cfg.stats_csv)
    stats = []
    for (snr_db, bits), cfos in per_ue.items():
        mus = [2.0 * math.pi * eps / cfg.n for eps in cfos]
        stats.append((10.0 ** (snr_db / 10.0), bits, mus))
    rep_bits = next((b for _, b, _ in stats if b != math.inf), 2)
    vue = derive_vue(stats, representative_bits=int(rep_bits))
    codebook = ThetaCodebook.uniform(cfg.codebook_size, cfg.codebook_lo, cfg.codebook_hi)
    rows = []
    aux_res = optimize_aux(codebook, cfg.n, vue)
    rows.append(
        (
            "aux",
            f"{aux_res.theta_opt:.10g}",
            f"{aux_res.delta_opt:.10g}",
            aux_res.k_prime(cfg.n),
            f"{aux_res.objective:.10g}",
            aux_res.scanned,
        )
    )
    sd_res = optimize_sumdiff(codebook, cfg.n, vue)
    rows.append(
        (
            "sumdiff",
            f"{sd_res.theta_opt:.10g}",
            f"{sd_res.delta_opt:.10g}",
            "",
            f"{sd_res.objective:.10g}",
            sd_res.scanned,
        )
    )
    simulate.write_csv(
        out, ["method", "reference_opt", "spacing_opt", "k_prime", "objective", "scanned"], rows
    )


_COMMANDS = {
    "gen-seq": _cmd_gen_seq,
    "zc-symmetry": _cmd_zc_symmetry,
    "ratio-curve": _cmd_ratio_curve,
    "mse-sweep": _cmd_mse_sweep,
    "crlb": _cmd_crlb,
    "lemma-var": _cmd_lemma_var,
    "multiuser": _cmd_multiuser,
    "optimize": _cmd_optimize,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    # Global flags use SUPPRESS defaults so they survive subparser re-parsing;
    # fill in the unset ones here.
    for name, default in (
        ("config", None), ("seed", None), ("out", None), ("trials", None), ("plot", False),
    ):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, master_seed=args.seed)
        if args.trials is not None:
            cfg = replace(cfg, trials=args.trials)
        out = args.out or _default_out(args.command)
        _COMMANDS[args.command](cfg, args, out)
    except Exception as exc:  # noqa: BLE001 - uniform machine-readable failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
