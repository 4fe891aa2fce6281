"""Command-line front end.

Subcommands: ``ser`` (SNR sweep), ``bound`` (error-bound validation),
``ccdf`` (minimum-distance distribution), and ``demo`` (the noise-free
two-antenna walkthrough). Results go to stdout as CSV, or to ``--out``.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import detection, harness, training
from .core import QuantizerConfig, enumerate_symbols, bpsk, transmit_batch, vectors_from_levels


def _add_experiment_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config", required=True, help="path to a key=value config file")
    parser.add_argument(
        "--seed", type=int, default=None, help="override the config seed")
    parser.add_argument(
        "--out", default=None, help="write results as CSV to this path")
    parser.add_argument(
        "--threads", type=int, default=None,
        help="worker processes for channel realizations")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quantmimo",
        description="Monte Carlo experiments for MIMO detection with "
                    "low-resolution ADCs")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("ser", "symbol-error-rate sweep over the configured SNR grid"),
        ("bound", "simulated vector-error probability vs the analytic bound"),
        ("ccdf", "minimum-distance distribution, analytic vs Monte Carlo"),
    ):
        _add_experiment_args(sub.add_parser(name, help=text))
    sub.add_parser("demo", help="run the noise-free 2x2 walkthrough example")
    return parser


def _demo() -> None:
    h = np.array([[0.5, 1.0], [1.0, 0.0]], dtype=complex)
    cfg = QuantizerConfig(bits=1, step=2.0, real_mode=True)
    book = enumerate_symbols(bpsk(), 2)
    schedule = training.build_implicit_pilots(book, 1)
    levels = transmit_batch(h, schedule.rows(), 0.0, cfg)
    model = training.learn_implicit(
        vectors_from_levels(levels, cfg), book, 1)
    print("channel:")
    print(np.array2string(h.real))
    print("trained pairs (symbol vector -> one-bit observation):")
    for k in range(book.size):
        y = model.support(k)[0]
        print(f"  x{k + 1} = {np.real(book.vectors[k])} -> y = {np.asarray(y.values)}")
    target = vectors_from_levels(np.array([[1, 0]]), cfg)[0]
    cb = detection.centroids(model)
    results = {
        "emld": detection.detect_emld(target, model),
        "mmd": detection.detect_mmd(target, model),
        "mcd": detection.detect_mcd(target, cb),
    }
    print(f"detecting y = {np.asarray(target.values)}:")
    for name, k in results.items():
        print(f"  {name}: index {k + 1} (symbol vector "
              f"{np.real(book.vectors[k])})")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "demo":
        _demo()
        return 0
    try:
        cfg = harness.load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.threads is not None:
            cfg = replace(cfg, threads=args.threads)
        cfg.validate()
        runner = {
            "ser": harness.run_ser_experiment,
            "bound": harness.run_bound_validation,
            "ccdf": harness.run_ccdf_experiment,
        }[args.command]
        records = runner(cfg)
    except (harness.ConfigError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    csv_text = harness.render_csv(records)
    if args.out:
        harness.write_csv(records, args.out)
    else:
        sys.stdout.write(csv_text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
