#!/usr/bin/env python3
"""Performance/complexity tradeoff of two-stage detection on a large
receive array: the full search against splits of the transmit antennas."""

import argparse

from quantmimo import harness
from quantmimo.harness import ExperimentConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--channels", type=int, default=50)
    ap.add_argument("--vectors", type=int, default=200)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="sic_tradeoff.csv")
    args = ap.parse_args()

    base = dict(
        n_t=6, n_r=32, bits=2, modulation="qpsk",
        snr_grid_db=(0.0, 5.0, 10.0), channel_count=args.channels,
        vectors_per_channel=args.vectors, seed=args.seed,
        training="explicit", csir="perfect", artificial_count=16,
        detectors=("mcd",), threads=args.threads)
    all_records = []
    runs = [("full search", ExperimentConfig(**base))]
    for n_t1 in (5, 4):
        runs.append((
            f"split n_t1={n_t1}",
            ExperimentConfig(
                **base, framework="sic", n_t1=n_t1, first_stage_count=1)))
    for label, cfg in runs:
        records = harness.run_ser_experiment(cfg)
        all_records.extend(records)
        evals = (4**cfg.n_t1 + 4 ** (cfg.n_t - cfg.n_t1)
                 if cfg.framework == "sic" else 4**cfg.n_t)
        for r in records:
            print(f"{label:14s} {r.snr_db:5.1f} dB  ser={r.ser:.5f}  "
                  f"candidates/vector={evals}")
    harness.write_csv(all_records, args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
