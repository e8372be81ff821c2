#!/usr/bin/env python3
"""Accuracy sweep of the per-state chain mechanism on the bundled corpus.

Rebuilds the bigram chain from ``data/sample_corpus.txt``, then measures
the mean Hamming error of the released word across a privacy-budget grid
for three starting states.  Writes ``epsilon_sweep.csv`` (same schema as
the ``worddp experiment`` command, which this mirrors).
"""

from __future__ import annotations

import argparse
from pathlib import Path

from worddp.analytics import write_accuracy_csv
from worddp.cli import ExperimentSpec, run_experiment
from worddp.markov import build_bigram

ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument(
        "--out", type=Path, default=Path("epsilon_sweep.csv")
    )
    args = parser.parse_args()

    corpus = (ROOT / "data" / "sample_corpus.txt").read_text(encoding="utf-8")
    sentence = (ROOT / "data" / "sample_input.txt").read_text(encoding="utf-8")
    chain = build_bigram(corpus)
    spec = ExperimentSpec(
        mechanism="mc-online",
        epsilon_grid=(0.01, 0.1, 1.0, 5.0, 10.0),
        k=1,
        samples=args.samples,
        input_tokens=tuple(sentence.split()),
        seed=args.seed,
        chain=chain,
        initial_states=("anywhere", "green", "could"),
    )
    rows = run_experiment(spec)
    write_accuracy_csv(args.out, rows)
    for row in rows:
        print(
            f"start={row['initial_state']:9s} eps={row['epsilon']:<6g} "
            f"mean error={row['empirical_mean']:.3f} "
            f"(se {row['empirical_se']:.3f})"
        )
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
