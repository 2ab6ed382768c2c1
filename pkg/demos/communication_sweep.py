"""Message size against n at fixed average degree.

Doubles n from 2^10 to 2^14 on G(n, p) graphs with average degree 32 and
prints the largest message in words, normalised by n log2 n, together with
the log-log slope.
"""

import argparse

from robustmatch.harness import ExperimentConfig, sweep_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-exp", type=int, default=14)
    ap.add_argument("--trials", type=int, default=1)
    args = ap.parse_args()
    cfg = ExperimentConfig(
        protocol={"epsilon": 0.2, "lam": 0.25, "beta": 8, "fallback_edge_threshold": 0},
        trials=args.trials,
        sweep={"n": [2**e for e in range(10, args.max_exp + 1)], "avg_degree": 32},
    )
    rep = sweep_experiment(cfg)
    print(f"{'n':>7} {'m':>8} {'max words':>10} {'/ n log2 n':>11} {'ratio':>7}")
    for pt in rep["points"]:
        print(f"{pt['n']:>7} {pt['m']:>8} {pt['max_words']:>10.0f} {pt['max_words_over_nlog2n']:>11.4f} "
              f"{pt['mean_ratio']:>7.4f}")
    s = rep["summary"]
    print(f"slope of log words vs log n: {s['exponent']:.3f} "
          f"(after dividing by log2 n: {s['exponent_log_corrected']:.3f}); C = {s['constant_C']:.4f}")


if __name__ == "__main__":
    main()
