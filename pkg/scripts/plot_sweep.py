#!/usr/bin/env python3
"""Plot a sweep CSV: expected completion time and the cyclic-balanced gap.

Usage:
    python3 scripts/plot_sweep.py sweep.csv [-o plot.png]

Needs matplotlib, which is deliberately not a package dependency.
"""

import argparse
import csv
import sys
from collections import defaultdict


def load_rows(path):
    with open(path, newline="") as fh:
        return [
            {
                "policy": row["policy"],
                "B": int(row["B"]),
                "rate": float(row["rate"]),
                "mean": float(row["mean"]),
                "ci_low": float(row["ci_low"]),
                "ci_high": float(row["ci_high"]),
                "exact": float(row["exact"]) if row["exact"] else None,
            }
            for row in csv.DictReader(fh)
        ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("csv_path")
    parser.add_argument("-o", "--out", help="write the figure instead of showing it")
    args = parser.parse_args(argv)

    try:
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is required: pip install matplotlib", file=sys.stderr)
        return 1

    rows = load_rows(args.csv_path)
    if not rows:
        print(f"no rows in {args.csv_path}", file=sys.stderr)
        return 1

    series = defaultdict(list)
    for row in sorted(rows, key=lambda r: r["rate"]):
        series[(row["policy"], row["B"])].append(row)

    fig, (ax_time, ax_gap) = plt.subplots(1, 2, figsize=(11, 4.5))
    for (policy, b), points in sorted(series.items()):
        rates = [p["rate"] for p in points]
        ax_time.plot(rates, [p["mean"] for p in points], marker=".", label=f"{policy} B={b}")
        ax_time.fill_between(
            rates, [p["ci_low"] for p in points], [p["ci_high"] for p in points], alpha=0.2
        )
        if all(p["exact"] is not None for p in points):
            ax_time.plot(rates, [p["exact"] for p in points], linestyle="--", linewidth=0.8)
    ax_time.set_xscale("log")
    ax_time.set_yscale("log")
    ax_time.set_xlabel("service rate")
    ax_time.set_ylabel("expected completion time")
    ax_time.set_title("Monte Carlo (solid, with CI) vs exact (dashed)")
    ax_time.legend(fontsize=8)

    policies = {policy for policy, _ in series}
    if {"balanced", "cyclic"} <= policies:
        b_values = sorted({b for _, b in series})
        for b in b_values:
            bal = {p["rate"]: p for p in series.get(("balanced", b), [])}
            cyc = {p["rate"]: p for p in series.get(("cyclic", b), [])}
            rates = sorted(set(bal) & set(cyc))
            if not rates:
                continue
            gaps = [cyc[r]["mean"] - bal[r]["mean"] for r in rates]
            ax_gap.plot(rates, gaps, marker=".", label=f"B={b}")
        ax_gap.set_xscale("log")
        ax_gap.set_xlabel("service rate")
        ax_gap.set_ylabel("cyclic minus balanced")
        ax_gap.set_title("Overlap penalty by batch count")
        ax_gap.legend(fontsize=8)
    else:
        ax_gap.set_axis_off()

    fig.tight_layout()
    if args.out:
        fig.savefig(args.out, dpi=150)
        print(f"wrote {args.out}")
    else:
        plt.show()
    return 0


if __name__ == "__main__":
    sys.exit(main())
