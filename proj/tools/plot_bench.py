#!/usr/bin/env python3
"""Plot the CSV files written by `sfs bench` and `sfs variance`.

    python3 tools/plot_bench.py bench-gaussian1d-1.csv -o mse.png
    python3 tools/plot_bench.py variance-gaussian1d-1.csv variance-refreshed.csv -o var.png
"""
import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def read(path):
    return pd.read_csv(path, comment="#")


def plot_bench(ax, df, label):
    for kind, g in df.groupby("estimator", sort=False):
        x, y = g["mean_cost_units"].to_numpy(), g["mse"].to_numpy()
        slope = np.polyfit(np.log(x), np.log(y), 1)[0] if len(g) >= 2 else float("nan")
        ax.loglog(x, y, "o-", label=f"{label}{kind} (slope {slope:.2f})")
    ax.set_xlabel("cost units")
    ax.set_ylabel("MSE")


def plot_variance(ax, df, label):
    ax.semilogy(df["level"], df["variance"], "o-", label=label.rstrip(": ") or "variance")
    ax.set_xlabel("level")
    ax.set_ylabel("Var(fine - coarse)")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("csv", nargs="+")
    ap.add_argument("-o", "--output", default="plot.png")
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for path in args.csv:
        df = read(path)
        label = f"{path}: " if len(args.csv) > 1 else ""
        if "estimator" in df.columns:
            plot_bench(ax, df, label)
        elif "variance" in df.columns:
            plot_variance(ax, df, label or path)
        else:
            raise SystemExit(f"{path}: not a bench or variance file")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)


if __name__ == "__main__":
    main()
