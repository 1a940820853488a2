#!/usr/bin/env python3
"""Render the CSV files listed in an experiment manifest.

Usage: plot_results.py <manifest.json> [output-dir]

Files sharing a figure title are overlaid in one plot. Axis labels and
scales come from the manifest; nothing here is load-bearing, the CSVs are
the contract.
"""
import csv
import json
import sys
from collections import defaultdict
from pathlib import Path


def read_csv(path):
    rows = [r for r in csv.reader(path.open()) if r and not r[0].startswith("#")]
    header, data = rows[0], rows[1:]
    cols = list(zip(*[[float(v) for v in r[:2]] for r in data]))
    return header[:2], cols


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    manifest = Path(sys.argv[1])
    out_dir = Path(sys.argv[2]) if len(sys.argv) > 2 else manifest.parent
    entries = json.loads(manifest.read_text())["outputs"]

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        sys.exit("matplotlib is not installed; the CSVs remain usable as-is")

    by_figure = defaultdict(list)
    for e in entries:
        by_figure[e["figure"]].append(e)

    for idx, (title, group) in enumerate(by_figure.items()):
        fig, ax = plt.subplots()
        for e in group:
            path = manifest.parent / e["file"]
            (xl, yl), (x, y) = read_csv(path)
            ax.plot(x, y, label=Path(e["file"]).stem)
        ax.set_title(title)
        ax.set_xlabel(group[0].get("x_label", ""))
        ax.set_ylabel(group[0].get("y_label", ""))
        ax.set_xscale(group[0].get("x_scale", "linear"))
        ax.set_yscale(group[0].get("y_scale", "linear"))
        if len(group) > 1:
            ax.legend()
        target = out_dir / f"figure_{idx:02d}.png"
        fig.savefig(target, dpi=150, bbox_inches="tight")
        print(target)


if __name__ == "__main__":
    main()
