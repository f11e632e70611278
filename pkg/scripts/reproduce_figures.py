"""Regenerate the contour-map and efficiency-curve data as CSV, and optionally plot them.

    python3 scripts/reproduce_figures.py --out-dir figures [--plot]

Writes sweep_eta1.csv and sweep_eta0.3.csv (B_CHSH over the 60 x 60 (r, R)
grid) and eta_scan.csv (B_CHSH against detector efficiency at r = 0.6,
R = 0.9891). ``--plot`` needs matplotlib (``pip install .[plot]``).
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from bellcv import cli


def run(*argv: str) -> None:
    code = cli.main(list(argv))
    if code:
        sys.exit(code)


def load_grid(path: Path):
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    r = np.unique([float(x["r"]) for x in rows])
    refl = np.unique([float(x["reflectance"]) for x in rows])
    b = np.array([float(x["b_chsh"]) for x in rows]).reshape(r.size, refl.size)
    return r, refl, b


def plot(out_dir: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 3, figsize=(15, 4.5))
    for ax, eta in zip(axes[:2], ("1", "0.3")):
        r, refl, b = load_grid(out_dir / f"sweep_eta{eta}.csv")
        cs = ax.contourf(r, refl, b.T, levels=20, cmap="viridis")
        ax.contour(r, refl, b.T, levels=[2.0], colors="w", linewidths=1.5)
        fig.colorbar(cs, ax=ax, label="B_CHSH")
        ax.set(xlabel="r", ylabel="R", title=f"eta = {eta}")
    with (out_dir / "eta_scan.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    axes[2].plot([float(x["eta"]) for x in rows], [float(x["b_chsh"]) for x in rows], "o-")
    axes[2].axhline(2.0, color="k", lw=0.8, ls="--")
    axes[2].set(xlabel="eta", ylabel="B_CHSH", title="r = 0.6, R = 0.9891")
    fig.tight_layout()
    fig.savefig(out_dir / "b_chsh.png", dpi=120)
    print(f"wrote {out_dir / 'b_chsh.png'}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("figures"))
    ap.add_argument("--steps", type=int, default=60)
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    steps = str(args.steps)
    for eta in ("1", "0.3"):
        run("sweep", "--eta", eta, "--r-steps", steps, "--reflectance-steps", steps,
            "--out", str(args.out_dir / f"sweep_eta{eta}.csv"))
    run("eta-scan", "--r", "0.6", "--reflectance", "0.9891", "--eta-min", "0.05", "--eta-steps", "20",
        "--out", str(args.out_dir / "eta_scan.csv"))
    if args.plot:
        plot(args.out_dir)


if __name__ == "__main__":
    main()
