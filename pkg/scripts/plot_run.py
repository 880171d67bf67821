"""Figures from a finished run directory (needs the ``plots`` extra).

Usage:
    python3 scripts/plot_run.py run/ [--out run/figures]

Draws the surrogate and rigorous Pareto fronts (first two objectives), the
parity plot of every trained output and its training loss curves.
"""

import argparse
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from certopt.manifest import RunManifest  # noqa: E402


def load_f(path: Path) -> np.ndarray:
    """Objective columns (``f1``, ``f2``, ...) of an archive CSV."""
    names = path.read_text().splitlines()[0].split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, [i for i, n in enumerate(names) if n.startswith("f")]]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("run")
    parser.add_argument("--out")
    args = parser.parse_args()
    m = RunManifest.load(args.run)
    out = Path(args.out) if args.out else m.root / "figures"
    out.mkdir(parents=True, exist_ok=True)
    art = m.artifacts

    if "archive" in art and "rigorous_archive" in art:
        fig, ax = plt.subplots(figsize=(5, 4))
        for key, style in (("rigorous_archive", "k."), ("archive", "r+")):
            f = load_f(m.resolve(art[key]))
            ax.plot(f[:, 0], f[:, 1], style, label=key.replace("_", " "), ms=4)
        ax.set(xlabel="f1", ylabel="f2", title=f"{m.problem} Pareto fronts")
        ax.legend()
        fig.savefig(out / "fronts.png", dpi=150, bbox_inches="tight")

    for name, rel in art.get("parity", {}).items():
        pred, actual = np.loadtxt(m.resolve(rel), delimiter=",", skiprows=1, ndmin=2).T
        metrics = json.loads(m.resolve(art["metrics"][name]).read_text())
        fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 4))
        a1.plot(actual, pred, ".", ms=3)
        lo, hi = actual.min(), actual.max()
        a1.plot([lo, hi], [lo, hi], "k--", lw=1)
        a1.set(xlabel="actual", ylabel="predicted", title=f"{name} parity")
        a2.semilogy(metrics["loss"]["train"], label="train")
        a2.semilogy(metrics["loss"]["val"], label="val")
        a2.set(xlabel="epoch", ylabel="MSE", title=f"{name} loss")
        a2.legend()
        fig.savefig(out / f"{name}.png", dpi=150, bbox_inches="tight")
    print(f"figures written to {out}")


if __name__ == "__main__":
    main()
