"""Spread of the robustness metric across run seeds for one benchmark.

Usage:
    python3 scripts/seed_sweep.py zdt3 --seeds 0 1 2 3 4 [--out sweep]

Each seed is a full ``certopt repro``. Prints Rb per objective and how many
seeds certify at epsilon, then writes ``<out>/<problem>.json``.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from certopt import cli
from certopt.manifest import RunManifest
from certopt.problems import DTLZ2_FORMS, available_problems


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("problem", choices=available_problems())
    parser.add_argument("--seeds", type=int, nargs="+", default=list(range(5)))
    parser.add_argument("--out", default="sweep")
    parser.add_argument("--dtlz2-form", choices=DTLZ2_FORMS, default="standard")
    args = parser.parse_args()

    out = Path(args.out)
    rows = {}
    for seed in args.seeds:
        run_dir = out / f"{args.problem}-seed{seed}"
        cli.main(["repro", args.problem, "--run", str(run_dir), "--seed", str(seed),
                  "--dtlz2-form", args.dtlz2_form])
        m = RunManifest.load(run_dir)
        report = json.loads(m.resolve(m.artifacts["report"]).read_text())
        rows[seed] = [o["rb"] for o in report["per_objective"]]
        eps = report["epsilon"]

    rb = np.array(list(rows.values()))
    print(f"\n{'seed':>4}  " + "  ".join(f"{'f' + str(j + 1):>9}" for j in range(rb.shape[1])))
    for seed, vals in rows.items():
        print(f"{seed:>4}  " + "  ".join(f"{v:>+9.4f}" for v in vals))
    certified = (np.abs(rb) <= eps).mean(axis=0)
    print("pass  " + "  ".join(f"{c:>9.0%}" for c in certified))
    (out / f"{args.problem}.json").write_text(
        json.dumps({"epsilon": eps, "rb": {str(k): v for k, v in rows.items()}}, indent=2) + "\n")


if __name__ == "__main__":
    main()
