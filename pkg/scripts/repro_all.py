"""Run ``certopt repro`` on every benchmark and tabulate the outcome.

Usage:
    python3 scripts/repro_all.py [--out runs] [--seed 0] [--dtlz2-form standard]

Writes ``<out>/summary.json`` with per-benchmark test MAE, Rb, Np, front
agreement and wall time, and prints the same as a table.
"""

import argparse
import json
import time
from pathlib import Path

from certopt import cli
from certopt.manifest import RunManifest
from certopt.problems import DTLZ2_FORMS, available_problems


def summarize(run_dir: Path, seconds: float, code: int) -> dict:
    m = RunManifest.load(run_dir)
    read = lambda rel: json.loads(m.resolve(rel).read_text())  # noqa: E731
    report = read(m.artifacts["report"])
    fronts = read(m.artifacts["fronts"])
    return {
        "exit_code": code,
        "seconds": round(seconds, 1),
        "mae": {n: read(rel)["mae"] for n, rel in sorted(m.artifacts["metrics"].items())},
        "rb": [o["rb"] for o in report["per_objective"]],
        "np": report["np"],
        "population_size": report["population_size"],
        "verdict": report["verdict"],
        "gd": fronts["predicted"]["generational_distance"],
        "hv_ratio": fronts["predicted"]["hypervolume_ratio"],
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="runs")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dtlz2-form", choices=DTLZ2_FORMS, default="standard")
    parser.add_argument("--problems", nargs="*", default=available_problems())
    args = parser.parse_args()

    out = Path(args.out)
    summary = {}
    for name in args.problems:
        run_dir = out / f"{name}-seed{args.seed}"
        t0 = time.perf_counter()
        code = cli.main(["repro", name, "--run", str(run_dir), "--seed", str(args.seed),
                         "--dtlz2-form", args.dtlz2_form])
        if code not in (cli.EXIT_OK, cli.EXIT_FAIL):
            raise SystemExit(f"repro {name} failed with exit code {code}")
        summary[name] = summarize(run_dir, time.perf_counter() - t0, code)

    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"\n{'problem':<10} {'max MAE':>9} {'Rb':>28} {'Np':>4} {'GD':>7} {'HV ratio':>9} {'time':>6}")
    for name, s in summary.items():
        rb = " ".join(f"{v:+.4f}" for v in s["rb"])
        print(f"{name:<10} {max(s['mae'].values()):>9.2e} {rb:>28} {s['np']:>4} "
              f"{s['gd']:>7.4f} {s['hv_ratio']:>9.4f} {s['seconds']:>5.0f}s")


if __name__ == "__main__":
    main()
