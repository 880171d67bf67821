"""Command-line pipeline: generate, train, optimize, certify, repro and report.

Every command works on a run directory (``--run``) holding a
``manifest.json`` that indexes the artifacts written so far, the seed of
each stochastic stage and a snapshot of the configuration.

Exit codes: 0 success (or certification pass), 2 certification failure,
1 any error.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__, mopso
from .data import Dataset, generate_dataset, read_json, write_csv, write_json
from .doe import correlation_matrix
from .manifest import RunManifest
from .pipeline import SurrogateSet, compare_fronts, default_widths, train_output
from .problems import DTLZ2_FORMS, Problem, available_problems, registry_lookup
from .robustness import (RobustnessConfig, RobustnessReport, SampleSizeSpec, certify,
                         zscore_for)
from .surrogate import MlpModel, TrainConfig, param_count, prepare
from .tuner import SearchSpace, make_plan

log = logging.getLogger("certopt")

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
SEED_ENV = "CERTOPT_SEED"

# Offsets of each stochastic stage from the run seed.
STAGE_OFFSETS = {"data": 0, "train": 1, "optimize": 2, "certify": 3, "rigorous": 4, "tune": 5}


@dataclass
class DataSection:
    n: int = 1000
    dtlz2_form: str = "paper"


@dataclass
class RobustSection:
    epsilon: float = 0.05
    confidence: float = 0.99
    zscore: float | None = None  # derived from confidence when unset
    sigma: float = 0.5
    E: float = 0.066
    N: int | None = None
    normalize: bool = True
    population: str = "history"
    subsample: str = "lhs"

    def build(self) -> RobustnessConfig:
        z = self.zscore if self.zscore is not None else zscore_for(self.confidence)
        spec = SampleSizeSpec(z, self.sigma, self.E, self.N)
        return RobustnessConfig(self.epsilon, self.confidence, spec, self.normalize,
                                self.population, self.subsample)


@dataclass
class HyperbandSection:
    tune: bool = False
    R: int = 81
    eta: int = 3
    seed: int | None = None


@dataclass
class RunConfig:
    """Everything a run depends on besides its inputs; dotted keys address fields."""

    seed: int = 0
    threads: int = 1
    data: DataSection = field(default_factory=DataSection)
    train: TrainConfig = field(default_factory=TrainConfig)
    pso: mopso.PsoConfig = field(default_factory=mopso.PsoConfig)
    robust: RobustSection = field(default_factory=RobustSection)
    hb: HyperbandSection = field(default_factory=HyperbandSection)
    widths: dict[str, list[int]] = field(default_factory=dict)

    def seeds(self) -> dict[str, int]:
        out = {k: self.seed + off for k, off in STAGE_OFFSETS.items()}
        if self.hb.seed is not None:
            out["tune"] = self.hb.seed
        return out

    def snapshot(self) -> dict:
        return asdict(self)

    @classmethod
    def from_snapshot(cls, doc: dict) -> RunConfig:
        cfg = cls()
        for key, value in _flatten(doc).items():
            cfg = apply_setting(cfg, key, value)
        return cfg


def _flatten(doc: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict) and k == "widths" and not prefix:
            out.update({f"widths.{name}": w for name, w in v.items()})
        elif isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _parse_value(text: str):
    text = text.strip()
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    if text.lower() in ("none", "null", ""):
        return None
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def apply_setting(cfg: RunConfig, key: str, value) -> RunConfig:
    """Return a copy of ``cfg`` with the dotted ``key`` set to ``value``."""
    parts = key.split(".")
    if parts[0] == "widths" and len(parts) == 2:
        if isinstance(value, str):
            value = [int(v) for v in value.split(",")]
        return replace(cfg, widths={**cfg.widths, parts[1]: [int(v) for v in value]})
    if len(parts) == 1:
        if parts[0] not in ("seed", "threads"):
            raise KeyError(f"unknown config key {key!r}; top-level keys are seed and threads, "
                           "sections are data, train, pso, robust, hb and widths")
        return replace(cfg, **{parts[0]: int(value)})
    if len(parts) != 2:
        raise KeyError(f"unknown config key {key!r}")
    section, name = parts
    if section not in ("data", "train", "pso", "robust", "hb"):
        raise KeyError(f"unknown config section {section!r} in {key!r}")
    sub = getattr(cfg, section)
    known = {f.name: f for f in fields(sub)}
    if name not in known:
        raise KeyError(f"unknown config key {key!r}; {section} has {sorted(known)}")
    current = getattr(sub, name)
    if value is not None and isinstance(current, bool):
        value = value if isinstance(value, bool) else str(value).lower() == "true"
    elif value is not None and isinstance(current, int):
        value = int(value)
    elif value is not None and isinstance(current, float):
        value = float(value)
    return replace(cfg, **{section: replace(sub, **{name: value})})


def read_config_file(path: str | Path) -> dict:
    """Flat ``key = value`` lines with dotted keys; ``#`` starts a comment."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",))
    parser.optionxform = str
    parser.read_string("[run]\n" + Path(path).read_text(), source=str(path))
    return {k: _parse_value(v) for k, v in parser["run"].items()}


def build_config(args: argparse.Namespace, base: dict | None = None) -> RunConfig:
    """Defaults < manifest snapshot < CERTOPT_SEED < config file < flags."""
    cfg = RunConfig.from_snapshot(base) if base else RunConfig()
    if SEED_ENV in os.environ and not base:
        cfg = replace(cfg, seed=int(os.environ[SEED_ENV]))
    if getattr(args, "config", None):
        for key, value in read_config_file(args.config).items():
            cfg = apply_setting(cfg, key, value)
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        cfg = apply_setting(cfg, key.strip(), _parse_value(value))
    flag_keys = {
        "seed": "seed", "threads": "threads", "n": "data.n", "dtlz2_form": "data.dtlz2_form",
        "epsilon": "robust.epsilon", "confidence": "robust.confidence",
        "population": "robust.population", "hb_R": "hb.R", "hb_eta": "hb.eta",
        "hb_seed": "hb.seed", "swarm_size": "pso.swarm_size", "iterations": "pso.iterations",
        "epochs": "train.epochs",
    }
    for attr, key in flag_keys.items():
        value = getattr(args, attr, None)
        if value is not None:
            cfg = apply_setting(cfg, key, value)
    if getattr(args, "tune", False):
        cfg = apply_setting(cfg, "hb.tune", True)
    if getattr(args, "no_normalize", False):
        cfg = apply_setting(cfg, "robust.normalize", False)
    return cfg


# ---------------------------------------------------------------------------
# run directory helpers


def open_run(args: argparse.Namespace, problem_name: str | None = None,
             fresh: bool = False) -> tuple[RunManifest, RunConfig, Problem]:
    root = Path(args.run)
    existing = None
    if not fresh and (root / "manifest.json").is_file():
        existing = RunManifest.load(root)
    if existing is not None:
        name = problem_name or existing.problem
        if problem_name and problem_name != existing.problem:
            raise ValueError(f"run {root} belongs to {existing.problem}, not {problem_name}")
        cfg = build_config(args, existing.config)
        manifest = existing
    else:
        if problem_name is None:
            raise FileNotFoundError(f"no manifest in {root}; run `certopt generate` first "
                                    "or name the problem")
        name = problem_name
        cfg = build_config(args)
        manifest = RunManifest(root, name, tool_version=__version__)
    if cfg.data.dtlz2_form not in DTLZ2_FORMS:
        raise ValueError(f"dtlz2 form must be one of {DTLZ2_FORMS}")
    manifest.config = cfg.snapshot()
    manifest.seeds = cfg.seeds()
    manifest.tool_version = __version__
    root.mkdir(parents=True, exist_ok=True)
    return manifest, cfg, registry_lookup(name, cfg.data.dtlz2_form)


def load_models(manifest: RunManifest) -> dict[str, MlpModel]:
    paths = manifest.artifacts.get("models", {})
    if not paths:
        raise FileNotFoundError(f"run {manifest.root} has no trained models; run `certopt train`")
    return {name: MlpModel.load(manifest.resolve(rel)) for name, rel in paths.items()}


def load_dataset(manifest: RunManifest, problem: Problem, path: str | None = None) -> Dataset:
    if path is None:
        if "dataset" not in manifest.artifacts:
            raise FileNotFoundError(f"run {manifest.root} has no dataset; run `certopt generate`")
        path = manifest.resolve(manifest.artifacts["dataset"])
    return Dataset.from_csv(path, bounds=problem.bounds)


# ---------------------------------------------------------------------------
# stages


def stage_generate(manifest: RunManifest, cfg: RunConfig, problem: Problem) -> Dataset:
    if cfg.data.n < 10:
        raise ValueError(f"need at least 10 samples, got n={cfg.data.n}")
    ds = generate_dataset(problem, cfg.data.n, manifest.seeds["data"])
    ds.to_csv(manifest.record("dataset", "dataset.csv"))
    corr = correlation_matrix(np.hstack([ds.x, ds.y]), ds.columns)
    write_correlation(manifest.record("correlation", "correlation.csv"), corr)
    manifest.mark("generate")
    log.info("generated %d samples of %s", len(ds), problem.name)
    return ds


def write_correlation(path: Path, corr) -> None:
    """Labelled square matrix: header ``column,<labels>``, one row per label."""
    lines = ["column," + ",".join(corr.labels)]
    for label, row in zip(corr.labels, np.asarray(corr.r)):
        lines.append(label + "," + ",".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")


def stage_train(manifest: RunManifest, cfg: RunConfig, problem: Problem, dataset: Dataset,
                targets: list[str], widths_override: tuple[int, ...] | None = None) -> dict:
    for t in targets:
        dataset.target(t)  # fails early naming the available columns
    base = replace(cfg.train, seed=manifest.seeds["train"])
    tune = None
    if cfg.hb.tune:
        tune = (SearchSpace(), make_plan(cfg.hb.R, cfg.hb.eta), manifest.seeds["tune"])

    jobs = []
    for t in targets:
        k = dataset.y_names.index(t)
        if widths_override is not None:
            w = tuple(widths_override)
        elif t in cfg.widths:
            w = tuple(cfg.widths[t])
        else:
            w = default_widths(problem, t)
        jobs.append((t, w, replace(base, seed=base.seed + k)))

    def work(job):
        t, w, tcfg = job
        return train_output(dataset, t, w, tcfg, tune)

    if cfg.threads > 1 and len(jobs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    out = {}
    for (t, _, tcfg), res in zip(jobs, results):
        for sub in ("models", "metrics", "parity"):
            (manifest.root / sub).mkdir(exist_ok=True)
        res.model.save(manifest.record("models", f"models/{t}.json", t))
        prepared = prepare(dataset, tcfg, t)
        write_json(manifest.record("metrics", f"metrics/{t}.json", t), {
            "target": t,
            "widths": list(res.model.widths),
            "n_params": param_count(res.model.widths)[1],
            "learning_rate": tcfg.learning_rate if res.search is None else res.search.config.learning_rate,
            "batch_size": tcfg.batch_size if res.search is None else res.search.config.batch_size,
            "seed": tcfg.seed,
            "mse": res.test.mse,
            "mae": res.test.mae,
            "n_test": int(len(prepared.test)),
            "loss": res.history.to_dict(),
        })
        write_csv(manifest.record("parity", f"parity/{t}.csv", t), ["predicted", "actual"],
                  np.column_stack([res.test.predicted, res.test.actual]))
        if res.search is not None:
            (manifest.root / "leaderboards").mkdir(exist_ok=True)
            write_json(manifest.record("leaderboards", f"leaderboards/{t}.json", t), {
                "target": t,
                "R": cfg.hb.R,
                "eta": cfg.hb.eta,
                "seed": manifest.seeds["tune"],
                "rounds": res.search.rounds,
                "entries": [e.to_dict() for e in res.search.leaderboard],
            })
        log.info("trained %s %s: test mse=%.3g mae=%.3g (%.1fs)", t, res.model.widths,
                 res.test.mse, res.test.mae, res.seconds)
        out[t] = res
    manifest.mark("train")
    return out


def stage_optimize(manifest: RunManifest, cfg: RunConfig, problem: Problem,
                   rigorous: bool = False) -> tuple[mopso.ParetoArchive, mopso.PopulationHistory]:
    if rigorous:
        evaluator, seed, prefix = problem.evaluate, manifest.seeds["rigorous"], "rigorous_"
    else:
        evaluator = SurrogateSet.from_models(load_models(manifest), problem)
        seed, prefix = manifest.seeds["optimize"], ""
    archive, history = mopso.run(evaluator, problem.bounds, replace(cfg.pso, seed=seed))
    history.to_csv(manifest.record(f"{prefix}history", f"{prefix}history.csv"))
    archive.to_csv(manifest.record(f"{prefix}archive", f"{prefix}archive.csv"))
    manifest.mark("optimize_rigorous" if rigorous else "optimize")
    log.info("%s optimization: %d evaluations, %d archived (%d feasible)",
             "rigorous" if rigorous else "surrogate", history.count, len(archive),
             int(archive.feasible.sum()))
    return archive, history


def load_archive(manifest: RunManifest, problem: Problem, prefix: str = "") -> mopso.ParetoArchive:
    arch = mopso.ParetoArchive.from_csv(manifest.resolve(manifest.artifacts[f"{prefix}archive"]),
                                        problem.dim, problem.n_objectives)
    if not arch.is_mutually_nondominated():
        raise ValueError(f"{prefix}archive in {manifest.root} holds dominated members")
    return arch


def stage_certify(manifest: RunManifest, cfg: RunConfig, problem: Problem,
                  self_check: bool = False) -> RobustnessReport:
    if "history" not in manifest.artifacts:
        raise FileNotFoundError(f"run {manifest.root} has no history; run `certopt optimize`")
    history = mopso.PopulationHistory.from_csv(manifest.resolve(manifest.artifacts["history"]))
    surrogates = SurrogateSet.from_models(load_models(manifest), problem)
    archive = load_archive(manifest, problem) if cfg.robust.population == "front" else None
    rigorous = surrogates.objective_values if self_check else problem
    report = certify(history, rigorous, cfg.robust.build(), seed=manifest.seeds["certify"],
                     scales=surrogates.objective_scales(), archive=archive,
                     problem_name=problem.name)
    if self_check:
        report.source = "self:surrogate"
    write_json(manifest.record("report", "report.json"), report.to_dict())
    manifest.mark("certify")
    return report


def stage_fronts(manifest: RunManifest, problem: Problem) -> dict:
    sur = load_archive(manifest, problem)
    rig = load_archive(manifest, problem, "rigorous_")
    scales = SurrogateSet.from_models(load_models(manifest), problem).objective_scales()
    cmp = compare_fronts(sur, rig, problem, scales)
    doc = {"problem": problem.name, "scales": scales, **_jsonable(cmp)}
    write_json(manifest.record("fronts", "fronts.json"), doc)
    manifest.mark("fronts")
    return doc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    manifest, cfg, problem = open_run(args, args.problem, fresh=True)
    stage_generate(manifest, cfg, problem)
    manifest.save()
    print(f"wrote {manifest.resolve('dataset.csv')} ({cfg.data.n} rows)")
    return EXIT_OK


def cmd_train(args) -> int:
    manifest, cfg, problem = open_run(args, args.problem)
    dataset = load_dataset(manifest, problem, args.dataset)
    targets = dataset.y_names if args.target == "all" else [args.target]
    widths = tuple(int(v) for v in args.widths.split(",")) if args.widths else None
    results = stage_train(manifest, cfg, problem, dataset, targets, widths)
    manifest.save()
    print(models_table({t: r.model for t, r in results.items()},
                       {t: (r.test.mse, r.test.mae) for t, r in results.items()}))
    return EXIT_OK


def cmd_optimize(args) -> int:
    manifest, cfg, problem = open_run(args, args.problem)
    archive, history = stage_optimize(manifest, cfg, problem, rigorous=args.rigorous)
    manifest.save()
    print(f"{history.count} evaluations; archive holds {len(archive)} members "
          f"({int(archive.feasible.sum())} feasible)")
    return EXIT_OK


def cmd_certify(args) -> int:
    manifest, cfg, problem = open_run(args, args.problem)
    report = stage_certify(manifest, cfg, problem, self_check=args.self_check)
    manifest.save()
    print(report.summary())
    return EXIT_OK if report.verdict else EXIT_FAIL


def cmd_repro(args) -> int:
    manifest, cfg, problem = open_run(args, args.problem, fresh=True)
    stages = [
        ("generate", lambda: stage_generate(manifest, cfg, problem)),
        ("train", lambda: stage_train(manifest, cfg, problem, load_dataset(manifest, problem),
                                      problem.output_names)),
        ("optimize", lambda: stage_optimize(manifest, cfg, problem)),
        ("certify", lambda: stage_certify(manifest, cfg, problem)),
        ("optimize_rigorous", lambda: stage_optimize(manifest, cfg, problem, rigorous=True)),
        ("fronts", lambda: stage_fronts(manifest, problem)),
    ]
    for name, run in stages:
        t0 = time.perf_counter()
        try:
            run()
        except Exception as exc:
            raise StageError(name, exc) from exc
        log.info("stage %s done in %.1fs", name, time.perf_counter() - t0)
    manifest.save()
    print(render_report(manifest))
    report = RobustnessReport.from_dict(read_json(manifest.resolve(manifest.artifacts["report"])))
    return EXIT_OK if report.verdict else EXIT_FAIL


def cmd_report(args) -> int:
    manifest = RunManifest.load(args.run)
    print(render_report(manifest))
    return EXIT_OK


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"stage {stage} failed: {type(exc).__name__}: {exc}")
        self.stage = stage


# ---------------------------------------------------------------------------
# rendering


def models_table(models: dict[str, MlpModel], scores: dict[str, tuple[float, float]]) -> str:
    lines = [f"{'output':<7} {'widths':<28} {'params':>8} {'test MSE':>12} {'test MAE':>10}"]
    for name, m in models.items():
        mse, mae = scores.get(name, (float("nan"), float("nan")))
        lines.append(f"{name:<7} {str(tuple(m.widths)):<28} {param_count(m.widths)[1]:>8} "
                     f"{mse:>12.4g} {mae:>10.4g}")
    return "\n".join(lines)


def render_report(manifest: RunManifest) -> str:
    art = manifest.artifacts
    parts = [f"run {manifest.run_id}  problem {manifest.problem}  "
             f"stages {', '.join(manifest.stages)}"]
    if "metrics" in art:
        models, scores = {}, {}
        for name, rel in art["metrics"].items():
            doc = read_json(manifest.resolve(rel))
            models[name] = _WidthsOnly(tuple(doc["widths"]))
            scores[name] = (doc["mse"], doc["mae"])
        parts += ["", "surrogates", models_table(models, scores)]
    if "history" in art:
        n_eval = read_json(manifest.resolve(art["report"]))["population_size"] if "report" in art else None
        parts += ["", "optimization: " + (f"{n_eval} evaluations in population" if n_eval
                                          else "history recorded")]
    if "report" in art:
        report = RobustnessReport.from_dict(read_json(manifest.resolve(art["report"])))
        cost = report.np / max(report.population_size, 1)
        parts += ["", f"robustness (Np={report.np}, {cost:.1%} of the population re-evaluated)",
                  report.summary()]
    if "fronts" in art:
        doc = read_json(manifest.resolve(art["fronts"]))
        parts += ["", f"{'front agreement':<16} {'GD':>10} {'HV surrogate':>13} "
                      f"{'HV rigorous':>12} {'HV ratio':>9}"]
        for key in ("predicted", "reevaluated"):
            d = doc[key]
            parts.append(f"{key:<16} {d['generational_distance']:>10.4g} "
                         f"{d['hypervolume_a']:>13.5g} {d['hypervolume_b']:>12.5g} "
                         f"{d['hypervolume_ratio']:>9.4f}")
    return "\n".join(parts)


@dataclass
class _WidthsOnly:
    widths: tuple[int, ...]


# ---------------------------------------------------------------------------
# argument parsing


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--run", default="run", help="run directory (default: ./run)")
    p.add_argument("--config", help="file of dotted key=value settings")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one dotted setting (repeatable)")
    p.add_argument("--seed", type=int, help=f"run seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--threads", type=int, help="worker threads for training")
    p.add_argument("--dtlz2-form", choices=DTLZ2_FORMS, help="DTLZ2 objective form")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="certopt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"certopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    problems = available_problems()

    p = sub.add_parser("generate", parents=[common], help="LHS dataset from a rigorous oracle")
    p.add_argument("problem", choices=problems)
    p.add_argument("--n", type=int, help="number of LHS samples (default 1000)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", parents=[common], help="fit one or all surrogate models")
    p.add_argument("--problem", choices=problems)
    p.add_argument("--dataset", help="dataset CSV (default: the run's dataset)")
    p.add_argument("--target", default="all", help="output column or 'all' (default)")
    p.add_argument("--widths", help="comma-separated layer widths, e.g. 2,60,60,60,1")
    p.add_argument("--epochs", type=int)
    p.add_argument("--tune", action="store_true", help="Hyperband search before the final fit")
    p.add_argument("--hb-R", dest="hb_R", type=int, help="Hyperband max epochs per config")
    p.add_argument("--hb-eta", dest="hb_eta", type=int, help="Hyperband reduction factor")
    p.add_argument("--hb-seed", dest="hb_seed", type=int, help="Hyperband sampling seed")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("optimize", parents=[common], help="MOPSO over the trained surrogates")
    p.add_argument("--problem", choices=problems)
    p.add_argument("--rigorous", action="store_true", help="optimize the oracle itself")
    p.add_argument("--swarm-size", dest="swarm_size", type=int)
    p.add_argument("--iterations", type=int)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("certify", parents=[common], help="robustness test of an optimization")
    p.add_argument("--problem", choices=problems)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--confidence", type=float)
    p.add_argument("--population", choices=("history", "feasible", "front"))
    p.add_argument("--no-normalize", action="store_true", help="deviations in raw units")
    p.add_argument("--self", dest="self_check", action="store_true",
                   help="use the surrogates as their own rigorous source")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("repro", parents=[common], help="end-to-end run of one benchmark")
    p.add_argument("problem", choices=problems)
    p.add_argument("--n", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--tune", action="store_true")
    p.add_argument("--hb-R", dest="hb_R", type=int)
    p.add_argument("--hb-eta", dest="hb_eta", type=int)
    p.add_argument("--hb-seed", dest="hb_seed", type=int)
    p.add_argument("--swarm-size", dest="swarm_size", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_repro)

    p = sub.add_parser("report", parents=[common], help="print the tables of a finished run")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # every failure maps to exit code 1 with a message
        if args.verbose:
            log.exception("command failed")
        msg = str(exc) if isinstance(exc, StageError) else f"{type(exc).__name__}: {exc}"
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
