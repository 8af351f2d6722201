"""
``tcd-sim`` command-line entry point.

    tcd-sim run --config scenario.json [--preset NAME] [--out DIR] [--format csv|json] [--seed N] [--plot]
    tcd-sim sweep --config scenario.json --param {n,w1,p2} --start A --stop B --steps N
    tcd-sim validate --config scenario.json

Exit codes: 0 success, 1 validation failure, 2 config error, 3 numeric/runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np

from .channels import (
    FullDecoherence,
    IntensityMixture,
    Mixed,
    Partial,
    PartialWhichPath,
    TwoSided,
    expected_visibility,
    model_density,
    model_reduced,
    two_sided_scatter_probability,
)
from .config import ConfigError, ScenarioConfig, SweepSpec, load_config, preset
from .errors import TCDError, ValidationError
from .linalg import A_SLIT, partial_trace
from .montecarlo import (
    analytic_delta_histogram,
    chi2_statistic,
    engine_delta_histogram,
    run_sampler,
    tv_distance,
)
from .observables import (
    delta_profile,
    fit_scale,
    joint_density,
    single_particle_density,
    visibility,
)

log = logging.getLogger("tcdsim")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def fmt(x) -> str:
    """Shortest round-trip decimal form of a float."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def reference_profile(cfg: ScenarioConfig, dy: np.ndarray) -> np.ndarray:
    """Closed-form coincidence law for the configured environment, up to scale."""
    g = cfg.geometry
    return 1.0 + expected_visibility(cfg.environment) * np.cos(g.fringe_frequency * dy)


def run_scenario(cfg: ScenarioConfig, workers: int = 1) -> dict:
    """Evaluate every observable of a scenario; returns a plain result bundle."""
    g = cfg.geometry
    full = model_density(cfg.environment)
    rho_a = partial_trace(full, {A_SLIT})
    rho_ab = model_reduced(cfg.environment)

    single = single_particle_density(rho_a, g, cfg.mode, cfg.grid)
    joint = joint_density(rho_ab, g, cfg.mode, cfg.grid)
    report = visibility(joint, cfg.visibility_method)
    dy, engine = delta_profile(joint)
    ref = reference_profile(cfg, dy)
    ref = ref * fit_scale(engine, ref)

    bundle = {
        "config": cfg.to_dict(),
        "maps": {
            "single": {"y": single.grid.coordinates, "rho": single.values},
            "joint": {"ya": joint.grid_a.coordinates, "yb": joint.grid_b.coordinates,
                      "rho": joint.values},
            "profile": {"dy": dy, "engine": engine, "closed_form": ref},
        },
        "visibility": {
            "method": report.method.value,
            "v": report.v,
            "expected": expected_visibility(cfg.environment),
            "max_density": report.max_density,
            "min_density": report.min_density,
        },
        "montecarlo": None,
    }
    if cfg.montecarlo is not None:
        mc = cfg.montecarlo
        sample = run_sampler(cfg.environment, g, cfg.grid, mc, mode=cfg.mode, workers=workers)
        if cfg.mode.value == "fraunhofer_flat":
            pred = analytic_delta_histogram(cfg.environment, g, cfg.grid, mc)
        else:
            pred = engine_delta_histogram(rho_ab, g, cfg.grid, mc, mode=cfg.mode)
        chi2 = chi2_statistic(sample.histogram, pred)
        bundle["montecarlo"] = {
            "edges": sample.histogram.edges,
            "counts": sample.histogram.counts,
            "expected": pred.probabilities,
            "total": sample.histogram.total,
            "tv_distance": tv_distance(sample.histogram, pred),
            "chi2": chi2.statistic,
            "dof": chi2.dof,
            "seed": mc.seed,
        }
    return bundle


def sweep_model(cfg: ScenarioConfig, parameter: str, value: float):
    inner = FullDecoherence()
    env = cfg.environment
    if isinstance(env, Partial):
        inner = env.amplitudes
    elif isinstance(env, Mixed):
        inner = env.mixture.inner
    elif isinstance(env, TwoSided):
        inner = env.inner
    if parameter == "n":
        return Partial(PartialWhichPath.from_real_n(value))
    if parameter == "w1":
        return Mixed(IntensityMixture(value, inner))
    return TwoSided(value, value, inner)


def run_sweep(cfg: ScenarioConfig, spec: SweepSpec, workers: int = 4) -> list[dict]:
    """One row per sweep value; values outside the parameter domain are flagged, not fatal."""
    g = cfg.geometry

    def point(value: float) -> dict:
        row = {"parameter": spec.parameter, "value": value, "effective_w1": float("nan"),
               "visibility_engine": float("nan"), "visibility_expected": float("nan"),
               "abs_diff": float("nan"), "status": "ok"}
        try:
            model = sweep_model(cfg, spec.parameter, value)
        except ValidationError as exc:
            row["status"] = f"out-of-domain: {exc}"
            return row
        if spec.parameter == "p2":
            row["effective_w1"] = two_sided_scatter_probability(value, value)
        elif spec.parameter == "w1":
            row["effective_w1"] = value
        v = visibility(joint_density(model_reduced(model), g, cfg.mode, cfg.grid),
                       cfg.visibility_method).v
        e = expected_visibility(model)
        row.update(visibility_engine=v, visibility_expected=e, abs_diff=abs(v - e))
        return row

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(point, spec.values()))


# --- output -----------------------------------------------------------------

def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=1, ensure_ascii=False,
                      allow_nan=False) + "\n"


PLOT_SCRIPT = '''"""Plot the CSV outputs of tcd-sim run (needs matplotlib)."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).parent


def read(name):
    with open(here / name, newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], [[float(x) for x in r] for r in rows[1:]]


fig, axes = plt.subplots(1, 2, figsize=(10, 4))
_, single = read("single.csv")
axes[0].plot([r[0] for r in single], [r[1] for r in single])
axes[0].set_xlabel("y_a [m]")
axes[0].set_ylabel("single-particle density")
_, prof = read("profile.csv")
axes[1].plot([r[0] for r in prof], [r[1] for r in prof], label="engine")
axes[1].plot([r[0] for r in prof], [r[2] for r in prof], "--", label="closed form")
axes[1].set_xlabel("y_a - y_b [m]")
axes[1].set_ylabel("coincidence density")
axes[1].legend()
fig.tight_layout()
fig.savefig(here / "tcd.png", dpi=150)
'''


def _write(path: Path, text: str):
    try:
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from None


def emit(bundle: dict, out_dir, fmt_tag: str = "csv", plot: bool = False) -> list[Path]:
    """Write a run bundle; returns the written paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror}") from None
    written = []
    if fmt_tag == "json":
        path = out / "bundle.json"
        _write(path, dumps_json(bundle))
        return [path]

    maps = bundle["maps"]
    s = maps["single"]
    files = {"single.csv": _csv(["y", "rho"], zip(s["y"], s["rho"]))}
    j = maps["joint"]
    files["joint.csv"] = _csv(
        ["ya", "yb", "rho"],
        ((ya, yb, j["rho"][i, k]) for i, ya in enumerate(j["ya"]) for k, yb in enumerate(j["yb"])))
    p = maps["profile"]
    files["profile.csv"] = _csv(["dy", "engine", "closed_form"],
                                zip(p["dy"], p["engine"], p["closed_form"]))
    v = bundle["visibility"]
    files["visibility.csv"] = _csv(["method", "v", "expected", "max_density", "min_density"],
                                   [[v["method"], v["v"], v["expected"], v["max_density"],
                                     v["min_density"]]])
    mc = bundle["montecarlo"]
    if mc is not None:
        e = mc["edges"]
        files["montecarlo.csv"] = _csv(
            ["dy_lo", "dy_hi", "count", "expected"],
            ((e[i], e[i + 1], str(int(c)), q) for i, (c, q) in enumerate(zip(mc["counts"], mc["expected"]))))
        files["montecarlo_stats.csv"] = _csv(["total", "tv_distance", "chi2", "dof", "seed"],
                                             [[str(mc["total"]), mc["tv_distance"], mc["chi2"],
                                               str(mc["dof"]), str(mc["seed"])]])
    files["config.json"] = dumps_json(bundle["config"])
    if plot:
        files["plot.py"] = PLOT_SCRIPT
    for name, text in files.items():
        _write(out / name, text)
        written.append(out / name)
    return written


def emit_sweep(rows: list[dict], out_dir, fmt_tag: str = "csv") -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt_tag == "json":
        path = out / "sweep.json"
        _write(path, dumps_json({"rows": rows}))
        return path
    cols = ["parameter", "value", "effective_w1", "visibility_engine", "visibility_expected",
            "abs_diff", "status"]
    path = out / "sweep.csv"
    _write(path, _csv(cols, ([r[c] for c in cols] for r in rows)))
    return path


# --- argument handling -----------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tcd-sim",
                                 description="Two-particle interferometer decoherence simulator.")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate one scenario and write its results")
    run.add_argument("--config", help="scenario JSON file (defaults used when omitted)")
    run.add_argument("--preset", help="isolated, small-wavelength, large-wavelength or mixed")
    run.add_argument("--out", help="output directory")
    run.add_argument("--format", choices=["csv", "json"])
    run.add_argument("--seed", type=int, help="Monte Carlo seed")
    run.add_argument("--samples", type=int, help="enable Monte Carlo with this many events")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--plot", action="store_true", help="also write a matplotlib script")

    sw = sub.add_parser("sweep", help="visibility versus one environment parameter")
    sw.add_argument("--config")
    sw.add_argument("--param", required=True, choices=["n", "w1", "p2"])
    sw.add_argument("--start", type=float, required=True)
    sw.add_argument("--stop", type=float, required=True)
    sw.add_argument("--steps", type=int, required=True)
    sw.add_argument("--out")
    sw.add_argument("--format", choices=["csv", "json"])
    sw.add_argument("--workers", type=int, default=4)

    va = sub.add_parser("validate", help="run the invariant and oracle suite")
    va.add_argument("--config")
    va.add_argument("--seed", type=int, default=0)
    va.add_argument("--samples", type=int, default=1_000_000)
    return ap


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    overrides = {}
    if getattr(args, "preset", None):
        overrides["environment"] = preset(args.preset)
    if getattr(args, "out", None):
        overrides["output_path"] = args.out
    if getattr(args, "format", None):
        overrides["output_format"] = args.format
    mc = cfg.montecarlo
    if getattr(args, "samples", None) is not None and args.command == "run":
        from .montecarlo import SampleConfig
        try:
            mc = replace(mc, samples=args.samples) if mc else SampleConfig(samples=args.samples)
        except ValidationError as exc:
            raise ConfigError(f"--samples: {exc}") from None
    if getattr(args, "seed", None) is not None and args.command == "run" and mc is not None:
        try:
            mc = replace(mc, seed=args.seed)
        except ValidationError as exc:
            raise ConfigError(f"--seed: {exc}") from None
    overrides["montecarlo"] = mc
    return replace(cfg, **overrides)


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = _parser().parse_args(argv)
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "run":
            bundle = run_scenario(cfg, workers=args.workers)
            paths = emit(bundle, cfg.output_path, cfg.output_format, plot=args.plot)
            v = bundle["visibility"]
            log.info("visibility %s (expected %s, %s)", fmt(v["v"]), fmt(v["expected"]), v["method"])
            if bundle["montecarlo"] is not None:
                log.info("monte carlo TV distance %s", fmt(bundle["montecarlo"]["tv_distance"]))
            log.info("wrote %d files to %s", len(paths), cfg.output_path)
            return EXIT_OK
        if args.command == "sweep":
            try:
                spec = SweepSpec(args.param, args.start, args.stop, args.steps)
            except ConfigError as exc:
                print(f"config error: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            rows = run_sweep(cfg, spec, workers=args.workers)
            for r in rows:
                log.info("%s=%s  V_engine=%s  V_expected=%s  %s", r["parameter"], fmt(r["value"]),
                         fmt(r["visibility_engine"]), fmt(r["visibility_expected"]), r["status"])
            path = emit_sweep(rows, cfg.output_path, cfg.output_format)
            log.info("wrote %s", path)
            return EXIT_OK
        from .validation import run_checks

        results = run_checks(cfg.geometry, cfg.grid, seed=args.seed, samples=args.samples)
        for r in results:
            print(r.line())
        failed = sum(not r.passed for r in results)
        print(f"{len(results) - failed}/{len(results)} checks passed")
        return EXIT_OK if failed == 0 else EXIT_VALIDATION
    except (TCDError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
