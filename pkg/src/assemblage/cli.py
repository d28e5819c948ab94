"""Command-line front end.

    assemblage fit | evaluate | weights-curve | decompose | properties | synth
        [--config PATH] [--variant V] [--horizon H] [--growth-kind K]
        [--lambda L] [--tau T] [--window rolling:240|expanding:YYYY-MM]
        [--test-range YYYY-MM:YYYY-MM] [--out DIR] [--threads N] [--seed N]
        [--emit-config]

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from . import io
from .config import RunConfig, dump, flag_overrides, load_config
from .errors import (AssemblageError, ConfigError, DegenerateSeries, InfeasibleConstraints,
                     MeanNearZero, NotConverged, TooManyDimensions)
from .estimators import Dataset, fit, predict_rows, prepare, weights_curve
from .evaluation import decompose_contributions, run_pseudo_oos, score_table, series_properties
from .synthetic import generate
from .transforms import headline_growth, month_str

LOGGER = logging.getLogger("assemblage")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
NUMERICAL = (NotConverged, InfeasibleConstraints, MeanNearZero, DegenerateSeries, TooManyDimensions)
SYNTH_GROUPS = ("energy", "food", "goods", "services", "shelter")


def load_data(cfg: RunConfig) -> Dataset:
    panel = io.load_panel(cfg.path("components"), cfg.path("headline"), cfg.path("weights"))
    bench = cfg.path("benchmarks", required=False)
    return Dataset(panel, io.load_benchmarks(bench) if bench is not None else None)


def _fit_range(cfg):
    s = cfg.section("fit")
    return s["start"], s["end"]


def _index_key(fit, k):
    return k + 1 if fit.index_kind == "ranks" else fit.labels[k]


def cmd_fit(cfg: RunConfig) -> None:
    data = load_data(cfg)
    start, end = _fit_range(cfg)
    f = fit(cfg.model, data, start=start, end=end, threads=cfg.threads)
    out = cfg.out_dir
    io.write_json(out / "fit.json", f.to_dict())
    key = "rank" if f.index_kind == "ranks" else "code"
    io.write_csv(out / "weights.csv", [key, "weight"],
                 ((_index_key(f, k), w) for k, w in enumerate(f.weights)))
    task = prepare(cfg.model, data)
    index = predict_rows(f, task.X)
    rows = [(d, "index", v) for d, v in zip(task.dates, index)]
    rows += [(d, "target", v) for d, v in zip(task.dates, task.y) if np.isfinite(v)]
    io.write_csv(out / "index.csv", ["date", "series", "value"], rows)


def cmd_evaluate(cfg: RunConfig) -> None:
    if not cfg.test_ranges:
        raise ConfigError("evaluate needs at least one test range (evaluate.test_ranges or --test-range)")
    data = load_data(cfg)
    retune = int(cfg.section("evaluate")["retune_every"])
    scores, preds, manifest = [], [], []
    for h in cfg.horizons:
        tasks = {m.name: prepare(replace(m.spec, horizon=h), data) for m in cfg.models}
        for lo, hi in cfg.test_ranges:
            label = f"{month_str(lo)}:{month_str(hi)}"
            runs = {}
            for m in cfg.models:
                spec = replace(m.spec, horizon=h)
                run = run_pseudo_oos(spec, data, cfg.window, (lo, hi), retune_every=retune,
                                     threads=cfg.threads, task=tasks[m.name])
                runs[m.name] = run
                for r in run.rows():
                    preds.append({"test_range": label, "horizon": h, "model": m.name, **r})
                manifest.append({"test_range": label, "horizon": h, "model": m.name,
                                 **run.manifest()})
            for row in score_table(runs, cfg.numeraire):
                scores.append({"test_range": label, "horizon": h, **row})
    out = cfg.out_dir
    header = ["test_range", "horizon", "model", "n_origins", "rmse", "relative_rmse"]
    if any("pinball" in r for r in scores):
        header.append("pinball")
    io.write_dicts(out / "scores.csv", scores, header)
    io.write_dicts(out / "predictions.csv", preds,
                   ["test_range", "horizon", "model", "date", "prediction", "actual", "lambda",
                    "train_start", "train_end"])
    io.write_json(out / "manifest.json", {"config": cfg.resolved(), "numeraire": cfg.numeraire,
                                         "window": str(cfg.window), "runs": manifest})


def cmd_weights_curve(cfg: RunConfig) -> None:
    data = load_data(cfg)
    start, end = _fit_range(cfg)
    hs = cfg.section("weights_curve")["horizons"]
    rows = weights_curve(cfg.model, data, hs, start=start, end=end, threads=cfg.threads)
    io.write_dicts(cfg.out_dir / "weights_curve.csv", rows,
                   ["h", "index", "weight", "relative_weight", "lambda"])


def cmd_decompose(cfg: RunConfig) -> None:
    data = load_data(cfg)
    start, end = _fit_range(cfg)
    f = fit(cfg.model, data, start=start, end=end, threads=cfg.threads)
    gpath = cfg.path("grouping", required=False)
    grouping = io.load_grouping(gpath) if gpath is not None else None
    dec = decompose_contributions(f, data, grouping)
    rows = dec.long_rows() + [(month_str(d), "index", float(v)) for d, v in zip(dec.dates, dec.index)]
    rows.sort(key=lambda r: r[0])
    io.write_csv(cfg.out_dir / "contributions.csv", ["date", "series", "value"], rows)
    io.write_json(cfg.out_dir / "fit.json", f.to_dict())


def cmd_properties(cfg: RunConfig) -> None:
    data = load_data(cfg)
    start, end = _fit_range(cfg)
    sec = cfg.section("properties")
    hd, hv = headline_growth(data.panel, sec["headline_kind"])
    wanted = sec["models"]
    entries = [m for m in cfg.models if wanted is None or m.name in wanted]
    series = []
    for m in entries:
        f = fit(m.spec, data, start=start, end=end, threads=cfg.threads)
        task = prepare(m.spec, data)
        series.append((m.name, task.dates, predict_rows(f, task.X)))
    if data.benchmarks is not None:
        for k, name in enumerate(data.benchmarks.labels):
            series.append((name, data.benchmarks.dates, data.benchmarks.rates[:, k]))
    rows = []
    for name, dates, values in series:
        common, ic, ih = np.intersect1d(dates, hd, return_indices=True)
        rep = series_properties(values[ic], hv[ih], int(sec["max_offset"]))
        rows.append({"series": name, **rep.to_dict()})
    io.write_dicts(cfg.out_dir / "properties.csv", rows,
                   ["series", "bias", "volatility_ratio", "coefficient_of_variation", "lead_lag",
                    "n_obs"])


def cmd_synth(cfg: RunConfig) -> None:
    sc = cfg.synth_config()
    sd = generate(sc)
    panel = sd.data.panel
    grouping = {c: SYNTH_GROUPS[k % len(SYNTH_GROUPS)] for k, c in enumerate(panel.labels)}
    out = cfg.out_dir
    paths = io.write_panel(out, panel, benchmarks=sd.data.benchmarks, grouping=grouping)
    io.write_csv(out / "truth.csv", ["date", "trend", "expected_target_h12"],
                 zip((month_str(d) for d in panel.dates), sd.trend, sd.expected_target(12)))
    io.write_json(out / "synth.json", sc.to_dict())
    # a ready-to-run config for the generated files
    T = panel.dates.size
    months = max(24, min(240, T // 2 // 12 * 12))
    first, last = panel.dates[min(months + 24, T - 26)], panel.dates[-25]
    run = {"data": {k: p.name for k, p in paths.items()},
           "model": {"variant": "albacore_ranks", "horizon": 12},
           "evaluate": {"window": f"rolling:{months}",
                        "test_ranges": [f"{month_str(first)}:{month_str(last)}"],
                        "models": ["albacore_ranks", "albacore_comps",
                                   {"name": "equal_weight", "variant": "fixed"}],
                        "numeraire": "equal_weight"},
           "output": {"dir": "results"}}
    (out / "config.yaml").write_text(dump(run), encoding="utf-8")


COMMANDS = {"fit": cmd_fit, "evaluate": cmd_evaluate, "weights-curve": cmd_weights_curve,
            "decompose": cmd_decompose, "properties": cmd_properties, "synth": cmd_synth}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="assemblage",
                                description="Supervised aggregation of price-index components.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--variant")
    p.add_argument("--horizon", type=int)
    p.add_argument("--growth-kind", dest="growth_kind")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--window", help="rolling:N or expanding:YYYY-MM")
    p.add_argument("--test-range", dest="test_range", action="append",
                   help="YYYY-MM:YYYY-MM; repeat for several test sets")
    p.add_argument("--horizons", help="comma-separated horizons for weights-curve")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--emit-config", action="store_true",
                   help="print the resolved configuration and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config, flag_overrides(args))
        if args.emit_config:
            sys.stdout.write(dump(cfg.resolved()))
            return EXIT_OK
        COMMANDS[args.command](cfg)
    except NUMERICAL as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (AssemblageError, OSError, ValueError, KeyError) as exc:
        # everything that is not a solver failure traces back to the inputs
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
