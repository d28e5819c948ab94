"""Run configuration: a YAML file with nested sections, overridable by CLI flags.

Example::

    data:
      components: components.csv
      headline: headline.csv
      weights: weights.csv
      grouping: grouping.csv        # optional
      benchmarks: benchmarks.csv    # optional
    model:
      variant: albacore_ranks
      horizon: 12
      growth_kind: 3m3m
      lambda: null                  # null = cross-validate
    evaluate:
      window: rolling:240
      test_ranges: [2010-01:2019-12, 2020-01:2023-12]
      horizons: [1, 3, 6, 12, 24]
      models: [albacore_ranks, albacore_comps, {name: ew, variant: fixed}]
      numeraire: ew
    output:
      dir: out

Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .estimators import EstimatorSpec
from .synthetic import SynthConfig
from .transforms import WindowScheme, parse_range, to_month

DEFAULTS = {
    "data": {"components": None, "headline": None, "weights": None, "grouping": None,
             "benchmarks": None},
    "model": {"variant": "albacore_comps", "horizon": 12, "growth_kind": "3m3m", "lambda": None,
              "lambda_grid": None, "tau": None, "lags": 12, "constrained": True,
              "with_intercept": False, "folds": 10, "smoothing": 3, "fixed_weights": "equal"},
    "fit": {"start": None, "end": None},
    "evaluate": {"window": "rolling:240", "test_ranges": [], "horizons": None, "models": None,
                 "numeraire": None, "retune_every": 12},
    "weights_curve": {"horizons": [1, 3, 6, 12, 24]},
    "properties": {"max_offset": 12, "headline_kind": "yoy", "models": None},
    "synth": {},
    "output": {"dir": "out"},
    "threads": 1,
    "seed": 0,
}

_MODEL_KEYS = set(DEFAULTS["model"])


@dataclass
class ModelEntry:
    name: str
    spec: EstimatorSpec


@dataclass
class RunConfig:
    raw: dict
    base_dir: Path
    model: EstimatorSpec
    models: list = field(default_factory=list)
    numeraire: str = ""
    window: WindowScheme = field(default_factory=lambda: WindowScheme.rolling(240))
    test_ranges: list = field(default_factory=list)
    horizons: list = field(default_factory=list)

    def path(self, key: str, required: bool = True) -> Path | None:
        value = self.raw["data"].get(key)
        if value is None:
            if required:
                raise ConfigError(f"data.{key} is required for this command")
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def out_dir(self) -> Path:
        p = Path(self.raw["output"]["dir"])
        return p if p.is_absolute() else self.base_dir / p

    @property
    def threads(self) -> int:
        return int(self.raw["threads"])

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    def synth_config(self) -> SynthConfig:
        d = dict(self.raw["synth"])
        d["seed"] = self.seed
        unknown = set(d) - set(SynthConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown synth keys: {', '.join(sorted(unknown))}")
        try:
            return SynthConfig.from_dict(d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"synth: {exc}") from None

    def section(self, name: str) -> dict:
        return self.raw[name]

    def resolved(self) -> dict:
        """The full configuration with defaults applied, for ``--emit-config``."""
        return copy.deepcopy(self.raw)


def _merge(base: dict, new: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in (new or {}).items():
        if k not in out:
            raise ConfigError(f"unknown config key {where}{k}")
        if isinstance(out[k], dict) and k != "synth":
            if not isinstance(v, dict):
                raise ConfigError(f"{where}{k} must be a section")
            out[k] = _merge(out[k], v, f"{where}{k}.")
        elif k == "synth":
            if not isinstance(v, dict):
                raise ConfigError("synth must be a section")
            out[k] = {**out[k], **v}
        else:
            out[k] = v
    return out


def _spec(model: dict, where: str) -> EstimatorSpec:
    d = dict(model)
    unknown = set(d) - _MODEL_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown keys {', '.join(sorted(unknown))}")
    d["lam"] = d.pop("lambda", None)
    try:
        return EstimatorSpec(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _stringify_dates(d):
    # YAML parses 2010-01-01 as a date; keep everything as text
    if isinstance(d, dict):
        return {k: _stringify_dates(v) for k, v in d.items()}
    if isinstance(d, list):
        return [_stringify_dates(v) for v in d]
    if hasattr(d, "isoformat") and not isinstance(d, str):
        return d.isoformat()[:7]
    return d


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Read ``path`` (optional), apply nested ``overrides`` and validate."""
    raw_file = {}
    base_dir = Path.cwd()
    if path is not None:
        path = Path(path)
        try:
            raw_file = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
        if not isinstance(raw_file, dict):
            raise ConfigError("config file must be a mapping of sections")
        base_dir = path.resolve().parent
    raw = _merge(DEFAULTS, _stringify_dates(raw_file))
    raw = _merge(raw, overrides or {})
    return build(raw, base_dir)


def build(raw: dict, base_dir: Path) -> RunConfig:
    model = _spec(raw["model"], "model")
    ev = raw["evaluate"]
    try:
        window = WindowScheme.parse(ev["window"])
        ranges = ev["test_ranges"]
        if isinstance(ranges, str):
            ranges = [ranges]
        test_ranges = [parse_range(r) for r in ranges]
        fit_start = raw["fit"]["start"]
        fit_end = raw["fit"]["end"]
        for v in (fit_start, fit_end):
            if v is not None:
                to_month(v)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    horizons = ev["horizons"] or [model.horizon]
    if any(int(h) < 1 for h in horizons):
        raise ConfigError("horizons must be positive")
    if int(ev["retune_every"]) < 1:
        raise ConfigError("evaluate.retune_every must be at least 1")
    if int(raw["threads"]) < 1:
        raise ConfigError("threads must be at least 1")
    entries = ev["models"]
    if entries is None:
        entries = [model.variant] + ([] if model.variant == "fixed" else [{"name": "equal_weight",
                                                                         "variant": "fixed"}])
    models = []
    base_model = dict(raw["model"])
    for i, e in enumerate(entries):
        if isinstance(e, str):
            e = {"name": e, "variant": e}
        if not isinstance(e, dict) or "variant" not in e:
            raise ConfigError(f"evaluate.models[{i}] needs a variant")
        e = dict(e)
        name = str(e.pop("name", e["variant"]))
        if e["variant"] != base_model["variant"]:
            # variant-specific knobs do not carry over from the main model
            inherit = {k: base_model[k] for k in ("horizon", "growth_kind", "folds", "smoothing",
                                                  "lags", "lambda_grid")}
        else:
            inherit = base_model
        models.append(ModelEntry(name, _spec({**inherit, **e}, f"evaluate.models[{i}]")))
    names = [m.name for m in models]
    if len(set(names)) != len(names):
        raise ConfigError("evaluate.models names must be unique")
    numeraire = ev["numeraire"] or ("equal_weight" if "equal_weight" in names else names[-1])
    if numeraire not in names:
        raise ConfigError(f"numeraire {numeraire!r} is not among evaluate.models")
    return RunConfig(raw, base_dir, model, models, numeraire, window, test_ranges,
                     [int(h) for h in horizons])


def flag_overrides(args) -> dict:
    """Map parsed CLI flags onto nested config keys (unset flags are skipped)."""
    o: dict = {}

    def put(section, key, value):
        if value is not None:
            o.setdefault(section, {})[key] = value

    put("model", "variant", getattr(args, "variant", None))
    put("model", "horizon", getattr(args, "horizon", None))
    put("model", "growth_kind", getattr(args, "growth_kind", None))
    put("model", "lambda", getattr(args, "lam", None))
    put("model", "tau", getattr(args, "tau", None))
    put("evaluate", "window", getattr(args, "window", None))
    tr = getattr(args, "test_range", None)
    if tr:
        put("evaluate", "test_ranges", list(tr))
    if getattr(args, "horizon", None) is not None:
        put("evaluate", "horizons", [args.horizon])
    if getattr(args, "horizons", None):
        put("weights_curve", "horizons", [int(h) for h in args.horizons.split(",")])
    put("output", "dir", getattr(args, "out", None))
    if getattr(args, "threads", None) is not None:
        o["threads"] = args.threads
    if getattr(args, "seed", None) is not None:
        o["seed"] = args.seed
    return o


def dump(raw: dict) -> str:
    return yaml.safe_dump(raw, sort_keys=True, default_flow_style=False)


__all__ = ["RunConfig", "ModelEntry", "load_config", "flag_overrides", "dump", "DEFAULTS"]
