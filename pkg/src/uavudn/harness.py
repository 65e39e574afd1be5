"""Experiment specs, seeded sweep execution and CSV output.

A spec is a YAML document::

    scenario: bs            # bs | relay | wet | cache
    seed: 7                 # master seed (default 0)
    trials: 20              # Monte Carlo trials per lattice point (default 1)
    output: bs.csv          # CSV path (default <scenario>.csv)
    config:                 # scenario settings; omitted keys keep defaults
      d2d_density: 1.0e-5
      sinr_threshold_db: 5
      channel: {noise_power: 1.0e-14}
    sweep:                  # optional; the lattice is the product of the lists
      d2d_density: [0.5e-5, 1.0e-5, 2.0e-5]
    map_dir: maps           # wet only: also write each normalized map there

Sweep keys may name nested settings with dots (``channel.noise_power``).
Lattice points are numbered in product order, last axis fastest, and trial
``t`` of point ``i`` draws its randomness from ``child_seed(seed, i, t)``.
"""

from __future__ import annotations

import csv
import dataclasses
import itertools
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import yaml

from .channel import db_to_linear
from .errors import SpecValidationError, UavUdnError
from .scenarios import caching, energy_transfer, flying_bs, mobile_relay
from .seeding import child_seed

TOP_KEYS = ("scenario", "seed", "trials", "output", "config", "sweep", "map_dir")


# --- YAML loading ----------------------------------------------------------

class _Loader(yaml.SafeLoader):
    pass


# YAML 1.1 wants a dot in floats; accept the usual 1e-5 spelling as well.
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"""),
    list("-+0123456789"))


def _load(text: str):
    """Parse YAML into plain objects plus a ``path -> line`` map.

    Duplicate mapping keys are reported instead of silently overwritten.
    """
    loader = _Loader(text)
    try:
        root = loader.get_single_node()
    finally:
        loader.dispose()
    lines: dict[str, int] = {}
    errors: list = []

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            out = {}
            for key_node, value_node in node.value:
                key = str(loader.construct_object(key_node))
                sub = f"{path}.{key}" if path else key
                line = key_node.start_mark.line + 1
                if key in out:
                    errors.append((sub, line, "duplicate key"))
                    continue
                lines[sub] = line
                out[key] = walk(value_node, sub)
            return out
        if isinstance(node, yaml.SequenceNode):
            return [walk(v, f"{path}[{k}]") for k, v in enumerate(node.value)]
        return loader.construct_object(node)

    data = walk(root, "") if root is not None else None
    return data, lines, errors


# --- scenario registry -----------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    name: str
    config_type: type
    columns: tuple
    description: str
    stochastic: bool
    # Keys that live at the top level of a spec, not in ``config``.
    hidden: tuple = ()


SCENARIOS = {
    "bs": Scenario("bs", flying_bs.BsConfig, flying_bs.COLUMNS,
                   "flying base station height sweep over D2D densities", True,
                   ("trials", "seed")),
    "relay": Scenario("relay", mobile_relay.RelayConfig, mobile_relay.COLUMNS,
                      "mobile relay throughput and energy efficiency", False),
    "wet": Scenario("wet", energy_transfer.WetConfig, energy_transfer.COLUMNS,
                    "energy transfer maps for a trajectory and power schedule", False),
    "cache": Scenario("cache", caching.CacheConfig, caching.COLUMNS,
                      "two-phase caching with tracking and static UAV caches", True),
}

# Spec-only spellings converted on the way in: (key, field, converter).
ALIASES = {"bs": [("sinr_threshold_db", "sinr_threshold", db_to_linear)]}


def _kind(default, annotation: str):
    if dataclasses.is_dataclass(default):
        return "nested"
    if isinstance(default, bool):
        return "bool"
    if isinstance(default, int):
        return "int"
    if isinstance(default, float):
        return "float"
    if isinstance(default, str):
        return "str"
    if default is None and "float" in annotation:
        return "float?"
    return "any"


def _schema(cls, hidden=()):
    base = cls()
    out = {}
    for f in dataclasses.fields(cls):
        if f.name in hidden:
            continue
        default = getattr(base, f.name)
        kind = _kind(default, str(f.type))
        out[f.name] = (kind, type(default) if kind == "nested" else None)
    return out


def _type_ok(kind, value) -> bool:
    number = isinstance(value, (int, float)) and not isinstance(value, bool)
    return {"bool": isinstance(value, bool),
            "int": isinstance(value, int) and not isinstance(value, bool),
            "float": number,
            "float?": value is None or number,
            "str": isinstance(value, str),
            "any": True}.get(kind, False)


def _coerce(kind, value):
    return float(value) if kind in ("float", "float?") and value is not None else value


def _build(cls, values: dict, hidden=()):
    """Instantiate ``cls`` from a nested dict of overrides (already type-checked)."""
    schema = _schema(cls, hidden)
    kw = {}
    for key, value in values.items():
        kind, sub = schema[key]
        kw[key] = _build(sub, value) if kind == "nested" else _coerce(kind, value)
    return cls(**kw)


def _check_types(cls, values, path, lines, errors, hidden=()):
    """Append unknown-key and type errors; return the keys that passed."""
    if not isinstance(values, dict):
        errors.append((path, lines.get(path), "expected a mapping"))
        return {}
    schema = _schema(cls, hidden)
    good = {}
    for key, value in values.items():
        sub = f"{path}.{key}"
        if key not in schema:
            errors.append((sub, lines.get(sub), "unknown key"))
            continue
        kind, nested = schema[key]
        if kind == "nested":
            inner = _check_types(nested, value, sub, lines, errors)
            if isinstance(value, dict) and len(inner) == len(value):
                good[key] = inner
            continue
        if not _type_ok(kind, value):
            errors.append((sub, lines.get(sub),
                           f"expected {kind.rstrip('?')}, got {type(value).__name__}"))
            continue
        good[key] = value
    return good


def _set_path(values: dict, dotted: str, value):
    out = dict(values)
    head, _, rest = dotted.partition(".")
    if rest:
        out[head] = _set_path(out.get(head, {}), rest, value)
    else:
        out[head] = value
    return out


def _lookup_kind(cls, dotted: str, hidden=()):
    head, _, rest = dotted.partition(".")
    schema = _schema(cls, hidden)
    if head not in schema:
        return None
    kind, nested = schema[head]
    if rest:
        return _lookup_kind(nested, rest) if kind == "nested" else None
    return None if kind == "nested" else kind


# --- specs -----------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentSpec:
    scenario: str
    config: dict
    sweep: dict
    trials: int = 1
    seed: int = 0
    output: str = ""
    map_dir: str | None = None

    def lattice(self) -> list[dict]:
        """Config override dicts, one per sweep point, in product order."""
        keys = list(self.sweep)
        points = []
        for combo in itertools.product(*(self.sweep[k] for k in keys)):
            values = self.config
            for k, v in zip(keys, combo):
                values = _set_path(values, k, v)
            points.append(values)
        return points

    def build_config(self, values: dict):
        sc = SCENARIOS[self.scenario]
        return _build(sc.config_type, values, sc.hidden)

    def point_labels(self) -> list[dict]:
        keys = list(self.sweep)
        return [dict(zip(keys, combo))
                for combo in itertools.product(*(self.sweep[k] for k in keys))]


def parse_spec(text: str) -> ExperimentSpec:
    """Validate a YAML spec, reporting every problem found at once."""
    try:
        data, lines, errors = _load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise SpecValidationError([("", mark.line + 1 if mark else None, f"bad YAML: {exc}")])
    if not isinstance(data, dict):
        raise SpecValidationError(errors + [("", 1, "spec must be a mapping")])

    for key in data:
        if key not in TOP_KEYS:
            errors.append((key, lines.get(key), "unknown key"))

    scenario = data.get("scenario")
    if scenario is None:
        errors.append(("scenario", None, "missing required key"))
    elif scenario not in SCENARIOS:
        errors.append(("scenario", lines.get("scenario"),
                       f"unknown scenario {scenario!r}; choose from {sorted(SCENARIOS)}"))
        scenario = None

    seed = data.get("seed", 0)
    if not (isinstance(seed, int) and not isinstance(seed, bool)):
        errors.append(("seed", lines.get("seed"), "expected int"))
    elif not -2 ** 63 <= seed < 2 ** 63:
        errors.append(("seed", lines.get("seed"), "must fit in a signed 64-bit integer"))
    trials = data.get("trials", 1)
    if not (isinstance(trials, int) and not isinstance(trials, bool)):
        errors.append(("trials", lines.get("trials"), "expected int"))
    elif trials < 1:
        errors.append(("trials", lines.get("trials"), "must be >= 1"))
    output = data.get("output", f"{scenario or 'results'}.csv")
    if not isinstance(output, str):
        errors.append(("output", lines.get("output"), "expected str"))
    map_dir = data.get("map_dir")
    if map_dir is not None and not isinstance(map_dir, str):
        errors.append(("map_dir", lines.get("map_dir"), "expected str"))
    if map_dir is not None and scenario not in (None, "wet"):
        errors.append(("map_dir", lines.get("map_dir"), "only the wet scenario writes maps"))

    config, sweep = {}, {}
    if scenario is not None:
        sc = SCENARIOS[scenario]
        raw = data.get("config", {}) or {}
        raw = _apply_aliases(scenario, raw, "config", lines, errors)
        config = _check_types(sc.config_type, raw, "config", lines, errors, sc.hidden)
        _check_values(sc, config, "config", lines, errors)
        sweep = _check_sweep(sc, data.get("sweep", {}) or {}, config, lines, errors)

    if errors:
        raise SpecValidationError(errors)
    return ExperimentSpec(scenario, config, sweep, trials, seed, output, map_dir)


def _apply_aliases(scenario, raw, path, lines, errors):
    if not isinstance(raw, dict):
        return raw
    out = dict(raw)
    for alias, target, conv in ALIASES.get(scenario, []):
        if alias not in out:
            continue
        sub = f"{path}.{alias}"
        if target in out:
            errors.append((sub, lines.get(sub), f"give either {alias} or {target}, not both"))
            del out[alias]
            continue
        value = out.pop(alias)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append((sub, lines.get(sub), "expected float"))
            continue
        out[target] = conv(value)
        lines[f"{path}.{target}"] = lines.get(sub)
    return out


def _check_values(sc: Scenario, values: dict, path, lines, errors) -> bool:
    """Range checks: each key alone against defaults, then all together."""
    before = len(errors)
    for key in _leaves(values):
        single = _set_path({}, key, _get_path(values, key))
        try:
            _build(sc.config_type, single, sc.hidden)
        except UavUdnError as exc:
            sub = f"{path}.{key}"
            errors.append((sub, lines.get(sub), str(exc)))
    if len(errors) == before:
        try:
            _build(sc.config_type, values, sc.hidden)
        except UavUdnError as exc:
            errors.append((path, lines.get(path), str(exc)))
    return len(errors) == before


def _leaves(values: dict, prefix=""):
    for k, v in values.items():
        if isinstance(v, dict):
            yield from _leaves(v, f"{prefix}{k}.")
        else:
            yield f"{prefix}{k}"


def _get_path(values: dict, dotted: str):
    for part in dotted.split("."):
        values = values[part]
    return values


def _check_sweep(sc: Scenario, sweep, config, lines, errors) -> dict:
    if not isinstance(sweep, dict):
        errors.append(("sweep", lines.get("sweep"), "expected a mapping"))
        return {}
    out = {}
    for key, values in sweep.items():
        sub = f"sweep.{key}"
        kind = _lookup_kind(sc.config_type, key, sc.hidden)
        if kind is None:
            errors.append((sub, lines.get(sub), "not a scenario setting"))
            continue
        if not isinstance(values, list) or not values:
            errors.append((sub, lines.get(sub), "expected a non-empty list"))
            continue
        ok = True
        for k, v in enumerate(values):
            if not _type_ok(kind, v):
                errors.append((f"{sub}[{k}]", lines.get(sub),
                               f"expected {kind.rstrip('?')}, got {type(v).__name__}"))
                ok = False
                continue
            try:
                _build(sc.config_type, _set_path(config, key, v), sc.hidden)
            except UavUdnError as exc:
                errors.append((f"{sub}[{k}]", lines.get(sub), str(exc)))
                ok = False
        if ok:
            out[key] = list(values)
    return out


def load_spec(path) -> ExperimentSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


# --- execution -------------------------------------------------------------

@dataclass
class MetricReport:
    columns: tuple
    rows: list = field(default_factory=list)
    errors: list = field(default_factory=list)  # (lattice index, message)


def _job(args):
    """One unit of work; module-level so worker processes can import it."""
    scenario, cfg, seed, point = args
    try:
        if scenario == "bs":
            return ("ok", flying_bs.run_trial(cfg, seed))
        if scenario == "relay":
            return ("ok", mobile_relay.run_point(cfg))
        if scenario == "wet":
            res = energy_transfer.run_wet(cfg)
            return ("ok", (energy_transfer.report_rows(cfg, res), res.normalized))
        if scenario == "cache":
            rows = []
            for policy in caching.POLICIES:
                state = caching.simulate(cfg, policy, seed)
                rows.append(caching.summary_row(cfg, policy, seed, state))
            return ("ok", rows)
    except (UavUdnError, ArithmeticError, ValueError) as exc:
        return ("error", f"lattice point {point}: {type(exc).__name__}: {exc}")
    raise AssertionError(f"unhandled scenario {scenario}")


def _trials_for(spec: ExperimentSpec) -> int:
    # Deterministic scenarios give the same answer for every seed.
    return spec.trials if SCENARIOS[spec.scenario].stochastic else 1


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> MetricReport:
    """Run every lattice point and trial; rows come back in lattice-then-trial order.

    A failing lattice point yields one error row (``nan`` in every numeric
    column) and the run carries on.
    """
    sc = SCENARIOS[spec.scenario]
    trials = _trials_for(spec)
    tasks = []
    configs = []
    for i, values in enumerate(spec.lattice()):
        cfg = spec.build_config(values)
        configs.append(cfg)
        for t in range(trials):
            tasks.append((spec.scenario, cfg, child_seed(spec.seed, i, t), i))

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_job, tasks, chunksize=1))
    else:
        results = [_job(t) for t in tasks]

    report = MetricReport(sc.columns)
    for i, cfg in enumerate(configs):
        chunk = results[i * trials:(i + 1) * trials]
        seeds = [tasks[i * trials + t][2] for t in range(trials)]
        failed = [msg for status, msg in chunk if status == "error"]
        if failed:
            report.errors.append((i, failed[0]))
            report.rows.append(_error_row(sc, cfg))
            continue
        payload = [p for _, p in chunk]
        report.rows.extend(_collect(spec, i, cfg, payload, seeds))
    return report


def _collect(spec, index, cfg, payload, seeds):
    if spec.scenario == "bs":
        return flying_bs.aggregate(cfg, payload, spec.seed)
    if spec.scenario == "relay":
        return payload
    if spec.scenario == "wet":
        rows, norm = payload[0]
        if spec.map_dir:
            os.makedirs(spec.map_dir, exist_ok=True)
            energy_transfer.write_map_csv(norm, os.path.join(spec.map_dir, f"map_{index:03d}.csv"))
        return rows
    return [row for rows in payload for row in rows]


def _error_row(sc: Scenario, cfg) -> dict:
    row = {c: math.nan for c in sc.columns}
    row["scenario"] = sc.name
    return row


# --- CSV -------------------------------------------------------------------

def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".9g")
    return str(value)


def write_csv(report: MetricReport, path) -> None:
    """RFC 4180 style: header first, LF line ends, floats to 9 significant digits."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(report.columns)
            for row in report.rows:
                w.writerow([_fmt(row[c]) for c in report.columns])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def log_errors(report: MetricReport, stream=sys.stderr):
    for i, msg in report.errors:
        print(f"error: {msg}", file=stream)
