"""Experiment runner: config parsing, dispatch, CSV output.

Usage: ``sptquench <experiment> [--config PATH] [--seed N] [--threads N]
[--out PATH] [--key.path value ...]``.  Configs are JSON, one experiment
per file; any scalar field can be overridden from the command line by its
dotted key path.  CSV outputs carry a header comment block with the config
hash, seed and code version, and are written atomically.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

import argparse
import copy
import hashlib
import json
import os
import sys
import tempfile

import numpy as np
import jsonschema

from . import __version__, experiments
from .errors import ConfigError, SptQuenchError

EXPERIMENTS = ("quench-ssh", "lr-constants", "flatband", "mps-quench",
               "cocycle", "disorder-ssh", "mbl", "validate")

_BASE_PROPERTIES = {
    "experiment": {"enum": list(EXPERIMENTS)},
    "seed": {"type": "integer", "minimum": 0},
    "threads": {"type": "integer", "minimum": 1},
    "output_path": {"type": "string"},
    "parameters": {"type": "object"},
}

_PARAM_SCHEMAS = {
    "quench-ssh": {
        "j1": {"type": "number"}, "j2": {"type": "number"},
        "j1_post": {"type": "number"}, "j2_post": {"type": "number"},
        "l": {"type": "integer", "minimum": 1},
        "t_max": {"type": "number"}, "t_step": {"type": "number"},
        "n_k": {"type": "integer", "minimum": 8},
    },
    "lr-constants": {
        "j1": {"type": "number"}, "j2": {"type": "number"},
        "j1_post": {"type": "number"}, "j2_post": {"type": "number"},
        "kappa_max": {"type": "number"}, "n_kappa": {"type": "integer"},
    },
    "flatband": {
        "n_chains": {"type": "integer", "minimum": 1},
        "t_max": {"type": "number"}, "n_times": {"type": "integer"},
    },
    "mps-quench": {
        "p": {"type": "number"}, "q": {"type": "number"},
        "theta": {"type": "number"},
        "l_values": {"type": "array", "items": {"type": "integer"}},
        "t_values": {"type": "array", "items": {"type": "integer"}},
    },
    "cocycle": {
        "n_order": {"type": "integer", "minimum": 2},
        "nu": {"type": "integer", "minimum": 0},
        "subgroup": {"type": "integer", "minimum": 1},
        "t_max": {"type": "number"}, "n_times": {"type": "integer"},
        "draw": {"type": "integer", "minimum": 0},
    },
    "disorder-ssh": {
        "l": {"type": "integer", "minimum": 2},
        "pre": {"type": "array", "items": {"type": "number"}},
        "post": {"type": "array", "items": {"type": "number"}},
        "times": {"type": "array", "items": {"type": "number"}},
        "realizations": {"type": "integer", "minimum": 1},
    },
    "mbl": {
        "length": {"type": "integer", "minimum": 2, "maximum": 8},
        "p": {"type": "number"}, "q": {"type": "number"},
        "j0": {"type": "number"}, "kappa_decay": {"type": "number"},
        "t_min": {"type": "number"}, "t_max": {"type": "number"},
        "n_times": {"type": "integer"},
        "realizations": {"type": "integer", "minimum": 1},
        "cut": {"type": "integer", "minimum": 1},
    },
    "validate": {"report_path": {"type": "string"}},
}

DEFAULTS = {
    "quench-ssh": {"j1": 0.5, "j2": 1.0, "j1_post": 1.0, "j2_post": 0.5,
                   "l": 40, "t_max": 50.0, "t_step": 0.5, "n_k": 2048},
    "lr-constants": {"j1": 0.5, "j2": 1.0, "j1_post": 1.0, "j2_post": 0.5,
                     "kappa_max": 0.6, "n_kappa": 16},
    "flatband": {"n_chains": 4, "t_max": 4 * np.pi, "n_times": 200},
    "mps-quench": {"p": 0.49, "q": 0.49, "theta": 0.4,
                   "l_values": [10, 12, 14, 16, 18, 20, 22, 24],
                   "t_values": [0, 1, 2, 3]},
    "cocycle": {"n_order": 6, "nu": 1, "subgroup": 2, "t_max": 2.0,
                "n_times": 80, "draw": 0},
    "disorder-ssh": {"l": 10, "pre": [0.5, 1.0, 0.0], "post": [1.0, 0.5, 0.6],
                     "times": [0.5, 1, 2, 5, 10, 20, 50, 100, 150, 200],
                     "realizations": 200},
    "mbl": {"length": 6, "p": 0.49, "q": 0.49, "j0": 3.0, "kappa_decay": 3.0,
            "t_min": 0.1, "t_max": 1000.0, "n_times": 25, "realizations": 100,
            "cut": 3},
    "validate": {"report_path": ""},
}


def _schema_for(experiment):
    params = _PARAM_SCHEMAS[experiment]
    props = dict(_BASE_PROPERTIES)
    props["parameters"] = {"type": "object", "properties": params,
                           "additionalProperties": False}
    return {"type": "object", "properties": props,
            "additionalProperties": False}


def load_config(experiment, path=None):
    config = {"experiment": experiment, "seed": 0, "threads": 0,
              "output_path": f"{experiment}.csv",
              "parameters": copy.deepcopy(DEFAULTS[experiment])}
    if path is not None:
        with open(path) as fh:
            user = json.load(fh)
        if "experiment" in user and user["experiment"] != experiment:
            raise ConfigError(
                f"config is for {user['experiment']!r}, not {experiment!r}")
        for key, value in user.items():
            if key == "parameters":
                config["parameters"].update(value)
            else:
                config[key] = value
    if config["threads"] == 0:
        config["threads"] = int(os.environ.get("SPTQ_THREADS", "1"))
    try:
        jsonschema.validate(config, _schema_for(experiment))
    except jsonschema.ValidationError as exc:
        raise ConfigError(exc.message) from exc
    return config


def apply_overrides(config, pairs):
    """Apply ``key.path=value`` overrides with JSON-parsed scalars."""
    for key, raw in pairs:
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                raise ConfigError(f"unknown config path {key!r}")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(f"unknown config key {key!r}")
        node[parts[-1]] = value
    return config


def config_hash(config):
    """Hash of the science-relevant fields only (experiment, seed,
    parameters); output path and thread count do not change results."""
    core = {"experiment": config["experiment"], "seed": config["seed"],
            "parameters": config["parameters"]}
    blob = json.dumps(core, sort_keys=True, default=float)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def write_csv(path, config, columns, rows):
    """Atomic CSV write with a reproducibility header comment block."""
    lines = [f"# experiment: {config['experiment']}",
             f"# config_hash: {config_hash(config)}",
             f"# seed: {config['seed']}",
             f"# version: {__version__}",
             ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    payload = "\n".join(lines) + "\n"
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest exact round-trip, '.' separator
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _times(lo, hi, n, log=False):
    return np.geomspace(lo, hi, n) if log else np.linspace(lo, hi, n)


def run(config):
    """Dispatch one experiment config; returns (columns, rows) for CSV."""
    exp = config["experiment"]
    par = config["parameters"]
    seed = config["seed"]
    threads = config["threads"]
    if exp == "quench-ssh":
        times = np.arange(0.0, par["t_max"] + par["t_step"] / 2, par["t_step"])
        rows = experiments.quench_ssh(par["j1"], par["j2"], par["j1_post"],
                                      par["j2_post"], par["l"], times,
                                      n_k=par["n_k"], threads=threads)
        n_modes = rows[0]["xi"].size
        cols = ["t"] + [f"xi_{i + 1}" for i in range(n_modes)] + ["gap"]
        data = [[r["t"], *r["xi"].tolist(), r["gap"]] for r in rows]
        return cols, data
    if exp == "lr-constants":
        kappas = np.linspace(par["kappa_max"] / par["n_kappa"],
                             par["kappa_max"], par["n_kappa"])
        rows = experiments.lr_velocity_scan(par["j1"], par["j2"],
                                            par["j1_post"], par["j2_post"],
                                            kappas, threads=threads)
        return ["kappa", "v", "C"], [[r["kappa"], r["v"], r["C"]] for r in rows]
    if exp == "flatband":
        times = _times(0.0, par["t_max"], par["n_times"])
        rows = experiments.flatband(par["n_chains"], times)
        n = par["n_chains"]
        cols = (["t"] + [f"xi_num_{i + 1}" for i in range(n)]
                + [f"xi_ana_{i + 1}" for i in range(n)])
        data = [[r["t"], *r["xi_numeric"].tolist(), *r["xi_analytic"].tolist()]
                for r in rows]
        return cols, data
    if exp == "mps-quench":
        rows = experiments.mps_quench(par["p"], par["q"], par["theta"],
                                      par["l_values"], par["t_values"])
        cols = ["t", "l", "mb_gap", "thm2_bound", "channel_bound"]
        return cols, [[r[c] for c in cols] for r in rows]
    if exp == "cocycle":
        times = _times(0.0, par["t_max"], par["n_times"])
        rows = experiments.cocycle(par["n_order"], par["nu"], par["subgroup"],
                                   times, seed, par["draw"])
        n_z = rows[0]["zeta"].size
        cols = (["t", "top_degeneracy", "split_count"]
                + [f"zeta_{i + 1}" for i in range(n_z)])
        data = [[r["t"], r["top_degeneracy"], r["split_count"],
                 *r["zeta"].tolist()] for r in rows]
        return cols, data
    if exp == "disorder-ssh":
        rows = experiments.disordered_ssh(par["l"], tuple(par["pre"]),
                                          tuple(par["post"]), par["times"],
                                          par["realizations"], seed,
                                          threads=threads)
        cols = ["t", "n_ok", "n_skipped", "gap_mean", "gap_stderr",
                "gap_median", "entropy_mean", "entropy_stderr"]
        return cols, [[r[c] for c in cols] for r in rows]
    if exp == "mbl":
        times = _times(par["t_min"], par["t_max"], par["n_times"], log=True)
        rows = experiments.mbl(par["length"], par["p"], par["q"], par["j0"],
                               par["kappa_decay"], times, par["realizations"],
                               seed, cut=par["cut"], threads=threads)
        cols = ["t", "entropy_mean", "entropy_stderr", "gap_mean", "gap_stderr"]
        return cols, [[r[c] for c in cols] for r in rows]
    raise ConfigError(f"unknown experiment {exp!r}")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sptquench",
        description="SPT quench experiments and bound validation")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", default=None)
    args, extra = parser.parse_known_args(argv)

    overrides = []
    i = 0
    while i < len(extra):
        token = extra[i]
        if not token.startswith("--"):
            print(f"error: unexpected argument {token!r}", file=sys.stderr)
            return 1
        if "=" in token:
            key, raw = token[2:].split("=", 1)
            overrides.append((key, raw))
            i += 1
        else:
            if i + 1 >= len(extra):
                print(f"error: missing value for {token!r}", file=sys.stderr)
                return 1
            overrides.append((token[2:], extra[i + 1]))
            i += 2

    try:
        config = load_config(args.experiment, args.config)
        if args.seed is not None:
            config["seed"] = args.seed
        if args.threads is not None:
            config["threads"] = args.threads
        if args.out is not None:
            config["output_path"] = args.out
        config = apply_overrides(config, overrides)
        jsonschema.validate(config, _schema_for(args.experiment))
    except (ConfigError, OSError, json.JSONDecodeError,
            jsonschema.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.experiment == "validate":
        from .validate import run_suite, write_report
        report = run_suite(threads=config["threads"])
        path = config["parameters"].get("report_path") or "validation_report.json"
        write_report(path, report)
        failed = [r for r in report["criteria"] if not r["passed"]]
        for r in report["criteria"]:
            status = "PASS" if r["passed"] else "FAIL"
            print(f"[{status}] {r['name']}: {r['summary']}")
        print(f"report written to {path}")
        return 0 if not failed else 2

    try:
        cols, rows = run(config)
    except SptQuenchError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    write_csv(config["output_path"], config, cols, rows)
    print(f"wrote {config['output_path']} ({len(rows)} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
