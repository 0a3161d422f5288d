"""Config-driven sweeps with long-format CSV output and a run record.

A config is a JSON object::

    {"name": "dec-sweep",
     "instance": {"kind": "random_separated", "L": 2, "S": 3, "A": 2, "H": 5, "delta": 0.3},
     "algorithm": "decoding_error",
     "grid": {"W": [1, 2, 3, 4, 5]},
     "seeds": [0, 1, 2],
     "options": {"policy": "random_markov"},
     "workers": 1}

Each grid point is one ``(parameter value, seed)`` pair. Points are written
to their own temp file and merged in grid order, so the CSV does not depend
on the number of workers.
"""

import csv
import hashlib
import json
import math
import os
import shutil
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import brute_force_optimal, value
from .inference import decoding_error_exact
from .io import jsonable, load_model
from .learner import Environment, OmleConfig, build_candidates, omle_run
from .planner import choose_window, plan
from .policies import Markov, Uniform
from .separation import certified_varpi

CSV_COLUMNS = ("instance_id", "seed", "parameter", "metric", "value")
ALGORITHMS = ("decoding_error", "planner", "omle")
GRID_KEYS = {"decoding_error": "W", "planner": "W", "omle": "K"}


@dataclass
class RunRecord:
    command: str
    config: dict
    seeds: list
    wall_time: float
    outputs: dict = field(default_factory=dict)
    hashes: dict = field(default_factory=dict)

    def to_json(self):
        return jsonable(asdict(self))


def _instance(spec, seed):
    from . import generators as g

    kind = spec.get("kind")
    if kind == "model":
        model = load_model(spec["path"])
        return os.path.basename(spec["path"]), [model]
    if kind == "random_separated":
        rng = np.random.default_rng([int(spec.get("instance_seed", 0)), seed])
        model = g.random_separated(spec["L"], spec["S"], spec["A"], spec["H"], spec["delta"], rng)
        return f"random_separated-{seed}", [model]
    if kind == "random":
        rng = np.random.default_rng([int(spec.get("instance_seed", 0)), seed])
        model = g.random_lmdp(spec["L"], spec["S"], spec["A"], spec["H"], rng)
        return f"random-{seed}", [model]
    if kind == "comb_lock":
        model = g.comb_lock(spec["n"], spec["A"], spec["H"], spec["theta"])
        return f"comb_lock-n{spec['n']}", [model]
    if kind == "optimistic_pair":
        pair = g.optimistic_pair(
            spec.get("S", 3), spec.get("A", 2), spec.get("H", 4), spec.get("delta", 0.5), spec.get("class_seed", 0)
        )
        return f"optimistic_pair-{spec.get('class_seed', 0)}", list(pair)
    raise ValueError(f"unknown instance kind {kind!r}")


def _policy(name, model, seed):
    if name == "uniform":
        return Uniform(model.A)
    if name == "random_markov":
        return Markov.random(model.H, model.S, model.A, np.random.default_rng([seed, 1]))
    raise ValueError(f"unknown policy {name!r}")


def _rows_decoding_error(models, W, seed, opts):
    model = models[0]
    if W > model.H:
        return []
    pi = _policy(opts.get("policy", "random_markov"), model, seed)
    e = decoding_error_exact(model, pi, W, opts.get("budget"))
    varpi = certified_varpi(model, W)(W)
    return [("decoding_error", e), ("bound", min(1.0, model.L * math.exp(-varpi)))]


def _rows_planner(models, W, seed, opts):
    model = models[0]
    if W > model.H:
        return []
    budget = opts.get("budget")
    pi = plan(model, W, budget)
    v = value(model, pi, budget)
    opt, _ = brute_force_optimal(model, budget)
    rows = [("value", v), ("optimal", opt), ("suboptimality", opt - v), ("certificate", pi.certificate)]
    if "epsilon" in opts:
        Wc = choose_window(model, opts["epsilon"])
        rows.append(("choose_window", float("nan") if Wc is None else Wc))
    return rows


def _rows_omle(models, K, seed, opts):
    truth = models[opts.get("truth_index", 0)]
    W = opts.get("W", 1)
    beta = opts.get("beta", OmleConfig.default_beta(len(models), opts.get("p", 0.01)))
    cfg = OmleConfig(K=K, W=W, beta=beta, eps_s=opts.get("eps_s", 1.0), seed=seed)
    cands = build_candidates(models, W, seed=seed)
    pol, trace = omle_run(models, Environment(truth, seed), cfg, candidates=cands)
    opt, _ = brute_force_optimal(truth, opts.get("budget"))
    v = value(truth, pol)
    t_idx = opts.get("truth_index", 0)
    always = all(t_idx in cs for cs in trace.confidence_sets())
    return [("value", v), ("suboptimality", opt - v), ("truth_always_in_confidence_set", float(always))]


_RUNNERS = {"decoding_error": _rows_decoding_error, "planner": _rows_planner, "omle": _rows_omle}


def validate_config(config):
    if not isinstance(config, dict):
        raise ValueError("config must be a JSON object")
    alg = config.get("algorithm")
    if alg not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}")
    grid = config.get("grid", {})
    extra = set(grid) - {GRID_KEYS[alg]}
    if extra:
        raise ValueError(f"{alg} sweeps only over {GRID_KEYS[alg]!r}, got {sorted(extra)}")
    if "instance" not in config:
        raise ValueError("config needs an 'instance' section")
    seeds = config.get("seeds", [0])
    if not all(isinstance(s, int) and s >= 0 for s in seeds):
        raise ValueError("seeds must be nonnegative integers")


def grid_points(config):
    alg = config["algorithm"]
    key = GRID_KEYS[alg]
    vals = config.get("grid", {}).get(key, [])
    return [(key, int(v), int(s)) for v in vals for s in config.get("seeds", [0])]


def _fmt(x):
    return "%.17g" % x


def _run_point(args):
    config, point, path = args
    key, val, seed = point
    iid, models = _instance(config["instance"], seed)
    rows = _RUNNERS[config["algorithm"]](models, val, seed, config.get("options", {}))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for metric, x in rows:
            w.writerow((iid, seed, f"{key}={val}", metric, _fmt(x)))
    return path


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def run_experiment(config, out_dir, workers=None, command="experiment"):
    """Run the sweep in ``config`` (a dict or a JSON path); write ``results.csv`` and ``run_record.json``."""
    if isinstance(config, (str, os.PathLike)):
        with open(config) as fh:
            config = json.load(fh)
    validate_config(config)
    os.makedirs(out_dir, exist_ok=True)
    workers = int(config.get("workers", 1) if workers is None else workers)
    points = grid_points(config)
    t0 = time.perf_counter()
    tmp = tempfile.mkdtemp(prefix="lmdp_lab_", dir=out_dir)
    try:
        jobs = [(config, p, os.path.join(tmp, f"point_{i:06d}.csv")) for i, p in enumerate(points)]
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(_run_point, jobs))
        else:
            parts = [_run_point(j) for j in jobs]
        out_csv = os.path.join(out_dir, "results.csv")
        with open(out_csv, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(CSV_COLUMNS)
            for p in parts:
                with open(p) as part:
                    shutil.copyfileobj(part, fh)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    record = RunRecord(
        command=command,
        config=config,
        seeds=list(config.get("seeds", [0])),
        wall_time=time.perf_counter() - t0,
        outputs={"results": "results.csv", "n_points": len(points)},
        hashes={"results.csv": _sha256(out_csv)},
    )
    with open(os.path.join(out_dir, "run_record.json"), "w") as fh:
        json.dump(record.to_json(), fh, indent=1)
        fh.write("\n")
    return record


def read_results(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))

