"""Command-line entry point.

Every failure exits nonzero and writes one JSON object to stderr:
``{"error": <kind>, "message": <text>, "exit_code": <n>}`` with exit code
2 for usage errors, 3 for schema violations, 4 for budget overruns and 5 for
numerical failures.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import divergences as dv
from ._config import BudgetExceeded
from .io import SchemaError, doc_to_family, family_to_doc, jsonable, load_model, save_model
from .learner import Environment, InfeasibleError, OmleConfig, omle_run
from .planner import PlannerPolicy, choose_window, plan
from .policies import Uniform

EXIT_USAGE, EXIT_SCHEMA, EXIT_BUDGET, EXIT_NUMERICAL = 2, 3, 4, 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _write_json(obj, path):
    text = json.dumps(jsonable(obj), indent=1) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit(obj):
    sys.stdout.write(json.dumps(jsonable(obj)) + "\n")


def _open_csv(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _floats(text, what):
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of numbers") from None


def _load_policy(path, model):
    if path is None:
        return Uniform(model.A)
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("kind") != "planner_policy":
        raise SchemaError(f"{path}: unsupported policy kind {doc.get('kind')!r}")
    pol = PlannerPolicy.from_json(doc)
    if (pol.S, pol.A, pol.H) != (model.S, model.A, model.H):
        raise SchemaError("policy dimensions do not match the model")
    return pol


# subcommands


def cmd_plan(args):
    model = load_model(args.model)
    if (args.epsilon is None) == (args.window is None):
        raise UsageError("plan needs exactly one of --epsilon and --window")
    W, certified = args.window, None
    if W is None:
        W = choose_window(model, args.epsilon, args.hmax)
        certified = W is not None
        if W is None:
            # nothing is certified; the full window decodes from the whole history
            W = model.H
            sys.stderr.write(json.dumps({"warning": f"no certified window for epsilon={args.epsilon}; using W=H"}) + "\n")
    pi = plan(model, W, args.budget, stitch=args.stitch)
    from .core import value

    v = value(model, pi, args.budget)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "policy.json"), "w") as fh:
        json.dump(pi.to_json(), fh)
        fh.write("\n")
    rows = [("window", W), ("certificate", pi.certificate), ("value", v)]
    if args.epsilon is not None:
        rows[:0] = [("epsilon", args.epsilon), ("certified_window", int(certified))]
    with open(os.path.join(out, "certificate.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("metric", "value"))
        w.writerows((k, "%.17g" % x) for k, x in rows)
    _emit({"window": W, "certified_window": certified, "certificate": pi.certificate, "value": v, "out": out})


def cmd_simulate(args):
    from .core import simulate

    model = load_model(args.model)
    pol = _load_policy(args.policy, model)
    seeds = np.random.SeedSequence(args.seed).spawn(args.episodes)
    fh, close = _open_csv(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("episode", "latent", "step", "state", "action", "reward"))
        for e, ss in enumerate(seeds):
            tr = simulate(model, pol, np.random.default_rng(ss))
            for t, s in enumerate(tr.states):
                a = tr.actions[t]
                w.writerow((e, tr.latent, t + 1, s, a, "%.17g" % model.R[t, s, a]))
    finally:
        if close:
            fh.close()


def cmd_learn(args):
    from .core import brute_force_optimal, value

    if args.config is None:
        raise UsageError("learn needs --config")
    with open(args.config) as fh:
        cfg = json.load(fh)
    base = os.path.dirname(os.path.abspath(args.config))
    try:
        paths = [os.path.join(base, p) for p in cfg["models"]]
        truth = cfg.get("truth", 0)
        K, W = int(cfg["K"]), int(cfg["W"])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"learn config: bad or missing field {exc}") from None
    models = [load_model(p) for p in paths]
    true_model = models[truth] if isinstance(truth, int) else load_model(os.path.join(base, truth))
    beta = cfg.get("beta", OmleConfig.default_beta(len(models), cfg.get("p", 0.01)))
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    ocfg = OmleConfig(K=K, W=W, beta=beta, eps_s=cfg.get("eps_s", 1.0), seed=seed)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    pol, trace = omle_run(models, Environment(true_model, seed), ocfg)
    trace.write_jsonl(os.path.join(out, "trace.jsonl"))
    v = value(true_model, pol, args.budget)
    summary = {
        "K": K,
        "W": W,
        "beta": beta,
        "seed": seed,
        "value": v,
        "mixture_weights": pol.weights,
        "mixture_components": [repr(p) for p in pol.policies],
    }
    if cfg.get("oracle", True):
        opt, _ = brute_force_optimal(true_model, args.budget)
        summary["optimal"] = opt
        summary["suboptimality"] = opt - v
    _write_json(summary, os.path.join(out, "summary.json"))
    _emit(summary)


def _save_or_print(model, path):
    if path in (None, "-"):
        from .io import model_to_doc

        _write_json(model_to_doc(model), None)
    else:
        save_model(model, path)


def cmd_gen_hard(args):
    from . import generators as g

    kind = args.kind
    if kind == "comb-lock":
        model = g.comb_lock(args.n, args.A, args.H, args.theta)
    elif kind == "comb-lock-decodable":
        model = g.comb_lock_decodable(args.N, args.n, args.A, args.theta)
    elif kind == "family":
        if args.preset == "exact":
            fam = g.preset_exact(args.H, args.delta)
        elif args.preset == "tradeoff":
            fam = g.preset_tradeoff(args.H, args.delta, args.lam, args.d)
        else:
            fam = g.make_family(args.r, args.d, args.H, args.delta)
        _write_json(family_to_doc(fam), args.out)
        return
    elif kind == "augmented-lock":
        if args.family is not None:
            with open(args.family) as fh:
                fam = doc_to_family(json.load(fh))
        else:
            fam = g.make_family(args.r, args.d, args.H, args.delta)
        lock = g.comb_lock(fam.L, args.A, args.H, args.theta)
        model = g.augment_lmdp(lock, fam)
    else:  # sat
        phi = _parse_formula(args.formula, args.vars)
        model = g.sat_to_lmdp(phi, args.w) if args.delta is None else g.sat_to_separated_lmdp(phi, args.w, args.delta)
    _save_or_print(model, args.out)


def _parse_formula(text, n):
    from .generators import SatFormula

    try:
        clauses = [tuple(int(x) for x in c.split(",")) for c in text.split(";") if c.strip()]
    except ValueError:
        raise UsageError("formula must look like '1,-2,3;-1,2'") from None
    if n is None:
        n = max(abs(l) for c in clauses for l in c)
    return SatFormula(n, tuple(clauses))


def cmd_check_separation(args):
    from .separation import certified_varpi

    model = load_model(args.model)
    h_max = args.hmax or model.H
    prof = certified_varpi(model, h_max)
    fh, close = _open_csv(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("h", "varpi", "nondecreasing"))
        prev = -np.inf
        for h in range(1, h_max + 1):
            x = prof(h)
            w.writerow((h, "%.17g" % x, int(x >= prev)))
            prev = x
    finally:
        if close:
            fh.close()


def cmd_divergence(args):
    p = _floats(args.p, "--p")
    q = _floats(args.q, "--q")
    if p.shape != q.shape:
        raise UsageError("--p and --q need the same length")
    p, q = dv.as_dist(p), dv.as_dist(q)
    res = {
        "tv": dv.tv(p, q),
        "hellinger_sq": dv.hellinger_sq(p, q),
        "bhattacharyya_coefficient": dv.bhattacharyya_coefficient(p, q),
        "bhattacharyya": dv.bhattacharyya(p, q),
    }
    _write_json(res, args.out)


def cmd_oracle(args):
    from .core import brute_force_optimal, value

    model = load_model(args.model)
    if args.policy is not None:
        res = {"value": value(model, _load_policy(args.policy, model), args.budget)}
    else:
        opt, _ = brute_force_optimal(model, args.budget, args.method)
        res = {"optimal_value": opt, "method": args.method}
    _write_json(res, args.out)


def cmd_experiment(args):
    from .experiments import run_experiment

    if args.config is None:
        raise UsageError("experiment needs --config")
    rec = run_experiment(args.config, args.out or ".", workers=args.workers)
    _emit({"n_points": rec.outputs["n_points"], "hashes": rec.hashes, "wall_time": rec.wall_time})


def build_parser():
    p = _Parser(prog="lmdp-lab", description="Latent MDP laboratory.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, model=True):
        if model:
            sp.add_argument("--model", required=True, help="model JSON document")
        sp.add_argument("--out", help="output path (file or directory depending on the command)")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--budget", type=int, default=None, help="max nodes per exact enumeration")

    sp = sub.add_parser("plan", help="plan with context inference")
    common(sp)
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--window", type=int)
    sp.add_argument("--hmax", type=int, default=None)
    sp.add_argument("--stitch", choices=("decoded", "mixture"), default="decoded")
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("simulate", help="sample episodes as CSV")
    common(sp)
    sp.add_argument("--policy", help="planner policy JSON (default: uniform)")
    sp.add_argument("--episodes", type=int, default=1)
    sp.set_defaults(func=cmd_simulate, seed=0)

    sp = sub.add_parser("learn", help="run OMLE over a finite model class")
    common(sp, model=False)
    sp.add_argument("--config", help="JSON config: models, truth, K, W, beta, eps_s")
    sp.set_defaults(func=cmd_learn)

    sp = sub.add_parser("gen-hard", help="generate hard instances")
    kinds = sp.add_subparsers(dest="kind", parser_class=_Parser)
    kinds.required = True

    k = kinds.add_parser("comb-lock")
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--A", type=int, required=True)
    k.add_argument("--H", type=int, required=True)
    k.add_argument("--theta", required=True, help="digits of the lock string, or 'reference'")
    k.add_argument("--out")

    k = kinds.add_parser("comb-lock-decodable")
    k.add_argument("--N", type=int, required=True)
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--A", type=int, required=True)
    k.add_argument("--theta", default=None)
    k.add_argument("--out")

    k = kinds.add_parser("family")
    k.add_argument("--preset", choices=("exact", "tradeoff", "compute"), default="compute")
    k.add_argument("--H", type=int, required=True)
    k.add_argument("--delta", type=float, required=True)
    k.add_argument("--lam", type=float, default=1.0)
    k.add_argument("--d", type=int, default=None)
    k.add_argument("--r", type=int, default=1)
    k.add_argument("--out")

    k = kinds.add_parser("augmented-lock")
    k.add_argument("--A", type=int, required=True)
    k.add_argument("--H", type=int, required=True)
    k.add_argument("--theta", required=True)
    k.add_argument("--family", help="family JSON (default: computable family from --r --d --delta)")
    k.add_argument("--r", type=int, default=1)
    k.add_argument("--d", type=int, default=None)
    k.add_argument("--delta", type=float, default=None)
    k.add_argument("--out")

    k = kinds.add_parser("sat")
    k.add_argument("--formula", required=True, help="clauses of signed literals, e.g. '1,-2,3;-1,2'")
    k.add_argument("--vars", type=int, default=None, help="number of variables (default: largest index)")
    k.add_argument("--w", type=int, default=2)
    k.add_argument("--delta", type=float, default=None, help="build the strongly separated variant")
    k.add_argument("--out")
    sp.set_defaults(func=cmd_gen_hard)

    sp = sub.add_parser("check-separation", help="certified separation profile as CSV")
    common(sp)
    sp.add_argument("--hmax", type=int, default=None)
    sp.set_defaults(func=cmd_check_separation)

    sp = sub.add_parser("divergence", help="TV, Hellinger and Bhattacharyya of two distributions")
    sp.add_argument("--p", required=True)
    sp.add_argument("--q", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_divergence)

    sp = sub.add_parser("oracle", help="exact optimal value, or the value of --policy")
    common(sp)
    sp.add_argument("--method", choices=("auto", "tree", "belief"), default="auto")
    sp.add_argument("--policy", default=None)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("experiment", help="run a config-driven sweep")
    common(sp, model=False)
    sp.add_argument("--config")
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_experiment)
    return p


def _fail(kind, exc, code):
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc), "exit_code": code}) + "\n")
    return code


def _check_augmented_args(args):
    if args.command == "gen-hard" and args.kind == "augmented-lock" and args.family is None:
        if args.d is None or args.delta is None:
            raise UsageError("augmented-lock needs --family or both --d and --delta")
    if args.command == "gen-hard" and args.kind == "family" and args.preset == "compute" and args.d is None:
        raise UsageError("the compute preset needs --d")


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        _check_augmented_args(args)
        args.func(args)
    except UsageError as exc:
        return _fail("usage", exc, EXIT_USAGE)
    except SchemaError as exc:
        return _fail("schema", exc, EXIT_SCHEMA)
    except BudgetExceeded as exc:
        return _fail("budget", exc, EXIT_BUDGET)
    except (InfeasibleError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return _fail("numerical", exc, EXIT_NUMERICAL)
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        return _fail("usage", exc, EXIT_USAGE)
    return 0


if __name__ == "__main__":
    sys.exit(main())
