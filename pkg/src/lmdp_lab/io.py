"""JSON model documents.

Probabilities and rewards are written as decimal strings with 17
significant digits so that a save/load round trip is bit exact.
"""

import json

import numpy as np

from .model import Lmdp

SCHEMA_VERSION = "1"


class SchemaError(ValueError):
    """A document that does not describe a valid model."""


def _enc(x):
    return "%.17g" % float(x)


def _enc_array(a):
    a = np.asarray(a)
    if a.ndim == 0:
        return _enc(a)
    return [_enc_array(x) for x in a]


def _dec_array(v, shape, what):
    try:
        arr = np.array(v, dtype=object)
        out = np.vectorize(float, otypes=[np.float64])(arr) if arr.size else np.zeros(shape)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{what}: {exc}") from None
    if out.shape != tuple(shape):
        raise SchemaError(f"{what} has shape {out.shape}, expected {tuple(shape)}")
    return out


def jsonable(obj):
    """Convert numpy scalars and arrays inside ``obj`` into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def model_to_doc(model):
    return {
        "schema_version": SCHEMA_VERSION,
        "S": model.S,
        "A": model.A,
        "H": model.H,
        "L": model.L,
        "rho": _enc_array(model.rho),
        "components": [{"nu": _enc_array(model.nu[m]), "T": _enc_array(model.T[m])} for m in range(model.L)],
        "reward": _enc_array(model.R),
        "metadata": jsonable(model.metadata),
    }


def doc_to_model(doc):
    if not isinstance(doc, dict):
        raise SchemaError("model document must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {doc.get('schema_version')!r}")
    try:
        S, A, H, L = (int(doc[k]) for k in ("S", "A", "H", "L"))
        comps = doc["components"]
        rho = _dec_array(doc["rho"], (L,), "rho")
        R = _dec_array(doc["reward"], (H, S, A), "reward")
    except KeyError as exc:
        raise SchemaError(f"missing field {exc}") from None
    if not isinstance(comps, list) or len(comps) != L:
        raise SchemaError(f"expected {L} components")
    nu = np.array([_dec_array(c.get("nu"), (S,), f"components[{i}].nu") for i, c in enumerate(comps)])
    T = np.array([_dec_array(c.get("T"), (S, A, S), f"components[{i}].T") for i, c in enumerate(comps)])
    try:
        return Lmdp(rho, nu, T, R, dict(doc.get("metadata") or {}))
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def save_model(model, path):
    with open(path, "w") as fh:
        json.dump(model_to_doc(model), fh, indent=1)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not JSON ({exc})") from None
    return doc_to_model(doc)


def family_to_doc(fam):
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "family",
        "H": fam.H,
        "delta": _enc(fam.delta),
        "gamma": _enc(fam.gamma),
        "mus": _enc_array(fam.mus),
        "xis": _enc_array(fam.xis),
        "info": jsonable(fam.info),
    }


def doc_to_family(doc):
    from .generators.families import Family

    if doc.get("kind") != "family":
        raise SchemaError("not a family document")
    mus = np.array([[float(x) for x in row] for row in doc["mus"]])
    xis = np.array([[float(x) for x in row] for row in doc["xis"]])
    return Family(mus, xis, int(doc["H"]), float(doc["delta"]), float(doc["gamma"]), doc.get("info", {}))
