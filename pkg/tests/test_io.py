import json

import numpy as np
import pytest

from lmdp_lab.generators import (
    SatFormula,
    augment_lmdp,
    comb_lock,
    comb_lock_decodable,
    preset_exact,
    random_lmdp,
    sat_to_separated_lmdp,
)
from lmdp_lab.io import SchemaError, doc_to_family, doc_to_model, family_to_doc, load_model, model_to_doc, save_model


def _models():
    rng = np.random.default_rng(0)
    yield random_lmdp(3, 4, 2, 3, rng)
    yield comb_lock(3, 2, 4, "01")
    yield comb_lock(3, 2, 4, "reference")
    yield comb_lock_decodable(4, 2, 2)
    yield augment_lmdp(comb_lock(2, 2, 3, "1"), preset_exact(3, 0.02))
    yield sat_to_separated_lmdp(SatFormula(2, ((1, -2), (2,))), 2, 0.1)


@pytest.mark.parametrize("model", list(_models()), ids=lambda m: m.metadata.get("generator", "random"))
def test_roundtrip_is_bit_exact(model, tmp_path):
    path = tmp_path / "m.json"
    save_model(model, path)
    back = load_model(path)
    assert back.same_arrays(model)
    for a, b in [(back.rho, model.rho), (back.nu, model.nu), (back.T, model.T), (back.R, model.R)]:
        assert np.array_equal(a, b)
    assert back.metadata == json.loads(json.dumps(model_to_doc(model)["metadata"]))


def test_probabilities_are_strings():
    doc = model_to_doc(comb_lock(2, 2, 3, "1"))
    assert isinstance(doc["rho"][0], str)
    assert doc["schema_version"] == "1"


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("S"),
        lambda d: d.__setitem__("schema_version", "99"),
        lambda d: d["components"].pop(),
        lambda d: d.__setitem__("rho", ["0.9", "0.9"]),
        lambda d: d["components"][0].__setitem__("nu", ["x", "1"]),
        lambda d: d.__setitem__("reward", [[["0"]]]),
    ],
)
def test_schema_violations(mutate):
    doc = model_to_doc(comb_lock(2, 2, 3, "1"))
    mutate(doc)
    with pytest.raises(SchemaError):
        doc_to_model(doc)


def test_family_roundtrip():
    fam = preset_exact(2, 0.03)
    back = doc_to_family(json.loads(json.dumps(family_to_doc(fam))))
    assert np.array_equal(back.mus, fam.mus) and np.array_equal(back.xis, fam.xis)


def test_documents_match_published_schema():
    jsonschema = pytest.importorskip("jsonschema")
    import pathlib

    schema = json.loads((pathlib.Path(__file__).parents[1] / "docs" / "model_schema.json").read_text())
    for m in _models():
        jsonschema.validate(model_to_doc(m), schema)
    bad = model_to_doc(comb_lock(2, 2, 3, (0,)))
    bad["schema_version"] = "0"
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, schema)
