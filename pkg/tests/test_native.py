import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from snipal.instances import (
    NativeFormatError,
    dumps,
    from_native,
    gen_transportation,
    generate,
    load_problem,
    read_mps,
    read_native,
    to_native,
    write_native,
)
from snipal.problem import BoxSet, LpProblem, problems_equal

from test_mps import FIXTURES


@pytest.mark.parametrize("family,params", [
    ("random_sparse", dict(m=4, n=9, d=0.5)),
    ("transportation", dict(s=2, t=3, structured=True)),
    ("covering", dict(m=3, n=5, den=0.5)),
    ("correlation_clustering", dict(p=5)),
])
def test_round_trip_and_byte_determinism(family, params, tmp_path):
    prob = generate(family, seed=3, **params)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    write_native(prob, a)
    write_native(generate(family, seed=3, **params), b)
    assert a.read_bytes() == b.read_bytes()
    back = read_native(a)
    assert problems_equal(prob, back, names=True)
    assert back.meta["generator"] == json.loads(json.dumps(prob.meta["generator"]))
    assert load_problem(a).shape == prob.shape


def test_header_fields():
    doc = to_native(gen_transportation(2, 3, seed=0))
    assert doc["format"] == "snipal-lp" and doc["version"] == 1
    assert doc["header"]["m"] == 5 and doc["header"]["n"] == 6 and doc["header"]["nnz"] == 12
    assert doc["header"]["provenance"]["family"] == "transportation"


def test_infinite_bounds_and_names(tmp_path):
    prob = read_mps(FIXTURES / "bounds_fx_fr_mi_pl.mps")
    text = dumps(prob)
    assert '"-inf"' in text and '"inf"' in text
    back = from_native(json.loads(text))
    assert problems_equal(prob, back, names=True)


@given(st.integers(0, 999))
@settings(max_examples=25)
def test_floats_exact(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((2, 3)) * 10.0 ** rng.integers(-300, 300, (2, 3))
    prob = LpProblem(A, rng.standard_normal(2), rng.standard_normal(3), BoxSet.nonnegative(3),
                     offset=float(rng.standard_normal()))
    assert problems_equal(prob, from_native(json.loads(dumps(prob))))


def test_errors(tmp_path):
    with pytest.raises(NativeFormatError, match="not a snipal-lp"):
        from_native({"format": "other"})
    with pytest.raises(NativeFormatError, match="version"):
        from_native({"format": "snipal-lp", "version": 9})
    with pytest.raises(NativeFormatError, match="malformed"):
        from_native({"format": "snipal-lp", "version": 1, "header": {}})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(NativeFormatError, match="invalid JSON"):
        read_native(bad)
