import json
import math

import pytest
from hypothesis import given, strategies as st

from carbonsight.canonical import canonical_bytes, canonical_dumps, canonical_hash, sha256_hex

json_scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=-(2**53), max_value=2**53),
    st.floats(allow_nan=False, allow_infinity=False),
    st.text(max_size=40),
)
json_values = st.recursive(
    json_scalars,
    lambda inner: st.one_of(
        st.lists(inner, max_size=6), st.dictionaries(st.text(max_size=12), inner, max_size=6)
    ),
    max_leaves=25,
)


def test_sorted_compact_output():
    assert canonical_dumps({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'


def test_unicode_not_escaped():
    assert canonical_dumps({"u": "m³"}) == '{"u":"m³"}'


def test_nan_rejected():
    with pytest.raises(ValueError):
        canonical_dumps({"x": math.nan})


@given(json_values)
def test_key_order_never_changes_hash(value):
    # rebuilding every dict in reverse insertion order must not matter
    def reordered(v):
        if isinstance(v, dict):
            return {k: reordered(v[k]) for k in sorted(v, reverse=True)}
        if isinstance(v, list):
            return [reordered(x) for x in v]
        return v

    assert canonical_hash(value) == canonical_hash(reordered(value))


@given(json_values)
def test_round_trips_through_json(value):
    assert json.loads(canonical_dumps(value)) == value


def test_hash_is_sha256_of_bytes():
    payload = {"kind": "t2i", "payload": {"prompt": "x"}}
    assert canonical_hash(payload) == sha256_hex(canonical_bytes(payload))
    assert len(canonical_hash(payload)) == 64


def test_distinct_requests_distinct_hashes():
    # no collisions across a corpus of near-identical requests
    corpus = [
        {"kind": "t2i", "payload": {"prompt": f"room {i}", "params": {}}}
        for i in range(200)
    ] + [
        {"kind": "vlm_match", "payload": {"description": f"room {i}"}}
        for i in range(200)
    ]
    hashes = {canonical_hash(c) for c in corpus}
    assert len(hashes) == len(corpus)
