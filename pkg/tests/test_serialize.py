import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatlab.serialize import format_float, read_json, to_json, write_json


def test_float_has_enough_digits():
    x = 0.1234567890123456789
    assert float(format_float(x)) == x


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trips_exactly(x):
    assert float(format_float(x)) == x


def test_nonfinite_rejected():
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(ValueError):
            format_float(bad)


def test_canonical_output_is_stable():
    payload = {"b": [1.5, 2], "a": {"nested": True, "x": None}}
    assert to_json(payload) == to_json(payload)


def test_numpy_scalars_and_arrays():
    payload = {
        "i": np.int64(3),
        "f": np.float64(0.25),
        "flag": np.bool_(True),
        "arr": np.array([1.0, 2.0]),
    }
    parsed = json.loads(to_json(payload))
    assert parsed == {"i": 3, "f": 0.25, "flag": True, "arr": [1.0, 2.0]}


def test_file_round_trip(tmp_path):
    path = tmp_path / "data.json"
    payload = {"widths": [2, 8, 1], "value": 1.0 / 3.0}
    write_json(str(path), payload)
    text = path.read_text()
    assert text.endswith("\n")
    loaded = read_json(str(path))
    assert loaded["value"] == payload["value"]


def test_insertion_order_preserved():
    text = to_json({"z": 1, "a": 2})
    assert text.index('"z"') < text.index('"a"')
