import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from axslice.errors import InstanceError, ModelError
from axslice.model import (
    Box,
    Instance,
    NeuralNetwork,
    Layer,
    is_strict_argmax,
    load_instances,
    load_model,
    predict,
    serialize_model,
)

DEMO_NET = {
    "name": "fig1",
    "features": [
        {"name": "x1", "lb": 0.2, "ub": 0.7},
        {"name": "x2", "lb": 0.2, "ub": 0.5},
    ],
    "classes": ["c1", "c2"],
    "layers": [
        {"weights": [[-1.0, 2.0], [1.0, -1.0]], "bias": [0.0, 0.0], "activation": "relu"},
        {"weights": [[1.0, 1.0], [1.0, -1.0]], "bias": [0.0, 0.0], "activation": "linear"},
    ],
}


def demo_net():
    return load_model(json.dumps(DEMO_NET))


def test_load_demo_net():
    net = demo_net()
    assert net.n_features == 2
    assert net.n_classes == 2
    assert len(net.layers) == 2
    assert net.hidden_sizes == (2,)
    assert net.box.contains([0.7, 0.2])
    assert not net.box.contains([0.71, 0.2])


def test_load_minimal_single_neuron():
    raw = {
        "name": "tiny",
        "features": [{"name": "a", "lb": 0.0, "ub": 1.0}],
        "classes": ["no", "yes"],
        "layers": [
            {"weights": [[1.0]], "bias": [0.0], "activation": "relu"},
            {"weights": [[1.0], [-1.0]], "bias": [0.0, 0.0], "activation": "linear"},
        ],
    }
    net = load_model(json.dumps(raw))
    assert net.total_hidden == 1


def test_dimension_mismatch_names_layer():
    raw = json.loads(json.dumps(DEMO_NET))
    raw["layers"][0]["weights"] = [[-1.0, 2.0], [1.0, -1.0], [0.5, 0.5]]
    raw["layers"][0]["bias"] = [0.0, 0.0, 0.0]
    with pytest.raises(ModelError, match="layer 2"):
        load_model(json.dumps(raw))


def test_reject_parse_error_and_bad_activation_and_nonfinite():
    with pytest.raises(ModelError, match="parse"):
        load_model(b"{not json")
    raw = json.loads(json.dumps(DEMO_NET))
    raw["layers"][0]["activation"] = "sigmoid"
    with pytest.raises(ModelError, match="activation"):
        load_model(json.dumps(raw))
    raw = json.loads(json.dumps(DEMO_NET))
    raw["layers"][1]["activation"] = "relu"
    with pytest.raises(ModelError, match="linear"):
        load_model(json.dumps(raw))
    raw = json.loads(json.dumps(DEMO_NET))
    raw["layers"][0]["weights"][0][0] = float("nan")
    with pytest.raises(ModelError, match="finite"):
        load_model(json.dumps(raw).replace("NaN", "1e999"))


def test_serialize_round_trip_idempotent():
    net = demo_net()
    text = serialize_model(net)
    again = serialize_model(load_model(text))
    assert text == again
    assert json.loads(text)["features"][0] == {"name": "x1", "lb": 0.2, "ub": 0.7}


def test_predict_demo_values():
    net = demo_net()
    p = predict(net, Instance(values=np.array([0.7, 0.2])))
    assert p.class_index == 0
    assert np.allclose(p.outputs, [0.5, -0.5], atol=1e-12)

    p = predict(net, Instance(values=np.array([0.2, 0.5])))
    assert p.class_index == 0  # tie broken toward lowest index
    assert np.allclose(p.outputs, [0.8, 0.8], atol=1e-12)
    assert not is_strict_argmax(p.outputs, 0)


def test_predict_zero_net():
    raw = json.loads(json.dumps(DEMO_NET))
    raw["layers"][0]["weights"] = [[0.0, 0.0], [0.0, 0.0]]
    raw["layers"][1]["weights"] = [[0.0, 0.0], [0.0, 0.0]]
    net = load_model(json.dumps(raw))
    p = predict(net, Instance(values=np.array([0.5, 0.3])))
    assert p.class_index == 0
    assert np.all(p.outputs == 0.0)


def test_predict_rejects_out_of_box_and_bad_length():
    net = demo_net()
    with pytest.raises(InstanceError, match="x1"):
        predict(net, Instance(values=np.array([0.1, 0.3])))
    with pytest.raises(InstanceError):
        predict(net, Instance(values=np.array([0.3])))


def _plain_forward(raw, values):
    # Independent re-evaluation: pure-Python loops, no numpy.
    v = list(values)
    for layer in raw["layers"]:
        nxt = []
        for row, b in zip(layer["weights"], layer["bias"]):
            acc = b
            for w, x in zip(row, v):
                acc += w * x
            if layer["activation"] == "relu":
                acc = max(acc, 0.0)
            nxt.append(acc)
        v = nxt
    return v


@settings(max_examples=200, deadline=None)
@given(
    x1=st.floats(min_value=0.2, max_value=0.7, allow_nan=False),
    x2=st.floats(min_value=0.2, max_value=0.5, allow_nan=False),
)
def test_predict_matches_independent_forward(x1, x2):
    net = demo_net()
    p = predict(net, Instance(values=np.array([x1, x2])))
    expect = _plain_forward(DEMO_NET, [x1, x2])
    assert np.abs(p.outputs - np.array(expect)).max() <= 1e-12


def test_predict_deterministic():
    net = demo_net()
    a = predict(net, Instance(values=np.array([0.55, 0.31])))
    b = predict(net, Instance(values=np.array([0.55, 0.31])))
    assert a.class_index == b.class_index
    assert np.array_equal(a.outputs, b.outputs)


def test_instances_csv_and_json():
    net = demo_net()
    got = load_instances("x1,x2\n0.7,0.2\n0.3,0.4\n", net)
    assert len(got) == 2
    assert np.allclose(got[0].values, [0.7, 0.2])
    got = load_instances('[{"x1": 0.7, "x2": 0.2}]', net)
    assert np.allclose(got[0].values, [0.7, 0.2])


def test_instances_reject_bad_header_missing_key_out_of_box():
    net = demo_net()
    with pytest.raises(InstanceError, match="header"):
        load_instances("x2,x1\n0.2,0.7\n", net)
    with pytest.raises(InstanceError, match="missing"):
        load_instances('[{"x1": 0.7}]', net)
    with pytest.raises(InstanceError, match="x2"):
        load_instances("x1,x2\n0.7,0.6\n", net)
    with pytest.raises(InstanceError, match="numeric"):
        load_instances("x1,x2\n0.7,oops\n", net)


def test_box_split_shares_midpoint():
    box = Box(lb=np.array([0.2, 0.2]), ub=np.array([0.7, 0.5]))
    lo, hi = box.split(1)
    assert lo.ub[1] == hi.lb[1] == pytest.approx(0.35)
    assert lo.lb[0] == hi.lb[0] == 0.2
    assert lo.ub[0] == hi.ub[0] == 0.7


def test_network_rejects_too_few_layers_and_classes():
    with pytest.raises(ModelError):
        NeuralNetwork(
            name="x",
            feature_names=("a",),
            class_names=("p", "q"),
            layers=(Layer(weights=[[1.0]], bias=[0.0], activation="linear"),),
            box=Box(lb=np.array([0.0]), ub=np.array([1.0])),
        )
    raw = json.loads(json.dumps(DEMO_NET))
    raw["classes"] = ["only"]
    with pytest.raises(ModelError):
        load_model(json.dumps(raw))
