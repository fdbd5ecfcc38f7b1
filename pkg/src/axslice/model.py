"""Feed-forward ReLU networks, input boxes, instances, and the model file format.

The model format is JSON:

    {"name": str,
     "features": [{"name": str, "lb": num, "ub": num}, ...],
     "classes": [str, ...],
     "layers": [{"weights": [[num]], "bias": [num], "activation": "relu"|"linear"}, ...]}

``weights[j][i]`` is the weight from input ``i`` to neuron ``j``.  Hidden
layers must use "relu"; the final layer must be "linear".  Instances come
either as CSV with a header row matching the feature names exactly, or as a
JSON array of objects keyed by feature name.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InstanceError, ModelError

RELU = "relu"
LINEAR = "linear"


def _readonly(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Layer:
    """One dense layer: rows of ``weights`` are neurons, columns are inputs."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self):
        object.__setattr__(self, "weights", _readonly(self.weights))
        object.__setattr__(self, "bias", _readonly(self.bias))
        if self.weights.ndim != 2 or self.weights.shape[1] == 0:
            raise ModelError("layer weights must be a non-empty 2-d matrix")
        if self.weights.shape[0] != self.bias.shape[0]:
            raise ModelError(
                "layer has %d weight rows but %d bias entries"
                % (self.weights.shape[0], self.bias.shape[0])
            )
        if self.activation not in (RELU, LINEAR):
            raise ModelError("unknown activation %r" % (self.activation,))
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ModelError("layer contains non-finite weights or biases")

    @property
    def in_width(self) -> int:
        return self.weights.shape[1]

    @property
    def out_width(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class Box:
    """Per-feature closed intervals; the input domain or a subdomain of it."""

    lb: np.ndarray
    ub: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lb", _readonly(self.lb))
        object.__setattr__(self, "ub", _readonly(self.ub))
        if self.lb.shape != self.ub.shape or self.lb.ndim != 1:
            raise ModelError("box lower/upper bound vectors must match")
        if not (np.isfinite(self.lb).all() and np.isfinite(self.ub).all()):
            raise ModelError("box bounds must be finite")
        if (self.lb > self.ub).any():
            bad = int(np.argmax(self.lb > self.ub))
            raise ModelError("box interval %d has lb > ub" % bad)

    @property
    def size(self) -> int:
        return self.lb.shape[0]

    def contains(self, values, tol: float = 0.0) -> bool:
        v = np.asarray(values, dtype=float)
        return bool((v >= self.lb - tol).all() and (v <= self.ub + tol).all())

    def midpoint(self, i: int) -> float:
        return (float(self.lb[i]) + float(self.ub[i])) / 2.0

    def split(self, i: int) -> tuple["Box", "Box"]:
        """Halve interval ``i`` at its midpoint; both halves keep the midpoint."""
        m = self.midpoint(i)
        lo_ub = self.ub.copy()
        lo_ub[i] = m
        hi_lb = self.lb.copy()
        hi_lb[i] = m
        return Box(self.lb, lo_ub), Box(hi_lb, self.ub)

    def with_interval(self, i: int, lo: float, hi: float) -> "Box":
        lb = self.lb.copy()
        ub = self.ub.copy()
        lb[i], ub[i] = lo, hi
        return Box(lb, ub)


@dataclass(frozen=True)
class NeuralNetwork:
    """ReLU hidden layers plus a linear output layer, with its input box."""

    name: str
    feature_names: tuple
    class_names: tuple
    layers: tuple
    box: Box

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        object.__setattr__(self, "layers", tuple(self.layers))
        n = len(self.feature_names)
        k = len(self.class_names)
        if len(set(self.feature_names)) != n:
            raise ModelError("duplicate feature names")
        if len(self.layers) < 2:
            raise ModelError("need at least one hidden layer and one output layer")
        if k < 2:
            raise ModelError("need at least 2 classes")
        if self.box.size != n:
            raise ModelError(
                "box has %d intervals but model has %d features" % (self.box.size, n)
            )
        width = n
        for idx, layer in enumerate(self.layers, start=1):
            if layer.in_width != width:
                raise ModelError(
                    "layer %d expects %d inputs but layer %d provides %d"
                    % (idx, layer.in_width, idx - 1, width)
                )
            last = idx == len(self.layers)
            if last and layer.activation != LINEAR:
                raise ModelError("output layer (layer %d) must be linear" % idx)
            if not last and layer.activation != RELU:
                raise ModelError("hidden layer %d must use relu" % idx)
            width = layer.out_width
        if width != k:
            raise ModelError(
                "output layer has %d neurons but model declares %d classes" % (width, k)
            )

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def hidden_layers(self) -> tuple:
        return self.layers[:-1]

    @property
    def hidden_sizes(self) -> tuple:
        return tuple(l.out_width for l in self.hidden_layers)

    @property
    def total_hidden(self) -> int:
        return sum(self.hidden_sizes)

    def forward(self, values) -> np.ndarray:
        """Exact forward pass; returns the raw output vector."""
        v = np.asarray(values, dtype=float)
        if v.shape != (self.n_features,):
            raise InstanceError(
                "instance has %d values, model expects %d" % (v.size, self.n_features)
            )
        for layer in self.layers:
            v = layer.weights @ v + layer.bias
            if layer.activation == RELU:
                v = np.maximum(v, 0.0)
        return v


@dataclass(frozen=True)
class Instance:
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))


@dataclass(frozen=True)
class Prediction:
    class_index: int
    outputs: np.ndarray


def predict(net: NeuralNetwork, inst: Instance) -> Prediction:
    """Forward pass plus argmax; ties go to the lowest class index."""
    v = np.asarray(inst.values, dtype=float)
    if v.shape != (net.n_features,):
        raise InstanceError(
            "instance has %d values, model expects %d" % (v.size, net.n_features)
        )
    if not net.box.contains(v):
        for i, (val, lo, hi) in enumerate(zip(v, net.box.lb, net.box.ub)):
            if val < lo or val > hi:
                raise InstanceError(
                    "feature %r = %r outside its domain [%r, %r]"
                    % (net.feature_names[i], float(val), float(lo), float(hi))
                )
    out = net.forward(v)
    return Prediction(class_index=int(np.argmax(out)), outputs=_readonly(out))


def is_strict_argmax(outputs, j: int) -> bool:
    """True when output ``j`` strictly exceeds every other output."""
    out = np.asarray(outputs, dtype=float)
    return all(out[i] < out[j] for i in range(out.size) if i != j)


# -- model file handling ------------------------------------------------------


def _require(cond, msg):
    if not cond:
        raise ModelError(msg)


def load_model(data) -> NeuralNetwork:
    """Parse and validate model JSON given as bytes or str."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelError("could not parse model JSON: %s" % exc) from exc
    _require(isinstance(raw, dict), "model file must contain a JSON object")
    for key in ("features", "classes", "layers"):
        _require(key in raw, "model file is missing %r" % key)
    feats = raw["features"]
    _require(isinstance(feats, list) and feats, "features must be a non-empty list")
    names, lbs, ubs = [], [], []
    for i, f in enumerate(feats):
        _require(isinstance(f, dict) and "name" in f and "lb" in f and "ub" in f,
                 "feature %d must carry name/lb/ub" % i)
        _require(isinstance(f["lb"], (int, float)) and isinstance(f["ub"], (int, float)),
                 "feature %r bounds must be numbers" % f.get("name"))
        _require(math.isfinite(f["lb"]) and math.isfinite(f["ub"]),
                 "feature %r bounds must be finite" % f["name"])
        _require(f["lb"] <= f["ub"], "feature %r has lb > ub" % f["name"])
        names.append(str(f["name"]))
        lbs.append(float(f["lb"]))
        ubs.append(float(f["ub"]))
    classes = raw["classes"]
    _require(isinstance(classes, list) and len(classes) >= 2,
             "classes must list at least two labels")
    layers = []
    raw_layers = raw["layers"]
    _require(isinstance(raw_layers, list) and len(raw_layers) >= 2,
             "model must have at least one hidden layer and one output layer")
    for idx, rl in enumerate(raw_layers, start=1):
        _require(isinstance(rl, dict) and "weights" in rl and "bias" in rl
                 and "activation" in rl, "layer %d must carry weights/bias/activation" % idx)
        w = rl["weights"]
        _require(isinstance(w, list) and w and all(isinstance(r, list) for r in w),
                 "layer %d weights must be a list of rows" % idx)
        widths = {len(r) for r in w}
        _require(len(widths) == 1 and widths != {0},
                 "layer %d weight rows have inconsistent lengths" % idx)
        try:
            layers.append(Layer(weights=w, bias=rl["bias"], activation=rl["activation"]))
        except ModelError as exc:
            raise ModelError("layer %d: %s" % (idx, exc)) from exc
    return NeuralNetwork(
        name=str(raw.get("name", "model")),
        feature_names=names,
        class_names=[str(c) for c in classes],
        layers=layers,
        box=Box(lb=np.array(lbs), ub=np.array(ubs)),
    )


def serialize_model(net: NeuralNetwork) -> str:
    """Canonical JSON rendering; loading then serializing is idempotent."""
    obj = {
        "name": net.name,
        "features": [
            {"name": n, "lb": float(lo), "ub": float(hi)}
            for n, lo, hi in zip(net.feature_names, net.box.lb, net.box.ub)
        ],
        "classes": list(net.class_names),
        "layers": [
            {
                "weights": [[float(w) for w in row] for row in layer.weights],
                "bias": [float(b) for b in layer.bias],
                "activation": layer.activation,
            }
            for layer in net.layers
        ],
    }
    return json.dumps(obj, indent=2) + "\n"


def model_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# -- instance file handling ---------------------------------------------------


def _check_in_box(net, values, where):
    for i, (val, lo, hi) in enumerate(zip(values, net.box.lb, net.box.ub)):
        if val < lo or val > hi:
            raise InstanceError(
                "%s: feature %r = %r outside [%r, %r]"
                % (where, net.feature_names[i], float(val), float(lo), float(hi))
            )


def load_instances(data, net: NeuralNetwork) -> list:
    """Parse instances from CSV or JSON content (bytes or str)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    stripped = data.lstrip()
    if stripped.startswith("[") or stripped.startswith("{"):
        return _instances_from_json(stripped, net)
    return _instances_from_csv(data, net)


def _instances_from_json(text, net) -> list:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError("could not parse instance JSON: %s" % exc) from exc
    if isinstance(raw, dict):
        raw = [raw]
    if not isinstance(raw, list):
        raise InstanceError("instance JSON must be an array of objects")
    out = []
    for idx, row in enumerate(raw):
        if not isinstance(row, dict):
            raise InstanceError("instance %d is not an object" % idx)
        missing = [n for n in net.feature_names if n not in row]
        if missing:
            raise InstanceError("instance %d is missing features %s" % (idx, missing))
        try:
            values = [float(row[n]) for n in net.feature_names]
        except (TypeError, ValueError) as exc:
            raise InstanceError("instance %d has a non-numeric value" % idx) from exc
        _check_in_box(net, values, "instance %d" % idx)
        out.append(Instance(values=np.array(values)))
    return out


def _instances_from_csv(text, net) -> list:
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and any(cell.strip() for cell in r)]
    if not rows:
        return []
    header = [h.strip() for h in rows[0]]
    if header != list(net.feature_names):
        raise InstanceError(
            "CSV header %s does not match feature names %s"
            % (header, list(net.feature_names))
        )
    out = []
    for idx, row in enumerate(rows[1:]):
        if len(row) != net.n_features:
            raise InstanceError(
                "row %d has %d values, expected %d" % (idx, len(row), net.n_features)
            )
        try:
            values = [float(cell) for cell in row]
        except ValueError as exc:
            raise InstanceError("row %d has a non-numeric value" % idx) from exc
        _check_in_box(net, values, "row %d" % idx)
        out.append(Instance(values=np.array(values)))
    return out
