"""Hybrid model: angle encoder -> PQC -> per-qubit <Z> -> dense head -> softmax.

Gradients are fully analytic: closed-form softmax/cross-entropy backprop for
the dense head, and the parameter-shift rule for the circuit angles (two-term
with shift pi/2 for plain rotations, the four-term rule for controlled
rotations).  Training uses Adam with the shipped defaults (lr 0.2, beta1 0.9,
beta2 0.999, eps 1e-7) and is bit-deterministic for a fixed seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, Op, Param, apply_ops, bind, build_template, z_expectations
from .encoding import (ONE_PER_QUBIT, EncodingScheme, Scaler, apply_scaler,
                       fit_scaler)
from .gates import GateKind

N_CLASSES = 3
_PROB_FLOOR = 1e-12

# four-term parameter-shift coefficients for controlled rotations
_D1 = (math.sqrt(2) + 1) / (4 * math.sqrt(2))
_D2 = (math.sqrt(2) - 1) / (4 * math.sqrt(2))
_CONTROLLED = frozenset({GateKind.CRX, GateKind.CRY, GateKind.CRZ})


@dataclass
class TrainConfig:
    epochs: int = 10
    learning_rate: float = 0.2
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-7
    batch_size: int | None = None  # None = full batch
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("beta1/beta2 must lie in (0, 1)")


@dataclass
class HybridModel:
    scheme: EncodingScheme
    pqc: Circuit
    theta: np.ndarray
    W: np.ndarray                  # (3, n_qubits)
    b: np.ndarray                  # (3,)
    scaler: Scaler | None = None
    template_id: str | None = None
    layers: int | None = None
    seed: int | None = None
    history: list = field(default_factory=list)
    fine_tuned: bool = False

    def __post_init__(self):
        self.theta = np.asarray(self.theta, float)
        self.W = np.asarray(self.W, float)
        self.b = np.asarray(self.b, float)
        if self.theta.size != self.pqc.n_params:
            raise ValueError(
                f"theta has {self.theta.size} entries, pqc expects {self.pqc.n_params}")
        if self.W.shape != (N_CLASSES, self.pqc.n_qubits):
            raise ValueError(f"W must be {N_CLASSES}x{self.pqc.n_qubits}")
        if self.b.shape != (N_CLASSES,):
            raise ValueError(f"b must have {N_CLASSES} entries")

    @property
    def n_qubits(self) -> int:
        return self.pqc.n_qubits


def init_model(template_id: str, layers: int, scheme: EncodingScheme,
               seed: int = 0, scaler: Scaler | None = None) -> HybridModel:
    pqc = build_template(template_id, scheme.n_qubits, layers)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-math.pi, math.pi, pqc.n_params)
    w = rng.uniform(-0.1, 0.1, (N_CLASSES, scheme.n_qubits))
    b = rng.uniform(-0.1, 0.1, N_CLASSES)
    return HybridModel(scheme, pqc, theta, w, b, scaler=scaler,
                       template_id=template_id, layers=layers, seed=seed)


# ---------------------------------------------------------------------------
# Forward pass (batched internally)

def encode_states(features, scheme: EncodingScheme) -> np.ndarray:
    """Vectorized encoder: (B, capacity) pre-scaled features -> (B, 2^n) states."""
    x = np.atleast_2d(np.asarray(features, float))
    if x.shape[1] != scheme.capacity:
        raise ValueError(f"expected {scheme.capacity} features, got {x.shape[1]}")
    if np.any(np.abs(x) > math.pi + 1e-9):
        raise ValueError("features must be scaled into [-pi, pi]")
    bsz = x.shape[0]
    inv_sqrt2 = 1 / math.sqrt(2)
    per_qubit = []
    for q in range(scheme.n_qubits):
        if scheme.mode == ONE_PER_QUBIT:
            f = x[:, q]
            v = np.stack([np.exp(-1j * f / 2), np.exp(1j * f / 2)], axis=1) * inv_sqrt2
        else:
            f, g = x[:, 2 * q], x[:, 2 * q + 1]
            v = np.stack([np.exp(-1j * f / 2), np.exp(1j * f / 2)], axis=1) * inv_sqrt2
            c, s = np.cos(g / 2), np.sin(g / 2)
            if scheme.second_axis is GateKind.RY:
                v = np.stack([c * v[:, 0] - s * v[:, 1],
                              s * v[:, 0] + c * v[:, 1]], axis=1)
            else:  # RX
                v = np.stack([c * v[:, 0] - 1j * s * v[:, 1],
                              -1j * s * v[:, 0] + c * v[:, 1]], axis=1)
        per_qubit.append(v)
    out = np.ones((bsz, 1), dtype=complex)
    for q in range(scheme.n_qubits - 1, -1, -1):
        out = np.einsum("bi,bj->bij", out, per_qubit[q]).reshape(bsz, -1)
    return out


def _run_pqc(states: np.ndarray, pqc_ops, n: int) -> np.ndarray:
    tensor = states.reshape((states.shape[0],) + (2,) * n)
    tensor = apply_ops(pqc_ops, tensor, n, batch_ndim=1)
    return tensor.reshape(states.shape[0], -1)


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward_batch(model: HybridModel, features_scaled):
    """(probs, logits, z) for a batch of pre-scaled feature rows."""
    states = encode_states(features_scaled, model.scheme)
    bound = bind(model.pqc, model.theta)
    out = _run_pqc(states, bound.ops, model.n_qubits)
    z = z_expectations(out, model.n_qubits)
    logits = z @ model.W.T + model.b
    return _softmax(logits), logits, z


def forward(model: HybridModel, features):
    """Single-sample forward pass; features must be pre-scaled."""
    probs, logits, z = forward_batch(model, np.atleast_2d(features))
    return probs[0], logits[0], z[0]


def _one_hot(labels) -> np.ndarray:
    labels = np.asarray(labels, int).ravel()
    y = np.zeros((labels.size, N_CLASSES))
    y[np.arange(labels.size), labels] = 1.0
    return y


def loss(model: HybridModel, features_scaled, labels) -> float:
    """Mean categorical cross-entropy over the batch."""
    probs, _, _ = forward_batch(model, features_scaled)
    y = _one_hot(labels)
    return float(-np.mean(np.sum(y * np.log(np.maximum(probs, _PROB_FLOOR)),
                                 axis=1)))


# ---------------------------------------------------------------------------
# Gradients

def _slot_op_indices(pqc: Circuit) -> list[int]:
    """Op index for each parameter slot (each slot used exactly once)."""
    where = {}
    for i, op in enumerate(pqc.ops):
        if isinstance(op.angle, Param):
            if op.angle.slot in where:
                raise ValueError(f"slot {op.angle.slot} used more than once")
            where[op.angle.slot] = i
    return [where[s] for s in range(pqc.n_params)]


def _z_with_shift(model, states, bound_ops, op_index, shift):
    op = bound_ops[op_index]
    shifted = list(bound_ops)
    shifted[op_index] = Op(op.kind, op.qubits, op.angle + shift)
    out = _run_pqc(states, shifted, model.n_qubits)
    return z_expectations(out, model.n_qubits)


def gradients(model: HybridModel, features_scaled, labels):
    """(dtheta, dW, db) of the mean cross-entropy over the batch."""
    x = np.atleast_2d(np.asarray(features_scaled, float))
    y = _one_hot(labels)
    bsz = x.shape[0]
    states = encode_states(x, model.scheme)
    bound = bind(model.pqc, model.theta)
    out = _run_pqc(states, bound.ops, model.n_qubits)
    z = z_expectations(out, model.n_qubits)
    probs = _softmax(z @ model.W.T + model.b)

    dlogits = (probs - y) / bsz
    dW = dlogits.T @ z
    db = dlogits.sum(axis=0)
    dz = dlogits @ model.W                     # (B, n_qubits)

    dtheta = np.zeros(model.pqc.n_params)
    if np.any(dz != 0.0):
        slot_ops = _slot_op_indices(model.pqc)
        half = math.pi / 2
        for j, op_index in enumerate(slot_ops):
            kind = bound.ops[op_index].kind
            zp = _z_with_shift(model, states, bound.ops, op_index, half)
            zm = _z_with_shift(model, states, bound.ops, op_index, -half)
            if kind in _CONTROLLED:
                zp3 = _z_with_shift(model, states, bound.ops, op_index, 3 * half)
                zm3 = _z_with_shift(model, states, bound.ops, op_index, -3 * half)
                dz_dt = _D1 * (zp - zm) - _D2 * (zp3 - zm3)
            else:
                dz_dt = 0.5 * (zp - zm)
            dtheta[j] = float(np.sum(dz * dz_dt))
    return dtheta, dW, db


# ---------------------------------------------------------------------------
# Training and evaluation

def accuracy(model: HybridModel, features_scaled, labels) -> float:
    probs, _, _ = forward_batch(model, features_scaled)
    pred = probs.argmax(axis=1)
    return float(np.mean(pred == np.asarray(labels, int).ravel()))


def evaluate(model: HybridModel, features, labels, backend: str = "ideal",
             profile=None) -> float:
    """Classification accuracy; features are raw (the model's scaler applies)."""
    if model.scaler is not None:
        features = apply_scaler(model.scaler, features)
    if backend == "ideal":
        return accuracy(model, features, labels)
    if backend == "noisy":
        from . import noisesim
        if profile is None:
            raise ValueError("noisy backend requires a device profile")
        return noisesim.evaluate_noisy(model, features, labels, profile,
                                       prescaled=True)
    raise ValueError(f"unknown backend {backend!r}")


def _epoch_metrics(model, xt, yt, xv, yv) -> dict:
    return {
        "train_loss": loss(model, xt, yt),
        "train_acc": accuracy(model, xt, yt),
        "val_loss": loss(model, xv, yv) if len(yv) else float("nan"),
        "val_acc": accuracy(model, xv, yv) if len(yv) else float("nan"),
    }


def train(model: HybridModel, dataset, config: TrainConfig):
    """Adam-train a copy of the model on a Dataset; returns (model, history).

    Epoch 0 of the history holds the untrained metrics, so resuming from a
    synthesized parameter seed starts exactly at the approximated model's
    numbers.
    """
    if len(dataset.train_idx) == 0:
        raise ValueError("empty training split")
    scaler = model.scaler or fit_scaler(dataset.train_features)
    xt = apply_scaler(scaler, dataset.train_features)
    yt = dataset.train_labels
    xv = apply_scaler(scaler, dataset.val_features)
    yv = dataset.val_labels

    model = HybridModel(model.scheme, model.pqc, model.theta.copy(),
                        model.W.copy(), model.b.copy(), scaler=scaler,
                        template_id=model.template_id, layers=model.layers,
                        seed=model.seed, fine_tuned=model.fine_tuned)
    n_theta = model.theta.size
    params = np.concatenate([model.theta, model.W.ravel(), model.b])
    m = np.zeros_like(params)
    v = np.zeros_like(params)
    rng = np.random.default_rng(config.seed)
    history = [{"epoch": 0, **_epoch_metrics(model, xt, yt, xv, yv)}]

    step = 0
    for epoch in range(1, config.epochs + 1):
        if config.batch_size is None:
            batches = [np.arange(len(yt))]
        else:
            order = rng.permutation(len(yt))
            batches = [order[i:i + config.batch_size]
                       for i in range(0, len(order), config.batch_size)]
        for batch in batches:
            dtheta, dW, db = gradients(model, xt[batch], yt[batch])
            grad = np.concatenate([dtheta, dW.ravel(), db])
            step += 1
            m = config.beta1 * m + (1 - config.beta1) * grad
            v = config.beta2 * v + (1 - config.beta2) * grad ** 2
            mhat = m / (1 - config.beta1 ** step)
            vhat = v / (1 - config.beta2 ** step)
            params = params - config.learning_rate * mhat / (np.sqrt(vhat)
                                                             + config.epsilon)
            model.theta = params[:n_theta]
            model.W = params[n_theta:n_theta + model.W.size].reshape(model.W.shape)
            model.b = params[n_theta + model.W.size:]
        history.append({"epoch": epoch, **_epoch_metrics(model, xt, yt, xv, yv)})

    model.history = history
    return model, history


# ---------------------------------------------------------------------------
# Checkpoints

def save_checkpoint(model: HybridModel, path) -> None:
    doc = {
        "template_id": model.template_id,
        "layers": model.layers,
        "n_qubits": model.n_qubits,
        "encoding_mode": model.scheme.mode,
        "second_axis": model.scheme.second_axis.value,
        "theta": model.theta.tolist(),
        "W": model.W.tolist(),
        "b": model.b.tolist(),
        "scaler": model.scaler.to_dict() if model.scaler else None,
        "seed": model.seed,
        "history": model.history,
        "fine_tuned": model.fine_tuned,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path) -> HybridModel:
    with open(path) as fh:
        doc = json.load(fh)
    scheme = EncodingScheme(doc["encoding_mode"], doc["n_qubits"],
                            GateKind(doc.get("second_axis", "RY")))
    pqc = build_template(doc["template_id"], doc["n_qubits"], doc["layers"])
    scaler = Scaler.from_dict(doc["scaler"]) if doc.get("scaler") else None
    return HybridModel(scheme, pqc, np.asarray(doc["theta"]),
                       np.asarray(doc["W"]), np.asarray(doc["b"]),
                       scaler=scaler, template_id=doc["template_id"],
                       layers=doc["layers"], seed=doc.get("seed"),
                       history=doc.get("history") or [],
                       fine_tuned=bool(doc.get("fine_tuned", False)))
