"""Numerical kernels: LSTM, BiLSTM encoder, pooling, MLP head, backprop.

Everything is explicit float64 numpy with hand-written reverse-mode
gradients; no autodiff framework.  Three sequence classifiers share one MLP
head: the BiLSTM-with-max-pooling model, a concatenation MLP baseline, and a
final-hidden-state simple RNN baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadRate,
    DimensionMismatch,
    EmptySequence,
    NonFiniteGradient,
    NonFiniteInput,
)

GATES = ("i", "f", "o", "u")
LABEL_COUNT = 2

PROB_CLAMP = 1e-12


def sigmoid(x):
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(logits):
    e = np.exp(logits - np.max(logits))
    return e / e.sum()


ACTIVATIONS = {
    "sigmoid": (sigmoid, lambda y: y * (1.0 - y)),
    "tanh": (np.tanh, lambda y: 1.0 - y * y),
    "relu": (lambda x: np.maximum(0.0, x), lambda y: (y > 0).astype(np.float64)),
}


def cross_entropy(prob_pos: float, label: int) -> float:
    """Binary cross entropy of the positive-class probability."""
    a = min(max(float(prob_pos), PROB_CLAMP), 1.0 - PROB_CLAMP)
    if label not in (0, 1):
        raise DimensionMismatch(f"label must be 0 or 1, got {label}")
    return -(label * np.log(a) + (1 - label) * np.log(1.0 - a))


def dropout_mask(dim: int, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout mask: zeros with probability rate, else 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise BadRate(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return np.ones(dim, dtype=np.float64)
    keep = rng.random(dim) >= rate
    return keep.astype(np.float64) / (1.0 - rate)


def glorot(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


# ---------------------------------------------------------------------------
# LSTM


@dataclass
class LstmParams:
    """Per-gate weights: w_in (units x input_dim), w_rec (units x units), b."""

    w_in: dict[str, np.ndarray]
    w_rec: dict[str, np.ndarray]
    bias: dict[str, np.ndarray]

    @property
    def units(self) -> int:
        return self.bias["i"].shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_in["i"].shape[1]


def init_lstm_params(rng: np.random.Generator, units: int, input_dim: int) -> LstmParams:
    # forget-gate bias starts at 1 so early steps keep their cell state
    w_in = {g: glorot(rng, units, input_dim) for g in GATES}
    w_rec = {g: glorot(rng, units, units) for g in GATES}
    bias = {g: np.zeros(units) for g in GATES}
    bias["f"] = np.ones(units)
    return LstmParams(w_in=w_in, w_rec=w_rec, bias=bias)


def lstm_cell(p: LstmParams, x, h_prev, c_prev):
    """One LSTM step; returns (h, c)."""
    h, c, _ = _lstm_step(p, np.asarray(x, dtype=np.float64), h_prev, c_prev)
    return h, c


def _lstm_step(p, x, h_prev, c_prev):
    if x.shape != (p.input_dim,):
        raise DimensionMismatch(f"input shape {x.shape}, expected ({p.input_dim},)")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(h_prev))):
        raise NonFiniteInput("lstm_cell received non-finite input")
    pre = {
        g: p.w_in[g] @ x + p.w_rec[g] @ h_prev + p.bias[g] for g in GATES
    }
    i, f, o = sigmoid(pre["i"]), sigmoid(pre["f"]), sigmoid(pre["o"])
    u = np.tanh(pre["u"])
    c = i * u + f * c_prev
    h = o * np.tanh(c)
    return h, c, {"i": i, "f": f, "o": o, "u": u, "c": c, "h": h}


def _lstm_run(p: LstmParams, xs: np.ndarray, reverse: bool):
    """Run over the sequence; returns (aligned H matrix, step cache list)."""
    n = xs.shape[0]
    order = range(n - 1, -1, -1) if reverse else range(n)
    h = np.zeros(p.units)
    c = np.zeros(p.units)
    steps = []
    states = np.zeros((n, p.units))
    for t in order:
        h_prev, c_prev = h, c
        h, c, gates = _lstm_step(p, xs[t], h_prev, c_prev)
        steps.append({"t": t, "h_prev": h_prev, "c_prev": c_prev, **gates})
        states[t] = h
    return states, steps


def _lstm_backprop(p: LstmParams, xs, steps, d_states):
    """Reverse-mode through a cached `_lstm_run`.

    d_states is the (n x units) gradient arriving at each aligned hidden
    state.  Returns (grads dict keyed like the params, d_xs).
    """
    grads = {
        "w_in": {g: np.zeros_like(p.w_in[g]) for g in GATES},
        "w_rec": {g: np.zeros_like(p.w_rec[g]) for g in GATES},
        "bias": {g: np.zeros_like(p.bias[g]) for g in GATES},
    }
    d_xs = np.zeros_like(xs)
    dh_carry = np.zeros(p.units)
    dc_carry = np.zeros(p.units)
    for step in reversed(steps):
        t = step["t"]
        tanh_c = np.tanh(step["c"])
        dh = d_states[t] + dh_carry
        dc = dc_carry + dh * step["o"] * (1.0 - tanh_c * tanh_c)
        d_pre = {
            "o": dh * tanh_c * step["o"] * (1.0 - step["o"]),
            "i": dc * step["u"] * step["i"] * (1.0 - step["i"]),
            "u": dc * step["i"] * (1.0 - step["u"] * step["u"]),
            "f": dc * step["c_prev"] * step["f"] * (1.0 - step["f"]),
        }
        dc_carry = dc * step["f"]
        dh_carry = np.zeros(p.units)
        for g in GATES:
            grads["w_in"][g] += np.outer(d_pre[g], xs[t])
            grads["w_rec"][g] += np.outer(d_pre[g], step["h_prev"])
            grads["bias"][g] += d_pre[g]
            dh_carry += p.w_rec[g].T @ d_pre[g]
            d_xs[t] += p.w_in[g].T @ d_pre[g]
    return grads, d_xs


# ---------------------------------------------------------------------------
# MLP head (shared by all three models)


@dataclass
class MlpHead:
    """Hidden stack then a linear label layer feeding softmax."""

    hidden: list[tuple[np.ndarray, np.ndarray]]  # [(W: H x in, b: H), ...]
    w_out: np.ndarray  # LABEL_COUNT x H
    activation: str = "sigmoid"


def init_mlp_head(
    rng: np.random.Generator, input_dim: int, hidden_size: int, depth: int, activation: str
) -> MlpHead:
    if activation not in ACTIVATIONS:
        raise DimensionMismatch(f"unknown activation {activation!r}")
    hidden = []
    fan_in = input_dim
    for _ in range(depth):
        hidden.append((glorot(rng, hidden_size, fan_in), np.zeros(hidden_size)))
        fan_in = hidden_size
    return MlpHead(hidden=hidden, w_out=glorot(rng, LABEL_COUNT, fan_in), activation=activation)


def _head_forward(head: MlpHead, s: np.ndarray, mask_s, mask_m):
    act, _ = ACTIVATIONS[head.activation]
    s_drop = s if mask_s is None else s * mask_s
    layer_inputs = []
    hidden_acts = []
    x = s_drop
    for w, b in head.hidden:
        layer_inputs.append(x)
        x = act(w @ x + b)
        hidden_acts.append(x)
    m = x
    m_drop = m if mask_m is None else m * mask_m
    logits = head.w_out @ m_drop
    probs = softmax(logits)
    return {
        "s": s,
        "s_drop": s_drop,
        "layer_inputs": layer_inputs,
        "hidden_acts": hidden_acts,
        "m": m,
        "m_drop": m_drop,
        "logits": logits,
        "probs": probs,
        "mask_s": mask_s,
        "mask_m": mask_m,
    }


def _head_backward(head: MlpHead, cache, label: int):
    """Returns (grads for hidden/out weights, dS w.r.t. the pooled input)."""
    _, act_deriv = ACTIVATIONS[head.activation]
    probs = cache["probs"]
    d_logits = probs.copy()
    d_logits[label] -= 1.0
    g_w_out = np.outer(d_logits, cache["m_drop"])
    d_m = head.w_out.T @ d_logits
    if cache["mask_m"] is not None:
        d_m = d_m * cache["mask_m"]
    g_hidden = []
    for idx in range(len(head.hidden) - 1, -1, -1):
        w, _ = head.hidden[idx]
        out = cache["hidden_acts"][idx]
        d_pre = d_m * act_deriv(out)
        g_w = np.outer(d_pre, cache["layer_inputs"][idx])
        g_b = d_pre
        g_hidden.append((g_w, g_b))
        d_m = w.T @ d_pre
    g_hidden.reverse()
    d_s = d_m
    if cache["mask_s"] is not None:
        d_s = d_s * cache["mask_s"]
    return {"hidden": g_hidden, "w_out": g_w_out}, d_s


# ---------------------------------------------------------------------------
# Spec-level operations


def max_pool(states) -> np.ndarray:
    """Coordinate-wise maximum over the position axis."""
    arr = np.asarray(states, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise EmptySequence("max_pool needs a non-empty list of state vectors")
    return arr.max(axis=0)


def bilstm_forward(model: "BiLstmModel", seq) -> list[np.ndarray]:
    """Aligned [forward ; backward] hidden states for each position."""
    xs = _as_sequence(seq)
    fwd, _ = _lstm_run(model.forward_lstm, xs, reverse=False)
    bwd, _ = _lstm_run(model.backward_lstm, xs, reverse=True)
    return [np.concatenate([fwd[t], bwd[t]]) for t in range(xs.shape[0])]


def mlp_head(model, s):
    """(hidden output M, logits T, probabilities) for a pooled vector S."""
    cache = _head_forward(model.head, np.asarray(s, dtype=np.float64), None, None)
    return cache["m"], cache["logits"], cache["probs"]


def backward(model, seq, label: int) -> dict[str, np.ndarray]:
    """Gradients of the cross-entropy loss for one instance (no dropout)."""
    cache = model.forward(_as_sequence(seq), masks=None)
    return model.backward(cache, label)


def _as_sequence(seq) -> np.ndarray:
    xs = np.asarray(seq, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[None, :]
    if xs.ndim != 2 or xs.shape[0] == 0:
        raise EmptySequence("sequence must be a non-empty list of vectors")
    if not np.all(np.isfinite(xs)):
        raise NonFiniteInput("sequence contains non-finite values")
    return xs


def _check_grads_finite(grads):
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite gradient in {name}")
    return grads


# ---------------------------------------------------------------------------
# Models


class BiLstmModel:
    """BiLSTM over the SDP sequence, max-pooled, classified by the MLP head."""

    kind = "bilstm"

    def __init__(self, forward_lstm: LstmParams, backward_lstm: LstmParams, head: MlpHead):
        self.forward_lstm = forward_lstm
        self.backward_lstm = backward_lstm
        self.head = head

    @classmethod
    def init(cls, rng, input_dim, units=64, hidden_size=30, depth=1, activation="sigmoid"):
        return cls(
            forward_lstm=init_lstm_params(rng, units, input_dim),
            backward_lstm=init_lstm_params(rng, units, input_dim),
            head=init_mlp_head(rng, 2 * units, hidden_size, depth, activation),
        )

    @property
    def units(self) -> int:
        return self.forward_lstm.units

    @property
    def input_dim(self) -> int:
        return self.forward_lstm.input_dim

    def forward(self, xs, masks=None):
        xs = _as_sequence(xs)
        fwd_states, fwd_steps = _lstm_run(self.forward_lstm, xs, reverse=False)
        bwd_states, bwd_steps = _lstm_run(self.backward_lstm, xs, reverse=True)
        z = np.concatenate([fwd_states, bwd_states], axis=1)
        pooled = z.max(axis=0)
        argmax = z.argmax(axis=0)  # ties resolve to the lowest position
        mask_s = masks["s"] if masks else None
        mask_m = masks["m"] if masks else None
        cache = _head_forward(self.head, pooled, mask_s, mask_m)
        cache.update(
            xs=xs, fwd_steps=fwd_steps, bwd_steps=bwd_steps, z=z, argmax=argmax
        )
        return cache

    def backward(self, cache, label):
        head_grads, d_s = _head_backward(self.head, cache, label)
        n = cache["xs"].shape[0]
        units = self.units
        d_z = np.zeros((n, 2 * units))
        cols = np.arange(2 * units)
        d_z[cache["argmax"], cols] = d_s
        fwd_grads, d_xs_f = _lstm_backprop(
            self.forward_lstm, cache["xs"], cache["fwd_steps"], d_z[:, :units]
        )
        bwd_grads, d_xs_b = _lstm_backprop(
            self.backward_lstm, cache["xs"], cache["bwd_steps"], d_z[:, units:]
        )
        grads = {}
        _pack_lstm(grads, "fwd", fwd_grads)
        _pack_lstm(grads, "bwd", bwd_grads)
        _pack_head(grads, head_grads)
        grads["__inputs__"] = d_xs_f + d_xs_b
        return _check_grads_finite(grads)

    def tensors(self) -> dict[str, np.ndarray]:
        out = {}
        for prefix, p in (("fwd", self.forward_lstm), ("bwd", self.backward_lstm)):
            for g in GATES:
                out[f"{prefix}.w_in.{g}"] = p.w_in[g]
                out[f"{prefix}.w_rec.{g}"] = p.w_rec[g]
                out[f"{prefix}.b.{g}"] = p.bias[g]
        _head_tensors(out, self.head)
        return out


class RnnBaselineModel:
    """Plain sigmoid RNN; the final hidden state feeds the MLP head."""

    kind = "rnn"

    def __init__(self, w_in, w_rec, bias, head: MlpHead):
        self.w_in = w_in
        self.w_rec = w_rec
        self.bias = bias
        self.head = head

    @classmethod
    def init(cls, rng, input_dim, units=64, hidden_size=30, depth=1, activation="sigmoid"):
        return cls(
            w_in=glorot(rng, units, input_dim),
            w_rec=glorot(rng, units, units),
            bias=np.zeros(units),
            head=init_mlp_head(rng, units, hidden_size, depth, activation),
        )

    @property
    def units(self) -> int:
        return self.bias.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_in.shape[1]

    def forward(self, xs, masks=None):
        xs = _as_sequence(xs)
        h = np.zeros(self.units)
        hs = []
        h_prevs = []
        for t in range(xs.shape[0]):
            h_prevs.append(h)
            h = sigmoid(self.w_in @ xs[t] + self.w_rec @ h + self.bias)
            hs.append(h)
        mask_s = masks["s"] if masks else None
        mask_m = masks["m"] if masks else None
        cache = _head_forward(self.head, hs[-1], mask_s, mask_m)
        cache.update(xs=xs, hs=hs, h_prevs=h_prevs)
        return cache

    def backward(self, cache, label):
        head_grads, d_h = _head_backward(self.head, cache, label)
        xs = cache["xs"]
        g_w_in = np.zeros_like(self.w_in)
        g_w_rec = np.zeros_like(self.w_rec)
        g_bias = np.zeros_like(self.bias)
        d_xs = np.zeros_like(xs)
        for t in range(xs.shape[0] - 1, -1, -1):
            h = cache["hs"][t]
            d_pre = d_h * h * (1.0 - h)
            g_w_in += np.outer(d_pre, xs[t])
            g_w_rec += np.outer(d_pre, cache["h_prevs"][t])
            g_bias += d_pre
            d_xs[t] = self.w_in.T @ d_pre
            d_h = self.w_rec.T @ d_pre
        grads = {"rnn.w_in": g_w_in, "rnn.w_rec": g_w_rec, "rnn.b": g_bias}
        _pack_head(grads, head_grads)
        grads["__inputs__"] = d_xs
        return _check_grads_finite(grads)

    def tensors(self):
        out = {"rnn.w_in": self.w_in, "rnn.w_rec": self.w_rec, "rnn.b": self.bias}
        _head_tensors(out, self.head)
        return out


class MlpBaselineModel:
    """Fixed-length concatenation of token vectors fed straight to the head."""

    kind = "mlp"

    def __init__(self, pad_len: int, token_dim: int, head: MlpHead):
        self.pad_len = pad_len
        self.token_dim = token_dim
        self.head = head

    @classmethod
    def init(cls, rng, input_dim, pad_len=20, hidden_size=30, depth=1, activation="sigmoid"):
        head = init_mlp_head(rng, pad_len * input_dim, hidden_size, depth, activation)
        return cls(pad_len=pad_len, token_dim=input_dim, head=head)

    @property
    def input_dim(self) -> int:
        return self.token_dim

    def flatten(self, xs) -> np.ndarray:
        """Pad with zero vectors / truncate to pad_len, then concatenate."""
        xs = _as_sequence(xs)
        if xs.shape[1] != self.token_dim:
            raise DimensionMismatch(
                f"token dim {xs.shape[1]}, model expects {self.token_dim}"
            )
        flat = np.zeros(self.pad_len * self.token_dim)
        n = min(xs.shape[0], self.pad_len)
        flat[: n * self.token_dim] = xs[:n].ravel()
        return flat

    def forward(self, xs, masks=None):
        xs = _as_sequence(xs)
        mask_s = masks["s"] if masks else None
        mask_m = masks["m"] if masks else None
        cache = _head_forward(self.head, self.flatten(xs), mask_s, mask_m)
        cache.update(xs=xs)
        return cache

    def backward(self, cache, label):
        head_grads, d_flat = _head_backward(self.head, cache, label)
        grads = {}
        _pack_head(grads, head_grads)
        xs = cache["xs"]
        d_xs = np.zeros_like(xs)
        n = min(xs.shape[0], self.pad_len)
        d_xs[:n] = d_flat[: n * self.token_dim].reshape(n, self.token_dim)
        grads["__inputs__"] = d_xs
        return _check_grads_finite(grads)

    def tensors(self):
        out = {}
        _head_tensors(out, self.head)
        return out


def _head_tensors(out, head: MlpHead):
    for idx, (w, b) in enumerate(head.hidden):
        out[f"head.w{idx}"] = w
        out[f"head.b{idx}"] = b
    out["head.w_out"] = head.w_out


def _pack_head(grads, head_grads):
    for idx, (g_w, g_b) in enumerate(head_grads["hidden"]):
        grads[f"head.w{idx}"] = g_w
        grads[f"head.b{idx}"] = g_b
    grads["head.w_out"] = head_grads["w_out"]


def _pack_lstm(grads, prefix, lstm_grads):
    for g in GATES:
        grads[f"{prefix}.w_in.{g}"] = lstm_grads["w_in"][g]
        grads[f"{prefix}.w_rec.{g}"] = lstm_grads["w_rec"][g]
        grads[f"{prefix}.b.{g}"] = lstm_grads["bias"][g]


MODEL_KINDS = {
    "bilstm": BiLstmModel,
    "mlp": MlpBaselineModel,
    "rnn": RnnBaselineModel,
}
