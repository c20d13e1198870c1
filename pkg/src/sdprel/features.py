"""Sparse PoS/position codes and their dense autoencoder compression.

PoS tags collapse to 8 coarse classes (one-hot coded); relative distances
become thermometer codes where distance m sets the m lowest-order bits, shown
with the lowest-order bit rightmost.  Both code families are squeezed through
a single-layer sigmoid autoencoder trained by Adadelta.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import DimensionMismatch, ParseError
from .optim import AdadeltaState, adadelta_step

POS_CLASSES = (
    "noun",
    "verb",
    "adjective",
    "adverb",
    "preposition",
    "conjunction",
    "determiner",
    "other",
)
POS_DIM = 8
OTHER_CLASS = 7

POSITION_DIM = 10

_pos_table_cache: dict[str, int] | None = None


def load_pos_table(path=None) -> dict[str, int]:
    """Read a tag<TAB>class_index table; defaults to the bundled one."""
    if path is None:
        text = (
            resources.files("sdprel").joinpath("data/pos_classes.tsv").read_text("utf-8")
        )
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    table: dict[str, int] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(line_no, f"expected tag<TAB>class, got {line!r}")
        tag, idx_s = parts
        try:
            idx = int(idx_s)
        except ValueError:
            raise ParseError(line_no, f"non-integer class index {idx_s!r}") from None
        if not 0 <= idx < POS_DIM:
            raise ParseError(line_no, f"class index {idx} outside 0..{POS_DIM - 1}")
        table[tag] = idx
    return table


def coarse_pos(tag: str, table: dict[str, int] | None = None) -> int:
    """Coarse class of a PoS tag; unknown tags fall into 'other'."""
    global _pos_table_cache
    if table is None:
        if _pos_table_cache is None:
            _pos_table_cache = load_pos_table()
        table = _pos_table_cache
    return table.get(tag, OTHER_CLASS)


def encode_pos_onehot(class_index: int) -> np.ndarray:
    if not 0 <= class_index < POS_DIM:
        raise DimensionMismatch(f"class index {class_index} outside 0..{POS_DIM - 1}")
    bits = np.zeros(POS_DIM, dtype=np.float64)
    bits[class_index] = 1.0
    return bits


def encode_position(rel_distance: int, dim: int = POSITION_DIM) -> np.ndarray:
    """Thermometer code of |rel_distance|, capped at dim.

    Index 0 is the highest-order (leftmost) bit, so ``encode_position(6)``
    renders as 0000111111.  Sign is discarded.
    """
    m = min(abs(int(rel_distance)), dim)
    bits = np.zeros(dim, dtype=np.float64)
    if m:
        bits[dim - m :] = 1.0
    return bits


def code_string(bits: np.ndarray) -> str:
    """Render a binary code the way the distance tables print it."""
    return "".join("1" if b else "0" for b in bits)


@dataclass
class Autoencoder:
    """Single sigmoid encoder/decoder pair with hidden size = input size."""

    encoder_w: np.ndarray
    encoder_b: np.ndarray
    decoder_w: np.ndarray
    decoder_b: np.ndarray
    training_losses: tuple[float, ...] = field(default=(), repr=False)

    @property
    def dim(self) -> int:
        return self.encoder_b.shape[0]


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def reconstruct(ae: Autoencoder, bits) -> np.ndarray:
    """Full encode/decode pass."""
    x = np.asarray(bits, dtype=np.float64)
    if x.shape != (ae.dim,):
        raise DimensionMismatch(f"expected shape ({ae.dim},), got {x.shape}")
    z = _sigmoid(ae.encoder_w @ x + ae.encoder_b)
    return _sigmoid(ae.decoder_w @ z + ae.decoder_b)


def reconstruction_loss(ae: Autoencoder, samples: np.ndarray) -> float:
    """Mean over samples of the squared reconstruction error."""
    x = np.asarray(samples, dtype=np.float64)
    z = _sigmoid(x @ ae.encoder_w.T + ae.encoder_b)
    xhat = _sigmoid(z @ ae.decoder_w.T + ae.decoder_b)
    return float(np.mean(np.sum((x - xhat) ** 2, axis=1)))


def train_autoencoder(
    samples, d: int, epochs: int = 1500, seed: int = 0
) -> Autoencoder:
    """Fit the autoencoder by full-batch Adadelta on squared error.

    Deterministic for a fixed seed; the per-epoch loss curve is kept on the
    returned model.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != d:
        raise DimensionMismatch(f"samples must be (n, {d}), got {x.shape}")
    if x.shape[0] == 0:
        raise DimensionMismatch("samples must be non-empty")

    rng = np.random.Generator(np.random.PCG64(seed))
    limit = np.sqrt(6.0 / (d + d))
    params = {
        "enc_w": rng.uniform(-limit, limit, size=(d, d)),
        "enc_b": np.zeros(d),
        "dec_w": rng.uniform(-limit, limit, size=(d, d)),
        "dec_b": np.zeros(d),
    }
    state = AdadeltaState(rho=0.95, eps=1e-6)
    n = x.shape[0]
    losses = []
    for _ in range(epochs):
        z = _sigmoid(x @ params["enc_w"].T + params["enc_b"])
        xhat = _sigmoid(z @ params["dec_w"].T + params["dec_b"])
        diff = xhat - x
        losses.append(float(np.mean(np.sum(diff**2, axis=1))))

        d_xhat = 2.0 * diff / n
        d_pre_dec = d_xhat * xhat * (1.0 - xhat)
        d_z = d_pre_dec @ params["dec_w"]
        d_pre_enc = d_z * z * (1.0 - z)
        grads = {
            "enc_w": d_pre_enc.T @ x,
            "enc_b": d_pre_enc.sum(axis=0),
            "dec_w": d_pre_dec.T @ z,
            "dec_b": d_pre_dec.sum(axis=0),
        }
        adadelta_step(state, params, grads)
    return Autoencoder(
        encoder_w=params["enc_w"],
        encoder_b=params["enc_b"],
        decoder_w=params["dec_w"],
        decoder_b=params["dec_b"],
        training_losses=tuple(losses),
    )


def encode_dense(ae: Autoencoder, bits) -> np.ndarray:
    """Encoder half only: sigmoid(W_enc . bits + b_enc), components in (0,1)."""
    x = np.asarray(bits, dtype=np.float64)
    if x.shape != (ae.dim,):
        raise DimensionMismatch(f"expected shape ({ae.dim},), got {x.shape}")
    return _sigmoid(ae.encoder_w @ x + ae.encoder_b)
