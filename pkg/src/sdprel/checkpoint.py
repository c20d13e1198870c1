"""Binary checkpoint format with bit-exact round trips.

Layout: magic ``SDPL`` | version u16 LE | meta length u64 LE | canonical
JSON metadata | raw float64 LE array payloads in the order the metadata
lists them | 8-byte blake2b checksum of everything before it.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from .errors import CorruptChecksum, FormatError, VersionMismatch
from .features import Autoencoder
from .pipeline import Checkpoint, TrainConfig

MAGIC = b"SDPL"
FORMAT_VERSION = 1

_AE_FIELDS = ("encoder_w", "encoder_b", "decoder_w", "decoder_b")


def _collect_arrays(ck: Checkpoint) -> dict[tuple[str, str], np.ndarray]:
    arrays: dict[tuple[str, str], np.ndarray] = {}
    for name, arr in ck.params.items():
        arrays[("param", name)] = arr
    for section, ae in (("pos_ae", ck.pos_ae), ("position_ae", ck.position_ae)):
        if ae is None:
            continue
        for field_name in _AE_FIELDS:
            arrays[(section, field_name)] = getattr(ae, field_name)
    for token, vec in ck.token_vectors.items():
        arrays[("tok", token)] = vec
    return arrays


def checkpoint_bytes(ck: Checkpoint, version: int = FORMAT_VERSION) -> bytes:
    arrays = _collect_arrays(ck)
    index = sorted(arrays)
    meta = {
        "config": ck.config.to_dict(),
        "model_kind": ck.model_kind,
        "model_meta": ck.model_meta,
        "oov_seed": ck.oov_seed,
        "pos_table": ck.pos_table,
        "arrays": [[sec, name, list(arrays[(sec, name)].shape)] for sec, name in index],
    }
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [MAGIC, struct.pack("<H", version), struct.pack("<Q", len(meta_bytes)), meta_bytes]
    for key in index:
        parts.append(np.ascontiguousarray(arrays[key], dtype="<f8").tobytes())
    body = b"".join(parts)
    digest = hashlib.blake2b(body, digest_size=8).digest()
    return body + digest


def save_checkpoint(ck: Checkpoint, path) -> None:
    with open(path, "wb") as fh:
        fh.write(checkpoint_bytes(ck))


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        blob = fh.read()
    return checkpoint_from_bytes(blob)


def checkpoint_from_bytes(blob: bytes) -> Checkpoint:
    if len(blob) < len(MAGIC) + 2 + 8 + 8:
        raise CorruptChecksum("checkpoint file is truncated")
    if blob[: len(MAGIC)] != MAGIC:
        raise FormatError("not an sdprel checkpoint (bad magic bytes)")
    body, digest = blob[:-8], blob[-8:]
    if hashlib.blake2b(body, digest_size=8).digest() != digest:
        raise CorruptChecksum("checkpoint checksum does not match")
    (version,) = struct.unpack_from("<H", blob, len(MAGIC))
    if version != FORMAT_VERSION:
        raise VersionMismatch(
            f"checkpoint format version {version}, reader supports {FORMAT_VERSION}"
        )
    offset = len(MAGIC) + 2
    (meta_len,) = struct.unpack_from("<Q", blob, offset)
    offset += 8
    try:
        meta = json.loads(body[offset : offset + meta_len].decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise CorruptChecksum(f"unreadable checkpoint metadata: {exc}") from None
    offset += meta_len

    arrays: dict[tuple[str, str], np.ndarray] = {}
    for sec, name, shape in meta["arrays"]:
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        raw = body[offset : offset + nbytes]
        if len(raw) != nbytes:
            raise CorruptChecksum("checkpoint array payload is truncated")
        arrays[(sec, name)] = (
            np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)
        )
        offset += nbytes
    if offset != len(body):
        raise CorruptChecksum("checkpoint has trailing bytes")

    def take_ae(section: str) -> Autoencoder | None:
        if (section, "encoder_w") not in arrays:
            return None
        return Autoencoder(
            *(arrays[(section, field_name)] for field_name in _AE_FIELDS)
        )

    return Checkpoint(
        config=TrainConfig.from_dict(meta["config"]),
        model_kind=meta["model_kind"],
        model_meta=meta["model_meta"],
        params={name: arr for (sec, name), arr in arrays.items() if sec == "param"},
        pos_ae=take_ae("pos_ae"),
        position_ae=take_ae("position_ae"),
        pos_table={k: int(v) for k, v in meta["pos_table"].items()},
        oov_seed=int(meta["oov_seed"]),
        token_vectors={
            name: arr for (sec, name), arr in arrays.items() if sec == "tok"
        },
    )
