"""Flat binary checkpoint container with a bit-exact round trip.

Layout:
    magic            b"SPECBENCH-CKPT1\\n"
    header length    uint32 little-endian
    header           UTF-8 ``key=value`` lines, keys sorted; carries the
                     model config, training config, and history length
    history          3 float64-LE arrays (step, train loss, val loss)
    blob count       uint32
    blobs            sorted by name: uint16 name length, name bytes,
                     uint8 ndim, uint64-LE dims, float64-LE values
                     (parameter names as-is; fitted statistical state
                     under an ``extra/`` prefix)
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .config import (
    Attention,
    Decomposition,
    Family,
    Head,
    LossKind,
    ModelConfig,
    ModelSize,
    PosEncoding,
    Scaler,
    Tokenization,
    TrainConfig,
)
from .training import TrainedModel

__all__ = ["save_checkpoint", "load_checkpoint"]

_MAGIC = b"SPECBENCH-CKPT1\n"

_CONFIG_ENUMS = {
    "family": Family,
    "tokenization": Tokenization,
    "attention": Attention,
    "head": Head,
    "pos_encoding": PosEncoding,
    "loss": LossKind,
    "scaler": Scaler,
    "decomposition": Decomposition,
    "size": ModelSize,
}
_CONFIG_INTS = (
    "horizon", "context_len", "patch_len", "patch_stride", "ar_order",
    "mlp_hidden", "mlp_depth", "nbeats_blocks", "nbeats_hidden", "nbeats_depth",
)
_TRAIN_FIELDS = (
    ("lr", float), ("batch_series", int), ("windows_batch", int),
    ("max_steps", int), ("val_check_every", int), ("patience", int),
    ("seed", int), ("dropout", float),
)


def _header_lines(model: TrainedModel) -> str:
    cfg, tc = model.config, model.train_config
    items: dict[str, str] = {}
    for key, enum_cls in _CONFIG_ENUMS.items():
        items[f"config.{key}"] = getattr(cfg, key).value
    for key in _CONFIG_INTS:
        items[f"config.{key}"] = str(getattr(cfg, key))
    items["config.nhits_pool_rates"] = ",".join(str(r) for r in cfg.nhits_pool_rates)
    items["config.custom_dims"] = (
        "none" if cfg.custom_dims is None else ",".join(str(d) for d in cfg.custom_dims)
    )
    for key, _ in _TRAIN_FIELDS:
        items[f"train.{key}"] = repr(getattr(tc, key))
    items["history.len"] = str(len(model.history))
    return "".join(f"{k}={items[k]}\n" for k in sorted(items))


def _parse_header(text: str) -> tuple[ModelConfig, TrainConfig, int]:
    items = dict(line.split("=", 1) for line in text.splitlines())
    cfg_kwargs: dict = {}
    for key, enum_cls in _CONFIG_ENUMS.items():
        cfg_kwargs[key] = enum_cls(items[f"config.{key}"])
    for key in _CONFIG_INTS:
        cfg_kwargs[key] = int(items[f"config.{key}"])
    cfg_kwargs["nhits_pool_rates"] = tuple(
        int(r) for r in items["config.nhits_pool_rates"].split(",")
    )
    if items["config.custom_dims"] != "none":
        cfg_kwargs["custom_dims"] = tuple(
            int(d) for d in items["config.custom_dims"].split(",")
        )
    tc_kwargs = {key: cast(items[f"train.{key}"]) for key, cast in _TRAIN_FIELDS}
    return (
        ModelConfig(**cfg_kwargs),
        TrainConfig(**tc_kwargs),
        int(items["history.len"]),
    )


def _write_array(fh, arr: np.ndarray) -> None:
    arr = np.ascontiguousarray(arr, dtype="<f8")
    fh.write(struct.pack("<B", arr.ndim))
    fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
    fh.write(arr.tobytes())


def _read_array(fh) -> np.ndarray:
    (ndim,) = struct.unpack("<B", fh.read(1))
    shape = struct.unpack(f"<{ndim}Q", fh.read(8 * ndim)) if ndim else ()
    count = int(np.prod(shape)) if shape else 1
    data = np.frombuffer(fh.read(8 * count), dtype="<f8").astype(np.float64)
    return data.reshape(shape)


def save_checkpoint(model: TrainedModel, path: str | Path) -> None:
    path = Path(path)
    header = _header_lines(model).encode("utf-8")
    blobs = {name: arr for name, arr in model.params.items()}
    blobs.update({f"extra/{name}": arr for name, arr in model.extra.items()})
    with path.open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        hist = np.array(model.history, dtype=np.float64).reshape(len(model.history), 3)
        for col in range(3):
            _write_array(fh, hist[:, col])
        fh.write(struct.pack("<I", len(blobs)))
        for name in sorted(blobs):
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            _write_array(fh, blobs[name])


def load_checkpoint(path: str | Path) -> TrainedModel:
    path = Path(path)
    with path.open("rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ValueError(f"{path} is not a checkpoint file")
        (header_len,) = struct.unpack("<I", fh.read(4))
        cfg, tc, hist_len = _parse_header(fh.read(header_len).decode("utf-8"))
        cols = [_read_array(fh) for _ in range(3)]
        history = [
            (int(cols[0][i]), float(cols[1][i]), float(cols[2][i]))
            for i in range(hist_len)
        ]
        (n_blobs,) = struct.unpack("<I", fh.read(4))
        params: dict[str, np.ndarray] = {}
        extra: dict[str, np.ndarray] = {}
        for _ in range(n_blobs):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode("utf-8")
            arr = _read_array(fh)
            if name.startswith("extra/"):
                extra[name[len("extra/"):]] = arr
            else:
                params[name] = arr
    return TrainedModel(config=cfg, train_config=tc, params=params, extra=extra, history=history)
