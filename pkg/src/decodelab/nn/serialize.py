"""Self-describing binary model files.

Layout (all integers little-endian):
  magic "QENN" | version u8 | model_type u8 (0 cnn, 1 mlp) | grid_side u16 |
  output_classes u8 | n_conv u8 | (kernel u8, filters u16) per conv |
  n_dense u8 | width u32 per dense | parameter tensors in declaration order
  (each layer's weight then bias) as raw little-endian float32.
"""

from __future__ import annotations

import struct

import numpy as np

from decodelab.nn.model import Model, ModelSpec, build_model

MAGIC = b"QENN"
FORMAT_VERSION = 1
_TYPE_CODES = {"cnn": 0, "mlp": 1}
_TYPE_NAMES = {v: k for k, v in _TYPE_CODES.items()}


def save_model(model: Model, path) -> None:
    spec = model.spec
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<BBHB", FORMAT_VERSION, _TYPE_CODES[spec.model_type],
                             spec.input_grid_side, spec.output_classes))
        fh.write(struct.pack("<B", len(spec.conv_layers)))
        for k, f in spec.conv_layers:
            fh.write(struct.pack("<BH", k, f))
        fh.write(struct.pack("<B", len(spec.dense_layers)))
        for w in spec.dense_layers:
            fh.write(struct.pack("<I", w))
        for p in model.params:
            fh.write(np.ascontiguousarray(p, dtype="<f4").tobytes())


def load_model(path) -> Model:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not a model file (magic {magic!r})")
        version, type_code, grid_side, classes = struct.unpack("<BBHB", fh.read(5))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {version}")
        (n_conv,) = struct.unpack("<B", fh.read(1))
        convs = tuple(struct.unpack("<BH", fh.read(3)) for _ in range(n_conv))
        (n_dense,) = struct.unpack("<B", fh.read(1))
        dense = tuple(struct.unpack("<I", fh.read(4))[0] for _ in range(n_dense))
        spec = ModelSpec(_TYPE_NAMES[type_code], grid_side, convs, dense, classes)
        model = build_model(spec, seed=0, dtype=np.float32)
        for p in model.params:
            raw = fh.read(p.size * 4)
            if len(raw) != p.size * 4:
                raise ValueError("model file truncated")
            p[...] = np.frombuffer(raw, dtype="<f4").reshape(p.shape)
        trailing = fh.read(1)
        if trailing:
            raise ValueError("model file has trailing bytes")
    return model
