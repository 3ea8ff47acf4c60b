"""Syndrome-to-grid embedding for the convolutional classifier.

The 45-degree lattice view: grid cell (r, c) carries the bit of the stabilizer
that lives at that coordinate, both stabilizer species share the single
channel, and data-qubit cells stay zero.
"""

from __future__ import annotations

import numpy as np

from decodelab.code import CodeLayout


def _stabilizer_cells(layout: CodeLayout) -> tuple[np.ndarray, np.ndarray]:
    coords = list(layout.x_stabilizers) + list(layout.z_stabilizers)
    rows = np.array([r for r, _ in coords])
    cols = np.array([c for _, c in coords])
    return rows, cols


def embed_syndrome(layout: CodeLayout, s: np.ndarray) -> np.ndarray:
    """(2L-1, 2L-1, 1) float32 image of one length-m syndrome."""
    if len(s) != layout.m:
        raise ValueError(f"syndrome length {len(s)} != m = {layout.m}")
    g = layout.grid_side
    rows, cols = _stabilizer_cells(layout)
    img = np.zeros((g, g, 1), dtype=np.float32)
    img[rows, cols, 0] = np.asarray(s, dtype=np.float32)
    return img


def embed_batch(layout: CodeLayout, syndromes: np.ndarray) -> np.ndarray:
    """(B, 2L-1, 2L-1, 1) image batch from a (B, m) syndrome matrix."""
    syndromes = np.asarray(syndromes)
    if syndromes.ndim != 2 or syndromes.shape[1] != layout.m:
        raise ValueError(f"expected (B, {layout.m}) syndrome matrix, got {syndromes.shape}")
    g = layout.grid_side
    rows, cols = _stabilizer_cells(layout)
    img = np.zeros((len(syndromes), g, g, 1), dtype=np.float32)
    img[:, rows, cols, 0] = syndromes.astype(np.float32)
    return img


def model_inputs(layout: CodeLayout, syndromes: np.ndarray, model_type: str) -> np.ndarray:
    """Batch inputs for either model flavour: images for cnn, raw bits for mlp."""
    if model_type == "cnn":
        return embed_batch(layout, syndromes)
    return np.asarray(syndromes, dtype=np.float32)
