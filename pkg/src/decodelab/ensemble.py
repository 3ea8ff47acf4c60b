"""Decoder-disagreement training data and the neural selection ensemble.

A trial enters the dataset only when the constituent decoders disagree (at
least one success and one failure); each sample keeps the full per-decoder
outcome bitmask plus its training label, the lowest successful decoder index
(preference order: mwpm before hdrg). The trained ensemble decodes a syndrome
by asking the classifier which decoder to trust and returning that decoder's
recovery unmodified.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from decodelab._engine import GenStats, TrialEngine
from decodelab.code import CodeLayout, PauliOperator
from decodelab.nn.embed import embed_syndrome, model_inputs
from decodelab.nn.model import Model, predict_label

DATASET_MAGIC = b"QESD"
DATASET_VERSION = 1


@dataclass(frozen=True)
class Sample:
    syndrome: np.ndarray
    outcome_mask: int
    label: int

    def __post_init__(self):
        if self.outcome_mask <= 0:
            raise ValueError("outcome_mask must have at least one success bit")
        if self.label != lowest_success(self.outcome_mask):
            raise ValueError(
                f"label {self.label} is not the lowest success in mask {self.outcome_mask:b}")


def lowest_success(outcome_mask: int) -> int:
    if outcome_mask <= 0:
        raise ValueError("all decoders failed; mask has no success bit")
    return (outcome_mask & -outcome_mask).bit_length() - 1


def oracle_selector(outcome_mask: int) -> int:
    """Upper-bound selector: the preferred decoder among the successful ones.

    Only for measurement and test oracles; a deployed ensemble cannot see the
    outcome mask.
    """
    return lowest_success(outcome_mask)


@dataclass
class Dataset:
    """Columnar store of filtered samples; rows are views via sample(i)."""

    distance: int
    decoder_names: tuple[str, ...]
    error_rate: float
    seed: int
    syndromes: np.ndarray      # (N, m) uint8
    outcome_masks: np.ndarray  # (N,) uint8
    labels: np.ndarray         # (N,) uint8

    def __len__(self) -> int:
        return len(self.labels)

    def sample(self, i: int) -> Sample:
        return Sample(self.syndromes[i], int(self.outcome_masks[i]), int(self.labels[i]))

    def validate(self) -> None:
        """Filter invariants: every stored mask is mixed, labels match masks."""
        k = len(self.decoder_names)
        m = 2 * self.distance * (self.distance - 1)
        if self.syndromes.shape != (len(self), m):
            raise ValueError(f"syndrome block shape {self.syndromes.shape} != (N, {m})")
        masks = self.outcome_masks.astype(np.int64)
        if masks.min(initial=1) <= 0 or masks.max(initial=1) >= (1 << k) - 1:
            raise ValueError("dataset contains non-mixed outcome masks")
        expected = np.array([lowest_success(int(v)) for v in masks], dtype=np.uint8)
        if not np.array_equal(expected, self.labels):
            raise ValueError("labels do not match outcome masks")

    def training_arrays(self, layout: CodeLayout, model_type: str):
        if layout.distance != self.distance:
            raise ValueError("layout distance does not match dataset")
        return model_inputs(layout, self.syndromes, model_type), self.labels.astype(np.int64)


def generate_dataset(layout: CodeLayout, decoders, error_rate: float, target_count: int,
                     seed: int, workers: int = 1,
                     max_trials: int | None = None) -> tuple[Dataset, GenStats]:
    """Monte Carlo generation of `target_count` filtered samples at one rate."""
    if target_count < 1:
        raise ValueError("target_count must be positive")
    engine = TrialEngine(layout, decoders, workers=workers)
    syndromes, masks, labels, stats = engine.collect_filtered(
        error_rate, seed, target_count, max_trials=max_trials)
    ds = Dataset(
        distance=layout.distance,
        decoder_names=tuple(d.name for d in decoders),
        error_rate=error_rate,
        seed=seed,
        syndromes=syndromes,
        outcome_masks=masks,
        labels=labels,
    )
    return ds, stats


class EnsembleDecoder:
    """Trained routing decoder: classify the syndrome, run the chosen decoder."""

    name = "ensemble"

    def __init__(self, model: Model, decoders, layout: CodeLayout):
        if model.spec.output_classes != len(decoders):
            raise ValueError(
                f"model has {model.spec.output_classes} outputs for {len(decoders)} decoders")
        if model.spec.input_grid_side != layout.grid_side:
            raise ValueError("model grid side does not match layout")
        self.model = model
        self.decoders = list(decoders)
        self.layout = layout

    def select(self, s: np.ndarray) -> int:
        if self.model.spec.model_type == "cnn":
            x = embed_syndrome(self.layout, s)
        else:
            x = np.asarray(s, dtype=np.float32)
        return predict_label(self.model, x)

    def decode(self, s: np.ndarray) -> PauliOperator:
        return self.decoders[self.select(s)].decode(s)


def ensemble_decode(model: Model, decoders, layout: CodeLayout, s: np.ndarray) -> PauliOperator:
    return EnsembleDecoder(model, decoders, layout).decode(s)


# ---- dataset files ----------------------------------------------------------

_HEADER = struct.Struct("<4sBHBdQQ")  # magic, version, L, k, error_rate, seed, count


def save_dataset(ds: Dataset, path) -> None:
    m = ds.syndromes.shape[1]
    bitmap = np.packbits(ds.syndromes, axis=1, bitorder="little")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(DATASET_MAGIC, DATASET_VERSION, ds.distance,
                              len(ds.decoder_names), ds.error_rate,
                              ds.seed & 0xFFFFFFFFFFFFFFFF, len(ds)))
        rows = np.empty((len(ds), bitmap.shape[1] + 2), dtype=np.uint8)
        rows[:, :bitmap.shape[1]] = bitmap
        rows[:, -2] = ds.outcome_masks
        rows[:, -1] = ds.labels
        fh.write(rows.tobytes())


def load_dataset(path, decoder_names: tuple[str, ...] | None = None) -> Dataset:
    """Reads and validates a dataset file (filter invariants checked on load)."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError("dataset file truncated")
        magic, version, distance, k, error_rate, seed, count = _HEADER.unpack(head)
        if magic != DATASET_MAGIC:
            raise ValueError(f"not a dataset file (magic {magic!r})")
        if version != DATASET_VERSION:
            raise ValueError(f"unsupported dataset version {version}")
        m = 2 * distance * (distance - 1)
        nbytes = (m + 7) // 8
        payload = fh.read()
    expected = count * (nbytes + 2)
    if len(payload) != expected:
        raise ValueError(f"dataset payload is {len(payload)} bytes, expected {expected}")
    rows = np.frombuffer(payload, dtype=np.uint8).reshape(count, nbytes + 2)
    syndromes = np.unpackbits(rows[:, :nbytes], axis=1, bitorder="little")[:, :m]
    if decoder_names is None:
        from decodelab.decoders import DECODER_NAMES
        decoder_names = DECODER_NAMES[:k]
    ds = Dataset(
        distance=distance,
        decoder_names=tuple(decoder_names),
        error_rate=error_rate,
        seed=seed,
        syndromes=np.ascontiguousarray(syndromes),
        outcome_masks=rows[:, -2].copy(),
        labels=rows[:, -1].copy(),
    )
    ds.validate()
    return ds


def dataset_to_csv(ds: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["syndrome", "outcome_mask", "label"])
        for i in range(len(ds)):
            bits = "".join(str(b) for b in ds.syndromes[i])
            writer.writerow([bits, int(ds.outcome_masks[i]), int(ds.labels[i])])
