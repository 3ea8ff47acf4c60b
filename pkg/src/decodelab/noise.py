"""Reproducible i.i.d. depolarizing noise on the data qubits.

Each stream is a counter-based Philox generator keyed by (seed, stream_id),
so trial-level parallelism with disjoint stream_ids can never change the
sampled error sequence. Within a stream, draw k consumes exactly the uniforms
[k*n, (k+1)*n), which makes block sampling bit-identical to repeated single
draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from decodelab.code import CodeLayout, PauliOperator


@dataclass(frozen=True)
class NoiseConfig:
    """Per-qubit depolarizing channel: X, Y, Z each with probability p/3."""

    error_rate: float
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        if not 0.0 <= self.error_rate <= 1.0:
            raise ValueError(f"error_rate must be in [0, 1], got {self.error_rate}")


def _generator(seed: int, stream_id: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream_id & 0xFFFFFFFFFFFFFFFF],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class NoiseSampler:
    """Stateful view of one noise stream; successive draws advance the stream."""

    def __init__(self, layout: CodeLayout, config: NoiseConfig):
        self.layout = layout
        self.config = config
        self._rng = _generator(config.seed, config.stream_id)

    def sample_components(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        """(count, n) uint8 arrays flagging X components and Z components (Y sets both)."""
        p = self.config.error_rate
        u = self._rng.random((count, self.layout.n))
        # u < p/3 -> X, < 2p/3 -> Y, < p -> Z, else I
        xcomp = (u < 2.0 * p / 3.0).astype(np.uint8)
        zcomp = ((u >= p / 3.0) & (u < p)).astype(np.uint8)
        return xcomp, zcomp

    def sample(self) -> PauliOperator:
        xcomp, zcomp = self.sample_components(1)
        return components_to_operator(xcomp[0], zcomp[0])


def components_to_operator(xcomp: np.ndarray, zcomp: np.ndarray) -> PauliOperator:
    xm = zm = 0
    for q in np.flatnonzero(xcomp):
        xm |= 1 << int(q)
    for q in np.flatnonzero(zcomp):
        zm |= 1 << int(q)
    return PauliOperator(xm, zm)


def sample_error(layout: CodeLayout, config: NoiseConfig) -> PauliOperator:
    """First draw of the (seed, stream_id) stream."""
    return NoiseSampler(layout, config).sample()
