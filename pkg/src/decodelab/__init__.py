"""Surface-code decoding lab.

Builds distance-L planar surface codes, decodes depolarizing-noise syndromes
with MWPM and HDRG decoders, trains a neural classifier that routes each
syndrome to the decoder most likely to correct it, and measures logical error
rates and pseudo-thresholds with a reproducible Monte Carlo harness.
"""

from decodelab.code import (
    CodeLayout,
    PauliOperator,
    SyndromeMismatchError,
    build_layout,
    compose,
    extract_syndrome,
    logical_outcome,
)
from decodelab.noise import NoiseConfig, NoiseSampler, sample_error

__all__ = [
    "CodeLayout",
    "PauliOperator",
    "SyndromeMismatchError",
    "build_layout",
    "compose",
    "extract_syndrome",
    "logical_outcome",
    "NoiseConfig",
    "NoiseSampler",
    "sample_error",
]
