"""Vectorized Monte Carlo trial engine shared by dataset generation and evaluation.

Per trial we need, for each decoder, only whether its recovery times the true
error is logically trivial. That outcome factorises: the logical class of the
residual is the XOR of the error's two logical overlap parities with the
recovery's, and each decoder's recovery parities depend only on the defect
pattern of one stabilizer species. So errors, syndromes and error parities are
sampled and computed in bulk with numpy, while decoders run once per unique
defect pattern per species, memoized across chunks, error rates and phases.

Every recovery is verified to clear exactly its defect pattern before the
result is cached; a violation raises SyndromeMismatchError (a broken decoder).

Trials are partitioned into fixed-size chunks, one RNG stream per chunk, so
results are bit-identical for any worker count.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass

import numpy as np

from decodelab.code import CodeLayout, SyndromeMismatchError, build_layout
from decodelab.decoders import FACE, VERTEX, make_decoder
from decodelab.noise import NoiseConfig, NoiseSampler
from decodelab.nn.embed import model_inputs
from decodelab.nn.model import predict_labels

CHUNK_TRIALS = 16384  # fixed: part of the stream layout, do not tune per run
GEN_STREAM_NAMESPACE = 1 << 62  # keeps dataset-generation streams disjoint from evaluation

_POOL_MIN_BATCH = 256  # below this many new patterns, forking is not worth it


def point_stream_base(p: float) -> int:
    """Stream namespace for one error-rate point; stable across decoder sets."""
    return int(round(p * 1e9)) << 20


@dataclass
class GenStats:
    trials: int
    kept: int

    @property
    def discard_fraction(self) -> float:
        return 1.0 - self.kept / self.trials if self.trials else 0.0


# Worker-side state for multiprocessing decode of defect patterns.
_worker_decoders = None
_worker_layout = None


def _init_worker(distance: int, decoder_names: tuple[str, ...]):
    global _worker_decoders, _worker_layout
    _worker_layout = build_layout(distance)
    _worker_decoders = [make_decoder(name, _worker_layout) for name in decoder_names]


def _decode_pattern_worker(job):
    kind, defects = job
    return _decode_pattern(_worker_layout, _worker_decoders, kind, defects)


def _decode_pattern(layout: CodeLayout, decoders, kind: int, defects: tuple[int, ...]) -> tuple[int, ...]:
    """Logical overlap parity of each decoder's correction for one defect pattern."""
    supports = layout.x_support_masks if kind == VERTEX else layout.z_support_masks
    logical = layout.logical_x_mask if kind == VERTEX else layout.logical_z_mask
    defect_set = set(defects)
    bits = []
    for dec in decoders:
        mask = dec.correct_defects(kind, list(defects))
        flipped = {i for i, sup in enumerate(supports) if (mask & sup).bit_count() & 1}
        if flipped != defect_set:
            raise SyndromeMismatchError(
                f"decoder {dec.name} failed to clear its defect pattern "
                f"(kind={kind}, defects={sorted(defect_set)}, flipped={sorted(flipped)})"
            )
        bits.append((mask & logical).bit_count() & 1)
    return tuple(bits)


class TrialEngine:
    """Paired-trial runner over a fixed layout and decoder list (label order)."""

    def __init__(self, layout: CodeLayout, decoders, workers: int = 1):
        self.layout = layout
        self.decoders = list(decoders)
        self.names = tuple(d.name for d in self.decoders)
        self.workers = max(1, workers)
        hx, hz = layout.stabilizer_matrices()
        self._hx = hx.astype(np.float32).T  # (n, mx): X-stab segment from Z components
        self._hz = hz.astype(np.float32).T
        n = layout.n
        self._logx_vec = np.zeros(n, dtype=np.float32)
        self._logx_vec[list(layout.logical_x_support)] = 1.0
        self._logz_vec = np.zeros(n, dtype=np.float32)
        self._logz_vec[list(layout.logical_z_support)] = 1.0
        # pattern bytes -> per-decoder parity bits, one cache per species
        self._pattern_cache: tuple[dict, dict] = ({}, {})
        # full-syndrome bytes -> predicted label, per model identity
        self._label_cache: dict[int, dict[bytes, int]] = {}

    # ---- sampling ----------------------------------------------------------

    def sample_chunk(self, p: float, seed: int, stream_id: int, count: int):
        sampler = NoiseSampler(self.layout, NoiseConfig(p, seed=seed, stream_id=stream_id))
        xc, zc = sampler.sample_components(count)
        xf = xc.astype(np.float32)
        zf = zc.astype(np.float32)
        sx = (zf @ self._hx).astype(np.uint8) & 1   # vertex defects
        sz = (xf @ self._hz).astype(np.uint8) & 1   # face defects
        err_a = (xf @ self._logz_vec).astype(np.int64) & 1  # error X part vs logical-Z
        err_b = (zf @ self._logx_vec).astype(np.int64) & 1  # error Z part vs logical-X
        return sx, sz, err_a.astype(np.uint8), err_b.astype(np.uint8)

    # ---- decoding ----------------------------------------------------------

    def _pattern_bits(self, kind: int, segment: np.ndarray) -> np.ndarray:
        """(count, k) parity bits of each decoder's correction per trial row."""
        cache = self._pattern_cache[kind]
        packed = np.packbits(segment, axis=1)
        uniq, inverse = np.unique(packed, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        keys = [row.tobytes() for row in uniq]
        missing = [i for i, key in enumerate(keys) if key not in cache]
        if missing:
            jobs = []
            for i in missing:
                bits = np.unpackbits(uniq[i])[:segment.shape[1]]
                jobs.append((kind, tuple(int(t) for t in np.flatnonzero(bits))))
            if self.workers > 1 and len(jobs) >= _POOL_MIN_BATCH:
                ctx = multiprocessing.get_context("fork")
                with ctx.Pool(self.workers, initializer=_init_worker,
                              initargs=(self.layout.distance, self.names)) as pool:
                    results = pool.map(_decode_pattern_worker, jobs, chunksize=64)
            else:
                results = [_decode_pattern(self.layout, self.decoders, kind, defects)
                           for _, defects in jobs]
            for i, res in zip(missing, results):
                cache[keys[i]] = res
        table = np.array([cache[key] for key in keys], dtype=np.uint8)
        return table[inverse]

    def decoder_outcomes(self, sx: np.ndarray, sz: np.ndarray,
                         err_a: np.ndarray, err_b: np.ndarray) -> np.ndarray:
        """(count, k) uint8: 1 where the decoder succeeds on the trial."""
        rec_b = self._pattern_bits(VERTEX, sx)  # Z-chain parity vs logical-X
        rec_a = self._pattern_bits(FACE, sz)    # X-chain parity vs logical-Z
        fail = (rec_a != err_a[:, None]) | (rec_b != err_b[:, None])
        return (~fail).astype(np.uint8)

    # ---- model routing -----------------------------------------------------

    def predicted_labels(self, model, sx: np.ndarray, sz: np.ndarray) -> np.ndarray:
        syndromes = np.concatenate([sx, sz], axis=1)
        packed = np.packbits(syndromes, axis=1)
        uniq, inverse = np.unique(packed, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        if id(model) not in self._label_cache or self._label_cache[id(model)][0] is not model:
            self._label_cache[id(model)] = (model, {})
        cache = self._label_cache[id(model)][1]
        keys = [row.tobytes() for row in uniq]
        missing = [i for i, key in enumerate(keys) if key not in cache]
        if missing:
            m = self.layout.m
            rows = np.unpackbits(uniq[missing], axis=1)[:, :m]
            inputs = model_inputs(self.layout, rows, model.spec.model_type)
            labels = predict_labels(model, inputs)
            for i, lab in zip(missing, labels):
                cache[keys[i]] = int(lab)
        table = np.array([cache[key] for key in keys], dtype=np.int64)
        return table[inverse]

    # ---- high-level runs ---------------------------------------------------

    def run_point(self, p: float, seed: int, trials: int, model=None,
                  stream_base: int | None = None) -> dict[str, int]:
        """Paired failure counts over `trials`: per decoder, oracle, ensemble.

        The error stream depends only on (p, seed), never on the decoder set
        or the model, so curves from the same seed are paired.
        """
        base = point_stream_base(p) if stream_base is None else stream_base
        fails = {name: 0 for name in self.names}
        fails["oracle"] = 0
        if model is not None:
            fails["ensemble"] = 0
        done = 0
        chunk_idx = 0
        while done < trials:
            count = min(CHUNK_TRIALS, trials - done)
            sx, sz, err_a, err_b = self.sample_chunk(p, seed, base + chunk_idx, count)
            ok = self.decoder_outcomes(sx, sz, err_a, err_b)
            for col, name in enumerate(self.names):
                fails[name] += int(count - ok[:, col].sum())
            fails["oracle"] += int(count - ok.max(axis=1).sum())
            if model is not None:
                labels = self.predicted_labels(model, sx, sz)
                chosen = ok[np.arange(count), labels]
                fails["ensemble"] += int(count - chosen.sum())
            done += count
            chunk_idx += 1
        return fails

    def collect_filtered(self, p: float, seed: int, target_count: int,
                         max_trials: int | None = None):
        """Mixed-outcome samples for classifier training.

        Returns (syndromes (N, m) uint8, outcome_masks (N,), labels (N,),
        GenStats). Trials where every decoder succeeds or every decoder fails
        are discarded. Deterministic in (p, seed, target_count).
        """
        if not 0.0 < p < 1.0:
            raise ValueError(f"need 0 < p < 1 to generate mixed outcomes, got {p}")
        if len(self.decoders) < 2:
            raise ValueError("need at least two decoders to disagree")
        syndromes, masks, labels = [], [], []
        kept = 0
        trials = 0
        chunk_idx = 0
        k = len(self.decoders)
        weights = (1 << np.arange(k, dtype=np.uint8))
        stream_base = GEN_STREAM_NAMESPACE | point_stream_base(p)
        while kept < target_count:
            if max_trials is not None and trials >= max_trials:
                raise RuntimeError(
                    f"exceeded {max_trials} trials with only {kept}/{target_count} "
                    "filtered samples; decoders may agree too often at this rate")
            sx, sz, err_a, err_b = self.sample_chunk(
                p, seed, stream_base + chunk_idx, CHUNK_TRIALS)
            ok = self.decoder_outcomes(sx, sz, err_a, err_b)
            mask = ok @ weights
            mixed = np.flatnonzero((mask != 0) & (mask != (1 << k) - 1))
            take = mixed[:target_count - kept]
            if take.size:
                syndromes.append(np.concatenate([sx[take], sz[take]], axis=1))
                masks.append(mask[take])
                # label: lowest successful decoder index (preference order)
                lab = np.argmax(ok[take], axis=1)
                labels.append(lab.astype(np.uint8))
            kept += take.size
            if take.size and take.size < mixed.size:
                # target reached mid-chunk: only trials up to the last taken one count
                trials += int(take[-1]) + 1
            else:
                trials += CHUNK_TRIALS
            chunk_idx += 1
        syn = np.concatenate(syndromes) if syndromes else np.zeros((0, self.layout.m), np.uint8)
        return (syn, np.concatenate(masks), np.concatenate(labels),
                GenStats(trials=trials, kept=kept))
