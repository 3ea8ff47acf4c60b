"""Monte Carlo evaluation, pseudo-threshold extraction and comparison reports.

Evaluation is paired: the per-trial error stream depends only on the seed and
the error rate, never on which decoder is being measured, so curves taken with
one seed are directly comparable point by point. Aggregation is plain integer
addition over fixed-size chunks, making results exactly reproducible for any
worker count.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from decodelab._engine import TrialEngine
from decodelab.code import CodeLayout, extract_syndrome, logical_parities
from decodelab.decoders import default_decoders
from decodelab.ensemble import EnsembleDecoder
from decodelab.noise import NoiseConfig, NoiseSampler, components_to_operator

log = logging.getLogger(__name__)

EVAL_TARGETS = ("mwpm", "hdrg", "ensemble", "oracle")

RATIO_DEFINITION = "mwpm_rate / ensemble_rate (values > 1 mean the ensemble is better)"
THRESHOLD_DEFINITION = ("linear interpolation of the first sign change of "
                        "logical_error_rate - physical_error_rate across the grid")


@dataclass(frozen=True)
class CurvePoint:
    error_rate: float
    trials: int
    failures: int

    def __post_init__(self):
        if self.trials <= 0:
            raise ValueError("trials must be positive")
        if not 0 <= self.failures <= self.trials:
            raise ValueError("failures must lie in [0, trials]")

    @property
    def logical_error_rate(self) -> float:
        return self.failures / self.trials

    @property
    def std_error(self) -> float:
        r = self.logical_error_rate
        return float(np.sqrt(r * (1.0 - r) / self.trials))


@dataclass(frozen=True)
class RunConfig:
    """One experiment: grid, statistics and reproducibility knobs."""

    distance: int = 5
    grid: tuple[float, ...] = tuple(round(0.04 + 0.01 * i, 6) for i in range(13))
    trials: int = 100_000
    seed: int = 0
    decoders: tuple[str, ...] = ("mwpm", "hdrg")
    model_path: str | None = None
    workers: int = 1

    def __post_init__(self):
        if any(not 0.0 < p < 1.0 for p in self.grid):
            raise ValueError("grid rates must lie strictly inside (0, 1)")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")


def evaluate(decoder, layout: CodeLayout, error_rate: float, trials: int, seed: int,
             workers: int = 1) -> CurvePoint:
    """Logical failure count of one decoder on `trials` sampled errors.

    Identical seeds produce identical error streams for every decoder, so
    calls at the same (error_rate, seed) are paired.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if hasattr(decoder, "correct_defects"):
        engine = TrialEngine(layout, [decoder], workers=workers)
        fails = engine.run_point(error_rate, seed, trials)
        return CurvePoint(error_rate, trials, fails[decoder.name])
    if isinstance(decoder, EnsembleDecoder):
        engine = TrialEngine(layout, decoder.decoders, workers=workers)
        fails = engine.run_point(error_rate, seed, trials, model=decoder.model)
        return CurvePoint(error_rate, trials, fails["ensemble"])
    return _evaluate_generic(decoder, layout, error_rate, trials, seed)


def _evaluate_generic(decoder, layout, error_rate, trials, seed) -> CurvePoint:
    """Fallback for foreign decoders: per-syndrome decode with memoization."""
    engine = TrialEngine(layout, default_decoders(layout))
    failures = 0
    cache: dict[bytes, tuple[int, int]] = {}
    done = 0
    chunk_idx = 0
    from decodelab._engine import CHUNK_TRIALS, point_stream_base
    base = point_stream_base(error_rate)
    while done < trials:
        count = min(CHUNK_TRIALS, trials - done)
        sx, sz, err_a, err_b = engine.sample_chunk(error_rate, seed, base + chunk_idx, count)
        syndromes = np.concatenate([sx, sz], axis=1)
        for row, ea, eb in zip(syndromes, err_a, err_b):
            key = np.packbits(row).tobytes()
            par = cache.get(key)
            if par is None:
                rec = decoder.decode(row)
                syn = extract_syndrome(layout, rec)
                if not np.array_equal(syn, row):
                    from decodelab.code import SyndromeMismatchError
                    raise SyndromeMismatchError(
                        f"decoder {getattr(decoder, 'name', decoder)!r} violated the "
                        "syndrome-reproduction contract")
                par = logical_parities(layout, rec)
                cache[key] = par
            if par[0] != ea or par[1] != eb:
                failures += 1
        done += count
        chunk_idx += 1
    return CurvePoint(error_rate, trials, failures)


def evaluate_curves(layout: CodeLayout, grid, trials: int, seed: int, model=None,
                    workers: int = 1, targets=None) -> dict[str, list[CurvePoint]]:
    """Paired curves for the constituent decoders, the oracle and the ensemble."""
    engine = TrialEngine(layout, default_decoders(layout), workers=workers)
    targets = tuple(targets) if targets else (EVAL_TARGETS if model is not None
                                              else ("mwpm", "hdrg", "oracle"))
    if "ensemble" in targets and model is None:
        raise ValueError("ensemble evaluation needs a trained model")
    curves: dict[str, list[CurvePoint]] = {name: [] for name in targets}
    for p in grid:
        fails = engine.run_point(p, seed, trials, model=model)
        for name in targets:
            curves[name].append(CurvePoint(p, trials, fails[name]))
        log.info("p=%.4f: %s", p, {name: fails[name] for name in targets})
    return curves


def pseudo_threshold(curve: list[CurvePoint]) -> float | None:
    """Crossing of the curve with the y = x line, linearly interpolated.

    Returns None when the crossing lies outside the grid. The contract assumes
    a single sign change; with noisy multi-crossing data the first crossing is
    returned and a warning logged.
    """
    if len(curve) < 2:
        raise ValueError("need at least two curve points")
    pts = sorted(curve, key=lambda c: c.error_rate)
    f = [c.logical_error_rate - c.error_rate for c in pts]
    crossings = []
    for i in range(len(pts)):
        if f[i] == 0.0:
            crossings.append(pts[i].error_rate)
        elif i + 1 < len(pts) and (f[i] < 0.0 < f[i + 1] or f[i] > 0.0 > f[i + 1]):
            p0, p1 = pts[i].error_rate, pts[i + 1].error_rate
            root = p0 + (p1 - p0) * (-f[i]) / (f[i + 1] - f[i])
            crossings.append(root)
    if not crossings:
        return None
    if len(crossings) > 1:
        log.warning("curve crosses y = x %d times; returning the first crossing",
                    len(crossings))
    return crossings[0]


# ---- CSV output -------------------------------------------------------------

def _write_metadata(fh, metadata: dict) -> None:
    for key, value in metadata.items():
        fh.write(f"# {key}: {value}\n")


def _read_metadata(lines) -> dict:
    meta = {}
    for line in lines:
        body = line[1:].strip()
        key, _, value = body.partition(":")
        meta[key.strip()] = value.strip()
    return meta


def write_curve_csv(path, points: list[CurvePoint], metadata: dict) -> None:
    with open(path, "w", newline="") as fh:
        _write_metadata(fh, metadata)
        writer = csv.writer(fh)
        writer.writerow(["error_rate", "trials", "failures", "logical_error_rate", "std_error"])
        for c in points:
            writer.writerow([repr(c.error_rate), c.trials, c.failures,
                             repr(c.logical_error_rate), repr(c.std_error)])


def read_curve_csv(path) -> tuple[list[CurvePoint], dict]:
    with open(path, newline="") as fh:
        raw = fh.readlines()
    meta_lines = [l for l in raw if l.startswith("#")]
    rows = list(csv.reader(l for l in raw if not l.startswith("#")))
    header, body = rows[0], rows[1:]
    if header[:3] != ["error_rate", "trials", "failures"]:
        raise ValueError(f"unexpected curve header {header}")
    points = [CurvePoint(float(r[0]), int(r[1]), int(r[2])) for r in body]
    return points, _read_metadata(meta_lines)


def comparison_report(curves: dict[str, list[CurvePoint]], metadata: dict | None = None):
    """Per-rate comparison rows plus pseudo-thresholds and the ensemble gain.

    Requires all curves on one grid with paired seeds. Ratio orientation:
    mwpm / ensemble, so > 1 means the ensemble is better; `improvement` is the
    absolute rate reduction mwpm - ensemble.
    """
    if "mwpm" not in curves:
        raise ValueError("comparison needs an mwpm curve")
    grids = {name: tuple(c.error_rate for c in pts) for name, pts in curves.items()}
    reference = grids["mwpm"]
    for name, g in grids.items():
        if g != reference:
            raise ValueError(f"curve {name!r} grid {g} differs from mwpm grid")

    names = [n for n in ("hdrg", "mwpm", "ensemble", "oracle") if n in curves]
    rows = []
    for i, p in enumerate(reference):
        row: dict[str, float] = {"error_rate": p}
        for name in names:
            c = curves[name][i]
            row[f"{name}_rate"] = c.logical_error_rate
            row[f"{name}_std"] = c.std_error
        if "ensemble" in curves:
            ens = curves["ensemble"][i].logical_error_rate
            mw = curves["mwpm"][i].logical_error_rate
            row["ratio_mwpm_over_ensemble"] = mw / ens if ens > 0 else float("inf")
            row["improvement"] = mw - ens
        rows.append(row)

    thresholds = {name: pseudo_threshold(curves[name]) for name in names}
    gain = None
    if thresholds.get("ensemble") is not None and thresholds.get("mwpm"):
        gain = 100.0 * (thresholds["ensemble"] - thresholds["mwpm"]) / thresholds["mwpm"]

    meta = dict(metadata or {})
    meta["ratio_definition"] = RATIO_DEFINITION
    meta["threshold_definition"] = THRESHOLD_DEFINITION
    for name in names:
        t = thresholds[name]
        meta[f"pseudo_threshold_{name}"] = "out-of-range" if t is None else repr(t)
    if gain is not None:
        meta["ensemble_gain_over_mwpm_percent"] = repr(gain)
    return rows, thresholds, gain, meta


def write_report_csv(path, rows: list[dict], meta: dict) -> None:
    columns = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        _write_metadata(fh, meta)
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c]
                             for c in columns])


def read_report_csv(path) -> tuple[list[dict], dict]:
    with open(path, newline="") as fh:
        raw = fh.readlines()
    meta = _read_metadata(l for l in raw if l.startswith("#"))
    rows = list(csv.reader(l for l in raw if not l.startswith("#")))
    header, body = rows[0], rows[1:]
    out = []
    for r in body:
        out.append({key: float(value) for key, value in zip(header, r)})
    return out, meta
