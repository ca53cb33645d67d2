"""Monte Carlo experiment runner: SNR sweeps with a per-source stopping
rule, diversity-slope estimation, sweep comparison, and trade-off tables.

Reproducibility: each batch of rounds is seeded from (master_seed,
snr_index, batch_index), and the stopping batch is determined by
cumulative counts in batch-index order.  Results are therefore identical
for any worker count (NETCODE_THREADS changes speed only).
"""
from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .channel import FadingModel, SncPolicy, simulate_rounds
from .decoders import MAP_SIZE_LIMIT, decode_with_mode_batch
from .design import (
    NetworkCode,
    TradeoffPoint,
    code_for_requirements,
    greedy_code,
    rate_advantage,
    repetition_baseline,
    separation_vector,
    _systematize,
)
from .gf2 import BitMatrix

__all__ = [
    "ConfigError",
    "SimConfig",
    "BerRecord",
    "run_sweep",
    "estimate_diversity_slope",
    "compare_sweeps",
    "tradeoff_table",
    "TradeoffRow",
    "records_to_csv",
    "records_from_csv",
    "records_to_json_lines",
]

CSV_COLUMNS = ("snr_db", "source", "trials", "errors", "ber", "stderr", "flags")


class ConfigError(ValueError):
    """Invalid simulation configuration."""


@dataclass(frozen=True)
class SimConfig:
    code: NetworkCode
    snr_grid_db: tuple[float, ...]
    fading_mode: str = "block_iid"
    snc: bool = False
    decoder: str = "sp"
    mode: str = "optimal"
    sp_iters: int = 4
    min_errors_per_bit: int = 100
    max_trials: int = 10**8
    master_seed: int = 0
    batch_size: int = 1 << 16

    def __post_init__(self):
        if not self.snr_grid_db:
            raise ConfigError("SNR grid is empty")
        if any(b <= a for a, b in zip(self.snr_grid_db, self.snr_grid_db[1:])):
            raise ConfigError("SNR grid must be strictly increasing")
        if self.min_errors_per_bit < 1:
            raise ConfigError("min_errors_per_bit must be >= 1")
        if self.max_trials < 0:
            raise ConfigError("max_trials must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.decoder not in ("map", "sp"):
            raise ConfigError(f"unknown decoder {self.decoder!r}")
        if self.mode not in ("optimal", "genie", "naive"):
            raise ConfigError(f"unknown decode mode {self.mode!r}")
        if self.fading_mode not in ("block_iid", "per_source_static"):
            raise ConfigError(f"unknown fading mode {self.fading_mode!r}")
        if self.decoder == "map" and self.code.k + self.code.n > MAP_SIZE_LIMIT:
            raise ConfigError(
                f"MAP decoder limited to k + n <= {MAP_SIZE_LIMIT}")

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SimConfig":
        try:
            if "code" in obj:
                code = NetworkCode.from_json_dict(obj["code"])
            elif "design" in obj:
                req = obj["design"]
                code = code_for_requirements(int(req["k"]), int(req["d"]))
            else:
                raise ConfigError("config needs a 'code' object or a 'design' {k, d}")
            kwargs = {}
            for key in ("fading_mode", "snc", "decoder", "mode", "sp_iters",
                        "min_errors_per_bit", "max_trials", "master_seed",
                        "batch_size"):
                if key in obj:
                    kwargs[key] = obj[key]
            return cls(code=code,
                       snr_grid_db=tuple(float(x) for x in obj["snr_grid_db"]),
                       **kwargs)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc


@dataclass
class BerRecord:
    """Per-source bit error statistics at one SNR point."""

    snr_db: float
    trials: int
    errors: np.ndarray            # (k,) per-source error counts
    flags: str = ""
    wall_time: float = 0.0

    @property
    def ber(self) -> np.ndarray:
        if self.trials == 0:
            return np.full(len(self.errors), np.nan)
        return self.errors / self.trials

    @property
    def stderr(self) -> np.ndarray:
        if self.trials == 0:
            return np.full(len(self.errors), np.nan)
        ber = self.ber
        return np.sqrt(ber * (1.0 - ber) / self.trials)


def _batch_counts(config: SimConfig, snr_index: int, batch_index: int,
                  size: int) -> tuple[int, np.ndarray]:
    """Simulate and decode one seeded batch; returns (trials, error counts)."""
    snr_db = config.snr_grid_db[snr_index]
    fading = FadingModel(config.fading_mode, 10.0 ** (snr_db / 10.0))
    snc = SncPolicy(config.snc)
    rng = np.random.default_rng([config.master_seed, snr_index, batch_index])
    batch = simulate_rounds(config.code, fading, snc, rng, size,
                            genie=(config.mode == "genie"))
    decisions = decode_with_mode_batch(batch, config.code, 1.0, config.mode,
                                       config.decoder, config.sp_iters)
    return size, (decisions != batch.u).sum(axis=0).astype(np.int64)


def _batch_worker(args) -> tuple[int, np.ndarray]:
    config_obj, snr_index, batch_index, size = args
    config = SimConfig.from_json_dict(config_obj)
    return _batch_counts(config, snr_index, batch_index, size)


def _config_json_dict(config: SimConfig) -> dict:
    return {
        "code": config.code.to_json_dict(),
        "snr_grid_db": list(config.snr_grid_db),
        "fading_mode": config.fading_mode,
        "snc": config.snc,
        "decoder": config.decoder,
        "mode": config.mode,
        "sp_iters": config.sp_iters,
        "min_errors_per_bit": config.min_errors_per_bit,
        "max_trials": config.max_trials,
        "master_seed": config.master_seed,
        "batch_size": config.batch_size,
    }


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("NETCODE_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(config: SimConfig) -> list[BerRecord]:
    """Run the Monte Carlo sweep defined by `config`.

    Per SNR point, rounds run in fixed-size batches until every source
    bit has accumulated min_errors_per_bit errors or max_trials rounds
    have been spent (such points are flagged "capped").
    """
    workers = _worker_count()
    k = config.code.k
    records: list[BerRecord] = []
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    config_obj = _config_json_dict(config) if pool else None
    try:
        for snr_index in range(len(config.snr_grid_db)):
            t0 = time.perf_counter()
            trials = 0
            errors = np.zeros(k, dtype=np.int64)
            flags = ""
            if config.max_trials == 0:
                records.append(BerRecord(config.snr_grid_db[snr_index], 0,
                                         errors, "empty",
                                         time.perf_counter() - t0))
                continue
            # fixed batch sizes, determined purely by index
            sizes = []
            left = config.max_trials
            while left > 0:
                s = min(config.batch_size, left)
                sizes.append(s)
                left -= s
            done = False
            batch_index = 0
            while not done and batch_index < len(sizes):
                wave = range(batch_index, min(batch_index + workers, len(sizes)))
                if pool is not None:
                    results = list(pool.map(
                        _batch_worker,
                        [(config_obj, snr_index, b, sizes[b]) for b in wave]))
                else:
                    results = [_batch_counts(config, snr_index, b, sizes[b])
                               for b in wave]
                for n_done, errs in results:
                    trials += n_done
                    errors += errs
                    batch_index += 1
                    if np.all(errors >= config.min_errors_per_bit):
                        done = True
                        break
            if not done:
                flags = "capped"
            records.append(BerRecord(config.snr_grid_db[snr_index], trials,
                                     errors, flags, time.perf_counter() - t0))
    finally:
        if pool is not None:
            pool.shutdown()
    return records


def estimate_diversity_slope(records: Sequence[BerRecord], source: int,
                             window: int = 3) -> float:
    """Least-squares slope of -log10(BER) against SNR_dB/10 over the
    highest-SNR points; the empirical diversity order."""
    usable = [r for r in records if r.trials > 0]
    pts = usable[-window:]
    if len(pts) < 2:
        raise ValueError("need at least two records in the slope window")
    bers = np.array([r.ber[source] for r in pts])
    if np.any(bers <= 0) or np.any(np.isnan(bers)):
        raise ValueError("zero-error or empty record in the slope window")
    x = np.array([r.snr_db / 10.0 for r in pts])
    y = -np.log10(bers)
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def _snr_at_ber(records: Sequence[BerRecord], source: int, target: float) -> float:
    pts = [(r.snr_db, r.ber[source]) for r in records
           if r.trials > 0 and r.ber[source] > 0]
    for (s0, b0), (s1, b1) in zip(pts, pts[1:]):
        lo, hi = min(b0, b1), max(b0, b1)
        if lo <= target <= hi:
            if b0 == b1:
                return s0
            f = (np.log10(target) - np.log10(b0)) / (np.log10(b1) - np.log10(b0))
            return s0 + f * (s1 - s0)
    raise ValueError(f"target BER {target} not bracketed for source {source}")


def compare_sweeps(a: Sequence[BerRecord], b: Sequence[BerRecord],
                   target_ber: float) -> list[float]:
    """Per-source SNR gap (dB) of sweep a relative to sweep b at the
    target BER; positive means a needs more SNR."""
    k = len(a[0].errors)
    return [_snr_at_ber(a, i, target_ber) - _snr_at_ber(b, i, target_ber)
            for i in range(k)]


@dataclass(frozen=True)
class TradeoffRow:
    """One greedy-vs-repetition comparison point."""

    k: int
    n: int
    d: int
    greedy: TradeoffPoint
    repetition: TradeoffPoint
    advantage: float


def _greedy_point(k: int, n: int) -> tuple[TradeoffPoint, int]:
    """Best-distance greedy (sub)code with k rows at length n."""
    for d in range(n, 0, -1):
        B = greedy_code(n, d)
        if B.rows >= k:
            G = _systematize(BitMatrix(B.row_masks[:k], k, n))
            sep = separation_vector(G)
            return TradeoffPoint(Fraction(k, n), min(sep), max(sep),
                                 sum(sep) / k), d
    raise ValueError("no code found")  # unreachable for n >= k >= 1


def tradeoff_table(k: int, n_range: Sequence[int] | None = None,
                   d_range: Sequence[int] | None = None) -> list[TradeoffRow]:
    """Greedy-vs-repetition trade-off rows over a length or distance range."""
    if (n_range is None) == (d_range is None):
        raise ValueError("provide exactly one of n_range or d_range")
    rows = []
    if n_range is not None:
        if not n_range:
            raise ValueError("empty range")
        for n in n_range:
            greedy, d = _greedy_point(k, n)
            rep = repetition_baseline(k, n)
            rows.append(TradeoffRow(k, n, d, greedy, rep, rate_advantage(k, d)))
    else:
        if not d_range:
            raise ValueError("empty range")
        for d in d_range:
            code = code_for_requirements(k, d)
            sep = code.sep
            greedy = TradeoffPoint(code.rate, min(sep), max(sep), sum(sep) / k)
            rep = repetition_baseline(k, k * d)
            rows.append(TradeoffRow(k, code.n, d, greedy, rep,
                                    rate_advantage(k, d)))
    return rows


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def records_to_csv(records: Sequence[BerRecord], fp) -> None:
    """One row per (snr_db, source); floats at full round-trip precision."""
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        ber, stderr = rec.ber, rec.stderr
        for i in range(len(rec.errors)):
            writer.writerow([
                _fmt(rec.snr_db), i + 1, rec.trials, int(rec.errors[i]),
                _fmt(ber[i]), _fmt(stderr[i]), rec.flags,
            ])


def records_from_csv(fp) -> list[BerRecord]:
    reader = csv.DictReader(fp)
    grouped: dict[float, BerRecord] = {}
    order: list[float] = []
    rows: dict[float, list[dict]] = {}
    for row in reader:
        snr = float(row["snr_db"])
        if snr not in rows:
            rows[snr] = []
            order.append(snr)
        rows[snr].append(row)
    records = []
    for snr in order:
        group = sorted(rows[snr], key=lambda r: int(r["source"]))
        errors = np.array([int(r["errors"]) for r in group], dtype=np.int64)
        records.append(BerRecord(snr, int(group[0]["trials"]), errors,
                                 group[0]["flags"]))
    return records


def records_to_json_lines(records: Sequence[BerRecord], fp) -> None:
    """JSON-lines emission with the same fields as the CSV."""
    for rec in records:
        ber, stderr = rec.ber, rec.stderr
        for i in range(len(rec.errors)):
            fp.write(json.dumps({
                "snr_db": rec.snr_db, "source": i + 1, "trials": rec.trials,
                "errors": int(rec.errors[i]), "ber": float(ber[i]),
                "stderr": float(stderr[i]), "flags": rec.flags,
            }) + "\n")
