"""Cooperative round simulation: relay detection errors, reliabilities,
selective encoding, Rayleigh fading, and destination observations.

All randomness flows through an explicit numpy Generator.  Draw order is
fixed (data bits, relay link SNRs, relay error uniforms, destination
gains, noise) so a seeded round is reproducible.  The batch form is the
workhorse; single-round wrappers exist for tracing and tests.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import erfc

from .design import NetworkCode, validate_schedule
from .gf2 import BitMatrix, BitVector

__all__ = [
    "FadingModel",
    "SncPolicy",
    "RoundBatch",
    "RoundObservation",
    "q_function",
    "link_error_prob",
    "snc_threshold",
    "combine_reliability",
    "relay_pairs",
    "simulate_round",
    "simulate_rounds",
]

FADING_MODES = ("block_iid", "per_source_static")


@dataclass(frozen=True)
class FadingModel:
    """Destination-link fading: independent per slot, or one static gain
    per transmitting source within a round."""

    mode: str = "block_iid"
    mean_snr: float = 1.0

    def __post_init__(self):
        if self.mode not in FADING_MODES:
            raise ValueError(f"unknown fading mode {self.mode!r}")
        if not self.mean_snr > 0:
            raise ValueError("mean SNR must be positive")


@dataclass(frozen=True)
class SncPolicy:
    """Selective encoding: drop a detected symbol from the combination
    when its instantaneous error probability reaches the fading-averaged
    threshold."""

    enabled: bool = False

    def threshold(self, mean_snr: float) -> float:
        return snc_threshold(mean_snr)


def q_function(x):
    """Gaussian tail probability Q(x)."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def link_error_prob(gamma):
    """BPSK coherent-detection error probability at instantaneous SNR gamma."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("SNR must be non-negative")
    return q_function(np.sqrt(2.0 * g))


def snc_threshold(mean_snr: float) -> float:
    """Rayleigh-averaged BPSK error probability at average SNR mean_snr."""
    if not mean_snr > 0:
        raise ValueError("mean SNR must be positive")
    return 0.5 * (1.0 - np.sqrt(mean_snr / (1.0 + mean_snr)))


def combine_reliability(per_source_errs: Sequence[float]) -> float:
    """Probability that an odd number of the given independent detection
    errors occurred (error probability of the XOR combination)."""
    p = np.asarray(per_source_errs, dtype=float)
    if np.any((p < 0) | (p > 0.5)):
        raise ValueError("detection error probabilities must lie in [0, 1/2]")
    return float((1.0 - np.prod(1.0 - 2.0 * p)) / 2.0)


def relay_pairs(code: NetworkCode) -> list[tuple[int, int]]:
    """Distinct (source, relay) detection pairs used within one round.

    Sources are 0-based; relays are 1-based node labels from the
    schedule.  A relay detects each source once and reuses the estimate
    in every slot where it combines that source.
    """
    pairs = set()
    for j in range(code.n):
        relay = code.v[j]
        for i in range(code.k):
            if i != relay - 1 and code.G.entry(i, j):
                pairs.add((i, relay))
    return sorted(pairs)


@dataclass
class RoundBatch:
    """Vectorized batch of simulated rounds (leading axis = round)."""

    code: NetworkCode
    u: np.ndarray            # (B, k) data bits
    c: np.ndarray            # (B, n) error-free codeword under g_eff
    e: np.ndarray            # (B, n) realized relay errors
    c_hat: np.ndarray        # (B, n) transmitted bits, c ^ e
    p_e: np.ndarray          # (B, n) slot reliabilities
    h: np.ndarray            # (B, n) complex destination gains
    y: np.ndarray            # (B, n) complex observations
    g_eff: np.ndarray        # (B, k, n) instantaneous generator matrices
    pairs: list[tuple[int, int]]
    pair_err_prob: np.ndarray  # (B, P) instantaneous detection error probs
    pair_err: np.ndarray       # (B, P) realized detection errors
    pair_kept: np.ndarray      # (B, P) True where the detection was combined
    error_free: bool = False

    def __len__(self) -> int:
        return self.u.shape[0]


@dataclass
class RoundObservation:
    """One simulated round, unpacked from a batch of size 1."""

    code: NetworkCode
    u: BitVector
    c: BitVector
    e: BitVector
    c_hat: BitVector
    p_e: list[float]
    h: list[complex]
    y: list[complex]
    g_eff: BitMatrix
    pairs: list[tuple[int, int]]
    pair_err_prob: list[float]
    pair_err: list[int]
    pair_kept: list[bool]
    error_free: bool = False

    def to_batch(self) -> RoundBatch:
        return RoundBatch(
            code=self.code,
            u=np.array([self.u.to_list()], dtype=np.uint8),
            c=np.array([self.c.to_list()], dtype=np.uint8),
            e=np.array([self.e.to_list()], dtype=np.uint8),
            c_hat=np.array([self.c_hat.to_list()], dtype=np.uint8),
            p_e=np.array([self.p_e], dtype=float),
            h=np.array([self.h], dtype=complex),
            y=np.array([self.y], dtype=complex),
            g_eff=self.g_eff.to_array()[None, :, :],
            pairs=list(self.pairs),
            pair_err_prob=np.array([self.pair_err_prob], dtype=float),
            pair_err=np.array([self.pair_err], dtype=np.uint8),
            pair_kept=np.array([self.pair_kept], dtype=bool),
            error_free=self.error_free,
        )

    def trace_json(self, seed=None) -> str:
        """One JSON line for debugging dumps."""
        obj = {
            "seed": seed,
            "c": self.c.to_list(),
            "e": self.e.to_list(),
            "p_e": self.p_e,
            "G_eff": self.g_eff.to_lists(),
            "y": [[z.real, z.imag] for z in self.y],
        }
        return json.dumps(obj)


def simulate_rounds(
    code: NetworkCode,
    fading: FadingModel,
    snc: SncPolicy,
    rng: np.random.Generator,
    batch: int,
    u: np.ndarray | None = None,
    genie: bool = False,
) -> RoundBatch:
    """Simulate `batch` independent rounds.

    With `genie=True` the relays never err: detections are error-free and
    the reported reliabilities are zero (selective encoding never fires).
    """
    ok, violations = validate_schedule(code)
    if not ok:
        raise ValueError("invalid schedule: " + "; ".join(violations))
    k, n = code.k, code.n
    G = code.G.to_array()  # (k, n)

    if u is None:
        u = rng.integers(0, 2, size=(batch, k)).astype(np.uint8)
    else:
        u = np.asarray(u, dtype=np.uint8)
        if u.shape != (batch, k):
            raise ValueError(f"data array must have shape ({batch}, {k})")

    pairs = relay_pairs(code)
    P = len(pairs)
    if genie:
        pair_err_prob = np.zeros((batch, P))
        pair_err = np.zeros((batch, P), dtype=np.uint8)
        kept = np.ones((batch, P), dtype=bool)
    else:
        gammas = rng.exponential(fading.mean_snr, size=(batch, P)) if P else np.zeros((batch, 0))
        pair_err_prob = link_error_prob(gammas)
        uni = rng.random(size=(batch, P)) if P else np.zeros((batch, 0))
        pair_err = (uni < pair_err_prob).astype(np.uint8)
        if snc.enabled:
            kept = pair_err_prob < snc.threshold(fading.mean_snr)
        else:
            kept = np.ones((batch, P), dtype=bool)

    # instantaneous generator matrix after selective encoding
    g_eff = np.broadcast_to(G, (batch, k, n)).copy()
    pair_index = {pr: idx for idx, pr in enumerate(pairs)}
    e = np.zeros((batch, n), dtype=np.uint8)
    p_e = np.zeros((batch, n))
    for j in range(n):
        relay = code.v[j]
        slot_pairs = [pair_index[(i, relay)]
                      for i in range(k)
                      if i != relay - 1 and G[i, j]]
        if not slot_pairs:
            continue
        keep_j = kept[:, slot_pairs]              # (B, m)
        for col, idx in enumerate(slot_pairs):
            src = pairs[idx][0]
            g_eff[:, src, j] = keep_j[:, col].astype(np.uint8)
        probs = np.where(keep_j, pair_err_prob[:, slot_pairs], 0.0)
        p_e[:, j] = (1.0 - np.prod(1.0 - 2.0 * probs, axis=1)) / 2.0
        errs = np.where(keep_j, pair_err[:, slot_pairs], 0)
        e[:, j] = errs.sum(axis=1) % 2

    c = np.einsum("bk,bkn->bn", u, g_eff) % 2
    c = c.astype(np.uint8)
    c_hat = c ^ e

    es = fading.mean_snr  # N0 = 1, symbol energy swept through the gain variance
    if fading.mode == "block_iid":
        h = np.sqrt(es / 2.0) * (rng.standard_normal((batch, n))
                                 + 1j * rng.standard_normal((batch, n)))
    else:
        sources = sorted(set(code.v))
        hs = np.sqrt(es / 2.0) * (rng.standard_normal((batch, len(sources)))
                                  + 1j * rng.standard_normal((batch, len(sources))))
        col = {s: idx for idx, s in enumerate(sources)}
        h = hs[:, [col[code.v[j]] for j in range(n)]]
    w = np.sqrt(0.5) * (rng.standard_normal((batch, n))
                        + 1j * rng.standard_normal((batch, n)))
    s = 1.0 - 2.0 * c_hat
    y = h * s + w

    return RoundBatch(code=code, u=u, c=c, e=e, c_hat=c_hat, p_e=p_e, h=h, y=y,
                      g_eff=g_eff, pairs=pairs, pair_err_prob=pair_err_prob,
                      pair_err=pair_err, pair_kept=kept, error_free=genie)


def simulate_round(
    code: NetworkCode,
    u: Sequence[int] | BitVector,
    fading: FadingModel,
    snc: SncPolicy,
    rng: np.random.Generator,
    genie: bool = False,
) -> RoundObservation:
    """Simulate a single round for the given data vector."""
    if isinstance(u, BitVector):
        u_bits = u.to_list()
    else:
        u_bits = list(u)
    if len(u_bits) != code.k:
        raise ValueError(f"data vector length {len(u_bits)} != k={code.k}")
    b = simulate_rounds(code, fading, snc, rng, 1,
                        u=np.array([u_bits], dtype=np.uint8), genie=genie)
    return RoundObservation(
        code=code,
        u=BitVector.from_bits(b.u[0].tolist()),
        c=BitVector.from_bits(b.c[0].tolist()),
        e=BitVector.from_bits(b.e[0].tolist()),
        c_hat=BitVector.from_bits(b.c_hat[0].tolist()),
        p_e=b.p_e[0].tolist(),
        h=b.h[0].tolist(),
        y=b.y[0].tolist(),
        g_eff=BitMatrix.from_rows(b.g_eff[0].tolist(), code.n),
        pairs=b.pairs,
        pair_err_prob=b.pair_err_prob[0].tolist(),
        pair_err=b.pair_err[0].tolist(),
        pair_kept=b.pair_kept[0].tolist(),
        error_free=b.error_free,
    )
