"""Destination-side decoding: exact per-bit MAP, sum-product message
passing on the Tanner graph of [G^T | I_n], and the genie/naive
reference modes.

LLR sign convention: positive favors bit 0 (ln p0/p1).  Batch functions
take a RoundBatch and return per-round arrays; thin single-round
wrappers accept a RoundObservation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import RoundBatch, RoundObservation
from .design import NetworkCode
from .gf2 import BitMatrix

__all__ = [
    "TannerGraph",
    "parity_check_matrix",
    "build_tanner_graph",
    "llr_chat",
    "channel_llr",
    "map_decode",
    "map_decode_batch",
    "sp_decode",
    "sp_decode_batch",
    "decode_with_mode",
    "decode_with_mode_batch",
    "MAP_SIZE_LIMIT",
]

# Exhaustive marginalization guard for the MAP rule.
MAP_SIZE_LIMIT = 26

# Message clamp applied ahead of the tanh rule so extreme reliabilities
# cannot overflow while leaving hard decisions untouched.
LLR_CLAMP = 40.0
_ATANH_EPS = 1e-15


def parity_check_matrix(code: NetworkCode) -> BitMatrix:
    """[G^T | I_n] over the combined codeword [u_1..u_k c_1..c_n]."""
    k, n = code.k, code.n
    masks = []
    for j in range(n):
        masks.append(code.G.column_mask(j) | (1 << (k + j)))
    return BitMatrix(tuple(masks), n, k + n)


@dataclass(frozen=True)
class TannerGraph:
    """Bipartite structure for sum-product decoding.

    Check j connects coded variable c_j (degree 1 there) and the source
    variables listed in check_sources[j].
    """

    k: int
    n: int
    check_sources: tuple[tuple[int, ...], ...]

    @property
    def num_variables(self) -> int:
        return self.k + self.n

    @property
    def num_checks(self) -> int:
        return self.n


def build_tanner_graph(code: NetworkCode) -> TannerGraph:
    k, n = code.k, code.n
    checks = tuple(
        tuple(i for i in range(k) if code.G.entry(i, j)) for j in range(n)
    )
    return TannerGraph(k, n, checks)


def llr_chat(y, h, noise):
    """Channel LLR of the transmitted (possibly relay-corrupted) bit."""
    if not noise > 0:
        raise ValueError("noise spectral density must be positive")
    return 4.0 * np.real(np.conj(h) * np.asarray(y)) / noise


def channel_llr(llr_chat_val, p_e):
    """LLR of the error-free coded bit given the relay error probability.

    Evaluates ln[(e^a e^b + 1) / (e^a + e^b)] with a = ln((1-p)/p),
    b = the raw channel LLR, in log-sum-exp form for stability.
    """
    b = np.asarray(llr_chat_val, dtype=float)
    p = np.asarray(p_e, dtype=float)
    if np.any((p < 0) | (p > 0.5)):
        raise ValueError("relay error probability must lie in [0, 1/2]")
    with np.errstate(divide="ignore"):
        a = np.log1p(-p) - np.log(p)  # +inf at p = 0
    exact = np.isinf(a)
    a_safe = np.where(exact, 0.0, a)
    out = np.where(
        exact,
        b,
        np.logaddexp(a_safe + b, 0.0) - np.logaddexp(a_safe, b),
    )
    if out.ndim == 0:
        return float(out)
    return out


def _check_batch(batch: RoundBatch, noise: float):
    if not noise > 0:
        raise ValueError("noise spectral density must be positive")
    if not np.all(np.isfinite(batch.y)) or not np.all(np.isfinite(batch.h)):
        raise ValueError("non-finite observation")


def map_decode_batch(batch: RoundBatch, code: NetworkCode, noise: float = 1.0,
                     with_llrs: bool = False):
    """Exact per-bit posteriors by marginalizing over data vectors and
    relay error patterns.

    Returns (posterior, decisions): posterior[b, i] = P(u_i = 1 | y),
    decisions by argmax with ties resolved to 0.  With `with_llrs` a
    third array ln P(u_i=0|y)/P(u_i=1|y) is appended (saturation-free).
    """
    k, n = code.k, code.n
    if k + n > MAP_SIZE_LIMIT:
        raise ValueError(f"k + n = {k + n} exceeds MAP guard {MAP_SIZE_LIMIT}")
    _check_batch(batch, noise)
    B = len(batch)
    L = llr_chat(batch.y, batch.h, noise)  # (B, n)

    # all 2^k data hypotheses
    M = 1 << k
    U = ((np.arange(M)[:, None] >> np.arange(k)[None, :]) & 1).astype(np.uint8)
    # codeword table per round under the instantaneous generator matrix
    cu = np.einsum("mk,bkn->bmn", U, batch.g_eff) % 2  # (B, M, n)
    sgn = 1.0 - 2.0 * cu

    p = batch.p_e[:, None, :]  # (B, 1, n)
    half = sgn * (L[:, None, :] / 2.0)
    # relay error marginalized per slot: (1-p) e^{+half} + p e^{-half}
    with np.errstate(divide="ignore"):
        log_ok = np.log1p(-p)
        log_err = np.log(p)
    term = np.logaddexp(log_ok + half, log_err - half)
    score = term.sum(axis=2)  # (B, M) log-likelihood up to a constant

    total = _logsumexp(score, axis=1)
    posterior = np.empty((B, k))
    llrs = np.empty((B, k))
    for i in range(k):
        mask = U[:, i] == 1
        ls1 = _logsumexp(score[:, mask], axis=1)
        posterior[:, i] = np.exp(ls1 - total)
        if with_llrs:
            llrs[:, i] = _logsumexp(score[:, ~mask], axis=1) - ls1
    decisions = (posterior > 0.5).astype(np.uint8)
    if with_llrs:
        return posterior, decisions, llrs
    return posterior, decisions


def _logsumexp(x, axis):
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    return (m + np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True))).squeeze(axis)


def map_decode(obs: RoundObservation, code: NetworkCode, noise: float = 1.0):
    """Single-round MAP; returns (posterior list, decision list)."""
    posterior, decisions = map_decode_batch(obs.to_batch(), code, noise)
    return posterior[0].tolist(), decisions[0].tolist()


def sp_decode_batch(
    batch: RoundBatch,
    code: NetworkCode,
    noise: float = 1.0,
    iters: int = 4,
):
    """Sum-product decoding with a flooding schedule and a fixed number
    of iterations (no early termination).

    Coded variables have degree 1, so their messages into the checks are
    the composite channel LLRs and never change.  Returns
    (posterior_llrs, decisions); ties (LLR exactly 0) decide 0.
    """
    _check_batch(batch, noise)
    k = code.k
    L = llr_chat(batch.y, batch.h, noise)          # (B, n)
    lam = channel_llr(L, batch.p_e)                # (B, n)
    lam = np.clip(lam, -LLR_CLAMP, LLR_CLAMP)
    t_lam = np.tanh(lam / 2.0)                     # fixed c_j -> check_j factor

    A = batch.g_eff.astype(bool).transpose(0, 2, 1)  # (B, n, k) check adjacency
    m_vc = np.zeros_like(A, dtype=float)             # source -> check messages
    m_cv = np.zeros_like(m_vc)                       # check -> source messages
    for _ in range(iters):
        t = np.where(A, np.tanh(np.clip(m_vc, -LLR_CLAMP, LLR_CLAMP) / 2.0), 1.0)
        # product over sources excluding the target, via prefix/suffix scans
        pre = np.ones_like(t)
        suf = np.ones_like(t)
        np.cumprod(t[:, :, :-1], axis=2, out=pre[:, :, 1:])
        np.cumprod(t[:, :, :0:-1], axis=2, out=suf[:, :, -2::-1])
        excl = pre * suf
        prod = np.clip(t_lam[:, :, None] * excl, -1 + _ATANH_EPS, 1 - _ATANH_EPS)
        m_cv = np.where(A, 2.0 * np.arctanh(prod), 0.0)
        total = m_cv.sum(axis=1, keepdims=True)      # per-source sum over checks
        m_vc = np.where(A, total - m_cv, 0.0)
    posterior_llrs = m_cv.sum(axis=1)                # (B, k); source channel LLR is 0
    decisions = (posterior_llrs < 0).astype(np.uint8)
    return posterior_llrs, decisions


def sp_decode(obs: RoundObservation, code: NetworkCode, noise: float = 1.0,
              iters: int = 4):
    """Single-round sum-product; returns (posterior LLR list, decision list)."""
    llrs, decisions = sp_decode_batch(obs.to_batch(), code, noise, iters)
    return llrs[0].tolist(), decisions[0].tolist()


DECODE_MODES = ("optimal", "genie", "naive")
DECODERS = ("map", "sp")


def decode_with_mode_batch(
    batch: RoundBatch,
    code: NetworkCode,
    noise: float = 1.0,
    mode: str = "optimal",
    decoder: str = "map",
    sp_iters: int = 4,
) -> np.ndarray:
    """Decode a batch under one of the reference modes.

    optimal: use the true reliabilities.  naive: pretend the relays never
    err (reliabilities zeroed at the decoder only).  genie: requires a
    batch simulated without relay errors.
    """
    if mode not in DECODE_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if decoder not in DECODERS:
        raise ValueError(f"unknown decoder {decoder!r}")
    if mode == "genie":
        if not batch.error_free:
            raise ValueError("genie mode requires an error-free realization")
    elif mode == "naive":
        batch = RoundBatch(**{**batch.__dict__, "p_e": np.zeros_like(batch.p_e)})
    if decoder == "map":
        _, decisions = map_decode_batch(batch, code, noise)
    else:
        _, decisions = sp_decode_batch(batch, code, noise, sp_iters)
    return decisions


def decode_with_mode(obs: RoundObservation, code: NetworkCode, noise: float = 1.0,
                     mode: str = "optimal", decoder: str = "map",
                     sp_iters: int = 4) -> list[int]:
    return decode_with_mode_batch(obs.to_batch(), code, noise, mode, decoder,
                                  sp_iters)[0].tolist()
