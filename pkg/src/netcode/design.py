"""Network code construction and analysis.

A network code is a (k, n) generator matrix over GF(2) together with a
transmit schedule assigning one source node to each slot.  Per-source
minimum distances (the separation vector) drive all diversity claims, so
they are computed exactly by enumerating error data vectors.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .gf2 import BitMatrix, column_select, is_systematic_prefix

__all__ = [
    "NetworkCode",
    "TradeoffPoint",
    "separation_vector",
    "greedy_code",
    "code_for_requirements",
    "puncture",
    "default_schedule",
    "validate_schedule",
    "repetition_baseline",
    "repetition_code",
    "rate_advantage",
    "network_code",
]

# Exhaustive 2^(k-1) enumeration per source symbol; beyond this the
# memory/time for the codeword table is unreasonable.
MAX_SEP_DIMENSION = 28


def separation_vector(G: BitMatrix) -> tuple[int, ...]:
    """Per-source minimum distances of the code generated by G.

    d[i] is the minimum Hamming weight of uG over all data vectors u
    with u[i] = 1.  Enumerates all 2^k codewords (vectorized).
    """
    k, n = G.rows, G.cols
    if k == 0:
        return ()
    if k > MAX_SEP_DIMENSION:
        raise ValueError(f"dimension {k} exceeds practical limit {MAX_SEP_DIMENSION}")
    for i, m in enumerate(G.row_masks):
        if m == 0:
            raise ValueError(f"row {i} is all-zero; separation undefined")
    # cw[j] = codeword for the data vector whose bits are the bits of j
    cw = np.zeros(1, dtype=np.uint64)
    for m in G.row_masks:
        cw = np.concatenate([cw, cw ^ np.uint64(m)])
    w = np.bitwise_count(cw)
    d = []
    for i in range(k):
        # indices with bit i set form the upper halves of blocks of 2^(i+1)
        blocks = w.reshape(-1, 1 << (i + 1))
        d.append(int(blocks[:, (1 << i):].min()))
    return tuple(d)


def _rref(masks: list[int]) -> tuple[list[int], list[int]]:
    """Reduced row echelon form over GF(2), pivoting on the highest set bit.

    Returns (reduced masks sorted by descending pivot, pivot bit positions).
    """
    basis: list[int] = []
    for m in masks:
        basis.append(m)
    # eliminate top-down
    reduced: list[int] = []
    for m in basis:
        for r in reduced:
            if m & (1 << (r.bit_length() - 1)):
                m ^= r
        if m:
            # clear this pivot from earlier rows
            p = 1 << (m.bit_length() - 1)
            reduced = [r ^ m if r & p else r for r in reduced]
            reduced.append(m)
    reduced.sort(key=int.bit_length, reverse=True)
    pivots = [r.bit_length() - 1 for r in reduced]
    return reduced, pivots


def _coset_rep(x: int, rref_rows: list[int]) -> int:
    """Canonical representative of x modulo the span of rref_rows."""
    for r in rref_rows:
        if x & (1 << (r.bit_length() - 1)):
            x ^= r
    return x


def greedy_code(n: int, d: int) -> BitMatrix:
    """Binary lexicode of length n and minimum distance >= d.

    Vectors are admitted greedily in lexicographic order, starting from
    zero, whenever their distance to every previously admitted vector is
    at least d; the admitted set is linear and the returned rows are its
    basis in admission order.  Ordering follows the packed-int
    convention (coordinate 0 least significant), i.e. plain integer
    order on the masks; the mirror-image enumeration yields the
    column-reversed, equivalent code.
    """
    if not (n >= d >= 1):
        raise ValueError(f"require n >= d >= 1, got n={n}, d={d}")
    basis: list[int] = []
    rref: list[int] = []
    for p in range(n):
        # Any new basis vector with most significant bit p is 2^p + r with
        # r in [0, 2^p).  It is admitted iff its coset modulo the current
        # span contains no vector of weight <= d-2 (codewords all live
        # below bit p, which contributes weight 1 on its own).
        t = d - 1  # required minimum coset weight over the low p bits
        covered = {0} if t >= 1 else set()
        for ww in range(1, t):
            for pos in combinations(range(p), ww):
                v = 0
                for b in pos:
                    v |= 1 << b
                covered.add(_coset_rep(v, rref))
        rank = len(rref)
        if len(covered) == 1 << (p - rank):
            continue  # every coset contains a low-weight vector
        r = 0
        limit = 1 << p
        while r < limit:
            if _coset_rep(r, rref) not in covered:
                break
            r += 1
        else:
            continue
        b = (1 << p) | r
        basis.append(b)
        rref, _ = _rref(rref + [b])
    return BitMatrix(tuple(basis), len(basis), n)


def _systematize(G: BitMatrix) -> BitMatrix:
    """Row-reduce (and column-permute if needed) to [I_k | P] form.

    Column permutation preserves length, dimension, and the separation
    vector as computed per basis row.
    """
    k, n = G.rows, G.cols
    masks = list(G.row_masks)
    pivots: list[int] = []
    rows_done: list[int] = []
    remaining = masks
    for col in range(n):
        bit = 1 << col
        hit = None
        for idx, m in enumerate(remaining):
            if m & bit:
                hit = idx
                break
        if hit is None:
            continue
        piv = remaining.pop(hit)
        rows_done = [r ^ piv if r & bit else r for r in rows_done]
        remaining = [r ^ piv if r & bit else r for r in remaining]
        rows_done.append(piv)
        pivots.append(col)
        if len(pivots) == k:
            break
    if len(pivots) < k:
        raise ValueError("rows are linearly dependent; cannot systematize")
    order = pivots + [j for j in range(n) if j not in pivots]
    return column_select(BitMatrix(tuple(rows_done), k, n), order)


def default_schedule(G: BitMatrix) -> tuple[int, ...]:
    """Schedule with systematic slots owned by their sources and combined
    slots balanced across eligible transmitters (ties to the lowest index)."""
    if not is_systematic_prefix(G):
        raise ValueError("generator matrix is not systematic in its first k columns")
    k, n = G.rows, G.cols
    counts = [1] * k  # each source transmits its own systematic slot
    v = list(range(1, k + 1))
    for j in range(k, n):
        candidates = [i for i in range(k) if G.entry(i, j)]
        if not candidates:
            raise ValueError(f"column {j} is all-zero")
        pick = min(candidates, key=lambda i: (counts[i], i))
        counts[pick] += 1
        v.append(pick + 1)
    return tuple(v)


@dataclass(frozen=True)
class NetworkCode:
    """A (k, n) generator matrix with its transmit schedule."""

    G: BitMatrix
    v: tuple[int, ...]
    _sep_cache: list = field(default_factory=list, repr=False, compare=False)

    @property
    def k(self) -> int:
        return self.G.rows

    @property
    def n(self) -> int:
        return self.G.cols

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.n)

    @property
    def sep(self) -> tuple[int, ...]:
        """Separation vector; computed once and cached."""
        if not self._sep_cache:
            self._sep_cache.append(separation_vector(self.G))
        return self._sep_cache[0]

    def to_json_dict(self) -> dict:
        flat = [b for row in self.G.to_lists() for b in row]
        return {"k": self.k, "n": self.n, "G": flat, "v": list(self.v),
                "sep": list(self.sep)}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "NetworkCode":
        k, n = int(obj["k"]), int(obj["n"])
        flat = obj["G"]
        if len(flat) != k * n:
            raise ValueError("G array length does not match k*n")
        rows = [flat[i * n:(i + 1) * n] for i in range(k)]
        return network_code(BitMatrix.from_rows(rows, n), tuple(int(x) for x in obj["v"]))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "NetworkCode":
        return cls.from_json_dict(json.loads(text))


def network_code(G: BitMatrix, v: Sequence[int]) -> NetworkCode:
    if len(v) != G.cols:
        raise ValueError("schedule length must equal the number of slots")
    return NetworkCode(G, tuple(int(x) for x in v))


def validate_schedule(code: NetworkCode) -> tuple[bool, list[str]]:
    """Check all structural invariants; returns (ok, violations)."""
    G, v = code.G, code.v
    k, n = G.rows, G.cols
    violations: list[str] = []
    for i, m in enumerate(G.row_masks):
        if m == 0:
            violations.append(f"row {i} of G is all-zero")
    for j in range(n):
        if not 1 <= v[j] <= k:
            violations.append(f"slot {j}: transmitter {v[j]} outside 1..{k}")
            continue
        if not G.entry(v[j] - 1, j):
            violations.append(f"slot {j}: transmitter {v[j]} has a zero encoding coefficient")
        for i in range(k):
            if i == v[j] - 1 or not G.entry(i, j):
                continue
            heard = any(v[m] == i + 1 and G.entry(i, m) for m in range(j))
            if not heard:
                violations.append(
                    f"slot {j}: causality violation, source {i + 1} not yet transmitted")
    return (not violations, violations)


def greedy_dimension(n: int, d: int) -> int:
    return greedy_code(n, d).rows


def code_for_requirements(k: int, d: int) -> NetworkCode:
    """Smallest-length greedy code covering k sources at distance d."""
    if k < 1 or d < 1:
        raise ValueError("require k >= 1 and d >= 1")
    for n in range(max(k, d), k * d + 1):
        B = greedy_code(n, d)
        if B.rows < k:
            continue
        dropped = B.rows > k
        G = BitMatrix(B.row_masks[:k], k, n)
        G = _systematize(G)
        code = network_code(G, default_schedule(G))
        if dropped and min(code.sep) < d:
            continue
        return code
    raise RuntimeError("unreachable: repetition bound guarantees n <= k*d")


def puncture(code: NetworkCode, drop: Sequence[int]) -> NetworkCode:
    """Remove the given columns (and schedule entries)."""
    dropset = set()
    for j in drop:
        if not 0 <= j < code.n:
            raise ValueError(f"column index {j} out of range")
        if j in dropset:
            raise ValueError(f"duplicate column index {j}")
        dropset.add(j)
    keep = [j for j in range(code.n) if j not in dropset]
    G = column_select(code.G, keep)
    for i, m in enumerate(G.row_masks):
        if m == 0:
            raise ValueError(f"puncturing leaves row {i} all-zero")
    return network_code(G, tuple(code.v[j] for j in keep))


@dataclass(frozen=True)
class TradeoffPoint:
    """Rate plus separation-vector statistics of one code."""

    rate: Fraction
    d_min: int
    d_max: int
    d_avg: float


def repetition_baseline(k: int, n: int) -> TradeoffPoint:
    """Each source repeats its own symbol; no cooperation."""
    if n < k:
        raise ValueError(f"need at least one slot per source (k={k}, n={n})")
    reps = [n // k + (1 if i < n % k else 0) for i in range(k)]
    return TradeoffPoint(Fraction(k, n), min(reps), max(reps), sum(reps) / k)


def repetition_code(k: int, n: int) -> NetworkCode:
    """Generator/schedule realization of the repetition baseline."""
    if n < k:
        raise ValueError(f"need at least one slot per source (k={k}, n={n})")
    reps = [n // k + (1 if i < n % k else 0) for i in range(k)]
    cols: list[int] = list(range(1, k + 1))
    for i in range(k):
        cols.extend([i + 1] * (reps[i] - 1))
    # order extra slots round-robin after the systematic prefix
    extra = []
    remaining = [reps[i] - 1 for i in range(k)]
    while any(remaining):
        for i in range(k):
            if remaining[i]:
                extra.append(i + 1)
                remaining[i] -= 1
    v = tuple(list(range(1, k + 1)) + extra)
    masks = [0] * k
    for j, src in enumerate(v):
        masks[src - 1] |= 1 << j
    return network_code(BitMatrix(tuple(masks), k, n), v)


def rate_advantage(k: int, d: int) -> float:
    """Rate of the smallest greedy design relative to repetition (rate 1/d)."""
    if k < 1 or d < 1:
        raise ValueError("require k >= 1 and d >= 1")
    code = code_for_requirements(k, d)
    return float(Fraction(k, code.n) / Fraction(1, d))
