"""Supervised entropy/MDL discretization of one feature against a binary label.

Bins are half-open ``[low, high)`` intervals covering the real line.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyInput, InputMismatch

# Splits whose weighted entropies differ by less than this are treated as tied.
TIE_TOL = 1e-12


@dataclass(frozen=True, order=True)
class Interval:
    low: float = -math.inf
    high: float = math.inf

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError(f"empty interval [{self.low}, {self.high})")

    def __contains__(self, value: float) -> bool:
        return self.low <= value < self.high

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.low) and math.isfinite(self.high)

    def __str__(self) -> str:
        lo = "-inf" if self.low == -math.inf else f"{self.low:g}"
        hi = "+inf" if self.high == math.inf else f"{self.high:g}"
        return f"[{lo}, {hi})"


@dataclass(frozen=True)
class FeatureBins:
    feature: str
    cuts: tuple[float, ...]
    gain: float
    # Cuts in the order the recursion accepted them; the first is the top-level split.
    accepted: tuple[float, ...] = ()

    @property
    def intervals(self) -> list[Interval]:
        edges = [-math.inf, *self.cuts, math.inf]
        return [Interval(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]


def shannon_entropy(labels: Sequence[bool]) -> float:
    """Entropy of a boolean label sequence, in bits."""
    n = len(labels)
    if n == 0:
        raise EmptyInput("entropy of an empty label set")
    return _binary_entropy(int(np.count_nonzero(labels)), n)


def _binary_entropy(pos: int, n: int) -> float:
    if pos == 0 or pos == n:
        return 0.0
    p = pos / n
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def _entropy_vec(pos: np.ndarray, n: np.ndarray) -> np.ndarray:
    p = pos / n
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(p * np.log2(p) + (1 - p) * np.log2(1 - p))
    return np.nan_to_num(h, nan=0.0)


def best_split(v: np.ndarray, y: np.ndarray, min_support: int) -> tuple[int, float] | None:
    """Best entropy-minimizing split of sorted ``v`` / aligned ``y``.

    Returns ``(k, weighted_entropy)`` where the split puts ``v[:k]`` left,
    or None when no admissible split exists. Candidates are class boundary
    points inside the support window plus the two window edges; interior
    points of a single-class run can never beat the run's endpoints.
    """
    n = len(v)
    lo, hi = max(min_support, 1), n - max(min_support, 1)
    if lo > hi:
        return None
    ks = np.flatnonzero(v[1:] != v[:-1]) + 1
    ks = ks[(ks >= lo) & (ks <= hi)]
    if len(ks) == 0:
        return None

    # Per distinct-value block: positive count and size.
    starts = np.concatenate(([0], np.flatnonzero(v[1:] != v[:-1]) + 1))
    sizes = np.diff(np.append(starts, n))
    block_pos = np.add.reduceat(y.astype(np.int64), starts)
    pure_pos = block_pos == sizes
    pure_neg = block_pos == 0
    # Boundary between block b-1 and b unless both are pure in the same class.
    b = np.searchsorted(starts, ks)
    same = (pure_pos[b - 1] & pure_pos[b]) | (pure_neg[b - 1] & pure_neg[b])
    same[[0, -1]] = False
    ks = ks[~same]

    cum = np.cumsum(y.astype(np.int64))
    total = int(cum[-1])
    left_pos = cum[ks - 1]
    e = (ks * _entropy_vec(left_pos, ks) + (n - ks) * _entropy_vec(total - left_pos, n - ks)) / n
    best = float(e.min())
    k = int(ks[np.flatnonzero(e <= best + TIE_TOL)[0]])
    return k, float(e[ks == k][0])


def mdl_accepts(y: np.ndarray, k: int) -> bool:
    """MDL stopping rule for splitting ``y`` (sorted by value) at position ``k``."""
    n = len(y)
    pos = int(np.count_nonzero(y))
    lpos = int(np.count_nonzero(y[:k]))
    ent = _binary_entropy(pos, n)
    ent1 = _binary_entropy(lpos, k)
    ent2 = _binary_entropy(pos - lpos, n - k)
    gain = ent - (k * ent1 + (n - k) * ent2) / n
    n_cls = lambda p, m: (p > 0) + (p < m)  # noqa: E731
    c, c1, c2 = n_cls(pos, n), n_cls(lpos, k), n_cls(pos - lpos, n - k)
    delta = math.log2(3**c - 2) - (c * ent - c1 * ent1 - c2 * ent2)
    return gain > (math.log2(n - 1) + delta) / n


def _midpoint(a: float, b: float) -> float:
    mid = (a + b) / 2.0
    # Adjacent floats: the midpoint may round onto ``a``, which would misplace it.
    return float(b) if mid <= a else float(mid)


def mdlp_bins(values, labels, min_support: int = 1, feature: str = "") -> FeatureBins:
    """Recursive entropy discretization with the MDL acceptance test.

    All-equal values or a pure label set give zero cuts and zero gain.
    """
    v = np.asarray(values, dtype=float)
    y = np.asarray(labels, dtype=bool)
    if v.shape != y.shape or v.ndim != 1:
        raise InputMismatch(f"{len(v)} values but {len(y)} labels")
    if len(v) == 0:
        raise EmptyInput("no values to discretize")
    order = np.argsort(v, kind="stable")
    v, y = v[order], y[order]

    accepted: list[float] = []
    bounds: list[int] = []
    stack = [(0, len(v))]
    while stack:
        a, b = stack.pop(0)
        seg_y = y[a:b]
        if not seg_y.any() or seg_y.all():
            continue
        found = best_split(v[a:b], seg_y, min_support)
        if found is None:
            continue
        k, _ = found
        if not mdl_accepts(seg_y, k):
            continue
        accepted.append(_midpoint(v[a + k - 1], v[a + k]))
        bounds.append(a + k)
        stack.extend([(a, a + k), (a + k, b)])

    cuts = tuple(sorted(accepted))
    edges = [0, *sorted(bounds), len(v)]
    parts = [(int(y[s:e].sum()), e - s) for s, e in zip(edges[:-1], edges[1:])]
    gain = _binary_entropy(int(y.sum()), len(y)) - sum(m * _binary_entropy(p, m) for p, m in parts) / len(y)
    return FeatureBins(feature, cuts, max(gain, 0.0) if cuts else 0.0, tuple(accepted))


def bin_of(bins: FeatureBins, value: float) -> Interval:
    """The interval of ``bins`` that contains ``value``."""
    i = bisect.bisect_right(bins.cuts, value)
    low = bins.cuts[i - 1] if i > 0 else -math.inf
    high = bins.cuts[i] if i < len(bins.cuts) else math.inf
    return Interval(low, high)


def default_min_support(n: int) -> int:
    return max(4, math.ceil(math.sqrt(n)))
