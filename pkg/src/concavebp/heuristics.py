"""Cost-oblivious packing heuristics and combinatorial lower bounds.

All heuristics here place items without looking at the cost function, so a
single packing can be priced under any concave bin-cost table afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import Instance, Packing, SizeLike, make_fq, to_size

_PI_MAX_COUNT = 32


def pi_sequence(count: int) -> list[int]:
    """First ``count`` terms of the sequence 2, 3, 7, 43, ... (p' = p(p-1)+1)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if count > _PI_MAX_COUNT:
        raise ValueError(
            f"refusing to expand {count} terms; growth is doubly exponential"
        )
    terms = [2]
    while len(terms) < count:
        p = terms[-1]
        terms.append(p * (p - 1) + 1)
    return terms


_pi_cache = [2]


def _is_pi_minus_one(k: int) -> bool:
    # k is of the form pi_i - 1 for some i (1, 2, 6, 42, 1806, ...)
    while _pi_cache[-1] - 1 < k:
        p = _pi_cache[-1]
        _pi_cache.append(p * (p - 1) + 1)
    return any(p - 1 == k for p in _pi_cache)


def weight(p: SizeLike) -> Fraction:
    """Size-based item weight used in bin-count accounting.

    With k the unique integer such that p is in (1/(k+1), 1/k]: returns 1/k
    when k+1 is a term of the pi sequence, otherwise ((k+1)/k) * p.
    """
    p = to_size(p)
    if p < 0 or p > 1:
        raise ValueError("weight argument must be in [0, 1]")
    if p == 0:
        return Fraction(0)
    k = (1 / p).__floor__()
    if _is_pi_minus_one(k):
        return Fraction(1, k)
    return Fraction(k + 1, k) * p


@dataclass(frozen=True)
class WeightTable:
    """Convenience bundle of pi-sequence terms plus the weight rule."""

    pi_terms: tuple[int, ...]

    @classmethod
    def build(cls, count: int) -> "WeightTable":
        return cls(tuple(pi_sequence(count)))

    def weight(self, p: SizeLike) -> Fraction:
        return weight(p)


def _ordered_indices(inst: Instance, order: str) -> list[int]:
    # Stored order is non-increasing; equal sizes keep lowest index first, so
    # reversing treats the lowest index as the larger item.
    if order in ("decreasing", "given"):
        return list(range(inst.n))
    if order == "increasing":
        return list(range(inst.n - 1, -1, -1))
    raise ValueError(f"unknown order {order!r}")


def next_fit(inst: Instance, order: str = "increasing") -> Packing:
    """Next-fit: keep a single open bin, close it when an item does not fit."""
    bins: list[list[int]] = []
    load = Fraction(2)  # force a fresh bin on the first item
    for i in _ordered_indices(inst, order):
        s = inst.sizes[i]
        if load + s <= 1:
            bins[-1].append(i)
            load += s
        else:
            bins.append([i])
            load = s
    return Packing.from_bins(bins, range(inst.n))


def first_fit(inst: Instance, order: str = "increasing") -> Packing:
    """First-fit: place each item in the lowest-indexed bin it fits in."""
    bins: list[list[int]] = []
    loads: list[Fraction] = []
    for i in _ordered_indices(inst, order):
        s = inst.sizes[i]
        for b, load in enumerate(loads):
            if load + s <= 1:
                bins[b].append(i)
                loads[b] += s
                break
        else:
            bins.append([i])
            loads.append(s)
    return Packing.from_bins(bins, range(inst.n))


def best_fit(inst: Instance, order: str = "increasing") -> Packing:
    """Best-fit: place each item in a fullest bin that still has room."""
    bins: list[list[int]] = []
    loads: list[Fraction] = []
    for i in _ordered_indices(inst, order):
        s = inst.sizes[i]
        best = -1
        for b, load in enumerate(loads):
            if load + s <= 1 and (best < 0 or load > loads[best]):
                best = b
        if best < 0:
            bins.append([i])
            loads.append(s)
        else:
            bins[best].append(i)
            loads[best] += s
    return Packing.from_bins(bins, range(inst.n))


def nfi(inst: Instance) -> Packing:
    return next_fit(inst, "increasing")


def nfd(inst: Instance) -> Packing:
    return next_fit(inst, "decreasing")


def greedy_half_matching(inst: Instance) -> list[tuple[int, int]]:
    """Greedy maximum-weight matching between the smallest half of the
    above-1/2 items and the small items.

    Both queues run largest-first on the small side and smallest-first on the
    large side; an unmatched head small item fits no remaining large item and
    is dropped.  Returns (large index, small index) pairs.
    """
    n = inst.n
    t = sum(1 for s in inst.sizes if s > Fraction(1, 2))
    m0 = list(range(t - (t + 1) // 2, t))
    smalls = list(range(t, n))
    pairs: list[tuple[int, int]] = []
    qi = len(m0) - 1  # head = smallest item of m0 (highest index)
    qj = 0  # head = largest small item (lowest index)
    while qi >= 0 and qj < len(smalls):
        i, j = m0[qi], smalls[qj]
        if inst.sizes[i] + inst.sizes[j] <= 1:
            pairs.append((i, j))
            qi -= 1
            qj += 1
        else:
            qj += 1
    return pairs


def match_half(inst: Instance) -> Packing:
    """Pre-match up to half of the items larger than 1/2 with one small item
    each, then pack the rest with next-fit increasing."""
    n = inst.n
    pairs = greedy_half_matching(inst)
    matched = {i for pair in pairs for i in pair}
    rest = [s for i, s in enumerate(inst.sizes) if i not in matched]
    rest_index = [i for i in range(n) if i not in matched]
    sub = Instance.from_values(rest)  # same order: sizes already sorted
    sub_packing = next_fit(sub, "increasing")
    bins = [list(p) for p in pairs]
    bins += [[rest_index[i] for i in b] for b in sub_packing.bins]
    return Packing.from_bins(bins, range(n))


@dataclass(frozen=True)
class OverflowedPartition:
    """Consecutive partition whose closed bins all exceed capacity.

    Not a feasible packing (``feasible`` is always False); used only to price
    lower bounds.
    """

    bins: tuple[tuple[int, ...], ...]
    feasible: bool = False


def overflowed_packing(inst: Instance) -> OverflowedPartition:
    """Partition items (smallest first) into minimal prefixes of total > 1.

    The last bin holds whatever remains and may be feasible.
    """
    bins: list[tuple[int, ...]] = []
    cur: list[int] = []
    load = Fraction(0)
    for i in range(inst.n - 1, -1, -1):  # non-decreasing size order
        cur.append(i)
        load += inst.sizes[i]
        if load > 1:
            bins.append(tuple(cur))
            cur = []
            load = Fraction(0)
    if cur:
        bins.append(tuple(cur))
    return OverflowedPartition(tuple(bins))


def lower_bound_fk(inst: Instance, k: int) -> float:
    """Lower bound on the optimum under the capped-linear cost with cap k:
    the cost of the overflowed partition."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if inst.n == 0:
        return 0.0
    f = make_fq(k, inst.n)
    part = overflowed_packing(inst)
    return sum(f.value(len(b)) for b in part.bins)
