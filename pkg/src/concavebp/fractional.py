"""Fractional next-fit-increasing: the optimal fractional packer.

Items are processed from smallest to largest and every bin is filled to a
total size of exactly 1 (the boundary item is split), so the packing it
produces costs no more than any other fractional packing, simultaneously for
every valid concave cost table.  The cost argument accepted by the public
functions exists only for interface symmetry and is ignored.
"""
from __future__ import annotations

from fractions import Fraction

from .core import CostFunction, FractionalPacking, Instance, Packing


def fnfi(inst: Instance, f: CostFunction | None = None) -> FractionalPacking:
    """Pack items smallest-first, filling each bin to exactly total size 1.

    Zero-size items take no space and land in the first bin.  At most two
    split items per bin, at most (bins - 1) split items overall, and bins come
    out sorted by non-increasing fraction count.
    """
    del f  # packing shape is cost-oblivious
    n = inst.n
    bins: list[list[tuple[int, Fraction]]] = []
    if n == 0:
        return FractionalPacking.from_bins(bins, ())
    cur: list[tuple[int, Fraction]] = []
    room = Fraction(1)
    for i in range(n - 1, -1, -1):  # non-decreasing size order
        size = inst.sizes[i]
        remaining = Fraction(1)  # fraction of item i still unplaced
        while remaining > 0:
            take_size = remaining * size
            if take_size <= room:
                cur.append((i, remaining))
                room -= take_size
                remaining = Fraction(0)
                if room == 0:
                    bins.append(cur)
                    cur = []
                    room = Fraction(1)
            else:
                placed = room / size  # size > 0 here, else take_size == 0 <= room
                cur.append((i, placed))
                remaining -= placed
                bins.append(cur)
                cur = []
                room = Fraction(1)
    if cur:
        bins.append(cur)
    return FractionalPacking.from_bins(bins, range(n))


def split_items(p: FractionalPacking) -> list[int]:
    """Items that have parts in more than one bin."""
    count: dict[int, int] = {}
    for b in p.bins:
        for i, _ in b:
            count[i] = count.get(i, 0) + 1
    return sorted(i for i, c in count.items() if c > 1)


def fnfi_with_split_repair(inst: Instance, f: CostFunction | None = None) -> Packing:
    """Integral packing: fnfi, with every split item moved to its own bin."""
    frac = fnfi(inst, f)
    split = set(split_items(frac))
    bins = [[i for i, _ in b if i not in split] for b in frac.bins]
    bins = [b for b in bins if b]
    bins.extend([i] for i in sorted(split))
    return Packing.from_bins(bins, range(inst.n))
