"""Structures for the approximation scheme: size rounding, the breakpoint
staircase of the cost table, windows, and bin configurations."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import CostFunction, Instance
from .errors import SolverLimitError


def check_eps(eps: Fraction) -> int:
    """The scheme accepts accuracies 1/k for integer k >= 3; returns k."""
    eps = Fraction(eps)
    if eps.numerator != 1 or eps.denominator < 3:
        raise ValueError("eps must be 1/k for an integer k >= 3")
    return eps.denominator


@dataclass(frozen=True)
class GroupingResult:
    """Outcome of size rounding on the large items (indices into the instance).

    ``l1`` is the class of largest items, packed one per bin and never
    rounded.  Every other large item gets ``rounded_size[i] >= size[i]``, the
    maximum of its class.  ``classes`` lists the groups largest-first.
    """

    large: tuple[int, ...]
    l1: tuple[int, ...]
    classes: tuple[tuple[int, ...], ...]
    rounded_size: dict[int, Fraction]

    @property
    def l_rest(self) -> tuple[int, ...]:
        return tuple(i for i in self.large if i not in set(self.l1))


def linear_grouping(inst: Instance, eps: Fraction) -> GroupingResult:
    """Group the items of size >= eps into 1/eps^3 classes and round each
    class (except the first) up to its maximum size.

    Below 1/eps^3 large items, every item forms its own class and no rounding
    happens.
    """
    k = check_eps(eps)
    large = tuple(i for i, s in enumerate(inst.sizes) if s >= eps)
    m = k**3
    if len(large) < m:
        classes = tuple((i,) for i in large)
        rounded = {i: inst.sizes[i] for i in large}
        return GroupingResult(large, (), classes, rounded)
    count = len(large)
    base, extra = divmod(count, m)
    # first `extra` classes get the larger size; class sizes are non-increasing
    classes: list[tuple[int, ...]] = []
    pos = 0
    for j in range(m):
        width = base + (1 if j < extra else 0)
        classes.append(large[pos : pos + width])
        pos += width
    rounded: dict[int, Fraction] = {}
    for j, cls in enumerate(classes):
        if j == 0:
            for i in cls:
                rounded[i] = inst.sizes[i]
        else:
            top = inst.sizes[cls[0]]  # class maximum: items sorted non-increasing
            for i in cls:
                rounded[i] = top
    return GroupingResult(large, classes[0], tuple(classes), rounded)


@dataclass(frozen=True)
class SmallSplit:
    """Partition of the small items into the LP part and the tail packed apart.

    ``tail`` is the maximal suffix of smallest items whose total size stays
    at most 1 + h_eps; ``kept`` are the remaining (larger) small items.
    """

    kept: tuple[int, ...]
    tail: tuple[int, ...]
    h_eps: int


def split_small(inst: Instance, eps: Fraction, h_eps: int, small: tuple[int, ...]) -> SmallSplit:
    """Split ``small`` (indices sorted by non-increasing size) at the maximal
    suffix of total size <= 1 + h_eps."""
    k = check_eps(eps)
    if h_eps < k or h_eps != int(h_eps):
        raise ValueError("h_eps must be an integer >= 1/eps")
    bound = Fraction(1 + h_eps)
    total = Fraction(0)
    cut = 0  # number of suffix items taken
    for pos in range(len(small) - 1, -1, -1):
        total += inst.sizes[small[pos]]
        if total > bound:
            break
        cut += 1
    tail = small[len(small) - cut :]
    kept = small[: len(small) - cut]
    return SmallSplit(kept, tail, h_eps)


@dataclass(frozen=True)
class Staircase:
    """Breakpoints 0 = k_0 < ... < k_len = n with slowly growing cost.

    The first 1/eps breakpoints are 0, 1, ..., 1/eps; afterwards each
    breakpoint is the largest integer whose cost is within a (1 + eps)
    factor of the previous one.
    """

    ks: tuple[int, ...]
    f_at: tuple[float, ...]

    @property
    def ell(self) -> int:
        return len(self.ks) - 1


def build_staircase(f: CostFunction, eps: Fraction, n: int) -> Staircase:
    k = check_eps(eps)
    if n < 1:
        raise ValueError("n must be >= 1")
    if n <= k:
        ks = list(range(n + 1))
        return Staircase(tuple(ks), tuple(f.value(q) for q in ks))
    ks = list(range(k + 1))
    grow = 1.0 + 1.0 / k
    while ks[-1] < n:
        cur = ks[-1]
        bound = grow * f.value(cur) + 1e-12
        # cur + 1 always qualifies (concavity); extend as far as possible
        t = cur + 1
        while t < n and f.value(t + 1) <= bound:
            t += 1
        ks.append(t)
    return Staircase(tuple(ks), tuple(f.value(q) for q in ks))


@dataclass(frozen=True, order=True)
class Window:
    """Reserved room for small items in a bin: a size bound that is a power
    of 1/(1+eps), and a count bound that is a staircase breakpoint."""

    t: int  # size = (1+eps) ** -t
    a: int  # count bound = staircase ks[a]
    w: Fraction
    kappa: int

    def dominates(self, other: "Window") -> bool:
        return self.w >= other.w and self.kappa >= other.kappa


def power_of_one_plus_eps(eps: Fraction, t: int) -> Fraction:
    k = eps.denominator
    return Fraction(k**t, (k + 1) ** t)


def round_size_to_power(eps: Fraction, s: Fraction) -> tuple[Fraction, int]:
    """Largest (1+eps)**-t that is <= s; returns (value, t)."""
    if s <= 0 or s > 1:
        raise ValueError("size must be in (0, 1]")
    t = 0
    val = Fraction(1)
    step = Fraction(eps.denominator, eps.denominator + 1)
    while val > s:
        val *= step
        t += 1
    return val, t


def build_windows(eps: Fraction, s_min_small: Fraction, staircase: Staircase) -> list[Window]:
    """Full grid of windows for a rounded minimum small size."""
    check_eps(eps)
    if s_min_small <= 0:
        raise ValueError("s_min_small must be positive")
    _, t_star = round_size_to_power(eps, s_min_small)
    out = []
    for t in range(t_star + 2):
        w = power_of_one_plus_eps(eps, t)
        for a in range(staircase.ell + 1):
            out.append(Window(t, a, w, staircase.ks[a]))
    return out


@dataclass(frozen=True)
class Configuration:
    """Multiset of rounded large sizes fitting one bin; counts align with the
    (descending) size list of the enumeration."""

    counts: tuple[int, ...]
    total_size: Fraction
    n_items: int

    @property
    def empty(self) -> bool:
        return self.n_items == 0


@dataclass(frozen=True)
class ExtendedConfiguration:
    """A configuration plus the staircase index p of the cost it will pay."""

    config: Configuration
    p: int
    k_p: int


@dataclass(frozen=True)
class GeneralizedConfiguration:
    ext: ExtendedConfiguration
    window: Window


def main_window(
    ext: ExtendedConfiguration,
    eps: Fraction,
    t_max: int,
    staircase: Staircase,
) -> Window:
    """Canonical window of an extended configuration.

    Size part: the smallest grid power of 1/(1+eps) that still covers the
    free space left by the configuration.  Count part: the smallest
    breakpoint at least k_p minus the number of large items.
    """
    return _main_window_values(
        ext.config.total_size,
        ext.k_p - ext.config.n_items,
        eps,
        t_max,
        staircase,
    )


def _main_window_values(
    total_size: Fraction, need: int, eps: Fraction, t_max: int, staircase: Staircase
) -> Window:
    free = 1 - total_size
    t = 0
    val = Fraction(1)
    step = Fraction(eps.denominator, eps.denominator + 1)
    while t < t_max and val * step >= free:
        val *= step
        t += 1
    a = next(j for j, kj in enumerate(staircase.ks) if kj >= need)
    return Window(t, a, val, staircase.ks[a])


class MainWindowCache:
    """Main windows depend on the configuration only through its total size
    and residual item budget; caching by that pair collapses the per-config
    enumeration cost."""

    def __init__(self, eps: Fraction, t_max: int, staircase: Staircase):
        self.eps = eps
        self.t_max = t_max
        self.staircase = staircase
        self._cache: dict[tuple[Fraction, int], Window] = {}

    def of(self, ext: ExtendedConfiguration) -> Window:
        key = (ext.config.total_size, ext.k_p - ext.config.n_items)
        got = self._cache.get(key)
        if got is None:
            got = _main_window_values(
                key[0], key[1], self.eps, self.t_max, self.staircase
            )
            self._cache[key] = got
        return got


def enumerate_configurations(
    sizes: list[Fraction],
    multiplicity: list[int],
    max_items: int,
    budget: int = 200_000,
) -> list[Configuration]:
    """All multisets over the given sizes with total size <= 1 and at most
    ``max_items`` items, respecting multiplicities.  Sizes must be positive.

    Raises SolverLimitError when the enumeration exceeds ``budget``.
    """
    out: list[Configuration] = []
    counts = [0] * len(sizes)
    # smallest size at or after each position, to cut dead branches early
    min_suffix: list[Fraction] = [Fraction(2)] * (len(sizes) + 1)
    for idx in range(len(sizes) - 1, -1, -1):
        min_suffix[idx] = min(sizes[idx], min_suffix[idx + 1])

    def rec(idx: int, room: Fraction, left: int) -> None:
        if len(out) > budget:
            raise SolverLimitError("configuration enumeration budget exceeded")
        if idx == len(sizes) or left == 0 or room < min_suffix[idx]:
            out.append(
                Configuration(tuple(counts), Fraction(1) - room, max_items - left)
            )
            return
        s = sizes[idx]
        max_take = min(multiplicity[idx], left, int(room / s))
        saved = counts[idx]
        for take in range(max_take + 1):
            counts[idx] = take
            rec(idx + 1, room - take * s, left - take)
        counts[idx] = saved

    rec(0, Fraction(1), max_items)
    return out
