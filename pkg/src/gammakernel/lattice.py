"""Exact combinatorics of the half-integer lattice Z' = Z + 1/2.

Provides half-integer points, Young diagrams with modified Frobenius
coordinates, finite configurations, Maya diagrams (as finite symmetric
differences with the negative half-lattice Z'_-), the particle/hole
involution, and the finitary permutation group generated by the adjacent
transpositions sigma_n of the pair (n - 1/2, n + 1/2).

All arithmetic in this module is exact: half-integers store twice their value
as a Python int and dimension ratios are Fractions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from math import factorial
from typing import Iterable, Iterator, Sequence

__all__ = [
    "HalfInt",
    "Partition",
    "FiniteConfig",
    "MayaDiagram",
    "FinitaryPermutation",
    "to_maya",
    "to_balanced_config",
    "from_balanced_config",
    "particle_hole_involution",
    "apply_sigma",
    "apply_sigma_modified",
    "dim_ratio",
    "partitions_of",
    "partitions_up_to",
]


@total_ordering
@dataclass(frozen=True)
class HalfInt:
    """A point of Z' = Z + 1/2, stored exactly as twice its value.

    ``twice`` must be odd; the represented value is twice/2.
    """

    twice: int

    def __post_init__(self) -> None:
        if not isinstance(self.twice, int) or self.twice % 2 == 0:
            raise ValueError(f"HalfInt requires an odd integer twice-value, got {self.twice!r}")

    @classmethod
    def make(cls, value) -> "HalfInt":
        """Coerce a HalfInt, an exact float like 1.5, or an 'n/2' string."""
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        twice = 2 * float(value)
        if twice != int(twice):
            raise ValueError(f"{value!r} is not a half-integer")
        return cls(int(twice))

    @classmethod
    def parse(cls, text: str) -> "HalfInt":
        """Parse the external 'n/2' form, e.g. '-1/2' or '3/2'."""
        s = text.strip()
        if not s.endswith("/2"):
            raise ValueError(f"half-integer strings must look like 'n/2', got {text!r}")
        return cls(int(s[:-2]))

    def __str__(self) -> str:
        return f"{self.twice}/2"

    def __repr__(self) -> str:
        return f"HalfInt({self.twice})"

    def __float__(self) -> float:
        return self.twice / 2.0

    def __lt__(self, other: "HalfInt") -> bool:
        return self.twice < other.twice

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.twice)

    def __abs__(self) -> "HalfInt":
        return HalfInt(abs(self.twice))

    def __add__(self, n: int) -> "HalfInt":
        if not isinstance(n, int):
            return NotImplemented
        return HalfInt(self.twice + 2 * n)

    def __sub__(self, n: int) -> "HalfInt":
        if not isinstance(n, int):
            return NotImplemented
        return HalfInt(self.twice - 2 * n)

    @property
    def is_positive(self) -> bool:
        return self.twice > 0

    @property
    def value(self) -> float:
        return self.twice / 2.0


def _half(twice: int) -> HalfInt:
    return HalfInt(twice)


class Partition:
    """A Young diagram: weakly decreasing positive row lengths.

    Exposes the modified Frobenius coordinates (p_i, q_i): for each of the d
    diagonal boxes, p_i = lambda_i - i + 1/2 (arm + 1/2) and
    q_i = lambda'_i - i + 1/2 (leg + 1/2), stored ascending in i after
    reversal so that p_1 < ... < p_d and q_1 < ... < q_d.
    """

    __slots__ = ("rows", "_frobenius")

    def __init__(self, rows: Iterable[int] = ()):
        rows = tuple(int(r) for r in rows)
        if any(r <= 0 for r in rows):
            raise ValueError(f"partition rows must be positive, got {rows}")
        if any(rows[i] < rows[i + 1] for i in range(len(rows) - 1)):
            raise ValueError(f"partition rows must be weakly decreasing, got {rows}")
        self.rows = rows
        self._frobenius: tuple[tuple[HalfInt, HalfInt], ...] | None = None

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """Parse the external comma-separated form, e.g. '3,1,1'; '' is empty."""
        s = text.strip()
        if not s:
            return cls(())
        return cls(int(part) for part in s.split(","))

    def __str__(self) -> str:
        return ",".join(str(r) for r in self.rows)

    def __repr__(self) -> str:
        return f"Partition({list(self.rows)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __getitem__(self, i: int) -> int:
        """Row length lambda_i with 1-based index, 0 beyond the last row."""
        if i < 1:
            raise IndexError("rows are 1-indexed")
        return self.rows[i - 1] if i <= len(self.rows) else 0

    @property
    def size(self) -> int:
        return sum(self.rows)

    def transpose(self) -> "Partition":
        if not self.rows:
            return Partition(())
        cols = [0] * self.rows[0]
        for r in self.rows:
            for j in range(r):
                cols[j] += 1
        return Partition(cols)

    @property
    def diagonal_length(self) -> int:
        """Number of diagonal boxes d = #{i : lambda_i >= i}."""
        return sum(1 for i, r in enumerate(self.rows, start=1) if r >= i)

    @property
    def frobenius(self) -> tuple[tuple[HalfInt, HalfInt], ...]:
        """Modified Frobenius coordinates ((p_1,q_1),...,(p_d,q_d)), ascending."""
        if self._frobenius is None:
            t = self.transpose()
            d = self.diagonal_length
            pairs = []
            for i in range(d, 0, -1):  # reverse so p ascends
                p = _half(2 * (self[i] - i) + 1)
                q = _half(2 * (t[i] - i) + 1)
                pairs.append((p, q))
            self._frobenius = tuple(pairs)
        return self._frobenius

    def boxes(self) -> Iterator[tuple[int, int]]:
        """Iterate boxes (i, j), both 1-based."""
        for i, r in enumerate(self.rows, start=1):
            for j in range(1, r + 1):
                yield (i, j)


class FiniteConfig:
    """A finite subset of Z', kept sorted ascending."""

    __slots__ = ("points",)

    def __init__(self, points: Iterable = ()):
        pts = sorted({HalfInt.make(p) for p in points})
        self.points = tuple(pts)

    @classmethod
    def parse(cls, text: str) -> "FiniteConfig":
        """Parse comma-separated 'n/2' strings; '' is the empty configuration."""
        s = text.strip()
        if not s:
            return cls(())
        return cls(HalfInt.parse(part) for part in s.split(","))

    def __str__(self) -> str:
        return ",".join(str(p) for p in self.points)

    def __repr__(self) -> str:
        return f"FiniteConfig([{', '.join(str(p) for p in self.points)}])"

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteConfig) and self.points == other.points

    def __hash__(self) -> int:
        return hash(self.points)

    def __contains__(self, x) -> bool:
        return HalfInt.make(x) in set(self.points)

    def __iter__(self) -> Iterator[HalfInt]:
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def positives(self) -> tuple[HalfInt, ...]:
        return tuple(p for p in self.points if p.twice > 0)

    @property
    def negatives(self) -> tuple[HalfInt, ...]:
        return tuple(p for p in self.points if p.twice < 0)

    def is_balanced(self) -> bool:
        return len(self.positives) == len(self.negatives)

    def union(self, other: "FiniteConfig") -> "FiniteConfig":
        return FiniteConfig(self.points + other.points)

    def restrict(self, window: int) -> "FiniteConfig":
        """Points with |x| <= window."""
        return FiniteConfig(p for p in self.points if abs(p.twice) <= 2 * window)

    def outside(self, window: int) -> "FiniteConfig":
        """Points with |x| > window."""
        return FiniteConfig(p for p in self.points if abs(p.twice) > 2 * window)


class MayaDiagram:
    """A subset of Z' equal to Z'_- up to a finite symmetric difference.

    Membership: x belongs to the diagram iff (x < 0) XOR (x in diff).  The
    Maya diagram of a partition differs from Z'_- in finitely many points, so
    this representation is always finite and membership queries exact.
    """

    __slots__ = ("diff",)

    def __init__(self, diff: Iterable = ()):
        self.diff = FiniteConfig(diff)

    def __contains__(self, x) -> bool:
        x = HalfInt.make(x)
        return (x.twice < 0) != (x in self.diff)

    def __eq__(self, other) -> bool:
        return isinstance(other, MayaDiagram) and self.diff == other.diff

    def __hash__(self) -> int:
        return hash(("maya", self.diff))

    def __repr__(self) -> str:
        return f"MayaDiagram(diff=[{', '.join(str(p) for p in self.diff)}])"

    def toggle(self, x: HalfInt) -> "MayaDiagram":
        """Flip membership of a single point."""
        pts = set(self.diff.points)
        if x in pts:
            pts.remove(x)
        else:
            pts.add(x)
        return MayaDiagram(pts)


@dataclass(frozen=True)
class FinitaryPermutation:
    """A word in the elementary transpositions sigma_n, rightmost acting first.

    sigma_n transposes the lattice points n - 1/2 and n + 1/2; a word
    [w_1, ..., w_m] denotes the composition sigma_(w_1) o ... o sigma_(w_m).
    """

    word: tuple[int, ...] = ()

    def __init__(self, word: Iterable[int] = ()):
        object.__setattr__(self, "word", tuple(int(n) for n in word))

    def __mul__(self, other: "FinitaryPermutation") -> "FinitaryPermutation":
        return FinitaryPermutation(self.word + other.word)

    def inverse(self) -> "FinitaryPermutation":
        """Generators are involutions, so the inverse is the reversed word."""
        return FinitaryPermutation(tuple(reversed(self.word)))

    def generators_in_order(self) -> tuple[int, ...]:
        """Generator indices in the order they are applied (rightmost first)."""
        return tuple(reversed(self.word))

    @property
    def max_index(self) -> int:
        return max((abs(n) for n in self.word), default=0)

    def __str__(self) -> str:
        return "[" + ",".join(str(n) for n in self.word) + "]"


# ---------------------------------------------------------------------------
# Partition <-> configuration conversions
# ---------------------------------------------------------------------------

def to_maya(lam: Partition) -> MayaDiagram:
    """Maya diagram {lambda_i - i + 1/2 : i >= 1} of a partition.

    For i beyond the last row the points are -i + 1/2, i.e. all of Z'_- except
    finitely many; the result is stored as the finite symmetric difference
    with Z'_-.
    """
    diff: set[HalfInt] = set()
    for i, r in enumerate(lam.rows, start=1):
        x = _half(2 * (r - i) + 1)
        if x.twice > 0:
            diff.add(x)  # extra positive point
        else:
            pass  # negative point already in Z'_-; handled below
    # Points of Z'_- that the diagram misses: -i + 1/2 for i <= len(rows)
    # is replaced by lambda_i - i + 1/2, so the occupied negative points are
    # {lambda_i - i + 1/2 < 0} plus the tail {-i + 1/2 : i > len(rows)}.
    occupied_negative = {
        _half(2 * (r - i) + 1) for i, r in enumerate(lam.rows, start=1) if 2 * (r - i) + 1 < 0
    }
    for i in range(1, len(lam.rows) + 1):
        x = _half(-2 * i + 1)
        if x not in occupied_negative:
            diff.add(x)  # hole in Z'_-
    return MayaDiagram(diff)


def to_balanced_config(lam: Partition) -> FiniteConfig:
    """X(lambda) = {-q_d, ..., -q_1, p_1, ..., p_d}; always balanced."""
    pts: list[HalfInt] = []
    for p, q in lam.frobenius:
        pts.append(p)
        pts.append(-q)
    return FiniteConfig(pts)


def from_balanced_config(config: FiniteConfig) -> Partition:
    """Inverse of to_balanced_config; rejects non-balanced input.

    Reads the Maya diagram inv(X) in descending order: if x_1 > x_2 > ... are
    its occupied points then lambda_i = x_i + i - 1/2, which vanishes once the
    unperturbed tail x_i = -i + 1/2 is reached.
    """
    if not config.is_balanced():
        raise ValueError(f"configuration {config} is not balanced")
    extra = sorted((p for p in config.points if p.twice > 0), reverse=True)
    holes = {p for p in config.points if p.twice < 0}
    rows: list[int] = []
    i = 0
    neg_twice = -1  # next candidate negative point, descending: -1/2, -3/2, ...
    pending = list(extra)
    while True:
        if pending:
            x = pending[0]
        else:
            while HalfInt(neg_twice) in holes:
                neg_twice -= 2
            x = HalfInt(neg_twice)
        i += 1
        row = (x.twice - 1) // 2 + i  # x + i - 1/2 as an int
        if row == 0:
            break
        if row < 0:
            raise ValueError(f"configuration {config} does not encode a partition")
        rows.append(row)
        if pending:
            pending.pop(0)
        else:
            neg_twice -= 2
    return Partition(rows)


def particle_hole_involution(obj):
    """Symmetric difference with Z'_-; maps finite configs to Maya diagrams
    and back, with the same underlying difference set.  inv o inv = id."""
    if isinstance(obj, FiniteConfig):
        return MayaDiagram(obj.points)
    if isinstance(obj, MayaDiagram):
        return FiniteConfig(obj.diff.points)
    raise TypeError(f"cannot involute {type(obj).__name__}")


# ---------------------------------------------------------------------------
# Permutation actions
# ---------------------------------------------------------------------------

def _sigma_on_maya(n: int, maya: MayaDiagram) -> MayaDiagram:
    """Natural action of sigma_n on a Maya diagram: swap occupation of the
    points n - 1/2 and n + 1/2 (a no-op when both or neither are occupied)."""
    lo = _half(2 * n - 1)
    hi = _half(2 * n + 1)
    if (lo in maya) == (hi in maya):
        return maya
    return maya.toggle(lo).toggle(hi)


def apply_sigma(sigma: FinitaryPermutation, lam: Partition) -> Partition:
    """Action of a word on a partition through its Maya diagram.

    Each generator either fixes the partition or adds/removes one box on the
    diagonal j - i = n.
    """
    maya = to_maya(lam)
    for n in sigma.generators_in_order():
        maya = _sigma_on_maya(n, maya)
    return from_balanced_config(particle_hole_involution(maya))


def _sigma_modified_once(n: int, config: FiniteConfig) -> FiniteConfig:
    """The modified action sigma~_n = inv o sigma_n o inv on balanced configs.

    For n != 0 it coincides with the plain set action of sigma_n.  For n = 0
    it switches between both of {-1/2, 1/2} absent and both present, leaving
    the mixed patterns fixed.
    """
    lo = _half(2 * n - 1)
    hi = _half(2 * n + 1)
    pts = set(config.points)
    if n == 0:
        if lo in pts and hi in pts:
            pts.remove(lo)
            pts.remove(hi)
        elif lo not in pts and hi not in pts:
            pts.add(lo)
            pts.add(hi)
        return FiniteConfig(pts)
    if (lo in pts) != (hi in pts):
        if lo in pts:
            pts.remove(lo)
            pts.add(hi)
        else:
            pts.remove(hi)
            pts.add(lo)
    return FiniteConfig(pts)


def apply_sigma_modified(sigma: FinitaryPermutation, config: FiniteConfig) -> FiniteConfig:
    """sigma~(X) = inv(sigma(inv(X))) for balanced X; preserves balancedness."""
    if not config.is_balanced():
        raise ValueError(f"modified action requires a balanced configuration, got {config}")
    out = config
    for n in sigma.generators_in_order():
        out = _sigma_modified_once(n, out)
    return out


# ---------------------------------------------------------------------------
# Dimension ratio
# ---------------------------------------------------------------------------

def dim_ratio(lam: Partition) -> Fraction:
    """dim(lambda) / |lambda|! as an exact rational, via the Frobenius-
    coordinate product formula

        prod_(i<j) (p_j - p_i)(q_j - q_i)
        ---------------------------------------------------
        prod_i (p_i - 1/2)! (q_i - 1/2)! * prod_(i,j) (p_i + q_j)
    """
    fr = lam.frobenius
    d = len(fr)
    ps = [(p.twice - 1) // 2 for p, _ in fr]  # p_i - 1/2 as ints
    qs = [(q.twice - 1) // 2 for _, q in fr]
    num = 1
    for i in range(d):
        for j in range(i + 1, d):
            num *= (ps[j] - ps[i]) * (qs[j] - qs[i])
    den = 1
    for i in range(d):
        den *= factorial(ps[i]) * factorial(qs[i])
    for i in range(d):
        for j in range(d):
            den *= ps[i] + qs[j] + 1  # p_i + q_j = ps[i] + qs[j] + 1
    return Fraction(num, den)


# ---------------------------------------------------------------------------
# Partition enumeration
# ---------------------------------------------------------------------------

def partitions_of(n: int) -> Iterator[Partition]:
    """All partitions of n (n >= 0), in lexicographically decreasing order."""
    if n < 0:
        return
    if n == 0:
        yield Partition(())
        return

    def gen(remaining: int, cap: int, prefix: list[int]) -> Iterator[Partition]:
        if remaining == 0:
            yield Partition(prefix)
            return
        for first in range(min(cap, remaining), 0, -1):
            prefix.append(first)
            yield from gen(remaining - first, first, prefix)
            prefix.pop()

    yield from gen(n, n, [])


def partitions_up_to(max_size: int) -> Iterator[Partition]:
    """All partitions with |lambda| <= max_size, smallest sizes first."""
    for n in range(max_size + 1):
        yield from partitions_of(n)
