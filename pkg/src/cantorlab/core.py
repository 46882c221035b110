"""Exact arithmetic and Cantor-space combinatorics.

Bit strings are plain ``str`` objects over the alphabet ``"01"``; the empty
string names the whole space.  A string ``a`` of length ``k`` names the
cylinder ``[a]``, identified with the half-open dyadic interval
``[int(a, 2) / 2**k, (int(a, 2) + 1) / 2**k)``.

Clopen sets are kept as binary decision trees, which gives a canonical form
for free:

* a one-dimensional set (:class:`CylinderSet`) is ``True`` (everything),
  ``False`` (nothing) or a pair ``(left, right)`` of subtrees, with
  ``(True, True)`` and ``(False, False)`` collapsed;
* a set in the product (:class:`BasicSet`) is a tree over the first
  coordinate whose leaves are one-dimensional trees over the second
  coordinate.  A leaf ``(y,)`` at node ``a1`` says the set is stable over
  ``[a1]`` with section ``y``; two sibling leaves with equal sections are
  collapsed into their parent.

Two sets are equal iff their trees are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product as _cartesian
from typing import Iterable, Iterator, NamedTuple, Sequence

from ._rational import ONE, ZERO, Q, dyadic, fmt


class CantorLabError(Exception):
    """Base class for errors raised by this package."""


class PreconditionError(CantorLabError):
    """An operation's precondition does not hold at the depth examined."""


# ----------------------------------------------------------------------------
# bit strings

def check_bits(a: str) -> str:
    if not isinstance(a, str) or a.strip("01"):
        raise ValueError(f"not a bit string: {a!r}")
    return a


def cells(depth: int) -> Iterator[str]:
    """All bit strings of the given length, in lexicographic order."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth == 0:
        yield ""
        return
    for i in range(1 << depth):
        yield format(i, f"0{depth}b")


def tree_cells(depth: int) -> Iterator[str]:
    """All bit strings of length <= depth, shortest first."""
    for d in range(depth + 1):
        yield from cells(d)


def meet(a: str, b: str) -> str | None:
    """The longer of two comparable strings (the intersection of cylinders)."""
    if a.startswith(b):
        return a
    if b.startswith(a):
        return b
    return None


@lru_cache(maxsize=1 << 16)
def left_endpoint(a: str):
    """Left endpoint of the dyadic interval named by ``a``."""
    return Q(int(a, 2), 1 << len(a)) if a else ZERO


def cylinder_length(a: str):
    return dyadic(len(a))


@lru_cache(maxsize=1 << 16)
def overlap(a: str, lo, hi):
    """Length of ``[a] ∩ [lo, hi)`` where ``[a]`` is read as a dyadic interval."""
    x0 = left_endpoint(a)
    x1 = x0 + dyadic(len(a))
    left = x0 if x0 > lo else lo
    right = x1 if x1 < hi else hi
    return right - left if right > left else ZERO


# ----------------------------------------------------------------------------
# enclosures

@dataclass(frozen=True)
class RationalInterval:
    """Closed interval ``[lo, hi]`` with exact rational endpoints."""

    lo: object
    hi: object

    def __post_init__(self):
        lo, hi = Q(self.lo), Q(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> "RationalInterval":
        return cls(x, x)

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return (self.lo + self.hi) / 2

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains(self, other: "RationalInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "RationalInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other: "RationalInterval") -> "RationalInterval | None":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        return RationalInterval(lo, hi) if lo <= hi else None

    def hull(self, other: "RationalInterval") -> "RationalInterval":
        return RationalInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __add__(self, other: "RationalInterval") -> "RationalInterval":
        return RationalInterval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "RationalInterval") -> "RationalInterval":
        return RationalInterval(self.lo - other.hi, self.hi - other.lo)

    def scale(self, c) -> "RationalInterval":
        c = Q(c)
        if c < 0:
            return RationalInterval(self.hi * c, self.lo * c)
        return RationalInterval(self.lo * c, self.hi * c)

    def clip(self, lo=ZERO, hi=ONE) -> "RationalInterval":
        return RationalInterval(min(max(self.lo, lo), hi), max(min(self.hi, hi), lo))

    def widen(self, r) -> "RationalInterval":
        return RationalInterval(self.lo - r, self.hi + r)

    def __str__(self) -> str:
        return f"[{fmt(self.lo)}, {fmt(self.hi)}]"


def ratio_enclosure(num: RationalInterval, den: RationalInterval) -> RationalInterval:
    """Enclosure of num/den for nonnegative num and den bounded away from 0."""
    if den.lo <= 0:
        raise ZeroDivisionError("denominator enclosure touches zero")
    lo = num.lo / den.hi if num.lo > 0 else ZERO
    return RationalInterval(lo, num.hi / den.lo)


# ----------------------------------------------------------------------------
# rectangles and clopen sets

class Rect(NamedTuple):
    """The rectangle ``[a1] x [a2]``."""

    a1: str
    a2: str

    def __str__(self) -> str:
        return f"{_cyl_text(self.a1)}x{_cyl_text(self.a2)}"


def _cyl_text(a: str) -> str:
    return f"[{a}]" if a else "*"


def _ynode(left, right):
    if left is right and isinstance(left, bool):
        return left
    return (left, right)


def _ycyl(a: str):
    tree = True
    for bit in reversed(a):
        tree = (tree, False) if bit == "0" else (False, tree)
    return tree


def _ycombine(a, b, op: str):
    if isinstance(a, bool) and isinstance(b, bool):
        if op == "|":
            return a or b
        if op == "&":
            return a and b
        return a and not b
    if op == "|":
        if a is True or b is True:
            return True
        if a is False:
            return b
        if b is False:
            return a
    elif op == "&":
        if a is False or b is False:
            return False
        if a is True:
            return b
        if b is True:
            return a
    else:
        if a is False or b is True:
            return False
        if b is False:
            return a
    al, ar = (a, a) if isinstance(a, bool) else a
    bl, br = (b, b) if isinstance(b, bool) else b
    return _ynode(_ycombine(al, bl, op), _ycombine(ar, br, op))


def _yprefixes(tree, prefix: str = "") -> Iterator[str]:
    if tree is True:
        yield prefix
    elif tree is not False:
        yield from _yprefixes(tree[0], prefix + "0")
        yield from _yprefixes(tree[1], prefix + "1")


def _ydepth(tree) -> int:
    if isinstance(tree, bool):
        return 0
    return 1 + max(_ydepth(tree[0]), _ydepth(tree[1]))


class CylinderSet:
    """Clopen subset of one Cantor space, stored canonically."""

    __slots__ = ("tree",)

    def __init__(self, tree=False):
        self.tree = tree

    @classmethod
    def empty(cls) -> "CylinderSet":
        return cls(False)

    @classmethod
    def full(cls) -> "CylinderSet":
        return cls(True)

    @classmethod
    def from_prefixes(cls, prefixes: Iterable[str]) -> "CylinderSet":
        tree = False
        for a in prefixes:
            tree = _ycombine(tree, _ycyl(check_bits(a)), "|")
        return cls(tree)

    @property
    def prefixes(self) -> list[str]:
        """Maximal cylinders of the set, disjoint, in left-to-right order."""
        return list(_yprefixes(self.tree))

    @property
    def depth(self) -> int:
        return _ydepth(self.tree)

    def is_empty(self) -> bool:
        return self.tree is False

    def __contains__(self, bits: str) -> bool:
        """Membership of every point extending ``bits`` (decided once bits is deep enough)."""
        tree = self.tree
        for b in bits:
            if isinstance(tree, bool):
                break
            tree = tree[int(b)]
        return tree is True

    def __or__(self, other: "CylinderSet") -> "CylinderSet":
        return CylinderSet(_ycombine(self.tree, other.tree, "|"))

    def __and__(self, other: "CylinderSet") -> "CylinderSet":
        return CylinderSet(_ycombine(self.tree, other.tree, "&"))

    def __sub__(self, other: "CylinderSet") -> "CylinderSet":
        return CylinderSet(_ycombine(self.tree, other.tree, "-"))

    def __le__(self, other: "CylinderSet") -> bool:
        return (self - other).is_empty()

    def __eq__(self, other) -> bool:
        return isinstance(other, CylinderSet) and self.tree == other.tree

    def __hash__(self) -> int:
        return hash(("CylinderSet", self.tree))

    def __repr__(self) -> str:
        return f"CylinderSet({self.prefixes!r})"

    def measure(self, mass) -> object:
        """Sum of ``mass(a)`` over the maximal cylinders."""
        total = ZERO
        for a in _yprefixes(self.tree):
            total += mass(a)
        return total


_XEMPTY = (False,)
_XFULL = (True,)


def _xnode(left, right):
    if len(left) == 1 and left == right:
        return left
    return (left, right)


def _xcombine(a, b, op: str):
    if len(a) == 1 and len(b) == 1:
        return (_ycombine(a[0], b[0], op),)
    if op == "&" and (a == _XEMPTY or b == _XEMPTY):
        return _XEMPTY
    if op == "|" and (a == _XFULL or b == _XFULL):
        return _XFULL
    al, ar = (a, a) if len(a) == 1 else a
    bl, br = (b, b) if len(b) == 1 else b
    return _xnode(_xcombine(al, bl, op), _xcombine(ar, br, op))


def _xrect(a1: str, a2: str):
    tree = (_ycyl(a2),)
    for bit in reversed(a1):
        tree = (tree, _XEMPTY) if bit == "0" else (_XEMPTY, tree)
    return tree


def _xleaves(tree, prefix: str = "") -> Iterator[tuple[str, object]]:
    if len(tree) == 1:
        yield prefix, tree[0]
    else:
        yield from _xleaves(tree[0], prefix + "0")
        yield from _xleaves(tree[1], prefix + "1")


class BasicSet:
    """Finite union of rectangles in the product space, stored canonically.

    The canonical rectangles are obtained by cutting the first coordinate
    into the coarsest dyadic intervals over which the set is stable and
    listing the maximal cylinders of each section.  They are pairwise
    disjoint and uniquely determined by the point set.
    """

    __slots__ = ("tree", "_rects")

    def __init__(self, tree=_XEMPTY):
        self.tree = tree
        self._rects = None

    @classmethod
    def empty(cls) -> "BasicSet":
        return cls(_XEMPTY)

    @classmethod
    def full(cls) -> "BasicSet":
        return cls(_XFULL)

    @classmethod
    def from_rects(cls, rects: Iterable[Rect | tuple[str, str]]) -> "BasicSet":
        tree = _XEMPTY
        for a1, a2 in rects:
            tree = _xcombine(tree, _xrect(check_bits(a1), check_bits(a2)), "|")
        return cls(tree)

    @classmethod
    def stripe(cls, a1: str) -> "BasicSet":
        """The vertical stripe ``[a1] x Omega_2``."""
        return cls(_xrect(check_bits(a1), ""))

    @classmethod
    def stripes(cls, prefixes: Iterable[str]) -> "BasicSet":
        return cls.from_rects((a, "") for a in prefixes)

    @classmethod
    def product(cls, xs: CylinderSet, ys: CylinderSet) -> "BasicSet":
        return cls.from_rects((a1, a2) for a1 in xs.prefixes for a2 in ys.prefixes)

    @property
    def rects(self) -> list[Rect]:
        if self._rects is None:
            self._rects = [
                Rect(a1, a2)
                for a1, ytree in _xleaves(self.tree)
                for a2 in _yprefixes(ytree)
            ]
        return self._rects

    @property
    def depth(self) -> int:
        """Largest coordinate depth among the canonical rectangles."""
        return max((max(len(r.a1), len(r.a2)) for r in self.rects), default=0)

    @property
    def x_depth(self) -> int:
        return max((len(a1) for a1, _ in _xleaves(self.tree)), default=0)

    def is_empty(self) -> bool:
        return self.tree == _XEMPTY

    def __or__(self, other: "BasicSet") -> "BasicSet":
        return BasicSet(_xcombine(self.tree, other.tree, "|"))

    def __and__(self, other: "BasicSet") -> "BasicSet":
        return BasicSet(_xcombine(self.tree, other.tree, "&"))

    def __sub__(self, other: "BasicSet") -> "BasicSet":
        return BasicSet(_xcombine(self.tree, other.tree, "-"))

    def __le__(self, other: "BasicSet") -> bool:
        return (self - other).is_empty()

    def __eq__(self, other) -> bool:
        return isinstance(other, BasicSet) and self.tree == other.tree

    def __hash__(self) -> int:
        return hash(("BasicSet", self.tree))

    def __repr__(self) -> str:
        return f"BasicSet({self.to_text()!r})"

    def to_text(self) -> str:
        return ",".join(str(r) for r in self.rects) if self.rects else "{}"

    def contains_cell(self, a1: str, a2: str) -> bool:
        """True iff every point of ``[a1] x [a2]`` lies in the set."""
        tree = self.tree
        for b in a1:
            if len(tree) == 1:
                break
            tree = tree[int(b)]
        stack = [tree]
        while stack:
            node = stack.pop()
            if len(node) == 1:
                if a2 not in CylinderSet(node[0]):
                    return False
            else:
                stack.extend(node)
        return True

    def section(self, prefix: str) -> tuple[CylinderSet, bool]:
        """Vertical section over ``[prefix]`` and whether the set is stable there.

        When the set is not stable in the stripe, the section along the
        leftmost path under ``prefix`` is returned with ``stable=False``.
        """
        tree = self.tree
        for b in check_bits(prefix):
            if len(tree) == 1:
                return CylinderSet(tree[0]), True
            tree = tree[int(b)]
        if len(tree) == 1:
            return CylinderSet(tree[0]), True
        while len(tree) != 1:
            tree = tree[0]
        return CylinderSet(tree[0]), False

    def is_stable(self, prefix: str) -> bool:
        return self.section(prefix)[1]

    def footprint(self) -> CylinderSet:
        """Projection onto the first coordinate."""
        return CylinderSet.from_prefixes(a1 for a1, y in _xleaves(self.tree) if y is not False)

    def restrict(self, prefix: str) -> "BasicSet":
        """Intersection with the stripe ``[prefix] x Omega_2``."""
        return self & BasicSet.stripe(prefix)


def canonicalize(rects: Iterable[Rect | tuple[str, str]]) -> BasicSet:
    return BasicSet.from_rects(rects)


def union(a: BasicSet, b: BasicSet) -> BasicSet:
    return a | b


def intersection(a: BasicSet, b: BasicSet) -> BasicSet:
    return a & b


def difference(a: BasicSet, b: BasicSet) -> BasicSet:
    return a - b


def section(u: BasicSet, prefix: str) -> tuple[CylinderSet, bool]:
    return u.section(prefix)


# ----------------------------------------------------------------------------
# cylinder functions

@dataclass(frozen=True)
class CylinderFunction:
    """Nonnegative rational function constant on depth-``depth`` cylinders.

    ``values`` lists the cell values in lexicographic cell order.  With
    ``arity=2`` the function lives on the product; cells are pairs
    ``(a1, a2)`` of equal length ordered with ``a1`` major, so there are
    ``4**depth`` values.
    """

    depth: int
    values: tuple
    arity: int = 1

    def __post_init__(self):
        if self.depth < 0 or self.arity not in (1, 2):
            raise ValueError("bad depth or arity")
        vals = tuple(Q(v) for v in self.values)
        if len(vals) != 1 << (self.depth * self.arity):
            raise ValueError(f"expected {1 << (self.depth * self.arity)} values, got {len(vals)}")
        if any(v < 0 for v in vals):
            raise ValueError("cylinder functions are nonnegative")
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, c, depth: int = 0, arity: int = 1) -> "CylinderFunction":
        return cls(depth, (Q(c),) * (1 << (depth * arity)), arity)

    @classmethod
    def from_mapping(cls, depth: int, mapping, arity: int = 1, default=ZERO) -> "CylinderFunction":
        """Build from ``{cell: value}``; pairs ``(a1, a2)`` as keys when arity is 2."""
        return cls(depth, tuple(mapping.get(c, default) for c in cls._keys(depth, arity)), arity)

    @staticmethod
    def _keys(depth: int, arity: int):
        if arity == 1:
            return list(cells(depth))
        row = list(cells(depth))
        return list(_cartesian(row, row))

    def keys(self) -> list:
        return self._keys(self.depth, self.arity)

    def items(self):
        return zip(self.keys(), self.values)

    def _index(self, a: str) -> int:
        a = a[: self.depth]
        if len(a) < self.depth:
            raise ValueError(f"cell {a!r} is coarser than depth {self.depth}")
        return int(a, 2) if a else 0

    def __call__(self, a1: str, a2: str | None = None):
        if self.arity == 1:
            return self.values[self._index(a1)]
        if a2 is None:
            raise TypeError("product function needs two coordinates")
        return self.values[(self._index(a1) << self.depth) + self._index(a2)]

    def refine(self, depth: int) -> "CylinderFunction":
        if depth < self.depth:
            raise ValueError(f"cannot refine depth {self.depth} to coarser depth {depth}")
        if depth == self.depth:
            return self
        if self.arity == 1:
            return CylinderFunction(depth, tuple(self(c) for c in cells(depth)))
        row = list(cells(depth))
        return CylinderFunction(depth, tuple(self(a, b) for a in row for b in row), 2)

    def fiber(self, a1: str) -> "CylinderFunction":
        """Restriction of a product function to the first-coordinate cell ``a1``."""
        if self.arity != 2:
            raise TypeError("fiber() needs a product function")
        start = self._index(a1) << self.depth
        return CylinderFunction(self.depth, self.values[start : start + (1 << self.depth)])

    def scale(self, c) -> "CylinderFunction":
        c = Q(c)
        return CylinderFunction(self.depth, tuple(v * c for v in self.values), self.arity)

    @property
    def sup(self):
        return max(self.values)


def refine(f: CylinderFunction, depth: int) -> CylinderFunction:
    return f.refine(depth)


def from_fibers(fibers: Sequence[CylinderFunction]) -> CylinderFunction:
    """Stack ``2**d`` depth-``d`` functions on Omega_2 into one product function."""
    depth = fibers[0].depth
    if len(fibers) != 1 << depth or any(f.depth != depth or f.arity != 1 for f in fibers):
        raise ValueError("need 2**d one-dimensional fibers of depth d")
    return CylinderFunction(depth, tuple(v for f in fibers for v in f.values), 2)
