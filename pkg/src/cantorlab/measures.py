"""Computable measures on Omega_1 x Omega_2 with exact rectangle masses.

Every oracle answers ``mass(rect, precision)`` with a closed enclosure of
width at most ``precision``; the built-in families are exact and return
degenerate enclosures.  ``p(a1, a2)`` is the exact shortcut used by the
scans in the other modules.

The unit square picture: ``a1`` is the horizontal coordinate x, ``a2`` the
vertical coordinate y, both read as half-open dyadic intervals.
"""

from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ._rational import HALF, ONE, ZERO, Q, dyadic, fmt
from .core import (
    BasicSet,
    CantorLabError,
    CylinderSet,
    RationalInterval,
    Rect,
    check_bits,
    cylinder_length,
    left_endpoint,
    overlap,
    ratio_enclosure,
    tree_cells,
)


class InsufficientTermsError(CantorLabError):
    """The sequence configuration has too few terms for the requested rectangle."""


class ZeroMarginalError(CantorLabError):
    """The marginal of a stripe cannot be bounded away from zero."""

    def __init__(self, message: str, depth: int | None = None, partial=None):
        super().__init__(message)
        self.depth = depth
        self.partial = partial


# ----------------------------------------------------------------------------
# one-dimensional measures

class CantorMeasure(ABC):
    """Exact probability measure on a single Cantor space."""

    label = "measure"

    def __init__(self):
        self._cache: dict[str, object] = {}

    @abstractmethod
    def _mass(self, a: str): ...

    def mass(self, a: str):
        try:
            return self._cache[a]
        except KeyError:
            value = self._cache[a] = self._mass(a)
            return value

    def __call__(self, a: str):
        return self.mass(a)

    def measure(self, s: CylinderSet):
        return s.measure(self.mass)


class Uniform1D(CantorMeasure):
    label = "uniform"

    def _mass(self, a):
        return cylinder_length(a)


class Bernoulli(CantorMeasure):
    """Independent bits, each equal to 1 with probability ``p``."""

    def __init__(self, p):
        super().__init__()
        self.p = Q(p)
        if not ZERO <= self.p <= ONE:
            raise ValueError("p must lie in [0, 1]")
        self.label = f"bernoulli({fmt(self.p)})"

    def _mass(self, a):
        ones = a.count("1")
        return self.p**ones * (ONE - self.p) ** (len(a) - ones)


class Dirac(CantorMeasure):
    """Point mass at the periodic sequence ``pattern pattern pattern ...``."""

    def __init__(self, pattern: str = "0"):
        super().__init__()
        if not pattern:
            raise ValueError("pattern must be nonempty")
        self.pattern = check_bits(pattern)
        self.label = f"dirac({pattern})"

    def _mass(self, a):
        reps = len(a) // len(self.pattern) + 1
        return ONE if (self.pattern * reps).startswith(a) else ZERO


class Marginal(CantorMeasure):
    """First-coordinate marginal ``P_1`` of an exact product-space oracle."""

    def __init__(self, oracle: "MeasureOracle"):
        super().__init__()
        self.oracle = oracle
        self.label = f"marginal({oracle.label})"

    def _mass(self, a):
        return self.oracle.p(a, "")


# ----------------------------------------------------------------------------
# product-space oracles

class MeasureOracle(ABC):
    """Computable measure on Omega_1 x Omega_2.

    Subclasses implement ``_mass(a1, a2)``.  Exact oracles return the exact
    rational mass; inexact ones set ``exact = False`` and override
    :meth:`mass` to return enclosures.
    """

    exact = True
    label = "measure"

    def __init__(self):
        self._cache: dict[tuple[str, str], object] = {}
        self._lock = threading.Lock()
        self._marginal = None

    @abstractmethod
    def _mass(self, a1: str, a2: str): ...

    def p(self, a1: str, a2: str):
        """Exact mass of ``[a1] x [a2]``."""
        key = (a1, a2)
        try:
            return self._cache[key]
        except KeyError:
            pass
        value = self._mass(a1, a2)
        with self._lock:
            self._cache[key] = value
        return value

    def mass(self, rect: Rect | tuple[str, str], precision=None) -> RationalInterval:
        a1, a2 = rect
        return RationalInterval.point(self.p(a1, a2))

    def measure(self, u: BasicSet):
        """Exact mass of a basic set."""
        total = ZERO
        for a1, a2 in u.rects:
            total += self.p(a1, a2)
        return total

    def stripe_mass(self, u: BasicSet, prefix: str):
        """Exact ``P(U ∩ ([prefix] x Omega_2))``."""
        total = ZERO
        for a1, a2 in u.rects:
            if a1.startswith(prefix):
                total += self.p(a1, a2)
            elif prefix.startswith(a1):
                total += self.p(prefix, a2)
        return total

    def column_mass(self, prefix: str, ys: CylinderSet):
        """Exact ``P([prefix] x V)`` for a clopen ``V``."""
        return ys.measure(lambda a2: self.p(prefix, a2))

    @property
    def marginal_measure(self) -> Marginal:
        if self._marginal is None:
            self._marginal = Marginal(self)
        return self._marginal


class UniformOracle(MeasureOracle):
    label = "uniform"

    def _mass(self, a1, a2):
        return dyadic(len(a1) + len(a2))


class ProductOracle(MeasureOracle):
    def __init__(self, p1: CantorMeasure, p2: CantorMeasure):
        super().__init__()
        self.p1, self.p2 = p1, p2
        self.label = f"product({p1.label},{p2.label})"

    def _mass(self, a1, a2):
        return self.p1.mass(a1) * self.p2.mass(a2)


def _odd_tail(first: int, parity: int):
    """Sum of 2**-k over k >= first with k % 2 == parity."""
    k0 = first if first % 2 == parity else first + 1
    return dyadic(k0) * Q(4, 3)


class Oscillating(MeasureOracle):
    """Vertical stripes with mass alternating between the top and bottom half.

    Stripe ``k >= 1`` is ``[2**-k, 2**-(k-1)) x Omega_2``; its mass ``2**-k``
    sits at double density on the top half when ``k`` is odd and on the
    bottom half when ``k`` is even.  Along ``000...`` the conditional
    probability of the top half alternates between 2/3 and 1/3.
    """

    label = "oscillating"

    def _mass(self, a1, a2):
        n = len(a1)
        if a2:
            top_fraction = cylinder_length(a2) * 2 if a2[0] == "1" else ZERO
            bottom_fraction = cylinder_length(a2) * 2 if a2[0] == "0" else ZERO
        else:
            top_fraction = bottom_fraction = ONE
        first_one = a1.find("1")
        if first_one < 0:
            # [0, 2**-n) contains all stripes k > n
            top = _odd_tail(n + 1, 1)
            bottom = _odd_tail(n + 1, 0)
            return top * top_fraction + bottom * bottom_fraction
        k = first_one + 1
        width = cylinder_length(a1)
        return width * (top_fraction if k % 2 == 1 else bottom_fraction)


@dataclass(frozen=True)
class SequenceConfig:
    """Finitely many terms of an increasing sequence below ``alpha_limit``."""

    a: tuple
    alpha_limit: object

    def __post_init__(self):
        a = tuple(Q(x) for x in self.a)
        alpha = Q(self.alpha_limit)
        if not a:
            raise ValueError("sequence must be nonempty")
        if not ZERO < a[0]:
            raise ValueError("terms must be positive")
        if any(x >= y for x, y in zip(a, a[1:])):
            raise ValueError("terms must be strictly increasing")
        if not a[-1] < alpha < ONE:
            raise ValueError("need a_last < alpha_limit < 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "alpha_limit", alpha)

    @classmethod
    def default(cls, n_terms: int = 16) -> "SequenceConfig":
        """``a_i = (1 - 4**-i) / 3``, i.e. ``0.0101...01`` in binary, with limit 1/3."""
        return cls(tuple((ONE - dyadic(2 * i)) / 3 for i in range(1, n_terms + 1)), Q(1, 3))

    def term(self, k: int):
        """``a_k`` with ``a_0 = 0``."""
        if k == 0:
            return ZERO
        if k > len(self.a):
            raise InsufficientTermsError(f"need a_{k} but only {len(self.a)} terms are given")
        return self.a[k - 1]

    def truncate(self, n: int) -> "SequenceConfig":
        return SequenceConfig(self.a[:n], self.alpha_limit)

    def to_json(self) -> dict:
        return {"seq": [fmt(x) for x in self.a], "alpha": fmt(self.alpha_limit)}


def _y_bounds(a2: str):
    y0 = left_endpoint(a2)
    return y0, y0 + cylinder_length(a2)


class Staircase(MeasureOracle):
    """Horizontal mass transfer in strips ``a_{k-1} <= y < a_k``.

    In strip ``k`` the density is 0 on ``x < 2**-k``, 2 on
    ``2**-k <= x < 2**-(k-1)`` and 1 further right; above the listed strips
    the density is 1.  A rectangle of x-width ``2**-n`` only feels strips
    ``1..n``, so the oracle answers exactly for ``n <= len(cfg.a)``.
    """

    def __init__(self, cfg: SequenceConfig):
        super().__init__()
        self.cfg = cfg
        self.label = "staircase"

    def _mass(self, a1, a2):
        n = len(a1)
        if n > len(self.cfg.a):
            raise InsufficientTermsError(
                f"rectangle of x-depth {n} needs {n} sequence terms, have {len(self.cfg.a)}"
            )
        width = cylinder_length(a1)
        y0, y1 = _y_bounds(a2)
        total = width * (y1 - y0)
        # strips k <= f (f = leading zeros of a1) lose their mass over [a1],
        # strip f + 1 doubles it; the lost strips are contiguous in y
        f = a1.find("1")
        f = n if f < 0 else f
        if f:
            total -= width * overlap(a2, ZERO, self.cfg.term(f))
        if f < n:
            total += width * overlap(a2, self.cfg.term(f), self.cfg.term(f + 1))
        return total


class Segments(MeasureOracle):
    """Mass below the sequence concentrated on vertical segments.

    Level ``k`` carries mass ``a_k - a_{k-1}`` spread evenly over the
    segments ``{j * 2**-(k-1)} x [a_{k-1}, a_k)``.  A rectangle of x-width
    ``2**-n`` sees levels beyond ``n`` as uniform mass, so only
    ``a_1..a_n`` are consulted.
    """

    def __init__(self, cfg: SequenceConfig):
        super().__init__()
        self.cfg = cfg
        self.label = "segments"

    def _mass(self, a1, a2):
        n = len(a1)
        if n > len(self.cfg.a):
            raise InsufficientTermsError(
                f"rectangle of x-depth {n} needs {n} sequence terms, have {len(self.cfg.a)}"
            )
        width = cylinder_length(a1)
        total = width * overlap(a2, self.cfg.term(n), ONE)
        # trailing zeros of the left endpoint decide which segment grids hit [a1]
        trailing = len(a1) - len(a1.rstrip("0"))
        free = n - trailing  # x0 is a multiple of 2**-(k-1) iff k - 1 >= free
        for k in range(max(1, free + 1), n + 1):
            strip = overlap(a2, self.cfg.term(k - 1), self.cfg.term(k))
            if strip:
                total += strip * dyadic(k - 1)
        return total


@dataclass
class KernelConfig:
    """Fiber measures ``P^w`` on Omega_2 indexed by depth-``depth`` prefixes ``w``."""

    depth: int
    table: Mapping[str, CantorMeasure] = field(default_factory=dict)

    def __post_init__(self):
        missing = [w for w in tree_cells(self.depth) if len(w) == self.depth and w not in self.table]
        if missing:
            raise ValueError(f"kernel table is missing fibers {missing[:4]}")

    def fiber(self, a1: str) -> CantorMeasure:
        if len(a1) < self.depth:
            raise ValueError("cell is coarser than the kernel depth")
        return self.table[a1[: self.depth]]


class KernelOracle(MeasureOracle):
    """``P(a1, a2) = sum_w P_1([a1] ∩ [w]) * P^w(a2)`` over depth-j prefixes ``w``."""

    def __init__(self, p1: CantorMeasure, kernel: KernelConfig):
        super().__init__()
        self.p1 = p1
        self.kernel = kernel
        self.label = "kernel"

    def _mass(self, a1, a2):
        j = self.kernel.depth
        if len(a1) >= j:
            return self.p1.mass(a1) * self.kernel.table[a1[:j]].mass(a2)
        total = ZERO
        for w, fiber in self.kernel.table.items():
            if w.startswith(a1):
                total += self.p1.mass(w) * fiber.mass(a2)
        return total


class Rounded(MeasureOracle):
    """Inexact view of an exact oracle: masses rounded outward to a dyadic grid.

    The grid is the coarsest ``2**-k`` not exceeding the requested
    precision, so enclosures for finer precisions are nested.
    """

    exact = False

    def __init__(self, base: MeasureOracle):
        super().__init__()
        self.base = base
        self.label = f"rounded({base.label})"

    def _mass(self, a1, a2):
        return self.base.p(a1, a2)

    def mass(self, rect, precision=None):
        value = self.base.p(*rect)
        if precision is None or precision <= 0:
            return RationalInterval.point(value)
        k = 0
        while dyadic(k) > precision:
            k += 1
        scaled = value * (1 << k)
        lo = Q(scaled.numerator // scaled.denominator, 1 << k)
        hi = lo if lo == value else lo + dyadic(k)
        return RationalInterval(lo, hi)


class Corrupted(MeasureOracle):
    """Copy of an oracle with one rectangle's mass shifted (for testing validators)."""

    def __init__(self, base: MeasureOracle, rect: tuple[str, str], offset):
        super().__init__()
        self.base = base
        self.rect = Rect(*rect)
        self.offset = Q(offset)
        self.label = f"corrupted({base.label})"

    def _mass(self, a1, a2):
        value = self.base.p(a1, a2)
        return value + self.offset if (a1, a2) == self.rect else value


# ----------------------------------------------------------------------------
# constructors

def uniform() -> UniformOracle:
    return UniformOracle()


def product(p1: CantorMeasure, p2: CantorMeasure) -> ProductOracle:
    return ProductOracle(p1, p2)


def oscillating() -> Oscillating:
    return Oscillating()


def staircase(cfg: SequenceConfig | None = None) -> Staircase:
    return Staircase(cfg or SequenceConfig.default())


def segments(cfg: SequenceConfig | None = None) -> Segments:
    return Segments(cfg or SequenceConfig.default())


def from_kernel(p1: CantorMeasure, kernel: KernelConfig) -> KernelOracle:
    return KernelOracle(p1, kernel)


# ----------------------------------------------------------------------------
# marginals and interval-conditioned probabilities

_MAX_REFINEMENTS = 200


def marginal(P: MeasureOracle, a1: str, precision=None) -> RationalInterval:
    return P.mass(Rect(a1, ""), precision)


def cond_interval(P: MeasureOracle, a1: str, a2: str, precision=None) -> RationalInterval:
    """Enclosure of ``P(a1, a2) / P_1(a1)``.

    Raises :class:`ZeroMarginalError` when the marginal of ``[a1]`` cannot be
    bounded away from zero.
    """
    if P.exact:
        den = P.p(a1, "")
        if den == 0:
            raise ZeroMarginalError(f"zero-marginal stripe [{a1}]", depth=len(a1))
        return RationalInterval.point(P.p(a1, a2) / den)
    target = Q(precision) if precision is not None else dyadic(32)
    step = target
    for _ in range(_MAX_REFINEMENTS):
        den = P.mass(Rect(a1, ""), step)
        if den.lo > 0:
            ratio = ratio_enclosure(P.mass(Rect(a1, a2), step), den).clip()
            if ratio.width <= target:
                return ratio
        step /= 2
    raise ZeroMarginalError(f"zero-marginal stripe [{a1}]", depth=len(a1))


# ----------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Violation:
    rect: Rect
    check: str
    expected: object
    got: object

    def to_json(self) -> dict:
        def text(v):
            return str(v) if isinstance(v, RationalInterval) else fmt(v)

        return {"rect": str(self.rect), "check": self.check, "expected": text(self.expected), "got": text(self.got)}


@dataclass
class ValidationReport:
    label: str
    depth: int
    checked: int
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> list[dict]:
        return [v.to_json() for v in self.violations]


def validate(P: MeasureOracle, depth: int, precisions: Sequence | None = None) -> ValidationReport:
    """Check normalization, nonnegativity and additivity for every rect to ``depth``.

    Inexact oracles are additionally checked for enclosure width and
    nesting over the ``precisions`` ladder (default ``2**-4 .. 2**-16``).
    """
    if P.exact and precisions is None:
        return _validate_exact(P, depth)
    violations: list[Violation] = []
    rows = list(tree_cells(depth))
    masses: dict[tuple[str, str], object] = {}
    exact = P.exact
    ladder = [dyadic(k) for k in range(4, 17, 4)] if precisions is None else [Q(x) for x in precisions]

    for a1 in rows:
        for a2 in rows:
            rect = Rect(a1, a2)
            if exact:
                m = P.p(a1, a2)
                masses[rect] = RationalInterval.point(m)
            else:
                encl = [P.mass(rect, eps) for eps in ladder]
                for eps, e in zip(ladder, encl):
                    if e.width > eps:
                        violations.append(Violation(rect, "width", eps, e))
                for coarse, fine in zip(encl, encl[1:]):
                    if not coarse.contains(fine):
                        violations.append(Violation(rect, "nesting", coarse, fine))
                masses[rect] = encl[-1]
            if masses[rect].lo < 0:
                violations.append(Violation(rect, "nonnegative", ZERO, masses[rect].lo))

    full = masses[Rect("", "")]
    if not (ONE in full if not exact else full.lo == ONE):
        violations.append(Violation(Rect("", ""), "normalization", ONE, full))

    for a1 in rows:
        for a2 in rows:
            rect = Rect(a1, a2)
            parent = masses[rect]
            for check, c0, c1 in (
                ("additivity-x", Rect(a1 + "0", a2), Rect(a1 + "1", a2)),
                ("additivity-y", Rect(a1, a2 + "0"), Rect(a1, a2 + "1")),
            ):
                if c0 not in masses:
                    continue
                total = masses[c0] + masses[c1]
                if exact:
                    if total.lo != parent.lo:
                        violations.append(Violation(rect, check, parent.lo, total.lo))
                elif not total.intersects(parent):
                    violations.append(Violation(rect, check, parent, total))
    return ValidationReport(P.label, depth, len(masses), violations)


def _validate_exact(P: MeasureOracle, depth: int) -> ValidationReport:
    # cells in heap order: children of index i sit at 2i+1 and 2i+2
    rows = list(tree_cells(depth))
    size = len(rows)
    inner = (size - 1) // 2  # cells with children
    grid = [[P._mass(a1, a2) for a2 in rows] for a1 in rows]
    violations: list[Violation] = []
    if grid[0][0] != ONE:
        violations.append(Violation(Rect("", ""), "normalization", ONE, grid[0][0]))
    for i, line in enumerate(grid):
        for j, m in enumerate(line):
            if m < 0:
                violations.append(Violation(Rect(rows[i], rows[j]), "nonnegative", ZERO, m))
        if i < inner:
            left, right = grid[2 * i + 1], grid[2 * i + 2]
            for j, m in enumerate(line):
                total = left[j] + right[j]
                if total != m:
                    violations.append(Violation(Rect(rows[i], rows[j]), "additivity-x", m, total))
        for j in range(inner):
            total = line[2 * j + 1] + line[2 * j + 2]
            if total != line[j]:
                violations.append(Violation(Rect(rows[i], rows[j]), "additivity-y", line[j], total))
    violations.sort(key=lambda v: (len(v.rect.a1), v.rect.a1, len(v.rect.a2), v.rect.a2, v.check))
    return ValidationReport(P.label, depth, size * size, violations)
