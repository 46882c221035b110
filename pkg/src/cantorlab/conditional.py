"""Conditional probabilities along paths and the martingales behind them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from ._rational import ONE, ZERO, Q, dyadic, fmt
from .core import CylinderFunction, CylinderSet, RationalInterval, cells, tree_cells
from .measures import CantorMeasure, MeasureOracle, ZeroMarginalError, cond_interval


# ----------------------------------------------------------------------------
# paths

class PathGenerator:
    """Deterministic infinite bit sequence."""

    def __init__(self, bit: Callable[[int], int], label: str):
        self._bit = bit
        self.label = label
        self._memo: dict[int, int] = {}

    def bit(self, i: int) -> int:
        try:
            return self._memo[i]
        except KeyError:
            b = self._memo[i] = int(self._bit(i))
            if b not in (0, 1):
                raise ValueError(f"path {self.label} produced {b!r}")
            return b

    def prefix(self, n: int) -> str:
        return "".join("1" if self.bit(i) else "0" for i in range(n))

    def __repr__(self) -> str:
        return f"PathGenerator({self.label})"

    @classmethod
    def periodic(cls, pattern: str, head: str = "") -> "PathGenerator":
        """``head`` followed by ``pattern`` repeated forever."""
        if not pattern or pattern.strip("01") or head.strip("01"):
            raise ValueError("pattern and head must be bit strings, pattern nonempty")

        def bit(i: int) -> int:
            if i < len(head):
                return int(head[i])
            return int(pattern[(i - len(head)) % len(pattern)])

        return cls(bit, f"{head}({pattern})")

    @classmethod
    def zeros(cls) -> "PathGenerator":
        return cls.periodic("0")

    @classmethod
    def ones(cls) -> "PathGenerator":
        return cls.periodic("1")

    @classmethod
    def binary_expansion(cls, x) -> "PathGenerator":
        """Binary digits of a rational in [0, 1) (the expansion not ending in 1s)."""
        x = Q(x)
        if not ZERO <= x < ONE:
            raise ValueError("need 0 <= x < 1")
        num, den = int(x.numerator), int(x.denominator)
        digits: list[int] = []

        def bit(i: int) -> int:
            nonlocal num
            while len(digits) <= i:
                num *= 2
                digits.append(1 if num >= den else 0)
                if num >= den:
                    num -= den
            return digits[i]

        return cls(bit, f"bin({fmt(x)})")

    @classmethod
    def named(cls, name: str) -> "PathGenerator":
        """``zeros``, ``ones``, ``alt`` (0101...), ``p:<bits>``, or ``x:<p/q>``."""
        if name == "zeros":
            return cls.zeros()
        if name == "ones":
            return cls.ones()
        if name == "alt":
            return cls.periodic("01")
        if name.startswith("p:"):
            return cls.periodic(name[2:])
        if name.startswith("x:"):
            return cls.binary_expansion(Q(name[2:]))
        raise ValueError(f"unknown path {name!r}")


# ----------------------------------------------------------------------------
# martingales

@dataclass(frozen=True)
class Martingale:
    """Values on every cell of depth <= ``depth``; ``None`` where undefined.

    ``measure`` is the reference measure on Omega_1 the fairness condition
    ``P1(a) m(a) = P1(a0) m(a0) + P1(a1) m(a1)`` refers to.
    """

    depth: int
    values: dict
    measure: CantorMeasure

    def __call__(self, cell: str):
        return self.values[cell]

    @property
    def initial(self):
        return self.values[""]

    def leaves(self) -> CylinderFunction:
        """Deepest level as a cylinder function (undefined cells become 0)."""
        return CylinderFunction(self.depth, tuple(self.values[c] or ZERO for c in cells(self.depth)))

    def to_rows(self) -> list[tuple[str, str]]:
        return [(c, "" if v is None else fmt(v)) for c, v in self.values.items()]


def conditional_martingale(P: MeasureOracle, a2: str, depth: int) -> Martingale:
    """``m(a1) = P(a1, a2) / P_1(a1)`` on all cells to ``depth``; None on zero-marginal cells."""
    values = {}
    for a1 in tree_cells(depth):
        den = P.p(a1, "")
        values[a1] = P.p(a1, a2) / den if den else None
    return Martingale(depth, values, P.marginal_measure)


def doubling_martingale(P1: CantorMeasure, depth: int, target: str = "1") -> Martingale:
    """Bet everything on the next bit matching ``target`` (periodic) at every step.

    Starts at 1; multiplies by ``1 / P1(next bit | cell)`` on the predicted
    bit and drops to 0 otherwise.
    """
    values: dict = {"": ONE}
    for a in tree_cells(depth - 1):
        m = values[a]
        guess = target[len(a) % len(target)]
        for b in "01":
            child = a + b
            if m is None or P1.mass(a) == 0 or P1.mass(child) == 0:
                values[child] = None
            elif b == guess:
                values[child] = m * P1.mass(a) / P1.mass(child)
            else:
                values[child] = ZERO
    return Martingale(depth, values, P1)


@dataclass
class MartingaleReport:
    checked: int
    violations: list[tuple[str, object, object]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def martingale_check(m: Martingale, P1: CantorMeasure | None = None) -> MartingaleReport:
    """Exact fairness check at every internal cell where ``m`` is defined."""
    P1 = P1 or m.measure
    report = MartingaleReport(0)
    for a in tree_cells(m.depth - 1):
        v = m(a)
        if v is None:
            continue
        rhs = ZERO
        for child in (a + "0", a + "1"):
            w = m(child)
            if w is not None:
                rhs += P1.mass(child) * w
            elif P1.mass(child) != 0:
                report.violations.append((child, "undefined", P1.mass(child)))
        lhs = P1.mass(a) * v
        report.checked += 1
        if lhs != rhs:
            report.violations.append((a, lhs, rhs))
    return report


@dataclass(frozen=True)
class ExceedResult:
    cells: CylinderSet
    measure: object
    bound: object

    @property
    def ok(self) -> bool:
        return self.measure <= self.bound


def exceed_set(m: Martingale, c) -> ExceedResult:
    """Maximal cells where ``m`` first reaches ``c``, with their exact measure.

    The bound reported is ``m(empty) / c``.
    """
    c = Q(c)
    if c <= 0:
        raise ValueError("threshold must be positive")
    hits: list[str] = []
    stack = [""]
    while stack:
        a = stack.pop()
        v = m(a)
        if v is None:
            continue
        if v >= c:
            hits.append(a)
        elif len(a) < m.depth:
            stack.extend((a + "1", a + "0"))
    hits.sort()
    total = ZERO
    for a in hits:
        total += m.measure.mass(a)
    return ExceedResult(CylinderSet.from_prefixes(hits), total, m.initial / c)


@dataclass(frozen=True)
class Follower:
    capital: Martingale
    crossings: dict  # cell -> completed upcrossings along the path to it
    u: object
    v: object

    def measure_at_least(self, n: int):
        """Measure of depth-``d`` cells with at least ``n`` completed upcrossings."""
        total = ZERO
        for c in cells(self.capital.depth):
            if self.capital(c) is not None and self.crossings[c] >= n:
                total += self.capital.measure.mass(c)
        return total


def follower_martingale(m: Martingale, u, v) -> Follower:
    """Buy-low/sell-high capital process following ``m`` between ``u`` and ``v``.

    The capital starts at 1 and idles until ``m`` drops below ``u``; from
    then on it scales with ``m``'s relative moves until ``m`` rises above
    ``v``, which completes one upcrossing, and it idles again.
    """
    u, v = Q(u), Q(v)
    if not ZERO < u < v:
        raise ValueError("need 0 < u < v")
    capital: dict = {"": ONE if m.initial is not None else None}
    active = {"": m.initial is not None and m.initial < u}
    crossings = {"": 0}
    for a in tree_cells(m.depth - 1):
        k, ma = capital[a], m(a)
        for b in "01":
            child = a + b
            mc = m(child)
            crossings[child] = crossings[a]
            if k is None or mc is None:
                capital[child] = None
                active[child] = False
                continue
            if active[a]:
                capital[child] = k * mc / ma if ma else k
                if mc > v:
                    active[child] = False
                    crossings[child] += 1
                else:
                    active[child] = True
            else:
                capital[child] = k
                active[child] = mc < u
    return Follower(Martingale(m.depth, capital, m.measure), crossings, u, v)


def upcrossing_bound_check(m: Martingale, u, v, max_n: int = 4) -> list[tuple[int, object, object, bool]]:
    """Rows ``(N, measure of >=N upcrossings, (u/v)**N, ok)`` for N = 1..max_n."""
    f = follower_martingale(m, u, v)
    ratio = Q(u) / Q(v)
    rows = []
    for n in range(1, max_n + 1):
        measure = f.measure_at_least(n)
        rows.append((n, measure, ratio**n, measure <= ratio**n))
    return rows


# ----------------------------------------------------------------------------
# traces

@dataclass
class ConvergenceTrace:
    values: list[tuple[int, RationalInterval]]
    verdict: str = "undecided"  # converged | oscillating | undecided
    limit: RationalInterval | None = None
    bands: tuple = ()
    history: list[str] = field(default_factory=list)  # verdict after each depth

    def to_rows(self) -> list[tuple[str, ...]]:
        return [
            (str(d), fmt(e.lo), fmt(e.hi), verdict)
            for (d, e), verdict in zip(self.values, self.history)
        ]


def classify(values: Sequence[RationalInterval], window: int, tol) -> tuple[str, RationalInterval | None, tuple]:
    """Verdict on the trailing ``window`` enclosures.

    *converged* when they fit in one band of width ``tol``; *oscillating*
    when they split into two disjoint bands of width ``tol``, each hit at
    least three times.
    """
    tol = Q(tol)
    if len(values) < window:
        return "undecided", None, ()
    tail = list(values[-window:])
    hull = tail[0]
    for e in tail[1:]:
        hull = hull.hull(e)
    if hull.width <= tol:
        return "converged", hull, ()
    ordered = sorted(tail, key=lambda e: (e.mid, e.lo))
    gaps = [(ordered[i + 1].lo - ordered[i].hi, i) for i in range(len(ordered) - 1)]
    gap, cut = max(gaps)
    low, high = ordered[: cut + 1], ordered[cut + 1 :]
    if gap > tol and len(low) >= 3 and len(high) >= 3:
        bands = []
        for group in (low, high):
            band = group[0]
            for e in group[1:]:
                band = band.hull(e)
            bands.append(band)
        if all(b.width <= tol for b in bands):
            return "oscillating", None, tuple(bands)
    return "undecided", None, ()


def conditional_trace(
    P: MeasureOracle,
    path: PathGenerator,
    a2: str,
    maxdepth: int,
    window: int = 6,
    tol=dyadic(10),
    precision=None,
) -> ConvergenceTrace:
    """Interval-conditioned probabilities of ``[a2]`` along the prefixes of ``path``."""
    trace = ConvergenceTrace([])
    encls: list[RationalInterval] = []
    for d in range(maxdepth + 1):
        try:
            e = cond_interval(P, path.prefix(d), a2, precision)
        except ZeroMarginalError as err:
            raise ZeroMarginalError(str(err), depth=d, partial=trace) from None
        encls.append(e)
        trace.values.append((d, e))
        verdict, limit, bands = classify(encls, window, tol)
        trace.history.append(verdict)
        trace.verdict, trace.limit, trace.bands = verdict, limit, bands
    return trace


@dataclass
class AdditivityReport:
    rows: list[tuple[str, RationalInterval | None, RationalInterval | None, bool | None]]

    @property
    def ok(self) -> bool | None:
        if any(r[3] is None for r in self.rows):
            return None
        return all(r[3] for r in self.rows)


def additivity_of_limits(
    P: MeasureOracle,
    path: PathGenerator,
    parents: Iterable[str],
    maxdepth: int,
    window: int = 6,
    tol=dyadic(10),
) -> AdditivityReport:
    """Check ``limit(a2) = limit(a2 0) + limit(a2 1)`` within enclosure widths.

    A row's status is None when any of the three traces is undecided.
    """
    rows = []
    for a2 in parents:
        traces = [conditional_trace(P, path, b, maxdepth, window, tol) for b in (a2, a2 + "0", a2 + "1")]
        if any(t.verdict != "converged" for t in traces):
            rows.append((a2, None, None, None))
            continue
        parent, c0, c1 = (t.limit for t in traces)
        total = c0 + c1
        rows.append((a2, parent, total, parent.intersects(total)))
    return AdditivityReport(rows)
