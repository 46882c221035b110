"""Expectation-bounded tests at finite depth and their compositions.

A test is a nonnegative cylinder function whose integral under the
reference measure is at most 1; its deficiency is ``floor(log2 t)``.  The
constructions here combine a test ``t1`` on Omega_1 with a family of
conditional tests on Omega_2 (one per first-coordinate cell and integer
condition ``k``) into tests on the product of a kernel measure.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from ._rational import ONE, ZERO, Q, ceil_log2, dyadic, floor_log2, fmt
from .core import CantorLabError, CylinderFunction, RationalInterval, cells, from_fibers
from .measures import CantorMeasure, KernelConfig, MeasureOracle


class KraftError(CantorLabError):
    """A code-length provider violates the Kraft inequality."""


# ----------------------------------------------------------------------------
# integrals and tests

def integral(f: CylinderFunction, P: CantorMeasure | MeasureOracle):
    """Exact ``sum(value * mass)`` over the cells of ``f``."""
    total = ZERO
    if f.arity == 1:
        for c, v in f.items():
            if v:
                total += v * P.mass(c)
        return total
    if not isinstance(P, MeasureOracle):
        raise TypeError("a product function needs a product-space measure")
    for (a1, a2), v in f.items():
        if v:
            total += v * P.p(a1, a2)
    return total


@dataclass(frozen=True)
class ExpectationTest:
    f: CylinderFunction
    measure: object
    integral: object
    scaled: bool = False

    def __call__(self, *cell):
        return self.f(*cell)


def make_test(f: CylinderFunction, P) -> ExpectationTest:
    """Return ``f`` itself if its integral is at most 1, else ``f`` divided by it."""
    total = integral(f, P)
    if total <= ONE:
        return ExpectationTest(f, P, total, False)
    return ExpectationTest(f.scale(ONE / total), P, ONE, True)


@dataclass
class ConditionalTestFamily:
    """Tests ``t2(w, k)`` on Omega_2 for every depth-``depth`` cell ``w`` and ``0 <= k <= max_k``."""

    depth: int
    max_k: int
    members: Mapping[tuple[str, int], CylinderFunction]

    def __post_init__(self):
        for w in cells(self.depth):
            for k in range(self.max_k + 1):
                if (w, k) not in self.members:
                    raise ValueError(f"family is missing member ({w!r}, {k})")

    def __call__(self, w: str, k: int) -> CylinderFunction:
        k = min(max(k, 0), self.max_k)
        return self.members[(w[: self.depth], k)]

    @property
    def y_depth(self) -> int:
        return max(f.depth for f in self.members.values())

    def check(self, kernel: KernelConfig) -> list[tuple[str, int, object]]:
        """Members whose integral under the fiber measure exceeds 1."""
        bad = []
        for (w, k), f in self.members.items():
            total = integral(f, kernel.fiber(w))
            if total > ONE:
                bad.append((w, k, total))
        return bad


def trimmed_family(depth: int, max_k: int, raw: Mapping[tuple[str, int], CylinderFunction], kernel: KernelConfig) -> ConditionalTestFamily:
    """Scale every member down to integral 1 under its fiber when needed."""
    members = {key: make_test(f, kernel.fiber(key[0])).f for key, f in raw.items()}
    return ConditionalTestFamily(depth, max_k, members)


def _cell_depth(t1: ExpectationTest, fam: ConditionalTestFamily, kernel: KernelConfig) -> tuple[int, int]:
    return max(t1.f.depth, fam.depth, kernel.depth), fam.y_depth


def product_construction(
    t1: ExpectationTest, fam: ConditionalTestFamily, P1: CantorMeasure, kernel: KernelConfig
) -> CylinderFunction:
    """``T(w, w') = t1(w) * fam(w, d1(w))(w')`` with ``d1 = floor(log2 t1)`` clamped to ``[0, max_k]``."""
    xd, yd = _cell_depth(t1, fam, kernel)
    depth = max(xd, yd)
    fibers = []
    for w in cells(depth):
        t = t1.f(w)
        if t == 0:
            fibers.append(CylinderFunction.constant(ZERO, depth))
            continue
        d = floor_log2(t)
        fibers.append(fam(w, d).refine(depth).scale(t))
    return from_fibers(fibers)


def sum_construction(
    t1: ExpectationTest, fam: ConditionalTestFamily, P1: CantorMeasure, kernel: KernelConfig
) -> CylinderFunction:
    """``T'(w, w') = sum_{0 <= k < d1(w)} 2**k * fam(w, k)(w')``.

    Conditions beyond ``max_k`` reuse the top member, which is still a test.
    """
    xd, yd = _cell_depth(t1, fam, kernel)
    depth = max(xd, yd)
    fibers = []
    for w in cells(depth):
        t = t1.f(w)
        acc = [ZERO] * (1 << depth)
        if t > 0:
            for k in range(floor_log2(t)):
                member = fam(w, k).refine(depth)
                weight = Q(1 << k)
                acc = [a + weight * v for a, v in zip(acc, member.values)]
        fibers.append(CylinderFunction(depth, tuple(acc)))
    return from_fibers(fibers)


@dataclass
class RatioTrim:
    function: CylinderFunction
    untouched: list[str]
    trimmed: list[str]
    fiber_integrals: dict = field(default_factory=dict)


def ratio_trim(tP: CylinderFunction, d: int, c: int, P1: CantorMeasure, kernel: KernelConfig) -> RatioTrim:
    """Divide a product test by ``2**(d+c)`` and cap every fiber at integral 1.

    Fibers whose integral is already at most 1 are left exactly as divided.
    """
    if tP.arity != 2:
        raise TypeError("ratio_trim needs a product function")
    if tP.depth < kernel.depth:
        tP = tP.refine(kernel.depth)
    divisor = dyadic(-(d + c))
    fibers, untouched, trimmed, integrals = [], [], [], {}
    for w in cells(tP.depth):
        fiber = tP.fiber(w).scale(ONE / divisor)
        total = integral(fiber, kernel.fiber(w))
        integrals[w] = total
        if total <= ONE:
            untouched.append(w)
        else:
            fiber = fiber.scale(ONE / total)
            trimmed.append(w)
        fibers.append(fiber)
    return RatioTrim(from_fibers(fibers), untouched, trimmed, integrals)


def smallest_untrimmed_c(tP: CylinderFunction, d: int, kernel: KernelConfig) -> int:
    """Least integer ``c`` for which :func:`ratio_trim` leaves every fiber untouched."""
    if tP.depth < kernel.depth:
        tP = tP.refine(kernel.depth)
    worst = max(integral(tP.fiber(w), kernel.fiber(w)) for w in cells(tP.depth))
    if worst == 0:
        return -d
    return ceil_log2(worst) - d


# ----------------------------------------------------------------------------
# deficiencies

@dataclass(frozen=True)
class DeficiencyField:
    """``floor(log2 t)`` per cell; ``None`` marks cells where ``t = 0``."""

    depth: int
    values: tuple
    arity: int = 1

    def __call__(self, *cell):
        f = CylinderFunction(self.depth, (ZERO,) * len(self.values), self.arity)
        keys = f.keys()
        return self.values[keys.index(cell[0] if self.arity == 1 else tuple(cell))]


def deficiency(t: ExpectationTest | CylinderFunction) -> DeficiencyField:
    f = t.f if isinstance(t, ExpectationTest) else t
    return DeficiencyField(f.depth, tuple(floor_log2(v) if v > 0 else None for v in f.values), f.arity)


# ----------------------------------------------------------------------------
# finite-set deficiency

CodeLength = Callable[[Hashable, Sequence], int]


class UniformCode:
    """Every element gets ``ceil(log2 |A|)`` bits."""

    kraft_guaranteed = True

    def __call__(self, x, A) -> int:
        return ceil_log2(len(A)) if len(A) > 1 else 0


def _runs(x) -> int:
    s = str(x)
    return 1 + sum(1 for a, b in zip(s, s[1:]) if a != b)


class SimplicityCode:
    """Elias-gamma length of an element's rank under a simplicity order.

    Elements are ranked by ``key`` (default: number of runs, then the
    string itself); rank ``r`` (from 1) gets ``2 * floor(log2 r) + 1``
    bits, a prefix-free length assignment.
    """

    kraft_guaranteed = True

    def __init__(self, key: Callable | None = None):
        self.key = key or (lambda x: (_runs(x), str(x)))
        self._ranks: dict = {}

    def __call__(self, x, A) -> int:
        cache_key = id(A)
        ranks = self._ranks.get(cache_key)
        if ranks is None or ranks[0] is not A:
            ordered = sorted(A, key=self.key)
            ranks = (A, {y: i + 1 for i, y in enumerate(ordered)})
            self._ranks[cache_key] = ranks
        r = ranks[1][x]
        return 2 * (r.bit_length() - 1) + 1


class TableCode:
    """Explicit code lengths."""

    kraft_guaranteed = False

    def __init__(self, lengths: Mapping):
        self.lengths = dict(lengths)

    def __call__(self, x, A) -> int:
        return self.lengths[x]


class CompressorCode:
    """zlib output length in bits; a demo provider with no Kraft guarantee."""

    kraft_guaranteed = False

    def __init__(self, level: int = 9):
        self.level = level

    def __call__(self, x, A) -> int:
        return 8 * len(zlib.compress(str(x).encode(), self.level))


def kraft_sum(codelen: CodeLength, A: Sequence):
    total = ZERO
    for x in A:
        total += dyadic(codelen(x, A))
    return total


@dataclass(frozen=True)
class FiniteDeficiency:
    """``log2 |A| - codelen(x | A)``.

    ``power`` is ``2**deficiency = |A| * 2**-codelen`` exactly;
    ``bounds`` encloses the deficiency itself (a point when ``|A|`` is a
    power of two).
    """

    size: int
    codelen: int
    power: object

    @property
    def bounds(self) -> RationalInterval:
        lo = floor_log2(self.size) - self.codelen
        hi = ceil_log2(self.size) - self.codelen
        return RationalInterval(lo, hi)

    @property
    def exact(self):
        b = self.bounds
        return b.lo if b.is_exact else None


def finite_deficiency(x, A: Sequence, codelen: CodeLength, check_kraft: bool = True) -> FiniteDeficiency:
    if x not in A:
        raise ValueError(f"{x!r} is not an element of the set")
    if check_kraft and len(A) <= 1 << 10:
        total = kraft_sum(codelen, A)
        if total > ONE:
            raise KraftError(f"Kraft sum {fmt(total)} exceeds 1")
    ell = codelen(x, A)
    return FiniteDeficiency(len(A), ell, Q(len(A)) * dyadic(ell))


def kraft_identity(codelen: CodeLength, A: Sequence) -> tuple[object, object, bool]:
    """``(sum_x 2**d(x|A), |A|, holds)``."""
    total = ZERO
    for x in A:
        total += finite_deficiency(x, A, codelen, check_kraft=False).power
    return total, Q(len(A)), total <= len(A)


def binary_strings(n: int) -> list[str]:
    return list(cells(n))
