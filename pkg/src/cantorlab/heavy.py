"""Heavy intervals, section bounds and the discard-below transform."""

from __future__ import annotations

from dataclasses import dataclass, field

from ._rational import ZERO, Q, dyadic, fmt
from .core import BasicSet, Rect, left_endpoint, cylinder_length
from .conditional import PathGenerator
from .measures import InsufficientTermsError, MeasureOracle, SequenceConfig


@dataclass
class HeavyScan:
    n: int
    U: BasicSet
    heavy: list[str]
    union_measure: object
    set_measure: object
    skipped: list[str] = field(default_factory=list)

    @property
    def bound(self):
        return dyadic(self.n)

    @property
    def hypothesis(self) -> bool:
        """Whether ``P(U) <= 2**-2n``, under which the union bound is guaranteed."""
        return self.set_measure <= dyadic(2 * self.n)

    @property
    def ok(self) -> bool:
        return not self.hypothesis or self.union_measure <= self.bound

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "heavy": self.heavy,
            "union_measure": fmt(self.union_measure),
            "bound": fmt(self.bound),
            "set_measure": fmt(self.set_measure),
            "hypothesis": self.hypothesis,
            "skipped": self.skipped,
            "ok": self.ok,
        }


def is_heavy(P: MeasureOracle, U: BasicSet, interval: str, n: int) -> bool:
    """``P(U ∩ (I x Omega_2)) > 2**-n * P_1(I)`` (strict)."""
    return P.stripe_mass(U, interval) > dyadic(n) * P.p(interval, "")


def enumerate_heavy(P: MeasureOracle, U: BasicSet, n: int, maxdepth: int) -> HeavyScan:
    """Maximal ``n``-heavy dyadic intervals found top-down to ``maxdepth``.

    Zero-marginal intervals are skipped together with their subtrees.
    """
    heavy: list[str] = []
    skipped: list[str] = []
    threshold = dyadic(n)
    frontier = [""]
    while frontier:
        nxt = []
        for interval in frontier:
            h = P.p(interval, "")
            if h == 0:
                skipped.append(interval)
                continue
            if P.stripe_mass(U, interval) > threshold * h:
                heavy.append(interval)
            elif len(interval) < maxdepth:
                nxt.extend((interval + "0", interval + "1"))
        frontier = nxt
    heavy.sort()
    union = ZERO
    for interval in heavy:
        union += P.p(interval, "")
    return HeavyScan(n, U, heavy, union, P.measure(U), skipped)


@dataclass
class SectionCheck:
    status: str  # "ok" | "violated" | "precondition"
    reason: str
    prefix: str
    value: object = None
    bound: object = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def section_bound_check(
    P: MeasureOracle, U: BasicSet, n: int, path: PathGenerator, depth: int, slack=ZERO
) -> SectionCheck:
    """Interval-conditioned measure of the section of ``U`` along ``path`` at ``depth``.

    Verifies it is at most ``2**-n + slack`` when the path avoids every
    heavy interval of the scan to ``depth``; otherwise reports the unmet
    precondition.
    """
    prefix = path.prefix(depth)
    scan = enumerate_heavy(P, U, n, depth)
    for interval in scan.heavy:
        if prefix.startswith(interval):
            return SectionCheck("precondition", f"path inside heavy interval [{interval}]", prefix)
    section, stable = U.section(prefix)
    if not stable:
        return SectionCheck("precondition", "set not stable over the path prefix", prefix)
    h = P.p(prefix, "")
    if h == 0:
        return SectionCheck("precondition", "zero-marginal stripe", prefix)
    value = P.column_mass(prefix, section) / h
    bound = dyadic(n) + Q(slack)
    status = "ok" if value <= bound else "violated"
    return SectionCheck(status, "", prefix, value, bound)


def _round_up(x, bits: int):
    scaled = x * (1 << bits)
    q = scaled.numerator // scaled.denominator
    if q * scaled.denominator != scaled.numerator:
        q += 1
    return Q(q, 1 << bits)


def _cylinders_between(lo, hi, bits: int) -> list[str]:
    """Dyadic cylinders of length ``bits`` tiling ``[lo, hi)`` (grid-aligned bounds)."""
    start = int(lo * (1 << bits))
    stop = int(hi * (1 << bits))
    return [format(i, f"0{bits}b") for i in range(start, stop)]


def discard_below(U: BasicSet, cfg: SequenceConfig, min_bits: int | None = None) -> BasicSet:
    """Cut every rectangle of x-width ``2**-k`` down to ``y >= a_k``.

    ``a_k`` is rounded up to a dyadic grid of ``max(len(a2), 2k)`` bits
    (or ``max(len(a2), min_bits)`` when given) so the result stays a basic
    set; rounding up only discards more.  Full-width rectangles are kept.
    """
    out = []
    for a1, a2 in U.rects:
        k = len(a1)
        if k == 0:
            out.append(Rect(a1, a2))
            continue
        if k > len(cfg.a):
            raise InsufficientTermsError(f"rect of x-depth {k} needs {k} sequence terms")
        bits = max(len(a2), 2 * k if min_bits is None else min_bits)
        cut = _round_up(cfg.term(k), bits)
        y0 = left_endpoint(a2)
        y1 = y0 + cylinder_length(a2)
        lo = max(y0, cut)
        if lo >= y1:
            continue
        if lo == y0:
            out.append(Rect(a1, a2))
        else:
            out.extend(Rect(a1, b) for b in _cylinders_between(lo, y1, bits))
    return BasicSet.from_rects(out)
