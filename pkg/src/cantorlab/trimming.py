"""Trimming an increasing sequence of basic sets so every section is small.

Vertical stripes ``[I] x Omega_2`` are named by the bit string ``I``.  A
stripe is good for a set ``U`` (tolerance ``delta``) when ``U`` is stable in
it, the oracle bounds for the section and the enclosure of the vertical
size all fit in one interval of length ``delta``, and the upper bound of
the vertical size is below ``epsilon``.  Stage ``k`` keeps ``U_k`` inside
the maximal stripes that are good both for ``U_{k-1}`` and ``U_k`` (found
inside the stage ``k-1`` stripes); earlier stages keep what they let
through.  The measure bounds hold for any nested oracle; only coverage
depends on the oracle being honest.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ._rational import ONE, ZERO, Q, dyadic, fmt
from .core import (
    BasicSet,
    CantorLabError,
    CylinderSet,
    PreconditionError,
    RationalInterval,
    Rect,
    ratio_enclosure,
)
from .conditional import PathGenerator
from .measures import MeasureOracle, ZeroMarginalError

UNIT = RationalInterval(ZERO, ONE)


class NotStableError(CantorLabError):
    """The set is not stable in the stripe."""


class DepthExhaustedError(PreconditionError):
    """No good stripe was found along the path before the depth limit."""


# ----------------------------------------------------------------------------
# oracle for the tentative conditional probabilities

Schedule = Callable[[int], object]


def make_schedule(spec: str | Schedule | None) -> Schedule:
    """Width of the oracle enclosure at each stripe level.

    ``"none"`` gives width 0, ``"halving"`` gives ``2**-level`` and
    ``"delayed:j"`` gives the whole unit interval before level ``j`` and
    ``2**-(level - j)`` afterwards.
    """
    if callable(spec):
        return spec
    if spec in (None, "halving"):
        return lambda level: dyadic(level)
    if spec == "none":
        return lambda level: ZERO
    if isinstance(spec, str) and spec.startswith("delayed:"):
        j = int(spec.split(":", 1)[1])
        return lambda level: Q(2) if level < j else dyadic(level - j)
    raise ValueError(f"unknown slowdown schedule {spec!r}")


class GammaOracle(ABC):
    """Nested lower/upper bounds for the conditional probability of ``V``.

    ``bounds(prefix', V)`` is contained in ``bounds(prefix, V)`` whenever
    ``prefix'`` extends ``prefix``.  Subclasses supply a raw estimate per
    prefix; it is widened by the schedule and intersected with the parent's
    bounds.  When the intersection is empty the parent's bounds are kept,
    and a prefix without an estimate (zero marginal) also inherits them.
    """

    def __init__(self, slowdown: str | Schedule | None = "halving"):
        self.schedule = make_schedule(slowdown)
        self._cache: dict = {}

    @abstractmethod
    def estimate(self, prefix: str, V: CylinderSet): ...

    def bounds(self, prefix: str, V: CylinderSet) -> RationalInterval:
        key = (prefix, V.tree)
        try:
            return self._cache[key]
        except KeyError:
            pass
        parent = self.bounds(prefix[:-1], V) if prefix else UNIT
        raw = self.estimate(prefix, V)
        result = parent
        if raw is not None:
            half = Q(self.schedule(len(prefix))) / 2
            candidate = RationalInterval(raw - half, raw + half).clip()
            inter = parent.intersect(candidate)
            if inter is not None:
                result = inter
        self._cache[key] = result
        return result


def _conditional(P: MeasureOracle, prefix: str, V: CylinderSet):
    h = P.p(prefix, "")
    return P.column_mass(prefix, V) / h if h else None


class HonestGamma(GammaOracle):
    def __init__(self, P: MeasureOracle, slowdown="halving"):
        super().__init__(slowdown)
        self.P = P

    def estimate(self, prefix, V):
        return _conditional(self.P, prefix, V)


class AdversarialGamma(GammaOracle):
    """Honest along one path, reports a decoy measure's conditionals elsewhere."""

    def __init__(self, P: MeasureOracle, path: PathGenerator, decoy: MeasureOracle, slowdown="halving"):
        super().__init__(slowdown)
        self.P, self.path, self.decoy = P, path, decoy

    def on_path(self, prefix: str) -> bool:
        return self.path.prefix(len(prefix)) == prefix

    def estimate(self, prefix, V):
        return _conditional(self.P if self.on_path(prefix) else self.decoy, prefix, V)


def honest_gamma(P: MeasureOracle, slowdown="halving") -> HonestGamma:
    return HonestGamma(P, slowdown)


def adversarial_gamma(P: MeasureOracle, path: PathGenerator, decoy: MeasureOracle, slowdown="halving") -> AdversarialGamma:
    return AdversarialGamma(P, path, decoy, slowdown)


# ----------------------------------------------------------------------------
# stripes

def vertical_size(P: MeasureOracle, U: BasicSet, stripe: str, precision=None) -> RationalInterval:
    """Enclosure of ``P(U ∩ S) / P(S)`` for a stripe where ``U`` is stable."""
    V, stable = U.section(stripe)
    if not stable:
        raise NotStableError(f"set not stable in stripe [{stripe}]")
    if P.exact:
        h = P.p(stripe, "")
        if h == 0:
            raise ZeroMarginalError(f"zero-marginal stripe [{stripe}]", depth=len(stripe))
        return RationalInterval.point(P.column_mass(stripe, V) / h)
    target = Q(precision) if precision is not None else dyadic(len(stripe))
    pieces = V.prefixes
    step = target / (len(pieces) + 1)
    for _ in range(200):
        den = P.mass(Rect(stripe, ""), step)
        if den.lo > 0:
            num = RationalInterval.point(ZERO)
            for b in pieces:
                num = num + P.mass(Rect(stripe, b), step)
            ratio = ratio_enclosure(num, den).clip()
            if ratio.width <= target:
                return ratio
        step /= 2
    raise ZeroMarginalError(f"zero-marginal stripe [{stripe}]", depth=len(stripe))


@dataclass(frozen=True)
class Goodness:
    good: bool
    reason: str
    witness: tuple = ()  # (gamma_lo, gamma_hi, v_lo, v_hi)

    def __bool__(self) -> bool:
        return self.good


def is_good(P: MeasureOracle, gamma: GammaOracle, U: BasicSet, stripe: str, delta, epsilon, precision=None) -> Goodness:
    V, stable = U.section(stripe)
    if not stable:
        return Goodness(False, "not stable")
    if P.exact and P.p(stripe, "") == 0:
        return Goodness(False, "zero-marginal stripe")
    try:
        v = vertical_size(P, U, stripe, precision if precision is not None else dyadic(len(stripe)))
    except ZeroMarginalError:
        return Goodness(False, "zero-marginal stripe")
    g = gamma.bounds(stripe, V)
    witness = (g.lo, g.hi, v.lo, v.hi)
    spread = max(witness) - min(witness)
    if spread > Q(delta):
        return Goodness(False, "spread exceeds delta", witness)
    if not v.hi < Q(epsilon):
        return Goodness(False, "vertical size not below epsilon", witness)
    return Goodness(True, "good", witness)


# ----------------------------------------------------------------------------
# the staged construction

@dataclass(frozen=True)
class TrimConfig:
    epsilon: object
    deltas: tuple
    maxdepth: int = 10

    def __post_init__(self):
        eps = Q(self.epsilon)
        deltas = tuple(Q(d) for d in self.deltas)
        if not ZERO < eps < ONE:
            raise ValueError("epsilon must lie in (0, 1)")
        if any(d <= 0 for d in deltas) or any(x <= y for x, y in zip(deltas, deltas[1:])):
            raise ValueError("deltas must be positive and strictly decreasing")
        if sum(deltas, ZERO) >= eps:
            raise ValueError("sum of deltas must stay below epsilon")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "deltas", deltas)

    @classmethod
    def default(cls, epsilon, stages: int = 4, maxdepth: int = 10) -> "TrimConfig":
        """``delta_i = epsilon * 2**-(i+1)``."""
        eps = Q(epsilon)
        return cls(eps, tuple(eps * dyadic(i + 1) for i in range(1, stages + 1)), maxdepth)

    def delta(self, i: int):
        """``delta_i`` for 1-based ``i``."""
        if i > len(self.deltas):
            raise ValueError(f"config has only {len(self.deltas)} deltas, stage {i} requested")
        return self.deltas[i - 1]


class CoverSequence(tuple):
    """Increasing tuple of basic sets ``U_1 ⊆ U_2 ⊆ ...``."""

    def __new__(cls, sets: Sequence[BasicSet] = ()):
        sets = tuple(sets)
        for i, (a, b) in enumerate(zip(sets, sets[1:]), 1):
            if not a <= b:
                raise ValueError(f"U_{i} is not contained in U_{i + 1}")
        return super().__new__(cls, sets)

    @classmethod
    def accumulate(cls, steps: Sequence[BasicSet]) -> "CoverSequence":
        """Running unions of ``steps``."""
        out, acc = [], BasicSet.empty()
        for s in steps:
            acc = acc | s
            out.append(acc)
        return cls(out)


@dataclass(frozen=True)
class LedgerRow:
    stage: int
    set: str
    measure: object
    bound: object

    @property
    def ok(self) -> bool:
        return self.measure <= self.bound

    def to_csv(self) -> tuple[str, ...]:
        return (str(self.stage), self.set, fmt(self.measure), fmt(self.bound), "1" if self.ok else "0")


@dataclass
class TrimResult:
    covers: CoverSequence
    config: TrimConfig
    stripes: list[list[str]]
    G: list[BasicSet]
    U_hat: list[BasicSet]
    ledger: list[LedgerRow] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.ledger)


def _search(roots: Sequence[str], test: Callable[[str], bool], maxdepth: int) -> list[str]:
    """Maximal stripes passing ``test`` under ``roots``, breadth-first, left first."""
    found = []
    for root in roots:
        frontier = [root]
        while frontier:
            nxt = []
            for s in frontier:
                if test(s):
                    found.append(s)
                elif len(s) < maxdepth:
                    nxt.extend((s + "0", s + "1"))
            frontier = nxt
    return found


def trim(P: MeasureOracle, gamma: GammaOracle, covers: Sequence[BasicSet], cfg: TrimConfig) -> TrimResult:
    covers = covers if isinstance(covers, CoverSequence) else CoverSequence(covers)
    eps = cfg.epsilon
    memo: dict = {}

    def good(i: int, stripe: str) -> bool:
        key = (i, stripe)
        if key not in memo:
            memo[key] = is_good(P, gamma, covers[i - 1], stripe, cfg.delta(i), eps).good
        return memo[key]

    stripes: list[list[str]] = []
    G: list[BasicSet] = []
    for k in range(1, len(covers) + 1):
        if k == 1:
            found = _search([""], lambda s: good(1, s), cfg.maxdepth)
        else:
            found = _search(stripes[-1], lambda s, k=k: good(k - 1, s) and good(k, s), cfg.maxdepth)
        found.sort()
        stripes.append(found)
        G.append(BasicSet.stripes(found))

    U_hat = [_trimmed(covers, G, k) for k in range(1, len(covers) + 1)]
    result = TrimResult(covers, cfg, stripes, G, U_hat)
    result.ledger = verify_bounds(result, P, cfg).rows
    return result


def _trimmed(covers: Sequence[BasicSet], G: Sequence[BasicSet], k: int) -> BasicSet:
    out = covers[k - 1] & G[k - 1]
    for i in range(1, k):
        out = out | (covers[i - 1] & (G[i - 1] - G[i]))
    return out


@dataclass
class BoundsReport:
    rows: list[LedgerRow]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def violations(self) -> list[LedgerRow]:
        return [r for r in self.rows if not r.ok]


def verify_bounds(result: TrimResult, P: MeasureOracle, cfg: TrimConfig | None = None) -> BoundsReport:
    """Recompute every measure bound of a trim run exactly."""
    cfg = cfg or result.config
    eps = cfg.epsilon
    covers, G, U_hat = result.covers, result.G, result.U_hat
    mass = P.measure
    rows: list[LedgerRow] = []
    for i in range(1, len(covers) + 1):
        Gi = G[i - 1]
        rows.append(LedgerRow(i, f"U_{i}&G_{i}", mass(covers[i - 1] & Gi), eps * mass(Gi)))
        if i >= 2:
            ring = G[i - 2] - Gi
            rows.append(
                LedgerRow(
                    i,
                    f"U_{i - 1}&(G_{i - 1}-G_{i})",
                    mass(covers[i - 2] & ring),
                    eps * mass(ring) + 2 * cfg.delta(i - 1) * mass(Gi),
                )
            )
            for s in result.stripes[i - 2]:
                rows.append(
                    LedgerRow(
                        i,
                        f"U_hat_{i}&[{s}]",
                        mass(U_hat[i - 1] & BasicSet.stripe(s)),
                        (eps + 2 * cfg.delta(i - 1)) * P.p(s, ""),
                    )
                )
        slack = 2 * sum((cfg.delta(j) for j in range(1, i)), ZERO)
        hat = mass(U_hat[i - 1])
        rows.append(LedgerRow(i, f"U_hat_{i}", hat, eps + slack))
        rows.append(LedgerRow(i, f"U_hat_{i}<=3eps", hat, 3 * eps))
    return BoundsReport(rows)


def coverage_check(
    result: TrimResult,
    gamma: GammaOracle,
    P: MeasureOracle,
    point: tuple[PathGenerator, PathGenerator],
    k: int,
) -> bool:
    """Whether the pair named by two paths lands in the stage-``k`` trimmed set.

    Preconditions checked here: the pair lies in ``U_k`` and the
    interval-conditioned section size of ``U_k`` at the deepest stripe
    level is below epsilon.  The oracle's honesty along the first path is
    the caller's responsibility.  If the pair is missed because the search
    never reached a stage-``k`` stripe along the path, the depth limit is to
    blame and :class:`DepthExhaustedError` is raised.
    """
    path1, path2 = point
    U = result.covers[k - 1]
    maxdepth = result.config.maxdepth
    depth = max(U.depth, result.U_hat[k - 1].depth, maxdepth)
    x, y = path1.prefix(depth), path2.prefix(depth)
    if not U.contains_cell(x, y):
        raise PreconditionError("pair is not in U_k")
    deep = x[:maxdepth]
    V, stable = U.section(deep)
    h = P.p(deep, "")
    if not stable or h == 0:
        raise PreconditionError("section size along the path is not determined at this depth")
    if not P.column_mass(deep, V) / h < result.config.epsilon:
        raise PreconditionError("section of U_k along the path is not below epsilon")
    if result.U_hat[k - 1].contains_cell(x, y):
        return True
    if not result.G[k - 1].contains_cell(deep, ""):
        raise DepthExhaustedError("depth exhausted before good stripe found")
    return False
