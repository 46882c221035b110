"""Seeded random instances for the randomized property trials.

Every generator takes a :class:`random.Random` so a whole batch is
reproducible from one seed.
"""

from __future__ import annotations

import random
from typing import Sequence

from ._rational import ONE, ZERO, Q, dyadic
from .core import BasicSet, CylinderFunction, Rect, cells
from .measures import Bernoulli, CantorMeasure, KernelConfig, MeasureOracle, Uniform1D
from .testcalc import ConditionalTestFamily, ExpectationTest, make_test

DYADIC_PROBS = ("1/2", "1/4", "3/4", "1/8", "3/8", "5/8", "7/8")
SMALL_PROBS = ("1/2", "1/3", "2/3", "1/4", "3/4", "2/5", "3/5")


def bits(rng: random.Random, n: int) -> str:
    return "".join(rng.choice("01") for _ in range(n))


def random_rect(rng: random.Random, max_depth: int, min_depth: int = 0) -> Rect:
    return Rect(bits(rng, rng.randint(min_depth, max_depth)), bits(rng, rng.randint(min_depth, max_depth)))


def random_basic_set(rng: random.Random, max_depth: int, max_rects: int = 4, min_depth: int = 0) -> BasicSet:
    n = rng.randint(0, max_rects)
    return BasicSet.from_rects(random_rect(rng, max_depth, min_depth) for _ in range(n))


def random_small_set(rng: random.Random, P: MeasureOracle, budget, max_depth: int = 6, tries: int = 8) -> BasicSet:
    """Union of random rectangles kept only while ``P(U) <= budget``."""
    u = BasicSet.empty()
    for _ in range(tries):
        cand = u | BasicSet.from_rects([random_rect(rng, max_depth, min_depth=1)])
        if P.measure(cand) <= budget:
            u = cand
    return u


def random_cover_sequence(
    rng: random.Random, stages: int, max_depth: int = 4, thin: int = 3
) -> list[BasicSet]:
    """Increasing sets whose steps are thin horizontal bands (y-depth >= ``thin``)."""
    acc = BasicSet.empty()
    out = []
    for _ in range(stages):
        step = BasicSet.from_rects(
            Rect(bits(rng, rng.randint(0, max_depth)), bits(rng, rng.randint(thin, thin + 2)))
            for _ in range(rng.randint(0, 2))
        )
        acc = acc | step
        out.append(acc)
    return out


def random_bernoulli(rng: random.Random, choices: Sequence[str] = SMALL_PROBS) -> CantorMeasure:
    return Bernoulli(Q(rng.choice(choices)))


def random_kernel(rng: random.Random, depth: int = 1) -> KernelConfig:
    return KernelConfig(depth, {w: random_bernoulli(rng) for w in cells(depth)})


def random_function(rng: random.Random, depth: int, arity: int = 1, sparsity: float = 0.5, top: int = 16) -> CylinderFunction:
    """Nonnegative cylinder function with small dyadic-ish rational values."""
    size = (1 << depth) ** arity
    vals = []
    for _ in range(size):
        if rng.random() < sparsity:
            vals.append(ZERO)
        else:
            vals.append(Q(rng.randint(1, top), rng.choice((1, 2, 3, 4))))
    return CylinderFunction(depth, tuple(vals), arity)


def random_test(rng: random.Random, P1: CantorMeasure, depth: int) -> ExpectationTest:
    f = random_function(rng, depth, top=64)
    return make_test(f, P1)


def random_family(rng: random.Random, kernel: KernelConfig, depth: int, y_depth: int, max_k: int, monotone: bool = False) -> ConditionalTestFamily:
    """Conditional tests ``fam(w, k)``; ``monotone`` makes them nonincreasing in ``k``."""
    members = {}
    for w in cells(depth):
        fiber = kernel.fiber(w)
        prev = None
        for k in range(max_k + 1):
            f = make_test(random_function(rng, y_depth), fiber).f
            if monotone and prev is not None:
                f = CylinderFunction(y_depth, tuple(min(a, b) for a, b in zip(f.values, prev.values)))
            members[(w, k)] = f
            prev = f
    return ConditionalTestFamily(depth, max_k, members)


def make_rng(seed: int) -> random.Random:
    return random.Random(seed)
