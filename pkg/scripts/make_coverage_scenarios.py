"""Regenerate configs/acceptance/09_trim_coverage.json.

Each scenario is a small increasing cover sequence of thin horizontal
bands, a measure whose conditionals stop changing below a known level, an
honest oracle schedule matched to that level, and points inside the last
cover.  The convergence depth recorded per point is the first stripe level
along the point's first coordinate that is good for every stage up to k.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

from cantorlab import trimming
from cantorlab.conditional import PathGenerator
from cantorlab.formats import measure_from_spec, parse_set
from cantorlab._rational import Q, fmt

MEASURES = [
    ({"kind": "uniform"}, "none"),
    ({"kind": "product", "p1": {"kind": "bernoulli", "p": "1/3"}, "p2": {"kind": "bernoulli", "p": "1/2"}}, "halving"),
    ({"kind": "kernel", "p1": {"kind": "bernoulli", "p": "2/5"}, "depth": 1,
      "fibers": {"0": {"kind": "uniform"}, "1": {"kind": "bernoulli", "p": "3/4"}}}, "delayed:1"),
    ({"kind": "kernel", "p1": {"kind": "uniform"}, "depth": 2,
      "fibers": {"00": {"kind": "uniform"}, "01": {"kind": "bernoulli", "p": "1/4"},
                 "10": {"kind": "bernoulli", "p": "2/3"}, "11": {"kind": "uniform"}}}, "delayed:2"),
]


def band(rng: random.Random, x_depth: int, y_bits: int) -> str:
    x = "".join(rng.choice("01") for _ in range(x_depth))
    y = "".join(rng.choice("01") for _ in range(y_bits))
    return f"[{x}]x[{y}]" if x else f"*x[{y}]"


def convergence_depth(P, gamma, covers, cfg, x_bits: str, k: int) -> int | None:
    for level in range(cfg.maxdepth + 1):
        stripe = x_bits[:level]
        if all(trimming.is_good(P, gamma, covers[i - 1], stripe, cfg.delta(i), cfg.epsilon).good for i in range(1, k + 1)):
            return level
    return None


def main(out: Path) -> None:
    rng = random.Random(20261015)
    scenarios = []
    while len(scenarios) < 20:
        spec, schedule = MEASURES[len(scenarios) % len(MEASURES)]
        stages = 1 + len(scenarios) % 3
        steps, acc = [], []
        for _ in range(stages):
            steps.append(band(rng, rng.randint(0, 2), rng.randint(4, 5)))
            acc.append(",".join(steps))
        covers = [parse_set(s) for s in acc]
        P = measure_from_spec(spec)
        gamma = trimming.honest_gamma(P, schedule)
        cfg = trimming.TrimConfig.default(Q(1, 4), stages, 10)
        U = covers[-1]
        points = []
        for a1, a2 in U.rects[:3]:
            x_head = a1 + "".join(rng.choice("01") for _ in range(3))
            x_name = f"p:{x_head}{rng.choice(['0', '1', '01'])}"
            y_mid = Q(int(a2, 2) * 2 + 1, 1 << (len(a2) + 1))
            y_name = f"x:{fmt(y_mid)}"
            depth = convergence_depth(P, gamma, covers, cfg, PathGenerator.named(x_name).prefix(cfg.maxdepth), stages)
            if depth is not None and depth <= 8:
                points.append({"x": x_name, "y": y_name, "k": stages, "convergence_depth": depth})
        if not points:
            continue
        scenarios.append({"measure": spec, "gamma": {"kind": "honest", "slowdown": schedule},
                          "covers": acc, "epsilon": "1/4", "maxdepth": 10, "coverage": points})
    config = {"command": "trim", "seed": 0, "scenarios": scenarios}
    out.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("configs/acceptance/09_trim_coverage.json"))
