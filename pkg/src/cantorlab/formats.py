"""Config parsing and deterministic file output."""

from __future__ import annotations

import csv
import io as _io
import json
import os
import re
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from ._rational import Q, fmt
from .core import BasicSet, CantorLabError, Rect, check_bits
from .measures import (
    Bernoulli,
    CantorMeasure,
    Corrupted,
    Dirac,
    KernelConfig,
    MeasureOracle,
    Rounded,
    SequenceConfig,
    Uniform1D,
    from_kernel,
    oscillating,
    product,
    segments,
    staircase,
    uniform,
)


class ConfigError(CantorLabError):
    """Malformed experiment or measure configuration."""


# ----------------------------------------------------------------------------
# measures

def measure1d_from_spec(spec: Mapping | str | None) -> CantorMeasure:
    if spec is None or spec == "uniform":
        return Uniform1D()
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind", "uniform")
    try:
        if kind == "uniform":
            return Uniform1D()
        if kind == "bernoulli":
            return Bernoulli(Q(spec["p"]))
        if kind == "dirac":
            return Dirac(spec.get("pattern", "0"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad 1-d measure config {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown 1-d measure kind {kind!r}")


def sequence_from_spec(spec: Mapping) -> SequenceConfig:
    if "seq" not in spec:
        return SequenceConfig.default(int(spec.get("n_terms", 16)))
    try:
        return SequenceConfig(tuple(Q(x) for x in spec["seq"]), Q(spec["alpha"]))
    except (KeyError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad sequence config: {exc}") from exc


def measure_from_spec(spec: Mapping | str) -> MeasureOracle:
    """Build a product-space oracle from its JSON description.

    ``{"kind": "staircase", "seq": ["1/4", "5/16"], "alpha": "1/3"}``,
    ``{"kind": "product", "p1": {"kind": "bernoulli", "p": "1/3"}}``,
    ``{"kind": "kernel", "p1": ..., "depth": 1, "fibers": {"0": ..., "1": ...}}``,
    ``{"kind": "corrupted", "base": ..., "rect": ["0", "1"], "offset": "1/64"}``.
    """
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind")
    if kind == "uniform":
        return uniform()
    if kind == "product":
        return product(measure1d_from_spec(spec.get("p1")), measure1d_from_spec(spec.get("p2")))
    if kind == "oscillating":
        return oscillating()
    if kind == "staircase":
        return staircase(sequence_from_spec(spec))
    if kind == "segments":
        return segments(sequence_from_spec(spec))
    if kind == "kernel":
        depth = int(spec.get("depth", 1))
        fibers = spec.get("fibers", {})
        try:
            kernel = KernelConfig(depth, {w: measure1d_from_spec(f) for w, f in fibers.items()})
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return from_kernel(measure1d_from_spec(spec.get("p1")), kernel)
    if kind == "corrupted":
        rect = spec.get("rect", ["", ""])
        return Corrupted(measure_from_spec(spec["base"]), (check_bits(rect[0]), check_bits(rect[1])), Q(spec.get("offset", "1/64")))
    if kind == "rounded":
        return Rounded(measure_from_spec(spec["base"]))
    raise ConfigError(f"unknown measure kind {kind!r}")


MEASURE_NAMES = ("uniform", "product", "oscillating", "staircase", "segments", "kernel")


def named_measure(name: str) -> dict:
    """Default config for a bare measure name given on the command line."""
    if name.startswith("{"):
        return json.loads(name)
    if name == "product":
        return {"kind": "product", "p1": {"kind": "bernoulli", "p": "1/3"}, "p2": {"kind": "bernoulli", "p": "3/4"}}
    if name == "kernel":
        return default_kernel_spec()
    if name in MEASURE_NAMES:
        return {"kind": name}
    raise ConfigError(f"unknown measure {name!r}")


def default_kernel_spec() -> dict:
    return {
        "kind": "kernel",
        "p1": {"kind": "bernoulli", "p": "2/5"},
        "depth": 1,
        "fibers": {"0": {"kind": "bernoulli", "p": "1/4"}, "1": {"kind": "bernoulli", "p": "2/3"}},
    }


# ----------------------------------------------------------------------------
# basic sets

_RECT = re.compile(r"^(\*|\[([01]*)\])x(\*|\[([01]*)\])$")


def parse_set(text: str) -> BasicSet:
    """Parse ``"[00]x*,[1]x[11]"``; ``"{}"`` or an empty string is the empty set."""
    text = text.replace(" ", "")
    if text in ("", "{}"):
        return BasicSet.empty()
    rects = []
    for part in text.split(","):
        m = _RECT.match(part)
        if not m:
            raise ConfigError(f"cannot parse rectangle {part!r}")
        rects.append(Rect(m.group(2) or "", m.group(4) or ""))
    return BasicSet.from_rects(rects)


def format_set(u: BasicSet) -> str:
    return u.to_text()


# ----------------------------------------------------------------------------
# output

def _plain(value: Any) -> Any:
    """Convert rationals and containers into JSON-ready values."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, float):
        raise TypeError("floats are not written to experiment outputs")
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return fmt(value)
    return str(value)


def dumps(obj: Any) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def write_json(path: str | os.PathLike, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_plain(v) if not isinstance(v, str) else v for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def read_csv(path: str | os.PathLike) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def read_json(path: str | os.PathLike) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
