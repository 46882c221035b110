"""Command-line experiment runner.

Every command reads a config dict (built from flags or a JSON file),
writes its data files into an output directory and finishes with
``summary.json``: ``{command, ok, violations, exit_code, seed, config}``.

Exit codes: 0 ok, 1 bound violated, 2 config error, 3 precondition not met.
``CANTORLAB_MAXDEPTH`` caps every depth parameter.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import conditional as cond
from . import heavy, instances, measures, testcalc, trimming
from ._rational import ONE, ZERO, Q, dyadic, fmt
from .core import BasicSet, CantorLabError, PreconditionError
from .formats import (
    ConfigError,
    MEASURE_NAMES,
    measure_from_spec,
    named_measure,
    parse_set,
    read_csv,
    read_json,
    sequence_from_spec,
    write_csv,
    write_json,
)

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_PRECONDITION = 0, 1, 2, 3
# worst-first order used when aggregating
_SEVERITY = {EXIT_OK: 0, EXIT_PRECONDITION: 1, EXIT_VIOLATION: 2, EXIT_CONFIG: 3}


@dataclass
class Outcome:
    ok: bool
    violations: list = field(default_factory=list)
    precondition: str | None = None
    details: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        if self.violations or not self.ok:
            return EXIT_VIOLATION
        if self.precondition:
            return EXIT_PRECONDITION
        return EXIT_OK


def cap_depth(depth: int) -> int:
    limit = os.environ.get("CANTORLAB_MAXDEPTH")
    return min(int(depth), int(limit)) if limit else int(depth)


def _measure(cfg: dict):
    spec = cfg.get("measure", "uniform")
    return measure_from_spec(named_measure(spec) if isinstance(spec, str) else spec)


def _measure_specs(cfg: dict) -> list[dict]:
    specs = cfg.get("measures")
    if specs is None:
        return [named_measure(cfg["measure"]) if isinstance(cfg.get("measure"), str) else cfg.get("measure", {"kind": "uniform"})]
    return [named_measure(s) if isinstance(s, str) else s for s in specs]


def _spec_label(spec: dict) -> str:
    return spec.get("name") or spec.get("kind", "measure")


def _rng(cfg: dict) -> random.Random:
    return instances.make_rng(int(cfg.get("seed", 0)))


# ----------------------------------------------------------------------------
# commands

def cmd_validate(cfg: dict, out: Path) -> Outcome:
    depth = cap_depth(cfg.get("depth", 8))
    violations, reports = [], []
    for spec in _measure_specs(cfg):
        P = measure_from_spec(spec)
        report = measures.validate(P, depth)
        entry = {"measure": _spec_label(spec), "depth": depth, "checked": report.checked, "ok": report.ok,
                 "violations": report.to_json()}
        if "locality" in cfg and spec.get("kind") in ("staircase", "segments"):
            entry["locality"] = _locality(spec, [int(n) for n in cfg["locality"]], min(depth, min(cfg["locality"])))
            if entry["locality"]["mismatches"]:
                violations.append({"measure": _spec_label(spec), "check": "locality",
                                   "first": entry["locality"]["mismatches"][0]})
        reports.append(entry)
        violations.extend(dict(v, measure=_spec_label(spec)) for v in report.to_json())
    write_json(out / "validate.json", reports)
    return Outcome(not violations, violations)


def _locality(spec: dict, terms: list[int], depth: int) -> dict:
    base = sequence_from_spec(dict(spec, n_terms=max(terms)))
    oracles = [measure_from_spec(dict(spec, **base.truncate(n).to_json())) for n in terms]
    from .core import tree_cells

    rows = list(tree_cells(depth))
    mismatches, checked = [], 0
    for a1 in rows:
        for a2 in rows:
            values = {P.p(a1, a2) for P in oracles}
            checked += 1
            if len(values) != 1:
                mismatches.append(f"[{a1}]x[{a2}]")
    return {"terms": terms, "depth": depth, "checked": checked, "mismatches": mismatches}


def _trace_outputs(out: Path, trace: cond.ConvergenceTrace, name: str = "trace") -> dict:
    write_csv(out / f"{name}.csv", ("depth", "lo", "hi", "verdict"), trace.to_rows())
    info = {
        "verdict": trace.verdict,
        "limit": None if trace.limit is None else [trace.limit.lo, trace.limit.hi],
        "bands": [[b.lo, b.hi] for b in trace.bands],
    }
    write_json(out / f"{name}.json", info)
    return info


def cmd_trace(cfg: dict, out: Path) -> Outcome:
    P = _measure(cfg)
    path = cond.PathGenerator.named(cfg.get("path", "zeros"))
    a2 = cfg.get("a2", "1")
    depth = cap_depth(cfg.get("depth", 12))
    window = int(cfg.get("window", 6))
    tol = Q(cfg.get("tol", "1/1024"))
    try:
        trace = cond.conditional_trace(P, path, a2, depth, window=window, tol=tol)
    except measures.ZeroMarginalError as exc:
        partial = exc.partial
        if partial is not None:
            _trace_outputs(out, partial)
        return Outcome(True, precondition=f"zero marginal at depth {exc.depth}")
    info = _trace_outputs(out, trace)
    violations = []
    if "expect_verdict" in cfg and trace.verdict != cfg["expect_verdict"]:
        violations.append({"check": "verdict", "expected": cfg["expect_verdict"], "got": trace.verdict})
    if "expect_limit" in cfg:
        # |value - limit| <= 2**-(d - shift) at every depth in [from, depth]
        target = Q(cfg["expect_limit"])
        shift = int(cfg.get("tail_shift", 2))
        start = int(cfg.get("from_depth", 0))
        for d, enc in trace.values:
            if d < start:
                continue
            err = max(abs(enc.lo - target), abs(enc.hi - target))
            if err > dyadic(d - shift):
                violations.append({"check": "tail", "depth": d, "error": err, "bound": dyadic(d - shift)})
    if cfg.get("parents"):
        report = cond.additivity_of_limits(P, path, cfg["parents"], depth, window=window, tol=tol)
        rows = [(p, "" if s is None else str(s), "" if t is None else str(t), "" if ok is None else int(ok))
                for p, s, t, ok in report.rows]
        write_csv(out / "additivity.csv", ("parent", "limit", "children_sum", "ok"), rows)
        violations.extend({"check": "additivity", "parent": p} for p, _, _, ok in report.rows if ok is False)
    return Outcome(not violations, violations, details=info)


def cmd_oscillate(cfg: dict, out: Path) -> Outcome:
    """The alternating conditional of the top half along ``000...``."""
    depth = cap_depth(cfg.get("depth", 12))
    P = measures.oscillating()
    trace = cond.conditional_trace(P, cond.PathGenerator.zeros(), "1", depth)
    info = _trace_outputs(out, trace)
    high, low = Q(2, 3), Q(1, 3)
    violations = []
    for d, enc in trace.values:
        expected = high if d % 2 == 0 else low
        if not (enc.is_exact and enc.lo == expected):
            violations.append({"depth": d, "expected": expected, "got": str(enc)})
    return Outcome(not violations, violations, details=info)


def _martingales(cfg: dict):
    depth = cap_depth(cfg.get("depth", 10))
    out = []
    for spec in _measure_specs(cfg):
        P = measure_from_spec(spec)
        label = _spec_label(spec)
        for a2 in cfg.get("a2s", [cfg.get("a2", "1")]):
            out.append((f"{label}-conditional-{a2}", cond.conditional_martingale(P, a2, depth)))
        out.append((f"{label}-doubling", cond.doubling_martingale(P.marginal_measure, depth, cfg.get("target", "1"))))
    return out


def cmd_martingale(cfg: dict, out: Path) -> Outcome:
    thresholds = [Q(c) for c in cfg.get("thresholds", ["1/2", "3/4", "2", "4"])]
    pairs = [(Q(u), Q(v)) for u, v in cfg.get("bands", [["1/2", "3/5"], ["1/3", "2/3"], ["1/4", "1/2"]])]
    max_n = int(cfg.get("max_n", 4))
    violations, report = [], []
    for name, m in _martingales(cfg):
        fair = cond.martingale_check(m)
        entry = {"martingale": name, "fair": fair.ok, "checked": fair.checked, "exceed": [], "upcrossings": []}
        for cell, _, _ in fair.violations:
            violations.append({"martingale": name, "check": "fairness", "cell": cell})
        for c in thresholds:
            res = cond.exceed_set(m, c)
            entry["exceed"].append({"c": c, "measure": res.measure, "bound": res.bound, "ok": res.ok})
            if not res.ok:
                violations.append({"martingale": name, "check": "maximal", "c": c})
        for u, v in pairs:
            follower = cond.follower_martingale(m, u, v)
            if not cond.martingale_check(follower.capital).ok:
                violations.append({"martingale": name, "check": "follower-fairness", "u": u, "v": v})
            for n, meas, bound, ok in cond.upcrossing_bound_check(m, u, v, max_n):
                entry["upcrossings"].append({"u": u, "v": v, "n": n, "measure": meas, "bound": bound, "ok": ok})
                if not ok:
                    violations.append({"martingale": name, "check": "upcrossing", "u": u, "v": v, "n": n})
        write_csv(out / f"martingale_{name}.csv", ("cell", "value"), m.to_rows())
        report.append(entry)
    write_json(out / "martingale.json", report)
    return Outcome(not violations, violations)


def cmd_heavy(cfg: dict, out: Path) -> Outcome:
    maxdepth = cap_depth(cfg.get("maxdepth", 8))
    if "trials" in cfg:
        return _heavy_trials(cfg, out, maxdepth)
    P = _measure(cfg)
    n = int(cfg.get("n", 1))
    U = parse_set(cfg.get("set", "{}"))
    scan = heavy.enumerate_heavy(P, U, n, maxdepth)
    write_json(out / "heavy.json", scan.to_json())
    violations = [] if scan.ok else [{"check": "heavy-union", "union": scan.union_measure, "bound": scan.bound}]
    pre = None if scan.hypothesis else "P(U) exceeds 2^-2n"
    if "path" in cfg:
        chk = heavy.section_bound_check(P, U, n, cond.PathGenerator.named(cfg["path"]), cap_depth(cfg.get("depth", maxdepth)))
        write_json(out / "section.json", {"status": chk.status, "reason": chk.reason, "prefix": chk.prefix,
                                          "value": chk.value, "bound": chk.bound})
        if chk.status == "violated":
            violations.append({"check": "section", "prefix": chk.prefix})
        elif chk.status == "precondition":
            pre = pre or chk.reason
    return Outcome(not violations, violations, precondition=pre)


def _heavy_trials(cfg: dict, out: Path, maxdepth: int) -> Outcome:
    rng = _rng(cfg)
    trials = int(cfg["trials"])
    ns = [int(n) for n in cfg.get("ns", [1, 2, 3])]
    violations, rows = [], []
    for spec in _measure_specs(cfg):
        P = measure_from_spec(spec)
        found = 0
        for t in range(trials):
            n = ns[t % len(ns)]
            U = instances.random_small_set(rng, P, dyadic(2 * n), max_depth=int(cfg.get("set_depth", 6)))
            scan = heavy.enumerate_heavy(P, U, n, maxdepth)
            found += bool(scan.heavy)
            if not scan.ok:
                violations.append({"measure": _spec_label(spec), "trial": t, "set": U.to_text(), "n": n,
                                   "union": scan.union_measure})
        rows.append((_spec_label(spec), trials, found))
    write_csv(out / "heavy_trials.csv", ("measure", "trials", "with_heavy"), rows)
    return Outcome(not violations, violations)


def cmd_discard(cfg: dict, out: Path) -> Outcome:
    seq = sequence_from_spec(cfg.get("sequence", {}))
    P = measures.segments(seq)
    ref = measures.uniform()
    if "trials" in cfg:
        rng = _rng(cfg)
        sets = [instances.random_basic_set(rng, cap_depth(cfg.get("set_depth", 6)), int(cfg.get("max_rects", 5)))
                for _ in range(int(cfg["trials"]))]
    else:
        sets = [parse_set(cfg.get("set", "{}"))]
    rows, violations = [], []
    for U in sets:
        D = heavy.discard_below(U, seq)
        a, b = P.measure(D), ref.measure(D)
        rows.append((U.to_text(), D.to_text(), fmt(a), fmt(b), int(a == b)))
        if a != b:
            violations.append({"set": U.to_text(), "segments": a, "uniform": b})
    write_csv(out / "discard.csv", ("set", "discarded", "segments", "uniform", "equal"), rows)
    return Outcome(not violations, violations)


def _gamma(cfg: dict, P):
    g = cfg.get("gamma", {"kind": "honest"})
    slowdown = g.get("slowdown", "halving")
    if g.get("kind", "honest") == "honest":
        return trimming.honest_gamma(P, slowdown)
    if g["kind"] == "adversarial":
        decoy = measure_from_spec(named_measure(g.get("decoy", "uniform")) if isinstance(g.get("decoy", "uniform"), str) else g["decoy"])
        return trimming.adversarial_gamma(P, cond.PathGenerator.named(g.get("path", "zeros")), decoy, slowdown)
    raise ConfigError(f"unknown gamma kind {g['kind']!r}")


def _trim_config(cfg: dict, stages: int) -> trimming.TrimConfig:
    eps = Q(cfg.get("epsilon", "1/8"))
    maxdepth = cap_depth(cfg.get("maxdepth", 10))
    try:
        if "deltas" in cfg:
            return trimming.TrimConfig(eps, tuple(Q(d) for d in cfg["deltas"]), maxdepth)
        return trimming.TrimConfig.default(eps, stages, maxdepth)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_trim(cfg: dict, out: Path) -> Outcome:
    if "trials" in cfg:
        return _trim_trials(cfg, out)
    if "scenarios" in cfg:
        return _coverage_scenarios(cfg, out)
    P = _measure(cfg)
    covers = [parse_set(s) for s in cfg.get("covers", [])]
    tcfg = _trim_config(cfg, len(covers))
    gamma = _gamma(cfg, P)
    result = trimming.trim(P, gamma, covers, tcfg)
    write_csv(out / "ledger.csv", ("stage", "set", "measure", "bound", "ok"), [r.to_csv() for r in result.ledger])
    write_json(out / "trim.json", {"stripes": result.stripes, "U_hat": [u.to_text() for u in result.U_hat],
                                   "G": [g.to_text() for g in result.G]})
    violations = [{"stage": r.stage, "set": r.set, "measure": r.measure, "bound": r.bound}
                  for r in result.ledger if not r.ok]
    pre, cov = None, []
    for point in cfg.get("coverage", []):
        x, y, k = cond.PathGenerator.named(point["x"]), cond.PathGenerator.named(point["y"]), int(point["k"])
        try:
            hit = trimming.coverage_check(result, gamma, P, (x, y), k)
            cov.append({"x": point["x"], "y": point["y"], "k": k, "status": "covered" if hit else "missed"})
            if not hit:
                violations.append({"check": "coverage", **point})
        except PreconditionError as exc:
            cov.append({"x": point["x"], "y": point["y"], "k": k, "status": "precondition", "reason": str(exc)})
            pre = pre or str(exc)
    if cov:
        write_json(out / "coverage.json", cov)
    return Outcome(not violations, violations, precondition=pre)


def _trim_trials(cfg: dict, out: Path) -> Outcome:
    rng = _rng(cfg)
    stages = int(cfg.get("stages", 4))
    tcfg = _trim_config(cfg, stages)
    violations, rows = [], []
    for spec in _measure_specs(cfg):
        P = measure_from_spec(spec)
        label = _spec_label(spec)
        stripes = hat_mass = 0
        for t in range(int(cfg["trials"])):
            covers = instances.random_cover_sequence(rng, stages, int(cfg.get("cover_depth", 4)))
            result = trimming.trim(P, _gamma(cfg, P), covers, tcfg)
            report = trimming.verify_bounds(result, P, tcfg)
            stripes += sum(len(s) for s in result.stripes)
            hat_mass += not result.U_hat[-1].is_empty()
            for r in report.violations:
                violations.append({"measure": label, "trial": t, "stage": r.stage, "set": r.set})
        rows.append((label, cfg["trials"], stripes, hat_mass))
    write_csv(out / "trim_trials.csv", ("measure", "trials", "stripes", "nonempty_U_hat"), rows)
    return Outcome(not violations, violations)


def _coverage_scenarios(cfg: dict, out: Path) -> Outcome:
    violations, rows, pre = [], [], None
    for i, sc in enumerate(cfg["scenarios"]):
        sub = dict(cfg, **sc)
        sub.pop("scenarios", None)
        P = _measure(sub)
        covers = [parse_set(s) for s in sub["covers"]]
        tcfg = _trim_config(sub, len(covers))
        gamma = _gamma(sub, P)
        result = trimming.trim(P, gamma, covers, tcfg)
        for r in result.ledger:
            if not r.ok:
                violations.append({"scenario": i, "stage": r.stage, "set": r.set})
        for point in sub.get("coverage", []):
            x, y, k = cond.PathGenerator.named(point["x"]), cond.PathGenerator.named(point["y"]), int(point["k"])
            try:
                status = "covered" if trimming.coverage_check(result, gamma, P, (x, y), k) else "missed"
            except trimming.DepthExhaustedError as exc:
                status = "depth-exhausted"
                pre = pre or str(exc)
            except PreconditionError:
                status = "precondition"
            rows.append((i, point["x"], point["y"], k, status))
            if status == "missed":
                violations.append({"scenario": i, **point})
    write_csv(out / "coverage.csv", ("scenario", "x", "y", "k", "status"), rows)
    return Outcome(not violations, violations, precondition=pre)


def cmd_vv(cfg: dict, out: Path) -> Outcome:
    rng = _rng(cfg)
    trials = int(cfg.get("trials", 20))
    max_depth = cap_depth(cfg.get("depth", 3))
    max_k = int(cfg.get("max_k", 4))
    ledger, violations, dumped = [], [], False
    for t in range(trials):
        depth = rng.randint(0, max_depth)
        kernel = instances.random_kernel(rng, rng.randint(0, depth))
        P1 = instances.random_bernoulli(rng)
        P = measures.from_kernel(P1, kernel)
        t1 = instances.random_test(rng, P1, depth)
        fam = instances.random_family(rng, kernel, depth, rng.randint(0, max_depth), max_k)
        T = testcalc.product_construction(t1, fam, P1, kernel)
        S = testcalc.sum_construction(t1, fam, P1, kernel)
        for name, f in (("product", T), ("sum", S)):
            total = testcalc.integral(f, P)
            ledger.append({"trial": t, "construction": name, "integral": total, "bound": ONE, "ok": total <= ONE})
            if total > ONE:
                violations.append({"trial": t, "construction": name, "integral": total})
        tp = testcalc.make_test(T, P).f
        d, c = rng.randint(0, 3), rng.randint(-1, 2)
        trimmed = testcalc.ratio_trim(tp, d, c, P1, kernel)
        contract = _ratio_contract(tp, d, c, trimmed)
        after = max(testcalc.integral(trimmed.function.fiber(w), kernel.fiber(w))
                    for w in trimmed.fiber_integrals)
        ok = contract and after <= ONE
        ledger.append({"trial": t, "construction": "ratio_trim", "integral": after, "bound": ONE, "ok": ok,
                       "before_trim": max(trimmed.fiber_integrals.values())})
        if not ok:
            violations.append({"trial": t, "construction": "ratio_trim"})
        if not dumped:
            rows = [((a1 + "|" + a2), v) for (a1, a2), v in T.items()]
            write_csv(out / "test_dump.csv", ("cells", "value"), rows)
            dumped = True
    kraft = _kraft_checks(int(cfg.get("set_bits", 8)))
    for row in kraft:
        if not row["ok"]:
            violations.append({"check": "kraft", "provider": row["provider"]})
    write_json(out / "vv_ledger.json", ledger)
    write_json(out / "kraft.json", kraft)
    return Outcome(not violations, violations)


def _ratio_contract(tp, d, c, trimmed) -> bool:
    """Untouched fibers equal the divided fiber bit-exactly; no value ever grows."""
    divided = tp.scale(dyadic(d + c))
    for w in trimmed.untouched:
        if trimmed.function.fiber(w).values != divided.fiber(w).values:
            return False
    for w in trimmed.trimmed:
        if trimmed.fiber_integrals[w] <= ONE:
            return False
        if any(a > b for a, b in zip(trimmed.function.fiber(w).values, divided.fiber(w).values)):
            return False
    return True


def _kraft_checks(n_bits: int) -> list[dict]:
    """Kraft sum and deficiency identity on ``{0,1}^n`` for every ``n <= n_bits``."""
    rows = []
    for n in range(n_bits + 1):
        A = testcalc.binary_strings(n)
        for name, code in (("uniform", testcalc.UniformCode()), ("simplicity", testcalc.SimplicityCode())):
            kraft = testcalc.kraft_sum(code, A)
            total, size, holds = testcalc.kraft_identity(code, A)
            rows.append({"provider": name, "size": len(A), "kraft_sum": kraft, "deficiency_power_sum": total,
                         "ok": bool(kraft <= ONE and holds)})
    return rows


def cmd_plotdata(cfg: dict, out: Path) -> Outcome:
    src = Path(cfg["trace"])
    if not src.exists():
        raise ConfigError(f"trace file {src} not found")
    try:
        rows = read_csv(src)
        lines = []
        for r in rows:
            lo, hi = Q(r["lo"]), Q(r["hi"])
            lines.append(f"{int(r['depth'])} {decimal(lo + (hi - lo) / 2)} {decimal(lo)} {decimal(hi)}")
    except (KeyError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"malformed trace file: {exc}") from exc
    header = []
    meta = src.with_suffix(".json")
    if meta.exists() and rows:
        info = read_json(meta)
        header.append(f"# verdict {info.get('verdict')}")
        for lo, hi in info.get("bands", []):
            header.append(f"# band {decimal(Q(lo))} {decimal(Q(hi))}")
    if rows:
        header.insert(0, "# depth mid lo hi")
    text = "\n".join(header + lines)
    out.mkdir(parents=True, exist_ok=True)
    (out / "plot.dat").write_text(text + "\n" if text else "", encoding="utf-8")
    return Outcome(True)


def decimal(x, digits: int = 12) -> str:
    """Exact rational rounded half-up to ``digits`` decimals, without floats."""
    x = Q(x)
    sign = "-" if x < 0 else ""
    x = abs(x)
    scaled = x * 10**digits
    q, r = divmod(int(scaled.numerator), int(scaled.denominator))
    if 2 * r >= int(scaled.denominator):
        q += 1
    whole, frac = divmod(q, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


COMMANDS: dict[str, Callable[[dict, Path], Outcome]] = {
    "validate": cmd_validate,
    "trace": cmd_trace,
    "oscillate": cmd_oscillate,
    "martingale": cmd_martingale,
    "heavy": cmd_heavy,
    "discard": cmd_discard,
    "trim": cmd_trim,
    "vv": cmd_vv,
    "plotdata": cmd_plotdata,
}


def execute(cfg: dict, out: str | Path) -> int:
    """Run one experiment config and write its summary; returns the exit code."""
    out = Path(out)
    command = cfg.get("command")
    summary = {"command": command, "seed": int(cfg.get("seed", 0)), "config": cfg}
    try:
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}")
        outcome = COMMANDS[command](cfg, out)
        code = outcome.exit_code
        summary.update(ok=outcome.ok and not outcome.violations, violations=outcome.violations,
                       precondition=outcome.precondition)
        if outcome.details:
            summary["details"] = outcome.details
    except (ConfigError, KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
        code = EXIT_CONFIG
        summary.update(ok=False, violations=[], error=f"{type(exc).__name__}: {exc}")
    except (PreconditionError, measures.InsufficientTermsError, measures.ZeroMarginalError) as exc:
        code = EXIT_PRECONDITION
        summary.update(ok=True, violations=[], precondition=str(exc))
    summary["exit_code"] = code
    write_json(out / "summary.json", summary)
    return code


def worst(codes) -> int:
    return max(codes, key=lambda c: _SEVERITY.get(c, 3), default=EXIT_OK)


def run_suite(configdir: str | Path, out: str | Path) -> int:
    configdir, out = Path(configdir), Path(out)
    if not configdir.is_dir():
        raise ConfigError(f"{configdir} is not a directory")
    results, codes = [], []
    for path in sorted(configdir.glob("*.json")):
        try:
            cfg = read_json(path)
        except json.JSONDecodeError as exc:
            code = EXIT_CONFIG
            write_json(out / path.stem / "summary.json", {"command": None, "ok": False, "violations": [],
                                                          "error": str(exc), "exit_code": code})
        else:
            code = execute(cfg, out / path.stem)
        summary = read_json(out / path.stem / "summary.json")
        results.append({"experiment": path.stem, "command": summary.get("command"), "ok": summary.get("ok"),
                        "exit_code": code, "violations": len(summary.get("violations", []))})
        codes.append(code)
    code = worst(codes)
    write_json(out / "summary.json", {"command": "suite", "experiments": results, "ok": code == EXIT_OK,
                                      "violations": [r["experiment"] for r in results if r["violations"]],
                                      "exit_code": code})
    return code


# ----------------------------------------------------------------------------
# argument parsing

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output directory (default: out/<command>)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="JSON file whose keys override the flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cantorlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="exact additivity and normalization of a measure")
    p.add_argument("--measure", default="uniform", help=f"one of {', '.join(MEASURE_NAMES)} or inline JSON")
    p.add_argument("--depth", type=int, default=8)
    _add_common(p)

    p = sub.add_parser("trace", help="interval-conditioned probabilities along a path")
    p.add_argument("--measure", default="oscillating")
    p.add_argument("--path", default="zeros", help="zeros, ones, alt, p:<bits> or x:<p/q>")
    p.add_argument("--a2", default="1")
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--window", type=int, default=6)
    p.add_argument("--tol", default="1/1024")
    p.add_argument("--parents", nargs="*", default=None, help="cylinders whose limit additivity is checked")
    _add_common(p)

    p = sub.add_parser("oscillate", help="the alternating conditional demo")
    p.add_argument("--depth", type=int, default=12)
    _add_common(p)

    p = sub.add_parser("martingale", help="maximal inequality and upcrossing bounds")
    p.add_argument("--measure", default="oscillating")
    p.add_argument("--a2", default="1")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--max-n", dest="max_n", type=int, default=4)
    _add_common(p)

    p = sub.add_parser("heavy", help="heavy intervals and their union bound")
    p.add_argument("--measure", default="uniform")
    p.add_argument("--set", default="{}", help='basic set such as "[00]x*,[1]x[11]"')
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--maxdepth", type=int, default=8)
    p.add_argument("--path", default=None, help="also check the section bound along this path")
    p.add_argument("--trials", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("discard", help="discard-below transform against the uniform measure")
    p.add_argument("--set", default="{}")
    p.add_argument("--trials", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("trim", help="staged trimming with bound ledger")
    p.add_argument("--measure", default="uniform")
    p.add_argument("--covers", nargs="*", default=[])
    p.add_argument("--epsilon", default="1/8")
    p.add_argument("--maxdepth", type=int, default=10)
    p.add_argument("--gamma", default="honest", choices=["honest", "adversarial"])
    p.add_argument("--trials", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("vv", help="test composition constructions and their integral ledger")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--depth", type=int, default=3)
    _add_common(p)

    p = sub.add_parser("plotdata", help="two-column plot data from a trace CSV")
    p.add_argument("trace")
    _add_common(p)

    p = sub.add_parser("run", help="run one experiment config JSON")
    p.add_argument("configfile")
    p.add_argument("--out", default=None)

    p = sub.add_parser("suite", help="run every config in a directory")
    p.add_argument("configdir")
    p.add_argument("--out", default=None)
    return parser


_NOT_CONFIG = {"out", "config", "configfile", "configdir"}


def _flags_to_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG and v is not None}
    if cfg.get("command") == "trim" and "gamma" in cfg:
        cfg["gamma"] = {"kind": cfg["gamma"]}
    if args.config:
        cfg.update(read_json(args.config))
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "suite":
            code = run_suite(args.configdir, args.out or "out/suite")
            print(Path(args.out or "out/suite") / "summary.json")
            return code
        if args.command == "run":
            cfg = read_json(args.configfile)
            out = args.out or f"out/{Path(args.configfile).stem}"
        else:
            cfg = _flags_to_config(args)
            out = args.out or f"out/{args.command}"
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"cantorlab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code = execute(cfg, out)
    summary = read_json(Path(out) / "summary.json")
    print(json.dumps({k: summary.get(k) for k in ("command", "ok", "exit_code")}, sort_keys=True))
    return code


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
