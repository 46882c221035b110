"""Wall-clock comparison of the gmpy2 and Fraction rational backends.

Each workload runs in a fresh interpreter with ``CANTORLAB_BACKEND`` set, so
the backend is chosen at import time exactly as in normal use.  Outputs of
the two backends are compared byte for byte.

    python3 benchmarks/bench_backends.py [--repeat N] [--only NAME ...]
"""

from __future__ import annotations

import argparse
import filecmp
import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs" / "acceptance"
WORKLOADS = {
    "validate": CONFIGS / "01_validate.json",
    "martingale": CONFIGS / "05_martingale.json",
    "heavy": CONFIGS / "06_heavy.json",
    "trim": CONFIGS / "08_trim_honest.json",
    "vv": CONFIGS / "10_vv.json",
}


def run_once(backend: str, config: Path, out: Path) -> float:
    env = dict(os.environ, CANTORLAB_BACKEND=backend)
    t0 = time.perf_counter()
    subprocess.run([sys.executable, "-m", "cantorlab", "run", str(config), "--out", str(out)],
                   env=env, check=True, stdout=subprocess.DEVNULL)
    return time.perf_counter() - t0


def available(backend: str) -> bool:
    env = dict(os.environ, CANTORLAB_BACKEND=backend)
    probe = subprocess.run([sys.executable, "-c", "import cantorlab"], env=env, capture_output=True)
    return probe.returncode == 0


def same_tree(a: Path, b: Path) -> bool:
    cmp = filecmp.dircmp(a, b)
    if cmp.left_only or cmp.right_only or cmp.funny_files:
        return False
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    return not mismatch and not errors and all(same_tree(a / d, b / d) for d in cmp.common_dirs)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=1)
    ap.add_argument("--only", nargs="*", choices=sorted(WORKLOADS))
    args = ap.parse_args(argv)
    backends = [b for b in ("gmpy2", "fraction") if available(b)]
    names = args.only or list(WORKLOADS)
    print(f"{'workload':<12}" + "".join(f"{b:>12}" for b in backends) + "   ratio  outputs")
    with tempfile.TemporaryDirectory() as tmp:
        for name in names:
            times = {}
            for b in backends:
                times[b] = min(run_once(b, WORKLOADS[name], Path(tmp) / b / name) for _ in range(args.repeat))
            ratio = times["fraction"] / times["gmpy2"] if len(backends) == 2 else float("nan")
            same = "identical" if len(backends) < 2 or same_tree(*(Path(tmp) / b / name for b in backends)) else "DIFFER"
            print(f"{name:<12}" + "".join(f"{times[b]:>11.2f}s" for b in backends) + f"  {ratio:6.2f}  {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
