"""Independent reference computations used to freeze and cross-check values.

Nothing here calls the package's mass formulas or set algebra; every
quantity is recomputed from the geometric description by brute force with
:class:`fractions.Fraction`.
"""

from __future__ import annotations

from fractions import Fraction as F
from itertools import product as iproduct


def frac(x) -> F:
    """Plain Fraction with int parts, whatever rational type ``x`` is."""
    return F(int(x.numerator), int(x.denominator))


def interval(bits: str) -> tuple[F, F]:
    lo = F(int(bits, 2), 2 ** len(bits)) if bits else F(0)
    return lo, lo + F(1, 2 ** len(bits))


def all_cells(depth: int) -> list[str]:
    return ["".join(p) for p in iproduct("01", repeat=depth)]


# ----------------------------------------------------------------------------
# sets as explicit cell collections

def cells_of_rects(rects, depth: int) -> frozenset:
    """Depth-``depth`` grid cells covered by a union of rectangles."""
    out = set()
    for a1, a2 in rects:
        for x in all_cells(depth):
            if not x.startswith(a1):
                continue
            for y in all_cells(depth):
                if y.startswith(a2):
                    out.add((x, y))
    return frozenset(out)


# ----------------------------------------------------------------------------
# the staircase density, integrated piece by piece

def staircase_mass(a: list[F], a1: str, a2: str) -> F:
    """Integrate the staircase density over ``[a1] x [a2]``.

    Strip ``k`` is ``a_{k-1} <= y < a_k``; there the density is 0 for
    ``x < 2^-k``, 2 for ``2^-k <= x < 2^-(k-1)`` and 1 further right.
    Above the last term the density is 1.
    """
    x0, x1 = interval(a1)
    y0, y1 = interval(a2)
    terms = [F(0)] + list(a)
    ys = sorted({y0, y1} | {t for t in terms if y0 < t < y1})
    xs = sorted({x0, x1} | {F(1, 2**k) for k in range(1, len(a) + 2) if x0 < F(1, 2**k) < x1})
    total = F(0)
    for ylo, yhi in zip(ys, ys[1:]):
        ym = (ylo + yhi) / 2
        k = next((i for i in range(1, len(terms)) if terms[i - 1] <= ym < terms[i]), None)
        for xlo, xhi in zip(xs, xs[1:]):
            xm = (xlo + xhi) / 2
            if k is None:
                dens = 1
            elif xm < F(1, 2**k):
                dens = 0
            elif xm < F(1, 2 ** (k - 1)):
                dens = 2
            else:
                dens = 1
            total += dens * (xhi - xlo) * (yhi - ylo)
    return total


def segments_mass(a: list[F], a1: str, a2: str) -> F:
    """Mass of ``[a1] x [a2]`` for the vertical-segment measure.

    Level ``k`` spreads ``a_k - a_{k-1}`` evenly over the segments
    ``{j 2^-(k-1)} x [a_{k-1}, a_k)``, uniformly in ``y``; above the last
    term the mass is uniform.
    """
    x0, x1 = interval(a1)
    y0, y1 = interval(a2)
    terms = [F(0)] + list(a)
    total = F(0)
    for k in range(1, len(terms)):
        lo, hi = terms[k - 1], terms[k]
        ov = max(F(0), min(y1, hi) - max(y0, lo))
        if not ov:
            continue
        spacing = F(1, 2 ** (k - 1))
        hits = sum(1 for j in range(2 ** (k - 1)) if x0 <= j * spacing < x1)
        total += hits * ov * spacing  # per segment: ov / (hi - lo) * (hi - lo) / 2^(k-1)
    top = max(F(0), y1 - max(y0, terms[-1]))
    return total + (x1 - x0) * top


def oscillating_mass(a1: str, a2: str, depth: int = 60) -> F:
    """Stripe ``k`` = ``[2^-k, 2^-(k-1))`` carries mass ``2^-k`` on its top half
    (``k`` odd) or bottom half (``k`` even) with uniform density."""
    x0, x1 = interval(a1)
    y0, y1 = interval(a2)
    total = F(0)
    for k in range(1, depth + 1):
        s0, s1 = F(1, 2**k), F(1, 2 ** (k - 1))
        w = max(F(0), min(x1, s1) - max(x0, s0))
        if not w:
            continue
        h0, h1 = (F(1, 2), F(1)) if k % 2 else (F(0), F(1, 2))
        h = max(F(0), min(y1, h1) - max(y0, h0))
        total += w * h * 2  # density 2 on half the stripe
    return total


def oscillating_tail(a1: str, a2: str) -> F:
    """Exact ``oscillating_mass`` using closed-form geometric tails for ``a1 = 0^n``."""
    if "1" in a1:
        return oscillating_mass(a1, a2, depth=len(a1) + 1)
    n = len(a1)
    y0, y1 = interval(a2)
    top = max(F(0), min(y1, F(1)) - max(y0, F(1, 2))) * 2
    bottom = max(F(0), min(y1, F(1, 2)) - max(y0, F(0))) * 2
    k_odd = n + 1 if (n + 1) % 2 else n + 2
    k_even = n + 1 if (n + 1) % 2 == 0 else n + 2
    return F(1, 2**k_odd) * F(4, 3) * top + F(1, 2**k_even) * F(4, 3) * bottom


def bernoulli_mass(p: F, bits: str) -> F:
    out = F(1)
    for b in bits:
        out *= p if b == "1" else 1 - p
    return out


# ----------------------------------------------------------------------------
# heavy intervals by exhaustive enumeration

def heavy_intervals(mass, u_cells: frozenset, grid: int, n: int, maxdepth: int) -> list[str]:
    """Maximal n-heavy intervals via every interval up to ``maxdepth``.

    ``mass(x, y)`` gives the mass of a depth-``grid`` cell pair and
    ``u_cells`` is the set as depth-``grid`` cells (``grid >= maxdepth``).
    """
    heavy = []
    for d in range(maxdepth + 1):
        for i in all_cells(d):
            h = sum(mass(x, y) for x in all_cells(grid) if x.startswith(i) for y in all_cells(grid))
            if h == 0:
                continue
            inside = sum(mass(x, y) for (x, y) in u_cells if x.startswith(i))
            if inside > F(1, 2**n) * h:
                heavy.append(i)
    return sorted(i for i in heavy if not any(i != j and i.startswith(j) for j in heavy))
