from hypothesis import strategies as st

from cantorlab.core import BasicSet, Rect


def bitstrings(max_size=4, min_size=0):
    return st.text(alphabet="01", min_size=min_size, max_size=max_size)


def rects(max_depth=3):
    return st.builds(Rect, bitstrings(max_depth), bitstrings(max_depth))


def rect_lists(max_depth=3, max_rects=4):
    return st.lists(rects(max_depth), max_size=max_rects)


def basic_sets(max_depth=3, max_rects=4):
    return rect_lists(max_depth, max_rects).map(BasicSet.from_rects)


def rationals(max_den=12, lo=0, hi=4):
    return st.builds(
        lambda n, d: __import__("fractions").Fraction(n, d),
        st.integers(lo * max_den, hi * max_den),
        st.integers(1, max_den),
    )
