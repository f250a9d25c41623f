import itertools
import os
import sys

from hypothesis import settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from fraisse.structures import Signature, Structure  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

MIXED = Signature.of(("E", 2), ("U", 1))


@st.composite
def structures(draw, sig=MIXED, min_size=1, max_size=4):
    n = draw(st.integers(min_size, max_size))
    tables = []
    for _, k in sig.symbols:
        universe = list(itertools.product(range(n), repeat=k))
        tables.append(frozenset(draw(st.sets(st.sampled_from(universe), max_size=len(universe)))))
    return Structure(sig, n, tuple(tables))


@st.composite
def permutations_of(draw, n):
    return tuple(draw(st.permutations(list(range(n)))))


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
