"""Shared hypothesis strategies."""

import math

from hypothesis import strategies as st

from cascadesim.chain import InteractionChain, Pass, SystemSpec

angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


@st.composite
def chains(draw, max_passes=6, max_systems=3):
    n_sys = draw(st.integers(1, max_systems))
    systems = tuple(
        SystemSpec(i + 1, draw(st.floats(-2, 2)), draw(st.floats(0, 0.5)), draw(st.floats(0, 3)))
        for i in range(n_sys)
    )
    n = draw(st.integers(1, max_passes))
    passes = tuple(
        Pass(draw(st.integers(1, n_sys)), draw(st.floats(0, 3)), draw(angles), draw(angles))
        for _ in range(n)
    )
    etas = tuple(draw(st.floats(0, 1)) for _ in range(n - 1))
    return InteractionChain(systems, passes, etas, draw(st.booleans()))
