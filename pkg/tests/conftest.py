import numpy as np
import pytest
from hypothesis import strategies as st

from sbtop import SbtopParams


def reference_old(**overrides) -> SbtopParams:
    """One-cell slice holding the "old" column, extended with pC = .6, tC = 1, tE = 2."""
    values = dict(pB=[0.5], pD=0.4, pF=[0.16], tA=[4.5], tB=[2.0], tC=1.0, tD=4.0, tE=[2.0], tF=[5.0])
    values.update(overrides)
    return SbtopParams.from_complements(**values)


def reference_new() -> SbtopParams:
    # tC and tE are not part of the reference example; the values here only fill the slots.
    return SbtopParams.from_complements(pB=[0.8], pD=0.4, pF=[0.25], tA=[7.5], tB=[3.0],
                                        tC=1.0, tD=7.0, tE=[2.0], tF=[2.5])


def reference_with_jprime() -> SbtopParams:
    """Old column plus the reference level j' = 1 with pF(j') = .20 and tF(j') = 8."""
    return SbtopParams.from_complements(pB=[0.5], pD=0.4, pF=[0.16, 0.20], tA=[4.5], tB=[2.0],
                                        tC=1.0, tD=4.0, tE=[2.0, 2.0], tF=[5.0, 8.0])


def reference_design_2x2() -> SbtopParams:
    """2 x 2 design built around the reference cell, which sits at (0, 0)."""
    return SbtopParams.from_complements(pB=[0.5, 0.25], pD=0.4, pF=[0.16, 0.20],
                                        tA=[4.5, 4.5], tB=[2.0, 3.0], tC=1.0, tD=4.0,
                                        tE=[2.0, 2.0], tF=[5.0, 8.0])


def _spread(rng, low, high, size, min_gap):
    while True:
        x = rng.uniform(low, high, size)
        if size < 2 or np.min(np.diff(np.sort(x))) >= min_gap:
            return x


def random_params(rng: np.random.Generator, I: int | None = None, J: int | None = None,
                  mode: str = "nonnegative", min_gap: float = 0.01) -> SbtopParams:
    """Random parameters with every cell strictly inside (0, 1) and both factors effective.

    Distinct ``pB`` and ``pF`` values (at least ``min_gap`` apart) make both
    factors act on ``P``, which the condition checks need.
    """
    I = I or int(rng.integers(2, 5))
    J = J or int(rng.integers(2, 5))
    pB = _spread(rng, 0.05, 0.95, I, min_gap)
    pF = _spread(rng, 0.02, 0.98, J, min_gap)
    pD = rng.uniform(0.05, 0.95)
    if mode == "nonnegative":
        t = lambda size=None: rng.uniform(0.0, 10.0, size)
    else:
        t = lambda size=None: rng.uniform(-10.0, 10.0, size)
    return SbtopParams.from_complements(pB=pB, pD=pD, pF=pF, tA=t(I), tB=t(I), tC=t(), tD=t(),
                                        tE=t(J), tF=t(J), measure_mode=mode)


@st.composite
def params_strategy(draw, mode="nonnegative"):
    seed = draw(st.integers(0, 2**32 - 1))
    I = draw(st.integers(2, 4))
    J = draw(st.integers(2, 4))
    return random_params(np.random.default_rng(seed), I, J, mode=mode)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def reference_wide_design() -> SbtopParams:
    """2 x 2 design whose cell (0, 0) is the reference cell, with an interaction
    contrast (.4 * .64) large enough to survive sampling noise."""
    return SbtopParams.from_complements(pB=[0.5, 0.1], pD=0.4, pF=[0.16, 0.80],
                                        tA=[4.5, 4.5], tB=[2.0, 3.0], tC=1.0, tD=4.0,
                                        tE=[2.0, 2.0], tF=[5.0, 8.0])
