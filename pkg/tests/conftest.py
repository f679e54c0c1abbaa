import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from bidual.ring import RingDescriptor

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"

SMALL_RINGS = [RingDescriptor(3, 2), RingDescriptor(3, 3), RingDescriptor(5, 1), RingDescriptor(3, 1, (3,)), RingDescriptor(3, 2, (3,)), RingDescriptor(5, 1, (5,))]


@pytest.fixture(scope="session")
def derived():
    return json.loads((FIXTURES / "derived.json").read_text())


def ring_from_json(d):
    return RingDescriptor.from_json(d)


rings = st.sampled_from(SMALL_RINGS)


@st.composite
def elements(draw, ring):
    return np.array(draw(st.lists(st.integers(0, ring.q - 1), min_size=ring.order, max_size=ring.order)), dtype=np.int64)


@st.composite
def modules(draw, ring=None, max_gens=3, max_rels=3):
    from bidual.modules import PresentedModule

    R = ring or draw(rings)
    g = draw(st.integers(1, max_gens))
    k = draw(st.integers(0, max_rels))
    rel = np.zeros((k, g, R.order), dtype=np.int64)
    for i in range(k):
        for j in range(g):
            # bias towards the maximal ideal so the modules are not all zero
            x = draw(elements(R))
            if draw(st.booleans()):
                x = x * R.p % R.q
            rel[i, j] = x
    return PresentedModule(R, g, rel)
