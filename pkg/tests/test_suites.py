import numpy as np

from bidual.serialize import dumps, stringify
from bidual.suites import (
    APPENDIX_RINGS,
    _rng,
    random_element,
    random_module,
    suite_appendix_c,
    suite_bidual,
    suite_stark,
)


def test_random_elements_lean_to_maximal_ideal():
    R = APPENDIX_RINGS[0]
    rng = _rng(0, 99)
    xs = [random_element(rng, R) for _ in range(400)]
    non_units = sum(int(x.sum()) % R.p == 0 for x in xs)
    assert non_units > 250


def test_random_modules_are_mostly_nonzero():
    rng = _rng(1, 98)
    lengths = [random_module(rng, APPENDIX_RINGS[1]).length() for _ in range(50)]
    assert sum(0 < l for l in lengths) > 30


def test_small_appendix_run_is_deterministic():
    a = dumps(suite_appendix_c(seed=3, workers=4, count=10, pairs=10, presentations=10))
    b = dumps(suite_appendix_c(seed=3, workers=1, count=10, pairs=10, presentations=10))
    assert a == b
    assert a != dumps(suite_appendix_c(seed=4, workers=1, count=10, pairs=10, presentations=10))


def test_small_bidual_run_passes():
    rep = suite_bidual(seed=2, count=8)
    assert rep["passed"]


def test_small_stark_run():
    rep = suite_stark(seed=1, count=4, pool_max=2)
    assert rep["passed"], rep


def test_stringify():
    from fractions import Fraction

    assert stringify({"a": 3, "b": [np.int64(2), Fraction(1, 3)], "c": True, "d": None}) == {"a": "3", "b": ["2", "1/3"], "c": True, "d": None}
