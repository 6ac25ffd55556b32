"""Extended-real scalar semantics: proper functions only (+inf allowed,
-inf and NaN rejected), ordering, and positive scaling."""
import math

import numpy as np
import pytest

from varan.extreal import INFINITY_CAP, ExtendedReal, as_extended


def test_rejects_nan_and_minus_inf():
    with pytest.raises(ValueError):
        ExtendedReal(float("nan"))
    with pytest.raises(ValueError):
        ExtendedReal(-math.inf)


def test_infinity_roundtrip():
    inf = ExtendedReal.infinity()
    assert inf.is_infinite and not inf.is_finite
    assert float(inf) == math.inf
    assert as_extended(np.inf) == inf


def test_ordering_mixes_floats():
    assert ExtendedReal(1.0) < ExtendedReal(2.0)
    assert ExtendedReal(1.0) < 2.0
    assert ExtendedReal(3.0) >= 3.0
    assert ExtendedReal.infinity() > 1e308


def test_addition_absorbs_infinity():
    assert (ExtendedReal.infinity() + 5.0).is_infinite
    assert (ExtendedReal(2.0) + ExtendedReal(3.0)) == 5.0


def test_positive_scaling_only_for_infinity():
    assert float(2.0 * ExtendedReal(3.0)) == 6.0
    with pytest.raises(ValueError):
        0.0 * ExtendedReal.infinity()
    with pytest.raises(ValueError):
        -1.0 * ExtendedReal.infinity()


def test_cap_is_a_plain_float_bound():
    # the cap is a sentinel for "numerically infinite" sampled values
    assert INFINITY_CAP > 1e8
    assert ExtendedReal(INFINITY_CAP).is_finite
