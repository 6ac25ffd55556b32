"""Randomized invariants via hypothesis: algebraic identities that must hold
for every input, not just the corpus."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from varan.extreal import ExtendedReal
from varan.funcspace import SubgradientPair, graph_distance
from varan.secondorder import gen_cs

finite = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
)
vec3 = arrays(np.float64, (3,), elements=st.floats(-10, 10, allow_nan=False))


@settings(max_examples=60, deadline=None)
@given(finite, finite)
def test_extreal_order_total_and_consistent(a, b):
    ea, eb = ExtendedReal(a), ExtendedReal(b)
    assert (ea <= eb) == (a <= b)
    assert (ea == eb) == (a == b)
    assert ea < ExtendedReal.infinity()
    assert not (ExtendedReal.infinity() < ea)


@settings(max_examples=60, deadline=None)
@given(finite, finite)
def test_extreal_addition_matches_floats(a, b):
    assert float(ExtendedReal(a) + ExtendedReal(b)) == a + b
    assert (ExtendedReal(a) + ExtendedReal.infinity()).is_infinite


@settings(max_examples=60, deadline=None)
@given(vec3, vec3, vec3, vec3, vec3, vec3)
def test_graph_distance_triangle(x1, v1, x2, v2, x3, v3):
    p = SubgradientPair(x1, v1, 0.0)
    q = SubgradientPair(x2, v2, 0.0)
    r = SubgradientPair(x3, v3, 0.0)
    assert graph_distance(p, q) >= 0.0
    assert graph_distance(p, q) == graph_distance(q, p)
    assert graph_distance(p, r) <= graph_distance(p, q) + graph_distance(q, r) + 1e-9


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float64, (3, 3), elements=st.floats(-2, 2, allow_nan=False)),
    vec3,
    vec3,
    st.floats(min_value=0.1, max_value=3.0),
)
def test_gen_cs_inequality_for_spd(M, x, y, shift):
    # M M^T + shift I is symmetric positive definite by construction
    A = M @ M.T + shift * np.eye(3)
    lhs, rhs = gen_cs(A, x, y)
    assert lhs >= rhs - 1e-8 * max(1.0, abs(lhs), abs(rhs))
    # equality witness: y = A x makes both sides 2 <x, Ax>
    lhs2, rhs2 = gen_cs(A, x, A @ x)
    assert lhs2 == np.float64(rhs2) or abs(lhs2 - rhs2) <= 1e-6 * max(1.0, abs(lhs2))
