"""Hessian bundles, quadratic bundles, shifts, and the eigenvalue bound."""
import numpy as np
import pytest

from varan.bundles import (
    HessianBundleConfig,
    QuadraticBundleConfig,
    bundle_shift,
    bundles_match,
    c11_gate,
    fd_hessian_checked,
    hessian_bundle,
    nonemptiness_check,
    quad_bundle,
    uniform_lower_bound,
)
from varan.corpus import corpus_get
from varan.errors import PreconditionError
from varan.funcspace import SubgradientPair, add_quadratic


def _anchor(entry, index=0):
    a = entry.anchors[index]
    return SubgradientPair(a.x, a.v, float(entry.handle(a.x)))


#### finite-difference Hessians ####


def test_fd_hessian_on_smooth_quadratic():
    f = corpus_get("quad_s", s=3.0).handle
    H = fd_hessian_checked(f, np.array([0.2]), h=1e-3)
    np.testing.assert_allclose(H, [[3.0]], atol=1e-5)


def test_fd_hessian_rejects_kink():
    f = corpus_get("abs", dim=1).handle
    # the h vs h/2 agreement gate must reject the kink point
    assert fd_hessian_checked(f, np.zeros(1), h=1e-3) is None


def test_c11_gate_accepts_huber_and_rejects_gradient_jump():
    huber = corpus_get("huber").handle
    lip = c11_gate(huber, np.zeros(1), 0.25)
    assert 0.5 <= lip <= 2.0
    kinky = corpus_get("weakly_convex").handle  # gradient jumps at 0
    with pytest.raises(PreconditionError):
        c11_gate(kinky, np.zeros(1), 0.25)


def test_hessian_bundle_of_smooth_quadratic():
    f = corpus_get("quad_s", s=2.0).handle
    hb = hessian_bundle(f, np.zeros(1), HessianBundleConfig(levels=6, per_shell=16))
    assert len(hb.members) == 1
    np.testing.assert_allclose(hb.members[0], [[2.0]], atol=1e-3)
    assert hb.min_eigenvalue() == pytest.approx(2.0, abs=1e-3)


def test_hessian_bundle_two_sided_curvature():
    # 0.5 * max(x, 0)^2 is C11 with Hessians {0, 1} accumulating at 0
    f = corpus_get("halfsquare").handle
    hb = hessian_bundle(f, np.zeros(1), HessianBundleConfig(levels=6, per_shell=16))
    eigs = sorted(float(M[0, 0]) for M in hb.members)
    assert len(eigs) == 2
    assert abs(eigs[0] - 0.0) <= 1e-3 and abs(eigs[1] - 1.0) <= 1e-3


def test_envelope_hessian_bundle_floor():
    e = corpus_get("env_quad")
    hb = hessian_bundle(e.handle, np.zeros(1), HessianBundleConfig(levels=6, per_shell=16))
    assert hb.min_eigenvalue() >= e.handle.params["modulus"] - 1e-2


#### quadratic bundles ####


def test_quad_bundle_revised_members_at_kink():
    e = corpus_get("paper_example")
    res = quad_bundle(e.handle, _anchor(e), 0.1, QuadraticBundleConfig(variant="revised"))
    dims = sorted(q.subspace_dim for q in res.members)
    assert dims == [0, 1]  # the halved-curvature form plus delta_0
    full = [q for q in res.members if q.subspace_dim == 1][0]
    np.testing.assert_allclose(full.A, [[1.0]], atol=5e-3)


def test_quad_bundle_original_adds_flat_form():
    e = corpus_get("paper_example")
    res = quad_bundle(e.handle, _anchor(e), 0.1, QuadraticBundleConfig(variant="original"))
    flats = [q for q in res.members if q.subspace_dim == 1 and abs(q.A[0, 0]) <= 5e-2]
    assert flats, [repr(q) for q in res.members]


def test_quad_bundle_flat_and_curved_branches_at_huber_knee():
    e = corpus_get("huber")
    res = quad_bundle(e.handle, _anchor(e, 1))
    vals = sorted(float(q.A[0, 0]) for q in res.members if q.subspace_dim == 1)
    assert len(vals) == 2
    assert abs(vals[0] - 0.0) <= 5e-3  # affine branch
    assert abs(vals[1] - 0.5) <= 5e-3  # quadratic branch, halved curvature
    assert uniform_lower_bound(res) == pytest.approx(0.0, abs=5e-3)


def test_uniform_lower_bound_ignores_point_forms():
    e = corpus_get("abs", dim=1)
    res = quad_bundle(e.handle, _anchor(e))
    assert all(q.subspace_dim == 0 for q in res.members)
    assert uniform_lower_bound(res) == np.inf


def test_bundle_shift_matches_direct_computation():
    e = corpus_get("paper_example")
    f = e.handle
    H = 2.0 * np.eye(1)
    cfg = QuadraticBundleConfig(levels=6, per_shell=16)
    base = quad_bundle(f, _anchor(e), 0.1, cfg)
    direct = quad_bundle(add_quadratic(f, H), _anchor(e), 0.1, cfg)
    assert bundles_match(direct, bundle_shift(base, H), 5e-2)


def test_bundle_shift_requires_symmetry():
    e = corpus_get("abs", dim=2)
    res = quad_bundle(e.handle, _anchor(e))
    with pytest.raises(PreconditionError):
        bundle_shift(res, np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_nonemptiness_check_on_declared_anchor():
    e = corpus_get("weakly_convex")
    assert nonemptiness_check(e.handle, _anchor(e))
