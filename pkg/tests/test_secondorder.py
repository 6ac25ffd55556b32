"""Difference quotients, subderivative estimation, generalized quadratic
forms, and the quadratic-form inequality."""
import numpy as np
import pytest

from varan.corpus import corpus_get
from varan.errors import NotQuadraticError
from varan.gridutil import sphere_directions
from varan.secondorder import (
    GeneralizedQuadraticForm,
    delta2,
    delta2_batch,
    d2,
    d2_estimate,
    d2_profile,
    gen_cs,
    gqf_fit,
    gqf_half_envelope,
    twice_epi_diff_probe,
)


#### difference quotients ####


def test_delta2_exact_on_quadratics():
    # the quotient of (s/2) x^2 at (x, sx) equals s w^2 for every t
    f = corpus_get("quad_s", s=3.0).handle
    for t in (0.5, 0.1, 0.01):
        for w in (-1.0, 0.4, 2.0):
            val = delta2(f, [0.3], [0.9], t, [w])
            assert abs(float(val) - 3.0 * w * w) <= 1e-9


def test_delta2_rejects_nonpositive_step():
    f = corpus_get("quad_s").handle
    with pytest.raises(ValueError):
        delta2(f, [0.0], [0.0], 0.0, [1.0])


def test_delta2_batch_matches_scalar():
    f = corpus_get("huber").handle
    W = np.array([[0.5], [-1.0], [2.0]])
    batch = delta2_batch(f, [0.2], [0.2], 0.05, W)
    for row, w in zip(batch, W):
        assert abs(row - float(delta2(f, [0.2], [0.2], 0.05, w))) <= 1e-12


def test_delta2_infinite_outside_domain():
    f = corpus_get("indicator_box").handle
    vals = delta2_batch(f, [0.9], [0.0], 0.5, np.array([[1.0]]))
    assert np.isinf(vals[0])


#### subderivative estimates ####


def test_d2_positive_homogeneity_degree_two():
    f = corpus_get("paper_example").handle
    x, v = np.array([0.6]), np.array([1.2])  # smooth branch, v = f'(x)
    base = float(d2(f, x, v, [1.0]))
    for c in (0.5, 2.0, 3.0):
        scaled = float(d2(f, x, v, [c]))
        assert abs(scaled - c * c * base) <= 1e-3 * max(1.0, c * c * abs(base))


def test_d2_matches_hessian_quadratic_form():
    f = corpus_get("huber_plus_quad").handle
    x = np.array([0.2])
    v = f.grad_at(x)
    H = f.hess_at(x)
    for w in ([1.0], [-0.7], [0.3]):
        expect = float(np.asarray(w) @ H @ np.asarray(w))
        assert abs(float(d2(f, x, v, w)) - expect) <= 1e-3 * max(1.0, abs(expect))


def test_d2_infinite_on_kink_directions():
    f = corpus_get("abs", dim=1).handle
    est = d2_estimate(f, [0.0], [0.0], [1.0])
    assert est.value.is_infinite


def test_d2_exactly_zero_at_zero_direction():
    f = corpus_get("abs", dim=1).handle
    assert float(d2(f, [0.0], [0.0], [0.0])) == 0.0


def test_d2_noise_floor_on_flat_branches():
    # on an affine branch the quotient levels are pure float roundoff;
    # they must classify as a converged zero, not get extrapolated
    f = corpus_get("huber").handle
    x, v = np.array([1.0140625]), np.array([1.0])
    for w in ([0.0], [1.0], [-1.0], [0.5]):
        assert float(d2(f, x, v, w)) == 0.0


def test_d2_zero_limit_from_below():
    # -x^4 has vanishing curvature at the origin; tiny negative levels
    # must also snap to the exact zero limit
    f = corpus_get("neg_quartic").handle
    assert float(d2(f, [0.0], [0.0], [1.0])) == 0.0


def test_d2_profile_matches_pointwise_estimates():
    f = corpus_get("quad_s", s=2.0).handle
    dirs = np.array([[1.0], [-0.5], [0.25]])
    profile = d2_profile(f, [0.1], [0.2], dirs)
    for est, w in zip(profile, dirs):
        single = d2_estimate(f, [0.1], [0.2], w)
        assert abs(float(est.value) - float(single.value)) <= 1e-9


#### generalized quadratic forms ####


def test_gqf_canonicalization_and_call():
    q = GeneralizedQuadraticForm(A=np.diag([2.0, 0.0]), L_basis=np.array([[1.0], [0.0]]))
    assert q.subspace_dim == 1
    assert float(q([0.5, 0.0])) == 0.5
    assert q([0.3, 0.2]).is_infinite  # off the subspace


def test_gqf_distance_and_closeness():
    q1 = GeneralizedQuadraticForm(A=np.array([[1.0]]), L_basis=np.eye(1))
    q2 = GeneralizedQuadraticForm(A=np.array([[1.03]]), L_basis=np.eye(1))
    q3 = GeneralizedQuadraticForm(A=np.array([[2.0]]), L_basis=np.eye(1))
    assert q1.is_close(q2)
    assert not q1.is_close(q3)
    assert q1.distance(q3) == pytest.approx(1.0)


def test_gqf_restricted_eigenvalues():
    B = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    A = np.zeros((3, 3))
    A[:2, :2] = np.array([[2.0, 0.0], [0.0, -1.0]])
    q = GeneralizedQuadraticForm(A=A, L_basis=B)
    np.testing.assert_allclose(sorted(q.restricted_eigenvalues()), [-1.0, 2.0])
    d0 = GeneralizedQuadraticForm(A=np.zeros((2, 2)), L_basis=np.zeros((2, 0)))
    assert d0.restricted_eigenvalues().size == 0


def test_gqf_dict_roundtrip():
    q = GeneralizedQuadraticForm(A=np.array([[1.5, 0.2], [0.2, 0.7]]), L_basis=np.eye(2))
    back = GeneralizedQuadraticForm.from_dict(q.to_dict())
    assert q.distance(back) <= 1e-12


def _subspace_samples(A, B, dirs_in, dirs_out):
    samples = [(np.zeros(B.shape[0]), 0.0)]
    for w in dirs_in:
        samples.append((w, float(w @ A @ w)))
        samples.append((0.5 * w, float(0.25 * w @ A @ w)))
    for w in dirs_out:
        samples.append((w, np.inf))
        samples.append((-w, np.inf))
    return samples


def test_gqf_fit_recovers_subspace_form(rng):
    B = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    S = np.array([[3.0, 0.5], [0.5, 1.0]])
    A = B @ S @ B.T
    circle = sphere_directions(2, 8)
    dirs_in = [B @ c for c in circle] + [-B @ c for c in circle]
    dirs_out = [np.array([0.0, 0.0, 1.0]), np.array([0.6, 0.0, 0.8])]
    q = gqf_fit(_subspace_samples(A, B, dirs_in, dirs_out))
    assert q.subspace_dim == 2
    np.testing.assert_allclose(q.A, A, atol=1e-9)


def test_gqf_fit_asymmetric_finiteness_raises():
    samples = [(np.array([1.0]), 2.0), (np.array([-1.0]), np.inf)]
    with pytest.raises(NotQuadraticError, match="asymmetric"):
        gqf_fit(samples)


def test_gqf_fit_subspace_hole_raises():
    e1, e2 = np.eye(2)
    diag = (e1 + e2) / np.sqrt(2.0)
    samples = [
        (e1, 1.0), (-e1, 1.0),
        (e2, 1.0), (-e2, 1.0),
        (diag, np.inf), (-diag, np.inf),
    ]
    with pytest.raises(NotQuadraticError, match="subspace"):
        gqf_fit(samples)


def test_gqf_fit_nonquadratic_residual_raises():
    # homogeneous of degree one, so no quadratic can match both radii
    ws = [0.5, 1.0, -0.5, -1.0, 0.25, -0.25]
    samples = [(np.array([w]), abs(w)) for w in ws]
    with pytest.raises(NotQuadraticError, match="residual"):
        gqf_fit(samples)


def test_gqf_fit_accepts_noise_scale_zero_form():
    # all-tiny sample values are a zero form measured at float noise,
    # not a non-quadratic shape; mixed exact zeros are fine too
    ws = [0.0, 0.5, 1.0, -0.5, -1.0]
    samples = [(np.array([w]), 7.5e-6 if w else 0.0) for w in ws]
    q = gqf_fit(samples)
    assert q.subspace_dim == 1
    assert q.A[0, 0] == 0.0


def test_gqf_half_envelope_matches_brute_force():
    q = GeneralizedQuadraticForm(A=np.array([[2.0]]), L_basis=np.eye(1))
    lam, w = 0.4, np.array([0.9])
    grid = np.linspace(-3.0, 3.0, 20001).reshape(-1, 1)
    vals = 0.5 * 2.0 * grid[:, 0] ** 2 + ((grid - w) ** 2).sum(axis=1) / (2.0 * lam)
    assert gqf_half_envelope(q, lam, w) == pytest.approx(float(vals.min()), abs=1e-7)


def test_gqf_half_envelope_delta_zero():
    d0 = GeneralizedQuadraticForm(A=np.zeros((1, 1)), L_basis=np.zeros((1, 0)))
    # only u = 0 is feasible, so the envelope is |w|^2 / (2 lam)
    assert gqf_half_envelope(d0, 0.5, [0.8]) == pytest.approx(0.64)


#### quadratic-form inequality ####


def test_gen_cs_inequality_and_equality(rng):
    for _ in range(200):
        n = int(rng.integers(1, 5))
        M = rng.standard_normal((n, n))
        A = M @ M.T + 1e-3 * np.eye(n)
        x = rng.standard_normal(n)
        y = rng.standard_normal(n)
        lhs, rhs = gen_cs(A, x, y)
        assert lhs >= rhs - 1e-10
        lhs_eq, rhs_eq = gen_cs(A, x, A @ x)
        assert abs(lhs_eq - rhs_eq) <= 1e-9 * max(1.0, abs(rhs_eq))


#### epi-convergence of the quotient family ####


def test_twice_epi_diff_probe_on_quadratic():
    f = corpus_get("quad_s", s=2.0).handle
    ok, cert = twice_epi_diff_probe(f, [0.0], [0.0], pts_per_axis=11)
    assert ok, cert
    assert cert["n_infinite_directions"] == 0
