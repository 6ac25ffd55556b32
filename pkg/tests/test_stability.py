"""Variational s-convexity checks, quotient moduli, tilt stability, and
the cross-theorem modulus relationships."""
import numpy as np
import pytest

from varan.corpus import corpus_get
from varan.errors import ConfigError, PreconditionError
from varan.funcspace import SubgradientPair
from varan.stability import (
    cnv_estimate,
    growth_vs_d2,
    hessian_convexity_check,
    largest_s,
    semidefinite_necessity_check,
    svar_check,
    theorem46_crosscheck,
    theorem52_crosscheck,
    tilt_check,
    tilt_map,
)


def _anchor(entry, index=0):
    a = entry.anchors[index]
    return SubgradientPair(a.x, a.v, float(entry.handle(a.x)))


#### variational s-convexity ####


def test_svar_monotone_in_s_on_quadratic():
    e = corpus_get("quad_s", s=2.0)
    anchor = _anchor(e)
    flags = [svar_check(e.handle, anchor, s).passed for s in (-1.0, 0.0, 1.5, 2.0, 2.6, 4.0)]
    assert flags == sorted(flags, reverse=True)
    assert flags[3] and not flags[4]  # holds at s = 2, fails above


def test_svar_failure_carries_witnesses():
    e = corpus_get("quad_s", s=2.0)
    res = svar_check(e.handle, _anchor(e), 3.0)
    assert not res.passed and not res.inconclusive
    assert res.witnesses


def test_svar_empty_pair_set_is_inconclusive():
    e = corpus_get("quad_s", s=2.0)
    res = svar_check(e.handle, _anchor(e), 1.0, pairs=[])
    assert res.inconclusive and not res.passed


def test_svar_rejects_usc_anchor():
    e = corpus_get("usc_jump")
    anchor = SubgradientPair(np.zeros(1), np.zeros(1), float(e.handle(np.zeros(1))))
    with pytest.raises(PreconditionError):
        svar_check(e.handle, anchor, 0.0)


def test_largest_s_recovers_declared_moduli():
    for s in (1.0, 2.0):
        e = corpus_get("quad_s", s=s)
        est = largest_s(e.handle, _anchor(e))
        assert est is not None and abs(est - s) <= 5e-2


def test_largest_s_zero_at_huber_knee():
    # the affine branch pins the modulus at zero despite convexity
    e = corpus_get("huber")
    est = largest_s(e.handle, _anchor(e, 1))
    assert est is not None and abs(est) <= 1e-3


#### quotient modulus ####


def test_cnv_exact_on_quadratics():
    for s in (-1.0, 0.0, 3.0):
        e = corpus_get("quad_s", s=s)
        res = cnv_estimate(e.handle, _anchor(e))
        assert res.value == pytest.approx(s, abs=1e-6)
        assert not res.low_confidence


def test_cnv_on_worked_example():
    e = corpus_get("paper_example")
    res = cnv_estimate(e.handle, _anchor(e))
    assert res.value == pytest.approx(2.0, abs=5e-2)


#### growth and Hessian-convexity legs ####


def test_growth_vs_d2_forward_on_quadratic():
    e = corpus_get("quad_s", s=2.0)
    assert growth_vs_d2(e.handle, _anchor(e), 1.5, "forward")
    assert not growth_vs_d2(e.handle, _anchor(e), 3.0, "forward")


def test_growth_vs_d2_backward_needs_strict_slack():
    e = corpus_get("quad_s", s=2.0)
    anchor = _anchor(e)
    assert growth_vs_d2(e.handle, anchor, 1.0, "backward", mu=2.0)
    assert not growth_vs_d2(e.handle, anchor, 2.0, "backward", mu=2.0)


def test_growth_vs_d2_unknown_mode():
    e = corpus_get("quad_s", s=2.0)
    with pytest.raises(ConfigError):
        growth_vs_d2(e.handle, _anchor(e), 1.0, "sideways")


@pytest.mark.parametrize("mode", ["i_to_ii", "ii_to_iii", "iii_to_i"])
def test_hessian_convexity_legs_on_smooth_quadratic(mode):
    f = corpus_get("quad_s", s=3.0).handle
    assert hessian_convexity_check(f, np.zeros(1), 2.0, mode)


def test_hessian_convexity_unknown_mode():
    f = corpus_get("quad_s", s=3.0).handle
    with pytest.raises(ConfigError):
        hessian_convexity_check(f, np.zeros(1), 2.0, "iv_to_v")


#### tilt stability ####


def test_tilt_map_solves_tilted_problem():
    f = corpus_get("quad_s", s=2.0).handle
    res = tilt_map(f, np.zeros(1), 0.5, np.array([0.4]))
    assert not res.multivalued
    np.testing.assert_allclose(res.point, [0.2], atol=1e-6)
    assert not res.boundary_active


def test_tilt_map_flags_boundary():
    f = corpus_get("quad_s", s=2.0).handle
    res = tilt_map(f, np.zeros(1), 0.1, np.array([0.4]))  # argmin outside the ball
    assert res.boundary_active


def test_tilt_check_quadratic_modulus():
    e = corpus_get("quad_s", s=2.0)
    res = tilt_check(e.handle, e.anchors[0].x)
    assert res.stable
    assert res.kappa_hat == pytest.approx(0.5, abs=1e-6)


def test_tilt_check_stable_with_zero_kappa():
    e = corpus_get("abs", dim=1)
    res = tilt_check(e.handle, e.anchors[0].x)
    assert res.stable
    assert res.kappa_hat <= 1e-9


def test_tilt_check_detects_multivalued_argmin():
    e = corpus_get("halfsquare")
    res = tilt_check(e.handle, e.anchors[0].x)
    assert not res.stable
    assert res.witnesses


#### theorem crosschecks ####


def test_theorem46_quadratic_all_relationships_pass():
    e = corpus_get("quad_s", s=2.0)
    rep = theorem46_crosscheck(e.handle, _anchor(e))
    assert rep.passed()
    names = {r["name"] for r in rep.relationships}
    assert {"mu_ge_half_s", "svar_below_2mu", "cnv_matches_s"} <= names


def test_theorem46_huber_knee_flat_branch():
    e = corpus_get("huber")
    rep = theorem46_crosscheck(e.handle, _anchor(e, 1))
    assert rep.passed()
    assert rep.mu == pytest.approx(0.0, abs=5e-3)


def test_theorem46_inconclusive_when_quotient_unsettled():
    e = corpus_get("abs", dim=1)
    rep = theorem46_crosscheck(e.handle, _anchor(e))
    cnv_rel = [r for r in rep.relationships if r["name"] == "cnv_matches_s"][0]
    assert cnv_rel["passed"] and "inconclusive" in cnv_rel["note"]


def test_theorem46_shift_consistency():
    e = corpus_get("quad_s", s=1.0)
    rep = theorem46_crosscheck(e.handle, _anchor(e), shift_r=0.5)
    shift_rels = [r for r in rep.relationships if r["name"].startswith("shift")]
    assert shift_rels and all(r["passed"] for r in shift_rels)


def test_theorem52_quadratic():
    e = corpus_get("quad_s", s=2.0)
    rep = theorem52_crosscheck(e.handle, e.anchors[0].x)
    assert rep.passed()
    assert rep.kappa == pytest.approx(0.5, abs=1e-6)
    assert rep.config["stable"]


def test_theorem52_vacuous_when_not_tilt_stable():
    e = corpus_get("halfsquare")
    rep = theorem52_crosscheck(e.handle, e.anchors[0].x)
    assert not rep.config["stable"]
    rel = [r for r in rep.relationships if r["name"] == "mu_ge_inv_2kappa"][0]
    assert rel["passed"] and "vacuous" in rel["note"]


#### semidefiniteness ####


def test_semidefinite_necessity_on_convex_anchor():
    e = corpus_get("quad_s", s=2.0)
    chk = semidefinite_necessity_check(e.handle, _anchor(e))
    assert chk.checked and chk.ok
    assert chk.min_value >= -1e-8


def test_semidefinite_necessity_skipped_without_convexity():
    e = corpus_get("neg_quartic")
    anchor = SubgradientPair(np.zeros(1), np.zeros(1), 0.0)
    chk = semidefinite_necessity_check(e.handle, anchor)
    assert not chk.checked and chk.ok is None
