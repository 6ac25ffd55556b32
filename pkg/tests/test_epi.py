"""Epigraph clouds, truncated set distance, and sampled epi-convergence."""
import numpy as np
import pytest

from varan.epi import epi_cloud, epi_converges, epi_distance
from varan.errors import ConfigError, ImproperOnBoxError

BOX = [[-2.0, 2.0], [-0.5, 4.0]]  # one spatial axis plus the height row


def _quad(shift=0.0, lift=0.0):
    def f(pts):
        x = np.asarray(pts)[..., 0]
        return (x - shift) ** 2 + lift

    return f


def test_epi_cloud_schema_and_heights():
    c = epi_cloud(_quad(), BOX, resolution=0.25)
    assert c.points.shape[1] == 2
    assert c.dim == 1
    # every cloud point lies on or above the graph
    x, a = c.points[:, 0], c.points[:, 1]
    assert np.all(a >= x**2 - 1e-12)


def test_epi_cloud_improper_raises():
    def always_inf(pts):
        return np.full(np.asarray(pts).shape[:-1], np.inf)

    with pytest.raises(ImproperOnBoxError):
        epi_cloud(always_inf, BOX, resolution=0.5)


def test_epi_distance_pseudometric():
    r = 0.2
    c1 = epi_cloud(_quad(0.0), BOX, r)
    c2 = epi_cloud(_quad(0.3), BOX, r)
    c3 = epi_cloud(_quad(-0.4, lift=0.5), BOX, r)
    rho = 3.0
    d11 = epi_distance(c1, c1, rho)
    d12 = epi_distance(c1, c2, rho)
    d21 = epi_distance(c2, c1, rho)
    d13 = epi_distance(c1, c3, rho)
    d23 = epi_distance(c2, c3, rho)
    assert d11 == 0.0
    assert d12 == d21 > 0.0
    assert d13 <= d12 + d23 + 1e-12


def test_epi_distance_bounded_by_shift():
    r = 0.1
    c1 = epi_cloud(_quad(0.0), BOX, r)
    c2 = epi_cloud(_quad(0.05), BOX, r)
    # a small graph shift moves the truncated epigraphs by at most about
    # the shift plus one grid resolution
    assert epi_distance(c1, c2, 3.0) <= 0.05 + 2.0 * r


def test_epi_distance_requires_matching_boxes():
    c1 = epi_cloud(_quad(), BOX, 0.25)
    c2 = epi_cloud(_quad(), [[-1.0, 1.0], [-0.5, 4.0]], 0.25)
    with pytest.raises(ConfigError):
        epi_distance(c1, c2, 2.0)


#### epi-convergence probe ####


def test_epi_converges_accepts_geometric_perturbation():
    # offsets must be below tol across the deeper half of the schedule,
    # so the perturbation decays geometrically with the level index
    target = _quad()
    seq = [(lambda k: (lambda pts: _quad()(pts) + 2.0**-k))(k) for k in range(12)]
    ok, cert = epi_converges(seq, target, [[-1.5, 1.5]], tol=1e-2)
    assert ok, cert["witnesses"][:2]


def test_epi_converges_rejects_slow_harmonic_perturbation():
    # 1/k offsets are still ~0.08 at depth 12: the sampled surrogate
    # correctly reports that this schedule has not converged yet
    target = _quad()
    seq = [(lambda k: (lambda pts: _quad()(pts) + 1.0 / (k + 1)))(k) for k in range(12)]
    ok, cert = epi_converges(seq, target, [[-1.5, 1.5]], tol=1e-2)
    assert not ok
    assert cert["n_limsup_failures"] > 0


def test_epi_converges_rejects_constant_offset():
    target = _quad()
    seq = [(lambda pts: _quad()(pts) + 0.5)] * 12
    ok, cert = epi_converges(seq, target, [[-1.5, 1.5]], tol=1e-2)
    assert not ok
    assert cert["n_limsup_failures"] > 0


def test_epi_converges_moving_kink_on_geometric_schedule():
    # |x - 1/k| epi-converges to |x|; geometric index depth reaches the
    # regime where the kink sits inside the shrinking windows
    def target(pts):
        return np.abs(np.asarray(pts)[..., 0])

    ks = 4 ** np.arange(2, 12)
    seq = [(lambda k: (lambda pts: np.abs(np.asarray(pts)[..., 0] - 1.0 / k)))(int(k)) for k in ks]
    ok, cert = epi_converges(seq, target, [[-1.5, 1.5]], tol=2e-2)
    assert ok, cert["witnesses"][:2]


def test_epi_converges_handles_infinite_targets():
    # family of steep walls converging to the indicator of [-1, 1]
    def target(pts):
        x = np.asarray(pts)[..., 0]
        return np.where(np.abs(x) <= 1.0, 0.0, np.inf)

    # the deepest wall must clear the infinity cap on the whole matched
    # window of the +inf grid points, which forces a steep growth schedule
    ks = 16.0 ** np.arange(10)
    seq = [
        (lambda k: (lambda pts: k * np.maximum(np.abs(np.asarray(pts)[..., 0]) - 1.0, 0.0) ** 2))(
            float(k)
        )
        for k in ks
    ]
    ok, cert = epi_converges(seq, target, [[-2.0, 2.0]], tol=2e-2)
    assert ok, cert["witnesses"][:2]
