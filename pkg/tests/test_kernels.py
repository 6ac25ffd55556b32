"""Numba and numpy kernel backends must agree bit-for-bit on shared inputs."""
import os
import subprocess
import sys

import numpy as np
import pytest

from varan import _kernels as K

needs_numba = pytest.mark.skipif(not K.HAS_NUMBA, reason="numba not installed")


@pytest.fixture
def forced_backend():
    """Yield a setter and always restore env-based selection afterwards."""
    try:
        yield K.set_backend
    finally:
        K.set_backend(None)


def _random_clouds(rng, n, m, dim):
    return rng.normal(size=(n, dim)), rng.normal(size=(m, dim))


@needs_numba
def test_directed_hausdorff_backends_agree(rng, forced_backend):
    for dim in (1, 2, 3):
        a, b = _random_clouds(rng, 64, 57, dim)
        forced_backend(True)
        fast = K.directed_hausdorff(a, b)
        forced_backend(False)
        slow = K.directed_hausdorff(a, b)
        assert fast == pytest.approx(slow, rel=1e-12, abs=1e-12)


def test_directed_hausdorff_edge_cases(forced_backend):
    a = np.array([[0.0, 0.0], [3.0, 4.0]])
    b = np.array([[0.0, 0.0]])
    for flag in (False, True) if K.HAS_NUMBA else (False,):
        forced_backend(flag)
        assert K.directed_hausdorff(a, b) == 5.0
        assert K.directed_hausdorff(b, a) == 0.0
        assert K.directed_hausdorff(np.zeros((0, 2)), b) == 0.0
        assert K.directed_hausdorff(a, np.zeros((0, 2))) == np.inf


@needs_numba
def test_windowed_min_backends_agree(rng, forced_backend):
    pts = rng.uniform(-1, 1, size=(80, 2))
    vals = rng.normal(size=80)
    vals[::7] = np.inf  # indicator-style holes must survive the window pass
    dist2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    for r2 in (0.0, 0.05, 0.5):
        forced_backend(True)
        fast = K.windowed_min(vals, dist2, r2)
        forced_backend(False)
        slow = K.windowed_min(vals, dist2, r2)
        np.testing.assert_array_equal(fast, slow)
    # radius 0 windows contain only the point itself
    forced_backend(False)
    np.testing.assert_array_equal(K.windowed_min(vals, dist2, 0.0), vals)


@needs_numba
def test_pairwise_lipschitz_backends_agree(rng, forced_backend):
    pts = rng.normal(size=(50, 2))
    imgs = np.stack([np.sin(pts[:, 0]) * 3.0, pts.sum(axis=1)], axis=1)
    forced_backend(True)
    fast = K.pairwise_lipschitz(pts, imgs)
    forced_backend(False)
    slow = K.pairwise_lipschitz(pts, imgs)
    assert fast == pytest.approx(slow, rel=1e-12)


def test_pairwise_lipschitz_known_value(forced_backend):
    pts = np.array([[0.0], [1.0], [3.0]])
    imgs = 2.0 * pts  # exactly Lipschitz with constant 2
    for flag in (False, True) if K.HAS_NUMBA else (False,):
        forced_backend(flag)
        assert K.pairwise_lipschitz(pts, imgs) == pytest.approx(2.0)
    assert K.pairwise_lipschitz(pts[:1], imgs[:1]) == 0.0


def test_env_flag_disables_numba():
    code = (
        "import os; os.environ['VARAN_NO_NUMBA'] = '1'; "
        "from varan import _kernels as K; "
        "print(K.use_numba())"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, check=True,
        env={**os.environ, "VARAN_NO_NUMBA": "1"},
    )
    assert out.stdout.strip() == "False"


def test_set_backend_overrides_env(forced_backend):
    forced_backend(False)
    assert K.use_numba() is False
    if K.HAS_NUMBA:
        forced_backend(True)
        assert K.use_numba() is True
    forced_backend(None)
    assert K.use_numba() == (K.HAS_NUMBA and not os.environ.get("VARAN_NO_NUMBA"))
