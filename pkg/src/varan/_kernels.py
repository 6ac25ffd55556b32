"""Array-only hot loops with numba acceleration and a pure-numpy fallback.

Only kernels that operate on plain float arrays live here: point-cloud
Hausdorff scans, windowed minima over distance masks, and pairwise
Lipschitz ratio estimation.  Oracle evaluation stays in vectorized numpy
in the calling modules because function handles are arbitrary Python
callables.

Backend selection: numba is used when importable unless the environment
variable VARAN_NO_NUMBA is set to a nonempty value.  `set_backend` allows
explicit override (used by tests and the benchmark script).
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba as nb

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False

_FORCED: bool | None = None


def use_numba() -> bool:
    if _FORCED is not None:
        return _FORCED and HAS_NUMBA
    if os.environ.get("VARAN_NO_NUMBA"):
        return False
    return HAS_NUMBA


def set_backend(numba_enabled: bool | None):
    """Force the backend (True/False) or restore env-based selection (None)."""
    global _FORCED
    _FORCED = numba_enabled


#### directed Hausdorff between point clouds ####


def _directed_hausdorff_np(a: np.ndarray, b: np.ndarray) -> float:
    """max over rows of a of distance to the cloud b, chunked to bound memory."""
    worst = 0.0
    chunk = max(1, int(2e6) // max(1, b.shape[0]))
    for lo in range(0, a.shape[0], chunk):
        blk = a[lo : lo + chunk]
        d2 = ((blk[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
        worst = max(worst, float(np.sqrt(d2.min(axis=1)).max()))
    return worst


if HAS_NUMBA:

    @nb.njit(cache=True, fastmath=True)
    def _directed_hausdorff_nb(a, b):  # pragma: no cover - measured via dispatch
        worst = 0.0
        for i in range(a.shape[0]):
            best = np.inf
            for j in range(b.shape[0]):
                d = 0.0
                for k in range(a.shape[1]):
                    t = a[i, k] - b[j, k]
                    d += t * t
                if d < best:
                    best = d
                    if best <= worst:
                        # cannot raise the running max; stop scanning this row
                        break
            if best > worst and best < np.inf:
                worst = best
        return np.sqrt(worst)


def directed_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """sup_{p in a} dist(p, b) for 2D float arrays (npoints, ndim)."""
    a = np.ascontiguousarray(np.atleast_2d(np.asarray(a, dtype=np.float64)))
    b = np.ascontiguousarray(np.atleast_2d(np.asarray(b, dtype=np.float64)))
    if a.shape[0] == 0:
        return 0.0
    if b.shape[0] == 0:
        return np.inf
    if use_numba():
        return float(_directed_hausdorff_nb(a, b))
    return _directed_hausdorff_np(a, b)


#### windowed minima along a grid ####


def _windowed_min_np(values: np.ndarray, dist2: np.ndarray, radius2: float) -> np.ndarray:
    masked = np.where(dist2 <= radius2, values[None, :], np.inf)
    return masked.min(axis=1)


if HAS_NUMBA:

    @nb.njit(cache=True)
    def _windowed_min_nb(values, dist2, radius2):  # pragma: no cover
        m = dist2.shape[0]
        out = np.empty(m)
        for i in range(m):
            best = np.inf
            for j in range(m):
                if dist2[i, j] <= radius2 and values[j] < best:
                    best = values[j]
            out[i] = best
        return out


def windowed_min(values: np.ndarray, dist2: np.ndarray, radius2: float) -> np.ndarray:
    """For each grid index i, min of values over { j : dist2[i,j] <= radius2 }.

    Empty windows yield +inf.
    """
    values = np.asarray(values, dtype=np.float64)
    dist2 = np.asarray(dist2, dtype=np.float64)
    if use_numba():
        return _windowed_min_nb(values, dist2, float(radius2))
    return _windowed_min_np(values, dist2, float(radius2))


#### pairwise Lipschitz ratio ####


def _pairwise_lipschitz_np(points: np.ndarray, images: np.ndarray, min_sep: float) -> float:
    dp = np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2))
    di = np.sqrt(((images[:, None, :] - images[None, :, :]) ** 2).sum(axis=2))
    iu = np.triu_indices(points.shape[0], k=1)
    dp, di = dp[iu], di[iu]
    ok = dp > min_sep
    if not ok.any():
        return 0.0
    return float((di[ok] / dp[ok]).max())


if HAS_NUMBA:

    @nb.njit(cache=True, fastmath=True)
    def _pairwise_lipschitz_nb(points, images, min_sep):  # pragma: no cover
        m = points.shape[0]
        worst = 0.0
        for i in range(m):
            for j in range(i + 1, m):
                dp = 0.0
                for k in range(points.shape[1]):
                    t = points[i, k] - points[j, k]
                    dp += t * t
                dp = np.sqrt(dp)
                if dp <= min_sep:
                    continue
                di = 0.0
                for k in range(images.shape[1]):
                    t = images[i, k] - images[j, k]
                    di += t * t
                r = np.sqrt(di) / dp
                if r > worst:
                    worst = r
        return worst


def pairwise_lipschitz(points: np.ndarray, images: np.ndarray, min_sep: float = 1e-12) -> float:
    """max over point pairs of ||image_i - image_j|| / ||point_i - point_j||."""
    points = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=np.float64)))
    images = np.ascontiguousarray(np.atleast_2d(np.asarray(images, dtype=np.float64)))
    if points.shape[0] < 2:
        return 0.0
    if use_numba():
        return float(_pairwise_lipschitz_nb(points, images, float(min_sep)))
    return _pairwise_lipschitz_np(points, images, float(min_sep))
