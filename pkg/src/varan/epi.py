"""Sampled epigraphical convergence: clouds, truncated set distance, and
the two-sided liminf/limsup test.

Epigraphs are represented as finite point clouds over a box.  Function
convergence is tested against the finite surrogate of the epi-limit
conditions: adversarial sequences are grid paths confined to windows
shrinking like k^{-1/2}, and the constructed recovery sequence is the
windowed argmin trajectory.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ._kernels import directed_hausdorff, windowed_min
from .errors import ConfigError, ImproperOnBoxError, PreconditionError
from .extreal import INFINITY_CAP
from .gridutil import box_grid, sphere_directions


@dataclass(frozen=True)
class EpigraphCloud:
    points: np.ndarray  # (m, dim+1): coordinates then height
    box: np.ndarray  # (dim+1, 2): spatial rows then the height row
    resolution: float

    @property
    def dim(self) -> int:
        return self.box.shape[0] - 1

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{i}" for i in range(self.dim)] + ["alpha"])
            for row in self.points:
                writer.writerow([f"{v:.17g}" for v in row])


def epi_cloud(f, box, resolution: float) -> EpigraphCloud:
    """Sample the epigraph of f over a box whose last row caps the height.

    Each grid point x with finite f(x) below the cap contributes the
    graph point (x, f(x)) plus vertical samples on the height grid.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    box = np.asarray(box, dtype=np.float64).reshape(-1, 2)
    space, (alo, ahi) = box[:-1], box[-1]
    axes = [np.arange(lo, hi + resolution / 2, resolution) for lo, hi in space]
    mesh = np.meshgrid(*axes, indexing="ij")
    xs = np.stack([m.ravel() for m in mesh], axis=-1)
    heights = np.arange(alo, ahi + resolution / 2, resolution)
    vals = np.asarray(f(xs), dtype=np.float64)
    rows = []
    for x, fx in zip(xs, vals):
        if not np.isfinite(fx) or fx > ahi:
            continue
        rows.append(np.concatenate([x, [fx]]))
        for a in heights[heights > fx]:
            rows.append(np.concatenate([x, [a]]))
    if not rows:
        raise ImproperOnBoxError("no finite values below the height cap on the box")
    return EpigraphCloud(points=np.asarray(rows), box=box, resolution=float(resolution))


def epi_distance(c1: EpigraphCloud, c2: EpigraphCloud, rho: float, center=None) -> float:
    """Symmetrized Hausdorff distance between the clouds truncated to the
    closed rho-ball.  Truncating both sides keeps the triangle inequality."""
    if c1.box.shape != c2.box.shape or not np.allclose(c1.box, c2.box):
        raise ConfigError("epi_distance requires clouds sampled over the same box")
    if abs(c1.resolution - c2.resolution) > 1e-12:
        raise ConfigError("epi_distance requires clouds with equal resolution")
    center = (
        np.zeros(c1.points.shape[1])
        if center is None
        else np.asarray(center, dtype=np.float64)
    )
    a = c1.points[np.linalg.norm(c1.points - center, axis=1) <= rho]
    b = c2.points[np.linalg.norm(c2.points - center, axis=1) <= rho]
    if a.shape[0] == 0 or b.shape[0] == 0:
        return 0.0 if a.shape[0] == b.shape[0] else np.inf
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


def _eval_family(fk, grid: np.ndarray) -> np.ndarray:
    vals = np.asarray(fk(grid), dtype=np.float64)
    return vals.reshape(grid.shape[0])


def epi_converges(
    seq: Sequence[Callable],
    f: Callable,
    box,
    tol: float = 1e-3,
    pts_per_axis: int = 21,
    window_radius: Optional[float] = None,
    cap: float = INFINITY_CAP,
    grid: Optional[np.ndarray] = None,
) -> tuple[bool, dict]:
    """Two-sided sampled epi-convergence test of seq toward f on a box.

    For each grid point x the windowed-minimum trajectory
    m_k = min { f_k(x') : |x' - x| <= R / sqrt(k) } is computed on the grid
    and compared against the target's own windowed minimum at the matched
    radius (the finite surrogate of the epi-liminf condition; matching the
    windows removes the finite-depth bias).  Where the target's whole
    window is at or above the cap, the final level must itself exceed the
    cap.  Condition (b) requires the windowed-argmin recovery trajectory
    to come back under f(x) + tol on the tail.
    """
    box = np.asarray(box, dtype=np.float64).reshape(-1, 2)
    if grid is None:
        grid = box_grid(box[:, 0], box[:, 1], pts_per_axis)
    if window_radius is None:
        window_radius = 0.5 * float(np.linalg.norm(box[:, 1] - box[:, 0]))
    fvals = _eval_family(f, grid)
    diffs = grid[:, None, :] - grid[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diffs, diffs)
    K = len(seq)
    trajectories = np.empty((K, grid.shape[0]))
    target_windows = np.empty((K, grid.shape[0]))
    for k, fk in enumerate(seq):
        vals = _eval_family(fk, grid)
        radius = window_radius / np.sqrt(k + 1.0)
        trajectories[k] = windowed_min(vals, dist2, radius * radius)
        target_windows[k] = windowed_min(fvals, dist2, radius * radius)
    tail_lo = K // 2
    ok = True
    witnesses = []
    liminf_ok = np.ones(grid.shape[0], dtype=bool)
    limsup_ok = np.ones(grid.shape[0], dtype=bool)
    for i in range(grid.shape[0]):
        for k in range(tail_lo, K):
            fw = target_windows[k, i]
            if np.isfinite(fw) and fw < cap:
                scale = max(1.0, abs(fw))
                if trajectories[k, i] < fw - tol * scale:
                    liminf_ok[i] = False
                    break
        fw_last = target_windows[-1, i]
        if (not np.isfinite(fw_last)) or fw_last >= cap:
            liminf_ok[i] &= trajectories[-1, i] >= cap
        if np.isfinite(fvals[i]) and fvals[i] < cap:
            # limit surrogate: only the deepest two levels must have come down
            scale = max(1.0, abs(fvals[i]))
            limsup_ok[i] = float(np.max(trajectories[-2:, i])) <= fvals[i] + tol * scale
        if not (liminf_ok[i] and limsup_ok[i]):
            ok = False
            witnesses.append(
                {
                    "x": grid[i].tolist(),
                    "f": float(fvals[i]),
                    "tail_inf": float(np.min(trajectories[tail_lo:, i])),
                    "tail_sup": float(np.max(trajectories[tail_lo:, i])),
                    "liminf_ok": bool(liminf_ok[i]),
                    "limsup_ok": bool(limsup_ok[i]),
                }
            )
    certificate = {
        "grid_size": int(grid.shape[0]),
        "levels": K,
        "window_radius": float(window_radius),
        "tol": float(tol),
        "cap": float(cap),
        "n_liminf_failures": int((~liminf_ok).sum()),
        "n_limsup_failures": int((~limsup_ok).sum()),
        "witnesses": witnesses[:16],
    }
    return ok, certificate


def quadratic_lowerbound_stability(
    seq: Sequence[Callable],
    f_limit: Callable,
    mu: float,
    delta: float,
    dim: int = 1,
    directions: int = 32,
    tol: float = 1e-9,
) -> tuple[bool, Optional[int], list]:
    """Locate the index past which f_k(w) >= (mu - delta)||w||^2 on the
    unit sphere, given that the limit satisfies the bound with mu.

    Returns (holds_from_some_index, index, witnesses); witnesses list the
    violations at the final level when the bound never stabilizes.
    """
    sphere = sphere_directions(dim, directions)
    lim = _eval_family(f_limit, sphere)
    bad = lim < mu - 1e-9
    if bad.any():
        w = sphere[int(np.argmax(bad))]
        raise PreconditionError(
            f"limit violates the mu-bound at w={w.tolist()}: "
            f"{float(lim[np.argmax(bad)]):.6g} < {mu}"
        )
    bound = mu - delta
    ok_levels = []
    vals_by_level = []
    for fk in seq:
        vals = _eval_family(fk, sphere)
        vals_by_level.append(vals)
        ok_levels.append(bool(np.all(vals >= bound - tol)))
    ok_levels = np.asarray(ok_levels, dtype=bool)
    if not ok_levels[-1]:
        vals = vals_by_level[-1]
        witnesses = [
            {"k": len(seq), "w": sphere[j].tolist(), "value": float(vals[j])}
            for j in np.nonzero(vals < bound - tol)[0][:8]
        ]
        return False, None, witnesses
    # first index from which every later level passes
    idx = len(seq)
    for k in range(len(seq) - 1, -1, -1):
        if not ok_levels[k]:
            break
        idx = k + 1
    return True, idx, []
