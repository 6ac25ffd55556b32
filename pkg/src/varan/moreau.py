"""Proximal mappings, Moreau envelopes, and envelope-based graph sampling.

The proximal solver is a two-stage global minimizer for low dimension:
a dense grid over a trust box (expanded until the minimum detaches from
the boundary) followed by compass-search refinement from every grid
minimum near the global one.  Everything downstream (envelope values,
envelope gradients, attentive sampling of the subgradient graph) runs
through it, so its failure modes are made explicit: prox-unbounded
objectives raise, multivalued proximal points raise where single-
valuedness is required.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._kernels import pairwise_lipschitz
from .errors import (
    AttentivePathDivergenceError,
    ImproperOnBoxError,
    NonDifferentiablePointError,
    ProxUnboundedError,
)
from .extreal import ExtendedReal
from .funcspace import FunctionHandle, SubgradientPair
from .gridutil import ball_points, box_grid, in_box, sphere_directions


@dataclass(frozen=True)
class ProxConfig:
    grid_points: int = 401  # per axis; dimension 2 defaults to 101 unless set
    refine_step_tol: float = 1e-10
    multistart_window: float = 1e-6  # grid minima within this of the best start refinement
    dedupe_frac: float = 1e-5  # of search box diameter
    value_window: float = 1e-8  # refined minimizers within this count as ties
    trust_radius: Optional[float] = None
    max_expansions: int = 4
    collect_local: bool = False  # also refine every strict grid-local minimum
    local_scan_radius: Optional[float] = None  # extra fine scan around z for locals

    def points_for(self, dim: int) -> int:
        if self.trust_radius is None and self.grid_points == 401 and dim >= 2:
            return 101
        return self.grid_points


DEFAULT_PROX = ProxConfig()


@dataclass(frozen=True)
class ProxResult:
    minimizers: np.ndarray  # (k, dim), lexicographically sorted
    value: float
    certificate: dict
    local_minimizers: Optional[np.ndarray] = None  # (m, dim) incl. non-global, if collected
    local_values: Optional[np.ndarray] = None

    @property
    def multivalued(self) -> bool:
        return self.minimizers.shape[0] > 1

    @property
    def point(self) -> np.ndarray:
        return self.minimizers[0]


def default_lambda(f: FunctionHandle) -> float:
    """min(0.5 / r, 0.1) with r the declared prox-regularity level, capped
    below the prox-boundedness threshold."""
    r = f.prox_regularity
    lam = 0.1 if r <= 0.0 else min(0.5 / r, 0.1)
    if np.isfinite(f.prox_bound_threshold):
        lam = min(lam, 0.45 * f.prox_bound_threshold)
    if lam <= 0.0:
        raise ProxUnboundedError(
            f"{f.name}: no positive lambda sits below the prox-boundedness "
            f"threshold {f.prox_bound_threshold}"
        )
    return lam


def _objective(f: FunctionHandle, lam: float, z: np.ndarray):
    def g(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        quad = ((pts - z) ** 2).sum(axis=-1) / (2.0 * lam)
        return f(pts) + quad

    return g


def _compass_refine(g, start: np.ndarray, step: float, lo: np.ndarray, hi: np.ndarray, tol: float):
    """Compass search with axis and (in 2D) diagonal moves; returns (point, value, evals)."""
    dim = start.shape[0]
    dirs = [np.eye(dim)[i] * s for i in range(dim) for s in (+1.0, -1.0)]
    if dim == 2:
        r2 = 1.0 / np.sqrt(2.0)
        dirs += [np.array([a, b]) * r2 for a in (+1.0, -1.0) for b in (+1.0, -1.0)]
    u = start.copy()
    gu = float(g(u[None, :])[0])
    evals = 1
    while step > tol:
        moved = False
        for d in dirs:
            trial = np.clip(u + step * d, lo, hi)
            gt = float(g(trial[None, :])[0])
            evals += 1
            if gt < gu:
                u, gu = trial, gt
                moved = True
        if not moved:
            step *= 0.5
    return u, gu, evals


def _grid_local_minima(vals: np.ndarray, shape: tuple) -> np.ndarray:
    """Boolean mask of grid-local minima (<= all axis/diagonal neighbors)."""
    v = vals.reshape(shape)
    ok = np.ones(shape, dtype=bool)
    dim = len(shape)
    shifts = []
    if dim == 1:
        shifts = [(1,), (-1,)]
    else:
        shifts = [(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1) if (a, b) != (0, 0)]
    for sh in shifts:
        shifted = v
        for ax, s in enumerate(sh):
            if s != 0:
                shifted = np.roll(shifted, s, axis=ax)
        # roll wraps around; mask the wrapped border per axis
        border = np.zeros(shape, dtype=bool)
        for ax, s in enumerate(sh):
            if s == 1:
                idx = [slice(None)] * dim
                idx[ax] = 0
                border[tuple(idx)] = True
            elif s == -1:
                idx = [slice(None)] * dim
                idx[ax] = -1
                border[tuple(idx)] = True
        ok &= border | (v <= shifted)
    return ok.ravel()


def prox(f: FunctionHandle, lam: float, z, config: ProxConfig = DEFAULT_PROX) -> ProxResult:
    """All near-global proximal points of f at z for parameter lam.

    Grid scan over a trust box intersected with the domain box, expanded
    while the minimum sits on an expandable boundary; compass refinement
    from every grid minimum within the multistart window; dedup at a
    fraction of the box diameter.  Raises ProxUnboundedError when the
    objective keeps decreasing at the domain boundary.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    if lam >= f.prox_bound_threshold:
        raise ProxUnboundedError(
            f"{f.name}: lambda {lam} is at or above the prox-boundedness threshold "
            f"{f.prox_bound_threshold}"
        )
    g = _objective(f, lam, z)
    radius = config.trust_radius or max(1.0, 4.0 * np.sqrt(lam))
    npts = config.points_for(f.dim)
    box = f.domain_box

    expansions = 0
    while True:
        lo = np.maximum(z - radius, box[:, 0])
        hi = np.minimum(z + radius, box[:, 1])
        pts = box_grid(lo, hi, npts)
        vals = g(pts)
        if not np.isfinite(vals).any():
            raise ImproperOnBoxError(f"{f.name}: proximal objective is +inf on the search box")
        imin = int(np.nanargmin(vals))
        shape = (npts,) * f.dim
        on_inner_boundary = False
        at_domain_edge = True
        idx = np.unravel_index(imin, shape)
        for ax, i in enumerate(idx):
            if i in (0, npts - 1):
                edge = lo[ax] if i == 0 else hi[ax]
                if abs(edge - box[ax, 0]) > 1e-12 and abs(edge - box[ax, 1]) > 1e-12:
                    on_inner_boundary = True
        if not on_inner_boundary:
            break
        if expansions >= config.max_expansions:
            break
        radius *= 2.0
        expansions += 1

    # boundary trend at the domain edge: decreasing outermost layers => unbounded
    vgrid = vals.reshape(shape)
    for ax, i in enumerate(idx):
        if i in (0, npts - 1):
            take = [slice(None)] * f.dim
            order = (0, 1, 2) if i == 0 else (-1, -2, -3)
            layer_mins = []
            for o in order:
                take[ax] = o
                layer_mins.append(float(np.min(vgrid[tuple(take)])))
            if layer_mins[0] < layer_mins[1] < layer_mins[2]:
                raise ProxUnboundedError(
                    f"{f.name}: proximal objective decreases toward the domain boundary "
                    f"(lambda={lam}, z={z.tolist()})"
                )

    best_grid = float(vals[imin])
    spacing = float(np.max((hi - lo) / (npts - 1)))
    start_mask = vals <= best_grid + config.multistart_window * max(1.0, abs(best_grid))
    starts = pts[start_mask]
    # cap pathological plateaus (e.g. indicator interiors) deterministically
    if starts.shape[0] > 64:
        order = np.argsort(vals[start_mask], kind="stable")
        starts = starts[order[:64]]
    if f.prox is not None:
        try:
            starts = np.vstack([starts, np.atleast_1d(f.prox(lam, z))])
        except ProxUnboundedError:
            raise
    refined = []
    evals = 0
    for s in starts:
        u, gu, ev = _compass_refine(g, s, spacing, lo, hi, config.refine_step_tol)
        evals += ev
        refined.append((u, gu))
    best = min(r[1] for r in refined)
    dedupe = config.dedupe_frac * float(np.linalg.norm(hi - lo))
    minimizers = []
    for u, gu in sorted(refined, key=lambda r: tuple(r[0])):
        if gu > best + config.value_window * max(1.0, abs(best)):
            continue
        if not any(np.linalg.norm(u - m) < dedupe for m in minimizers):
            minimizers.append(u)
    minimizers = np.array(sorted(map(tuple, minimizers)))

    local_minimizers = None
    local_values = None
    if config.collect_local:
        pools = [(pts, vals, shape, spacing)]
        if config.local_scan_radius is not None:
            # basins at the scale of interest can be narrower than the coarse
            # grid step; rescan a small box around z at full resolution
            flo = np.maximum(z - config.local_scan_radius, lo)
            fhi = np.minimum(z + config.local_scan_radius, hi)
            if np.all(fhi > flo):
                fpts = box_grid(flo, fhi, npts)
                fvals = g(fpts)
                fspacing = float(np.max((fhi - flo) / (npts - 1)))
                pools.append((fpts, fvals, shape, fspacing))
        seen: list = []
        lvals: list = []
        for ppts, pvals, pshape, pspacing in pools:
            lm_mask = _grid_local_minima(pvals, pshape) & np.isfinite(pvals)
            lpts = ppts[lm_mask]
            if lpts.shape[0] > 128:
                order = np.argsort(pvals[lm_mask], kind="stable")
                lpts = lpts[order[:128]]
            for s in lpts:
                u, gu, ev = _compass_refine(g, s, pspacing / 4.0, lo, hi, config.refine_step_tol)
                evals += ev
                if not any(np.linalg.norm(u - m) < dedupe for m in seen):
                    seen.append(u)
                    lvals.append(gu)
        local_minimizers = np.array(seen) if seen else np.zeros((0, f.dim))
        local_values = np.array(lvals) if lvals else np.zeros(0)

    certificate = {
        "grid_points": npts,
        "spacing": spacing,
        "expansions": expansions,
        "n_starts": int(starts.shape[0]),
        "refine_evals": evals,
        "search_lo": lo.tolist(),
        "search_hi": hi.tolist(),
    }
    return ProxResult(
        minimizers=minimizers,
        value=best,
        certificate=certificate,
        local_minimizers=local_minimizers,
        local_values=local_values,
    )


def envelope(f: FunctionHandle, lam: float, z, config: ProxConfig = DEFAULT_PROX) -> ExtendedReal:
    """Moreau envelope value; uses the closed-form proximal oracle when present."""
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    if f.prox is not None:
        u = np.atleast_1d(f.prox(lam, z))
        val = float(f(u) + ((u - z) ** 2).sum() / (2.0 * lam))
        return ExtendedReal(val)
    return ExtendedReal(prox(f, lam, z, config).value)


def envelope_gradient(
    f: FunctionHandle, lam: float, z, config: ProxConfig = DEFAULT_PROX
) -> np.ndarray:
    """(z - P(z)) / lam; raises NonDifferentiablePointError when P is multivalued."""
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    res = prox(f, lam, z, config)
    if res.multivalued:
        raise NonDifferentiablePointError(
            f"{f.name}: proximal map is multivalued at z={z.tolist()} "
            f"({res.minimizers.shape[0]} minimizers)"
        )
    return (z - res.point) / lam


@dataclass(frozen=True)
class PathResult:
    pairs: list  # of SubgradientPair
    skipped: list  # of (z, reason)
    gaps: np.ndarray  # graph+value distance to the anchor per kept step


def approach_sequence(anchor: SubgradientPair, lam: float, direction, count: int = 10, r0: float = 0.25) -> np.ndarray:
    """Geometric z-sequence approaching the envelope base point x + lam v."""
    d = np.atleast_1d(np.asarray(direction, dtype=np.float64))
    d = d / np.linalg.norm(d)
    zbar = anchor.x + lam * anchor.v
    radii = r0 * 0.5 ** np.arange(count)
    return zbar[None, :] + radii[:, None] * d[None, :]


def attentive_path(
    f: FunctionHandle,
    anchor: SubgradientPair,
    lam: float,
    z_seq: np.ndarray,
    config: ProxConfig = DEFAULT_PROX,
    divergence_tol: float = 0.5,
) -> PathResult:
    """Recover subgradient pairs (P(z), (z - P(z))/lam, f(P(z))) along z_seq.

    Multivalued steps are skipped with a record.  The tail must approach
    the anchor in graph distance and function value, else
    AttentivePathDivergenceError is raised.
    """
    pairs = []
    skipped = []
    gaps = []
    for z in np.atleast_2d(np.asarray(z_seq, dtype=np.float64)):
        try:
            res = prox(f, lam, z, config)
        except ProxUnboundedError as exc:
            skipped.append((z, f"prox-unbounded: {exc}"))
            continue
        if res.multivalued:
            skipped.append((z, "multivalued proximal point"))
            continue
        x = res.point
        v = (z - x) / lam
        fx = float(f(x))
        pairs.append(SubgradientPair(x, v, fx))
        gaps.append(
            np.linalg.norm(x - anchor.x) + np.linalg.norm(v - anchor.v) + abs(fx - anchor.fx)
        )
    gaps = np.asarray(gaps)
    if gaps.size >= 3:
        tail = gaps[-max(2, gaps.size // 4) :]
        head = gaps[: max(2, gaps.size // 4)]
        if tail.min() > divergence_tol or tail.min() > head.min() + divergence_tol:
            raise AttentivePathDivergenceError(
                f"{f.name}: path tail stalls at graph distance {tail.min():.3g} from the anchor"
            )
    return PathResult(pairs=pairs, skipped=skipped, gaps=gaps)


def prox_bounded_probe(f: FunctionHandle, lam: Optional[float] = None, x0=None, shells: int = 12) -> bool:
    """Shell-trend test of quadratic minorization.

    For a given lam, samples shell minima of f + ||. - x0||^2 / (2 lam)
    out to the domain boundary and reports False when they keep
    decreasing at the edge.  With lam omitted, tries a decreasing trial
    schedule and reports whether any lam works.
    """
    if lam is None:
        return any(
            prox_bounded_probe(f, trial, x0, shells)
            for trial in (1.0, 0.5, 0.25, 0.1, 0.05)
        )
    x0 = (
        np.zeros(f.dim)
        if x0 is None
        else np.atleast_1d(np.asarray(x0, dtype=np.float64))
    )
    g = _objective(f, lam, x0)
    edge = float(np.min(np.minimum(x0 - f.domain_box[:, 0], f.domain_box[:, 1] - x0)))
    radii = np.geomspace(0.25, max(0.5, 0.95 * edge), shells)
    dirs = sphere_directions(f.dim, 2 if f.dim == 1 else 32)
    mins = []
    for r in radii:
        pts = x0[None, :] + r * dirs
        keep = np.array([in_box(p, f.domain_box) for p in pts])
        if not keep.any():
            break
        vals = g(pts[keep])
        mins.append(float(np.min(vals)))
    mins = np.asarray(mins)
    if mins.size < 3:
        return True
    decreasing_tail = mins[-1] < mins[-2] < mins[-3]
    return not (decreasing_tail and mins[-1] <= float(np.min(mins)) + 1e-12)


def c11_probe(
    f: FunctionHandle,
    lam: float,
    center,
    radius: float = 0.25,
    count: int = 48,
    config: ProxConfig = DEFAULT_PROX,
) -> float:
    """Empirical Lipschitz constant of the envelope gradient on a ball.

    Points with multivalued proximal maps are excluded from the sample.
    """
    center = np.atleast_1d(np.asarray(center, dtype=np.float64))
    pts = np.vstack([center[None, :], ball_points(center, radius, count)])
    zs, gs = [], []
    for p in pts:
        try:
            gs.append(envelope_gradient(f, lam, p, config))
            zs.append(p)
        except NonDifferentiablePointError:
            continue
    return pairwise_lipschitz(np.asarray(zs), np.asarray(gs))


def envelope_handle(f: FunctionHandle, lam: float, name: Optional[str] = None) -> FunctionHandle:
    """Handle for e_lam f with values and gradients computed through prox.

    The result is C^{1,1} on the interior of the shrunken domain box when
    f is prox-regular along the sampled region.
    """
    # keep query points far enough inside that the proximal point cannot
    # leave the domain box, but never shrink a box away entirely
    widths = f.domain_box[:, 1] - f.domain_box[:, 0]
    margin = np.minimum(max(1.0, 4.0 * np.sqrt(lam)), 0.25 * widths)
    box = np.column_stack([f.domain_box[:, 0] + margin, f.domain_box[:, 1] - margin])
    if np.any(box[:, 0] >= box[:, 1]):
        raise ValueError("domain box too small to host an envelope handle")

    def value(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        flat = pts.reshape(-1, f.dim)
        out = np.array([float(envelope(f, lam, p)) for p in flat])
        return out.reshape(pts.shape[:-1])

    def gradient(x: np.ndarray):
        try:
            return envelope_gradient(f, lam, x)
        except NonDifferentiablePointError:
            return None

    return FunctionHandle(
        name=name or f"env({f.name},{lam})",
        dim=f.dim,
        value=value,
        domain_box=box,
        gradient=gradient,
        hessian=None,
        prox=None,
        pairs_near=None,
        prox_regularity=0.0,
        c11=True,
        convex=f.convex,
        params={**f.params, "envelope_lambda": lam},
    )
