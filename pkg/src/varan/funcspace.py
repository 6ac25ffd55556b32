"""Function handles, subgradient pairs, and attentive localizations.

A FunctionHandle wraps a proper extended-real-valued function on R^n
through a vectorized value oracle together with optional closed-form
oracles (gradient, Hessian, proximal map, subgradient-pair sampler).
Handles never evaluate outside their domain box; grid generators are
responsible for clipping.

A SubgradientPair (x, v, f(x)) records a point of the subdifferential
graph together with the function value, which is what f-attentive
localizations filter on.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import AnchorInfeasibleError
from .extreal import ExtendedReal
from .gridutil import ball_points, in_box, radius_ladder, sphere_directions

#### types ####


def _as_point(x) -> np.ndarray:
    a = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if a.ndim != 1:
        raise ValueError(f"point must be one-dimensional, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class SubgradientPair:
    """A subdifferential-graph sample (x, v) with its function value."""

    x: np.ndarray
    v: np.ndarray
    fx: float

    def __post_init__(self):
        object.__setattr__(self, "x", _as_point(self.x))
        object.__setattr__(self, "v", _as_point(self.v))
        object.__setattr__(self, "fx", float(self.fx))
        if self.x.shape != self.v.shape:
            raise ValueError("x and v must share a shape")
        if not np.isfinite(self.fx):
            raise ValueError("pair value must be finite (x must lie in dom f)")


@dataclass(frozen=True)
class Localization:
    """f-attentive epsilon-localization of the subgradient graph at an anchor."""

    anchor: SubgradientPair
    epsilon: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class AnchorSpec:
    """Declared analysis anchor of a corpus entry with known moduli."""

    x: np.ndarray
    v: np.ndarray
    s_declared: Optional[float] = None  # variational convexity modulus, if known
    kappa_declared: Optional[float] = None  # tilt modulus, if known
    ball_radius: float = 0.35  # neighborhood U used for sampled inequalities
    epsilon: float = 0.5  # localization budget epsilon_0

    def __post_init__(self):
        object.__setattr__(self, "x", _as_point(self.x))
        object.__setattr__(self, "v", _as_point(self.v))


@dataclass(frozen=True)
class FunctionHandle:
    """Vectorized handle for a proper lsc function on R^n.

    value: maps arrays of shape (..., dim) to values of shape (...),
        with +inf allowed (and -inf forbidden).
    gradient / hessian: pointwise oracles defined off the nonsmooth set;
        return None where undefined.
    prox: closed-form proximal map (lam, z) -> point, or None.
    pairs_near: closed-form subgradient-pair sampler around an anchor
        pair; signature (anchor, radius, count) -> list[SubgradientPair].
    prox_regularity: declared prox-regularity level r >= 0.
    prox_bound_threshold: largest lambda with a finite Moreau envelope
        (np.inf when the function is minorized by a convex quadratic).
    """

    name: str
    dim: int
    value: Callable[[np.ndarray], np.ndarray]
    domain_box: np.ndarray
    gradient: Optional[Callable[[np.ndarray], Optional[np.ndarray]]] = None
    hessian: Optional[Callable[[np.ndarray], Optional[np.ndarray]]] = None
    prox: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    pairs_near: Optional[Callable[[SubgradientPair, float, int], list]] = None
    prox_regularity: float = 0.0
    prox_bound_threshold: float = np.inf
    c11: bool = False  # gradient globally Lipschitz on the domain box
    convex: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        box = np.asarray(self.domain_box, dtype=np.float64).reshape(self.dim, 2)
        object.__setattr__(self, "domain_box", box)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.value(np.asarray(points, dtype=np.float64)), dtype=np.float64)

    def value_at(self, x) -> ExtendedReal:
        return ExtendedReal(float(self(np.asarray(x, dtype=np.float64))))

    def finite_at(self, x) -> bool:
        return bool(np.isfinite(self(np.asarray(x, dtype=np.float64))))

    def grad_at(self, x) -> Optional[np.ndarray]:
        if self.gradient is None:
            return None
        g = self.gradient(_as_point(x))
        return None if g is None else np.asarray(g, dtype=np.float64)

    def hess_at(self, x) -> Optional[np.ndarray]:
        if self.hessian is None:
            return None
        h = self.hessian(_as_point(x))
        return None if h is None else np.asarray(h, dtype=np.float64)

    def anchor_value(self, x) -> float:
        fx = float(self(np.asarray(x, dtype=np.float64)))
        if not np.isfinite(fx):
            raise AnchorInfeasibleError(f"{self.name}: anchor {x} lies outside dom f")
        return fx


#### operations ####


def attentive_member(loc: Localization, pair: SubgradientPair) -> bool:
    """Strict membership test in the f-attentive localization.

    Requires ||x - xbar|| < eps, ||v - vbar|| < eps and f(x) < f(xbar) + eps.
    Monotone in eps by construction.
    """
    a = loc.anchor
    eps = loc.epsilon
    return bool(
        np.linalg.norm(pair.x - a.x) < eps
        and np.linalg.norm(pair.v - a.v) < eps
        and pair.fx < a.fx + eps
    )


def slack(t: np.ndarray, scale: float = 10.0) -> np.ndarray:
    """Sublinear slack schedule o(t) = scale * t**1.5 used by sampled
    first-order inequalities."""
    return scale * np.asarray(t, dtype=np.float64) ** 1.5


def lsc_probe(
    f: FunctionHandle,
    x,
    radius: float = 0.25,
    levels: int = 10,
    directions: int = 16,
    tolerance: float = 1e-9,
) -> bool:
    """Sampled lower semicontinuity test at x.

    Approximates liminf f over sequences x_k -> x by tail minima along
    shrinking shells and accepts iff every directional tail stays above
    f(x) - tolerance.
    """
    x = _as_point(x)
    fx = float(f(x))
    if not np.isfinite(fx):
        return True  # +inf values are vacuously lsc at capped sampling
    dirs = sphere_directions(f.dim, directions)
    radii = radius_ladder(radius, levels)
    pts = x[None, None, :] + radii[:, None, None] * dirs[None, :, :]
    vals = f(pts.reshape(-1, f.dim)).reshape(levels, -1)
    # liminf along each direction: running minimum over ever-deeper shells.
    # A continuous dip has a deficit that decays with the shell radius; a
    # genuine jump keeps a constant deficit all the way down.
    tail = vals[levels // 2 :, :]
    tailmin = np.minimum.accumulate(tail[::-1, :], axis=0)[::-1, :]
    deficit = fx - tailmin  # nonincreasing down the ladder
    converged = deficit[-1] <= tolerance
    decaying = deficit[-1] <= 0.5 * np.maximum(deficit[0], tolerance)
    return bool(np.all(converged | decaying))


def check_subgradient_pair(
    f: FunctionHandle,
    pair: SubgradientPair,
    radius: float = 0.1,
    count: int = 64,
    slack_scale: float = 10.0,
    tolerance: float = 1e-9,
) -> bool:
    """Approximate regular-subgradient inequality with sublinear slack.

    Verifies f(x') >= f(x) + <v, x' - x> - slack(||x' - x||) on sampled
    x' near x (clipped to the domain box).
    """
    pts = ball_points(pair.x, radius, count)
    keep = np.array([in_box(p, f.domain_box) for p in pts])
    pts = pts[keep]
    if pts.shape[0] == 0:
        return True
    vals = f(pts)
    d = pts - pair.x[None, :]
    dist = np.linalg.norm(d, axis=1)
    lower = pair.fx + d @ pair.v - slack(dist, slack_scale) - tolerance
    return bool(np.all(vals >= lower))


def graph_distance(p: SubgradientPair, q: SubgradientPair) -> float:
    """Distance between graph samples in x and v jointly."""
    return float(np.linalg.norm(p.x - q.x) + np.linalg.norm(p.v - q.v))


def add_quadratic(f: FunctionHandle, H: np.ndarray, name: Optional[str] = None) -> FunctionHandle:
    """Handle for g(x) = f(x) + 0.5 <x, Hx> with oracles shifted accordingly.

    The subgradient graph tilts by Hx, so closed-form pair samplers
    carry over; the proximal map generally does not and is dropped.
    """
    H = np.asarray(H, dtype=np.float64).reshape(f.dim, f.dim)
    Hs = 0.5 * (H + H.T)

    def value(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        quad = 0.5 * np.einsum("...i,ij,...j->...", pts, Hs, pts)
        return f.value(pts) + quad

    def gradient(x: np.ndarray):
        g = f.grad_at(x)
        return None if g is None else g + Hs @ x

    def hessian(x: np.ndarray):
        h = f.hess_at(x)
        return None if h is None else h + Hs

    pairs_near = None
    if f.pairs_near is not None:
        base_sampler = f.pairs_near

        def pairs_near(anchor: SubgradientPair, radius: float, count: int):
            # recover the base anchor by removing the tilt
            bx = anchor.x
            base_anchor = SubgradientPair(bx, anchor.v - Hs @ bx, float(f(bx)))
            out = []
            for p in base_sampler(base_anchor, radius, count):
                quad = 0.5 * float(p.x @ (Hs @ p.x))
                out.append(SubgradientPair(p.x, p.v + Hs @ p.x, p.fx + quad))
            return out

    eigs = np.linalg.eigvalsh(Hs)
    new_r = max(0.0, f.prox_regularity - float(eigs.min()))
    return FunctionHandle(
        name=name or f"{f.name}+quad",
        dim=f.dim,
        value=value,
        domain_box=f.domain_box,
        gradient=gradient if f.gradient is not None else None,
        hessian=hessian if f.hessian is not None else None,
        prox=None,
        pairs_near=pairs_near,
        prox_regularity=new_r,
        prox_bound_threshold=f.prox_bound_threshold,
        c11=f.c11,
        convex=f.convex and bool(eigs.min() >= 0.0),
        params={**f.params, "tilt_H": Hs.tolist()},
    )
