"""Built-in test-function corpus.

Every entry ships a vectorized value oracle, whatever closed-form
gradient/Hessian/prox oracles exist, a closed-form subgradient-pair
sampler near its declared anchors, and declared moduli used by the
certification suites.  Negative controls (not lsc, not prox-bounded)
are registered alongside the regular entries.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ProxUnboundedError, RegistryError
from .funcspace import AnchorSpec, FunctionHandle, SubgradientPair
from .gridutil import sphere_directions


@dataclass(frozen=True)
class CorpusEntry:
    handle: FunctionHandle
    anchors: tuple
    description: str
    negative: bool = False  # negative control (fails lsc or prox-boundedness)
    tags: tuple = ()


#### shared sampler helpers ####

_LADDER = np.geomspace(1.0, 1.0 / 256.0, 12)


def _dedupe_pairs(pairs: list, tol: float = 1e-12) -> list:
    out = []
    for p in pairs:
        if not any(
            np.linalg.norm(p.x - q.x) < tol and np.linalg.norm(p.v - q.v) < tol for q in out
        ):
            out.append(p)
    return out


def _filter_near(pairs: list, anchor: SubgradientPair, radius: float) -> list:
    kept = [
        p
        for p in pairs
        if np.linalg.norm(p.x - anchor.x) <= radius and np.linalg.norm(p.v - anchor.v) <= radius
    ]
    return _dedupe_pairs(kept)


def _smooth_pair_sampler(value_fn, grad_fn, dim: int, avoid=None):
    """Sampler for entries whose subgradient graph is (x, grad f(x)) off a
    known nonsmooth set; `avoid(x) -> bool` masks that set."""

    def pairs_near(anchor: SubgradientPair, radius: float, count: int):
        dirs = sphere_directions(dim, 2 if dim == 1 else 16)
        offsets = (radius * _LADDER)[:, None, None] * dirs[None, :, :]
        xs = anchor.x[None, None, :] + offsets
        xs = xs.reshape(-1, dim)
        out = []
        for x in xs:
            if avoid is not None and avoid(x):
                continue
            g = grad_fn(x)
            if g is None:
                continue
            out.append(SubgradientPair(x, g, float(value_fn(x))))
        return _filter_near(out, anchor, radius)[:count]

    return pairs_near


#### entry builders ####


def _build_paper_example() -> CorpusEntry:
    # One-dimensional jump function: x^2 on [0, inf), constant 1 on (-inf, 0).
    # Variationally 2-convex at (0, 0) yet not subdifferentially continuous
    # there: the plateau pairs (x, 0), x < 0, carry value 1.
    def value(pts):
        x = np.asarray(pts)[..., 0]
        return np.where(x >= 0.0, x * x, 1.0)

    def gradient(x):
        if x[0] > 0.0:
            return np.array([2.0 * x[0]])
        if x[0] < 0.0:
            return np.array([0.0])
        return None

    def hessian(x):
        if x[0] > 0.0:
            return np.array([[2.0]])
        if x[0] < 0.0:
            return np.array([[0.0]])
        return None

    def prox(lam, z):
        z0 = float(z[0])
        if z0 >= 0.0:
            return np.array([z0 / (1.0 + 2.0 * lam)])
        # compare u = 0 (value z^2 / 2 lam) against staying put (value 1)
        if z0 * z0 / (2.0 * lam) <= 1.0:
            return np.array([0.0])
        return np.array([z0])

    def pairs_near(anchor: SubgradientPair, radius: float, count: int):
        t = radius * _LADDER
        cands = []
        right = np.unique(np.abs(np.concatenate([t / 2.0, anchor.x[0] + t / 2.0, anchor.x[0] - t / 2.0])))
        for x in right[right > 0.0]:
            cands.append(SubgradientPair([x], [2.0 * x], x * x))
        for x in t:
            cands.append(SubgradientPair([-x], [0.0], 1.0))
        for v in t:
            cands.append(SubgradientPair([0.0], [-v], 0.0))
        return _filter_near(cands, anchor, radius)[:count]

    h = FunctionHandle(
        name="paper_example",
        dim=1,
        value=value,
        domain_box=[[-4.0, 4.0]],
        gradient=gradient,
        hessian=hessian,
        prox=prox,
        pairs_near=pairs_near,
        prox_regularity=0.0,
        convex=False,
    )
    anchors = (
        AnchorSpec(x=[0.0], v=[0.0], s_declared=2.0, kappa_declared=0.5, ball_radius=0.35, epsilon=0.5),
    )
    return CorpusEntry(
        handle=h,
        anchors=anchors,
        description="quadratic on the right half-line, constant 1 on the left; "
        "strongly variationally convex at the origin without subdifferential continuity",
        tags=("prox-regular", "nonsmooth"),
    )


def _build_abs(dim: int = 1) -> CorpusEntry:
    if dim < 1:
        raise RegistryError("abs: dim must be >= 1")

    def value(pts):
        return np.abs(np.asarray(pts)).sum(axis=-1)

    def gradient(x):
        if np.all(np.abs(x) > 0.0):
            return np.sign(x)
        return None

    def hessian(x):
        if np.all(np.abs(x) > 0.0):
            return np.zeros((dim, dim))
        return None

    def prox(lam, z):
        return np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)

    def pairs_near(anchor: SubgradientPair, radius: float, count: int):
        cands = []
        dirs = sphere_directions(dim, 2 if dim == 1 else 16)
        for t in radius * _LADDER:
            for d in dirs:
                v = np.clip(anchor.v + t * d, -0.999, 0.999)
                cands.append(SubgradientPair(np.zeros(dim), v, 0.0))
                x = t * d
                if np.all(np.abs(x) > 0.0):
                    cands.append(SubgradientPair(x, np.sign(x), float(np.abs(x).sum())))
        return _filter_near(cands, anchor, radius)[:count]

    h = FunctionHandle(
        name="abs",
        dim=dim,
        value=value,
        domain_box=[[-4.0, 4.0]] * dim,
        gradient=gradient,
        hessian=hessian,
        prox=prox,
        pairs_near=pairs_near,
        convex=True,
        params={"dim": dim},
    )
    anchors = (
        AnchorSpec(x=[0.0] * dim, v=[0.0] * dim, s_declared=None, kappa_declared=0.0, ball_radius=0.35, epsilon=0.5),
    )
    return CorpusEntry(
        handle=h,
        anchors=anchors,
        description="l1 norm; kink at the origin, tilt-stable with vanishing modulus",
        tags=("convex", "nonsmooth"),
    )


def _build_quad_s(s: float = 2.0, dim: int = 1) -> CorpusEntry:
    s = float(s)

    def value(pts):
        pts = np.asarray(pts)
        return 0.5 * s * (pts * pts).sum(axis=-1)

    def gradient(x):
        return s * x

    def hessian(x):
        return s * np.eye(dim)

    threshold = np.inf if s >= 0.0 else 1.0 / (-s)

    def prox(lam, z):
        if 1.0 + lam * s <= 1e-14:
            raise ProxUnboundedError(f"quad_s: lambda {lam} >= 1/{-s}")
        return z / (1.0 + lam * s)

    def pairs_near(anchor: SubgradientPair, radius: float, count: int):
        cap = radius / max(1.0, abs(s))
        dirs = sphere_directions(dim, 2 if dim == 1 else 16)
        cands = []
        for t in cap * _LADDER:
            for d in dirs:
                x = anchor.x + t * d
                cands.append(SubgradientPair(x, s * x, float(value(x))))
        return _filter_near(cands, anchor, radius)[:count]

    h = FunctionHandle(
        name="quad_s",
        dim=dim,
        value=value,
        domain_box=[[-20.0, 20.0]] * dim,
        gradient=gradient,
        hessian=hessian,
        prox=prox,
        pairs_near=pairs_near,
        prox_regularity=max(0.0, -s),
        prox_bound_threshold=threshold,
        c11=True,
        convex=s >= 0.0,
        params={"s": s, "dim": dim},
    )
    anchors = (
        AnchorSpec(
            x=[0.0] * dim,
            v=[0.0] * dim,
            s_declared=s,
            kappa_declared=(1.0 / s) if s > 0 else None,
            ball_radius=0.5,
            epsilon=0.5,
        ),
    )
    return CorpusEntry(
        handle=h,
        anchors=anchors,
        description=f"(s/2)|x|^2 with s={s}; exact modulus calibration entry",
        tags=("smooth",),
    )


def _build_huber(delta: float = 1.0) -> CorpusEntry:
    delta = float(delta)
    if delta <= 0:
        raise RegistryError("huber: delta must be positive")

    # Moreau envelope of the absolute value at parameter delta.
    def value(pts):
        x = np.asarray(pts)[..., 0]
        ax = np.abs(x)
        return np.where(ax <= delta, x * x / (2.0 * delta), ax - delta / 2.0)

    def gradient(x):
        return np.clip(x / delta, -1.0, 1.0)

    def hessian(x):
        ax = abs(float(x[0]))
        if abs(ax - delta) < 1e-12:
            return None
        return np.array([[1.0 / delta if ax < delta else 0.0]])

    def prox(lam, z):
        z0 = float(z[0])
        if abs(z0) <= delta + lam:
            return np.array([z0 * delta / (delta + lam)])
        return np.array([z0 - lam * np.sign(z0)])

    pairs_near = _smooth_pair_sampler(lambda x: value(x[None, :])[0], lambda x: np.clip(x / delta, -1, 1), 1)

    h = FunctionHandle(
        name="huber",
        dim=1,
        value=value,
        domain_box=[[-6.0, 6.0]],
        gradient=gradient,
        hessian=hessian,
        prox=prox,
        pairs_near=pairs_near,
        c11=True,
        convex=True,
        params={"delta": delta},
    )
    anchors = (
        AnchorSpec(x=[0.0], v=[0.0], s_declared=1.0 / delta, kappa_declared=delta, ball_radius=min(0.4, 0.8 * delta), epsilon=min(0.4, 0.8 * delta)),
        AnchorSpec(x=[delta], v=[1.0], s_declared=None, kappa_declared=None, ball_radius=0.4 * delta, epsilon=0.4 * delta),
    )
    return CorpusEntry(
        handle=h,
        anchors=anchors,
        description=f"Huber function with knee {delta} (envelope of the absolute value)",
        tags=("c11", "convex"),
    )


def _build_halfsquare() -> CorpusEntry:
    def value(pts):
        x = np.asarray(pts)[..., 0]
        r = np.maximum(x, 0.0)
        return 0.5 * r * r

    def gradient(x):
        return np.maximum(x, 0.0)

    def hessian(x):
        if abs(float(x[0])) < 1e-12:
            return None
        return np.array([[1.0 if x[0] > 0 else 0.0]])

    def prox(lam, z):
        z0 = float(z[0])
        return np.array([z0 / (1.0 + lam) if z0 >= 0.0 else z0])

    pairs_near = _smooth_pair_sampler(
        lambda x: 0.5 * max(x[0], 0.0) ** 2, lambda x: np.maximum(x, 0.0), 1
    )

    h = FunctionHandle(
        name="halfsquare",
        dim=1,
        value=value,
        domain_box=[[-6.0, 6.0]],
        gradient=gradient,
        hessian=hessian,
        prox=prox,
        pairs_near=pairs_near,
        c11=True,
        convex=True,
    )
    anchors = (
        AnchorSpec(x=[0.0], v=[0.0], s_declared=0.0, kappa_declared=None, ball_radius=0.4, epsilon=0.5),
    )
    return CorpusEntry(
        handle=h,
        anchors=anchors,
        description="0.5 * max(x, 0)^2; C^{1,1} with Hessian jump {0, 1} at the origin",
        tags=("c11", "convex"),
    )


def _build_indicator_box(lo: float = -1.0, hi: float = 1.0, dim: int = 1) -> CorpusEntry:
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise RegistryError("indicator_box: need lo < hi")

    def value(pts):
        pts = np.asarray(pts)
        inside = np.all((pts >= lo) & (pts <= hi), axis=-1)
        return np.where(inside, 0.0, np.inf)

    def gradient(x):
        if np.all((x > lo) & (x < hi)):
            return np.zeros(dim)
        return None

    def hessian(x):
        if np.all((x > lo) & (x < hi)):
            return np.zeros((dim, dim))
        return None

    def prox(lam, z):
        return np.clip(z, lo, hi)

    def pairs_near(anchor: SubgradientPair, radius: float, count: int):
        dirs = sphere_directions(dim, 2 if dim == 1 else 16)
        cands = []
        for t in radius * _LADDER:
            for d in dirs:
                x = np.clip(anchor.x + t * d, lo + 1e-9, hi - 1e-9)
                cands.append(SubgradientPair(x, np.zeros(dim), 0.0))
        return _filter_near(cands, anchor, radius)[:count]

    h = FunctionHandle(
        name="indicator_box",
        dim=dim,
        value=value,
        domain_box=[[lo - 1.0, hi + 1.0]] * dim,
        gradient=gradient,
        hessian=hessian,
        prox=prox,
        pairs_near=pairs_near,
        convex=True,
        params={"lo": lo, "hi": hi, "dim": dim},
    )
    mid = 0.5 * (lo + hi)
    anchors = (
        AnchorSpec(
            x=[mid] * dim,
            v=[0.0] * dim,
            s_declared=0.0,
            kappa_declared=None,
            ball_radius=min(0.4, 0.4 * (hi - lo)),
            epsilon=min(0.4, 0.4 * (hi - lo)),
        ),
    )
    return CorpusEntry(
        handle=h,
        anchors=anchors,
        description=f"indicator of the box [{lo}, {hi}]^{dim}",
        tags=("convex", "indicator"),
    )


def _build_weakly_convex(c: float = 1.0) -> CorpusEntry:
    c = float(c)
    if c <= 0:
        raise RegistryError("weakly_convex: c must be positive")

    # x^2 - c |x|: curvature 2 off the origin with a concave kink at 0.
    def value(pts):
        x = np.asarray(pts)[..., 0]
        return x * x - c * np.abs(x)

    def gradient(x):
        if abs(float(x[0])) < 1e-14:
            return None
        return 2.0 * x - c * np.sign(x)

    def hessian(x):
        if abs(float(x[0])) < 1e-14:
            return None
        return np.array([[2.0]])

    def prox(lam, z):
        z0 = float(z[0])
        cands = [(0.0, z0 * z0 / (2.0 * lam))]
        up = (z0 + lam * c) / (1.0 + 2.0 * lam)
        if up > 0.0:
            cands.append((up, up * up - c * up + (up - z0) ** 2 / (2.0 * lam)))
        un = (z0 - lam * c) / (1.0 + 2.0 * lam)
        if un < 0.0:
            cands.append((un, un * un + c * un + (un - z0) ** 2 / (2.0 * lam)))
        best = min(cands, key=lambda t: t[1])
        return np.array([best[0]])

    pairs_near = _smooth_pair_sampler(
        lambda x: x[0] * x[0] - c * abs(x[0]),
        lambda x: 2.0 * x - c * np.sign(x),
        1,
        avoid=lambda x: abs(x[0]) < 1e-14,
    )

    h = FunctionHandle(
        name="weakly_convex",
        dim=1,
        value=value,
        domain_box=[[-6.0, 6.0]],
        gradient=gradient,
        hessian=hessian,
        prox=prox,
        pairs_near=pairs_near,
        prox_regularity=0.0,
        convex=False,
        params={"c": c},
    )
    r = min(0.3, 0.3 * c)
    anchors = (
        AnchorSpec(x=[c / 2.0], v=[0.0], s_declared=2.0, kappa_declared=0.5, ball_radius=r, epsilon=r),
    )
    return CorpusEntry(
        handle=h,
        anchors=anchors,
        description=f"x^2 - {c}|x|; weakly convex, analyzed at its smooth minimizer x = {c / 2}",
        tags=("weakly-convex",),
    )


def _build_pwmax2d() -> CorpusEntry:
    # 0.5 ||x||^2 + max(x1, x2): strongly convex with a kink along the diagonal.
    def value(pts):
        pts = np.asarray(pts)
        return 0.5 * (pts * pts).sum(axis=-1) + np.max(pts, axis=-1)

    def gradient(x):
        if abs(x[0] - x[1]) < 1e-14:
            return None
        e = np.array([1.0, 0.0]) if x[0] > x[1] else np.array([0.0, 1.0])
        return x + e

    def hessian(x):
        if abs(x[0] - x[1]) < 1e-14:
            return None
        return np.eye(2)

    def prox(lam, z):
        z = np.asarray(z, dtype=np.float64)
        if z[0] - lam > z[1]:
            return (z - lam * np.array([1.0, 0.0])) / (1.0 + lam)
        if z[1] - lam > z[0]:
            return (z - lam * np.array([0.0, 1.0])) / (1.0 + lam)
        cc = (z[0] + z[1] - lam) / (2.0 * (1.0 + lam))
        return np.array([cc, cc])

    def pairs_near(anchor: SubgradientPair, radius: float, count: int):
        cands = []
        for t in radius * _LADDER:
            for cdiag in (t / 2.0, -t / 2.0, 0.0):
                x = np.array([cdiag, cdiag])
                for dtheta in (0.0, t / 2.0, -t / 2.0):
                    theta = 0.5 + dtheta
                    if not 0.0 < theta < 1.0:
                        continue
                    v = x + np.array([theta, 1.0 - theta])
                    cands.append(SubgradientPair(x, v, float(value(x))))
            d = t * np.array([1.0, -1.0]) / np.sqrt(2.0)
            for x in (anchor.x + d, anchor.x - d):
                if abs(x[0] - x[1]) > 1e-14:
                    e = np.array([1.0, 0.0]) if x[0] > x[1] else np.array([0.0, 1.0])
                    cands.append(SubgradientPair(x, x + e, float(value(x))))
        return _filter_near(cands, anchor, radius)[:count]

    h = FunctionHandle(
        name="pwmax2d",
        dim=2,
        value=value,
        domain_box=[[-4.0, 4.0], [-4.0, 4.0]],
        gradient=gradient,
        hessian=hessian,
        prox=prox,
        pairs_near=pairs_near,
        convex=True,
        params={},
    )
    anchors = (
        AnchorSpec(x=[0.0, 0.0], v=[0.5, 0.5], s_declared=1.0, kappa_declared=1.0, ball_radius=0.35, epsilon=0.5),
    )
    return CorpusEntry(
        handle=h,
        anchors=anchors,
        description="0.5||x||^2 + max(x1, x2) on R^2; diagonal kink, curvature restricted to the diagonal subspace at the anchor",
        tags=("convex", "2d"),
    )


def _build_huber_plus_quad() -> CorpusEntry:
    # huber(1) + x^2: C^{1,1}, strongly convex, curvature 3 near the origin.
    def value(pts):
        x = np.asarray(pts)[..., 0]
        ax = np.abs(x)
        hub = np.where(ax <= 1.0, 0.5 * x * x, ax - 0.5)
        return hub + x * x

    def gradient(x):
        return np.clip(x, -1.0, 1.0) + 2.0 * x

    def hessian(x):
        ax = abs(float(x[0]))
        if abs(ax - 1.0) < 1e-12:
            return None
        return np.array([[3.0 if ax < 1.0 else 2.0]])

    def prox(lam, z):
        z0 = float(z[0])
        if abs(z0) <= 1.0 + 3.0 * lam:
            return np.array([z0 / (1.0 + 3.0 * lam)])
        return np.array([(z0 - lam * np.sign(z0)) / (1.0 + 2.0 * lam)])

    pairs_near = _smooth_pair_sampler(
        lambda x: float(value(x[None, :])[0]),
        lambda x: np.clip(x, -1.0, 1.0) + 2.0 * x,
        1,
    )

    h = FunctionHandle(
        name="huber_plus_quad",
        dim=1,
        value=value,
        domain_box=[[-6.0, 6.0]],
        gradient=gradient,
        hessian=hessian,
        prox=prox,
        pairs_near=pairs_near,
        c11=True,
        convex=True,
    )
    anchors = (
        AnchorSpec(x=[0.0], v=[0.0], s_declared=3.0, kappa_declared=1.0 / 3.0, ball_radius=0.3, epsilon=0.3),
    )
    return CorpusEntry(
        handle=h,
        anchors=anchors,
        description="Huber(1) plus x^2: strongly convex C^{1,1}, local curvature 3",
        tags=("c11", "convex"),
    )


def _build_paper_example_2d() -> CorpusEntry:
    base = _build_paper_example()
    pe = base.handle

    def value(pts):
        pts = np.asarray(pts)
        x, y = pts[..., 0], pts[..., 1]
        vx = np.where(x >= 0.0, x * x, 1.0)
        vy = np.where(y >= 0.0, y * y, 1.0)
        return vx + vy

    def gradient(x):
        gs = [pe.grad_at(np.array([xi])) for xi in x]
        if any(g is None for g in gs):
            return None
        return np.array([g[0] for g in gs])

    def hessian(x):
        hs = [pe.hess_at(np.array([xi])) for xi in x]
        if any(h is None for h in hs):
            return None
        return np.diag([h[0, 0] for h in hs])

    def prox(lam, z):
        return np.array([float(pe.prox(lam, np.array([zi]))[0]) for zi in z])

    def pairs_near(anchor: SubgradientPair, radius: float, count: int):
        r1 = radius / np.sqrt(2.0)
        a0 = SubgradientPair([anchor.x[0]], [anchor.v[0]], float(pe(np.array([anchor.x[0]]))))
        a1 = SubgradientPair([anchor.x[1]], [anchor.v[1]], float(pe(np.array([anchor.x[1]]))))
        f0 = pe.pairs_near(a0, r1, 12)
        f1 = pe.pairs_near(a1, r1, 12)
        cands = [
            SubgradientPair(
                np.array([p.x[0], q.x[0]]), np.array([p.v[0], q.v[0]]), p.fx + q.fx
            )
            for p in f0
            for q in f1
        ]
        return _filter_near(cands, anchor, radius)[:count]

    h = FunctionHandle(
        name="paper_example_2d",
        dim=2,
        value=value,
        domain_box=[[-4.0, 4.0], [-4.0, 4.0]],
        gradient=gradient,
        hessian=hessian,
        prox=prox,
        pairs_near=pairs_near,
        convex=False,
        params={},
    )
    anchors = (
        AnchorSpec(x=[0.0, 0.0], v=[0.0, 0.0], s_declared=2.0, kappa_declared=0.5, ball_radius=0.3, epsilon=0.5),
    )
    return CorpusEntry(
        handle=h,
        anchors=anchors,
        description="separable sum of two jump-function coordinates; rich quadratic bundle in 2D",
        tags=("nonsmooth", "2d"),
    )


def _build_env_quad(s: float = 2.0, lam: float = 0.5) -> CorpusEntry:
    s, lam = float(s), float(lam)
    if 1.0 + s * lam <= 0:
        raise RegistryError("env_quad: need 1 + s*lam > 0")
    s_env = s / (1.0 + s * lam)
    inner = _build_quad_s(s=s_env, dim=1)
    h = FunctionHandle(
        name="env_quad",
        dim=1,
        value=inner.handle.value,
        domain_box=inner.handle.domain_box,
        gradient=inner.handle.gradient,
        hessian=inner.handle.hessian,
        prox=inner.handle.prox,
        pairs_near=inner.handle.pairs_near,
        prox_regularity=max(0.0, -s_env),
        prox_bound_threshold=inner.handle.prox_bound_threshold,
        c11=True,
        convex=s_env >= 0.0,
        params={"s": s, "lam": lam, "modulus": s_env},
    )
    anchors = (
        AnchorSpec(
            x=[0.0], v=[0.0], s_declared=s_env, kappa_declared=(1.0 / s_env) if s_env > 0 else None,
            ball_radius=0.5, epsilon=0.5,
        ),
    )
    return CorpusEntry(
        handle=h,
        anchors=anchors,
        description=f"Moreau envelope of quad_s(s={s}) at lambda={lam}; modulus s/(1+s*lam)={s_env}",
        tags=("c11", "envelope"),
    )


def _build_usc_jump() -> CorpusEntry:
    # 1 at the origin, 0 elsewhere: upper semicontinuous, fails the lsc probe.
    def value(pts):
        x = np.asarray(pts)[..., 0]
        return np.where(x == 0.0, 1.0, 0.0)

    h = FunctionHandle(
        name="usc_jump",
        dim=1,
        value=value,
        domain_box=[[-2.0, 2.0]],
    )
    return CorpusEntry(
        handle=h,
        anchors=(),
        description="upper-semicontinuous spike at the origin (lsc negative control)",
        negative=True,
        tags=("negative",),
    )


def _build_neg_quartic() -> CorpusEntry:
    def value(pts):
        x = np.asarray(pts)[..., 0]
        return -(x ** 4)

    def gradient(x):
        return -4.0 * x ** 3

    h = FunctionHandle(
        name="neg_quartic",
        dim=1,
        value=value,
        domain_box=[[-20.0, 20.0]],
        gradient=gradient,
        prox_bound_threshold=0.0,
    )
    return CorpusEntry(
        handle=h,
        anchors=(),
        description="-x^4: not prox-bounded for any lambda (negative control)",
        negative=True,
        tags=("negative",),
    )


_REGISTRY: dict[str, Callable[..., CorpusEntry]] = {
    "paper_example": _build_paper_example,
    "paper_example_2d": _build_paper_example_2d,
    "abs": _build_abs,
    "quad_s": _build_quad_s,
    "huber": _build_huber,
    "halfsquare": _build_halfsquare,
    "indicator_box": _build_indicator_box,
    "weakly_convex": _build_weakly_convex,
    "pwmax2d": _build_pwmax2d,
    "huber_plus_quad": _build_huber_plus_quad,
    "env_quad": _build_env_quad,
    "usc_jump": _build_usc_jump,
    "neg_quartic": _build_neg_quartic,
}


def corpus_names() -> list[str]:
    return sorted(_REGISTRY)


def corpus_get(name: str, **params) -> CorpusEntry:
    """Instantiate a corpus entry by name with optional parameters."""
    try:
        builder = _REGISTRY[name]
    except KeyError:
        raise RegistryError(
            f"unknown corpus entry {name!r}; available: {', '.join(corpus_names())}"
        ) from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise RegistryError(f"bad parameters for {name!r}: {exc}") from None


def corpus_catalog() -> str:
    """Text catalog of the registry (one line per entry)."""
    lines = ["name | dim | params | anchors | declared (s, kappa) | flags"]
    for name in corpus_names():
        e = _REGISTRY[name]()
        h = e.handle
        anch = "; ".join(
            f"x={a.x.tolist()} v={a.v.tolist()}" for a in e.anchors
        ) or "-"
        decl = "; ".join(
            f"(s={a.s_declared}, kappa={a.kappa_declared})" for a in e.anchors
        ) or "-"
        flags = ",".join(
            k
            for k, on in (
                ("convex", h.convex),
                ("c11", h.c11),
                ("negative", e.negative),
            )
            if on
        )
        params = ",".join(f"{k}={v}" for k, v in sorted(h.params.items())) or "-"
        lines.append(f"{name} | {h.dim} | {params} | {anch} | {decl} | {flags or '-'}")
    return "\n".join(lines)
