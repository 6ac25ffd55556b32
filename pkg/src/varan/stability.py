"""Certification of variational s-convexity and tilt stability.

Everything here works from sampled definitions: the strong-convexity
inequality over attentive subgradient pairs, the nested difference-
quotient modulus, tilt maps as ball-constrained argmins, and the
modulus relationships mu = s/2 and mu = 1/(2 kappa) cross-checked
against bundle eigenvalue bounds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bundles import QuadraticBundleConfig, bundle_shift, bundles_match, c11_gate, \
    hessian_bundle, quad_bundle, uniform_lower_bound
from .errors import (
    AttentivePathDivergenceError,
    ConfigError,
    EmptyBundleError,
    ImproperOnBoxError,
    PreconditionError,
    ProxUnboundedError,
)
from .funcspace import (
    FunctionHandle,
    Localization,
    SubgradientPair,
    add_quadratic,
    attentive_member,
    graph_distance,
    lsc_probe,
)
from .gridutil import box_grid, sphere_directions
from .moreau import DEFAULT_PROX, approach_sequence, attentive_path, default_lambda
from .secondorder import delta2_batch, d2_profile

#### variational s-convexity ####


@dataclass(frozen=True)
class SvarResult:
    passed: bool
    inconclusive: bool
    s: float
    n_pairs: int
    n_points: int
    witnesses: list = field(default_factory=list)


def _collect_pairs(
    f: FunctionHandle,
    anchor: SubgradientPair,
    epsilon: float,
    radius: float,
    count: int = 48,
    lam: Optional[float] = None,
) -> list:
    """Attentive localization members near the anchor: closed-form sampler
    output plus pairs mined along envelope approach paths."""
    loc = Localization(anchor=anchor, epsilon=epsilon)
    pairs = [anchor]
    if f.pairs_near is not None:
        pairs.extend(f.pairs_near(anchor, min(radius, epsilon), count))
    if lam is None:
        try:
            lam = default_lambda(f)
        except ProxUnboundedError:
            lam = None  # no usable envelope: closed-form pairs only
    if lam is not None:
        dirs = sphere_directions(f.dim, 2 if f.dim == 1 else 8)
        for d in dirs:
            zs = approach_sequence(anchor, lam, d, count=6, r0=0.25 * min(radius, 1.0))
            try:
                pairs.extend(attentive_path(f, anchor, lam, zs).pairs)
            except (AttentivePathDivergenceError, ProxUnboundedError, ImproperOnBoxError):
                continue
    kept = []
    for p in pairs:
        if not attentive_member(loc, p):
            continue
        if any(graph_distance(p, q) < 1e-10 for q in kept):
            continue
        kept.append(p)
    return kept


def _svar_tables(f: FunctionHandle, anchor: SubgradientPair, pairs: list, radius: float,
                 pts_per_axis: Optional[int] = None):
    """Precomputed inequality tables: base[i, j] = f(x'_j) - f(x_i) - <v_i, x'_j - x_i>
    and dist2[i, j] = ||x'_j - x_i||^2 over the sampled ball."""
    npts = pts_per_axis or (81 if f.dim == 1 else 21)
    lo = np.maximum(anchor.x - radius, f.domain_box[:, 0])
    hi = np.minimum(anchor.x + radius, f.domain_box[:, 1])
    grid = box_grid(lo, hi, npts)
    keep = np.linalg.norm(grid - anchor.x[None, :], axis=1) <= radius + 1e-12
    grid = grid[keep]
    fg = np.asarray(f(grid), dtype=np.float64)
    X = np.array([p.x for p in pairs])
    V = np.array([p.v for p in pairs])
    FX = np.array([p.fx for p in pairs])
    diff = grid[None, :, :] - X[:, None, :]
    base = fg[None, :] - FX[:, None] - np.einsum("ik,ijk->ij", V, diff)
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    return base, dist2, grid


def _svar_eval(base, dist2, s: float, tol: float):
    margins = base - 0.5 * s * dist2
    worst = float(np.nanmin(margins))
    return worst >= -tol, margins


def svar_check(
    f: FunctionHandle,
    anchor: SubgradientPair,
    s: float,
    epsilon: float = 0.5,
    radius: float = 0.35,
    tol: float = 1e-8,
    pairs: Optional[list] = None,
    pts_per_axis: Optional[int] = None,
) -> SvarResult:
    """Sampled variational s-convexity at the anchor.

    Checks f(x') >= f(x) + <v, x' - x> + (s/2)||x' - x||^2 - tol for all
    grid points x' in the ball U and all attentive pairs (x, v).
    """
    if not lsc_probe(f, anchor.x):
        raise PreconditionError(f"{f.name}: not lower semicontinuous at the anchor")
    if pairs is None:
        pairs = _collect_pairs(f, anchor, epsilon, radius)
    if not pairs:
        return SvarResult(passed=False, inconclusive=True, s=s, n_pairs=0, n_points=0)
    base, dist2, grid = _svar_tables(f, anchor, pairs, radius, pts_per_axis)
    ok, margins = _svar_eval(base, dist2, s, tol)
    witnesses = []
    if not ok:
        flat = np.argsort(margins, axis=None)
        for k in flat[:4]:
            i, j = np.unravel_index(k, margins.shape)
            if margins[i, j] >= -tol:
                break
            witnesses.append(
                {
                    "x": pairs[i].x.tolist(),
                    "v": pairs[i].v.tolist(),
                    "x_prime": grid[j].tolist(),
                    "margin": float(margins[i, j]),
                }
            )
    return SvarResult(
        passed=ok,
        inconclusive=False,
        s=s,
        n_pairs=len(pairs),
        n_points=int(grid.shape[0]),
        witnesses=witnesses,
    )


def largest_s(
    f: FunctionHandle,
    anchor: SubgradientPair,
    epsilon: float = 0.5,
    radius: float = 0.35,
    lo: float = -10.0,
    hi: float = 10.0,
    iters: int = 30,
    tol: float = 1e-8,
) -> Optional[float]:
    """Largest modulus passing svar_check, by bisection on fixed tables."""
    pairs = _collect_pairs(f, anchor, epsilon, radius)
    if not pairs:
        return None
    base, dist2, _ = _svar_tables(f, anchor, pairs, radius)
    if not _svar_eval(base, dist2, lo, tol)[0]:
        return None
    if _svar_eval(base, dist2, hi, tol)[0]:
        return hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if _svar_eval(base, dist2, mid, tol)[0]:
            lo = mid
        else:
            hi = mid
    return lo


#### cnv modulus ####


@dataclass(frozen=True)
class CnvResult:
    value: float
    low_confidence: bool
    stages: list
    betas: list


def cnv_estimate(
    f: FunctionHandle,
    anchor: SubgradientPair,
    betas: tuple = (0.2, 0.1, 0.05, 0.025, 0.0125),
    pair_count: int = 24,
    tau_levels: int = 12,
    agree_tol: float = 5e-2,
) -> CnvResult:
    """Nested difference-quotient modulus.

    Per stage beta: pairs attentive within rho = beta^2 contribute
    min over unit directions w and tau in (0, beta] of the quotient;
    the stage takes the max over pairs, and the final stage is the
    estimate, flagged low-confidence unless the last two stages agree.
    """
    if not np.isfinite(float(f(anchor.x))):
        raise PreconditionError(f"{f.name}: anchor value not finite")
    dirs = sphere_directions(f.dim, 2 if f.dim == 1 else 16)
    stages = []
    for beta in betas:
        rho = beta * beta
        loc = Localization(anchor=anchor, epsilon=rho)
        pairs = [anchor]
        if f.pairs_near is not None:
            pairs.extend(f.pairs_near(anchor, rho, pair_count))
        pairs = [p for p in pairs if attentive_member(loc, p) or p is anchor]
        taus = beta * 0.5 ** np.arange(tau_levels)
        stage = -np.inf
        for p in pairs:
            best = np.inf
            for tau in taus:
                vals = delta2_batch(f, p.x, p.v, float(tau), dirs)
                m = float(np.min(vals))
                if m < best:
                    best = m
            stage = max(stage, best)
        stages.append(stage)
    value = stages[-1]
    low = abs(stages[-1] - stages[-2]) > agree_tol * max(1.0, abs(value))
    return CnvResult(value=float(value), low_confidence=bool(low), stages=stages, betas=list(betas))


#### growth and Hessian characterizations ####


def _sampled_growth(
    f: FunctionHandle, anchor: SubgradientPair, kappa: float, radius: float, tol: float,
    pts_per_axis: int = 81,
) -> bool:
    npts = pts_per_axis if f.dim == 1 else 21
    lo = np.maximum(anchor.x - radius, f.domain_box[:, 0])
    hi = np.minimum(anchor.x + radius, f.domain_box[:, 1])
    grid = box_grid(lo, hi, npts)
    keep = np.linalg.norm(grid - anchor.x[None, :], axis=1) <= radius + 1e-12
    grid = grid[keep]
    fg = np.asarray(f(grid), dtype=np.float64)
    d = grid - anchor.x[None, :]
    rhs = anchor.fx + d @ anchor.v + 0.5 * kappa * (d * d).sum(axis=1)
    return bool(np.all(fg >= rhs - tol))


def growth_vs_d2(
    f: FunctionHandle,
    anchor: SubgradientPair,
    kappa: float,
    mode: str,
    mu: Optional[float] = None,
    radius: float = 0.25,
    tol: float = 1e-6,
    directions: int = 32,
) -> bool:
    """Cross-check between sampled second-order growth and the
    subderivative lower bound on the unit sphere.

    forward: growth with constant kappa on the ball must transfer to
    d2 >= kappa||w||^2 on the sphere grid.  backward: d2 >= mu with
    mu strictly above kappa must produce a ball with sampled growth.
    """
    if mode not in ("forward", "backward"):
        raise ConfigError(f"growth_vs_d2: unknown mode {mode!r}")
    dirs = sphere_directions(f.dim, 2 if f.dim == 1 else directions)
    if mode == "forward":
        if not _sampled_growth(f, anchor, kappa, radius, tol):
            return False
        prof = d2_profile(f, anchor.x, anchor.v, dirs)
        return all(
            (not e.value.is_finite) or float(e.value) >= kappa - max(tol, 1e-3)
            for e in prof
        )
    if mu is None:
        raise ConfigError("growth_vs_d2 backward mode needs the d2 bound mu")
    if mu <= kappa:
        return False  # the implication requires strict slack
    prof = d2_profile(f, anchor.x, anchor.v, dirs)
    premise = all(
        (not e.value.is_finite) or float(e.value) >= mu - max(tol, 1e-3) for e in prof
    )
    if not premise:
        return False
    for j in range(7):
        if _sampled_growth(f, anchor, kappa, radius * 0.5**j, tol):
            return True
    return False


def _sampled_strong_convexity(
    f: FunctionHandle, xbar: np.ndarray, s: float, radius: float, tol: float
) -> bool:
    """First-order strong-convexity inequality on sampled point pairs,
    with finite-difference gradients."""
    npts = 41 if f.dim == 1 else 9
    grid = box_grid(xbar - radius, xbar + radius, npts)
    keep = np.linalg.norm(grid - xbar[None, :], axis=1) <= radius + 1e-12
    grid = grid[keep]
    fg = np.asarray(f(grid), dtype=np.float64)
    h = 1e-6
    grads = np.empty_like(grid)
    for i in range(f.dim):
        e = np.zeros(f.dim)
        e[i] = h
        grads[:, i] = (np.asarray(f(grid + e)) - np.asarray(f(grid - e))) / (2.0 * h)
    d = grid[None, :, :] - grid[:, None, :]
    lhs = fg[None, :]
    rhs = (
        fg[:, None]
        + np.einsum("ik,ijk->ij", grads, d)
        + 0.5 * s * np.einsum("ijk,ijk->ij", d, d)
    )
    return bool(np.all(lhs >= rhs - max(tol, 1e-6)))


def hessian_convexity_check(
    f: FunctionHandle,
    xbar,
    s: float,
    mode: str,
    radius: float = 0.25,
    tol: float = 1e-2,
) -> bool:
    """Equivalence legs between sampled strong convexity and Hessian-bundle
    eigenvalue bounds for C11 functions."""
    xbar = np.atleast_1d(np.asarray(xbar, dtype=np.float64))
    c11_gate(f, xbar, radius)
    if mode == "i_to_ii":
        if not _sampled_strong_convexity(f, xbar, s, radius, tol):
            return False
        return hessian_bundle(f, xbar).min_eigenvalue() >= s - tol
    if mode == "ii_to_iii":
        if hessian_bundle(f, xbar).min_eigenvalue() <= s:
            return False  # needs strict room at the center
        offs = sphere_directions(f.dim, 2 if f.dim == 1 else 8) * (radius / 2.0)
        from .bundles import HessianBundleConfig

        cfg = HessianBundleConfig(rho0=radius / 4.0, levels=6)
        return all(
            hessian_bundle(f, xbar + o, cfg).min_eigenvalue() >= s - tol for o in offs
        )
    if mode == "iii_to_i":
        offs = np.vstack(
            [np.zeros((1, f.dim)), sphere_directions(f.dim, 2 if f.dim == 1 else 8) * (radius / 2.0)]
        )
        from .bundles import HessianBundleConfig

        cfg = HessianBundleConfig(rho0=radius / 4.0, levels=6)
        if not all(
            hessian_bundle(f, xbar + o, cfg).min_eigenvalue() >= s - tol / 2 for o in offs
        ):
            return False
        return _sampled_strong_convexity(f, xbar, s - tol, radius, tol)
    raise ConfigError(f"hessian_convexity_check: unknown mode {mode!r}")


#### tilt stability ####


@dataclass(frozen=True)
class TiltMapResult:
    points: np.ndarray  # (k, dim)
    value: float  # minimal f(x) - f(xbar) - <v, x - xbar>
    boundary_active: bool
    delta: float

    @property
    def multivalued(self) -> bool:
        return self.points.shape[0] > 1

    @property
    def point(self) -> np.ndarray:
        return self.points[0]


def tilt_map(
    f: FunctionHandle,
    xbar,
    delta: float,
    v,
    pts_per_axis: Optional[int] = None,
    value_window: float = 1e-8,
    refine_tol: float = 1e-10,
) -> TiltMapResult:
    """Argmin of the tilted gap f(x) - f(xbar) - <v, x - xbar> over the
    closed delta-ball, by grid scan plus compass refinement."""
    from .moreau import _compass_refine

    xbar = np.atleast_1d(np.asarray(xbar, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    fbar = float(f(xbar))
    if not np.isfinite(fbar):
        raise PreconditionError(f"{f.name}: f(xbar) must be finite")
    if delta <= 0:
        raise ConfigError("tilt_map: delta must be positive")

    def g(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        return f(pts) - fbar - (pts - xbar) @ v

    npts = pts_per_axis or (201 if f.dim == 1 else 61)
    lo = np.maximum(xbar - delta, f.domain_box[:, 0])
    hi = np.minimum(xbar + delta, f.domain_box[:, 1])
    grid = box_grid(lo, hi, npts)
    inside = np.linalg.norm(grid - xbar[None, :], axis=1) <= delta + 1e-12
    grid = grid[inside]
    vals = g(grid)
    if not np.isfinite(vals).any():
        raise ImproperOnBoxError(f"{f.name}: tilted objective is +inf on the ball")
    best = float(np.nanmin(vals))
    spacing = float(np.max((hi - lo) / (npts - 1)))
    starts = grid[vals <= best + 1e-6 * max(1.0, abs(best))]
    if starts.shape[0] > 64:
        starts = starts[:64]
    refined = []
    for s0 in starts:
        u, gu, _ = _compass_refine(g, s0, spacing, lo, hi, refine_tol)
        refined.append((u, gu))
    best = min(r[1] for r in refined)
    dedupe = 1e-5 * float(np.linalg.norm(hi - lo))
    points = []
    for u, gu in sorted(refined, key=lambda r: tuple(r[0])):
        if gu > best + value_window * max(1.0, abs(best)):
            continue
        if not any(np.linalg.norm(u - p) < dedupe for p in points):
            points.append(u)
    points = np.array(sorted(map(tuple, points)))
    dists = np.linalg.norm(points - xbar[None, :], axis=1)
    boundary = bool(np.any(dists >= delta - max(2.0 * spacing, 1e-9)))
    return TiltMapResult(points=points, value=best, boundary_active=boundary, delta=delta)


@dataclass(frozen=True)
class TiltCheckResult:
    stable: bool
    kappa_hat: float
    delta: float
    witnesses: list
    certificate: dict


def tilt_check(
    f: FunctionHandle,
    xbar,
    delta: float = 0.5,
    v_radius: float = 0.25,
    directions: int = 64,
    radius_levels: int = 7,
    max_halvings: int = 4,
) -> TiltCheckResult:
    """Single-valuedness and Lipschitz modulus of the tilt map near v = 0.

    The modulus estimate pairs tilt points within the same radius class,
    across adjacent classes, and against v = 0.  A boundary-active argmin
    first halves delta (a smaller neighborhood is always admissible);
    if that never helps, the tilt was too large for the neighborhood and
    the sample is skipped -- unless it happens at v = 0 or in the finest
    radius class, where v -> 0 and the failure is genuine.
    """
    xbar = np.atleast_1d(np.asarray(xbar, dtype=np.float64))
    dirs = sphere_directions(f.dim, 2 if f.dim == 1 else directions)
    radii = v_radius * 0.5 ** np.arange(radius_levels)
    witnesses: list = []
    skipped: list = []
    by_class: dict[int, list] = {j: [] for j in range(radius_levels)}
    zero_points: list = []
    stable = True

    def solve(v):
        d = delta
        for _ in range(max_halvings + 1):
            res = tilt_map(f, xbar, d, v)
            if not res.boundary_active:
                return res
            d *= 0.5
        return res

    res0 = solve(np.zeros(f.dim))
    if res0.multivalued or res0.boundary_active:
        stable = False
        witnesses.append({"v": [0.0] * f.dim, "reason": "multivalued" if res0.multivalued else "boundary"})
    else:
        zero_points.append(res0.point)
    for j, r in enumerate(radii):
        for d in dirs:
            v = r * d
            res = solve(v)
            if res.multivalued or res.boundary_active:
                reason = "multivalued" if res.multivalued else "boundary"
                if j < radius_levels - 1:
                    skipped.append({"v": v.tolist(), "reason": reason})
                else:
                    stable = False
                    witnesses.append({"v": v.tolist(), "reason": reason})
                continue
            by_class[j].append((v, res.point))
    ratios = []
    for j in range(radius_levels):
        group = list(by_class[j])
        neighbors = by_class.get(j + 1, [])
        for a in range(len(group)):
            va, ma = group[a]
            for vb, mb in group[a + 1 :]:
                dv = float(np.linalg.norm(va - vb))
                if dv > 1e-12:
                    ratios.append(float(np.linalg.norm(ma - mb)) / dv)
            for vb, mb in neighbors:
                dv = float(np.linalg.norm(va - vb))
                if dv > 1e-12:
                    ratios.append(float(np.linalg.norm(ma - mb)) / dv)
            for z in zero_points:
                dv = float(np.linalg.norm(va))
                if dv > 1e-12:
                    ratios.append(float(np.linalg.norm(ma - z)) / dv)
    kappa_hat = float(max(ratios)) if ratios else 0.0
    if not np.isfinite(kappa_hat):
        stable = False
    certificate = {
        "delta": float(delta),
        "v_radius": float(v_radius),
        "radius_levels": int(radius_levels),
        "n_ratios": len(ratios),
        "n_failures": len(witnesses),
        "n_skipped": len(skipped),
    }
    return TiltCheckResult(
        stable=stable,
        kappa_hat=kappa_hat,
        delta=float(delta),
        witnesses=witnesses,
        certificate=certificate,
    )


#### modulus reports ####


@dataclass(frozen=True)
class ModulusReport:
    function: str
    anchor: dict
    s_direct: Optional[float]
    mu: Optional[float]
    cnv: Optional[float]
    kappa: Optional[float]
    relationships: list
    config: dict

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "anchor": self.anchor,
            "s_direct": self.s_direct,
            "mu": self.mu,
            "cnv": self.cnv,
            "kappa": self.kappa,
            "relationships": self.relationships,
            "config": self.config,
        }

    def passed(self) -> bool:
        return all(r["passed"] for r in self.relationships)


def _rel(name: str, lhs, rhs, tolerance: float, passed: bool, note: str = "") -> dict:
    def _num(x):
        if x is None:
            return None
        x = float(x)
        return x if np.isfinite(x) else ("inf" if x > 0 else "-inf")

    return {
        "name": name,
        "lhs": _num(lhs),
        "rhs": _num(rhs),
        "tolerance": float(tolerance),
        "passed": bool(passed),
        "note": note,
    }


def _anchor_dict(anchor: SubgradientPair) -> dict:
    return {"x": anchor.x.tolist(), "v": anchor.v.tolist(), "fx": anchor.fx}


def theorem46_crosscheck(
    f: FunctionHandle,
    anchor: SubgradientPair,
    lam: Optional[float] = None,
    epsilon: float = 0.5,
    radius: float = 0.35,
    shift_r: Optional[float] = None,
    rel_tol: float = 5e-2,
) -> ModulusReport:
    """Modulus relationships between direct s-convexity, the bundle
    eigenvalue bound, and the quotient modulus: mu >= s/2, the reverse
    direction below 2*mu, cnv ~ s, and shift consistency."""
    if lam is None:
        lam = default_lambda(f)
    s_hi = 10.0
    s_direct = largest_s(f, anchor, epsilon=epsilon, radius=radius, hi=s_hi)
    try:
        bundle = quad_bundle(f, anchor, lam)
        mu = uniform_lower_bound(bundle)
    except EmptyBundleError:
        bundle, mu = None, None
    cnv_res = cnv_estimate(f, anchor)
    cnv = cnv_res.value
    rels = []
    if s_direct is None or mu is None:
        rels.append(_rel("mu_ge_half_s", mu, None, rel_tol, False, "missing component"))
    else:
        rels.append(
            _rel(
                "mu_ge_half_s",
                mu,
                s_direct / 2.0,
                rel_tol,
                mu >= s_direct / 2.0 - rel_tol,
                "one-sided",
            )
        )
    if mu is not None:
        if np.isinf(mu):
            s_grid = np.array([1.0, 2.0, 4.0, 8.0])
            note = "mu infinite; tested a fixed unbounded-side grid"
        else:
            top = 2.0 * mu - 0.1
            s_grid = np.array([top - 1.5, top - 1.0, top - 0.5, top])
            note = "s < 2*mu - margin"
        ok = True
        for s_test in s_grid:
            r_test = min(radius, 1.0 / max(1.0, abs(s_test)))
            res = svar_check(f, anchor, float(s_test), epsilon=epsilon, radius=r_test)
            if not res.passed:
                ok = False
                note += f"; failed at s={float(s_test):.4g}"
                break
        rels.append(_rel("svar_below_2mu", 1.0 if ok else 0.0, 1.0, 0.0, ok, note))
    if s_direct is not None:
        # both sides must be trustworthy finite estimates before the
        # identity is scored; a capped search or unsettled stages means
        # the comparison carries no information either way
        if cnv_res.low_confidence or s_direct >= s_hi - 1e-9:
            why = (
                "quotient stages did not settle"
                if cnv_res.low_confidence
                else "s search hit its upper cap"
            )
            rels.append(
                _rel("cnv_matches_s", cnv, s_direct, rel_tol, True, f"inconclusive: {why}")
            )
        else:
            rels.append(
                _rel("cnv_matches_s", cnv, s_direct, rel_tol, abs(cnv - s_direct) <= rel_tol, "")
            )
    if shift_r is not None:
        if np.linalg.norm(anchor.x) > 1e-12:
            rels.append(_rel("shift_consistency", None, None, rel_tol, False,
                             "shift check needs an origin anchor"))
        else:
            r = float(shift_r)
            H = 2.0 * r * np.eye(f.dim)
            g = add_quadratic(f, H, name=f"{f.name}+shift")
            g_anchor = SubgradientPair(anchor.x, anchor.v, anchor.fx)
            s_g = largest_s(g, g_anchor, epsilon=epsilon, radius=radius)
            lam_g = default_lambda(g)
            try:
                bundle_g = quad_bundle(g, g_anchor, lam_g)
                mu_g = uniform_lower_bound(bundle_g)
            except EmptyBundleError:
                bundle_g, mu_g = None, None
            ok_s = s_g is not None and s_direct is not None and abs(s_g - (s_direct + 2 * r)) <= rel_tol
            rels.append(_rel("shift_s", s_g, None if s_direct is None else s_direct + 2 * r,
                             rel_tol, ok_s, "g = f + r||x - xbar||^2"))
            ok_mu = (
                mu_g is not None
                and mu is not None
                and (np.isinf(mu_g) and np.isinf(mu) or abs(mu_g - (mu + r)) <= rel_tol)
            )
            rels.append(_rel("shift_mu", mu_g, None if mu is None else mu + r, rel_tol, ok_mu, ""))
            ok_b = (
                bundle is not None
                and bundle_g is not None
                and bundles_match(bundle_g, bundle_shift(bundle, H))
            )
            rels.append(_rel("shift_bundle", None, None, rel_tol, ok_b,
                             "bundle of g matches shifted bundle of f"))
    return ModulusReport(
        function=f.name,
        anchor=_anchor_dict(anchor),
        s_direct=s_direct,
        mu=None if mu is None else float(mu),
        cnv=float(cnv),
        kappa=None,
        relationships=rels,
        config={"lambda": float(lam), "epsilon": float(epsilon), "radius": float(radius),
                "shift_r": shift_r},
    )


def theorem52_crosscheck(
    f: FunctionHandle,
    xbar,
    lam: Optional[float] = None,
    delta: float = 0.5,
    v_radius: float = 0.25,
    rel_tol: float = 5e-2,
) -> ModulusReport:
    """Tilt modulus against the bundle bound: stable tilt maps must obey
    mu >= 1/(2 kappa), and the bound predicts the observed modulus."""
    xbar = np.atleast_1d(np.asarray(xbar, dtype=np.float64))
    fbar = float(f(xbar))
    if not np.isfinite(fbar):
        raise PreconditionError(f"{f.name}: f(xbar) must be finite")
    anchor = SubgradientPair(xbar, np.zeros(f.dim), fbar)
    if lam is None:
        lam = default_lambda(f)
    tc = tilt_check(f, xbar, delta=delta, v_radius=v_radius)
    try:
        mu = uniform_lower_bound(quad_bundle(f, anchor, lam))
    except EmptyBundleError:
        mu = None
    rels = []
    if not tc.stable:
        # the bound is conditioned on tilt stability; with the premise
        # false there is nothing to violate (instability itself stays
        # visible through config['stable'] and the witnesses)
        rels.append(_rel("mu_ge_inv_2kappa", mu, None, rel_tol, True,
                         "not tilt-stable: premise fails, bound is vacuous"))
    elif tc.kappa_hat <= 1e-9:
        rels.append(
            _rel("mu_ge_inv_2kappa", mu, np.inf, rel_tol, True,
                 "kappa ~ 0: bound vacuous, recorded one-sided")
        )
    elif mu is None:
        rels.append(_rel("mu_ge_inv_2kappa", None, 1.0 / (2.0 * tc.kappa_hat), rel_tol, False,
                         "bundle unavailable"))
    else:
        bound = 1.0 / (2.0 * tc.kappa_hat)
        rels.append(_rel("mu_ge_inv_2kappa", mu, bound, rel_tol, mu >= bound - rel_tol, ""))
    if mu is not None and tc.stable:
        if np.isinf(mu):
            rels.append(_rel("kappa_le_inv_2mu", tc.kappa_hat, 0.0, rel_tol,
                             tc.kappa_hat <= rel_tol, "mu infinite: predicts kappa ~ 0"))
        elif mu > 0:
            pred = 1.0 / (2.0 * mu)
            rels.append(_rel("kappa_le_inv_2mu", tc.kappa_hat, pred, rel_tol,
                             tc.kappa_hat <= pred + rel_tol, ""))
    return ModulusReport(
        function=f.name,
        anchor=_anchor_dict(anchor),
        s_direct=None,
        mu=None if mu is None else float(mu),
        cnv=None,
        kappa=float(tc.kappa_hat) if tc.stable else None,
        relationships=rels,
        config={"lambda": float(lam), "delta": float(delta), "v_radius": float(v_radius),
                "stable": tc.stable},
    )


#### semidefinite necessity ####


@dataclass(frozen=True)
class SemidefiniteCheck:
    checked: bool
    ok: Optional[bool]
    min_value: Optional[float]


def semidefinite_necessity_check(
    f: FunctionHandle,
    anchor: SubgradientPair,
    lam: Optional[float] = None,
    tol: float = 1e-8,
) -> SemidefiniteCheck:
    """For variationally convex anchors, every bundle member must be
    positive-semidefinite on its subspace; skipped (checked=False) when
    plain variational convexity itself fails."""
    res = svar_check(f, anchor, 0.0)
    if not res.passed:
        return SemidefiniteCheck(checked=False, ok=None, min_value=None)
    if lam is None:
        lam = default_lambda(f)
    bundle = quad_bundle(f, anchor, lam)
    worst = np.inf
    for q in bundle.members:
        evals = q.restricted_eigenvalues()
        if evals.size:
            worst = min(worst, float(evals.min()))
    return SemidefiniteCheck(checked=True, ok=bool(worst >= -tol), min_value=float(worst))
