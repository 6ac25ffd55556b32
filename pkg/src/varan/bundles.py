"""Hessian bundles of C^{1,1} functions and quadratic bundles of
prox-regular functions.

Both bundles collect second-order limits along shrinking shells around
an anchor.  Hessian bundles cluster finite-difference Hessians accepted
by a two-step agreement test.  Quadratic bundles sample base points of
the envelope, keep those where the envelope passes a twice-
differentiability gate, recover subgradient pairs through the proximal
map, estimate the second-order subderivative on a sphere grid, fit a
generalized quadratic form, and cluster the fits across shells.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ._kernels import pairwise_lipschitz
from .errors import EmptyBundleError, PreconditionError, ProxUnboundedError
from .funcspace import FunctionHandle, SubgradientPair
from .gridutil import ball_points, shell_points, sphere_directions
from .moreau import DEFAULT_PROX, ProxConfig, default_lambda, envelope, prox
from .secondorder import GeneralizedQuadraticForm, NotQuadraticError, d2_profile, gqf_fit

#### finite-difference Hessians ####


def _fd_hessian(f: FunctionHandle, x: np.ndarray, h: float) -> np.ndarray:
    """Central-difference Hessian with one batched oracle call."""
    n = x.shape[0]
    pts = [x]
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        pts.extend([x + e, x - e])
    for i in range(n):
        for j in range(i + 1, n):
            ei = np.zeros(n)
            ei[i] = h
            ej = np.zeros(n)
            ej[j] = h
            pts.extend([x + ei + ej, x + ei - ej, x - ei + ej, x - ei - ej])
    vals = np.asarray(f(np.asarray(pts)), dtype=np.float64)
    if not np.all(np.isfinite(vals)):
        return np.full((n, n), np.nan)
    H = np.empty((n, n))
    f0 = vals[0]
    for i in range(n):
        fp, fm = vals[1 + 2 * i], vals[2 + 2 * i]
        H[i, i] = (fp - 2.0 * f0 + fm) / (h * h)
    k = 1 + 2 * n
    for i in range(n):
        for j in range(i + 1, n):
            fpp, fpm, fmp, fmm = vals[k : k + 4]
            H[i, j] = H[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h * h)
            k += 4
    return H


def fd_hessian_checked(
    f: FunctionHandle,
    x: np.ndarray,
    h: float,
    agree_tol: float = 1e-3,
    sym_tol: float = 1e-6,
) -> Optional[np.ndarray]:
    """Finite-difference Hessian accepted only when the h and h/2
    estimates agree spectrally and the asymmetry is negligible."""
    Ha = _fd_hessian(f, x, h)
    Hb = _fd_hessian(f, x, h / 2.0)
    if not (np.all(np.isfinite(Ha)) and np.all(np.isfinite(Hb))):
        return None
    scale = max(1.0, float(np.linalg.norm(Hb, 2)))
    if np.linalg.norm(Ha - Hb, 2) > agree_tol * scale:
        return None
    if np.linalg.norm(Hb - Hb.T, 2) > sym_tol * scale:
        return None
    return (Hb + Hb.T) / 2.0


#### Hessian bundle ####


@dataclass(frozen=True)
class HessianBundle:
    anchor: np.ndarray
    members: tuple  # of symmetric matrices
    certificate: dict

    def min_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh(M).min()) for M in self.members)

    def to_dict(self) -> dict:
        return {
            "anchor": self.anchor.tolist(),
            "members": [[float(v) for v in M.ravel()] for M in self.members],
            "certificate": self.certificate,
        }


@dataclass(frozen=True)
class HessianBundleConfig:
    rho0: float = 0.25
    levels: int = 9
    per_shell: int = 32
    agree_tol: float = 1e-3
    sym_tol: float = 1e-6
    cluster_radius: float = 5e-2
    c11_gate: bool = True


def _empirical_grad_lipschitz(f: FunctionHandle, center: np.ndarray, radius: float) -> float:
    """Empirical gradient Lipschitz constant on a ball (FD gradients)."""
    pts = ball_points(center, radius, 24)
    h = 1e-6
    n = center.shape[0]
    grads = np.empty((pts.shape[0], n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        grads[:, i] = (np.asarray(f(pts + e)) - np.asarray(f(pts - e))) / (2.0 * h)
    keep = np.all(np.isfinite(grads), axis=1)
    if keep.sum() < 2:
        raise PreconditionError(f"{f.name}: gradients not finite on the sampling ball")
    return pairwise_lipschitz(pts[keep], grads[keep])


def c11_gate(f: FunctionHandle, center: np.ndarray, radius: float) -> float:
    """Raise unless the empirical gradient Lipschitz constant stays bounded
    as the ball shrinks.  A jump in the gradient makes the constant scale
    like 1/radius, which an 8x radius drop exposes."""
    big = _empirical_grad_lipschitz(f, center, radius)
    small = _empirical_grad_lipschitz(f, center, radius / 8.0)
    if not (np.isfinite(big) and np.isfinite(small)):
        raise PreconditionError(f"{f.name}: gradient Lipschitz probe diverged")
    if small > 3.0 * big + 1.0 and small > 50.0:
        raise PreconditionError(
            f"{f.name}: gradient Lipschitz constant grows under shrinking "
            f"({big:.3g} at r={radius:.3g} vs {small:.3g} at r/8); "
            "the function does not look C11 near the anchor"
        )
    return max(big, small)


def _cluster_matrices(mats: list, radius: float) -> list:
    """Greedy spectral-norm clustering; returns representatives (first seen)."""
    reps: list = []
    for M in mats:
        if not any(np.linalg.norm(M - R, 2) <= radius for R in reps):
            reps.append(M)
    return reps


def hessian_bundle(
    f: FunctionHandle, anchor, config: HessianBundleConfig = HessianBundleConfig()
) -> HessianBundle:
    """All spectral-norm limits of accepted finite-difference Hessians on
    shrinking shells; members must recur in the last two populated shells."""
    anchor = np.atleast_1d(np.asarray(anchor, dtype=np.float64))
    lip = c11_gate(f, anchor, config.rho0) if config.c11_gate else None
    radii = config.rho0 * 0.5 ** np.arange(config.levels)
    shell_hessians = []
    accepted_counts = []
    for rho in radii:
        h = min(rho / 8.0, 1e-3)
        pts = shell_points(anchor, rho, config.per_shell)
        accepted = []
        for p in pts:
            H = fd_hessian_checked(f, p, h, config.agree_tol, config.sym_tol)
            if H is not None:
                accepted.append(H)
        shell_hessians.append(accepted)
        accepted_counts.append(len(accepted))
    populated = [s for s in shell_hessians if s]
    if not populated:
        raise EmptyBundleError(
            f"{f.name}: no twice-differentiable sample accepted on any shell"
        )
    last, prev = populated[-1], populated[-2] if len(populated) >= 2 else populated[-1]
    reps_last = _cluster_matrices(last, config.cluster_radius)
    members = [
        R
        for R in reps_last
        if any(np.linalg.norm(R - M, 2) <= config.cluster_radius for M in prev)
    ]
    if not members:
        raise EmptyBundleError(f"{f.name}: no cluster stable across the last two shells")
    members.sort(key=lambda M: (round(float(np.trace(M)), 9),) + tuple(np.round(M.ravel(), 9)))
    certificate = {
        "radii": radii.tolist(),
        "per_shell": config.per_shell,
        "accepted_per_shell": accepted_counts,
        "cluster_radius": config.cluster_radius,
        "grad_lipschitz": lip,
    }
    return HessianBundle(anchor=anchor, members=tuple(members), certificate=certificate)


#### quadratic bundle ####


@dataclass(frozen=True)
class QuadraticBundleConfig:
    lam: Optional[float] = None  # None: pick from the declared regularity level
    rho0: float = 0.25
    levels: int = 9
    per_shell: int = 32
    eps0: float = 0.5  # attentive value trail |f(x)-f(xbar)| <= eps0 * 2^-j
    variant: str = "revised"  # or "original"
    cluster_radius: float = 5e-2
    gate_agree_tol: float = 1e-3
    gate_sym_tol: float = 1e-6
    fit_tol: float = 1e-2
    pair_slack: float = 4.0  # proximity gates scale: ||x-xbar|| <= slack * rho
    prox_config: ProxConfig = DEFAULT_PROX


@dataclass(frozen=True)
class QuadraticBundle:
    anchor: SubgradientPair
    members: tuple  # of GeneralizedQuadraticForm, storing half the subderivative
    provenance: tuple  # one dict per member
    variant: str
    certificate: dict

    def to_dict(self) -> dict:
        return {
            "anchor": {
                "x": self.anchor.x.tolist(),
                "v": self.anchor.v.tolist(),
                "fx": self.anchor.fx,
            },
            "variant": self.variant,
            "members": [q.to_dict() for q in self.members],
            "provenance": list(self.provenance),
            "certificate": self.certificate,
        }


def _envelope_fd_hessian_gate(
    f: FunctionHandle,
    lam: float,
    z: np.ndarray,
    h: float,
    agree_tol: float,
    sym_tol: float,
    prox_config: ProxConfig,
) -> bool:
    env = FunctionHandle(
        name=f"env({f.name})",
        dim=f.dim,
        value=lambda pts: np.array(
            [float(envelope(f, lam, p, prox_config)) for p in np.atleast_2d(pts)]
        ),
        domain_box=f.domain_box,
    )
    return fd_hessian_checked(env, z, h, agree_tol, sym_tol) is not None


def _sphere_fit_directions(dim: int) -> np.ndarray:
    dirs = sphere_directions(dim, 2 if dim == 1 else 16)
    zero = np.zeros((1, dim))
    return np.vstack([zero, dirs, 0.5 * dirs])


def _fit_pair(
    f: FunctionHandle, x: np.ndarray, v: np.ndarray, fit_tol: float
) -> GeneralizedQuadraticForm:
    dirs = _sphere_fit_directions(f.dim)
    prof = d2_profile(f, x, v, dirs)
    samples = [(w, est.value) for w, est in zip(dirs, prof)]
    q_full = gqf_fit(samples, fit_tol=fit_tol)
    # members store half the subderivative so smooth shifts add (1/2)H
    return GeneralizedQuadraticForm(A=q_full.A / 2.0, L_basis=q_full.L_basis)


def quad_bundle(
    f: FunctionHandle,
    anchor: SubgradientPair,
    lam: Optional[float] = None,
    config: QuadraticBundleConfig = QuadraticBundleConfig(),
) -> QuadraticBundle:
    """Quadratic bundle at an anchor pair via envelope-based sampling.

    Members store half the second-order subderivative as generalized
    quadratic forms.  The revised variant enforces the attentive value
    trail |f(x_k) - f(xbar)| <= eps0 * 2^-j; the original variant drops
    it and additionally mines local (not just global) proximal points,
    which is how value-escaping pairs arise at desk scale.
    """
    if lam is None:
        lam = config.lam
    if lam is None:
        lam = default_lambda(f)
    if f.prox_regularity > 0 and lam >= 1.0 / f.prox_regularity:
        raise PreconditionError(
            f"{f.name}: lambda {lam} is not below 1/r = {1.0 / f.prox_regularity}"
        )
    xbar, vbar, fbar = anchor.x, anchor.v, anchor.fx
    zbar = xbar + lam * vbar
    radii = config.rho0 * 0.5 ** np.arange(config.levels)
    original = config.variant == "original"

    clusters: list[dict] = []  # {"rep": GQF, "shells": [j...], "pairs": [...], "deep": GQF}
    kept_per_shell = []
    examined_per_shell = []
    for j, rho in enumerate(radii):
        h = min(rho / 8.0, 1e-3)
        prox_cfg = config.prox_config
        if original:
            # local (non-global) proximal points carry the value-escaping
            # members; scan at the shell scale so their basins resolve
            prox_cfg = replace(
                config.prox_config, collect_local=True, local_scan_radius=4.0 * float(rho)
            )
        zs = shell_points(zbar, rho, config.per_shell)
        shell_forms: list[tuple[GeneralizedQuadraticForm, dict]] = []
        examined = 0
        for z in zs:
            examined += 1
            if not _envelope_fd_hessian_gate(
                f, lam, z, h, config.gate_agree_tol, config.gate_sym_tol, config.prox_config
            ):
                continue
            try:
                res = prox(f, lam, z, prox_cfg)
            except ProxUnboundedError:
                continue
            if res.multivalued:
                continue
            candidates = [res.point]
            if original and res.local_minimizers is not None:
                candidates.extend(list(res.local_minimizers))
            for u in candidates:
                x = np.asarray(u, dtype=np.float64)
                v = (z - x) / lam
                fx = float(f(x))
                if not np.isfinite(fx):
                    continue
                if np.linalg.norm(x - xbar) > config.pair_slack * rho:
                    continue
                if np.linalg.norm(v - vbar) > config.pair_slack * rho / lam:
                    continue
                if not original and abs(fx - fbar) > config.eps0 * 0.5**j:
                    continue
                try:
                    half = _fit_pair(f, x, v, config.fit_tol)
                except NotQuadraticError:
                    continue
                shell_forms.append(
                    (
                        half,
                        {
                            "shell": j,
                            "rho": float(rho),
                            "x": x.tolist(),
                            "v": v.tolist(),
                            "fx": fx,
                            "value_gap": abs(fx - float(fbar)),
                        },
                    )
                )
        kept_per_shell.append(len(shell_forms))
        examined_per_shell.append(examined)
        # merge shell forms into clusters
        for q, prov in shell_forms:
            hit = None
            for ci, cl in enumerate(clusters):
                if q.is_close(cl["rep"], config.cluster_radius):
                    hit = ci
                    break
            if hit is None:
                clusters.append({"rep": q, "shells": [j], "pairs": [prov], "deep": q})
            else:
                cl = clusters[hit]
                if cl["shells"][-1] != j:
                    cl["shells"].append(j)
                cl["pairs"].append(prov)
                cl["deep"] = q  # deepest-shell representative

    # a cluster is a limit only if it survives to the deepest sampled scales:
    # it must be present in both of the last two populated shells
    populated = sorted({j for cl in clusters for j in cl["shells"]})
    required = set(populated[-2:])
    members = []
    provenance = []
    for cl in clusters:
        shells = cl["shells"]
        if required.issubset(shells):
            members.append(cl["deep"])
            provenance.append(
                {
                    "shells": shells,
                    "radii": [float(radii[s]) for s in shells],
                    "n_pairs": len(cl["pairs"]),
                    "deepest_pair": cl["pairs"][-1],
                    "value_gaps": [p["value_gap"] for p in cl["pairs"][-4:]],
                }
            )
    if not members:
        raise EmptyBundleError(
            f"{f.name}: no quadratic-form cluster recurred across consecutive shells "
            f"(kept per shell: {kept_per_shell})"
        )
    ordered = sorted(
        zip(members, provenance),
        key=lambda mp: (mp[0].subspace_dim, round(float(np.trace(mp[0].A)), 9))
        + tuple(np.round(mp[0].A.ravel(), 9)),
    )
    members = tuple(m for m, _ in ordered)
    provenance = tuple(p for _, p in ordered)
    certificate = {
        "lambda": float(lam),
        "radii": radii.tolist(),
        "per_shell": config.per_shell,
        "examined_per_shell": examined_per_shell,
        "kept_per_shell": kept_per_shell,
        "cluster_radius": config.cluster_radius,
        "variant": config.variant,
    }
    return QuadraticBundle(
        anchor=anchor,
        members=members,
        provenance=provenance,
        variant=config.variant,
        certificate=certificate,
    )


def uniform_lower_bound(bundle: QuadraticBundle) -> float:
    """Smallest value of any member on the unit sphere of its subspace.

    Members with L = {0} are vacuous there and contribute +inf; a bundle
    made only of such members yields +inf (one-sided reporting upstream).
    """
    if not bundle.members:
        raise PreconditionError("uniform_lower_bound needs a nonempty bundle")
    best = np.inf
    for q in bundle.members:
        evals = q.restricted_eigenvalues()
        if evals.size:
            best = min(best, float(evals.min()))
    return float(best)


def bundle_shift(bundle: QuadraticBundle, H: np.ndarray) -> QuadraticBundle:
    """Image of the bundle under adding the smooth quadratic (1/2)<x,Hx>:
    each member gains half its Hessian form restricted to its subspace."""
    H = np.asarray(H, dtype=np.float64)
    if np.linalg.norm(H - H.T) > 1e-10 * max(1.0, np.linalg.norm(H)):
        raise PreconditionError("bundle_shift needs a symmetric matrix")
    members = tuple(
        GeneralizedQuadraticForm(A=q.A + 0.5 * H, L_basis=q.L_basis) for q in bundle.members
    )
    return replace(bundle, members=members)


def nonemptiness_check(
    f: FunctionHandle,
    anchor: SubgradientPair,
    lam: Optional[float] = None,
    config: QuadraticBundleConfig = QuadraticBundleConfig(),
) -> bool:
    try:
        return len(quad_bundle(f, anchor, lam, config).members) >= 1
    except EmptyBundleError:
        return False


def bundles_match(a, b, radius: float = 5e-2) -> bool:
    """Set equality of two quadratic bundles under the form metric."""
    qa, qb = list(a.members), list(b.members)
    return all(any(x.is_close(y, radius) for y in qb) for x in qa) and all(
        any(y.is_close(x, radius) for x in qa) for y in qb
    )
