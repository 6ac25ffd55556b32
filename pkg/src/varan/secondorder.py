"""Second-order difference quotients, subderivative estimation, and
generalized quadratic forms.

The subderivative estimator follows the lower epi-limit structure: at
each step size t it takes the minimum of the quotient over a direction
window shrinking like sqrt(t), then classifies the level trajectory as
divergent (+inf) or convergent, extrapolating the sqrt(t) bias away in
the convergent case.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .epi import epi_converges
from .errors import (
    AnchorInfeasibleError,
    EnvelopeUnboundedError,
    NotQuadraticError,
    PreconditionError,
)
from .extreal import INFINITY_CAP, ExtendedReal
from .funcspace import FunctionHandle
from .gridutil import box_grid, sphere_directions

#### difference quotients ####

DEFAULT_SCHEDULE = 0.5 ** np.arange(3, 19)


def delta2(f: FunctionHandle, x, v, t: float, w) -> ExtendedReal:
    """Second-order difference quotient [f(x+tw) - f(x) - t<v,w>] / (t^2/2)."""
    if t <= 0:
        raise ValueError("t must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))
    fx = float(f(x))
    if not np.isfinite(fx):
        raise AnchorInfeasibleError(f"{f.name}: f(x) is not finite at x={x.tolist()}")
    fw = float(f(x + t * w))
    if not np.isfinite(fw):
        return ExtendedReal.infinity()
    val = (fw - fx - t * float(v @ w)) / (t * t / 2.0)
    return ExtendedReal(val)


def delta2_batch(f: FunctionHandle, x, v, t: float, W: np.ndarray) -> np.ndarray:
    """Vectorized quotient over rows of W; +inf where f(x+tW) is +inf."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    W = np.atleast_2d(np.asarray(W, dtype=np.float64))
    fx = float(f(x))
    if not np.isfinite(fx):
        raise AnchorInfeasibleError(f"{f.name}: f(x) is not finite at x={x.tolist()}")
    fw = np.asarray(f(x[None, :] + t * W), dtype=np.float64)
    return (fw - fx - t * (W @ v)) / (t * t / 2.0)


#### second-order subderivative ####


@dataclass(frozen=True)
class D2Estimate:
    value: ExtendedReal
    low_confidence: bool
    levels: np.ndarray  # windowed minima per schedule entry

    @property
    def is_infinite(self) -> bool:
        return self.value.is_infinite


def _window_offsets(dim: int, count: int = 8) -> np.ndarray:
    """Unit-scale direction offsets (scaled by the window size per level)."""
    if dim == 1:
        return np.linspace(-1.0, 1.0, 9).reshape(-1, 1)
    dirs = sphere_directions(dim, count)
    return np.vstack([np.zeros((1, dim)), 0.5 * dirs, dirs])


def _noise_floor(f: FunctionHandle, x: np.ndarray) -> float:
    """Roundoff scale of the quotient at the deepest default step: one ulp
    of f(x) divided by t^2/2 at t = 2^-18 is ~1.5e-5 per unit of |f|."""
    fx = float(f(x))
    if not np.isfinite(fx):
        return 0.0
    return 1e-4 * max(1.0, abs(fx))


def _classify_levels(
    levels: np.ndarray, cap: float, agree_tol: float, noise_floor: float = 0.0
) -> tuple[ExtendedReal, bool]:
    m = levels[np.isfinite(levels)]
    if m.size < 3 or levels[-1] >= cap or not np.isfinite(levels[-1]):
        return ExtendedReal.infinity(), False
    # a tail pinned at the quotient roundoff scale is a converged zero;
    # extrapolating it would amplify the oscillation into a fake offset
    if noise_floor > 0.0 and np.all(np.abs(m[-3:]) <= noise_floor):
        return ExtendedReal(0.0), False
    # divergence shows as sustained growth dominating the sqrt(t) bias decay
    if m.size >= 5:
        tail = m[-5:]
        increasing = bool(np.all(np.diff(tail) > 0))
        ratio = tail[-1] / max(abs(tail[0]), 1e-12)
        if increasing and tail[-1] > 50.0 and ratio >= 8.0:
            return ExtendedReal.infinity(), False
    # Richardson extrapolation in sqrt(t): m_k ~ q + C sqrt(t_k)
    root2 = np.sqrt(2.0)
    q_last = m[-1] + (m[-1] - m[-2]) / (root2 - 1.0)
    q_prev = m[-2] + (m[-2] - m[-3]) / (root2 - 1.0)
    low_confidence = abs(q_last - q_prev) > agree_tol * max(1.0, abs(q_last))
    return ExtendedReal(float(q_last)), low_confidence


def d2_estimate(
    f: FunctionHandle,
    x,
    v,
    w,
    schedule: Optional[np.ndarray] = None,
    window: float = 0.5,
    cap: float = INFINITY_CAP,
    agree_tol: float = 2e-3,
) -> D2Estimate:
    """Estimate of the second-order subderivative at (x, v) in direction w.

    Per step t the quotient is minimized over directions within
    window*sqrt(t) of w; the level trajectory is then classified.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))
    schedule = DEFAULT_SCHEDULE if schedule is None else np.asarray(schedule, dtype=np.float64)
    offsets = _window_offsets(x.shape[0])
    floor = _noise_floor(f, x)
    levels = np.empty(schedule.size)
    for i, t in enumerate(schedule):
        W = w[None, :] + (window * np.sqrt(t)) * offsets
        vals = delta2_batch(f, x, v, t, W)
        levels[i] = float(np.min(vals))
    value, low_confidence = _classify_levels(levels, cap, agree_tol, floor)
    return D2Estimate(value=value, low_confidence=low_confidence, levels=levels)


def d2(f: FunctionHandle, x, v, w, schedule=None, window: float = 0.5) -> ExtendedReal:
    return d2_estimate(f, x, v, w, schedule=schedule, window=window).value


def d2_profile(
    f: FunctionHandle,
    x,
    v,
    directions: np.ndarray,
    schedule: Optional[np.ndarray] = None,
    window: float = 0.5,
    cap: float = INFINITY_CAP,
) -> list:
    """D2Estimates for each direction row, batching evaluations per level."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    directions = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    schedule = DEFAULT_SCHEDULE if schedule is None else np.asarray(schedule, dtype=np.float64)
    offsets = _window_offsets(x.shape[0])
    floor = _noise_floor(f, x)
    ndir, noff = directions.shape[0], offsets.shape[0]
    levels = np.empty((schedule.size, ndir))
    for i, t in enumerate(schedule):
        W = directions[:, None, :] + (window * np.sqrt(t)) * offsets[None, :, :]
        vals = delta2_batch(f, x, v, t, W.reshape(ndir * noff, -1))
        levels[i] = vals.reshape(ndir, noff).min(axis=1)
    out = []
    for j in range(ndir):
        value, low = _classify_levels(levels[:, j], cap, 2e-3, floor)
        out.append(D2Estimate(value=value, low_confidence=low, levels=levels[:, j]))
    return out


def twice_epi_diff_probe(
    f: FunctionHandle,
    x,
    v,
    box=None,
    pts_per_axis: int = 21,
    schedule: Optional[np.ndarray] = None,
    tol: float = 2e-2,
) -> tuple[bool, dict]:
    """Tests two-sided epi-convergence of the quotient family toward the
    estimated subderivative on a direction grid."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    dim = x.shape[0]
    if box is None:
        box = np.tile(np.array([-1.2, 1.2]), (dim, 1))
    schedule = DEFAULT_SCHEDULE if schedule is None else np.asarray(schedule, dtype=np.float64)
    grid = box_grid(np.asarray(box)[:, 0], np.asarray(box)[:, 1], pts_per_axis)
    ests = d2_profile(f, x, v, grid, schedule=schedule)
    target = np.array([float(e.value) for e in ests])

    def limit_fn(W):
        W = np.atleast_2d(W)
        if W.shape[0] != grid.shape[0] or not np.allclose(W, grid):
            raise ValueError("probe limit is defined on the probe grid only")
        return target

    family = [
        (lambda t: (lambda W: delta2_batch(f, x, v, t, np.atleast_2d(W))))(t)
        for t in schedule
    ]
    ok, cert = epi_converges(family, limit_fn, box, tol=tol, grid=grid)
    cert["n_infinite_directions"] = int(np.sum(~np.isfinite(target)))
    return ok, cert


#### generalized quadratic forms ####


def _canonical_basis(basis: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of span(basis) with sign fixing."""
    n, d = basis.shape
    if d == 0:
        return np.zeros((n, 0))
    proj = basis @ basis.T
    evals, evecs = np.linalg.eigh(proj)
    cols = evecs[:, evals > 0.5]
    order = np.lexsort(np.round(cols, 12))
    cols = cols[:, order[::-1]] if cols.shape[1] > 1 else cols
    fixed = []
    for j in range(cols.shape[1]):
        c = cols[:, j]
        k = int(np.argmax(np.abs(c) > 1e-9))
        if c[k] < 0:
            c = -c
        fixed.append(c)
    return np.column_stack(fixed)


@dataclass(frozen=True, eq=False)
class GeneralizedQuadraticForm:
    """q(w) = <w, A w> for w in L, +inf otherwise; A stored compressed
    onto L (A = Q A Q with Q the orthoprojector)."""

    A: np.ndarray
    L_basis: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        B = np.asarray(self.L_basis, dtype=np.float64)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if A.ndim == 0:
            A = A.reshape(1, 1)
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError("A must be square")
        if np.linalg.norm(A - A.T) > 1e-12 * max(1.0, np.linalg.norm(A)):
            raise ValueError("A must be symmetric")
        if B.shape[0] != n:
            raise ValueError("L_basis rows must match A")
        if B.shape[1] > 0:
            gram = B.T @ B
            if np.linalg.norm(gram - np.eye(B.shape[1])) > 1e-10:
                raise ValueError("L_basis columns must be orthonormal")
        B = _canonical_basis(B)
        Q = B @ B.T
        A = Q @ ((A + A.T) / 2.0) @ Q
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "L_basis", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def subspace_dim(self) -> int:
        return self.L_basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.L_basis @ self.L_basis.T

    def __call__(self, w) -> ExtendedReal:
        w = np.atleast_1d(np.asarray(w, dtype=np.float64))
        resid = w - self.projector @ w
        if np.linalg.norm(resid) > 1e-9 * max(1.0, np.linalg.norm(w)):
            return ExtendedReal.infinity()
        return ExtendedReal(float(w @ self.A @ w))

    def distance(self, other: "GeneralizedQuadraticForm") -> float:
        dq = np.linalg.norm(self.projector - other.projector, 2)
        da = np.linalg.norm(self.A - other.A, 2)
        return float(dq + da)

    def is_close(self, other: "GeneralizedQuadraticForm", tol: float = 5e-2) -> bool:
        return self.distance(other) <= tol

    def restricted_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the form on L (empty for L = {0})."""
        B = self.L_basis
        if B.shape[1] == 0:
            return np.zeros(0)
        return np.linalg.eigvalsh(B.T @ self.A @ B)

    def to_dict(self) -> dict:
        return {
            "A": [float(v) for v in self.A.ravel()],
            "L_basis": [float(v) for v in self.L_basis.ravel()],
            "n": self.n,
            "L_dim": self.subspace_dim,
        }

    @staticmethod
    def from_dict(d: dict) -> "GeneralizedQuadraticForm":
        n = int(d["n"])
        ld = int(d["L_dim"])
        A = np.asarray(d["A"], dtype=np.float64).reshape(n, n)
        B = np.asarray(d["L_basis"], dtype=np.float64).reshape(n, ld)
        return GeneralizedQuadraticForm(A=A, L_basis=B)

    def __repr__(self):
        if self.subspace_dim == 0:
            return f"GQF(delta_0, n={self.n})"
        return f"GQF(A={np.round(self.A, 6).tolist()}, L_dim={self.subspace_dim})"


def gqf_fit(
    samples: Sequence[tuple],
    fit_tol: float = 1e-2,
    cap: float = INFINITY_CAP,
    angle_tol: float = 1e-6,
    zero_floor: float = 2e-4,
) -> GeneralizedQuadraticForm:
    """Fit a generalized quadratic form to (direction, value) samples.

    The finite-direction set must be antipodally symmetric and fill a
    subspace (no holes among sampled directions inside the span); the
    quadratic is then fitted by least squares on the span.  Values whose
    magnitudes all sit below zero_floor (the subderivative estimator's
    noise scale) are the zero form on that span.  Raises
    NotQuadraticError with reasons 'asymmetric-finiteness',
    'not-a-subspace', or 'residual'.
    """
    ws = np.atleast_2d(np.asarray([np.atleast_1d(w) for w, _ in samples], dtype=np.float64))
    vals = np.asarray([float(v) for _, v in samples], dtype=np.float64)
    n = ws.shape[1]
    finite = np.isfinite(vals) & (np.abs(vals) < cap)

    norms = np.linalg.norm(ws, axis=1)
    nonzero = norms > 1e-12
    # antipodal symmetry of finiteness
    for i in np.nonzero(nonzero)[0]:
        d = ws[i] / norms[i]
        anti = nonzero & (np.linalg.norm(ws + norms[i] * d[None, :], axis=1) < 1e-9)
        if anti.any() and bool(finite[i]) != bool(finite[anti].any()):
            raise NotQuadraticError(
                "asymmetric-finiteness",
                f"w={ws[i].tolist()} finite={bool(finite[i])} but -w disagrees",
            )

    fin_dirs = ws[finite & nonzero]
    if fin_dirs.shape[0] == 0:
        zero_sampled_finite = bool(finite[~nonzero].any()) if (~nonzero).any() else False
        if not zero_sampled_finite:
            raise NotQuadraticError("residual", "no finite samples at all")
        return GeneralizedQuadraticForm(A=np.zeros((n, n)), L_basis=np.zeros((n, 0)))

    u, s, vt = np.linalg.svd(fin_dirs, full_matrices=False)
    rank = int(np.sum(s > 1e-8 * s[0]))
    B = vt[:rank].T

    # subspace closure: every sampled direction inside span(B) must be finite
    Q = B @ B.T
    inside = np.linalg.norm(ws - ws @ Q.T, axis=1) <= angle_tol * np.maximum(norms, 1e-12)
    holes = inside & nonzero & ~finite
    if holes.any():
        j = int(np.argmax(holes))
        raise NotQuadraticError(
            "not-a-subspace",
            f"direction {ws[j].tolist()} lies in the finite span but has an infinite value",
        )

    if float(np.max(np.abs(vals[finite]))) <= zero_floor:
        return GeneralizedQuadraticForm(A=np.zeros((n, n)), L_basis=B)

    # least squares of <w, A w> over the span, A = B S B^T
    d = B.shape[1]
    idx = [(i, j) for i in range(d) for j in range(i, d)]
    C = ws[finite] @ B
    rows = np.empty((C.shape[0], len(idx)))
    for col, (i, j) in enumerate(idx):
        rows[:, col] = C[:, i] * C[:, j] * (1.0 if i == j else 2.0)
    coef, *_ = np.linalg.lstsq(rows, vals[finite], rcond=None)
    S = np.zeros((d, d))
    for col, (i, j) in enumerate(idx):
        S[i, j] = coef[col]
        S[j, i] = coef[col]
    pred = np.einsum("ki,ij,kj->k", C, S, C)
    scale = max(float(np.linalg.norm(vals[finite])), 1e-12)
    rel = float(np.linalg.norm(pred - vals[finite])) / scale
    if rel >= fit_tol:
        raise NotQuadraticError("residual", f"relative fit residual {rel:.3g} >= {fit_tol}")
    return GeneralizedQuadraticForm(A=B @ S @ B.T, L_basis=B)


def gqf_half_envelope(q: GeneralizedQuadraticForm, lam: float, w) -> float:
    """Moreau envelope of the halved form: min over u in L of
    (1/2)<u, A u> + ||u - w||^2 / (2 lam)."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))
    B = q.L_basis
    if B.shape[1] == 0:
        return float(w @ w) / (2.0 * lam)
    M = B.T @ q.A @ B + (1.0 / lam) * np.eye(B.shape[1])
    evals = np.linalg.eigvalsh(M)
    if evals.min() <= 1e-12:
        raise EnvelopeUnboundedError(
            f"form eigenvalues reach {evals.min() - 1.0 / lam:.6g} <= -1/lam on L"
        )
    c = np.linalg.solve(M, (1.0 / lam) * (B.T @ w))
    u = B @ c
    return float(0.5 * (u @ q.A @ u) + ((u - w) @ (u - w)) / (2.0 * lam))


#### quadratic-form inequalities and extensions ####


def gen_cs(A: np.ndarray, x, y) -> tuple[float, float]:
    """lhs = <x,Ax> + <y,A^{-1}y> and rhs = 2<x,y>; lhs >= rhs for SPD A."""
    A = np.asarray(A, dtype=np.float64)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if np.linalg.norm(A - A.T) > 1e-10 * max(1.0, np.linalg.norm(A)):
        raise PreconditionError("gen_cs requires a symmetric matrix")
    evals = np.linalg.eigvalsh(A)
    if evals.min() <= 0:
        raise PreconditionError(f"gen_cs requires SPD; min eigenvalue {evals.min():.6g}")
    lhs = float(x @ A @ x + y @ np.linalg.solve(A, y))
    rhs = float(2.0 * (x @ y))
    return lhs, rhs


def extend_posdef(A: np.ndarray, L_basis: np.ndarray, sigma: float) -> np.ndarray:
    """Extend a form bounded below by sigma on L to all of space:
    B = QAQ + sigma (I - Q).  The bound on L is verified first."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(L_basis, dtype=np.float64)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    n = A.shape[0]
    if B.shape[1] == 0:
        return sigma * np.eye(n)
    M = B.T @ ((A + A.T) / 2.0) @ B
    evals, evecs = np.linalg.eigh(M)
    if evals.min() < sigma - 1e-10:
        w = B @ evecs[:, 0]
        raise PreconditionError(
            f"form value {evals.min():.6g} < sigma={sigma} at w={np.round(w, 6).tolist()}"
        )
    Q = B @ B.T
    return Q @ ((A + A.T) / 2.0) @ Q + sigma * (np.eye(n) - Q)


def d2_sum_rule_check(
    f_smooth: FunctionHandle,
    g: FunctionHandle,
    x,
    v_g,
    directions: Optional[np.ndarray] = None,
    tol: float = 1e-2,
    cap: float = INFINITY_CAP,
) -> tuple[bool, list]:
    """Checks d2(f+g) = <w, Hf w> + d2(g) at (x, grad f(x) + v_g) on a grid.

    Infinite values must match on both sides; finite values must agree
    within tol relative.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    v_g = np.atleast_1d(np.asarray(v_g, dtype=np.float64))
    H = f_smooth.hess_at(x)
    grad = f_smooth.grad_at(x)
    if H is None or grad is None:
        raise PreconditionError("sum rule needs gradient and hessian oracles on the smooth part")
    if directions is None:
        directions = sphere_directions(x.shape[0], 2 if x.shape[0] == 1 else 16)

    total = FunctionHandle(
        name=f"{f_smooth.name}+{g.name}",
        dim=g.dim,
        value=lambda pts: np.asarray(f_smooth(pts)) + np.asarray(g(pts)),
        domain_box=np.column_stack(
            [
                np.maximum(f_smooth.domain_box[:, 0], g.domain_box[:, 0]),
                np.minimum(f_smooth.domain_box[:, 1], g.domain_box[:, 1]),
            ]
        ),
    )
    lhs_profile = d2_profile(total, x, grad + v_g, directions)
    rhs_profile = d2_profile(g, x, v_g, directions)
    ok = True
    witnesses = []
    for wdir, le, re_ in zip(directions, lhs_profile, rhs_profile):
        lhs = le.value
        quad_term = float(wdir @ H @ wdir)
        if re_.value.is_infinite or lhs.is_infinite:
            match = re_.value.is_infinite == lhs.is_infinite
        else:
            rhs = quad_term + float(re_.value)
            match = abs(float(lhs) - rhs) <= tol * max(1.0, abs(rhs))
        if not match:
            ok = False
            witnesses.append(
                {
                    "w": wdir.tolist(),
                    "lhs": float(lhs) if lhs.is_finite else "inf",
                    "rhs": (quad_term + float(re_.value)) if re_.value.is_finite else "inf",
                }
            )
    return ok, witnesses
