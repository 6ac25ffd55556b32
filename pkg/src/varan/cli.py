"""Batch driver.

Verbs: analyze (full per-anchor pipeline with report files), bundle,
tilt, cnv (single components), suite (acceptance / properties /
corpus-sweep batteries), corpus-list.  Exit codes: 0 ok, 1 criterion
failure, 2 config error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import datetime
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from .bundles import QuadraticBundleConfig, quad_bundle, uniform_lower_bound
from .config import RunConfig, load_config
from .corpus import corpus_get, corpus_names
from .errors import (
    ConfigError,
    EmptyBundleError,
    NonDifferentiablePointError,
    NotQuadraticError,
    RegistryError,
    VaranError,
)
from .funcspace import FunctionHandle, SubgradientPair
from .gridutil import sphere_directions
from .moreau import c11_probe, default_lambda, envelope, envelope_gradient, prox
from .report import (
    dumps_canonical,
    write_bundle_members_csv,
    write_d2_samples_csv,
    write_json,
)
from .secondorder import d2_profile, delta2_batch, gqf_fit
from .stability import cnv_estimate, theorem46_crosscheck, theorem52_crosscheck, tilt_check

EXIT_OK = 0
EXIT_CRITERION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _max_workers() -> int:
    raw = os.environ.get("VARAN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"VARAN_THREADS: expected an integer, got {raw!r}") from None


def _resolve_handle(cfg: RunConfig) -> FunctionHandle:
    try:
        return corpus_get(cfg.function, **cfg.params).handle
    except RegistryError as exc:
        raise ConfigError(f"function.name: {exc}") from exc


def _component(report: dict, key: str, fn):
    """Run one pipeline component, embedding failures instead of dying."""
    try:
        report[key] = fn()
    except VaranError as exc:
        report[key] = {"status": "error", "error": type(exc).__name__, "message": str(exc)}


#### analyze pipeline ####


def run_analyze(cfg: RunConfig, out_dir: Optional[str] = None) -> dict:
    """Full per-anchor pipeline; writes report.json, bundle_members.csv,
    d2_samples.csv, and epi_certificates.json under the output directory."""
    f = _resolve_handle(cfg)
    if len(cfg.anchor_x) != f.dim:
        raise ConfigError(f"anchor.x: expected dim {f.dim}, got {len(cfg.anchor_x)}")
    out = out_dir or cfg.out
    os.makedirs(out, exist_ok=True)
    fx = f.anchor_value(cfg.x)
    anchor = SubgradientPair(cfg.x, cfg.v, fx)
    lam = cfg.lam if cfg.lam is not None else default_lambda(f)
    report: dict = {
        "function": f.name,
        "params": dict(f.params),
        "anchor": {"x": cfg.x.tolist(), "v": cfg.v.tolist(), "fx": fx},
        "lambda": float(lam),
        "config": cfg.to_dict(),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }

    zbar = cfg.x + lam * cfg.v

    def prox_diag():
        res = prox(f, lam, zbar)
        diag = {
            "z": zbar.tolist(),
            "minimizers": res.minimizers.tolist(),
            "multivalued": res.multivalued,
            "envelope": float(envelope(f, lam, zbar)),
            "certificate": res.certificate,
        }
        try:
            diag["envelope_gradient"] = envelope_gradient(f, lam, zbar).tolist()
        except NonDifferentiablePointError:
            diag["envelope_gradient"] = None
        diag["c11_lipschitz"] = float(c11_probe(f, lam, cfg.x))
        return diag

    _component(report, "prox", prox_diag)

    bundle_cfg = QuadraticBundleConfig(
        rho0=cfg.bundle_rho0,
        levels=cfg.bundle_levels,
        per_shell=cfg.bundle_per_shell,
        variant=cfg.bundle_variant,
    )
    bundle_box: dict = {}

    def bundle_diag():
        b = quad_bundle(f, anchor, lam, bundle_cfg)
        bundle_box["bundle"] = b
        return {
            "variant": b.variant,
            "n_members": len(b.members),
            "members": [q.to_dict() for q in b.members],
            "mu": float(uniform_lower_bound(b)),
            "certificate": b.certificate,
        }

    _component(report, "bundle", bundle_diag)

    dirs = sphere_directions(f.dim, 2 if f.dim == 1 else cfg.d2_directions)
    d2_box: dict = {}

    def d2_diag():
        prof = d2_profile(f, cfg.x, cfg.v, dirs)
        d2_box["profile"] = prof
        finite = [float(e.value) for e in prof if e.value.is_finite]
        return {
            "n_directions": int(dirs.shape[0]),
            "n_finite": len(finite),
            "min_finite": min(finite) if finite else None,
            "low_confidence": int(sum(e.low_confidence for e in prof)),
        }

    _component(report, "d2", d2_diag)

    _component(
        report,
        "modulus",
        lambda: theorem46_crosscheck(
            f, anchor, lam=lam, epsilon=cfg.epsilon, radius=cfg.svar_radius
        ).to_dict(),
    )

    if float(np.linalg.norm(cfg.v)) <= 1e-12:
        _component(
            report,
            "tilt",
            lambda: theorem52_crosscheck(
                f, cfg.x, lam=lam, delta=cfg.delta, v_radius=cfg.tilt_v_radius
            ).to_dict(),
        )
    else:
        report["tilt"] = {"status": "skipped", "message": "tilt analysis anchors at v = 0"}

    def epi_diag():
        from .epi import epi_converges

        prof = d2_box.get("profile")
        if prof is None:
            raise EmptyBundleError("no second-order profile available")
        samples = list(zip(dirs, [e.value for e in prof]))
        q = gqf_fit(samples)  # may raise NotQuadraticError
        ts = 0.5 ** np.arange(2, 2 + cfg.epi_levels)

        def family(t):
            return lambda pts: delta2_batch(f, cfg.x, cfg.v, float(t), np.atleast_2d(pts))

        def target(pts):
            pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
            return np.array([float(q(p)) for p in pts])

        box = [[-1.2, 1.2]] * f.dim
        ok, cert = epi_converges(
            [family(t) for t in ts], target, box, pts_per_axis=cfg.epi_pts_per_axis
        )
        return {"quotients_epi_converge": bool(ok), "limit": q.to_dict(), "certificate": cert}

    try:
        report["epi"] = epi_diag()
    except NotQuadraticError as exc:
        report["epi"] = {
            "status": "skipped",
            "message": f"second-order limit is not a generalized quadratic ({exc})",
        }
    except VaranError as exc:
        report["epi"] = {"status": "error", "error": type(exc).__name__, "message": str(exc)}

    write_json(os.path.join(out, "report.json"), report)
    b = bundle_box.get("bundle")
    write_bundle_members_csv(
        os.path.join(out, "bundle_members.csv"), b.members if b is not None else []
    )
    prof = d2_box.get("profile")
    write_d2_samples_csv(
        os.path.join(out, "d2_samples.csv"), dirs if prof is not None else np.zeros((0, f.dim)),
        prof or [],
    )
    write_json(
        os.path.join(out, "epi_certificates.json"),
        {"function": f.name, "epi": report["epi"]},
    )
    return report


#### suites ####


def _print_criteria(results) -> None:
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(
            f"criterion {r.number:2d} [{status}] {r.name}: measured={r.measured} "
            f"expected={r.expected} tol={r.tolerance} ({r.runtime:.1f}s)"
        )


def run_suite(name: str, out: Optional[str] = None, fast: bool = False) -> int:
    if name == "acceptance":
        from .acceptance import run_acceptance

        results = run_acceptance(fast=fast)
        _print_criteria(results)
        n_failed = sum(not r.passed for r in results)
        print(f"acceptance: {len(results) - n_failed}/{len(results)} criteria passed")
        if out:
            write_json(
                os.path.join(out, "acceptance.json"),
                {"results": [r.to_dict() for r in results]},
            )
        return EXIT_OK if n_failed == 0 else EXIT_CRITERION

    if name == "properties":
        from .acceptance import run_properties

        rows, ok = run_properties()
        for row in rows:
            print(f"property [{'PASS' if row['passed'] else 'FAIL'}] {row['name']}: {row['detail']}")
        print(f"properties: {sum(r['passed'] for r in rows)}/{len(rows)} passed")
        if out:
            write_json(os.path.join(out, "properties.json"), {"results": rows})
        return EXIT_OK if ok else EXIT_CRITERION

    if name == "corpus-sweep":
        out = out or "runs/sweep"
        names = [n for n in corpus_names() if not corpus_get(n).negative]
        jobs = []
        for n in names:
            entry = corpus_get(n)
            for i, a in enumerate(entry.anchors):
                cfg = RunConfig(
                    function=n,
                    anchor_x=tuple(a.x.tolist()),
                    anchor_v=tuple(a.v.tolist()),
                    epsilon=a.epsilon,
                    out=os.path.join(out, f"{n}_anchor{i}"),
                )
                jobs.append(cfg)

        def run_one(cfg: RunConfig):
            try:
                run_analyze(cfg)
                return cfg.out, "ok"
            except VaranError as exc:
                return cfg.out, f"error: {exc}"

        with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
            outcomes = list(pool.map(run_one, jobs))
        for path, status in outcomes:
            print(f"{path}: {status}")
        return EXIT_OK

    raise ConfigError(f"suite: unknown suite {name!r} (acceptance|properties|corpus-sweep)")


#### argument parsing ####


def _parse_kv(items) -> dict:
    params = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--param {item!r}: expected k=v")
        k, raw = item.split("=", 1)
        from .config import _parse_scalar

        params[k.strip()] = _parse_scalar(raw)
    return params


def _parse_vec(raw: Optional[str]):
    if raw is None:
        return None
    parts = [p for chunk in raw.split(",") for p in chunk.split()]
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"expected a numeric vector, got {raw!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="varan", description=__doc__)
    sub = ap.add_subparsers(dest="verb", required=True)

    def add_common(p, with_anchor=True):
        p.add_argument("--config", help="run-config file (sectioned key = value)")
        p.add_argument("--func", help="corpus function name")
        p.add_argument("--param", action="append", help="function parameter k=v")
        if with_anchor:
            p.add_argument("--anchor", help="anchor point, comma-separated")
            p.add_argument("--subgrad", help="anchor subgradient, comma-separated")
        p.add_argument("--lambda", dest="lam", type=float, help="proximal parameter")
        p.add_argument("--epsilon", type=float, help="attentive localization budget")
        p.add_argument("--delta", type=float, help="tilt neighborhood radius")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="seed for randomized property sweeps")

    p = sub.add_parser("analyze", help="full pipeline with report files")
    add_common(p)
    p = sub.add_parser("bundle", help="quadratic bundle at the anchor")
    add_common(p)
    p.add_argument("--variant", choices=("revised", "original"), default=None)
    p = sub.add_parser("tilt", help="tilt-stability check at the anchor point")
    add_common(p)
    p = sub.add_parser("cnv", help="difference-quotient modulus at the anchor")
    add_common(p)
    p = sub.add_parser("suite", help="run a named battery")
    p.add_argument("--suite", required=True, help="acceptance | properties | corpus-sweep")
    p.add_argument("--out", help="output directory")
    p.add_argument("--fast", action="store_true", help="reduced grids where allowed")
    sub.add_parser("corpus-list", help="list corpus entries")
    return ap


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.func:
        cfg.function = args.func
    if args.param:
        cfg.params.update(_parse_kv(args.param))
    anchor = _parse_vec(getattr(args, "anchor", None))
    if anchor is not None:
        cfg.anchor_x = anchor
        if len(cfg.anchor_v) != len(anchor):
            cfg.anchor_v = (0.0,) * len(anchor)
    sub = _parse_vec(getattr(args, "subgrad", None))
    if sub is not None:
        cfg.anchor_v = sub
    if args.lam is not None:
        cfg.lam = args.lam
    if args.epsilon is not None:
        cfg.epsilon = args.epsilon
    if args.delta is not None:
        cfg.delta = args.delta
    if args.out:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        if args.verb == "corpus-list":
            for name in corpus_names():
                entry = corpus_get(name)
                kind = "negative-control" if entry.negative else f"{len(entry.anchors)} anchors"
                print(f"{name:24s} dim={entry.handle.dim} {kind:18s} {entry.description}")
            return EXIT_OK
        if args.verb == "suite":
            return run_suite(args.suite, out=args.out, fast=args.fast)
        cfg = _config_from_args(args)
        if args.verb == "analyze":
            report = run_analyze(cfg)
            print(f"report written to {cfg.out}")
            mod = report.get("modulus", {})
            if "s_direct" in mod:
                print(
                    f"s_direct={mod.get('s_direct')} mu={mod.get('mu')} cnv={mod.get('cnv')}"
                )
            return EXIT_OK
        f = _resolve_handle(cfg)
        if len(cfg.anchor_x) != f.dim:
            raise ConfigError(f"anchor.x: expected dim {f.dim}, got {len(cfg.anchor_x)}")
        anchor = SubgradientPair(cfg.x, cfg.v, f.anchor_value(cfg.x))
        lam = cfg.lam if cfg.lam is not None else default_lambda(f)
        if args.verb == "bundle":
            variant = args.variant or cfg.bundle_variant
            b = quad_bundle(
                f,
                anchor,
                lam,
                QuadraticBundleConfig(
                    rho0=cfg.bundle_rho0,
                    levels=cfg.bundle_levels,
                    per_shell=cfg.bundle_per_shell,
                    variant=variant,
                ),
            )
            print(f"{f.name}: {len(b.members)} members (variant {b.variant})")
            for q in b.members:
                print(f"  {q!r}")
            print(f"mu = {uniform_lower_bound(b)}")
            if cfg.out and args.out:
                write_bundle_members_csv(os.path.join(cfg.out, "bundle_members.csv"), b.members)
            return EXIT_OK
        if args.verb == "tilt":
            rep = theorem52_crosscheck(f, cfg.x, lam=lam, delta=cfg.delta, v_radius=cfg.tilt_v_radius)
            print(dumps_canonical(rep.to_dict()))
            return EXIT_OK
        if args.verb == "cnv":
            res = cnv_estimate(f, anchor)
            print(f"cnv = {res.value:.10g} low_confidence={res.low_confidence}")
            print(f"stages = {[round(s, 8) for s in res.stages]}")
            return EXIT_OK
        raise ConfigError(f"unknown verb {args.verb!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VaranError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
