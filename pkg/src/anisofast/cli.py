"""Command-line entry point.

Subcommands: exponents, barriers, evolve, relax, verify,
verify-attraction, export-levels. Every run writes its outputs plus a
JSON manifest into --out; verify suites print one PASS/FAIL line per
check and exit nonzero on any failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import analysis, barriers, rescaled
from ._accel import USING_NUMBA, set_threads
from .config import describe_schema, grid as cfg_grid, load_config, model_params, solver_config
from .contours import export_levels
from .exponents import compute_exponents, scaling_family, validate_params
from .grids import Field, Grid
from .io import read_field_csv, write_contours_csv, write_diagnostics_csv, write_field_csv
from .manifest import RunManifest, content_hash
from .solver import SolverConfig, energy_check, init_data, run

__all__ = ["main"]


def _ensure_out(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _exponent_table(e) -> dict:
    return {
        "ndim": e.ndim,
        "m": list(e.m),
        "mbar": e.mbar,
        "mc": e.mc,
        "alpha": e.alpha,
        "sigma": list(e.sigma),
        "a": list(e.a),
        "gamma_stat": list(e.gamma_stat),
        "beta": e.beta,
    }


def _print_exponents(e) -> None:
    print(f"ndim = {e.ndim},  m = {e.m},  mbar = {e.mbar:.12g},  mc = {e.mc:.12g}")
    print(f"alpha = {e.alpha:.15g},  beta = {e.beta:.15g}")
    for i in range(e.ndim):
        print(
            f"  axis {i}:  sigma = {e.sigma[i]:.15g}  a = {e.a[i]:.15g}"
            f"  gamma_stat = {e.gamma_stat[i]:.15g}"
        )


# ---------------------------------------------------------------------------
# subcommands

def _cmd_exponents(args, cfg) -> int:
    params = model_params(cfg)
    report = validate_params(params)
    if not report.ok:
        print(f"invalid parameters ({report.failed}): {report.detail}")
        return 1
    e = compute_exponents(params)
    _print_exponents(e)
    out = _ensure_out(args.out)
    path = os.path.join(out, "exponents.json")
    with open(path, "w") as fh:
        json.dump(_exponent_table(e), fh, indent=2, sort_keys=True)
        fh.write("\n")
    man = RunManifest(
        command="exponents",
        config=cfg,
        inputs_hash=content_hash(cfg),
        threads=args.threads,
        seed=args.seed,
        exponents=_exponent_table(e),
    )
    man.add_output(path)
    man.save(os.path.join(out, "manifest.json"))
    print(f"wrote {path}")
    return 0


def _cmd_barriers(args, cfg) -> int:
    t0 = time.perf_counter()
    params = model_params(cfg)
    e = compute_exponents(params)
    slack = cfg["barrier_slack"]
    rng = np.random.default_rng(args.seed)
    out = _ensure_out(args.out)
    results: dict = {}

    upper = barriers.select_upper_params(e, slack=slack)
    print(
        f"upper barrier: delta = {upper.delta:g}, theta = {tuple(round(t, 6) for t in upper.theta)}, "
        f"r = {upper.r:.6g}, cap = {upper.f_star:.6g}"
    )
    results["upper"] = {
        "delta": upper.delta,
        "theta": list(upper.theta),
        "r": upper.r,
        "f_star": upper.f_star,
    }
    pts = barriers.sample_outer_points(upper, e.ndim, 1000, rng, min_coord=1e-2)
    h = 1e-4
    res, scale = barriers.stationary_residual(
        lambda p: barriers.eval_upper(upper, p), e, pts, h
    )
    tol = barriers.residual_tolerance(h, scale)
    bad_up = int((res > tol).sum())
    print(f"  residual sign (<= tol) holds at {1000 - bad_up}/1000 outer points")
    results["upper"]["sign_violations"] = bad_up
    rows = ["s,residual,tol"]
    svals = (np.abs(pts) ** np.array(upper.theta)[None, :]).sum(axis=1)
    order = np.argsort(svals, kind="stable")
    for k in order:
        rows.append(f"{svals[k]:.17g},{res[k]:.17g},{tol[k]:.17g}")
    upper_csv = os.path.join(out, "upper_residuals.csv")
    with open(upper_csv, "w", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")

    lower_csv = None
    if all(mi < 1.0 for mi in e.m):
        lower = barriers.select_lower_params(e, slack=slack)
        print(
            f"lower barrier: gamma = {lower.gamma:.6g}, "
            f"vartheta = {tuple(round(t, 6) for t in lower.vartheta)}, "
            f"A0 = {lower.A0:.6g}, A = {lower.A:.6g}"
        )
        results["lower"] = {
            "gamma": lower.gamma,
            "vartheta": list(lower.vartheta),
            "A0": lower.A0,
            "A": lower.A,
        }
        pts_l = barriers.sample_box_points(e.ndim, 1000, rng, box=2.0, min_coord=1e-2)
        res_l, scale_l = barriers.stationary_residual(
            lambda p: barriers.eval_lower(lower, p), e, pts_l, h
        )
        tol_l = barriers.residual_tolerance(h, scale_l)
        bad_lo = int((res_l < -tol_l).sum())
        print(f"  residual sign (>= -tol) holds at {1000 - bad_lo}/1000 box points")
        results["lower"]["sign_violations"] = bad_lo
        rows = ["s,residual,tol"]
        svals = (np.abs(pts_l) ** np.array(lower.vartheta)[None, :]).sum(axis=1)
        order = np.argsort(svals, kind="stable")
        for k in order:
            rows.append(f"{svals[k]:.17g},{res_l[k]:.17g},{tol_l[k]:.17g}")
        lower_csv = os.path.join(out, "lower_residuals.csv")
        with open(lower_csv, "w", newline="\n") as fh:
            fh.write("\n".join(rows) + "\n")
    else:
        print("lower barrier: skipped (needs every exponent below 1)")

    man = RunManifest(
        command="barriers",
        config=cfg,
        inputs_hash=content_hash(cfg),
        threads=args.threads,
        seed=args.seed,
        exponents=_exponent_table(e),
        results=results,
        timings={"total": time.perf_counter() - t0},
    )
    man.add_output(upper_csv)
    if lower_csv:
        man.add_output(lower_csv)
    man.save(os.path.join(out, "manifest.json"))
    ok = bad_up == 0 and (lower_csv is None or bad_lo == 0)
    return 0 if ok else 1


def _build_initial(cfg, g: Grid):
    params = model_params(cfg)
    kw = {}
    if cfg["kind"] == "barenblatt":
        if len(set(params.m)) != 1:
            raise SystemExit("barenblatt data need equal exponents")
        kw["m"] = params.m[0]
        kw["t_snap"] = cfg["t_start"]
    center = cfg["center"][0] if len(cfg["center"]) == 1 else cfg["center"]
    radius = cfg["radius"][0] if len(cfg["radius"]) == 1 else cfg["radius"]
    return init_data(
        cfg["kind"],
        g,
        mass=cfg["mass"],
        center=center,
        radius=radius,
        time=cfg["t_start"],
        **kw,
    )


def _cmd_evolve(args, cfg) -> int:
    t0 = time.perf_counter()
    params = model_params(cfg)
    e = compute_exponents(params)
    g = cfg_grid(cfg)
    u0 = _build_initial(cfg, g)
    scfg = solver_config(cfg)
    traj = run(u0, scfg, e)
    out = _ensure_out(args.out)
    man = RunManifest(
        command="evolve",
        config=cfg,
        inputs_hash=content_hash(cfg),
        threads=args.threads,
        seed=args.seed,
        exponents=_exponent_table(e),
    )
    diag_path = os.path.join(out, "diagnostics.csv")
    write_diagnostics_csv(diag_path, traj.diag)
    man.add_output(diag_path)
    for k, f in enumerate(traj.fields):
        p = os.path.join(out, f"field_{k:04d}.csv")
        write_field_csv(p, f)
        man.add_output(p)
    energy = energy_check(traj)
    worst = max(row["rel_violation"] for row in energy)
    mass0, mass1 = traj.diag.mass[0], traj.diag.mass[-1]
    man.results = {
        "steps": traj.diag.steps[-1],
        "mass_initial": mass0,
        "mass_final": mass1,
        "boundary_flux": traj.diag.boundary_flux_cum[-1],
        "energy_rel_violation": worst,
    }
    man.timings = {"total": time.perf_counter() - t0}
    man.save(os.path.join(out, "manifest.json"))
    print(
        f"evolved to t = {traj.diag.t[-1]:g} in {traj.diag.steps[-1]} steps; "
        f"mass {mass0:.6g} -> {mass1:.6g}, energy violation {worst:.3g}"
    )
    print(f"wrote {diag_path} and {len(traj.fields)} field snapshots")
    return 0


def _cmd_relax(args, cfg) -> int:
    t0 = time.perf_counter()
    params = model_params(cfg)
    e = compute_exponents(params)
    g = cfg_grid(cfg)
    radius = cfg["radius"][0] if len(cfg["radius"]) == 1 else cfg["radius"]
    est = rescaled.staged_relax(
        e,
        g,
        kind=cfg["kind"] if cfg["kind"] != "barenblatt" else "bump",
        mass=cfg["mass"],
        radius=radius,
        stages=tuple(cfg["stages"]),
        tol_rel=cfg["tol_rel"],
        check_every=cfg["check_every"],
        tau_max=cfg["tau_max"],
        cfg=solver_config(cfg, t_end=1.0),
    )
    out = _ensure_out(args.out)
    profile_path = os.path.join(out, "profile.csv")
    write_field_csv(profile_path, est.profile)
    report = {
        "converged": est.converged,
        "tau_final": est.tau_final,
        "rate_last": est.rate_last,
        "residual_l1": est.residual_l1,
        "mass": est.mass,
        "tails": [
            {"axis": tf.axis, "slope": tf.slope, "stderr": tf.stderr, "npts": tf.npts}
            for tf in est.tail
        ],
    }
    report_path = os.path.join(out, "relax_report.json")
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    man = RunManifest(
        command="relax",
        config=cfg,
        inputs_hash=content_hash(cfg),
        threads=args.threads,
        seed=args.seed,
        exponents=_exponent_table(e),
        results=report,
        timings={"total": time.perf_counter() - t0},
    )
    man.add_output(profile_path)
    man.add_output(report_path)
    man.save(os.path.join(out, "manifest.json"))
    status = "converged" if est.converged else "NOT converged"
    print(
        f"relaxation {status} at tau = {est.tau_final:g} "
        f"(rate {est.rate_last:.3g}, residual {est.residual_l1:.3g})"
    )
    for tf in est.tail:
        print(f"  axis {tf.axis}: tail slope {tf.slope:.4g} +- {tf.stderr:.2g}")
    print(f"wrote {profile_path}")
    return 0 if est.converged else 1


def _cmd_export_levels(args, cfg) -> int:
    f = read_field_csv(args.input)
    if cfg["levels"] is not None:
        levels = list(cfg["levels"])
    else:
        peak = float(f.values.max())
        levels = [frac * peak for frac in (0.1, 0.3, 0.5, 0.7, 0.9)]
    lines = export_levels(f, levels)
    out = _ensure_out(args.out)
    path = os.path.join(out, "contours.csv")
    write_contours_csv(path, lines)
    man = RunManifest(
        command="export-levels",
        config=cfg,
        inputs_hash=content_hash(cfg, (args.input,)),
        threads=args.threads,
        seed=args.seed,
        results={"levels": levels, "polylines": len(lines)},
    )
    man.add_output(path)
    man.save(os.path.join(out, "manifest.json"))
    print(f"extracted {len(lines)} polylines at {len(levels)} levels -> {path}")
    return 0


def _cmd_verify_attraction(args, cfg) -> int:
    from .exponents import ModelParams

    t0 = time.perf_counter()
    params = ModelParams(2, (0.75, 0.75))
    e = compute_exponents(params)
    g = Grid((12.0, 12.0), (97, 97))
    u0 = init_data("bump", g, mass=1.0, center=(1.5, -1.0), radius=1.0, time=1.0)
    scfg = SolverConfig(
        t_end=16.0, eps=1e-6 * float(u0.values.max()), record_times=(2.0, 4.0, 8.0)
    )
    traj = run(u0, scfg, e)
    C = barriers.barenblatt_mass_constant(0.75, 2, 1.0)

    def profile(pts):
        return barriers.barenblatt_profile(pts, 0.75, 2, C)

    rep = rescaled.attraction_check(traj, e, profile)
    drop = rep.sup_scaled[-1] / rep.sup_scaled[0]
    ok = drop <= 0.5
    line = "PASS" if ok else "FAIL"
    print(
        f"{line} attraction: t^alpha sup-distance ratio t=16 vs t=1 is {drop:.3f} "
        f"(need <= 0.5)"
    )
    out = _ensure_out(args.out)
    man = RunManifest(
        command="verify-attraction",
        config=cfg,
        inputs_hash=content_hash(cfg),
        threads=args.threads,
        seed=args.seed,
        exponents=_exponent_table(e),
        results={
            "times": list(rep.times),
            "sup_scaled": list(rep.sup_scaled),
            "l1": list(rep.l1),
            "ratio": drop,
            "ok": ok,
        },
        timings={"total": time.perf_counter() - t0},
    )
    man.save(os.path.join(out, "manifest.json"))
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# verify suites

def _suite_exponents(rng) -> list[tuple[str, bool, str]]:
    from .exponents import ModelParams

    checks = []
    worst = 0.0
    for _ in range(200):
        ndim = int(rng.integers(2, 4))
        while True:
            m = tuple(float(x) for x in rng.uniform(0.05, 1.0, size=ndim))
            params = ModelParams(ndim, m)
            if validate_params(params).ok:
                break
        e = compute_exponents(params)
        worst = max(worst, abs(sum(e.sigma) - 1.0))
        for i in range(ndim):
            worst = max(worst, abs(e.alpha * (m[i] - 1.0) + 2.0 * e.a[i] - 1.0))
    checks.append(
        ("exponent-identities", worst <= 1e-12, f"max identity error {worst:.2e}")
    )
    params = ModelParams(2, (0.6, 0.8))
    e = compute_exponents(params)
    fam = scaling_family(e, 1.0)
    agree = fam.alpha_c == e.alpha and fam.sigma_c == e.sigma
    checks.append(("scaling-family-anchor", agree, "c=1 reproduces the base exponents"))
    bad = validate_params(ModelParams(3, (0.1, 0.1, 0.1)))
    checks.append(
        (
            "subcritical-rejected",
            (not bad.ok) and bad.failed == "supercritical-mean",
            f"failed = {bad.failed}",
        )
    )
    return checks


def _suite_barriers(rng) -> list[tuple[str, bool, str]]:
    from .exponents import ModelParams

    checks = []
    e = compute_exponents(ModelParams(2, (0.6, 0.8)))
    # wide slack keeps the activation radius small enough that the
    # finite-difference residual is resolvable, not a vacuous pass
    upper = barriers.select_upper_params(e, slack=0.8)
    h = 1e-5
    pts = barriers.sample_outer_points(upper, 2, 300, rng, min_coord=1e-2)
    res, scale = barriers.stationary_residual(
        lambda p: barriers.eval_upper(upper, p), e, pts, h
    )
    tol = barriers.residual_tolerance(h, scale)
    bad = int((res > tol).sum())
    checks.append(("upper-sign", bad == 0, f"{bad}/300 violations"))
    lower = barriers.select_lower_params(e)
    pts = barriers.sample_box_points(2, 300, rng, box=2.0, min_coord=1e-2)
    res, scale = barriers.stationary_residual(
        lambda p: barriers.eval_lower(lower, p), e, pts, h
    )
    tol = barriers.residual_tolerance(h, scale)
    bad = int((res < -tol).sum())
    checks.append(("lower-sign", bad == 0, f"{bad}/300 violations"))
    windows = barriers.upper_window(e, 1.0)
    ok = all(lo < hi for lo, hi in windows)
    checks.append(("upper-window-nonempty", ok, f"windows {windows}"))
    checks.append(
        (
            "lower-offset-positive",
            lower.A0 > 0 and lower.A >= 2 * lower.A0 * (1 - 1e-12),
            f"A0 = {lower.A0:.6g}, A = {lower.A:.6g}",
        )
    )
    return checks


def _suite_conservation(rng) -> list[tuple[str, bool, str]]:
    from .exponents import ModelParams

    checks = []
    e = compute_exponents(ModelParams(2, (0.6, 0.8)))
    g = Grid((8.0, 8.0), (65, 65))
    u0 = init_data("bump", g, mass=1.0, radius=1.5, time=0.0)
    traj = run(u0, SolverConfig(t_end=0.5, record_every=0.1), e)
    drift = abs(
        traj.diag.mass[-1] - traj.diag.mass[0] - traj.diag.boundary_flux_cum[-1]
    )
    checks.append(
        ("mass-accounting", drift <= 1e-10, f"unaccounted mass {drift:.2e}")
    )
    worst = max(row["rel_violation"] for row in energy_check(traj))
    checks.append(("energy-inequality", worst <= 1e-3, f"max violation {worst:.2e}"))
    mono = analysis.lp_monotonicity(traj)
    bad = [k for k, ok in mono.items() if not ok]
    checks.append(("norm-monotonicity", not bad, f"violations: {bad or 'none'}"))
    low = min(traj.diag.min_interior)
    checks.append(("nonnegativity", low >= 0.0, f"min interior {low:.2e}"))
    return checks


def _suite_ordering(rng) -> list[tuple[str, bool, str]]:
    from .exponents import ModelParams

    checks = []
    e = compute_exponents(ModelParams(2, (0.75, 0.75)))
    g = Grid((8.0, 8.0), (65, 65))
    base = init_data("bump", g, mass=1.0, radius=1.8, time=0.0)
    bigger = Field(g, base.values * 1.3, time=0.0)
    eps = 1e-3 * float(bigger.values.max())
    from .kernels import phi_slope_max

    slopes = sum(phi_slope_max(mi, eps, 0.0) for mi in e.m)
    dt = 0.4 * min(h * h for h in g.spacing) / (2.0 * slopes)
    cfg = SolverConfig(
        t_end=0.4, eps=eps, dt_policy="fixed", dt=dt, record_every=0.1
    )
    t1 = run(base, cfg, e)
    t2 = run(bigger, cfg, e)
    worst = max(
        float((a.values - b.values).max())
        for a, b in zip(t1.fields, t2.fields)
    )
    checks.append(
        ("comparison-preserved", worst <= 1e-12, f"max overshoot {worst:.2e}")
    )
    rep = analysis.l1_contraction_check(t1, t2)
    checks.append(
        (
            "ordered-stay-ordered",
            rep.initially_ordered and rep.stayed_ordered,
            f"J series {tuple(round(v, 14) for v in rep.values)}",
        )
    )
    left = init_data("bump", g, mass=1.0, center=(-1.2, 0.0), radius=1.5, time=0.0)
    right = init_data("bump", g, mass=1.0, center=(1.2, 0.0), radius=1.5, time=0.0)
    t3 = run(left, cfg, e)
    t4 = run(right, cfg, e)
    rep = analysis.l1_contraction_check(t3, t4)
    decayed = rep.values[-1] <= 0.99 * rep.values[0]
    checks.append(
        (
            "crossing-contraction",
            rep.nonincreasing and decayed,
            f"J: {rep.values[0]:.4g} -> {rep.values[-1]:.4g}",
        )
    )
    return checks


def _suite_ssni(rng) -> list[tuple[str, bool, str]]:
    from .exponents import ModelParams

    checks = []
    e = compute_exponents(ModelParams(2, (0.6, 0.8)))
    g = Grid((6.0, 6.0), (65, 65))
    u0 = init_data("bump", g, mass=1.0, radius=1.5, time=0.0)
    rep0 = analysis.ssni_check(u0)
    checks.append(
        (
            "generator-ssni",
            rep0.symmetry_error == 0.0 and rep0.violations == 0,
            f"symmetry {rep0.symmetry_error:.2e}, violations {rep0.violations}",
        )
    )
    traj = run(u0, SolverConfig(t_end=0.25), e)
    rep = analysis.ssni_check(traj.final)
    checks.append(
        (
            "ssni-preserved",
            rep.symmetry_error <= 1e-10 and rep.violations == 0,
            f"symmetry {rep.symmetry_error:.2e}, violations {rep.violations}",
        )
    )
    shifted = init_data("bump", g, mass=1.0, center=(0.9, 0.0), radius=1.5, time=0.0)
    neg = analysis.ssni_check(shifted)
    checks.append(
        (
            "shifted-detected",
            neg.symmetry_error > 1e-3,
            f"symmetry error {neg.symmetry_error:.2e}",
        )
    )
    return checks


def _suite_quick(rng) -> list[tuple[str, bool, str]]:
    from .exponents import ModelParams

    checks = []
    worst = 0.0
    for _ in range(50):
        ndim = int(rng.integers(2, 4))
        while True:
            m = tuple(float(x) for x in rng.uniform(0.05, 1.0, size=ndim))
            params = ModelParams(ndim, m)
            if validate_params(params).ok:
                break
        e = compute_exponents(params)
        worst = max(worst, abs(sum(e.sigma) - 1.0))
        for i in range(ndim):
            worst = max(worst, abs(e.alpha * (m[i] - 1.0) + 2.0 * e.a[i] - 1.0))
    checks.append(
        ("exponent-identities", worst <= 1e-12, f"max identity error {worst:.2e}")
    )
    e = compute_exponents(ModelParams(2, (0.75, 0.75)))
    g = Grid((6.0, 6.0), (49, 49))
    u0 = init_data("bump", g, mass=1.0, radius=1.5, time=0.0)
    traj = run(u0, SolverConfig(t_end=0.2), e)
    drift = abs(
        traj.diag.mass[-1] - traj.diag.mass[0] - traj.diag.boundary_flux_cum[-1]
    )
    checks.append(("mass-accounting", drift <= 1e-10, f"unaccounted {drift:.2e}"))
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        p1 = os.path.join(tmp, "a.csv")
        p2 = os.path.join(tmp, "b.csv")
        write_field_csv(p1, traj.final)
        write_field_csv(p2, traj.final)
        with open(p1, "rb") as f1, open(p2, "rb") as f2:
            same = f1.read() == f2.read()
        back = read_field_csv(p1)
        roundtrip = np.array_equal(back.values, traj.final.values)
    checks.append(("csv-determinism", same, "two writes byte-identical"))
    checks.append(("csv-roundtrip", roundtrip, "values reproduced exactly"))
    return checks


_SUITES = {
    "quick": _suite_quick,
    "exponents": _suite_exponents,
    "barriers": _suite_barriers,
    "conservation": _suite_conservation,
    "ordering": _suite_ordering,
    "ssni": _suite_ssni,
}


def _cmd_verify(args, cfg) -> int:
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    checks = _SUITES[args.suite](rng)
    failures = 0
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += 0 if ok else 1
    out = _ensure_out(args.out)
    report = {
        "suite": args.suite,
        "checks": [
            {"name": name, "ok": ok, "detail": detail} for name, ok, detail in checks
        ],
        "failures": failures,
        "elapsed": time.perf_counter() - t0,
    }
    path = os.path.join(out, f"verify_{args.suite}.json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    man = RunManifest(
        command=f"verify --suite {args.suite}",
        config=cfg,
        inputs_hash=content_hash(cfg),
        threads=args.threads,
        seed=args.seed,
        results=report,
    )
    man.save(os.path.join(out, "manifest.json"))
    print(f"{len(checks) - failures}/{len(checks)} checks passed")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="key=value config file")
    common.add_argument("--out", default="anisofast_out", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="compute threads")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled points")

    parser = argparse.ArgumentParser(
        prog="anisofast",
        description="Anisotropic fast diffusion: simulation and verification.",
        epilog="config keys:\n" + describe_schema(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("exponents", parents=[common], help="self-similar exponent table")
    sub.add_parser("barriers", parents=[common], help="barrier constants and signs")
    sub.add_parser("evolve", parents=[common], help="run the Cauchy problem")
    sub.add_parser("relax", parents=[common], help="relax to the stationary profile")
    p = sub.add_parser("verify", parents=[common], help="run a named check suite")
    p.add_argument("--suite", choices=sorted(_SUITES), default="quick")
    sub.add_parser(
        "verify-attraction", parents=[common], help="scaled attraction check"
    )
    p = sub.add_parser(
        "export-levels", parents=[common], help="contour polylines from a field CSV"
    )
    p.add_argument("input", help="field CSV produced by evolve/relax")
    return parser


_COMMANDS = {
    "exponents": _cmd_exponents,
    "barriers": _cmd_barriers,
    "evolve": _cmd_evolve,
    "relax": _cmd_relax,
    "verify": _cmd_verify,
    "verify-attraction": _cmd_verify_attraction,
    "export-levels": _cmd_export_levels,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads < 1:
        print("--threads must be at least 1", file=sys.stderr)
        return 2
    if USING_NUMBA:
        set_threads(args.threads)
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args, cfg)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
