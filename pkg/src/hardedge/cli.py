"""Command-line surface tying the library together.

Subcommands
-----------
table1    reproduce the embedded log-E reference table with its a_1 columns
verify    run the residual/consistency suites (cases: m1, m2-special)
mc        Monte Carlo gap curves with analytic oracle column for M=1
gap       single-point Muttalib-Borodin Fredholm evaluation
ode       trajectory export as CSV (columns: s, re/im of every variable,
          logE, res_* columns, one per first integral)
sigma     resolvent-jet residual report at given abscissas
fit       tail fit from a CSV of (r, logE) rows
indicial  small-s exponent classification for an M=2 index pair

Exit codes: 0 success, 1 numerical-acceptance failure, 2 usage/validation
error.  All numeric output uses 17-significant-digit round-trip formatting;
CSV is comma-separated with '.' decimals and LF line endings.  Commands that
write files also write a JSON run manifest next to them.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .kernels import HardEdgeParams, MBParams
from .fredholm import make_rule, fredholm_det, gap_probability_mb, NonConvergedError
from .kernels import borodin_kernel_matrix
from . import hamiltonian_flow as flow
from . import sigma_forms
from .asymptotics import fit_tail, indicial_exponents, A1_PREDICTED
from .ginibre_mc import (McConfig, sample_min_singular_sq, empirical_gap,
                         save_samples)
from .reference_data import TABLE1
from .fredholm import gap_probability_hardedge

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_manifest(out_dir: Path, command: str, params: dict, outputs: list,
                    seed=None) -> None:
    manifest = {
        "command": command,
        "parameters": params,
        "tool_version": __version__,
        "seed": seed,
        "timestamp_unix": time.time(),
        "outputs": [str(p) for p in outputs],
    }
    path = out_dir / f"{command}.manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")


def _mb_logdet(c: int, r: float, nodes: int) -> float:
    mb = MBParams(c=float(c))
    rule = make_rule("gauss_legendre", nodes, 0.0, r)
    _, logdet = fredholm_det(lambda xs, ys: borodin_kernel_matrix(mb, xs, ys),
                             rule)
    return logdet


def cmd_table1(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    r_values = list(range(args.r_min, args.r_max + 1))
    if not r_values:
        print("empty r range", file=sys.stderr)
        return EXIT_USAGE
    logE = {0: {}, 1: {}}
    failures = []
    for c in (0, 1):
        for r in r_values:
            try:
                v1 = _mb_logdet(c, float(r), args.nodes)
                v2 = _mb_logdet(c, float(r), 2 * args.nodes)
                logE[c][r] = (v2, abs(v2 - v1))
            except (NonConvergedError, FloatingPointError) as exc:
                failures.append({"c": c, "r": r, "error": str(exc)})
                logE[c][r] = (math.nan, math.nan)
    a1 = {0: {}, 1: {}}
    ext = {}
    for c in (0, 1):
        pts = [(float(r), logE[c][r][0]) for r in r_values
               if math.isfinite(logE[c][r][0])]
        for r in r_values[1:-1]:
            try:
                a1[c][r] = fit_tail(pts, mode="local_triple",
                                    center=float(r)).a1
            except ValueError:
                pass
        try:
            if len(pts) < 3:
                raise ValueError("not enough cells for a triple")
            ext[c] = fit_tail(pts, mode="local_triple", center=pts[-2][0],
                              extrapolate=True).a1_extrapolated
        except ValueError:
            ext[c] = None
    have_a1 = any(a1[c] for c in (0, 1))
    csv_path = out_dir / "table1.csv"
    with csv_path.open("w", newline="") as fh:
        if have_a1:
            fh.write("r,logE_c0,a1_c0,logE_c1,a1_c1\n")
        else:
            fh.write("r,logE_c0,logE_c1\n")
        for r in r_values:
            row = [str(r), _fmt(logE[0][r][0])]
            if have_a1:
                row.append(_fmt(a1[0].get(r)))
            row.append(_fmt(logE[1][r][0]))
            if have_a1:
                row.append(_fmt(a1[1].get(r)))
            fh.write(",".join(row) + "\n")
    diff = {"failures": failures, "extrapolated_a1": ext,
            "predicted_abs_a1": A1_PREDICTED, "cells": []}
    for c in (0, 1):
        for r in r_values:
            if r in TABLE1[c] and math.isfinite(logE[c][r][0]):
                ref_le, ref_a1 = TABLE1[c][r]
                entry = {"c": c, "r": r, "logE": logE[c][r][0],
                         "logE_ref": ref_le,
                         "logE_abs_diff": abs(logE[c][r][0] - ref_le),
                         "est_error": logE[c][r][1]}
                if r in a1[c]:
                    entry["a1"] = a1[c][r]
                    entry["a1_ref"] = ref_a1
                    entry["a1_abs_diff"] = abs(a1[c][r] - ref_a1)
                diff["cells"].append(entry)
    json_path = out_dir / "table1_diff.json"
    json_path.write_text(json.dumps(diff, indent=2) + "\n")
    _write_manifest(out_dir, "table1",
                    {"nodes": args.nodes, "r_min": args.r_min,
                     "r_max": args.r_max}, [csv_path, json_path])
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


# verification tolerances per category
_VERIFY_TOL = {
    "first_integrals": 1e-8,
    "imag_leakage": 1e-9,
    "schlesinger": 1e-8,
    "rank_one": 1e-10,
    "folding": 1e-10,
    "tracy_widom": 1e-8,
    "sigma_m1": 1e-8,
    "quartic": 1e-6,
    "quartic_dual_path": 1e-9,
    "third_order": 1e-6,
    "f_identity": 1e-6,
    "appendix_recovery": 1e-6,
    "gap_vs_fredholm": 1e-6,
}


def _verify_m1(s_max: float, tol: float) -> dict:
    params = HardEdgeParams.from_nu((0.0, 0.0))
    targets = [t for t in (1e-4, 1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
               if t <= s_max] or [s_max]
    traj = flow.integrate(params, 1e-5, targets, tol=tol)
    cat = {k: 0.0 for k in ("first_integrals", "imag_leakage", "schlesinger",
                            "rank_one", "folding", "tracy_widom", "sigma_m1",
                            "gap_vs_fredholm")}
    for st in traj.states:
        fir = flow.first_integral_residuals(st)
        cat["imag_leakage"] = max(cat["imag_leakage"], fir.pop("imag_leakage"))
        cat["first_integrals"] = max(cat["first_integrals"], max(fir.values()))
        struct = flow.structural_residuals(st)
        cat["schlesinger"] = max(cat["schlesinger"], struct["schlesinger_A"],
                                 struct["schlesinger_C"])
        cat["rank_one"] = max(cat["rank_one"], struct["rank_one"])
        cat["folding"] = max(cat["folding"], struct["fold_x1"],
                             struct["fold_y1"])
        cat["tracy_widom"] = max(cat["tracy_widom"],
                                 *(v for k, v in struct.items()
                                   if k.startswith("tw_")))
        # sigma form needs eta0'' from the flow
        dx, dy, _, _ = flow.rhs(st)
        d1 = (st.x[0] * st.y[1]).real
        d2 = (dx[0] * st.y[1] + st.x[0] * dy[1]).real
        e1, e2 = params.e
        cat["sigma_m1"] = max(cat["sigma_m1"], sigma_forms.p3_sigma_residual(
            st.s, st.eta[0].real, d1, d2, e1, e2))
    for st, lg in zip(traj.states, traj.log_gap):
        if st.s < 0.05:
            continue
        pt = gap_probability_hardedge(params, st.s, target_tol=1e-9)
        cat["gap_vs_fredholm"] = max(cat["gap_vs_fredholm"],
                                     abs(lg - pt.logE))
    return cat


def _verify_m2_special(s_max: float, tol: float) -> dict:
    params = HardEdgeParams.from_nu(sigma_forms.SPECIAL_NU)
    targets = [t for t in (1e-4, 1e-3, 0.01, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0,
                           5.0, 10.0) if t <= s_max] or [s_max]
    traj = flow.integrate(params, 1e-5, targets, tol=tol)
    cat = {k: 0.0 for k in ("first_integrals", "imag_leakage", "schlesinger",
                            "rank_one", "quartic", "quartic_dual_path",
                            "third_order", "f_identity", "appendix_recovery",
                            "gap_vs_fredholm")}
    for st in traj.states:
        fir = flow.first_integral_residuals(st)
        cat["imag_leakage"] = max(cat["imag_leakage"], fir.pop("imag_leakage"))
        cat["first_integrals"] = max(cat["first_integrals"], max(fir.values()))
        struct = flow.structural_residuals(st)
        cat["schlesinger"] = max(cat["schlesinger"], struct["schlesinger_A"],
                                 struct["schlesinger_C"])
        cat["rank_one"] = max(cat["rank_one"], struct["rank_one"])
        if st.s >= 0.05:
            jet = flow.eta_derivatives(st)
            cat["quartic"] = max(cat["quartic"],
                                 abs(sigma_forms.quartic_ode_residual(jet)))
            p_t = sigma_forms.quartic_typeset_raw(jet)
            p_p = sigma_forms.quartic_pipeline_raw(jet)
            blocks = sigma_forms.quartic_blocks(jet)
            scale = sum(abs(v) for v in blocks.values())
            cat["quartic_dual_path"] = max(cat["quartic_dual_path"],
                                           abs(p_t - p_p) / scale)
            third, fid = sigma_forms.special_case_residuals(jet)
            cat["third_order"] = max(cat["third_order"], abs(third))
            cat["f_identity"] = max(cat["f_identity"], fid)
            rec = sigma_forms.appendix_recover(st)
            cat["appendix_recovery"] = max(cat["appendix_recovery"],
                                           max(rec.values()))
    for st, lg in zip(traj.states, traj.log_gap):
        if st.s not in (0.25, 0.5, 1.0, 2.0, 4.0):
            continue
        pt = gap_probability_mb(MBParams(c=0.0), 2.0 * math.sqrt(st.s),
                                target_tol=1e-9)
        cat["gap_vs_fredholm"] = max(cat["gap_vs_fredholm"],
                                     abs(lg - pt.logE))
    return cat


def cmd_verify(args) -> int:
    if args.case == "m1":
        cat = _verify_m1(args.s_max, args.tol)
    elif args.case == "m2-special":
        cat = _verify_m2_special(args.s_max, args.tol)
    else:  # pragma: no cover - argparse limits choices
        print(f"unknown case {args.case!r}", file=sys.stderr)
        return EXIT_USAGE
    report = {"case": args.case, "s_max": args.s_max, "tol": args.tol,
              "categories": {}}
    failed = []
    for name, value in cat.items():
        limit = _VERIFY_TOL[name]
        ok = bool(value <= limit)
        report["categories"][name] = {"max_residual": float(value),
                                      "tolerance": limit, "pass": ok}
        if not ok:
            failed.append(name)
    report["pass"] = not failed
    text = json.dumps(report, indent=2)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"verify_{args.case}.json"
        path.write_text(text + "\n")
        _write_manifest(out_dir, "verify",
                        {"case": args.case, "s_max": args.s_max,
                         "tol": args.tol}, [path])
    print(text)
    if failed:
        print(f"FAILED categories: {', '.join(failed)}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_mc(args) -> int:
    try:
        cfg = McConfig(M=args.m, N0=args.n0, nu_int=tuple(args.nu),
                       samples=args.samples, seed=args.seed,
                       variance_convention=args.variance)
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    result = sample_min_singular_sq(cfg)
    s_grid = args.s_grid or [0.5, 1.0, 2.0]
    rows = empirical_gap(result, s_grid)
    out_paths = []
    if args.save_samples:
        out_dir0 = Path(args.out)
        out_dir0.mkdir(parents=True, exist_ok=True)
        raw = out_dir0 / "lambda_min.f64"
        save_samples(result, raw)
        out_paths += [raw, Path(str(raw) + ".json")]
    oracle = None
    if cfg.M == 1:
        params = HardEdgeParams.from_nu((0.0, float(cfg.nu_int[0])))
        oracle = {s: gap_probability_hardedge(params, s, target_tol=1e-9).E
                  for s, *_ in rows}
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "mc_gap.csv"
    with csv_path.open("w", newline="") as fh:
        header = "s,p_hat,ci_low,ci_high"
        if oracle is not None:
            header += ",E_analytic,sigma_distance"
        fh.write(header + "\n")
        n = cfg.samples
        for s, p, lo, hi in rows:
            cells = [_fmt(s), _fmt(p), _fmt(lo), _fmt(hi)]
            if oracle is not None:
                e = oracle[s]
                sd = abs(p - e) / math.sqrt(max(e * (1 - e), 1e-12) / n)
                cells += [_fmt(e), _fmt(sd)]
            fh.write(",".join(cells) + "\n")
    _write_manifest(out_dir, "mc",
                    {"M": cfg.M, "N0": cfg.N0, "nu": list(cfg.nu_int),
                     "samples": cfg.samples,
                     "variance_convention": cfg.variance_convention,
                     "s_grid": list(s_grid)},
                    [csv_path] + out_paths, seed=cfg.seed)
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_gap(args) -> int:
    try:
        mb = MBParams(c=args.c, theta=args.theta)
        pt = gap_probability_mb(mb, args.r, target_tol=args.tol)
    except (ValueError, NonConvergedError) as exc:
        print(f"gap evaluation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL if isinstance(exc, NonConvergedError) else EXIT_USAGE
    payload = {"c": args.c, "theta": args.theta, "r": args.r,
               "E": pt.E, "logE": pt.logE, "nodes": pt.node_count_used,
               "est_error": pt.est_error}
    if args.format == "csv":
        print(",".join(payload))
        print(",".join(_fmt(v) for v in payload.values()))
    else:
        print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_ode(args) -> int:
    nu = (0.0, args.nu1) if args.m == 1 else (0.0, args.nu1, args.nu2)
    try:
        params = HardEdgeParams.from_nu(nu)
        grid = _log_grid(max(args.s0 * 10, 1e-4), args.s_max, args.points)
        traj = flow.integrate(params, args.s0, grid, tol=args.tol)
    except (ValueError, flow.FlowError) as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, ValueError) else EXIT_NUMERICAL
    text = flow.trajectory_csv(traj)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "trajectory.csv"
    path.write_text(text)
    _write_manifest(out_dir, "ode",
                    {"m": args.m, "nu1": args.nu1, "nu2": args.nu2,
                     "s0": args.s0, "s_max": args.s_max, "tol": args.tol,
                     "points": args.points}, [path])
    print(f"wrote {path}")
    return EXIT_OK


def cmd_sigma(args) -> int:
    params = HardEdgeParams.from_nu((0.0, args.nu1, args.nu2))
    s_list = sorted(args.s)
    try:
        traj = flow.integrate(params, 1e-5, s_list, tol=args.tol)
    except flow.FlowError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    report = []
    for st in traj.states:
        if st.s not in s_list:
            continue
        jet = flow.eta_derivatives(st)
        entry = {"s": st.s, "eta0": jet.d[0], "F": jet.F,
                 "quartic": sigma_forms.quartic_ode_residual(jet),
                 "gode": sigma_forms.gode_residual(jet)}
        if tuple(params.nu) == sigma_forms.SPECIAL_NU:
            third, fid = sigma_forms.special_case_residuals(jet)
            entry["third_order"] = third
            entry["f_identity"] = fid
        report.append(entry)
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_fit(args) -> int:
    try:
        data = np.loadtxt(args.input, delimiter=",", skiprows=args.skip_rows)
        if data.ndim != 2 or data.shape[1] < 2:
            raise ValueError("need a two-column CSV of (r, logE)")
        fit = fit_tail([(r, le) for r, le in data[:, :2]], mode=args.mode,
                       extrapolate=args.extrapolate)
    except (OSError, ValueError) as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_USAGE
    payload = {"mode": args.mode, "a1": fit.a1, "b1": fit.b1, "c1": fit.c1,
               "window": list(fit.window), "residual": fit.residual,
               "a1_extrapolated": fit.a1_extrapolated,
               "predicted_abs_a1": A1_PREDICTED}
    if args.format == "csv":
        cols = ["a1", "b1", "c1", "residual", "a1_extrapolated"]
        print(",".join(cols))
        print(",".join(_fmt(payload[c]) for c in cols))
    else:
        print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_indicial(args) -> int:
    try:
        params = HardEdgeParams.from_nu((0.0, args.nu1, args.nu2))
        rep = indicial_exponents(params)
    except ValueError as exc:
        print(f"invalid indices: {exc}", file=sys.stderr)
        return EXIT_USAGE
    payload = {
        "nu": list(params.nu),
        "fixed_exponents": sorted(rep.fixed_exponents),
        "lambda_zero": rep.lambda_zero,
        "quadratic_pair": [_c2s(v) for v in rep.quadratic_pair],
        "halfinteger_pair": [_c2s(v) for v in rep.halfinteger_pair],
        "fractional_C1": [_c2s(v) for v in rep.fractional_C1],
        "x_disc": rep.x_disc,
        "y_disc": rep.y_disc,
        "delta1": rep.delta1,
        "mu1": rep.mu1,
    }
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def _c2s(v):
    v = complex(v)
    if v.imag == 0.0:
        return v.real
    return {"re": v.real, "im": v.imag}


def _log_grid(lo: float, hi: float, n: int) -> list:
    return list(np.geomspace(lo, hi, n))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hardedge",
                                description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table1", help="reproduce the reference determinant table")
    t.add_argument("--out", default="out")
    t.add_argument("--nodes", type=int, default=48)
    t.add_argument("--r-min", type=int, default=4)
    t.add_argument("--r-max", type=int, default=14)
    t.set_defaults(func=cmd_table1)

    v = sub.add_parser("verify", help="run the residual suites")
    v.add_argument("case", choices=["m1", "m2-special"])
    v.add_argument("--s-max", type=float, default=5.0)
    v.add_argument("--tol", type=float, default=1e-10)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("mc", help="Monte Carlo gap curves")
    m.add_argument("--m", type=int, default=1)
    m.add_argument("--n0", type=int, default=50)
    m.add_argument("--nu", type=int, nargs="+", default=[0])
    m.add_argument("--samples", type=int, default=10000)
    m.add_argument("--seed", type=int, default=7)
    m.add_argument("--variance", default="unit_total",
                   choices=["unit_total", "unit_component"])
    m.add_argument("--s-grid", type=float, nargs="+", default=None)
    m.add_argument("--save-samples", action="store_true")
    m.add_argument("--out", default="out")
    m.set_defaults(func=cmd_mc)

    g = sub.add_parser("gap", help="single Fredholm gap evaluation")
    g.add_argument("--c", type=float, required=True)
    g.add_argument("--theta", type=float, default=2.0)
    g.add_argument("--r", type=float, required=True)
    g.add_argument("--tol", type=float, default=1e-9)
    g.add_argument("--format", choices=["json", "csv"], default="json")
    g.set_defaults(func=cmd_gap)

    o = sub.add_parser("ode", help="trajectory export")
    o.add_argument("--m", type=int, choices=[1, 2], default=2)
    o.add_argument("--nu1", type=float, default=-0.5)
    o.add_argument("--nu2", type=float, default=0.0)
    o.add_argument("--s0", type=float, default=1e-5)
    o.add_argument("--s-max", type=float, default=5.0)
    o.add_argument("--tol", type=float, default=1e-10)
    o.add_argument("--points", type=int, default=40)
    o.add_argument("--out", default="out")
    o.set_defaults(func=cmd_ode)

    sg = sub.add_parser("sigma", help="sigma-form residual report")
    sg.add_argument("--nu1", type=float, default=-0.5)
    sg.add_argument("--nu2", type=float, default=0.0)
    sg.add_argument("--s", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    sg.add_argument("--tol", type=float, default=1e-10)
    sg.set_defaults(func=cmd_sigma)

    f = sub.add_parser("fit", help="tail fit from CSV")
    f.add_argument("input")
    f.add_argument("--mode", default="local_triple",
                   choices=["local_triple", "global_lsq"])
    f.add_argument("--extrapolate", action="store_true")
    f.add_argument("--skip-rows", type=int, default=0)
    f.add_argument("--format", choices=["json", "csv"], default="json")
    f.set_defaults(func=cmd_fit)

    i = sub.add_parser("indicial", help="small-s exponent classification")
    i.add_argument("--nu1", type=float, required=True)
    i.add_argument("--nu2", type=float, required=True)
    i.set_defaults(func=cmd_indicial)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, flow.FlowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
