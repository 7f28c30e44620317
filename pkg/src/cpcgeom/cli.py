"""Command line front end.

Exit codes: 0 all checks pass, 1 some check fails, 2 configuration error,
3 numeric or regularity error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from . import catalog as cat
from . import suite as acceptance
from .chart import Chart
from .eigenframe import orthonormal_shape_matrix, smooth_frame
from .errors import DomainError, FocalPointError, GeometryError, InapplicableError, UsageError
from .immersion import (
    BoundaryError,
    principal_frame,
    shape_data,
    structure_residuals,
    t_principal_angle,
)
from .eigenframe import cluster_spectrum
from .parallel import admissible_t_range, isoparametric_cpc_test, parallel_oracle_check
from .profile import (
    affine_profile,
    case_constraints,
    cubic_profile,
    lemma_constraint,
    lemma_solution,
    ode_residual,
    ode_residual_scale,
    rotational_curvatures,
)
from .report import (
    GridSpec,
    Report,
    RunConfig,
    load_config_file,
    parse_t_range,
    parse_tolerances,
)

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("analyze", "parallel", "frame", "ode", "suite", "list")
CLIP_SHRINK = 0.95
DEFAULT_ENTRY = "rotational_horosphere(B=1,n=2)"


# chart resolution


def _profile_from_spec(spec: dict):
    kind = spec.get("kind")
    params = spec.get("params", [])
    if kind == "affine":
        return affine_profile(*params)
    if kind == "lemma":
        return lemma_solution(*params)
    if kind == "cubic":
        return cubic_profile(*params)
    raise UsageError(f"unknown profile kind {kind!r}")


def resolve_chart(config: RunConfig) -> tuple[cat.CatalogEntry | None, Chart]:
    """Catalog entry by name, or a custom chart built from catalog primitives."""
    spec = config.chart
    if spec is None:
        entry = cat.by_name(config.entry or DEFAULT_ENTRY)
        return entry, entry.chart
    if not isinstance(spec, dict):
        raise UsageError("chart spec must be an object")
    entry = None
    try:
        if "builder" in spec:
            entry = cat.build(spec["builder"], **spec.get("params", {}))
            chart = entry.chart
        elif "profile" in spec:
            chart = cat.rotational_chart(_profile_from_spec(spec["profile"]), int(spec.get("n", 2)))
        else:
            raise UsageError("chart spec needs 'builder' or 'profile'")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, GeometryError):
            raise
        raise UsageError(f"bad chart spec: {exc}") from None
    if "shear" in spec:
        chart = cat.sheared_chart(chart, float(spec["shear"]))
        entry = None
    if "affine" in spec:
        aff = spec["affine"]
        chart = chart.reparametrize(aff["matrix"], aff.get("offset", [0.0] * chart.n), aff["domain"])
        entry = None
    return entry, chart


# commands


def _stencil_ok(chart: Chart, u) -> bool:
    return chart.contains(u, margin=2e-3)


def cmd_analyze(config: RunConfig) -> Report:
    entry, chart = resolve_chart(config)
    tol = config.tolerances
    rep = Report("analyze", config.echo())
    points = config.grid.points(chart)
    unit = inv = struct = 0.0
    skipped = 0
    strata = set()
    nus = []
    spectra = []
    curv_err = 0.0
    a_norm = 0.0
    for u in points:
        sd = shape_data(chart, u)
        unit = max(unit, abs(sd.nu**2 + sd.Tnorm**2 - 1))
        inv = max(inv, max(sd.invariant_residuals().values()))
        nus.append(sd.nu)
        lam = principal_frame(sd)[0]
        spectra.append(lam)
        a_norm = max(a_norm, float(np.max(np.abs(lam))))
        strata.add(cluster_spectrum(orthonormal_shape_matrix(sd)[0]).multiplicities)
        if _stencil_ok(chart, u):
            struct = max(struct, structure_residuals(chart, u).max())
        else:
            skipped += 1
        if entry is not None and entry.curvatures is not None:
            curv_err = max(curv_err, acceptance.spectrum_matches(lam, entry.curvatures, tol["curvature"])[1])
    rep.add("unit_relation", unit, tol["unit"])
    rep.add("shape_invariants", inv, tol["invariant"])
    rep.add("structure_equations", struct, tol["structure"])
    rep.add("constant_multiplicities", float(len(strata)), 1.0, passed=len(strata) == 1)
    nus = np.asarray(nus)
    if entry is not None:
        if entry.curvatures is not None:
            rep.add("expected_curvatures", curv_err, tol["curvature"])
        if entry.curvatures is not None and all(v == 0.0 for v, _ in entry.curvatures):
            rep.add("shape_operator_zero", a_norm, tol["curvature"])
        if entry.nu_behavior == cat.NU_ZERO:
            rep.add("nu_zero", float(np.max(np.abs(nus))), tol["nu"])
        elif entry.nu_behavior == cat.NU_UNIT:
            rep.add("nu_unit", float(np.max(np.abs(np.abs(nus) - 1))), tol["nu"])
        elif entry.nu_behavior == cat.NU_CONSTANT:
            rep.add("nu_constant", float(np.ptp(nus)), tol["nu"])
    if skipped:
        rep.notes.append(f"structure equations skipped at {skipped} points too close to the boundary")
    spec0 = cluster_spectrum(np.diag(spectra[0]))
    rep.data = {
        "chart": chart.name,
        "points": len(points),
        "eigenvalues": list(spec0.eigenvalues),
        "multiplicities": list(spec0.multiplicities),
        "nu_range": [float(nus.min()), float(nus.max())],
        "curvature_spread": float(np.max(np.ptp(np.sort(np.asarray(spectra), axis=1), axis=0))),
    }
    return rep


def cmd_parallel(config: RunConfig) -> Report:
    entry, chart = resolve_chart(config)
    tol = config.tolerances
    rep = Report("parallel", config.echo())
    points = config.grid.points(chart)
    center = points[len(points) // 2]
    a, b, k = config.t_range or (-0.5, 0.5, 5)
    try:
        t_principal_angle(shape_data(chart, center))
    except InapplicableError as exc:
        rep.notes.append(f"trivial case: {exc}")
        rep.add("isoparametric_implication", 0.0, tol["tnorm"], passed=True, verdict="trivial")
        return rep
    if config.clip:
        lo, hi, clipped = admissible_t_range(chart, points, (a, b))
        if clipped:
            # the clip edge sits at margin eps_reg where the metric is numerically singular
            lo, hi = CLIP_SHRINK * lo, CLIP_SHRINK * hi
            rep.notes.append(f"t range clipped from [{a:g}, {b:g}] to [{lo:.6g}, {hi:.6g}] by focal margins")
        a, b = lo, hi
    ts = np.linspace(a, b, k)
    spec_err = metric_err = 0.0
    rows = []
    try:
        for t in ts:
            res = parallel_oracle_check(chart, center, float(t))
            spec_err = max(spec_err, res["spectrum_mismatch"])
            metric_err = max(metric_err, res["metric_mismatch"])
            for i, (p, m) in enumerate(zip(np.sort(res["predicted"]), np.sort(res["measured"]))):
                rows.append((float(t), i, float(p), float(m)))
        verdict = isoparametric_cpc_test(chart, points, ts, tol["tnorm"], tol["curvature"])
    except FocalPointError as exc:
        rep.add_error("focal_margin", str(exc))
        return rep
    rep.add("transport_spectrum", spec_err, tol["spectrum"])
    rep.add("transport_metric", metric_err, tol["metric"])
    rep.add(
        "isoparametric_implication",
        0.0 if verdict.implication_check else 1.0,
        tol["tnorm"],
        passed=verdict.implication_check,
        tnorm_spread=verdict.tnorm_spread,
        curvature_spread=verdict.curvature_spread,
    )
    rep.data = {
        "chart": chart.name,
        "t_values": [float(t) for t in ts],
        "tnorm_constant": verdict.tnorm_constant,
        "curvatures_constant": verdict.curvatures_constant,
    }
    if config.csv:
        with open(config.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "lambda_index", "predicted", "measured"])
            for t, i, p, m in rows:
                w.writerow([f"{t:.12g}", i, f"{p:.12g}", f"{m:.12g}"])
    return rep


def cmd_frame(config: RunConfig) -> Report:
    _, chart = resolve_chart(config)
    tol = config.tolerances
    rep = Report("frame", config.echo())
    axes = config.grid.axis_arrays(chart)

    def field(u):
        return orthonormal_shape_matrix(shape_data(chart, u))[0]

    ff = smooth_frame(field, axes)
    resid = 0.0
    for p, F, lam in zip(ff.points, ff.frames, ff.eigenvalues):
        resid = max(resid, float(np.max(np.linalg.norm(field(p) @ F - F * lam, axis=0))))
    rep.add("eigen_residual", resid, tol["frame"])
    rep.add("annihilation", ff.annihilation, tol["frame"])
    rep.add("orthonormality", ff.gram_defect(), tol["orthonormal"])
    rep.add("cross_cluster_orthogonality", ff.cross_orthogonality, 1e-9)
    det_err = float(np.max(np.abs(ff.determinants() - 1.0)))
    rep.add("orientation", det_err, 1e-9)
    rep.data = {
        "chart": chart.name,
        "eigenvalues": list(ff.structure.eigenvalues),
        "multiplicities": list(ff.structure.multiplicities),
        "seeds": [list(s) for s in ff.seeds],
        "max_adjacent_deviation": ff.max_adjacent_deviation,
        "continuity_constant": ff.continuity_constant,
        "orientation_repairs": ff.orientation_repairs,
    }
    if config.csv:
        n = chart.n
        with open(config.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["point", *[f"u{i + 1}" for i in range(n)], "vector", "eigenvalue", *[f"x{i + 1}" for i in range(n)]])
            for idx, (p, F, lam) in enumerate(zip(ff.points, ff.frames, ff.eigenvalues)):
                for j in range(n):
                    w.writerow([idx, *[f"{x:.12g}" for x in p], j, f"{lam[j]:.12g}", *[f"{x + 0.0:.12g}" for x in F[:, j]]])
    return rep


def cmd_ode(config: RunConfig) -> Report:
    tol = config.tolerances
    rep = Report("ode", config.echo())
    spec = config.chart or {}
    lemma_params = spec.get("lemma", [[1.0, 0.0, 0.0], [2.0, 0.1, 1.0], [-1.5, 0.8, 0.0]])
    Bs = spec.get("B", [0.5, 1.0, 2.0])
    worst = 0.0
    constraint_min = math.inf
    for params in lemma_params:
        prof = lemma_solution(*params)
        c1, c2, _ = prof.params
        for w in np.linspace(0.01, 0.99, 41):
            s = (w - c2) / c1
            worst = max(worst, abs(ode_residual(prof, s)) / ode_residual_scale(prof, s))
            lam_s = -c1 / w
            for c in (1, -1):
                constraint_min = min(constraint_min, abs(lemma_constraint(c1, c2, lam_s, c, s)))
    rep.add("lemma_ode_residual", worst, tol["ode"])
    rep.add("lemma_constraint_nonvanishing", constraint_min, 0.0, passed=constraint_min > 0)
    affine_max = max(abs(ode_residual(affine_profile(B), s)) for B in Bs for s in np.linspace(-2, 2, 9))
    rep.add("affine_ode_exact", affine_max, 0.0, passed=affine_max == 0.0)
    exceptions = 0
    r2_hyp = 0.0
    spread = 0.0
    for B in Bs:
        prof = affine_profile(B)
        for lam in np.linspace(-5, 5, 41):
            exceptions += not case_constraints(prof, float(lam), 1, 0.3)[0] > 0
        for lam in (1.0, -1.0):
            r2_hyp = max(r2_hyp, abs(case_constraints(prof, lam, -1, 0.3)[0]))
        mus = np.array([rotational_curvatures(prof, 1.0, -1, s) for s in np.linspace(-1, 1, 21)])
        spread = max(spread, float(np.max(np.ptp(mus, axis=0))))
    rep.add("spherical_obstruction_exceptions", float(exceptions), 0.0, passed=exceptions == 0)
    rep.add("horosphere_case_r2", r2_hyp, tol["ode"])
    rep.add("horosphere_curvature_spread", spread, tol["ode"])
    return rep


def cmd_suite(config: RunConfig) -> Report:
    rep = Report("suite", config.echo())
    for chk in acceptance.run_suite(config.criteria):
        rep.add(chk.name, chk.measured, chk.tolerance, passed=chk.passed)
    return rep


def cmd_list(config: RunConfig) -> Report:
    rep = Report("list", config.echo())
    rep.data = {"entries": [e.name for e in cat.default_catalog()] + [cat.rotational_cubic().name]}
    return rep


HANDLERS = {
    "analyze": cmd_analyze,
    "parallel": cmd_parallel,
    "frame": cmd_frame,
    "ode": cmd_ode,
    "suite": cmd_suite,
    "list": cmd_list,
}


# argument handling


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpcgeom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with run settings")
        p.add_argument("--entry", help="catalog entry name (see the list command)")
        p.add_argument("--grid", help="per-axis start:stop:count, comma separated, or one count")
        p.add_argument("--t-range", dest="t_range", help="A:B:N")
        p.add_argument("--tol", action="append", default=[], metavar="NAME=VAL")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--csv", help="CSV output (parallel: curvature curves, frame: frame dump)")
        p.add_argument("--format", choices=("text", "structured"), default=None)
        p.add_argument("--no-clip", action="store_true", help="do not clip t to the focal margins")
        p.add_argument("--criteria", help="comma separated criterion numbers for suite")
    return parser


def make_config(args) -> RunConfig:
    file_cfg = load_config_file(args.config) if args.config else {}

    def pick(key, cli_value):
        return cli_value if cli_value is not None else file_cfg.get(key)

    tol_items = [f"{k}={v}" for k, v in (file_cfg.get("tolerances") or {}).items()] + list(args.tol)
    criteria = pick("criteria", args.criteria)
    if isinstance(criteria, str):
        try:
            criteria = [int(x) for x in criteria.split(",") if x]
        except ValueError:
            raise UsageError(f"criteria must be integers, got {criteria!r}") from None
    if criteria is not None and any(not 1 <= c <= len(acceptance.CRITERIA) for c in criteria):
        raise UsageError(f"criteria must lie in 1..{len(acceptance.CRITERIA)}")
    fmt = pick("format", args.format) or "text"
    if fmt not in ("text", "structured"):
        raise UsageError(f"unknown format {fmt!r}")
    grid = pick("grid", args.grid)
    t_range = pick("t_range", args.t_range)
    return RunConfig(
        command=args.command,
        entry=pick("entry", args.entry),
        chart=file_cfg.get("chart"),
        grid=GridSpec.parse(None if grid is None else str(grid)),
        t_range=parse_t_range(t_range),
        tolerances=parse_tolerances(tol_items),
        out=pick("out", args.out),
        csv=pick("csv", args.csv),
        fmt=fmt,
        clip=not args.no_clip and file_cfg.get("clip", True),
        criteria=criteria,
    )


def _emit(report: Report, config: RunConfig | None, fmt: str):
    text = report.render(fmt)
    if config is not None and config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = make_config(args)
    except GeometryError as exc:
        print(f"cpcgeom: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = HANDLERS[config.command](config)
    except (UsageError, KeyError) as exc:
        print(f"cpcgeom: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        if isinstance(exc, BoundaryError):
            code = EXIT_NUMERIC
        else:
            code = EXIT_CONFIG
        print(f"cpcgeom: {exc}", file=sys.stderr)
        return code
    except (GeometryError, ArithmeticError, np.linalg.LinAlgError) as exc:
        report = Report(config.command, config.echo())
        report.add_error(type(exc).__name__, str(exc))
    except OSError as exc:
        print(f"cpcgeom: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _emit(report, config, config.fmt)
    except OSError as exc:
        print(f"cpcgeom: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if any(c["status"] == "error" for c in report.checks.values()):
        return EXIT_NUMERIC
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
