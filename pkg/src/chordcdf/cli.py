"""Command-line entry point: ``chordcdf {cdf,mc,nyquist,sysid,margin}``.

Every command reads a JSON config (the bundled Gaussian example by default),
writes CSV files into ``--out-dir`` and optionally SVG plots. Exit codes:
0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import cdf, lti, margins, montecarlo, rng, svg, sysid
from .config import ConfigError, bundled_config_path, load, make_grid
from .exceptions import ConvergenceError, DomainError
from .riemann import chordal_distance

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _seed(args, cfg):
    return cfg.seed if args.seed is None else args.seed


# -- cdf ---------------------------------------------------------------------

def _curve_rows(fn, method, model, nominal, grid, spec):
    """Rows ``(d, F, method, abs_err_bound)`` and the first failure message, if any."""
    rows, failure = [], None
    for d in grid:
        try:
            res = fn(model, nominal, float(d), spec, full_output=True)
            rows.append((float(d), res.value, method, res.error))
        except ConvergenceError as exc:
            rows.append((float(d), exc.estimate, f"{method}:unconverged", exc.error))
            failure = failure or f"{method} at d={d}: {exc}"
    values = np.array([r[1] for r in rows])
    if failure is None and np.any(np.diff(values) < -1e-9):
        failure = f"{method} curve is not monotone; quadrature did not converge"
    return rows, failure


def cmd_cdf(args, cfg, out):
    model, nominal, grid = cfg.model(), cfg.nominal(), cfg.thresholds()
    spec = cfg.quadrature(args.tol)
    methods = {"both": [cdf.THEOREM1, cdf.BALL]}.get(args.method, [args.method])
    rows, failures, curves = [], [], {}
    for method in methods:
        if method == cdf.MONTE_CARLO:
            mc = cfg.monte_carlo()
            curve = cdf.cdf_curve(model, nominal, grid, cdf.MONTE_CARLO,
                                  n_samples=mc["n_samples"], seed=_seed(args, cfg))
            part = list(curve.to_csv_rows())
        else:
            if method == cdf.THEOREM1 and abs(nominal) < 1e-6:
                raise DomainError("theorem1 needs a nominal point away from the origin; use --method ball")
            fn = cdf.cdf_theorem1 if method == cdf.THEOREM1 else cdf.cdf_ball
            part, failure = _curve_rows(fn, method, model, nominal, grid, spec)
            if failure:
                failures.append(failure)
        rows.extend(part)
        curves[method] = np.array([r[1] for r in part])
    write_csv(out / "cdf.csv", ["d", "F", "method", "abs_err_bound"], rows)
    if len(curves) == 2:
        a, b = curves.values()
        print(f"max |theorem1 - ball| = {float(np.max(np.abs(a - b))):.3e}")
    if args.svg:
        svg.line_plot(out / "cdf.svg", [(m, grid, v) for m, v in curves.items()],
                      title="CDF of the chordal distance", xlabel="d", ylabel="F(d)")
    for msg in failures:
        print(f"error: {msg}", file=sys.stderr)
    return EXIT_NUMERIC if failures else EXIT_OK


# -- mc ----------------------------------------------------------------------

def cmd_mc(args, cfg, out):
    model, nominal, grid = cfg.model(), cfg.nominal(), cfg.thresholds()
    mc = cfg.monte_carlo()
    n = mc["n_samples"] if args.n is None else args.n
    if n < 1:
        raise DomainError("number of samples must be >= 1")
    emp = montecarlo.sample_kappa(model, nominal, n, _seed(args, cfg))
    f_emp = emp(grid)
    write_csv(out / "mc.csv", ["d", "F_emp"], zip(grid, f_emp))
    curve = cdf.cdf_curve(model, nominal, grid, cdf.BALL, cfg.quadrature(args.tol))
    report = montecarlo.compare(curve, emp, alpha=mc["alpha"], slack=mc["slack"])
    lines = list(report.lines())
    lines.append(f"max deviation {report.max_deviation:.3e}: {'PASS' if report.passed else 'FAIL'}")
    (out / "mc_report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(lines[-1])
    if args.svg:
        svg.line_plot(out / "mc.svg", [("empirical", grid, f_emp), ("ball", grid, curve.values)],
                      title="Empirical vs quadrature CDF", xlabel="d", ylabel="F(d)")
    return EXIT_OK if report.passed else EXIT_NUMERIC


# -- nyquist -----------------------------------------------------------------

def cmd_nyquist(args, cfg, out):
    plant, grid = cfg.plant(), cfg.frequency_grid()
    values = lti.eval_freq(plant, grid)
    write_csv(out / "nyquist.csv", ["omega", "re", "im"], zip(grid, values.real, values.imag))
    if args.svg:
        svg.line_plot(out / "nyquist.svg", [("P(jw)", values.real, values.imag)],
                      title="Nyquist plot", xlabel="Re", ylabel="Im")
    return EXIT_OK


# -- sysid -------------------------------------------------------------------

def _study_config(args, cfg):
    raw = cfg.sysid()
    kw = {k: raw[k] for k in ("n_trials", "b", "tau", "Ts", "length", "amplitude", "noise_std")
          if k in raw}
    if "init" in raw:
        kw["init"] = tuple(raw["init"])
    if "grid" in raw:
        kw["grid"] = tuple(make_grid(raw["grid"]))
    if "dense_grid" in raw:
        kw["dense_grid"] = tuple(make_grid(raw["dense_grid"]))
    if args.trials is not None:
        kw["n_trials"] = args.trials
    return sysid.StudyConfig(seed=_seed(args, cfg), n_jobs=args.jobs or cfg.n_jobs, **kw), raw


def cmd_sysid(args, cfg, out):
    study, raw = _study_config(args, cfg)
    ens = sysid.run_trials(study)
    write_csv(out / "trials.csv", ["trial", "b_hat", "tau_hat", "converged", "gap_surrogate"],
              ((t, f.b_hat, f.tau_hat, f.converged, g)
               for t, (f, g) in enumerate(zip(ens.fits, ens.gap_surrogates))))
    write_csv(out / "kappa_surface.csv", ["trial", "omega", "kappa"],
              ((t, w, k) for t in range(study.n_trials) if ens.fits[t].converged
               for w, k in zip(ens.grid, ens.kappa[t])))

    # the first converged trial plays the part of "the identified model"
    reference = next(f for f in ens.fits if f.converged)
    rows, coverage = [], []
    for i, w in enumerate(ens.grid):
        fu = sysid.freq_uncertainty(reference, w)
        coverage.append(sysid.ellipse_coverage(ens.nyquist_points(i), fu.mean, fu.cov, 5.0))
        rows.append((w, fu.mean.real, fu.mean.imag, fu.cov[0, 0], fu.cov[0, 1], fu.cov[1, 1],
                     fu.regularized, coverage[-1]))
    write_csv(out / "nyquist_uncertainty.csv",
              ["omega", "mean_re", "mean_im", "cov_re_re", "cov_re_im", "cov_im_im",
               "regularized", "coverage_5sigma"], rows)

    gaps = ens.gap_surrogates_converged
    counts, edges = np.histogram(gaps, bins=int(raw.get("histogram_bins", 20)))
    write_csv(out / "histogram.csv", ["bin_left", "bin_right", "count"],
              zip(edges[:-1], edges[1:], counts))
    print(f"trials {study.n_trials}, failed {ens.n_failed}, "
          f"median gap surrogate {float(np.median(gaps)):.4g}, "
          f"min 5-sigma coverage {min(coverage):.3f}")
    if args.svg:
        svg.histogram(out / "histogram.svg", edges, counts,
                      title="Gap surrogate (grid max of chordal distance)", xlabel="surrogate")
        ok = np.array([f.converged for f in ens.fits])
        svg.heatmap(out / "kappa_surface.svg", ens.grid, np.flatnonzero(ok), ens.kappa[ok],
                    title="Chordal distance to nominal", xlabel="frequency index", ylabel="trial")
    return EXIT_OK


# -- margin ------------------------------------------------------------------

def cmd_margin(args, cfg, out):
    plant, controller, grid = cfg.plant(), cfg.controller(), cfg.frequency_grid()
    settings = cfg.margin()
    tol = 1e-9 if args.tol is None else args.tol
    b = margins.b_margin_grid(plant, controller, grid)
    pv = lti.eval_freq(plant, grid)
    cv = lti.eval_freq(controller, grid)
    n = settings["n_perturbations"]
    std = settings["relative_std"]
    draws = rng.counter_draws(_seed(args, cfg), 0, n * grid.size,
                              lambda g, m: g.standard_normal((m, 2)))
    delta = (draws[:, 0] + 1j * draws[:, 1]).reshape(grid.size, n) * std / np.sqrt(2.0)
    rows, worst = [], np.inf
    for i, (w, p, c) in enumerate(zip(grid, pv, cv)):
        rho_nom = margins.rho(margins.FreqPoint(w, p, c), strict=False)
        for k in range(n):
            pert = p * (1.0 + delta[i, k])
            fp = margins.FreqPoint(w, pert, c)
            try:
                gap = margins.degradation_gap(fp, p)
            except ArithmeticError:
                continue
            kappa = float(chordal_distance(pert, p))
            rows.append((w, rho_nom, k, pert.real, pert.imag, margins.rho(fp), kappa, gap))
            worst = min(worst, gap)
    write_csv(out / "margin.csv",
              ["omega", "rho_nominal", "sample", "plant_re", "plant_im", "rho", "kappa", "gap"], rows)
    write_csv(out / "margin_summary.csv", ["quantity", "value"],
              [("b_margin_grid", b), ("min_gap", worst), ("rows", len(rows))])
    print(f"b (grid) = {b:.6g}; min gap = {worst:.3e} over {len(rows)} perturbations")
    if args.svg:
        svg.line_plot(out / "margin.svg",
                      [("rho nominal", grid, margins.rho_closed_form(pv, cv))],
                      title="Pointwise margin", xlabel="omega", ylabel="rho")
    if worst < -tol:
        print(f"error: degradation bound violated (gap {worst:.3e} < -{tol:g})", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


COMMANDS = {
    "cdf": cmd_cdf,
    "mc": cmd_mc,
    "nyquist": cmd_nyquist,
    "sysid": cmd_sysid,
    "margin": cmd_margin,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="chordcdf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config (default: bundled Gaussian example)")
    common.add_argument("--seed", type=int, help="override the config's base seed")
    common.add_argument("--out-dir", help="output directory (default: config output_dir)")
    common.add_argument("--tol", type=float,
                        help="cdf/mc: quadrature abs_tol; margin: allowed negative gap")
    common.add_argument("--svg", action="store_true", help="also write SVG plots")

    p = sub.add_parser("cdf", parents=[common], help="CDF of the chordal distance")
    p.add_argument("--method", default=cdf.BALL,
                   choices=[cdf.THEOREM1, cdf.BALL, "both", cdf.MONTE_CARLO])
    p = sub.add_parser("mc", parents=[common], help="Monte-Carlo CDF and DKW comparison")
    p.add_argument("--n", type=int, help="number of samples")
    sub.add_parser("nyquist", parents=[common], help="frequency response of the plant")
    p = sub.add_parser("sysid", parents=[common], help="repeated identification study")
    p.add_argument("--trials", type=int, help="override the number of trials")
    p.add_argument("--jobs", type=int, help="worker threads")
    sub.add_parser("margin", parents=[common], help="pointwise margin degradation study")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.tol is not None and not args.tol > 0.0:
        print("config error: --tol must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load(args.config or bundled_config_path())
        out = Path(args.out_dir or cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, cfg, out)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
