"""Command-line entry points for reproducible experiments.

Subcommands: homogenize, bands, simulate, compare-heat, gcc, fit, perturb,
plot.  Exit codes: 0 ok, 2 configuration error, 3 numerical failure,
4 acceptance-check failure (with --check).

A scenario document ties a medium to a grid, initial data, a time policy
and weights:

    {
      "medium": { ... medium config ... } | "medium.json",
      "grid": {"cells_per_period": 32, "periods": 1024},
      "initial": {"kind": "gaussian", "width": 2.0, "amplitude": 1.0},
      "time": {"t_end": null, "cfl_fraction": 0.5, "dt_divisor": 1,
               "snapshots": {"start": 40.0, "count": 18}},
      "weights": {"s1": 0.5, "s2": 0.5, "s": 0.0, "kappa": 1.5, "eta": 0.0},
      "experiment": "decay",
      "seed": 7
    }

`t_end` defaults to the wrap time of the torus; decay-type experiments must
not run past it.  Every command writes a manifest recording the config
hash, tool version, and the tolerances in effect, so reruns are
bit-reproducible (reductions are pairwise and thread-count independent).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    WeightSpec,
    compare_wave_heat,
    fit_decay_exponent,
    spectral_gradient,
    weighted_norm,
)
from .bloch import first_band, verify_dispersion
from .errors import ConfigError, ConstraintViolation, PeriodicaError
from .evolve import cfl_limit, heat_comparator, run_damped_wave
from .flow import gcc_audit
from .homogenize import HomogenizedData, homogenize
from .medium import Medium, TorusGrid, build_medium, sample_on_grid

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CHECK = 4


def _load_json(path_or_obj):
    if isinstance(path_or_obj, (str, Path)):
        with open(path_or_obj, "r", encoding="utf-8") as fh:
            return json.load(fh)
    return path_or_obj


def _config_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


def _write_json(path, obj):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# scenario handling
# ---------------------------------------------------------------------------

class Scenario:
    """Validated scenario document."""

    def __init__(self, doc: dict, base_dir: Path = Path(".")):
        if not isinstance(doc, dict):
            raise ConfigError("scenario must be a JSON object")
        self.doc = doc
        med = doc.get("medium")
        if med is None:
            raise ConfigError("scenario is missing 'medium'")
        if isinstance(med, str):
            med = _load_json(base_dir / med)
        self.medium_config = med
        self.medium = build_medium(med)

        grid = doc.get("grid", {})
        self.grid = TorusGrid(self.medium.dimension,
                              int(grid.get("cells_per_period", 32)),
                              int(grid.get("periods", 1024)))

        w = doc.get("weights", {})
        self.weights = WeightSpec(
            s1=float(w.get("s1", 0.5)), s2=float(w.get("s2", 0.5)),
            s=float(w.get("s", 0.0)), kappa=float(w.get("kappa", 1.5)),
            eta=float(w.get("eta", 0.0)))

        t = doc.get("time", {})
        self.cfl_fraction = float(t.get("cfl_fraction", 0.5))
        self.dt_divisor = int(t.get("dt_divisor", 1))
        if self.dt_divisor < 1:
            raise ConfigError("dt_divisor must be >= 1")
        self.t_wrap = self.grid.wrap_time(self.medium.bounds.w_min,
                                          self.medium.bounds.g_max)
        self.t_end = float(t.get("t_end") or self.t_wrap)
        self.experiment = doc.get("experiment", "decay")
        if self.experiment not in ("decay", "compare-heat", "bands", "gcc", "perturbation"):
            raise ConfigError(f"unknown experiment kind {self.experiment!r}")
        if self.experiment in ("decay", "compare-heat", "perturbation") \
                and self.t_end > self.t_wrap * (1 + 1e-9):
            raise ConfigError(
                f"horizon {self.t_end:.1f} exceeds the wrap time {self.t_wrap:.1f}")
        snaps = t.get("snapshots", {})
        start = float(snaps.get("start", max(self.t_end / 10.0, 1.0)))
        count = int(snaps.get("count", 18))
        times = np.geomspace(start, self.t_end, count)
        if snaps.get("include_zero", True):
            times = np.concatenate([[0.0], times])
        self.snapshot_times = np.unique(times)

        self.initial_spec = doc.get("initial", {"kind": "gaussian", "width": 2.0})
        self.seed = int(doc.get("seed", 0))
        hcfg = doc.get("homogenize", {})
        self.homog_resolution = int(hcfg.get("resolution", 256))
        self.homog_tol = float(hcfg.get("tol", 1e-12))

    def dt(self, medium=None) -> float:
        return cfl_limit(medium or self.medium, self.grid, self.cfl_fraction) / self.dt_divisor

    def initial_data(self):
        spec = self.initial_spec
        kind = spec.get("kind", "gaussian")
        xc = self.grid.centered_coords()
        if kind == "gaussian":
            width = float(spec.get("width", 2.0))
            amp = float(spec.get("amplitude", 1.0))
            r2 = np.sum(xc * xc, axis=-1)
            u0 = amp * np.exp(-r2 / (2.0 * width**2))
            v0 = np.zeros_like(u0)
            vel = float(spec.get("velocity", 0.0))
            if vel:
                v0 = vel * u0
            return u0, v0
        if kind == "mode":
            k = np.asarray(spec.get("mode", [1] * self.grid.dimension), dtype=float)
            x = self.grid.coords()
            phase = 2.0 * np.pi * (x @ k) / self.grid.periods
            u0 = float(spec.get("amplitude", 1.0)) * np.cos(phase)
            return u0, np.zeros_like(u0)
        if kind == "file":
            data = np.load(spec["path"])
            return data["u0"], data["u1"]
        raise ConfigError(f"unknown initial data kind {kind!r}")

    def manifest(self, extra=None) -> dict:
        man = {
            "tool": "periodica",
            "version": __version__,
            "config_hash": _config_hash(self.doc),
            "medium_hash": _config_hash(self.medium_config),
            "grid": {"cells_per_period": self.grid.cells_per_period,
                     "periods": self.grid.periods},
            "dt": self.dt(),
            "t_end": self.t_end,
            "t_wrap": self.t_wrap,
            "cfl_fraction": self.cfl_fraction,
            "weights": dataclasses.asdict(self.weights),
            "homogenize": {"resolution": self.homog_resolution, "tol": self.homog_tol},
            "seed": self.seed,
        }
        if extra:
            man.update(extra)
        return man


def _write_snapshots(out: Path, run, manifest: dict):
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "manifest.json", manifest)
    for i, state in enumerate(run.states):
        np.save(out / f"snap_{i:04d}.npy",
                np.stack([state.u, state.v]))
        _write_json(out / f"snap_{i:04d}.json", {
            "t": state.t,
            "index": i,
            "grid": manifest["grid"],
            "medium_hash": manifest["medium_hash"],
        })


def _decay_series(run, grid, spec: WeightSpec):
    delta = -spec.kappa * spec.s1
    rows = []
    for state in run.states:
        g = spectral_gradient(state.u, grid)
        gnorm2 = sum(np.abs(gi) ** 2 for gi in g)
        gn = float(np.sqrt(np.sum(
            gnorm2 * (1.0 + np.sum(grid.centered_coords() ** 2, axis=-1))
            ** (delta - spec.s)) * grid.cell_volume))
        rows.append({
            "t": state.t,
            "u": weighted_norm(state.u, grid, delta),
            "dudt": weighted_norm(state.v, grid, delta),
            "grad": gn,
        })
    return rows


def _write_csv(path, rows, fieldnames):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


def run_scenario(path, out_dir) -> int:
    """Execute a scenario document; returns the process exit code."""
    doc = _load_json(path)
    base = Path(path).parent if isinstance(path, (str, Path)) else Path(".")
    scenario = Scenario(doc, base)
    out = Path(out_dir)
    run = run_damped_wave(scenario.medium, scenario.grid, scenario.initial_data(),
                          scenario.t_end, dt=scenario.dt(),
                          snapshot_times=scenario.snapshot_times)
    _write_snapshots(out, run, scenario.manifest({"experiment": scenario.experiment}))
    rows = _decay_series(run, scenario.grid, scenario.weights)
    _write_csv(out / "decay.csv", rows, ["t", "u", "dudt", "grad"])

    times = np.array([r["t"] for r in rows])
    window = (scenario.t_wrap / 7.0, scenario.t_wrap)
    fits = {}
    for key, predicted in (("u", -(scenario.weights.s1 + scenario.weights.s2) / 2.0),
                           ("dudt", -1.0 - (scenario.weights.s1 + scenario.weights.s2) / 2.0),
                           ("grad", -(1.0 + scenario.weights.s) / 2.0
                            - (scenario.weights.s1 + scenario.weights.s2) / 2.0)):
        try:
            rep = fit_decay_exponent(times, [r[key] for r in rows], window, predicted)
            fits[key] = rep.to_dict()
        except PeriodicaError as exc:
            fits[key] = {"error": str(exc)}
    _write_json(out / "fit.json", fits)
    return EXIT_OK


def perturbation_experiment(path, out_dir, strict: bool = True):
    """Run the same initial data through perturbed and periodic media.

    Emits paired decay series, the difference series, and its fitted
    exponent against the eta-improved prediction.  With ``strict`` the
    admissibility constraint on (s1, s2, eta) versus the perturbation decay
    rates is enforced.
    """
    doc = _load_json(path)
    base = Path(path).parent if isinstance(path, (str, Path)) else Path(".")
    scenario = Scenario(doc, base)
    med = scenario.medium
    if not med.has_perturbation:
        raise ConfigError("perturbation experiment needs a perturbed medium")
    w = scenario.weights
    rho_G = med.G_0.decay_rate if med.G_0 is not None else np.inf
    rho_a = min(f.decay_rate for f in (med.w_0, med.a_0) if f is not None) \
        if (med.w_0 is not None or med.a_0 is not None) else np.inf
    if strict and not w.admissible_for(med.dimension, rho_G, rho_a):
        raise ConstraintViolation(
            f"max(s1,s2)+eta = {max(w.s1, w.s2) + w.eta} is not below "
            f"min(d/2, rho_G, rho_a+1) = {min(med.dimension / 2, rho_G, rho_a + 1)}")

    init = scenario.initial_data()
    kw = dict(dt=scenario.dt(), snapshot_times=scenario.snapshot_times)
    run_pert = run_damped_wave(med, scenario.grid, init, scenario.t_end, **kw)
    run_free = run_damped_wave(med.without_perturbation(), scenario.grid, init,
                               scenario.t_end, **kw)

    delta = -w.kappa * w.s1
    rows = []
    for sp, sf in zip(run_pert.states, run_free.states):
        rows.append({
            "t": sp.t,
            "diff": weighted_norm(sp.u - sf.u, scenario.grid, delta),
            "periodic": weighted_norm(sf.u, scenario.grid, delta),
            "perturbed": weighted_norm(sp.u, scenario.grid, delta),
        })
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "perturbation.csv", rows, ["t", "diff", "periodic", "perturbed"])

    times = np.array([r["t"] for r in rows])
    window = (scenario.t_wrap / 7.0, scenario.t_wrap)
    base_exp = -(w.s1 + w.s2) / 2.0
    fit_diff = fit_decay_exponent(times, [r["diff"] for r in rows], window,
                                  base_exp - w.eta / 2.0)
    fit_base = fit_decay_exponent(times, [r["periodic"] for r in rows], window, base_exp)
    report = {
        "diff": fit_diff.to_dict(),
        "periodic": fit_base.to_dict(),
        "gap": fit_base.fitted_exponent - fit_diff.fitted_exponent,
        "strict": strict,
    }
    _write_json(out / "perturbation_fit.json", report)
    _write_json(out / "manifest.json", scenario.manifest({"experiment": "perturbation"}))
    return report


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def _cmd_homogenize(args) -> int:
    medium = build_medium(_load_json(args.config))
    data = homogenize(medium, args.resolution, args.tol)
    doc = data.to_dict()
    doc["manifest"] = {
        "version": __version__,
        "config_hash": _config_hash(_load_json(args.config)),
        "tolerance": args.tol,
    }
    _write_json(args.out, doc)
    print(f"G_h = {data.G_h.tolist()}  b_h = {data.b_h:.12g}")
    return EXIT_OK


def _parse_radii(text: str) -> np.ndarray:
    lo, hi, count = text.split(":")
    return np.geomspace(float(lo), float(hi), int(count))


def _parse_path(text: str, dimension: int) -> np.ndarray:
    if text.startswith("ray:"):
        which = text[4:]
        e = np.zeros(dimension)
        if which.startswith("e"):
            e[int(which[1:]) - 1] = 1.0
        else:
            parts = [float(p) for p in which.split(",")]
            e = np.asarray(parts)
            e = e / np.linalg.norm(e)
        return e
    raise ConfigError(f"unknown path spec {text!r} (expected ray:e1 or ray:c1,c2)")


def _cmd_bands(args) -> int:
    medium = build_medium(_load_json(args.config))
    direction = _parse_path(args.path, medium.dimension)
    radii = _parse_radii(args.radii)
    sigmas = radii[:, None] * direction[None, :]
    band = first_band(medium, args.cutoff, sigmas)
    homog = homogenize(medium, args.resolution)
    quad = np.einsum("kd,de,ke->k", band.sigmas, homog.G_h, band.sigmas) / homog.b_h
    rows = []
    for i in range(band.sigmas.shape[0]):
        row = {f"sigma_{j + 1}": band.sigmas[i, j] for j in range(medium.dimension)}
        row.update({
            "re_lambda": band.lambdas[i].real,
            "im_lambda": band.lambdas[i].imag,
            "residual": band.residuals[i],
            "dispersion_residual": abs(band.lambdas[i] + 1j * quad[i]),
        })
        rows.append(row)
    fields = [f"sigma_{j + 1}" for j in range(medium.dimension)] + \
        ["re_lambda", "im_lambda", "residual", "dispersion_residual"]
    _write_csv(args.out, rows, fields)
    report = verify_dispersion(band, homog)
    print(f"dispersion slope {report.residual_slope:.2f}, "
          f"rate/quadratic in [{report.ratio_min:.3f}, {report.ratio_max:.3f}]")
    if args.check and (report.residual_slope < 2.8 or not report.bounds_ok):
        return EXIT_CHECK
    return EXIT_OK


def _cmd_simulate(args) -> int:
    return run_scenario(args.config, args.out)


def _cmd_compare_heat(args) -> int:
    run_dir = Path(args.run)
    manifest = _load_json(run_dir / "manifest.json")
    scenario_doc = _load_json(args.config) if args.config else None
    if scenario_doc is None:
        raise ConfigError("compare-heat needs --config (the scenario used for the run)")
    scenario = Scenario(scenario_doc, Path(args.config).parent)
    if manifest["config_hash"] != _config_hash(scenario.doc):
        raise ConfigError("run directory was produced from a different scenario")
    homog = HomogenizedData.from_dict(_load_json(args.homog)) if args.homog \
        else homogenize(scenario.medium, scenario.homog_resolution, scenario.homog_tol)

    # reload snapshots
    from .evolve import WaveRun, WaveState

    states = []
    for snap in sorted(run_dir.glob("snap_*.npy")):
        side = _load_json(snap.with_suffix(".json"))
        arr = np.load(snap)
        states.append(WaveState(arr[0], arr[1], float(side["t"])))
    if not states:
        raise ConfigError(f"no snapshots under {run_dir}")
    tables = sample_on_grid(scenario.medium, scenario.grid)
    run = WaveRun(scenario.grid, states, manifest["dt"], np.zeros(len(states)), tables)

    heat = heat_comparator(scenario.medium, homog, scenario.initial_data(),
                           scenario.grid, run.times)
    report = compare_wave_heat(run, heat, homog, scenario.weights, scenario.grid)
    rows = []
    for kind, series in sorted(report.series.items()):
        for t, v in zip(report.times, series):
            rows.append({"t": t, "norm": v, "weight_s1": scenario.weights.s1,
                         "weight_s2": scenario.weights.s2, "kind": kind})
    _write_csv(args.out, rows, ["t", "norm", "weight_s1", "weight_s2", "kind"])

    window = (scenario.t_wrap / 7.0, scenario.t_wrap)
    s12 = (scenario.weights.s1 + scenario.weights.s2) / 2.0
    fits = {}
    for key, predicted in (("diff_u", -0.5 - s12), ("diff_dt", -1.5 - s12),
                           ("diff_grad", -1.0 - s12), ("heat_u", -s12),
                           ("heat_dt", -1.0 - s12)):
        try:
            fits[key] = report.fit(key, window, predicted).to_dict()
        except PeriodicaError as exc:
            fits[key] = {"error": str(exc)}
    _write_json(Path(args.out).with_suffix(".fit.json"), fits)
    for key, f in fits.items():
        if "exponent" in f:
            print(f"{key}: fitted {f['exponent']:+.3f} (predicted {f['predicted']:+.2f})")
    if args.check:
        du = fits["diff_u"].get("exponent")
        hu = fits["heat_u"].get("exponent")
        if du is None or hu is None or du > hu - 0.25 or abs(hu + s12) > 0.1:
            return EXIT_CHECK
    return EXIT_OK


def _cmd_gcc(args) -> int:
    medium = build_medium(_load_json(args.config))
    audit = gcc_audit(medium, args.horizon, args.ensemble, seed=args.seed,
                      threshold=args.threshold)
    _write_json(args.out, audit.to_dict())
    print(f"min integral {audit.min_integral:.6g}, mean {audit.mean_integral:.6g}")
    if args.threshold is not None and not audit.passed:
        return EXIT_CHECK
    return EXIT_OK


def _cmd_fit(args) -> int:
    with open(args.infile, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    times = np.array([float(r["t"]) for r in rows])
    values = np.array([float(r[args.column]) for r in rows])
    window = None
    if args.window:
        lo, hi = args.window.split(":")
        window = (float(lo), float(hi))
    report = fit_decay_exponent(times, values, window, args.predicted)
    _write_json(args.out, report.to_dict())
    print(f"exponent {report.fitted_exponent:+.4f} (residual {report.fit_residual:.3f})")
    if args.check and args.predicted is not None:
        if not report.matches_prediction(args.tol):
            return EXIT_CHECK
    return EXIT_OK


def _cmd_perturb(args) -> int:
    report = perturbation_experiment(args.config, args.out, strict=not args.no_strict)
    print(f"difference exponent {report['diff']['exponent']:+.3f}, "
          f"baseline {report['periodic']['exponent']:+.3f}, gap {report['gap']:+.3f}")
    if args.check and report["gap"] < 0.15:
        return EXIT_CHECK
    return EXIT_OK


GNUPLOT_TEMPLATE = """# generated by periodica plot
set datafile separator ','
set logscale xy
set xlabel 't'
set ylabel 'norm'
set key outside
plot \\
{plots}
"""


def _cmd_plot(args) -> int:
    if args.emit != "gnuplot":
        raise ConfigError(f"unknown plot backend {args.emit!r}")
    with open(args.infile, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        kinds = sorted({row["kind"] for row in reader}) if "kind" in fields else []
    if kinds:
        lines = [
            f"  \"< awk -F, 'NR==1 || $5 == \\\"{k}\\\"' {args.infile}\" "
            f"using 1:2 with linespoints title '{k}'" for k in kinds
        ]
    else:
        ycols = [f for f in fields if f != "t"]
        lines = [
            f"  '{args.infile}' using 1:{i + 2} with linespoints title '{name}'"
            for i, name in enumerate(ycols)
        ]
    script = GNUPLOT_TEMPLATE.format(plots=", \\\n".join(lines))
    out = Path(args.out) if args.out else Path(args.infile).with_suffix(".gp")
    out.write_text(script, encoding="utf-8")
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="periodica",
        description="Damped waves in periodic media: homogenization, bands, decay experiments")
    parser.add_argument("--threads", type=int, default=1,
                        help="reserved; reductions are deterministic regardless")
    parser.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("homogenize", help="cell problems, corrector, G_h, b_h")
    p.add_argument("--config", required=True)
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_homogenize)

    p = sub.add_parser("bands", help="first Bloch branch along a ray")
    p.add_argument("--config", required=True)
    p.add_argument("--cutoff", type=int, default=32)
    p.add_argument("--path", default="ray:e1")
    p.add_argument("--radii", default="1e-3:1e-1:40")
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--out", required=True)
    p.add_argument("--check", action="store_true")
    p.set_defaults(func=_cmd_bands)

    p = sub.add_parser("simulate", help="run a damped-wave scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("compare-heat", help="wave vs homogenized heat comparator")
    p.add_argument("--run", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--homog")
    p.add_argument("--out", required=True)
    p.add_argument("--check", action="store_true")
    p.set_defaults(func=_cmd_compare_heat)

    p = sub.add_parser("gcc", help="damping audit along classical trajectories")
    p.add_argument("--config", required=True)
    p.add_argument("--horizon", type=float, default=10.0)
    p.add_argument("--ensemble", type=int, default=4096)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--threshold", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gcc)

    p = sub.add_parser("fit", help="power-law exponent of a CSV column")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--column", default="u")
    p.add_argument("--window")
    p.add_argument("--predicted", type=float)
    p.add_argument("--tol", type=float, default=0.15)
    p.add_argument("--out", required=True)
    p.add_argument("--check", action="store_true")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("perturb", help="perturbed vs periodic paired runs")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--check", action="store_true")
    p.add_argument("--no-strict", action="store_true",
                   help="skip the (s1, s2, eta) admissibility constraint")
    p.set_defaults(func=_cmd_perturb)

    p = sub.add_parser("plot", help="emit a gnuplot script for a CSV report")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--emit", default="gnuplot")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConstraintViolation as exc:
        print(f"constraint violation: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PeriodicaError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
