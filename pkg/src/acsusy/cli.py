"""Command-line front end.

Subcommands: classify, ground-state, normalize, susy-check, spectrum,
figure, lambda-min.  Run configurations are plain key=value files; every
validation error names the offending key and line.  Figure data are
emitted as plain CSV (one header row, 17 significant digits, dot decimal
separator) with a JSON sidecar noting that coordinates are in natural
units; reports are deterministic JSON, byte-identical across reruns.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from . import ground_state, spectrum, susy_algebra, units
from .configurations import (
    ChargeConfig, Cylinder, Disk, Plane, Ring, SlabGap, characteristic_length,
    field_profile, make_axial_grid, make_radial_grid,
)
from .errors import AcsusyError, ConfigError, ThresholdViolation
from .units import Coupling, UnitContext

GEOMETRY_PARAMS = {
    "ring": ("Q", "r0"),
    "disk": ("Q", "r0"),
    "plane": ("sigma",),
    "slab_gap": ("rho", "L"),
    "cylinder": ("rho", "r0"),
}
NUMERIC_KEYS = {"Q", "r0", "sigma", "rho", "L", "kappa", "mass", "extent"}
INTEGER_KEYS = {"grid_n"}
STRING_KEYS = {"geometry", "units", "out"}
KNOWN_KEYS = NUMERIC_KEYS | INTEGER_KEYS | STRING_KEYS


@dataclass
class RunConfig:
    """Fully validated run configuration."""

    charge_config: ChargeConfig
    context: UnitContext
    kappa: float
    mass: float
    grid_n: Optional[int] = None
    extent: Optional[float] = None
    out: Optional[str] = None

    def coupling(self) -> Coupling:
        return units.coupling_for(self.charge_config, self.context,
                                  kappa=self.kappa, mass=self.mass)


def _build_charge_config(geometry: str, params: dict) -> ChargeConfig:
    if geometry == "ring":
        return Ring(total_charge=params["Q"], radius=params["r0"])
    if geometry == "disk":
        return Disk(total_charge=params["Q"], radius=params["r0"])
    if geometry == "plane":
        return Plane(surface_density=params["sigma"])
    if geometry == "slab_gap":
        return SlabGap(volume_density=params["rho"], gap_width=params["L"])
    if geometry == "cylinder":
        return Cylinder(volume_density=params["rho"], radius=params["r0"])
    raise ConfigError(
        f"unknown geometry {geometry!r}; expected one of {sorted(GEOMETRY_PARAMS)}")


def parse_config(path: str) -> RunConfig:
    """Parse and validate a key=value run configuration file.

    Defaults: kappa = -1.913 (neutron), units = natural, mass = the
    context default.  Unknown keys, missing required keys and non-numeric
    values are reported with their line number.
    """
    values: dict = {}
    lines: dict = {}
    try:
        with open(path, "r", encoding="ascii") as fh:
            raw_lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    for lineno, raw in enumerate(raw_lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, text = line.partition("=")
        key, text = key.strip(), text.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if key in NUMERIC_KEYS:
            try:
                values[key] = float(text)
            except ValueError:
                raise ConfigError(
                    f"line {lineno}: value for {key!r} is not numeric: {text!r}")
        elif key in INTEGER_KEYS:
            try:
                values[key] = int(text)
            except ValueError:
                raise ConfigError(
                    f"line {lineno}: value for {key!r} is not an integer: {text!r}")
        else:
            values[key] = text
        lines[key] = lineno

    if "geometry" not in values:
        raise ConfigError("missing required key 'geometry'")
    geometry = values["geometry"]
    if geometry not in GEOMETRY_PARAMS:
        raise ConfigError(
            f"line {lines['geometry']}: unknown geometry {geometry!r}; "
            f"expected one of {sorted(GEOMETRY_PARAMS)}")
    required = GEOMETRY_PARAMS[geometry]
    for key in required:
        if key not in values:
            raise ConfigError(f"missing required key {key!r} for geometry {geometry!r}")
    for key in (NUMERIC_KEYS & set(values)) - set(required) - {"kappa", "mass", "extent"}:
        raise ConfigError(
            f"line {lines[key]}: key {key!r} does not apply to geometry {geometry!r}")

    context = units.make_unit_context(values.get("units", "natural"))
    charge_config = _build_charge_config(geometry, values)
    kappa = values.get("kappa", context.default_kappa)
    mass = values.get("mass", context.default_mass)
    if not mass > 0.0:
        raise ConfigError(f"line {lines['mass']}: mass must be positive, got {mass}")
    return RunConfig(charge_config=charge_config, context=context, kappa=kappa,
                     mass=mass, grid_n=values.get("grid_n"),
                     extent=values.get("extent"), out=values.get("out"))


# ---------------------------------------------------------------------------
# Figure series
# ---------------------------------------------------------------------------

@dataclass
class FigureSeries:
    figure_id: int
    columns: list
    rows: np.ndarray
    params: dict

    def __post_init__(self):
        if self.rows.shape[1] != len(self.columns):
            raise AcsusyError("column count does not match header")
        if not np.all(np.isfinite(self.rows)):
            raise AcsusyError("figure series contains non-finite values")


def _axial_density_pair(configs, labels, kappa, mass, extent, n):
    ctx = units.make_unit_context("natural")
    couplings = [units.coupling_for(c, ctx, kappa=kappa, mass=mass) for c in configs]
    if extent is None:
        extent = 10.0 * max(characteristic_length(c, cp)
                            for c, cp in zip(configs, couplings))
    grid = np.linspace(-extent, extent, n)
    cols = [grid]
    for config, coupling in zip(configs, couplings):
        wf = ground_state.closed_form_axial(config, coupling, grid)
        cols.append(np.abs(wf.samples) ** 2)
    return np.column_stack(cols), labels, extent


def figure_series(figure_id: int, params: Optional[dict] = None) -> FigureSeries:
    """Probability-density series behind the three figures.

    1: |phi|^2 of the ring and disk zero modes (same total charge, same
       radius; both non-normalizable, so the arbitrary constant is 1).
    2: normalized |phi|^2 of the plane and gapped-volume zero modes.
    3: normalized cylinder densities versus r/r0 for each beta < -1.
    """
    params = dict(params or {})
    kappa = params.pop("kappa", units.KAPPA_NEUTRON)
    mass = params.pop("mass", 1.0)
    n = int(params.pop("n", 2001 if figure_id in (1, 2) else 1201))
    extent = params.pop("extent", None)

    if figure_id == 1:
        q = params.pop("total_charge", -1.0)
        r0 = params.pop("radius", 1.0)
        _reject_unknown(params)
        data, labels, extent = _axial_density_pair(
            [Ring(q, r0), Disk(q, r0)], ["phi_sq_ring", "phi_sq_disk"],
            kappa, mass, extent if extent is not None else 10.0 * r0, n)
        return FigureSeries(1, ["z"] + labels, data,
                            {"total_charge": q, "radius": r0, "kappa": kappa,
                             "mass": mass, "extent": extent, "n": n})
    if figure_id == 2:
        sigma = params.pop("surface_density", -1.0)
        rho = params.pop("volume_density", -1.0)
        gap = params.pop("gap_width", 2.0)
        _reject_unknown(params)
        data, labels, extent = _axial_density_pair(
            [Plane(sigma), SlabGap(rho, gap)], ["phi_sq_plane", "phi_sq_slabgap"],
            kappa, mass, extent, n)
        return FigureSeries(2, ["z"] + labels, data,
                            {"surface_density": sigma, "volume_density": rho,
                             "gap_width": gap, "kappa": kappa, "mass": mass,
                             "extent": extent, "n": n})
    if figure_id == 3:
        betas = [float(b) for b in params.pop("betas", (-1.2, -2.0, -5.0))]
        r0 = params.pop("radius", 1.0)
        r_max = params.pop("r_max_over_r0", 6.0)
        _reject_unknown(params)
        for beta in betas:
            s = beta * r0 * r0
            if s >= -1.0:
                raise ThresholdViolation(
                    f"beta r0^2 = {s:g} >= -1: SUSY is broken there and the "
                    "density is not normalizable; figure 3 needs beta r0^2 < -1")
        x = np.linspace(0.0, r_max, n)
        cols = [x]
        names = ["r_over_r0"]
        for beta in betas:
            a2, b2 = ground_state.normalization_cylinder(beta, r0)
            r = x * r0
            s = beta * r0 * r0
            with np.errstate(divide="ignore", invalid="ignore"):
                outer = b2 * np.where(r > 0.0, r, np.nan) ** (2.0 * s)
            density = np.where(r <= r0, a2 * np.exp(beta * r * r), outer)
            cols.append(density)
            names.append(f"phi_sq_beta_{beta:g}")
        return FigureSeries(3, names, np.column_stack(cols),
                            {"betas": betas, "radius": r0,
                             "r_max_over_r0": r_max, "n": n})
    raise ConfigError(f"unknown figure id {figure_id!r}; expected 1, 2 or 3")


def _reject_unknown(params: dict) -> None:
    if params:
        raise ConfigError(f"unknown figure parameters: {sorted(params)}")


def write_series_csv(series: FigureSeries, path: str) -> None:
    """One header row, 17 significant digits, plus a JSON sidecar with the
    generating parameters and the units note."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(series.columns) + "\n")
        for row in series.rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    sidecar = {
        "figure_id": series.figure_id,
        "columns": series.columns,
        "params": series.params,
        "units": "natural units (hbar = c = 1, energies in neutron masses); "
                 "coordinates dimensionless or in reduced Compton wavelengths",
    }
    with open(path + ".meta.json", "w", encoding="ascii") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Structured report
# ---------------------------------------------------------------------------

def run_report(run_config: RunConfig, k: int = 4, m: int = 0) -> dict:
    """Machine-readable summary: couplings, SUSY verdict, normalization,
    lambda_min comparison, algebra residuals, and the lowest spectrum.
    Deterministic for a fixed configuration."""
    config = run_config.charge_config
    coupling = run_config.coupling()
    profile = field_profile(config)
    verdict = ground_state.classify_susy(config, coupling)

    report: dict = {
        "config": {
            "geometry": config.geometry,
            "parameters": asdict(config),
            "kappa": run_config.kappa,
            "mass": run_config.mass,
            "units": run_config.context.system,
        },
        "context": {
            "electron_charge": run_config.context.electron_charge,
            "hbar_c": run_config.context.hbar_c,
        },
        "coupling": {
            "kind": coupling.kind,
            "value": coupling.value,
            "moment_scale": coupling.moment_scale,
            "defining_formula": coupling.defining_formula,
        },
        "classification": {
            "status": verdict.status,
            "divergence_mode": verdict.divergence_mode,
        },
        "lambda_min": units.lambda_min_report(run_config.kappa),
    }
    if verdict.unbroken and verdict.constants:
        report["normalization"] = dict(sorted(verdict.constants.items()))
    if isinstance(config, Cylinder):
        report["coupling"]["beta_r0_squared"] = coupling.value * config.radius**2

    # algebra residuals at two resolutions -> convergence orders
    if config.domain == "axial":
        extent = run_config.extent or 10.0 * characteristic_length(config, coupling)
        n = run_config.grid_n or 801
        grids = [make_axial_grid(config, extent, n),
                 make_axial_grid(config, extent, 2 * n - 1)]
        ratio = 2.0
    else:
        wall = run_config.extent or 8.0 * config.radius
        j = (run_config.grid_n or 600) // 10
        base = make_radial_grid(config.radius, wall, j)
        grids = [base, base.refined()]
        ratio = 3.0
    reports = []
    for g in grids:
        garr = g if isinstance(g, np.ndarray) else g.r
        ops = susy_algebra.build_operators(profile, coupling, garr, m=m)
        reports.append(susy_algebra.verify_algebra(ops))
    orders = {
        name: math.log(getattr(reports[0], name) / getattr(reports[1], name))
        / math.log(ratio)
        for name in ("anticommutator_gap", "commutator_q", "commutator_q_dagger")
    }
    report["algebra"] = {
        "coarse": asdict(reports[0]),
        "fine": asdict(reports[1]),
        "orders": orders,
    }

    # lowest spectrum per sector
    spectra = {}
    sectors = [(1, 1), (-1, -1)] if config.domain == "radial" else [(1, 1), (-1, 1)]
    for sector in sectors:
        res = spectrum.eigensolve(profile, coupling, grids[0], m=m, sector=sector,
                                  k=k, store_wavefunctions=True)
        spectra[f"tau{sector[0]:+d}_sigma{sector[1]:+d}"] = {
            "energies": res.energies.tolist(),
            "susy_status": res.susy_status,
            "tolerance": res.tolerance,
        }
    report["spectrum"] = spectra

    if isinstance(config, Cylinder):
        mismatch0 = spectrum.match_at_boundary(
            config, coupling, 0.0, m=m, sector=(1, 1),
            wall=grids[0].wall, outer_boundary="decaying")
        s = coupling.value * config.radius**2
        report["zero_mode"] = {
            "boundary_mismatch": mismatch0,
            "normalizable": bool(s < -1.0),
        }
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_classify(args) -> int:
    rc = parse_config(args.config)
    verdict = ground_state.classify_susy(rc.charge_config, rc.coupling())
    if args.json:
        payload = {"status": verdict.status,
                   "divergence_mode": verdict.divergence_mode,
                   "constants": verdict.constants}
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    else:
        lines = [f"geometry: {rc.charge_config.geometry}",
                 f"supersymmetry: {verdict.status}"]
        if verdict.divergence_mode:
            lines.append(f"divergence mode: {verdict.divergence_mode}")
        for key, val in sorted((verdict.constants or {}).items()):
            lines.append(f"{key}: {val:.12g}")
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_ground_state(args) -> int:
    rc = parse_config(args.config)
    config, coupling = rc.charge_config, rc.coupling()
    if config.domain == "axial":
        extent = args.extent or rc.extent or 10.0 * characteristic_length(config, coupling)
        n = args.grid_n or rc.grid_n or 2001
        grid = make_axial_grid(config, extent, n)
        wf = ground_state.closed_form_axial(config, coupling, grid)
        coord = "z"
    else:
        wall = args.extent or rc.extent or 8.0 * config.radius
        j = (args.grid_n or rc.grid_n or 1200) // 10
        rg = make_radial_grid(config.radius, wall, j)
        wf = ground_state.zero_mode_radial(config, coupling, rg.r)
        grid = rg.r
        coord = "r"
    values = np.real(wf.samples)
    rows = np.column_stack([grid, values, values**2])
    series = FigureSeries(0, [coord, "phi", "phi_sq"], rows,
                          {"geometry": config.geometry, "norm_kind": wf.norm_kind})
    out = args.out or rc.out
    if not out:
        raise ConfigError("ground-state needs --out (or out= in the config)")
    write_series_csv(series, out)
    return 0


def _cmd_normalize(args) -> int:
    rc = parse_config(args.config)
    config = rc.charge_config
    if not isinstance(config, Cylinder):
        raise ConfigError("normalize applies to the cylinder geometry only")
    coupling = rc.coupling()
    a2, b2 = ground_state.normalization_cylinder(coupling.value, config.radius)
    p_out = ground_state.probability_outside(coupling.value, config.radius)
    payload = {"A_squared": a2, "B_squared": b2, "probability_outside": p_out,
               "beta_r0_squared": coupling.value * config.radius**2}
    if args.json:
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    else:
        _emit("".join(f"{k}: {v:.12g}\n" for k, v in sorted(payload.items())),
              args.out)
    return 0


def _cmd_susy_check(args) -> int:
    rc = parse_config(args.config)
    if args.grid_n:
        rc.grid_n = args.grid_n
    if args.extent:
        rc.extent = args.extent
    report = run_report(rc, k=args.k, m=args.m)
    _emit(report_json(report), args.out or rc.out)
    return 0


def _cmd_spectrum(args) -> int:
    rc = parse_config(args.config)
    config, coupling = rc.charge_config, rc.coupling()
    profile = field_profile(config)
    tau, sigma = _parse_sector(args.sector)
    if config.domain == "axial":
        extent = args.extent or rc.extent or 10.0 * characteristic_length(config, coupling)
        n = args.grid_n or rc.grid_n or 2001
        grid = make_axial_grid(config, extent, n)
    else:
        wall = args.extent or rc.extent or 10.0 * config.radius
        j = (args.grid_n or rc.grid_n or 2000) // 10
        grid = make_radial_grid(config.radius, wall, j)
    res = spectrum.eigensolve(profile, coupling, grid, m=args.m,
                              sector=(tau, sigma), k=args.k,
                              store_wavefunctions=False)
    payload = {
        "energies": res.energies.tolist(),
        "m": args.m,
        "sector": [tau, sigma],
        "susy_status": res.susy_status,
        "tolerance": res.tolerance,
        "method": res.method,
    }
    if args.json:
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    else:
        lines = [f"sector tau={tau:+d} sigma={sigma:+d}, m={args.m}: "
                 f"{res.susy_status}"]
        lines += [f"  eps[{i}] = {e:.12g}" for i, e in enumerate(res.energies)]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_figure(args) -> int:
    params: dict = {}
    if args.betas:
        try:
            params["betas"] = [float(b) for b in args.betas.split(",") if b.strip()]
        except ValueError:
            raise ConfigError(f"--betas must be a comma list of numbers: {args.betas!r}")
    if args.grid_n:
        params["n"] = args.grid_n
    if args.extent:
        params["extent" if args.id != 3 else "r_max_over_r0"] = args.extent
    if args.config:
        rc = parse_config(args.config)
        params["kappa"] = rc.kappa
        params["mass"] = rc.mass
        cc = rc.charge_config
        if args.id == 1 and isinstance(cc, (Ring, Disk)):
            params["total_charge"] = cc.total_charge
            params["radius"] = cc.radius
        elif args.id == 2 and isinstance(cc, SlabGap):
            params["volume_density"] = cc.volume_density
            params["gap_width"] = cc.gap_width
        elif args.id == 2 and isinstance(cc, Plane):
            params["surface_density"] = cc.surface_density
        elif args.id == 3 and isinstance(cc, Cylinder):
            params["radius"] = cc.radius
    series = figure_series(args.id, params)
    if not args.out:
        raise ConfigError("figure needs --out")
    write_series_csv(series, args.out)
    return 0


def _cmd_lambda_min(args) -> int:
    report = units.lambda_min_report(args.kappa)
    if args.json:
        _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
        return 0
    kappa = report["kappa"]
    lines = [
        "lambda_min = 4 pi M / |e kappa|   (threshold on rho*pi*r0^2)",
        f"kappa = {kappa:.6g}:",
        f"  natural units : {report['natural_units']:.12g} (charge per length)",
        f"  gaussian      : {report['physical']['esu_per_cm']:.6e} esu/cm",
        f"  mixed         : {report['physical']['coulomb_per_cm']:.6e} C/cm",
        "presets:",
        f"  neutron kappa {units.KAPPA_NEUTRON}: "
        f"{report['presets']['neutron_kappa']['coulomb_per_cm']:.6e} C/cm",
        f"  reference |kappa| {units.KAPPA_REFERENCE_MAGNITUDE}: "
        f"{report['presets']['reference_kappa']['coulomb_per_cm']:.6e} C/cm",
        f"published estimate: {units.REFERENCE_LAMBDA_MIN_C_PER_CM:.6e} C/cm "
        f"(matches the reference preset to "
        f"{100 * report['reference_vs_published_rel_dev']:.2f}%, the neutron "
        f"preset deviates by {100 * report['neutron_vs_published_rel_dev']:.1f}%)",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _parse_sector(text: str) -> tuple:
    try:
        tau, sigma = (int(p) for p in text.split(","))
    except ValueError:
        raise ConfigError(f"--sector must look like '+1,-1', got {text!r}")
    if tau not in (1, -1) or sigma not in (1, -1):
        raise ConfigError(f"sector labels must be +1 or -1, got {text!r}")
    return tau, sigma


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acsusy",
        description="Ground states and SUSY classification of a neutral "
                    "spin-1/2 particle with an anomalous moment in "
                    "electric-field configurations.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="key=value run configuration file")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--json", action="store_true", help="emit JSON")

    p = sub.add_parser("classify", help="SUSY verdict for a configuration")
    common(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("ground-state", help="zero-mode samples as CSV")
    common(p)
    p.add_argument("--grid-n", type=int)
    p.add_argument("--extent", type=float)
    p.set_defaults(func=_cmd_ground_state)

    p = sub.add_parser("normalize", help="cylinder normalization constants")
    common(p)
    p.set_defaults(func=_cmd_normalize)

    p = sub.add_parser("susy-check", help="full structured report (JSON)")
    common(p)
    p.add_argument("--grid-n", type=int)
    p.add_argument("--extent", type=float)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--k", type=int, default=4)
    p.set_defaults(func=_cmd_susy_check)

    p = sub.add_parser("spectrum", help="lowest eigenvalues of one sector")
    common(p)
    p.add_argument("--grid-n", type=int)
    p.add_argument("--extent", type=float)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--sector", default="+1,+1")
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("figure", help="figure data series as CSV")
    p.add_argument("--id", type=int, required=True, help="figure id: 1, 2 or 3")
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="optional run config supplying geometry")
    p.add_argument("--betas", help="comma list of beta values for figure 3")
    p.add_argument("--grid-n", type=int)
    p.add_argument("--extent", type=float)
    p.set_defaults(func=_cmd_figure)

    p = sub.add_parser("lambda-min", help="trapping threshold in all unit systems")
    p.add_argument("--kappa", type=float)
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_lambda_min)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except AcsusyError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
