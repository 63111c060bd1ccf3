"""Command-line front end: ``msaw <subcommand> [options]``.

Data goes to files or standard output, messages to standard error. Exit
status is 0 on success, 1 for usage or validation errors and 2 when the
processing itself fails.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .calib import (
    CalibrationError,
    SensitivityModel,
    SweepRecord,
    SweepRow,
    compensate_sweep,
    fit_magnetic_sensitivity,
    fit_tcf,
    superposition_spread,
)
from .device import EnvironmentState, synthesize_s11
from .dispersion import DispersionProblem, solve_modes
from .io import tables
from .io.scenario import (
    Scenario,
    ScenarioError,
    build_environment,
    build_geometry,
    build_grid,
    build_physics,
    build_pipeline_overrides,
    build_stack,
    load_scenario,
)
from .io.tables import TableError, dumps_csv, loads_csv
from .io.touchstone import TouchstoneError, TouchstoneRecord, read_s1p, write_s1p
from .magnetics import fractional_shift
from .pipeline import GridError, gates_for, locate_echoes, read_echoes, to_time_domain
from .plot import KINDS, PlotError, PlotSpec, emit_plot
from .rfid import CodeError, TagCode, decode, default_template, encode
from .sweeps import field_points, parse_range, run_sweep, settings_for, temperature_points

SCENARIO_DIR_ENV = "MSAW_SCENARIO_DIR"
DEFAULT_SCENARIO = "default.json"


class UsageError(ValueError):
    pass


VALIDATION_ERRORS = (UsageError, ScenarioError, TouchstoneError, TableError, PlotError,
                     CodeError, GridError, OSError)
PROCESSING_ERRORS = (ValueError, ArithmeticError, KeyError, RuntimeError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- shared helpers -----------------------------------------------------------

def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def load_named_scenario(name: Optional[str], strict: bool = False) -> Scenario:
    """Resolve ``name`` against the working directory, then ``$MSAW_SCENARIO_DIR``.

    ``default.json`` falls back to the built-in defaults when no such file
    exists, so recipes run on a clean checkout.
    """
    base = os.environ.get(SCENARIO_DIR_ENV)
    target = name or DEFAULT_SCENARIO
    candidates = [target]
    if base and not os.path.isabs(target):
        candidates.append(os.path.join(base, target))
    for c in candidates:
        if os.path.isfile(c):
            return load_scenario(_read_text(c), strict=strict)
    if os.path.basename(target) in ("default", DEFAULT_SCENARIO):
        return Scenario()
    raise UsageError(f"scenario file not found: {target}")


def _range(text: Optional[str], what: str) -> list[float]:
    if text is None:
        raise UsageError(f"{what} range is required (start:stop:step)")
    try:
        return parse_range(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _pair(text: str, what: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"{what} must be lo:hi, got {text!r}")
    if not a < b:
        raise UsageError(f"{what} must satisfy lo < hi")
    return a, b


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of numbers")


class Context:
    """Scenario plus the global noise flags, resolved once per invocation."""

    def __init__(self, args):
        self.args = args
        self.scenario = load_named_scenario(getattr(args, "scenario", None),
                                            getattr(args, "strict_config", False))
        sc = self.scenario
        self.geometry = build_geometry(sc)
        self.physics = build_physics(sc)
        self.env = build_environment(sc)
        self.grid = build_grid(sc)
        self.overrides = build_pipeline_overrides(sc)
        seed = getattr(args, "seed", None)
        self.seed = sc.noise.seed if seed is None else seed
        snr = getattr(args, "snr_db", None)
        self.snr_db = sc.noise.snr_db if snr is None else snr

    def settings(self, grid=None, **kw):
        merged = dict(self.overrides)
        merged.update(kw)
        return settings_for(self.geometry, grid or self.grid, self.physics, **merged)

    def header(self, command: str) -> str:
        snr = "none" if self.snr_db is None else f"{self.snr_db:g}"
        return f"msaw {__version__} {command} seed={self.seed} snr_db={snr}"


def _spectrum_rows(spectrum):
    v = spectrum.values
    with np.errstate(divide="ignore"):
        db = 20 * np.log10(np.abs(v))
    return zip(spectrum.frequencies, v.real, v.imag, db)


def _sweep_rows_from_csv(path: str) -> list[SweepRow]:
    rows = loads_csv(_read_text(path), tables.SWEEP_COLUMNS)
    return [SweepRow(r["temperature_c"], r["field_mt"], int(r["peak_id"]), r["f_zero_hz"],
                     int(r["sweep_id"])) for r in rows]


# -- subcommands --------------------------------------------------------------

def cmd_simulate(args) -> int:
    ctx = Context(args)
    env = ctx.env
    if args.temperature is not None or args.field is not None:
        env = EnvironmentState(
            env.temperature if args.temperature is None else args.temperature,
            env.field if args.field is None else args.field,
            env.reference_temperature,
        )
    geometry = ctx.geometry
    comments = [ctx.header("simulate"),
                f"temperature_c={env.temperature:g} field_mt={env.field:g}"]
    code_hex = args.code if args.code is not None else ctx.scenario.rfid.code
    if code_hex is not None:
        template = default_template(geometry, ctx.physics, ctx.scenario.rfid.slot_count)
        try:
            bitmap = int(code_hex, 16)
        except ValueError:
            raise UsageError(f"--code must be hexadecimal, got {code_hex!r}")
        code = TagCode.from_bitmap(template, bitmap)
        if code.bitmap != bitmap:
            raise CodeError(f"code {code_hex} needs more than {template.slot_count} slots")
        geometry = encode(code, geometry, ctx.physics, ctx.scenario.rfid.amplitude_db)
        comments.append(f"tag_code={code.hex} slot_count={template.slot_count}")
    spectrum = synthesize_s11(geometry, ctx.physics, env, ctx.grid, snr_db=ctx.snr_db, seed=ctx.seed)
    if spectrum.band_warning:
        _info("warning: IDT band response is not negligible at the grid edges")
    record = TouchstoneRecord.from_spectrum(spectrum, fmt=args.format, comments=comments)
    _emit(write_s1p(record), args.out)
    if args.spectrum_csv:
        _emit(dumps_csv(tables.SPECTRUM_COLUMNS, _spectrum_rows(spectrum), [ctx.header("simulate")]),
              args.spectrum_csv)
    return 0


def cmd_interrogate(args) -> int:
    ctx = Context(args)
    spectrum = read_s1p(_read_text(args.input)).to_spectrum()
    kw = {"peak_count": args.peaks} if args.peaks else {}
    settings = ctx.settings(grid=spectrum, **kw)
    peaks = locate_echoes(spectrum, settings)
    if len(peaks) < settings.peak_count:
        _info(f"warning: found {len(peaks)} of {settings.peak_count} echoes")
    readings = read_echoes(spectrum, gates_for(peaks, settings), settings)
    rows = [(pid, r.gate.center, r.tracked.f_zero, r.level_db) for pid, r in sorted(readings.items())]
    _emit(dumps_csv(tables.INTERROGATE_COLUMNS, rows, [ctx.header("interrogate")]), args.out)
    if args.time_csv:
        tr = to_time_domain(spectrum, settings.zero_pad_factor, settings.gain)
        keep = tr.times <= args.time_max if args.time_max else slice(None)
        _emit(dumps_csv(tables.TIME_COLUMNS, zip(tr.times[keep], tr.level_db[keep]),
                        [ctx.header("interrogate")]), args.time_csv)
    if args.spectrum_csv:
        _emit(dumps_csv(tables.SPECTRUM_COLUMNS, _spectrum_rows(spectrum), [ctx.header("interrogate")]),
              args.spectrum_csv)
    return 0


def cmd_sweep(args) -> int:
    ctx = Context(args)
    sc = ctx.scenario.sweep
    vary = args.vary or sc.vary
    text = args.range_opt or args.range_pos
    peak_ids = tuple(int(v) for v in _floats(args.peaks, "--peaks"))
    ref_t = ctx.env.reference_temperature
    if vary == "temperature":
        temps = _range(text, "temperature") if text else sc.temperatures_c
        field = ctx.env.field if args.field is None else args.field
        points = temperature_points(temps, field, ref_t)
    else:
        fields = _range(text, "field") if text else sc.fields_mt
        temps = _floats(args.temperatures, "--temperatures") if args.temperatures \
            else [ctx.env.temperature]
        if args.drift_c is not None:
            drift = [args.drift_c * np.sign(t - args.ambient) for t in temps]
        else:
            drift = sc.drift_c if len(sc.drift_c) == len(temps) else []
        points = field_points(fields, temps, drift, ref_t)
    record = run_sweep(points, ctx.geometry, ctx.physics, ctx.grid, ctx.settings(),
                       snr_db=ctx.snr_db, seed=ctx.seed, peak_ids=peak_ids)
    rows = [(r.sweep_id, r.temperature, r.field, r.peak_id, r.f_zero) for r in record.rows]
    _emit(dumps_csv(tables.SWEEP_COLUMNS, rows, [ctx.header(f"sweep vary={vary}")]), args.out)
    return 0


def cmd_calibrate(args) -> int:
    if not (args.temperature_csv or args.field_csv):
        raise UsageError("give --temperature-csv and/or --field-csv")
    out = []
    if args.temperature_csv:
        record = SweepRecord(_sweep_rows_from_csv(args.temperature_csv))
        for pid in sorted({r.peak_id for r in record.rows}):
            fit = fit_tcf(record.peak(pid))
            out.append(("tcf", pid, fit.slope, "ppm/degC", fit.r_squared, fit.residual_rms))
            _info(f"peak {pid}: TCF = {fit.slope:.3f} ppm/degC (R^2 = {fit.r_squared:.6f})")
    if args.field_csv:
        record = SweepRecord(_sweep_rows_from_csv(args.field_csv))
        sweep = record.sweep_ids()[0] if args.sweep_id is None else args.sweep_id
        if sweep not in record.sweep_ids():
            raise UsageError(f"sweep {sweep} not present in {args.field_csv}")
        window = _pair(args.window, "--window")
        for pid in sorted({r.peak_id for r in record.rows}):
            mf = fit_magnetic_sensitivity(record.series(sweep, pid), window)
            fit = mf.fit
            out.append(("magnetic_slope", pid, mf.slope, "ppm/mT", fit.r_squared, fit.residual_rms))
            out.append(("hz_per_ut", pid, mf.hz_per_ut, "Hz/uT", fit.r_squared, fit.residual_rms))
            _info(f"peak {pid}: {mf.slope:.2f} ppm/mT, {mf.hz_per_ut:.1f} Hz/uT")
    _emit(dumps_csv(tables.CALIBRATE_COLUMNS, out, ["msaw calibrate"]), args.out)
    return 0


def _tcfs_from_calibration(path: str) -> tuple[float, float]:
    rows = loads_csv(_read_text(path), tables.CALIBRATE_COLUMNS)
    tcf = {int(r["peak_id"]): r["value"] for r in rows if r["quantity"] == "tcf"}
    missing = [p for p in (1, 2) if p not in tcf]
    if missing:
        raise CalibrationError(f"calibration table lacks TCF for peak(s) {missing}")
    return tcf[1], tcf[2]


def cmd_compensate(args) -> int:
    record = SweepRecord(_sweep_rows_from_csv(args.input))
    if args.calibration:
        tcf1, tcf2 = _tcfs_from_calibration(args.calibration)
    elif args.tcf1 is not None and args.tcf2 is not None:
        tcf1, tcf2 = args.tcf1, args.tcf2
    else:
        raise UsageError("give --calibration or both --tcf1 and --tcf2")
    tcf1 = tcf1 if args.tcf1 is None else args.tcf1
    tcf2 = tcf2 if args.tcf2 is None else args.tcf2
    points = compensate_sweep(record, SensitivityModel(tcf1, tcf2), args.reference, args.reference_sweep)
    rows = [(p.sweep_id, p.temperature, p.field, p.shift2, p.compensated) for p in points]
    _info(f"spread across sweeps: raw {superposition_spread(points, 'shift2'):.2f} ppm, "
          f"compensated {superposition_spread(points):.2f} ppm")
    _emit(dumps_csv(tables.COMPENSATE_COLUMNS, rows, [f"msaw compensate reference={args.reference}"]),
          args.out)
    return 0


def cmd_decode(args) -> int:
    ctx = Context(args)
    spectrum = read_s1p(_read_text(args.input)).to_spectrum()
    slots = args.slot_count or ctx.scenario.rfid.slot_count
    template = default_template(ctx.geometry, ctx.physics, slots)
    settings = ctx.settings(grid=spectrum)
    tr = to_time_domain(spectrum, settings.zero_pad_factor, settings.gain)
    threshold = ctx.scenario.rfid.threshold_db if args.threshold_db is None else args.threshold_db
    code = decode(tr, template, threshold)
    _emit(code.hex + "\n", args.out)
    return 0


def cmd_disperse(args) -> int:
    ctx = Context(args)
    stack = build_stack(ctx.scenario)
    values = _range(args.range_opt or args.range_pos, "control")
    wavelength = ctx.geometry.wavelength
    if args.control == "thickness":
        names = [l.material.name for l in stack.layers]
        if args.layer not in names:
            raise UsageError(f"layer {args.layer!r} not in stack ({', '.join(names) or 'none'})")
        index = names.index(args.layer)
    rows = []
    for x in values:
        if args.control == "thickness":
            problem = DispersionProblem(stack.with_thickness(index, x), wavelength=wavelength)
        elif args.control == "wavelength":
            problem = DispersionProblem(stack, wavelength=x)
        else:
            problem = DispersionProblem(stack, frequency=x)
        modes = solve_modes(problem, max_modes=args.modes)
        if not modes:
            _info(f"warning: no guided mode at control={x:g}")
        rows += [(x, m.mode_index, m.phase_velocity, m.residual) for m in modes]
    _emit(dumps_csv(tables.DISPERSE_COLUMNS, rows, [f"msaw disperse control={args.control}"]), args.out)
    return 0


def cmd_magcurve(args) -> int:
    ctx = Context(args)
    fields = _range(args.range_opt or args.range_pos or "-4:4:0.05", "field")
    model = ctx.physics.magnetoelastic
    rows = [(h, float(fractional_shift(model, h))) for h in fields]
    _emit(dumps_csv(tables.MAGCURVE_COLUMNS, rows, ["msaw magcurve"]), args.out)
    return 0


def cmd_plot(args) -> int:
    spec = PlotSpec(
        kind=args.kind,
        title=args.title or "",
        xlabel=args.xlabel,
        ylabel=args.ylabel,
        xrange=_pair(args.xrange, "--xrange") if args.xrange else None,
        yrange=_pair(args.yrange, "--yrange") if args.yrange else None,
        peak_id=args.peak_id,
    )
    text = _read_text(args.input)
    header = next((ln for ln in text.splitlines() if ln and not ln.startswith("#")), "")
    columns = [c.strip() for c in header.split(",")] if header else []
    rows = loads_csv(text) if header else []
    _emit(emit_plot(spec, columns, rows), args.out)
    return 0


# -- parser -------------------------------------------------------------------

def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = {"default": argparse.SUPPRESS} if suppress else {}
    parser.add_argument("--seed", type=int, help="noise seed (default: scenario value, 0)", **d)
    parser.add_argument("--snr-db", type=float, help="add noise at this SNR", **d)
    parser.add_argument("--strict-config", action="store_true",
                        help="reject unknown scenario keys instead of warning", **d)
    parser.add_argument("--scenario", help=f"scenario JSON (searched in ${SCENARIO_DIR_ENV} too)", **d)


def _add_range(p: argparse.ArgumentParser, what: str) -> None:
    p.add_argument("range_pos", nargs="?", metavar="RANGE", help=f"{what} as start:stop:step")
    p.add_argument("--range", dest="range_opt", metavar="START:STOP:STEP",
                   help="same as RANGE; use --range=... for negative starts")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="msaw", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"msaw {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("simulate", cmd_simulate, "synthesize S11 of the device into a Touchstone file")
    p.add_argument("--out", help="output .s1p (default: stdout)")
    p.add_argument("--format", choices=("RI", "MA", "DB"), default="RI")
    p.add_argument("--temperature", type=float, help="degC, overrides the scenario")
    p.add_argument("--field", type=float, help="mT, overrides the scenario")
    p.add_argument("--code", help="hex tag code; builds the identification layout")
    p.add_argument("--spectrum-csv", help="also write the spectrum as CSV")

    p = add("interrogate", cmd_interrogate, "locate, gate and track the echoes of a measured S11")
    p.add_argument("--in", dest="input", required=True, help="input .s1p")
    p.add_argument("--out", help="echo table CSV (default: stdout)")
    p.add_argument("--peaks", type=int, help="number of echoes to look for")
    p.add_argument("--time-csv", help="also write the time envelope as CSV")
    p.add_argument("--time-max", type=float, help="truncate the time CSV at this time (s)")
    p.add_argument("--spectrum-csv", help="also write the spectrum as CSV")

    p = add("sweep", cmd_sweep, "simulate and track an environment sweep")
    p.add_argument("--vary", choices=("temperature", "field"))
    _add_range(p, "swept values")
    p.add_argument("--field", type=float, help="fixed field for temperature sweeps (mT)")
    p.add_argument("--temperatures", help="comma list of sweep temperatures for field sweeps")
    p.add_argument("--drift-c", type=float,
                   help="per-sweep temperature drift magnitude, signed away from --ambient")
    p.add_argument("--ambient", type=float, default=21.0)
    p.add_argument("--peaks", default="1,2", help="comma list of peak ids to track")
    p.add_argument("--out", help="sweep CSV (default: stdout)")

    p = add("calibrate", cmd_calibrate, "fit TCF and magnetic sensitivity from sweep tables")
    p.add_argument("--temperature-csv", help="temperature sweep CSV")
    p.add_argument("--field-csv", help="field sweep CSV")
    p.add_argument("--sweep-id", type=int, help="sweep of --field-csv to fit (default: first)")
    p.add_argument("--window", default="-0.19:0.69", help="linear field window lo:hi (mT)")
    p.add_argument("--out", help="calibration CSV (default: stdout)")

    p = add("compensate", cmd_compensate, "temperature-compensate path-2 field sweeps")
    p.add_argument("--in", dest="input", required=True, help="field sweep CSV")
    p.add_argument("--calibration", help="calibration CSV holding both TCFs")
    p.add_argument("--tcf1", type=float)
    p.add_argument("--tcf2", type=float)
    p.add_argument("--reference", choices=("global", "sweep"), default="global")
    p.add_argument("--reference-sweep", type=int)
    p.add_argument("--out", help="compensated CSV (default: stdout)")

    p = add("decode", cmd_decode, "read the identification code of a tag spectrum")
    p.add_argument("--in", dest="input", required=True, help="input .s1p")
    p.add_argument("--slot-count", type=int)
    p.add_argument("--threshold-db", type=float)
    p.add_argument("--out", help="write the hex code here (default: stdout)")

    p = add("disperse", cmd_disperse, "Love-mode phase velocity versus a stack parameter")
    p.add_argument("--control", choices=("thickness", "wavelength", "frequency"), default="thickness")
    p.add_argument("--layer", default="ZnO", help="layer whose thickness is varied")
    p.add_argument("--modes", type=int, default=1)
    _add_range(p, "control values (SI units)")
    p.add_argument("--out", help="dispersion CSV (default: stdout)")

    p = add("magcurve", cmd_magcurve, "magnetoelastic shift model versus field")
    _add_range(p, "field values in mT (default -4:4:0.05)")
    p.add_argument("--out", help="CSV (default: stdout)")

    p = add("plot", cmd_plot, "render a CSV table as SVG")
    p.add_argument("--kind", required=True, choices=tuple(KINDS))
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", help="SVG path (default: stdout)")
    p.add_argument("--title")
    p.add_argument("--xlabel")
    p.add_argument("--ylabel")
    p.add_argument("--xrange", help="lo:hi")
    p.add_argument("--yrange", help="lo:hi")
    p.add_argument("--peak-id", type=int, help="only rows of this peak")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except VALIDATION_ERRORS as exc:
        _info(f"msaw {args.command}: error: {exc}")
        return 1
    except PROCESSING_ERRORS as exc:
        _info(f"msaw {args.command}: failed: {exc}")
        return 2


def run() -> None:  # console-script entry point
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    run()
