"""Command-line interface.

Subcommands mirror the library one-to-one: ``frame-check`` (window and
localization diagnostics), ``simulate`` (field synthesis), ``coeffs``
(needlet coefficients), ``test`` (Gaussianity test report), ``mc`` (Monte
Carlo harness) and ``alias`` (aliasing-rate experiment).

Exit codes: 0 success, 1 validation error (message names the offending flag
or path), 2 internal numerical-consistency failure.  Angles are radians,
indices zero-based; outputs are CSV or JSON with headers.  Every run with an
output location echoes its fully resolved configuration (seed included) as
JSON next to the outputs; the echoed file can be fed back through
``--config``.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .coeffs import needlet_coeffs, needlet_coeffs_from_samples
from .errors import ConsistencyError, ValidationError
from .field import GridSample, SpectralField, evaluate_grid, synthesize
from .frame import NeedletScale, localization_profile, partition_of_unity, psi_eval, tight_frame_check
from .harness import ExperimentConfig, emit_histogram, run_aliasing, run_mc, write_zscores
from .spectrum import PowerSpectrum
from .stats import report_from_coeffs, report_from_field, report_from_samples

log = logging.getLogger("torusneedlet")

_FLOAT_FMT = "{:.17g}"


# ---------------------------------------------------------------------------
# spectrum flags and file formats


def parse_g_spec(text: str, alpha: float) -> PowerSpectrum:
    """Build a spectrum from the --g flag grammar: const | cosine[:b0,b1,omega] | file:<path>."""
    if text == "const":
        return PowerSpectrum.power_law(alpha)
    if text.startswith("cosine"):
        params = (2.0, 1.0, 1.0)
        if ":" in text:
            try:
                params = tuple(float(p) for p in text.split(":", 1)[1].split(","))
            except ValueError as exc:
                raise ValidationError(f"--g cosine parameters must be numbers: {exc}") from exc
            if len(params) != 3:
                raise ValidationError("--g cosine takes three parameters: b0,b1,omega")
        return PowerSpectrum.cosine(alpha, *params)
    if text.startswith("file:"):
        path = text.split(":", 1)[1]
        if not Path(path).exists():
            raise ValidationError(f"--g file not found: {path}")
        return PowerSpectrum.from_table(alpha, path)
    raise ValidationError(f"--g must be const, cosine[:b0,b1,omega] or file:<path>, got {text!r}")


def _meta_line(**fields) -> str:
    return "# " + json.dumps(fields, sort_keys=True)


def _read_table(path: Path):
    """Read a CSV with an optional '# {json}' metadata first line."""
    meta = {}
    rows = []
    header = None
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.startswith("{"):
                    meta = json.loads(body)
                continue
            cells = [c.strip() for c in line.split(",")]
            if header is None:
                header = [c.lower() for c in cells]
                continue
            rows.append(cells)
    if header is None:
        raise ValidationError(f"input file {path} has no header row")
    return meta, header, rows


def _load_field_file(path: Path):
    """Return ('coeffs'|'samples'|'beta', payload, meta) from a data file."""
    if not path.exists():
        raise ValidationError(f"input file not found: {path}")
    meta, header, rows = _read_table(path)
    kind = meta.get("kind")
    if kind is None:
        kind = {"l": "coeffs", "m": "samples", "k": "beta"}.get(header[0])
    if kind == "coeffs":
        ls = np.array([int(r[0]) for r in rows])
        w = np.zeros(int(ls.max()) + 1 if ls.size else 1, dtype=complex)
        w[ls] = np.array([float(r[1]) for r in rows]) + 1j * np.array([float(r[2]) for r in rows])
        spec = None
        if "alpha" in meta and "g" in meta:
            spec = parse_g_spec(meta["g"], float(meta["alpha"]))
        payload = SpectralField(w=w, spectrum=spec, seed=meta.get("seed"))
    elif kind == "samples":
        payload = GridSample(values=np.array([float(r[1]) for r in rows]))
    elif kind == "beta":
        payload = np.array([float(r[1]) for r in rows])
    else:
        raise ValidationError(
            f"cannot tell what {path} holds; expected header l,re,im or m,value or k,beta"
        )
    return kind, payload, meta


def _echo_config(args, out_location) -> None:
    """Record the resolved configuration beside the run outputs."""
    resolved = {k: v for k, v in vars(args).items() if k not in ("func",)}
    resolved["version"] = __version__
    out_location = Path(out_location)
    if out_location.suffix:  # single-file output: write <stem>.config.json next to it
        target = out_location.with_suffix(out_location.suffix + ".config.json")
    else:
        out_location.mkdir(parents=True, exist_ok=True)
        target = out_location / "config.json"
    with open(target, "w") as handle:
        json.dump(resolved, handle, indent=2, sort_keys=True, default=str)
        handle.write("\n")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_frame_check(args) -> int:
    scale = NeedletScale(args.j)
    rng = np.random.default_rng(0)
    gap = float(np.max(np.abs(partition_of_unity(rng.uniform(1.0, 1e6, 512)) - 1.0)))
    if gap > 1e-12:
        raise ConsistencyError(f"partition of unity off by {gap:g} at level j={args.j}")
    xs = np.linspace(-np.pi, np.pi, 2049)
    even_gap = float(np.max(np.abs(psi_eval(scale, xs) - psi_eval(scale, -xs))))
    if even_gap > 1e-12:
        raise ConsistencyError(f"needlet evenness off by {even_gap:g}")
    j_frame = min(args.j, 5)
    deg = 2**j_frame
    c = rng.standard_normal(2 * deg + 1) + 1j * rng.standard_normal(2 * deg + 1)
    frame_gap = tight_frame_check(c, j_frame) / float(np.sum(np.abs(c) ** 2))
    if frame_gap > 1e-10:
        raise ConsistencyError(f"tight-frame energy identity off by {frame_gap:g}")
    profile = localization_profile(scale, args.k_decay)
    log.info(
        "frame-check j=%d n=%d: partition gap %.2e, frame gap %.2e, fitted localization c %.4f",
        args.j, scale.n, gap, frame_gap, profile.c_fit,
    )
    if args.out:
        with open(args.out, "w", newline="") as handle:
            handle.write(
                _meta_line(kind="localization", j=args.j, k_decay=args.k_decay, c_fit=profile.c_fit)
                + "\n"
            )
            writer = csv.writer(handle)
            writer.writerow(["x", "abs_psi", "bound"])
            for x, p, b in zip(profile.x, profile.psi_abs, profile.bound):
                writer.writerow([_FLOAT_FMT.format(x), _FLOAT_FMT.format(p), _FLOAT_FMT.format(b)])
        _echo_config(args, args.out)
    else:
        print(f"j={args.j} n={scale.n} k_decay={args.k_decay} fitted_c={profile.c_fit:.6g}")
        print(f"partition_gap={gap:.3e} frame_gap={frame_gap:.3e} even_gap={even_gap:.3e}")
    return 0


def _cmd_simulate(args) -> int:
    spec = parse_g_spec(args.g, args.alpha)
    fld = synthesize(spec, args.lmax, np.random.default_rng(args.seed))
    meta = dict(alpha=args.alpha, g=args.g, lmax=args.lmax, seed=args.seed)
    with open(args.out, "w", newline="") as handle:
        if args.emit == "coeffs":
            handle.write(_meta_line(kind="coeffs", **meta) + "\n")
            writer = csv.writer(handle)
            writer.writerow(["l", "re", "im"])
            for l in range(1, fld.l_max + 1):
                writer.writerow(
                    [l, _FLOAT_FMT.format(fld.w[l].real), _FLOAT_FMT.format(fld.w[l].imag)]
                )
        else:
            if args.grid is None:
                raise ValidationError("--emit samples requires --grid")
            samples = evaluate_grid(fld, args.grid)
            handle.write(_meta_line(kind="samples", grid=args.grid, **meta) + "\n")
            writer = csv.writer(handle)
            writer.writerow(["m", "value"])
            for m, value in enumerate(samples.values):
                writer.writerow([m, _FLOAT_FMT.format(value)])
    _echo_config(args, args.out)
    log.info("simulate: wrote %s (%s, lmax=%d, seed=%d)", args.out, args.emit, args.lmax, args.seed)
    return 0


def _cmd_coeffs(args) -> int:
    kind, payload, meta = _load_field_file(Path(args.infile))
    scale = NeedletScale(args.j)
    if args.mode == "exact":
        if kind != "coeffs":
            raise ValidationError(f"--mode exact needs a spectral coefficient file, got {kind}")
        wc = needlet_coeffs(payload, scale)
    else:
        if kind != "samples":
            raise ValidationError(f"--mode grid needs a sample file, got {kind}")
        wc = needlet_coeffs_from_samples(payload, scale)
    carried = {k: v for k, v in meta.items() if k not in ("kind", "j", "sigma2", "source")}
    with open(args.out, "w", newline="") as handle:
        handle.write(
            _meta_line(kind="beta", j=args.j, sigma2=wc.sigma2, source=wc.source, **carried) + "\n"
        )
        writer = csv.writer(handle)
        writer.writerow(["k", "beta"])
        for k, b in enumerate(wc.beta):
            writer.writerow([k, _FLOAT_FMT.format(b)])
    _echo_config(args, args.out)
    log.info("coeffs: wrote %d coefficients to %s (%s)", wc.beta.size, args.out, wc.source)
    return 0


def _cmd_test(args) -> int:
    if (args.infile is None) == (args.samples is None):
        raise ValidationError("test needs exactly one of --in or --samples")
    path = Path(args.infile if args.infile is not None else args.samples)
    kind, payload, meta = _load_field_file(path)
    scale = NeedletScale(args.j)
    seed = meta.get("seed")
    if args.samples is not None and kind != "samples":
        raise ValidationError(f"--samples expects m,value rows, got a {kind} file")
    if kind == "samples":
        if args.mode == "exact":
            raise ValidationError("--mode exact is unavailable for sample input (no spectrum)")
        report = report_from_samples(payload, scale, seed=seed)
    elif kind == "coeffs":
        if args.mode == "exact" and payload.spectrum is None:
            raise ValidationError(
                "--mode exact needs alpha/g metadata in the input file to rebuild the spectrum"
            )
        report = report_from_field(payload, scale, args.mode, seed=seed)
    else:  # bare needlet coefficients
        if args.mode == "exact":
            raise ValidationError("--mode exact is unavailable for a bare coefficient file")
        from .coeffs import WaveletCoefficients

        wc = WaveletCoefficients(scale=scale, beta=payload, sigma2=1.0, source="file")
        report = report_from_coeffs(wc, seed=seed)
    payload_json = {
        "N": report.n,
        "M_N": report.mean,
        "S_N": report.skewness,
        "U_N": report.kurtosis,
        "var_S": report.variances.skew,
        "var_U1": report.variances.kurt1,
        "var_U2": report.variances.kurt2,
        "z_S": report.z_skew,
        "z_U": report.z_kurt,
        "p_S": report.p_skew,
        "p_U": report.p_kurt,
        "p_joint": report.p_joint,
        "mode": {"theoretical": "exact", "estimated": "studentized"}[report.mode],
        "seed": seed,
    }
    with open(args.report, "w") as handle:
        json.dump(payload_json, handle, indent=2)
        handle.write("\n")
    _echo_config(args, args.report)
    log.info(
        "test: N=%d mode=%s z_S=%.3f (p=%.3g) z_U=%.3f (p=%.3g) -> %s",
        report.n, report.mode, report.z_skew, report.p_skew, report.z_kurt, report.p_kurt, args.report,
    )
    return 0


def _cmd_mc(args) -> int:
    spec = parse_g_spec(args.g, args.alpha)
    mode = "grid" if args.grid is not None else args.mode
    config = ExperimentConfig(
        replications=args.reps,
        j=args.j,
        spectrum=spec,
        mode=mode,
        grid_m=args.grid,
        seed=args.seed,
        workers=args.workers,
    )
    result = run_mc(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_zscores(result, out / "zscores.csv")
    emit_histogram(result.z_skew, args.bins, out / "hist_s.csv")
    emit_histogram(result.z_kurt, args.bins, out / "hist_u.csv")
    with open(out / "diagnostics.json", "w") as handle:
        json.dump(
            {"z_S": result.diagnostics_skew.to_dict(), "z_U": result.diagnostics_kurt.to_dict()},
            handle,
            indent=2,
        )
        handle.write("\n")
    _echo_config(args, out)
    log.info(
        "mc: %d reps at N=%d (%s): z_S var %.3f KS p %.3g; z_U var %.3f KS p %.3g",
        args.reps, NeedletScale(args.j).n, mode,
        result.diagnostics_skew.variance, result.diagnostics_skew.ks_pvalue,
        result.diagnostics_kurt.variance, result.diagnostics_kurt.ks_pvalue,
    )
    return 0


def _cmd_alias(args) -> int:
    spec = parse_g_spec(args.g, args.alpha)
    try:
        grids = [int(m) for m in args.grids.split(",") if m]
    except ValueError as exc:
        raise ValidationError(f"--grids must be a comma-separated integer list: {exc}") from exc
    config = ExperimentConfig(
        replications=args.reps, j=args.j, spectrum=spec, mode="exact", seed=args.seed
    )
    result = run_aliasing(config, grids)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "aliasing.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["M", "rel_error", "fitted_exponent"])
        for m, err in zip(result.grid_sizes, result.rel_errors):
            writer.writerow([m, _FLOAT_FMT.format(err), _FLOAT_FMT.format(result.fitted_exponent)])
    _echo_config(args, out)
    log.info("alias: fitted exponent %.3f over grids %s", result.fitted_exponent, result.grid_sizes)
    return 0


# ---------------------------------------------------------------------------
# parser assembly, config files, dispatch


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="torusneedlet",
        description="Needlet analysis and Gaussianity tests for random fields on the circle.",
    )
    parser.add_argument("--config", help="file of key = value lines (or echoed JSON) providing flag defaults")
    parser.add_argument("--version", action="version", version=f"torusneedlet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    registry = {}

    p = sub.add_parser("frame-check", help="window/frame self-checks and localization profile")
    p.add_argument("--j", type=int, required=True, help="resolution level")
    p.add_argument("--k-decay", dest="k_decay", type=int, default=3, help="decay order of the fitted envelope")
    p.add_argument("--out", help="CSV output path (default: print a summary)")
    p.set_defaults(func=_cmd_frame_check)
    registry["frame-check"] = p

    p = sub.add_parser("simulate", help="synthesize a Gaussian field")
    p.add_argument("--alpha", type=float, required=True, help="spectral decay exponent (> 1)")
    p.add_argument("--lmax", type=int, required=True, help="bandwidth of the synthesis")
    p.add_argument("--seed", type=int, required=True, help="root RNG seed")
    p.add_argument("--grid", type=int, help="grid size for --emit samples")
    p.add_argument("--g", default="const", help="modulation: const | cosine[:b0,b1,omega] | file:<path>")
    p.add_argument("--emit", choices=["coeffs", "samples"], default="coeffs")
    p.add_argument("--out", required=True, help="output file")
    p.set_defaults(func=_cmd_simulate)
    registry["simulate"] = p

    p = sub.add_parser("coeffs", help="needlet coefficients of a stored field")
    p.add_argument("--in", dest="infile", required=True, help="field file from simulate")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--mode", choices=["exact", "grid"], default="exact")
    p.add_argument("--out", required=True, help="CSV output path (k,beta)")
    p.set_defaults(func=_cmd_coeffs)
    registry["coeffs"] = p

    p = sub.add_parser("test", help="Gaussianity test report")
    p.add_argument("--in", dest="infile", help="field or coefficient file")
    p.add_argument("--samples", help="CSV of m,value rows (runs the discrete-sampling pipeline)")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--mode", choices=["exact", "studentized"], default="studentized")
    p.add_argument("--report", required=True, help="JSON report path")
    p.set_defaults(func=_cmd_test)
    registry["test"] = p

    p = sub.add_parser("mc", help="Monte Carlo reproduction of the CLT")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mode", choices=["exact", "studentized"], default="exact")
    p.add_argument("--grid", type=int, help="grid size; switches to the discrete-sampling pipeline")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--bins", type=int, default=30, help="histogram bins")
    p.add_argument("--g", default="const")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_mc)
    registry["mc"] = p

    p = sub.add_parser("alias", help="aliasing error vs grid size")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--grids", required=True, help="comma-separated grid sizes")
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--g", default="const")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_alias)
    registry["alias"] = p

    return parser, registry


def _load_config_file(path: Path) -> dict:
    if not path.exists():
        raise ValidationError(f"--config file not found: {path}")
    text = path.read_text()
    if text.lstrip().startswith("{"):
        return json.loads(text)
    values = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"--config line is not 'key = value': {line!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config_defaults(registry, overrides: dict) -> None:
    for sp in registry.values():
        defaults = {}
        for action in sp._actions:
            if action.dest in overrides and overrides[action.dest] is not None:
                raw = overrides[action.dest]
                if action.type is not None and isinstance(raw, str):
                    raw = action.type(raw)
                defaults[action.dest] = raw
                action.required = False  # the config file already supplies it
        if defaults:
            sp.set_defaults(**defaults)


def main(argv=None) -> int:
    """Entry point; returns the process exit code."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = _build_parser()
    try:
        if "--config" in argv:
            cfg_path = Path(argv[argv.index("--config") + 1])
            _apply_config_defaults(registry, _load_config_file(cfg_path))
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # argparse exits 2 on usage errors; ours are code 1
            return 0 if exc.code in (0, None) else 1
        return args.func(args)
    except ValidationError as exc:
        log.error("%s", exc)
        return 1
    except FileNotFoundError as exc:
        log.error("file not found: %s", exc.filename)
        return 1
    except ConsistencyError as exc:
        log.error("numerical consistency failure: %s", exc)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
