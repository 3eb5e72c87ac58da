"""Command-line front end: ``spopo <command> [options]``.

Every command writes its outputs plus ``<command>_config.json`` (the resolved
options, including the seed) into ``--out``.  Passing that file back with ``--config``
reproduces the outputs byte for byte.  Failures print a JSON object to
stderr and exit with status 2; a cluster search that stays above shot noise
exits with status 3 after writing its report.
"""

import argparse
import csv
import hashlib
import json
import os
import secrets
import sys
import warnings
from dataclasses import replace

import numpy as np

from . import __version__
from .cluster import (
    ESConfig,
    build_cluster_covariance,
    load_graph,
    optimize_cluster_basis,
)
from .config import DEFAULT_TOLERANCES
from .entanglement import ppt_all, ppt_min_eigenvalue, single_mode_reference
from .errors import NoImprovementWarning, SpopoError
from .gaussian import covariance_from_json, purity, save_covariance
from .model import (
    SimulationSettings,
    analytic_eigenvalues,
    frequency_grid,
    load_spec,
    pixels_from_dict,
    pixels_to_dict,
    realistic_spec,
    simulate,
    supermode_variances,
)
from .plots import line_chart
from .reconstruction import (
    MeasurementSet,
    assemble_covariance,
    correlation_matrix,
    draw_covariance,
    gram_schmidt_supermodes,
    monte_carlo_spectrum,
)

EXIT_OK, EXIT_ERROR, EXIT_NO_CLUSTER = 0, 2, 3
# options that locate files rather than change results
_NOT_SNAPSHOTTED = {"out", "config", "func"}


class CliError(SpopoError):
    pass


def _num(x):
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _read_json(path):
    with open(path) as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _load_cov(path):
    doc = _read_json(path)
    if "matrix" not in doc:
        raise CliError(f"{path}: not a covariance document (no 'matrix' field)")
    return covariance_from_json(json.dumps(doc))


def _matrix_csv(path, mat, prefix):
    n = mat.shape[0]
    _write_csv(path, [""] + [f"{prefix}{k + 1}" for k in range(n)], [[f"{prefix}{i + 1}", *mat[i]] for i in range(n)])


def _spectrum_rows(spec):
    return [
        [k + 1, spec.squeezing_db[k], spec.sigma_db[k], spec.antisqueezing_db[k], spec.antisqueezing_sigma_db[k],
         spec.quadrature[k]]
        for k in range(len(spec))
    ]


SPECTRUM_HEADER = ["mode", "squeezing_db", "squeezing_sigma_db", "antisqueezing_db", "antisqueezing_sigma_db",
                   "quadrature"]


def _write_supermodes(out, result, stem):
    _write_csv(os.path.join(out, f"{stem}.csv"), SPECTRUM_HEADER, _spectrum_rows(result.spectrum))
    modes = result.spectrum.modes
    _write_csv(
        os.path.join(out, f"{stem}_modes.csv"),
        ["mode"] + [f"band{k + 1}" for k in range(modes.shape[1])],
        [[k + 1, *modes[k]] for k in range(len(modes))],
    )


# --- commands -------------------------------------------------------------------


def cmd_simulate(args):
    if args.spec:
        spec, settings = load_spec(args.spec)
    else:
        spec, settings = realistic_spec(), SimulationSettings()
    changes = {k: getattr(args, k) for k in ("pump_ratio", "loss") if getattr(args, k) is not None}
    if args.pixels:
        pixel_doc = _read_json(args.pixels)
    else:
        pixel_doc = {"n_pixels": args.n_pixels, "gap_fraction": args.gap_fraction}
        changes.update(n_pixels=args.n_pixels, gap_fraction=args.gap_fraction)
    settings = replace(settings, **changes)
    grid = frequency_grid(spec, settings.grid_points, settings.span_fwhm)
    pixels = pixels_from_dict(pixel_doc, spec, grid)
    res = simulate(spec, settings, pixels)
    out = args.out
    save_covariance(os.path.join(out, "cov_grid.json"), res.cov_grid)
    save_covariance(os.path.join(out, "cov_pixels.json"), res.cov_pixels)
    _write_json(os.path.join(out, "pixels.json"), pixels_to_dict(res.pixels, settings.center_wavelength))
    sm = res.supermodes
    vx, vp = supermode_variances(sm.lambdas, sm.lambda0, settings.pump_ratio, settings.loss)
    _write_csv(
        os.path.join(out, "supermodes.csv"),
        ["mode", "lambda", "lambda_ratio", "squeezing_db", "antisqueezing_db", "threshold_db", "quadrature"],
        [
            [k, sm.lambdas[k], sm.lambdas[k] / sm.lambda0, 10 * np.log10(min(vx[k], vp[k])),
             10 * np.log10(max(vx[k], vp[k])), sm.squeezing_db[k], sm.quadrature[k]]
            for k in range(len(sm))
        ],
    )
    gs = gram_schmidt_supermodes(res.cov_pixels)
    _write_supermodes(out, gs, "pixel_spectrum")
    lam0, rho, _ = analytic_eigenvalues(spec)
    summary = {
        "lambda0": lam0,
        "rho": rho,
        "purity_pixels": purity(res.cov_pixels),
        "band_powers": res.pixels.band_powers.tolist(),
        "n_squeezed_pixel_modes": gs.spectrum.n_squeezed(),
    }
    _write_json(os.path.join(out, "summary.json"), summary)
    return summary


def _load_measurements(path):
    return MeasurementSet.from_dict(_read_json(path))


def _resolve_loss_order(args, mset):
    if args.loss_order is not None:
        return args.loss_order
    return "after" if (args.eta is not None or mset.eta is not None) else "none"


def cmd_reconstruct(args):
    mset = _load_measurements(args.measurements)
    order = _resolve_loss_order(args, mset)
    cov = assemble_covariance(mset, order, args.eta)
    out = args.out
    save_covariance(os.path.join(out, "covariance.json"), cov)
    cx, cp = correlation_matrix(cov)
    _matrix_csv(os.path.join(out, "correlation_x.csv"), cx, "band")
    _matrix_csv(os.path.join(out, "correlation_p.csv"), cp, "band")
    gs = gram_schmidt_supermodes(cov)
    save_covariance(os.path.join(out, "cov_supermodes.json"), gs.cov_supermodes)
    _write_json(os.path.join(out, "transform.json"), {"U_T": gs.transform.tolist()})
    summary = {"loss_order": order, "eta": args.eta if args.eta is not None else mset.eta, "purity": purity(cov)}
    if args.mc_draws > 0:
        mc = monte_carlo_spectrum(mset, args.mc_draws, args.seed, args.workers, order, args.eta)
        _write_supermodes(out, type(gs)(mc.spectrum, gs.cov_supermodes, gs.transform), "spectrum")
        summary.update(mc_draws=mc.n_draws, mc_discarded=mc.n_discarded)
    else:
        _write_supermodes(out, gs, "spectrum")
    summary["n_squeezed"] = gs.spectrum.n_squeezed()
    _write_json(os.path.join(out, "summary.json"), summary)
    return summary


def cmd_supermodes(args):
    cov = _load_cov(args.covariance)
    gs = gram_schmidt_supermodes(cov)
    save_covariance(os.path.join(args.out, "cov_supermodes.json"), gs.cov_supermodes)
    _write_json(os.path.join(args.out, "transform.json"), {"U_T": gs.transform.tolist()})
    _write_supermodes(args.out, gs, "spectrum")
    return {"n_squeezed": gs.spectrum.n_squeezed(), "leading_db": float(gs.spectrum.squeezing_db[0])}


def cmd_ppt(args):
    doc = _read_json(args.input)
    mset = None
    if "records" in doc:
        mset = MeasurementSet.from_dict(doc)
        order = _resolve_loss_order(args, mset)
        cov = assemble_covariance(mset, order, args.eta)
    else:
        cov = covariance_from_json(json.dumps(doc))
    summary = ppt_all(cov, max_modes=args.max_modes)
    results = summary.results
    header = ["partition_key", "size_a", "min_eig", "entangled"]
    cols = [[r.bipartition.key, len(r.bipartition.side_a), r.min_eig, str(r.entangled).lower()] for r in results]
    extra = {}
    if args.reference:
        gs = gram_schmidt_supermodes(cov)
        n = len(gs.spectrum)
        vx, vp = gs.cov_supermodes[0, 0], gs.cov_supermodes[n, n]
        powers = mset.band_powers if mset is not None else np.ones(n)
        ref = single_mode_reference(vx, vp, powers)
        ref_vals = [ppt_min_eigenvalue(ref, r.bipartition) for r in results]
        header.append("reference_min_eig")
        for row, v in zip(cols, ref_vals):
            row.append(v)
        extra["reference_mean"] = float(np.mean(ref_vals))
    if mset is not None and args.mc_draws > 0:
        draws = np.array(
            [[ppt_min_eigenvalue(draw_covariance(mset, args.seed, d, order, args.eta), r.bipartition) for r in results]
             for d in range(args.mc_draws)]
        )
        header.append("min_eig_sigma")
        for row, s in zip(cols, draws.std(axis=0)):
            row.append(s)
        extra["mc_draws"] = args.mc_draws
    _write_csv(os.path.join(args.out, "ppt.csv"), header, cols)
    doc = {**summary.to_dict(), **extra}
    doc["verdict"] = "fully inseparable" if summary.all_entangled else "not fully inseparable"
    _write_json(os.path.join(args.out, "ppt_summary.json"), doc)
    return doc


def _es_config(args):
    doc = _read_json(args.optimizer) if args.optimizer else {}
    if args.objective:
        doc["objective"] = args.objective
    doc["seed"] = args.seed
    return ESConfig.from_dict(doc)


def _table(result):
    vals = ", ".join(f"{v:.2f}" for v in result.report.variances)
    return (
        f"{'Graph':<30}| Nullifiers (normalized to shot noise = 1)\n"
        f"{'-' * 30}+{'-' * 45}\n"
        f"{result.graph.name:<30}| {{{vals}}}\n"
        f"objective: {result.objective_kind} = {result.objective:.4f}; "
        f"{'all below shot noise' if result.report.passed else 'NOT all below shot noise'}\n"
    )


def cmd_cluster(args):
    cov = _load_cov(args.covariance)
    graph = load_graph(args.graph)
    config = _es_config(args)
    n_total = cov.shape[0] // 2
    if args.input_basis == "pixel":
        gs = gram_schmidt_supermodes(cov)
        cov_sm, U_T = gs.cov_supermodes, gs.transform
    else:
        cov_sm, U_T = cov, np.eye(n_total)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NoImprovementWarning)
        result = optimize_cluster_basis(cov_sm, graph, config)
    failed = any(issubclass(w.category, NoImprovementWarning) for w in caught)
    order = list(result.selected_modes) + [k for k in range(n_total) if k not in result.selected_modes]
    cov_c, U_tot = build_cluster_covariance(cov, U_T[:, order], result.pattern, result.network)
    doc = result.to_dict()
    doc["input_basis"] = args.input_basis
    doc["U_V"] = {"real": result.network.X.tolist(), "imag": result.network.Y.tolist()}
    doc["U_tot"] = {"real": U_tot.real.tolist(), "imag": U_tot.imag.tolist()}
    _write_json(os.path.join(args.out, "cluster_report.json"), doc)
    save_covariance(os.path.join(args.out, "cov_cluster.json"), cov_c)
    with open(os.path.join(args.out, "cluster_table.txt"), "w") as fh:
        fh.write(_table(result))
    if failed:
        return {"exit": EXIT_NO_CLUSTER, **result.report.to_dict()}
    return result.report.to_dict()


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_report(args):
    written = []
    src = args.run_dir
    for stem in ("spectrum", "pixel_spectrum"):
        path = os.path.join(src, f"{stem}.csv")
        if os.path.exists(path):
            rows = _read_csv(path)
            xs = [int(r["mode"]) for r in rows]
            sq = [float(r["squeezing_db"]) for r in rows]
            anti = [float(r["antisqueezing_db"]) for r in rows]
            err = {"squeezing": [float(r["squeezing_sigma_db"]) for r in rows],
                   "anti-squeezing": [float(r["antisqueezing_sigma_db"]) for r in rows]}
            svg = line_chart([("squeezing", xs, sq), ("anti-squeezing", xs, anti)], "Supermode noise levels",
                             "mode", "noise (dB)", hline=0.0, errors=err)
            written.append(_emit(args.out, f"{stem}.svg", svg))
    path = os.path.join(src, "ppt.csv")
    if os.path.exists(path):
        rows = _read_csv(path)
        xs = list(range(1, len(rows) + 1))
        series = [("full state", xs, [float(r["min_eig"]) for r in rows])]
        if rows and "reference_min_eig" in rows[0]:
            series.append(("single-mode reference", xs, [float(r["reference_min_eig"]) for r in rows]))
        written.append(_emit(args.out, "ppt.svg", line_chart(series, "PPT minimum eigenvalue per bipartition",
                                                              "bipartition (sorted)", "min eig", hline=0.0)))
    path = os.path.join(src, "cluster_report.json")
    if os.path.exists(path):
        doc = _read_json(path)
        vals = doc["report"]["nullifiers"]
        xs = list(range(1, len(vals) + 1))
        written.append(_emit(args.out, "nullifiers.svg", line_chart(
            [(doc["graph"]["name"], xs, vals)], "Normalized nullifier variances", "node", "variance", hline=1.0)))
    if not written:
        raise CliError(f"{src}: no spectrum.csv, pixel_spectrum.csv, ppt.csv or cluster_report.json found")
    return {"written": written}


def _emit(out, name, text):
    with open(os.path.join(out, name), "w") as fh:
        fh.write(text)
    return name


# --- parser -----------------------------------------------------------------------


def _common(p):
    p.add_argument("--seed", type=int, default=None, help="master seed; drawn and recorded when absent")
    p.add_argument("--out", default=".", help="output directory (created if missing)")
    p.add_argument("--config", default=None, help="JSON file of option values, e.g. a previous config.json")


def _loss_flags(p):
    p.add_argument("--loss-order", choices=["none", "before", "after"], default=None,
                   help="loss correction of records ('before') or of the assembled matrix ('after'); "
                        "default 'after' when a transmission is known")
    p.add_argument("--eta", type=float, default=None, help="transmission; overrides the file's eta")


def build_parser():
    parser = argparse.ArgumentParser(prog="spopo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"spopo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate the SPOPO output in grid and pixel bases")
    p.add_argument("--spec", help="pump/crystal JSON (default: built-in BIBO-like spec)")
    p.add_argument("--pixels", help="pixel-basis JSON")
    p.add_argument("--n-pixels", type=int, default=8)
    p.add_argument("--gap-fraction", type=float, default=SimulationSettings().gap_fraction)
    p.add_argument("--pump-ratio", type=float, default=None)
    p.add_argument("--loss", type=float, default=None)
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="assemble a covariance matrix from band measurements")
    p.add_argument("measurements", nargs="?", help="MeasurementSet JSON")
    _loss_flags(p)
    p.add_argument("--mc-draws", type=int, default=0, help="Monte-Carlo draws for error bars")
    p.add_argument("--workers", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("supermodes", help="Gram-Schmidt supermodes of a covariance matrix")
    p.add_argument("covariance", nargs="?")
    _common(p)
    p.set_defaults(func=cmd_supermodes)

    p = sub.add_parser("ppt", help="PPT test on every bipartition")
    p.add_argument("input", nargs="?", help="covariance JSON or MeasurementSet JSON")
    p.add_argument("--reference", action="store_true", help="add single-mode reference values")
    p.add_argument("--mc-draws", type=int, default=0, help="error bars from a MeasurementSet")
    p.add_argument("--max-modes", type=int, default=20)
    _loss_flags(p)
    _common(p)
    p.set_defaults(func=cmd_ppt)

    p = sub.add_parser("cluster", help="optimize a cluster-state basis and report nullifiers")
    p.add_argument("covariance", nargs="?")
    p.add_argument("--graph", default="linear6", help="library name or graph JSON file")
    p.add_argument("--optimizer", help="optimizer config JSON")
    p.add_argument("--objective", choices=["mean", "max"], default=None)
    p.add_argument("--input-basis", choices=["pixel", "supermode"], default="pixel")
    _common(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("report", help="plot-ready SVG charts from a run directory")
    p.add_argument("run_dir", nargs="?")
    _common(p)
    p.set_defaults(func=cmd_report)
    return parser


_REQUIRED = {
    "reconstruct": "measurements",
    "supermodes": "covariance",
    "ppt": "input",
    "cluster": "covariance",
    "report": "run_dir",
}


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        doc = _read_json(args.config)
        if doc.get("command", args.command) != args.command:
            raise CliError(f"{args.config} was written by '{doc['command']}', not '{args.command}'")
        defaults = vars(parser.parse_args([args.command]))
        explicit = {k for k, v in vars(args).items() if defaults.get(k) != v}
        for k, v in doc.get("options", {}).items():
            if k in vars(args) and k not in explicit and k not in _NOT_SNAPSHOTTED:
                setattr(args, k, v)
    need = _REQUIRED.get(args.command)
    if need and not getattr(args, need):
        raise CliError(f"'{args.command}' needs the {need} argument")
    return args


def _snapshot(args):
    options = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_SNAPSHOTTED and k != "command"}
    doc = {"command": args.command, "version": __version__, "options": options,
           "tolerances": DEFAULT_TOLERANCES.to_dict()}
    doc["run_id"] = hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:12]
    return doc


def _error(exc, code=EXIT_ERROR):
    doc = {"error": type(exc).__name__, "message": str(exc)}
    if hasattr(exc, "missing"):
        doc["missing"] = [{"bands": list(b), "quadrature": q} for b, q in exc.missing]
    sys.stderr.write(json.dumps(doc) + "\n")
    return code


def main(argv=None):
    try:
        args = _parse(argv)
        if args.seed is None:
            args.seed = secrets.randbelow(2**32)
        os.makedirs(args.out, exist_ok=True)
        _write_json(os.path.join(args.out, f"{args.command}_config.json"), _snapshot(args))
        result = args.func(args)
    except SystemExit:
        raise
    except (SpopoError, OSError, ValueError, KeyError, TypeError) as exc:
        return _error(exc)
    code = result.pop("exit", EXIT_OK) if isinstance(result, dict) else EXIT_OK
    sys.stdout.write(json.dumps(result, sort_keys=True, default=float) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
