"""Command-line experiment runner.

Subcommands:

    qsl bound   --config FILE [--out FILE] [--metrics qf,wy,min]
    qsl sweep   --config FILE [--out FILE] [--plot] [--threads N]
    qsl contour --config FILE [--out FILE] [--plot] [--threads N]
    qsl verify  [--level quick|full] [--only id,...] [--out FILE]

Configs are JSON documents with a versioned schema (see README); the
names of the bundled figure-reproduction configs (fig3a, fig7, ...) are
accepted directly in place of a path.  Exit codes: 0 success, 2 config
error, 3 computation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

import numpy as np

from . import verify as verify_mod
from .channels import (
    AmplitudeDamping,
    ParallelDephasing,
    TransversalDephasing,
    UnitaryChannel,
    evolve,
)
from .engine import (
    DEFAULT_QUADRATURE,
    QSLReport,
    QuadratureConfig,
    assemble_report,
    geodesic_length,
    path_length,
    segment_length,
)
from .errors import DegenerateEndpointError, QslError
from .mcmetric import KIND_MIN, metric_by_kind
from .qstate import BlochVector, DensityOperator, from_bloch

SCHEMA_VERSION = 1
_SWEEP_AXES = ("t",)
_CONTOUR_AXES = ("r0", "theta0", "phi0")


class ConfigError(Exception):
    """Invalid or unreadable experiment configuration (exit code 2)."""


class StageError(Exception):
    """A computation failed; carries the offending stage (exit code 3)."""

    def __init__(self, stage, cause):
        super().__init__(f"computation failed at stage {stage!r}: {cause}")
        self.stage = stage


def _load_config(source: str) -> dict:
    path = source
    if not os.path.exists(path) and os.sep not in source and not source.endswith(".json"):
        bundled = resources.files("qslgeo").joinpath("configs", source + ".json")
        if bundled.is_file():
            path = str(bundled)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {source!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {source!r} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    if cfg.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported config schema {cfg.get('schema')!r}, expected {SCHEMA_VERSION}")
    return cfg


def _build_channel(spec: dict):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("channel must be an object with a 'kind' field")
    kind = spec["kind"]
    try:
        if kind == "parallel_dephasing":
            return ParallelDephasing(float(spec["omega0"]), float(spec["gamma"]))
        if kind == "transversal_dephasing":
            return TransversalDephasing(float(spec["omega0"]), float(spec["gamma"]))
        if kind == "amplitude_damping":
            return AmplitudeDamping(float(spec["gamma"]))
        if kind == "unitary":
            axis = np.asarray(spec.get("axis", [0.0, 0.0, 1.0]), dtype=float)
            if axis.shape != (3,) or np.linalg.norm(axis) == 0.0:
                raise ConfigError("unitary axis must be a nonzero 3-vector")
            axis = axis / np.linalg.norm(axis)
            omega = float(spec["omega"])
            from .qstate import sigma_x, sigma_y, sigma_z

            h = 0.5 * omega * (axis[0] * sigma_x + axis[1] * sigma_y + axis[2] * sigma_z)
            return UnitaryChannel.from_constant_hamiltonian(h)
    except KeyError as exc:
        raise ConfigError(f"channel {kind!r} is missing parameter {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad channel parameters: {exc}") from exc
    raise ConfigError(f"unknown channel kind {kind!r}")


def _build_state(spec: dict) -> tuple[BlochVector | None, DensityOperator]:
    if not isinstance(spec, dict):
        raise ConfigError("initial_state must be an object")
    if "matrix" in spec:
        try:
            raw = np.asarray(spec["matrix"], dtype=float)
            m = raw[..., 0] + 1j * raw[..., 1]
            return None, DensityOperator(m)
        except (ValueError, IndexError, QslError) as exc:
            raise ConfigError(f"bad explicit state matrix: {exc}") from exc
    try:
        b = BlochVector(float(spec["r"]), float(spec["theta"]), float(spec.get("phi", 0.0)))
    except KeyError as exc:
        raise ConfigError(f"initial_state missing field {exc}") from exc
    except QslError as exc:
        raise ConfigError(f"bad Bloch coordinates: {exc}") from exc
    return b, from_bloch(b)


def _build_quadrature(spec) -> QuadratureConfig:
    if spec is None:
        return DEFAULT_QUADRATURE
    try:
        return QuadratureConfig(
            panels=int(spec.get("panels", DEFAULT_QUADRATURE.panels)),
            order=int(spec.get("order", DEFAULT_QUADRATURE.order)),
            refine=bool(spec.get("refine", True)),
        )
    except (TypeError, ValueError, QslError) as exc:
        raise ConfigError(f"bad quadrature settings: {exc}") from exc


def _parse_metrics(cfg: dict, override: str | None):
    names = override.split(",") if override else cfg.get("metrics", ["qf", "wy"])
    if not names:
        raise ConfigError("at least one metric must be requested")
    try:
        return [metric_by_kind(str(n).strip()) for n in names]
    except QslError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_grid(cfg: dict, expected: int, allowed: tuple[str, ...]):
    grid = cfg.get("grid", [])
    if len(grid) != expected:
        raise ConfigError(f"this command needs exactly {expected} swept axis/axes, got {len(grid)}")
    axes = []
    for ax in grid:
        try:
            name = ax["name"]
            lo, hi, steps = float(ax["min"]), float(ax["max"]), int(ax["steps"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad grid axis {ax!r}: {exc}") from exc
        if name not in allowed:
            raise ConfigError(f"axis {name!r} not supported here (allowed: {', '.join(allowed)})")
        if steps < 2:
            raise ConfigError("swept axes need steps >= 2")
        if hi < lo:
            raise ConfigError("axis max must not be below min")
        # a collapsed axis (max == min) degenerates to a single point
        axes.append((name, np.array([lo]) if hi == lo else np.linspace(lo, hi, steps)))
    return axes


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and not np.isfinite(value):
        return ""
    return repr(float(value))


def _write_csv(path: str | None, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    text = buf.getvalue()
    if path is None or path == "-":
        sys.stdout.write(text)
        return None
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _report_cells(report: QSLReport | None, error_flag: str | None = None):
    if report is None:
        return ["", "", "", "", error_flag or ""]
    flags = ";".join(report.flags)
    return [_fmt(report.path_length), _fmt(report.geodesic_length),
            _fmt(report.tightness), _fmt(report.bound_time), flags]


def _metric_report(ch, rho0, tau, f, quad) -> QSLReport:
    """Tightness report; the minimal metric gets a path-length-only row."""
    ell = path_length(ch, rho0, tau, f, quad)
    if f.kind == KIND_MIN:
        return QSLReport(metric_kind=f.kind, path_length=ell, evolution_time=tau,
                         flags=("no-geodesic",))
    big_l = geodesic_length(rho0, evolve(ch, rho0, tau), f)
    return assemble_report(f.kind, ell, big_l, tau)


def _thread_count(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("QSL_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_bound(args) -> int:
    cfg = _load_config(args.config)
    ch = _build_channel(cfg.get("channel"))
    _, rho0 = _build_state(cfg.get("initial_state"))
    metrics = _parse_metrics(cfg, args.metrics)
    quad = _build_quadrature(cfg.get("quadrature"))
    if cfg.get("grid"):
        raise ConfigError("bound takes a single-point config without swept axes")
    tau = cfg.get("duration")
    if tau is None:
        raise ConfigError("bound requires a duration")
    tau = float(tau)

    reports = []
    for f in metrics:
        try:
            reports.append(_metric_report(ch, rho0, tau, f, quad))
        except QslError as exc:
            raise StageError(f"bound[{f.kind}]", exc) from exc

    header = ["metric", "ell", "L", "delta", "tau_min", "tau", "flags"]
    rows = []
    for rep in reports:
        rows.append([rep.metric_kind, _fmt(rep.path_length), _fmt(rep.geodesic_length),
                     _fmt(rep.tightness), _fmt(rep.bound_time), _fmt(rep.evolution_time),
                     ";".join(rep.flags)])
        delta = "-" if rep.tightness is None else f"{rep.tightness:.6g}"
        line = (f"{rep.metric_kind:>4}: ell = {rep.path_length:.9g}"
                f"  L = {'-' if rep.geodesic_length is None else f'{rep.geodesic_length:.9g}'}"
                f"  delta = {delta}"
                f"  tau_min = {'-' if rep.bound_time is None else f'{rep.bound_time:.9g}'}")
        if rep.flags:
            line += f"  [{';'.join(rep.flags)}]"
        print(line)
    out = args.out or (cfg.get("output") or {}).get("path")
    if out:
        _write_csv(out, header, rows)
    return 0


def _sweep_rows(ch, rho0, times, metrics, quad, threads):
    seg_bounds = [(0.0 if i == 0 else times[i - 1], t) for i, t in enumerate(times)]

    def segments_for(f):
        def one(seg):
            t0, t1 = seg
            if t1 <= t0:
                return 0.0
            return segment_length(ch, rho0, t0, t1, f, quad)
        return _pmap(one, seg_bounds, threads)

    per_metric = {}
    for f in metrics:
        try:
            lengths = np.cumsum(segments_for(f))
        except QslError as exc:
            raise StageError(f"sweep[{f.kind}]", exc) from exc
        per_metric[f.kind] = lengths

    states = [evolve(ch, rho0, float(t)) for t in times]
    rows = []
    for i, t in enumerate(times):
        row = {"t": float(t)}
        flags = []
        for f in metrics:
            ell = float(per_metric[f.kind][i])
            if f.kind == KIND_MIN:
                rep = QSLReport(metric_kind=f.kind, path_length=ell, evolution_time=float(t),
                                flags=("no-geodesic",))
            else:
                try:
                    big_l = geodesic_length(rho0, states[i], f)
                    rep = assemble_report(f.kind, ell, big_l, float(t))
                except DegenerateEndpointError:
                    rep = QSLReport(metric_kind=f.kind, path_length=ell, evolution_time=float(t),
                                    flags=("degenerate-endpoint",))
                except QslError as exc:
                    raise StageError(f"sweep[{f.kind}]", exc) from exc
            row[f"ell_{f.kind}"] = rep.path_length
            row[f"L_{f.kind}"] = rep.geodesic_length
            row[f"delta_{f.kind}"] = rep.tightness
            row[f"tau_min_{f.kind}"] = rep.bound_time
            flags.extend(f"{f.kind}:{fl}" for fl in rep.flags if fl != "no-geodesic")
        row["flags"] = ";".join(flags)
        rows.append(row)
    return rows


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    ch = _build_channel(cfg.get("channel"))
    _, rho0 = _build_state(cfg.get("initial_state"))
    metrics = _parse_metrics(cfg, args.metrics)
    quad = _build_quadrature(cfg.get("quadrature"))
    axes = _parse_grid(cfg, 1, _SWEEP_AXES)
    times = axes[0][1]
    threads = _thread_count(args.threads)

    rows = _sweep_rows(ch, rho0, times, metrics, quad, threads)

    header = ["t"]
    for f in metrics:
        header += [f"ell_{f.kind}", f"L_{f.kind}", f"delta_{f.kind}", f"tau_min_{f.kind}"]
    header.append("flags")
    csv_rows = [[_fmt(r["t"])]
                + [cell for f in metrics for cell in
                   (_fmt(r[f"ell_{f.kind}"]), _fmt(r[f"L_{f.kind}"]),
                    _fmt(r[f"delta_{f.kind}"]), _fmt(r[f"tau_min_{f.kind}"]))]
                + [r["flags"]] for r in rows]
    out = args.out or (cfg.get("output") or {}).get("path")
    written = _write_csv(out, header, csv_rows)
    if args.plot or (cfg.get("output") or {}).get("plot"):
        if not written:
            raise ConfigError("plotting needs a file output path")
        from .plotting import plot_sweep

        fig_path = plot_sweep(rows, [f.kind for f in metrics], _fig_path(written),
                              title=cfg.get("title"))
        print(f"figure written to {fig_path}", file=sys.stderr)
    return 0


def _contour_cell(ch_spec, base_state, axes_names, quad):
    qf = metric_by_kind("qf")
    wy = metric_by_kind("wy")

    def cell(values):
        state = dict(base_state)
        for name, val in zip(axes_names, values):
            state[name[:-1] if name.endswith("0") else name] = float(val)
        flags = []
        try:
            b = BlochVector(state["r"], state["theta"], state.get("phi", 0.0))
        except QslError:
            return values, None, None, "bad-state"
        rho0 = from_bloch(b)
        ch = _build_channel(ch_spec)
        tau = state["tau"]
        out = {}
        for f in (qf, wy):
            ell = path_length(ch, rho0, tau, f, quad)
            try:
                big_l = geodesic_length(rho0, evolve(ch, rho0, tau), f)
                rep = assemble_report(f.kind, ell, big_l, tau)
            except DegenerateEndpointError:
                rep = QSLReport(metric_kind=f.kind, path_length=ell, evolution_time=tau,
                                flags=("degenerate-endpoint",))
            out[f.kind] = rep
            flags.extend(f"{f.kind}:{fl}" for fl in rep.flags)
        return values, out["qf"], out["wy"], ";".join(flags)

    return cell


def cmd_contour(args) -> int:
    cfg = _load_config(args.config)
    ch_spec = cfg.get("channel")
    _build_channel(ch_spec)  # validate early
    bloch, _ = _build_state(cfg.get("initial_state"))
    if bloch is None:
        raise ConfigError("contour sweeps Bloch coordinates; initial_state must be given in Bloch form")
    quad = _build_quadrature(cfg.get("quadrature"))
    axes = _parse_grid(cfg, 2, _CONTOUR_AXES)
    tau = cfg.get("duration")
    if tau is None:
        raise ConfigError("contour requires a duration")
    threads = _thread_count(args.threads)

    base_state = {"r": bloch.r, "theta": bloch.theta, "phi": bloch.phi, "tau": float(tau)}
    names = [ax[0] for ax in axes]
    cells = [(x, y) for x in axes[0][1] for y in axes[1][1]]
    cell_fn = _contour_cell(ch_spec, base_state, names, quad)
    try:
        results = _pmap(cell_fn, cells, threads)
    except QslError as exc:
        raise StageError("contour", exc) from exc

    header = [names[0], names[1], "ell_qf", "L_qf", "delta_qf", "ell_wy", "L_wy", "delta_wy",
              "ddelta", "flags"]
    csv_rows = []
    rows = []
    for values, rep_qf, rep_wy, flags in results:
        ddelta = None
        if rep_qf and rep_wy and rep_qf.tightness is not None and rep_wy.tightness is not None:
            ddelta = rep_qf.tightness - rep_wy.tightness
        row = {names[0]: values[0], names[1]: values[1], "ddelta": ddelta, "flags": flags}
        rows.append(row)
        csv_rows.append([
            _fmt(values[0]), _fmt(values[1]),
            *_report_cells(rep_qf)[:3],
            *_report_cells(rep_wy)[:3],
            _fmt(ddelta), flags,
        ])
    out = args.out or (cfg.get("output") or {}).get("path")
    written = _write_csv(out, header, csv_rows)
    if args.plot or (cfg.get("output") or {}).get("plot"):
        if not written:
            raise ConfigError("plotting needs a file output path")
        from .plotting import plot_contour

        fig_path = plot_contour(rows, names, _fig_path(written), title=cfg.get("title"))
        print(f"figure written to {fig_path}", file=sys.stderr)
    return 0


def _fig_path(csv_path: str) -> str:
    root, ext = os.path.splitext(csv_path)
    return (root if ext.lower() == ".csv" else csv_path) + ".png"


def cmd_verify(args) -> int:
    only = args.only.split(",") if args.only else None
    try:
        summary = verify_mod.run_verification(args.level, only=only)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for check in summary["checks"]:
        mark = "PASS" if check["passed"] else "FAIL"
        print(f"{mark} {check['id']:<30} {check['detail']} ({check['seconds']:.2f}s)")
    print(json.dumps(summary))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
    return 0 if summary["passed"] else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsl", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, plot=False):
        p.add_argument("--config", required=True, help="config file path or bundled config name")
        p.add_argument("--out", help="output CSV path ('-' for stdout)")
        p.add_argument("--metrics", help="comma-separated metric kinds (qf,wy,min)")
        p.add_argument("--threads", type=int, help="worker threads (default $QSL_THREADS or 1)")
        if plot:
            p.add_argument("--plot", action="store_true", help="also render a figure next to the CSV")

    p_bound = sub.add_parser("bound", help="single-point speed-limit report")
    common(p_bound)
    p_bound.set_defaults(fn=cmd_bound)

    p_sweep = sub.add_parser("sweep", help="time sweep of path lengths and tightness")
    common(p_sweep, plot=True)
    p_sweep.set_defaults(fn=cmd_sweep)

    p_contour = sub.add_parser("contour", help="two-axis tightness-difference grid")
    common(p_contour, plot=True)
    p_contour.set_defaults(fn=cmd_contour)

    p_verify = sub.add_parser("verify", help="run the oracle consistency web")
    p_verify.add_argument("--level", choices=("quick", "full"), default="quick")
    p_verify.add_argument("--only", help="comma-separated check ids to run")
    p_verify.add_argument("--out", help="write the JSON summary to this file")
    p_verify.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except QslError as exc:
        print(f"error: computation failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
