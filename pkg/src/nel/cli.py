"""Command-line front end: reproducible CSV/JSON datasets for every figure
and table, plus direct access to the solvers.

All numeric payloads are serialized with 17 significant digits so a reparse
reproduces bit-identical values, and sweep results are assembled in grid
order regardless of the worker count (NEL_THREADS), so identical
invocations produce byte-identical files.  Every output file X gets a
sidecar X.manifest.json recording the subcommand, parameters, tool version
and wall time that produced it.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from multiprocessing import Pool
from pathlib import Path

from . import __version__

__all__ = ["main", "UsageError", "RunManifest"]


class UsageError(Exception):
    """Bad flags or arguments; exit code 2 with a machine-readable payload."""


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    version: str
    wall_time_s: float
    outputs: list


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def _json_dump(obj) -> str:
    """JSON with floats at 17 significant digits (round-trip exact)."""
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return "null"
        return format(obj, ".17g")
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, complex):
        return _json_dump({"re": obj.real, "im": obj.imag})
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {_json_dump(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json_dump(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, obj) -> None:
    Path(path).write_text(_json_dump(obj) + "\n")


def _finish(args, t0: float, outputs: list[Path], summary: dict) -> int:
    params = {k: v for k, v in vars(args).items()
              if k not in ("func", "out", "out_dir") and v is not None}
    manifest = RunManifest(args.subcommand, params, __version__,
                           time.perf_counter() - t0,
                           [str(p) for p in outputs])
    if outputs:
        mpath = Path(str(outputs[0]) + ".manifest.json")
        _write_json(mpath, asdict(manifest))
    summary = dict(summary)
    summary["outputs"] = [str(p) for p in outputs]
    print(_json_dump(summary))
    return 0


def _workers(n_tasks: int) -> int:
    try:
        cap = int(os.environ.get("NEL_THREADS", "1"))
    except ValueError:
        raise UsageError("NEL_THREADS must be an integer")
    return max(1, min(cap, n_tasks))


def _pool_map(fn, jobs):
    w = _workers(len(jobs))
    if w <= 1:
        return [fn(j) for j in jobs]
    with Pool(processes=w) as pool:
        return pool.map(fn, jobs, chunksize=max(1, len(jobs) // (8 * w)))


def _parse_range(text: str) -> list[int]:
    """'1:6' -> [1..6]; '3' -> [3]; '1,4,9' -> [1, 4, 9]."""
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return list(range(int(lo), int(hi) + 1))
        if "," in text:
            return [int(v) for v in text.split(",")]
        return [int(text)]
    except ValueError as exc:
        raise UsageError(f"bad index range {text!r}") from exc


def _parse_grid(text: str) -> tuple[float, float, float]:
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}, expected start:end:step") from exc
    return lo, hi, step


# -- subcommands --------------------------------------------------------------


def _cmd_eigen(args) -> int:
    from .separatrix import (SeparatrixConfig, eigenvalue_table,
                             find_eigenvalue_bisect, trace_separatrix_backward)

    t0 = time.perf_counter()
    ns = _parse_range(args.n)
    cfg = SeparatrixConfig(tol=args.tol)
    records = []
    if args.method == "both":
        for rec in eigenvalue_table(min(ns), max(ns), cfg):
            if rec.n in ns:
                records.append(rec)
    else:
        for n in ns:
            if args.method == "bisect":
                records.append(find_eigenvalue_bisect(n, cfg))
            else:
                records.append(trace_separatrix_backward(n, cfg, dense=False)[0])
    payload = [{"n": r.n, "a_n": r.a_n, "method": r.method,
                "residual": r.residual, "tail_m": r.tail_m} for r in records]
    out = Path(args.out)
    _write_json(out, payload)
    return _finish(args, t0, [out],
                   {"count": len(payload), "a_min": records[0].a_n,
                    "a_max": records[-1].a_n})


def _fig1_task(k: int):
    from .cosine import rhs_unscaled
    from .ode import integrate

    a = 0.2 * k
    traj = integrate(rhs_unscaled, 0.0, a, 24.0)
    rows = []
    x = 0.0
    while x <= 24.0 + 1e-9:
        rows.append((k, a, min(x, 24.0), traj(min(x, 24.0))))
        x += 0.02
    return rows


def _cmd_figures(args) -> int:
    t0 = time.perf_counter()
    out = Path(args.out)
    name = args.figure
    summary: dict = {"figure": name}

    if name == "fig1":
        rows = []
        for chunk in _pool_map(_fig1_task, list(range(1, 51))):
            rows.extend(chunk)
        _write_csv(out, ["k", "a", "x", "y"], rows)

    elif name == "fig2":
        from .separatrix import trace_separatrix_backward

        rows = []
        for n in range(-3, 7):
            rec, traj = trace_separatrix_backward(n)
            x = 0.0
            while x <= traj.x_start + 1e-9:
                xq = min(x, traj.x_start)
                rows.append((n, rec.a_n, xq, traj(xq)))
                x += 0.02
        _write_csv(out, ["n", "a_n", "x", "y"], rows)

    elif name == "fig3":
        from .limitcurve import implicit_Z
        from .separatrix import scaled_separatrix_evaluator

        rows = []
        for n in range(1, 5):
            z, t_max, _ = scaled_separatrix_evaluator(n)
            hi = min(2.2, t_max)
            for i in range(1101):
                t = hi * i / 1100
                rows.append((f"z_{n}", t, z(t)))
        for i in range(1001):
            t = i / 1000
            rows.append(("Z", t, implicit_Z(t)))
        _write_csv(out, ["series", "t", "value"], rows)

    elif name == "fig4":
        from .limitcurve import implicit_Z
        from .separatrix import scaled_separatrix_evaluator

        n = args.n if args.n is not None else 10000
        z, _, _ = scaled_separatrix_evaluator(n)
        rows = []
        for i in range(2001):
            t = i / 2000
            big = implicit_Z(t)
            zz = z(t)
            rows.append((t, zz, big, zz - big))
        _write_csv(out, ["t", "z", "Z", "diff"], rows)
        summary["n"] = n

    elif name == "fig5":
        from .fourier import fourier_partial_sum

        rows = []
        for n_terms in (5, 20, 80):
            xs = [math.pi * i / 1000 for i in range(1, 1000)]
            vals = fourier_partial_sum(n_terms, xs)
            rows.extend((n_terms, x, float(v)) for x, v in zip(xs, vals))
        _write_csv(out, ["N", "x", "s"], rows)

    elif name == "fig6":
        from .painleve import PainleveConfig, painleve_eigenvalues, integrate_with_poles

        cfg = PainleveConfig()
        eigs = painleve_eigenvalues(4, cfg)
        rows = []
        for k, a in enumerate(eigs, start=1):
            segs, poles = integrate_with_poles(a, -12.0, cfg)
            for si, seg in enumerate(segs):
                x = seg.x_start
                while x >= seg.x_end:
                    rows.append((k, a, si, x, seg(x)[0]))
                    x -= 0.01
        _write_csv(out, ["k", "a", "segment", "x", "y"], rows)
        summary["eigenvalues"] = eigs

    elif name == "fig7":
        from .painleve import PainleveConfig, integrate_with_poles

        cfg = PainleveConfig()
        rows = []
        for label, a in (("oscillatory", 1.0), ("pole_chain", 5.0)):
            segs, _ = integrate_with_poles(a, -40.0, cfg)
            for si, seg in enumerate(segs):
                x = seg.x_start
                while x >= seg.x_end:
                    rows.append((label, a, si, x, seg(x)[0]))
                    x -= 0.01
        _write_csv(out, ["fate", "a", "segment", "x", "y"], rows)

    elif name == "fig8":
        from .pseries import tau_scan

        n = args.n if args.n is not None else 50
        sr = tau_scan(0.0, 1.0, args.step, n, workers=_workers(2001))
        _write_csv(out, ["tau", "rho"], zip(sr.taus, sr.rhos))
        summary["n"] = n
        summary["maxima"] = [list(m) for m in sr.maxima[:4]]
        summary["reflection_gap"] = sr.reflection_gap
        summary["half_shift_gap"] = sr.half_shift_gap

    else:
        raise UsageError(f"unknown figure {name!r} (expected fig1..fig8)")

    return _finish(args, t0, [out], summary)


def _cmd_limiting_curve(args) -> int:
    from .limitcurve import implicit_Z, solve_limit_ode

    t0 = time.perf_counter()
    lc = solve_limit_ode(args.grid)
    rows = []
    sup = 0.0
    for t, z in zip(lc.ts, lc.zs):
        zi = implicit_Z(t)
        sup = max(sup, abs(z - zi))
        rows.append((t, z, zi, z - zi))
    out = Path(args.out)
    _write_csv(out, ["t", "Z_ode", "Z_implicit", "diff"], rows)
    return _finish(args, t0, [out],
                   {"Z0": lc.zs[0], "sup_method_gap": sup})


def _cmd_extrapolate(args) -> int:
    from .extrapolate import fit_correction_exponent, richardson

    t0 = time.perf_counter()
    if args.values:
        values = [float(v) for v in args.values.split(",")]
        indices = [float(v) for v in args.indices.split(",")]
        target = "raw"
    elif args.target == "a-constant":
        from .separatrix import trace_separatrix_backward

        indices = [int(v) for v in args.indices.split(",")] if args.indices \
            else [125, 250, 500, 1000, 2000]
        values = []
        for n in indices:
            rec, _ = trace_separatrix_backward(n, dense=False)
            values.append(math.sqrt(2.0) * rec.a_n / math.sqrt(2 * n - 0.5))
        target = args.target
    elif args.target == "painleve-c":
        from .painleve import GROWTH_EXPONENT, painleve_eigenvalues

        eigs = painleve_eigenvalues(args.count)
        indices = list(range(4, len(eigs) + 1))
        values = [eigs[n - 1] / n ** GROWTH_EXPONENT for n in indices]
        target = args.target
    else:
        raise UsageError("need --values or --target {a-constant,painleve-c}")

    stages = args.stages if args.stages else min(4, len(values) - 1)
    result = richardson(values, indices, stages=stages)
    payload = {
        "target": target,
        "indices": indices,
        "values": values,
        "limit": result.limit,
        "stages": result.stages,
        "error_estimate": result.error_estimate,
        "diagonal": list(result.diagonal),
        "fitted_correction_exponent": fit_correction_exponent(values, indices, result.limit),
    }
    out = Path(args.out)
    _write_json(out, payload)
    return _finish(args, t0, [out], {"limit": result.limit})


def _cmd_painleve(args) -> int:
    from .painleve import (PainleveConfig, classify_fate, estimate_C,
                           fit_oscillation_envelope, integrate_with_poles,
                           painleve_eigenvalues)

    t0 = time.perf_counter()
    cfg = PainleveConfig()
    out = Path(args.out)
    if args.task == "eigen":
        eigs = painleve_eigenvalues(args.count, cfg, y0=args.y0)
        payload = {
            "y0": args.y0,
            "eigenvalues": eigs,
            "growth_constant_estimate": estimate_C(eigs) if len(eigs) >= 8 else None,
            "reported_growth_constant": 4.28373,
            "nearby_closed_form": 3.4 * 2 ** (1 / 3),
        }
        _write_json(out, payload)
        return _finish(args, t0, [out], {"count": len(eigs)})
    if args.task == "fate":
        rep = classify_fate(args.a, cfg, y0=args.y0)
        payload = {"a": args.a, "y0": args.y0, "lock": rep.lock,
                   "pole_count": rep.pole_count, "lock_onset": rep.lock_onset}
        _write_json(out, payload)
        return _finish(args, t0, [out], {"lock": rep.lock})
    if args.task == "envelope":
        segs, poles = integrate_with_poles(args.a, args.x_min, cfg, y0=args.y0)
        fit = fit_oscillation_envelope(segs[-1],
                                       fit_window=(args.x_min, args.x_min / 3.2))
        payload = {"a": args.a, "amplitude_exponent": fit.amplitude_exponent,
                   "phase_coefficient": fit.phase_coefficient,
                   "n_extrema": fit.n_extrema, "poles": len(poles)}
        _write_json(out, payload)
        return _finish(args, t0, [out], {"n_extrema": fit.n_extrema})
    raise UsageError(f"unknown painleve task {args.task!r}")


def _cmd_pseries(args) -> int:
    t0 = time.perf_counter()
    out = Path(args.out) if args.out else None
    if args.task == "scan":
        from .pseries import tau_scan

        lo, hi, step = _parse_grid(args.tau)
        sr = tau_scan(lo, hi, step, args.n,
                      workers=_workers(int((hi - lo) / step) + 1))
        if out is None:
            raise UsageError("scan requires --out")
        _write_csv(out, ["tau", "rho"], zip(sr.taus, sr.rhos))
        return _finish(args, t0, [out],
                       {"maxima": [list(m) for m in sr.maxima[:4]],
                        "failures": len(sr.failures),
                        "reflection_gap": sr.reflection_gap,
                        "half_shift_gap": sr.half_shift_gap})
    if args.task == "rho":
        from .pseries import rho_n

        val = rho_n(args.tau_value, args.n)
        payload = {"tau": args.tau_value, "n": args.n, "rho": val}
        outputs = []
        if out is not None:
            _write_json(out, payload)
            outputs.append(out)
        return _finish(args, t0, outputs, payload)
    if args.task == "roots":
        from .pseries import all_roots, ftau_partial_sum

        poly = ftau_partial_sum(args.tau_value, args.n)
        roots, residuals = all_roots(poly)
        payload = {
            "tau": args.tau_value, "n": args.n,
            "roots": [{"re": z.real, "im": z.imag, "abs": abs(z), "residual": float(r)}
                      for z, r in sorted(zip(roots, residuals), key=lambda p: -abs(p[0]))],
        }
        if out is None:
            raise UsageError("roots requires --out")
        _write_json(out, payload)
        return _finish(args, t0, [out], {"rho": max(abs(z) for z in roots)})
    raise UsageError(f"unknown pseries task {args.task!r}")


def _cmd_fourier(args) -> int:
    from .fourier import GIBBS_LIMIT, fourier_partial_sum, gibbs_overshoot

    t0 = time.perf_counter()
    xs = [math.pi * i / (args.grid + 1) for i in range(1, args.grid + 1)]
    vals = fourier_partial_sum(args.n_terms, xs)
    out = Path(args.out)
    _write_csv(out, ["x", "s"], zip(xs, (float(v) for v in vals)))
    return _finish(args, t0, [out],
                   {"n_terms": args.n_terms,
                    "overshoot": gibbs_overshoot(args.n_terms),
                    "overshoot_limit": GIBBS_LIMIT})


def _cmd_run(args) -> int:
    t0 = time.perf_counter()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []

    def sub(argv):
        code = main(argv)
        if code != 0:
            raise RuntimeError(f"subcommand failed: {argv}")

    if args.preset == "quick":
        sub(["eigen", "--n", "1:6", "--method", "both",
             "--out", str(out_dir / "eigenvalues.json")])
        sub(["limiting-curve", "--grid", "1001",
             "--out", str(out_dir / "limit_curve.csv")])
        sub(["fourier", "--n-terms", "80", "--grid", "1001",
             "--out", str(out_dir / "fourier.csv")])
        outputs = [out_dir / "eigenvalues.json", out_dir / "limit_curve.csv",
                   out_dir / "fourier.csv"]
    elif args.preset == "figures":
        for name in ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"):
            sub(["figures", name, "--out", str(out_dir / f"{name}.csv")])
            outputs.append(out_dir / f"{name}.csv")
    else:
        raise UsageError(f"unknown preset {args.preset!r}")
    manifest = RunManifest("run", {"preset": args.preset}, __version__,
                           time.perf_counter() - t0, [str(p) for p in outputs])
    _write_json(out_dir / "run.manifest.json", asdict(manifest))
    print(_json_dump({"preset": args.preset, "outputs": [str(p) for p in outputs]}))
    return 0


# -- parser -------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="nel", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    subs = p.add_subparsers(dest="subcommand", required=True)

    q = subs.add_parser("eigen", help="separatrix intercepts a_n")
    q.add_argument("--n", required=True, help="index range, e.g. 1:6 or -3:6")
    q.add_argument("--method", choices=("both", "bisect", "backward"), default="both")
    q.add_argument("--tol", type=float, default=1e-10)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_eigen)

    q = subs.add_parser("figures", help="figure datasets fig1..fig8")
    q.add_argument("figure")
    q.add_argument("--out", required=True)
    q.add_argument("--n", type=int, default=None,
                   help="scaled-curve index for fig4 (default 10000); "
                        "partial-sum degree for fig8 (default 50)")
    q.add_argument("--step", type=float, default=0.0005, help="tau step for fig8")
    q.set_defaults(func=_cmd_figures)

    q = subs.add_parser("limiting-curve", help="limit curve by both routes")
    q.add_argument("--grid", type=int, default=1001)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_limiting_curve)

    q = subs.add_parser("extrapolate", help="Richardson extrapolation")
    q.add_argument("--target", choices=("a-constant", "painleve-c"))
    q.add_argument("--values", help="comma-separated raw sequence")
    q.add_argument("--indices", help="comma-separated indices")
    q.add_argument("--stages", type=int)
    q.add_argument("--count", type=int, default=12, help="eigenvalues for painleve-c")
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_extrapolate)

    q = subs.add_parser("painleve", help="first Painleve transcendent")
    q.add_argument("task", choices=("eigen", "fate", "envelope"))
    q.add_argument("--count", type=int, default=12)
    q.add_argument("--a", type=float, default=0.0)
    q.add_argument("--y0", type=float, default=1.0)
    q.add_argument("--x-min", type=float, default=-80.0, dest="x_min")
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_painleve)

    q = subs.add_parser("pseries", help="partial-sum root moduli")
    q.add_argument("task", choices=("scan", "rho", "roots"))
    q.add_argument("--n", type=int, default=50)
    q.add_argument("--tau", default="0:1:0.0005", help="scan grid start:end:step")
    q.add_argument("--tau-value", type=float, default=0.25, dest="tau_value")
    q.add_argument("--out")
    q.set_defaults(func=_cmd_pseries)

    q = subs.add_parser("fourier", help="square-wave sine sections")
    q.add_argument("--n-terms", type=int, default=80, dest="n_terms")
    q.add_argument("--grid", type=int, default=1001)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_fourier)

    q = subs.add_parser("run", help="preset batches")
    q.add_argument("--preset", choices=("quick", "figures"), default="quick")
    q.add_argument("--out-dir", required=True, dest="out_dir")
    q.set_defaults(func=_cmd_run)

    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(_json_dump({"error": {
            "type": "UsageError", "module": "cli", "message": str(exc)}}) + "\n")
        return 2
    except Exception as exc:                      # noqa: BLE001 - CLI boundary
        sys.stderr.write(_json_dump({"error": {
            "type": type(exc).__name__,
            "module": type(exc).__module__,
            "message": str(exc)}}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
