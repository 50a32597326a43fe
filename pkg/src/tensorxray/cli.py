"""Command-line entry points.

Exit codes: 0 pass, 1 condition failure, 2 usage or I/O error.
Settings come from ``--config`` (a JSON object keyed by flag name) with
command-line flags taking precedence.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import fanbeam, io, lattice, range_checks, reconstruct
from .analytic import sequence_norms
from .phantoms import PHANTOMS, make_phantom

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "m": 0,
    "N": 256,
    "nodes": 64,
    "Nmax": 60,
    "Kmax": 60,
    "mu": 0.6,
    "tol": None,
    "grid": 128,
    "gauge": "poisson",
    "compare_gauge": None,
    "threads": 1,
    "format": None,
    "seed": 0,
    "phantom": "pedestal",
    "support": 0.9,
    "field": None,
    "M": 256,
}


class UsageError(Exception):
    pass


def _settings(args) -> dict:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(cfg) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    out = dict(DEFAULTS)
    out.update(cfg)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    return out


def config_hash(settings: dict) -> str:
    blob = json.dumps(settings, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _used(settings: dict, keys) -> dict:
    return {k: settings[k] for k in keys}


def _field(s: dict):
    if s["field"]:
        return io.read_tensor_field(s["field"])
    return make_phantom(s["phantom"], s["m"], seed=s["seed"], G=s["grid"], support=s["support"])


def cmd_forward(args, s) -> int:
    f = _field(s)
    sino = fanbeam.sinogram(f, s["N"], s["nodes"], s["threads"])
    fmt = s["format"] or "bin"
    if fmt == "bin":
        if not args.out:
            raise UsageError("--out is required for binary output")
        io.write_sinogram(args.out, sino)
    elif fmt == "csv":
        _emit(io.sinogram_csv(sino), args.out)
    else:
        _emit(json.dumps({"m": sino.m, "N": sino.N, "nodes": sino.nodes,
                          "values": sino.values.tolist()}), args.out)
    return EXIT_OK


def cmd_analyze(args, s) -> int:
    sino = io.read_sinogram(args.sinogram)
    l = lattice.analyze(fanbeam.g_from_sinogram(sino), s["Nmax"], s["Kmax"])
    fmt = s["format"] or "csv"
    text = json.dumps(io.lattice_to_json(l)) if fmt == "json" else io.lattice_to_csv(l)
    _emit(text, args.out)
    return EXIT_OK


def _m_of(l, s, args) -> int:
    return args.m if args.m is not None else l.m


def cmd_check(args, s) -> int:
    l = io.read_lattice(args.lattice)
    m = _m_of(l, s, args)
    tol = 1e-3 if s["tol"] is None else s["tol"]
    rep = range_checks.report(l, m, tol)
    n_sum, k_sum = lattice.decay_norms(l, s["mu"])
    body = rep.to_dict()
    body["decay"] = {"mu": s["mu"], "angular_sum": n_sum, "boundary_sum": k_sum}
    try:
        seq, _ = lattice.boundary_modes(l, m)
        l11, l12, proxy = sequence_norms(seq, s["mu"])
        body["sequence_norms"] = {"l11": l11, "l12": l12, "hoelder_proxy": proxy}
    except ValueError as exc:
        body["sequence_norms"] = {"error": str(exc)}
    body["config_hash"] = config_hash(_used(s, ("m", "tol", "mu")) | {"input": str(args.lattice)})
    _emit(json.dumps(body, indent=2), args.out)
    if not rep.passed:
        print(f"failing families: {', '.join(rep.failing)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_complete(args, s) -> int:
    partial = io.read_lattice(args.lattice)
    m = _m_of(partial, s, args)
    done = range_checks.complete_from_generators(partial, m)
    fmt = s["format"] or "csv"
    text = json.dumps(io.lattice_to_json(done)) if fmt == "json" else io.lattice_to_csv(done)
    _emit(text, args.out)
    return EXIT_OK


def cmd_reconstruct(args, s) -> int:
    l = io.read_lattice(args.lattice)
    m = _m_of(l, s, args)
    tol = 1e-3 if s["tol"] is None else s["tol"]
    pre = range_checks.report(l, m, tol)
    if not pre.passed:
        print(f"lattice fails range checks: {', '.join(pre.failing)}", file=sys.stderr)
        return EXIT_FAIL
    f, u, psi = reconstruct.reconstruct(l, m, s["gauge"], s["grid"], s["M"])
    fmt = s["format"] or "bin"
    if fmt == "bin":
        if not args.out:
            raise UsageError("--out is required for binary output")
        io.write_tensor_field(args.out, f)
    else:
        _emit(io.tensor_csv(f), args.out)
    body = {
        "m": m,
        "gauge": psi.label if psi is not None else "none",
        "gauge_trace_residual": psi.trace_residual() if psi is not None else 0.0,
        "exterior_leakage": reconstruct.exterior_leakage(f),
        "flags": list(l.flags),
        "config_hash": config_hash(_used(s, ("m", "gauge", "grid", "M", "tol"))),
    }
    if args.report:
        Path(args.report).write_text(json.dumps(body, indent=2))
    else:
        print(json.dumps(body), file=sys.stderr)
    return EXIT_OK


def _relative(a, b) -> float:
    den = float(np.linalg.norm(a))
    return float(np.linalg.norm(a - b)) / den if den > 0 else float(np.linalg.norm(a - b))


def cmd_roundtrip(args, s) -> int:
    m = s["m"]
    f = _field(s)
    sino = fanbeam.sinogram(f, s["N"], s["nodes"], s["threads"])
    l = lattice.analyze(fanbeam.g_from_sinogram(sino), s["Nmax"], s["Kmax"])
    tol = 1e-2 if s["tol"] is None else s["tol"]
    rep, fa, _, sa = reconstruct.roundtrip(l, m, s["gauge"], s["grid"], s["N"], s["nodes"], s["M"],
                                          s["threads"])
    body = rep.to_dict()
    ok = all(v <= tol for v in rep.region_errors.values())
    if s["compare_gauge"]:
        rep2, fb, _, sb = reconstruct.roundtrip(l, m, s["compare_gauge"], s["grid"], s["N"],
                                                s["nodes"], s["M"], s["threads"])
        ta = np.stack([fa.modes[n] for n in sorted(fa.modes)])
        tb = np.stack([fb.modes[n] for n in sorted(fb.modes)])
        body["gauge_comparison"] = {
            "gauges": [rep.gauge, rep2.gauge],
            "tensor_difference": _relative(ta, tb),
            "sinogram_difference": _relative(sa.values, sb.values),
        }
        ok = ok and body["gauge_comparison"]["sinogram_difference"] <= tol
    body["tolerance"] = tol
    body["pass"] = ok
    body["config_hash"] = config_hash(_used(s, ("m", "N", "nodes", "Nmax", "Kmax", "grid", "gauge",
                                                "compare_gauge", "seed", "phantom", "support", "M", "field")))
    _emit(json.dumps(body, indent=2), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tensorxray",
                                description="Fan-beam X-ray transform of planar symmetric tensors: "
                                            "forward model, range checks and reconstruction.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default settings")
    common.add_argument("--out", "-o", help="output path (stdout for text formats when omitted)")
    common.add_argument("--m", type=int, help="tensor order")
    common.add_argument("--N", type=int, help="angular samples per torus axis (even)")
    common.add_argument("--nodes", type=int, help="Gauss-Legendre nodes per chord")
    common.add_argument("--Nmax", type=int, help="angular band limit")
    common.add_argument("--Kmax", type=int, help="boundary band limit")
    common.add_argument("--mu", type=float, help="Hoelder exponent for decay diagnostics (default 0.6)")
    common.add_argument("--tol", type=float, help="pass/fail tolerance")
    common.add_argument("--grid", type=int, help="tensor grid size G")
    common.add_argument("--gauge", help="poisson or perturbed:<seed>")
    common.add_argument("--threads", type=int, help="worker cap for the forward projector")
    common.add_argument("--format", choices=["bin", "csv", "json"])
    common.add_argument("--seed", type=int, help="seed for random phantoms")
    sub = p.add_subparsers(dest="command", required=True)

    def phantom_flags(sp):
        sp.add_argument("--phantom", choices=sorted(PHANTOMS))
        sp.add_argument("--field", help="XTTF tensor field file instead of a phantom")
        sp.add_argument("--support", type=float, help="phantom support radius")

    sp = sub.add_parser("forward", parents=[common], help="simulate a sinogram (XTSG)")
    phantom_flags(sp)
    sp.set_defaults(func=cmd_forward)

    sp = sub.add_parser("analyze", parents=[common], help="sinogram -> Fourier lattice")
    sp.add_argument("sinogram")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("check", parents=[common], help="range-condition report")
    sp.add_argument("lattice")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("complete", parents=[common], help="complete a lattice from R+ u G_L")
    sp.add_argument("lattice")
    sp.set_defaults(func=cmd_complete)

    sp = sub.add_parser("reconstruct", parents=[common], help="lattice -> tensor field (XTTF)")
    sp.add_argument("lattice")
    sp.add_argument("--report", help="path for the JSON report")
    sp.add_argument("--M", type=int, help="minimum boundary nodes for the Cauchy operator")
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("roundtrip", parents=[common], help="forward, reconstruct, re-project, compare")
    phantom_flags(sp)
    sp.add_argument("--compare-gauge", dest="compare_gauge", help="second gauge for the invariance test")
    sp.add_argument("--M", type=int, help="minimum boundary nodes for the Cauchy operator")
    sp.set_defaults(func=cmd_roundtrip)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        settings = _settings(args)
        if settings["N"] % 2:
            raise UsageError("--N must be even")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", category=UserWarning)
            return args.func(args, settings)
    except (UsageError, OSError, io.FormatError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
