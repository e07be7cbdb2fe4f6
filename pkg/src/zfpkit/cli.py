"""Command-line interface tying the codec, bounds, and harness together.

Subcommands:

    compress    raw IEEE grid file -> container
    decompress  container -> raw IEEE grid file
    bounds      print the error constants / mode-selection formulas
    experiment  worst-case sweeps or real-grid analyses, CSV out

Output files are written to a temp file and renamed, so a failing run
never leaves a partial artifact behind.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
import tempfile

import numpy as np

from . import bounds as B
from . import experiments as X
from .codec import (
    DEFAULT_EXPONENT_BITS,
    CodecParams,
    ContainerError,
    GridShapeError,
    ParamError,
    compress,
    decompress,
    read_header,
)

_SCALAR_BYTES = {"f32": 4, "f64": 8}
_SCALAR_DEFAULTS = {"f32": (24, 30), "f64": (53, 62)}


def _atomic_write(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".zfpkit-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.split(",") if part != "")
    except ValueError:
        raise GridShapeError(f"cannot parse dims {text!r}") from None
    if not dims:
        raise GridShapeError("dims must name at least one axis")
    return dims


def _parse_int_list(text: str) -> tuple[int, ...]:
    """Accept '2,4,8' or 'lo:hi[:step]' (hi inclusive)."""
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        if step < 1 or hi < lo:
            raise ValueError(f"bad range {text!r}")
        return tuple(range(lo, hi + 1, step))
    return tuple(int(p) for p in text.split(",") if p != "")


def _build_params(args, d: int) -> CodecParams:
    k_default, q_default = _SCALAR_DEFAULTS[args.scalar]
    k = args.k if args.k is not None else k_default
    q = args.q if args.q is not None else q_default
    beta = args.beta if args.beta is not None else max(q - 2 * d + 2, 0)
    return CodecParams(d, k, q, beta, allow_wide_beta=args.allow_appendix_b)


def _bound_label(p: CodecParams) -> tuple[str, float]:
    value = X.applicable_bound_exact(p)
    name = "K_beta" if (p.beta <= p.beta_default_max or p.beta == p.q + 2) else "B_beta"
    return name, float(value)


def cmd_compress(args) -> int:
    dims = _parse_dims(args.dims)
    d = args.d if args.d is not None else len(dims)
    if d != len(dims):
        raise GridShapeError(f"--d {d} disagrees with {len(dims)} dims")
    params = _build_params(args, d)
    grid = X.load_raw_grid(args.input, dims, args.scalar)
    payload = compress(grid, params, b_e=args.b_e)
    out = args.out or args.input + ".zfpk"
    _atomic_write(out, payload)
    raw = grid.size * _SCALAR_BYTES[args.scalar]
    name, value = _bound_label(params)
    print(f"wrote {out}: {len(payload)} bytes, ratio {raw / len(payload):.4g}, "
          f"{name} = {value:.6g}")
    return 0


def cmd_decompress(args) -> int:
    with open(args.input, "rb") as fh:
        data = fh.read()
    header, _ = read_header(data)
    grid = decompress(data)
    scalar = args.scalar or ("f32" if header.k == 24 else "f64")
    dtype = np.float32 if scalar == "f32" else np.float64
    out = args.out or args.input + ".raw"
    _atomic_write(out, grid.astype(dtype).tobytes())
    print(f"wrote {out}: dims {'x'.join(map(str, header.dims))}, {scalar}")
    return 0


def cmd_bounds(args) -> int:
    if args.surface:
        d_range = _parse_int_list(args.d_range)
        beta_range = _parse_int_list(args.beta_range) if args.beta_range else tuple(range(1, 65))
        rows = B.kbeta_surface(d_range, beta_range, args.k or 53, args.q or 62)
        buf = io.StringIO()
        B.write_surface_csv(rows, buf)
        _emit(buf.getvalue(), args.out)
        return 0
    if args.k is None or args.q is None or args.d is None or args.beta is None:
        raise ParamError("bounds needs --d, --k, --q and --beta (or --surface)")
    inp = B.BoundInputs(d=args.d, k=args.k, q=args.q, beta=args.beta,
                        e_max=args.e_max, e_min=args.e_min, b=args.b, b_e=args.b_e)
    tight_max = args.q - 2 * args.d + 2
    kb = B.k_beta(inp, allow_out_of_regime=True)
    regime = "" if args.beta <= tight_max else f"  (outside beta <= {tight_max})"
    print(f"K_beta      = {kb:.10g}{regime}")
    if tight_max < args.beta < args.q + 2:
        print(f"B_beta      = {B.b_beta(inp):.10g}")
    if args.e_max is not None and args.e_min is not None:
        cw = B.componentwise_bound(inp, allow_out_of_regime=True)
        print(f"comp bound  = {cw:.10g}  (rho = {args.e_max - args.e_min})")
    if args.b is not None:
        if args.e_max is None:
            raise ParamError("an accuracy target needs --e-max as well as --b")
        try:
            beta_needed = B.beta_for_accuracy(inp)
            print(f"beta for 2^-{args.b} accuracy at e_max={args.e_max}: {beta_needed}")
        except B.InfeasibleAccuracyError as e:
            print(f"beta for 2^-{args.b} accuracy: infeasible ({e})")
    rate = B.rate_lower_bound(args.beta, args.d, args.b_e)
    print(f"rate bound  >= {float(rate):.10g} bits/value (b_e = {args.b_e})")
    return 0


def cmd_experiment(args) -> int:
    if args.grid:
        if not args.dims:
            raise GridShapeError("--grid needs --dims")
        dims = _parse_dims(args.dims)
        grid = X.load_raw_grid(args.grid, dims, args.scalar)
        k_default, q_default = _SCALAR_DEFAULTS[args.scalar]
        k = args.k if args.k is not None else k_default
        q = args.q if args.q is not None else q_default
        betas = _parse_int_list(args.beta_range) if args.beta_range else (
            tuple(sorted({2, 4, 8, 16, q - 2 * len(dims) + 2})))
        rows = X.analyze_grid(grid, k, q, betas, _SCALAR_BYTES[args.scalar],
                              allow_wide_beta=args.allow_appendix_b, b_e=args.b_e)
        buf = io.StringIO()
        X.write_grid_csv(rows, buf)
        _emit(buf.getvalue(), args.out)
        bad = sum(r.violations for r in rows)
        if bad:
            print(f"ERROR: {bad} block(s) exceeded the error bound", file=sys.stderr)
            return 1
        return 0
    d = args.d if args.d is not None else 1
    k_default, q_default = _SCALAR_DEFAULTS[args.scalar]
    k = args.k if args.k is not None else k_default
    q = args.q if args.q is not None else q_default
    tight_max = q - 2 * d + 2
    betas = _parse_int_list(args.beta_range) if args.beta_range else (
        tuple(sorted({b for b in (8, 16, 32, 48) if b <= tight_max} | {max(tight_max, 1)})))
    rhos = _parse_int_list(args.rho_list)
    spec = X.WorstCaseSpec(d=d, k=k, q=q, betas=betas, rhos=rhos, e_min=args.e_min or 0,
                           trials=args.trials, seed=args.seed,
                           float32=(args.scalar == "f32"),
                           allow_wide_beta=args.allow_appendix_b)
    cells, violators = X.sweep(spec, threads=args.threads)
    buf = io.StringIO()
    X.write_sweep_csv(cells, buf)
    _emit(buf.getvalue(), args.out)
    if violators:
        for rec in violators:
            print(f"VIOLATION: {rec}", file=sys.stderr)
        return 1
    return 0


def _emit(text: str, out: str | None) -> None:
    if out:
        _atomic_write(out, text.encode())
    else:
        sys.stdout.write(text)


def _add_common_params(sp, with_beta=True):
    sp.add_argument("--scalar", choices=("f32", "f64"), default="f64",
                    help="source scalar width (sets default k and q)")
    sp.add_argument("--d", type=int, default=None, help="grid dimensionality")
    sp.add_argument("--k", type=int, default=None, help="significand bits of the source")
    sp.add_argument("--q", type=int, default=None, help="block integer precision")
    if with_beta:
        sp.add_argument("--beta", type=int, default=None, help="bit planes kept")
    sp.add_argument("--allow-appendix-b", action="store_true",
                    help="permit beta in (q-2d+2, q+2] (looser bound applies)")
    sp.add_argument("--b-e", type=int, default=DEFAULT_EXPONENT_BITS,
                    help="container exponent field width")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zfpkit",
        description="Fixed-precision block compressor with verified error bounds")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("compress", help="compress a raw IEEE grid file")
    sp.add_argument("input")
    sp.add_argument("--dims", required=True, help="comma-separated grid extents")
    _add_common_params(sp)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_compress)

    sp = sub.add_parser("decompress", help="decompress a container")
    sp.add_argument("input")
    sp.add_argument("--scalar", choices=("f32", "f64"), default=None,
                    help="output scalar width (default: inferred from k)")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_decompress)

    sp = sub.add_parser("bounds", help="evaluate the error-bound formulas")
    _add_common_params(sp)
    sp.add_argument("--e-max", type=int, default=None, help="block exponent")
    sp.add_argument("--e-min", type=int, default=None, help="smallest block exponent")
    sp.add_argument("--b", type=int, default=None, help="accuracy target in bits")
    sp.add_argument("--surface", action="store_true",
                    help="emit the (d, beta) -> log10 K_beta table as CSV")
    sp.add_argument("--d-range", default="1:5", help="surface d range, lo:hi[:step]")
    sp.add_argument("--beta-range", default=None,
                    help="beta list '2,4,8' or range 'lo:hi[:step]'")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("experiment", help="bound-verification sweeps (CSV)")
    _add_common_params(sp, with_beta=False)
    sp.add_argument("--beta-range", default=None,
                    help="beta list '2,4,8' or range 'lo:hi[:step]'")
    sp.add_argument("--rho-list", default="0,7,14", help="exponent ranges to sweep")
    sp.add_argument("--e-min", type=int, default=0, help="base exponent of generated blocks")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=None,
                    help="worker processes (ZFPKIT_THREADS caps this)")
    sp.add_argument("--grid", default=None, help="analyze a raw grid file instead")
    sp.add_argument("--dims", default=None, help="dims of --grid")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParamError, ContainerError, GridShapeError, B.BoundDomainError,
            ValueError, OSError) as e:
        print(f"zfpkit: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
