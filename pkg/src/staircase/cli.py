"""Command-line entry point: ``staircase <subcommand> ...``.

Exit codes: 0 success, 2 usage, 3 insufficient shares, 4 integrity,
5 I/O, 6 protocol.
"""
from __future__ import annotations

import argparse
import asyncio
import csv
import io
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analysis, montecarlo
from ._validation import check_field_matrix
from .cluster import HiddenVectorSession, LocalCluster, Master, parse_address, worker_serve
from .errors import InsufficientSharesError, StaircaseError, StorageError, UsageError
from .field import FieldContext
from .linalg import Matrix, load_matrix, save_matrix
from .params import DelayParams, SystemParams
from .sharing import (classical_decode, classical_encode, decode_shares, load_share, load_shares,
                      save_shares, staircase_encode)

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 2, 5


def _default_seed() -> int:
    raw = os.environ.get("SCC_SEED")
    if raw is None:
        return 42
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SCC_SEED must be an integer, got {raw!r}") from None


def _common(required_nk: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("system")
    g.add_argument("--n", type=int, required=required_nk, help="number of workers")
    g.add_argument("--k", type=int, required=required_nk, help="reconstruction threshold")
    g.add_argument("--z", type=int, default=1, help="collusion bound (default 1)")
    g.add_argument("--lambda", dest="lam", type=float, default=1.0, help="exponential rate (default 1)")
    g.add_argument("--c", type=float, default=1.0, help="delay shift (default 1)")
    g.add_argument("--seed", type=int, default=None, help="seed (default $SCC_SEED or 42)")
    g.add_argument("--field-modulus", type=int, default=65537, help="prime p (default 65537)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="staircase", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[_common(True)], help="closed-form latency analytics")
    a.add_argument("--format", choices=("text", "csv"), default="text")

    s = sub.add_parser("simulate", parents=[_common(False)], help="Monte-Carlo sweep to CSV")
    s.add_argument("--regime", choices=("fixed-rate", "fixed-parity"), default="fixed-rate")
    s.add_argument("--value", default=None,
                   help="k/n for fixed-rate (1/2, 1/4, 1/5) or n-k for fixed-parity (2, 5, 10)")
    s.add_argument("--n-grid", default=None, help="comma-separated n values (default: regime grid)")
    s.add_argument("--iters", type=int, default=montecarlo.DEFAULT_ITERATIONS)
    s.add_argument("--out", default="-", help="CSV path, '-' for stdout")

    e = sub.add_parser("encode", parents=[_common(True)], help="split a matrix into share files")
    e.add_argument("--matrix", required=True, help="SCMX matrix file or integer CSV")
    e.add_argument("--scheme", choices=("staircase", "classical"), default="staircase")
    e.add_argument("--out", required=True, help="output directory")
    e.add_argument("--os-entropy", action="store_true", help="draw keys from the OS instead of --seed")

    d = sub.add_parser("decode", help="reconstruct from a directory of share or sub-result files")
    d.add_argument("--shares", required=True, help="directory of .scs files")
    d.add_argument("--d", type=int, default=None, help="worker count to decode from (staircase)")
    d.add_argument("--out", default="-", help="SCMX path, *.csv, or '-' for CSV on stdout")

    w = sub.add_parser("worker", parents=[_common(False)], help="serve one share over TCP")
    w.add_argument("--share", required=True)
    w.add_argument("--listen", default="127.0.0.1:0")
    w.add_argument("--no-delay", action="store_true", help="send sub-results without injected delay")
    w.add_argument("--time-scale", type=float, default=1.0, help="wall seconds per model second")

    m = sub.add_parser("master", parents=[_common(False)], help="run rounds against workers")
    m.add_argument("--workers", default=None, help="comma-separated host:port list")
    m.add_argument("--x", default=None, help="comma-separated vector entries")
    m.add_argument("--x-file", default=None, help="SCMX or CSV file holding x")
    m.add_argument("--rounds", type=int, default=1)
    m.add_argument("--timeout", type=float, default=60.0)
    m.add_argument("--hide-x", action="store_true", help="mask x across two worker groups")
    m.add_argument("--group1", default=None, help="n,k,z of the first group (with --hide-x)")
    m.add_argument("--group2", default=None, help="n,k,z of the second group (with --hide-x)")
    m.add_argument("--local", action="store_true",
                   help="start in-process workers from --matrix instead of connecting")
    m.add_argument("--matrix", default=None, help="matrix to encode for --local")
    m.add_argument("--scheme", choices=("staircase", "classical"), default="staircase")
    m.add_argument("--time-scale", type=float, default=1.0)
    m.add_argument("--no-delay", action="store_true")
    return parser


# -- helpers ------------------------------------------------------------------------

def _seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _system(args) -> SystemParams:
    if args.n is None or args.k is None:
        raise UsageError("--n and --k are required")
    return SystemParams(args.n, args.k, args.z)


def read_matrix_file(path, ctx: FieldContext) -> Matrix:
    path = Path(path)
    try:
        if path.suffix.lower() in (".csv", ".txt"):
            rows = [[int(v) for v in line] for line in csv.reader(path.read_text().splitlines()) if line]
            if not rows or len({len(r) for r in rows}) != 1:
                raise UsageError(f"{path} is not a rectangular integer table")
            return check_field_matrix(np.array(rows, dtype=object), ctx, name=str(path))
        m = load_matrix(path)
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"{path}: {exc}") from None
    if m.ctx.p != ctx.p:
        raise UsageError(f"{path} is over GF({m.ctx.p}); pass --field-modulus {m.ctx.p}")
    return m


def matrix_csv(m: Matrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in m.tolist():
        w.writerow(row)
    return buf.getvalue()


def _write_text(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc.strerror or exc}") from None


def _fmt(v) -> str:
    return f"{float(v):.6f}"


# -- subcommands ------------------------------------------------------------------

def cmd_analyze(args) -> int:
    params = _system(args)
    delay = DelayParams(args.lam, args.c)
    ub = analysis.upper_bound_mean_tsc(params, delay)
    lb = analysis.lower_bound_mean_tsc(params, delay)
    exact = analysis.exact_mean_tsc(params, delay)
    values = {
        "n": params.n, "k": params.k, "z": params.z, "lambda": delay.lam, "c": delay.c,
        "ub": _fmt(ub.value), "d_ub": ub.d, "lb": _fmt(lb.value), "d_lb": lb.d,
        "ub_loose": _fmt(analysis.loose_upper_bound_mean_tsc(params, delay)),
        "exact": _fmt(exact) if exact is not None else "",
        "mean_tss": _fmt(analysis.mean_tss(params, delay)),
        "savings_bound": _fmt(analysis.savings_lower_bound(params, delay)),
        "b": params.b,
    }
    cc = {d: params.alpha(d) for d in range(params.k, params.n + 1)}
    if args.format == "csv":
        for d, a in cc.items():
            values[f"CC({d})"] = f"{float(a):g}"
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(values), lineterminator="\n")
        w.writeheader()
        w.writerow(values)
        sys.stdout.write(buf.getvalue())
        return EXIT_OK
    for key, v in values.items():
        if key == "exact" and v == "":
            v = "n/a (closed form needs n-k <= 2)"
        print(f"{key}={v}")
    for d, a in cc.items():
        print(f"CC({d})={float(a):g} subshares={params.subshares_needed(d)}/{params.b}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    value = args.value
    if value is None:
        value = Fraction(1, 2) if args.regime == "fixed-rate" else 5
    elif args.regime == "fixed-rate":
        try:
            value = Fraction(value)
        except ValueError:
            raise UsageError(f"--value must be a fraction like 1/2, got {value!r}") from None
    else:
        try:
            value = int(value)
        except ValueError:
            raise UsageError(f"--value must be an integer, got {value!r}") from None
    grid = ()
    if args.n_grid:
        try:
            grid = tuple(int(v) for v in args.n_grid.split(","))
        except ValueError:
            raise UsageError(f"--n-grid must list integers, got {args.n_grid!r}") from None
    spec = montecarlo.ExperimentSpec(args.regime, value, grid, z=args.z, lam=args.lam, c=args.c,
                                     iterations=args.iters, seed=_seed(args))
    text = montecarlo.rows_to_csv(montecarlo.run_sweep(spec))
    _write_text(args.out, text)
    return EXIT_OK


def _encoder(scheme):
    return staircase_encode if scheme == "staircase" else classical_encode


def cmd_encode(args) -> int:
    params = _system(args)
    ctx = FieldContext(args.field_modulus)
    A = read_matrix_file(args.matrix, ctx)
    rng = None if args.os_entropy else np.random.default_rng(_seed(args))
    shares = _encoder(args.scheme)(A, params, rng=rng)
    try:
        paths = save_shares(args.out, shares)
    except OSError as exc:
        raise StorageError(f"cannot write shares to {args.out}: {exc.strerror or exc}") from None
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_decode(args) -> int:
    try:
        shares = load_shares(args.shares)
    except OSError as exc:
        raise StorageError(f"cannot read {args.shares}: {exc.strerror or exc}") from None
    if not shares:
        raise InsufficientSharesError(f"no .scs files in {args.shares}")
    params = shares[0].params
    if shares[0].scheme == "classical":
        A = classical_decode(shares, params)
    else:
        A = decode_shares(shares, params, args.d)
    if args.out == "-" or args.out.lower().endswith(".csv"):
        _write_text(args.out, matrix_csv(A))
    else:
        try:
            save_matrix(args.out, A)
        except OSError as exc:
            raise StorageError(f"cannot write {args.out}: {exc.strerror or exc}") from None
    return EXIT_OK


def cmd_worker(args) -> int:
    try:
        share = load_share(args.share)
    except OSError as exc:
        raise StorageError(f"cannot read {args.share}: {exc.strerror or exc}") from None
    host, port = parse_address(args.listen)
    delay = None if args.no_delay else DelayParams(args.lam, args.c)

    def ready(h, p):
        print(f"listening on {h}:{p}", flush=True)

    try:
        asyncio.run(worker_serve(share, host, port, delay=delay, seed=_seed(args),
                                 time_scale=args.time_scale, ready=ready))
    except KeyboardInterrupt:
        pass
    except OSError as exc:
        raise StorageError(f"cannot listen on {args.listen}: {exc.strerror or exc}") from None
    return EXIT_OK


def _read_x(args, ctx: FieldContext):
    if (args.x is None) == (args.x_file is None):
        raise UsageError("give exactly one of --x and --x-file")
    if args.x is not None:
        try:
            vals = [int(v) for v in args.x.split(",")]
        except ValueError:
            raise UsageError(f"--x must list integers, got {args.x!r}") from None
        if any(v < 0 or v >= ctx.p for v in vals):
            raise UsageError(f"--x entries must lie in [0, {ctx.p})")
        return vals
    return [int(v) for v in read_matrix_file(args.x_file, ctx).data.reshape(-1)]


def cmd_master(args) -> int:
    ctx = FieldContext(args.field_modulus)
    x = _read_x(args, ctx)
    seed = _seed(args)
    if args.rounds < 1:
        raise UsageError("--rounds must be >= 1")
    if args.hide_x:
        if not (args.group1 and args.group2):
            raise UsageError("--hide-x needs --group1 and --group2")
        g1, g2 = SystemParams.parse(args.group1), SystemParams.parse(args.group2)
        for name, g in (("--group1", g1), ("--group2", g2)):
            if not g.z < g.k < g.n:
                raise UsageError(f"{name} needs z < k < n, got {g}")
    delay = None if args.no_delay else DelayParams(args.lam, args.c)

    async def run_plain(master):
        out = None
        for _ in range(args.rounds):
            r = await master.run_round(x)
            print(f"round={r.round_id} d_star={r.d_star} elapsed={r.elapsed:.6f}", file=sys.stderr)
            out = r.value
        return out

    async def run_hidden(m1, m2):
        session = HiddenVectorSession(m1, m2, np.random.default_rng(seed))
        out = None
        for _ in range(args.rounds):
            out, r1, r2 = await session.run_round(x)
            print(f"round={r1.round_id} d_star=({r1.d_star},{r2.d_star}) "
                  f"elapsed={max(r1.elapsed, r2.elapsed):.6f}", file=sys.stderr)
        return out

    async def main():
        if args.local:
            if args.matrix is None:
                raise UsageError("--local needs --matrix")
            A = read_matrix_file(args.matrix, ctx)
            rng = np.random.default_rng(seed)
            enc = _encoder(args.scheme)
            kw = dict(delay=delay, time_scale=args.time_scale, timeout=args.timeout)
            if args.hide_x:
                async with LocalCluster(enc(A, g1, rng=rng), seed=seed, **kw) as c1, \
                        LocalCluster(enc(A, g2, rng=rng), seed=seed + 1, **kw) as c2:
                    return await run_hidden(c1.master, c2.master)
            async with LocalCluster(enc(A, _system(args), rng=rng), seed=seed, **kw) as cl:
                return await run_plain(cl.master)
        if not args.workers:
            raise UsageError("--workers is required unless --local is given")
        addrs = [a.strip() for a in args.workers.split(",") if a.strip()]
        if args.hide_x:
            if len(addrs) != g1.n + g2.n:
                raise UsageError(f"--hide-x with {g1} and {g2} needs {g1.n + g2.n} workers, got {len(addrs)}")
            async with Master(addrs[:g1.n], timeout=args.timeout) as m1, \
                    Master(addrs[g1.n:], timeout=args.timeout) as m2:
                for name, g, m in (("group 1", g1, m1), ("group 2", g2, m2)):
                    if m.params != g:
                        raise UsageError(f"{name} workers hold {m.params} shares, expected {g}")
                return await run_hidden(m1, m2)
        async with Master(addrs, timeout=args.timeout) as m:
            return await run_plain(m)

    result = asyncio.run(main())
    sys.stdout.write(matrix_csv(result))
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "worker": cmd_worker,
    "master": cmd_master,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except StaircaseError as exc:
        print(f"staircase {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"staircase {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
