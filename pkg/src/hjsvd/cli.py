"""Command-line front end and benchmark harness.

Subcommands: gen, factor, hsvd, eig, check-strategy, bench.  All state
lives in files (GJH1 binaries and CSV manifests/records); seeds are always
explicit, so every command is reproducible byte for byte.
"""

import argparse
import os
import sys
import time
from dataclasses import dataclass, fields

import numpy as np

from .errors import DefinitenessLostError, NumericalSingularityError, ShapeError
from .factory import SpectrumSpec, bunch_parlett_factor, generate_factor_pair
from .linalg import SignatureVector, orthonormality_distance
from .matio import read_csv_matrix, read_gjh, write_csv_matrix, write_gjh
from .solver import SolverConfig, border, drive, recover_V, strip_bordered
from .strategies import (
    enumerate_modified_modulus,
    validate_coverage,
    weakly_equivalent_modulus_rowcyclic,
)

EXIT_OK = 0
EXIT_FAIL = 1  # check-strategy failures
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SINGULAR = 4
EXIT_DEFINITENESS = 5
EXIT_NONCONVERGENCE = 6


@dataclass
class RunRecord:
    """One solver run, one CSV row."""

    n: int
    r: int
    p: int
    sweeps: int
    stop_reason: str
    wall_time: float
    max_rel_eig_err: float
    dU: float
    rotations: int
    skips: int
    sorting_enabled: bool

    @classmethod
    def header(cls):
        return ",".join(f.name for f in fields(cls))

    def row(self):
        vals = []
        for f in fields(self):
            v = getattr(self, f.name)
            vals.append(f"{v:.17g}" if isinstance(v, float) else str(v))
        return ",".join(vals)


def _write_record(path, records):
    with open(path, "w") as fh:
        fh.write(RunRecord.header() + "\n")
        for rec in records:
            fh.write(rec.row() + "\n")


def _write_bundle(out, bundle):
    os.makedirs(out, exist_ok=True)
    spec = bundle.spec
    p = bundle.factor.J.p
    write_gjh(os.path.join(out, "M.gjh"), bundle.M, p)
    write_gjh(os.path.join(out, "G.gjh"), bundle.factor.G, p)
    write_csv_matrix(os.path.join(out, "lambda_true.csv"),
                     bundle.lambda_true[np.newaxis, :])
    with open(os.path.join(out, "manifest.csv"), "w") as fh:
        fh.write("seed,n,a,p\n")
        fh.write(f"{spec.seed},{spec.n},{spec.a:.17g},{p}\n")


def _read_bundle(path):
    G, p = read_gjh(os.path.join(path, "G.gjh"))
    J = SignatureVector.from_p(G.shape[1], p)
    lam_path = os.path.join(path, "lambda_true.csv")
    lam = read_csv_matrix(lam_path).ravel() if os.path.exists(lam_path) else None
    return G, J, lam


def cmd_gen(args):
    spec = SpectrumSpec(args.n, args.a, args.seed, args.pos_count)
    bundle = generate_factor_pair(spec)
    _write_bundle(args.out, bundle)
    print(f"gen: wrote bundle to {args.out} (n={spec.n}, a={spec.a}, "
          f"seed={spec.seed}, p={bundle.factor.J.p})")
    return EXIT_OK


def cmd_factor(args):
    M, _ = read_gjh(args.infile)
    pair = bunch_parlett_factor(M)
    write_gjh(args.out, pair.G, pair.J.p)
    print(f"factor: wrote {args.out} (n={M.shape[0]}, p={pair.J.p})")
    return EXIT_OK


def _solver_config(args):
    return SolverConfig(
        max_sweeps=args.max_sweeps,
        accumulate_v=not args.no_accumulate_v,
        workers=args.workers,
        schedule=args.schedule,
        sort=not args.no_sort,
    )


def _run_solve(args):
    G, J, lam_true = _read_bundle(args.infile)
    n, r = G.shape
    p_orig = J.p
    info = None
    if r % 2 != 0:
        if not args.border:
            raise ShapeError("r is odd; rerun with --border")
        G, J, info = border(G, J, r + 1, max(n + 1, r + 1))
    cfg = _solver_config(args)
    t0 = time.perf_counter()
    result = drive(G, J, cfg)
    wall = time.perf_counter() - t0
    if info is not None:
        result = strip_bordered(result, info)
    err = float("nan")
    if lam_true is not None:
        lt = np.sort(lam_true)
        lc = np.sort(result.lam)
        err = float(np.max(np.abs(lc - lt) / np.abs(lt)))
    dU = orthonormality_distance(result.U)
    rec = RunRecord(n, r, p_orig,
                    result.sweeps_used, result.stop_reason, wall, err, dU,
                    result.rotations, result.skips, cfg.sort)
    os.makedirs(args.out, exist_ok=True)
    write_csv_matrix(os.path.join(args.out, "sigma.csv"),
                     result.sigma[np.newaxis, :])
    write_csv_matrix(os.path.join(args.out, "lambda.csv"),
                     result.lam[np.newaxis, :])
    write_gjh(os.path.join(args.out, "U.gjh"), result.U, p_orig)
    if result.Vinv_t is not None:
        Jout = SignatureVector.from_p(result.Vinv_t.shape[1], p_orig)
        write_gjh(os.path.join(args.out, "V.gjh"),
                  recover_V(result.Vinv_t, Jout), Jout.p)
    _write_record(os.path.join(args.out, "record.csv"), [rec])
    print(f"{args.command}: n={n} r={r} sweeps={result.sweeps_used} "
          f"stop={result.stop_reason} wall={wall:.3f}s "
          f"max_rel_eig_err={err:.3e} dU={dU:.3e}")
    if result.stop_reason == "max_sweeps":
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_hsvd(args):
    return _run_solve(args)


def cmd_eig(args):
    return _run_solve(args)


def _parse_range(text):
    if ".." in text:
        lo, hi = text.split("..", 1)
        return int(lo), int(hi)
    v = int(text)
    return v, v


def cmd_check_strategy(args):
    lo, hi = _parse_range(args.n)
    if lo % 2 != 0 or hi % 2 != 0 or lo < 4:
        raise ShapeError("check-strategy needs an even range with start >= 4")
    ok = True
    for n in range(lo, hi + 1, 2):
        cov = validate_coverage(enumerate_modified_modulus(n), n // 2)
        wit = weakly_equivalent_modulus_rowcyclic(n)
        line = (f"n={n}: coverage={'ok' if cov.ok else 'FAIL'} "
                f"weak-equivalence={'ok' if wit.equivalent else 'FAIL'} "
                f"shift={wit.shift}")
        print(line)
        for f in cov.failures:
            print(f"  coverage failure: {f}")
        if wit.details:
            print(f"  equivalence detail: {wit.details}")
        ok = ok and cov.ok and wit.equivalent
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bench(args):
    orders = [int(x) for x in args.orders.split(",")]
    records = []
    rows = []
    for n in orders:
        if n % 2 != 0:
            raise ShapeError("bench orders must be even")
        for p in (0, max(1, n // 16), n // 2):
            spec = SpectrumSpec(n, args.a, args.seed, pos_count=p)
            bundle = generate_factor_pair(spec)
            for sort in (True, False):
                cfg = SolverConfig(workers=args.workers, sort=sort)
                for rep in range(args.repeats):
                    t0 = time.perf_counter()
                    result = drive(bundle.factor.G, bundle.factor.J, cfg)
                    wall = time.perf_counter() - t0
                    lt = np.sort(bundle.lambda_true)
                    err = float(np.max(np.abs(np.sort(result.lam) - lt)
                                       / np.abs(lt)))
                    rec = RunRecord(n, n, p, result.sweeps_used,
                                    result.stop_reason, wall, err,
                                    orthonormality_distance(result.U),
                                    result.rotations, result.skips, sort)
                    records.append(rec)
                    rows.append(rec.row())
    _write_record(args.out, records)
    print(f"bench: wrote {len(records)} rows to {args.out}")
    return EXIT_OK


def _add_solver_flags(sp):
    sp.add_argument("--no-sort", dest="no_sort", action="store_true")
    sp.add_argument("--no-accumulate-v", dest="no_accumulate_v",
                    action="store_true")
    sp.add_argument("--max-sweeps", type=int, default=30)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--schedule", choices=("modulus", "row-cyclic"),
                    default="modulus")
    sp.add_argument("--border", action="store_true",
                    help="embed odd-r factors by a synthetic +1 column")


def build_parser():
    p = argparse.ArgumentParser(prog="hjsvd",
                                description="Hyperbolic SVD solver suite")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", help="generate a test bundle")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--a", type=float, default=20.0)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--pos-count", dest="pos_count", type=int, default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("factor", help="factor a symmetric GJH1 matrix")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_factor)

    for name, func in (("hsvd", cmd_hsvd), ("eig", cmd_eig)):
        sp = sub.add_parser(name, help=f"run the {name} solver on a bundle")
        sp.add_argument("--in", dest="infile", required=True)
        sp.add_argument("--out", required=True)
        _add_solver_flags(sp)
        sp.set_defaults(func=func)

    sp = sub.add_parser("check-strategy",
                        help="validate coverage and strategy equivalences")
    sp.add_argument("--n", required=True, help="even order or range, e.g. 4..32")
    sp.set_defaults(func=cmd_check_strategy)

    sp = sub.add_parser("bench", help="sweep/time/error table across configs")
    sp.add_argument("--orders", required=True, help="comma-separated even orders")
    sp.add_argument("--a", type=float, default=20.0)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--repeats", type=int, default=1)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ShapeError, argparse.ArgumentTypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalSingularityError as exc:
        print(f"numerical singularity: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except DefinitenessLostError as exc:
        print(f"definiteness lost: {exc}", file=sys.stderr)
        return EXIT_DEFINITENESS
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
