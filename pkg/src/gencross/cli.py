"""
Command-line front end.

Reports are ``key=value`` lines on stdout; identical arguments give identical
bytes. Exit codes:

    0  all checks within tolerance
    1  a check exceeded its tolerance
    2  usage error or unmet precondition (bad n, grid budget, unresolved k)
    3  field file could not be parsed
    4  method precondition failed (Riesz support check)

FFT thread count comes from the GENCROSS_THREADS environment variable.
"""

import argparse
import sys

import numpy as np

from . import calculus as calc
from .algebra import cross_dim
from .divcurl import (commutation_residuals, default_demo,
                      potential_split_residual, weak_pairing)
from .errors import ConfigurationError, DomainError, FieldFormatError, PreconditionError
from .fields import (DEFAULT_SAMPLE_BUDGET, Grid, band_limited, read_field,
                     write_field)
from .helmholtz import (bump_field, relative_l2_deviation, riesz_decompose,
                        spectral_decompose)
from .identities import DEFAULT_SEED, identity_residuals

EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE, EXIT_PARSE, EXIT_METHOD = 0, 1, 2, 3, 4

DEFAULT_SHAPES = {2: 32, 3: 16, 4: 8, 5: 6}


class UsageError(Exception):
    pass


def _fmt(value):
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6e}"
    return str(value)


class Report:
    """Ordered ``key=value`` records plus a pass flag."""

    def __init__(self, command):
        self.lines = [f"command={command}"]
        self.ok = True

    def add(self, **items):
        self.lines.append(" ".join(f"{k}={_fmt(v)}" for k, v in items.items()))

    def check(self, name, value, tolerance, passed=None):
        passed = value <= tolerance if passed is None else passed
        self.ok &= bool(passed)
        self.add(check=name, value=value, tolerance=tolerance,
                 status="ok" if passed else "FAIL")

    def emit(self, stream):
        self.lines.append(f"result={'pass' if self.ok else 'fail'}")
        stream.write("\n".join(self.lines) + "\n")
        return EXIT_OK if self.ok else EXIT_TOLERANCE


# --------------------------------------------------------------------------
# subcommands


def cmd_identities(args, out):
    if not 2 <= args.n <= 64:
        raise UsageError(f"--n must be in [2, 64], got {args.n}")
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    rep = Report("identities")
    rep.add(n=args.n, trials=args.trials, seed=args.seed)
    for name, value in identity_residuals(args.n, args.trials, args.seed).items():
        rep.check(name, value, args.tolerance)
    return rep.emit(out)


def cmd_decompose(args, out):
    try:
        a = read_field(args.input)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    if a.kind != "vector" or a.rows != a.grid.n:
        raise UsageError(f"decompose needs a vector field, got kind={a.kind} rows={a.rows}")
    rep = Report("decompose")
    rep.add(method=args.method, n=a.grid.n, shape=",".join(map(str, a.grid.shape)))
    spectral = spectral_decompose(a)
    if args.method == "spectral":
        result = spectral
        d = result.diagnostics
        rep.check("sum_residual", d["sum_residual"], args.tolerance)
        rep.check("div_divfree", d["div_divfree"], args.tolerance)
        rep.check("curl_curlfree", d["curl_curlfree"], args.tolerance)
    else:
        result = riesz_decompose(a, support_check=args.support_check)
        rep.add(support_violation=result.diagnostics["support_violation"])
        rep.check("spectral_deviation", relative_l2_deviation(result, spectral, a),
                  args.riesz_tolerance)
    rep.add(curlfree_norm_inf=result.a_curlfree.norm_inf(),
            divfree_norm_inf=result.a_divfree.norm_inf())
    rep.add(mean_mode=",".join(f"{m:.6e}" for m in result.mean_mode))
    if args.output:
        write_field(f"{args.output}.curlfree.fld", result.a_curlfree)
        write_field(f"{args.output}.divfree.fld", result.a_divfree)
        rep.add(wrote=f"{args.output}.curlfree.fld,{args.output}.divfree.fld")
    return rep.emit(out)


def _laplacian_grid(args):
    if not 2 <= args.n <= 5:
        raise UsageError(f"--n must be in [2, 5], got {args.n}")
    shape = args.shape or DEFAULT_SHAPES[args.n]
    samples = shape ** args.n * args.n ** 2
    if samples > args.budget:
        raise UsageError(f"{args.n}x{args.n} matrix field on {shape}^{args.n} needs "
                         f"{samples} samples, budget is {args.budget}")
    return Grid((shape,) * args.n)


def cmd_laplacian_check(args, out):
    g = _laplacian_grid(args)
    n, b, s = g.n, args.backend, args.seed
    f = band_limited(g, "scalar", s)
    a = band_limited(g, "vector", s + 1)
    c = band_limited(g, "cross", s + 2)
    P = band_limited(g, "matrix", s + 3)
    Q = band_limited(g, "matrix", s + 4, rows=n, cols=cross_dim(n))
    Da = calc.derivative(a, b)
    rep = Report("laplacian-check")
    rep.add(n=n, shape=g.shape[0], backend=b, seed=s)
    tol = args.tolerance
    rep.check("curl_of_grad", calc.curl_n(calc.grad(f, b), b).norm_inf(), tol)
    rep.check("div_of_adjoint_curl", calc.div(calc.adjoint_curl(c, b), b).norm_inf(), tol)
    rep.check("matrix_curl_of_gradient", calc.matrix_curl(Da, b).norm_inf(), tol)
    rep.check("inc_of_gradient", calc.inc_n(Da, b).norm_inf(), tol)
    rep.check("parts_vector", calc.integration_by_parts_residual(a, c, b), tol)
    rep.check("parts_matrix", calc.integration_by_parts_residual_matrix(P, Q, b), tol)
    second_order = {
        "vector_laplacian": calc.vector_laplacian_decomposition(a, b).residual,
        "matrix_laplacian": calc.matrix_laplacian_decomposition(P, b),
        "curl_adjoint_curl": calc.curl_adjoint_curl_identity_residual(a, b),
    }
    if b == "spectral":
        for name, value in second_order.items():
            rep.check(name, value, tol)
    else:
        # truncation error O(h^2): judged by the refinement ratio instead
        for name, value in second_order.items():
            rep.add(truncation=name, value=value)
        coarse, fine, ratio = calc.laplacian_refinement_ratio(g.shape[0], n, b)
        rep.add(refinement_coarse=coarse, refinement_fine=fine)
        lo, hi = args.ratio_window
        rep.check("refinement_ratio", ratio, hi, passed=lo <= ratio <= hi)
    return rep.emit(out)


def _parse_k(text):
    try:
        return tuple(int(k) for k in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def cmd_divcurl_demo(args, out):
    if len(args.k) < 3:
        raise UsageError("--k needs at least 3 values for the decay fit")
    try:
        fam_u, fam_v, phi = default_demo(args.shape, args.amplitude, args.k)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    report = weak_pairing(fam_u, fam_v, phi)
    rep = Report("divcurl-demo")
    rep.add(n=2, shape=args.shape, amplitude=args.amplitude, axis=fam_u.axis)
    rep.lines.extend(report.records().splitlines())
    rep.add(div_drift=fam_u.constraint_drift(), curl_drift=fam_v.constraint_drift())
    f = band_limited(fam_u.base.grid, "vector", args.seed, zero_mean=True)
    r_div, r_curl = commutation_residuals(f)
    rep.add(commutation_div=r_div, commutation_curl=r_curl,
            potential_split=potential_split_residual(f))
    rep.check("decay_exponent", report.decay_exponent, args.max_exponent)
    rep.check("final_deviation", report.deviations[-1], args.tolerance)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("k,pairing,deviation\n")
            for k, p, d in zip(report.k_values, report.pairing_values, report.deviations):
                fh.write(f"{k},{p:.12e},{d:.12e}\n")
    return rep.emit(out)


def cmd_nye_check(args, out):
    g = Grid((args.shape,) * 3)
    a = band_limited(g, "vector", args.seed)
    C = calc.nye_curl_of_skew_3d(a)
    err = (calc.nye_recover_gradient_3d(C) - calc.derivative(a)).norm_inf()
    rep = Report("nye-check")
    rep.add(shape=args.shape, seed=args.seed)
    rep.check("nye_roundtrip_3d", err, args.tolerance)
    dg = Grid((args.det_shape,) * args.det_n)
    det = calc.skew_curl_determinacy(band_limited(dg, "cross", args.seed + 1))
    rep.add(determinacy_n=det.n, lift_rank=det.rank, full_rank=det.full_rank, modes=det.modes)
    rep.check("determinacy_consistency", det.consistency_residual, args.det_tolerance)
    rep.check("determinacy_recovery", det.recovery_error, args.det_tolerance)
    return rep.emit(out)


def cmd_ellipticity(args, out):
    if not 2 <= args.n <= 64:
        raise UsageError(f"--n must be in [2, 64], got {args.n}")
    r = calc.ellipticity_report(args.operator, args.n, args.trials, args.seed, args.tol)
    rep = Report("ellipticity")
    rep.add(operator=r.operator, n=r.n, trials=r.trials)
    rep.add(min_singular_value=r.min_singular_value, elliptic=r.elliptic)
    if not r.elliptic:
        S = calc.symbol(r.witness_frequency, args.operator)
        rep.add(kernel_residual=float(np.max(np.abs(S @ r.kernel_witness))))
    if args.operator == "adjoint_curl" and args.n == 3:
        b = r.witness_frequency
        w = calc.adjoint_curl_kernel_witness_3d(b)
        rep.add(witness_residual=float(np.max(np.abs(calc.symbol(b, "adjoint_curl") @ w))))
    return rep.emit(out)


def cmd_sample_field(args, out):
    shape = args.shape or DEFAULT_SHAPES.get(args.n, 8)
    try:
        g = Grid((shape,) * args.n)
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None
    if args.profile == "random":
        field = band_limited(g, "vector", args.seed, zero_mean=args.zero_mean)
    elif args.profile == "gradient":
        field = calc.grad(band_limited(g, "scalar", args.seed))
    elif args.profile == "divfree":
        field = calc.adjoint_curl(band_limited(g, "cross", args.seed))
    else:
        field = bump_field(g, args.profile.split("-")[0])
    write_field(args.output, field)
    rep = Report("sample-field")
    rep.add(profile=args.profile, n=args.n, shape=shape, output=args.output)
    return rep.emit(out)


# --------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="gencross",
                                description="Generalized cross product toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(func=func)
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        return sp

    sp = add("identities", cmd_identities, "randomised algebraic identity suite")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--tolerance", type=float, default=1e-12)

    sp = add("decompose", cmd_decompose, "Helmholtz split of a vector field file")
    sp.add_argument("input")
    sp.add_argument("--method", choices=("spectral", "riesz"), default="spectral")
    sp.add_argument("--output", help="prefix for the two output field files")
    sp.add_argument("--tolerance", type=float, default=1e-11)
    sp.add_argument("--riesz-tolerance", type=float, default=5e-2,
                    help="max relative L2 deviation of the Riesz result from the spectral one")
    sp.add_argument("--support-check", type=float, default=1e-4)

    sp = add("laplacian-check", cmd_laplacian_check, "discrete operator identities")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--shape", type=int, help="points per axis (default depends on n)")
    sp.add_argument("--backend", choices=("spectral", "central2"), default="spectral")
    sp.add_argument("--tolerance", type=float, default=1e-9)
    sp.add_argument("--budget", type=int, default=DEFAULT_SAMPLE_BUDGET)
    sp.add_argument("--ratio-window", type=float, nargs=2, default=(3.5, 4.5),
                    metavar=("LO", "HI"))

    sp = add("divcurl-demo", cmd_divcurl_demo, "weak pairing of oscillating families")
    sp.add_argument("--shape", type=int, default=128)
    sp.add_argument("--amplitude", type=float, default=1.0)
    sp.add_argument("--k", type=_parse_k, default=(4, 8, 16, 32))
    sp.add_argument("--tolerance", type=float, default=1e-2,
                    help="max deviation at the largest k")
    sp.add_argument("--max-exponent", type=float, default=-0.9)
    sp.add_argument("--csv", help="also write k,pairing,deviation as CSV")

    sp = add("nye-check", cmd_nye_check, "3D Nye round trip and general-n determinacy")
    sp.add_argument("--shape", type=int, default=16)
    sp.add_argument("--tolerance", type=float, default=1e-10)
    sp.add_argument("--det-n", type=int, default=4)
    sp.add_argument("--det-shape", type=int, default=8)
    sp.add_argument("--det-tolerance", type=float, default=1e-8)

    sp = add("ellipticity", cmd_ellipticity, "symbol injectivity report")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--operator", choices=calc.OPERATORS, default="adjoint_curl")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--tol", type=float, default=1e-10)

    sp = add("sample-field", cmd_sample_field, "write a test vector field file")
    sp.add_argument("output")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--shape", type=int)
    sp.add_argument("--profile", default="random",
                    choices=("random", "gradient", "divfree", "gradient-bump", "divfree-bump"))
    sp.add_argument("--zero-mean", action="store_true")
    return p


def main(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args, out)
    except FieldFormatError as exc:
        err.write(f"gencross: parse error: {exc}\n")
        return EXIT_PARSE
    except PreconditionError as exc:
        err.write(f"gencross: precondition failed: {exc}\n")
        return EXIT_METHOD if args.command == "decompose" else EXIT_USAGE
    except (UsageError, ConfigurationError, DomainError) as exc:
        err.write(f"gencross: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
