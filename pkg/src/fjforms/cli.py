"""Command-line interface.

Results go to stdout (or ``--out``) as JSON, a short summary goes to stderr.
Exit codes: 0 pass, 1 contract violation, 2 usage error, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import n3, verify
from .fj import PeriodicFunctionHandle, extract_all_phi, rank_probe
from .poincare import CosetTruncation
from .symmat import HalfEvenMatrix, UpperHalfPoint
from .theta import ThetaChar, theta_eval_full
from .unimod import build_t_family, g1_decomposition, psi_eval

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# -- input parsing -------------------------------------------------------------------------------


def parse_number(s: str) -> complex:
    """``"i"``, ``"2i"``, ``"0.1+1.2i"``, ``"1/2"`` and friends."""
    t = s.strip().replace(" ", "").replace("I", "i")
    if not t:
        raise UsageError("empty number")
    if "/" in t and "i" not in t:
        return complex(Fraction(t))
    if t.endswith("i"):
        head = t[:-1]
        # bare "i", "-i", "0.1+i"
        if head == "" or head[-1] in "+-":
            t = head + "1i"
    try:
        return complex(t.replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot parse number {s!r}") from None


def parse_fraction(s: str) -> Fraction:
    try:
        return Fraction(s.strip())
    except ValueError:
        raise UsageError(f"cannot parse rational {s!r}") from None


def parse_matrix(s: str, conv=parse_number) -> list[list]:
    """Rows separated by ``;``, entries by ``,``: ``"1,1/2;1/2,1"``."""
    rows = [[conv(x) for x in row.split(",")] for row in s.split(";")]
    if len({len(r) for r in rows}) != 1:
        raise UsageError(f"ragged matrix {s!r}")
    return rows


def parse_vector(s: str, conv=parse_number) -> list:
    return [conv(x) for x in s.split(",")]


def _cx(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _point(s: str) -> UpperHalfPoint:
    Z = np.array(parse_matrix(s), dtype=complex)
    if Z.shape[0] != Z.shape[1]:
        raise UsageError("point must be a square matrix")
    try:
        return UpperHalfPoint.from_complex(Z)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _half_even(s: str) -> HalfEvenMatrix:
    try:
        return HalfEvenMatrix(tuple(tuple(r) for r in parse_matrix(s, parse_fraction)))
    except ValueError as e:
        raise UsageError(str(e)) from None


# -- commands ------------------------------------------------------------------------------------


def cmd_theta(args, cfg):
    P = _point(args.Z)
    a = parse_vector(args.a, parse_fraction)
    z = parse_vector(args.z)
    if len(a) != P.n or len(z) != P.n:
        raise UsageError("dimension mismatch between --a, --Z and --z")
    try:
        c = ThetaChar(args.m, tuple(a))
    except ValueError as e:
        raise UsageError(str(e)) from None
    v = theta_eval_full(c, P, z, cfg.budget())
    summary = f"Theta_{{{c.m},{c}}} = {v.value:.15g} (tail <= {v.tail:.2e}, {v.npoints} terms)"
    return {"value": _cx(v.value), "tail": v.tail, "npoints": v.npoints}, EXIT_OK, summary


def cmd_psi(args, cfg):
    T = _half_even(args.T)
    P = _point(args.Z)
    a = ThetaChar(1, tuple(parse_vector(args.a, parse_fraction)))
    v = psi_eval(a, T, P, cfg.budget(), min_eig=args.min_eig, relative=True)
    return {"psi": _cx(v)}, EXIT_OK, f"psi({a}, T) = {v:.15g}"


def cmd_g1(args, cfg):
    T = _half_even(args.T)
    P = _point(args.Z)
    z = parse_vector(args.z)
    direct, decomposed = g1_decomposition(T, P, z, cfg.budget(), min_eig=args.min_eig, relative=True)
    rel = abs(direct - decomposed) / max(abs(direct), 1e-300)
    return ({"direct": _cx(direct), "decomposition": _cx(decomposed), "relative_difference": rel},
            EXIT_OK, f"g1 direct {direct:.15g}, decomposition {decomposed:.15g}, rel diff {rel:.2e}")


def cmd_fj_extract(args, cfg):
    T = _half_even(args.T)
    P = _point(args.Z)
    if T.n != P.n + 1:
        raise UsageError("T must have size one more than Zhat")
    trunc = CosetTruncation.build(T.n, args.height, args.weight)
    F = PeriodicFunctionHandle.poincare(T, trunc, cfg.budget())
    phi = extract_all_phi(F, P, budget=cfg.budget(), grid=cfg.grid)
    out = {str(a): _cx(v) for a, v in phi.items()}
    return {"phi": out, "cosets": len(trunc)}, EXIT_OK, ", ".join(f"phi_{k} = {complex(*v):.6g}" for k, v in out.items())


def cmd_rank_probe(args, cfg):
    Zs = args.Z if args.Z else None
    P = _point(Zs) if Zs else UpperHalfPoint.from_complex(verify.RANK_PROBE_POINTS[cfg.n])
    fam = build_t_family(P.Y, args.strategy)
    r = rank_probe(P, fam, budget=cfg.budget(min(cfg.tol, 1e-14)), q_max=cfg.q_max, guard_height=cfg.height)
    res = {
        "rank": r.rank,
        "q": r.q,
        "status": r.status,
        "singular_values": [float(s) for s in r.singular_values],
        "profiles": {str(q): [float(s) for s in sv] for q, sv in r.profiles.items()},
    }
    code = EXIT_OK if r.status == "full" else EXIT_INCONCLUSIVE
    return res, code, f"rank {r.rank} at q = {r.q}, status {r.status}"


def cmd_gtilde(args, cfg):
    g = n3.gtilde_counterexample(grid=cfg.grid, budget=cfg.budget(min(cfg.tol, 1e-13)))
    res = {
        "z11": [_cx(z) for z in g.z11],
        "psi_(0,0),1,2": [_cx(v) for v in g.psi_002],
        "psi_(1/2,0),1,1": [_cx(v) for v in g.psi_half_011],
        "fitted_exponent_over_pi": g.exponent / np.pi,
        "prefactor": _cx(g.prefactor),
        "oracle_exponent_over_pi": g.oracle_exponent / np.pi,
        "oracle_prefactor": _cx(g.oracle_prefactor),
        "witness": g.witness(),
    }
    summary = (f"psi_(0,0),1,2 = {abs(g.prefactor):.12g} exp({g.exponent / np.pi:.12g} pi i z11), "
               f"oracle exponent {g.oracle_exponent / np.pi:.12g} pi")
    return res, EXIT_OK, summary


def cmd_verify(args, cfg):
    rep = verify.run_suite(args.suite, cfg)
    code = verify.exit_code(rep)
    npass = sum(c["pass"] for c in rep["checks"])
    return rep, code, f"verify {args.suite}: {npass}/{len(rep['checks'])} checks passed"


# -- parser ---------------------------------------------------------------------------------------


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--tol", type=float, help="truncation tolerance (default 1e-12)")
    g.add_argument("--budget-radius", type=int, help="largest admissible lattice radius (default 60)")
    g.add_argument("--grid", type=int, help="quadrature grid size (default 16)")
    g.add_argument("--seed", type=int, help="random seed (default 0)")
    g.add_argument("--config", help="flat key = value config file; flags override it")
    g.add_argument("--out", help="write the JSON result here instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="fjforms", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theta", parents=[common], help="evaluate a theta function with characteristic")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--a", required=True, help="characteristic, e.g. 0,1/2")
    p.add_argument("--Z", required=True, help="matrix, rows separated by ';'")
    p.add_argument("--z", required=True, help="vector, e.g. 0.1,0.2i")
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("psi", parents=[common], help="orbit sum psi(a, T) at Zhat")
    p.add_argument("--T", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--Z", required=True)
    p.add_argument("--min-eig", type=float, default=3.0)
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("g1", parents=[common], help="first Fourier-Jacobi layer of G(T, Z), two ways")
    p.add_argument("--T", required=True)
    p.add_argument("--Z", required=True)
    p.add_argument("--z", required=True)
    p.add_argument("--min-eig", type=float, default=3.0)
    p.set_defaults(func=cmd_g1)

    p = sub.add_parser("fj-extract", parents=[common], help="theta coefficients of a truncated Poincare series")
    p.add_argument("--T", required=True)
    p.add_argument("--Z", required=True, help="Zhat")
    p.add_argument("--height", type=int, default=0)
    p.add_argument("--weight", type=int, required=True)
    p.set_defaults(func=cmd_fj_extract)

    p = sub.add_parser("rank-probe", parents=[common], help="rank of the theta-coefficient table")
    p.add_argument("--n", type=int, choices=(2, 3))
    p.add_argument("--Z", help="Zhat (defaults to the documented sample point)")
    p.add_argument("--strategy", choices=("generic", "equal-determinant"), default="generic")
    p.add_argument("--q-max", type=int)
    p.add_argument("--height", type=int)
    p.set_defaults(func=cmd_rank_probe)

    p = sub.add_parser("gtilde", parents=[common], help="the G~ coefficient functions on the z11 grid")
    p.set_defaults(func=cmd_gtilde)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=sorted(verify.SUITES))
    p.add_argument("--n", type=int, choices=(2, 3))
    p.add_argument("--q-max", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--npts", type=int)
    p.set_defaults(func=cmd_verify)
    return parser


def _config(args) -> verify.RunConfig:
    cfg = verify.RunConfig()
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg.update(verify.RunConfig.parse_file(fh.read()))
        except OSError as e:
            raise UsageError(f"cannot read config: {e}") from None
    flags = {k: getattr(args, k, None) for k in ("tol", "budget_radius", "grid", "seed", "q_max", "height", "n", "npts")}
    return cfg.update(flags)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = _config(args)
        result, code, summary = args.func(args, cfg)
    except (UsageError, ValueError) as e:
        parser.print_usage(sys.stderr)
        print(f"fjforms: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    text = json.dumps(result, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(summary, file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
