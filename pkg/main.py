import argparse
import asyncio
import logging
import math
import sys
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from artifacts import dumps
from config import Config, ConfigError, RunConfig

# Configure logging
logging.basicConfig(
    level=getattr(logging, Config.LOG_LEVEL, logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def parse_window(text: str) -> Tuple[float, float]:
    """'0:50' (or '0,50') as a height window."""
    sep = ":" if ":" in text else ","
    try:
        lo, hi = (float(v) for v in text.split(sep))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like LO:HI, got {text!r}")
    return lo, hi


def parse_complex(text: str) -> complex:
    """'0.5+14.1i' or '0.5+14.1j'."""
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def parse_step(text: str) -> Optional[float]:
    return None if text == "auto" else float(text)


def parse_index(text: str) -> Tuple[int, ...]:
    return tuple(int(k) for k in text.replace(",", ".").split("."))


def _select_psi(args):
    """ψ and χ from --q/--index, or the --psi-index-th member of the family at scale Q."""
    from siegel.characters import (Character, FamilySpec, build_family, enumerate_psi_q,
                                   fundamental_discriminant, kronecker_character)
    from sympy import factorint
    chi = kronecker_character(fundamental_discriminant(args.D))
    q = getattr(args, "q", None)
    index = getattr(args, "index", None)
    if q is not None and index is not None:
        factors = tuple(sorted(factorint(q).items()))
        if len(index) != len(factors):
            raise ValueError(f"--index needs one exponent per prime factor of {q}")
        return Character(q, factors, tuple((k,) for k in index)), chi
    if q is not None:
        members = enumerate_psi_q(q, args.D, family_only=False)
    else:
        members = build_family(FamilySpec.from_scale(args.D, args.Q)).members(args.psi_index + 1)
    if args.psi_index >= len(members):
        raise ValueError(f"only {len(members)} characters available, index {args.psi_index} requested")
    return members[args.psi_index], chi


def _context(args):
    from siegel.mollifier import MollifierContext, build_tables
    cfg = RunConfig(D=args.D, Q=args.Q, R=args.R)
    params = cfg.analysis_params()
    psi, chi = _select_psi(args)
    tables = build_tables(chi, params, getattr(args, "capF", None))
    return MollifierContext(psi, chi, params, tables, Config.get_eval_policy())


def _anchor(ctx, index: int, window):
    from siegel.zeros import scan_zero_set
    zs = scan_zero_set(ctx.psi, ctx.chi, tuple(window), policy=ctx.policy)
    if index >= len(zs.records):
        raise ValueError(f"only {len(zs.records)} zeros in window {window}")
    return zs.records[index], zs


def cmd_chars(args):
    from siegel.characters import FamilySpec, build_family
    family = build_family(FamilySpec.from_scale(args.D, args.Q))
    if args.action == "count":
        return family.summary()
    members = family.members(args.limit)
    return pd.DataFrame({
        "q": [p.modulus for p in members],
        "index": [".".join(str(k) for k in p.index_vector()) for p in members],
        "parity": [p.parity for p in members],
        "conductor": [p.conductor for p in members],
    })


def cmd_coeffs(args):
    from siegel.characters import fundamental_discriminant, kronecker_character
    from siegel.coefficients import (inverse_identity_residual, iota_table, lambda_prime_power_check,
                                     lambda_reciprocity_residual, lambda_tables, nu_table, upsilon_table)
    chi = kronecker_character(fundamental_discriminant(args.D))
    alpha = 1 / math.log(args.Q)
    if args.action == "dump":
        if args.kind == "nu":
            table = nu_table(chi, args.N)
        elif args.kind == "upsilon":
            table = upsilon_table(chi, args.N)
        elif args.kind == "iota":
            table = iota_table(chi, args.capF or math.isqrt(args.N))
        else:
            plus, minus = lambda_tables(alpha, args.N)
            table = plus if args.kind == "lambda_plus" else minus
        return pd.DataFrame({"n": np.arange(1, table.limit + 1), "value": table.values[1:]})

    plus, minus = lambda_tables(alpha, args.N)
    inverse = inverse_identity_residual(nu_table(chi, args.N), upsilon_table(chi, args.N))
    reciprocity = lambda_reciprocity_residual(plus, minus)
    powers = lambda_prime_power_check(plus, minus)
    checks = [
        {"identity": "nu_star_upsilon", "residual": inverse, "passed": inverse == 0},
        {"identity": "lambda_reciprocity", "residual": reciprocity, "passed": reciprocity < 1e-9},
        {"identity": "lambda_prime_powers", "residual": powers["identity_residual"], "passed": powers["passed"]},
    ]
    for row in checks:
        print(f"{row['identity']}: {'pass' if row['passed'] else 'FAIL'}")
    return {"identities": checks, "passed": all(r["passed"] for r in checks)}


def cmd_lfunc(args) -> dict:
    from siegel.lfunc import LEvaluator, delta1, functional_equation_residual
    if args.action == "eval":
        psi, chi = _select_psi(args)
        ev = LEvaluator(psi, policy=Config.get_eval_policy())
        s = args.s
        return {"psi": psi.label(), "s": s, "L": ev.value(s), "abs_L": abs(ev.value(s)),
                "functional_equation_residual": functional_equation_residual(ev, s),
                "delta1": delta1(psi, chi, s)}

    from siegel.characters import FamilySpec, build_family
    members = build_family(FamilySpec.from_scale(args.D, args.Q)).members()
    rng = np.random.default_rng(args.seed)
    worst = {"residual": -1.0}
    residuals = []
    for _ in range(args.trials):
        psi = members[int(rng.integers(len(members)))]
        s = complex(rng.uniform(-0.5, 1.5), rng.uniform(-10.0, 10.0))
        r = functional_equation_residual(LEvaluator(psi, policy=Config.get_eval_policy()), s)
        residuals.append(r)
        if r > worst["residual"]:
            worst = {"residual": r, "psi": psi.label(), "s": s}
    return {"trials": args.trials, "max_residual": max(residuals), "mean_residual": float(np.mean(residuals)),
            "worst": worst}


def cmd_zeros(args):
    from siegel.zeros import gap_statistics, scan_zero_set
    psi, chi = _select_psi(args)
    zs = scan_zero_set(psi, chi, args.window, step=args.step, policy=Config.get_eval_policy(),
                       workers=Config.WORKERS)
    logger.info(f"{psi.label()}: {len(zs.records)} zeros in {zs.window}, "
                f"argument principle {zs.argument_count}, mismatch {zs.mismatch}")
    if args.action == "gaps":
        alpha = RunConfig(D=args.D, Q=args.Q, R=args.R).analysis_params().alpha
        return {"psi": psi.label(), "window": list(zs.window), "count": len(zs.records),
                **gap_statistics(zs, alpha).to_dict()}
    frame = zs.to_frame()
    return frame[["gamma", "source", "simple", "gap"]]


def cmd_moll(args) -> dict:
    ctx = _context(args)
    if args.action == "upsilon":
        from siegel.mollifier import upsilon_functional
        record, _ = _anchor(ctx, args.rho_index, args.window)
        return {"psi": ctx.psi.label(), "rho": record.rho, **upsilon_functional(ctx, record.rho).to_dict()}
    from siegel.mollifier import membership_diagnostics
    report = membership_diagnostics(ctx, args.grid, refine=args.refine, workers=Config.WORKERS)
    return {"psi": ctx.psi.label(), **report.to_dict()}


def cmd_func(args) -> dict:
    from function_specs import FunctionSpecParser
    from siegel.functional import error_functionals, phi, phi_star, theta_functional
    ctx = _context(args)
    record, _ = _anchor(ctx, args.rho_index, args.window)
    rho = record.rho
    f = FunctionSpecParser(ctx.params.alpha).parse_file(args.f) if args.f else \
        FunctionSpecParser(ctx.params.alpha).parse({"type": "constant", "value": 1.0})
    theta = theta_functional(f, ctx, rho)
    return {"psi": ctx.psi.label(), "rho": rho, "phi": phi(f, ctx, rho), "phi_star": phi_star(f, ctx, rho),
            "theta": theta.to_dict(), "errors": error_functionals(ctx, rho).to_dict()}


def cmd_bvp(args) -> dict:
    from siegel.bvp import identity_report
    cfg = RunConfig(D=args.D, Q=args.Q, R=args.R, d=args.d, bump_width=args.bump_width)
    return identity_report(cfg.analysis_params(), cfg.bump_width)


def cmd_approx(args) -> dict:
    from siegel.approx import lattice_thetas, solve_h_k, thetas_from_set
    from siegel.bvp import g3
    from siegel.interval import WeightPair
    from siegel.zeros import shifted_zero_set
    cfg = RunConfig(D=args.D, Q=args.Q, R=args.R)
    params = cfg.analysis_params()
    weight = WeightPair(params.delta, params.d)
    if args.lattice is not None:
        thetas = lattice_thetas(params.alpha, args.lattice)
    else:
        ctx = _context(args)
        record, zs = _anchor(ctx, args.rho_index, args.window)
        thetas = thetas_from_set(shifted_zero_set(record, zs, zs, params))
    result = solve_h_k(thetas, params.alpha, weight, g3(params), params.R, cfg.tikhonov_scale)
    return result.to_dict()


def cmd_sieve(args) -> dict:
    from siegel.sieve_means import doubling_report, sieve_check
    if args.doubling:
        return doubling_report(args.D, tuple(args.doubling), args.trials, args.seed, workers=Config.WORKERS)
    return sieve_check(args.D, args.Q, args.trials, args.seed, workers=Config.WORKERS).to_dict()


def cmd_pipeline(args) -> dict:
    from orchestrator import SiegelPipeline
    from report import gap_histogram
    cfg = RunConfig.from_file(args.config, workers=args.workers, output_dir=args.output_dir) \
        if args.config else RunConfig(workers=args.workers or Config.WORKERS,
                                      output_dir=args.output_dir or Config.OUTPUT_DIR)
    report = asyncio.run(SiegelPipeline(cfg).run())
    if report.stages.get("family", {}).get("status") == "success":
        gap_histogram(cfg.output_dir)
    return {"status": report.status, "output_dir": report.output_dir, "skipped": report.skipped}


def cmd_report(args) -> dict:
    from report import report_summary
    table = report_summary(args.dir)
    print(table.to_string(index=False))
    failed = table[(table["kind"] != "diagnostic") & (table["passed"] == False)]  # noqa: E712
    return {"rows": len(table), "failed": failed["check"].tolist()}


def _scale_args(p, D=5, Q=20.0):
    p.add_argument("--D", type=int, default=D)
    p.add_argument("--Q", type=float, default=Q)
    p.add_argument("--R", type=float, default=10.0)


def _psi_args(p):
    p.add_argument("--q", type=int, help="modulus of ψ; defaults to the family at scale Q")
    p.add_argument("--index", type=parse_index, help="exponent vector of ψ, e.g. 1 or 1.2")
    p.add_argument("--psi-index", type=int, default=0, help="position within the selected characters")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="siegel", description="Desk lab for the Siegel-zero framework")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", help="write the result (JSON, or CSV for tables) to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chars", parents=[common])
    p.add_argument("action", choices=["list", "count"])
    _scale_args(p)
    p.add_argument("--limit", type=int)
    p.set_defaults(func=cmd_chars)

    p = sub.add_parser("coeffs", parents=[common])
    p.add_argument("action", choices=["dump", "check"])
    _scale_args(p)
    p.add_argument("--kind", choices=["nu", "upsilon", "iota", "lambda_plus", "lambda_minus"], default="nu")
    p.add_argument("--N", type=int, default=10000)
    p.add_argument("--capF", type=int, help="truncation F for iota; defaults to isqrt(N)")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("lfunc", parents=[common])
    p.add_argument("action", choices=["eval", "fe-residual"])
    _scale_args(p)
    _psi_args(p)
    p.add_argument("--s", type=parse_complex, default=complex(0.5, 14.0))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_lfunc)

    for name, actions, handler in (("zeros", ["scan", "gaps"], cmd_zeros), ("moll", ["diag", "upsilon"], cmd_moll),
                                   ("func", ["phi"], cmd_func)):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("action", choices=actions)
        _scale_args(p)
        _psi_args(p)
        p.add_argument("--window", type=parse_window, default=(0.0, 30.0))
        p.add_argument("--step", type=parse_step, default=None, help="scan step or 'auto'")
        p.add_argument("--grid", type=int, default=32)
        p.add_argument("--refine", action="store_true")
        p.add_argument("--rho-index", type=int, default=0)
        p.add_argument("--f", help="JSON function spec; defaults to the constant 1")
        p.set_defaults(func=handler)

    p = sub.add_parser("bvp", parents=[common])
    p.add_argument("action", choices=["check"])
    _scale_args(p)
    p.add_argument("--d", type=int, default=6)
    p.add_argument("--bump-width", type=float)
    p.set_defaults(func=cmd_bvp)

    p = sub.add_parser("approx", parents=[common])
    p.add_argument("action", choices=["run"])
    _scale_args(p)
    _psi_args(p)
    p.add_argument("--rho-index", type=int, default=0)
    p.add_argument("--window", type=parse_window, default=(0.0, 30.0))
    p.add_argument("--lattice", type=int, help="use the synthetic lattice with |l| <= L0 instead of zeros")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("sieve", parents=[common])
    p.add_argument("action", choices=["check"])
    _scale_args(p)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--doubling", type=float, nargs="+", help="Q values for the doubling report")
    p.set_defaults(func=cmd_sieve)

    p = sub.add_parser("pipeline", parents=[common])
    p.add_argument("action", choices=["run"])
    p.add_argument("--config", help="KEY=VALUE run configuration")
    p.add_argument("--workers", type=int)
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("report", parents=[common])
    p.add_argument("--dir", default=Config.OUTPUT_DIR)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    """Main entry point for the script."""
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {str(e)}")
        sys.exit(1)
    except Exception as e:
        logger.error(f"Error during {args.command}: {str(e)}")
        sys.exit(1)
    if isinstance(result, pd.DataFrame):
        text = result.to_csv(index=False, float_format="%.17g").rstrip("\n")
    else:
        text = dumps(result)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            f.write(text + "\n")
        logger.info(f"Report written to {args.report}")
    elif args.command != "report":
        print(text)
    return result


if __name__ == "__main__":
    main()
