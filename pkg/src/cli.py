"""
Command line surface: ``bandrmt <subcommand> [flags]``.

Tables go to stdout (or to ``--out``/<name>.<format> with a manifest beside
them); logs go to stderr. Exit codes: 0 success, 1 usage, 2 enumeration cap,
3 counting budget, 4 numeric or I/O failure, 5 subordination convergence.
"""
import argparse
import os
import sys
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import pandas as pd
import yaml

from src import __version__
from src.components.combinat import enumerate_pair_partitions, genus, is_noncrossing
from src.components.freeharm import atoms, rademacher, semicircle, wigner_nu
from src.components.moments import exact_trace_moment, infinitesimal_correction_limit
from src.components.quotient import build_quotient, is_double_tree
from src.components.rmtsim import ensemble_for, resolve_preset, qq_pairs
from src.constants import *
from src.entity.config_entity import BandGeometry, ConvolutionConfig, GridSpec, SimulationConfig
from src.entity.measure import Measure, PerturbationSpec, WignerMomentParams
from src.exception import BandRMTException, ConvergenceError, DomainError
from src.logger import logging
from src.pipline.convolution_pipeline import ConvolutionPipeline
from src.pipline.simulation_pipeline import SimulationPipeline
from src.utils.main_utils import dumps_csv, dumps_json, utc_timestamp, write_json_file


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# measure specs
# ---------------------------------------------------------------------------

def _floats(text: str, count: Optional[int] = None) -> List[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise DomainError(f"cannot read numbers from {text!r}", sys) from e
    if count is not None and len(values) != count:
        raise DomainError(f"expected {count} comma-separated numbers, got {text!r}", sys)
    return values


def _atom_pairs(body: str) -> List[Sequence[float]]:
    body = body.strip()
    if body.startswith("{"):
        try:
            mapping = yaml.safe_load(body)
        except yaml.YAMLError as e:
            raise DomainError(f"cannot read atom mapping {body!r}", sys) from e
        if not isinstance(mapping, dict):
            raise DomainError(f"atom mapping {body!r} is not a mapping", sys)
        try:
            return [(float(loc), float(w)) for loc, w in mapping.items()]
        except (TypeError, ValueError) as e:
            raise DomainError(f"non-numeric atom in {body!r}", sys) from e

    pairs = []
    for item in body.split(","):
        loc, sep, weight = item.partition("/")
        if not sep:
            raise DomainError(f"atom {item!r} is not of the form location/weight", sys)
        try:
            pairs.append((float(loc), float(weight)))
        except ValueError as e:
            raise DomainError(f"non-numeric atom {item!r}", sys) from e
    return pairs


def parse_measure(text: str) -> Measure:
    """
    Measure spec strings: ``semicircle[:sigma]``, ``rademacher``,
    ``atoms:loc/weight,...`` or ``atoms:{loc: weight, ...}`` and
    ``wigner-nu:beta,sigma2,s2,alpha`` (an infinitesimal law).
    """
    name, _, body = text.strip().partition(":")
    name = name.lower()
    if name == "semicircle":
        return semicircle(_floats(body, 1)[0] if body else 1.0)
    if name == "rademacher" and not body:
        return rademacher()
    if name == "atoms":
        return atoms(_atom_pairs(body))
    if name == "wigner-nu":
        beta, sigma2, s2, alpha = _floats(body, 4)
        if beta not in (1.0, 2.0):
            raise DomainError(f"beta must be 1 or 2, got {beta}", sys)
        return wigner_nu(WignerMomentParams(beta=int(beta), sigma2=sigma2, s2=s2, alpha=alpha))
    raise DomainError(f"unrecognised measure spec {text!r}", sys)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _config_echo(args: argparse.Namespace) -> Dict:
    return {k: v for k, v in vars(args).items() if k != "handler"}


def _emit(args: argparse.Namespace, name: str, frame: pd.DataFrame, extra: Optional[Dict] = None) -> None:
    if args.format == "json":
        text = dumps_json(dict(extra or {}, rows=frame.to_dict(orient="records"))) + "\n"
    else:
        text = dumps_csv(frame)

    if args.out is None:
        sys.stdout.write(text)
        return
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{name}.{args.format}")
    with open(path, "w", encoding="utf-8", newline="\n") as file_obj:
        file_obj.write(text)
    write_json_file(os.path.join(args.out, MANIFEST_FILE_NAME),
                    {"config": _config_echo(args), "version": __version__, "timestamp": utc_timestamp()})
    logging.info(f"Wrote {path}")


def _grid(args: argparse.Namespace) -> GridSpec:
    ladder = SUBORDINATION_ETA_LADDER if args.eta is None else (4.0 * args.eta, 2.0 * args.eta, args.eta)
    return GridSpec(lo=args.grid_lo, hi=args.grid_hi, n=args.grid_n, eta_ladder=ladder)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_partitions(args: argparse.Namespace) -> None:
    rows = []
    for pp in enumerate_pair_partitions(args.ell, max_ell=args.max_ell):
        profile = genus(pp)
        if args.genus is not None and profile.genus != args.genus:
            continue
        rows.append({
            "partition": str(pp),
            "cycle_count": profile.cycle_count,
            "genus": profile.genus,
            "is_noncrossing": is_noncrossing(pp),
            "is_double_tree": is_double_tree(build_quotient(pp)),
        })
    columns = ["partition", "cycle_count", "genus", "is_noncrossing", "is_double_tree"]
    _emit(args, "partitions", pd.DataFrame(rows, columns=columns))


def cmd_moments(args: argparse.Namespace) -> None:
    geom = _geometry(args)
    rows = []
    for ell in args.ell:
        result = exact_trace_moment(ell, geom, args.sigma2, max_ell=args.max_ell, workers=args.threads)
        rows.append({
            "ell": ell, "N": geom.N, "b": geom.b, "mode": geom.mode, "sigma2": float(args.sigma2),
            "exact": result.exact_float,
            "catalan_term": float(result.catalan_term),
            "correction": result.correction_float,
            "exact_fraction": str(result.exact_value),
            "correction_fraction": str(result.correction),
        })
    _emit(args, "moments", pd.DataFrame(rows))


def _geometry(args: argparse.Namespace) -> BandGeometry:
    return BandGeometry(N=args.N, b=args.b, mode=args.mode)


def cmd_limit(args: argparse.Namespace) -> None:
    limit = infinitesimal_correction_limit(args.ell, args.c, args.sigma2, samples=args.samples,
                                           seed=args.seed, max_ell=args.max_ell, workers=args.threads)
    if args.per_partition:
        frame = pd.DataFrame([{
            "partition": item.partition,
            "is_tree": item.is_tree,
            "integral": item.integral.mean,
            "integral_stderr": item.integral.stderr,
            "contribution": item.contribution,
        } for item in limit.contributions],
            columns=["partition", "is_tree", "integral", "integral_stderr", "contribution"])
        _emit(args, "limit_partitions", frame)
        return
    frame = pd.DataFrame([{
        "ell": limit.ell, "c": limit.c, "sigma2": limit.sigma2,
        "value": limit.value, "stderr": limit.stderr, "genus_one_count": limit.genus_one_count,
    }])
    _emit(args, "limit", frame)


def cmd_simulate(args: argparse.Namespace) -> None:
    if args.preset:
        base, kind = resolve_preset(args.preset, args.config)
        defaults = {"N": base.N, "b": base.band.b, "mode": base.band.mode, "sigma2": base.sigma2,
                    "theta": base.theta, "kind": kind, "seed": base.seed, "reps": base.reps}
    else:
        N = args.N or SIMULATION_DESK_N
        defaults = {"N": N, "b": N // 2, "mode": PERIODIC_MODE, "sigma2": SIMULATION_DEFAULT_SIGMA2,
                    "theta": SIMULATION_DEFAULT_THETA, "kind": 1, "seed": SIMULATION_DEFAULT_SEED,
                    "reps": SIMULATION_DEFAULT_REPS}
    resolved = {key: getattr(args, key) if getattr(args, key) is not None else value
                for key, value in defaults.items()}

    spec = ensemble_for(**resolved)
    config = SimulationConfig(kind=resolved["kind"], threads=args.threads, preset=args.preset)
    if args.out is not None:
        config.artifact_dir = args.out
    artifact = SimulationPipeline(spec, config).run_pipeline()
    summary = artifact.summary
    sys.stdout.write(dumps_json({
        "mean": summary.mean,
        "variance": summary.variance,
        "ks_distance": summary.ks_distance,
        "lambda1_mean": summary.lambda1_mean,
        "realizations": artifact.realizations_file_path,
        "histogram": artifact.histogram_file_path,
        "manifest": artifact.manifest_file_path,
    }) + "\n")


def _convolution_config(args: argparse.Namespace) -> ConvolutionConfig:
    config = ConvolutionConfig(grid=_grid(args), threads=args.threads)
    if args.out is not None:
        config.artifact_dir = args.out
    return config


def _report(artifact) -> None:
    sys.stdout.write(dumps_json({
        "atoms": artifact.atoms,
        "nu_atoms": artifact.nu_atoms,
        "max_residual": artifact.max_residual,
        "density": artifact.density_file_path,
        "manifest": artifact.manifest_file_path,
    }) + "\n")


def cmd_convolve(args: argparse.Namespace) -> None:
    mu1, mu2 = parse_measure(args.mu1), parse_measure(args.mu2)
    pipeline = ConvolutionPipeline(_convolution_config(args))
    _report(pipeline.start_free_convolution(mu1, mu2, echo=_config_echo(args)))


def cmd_typeb(args: argparse.Namespace) -> None:
    mu = parse_measure(args.mu)
    if not args.theta:
        raise DomainError("typeb needs at least one --theta", sys)
    if args.kind == 2:
        if len(args.theta) != 1:
            raise DomainError("a delocalized perturbation takes a single --theta", sys)
        pert = PerturbationSpec(delocalized_theta=args.theta[0])
    else:
        pert = PerturbationSpec(thetas=tuple(args.theta))

    base_nu_kwargs = {}
    if args.base_nu is not None:
        base_nu = parse_measure(args.base_nu)
        if not base_nu.signed:
            raise DomainError(f"--base-nu must be an infinitesimal law, got {args.base_nu!r}", sys)
        base_nu_kwargs["base_nu"] = base_nu

    pipeline = ConvolutionPipeline(_convolution_config(args))
    _report(pipeline.start_typeB(mu, pert, echo=_config_echo(args), **base_nu_kwargs))


def cmd_qq(args: argparse.Namespace) -> None:
    try:
        sample = pd.read_csv(args.sample)[args.column]
        baseline = pd.read_csv(args.baseline)[args.column]
    except KeyError as e:
        raise DomainError(f"column {args.column!r} missing from the realization files", sys) from e
    except OSError as e:
        raise BandRMTException(e, sys) from e
    _emit(args, "qq", qq_pairs(sample.to_numpy(), baseline.to_numpy()))


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help="output directory (stdout when omitted)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--max-ell", type=int, default=ENUMERATION_MAX_ELL, dest="max_ell")


def _grid_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid-lo", type=float, default=DEFAULT_GRID_LO, dest="grid_lo")
    parser.add_argument("--grid-hi", type=float, default=DEFAULT_GRID_HI, dest="grid_hi")
    parser.add_argument("--grid-n", type=int, default=DEFAULT_GRID_N, dest="grid_n")
    parser.add_argument("--eta", type=float, default=None,
                        help="finest rung of the eta ladder (4 eta, 2 eta, eta)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bandrmt", description="Banded GUE moments, free convolutions and outliers")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partitions", help="pair partitions of [2 ell] with genus and quotient shape")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--genus", type=int, default=None, help="keep only this genus")
    _common(p)
    p.set_defaults(handler=cmd_partitions)

    p = sub.add_parser("moments", help="exact E[Tr X^(2 ell)] of the banded GUE")
    p.add_argument("--ell", type=int, nargs="+", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--mode", choices=BAND_MODES, default=PERIODIC_MODE)
    p.add_argument("--sigma2", type=Fraction, default=Fraction(1))
    _common(p)
    p.set_defaults(handler=cmd_moments)

    p = sub.add_parser("limit", help="critical-regime limit m_2l(sigma2, c)")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=INTEGRAL_DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=INTEGRAL_DEFAULT_SEED)
    p.add_argument("--per-partition", action="store_true", dest="per_partition")
    _common(p)
    p.set_defaults(handler=cmd_limit)

    p = sub.add_parser("simulate", help="Monte Carlo of the normalised largest eigenvalue")
    p.add_argument("--preset", default=None)
    p.add_argument("--config", default=EXPERIMENT_CONFIG_FILE_PATH)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--b", type=int, default=None)
    p.add_argument("--mode", choices=BAND_MODES, default=None)
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--kind", type=int, choices=(1, 2), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    _common(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("convolve", help="free additive convolution of two measures")
    p.add_argument("mu1")
    p.add_argument("mu2")
    _grid_flags(p)
    _common(p)
    p.set_defaults(handler=cmd_convolve)

    p = sub.add_parser("typeb", help="type B law of a measure deformed by finite-rank perturbations")
    p.add_argument("mu")
    p.add_argument("--theta", type=float, action="append", default=[])
    p.add_argument("--kind", type=int, choices=(1, 2), default=1)
    p.add_argument("--base-nu", default=None, dest="base_nu")
    _grid_flags(p)
    _common(p)
    p.set_defaults(handler=cmd_typeb)

    p = sub.add_parser("qq", help="quantile pairs of two realization files")
    p.add_argument("sample")
    p.add_argument("baseline")
    p.add_argument("--column", default="F")
    _common(p)
    p.set_defaults(handler=cmd_qq)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        args.handler(args)
    except ConvergenceError as e:
        sys.stderr.write(f"bandrmt: {e.args[0]}\n")
        for point in e.points:
            sys.stderr.write(f"  {point}\n")
        return e.exit_code
    except BandRMTException as e:
        sys.stderr.write(f"bandrmt: {e.args[0]}\n")
        return e.exit_code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
