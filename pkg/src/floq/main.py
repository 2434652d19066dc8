import sys
import json
import logging
import argparse
from pathlib import Path
from typing import Any, Dict, List, Optional

from floq.config import *
from floq.errors import *
from floq.floquet import *
from floq.grobner import *
from floq.lattice import *
from floq.logger import *
from floq.output import *
from floq.polycore import GaussianRational
from floq.solver import *
from floq.symmetry import *


__all__ = ["main"]


script_name = "floq"
config: RunConfig
log: Optional[logging.Logger] = None
z_mode = ZMode.ONE

SUMMARY_FIELDS = ["n", "variant", "mult_at_zero", "mult_nonzero", "unique", "unique_mod_dihedral", "unique_mod_all",
                  "orbits_with_origin", "singular_mod_dihedral", "singular_mod_all", "conjecture2_count",
                  "pattern_matches", "stable"]
FIGURE_FIELDS = ["point_id", "coordinate", "re", "im", "multiplicity"]


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="Seed of every random choice")
    common.add_argument("--cluster-tol", type=float, default=1e-6, help="Identification radius of regular points")
    common.add_argument("--residual-tol", type=float, default=1e-8, help="Residual accepted for a regular point")
    common.add_argument("--merge-tol", type=float, default=1e-2, help="Grouping radius of singular clusters")
    common.add_argument("--output", type=str, default="", help="Write the artifact to this file instead of stdout")
    common.add_argument("--format", type=str, choices=FORMATS, default=None, help="Artifact format")
    common.add_argument("--threads", type=int, default=None, help="Worker cap (default: FLOQ_THREADS or CPU count)")
    common.add_argument("--basis-ceiling", type=int, default=DEFAULT_CEILING, help="Largest quotient basis to solve")
    common.add_argument("--debug", action="store_true", help="Enable debug mode", default=False)
    common.add_argument("--log-file", type=str, default="", help="Also log to this file")

    period = argparse.ArgumentParser(add_help=False)
    period.add_argument("--n", type=int, required=True, help="Period of the potential")
    period.add_argument("--variant", type=str, choices=VARIANTS, default="full", help="Invariant system")
    period.add_argument("--potential", type=str, default="", help="V' file of the extended variant (default: 1..n)")

    parser = argparse.ArgumentParser(prog=script_name, description="Floquet isospectrality of periodic potentials")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invariants", parents=[common, period], help="Dump the spectral invariants")
    p.add_argument("--z", type=str, choices=[m.value for m in ZMode], default=ZMode.ONE.value,
                   help="Floquet parameter: fixed to 1 or kept symbolic")
    sub.add_parser("groebner", parents=[common, period], help="Dump the closed-form Groebner basis")
    p = sub.add_parser("solve", parents=[common, period], help="Solve for every potential isospectral to 0")
    p.add_argument("--check-stability", action="store_true", default=False, help="Rerun with the next seed")
    sub.add_parser("figures", parents=[common, period], help="Coordinates of the nonzero solutions as CSV")
    p = sub.add_parser("hilbert", parents=[common, period], help="Affine Hilbert function value")
    p.add_argument("--s", type=int, required=True, help="Degree bound")

    p = sub.add_parser("verify", parents=[common], help="Check a potential file for isospectrality to 0")
    p.add_argument("--potential", type=str, required=True, help="Potential file")
    p.add_argument("--n", type=int, default=None, help="Expected period")
    p.add_argument("--exact", action="store_true", default=False, help="Gaussian-rational arithmetic")
    p.add_argument("--tol", type=float, default=1e-8, help="Tolerance of the numeric check")

    p = sub.add_parser("orbit", parents=[common], help="Symmetry orbit of a potential file")
    p.add_argument("--potential", type=str, required=True, help="Potential file")
    p.add_argument("--group", type=str, choices=["dihedral", "full"], default="full", help="Symmetry group")

    p = sub.add_parser("lattice", parents=[common], help="Rigidity of two-dimensional lattices")
    p.add_argument("action", type=str, choices=["rigidity", "sweep"], help="Single lattice or sweep")
    p.add_argument("--gens", type=str, default=None, help="Generators as 'a b; c d'")
    p.add_argument("--samples", type=int, default=3, help="Extra torus samples")
    p.add_argument("--tol", type=float, default=1e-6, help="Residual accepted at the extra samples")
    p.add_argument("--max-index", type=int, default=6, help="Largest index of the sweep")
    p.add_argument("--gcd-bound", type=int, default=3, help="Bound on gcd(a, b) and c of the sweep")
    return parser


def init(argv: List[str]) -> None:
    """
    Parse the command line, set up logging and build the run configuration.

    :param argv: Command-line arguments without the program name.
    :type argv: List[str]
    :raises SystemExit: with status 2 on a usage error.
    :raises ValueError: if the arguments fail validation.
    :return: None
    """
    global config, log, z_mode
    args, _unknown = _parser().parse_known_args(argv)
    setup_logging(args.debug, args.log_file or None, args.command)
    log = logging.getLogger(script_name)
    log.debug(f"Args: {args.__dict__}" + (f" Unknown args: {_unknown}" if _unknown else ""))

    default_format = "csv" if args.command == "figures" else "json"
    potential = getattr(args, "potential", "")
    config = RunConfig(
        command=args.command,
        n=getattr(args, "n", None),
        variant=getattr(args, "variant", "full"),
        seed=args.seed,
        cluster_tol=args.cluster_tol,
        residual_tol=args.residual_tol,
        merge_tol=args.merge_tol,
        output=Path(args.output) if args.output else None,
        format=args.format or default_format,
        s=getattr(args, "s", None),
        potential=Path(potential) if potential else None,
        exact=getattr(args, "exact", False),
        tol=getattr(args, "tol", 1e-6),
        group=getattr(args, "group", "full"),
        gens=getattr(args, "gens", None),
        samples=getattr(args, "samples", 3),
        check_stability=getattr(args, "check_stability", False),
        basis_ceiling=args.basis_ceiling,
        threads=args.threads,
        lattice_action=getattr(args, "action", "rigidity"),
        max_index=getattr(args, "max_index", 6),
        gcd_bound=getattr(args, "gcd_bound", 3),
        debug=args.debug,
        log_file=Path(args.log_file) if args.log_file else None,
    )
    z_mode = ZMode(getattr(args, "z", ZMode.ONE.value))


# ----------------------------------------------------------------------------------------------------------------------
# HELPERS
# ----------------------------------------------------------------------------------------------------------------------


def _emit(data: Any, rows: Optional[List[Dict[str, Any]]] = None, fields: Optional[List[str]] = None,
          text: Optional[str] = None) -> str:
    if config.format == "csv" and rows is not None:
        content = to_csv(rows, fields)
    elif config.format == "text" and text is not None:
        content = text + "\n"
    else:
        content = to_json(data)
    with AtomicOutput(config.output) as out:
        out.write(content)
    log.debug(f"Artifact sha256: {digest(content)}" + (f" ({config.output})" if config.output else ""))
    return content


def _exact_point(values: List[Any]) -> List[Any]:
    """Drop the imaginary parts of a Gaussian-rational point that is real."""
    if all(isinstance(x, GaussianRational) and x.im == 0 for x in values):
        return [x.re.numerator if x.re.denominator == 1 else x.re for x in values]
    return values


def _system() -> InvariantSystem:
    if config.variant == "specialized":
        return specialized_invariants(config.n)
    if config.variant == "extended":
        if config.potential is None:
            log.debug(f"No V' file given, using V' = (1, ..., {config.n})")
            return extended_invariants(config.n, list(range(1, config.n + 1)))
        n, values = load_potential(config.potential)
        if n != config.n:
            raise DimensionError(f"V' file has n={n}, expected n={config.n}")
        return extended_invariants(config.n, _exact_point(values))
    return spectral_invariants(config.n, z_mode)


def _solve() -> SolutionSet:
    system = _system()
    G = groebner_generators(system)
    log.info(f"Closed-form basis ready: {len(G.basis)} standard monomials ({G.sign_convention} combination)")
    return solve_variety(G, seed=config.seed, cluster_tol=config.cluster_tol, residual_tol=config.residual_tol,
                         merge_tol=config.merge_tol, check_stability=config.check_stability,
                         threads=resolve_threads(config.threads), ceiling=config.basis_ceiling)


# ----------------------------------------------------------------------------------------------------------------------
# COMMANDS
# ----------------------------------------------------------------------------------------------------------------------


def _invariants() -> None:
    system = _system()
    names = {Variant.FULL: "p", Variant.SPECIALIZED: "p'", Variant.EXTENDED: "h"}[system.variant]
    generators = [g.to_text() for g in system.generators]
    _emit({"n": system.n, "variant": system.variant.value, "variables": list(system.variables),
           "generators": generators, "terms": [len(g.terms) for g in system.generators]},
          text="\n".join(f"{names}_{k} = {g}" for k, g in enumerate(generators, start=1)))
    log.critical(f"{len(generators)} invariants in {len(system.variables)} variables")


def _groebner() -> None:
    G = groebner_generators(_system())
    positions = [G.table.index(v) for v in G.source.unknowns]
    slope, constant = hilbert_polynomial(G)
    _emit({
        "n": G.n,
        "variant": G.variant.value,
        "sign_convention": G.sign_convention,
        "generators": [g.to_text() for g in G.generators],
        "leading_terms": G.lt_list,
        "basis_variables": list(G.source.unknowns),
        "basis": [[b[i] for i in positions] for b in G.basis],
        "basis_size": len(G.basis),
        "hilbert_polynomial": [slope, constant],
    }, text="\n".join(f"g_{k} = {g.to_text()}" for k, g in enumerate(G.generators, start=1)))
    log.critical(f"Groebner basis verified: leading terms {', '.join(G.lt_list)}; |B| = {len(G.basis)}")


def _solve_command() -> None:
    S = _solve()
    summary = summarize(S)
    total = sum(p.multiplicity for p in S.points)
    if total != S.basis_size:
        log.warning(f"Multiplicities sum to {total}, quotient dimension is {S.basis_size}")
    row = summary.to_dict()
    _emit(solution_to_dict(S, summary), rows=[row], fields=SUMMARY_FIELDS,
          text=" ".join(f"{k}={row[k]}" for k in SUMMARY_FIELDS))
    log.critical(f"n={S.n} {S.variant.value}: {summary.unique} points, multiplicity at 0 = {summary.mult_at_zero}, "
                 f"profile {summary.mult_counts}")


def _figures() -> None:
    S = _solve()
    rows = figure_rows(S)
    _emit({"n": S.n, "variant": S.variant.value, "rows": rows}, rows=rows, fields=FIGURE_FIELDS)
    if config.output and config.format == "csv":
        for point_id in sorted({r["point_id"] for r in rows}):
            path = config.output.with_name(f"{config.output.stem}.point{point_id}{config.output.suffix}")
            with AtomicOutput(path) as out:
                out.write(to_csv([r for r in rows if r["point_id"] == point_id], FIGURE_FIELDS))
    log.critical(f"{len(rows)} nonzero coordinate values from {len(S.nonzero())} points")


def _hilbert() -> None:
    G = groebner_generators(_system())
    value = hilbert_function(G, config.s)
    slope, constant = hilbert_polynomial(G)
    _emit({"n": G.n, "variant": G.variant.value, "s": config.s, "value": value, "polynomial": [slope, constant]},
          text=str(value))
    log.critical(f"HF({config.s}) = {value}; Hilbert polynomial {slope}*s + {constant}")


def _load() -> List[Any]:
    n, values = load_potential(config.potential)
    if config.n is not None and n != config.n:
        raise DimensionError(f"potential file has n={n}, expected n={config.n}")
    return values


def _verify() -> None:
    values = _load()
    mode = VerifyMode.EXACT if config.exact else VerifyMode.NUMERIC
    report = verify_isospectral(len(values), values, mode, config.tol)
    residuals = [exact_text(r) if mode is VerifyMode.EXACT else r for r in report.residuals]
    _emit({"n": len(values), "mode": mode.value, "isospectral": report.isospectral, "residuals": residuals,
           "max_residual": report.max_residual, "tol": report.tol},
          text=f"isospectral={str(report.isospectral).lower()} max_residual={report.max_residual}")
    log.critical(f"Isospectral to 0: {report.isospectral} (max residual {report.max_residual})")


def _orbit() -> None:
    values = _load()
    kind = GroupKind(config.group)
    exact = all(isinstance(x, GaussianRational) for x in values)
    tol = None if exact else config.cluster_tol
    elements = orbit_elements(values, kind, tol)
    images = [apply(g, values) for g in elements]
    canonical = canonicalize(values, kind, tol)
    _emit({"n": len(values), "group": kind.value, "size": len(images),
           "elements": [g.describe() for g in elements],
           "canonical": dump_potential(canonical)["values"],
           "orbit": [dump_potential(image)["values"] for image in images]},
          text="\n".join(" ".join(str(x) for x in image) for image in images))
    log.critical(f"Orbit under the {kind.value} group: {len(images)} distinct potentials")


def _lattice() -> None:
    threads = resolve_threads(config.threads)
    if config.lattice_action == "rigidity":
        L = hermite_and_cosets(parse_generators(config.gens))
        verdict = rigidity_check(L, seed=config.seed, tol=config.tol, extra_samples=config.samples,
                                 ceiling=config.basis_ceiling, threads=threads)
        _emit(verdict.to_dict(), text=f"{L.hnf} {verdict.verdict}")
        log.critical(f"Lattice {L.hnf} (index {L.index}): {verdict.verdict}")
        return
    verdicts = []
    for L in enumerate_hnf(config.max_index, config.gcd_bound):
        verdicts.append(rigidity_check(L, seed=config.seed, tol=config.tol, extra_samples=config.samples,
                                       ceiling=config.basis_ceiling, threads=threads))
    _emit({"lattices": [v.to_dict() for v in verdicts]},
          rows=[{"a": v.lattice.a, "b": v.lattice.b, "c": v.lattice.c, "index": v.lattice.index,
                 "verdict": v.verdict, "survivors": len(v.survivors)} for v in verdicts],
          fields=["a", "b", "c", "index", "verdict", "survivors"],
          text="\n".join(f"{v.lattice.hnf} {v.verdict}" for v in verdicts))
    rigid = sum(1 for v in verdicts if v.verdict == "rigid")
    log.critical(f"{rigid} of {len(verdicts)} lattices rigid")


COMMAND_HANDLERS = {
    "invariants": _invariants,
    "groebner": _groebner,
    "solve": _solve_command,
    "figures": _figures,
    "hilbert": _hilbert,
    "verify": _verify,
    "orbit": _orbit,
    "lattice": _lattice,
}


def run() -> None:
    """
    Execute the configured command and write its artifact.

    :raises FloqError: on any computation failure.
    :return: None
    """
    log.info(f"Running {config.command}" + (f" for n={config.n} ({config.variant})" if config.n else ""))
    COMMAND_HANDLERS[config.command]()
    log.info("Process completed successfully")


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of the ``floq`` command.

    Failures print ``{"error": <class>, "message": <text>}`` on stdout and
    give exit status 1; usage errors exit with status 2 from argparse.

    :return: Exit status.
    """
    try:
        init(sys.argv[1:] if argv is None else argv)
        run()
    except Exception as e:
        if log:
            log.error(f"{e}")
        print(json.dumps({"error": type(e).__name__, "message": str(e)}, sort_keys=True))
        return 1
    return 0
