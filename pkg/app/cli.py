import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Tuple

from pydantic import BaseModel

from app import configure_logging
from app.config import get_settings, override_settings
from app.schemas import CommandConfig
from app.services.acceptance import run_acceptance_suite
from app.services.bitsets import popcount
from app.services.derived import derived_matroid, lift_by_derived, representable_rank_k_N
from app.services.fields import FieldError
from app.services.gain import (
    GainGraphError,
    build_gain_graph,
    circuit_trace,
    class_membership,
    cycle_rows,
    lift_matroid_LG,
    projective_lift,
    tilde_relation,
)
from app.services.groups import GroupError
from app.services.lab import (
    PUBLISHED_COUNTS,
    catalog_counts,
    hyperplane_family_check,
    intermediate_lift_family,
    witness_search,
)
from app.services.lifts import LinearClass, LinearClassError, brylawski, lift, satisfies_star
from app.services.matroids import (
    CapacityError,
    InvariantViolation,
    Matroid,
    MatroidError,
    circuits,
    summarize,
    verify_rank_axioms,
)
from app.services.projections import (
    dual_star_equivalence,
    duality_bridge,
    hyperplanes,
    project,
    satisfies_dual_star,
)
from app.specs import (
    SpecError,
    parse_class,
    parse_group,
    parse_representation,
    parse_spec,
    resolve_circuit_N,
    resolve_hyperplane_N,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3

# timing fields are left out of text output so reruns print identical bytes
_TIMING_KEYS = ("runtimes",)


class CliError(Exception):
    """Raised when a CLI command cannot be completed."""


def _dump(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, list):
        return [_dump(item) for item in value]
    if isinstance(value, dict):
        return {key: _dump(item) for key, item in value.items()}
    return value


def _print_output(payload: Any, as_json: bool) -> None:
    payload = _dump(payload)
    if as_json:
        print(json.dumps(payload, default=str, sort_keys=True))
        return

    if isinstance(payload, list):
        for row in payload:
            if isinstance(row, dict):
                print(" | ".join(f"{key}={value}" for key, value in row.items() if key not in _TIMING_KEYS))
        return

    if isinstance(payload, dict):
        print(" | ".join(f"{key}={value}" for key, value in payload.items() if key not in _TIMING_KEYS))
        return

    print(payload)


def _matroid_to_dict(matroid: Matroid) -> Dict[str, Any]:
    return {"name": matroid.name, "ground": matroid.size, "rank": matroid.r}


def _write_report(path: str, payload: Any) -> None:
    Path(path).write_text(json.dumps(_dump(payload), default=str, sort_keys=True, indent=2) + "\n", encoding="utf-8")


# handlers return (payload, passed)


def _handle_lift(args: argparse.Namespace) -> Tuple[Any, bool]:
    base = parse_spec(args.m)
    family = circuits(base)

    if args.action == "brylawski":
        try:
            lifted = brylawski(base, LinearClass(family, parse_class(args.linear_class, family)))
        except LinearClassError as exc:
            return exc.verdict, False
        return {**_matroid_to_dict(lifted), "circuits": circuits(lifted).as_lists()}, True

    space = resolve_circuit_N(args.n, base, family)
    if args.action == "verify-star":
        verdict = satisfies_star(base, space)
        return verdict, verdict.passed

    if args.action == "construct":
        payload: Dict[str, Any] = {}
        if not args.no_check:
            verdict = satisfies_star(base, space)
            if not verdict.passed:
                return verdict, False
            payload["star"] = verdict.detail
        lifted = lift(base, space, check=False)
        summary = summarize(lifted)
        payload.update(_matroid_to_dict(lifted), circuits=summary.circuits, table_hash=summary.table_hash)
        return payload, True

    raise CliError("Unknown lift action")


def _gain_member(args: argparse.Namespace):
    spec = args.m
    if spec == "lg":
        matroid = lift_matroid_LG(build_gain_graph(args.n, parse_group(args.group)))
        return matroid, matroid.graph
    if spec.startswith("pglift:"):
        try:
            p, j, i = (int(v) for v in spec[len("pglift:"):].split(","))
        except ValueError:
            raise SpecError(f"expected pglift:<p>,<j>,<i>, got {spec!r}") from None
        matroid = projective_lift(args.n, p, j, i)
        return matroid, matroid.graph
    return parse_spec(spec), build_gain_graph(args.n, parse_group(args.group))


def _handle_gain(args: argparse.Namespace) -> Tuple[Any, bool]:
    if args.action == "diagnose":
        matroid, graph = _gain_member(args)
        membership = class_membership(matroid, graph)
        if not membership.passed:
            return {"membership": membership}, False
        report = tilde_relation(matroid, graph)
        payload = {"name": matroid.name, "rank": matroid.r, "classes": report.classes, "verdicts": report.verdicts}
        return payload, report.passed

    if args.action == "pglift":
        lifted = projective_lift(args.n, args.p, args.j, args.i, check=not args.no_check)
        return {**_matroid_to_dict(lifted), "circuit_trace": circuit_trace(lifted, lifted.graph)}, True

    graph = build_gain_graph(args.n, parse_group(args.group))
    if args.action == "build":
        return {
            "graph": graph.name,
            "edges": graph.size,
            "cycles": len(graph.cycles),
            "balanced": popcount(graph.balanced_mask),
            "rank": graph.matroid.r,
        }, True

    if args.action == "cycles":
        return cycle_rows(graph), True

    if args.action == "lg":
        lifted = lift_matroid_LG(graph)
        return {**_matroid_to_dict(lifted), "circuit_trace": circuit_trace(lifted, graph)}, True

    raise CliError("Unknown gain action")


def _handle_derived(args: argparse.Namespace) -> Tuple[Any, bool]:
    representation = parse_representation(args.rep)

    if args.action == "compute":
        derived = derived_matroid(representation)
        return {
            **_matroid_to_dict(derived.matroid),
            "corank": representation.matroid.corank,
            "circuits": derived.family.as_lists(),
            "vectors": [list(v) for v in derived.vectors],
        }, True

    if args.action == "prop62":
        lifted = lift_by_derived(representation)
        return {**_matroid_to_dict(lifted), "free": lifted.r == lifted.size}, True

    if args.action == "trunc-n":
        space = representable_rank_k_N(representation, args.k)
        verdict = satisfies_star(representation.matroid, space)
        payload: Dict[str, Any] = {"n": space.name, "n_rank": space.r, "star": verdict}
        if verdict.passed:
            payload["lift_rank"] = lift(representation.matroid, space, check=False).r
        return payload, verdict.passed

    raise CliError("Unknown derived action")


def _handle_project(args: argparse.Namespace) -> Tuple[Any, bool]:
    base = parse_spec(args.k)
    space = resolve_hyperplane_N(args.n, hyperplanes(base))

    if args.action == "verify-star":
        verdict = satisfies_dual_star(base, space)
        equivalence = dual_star_equivalence(base, space)
        return {"dual_star": verdict, "equivalence": equivalence}, verdict.passed and equivalence.passed

    if args.action == "bridge":
        verdict = duality_bridge(base, space)
        return verdict, verdict.passed

    if args.action == "construct":
        payload: Dict[str, Any] = {}
        if not args.no_check:
            verdict = satisfies_dual_star(base, space)
            if not verdict.passed:
                return verdict, False
            payload["dual_star"] = verdict.detail
        projected = project(base, space, check=False)
        summary = summarize(projected)
        payload.update(_matroid_to_dict(projected), circuits=summary.circuits, table_hash=summary.table_hash)
        return payload, True

    raise CliError("Unknown project action")


def _handle_lab(args: argparse.Namespace) -> Tuple[Any, bool]:
    if args.action == "catalog":
        counts = catalog_counts(args.size)
        if args.rank is not None:
            counts = {args.rank: counts.get(args.rank, 0)}
        payload: Dict[str, Any] = {"size": args.size, "counts": counts}
        if args.rank is None and args.size < len(PUBLISHED_COUNTS):
            payload["published"] = PUBLISHED_COUNTS[args.size]
            return payload, sum(counts.values()) == PUBLISHED_COUNTS[args.size]
        return payload, True

    base, top = parse_spec(args.m), parse_spec(args.k)
    if args.action == "c72":
        report = witness_search(base, top)
    elif args.action == "c73":
        report = intermediate_lift_family(base, top)
    elif args.action == "dual-c82":
        report = hyperplane_family_check(top, base)
    else:
        raise CliError("Unknown lab action")
    if args.output:
        _write_report(args.output, report)
    return report, report.status != "COUNTEREXAMPLE-CANDIDATE"


def _handle_acceptance(args: argparse.Namespace) -> Tuple[Any, bool]:
    report = run_acceptance_suite(args.filter, extended=args.extended)
    if args.as_json:
        return report, report.passed
    rows: List[Dict[str, Any]] = [
        {
            "criterion": result.number,
            "name": result.name,
            "result": "PASS" if result.passed else "FAIL",
            "seconds": result.seconds,
            "detail": result.detail,
        }
        for result in report.results
    ]
    failed = sum(not result.passed for result in report.results)
    rows.append({"passed": len(report.results) - failed, "failed": failed})
    return rows, report.passed


def _handle(args: argparse.Namespace) -> bool:
    if args.command == "show":
        _print_output(summarize(parse_spec(args.m)), args.as_json)
        return True

    if args.command == "verify":
        verdict = verify_rank_axioms(parse_spec(args.m))
        _print_output(verdict, args.as_json)
        return verdict.passed

    handlers = {
        "lift": _handle_lift,
        "gain": _handle_gain,
        "derived": _handle_derived,
        "project": _handle_project,
        "lab": _handle_lab,
        "acceptance": _handle_acceptance,
    }
    if args.command not in handlers:
        raise CliError("Unknown command")
    payload, passed = handlers[args.command](args)
    _print_output(payload, args.as_json)
    return passed


def _add_json_option(command: argparse.ArgumentParser) -> None:
    command.add_argument("--json", action="store_true", dest="as_json", help="Output JSON")
    command.set_defaults(as_json=False)


def _add_common_options(command: argparse.ArgumentParser) -> None:
    _add_json_option(command)
    command.add_argument("--workers", type=int, default=None, help="Parallel shards (default from settings)")
    command.add_argument("--max-ground", type=int, default=None, help="Lower the ground-set capacity")
    command.add_argument("--seed", type=int, default=None, help="Seed for sampled axiom checks")
    command.add_argument("--verbose", action="store_true", help="Log progress to stderr")


def _add_gain_graph_options(command: argparse.ArgumentParser) -> None:
    command.add_argument("--n", type=int, default=3, help="Number of vertices")
    command.add_argument("--group", default="Z2", help="Group name (Z2, Z2xZ2, S3, ...) or Cayley table file")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liftforge",
        description="Build and verify lifts and projections of small matroids",
    )
    parser.set_defaults(as_json=False)

    subparsers = parser.add_subparsers(dest="command", required=True)

    show_parser = subparsers.add_parser("show", help="Summarize a matroid")
    show_parser.add_argument("--m", required=True, help="Matroid spec (file or inline)")
    _add_common_options(show_parser)

    verify_parser = subparsers.add_parser("verify", help="Verify matroid properties")
    verify_sub = verify_parser.add_subparsers(dest="action", required=True)
    axioms_parser = verify_sub.add_parser("axioms", help="Check the rank axioms")
    axioms_parser.add_argument("--m", required=True, help="Matroid spec")
    _add_common_options(axioms_parser)

    lift_parser = subparsers.add_parser("lift", help="Lifts by matroids on circuits")
    lift_sub = lift_parser.add_subparsers(dest="action", required=True)

    construct_parser = lift_sub.add_parser("construct", help="Build M^N")
    construct_parser.add_argument("--m", required=True, help="Matroid spec for M")
    construct_parser.add_argument("--n", required=True, help="Spec or builtin for N on the circuits of M")
    construct_parser.add_argument("--no-check", action="store_true", help="Skip the star condition")
    _add_common_options(construct_parser)

    star_parser = lift_sub.add_parser("verify-star", help="Check the star condition")
    star_parser.add_argument("--m", required=True, help="Matroid spec for M")
    star_parser.add_argument("--n", required=True, help="Spec or builtin for N")
    _add_common_options(star_parser)

    brylawski_parser = lift_sub.add_parser("brylawski", help="Elementary lift from a linear class")
    brylawski_parser.add_argument("--m", required=True, help="Matroid spec for M")
    brylawski_parser.add_argument(
        "--class", dest="linear_class", required=True, help="Circuit indices, 'all' or 'none'"
    )
    _add_common_options(brylawski_parser)

    gain_parser = subparsers.add_parser("gain", help="Group-labelled complete graphs")
    gain_sub = gain_parser.add_subparsers(dest="action", required=True)
    for action, text in (
        ("build", "Describe K_n^G"),
        ("cycles", "List cycles with their values"),
        ("lg", "Lift matroid of the balanced cycles"),
    ):
        command = gain_sub.add_parser(action, help=text)
        _add_gain_graph_options(command)
        _add_common_options(command)

    pglift_parser = gain_sub.add_parser("pglift", help="Lift from a projective geometry")
    pglift_parser.add_argument("--n", type=int, default=3, help="Number of vertices")
    pglift_parser.add_argument("--p", type=int, required=True, help="Prime")
    pglift_parser.add_argument("--j", type=int, required=True, help="Exponent of Z_p^j")
    pglift_parser.add_argument("--i", type=int, required=True, help="Rank of the lift")
    pglift_parser.add_argument("--no-check", action="store_true", help="Skip the star condition")
    _add_common_options(pglift_parser)

    diagnose_parser = gain_sub.add_parser("diagnose", help="Class membership and label classes")
    diagnose_parser.add_argument("--m", required=True, help="Matroid spec, 'lg' or 'pglift:<p>,<j>,<i>'")
    _add_gain_graph_options(diagnose_parser)
    _add_common_options(diagnose_parser)

    derived_parser = subparsers.add_parser("derived", help="Derived matroids of representations")
    derived_sub = derived_parser.add_subparsers(dest="action", required=True)
    for action, text in (("compute", "Derived matroid"), ("prop62", "Lift by the derived matroid")):
        command = derived_sub.add_parser(action, help=text)
        command.add_argument("--rep", required=True, help="Linear matroid spec")
        _add_common_options(command)
    trunc_parser = derived_sub.add_parser("trunc-n", help="Rank-k truncation of the derived matroid")
    trunc_parser.add_argument("--rep", required=True, help="Linear matroid spec")
    trunc_parser.add_argument("--k", type=int, required=True, help="Rank of N")
    _add_common_options(trunc_parser)

    project_parser = subparsers.add_parser("project", help="Projections by matroids on hyperplanes")
    project_sub = project_parser.add_subparsers(dest="action", required=True)
    for action, text in (
        ("construct", "Build K_N"),
        ("verify-star", "Check the hyperplane star condition"),
        ("bridge", "Compare K_N with the dual of a lift"),
    ):
        command = project_sub.add_parser(action, help=text)
        command.add_argument("--k", required=True, help="Matroid spec for K")
        command.add_argument("--n", required=True, help="Spec or builtin for N on the hyperplanes of K")
        if action == "construct":
            command.add_argument("--no-check", action="store_true", help="Skip the star condition")
        _add_common_options(command)

    lab_parser = subparsers.add_parser("lab", help="Brute-force evidence for open questions")
    lab_sub = lab_parser.add_subparsers(dest="action", required=True)
    for action, text in (
        ("c72", "Search N with M^N isomorphic to K"),
        ("c73", "Independence family from intermediate lifts"),
        ("dual-c82", "Hyperplane version through duality"),
    ):
        command = lab_sub.add_parser(action, help=text)
        command.add_argument("--m", required=True, help="Matroid spec for M (the smaller rank)")
        command.add_argument("--k", required=True, help="Matroid spec for K (the larger rank)")
        command.add_argument("--output", default=None, help="Also write the JSON report to this file")
        _add_common_options(command)
    catalog_parser = lab_sub.add_parser("catalog", help="Count labelled matroids")
    catalog_parser.add_argument("--size", type=int, required=True, help="Ground set size")
    catalog_parser.add_argument("--rank", type=int, default=None, help="Only this rank")
    _add_common_options(catalog_parser)

    acceptance_parser = subparsers.add_parser("acceptance", help="Run the acceptance suite")
    acceptance_parser.add_argument("--filter", default=None, help="Only criteria with this tag")
    acceptance_parser.add_argument("--extended", action="store_true", help="Include the larger instances")
    _add_common_options(acceptance_parser)

    return parser


def _command_config(args: argparse.Namespace) -> CommandConfig:
    inputs = {key: getattr(args, key, None) for key in ("m", "k", "n", "rep", "group", "output")}
    return CommandConfig(
        path=[args.command] + ([args.action] if getattr(args, "action", None) else []),
        inputs={key: str(value) for key, value in inputs.items() if value is not None},
        overrides={"workers": args.workers, "max_ground": args.max_ground},
        as_json=args.as_json,
        seed=args.seed if args.seed is not None else get_settings().seed,
    )


def main(argv: List[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    get_settings.cache_clear()
    settings = get_settings()
    configure_logging("INFO" if args.verbose else settings.log_level)
    config = _command_config(args)
    override_settings(seed=config.seed, **config.overrides)
    logger.info("running %s", " ".join(config.path))

    try:
        return EXIT_OK if _handle(args) else EXIT_FAILED
    except CapacityError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (SpecError, MatroidError, FieldError, GroupError, GainGraphError, CliError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
