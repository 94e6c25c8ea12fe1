import argparse
import json
import logging
import traceback
from collections.abc import Callable
from typing import Any

from pydantic import ValidationError

from .. import __version__
from ..core.core import Core, Outcome
from ..core.error import BudgetExceededError, ZsfError, ZsfValidationError
from ..core.groundset import GroundSpec, Sequence
from ..core.models import Budget
from ..core.transfer import TransferKind
from ..core.utils import parse_int_list, parse_params
from .models import BudgetUsage, OutputFormat, Report

LOGGER = logging.getLogger(__name__)

Handler = Callable[[Core, argparse.Namespace, Budget], Outcome]

# keys of the parsed namespace that are not inputs of the computation
_PLUMBING = {"handler", "command", "output", "debug", "budget_nodes", "budget_results"}


class ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as invalid input instead of exiting."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ZsfValidationError(f"{self.prog}: {message}")


def _polish_pydantic_error_message(pydantic_message: str) -> str:
    return "\n".join(
        line
        for line in pydantic_message.splitlines()
        if "For further information" not in line
    )


def _element(args: argparse.Namespace) -> Sequence:
    if args.element is None:
        raise ZsfValidationError(f"{args.command} needs --element")
    return Sequence.parse(args.element)


def _ground(args: argparse.Namespace) -> GroundSpec:
    if args.ground is None:
        raise ZsfValidationError(f"{args.command} needs --ground")
    return GroundSpec.parse(args.ground)


def _spec(args: argparse.Namespace) -> GroundSpec:
    if args.spec is None:
        raise ZsfValidationError(f"{args.command} needs --spec")
    return GroundSpec.parse(args.spec)


def _optional_ground(args: argparse.Namespace) -> GroundSpec | None:
    return GroundSpec.parse(args.ground) if args.ground is not None else None


def _atoms_command(core: Core, args: argparse.Namespace, budget: Budget) -> Outcome:
    return core.atoms(_optional_ground(args), budget, modulus=args.modulus)


def _factorize_command(core: Core, args: argparse.Namespace, budget: Budget) -> Outcome:
    return core.factorize(
        _element(args), _ground(args), budget, lengths_only=args.lengths_only, k=args.k
    )


def _invariants_command(core: Core, args: argparse.Namespace, budget: Budget) -> Outcome:
    which = [name.strip() for name in args.which.split(",") if name.strip()]
    return core.invariants(_element(args), _ground(args), which, budget)


def _elasticity_command(core: Core, args: argparse.Namespace, budget: Budget) -> Outcome:
    return core.elasticity(_spec(args), budget, max_length=args.max_length)


def _rhok_command(core: Core, args: argparse.Namespace, budget: Budget) -> Outcome:
    return core.rhok(_ground(args), args.k, budget)


def _transfer_command(core: Core, args: argparse.Namespace, budget: Budget) -> Outcome:
    kind = TransferKind(args.kind)
    match kind:
        case TransferKind.CYCLIC:
            if args.n is None:
                raise ZsfValidationError("transfer cyclic needs --n")
            parameter = args.n
        case TransferKind.PSI:
            if args.d is None:
                raise ZsfValidationError("transfer psi needs --d")
            parameter = args.d
        case _:
            parameter = 1
    return core.transfer(kind, _element(args), parameter, budget)


def _structure_check_command(
    core: Core, args: argparse.Namespace, budget: Budget
) -> Outcome:
    return core.structure_check(
        _spec(args), budget, cutoff=args.cutoff, max_length=args.max_length
    )


def _aamp_command(core: Core, args: argparse.Namespace, budget: Budget) -> Outcome:
    return core.aamp(
        parse_int_list(args.lengths, "lengths"),
        parse_int_list(args.deltas, "deltas"),
        args.bound,
    )


def _family_command(core: Core, args: argparse.Namespace, budget: Budget) -> Outcome:
    return core.family(args.name, parse_params(args.params or ""), budget)


def _chains_command(core: Core, args: argparse.Namespace, budget: Budget) -> Outcome:
    return core.chains(
        args.action,
        budget,
        element=Sequence.parse(args.element) if args.element is not None else None,
        ground=_optional_ground(args),
        negatives=parse_int_list(args.negatives, "negatives") if args.negatives else None,
        subsum=args.subsum,
    )


def _witness_command(core: Core, args: argparse.Namespace, budget: Budget) -> Outcome:
    return core.witness(
        args.kind,
        budget,
        spec=args.spec,
        n=args.n,
        element=Sequence.parse(args.element) if args.element is not None else None,
        ground=_optional_ground(args),
    )


def _sample_command(core: Core, args: argparse.Namespace, budget: Budget) -> Outcome:
    return core.sample(_ground(args), args.max_length, args.count, args.seed, budget)


def _common_parser() -> argparse.ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--budget-nodes", type=int, help="Search node limit.")
    common.add_argument("--budget-results", type=int, help="Stored factorization limit.")
    output = common.add_mutually_exclusive_group()
    output.add_argument(
        "--json",
        dest="output",
        action="store_const",
        const=OutputFormat.JSON,
        help="Emit the report as JSON (default).",
    )
    output.add_argument(
        "--csv",
        dest="output",
        action="store_const",
        const=OutputFormat.CSV,
        help="Emit the report as key,value rows.",
    )
    common.add_argument("--debug", action="store_true", help="Log at debug level.")
    return common


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="zsf",
        description="Factorization invariants of monoids of zero-sum sequences.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()

    def add(name: str, handler: Handler, help: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, parents=[common], help=help)
        sub.set_defaults(handler=handler)
        return sub

    sub = add("atoms", _atoms_command, "Enumerate the atoms over a finite ground set.")
    sub.add_argument("--ground", help='Finite ground set, e.g. "[-2,-1,1,2]".')
    sub.add_argument("--modulus", type=int, help="Work over Z/nZ instead.")

    sub = add("factorize", _factorize_command, "All factorizations of a zero-sum sequence.")
    sub.add_argument("--element", help='Sequence, e.g. "3^2 2^3 -2^3 -1^6".')
    sub.add_argument("--ground", help="Finite ground set.")
    sub.add_argument("--lengths-only", action="store_true")
    sub.add_argument("--k", type=int, help="Only factorizations of this length.")

    sub = add("invariants", _invariants_command, "Catenary, monotone and tame degrees.")
    sub.add_argument("--element")
    sub.add_argument("--ground")
    sub.add_argument("--which", default="c,cmon,delta", help="c,cmon,delta,tame:<atom>")

    sub = add("elasticity", _elasticity_command, "Exact elasticity of a ground spec.")
    sub.add_argument("--spec", help="JSON ground spec or integer list.")
    sub.add_argument("--max-length", type=int, help="Also bound over |B| <= N.")

    sub = add("rhok", _rhok_command, "Union of sets of lengths containing k.")
    sub.add_argument("--ground")
    sub.add_argument("--k", type=int, required=True)

    sub = add("transfer", _transfer_command, "Apply a transfer and check its fidelity.")
    sub.add_argument("kind", choices=[str(kind) for kind in TransferKind])
    sub.add_argument("--element")
    sub.add_argument("--n", type=int, help="Modulus of the cyclic transfer.")
    sub.add_argument("--d", type=int, help="Collapse modulus of the psi transfer.")

    sub = add(
        "structure-check",
        _structure_check_command,
        "Structure condition and AP check over a truncation.",
    )
    sub.add_argument("--spec")
    sub.add_argument("--cutoff", type=int)
    sub.add_argument("--max-length", type=int, default=6)

    sub = add("aamp", _aamp_command, "Recognize an almost arithmetical multiprogression.")
    sub.add_argument("--lengths", required=True)
    sub.add_argument("--deltas", required=True)
    sub.add_argument("--bound", type=int, default=0)

    sub = add("family", _family_command, "Build a named counterexample family.")
    sub.add_argument("name")
    sub.add_argument("--params", help="k=v,... e.g. d=4,e=2,k=10")

    sub = add("chains", _chains_command, "Chain constructions over Z.")
    sub.add_argument(
        "action",
        choices=["upsilon", "to-upsilon", "m2", "rel-davenport", "e-atoms", "breakapart"],
    )
    sub.add_argument("--element")
    sub.add_argument("--ground")
    sub.add_argument("--negatives", help='e.g. --negatives="-2,-1"')
    sub.add_argument("--subsum", type=int, help="Subsum L for breakapart.")

    sub = add("witness", _witness_command, "Constructive witnesses.")
    sub.add_argument("kind", choices=["tame-growth", "catenary-chain", "monotone-chain"])
    sub.add_argument("--spec", help='Two-sided spec, e.g. "Z\\{0}".')
    sub.add_argument("--n", type=int)
    sub.add_argument("--element")
    sub.add_argument("--ground")

    sub = add("sample", _sample_command, "Sets of lengths of random zero-sum elements.")
    sub.add_argument("--ground")
    sub.add_argument("--max-length", type=int, required=True)
    sub.add_argument("--count", type=int, default=10)
    sub.add_argument("--seed", type=int, default=0)

    sub = subparsers.add_parser("batch", parents=[common], help="Run a YAML/JSON manifest.")
    sub.add_argument("manifest", help="Path of the manifest file.")
    sub.set_defaults(handler=None)
    return parser


def _inputs(args: argparse.Namespace) -> dict[str, Any]:
    return {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in _PLUMBING and value is not None and value is not False
    }


def execute(core: Core, args: argparse.Namespace) -> Report:
    """Run one parsed command, turning errors into a report with an exit code."""
    report = Report(version=__version__, command=args.command, inputs=_inputs(args))
    budget: Budget | None = None
    try:
        budget = core.new_budget(args.budget_nodes, args.budget_results)
        outcome = args.handler(core, args, budget)
        report.results = outcome.results
        report.complete = outcome.complete
    except BudgetExceededError as error:
        LOGGER.warning(f"{args.command}: {error}")
        report.results = {"partial": error.data}
        report.complete = False
        report.exit_code, report.error = error.exit_code, str(error)
    except ZsfError as error:
        LOGGER.error(f"{args.command}: {error}. context: {json.dumps(error.data, default=str)}")
        report.exit_code, report.error = error.exit_code, str(error)
    except ValidationError as error:
        message = _polish_pydantic_error_message(str(error))
        LOGGER.error(f"{args.command}: {message}")
        report.exit_code, report.error = ZsfValidationError.exit_code, message
    except Exception as error:
        LOGGER.error(f"{args.command}: unknown error\n{''.join(traceback.format_exception(error))}")
        report.exit_code, report.error = ZsfError.exit_code, f"Unknown error ({error})"

    if budget is not None:
        report.budget = BudgetUsage.from_budget(budget)
    return report


def execute_argv(core: Core, argv: list[str]) -> Report:
    command = argv[0] if argv else ""
    try:
        args = build_parser().parse_args(argv)
    except ZsfValidationError as error:
        return Report(
            version=__version__,
            command=command,
            exit_code=error.exit_code,
            error=str(error),
        )
    if args.handler is None:
        return Report(
            version=__version__,
            command=command,
            exit_code=ZsfValidationError.exit_code,
            error=f"{command} cannot run inside a batch",
        )
    return execute(core, args)
