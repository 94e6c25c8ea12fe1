import logging
import sys

from ..core.core import Core
from ..core.error import ZsfValidationError
from ..settings import Settings, get_settings
from .batch import run_batch
from .commands import build_parser, execute
from .models import OutputFormat

LOGGER = logging.getLogger(__name__)


def setup_logging(settings: Settings) -> None:
    level = logging.DEBUG if settings.debug else logging.INFO

    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        # this adds the file and line number, quite useful
        format="[%(asctime)s] p%(process)s:t%(thread)d %(pathname)s:%(lineno)d:%(funcName)s %(levelname)s - %(message)s",
    )
    # basicConfig only applies the level the first time it runs
    logging.root.setLevel(level=level)
    LOGGER.debug("Got settings: %r", settings)


def run(argv: list[str] | None = None, settings: Settings | None = None) -> int:
    """Parse, compute, print the report on stdout and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
    except ZsfValidationError as error:
        print(str(error), file=sys.stderr)
        return error.exit_code

    if not settings:
        settings = get_settings()
    if args.debug:
        settings = settings.model_copy(update={"debug": True})
    setup_logging(settings)
    core = Core(settings=settings)

    if args.command == "batch":
        report = run_batch(core, args.manifest)
    else:
        report = execute(core, args)

    if report.error:
        print(report.error, file=sys.stderr)
    print(report.render(args.output or OutputFormat.JSON))
    return report.exit_code


def main() -> int:
    return run(sys.argv[1:])
