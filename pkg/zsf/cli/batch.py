import logging
from functools import partial
from pathlib import Path
from typing import Any

import anyio
import yaml
from anyio import to_thread

from .. import __version__
from ..core.core import Core
from ..core.error import ZsfError, ZsfParsingError, ZsfValidationError
from .commands import execute_argv
from .models import Report

LOGGER = logging.getLogger(__name__)

# subcommands taking a positional argument, and the job key that holds it
POSITIONALS = {
    "transfer": "kind",
    "family": "name",
    "chains": "action",
    "witness": "kind",
    "batch": "manifest",
}


def load_manifest(path: str | Path) -> list[dict[str, Any]]:
    """Jobs of a YAML or JSON manifest: a list, or a mapping with a `jobs` list."""
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as error:
        raise ZsfValidationError(f"Unable to read manifest {path}: {error}")
    except yaml.YAMLError as error:
        raise ZsfParsingError(f'Unable to parse manifest "{path}": {error}')

    if data is None:
        return []
    if isinstance(data, dict):
        data = data.get("jobs") or []
    if not isinstance(data, list):
        raise ZsfParsingError(f'Unable to parse manifest "{path}": expected a list of jobs')
    return data


def _value(value: Any) -> str:
    if isinstance(value, dict):
        return ",".join(f"{key}={item}" for key, item in value.items())
    if isinstance(value, list):
        return ",".join(str(item) for item in value)
    return str(value)


def job_argv(job: Any) -> list[str]:
    """Command line equivalent of a manifest job.

    >>> job_argv({"command": "rhok", "ground": "[-1,1]", "k": 2})
    ['rhok', '--ground=[-1,1]', '--k=2']
    """
    if not isinstance(job, dict) or "command" not in job:
        raise ZsfValidationError(f"Job {job!r} has no command")

    options = dict(job)
    command = str(options.pop("command"))
    argv = [command]
    positional = POSITIONALS.get(command)
    if positional and positional in options:
        argv.append(_value(options.pop(positional)))

    for key, value in options.items():
        flag = "--" + str(key).replace("_", "-")
        if value is True:
            argv.append(flag)
        elif value is not None and value is not False:
            # the = form keeps values like "-2,-1" from reading as flags
            argv.append(f"{flag}={_value(value)}")
    return argv


def _run_job(core: Core, index: int, job: Any) -> Report:
    try:
        argv = job_argv(job)
    except ZsfError as error:
        return Report(
            version=__version__, command="", exit_code=error.exit_code, error=str(error)
        )
    LOGGER.debug(f"Batch job {index}: {argv}")
    return execute_argv(core, argv)


async def _run_jobs(core: Core, jobs: list[Any]) -> list[Report]:
    reports: list[Report | None] = [None] * len(jobs)
    limiter = anyio.CapacityLimiter(core.settings.batch_concurrency)

    async def run_one(index: int, job: Any) -> None:
        reports[index] = await to_thread.run_sync(
            partial(_run_job, core, index, job), limiter=limiter
        )

    async with anyio.create_task_group() as task_group:
        for index, job in enumerate(jobs):
            task_group.start_soon(run_one, index, job)

    return [report for report in reports if report is not None]


def run_batch(core: Core, manifest: str | Path) -> Report:
    """Run every job of a manifest; results keep the manifest order."""
    report = Report(version=__version__, command="batch", inputs={"manifest": str(manifest)})
    try:
        jobs = load_manifest(manifest)
    except ZsfError as error:
        report.exit_code, report.error = error.exit_code, str(error)
        return report

    reports = anyio.run(_run_jobs, core, jobs)
    report.results = {
        "jobs": [{"index": index, **job.to_json()} for index, job in enumerate(reports)]
    }
    report.complete = all(job.complete for job in reports)
    report.exit_code = max((job.exit_code for job in reports), default=0)
    failed = sum(1 for job in reports if job.exit_code)
    LOGGER.info(f"Batch of {len(reports)} jobs finished, {failed} failed")
    return report
