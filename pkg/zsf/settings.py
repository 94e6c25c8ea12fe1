import logging
from typing import Any

from pydantic_settings import BaseSettings

log = logging.getLogger(__name__)


class Settings(BaseSettings):
    debug: bool = False
    budget_nodes: int = 1_000_000
    budget_results: int = 100_000
    batch_concurrency: int = 4
    # above this many generators the exact elasticity comes from the simplex
    hilbert_max_generators: int = 6
    hilbert_max_degree: int = 24
    # families re-check their claims by full enumeration up to this |B|
    enumeration_limit: int = 40


def get_settings(**kwargs: Any) -> Settings:
    global settings
    if not settings:
        log.info("Loading config settings from the environment...")
        settings = Settings(**kwargs)

    return settings


settings: Settings | None = None
