import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from pydantic import BaseModel as PydanticBaseModel
from pydantic import ConfigDict, PrivateAttr, field_validator

from .error import BudgetExceededError

LOGGER = logging.getLogger(__name__)

DEFAULT_MAX_NODES = 1_000_000
DEFAULT_MAX_RESULTS = 100_000


class BaseModel(PydanticBaseModel):
    model_config = ConfigDict(extra="forbid")


class Certainty(str, Enum):
    """How much a reported number can be trusted.

    * `exact`: computed from a complete enumeration or a closed construction.
    * `lower bound`: a supremum approximated over a bounded search.
    * `structural`: checked on distinguished witnesses only.
    """

    EXACT = "exact"
    LOWER_BOUND = "lower bound"
    STRUCTURAL = "structural"

    def __str__(self) -> str:
        return self.value


class Measure(BaseModel):
    value: Any
    status: Certainty

    @classmethod
    def of(cls, value: Any, complete: bool = True) -> "Measure":
        return cls(
            value=value,
            status=Certainty.EXACT if complete else Certainty.LOWER_BOUND,
        )


class Budget(BaseModel):
    max_nodes: int = DEFAULT_MAX_NODES
    max_results: int = DEFAULT_MAX_RESULTS

    _nodes_used: int = PrivateAttr(default=0)

    @field_validator("max_nodes", "max_results")
    @classmethod
    def validate_positive(cls, value: int) -> int:
        if value <= 0:
            raise ValueError(f"Budget limits must be positive, got {value}")
        return value

    @property
    def nodes_used(self) -> int:
        return self._nodes_used

    def tracker(self, operation: str) -> "BudgetTracker":
        return BudgetTracker(budget=self, operation=operation)


@dataclass
class BudgetTracker:
    """Per-call counter; node counts also accumulate on the shared budget."""

    budget: Budget
    operation: str
    nodes: int = 0
    results: int = 0
    progress: dict[str, Any] = field(default_factory=dict)

    def tick(self, count: int = 1) -> None:
        self.nodes += count
        self.budget._nodes_used += count
        if self.nodes > self.budget.max_nodes:
            LOGGER.debug(f"Node budget exhausted in {self.operation}")
            raise BudgetExceededError(
                f"Search budget of {self.budget.max_nodes} nodes exceeded in {self.operation}",
                data={"nodes": self.nodes, "results": self.results, **self.progress},
            )

    def add_result(self) -> None:
        self.results += 1
        if self.results > self.budget.max_results:
            LOGGER.debug(f"Result budget exhausted in {self.operation}")
            raise BudgetExceededError(
                f"Result budget of {self.budget.max_results} exceeded in {self.operation}",
                data={"nodes": self.nodes, "results": self.results, **self.progress},
            )
