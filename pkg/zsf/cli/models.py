import csv
import io
import json
from enum import Enum
from typing import Any

from ..core.models import BaseModel, Budget

SCHEMA_VERSION = 1


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"

    def __str__(self) -> str:
        return self.value


class BudgetUsage(BaseModel):
    max_nodes: int
    max_results: int
    nodes_used: int

    @classmethod
    def from_budget(cls, budget: Budget) -> "BudgetUsage":
        return cls(
            max_nodes=budget.max_nodes,
            max_results=budget.max_results,
            nodes_used=budget.nodes_used,
        )


class Report(BaseModel):
    schema_version: int = SCHEMA_VERSION
    version: str
    command: str
    inputs: dict[str, Any] = {}
    results: dict[str, Any] = {}
    complete: bool = True
    budget: BudgetUsage | None = None
    exit_code: int = 0
    error: str | None = None

    def to_json(self) -> dict[str, Any]:
        return self.model_dump(mode="json")

    def to_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        """One `key,value` row per leaf, nested keys joined with dots."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in _flatten(self.to_json()):
            writer.writerow([key, value])
        return buffer.getvalue()

    def render(self, output: OutputFormat) -> str:
        return self.to_csv() if output == OutputFormat.CSV else self.to_text()


def _flatten(data: Any, prefix: str = "") -> list[tuple[str, str]]:
    if isinstance(data, dict):
        rows = []
        for key in sorted(data):
            rows.extend(_flatten(data[key], f"{prefix}.{key}" if prefix else str(key)))
        return rows
    if isinstance(data, list):
        return [(prefix, json.dumps(data, sort_keys=True))]
    if data is None:
        return [(prefix, "")]
    return [(prefix, str(data).lower() if isinstance(data, bool) else str(data))]
