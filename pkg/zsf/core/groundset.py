"""Ambient groups, sequences, ground sets and factorizations.

Sequences are finite multisets over either the integers or a cyclic group
Z/nZ. They are stored as sorted (element, multiplicity) pairs so that equal
multisets are equal objects; everything here is immutable.
"""

import json
import logging
import re
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from functools import cached_property, total_ordering
from typing import Any

from pydantic import ConfigDict, ValidationError, field_validator

from .error import UnsupportedAmbientError, ZsfParsingError, ZsfValidationError
from .models import BaseModel
from .utils import sized_subset_sums, subset_sum_states

LOGGER = logging.getLogger(__name__)

MAX_MULTIPLICITY = 2**63 - 1
TERM_PATTERN = re.compile(r"^(-?\d+)(?:\^(\d+))?$")


@dataclass(frozen=True, order=True)
class Ambient:
    """The integers (modulus 0) or the cyclic group of the given modulus."""

    modulus: int = 0

    def __post_init__(self) -> None:
        if self.modulus < 0:
            raise ZsfValidationError(
                f"Cyclic modulus must be positive, got {self.modulus}"
            )

    @classmethod
    def cyclic(cls, modulus: int) -> "Ambient":
        if modulus < 1:
            raise ZsfValidationError(f"Cyclic modulus must be positive, got {modulus}")
        return cls(modulus=modulus)

    @property
    def is_cyclic(self) -> bool:
        return self.modulus > 0

    def reduce(self, element: int) -> int:
        return element % self.modulus if self.is_cyclic else element

    def add(self, first: int, second: int) -> int:
        return self.reduce(first + second)

    def to_json(self) -> str | dict[str, int]:
        return {"mod": self.modulus} if self.is_cyclic else "Z"

    @classmethod
    def from_json(cls, value: Any) -> "Ambient":
        if value == "Z":
            return INTEGERS
        if isinstance(value, dict) and set(value) == {"mod"}:
            return cls.cyclic(int(value["mod"]))
        raise ZsfParsingError(f'Unable to parse ambient "{value}"')

    def __str__(self) -> str:
        return f"Z/{self.modulus}Z" if self.is_cyclic else "Z"


INTEGERS = Ambient()


@total_ordering
@dataclass(frozen=True, eq=True)
class Sequence:
    ambient: Ambient
    terms: tuple[tuple[int, int], ...]

    @classmethod
    def from_counts(
        cls, counts: Mapping[int, int], ambient: Ambient = INTEGERS
    ) -> "Sequence":
        merged: Counter[int] = Counter()
        for element, count in counts.items():
            if count < 0:
                raise ZsfValidationError(
                    f"Negative multiplicity {count} for element {element}"
                )
            if count:
                merged[ambient.reduce(element)] += count

        for element, count in merged.items():
            if count > MAX_MULTIPLICITY:
                raise ZsfValidationError(
                    f"Multiplicity of {element} overflows: {count}"
                )

        return cls(ambient=ambient, terms=tuple(sorted(merged.items())))

    @classmethod
    def of(cls, elements: Iterable[int], ambient: Ambient = INTEGERS) -> "Sequence":
        return cls.from_counts(Counter(elements), ambient=ambient)

    @classmethod
    def empty(cls, ambient: Ambient = INTEGERS) -> "Sequence":
        return cls(ambient=ambient, terms=())

    @classmethod
    def parse(cls, text: str, ambient: Ambient = INTEGERS) -> "Sequence":
        counts: Counter[int] = Counter()
        for token in text.split():
            match = TERM_PATTERN.match(token)
            if not match:
                raise ZsfParsingError(
                    f'Unable to parse sequence "{text}": '
                    f"Term '{token}' is not of the form g or g^k"
                )
            exponent = int(match.group(2)) if match.group(2) else 1
            if exponent < 1:
                raise ZsfParsingError(
                    f'Unable to parse sequence "{text}": '
                    f"Exponent in '{token}' must be at least 1"
                )
            counts[int(match.group(1))] += exponent

        return cls.from_counts(counts, ambient=ambient)

    @classmethod
    def from_json(cls, data: Any) -> "Sequence":
        if isinstance(data, str):
            data = json.loads(data)
        if not isinstance(data, dict) or "terms" not in data:
            raise ZsfParsingError(f'Unable to parse sequence "{data}": missing terms')

        ambient = Ambient.from_json(data.get("ambient", "Z"))
        try:
            counts = {int(key): int(value) for key, value in data["terms"].items()}
        except (TypeError, ValueError, AttributeError) as error:
            raise ZsfParsingError(f'Unable to parse sequence "{data}": {error}')

        return cls.from_counts(counts, ambient=ambient)

    def to_json(self) -> dict[str, Any]:
        return {
            "ambient": self.ambient.to_json(),
            "terms": {str(element): count for element, count in self.terms},
        }

    def __str__(self) -> str:
        return " ".join(
            str(element) if count == 1 else f"{element}^{count}"
            for element, count in self.terms
        )

    def __repr__(self) -> str:
        return f"Sequence({str(self)!r}, {self.ambient})"

    def __len__(self) -> int:
        return sum(count for _, count in self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def sort_key(self) -> tuple[int, tuple[tuple[int, int], ...]]:
        return (len(self), self.terms)

    def __lt__(self, other: "Sequence") -> bool:
        return (self.ambient, self.sort_key) < (other.ambient, other.sort_key)

    @cached_property
    def _counts(self) -> dict[int, int]:
        return dict(self.terms)

    def count(self, element: int) -> int:
        return self._counts.get(self.ambient.reduce(element), 0)

    def counts(self) -> dict[int, int]:
        return dict(self._counts)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(element for element, _ in self.terms)

    def elements(self) -> Iterator[int]:
        for element, count in self.terms:
            for _ in range(count):
                yield element

    def min(self) -> int:
        return self.terms[0][0]

    def max(self) -> int:
        return self.terms[-1][0]

    def _check_ambient(self, other: "Sequence") -> None:
        if self.ambient != other.ambient:
            raise ZsfValidationError(
                f"Sequences over different ambients: {self.ambient} and {other.ambient}"
            )

    def __mul__(self, other: "Sequence") -> "Sequence":
        self._check_ambient(other)
        merged = Counter(self._counts)
        merged.update(other._counts)
        return Sequence.from_counts(merged, ambient=self.ambient)

    def __pow__(self, exponent: int) -> "Sequence":
        return Sequence.from_counts(
            {element: count * exponent for element, count in self.terms},
            ambient=self.ambient,
        )

    def divides(self, other: "Sequence") -> bool:
        return all(other.count(element) >= count for element, count in self.terms)

    def __truediv__(self, other: "Sequence") -> "Sequence":
        self._check_ambient(other)
        if not other.divides(self):
            raise ZsfValidationError(f"{other} does not divide {self}")
        remaining = Counter(self._counts)
        remaining.subtract(other._counts)
        return Sequence.from_counts(remaining, ambient=self.ambient)

    def negated(self) -> "Sequence":
        return Sequence.from_counts(
            {-element: count for element, count in self.terms}, ambient=self.ambient
        )

    def restricted(self, elements: Iterable[int]) -> "Sequence":
        keep = set(elements)
        return Sequence.from_counts(
            {element: count for element, count in self.terms if element in keep},
            ambient=self.ambient,
        )


def sigma(sequence: Sequence) -> int:
    total = sum(element * count for element, count in sequence.terms)
    return sequence.ambient.reduce(total)


def split_signs(sequence: Sequence) -> tuple[Sequence, Sequence, int]:
    """Return (S+, S-, v0(S)) for a sequence over the integers."""
    if sequence.ambient.is_cyclic:
        raise UnsupportedAmbientError(
            f"Sign splitting needs the integers, got {sequence.ambient}"
        )

    positive = {g: c for g, c in sequence.terms if g > 0}
    negative = {g: c for g, c in sequence.terms if g < 0}
    return (
        Sequence.from_counts(positive),
        Sequence.from_counts(negative),
        sequence.count(0),
    )


def subsequence_sums(sequence: Sequence, k: int | None = None) -> set[int]:
    """Sigma(S), or Sigma_k(S) when k is given."""
    ambient = sequence.ambient
    terms = list(sequence.terms)
    if k is not None:
        if k < 0:
            return set()
        return sized_subset_sums(terms, 0, ambient.add, k)

    return {
        total
        for total, nonempty, _ in subset_sum_states(terms, 0, ambient.add)
        if nonempty
    }


def zero_sum_free(sequence: Sequence) -> bool:
    """Standard zero-sum freeness: no nonempty subsequence sums to zero."""
    return 0 not in subsequence_sums(sequence)


class Progression(BaseModel):
    """The upward progression {start + step*k : k >= 0}."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    start: int
    step: int

    @field_validator("step")
    @classmethod
    def validate_step(cls, value: int) -> int:
        if value <= 0:
            raise ValueError(
                f"Progression step must be positive, got {value}; "
                "downward-infinite ground sets are not supported"
            )
        return value

    def contains(self, element: int) -> bool:
        return element >= self.start and (element - self.start) % self.step == 0

    def members(self, lo: int, hi: int) -> list[int]:
        first = max(lo, self.start)
        offset = (first - self.start) % self.step
        if offset:
            first += self.step - offset
        return list(range(first, hi + 1, self.step))

    def first_above(self, bound: int) -> int:
        """Smallest member strictly greater than bound."""
        return self.members(bound + 1, max(bound + 1, self.start) + self.step)[0]


class GroundSpec(BaseModel):
    """A subset of the integers: a finite part plus upward progressions."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    finite: tuple[int, ...] = ()
    aps: tuple[Progression, ...] = ()

    @field_validator("finite")
    @classmethod
    def normalize_finite(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(sorted(set(value)))

    @classmethod
    def from_members(cls, members: Iterable[int]) -> "GroundSpec":
        return cls(finite=tuple(members))

    @classmethod
    def parse(cls, text: str) -> "GroundSpec":
        stripped = text.strip()
        if stripped in ("N", "ℕ"):
            return cls(aps=(Progression(start=1, step=1),))

        if stripped.startswith("{") and ":" in stripped:
            try:
                return cls.model_validate(json.loads(stripped))
            except json.JSONDecodeError as error:
                raise ZsfParsingError(f'Unable to parse ground spec "{text}": {error}')
            except ValidationError as error:
                raise ZsfParsingError(
                    f'Unable to parse ground spec "{text}": {_first_error(error)}'
                )

        body = stripped.strip("[]{}() ")
        if not body:
            return cls()
        try:
            return cls.from_members(int(part) for part in body.split(","))
        except ValueError:
            raise ZsfParsingError(
                f'Unable to parse ground spec "{text}": '
                "expected a JSON spec or a comma-separated list of integers"
            )

    def to_json(self) -> dict[str, Any]:
        return self.model_dump(mode="json")

    def __str__(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def contains(self, element: int) -> bool:
        return element in self.finite or any(ap.contains(element) for ap in self.aps)

    @property
    def lowest(self) -> int | None:
        candidates = list(self.finite) + [ap.start for ap in self.aps]
        return min(candidates) if candidates else None

    def members(self, lo: int, hi: int) -> list[int]:
        found = {element for element in self.finite if lo <= element <= hi}
        for ap in self.aps:
            found.update(ap.members(lo, hi))
        return sorted(found)

    @property
    def is_finite(self) -> bool:
        return not self.aps

    @property
    def positives_infinite(self) -> bool:
        return bool(self.aps)

    def finite_members(self) -> list[int]:
        if not self.is_finite:
            raise ZsfValidationError(f"Ground spec {self} is infinite")
        return list(self.finite)

    @property
    def negatives(self) -> list[int]:
        lowest = self.lowest
        if lowest is None or lowest >= 0:
            return []
        return self.members(lowest, -1)

    @property
    def min_positive(self) -> int | None:
        return self.first_above(0)

    def positives_up_to(self, hi: int) -> list[int]:
        return self.members(1, hi)

    def first_above(self, bound: int) -> int | None:
        """Smallest member strictly greater than bound."""
        candidates = [element for element in self.finite if element > bound]
        candidates += [ap.first_above(bound) for ap in self.aps]
        return min(candidates) if candidates else None

    @property
    def is_condensed(self) -> bool:
        if self.negatives and self.min_positive is not None:
            return True
        return self.is_finite and set(self.finite) <= {0}

    def truncate(self, hi: int) -> "GroundSpec":
        lowest = self.lowest
        if lowest is None:
            return GroundSpec()
        return GroundSpec.from_members(self.members(lowest, hi))


class TwoSidedSpec(BaseModel):
    """A subset of Z\\{0} whose negative part may be infinite.

    `negative` describes the absolute values of the negative members.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    positive: GroundSpec
    negative: GroundSpec

    @classmethod
    def parse(cls, text: str) -> "TwoSidedSpec":
        stripped = text.strip().replace(" ", "")
        if stripped in ("Z\\{0}", "Z\\\\{0}", "Z-{0}", "Z*"):
            everything = GroundSpec.parse("N")
            return cls(positive=everything, negative=everything)

        try:
            data = json.loads(stripped)
        except json.JSONDecodeError:
            data = None

        if isinstance(data, dict) and "positive" in data:
            try:
                return cls.model_validate(data)
            except ValidationError as error:
                raise ZsfParsingError(
                    f'Unable to parse two-sided spec "{text}": {_first_error(error)}'
                )

        one_sided = GroundSpec.parse(text)
        negatives = [-element for element in one_sided.negatives]
        return cls(
            positive=GroundSpec(
                finite=tuple(e for e in one_sided.finite if e > 0),
                aps=one_sided.aps,
            ),
            negative=GroundSpec.from_members(negatives),
        )

    @property
    def negatives_infinite(self) -> bool:
        return self.negative.positives_infinite

    @property
    def positives_infinite(self) -> bool:
        return self.positive.positives_infinite

    def contains(self, element: int) -> bool:
        if element > 0:
            return self.positive.contains(element)
        if element < 0:
            return self.negative.contains(-element)
        return False

    def members(self, lo: int, hi: int) -> list[int]:
        negatives = [-e for e in self.negative.members(max(1, -hi), -lo) if e > 0]
        positives = [e for e in self.positive.members(max(1, lo), hi) if e > 0]
        return sorted(negatives + positives)


def spec_members(spec: GroundSpec, lo: int, hi: int) -> list[int]:
    if lo > hi:
        raise ZsfValidationError(f"Empty interval [{lo}, {hi}]")
    return spec.members(lo, hi)


@total_ordering
@dataclass(frozen=True, eq=True)
class Factorization:
    """A multiset of atoms, stored as sorted (atom, multiplicity) pairs."""

    ambient: Ambient
    atoms: tuple[tuple[Sequence, int], ...]

    @classmethod
    def from_counts(
        cls, counts: Mapping[Sequence, int], ambient: Ambient = INTEGERS
    ) -> "Factorization":
        merged = {atom: count for atom, count in counts.items() if count > 0}
        if any(count < 0 for count in counts.values()):
            raise ZsfValidationError("Negative atom multiplicity in factorization")
        return cls(
            ambient=ambient,
            atoms=tuple(sorted(merged.items(), key=lambda item: item[0].sort_key)),
        )

    @classmethod
    def of(
        cls, atoms: Iterable[Sequence], ambient: Ambient | None = None
    ) -> "Factorization":
        atom_list = list(atoms)
        if ambient is None:
            ambient = atom_list[0].ambient if atom_list else INTEGERS
        return cls.from_counts(Counter(atom_list), ambient=ambient)

    def __len__(self) -> int:
        return sum(count for _, count in self.atoms)

    def __str__(self) -> str:
        if not self.atoms:
            return "1"
        return " ".join(
            f"({atom})" if count == 1 else f"({atom})^{count}"
            for atom, count in self.atoms
        )

    def __repr__(self) -> str:
        return f"Factorization({str(self)!r})"

    @property
    def sort_key(self) -> tuple[int, tuple[Any, ...]]:
        return (
            len(self),
            tuple((atom.sort_key, count) for atom, count in self.atoms),
        )

    def __lt__(self, other: "Factorization") -> bool:
        return self.sort_key < other.sort_key

    def counts(self) -> Counter[Sequence]:
        return Counter(dict(self.atoms))

    def atom_list(self) -> list[Sequence]:
        return [atom for atom, count in self.atoms for _ in range(count)]

    @cached_property
    def product(self) -> Sequence:
        merged: Counter[int] = Counter()
        for atom, count in self.atoms:
            for element, multiplicity in atom.terms:
                merged[element] += multiplicity * count
        return Sequence.from_counts(merged, ambient=self.ambient)

    def count(self, atom: Sequence) -> int:
        return dict(self.atoms).get(atom, 0)

    def __mul__(self, other: "Factorization") -> "Factorization":
        merged = self.counts()
        merged.update(other.counts())
        return Factorization.from_counts(merged, ambient=self.ambient)

    def divides(self, other: "Factorization") -> bool:
        return all(other.count(atom) >= count for atom, count in self.atoms)

    def __truediv__(self, other: "Factorization") -> "Factorization":
        if not other.divides(self):
            raise ZsfValidationError(f"{other} does not divide {self}")
        remaining = self.counts()
        remaining.subtract(other.counts())
        return Factorization.from_counts(remaining, ambient=self.ambient)

    def with_atom(self, atom: Sequence, count: int = 1) -> "Factorization":
        merged = self.counts()
        merged[atom] += count
        return Factorization.from_counts(merged, ambient=self.ambient)

    def without_atom(self, atom: Sequence, count: int = 1) -> "Factorization":
        if self.count(atom) < count:
            raise ZsfValidationError(f"Atom ({atom}) does not divide {self}")
        merged = self.counts()
        merged[atom] -= count
        return Factorization.from_counts(merged, ambient=self.ambient)

    def positive_parts(self) -> list[Sequence]:
        """z+ as a list: the positive part of every atom, with repetition."""
        return [split_signs(atom)[0] for atom in self.atom_list()]

    def to_json(self) -> list[dict[str, Any]]:
        return [{"atom": str(atom), "count": count} for atom, count in self.atoms]


def distance(first: Factorization, second: Factorization) -> int:
    first_counts = first.counts()
    second_counts = second.counts()
    common = first_counts & second_counts
    shared = sum(common.values())
    return max(len(first) - shared, len(second) - shared)


def _first_error(error: ValidationError) -> str:
    details = error.errors()
    if not details:
        return str(error)
    return str(details[0].get("msg", error))


