import logging
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .atoms import AtomSet
from .error import BudgetExceededError, IncompleteEnumerationError, ZsfValidationError
from .groundset import Factorization, Sequence, sigma
from .models import Budget, BudgetTracker
from .utils import format_rational, multiset_indices

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class LengthSet:
    lengths: tuple[int, ...]
    complete: bool = True

    @classmethod
    def of(cls, lengths: Iterable[int], complete: bool = True) -> "LengthSet":
        return cls(lengths=tuple(sorted(set(lengths))), complete=complete)

    def __iter__(self) -> Iterator[int]:
        return iter(self.lengths)

    def __len__(self) -> int:
        return len(self.lengths)

    def __contains__(self, length: object) -> bool:
        return length in self.lengths

    @property
    def min(self) -> int:
        return self.lengths[0]

    @property
    def max(self) -> int:
        return self.lengths[-1]

    @property
    def delta(self) -> tuple[int, ...]:
        return tuple(sorted(delta_set(self)))

    @property
    def elasticity(self) -> Fraction:
        return elasticity_of(self)

    def adjacent(self, length: int) -> list[int]:
        """Elements of the set next to the given one."""
        position = self.lengths.index(length)
        neighbours = []
        if position > 0:
            neighbours.append(self.lengths[position - 1])
        if position + 1 < len(self.lengths):
            neighbours.append(self.lengths[position + 1])
        return neighbours

    def to_json(self) -> dict[str, Any]:
        return {
            "lengths": list(self.lengths),
            "delta": list(self.delta),
            "elasticity": format_rational(self.elasticity) if self.lengths else None,
            "complete": self.complete,
        }


def delta_set(lengths: LengthSet) -> set[int]:
    values = lengths.lengths
    return {second - first for first, second in zip(values, values[1:])}


def elasticity_of(lengths: LengthSet) -> Fraction:
    if not lengths.lengths:
        raise ZsfValidationError("Elasticity of an empty set of lengths")
    if lengths.min == 0:
        # only L = {0} contains 0
        return Fraction(1)
    return Fraction(lengths.max, lengths.min)


@dataclass(frozen=True)
class FactorizationSet:
    element: Sequence
    all: tuple[Factorization, ...]
    complete: bool = True

    def __iter__(self) -> Iterator[Factorization]:
        return iter(self.all)

    def __len__(self) -> int:
        return len(self.all)

    @property
    def lengths(self) -> LengthSet:
        return LengthSet.of((len(z) for z in self.all), complete=self.complete)

    def of_length(self, length: int) -> "FactorizationSet":
        return FactorizationSet(
            element=self.element,
            all=tuple(z for z in self.all if len(z) == length),
            complete=self.complete,
        )

    def require_complete(self, operation: str) -> None:
        if not self.complete:
            raise IncompleteEnumerationError(
                f"{operation} needs every factorization of ({self.element}), "
                f"but only {len(self.all)} were enumerated within the budget",
                data={"element": str(self.element), "enumerated": len(self.all)},
            )

    def to_json(self, with_factorizations: bool = True) -> dict[str, Any]:
        data: dict[str, Any] = {
            "element": str(self.element),
            "complete": self.complete,
            "count": len(self.all),
            **self.lengths.to_json(),
        }
        if with_factorizations:
            data["factorizations"] = [str(z) for z in self.all]
        return data


def _check_element(element: Sequence, atoms: AtomSet) -> None:
    if sigma(element) != 0:
        raise ZsfValidationError(
            f"({element}) is not a zero-sum sequence: it sums to {sigma(element)}"
        )
    if element.ambient != atoms.ambient or not atoms.covers(element):
        raise ZsfValidationError(
            f"({element}) is not a sequence over the ground {list(atoms.ground)}"
        )


def _covering_atoms(
    remaining: Counter[int],
    atoms: AtomSet,
    tracker: BudgetTracker,
) -> Iterator[list[Sequence]]:
    """Factorizations of `remaining` as lists of atoms, without duplicates.

    The smallest remaining term is the pivot; only atoms whose minimum is the
    pivot can cover it, and they are chosen in nondecreasing catalogue order.
    """
    tracker.tick()
    if not remaining:
        yield []
        return

    pivot = min(remaining)
    candidates = atoms.with_minimum(pivot)

    def cover(need: int, start: int) -> Iterator[list[Sequence]]:
        if need == 0:
            yield from _covering_atoms(remaining, atoms, tracker)
            return

        for index in range(start, len(candidates)):
            atom = candidates[index]
            if atom.count(pivot) > need:
                continue
            if any(remaining[g] < c for g, c in atom.terms):
                continue

            for g, c in atom.terms:
                remaining[g] -= c
                if not remaining[g]:
                    del remaining[g]
            try:
                for rest in cover(need - atom.count(pivot), index):
                    yield [atom] + rest
            finally:
                for g, c in atom.terms:
                    remaining[g] += c

    yield from cover(remaining[pivot], 0)


def factorizations(
    element: Sequence, atoms: AtomSet, budget: Budget | None = None
) -> FactorizationSet:
    _check_element(element, atoms)
    tracker = (budget or Budget()).tracker("factorizations")
    ambient = element.ambient

    zeros = element.count(0)
    zero_atom = [Sequence.of([0], ambient)] * zeros
    remaining = Counter({g: c for g, c in element.terms if g != 0})

    found: list[Factorization] = []
    complete = True
    try:
        for atom_list in _covering_atoms(remaining, atoms, tracker):
            tracker.add_result()
            found.append(Factorization.of(atom_list + zero_atom, ambient))
    except BudgetExceededError as error:
        LOGGER.debug(f"Factorization of ({element}) stopped early: {error}")
        complete = False

    LOGGER.debug(
        f"({element}) has {len(found)} factorizations (complete={complete})"
    )
    return FactorizationSet(element=element, all=tuple(sorted(found)), complete=complete)


def length_set(
    element: Sequence, atoms: AtomSet, budget: Budget | None = None
) -> LengthSet:
    return factorizations(element, atoms, budget).lengths


def z_k(
    element: Sequence, atoms: AtomSet, k: int, budget: Budget | None = None
) -> FactorizationSet:
    return factorizations(element, atoms, budget).of_length(k)


def pattern_contains(lengths: LengthSet, pattern: Iterable[int]) -> int | None:
    """Smallest y with y + pattern inside the set of lengths, if any."""
    shape = sorted(set(pattern))
    if not shape:
        raise ZsfValidationError("Pattern must be nonempty")

    members = set(lengths.lengths)
    for length in lengths.lengths:
        shift = length - shape[0]
        if all(shift + value in members for value in shape):
            return shift
    return None


def zero_sum_elements(
    ground: Iterable[int], max_length: int, budget: Budget | None = None
) -> list[Sequence]:
    """Nonempty zero-sum sequences over a finite ground, up to a length."""
    elements = sorted(set(ground))
    tracker = (budget or Budget()).tracker("zero_sum_elements")

    found = []
    for indices in multiset_indices(len(elements), max_length):
        tracker.tick()
        if sum(elements[index] for index in indices) == 0:
            found.append(Sequence.of(elements[index] for index in indices))
    return found
