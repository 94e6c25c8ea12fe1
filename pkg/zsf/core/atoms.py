import logging
import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field

from .error import (
    BudgetExceededError,
    InapplicableError,
    UnsupportedAmbientError,
    ZsfDataError,
    ZsfValidationError,
)
from .groundset import (
    INTEGERS,
    Ambient,
    GroundSpec,
    Sequence,
    sigma,
    split_signs,
    subsequence_sums,
)
from .models import Budget, BudgetTracker
from .utils import (
    coin_change,
    frobenius_number,
    gcd_all,
    has_proper_zero_subsum,
    multiset_indices,
)

LOGGER = logging.getLogger(__name__)


def is_atom(sequence: Sequence) -> bool:
    if not sequence or sigma(sequence) != 0:
        return False
    return not has_proper_zero_subsum(
        list(sequence.terms), 0, sequence.ambient.add
    )


@dataclass(frozen=True)
class AtomSet:
    """The catalogue A(G0) of a finite ground set, canonically sorted."""

    ground: tuple[int, ...]
    atoms: tuple[Sequence, ...]
    ambient: Ambient = INTEGERS
    _by_minimum: dict[int, tuple[Sequence, ...]] = field(
        default_factory=dict, compare=False, repr=False
    )

    def __post_init__(self) -> None:
        grouped: dict[int, list[Sequence]] = {}
        for atom in self.atoms:
            grouped.setdefault(atom.min(), []).append(atom)
        self._by_minimum.update(
            {minimum: tuple(atoms) for minimum, atoms in grouped.items()}
        )

    def __iter__(self) -> Iterator[Sequence]:
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def __contains__(self, atom: object) -> bool:
        return atom in self.atoms

    @property
    def davenport(self) -> int:
        return max((len(atom) for atom in self.atoms), default=0)

    def with_minimum(self, element: int) -> tuple[Sequence, ...]:
        """Atoms whose smallest term is the given element."""
        return self._by_minimum.get(element, ())

    def covers(self, sequence: Sequence) -> bool:
        return set(sequence.support) <= set(self.ground)

    def to_json(self) -> dict:
        return {
            "ground": list(self.ground),
            "atoms": [str(atom) for atom in self.atoms],
            "davenport": self.davenport,
        }


def _ground_list(ground: Iterable[int] | GroundSpec) -> list[int]:
    if isinstance(ground, GroundSpec):
        return ground.finite_members()
    return sorted(set(ground))


def _check_condensed(ground: list[int]) -> None:
    has_negative = any(element < 0 for element in ground)
    has_positive = any(element > 0 for element in ground)
    if has_negative != has_positive:
        raise ZsfValidationError(
            f"Ground set {ground} is not condensed: "
            "it needs both a positive and a negative element"
        )


def negative_completions(
    positive: Sequence,
    negatives: list[int],
    max_length: int,
    tracker: BudgetTracker | None = None,
) -> Iterator[Sequence]:
    """Negative parts R over the given negatives with positive·R an atom.

    Partial completions are abandoned as soon as one of their subsums matches
    a subsum of the positive part, since every extension then contains a
    proper zero-sum subsequence.
    """
    target = sigma(positive)
    positive_sums = subsequence_sums(positive)
    # ascending absolute value
    parts = sorted(negatives, reverse=True)

    def extend(
        start: int, chosen: list[int], total: int, sums: set[int]
    ) -> Iterator[Sequence]:
        for index in range(start, len(parts)):
            if tracker:
                tracker.tick()
            part = -parts[index]
            new_total = total + part
            if new_total > target:
                # parts only grow from here
                return

            new_sums = sums | {part} | {value + part for value in sums}
            new_chosen = chosen + [parts[index]]
            if new_total == target:
                candidate = positive * Sequence.of(new_chosen)
                if is_atom(candidate):
                    yield candidate
                continue

            if len(new_chosen) >= max_length or new_sums & positive_sums:
                continue
            yield from extend(index, new_chosen, new_total, new_sums)

    yield from extend(0, [], 0, set())


def enumerate_atoms(
    ground: Iterable[int] | GroundSpec, budget: Budget | None = None
) -> AtomSet:
    """All atoms over a finite condensed subset of the integers.

    Positive parts are bounded by |min G0-| terms and negative parts by
    max G0+ terms.
    """
    elements = _ground_list(ground)
    _check_condensed(elements)
    tracker = (budget or Budget()).tracker("enumerate_atoms")

    found: list[Sequence] = []
    if 0 in elements:
        found.append(Sequence.of([0]))

    negatives = [element for element in elements if element < 0]
    positives = [element for element in elements if element > 0]
    LOGGER.debug(f"Enumerating atoms over {elements}")

    if negatives:
        max_positive_terms = -min(negatives)
        max_negative_terms = max(positives)
        try:
            for indices in multiset_indices(len(positives), max_positive_terms):
                tracker.tick()
                positive = Sequence.of(positives[index] for index in indices)
                for atom in negative_completions(
                    positive, negatives, max_negative_terms, tracker
                ):
                    tracker.add_result()
                    found.append(atom)
        except BudgetExceededError as error:
            error.data["atoms_found"] = len(found)
            error.data["partial_atoms"] = [str(atom) for atom in sorted(found)]
            raise

    LOGGER.debug(f"Found {len(found)} atoms over {elements}")
    return AtomSet(ground=tuple(elements), atoms=tuple(sorted(found)))


def enumerate_cyclic_atoms(
    modulus: int,
    ground: Iterable[int] | None = None,
    budget: Budget | None = None,
) -> AtomSet:
    """All atoms over a subset of Z/nZ (the whole group by default).

    Every atom is a zero-sum free sequence S of length at most n-1 followed by
    its largest element -sigma(S).
    """
    ambient = Ambient.cyclic(modulus)
    if ground is None:
        elements = list(range(modulus))
    else:
        elements = sorted({ambient.reduce(element) for element in ground})

    tracker = (budget or Budget()).tracker("enumerate_cyclic_atoms")
    found: list[Sequence] = []
    if 0 in elements:
        found.append(Sequence.of([0], ambient))

    nonzero = [element for element in elements if element]
    member = set(nonzero)

    def extend(start: int, chosen: list[int], sums: set[int]) -> None:
        tracker.tick()
        if chosen:
            closing = (-sum(chosen)) % modulus
            if closing in member and closing >= chosen[-1]:
                atom = Sequence.of(chosen + [closing], ambient)
                if not is_atom(atom):
                    raise ZsfDataError(
                        f"Cyclic candidate ({atom}) is not an atom",
                        data={"candidate": str(atom)},
                    )
                tracker.add_result()
                found.append(atom)

        if len(chosen) >= modulus - 1:
            return

        for index in range(start, len(nonzero)):
            element = nonzero[index]
            new_sums = {element} | {(value + element) % modulus for value in sums}
            if 0 in new_sums:
                continue
            extend(index, chosen + [element], sums | new_sums)

    extend(0, [], set())
    return AtomSet(ground=tuple(elements), atoms=tuple(sorted(found)), ambient=ambient)


def davenport(
    ground: Iterable[int] | GroundSpec, budget: Budget | None = None
) -> int:
    return enumerate_atoms(ground, budget).davenport


def two_support_atom(a: int, b: int) -> Sequence:
    """V_{a,b}, the unique atom with support {a, b}."""
    if not a < 0 < b:
        raise ZsfValidationError(f"Need a < 0 < b, got a={a}, b={b}")
    common = math.lcm(a, b)
    return Sequence.from_counts({a: common // -a, b: common // b})


def extend_to_atom(sequence: Sequence, spec: GroundSpec) -> Sequence:
    """An atom over the spec divisible by the given sequence of negatives."""
    if sequence.ambient.is_cyclic:
        raise UnsupportedAmbientError(
            f"Atom extension needs the integers, got {sequence.ambient}"
        )
    if not spec.positives_infinite:
        raise InapplicableError(
            f"Ground spec {spec} has finitely many positives; "
            "atom extension needs infinitely many"
        )

    negatives = spec.negatives
    if not negatives:
        raise InapplicableError(f"Ground spec {spec} has no negative elements")
    for element in sequence.support:
        if element >= 0 or not spec.contains(element):
            raise ZsfValidationError(
                f"Element {element} of ({sequence}) is not a negative member of {spec}"
            )

    if not sequence:
        return two_support_atom(max(negatives), spec.min_positive)

    step = gcd_all(negatives)
    parts = [-element // step for element in negatives]
    gap = max(1, frobenius_number(parts))
    deficit = -sigma(sequence)

    positive = spec.first_above(deficit + gap * step)
    repeats = step // math.gcd(positive, step)
    remainder = (repeats * positive - deficit) // step
    filling = coin_change(remainder, parts)
    if filling is None:
        raise ZsfDataError(
            f"Unable to represent {remainder} by {parts}",
            data={"sequence": str(sequence), "spec": spec.to_json()},
        )

    extra = Sequence.from_counts({-part * step: count for part, count in filling.items()})
    atom = Sequence.from_counts({positive: repeats}) * sequence * extra
    LOGGER.debug(f"Extended ({sequence}) to ({atom}) with b={positive}")

    if not is_atom(atom):
        raise ZsfDataError(
            f"Extension ({atom}) of ({sequence}) is not an atom",
            data={"sequence": str(sequence), "candidate": str(atom)},
        )
    return atom


def length_bounds_hold(atom: Sequence, ground: Iterable[int]) -> bool:
    """|U+| <= |min G0| and |U-| <= max G0 for an atom over the ground."""
    elements = list(ground)
    positive, negative, _ = split_signs(atom)
    return len(positive) <= max(0, -min(elements)) and len(negative) <= max(
        0, max(elements)
    )
