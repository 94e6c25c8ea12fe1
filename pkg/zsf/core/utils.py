import logging
import math
from collections.abc import Callable, Hashable, Iterator
from fractions import Fraction
from functools import reduce
from itertools import chain, combinations_with_replacement
from typing import TypeVar

from .error import ZsfParsingError

LOGGER = logging.getLogger(__name__)

T = TypeVar("T", bound=Hashable)


def gcd_all(values: list[int]) -> int:
    return reduce(math.gcd, (abs(value) for value in values), 0)


def lcm_all(values: list[int]) -> int:
    return reduce(math.lcm, (abs(value) for value in values), 1)


def format_rational(value: Fraction) -> str:
    """Rationals are always serialized as "p/q", even integral ones."""
    return f"{value.numerator}/{value.denominator}"


def parse_int_list(text: str, what: str = "integer list") -> list[int]:
    """Parse "4,5,7", "[4, 5, 7]" or "4 5 7" into [4, 5, 7]."""
    body = text.strip().strip("[]{}()").replace(",", " ")
    try:
        return [int(part) for part in body.split()]
    except ValueError:
        raise ZsfParsingError(
            f'Unable to parse {what} "{text}": expected comma-separated integers'
        )


def parse_params(text: str) -> dict[str, int]:
    params: dict[str, int] = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ZsfParsingError(
                f'Unable to parse parameters "{text}": '
                f"'{item}' is not of the form key=value"
            )
        try:
            params[key.strip()] = int(value)
        except ValueError:
            raise ZsfParsingError(
                f'Unable to parse parameters "{text}": '
                f"value of '{key.strip()}' is not an integer"
            )
    return params


class DisjointSet:
    """Union-find over 0..size-1 with path halving and union by size."""

    def __init__(self, size: int) -> None:
        self.parent = list(range(size))
        self.size = [1] * size
        self.components = size

    def root(self, node: int) -> int:
        while self.parent[node] != node:
            self.parent[node] = self.parent[self.parent[node]]
            node = self.parent[node]
        return node

    def join(self, first: int, second: int) -> bool:
        first, second = self.root(first), self.root(second)
        if first == second:
            return False

        if self.size[first] < self.size[second]:
            first, second = second, first
        self.parent[second] = first
        self.size[first] += self.size[second]
        self.components -= 1
        return True


def frobenius_number(generators: list[int]) -> int:
    """Largest integer not representable by the generators, -1 if none.

    The generators must be positive with gcd 1.
    """
    generators = sorted(set(generators))
    if gcd_all(generators) != 1:
        raise ValueError(f"Generators {generators} are not coprime")
    if generators[0] == 1:
        return -1

    smallest = generators[0]
    # shortest representable value in each residue class mod the smallest
    # generator (Dijkstra over residues)
    best = [math.inf] * smallest
    best[0] = 0
    pending = {0}
    while pending:
        residue = min(pending, key=lambda r: best[r])
        pending.remove(residue)
        for generator in generators[1:]:
            target = (residue + generator) % smallest
            candidate = best[residue] + generator
            if candidate < best[target]:
                best[target] = candidate
                pending.add(target)

    return int(max(best)) - smallest


def coin_change(target: int, parts: list[int]) -> dict[int, int] | None:
    """Represent target as a sum of parts, preferring the largest parts.

    Returns the multiplicity of each part, or None when no representation
    exists.
    """
    if target < 0:
        return None

    parts = sorted(set(parts), reverse=True)
    # fewest pieces per value; ties go to the part seen first (largest)
    pieces: list[float] = [0] + [math.inf] * target
    last_part = [0] * (target + 1)
    for value in range(1, target + 1):
        for part in parts:
            if part <= value and pieces[value - part] + 1 < pieces[value]:
                pieces[value] = pieces[value - part] + 1
                last_part[value] = part

    if pieces[target] == math.inf:
        return None

    counts: dict[int, int] = {}
    while target:
        part = last_part[target]
        counts[part] = counts.get(part, 0) + 1
        target -= part
    return counts


def multiset_indices(
    item_count: int, max_size: int, min_size: int = 1
) -> Iterator[tuple[int, ...]]:
    """Nondecreasing index tuples, graded by size then lexicographic."""
    return chain.from_iterable(
        combinations_with_replacement(range(item_count), size)
        for size in range(min_size, max_size + 1)
    )


def subset_sum_states(
    terms: list[tuple[T, int]],
    zero: T,
    add: Callable[[T, T], T],
) -> set[tuple[T, bool, bool]]:
    """Reachable (sum, nonempty, proper) states over sub-multisets of terms.

    `terms` holds (element, multiplicity) pairs; a state is proper when at
    least one copy of some term was left out.
    """
    states: set[tuple[T, bool, bool]] = {(zero, False, False)}
    for element, count in terms:
        multiples = [zero]
        for _ in range(count):
            multiples.append(add(multiples[-1], element))

        next_states: set[tuple[T, bool, bool]] = set()
        for total, nonempty, proper in states:
            for taken, multiple in enumerate(multiples):
                next_states.add(
                    (
                        add(total, multiple),
                        nonempty or taken > 0,
                        proper or taken < count,
                    )
                )
        states = next_states

    return states


def has_proper_zero_subsum(
    terms: list[tuple[T, int]],
    zero: T,
    add: Callable[[T, T], T],
) -> bool:
    return (zero, True, True) in subset_sum_states(terms, zero, add)


def sized_subset_sums(
    terms: list[tuple[T, int]],
    zero: T,
    add: Callable[[T, T], T],
    size: int,
) -> set[T]:
    """Sums of the sub-multisets with exactly `size` terms."""
    states: set[tuple[T, int]] = {(zero, 0)}
    for element, count in terms:
        next_states: set[tuple[T, int]] = set()
        for total, used in states:
            current = total
            for taken in range(0, count + 1):
                if used + taken > size:
                    break
                next_states.add((current, used + taken))
                current = add(current, element)
        states = next_states

    return {total for total, used in states if used == size}
