import logging
import math
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Any

from ..settings import get_settings
from .atoms import AtomSet, enumerate_atoms, is_atom, two_support_atom
from .error import (
    BudgetExceededError,
    InapplicableError,
    UnsupportedAmbientError,
    ZsfDataError,
    ZsfValidationError,
)
from .factorize import FactorizationSet, LengthSet, factorizations, zero_sum_elements
from .groundset import Factorization, Sequence, TwoSidedSpec, distance
from .models import Budget, Certainty
from .utils import DisjointSet

LOGGER = logging.getLogger(__name__)


class Monotonicity(str, Enum):
    NONDECREASING = "nondecreasing"
    NONINCREASING = "nonincreasing"
    NONE = "none"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Chain:
    """A walk through factorizations of one element."""

    steps: tuple[Factorization, ...]
    bound: int | None = None
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def element(self) -> Sequence:
        return self.steps[0].product

    @property
    def max_step(self) -> int:
        return max(
            (distance(first, second) for first, second in zip(self.steps, self.steps[1:])),
            default=0,
        )

    @property
    def lengths(self) -> list[int]:
        return [len(step) for step in self.steps]

    @property
    def monotone(self) -> Monotonicity:
        lengths = self.lengths
        pairs = list(zip(lengths, lengths[1:]))
        if all(first <= second for first, second in pairs):
            return Monotonicity.NONDECREASING
        if all(first >= second for first, second in pairs):
            return Monotonicity.NONINCREASING
        return Monotonicity.NONE

    def reversed(self) -> "Chain":
        return Chain(
            steps=tuple(reversed(self.steps)), bound=self.bound, metadata=self.metadata
        )

    def validate(self) -> "Chain":
        product = self.element
        for position, step in enumerate(self.steps):
            if step.product != product:
                raise ZsfDataError(
                    f"Chain step {position} ({step}) is not a factorization of ({product})",
                    data={"position": position, "step": str(step)},
                )
            if not all(is_atom(atom) for atom, _ in step.atoms):
                raise ZsfDataError(f"Chain step {position} ({step}) contains a non-atom")

        if self.bound is not None and self.max_step > self.bound:
            raise ZsfDataError(
                f"Chain step of {self.max_step} exceeds the bound {self.bound}",
                data={"steps": [str(step) for step in self.steps]},
            )
        return self

    def to_json(self) -> dict[str, Any]:
        return {
            "steps": [str(step) for step in self.steps],
            "lengths": self.lengths,
            "max_step": self.max_step,
            "bound": self.bound,
            "monotone": str(self.monotone),
            "metadata": self.metadata,
        }


def _dedupe(steps: Iterable[Factorization]) -> tuple[Factorization, ...]:
    result: list[Factorization] = []
    for step in steps:
        if not result or result[-1] != step:
            result.append(step)
    return tuple(result)


def _complete(
    element: Sequence, atoms: AtomSet, budget: Budget | None, operation: str
) -> FactorizationSet:
    found = factorizations(element, atoms, budget)
    found.require_complete(operation)
    return found


def catenary_of(found: list[Factorization]) -> int:
    """Bottleneck edge of a minimum bottleneck spanning tree."""
    if len(found) <= 1:
        return 0

    edges = sorted(
        (distance(found[i], found[j]), i, j)
        for i, j in combinations(range(len(found)), 2)
    )
    forest = DisjointSet(len(found))
    for weight, i, j in edges:
        if forest.join(i, j) and forest.components == 1:
            return weight
    raise ZsfDataError("Factorization graph is not connected")


def catenary(element: Sequence, atoms: AtomSet, budget: Budget | None = None) -> int:
    found = _complete(element, atoms, budget, "catenary")
    return catenary_of(list(found))


def _monotone_reachable(
    found: list[Factorization], distances: list[list[int]], limit: int
) -> bool:
    lengths = [len(z) for z in found]
    for source in range(len(found)):
        seen = {source}
        queue = deque([source])
        while queue:
            current = queue.popleft()
            for target in range(len(found)):
                if (
                    target not in seen
                    and lengths[current] <= lengths[target]
                    and distances[current][target] <= limit
                ):
                    seen.add(target)
                    queue.append(target)

        expected = {
            target for target in range(len(found)) if lengths[target] >= lengths[source]
        }
        if not expected <= seen:
            return False
    return True


def monotone_catenary_of(found: list[Factorization]) -> int:
    if len(found) <= 1:
        return 0

    distances = [[distance(first, second) for second in found] for first in found]
    thresholds = sorted({value for row in distances for value in row if value})
    low, high = 0, len(thresholds) - 1
    while low < high:
        middle = (low + high) // 2
        if _monotone_reachable(found, distances, thresholds[middle]):
            high = middle
        else:
            low = middle + 1
    return thresholds[low]


def monotone_catenary(
    element: Sequence, atoms: AtomSet, budget: Budget | None = None
) -> int:
    found = _complete(element, atoms, budget, "monotone_catenary")
    return monotone_catenary_of(list(found))


def _successive_distance_in(z: Factorization, found: FactorizationSet) -> int:
    lengths = found.lengths
    return max(
        (
            min(distance(z, other) for other in found if len(other) == adjacent)
            for adjacent in lengths.adjacent(len(z))
        ),
        default=0,
    )


def successive_distance(
    z: Factorization, atoms: AtomSet, budget: Budget | None = None
) -> int:
    found = _complete(z.product, atoms, budget, "successive_distance")
    return _successive_distance_in(z, found)


def delta_of_set(found: FactorizationSet) -> int:
    return max((_successive_distance_in(z, found) for z in found), default=0)


def delta_of(element: Sequence, atoms: AtomSet, budget: Budget | None = None) -> int:
    return delta_of_set(_complete(element, atoms, budget, "delta_of"))


def adjacent_length_distance(
    element: Sequence, atoms: AtomSet, k: int, l: int, budget: Budget | None = None
) -> int:
    """d(Z_k(B), Z_l(B)), the smallest distance between the two layers."""
    found = _complete(element, atoms, budget, "adjacent_length_distance")
    lengths = found.lengths
    for length in (k, l):
        if length not in lengths:
            raise ZsfValidationError(
                f"{length} is not a length of ({element}); lengths are {list(lengths)}"
            )
    if k == l:
        return 0

    return min(
        distance(first, second)
        for first in found.of_length(k)
        for second in found.of_length(l)
    )


def tame_degree(
    element: Sequence, atom: Sequence, atoms: AtomSet, budget: Budget | None = None
) -> int:
    if not is_atom(atom):
        raise ZsfValidationError(f"({atom}) is not an atom")

    found = _complete(element, atoms, budget, "tame_degree")
    through = [z for z in found if z.count(atom)]
    if not through:
        return 0
    return max(min(distance(z, other) for other in through) for z in found)


def omega_instance(atom: Sequence, parts: list[Sequence]) -> int:
    """Size of the smallest set of parts whose product the atom divides."""
    total = Sequence.empty(atom.ambient)
    for part in parts:
        total = total * part
    if not atom.divides(total):
        raise ZsfValidationError(f"({atom}) does not divide the product of the parts")

    for size in range(1, len(parts)):
        for chosen in combinations(parts, size):
            product = Sequence.empty(atom.ambient)
            for part in chosen:
                product = product * part
            if atom.divides(product):
                return size
    return len(parts)


def catenary_chain_bound(ground: Iterable[int]) -> int:
    """(|min G0| + |G0-|^2) * |min G0|."""
    elements = list(ground)
    lowest = abs(min(elements)) if elements else 0
    negatives = sum(1 for element in elements if element < 0)
    return (lowest + negatives**2) * lowest


def _negative_ratio(atom: Sequence, element: Sequence) -> Fraction:
    return max(
        (
            Fraction(atom.count(g), element.count(g))
            for g in element.support
            if g < 0
        ),
        default=Fraction(0),
    )


def _smallest_cover(atom: Sequence, z: Factorization) -> Factorization:
    """A smallest sub-multiset of the atoms of z whose product the atom divides."""
    atom_list = z.atom_list()
    for size in range(1, len(atom_list) + 1):
        seen = set()
        for chosen in combinations(atom_list, size):
            candidate = Factorization.of(chosen, z.ambient)
            if candidate in seen:
                continue
            seen.add(candidate)
            if atom.divides(candidate.product):
                return candidate
    raise ZsfDataError(f"({atom}) does not divide ({z.product})")


def _exchange_step(
    z: Factorization,
    target: Factorization,
    atoms: AtomSet,
    budget: Budget | None,
) -> tuple[Sequence, Factorization]:
    """An atom U of the target and a factorization through U close to z.

    Among the atoms of the target whose negative multiplicities are small
    relative to the element, the canonically smallest is used.
    """
    element = z.product
    parts = [atom for atom, _ in target.atoms]
    bound = Fraction(
        sum(1 for g in element.support if g < 0), max(1, len(target))
    )
    qualifying = [atom for atom in parts if _negative_ratio(atom, element) <= bound]
    if not qualifying:
        qualifying = [min(parts, key=lambda atom: _negative_ratio(atom, element))]
    atom = min(qualifying)

    cover = _smallest_cover(atom, z)
    rest = factorizations(cover.product / atom, atoms, budget)
    if not rest.all:
        raise ZsfDataError(f"({cover.product / atom}) has no factorization")
    replacement = min(rest.all, key=len).with_atom(atom)
    return atom, (z / cover) * replacement


def build_catenary_chain(
    element: Sequence,
    z: Factorization,
    target: Factorization,
    atoms: AtomSet,
    budget: Budget | None = None,
) -> Chain:
    """A chain from z to the target with steps bounded by the exchange bound."""
    for end in (z, target):
        if end.product != element:
            raise ZsfValidationError(f"({end}) is not a factorization of ({element})")
    if element.ambient.is_cyclic:
        raise UnsupportedAmbientError("Chain construction needs the integers")

    def build(z: Factorization, target: Factorization) -> list[Factorization]:
        if z == target:
            return [z]
        if len(z) > len(target):
            return list(reversed(build(target, z)))

        atom, exchanged = _exchange_step(z, target, atoms, budget)
        rest = build(exchanged.without_atom(atom), target.without_atom(atom))
        LOGGER.debug(f"Exchange through ({atom}): {z} -> {exchanged}")
        return [z] + [step.with_atom(atom) for step in rest]

    chain = Chain(
        steps=_dedupe(build(z, target)),
        bound=catenary_chain_bound(atoms.ground),
        metadata={"construction": "exchange"},
    )
    return chain.validate()


def _nearest(source: Factorization, candidates: Iterable[Factorization]) -> Factorization:
    return min(candidates, key=lambda other: (distance(source, other), other.sort_key))


def build_monotone_chain_delta(
    element: Sequence,
    z: Factorization,
    target: Factorization,
    atoms: AtomSet,
    budget: Budget | None = None,
) -> Chain:
    """A monotone chain from z to the target.

    Each exchange step is re-targeted into the length window between the
    current factorization and the target, moving through adjacent lengths.
    """
    for end in (z, target):
        if end.product != element:
            raise ZsfValidationError(f"({end}) is not a factorization of ({element})")
    if len(z) > len(target):
        return build_monotone_chain_delta(element, target, z, atoms, budget).reversed()

    exchange_bound = catenary_chain_bound(atoms.ground)
    seen_delta = 0
    seen_gap = 0
    steps = [z]
    prefix: list[Sequence] = []
    current, goal, remaining = z, target, element

    while current != goal:
        found = _complete(remaining, atoms, budget, "build_monotone_chain_delta")
        seen_delta = max(seen_delta, delta_of_set(found))
        seen_gap = max(seen_gap, max(found.lengths.delta, default=0))

        atom, exchanged = _exchange_step(current, goal, atoms, budget)
        quotient = remaining / atom
        rest = _complete(quotient, atoms, budget, "build_monotone_chain_delta")
        seen_delta = max(seen_delta, delta_of_set(rest))
        seen_gap = max(seen_gap, max(rest.lengths.delta, default=0))
        exchanged_rest = exchanged.without_atom(atom)

        if len(current) <= len(exchanged) <= len(goal):
            moved = exchanged
        elif len(exchanged) < len(current):
            window = [
                length
                for length in rest.lengths
                if len(current) - 1 <= length <= len(goal) - 1
            ]
            layer = rest.of_length(min(window))
            moved = _nearest(exchanged_rest, layer).with_atom(atom)
        else:
            layer = rest.of_length(len(goal) - 1)
            moved = _nearest(exchanged_rest, layer).with_atom(atom)

        steps.append(_with_prefix(moved, prefix))
        prefix.append(atom)
        current = moved.without_atom(atom)
        goal = goal.without_atom(atom)
        remaining = quotient

    bound = exchange_bound + (exchange_bound + seen_gap) * seen_delta
    chain = Chain(
        steps=_dedupe(steps),
        bound=bound,
        metadata={
            "construction": "monotone exchange",
            "exchange_bound": exchange_bound,
            "max_delta": seen_gap,
            "successive_distance": seen_delta,
        },
    )
    return chain.validate()


def _with_prefix(z: Factorization, prefix: list[Sequence]) -> Factorization:
    for atom in prefix:
        z = z.with_atom(atom)
    return z


@dataclass(frozen=True)
class GapAnalysis:
    t: int
    window: tuple[int, int]
    head: Factorization
    length: int

    def to_json(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "window": list(self.window),
            "head": str(self.head),
            "length": self.length,
        }


def lem_gap_t(
    z: Factorization, a: int, b: int, a2: int, b1: int, v: int
) -> GapAnalysis:
    """Locate |z| for z in Z((V_{a,b1} V_{a2,b})^v) from the b1-content of its head.

    The head z0 is the product of the atoms of z containing a2.
    """
    if not (a < 0 and a2 < 0 and a != a2 and b > 0 and b1 > 0 and v >= 1):
        raise ZsfValidationError(
            f"Need distinct negatives a, a2, positives b, b1 and v >= 1; "
            f"got a={a}, a2={a2}, b={b}, b1={b1}, v={v}"
        )
    if b1 < b * -a:
        raise ZsfValidationError(f"Need b1 >= b|a|, got b1={b1}")
    if -a2 < (v * b1 + b) * -a:
        raise ZsfValidationError(f"Need |a2| >= (v*b1 + b)|a|, got a2={a2}")

    plain = (two_support_atom(a, b1) * two_support_atom(a2, b)) ** v
    if z.product != plain:
        raise ZsfValidationError(f"({z}) is not a factorization of ({plain})")

    head = Factorization.of(
        [atom for atom in z.atom_list() if atom.count(a2)], z.ambient
    )
    t = head.product.count(b1)
    center = Fraction(b1, math.lcm(a, b)) * t
    spread = v * (b - a) * math.gcd(a, b)
    window = (math.ceil(center - spread), math.floor(center + spread))

    if not window[0] <= len(z) <= window[1]:
        raise ZsfDataError(
            f"Length {len(z)} of ({z}) is outside the window {window}",
            data={"t": t, "window": list(window)},
        )
    if t == 0:
        expected = Factorization.from_counts(
            {two_support_atom(a, b1): v, two_support_atom(a2, b): v}
        )
        if z != expected:
            raise ZsfDataError(f"({z}) has t=0 but is not {expected}")

    return GapAnalysis(t=t, window=window, head=head, length=len(z))


@dataclass(frozen=True)
class TameGrowthWitness:
    atom: Sequence
    element: Sequence
    a: int
    b: int
    a2: int
    b1: int
    spread: int
    claims: dict[str, bool]
    status: Certainty
    lengths: LengthSet | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "atom": str(self.atom),
            "element": str(self.element),
            "a": self.a,
            "b": self.b,
            "a2": self.a2,
            "b1": self.b1,
            "spread": self.spread,
            "claims": self.claims,
            "status": str(self.status),
            "lengths": list(self.lengths) if self.lengths else None,
        }


def tame_growth_witness(
    spec: TwoSidedSpec, n: int, budget: Budget | None = None
) -> TameGrowthWitness:
    """An atom U and an element B with t(B, U) >= n, max L(B) >= n."""
    if not isinstance(spec, TwoSidedSpec) or not spec.negatives_infinite:
        raise InapplicableError(
            "Tame growth witnesses need infinitely many negative elements"
        )
    if not spec.positives_infinite:
        raise InapplicableError(
            "Tame growth witnesses need infinitely many positive elements"
        )
    if n < 2:
        raise ZsfValidationError(f"Need N >= 2, got {n}")

    a = -spec.negative.min_positive
    b = spec.positive.min_positive
    spread = -a * (b - a) * math.gcd(a, b)
    common = math.lcm(a, b)
    b1 = spec.positive.first_above((n + spread) * common - 1)
    a2 = -spec.negative.first_above((b1 + b) * -a - 1)

    atom = two_support_atom(a, b)
    element = two_support_atom(a, b1) * two_support_atom(a2, b)
    LOGGER.debug(f"Tame growth witness for N={n}: a={a}, b={b}, b1={b1}, a2={a2}")

    if len(element) > get_settings().enumeration_limit:
        lower = math.ceil(Fraction(b1, common) - spread)
        return TameGrowthWitness(
            atom=atom,
            element=element,
            a=a,
            b=b,
            a2=a2,
            b1=b1,
            spread=spread,
            claims={"max_length_at_least_n": lower >= n},
            status=Certainty.STRUCTURAL,
        )

    ground = enumerate_atoms(element.support, budget)
    found = factorizations(element, ground, budget)
    found.require_complete("tame_growth_witness")
    lengths = found.lengths
    claims = {
        "max_delta_at_least_n_minus_2": max(lengths.delta, default=0) >= n - 2,
        "max_length_at_least_n": lengths.max >= n,
        "tame_degree_at_least_n": tame_degree(element, atom, ground, budget) >= n,
    }
    if not all(claims.values()):
        raise ZsfDataError(
            f"Tame growth witness ({element}) fails its claims",
            data={"claims": claims, "lengths": list(lengths)},
        )

    return TameGrowthWitness(
        atom=atom,
        element=element,
        a=a,
        b=b,
        a2=a2,
        b1=b1,
        spread=spread,
        claims=claims,
        status=Certainty.EXACT,
        lengths=lengths,
    )


@dataclass(frozen=True)
class BallBounds:
    """Suprema of per-element invariants over a ball of elements."""

    max_length: int
    catenary: int
    monotone_catenary: int
    successive_distance: int
    elements: int
    complete: bool

    def to_json(self) -> dict[str, Any]:
        return {
            "max_length": self.max_length,
            "catenary": self.catenary,
            "monotone_catenary": self.monotone_catenary,
            "successive_distance": self.successive_distance,
            "elements": self.elements,
            "status": str(Certainty.LOWER_BOUND),
            "complete": self.complete,
        }


def ball_bounds(
    atoms: AtomSet, max_length: int, budget: Budget | None = None
) -> BallBounds:
    """Lower bounds for c, c_mon and delta from every B with |B| <= max_length."""
    best = {"catenary": 0, "monotone_catenary": 0, "successive_distance": 0}
    visited = 0
    complete = True
    try:
        for element in zero_sum_elements(atoms.ground, max_length, budget):
            found = factorizations(element, atoms, budget)
            if not found.complete:
                complete = False
                continue
            visited += 1
            found_list = list(found)
            best["catenary"] = max(best["catenary"], catenary_of(found_list))
            best["monotone_catenary"] = max(
                best["monotone_catenary"], monotone_catenary_of(found_list)
            )
            best["successive_distance"] = max(
                best["successive_distance"], delta_of_set(found)
            )
    except BudgetExceededError:
        complete = False

    return BallBounds(max_length=max_length, elements=visited, complete=complete, **best)

