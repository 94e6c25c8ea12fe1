"""Monotone chains through the factorizations of one element.

Pairs of negative sequences with equal sums form a monoid E; its symmetric
pairs form the submonoid S. Comparing a factorization against a coarser one
produces elements of E, and swapping a small symmetric-product batch of their
atoms walks one factorization towards the other with bounded steps.
"""

import logging
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations
from operator import mul
from typing import Any

from sympy.utilities.iterables import multiset_partitions

from .atoms import AtomSet, enumerate_atoms, is_atom
from .error import (
    IncompleteEnumerationError,
    InapplicableError,
    UnsupportedAmbientError,
    ZsfDataError,
    ZsfValidationError,
)
from .factorize import FactorizationSet, factorizations
from .groundset import Factorization, Sequence, sigma, split_signs, subsequence_sums
from .hilbert import kernel_basis
from .invariants import Chain
from .models import Budget, BudgetTracker
from .utils import gcd_all

LOGGER = logging.getLogger(__name__)

Vector = tuple[int, ...]


@dataclass(frozen=True)
class DifferenceVector:
    basis: tuple[int, ...]
    coordinates: Vector

    @property
    def is_zero(self) -> bool:
        return not any(self.coordinates)

    def to_json(self) -> dict[str, Any]:
        return {"basis": list(self.basis), "coordinates": list(self.coordinates)}


@dataclass(frozen=True)
class PairSequence:
    """A pair (left, right) of sequences over negative integers."""

    left: Sequence
    right: Sequence

    @classmethod
    def from_atom(cls, atom: Sequence) -> "PairSequence":
        """Inverse of `embed`: U maps to (U-, -(U+))."""
        positive, negative, _ = split_signs(atom)
        return cls(left=negative, right=positive.negated())

    @property
    def is_balanced(self) -> bool:
        return sigma(self.left) == sigma(self.right)

    @property
    def is_symmetric(self) -> bool:
        return self.left == self.right

    @property
    def sort_key(self) -> tuple[Any, ...]:
        return (len(self.left) + len(self.right), self.left.sort_key, self.right.sort_key)

    def embed(self) -> Sequence:
        return self.left * self.right.negated()

    def difference(self, basis: Iterable[int]) -> DifferenceVector:
        basis = tuple(basis)
        return DifferenceVector(
            basis=basis,
            coordinates=tuple(self.left.count(g) - self.right.count(g) for g in basis),
        )

    def __str__(self) -> str:
        return f"({self.left or 1}, {self.right or 1})"

    def to_json(self) -> dict[str, Any]:
        return {"left": str(self.left), "right": str(self.right)}


def _check_negatives(negatives: Iterable[int]) -> list[int]:
    values = sorted(set(negatives))
    if not values:
        raise ZsfValidationError("Pair monoid needs at least one negative element")
    if any(value >= 0 for value in values):
        raise ZsfValidationError(f"Pair monoid elements must be negative, got {values}")
    return values


def _pair_catalogue(negatives: list[int], budget: Budget | None) -> AtomSet:
    return enumerate_atoms(negatives + [-value for value in negatives], budget)


def e_atoms(negatives: Iterable[int], budget: Budget | None = None) -> list[PairSequence]:
    """Atoms of the equal-sum pair monoid over the given negatives.

    (S1, S2) is an atom exactly when S1(-S2) is an atom over G0 and -G0.
    """
    values = _check_negatives(negatives)
    pairs = [PairSequence.from_atom(atom) for atom in _pair_catalogue(values, budget)]
    return sorted(pairs, key=lambda pair: pair.sort_key)


def relative_davenport(negatives: Iterable[int], budget: Budget | None = None) -> int:
    """Longest minimal zero-sum multiset of pair-atom difference vectors."""
    values = _check_negatives(negatives)
    basis = tuple(values)
    vectors = sorted({pair.difference(basis).coordinates for pair in e_atoms(values, budget)})

    kernel = kernel_basis(list(vectors), budget, operation="relative_davenport")
    if not kernel.complete:
        raise IncompleteEnumerationError(
            f"Relative Davenport constant of {values} needs minimal solutions "
            f"beyond degree {kernel.degree_bound}",
            data={"negatives": values, "degree_bound": kernel.degree_bound},
        )
    LOGGER.debug(f"Relative Davenport constant of {values} is {kernel.max_degree}")
    return kernel.max_degree


def _product(parts: Iterable[Sequence]) -> Sequence:
    return reduce(mul, parts, Sequence.empty())


def _positive(atom: Sequence) -> Sequence:
    return split_signs(atom)[0]


def _negative(atom: Sequence) -> Sequence:
    return split_signs(atom)[1]


def _nonzero_atoms(z: Factorization) -> list[Sequence]:
    return [atom for atom in z.atom_list() if atom.support != (0,)]


def _align(
    smaller: list[Sequence], partition: list[list[Sequence]]
) -> list[list[Sequence]]:
    remaining = list(partition)
    aligned: dict[int, list[Sequence]] = {}
    for position, atom in enumerate(smaller):
        for index, block in enumerate(remaining):
            if block == [atom]:
                aligned[position] = remaining.pop(index)
                break

    for position, atom in enumerate(smaller):
        if position in aligned:
            continue
        key = _positive(atom)
        index = next(
            index
            for index, block in enumerate(remaining)
            if _product(_positive(part) for part in block) == key
        )
        aligned[position] = remaining.pop(index)

    return [aligned[position] for position in range(len(smaller))]


def _blocks(
    smaller: list[Sequence], larger: list[Sequence], tracker: BudgetTracker
) -> list[list[Sequence]] | None:
    """Split `larger` into one block per atom of `smaller` with matching positive parts."""
    if not smaller or not larger:
        return [] if not smaller and not larger else None
    if len(smaller) > len(larger):
        return None

    wanted = Counter(_positive(atom) for atom in smaller)
    partitions: Iterable[list[list[Sequence]]]
    if len(smaller) == len(larger):
        partitions = [[[atom] for atom in larger]]
    else:
        distinct = sorted(set(larger))
        labels = sorted(distinct.index(atom) for atom in larger)
        partitions = (
            [[distinct[label] for label in part] for part in parts]
            for parts in multiset_partitions(labels, len(smaller))
        )

    for partition in partitions:
        tracker.tick()
        keys = Counter(_product(_positive(part) for part in block) for block in partition)
        if keys == wanted:
            return _align(smaller, partition)
    return None


def plus_le(first: Factorization, second: Factorization, budget: Budget | None = None) -> bool:
    """Whether first+ <= second+ in the refinement order on positive parts."""
    tracker = (budget or Budget()).tracker("plus_le")
    return _blocks(_nonzero_atoms(first), _nonzero_atoms(second), tracker) is not None


def _plus_key(z: Factorization) -> tuple[Sequence, ...]:
    return tuple(sorted(_positive(atom) for atom in _nonzero_atoms(z)))


def _check_element(element: Sequence) -> None:
    if element.ambient.is_cyclic:
        raise UnsupportedAmbientError(
            f"Chains need sequences over the integers, got {element.ambient}"
        )


def _complete(
    element: Sequence, atoms: AtomSet, budget: Budget, operation: str
) -> FactorizationSet:
    found = factorizations(element, atoms, budget)
    found.require_complete(operation)
    return found


def upsilon(
    element: Sequence, atoms: AtomSet, budget: Budget | None = None
) -> FactorizationSet:
    """Factorizations whose positive parts are maximal in the refinement order."""
    _check_element(element)
    budget = budget or Budget()
    found = _complete(element, atoms, budget, "upsilon")
    if not found.all:
        return found

    positive, _, zeros = split_signs(element)
    if found.lengths.max == len(positive) + zeros:
        LOGGER.debug(f"({element}) reaches |B+| + v0; upsilon is the longest factorizations")
        return found.of_length(found.lengths.max)

    tracker = budget.tracker("upsilon")
    representatives: dict[tuple[Sequence, ...], Factorization] = {}
    for z in found:
        representatives.setdefault(_plus_key(z), z)

    maximal: set[tuple[Sequence, ...]] = set()
    for key, z in representatives.items():
        above = (
            other
            for other_key, other in representatives.items()
            if len(other_key) > len(key)
        )
        if not any(
            _blocks(_nonzero_atoms(z), _nonzero_atoms(other), tracker) is not None
            for other in above
        ):
            maximal.add(key)

    return FactorizationSet(
        element=element,
        all=tuple(z for z in found if _plus_key(z) in maximal),
        complete=True,
    )


def _longest_factorization(element: Sequence, atoms: AtomSet, budget: Budget) -> Factorization:
    found = _complete(element, atoms, budget, "chain refactoring")
    if not found.all:
        raise ZsfDataError(f"({element}) has no factorization over the atom catalogue")
    return found.of_length(found.lengths.max).all[0]


def _pair_factorization(
    pair: PairSequence, catalogue: AtomSet, budget: Budget
) -> list[PairSequence]:
    """An atom decomposition of the pair with as few asymmetric atoms as possible."""
    found = _complete(pair.embed(), catalogue, budget, "pair factorization")

    def asymmetric(z: Factorization) -> int:
        return sum(not PairSequence.from_atom(atom).is_symmetric for atom in z.atom_list())

    best = min(found, key=lambda z: (asymmetric(z), z.sort_key))
    return [PairSequence.from_atom(atom) for atom in best.atom_list()]


def _subset_sums(
    vectors: list[Vector], indices: range, limit: int, tracker: BudgetTracker
) -> dict[Vector, tuple[int, ...]]:
    table: dict[Vector, tuple[int, ...]] = {}
    width = len(vectors[0])
    for size in range(1, min(limit, len(indices)) + 1):
        for chosen in combinations(indices, size):
            tracker.tick()
            total = tuple(sum(vectors[i][k] for i in chosen) for k in range(width))
            table.setdefault(total, chosen)
    return table


def symmetric_selection(
    vectors: list[Vector], limit: int, budget: Budget | None = None
) -> tuple[int, ...] | None:
    """Smallest nonempty index set of at most `limit` vectors summing to zero.

    Meet in the middle: the two halves are tabulated separately and joined on
    opposite sums. Ties go to the lexicographically smallest index tuple.
    """
    if not vectors:
        return None
    tracker = (budget or Budget()).tracker("symmetric_selection")
    half = len(vectors) // 2
    first = _subset_sums(vectors, range(half), limit, tracker)
    second = _subset_sums(vectors, range(half, len(vectors)), limit, tracker)
    zero = tuple(0 for _ in vectors[0])

    candidates = [first.get(zero), second.get(zero)]
    for total, chosen in first.items():
        other = second.get(tuple(-value for value in total))
        if other is not None:
            candidates.append(chosen + other)

    found = [chosen for chosen in candidates if chosen and len(chosen) <= limit]
    if not found:
        return None
    return min(found, key=lambda chosen: (len(chosen), chosen))


@dataclass
class _Walk:
    element: Sequence
    atoms: AtomSet
    budget: Budget
    negatives: list[int]
    limit: int
    catalogue: AtomSet = field(init=False)

    def __post_init__(self) -> None:
        self.catalogue = _pair_catalogue(self.negatives, self.budget)

    def step(
        self, current: Factorization, target: Factorization, tracker: BudgetTracker
    ) -> Factorization:
        smaller = _nonzero_atoms(current)
        blocks = _blocks(smaller, _nonzero_atoms(target), tracker)
        if blocks is None:
            raise ZsfDataError(f"{target} does not dominate {current}")

        pending: list[tuple[int, PairSequence]] = []
        for position, (atom, block) in enumerate(zip(smaller, blocks)):
            pair = PairSequence(
                left=_negative(atom), right=_product(_negative(part) for part in block)
            )
            for e_atom in _pair_factorization(pair, self.catalogue, self.budget):
                if not e_atom.is_symmetric:
                    pending.append((position, e_atom))

        if not pending:
            raise ZsfDataError(f"{current} differs from {target} without an asymmetric pair")

        vectors = [e_atom.difference(self.negatives).coordinates for _, e_atom in pending]
        chosen = symmetric_selection(vectors, self.limit, self.budget)
        if chosen is None:
            raise ZsfDataError(
                f"No symmetric batch of at most {self.limit} pair atoms",
                data={"pairs": [str(e_atom) for _, e_atom in pending]},
            )

        swaps: dict[int, list[PairSequence]] = {}
        for index in chosen:
            position, e_atom = pending[index]
            swaps.setdefault(position, []).append(e_atom)

        following = current
        for position, pairs in sorted(swaps.items()):
            atom = smaller[position]
            released = _product(pair.left for pair in pairs)
            received = _product(pair.right for pair in pairs)
            block = atom / released * received
            following = following.without_atom(atom) * _longest_factorization(
                block, self.atoms, self.budget
            )
        return following


def _chain_setup(
    element: Sequence, z: Factorization, atoms: AtomSet, budget: Budget | None
) -> tuple[Budget, list[int]]:
    _check_element(element)
    if z.product != element:
        raise ZsfValidationError(f"{z} is not a factorization of ({element})")
    return budget or Budget(), [g for g in element.support if g < 0]


def _record(steps: list[Factorization], seen: set[Factorization], following: Factorization) -> None:
    if following in seen:
        raise ZsfDataError(
            f"Chain construction revisited {following}",
            data={"steps": [str(step) for step in steps]},
        )
    seen.add(following)
    steps.append(following)


def chain_to_upsilon(
    element: Sequence, z: Factorization, atoms: AtomSet, budget: Budget | None = None
) -> Chain:
    """Nondecreasing chain from z to a factorization in upsilon(B).

    Each round picks the first member of upsilon(B), in canonical order,
    whose positive parts coarsen to those of the current factorization, and
    swaps one symmetric-product batch of pair atoms towards it.
    """
    budget, negatives = _chain_setup(element, z, atoms, budget)
    maximal = upsilon(element, atoms, budget)
    members = set(maximal.all)
    if not negatives or z in members:
        return Chain(steps=(z,), bound=2, metadata={"target": str(z)}).validate()

    davenport = relative_davenport(negatives, budget)
    m = -element.min()
    bound = max(m * davenport, 2)
    walk = _Walk(element=element, atoms=atoms, budget=budget, negatives=negatives, limit=davenport)
    tracker = budget.tracker("chain_to_upsilon")

    steps, seen = [z], {z}
    targets: list[str] = []
    current = z
    while current not in members:
        target = next(
            (
                y
                for y in maximal
                if _blocks(_nonzero_atoms(current), _nonzero_atoms(y), tracker) is not None
            ),
            None,
        )
        if target is None:
            raise ZsfDataError(f"No element of upsilon dominates {current}")
        targets.append(str(target))
        current = walk.step(current, target, tracker)
        _record(steps, seen, current)

    chain = Chain(
        steps=tuple(steps),
        bound=bound,
        metadata={
            "choice": "first dominating element of upsilon in canonical order",
            "targets": targets,
            "relative_davenport": davenport,
            "m": m,
        },
    ).validate()
    if chain.lengths != sorted(chain.lengths):
        raise ZsfDataError("Chain to upsilon lost length", data=chain.to_json())
    return chain


def equal_plus_chain(
    element: Sequence,
    z: Factorization,
    y: Factorization,
    atoms: AtomSet,
    budget: Budget | None = None,
) -> Chain:
    """Constant-length chain between two members of upsilon(B) with equal positive parts."""
    budget, negatives = _chain_setup(element, z, atoms, budget)
    if y.product != element:
        raise ZsfValidationError(f"{y} is not a factorization of ({element})")
    if _plus_key(z) != _plus_key(y):
        raise ZsfValidationError(f"Positive parts of {z} and {y} differ")

    members = set(upsilon(element, atoms, budget).all)
    outside = [str(w) for w in (z, y) if w not in members]
    if outside:
        raise ZsfValidationError(
            f"Not maximal in the refinement order: {', '.join(outside)}"
        )
    if z == y or not negatives:
        return Chain(steps=(z,), bound=2).validate()

    davenport = relative_davenport(negatives, budget)
    walk = _Walk(element=element, atoms=atoms, budget=budget, negatives=negatives, limit=davenport)
    tracker = budget.tracker("equal_plus_chain")

    steps, seen = [z], {z}
    current = z
    while current != y:
        current = walk.step(current, y, tracker)
        _record(steps, seen, current)

    chain = Chain(
        steps=tuple(steps),
        bound=max(davenport, 2),
        metadata={"relative_davenport": davenport},
    ).validate()
    if len(set(chain.lengths)) != 1:
        raise ZsfDataError("Equal positive part chain changed length", data=chain.to_json())
    return chain


@dataclass(frozen=True)
class CaseAWitness:
    """Heavy negatives that cannot generate the positive support."""

    subset: tuple[int, ...]
    factorization: Factorization
    positive_gcd: int
    subset_gcd: int

    def to_json(self) -> dict[str, Any]:
        return {
            "subset": list(self.subset),
            "factorization": str(self.factorization),
            "positive_gcd": self.positive_gcd,
            "subset_gcd": self.subset_gcd,
        }


@dataclass(frozen=True)
class M2Result:
    chain: Chain | None = None
    witness: CaseAWitness | None = None

    def to_json(self) -> dict[str, Any]:
        if self.witness is not None:
            return {"case": "a", "witness": self.witness.to_json()}
        return {"case": "b", "chain": self.chain.to_json() if self.chain else None}


def _heavy_negatives(z: Factorization, threshold: int) -> list[int]:
    return sorted(
        {
            element
            for atom, _ in z.atoms
            for element, count in atom.terms
            if element < 0 and count >= threshold
        }
    )


def _exchange(
    source: Counter[int],
    donor: Counter[int],
    a: int,
    pool: Counter[int],
    excluded: set[int],
    need: int,
) -> None:
    """Trade c^|a| from the source for a^|c| from the donor, smallest |c| first."""
    gathered = 0
    while gathered < need:
        c = next(
            (
                c
                for c in sorted(pool, reverse=True)
                if c not in excluded and pool[c] >= -a and donor[a] >= -c
            ),
            None,
        )
        if c is None:
            raise ZsfDataError(f"No exchange partner for {a}", data={"pool": dict(pool)})
        pool[c] -= -a
        source[c] -= -a
        source[a] += -c
        donor[a] -= -c
        donor[c] += -a
        gathered += -c


def _swap_round(
    current: Factorization, heavy: list[int], m: int, atoms: AtomSet, budget: Budget
) -> Factorization:
    atom_list = current.atom_list()
    u0 = next(atom for atom in atom_list if len(_positive(atom)) >= 2)
    low = [a for a in sorted(heavy, reverse=True) if u0.count(a) <= m - 2]
    if not low:
        raise ZsfDataError(f"({u0}) carries every heavy negative", data={"heavy": heavy})

    source = Counter(u0.counts())
    pool = Counter(_negative(u0).counts())
    for a in heavy:
        if u0.count(a) >= m - 1:
            pool[a] -= m - 1

    remaining = current.without_atom(u0)
    donors: dict[Sequence, Counter[int]] = {}
    for a in low:
        donor = next(
            (atom for atom in sorted(remaining.counts()) if atom.count(a) >= 2 * m - 1), None
        )
        if donor is None:
            raise ZsfDataError(f"No atom of {current} holds {a} with multiplicity {2 * m - 1}")
        counts = donors.setdefault(donor, Counter(donor.counts()))
        _exchange(source, counts, a, pool, set(low), m - 1)

    following = remaining
    for donor in donors:
        following = following.without_atom(donor)
    for counts in [source, *donors.values()]:
        block = Sequence.from_counts(counts)
        following = following * _longest_factorization(block, atoms, budget)
    return following


def m2_chain(
    element: Sequence, z: Factorization, atoms: AtomSet, budget: Budget | None = None
) -> M2Result:
    """Strictly increasing chain to length |B+| with steps at most M^2.

    When the negatives that occur heavily in some atom cannot generate the
    positive support, the current factorization is returned as a witness
    instead.
    """
    budget, negatives = _chain_setup(element, z, atoms, budget)
    positive, _, zeros = split_signs(element)
    if zeros:
        raise ZsfValidationError(f"({element}) contains 0")
    if not negatives:
        raise ZsfValidationError("M^2 chains need a nonempty element")
    m = -element.min()
    if m < 2:
        raise ZsfValidationError(f"M^2 chains need |min supp(B)| >= 2, got {m}")
    if positive.min() < m * (m * m - 1):
        raise ZsfValidationError(
            f"M^2 chains need positives of at least {m * (m * m - 1)}, got {positive.min()}"
        )

    tracker = budget.tracker("m2_chain")
    positive_gcd = gcd_all(list(positive.support))
    steps, seen = [z], {z}
    current = z
    while len(current) < len(positive):
        tracker.tick()
        heavy = _heavy_negatives(current, 2 * m - 1)
        subset_gcd = gcd_all(heavy) if heavy else 0
        if not subset_gcd or positive_gcd % subset_gcd:
            LOGGER.debug(f"{current}: heavy negatives {heavy} miss the positive support")
            return M2Result(
                witness=CaseAWitness(
                    subset=tuple(heavy),
                    factorization=current,
                    positive_gcd=positive_gcd,
                    subset_gcd=subset_gcd,
                )
            )

        following = _swap_round(current, heavy, m, atoms, budget)
        if len(following) <= len(current):
            raise ZsfDataError(
                f"Swap round did not lengthen {current}", data={"next": str(following)}
            )
        _record(steps, seen, following)
        current = following

    chain = Chain(steps=tuple(steps), bound=m * m, metadata={"m": m}).validate()
    return M2Result(chain=chain)


@dataclass(frozen=True)
class BreakapartReport:
    r: Sequence
    r_prime: Sequence
    n: int
    m: int

    def to_json(self) -> dict[str, Any]:
        return {"R": str(self.r), "R_prime": str(self.r_prime), "n": self.n, "M": self.m}


def _supersets(required: tuple[int, ...], optional: list[int]) -> Iterator[tuple[int, ...]]:
    for size in range(len(optional) + 1):
        for extra in combinations(optional, size):
            yield tuple(sorted(required + extra))


def breakapart_analysis(atom: Sequence, l: int, m: int | None = None) -> BreakapartReport:
    """Heavy negative terms of an atom whose positive part has a proper subsum L.

    M defaults to |min supp(U)|; pass the ground's value when it is smaller.
    """
    _check_element(atom)
    if not is_atom(atom):
        raise ZsfValidationError(f"({atom}) is not an atom")
    positive, negative, _ = split_signs(atom)
    if not negative:
        raise ZsfValidationError(f"({atom}) has no negative terms")

    m = -negative.min() if m is None else m
    if m < 2:
        raise InapplicableError(f"Break-apart hypotheses are unsatisfiable for M={m}")
    if len(positive) < 2:
        raise ZsfValidationError(f"({atom}) needs at least two positive terms")
    total = sigma(positive)
    if l == total or l not in subsequence_sums(positive):
        raise ZsfValidationError(f"{l} is not a proper subsum of ({positive})")
    floor = (m - 1) ** 2
    if l < floor or total < l + floor:
        raise ZsfValidationError(
            f"Need {floor} <= L <= sigma(U+) - {floor}, got L={l}, sigma(U+)={total}"
        )

    r = Sequence.from_counts({g: c for g, c in negative.terms if c >= m - 1})
    if not r:
        raise ZsfDataError(f"({atom}) has no negative term of multiplicity {m - 1}")

    sums = subsequence_sums(negative)
    for a in r.support:
        hits = sorted(s for s in sums if (s + l) % a == 0)
        if hits:
            raise ZsfDataError(
                f"-{l} + {a}Z meets the subsums of ({negative})",
                data={"a": a, "subsums": hits},
            )

    optional = [g for g in negative.support if g not in r.support]
    for support in _supersets(r.support, optional):
        n = gcd_all(list(support))
        outside = len(negative) - len(negative.restricted(support))
        if l % n and outside <= n - 2:
            LOGGER.debug(f"Break-apart of ({atom}) at {l}: n={n}")
            return BreakapartReport(r=r, r_prime=negative.restricted(support), n=n, m=m)

    raise ZsfDataError(f"No R' found for ({atom}) at {l}", data={"R": str(r)})
