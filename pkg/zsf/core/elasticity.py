import logging
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any

from ..settings import get_settings
from .atoms import AtomSet, enumerate_atoms, negative_completions
from .error import BudgetExceededError, ZsfValidationError
from .factorize import LengthSet, factorizations, zero_sum_elements
from .groundset import GroundSpec, Sequence
from .hilbert import hilbert_basis, max_pair_ratio
from .models import Budget, Certainty
from .structure import structure_condition
from .utils import format_rational, lcm_all, multiset_indices

LOGGER = logging.getLogger(__name__)


class KappaKind(str, Enum):
    SINGLETON = "singleton"
    RESIDUE = "residue"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, order=True)
class KappaClass:
    """A class of positive ground elements.

    Elements below the bound are their own class; larger ones are grouped by
    their residue modulo lcm(G0-) and represented by the smallest member.
    """

    representative: int
    kind: KappaKind
    modulus: int

    def contains(self, element: int, bound: int) -> bool:
        if self.kind == KappaKind.SINGLETON:
            return element == self.representative
        return element >= bound and (element - self.representative) % self.modulus == 0

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": str(self.kind),
            "representative": self.representative,
            "modulus": self.modulus,
        }


def _negatives_of(spec: GroundSpec) -> list[int]:
    negatives = spec.negatives
    if not negatives or spec.min_positive is None:
        raise ZsfValidationError(
            f"Ground spec {spec} is not condensed with finitely many negatives"
        )
    return negatives


def kappa_bound(spec: GroundSpec) -> int:
    """|G0-| * |min G0-| * lcm(G0-)."""
    negatives = _negatives_of(spec)
    return len(negatives) * -min(negatives) * lcm_all(negatives)


def kappa_classes(spec: GroundSpec) -> list[KappaClass]:
    negatives = _negatives_of(spec)
    modulus = lcm_all(negatives)
    bound = kappa_bound(spec)

    classes = [
        KappaClass(representative=g, kind=KappaKind.SINGLETON, modulus=modulus)
        for g in spec.members(1, bound - 1)
    ]

    # every residue a member reaches shows up within one period of each
    # progression past the bound
    horizon = max([bound] + list(spec.finite) + [ap.start for ap in spec.aps])
    horizon += modulus * max([1] + [ap.step for ap in spec.aps])
    seen: set[int] = set()
    for g in spec.members(bound, horizon):
        if g % modulus not in seen:
            seen.add(g % modulus)
            classes.append(
                KappaClass(representative=g, kind=KappaKind.RESIDUE, modulus=modulus)
            )

    LOGGER.debug(f"{len(classes)} kappa classes for {spec} (bound {bound})")
    return sorted(classes)


@dataclass(frozen=True)
class KappaGenerator:
    classes: tuple[int, ...]
    lift: Sequence
    completion: Sequence

    def to_json(self) -> dict[str, Any]:
        return {
            "classes": list(self.classes),
            "lift": str(self.lift),
            "atom": str(self.completion),
        }


def kappa_generators(
    spec: GroundSpec,
    budget: Budget | None = None,
    classes: list[KappaClass] | None = None,
) -> list[KappaGenerator]:
    """Class sequences that are positive parts of atoms.

    A class sequence qualifies when its lift by representatives extends to an
    atom with a negative part over G0-.
    """
    negatives = _negatives_of(spec)
    classes = classes if classes is not None else kappa_classes(spec)
    tracker = (budget or Budget()).tracker("kappa_generators")

    generators = []
    for indices in multiset_indices(len(classes), -min(negatives)):
        tracker.tick()
        lift = Sequence.of(classes[index].representative for index in indices)
        completion = next(
            negative_completions(lift, negatives, lift.max(), tracker), None
        )
        if completion is not None:
            generators.append(
                KappaGenerator(classes=indices, lift=lift, completion=completion)
            )

    LOGGER.debug(f"{len(generators)} kappa generators for {spec}")
    return generators


def relation_matrix(
    columns: list[dict[Any, int]], rows: list[Any]
) -> list[list[int]]:
    return [[column.get(row, 0) for column in columns] for row in rows]


class Acceptance(str, Enum):
    ACCEPTED = "accepted"
    NOT_ACCEPTED = "not accepted"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value

    def to_json(self) -> bool | str:
        if self == Acceptance.UNKNOWN:
            return "unknown"
        return self == Acceptance.ACCEPTED


@dataclass(frozen=True)
class ElasticityResult:
    rho: Fraction
    accepted: Acceptance
    method: str
    kappa_classes: int
    generators: int
    witness: tuple[tuple[int, ...], tuple[int, ...]]

    def to_json(self) -> dict[str, Any]:
        return {
            "rho": format_rational(self.rho),
            "accepted": self.accepted.to_json(),
            "method": self.method,
            "kappa_classes": self.kappa_classes,
            "generators": self.generators,
            "witness": {"left": list(self.witness[0]), "right": list(self.witness[1])},
        }


def _best_ratio(
    matrix: list[list[int]], budget: Budget | None
) -> tuple[Fraction, tuple[tuple[int, ...], tuple[int, ...]], str]:
    if len(matrix[0]) <= get_settings().hilbert_max_generators:
        basis = hilbert_basis(matrix, budget)
        best = basis.best_ratio()
        if best is not None and basis.complete:
            ratio, pair = best
            return ratio, (pair.left, pair.right), "hilbert"
        LOGGER.debug("Hilbert basis incomplete, falling back to the simplex")

    optimum = max_pair_ratio(matrix)
    return optimum.value, (optimum.left, optimum.right), "simplex"


def _acceptance(spec: GroundSpec, rho: Fraction) -> Acceptance:
    if spec.is_finite or rho == 1:
        return Acceptance.ACCEPTED

    negatives = spec.negatives
    if (
        len(negatives) == 2
        and -1 in negatives
        and min(negatives) <= -2
        and spec.contains(1)
        and structure_condition(spec)
    ):
        return Acceptance.NOT_ACCEPTED
    return Acceptance.UNKNOWN


def exact_elasticity(spec: GroundSpec, budget: Budget | None = None) -> ElasticityResult:
    """rho(G0) as an exact rational.

    Finite grounds use the atoms themselves as generators; grounds with
    infinitely many positives go through the kappa classes.
    """
    stripped = GroundSpec(
        finite=tuple(g for g in spec.finite if g != 0),
        aps=spec.aps,
    )
    if not stripped.is_condensed or not stripped.negatives:
        raise ZsfValidationError(f"Ground spec {spec} is not condensed")

    if stripped.is_finite:
        ground = stripped.finite_members()
        atoms = enumerate_atoms(ground, budget)
        columns = [atom.counts() for atom in atoms]
        matrix = relation_matrix(columns, ground)
        class_count = 0
    else:
        classes = kappa_classes(stripped)
        generators = kappa_generators(stripped, budget, classes)
        columns = [dict(Counter(generator.classes)) for generator in generators]
        matrix = relation_matrix(columns, list(range(len(classes))))
        class_count = len(classes)

    rho, witness, method = _best_ratio(matrix, budget)
    return ElasticityResult(
        rho=rho,
        accepted=_acceptance(stripped, rho),
        method=method,
        kappa_classes=class_count,
        generators=len(matrix[0]),
        witness=witness,
    )


@dataclass(frozen=True)
class UnionOfLengths:
    """V_k(G0), the union of all sets of lengths containing k."""

    k: int
    lengths: LengthSet
    elements: int

    @property
    def rho_k(self) -> int:
        return self.lengths.max

    @property
    def lambda_k(self) -> int:
        return self.lengths.min

    def to_json(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "union": list(self.lengths),
            "rho_k": self.rho_k,
            "lambda_k": self.lambda_k,
            "elements": self.elements,
            "status": str(
                Certainty.EXACT if self.lengths.complete else Certainty.LOWER_BOUND
            ),
        }


def _finite_atoms(ground: Iterable[int] | AtomSet, budget: Budget | None) -> AtomSet:
    if isinstance(ground, AtomSet):
        return ground
    return enumerate_atoms(ground, budget)


def products_of_atoms(atoms: AtomSet, k: int) -> list[Sequence]:
    """Distinct products of exactly k atoms."""
    catalogue = list(atoms)
    products = set()
    for indices in multiset_indices(len(catalogue), k, min_size=k):
        product = Sequence.empty(atoms.ambient)
        for index in indices:
            product = product * catalogue[index]
        products.add(product)
    return sorted(products)


def v_k(
    ground: Iterable[int] | AtomSet, k: int, budget: Budget | None = None
) -> UnionOfLengths:
    if k < 1:
        raise ZsfValidationError(f"Need k >= 1, got {k}")
    atoms = _finite_atoms(ground, budget)

    union: set[int] = set()
    complete = True
    elements = products_of_atoms(atoms, k)
    for element in elements:
        found = factorizations(element, atoms, budget)
        complete = complete and found.complete
        union.update(found.lengths)

    return UnionOfLengths(
        k=k, lengths=LengthSet.of(union, complete=complete), elements=len(elements)
    )


def rho_k(ground: Iterable[int] | AtomSet, k: int, budget: Budget | None = None) -> int:
    return v_k(ground, k, budget).rho_k


def lambda_k(
    ground: Iterable[int] | AtomSet, k: int, budget: Budget | None = None
) -> int:
    return v_k(ground, k, budget).lambda_k


@dataclass(frozen=True)
class BallElasticity:
    value: Fraction
    element: Sequence | None
    max_length: int
    complete: bool

    def to_json(self) -> dict[str, Any]:
        return {
            "value": format_rational(self.value),
            "element": str(self.element) if self.element else None,
            "max_length": self.max_length,
            "status": str(Certainty.LOWER_BOUND),
            "complete": self.complete,
        }


def elasticity_lower_bound(
    ground: Iterable[int] | AtomSet, max_length: int, budget: Budget | None = None
) -> BallElasticity:
    """sup rho(B) over every zero-sum B with |B| <= max_length."""
    atoms = _finite_atoms(ground, budget)
    best, witness = Fraction(1), None
    complete = True
    try:
        for element in zero_sum_elements(atoms.ground, max_length, budget):
            found = factorizations(element, atoms, budget)
            complete = complete and found.complete
            if found.all and found.lengths.elasticity > best:
                best, witness = found.lengths.elasticity, element
    except BudgetExceededError:
        complete = False

    return BallElasticity(
        value=best, element=witness, max_length=max_length, complete=complete
    )


def ground_delta_set(
    ground: Iterable[int] | AtomSet, k: int, budget: Budget | None = None
) -> set[int]:
    """Union of Delta(L(B)) over products of at most k atoms."""
    atoms = _finite_atoms(ground, budget)
    deltas: set[int] = set()
    for size in range(1, k + 1):
        for element in products_of_atoms(atoms, size):
            deltas.update(factorizations(element, atoms, budget).lengths.delta)
    return deltas
