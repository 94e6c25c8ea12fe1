import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Any

from .atoms import AtomSet
from .error import UnsupportedAmbientError, ZsfDataError, ZsfValidationError
from .factorize import FactorizationSet, factorizations
from .groundset import (
    Ambient,
    Factorization,
    GroundSpec,
    Sequence,
    distance,
    sigma,
    split_signs,
)
from .invariants import delta_of_set
from .models import Budget

LOGGER = logging.getLogger(__name__)


class TransferKind(str, Enum):
    IDENTITY = "identity"
    CYCLIC = "cyclic"
    PSI = "psi"

    def __str__(self) -> str:
        return self.value


def _require_integers(element: Sequence, operation: str) -> None:
    if element.ambient.is_cyclic:
        raise UnsupportedAmbientError(
            f"{operation} needs a sequence over the integers, got {element.ambient}"
        )


def _require_zero_sum(element: Sequence) -> None:
    if sigma(element) != 0:
        raise ZsfValidationError(
            f"({element}) is not a zero-sum sequence: it sums to {sigma(element)}"
        )


def transfer_to_cyclic(element: Sequence, n: int) -> Sequence:
    """Drop the (-n) terms and reduce every other term modulo n."""
    _require_integers(element, "Cyclic transfer")
    if n < 1:
        raise ZsfValidationError(f"Modulus must be positive, got {n}")
    _require_zero_sum(element)

    others = sorted(g for g in element.support if g < 0 and g != -n)
    if others:
        raise ZsfValidationError(
            f"Cyclic transfer needs -{n} as the only negative value, "
            f"but ({element}) also contains {others}"
        )
    return Sequence.from_counts(
        {g: c for g, c in element.terms if g >= 0}, ambient=Ambient.cyclic(n)
    )


@dataclass(frozen=True)
class ClassGroupReport:
    """The subgroup of Z/nZ generated by the classes of the positives."""

    n: int
    residues: tuple[int, ...]
    generator: int

    @property
    def order(self) -> int:
        return self.n // self.generator

    @property
    def full(self) -> bool:
        return self.generator == 1

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "residues": list(self.residues),
            "generator": self.generator,
            "order": self.order,
            "full": self.full,
        }


def class_group_report(spec: GroundSpec, n: int) -> ClassGroupReport:
    if n < 1:
        raise ZsfValidationError(f"Modulus must be positive, got {n}")
    negatives = spec.negatives
    if negatives and negatives != [-n]:
        raise ZsfValidationError(
            f"Ground {spec} has negatives {negatives}, expected only -{n}"
        )

    # one period of every progression covers all of its residues
    tops = [g for g in spec.finite if g > 0]
    tops += [ap.start + n * ap.step for ap in spec.aps]
    residues = sorted({g % n for g in spec.positives_up_to(max(tops, default=0))})
    generator = math.gcd(n, *residues)
    LOGGER.debug(f"Positive residues {residues} generate {generator}Z/{n}Z")
    return ClassGroupReport(n=n, residues=tuple(residues), generator=generator)


def _require_psi(d: int) -> None:
    if d < 1:
        raise ZsfValidationError(f"Collapse modulus must be positive, got {d}")


def psi_collapse(element: Sequence, d: int) -> Sequence:
    """Replace every positive term kd by d^k."""
    _require_integers(element, "Psi collapse")
    _require_psi(d)
    counts: Counter[int] = Counter()
    for g, c in element.terms:
        if g > 0 and g % d == 0:
            counts[d] += c * (g // d)
        else:
            counts[g] += c
    return Sequence.from_counts(counts)


def psi_shift(element: Sequence, d: int) -> int:
    """sigma(F)/d - |F| for the part F of the sequence inside dN."""
    _require_integers(element, "Psi collapse")
    _require_psi(d)
    return sum(c * (g // d - 1) for g, c in element.terms if g > 0 and g % d == 0)


def _psi_atom(atom: Sequence, d: int) -> Factorization:
    positive, negative, _ = split_signs(atom)
    multiples = [g for g in positive.support if g % d == 0]
    if not multiples:
        return Factorization.of([atom])
    if len(positive) != 1:
        raise ZsfDataError(
            f"Atom ({atom}) has a term in {d}N next to other positive terms",
            data={"atom": str(atom), "d": d},
        )
    if set(negative.support) - {-d, -1}:
        raise ZsfValidationError(
            f"Psi collapse needs negatives in {{-{d}, -1}}, got ({atom})"
        )

    ones = negative.count(-1)
    if ones % d:
        raise ZsfDataError(f"Atom ({atom}) has {ones} terms -1, not a multiple of {d}")
    pieces: Counter[Sequence] = Counter()
    pieces[Sequence.from_counts({d: 1, -1: d})] += ones // d
    if d > 1:
        pieces[Sequence.from_counts({d: 1, -d: 1})] += negative.count(-d)
    return Factorization.from_counts(pieces)


def psi_bar(z: Factorization, d: int) -> Factorization:
    """Apply the collapse atom by atom, refactoring the collapsed atoms uniquely."""
    _require_psi(d)
    result = Factorization.of([])
    for atom, count in z.atoms:
        _require_integers(atom, "Psi collapse")
        image = _psi_atom(atom, d)
        for _ in range(count):
            result = result * image
    return result


def apply_transfer(element: Sequence, kind: TransferKind, parameter: int) -> Sequence:
    match kind:
        case TransferKind.IDENTITY:
            return element
        case TransferKind.CYCLIC:
            return transfer_to_cyclic(element, parameter)
        case TransferKind.PSI:
            return psi_collapse(element, parameter)
    raise ZsfValidationError(f"Unknown transfer kind {kind}")


@dataclass
class FidelityReport:
    kind: TransferKind
    element: Sequence
    image: Sequence
    shift: int
    source_lengths: tuple[int, ...]
    image_lengths: tuple[int, ...]
    checks: dict[str, bool] = field(default_factory=dict)
    counterexamples: list[dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def fail(self, check: str, **witness: Any) -> None:
        self.checks[check] = False
        self.counterexamples.append({"check": check, **witness})

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": str(self.kind),
            "element": str(self.element),
            "image": str(self.image),
            "shift": self.shift,
            "source_lengths": list(self.source_lengths),
            "image_lengths": list(self.image_lengths),
            "checks": self.checks,
            "passed": self.passed,
            "counterexamples": self.counterexamples,
        }


def _layer_distances(found: FactorizationSet) -> dict[tuple[int, int], int]:
    layers = {length: found.of_length(length).all for length in found.lengths}
    return {
        (k, l): min(
            distance(first, second) for first in layers[k] for second in layers[l]
        )
        for k, l in combinations(sorted(layers), 2)
    }


def verify_transfer_fidelity(
    element: Sequence,
    kind: TransferKind,
    parameter: int,
    atoms_source: AtomSet,
    atoms_image: AtomSet,
    budget: Budget | None = None,
) -> FidelityReport:
    """Compare sets of lengths and factorization distances across a transfer.

    The collapse shifts every length by sigma(F)/d - |F|; for it the layer
    distances are replaced by surjectivity of the factorization map and the
    comparison of successive distances.
    """
    kind = TransferKind(kind)
    image = apply_transfer(element, kind, parameter)
    budget = budget or Budget()
    source = factorizations(element, atoms_source, budget)
    source.require_complete("verify_transfer_fidelity")
    target = factorizations(image, atoms_image, budget)
    target.require_complete("verify_transfer_fidelity")

    shift = psi_shift(element, parameter) if kind == TransferKind.PSI else 0
    report = FidelityReport(
        kind=kind,
        element=element,
        image=image,
        shift=shift,
        source_lengths=tuple(source.lengths),
        image_lengths=tuple(target.lengths),
        checks={"lengths": True},
    )

    shifted = tuple(length + shift for length in source.lengths)
    if shifted != report.image_lengths:
        report.fail("lengths", expected=list(shifted), found=list(report.image_lengths))

    if kind == TransferKind.PSI:
        report.checks["surjective"] = True
        image_set = set(target.all)
        mapped: set[Factorization] = set()
        for z in source:
            collapsed = psi_bar(z, parameter)
            if collapsed not in image_set:
                report.fail(
                    "surjective", z=str(z), image=str(collapsed), reason="not a factorization"
                )
            if len(collapsed) != len(z) + shift:
                report.fail("surjective", z=str(z), image=str(collapsed), reason="length")
            mapped.add(collapsed)
        for missing in sorted(image_set - mapped):
            report.fail("surjective", missing=str(missing))

        source_delta, image_delta = delta_of_set(source), delta_of_set(target)
        report.checks["successive_distance"] = source_delta <= image_delta
        if source_delta > image_delta:
            report.fail(
                "successive_distance", source=source_delta, image=image_delta
            )
    else:
        report.checks["layer_distances"] = True
        image_layers = _layer_distances(target)
        for (k, l), value in _layer_distances(source).items():
            other = image_layers.get((k + shift, l + shift))
            if other != value:
                report.fail("layer_distances", k=k, l=l, source=value, image=other)

    LOGGER.debug(f"Transfer {kind} of ({element}): passed={report.passed}")
    return report
