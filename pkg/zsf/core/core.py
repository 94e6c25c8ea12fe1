import inspect
import logging
import random
from dataclasses import dataclass
from typing import Any

from ..settings import Settings
from .atoms import AtomSet, enumerate_atoms, enumerate_cyclic_atoms
from .chains import (
    breakapart_analysis,
    chain_to_upsilon,
    e_atoms,
    m2_chain,
    relative_davenport,
    upsilon,
)
from .elasticity import elasticity_lower_bound, exact_elasticity, v_k
from .error import ZsfValidationError
from .factorize import FactorizationSet, LengthSet, factorizations, z_k, zero_sum_elements
from .groundset import Factorization, GroundSpec, Sequence, TwoSidedSpec
from .invariants import (
    ball_bounds,
    build_catenary_chain,
    build_monotone_chain_delta,
    catenary,
    delta_of,
    monotone_catenary,
    tame_degree,
    tame_growth_witness,
)
from .models import Budget, Measure
from .structure import FAMILIES, recognize_aamp, structure_condition
from .transfer import (
    TransferKind,
    apply_transfer,
    class_group_report,
    psi_shift,
    verify_transfer_fidelity,
)

LOGGER = logging.getLogger(__name__)

INVARIANTS = ("c", "cmon", "delta")


@dataclass
class Outcome:
    results: dict[str, Any]
    complete: bool = True


def _measure(value: Any, complete: bool = True) -> dict[str, Any]:
    return Measure.of(value, complete=complete).model_dump(mode="json")


class Core:
    """Command-level entry points shared by the CLI and batch runs."""

    def __init__(self, settings: Settings) -> None:
        self.settings = settings
        self._catalogues: dict[tuple[int, ...], AtomSet] = {}

    def new_budget(
        self, max_nodes: int | None = None, max_results: int | None = None
    ) -> Budget:
        return Budget(
            max_nodes=max_nodes or self.settings.budget_nodes,
            max_results=max_results or self.settings.budget_results,
        )

    def catalogue(self, ground: GroundSpec | list[int], budget: Budget) -> AtomSet:
        members = (
            ground.finite_members() if isinstance(ground, GroundSpec) else sorted(set(ground))
        )
        key = tuple(members)
        if key not in self._catalogues:
            LOGGER.debug(f"Building atom catalogue for {members}")
            self._catalogues[key] = enumerate_atoms(members, budget)
        return self._catalogues[key]

    def _complete_factorizations(
        self, element: Sequence, atoms: AtomSet, budget: Budget, operation: str
    ) -> FactorizationSet:
        found = factorizations(element, atoms, budget)
        found.require_complete(operation)
        return found

    def _shortest(self, found: FactorizationSet) -> Factorization:
        return found.of_length(found.lengths.min).all[0]

    def atoms(
        self, ground: GroundSpec | None, budget: Budget, modulus: int | None = None
    ) -> Outcome:
        if modulus is not None:
            members = ground.finite_members() if ground is not None else None
            catalogue = enumerate_cyclic_atoms(modulus, members, budget)
        elif ground is None:
            raise ZsfValidationError("Either a ground or a modulus is required")
        else:
            catalogue = self.catalogue(ground, budget)
        return Outcome(results=catalogue.to_json())

    def factorize(
        self,
        element: Sequence,
        ground: GroundSpec,
        budget: Budget,
        lengths_only: bool = False,
        k: int | None = None,
    ) -> Outcome:
        atoms = self.catalogue(ground, budget)
        if k is None:
            found = factorizations(element, atoms, budget)
            results = found.to_json(with_factorizations=not lengths_only)
        else:
            found = z_k(element, atoms, k, budget)
            results = {"k": k, **found.to_json(with_factorizations=not lengths_only)}
        return Outcome(results=results, complete=found.complete)

    def invariants(
        self, element: Sequence, ground: GroundSpec, which: list[str], budget: Budget
    ) -> Outcome:
        atoms = self.catalogue(ground, budget)
        results: dict[str, Any] = {"element": str(element)}
        for name in which:
            if name == "c":
                results["c"] = _measure(catenary(element, atoms, budget))
            elif name == "cmon":
                results["cmon"] = _measure(monotone_catenary(element, atoms, budget))
            elif name == "delta":
                results["delta"] = _measure(delta_of(element, atoms, budget))
            elif name.startswith("tame:"):
                atom = Sequence.parse(name.removeprefix("tame:"))
                results[name] = _measure(tame_degree(element, atom, atoms, budget))
            else:
                raise ZsfValidationError(
                    f"Unknown invariant '{name}', expected one of "
                    f"{', '.join(INVARIANTS)} or tame:<atom>"
                )
        return Outcome(results=results)

    def elasticity(
        self, spec: GroundSpec, budget: Budget, max_length: int | None = None
    ) -> Outcome:
        results = exact_elasticity(spec, budget).to_json()
        complete = True
        if max_length is not None:
            ground = spec if spec.is_finite else spec.truncate(self.settings.enumeration_limit)
            atoms = self.catalogue(ground, budget)
            ball = elasticity_lower_bound(atoms, max_length, budget)
            results["ball"] = ball.to_json()
            results["ball_invariants"] = ball_bounds(atoms, max_length, budget).to_json()
            complete = ball.complete
        return Outcome(results=results, complete=complete)

    def rhok(self, ground: GroundSpec, k: int, budget: Budget) -> Outcome:
        union = v_k(self.catalogue(ground, budget), k, budget)
        return Outcome(results=union.to_json(), complete=union.lengths.complete)

    def transfer(
        self, kind: TransferKind, element: Sequence, parameter: int, budget: Budget
    ) -> Outcome:
        image = apply_transfer(element, kind, parameter)
        source_atoms = self.catalogue(list(element.support), budget)
        if kind == TransferKind.CYCLIC:
            image_atoms = enumerate_cyclic_atoms(parameter, image.support, budget)
        else:
            image_atoms = self.catalogue(list(image.support), budget)

        report = verify_transfer_fidelity(
            element, kind, parameter, source_atoms, image_atoms, budget
        )
        results = report.to_json()
        if kind == TransferKind.CYCLIC:
            positives = GroundSpec.from_members(g for g in element.support if g > 0)
            results["class_group"] = class_group_report(positives, parameter).to_json()
        if kind == TransferKind.PSI:
            results["shift"] = psi_shift(element, parameter)
        return Outcome(results=results)

    def structure_check(
        self, spec: GroundSpec, budget: Budget, cutoff: int | None = None, max_length: int = 6
    ) -> Outcome:
        holds = structure_condition(spec)
        results: dict[str, Any] = {"spec": spec.to_json(), "condition": holds}
        negatives = spec.negatives
        d = -min(negatives)
        results["d"] = d

        cutoff = cutoff or max(3 * d, (spec.min_positive or 1) + 2 * d)
        members = spec.truncate(cutoff).finite_members()
        atoms = self.catalogue(members, budget)
        progressions, exceptions, complete = 0, [], True
        elements = zero_sum_elements(members, max_length, budget)
        for element in elements:
            found = factorizations(element, atoms, budget)
            complete = complete and found.complete
            lengths = found.lengths
            steps = {b - a for a, b in zip(lengths.lengths, lengths.lengths[1:])}
            if len(steps) <= 1:
                progressions += 1
            else:
                exceptions.append({"element": str(element), "lengths": list(lengths)})

        results["truncation"] = {
            "cutoff": cutoff,
            "members": members,
            "max_length": max_length,
            "elements": len(elements),
            "arithmetic_progressions": _measure(progressions, complete),
            "exceptions": exceptions,
        }
        return Outcome(results=results, complete=complete)

    def aamp(self, lengths: list[int], deltas: list[int], bound: int) -> Outcome:
        witness = recognize_aamp(LengthSet.of(lengths), deltas, bound)
        return Outcome(
            results={
                "lengths": sorted(set(lengths)),
                "deltas": sorted(set(deltas)),
                "bound": bound,
                "witness": witness.to_json() if witness else None,
            }
        )

    def family(self, name: str, params: dict[str, int], budget: Budget) -> Outcome:
        if name not in FAMILIES:
            raise ZsfValidationError(
                f"Unknown family '{name}', expected one of {', '.join(sorted(FAMILIES))}"
            )
        build = FAMILIES[name]
        accepted = inspect.signature(build).parameters
        unknown = sorted(set(params) - set(accepted))
        if unknown:
            raise ZsfValidationError(f"Family '{name}' does not take {', '.join(unknown)}")
        if "budget" in accepted:
            params = {**params, "budget": budget}
        try:
            instance = build(**params)
        except TypeError as error:
            raise ZsfValidationError(f"Family '{name}': {error}")
        return Outcome(results=instance.to_json())

    def chains(
        self,
        action: str,
        budget: Budget,
        element: Sequence | None = None,
        ground: GroundSpec | None = None,
        negatives: list[int] | None = None,
        subsum: int | None = None,
    ) -> Outcome:
        if action in ("rel-davenport", "e-atoms"):
            if not negatives:
                raise ZsfValidationError(f"chains {action} needs --negatives")
            pairs = e_atoms(negatives, budget)
            results: dict[str, Any] = {
                "negatives": sorted(set(negatives)),
                "e_atoms": [str(pair) for pair in pairs],
            }
            if action == "rel-davenport":
                results["relative_davenport"] = _measure(relative_davenport(negatives, budget))
            return Outcome(results=results)

        if element is None:
            raise ZsfValidationError(f"chains {action} needs --element")
        if action == "breakapart":
            if subsum is None:
                raise ZsfValidationError("chains breakapart needs --subsum")
            return Outcome(results=breakapart_analysis(element, subsum).to_json())

        atoms = self.catalogue(ground if ground is not None else list(element.support), budget)
        if action == "upsilon":
            return Outcome(results=upsilon(element, atoms, budget).to_json())

        start = self._shortest(
            self._complete_factorizations(element, atoms, budget, f"chains {action}")
        )
        if action == "to-upsilon":
            return Outcome(results=chain_to_upsilon(element, start, atoms, budget).to_json())
        if action == "m2":
            return Outcome(results=m2_chain(element, start, atoms, budget).to_json())
        raise ZsfValidationError(f"Unknown chains action '{action}'")

    def witness(
        self,
        kind: str,
        budget: Budget,
        spec: str | None = None,
        n: int | None = None,
        element: Sequence | None = None,
        ground: GroundSpec | None = None,
    ) -> Outcome:
        if kind == "tame-growth":
            if spec is None or n is None:
                raise ZsfValidationError("witness tame-growth needs --spec and --n")
            found = tame_growth_witness(TwoSidedSpec.parse(spec), n, budget)
            return Outcome(results=found.to_json())

        if kind not in ("catenary-chain", "monotone-chain"):
            raise ZsfValidationError(f"Unknown witness kind '{kind}'")
        if element is None:
            raise ZsfValidationError(f"witness {kind} needs --element")
        atoms = self.catalogue(ground if ground is not None else list(element.support), budget)
        found = self._complete_factorizations(element, atoms, budget, f"witness {kind}")
        start, target = found.all[0], found.of_length(found.lengths.max).all[-1]
        build = build_catenary_chain if kind == "catenary-chain" else build_monotone_chain_delta
        return Outcome(results=build(element, start, target, atoms, budget).to_json())

    def sample(
        self, ground: GroundSpec, max_length: int, count: int, seed: int, budget: Budget
    ) -> Outcome:
        members = ground.finite_members()
        atoms = self.catalogue(members, budget)
        elements = zero_sum_elements(members, max_length, budget)
        chosen = random.Random(seed).sample(elements, min(count, len(elements)))

        samples, complete = [], True
        for element in sorted(chosen):
            found = factorizations(element, atoms, budget)
            complete = complete and found.complete
            samples.append(found.to_json(with_factorizations=False))
        return Outcome(
            results={"seed": seed, "population": len(elements), "samples": samples},
            complete=complete,
        )
