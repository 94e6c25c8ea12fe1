import pytest

from tests.utils import cases
from zsf.core.atoms import (
    davenport,
    enumerate_atoms,
    enumerate_cyclic_atoms,
    extend_to_atom,
    is_atom,
    length_bounds_hold,
    two_support_atom,
)
from zsf.core.error import (
    BudgetExceededError,
    InapplicableError,
    UnsupportedAmbientError,
    ZsfValidationError,
)
from zsf.core.factorize import zero_sum_elements
from zsf.core.groundset import Ambient, GroundSpec, Progression, Sequence
from zsf.core.models import Budget

NATURALS = (Progression(start=1, step=1),)


def naive_atoms(ground: list[int]) -> list[Sequence]:
    """Minimal zero-sum sequences by exhaustive search, without any pruning."""
    bound = max(ground) - min(ground)
    return sorted(
        element for element in zero_sum_elements(ground, bound) if is_atom(element)
    )


def condensed_grounds(bound: int, with_zero: bool = True) -> list[list[int]]:
    """Every subset of [-bound, bound] holding a negative and a positive element."""
    negatives = [-value for value in range(1, bound + 1)]
    positives = list(range(1, bound + 1))
    grounds = []
    for low in range(1, 2**bound):
        for high in range(1, 2**bound):
            ground = [n for i, n in enumerate(negatives) if low >> i & 1] + [
                p for i, p in enumerate(positives) if high >> i & 1
            ]
            grounds.append(sorted(ground))
            if with_zero:
                grounds.append(sorted(ground + [0]))
    return grounds


class TestIsAtom:
    @cases(
        "text,expected",
        ["single zero", ["0", True]],
        ["two support", ["2^3 -3^2", True]],
        ["contains 1 -1", ["2 1 -1^3", False]],
        ["not zero-sum", ["2 -1", False]],
        ["empty", ["", False]],
    )
    def test_over_integers(self, text, expected):
        assert is_atom(Sequence.parse(text)) is expected

    def test_over_cyclic(self):
        ambient = Ambient.cyclic(4)
        assert is_atom(Sequence.parse("1^4", ambient=ambient))
        assert not is_atom(Sequence.parse("1^2 2^2", ambient=ambient))


class TestEnumerateAtoms:
    def test_small_ground(self):
        atoms = enumerate_atoms([-2, -1, 1, 2])
        assert [str(atom) for atom in atoms] == ["-2 2", "-1 1", "-2 1^2", "-1^2 2"]
        assert atoms.davenport == 3

    def test_ground_spec_input(self):
        assert len(enumerate_atoms(GroundSpec.parse("{-2,-1,1,2}"))) == 4

    def test_zero_is_an_atom(self):
        assert Sequence.parse("0") in enumerate_atoms([-1, 0, 1])

    @cases(
        "ground",
        ["two elements", [[-3, 2]]],
        ["three elements", [[-3, -1, 2]]],
        ["two negatives", [[-2, -1, 3]]],
        ["wider gap", [[-4, -1, 3]]],
        ["four elements", [[-3, -2, 1, 4]]],
    )
    def test_matches_naive_search(self, ground):
        atoms = enumerate_atoms(ground)
        assert list(atoms) == naive_atoms(ground)
        assert atoms.davenport <= max(ground) - min(ground)
        assert all(length_bounds_hold(atom, ground) for atom in atoms)

    @pytest.mark.parametrize("ground", condensed_grounds(3), ids=str)
    def test_matches_naive_search_on_small_grounds(self, ground):
        assert list(enumerate_atoms(ground)) == naive_atoms(ground)

    @pytest.mark.parametrize("ground", condensed_grounds(4, with_zero=False), ids=str)
    def test_length_and_davenport_bounds(self, ground):
        atoms = enumerate_atoms(ground)
        assert atoms.davenport <= max(ground) - min(ground)
        assert all(length_bounds_hold(atom, ground) for atom in atoms)

    def test_with_minimum(self):
        atoms = enumerate_atoms([-2, -1, 1, 2])
        assert [str(atom) for atom in atoms.with_minimum(-1)] == ["-1 1", "-1^2 2"]
        assert atoms.with_minimum(5) == ()

    def test_needs_condensed_ground(self):
        with pytest.raises(ZsfValidationError, match="not condensed"):
            enumerate_atoms([1, 2])

    def test_budget(self):
        with pytest.raises(BudgetExceededError) as error:
            enumerate_atoms([-3, -1, 2], Budget(max_nodes=5))
        assert "atoms_found" in error.value.data

    def test_davenport(self):
        assert davenport([-2, -1, 1, 2]) == 3
        assert davenport([-3, 2]) == 5


class TestCyclicAtoms:
    def test_full_group_of_order_three(self):
        atoms = enumerate_cyclic_atoms(3)
        assert [str(atom) for atom in atoms] == ["0", "1 2", "1^3", "2^3"]
        assert atoms.ambient == Ambient.cyclic(3)

    @cases(
        "modulus",
        ["Z/1Z", [1]],
        ["Z/2Z", [2]],
        ["Z/4Z", [4]],
        ["Z/5Z", [5]],
        ["Z/6Z", [6]],
    )
    def test_davenport_of_the_full_group(self, modulus):
        assert enumerate_cyclic_atoms(modulus).davenport == modulus

    def test_subset(self):
        atoms = enumerate_cyclic_atoms(4, [2, 6])
        assert atoms.ground == (2,)
        assert [str(atom) for atom in atoms] == ["2^2"]


class TestTwoSupportAtom:
    def test_lcm_shape(self):
        assert two_support_atom(-2, 3) == Sequence.parse("3^2 -2^3")

    def test_needs_signs(self):
        with pytest.raises(ZsfValidationError, match="Need a < 0 < b"):
            two_support_atom(2, 3)


class TestExtendToAtom:
    spec = GroundSpec(finite=(-1,), aps=NATURALS)

    def test_pads_with_negatives(self):
        assert extend_to_atom(Sequence.parse("-1^2"), self.spec) == Sequence.parse("4 -1^4")

    def test_empty_sequence(self):
        assert extend_to_atom(Sequence.empty(), self.spec) == Sequence.parse("1 -1")

    def test_two_negatives(self):
        spec = GroundSpec(finite=(-3, -2), aps=NATURALS)
        part = Sequence.parse("-3 -2")
        atom = extend_to_atom(part, spec)
        assert is_atom(atom)
        assert part.divides(atom)
        assert atom == Sequence.parse("7 -3 -2^2")

    def test_needs_infinitely_many_positives(self):
        with pytest.raises(InapplicableError, match="finitely many positives"):
            extend_to_atom(Sequence.parse("-1"), GroundSpec.parse("[-1,1]"))

    def test_needs_negative_members(self):
        with pytest.raises(ZsfValidationError, match="not a negative member"):
            extend_to_atom(Sequence.parse("-5"), self.spec)

    def test_over_cyclic(self):
        with pytest.raises(UnsupportedAmbientError):
            extend_to_atom(Sequence.parse("1", ambient=Ambient.cyclic(3)), self.spec)
