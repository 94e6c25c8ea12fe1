import random
from itertools import combinations

import pytest

from tests.utils import cases
from zsf.core.atoms import enumerate_atoms
from zsf.core.chains import (
    PairSequence,
    breakapart_analysis,
    chain_to_upsilon,
    e_atoms,
    equal_plus_chain,
    m2_chain,
    plus_le,
    relative_davenport,
    symmetric_selection,
    upsilon,
)
from zsf.core.error import InapplicableError, ZsfValidationError
from zsf.core.factorize import factorizations, zero_sum_elements
from zsf.core.groundset import Factorization, Sequence, distance
from zsf.core.invariants import Monotonicity, build_catenary_chain

ELEMENT = Sequence.parse("3^2 2^3 -2^3 -1^6")
SHORT = Factorization.from_counts(
    {Sequence.parse("3^2 -2^3"): 1, Sequence.parse("2 -1^2"): 3}
)
HEAVY_ATOM = Sequence.parse("7 9 -2^8")


@pytest.fixture
def atoms():
    return enumerate_atoms([-2, -1, 2, 3])


class TestPairSequence:
    def test_from_atom(self):
        pair = PairSequence.from_atom(Sequence.parse("3 -2 -1"))
        assert pair.left == Sequence.parse("-2 -1")
        assert pair.right == Sequence.parse("-3")
        assert pair.is_balanced
        assert not pair.is_symmetric
        assert pair.embed() == Sequence.parse("3 -2 -1")
        assert str(pair) == "(-2 -1, -3)"

    def test_difference(self):
        pair = PairSequence(left=Sequence.parse("-1^2"), right=Sequence.parse("-2"))
        assert pair.difference([-2, -1]).coordinates == (-1, 2)


class TestPairMonoid:
    @cases(
        "negatives,count",
        ["-2 and -1", [[-2, -1], 4]],
        ["-3 and -2", [[-3, -2], 4]],
        ["-1 alone", [[-1], 1]],
    )
    def test_e_atoms(self, negatives, count):
        pairs = e_atoms(negatives)
        assert len(pairs) == count
        assert all(pair.is_balanced for pair in pairs)

    @cases(
        "negatives,expected",
        ["-2 and -1", [[-2, -1], 2]],
        ["-1 alone", [[-1], 1]],
        ["-3 alone", [[-3], 1]],
        ["-3 and -2", [[-3, -2], 2]],
    )
    def test_relative_davenport(self, negatives, expected):
        assert relative_davenport(negatives) == expected

    def test_needs_negatives(self):
        with pytest.raises(ZsfValidationError, match="must be negative"):
            e_atoms([-1, 2])
        with pytest.raises(ZsfValidationError, match="at least one negative"):
            e_atoms([])


class TestSymmetricSelection:
    def test_opposite_pair(self):
        assert symmetric_selection([(1, -1), (-1, 1), (2, 0)], 2) == (0, 1)

    def test_nothing_sums_to_zero(self):
        assert symmetric_selection([(1, 0)], 3) is None
        assert symmetric_selection([], 3) is None


class TestUpsilon:
    def test_longest_factorizations(self, atoms):
        maximal = upsilon(ELEMENT, atoms)
        assert len(maximal) == 3
        assert set(maximal.lengths) == {5}

    def test_refinement_order(self, atoms):
        longest = upsilon(ELEMENT, atoms).all[0]
        assert plus_le(SHORT, longest)
        assert not plus_le(longest, SHORT)
        assert plus_le(SHORT, SHORT)


class TestChainToUpsilon:
    def test_from_the_short_factorization(self, atoms):
        chain = chain_to_upsilon(ELEMENT, SHORT, atoms)
        assert chain.steps[0] == SHORT
        assert chain.steps[-1] in set(upsilon(ELEMENT, atoms))
        assert chain.monotone == Monotonicity.NONDECREASING
        assert chain.bound == 4
        assert chain.max_step <= 4

    def test_already_maximal(self, atoms):
        longest = upsilon(ELEMENT, atoms).all[0]
        assert chain_to_upsilon(ELEMENT, longest, atoms).steps == (longest,)

    def test_needs_a_factorization_of_the_element(self, atoms):
        with pytest.raises(ZsfValidationError, match="is not a factorization"):
            chain_to_upsilon(Sequence.parse("2 -2"), SHORT, atoms)


class TestEqualPlusChain:
    def test_constant_length(self, atoms):
        members = upsilon(ELEMENT, atoms).all
        chain = equal_plus_chain(ELEMENT, members[0], members[-1], atoms)
        assert chain.steps[-1] == members[-1]
        assert set(chain.lengths) == {5}
        assert chain.max_step <= 2

    def test_needs_maximal_ends(self, atoms):
        longest = upsilon(ELEMENT, atoms).all[0]
        with pytest.raises(ZsfValidationError, match="Positive parts"):
            equal_plus_chain(ELEMENT, SHORT, longest, atoms)


class TestM2Chain:
    @pytest.fixture
    def heavy_atoms(self):
        return enumerate_atoms([-2, -1, 7, 9])

    def test_case_a_witness(self, heavy_atoms):
        result = m2_chain(HEAVY_ATOM, Factorization.of([HEAVY_ATOM]), heavy_atoms)
        assert result.chain is None
        assert result.witness.subset == (-2,)
        assert (result.witness.subset_gcd, result.witness.positive_gcd) == (2, 1)
        assert result.to_json()["case"] == "a"

    def test_increasing_chain(self, heavy_atoms):
        element = Sequence.parse("7^2 9 -2^8 -1^7")
        found = factorizations(element, heavy_atoms)
        start = found.of_length(found.lengths.min).all[0]
        result = m2_chain(element, start, heavy_atoms)
        assert result.witness is None
        assert result.chain.lengths == [2, 3]
        assert result.chain.max_step <= 4

    def test_needs_large_positives(self):
        atom = Sequence.parse("5^2 -2^5")
        with pytest.raises(ZsfValidationError, match="positives of at least 6"):
            m2_chain(atom, Factorization.of([atom]), enumerate_atoms([-2, 5]))


class TestBreakapart:
    def test_heavy_negatives(self):
        report = breakapart_analysis(HEAVY_ATOM, 7)
        assert report.r == Sequence.parse("-2^8")
        assert report.r_prime == report.r
        assert (report.n, report.m) == (2, 2)

    def test_m_of_one(self):
        with pytest.raises(InapplicableError, match="unsatisfiable"):
            breakapart_analysis(HEAVY_ATOM, 7, m=1)

    def test_full_sum_is_not_proper(self):
        with pytest.raises(ZsfValidationError, match="not a proper subsum"):
            breakapart_analysis(HEAVY_ATOM, 16)

    def test_needs_an_atom(self):
        with pytest.raises(ZsfValidationError, match="is not an atom"):
            breakapart_analysis(Sequence.parse("7 9 -2^8 1 -1"), 7)


def sample_elements(ground: list[int], max_length: int, count: int, seed: int) -> list[Sequence]:
    elements = zero_sum_elements(ground, max_length)
    if len(elements) <= count:
        return elements
    return random.Random(seed).sample(elements, count)


def steps_within(chain, bound: int) -> bool:
    return all(
        distance(first, second) <= bound for first, second in zip(chain.steps, chain.steps[1:])
    )


class TestChainsOnRandomElements:
    GROUND = [-2, -1, 1, 2]

    @pytest.fixture(scope="class")
    def small_atoms(self):
        return enumerate_atoms(self.GROUND)

    @pytest.fixture(scope="class")
    def elements(self):
        return sample_elements(self.GROUND, 14, 200, seed=7)

    def test_catenary_chains(self, small_atoms, elements):
        for element in elements:
            found = factorizations(element, small_atoms)
            shortest = min(found, key=len)
            longest = max(found, key=len)
            chain = build_catenary_chain(element, shortest, longest, small_atoms)
            assert chain.steps[0] == shortest and chain.steps[-1] == longest
            assert steps_within(chain, 12), str(element)

    def test_chains_to_upsilon(self, small_atoms, elements):
        for element in elements:
            shortest = min(factorizations(element, small_atoms), key=len)
            chain = chain_to_upsilon(element, shortest, small_atoms)
            assert chain.monotone == Monotonicity.NONDECREASING
            assert chain.lengths == sorted(chain.lengths)
            assert steps_within(chain, max(2 * -element.min(), 2)), str(element)
            assert chain.steps[-1] in upsilon(element, small_atoms).all

    def test_equal_plus_chains(self, small_atoms, elements):
        for element in elements:
            members = upsilon(element, small_atoms).all
            pair = next(
                (
                    (z, y)
                    for z, y in combinations(members, 2)
                    if sorted(z.positive_parts()) == sorted(y.positive_parts())
                ),
                None,
            )
            if pair is None:
                continue
            chain = equal_plus_chain(element, *pair, small_atoms)
            assert len(set(chain.lengths)) == 1
            assert steps_within(chain, 2), str(element)
