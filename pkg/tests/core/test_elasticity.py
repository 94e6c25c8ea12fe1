from fractions import Fraction

import pytest

from zsf.core.atoms import enumerate_atoms
from zsf.core.elasticity import (
    Acceptance,
    KappaKind,
    elasticity_lower_bound,
    exact_elasticity,
    ground_delta_set,
    kappa_bound,
    kappa_classes,
    kappa_generators,
    lambda_k,
    products_of_atoms,
    relation_matrix,
    rho_k,
    v_k,
)
from zsf.core.error import ZsfValidationError
from zsf.core.groundset import GroundSpec
from zsf.core.invariants import catenary_chain_bound
from zsf.core.models import Budget

SMALL_GROUND = [-2, -1, 1, 2]
ODDS = GroundSpec.parse('{"finite":[-2,-1],"aps":[{"start":1,"step":2}]}')
NATURALS = GroundSpec.parse('{"finite":[-1],"aps":[{"start":1,"step":1}]}')


class TestKappaClasses:
    def test_odd_positives(self):
        assert kappa_bound(ODDS) == 8
        classes = kappa_classes(ODDS)
        assert [klass.representative for klass in classes] == [1, 3, 5, 7, 9]
        assert [klass.kind for klass in classes].count(KappaKind.RESIDUE) == 1

    def test_residue_class_membership(self):
        residue = kappa_classes(ODDS)[-1]
        assert residue.contains(11, kappa_bound(ODDS))
        assert not residue.contains(7, kappa_bound(ODDS))
        assert residue.to_json() == {"kind": "residue", "representative": 9, "modulus": 2}

    def test_generators(self):
        generators = kappa_generators(ODDS)
        assert len(generators) == 20
        assert all(generator.completion.min() >= -2 for generator in generators)

    def test_needs_negatives(self):
        with pytest.raises(ZsfValidationError, match="finitely many negatives"):
            kappa_bound(GroundSpec.parse("N"))


class TestExactElasticity:
    def test_finite_ground(self):
        result = exact_elasticity(GroundSpec.parse("[-2,-1,1,2]"))
        assert result.rho == Fraction(3, 2)
        assert result.accepted == Acceptance.ACCEPTED
        assert result.generators == 4
        assert result.kappa_classes == 0

    def test_two_support(self):
        assert exact_elasticity(GroundSpec.parse("[-4,2]")).rho == 1

    def test_odd_positives(self):
        result = exact_elasticity(ODDS)
        assert result.rho == Fraction(2)
        assert result.kappa_classes == 5
        assert result.generators == 20
        assert result.accepted == Acceptance.NOT_ACCEPTED
        data = result.to_json()
        assert data["rho"] == "2/1"
        assert data["accepted"] is False

    def test_half_factorial(self):
        result = exact_elasticity(NATURALS)
        assert result.rho == 1
        assert result.to_json()["accepted"] is True

    def test_zero_is_ignored(self):
        assert exact_elasticity(GroundSpec.parse("[-2,-1,0,1,2]")).rho == Fraction(3, 2)

    def test_needs_condensed_ground(self):
        with pytest.raises(ZsfValidationError, match="not condensed"):
            exact_elasticity(GroundSpec.parse("[1,2]"))

    def test_dominates_the_ball(self):
        for ground in ([-3, 2], [-3, -1, 2], [-2, -1, 3]):
            exact = exact_elasticity(GroundSpec(finite=tuple(ground))).rho
            assert elasticity_lower_bound(ground, 6).value <= exact


class TestUnionsOfLengths:
    def test_products(self):
        atoms = enumerate_atoms(SMALL_GROUND)
        assert len(products_of_atoms(atoms, 1)) == 4
        assert len(products_of_atoms(atoms, 2)) == 10

    def test_v_2(self):
        union = v_k(SMALL_GROUND, 2)
        assert list(union.lengths) == [2, 3]
        assert union.rho_k == 3
        assert union.lambda_k == 2
        assert union.to_json()["status"] == "exact"

    def test_first_union_is_trivial(self):
        assert rho_k(SMALL_GROUND, 1) == 1
        assert lambda_k(SMALL_GROUND, 1) == 1

    def test_needs_positive_k(self):
        with pytest.raises(ZsfValidationError, match="Need k >= 1"):
            v_k(SMALL_GROUND, 0)

    def test_delta_set(self):
        assert ground_delta_set(SMALL_GROUND, 2) == {1}

    @pytest.mark.parametrize(
        "ground", [[-2, -1, 1, 2], [-2, -1, 1, 3], [-3, -1, 1, 2]], ids=str
    )
    def test_gaps_between_consecutive_unions(self, ground):
        atoms = enumerate_atoms(ground)
        unions = {k: v_k(atoms, k) for k in range(1, 5)}
        assert all(union.lengths.complete for union in unions.values())
        for k in range(1, 4):
            rho_gap = unions[k + 1].rho_k - unions[k].rho_k
            assert 1 <= rho_gap <= atoms.davenport - 1
            lambda_gap = unions[k].lambda_k - unions[k + 1].lambda_k
            assert -1 <= lambda_gap < catenary_chain_bound(ground)


class TestLowerBound:
    def test_small_ball(self):
        bound = elasticity_lower_bound(SMALL_GROUND, 6)
        assert bound.value == Fraction(3, 2)
        assert bound.complete
        assert len(bound.element) == 6
        assert bound.to_json()["status"] == "lower bound"

    def test_budget(self):
        atoms = enumerate_atoms(SMALL_GROUND)
        bound = elasticity_lower_bound(atoms, 6, Budget(max_nodes=20))
        assert not bound.complete

    def test_truncations_stay_below_the_limit(self):
        values = [
            elasticity_lower_bound(ground, 10).value
            for ground in ([-2, -1, 1, 3], [-2, -1, 1, 3, 5], [-2, -1, 1, 3, 5, 7])
        ]
        limit = exact_elasticity(ODDS).rho
        assert limit == 2
        assert values == sorted(values)
        assert all(value < limit for value in values)


def test_relation_matrix():
    assert relation_matrix([{1: 2, -2: 1}, {-1: 1, 1: 1}], [-2, -1, 1]) == [
        [1, 0],
        [0, 1],
        [2, 1],
    ]
