import pytest

from tests.utils import cases
from zsf.core.error import UnsupportedAmbientError, ZsfParsingError, ZsfValidationError
from zsf.core.groundset import (
    INTEGERS,
    Ambient,
    Factorization,
    GroundSpec,
    Progression,
    Sequence,
    TwoSidedSpec,
    distance,
    sigma,
    split_signs,
    subsequence_sums,
    zero_sum_free,
)


class TestAmbient:
    def test_integers_do_not_reduce(self):
        assert INTEGERS.reduce(-7) == -7
        assert str(INTEGERS) == "Z"

    def test_cyclic_reduces(self):
        ambient = Ambient.cyclic(4)
        assert ambient.reduce(-1) == 3
        assert ambient.add(3, 2) == 1
        assert str(ambient) == "Z/4Z"

    def test_cyclic_needs_positive_modulus(self):
        with pytest.raises(ZsfValidationError, match="must be positive"):
            Ambient.cyclic(0)

    def test_json_round_trip(self):
        assert Ambient.from_json(Ambient.cyclic(5).to_json()) == Ambient.cyclic(5)
        assert Ambient.from_json("Z") == INTEGERS

    def test_bad_json(self):
        with pytest.raises(ZsfParsingError, match="Unable to parse ambient"):
            Ambient.from_json({"modulus": 3})


class TestSequence:
    @cases(
        "text,expected",
        ["plain terms", ["2 -1 -1", {2: 1, -1: 2}]],
        ["exponents", ["3^2 2^3 -2^3 -1^6", {3: 2, 2: 3, -2: 3, -1: 6}]],
        ["repeated tokens merge", ["1 1^2", {1: 3}]],
        ["empty text", ["", {}]],
    )
    def test_parse(self, text, expected):
        assert Sequence.parse(text).counts() == expected

    @cases(
        "text,match",
        ["not a term", ["2 x", "is not of the form"]],
        ["zero exponent", ["2^0", "must be at least 1"]],
    )
    def test_parse_errors(self, text, match):
        with pytest.raises(ZsfParsingError, match=match):
            Sequence.parse(text)

    def test_str_is_sorted(self):
        assert str(Sequence.parse("3^2 2^3 -2^3 -1^6")) == "-2^3 -1^6 2^3 3^2"

    def test_parse_over_cyclic_reduces(self):
        element = Sequence.parse("5 -1", ambient=Ambient.cyclic(4))
        assert element.counts() == {1: 1, 3: 1}

    def test_equal_multisets_are_equal(self):
        assert Sequence.of([1, -1, 1]) == Sequence.from_counts({-1: 1, 1: 2})
        assert hash(Sequence.of([2, -2])) == hash(Sequence.parse("-2 2"))

    def test_negative_multiplicity(self):
        with pytest.raises(ZsfValidationError, match="Negative multiplicity"):
            Sequence.from_counts({1: -1})

    def test_product_and_division(self):
        first = Sequence.parse("2 -1^2")
        second = Sequence.parse("1 -1")
        product = first * second
        assert product == Sequence.parse("2 1 -1^3")
        assert product / second == first
        assert first.divides(product)
        assert not product.divides(first)

    def test_division_needs_a_divisor(self):
        with pytest.raises(ZsfValidationError, match="does not divide"):
            Sequence.parse("1 -1") / Sequence.parse("2 -2")

    def test_mixed_ambients(self):
        with pytest.raises(ZsfValidationError, match="different ambients"):
            Sequence.parse("1") * Sequence.parse("1", ambient=Ambient.cyclic(3))

    def test_power_negation_and_restriction(self):
        element = Sequence.parse("3 -1^3")
        assert element**2 == Sequence.parse("3^2 -1^6")
        assert element.negated() == Sequence.parse("-3 1^3")
        assert element.restricted([3]) == Sequence.parse("3")

    def test_accessors(self):
        element = Sequence.parse("3^2 2^3 -2^3 -1^6")
        assert len(element) == 14
        assert element.support == (-2, -1, 2, 3)
        assert element.min() == -2
        assert element.max() == 3
        assert element.count(2) == 3
        assert element.count(5) == 0
        assert sorted(element.elements()) == sorted([3] * 2 + [2] * 3 + [-2] * 3 + [-1] * 6)

    def test_json_round_trip(self):
        element = Sequence.parse("3 -1^3")
        assert Sequence.from_json(element.to_json()) == element

    def test_from_json_without_terms(self):
        with pytest.raises(ZsfParsingError, match="missing terms"):
            Sequence.from_json({"ambient": "Z"})


class TestSums:
    def test_sigma(self):
        assert sigma(Sequence.parse("3^2 2^3 -2^3 -1^6")) == 0
        assert sigma(Sequence.parse("3 2", ambient=Ambient.cyclic(5))) == 0

    def test_split_signs(self):
        positive, negative, zeros = split_signs(Sequence.parse("0^2 3 -1^3"))
        assert positive == Sequence.parse("3")
        assert negative == Sequence.parse("-1^3")
        assert zeros == 2

    def test_split_signs_over_cyclic(self):
        with pytest.raises(UnsupportedAmbientError):
            split_signs(Sequence.parse("1 2", ambient=Ambient.cyclic(3)))

    def test_subsequence_sums(self):
        assert subsequence_sums(Sequence.parse("1 2")) == {1, 2, 3}
        assert subsequence_sums(Sequence.parse("1^2 2"), k=2) == {2, 3}

    @cases(
        "text,ambient,expected",
        ["free over Z", ["1 2", INTEGERS, True]],
        ["has a zero subsum", ["2 1 -1", INTEGERS, False]],
        ["free over Z/4Z", ["1^3", Ambient.cyclic(4), True]],
        ["full cycle over Z/4Z", ["1^4", Ambient.cyclic(4), False]],
    )
    def test_zero_sum_free(self, text, ambient, expected):
        assert zero_sum_free(Sequence.parse(text, ambient=ambient)) is expected


class TestGroundSpec:
    def test_parse_list(self):
        spec = GroundSpec.parse("[-2,-1,1,2]")
        assert spec.finite == (-2, -1, 1, 2)
        assert spec.is_finite

    def test_parse_braces_without_json(self):
        assert GroundSpec.parse("{-2,-1,2,3}").finite_members() == [-2, -1, 2, 3]

    def test_parse_json(self):
        spec = GroundSpec.parse('{"finite":[-2,-1],"aps":[{"start":1,"step":2}]}')
        assert spec.negatives == [-2, -1]
        assert spec.min_positive == 1
        assert spec.positives_up_to(7) == [1, 3, 5, 7]
        assert not spec.is_finite

    def test_parse_naturals(self):
        assert GroundSpec.parse("N").members(-3, 4) == [1, 2, 3, 4]

    @cases(
        "text,match",
        ["not integers", ["[a,b]", "comma-separated list"]],
        ["bad step", ['{"aps":[{"start":1,"step":0}]}', "step must be positive"]],
        ["extra field", ['{"finite":[1],"other":2}', "Unable to parse ground spec"]],
    )
    def test_parse_errors(self, text, match):
        with pytest.raises(ZsfParsingError, match=match):
            GroundSpec.parse(text)

    def test_infinite_has_no_finite_members(self):
        with pytest.raises(ZsfValidationError, match="is infinite"):
            GroundSpec.parse("N").finite_members()

    def test_truncate(self):
        spec = GroundSpec(finite=(-3,), aps=(Progression(start=2, step=4),))
        assert spec.truncate(12).finite_members() == [-3, 2, 6, 10]

    def test_first_above(self):
        spec = GroundSpec(finite=(-1, 4), aps=(Progression(start=9, step=3),))
        assert spec.first_above(4) == 9
        assert spec.first_above(9) == 12

    def test_condensed(self):
        assert GroundSpec.parse("[-1,2]").is_condensed
        assert not GroundSpec.parse("[1,2]").is_condensed


class TestTwoSidedSpec:
    def test_everything(self):
        spec = TwoSidedSpec.parse("Z\\{0}")
        assert spec.negatives_infinite and spec.positives_infinite
        assert spec.members(-2, 2) == [-2, -1, 1, 2]
        assert not spec.contains(0)

    def test_from_one_sided(self):
        spec = TwoSidedSpec.parse("[-3,-1,2]")
        assert spec.members(-5, 5) == [-3, -1, 2]
        assert not spec.negatives_infinite


class TestFactorization:
    atom = Sequence.parse("1 -1")
    other = Sequence.parse("2 -1^2")

    def test_product_and_length(self):
        z = Factorization.of([self.atom, self.atom, self.other])
        assert len(z) == 3
        assert z.product == Sequence.parse("1^2 2 -1^4")
        assert z.count(self.atom) == 2
        assert str(z) == "(-1 1)^2 (-1^2 2)"

    def test_empty_factorization(self):
        assert str(Factorization.of([])) == "1"

    def test_with_and_without(self):
        z = Factorization.of([self.atom])
        assert z.with_atom(self.other).without_atom(self.atom) == Factorization.of([self.other])
        with pytest.raises(ZsfValidationError, match="does not divide"):
            z.without_atom(self.other)

    def test_positive_parts(self):
        z = Factorization.of([self.atom, self.other])
        assert z.positive_parts() == [Sequence.parse("1"), Sequence.parse("2")]

    def test_distance(self):
        first = Factorization.of([self.other, self.atom, self.atom])
        second = Factorization.of([self.other, self.other])
        assert distance(first, second) == 2
        assert distance(first, first) == 0
