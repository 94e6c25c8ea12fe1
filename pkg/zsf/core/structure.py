"""Almost arithmetical multiprogressions and the explicit families built on them.

The families construct elements together with distinguished factorizations
and re-check every claim about them when they are built. Claims that hold
for all parameters are always enforced; claims that only hold for large
parameters are enforced when the parameters are in range and recorded
otherwise.
"""

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, field, replace
from typing import Any

from sympy.ntheory.modular import crt

from ..settings import get_settings
from .atoms import enumerate_atoms, is_atom
from .chains import e_atoms, relative_davenport
from .error import BudgetExceededError, InapplicableError, ZsfDataError, ZsfValidationError
from .factorize import FactorizationSet, LengthSet, factorizations, pattern_contains
from .groundset import Factorization, GroundSpec, Sequence, distance
from .invariants import delta_of_set
from .models import Budget, Certainty

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class AampWitness:
    """L = y + (L' ∪ L* ∪ L'') inside y + D + dZ."""

    y: int
    difference: int
    period: tuple[int, ...]
    core: tuple[int, ...]
    head: tuple[int, ...]
    tail: tuple[int, ...]
    bound: int

    def members(self) -> set[int]:
        return {self.y + value for value in self.head + self.core + self.tail}

    def to_json(self) -> dict[str, Any]:
        return {
            "y": self.y,
            "d": self.difference,
            "period": list(self.period),
            "core": list(self.core),
            "head": list(self.head),
            "tail": list(self.tail),
            "bound": self.bound,
        }


def _aamp_at(
    shifted: list[int], difference: int, top: int, bound: int
) -> AampWitness | None:
    core = [value for value in shifted if 0 <= value <= top]
    head = [value for value in shifted if value < 0]
    tail = [value for value in shifted if value > top]
    if any(value < -bound for value in head) or any(value > top + bound for value in tail):
        return None

    residues = {value % difference for value in core}
    if any(value % difference not in residues for value in shifted):
        return None
    expected = [value for value in range(top + 1) if value % difference in residues]
    if core != expected:
        return None

    return AampWitness(
        y=0,
        difference=difference,
        period=tuple(sorted(residues | {difference})),
        core=tuple(core),
        head=tuple(head),
        tail=tuple(tail),
        bound=bound,
    )


def recognize_aamp(
    lengths: LengthSet | Iterable[int], deltas: Iterable[int], bound: int
) -> AampWitness | None:
    """An AAMP decomposition with difference in `deltas` and the given bound.

    y runs over the members of L within `bound` of min L and the core is taken
    as long as possible; the first witness in (d, y) order is returned.
    """
    values = sorted(set(lengths))
    if not values:
        raise ZsfValidationError("Cannot recognize an AAMP in an empty set of lengths")
    if bound < 0:
        raise ZsfValidationError(f"Need a nonnegative bound, got {bound}")

    for difference in sorted({d for d in deltas if d > 0}):
        for y in values:
            if y > values[0] + bound:
                break
            shifted = [value - y for value in values]
            for top in sorted((value for value in shifted if value >= 0), reverse=True):
                witness = _aamp_at(shifted, difference, top, bound)
                if witness is not None:
                    LOGGER.debug(f"AAMP with d={difference}, y={y} for {values}")
                    return replace(witness, y=y)
    return None


def _shape_difference(spec: GroundSpec) -> int:
    negatives = spec.negatives
    if not spec.contains(1) or -1 not in negatives or len(negatives) > 2:
        raise ZsfValidationError(
            f"Ground spec {spec} does not have 1 as a positive and negatives {{-d, -1}}"
        )
    return -min(negatives)


def structure_condition(spec: GroundSpec) -> bool:
    """G0+ minus dZ is finite or contained in 1 + dZ."""
    d = _shape_difference(spec)
    if d == 1:
        return True

    offending: set[int] = set()
    for element in spec.finite:
        if element > 0 and element % d:
            offending.add(element % d)

    infinite = False
    for progression in spec.aps:
        for j in range(d):
            residue = (progression.start + j * progression.step) % d
            if residue:
                infinite = True
                offending.add(residue)

    return not infinite or offending <= {1}


def lemt_check(lengths: LengthSet | Iterable[int], e: int, n: int) -> bool:
    """L near its minimum sits in min L + eZ while L as a whole does not."""
    if e < 1:
        raise ZsfValidationError(f"Need e >= 1, got {e}")
    values = sorted(set(lengths))
    if not values:
        return False
    low = values[0]
    window = [value for value in values if value <= low + n]
    return all((value - low) % e == 0 for value in window) and any(
        (value - low) % e for value in values
    )


@dataclass(frozen=True)
class FamilyInstance:
    name: str
    parameters: dict[str, int]
    element: Sequence
    factorizations: dict[str, Factorization] = field(default_factory=dict)
    claims: dict[str, Any] = field(default_factory=dict)
    status: Certainty = Certainty.STRUCTURAL
    guaranteed: bool = True
    lengths: LengthSet | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "parameters": self.parameters,
            "element": str(self.element),
            "size": len(self.element),
            "factorizations": {
                label: {"factorization": str(z), "length": len(z)}
                for label, z in self.factorizations.items()
            },
            "claims": self.claims,
            "status": str(self.status),
            "guaranteed": self.guaranteed,
            "lengths": list(self.lengths) if self.lengths is not None else None,
        }


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ZsfValidationError(message)


def _check_factorizations(
    name: str, element: Sequence, named: dict[str, Factorization]
) -> None:
    for label, z in named.items():
        if z.product != element:
            raise ZsfDataError(
                f"{name}: {label} ({z}) is not a factorization of ({element})",
                data={"family": name, "label": label},
            )
        for atom, _ in z.atoms:
            if not is_atom(atom):
                raise ZsfDataError(
                    f"{name}: {label} contains ({atom}), which is not an atom",
                    data={"family": name, "label": label, "atom": str(atom)},
                )


def _check_claims(name: str, claims: dict[str, Any], enforced: Iterable[str]) -> None:
    failed = [key for key in enforced if claims.get(key) is False]
    if failed:
        raise ZsfDataError(
            f"{name}: claims {failed} do not hold", data={"family": name, "claims": claims}
        )


def _enumerate(element: Sequence, budget: Budget | None) -> FactorizationSet | None:
    """Complete Z(B) for small elements, None otherwise."""
    if len(element) > get_settings().enumeration_limit:
        return None
    try:
        atoms = enumerate_atoms(element.support, budget)
    except BudgetExceededError:
        LOGGER.debug(f"Atom enumeration for ({element}) ran out of budget")
        return None
    found = factorizations(element, atoms, budget)
    return found if found.complete else None


def _structural_lengths(*named: Factorization) -> LengthSet:
    return LengthSet.of(len(z) for z in named)


def family_lem1(d: int, e: int, k: int) -> FamilyInstance:
    """(e+dk)^f (-d)^(u+fk) (-1)^(d(u+fk)) 1^(d(u+fk)) with gcd(e, d) > 1."""
    _require(d >= 4, f"Need d >= 4, got {d}")
    _require(2 <= e <= d - 1, f"Need e in [2, d-1], got {e}")
    _require(math.gcd(e, d) > 1, f"Need gcd(e, d) > 1, got gcd({e}, {d}) = 1")
    _require(k >= 1, f"Need k >= 1, got {k}")

    f = d // math.gcd(e, d)
    u = e * f // d
    big = e + d * k
    m = u + f * k

    element = Sequence.from_counts({big: f, -d: m, -1: d * m, 1: d * m})
    z1 = Factorization.from_counts(
        {
            Sequence.from_counts({big: f, -d: m}): 1,
            Sequence.of([-1, 1]): d * m,
        }
    )
    z2 = Factorization.from_counts(
        {
            Sequence.from_counts({big: 1, -1: big}): f,
            Sequence.from_counts({-d: 1, 1: d}): m,
        }
    )
    named = {"z1": z1, "z2": z2}
    _check_factorizations("lem1", element, named)

    threshold = (d - 1) * k // 6
    claims = {
        "f": f,
        "u": u,
        "length_z1": len(z1) == 1 + d * m,
        "length_z2": len(z2) == f + m,
        "difference_outside_d_minus_1": (len(z1) - len(z2)) % (d - 1) != 0,
        "threshold": threshold,
        "lemt_fires": lemt_check(_structural_lengths(z1, z2), d - 1, threshold),
    }
    guaranteed = k >= 10
    enforced = ["length_z1", "length_z2", "difference_outside_d_minus_1"]
    _check_claims("lem1", claims, enforced + (["lemt_fires"] if guaranteed else []))

    return FamilyInstance(
        name="lem1",
        parameters={"d": d, "e": e, "k": k},
        element=element,
        factorizations=named,
        claims=claims,
        guaranteed=guaranteed,
    )


def family_lem2(d: int, e: int, f: int, l: int, k: int) -> FamilyInstance:
    """(f+dl)(e+dk)^x (-d)^m (-1)^(dm) 1^(dm) with gcd(e, d) = 1."""
    _require(d >= 3, f"Need d >= 3, got {d}")
    _require(1 <= e <= d - 1, f"Need e in [1, d-1], got {e}")
    _require(math.gcd(e, d) == 1, f"Need gcd(e, d) = 1, got gcd({e}, {d}) > 1")
    _require(1 <= f <= d - 1 and f != e, f"Need f in [1, d-1] other than e={e}, got {f}")
    _require(l >= 0 and k >= 1, f"Need l >= 0 and k >= 1, got l={l}, k={k}")
    _require(e + d * k >= f + d * l, f"Need e+dk >= f+dl, got {e + d * k} < {f + d * l}")

    x = next(x for x in range(1, d) if (f + x * e) % d == 0)
    u = (f + x * e) // d
    small = f + d * l
    big = e + d * k
    m = u + x * k + l

    element = Sequence.from_counts({small: 1}) * Sequence.from_counts(
        {big: x, -d: m, -1: d * m, 1: d * m}
    )
    z1 = Factorization.from_counts(
        {
            Sequence.from_counts({small: 1}) * Sequence.from_counts({big: x, -d: m}): 1,
            Sequence.of([-1, 1]): d * m,
        }
    )
    z2 = Factorization.from_counts(
        {
            Sequence.from_counts({small: 1, -1: small}): 1,
            Sequence.from_counts({big: 1, -1: big}): x,
            Sequence.from_counts({-d: 1, 1: d}): m,
        }
    )
    named = {"z1": z1, "z2": z2}
    _check_factorizations("lem2", element, named)

    threshold = (d - 1) * k // 6
    claims = {
        "x": x,
        "u": u,
        "length_z1": len(z1) == 1 + d * m,
        "length_z2": len(z2) == 1 + x + m,
        "difference_outside_d_minus_1": (len(z1) - len(z2)) % (d - 1) != 0,
        "threshold": threshold,
        "lemt_fires": lemt_check(_structural_lengths(z1, z2), d - 1, threshold),
    }
    guaranteed = k >= 3 * d
    enforced = ["length_z1", "length_z2", "difference_outside_d_minus_1"]
    _check_claims("lem2", claims, enforced + (["lemt_fires"] if guaranteed else []))

    return FamilyInstance(
        name="lem2",
        parameters={"d": d, "e": e, "f": f, "l": l, "k": k},
        element=element,
        factorizations=named,
        claims=claims,
        guaranteed=guaranteed,
    )


def family_prop2(d: int, k: int, budget: Budget | None = None) -> FamilyInstance:
    """(1+kd)^d d^(1+kd) (-d)^(1+kd) (-1)^(d(1+kd)) over {-d,-1} ∪ (1+dN0) ∪ dN0."""
    _require(d >= 2, f"Need d >= 2, got {d}")
    _require(k >= 1, f"Need k >= 1, got {k}")

    big = 1 + k * d
    element = Sequence.from_counts({big: d, d: big, -d: big, -1: d * big})
    short = Factorization.from_counts(
        {
            Sequence.from_counts({big: d, -d: big}): 1,
            Sequence.from_counts({d: 1, -1: d}): big,
        }
    )
    long = Factorization.from_counts(
        {
            Sequence.from_counts({big: 1, -1: big}): d,
            Sequence.of([d, -d]): big,
        }
    )
    named = {"z": short, "z_prime": long}
    _check_factorizations("prop2", element, named)

    expected = [2 + k * d, 1 + d + k * d]
    claims: dict[str, Any] = {
        "lengths": expected,
        "distinguished_lengths": [len(short), len(long)] == expected,
        "distance": distance(short, long),
        "e_atoms": [str(pair) for pair in e_atoms([-d, -1])],
        "relative_davenport": relative_davenport([-d, -1]),
    }

    status = Certainty.STRUCTURAL
    lengths = None
    found = _enumerate(element, budget)
    if found is not None:
        lengths = found.lengths
        claims["enumerated_lengths_match"] = list(lengths) == expected
        claims["enumerated_delta"] = delta_of_set(found)
        claims["delta_at_least"] = claims["enumerated_delta"] >= 1 + d + k * d
        claims["arithmetic_progression"] = set(lengths.delta) <= {d - 1}
        if claims["enumerated_lengths_match"]:
            claims["adjacent_distance"] = min(
                distance(first, second)
                for first in found.of_length(expected[0])
                for second in found.of_length(expected[1])
            )
            claims["adjacent_distance_is_d_plus_1"] = claims["adjacent_distance"] == d + 1
        status = Certainty.EXACT

    _check_claims(
        "prop2",
        claims,
        [
            "distinguished_lengths",
            "delta_at_least",
            "enumerated_lengths_match",
            "arithmetic_progression",
            "adjacent_distance_is_d_plus_1",
        ],
    )
    return FamilyInstance(
        name="prop2",
        parameters={"d": d, "k": k},
        element=element,
        factorizations=named,
        claims=claims,
        status=status,
        lengths=lengths,
    )


def example6_lengths(d: int, e: int, k: int, l: int) -> LengthSet:
    """The closed form for L((e+kd)(-e+ld) 1^((k+l)d) (-1)^((k+l)d) (-d)^(k+l))."""
    s = k + l
    values = {1 + s + s * (d - 1)}
    values.update(1 + e + s + i * (d - 1) for i in range(k, s))
    values.update(2 - e + s + i * (d - 1) for i in range(l, s + 1))
    values.update(2 + s + i * (d - 1) for i in range(0, s))
    return LengthSet.of(values)


def family_example6(
    d: int, e: int, k: int, l: int, budget: Budget | None = None
) -> FamilyInstance:
    _require(d >= 2, f"Need d >= 2, got {d}")
    _require(1 <= e <= d - 1, f"Need e in [1, d-1], got {e}")
    _require(k >= 1 and l >= 1, f"Need k, l >= 1, got k={k}, l={l}")

    s = k + l
    element = Sequence.of([e + k * d, -e + l * d]) * Sequence.from_counts(
        {1: s * d, -1: s * d, -d: s}
    )
    closed = example6_lengths(d, e, k, l)
    claims: dict[str, Any] = {"closed_form": list(closed)}

    status = Certainty.STRUCTURAL
    lengths = None
    found = _enumerate(element, budget)
    if found is not None:
        lengths = found.lengths
        claims["enumerated_lengths_match"] = list(lengths) == list(closed)
        status = Certainty.EXACT
    _check_claims("example6", claims, ["enumerated_lengths_match"])

    return FamilyInstance(
        name="example6",
        parameters={"d": d, "e": e, "k": k, "l": l},
        element=element,
        claims=claims,
        status=status,
        lengths=lengths,
    )


def _congruence_terms(a1: int, a2: int, b: int) -> tuple[int, int]:
    common = math.gcd(a1, a2, b)
    return a1 * math.gcd(a2, b) // common, a2 * math.gcd(a1, b) // common


def is_half_factorial_three(a1: int, a2: int, b: int) -> bool:
    """Whether B({a1, a2, b}) is half-factorial, by the congruence criterion."""
    _require(a1 < 0 and a2 < 0 < b, f"Need a1, a2 < 0 < b, got {a1}, {a2}, {b}")
    first, second = _congruence_terms(a1, a2, b)
    return (first - second) % b == 0


def _minimal_n_atom(a1: int, a2: int, b: int, n: int) -> Sequence:
    """The atom N^gamma b^beta a1^M1 a2^M2 with (gamma, beta) least and M2 < |a1|."""
    largest = max(-a1, -a2)
    for gamma in range(1, largest + 1):
        for beta in range(0, largest - gamma + 1):
            for m2 in range(0, -a1):
                rest = gamma * n + beta * b + a2 * m2
                if rest < 0 or rest % -a1:
                    continue
                candidate = Sequence.from_counts(
                    {n: gamma, b: beta, a1: rest // -a1, a2: m2}
                )
                if is_atom(candidate):
                    return candidate
    raise ZsfDataError(f"No atom over {{{a1}, {a2}, {b}, {n}}} contains {n}")


def family_prop46(a1: int, a2: int, b: int, n: int) -> FamilyInstance:
    """A_N = U_N U_2^M1 with L(A_N) ⊇ {M1 + 1 + dk}."""
    _require(a1 < 0 and a2 < 0 < b, f"Need a1, a2 < 0 < b, got {a1}, {a2}, {b}")
    _require(n > 0 and n != b, f"Need a positive N other than b, got {n}")
    first, second = _congruence_terms(a1, a2, b)
    if (first - second) % b or first == second:
        raise InapplicableError(
            f"Half-factoriality criterion not met for ({a1}, {a2}, {b}): "
            f"need {first} ≡ {second} mod {b} with {first} != {second}"
        )

    alpha1, beta1 = b // math.gcd(a1, b), -a1 // math.gcd(a1, b)
    alpha2, beta2 = b // math.gcd(a2, b), -a2 // math.gcd(a2, b)
    if a1 * alpha1 - a2 * alpha2 < 0:
        a1, a2 = a2, a1
        alpha1, beta1, alpha2, beta2 = alpha2, beta2, alpha1, beta1
    d = a1 * alpha1 - a2 * alpha2

    u1 = Sequence.from_counts({a1: alpha1, b: beta1})
    u2 = Sequence.from_counts({a2: alpha2, b: beta2})
    u_n = _minimal_n_atom(a1, a2, b, n)
    gamma, beta, m1, m2 = u_n.count(n), u_n.count(b), u_n.count(a1), u_n.count(a2)

    step = -a2 * alpha1 * alpha2
    if m1 < step:
        raise InapplicableError(
            f"N={n} is too small: the ladder needs M1 >= {step}, got M1={m1}"
        )

    element = u_n * u2**m1
    named: dict[str, Factorization] = {}
    for k in range(0, m1 // step + 1):
        u_nk = Sequence.from_counts(
            {
                n: gamma,
                b: beta,
                a1: m1 + a2 * alpha1 * alpha2 * k,
                a2: m2 - a1 * alpha1 * alpha2 * k,
            }
        )
        named[f"z_{k}"] = Factorization.from_counts(
            {u_nk: 1, u1: -a2 * alpha2 * k, u2: m1 + a1 * alpha1 * k}
        )
    _check_factorizations("prop46", element, named)

    ladder = [len(z) for z in named.values()]
    claims = {
        "half_factorial": is_half_factorial_three(a1, a2, b),
        "d": d,
        "gamma": gamma,
        "beta": beta,
        "M1": m1,
        "M2": m2,
        "ladder": ladder,
        "ladder_lengths": ladder == [m1 + 1 + d * k for k in range(len(ladder))],
        "pattern_0_d": pattern_contains(LengthSet.of(ladder), [0, d]) is not None,
    }
    _check_claims("prop46", claims, ["half_factorial", "ladder_lengths", "pattern_0_d"])

    return FamilyInstance(
        name="prop46",
        parameters={"a1": a1, "a2": a2, "b": b, "N": n},
        element=element,
        factorizations=named,
        claims=claims,
    )


def family_prop71(d1: int, d2: int, n: int, m: int) -> FamilyInstance:
    """B = L^(2 d1 d2 N) (-d2)^(2 d1 L N) (-d1)^(2 d2 L N) (d1 d2)^(2 L N).

    Validation is structural only: Z(B) is far too large to enumerate.
    """
    _require(3 <= d1 < d2, f"Need 3 <= d1 < d2, got d1={d1}, d2={d2}")
    _require(math.gcd(d1, d2) == 1, f"Need gcd(d1, d2) = 1, got {math.gcd(d1, d2)}")
    _require((d2 - 1) % (d1 - 1) != 0, f"Need d1-1 not dividing d2-1, got {d1 - 1} | {d2 - 1}")
    _require(n >= d2 - 1, f"Need N >= d2-1 = {d2 - 1}, got {n}")
    _require(m >= d1, f"Need M >= d1 = {d1}, got {m}")

    residue, modulus = crt([d2, d1], [d1 % d2, d2 % d1])
    residue, modulus = int(residue), int(modulus)
    big = residue + modulus * max(0, (d2 * m - residue) // modulus + 1)
    d = math.gcd(d1 - 1, d2 - 1)
    l = next(l for l in range(1, d2) if (l * (d2 - d1) + d) % (d2 - 1) == 0)
    l_prime = (l * (d2 - d1) + d) // (d2 - 1)

    element = Sequence.from_counts(
        {
            big: 2 * d1 * d2 * n,
            -d2: 2 * d1 * big * n,
            -d1: 2 * d2 * big * n,
            d1 * d2: 2 * big * n,
        }
    )
    a1 = Sequence.from_counts({big: d1, -d1: big})
    a2 = Sequence.from_counts({big: d2, -d2: big})
    b1 = Sequence.from_counts({d1 * d2: 1, -d1: d2})
    b2 = Sequence.from_counts({d1 * d2: 1, -d2: d1})
    a0 = Sequence.from_counts({big: 1, -d2: (big - d1) // d2, -d1: 1})
    atoms = {"A1": a1, "A2": a2, "B1": b1, "B2": b2, "A0": a0}

    z = Factorization.from_counts({a1: d2 * n, a2: d1 * n, b1: big * n, b2: big * n})
    z_prime = Factorization.from_counts(
        {
            a1: d2 * n - l * d2,
            a2: d1 * n + l * d1 - l_prime,
            a0: l_prime * d2,
            b1: big * n + l * big - l_prime,
            b2: big * n - l * big + l_prime,
        }
    )
    shortest = Factorization.from_counts({a2: 2 * d1 * n, b1: 2 * big * n})
    longest = Factorization.from_counts({a1: 2 * d2 * n, b2: 2 * big * n})
    named = {"z": z, "z_prime": z_prime, "shortest": shortest, "longest": longest}

    claims = {
        "L": big,
        "d": d,
        "l": l,
        "l_prime": l_prime,
        "atoms": {label: is_atom(atom) for label, atom in atoms.items()},
        "length_gap": len(z_prime) - len(z) == d,
        "gap_below_d1_minus_1": d <= d1 - 2,
        "away_from_edges": len(z) - len(shortest) >= n and len(longest) - len(z) >= n,
    }
    if not all(claims["atoms"].values()):
        raise ZsfDataError(
            f"prop71: constructed atoms fail the atom check: {claims['atoms']}",
            data={"atoms": {label: str(atom) for label, atom in atoms.items()}},
        )
    _check_factorizations("prop71", element, named)
    _check_claims("prop71", claims, ["length_gap", "gap_below_d1_minus_1", "away_from_edges"])
    LOGGER.debug(f"prop71 instance with L={big}, l={l}, l'={l_prime}")

    return FamilyInstance(
        name="prop71",
        parameters={"d1": d1, "d2": d2, "N": n, "M": m},
        element=element,
        factorizations=named,
        claims=claims,
    )


FAMILIES = {
    "lem1": family_lem1,
    "lem2": family_lem2,
    "prop2": family_prop2,
    "example6": family_example6,
    "prop46": family_prop46,
    "prop71": family_prop71,
}
