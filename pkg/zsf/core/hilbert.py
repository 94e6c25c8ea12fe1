"""Minimal solutions of M·x = M·y over the nonnegative integers.

The pair monoid {(x, y) : M x = M y} is the kernel monoid of [M | -M]; its
atoms are computed by a completion procedure that grows candidate vectors
one unit at a time towards the kernel. The largest ratio |x|/|y| over the
monoid is also available as an exact rational linear program.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from sympy import Add, Eq, Integer, Rational, symbols
from sympy.solvers.simplex import InfeasibleLPError, UnboundedLPError, lpmax

from ..settings import get_settings
from .error import ZsfDataError, ZsfValidationError
from .models import Budget
from .utils import format_rational

LOGGER = logging.getLogger(__name__)

Vector = tuple[int, ...]


@dataclass(frozen=True, order=True)
class PairAtom:
    left: Vector
    right: Vector

    @property
    def degree(self) -> int:
        return sum(self.left) + sum(self.right)

    @property
    def ratio(self) -> Fraction | None:
        if not sum(self.right):
            return None
        return Fraction(sum(self.left), sum(self.right))

    def to_json(self) -> dict[str, Any]:
        return {"left": list(self.left), "right": list(self.right)}


@dataclass(frozen=True)
class HilbertBasis:
    pairs: tuple[PairAtom, ...]
    degree_bound: int
    complete: bool

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def best_ratio(self) -> tuple[Fraction, PairAtom] | None:
        candidates = [(pair.ratio, pair) for pair in self.pairs if pair.ratio is not None]
        if not candidates:
            return None
        return max(candidates, key=lambda item: (item[0], item[1]))

    def to_json(self) -> dict[str, Any]:
        return {
            "pairs": [pair.to_json() for pair in self.pairs],
            "degree_bound": self.degree_bound,
            "complete": self.complete,
        }


def _check_matrix(matrix: list[list[int]]) -> int:
    widths = {len(row) for row in matrix}
    if len(widths) > 1:
        raise ZsfValidationError(f"Relation matrix rows differ in length: {sorted(widths)}")
    width = widths.pop() if widths else 0
    if not width:
        raise ZsfValidationError("Relation matrix has no generator columns")
    return width


def _image(columns: list[Vector], vector: Vector) -> Vector:
    rows = len(columns[0]) if columns else 0
    return tuple(
        sum(columns[j][i] * vector[j] for j in range(len(vector)) if vector[j])
        for i in range(rows)
    )


def _dominates(first: Vector, second: Vector) -> bool:
    return all(a >= b for a, b in zip(first, second))


@dataclass(frozen=True)
class KernelBasis:
    vectors: tuple[Vector, ...]
    degree_bound: int
    complete: bool

    @property
    def max_degree(self) -> int:
        return max((sum(vector) for vector in self.vectors), default=0)


def kernel_basis(
    columns: list[Vector],
    budget: Budget | None = None,
    max_degree: int | None = None,
    operation: str = "kernel_basis",
) -> KernelBasis:
    """Minimal nonzero x >= 0 with sum_j x_j * columns[j] = 0.

    Stops after `max_degree` completion rounds; the result then holds exactly
    the minimal solutions of degree at most that bound and is marked
    incomplete.
    """
    if not columns:
        raise ZsfValidationError("Kernel basis needs at least one column")
    if len({len(column) for column in columns}) > 1:
        raise ZsfValidationError("Kernel basis columns differ in length")

    max_degree = max_degree or get_settings().hilbert_max_degree
    tracker = (budget or Budget()).tracker(operation)
    size = len(columns)
    units = [tuple(int(i == j) for i in range(size)) for j in range(size)]

    basis: list[Vector] = []
    frontier = set(units)
    degree = 1
    complete = True
    while frontier:
        solutions = sorted(v for v in frontier if not any(_image(columns, v)))
        for solution in solutions:
            if not any(_dominates(solution, found) for found in basis):
                basis.append(solution)

        if degree >= max_degree:
            complete = not any(v for v in frontier if any(_image(columns, v)))
            break

        following: set[Vector] = set()
        for vector in sorted(frontier):
            image = _image(columns, vector)
            if not any(image):
                continue
            for j, column in enumerate(columns):
                tracker.tick()
                if sum(a * b for a, b in zip(image, column)) >= 0:
                    continue
                candidate = tuple(
                    value + 1 if index == j else value for index, value in enumerate(vector)
                )
                if not any(_dominates(candidate, found) for found in basis):
                    following.add(candidate)
        frontier = following
        degree += 1

    LOGGER.debug(
        f"Kernel basis of {len(basis)} vectors for {size} columns "
        f"(degree {degree}, complete={complete})"
    )
    return KernelBasis(vectors=tuple(sorted(basis)), degree_bound=degree, complete=complete)


def hilbert_basis(
    matrix: list[list[int]],
    budget: Budget | None = None,
    max_degree: int | None = None,
) -> HilbertBasis:
    """All minimal nonzero (x, y) with M x = M y."""
    generators = _check_matrix(matrix)
    # columns of [M | -M]
    columns: list[Vector] = [
        tuple(row[j] for row in matrix) for j in range(generators)
    ] + [tuple(-row[j] for row in matrix) for j in range(generators)]

    kernel = kernel_basis(columns, budget, max_degree, operation="hilbert_basis")
    pairs = tuple(
        sorted(PairAtom(left=v[:generators], right=v[generators:]) for v in kernel.vectors)
    )
    return HilbertBasis(pairs=pairs, degree_bound=kernel.degree_bound, complete=kernel.complete)


@dataclass(frozen=True)
class RatioOptimum:
    value: Fraction
    left: Vector
    right: Vector

    def to_json(self) -> dict[str, Any]:
        return {
            "value": format_rational(self.value),
            "left": list(self.left),
            "right": list(self.right),
        }


def _fraction(value: Rational) -> Fraction:
    value = Rational(value)
    return Fraction(int(value.p), int(value.q))


def max_pair_ratio(matrix: list[list[int]]) -> RatioOptimum:
    """sup |x|/|y| over M x = M y, y != 0, as an exact linear program.

    Maximizes sum(x) subject to M x = M y and sum(y) = 1, then scales the
    optimal vertex to an integral witness.
    """
    generators = _check_matrix(matrix)
    xs = symbols(f"x0:{generators}")
    ys = symbols(f"y0:{generators}")

    constraints = [Eq(Add(*ys), 1)]
    for row in matrix:
        relation = Add(*(a * (x - y) for a, x, y in zip(row, xs, ys)))
        if relation != 0:
            constraints.append(Eq(relation, 0))
    constraints.extend(symbol >= 0 for symbol in (*xs, *ys))

    try:
        optimum, point = lpmax(Add(*xs), constraints)
    except InfeasibleLPError:
        raise ZsfValidationError("Relation system has no solution with y != 0")
    except UnboundedLPError:
        raise ZsfValidationError("Linear program is unbounded")

    value = _fraction(optimum)
    values = [_fraction(point.get(symbol, Integer(0))) for symbol in (*xs, *ys)]
    scale = math.lcm(*(entry.denominator for entry in values))
    integral = [int(entry * scale) for entry in values]
    left, right = tuple(integral[:generators]), tuple(integral[generators:])

    for row in matrix:
        if sum(a * x for a, x in zip(row, left)) != sum(a * y for a, y in zip(row, right)):
            raise ZsfDataError(
                "Simplex witness violates the relation system",
                data={"left": list(left), "right": list(right)},
            )
    if Fraction(sum(left), sum(right)) != value:
        raise ZsfDataError("Simplex witness does not realize the optimum")

    divisor = math.gcd(*left, *right)
    left = tuple(entry // divisor for entry in left)
    right = tuple(entry // divisor for entry in right)
    LOGGER.debug(f"Simplex optimum {value} for {generators} generators")
    return RatioOptimum(value=value, left=left, right=right)
