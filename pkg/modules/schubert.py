"""
Module 3: Schubert Calculus on G(2, d+1)

Exact cohomology ring of the Grassmannian of 2-planes in a (d+1)-space,
restricted to what the count needs: Schubert classes indexed by partitions in
a 2 x (d-1) box, multiplication by special classes (Pieri rule) and the
intersection number of a product of special classes.

Author: Wronski Count
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping
import sys
import os

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.helpers import InvalidArgumentError, InternalConsistencyError
from modules.combinatorics import ProblemSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class BoxPartition:
    """
    Two-row partition (a1 >= a2) in the 2 x (d-1) box; indexes sigma_{a1,a2}.
    """
    a1: int
    a2: int
    box_d: int

    def __post_init__(self):
        if self.box_d < 1:
            raise InvalidArgumentError(f"box_d must be positive, got {self.box_d}")
        if not 0 <= self.a2 <= self.a1 <= self.box_d - 1:
            raise InvalidArgumentError(
                f"Partition ({self.a1},{self.a2}) does not fit the 2x{self.box_d - 1} box")

    @property
    def codim(self) -> int:
        return self.a1 + self.a2


@dataclass(frozen=True)
class CohomologyElement:
    """
    Integer combination of Schubert classes of G(2, box_d+1).
    Zero coefficients are never stored.
    """
    box_d: int
    terms: Mapping[BoxPartition, int] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for partition, coefficient in self.terms.items():
            if partition.box_d != self.box_d:
                raise InvalidArgumentError(
                    f"Class {partition} does not live in G(2,{self.box_d + 1})")
            if coefficient:
                cleaned[partition] = coefficient
        object.__setattr__(self, 'terms', dict(sorted(cleaned.items(), reverse=True)))

    @classmethod
    def identity(cls, d: int) -> 'CohomologyElement':
        return cls(d, {BoxPartition(0, 0, d): 1})

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, a1: int, a2: int) -> int:
        for partition, value in self.terms.items():
            if (partition.a1, partition.a2) == (a1, a2):
                return value
        return 0

    def top_coefficient(self) -> int:
        """Coefficient of the class of a point, sigma_{d-1,d-1}."""
        return self.coefficient(self.box_d - 1, self.box_d - 1)

    def as_dict(self) -> Dict[tuple, int]:
        return {(p.a1, p.a2): c for p, c in self.terms.items()}

    def __add__(self, other: 'CohomologyElement') -> 'CohomologyElement':
        if other.box_d != self.box_d:
            raise InvalidArgumentError("Cannot add classes of different Grassmannians")
        total = dict(self.terms)
        for partition, coefficient in other.terms.items():
            total[partition] = total.get(partition, 0) + coefficient
        return CohomologyElement(self.box_d, total)


def special_class(q: int, d: int) -> CohomologyElement:
    """
    The special Schubert class sigma_q = sigma_{q,0}; sigma_0 is the identity.

    Args:
        q: Codimension, 0 <= q <= d-1
        d: Ambient degree (classes live in G(2, d+1))

    Returns:
        One-term CohomologyElement
    """
    if not 0 <= q <= d - 1:
        raise InvalidArgumentError(f"sigma_{q} does not exist in G(2,{d + 1})")
    return CohomologyElement(d, {BoxPartition(q, 0, d): 1})


def pieri_multiply(x: CohomologyElement, q: int) -> CohomologyElement:
    """
    Multiply by sigma_q using the two-row Pieri rule.

    sigma_{a1,a2} * sigma_q = sum of sigma_{c1,c2} over c1+c2 = a1+a2+q,
    c1 >= a1 >= c2 >= a2, c1 <= d-1. Products above the top degree vanish.

    Args:
        x: Element of H*(G(2, d+1))
        q: Codimension of the special class

    Returns:
        The product
    """
    d = x.box_d
    if not 0 <= q <= d - 1:
        raise InvalidArgumentError(f"sigma_{q} does not exist in G(2,{d + 1})")

    result: Dict[BoxPartition, int] = {}
    for partition, coefficient in x.terms.items():
        a1, a2 = partition.a1, partition.a2
        for c2 in range(a2, a1 + 1):
            c1 = a1 + a2 + q - c2
            if c1 < a1 or c1 > d - 1:
                continue
            key = BoxPartition(c1, c2, d)
            result[key] = result.get(key, 0) + coefficient
    return CohomologyElement(d, result)


def multiply_special_classes(qs: Iterable[int], d: int) -> CohomologyElement:
    """Product sigma_{q_1} * ... * sigma_{q_r} in G(2, d+1)."""
    product = CohomologyElement.identity(d)
    for q in qs:
        product = pieri_multiply(product, q)
        if product.is_zero():
            break
    return product


def intersection_number(spec: ProblemSpec) -> int:
    """
    Intersection number sigma_{m_1} * ... * sigma_{m_n} * sigma_{2d-2-M}.

    Specs whose classes do not exist (some m_j or m_inf outside [0, d-1])
    give 0.

    Args:
        spec: Problem spec

    Returns:
        Coefficient of the top class in the product
    """
    d = spec.d
    factors = list(spec.m) + [spec.m_inf]
    if any(q < 0 or q > d - 1 for q in factors):
        return 0

    product = multiply_special_classes(factors, d)
    stray = [p for p in product.terms if (p.a1, p.a2) != (d - 1, d - 1)]
    if stray:
        raise InternalConsistencyError(
            f"Product of codimension {2 * d - 2} has non-top terms {stray}")
    value = product.top_coefficient()
    logger.debug(f"intersection({spec.label()}) = {value}")
    return value


def wronski_map_degree_schubert(d: int) -> int:
    """Degree of the Wronski map as the self-intersection sigma_1^(2d-2)."""
    if d < 1:
        raise InvalidArgumentError(f"d must be positive, got {d}")
    if d == 1:
        return 1
    return multiply_special_classes([1] * (2 * d - 2), d).top_coefficient()


def main():
    """
    Demonstrate Pieri products and intersection numbers.
    """
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    print("sigma_1 * sigma_1 in G(2,4):", pieri_multiply(special_class(1, 3), 1).as_dict())
    for spec in [ProblemSpec(2, (1, 1)), ProblemSpec(3, (1, 1, 1, 1)), ProblemSpec(4, (2, 2, 1))]:
        print(f"{spec.label():20} intersection number: {intersection_number(spec)}")
    print("Wronski map degrees:", [wronski_map_degree_schubert(d) for d in range(1, 9)])


if __name__ == "__main__":
    main()
