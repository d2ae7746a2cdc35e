"""
Module 1: Closed-Form Counting

This module holds the problem description shared by every route and the
closed formulas: the count of classes, the dimension of singular vectors,
Catalan numbers and the generating function of the L_0 multiplicities.

All arithmetic is exact Python integer arithmetic.

Author: Wronski Count
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterator, List, Optional, Sequence, Tuple
import sys
import os

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.helpers import (
    SpecRegime,
    InvalidArgumentError,
    UnsupportedCaseError,
    InternalConsistencyError
)

logger = logging.getLogger(__name__)

# Above this many critical points, subsets are enumerated by grouping equal
# multiplicities instead of one by one.
SUBSET_ENUMERATION_LIMIT = 20


@dataclass(frozen=True)
class ProblemSpec:
    """
    A counting / solving instance: degree d, multiplicities m and optionally
    the positions z of the finite critical points.
    """
    d: int
    m: Tuple[int, ...]
    z: Optional[Tuple[complex, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'm', tuple(int(v) for v in self.m))
        if self.z is not None:
            object.__setattr__(self, 'z', tuple(complex(v) for v in self.z))
            if len(self.z) != len(self.m):
                raise InvalidArgumentError(
                    f"z has {len(self.z)} entries but m has {len(self.m)}")
        if self.d < 1:
            raise InvalidArgumentError(f"Degree must be positive, got d={self.d}")
        if not self.m:
            raise InvalidArgumentError("At least one critical point is required")
        if any(v < 1 for v in self.m):
            raise InvalidArgumentError(f"Multiplicities must be positive, got {self.m}")

    @property
    def n(self) -> int:
        return len(self.m)

    @property
    def M(self) -> int:
        return sum(self.m)

    @property
    def k(self) -> int:
        """Order of the sought planes."""
        return self.M + 1 - self.d

    @property
    def m_inf(self) -> int:
        """Multiplicity at infinity."""
        return 2 * self.d - 2 - self.M

    @property
    def admissible(self) -> bool:
        return (self.d - 1 <= self.M <= 2 * self.d - 2
                and all(v <= self.d - 1 for v in self.m))

    def label(self) -> str:
        return f"d={self.d} m=({','.join(str(v) for v in self.m)})"


def binomial(a: int, b: int) -> int:
    """
    Binomial coefficient with the convention C(a, b) = 0 for a < b.

    Args:
        a: Any integer
        b: Nonnegative integer

    Returns:
        C(a, b) as an exact integer
    """
    if b < 0:
        raise InvalidArgumentError(f"binomial lower index must be >= 0, got {b}")
    if a < b:
        return 0
    return math.comb(a, b)


def _subset_sums(m: Sequence[int]) -> Iterator[Tuple[int, int, int]]:
    """
    Yield (q, s, weight): `weight` subsets of size q with element sum s.

    The empty subset is included. Small inputs are enumerated subset by
    subset; larger ones group equal values and weight by binomials.
    """
    if len(m) <= SUBSET_ENUMERATION_LIMIT:
        for q in range(len(m) + 1):
            for subset in combinations(m, q):
                yield q, sum(subset), 1
        return

    groups = sorted(Counter(m).items())
    ranges = [range(count + 1) for _, count in groups]
    for picks in product(*ranges):
        q = sum(picks)
        s = sum(value * r for (value, _), r in zip(groups, picks))
        weight = 1
        for (_, count), r in zip(groups, picks):
            weight *= math.comb(count, r)
        yield q, s, weight


def sharp_formula(spec: ProblemSpec) -> int:
    """
    Number of classes of rational functions of the given type for generic z.

    Args:
        spec: Problem with n >= 2 critical points

    Returns:
        Nonnegative exact count
    """
    n, d = spec.n, spec.d
    if n < 2:
        raise UnsupportedCaseError(
            "The closed formula needs n >= 2; use count_classes for a single point")

    total = 0
    for q, s, weight in _subset_sums(spec.m):
        if q == 0:
            continue
        sign = -1 if (n - q) % 2 else 1
        total += sign * weight * binomial(s + q - d - 1, n - 2)

    if total < 0:
        raise InternalConsistencyError(f"Negative class count {total} for {spec.label()}")
    logger.debug(f"sharp({spec.label()}) = {total}")
    return total


def count_classes(spec: ProblemSpec) -> int:
    """
    Number of classes for any n: a single critical point carries one class
    exactly when its multiplicity is d-1, and vanishing specs have none.

    The signed sum of sharp_formula is only meaningful under
    d-1 <= M <= 2d-2 and m_j <= d-1 (it is -1 for d=2, m=(3,3)).
    """
    if spec.n == 1:
        return 1 if spec.m[0] == spec.d - 1 else 0
    if classify_spec(spec) is SpecRegime.VANISHING:
        return 0
    return sharp_formula(spec)


def classify_spec(spec: ProblemSpec) -> SpecRegime:
    """
    Decide which statement about the count applies.

    Args:
        spec: Problem spec

    Returns:
        SpecRegime value
    """
    if spec.n == 1:
        return SpecRegime.SINGLE_POINT
    if (any(v > spec.d - 1 for v in spec.m)
            or spec.M > 2 * spec.d - 2 or spec.M < spec.d - 1):
        return SpecRegime.VANISHING
    if spec.M == spec.d - 1:
        return SpecRegime.BOUNDARY
    return SpecRegime.GENERIC


def dim_sing_formula(m: Sequence[int], k: int) -> int:
    """
    Dimension of the singular vectors of weight M-2k in L_{m_1} x ... x L_{m_n}.

    Out-of-range k (k < 0 or 2k > M) gives 0.

    Args:
        m: Highest weights m_1..m_n
        k: Level

    Returns:
        Nonnegative exact dimension
    """
    m = tuple(int(v) for v in m)
    if not m or any(v < 1 for v in m):
        raise InvalidArgumentError(f"Multiplicities must be positive, got {m}")
    M = sum(m)
    if k < 0 or 2 * k > M:
        return 0
    n = len(m)
    if n == 1:
        return 1 if k == 0 else 0

    total = 0
    for q, s, weight in _subset_sums(m):
        sign = -1 if q % 2 else 1
        total += sign * weight * binomial(k + n - 2 - s - q, n - 2)

    if total < 0:
        raise InternalConsistencyError(f"Negative dimension {total} for m={m}, k={k}")
    return total


def catalan(d: int) -> int:
    """The d-th Catalan number C_d = C(2d-2, d-1) / d."""
    if d < 1:
        raise InvalidArgumentError(f"Catalan index must be >= 1, got {d}")
    return math.comb(2 * d - 2, d - 1) // d


def wronski_map_degree(d: int) -> int:
    """
    Degree of the Wronski map on the big cell of planes of degree d: the
    class count for 2d-2 simple critical points.
    """
    if d < 1:
        raise InvalidArgumentError(f"d must be positive, got {d}")
    if d == 1:
        return 1
    return sharp_formula(ProblemSpec(d, (1,) * (2 * d - 2)))


def genfun_coefficients(order: int) -> List[int]:
    """
    Coefficients M_1..M_order of the generating function of the
    multiplicity of L_0 in L_1^{x k}: zero for odd k, C_{j+1} for k = 2j.

    Args:
        order: Number of coefficients

    Returns:
        List of exact integers
    """
    if order < 1:
        raise InvalidArgumentError(f"order must be >= 1, got {order}")
    return [0 if k % 2 else catalan(k // 2 + 1) for k in range(1, order + 1)]


def main():
    """
    Demonstrate the closed formulas.
    """
    logging.basicConfig(
        level=logging.DEBUG,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    examples = [
        ProblemSpec(3, (1, 1, 1, 1)),
        ProblemSpec(4, (2, 2, 1)),
        ProblemSpec(5, (5, 1)),
        ProblemSpec(4, (1, 1, 1)),
        ProblemSpec(3, (2, 1)),
    ]

    print("Closed-form class counts")
    print("=" * 60)
    for spec in examples:
        print(f"{spec.label():24} | {classify_spec(spec).value:10} | "
              f"count: {count_classes(spec)} | "
              f"sing: {dim_sing_formula(spec.m, spec.k)}")
    print("=" * 60)
    print("Catalan:", [catalan(d) for d in range(1, 9)])
    print("M(tau): ", genfun_coefficients(10))


if __name__ == "__main__":
    main()
