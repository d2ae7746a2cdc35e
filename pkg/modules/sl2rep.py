"""
Module 2: sl2 Representation Oracle

Weight multiplicities of tensor products of irreducible sl2 modules,
singular-vector dimensions read off from them, and the iterated
Clebsch-Gordan decomposition. Only dimensions are computed; no module
bases or raising/lowering matrices are built.

Author: Wronski Count
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Mapping, Sequence, Tuple
import sys
import os

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.helpers import InvalidArgumentError, InternalConsistencyError

logger = logging.getLogger(__name__)


def _validate(m: Sequence[int], allow_empty: bool = False) -> Tuple[int, ...]:
    m = tuple(int(v) for v in m)
    if not m and not allow_empty:
        raise InvalidArgumentError("At least one tensor factor is required")
    if any(v < 1 for v in m):
        raise InvalidArgumentError(f"Highest weights must be positive, got {m}")
    return m


@dataclass(frozen=True)
class WeightMultiplicity:
    """
    Weight multiplicities of L = L_{m_1} x ... x L_{m_n}, stored sparsely.
    """
    m: Tuple[int, ...]
    weights: Mapping[int, int]

    @property
    def highest_weight(self) -> int:
        return sum(self.m)

    def mult(self, w: int) -> int:
        """Multiplicity of weight w (0 outside the support)."""
        return self.weights.get(w, 0)

    def total_dimension(self) -> int:
        return sum(self.weights.values())


def weight_multiplicities(m: Sequence[int]) -> WeightMultiplicity:
    """
    Convolve the weight sets {m_j, m_j-2, ..., -m_j} over all factors.

    Args:
        m: Highest weights of the factors

    Returns:
        WeightMultiplicity with exact integer multiplicities
    """
    m = _validate(m)
    weights = Counter({0: 1})
    for mj in m:
        step = Counter()
        for w, count in weights.items():
            for shift in range(-mj, mj + 1, 2):
                step[w + shift] += count
        weights = step
    return WeightMultiplicity(m=m, weights=dict(weights))


def dim_sing_oracle(m: Sequence[int], k: int) -> int:
    """
    Dimension of singular vectors of weight M-2k as mult(M-2k) - mult(M-2k+2).

    Args:
        m: Highest weights of the factors
        k: Level; k < 0 or 2k > M gives 0

    Returns:
        Nonnegative exact dimension
    """
    table = weight_multiplicities(m)
    M = table.highest_weight
    if k < 0 or 2 * k > M:
        return 0
    w = M - 2 * k
    value = table.mult(w) - table.mult(w + 2)
    if value < 0:
        raise InternalConsistencyError(
            f"Weight multiplicities of m={table.m} decrease towards the top at weight {w}")
    return value


def tensor_decompose(m: Sequence[int]) -> Dict[int, int]:
    """
    Iterated Clebsch-Gordan decomposition.

    L_a x L_b = L_{a+b} + L_{a+b-2} + ... + L_{|a-b|}. An empty factor list is
    the trivial module.

    Args:
        m: Highest weights of the factors

    Returns:
        Map highest weight -> multiplicity
    """
    m = _validate(m, allow_empty=True)
    decomposition = Counter({0: 1})
    for b in m:
        step = Counter()
        for a, count in decomposition.items():
            for w in range(abs(a - b), a + b + 1, 2):
                step[w] += count
        decomposition = step
    logger.debug(f"Decomposed {len(m)} factors into {len(decomposition)} irreducibles")
    return dict(sorted(decomposition.items(), reverse=True))


def trivial_multiplicity(m: Sequence[int]) -> int:
    """Multiplicity of the trivial module L_0 in the tensor product."""
    return tensor_decompose(m).get(0, 0)


def main():
    """
    Demonstrate the representation-theoretic oracle.
    """
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    for m in [(1, 1), (2, 2, 1), (1, 1, 1, 1), (3,)]:
        table = weight_multiplicities(m)
        print(f"m={m}")
        print(f"  weights:      {dict(sorted(table.weights.items(), reverse=True))}")
        print(f"  decomposition: {tensor_decompose(m)}")
        print(f"  singular dims: "
              f"{[dim_sing_oracle(m, k) for k in range(table.highest_weight // 2 + 1)]}")


if __name__ == "__main__":
    main()
