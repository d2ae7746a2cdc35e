"""
Module 4: Polynomials, Wronskians and Fuchsian Equations

Two polynomial backends behind one interface:
- ExactPolynomial: coefficients are Fractions, used for algebraic identities
- NumericPolynomial: complex double coefficients (numpy), used by the solver

On top of them: Wronskians, 2-planes of polynomials, and the second-order
Fuchsian equation whose solution space is a given plane.

Coefficients are always stored lowest degree first; the zero polynomial has
no coefficients and degree -1.

Author: Wronski Count
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Sequence, Tuple
import sys
import os

import numpy as np
from numpy.polynomial import polynomial as npp

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.helpers import (
    InvalidArgumentError,
    InvalidConfigurationError,
    DegeneratePointError,
    NotASolutionError,
    PreconditionError
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8


class Polynomial(ABC):
    """
    Common interface of the exact and numeric polynomial backends.
    """

    coeffs: Sequence

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self):
        if self.is_zero():
            raise InvalidArgumentError("The zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def coefficient_norm(self) -> float:
        """Max-norm of the coefficient vector."""
        if self.is_zero():
            return 0.0
        return float(max(abs(c) for c in self.coeffs))

    def evaluation_scale(self, x) -> float:
        """sum_j |c_j| |x|^j, the natural size of self(x)."""
        r = abs(x)
        return float(sum(abs(c) * r ** j for j, c in enumerate(self.coeffs)))

    def monic(self) -> 'Polynomial':
        return self.scale(1 / self.leading)

    def __neg__(self) -> 'Polynomial':
        return self.scale(-1)

    def __sub__(self, other: 'Polynomial') -> 'Polynomial':
        return self + (-other)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({list(self.coeffs)})"

    @abstractmethod
    def __call__(self, x):
        ...

    @abstractmethod
    def __add__(self, other: 'Polynomial') -> 'Polynomial':
        ...

    @abstractmethod
    def __mul__(self, other: 'Polynomial') -> 'Polynomial':
        ...

    @abstractmethod
    def scale(self, c) -> 'Polynomial':
        ...

    @abstractmethod
    def derivative(self) -> 'Polynomial':
        ...

    @abstractmethod
    def antiderivative(self) -> 'Polynomial':
        """Primitive with zero constant term."""

    @abstractmethod
    def divmod(self, other: 'Polynomial') -> Tuple['Polynomial', 'Polynomial']:
        ...

    @abstractmethod
    def trim(self, rel_tol: float) -> 'Polynomial':
        """Drop leading coefficients below rel_tol times the coefficient norm."""

    @abstractmethod
    def roots(self) -> np.ndarray:
        ...

    @abstractmethod
    def to_json(self) -> dict:
        ...

    @classmethod
    @abstractmethod
    def from_roots(cls, roots: Sequence, multiplicities: Sequence[int] = None) -> 'Polynomial':
        """Monic polynomial prod (x - r_j)^{mult_j}."""

    @classmethod
    @abstractmethod
    def constant(cls, c) -> 'Polynomial':
        ...


def _expand_roots(roots: Sequence, multiplicities: Sequence[int] = None) -> list:
    if multiplicities is None:
        return list(roots)
    if len(multiplicities) != len(roots):
        raise InvalidArgumentError(
            f"{len(roots)} roots but {len(multiplicities)} multiplicities")
    expanded = []
    for r, mult in zip(roots, multiplicities):
        if mult < 0:
            raise InvalidArgumentError(f"Negative multiplicity {mult}")
        expanded.extend([r] * mult)
    return expanded


@dataclass(frozen=True)
class ExactPolynomial(Polynomial):
    """Dense polynomial over the rationals."""

    coeffs: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        try:
            values = [Fraction(c) for c in self.coeffs]
        except (TypeError, ValueError):
            raise InvalidArgumentError(f"Exact coefficients must be rational: {self.coeffs}")
        while values and values[-1] == 0:
            values.pop()
        object.__setattr__(self, 'coeffs', tuple(values))

    def __call__(self, x):
        result = 0
        for c in reversed(self.coeffs):
            result = result * x + c
        return result

    def __add__(self, other: 'ExactPolynomial') -> 'ExactPolynomial':
        a, b = self.coeffs, other.coeffs
        size = max(len(a), len(b))
        return ExactPolynomial([
            (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(size)
        ])

    def __mul__(self, other) -> 'ExactPolynomial':
        if not isinstance(other, ExactPolynomial):
            return self.scale(other)
        if self.is_zero() or other.is_zero():
            return ExactPolynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return ExactPolynomial(out)

    __rmul__ = __mul__

    def scale(self, c) -> 'ExactPolynomial':
        c = Fraction(c)
        return ExactPolynomial([c * a for a in self.coeffs])

    def derivative(self) -> 'ExactPolynomial':
        return ExactPolynomial([j * c for j, c in enumerate(self.coeffs)][1:])

    def antiderivative(self) -> 'ExactPolynomial':
        return ExactPolynomial([Fraction(0)] + [c / (j + 1) for j, c in enumerate(self.coeffs)])

    def divmod(self, other: 'ExactPolynomial') -> Tuple['ExactPolynomial', 'ExactPolynomial']:
        if other.is_zero():
            raise ZeroDivisionError("Polynomial division by zero")
        remainder = list(self.coeffs)
        quotient = [Fraction(0)] * max(len(remainder) - len(other.coeffs) + 1, 0)
        lead = other.leading
        for shift in range(len(quotient) - 1, -1, -1):
            factor = remainder[shift + other.degree] / lead
            quotient[shift] = factor
            for j, c in enumerate(other.coeffs):
                remainder[shift + j] -= factor * c
        return ExactPolynomial(quotient), ExactPolynomial(remainder[:other.degree])

    def gcd(self, other: 'ExactPolynomial') -> 'ExactPolynomial':
        """Monic greatest common divisor (Euclid)."""
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        return a.monic() if not a.is_zero() else a

    def trim(self, rel_tol: float = 0.0) -> 'ExactPolynomial':
        # exact zeros are already gone
        return self

    def roots(self) -> np.ndarray:
        return self.to_numeric().roots()

    def to_numeric(self) -> 'NumericPolynomial':
        return NumericPolynomial([complex(float(c)) for c in self.coeffs])

    def to_json(self) -> dict:
        return {"coeffs": [f"{c.numerator}/{c.denominator}" for c in self.coeffs]}

    @classmethod
    def from_json(cls, data: dict) -> 'ExactPolynomial':
        return cls([Fraction(text) for text in data["coeffs"]])

    @classmethod
    def from_roots(cls, roots: Sequence, multiplicities: Sequence[int] = None) -> 'ExactPolynomial':
        result = cls([1])
        for r in _expand_roots(roots, multiplicities):
            if isinstance(r, complex):
                if r.imag != 0:
                    raise InvalidArgumentError(f"Exact polynomials need rational roots, got {r}")
                r = r.real
            result = result * cls([-Fraction(r), 1])
        return result

    @classmethod
    def constant(cls, c) -> 'ExactPolynomial':
        return cls([c])


@dataclass(frozen=True, eq=False)
class NumericPolynomial(Polynomial):
    """Dense polynomial with complex double coefficients."""

    coeffs: np.ndarray = ()
    degree_tol: float = 0.0

    def __post_init__(self):
        values = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).ravel()
        end = len(values)
        while end and abs(values[end - 1]) <= self.degree_tol:
            end -= 1
        values = values[:end].copy()
        values.setflags(write=False)
        object.__setattr__(self, 'coeffs', values)

    def _series(self) -> np.ndarray:
        return self.coeffs if len(self.coeffs) else np.zeros(1, dtype=complex)

    def __call__(self, x):
        return npp.polyval(x, self._series())

    def __add__(self, other: 'NumericPolynomial') -> 'NumericPolynomial':
        return NumericPolynomial(npp.polyadd(self._series(), other._series()))

    def __mul__(self, other) -> 'NumericPolynomial':
        if not isinstance(other, NumericPolynomial):
            return self.scale(other)
        return NumericPolynomial(npp.polymul(self._series(), other._series()))

    __rmul__ = __mul__

    def scale(self, c) -> 'NumericPolynomial':
        return NumericPolynomial(self._series() * complex(c))

    def derivative(self) -> 'NumericPolynomial':
        return NumericPolynomial(npp.polyder(self._series()))

    def antiderivative(self) -> 'NumericPolynomial':
        return NumericPolynomial(npp.polyint(self._series()))

    def divmod(self, other: 'NumericPolynomial') -> Tuple['NumericPolynomial', 'NumericPolynomial']:
        if other.is_zero():
            raise ZeroDivisionError("Polynomial division by zero")
        quotient, remainder = npp.polydiv(self._series(), other.coeffs)
        return NumericPolynomial(quotient), NumericPolynomial(remainder)

    def trim(self, rel_tol: float = 1e-12) -> 'NumericPolynomial':
        return NumericPolynomial(self.coeffs, degree_tol=rel_tol * self.coefficient_norm())

    def roots(self) -> np.ndarray:
        if self.degree < 1:
            return np.zeros(0, dtype=complex)
        return npp.polyroots(self.coeffs).astype(complex)

    def to_json(self) -> dict:
        return {"coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs]}

    @classmethod
    def from_json(cls, data: dict) -> 'NumericPolynomial':
        return cls([complex(re, im) for re, im in data["coeffs"]])

    @classmethod
    def from_roots(cls, roots: Sequence, multiplicities: Sequence[int] = None) -> 'NumericPolynomial':
        expanded = _expand_roots(roots, multiplicities)
        return cls(npp.polyfromroots(np.asarray(expanded, dtype=complex)))

    @classmethod
    def constant(cls, c) -> 'NumericPolynomial':
        return cls([c])


def wronskian(g: Polynomial, f: Polynomial) -> Polynomial:
    """
    Wronskian W[g, f] = g'f - gf'.

    Args:
        g: Polynomial
        f: Polynomial of the same backend

    Returns:
        The Wronskian (exact for exact inputs)
    """
    return g.derivative() * f - g * f.derivative()


def _check_distinct(z: Sequence) -> None:
    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            if z[i] == z[j]:
                raise InvalidConfigurationError(
                    f"Critical points z_{i + 1} and z_{j + 1} coincide ({z[i]})")


def wronskian_of_configuration(z: Sequence, m: Sequence[int],
                               exact: bool = False) -> Polynomial:
    """
    The monic polynomial prod_j (x - z_j)^{m_j} of degree M.

    Args:
        z: Pairwise distinct critical points
        m: Multiplicities
        exact: Build an ExactPolynomial (z must then be rational)

    Returns:
        NumericPolynomial (or ExactPolynomial when exact=True)
    """
    if len(z) != len(m):
        raise InvalidArgumentError(f"{len(z)} points but {len(m)} multiplicities")
    _check_distinct(list(z))
    cls = ExactPolynomial if exact else NumericPolynomial
    return cls.from_roots(list(z), list(m))


def coprimality_margin(g: Polynomial, f: Polynomial) -> float:
    """
    How far g is from vanishing at the roots of f, in [0, 1].

    min over roots r of f of |g(r)| / sum_j |g_j||r|^j; 1.0 when f is constant.
    """
    roots = f.roots()
    if len(roots) == 0:
        return 1.0
    if g.is_zero():
        return 0.0
    numeric_g = g.to_numeric() if isinstance(g, ExactPolynomial) else g
    margins = []
    for r in roots:
        scale = numeric_g.evaluation_scale(r)
        margins.append(abs(numeric_g(r)) / scale if scale > 0 else 0.0)
    return float(min(margins))


def min_root_separation(p: Polynomial) -> float:
    """Smallest distance between two roots of p (inf with fewer than two roots)."""
    roots = p.roots()
    if len(roots) < 2:
        return math.inf
    diffs = np.abs(roots[:, None] - roots[None, :])
    diffs[np.diag_indices(len(roots))] = np.inf
    return float(diffs.min())


@dataclass(frozen=True, eq=False)
class PolyPlane:
    """
    A 2-plane of polynomials given by a basis of distinct degrees,
    deg g > deg f.
    """
    g: Polynomial
    f: Polynomial

    def __post_init__(self):
        if type(self.g) is not type(self.f):
            raise InvalidArgumentError("Basis polynomials must use the same backend")
        if self.g.is_zero() or self.f.is_zero():
            raise InvalidArgumentError("A plane basis cannot contain the zero polynomial")
        if self.g.degree == self.f.degree:
            raise InvalidArgumentError(
                "Basis polynomials must have distinct degrees (see PolyPlane.from_basis)")
        if self.g.degree < self.f.degree:
            g, f = self.f, self.g
            object.__setattr__(self, 'g', g)
            object.__setattr__(self, 'f', f)

    @classmethod
    def from_basis(cls, p: Polynomial, q: Polynomial, tol: float = 1e-12) -> 'PolyPlane':
        """Reduce any basis to one of distinct degrees."""
        if p.degree == q.degree and not p.is_zero():
            reduced = (p - q.scale(p.leading / q.leading)).trim(tol)
            if reduced.is_zero():
                raise InvalidArgumentError("Polynomials are proportional; they span a line")
            p = reduced
        return cls(p, q)

    @property
    def degree(self) -> int:
        return self.g.degree

    @property
    def order(self) -> int:
        return self.f.degree

    def wronskian(self) -> Polynomial:
        return wronskian(self.g, self.f)

    def is_generic(self, tol: float = DEFAULT_TOL) -> bool:
        """True when g and f share no root."""
        if isinstance(self.f, ExactPolynomial):
            return self.g.gcd(self.f).degree == 0
        return coprimality_margin(self.g, self.f) > tol


class PlaneType(NamedTuple):
    degree: int
    order: int
    wronskian_degree: int


def plane_type(plane: PolyPlane, tol: float = 1e-12) -> PlaneType:
    """
    Degree, order and Wronskian degree of a plane. For generic planes
    degree + order = wronskian_degree + 1.
    """
    return PlaneType(plane.degree, plane.order, plane.wronskian().trim(tol).degree)


def _is_negligible(value, scale: float, tol: float) -> bool:
    return abs(value) <= tol * max(scale, 1e-300)


def local_wronskian_identity_check(plane: PolyPlane, z, tol: float = DEFAULT_TOL) -> bool:
    """
    Check W'(z)/W(z) = p''(z)/p'(z) for the polynomial p of the plane that
    vanishes at z.

    Args:
        plane: The plane
        z: Point where some polynomial of the plane has a simple root
        tol: Relative tolerance

    Returns:
        Whether the identity holds (and W(z) != 0)
    """
    g, f = plane.g, plane.f
    fz, gz = f(z), g(z)
    if _is_negligible(fz, f.evaluation_scale(z), tol):
        if _is_negligible(gz, g.evaluation_scale(z), tol):
            raise DegeneratePointError(f"Every polynomial of the plane vanishes at {z}")
        p = f
    else:
        p = g - f.scale(gz / fz)

    dp = p.derivative()
    p1, p2 = dp(z), dp.derivative()(z)
    if _is_negligible(p1, dp.evaluation_scale(z), tol):
        raise DegeneratePointError(f"{z} is a critical point of the plane; the identity does not apply")

    W = plane.wronskian()
    Wz = W(z)
    if _is_negligible(Wz, W.evaluation_scale(z), tol):
        return False
    lhs = W.derivative()(z) / Wz
    rhs = p2 / p1
    return bool(abs(lhs - rhs) <= tol * max(1.0, abs(rhs)))


@dataclass(frozen=True, eq=False)
class FuchsianEquation:
    """
    F u'' + G u' + H u = 0 with F = prod (x - z_j),
    G/F = sum -m_j/(x - z_j) and deg H <= n-2.
    """
    F: Polynomial
    G: Polynomial
    H: Polynomial

    def apply(self, u: Polynomial) -> Polynomial:
        du = u.derivative()
        return self.F * du.derivative() + self.G * du + self.H * u

    def residual(self, u: Polynomial) -> float:
        """Coefficient max-norm of the equation applied to u, relative to its terms."""
        du = u.derivative()
        terms = [self.F * du.derivative(), self.G * du, self.H * u]
        scale = max(t.coefficient_norm() for t in terms)
        if scale == 0:
            return 0.0
        return (terms[0] + terms[1] + terms[2]).coefficient_norm() / scale

    def to_json(self) -> dict:
        return {"F": self.F.to_json(), "G": self.G.to_json(), "H": self.H.to_json()}


def _divide_clean(a: Polynomial, b: Polynomial, tol: float, what: str) -> Polynomial:
    quotient, remainder = a.divmod(b)
    if remainder.coefficient_norm() > tol * max(a.coefficient_norm(), 1e-300):
        raise NotASolutionError(
            f"{what}: remainder {remainder.coefficient_norm():.3e} does not vanish")
    return quotient


def fuchsian_from_plane(plane: PolyPlane, z: Sequence, m: Sequence[int],
                        tol: float = DEFAULT_TOL) -> FuchsianEquation:
    """
    Build the Fuchsian equation whose solution space is the plane.

    The plane solves W u'' - W' u' + h u = 0 with h = (-W f'' + W' f')/f;
    dividing by prod (x - z_j)^{m_j - 1} and the leading coefficient of W
    gives F u'' + G u' + H u = 0.

    Args:
        plane: Generic plane whose Wronskian is proportional to prod (x-z_j)^{m_j}
        z: Critical points
        m: Multiplicities
        tol: Relative tolerance for divisions and residuals

    Returns:
        FuchsianEquation solved by both basis polynomials
    """
    g, f = plane.g, plane.f
    cls = type(f)
    W = plane.wronskian().trim()
    if W.is_zero():
        raise NotASolutionError("Basis polynomials are dependent; Wronskian vanishes")

    if len(z) != len(m):
        raise InvalidArgumentError(f"{len(z)} points but {len(m)} multiplicities")
    _check_distinct(list(z))
    target = cls.from_roots(list(z), list(m))
    mismatch = (W.monic() - target).coefficient_norm() / max(1.0, target.coefficient_norm())
    if W.degree != target.degree or mismatch > tol:
        raise NotASolutionError(
            f"Wronskian of the plane is not prod (x - z_j)^m_j (mismatch {mismatch:.3e})")

    dW, df = W.derivative(), f.derivative()
    h = _divide_clean(dW * df - W * df.derivative(), f, tol, "h = (W'f' - W f'')/f")

    reducer = cls.from_roots(list(z), [mj - 1 for mj in m])
    c = W.leading
    F = _divide_clean(W, reducer, tol, "W / common factor").scale(1 / c)
    G = _divide_clean(-dW, reducer, tol, "-W' / common factor").scale(1 / c)
    H = _divide_clean(h, reducer, tol, "h / common factor").scale(1 / c).trim(tol)

    if H.degree > len(z) - 2:
        raise NotASolutionError(f"deg H = {H.degree} exceeds n-2 = {len(z) - 2}")

    equation = FuchsianEquation(F, G, H)
    for name, u in (("g", g), ("f", f)):
        r = equation.residual(u)
        if r >= tol:
            raise NotASolutionError(f"{name} leaves residual {r:.3e} in the equation")
    return equation


def all_solutions_polynomial_check(eq: FuchsianEquation, plane: PolyPlane,
                                   tol: float = DEFAULT_TOL) -> bool:
    """
    Both basis polynomials solve the equation; with f free of multiple roots
    this means every solution is a polynomial.

    Numeric multiple roots are detected when two roots of f lie within sqrt(tol).
    """
    f = plane.f
    if isinstance(f, ExactPolynomial):
        squarefree = f.degree <= 0 or f.gcd(f.derivative()).degree == 0
    else:
        squarefree = min_root_separation(f) > math.sqrt(tol)
    if not squarefree:
        raise PreconditionError("f has a multiple root")
    return eq.residual(plane.g) < tol and eq.residual(plane.f) < tol


def main():
    """
    Demonstrate Wronskians and the Fuchsian equation of a plane.
    """
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    half = Fraction(1, 2)
    g = ExactPolynomial([Fraction(1, 4), -half, 1])
    f = ExactPolynomial([-half, 1])
    plane = PolyPlane(g, f)
    print("W[g, f] =", plane.wronskian())
    print("type    =", plane_type(plane))
    eq = fuchsian_from_plane(plane, [0, 1], [1, 1])
    print("F, G, H =", eq.F, eq.G, eq.H)
    print("only polynomial solutions:", all_solutions_polynomial_check(eq, plane))


if __name__ == "__main__":
    main()
