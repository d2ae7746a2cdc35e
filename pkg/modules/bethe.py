"""
Module 5: Master Function and Critical-Orbit Enumeration

The master function
    Phi(t) = prod_{i<j} (t_i - t_j)^2 / prod_i W(t_i),   W(x) = prod_l (x - z_l)^{m_l}
on the domain T (t_i pairwise distinct and distinct from every z_l), its
critical-point system, a multi-start damped Newton solver that enumerates
the S_k-orbits of critical points (completed by monodromy loops in z when
the starts saturate early), and the reconstruction of the class of
rational functions attached to every orbit.

Given an orbit t, f = prod (x - t_i) and g is recovered from
W / f^2 = p + sum b_i/(x - t_i)^2 (residues a_i vanish exactly at critical
points) by integrating: g = f * (P - sum b_i/(x - t_i)).

Author: Wronski Count
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import List, NamedTuple, Optional, Sequence, Tuple
import sys
import os

import numpy as np
from scipy.optimize import linear_sum_assignment

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.helpers import (
    InvalidArgumentError,
    InvalidConfigurationError,
    DomainError,
    NotASolutionError,
    NotCriticalError,
    PreconditionError,
    ReconstructionError
)
from modules.combinatorics import ProblemSpec, count_classes
from modules.polywronski import (
    NumericPolynomial,
    PolyPlane,
    wronskian,
    wronskian_of_configuration,
    coprimality_margin,
    fuchsian_from_plane,
    all_solutions_polynomial_check
)

logger = logging.getLogger(__name__)

CANONICAL_DIGITS = 10
GRADIENT_TOL = 1e-6


@dataclass(frozen=True)
class SolverConfig:
    """
    Settings of the multi-start Newton solver.

    max_starts = None means 2000 times the expected number of orbits.
    """
    seed: int = 0
    max_starts: Optional[int] = None
    saturation_window: int = 500
    eps_newton: float = 1e-10
    eps_verify: float = 1e-8
    delta_dedupe: float = 1e-6
    delta_sep: float = 1e-6
    hessian_condition_limit: float = 1e10
    max_iterations: int = 100
    max_halvings: int = 40
    residue_tol: float = 1e-6
    batch_size: int = 64
    threads: int = 1
    monodromy_loops: int = 40
    monodromy_window: int = 6

    def __post_init__(self):
        for name in ("eps_newton", "eps_verify", "delta_dedupe", "delta_sep",
                     "hessian_condition_limit", "residue_tol"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("saturation_window", "max_iterations", "max_halvings",
                     "batch_size", "threads", "monodromy_window"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.monodromy_loops < 0:
            raise InvalidArgumentError(f"monodromy_loops must be >= 0, got {self.monodromy_loops}")
        if self.max_starts is not None and self.max_starts < 1:
            raise InvalidArgumentError(f"max_starts must be >= 1, got {self.max_starts}")
        if self.seed < 0:
            raise InvalidArgumentError(f"seed must be a nonnegative integer, got {self.seed}")

    @classmethod
    def from_dict(cls, data: dict) -> 'SolverConfig':
        """
        Build a config from a mapping; unknown keys are logged and ignored.

        Args:
            data: Mapping of SolverConfig field names to values

        Returns:
            SolverConfig
        """
        known = {f.name: f for f in fields(cls)}
        values = {}
        for key, value in (data or {}).items():
            if key not in known:
                logger.warning(f"Ignoring unknown solver setting '{key}'")
                continue
            if value is None:
                values[key] = None
            elif key in ("seed", "max_starts", "saturation_window", "max_iterations",
                         "max_halvings", "batch_size", "threads",
                         "monodromy_loops", "monodromy_window"):
                values[key] = int(value)
            else:
                values[key] = float(value)
        return cls(**values)

    def to_dict(self) -> dict:
        """Settings that shape the result; the thread count does not."""
        data = asdict(self)
        data.pop('threads')
        return data


@dataclass(frozen=True, eq=False)
class MasterProblem:
    """
    Critical points z, multiplicities m and degree d; the sought planes
    have order k = M + 1 - d. k = 0 is the polynomial boundary case, which
    has no critical system.
    """
    z: Tuple[complex, ...]
    m: Tuple[int, ...]
    d: int

    def __post_init__(self):
        object.__setattr__(self, 'z', tuple(complex(v) for v in self.z))
        object.__setattr__(self, 'm', tuple(int(v) for v in self.m))
        if len(self.z) != len(self.m):
            raise InvalidArgumentError(f"{len(self.z)} points but {len(self.m)} multiplicities")
        for i in range(len(self.z)):
            for j in range(i + 1, len(self.z)):
                if self.z[i] == self.z[j]:
                    raise InvalidConfigurationError(
                        f"Critical points z_{i + 1} and z_{j + 1} coincide ({self.z[i]})")
        if not 0 <= self.k < self.d:
            raise InvalidArgumentError(
                f"Order k = M+1-d = {self.k} must satisfy 0 <= k < d = {self.d}")
        object.__setattr__(self, '_z', np.asarray(self.z, dtype=complex))
        object.__setattr__(self, '_m', np.asarray(self.m, dtype=float))

    @classmethod
    def from_spec(cls, spec: ProblemSpec, z: Sequence[complex] = None) -> 'MasterProblem':
        points = z if z is not None else spec.z
        if points is None:
            raise InvalidArgumentError(f"No critical points given for {spec.label()}")
        return cls(tuple(points), spec.m, spec.d)

    @property
    def M(self) -> int:
        return sum(self.m)

    @property
    def k(self) -> int:
        return self.M + 1 - self.d

    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec(self.d, self.m, self.z)

    def wronskian(self) -> NumericPolynomial:
        return wronskian_of_configuration(self.z, self.m)

    def center_and_spread(self) -> Tuple[complex, float]:
        center = complex(self._z.mean())
        spread = float(np.max(np.abs(self._z - center)))
        return center, (spread if spread > 0 else 1.0)


def _domain_violation(t: np.ndarray, z: np.ndarray, margin: float):
    """Return (message, pair) when t is not in T with the given margin."""
    if not np.all(np.isfinite(t)):
        return "t has non-finite coordinates", None
    dz = np.abs(t[:, None] - z[None, :])
    if dz.size and dz.min() <= margin:
        i, l = np.unravel_index(np.argmin(dz), dz.shape)
        return f"t_{i + 1} = {t[i]} is within {margin} of z_{l + 1}", (f"t_{i + 1}", f"z_{l + 1}")
    if len(t) > 1:
        dt = np.abs(t[:, None] - t[None, :])
        dt[np.diag_indices(len(t))] = np.inf
        if dt.min() <= margin:
            i, j = np.unravel_index(np.argmin(dt), dt.shape)
            return f"t_{i + 1} and t_{j + 1} are within {margin}", (f"t_{i + 1}", f"t_{j + 1}")
    return None


def _gradient(t: np.ndarray, prob: MasterProblem) -> np.ndarray:
    return _gradient_at(t, prob._z, prob._m)


def _hessian(t: np.ndarray, prob: MasterProblem) -> np.ndarray:
    return _hessian_at(t, prob._z, prob._m)


def _gradient_at(t: np.ndarray, z: np.ndarray, m: np.ndarray) -> np.ndarray:
    grad = -(m[None, :] / (t[:, None] - z[None, :])).sum(axis=1)
    if len(t) > 1:
        dt = t[:, None] - t[None, :]
        off = ~np.eye(len(t), dtype=bool)
        inv = np.zeros_like(dt)
        inv[off] = 2.0 / dt[off]
        grad = grad + inv.sum(axis=1)
    return grad


def _hessian_at(t: np.ndarray, z: np.ndarray, m: np.ndarray) -> np.ndarray:
    diag = (m[None, :] / (t[:, None] - z[None, :]) ** 2).sum(axis=1)
    J = np.zeros((len(t), len(t)), dtype=complex)
    if len(t) > 1:
        dt = t[:, None] - t[None, :]
        off = ~np.eye(len(t), dtype=bool)
        J[off] = 2.0 / dt[off] ** 2
        diag = diag - J.sum(axis=1)
    J[np.diag_indices(len(t))] = diag
    return J


def _as_points(t: Sequence[complex], prob: MasterProblem, delta_sep: float) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    if len(t) != prob.k:
        raise InvalidArgumentError(f"Expected {prob.k} coordinates, got {len(t)}")
    violation = _domain_violation(t, prob._z, delta_sep)
    if violation is not None:
        message, pair = violation
        raise DomainError(message, pair)
    return t


def master_function(t: Sequence[complex], prob: MasterProblem) -> complex:
    """Phi(t) = prod_{i<j} (t_i - t_j)^2 / prod_i W(t_i)."""
    t = _as_points(t, prob, 0.0)
    numerator = 1.0 + 0j
    for i in range(len(t)):
        for j in range(i + 1, len(t)):
            numerator *= (t[i] - t[j]) ** 2
    denominator = np.prod([np.prod((ti - prob._z) ** prob._m) for ti in t])
    return complex(numerator / denominator)


def master_log_gradient(t: Sequence[complex], prob: MasterProblem,
                        delta_sep: float = 1e-6) -> np.ndarray:
    """
    Gradient of log Phi:
        G_i(t) = sum_l -m_l/(t_i - z_l) + sum_{j != i} 2/(t_i - t_j).

    Args:
        t: Point of the domain T
        prob: Master problem
        delta_sep: Required distance to the excluded diagonals

    Returns:
        Complex array of length k
    """
    return _gradient(_as_points(t, prob, delta_sep), prob)


def master_log_hessian(t: Sequence[complex], prob: MasterProblem,
                       delta_sep: float = 1e-6) -> np.ndarray:
    """Analytic Jacobian of master_log_gradient (symmetric k x k)."""
    return _hessian(_as_points(t, prob, delta_sep), prob)


def wronskian_form_residual(t: Sequence[complex], prob: MasterProblem,
                            delta_sep: float = 1e-6) -> np.ndarray:
    """W'(t_i)/W(t_i) - f''(t_i)/f'(t_i) for f = prod (x - t_i)."""
    t = _as_points(t, prob, delta_sep)
    W = prob.wronskian()
    dW = W.derivative()
    f = NumericPolynomial.from_roots(t)
    df = f.derivative()
    ddf = df.derivative()
    return np.array([dW(ti) / W(ti) - ddf(ti) / df(ti) for ti in t], dtype=complex)


def _canonical_key(points: Sequence[complex]) -> tuple:
    return tuple((round(p.real, CANONICAL_DIGITS), round(p.imag, CANONICAL_DIGITS))
                 for p in points)


def orbit_distance(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Largest displacement of the optimal matching between two point sets."""
    if len(a) != len(b):
        return math.inf
    if len(a) == 0:
        return 0.0
    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


@dataclass(frozen=True, eq=False)
class CriticalOrbit:
    """
    Canonical representative of an S_k-orbit of critical points.
    Points are sorted by (real, imaginary) part after rounding.
    """
    points: Tuple[complex, ...]
    residual: float
    hessian_condition: float
    degenerate: bool = False
    start_index: int = -1

    def __post_init__(self):
        ordered = sorted((complex(p) for p in self.points),
                         key=lambda p: (round(p.real, CANONICAL_DIGITS),
                                        round(p.imag, CANONICAL_DIGITS)))
        object.__setattr__(self, 'points', tuple(ordered))

    @property
    def key(self) -> tuple:
        return _canonical_key(self.points)

    @classmethod
    def from_point(cls, t: np.ndarray, prob: MasterProblem, config: SolverConfig,
                   start_index: int = -1) -> 'CriticalOrbit':
        residual = float(np.max(np.abs(_gradient(t, prob))))
        condition = float(np.linalg.cond(_hessian(t, prob)))
        degenerate = not condition < config.hessian_condition_limit
        if degenerate:
            logger.warning(f"Degenerate critical point (condition {condition:.3e}) kept and flagged")
        return cls(tuple(t), residual, condition, degenerate, start_index)

    def to_dict(self) -> dict:
        return {
            'points': [[p.real, p.imag] for p in self.points],
            'residual': self.residual,
            'hessian_condition': self.hessian_condition if math.isfinite(self.hessian_condition) else None,
            'degenerate': self.degenerate,
        }


class _StartMaterial(NamedTuple):
    """Per-problem data shared by every start; read-only across threads."""
    center: complex
    spread: float
    pairs: np.ndarray
    pair_gaps: np.ndarray
    free_roots: np.ndarray
    root_scales: np.ndarray


def _free_roots_of_derivative(W: NumericPolynomial) -> np.ndarray:
    """Roots of W' at which W does not vanish."""
    return np.array([r for r in W.derivative().roots()
                     if abs(W(r)) > 1e-8 * W.evaluation_scale(r)], dtype=complex)


def _start_material(prob: MasterProblem) -> _StartMaterial:
    center, spread = prob.center_and_spread()
    z = prob._z
    pairs = [(i, j) for i in range(len(z)) for j in range(i + 1, len(z))]
    midpoints = np.array([(z[i] + z[j]) / 2 for i, j in pairs], dtype=complex)
    gaps = np.array([abs(z[i] - z[j]) for i, j in pairs], dtype=float)
    roots = _free_roots_of_derivative(prob.wronskian())
    scales = (np.abs(roots[:, None] - z[None, :]).min(axis=1) if len(roots)
              else np.zeros(0))
    return _StartMaterial(center, spread, midpoints, gaps, roots, scales)


def _pick(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    return rng.choice(n, size=k, replace=n < k)


class OrbitSolver:
    """
    Multi-start damped Newton search for the critical orbits of a master function,
    completed by monodromy loops in z when the starts saturate early.

    Every start draws from its own random stream derived from (seed, start
    index) and every loop from (seed, loop index); results are merged in
    order, so the orbit list does not depend on the number of threads.
    """

    MONODROMY_STREAM = 7919
    MIN_TRACK_STEP = 1e-9
    MAX_TRACK_STEPS = 20000

    def __init__(self, config: SolverConfig = None):
        """
        Initialize the solver.

        Args:
            config: Solver settings (defaults when omitted)
        """
        self.config = config or SolverConfig()
        self.starts_used = 0
        self.loops_used = 0
        logger.debug(f"OrbitSolver initialized (seed: {self.config.seed}, "
                     f"threads: {self.config.threads})")

    def solve(self, prob: MasterProblem, expected: int = None) -> List[CriticalOrbit]:
        """
        Enumerate critical orbits until max_starts or saturation, then run
        monodromy loops while fewer than `expected` orbits are known.

        Args:
            prob: Master problem with k >= 1
            expected: Expected orbit count (default: the closed formula)

        Returns:
            Orbits in canonical order
        """
        if prob.k < 1:
            raise InvalidArgumentError("k = 0 has no critical system; use boundary_class")
        cfg = self.config
        if expected is None:
            expected = count_classes(prob.spec)
        max_starts = cfg.max_starts or 2000 * max(expected, 1)
        logger.info(f"Solving {prob.spec.label()} (k={prob.k}, expected {expected}, "
                    f"max starts {max_starts})")

        material = _start_material(prob)
        orbits: List[CriticalOrbit] = []
        since_new = 0
        next_index = 0
        self.loops_used = 0
        pool = ThreadPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None
        try:
            while next_index < max_starts and since_new < cfg.saturation_window:
                batch = list(range(next_index, min(next_index + cfg.batch_size, max_starts)))
                results = self._map(pool, lambda i: self._run_start(prob, material, i), batch)
                for start_index, orbit in zip(batch, results):
                    next_index = start_index + 1
                    if orbit is not None and self._register(orbits, orbit):
                        since_new = 0
                        logger.debug(f"Start {start_index}: new orbit #{len(orbits)}")
                    else:
                        since_new += 1
                    if since_new >= cfg.saturation_window:
                        break
            self.starts_used = next_index
            if orbits and len(orbits) < expected:
                self._monodromy(prob, orbits, expected, pool)
        finally:
            if pool is not None:
                pool.shutdown()

        orbits.sort(key=lambda o: o.key)
        if len(orbits) > expected:
            logger.error(f"Found {len(orbits)} orbits but at most {expected} exist")
        elif len(orbits) < expected:
            logger.warning(f"Solver coverage shortfall: {len(orbits)} of {expected} orbits "
                           f"after {self.starts_used} starts and {self.loops_used} loops")
        else:
            logger.info(f"Found all {expected} orbits after {self.starts_used} starts "
                        f"and {self.loops_used} loops")
        return orbits

    @staticmethod
    def _map(pool: Optional[ThreadPoolExecutor], fn, items: Sequence) -> list:
        if pool is None:
            return [fn(item) for item in items]
        return list(pool.map(fn, items))

    def _register(self, orbits: List[CriticalOrbit], orbit: CriticalOrbit) -> bool:
        for known in orbits:
            if orbit_distance(known.points, orbit.points) < self.config.delta_dedupe:
                return False
        orbits.append(orbit)
        return True

    def _run_start(self, prob: MasterProblem, material: _StartMaterial,
                   start_index: int) -> Optional[CriticalOrbit]:
        rng = np.random.default_rng([self.config.seed, start_index])
        t = self._newton(self._initial_point(prob, material, rng, start_index), prob)
        if t is None:
            return None
        return CriticalOrbit.from_point(t, prob, self.config, start_index)

    def _initial_point(self, prob: MasterProblem, material: _StartMaterial,
                       rng: np.random.Generator, start_index: int) -> np.ndarray:
        k = prob.k
        noise = rng.normal(size=k) + 1j * rng.normal(size=k)
        mode = start_index % 4
        if mode == 0 and len(material.free_roots):
            # roots of W' away from z; exact critical points when k = 1
            chosen = _pick(rng, len(material.free_roots), k)
            return material.free_roots[chosen] + 0.01 * material.root_scales[chosen] * noise
        if mode == 1 and len(material.pairs):
            # pair midpoints, perturbed on the scale of the pair itself
            chosen = _pick(rng, len(material.pairs), k)
            return material.pairs[chosen] + 0.1 * material.pair_gaps[chosen] * noise
        radius = 2 * material.spread * np.sqrt(rng.uniform(size=k))
        angle = 2 * np.pi * rng.uniform(size=k)
        return material.center + radius * np.exp(1j * angle)

    def _newton(self, t: np.ndarray, prob: MasterProblem) -> Optional[np.ndarray]:
        """Damped Newton on G(t) = 0 with backtracking on |G|^2."""
        cfg = self.config
        center, spread = prob.center_and_spread()
        if _domain_violation(t, prob._z, cfg.delta_sep) is not None:
            return None
        g = _gradient(t, prob)
        merit = float(np.vdot(g, g).real)

        for _ in range(cfg.max_iterations):
            if np.max(np.abs(g)) < cfg.eps_newton:
                return t
            try:
                step = np.linalg.solve(_hessian(t, prob), -g)
            except np.linalg.LinAlgError:
                return None
            if not np.all(np.isfinite(step)):
                return None

            lam = 1.0
            accepted = False
            for _ in range(cfg.max_halvings):
                candidate = t + lam * step
                if _domain_violation(candidate, prob._z, cfg.delta_sep) is None:
                    g_candidate = _gradient(candidate, prob)
                    merit_candidate = float(np.vdot(g_candidate, g_candidate).real)
                    if merit_candidate < merit:
                        accepted = True
                        break
                lam *= 0.5
            if not accepted:
                return None
            t, g, merit = candidate, g_candidate, merit_candidate
            if np.max(np.abs(t - center)) > 1e6 * spread:
                return None

        return t if np.max(np.abs(g)) < cfg.eps_newton else None

    def complete_by_monodromy(self, prob: MasterProblem, orbits: Sequence[CriticalOrbit],
                              expected: int = None) -> List[CriticalOrbit]:
        """
        Grow a list of known orbits by monodromy loops alone.

        Args:
            prob: Master problem with k >= 1
            orbits: Orbits already known (at least one)
            expected: Target count (default: the closed formula)

        Returns:
            Known and new orbits in canonical order
        """
        if not orbits:
            raise InvalidArgumentError("Monodromy needs at least one known orbit")
        if expected is None:
            expected = count_classes(prob.spec)
        found = list(orbits)
        self.loops_used = 0
        cfg = self.config
        pool = ThreadPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None
        try:
            self._monodromy(prob, found, expected, pool)
        finally:
            if pool is not None:
                pool.shutdown()
        return sorted(found, key=lambda o: o.key)

    def _monodromy(self, prob: MasterProblem, orbits: List[CriticalOrbit], expected: int,
                   pool: Optional[ThreadPoolExecutor]):
        """
        Carry the known orbits around random triangles z -> z' -> z'' -> z in
        configuration space; the permutation this induces on the critical
        orbits reaches the ones the starts missed.
        """
        cfg = self.config
        z0, n = prob._z, len(prob.z)
        _, spread = prob.center_and_spread()
        idle = 0
        while (len(orbits) < expected and self.loops_used < cfg.monodromy_loops
               and idle < cfg.monodromy_window):
            rng = np.random.default_rng([cfg.seed, self.MONODROMY_STREAM, self.loops_used])
            waypoints = [z0 + 0.5 * spread * (rng.normal(size=n) + 1j * rng.normal(size=n))
                         for _ in range(2)]
            loop = [z0, *waypoints, z0]
            known = [np.asarray(o.points, dtype=complex) for o in orbits]
            ends = self._map(pool, lambda t: self._carry(t, loop, prob), known)
            before = len(orbits)
            for t in ends:
                if t is not None and self._register(orbits, CriticalOrbit.from_point(t, prob, cfg)):
                    logger.debug(f"Loop {self.loops_used}: new orbit #{len(orbits)}")
            self.loops_used += 1
            idle = 0 if len(orbits) > before else idle + 1

    def _carry(self, t: np.ndarray, loop: Sequence[np.ndarray],
               prob: MasterProblem) -> Optional[np.ndarray]:
        for z_from, z_to in zip(loop[:-1], loop[1:]):
            t = self._track(t, z_from, z_to, prob._m)
            if t is None:
                return None
        return self._newton(t, prob)

    @staticmethod
    def _velocity(t: np.ndarray, z: np.ndarray, m: np.ndarray,
                  dz: np.ndarray) -> Optional[np.ndarray]:
        """dt/ds keeping G(t; z + s dz) = 0."""
        with np.errstate(all='ignore'):
            G_z = -m[None, :] / (t[:, None] - z[None, :]) ** 2
            try:
                v = np.linalg.solve(_hessian_at(t, z, m), -(G_z @ dz))
            except np.linalg.LinAlgError:
                return None
        return v if np.all(np.isfinite(v)) else None

    @staticmethod
    def _local_scale(t: np.ndarray, z: np.ndarray) -> float:
        scale = float(np.abs(t[:, None] - z[None, :]).min())
        if len(t) > 1:
            dt = np.abs(t[:, None] - t[None, :])
            dt[np.diag_indices(len(t))] = np.inf
            scale = min(scale, float(dt.min()))
        return scale

    def _track(self, t: np.ndarray, z_from: np.ndarray, z_to: np.ndarray,
               m: np.ndarray) -> Optional[np.ndarray]:
        """
        Follow one critical point from z_from to z_to along the straight
        segment: RK4 predictor, Newton corrector, adaptive step.
        """
        dz = z_to - z_from
        s, h, streak = 0.0, 0.05, 0
        for _ in range(self.MAX_TRACK_STEPS):
            if s >= 1.0:
                return t
            h = min(h, 1.0 - s)
            if h < self.MIN_TRACK_STEP:
                return None
            z_start = z_from + s * dz
            z_end = z_to if s + h >= 1.0 else z_from + (s + h) * dz
            corrected = self._predict_correct(t, z_start, z_end, dz, h, m)
            if corrected is None:
                h *= 0.5
                streak = 0
                continue
            t = corrected
            s = 1.0 if s + h >= 1.0 else s + h
            streak += 1
            if streak >= 3:
                h = min(2 * h, 0.1)
                streak = 0
        return None

    def _predict_correct(self, t: np.ndarray, z_start: np.ndarray, z_end: np.ndarray,
                         dz: np.ndarray, h: float, m: np.ndarray) -> Optional[np.ndarray]:
        z_half = (z_start + z_end) / 2
        k1 = self._velocity(t, z_start, m, dz)
        if k1 is None:
            return None
        k2 = self._velocity(t + 0.5 * h * k1, z_half, m, dz)
        if k2 is None:
            return None
        k3 = self._velocity(t + 0.5 * h * k2, z_half, m, dz)
        if k3 is None:
            return None
        k4 = self._velocity(t + h * k3, z_end, m, dz)
        if k4 is None:
            return None
        scale = self._local_scale(t, z_start)
        predicted = t + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        if np.max(np.abs(predicted - t)) > 0.25 * scale:
            return None

        # A corrector that stays small and contracts keeps the path on its own branch.
        previous = math.inf
        for _ in range(4):
            if _domain_violation(predicted, z_end, self.config.delta_sep) is not None:
                return None
            with np.errstate(all='ignore'):
                try:
                    delta = np.linalg.solve(_hessian_at(predicted, z_end, m),
                                            -_gradient_at(predicted, z_end, m))
                except np.linalg.LinAlgError:
                    return None
            size = float(np.max(np.abs(delta))) if np.all(np.isfinite(delta)) else math.inf
            if size < 1e-9 * max(1.0, float(np.max(np.abs(predicted)))):
                return predicted + delta
            if size > 0.1 * scale or size > 0.5 * previous:
                return None
            predicted = predicted + delta
            previous = size
        return None


def solve_orbits(prob: MasterProblem, cfg: SolverConfig = None,
                 expected: int = None) -> List[CriticalOrbit]:
    """
    Enumerate the critical orbits of the master function.

    Args:
        prob: Master problem with k >= 1
        cfg: Solver settings
        expected: Expected count (default: the closed formula)

    Returns:
        Orbits in canonical order
    """
    return OrbitSolver(cfg).solve(prob, expected)


def exact_k1_oracle(prob: MasterProblem, cfg: SolverConfig = None) -> List[CriticalOrbit]:
    """
    For k = 1 the critical points are the roots of W' with W != 0 there.

    Args:
        prob: Master problem with k = 1
        cfg: Solver settings (used for Newton polishing)

    Returns:
        One-point orbits in canonical order
    """
    if prob.k != 1:
        raise InvalidArgumentError(f"The k=1 oracle needs k = 1, got k = {prob.k}")
    solver = OrbitSolver(cfg)
    orbits: List[CriticalOrbit] = []
    for root in _free_roots_of_derivative(prob.wronskian()):
        polished = solver._newton(np.array([root], dtype=complex), prob)
        if polished is None:
            logger.warning(f"Root {root} of W' did not polish to a critical point")
            continue
        solver._register(orbits, CriticalOrbit.from_point(polished, prob, solver.config))
    orbits.sort(key=lambda o: o.key)
    return orbits


@dataclass(frozen=True, eq=False)
class ReconstructedClass:
    """
    The plane span{g, f} attached to an orbit: f monic with the orbit as
    roots, g of degree d.
    """
    f: NumericPolynomial
    g: NumericPolynomial
    residues: Tuple[complex, ...]
    wronskian_residual: float
    coprimality_margin: float
    root_separation: float

    @property
    def plane(self) -> PolyPlane:
        return PolyPlane(self.g, self.f)

    def to_dict(self) -> dict:
        return {
            'f': self.f.to_json(),
            'g': self.g.to_json(),
            'max_residue': max((abs(a) for a in self.residues), default=0.0),
            'wronskian_residual': self.wronskian_residual,
            'coprimality_margin': self.coprimality_margin,
            'root_separation': self.root_separation if math.isfinite(self.root_separation) else None,
        }


def _relative_wronskian_residual(g: NumericPolynomial, f: NumericPolynomial,
                                 W: NumericPolynomial) -> float:
    Wg = wronskian(g, f).trim()
    if Wg.is_zero():
        return math.inf
    return (Wg.monic() - W).coefficient_norm() / max(1.0, W.coefficient_norm())


def _separation(points: Sequence[complex]) -> float:
    t = np.asarray(points, dtype=complex)
    if len(t) < 2:
        return math.inf
    dt = np.abs(t[:, None] - t[None, :])
    dt[np.diag_indices(len(t))] = np.inf
    return float(dt.min())


def reconstruct_class(orbit: CriticalOrbit, prob: MasterProblem, tol: float = 1e-6,
                      eps_verify: float = 1e-8) -> ReconstructedClass:
    """
    Recover the plane of an orbit from the partial fractions of W / f^2.

    Args:
        orbit: Critical orbit
        prob: Master problem
        tol: Bound on the relative residues |a_i| / max(1, |b_i|)
        eps_verify: Bound on the monic Wronskian residual

    Returns:
        ReconstructedClass
    """
    t = np.asarray(orbit.points, dtype=complex)
    W = prob.wronskian()
    dW = W.derivative()
    f = NumericPolynomial.from_roots(t)
    df = f.derivative()
    ddf = df.derivative()

    p, _ = W.divmod(f * f)
    g = p.antiderivative() * f
    residues = []
    worst = 0.0
    for i, ti in enumerate(t):
        fp = df(ti)
        b = W(ti) / fp ** 2
        a = (dW(ti) * fp - W(ti) * ddf(ti)) / fp ** 3
        residues.append(complex(a))
        worst = max(worst, abs(a) / max(1.0, abs(b)))
        g = g - NumericPolynomial.from_roots(np.delete(t, i)).scale(b)

    if worst >= tol:
        raise NotCriticalError(f"Residue {worst:.3e} does not vanish; orbit is not critical")

    residual = _relative_wronskian_residual(g, f, W)
    if residual >= eps_verify:
        raise ReconstructionError(f"Wronskian residual {residual:.3e} exceeds {eps_verify}")

    return ReconstructedClass(
        f=f,
        g=g,
        residues=tuple(residues),
        wronskian_residual=residual,
        coprimality_margin=coprimality_margin(g, f),
        root_separation=_separation(t)
    )


def boundary_class(prob: MasterProblem) -> ReconstructedClass:
    """
    For k = 0 (M = d-1) the only class contains the primitive of W.
    """
    if prob.k != 0:
        raise InvalidArgumentError(f"The boundary class needs k = 0, got k = {prob.k}")
    W = prob.wronskian()
    g = W.antiderivative()
    f = NumericPolynomial.constant(1.0)
    return ReconstructedClass(
        f=f,
        g=g,
        residues=(),
        wronskian_residual=_relative_wronskian_residual(g, f, W),
        coprimality_margin=1.0,
        root_separation=math.inf
    )


@dataclass(frozen=True, eq=False)
class VerificationReport:
    """Pass/fail flags and figures of every check on a reconstructed class."""
    wronskian_residual: float
    wronskian_ok: bool
    coprimality_margin: float
    coprime_ok: bool
    degree: int
    order: int
    degree_ok: bool
    fuchsian_residual: Optional[float]
    fuchsian_ok: bool
    gradient_norm: float
    gradient_ok: bool
    van_vleck: Optional[NumericPolynomial] = None
    failure: Optional[str] = None

    @property
    def passed(self) -> bool:
        return (self.wronskian_ok and self.coprime_ok and self.degree_ok
                and self.fuchsian_ok and self.gradient_ok)

    def to_dict(self) -> dict:
        return {
            'passed': self.passed,
            'wronskian_residual': self.wronskian_residual if math.isfinite(self.wronskian_residual) else None,
            'wronskian_ok': self.wronskian_ok,
            'coprimality_margin': self.coprimality_margin,
            'coprime_ok': self.coprime_ok,
            'degree': self.degree,
            'order': self.order,
            'degree_ok': self.degree_ok,
            'fuchsian_residual': self.fuchsian_residual,
            'fuchsian_ok': self.fuchsian_ok,
            'gradient_norm': self.gradient_norm if math.isfinite(self.gradient_norm) else None,
            'gradient_ok': self.gradient_ok,
            'van_vleck': self.van_vleck.to_json() if self.van_vleck is not None else None,
            'failure': self.failure,
        }


def verify_class(rc: ReconstructedClass, prob: MasterProblem, tol: float = 1e-8,
                 delta_sep: float = 1e-6) -> VerificationReport:
    """
    Recheck a reconstructed class from its two polynomials alone.

    Args:
        rc: Reconstructed class (possibly with a modified basis)
        prob: Master problem
        tol: Bound on Wronskian and Fuchsian residuals
        delta_sep: Lower bound on the coprimality margin

    Returns:
        VerificationReport (never raises for failed checks)
    """
    g, f = rc.g, rc.f
    W = prob.wronskian()
    failure = None

    wronskian_residual = _relative_wronskian_residual(g, f, W)
    margin = coprimality_margin(g, f)
    degree, order = max(g.degree, f.degree), min(g.degree, f.degree)
    degree_ok = (degree == prob.d and order == prob.k
                 and degree + order == prob.M + 1)

    fuchsian_residual = None
    fuchsian_ok = False
    van_vleck = None
    try:
        plane = PolyPlane(g, f)
        equation = fuchsian_from_plane(plane, prob.z, prob.m, tol)
        fuchsian_residual = max(equation.residual(plane.g), equation.residual(plane.f))
        fuchsian_ok = all_solutions_polynomial_check(equation, plane, tol)
        van_vleck = equation.H
    except (InvalidArgumentError, NotASolutionError, PreconditionError) as e:
        failure = str(e)
        logger.debug(f"Fuchsian check failed: {e}")

    gradient_norm = 0.0
    if prob.k > 0:
        roots = f.roots()
        if len(roots) == prob.k and _domain_violation(roots, prob._z, delta_sep) is None:
            gradient_norm = float(np.max(np.abs(_gradient(roots, prob))))
        else:
            gradient_norm = math.inf

    return VerificationReport(
        wronskian_residual=wronskian_residual,
        wronskian_ok=wronskian_residual < tol,
        coprimality_margin=margin,
        coprime_ok=margin > delta_sep,
        degree=degree,
        order=order,
        degree_ok=degree_ok,
        fuchsian_residual=fuchsian_residual,
        fuchsian_ok=fuchsian_ok,
        gradient_norm=gradient_norm,
        gradient_ok=gradient_norm < GRADIENT_TOL,
        van_vleck=van_vleck,
        failure=failure
    )


def sample_configuration(n: int, rng: np.random.Generator, radius: float = 1.0,
                         max_tries: int = 1000) -> List[complex]:
    """
    Uniform points in a disc, rejected when two lie closer than 1e-2 * diameter.

    Args:
        n: Number of points
        rng: numpy random generator
        radius: Disc radius

    Returns:
        List of n complex numbers
    """
    for _ in range(max_tries):
        r = radius * np.sqrt(rng.uniform(size=n))
        theta = 2 * np.pi * rng.uniform(size=n)
        z = r * np.exp(1j * theta)
        if _separation(z) >= 1e-2 * 2 * radius:
            return [complex(v) for v in z]
    raise InvalidArgumentError(f"Could not sample {n} separated points in {max_tries} tries")


class SpotCheck(NamedTuple):
    original: int
    perturbed: int

    @property
    def stable(self) -> bool:
        return self.original == self.perturbed

    def to_dict(self) -> dict:
        return {'original': self.original, 'perturbed': self.perturbed, 'stable': self.stable}


def perturbation_spot_check(prob: MasterProblem, cfg: SolverConfig = None,
                            scale: float = 1e-6, original: int = None) -> SpotCheck:
    """
    Re-solve with every z_j moved by `scale` (relative to the spread of z)
    and compare orbit counts. A heuristic genericity test.

    Args:
        prob: Master problem with k >= 1
        cfg: Solver settings
        scale: Relative size of the move
        original: Orbit count already found for prob (solved again when omitted)

    Returns:
        SpotCheck
    """
    cfg = cfg or SolverConfig()
    rng = np.random.default_rng([cfg.seed, len(prob.z)])
    _, spread = prob.center_and_spread()
    direction = rng.normal(size=len(prob.z)) + 1j * rng.normal(size=len(prob.z))
    moved = prob._z + scale * spread * direction / np.abs(direction)
    perturbed = MasterProblem(tuple(moved), prob.m, prob.d)
    original_count = original if original is not None else len(solve_orbits(prob, cfg))
    perturbed_count = len(solve_orbits(perturbed, cfg))
    if original_count != perturbed_count:
        logger.warning(f"Orbit count changed under perturbation: "
                       f"{original_count} -> {perturbed_count}")
    return SpotCheck(original_count, perturbed_count)


def main():
    """
    Demonstrate the solver on the Catalan instance d=3, m=(1,1,1,1).
    """
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    rng = np.random.default_rng(42)
    prob = MasterProblem(tuple(sample_configuration(4, rng)), (1, 1, 1, 1), 3)
    orbits = solve_orbits(prob, SolverConfig(seed=42))
    print("=" * 60)
    for orbit in orbits:
        rc = reconstruct_class(orbit, prob)
        report = verify_class(rc, prob)
        print(f"orbit {[f'{p:.6f}' for p in orbit.points]} | "
              f"W residual {rc.wronskian_residual:.2e} | passed: {report.passed}")
    print("=" * 60)


if __name__ == "__main__":
    main()
