"""Search engines for centralized and decentralized power control.

Everything here maximizes. ``BoxedProblem(maximize=False)`` flips the sign
internally and reports values in the caller's orientation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BudgetError, ConsistencyError, EvaluationError, InvalidParameterError

DEFAULT_BUDGET = 10 ** 7
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class BoxedProblem:
    lower: Sequence[float]
    upper: Sequence[float]
    objective: Callable[[np.ndarray], float]
    maximize: bool = True

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape:
            raise InvalidParameterError("lower and upper bounds differ in dimension")
        if np.any(lo > hi):
            raise InvalidParameterError("lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    def score(self, x) -> float:
        """Objective in maximization orientation.

        NaN and infinities in the improving direction raise. The worst-direction
        infinity is accepted as an infeasibility marker.
        """
        v = float(self.objective(np.asarray(x, dtype=float)))
        s = v if self.maximize else -v
        if math.isnan(s) or s == math.inf:
            raise EvaluationError(f"objective returned {v} at {x}")
        return s

    def report(self, score: float) -> float:
        return score if self.maximize else -score


def lattice_axes(problem: BoxedProblem, points_per_dim: int) -> list[np.ndarray]:
    return [np.linspace(lo, hi, points_per_dim)
            for lo, hi in zip(problem.lower, problem.upper)]


def grid_search_max(problem: BoxedProblem, points_per_dim: int,
                    budget: int = DEFAULT_BUDGET):
    """Exhaustive lattice search including both endpoints of every axis.

    Lattice points are visited in lexicographic order and only a strictly
    better value replaces the incumbent, so ties resolve to the
    lexicographically smallest point. Infeasible points may return ``-inf``
    (when maximizing); they are never selected over a finite value.
    """
    if points_per_dim < 2:
        raise InvalidParameterError("points_per_dim must be >= 2")
    total = points_per_dim ** problem.dimension
    if total > budget:
        raise BudgetError(f"{total} lattice points exceed the budget of {budget}")
    axes = lattice_axes(problem, points_per_dim)
    best_x, best_s = None, -math.inf
    for point in itertools.product(*axes):
        s = problem.score(point)
        if best_x is None or s > best_s:
            best_x, best_s = np.array(point), s
    return best_x, problem.report(best_s)


def _finite_score(problem: BoxedProblem, x) -> float:
    s = problem.score(x)
    if not math.isfinite(s):
        raise EvaluationError(f"objective is not finite at {x}")
    return s


def golden_section_max(problem: BoxedProblem, tolerance: float):
    """Golden-section search on a 1-D unimodal objective."""
    if problem.dimension != 1:
        raise InvalidParameterError("golden_section_max needs a 1-D problem")
    if not tolerance > 0:
        raise InvalidParameterError("tolerance must be positive")
    a, b = float(problem.lower[0]), float(problem.upper[0])
    if a == b:
        return a, problem.report(_finite_score(problem, [a]))
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = _finite_score(problem, [c]), _finite_score(problem, [d])
    while b - a > tolerance:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = _finite_score(problem, [c])
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = _finite_score(problem, [d])
    x = 0.5 * (a + b)
    return x, problem.report(_finite_score(problem, [x]))


@dataclass(frozen=True)
class GameSpec:
    """Non-cooperative power game.

    ``utility(i, p)`` is player ``i``'s payoff at the joint power vector ``p``.
    """

    power_max: Sequence[float]
    utility: Callable[[int, np.ndarray], float]

    def __post_init__(self):
        pm = np.atleast_1d(np.asarray(self.power_max, dtype=float))
        if np.any(pm < 0):
            raise InvalidParameterError("power caps must be non-negative")
        object.__setattr__(self, "power_max", pm)

    @property
    def players(self) -> int:
        return self.power_max.shape[0]


def best_response(game: GameSpec, i: int, p: np.ndarray, grid_points: int = 64,
                  refine_tol: float = 1e-10) -> float:
    """Player ``i``'s best power against ``p``: grid scan, then golden refinement.

    The refinement runs inside the bracket around the best grid point and is
    kept only if it beats the grid value.
    """
    cap = float(game.power_max[i])
    if cap == 0.0:
        return 0.0
    grid = np.linspace(0.0, cap, grid_points)
    q = p.copy()

    def u(x):
        q[i] = x
        return float(game.utility(i, q))

    vals = np.array([u(x) for x in grid])
    k = int(np.argmax(vals))
    best_x, best_v = float(grid[k]), float(vals[k])
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid_points - 1)]
    x, v = golden_section_max(BoxedProblem([lo], [hi], lambda z: u(float(z[0]))), refine_tol)
    if v > best_v:
        best_x = float(x)
    return best_x


def best_response_power_game(game: GameSpec, max_rounds: int, tolerance: float,
                             grid_points: int = 64, sequential: bool = False,
                             initial=None):
    """Best-response dynamics.

    Synchronous (Jacobi) rounds by default: every player responds to the
    previous round's profile. ``sequential=True`` switches to Gauss-Seidel
    order. Returns ``(powers, converged, rounds_used)``; the last iterate is
    returned even without convergence.
    """
    if max_rounds < 1:
        raise InvalidParameterError("max_rounds must be >= 1")
    p = (np.zeros(game.players) if initial is None
         else np.array(initial, dtype=float))
    for rnd in range(1, max_rounds + 1):
        if sequential:
            new = p.copy()
            for i in range(game.players):
                new[i] = best_response(game, i, new, grid_points)
        else:
            new = np.array([best_response(game, i, p, grid_points)
                            for i in range(game.players)])
        change = float(np.max(np.abs(new - p))) if game.players else 0.0
        p = new
        if change < tolerance:
            return p, True, rnd
    return p, False, max_rounds


def nash_gap(game: GameSpec, p, grid_points: int = 64) -> float:
    """Largest utility gain any player gets from a unilateral move on its grid."""
    p = np.asarray(p, dtype=float)
    gap = 0.0
    for i in range(game.players):
        base = float(game.utility(i, p))
        q = p.copy()
        for x in np.linspace(0.0, game.power_max[i], grid_points):
            q[i] = x
            gap = max(gap, float(game.utility(i, q)) - base)
    return gap


@dataclass(frozen=True)
class Block:
    """A coordinate block of a shared vector, searched on its own lattice.

    ``solver``, when given, replaces the lattice search. It is called as
    ``solver(f, current, full)`` where ``f`` maps block values to the
    objective and ``full`` is a copy of the whole vector; it must return new
    block values.
    """

    indices: Sequence[int]
    lower: Sequence[float]
    upper: Sequence[float]
    points_per_dim: int = 16
    solver: Callable | None = None


def block_coordinate_max(objective: Callable[[np.ndarray], float], x0, blocks: Sequence[Block],
                         sweeps: int = 20, tolerance: float = 1e-9,
                         budget: int = DEFAULT_BUDGET):
    """Cyclic block-coordinate ascent.

    A block's proposal is accepted only if it does not lower the objective, so
    the per-sweep value trace is non-decreasing. The accepted point is scored
    again after every sweep and a mismatch raises ``ConsistencyError``.
    Returns ``(x, trace)`` where ``trace[0]`` is the starting value.
    """
    x = np.array(x0, dtype=float)
    value = float(objective(x))
    trace = [value]
    for _ in range(sweeps):
        for blk in blocks:
            idx = list(blk.indices)

            def f(vals, idx=idx):
                y = x.copy()
                y[idx] = vals
                return objective(y)

            if blk.solver is not None:
                prop = np.asarray(blk.solver(f, x[idx].copy(), x.copy()), dtype=float)
                prop_v = float(f(prop))
            else:
                prop, prop_v = grid_search_max(BoxedProblem(blk.lower, blk.upper, f),
                                               blk.points_per_dim, budget)
            if prop_v >= value:
                x[idx] = prop
                value = prop_v
        # Re-scoring the accepted point catches objectives that are not pure.
        again = float(objective(x))
        if abs(again - value) > 1e-9 * max(1.0, abs(value)):
            raise ConsistencyError(f"objective gave {again} at a point scored {value}")
        trace.append(value)
        if value - trace[-2] < tolerance:
            break
    return x, trace
