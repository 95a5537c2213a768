"""Independent ground-truth solvers used to validate the dual pipeline.

Everything here is deliberately implemented by routes the production solver
never takes: midpoint discretization plus an exactly-certified transportation
solve, closed-form 1D monotone matching, and finite differences of the
energy. Tests and the ``verify`` command compare the two routes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .geometry import MASS_TOL, BoxDensity, Instance, SampleSet

DISCRETIZE_CELL_CAP = 10_000_000

# Rational scaling of the transportation problem: masses are apportioned to
# integer units out of MASS_UNITS; costs are rounded to an adaptive quantum
# chosen so the scaled objective stays far inside int64.
MASS_UNITS = 2**36
_INT64_BUDGET = 4.0e18


class WeightedPoints(NamedTuple):
    """Discrete measure: points (m, l) with nonnegative masses (m,)."""

    points: np.ndarray
    masses: np.ndarray


@dataclass(frozen=True, eq=False)
class DiscretePlan:
    """Optimal transportation plan between weighted points and samples.

    ``flows[i, j]`` is the mass moved from source i to sample j; ``cost`` is
    sum_ij flows_ij ||x_i - y_j||^2 evaluated on the unscaled costs.
    ``rounding_cost_bound`` bounds the cost perturbation introduced by the
    rational scaling, so callers can fold it into tolerances.
    """

    sources: WeightedPoints
    flows: np.ndarray
    cost: float
    rounding_cost_bound: float = 0.0


def discretize_source(density: BoxDensity, resolution: int) -> WeightedPoints:
    """Midpoint discretization: resolution^l equal cells per box.

    Each cell contributes one point at its center with mass
    gamma_i * cellVolume; the total mass equals the density's mass.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    l = density.dimension
    cells = resolution**l * density.k
    if cells > DISCRETIZE_CELL_CAP:
        raise ValueError(
            f"discretization would create {cells} cells (cap {DISCRETIZE_CELL_CAP})"
        )
    all_pts = []
    all_mass = []
    for box, w in density.boxes:
        axes = [
            box.lo[d] + (np.arange(resolution) + 0.5) * box.widths[d] / resolution
            for d in range(l)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        all_pts.append(pts)
        all_mass.append(np.full(pts.shape[0], w * box.volume / resolution**l))
    return WeightedPoints(np.vstack(all_pts), np.concatenate(all_mass))


def discretization_error_bound(
    density: BoxDensity, samples: SampleSet, resolution: int
) -> float:
    """Bound on |discrete OT cost - p*| from midpoint discretization.

    Rerouting each cell's mass between its center and an arbitrary interior
    point changes the per-unit cost by at most 2 D delta, with delta the
    largest cell diagonal; the bound holds in both directions (sandwich).
    """
    stats = Instance(density, samples).stats
    delta = max(
        float(np.linalg.norm(box.widths)) / resolution for box, _ in density.boxes
    )
    return 2.0 * stats.D * delta


# ---------------------------------------------------------------------------
# exact discrete transport
# ---------------------------------------------------------------------------


def _apportion(weights: np.ndarray, total_units: int) -> np.ndarray:
    """Largest-remainder rounding of weights to integers summing to total_units."""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    raw = w * total_units
    units = np.floor(raw).astype(np.int64)
    short = int(total_units - units.sum())
    if short > 0:
        order = np.argsort(-(raw - units))
        units[order[:short]] += 1
    return units


def _certify_optimal(C_int, a_int, b_int, x, duals):
    """Exact integer optimality certificate for a candidate transportation plan.

    Rounds the candidate flow and duals to integers (integral optima exist by
    total unimodularity of the transportation matrix), then verifies, in
    exact integer arithmetic: nonnegativity, both marginals, dual
    feasibility of the reduced costs, and complementary slackness. Returns
    the integer flow on success, None on any failure.
    """
    m, n = C_int.shape
    X = np.rint(x).astype(np.int64).reshape(m, n)
    if np.abs(x.reshape(m, n) - X).max() > 1e-3:
        return None
    if (X < 0).any():
        return None
    if (X.sum(axis=1) != a_int).any() or (X.sum(axis=0) != b_int).any():
        return None
    u = np.rint(duals[:m]).astype(np.int64)
    v = np.rint(duals[m:]).astype(np.int64)
    if np.abs(duals[:m] - u).max() > 1e-4 or np.abs(duals[m:] - v).max() > 1e-4:
        return None
    reduced = C_int - u[:, None] - v[None, :]
    if (reduced < 0).any():
        return None
    if (reduced[X > 0] != 0).any():
        return None
    return X


def solve_discrete_ot_exact(
    sources: WeightedPoints, samples: SampleSet, demands: np.ndarray | None = None
) -> DiscretePlan:
    """Exact optimal transport from weighted points to samples.

    The problem is rationally scaled (masses apportioned to ``MASS_UNITS``
    integer units, squared-distance costs rounded to an adaptive quantum),
    a candidate vertex solution is produced by HiGHS, and optimality is then
    proven by an exact integer certificate (:func:`_certify_optimal`); a
    dual-simplex retry covers certificate failures. The LP engine is only a
    candidate generator, so no iterative tolerance enters the result. Ties
    between optimal vertices are resolved by the engine's deterministic
    pivoting; support comparisons in tests use instances with unique optima.
    """
    pts = np.atleast_2d(np.asarray(sources.points, dtype=float))
    masses = np.asarray(sources.masses, dtype=float)
    if demands is None:
        demands = samples.demands
    demands = np.asarray(demands, dtype=float)
    total = masses.sum()
    if abs(total - demands.sum()) > MASS_TOL:
        raise ValueError("source mass and demand totals do not balance")
    m, n = masses.size, demands.size

    diff = pts[:, None, :] - samples.points[None, :, :]
    C = (diff**2).sum(-1)
    max_c = float(C.max())
    quantum_inv = max(1.0, math.floor(_INT64_BUDGET / (MASS_UNITS * max(max_c, 1.0))))
    C_int = np.rint(C * quantum_inv).astype(np.int64)
    a_int = _apportion(masses, MASS_UNITS)
    b_int = _apportion(demands, MASS_UNITS)

    rows = sp.kron(sp.eye(m, format="csr"), np.ones((1, n)), format="csr")
    cols = sp.kron(np.ones((1, m)), sp.eye(n, format="csr"), format="csr")
    A_eq = sp.vstack([rows, cols], format="csr")
    b_eq = np.concatenate([a_int, b_int]).astype(float)
    c_vec = C_int.ravel().astype(float)

    X = None
    first = "highs" if m * n <= 50_000 else "highs-ipm"
    for method in (first, "highs-ds"):
        res = linprog(c_vec, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method=method)
        if res.status == 0:
            X = _certify_optimal(C_int, a_int, b_int, res.x, res.eqlin.marginals)
            if X is not None:
                break
    if X is None:
        raise RuntimeError("transportation solve failed to produce a certified plan")

    flows = X * (total / MASS_UNITS)
    cost = float((flows * C).sum())
    slop = max_c * (m + n) / MASS_UNITS * total + 1.0 / quantum_inv
    return DiscretePlan(
        sources=WeightedPoints(pts, masses),
        flows=flows,
        cost=cost,
        rounding_cost_bound=float(slop),
    )


# ---------------------------------------------------------------------------
# 1D exact semidiscrete transport
# ---------------------------------------------------------------------------


def semidiscrete_1d_exact(instance: Instance) -> tuple[float, float, np.ndarray]:
    """Exact (p*, crossTerm, breakpoints) in one dimension.

    1D optimal plans are monotone, so quantile matching is exact: walk the
    density's CDF and cut at the running demand sums of the sorted samples,
    then integrate (x - y_j)^2 and x y_j in closed form on every piece.
    Breakpoints are the n-1 cut positions in sorted-sample order.
    """
    if instance.dimension != 1:
        raise ValueError("semidiscrete_1d_exact requires a 1D instance")
    samples = instance.samples
    order = np.argsort(samples.points[:, 0])
    ys = samples.points[order, 0]
    bs = samples.demands[order]
    n = ys.size

    pieces = sorted(
        ((float(box.lo[0]), float(box.hi[0]), w) for box, w in instance.density.boxes),
        key=lambda p: p[0],
    )

    p_star = 0.0
    cross = 0.0
    breakpoints = []

    def _accumulate(u: float, v: float, y: float, gamma: float) -> None:
        nonlocal p_star, cross
        if v <= u:
            return
        p_star += gamma * ((v - y) ** 3 - (u - y) ** 3) / 3.0
        cross += gamma * y * (v**2 - u**2) / 2.0

    j = 0
    need = float(bs[0])
    for lo, hi, gamma in pieces:
        x = lo
        while j < n - 1 and need <= gamma * (hi - x) + 1e-15:
            x_stop = min(hi, max(x, x + need / gamma))
            _accumulate(x, x_stop, float(ys[j]), gamma)
            breakpoints.append(x_stop)
            x = x_stop
            j += 1
            need = float(bs[j])
        _accumulate(x, hi, float(ys[j]), gamma)
        need -= gamma * (hi - x)
    return p_star, cross, np.asarray(breakpoints)


def finite_difference_gradient(
    instance: Instance, g: np.ndarray, h: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient of the exact dual energy (l <= 3)."""
    from .dual_solver import energy

    if h <= 0:
        raise ValueError("h must be positive")
    g = np.asarray(g, dtype=float)
    out = np.zeros_like(g)
    for j in range(g.size):
        e = np.zeros_like(g)
        e[j] = h
        out[j] = (
            energy(instance, g + e, backend="exact")
            - energy(instance, g - e, backend="exact")
        ) / (2.0 * h)
    return out
