"""Hyperrectangle and Laguerre-cell geometry.

Data containers for box-supported densities and sample sets, separation
oracles, point classification into Laguerre (power) cells, Monte-Carlo and
exact cell volumes, and closed-form moments of the density.

All operations are pure functions on immutable inputs. Monte-Carlo sampling
is deterministic given (seed, box index); see :func:`box_rng` for the
substream rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

MASS_TOL = 1e-9

# Hard ceiling on Monte-Carlo sample budgets; beyond this the exact backend
# is the only realistic option and we refuse rather than thrash.
MC_SAMPLE_CAP = 50_000_000
_MC_CHUNK = 2_000_000


class Hyperplane(NamedTuple):
    """Half-space boundary a.z = beta with the feasible side a.z <= beta."""

    a: np.ndarray
    beta: float


# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Hyperrectangle:
    """Axis-aligned box [lo_1, hi_1] x ... x [lo_l, hi_l] with positive widths."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError("lo and hi must be 1-D vectors of equal length")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("box bounds must be finite")
        if not (lo < hi).all():
            raise ValueError("box must have strictly positive width on every axis")

    @property
    def dimension(self) -> int:
        return self.lo.size

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool((self.lo <= x).all() and (x <= self.hi).all())

    def max_corner_norm(self) -> float:
        """Largest Euclidean norm over the 2^l corners (no enumeration needed)."""
        return float(np.sqrt(np.maximum(self.lo**2, self.hi**2).sum()))


def _interiors_overlap(b1: Hyperrectangle, b2: Hyperrectangle) -> bool:
    return bool(((b1.lo < b2.hi) & (b2.lo < b1.hi)).all())


@dataclass(frozen=True, eq=False)
class BoxDensity:
    """Piecewise-constant density: disjoint boxes H_i with constant weights gamma_i.

    Invariants enforced at construction: matching dimensions, positive
    weights, pairwise-disjoint interiors, and total mass
    sum_i gamma_i vol(H_i) = 1 within ``MASS_TOL``.
    """

    dimension: int
    boxes: tuple[tuple[Hyperrectangle, float], ...]

    def __post_init__(self) -> None:
        boxes = tuple((box, float(w)) for box, w in self.boxes)
        object.__setattr__(self, "boxes", boxes)
        if not boxes:
            raise ValueError("density needs at least one box")
        for box, w in boxes:
            if box.dimension != self.dimension:
                raise ValueError("box dimension mismatch")
            if not (w > 0 and math.isfinite(w)):
                raise ValueError("weights must be positive and finite")
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                if _interiors_overlap(boxes[i][0], boxes[j][0]):
                    raise ValueError(f"boxes {i} and {j} have overlapping interiors")
        mass = self.total_mass
        if abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {mass!r} is not 1 within {MASS_TOL}")

    @property
    def k(self) -> int:
        return len(self.boxes)

    @property
    def total_mass(self) -> float:
        return float(sum(w * box.volume for box, w in self.boxes))

    def support_bounding_box(self) -> Hyperrectangle:
        lo = np.min([box.lo for box, _ in self.boxes], axis=0)
        hi = np.max([box.hi for box, _ in self.boxes], axis=0)
        return Hyperrectangle(lo, hi)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Discrete sinks y_j with demands b_j >= 0 summing to 1."""

    points: np.ndarray
    demands: np.ndarray

    def __post_init__(self) -> None:
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        dem = np.atleast_1d(np.asarray(self.demands, dtype=float))
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "demands", dem)
        if pts.ndim != 2 or dem.shape != (pts.shape[0],):
            raise ValueError("points must be (n, l); demands must be (n,)")
        if not (np.isfinite(pts).all() and np.isfinite(dem).all()):
            raise ValueError("points and demands must be finite")
        if (dem < 0).any():
            raise ValueError("demands must be nonnegative")
        if abs(dem.sum() - 1.0) > MASS_TOL:
            raise ValueError("demands must sum to 1")
        for i in range(pts.shape[0]):
            for j in range(i + 1, pts.shape[0]):
                if (pts[i] == pts[j]).all():
                    raise ValueError(f"samples {i} and {j} coincide")

    @classmethod
    def uniform(cls, points: Sequence[Sequence[float]] | np.ndarray) -> "SampleSet":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = pts.shape[0]
        return cls(pts, np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def uniform_demands(self) -> bool:
        return bool(np.allclose(self.demands, 1.0 / self.n, atol=MASS_TOL, rtol=0.0))


@dataclass(frozen=True)
class InstanceStats:
    """Derived instance constants.

    N      total source mass (1 by construction, kept explicit).
    D      max norm over the reference set: samples and all box corners.
    s      min of (min pairwise sample distance, min box width).
    L      smoothness constant 2 n l k / s^2.
    reference_set_size  n + k 2^l (corners counted nominally).
    """

    N: float
    D: float
    s: float
    L: float
    reference_set_size: int


@dataclass(frozen=True, eq=False)
class Instance:
    """A source density together with the sample sinks it is matched against."""

    density: BoxDensity
    samples: SampleSet

    def __post_init__(self) -> None:
        if self.density.dimension != self.samples.dimension:
            raise ValueError("density and samples disagree on dimension")

    @property
    def dimension(self) -> int:
        return self.density.dimension

    @cached_property
    def stats(self) -> InstanceStats:
        return instance_stats(self.density, self.samples)


def instance_stats(density: BoxDensity, samples: SampleSet) -> InstanceStats:
    """Compute (N, D, s, L) for a density/sample pair."""
    n, l, k = samples.n, density.dimension, density.k
    d_samples = float(np.linalg.norm(samples.points, axis=1).max())
    d_corners = max(box.max_corner_norm() for box, _ in density.boxes)
    big_d = max(d_samples, d_corners)

    min_width = min(float(box.widths.min()) for box, _ in density.boxes)
    s = min_width
    if n >= 2:
        diffs = samples.points[:, None, :] - samples.points[None, :, :]
        dist = np.sqrt((diffs**2).sum(-1))
        s = min(s, float(dist[np.triu_indices(n, 1)].min()))
    if not s > 0:
        raise ValueError("degenerate instance: s = 0")
    smooth = 2.0 * n * l * k / s**2
    return InstanceStats(
        N=density.total_mass,
        D=big_d,
        s=s,
        L=smooth,
        reference_set_size=n + k * 2**l,
    )


# ---------------------------------------------------------------------------
# separation oracles and classification
# ---------------------------------------------------------------------------


def box_separation_oracle(box: Hyperrectangle, x: np.ndarray) -> Hyperplane | None:
    """Membership test for a box, with a separating hyperplane on failure.

    Returns None when lo <= x <= hi componentwise. Otherwise returns an
    axis-aligned Hyperplane (a, beta) with a.x > beta and a.z <= beta for
    every z in the box (first violated face in axis order, lower before
    upper). O(l) comparisons.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != box.lo.shape:
        raise ValueError("point dimension does not match box dimension")
    for d in range(box.dimension):
        if x[d] < box.lo[d]:
            a = np.zeros(box.dimension)
            a[d] = -1.0
            return Hyperplane(a, -float(box.lo[d]))
        if x[d] > box.hi[d]:
            a = np.zeros(box.dimension)
            a[d] = 1.0
            return Hyperplane(a, float(box.hi[d]))
    return None


def _scores(samples: SampleSet, g: np.ndarray, x: np.ndarray) -> np.ndarray:
    # ||x - y_j||^2 - g_j minus the j-independent ||x||^2 term.
    y = samples.points
    return (y**2).sum(-1) - 2.0 * (y @ x) - g


def laguerre_separation_oracle(
    samples: SampleSet, g: np.ndarray, j: int, x: np.ndarray
) -> Hyperplane | None:
    """Membership test for Laguerre cell j, with a cut on failure.

    Cell j is {x : ||x-y_j||^2 - g_j <= ||x-y_j'||^2 - g_j' for all j'}. On
    failure returns the hyperplane for the smallest violated j':
    a = 2 (y_j' - y_j), beta = g_j - g_j' + ||y_j'||^2 - ||y_j||^2, which
    satisfies a.x > beta and a.z <= beta on the cell. O(n l) time.
    """
    g = np.asarray(g, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not 0 <= j < samples.n:
        raise ValueError(f"cell index {j} out of range")
    scores = _scores(samples, g, x)
    violated = np.flatnonzero(scores < scores[j])
    if violated.size == 0:
        return None
    jp = int(violated[0])
    y = samples.points
    a = 2.0 * (y[jp] - y[j])
    beta = float(g[j] - g[jp] + (y[jp] ** 2).sum() - (y[j] ** 2).sum())
    return Hyperplane(a, beta)


def classify_point(samples: SampleSet, g: np.ndarray, x: np.ndarray) -> int:
    """Index of the Laguerre cell containing x; ties go to the smallest index."""
    g = np.asarray(g, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return int(np.argmin(_scores(samples, g, x)))


def classify_points(samples: SampleSet, g: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Vectorized :func:`classify_point` over rows of xs, shape (m, l) -> (m,)."""
    g = np.asarray(g, dtype=float)
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    y = samples.points
    scores = (y**2).sum(-1)[None, :] - 2.0 * (xs @ y.T) - g[None, :]
    return np.argmin(scores, axis=1)


# ---------------------------------------------------------------------------
# Monte-Carlo volumes
# ---------------------------------------------------------------------------


def box_rng(seed: int, box_index: int) -> np.random.Generator:
    """Deterministic per-box substream: default_rng(SeedSequence(seed, spawn_key=(i,))).

    Part of the sampling contract: serial and parallel sweeps over boxes see
    identical, non-overlapping streams.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(box_index,)))


def mc_sample_count(n: int, eps_bar: float, eta_prime: float) -> int:
    """Hoeffding count ceil(ln(2n/eta') / (2 eps_bar^2)) for n simultaneous cells."""
    if not 0.0 < eps_bar < 1.0:
        raise ValueError("eps_bar must lie in (0, 1)")
    if not 0.0 < eta_prime < 1.0:
        raise ValueError("eta_prime must lie in (0, 1)")
    return int(math.ceil(math.log(2.0 * n / eta_prime) / (2.0 * eps_bar**2)))


def cell_box_volumes_mc(
    samples: SampleSet,
    g: np.ndarray,
    box: Hyperrectangle,
    eps_bar: float,
    eta_prime: float,
    seed: int,
    box_index: int = 0,
) -> np.ndarray:
    """Estimate vol(L_j(g) n box) for all j at once by rejection sampling.

    Draws m >= ceil(ln(2n/eta')/(2 eps_bar^2)) uniform points in the box,
    classifies each, and returns fraction_j * vol(box). With probability at
    least 1 - eta' every cell satisfies |v_j - vol(L_j n box)| <=
    eps_bar * vol(box) (Hoeffding plus a union bound over the n cells).

    One pass serves every cell: the gradient consumes all j for a fixed box.
    """
    g = np.asarray(g, dtype=float)
    if not np.isfinite(g).all():
        raise ValueError("dual weights must be finite")
    m = mc_sample_count(samples.n, eps_bar, eta_prime)
    if m > MC_SAMPLE_CAP:
        raise ValueError(
            f"MC budget {m} exceeds cap {MC_SAMPLE_CAP}; "
            "loosen eps_bar/eta_prime or use the exact backend"
        )
    rng = box_rng(seed, box_index)
    counts = np.zeros(samples.n, dtype=np.int64)
    remaining = m
    while remaining > 0:
        chunk = min(remaining, _MC_CHUNK)
        pts = rng.uniform(box.lo, box.hi, size=(chunk, box.dimension))
        counts += np.bincount(classify_points(samples, g, pts), minlength=samples.n)
        remaining -= chunk
    return counts / m * box.volume


# ---------------------------------------------------------------------------
# exact cell volumes and moments (l <= 3)
# ---------------------------------------------------------------------------


def _cell_halfspaces(samples: SampleSet, g: np.ndarray, j: int):
    """Rows (a, b) with cell j = {x : a.x <= b for all rows}."""
    y = samples.points
    rows_a = []
    rows_b = []
    norms = (y**2).sum(-1)
    for jp in range(samples.n):
        if jp == j:
            continue
        rows_a.append(2.0 * (y[jp] - y[j]))
        rows_b.append(g[j] - g[jp] + norms[jp] - norms[j])
    return rows_a, rows_b


def _interval_cell_moments(lo, hi, rows_a, rows_b):
    for a, b in zip(rows_a, rows_b):
        a = float(a[0])
        if a > 0:
            hi = min(hi, b / a)
        else:
            lo = max(lo, b / a)
    if hi <= lo:
        return 0.0, np.zeros(1), 0.0
    vol = hi - lo
    first = np.array([(hi**2 - lo**2) / 2.0])
    second = (hi**3 - lo**3) / 3.0
    return vol, first, second


def _clip_polygon(poly, a, b):
    """Sutherland-Hodgman clip of a convex polygon against a.x <= b."""
    out = []
    m = len(poly)
    for i in range(m):
        p = poly[i]
        q = poly[(i + 1) % m]
        fp = a[0] * p[0] + a[1] * p[1] - b
        fq = a[0] * q[0] + a[1] * q[1] - b
        pin = fp <= 0.0
        qin = fq <= 0.0
        if pin and qin:
            out.append(q)
        elif pin and not qin:
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
        elif not pin and qin:
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
            out.append(q)
    return out


def _polygon_moments(poly):
    """(area, integral x, integral ||x||^2) over a convex polygon, signed fan."""
    if len(poly) < 3:
        return 0.0, np.zeros(2), 0.0
    x0, y0 = poly[0]
    area = 0.0
    first = np.zeros(2)
    second = 0.0
    for i in range(1, len(poly) - 1):
        x1, y1 = poly[i]
        x2, y2 = poly[i + 1]
        cross = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        tri = 0.5 * cross
        area += tri
        first[0] += tri * (x0 + x1 + x2) / 3.0
        first[1] += tri * (y0 + y1 + y2) / 3.0
        sq = x0**2 + y0**2 + x1**2 + y1**2 + x2**2 + y2**2
        sx, sy = x0 + x1 + x2, y0 + y1 + y2
        second += tri / 12.0 * (sq + sx**2 + sy**2)
    if area < 0:
        return -area, -first, -second
    return area, first, second


def _polytope_moments_3d(rows_a, rows_b):
    """(volume, integral x, integral ||x||^2) of {A x <= b} via hull tetrahedra."""
    from scipy.optimize import linprog
    from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

    A = np.asarray(rows_a, dtype=float)
    b = np.asarray(rows_b, dtype=float)
    # Chebyshev center: max r s.t. A x + ||A_i|| r <= b.
    norms = np.linalg.norm(A, axis=1)
    res = linprog(
        c=[0.0, 0.0, 0.0, -1.0],
        A_ub=np.hstack([A, norms[:, None]]),
        b_ub=b,
        bounds=[(None, None)] * 3 + [(0.0, None)],
        method="highs",
    )
    if res.status != 0 or res.x[3] <= 1e-11:
        return 0.0, np.zeros(3), 0.0
    interior = res.x[:3]
    try:
        hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), interior)
        hull = ConvexHull(hs.intersections)
    except QhullError:
        return 0.0, np.zeros(3), 0.0
    pts = hs.intersections
    c = pts.mean(axis=0)
    vol = 0.0
    first = np.zeros(3)
    second = 0.0
    csq = (c**2).sum()
    for simplex in hull.simplices:
        t0, t1, t2 = pts[simplex]
        v = abs(np.linalg.det(np.stack([t0 - c, t1 - c, t2 - c]))) / 6.0
        if v == 0.0:
            continue
        vol += v
        ssum = c + t0 + t1 + t2
        first += v * ssum / 4.0
        sq = csq + (t0**2).sum() + (t1**2).sum() + (t2**2).sum()
        second += v / 20.0 * (sq + (ssum**2).sum())
    return vol, first, second


def cell_box_moments_exact(
    samples: SampleSet, g: np.ndarray, box: Hyperrectangle
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact (volume, integral x, integral ||x||^2) of L_j(g) n box for all j.

    Supported for l <= 3 only: 1D interval intersection, 2D half-plane
    clipping, 3D half-space intersection with tetrahedral decomposition.
    Returns (vols (n,), firsts (n, l), seconds (n,)). Deterministic.
    """
    g = np.asarray(g, dtype=float)
    l = box.dimension
    if l > 3:
        raise ValueError("exact cell volumes support dimension <= 3 only")
    n = samples.n
    vols = np.zeros(n)
    firsts = np.zeros((n, l))
    seconds = np.zeros(n)
    if l == 2:
        x0, y0 = box.lo
        x1, y1 = box.hi
        base = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    for j in range(n):
        rows_a, rows_b = _cell_halfspaces(samples, g, j)
        if l == 1:
            vols[j], firsts[j], seconds[j] = _interval_cell_moments(
                float(box.lo[0]), float(box.hi[0]), rows_a, rows_b
            )
        elif l == 2:
            poly = base
            for a, b in zip(rows_a, rows_b):
                poly = _clip_polygon(poly, a, b)
                if len(poly) < 3:
                    break
            vols[j], firsts[j], seconds[j] = _polygon_moments(poly)
        else:
            eye = np.eye(3)
            box_a = list(eye) + list(-eye)
            box_b = list(box.hi) + list(-box.lo)
            vols[j], firsts[j], seconds[j] = _polytope_moments_3d(
                box_a + rows_a, box_b + rows_b
            )
    return vols, firsts, seconds


def cell_box_volume_exact(
    samples: SampleSet, g: np.ndarray, j: int, box: Hyperrectangle
) -> float:
    """Exact vol(L_j(g) n box) for l <= 3 (clipping test oracle)."""
    if not 0 <= j < samples.n:
        raise ValueError(f"cell index {j} out of range")
    vols, _, _ = cell_box_moments_exact(samples, g, box)
    return float(vols[j])


# ---------------------------------------------------------------------------
# density moments and construction helpers
# ---------------------------------------------------------------------------


def box_moments(density: BoxDensity) -> tuple[float, np.ndarray, float]:
    """Closed-form (N, integral x dalpha, integral ||x||^2 dalpha).

    Per box, integral of x_d is midpoint_d * volume and integral of x_d^2 is
    (hi_d^3 - lo_d^3)/3 * volume / width_d; weights multiply through.
    """
    n_mass = 0.0
    first = np.zeros(density.dimension)
    second = 0.0
    for box, w in density.boxes:
        vol = box.volume
        n_mass += w * vol
        first += w * vol * box.midpoint
        cubes = (box.hi**3 - box.lo**3) / 3.0
        second += w * float((cubes * (vol / box.widths)).sum())
    return n_mass, first, second


def approximate_density(
    grid_values: np.ndarray,
    cell_widths: Sequence[float] | float,
    origin: Sequence[float] | None = None,
    compact: bool = False,
) -> BoxDensity:
    """Build a BoxDensity from density values sampled on a regular grid.

    One box per strictly positive grid cell, weight proportional to the
    sampled value and rescaled so the total mass is exactly 1. With
    ``compact=True``, consecutive equal-weight cells along the last axis are
    merged into single boxes.
    """
    values = np.asarray(grid_values, dtype=float)
    l = values.ndim
    widths = np.broadcast_to(np.asarray(cell_widths, dtype=float), (l,)).astype(float)
    if origin is None:
        origin = np.zeros(l)
    origin = np.asarray(origin, dtype=float)
    if (values < 0).any():
        raise ValueError("grid values must be nonnegative")
    cell_vol = float(np.prod(widths))
    total = values.sum() * cell_vol
    if total <= 0:
        raise ValueError("grid has no positive cell")

    boxes: list[tuple[Hyperrectangle, float]] = []
    flat_index = list(np.ndindex(values.shape))
    i = 0
    while i < len(flat_index):
        idx = flat_index[i]
        v = values[idx]
        if v <= 0:
            i += 1
            continue
        run = 1
        if compact:
            # extend along the last axis while the weight repeats
            while i + run < len(flat_index):
                nxt = flat_index[i + run]
                if nxt[:-1] != idx[:-1] or nxt[-1] != idx[-1] + run:
                    break
                if values[nxt] != v:
                    break
                run += 1
        lo = origin + np.array(idx) * widths
        hi = lo + widths
        hi[-1] = lo[-1] + run * widths[-1]
        boxes.append((Hyperrectangle(lo, hi), float(v / total)))
        i += run
    return BoxDensity(dimension=l, boxes=tuple(boxes))


def box_shadow_volume(box: Hyperrectangle, direction: np.ndarray) -> float:
    """(l-1)-volume of the box's shadow on the hyperplane orthogonal to ``direction``.

    Closed form for boxes: sum_d |u_d| * vol / width_d with u the unit
    direction.
    """
    u = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(u)
    if norm == 0:
        raise ValueError("direction must be nonzero")
    u = u / norm
    return float((np.abs(u) * box.volume / box.widths).sum())
