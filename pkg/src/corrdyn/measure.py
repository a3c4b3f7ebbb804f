"""Atomic measures, pushforwards, the transfer operator, and distances.

PointMeasure is a finite weighted atomic measure on the sphere (atoms at
INFINITY are tagged, never encoded as large floats).  Pushforwards replace
each atom by the fiber over it, weighted by multiplicity; the normalized
depth-m pushforward of a Dirac mass is the equidistribution estimator.
Weak-* closeness is operationalized as total variation between grid
histograms plus a first-moment difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._backend import kernels
from ._parallel import pmap
from .algebra import INFINITY, Point, is_infinite
from .correspondence import Correspondence
from .errors import BudgetExceeded, HypothesisUnmet, InfiniteAtom
from .rng import Rng, sub_seed

DEFAULT_PRUNE_TOL = 1e-9
DEFAULT_BUDGET = 2_000_000
MC_CHAINS = 16  # fixed chain split so results are thread-count independent


def _coalesce(atoms: list[tuple[Point, float]], tol: float) -> list[tuple[Point, float]]:
    """Merge atoms in the same tol-cell (weighted mean position, summed weight)."""
    finite = [(p, w) for p, w in atoms if not is_infinite(p)]
    inf_weight = sum(w for p, w in atoms if is_infinite(p))
    finite.sort(key=lambda a: (a[0].real, a[0].imag))
    merged: dict[tuple[int, int], list[float]] = {}
    for p, w in finite:
        key = (math.floor(p.real / tol), math.floor(p.imag / tol))
        slot = merged.get(key)
        if slot is None:
            merged[key] = [p.real * w, p.imag * w, w]
        else:
            slot[0] += p.real * w
            slot[1] += p.imag * w
            slot[2] += w
    out: list[tuple[Point, float]] = [
        (complex(sx / sw, sy / sw), sw) for sx, sy, sw in merged.values()
    ]
    out.sort(key=lambda a: (a[0].real, a[0].imag))
    if inf_weight > 0.0:
        out.append((INFINITY, inf_weight))
    return out


@dataclass(frozen=True)
class PointMeasure:
    """Finite weighted atomic measure; atoms canonically ordered by (re, im)."""

    atoms: tuple[tuple[Point, float], ...]
    total: float

    @classmethod
    def from_atoms(
        cls, atoms, merge_tol: float = DEFAULT_PRUNE_TOL
    ) -> "PointMeasure":
        merged = _coalesce(list(atoms), merge_tol)
        return cls(tuple(merged), sum(w for _, w in merged))

    @classmethod
    def dirac(cls, a: Point, weight: float = 1.0) -> "PointMeasure":
        return cls(((a, float(weight)),), float(weight))

    def normalized(self) -> "PointMeasure":
        if self.total == 0.0:
            raise ValueError("cannot normalize the zero measure")
        return PointMeasure(
            tuple((p, w / self.total) for p, w in self.atoms), 1.0
        )

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self.total - 1.0) <= tol

    def finite_atoms(self) -> list[tuple[complex, float]]:
        return [(p, w) for p, w in self.atoms if not is_infinite(p)]

    def infinity_mass(self) -> float:
        return sum(w for p, w in self.atoms if is_infinite(p))

    def moment(self, p: int = 1, q: int = 0) -> complex:
        """sum w * z^p * conj(z)^q over finite atoms."""
        acc = 0j
        for z, w in self.finite_atoms():
            acc += w * (z ** p) * (z.conjugate() ** q)
        return acc

    def integrate(self, phi) -> complex:
        acc = 0j
        for z, w in self.atoms:
            acc += w * phi(z)
        return acc

    def to_jsonable(self) -> dict:
        rows = []
        for p, w in self.atoms:
            if is_infinite(p):
                rows.append([math.inf, math.inf, w])
            else:
                rows.append([p.real, p.imag, w])
        return {"atoms": rows, "total": self.total}

    @classmethod
    def from_jsonable(cls, obj: dict) -> "PointMeasure":
        atoms = []
        for re, im, w in obj["atoms"]:
            if isinstance(re, float) and math.isinf(re):
                atoms.append((INFINITY, float(w)))
            else:
                atoms.append((complex(re, im), float(w)))
        return cls(tuple(atoms), float(obj["total"]))


# ---------------------------------------------------------------------------
# Test functions
# ---------------------------------------------------------------------------


def _smooth_step(t: float) -> float:
    """C-infinity transition: 1 for t <= 0, 0 for t >= 1."""
    if t <= 0.0:
        return 1.0
    if t >= 1.0:
        return 0.0
    a = math.exp(-1.0 / t)
    b = math.exp(-1.0 / (1.0 - t))
    return b / (a + b)


@dataclass(frozen=True)
class TestFunction:
    """Bounded test function: a cutoff monomial moment or a grid indicator.

    kind "moment": z^p conj(z)^q, identically on |z| <= radius/2, smoothly
    cut off to 0 at |z| >= radius (and 0 at INFINITY).
    kind "cell": indicator of the half-open grid cell [x0, x0+h) x [y0, y0+h).
    """

    __test__ = False  # not a pytest class, despite the name

    kind: str
    p: int = 0
    q: int = 0
    radius: float = 1.0
    x0: float = 0.0
    y0: float = 0.0
    h: float = 1.0

    def __call__(self, z: Point) -> complex:
        if is_infinite(z):
            return 0j
        if self.kind == "moment":
            r = abs(z)
            cut = _smooth_step(2.0 * r / self.radius - 1.0)
            if cut == 0.0:
                return 0j
            return (z ** self.p) * (z.conjugate() ** self.q) * cut
        if self.kind == "cell":
            inside = (
                self.x0 <= z.real < self.x0 + self.h
                and self.y0 <= z.imag < self.y0 + self.h
            )
            return complex(1.0 if inside else 0.0)
        raise ValueError(f"unknown test function kind {self.kind!r}")


def moment_test(p: int, q: int, radius: float) -> TestFunction:
    return TestFunction("moment", p=p, q=q, radius=radius)


def cell_indicator(x0: float, y0: float, h: float) -> TestFunction:
    return TestFunction("cell", x0=x0, y0=y0, h=h)


def moment_dictionary(max_order: int, radius: float) -> list[TestFunction]:
    """All cutoff moments with p + q <= max_order (excluding the constant)."""
    out = []
    for total in range(1, max_order + 1):
        for p in range(total + 1):
            out.append(moment_test(p, total - p, radius))
    return out


# ---------------------------------------------------------------------------
# Pushforwards
# ---------------------------------------------------------------------------


def push_once(
    C: Correspondence, mu: PointMeasure, merge_tol: float = DEFAULT_PRUNE_TOL
) -> PointMeasure:
    """One pushforward step: atoms map to their fibers, weights times multiplicity.

    Total mass multiplies by d.  Atoms at INFINITY are rejected; seed at
    infinity through push_from_infinity instead.
    """
    children: list[tuple[Point, float]] = []
    for p, w in mu.atoms:
        if is_infinite(p):
            raise InfiniteAtom("push_once only handles finite atoms")
        for v, m in C.fiber(p).entries:
            children.append((v, w * m))
    return PointMeasure.from_atoms(children, merge_tol)


def _expand_level(
    C: Correspondence,
    atoms: list[tuple[Point, float]],
    threads: int,
) -> list[tuple[Point, float]]:
    """One level of the pushforward tree via the batched kernel."""
    pts = [p for p, _ in atoms]
    weights = [w for _, w in atoms]
    cols = C.curve.w_columns()
    d = C.d

    def run_chunk(chunk):
        zs = [complex(p) for p in chunk]
        return kernels.batch_fiber_roots(cols, d, zs)

    # chunking must stay fixed; reuse pmap over index blocks
    idx_blocks = [list(range(i, min(i + 512, len(pts)))) for i in range(0, len(pts), 512)]

    def work(block):
        flat, status = run_chunk([pts[i] for i in block])
        out = []
        fi = 0
        for pos, st in zip(block, status):
            if st == 0:
                for j in range(d):
                    out.append((flat[fi + j], weights[pos]))
                fi += d
            else:
                # slow path: full fiber with INFINITY handling
                for v, m in C.fiber(pts[pos]).entries:
                    out.append((v, weights[pos] * m))
        return out

    results = pmap(work, idx_blocks, threads=threads)
    children: list[tuple[Point, float]] = []
    for r in results:
        children.extend(r)
    return children


def exact_pushforward(
    C: Correspondence,
    a: complex,
    m: int,
    prune_tol: float = DEFAULT_PRUNE_TOL,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> PointMeasure:
    """Normalized depth-m pushforward of the Dirac mass at a.

    Atoms within prune_tol are merged per level with weights preserved
    exactly.  Raises BudgetExceeded (with the deepest completed level
    attached) when a level would exceed the atom budget.
    """
    if is_infinite(a):
        raise InfiniteAtom("seed must be finite; use push_from_infinity")
    mu = PointMeasure.dirac(complex(a))
    for level in range(m):
        if len(mu.atoms) * C.d > budget:
            raise BudgetExceeded(
                f"level {level + 1} would exceed {budget} atoms",
                completed_level=level,
                measure=mu,
            )
        children = _expand_level(C, list(mu.atoms), threads)
        scaled = [(p, w / C.d) for p, w in children]
        mu = PointMeasure.from_atoms(scaled, prune_tol)
    return mu


def max_affordable_depth(d: int, budget: int) -> int:
    """Largest m with d^m <= budget (conservative, ignores coalescing)."""
    m = 0
    atoms = 1
    while atoms * d <= budget:
        atoms *= d
        m += 1
    return m


def sample_orbit_measure(
    C: Correspondence,
    a: complex,
    burn_in: int,
    samples: int,
    seed: int,
    threads: int = 1,
) -> PointMeasure:
    """Monte-Carlo estimator: random orbit walk, fiber points chosen with
    probability multiplicity/d.

    The walk is split into MC_CHAINS independent chains with sub-seeds
    derived via rng.sub_seed, each carrying its own burn-in; the split is
    fixed, so output is identical for every thread count.  Weights are
    1/samples.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n_chains = min(MC_CHAINS, samples)
    base = samples // n_chains
    extra = samples % n_chains
    plan = [(i, base + (1 if i < extra else 0)) for i in range(n_chains)]

    def run_chain(item):
        idx, count = item
        if count == 0:
            return []
        rng = Rng(sub_seed(seed, idx))
        x = complex(a)
        out = []
        for step in range(burn_in + count):
            entries = C.fiber(x).entries
            weights = [mult for _, mult in entries]
            choice = entries[rng.pick_weighted(weights)][0]
            if is_infinite(choice):
                raise InfiniteAtom("orbit escaped to infinity")
            x = choice
            if step >= burn_in:
                out.append(x)
        return out

    chains = pmap(run_chain, plan, threads=threads)
    w = 1.0 / samples
    atoms = [(x, w) for chain in chains for x in chain]
    return PointMeasure.from_atoms(atoms, DEFAULT_PRUNE_TOL)


def transfer_apply(
    C: Correspondence,
    phi: TestFunction,
    points: list[complex],
    m: int,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> list[complex]:
    """(A^m phi)(xi) for each xi: fiber averages iterated m times.

    Computed as the integral of phi against the normalized depth-m
    pushforward of each Dirac mass (per-level coalescing of equal points).
    """
    if C.d ** m > budget:
        raise BudgetExceeded(f"d^m = {C.d ** m} exceeds budget {budget}")
    out = []
    for xi in points:
        mu = exact_pushforward(C, xi, m, prune_tol=1e-12, budget=budget,
                               threads=threads)
        out.append(mu.integrate(phi))
    return out


def invariance_residual(
    C: Correspondence, mu: PointMeasure, test_dict: list[TestFunction]
) -> float:
    """max over the dictionary of |<(1/d) F_* mu - mu, phi>| (exact atom sums)."""
    if not mu.is_normalized():
        raise ValueError("mu must be normalized")
    pushed = push_once(C, mu)
    worst = 0.0
    for phi in test_dict:
        v = pushed.integrate(phi) / C.d - mu.integrate(phi)
        worst = max(worst, abs(v))
    return worst


@dataclass(frozen=True)
class GridDistance:
    """Grid total-variation distance plus the first-moment difference."""

    tv: float
    moment_diff: float

    def __float__(self) -> float:
        return self.tv


def measure_distance(
    mu1: PointMeasure,
    mu2: PointMeasure,
    grid_eps: float,
    window_radius: float,
) -> GridDistance:
    """Total-variation distance of grid histograms at pitch grid_eps.

    Cells are centered on the lattice (k grid_eps, l grid_eps), so point
    clusters sitting at lattice points (fixed points, the real axis) are
    not split by cell boundaries.  Atoms outside D(0, window_radius) and
    atoms at INFINITY fall into a single overflow cell.
    """
    def histogram(mu: PointMeasure) -> dict:
        h: dict = {}
        for p, w in mu.atoms:
            if is_infinite(p) or abs(p) > window_radius:
                key = "overflow"
            else:
                key = (
                    math.floor(p.real / grid_eps + 0.5),
                    math.floor(p.imag / grid_eps + 0.5),
                )
            h[key] = h.get(key, 0.0) + w
        return h

    h1, h2 = histogram(mu1), histogram(mu2)
    keys = set(h1) | set(h2)
    tv = 0.5 * sum(abs(h1.get(k, 0.0) - h2.get(k, 0.0)) for k in keys)
    moment_diff = abs(mu1.moment(1, 0) - mu2.moment(1, 0))
    return GridDistance(tv, moment_diff)


def infinity_fiber(C: Correspondence) -> tuple[list[tuple[complex, int]], int]:
    """Finite fiber points over z = INFINITY and the multiplicity kept at INFINITY.

    The finite points are the roots of the top z-degree coefficient of the
    curve (a polynomial in w of degree d1); INFINITY keeps multiplicity
    d - d1.  Raises HypothesisUnmet when the curve is constant in z or the
    top coefficient is constant in w (no finite points to escape to).
    """
    dz = C.back_degree
    if dz < 1:
        raise HypothesisUnmet("curve is constant in z")
    lead_row = [C.curve.coeff(dz, j) for j in range(C.d + 1)]
    from .algebra import UniPoly, poly_roots  # local import to avoid cycle

    c = UniPoly(lead_row)
    if c.degree < 1:
        raise HypothesisUnmet("top z-coefficient is constant in w")
    d1 = int(c.degree)
    rm = poly_roots(c)
    finite = rm.finite_entries()
    return finite, C.d - d1


def push_from_infinity(
    C: Correspondence,
    m: int,
    budget: int = DEFAULT_BUDGET,
    prune_tol: float = DEFAULT_PRUNE_TOL,
    threads: int = 1,
) -> tuple[PointMeasure, list[float]]:
    """Normalized depth-m pushforward of the Dirac mass at INFINITY.

    Returns (measure, infinity_mass_per_level): the INFINITY atom keeps
    mass ((d - d1)/d)^level at each level, the rest flows through the
    finite fiber of INFINITY and then iterates as the exact pushforward.
    """
    finite0, inf_mult = infinity_fiber(C)
    d = C.d
    mu_atoms: list[tuple[Point, float]] = [(INFINITY, 1.0)]
    masses: list[float] = []
    mu = PointMeasure(tuple(mu_atoms), 1.0)
    for level in range(m):
        if len(mu.atoms) * d > budget:
            raise BudgetExceeded(
                f"level {level + 1} would exceed {budget} atoms",
                completed_level=level,
                measure=mu,
            )
        children: list[tuple[Point, float]] = []
        inf_w = mu.infinity_mass()
        if inf_w > 0.0:
            for v, mult in finite0:
                children.append((v, inf_w * mult / d))
            if inf_mult > 0:
                children.append((INFINITY, inf_w * inf_mult / d))
        finite_atoms = mu.finite_atoms()
        if finite_atoms:
            expanded = _expand_level(C, finite_atoms, threads)
            children.extend((p, w / d) for p, w in expanded)
        mu = PointMeasure.from_atoms(children, prune_tol)
        masses.append(mu.infinity_mass())
    return mu, masses


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-depth convergence diagnostics for the pushforward estimator.

    rows: (m, tv distance to the deepest estimate, first-moment difference,
    invariance residual); metadata records the seed point, estimator kind
    and RNG seed.
    """

    rows: tuple[tuple[int, float, float, float], ...]
    seed_point: complex
    estimator: str
    rng_seed: int | None

    def to_csv(self) -> str:
        from .serialize import csv_lines

        return csv_lines(
            ["m", "tv", "moment", "invariance"],
            [list(r) for r in self.rows],
        )


def convergence_report(
    C: Correspondence,
    a: complex,
    m_max: int,
    grid_eps: float,
    window_radius: float,
    test_dict: list[TestFunction],
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> tuple[ConvergenceReport, PointMeasure]:
    """Depth sweep m = 1..m_max against the deepest estimate."""
    estimates = []
    for m in range(1, m_max + 1):
        estimates.append(exact_pushforward(C, a, m, budget=budget, threads=threads))
    limit = estimates[-1]
    rows = []
    for m, mu in enumerate(estimates, start=1):
        gd = measure_distance(mu, limit, grid_eps, window_radius)
        inv = invariance_residual(C, mu, test_dict)
        rows.append((m, gd.tv, gd.moment_diff, inv))
    report = ConvergenceReport(tuple(rows), complex(a), "exact", None)
    return report, limit
