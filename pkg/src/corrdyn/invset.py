"""Minimal Hutchinson invariant sets, Cantor diagnostics, periodic points.

The minimal invariant set in degree n is approximated as the orbit closure
of a simple zero of Q_k at a fixed cell resolution eps (quadtree covering).
Diagnostics report connected-component counts, component diameters, an
isolated-cell perfectness proxy, and attracting periodic orbits obtained by
iterating composed contraction branches over words.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from ._parallel import pmap
from .algebra import INFINITY
from .correspondence import Certificate, Correspondence, certify
from .diffop import DiffOperator, TnBuild, build_Tn
from .errors import BranchCollision, NotCertified
from .serialize import csv_lines

Cell = tuple[int, int]

# fixed 8-color palette for generation rendering (PPM)
_PALETTE = (
    (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40),
    (148, 103, 189), (140, 86, 75), (227, 119, 194), (127, 127, 127),
)


class CellSet:
    """Occupied-cell covering at resolution eps on a center-anchored grid.

    Cell (ix, iy) is centered at (ix eps, iy eps) and covers the half-open
    square [(ix - 1/2) eps, (ix + 1/2) eps) x [(iy - 1/2) eps, (iy + 1/2)
    eps); centering keeps fixed points and the real axis away from cell
    boundaries.  The recorded generation is the orbit depth of the first
    hit.  The bounding square always contains D(0, bound_radius).
    """

    def __init__(self, eps: float, bound_radius: float):
        self.eps = eps
        self.bound_radius = bound_radius
        self.cells: dict[Cell, int] = {}
        self.representatives: dict[Cell, complex] = {}
        self.truncated = False
        self.certified = True
        self.seed: complex | None = None
        self.certificate: Certificate | None = None

    def key(self, p: complex) -> Cell:
        return (
            math.floor(p.real / self.eps + 0.5),
            math.floor(p.imag / self.eps + 0.5),
        )

    def center(self, cell: Cell) -> complex:
        return complex(cell[0] * self.eps, cell[1] * self.eps)

    def occupied_centers(self) -> list[complex]:
        return [self.center(c) for c in sorted(self.cells)]

    def _bounds(self) -> tuple[int, int, int, int]:
        m = math.floor(self.bound_radius / self.eps) + 1
        xs = [c[0] for c in self.cells] + [-m, m]
        ys = [c[1] for c in self.cells] + [-m, m]
        return min(xs), min(ys), max(xs), max(ys)

    def to_jsonable(self) -> dict:
        x0, y0, x1, y1 = self._bounds()
        return {
            "eps": self.eps,
            "origin": [x0, y0],
            "extent": [x1 - x0 + 1, y1 - y0 + 1],
            "truncated": self.truncated,
            "certified": self.certified,
            "cells": [[c[0], c[1], g] for c, g in sorted(self.cells.items())],
        }

    def to_ppm(self) -> bytes:
        """Binary PPM (P6), one pixel per cell, generations on a fixed palette."""
        x0, y0, x1, y1 = self._bounds()
        width = x1 - x0 + 1
        height = y1 - y0 + 1
        header = f"P6\n{width} {height}\n255\n".encode()
        body = bytearray()
        for iy in range(y1, y0 - 1, -1):  # top row = largest imaginary part
            for ix in range(x0, x1 + 1):
                gen = self.cells.get((ix, iy))
                if gen is None:
                    body.extend((255, 255, 255))
                else:
                    body.extend(_PALETTE[gen % 8])
        return header + bytes(body)


def _expand_orbit(
    C: Correspondence,
    seed: complex,
    eps: float,
    bound_radius: float,
    max_atoms: int,
    threads: int,
) -> CellSet:
    """Breadth-first orbit expansion with near-duplicate suppression.

    Every produced fiber point marks its cell; a point within eps/4 of an
    earlier point stored in its cell or the 8 neighbors is not re-expanded.
    Terminates after one full generation with no new cell, or at max_atoms
    (flagged truncated).
    """
    S = CellSet(eps, bound_radius)
    S.seed = seed
    reps: dict[Cell, list[complex]] = {}
    dedup = eps / 4.0

    def near_stored(p: complex) -> bool:
        cx, cy = S.key(p)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for r in reps.get((cx + dx, cy + dy), ()):
                    if abs(p - r) < dedup:
                        return True
        return False

    frontier = [seed]
    S.cells[S.key(seed)] = 0
    S.representatives[S.key(seed)] = seed
    reps[S.key(seed)] = [seed]
    stored = 1
    generation = 0
    while frontier:
        generation += 1
        fibers = pmap(lambda p: sorted(
            (w for w in C.fiber_values(p) if w is not INFINITY),
            key=lambda w: (w.real, w.imag)),
            frontier, threads=threads)
        new_frontier: list[complex] = []
        new_cell = False
        for roots in fibers:
            for w in roots:
                cell = S.key(w)
                if cell not in S.cells:
                    S.cells[cell] = generation
                    S.representatives[cell] = w
                    new_cell = True
                if not near_stored(w):
                    reps.setdefault(cell, []).append(w)
                    new_frontier.append(w)
                    stored += 1
                    if stored >= max_atoms:
                        S.truncated = True
                        return S
        if not new_cell:
            break
        frontier = new_frontier
    return S


def certified_build(
    T: DiffOperator, n: int, samples_per_disk: int = 256, threads: int = 1
) -> tuple[TnBuild, Certificate]:
    """build_Tn plus its contraction certificate; raises NotCertified on failure."""
    build = build_Tn(T, n)
    if build.family is None:
        raise NotCertified(f"no family form for n={n}: {build.warnings}")
    cert = certify(build.family, samples_per_disk=samples_per_disk, threads=threads)
    if not cert.passed:
        raise NotCertified(f"certificate failed at n={n}", certificate=cert)
    if not build.correspondence.has_constant_lead():
        raise NotCertified(f"leading w-coefficient not constant at n={n}",
                           certificate=cert)
    return build, cert


def min_invariant_set(
    T: DiffOperator,
    n: int,
    eps: float,
    max_atoms: int = 200_000,
    threads: int = 1,
    seed_point: complex | None = None,
    prebuilt: tuple[TnBuild, Certificate] | None = None,
    allow_uncertified: bool = False,
) -> CellSet:
    """Quadtree covering of the minimal invariant set in degree n.

    Refuses to run (NotCertified, failing certificate attached) unless the
    induced family passes certify.  With allow_uncertified the expansion
    runs on a failing certificate anyway, and the result is labeled
    certified=False: no minimality or containment guarantee applies.  The
    orbit is seeded at the greatest simple zero of Q_k in (re, im) order
    unless seed_point is given.
    """
    if prebuilt is not None:
        build, cert = prebuilt
    else:
        try:
            build, cert = certified_build(T, n, threads=threads)
        except NotCertified as exc:
            if not allow_uncertified or exc.certificate is None:
                raise
            build, cert = build_Tn(T, n), exc.certificate
    seed = cert.fixed_points[-1] if seed_point is None else complex(seed_point)
    S = _expand_orbit(build.correspondence, seed, eps, cert.M, max_atoms, threads)
    S.certificate = cert
    S.certified = cert.passed
    return S


@dataclass(frozen=True)
class ContainmentResult:
    passed: bool
    margin: float


def neighborhood_containment(
    S: CellSet, centers: list[complex], eps_n: float
) -> ContainmentResult:
    """Whether every occupied cell center is within eps_n of some center.

    margin is the worst distance-to-nearest-center over occupied cells.
    """
    margin = 0.0
    for c in S.occupied_centers():
        dist = min(abs(c - u) for u in centers)
        margin = max(margin, dist)
    return ContainmentResult(margin <= eps_n, margin)


def _components(cells: list[Cell]) -> list[list[Cell]]:
    """Connected components under 8-neighborhood adjacency."""
    cellset = set(cells)
    seen: set[Cell] = set()
    comps: list[list[Cell]] = []
    for start in sorted(cellset):
        if start in seen:
            continue
        comp = []
        stack = [start]
        seen.add(start)
        while stack:
            c = stack.pop()
            comp.append(c)
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    nb = (c[0] + dx, c[1] + dy)
                    if nb in cellset and nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
        comps.append(sorted(comp))
    return comps


def _component_diameter(comp: list[Cell], eps: float) -> float:
    """Euclidean diameter of the union of the closed cells."""
    best = 0.0
    for i in range(len(comp)):
        for j in range(i, len(comp)):
            dx = (abs(comp[i][0] - comp[j][0]) + 1) * eps
            dy = (abs(comp[i][1] - comp[j][1]) + 1) * eps
            best = max(best, math.hypot(dx, dy))
    return best


def _cell_gap(a: Cell, b: Cell, eps: float) -> float:
    """Set distance between two closed cells (0 for adjacent/diagonal)."""
    gx = max(0, abs(a[0] - b[0]) - 1) * eps
    gy = max(0, abs(a[1] - b[1]) - 1) * eps
    return math.hypot(gx, gy)


def _isolated_count(cells: list[Cell], eps: float) -> int:
    """Cells whose nearest other occupied cell is farther than 3 eps away."""
    n = 0
    for a in cells:
        nearest = min((_cell_gap(a, b, eps) for b in cells if b != a),
                      default=math.inf)
        if nearest > 3.0 * eps:
            n += 1
    return n


@dataclass(frozen=True)
class CantorRow:
    eps: float
    n_components: int
    max_component_diameter: float
    isolated_cell_count: int


@dataclass(frozen=True)
class CantorReport:
    """Per-resolution structure diagnostics with trend verdicts.

    totally_disconnected_trend: max component diameter strictly decreasing
    as eps shrinks.  perfect_trend: isolated-cell count non-increasing and
    zero at the finest eps.  hypothesis_met flags whether the Cantor-type
    structure is even expected (order k >= 2 with a nonzero lower-order
    coefficient); trends are reported, never asserted as proofs.
    """

    rows: tuple[CantorRow, ...]
    totally_disconnected_trend: bool
    perfect_trend: bool
    hypothesis_met: bool

    def to_csv(self) -> str:
        return csv_lines(
            ["eps", "n_components", "max_component_diameter", "isolated_cell_count"],
            [[r.eps, r.n_components, r.max_component_diameter, r.isolated_cell_count]
             for r in self.rows],
        )


def cantor_diagnostics(
    T: DiffOperator,
    n: int,
    eps_list: list[float],
    max_atoms: int = 200_000,
    threads: int = 1,
) -> CantorReport:
    """Structure diagnostics across resolutions (eps_list sorted decreasing)."""
    eps_sorted = sorted(eps_list, reverse=True)
    prebuilt = certified_build(T, n, threads=threads)
    rows = []
    for eps in eps_sorted:
        S = min_invariant_set(T, n, eps, max_atoms=max_atoms, threads=threads,
                              prebuilt=prebuilt)
        comps = _components(list(S.cells))
        diam = max((_component_diameter(c, eps) for c in comps), default=0.0)
        iso = _isolated_count(list(S.cells), eps)
        rows.append(CantorRow(eps, len(comps), diam, iso))
    decreasing = all(rows[i].max_component_diameter > rows[i + 1].max_component_diameter
                     for i in range(len(rows) - 1))
    iso_trend = all(rows[i].isolated_cell_count >= rows[i + 1].isolated_cell_count
                    for i in range(len(rows) - 1))
    perfect = iso_trend and (rows[-1].isolated_cell_count == 0 if rows else False)
    hypothesis = T.k >= 2 and any(not q.is_zero for q in T.Q[:-1])
    return CantorReport(tuple(rows), decreasing, perfect, hypothesis)


@dataclass(frozen=True)
class PeriodicOrbit:
    """Attracting cycle of a composed branch word.

    word holds 0-based branch labels (branches indexed by proximity to the
    fixed points in (re, im) order); multiplier is the product of branch
    derivatives along the cycle and satisfies |multiplier| < 1.
    """

    word: tuple[int, ...]
    point: complex
    period: int
    multiplier: complex
    residual: float
    cycle: tuple[complex, ...]

    def to_jsonable(self) -> dict:
        return {
            "word": list(self.word),
            "point": [self.point.real, self.point.imag],
            "period": self.period,
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "residual": self.residual,
            "cycle": [[c.real, c.imag] for c in self.cycle],
        }


def _apply_branch(C: Correspondence, us: list[complex], eta0: float,
                  label: int, x: complex) -> complex:
    """Value of the branch landing in D(u_label, eta0) at x."""
    roots = [w for w in C.fiber_values(x) if w is not INFINITY]
    best = None
    best_d = math.inf
    for w in roots:
        d = abs(w - us[label])
        if d < best_d:
            best_d = d
            best = w
    if best is None or best_d > eta0:
        raise BranchCollision(f"branch {label} undefined at {x}")
    return best


def find_periodic_points(
    T: DiffOperator,
    n: int,
    max_len: int,
    count: int,
    tol: float = 1e-10,
    threads: int = 1,
    prebuilt: tuple[TnBuild, Certificate] | None = None,
) -> list[PeriodicOrbit]:
    """Attracting periodic orbits from breadth-first words of branch labels.

    Each word's composed branch map contracts the certified disks, so
    iterating it from the first fixed point converges to its unique fixed
    point.  Orbits whose cycles coincide (within 10 tol) with an earlier
    find are dropped; the search stops after `count` distinct orbits.
    Words hitting a branch collision are skipped.
    """
    build, cert = prebuilt if prebuilt is not None else certified_build(
        T, n, threads=threads)
    C = build.correspondence
    us = sorted(cert.fixed_points, key=lambda u: (u.real, u.imag))
    eta0 = cert.eta0
    d = C.d

    def solve_word(word: tuple[int, ...]):
        x = us[0]
        try:
            for _ in range(200):
                y = x
                for label in reversed(word):
                    y = _apply_branch(C, us, eta0, label, y)
                if abs(y - x) <= 0.1 * tol:
                    x = y
                    break
                x = y
            # cycle points and multiplier along the converged cycle
            cycle = [x]
            mult = complex(1.0)
            y = x
            for label in reversed(word):
                y_next = _apply_branch(C, us, eta0, label, y)
                mult *= C.branch_derivative(y, y_next)
                cycle.append(y_next)
                y = y_next
            residual = abs(cycle[-1] - x)
            return PeriodicOrbit(word, x, len(word), mult, residual,
                                 tuple(cycle[:-1]))
        except BranchCollision:
            return None

    found: list[PeriodicOrbit] = []
    for length in range(1, max_len + 1):
        words = list(itertools.product(range(d), repeat=length))
        results = pmap(solve_word, words, threads=threads)
        for orbit in results:
            if orbit is None or orbit.residual > tol:
                continue
            duplicate = False
            for kept in found:
                same = all(
                    min(abs(p - q) for q in kept.cycle) <= 10.0 * tol
                    for p in orbit.cycle
                ) and all(
                    min(abs(q - p) for p in orbit.cycle) <= 10.0 * tol
                    for q in kept.cycle
                )
                if same:
                    duplicate = True
                    break
            if not duplicate:
                found.append(orbit)
                if len(found) >= count:
                    return found
    return found
