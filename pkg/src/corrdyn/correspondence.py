"""Holomorphic correspondences F: z -> w defined by an algebraic curve.

A Correspondence wraps the curve polynomial and supplies fibers F(z),
adjoint fibers, and analytic branch tracking.  build_family assembles the
perturbative family R0(w) + sum_j beta_j P_j(w) (w-z)^(d-j); escape_radius
finds a radius M beyond which every fiber point satisfies |w| < |z|/2; and
certify produces an empirical contraction certificate (pass/fail with
witnesses, never a claimed proof).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import algebra
from ._backend import kernels
from ._parallel import pmap
from .algebra import (
    INFINITY,
    BiPoly,
    Point,
    RootMultiset,
    ShiftedForm,
    UniPoly,
    from_shifted_basis,
    make_root_multiset,
    parse_w_poly,
    poly_roots,
    unipoly_to_text,
)
from .errors import (
    BranchCollision,
    CriticalFiber,
    DegenerateLine,
    NoEscape,
    NonConvergence,
    SimpleZeroViolation,
)

_DROP_TOL = 1e-14
_ESCAPE_CIRCLE_SAMPLES = 256
_MAX_DOUBLINGS = 40


class Correspondence:
    """Immutable correspondence defined by curve(z, w) = 0.

    d is the forward valence (degree in w); back_degree the degree in z.
    When the leading w-coefficient is a nonzero constant, every finite z
    has exactly d finite fiber points counted with multiplicity.
    """

    __slots__ = ("curve", "d", "back_degree", "lead_w", "_cols", "_pz", "_pw",
                 "cluster_tol")

    def __init__(self, curve: BiPoly, cluster_tol: float = algebra.DEFAULT_CLUSTER_TOL):
        if curve.is_zero:
            raise ValueError("curve must be nonzero")
        if curve.deg_w < 1:
            raise ValueError("curve must involve w")
        self.curve = curve
        self.d = int(curve.deg_w)
        self.back_degree = int(curve.deg_z) if curve.deg_z >= 0 else 0
        self.lead_w = curve.w_coeff_poly(self.d)
        self._cols = curve.w_columns()
        self._pz = curve.partial_z()
        self._pw = curve.partial_w()
        self.cluster_tol = cluster_tol

    @classmethod
    def from_text(cls, text: str) -> "Correspondence":
        return cls(algebra.parse_poly(text))

    def has_constant_lead(self) -> bool:
        return self.lead_w.degree == 0

    def on_curve_residual(self, z: complex, w: complex) -> float:
        scale = self.curve.eval_mag(abs(z), abs(w))
        return abs(self.curve.evaluate(z, w)) / (1.0 + scale)

    # -- fibers -------------------------------------------------------------

    def _fiber_points(self, z: complex) -> list[Point]:
        coeffs = kernels.fiber_coeffs(self._cols, complex(z))
        scale = max(abs(c) for c in coeffs)
        floor = 1e-15 * self.curve.max_coeff_mag() * max(1.0, abs(z)) ** self.back_degree
        if scale <= floor:
            raise DegenerateLine(f"curve vanishes identically on z={z}")
        e = self.d
        while e > 0 and abs(coeffs[e]) <= _DROP_TOL * scale:
            e -= 1
        points: list[Point] = [INFINITY] * (self.d - e)
        if e >= 1:
            finite = kernels.roots(coeffs[: e + 1])
            if finite is None:
                raise NonConvergence(f"fiber root iteration stalled at z={z}")
            points.extend(finite)
        return points

    def fiber(self, z: complex) -> RootMultiset:
        """Roots in w of curve(z, .); degree deficits become INFINITY atoms."""
        points = self._fiber_points(z)
        p = UniPoly(kernels.fiber_coeffs(self._cols, complex(z)))
        return make_root_multiset(points, residual_fn=p, cluster_tol=self.cluster_tol)

    def fiber_values(self, z: complex) -> list[Point]:
        """Fiber as a flat list (multiplicity by repetition), unclustered."""
        return self._fiber_points(z)

    def adjoint_fiber(self, w: complex) -> RootMultiset:
        """Roots in z of curve(., w); total multiplicity = back_degree."""
        rows = self.curve.rows
        coeffs = [kernels.horner(list(row), complex(w)) for row in rows]
        scale = max(abs(c) for c in coeffs)
        floor = 1e-15 * self.curve.max_coeff_mag() * max(1.0, abs(w)) ** self.d
        if scale <= floor:
            raise DegenerateLine(f"curve vanishes identically on w={w}")
        e = self.back_degree
        while e > 0 and abs(coeffs[e]) <= _DROP_TOL * scale:
            e -= 1
        points: list[Point] = [INFINITY] * (self.back_degree - e)
        if e >= 1:
            finite = kernels.roots(coeffs[: e + 1])
            if finite is None:
                raise NonConvergence(f"adjoint root iteration stalled at w={w}")
            points.extend(finite)
        p = UniPoly(coeffs)
        return make_root_multiset(points, residual_fn=p, cluster_tol=self.cluster_tol)

    # -- branches -----------------------------------------------------------

    def partials(self, z: complex, w: complex) -> tuple[complex, complex]:
        return self._pz.evaluate(z, w), self._pw.evaluate(z, w)

    def branch_derivative(self, z: complex, w: complex) -> complex:
        """Derivative of the local branch through the on-curve point (z, w)."""
        if self.on_curve_residual(z, w) > 1e-8:
            raise ValueError(f"({z}, {w}) is not on the curve")
        dzv, dwv = self.partials(z, w)
        wscale = self._pw.eval_mag(abs(z), abs(w))
        if abs(dwv) < 1e-12 * (1.0 + wscale):
            raise CriticalFiber(f"w-partial vanishes at ({z}, {w})")
        if dzv == 0j:
            return 0j
        return -dzv / dwv

    def branch_g(self, z: complex, w: complex) -> float:
        """|g| where the branch derivative equals 1 / (1 + g); inf if w' = 0."""
        dzv, dwv = self.partials(z, w)
        if dzv == 0j:
            return math.inf
        return abs((dwv + dzv) / (-dzv))

    def branch_point(self, z: complex, w: complex) -> "BranchPoint":
        return BranchPoint(complex(z), complex(w), self.branch_derivative(z, w))

    def branch_continue(
        self, start: "BranchPoint", z_target: complex, min_step: float = 1e-12
    ) -> "BranchPoint":
        """Follow the analytic branch from start.z to z_target along a segment.

        Euler predictor with the branch derivative, correction by nearest-root
        matching against the full fiber, adaptive step halving.  Raises
        BranchCollision when the step shrinks below min_step, which happens
        when two fiber roots approach within cluster_tol on the path.
        """
        z0 = complex(start.z)
        dz_total = complex(z_target) - z0
        if dz_total == 0j:
            return BranchPoint(z0, start.w, start.deriv)
        total_len = abs(dz_total)
        t = 0.0
        h = 1.0
        w = start.w
        deriv = start.deriv
        while t < 1.0:
            h = min(h, 1.0 - t)
            if h * total_len < min_step:
                raise BranchCollision(
                    f"fiber roots collide near z={z0 + t * dz_total}"
                )
            z_new = z0 + (t + h) * dz_total
            w_pred = w + deriv * (h * dz_total)
            accepted = False
            try:
                roots = [p for p in self._fiber_points(z_new) if p is not INFINITY]
            except (DegenerateLine, NonConvergence):
                roots = []
            if roots:
                dists = sorted(range(len(roots)), key=lambda i: abs(roots[i] - w_pred))
                r1 = roots[dists[0]]
                d1 = abs(r1 - w_pred)
                d2 = min(
                    (abs(roots[i] - r1) for i in range(len(roots)) if roots[i] is not r1
                     and i != dists[0]),
                    default=math.inf,
                )
                # clear winner and no root collision at the accepted point
                if d2 > self.cluster_tol and (d1 == 0.0 or d1 < 0.4 * max(d2, 1e-300)):
                    try:
                        new_deriv = self.branch_derivative(z_new, r1)
                        w = r1
                        deriv = new_deriv
                        t += h
                        h = min(2.0 * h, 1.0)
                        accepted = True
                    except CriticalFiber:
                        accepted = False
            if not accepted:
                h *= 0.5
        return BranchPoint(complex(z_target), w, deriv)


@dataclass(frozen=True)
class BranchPoint:
    """A point on the curve together with the local branch derivative."""

    z: complex
    w: complex
    deriv: complex


@dataclass(frozen=True)
class FamilySpec:
    """R0(w) + sum_j beta_j P_j(w) (w - z)^(d - j) with deg P_j <= j.

    R0 has degree d with simple zeros; parts holds P_0 .. P_d; beta holds
    the d + 1 perturbation weights.
    """

    R0: UniPoly
    parts: tuple[UniPoly, ...]
    beta: tuple[complex, ...]

    def __post_init__(self):
        d = self.R0.degree
        if not isinstance(d, int) or d < 1:
            raise ValueError("R0 must have degree >= 1")
        if len(self.parts) != d + 1 or len(self.beta) != d + 1:
            raise ValueError("parts and beta must have length d + 1")
        for j, p in enumerate(self.parts):
            if p.degree > j:
                raise ValueError(f"deg P_{j} = {p.degree} exceeds {j}")

    @property
    def d(self) -> int:
        return int(self.R0.degree)

    def S(self) -> UniPoly:
        """R0 + beta_d P_d: the z-independent part of the fiber polynomial."""
        return self.R0 + self.parts[self.d].scale(self.beta[self.d])

    def to_jsonable(self) -> dict:
        return {
            "R0": unipoly_to_text(self.R0),
            "P": [unipoly_to_text(p) for p in self.parts],
            "beta": [[b.real, b.imag] for b in self.beta],
        }

    @classmethod
    def from_jsonable(cls, obj: dict) -> "FamilySpec":
        parts = tuple(parse_w_poly(t) for t in obj["P"])
        beta = tuple(complex(b[0], b[1]) for b in obj["beta"])
        return cls(parse_w_poly(obj["R0"]), parts, beta)


def build_family(spec: FamilySpec) -> Correspondence:
    """Expand the family to monomials and wrap it as a Correspondence.

    The coefficient of w^d is necessarily constant in z; this is asserted,
    and a vanishing leading coefficient is rejected.
    """
    d = spec.d
    scaled = tuple(p.scale(b) for p, b in zip(spec.parts, spec.beta))
    curve = from_shifted_basis(ShiftedForm(d, scaled)) + BiPoly.from_w_poly(spec.R0)
    lead = curve.w_coeff_poly(d)
    if lead.is_zero or curve.deg_w < d:
        raise ValueError("leading w-coefficient vanishes; family is degenerate")
    if lead.degree != 0:
        raise AssertionError("leading w-coefficient must be constant in z")
    return Correspondence(curve)


@dataclass(frozen=True)
class EscapeResult:
    """Escape radius M and how it was established ('bound' or 'sampled')."""

    M: float
    method: str

    def __float__(self) -> float:
        return self.M


def _cauchy_radius(p: UniPoly) -> float:
    coeffs = p.coeffs
    lead = abs(coeffs[-1])
    worst = 0.0
    for c in coeffs[:-1]:
        worst = max(worst, abs(c) / lead)
    return 1.0 + worst


def _escape_bound_holds(spec: FamilySpec, M: float) -> bool:
    """Sufficient condition: no fiber root with |w| >= |z|/2 for |z| >= M.

    For such roots |w - z| <= 3|w| and |w| >= M/2, so comparing the leading
    behaviour of S against the perturbation majorants at radius r = M/2
    rules them out when the inequality below holds.
    """
    S = spec.S()
    d = spec.d
    if S.degree != d:
        return False
    r = M / 2.0
    a = [abs(c) for c in S.coeffs]
    s_lower = a[d]
    for k in range(d):
        s_lower -= a[k] * r ** (k - d)
    rhs = 0.0
    for j in range(d):
        pj = spec.parts[j]
        if pj.is_zero or spec.beta[j] == 0:
            continue
        pj_bound = sum(abs(c) * r ** (i - j) for i, c in enumerate(pj.coeffs))
        rhs += abs(spec.beta[j]) * (3.0 ** (d - j)) * pj_bound
    return s_lower > rhs


def _escape_sampled_holds(C: Correspondence, M: float) -> bool:
    for t in range(4):
        radius = M * (2.0 ** t)
        if not _circle_escape_ok(C, radius):
            return False
    return True


def _circle_escape_ok(C: Correspondence, radius: float) -> bool:
    for k in range(_ESCAPE_CIRCLE_SAMPLES):
        theta = 6.283185307179586 * k / _ESCAPE_CIRCLE_SAMPLES
        z = complex(radius * math.cos(theta), radius * math.sin(theta))
        try:
            for w in C.fiber_values(z):
                if w is INFINITY or abs(w) >= radius / 2.0:
                    return False
        except (DegenerateLine, NonConvergence):
            return False
    return True


def escape_radius(spec: FamilySpec) -> EscapeResult:
    """Smallest M in the doubling sequence with a verified escape property.

    The analytic sufficient bound is tried first at each M; failing that, a
    sampled verification over the circles |z| = M 2^t, t = 0..3 (256 points
    each).  Raises NoEscape when no M up to 2^40 M0 passes, which signals
    that the perturbation weights are too large.
    """
    C = build_family(spec)
    M0 = 2.0 * (1.0 + _cauchy_radius(spec.S()))
    for t in range(_MAX_DOUBLINGS + 1):
        M = M0 * (2.0 ** t)
        if _escape_bound_holds(spec, M):
            return EscapeResult(M, "bound")
        if _escape_sampled_holds(C, M):
            return EscapeResult(M, "sampled")
    raise NoEscape(f"no escape radius up to 2^{_MAX_DOUBLINGS} * {M0}")


@dataclass(frozen=True)
class Witness:
    """A sampled point violating one of the certified conditions."""

    kind: str
    z: complex
    w: complex | None
    value: float

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "z": [self.z.real, self.z.imag],
            "w": None if self.w is None else [self.w.real, self.w.imag],
            "value": self.value,
        }


@dataclass(frozen=True)
class Certificate:
    """Empirical contraction certificate for a perturbative family.

    passed requires: every sampled fiber over D(0, M) inside the eta0-disks
    around the zeros of S, the sampled branch-derivative sup below 1/2, the
    sampled |g| infimum above 3, and the escape check on |z| in {M, 2M, 4M}.
    """

    M: float
    eta0: float
    fixed_points: tuple[complex, ...]
    sup_deriv: float
    g_lower: float
    passed: bool
    witnesses: tuple[Witness, ...]
    n_violations: int
    escape_method: str
    grid_pitch: float
    n_samples: int

    def to_jsonable(self) -> dict:
        return {
            "M": self.M,
            "eta0": self.eta0,
            "fixed_points": [[u.real, u.imag] for u in self.fixed_points],
            "sup_deriv": self.sup_deriv,
            "g_lower": self.g_lower,
            "pass": self.passed,
            "n_violations": self.n_violations,
            "escape_method": self.escape_method,
            "grid_pitch": self.grid_pitch,
            "n_samples": self.n_samples,
            "witnesses": [w.to_jsonable() for w in self.witnesses],
        }


_WITNESS_CAP = 64
_GRID_POINT_CAP = 250_000


def _sample_points(M: float, pitch: float, us, eta0: float, per_circle: int):
    """Grid over D(0, M) plus the boundary circles, in a fixed order."""
    pts: list[complex] = []
    n = int(2.0 * M / pitch) + 1
    for iy in range(n):
        y = -M + (iy + 0.5) * pitch
        for ix in range(n):
            x = -M + (ix + 0.5) * pitch
            if x * x + y * y <= M * M:
                pts.append(complex(x, y))
    for k in range(per_circle):
        theta = 6.283185307179586 * k / per_circle
        pts.append(complex(M * math.cos(theta), M * math.sin(theta)))
    for u in us:
        for k in range(per_circle):
            theta = 6.283185307179586 * k / per_circle
            pts.append(u + complex(eta0 * math.cos(theta), eta0 * math.sin(theta)))
    return pts


def certify(
    spec: FamilySpec,
    samples_per_disk: int = 256,
    grid_pitch: float | None = None,
    threads: int = 1,
) -> Certificate:
    """Sample-based verification of the contraction hypotheses.

    Computes the zeros u_l of S, sets eta0 to one third of their minimal
    pairwise distance, enlarges the escape radius M to contain the disks
    D(u_l, eta0), then checks fiber containment, branch-derivative and |g|
    bounds over a grid on D(0, M) (pitch eta0/8 by default) plus the disk
    boundaries, and re-samples the escape property on |z| in {M, 2M, 4M}.
    """
    d = spec.d
    S = spec.S()
    if S.degree != d:
        raise SimpleZeroViolation("leading coefficient of S vanishes")
    rm = poly_roots(S)
    if any(m > 1 for _, m in rm.entries):
        raise SimpleZeroViolation("S has a root cluster")
    us = [v for v, _ in rm.finite_entries()]
    us.sort(key=lambda u: (u.real, u.imag))
    if d >= 2:
        min_dist = min(
            abs(us[i] - us[j]) for i in range(d) for j in range(i + 1, d)
        )
        if min_dist <= 10.0 * algebra.DEFAULT_CLUSTER_TOL:
            raise SimpleZeroViolation(f"zeros of S are only {min_dist} apart")
        eta0 = min_dist / 3.0
    else:
        eta0 = (1.0 + abs(us[0])) / 3.0

    esc = escape_radius(spec)
    M = max(esc.M, max(abs(u) + eta0 for u in us))
    C = build_family(spec)

    pitch = grid_pitch if grid_pitch is not None else eta0 / 8.0
    if (2.0 * M / pitch) ** 2 > _GRID_POINT_CAP:
        pitch = 2.0 * M / math.sqrt(_GRID_POINT_CAP)
    samples = _sample_points(M, pitch, us, eta0, samples_per_disk)

    def probe(z: complex):
        sup_d = 0.0
        low_g = math.inf
        wit: list[Witness] = []
        try:
            roots = [w for w in C.fiber_values(z) if w is not INFINITY]
            if len(roots) < C.d:
                wit.append(Witness("containment", z, None, math.inf))
        except (DegenerateLine, NonConvergence):
            return 0.0, math.inf, [Witness("containment", z, None, math.inf)]
        for w in roots:
            dist = min(abs(w - u) for u in us)
            if dist > eta0:
                wit.append(Witness("containment", z, w, dist))
            try:
                dv = abs(C.branch_derivative(z, w))
            except CriticalFiber:
                wit.append(Witness("critical", z, w, 0.0))
                continue
            except ValueError:
                continue
            sup_d = max(sup_d, dv)
            if dv >= 0.5:
                wit.append(Witness("derivative", z, w, dv))
            g = C.branch_g(z, w)
            low_g = min(low_g, g)
            if g <= 3.0:
                wit.append(Witness("g_bound", z, w, g))
        return sup_d, low_g, wit

    results = pmap(probe, samples, threads=threads)
    sup_deriv = 0.0
    g_lower = math.inf
    witnesses: list[Witness] = []
    n_violations = 0
    for sup_d, low_g, wit in results:
        sup_deriv = max(sup_deriv, sup_d)
        g_lower = min(g_lower, low_g)
        n_violations += len(wit)
        if len(witnesses) < _WITNESS_CAP:
            witnesses.extend(wit[: _WITNESS_CAP - len(witnesses)])

    for mult in (1.0, 2.0, 4.0):
        radius = mult * M
        if not _circle_escape_ok(C, radius):
            n_violations += 1
            if len(witnesses) < _WITNESS_CAP:
                witnesses.append(Witness("escape", complex(radius, 0.0), None, radius))

    passed = (
        sup_deriv < 0.5
        and g_lower > 3.0
        and not any(w.kind in ("containment", "escape", "critical") for w in witnesses)
        and n_violations == 0
    )
    return Certificate(
        M=M,
        eta0=eta0,
        fixed_points=tuple(us),
        sup_deriv=sup_deriv,
        g_lower=g_lower,
        passed=passed,
        witnesses=tuple(witnesses),
        n_violations=n_violations,
        escape_method=esc.method,
        grid_pitch=pitch,
        n_samples=len(samples),
    )
