"""Complex polynomial arithmetic, root finding, and the shifted basis.

Dense univariate (UniPoly) and bivariate (BiPoly) polynomials over the
complex numbers, simultaneous root finding with multiplicity clustering,
falling factorials, the conversion between the monomial basis and the
(w - z)-shifted basis, and the plain-text polynomial grammar used by the
CLI and config files.

Conventions: coefficients ascending; the zero polynomial has degree
NEG_INFINITY (a distinct sentinel, never -1).  The point at infinity is the
tagged singleton INFINITY, never a large float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

from ._backend import kernels
from .errors import DegreeTooHigh, NonConvergence

NEG_INFINITY = float("-inf")

DEFAULT_CLUSTER_TOL = 1e-7


class _Infinity:
    """The point at infinity on the Riemann sphere (tagged singleton)."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "INFINITY"


INFINITY = _Infinity()

Point = Union[complex, _Infinity]


def is_infinite(x: Point) -> bool:
    return x is INFINITY


def point_sort_key(x: Point):
    """Lexicographic (re, im) order on finite points; INFINITY sorts last."""
    if x is INFINITY:
        return (1, 0.0, 0.0)
    return (0, x.real, x.imag)


def falling_factorial(n: int, j: int) -> int:
    """n (n-1) ... (n-j+1), exact; (n)_0 == 1."""
    if j < 0 or j > n:
        raise ValueError(f"falling_factorial requires 0 <= j <= n, got ({n}, {j})")
    return math.perm(n, j)


def _trim(coeffs) -> tuple[complex, ...]:
    i = len(coeffs)
    while i > 0 and coeffs[i - 1] == 0:
        i -= 1
    return tuple(complex(c) for c in coeffs[:i])


class UniPoly:
    """Dense univariate polynomial over C, coefficients ascending."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        self.coeffs: tuple[complex, ...] = _trim(coeffs)

    @classmethod
    def zero(cls) -> "UniPoly":
        return cls(())

    @classmethod
    def one(cls) -> "UniPoly":
        return cls((1.0,))

    @classmethod
    def monomial(cls, degree: int, coeff: complex = 1.0) -> "UniPoly":
        return cls((0.0,) * degree + (coeff,))

    @classmethod
    def from_roots(cls, roots) -> "UniPoly":
        p = cls.one()
        for r in roots:
            p = p * cls((-complex(r), 1.0))
        return p

    @property
    def degree(self) -> float:
        """Index of the last nonzero coefficient; NEG_INFINITY when zero."""
        return len(self.coeffs) - 1 if self.coeffs else NEG_INFINITY

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int) -> complex:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0j

    def __call__(self, z: complex) -> complex:
        return kernels.horner(list(self.coeffs), complex(z))

    def __add__(self, other: "UniPoly") -> "UniPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly([self.coeff(i) + other.coeff(i) for i in range(n)])

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly([self.coeff(i) - other.coeff(i) for i in range(n)])

    def __neg__(self) -> "UniPoly":
        return UniPoly([-c for c in self.coeffs])

    def __mul__(self, other: "UniPoly") -> "UniPoly":
        if self.is_zero or other.is_zero:
            return UniPoly.zero()
        out = [0j] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPoly(out)

    def scale(self, s: complex) -> "UniPoly":
        return UniPoly([c * s for c in self.coeffs])

    def derivative(self) -> "UniPoly":
        return UniPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def max_coeff_mag(self) -> float:
        return max((abs(c) for c in self.coeffs), default=0.0)

    def __eq__(self, other) -> bool:
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"UniPoly({to_text(BiPoly.from_w_poly(self))!r})"


class BiPoly:
    """Dense bivariate polynomial; rows[i][j] is the coefficient of z^i w^j."""

    __slots__ = ("rows",)

    def __init__(self, rows=()):
        width = 0
        cleaned = []
        for row in rows:
            cleaned.append([complex(c) for c in row])
            width = max(width, len(row))
        for row in cleaned:
            row.extend([0j] * (width - len(row)))
        # trim all-zero trailing rows and columns
        while cleaned and all(c == 0j for c in cleaned[-1]):
            cleaned.pop()
        if cleaned:
            while width > 0 and all(row[width - 1] == 0j for row in cleaned):
                width -= 1
            cleaned = [row[:width] for row in cleaned]
        self.rows: tuple[tuple[complex, ...], ...] = tuple(tuple(r) for r in cleaned)

    @classmethod
    def zero(cls) -> "BiPoly":
        return cls(())

    @classmethod
    def constant(cls, c: complex) -> "BiPoly":
        return cls(((complex(c),),)) if c != 0 else cls.zero()

    @classmethod
    def from_w_poly(cls, p: UniPoly) -> "BiPoly":
        return cls((p.coeffs,)) if not p.is_zero else cls.zero()

    @classmethod
    def from_z_poly(cls, p: UniPoly) -> "BiPoly":
        return cls(tuple((c,) for c in p.coeffs)) if not p.is_zero else cls.zero()

    @property
    def is_zero(self) -> bool:
        return not self.rows

    @property
    def deg_z(self) -> float:
        return len(self.rows) - 1 if self.rows else NEG_INFINITY

    @property
    def deg_w(self) -> float:
        return len(self.rows[0]) - 1 if self.rows else NEG_INFINITY

    @property
    def total_degree(self) -> float:
        best = NEG_INFINITY
        for i, row in enumerate(self.rows):
            for j, c in enumerate(row):
                if c != 0j and i + j > best:
                    best = i + j
        return best

    def coeff(self, i: int, j: int) -> complex:
        if 0 <= i < len(self.rows) and 0 <= j < len(self.rows[i]):
            return self.rows[i][j]
        return 0j

    def __add__(self, other: "BiPoly") -> "BiPoly":
        nz = max(len(self.rows), len(other.rows))
        nw = max(len(self.rows[0]) if self.rows else 0,
                 len(other.rows[0]) if other.rows else 0)
        return BiPoly(
            [[self.coeff(i, j) + other.coeff(i, j) for j in range(nw)] for i in range(nz)]
        )

    def __sub__(self, other: "BiPoly") -> "BiPoly":
        return self + (-other)

    def __neg__(self) -> "BiPoly":
        return BiPoly([[-c for c in row] for row in self.rows])

    def __mul__(self, other: "BiPoly") -> "BiPoly":
        if self.is_zero or other.is_zero:
            return BiPoly.zero()
        nz = len(self.rows) + len(other.rows) - 1
        nw = len(self.rows[0]) + len(other.rows[0]) - 1
        out = [[0j] * nw for _ in range(nz)]
        for i, row in enumerate(self.rows):
            for j, a in enumerate(row):
                if a == 0j:
                    continue
                for k, orow in enumerate(other.rows):
                    for l, b in enumerate(orow):
                        if b != 0j:
                            out[i + k][j + l] += a * b
        return BiPoly(out)

    def scale(self, s: complex) -> "BiPoly":
        return BiPoly([[c * s for c in row] for row in self.rows])

    def pow(self, n: int) -> "BiPoly":
        if n < 0:
            raise ValueError("negative power")
        result = BiPoly.constant(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def evaluate(self, z: complex, w: complex) -> complex:
        acc = 0j
        for row in reversed(self.rows):
            acc = acc * z + kernels.horner(list(row), complex(w))
        return acc

    def eval_mag(self, rz: float, rw: float) -> float:
        """sum |c_ij| rz^i rw^j; scale majorant for residual thresholds."""
        acc = 0.0
        for row in reversed(self.rows):
            acc = acc * rz + kernels.horner_mag(list(row), rw)
        return acc

    def w_poly_at(self, z: complex) -> UniPoly:
        """Coefficients in w of curve(z, .)."""
        if self.is_zero:
            return UniPoly.zero()
        cols = self.w_columns()
        return UniPoly(kernels.fiber_coeffs(cols, complex(z)))

    def z_poly_at(self, w: complex) -> UniPoly:
        """Coefficients in z of curve(., w)."""
        return UniPoly([kernels.horner(list(row), complex(w)) for row in self.rows])

    def w_columns(self) -> list[list[complex]]:
        """Column-major layout: for each w-power j, the z-poly coefficients."""
        if self.is_zero:
            return []
        nw = len(self.rows[0])
        return [[row[j] for row in self.rows] for j in range(nw)]

    def w_coeff_poly(self, j: int) -> UniPoly:
        """Coefficient of w^j as a polynomial in z."""
        return UniPoly([self.coeff(i, j) for i in range(len(self.rows))])

    def partial_z(self) -> "BiPoly":
        return BiPoly([[i * c for c in row] for i, row in enumerate(self.rows)][1:])

    def partial_w(self) -> "BiPoly":
        return BiPoly([[j * row[j] for j in range(1, len(row))] for row in self.rows])

    def swap_vars(self) -> "BiPoly":
        """Exchange the roles of z and w (matrix transpose)."""
        if self.is_zero:
            return self
        nw = len(self.rows[0])
        return BiPoly([[row[j] for row in self.rows] for j in range(nw)])

    def max_coeff_mag(self) -> float:
        return max((abs(c) for row in self.rows for c in row), default=0.0)

    def __eq__(self, other) -> bool:
        return isinstance(other, BiPoly) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self) -> str:
        return f"BiPoly({to_text(self)!r})"


@dataclass(frozen=True)
class ShiftedForm:
    """P(z,w) = sum_j parts[j](w) * (w - z)^(d - j) with deg parts[j] <= j."""

    d: int
    parts: tuple[UniPoly, ...]

    def __post_init__(self):
        if len(self.parts) != self.d + 1:
            raise ValueError("need exactly d + 1 parts")
        for j, p in enumerate(self.parts):
            if p.degree > j:
                raise ValueError(f"part {j} has degree {p.degree} > {j}")


def _binomials(n: int) -> list[list[int]]:
    rows = [[1]]
    for i in range(n):
        prev = rows[-1]
        rows.append([1] + [prev[k] + prev[k + 1] for k in range(len(prev) - 1)] + [1])
    return rows


def to_shifted_basis(P: BiPoly, d: int) -> ShiftedForm:
    """Unique shifted-basis decomposition of a total-degree <= d polynomial.

    Computed by the substitution z = w - t: collecting powers of t in
    P(w - t, w) yields parts[j] as the coefficient of t^(d-j).  This is the
    generative form of the triangular solve matching z-powers from z^d
    down; the decomposition is unique, so the results coincide.  Every
    output coefficient is an integer combination of input coefficients,
    accumulated exactly in rational arithmetic and rounded once.
    """
    if P.total_degree > d:
        raise DegreeTooHigh(f"total degree {P.total_degree} exceeds d={d}")
    # acc[l][m]: coefficient of t^l w^m as exact (re, im) rationals
    acc = [[None] * (d + 1) for _ in range(d + 1)]
    binom = _binomials(d)
    for i, row in enumerate(P.rows):
        for j, c in enumerate(row):
            if c == 0j:
                continue
            cre, cim = Fraction(c.real), Fraction(c.imag)
            # z^i w^j = (w - t)^i w^j = sum_l C(i,l) (-1)^l t^l w^(i-l+j)
            for l in range(i + 1):
                b = -binom[i][l] if l & 1 else binom[i][l]
                slot = acc[l][i - l + j]
                if slot is None:
                    acc[l][i - l + j] = [cre * b, cim * b]
                else:
                    slot[0] += cre * b
                    slot[1] += cim * b
    parts = []
    for j in range(d + 1):
        coeffs = [
            complex(float(s[0]), float(s[1])) if s is not None else 0j
            for s in acc[d - j]
        ]
        parts.append(UniPoly(coeffs))
    return ShiftedForm(d, tuple(parts))


def from_shifted_basis(S: ShiftedForm) -> BiPoly:
    """Expand sum_j parts[j](w) (w - z)^(d - j) into the monomial basis.

    Exact rational accumulation, mirrored with to_shifted_basis so the
    round trip reproduces coefficients to one rounding.
    """
    d = S.d
    binom = _binomials(d)
    rows = [[None] * (d + 1) for _ in range(d + 1)]
    for j, p in enumerate(S.parts):
        e = d - j
        for i, c in enumerate(p.coeffs):
            if c == 0j:
                continue
            cre, cim = Fraction(c.real), Fraction(c.imag)
            # c w^i (w - z)^e = sum_l C(e,l) (-1)^l c z^l w^(i+e-l)
            for l in range(e + 1):
                b = -binom[e][l] if l & 1 else binom[e][l]
                slot = rows[l][i + e - l]
                if slot is None:
                    rows[l][i + e - l] = [cre * b, cim * b]
                else:
                    slot[0] += cre * b
                    slot[1] += cim * b
    return BiPoly(
        [
            [complex(float(s[0]), float(s[1])) if s is not None else 0j for s in row]
            for row in rows
        ]
    )


@dataclass(frozen=True)
class RootMultiset:
    """Roots with multiplicities; INFINITY entries tag degree deficits.

    entries: ((value, multiplicity), ...) sorted by (re, im), INFINITY last.
    residual: max |p(value)| over finite entries.
    """

    entries: tuple[tuple[Point, int], ...]
    residual: float

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.entries)

    def values(self) -> Iterator[Point]:
        """Each root repeated by multiplicity."""
        for v, m in self.entries:
            for _ in range(m):
                yield v

    def finite_entries(self) -> list[tuple[complex, int]]:
        return [(v, m) for v, m in self.entries if v is not INFINITY]

    def infinite_multiplicity(self) -> int:
        return sum(m for v, m in self.entries if v is INFINITY)


def _cluster_points(points: list[Point], tol: float) -> list[tuple[Point, int]]:
    """Single-linkage clustering; representatives are cluster means."""
    finite = [p for p in points if p is not INFINITY]
    inf_count = len(points) - len(finite)
    n = len(finite)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(finite[i] - finite[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[complex]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(finite[i])
    out: list[tuple[Point, int]] = []
    for members in groups.values():
        mean = sum(members) / len(members)
        out.append((mean, len(members)))
    out.sort(key=lambda e: point_sort_key(e[0]))
    if inf_count:
        out.append((INFINITY, inf_count))
    return out


def make_root_multiset(
    points: list[Point], residual_fn=None, cluster_tol: float = DEFAULT_CLUSTER_TOL
) -> RootMultiset:
    entries = _cluster_points(points, cluster_tol)
    residual = 0.0
    if residual_fn is not None:
        for v, _ in entries:
            if v is not INFINITY:
                residual = max(residual, abs(residual_fn(v)))
    return RootMultiset(tuple(entries), residual)


def poly_eval(p: UniPoly, z: complex) -> complex:
    """Horner evaluation of p at z."""
    return p(z)


def poly_roots(p: UniPoly, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> RootMultiset:
    """All deg(p) roots with multiplicities from post-hoc clustering.

    Tuned for the low degrees this library produces (reliable to degree
    about 50; accuracy degrades beyond).  Raises NonConvergence when the
    simultaneous iteration exhausts its budget (ill-conditioned input;
    retry with a perturbed polynomial).
    """
    if p.degree < 1:
        raise ValueError("poly_roots requires degree >= 1")
    raw = kernels.roots(list(p.coeffs))
    if raw is None:
        raise NonConvergence(f"root iteration stalled on degree {p.degree}")
    return make_root_multiset(list(raw), residual_fn=p, cluster_tol=cluster_tol)


# ---------------------------------------------------------------------------
# Polynomial literal grammar: w^2 - 1, (w - z)^2 + 0.5*z*w, 3+2i, 1.5e-3*w
# ---------------------------------------------------------------------------

_W = BiPoly(((0j, 1.0),))
_Z = BiPoly(((0j,), (1.0,)))


class _PolyParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise ValueError(f"bad polynomial {self.text!r} at {self.pos}: {msg}")

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        c = self.peek()
        self.pos += 1
        return c

    def parse(self) -> BiPoly:
        v = self.expr()
        if self.peek():
            self.error("trailing input")
        return v

    def expr(self) -> BiPoly:
        v = self.term()
        while True:
            c = self.peek()
            if c == "+":
                self.pos += 1
                v = v + self.term()
            elif c == "-":
                self.pos += 1
                v = v - self.term()
            else:
                return v

    def term(self) -> BiPoly:
        v = self.unary()
        while True:
            c = self.peek()
            if c == "*":
                self.pos += 1
                v = v * self.unary()
            elif c == "/":
                self.pos += 1
                div = self.unary()
                if div.deg_z > 0 or div.deg_w > 0 or div.is_zero:
                    self.error("division only by a nonzero constant")
                v = v.scale(1.0 / div.coeff(0, 0))
            else:
                return v

    def unary(self) -> BiPoly:
        c = self.peek()
        if c == "-":
            self.pos += 1
            return -self.unary()
        if c == "+":
            self.pos += 1
            return self.unary()
        return self.power()

    def power(self) -> BiPoly:
        base = self.atom()
        while self.peek() == "^":
            self.pos += 1
            self.skip_ws()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                self.error("expected integer exponent")
            base = base.pow(int(self.text[start : self.pos]))
        return base

    def atom(self) -> BiPoly:
        c = self.peek()
        if c == "(":
            self.pos += 1
            v = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return v
        if c == "w":
            self.pos += 1
            return _W
        if c == "z":
            self.pos += 1
            return _Z
        if c in ("i", "j"):
            self.pos += 1
            return BiPoly.constant(1j)
        if c.isdigit() or c == ".":
            return self.number()
        self.error(f"unexpected character {c!r}")

    def number(self) -> BiPoly:
        self.skip_ws()
        start = self.pos
        text = self.text
        n = len(text)
        while self.pos < n and (text[self.pos].isdigit() or text[self.pos] == "."):
            self.pos += 1
        if self.pos < n and text[self.pos] in "eE":
            save = self.pos
            self.pos += 1
            if self.pos < n and text[self.pos] in "+-":
                self.pos += 1
            if self.pos < n and text[self.pos].isdigit():
                while self.pos < n and text[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = save
        value = float(text[start : self.pos])
        if self.pos < n and text[self.pos] in ("i", "j"):
            self.pos += 1
            return BiPoly.constant(complex(0.0, value))
        return BiPoly.constant(value)


def parse_poly(text: str) -> BiPoly:
    """Parse a polynomial literal in the variables w and z."""
    return _PolyParser(text).parse()


def parse_w_poly(text: str) -> UniPoly:
    """Parse a literal that must use only the variable w."""
    b = parse_poly(text)
    if b.deg_z > 0:
        raise ValueError(f"{text!r} must not involve z")
    return b.w_poly_at(0.0) if not b.is_zero else UniPoly.zero()


def _fmt_real(x: float) -> str:
    s = format(x, ".17g")
    return s


def _fmt_coeff(c: complex) -> str:
    if c.imag == 0.0:
        return _fmt_real(c.real)
    if c.real == 0.0:
        return f"{_fmt_real(c.imag)}i"
    sign = "+" if c.imag >= 0 else "-"
    return f"({_fmt_real(c.real)}{sign}{_fmt_real(abs(c.imag))}i)"


def _fmt_monomial(c: complex, i: int, j: int) -> str:
    parts = []
    if c != 1.0 or (i == 0 and j == 0):
        parts.append(_fmt_coeff(c))
    if i == 1:
        parts.append("z")
    elif i > 1:
        parts.append(f"z^{i}")
    if j == 1:
        parts.append("w")
    elif j > 1:
        parts.append(f"w^{j}")
    return "*".join(parts)


def to_text(p: BiPoly) -> str:
    """Render a polynomial in the literal grammar (parse round-trips)."""
    if p.is_zero:
        return "0"
    terms = []
    for i, row in enumerate(p.rows):
        for j, c in enumerate(row):
            if c != 0j:
                terms.append(_fmt_monomial(c, i, j))
    return " + ".join(terms)


def unipoly_to_text(p: UniPoly, var: str = "w") -> str:
    b = BiPoly.from_w_poly(p)
    text = to_text(b)
    return text if var == "w" else text.replace("w", var)
