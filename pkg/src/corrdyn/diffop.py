"""Linear differential operators T = sum_j Q_j(w) d^j/dw^j.

Classification (non-degenerate, exactly solvable), construction of the
degree-n correspondence defined by T[(w-z)^n] / (w-z)^(n-k) = 0 in its
falling-factorial normalized form, and the search for the smallest n whose
induced family passes the contraction certificate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .algebra import (
    NEG_INFINITY,
    BiPoly,
    UniPoly,
    falling_factorial,
    parse_w_poly,
    poly_roots,
    unipoly_to_text,
)
from .correspondence import Correspondence, FamilySpec, certify
from .errors import HypothesisViolation, NoEscape, OrderTooLarge, SimpleZeroViolation


@dataclass(frozen=True)
class DiffOperator:
    """Operator of order k >= 1 with polynomial coefficients Q_0 .. Q_k."""

    k: int
    Q: tuple[UniPoly, ...]

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("operator order must be >= 1")
        if len(self.Q) != self.k + 1:
            raise ValueError("need exactly k + 1 coefficient polynomials")
        if self.Q[self.k].is_zero:
            raise ValueError("Q_k must not be identically zero")

    def to_jsonable(self) -> dict:
        return {"k": self.k, "Q": [unipoly_to_text(q) for q in self.Q]}

    @classmethod
    def from_jsonable(cls, obj: dict) -> "DiffOperator":
        return cls(int(obj["k"]), tuple(parse_w_poly(t) for t in obj["Q"]))


_D_TERM = re.compile(r"^(?:(.*?)\*)?D(?:\^(\d+))?$")


def parse_operator(text: str) -> DiffOperator:
    """Parse an operator literal such as ``(w^2-1)*D^2 + D`` or ``w*D``.

    ``D^j`` denotes d^j/dw^j; a term without D is the order-zero part.
    """
    terms: list[tuple[str, int]] = []  # (poly text, sign)
    depth = 0
    current = []
    sign = 1
    pending_sign = 1

    def flush():
        nonlocal current, sign
        t = "".join(current).strip()
        if t:
            terms.append((t, sign))
        current = []

    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and ch in "+-" and "".join(current).strip():
            tail = "".join(current).rstrip()
            if not tail.endswith(("^", "*", "e", "E", "+", "-", "(")):
                flush()
                sign = 1 if ch == "+" else -1
                continue
        current.append(ch)
    flush()
    if not terms:
        raise ValueError(f"empty operator literal {text!r}")

    by_order: dict[int, UniPoly] = {}
    for t, sg in terms:
        m = _D_TERM.match(t.replace(" ", ""))
        if m:
            poly_txt, power = m.groups()
            j = int(power) if power else 1
            coeff = parse_w_poly(poly_txt) if poly_txt else UniPoly.one()
        else:
            j = 0
            coeff = parse_w_poly(t)
        if sg < 0:
            coeff = -coeff
        by_order[j] = by_order.get(j, UniPoly.zero()) + coeff
    k = max(by_order)
    if k < 1:
        raise ValueError("operator must contain a D term")
    Q = tuple(by_order.get(j, UniPoly.zero()) for j in range(k + 1))
    return DiffOperator(k, Q)


def _slack(T: DiffOperator) -> float:
    """max_j (deg Q_j - j); zero polynomials contribute -infinity."""
    return max(q.degree - j if not q.is_zero else NEG_INFINITY
               for j, q in enumerate(T.Q))


def is_nondegenerate(T: DiffOperator) -> bool:
    """True iff max_j (deg Q_j - j) is attained at j = k."""
    return _slack(T) == T.Q[T.k].degree - T.k


def is_exactly_solvable(T: DiffOperator) -> bool:
    """True iff max_j (deg Q_j - j) equals zero."""
    return _slack(T) == 0


@dataclass(frozen=True)
class TnBuild:
    """The degree-n correspondence induced by an operator.

    normalized is T[(w-z)^n] / ((n)_k (w-z)^(n-k)) expanded to monomials;
    family is its perturbative-family form when representable (None for
    operators whose shifted parts would violate deg P_j <= j), with the
    weight ratios computed exactly before a single rounding to float.
    """

    n: int
    correspondence: Correspondence
    normalized: BiPoly
    family: FamilySpec | None
    warnings: tuple[str, ...]


def build_Tn(T: DiffOperator, n: int) -> TnBuild:
    """Normalized correspondence of degree n: apply d^j/dw^j (w-z)^n = (n)_j (w-z)^(n-j).

    The quotient by (w-z)^(n-k) is exact, leaving Q_k(w) plus terms
    ((n)_j/(n)_k) (w-z)^(k-j) Q_j(w) for j < k.
    """
    if n < T.k:
        raise OrderTooLarge(f"need n >= k = {T.k}, got n = {n}")
    warnings: list[str] = []
    if not is_nondegenerate(T):
        warnings.append("operator is degenerate; invariant-set guarantees do not apply")
    k = T.k
    nk = falling_factorial(n, k)
    normalized = BiPoly.from_w_poly(T.Q[k])
    ratios: list[Fraction] = []
    wz = BiPoly(((0j, 1.0), (-1.0,)))  # w - z
    for j in range(k):
        ratio = Fraction(falling_factorial(n, j), nk)
        ratios.append(ratio)
        if T.Q[j].is_zero:
            continue
        term = BiPoly.from_w_poly(T.Q[j].scale(float(ratio))) * wz.pow(k - j)
        normalized = normalized + term

    family: FamilySpec | None = None
    d = T.Q[k].degree
    ok = d >= 1
    if ok:
        for j in range(k):
            if not T.Q[j].is_zero and T.Q[j].degree > d - k + j:
                ok = False  # slot d-k+j cannot hold Q_j
    if ok:
        parts = [UniPoly.zero()] * (d + 1)
        beta = [0j] * (d + 1)
        for j in range(k):
            s = d - k + j
            if s >= 0 and not T.Q[j].is_zero:
                parts[s] = T.Q[j]
                beta[s] = complex(float(ratios[j]))
        family = FamilySpec(T.Q[k], tuple(parts), tuple(beta))
    else:
        warnings.append("family form unavailable (shifted-part degree bound fails)")

    corr = Correspondence(normalized)
    return TnBuild(n, corr, normalized, family, tuple(warnings))


def _certified(T: DiffOperator, n: int, samples_per_disk: int, threads: int) -> bool:
    build = build_Tn(T, n)
    if build.family is None:
        return False
    if not build.correspondence.has_constant_lead():
        return False
    if build.correspondence.d != build.family.d:
        return False
    try:
        return certify(build.family, samples_per_disk=samples_per_disk,
                       threads=threads).passed
    except (SimpleZeroViolation, NoEscape, ValueError):
        return False


def hutchinson_threshold(
    T: DiffOperator,
    n_max: int = 2 ** 20,
    samples_per_disk: int = 256,
    threads: int = 1,
) -> int | None:
    """Smallest n <= n_max whose induced family passes the certificate.

    Doubling search from n = k, then bisection on the pass outcome
    (monotonicity in n is a heuristic, so the returned N is re-verified at
    N and N - 1).  Returns None when nothing passes up to n_max.  Raises
    HypothesisViolation when Q_k has a root cluster.
    """
    if not is_nondegenerate(T):
        raise HypothesisViolation("operator is degenerate")
    if T.Q[T.k].degree >= 1:
        rm = poly_roots(T.Q[T.k])
        if any(m > 1 for _, m in rm.entries):
            raise HypothesisViolation("Q_k has a root cluster")
    else:
        raise HypothesisViolation("Q_k is constant; the correspondence has no fibers")

    def passes(n: int) -> bool:
        return _certified(T, n, samples_per_disk, threads)

    n = T.k
    while n <= n_max and not passes(n):
        n = 2 * n if n > 0 else 1
    if n > n_max:
        return None
    lo = max(T.k, n // 2)  # lo failed (or is k)
    hi = n
    while lo < hi - 1:
        mid = (lo + hi) // 2
        if passes(mid):
            hi = mid
        else:
            lo = mid
    N = hi
    if N > T.k and passes(N - 1):
        N = N - 1  # monotonicity heuristic failed near the boundary
    if not passes(N):
        return None
    return N
