"""Numeric kernels: Horner evaluation and simultaneous root finding.

Pure-Python reference backend.  The compiled twin (_kernels_cy.pyx) follows
the same operation order, routes complex division and square roots through
the same explicit formulas, and is compiled with FP contraction disabled, so
the two backends produce bit-identical results.

Root finder: Aberth-Ehrlich simultaneous iteration, sequential updates,
initial guesses on a perturbed circle of Cauchy-bound radius.  Convergence:
every correction below 1e-14 * (1 + |root|), or the residual below the
Horner rounding floor (multiple roots stall above the correction threshold
in double precision, so the residual floor is required for termination).
Degrees one and two use closed forms.
"""

from __future__ import annotations

import math

BACKEND_NAME = "python"

_EPS = 2.0 ** -53
_CONV_TOL = 1e-14
_MAX_ITERS = 200


def _cdiv(a: complex, b: complex) -> complex:
    """Complex division via Smith's scaling (same formula as CPython's '/')."""
    ar, ai = a.real, a.imag
    br, bi = b.real, b.imag
    if abs(br) >= abs(bi):
        r = bi / br
        den = br + bi * r
        return complex((ar + ai * r) / den, (ai - ar * r) / den)
    r = br / bi
    den = bi + br * r
    return complex((ar * r + ai) / den, (ai * r - ar) / den)


def _csqrt(z: complex) -> complex:
    """Principal complex square root from real sqrt/hypot only."""
    zr, zi = z.real, z.imag
    if zr == 0.0 and zi == 0.0:
        return 0j
    m = math.hypot(zr, zi)
    if zr >= 0.0:
        re = math.sqrt(0.5 * (m + zr))
        return complex(re, zi / (2.0 * re))
    t = math.sqrt(0.5 * (m - zr))
    if zi >= 0.0:
        return complex(zi / (2.0 * t), t)
    return complex(-zi / (2.0 * t), -t)


def horner(coeffs: list[complex], x: complex) -> complex:
    """Evaluate sum(coeffs[i] * x**i) by Horner's rule."""
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def horner_mag(coeffs: list[complex], r: float) -> float:
    """Evaluate sum(|coeffs[i]| * r**i); majorant used for error floors."""
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * r + abs(c)
    return acc


def residual_floor(coeffs: list[complex], x: complex) -> float:
    """Attainable accuracy of Horner evaluation at x in double precision."""
    n = len(coeffs)
    return 4.0 * n * _EPS * horner_mag(coeffs, abs(x))


def _roots_deg1(coeffs: list[complex]) -> list[complex]:
    return [-_cdiv(coeffs[0], coeffs[1])]


def _roots_deg2(coeffs: list[complex]) -> list[complex]:
    # c + b x + a x^2; stable formula pairing -b with the same-signed sqrt
    c, b, a = coeffs
    s = _csqrt(b * b - 4.0 * a * c)
    if b.real * s.real + b.imag * s.imag >= 0.0:
        q = -0.5 * (b + s)
    else:
        q = -0.5 * (b - s)
    if q == 0j:
        # b == s == 0, so c == 0 (handled by zero stripping); degenerate guard
        return [0j, 0j]
    return [_cdiv(q, a), _cdiv(c, q)]


def _roots_aberth(coeffs: list[complex]) -> list[complex] | None:
    n = len(coeffs) - 1
    deriv = [coeffs[i] * i for i in range(1, n + 1)]
    lead = abs(coeffs[n])
    radius = 0.0
    for i in range(n):
        m = abs(coeffs[i]) / lead
        if m > radius:
            radius = m
    radius = 1.0 + radius
    xs = []
    for k in range(n):
        theta = 6.283185307179586 * (k + 0.25) / n + 0.5
        xs.append(complex(radius * math.cos(theta), radius * math.sin(theta)))
    for _ in range(_MAX_ITERS):
        all_done = True
        for k in range(n):
            xk = xs[k]
            p = horner(coeffs, xk)
            if p == 0j:
                continue
            dp = horner(deriv, xk)
            if dp == 0j:
                # exact critical point: deterministic kick off the point
                xs[k] = xk + complex(1e-8 * (1.0 + abs(xk)), 1e-8)
                all_done = False
                continue
            ratio = _cdiv(p, dp)
            s = 0j
            collide = False
            for j in range(n):
                if j == k:
                    continue
                diff = xk - xs[j]
                if diff == 0j:
                    collide = True
                    break
                s += _cdiv(complex(1.0, 0.0), diff)
            if collide:
                xs[k] = xk + complex(1e-8 * (1.0 + abs(xk)), -1e-8)
                all_done = False
                continue
            den = complex(1.0, 0.0) - ratio * s
            corr = ratio if den == 0j else _cdiv(ratio, den)
            xk = xk - corr
            xs[k] = xk
            if abs(corr) >= _CONV_TOL * (1.0 + abs(xk)):
                if abs(p) > residual_floor(coeffs, xk):
                    all_done = False
        if all_done:
            return xs
    return None


def roots(coeffs: list[complex]) -> list[complex] | None:
    """All roots of a dense polynomial, multiplicity as repetition.

    coeffs are ascending, leading coefficient nonzero, degree >= 1.  Exact
    zero roots are stripped first.  Returns None when the iteration fails
    to converge.  Output order is unspecified; callers sort.
    """
    k = 0
    while coeffs[k] == 0j:
        k += 1
    out = [0j] * k
    body = coeffs[k:]
    deg = len(body) - 1
    if deg == 0:
        return out
    if deg == 1:
        return out + _roots_deg1(body)
    if deg == 2:
        return out + _roots_deg2(body)
    rest = _roots_aberth(body)
    if rest is None:
        return None
    return out + rest


def fiber_coeffs(cols: list[list[complex]], z: complex) -> list[complex]:
    """w-coefficients of curve(z, .); cols[j] is the z-poly on w^j."""
    return [horner(col, z) for col in cols]


def batch_fiber_roots(
    cols: list[list[complex]], d: int, zs: list[complex]
) -> tuple[list[complex], list[int]]:
    """Fiber roots for many z against a fixed curve.

    Returns (flat, status): status[i] is 0 when exactly d finite roots were
    appended to flat for zs[i], 1 when the leading w-coefficient vanished
    (degree drop; nothing appended, caller takes the slow path), 2 on
    root-finder non-convergence (nothing appended).
    """
    flat: list[complex] = []
    status: list[int] = []
    for z in zs:
        coeffs = [horner(col, z) for col in cols]
        scale = 0.0
        for c in coeffs:
            m = abs(c)
            if m > scale:
                scale = m
        if scale == 0.0 or abs(coeffs[d]) <= 1e-14 * scale:
            status.append(1)
            continue
        rs = roots(coeffs)
        if rs is None:
            status.append(2)
            continue
        flat.extend(rs)
        status.append(0)
    return flat, status
