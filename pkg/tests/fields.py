"""Polynomial test fields with closed-form Neumann extensions (s = 1/2).

For f(t) = sum_k c_k t^k on Omega = (0,1) the continuum extension to the
Neumann side is ext(y) = num(y) / den(y) with num(y) = int_0^1 f(t)(y-t)^-2 dt
and den(y) = 1/(y-1) - 1/y; the monomial integrals are elementary, so the
oracle's closure is exact rather than interpolated.  Fields are damped by
t^2 (1-t)^2 so the closure has no derivative kinks at the region boundaries.
"""

from math import comb

import numpy as np

R_TRUNC = 20.0


def damped_random_coeffs(rng):
    """Monomial coefficients of t^2 (1-t)^2 * (random quadratic)."""
    b = rng.normal(size=3)
    base = np.polynomial.polynomial.polymul([0.0, 0.0, 1.0], [1.0, -2.0, 1.0])
    return np.asarray(np.polynomial.polynomial.polymul(base, b), dtype=float)


def poly_ext_num(coeffs, y):
    """num(y) = int_0^1 f(t) (y - t)^-2 dt for y > 1, in closed form."""
    y = np.asarray(y, dtype=float)
    total = np.zeros_like(y)
    for k, c in enumerate(coeffs):
        if c == 0.0:
            continue
        Ik = np.zeros_like(y)
        for j in range(k + 1):
            b = comb(k, j) * (-1.0) ** j * y ** (k - j)
            if j == 0:
                Ik += b * (1.0 / (y - 1.0) - 1.0 / y)
            elif j == 1:
                Ik += b * np.log(y / (y - 1.0))
            else:
                Ik += b * (y ** (j - 1) - (y - 1.0) ** (j - 1)) / (j - 1)
        total += c * Ik
    return total


def make_closure(coeffs):
    """(f, closure, mean): interior field and its full-space closure.

    The closure mirrors what the discrete model represents: zero on the
    Dirichlet side, the continuum extension on the explicit Neumann region,
    and the interior mean beyond the truncation radius.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    mean = float(sum(c / (k + 1) for k, c in enumerate(coeffs)))

    def f(t):
        return np.polyval(coeffs[::-1], t)

    def closure(pts):
        y = np.asarray(pts, dtype=float).reshape(-1)
        out = np.zeros_like(y)
        inside = (y > 0.0) & (y < 1.0)
        out[inside] = f(y[inside])
        near = (y >= 1.0) & (y <= R_TRUNC)
        yy = np.maximum(y[near], 1.0 + 1.0e-13)
        den = 1.0 / (yy - 1.0) - 1.0 / yy
        out[near] = poly_ext_num(coeffs, yy) / den
        out[y > R_TRUNC] = mean
        return out

    return f, closure, mean
