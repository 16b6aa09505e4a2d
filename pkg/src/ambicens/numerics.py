"""Scalar root finding and quadrature used by the likelihood code."""

import logging
import math

from scipy import integrate, optimize

from .errors import NoRootError

logger = logging.getLogger(__name__)

_RTOL = 4 * 2.220446049250313e-16


def expand_bracket(f, lo=1e-8, hi=1e4, factor=10.0, max_steps=60):
    """Grow ``[lo, hi]`` geometrically until ``f`` changes sign.

    Only positive parameters are searched, so the lower end shrinks
    toward zero and the upper end grows. Raises `NoRootError` if no sign
    change is found within ``max_steps`` expansions.
    """
    flo, fhi = f(lo), f(hi)
    for _ in range(max_steps):
        if math.isfinite(flo) and math.isfinite(fhi) and flo * fhi <= 0:
            return lo, hi
        if not math.isfinite(flo) or (math.isfinite(fhi) and abs(flo) > abs(fhi)):
            hi *= factor
            fhi = f(hi)
        else:
            lo /= factor
            flo = f(lo)
    raise NoRootError(f"no sign change found in [{lo:g}, {hi:g}]")


def find_root(f, lo=None, hi=None, bracket=True):
    """Root of a scalar function of one positive parameter.

    With ``bracket=True`` the starting interval (default ``[1e-8, 1e4]``)
    is expanded until it brackets a sign change. The root is then polished
    to roughly machine precision.
    """
    lo = 1e-8 if lo is None else lo
    hi = 1e4 if hi is None else hi
    if bracket:
        lo, hi = expand_bracket(f, lo, hi)
    else:
        flo, fhi = f(lo), f(hi)
        if not flo * fhi <= 0:
            raise NoRootError(f"f({lo:g}) and f({hi:g}) have the same sign")
    return optimize.brentq(f, lo, hi, xtol=1e-300, rtol=_RTOL, maxiter=500)


def integrate_interval(func, a, b, tol=1e-10):
    """Definite integral of a bounded integrand on ``[a, b]``.

    QUADPACK is asked for more than ``tol`` so the result is comfortably
    inside it; only an error estimate above ``tol`` itself is reported.
    """
    if b <= a:
        return 0.0
    value, err, *_ = integrate.quad(func, a, b, epsabs=tol * 1e-2, epsrel=1e-12, limit=200, full_output=1)
    if err > tol:
        logger.warning("quadrature on [%g, %g]: error estimate %.2g exceeds %.2g", a, b, err, tol)
    return value
