"""Independent reference routines for the tests.

Everything here is written from first principles with ``math`` only, so
that a bug shared with the package (or with scipy) cannot make both sides
of a comparison agree.
"""

import math


def bisect(f, lo, hi, tol=1e-13, max_iter=500):
    flo = f(lo)
    if flo * f(hi) > 0:
        raise ValueError("root not bracketed")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0 or hi - lo < tol * max(1.0, abs(mid)):
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def golden_max(f, lo, hi, tol=1e-12):
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * max(1.0, abs(c)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def grid_zoom_max(f, box, n=21, rounds=30, shrink=0.25):
    """Maximise ``f(u, v)`` over a box of positive parameters by repeatedly
    refining a log-spaced grid around the best point. ``box`` is
    ``((u_lo, u_hi), (v_lo, v_hi))``.
    """
    (ul, uh), (vl, vh) = [(math.log(lo), math.log(hi)) for lo, hi in box]
    best = None
    for _ in range(rounds):
        du, dv = (uh - ul) / (n - 1), (vh - vl) / (n - 1)
        for i in range(n):
            u = math.exp(ul + i * du)
            for j in range(n):
                v = math.exp(vl + j * dv)
                try:
                    val = f(u, v)
                except (ValueError, OverflowError, ZeroDivisionError):
                    continue
                if best is None or val > best[0]:
                    best = (val, u, v)
        _, bu, bv = best
        hu, hv = (uh - ul) * shrink, (vh - vl) * shrink
        ul, uh = math.log(bu) - hu, math.log(bu) + hu
        vl, vh = math.log(bv) - hv, math.log(bv) + hv
    return best[1], best[2]


def adaptive_simpson(f, a, b, tol=1e-12, depth=60):
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6 * (fa + 4 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth <= 0 or abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15
        return (rec(a, m, fa, flm, fm, left, tol / 2, depth - 1)
                + rec(m, b, fm, frm, fb, right, tol / 2, depth - 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)


def ks_distance(sample, cdf):
    xs = sorted(sample)
    n = len(xs)
    d = 0.0
    for i, x in enumerate(xs):
        F = cdf(x)
        d = max(d, (i + 1) / n - F, F - i / n)
    return d


# plain-math distribution formulas ------------------------------------------


def exp_cdf(rate, t):
    return 1 - math.exp(-rate * t)


def exp_sf(rate, t):
    return math.exp(-rate * t)


def exp_logpdf(rate, t):
    return math.log(rate) - rate * t


def wei_cdf(shape, scale, t):
    return 1 - math.exp(-((t / scale) ** shape))


def wei_sf(shape, scale, t):
    return math.exp(-((t / scale) ** shape))


def wei_logpdf(shape, scale, t):
    return math.log(shape / scale) + (shape - 1) * math.log(t / scale) - (t / scale) ** shape


def truncated_exp_loglik(rate, xs, t0):
    return sum(exp_logpdf(rate, x) for x in xs) - len(xs) * math.log(exp_cdf(rate, t0))


def truncated_wei_loglik(shape, scale, xs, t0):
    return sum(wei_logpdf(shape, scale, x) for x in xs) - len(xs) * math.log(wei_cdf(shape, scale, t0))


def censored_exp_loglik(rate, ts, ds):
    return sum(exp_logpdf(rate, t) if d else -rate * t for t, d in zip(ts, ds))


def censored_wei_loglik(shape, scale, ts, ds):
    return sum(wei_logpdf(shape, scale, t) if d else -((t / scale) ** shape) for t, d in zip(ts, ds))
