"""One-dimensional minimisation: downhill bracketing and golden-section search."""
import math

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def bracket_minimum(f, x0, step=1.0, grow=2.0, max_steps=200):
    """Walk downhill from ``x0`` until the function rises again.

    Returns ``(a, b, c, fb, evals)`` with ``a < b < c`` and ``f(b) <= f(a), f(c)``,
    or with ``b`` at the last point reached when the walk runs out of steps
    (monotone functions); ``evals`` lists every ``(x, f(x))`` visited.
    """
    evals = []

    def g(x):
        v = f(x)
        evals.append((x, v))
        return v

    fa, fb, fc = g(x0 - step), g(x0), g(x0 + step)
    a, b, c = x0 - step, x0, x0 + step
    if fa < fb and fa < fc:
        direction = -1.0
        b, fb, c, fc = a, fa, b, fb
        a = b - step
        fa = g(a)
    else:
        direction = 1.0 if fc < fb else 0.0
    h = step
    n = 0
    while direction and n < max_steps:
        if direction > 0 and fc < fb:
            h *= grow
            a, fa, b, fb = b, fb, c, fc
            c = b + h
            fc = g(c)
        elif direction < 0 and fa < fb:
            h *= grow
            c, fc, b, fb = b, fb, a, fa
            a = b - h
            fa = g(a)
        else:
            break
        n += 1
    return a, b, c, fb, evals


def golden_section(f, a, c, tol=1e-12, max_iter=300):
    """Minimise a unimodal ``f`` on ``[a, c]``.

    Returns ``(x, fx, iterations)``; ``fx`` is an actual function value, so for
    minimisation problems it is always an upper bound of the true minimum.
    """
    x1 = c - INV_PHI * (c - a)
    x2 = a + INV_PHI * (c - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while abs(c - a) > tol * max(1.0, abs(a) + abs(c)) and it < max_iter:
        if f1 <= f2:
            c, x2, f2 = x2, x1, f1
            x1 = c - INV_PHI * (c - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (c - a)
            f2 = f(x2)
        it += 1
    return (x1, f1, it) if f1 <= f2 else (x2, f2, it)
