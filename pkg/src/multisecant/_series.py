"""Truncated power series and local expansions of sections at curve points.

A series is a complex numpy array of coefficients c[0] + c[1] t + ...,
always truncated to a fixed order K (length K).
"""

import numpy as np
import numpy.polynomial.polynomial as P


def mul(a, b, K):
    return np.convolve(a, b)[:K]


def compose_poly(poly, s, K):
    """poly(s(t)) truncated to K terms (Horner)."""
    out = np.zeros(K, dtype=complex)
    for c in poly[::-1]:
        out = mul(out, s, K)
        out[0] += c
    return out


def sqrt_series(a, y0, K):
    """Series y with y*y = a and y[0] = y0 (requires y0 != 0)."""
    y = np.zeros(K, dtype=complex)
    y[0] = y0
    for k in range(1, K):
        acc = a[k] if k < len(a) else 0
        acc -= np.dot(y[1:k], y[k - 1:0:-1])
        y[k] = acc / (2 * y0)
    return y


def taylor_shift(poly, x0):
    """Coefficients of poly(x0 + u) in u."""
    n = len(poly)
    out = np.array(poly, dtype=complex)
    # repeated synthetic division
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            out[j] += x0 * out[j + 1]
    return out


def revert(F, K):
    """Series u(w) with F(u(w)) = w, where F(0) = 0 and F'(0) != 0."""
    F = np.array(F, dtype=complex)
    u = np.zeros(K, dtype=complex)
    if K > 1:
        u[1] = 1 / F[1]
    higher = F.copy()
    higher[:2] = 0
    w = np.zeros(K, dtype=complex)
    if K > 1:
        w[1] = 1
    for _ in range(K):
        u = (w - compose_poly(higher, u, K)) / F[1]
    return u


def local_xy(curve, point, K, is_branch):
    """Expansions (x(t), y(t)) of the coordinates in the local parameter.

    Only for finite points: t = x - x0 off the branch locus, t = y on it.
    """
    x0 = complex(point.x)
    Fs = taylor_shift(curve.f, x0)
    if not is_branch:
        xs = np.zeros(K, dtype=complex)
        xs[0] = x0
        if K > 1:
            xs[1] = 1
        ys = sqrt_series(Fs, complex(point.y), K)
        return xs, ys
    Fs = Fs.copy()
    Fs[0] = 0
    half = (K + 1) // 2 + 1
    u = revert(Fs, half)
    xs = np.zeros(K, dtype=complex)
    xs[0] = x0
    for j in range(1, half):
        if 2 * j < K:
            xs[2 * j] = u[j]
    ys = np.zeros(K, dtype=complex)
    if K > 1:
        ys[1] = 1
    return xs, ys


def infinity_root(curve, K):
    """sqrt(r(t)) with y = t^-(2g+1) sqrt(r(t)) when x = t^-2."""
    N = curve.degree
    r = np.zeros(max(K, 2 * N + 1), dtype=complex)
    for k, c in enumerate(curve.f):
        r[2 * (N - k)] = c
    return sqrt_series(r, np.sqrt(complex(curve.f[-1])), K)


def section_series(basis, n, curve, point, K, is_branch):
    """Matrix (len(basis), K) of local expansions of each section at point.

    Sections are (A, B) coefficient arrays for A(x) + B(x) y.  At infinity
    the section is trivialized by t^{2n} (sections of O(2n * inf)).
    """
    out = np.zeros((len(basis), K), dtype=complex)
    if point.at_infinity:
        N = curve.degree
        root = infinity_root(curve, K)
        for i, (A, B) in enumerate(basis):
            s = np.zeros(K + 2 * n + N + 2, dtype=complex)
            for k, a in enumerate(A):
                if a != 0:
                    s[2 * n - 2 * k] += a
            tail = np.zeros_like(s)
            for j, b in enumerate(B):
                if b != 0:
                    tail[2 * n - 2 * j - N] += b
            s[:K] += mul(tail, root, K)
            out[i] = s[:K]
        return out
    xs, ys = local_xy(curve, point, K, is_branch)
    for i, (A, B) in enumerate(basis):
        s = compose_poly(np.asarray(A, dtype=complex), xs, K)
        if len(B) and np.any(np.asarray(B) != 0):
            s = s + mul(compose_poly(np.asarray(B, dtype=complex), xs, K), ys, K)
        out[i] = s
    return out


def polyval_section(A, B, x, y):
    return P.polyval(x, A) + (P.polyval(x, B) * y if len(B) else 0)
