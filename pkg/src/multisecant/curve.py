"""Odd-degree hyperelliptic curves y^2 = f(x), their points and divisors.

Coefficients of f are exact rationals (constant term first); point
coordinates are double-precision complex numbers.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import numpy.polynomial.polynomial as P

from .errors import EvenDegree, NotSquarefree

TOL_POINT = 1e-9
TOL_BRANCH = 1e-9
TOL_ON_CURVE = 1e-8

__all__ = [
    "TOL_POINT", "TOL_BRANCH", "TOL_ON_CURVE",
    "CurvePoint", "INFINITY", "HyperellipticCurve", "Divisor",
    "new_curve", "point_from_x", "involution", "random_point",
    "divisor_add", "divisor_leq", "divisor_degree", "point_distance",
]


# ----------------------------------------------------------------------
# exact polynomial helpers (lists of Fraction, constant term first)
# ----------------------------------------------------------------------

def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _exact_rem(a, b):
    a = _trim(a)
    b = _trim(b)
    while len(a) >= len(b) and a:
        coef = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, bi in enumerate(b):
            a[i + shift] -= coef * bi
        a = _trim(a)
    return a


def _exact_gcd(a, b):
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, _exact_rem(a, b)
    return a


def _derivative(p):
    return [i * c for i, c in enumerate(p)][1:]


# ----------------------------------------------------------------------
# points
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CurvePoint:
    """A finite point (x, y) or the unique point at infinity."""

    x: complex = 0j
    y: complex = 0j
    at_infinity: bool = False

    @property
    def is_finite(self) -> bool:
        return not self.at_infinity

    def sort_key(self):
        if self.at_infinity:
            return (1, 0.0, 0.0, 0.0, 0.0)
        x, y = complex(self.x), complex(self.y)
        return (0, round(x.real, 9), round(x.imag, 9),
                round(y.real, 9), round(y.imag, 9))

    def __repr__(self):
        if self.at_infinity:
            return "CurvePoint(inf)"
        return f"CurvePoint({complex(self.x):.6g}, {complex(self.y):.6g})"


INFINITY = CurvePoint(at_infinity=True)


def point_distance(p: CurvePoint, q: CurvePoint) -> float:
    """|x1-x2| + |y1-y2| for finite points; infinity is only near itself."""
    if p.at_infinity or q.at_infinity:
        return 0.0 if (p.at_infinity and q.at_infinity) else float("inf")
    return abs(p.x - q.x) + abs(p.y - q.y)


# ----------------------------------------------------------------------
# curve
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class HyperellipticCurve:
    f_coeffs: tuple  # tuple of Fraction, constant term first
    genus: int = field(init=False)

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in _trim(self.f_coeffs))
        object.__setattr__(self, "f_coeffs", coeffs)
        deg = len(coeffs) - 1
        if deg < 3 or deg % 2 == 0:
            raise EvenDegree(f"deg f = {deg}; only odd degree >= 3 is supported")
        if len(_exact_gcd(coeffs, _derivative(coeffs))) > 1:
            raise NotSquarefree("f has a repeated root; the model is singular")
        object.__setattr__(self, "genus", (deg - 1) // 2)

    @property
    def degree(self) -> int:
        return len(self.f_coeffs) - 1

    @functools.cached_property
    def f(self) -> np.ndarray:
        return np.array([complex(c) for c in self.f_coeffs])

    @functools.cached_property
    def df(self) -> np.ndarray:
        return P.polyder(self.f)

    def eval_f(self, x):
        return P.polyval(x, self.f)

    @functools.cached_property
    def roots(self) -> np.ndarray:
        """Roots of f, Newton-polished and sorted by (real, imag)."""
        r = P.polyroots(self.f).astype(complex)
        for _ in range(4):
            r = r - P.polyval(r, self.f) / P.polyval(r, self.df)
        r = np.where(np.abs(r.imag) <= 1e-12 * (1 + np.abs(r)), r.real + 0j, r)
        return np.array(sorted(r, key=lambda z: (z.real, z.imag)))

    @functools.cached_property
    def branch_points(self) -> tuple:
        """Finite Weierstrass points followed by infinity."""
        return tuple(CurvePoint(complex(r), 0j) for r in self.roots) + (INFINITY,)

    def is_branch(self, p: CurvePoint, tol: float = TOL_BRANCH) -> bool:
        if p.at_infinity:
            return True
        return abs(p.y) <= tol

    def on_curve(self, p: CurvePoint, tol: float = TOL_ON_CURVE) -> bool:
        if p.at_infinity:
            return True
        fx = self.eval_f(p.x)
        return abs(p.y * p.y - fx) <= tol * (1 + abs(fx))

    def point_from_x(self, x, sheet: int = 1) -> CurvePoint:
        return point_from_x(self, x, sheet)

    def __repr__(self):
        terms = [f"{c}*x^{i}" for i, c in enumerate(self.f_coeffs) if c != 0]
        return f"HyperellipticCurve(y^2 = {' + '.join(reversed(terms))}, g={self.genus})"


def new_curve(f_coeffs: Sequence) -> HyperellipticCurve:
    """Build a curve from rationals given as Fractions, ints or (num, den) pairs."""
    coeffs = []
    for c in f_coeffs:
        if isinstance(c, (list, tuple)):
            num, den = c
            coeffs.append(Fraction(int(num), int(den)))
        else:
            coeffs.append(Fraction(c))
    return HyperellipticCurve(tuple(coeffs))


def point_from_x(curve: HyperellipticCurve, x, sheet: int = 1) -> CurvePoint:
    """The point over x on the given sheet; sheet +1 is the principal sqrt."""
    x = complex(x)
    y = complex(np.sqrt(complex(curve.eval_f(x))))
    # a finite branch point is snapped onto the root of f
    for r in curve.roots:
        if abs(x - r) <= TOL_BRANCH * (1 + abs(r)):
            return CurvePoint(complex(r), 0j)
    return CurvePoint(x, y if sheet >= 0 else -y)


def involution(p: CurvePoint) -> CurvePoint:
    if p.at_infinity:
        return p
    if p.y == 0:
        return p
    return CurvePoint(p.x, -p.y)


def flat_seed(seed) -> list:
    """Flatten nested int tuples into SeedSequence entropy."""
    if isinstance(seed, (tuple, list)):
        return [v for part in seed for v in flat_seed(part)]
    return [int(seed)]


def random_point(curve: HyperellipticCurve, seed) -> CurvePoint:
    """Deterministic finite non-branch point; x is Gaussian around the roots."""
    rng = np.random.default_rng(flat_seed(seed))
    roots = curve.roots
    center = roots.mean()
    scale = max(1.0, float(np.max(np.abs(roots - center))))
    while True:
        x = center + scale * complex(rng.normal(), rng.normal())
        sheet = 1 if rng.random() < 0.5 else -1
        p = point_from_x(curve, x, sheet)
        if abs(p.y) > 1e-3:
            return p


# ----------------------------------------------------------------------
# divisors
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Divisor:
    """Formal integer combination of points, canonically sorted."""

    support: tuple = ()  # tuple of (CurvePoint, int)

    @classmethod
    def from_pairs(cls, pairs: Iterable, tol: float = TOL_POINT) -> "Divisor":
        merged: list[list] = []
        for pt, m in pairs:
            m = int(m)
            for entry in merged:
                if point_distance(entry[0], pt) <= tol:
                    entry[1] += m
                    break
            else:
                merged.append([pt, m])
        items = [(pt, m) for pt, m in merged if m != 0]
        items.sort(key=lambda e: e[0].sort_key())
        return cls(tuple(items))

    @classmethod
    def from_points(cls, points: Iterable[CurvePoint], tol: float = TOL_POINT) -> "Divisor":
        return cls.from_pairs(((p, 1) for p in points), tol)

    @classmethod
    def zero(cls) -> "Divisor":
        return cls(())

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.support)

    @property
    def is_effective(self) -> bool:
        return all(m > 0 for _, m in self.support)

    @property
    def points(self) -> list:
        return [p for p, _ in self.support]

    def expanded(self) -> list:
        """Points repeated by multiplicity (effective divisors only)."""
        out = []
        for p, m in self.support:
            out.extend([p] * m)
        return out

    def mult(self, p: CurvePoint, tol: float = TOL_POINT) -> int:
        for q, m in self.support:
            if point_distance(p, q) <= tol:
                return m
        return 0

    def __add__(self, other: "Divisor") -> "Divisor":
        return Divisor.from_pairs(list(self.support) + list(other.support))

    def __neg__(self) -> "Divisor":
        return Divisor(tuple((p, -m) for p, m in self.support))

    def __sub__(self, other: "Divisor") -> "Divisor":
        return self + (-other)

    def __rmul__(self, k: int) -> "Divisor":
        return Divisor.from_pairs([(p, k * m) for p, m in self.support])

    def leq(self, other: "Divisor", tol: float = TOL_POINT) -> bool:
        pts = self.points + [p for p in other.points]
        return all(self.mult(p, tol) <= other.mult(p, tol) for p in pts)

    def __repr__(self):
        if not self.support:
            return "Divisor(0)"
        return "Divisor(" + " + ".join(f"{m}*{p!r}" for p, m in self.support) + ")"


def divisor_add(d1: Divisor, d2: Divisor) -> Divisor:
    return d1 + d2


def divisor_leq(f: Divisor, h: Divisor, tol: float = TOL_POINT) -> bool:
    return f.leq(h, tol)


def divisor_degree(d: Divisor) -> int:
    return d.degree
