"""Riemann theta functions with characteristics and the Kummer map.

The lattice sum is truncated to an ellipsoid whose radius comes from the
uniform tail bound of Deconinck, Heil, Bobenko, van Hoeij and Schmies
(Math. Comp. 73, 2004):

    err(R) <= (g/2) (2/rho)^g Gamma(g/2, (R - rho/2)^2)

where rho is the shortest vector of the lattice sqrt(pi) T Z^g and
Im tau = T^T T.  The bound is multiplied by the factor exp(pi y^T Y y)
left over after reducing z, and by 2 as a safety margin.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaincc, gamma

from .curve import INFINITY, Divisor, flat_seed, random_point
from .errors import DegenerateVector, NotPositiveDefinite
from .linser import normalize_projective, singular_values
from .periods import abel_jacobi, half_period

ABS_TOL = 1e-12
RANK_RATIO = 1e-7

__all__ = [
    "ThetaChar", "theta", "theta_reduced", "theta_second_order",
    "kummer", "kummer_vector", "numerical_rank", "riemann_constant",
]


@dataclass(frozen=True)
class ThetaChar:
    a: tuple
    b: tuple

    @classmethod
    def zero(cls, g: int) -> "ThetaChar":
        return cls((Fraction(0),) * g, (Fraction(0),) * g)

    @classmethod
    def parse(cls, text: str) -> "ThetaChar":
        """'a1,a2;b1,b2' with entries 0 or 1/2."""
        left, right = text.split(";")
        a = tuple(Fraction(t.strip()) for t in left.split(","))
        b = tuple(Fraction(t.strip()) for t in right.split(","))
        if len(a) != len(b) or any(v not in (0, Fraction(1, 2)) for v in a + b):
            raise ValueError(f"bad characteristic {text!r}")
        return cls(a, b)

    @property
    def parity(self) -> int:
        return int(4 * sum(x * y for x, y in zip(self.a, self.b))) % 2

    @property
    def is_odd(self) -> bool:
        return self.parity == 1

    def arrays(self):
        return (np.array([float(x) for x in self.a]),
                np.array([float(x) for x in self.b]))


@functools.lru_cache(maxsize=64)
def _shortest_vector(key):
    T = np.array(key).reshape(int(len(key) ** 0.5), -1)
    g = T.shape[0]
    best = np.inf
    span = 3
    for m in itertools.product(range(-span, span + 1), repeat=g):
        if any(m):
            best = min(best, float(np.linalg.norm(T @ np.array(m))))
    return best


def _radius(T, abs_tol, prefactor):
    g = T.shape[0]
    rho = _shortest_vector(tuple(np.round(T, 14).ravel()))
    R = max((np.sqrt(g) + rho) / 2, rho / 2 + 0.5)
    while True:
        x = (R - rho / 2) ** 2
        err = (g / 2) * (2 / rho) ** g * gammaincc(g / 2, x) * gamma(g / 2)
        if 2 * prefactor * err <= abs_tol:
            return R
        R += 0.05


def _cholesky(Y):
    Y = (Y + Y.T) / 2
    try:
        L = np.linalg.cholesky(Y)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("Im tau is not positive definite") from exc
    return L.T  # Y = T^T T


def _lattice_points(T, center, R):
    """Integer m with ||T (m + center)|| <= R, sorted by ||m|| then lexicographically."""
    g = T.shape[0]
    Yinv = np.linalg.inv(T.T @ T)
    half = R * np.sqrt(np.diag(Yinv))
    ranges = [range(int(np.floor(-c - h)), int(np.ceil(-c + h)) + 1)
              for c, h in zip(center, half)]
    M = np.array(list(itertools.product(*ranges)), dtype=float).reshape(-1, g)
    keep = np.linalg.norm((M + center) @ T.T, axis=1) <= R
    M = M[keep]
    order = np.lexsort(tuple(M[:, ::-1].T) + (np.sum(M * M, axis=1),))
    return M[order]


def theta_reduced(z, tau, char: ThetaChar | None = None, abs_tol: float = ABS_TOL,
                  radius_extra: float = 0.0):
    """Return (log_factor, value) with theta[char](z; tau) = exp(log_factor) * value.

    z is shifted by tau k (k integral) so that its tau-coordinates lie in
    [-1/2, 1/2]; the quasi-periodicity factor is returned separately.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    tau = np.asarray(tau, dtype=complex)
    g = len(z)
    if char is None:
        char = ThetaChar.zero(g)
    a, b = char.arrays()
    Y = tau.imag
    T = _cholesky(Y)
    y = np.linalg.solve(Y, z.imag)
    k = np.round(y)
    zr = z - tau @ k
    log_factor = -1j * np.pi * (k @ tau @ k) - 2j * np.pi * (k @ (zr + b))
    yr = y - k
    prefactor = float(np.exp(np.pi * yr @ Y @ yr))
    Ts = np.sqrt(np.pi) * T
    R = _radius(Ts, abs_tol, prefactor) + radius_extra
    M = _lattice_points(Ts, a + yr, R)
    ma = M + a
    expo = 1j * np.pi * np.einsum("ij,jk,ik->i", ma, tau, ma) + 2j * np.pi * (ma @ (zr + b))
    return complex(log_factor), complex(np.sum(np.exp(expo)))


def theta(z, tau, char: ThetaChar | None = None, abs_tol: float = ABS_TOL) -> complex:
    lf, val = theta_reduced(z, tau, char, abs_tol)
    return complex(np.exp(lf) * val)


def _second_order_reduced(z, tau, abs_tol=ABS_TOL, radius_extra=0.0):
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    g = len(z)
    tau2 = 2 * np.asarray(tau, dtype=complex)
    lfs, vals = [], []
    for sigma in itertools.product((0, 1), repeat=g):
        ch = ThetaChar(tuple(Fraction(s, 2) for s in sigma), (Fraction(0),) * g)
        lf, v = theta_reduced(2 * z, tau2, ch, abs_tol, radius_extra)
        lfs.append(lf)
        vals.append(v)
    # with b = 0 the quasi-periodicity factor does not depend on sigma
    return lfs[0], np.array(vals)


def theta_second_order(z, tau, abs_tol: float = ABS_TOL) -> np.ndarray:
    """theta[sigma/2, 0](2z; 2 tau) for sigma in {0,1}^g, lexicographic order."""
    lf, vals = _second_order_reduced(z, tau, abs_tol)
    return np.exp(lf) * vals


def kummer_vector(z, tau, abs_tol: float = ABS_TOL) -> np.ndarray:
    """Normalized second-order theta coordinates of z (a point of P^(2^g - 1))."""
    _, vals = _second_order_reduced(z, tau, abs_tol)
    if np.max(np.abs(vals)) < 1e-13:
        _, vals = _second_order_reduced(z, tau, abs_tol * 1e-3, radius_extra=2.0)
        if np.max(np.abs(vals)) < 1e-13:
            raise DegenerateVector("all second-order theta coordinates vanish")
    return normalize_projective(vals)


def kummer(periods, p, abs_tol: float = ABS_TOL) -> np.ndarray:
    v = p.v if hasattr(p, "v") else p
    return kummer_vector(v, periods.tau, abs_tol)


def numerical_rank(vectors, tol_ratio: float = RANK_RATIO):
    """(rank, gap, singular values) of the matrix whose rows are the vectors."""
    M = np.array([np.asarray(v, dtype=complex) for v in vectors])
    s = singular_values(M)
    if s.size == 0 or s[0] == 0:
        return 0, np.inf, s
    rank = int(np.sum(s > tol_ratio * s[0]))
    if rank >= len(s):
        gap = np.inf
    else:
        gap = s[rank - 1] / s[rank] if s[rank] > 0 else np.inf
    return rank, float(gap), s


def riemann_constant(periods, samples: int = 10, seed=0, abs_tol: float = ABS_TOL):
    """Half-period index k with theta(AJ(D - (g-1) inf) + h_k) = 0 for effective D of degree g-1.

    Found by scanning all half-periods over `samples` random divisors.
    Returns (k, residuals), residuals[j] being the largest |theta| seen for h_j.
    """
    curve, g = periods.curve, periods.genus
    base = []
    for s in range(samples):
        pts = [random_point(curve, (*flat_seed(seed), s, k)) for k in range(g - 1)]
        D = Divisor.from_points(pts) - Divisor.from_pairs([(INFINITY, g - 1)])
        base.append(abel_jacobi(curve, periods, D).v)
    residuals = []
    for k in range(4 ** g):
        h = half_period(periods, k).v
        worst = 0.0
        for v in base:
            _, val = theta_reduced(v + h, periods.tau, None, abs_tol)
            # compare the reduced value, free of the quasi-periodicity factor
            worst = max(worst, abs(val))
        residuals.append(worst)
    return int(np.argmin(residuals)), residuals
