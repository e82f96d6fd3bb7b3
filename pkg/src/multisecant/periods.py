"""Period matrix, Abel-Jacobi map (base point infinity) and the lattice.

Cycles for real branch points e_1 < ... < e_{2g+1}: with
y = sqrt(lc) * prod sqrt(x - e_i) evaluated just above the real axis the
cuts are (-inf, e_1] and [e_2k, e_2k+1].  a_k encircles [e_2k, e_2k+1],
b_k runs from the cut at -inf to the k-th cut and back on the other
sheet.  Segment integrals use x = (a+b)/2 - (b-a)/2 cos(theta), which
absorbs both inverse-square-root endpoint singularities, followed by
Gauss-Legendre in theta.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
import numpy.polynomial.polynomial as P

from .curve import CurvePoint, Divisor, HyperellipticCurve
from .errors import IllConditioned, NonRealBranchPoints, PathThroughBranchPoint

QUAD_NODES = 256
PANEL_NODES = 24
TOL_LATTICE = 1e-7

__all__ = [
    "PeriodData", "JacPoint", "compute_periods", "abel_jacobi",
    "reduce_mod_lattice", "is_lattice", "lattice_residual", "half_period",
]


@dataclass(frozen=True)
class JacPoint:
    v: np.ndarray = field(compare=False)
    reduced: bool = False

    def __add__(self, other):
        return JacPoint(self.v + _vec(other))

    def __sub__(self, other):
        return JacPoint(self.v - _vec(other))

    def __neg__(self):
        return JacPoint(-self.v)

    def __mul__(self, k):
        return JacPoint(self.v * k)

    __rmul__ = __mul__


def _vec(p):
    return p.v if isinstance(p, JacPoint) else np.asarray(p, dtype=complex)


@dataclass(frozen=True, eq=False)
class PeriodData:
    curve: HyperellipticCurve
    A: np.ndarray
    B: np.ndarray
    tau: np.ndarray
    branch: np.ndarray  # sorted finite branch points
    quad_nodes: int
    flagged: bool  # branch points outside the validated (all-real) class
    base_point: str = "infinity"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def genus(self) -> int:
        return self.curve.genus

    @functools.cached_property
    def A_inv(self):
        return np.linalg.inv(self.A)

    @property
    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.tau - self.tau.T)))

    @property
    def min_eig_im_tau(self) -> float:
        Y = (self.tau.imag + self.tau.imag.T) / 2
        return float(np.linalg.eigvalsh(Y).min())

    @property
    def condition_A(self) -> float:
        return float(np.linalg.cond(self.A))

    # ---- Abel-Jacobi internals ------------------------------------

    @functools.cached_property
    def _aj_base(self) -> complex:
        return complex(self.branch[-1])

    @functools.cached_property
    def _q(self) -> np.ndarray:
        """f(x) / (x - e) for the base branch point e (synthetic division)."""
        f = self.curve.f
        e = self._aj_base
        q = np.zeros(len(f) - 1, dtype=complex)
        acc = 0j
        for k in range(len(f) - 1, 0, -1):
            acc = acc * e + f[k]
            q[k - 1] = acc
        return q

    @functools.cached_property
    def _s_singularities(self) -> np.ndarray:
        e = self._aj_base
        pts = []
        for r in self.branch[:-1]:
            s = np.sqrt(complex(r) - e)
            pts.extend([s, -s])
        return np.array(pts)

    @functools.cached_property
    def _w0(self) -> complex:
        return complex(np.sqrt(P.polyval(self._aj_base, self._q)))

    @functools.cached_property
    def integral_to_infinity(self) -> np.ndarray:
        """Raw integrals of x^(k-1) dx / y from the base branch point to infinity."""
        return _integral_to_infinity(self)

    def raw_integral(self, p: CurvePoint) -> np.ndarray:
        """Integrals of the g holomorphic differentials from the base branch point to p."""
        if p.at_infinity:
            return self.integral_to_infinity
        key = (complex(p.x), complex(p.y))
        if key not in self._cache:
            self._cache[key] = self._raw_finite(p)
        return self._cache[key].copy()

    def _raw_finite(self, p: CurvePoint) -> np.ndarray:
        for i, r in enumerate(self.branch):
            if abs(p.x - r) <= 1e-12 * (1 + abs(r)) and abs(p.y) <= 1e-9:
                return -sum((_segment(self, self.branch[j], self.branch[j + 1])
                             for j in range(i, len(self.branch) - 1)),
                            np.zeros(self.genus, dtype=complex))
        return _integral_from_base(self, p)


# ----------------------------------------------------------------------
# quadrature
# ----------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def _upper_side_rest(curve, branch, x, skip):
    """sqrt(lc) * prod over branch points not in skip of sqrt(x - e + i0)."""
    out = np.full(x.shape, np.sqrt(complex(curve.f[-1])), dtype=complex)
    for i, e in enumerate(branch):
        if i in skip:
            continue
        if abs(e.imag) == 0:
            d = x.real - e.real
            out *= np.where(d >= 0, np.sqrt(np.abs(d)) + 0j, 1j * np.sqrt(np.abs(d)))
        else:
            out *= np.sqrt(x - e)
    return out


def _segment(pd: "PeriodData | _Proto", a, b) -> np.ndarray:
    """Integral of x^(k-1) dx / y over [a, b] between adjacent branch points, upper side."""
    ia = int(np.argmin(np.abs(pd.branch - a)))
    ib = int(np.argmin(np.abs(pd.branch - b)))
    return _segment_idx(pd.curve, pd.branch, ia, ib, pd.quad_nodes)


def _segment_idx(curve, branch, ia, ib, nodes):
    a, b = complex(branch[ia]), complex(branch[ib])
    u, w = _gauss_legendre(nodes)
    theta = (u + 1) * np.pi / 2
    w = w * np.pi / 2
    x = (a + b) / 2 - (b - a) / 2 * np.cos(theta)
    rest = _upper_side_rest(curve, branch, x, {ia, ib})
    base = w / (1j * rest)
    g = curve.genus
    return np.array([np.sum(base * x ** k) for k in range(g)])


class _Proto:
    def __init__(self, curve, branch, nodes):
        self.curve, self.branch, self.quad_nodes = curve, branch, nodes


def compute_periods(curve: HyperellipticCurve, quad_nodes: int = QUAD_NODES,
                    allow_complex: bool = False) -> PeriodData:
    """Period matrices A, B (rows: differentials, columns: cycles) and tau = A^-1 B."""
    roots = curve.roots
    real = bool(np.all(roots.imag == 0))
    if not real and not allow_complex:
        raise NonRealBranchPoints(
            "branch points are not all real; pass allow_complex=True for a "
            "best-effort (flagged) computation")
    g = curve.genus
    branch = np.array(sorted(roots, key=lambda z: (z.real, z.imag)), dtype=complex)
    seg = [_segment_idx(curve, branch, j, j + 1, quad_nodes) for j in range(2 * g)]
    A = np.zeros((g, g), dtype=complex)
    B = np.zeros((g, g), dtype=complex)
    for k in range(1, g + 1):
        A[:, k - 1] = 2 * seg[2 * k - 1]
        B[:, k - 1] = 2 * sum(seg[j] for j in range(2 * k - 1))
    if np.linalg.cond(A) > 1e12:
        raise IllConditioned(f"cond(A) = {np.linalg.cond(A):.3g}")
    tau = np.linalg.solve(A, B)
    # the b_k above meet each other; b_k + sum_j N_jk a_j (N strictly upper
    # triangular, integral) restores a symplectic basis
    N = np.triu(np.round((tau.T - tau).real), 1)
    B = B + A @ N
    tau = np.linalg.solve(A, B)
    if np.linalg.eigvalsh((tau.imag + tau.imag.T) / 2).max() < 0:
        # reverse the b-cycles so that Im tau is positive definite
        B = -B
        tau = -tau
    return PeriodData(curve, A, B, tau, branch, quad_nodes, flagged=not real)


# ----------------------------------------------------------------------
# Abel-Jacobi
# ----------------------------------------------------------------------

def _seg_dist(a, b, pts):
    """Distance from the segment [a, b] to the nearest of pts."""
    if len(pts) == 0:
        return np.inf
    d = b - a
    L2 = abs(d) ** 2
    t = np.clip(((pts - a) * np.conj(d)).real / L2, 0, 1) if L2 > 0 else 0 * pts.real
    return float(np.min(np.abs(a + t * d - pts)))


def _panels(a, b, sing, depth=0):
    L = abs(b - a)
    if depth > 60:
        raise PathThroughBranchPoint("integration path runs into a branch point")
    if L <= 0.5 * _seg_dist(a, b, sing) or L == 0:
        return [(a, b)]
    m = (a + b) / 2
    return _panels(a, m, sing, depth + 1) + _panels(m, b, sing, depth + 1)


def _nodes_on(path, sing):
    """Gauss-Legendre nodes and weights (complex ds) along a polyline, in order."""
    u, w = _gauss_legendre(PANEL_NODES)
    nodes, weights = [], []
    for a, b in zip(path[:-1], path[1:]):
        for pa, pb in _panels(complex(a), complex(b), sing):
            nodes.append((pa + pb) / 2 + (pb - pa) / 2 * u)
            weights.append((pb - pa) / 2 * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _track_sqrt(values, start):
    """Continuous branch of sqrt along an ordered sequence of values."""
    out = np.sqrt(values.astype(complex))
    prev = start
    for i in range(len(out)):
        if abs(out[i] - prev) > abs(out[i] + prev):
            out[i] = -out[i]
        prev = out[i]
    return out


def _check_steps(values):
    if len(values) < 2:
        return
    steps = np.abs(np.angle(values[1:] / values[:-1]))
    if steps.max() >= np.pi / 2:
        raise PathThroughBranchPoint("arg f jumps by more than pi/2 between nodes")


def _choose_path(s0, sing):
    """Straight path 0 -> s0 unless it grazes a singularity; then the best two-leg detour."""
    scale = max(abs(s0), 1e-300)
    end_clear = float(np.min(np.abs(sing - s0), initial=np.inf))
    want = min(0.05 * scale, 0.5 * end_clear)
    if _seg_dist(0j, s0, sing) >= want:
        return [0j, s0]
    best, best_clear = [0j, s0], _seg_dist(0j, s0, sing)
    for r in (0.25, 0.5, 1.0, 2.0):
        for k in range(16):
            mid = s0 / 2 + r * scale * np.exp(2j * np.pi * k / 16)
            clear = min(_seg_dist(0j, mid, sing), _seg_dist(mid, s0, sing))
            if clear > best_clear:
                best, best_clear = [0j, mid, s0], clear
        if best_clear >= want:
            break
    return best


def _integrand(pd, s, w):
    x = pd._aj_base + s * s
    return np.array([2 * x ** k / w for k in range(pd.genus)])


def _integral_from_base(pd, p):
    e = pd._aj_base
    s0 = complex(np.sqrt(complex(p.x) - e))
    sing = pd._s_singularities
    path = _choose_path(s0, sing)
    s, ds = _nodes_on(path, sing)
    qv = P.polyval(e + s * s, pd._q)
    _check_steps(np.concatenate([[pd._w0 ** 2], qv]))
    w = _track_sqrt(qv, pd._w0)
    # value at the endpoint, continued from the last node
    q_end = P.polyval(e + s0 * s0, pd._q)
    w_end = _track_sqrt(np.array([q_end]), w[-1])[0]
    total = (_integrand(pd, s, w) * ds).sum(axis=1)
    y_end = s0 * w_end
    if abs(y_end - p.y) > abs(y_end + p.y):
        total = -total
    return total


def _integral_to_infinity(pd):
    e = pd._aj_base
    sing = pd._s_singularities
    S0 = max(1.0, float(np.max(np.abs(sing), initial=0.0)) * 1.5)
    s1, ds1 = _nodes_on([0j, S0 + 0j], sing)
    # tail s = S0 / v, v from 1 down to 0
    vsing = np.array([S0 / z for z in sing if z != 0])
    v, dv = _nodes_on([1 + 0j, 0j], vsing)
    s2 = S0 / v
    ds2 = -S0 / v ** 2 * dv
    s = np.concatenate([s1, s2])
    ds = np.concatenate([ds1, ds2])
    qv = P.polyval(e + s * s, pd._q)
    w = _track_sqrt(qv, pd._w0)
    return (_integrand(pd, s, w) * ds).sum(axis=1)


def abel_jacobi(curve: HyperellipticCurve, periods: PeriodData, D: Divisor) -> JacPoint:
    """Normalized Abel-Jacobi image of a degree-0 divisor (base point infinity)."""
    if D.degree != 0:
        raise ValueError(f"Abel-Jacobi needs a degree-0 divisor (got degree {D.degree})")
    raw = np.zeros(periods.genus, dtype=complex)
    for p, m in D.support:
        raw += m * periods.raw_integral(p)
    return JacPoint(periods.A_inv @ raw)


# ----------------------------------------------------------------------
# lattice
# ----------------------------------------------------------------------

def _lattice_coords(periods, v):
    """Real vectors (x, y) with v = x + tau y."""
    v = _vec(v)
    Y = periods.tau.imag
    y = np.linalg.solve(Y, v.imag)
    x = v.real - periods.tau.real @ y
    return x, y


def _snap_floor(c):
    r = np.round(c)
    c = np.where(np.abs(c - r) < 1e-10, r, c)
    return np.floor(c)


def reduce_mod_lattice(periods: PeriodData, v):
    """(reduced, m, n) with v = reduced + m + tau n, lattice coordinates in [0, 1)."""
    v = _vec(v)
    x, y = _lattice_coords(periods, v)
    n = _snap_floor(y).astype(int)
    m = _snap_floor(x).astype(int)
    red = v - m - periods.tau @ n
    return JacPoint(red, reduced=True), m, n


def lattice_residual(periods: PeriodData, v) -> float:
    """Distance from v to the nearest lattice point (within the reduced cell)."""
    x, y = _lattice_coords(periods, _vec(v))
    xc = x - np.round(x)
    yc = y - np.round(y)
    return float(np.linalg.norm(xc + periods.tau @ yc))


def is_lattice(periods: PeriodData, v, tol: float = TOL_LATTICE) -> bool:
    return lattice_residual(periods, v) <= tol


def half_period(periods: PeriodData, index: int) -> JacPoint:
    """h = (m + tau n) / 2 where m holds bits 0..g-1 of index and n bits g..2g-1."""
    g = periods.genus
    if not 0 <= index < 4 ** g:
        raise ValueError(f"half-period index must be in 0..{4 ** g - 1}")
    m = np.array([(index >> i) & 1 for i in range(g)], dtype=float)
    n = np.array([(index >> (g + i)) & 1 for i in range(g)], dtype=float)
    return JacPoint((m + periods.tau @ n) / 2)
