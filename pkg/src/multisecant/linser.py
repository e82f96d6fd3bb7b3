"""Linear systems inside |2n * inf|, the map xi and its fibers.

A system is given by n+1 sections A(x) + B(x) y whose pole order at
infinity is at most 2n.  Hyperplanes of the system are coefficient
vectors c, standing for the section sum_i c_i b_i, and the divisor they
cut out on the curve has degree exactly 2n.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import numpy.polynomial.polynomial as P
from scipy.optimize import linear_sum_assignment

from . import _series
from .curve import (
    INFINITY, CurvePoint, Divisor, HyperellipticCurve, flat_seed, involution, random_point,
)
from .errors import (
    BasePoint, BasePointFound, ClusterAmbiguity, DependentSelection,
    GenusTooSmall, HypothesisViolated, NotInFiber, WrongDegree, ZeroSection,
)

TOL_RANK = 1e-8
TOL_ROOT = 1e-6
TOL_PROJ = 1e-7

MULTIPLE_G12 = "multiple_g12"
CANONICAL = "canonical"
NONSPECIAL = "nonspecial_monomial"


# ----------------------------------------------------------------------
# hyperplanes
# ----------------------------------------------------------------------

def normalize_projective(v) -> np.ndarray:
    """Scale so the largest entry is 1 (ties: lowest index within 1e-12)."""
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    top = mags.max()
    if top == 0:
        raise ValueError("zero vector has no projective class")
    idx = int(np.flatnonzero(mags >= top * (1 - 1e-12))[0])
    return v / v[idx]


def projective_distance(u, v) -> float:
    """sin of the angle between the complex lines through u and v."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    c = abs(np.vdot(u, v)) ** 2 / (np.vdot(u, u).real * np.vdot(v, v).real)
    return math.sqrt(max(0.0, 1.0 - c))


@dataclass(frozen=True)
class Hyperplane:
    coeffs: tuple

    @classmethod
    def from_vector(cls, v) -> "Hyperplane":
        return cls(tuple(complex(c) for c in normalize_projective(v)))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    def distance(self, other: "Hyperplane") -> float:
        return projective_distance(self.vector, other.vector)


# ----------------------------------------------------------------------
# systems
# ----------------------------------------------------------------------

def monomial_basis(curve: HyperellipticCurve, n: int) -> list:
    """Monomial basis of L(2n * inf): x^0..x^n, then x^j y with 2j+2g+1 <= 2n."""
    out = []
    for i in range(n + 1):
        A = np.zeros(i + 1, dtype=complex)
        A[i] = 1
        out.append((f"x^{i}", A, np.zeros(1, dtype=complex)))
    j = 0
    while 2 * j + 2 * curve.genus + 1 <= 2 * n:
        B = np.zeros(j + 1, dtype=complex)
        B[j] = 1
        out.append((f"x^{j}*y", np.zeros(1, dtype=complex), B))
        j += 1
    return out


def pole_order(curve: HyperellipticCurve, A, B, tol: float = 1e-12) -> int:
    """max(2 deg A, 2 deg B + 2g + 1), degrees taken with a relative cutoff."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    scale = max(np.abs(A).max(initial=0), np.abs(B).max(initial=0))
    if scale == 0:
        raise ZeroSection("the zero section has no divisor")
    best = -1
    for k in range(len(A) - 1, -1, -1):
        if abs(A[k]) > tol * scale:
            best = 2 * k
            break
    for j in range(len(B) - 1, -1, -1):
        if abs(B[j]) > tol * scale:
            best = max(best, 2 * j + curve.degree)
            break
    return best


@dataclass(frozen=True)
class LinearSystem:
    curve: HyperellipticCurve
    n: int
    basis: tuple  # tuple of (A, B) complex coefficient tuples
    kind: str
    labels: tuple = ()

    @property
    def d(self) -> int:
        return 2 * self.n

    @functools.cached_property
    def arrays(self) -> list:
        return [(np.array(A, dtype=complex), np.array(B, dtype=complex))
                for A, B in self.basis]

    @property
    def has_y_term(self) -> bool:
        return any(np.any(B != 0) for _, B in self.arrays)

    @property
    def deg_phi(self) -> int:
        return 1 if self.has_y_term else 2

    def section(self, coeffs):
        """Coefficient arrays (A, B) of sum_i c_i b_i."""
        c = np.asarray(coeffs, dtype=complex)
        la = max(len(A) for A, _ in self.arrays)
        lb = max(len(B) for _, B in self.arrays)
        A = np.zeros(la, dtype=complex)
        B = np.zeros(max(lb, 1), dtype=complex)
        for ci, (Ai, Bi) in zip(c, self.arrays):
            A[:len(Ai)] += ci * Ai
            B[:len(Bi)] += ci * Bi
        return A, B

    def evaluate(self, p: CurvePoint) -> np.ndarray:
        """Raw values (b_0(P), ..., b_n(P)); at infinity the t^{2n}-trivialized limit."""
        return self.series_at(p, 1)[:, 0]

    def series_at(self, p: CurvePoint, order: int) -> np.ndarray:
        return _series.section_series(self.arrays, self.n, self.curve, p, order,
                                      self.curve.is_branch(p))

    def __repr__(self):
        return f"LinearSystem({self.kind}, n={self.n}, basis={list(self.labels)})"


def _make(curve, n, chosen, kind) -> LinearSystem:
    basis = tuple((tuple(A), tuple(B)) for _, A, B in chosen)
    labels = tuple(lab for lab, _, _ in chosen)
    return LinearSystem(curve, n, basis, kind, labels)


def multiple_g12(curve: HyperellipticCurve, n: int) -> LinearSystem:
    if n < 1:
        raise ValueError("n must be >= 1")
    return _make(curve, n, monomial_basis(curve, n)[: n + 1], MULTIPLE_G12)


def canonical(curve: HyperellipticCurve) -> LinearSystem:
    """The canonical system, (g-1) times the g^1_2, basis x^i dx/y ~ x^i."""
    if curve.genus < 2:
        raise GenusTooSmall("the canonical system needs genus >= 2")
    n = curve.genus - 1
    return _make(curve, n, monomial_basis(curve, n)[: n + 1], CANONICAL)


def nonspecial_monomial(curve: HyperellipticCurve, n: int, selection) -> LinearSystem:
    """Sub-system of the non-special |2n * inf| (n >= g) spanned by selected monomials.

    ``selection`` indexes into :func:`monomial_basis`.
    """
    if n < curve.genus:
        raise HypothesisViolated(f"|2n*inf| is non-special only for n >= g (n={n})")
    mons = monomial_basis(curve, n)
    sel = list(selection)
    if len(sel) != n + 1 or len(set(sel)) != len(sel):
        raise DependentSelection(f"need {n + 1} distinct monomials, got {sel}")
    if any(i < 0 or i >= len(mons) for i in sel):
        raise DependentSelection(f"selection {sel} outside 0..{len(mons) - 1}")
    system = _make(curve, n, [mons[i] for i in sel], NONSPECIAL)
    check_system(system)
    return system


def check_system(system: LinearSystem, seed: int = 0) -> None:
    """Raise unless the basis is independent and has no base point."""
    curve, n = system.curve, system.n
    orders = [pole_order(curve, A, B) for A, B in system.arrays]
    if max(orders) > 2 * n:
        raise ValueError("a section has pole order > 2n at infinity")
    pts = [random_point(curve, (seed, k)) for k in range(2 * n + 2)]
    M = np.array([system.evaluate(p) for p in pts])
    if numerical_rank_of(M) < n + 1:
        raise DependentSelection("basis sections are linearly dependent")
    if max(orders) < 2 * n:
        raise BasePointFound("infinity is a base point (no section of pole order 2n)")
    # every finite base point is a zero of the first section
    A, B = system.arrays[0]
    for p in _zeros_of_section(curve, A, B):
        vals = system.evaluate(p)
        if np.all(np.abs(vals) <= 1e-9 * (1 + np.abs(p.x)) ** n):
            raise BasePointFound(f"common zero of all sections at {p!r}")


# ----------------------------------------------------------------------
# rank / kernel
# ----------------------------------------------------------------------

def singular_values(M) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def numerical_rank_of(M, tol: float = TOL_RANK) -> int:
    s = singular_values(M)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def phi_eval(system: LinearSystem, p: CurvePoint) -> np.ndarray:
    v = system.evaluate(p)
    if np.max(np.abs(v)) == 0:
        raise BasePoint(f"all sections vanish at {p!r}")
    return normalize_projective(v)


def condition_matrix(system: LinearSystem, F: Divisor) -> np.ndarray:
    """Rows: local Taylor coefficients (orders < m) of each section at each point of F.

    Rows are scaled to unit length; identically vanishing rows are kept as
    zero rows so that the row count equals deg F.
    """
    rows = []
    for p, m in F.support:
        if m < 0:
            raise ValueError("condition matrix needs an effective divisor")
        S = system.series_at(p, m)
        for k in range(m):
            r = S[:, k]
            nr = np.linalg.norm(r)
            rows.append(r / nr if nr > 0 else r)
    if not rows:
        return np.zeros((0, system.n + 1), dtype=complex)
    return np.array(rows)


def hyperplane_containing(system: LinearSystem, G: Divisor,
                          tol_rank: float = TOL_RANK) -> Optional[Hyperplane]:
    """The unique H with G <= div(H), or None if it is not unique."""
    M = condition_matrix(system, G)
    if M.shape[0] == 0:
        return None
    _, s, vh = np.linalg.svd(M)
    rank = int(np.sum(s > tol_rank * s[0])) if s[0] > 0 else 0
    if system.n + 1 - rank != 1:
        return None
    return Hyperplane.from_vector(vh[-1].conj())


def _check_degree(system, F):
    if F.degree != system.n or not F.is_effective:
        raise WrongDegree(f"need an effective divisor of degree {system.n}, got {F.degree}")


def is_defined(system: LinearSystem, F: Divisor, tol_rank: float = TOL_RANK) -> bool:
    _check_degree(system, F)
    M = condition_matrix(system, F)
    return system.n + 1 - numerical_rank_of(M, tol_rank) == 1


def xi(system: LinearSystem, F: Divisor, tol_rank: float = TOL_RANK) -> Optional[Hyperplane]:
    """The hyperplane spanned by phi(F); None where the map is undefined."""
    _check_degree(system, F)
    return hyperplane_containing(system, F, tol_rank)


# ----------------------------------------------------------------------
# section divisors
# ----------------------------------------------------------------------

CLUSTER_RADII = (1e-2, 1e-3, 1e-4, 1e-5)
ROUNDING_FACTOR = 1e4


def _groups(roots, tol):
    """Greedy single-linkage groups of roots closer than tol*(1+|r|)."""
    roots = list(roots)
    groups = []
    used = [False] * len(roots)
    for i, r in enumerate(roots):
        if used[i]:
            continue
        members = [r]
        used[i] = True
        grew = True
        while grew:
            grew = False
            for j, s in enumerate(roots):
                if not used[j] and any(abs(s - m) <= tol * (1 + abs(m)) for m in members):
                    members.append(s)
                    used[j] = True
                    grew = True
        groups.append(members)
    return groups


def _at_rounding_level(poly, c):
    """|poly(c)| is indistinguishable from the rounding error of evaluating it."""
    scale = P.polyval(abs(c), np.abs(poly))
    return abs(P.polyval(c, poly)) <= ROUNDING_FACTOR * np.finfo(float).eps * scale


def _split_clusters(members, poly, radii, tol):
    if len(members) == 1:
        return [(complex(members[0]), 1)]
    if not radii:
        return [(complex(np.mean(m)), len(m)) for m in _groups(members, tol)]
    out = []
    for grp in _groups(members, radii[0]):
        c = complex(np.mean(grp))
        if len(grp) == 1 or _at_rounding_level(poly, c):
            out.append((c, len(grp)))
        else:
            out.extend(_split_clusters(grp, poly, radii[1:], tol))
    return out


def _cluster_roots(roots, tol, poly=None):
    """Group numerically multiple roots; returns list of (centroid, count).

    A k-fold root spreads like eps^(1/k), but the centroid of the spread
    roots stays accurate.  With poly given, groups found at decreasing radii
    are accepted once poly vanishes to rounding level at their centroid;
    without it, roots closer than tol*(1+|r|) are merged.
    """
    roots = list(roots)
    if poly is None:
        return [(complex(np.mean(m)), len(m)) for m in _groups(roots, tol)]
    return _split_clusters(roots, poly, CLUSTER_RADII, tol)


def _polish(poly, r, iters=3):
    dpoly = P.polyder(poly)
    for _ in range(iters):
        d = P.polyval(r, dpoly)
        if d == 0:
            break
        step = P.polyval(r, poly) / d
        r = r - step
    return r


def _norm_poly(curve, A, B):
    N = P.polysub(P.polymul(A, A), P.polymul(curve.f, P.polymul(B, B)))
    return np.asarray(N, dtype=complex)


def _finite_zeros(curve, A, B, tol_root=TOL_ROOT):
    """Distinct roots of the norm A^2 - f B^2 with multiplicities (deg from the pole order)."""
    po = pole_order(curve, A, B)
    N = _norm_poly(curve, A, B)[: po + 1]
    if po == 0:
        return []
    b_zero = not np.any(np.abs(B) > 1e-12 * max(np.abs(A).max(initial=0), 1e-300))
    if b_zero:
        # N = A^2: factor A, which has half the multiplicities
        Aeff = np.asarray(A, dtype=complex)[: po // 2 + 1]
        groups = _cluster_roots(P.polyroots(Aeff), tol_root, Aeff)
        out = []
        for r, k in groups:
            if k == 1:
                r = _polish(Aeff, r)
            out.append((r, 2 * k))
        return out
    groups = _cluster_roots(P.polyroots(N), tol_root, N)
    return [(_polish(N, r) if k == 1 else r, k) for r, k in groups]


def _zeros_of_section(curve, A, B):
    pts = []
    for x0, _ in _finite_zeros(curve, A, B):
        for sheet in (1, -1):
            pts.append(curve.point_from_x(x0, sheet))
    return pts


def _branch_root(curve, x0, tol):
    for r in curve.roots:
        if abs(x0 - r) <= tol * (1 + abs(r)):
            return complex(r)
    return None


def section_divisor(system: LinearSystem, H, tol_root: float = TOL_ROOT) -> Divisor:
    """Zero divisor of the section with coefficients H (degree exactly 2n)."""
    c = H.vector if isinstance(H, Hyperplane) else np.asarray(H, dtype=complex)
    if not np.any(c != 0):
        raise ZeroSection("zero coefficient vector")
    curve = system.curve
    A, B = system.section(c)
    po = pole_order(curve, A, B)
    pairs = []
    for x0, k in _finite_zeros(curve, A, B, tol_root):
        xb = _branch_root(curve, x0, max(tol_root, 1e-9))
        if xb is not None:
            pairs.append((CurvePoint(xb, 0j), k))
            continue
        p_plus = curve.point_from_x(x0, 1)
        p_minus = involution(p_plus)
        kp = _split_multiplicity(curve, A, B, p_plus, p_minus, k)
        if kp:
            pairs.append((p_plus, kp))
        if k - kp:
            pairs.append((p_minus, k - kp))
    if 2 * system.n - po:
        pairs.append((INFINITY, 2 * system.n - po))
    return Divisor.from_pairs(pairs)


def _split_multiplicity(curve, A, B, p_plus, p_minus, k):
    """How much of the norm's root multiplicity k sits on p_plus.

    Chooses the split (k+, k-) whose leading local coefficients are
    smallest relative to the section's size near x0.
    """
    basis = [(A, B)]
    sp = _series.section_series(basis, 0, curve, p_plus, k + 1, False)[0]
    sm = _series.section_series(basis, 0, curve, p_minus, k + 1, False)[0]
    scale = max(np.abs(sp).max(), np.abs(sm).max(), 1e-300)
    best, best_err = 0, math.inf
    for kp in range(k + 1):
        err = max(np.abs(sp[:kp]).max(initial=0), np.abs(sm[: k - kp]).max(initial=0)) / scale
        if err < best_err - 1e-15:
            best, best_err = kp, err
    return best


# ----------------------------------------------------------------------
# fibers and multiplicities
# ----------------------------------------------------------------------

def generic_fiber_degree(system: LinearSystem) -> int:
    q = system.d // system.deg_phi
    if system.n > q:
        raise HypothesisViolated(f"n={system.n} > d/deg(phi)={q}")
    return math.comb(q, system.n) * system.deg_phi ** system.n


def sub_divisors(H: Divisor, degree: int):
    """All effective F <= H of the given degree, in a fixed order."""
    pts = H.support
    ranges = [range(m + 1) for _, m in pts]
    for ms in itertools.product(*ranges):
        if sum(ms) == degree:
            yield Divisor(tuple((p, m) for (p, _), m in zip(pts, ms) if m))


def multiplicity_from_divisors(Hdiv: Divisor, F: Divisor,
                               match_tol: float = 1e-6) -> int:
    """prod binom(n_i, m_i) over the points of H, matching F's points to H's."""
    prod = 1
    for p, m in F.support:
        nh = Hdiv.mult(p, match_tol)
        if m > nh:
            raise NotInFiber(f"{p!r} has multiplicity {m} in F but {nh} in H")
    for p, nh in Hdiv.support:
        prod *= math.comb(nh, F.mult(p, match_tol))
    return prod


def multiplicity(system: LinearSystem, H, F: Divisor, match_tol: float = 1e-6,
                 tol_rank: float = TOL_RANK) -> int:
    Hdiv = section_divisor(system, H)
    if F.degree != system.n or not F.is_effective:
        raise NotInFiber("F must be effective of degree n")
    if not is_defined(system, F, tol_rank):
        raise NotInFiber("xi is not defined at F")
    return multiplicity_from_divisors(Hdiv, F, match_tol)


@dataclass(frozen=True)
class FiberPoint:
    divisor: Divisor
    multiplicity: int


def fiber(system: LinearSystem, H, tol_rank: float = TOL_RANK,
          Hdiv: Optional[Divisor] = None) -> list:
    """Every F with xi(F) = H, with the combinatorial multiplicity."""
    Hv = H if isinstance(H, Hyperplane) else Hyperplane.from_vector(H)
    if Hdiv is None:
        Hdiv = section_divisor(system, Hv)
    out = []
    for F in sub_divisors(Hdiv, system.n):
        image = hyperplane_containing(system, F, tol_rank)
        if image is None:
            continue
        if image.distance(Hv) > 1e-6:
            # a defined F <= div(H) must map to H; anything else is numerical noise
            continue
        out.append(FiberPoint(F, multiplicity_from_divisors(Hdiv, F)))
    return out


def census_distance(curve, F: Divisor, G: Divisor) -> float:
    """Bottleneck matching distance between two effective divisors of equal degree."""
    a, b = F.expanded(), G.expanded()
    if len(a) != len(b):
        return math.inf
    C = np.array([[_census_point_distance(p, q, curve) for q in b] for p in a])
    finite = np.where(np.isfinite(C), C, 1e300)
    r, c = linear_sum_assignment(finite)
    return float(C[r, c].max()) if len(r) else 0.0


def _census_point_distance(p, q, curve):
    """Approximate distance in local parameters.

    |dx| plus |dy| damped by the slope |dy/dx|, so that x acts as the local
    parameter away from the branch points; everything is scaled by
    max(1, |x|)^(-3/2), the size of d(x^(-1/2)) near infinity.
    """
    if p.at_infinity and q.at_infinity:
        return 0.0
    if p.at_infinity or q.at_infinity:
        fin = q if p.at_infinity else p
        # local parameter at infinity has size |x|^(-1/2)
        return abs(fin.x) ** -0.5 if fin.x != 0 else math.inf
    slope = 0.0
    for r in (p, q):
        if r.y != 0:
            slope += abs(P.polyval(r.x, curve.df) / (2 * r.y)) / 2
        else:
            slope = math.inf
    s = max(1.0, abs(p.x), abs(q.x))
    return (abs(p.x - q.x) + abs(p.y - q.y) / (1 + slope)) / s ** 1.5


def census_counts(system: LinearSystem, H, eps: float = 1e-5, seed=0,
                  rho: float = 0.25, tol_rank: float = TOL_RANK,
                  Hdiv: Optional[Divisor] = None):
    """Perturb H by eps in a random direction and attribute every fiber point.

    Returns (candidates, counts): the sub-divisors of div(H) of degree n and
    the number of perturbed fiber points nearest to each.  A fiber point
    farther than rho times the smallest separation between candidates
    raises ClusterAmbiguity.
    """
    Hv = H if isinstance(H, Hyperplane) else Hyperplane.from_vector(H)
    if Hdiv is None:
        Hdiv = section_divisor(system, Hv)
    candidates = list(sub_divisors(Hdiv, system.n))
    sep = min((census_distance(system.curve, a, b)
               for a, b in itertools.combinations(candidates, 2)), default=math.inf)
    rng = np.random.default_rng(flat_seed(seed))
    d = rng.normal(size=system.n + 1) + 1j * rng.normal(size=system.n + 1)
    d /= np.linalg.norm(d)
    Hp = Hyperplane.from_vector(Hv.vector + eps * d)
    counts = [0] * len(candidates)
    for fp in fiber(system, Hp, tol_rank):
        dist = [census_distance(system.curve, fp.divisor, G) for G in candidates]
        best = int(np.argmin(dist))
        if dist[best] > rho * sep:
            raise ClusterAmbiguity(
                f"perturbed fiber point at distance {dist[best]:.3g}, separation {sep:.3g}")
        counts[best] += 1
    return candidates, counts


def census_lookup(curve, candidates, counts, F: Divisor) -> int:
    best = min(range(len(candidates)), key=lambda i: census_distance(curve, candidates[i], F))
    if census_distance(curve, candidates[best], F) > 1e-6:
        raise NotInFiber("F is not a sub-divisor of div(H)")
    return counts[best]


def verify_multiplicity_numeric(system: LinearSystem, H, F: Divisor,
                                eps: float = 1e-5, seed=0, rho: float = 0.25,
                                tol_rank: float = TOL_RANK) -> int:
    """Number of perturbed fiber points that collapse onto F."""
    candidates, counts = census_counts(system, H, eps, seed, rho, tol_rank)
    return census_lookup(system.curve, candidates, counts, F)


# ----------------------------------------------------------------------
# stratification
# ----------------------------------------------------------------------

def strata_level(D: Divisor) -> int:
    """Largest t with D = sum P_i + 2 sum Q_j having t doubled points."""
    return sum(m // 2 for _, m in D.support if m > 0)


def in_branch_locus(system: LinearSystem, H) -> bool:
    return strata_level(section_divisor(system, H)) >= 1
