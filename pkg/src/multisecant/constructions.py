"""Seeded hyperplanes and decompositions used by the CLI and the suite."""

from __future__ import annotations

import numpy as np
import numpy.polynomial.polynomial as P

from .curve import Divisor, flat_seed, involution, random_point
from .errors import InconsistentDecomposition
from .gunning import HDecomposition
from .linser import LinearSystem, Hyperplane, hyperplane_containing


def random_hyperplane(system: LinearSystem, seed) -> Hyperplane:
    rng = np.random.default_rng(flat_seed(seed))
    k = system.n + 1
    return Hyperplane.from_vector(rng.normal(size=k) + 1j * rng.normal(size=k))


def random_points(curve, count: int, seed) -> list:
    return [random_point(curve, (seed, i)) for i in range(count)]


def _is_pencil_multiple(system: LinearSystem) -> bool:
    return system.kind == "multiple_g12"


def hyperplane_through(system: LinearSystem, G: Divisor, seed) -> Hyperplane:
    """A hyperplane whose section divisor contains G, padded with random points.

    For multiple_g12 the section is a polynomial in x: G must be a pullback
    divisor away from the branch points, and the remaining roots are random.
    """
    curve = system.curve
    if _is_pencil_multiple(system):
        roots = []
        done = set()
        for p, m in G.support:
            if curve.is_branch(p):
                if p.at_infinity:
                    raise InconsistentDecomposition("infinity lies in every member of the pencil")
                # x - b vanishes to order 2 at a branch point
                roots += [p.x] * ((m + 1) // 2)
            elif p not in done:
                partner = involution(p)
                if G.mult(partner) != m:
                    raise InconsistentDecomposition(
                        f"{p!r}: multiple_g12 sections are symmetric under the involution")
                roots += [p.x] * m
                done.update({p, partner})
        extra = system.n - len(roots)
        if extra < 0:
            raise InconsistentDecomposition("G imposes more than n conditions")
        roots += [pt.x for pt in random_points(curve, extra, seed)]
        return Hyperplane.from_vector(P.polyfromroots(roots))
    extra = system.n - G.degree
    if extra < 0:
        raise InconsistentDecomposition("G imposes more than n conditions")
    full = G + Divisor.from_points(random_points(curve, extra, seed))
    H = hyperplane_containing(system, full)
    if H is None:
        raise InconsistentDecomposition("G does not determine a unique hyperplane")
    return H


def decomposition(system: LinearSystem, E: Divisor, seed) -> tuple:
    """(H, HDecomposition) with div(H) = P + 2E and random simple P."""
    H = hyperplane_through(system, 2 * E, seed)
    return H, HDecomposition.from_section(system, H, E)


def tangent_hyperplane(system: LinearSystem, doubled: int, seed) -> Hyperplane:
    """A hyperplane in the stratum of level `doubled`: 2 z_1 + ... + 2 z_k + random."""
    zs = random_points(system.curve, doubled, (seed, 1))
    if _is_pencil_multiple(system):
        # members of the pencil multiple are involution-symmetric
        zs = zs + [involution(z) for z in zs]
    return hyperplane_through(system, 2 * Divisor.from_points(zs), (seed, 2))


def generic_roots_hyperplane(system: LinearSystem, seed) -> Hyperplane:
    """multiple_g12 member with n random simple roots in x."""
    xs = [p.x for p in random_points(system.curve, system.n, seed)]
    return Hyperplane.from_vector(P.polyfromroots(xs))

