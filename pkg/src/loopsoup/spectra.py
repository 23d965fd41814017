"""Per-homotopy-class intensities of the loop measure.

The mass of a nontrivial homotopy class factorizes over the steps of its
geodesic loop: each step x -> y contributes P(x,y) * rho(x,y), where
rho(x,y) is the generating function of excursions that leave y away from x
and return, counted with a weight s per step pair. The rho table solves a
monotone polynomial fixed point, so iterating from the constant 1 converges
to it whenever the underlying series is summable.

The trivial class is handled separately: its mass is an integral over the
deformation parameter s of the per-vertex excursion functions.

On regular graphs everything has closed forms, and the class masses with
the killing parametrized by step weight reproduce a classical determinant
identity for non-backtracking walks, checked here in exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import sqrt

import numpy as np
from scipy.integrate import quad

from .errors import NumericError, ValidationError
from .freegroup import (GeodesicClass, enumerate_geodesic_loops,
                        geodesic_representative, multiplicity)
from .graphs import GraphModel, SpanningTreeFrame

_MAX_ITER = 100_000
_RESIDUAL = 1e-12
_BLOWUP = 1e12


@dataclass(frozen=True)
class RhoTable:
    """Excursion generating functions at a fixed step weight s.

    edge[(x, y)] for ordered adjacent pairs: excursions from y avoiding x
    on the first step. vertex[x]: unrestricted excursions from x.
    """

    s: float
    edge: dict[tuple[int, int], float] = field(hash=False)
    vertex: dict[int, float] = field(hash=False)
    residual: float
    iterations: int


@lru_cache(maxsize=None)
def solve_rho(g: GraphModel, s: float = 1.0) -> RhoTable:
    """Solve rho(x,y) = 1 + s * rho(x,y) * sum_{z ~ y, z != x}
    P(y,z) rho(y,z) P(z,y), iterating from the constant 1.

    The map is monotone with nonnegative coefficients, so the iterates
    increase to the least fixed point; divergence (or exceeding the
    iteration cap before reaching residual 1e-12) is reported as a
    non-summable series.
    """
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"step weight s={s} outside [0, 1]")
    p = g.transition
    pairs = [(x, y) for x in range(g.num_vertices) for y in g.neighbors[x]]
    rho = {pair: 1.0 for pair in pairs}
    residual = float("inf")
    for it in range(1, _MAX_ITER + 1):
        residual = 0.0
        new = {}
        for x, y in pairs:
            acc = 0.0
            for z in g.neighbors[y]:
                if z != x:
                    acc += p[y, z] * rho[(y, z)] * p[z, y]
            val = 1.0 + s * acc * rho[(x, y)]
            residual = max(residual, abs(val - rho[(x, y)]))
            new[(x, y)] = val
        rho = new
        if residual <= _RESIDUAL:
            break
        if max(rho.values()) > _BLOWUP:
            raise NumericError(
                f"non-summable tree-contour series at s={s}")
    else:
        raise NumericError(
            f"non-summable tree-contour series at s={s} "
            f"(residual {residual:.2e} after {_MAX_ITER} iterations)")
    vertex = {}
    for x in range(g.num_vertices):
        acc = sum(p[x, y] * rho[(x, y)] * p[y, x] for y in g.neighbors[x])
        denom = 1.0 - s * acc
        if denom <= 0:
            raise NumericError(
                f"non-summable tree-contour series at vertex {x}, s={s}")
        vertex[x] = 1.0 / denom
    return RhoTable(s=s, edge=rho, vertex=vertex,
                    residual=residual, iterations=it)


def class_intensity(g: GraphModel, frame: SpanningTreeFrame,
                    cls: GeodesicClass, s: float = 1.0,
                    rho: RhoTable | None = None) -> float:
    """Loop-measure mass of a nontrivial homotopy class.

    The product of P(x,y) rho(x,y) over the steps of the class's geodesic
    loop, divided by the class multiplicity. Pass a precomputed RhoTable to
    amortize the solve across classes.
    """
    if cls.is_trivial:
        raise ValidationError(
            "the trivial class has no geodesic; use contractible_intensity")
    if rho is None:
        rho = solve_rho(g, s)
    elif rho.s != s:
        raise ValidationError(f"rho table solved at s={rho.s}, need s={s}")
    cycle = geodesic_representative(cls, frame)
    p = g.transition
    prod = 1.0
    for i, x in enumerate(cycle):
        y = cycle[(i + 1) % len(cycle)]
        prod *= p[x, y] * rho.edge[(x, y)]
    return prod / cls.multiplicity


@dataclass(frozen=True)
class RegularForms:
    """Closed forms on a d-regular graph with unit conductances and
    constant killing: the edge and vertex excursion functions, the
    per-geodesic-step intensity factor, and the square root b of the
    discriminant 1 - 4 s (d-1)/(d+kappa)^2."""

    rho_edge: float
    rho_vertex: float
    step_intensity: float
    b: float


def regular_closed_forms(d: int, kappa: float, s: float = 1.0) -> RegularForms:
    """Evaluate the closed forms; a class of geodesic length L then has
    intensity step_intensity**L / multiplicity.

    rho_edge solves rho = 1 + s (d-1) rho^2 / (d+kappa)^2, taking the
    branch that is 1 at s = 0.
    """
    if d < 2:
        raise ValidationError("regular closed forms need degree d >= 2")
    if kappa < 0:
        raise ValidationError("killing must be nonnegative")
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"step weight s={s} outside [0, 1]")
    lam = d + kappa
    disc = 1.0 - 4.0 * s * (d - 1) / lam ** 2
    if disc < 0:
        raise NumericError(f"non-summable tree-contour series at s={s}")
    b = sqrt(disc)
    if s == 0.0:
        rho_edge = 1.0
    else:
        rho_edge = lam ** 2 / (2.0 * s * (d - 1)) * (1.0 - b)
    denom = d - 2 + d * b
    if denom <= 0:
        raise NumericError(f"non-summable tree-contour series at s={s}")
    rho_vertex = 2.0 * (d - 1) / denom
    return RegularForms(rho_edge=rho_edge, rho_vertex=rho_vertex,
                        step_intensity=rho_edge / lam, b=b)


def contractible_intensity(g: GraphModel) -> tuple[float, float]:
    """Mass of the trivial homotopy class, with a quadrature error estimate.

    Integrates sum_x (rho_x(s) - 1) / (2s) over s in [0, 1] by adaptive
    quadrature; the integrand extends analytically to s = 0 with value
    tr(P^2)/2, which is substituted below a small threshold.
    """
    p = g.transition
    limit0 = float(np.trace(p @ p)) / 2.0

    def integrand(s: float) -> float:
        if s < 1e-9:
            return limit0
        table = solve_rho(g, s)
        return sum(table.vertex[x] - 1.0 for x in range(g.num_vertices)) / (2.0 * s)

    value, err = quad(integrand, 0.0, 1.0, epsabs=1e-11, epsrel=1e-11,
                      limit=200)
    return float(value), float(err)


# ---------------------------------------------------------------------------
# determinant identity for geodesic loops on regular graphs
# (exact rational power series)

_Poly = list[Fraction]


def _poly_trim(p: _Poly, n: int) -> _Poly:
    out = p[: n + 1]
    return out + [Fraction(0)] * (n + 1 - len(out))


def _poly_mul(a: _Poly, b: _Poly, n: int) -> _Poly:
    out = [Fraction(0)] * (n + 1)
    for i, ai in enumerate(a[: n + 1]):
        if not ai:
            continue
        for j, bj in enumerate(b[: n + 1 - i]):
            if bj:
                out[i + j] += ai * bj
    return out


def _poly_log(p: _Poly, n: int) -> _Poly:
    """log of a power series with constant term 1, truncated at degree n."""
    assert p[0] == 1
    a = _poly_trim(p, n)
    a[0] = Fraction(0)
    out = [Fraction(0)] * (n + 1)
    power = [Fraction(1)] + [Fraction(0)] * n
    for m in range(1, n + 1):
        power = _poly_mul(power, a, n)
        coef = Fraction((-1) ** (m + 1), m)
        for i, c in enumerate(power):
            out[i] += coef * c
    return out


def _charpoly(a: list[list[Fraction]]) -> _Poly:
    """Coefficients [c_0=1, c_1, ..., c_n] of det(t I - A) = sum c_k t^(n-k),
    by the trace recursion (exact rationals)."""
    n = len(a)
    coeffs = [Fraction(1)]
    m = [[Fraction(0) for _ in range(n)] for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A (M_{k-1} + c_{k-1} I)
        shifted = [[m[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)]
                   for i in range(n)]
        m = [[sum(a[i][l] * shifted[l][j] for l in range(n)) for j in range(n)]
             for i in range(n)]
        coeffs.append(Fraction(-sum(m[i][i] for i in range(n)), k))
    return coeffs


@dataclass(frozen=True)
class IharaSeries:
    """Both sides of the geodesic determinant identity, as power series in
    the step variable: walk_side[n] counts geodesic loops of length n
    weighted by 1/multiplicity; det_side comes from the adjacency
    determinant."""

    walk_side: tuple[Fraction, ...]
    det_side: tuple[Fraction, ...]

    def rows(self) -> list[tuple[int, Fraction, Fraction, Fraction]]:
        return [(n, l, r, l - r)
                for n, (l, r) in enumerate(zip(self.walk_side, self.det_side))]

    def agree(self) -> bool:
        return self.walk_side == self.det_side


def ihara_check(g: GraphModel, max_degree: int) -> IharaSeries:
    """Compare geodesic-loop counts against the determinant series
    -(|E| - |X|) log(1 - u^2) - log det(I - u A + u^2 (d-1) I),
    coefficient by coefficient through max_degree, in exact arithmetic.

    Requires a d-regular graph with unit conductances (the identity is
    stated for the adjacency matrix).
    """
    if max_degree < 1:
        raise ValidationError("max_degree must be >= 1")
    degs = {g.degree(x) for x in range(g.num_vertices)}
    if len(degs) != 1:
        raise ValidationError("determinant identity needs a regular graph")
    if any(c != 1.0 for c in g.conductance.values()):
        raise ValidationError("determinant identity needs unit conductances")
    d = degs.pop()
    n_v = g.num_vertices
    l = max_degree

    walk = [Fraction(0)] * (l + 1)
    for cycle in enumerate_geodesic_loops(g, l):
        walk[len(cycle)] += Fraction(1, multiplicity(cycle))

    adj = [[Fraction(0)] * n_v for _ in range(n_v)]
    for u, v in g.edges:
        adj[u][v] = Fraction(1)
        adj[v][u] = Fraction(1)
    cp = _charpoly(adj)
    # det(f(u) I - u A) with f(u) = 1 + (d-1) u^2 equals
    # sum_k c_k u^k f(u)^(n-k)
    f = [Fraction(1), Fraction(0), Fraction(d - 1)]
    fpow = [[Fraction(1)]]
    for _ in range(n_v):
        fpow.append(_poly_mul(fpow[-1], f, l))
    det = [Fraction(0)] * (l + 1)
    for k, ck in enumerate(cp):
        if k > l or not ck:
            continue
        for i, c in enumerate(fpow[n_v - k]):
            if k + i <= l:
                det[k + i] += ck * c
    one_minus_u2 = _poly_trim([Fraction(1), Fraction(0), Fraction(-1)], l)
    rhs_log = _poly_log(det, l)
    u2_log = _poly_log(one_minus_u2, l)
    chi = len(g.edges) - n_v
    rhs = [-chi * a - b for a, b in zip(u2_log, rhs_log)]
    return IharaSeries(walk_side=tuple(walk), det_side=tuple(_poly_trim(rhs, l)))
