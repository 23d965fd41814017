"""Distributions of homology-valued functionals of the loop ensemble.

Twisting the transition matrix by a character of the fundamental group
multiplies each loop's weight by the character of its class, so log
determinants of twisted matrices are Fourier transforms of the loop
measure pushed to homology. Inverting over a torus grid (first homology),
over unitary representations of a finite group (holonomy classes), or over
finite Heisenberg-type representations (second homology mod p) turns
determinant evaluations into masses and field laws.

All twists used here are unitary and compatible with the conductance
symmetry C(x,y) = C(y,x), so every twisted matrix is similar to a
Hermitian one; determinants are evaluated through real eigenvalues, which
keeps the logarithms on the principal branch by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import NumericError, ValidationError
from .graphs import GraphModel, SpanningTreeFrame, green_data
from .soup import total_mass

_IMAG_TOL = 1e-10


def _assert_real(z: complex, what: str) -> float:
    scale = max(1.0, abs(z))
    if abs(z.imag) > _IMAG_TOL * scale:
        raise NumericError(f"{what} has imaginary residue {z.imag:.3e}")
    return float(z.real)


def twisted_matrix(g: GraphModel, frame: SpanningTreeFrame,
                   theta: Sequence[float]) -> np.ndarray:
    """Transition matrix with each cogenerator crossing twisted by a phase:
    step x -> y over cogenerator j picks up exp(+-2 pi i theta_j). theta
    lives on the torus [0, 1]^rank."""
    theta = tuple(float(t) for t in theta)
    if len(theta) != frame.rank:
        raise ValidationError(
            f"theta has length {len(theta)}, frame rank is {frame.rank}")
    p = g.transition.astype(complex)
    for j, (u, v) in enumerate(frame.cogenerators):
        phase = np.exp(2j * np.pi * theta[j])
        p[u, v] *= phase
        p[v, u] *= np.conj(phase)
    return p


def _sym_eigvals(g: GraphModel, block: Callable[[int, int], np.ndarray],
                 dim: int) -> np.ndarray:
    """Eigenvalues of the Hermitian-symmetrized twisted transition matrix.

    block(x, y) is the unitary attached to the step x -> y (conjugate
    transpose of block(y, x)); the symmetrized matrix has (x, y) block
    C(x,y) block(x,y) / sqrt(lam_x lam_y), which is Hermitian, and shares
    its spectrum with the twisted P."""
    n = g.num_vertices
    lam = g.lam
    s = np.zeros((n * dim, n * dim), dtype=complex)
    for (u, v), c in g.conductance.items():
        w = c / np.sqrt(lam[u] * lam[v])
        s[u * dim:(u + 1) * dim, v * dim:(v + 1) * dim] = w * block(u, v)
        s[v * dim:(v + 1) * dim, u * dim:(u + 1) * dim] = w * block(v, u)
    return np.linalg.eigvalsh(s)


def _logdet_one_minus(eigs: np.ndarray, what: str) -> float:
    gaps = 1.0 - eigs
    if np.min(gaps) <= 1e-14:
        raise NumericError(
            f"massless/recurrent twist: det(I - {what}) vanishes")
    return float(np.sum(np.log(gaps)))


def _scalar_block(frame: SpanningTreeFrame, theta: Sequence[float]
                  ) -> Callable[[int, int], np.ndarray]:
    one = np.ones((1, 1), dtype=complex)

    def block(x: int, y: int) -> np.ndarray:
        letter = frame.crossing(x, y)
        if letter == 0:
            return one
        sign = 1.0 if letter > 0 else -1.0
        return one * np.exp(2j * np.pi * sign * theta[abs(letter) - 1])

    return block


def twisted_log_det(g: GraphModel, frame: SpanningTreeFrame,
                    theta: Sequence[float]) -> float:
    """log det(I - P^(theta)), exactly real by the Hermitian route."""
    theta = tuple(float(t) for t in theta)
    if len(theta) != frame.rank:
        raise ValidationError(
            f"theta has length {len(theta)}, frame rank is {frame.rank}")
    eigs = _sym_eigvals(g, _scalar_block(frame, theta), 1)
    return _logdet_one_minus(eigs, "P^theta")


def _grid_iter(rank: int, m: int) -> Iterable[tuple[int, ...]]:
    return np.ndindex(*([m] * rank))


def homology1_grid(g: GraphModel, frame: SpanningTreeFrame,
                   m: int) -> np.ndarray:
    """log det(I - P^(k/m)) over the full torus grid, shape (m,) * rank."""
    if m < 2:
        raise ValidationError("grid size must be >= 2")
    out = np.empty((m,) * frame.rank)
    for k in _grid_iter(frame.rank, m):
        out[k] = twisted_log_det(g, frame, [ki / m for ki in k])
    return out


def _intensity_from_grid(grid: np.ndarray, h: tuple[int, ...]) -> float:
    m = grid.shape[0] if grid.ndim else 1
    transformed = np.fft.fftn(grid)
    idx = tuple(hi % m for hi in h)
    return _assert_real(-transformed[idx] / grid.size, "homology1 intensity")


def _check_h(h: Sequence[int], rank: int) -> tuple[int, ...]:
    h = tuple(h)
    if len(h) != rank:
        raise ValidationError(f"h has length {len(h)}, frame rank is {rank}")
    if any(not isinstance(x, (int, np.integer)) for x in h):
        raise ValidationError(f"h must be integer, got {h}")
    return tuple(int(x) for x in h)


_REFINE_START = 64
_REFINE_CAP = 4096
_REFINE_TOL = 1e-8


def homology1_intensity(g: GraphModel, frame: SpanningTreeFrame,
                        h: Sequence[int], M: int | None = None) -> float:
    """Mass of loops with total winding vector h.

    Fourier inversion of the twisted log determinant over an M-point torus
    grid; the grid value is the h-aliased sum, i.e. it includes every
    winding congruent to h mod M, so M must dominate the windings carrying
    non-negligible mass. With M omitted the grid starts at 64 points per
    dimension and doubles until refinement moves the value by < 1e-8.
    """
    h = _check_h(h, frame.rank)
    if frame.rank == 0:
        return total_mass(g)
    if M is not None:
        return _intensity_from_grid(homology1_grid(g, frame, M), h)
    m = _REFINE_START
    val = _intensity_from_grid(homology1_grid(g, frame, m), h)
    while m < _REFINE_CAP:
        m *= 2
        refined = _intensity_from_grid(homology1_grid(g, frame, m), h)
        if abs(refined - val) < _REFINE_TOL:
            return refined
        val = refined
    raise NumericError(f"grid refinement did not settle by M={_REFINE_CAP}")


def homology1_intensity_mod(g: GraphModel, frame: SpanningTreeFrame,
                            h: Sequence[int], p: int) -> float:
    """Mass of loops whose winding vector is congruent to h mod p: the
    p-point grid computes exactly this aliased sum."""
    if p < 2:
        raise ValidationError("modulus must be >= 2")
    h = _check_h(h, frame.rank)
    if frame.rank == 0:
        return total_mass(g)
    return _intensity_from_grid(homology1_grid(g, frame, p), h)


def homology1_field_grid(g: GraphModel, frame: SpanningTreeFrame,
                         alpha: float, M: int) -> np.ndarray:
    """P(total soup winding = h) for every h on the mod-M grid.

    The Poisson characteristic functional turns the twisted determinant
    ratio into the characteristic function of the winding field; inverting
    on the grid gives probabilities aliased mod M. They are nonnegative
    and sum to 1 exactly (the k=0 character is 1).
    """
    if alpha <= 0:
        raise ValidationError("alpha must be positive")
    grid = homology1_grid(g, frame, M)
    char = np.exp(alpha * (grid.flat[0] - grid))
    probs = np.fft.fftn(char) / char.size
    residue = float(np.max(np.abs(probs.imag)))
    if residue > _IMAG_TOL:
        raise NumericError(f"field law has imaginary residue {residue:.3e}")
    return probs.real


def homology1_field_law(g: GraphModel, frame: SpanningTreeFrame,
                        alpha: float, h: Sequence[int],
                        M: int | None = None) -> float:
    """P(total soup winding = h), h-aliased mod the grid size."""
    h = _check_h(h, frame.rank)
    if frame.rank == 0:
        return 1.0 if all(x == 0 for x in h) else 0.0
    if M is not None:
        grid = homology1_field_grid(g, frame, alpha, M)
        return float(grid[tuple(hi % M for hi in h)])
    m = _REFINE_START
    val = float(homology1_field_grid(g, frame, alpha, m)[
        tuple(hi % m for hi in h)])
    while m < _REFINE_CAP:
        m *= 2
        refined = float(homology1_field_grid(g, frame, alpha, m)[
            tuple(hi % m for hi in h)])
        if abs(refined - val) < _REFINE_TOL:
            return refined
        val = refined
    raise NumericError(f"grid refinement did not settle by M={_REFINE_CAP}")


@dataclass(frozen=True)
class JacobianVolumeReport:
    """Informational cross-check: the volume sqrt(det J) of the edge
    Jacobian against the unit volume of the torus parametrization of
    characters. The two describe different coordinates on the character
    group; no identity between them is asserted."""

    jacobian_volume: float
    torus_volume: float
    informational: bool


def jacobian_volume_check(g: GraphModel,
                          frame: SpanningTreeFrame) -> JacobianVolumeReport:
    gd = green_data(g, frame)
    return JacobianVolumeReport(jacobian_volume=gd.volume, torus_volume=1.0,
                                informational=True)


# ---------------------------------------------------------------------------
# holonomy under a finite-group connection


def _check_unitary(u: np.ndarray, what: str) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValidationError(f"{what} is not a square matrix")
    if not np.allclose(u @ u.conj().T, np.eye(u.shape[0]), atol=1e-10):
        raise ValidationError(f"{what} is not unitary")
    return u


def holonomy_log_det(g: GraphModel,
                     unitaries: Mapping[tuple[int, int], np.ndarray]) -> float:
    """-(1/dim) log det(I - P tensored with the edge unitaries).

    `unitaries` maps every oriented edge (both directions) to a unitary,
    with the reverse orientation carrying the conjugate transpose; this is
    validated. The result is the measure of all loops weighted by the
    normalized trace of their holonomy.
    """
    mats: dict[tuple[int, int], np.ndarray] = {}
    dim = None
    for u, v in g.edges:
        for a, b in ((u, v), (v, u)):
            if (a, b) not in unitaries:
                raise ValidationError(f"missing unitary for oriented edge ({a},{b})")
            mats[(a, b)] = _check_unitary(unitaries[(a, b)], f"U[({a},{b})]")
        if dim is None:
            dim = mats[(u, v)].shape[0]
        if mats[(u, v)].shape[0] != dim:
            raise ValidationError("edge unitaries have mixed dimensions")
        if not np.allclose(mats[(v, u)], mats[(u, v)].conj().T, atol=1e-10):
            raise ValidationError(
                f"U[({v},{u})] is not the conjugate transpose of U[({u},{v})]")
    if dim is None:
        return 0.0
    eigs = _sym_eigvals(g, lambda x, y: mats[(x, y)], dim)
    return -_logdet_one_minus(eigs, "holonomy twist") / dim


@dataclass(frozen=True)
class GroupData:
    """A finite group given extensionally: its elements, the partition
    into conjugacy classes, and a complete list of irreducible unitary
    representations as element -> matrix maps."""

    elements: tuple
    classes: tuple[tuple, ...]
    irreps: tuple[dict, ...] = field(hash=False)

    def character(self, irrep_index: int, element) -> complex:
        return complex(np.trace(self.irreps[irrep_index][element]))

    @property
    def order(self) -> int:
        return len(self.elements)


def group_data(elements: Iterable, classes: Iterable[Iterable],
               irreps: Iterable[Mapping]) -> GroupData:
    """Validate and pack group data.

    Checks that the classes partition the elements, that every irrep
    assigns a unitary to every element with characters constant on
    classes, that squared dimensions sum to the group order, and that
    characters satisfy row orthogonality.
    """
    elements = tuple(elements)
    classes = tuple(tuple(c) for c in classes)
    listed = [e for c in classes for e in c]
    if len(listed) != len(set(listed)) or set(listed) != set(elements):
        raise ValidationError("classes do not partition the elements")
    packed = []
    for k, rep in enumerate(irreps):
        missing = [e for e in elements if e not in rep]
        if missing:
            raise ValidationError(f"irrep {k} is missing element {missing[0]!r}")
        rep = {e: _check_unitary(rep[e], f"irrep {k} at {e!r}") for e in elements}
        packed.append(rep)
    gd = GroupData(elements=elements, classes=classes, irreps=tuple(packed))
    n = gd.order
    if sum(rep[elements[0]].shape[0] ** 2 for rep in gd.irreps) != n:
        raise ValidationError("irrep dimensions do not sum (squared) to |G|")
    chars = []
    for k in range(len(gd.irreps)):
        row = []
        for c in classes:
            vals = [gd.character(k, e) for e in c]
            if any(abs(v - vals[0]) > 1e-8 for v in vals):
                raise ValidationError(
                    f"character of irrep {k} is not constant on class {c!r}")
            row.append(vals[0])
        chars.append(row)
    for a in range(len(chars)):
        for b in range(len(chars)):
            inner = sum(len(c) * chars[a][i] * np.conj(chars[b][i])
                        for i, c in enumerate(classes))
            target = n if a == b else 0.0
            if abs(inner - target) > 1e-8 * n:
                raise ValidationError(
                    f"character rows {a}, {b} fail orthogonality")
    return gd


def holonomy_class_intensities(g: GraphModel,
                               connection: Mapping[tuple[int, int], object],
                               gd: GroupData,
                               alpha: float = 1.0) -> dict[tuple, float]:
    """Expected number of loops whose holonomy lands in each conjugacy
    class: alpha (|C|/|G|) sum over irreps of conj(character) * dim *
    holonomy_log_det under that irrep.

    `connection` maps every oriented edge to a group element, the two
    orientations to mutually inverse ones (validated through the irreps).
    """
    if alpha <= 0:
        raise ValidationError("alpha must be positive")
    for u, v in g.edges:
        for a, b in ((u, v), (v, u)):
            if (a, b) not in connection:
                raise ValidationError(f"missing connection on edge ({a},{b})")
            if connection[(a, b)] not in gd.irreps[0]:
                raise ValidationError(
                    f"connection value {connection[(a, b)]!r} is not a group element")
    per_irrep = []
    for k, rep in enumerate(gd.irreps):
        mats = {e: rep[connection[e]]
                for u, v in g.edges for e in ((u, v), (v, u))}
        for u, v in g.edges:
            if not np.allclose(mats[(v, u)], mats[(u, v)].conj().T, atol=1e-10):
                raise ValidationError(
                    f"connection on edge ({u},{v}) is not inverted by reversal")
        dim = rep[gd.elements[0]].shape[0]
        per_irrep.append((dim, holonomy_log_det(g, mats)))
    out: dict[tuple, float] = {}
    for i, cls in enumerate(gd.classes):
        acc = 0.0 + 0.0j
        for k, (dim, h) in enumerate(per_irrep):
            acc += np.conj(gd.character(k, cls[0])) * dim * h
        weight = alpha * len(cls) / gd.order
        out[cls] = weight * _assert_real(acc, f"class intensity {cls!r}")
    return out


# ---------------------------------------------------------------------------
# finite Heisenberg-type representations and second homology mod p


def _is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def _check_skew(h, r: int, p: int) -> tuple[tuple[int, ...], ...]:
    mat = [[0] * r for _ in range(r)]
    if isinstance(h, Mapping):
        for (i, j), val in h.items():
            if not (1 <= i < j <= r):
                raise ValidationError(f"pair index {(i, j)} not 1 <= i < j <= {r}")
            mat[i - 1][j - 1] = int(val) % p
            mat[j - 1][i - 1] = (-int(val)) % p
    else:
        rows = [list(row) for row in h]
        if len(rows) != r or any(len(row) != r for row in rows):
            raise ValidationError(f"skew matrix must be {r}x{r}")
        for i in range(r):
            for j in range(r):
                mat[i][j] = int(rows[i][j]) % p
        for i in range(r):
            if mat[i][i] % p:
                raise ValidationError("skew matrix has nonzero diagonal")
            for j in range(r):
                if (mat[i][j] + mat[j][i]) % p:
                    raise ValidationError(
                        f"matrix is not skew mod {p} at ({i + 1},{j + 1})")
    return tuple(tuple(row) for row in mat)


@dataclass(frozen=True)
class NilpotentRep:
    """Unitary representation, indexed by a skew matrix h mod p, of the
    group of pairs (a, c) with a in (Z_p)^r and c skew, multiplying as
    (a, c)(a', c') = (a + a', c + c' + (a (x) a' - a' (x) a)/2), all mod p.

    Acts on functions on (Z_p)^r by a character times a shear:
    (U[(a,c)] psi)(x) = omega^(<c,h> + <a,x>) psi(x - h a), omega =
    exp(2 pi i / p), with full-sum pairings <c,h> = sum_ij c_ij h_ij and
    <a,x> = sum_i a_i x_i. Normalized traces vanish off a = 0 and equal
    omega^<c,h> there.
    """

    p: int
    r: int
    h: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return self.p ** self.r

    def _index(self, x: tuple[int, ...]) -> int:
        idx = 0
        for xi in x:
            idx = idx * self.p + (xi % self.p)
        return idx

    def matrix(self, a: Sequence[int], c) -> np.ndarray:
        """U[(a, c)] as a dim x dim unitary."""
        p, r = self.p, self.r
        a = [int(x) % p for x in a]
        if len(a) != r:
            raise ValidationError(f"a has length {len(a)}, expected {r}")
        cm = _check_skew(c, r, p) if not isinstance(c, tuple) else c
        pair_ch = sum(cm[i][j] * self.h[i][j] for i in range(r)
                      for j in range(r)) % p
        omega = np.exp(2j * np.pi / p)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        shift = [sum(self.h[i][j] * a[j] for j in range(r)) % p
                 for i in range(r)]
        for x in np.ndindex(*([p] * r)):
            y = tuple((x[i] - shift[i]) % p for i in range(r))
            phase = (pair_ch + sum(a[i] * x[i] for i in range(r))) % p
            out[self._index(x), self._index(y)] = omega ** phase
        return out

    def generator(self, i: int, sign: int = 1) -> np.ndarray:
        """U for the i-th standard generator (e_i, 0) or its inverse."""
        if not 1 <= i <= self.r:
            raise ValidationError(f"generator index {i} out of 1..{self.r}")
        a = [0] * self.r
        a[i - 1] = sign % self.p
        zero = tuple(tuple(0 for _ in range(self.r)) for _ in range(self.r))
        return self.matrix(a, zero)

    def compose(self, ac1, ac2):
        """Group law on pairs ((a, c) given as (vector, skew matrix))."""
        p, r = self.p, self.r
        a1, c1 = [int(x) % p for x in ac1[0]], _check_skew(ac1[1], r, p)
        a2, c2 = [int(x) % p for x in ac2[0]], _check_skew(ac2[1], r, p)
        inv2 = (p + 1) // 2
        c = tuple(tuple(
            (c1[i][j] + c2[i][j] + inv2 * (a1[i] * a2[j] - a2[i] * a1[j])) % p
            for j in range(r)) for i in range(r))
        return (tuple((x + y) % p for x, y in zip(a1, a2)), c)


def nilpotent_rep(p: int, r: int, h) -> NilpotentRep:
    """Build the representation for skew matrix h mod p (p an odd prime),
    verifying unitarity and the homomorphism property on all generator
    pairs before returning it."""
    if not isinstance(p, int) or not _is_odd_prime(p):
        raise ValidationError(f"p must be an odd prime, got {p}")
    if r < 1:
        raise ValidationError("rank must be >= 1")
    rep = NilpotentRep(p=p, r=r, h=_check_skew(h, r, p))
    zero = tuple(tuple(0 for _ in range(r)) for _ in range(r))
    gens = {}
    for i in range(1, r + 1):
        u = rep.generator(i)
        if not np.allclose(u @ u.conj().T, np.eye(rep.dim), atol=1e-10):
            raise NumericError(f"generator {i} is not unitary")
        a = [0] * r
        a[i - 1] = 1
        gens[i] = (tuple(a), zero, u)
    for i in range(1, r + 1):
        for j in range(1, r + 1):
            ai, ci, ui = gens[i]
            aj, cj, uj = gens[j]
            prod_elem = rep.compose((ai, ci), (aj, cj))
            if not np.allclose(ui @ uj, rep.matrix(*prod_elem), atol=1e-10):
                raise NumericError(
                    f"homomorphism fails on generators ({i}, {j})")
    return rep


def _skew_pairs(r: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, r + 1) for j in range(i + 1, r + 1)]


def _check_m(m, r: int, p: int) -> dict[tuple[int, int], int]:
    pairs = _skew_pairs(r)
    out = {pair: 0 for pair in pairs}
    if isinstance(m, Mapping):
        for key, val in m.items():
            key = tuple(key)
            if key not in out:
                raise ValidationError(f"pair index {key} not 1 <= i < j <= {r}")
            out[key] = int(val) % p
    else:
        mat = _check_skew(m, r, p)
        for i, j in pairs:
            out[(i, j)] = mat[i - 1][j - 1]
    return out


def _rep_block(frame: SpanningTreeFrame, rep: NilpotentRep,
               theta: Sequence[float] | None) -> Callable[[int, int], np.ndarray]:
    eye = np.eye(rep.dim, dtype=complex)
    fwd = {i: rep.generator(i) for i in range(1, frame.rank + 1)}
    bwd = {i: fwd[i].conj().T for i in fwd}

    def block(x: int, y: int) -> np.ndarray:
        letter = frame.crossing(x, y)
        if letter == 0:
            return eye
        mat = fwd[letter] if letter > 0 else bwd[-letter]
        if theta is not None:
            sign = 1.0 if letter > 0 else -1.0
            mat = mat * np.exp(2j * np.pi * sign * theta[abs(letter) - 1])
        return mat

    return block


def _heisenberg_trace(g: GraphModel, frame: SpanningTreeFrame,
                      rep: NilpotentRep,
                      theta: Sequence[float] | None = None) -> float:
    """-(1/p^r) log det(I - P twisted by the representation), optionally
    with an extra torus phase on each crossing."""
    eigs = _sym_eigvals(g, _rep_block(frame, rep, theta), rep.dim)
    return -_logdet_one_minus(eigs, "Heisenberg twist") / rep.dim


def homology2_intensity(g: GraphModel, frame: SpanningTreeFrame,
                        m, p: int, alpha: float = 1.0) -> float:
    """alpha times the mass of loops with winding vector congruent to 0
    and second invariant congruent to m, both mod p.

    Inverse Fourier transform over skew matrices h mod p of the normalized
    Heisenberg-twisted log determinants; the pairing <m, h> is the full
    skew sum, i.e. 2 sum_{i<j} m_ij h_ij. Choosing p beyond twice any
    invariant value carrying mass removes the mod-p aliasing, which can be
    certified by agreement between two such primes.
    """
    if alpha <= 0:
        raise ValidationError("alpha must be positive")
    if not isinstance(p, int) or not _is_odd_prime(p):
        raise ValidationError(f"p must be an odd prime, got {p}")
    r = frame.rank
    mm = _check_m(m, r, p)
    pairs = _skew_pairs(r)
    q = len(pairs)
    omega = np.exp(2j * np.pi / p)
    acc = 0.0 + 0.0j
    for hvals in np.ndindex(*([p] * q)):
        h = {pair: int(v) for pair, v in zip(pairs, hvals)}
        rep = nilpotent_rep(p, r, h)
        t = _heisenberg_trace(g, frame, rep)
        pairing = 2 * sum(mm[pair] * h[pair] for pair in pairs)
        acc += t * omega ** (-pairing % p)
    val = _assert_real(acc / p ** q, "homology2 intensity") * alpha
    if val < -1e-9:
        raise NumericError(f"homology2 intensity {val:.3e} is negative")
    return val


def homology2_field_law(g: GraphModel, frame: SpanningTreeFrame,
                        alpha: float, m, p: int, M: int = 8) -> float:
    """P(second-homology field of the soup = m mod p), the field summing
    the invariant over sampled loops with winding exactly zero.

    The exact-zero winding filter comes from averaging an extra torus
    phase over an M-point grid per generator (aliasing by multiples of
    lcm(M, p), negligible once loops that long carry no mass); the mod-p
    law is then a finite Fourier inversion of the Poisson characteristic
    function over skew h.
    """
    if alpha <= 0:
        raise ValidationError("alpha must be positive")
    if not isinstance(p, int) or not _is_odd_prime(p):
        raise ValidationError(f"p must be an odd prime, got {p}")
    if M < 2:
        raise ValidationError("grid size must be >= 2")
    r = frame.rank
    mm = _check_m(m, r, p)
    pairs = _skew_pairs(r)
    q = len(pairs)
    omega = np.exp(2j * np.pi / p)
    s_vals = {}
    for hvals in np.ndindex(*([p] * q)):
        h = {pair: int(v) for pair, v in zip(pairs, hvals)}
        rep = nilpotent_rep(p, r, h)
        acc = 0.0
        for k in np.ndindex(*([M] * r)):
            acc += _heisenberg_trace(g, frame, rep,
                                     theta=[ki / M for ki in k])
        s_vals[hvals] = acc / M ** r
    base = s_vals[(0,) * q]
    acc = 0.0 + 0.0j
    for hvals, s in s_vals.items():
        pairing = 2 * sum(mm[pair] * int(v) for pair, v in zip(pairs, hvals))
        acc += np.exp(alpha * (s - base)) * omega ** (-pairing % p)
    val = _assert_real(acc / p ** q, "homology2 field law")
    if val < -1e-9:
        raise NumericError(f"homology2 field probability {val:.3e} is negative")
    return min(max(val, 0.0), 1.0)
