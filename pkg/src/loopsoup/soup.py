"""Loop measure on a finite weighted graph, truncation control, exhaustive
enumeration by homotopy class, and Poisson ensemble sampling.

The measure lives on discrete based loops: mu_based(l) = (1/n) prod P over
the n steps of l. Forgetting the basepoint and dividing by the rotational
multiplicity gives the unbased loop measure mu; its total mass is
-log det(I - P), finite exactly when some killing rate is positive.

A Poisson ensemble ("soup") with rate alpha carries loop counts that are
Poisson with mean alpha * mu(event) for any event of loops; the sampler
draws such ensembles truncated at a configured maximum length, with the
truncation certified by a geometric tail bound.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .errors import ConfigError, NumericError, ValidationError
from .freegroup import (TRIVIAL, BasedLoop, GeodesicClass, canonical_class,
                        loop_to_word, multiplicity)
from .graphs import GraphModel, SpanningTreeFrame
from .signature import homology1


def loop_weight(g: GraphModel, loop: BasedLoop) -> tuple[float, float]:
    """(based weight, unbased loop weight) of a discrete loop.

    Based weight is (1/n) times the product of transition probabilities;
    the loop weight multiplies by the number of distinct rotations, i.e.
    equals (product of P) / multiplicity.
    """
    loop.check_edges(g)
    p = g.transition
    prod = 1.0
    vs = loop.vertices
    for a, b in zip(vs, vs[1:]):
        prod *= p[a, b]
    n = loop.length
    mult = multiplicity(vs[:-1])
    based = prod / n
    unbased = prod / mult
    assert abs(unbased - (n / mult) * based) <= 1e-12 * abs(unbased)
    return based, unbased


def total_mass(g: GraphModel) -> float:
    """-log det(I - P); the full loop measure mass. Infinite (rejected)
    when the killing vanishes identically."""
    if not any(g.killing):
        # P is stochastic, I - P is exactly singular; roundoff can hide it
        raise NumericError("massless/recurrent chain: det(I - P) vanishes")
    sign, logdet = np.linalg.slogdet(np.eye(g.num_vertices) - g.transition)
    if sign <= 0 or not np.isfinite(logdet):
        raise NumericError("massless/recurrent chain: det(I - P) is not positive")
    return -logdet


def spectral_radius(g: GraphModel) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(g.transition))))


def tail_bound(g: GraphModel, n_max: int) -> float:
    """Upper bound on the measure of loops longer than n_max:
    |X| rho^(n_max+1) / ((n_max+1)(1-rho)) with rho the spectral radius."""
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    rho = spectral_radius(g)
    if rho >= 1.0:
        raise NumericError("spectral radius >= 1; tail does not converge")
    return g.num_vertices * rho ** (n_max + 1) / ((n_max + 1) * (1.0 - rho))


def truncated_mass(g: GraphModel, n_max: int) -> float:
    """Mass of loops of length <= n_max: sum_{n<=n_max} tr(P^n)/n."""
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    p = g.transition
    power = np.eye(g.num_vertices)
    out = 0.0
    for n in range(1, n_max + 1):
        power = power @ p
        out += np.trace(power) / n
    return float(out)


def _hop_distances(g: GraphModel) -> np.ndarray:
    n = g.num_vertices
    dist = np.full((n, n), n + 1, dtype=int)
    for s in range(n):
        dist[s, s] = 0
        queue = [s]
        while queue:
            nxt = []
            for v in queue:
                for u in g.neighbors[v]:
                    if dist[s, u] > dist[s, v] + 1:
                        dist[s, u] = dist[s, v] + 1
                        nxt.append(u)
            queue = nxt
    return dist


@dataclass(frozen=True)
class EnumeratedMeasure:
    """Exhaustive class masses of loops of length <= n_max, with the
    certified bound on everything beyond the truncation."""

    masses: dict[GeodesicClass, float] = field(hash=False)
    n_max: int
    tail: float

    def __getitem__(self, cls: GeodesicClass) -> float:
        return self.masses[cls]

    def get(self, cls: GeodesicClass, default: float = 0.0) -> float:
        return self.masses.get(cls, default)

    def items(self) -> Iterator[tuple[GeodesicClass, float]]:
        return iter(self.masses.items())

    def winding(self, rank: int) -> dict[tuple[int, ...], float]:
        return winding_masses(self.masses, rank)


def enumerate_measure(g: GraphModel, frame: SpanningTreeFrame,
                      n_max: int) -> EnumeratedMeasure:
    """Mass of every homotopy class among loops of length <= n_max.

    Dynamic program over (current vertex, reduced crossing word from the
    base); a step to u either extends the word by a crossing letter or
    cancels the last letter. Branches that cannot return to the base in the
    remaining steps are pruned. The trivial class collects the contractible
    mass. Classes group based loops correctly: a class whose loops have n
    steps and multiplicity m has n/m based representatives per loop, each
    weighing (1/n) prod P, totalling prod P / m.
    """
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    p = g.transition
    dist = _hop_distances(g)
    out: dict[GeodesicClass, float] = {}
    for base in range(g.num_vertices):
        # weight of each (vertex, word) state after n steps
        states: dict[tuple[int, tuple[int, ...]], float] = {(base, ()): 1.0}
        for n in range(1, n_max + 1):
            nxt: dict[tuple[int, tuple[int, ...]], float] = {}
            remaining = n_max - n
            for (v, word), wt in states.items():
                for u in g.neighbors[v]:
                    if dist[u, base] > remaining:
                        continue
                    letter = frame.crossing(v, u)
                    if letter and word and word[-1] == -letter:
                        nw = word[:-1]
                    elif letter:
                        nw = word + (letter,)
                    else:
                        nw = word
                    key = (u, nw)
                    nxt[key] = nxt.get(key, 0.0) + wt * p[v, u]
            states = nxt
            for (v, word), wt in states.items():
                if v == base:
                    cls = canonical_class(word)
                    out[cls] = out.get(cls, 0.0) + wt / n
    return EnumeratedMeasure(out, n_max, tail_bound(g, n_max))


def winding_masses(masses: dict[GeodesicClass, float],
                   rank: int) -> dict[tuple[int, ...], float]:
    """Regroup class masses by total winding vector."""
    out: dict[tuple[int, ...], float] = {}
    for cls, m in masses.items():
        h = homology1(cls.word, rank=rank)
        out[h] = out.get(h, 0.0) + m
    return out


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class MeasureConfig:
    """Sampling configuration: Poisson rate, truncation length, certified
    tail tolerance at that truncation, and the base seed."""

    alpha: float = 1.0
    n_max: int = 24
    tail_tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ConfigError("alpha must be positive")
        if self.n_max < 1:
            raise ConfigError("n_max must be >= 1")
        if self.tail_tol <= 0:
            raise ConfigError("tail_tol must be positive")


@dataclass(frozen=True)
class SampledSoup:
    """One Poisson draw: the sampled loops plus the draw metadata."""

    loops: tuple[BasedLoop, ...]
    seed: int
    alpha: float
    n_max: int

    def class_counts(self, frame: SpanningTreeFrame) -> Counter:
        c: Counter = Counter()
        for l in self.loops:
            c[canonical_class(loop_to_word(l, frame))] += 1
        return c

    def total_winding(self, frame: SpanningTreeFrame) -> tuple[int, ...]:
        total = [0] * frame.rank
        for l in self.loops:
            for i, w in enumerate(homology1(l, frame)):
                total[i] += w
        return tuple(total)


@dataclass(frozen=True)
class OccupationField:
    """Oriented-edge traversal counts of a soup, N[(u, v)]."""

    edge_counts: dict[tuple[int, int], int] = field(hash=False)

    def current(self, u: int, v: int) -> int:
        return self.edge_counts.get((u, v), 0) - self.edge_counts.get((v, u), 0)

    def rows(self) -> list[tuple[int, int, int, int]]:
        """(u, v, N, Ncheck) per traversed oriented edge, sorted."""
        return [(u, v, n, self.current(u, v))
                for (u, v), n in sorted(self.edge_counts.items())]


def occupation(soup: SampledSoup) -> OccupationField:
    """Aggregate oriented-edge counts. Every closed walk enters each vertex
    as often as it leaves it, so the counts are balanced at every vertex;
    violation would be a sampler bug, hence asserted."""
    counts: Counter = Counter()
    for l in soup.loops:
        vs = l.vertices
        for a, b in zip(vs, vs[1:]):
            counts[(a, b)] += 1
    balance: Counter = Counter()
    for (a, b), n in counts.items():
        balance[a] += n
        balance[b] -= n
    assert all(v == 0 for v in balance.values())
    return OccupationField(dict(counts))


class LoopSoupSampler:
    """Draws Poisson loop ensembles truncated at n_max steps.

    The loop count is Poisson(alpha * W) with W the truncated mass; each
    loop picks (base x, length n) with weight (1/n)(P^n)_xx and fills in a
    bridge from x back to x, one step at a time, each step conditioned on
    returning in the remaining steps.

    Randomness layout, fixed for reproducibility: the count and the
    (base, length) draws use the generator seeded from
    SeedSequence(seed, spawn_key=(0,)); the k-th loop's bridge steps use
    SeedSequence(seed, spawn_key=(1, k)). Byte-identical soups for equal
    (graph, config, seed) follow from this layout.
    """

    def __init__(self, g: GraphModel, frame: SpanningTreeFrame,
                 alpha: float = 1.0, n_max: int = 24):
        if alpha <= 0:
            raise ConfigError("alpha must be positive")
        if n_max < 1:
            raise ConfigError("n_max must be >= 1")
        self.graph = g
        self.frame = frame
        self.alpha = alpha
        self.n_max = n_max
        p = g.transition
        self.powers = [np.eye(g.num_vertices)]
        for _ in range(n_max):
            self.powers.append(self.powers[-1] @ p)
        items: list[tuple[int, int]] = []
        weights: list[float] = []
        for n in range(1, n_max + 1):
            for x in range(g.num_vertices):
                w = self.powers[n][x, x] / n
                if w > 0:
                    items.append((x, n))
                    weights.append(w)
        self.mass = float(sum(weights))
        self.items = items
        self.probs = np.asarray(weights) / self.mass

    def _bridge(self, x: int, n: int, rng: np.random.Generator) -> BasedLoop:
        p = self.graph.transition
        vs = [x]
        v = x
        for m in range(n, 0, -1):
            q = p[v, :] * self.powers[m - 1][:, x]
            q = q / q.sum()
            v = int(rng.choice(self.graph.num_vertices, p=q))
            vs.append(v)
        assert v == x
        return BasedLoop(tuple(vs))

    def sample(self, seed: int) -> SampledSoup:
        driver = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
        count = int(driver.poisson(self.alpha * self.mass))
        picks = driver.choice(len(self.items), size=count, p=self.probs) \
            if count else []
        loops = []
        for k, idx in enumerate(picks):
            x, n = self.items[int(idx)]
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, k)))
            loops.append(self._bridge(x, n, rng))
        return SampledSoup(tuple(loops), seed, self.alpha, self.n_max)


def sample_soup(g: GraphModel, frame: SpanningTreeFrame,
                cfg: MeasureConfig) -> SampledSoup:
    """Draw one soup under the given configuration. The truncation must be
    certified: tail_bound(g, n_max) <= tail_tol, else the configuration is
    rejected."""
    if tail_bound(g, cfg.n_max) > cfg.tail_tol:
        raise ConfigError(
            f"tail bound {tail_bound(g, cfg.n_max):.3e} exceeds tolerance "
            f"{cfg.tail_tol:.3e} at n_max={cfg.n_max}")
    sampler = LoopSoupSampler(g, frame, alpha=cfg.alpha, n_max=cfg.n_max)
    return sampler.sample(cfg.seed)


def dumps_soup(soup: SampledSoup) -> str:
    """One loop per line: n followed by the n visited vertices."""
    lines = []
    for l in soup.loops:
        vs = l.vertices[:-1]
        lines.append(" ".join([str(len(vs))] + [str(v) for v in vs]))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_soup(text: str, g: GraphModel | None = None,
               seed: int = -1, alpha: float = 1.0,
               n_max: int | None = None) -> SampledSoup:
    """Inverse of dumps_soup. Validates counts, and edges when a graph is
    given. Metadata fields default to sentinels unless supplied."""
    loops = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            nums = [int(t) for t in line.split()]
        except ValueError as e:
            raise ValidationError(f"soup line {lineno}: {e}") from None
        if len(nums) != nums[0] + 1:
            raise ValidationError(
                f"soup line {lineno}: expected {nums[0]} vertices, "
                f"got {len(nums) - 1}")
        vs = tuple(nums[1:]) + (nums[1],)
        loop = BasedLoop(vs)
        if g is not None:
            loop.check_edges(g)
        loops.append(loop)
    length = n_max if n_max is not None else max(
        (l.length for l in loops), default=0)
    return SampledSoup(tuple(loops), seed, alpha, length)
