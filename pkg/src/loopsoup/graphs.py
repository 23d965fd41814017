"""Finite weighted graphs with killing, and the linear algebra attached to them.

A graph here is a finite vertex set {0..n-1}, a set of undirected simple
edges carrying positive conductances, and a nonnegative killing rate per
vertex. The induced Markov chain jumps from x to a neighbour y with
probability C(x,y)/lam(x) where lam(x) = kappa(x) + sum_y C(x,y); with
probability kappa(x)/lam(x) it dies. All the loop-measure machinery sits on
top of this chain.

Also here: deterministic spanning-tree frames (the tree plus an ordered,
oriented list of the remaining edges, which generate the fundamental group),
and the Green/Jacobian data used by the continuous-distribution modules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError, NumericError


def _normalize_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class GraphModel:
    """Immutable weighted graph with killing.

    Attributes:
        num_vertices: number of vertices, labelled 0..num_vertices-1.
        edges: sorted tuple of undirected edges (u, v) with u < v.
        conductance: mapping edge -> weight, keyed by the normalized pair.
        killing: per-vertex killing rates, length num_vertices.
    """

    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    conductance: dict[tuple[int, int], float] = field(hash=False)
    killing: tuple[float, ...]

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def lam(self) -> np.ndarray:
        """Total jump-plus-kill rate at each vertex."""
        lam = np.array(self.killing, dtype=float)
        for (u, v), c in self.conductance.items():
            lam[u] += c
            lam[v] += c
        return lam

    @cached_property
    def transition(self) -> np.ndarray:
        """Sub-stochastic transition matrix P[x, y] = C(x,y)/lam(x)."""
        n = self.num_vertices
        p = np.zeros((n, n))
        for (u, v), c in self.conductance.items():
            p[u, v] = c / self.lam[u]
            p[v, u] = c / self.lam[v]
        return p

    def weight(self, u: int, v: int) -> float:
        return self.conductance[_normalize_edge(u, v)]

    def degree(self, x: int) -> int:
        return len(self.neighbors[x])


def build_graph(
    num_vertices: int,
    weighted_edges: Iterable[tuple[int, int, float]],
    killing: Sequence[float] | float = 0.0,
) -> GraphModel:
    """Validate and construct a GraphModel.

    Args:
        num_vertices: vertex count; vertices are 0..num_vertices-1.
        weighted_edges: iterable of (u, v, conductance) triples.
        killing: scalar applied to every vertex, or a per-vertex sequence.

    Raises:
        ValidationError: on bad labels, loops, duplicate edges, nonpositive
            conductances, or negative killing rates.
    """
    if num_vertices < 1:
        raise ValidationError("graph needs at least one vertex")
    conductance: dict[tuple[int, int], float] = {}
    for u, v, c in weighted_edges:
        if not (0 <= u < num_vertices and 0 <= v < num_vertices):
            raise ValidationError(f"edge ({u},{v}) has a vertex out of range")
        if u == v:
            raise ValidationError(f"self-loop at vertex {u} not allowed")
        e = _normalize_edge(u, v)
        if e in conductance:
            raise ValidationError(f"duplicate edge {e}")
        if not c > 0:
            raise ValidationError(f"edge {e} has nonpositive conductance {c}")
        conductance[e] = float(c)
    if isinstance(killing, (int, float)):
        kill = (float(killing),) * num_vertices
    else:
        kill = tuple(float(k) for k in killing)
        if len(kill) != num_vertices:
            raise ValidationError(
                f"killing has length {len(kill)}, expected {num_vertices}"
            )
    if any(k < 0 for k in kill):
        raise ValidationError("killing rates must be nonnegative")
    lam_zero = [x for x in range(num_vertices)
                if kill[x] == 0 and not any(x in e for e in conductance)]
    if lam_zero:
        raise ValidationError(f"vertex {lam_zero[0]} has no edge and no killing")
    if num_vertices > 1:
        adj: list[list[int]] = [[] for _ in range(num_vertices)]
        for u, v in conductance:
            adj[u].append(v)
            adj[v].append(u)
        seen = [False] * num_vertices
        seen[0] = True
        stack = [0]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    stack.append(y)
        if not all(seen):
            raise ValidationError("graph is not connected")
    return GraphModel(
        num_vertices=num_vertices,
        edges=tuple(sorted(conductance)),
        conductance=conductance,
        killing=kill,
    )


@dataclass(frozen=True)
class SpanningTreeFrame:
    """A rooted spanning tree plus the ordered non-tree edges.

    Each non-tree edge, oriented from its smaller to its larger endpoint, is a
    generator of the fundamental group of the graph (rank = |E| - |X| + 1).
    Crossing generator i forward contributes the letter +(i+1) to a loop's
    word, crossing it backward contributes -(i+1); tree edges contribute
    nothing.
    """

    root: int
    parent: tuple[int, ...]
    depth: tuple[int, ...]
    tree_edges: tuple[tuple[int, int], ...]
    cogenerators: tuple[tuple[int, int], ...]

    @property
    def rank(self) -> int:
        return len(self.cogenerators)

    @cached_property
    def _letter(self) -> dict[tuple[int, int], int]:
        table = {}
        for i, (u, v) in enumerate(self.cogenerators, start=1):
            table[(u, v)] = i
            table[(v, u)] = -i
        return table

    def crossing(self, u: int, v: int) -> int:
        """Signed generator index of the step u -> v, or 0 on a tree edge."""
        return self._letter.get((u, v), 0)

    def tree_path(self, x: int, y: int) -> list[int]:
        """Vertex path from x to y inside the tree."""
        up_x, up_y = [x], [y]
        a, b = x, y
        while a != b:
            if self.depth[a] >= self.depth[b]:
                a = self.parent[a]
                up_x.append(a)
            else:
                b = self.parent[b]
                up_y.append(b)
        return up_x + up_y[-2::-1]


def spanning_tree_frame(
    g: GraphModel,
    tree_edges: Iterable[tuple[int, int]] | None = None,
) -> SpanningTreeFrame:
    """Build the canonical frame, or one over a caller-supplied tree.

    The canonical tree is grown breadth-first from vertex 0, scanning
    neighbours in ascending order. Non-tree edges are sorted by endpoint pair
    and oriented small -> large. The graph must be connected.
    """
    n = g.num_vertices
    if tree_edges is None:
        parent = [-1] * n
        depth = [0] * n
        seen = [False] * n
        seen[0] = True
        order = [0]
        tree: list[tuple[int, int]] = []
        head = 0
        while head < len(order):
            x = order[head]
            head += 1
            for y in g.neighbors[x]:
                if not seen[y]:
                    seen[y] = True
                    parent[y] = x
                    depth[y] = depth[x] + 1
                    tree.append(_normalize_edge(x, y))
                    order.append(y)
        if not all(seen):
            raise ValidationError("graph is not connected")
    else:
        tree = [_normalize_edge(u, v) for u, v in tree_edges]
        if len(set(tree)) != len(tree):
            raise ValidationError("duplicate tree edge")
        for e in tree:
            if e not in g.conductance:
                raise ValidationError(f"tree edge {e} is not a graph edge")
        if len(tree) != n - 1:
            raise ValidationError(
                f"spanning tree needs {n - 1} edges, got {len(tree)}"
            )
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in tree:
            adj[u].append(v)
            adj[v].append(u)
        parent = [-1] * n
        depth = [0] * n
        seen = [False] * n
        seen[0] = True
        stack = [0]
        while stack:
            x = stack.pop()
            for y in sorted(adj[x]):
                if not seen[y]:
                    seen[y] = True
                    parent[y] = x
                    depth[y] = depth[x] + 1
                    stack.append(y)
        if not all(seen):
            raise ValidationError("tree edges do not span the graph")
    tree_set = set(tree)
    cogens = tuple(e for e in g.edges if e not in tree_set)
    return SpanningTreeFrame(
        root=0,
        parent=tuple(parent),
        depth=tuple(depth),
        tree_edges=tuple(sorted(tree_set)),
        cogenerators=cogens,
    )


@dataclass(frozen=True)
class GreenData:
    """Green function and the edge data derived from it.

    green: (lam - C)^{-1} on vertices.
    transfer: cross-Green matrix on the frame's cogenerators, entry (i, j) =
        G(e_i+, e_j+) + G(e_i-, e_j-) - G(e_i+, e_j-) - G(e_i-, e_j+),
        where e+ is the larger endpoint and e- the smaller.
    jacobian: J[i, j] = delta_ij C(e_i) - C(e_i) transfer[i, j] C(e_j).
    volume: sqrt(det jacobian).
    """

    green: np.ndarray
    transfer: np.ndarray
    jacobian: np.ndarray
    volume: float


def green_data(g: GraphModel, frame: SpanningTreeFrame) -> GreenData:
    """Compute GreenData for the frame's cogenerators.

    Raises:
        NumericError: if lam - C is singular (no killing anywhere makes the
            chain recurrent and the Green function blows up).
    """
    n = g.num_vertices
    m = np.diag(np.asarray(g.lam, dtype=float))
    for (u, v), c in g.conductance.items():
        m[u, v] -= c
        m[v, u] -= c
    sign, _ = np.linalg.slogdet(m)
    if sign <= 0:
        raise NumericError(
            "massless/recurrent chain: lam - C is singular, Green function "
            "undefined (all killing rates are zero)")
    green = np.linalg.inv(m)
    r = frame.rank
    transfer = np.zeros((r, r))
    for i, (a, b) in enumerate(frame.cogenerators):
        for j, (c_, d) in enumerate(frame.cogenerators):
            transfer[i, j] = green[b, d] + green[a, c_] - green[b, c_] - green[a, d]
    cond = np.array([g.conductance[e] for e in frame.cogenerators])
    jac = np.diag(cond) - cond[:, None] * transfer * cond[None, :]
    if r:
        try:
            chol = np.linalg.cholesky(jac)
        except np.linalg.LinAlgError:
            raise NumericError("edge Jacobian is not positive definite") from None
        det = float(np.prod(np.diag(chol))) ** 2
    else:
        det = 1.0
    return GreenData(green=green, transfer=transfer, jacobian=jac,
                     volume=float(np.sqrt(det)))


def parse_graph(text: str) -> GraphModel:
    """Parse the plain-text graph format.

    Lines (blank lines and '#' comments ignored):
        vertices N
        edge U V CONDUCTANCE
        kappa X RATE

    'vertices' must come first. Killing defaults to 0 everywhere.

    Raises:
        ValidationError: with a line number on any malformed line.
    """
    num_vertices = None
    weighted_edges: list[tuple[int, int, float]] = []
    killing: list[float] = []
    kappa_seen: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "vertices":
                if num_vertices is not None:
                    raise ValueError("repeated 'vertices' line")
                if len(parts) != 2:
                    raise ValueError("expected 'vertices N'")
                num_vertices = int(parts[1])
                killing = [0.0] * num_vertices
            elif parts[0] == "edge":
                if num_vertices is None:
                    raise ValueError("'edge' before 'vertices'")
                if len(parts) != 4:
                    raise ValueError("expected 'edge U V CONDUCTANCE'")
                weighted_edges.append((int(parts[1]), int(parts[2]), float(parts[3])))
            elif parts[0] == "kappa":
                if num_vertices is None:
                    raise ValueError("'kappa' before 'vertices'")
                if len(parts) != 3:
                    raise ValueError("expected 'kappa X RATE'")
                x = int(parts[1])
                if not 0 <= x < num_vertices:
                    raise ValueError(f"vertex {x} out of range")
                if x in kappa_seen:
                    raise ValueError(f"repeated kappa for vertex {x}")
                kappa_seen.add(x)
                killing[x] = float(parts[2])
            else:
                raise ValueError(f"unknown directive {parts[0]!r}")
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
    if num_vertices is None:
        raise ValidationError("missing 'vertices' line")
    return build_graph(num_vertices, weighted_edges, killing)


def load_graph(path: str) -> GraphModel:
    with open(path) as fh:
        return parse_graph(fh.read())
