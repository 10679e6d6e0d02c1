"""Weighted undirected graphs, point-cloud ingestion, and the random-walk chain.

Vertices are dense integer ids 0..n-1. Edge weights are strictly positive and
finite; the random walk moves with probability proportional to edge weight,
and its stationary distribution is proportional to weighted degree.
"""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

# Floor applied to degenerate (zero) distances so weights stay positive.
WEIGHT_FLOOR = 1e-12

WEIGHT_MODES = ("distance", "inverse_distance", "gaussian")


class GraphError(ValueError):
    """Malformed graph data: bad edge, bad weight, bad file."""


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected, positively weighted graph.

    Attributes:
        n: vertex count.
        edges: list of (u, v, w) with u < v, each undirected edge stored once.
        adjacency: per-vertex list of (neighbor, weight) pairs.
    """

    n: int
    edges: tuple
    adjacency: tuple

    @classmethod
    def from_edges(cls, n, edges):
        """Validate and build a graph from an iterable of (u, v, w) triples.

        Rejects self-loops, non-positive or non-finite weights, out-of-range
        ids, and duplicate undirected edges (duplicates surface data errors
        rather than being merged silently).
        """
        if n < 1:
            raise GraphError(f"vertex count must be >= 1, got {n}")
        seen = set()
        canon = []
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u},{v}) outside vertex range 0..{n - 1}")
            if not math.isfinite(w) or w <= 0.0:
                raise GraphError(f"edge ({u},{v}) has non-positive weight {w}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(f"duplicate edge ({key[0]},{key[1]})")
            seen.add(key)
            canon.append((key[0], key[1], w))
        adj = [[] for _ in range(n)]
        for u, v, w in canon:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return cls(n=n, edges=tuple(canon), adjacency=tuple(tuple(a) for a in adj))

    @property
    def m(self):
        return len(self.edges)

    def weighted_degrees(self):
        """Per-vertex sum of incident edge weights."""
        d = np.zeros(self.n)
        for u, v, w in self.edges:
            d[u] += w
            d[v] += w
        return d

    def total_weight(self):
        return float(sum(w for _, _, w in self.edges))


@dataclass(frozen=True)
class PointCloud:
    """Rows of real coordinates, one point per row."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise GraphError("point cloud must be a 2-d array")
        if not np.all(np.isfinite(pts)):
            raise GraphError("point cloud contains non-finite coordinates")
        object.__setattr__(self, "points", pts)

    @property
    def m(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class RandomWalk:
    """Row-stochastic transition matrix and stationary distribution of a graph walk.

    transition[i, j] = w_ij / d_i and stationary[i] = d_i / (2W), where d_i is
    the weighted degree and W the total edge weight. The walk is reversible:
    stationary[i] * transition[i, j] == stationary[j] * transition[j, i].
    """

    graph: WeightedGraph
    transition: np.ndarray
    stationary: np.ndarray
    degrees: np.ndarray
    total_weight: float

    @property
    def n(self):
        return self.graph.n

    def flow_between(self, i, j):
        """Ergodic flow along one directed pair: pi_i * p_ij."""
        return float(self.stationary[i] * self.transition[i, j])


def load_edge_list(path):
    """Read a whitespace-separated "u v w" edge list; '#' starts a comment.

    Vertex count is inferred as max id + 1. Errors carry the 1-based line
    number of the offending record.
    """
    edges = []
    max_id = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise GraphError(f"{path}:{lineno}: expected 'u v w', got {raw.strip()!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2])
            except ValueError as exc:
                raise GraphError(f"{path}:{lineno}: {exc}") from exc
            if u < 0 or v < 0:
                raise GraphError(f"{path}:{lineno}: negative vertex id")
            if u == v:
                raise GraphError(f"{path}:{lineno}: self-loop at vertex {u}")
            if not math.isfinite(w) or w <= 0.0:
                raise GraphError(f"{path}:{lineno}: non-positive weight {parts[2]}")
            edges.append((u, v, w))
            max_id = max(max_id, u, v)
    if max_id < 0:
        raise GraphError(f"{path}: no edges found")
    return WeightedGraph.from_edges(max_id + 1, edges)


def write_edge_list(graph, path):
    """Write the canonical edge-list form, one 'u v w' line per edge."""
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, w in graph.edges:
            fh.write(f"{u} {v} {w:.17g}\n")


def load_point_cloud(path):
    """Read a CSV point cloud, one point per row.

    A header row is detected by a non-numeric first token and skipped. All
    rows must have the same length.
    """
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for idx, row in enumerate(reader):
            cells = [c.strip() for c in row if c.strip() != ""]
            if not cells:
                continue
            if idx == 0:
                try:
                    float(cells[0])
                except ValueError:
                    continue  # header row
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise GraphError(f"{path}: row {idx + 1}: {exc}") from exc
    if not rows:
        raise GraphError(f"{path}: no data rows")
    width = len(rows[0])
    for idx, row in enumerate(rows):
        if len(row) != width:
            raise GraphError(f"{path}: row {idx + 1} has {len(row)} columns, expected {width}")
    return PointCloud(np.asarray(rows, dtype=float))


def _edge_weight(dist, mode, sigma):
    if mode == "distance":
        return max(dist, WEIGHT_FLOOR)
    if mode == "inverse_distance":
        return 1.0 / max(dist, WEIGHT_FLOOR)
    if mode == "gaussian":
        return max(math.exp(-(dist * dist) / (2.0 * sigma * sigma)), WEIGHT_FLOOR)
    raise GraphError(f"unknown weight mode {mode!r}")


def build_knn_graph(cloud, k, weight_mode="distance", sigma=None):
    """Symmetric k-nearest-neighbor graph over a point cloud.

    An edge (i, j) is kept when either endpoint ranks the other among its k
    nearest; distance ties break toward the lower vertex id. Edge weight is
    the euclidean distance by default; 'inverse_distance' and 'gaussian'
    (requires sigma) are offered for the conventional affinity semantics.
    Coincident points get weight clamped to the positive floor.
    """
    if cloud.m < 2:
        raise GraphError("need at least 2 points to build a graph")
    if not (1 <= k < cloud.m):
        raise GraphError(f"k must satisfy 1 <= k < {cloud.m}, got {k}")
    if weight_mode not in WEIGHT_MODES:
        raise GraphError(f"weight_mode must be one of {WEIGHT_MODES}, got {weight_mode!r}")
    if weight_mode == "gaussian":
        if sigma is None or sigma <= 0:
            raise GraphError("gaussian weight mode requires sigma > 0")

    dists = cdist(cloud.points, cloud.points)
    ids = np.arange(cloud.m)
    pairs = set()
    for i in range(cloud.m):
        order = np.lexsort((ids, dists[i]))
        picked = 0
        for j in order:
            if j == i:
                continue
            pairs.add((min(i, int(j)), max(i, int(j))))
            picked += 1
            if picked == k:
                break
    edges = [(u, v, _edge_weight(float(dists[u, v]), weight_mode, sigma)) for u, v in sorted(pairs)]
    return WeightedGraph.from_edges(cloud.m, edges)


def shortest_paths(graph, source):
    """Dijkstra distances from one source vertex; unreachable vertices get +inf."""
    if not (0 <= source < graph.n):
        raise GraphError(f"source {source} outside vertex range")
    dist = np.full(graph.n, np.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = np.zeros(graph.n, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in graph.adjacency[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def connected_components(graph):
    """Partition of the vertex set by connectivity.

    Components are returned largest first (ties broken by smallest member id).
    """
    seen = [False] * graph.n
    comps = []
    for start in range(graph.n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = {start}
        while stack:
            u = stack.pop()
            for v, _ in graph.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.add(v)
                    stack.append(v)
        comps.append(comp)
    return sorted(comps, key=lambda c: (-len(c), min(c)))


def induced_subgraph(graph, vertices):
    """Subgraph induced on `vertices`, relabeled 0..len-1 in sorted-id order.

    Returns (subgraph, original_ids) where original_ids[new] = old.
    """
    original_ids = sorted(vertices)
    index = {old: new for new, old in enumerate(original_ids)}
    edges = [
        (index[u], index[v], w)
        for u, v, w in graph.edges
        if u in index and v in index
    ]
    if not original_ids:
        raise GraphError("empty vertex set for induced subgraph")
    return WeightedGraph.from_edges(len(original_ids), edges), original_ids


def random_walk(graph):
    """Random walk of a connected graph: transitions w_ij/d_i, stationary d_i/(2W)."""
    comps = connected_components(graph)
    if len(comps) > 1:
        raise GraphError(
            f"graph has {len(comps)} connected components; restrict to one "
            "component (e.g. the largest) before building the walk"
        )
    deg = graph.weighted_degrees()
    if np.any(deg <= 0):
        raise GraphError("graph has an isolated vertex; the walk is undefined")
    total = graph.total_weight()
    transition = np.zeros((graph.n, graph.n))
    for u, v, w in graph.edges:
        transition[u, v] = w / deg[u]
        transition[v, u] = w / deg[v]
    stationary = deg / (2.0 * total)
    return RandomWalk(
        graph=graph,
        transition=transition,
        stationary=stationary,
        degrees=deg,
        total_weight=total,
    )
