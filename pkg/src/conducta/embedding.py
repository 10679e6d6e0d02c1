"""Reference sampling and Frechet-style embedding of vertices into l2^r.

Each vertex maps to its vector of shortest-path distances to r randomly
chosen reference vertices. Every coordinate is 1-Lipschitz in the graph
metric, so the embedded distance never exceeds sqrt(r) times the true one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import GraphError, shortest_paths


@dataclass(frozen=True)
class ReferenceSet:
    """Ordered distinct reference vertices plus the seed that drew them."""

    refs: tuple
    seed: int


@dataclass(frozen=True)
class EmbeddingTable:
    """Per-vertex embedding coordinates and their l2 norms.

    coords[x][i] is the shortest-path distance from reference i to vertex x;
    norms[x] is the l2 norm of row x (used for plotting, never as GP input).
    """

    coords: np.ndarray
    norms: np.ndarray
    refs: tuple

    @property
    def n(self):
        return self.coords.shape[0]

    @property
    def r(self):
        return self.coords.shape[1]


def sample_references(graph, r, seed):
    """Draw r distinct reference vertices uniformly without replacement."""
    if not (1 <= r <= graph.n):
        raise GraphError(f"reference count must satisfy 1 <= r <= {graph.n}, got {r}")
    rng = np.random.default_rng(seed)
    refs = rng.choice(graph.n, size=r, replace=False)
    return ReferenceSet(refs=tuple(int(v) for v in refs), seed=int(seed))


def frechet_embed(graph, refs):
    """Embed vertices by their distance vectors to the reference set.

    Requires a connected graph; an unreachable vertex would give an infinite
    coordinate.
    """
    cols = []
    for ref in refs.refs:
        d = shortest_paths(graph, ref)
        if not np.all(np.isfinite(d)):
            raise GraphError(
                "graph is disconnected; embed each connected component separately"
            )
        cols.append(d)
    coords = np.column_stack(cols)
    norms = np.linalg.norm(coords, axis=1)
    return EmbeddingTable(coords=coords, norms=norms, refs=refs.refs)


def empirical_distortion(graph, emb, pair_sample, seed):
    """Worst-case expansion and contraction of the embedding over vertex pairs.

    expansion  = max(1, max ||g(x)-g(y)|| / d(x,y))
    contraction = max(1, max d(x,y) / ||g(x)-g(y)||), +inf when two distinct
    vertices embed identically. distortion = expansion * contraction.

    Pairs are sampled with replacement; when pair_sample covers all n(n-1)/2
    pairs and n <= 500, every pair is checked exactly.
    """
    if pair_sample < 1:
        raise GraphError(f"pair_sample must be >= 1, got {pair_sample}")
    n = graph.n
    total_pairs = n * (n - 1) // 2
    if pair_sample >= total_pairs and n <= 500:
        pairs = [(x, y) for x in range(n) for y in range(x + 1, n)]
    else:
        rng = np.random.default_rng(seed)
        pairs = []
        while len(pairs) < pair_sample:
            x, y = rng.integers(0, n, size=2)
            if x != y:
                pairs.append((int(x), int(y)))

    dist_cache = {}
    expansion = 1.0
    contraction = 1.0
    for x, y in pairs:
        if x not in dist_cache:
            dist_cache[x] = shortest_paths(graph, x)
        d_true = float(dist_cache[x][y])
        d_emb = float(np.linalg.norm(emb.coords[x] - emb.coords[y]))
        if not np.isfinite(d_true):
            raise GraphError("graph is disconnected; distortion is undefined")
        if d_emb == 0.0:
            contraction = np.inf
        else:
            expansion = max(expansion, d_emb / d_true)
            contraction = max(contraction, d_true / d_emb)
    return expansion, contraction, expansion * contraction


def write_embedding_csv(emb, path):
    """Export the table as CSV: vertex, coord_0..coord_{r-1}, l2norm."""
    with open(path, "w", encoding="utf-8") as fh:
        header = ",".join(["vertex"] + [f"coord_{i}" for i in range(emb.r)] + ["l2norm"])
        fh.write(header + "\n")
        for v in range(emb.n):
            cells = [str(v)] + [f"{c:.17g}" for c in emb.coords[v]] + [f"{emb.norms[v]:.17g}"]
            fh.write(",".join(cells) + "\n")
