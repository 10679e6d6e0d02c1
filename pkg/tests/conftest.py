import pytest

from conducta.graph import WeightedGraph, random_walk


def make_random_connected_graph(rng, n_min=5, n_max=40, unit_weights=False):
    """Random connected graph: a random spanning tree plus extra random edges."""
    n = int(rng.integers(n_min, n_max + 1))
    edges = {}
    order = rng.permutation(n)
    for i in range(1, n):
        u = int(order[i])
        v = int(order[rng.integers(0, i)])
        edges[(min(u, v), max(u, v))] = None
    extra = int(rng.integers(0, max(1, n)))
    for _ in range(extra):
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges[(min(int(u), int(v)), max(int(u), int(v)))] = None
    weight = (lambda: 1.0) if unit_weights else (lambda: float(rng.uniform(0.1, 2.0)))
    return WeightedGraph.from_edges(n, [(u, v, weight()) for (u, v) in sorted(edges)])


@pytest.fixture
def two_triangle():
    """Two unit triangles {0,1,2} and {3,4,5} joined by the edge (2,3)."""
    edges = [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0),
             (3, 4, 1.0), (3, 5, 1.0), (4, 5, 1.0), (2, 3, 1.0)]
    return WeightedGraph.from_edges(6, edges)


@pytest.fixture
def two_triangle_walk(two_triangle):
    return random_walk(two_triangle)


@pytest.fixture
def path3():
    return WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])


@pytest.fixture
def cycle4():
    return WeightedGraph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)])


def two_clique_graph(k=20):
    """Two k-cliques joined by a single unit edge (0, k)."""
    edges = [(i, j, 1.0) for i in range(k) for j in range(i + 1, k)]
    edges += [(k + i, k + j, 1.0) for i in range(k) for j in range(i + 1, k)]
    edges.append((0, k, 1.0))
    return WeightedGraph.from_edges(2 * k, edges)


def brute_force_chain_conductance(walk, budget=0.5):
    """Independent pure-python enumeration of min conductance over subsets.

    Walks every nonempty proper subset via itertools, computing flow and mass
    by direct directional sums over the adjacency; kept deliberately separate
    from the vectorized implementation it checks.
    """
    from itertools import combinations

    n = walk.n
    pi = walk.stationary
    adj = walk.graph.adjacency
    deg = walk.degrees
    best = None
    best_set = None
    for size in range(1, n):
        for combo in combinations(range(n), size):
            members = set(combo)
            mass = sum(pi[v] for v in combo)
            if mass > budget + 1e-12:
                continue
            flow = 0.0
            for i in combo:
                for j, w in adj[i]:
                    if j not in members:
                        flow += pi[i] * (w / deg[i])
            phi = flow / mass
            if best is None or phi < best:
                best = phi
                best_set = members
    return best, best_set
