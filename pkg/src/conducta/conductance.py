"""Ergodic flow, set conductance, exact chain conductance, and ball sweeps.

Conductance of a vertex set S is the stationary probability flux leaving S per
step divided by the stationary mass of S. The induced conductance of a vertex
is the minimum conductance over metric balls around it, subject to a radius
cap and a stationary-mass budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Slack applied to the mass-budget comparison so that balls whose mass is
# mathematically equal to the budget are not dropped by float dust.
BUDGET_SLACK = 1e-12

ENUMERATION_LIMIT = 22
_CHUNK = 1 << 20


class ConductanceError(ValueError):
    """Invalid set or infeasible request in a conductance computation."""


@dataclass(frozen=True)
class VertexSet:
    """Nonempty proper subset of vertices with its stationary mass."""

    members: frozenset
    pi_mass: float

    @classmethod
    def from_members(cls, walk, members):
        members = frozenset(int(v) for v in members)
        if not members:
            raise ConductanceError("vertex set is empty")
        if len(members) >= walk.n:
            raise ConductanceError("vertex set must be a proper subset")
        if any(not (0 <= v < walk.n) for v in members):
            raise ConductanceError("vertex id outside range")
        mass = float(sum(walk.stationary[v] for v in sorted(members)))
        return cls(members=members, pi_mass=mass)


@dataclass(frozen=True)
class CutStats:
    """Flow out of a set, its stationary mass, and the resulting conductance."""

    flow: float
    pi_mass: float
    conductance: float


@dataclass(frozen=True)
class BallRow:
    """One radius of a ball profile around a center."""

    radius: float
    size: int
    pi_mass: float
    flow: float
    conductance: float
    proper: bool      # ball is a proper subset of V
    feasible: bool    # proper and radius <= R and pi_mass <= budget


@dataclass(frozen=True)
class BallProfile:
    """Sweep profile of all distinct ball radii around one center."""

    center: int
    radius_cap: float
    mass_budget: float
    rows: tuple

    def feasible_rows(self):
        return [r for r in self.rows if r.feasible]


@dataclass(frozen=True)
class BallSearch:
    """Result of minimizing conductance over feasible balls around a center.

    `feasible` is False when no ball satisfies the constraints (for example
    the budget is below the center's own stationary mass); callers must skip
    such centers rather than read a sentinel value.
    """

    center: int
    feasible: bool
    value: float | None
    radius: float | None
    members: frozenset | None
    profile: BallProfile


def ergodic_flow(walk, s1, s2):
    """Stationary flux from s1 into s2: sum of pi_i * p_ij over the cut pairs."""
    m1, m2 = s1.members, s2.members
    if m1 & m2:
        raise ConductanceError("sets overlap; ergodic flow needs disjoint sets")
    pi = walk.stationary
    adj = walk.graph.adjacency
    deg = walk.degrees
    total = 0.0
    for i in sorted(m1):
        for j, w in adj[i]:
            if j in m2:
                total += pi[i] * (w / deg[i])
    return total


def set_conductance(walk, s):
    """Conductance of one proper nonempty subset: flow(S, complement) / pi(S)."""
    members = s.members
    pi = walk.stationary
    adj = walk.graph.adjacency
    deg = walk.degrees
    flow = 0.0
    for i in sorted(members):
        for j, w in adj[i]:
            if j not in members:
                flow += pi[i] * (w / deg[i])
    return CutStats(flow=flow, pi_mass=s.pi_mass, conductance=flow / s.pi_mass)


def chain_conductance_exact(walk, budget=0.5):
    """Minimum conductance over all nonempty proper subsets with pi(S) <= budget.

    Exhaustive 2^n enumeration, vectorized over subset bitmasks; refuses
    graphs with more than 22 vertices rather than approximating. Returns
    (value, minimizing VertexSet); ties resolve to the lowest bitmask.
    """
    n = walk.n
    if n > ENUMERATION_LIMIT:
        raise ConductanceError(
            f"exact enumeration limited to n <= {ENUMERATION_LIMIT}, got {n}"
        )
    if not (0.0 < budget <= 1.0):
        raise ConductanceError(f"budget must lie in (0, 1], got {budget}")
    pi = walk.stationary
    p = walk.transition
    edges = walk.graph.edges
    q_fwd = np.array([pi[u] * p[u, v] for u, v, _ in edges])
    q_bwd = np.array([pi[v] * p[v, u] for u, v, _ in edges])
    eu = np.array([u for u, _, _ in edges])
    ev = np.array([v for _, v, _ in edges])

    best_phi = np.inf
    best_mask = None
    limit = 1 << n
    for lo in range(1, limit - 1, _CHUNK):
        hi = min(lo + _CHUNK, limit - 1)
        masks = np.arange(lo, hi, dtype=np.int64)
        bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
        mass = bits @ pi
        feas = mass <= budget + BUDGET_SLACK
        if not np.any(feas):
            continue
        bu = bits[:, eu]
        bv = bits[:, ev]
        flow = (bu & ~bv) @ q_fwd + (bv & ~bu) @ q_bwd
        phi = np.where(feas, flow / mass, np.inf)
        idx = int(np.argmin(phi))
        if phi[idx] < best_phi:
            best_phi = float(phi[idx])
            best_mask = int(masks[idx])
    if best_mask is None:
        raise ConductanceError(
            f"no nonempty subset satisfies the mass budget {budget}"
        )
    members = frozenset(v for v in range(n) if (best_mask >> v) & 1)
    return best_phi, VertexSet.from_members(walk, members)


def _profile_from_rows(center, radius_cap, budget, raw_rows):
    rows = []
    for radius, size, mass, flow, proper in raw_rows:
        feasible = proper and radius <= radius_cap and mass <= budget + BUDGET_SLACK
        rows.append(
            BallRow(
                radius=radius,
                size=size,
                pi_mass=mass,
                flow=max(flow, 0.0),
                conductance=max(flow, 0.0) / mass,
                proper=proper,
                feasible=feasible,
            )
        )
    return BallProfile(center=center, radius_cap=radius_cap, mass_budget=budget, rows=tuple(rows))


def _finish_search(profile, dists):
    # Strict < keeps the smallest radius among exact ties.
    best = None
    for row in profile.rows:
        if row.feasible and (best is None or row.conductance < best.conductance):
            best = row
    if best is None:
        return BallSearch(
            center=profile.center, feasible=False, value=None, radius=None,
            members=None, profile=profile,
        )
    members = frozenset(int(v) for v in np.nonzero(dists <= best.radius)[0])
    return BallSearch(
        center=profile.center, feasible=True, value=best.conductance,
        radius=best.radius, members=members, profile=profile,
    )


def induced_conductance(walk, dists, center, radius_cap, budget):
    """Minimum conductance over balls around `center`, by incremental sweep.

    Vertices enter in distance order; equal-distance vertices enter together
    (a ball is defined by a closed radius, so a shell is never split). The
    cut flow and the mass are maintained in O(deg) per vertex. The profile
    records every distinct radius with feasibility flags; the minimum is
    taken over radii with radius <= radius_cap, mass within budget, and the
    ball a proper subset. A negative radius_cap or an over-tight budget
    yields an explicitly infeasible result.
    """
    n = walk.n
    if not (0 <= center < n):
        raise ConductanceError(f"center {center} outside vertex range")
    if not (0.0 < budget <= 1.0):
        raise ConductanceError(f"budget must lie in (0, 1], got {budget}")
    dists = np.asarray(dists, dtype=float)
    pi = walk.stationary
    adj = walk.graph.adjacency
    deg = walk.degrees

    order = np.lexsort((np.arange(n), dists))
    in_ball = np.zeros(n, dtype=bool)
    flow = 0.0
    mass = 0.0
    raw_rows = []
    i = 0
    while i < n:
        radius = float(dists[order[i]])
        j = i
        while j < n and dists[order[j]] == radius:
            v = int(order[j])
            for u, w in adj[v]:
                if in_ball[u]:
                    flow -= pi[u] * (w / deg[u])
                else:
                    flow += pi[v] * (w / deg[v])
            in_ball[v] = True
            mass += pi[v]
            j += 1
        size = j
        raw_rows.append((radius, size, mass, flow, size < n))
        i = j
    profile = _profile_from_rows(center, radius_cap, budget, raw_rows)
    return _finish_search(profile, dists)


def induced_conductance_oracle(walk, dists, center, radius_cap, budget):
    """Reference implementation of `induced_conductance` without incremental state.

    Materializes every ball from scratch and recomputes flow and mass by
    direct summation; kept for verification.
    """
    n = walk.n
    if not (0 <= center < n):
        raise ConductanceError(f"center {center} outside vertex range")
    if not (0.0 < budget <= 1.0):
        raise ConductanceError(f"budget must lie in (0, 1], got {budget}")
    dists = np.asarray(dists, dtype=float)
    pi = walk.stationary
    adj = walk.graph.adjacency
    deg = walk.degrees

    raw_rows = []
    for radius in np.unique(dists):
        inside = dists <= radius
        members = set(np.nonzero(inside)[0])
        flow = 0.0
        for v in sorted(members):
            for u, w in adj[v]:
                if u not in members:
                    flow += pi[v] * (w / deg[v])
        mass = float(np.sum(pi[inside]))
        raw_rows.append((float(radius), len(members), mass, flow, len(members) < n))
    profile = _profile_from_rows(center, radius_cap, budget, raw_rows)
    return _finish_search(profile, dists)


def write_profiles_csv(profiles, path):
    """Export ball profiles as CSV rows (center, radius, pi_mass, flow, conductance, feasible)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("center,radius,pi_mass,flow,conductance,feasible\n")
        for profile in profiles:
            for row in profile.rows:
                fh.write(
                    f"{profile.center},{row.radius:.17g},{row.pi_mass:.17g},"
                    f"{row.flow:.17g},{row.conductance:.17g},{str(row.feasible).lower()}\n"
                )
