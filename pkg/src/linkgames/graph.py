"""Weighted graphs, player actions, edge scoring, and Laplacian assembly.

Edges are undirected and normalized to tuples ``(i, j)`` with ``i < j``; every
scored collection keeps a single entry per edge.  All types are immutable after
construction, so they can be shared freely across concurrent simulations.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import GraphError, InvalidActionError

Edge = Tuple[int, int]

# Scores closer than this are considered tied and fall back to edge order.
SCORE_TIE_TOL = 1e-9

# Below this pairwise state gap an edge is treated as carrying zero potential.
CONSENSUS_GAP_TOL = 1e-10


def normalize_edge(i: int, j: int) -> Edge:
    if i == j:
        raise GraphError(f"self-loop ({i},{j}) is not allowed")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class WeightedGraph:
    """Connected undirected graph with positive coupling weights."""

    node_count: int
    edges: Tuple[Tuple[int, int, float], ...]

    def __init__(self, node_count: int, edges: Iterable[Tuple[int, int, float]]):
        if node_count < 1:
            raise GraphError("node_count must be a positive integer")
        normalized = []
        seen = set()
        for i, j, w in edges:
            e = normalize_edge(int(i), int(j))
            if e[1] >= node_count or e[0] < 0:
                raise GraphError(f"edge {e} references a node outside 0..{node_count - 1}")
            if e in seen:
                raise GraphError(f"duplicate edge {e}")
            if not (w > 0.0):
                raise GraphError(f"edge {e} has non-positive weight {w}")
            seen.add(e)
            normalized.append((e[0], e[1], float(w)))
        normalized.sort()
        object.__setattr__(self, "node_count", int(node_count))
        object.__setattr__(self, "edges", tuple(normalized))
        self._check_connected()

    def _check_connected(self) -> None:
        n = self.node_count
        adj = [[] for _ in range(n)]
        for i, j, _ in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        seen = [False] * n
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    count += 1
                    stack.append(u)
        if count != n:
            raise GraphError("graph is not connected")

    @property
    def edge_list(self) -> Tuple[Edge, ...]:
        return tuple((i, j) for i, j, _ in self.edges)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def weight(self, edge: Edge) -> float:
        e = normalize_edge(*edge)
        for i, j, w in self.edges:
            if (i, j) == e:
                return w
        raise InvalidActionError(f"edge {e} not in graph")

    def has_edge(self, edge: Edge) -> bool:
        e = normalize_edge(*edge)
        return any((i, j) == e for i, j, _ in self.edges)

    def weights(self) -> Mapping[Edge, float]:
        return {(i, j): w for i, j, w in self.edges}


def _validate_edges(graph: WeightedGraph, edges: Iterable[Edge], who: str) -> frozenset:
    out = []
    known = set(graph.edge_list)
    for e in edges:
        e = normalize_edge(*e)
        if e not in known:
            raise InvalidActionError(f"{who} action references edge {e} not in graph")
        out.append(e)
    return frozenset(out)


@dataclass(frozen=True)
class AdversaryAction:
    """Set of links broken by the adversary, at most ``budget`` of them."""

    broken: frozenset = frozenset()
    budget: int = 0

    def __init__(self, broken: Iterable[Edge] = (), budget: int = 0):
        broken = frozenset(normalize_edge(*e) for e in broken)
        if budget < 0:
            raise InvalidActionError("adversary budget must be non-negative")
        if len(broken) > budget:
            raise InvalidActionError(
                f"adversary breaks {len(broken)} links but budget is {budget}"
            )
        object.__setattr__(self, "broken", broken)
        object.__setattr__(self, "budget", int(budget))

    def validate(self, graph: WeightedGraph) -> "AdversaryAction":
        _validate_edges(graph, self.broken, "adversary")
        return self


@dataclass(frozen=True)
class DesignerAction:
    """Set of links boosted by ``boost`` each, at most ``budget`` of them."""

    boosted: frozenset = frozenset()
    boost: float = 0.0
    budget: int = 0

    def __init__(self, boosted: Iterable[Edge] = (), boost: float = 0.0, budget: int = 0):
        boosted = frozenset(normalize_edge(*e) for e in boosted)
        if boost < 0:
            raise InvalidActionError("boost must be non-negative")
        if budget < 0:
            raise InvalidActionError("designer budget must be non-negative")
        if len(boosted) > budget:
            raise InvalidActionError(
                f"designer boosts {len(boosted)} links but budget is {budget}"
            )
        object.__setattr__(self, "boosted", boosted)
        object.__setattr__(self, "boost", float(boost))
        object.__setattr__(self, "budget", int(budget))

    def validate(self, graph: WeightedGraph) -> "DesignerAction":
        _validate_edges(graph, self.boosted, "designer")
        return self


NO_ATTACK = AdversaryAction()
NO_BOOST = DesignerAction()


@dataclass(frozen=True)
class ScoredEdgeSet:
    """One real score per edge; duplicate entries collapse to the minimum."""

    entries: Tuple[Tuple[Edge, float], ...] = ()

    def __init__(self, entries: Iterable[Tuple[Edge, float]] = ()):
        best = {}
        for e, s in entries:
            e = normalize_edge(*e)
            s = float(s)
            if e not in best or s < best[e]:
                best[e] = s
        object.__setattr__(self, "entries", tuple(sorted(best.items())))

    def score(self, edge: Edge) -> float:
        e = normalize_edge(*edge)
        for other, s in self.entries:
            if other == e:
                return s
        raise KeyError(e)

    def edges(self) -> Tuple[Edge, ...]:
        return tuple(e for e, _ in self.entries)

    def restrict(self, edges: Iterable[Edge]) -> "ScoredEdgeSet":
        keep = {normalize_edge(*e) for e in edges}
        return ScoredEdgeSet((e, s) for e, s in self.entries if e in keep)

    def __len__(self) -> int:
        return len(self.entries)


def phi_ell(scores: ScoredEdgeSet, ell: int, tie_tol: float = SCORE_TIE_TOL) -> Tuple[Edge, ...]:
    """Edges carrying the ``ell`` smallest scores, in ascending score order.

    Returns every edge when ``ell`` exceeds the set size and the empty tuple
    for ``ell = 0`` or an empty set.  Scores within ``tie_tol`` of each other
    are tied and ordered lexicographically by edge, which makes the selection
    deterministic.
    """
    if ell < 0:
        raise ValueError("ell must be non-negative")
    ranked = sorted(scores.entries, key=lambda item: (item[1], item[0]))
    # Re-sort tie groups (chained within tie_tol) lexicographically.
    ordered = []
    i = 0
    while i < len(ranked):
        j = i + 1
        while j < len(ranked) and ranked[j][1] - ranked[j - 1][1] <= tie_tol:
            j += 1
        group = sorted(ranked[i:j], key=lambda item: item[0])
        ordered.extend(group)
        i = j
    take = len(ordered) if ell > len(ordered) else ell
    return tuple(e for e, _ in ordered[:take])


def potentials(graph: WeightedGraph, x: Sequence[float]) -> ScoredEdgeSet:
    """Per-edge potential scores -(x_i - x_j)^2; always non-positive."""
    x = np.asarray(x, dtype=float)
    if x.shape != (graph.node_count,):
        raise ValueError(f"state vector must have length {graph.node_count}")
    return ScoredEdgeSet(((i, j), -float((x[i] - x[j]) ** 2)) for i, j, _ in graph.edges)


def weighted_potentials(
    graph: WeightedGraph,
    v: DesignerAction,
    x: Optional[Sequence[float]] = None,
    nu: Optional[ScoredEdgeSet] = None,
) -> ScoredEdgeSet:
    """Potential scores scaled by the boosted coupling, (a_ij + v_ij) * nu_ij.

    ``nu`` substitutes an explicit per-edge potential table for the
    state-derived one; rankings built from published worked examples sometimes
    declare potentials directly, and this hook reproduces them.
    """
    v.validate(graph)
    if nu is None:
        if x is None:
            raise ValueError("either x or nu must be provided")
        nu = potentials(graph, x)
    entries = []
    for i, j, a in graph.edges:
        w = a + (v.boost if (i, j) in v.boosted else 0.0)
        entries.append(((i, j), w * nu.score((i, j))))
    return ScoredEdgeSet(entries)


def system_matrix(graph: WeightedGraph, u: AdversaryAction, v: DesignerAction) -> np.ndarray:
    """Negative Laplacian under the players' actions.

    Off-diagonal (i, j) is (a_ij + v_ij)(1 - u_ij) for graph edges, zero
    elsewhere; each diagonal entry is the negated off-diagonal row sum, so the
    result is symmetric with zero row sums.
    """
    u.validate(graph)
    v.validate(graph)
    n = graph.node_count
    A = np.zeros((n, n))
    for i, j, a in graph.edges:
        if (i, j) in u.broken:
            continue
        w = a + (v.boost if (i, j) in v.boosted else 0.0)
        A[i, j] = A[j, i] = w
    A[np.diag_indices(n)] = -A.sum(axis=1)
    return A


def break_all(graph: WeightedGraph) -> AdversaryAction:
    return AdversaryAction(graph.edge_list, budget=graph.edge_count)


def edge_subsets(edges: Sequence[Edge], size: int):
    """All ``size``-subsets of ``edges`` in lexicographic order."""
    return combinations(sorted(edges), size)
