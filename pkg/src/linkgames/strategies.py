"""Optimal link-attack and link-defense procedures and the two game engines.

Every procedure ranks edges by potential-theoretic scores built from the
instantaneous state (or an explicit score override) and selects with the
deterministic lexicographic tie-break, so identical inputs always produce
identical edge sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import (
    SwitchingSchedule,
    Trajectory,
    WeightFunction,
    simulate,
    utility,
)
from .errors import PreconditionError
from .graph import (
    CONSENSUS_GAP_TOL,
    AdversaryAction,
    DesignerAction,
    Edge,
    ScoredEdgeSet,
    WeightedGraph,
    edge_subsets,
    phi_ell,
    potentials,
    weighted_potentials,
)


@dataclass(frozen=True)
class GameConfig:
    """Shared game parameters known to both players."""

    horizon: float
    budget: int
    boost: float
    dwell: float
    weight: WeightFunction = field(default_factory=WeightFunction.constant)
    rho: Optional[float] = None  # re-evaluation period, defaults to dwell
    epsilon: Optional[float] = None  # separation parameter for the SPE check
    quad_nodes: int = 32
    enumeration_cap: int = 1_000_000
    subset_edge_cap: int = 16  # subset-search guard (edges)
    subset_budget_cap: int = 4  # subset-search guard (budget)
    tie_tol: float = 1e-9
    consensus_tol: float = 1e-10

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.dwell <= 0:
            raise ValueError("dwell must be positive")
        if self.budget < 0:
            raise ValueError("budget must be non-negative")
        if self.boost < 0:
            raise ValueError("boost must be non-negative")
        rho = self.dwell if self.rho is None else self.rho
        if rho < self.dwell:
            raise ValueError("re-evaluation period must be at least the dwell time")
        object.__setattr__(self, "rho", float(rho))

    def boundaries(self) -> Tuple[float, ...]:
        """Interval boundaries: re-evaluate every rho, last interval absorbs
        the remainder so each piece keeps the dwell-time guarantee."""
        count = max(1, int(np.floor(self.horizon / self.rho + 1e-12)))
        cuts = [i * self.rho for i in range(count)]
        cuts.append(self.horizon)
        return tuple(cuts)


@dataclass(frozen=True, eq=False)
class GameOutcome:
    """Played schedule, trajectory, value, and per-interval chosen sets."""

    schedule: SwitchingSchedule
    trajectory: Trajectory
    value: float
    adversary_sets: Tuple[Tuple[Edge, ...], ...]
    designer_sets: Tuple[Tuple[Edge, ...], ...]


def _scores(
    graph: WeightedGraph, x: Sequence[float], nu: Optional[ScoredEdgeSet]
) -> ScoredEdgeSet:
    return potentials(graph, x) if nu is None else nu


def _nonzero_edges(scores: ScoredEdgeSet) -> Tuple[Edge, ...]:
    # Potentials are <= 0; gaps below the consensus threshold count as zero.
    cutoff = -(CONSENSUS_GAP_TOL**2)
    return tuple(e for e, s in scores.entries if s < cutoff)


def adversary_minmax_response(
    graph: WeightedGraph,
    v: DesignerAction,
    x: Sequence[float],
    budget: int,
    nu: Optional[ScoredEdgeSet] = None,
) -> AdversaryAction:
    """Follower attack against a committed boost: break the ``budget`` edges
    with the smallest boosted potentials (a_ij + v_ij) nu_ij."""
    nu = _scores(graph, x, nu)
    ranked = weighted_potentials(graph, v, nu=nu)
    return AdversaryAction(phi_ell(ranked, budget), budget)


def designer_maxmin_response(
    graph: WeightedGraph,
    u: AdversaryAction,
    x: Sequence[float],
    budget: int,
    boost: float,
    nu: Optional[ScoredEdgeSet] = None,
) -> DesignerAction:
    """Follower defense against a committed attack: boost the surviving edges
    with the smallest potentials; all survivors when fewer than the budget."""
    u.validate(graph)
    nu = _scores(graph, x, nu)
    survivors = [e for e in graph.edge_list if e not in u.broken]
    candidates = nu.restrict(survivors).restrict(_nonzero_edges(nu))
    return DesignerAction(phi_ell(candidates, budget), boost, budget)


def adversary_maxmin_first(
    graph: WeightedGraph,
    x: Sequence[float],
    budget: int,
    boost: float,
    nu: Optional[ScoredEdgeSet] = None,
) -> AdversaryAction:
    """Leader attack: rank each edge by the smaller of a_ij nu_ij and
    (a_ij + b) nu_ij and break the ``budget`` lowest-ranked edges."""
    nu = _scores(graph, x, nu)
    entries = []
    for i, j, a in graph.edges:
        s = nu.score((i, j))
        entries.append(((i, j), a * s))
        entries.append(((i, j), (a + boost) * s))
    ranked = ScoredEdgeSet(entries)  # collapses to the per-edge minimum
    return AdversaryAction(phi_ell(ranked, budget), budget)


def designer_algorithm_one(
    graph: WeightedGraph,
    x: Sequence[float],
    budget: int,
    boost: float,
    nu: Optional[ScoredEdgeSet] = None,
) -> DesignerAction:
    """Leader defense by ranking manipulation.

    For subset sizes i = budget down to 1, search (lexicographically) for a
    boost set S among the non-attacked edges that pushes the i-th ranked
    attacked link out of the follower's attack set; on success boost S plus
    the lowest-potential edges that escaped.  If no subset ever succeeds,
    boost the lowest-potential non-attacked edges.  Zero-potential edges are
    never boosted.
    """
    nu = _scores(graph, x, nu)
    ell = budget
    nonzero = set(_nonzero_edges(nu))
    if ell == 0 or not nonzero:
        return DesignerAction((), boost, budget)

    baseline = phi_ell(weighted_potentials(graph, DesignerAction((), boost, 0), nu=nu), ell)
    attacked = list(baseline)  # ascending score order: index 0 is most negative
    pool = sorted(e for e in graph.edge_list if e not in set(baseline) and e in nonzero)

    def attack_under(v: DesignerAction) -> Tuple[Edge, ...]:
        return phi_ell(weighted_potentials(graph, v, nu=nu), ell)

    for i in range(min(ell, len(attacked)), 0, -1):
        # i-th ranked attacked link, counting down from the least negative:
        # ascending index ell - i (the most negative when i = ell).
        target = attacked[len(attacked) - i]
        if len(pool) < i:
            continue
        for S in edge_subsets(pool, i):
            vS = DesignerAction(S, boost, ell)
            new_attack = attack_under(vS)
            if target in new_attack:
                continue
            escaped = [
                e
                for e in graph.edge_list
                if e not in set(new_attack) and e not in set(S) and e in nonzero
            ]
            extra = phi_ell(nu.restrict(escaped), ell - i)
            return DesignerAction(tuple(S) + extra, boost, budget)

    fallback = [e for e in graph.edge_list if e not in set(baseline) and e in nonzero]
    return DesignerAction(phi_ell(nu.restrict(fallback), ell), boost, budget)


def _play(
    graph: WeightedGraph,
    x0: Sequence[float],
    cfg: GameConfig,
    order: str,
    nu: Optional[ScoredEdgeSet] = None,
) -> GameOutcome:
    if cfg.budget > graph.edge_count:
        raise PreconditionError(
            f"budget {cfg.budget} exceeds the number of links {graph.edge_count}"
        )
    x = np.asarray(x0, dtype=float)
    boundaries = cfg.boundaries()
    actions: List[Tuple[AdversaryAction, DesignerAction]] = []
    u_sets: List[Tuple[Edge, ...]] = []
    v_sets: List[Tuple[Edge, ...]] = []
    for k in range(len(boundaries) - 1):
        if order == "minmax":
            v = designer_algorithm_one(graph, x, cfg.budget, cfg.boost, nu)
            u = adversary_minmax_response(graph, v, x, cfg.budget, nu)
        else:
            u = adversary_maxmin_first(graph, x, cfg.budget, cfg.boost, nu)
            v = designer_maxmin_response(graph, u, x, cfg.budget, cfg.boost, nu)
        actions.append((u, v))
        u_sets.append(tuple(sorted(u.broken)))
        v_sets.append(tuple(sorted(v.boosted)))
        piece = SwitchingSchedule(
            (0.0, boundaries[k + 1] - boundaries[k]), ((u, v),), cfg.dwell
        )
        x = simulate(graph, piece, x).breakpoint_states[-1]
    schedule = SwitchingSchedule(boundaries, actions, cfg.dwell)
    traj = simulate(graph, schedule, x0)
    value = utility(traj, cfg.weight, cfg.quad_nodes)
    return GameOutcome(schedule, traj, value, tuple(u_sets), tuple(v_sets))


def play_minmax(
    graph: WeightedGraph,
    x0: Sequence[float],
    cfg: GameConfig,
    nu: Optional[ScoredEdgeSet] = None,
) -> GameOutcome:
    """Defense-first game: at every re-evaluation boundary the designer runs
    the ranking-manipulation procedure, then the adversary best-responds."""
    return _play(graph, x0, cfg, "minmax", nu)


def play_maxmin(
    graph: WeightedGraph,
    x0: Sequence[float],
    cfg: GameConfig,
    nu: Optional[ScoredEdgeSet] = None,
) -> GameOutcome:
    """Attack-first game: the adversary leads with the two-weighting ranking,
    then the designer boosts the most exposed surviving links."""
    return _play(graph, x0, cfg, "maxmin", nu)
