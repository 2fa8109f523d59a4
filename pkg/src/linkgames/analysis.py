"""Verification machinery: SPE condition, horizon bounds, costate ordering
checks, and the brute-force enumeration oracle.

The oracle enumerates full per-interval schedules for one player against a
fixed opponent (or nested for a whole game), simulates each candidate exactly,
and compares values with a relative tie tolerance; ties fall back to
lexicographic schedule order so results are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .dynamics import (
    EIGENVALUE_ZERO_TOL,
    Trajectory,
    WeightFunction,
    costate,
    gauss_legendre_nodes,
    matrix_exponential_action,
)
from .errors import CapExceededError, InvalidEpsilonError, PreconditionError
from .graph import (
    NO_ATTACK,
    NO_BOOST,
    AdversaryAction,
    DesignerAction,
    Edge,
    WeightedGraph,
    edge_subsets,
    system_matrix,
)
from .strategies import GameConfig

VALUE_TIE_REL_TOL = 1e-9


# ---------------------------------------------------------------------------
# SPE sufficient condition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpeReport:
    """Outcome of the saddle-point existence check."""

    gamma: float
    bound: float
    diversity_ok: bool
    holds: bool
    epsilon: float
    boost: float


def spe_condition(
    graph: WeightedGraph, boost: float, epsilon: float, x0: Sequence[float]
) -> SpeReport:
    """Check the sufficient condition for order-independence of the game.

    gamma = 4 ||x0||_inf^2 / epsilon^2 must exceed 1; edge weights must be
    pairwise distinct and gamma-separated (larger weight > gamma * smaller);
    and the boost must not exceed min |gamma a_ij - a_kl| over ordered pairs
    with distinct weights.  When all three hold, the attacker targets the same
    links whether it leads or follows, so the two play orders agree.
    """
    if epsilon <= 0:
        raise InvalidEpsilonError("epsilon must be positive")
    x0 = np.asarray(x0, dtype=float)
    gamma = 4.0 * float(np.max(np.abs(x0))) ** 2 / epsilon**2
    if gamma <= 1.0:
        raise InvalidEpsilonError(
            f"epsilon = {epsilon} gives gamma = {gamma} <= 1; choose a smaller epsilon"
        )
    weights = [w for _, _, w in graph.edges]
    diversity_ok = True
    bound = float("inf")
    for a_idx, a in enumerate(weights):
        for b_idx, b in enumerate(weights):
            if a_idx == b_idx:
                continue
            if a == b:
                diversity_ok = False
                continue
            bound = min(bound, abs(gamma * a - b))
            if a > b and not (a > gamma * b):
                diversity_ok = False
    holds = diversity_ok and 0.0 <= boost <= bound
    return SpeReport(gamma, bound, diversity_ok, holds, float(epsilon), float(boost))


# ---------------------------------------------------------------------------
# Horizon bound (state-gap envelopes)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HorizonReport:
    """Smallest predicted gap-crossing time and the per-pair details."""

    t_max: float
    cap: float
    epsilon: float
    # (higher-ranked node, lower-ranked node, crossing time or None) from the
    # first window, in descending state order.
    pair_times: Tuple[Tuple[int, int, Optional[float]], ...]
    capped: bool


def _pair_crossing(smax: float, smin: float, a_hi: float, a_lo: float, eps: float):
    """First time the envelope gap smax e^{-a_hi t} - smin e^{-a_lo t} hits eps.

    Defined only when the higher-ranked node dissipates faster (a_hi > a_lo);
    otherwise the envelopes never meet and the pair is unconstrained.
    """
    if not a_hi > a_lo:
        return None
    gap0 = smax - smin
    if gap0 <= eps:
        return 0.0
    t_zero = np.log(smax / smin) / (a_hi - a_lo)

    def g(t):
        return smax * np.exp(-a_hi * t) - smin * np.exp(-a_lo * t) - eps

    return float(brentq(g, 0.0, t_zero, xtol=1e-15, rtol=1e-14))


def horizon_bound(
    graph: WeightedGraph,
    x0: Sequence[float],
    epsilon: float,
    dwell: Optional[float] = None,
    cap: Optional[float] = None,
) -> HorizonReport:
    """Horizon below which adjacent state gaps are predicted to stay >= epsilon.

    For each pair of nodes adjacent in the descending state order, solves the
    exponential-envelope crossing (row-sum rates, max/min state amplitudes)
    for the first time the envelope gap falls to ``epsilon``; the bound is the
    minimum over defined pairs, re-evaluated every ``dwell`` from the evolved
    (uncontrolled) state, and capped at ``cap`` (default 10 / |lambda_2|).
    Pairs with equal or inverted rates, or sign-mixed states, contribute no
    constraint.
    """
    if epsilon <= 0:
        raise PreconditionError("epsilon must be positive")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (graph.node_count,):
        raise PreconditionError(f"x0 must have length {graph.node_count}")
    if len(np.unique(x0)) != x0.shape[0]:
        raise PreconditionError("state entries must be strictly ordered (pairwise distinct)")
    A = system_matrix(graph, NO_ATTACK, NO_BOOST)
    rates = -np.diag(A)
    lam = np.linalg.eigvalsh(A)
    fiedler = abs(lam[-2]) if graph.node_count > 1 else 1.0
    if cap is None:
        cap = 10.0 / max(fiedler, EIGENVALUE_ZERO_TOL)
    if dwell is None:
        dwell = cap / 100.0

    def window_pairs(x: np.ndarray):
        order = np.argsort(-x, kind="stable")
        s = x[order]
        pairs = []
        if s[-1] > 0:
            sgn = s
        elif s[0] < 0:
            sgn = -s[::-1]
            order = order[::-1]
        else:
            sgn = None
        for k in range(1, len(order)):
            hi, lo = int(order[k - 1]), int(order[k])
            t = None
            if sgn is not None:
                t = _pair_crossing(float(sgn[0]), float(sgn[-1]), rates[hi], rates[lo], epsilon)
            pairs.append((hi, lo, t))
        return pairs

    t0 = 0.0
    x = x0.copy()
    first_pairs = window_pairs(x)
    pairs = first_pairs
    best = cap
    while t0 < cap:
        defined = [t for _, _, t in pairs if t is not None]
        if defined:
            # Keep the smallest prediction seen from any window start; later
            # windows cannot predict below their own start time, so stop once
            # the incumbent is already earlier.
            best = min(best, t0 + min(defined))
        if best <= t0 + dwell:
            break
        x = matrix_exponential_action(A, dwell, x)
        t0 += dwell
        pairs = window_pairs(x)
    t_max = float(min(best, cap))
    return HorizonReport(t_max, float(cap), float(epsilon), tuple(first_pairs), bool(t_max >= cap))


# ---------------------------------------------------------------------------
# Maximum-principle consistency
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MpViolation:
    time: float
    low_edge: Edge
    high_edge: Edge
    excess: float


@dataclass(frozen=True)
class MpReport:
    """Ordering violations and the first-order defect of the costate scores."""

    violations: Tuple[MpViolation, ...]
    worst_margin: float
    tol_w: float
    tol_f: float
    sample_count: int

    @property
    def consistent(self) -> bool:
        return not self.violations


def mp_consistency(
    graph: WeightedGraph,
    traj: Trajectory,
    k: WeightFunction,
    v: DesignerAction,
    samples_per_interval: int = 9,
    tol_w: float = 1e-9,
    tol_f: Optional[float] = None,
) -> MpReport:
    """Check that lower weighted potentials imply lower costate scores.

    On a sample grid, computes w_ij = (a_ij + v_ij) nu_ij and the costate
    statistic f_ij = (a_ij + v_ij)(p_i - p_j)(x_j - x_i) and reports every
    ordered edge pair and time where w_ij <= w_kl - tol_w yet
    f_ij > f_kl + tol_f.  ``worst_margin`` is the largest deviation of f_ij
    from its first-order prediction K(t) w_ij with K(t) the tail mass of k;
    the implication is first-order, so this margin shrinks quadratically with
    the horizon.  tol_f defaults to 10 T^2 on the same grounds.
    """
    actions = set(traj.schedule.actions)
    if len(actions) > 1:
        raise PreconditionError("trajectory must come from a constant-action schedule")
    v.validate(graph)
    T = traj.horizon
    if tol_f is None:
        tol_f = 10.0 * T * T
    times, P = costate(traj, k, samples_per_interval)
    X = traj.states(times)
    coupling = {
        (i, j): a + (v.boost if (i, j) in v.boosted else 0.0) for i, j, a in graph.edges
    }
    pair_edges = sorted(coupling)
    tails = np.asarray(k.tail_integral(times, T))
    violations: List[MpViolation] = []
    worst = 0.0
    for row, t in enumerate(times):
        x = X[row]
        p = P[row]
        w_scores = {}
        f_scores = {}
        for (i, j) in pair_edges:
            c = coupling[(i, j)]
            w_scores[(i, j)] = -c * (x[i] - x[j]) ** 2
            f_scores[(i, j)] = c * (p[i] - p[j]) * (x[j] - x[i])
            worst = max(worst, abs(f_scores[(i, j)] - tails[row] * w_scores[(i, j)]))
        for e_low in pair_edges:
            for e_high in pair_edges:
                if e_low == e_high:
                    continue
                if w_scores[e_low] <= w_scores[e_high] - tol_w:
                    excess = f_scores[e_low] - f_scores[e_high]
                    if excess > tol_f:
                        violations.append(MpViolation(float(t), e_low, e_high, excess))
    return MpReport(tuple(violations), worst, tol_w, float(tol_f), len(times))


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    """Best value found by enumeration along with the winning schedules."""

    best_value: float
    best_schedule: Tuple[Tuple[Edge, ...], ...]
    evaluation_count: int
    player: str
    opponent_schedule: Tuple[Tuple[Edge, ...], ...] = ()


class _ValueEvaluator:
    """Simulates candidate schedules with a spectral cache shared per instance."""

    def __init__(self, graph: WeightedGraph, x0: Sequence[float], cfg: GameConfig):
        self.graph = graph
        self.x0 = np.asarray(x0, dtype=float)
        self.cfg = cfg
        self.boundaries = cfg.boundaries()
        self._cache: Dict[Tuple, Tuple[np.ndarray, np.ndarray]] = {}

    def _spectral(self, u: AdversaryAction, v: DesignerAction):
        key = (tuple(sorted(u.broken)), tuple(sorted(v.boosted)), v.boost)
        hit = self._cache.get(key)
        if hit is None:
            A = system_matrix(self.graph, u, v)
            lam, Q = np.linalg.eigh(A)
            lam = np.where(np.abs(lam) < EIGENVALUE_ZERO_TOL, 0.0, lam)
            hit = (lam, Q)
            self._cache[key] = hit
        return hit

    def value(self, pairs: Sequence[Tuple[AdversaryAction, DesignerAction]]) -> float:
        """Same quadrature and spectral formulas as dynamics.utility."""
        x = self.x0
        drop_before = 0.0
        total = 0.0
        for idx, (u, v) in enumerate(pairs):
            lam, Q = self._spectral(u, v)
            a, b = self.boundaries[idx], self.boundaries[idx + 1]
            z = Q.T @ x
            ts, w = gauss_legendre_nodes(a, b, self.cfg.quad_nodes)
            drops = drop_before - (z**2) @ np.expm1(2.0 * np.outer(lam, ts - a))
            total += float(np.dot(w, self.cfg.weight(ts) * drops))
            span = b - a
            drop_before = drop_before - float((z**2) @ np.expm1(2.0 * lam * span))
            x = Q @ (np.exp(lam * span) * z)
        return total


def _candidate_sizes(budget: int, available: int, sub_budget: bool) -> List[int]:
    top = min(budget, available)
    return list(range(0, top + 1)) if sub_budget else [top]


def _adversary_candidates(
    graph: WeightedGraph, budget: int, sub_budget: bool
) -> List[AdversaryAction]:
    out = []
    for size in _candidate_sizes(budget, graph.edge_count, sub_budget):
        for combo in edge_subsets(graph.edge_list, size):
            out.append(AdversaryAction(combo, budget))
    return out

def _designer_candidates(
    graph: WeightedGraph, u: AdversaryAction, budget: int, boost: float, sub_budget: bool
) -> List[DesignerAction]:
    survivors = [e for e in graph.edge_list if e not in u.broken]
    out = []
    for size in _candidate_sizes(budget, len(survivors), sub_budget):
        for combo in edge_subsets(survivors, size):
            out.append(DesignerAction(combo, boost, budget))
    return out


def _is_better(candidate: float, incumbent: float, minimize: bool) -> bool:
    tol = VALUE_TIE_REL_TOL * max(abs(incumbent), abs(candidate), 1e-300)
    if minimize:
        return candidate < incumbent - tol
    return candidate > incumbent + tol


def _schedule_key(actions) -> Tuple[Tuple[Edge, ...], ...]:
    out = []
    for act in actions:
        edges = act.broken if isinstance(act, AdversaryAction) else act.boosted
        out.append(tuple(sorted(edges)))
    return tuple(out)


def oracle_best_response(
    graph: WeightedGraph,
    x0: Sequence[float],
    cfg: GameConfig,
    player: str,
    opponent_schedule: Sequence,
    sub_budget: bool = False,
) -> OracleResult:
    """Exhaustive best response for one player against a fixed opponent.

    Enumerates every per-interval budget-saturating edge subset (all smaller
    subsets too when ``sub_budget``), simulates each schedule, and returns the
    value-optimal one; the adversary minimizes the disagreement-reduction
    value, the designer maximizes it.  Ties within a relative tolerance fall
    back to lexicographic schedule order.
    """
    if player not in ("adversary", "designer"):
        raise ValueError("player must be 'adversary' or 'designer'")
    evaluator = _ValueEvaluator(graph, x0, cfg)
    intervals = len(evaluator.boundaries) - 1
    opponent = list(opponent_schedule)
    if len(opponent) != intervals:
        raise PreconditionError(
            f"opponent schedule has {len(opponent)} intervals, expected {intervals}"
        )
    if player == "adversary":
        per_interval = [_adversary_candidates(graph, cfg.budget, sub_budget)] * intervals
    else:
        per_interval = [
            _designer_candidates(graph, u, cfg.budget, cfg.boost, sub_budget)
            for u in opponent
        ]
    size = 1
    for options in per_interval:
        size *= len(options)
    if size > cfg.enumeration_cap:
        raise CapExceededError(
            f"enumeration size {size} exceeds cap {cfg.enumeration_cap}",
            size=size,
            cap=cfg.enumeration_cap,
        )
    best_value = None
    best_actions = None
    count = 0
    minimize = player == "adversary"
    for combo in product(*per_interval):
        if player == "adversary":
            pairs = list(zip(combo, opponent))
        else:
            pairs = list(zip(opponent, combo))
        val = evaluator.value(pairs)
        count += 1
        if best_value is None or _is_better(val, best_value, minimize):
            best_value = val
            best_actions = combo
    return OracleResult(
        best_value, _schedule_key(best_actions), count, player, _schedule_key(opponent)
    )


def oracle_game_value(
    graph: WeightedGraph,
    x0: Sequence[float],
    cfg: GameConfig,
    order: str,
    sub_budget: bool = False,
) -> OracleResult:
    """Exact game value by nested enumeration.

    ``minmax``: the designer commits a full boost schedule over the whole
    graph; the adversary best-responds by enumeration; the designer picks the
    commitment with the largest best-response value.  ``maxmin``: the
    adversary commits, the designer best-responds over the surviving edges of
    each interval (boosting a broken link is never feasible), and the
    adversary picks the commitment with the smallest value.  The result
    carries the outer player's winning schedule; ``opponent_schedule`` holds
    the inner reply.
    """
    if order not in ("minmax", "maxmin"):
        raise ValueError("order must be 'minmax' or 'maxmin'")
    evaluator = _ValueEvaluator(graph, x0, cfg)
    intervals = len(evaluator.boundaries) - 1
    if order == "minmax":
        outer_options = [
            _designer_candidates(graph, NO_ATTACK, cfg.budget, cfg.boost, sub_budget)
        ] * intervals
        inner_options = [_adversary_candidates(graph, cfg.budget, sub_budget)] * intervals
        outer_size = int(np.prod([len(o) for o in outer_options]))
        inner_size = int(np.prod([len(o) for o in inner_options]))
        total = outer_size * inner_size
        if total > cfg.enumeration_cap:
            raise CapExceededError(
                f"nested enumeration size {total} exceeds cap {cfg.enumeration_cap}",
                size=total,
                cap=cfg.enumeration_cap,
            )
        best = None
        count = 0
        for vs in product(*outer_options):
            reply_value = None
            reply = None
            for us in product(*inner_options):
                val = evaluator.value(list(zip(us, vs)))
                count += 1
                if reply_value is None or _is_better(val, reply_value, minimize=True):
                    reply_value = val
                    reply = us
            if best is None or _is_better(reply_value, best[0], minimize=False):
                best = (reply_value, vs, reply)
        value, outer, inner = best
        return OracleResult(value, _schedule_key(outer), count, "designer", _schedule_key(inner))
    best = None
    count = 0
    outer_options = [_adversary_candidates(graph, cfg.budget, sub_budget)] * intervals
    outer_size = int(np.prod([len(o) for o in outer_options]))
    for us in product(*outer_options):
        inner_options = [
            _designer_candidates(graph, u, cfg.budget, cfg.boost, sub_budget) for u in us
        ]
        inner_size = int(np.prod([len(o) for o in inner_options]))
        count_check = outer_size * inner_size
        if count_check > cfg.enumeration_cap:
            raise CapExceededError(
                f"nested enumeration size {count_check} exceeds cap {cfg.enumeration_cap}",
                size=count_check,
                cap=cfg.enumeration_cap,
            )
        reply_value = None
        reply = None
        for vs in product(*inner_options):
            for u, v in zip(us, vs):
                assert not (v.boosted & u.broken), "designer boosted a broken link"
            val = evaluator.value(list(zip(us, vs)))
            count += 1
            if reply_value is None or _is_better(val, reply_value, minimize=False):
                reply_value = val
                reply = vs
        if best is None or _is_better(reply_value, best[0], minimize=True):
            best = (reply_value, us, reply)
    value, outer, inner = best
    return OracleResult(value, _schedule_key(outer), count, "adversary", _schedule_key(inner))
