"""Scenario files: a line-oriented key-value format with four sections.

    # weights are couplings, 0-based node indices, i < j
    [graph]
    nodes = 3
    edge = 0 1 3.0

    [state]
    x = 1 2 3

    [game]
    horizon = 1e-3
    budget = 1
    boost = 1.0

    [override]      # optional: declared potential scores used for rankings
    nu = 0 1 -1.0

    [schedule]      # optional: fixed actions, one u/v line pair per interval
    u = 0-2
    v = 1-2

Parsing is strict: unknown keys, dangling edge references, and invariant
violations each fail with a distinct diagnostic code and source location.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .dynamics import SwitchingSchedule, WeightFunction
from .errors import GraphError, ScenarioError
from .graph import (
    AdversaryAction,
    DesignerAction,
    Edge,
    ScoredEdgeSet,
    WeightedGraph,
    normalize_edge,
)
from .strategies import GameConfig

_SECTIONS = ("graph", "state", "game", "override", "schedule")
_GAME_KEYS = (
    "horizon",
    "budget",
    "boost",
    "dwell",
    "rho",
    "weight",
    "epsilon",
    "quad_nodes",
    "cap",
)


@dataclass(frozen=True)
class Scenario:
    """Parsed scenario: graph, initial state, game parameters, extras."""

    graph: WeightedGraph
    x0: Tuple[float, ...]
    config: GameConfig
    nu_override: Optional[ScoredEdgeSet] = None
    schedule_u: Optional[Tuple[Tuple[Edge, ...], ...]] = None
    schedule_v: Optional[Tuple[Tuple[Edge, ...], ...]] = None

    def fixed_schedule(self) -> Optional[SwitchingSchedule]:
        """The [schedule] section as a playable switching schedule, if given."""
        if self.schedule_u is None:
            return None
        cfg = self.config
        boundaries = cfg.boundaries()
        actions = []
        for broken, boosted in zip(self.schedule_u, self.schedule_v):
            actions.append(
                (
                    AdversaryAction(broken, cfg.budget),
                    DesignerAction(boosted, cfg.boost, cfg.budget),
                )
            )
        return SwitchingSchedule(boundaries, actions, cfg.dwell)


def _fail(code: str, message: str, line: Optional[int] = None, column: Optional[int] = None):
    raise ScenarioError(code, message, line, column)


def _parse_float(token: str, line: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        _fail("E_SYNTAX", f"{what}: {token!r} is not a number", line)


def _parse_int(token: str, line: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        _fail("E_SYNTAX", f"{what}: {token!r} is not an integer", line)


def _parse_edge_token(token: str, line: int) -> Edge:
    parts = token.split("-")
    if len(parts) != 2:
        _fail("E_SYNTAX", f"edge token {token!r} is not of the form i-j", line)
    i = _parse_int(parts[0], line, "edge endpoint")
    j = _parse_int(parts[1], line, "edge endpoint")
    try:
        return normalize_edge(i, j)
    except GraphError as exc:
        _fail("E_INVARIANT", str(exc), line)


def parse_scenario(text: str) -> Scenario:
    """Strict parse of the scenario grammar with located diagnostics."""
    lines = text.splitlines()
    section = None
    rows: Dict[str, List[Tuple[int, str, str]]] = {name: [] for name in _SECTIONS}
    seen_sections = set()
    meaningful = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        meaningful = True
        if line.startswith("["):
            if not line.endswith("]"):
                _fail("E_SYNTAX", "unterminated section header", lineno)
            name = line[1:-1].strip().lower()
            if name not in _SECTIONS:
                _fail("E_UNKNOWN_KEY", f"unknown section [{name}]", lineno)
            if name in seen_sections:
                _fail("E_SYNTAX", f"duplicate section [{name}]", lineno)
            seen_sections.add(name)
            section = name
            continue
        if section is None:
            _fail("E_SYNTAX", "content before any section header", lineno)
        if "=" not in line:
            _fail("E_SYNTAX", "expected 'key = value'", lineno, line.find(" ") + 1 or None)
        key, value = (part.strip() for part in line.split("=", 1))
        rows[section].append((lineno, key.lower(), value))
    if not meaningful:
        _fail("E_SYNTAX", "empty scenario", 1)
    for required in ("graph", "state", "game"):
        if required not in seen_sections:
            _fail("E_SYNTAX", f"missing required section [{required}]", len(lines) or 1)

    # [graph]
    nodes = None
    edges: List[Tuple[int, int, float]] = []
    for lineno, key, value in rows["graph"]:
        if key == "nodes":
            nodes = _parse_int(value, lineno, "nodes")
        elif key == "edge":
            parts = value.split()
            if len(parts) != 3:
                _fail("E_SYNTAX", "edge needs 'i j weight'", lineno)
            i = _parse_int(parts[0], lineno, "edge endpoint")
            j = _parse_int(parts[1], lineno, "edge endpoint")
            w = _parse_float(parts[2], lineno, "edge weight")
            edges.append((i, j, w))
        else:
            _fail("E_UNKNOWN_KEY", f"unknown key {key!r} in [graph]", lineno)
    if nodes is None:
        _fail("E_SYNTAX", "missing 'nodes' in [graph]", 1)
    try:
        graph = WeightedGraph(nodes, edges)
    except GraphError as exc:
        _fail("E_INVARIANT", str(exc))

    # [state]
    x0: Optional[Tuple[float, ...]] = None
    for lineno, key, value in rows["state"]:
        if key != "x":
            _fail("E_UNKNOWN_KEY", f"unknown key {key!r} in [state]", lineno)
        x0 = tuple(_parse_float(tok, lineno, "state entry") for tok in value.split())
        if len(x0) != graph.node_count:
            _fail(
                "E_INVARIANT",
                f"state has {len(x0)} entries for {graph.node_count} nodes",
                lineno,
            )
    if x0 is None:
        _fail("E_SYNTAX", "missing 'x' in [state]", 1)

    # [game]
    fields: Dict[str, object] = {}
    weight = WeightFunction.constant()
    for lineno, key, value in rows["game"]:
        if key not in _GAME_KEYS:
            _fail("E_UNKNOWN_KEY", f"unknown key {key!r} in [game]", lineno)
        if key == "weight":
            parts = value.split()
            if parts[0] == "constant" and len(parts) == 1:
                weight = WeightFunction.constant()
            elif parts[0] == "exponential" and len(parts) == 2:
                weight = WeightFunction.exponential_decay(
                    _parse_float(parts[1], lineno, "decay rate")
                )
            else:
                _fail("E_SYNTAX", "weight must be 'constant' or 'exponential <alpha>'", lineno)
        elif key in ("budget", "quad_nodes", "cap"):
            fields[key] = _parse_int(value, lineno, key)
        else:
            fields[key] = _parse_float(value, lineno, key)
    for required in ("horizon", "budget", "boost"):
        if required not in fields:
            _fail("E_SYNTAX", f"missing '{required}' in [game]", 1)
    try:
        config = GameConfig(
            horizon=fields["horizon"],
            budget=fields["budget"],
            boost=fields["boost"],
            dwell=fields.get("dwell", fields["horizon"]),
            weight=weight,
            rho=fields.get("rho"),
            epsilon=fields.get("epsilon"),
            quad_nodes=fields.get("quad_nodes", 32),
            enumeration_cap=fields.get("cap", 1_000_000),
        )
    except ValueError as exc:
        _fail("E_INVARIANT", str(exc))
    if config.budget > graph.edge_count:
        _fail("E_INVARIANT", f"budget {config.budget} exceeds link count {graph.edge_count}")

    # [override]
    nu_override = None
    if rows["override"]:
        entries = []
        for lineno, key, value in rows["override"]:
            if key != "nu":
                _fail("E_UNKNOWN_KEY", f"unknown key {key!r} in [override]", lineno)
            parts = value.split()
            if len(parts) != 3:
                _fail("E_SYNTAX", "nu needs 'i j value'", lineno)
            i = _parse_int(parts[0], lineno, "edge endpoint")
            j = _parse_int(parts[1], lineno, "edge endpoint")
            score = _parse_float(parts[2], lineno, "potential value")
            edge = normalize_edge(i, j)
            if not graph.has_edge(edge):
                _fail("E_DANGLING_EDGE", f"override references edge {edge} not in graph", lineno)
            if score > 0:
                _fail("E_INVARIANT", f"potential override for {edge} must be <= 0", lineno)
            entries.append((edge, score))
        nu_override = ScoredEdgeSet(entries)
        if len(nu_override) != graph.edge_count:
            _fail("E_INVARIANT", "override must score every edge exactly once")

    # [schedule]
    schedule_u = schedule_v = None
    if rows["schedule"]:
        us: List[Tuple[Edge, ...]] = []
        vs: List[Tuple[Edge, ...]] = []
        expecting = "u"
        for lineno, key, value in rows["schedule"]:
            if key not in ("u", "v"):
                _fail("E_UNKNOWN_KEY", f"unknown key {key!r} in [schedule]", lineno)
            if key != expecting:
                _fail("E_SYNTAX", f"expected '{expecting} =' line here", lineno)
            edges_here = tuple(_parse_edge_token(tok, lineno) for tok in value.split())
            for e in edges_here:
                if not graph.has_edge(e):
                    _fail(
                        "E_DANGLING_EDGE", f"schedule references edge {e} not in graph", lineno
                    )
            if key == "u":
                us.append(edges_here)
                expecting = "v"
            else:
                vs.append(edges_here)
                expecting = "u"
        if expecting == "v":
            _fail("E_SYNTAX", "schedule ended with an unmatched 'u =' line")
        intervals = len(config.boundaries()) - 1
        if len(us) != intervals:
            _fail(
                "E_INVARIANT",
                f"schedule has {len(us)} interval(s) but the horizon partitions into {intervals}",
            )
        for seq in (us, vs):
            for sets in seq:
                if len(sets) > config.budget:
                    _fail("E_INVARIANT", "scheduled action exceeds the budget")
        schedule_u, schedule_v = tuple(us), tuple(vs)

    return Scenario(graph, x0, config, nu_override, schedule_u, schedule_v)


def serialize_scenario(s: Scenario) -> str:
    """Canonical text form; parse_scenario(serialize_scenario(s)) == s."""
    out = ["[graph]", f"nodes = {s.graph.node_count}"]
    for i, j, w in s.graph.edges:
        out.append(f"edge = {i} {j} {w!r}")
    out.append("")
    out.append("[state]")
    out.append("x = " + " ".join(repr(v) for v in s.x0))
    out.append("")
    out.append("[game]")
    cfg = s.config
    out.append(f"horizon = {cfg.horizon!r}")
    out.append(f"budget = {cfg.budget}")
    out.append(f"boost = {cfg.boost!r}")
    out.append(f"dwell = {cfg.dwell!r}")
    out.append(f"rho = {cfg.rho!r}")
    if cfg.weight.kind == "constant":
        out.append("weight = constant")
    else:
        out.append(f"weight = exponential {cfg.weight.alpha!r}")
    if cfg.epsilon is not None:
        out.append(f"epsilon = {cfg.epsilon!r}")
    out.append(f"quad_nodes = {cfg.quad_nodes}")
    out.append(f"cap = {cfg.enumeration_cap}")
    if s.nu_override is not None:
        out.append("")
        out.append("[override]")
        for (i, j), score in s.nu_override.entries:
            out.append(f"nu = {i} {j} {score!r}")
    if s.schedule_u is not None:
        out.append("")
        out.append("[schedule]")
        for broken, boosted in zip(s.schedule_u, s.schedule_v):
            out.append("u = " + " ".join(f"{i}-{j}" for i, j in broken))
            out.append("v = " + " ".join(f"{i}-{j}" for i, j in boosted))
    return "\n".join(out) + "\n"


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())
