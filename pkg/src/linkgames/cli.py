"""Scenario-driven command line front end.

    linkgames <command> --scenario FILE [--out DIR] [options]

Commands: simulate, minmax, maxmin, spe-check, oracle, mp-check, horizon.
Every command writes a deterministic report.json into the output directory;
trajectory-producing commands also write trajectory.csv and PNG figures.
Failures map to distinct exit codes (see EXIT_CODES).
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from typing import Optional

import numpy as np

from . import analysis, dynamics, reporting, strategies
from .errors import (
    CapExceededError,
    GraphError,
    InvalidActionError,
    InvalidEpsilonError,
    InvalidMatrixError,
    LinkGamesError,
    PreconditionError,
    ScenarioError,
    ScheduleError,
)
from .graph import NO_ATTACK, DesignerAction
from .scenario import Scenario, load_scenario, serialize_scenario

EXIT_CODES = {
    "ok": 0,
    "unexpected": 1,
    "invalid-scenario": 2,
    "cap-exceeded": 3,
    "numerical": 4,
    "precondition": 5,
}

COMMANDS = ("simulate", "minmax", "maxmin", "spe-check", "oracle", "mp-check", "horizon")


def _default_epsilon(scenario: Scenario) -> float:
    """Half the smallest initial gap across graph edges, unless configured."""
    if scenario.config.epsilon is not None:
        return scenario.config.epsilon
    x = np.asarray(scenario.x0)
    gaps = [abs(x[i] - x[j]) for i, j, _ in scenario.graph.edges]
    return 0.5 * min(gaps)


def _base_report(command: str, scenario: Scenario, seed: Optional[int]) -> dict:
    return {
        "command": command,
        "scenario": serialize_scenario(scenario),
        "seed": seed,
    }


def _scenario_schedule(scenario: Scenario) -> dynamics.SwitchingSchedule:
    fixed = scenario.fixed_schedule()
    if fixed is not None:
        return fixed
    cfg = scenario.config
    quiet = (NO_ATTACK, DesignerAction((), cfg.boost, cfg.budget))
    boundaries = cfg.boundaries()
    return dynamics.SwitchingSchedule(boundaries, (quiet,) * (len(boundaries) - 1), cfg.dwell)


def _write_trajectory_outputs(out_dir, traj, samples, figures, report):
    reporting.write_trajectory_csv(os.path.join(out_dir, "trajectory.csv"), traj, samples)
    report["trajectory_csv"] = "trajectory.csv"
    if figures:
        report["figures"] = reporting.render_figures(out_dir, traj)


def run_command(
    command: str,
    scenario: Scenario,
    out_dir: str,
    samples: int = 201,
    figures: bool = True,
    seed: Optional[int] = None,
) -> int:
    """Execute one CLI command; writes outputs and prints a one-line summary."""
    os.makedirs(out_dir, exist_ok=True)
    cfg = scenario.config
    report = _base_report(command, scenario, seed)

    if command == "simulate":
        schedule = _scenario_schedule(scenario)
        traj = dynamics.simulate(scenario.graph, schedule, scenario.x0)
        value = dynamics.utility(traj, cfg.weight, cfg.quad_nodes)
        report["value"] = value
        report["interval_values"] = reporting.utility_per_interval(traj, cfg.weight, cfg.quad_nodes)
        report["final_state"] = [float(v) for v in traj.breakpoint_states[-1]]
        report["final_disagreement"] = traj.deviation_norm(traj.horizon)
        _write_trajectory_outputs(out_dir, traj, samples, figures, report)
        summary = (
            f"simulate: T={cfg.horizon:g} intervals={schedule.interval_count} "
            f"value={value:.6g} final_disagreement={report['final_disagreement']:.6g}"
        )

    elif command in ("minmax", "maxmin"):
        play = strategies.play_minmax if command == "minmax" else strategies.play_maxmin
        outcome = play(scenario.graph, scenario.x0, cfg, scenario.nu_override)
        report["order"] = command
        report["value"] = outcome.value
        report["interval_values"] = reporting.utility_per_interval(
            outcome.trajectory, cfg.weight, cfg.quad_nodes
        )
        report["intervals"] = [
            {
                "start": outcome.schedule.breakpoints[k],
                "end": outcome.schedule.breakpoints[k + 1],
                "adversary": reporting.edge_labels(outcome.adversary_sets[k]),
                "designer": reporting.edge_labels(outcome.designer_sets[k]),
            }
            for k in range(outcome.schedule.interval_count)
        ]
        _write_trajectory_outputs(out_dir, outcome.trajectory, samples, figures, report)
        u_lbl = ",".join(reporting.edge_labels(outcome.adversary_sets[0])) or "none"
        v_lbl = ",".join(reporting.edge_labels(outcome.designer_sets[0])) or "none"
        summary = f"{command}: value={outcome.value:.6g} u*=[{u_lbl}] v*=[{v_lbl}]"

    elif command == "spe-check":
        eps = _default_epsilon(scenario)
        spe = analysis.spe_condition(scenario.graph, cfg.boost, eps, scenario.x0)
        report["spe"] = {
            "gamma": spe.gamma,
            "bound": spe.bound,
            "diversity_ok": spe.diversity_ok,
            "holds": spe.holds,
            "epsilon": spe.epsilon,
            "boost": spe.boost,
        }
        reporting.write_report(os.path.join(out_dir, "report.json"), report)
        print(
            f"spe-check: holds={'true' if spe.holds else 'false'} gamma={spe.gamma:.6g} "
            f"bound={spe.bound:.6g} b={spe.boost:g}"
        )
        return EXIT_CODES["ok"]

    elif command == "oracle":
        upper = analysis.oracle_game_value(scenario.graph, scenario.x0, cfg, "minmax")
        lower = analysis.oracle_game_value(scenario.graph, scenario.x0, cfg, "maxmin")
        gap = abs(upper.best_value - lower.best_value)
        rel_gap = gap / max(abs(upper.best_value), abs(lower.best_value), 1e-300)
        report["upper"] = {
            "value": upper.best_value,
            "designer": [reporting.edge_labels(s) for s in upper.best_schedule],
            "adversary": [reporting.edge_labels(s) for s in upper.opponent_schedule],
            "evaluations": upper.evaluation_count,
        }
        report["lower"] = {
            "value": lower.best_value,
            "adversary": [reporting.edge_labels(s) for s in lower.best_schedule],
            "designer": [reporting.edge_labels(s) for s in lower.opponent_schedule],
            "evaluations": lower.evaluation_count,
        }
        report["relative_gap"] = rel_gap
        reporting.write_report(os.path.join(out_dir, "report.json"), report)
        print(
            f"oracle: upper={upper.best_value:.6g} lower={lower.best_value:.6g} "
            f"relative_gap={rel_gap:.3g}"
        )
        return EXIT_CODES["ok"]

    elif command == "mp-check":
        schedule = _scenario_schedule(scenario)
        traj = dynamics.simulate(scenario.graph, schedule, scenario.x0)
        v = schedule.actions[0][1]
        mp = analysis.mp_consistency(scenario.graph, traj, cfg.weight, v)
        report["mp"] = {
            "violations": [
                {
                    "t": viol.time,
                    "low": reporting.edge_label(viol.low_edge),
                    "high": reporting.edge_label(viol.high_edge),
                    "excess": viol.excess,
                }
                for viol in mp.violations
            ],
            "worst_margin": mp.worst_margin,
            "tol_w": mp.tol_w,
            "tol_f": mp.tol_f,
            "samples": mp.sample_count,
        }
        _write_trajectory_outputs(out_dir, traj, samples, figures, report)
        summary = (
            f"mp-check: violations={len(mp.violations)} worst_margin={mp.worst_margin:.6g} "
            f"tol_f={mp.tol_f:.6g}"
        )

    elif command == "horizon":
        eps = _default_epsilon(scenario)
        hor = analysis.horizon_bound(scenario.graph, scenario.x0, eps)
        report["horizon"] = {
            "t_max": hor.t_max,
            "cap": hor.cap,
            "capped": hor.capped,
            "epsilon": hor.epsilon,
            "pairs": [
                {"high": hi, "low": lo, "t": t} for hi, lo, t in hor.pair_times
            ],
        }
        reporting.write_report(os.path.join(out_dir, "report.json"), report)
        print(
            f"horizon: t_max={hor.t_max:.6g} cap={hor.cap:.6g} "
            f"capped={'true' if hor.capped else 'false'}"
        )
        return EXIT_CODES["ok"]

    else:
        raise ValueError(f"unknown command {command!r}")

    reporting.write_report(os.path.join(out_dir, "report.json"), report)
    print(summary)
    return EXIT_CODES["ok"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linkgames",
        description="Adversarial link games over continuous-time averaging networks.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--scenario", required=True, help="scenario file path")
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    parser.add_argument("--seed", type=int, default=None, help="seed recorded in reports")
    parser.add_argument("--quad-nodes", type=int, default=None, help="quadrature nodes per interval")
    parser.add_argument("--cap", type=int, default=None, help="enumeration cap override")
    parser.add_argument("--rho", type=float, default=None, help="re-evaluation period override")
    parser.add_argument("--samples", type=int, default=201, help="trajectory CSV grid size")
    parser.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
        cfg = scenario.config
        updates = {}
        if args.quad_nodes is not None:
            updates["quad_nodes"] = args.quad_nodes
        if args.cap is not None:
            updates["enumeration_cap"] = args.cap
        if args.rho is not None:
            updates["rho"] = args.rho
            # Faster re-evaluation implies switching is allowed that often.
            if args.rho < cfg.dwell:
                updates["dwell"] = args.rho
        if updates:
            cfg = dataclasses.replace(cfg, **updates)
            scenario = dataclasses.replace(scenario, config=cfg)
        if scenario.config.budget > scenario.config.subset_budget_cap or (
            scenario.graph.edge_count > scenario.config.subset_edge_cap
        ):
            if args.command in ("minmax", "maxmin"):
                raise CapExceededError(
                    "subset search guard: "
                    f"m={scenario.graph.edge_count} (cap {scenario.config.subset_edge_cap}), "
                    f"budget={scenario.config.budget} (cap {scenario.config.subset_budget_cap})",
                    size=scenario.graph.edge_count,
                    cap=scenario.config.subset_edge_cap,
                )
        return run_command(
            args.command,
            scenario,
            args.out,
            samples=args.samples,
            figures=not args.no_figures,
            seed=args.seed,
        )
    except ScenarioError as exc:
        print(f"error[{exc.diagnostic}]: {exc}", file=sys.stderr)
        return EXIT_CODES["invalid-scenario"]
    except CapExceededError as exc:
        print(f"error[cap-exceeded]: {exc}", file=sys.stderr)
        return EXIT_CODES["cap-exceeded"]
    except (GraphError, InvalidActionError, ScheduleError, InvalidEpsilonError) as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_CODES["invalid-scenario"]
    except PreconditionError as exc:
        print(f"error[precondition]: {exc}", file=sys.stderr)
        return EXIT_CODES["precondition"]
    except (InvalidMatrixError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error[numerical]: {exc}", file=sys.stderr)
        return EXIT_CODES["numerical"]
    except LinkGamesError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_CODES["unexpected"]


if __name__ == "__main__":
    sys.exit(main())
