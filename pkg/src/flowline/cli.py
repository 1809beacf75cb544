"""``bench`` command line: run agents, sweep waiting times, solve worker splits."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Optional, Sequence

from . import baselines
from .env import LineEnv, episode_seed, run_episode, summarize
from .observe import ActionError, space_descriptors
from .line import LayoutError
from .scenarios import VARIANTS, WA_NOISE, ScenarioError, ScenarioSpec, wa_minima

RESULT_COLUMNS = ("scenario", "seed", "episode", "total_reward", "n_ok", "n_nok_total", "deadlocked")


def parse_seeds(text: str) -> list[int]:
    """``"0..4"`` (inclusive), ``"3"`` or ``"1,5,9"``."""
    seeds: list[int] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if ".." in chunk:
            low, high = chunk.split("..", 1)
            seeds.extend(range(int(low), int(high) + 1))
        elif chunk:
            seeds.append(int(chunk))
    if not seeds:
        raise argparse.ArgumentTypeError(f"no seeds in {text!r}")
    return seeds


def parse_floats(text: str) -> list[float]:
    """``"0:30:0.5"`` (inclusive range) or a comma list."""
    if ":" in text:
        low, high, step = (float(x) for x in text.split(":"))
        n = int(round((high - low) / step))
        return [round(low + i * step, 10) for i in range(n + 1)]
    return [float(x) for x in text.split(",") if x.strip()]


def _spec(args) -> ScenarioSpec:
    return ScenarioSpec(args.scenario, k=args.k, workers=args.workers, R=args.R,
                        T_sim=args.T_sim, T_step=args.T_step)


def _agent(name: str, spec: ScenarioSpec, lookback: int, seed: int):
    return baselines.make_agent(name, spec, seed=seed, lookback=lookback)


def cmd_run(args) -> int:
    spec = _spec(args)
    events = open(args.events, "w") if args.events else None
    trajectory = open(args.trajectory, "w", newline="") if args.trajectory else None
    traj_writer = csv.writer(trajectory) if trajectory else None
    header_written = False
    rows = []
    try:
        for seed in args.seeds:
            for episode in range(args.episodes):
                run_seed = episode_seed(seed, episode)
                env = LineEnv(spec, log_events=events is not None)
                agent = _agent(args.agent, spec, args.lookback, run_seed)
                on_step = None
                if traj_writer is not None:
                    if not header_written:
                        names = [d.key for d in space_descriptors(spec.build(run_seed).line).observations]
                        traj_writer.writerow(["seed", "episode", "step", *names, "reward"])
                        header_written = True

                    def on_step(step, obs, reward, seed=seed, episode=episode):
                        traj_writer.writerow([seed, episode, step, *obs.values.tolist(), repr(reward)])
                result = run_episode(env, agent, seed=run_seed, episode=episode, on_step=on_step)
                result.seed = seed
                if events is not None:
                    for entry in env.line.engine.log:
                        events.write(json.dumps({"seed": seed, "episode": episode, **entry},
                                                sort_keys=True, default=str) + "\n")
                rows.append(result)
    finally:
        if events is not None:
            events.close()
        if trajectory is not None:
            trajectory.close()

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(RESULT_COLUMNS)
        for r in rows:
            writer.writerow([r.scenario, r.seed, r.episode, repr(r.total_reward), r.n_ok,
                             r.n_nok_total, int(r.deadlocked)])
    finally:
        if out is not sys.stdout:
            out.close()
    print(f"{spec.name} {args.agent}: {summarize([r.total_reward for r in rows])}", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    spec = _spec(args)
    writer = csv.writer(sys.stdout)
    if spec.variant == "CL":
        partitions = [tuple(int(x) for x in p.split("-")) for p in args.partitions] if args.partitions \
            else list(baselines.enumerate_monotone_partitions(spec.workers, spec.k))
        best, mean, table = baselines.grid_search_cl(spec, parse_floats(args.waiting), partitions,
                                                     args.seeds)
        writer.writerow(["waiting_time", "partition", "mean_reward"])
        for (waiting, partition), value in table:
            writer.writerow([waiting, "-".join(map(str, partition)), repr(value)])
        print(f"best: waiting {best[0]} partition {best[1]} mean {mean:.4f}", file=sys.stderr)
        return 0
    if spec.variant not in ("WT", "WTJ"):
        raise ScenarioError("sweep supports WT, WTJ and CL")
    writer.writerow(["waiting_time", "mean_reward", "mean_n_ok"])
    for waiting in parse_floats(args.waiting):
        agent = baselines.StaticAgent({"S_C": {"waiting_time": waiting}})
        env = LineEnv(spec)
        results = [run_episode(env, agent, seed=s) for s in args.seeds]
        writer.writerow([waiting, repr(sum(r.total_reward for r in results) / len(results)),
                         sum(r.n_ok for r in results) / len(results)])
    return 0


def cmd_solve_wa(args) -> int:
    k = args.k
    workers = 3 * k if args.workers is None else args.workers
    minima = wa_minima(k)
    partition, objective = baselines.solve_worker_assignment(minima, [WA_NOISE] * k, workers,
                                                             args.coefficient)
    print(f"partition: {partition}")
    print(f"objective: {objective:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--scenario", required=True, type=str.upper, choices=VARIANTS)
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--R", type=float, default=0.75)
        p.add_argument("--T-sim", dest="T_sim", type=float, default=4000.0)
        p.add_argument("--T-step", dest="T_step", type=float, default=1.0)
        p.add_argument("--seeds", type=parse_seeds, default=[0])

    run = sub.add_parser("run", help="roll out an agent and write per-episode results")
    scenario_args(run)
    run.add_argument("--agent", default="none", choices=baselines.AGENT_NAMES)
    run.add_argument("--lookback", type=int, default=1)
    run.add_argument("--episodes", type=int, default=1)
    run.add_argument("--out", default=None, help="results CSV (default stdout)")
    run.add_argument("--events", default=None, help="JSON-lines engine event log")
    run.add_argument("--trajectory", default=None, help="per-step observation CSV")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="waiting-time grid (WT/WTJ) or CL grid search")
    scenario_args(sweep)
    sweep.add_argument("--waiting", default="0:30:0.5")
    sweep.add_argument("--partitions", nargs="*", default=None, help="CL splits such as 3-3-3")
    sweep.set_defaults(func=cmd_sweep)

    solve = sub.add_parser("solve-wa", help="optimal worker split for the WA benchmark")
    solve.add_argument("--k", type=int, required=True)
    solve.add_argument("--workers", type=int, default=None)
    solve.add_argument("--coefficient", type=float, default=0.3)
    solve.set_defaults(func=cmd_solve_wa)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, LayoutError, ActionError, ValueError) as err:
        print(f"bench: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
