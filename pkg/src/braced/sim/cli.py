"""Command-line entry point: ``braced-sim simulate | validate | sweep``."""

import argparse
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from ..errors import BracedError, ConfigError, SimulationAborted
from .config import load_scenario, parse_value
from .io import emit_outputs, write_summary
from .ik import seed_configuration
from .path import path_pose
from .runner import run_simulation, summarize

log = logging.getLogger("braced.sim")


def _overrides(args):
    out = {}
    for item in args.set or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = parse_value(value)
    if args.dt is not None:
        out["simulation.dt"] = args.dt
    if args.sw2_variant is not None:
        out["resolution.sw2_variant"] = args.sw2_variant
    if getattr(args, "strategy", None) is not None:
        out["resolution.strategy"] = args.strategy
    return out


def _prepare(config, overrides, seed_ik):
    scenario = load_scenario(config, overrides)
    if seed_ik:
        start, _ = path_pose(scenario.path, 0.0)
        initial = seed_configuration(scenario.robot, scenario.constraint, start,
                                     q_guess=scenario.initial.as_vector())
        scenario = replace(scenario, initial=initial)
    return scenario


def run_strategy(scenario, strategy, out_dir=None):
    """Run one strategy; aborted runs still produce outputs with an error status."""
    rescfg = replace(scenario.resolution, strategy=strategy)
    t0 = time.perf_counter()
    try:
        samples, stats = run_simulation(scenario.robot, scenario.constraint, scenario.path,
                                        rescfg, scenario.initial, scenario.settings)
    except SimulationAborted as exc:
        log.error("%s", exc)
        samples = exc.samples
        stats = summarize(samples, strategy, status=f"error: {exc.cause}")
    log.info("%s: %d samples in %.2f s", strategy, len(samples), time.perf_counter() - t0)
    if out_dir is not None:
        emit_outputs(samples, stats, out_dir, n2=scenario.robot.n2)
    return stats


def _job(config, overrides, seed_ik, strategy, out_dir):
    # process-pool worker: reload so nothing unpicklable crosses processes
    return run_strategy(_prepare(config, overrides, seed_ik), strategy, out_dir)


def _run_all(config, overrides, seed_ik, out_dir, jobs):
    scenario = _prepare(config, overrides, seed_ik)
    strategies = scenario.strategies
    if jobs > 1 and len(strategies) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_job, config, overrides, seed_ik, s, out_dir) for s in strategies]
            stats = [f.result() for f in futures]
    else:
        stats = [run_strategy(scenario, s, out_dir) for s in strategies]
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    write_summary(stats, Path(out_dir) / "summary.csv")
    return stats


def _print_table(stats, stream=None):
    stream = sys.stdout if stream is None else stream
    cols = ("mean_Ci", "min_Ci", "mean_prod_sigma_t", "mean_prod_sigma_o",
            "min_sigma_t", "min_sigma_o", "mean_k")
    stream.write(f"{'strategy':28s}" + "".join(f"{c:>18s}" for c in cols) + "  status\n")
    for st in stats:
        stream.write(f"{st.strategy:28s}" + "".join(f"{getattr(st, c):18.6g}" for c in cols)
                     + f"  {st.status}\n")


def cmd_simulate(args):
    stats = _run_all(args.config, _overrides(args), args.seed_ik, args.out, args.jobs)
    _print_table(stats)
    return 0 if all(st.status == "ok" for st in stats) else 3


def cmd_validate(args):
    scenario = _prepare(args.config, _overrides(args), args.seed_ik)
    from ..bracing import region_distance
    from ..robot import forward_kinematics

    b, e = forward_kinematics(scenario.robot, scenario.initial)
    start, _ = path_pose(scenario.path, 0.0)
    offset = scenario.constraint.normal_offset(b.origin)
    r = region_distance(scenario.constraint, b.origin)
    gap = float(((e.origin - start) ** 2).sum() ** 0.5)
    print(f"robot {scenario.robot.name}: {scenario.robot.n1} + {scenario.robot.n2} joints")
    print(f"strategies: {', '.join(scenario.strategies)}")
    print(f"steps: {scenario.path.n_steps} (dt={scenario.path.dt}, duration={scenario.path.duration})")
    print(f"brace normal offset: {offset:.3e} m; region distance {r:.4f} / {scenario.constraint.r_max} m")
    print(f"end effector to path start: {gap:.3e} m")
    problems = []
    if abs(offset) > 1e-6:
        problems.append("brace point is not on the bracing plane")
    if r >= scenario.constraint.r_max:
        problems.append("brace point is outside the bracing region")
    if gap > scenario.settings.max_tracking_error:
        problems.append("end effector is not at the path start")
    for p in problems:
        print(f"error: {p}", file=sys.stderr)
    return 2 if problems else 0


def cmd_sweep(args):
    values = parse_value(args.values)
    if not isinstance(values, list):
        values = [values]
    base = _overrides(args)
    rows = []
    for v in values:
        ov = dict(base)
        ov[args.param] = v
        out = Path(args.out) / f"{args.param}={v}"
        for st in _run_all(args.config, ov, args.seed_ik, out, args.jobs):
            rows.append((v, st))
    Path(args.out).mkdir(parents=True, exist_ok=True)
    with open(Path(args.out) / "sweep.csv", "w") as fh:
        fh.write(f"{args.param},strategy,mean_Ci,mean_k,status\n")
        for v, st in rows:
            fh.write(f"{v},{st.strategy},{st.mean_Ci!r},{st.mean_k!r},{st.status}\n")
    for v, st in rows:
        print(f"{args.param}={v} {st.strategy}: mean_Ci={st.mean_Ci:.6g} mean_k={st.mean_k:.6g} {st.status}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="braced-sim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="scenario YAML file")
        p.add_argument("--sw2-variant", choices=("duality-consistent", "paper-verbatim"))
        p.add_argument("--dt", type=float, help="override simulation.dt")
        p.add_argument("--seed-ik", action="store_true",
                       help="search for a braced start configuration, using the config's joints as a guess")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override any config entry, e.g. path.radius=0.08")

    p = sub.add_parser("simulate", help="run one or all strategies")
    common(p)
    p.add_argument("--strategy", help="strategy name or 'all' (default: as in config)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="run strategies in parallel processes")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="check a config without simulating")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="repeat the simulation over values of one config entry")
    common(p)
    p.add_argument("--param", required=True, help="dotted key, e.g. path.radius")
    p.add_argument("--values", required=True, help="YAML list, e.g. '[0.05, 0.1]'")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (BracedError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
