"""Command-line front end: train, sweep-power, sweep-elements, profile."""

import argparse
import dataclasses
import pathlib
import sys

from .config import ExperimentConfig, load_config
from .experiment import profile_complexity, run, sweep_elements, sweep_power, write_sweep_csv


def _load(args):
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if getattr(args, "agent", None):
        overrides["agent"] = args.agent
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return config.replace(**overrides) if overrides else config


def _out_dir(args):
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_train(args):
    config = _load(args)
    out = _out_dir(args)
    log = run(config)
    log.to_csv(out / "metrics.csv")
    log.write_summary(out / "summary.txt")
    print(f"best_se = {log.summary['best_se']:.4f}  "
          f"final_avg_reward = {log.summary['final_avg_reward']:.4f}")
    print(f"wrote {out / 'metrics.csv'}")


def cmd_sweep_power(args):
    config = _load(args)
    out = _out_dir(args)
    rows = sweep_power(config, args.pt, agents=tuple(args.agents))
    path = out / "sweep_power.csv"
    write_sweep_csv(rows, path, ("agent", "pt_db", "best_se"))
    for row in rows:
        print(f"{row['agent']:>6}  Pt={row['pt_db']:g} dB  best_se={row['best_se']:.4f}")
    print(f"wrote {path}")


def cmd_sweep_elements(args):
    config = _load(args)
    out = _out_dir(args)
    logs = sweep_elements(config, args.n)
    rows = []
    for n, log in logs.items():
        log.to_csv(out / f"metrics_n{n}.csv")
        rows.append({"n": n, "final_avg_reward": log.summary["final_avg_reward"],
                     "best_se": log.summary["best_se"]})
    path = out / "sweep_elements.csv"
    write_sweep_csv(rows, path, ("n", "final_avg_reward", "best_se"))
    for row in rows:
        print(f"N={row['n']:>3}  final_avg_reward={row['final_avg_reward']:.4f}")
    print(f"wrote {path}")


def cmd_profile(args):
    config = _load(args)
    profile = profile_complexity(config)
    # Parameter and byte counts cover the actor, the critics and every
    # target network of the configured agent.
    for fld in dataclasses.fields(profile):
        print(f"{fld.name} = {getattr(profile, fld.name)}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="irsdrl",
        description="Joint IRS phase-shift and transmit beamforming "
                    "optimization with DDPG/TD3.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", help="key=value config file (defaults apply if omitted)")
        p.add_argument("--seed", type=int, help="override the config seed")
        if needs_out:
            p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("train", help="run one training (or random-baseline) arm")
    common(p)
    p.add_argument("--agent", choices=("td3", "ddpg", "random"))
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep-power", help="best SE per agent across transmit powers")
    common(p)
    p.add_argument("--pt", type=float, nargs="+", required=True,
                   help="transmit power points in dB")
    p.add_argument("--agents", nargs="+", default=["td3", "ddpg", "random"],
                   choices=("td3", "ddpg", "random"))
    p.set_defaults(func=cmd_sweep_power)

    p = sub.add_parser("sweep-elements", help="reward trajectories across IRS sizes")
    common(p)
    p.add_argument("--n", type=int, nargs="+", required=True,
                   help="IRS element counts")
    p.set_defaults(func=cmd_sweep_elements)

    p = sub.add_parser("profile", help="model size and episode wall-clock")
    common(p, needs_out=False)
    p.add_argument("--agent", choices=("td3", "ddpg"))
    p.set_defaults(func=cmd_profile)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:  # surface config errors without a traceback
        if type(exc).__name__ == "ConfigError":
            print(f"error: {exc}", file=sys.stderr)
            return 2
        raise
    return 0


if __name__ == "__main__":
    sys.exit(main())
