"""``simulate`` command line: one subcommand per sweep task plus ``reproduce``.

Exit codes: 0 success, 1 config error, 2 some sweep points failed.
"""

import argparse
from pathlib import Path
import sys

from .exceptions import ConfigError
from .sweep import TASKS, load_config, parse_config, run

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2

# Desk-scale analogues of the published figures, chained by `reproduce`.
REPRODUCE_CONFIGS = {
    "fig1_population": """
[params]
delta = 0
gamma_a = 0.1
gamma_sigma = 0.01
[lattice]
N = 1
[sweep]
P_sigma = logspace(-2, 3, 51)
[task]
name = steady
""",
    "fig1_g2": """
[params]
delta = 0
gamma_a = 0.5
gamma_sigma = 0.01
[lattice]
N = 1
[sweep]
P_sigma = 0.05, 0.2, 0.5, 1, 2, 5, 10, 20, 40
[task]
name = oracle
[solver]
min_cutoff = 12
""",
    "fig2_populations": """
[params]
gamma_a = 0.1
gamma_sigma = 0.01
P_sigma = 5
[sweep]
N = 4, 12, 32
J = 0.5, 10, 50
delta_over_J = linspace(-3, 3, 121)
[task]
name = figure2
""",
    "fig2_spectrum": """
[params]
gamma_a = 0.1
gamma_sigma = 0.01
P_sigma = 5
[lattice]
N = 1
[sweep]
delta = linspace(-4, 4, 17)
[task]
name = spectrum
[solver]
omega_points = 101
""",
    "fig3_population": """
[params]
delta = 0
gamma_a = 0.1
gamma_sigma = 0.01
[lattice]
N = 12
[sweep]
J = 0.5, 10
P_sigma = logspace(-1, 3, 41)
[task]
name = steady
""",
    "fig3_correlations": """
[params]
J = 0.5
gamma_a = 0.1
gamma_sigma = 0.01
P_sigma = 5
[lattice]
N = 12
[sweep]
delta = linspace(-3, 3, 61)
[task]
name = correlations
""",
    "fig3_lambda": """
[params]
gamma_a = 0.1
gamma_sigma = 0.01
P_sigma = 5
[lattice]
N = 108
[sweep]
delta_over_J = 0, 1, 2
J = geomspace(0.1, 50, 25)
[task]
name = figure3
""",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Rate-equation, correlation and spectrum sweeps for lasing cavity arrays.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="<subcommand>")
    for name in TASKS + ("reproduce",):
        p = sub.add_parser(name, help=("run the built-in figure configs" if name == "reproduce"
                                       else f"run a '{name}' sweep"))
        p.add_argument("--config", type=Path, required=name != "reproduce",
                       help="INI sweep config" + (
                           " (reproduce: a directory of .ini files to chain instead "
                           "of the built-in set)" if name == "reproduce" else ""))
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (SIMULATE_WORKERS overrides)")
        p.add_argument("--seed", type=int, default=None,
                       help="reserved; every algorithm is deterministic")
    return parser


def _task_config(path, task, out):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if "[task]" not in text:
        text += f"\n[task]\nname = {task}\n"
    config = parse_config(text, out_dir=out)
    if config.task != task:
        raise ConfigError(f"[task] name: config is for {config.task!r}, "
                          f"not the {task!r} subcommand")
    return config


def _reproduce_configs(args):
    root = args.out or Path("reproduce")
    if args.config is None:
        for name, text in REPRODUCE_CONFIGS.items():
            yield name, parse_config(text, out_dir=root / name)
        return
    if not args.config.is_dir():
        raise ConfigError(f"reproduce --config must be a directory of .ini files: {args.config}")
    files = sorted(args.config.glob("*.ini"))
    if not files:
        raise ConfigError(f"no .ini files in {args.config}")
    for path in files:
        yield path.stem, load_config(path, out_dir=root / path.stem)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            configs = list(_reproduce_configs(args))
        else:
            configs = [(args.command, _task_config(args.config, args.command, args.out))]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    failed = 0
    for name, config in configs:
        manifest = run(config, workers=args.workers)
        n_fail = len(manifest.failures)
        failed += n_fail
        print(f"{name}: {sum(manifest.rows.values())} rows, {n_fail} failed, "
              f"{len(manifest.warnings)} warnings -> {config.out_dir}")
    return EXIT_PARTIAL if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
