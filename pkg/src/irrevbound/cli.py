"""Command-line front end.

    irrevbound run <config> [--out DIR] [--seed N] [--threads K]
    irrevbound validate <config>
    irrevbound list-recipes

``<config>`` is a TOML file or the name of a bundled recipe (``fig03``).
Without ``--out`` artifacts go to ``$IRREVBOUND_OUTPUT_DIR/<name>``
(default root ``./irrevbound-out``).
"""

import argparse
import json
import os
import sys
from importlib import resources

from .config import load_config
from .exceptions import BracketError, ConfigError, IntegrationError, RegimeError, UnphysicalStateError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_OUTPUT = 4

OUTPUT_ENV = "IRREVBOUND_OUTPUT_DIR"


def recipe_dir():
    return resources.files("irrevbound") / "recipes"


def recipes():
    """``{name: path}`` for every bundled recipe."""
    out = {}
    for entry in sorted(recipe_dir().iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".toml"):
            out[entry.name[:-5]] = str(entry)
    return out


def resolve_config_path(arg):
    if os.path.exists(arg):
        return arg
    known = recipes()
    if arg in known:
        return known[arg]
    raise ConfigError(f"no config file or recipe named {arg!r}")


def _stem(path):
    return os.path.splitext(os.path.basename(path))[0]


def cmd_run(args):
    path = resolve_config_path(args.config)
    cfg = load_config(path)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg.seed = args.seed
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    out = args.out or os.path.join(os.environ.get(OUTPUT_ENV, "irrevbound-out"), _stem(path))
    from .runner import run_scenario

    summary = run_scenario(cfg, out, threads=args.threads)
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    print(f"artifacts written to {out}")
    return EXIT_OK


def cmd_validate(args):
    cfg = load_config(resolve_config_path(args.config))
    print(f"ok: mode={cfg.mode}")
    return EXIT_OK


def cmd_list_recipes(args):
    for name, path in recipes().items():
        try:
            cfg = load_config(path)
            print(f"{name:8s} {cfg.mode:13s} {cfg.title}")
        except ConfigError as exc:
            print(f"{name:8s} invalid: {exc}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="irrevbound", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario and write its artifacts")
    run.add_argument("config")
    run.add_argument("--out", help="output directory")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--threads", type=int, default=1, help="worker threads for sweeps and heatmaps")
    run.set_defaults(func=cmd_run)
    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)
    lst = sub.add_parser("list-recipes", help="list the bundled figure recipes")
    lst.set_defaults(func=cmd_list_recipes)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, UnphysicalStateError, BracketError, RegimeError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT


if __name__ == "__main__":
    sys.exit(main())
