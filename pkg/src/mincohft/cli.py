"""Command-line front end: eval, verify, deform-check, dims."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

from .cohft_gamma import make_theory, verify_theorem_1
from .deformations import (
    Bounds,
    DeformationTable,
    check_deformation_axioms,
    check_isotropic,
    correction_table,
)
from .errors import CohFTError
from .formal_classes import FormalGamma
from .genus1_dimensions import dims_csv, grw_table, minimal_table
from .state_space import GRADED, MODES, StateSpace, parse_insertions
from .sweep import SweepConfig
from .topft import require_stable, topft_value

EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3

_INT_KEYS = {f.name for f in fields(SweepConfig) if f.type in ("int", "int | None")}
_CONFIG_KEYS = {f.name for f in fields(SweepConfig)}


class ConfigError(CohFTError):
    pass


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """``key = value`` lines; ``#`` starts a comment; values may be quoted."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        value = value.strip("\"'")
        if key in _INT_KEYS:
            try:
                out[key] = int(value)
            except ValueError:
                raise ConfigError(f"{source}:{lineno}: {key} must be an integer, got {value!r}") from None
        else:
            out[key] = value
    return out


def load_config(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), path)


def build_sweep_config(args: argparse.Namespace) -> SweepConfig:
    """CLI flags override the config file, which overrides the defaults."""
    values = load_config(args.config) if args.config else {}
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    for key in ("h", "m", "deg"):
        if key not in values:
            raise ConfigError(f"missing required parameter {key} (flag --{key} or config key)")
    return SweepConfig(**values)


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# subcommands


def cmd_eval(args) -> int:
    ins = parse_insertions(args.insertions or "")
    if args.topft:
        if args.m is None:
            raise ConfigError("eval --topft requires --m")
        space = StateSpace(args.m, args.mode)
        require_stable(args.g, len(ins))
        for v in ins:
            space.check(v)
        print(topft_value(space, args.g, ins))
        return EXIT_OK
    for key in ("h", "m", "deg"):
        if getattr(args, key) is None:
            raise ConfigError(f"eval requires --{key} (or --topft)")
    gamma = FormalGamma(args.h, args.m, args.deg, args.mode)
    # the trivial theory's single basis vector is written a
    print(make_theory(gamma).evaluate(args.g, ins))
    return EXIT_OK


def cmd_verify(args) -> int:
    config = build_sweep_config(args)
    gamma = FormalGamma(config.h, config.m, config.deg, config.mode)
    report = verify_theorem_1(gamma, config)
    _emit(report.render(config.format), config.output)
    if config.output:
        print(f"wrote {config.output}: {report.totals}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_COUNTEREXAMPLE


def cmd_deform_check(args) -> int:
    if args.table:
        bounds = None
        if args.g_max is not None or args.n_max is not None:
            if args.g_max is None or args.n_max is None:
                raise ConfigError("--g-max and --n-max must be given together")
            bounds = Bounds(args.g_max, args.n_max)
        lam = DeformationTable.load(args.table, bounds)
    else:
        for key in ("h", "m", "deg"):
            if getattr(args, key) is None:
                raise ConfigError(f"deform-check needs a table path or --h/--m/--deg (missing --{key})")
        gamma = FormalGamma(args.h, args.m, args.deg, args.mode)
        if gamma.trivial:
            raise ConfigError("(h,m)=(0,3) has no correction: its deformation table is zero")
        lam = correction_table(gamma, args.g_max, args.n_max)
    b = lam.bounds
    config = SweepConfig(h=0, m=lam.m, deg=0, mode=lam.mode, g_max=b.g_max, n_max=b.n_max,
                         seed=args.seed, sample_count=args.sample_count, detail=args.detail,
                         format=args.format)
    report = check_deformation_axioms(lam, config=config)
    isotropic = check_isotropic(lam, config)
    report.totals["isotropic"] = isotropic
    _emit(report.render(args.format), args.output)
    return EXIT_OK if report.ok and isotropic else EXIT_COUNTEREXAMPLE


def cmd_dims(args) -> int:
    if args.n_max < 1:
        raise ConfigError(f"--n-max must be at least 1, got {args.n_max}")
    if args.format == "csv":
        _emit(dims_csv(args.n_max, args.grw), args.output)
    else:
        rows = grw_table(args.n_max) if args.grw else minimal_table(args.n_max)
        keys = ("n", "k", "dim_grw_k") if args.grw else ("n", "j", "dim_minimal")
        _emit(json.dumps([dict(zip(keys, r)) for r in rows], indent=2) + "\n", args.output)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _gamma_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--h", type=int, help="genus of the minimal class")
    p.add_argument("--m", type=int, help="number of markings of the minimal class")
    p.add_argument("--deg", type=int, help="cohomological degree of the minimal class")
    p.add_argument("--mode", choices=MODES, default=None, help="graded (default) or ungraded")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mincohft", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate the corrected CohFT or the TopFT")
    _gamma_flags(p)
    p.add_argument("--g", type=int, required=True, help="genus of the evaluation")
    p.add_argument("--insertions", default="", help="comma-separated tokens, e.g. b1,b2,a")
    p.add_argument("--topft", action="store_true", help="evaluate the TopFT only (needs --m)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="sweep the CohFT axioms")
    _gamma_flags(p)
    p.add_argument("--config", help="key = value file; flags take precedence")
    p.add_argument("--g-max", dest="g_max", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--n-exh", dest="n_exh", type=int)
    p.add_argument("--sample-count", dest="sample_count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--exhaustive-cap", dest="exhaustive_cap", type=int)
    p.add_argument("--graph-cap", dest="graph_cap", type=int)
    p.add_argument("--graphs-per-tuple", dest="graphs_per_tuple", type=int)
    p.add_argument("--jobs", type=int, help="worker processes (COHFT_JOBS overrides)")
    p.add_argument("--detail", choices=("summary", "full"))
    p.add_argument("--output", help="report path (default stdout)")
    p.add_argument("--format", choices=("json", "csv", "text"))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("deform-check", help="check a first-order deformation table")
    p.add_argument("table", nargs="?", help="DeformationTable JSON; omit to check the correction table")
    _gamma_flags(p)
    p.add_argument("--g-max", dest="g_max", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sample-count", dest="sample_count", type=int, default=SweepConfig.sample_count)
    p.add_argument("--detail", choices=("summary", "full"), default="summary")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--output")
    p.set_defaults(func=cmd_deform_check)

    p = sub.add_parser("dims", help="genus-one minimal class dimensions")
    p.add_argument("--n-max", dest="n_max", type=int, default=20)
    p.add_argument("--grw", action="store_true", help="emit the Gr^W_k table instead")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output")
    p.set_defaults(func=cmd_dims)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "mode", None) is None and args.command in ("eval", "deform-check"):
        args.mode = GRADED
    try:
        return args.func(args)
    except CohFTError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"I/O error: malformed JSON: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
