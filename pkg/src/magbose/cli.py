"""Command-line front end: ``magbose {table,scaling,verify}``.

Exit codes: 0 success, 1 check failure, 2 config error, 3 numerical error.
"""

import argparse
import json
import logging
import sys

from . import sweep, verify
from .errors import ConfigError, DomainError, NumericalError

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' config file")
    common.add_argument("--beta", type=float)
    common.add_argument("--rho", type=float)
    common.add_argument("--omega", type=float)
    common.add_argument("--L", dest="L_values", help="box sides, comma separated", default=None)
    common.add_argument("--grid-n", dest="grid_n", type=int)
    common.add_argument("--gauge", choices=["symmetric", "landau"])
    common.add_argument("--delta", type=float)
    common.add_argument("--h-omega", dest="h_omega", type=float)
    common.add_argument("--z-probe", dest="z_probe", type=float)
    common.add_argument("--workers", type=int)
    common.add_argument("--out", dest="output_dir")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="magbose", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    t = sub.add_parser("table", parents=[common], help="thermodynamic table along the L sweep")
    t.add_argument("--figures", action="store_true", help="also render PNG figures")
    s = sub.add_parser("scaling", parents=[common], help="finite-size scaling study")
    s.add_argument("--figures", action="store_true", help="also render PNG figures")
    v = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    v.add_argument("--tolerance-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    return p


_FIELDS = ("beta", "rho", "omega", "L_values", "grid_n", "gauge", "delta", "h_omega",
           "z_probe", "workers", "output_dir")


def _config(args):
    overrides = {k: getattr(args, k) for k in _FIELDS}
    return sweep.build_config(args.config, overrides)


def cmd_table(cfg, figures=False):
    rows, errors, mismatches = sweep.run_table(cfg)
    print(f"wrote {len(rows)} rows to {cfg.output_dir}/table.csv")
    if figures and rows:
        from . import plotting

        plotting.plot_table(rows, cfg.output_dir)
    for L, rel in mismatches:
        print(f"FAIL  L={L}: contour/recursion log Z mismatch {rel:.3e} > {sweep.LOGZ_RTOL:.0e}")
    if mismatches:
        return EXIT_CHECK
    if errors:
        print(f"{len(errors)} rows failed; see {cfg.output_dir}/table.errors.log")
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_scaling(cfg, figures=False):
    rows, summary, errors = sweep.run_scaling(cfg)
    print(f"wrote {len(rows)} rows to {cfg.output_dir}/scaling.csv")
    if errors:
        print(f"{len(errors)} rows failed; see {cfg.output_dir}/scaling.errors.log")
    if summary is None:
        return EXIT_NUMERIC
    print(json.dumps(summary.to_dict(), indent=2))
    if figures:
        from . import plotting

        plotting.plot_scaling(rows, summary, cfg.output_dir)
    if errors:
        return EXIT_NUMERIC
    return EXIT_OK if summary.slope_pass else EXIT_CHECK


def cmd_verify(cfg, tolerance_scale=1.0):
    checks = verify.verify(cfg, tolerance_scale)
    print(verify.report(checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "table":
            return cmd_table(cfg, args.figures)
        if args.command == "scaling":
            return cmd_scaling(cfg, args.figures)
        return cmd_verify(cfg, args.tolerance_scale)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, DomainError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
