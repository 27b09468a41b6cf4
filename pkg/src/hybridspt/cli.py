"""Command-line entry point: ``hybridspt <command> [flags]``.

Exit codes: 0 success, 1 config or usage error, 2 finished with unconverged points.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import io as hio
from . import runs
from .errors import ConfigError, HybridSptError

EXIT_OK, EXIT_USAGE, EXIT_UNCONVERGED = 0, 1, 2

POINT_COLUMNS = (
    "status", "alpha", "xi_ratio", "gtilde_c", "gtilde_c_s", "r", "omega_s",
    "Omega_over_omega_s", "Omega_over_omega_b", "phase_analytic", "phase_statistical",
    "occupation_guard", "n_mean", "g2", "g2_oracle", "g2_printed", "g2_limit",
    "coherence_abs", "coherence_analytic", "parity", "gap", "gap_analytic", "degeneracy",
    "ground_energy", "energy_analytic",
)
PROVENANCE = ("cutoff", "converged", "solver", "residual", "convergence_metric", "predisplacement")

# command -> (predisplace, convergence monitor) used when the config says "auto"
AUTO_NUMERICS = {
    "squeezing": (True, "variance_P"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--out", default="-", help="output path ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--workers", type=int, help="parallel processes (0 = all CPUs)")
    common.add_argument("--tol", type=float, help="relative truncation tolerance")
    common.add_argument("--cutoff-max", type=int, help="boson cutoff ceiling")
    common.add_argument("--predisplace", action="store_true",
                        help="shift deep superradiant points by the mean-field displacement")
    common.add_argument("--frame", choices=("squeezed", "lab"))
    common.add_argument("--orders", help="even quadrature orders, e.g. 2,4,6,8")
    common.add_argument("--timing", action="store_true", help="add a wall_time column")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override any config key")

    p = _Parser(prog="hybridspt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (("point", "evaluate one parameter point"),
                        ("sweep", "1-D sweep of one parameter"),
                        ("phase-diagram", "2-D grid over xi/omega_b and g~_c^s"),
                        ("squeezing", "higher-order quadrature moments for several panels"),
                        ("validate-elimination", "two-mode vs eliminated ground energies"),
                        ("convergence", "cutoff history of one point")):
        sub.add_parser(name, parents=[common], help=help_)
    return p


def _overrides(args) -> dict[str, str]:
    out = {}
    for item in args.set:
        key, sep, val = item.partition("=")
        if not sep or "." not in key:
            raise ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}", key=key)
        out[key.strip()] = val.strip()
    flags = {"run.format": args.format, "run.workers": args.workers, "numerics.tol": args.tol,
             "numerics.cutoff_max": args.cutoff_max, "numerics.frame": args.frame,
             "numerics.orders": args.orders}
    out.update({k: str(v) for k, v in flags.items() if v is not None})
    if args.predisplace:
        out["numerics.predisplace"] = "true"
    if args.timing:
        out["numerics.timing"] = "true"
    return out


def numerics_from(cfg: dict, command: str) -> runs.Numerics:
    n = dict(cfg["numerics"])
    auto_pre, auto_mon = AUTO_NUMERICS.get(command, (False, "n_mean"))
    n["predisplace"] = auto_pre if n["predisplace"] == "auto" else n["predisplace"] == "true"
    n["monitor"] = auto_mon if n["monitor"] == "auto" else n["monitor"]
    for N in n["orders"]:
        if N < 2 or N % 2:
            raise ConfigError(f"numerics.orders must be even and >= 2, got {N}", key="numerics.orders")
    if n["tol"] <= 0:
        raise ConfigError("numerics.tol must be positive", key="numerics.tol")
    return runs.Numerics(**n)


def _point_spec(cfg) -> runs.PointSpec:
    m = cfg["model"]
    if (m["gtilde_c"] is None) == (m["gtilde_c_s"] is None):
        raise ConfigError("set exactly one of model.gtilde_c, model.gtilde_c_s", key="model.gtilde_c")
    if m["Omega_over_omega_s"] is not None and m["Omega_over_omega_b"] is not None:
        raise ConfigError("set at most one of model.Omega_over_omega_s, model.Omega_over_omega_b",
                          key="model.Omega_over_omega_s")
    return runs.PointSpec(**m)


def _point_columns(num: runs.Numerics, lead=()):
    moments = [c for N in num.orders for c in (f"moment_{N}", f"threshold_{N}")]
    return (*lead, *POINT_COLUMNS, *moments, *PROVENANCE, "message", "wall_time")


def _unconverged(rows) -> bool:
    for r in rows:
        status = r.get("status")
        if status in ("unconverged", "error:ConvergenceFailure"):
            return True
        if status is None and r.get("converged") is False:
            return True
    return False


def cmd_point(cfg, workers):
    num = numerics_from(cfg, "point")
    row = runs.evaluate_point(_point_spec(cfg), num)
    if row["status"].startswith("error") and row["status"] != "error:ConvergenceFailure":
        raise HybridSptError(f"{row['status'][6:]}: {row['message']}")
    return "hybridspt.point", [row], _point_columns(num), [], {}


def cmd_sweep(cfg, workers):
    num = numerics_from(cfg, "sweep")
    s, m = cfg["sweep"], cfg["model"]
    if s["variable"] == "xi_ratio" and m["gtilde_c"] is None and m["gtilde_c_s"] is None:
        raise ConfigError("xi_ratio sweeps need model.gtilde_c or model.gtilde_c_s", key="model.gtilde_c")
    try:
        spec = runs.SweepSpec(variable=s["variable"], start=s["min"], stop=s["max"], count=s["count"],
                              alpha=m["alpha"], xi_ratio=m["xi_ratio"], gtilde_c=m["gtilde_c"],
                              gtilde_c_s=m["gtilde_c_s"], Omega_over_omega_s=m["Omega_over_omega_s"],
                              Omega_over_omega_b=m["Omega_over_omega_b"], numerics=num)
    except ValueError as exc:
        raise ConfigError(str(exc), key="sweep") from None
    rows = runs.run_sweep(spec, workers)
    var = spec.variable
    rows = [{var: r[var], **{k: v for k, v in r.items() if k != var}} for r in rows]
    hit = runs.transition_location([r[var] for r in rows], [r.get("g2", float("nan")) for r in rows])
    comments = [f"g2 crosses 2 between {var} = {hio.format_value(hit[0])} and {hio.format_value(hit[1])}"
                if hit else "g2 does not cross 2 on this grid"]
    return "hybridspt.sweep", rows, _point_columns(num, (var,)), comments, {}


def cmd_phase_diagram(cfg, workers):
    num = numerics_from(cfg, "phase-diagram")
    p = cfg["phase_diagram"]
    for k in ("xi_count", "x_count"):
        if p[k] < 2:
            raise ConfigError(f"phase_diagram.{k} must be >= 2", key=f"phase_diagram.{k}")
    spec = runs.PhaseDiagramSpec(xi_start=p["xi_min"], xi_stop=p["xi_max"], xi_count=p["xi_count"],
                                 x_start=p["x_min"], x_stop=p["x_max"], x_count=p["x_count"],
                                 alpha_low=p["alpha_low"], alpha_high=p["alpha_high"],
                                 xi_split=p["xi_split"], Omega_over_omega_s=p["Omega_over_omega_s"],
                                 numerics=num)
    rows = runs.run_phase_diagram(spec, workers)
    lead = ("xi_ratio", "gtilde_c_s", "alpha", "boundary_gtilde_c", "boundary_reason")
    return "hybridspt.phase-diagram", rows, _point_columns(num, lead), [], {}


def cmd_squeezing(cfg, workers):
    num = numerics_from(cfg, "squeezing")
    q = cfg["squeezing"]
    if q["count"] < 2:
        raise ConfigError("squeezing.count must be >= 2", key="squeezing.count")
    spec = runs.SqueezingSpec(panels=q["panels"], Omega_over_omega_b=q["Omega_over_omega_b"],
                              count=q["count"], half_width=q["half_width"], orders=num.orders,
                              perfect_fraction=q["perfect_fraction"], numerics=num)
    rows, summary = runs.run_squeezing_scan(spec, workers)
    comments = ["summary " + " ".join(f"{k}={hio.format_value(v)}" for k, v in s.items())
                for s in summary]
    lead = ("panel", "critical_gtilde_c")
    return "hybridspt.squeezing", rows, _point_columns(num, lead), comments, {"summary": summary}


def cmd_validate_elimination(cfg, workers):
    e = cfg["elimination"]
    spec = runs.EliminationSpec(ratios=e["ratios"], delta_over_omega_b=e["delta_over_omega_b"],
                                Omega_over_omega_b=e["Omega_over_omega_b"], gtilde_c=e["gtilde_c"],
                                alpha=e["alpha"], cutoff_a=e["cutoff_a"], cutoff_b=e["cutoff_b"])
    rows, exponent = runs.validate_elimination(spec, workers)
    return ("hybridspt.elimination", rows, (), [f"fitted exponent = {hio.format_value(exponent)}"],
            {"fitted_exponent": exponent})


def cmd_convergence(cfg, workers):
    num = numerics_from(cfg, "convergence")
    rows = runs.convergence_report(_point_spec(cfg), num)
    return "hybridspt.convergence", rows, (), [], {}


COMMANDS = {
    "point": cmd_point,
    "sweep": cmd_sweep,
    "phase-diagram": cmd_phase_diagram,
    "squeezing": cmd_squeezing,
    "validate-elimination": cmd_validate_elimination,
    "convergence": cmd_convergence,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = hio.load_config(args.config, _overrides(args))
        workers = cfg["run"]["workers"] or None
        schema, rows, columns, comments, extra = COMMANDS[args.command](cfg, workers)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HybridSptError, ValueError) as exc:
        name = "" if type(exc) is HybridSptError else f"{type(exc).__name__}: "
        print(f"error: {name}{exc}", file=sys.stderr)
        return EXIT_USAGE
    text = hio.render(schema, cfg, rows, fmt=cfg["run"]["format"], preferred=columns,
                      comments=comments, extra=extra)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    if _unconverged(rows):
        print("warning: some points did not converge", file=sys.stderr)
        return EXIT_UNCONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
