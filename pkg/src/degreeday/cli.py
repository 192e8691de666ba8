"""Command-line scenario runner.

    degreeday --scenario ny2011.toml --command price
    degreeday --scenario ny2011.toml --command figure fig3 --out results/
    degreeday --scenario ny2011.toml --command validate

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import csv
import sys
from pathlib import Path

from . import figures
from .car_model import ModelError
from .kernels import QuadratureError
from .options import call_approx, call_approx_greeks, call_exact_mc, call_greek_density_mc
from .pricing import Day, Period, Scheme, approx_coeffs, futures_price
from .scenario import ScenarioError, load_scenario, validate_file
from .sensitivity import dapprox, dfcdd_day, dfcdd_period, dfhdd_day, dfhdd_period

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COMMANDS = ("price", "greeks", "option", "figure", "validate")


class ConfigError(Exception):
    pass


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, int) and not isinstance(v, bool):
        return str(v)
    return format(float(v), ".12g")


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _describe(contract):
    m = contract.measurement
    if isinstance(m, Day):
        return f"day:{_fmt(m.s)}"
    return f"period:{_fmt(m.tau1)}-{_fmt(m.tau2)}"


def price_table(sc):
    header = ["contract", "side", "measurement", "scheme", "t", "price"]
    rows = [
        [name, c.side.value, _describe(c), c.scheme.value, sc.t, futures_price(sc.model, sc.seasonal, c, sc.t, sc.state)]
        for name, c in sc.contracts.items()
    ]
    return header, rows


def _exact_greeks(sc, c):
    m = c.measurement
    if isinstance(m, Day):
        fn = dfcdd_day if c.side.sign > 0 else dfhdd_day
        return fn(sc.model, sc.seasonal, sc.t, m.s, sc.state)
    fn = dfcdd_period if c.side.sign > 0 else dfhdd_period
    return fn(sc.model, sc.seasonal, sc.t, m.tau1, m.tau2, sc.state)


def greeks_table(sc):
    p = sc.model.p
    header = ["contract", "side", "scheme", "t", *[f"d_x{i}" for i in range(1, p + 1)]]
    rows = []
    for name, c in sc.contracts.items():
        rows.append([name, c.side.value, Scheme.EXACT.value, sc.t, *_exact_greeks(sc, c).d])
        for scheme in (Scheme.APPROX_X, Scheme.APPROX_TAYLOR):
            g = dapprox(approx_coeffs(sc.model, sc.seasonal, c, sc.t, scheme))
            rows.append([name, c.side.value, scheme.value, sc.t, *g.d])
    return header, rows


def option_table(sc, paths, seed):
    p = sc.model.p
    header = ["option", "method", "price", "price_se", *[f"d_x{i}" for i in range(1, p + 1)], *[f"se_x{i}" for i in range(1, p + 1)]]
    rows = []
    nan = float("nan")
    for name, (opt, exact) in sc.options.items():
        for scheme in (Scheme.APPROX_X, Scheme.APPROX_TAYLOR):
            price = call_approx(sc.model, sc.seasonal, sc.t, opt, sc.state, scheme)
            g = call_approx_greeks(sc.model, sc.seasonal, sc.t, opt, sc.state, scheme)
            rows.append([name, scheme.value, price, 0.0, *g.d, *[0.0] * p])
        if exact:
            est = call_exact_mc(sc.model, sc.seasonal, sc.t, opt, sc.state, paths, seed)
            if sc.t < opt.tau:
                g, se = call_greek_density_mc(sc.model, sc.seasonal, sc.t, opt, sc.state, paths, seed)
                greeks, ses = list(g.d), list(se)
            else:
                greeks, ses = [nan] * p, [nan] * p
            rows.append([name, "exact_mc", est.price, est.se, *greeks, *ses])
    return header, rows


def _first(items, pred):
    return next((v for v in items if pred(v)), None)


def figure_table(sc, name, paths, seed):
    if name not in figures.FIGURES:
        raise ConfigError(f"unknown figure {name!r}; choose from {', '.join(figures.FIGURES)}")
    kind, build = figures.FIGURES[name]
    lags = list(range(1, sc.max_lag + 1))
    kw = {"scheme": sc.figure_scheme, "paths": paths, "seed": seed, "state": sc.state}
    day_contract = _first(sc.contracts.values(), lambda c: isinstance(c.measurement, Day))
    day_option = _first((o for o, _ in sc.options.values()), lambda o: isinstance(o.underlying.measurement, Day))
    if kind == "day":
        if day_contract is None:
            raise ConfigError(f"{name} needs a contract with a measurement day")
        return build(sc.model, sc.seasonal, day_contract.measurement.s, lags, **kw)
    if kind == "forward":
        target = day_option.underlying if day_option is not None else day_contract
        if target is None:
            raise ConfigError(f"{name} needs a contract with a measurement day")
        lo, hi = sc.forward_lags
        return build(sc.model, sc.seasonal, target.measurement.s, list(range(lo, hi + 1)), **kw)
    if kind == "option":
        if day_option is None:
            raise ConfigError(f"{name} needs an option on a measurement-day contract")
        return build(sc.model, sc.seasonal, day_option, lags, **kw)
    period = _first(sc.contracts.values(), lambda c: isinstance(c.measurement, Period))
    if period is None:
        raise ConfigError(f"{name} needs a contract with a measurement period")
    return build(sc.model, sc.seasonal, period.measurement, lags, **kw)


def run(command, scenario_path, out=None, seed=None, paths=None, stderr=sys.stderr):
    """Execute ``command`` (a list like ``["figure", "fig3"]`` or a string) and return the exit code."""
    words = command.split() if isinstance(command, str) else list(command)
    if not words or words[0] not in COMMANDS:
        print(f"error: command must be one of {', '.join(COMMANDS)}", file=stderr)
        return EXIT_CONFIG
    verb = words[0]
    try:
        if verb == "validate":
            diags = validate_file(scenario_path)
            for d in diags:
                print(d, file=stderr)
            if any(d.numeric for d in diags):
                return EXIT_NUMERIC
            return EXIT_CONFIG if diags else EXIT_OK
        sc = load_scenario(scenario_path)
    except OSError as exc:
        print(f"error: cannot read scenario: {exc}", file=stderr)
        return EXIT_CONFIG
    except ScenarioError as exc:
        for d in exc.diagnostics:
            print(f"error: {d}", file=stderr)
        return EXIT_NUMERIC if exc.numeric else EXIT_CONFIG

    out_dir = Path(out if out is not None else sc.out_dir)
    seed = sc.seed if seed is None else seed
    paths = sc.paths if paths is None else paths
    try:
        if verb == "price":
            header, rows = price_table(sc)
            target = out_dir / "price.csv"
        elif verb == "greeks":
            header, rows = greeks_table(sc)
            target = out_dir / "greeks.csv"
        elif verb == "option":
            if not sc.options:
                raise ConfigError("scenario defines no [[options]]")
            header, rows = option_table(sc, paths, seed)
            target = out_dir / "option.csv"
        else:
            if len(words) != 2:
                raise ConfigError("usage: --command figure <name>, e.g. figure fig3")
            header, rows = figure_table(sc, words[1], paths, seed)
            target = out_dir / f"{words[1]}.csv"
    except ConfigError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_CONFIG
    except (ModelError, QuadratureError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    write_csv(target, header, rows)
    print(target)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="degreeday", description="Price and differentiate CDD/HDD futures and options.")
    ap.add_argument("--scenario", required=True, help="scenario TOML file")
    ap.add_argument("--command", required=True, nargs="+", metavar="NAME", help=f"one of {', '.join(COMMANDS)}; figure takes a name")
    ap.add_argument("--out", help="output directory (default: scenario output.dir)")
    ap.add_argument("--seed", type=int, help="Monte Carlo seed (unsigned 64-bit)")
    ap.add_argument("--paths", type=int, help="Monte Carlo paths")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    if args.paths is not None and args.paths < 2:
        print("error: --paths must be at least 2", file=sys.stderr)
        return EXIT_CONFIG
    return run(args.command, args.scenario, out=args.out, seed=args.seed, paths=args.paths)


if __name__ == "__main__":
    sys.exit(main())
