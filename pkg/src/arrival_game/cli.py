"""Command-line front end.

    arrival-game solve scenario.json
    arrival-game certify scenario.json --t -2
    arrival-game simulate scenario.json --arrivals -1,-0.7,-0.7
    arrival-game sweep fig5 --out fig5.csv

Exit codes: 0 success, 1 input error, 2 empty equilibrium set, 3 scenario
outside the supported scope, 4 certification refuted.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version

import jsonschema

from .core import (
    DeviationCost,
    InputError,
    PopulationModel,
    Scenario,
    ServiceTimeModel,
    UnsupportedConfiguration,
    expected_profile_cost,
)
from .equilibrium import (
    EquilibriumInterval,
    equilibrium_interval,
    is_social_opt_equilibrium,
    opt_equilibrium_region,
    price_of_anarchy_stability,
    symmetric_cost,
)
from .extensions.availability import restricted_equilibrium, waiting_cost_interval
from .extensions.heterogeneous import heterogeneous_interval
from .extensions.population import poisson_opt_equilibrium_boundary, random_pop_interval
from .extensions.stochastic import exponential_equilibrium_interval, two_point_service_equilibrium
from .oracle import certify_symmetric, mc_profile_cost, schedule_summary
from .social import social_optimum_heterogeneous, social_optimum_homogeneous

EXIT_OK, EXIT_INPUT, EXIT_EMPTY, EXIT_SCOPE, EXIT_REFUTED = 0, 1, 2, 3, 4
SCHEMA_VERSION = "1"

_number = {"type": "number"}
SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["population", "costs"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "population": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "n"],
                    "properties": {"kind": {"const": "deterministic"}, "n": {"type": "integer", "minimum": 1}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "lambda"],
                    "properties": {"kind": {"const": "poisson"}, "lambda": {"type": "number", "exclusiveMinimum": 0}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "pmf"],
                    "properties": {
                        "kind": {"const": "pmf"},
                        "pmf": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                    },
                },
            ]
        },
        "costs": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["kind"],
                        "properties": {
                            "kind": {"enum": ["linear", "quadratic"]},
                            "d": _number,
                            "gamma": {"type": "number", "exclusiveMinimum": 0},
                            "beta": {"type": "number", "exclusiveMinimum": 0},
                        },
                    },
                    {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["kind", "points"],
                        "properties": {
                            "kind": {"const": "tabulated"},
                            "points": {
                                "type": "array",
                                "minItems": 3,
                                "items": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                            },
                        },
                    },
                ]
            },
        },
        "service": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["unit", "two_point", "exponential"]},
                "params": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"a": _number, "b": _number, "p": _number, "rate": _number},
                },
            },
        },
        "availability": {
            "oneOf": [{"type": "null"}, {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}]
        },
        "alpha": {"type": "number", "minimum": 0},
    },
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0"


def _num(x):
    """JSON-ready number with 12 significant digits (None passes through)."""
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def _default_seed() -> int:
    raw = os.environ.get("ETA_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise CliError(EXIT_INPUT, f"ETA_SEED must be an integer, got {raw!r}")


# ---------------------------------------------------------------------------
# scenario files


def load_scenario_document(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {exc.strerror}")
    try:
        doc = json.loads(text, parse_constant=lambda c: _reject_constant(c))
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_INPUT, f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}")
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for err in errors:
            field = "/".join(str(p) for p in err.absolute_path) or "<root>"
            lines.append(f"{path}: field {field}: {err.message}")
        raise CliError(EXIT_INPUT, "\n".join(lines))
    return doc


def _reject_constant(name):
    raise CliError(EXIT_INPUT, f"non-finite number {name} is not allowed")


def scenario_from_document(doc: dict) -> Scenario:
    pop = doc["population"]
    if pop["kind"] == "deterministic":
        population = PopulationModel.deterministic(pop["n"])
    elif pop["kind"] == "poisson":
        population = PopulationModel.poisson(pop["lambda"])
    else:
        population = PopulationModel.general(pop["pmf"])
    costs = []
    for c in doc["costs"]:
        if c["kind"] == "tabulated":
            costs.append(DeviationCost.tabulated(c["points"]))
        else:
            costs.append(DeviationCost(c["kind"], c.get("d", 0), c.get("gamma", 1), c.get("beta", 1)))
    svc = doc.get("service", {"kind": "unit"})
    params = svc.get("params", {})
    if svc["kind"] == "unit":
        service = ServiceTimeModel.unit()
    elif svc["kind"] == "two_point":
        service = ServiceTimeModel.two_point(params.get("a", 1.0), params.get("b", 2.0), params.get("p", 0.5))
    else:
        service = ServiceTimeModel.exponential(params.get("rate", 1.0))
    avail = doc.get("availability")
    return Scenario(population, tuple(costs), service, tuple(avail) if avail else None, doc.get("alpha", 0))


def read_scenario(path: str) -> Scenario:
    return scenario_from_document(load_scenario_document(path))


# ---------------------------------------------------------------------------
# solve


def _interval_doc(iv):
    return {"lo": _num(iv.lo), "hi": _num(iv.hi), "empty": iv.empty}


def _cert_doc(cert):
    out = asdict(cert)
    for k in ("candidate", "best_deviation", "gain", "symmetric_cost", "se", "grid_step", "epsilon"):
        out[k] = _num(out[k])
    return out


def _shift(x, d):
    return None if x is None else x + d


def _check_scope(sc: Scenario):
    has_alpha = sc.alpha > 0
    has_window = sc.availability is not None
    if has_alpha and not sc.service.is_unit:
        raise UnsupportedConfiguration("waiting costs are analysed for unit service only")
    if has_alpha and has_window:
        raise UnsupportedConfiguration("waiting costs with an availability window are not analysed")
    if has_window and not sc.service.is_unit:
        raise UnsupportedConfiguration("availability windows are analysed for unit service only")
    if not sc.population.is_deterministic and (has_alpha or has_window or not sc.service.is_unit):
        raise UnsupportedConfiguration("random populations are analysed for the base model only")


def solve(sc: Scenario) -> dict:
    """Route a scenario to its solver and collect the result fields."""
    _check_scope(sc)
    out = {"te": None, "social_optimum": None, "opt_is_equilibrium": None, "poa": None, "pos": None, "notes": []}
    cost = sc.costs[0]
    linear_family = sc.homogeneous and cost.kind == "linear"

    if not linear_family:
        if not sc.population.is_deterministic:
            raise UnsupportedConfiguration("random populations need a linear cost")
        if not sc.service.is_unit or sc.alpha > 0 or sc.availability is not None:
            raise UnsupportedConfiguration("general costs are analysed for unit service without extensions")
        n = sc.population.n
        costs = list(sc.costs) * (n if len(sc.costs) == 1 else 1)
        iv = heterogeneous_interval(costs)
        opt = social_optimum_heterogeneous(costs)
        out["interval"] = iv
        out["social_optimum"] = {
            "s1_lo": _num(opt.s1_lo),
            "s1_hi": _num(opt.s1_hi),
            "total_cost": _num(opt.total_cost),
            "permutation": list(opt.order),
        }
        return out

    d = cost.d
    b, g = cost.beta, cost.gamma
    pop = sc.population
    if not pop.is_deterministic:
        res = random_pop_interval(pop, b, g)
        iv = res.interval
        out["interval"] = _shifted_interval(iv, d)
        out["social_optimum"] = {"t_star_lo": _num(res.t_star_lo + d), "t_star_hi": _num(res.t_star_hi + d)}
        out["opt_is_equilibrium"] = res.opt_is_equilibrium
        return out

    n = pop.n
    if n < 2:
        raise InputError("equilibrium analysis needs at least two customers")
    kind = sc.service.kind
    if kind == "two_point":
        s = sc.service
        t = two_point_service_equilibrium(b, g, s.a, s.b, s.p, n)
        out["interval"] = _shifted_interval(EquilibriumInterval.point(t), d)
        out["te"] = _num(t + d)
        return out
    if kind == "exponential":
        if sc.service.rate != 1:
            raise UnsupportedConfiguration("exponential service is analysed with unit rate")
        iv = exponential_equilibrium_interval(n, b, g)
        out["interval"] = _shifted_interval(iv, d)
        return out

    if sc.availability is not None:
        a, w = sc.availability
        iv = restricted_equilibrium(n, b, g, a - d, w - d)
        out["interval"] = _shifted_interval(iv, d)
        return out
    if sc.alpha > 0:
        res = waiting_cost_interval(n, b, g, sc.alpha)
        out["interval"] = _shifted_interval(res.interval, d)
        out["alpha_bar"] = _num(res.alpha_bar)
        out["te"] = _num(_shift(res.interval.witness, d))
        return out

    iv = equilibrium_interval(n, b, g)
    opt = social_optimum_homogeneous(n, b, g)
    holds = is_social_opt_equilibrium(n, b, g)
    poa, pos = price_of_anarchy_stability(n, b, g)
    out["interval"] = _shifted_interval(iv, d)
    out["te"] = _num(_shift(iv.witness, d))
    out["social_optimum"] = {
        "s1_lo": _num(opt.s1_lo + d),
        "s1_hi": _num(opt.s1_hi + d),
        "total_cost": _num(opt.total_cost),
    }
    out["opt_is_equilibrium"] = holds.holds
    out["poa"], out["pos"] = _num(poa), _num(pos)
    return out


def _shifted_interval(iv, d):
    if not d:
        return iv
    return EquilibriumInterval(_shift(iv.lo, d), _shift(iv.hi, d), iv.empty, _shift(iv.witness, d), iv.notes)


def cmd_solve(args) -> int:
    sc = read_scenario(args.scenario)
    res = solve(sc)
    iv = res.pop("interval")
    notes = list(iv.notes) + res.pop("notes")
    certs = []
    if not args.no_certify and not iv.empty:
        points = sorted({iv.lo, iv.midpoint, iv.hi})
        certs = [
            certify_symmetric(t, sc, grid_step=args.grid_step, mc_samples=args.mc_samples, seed=args.seed)
            for t in points
        ]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "interval": _interval_doc(iv),
        **res,
        "certification": [_cert_doc(c) for c in certs],
        "notes": notes,
        "meta": {
            "version": _version(),
            "seed": args.seed,
            "tolerances": {"grid_step": args.grid_step, "mc_samples": args.mc_samples},
        },
    }
    _emit(doc)
    if iv.empty:
        return EXIT_EMPTY
    if any(not c.is_equilibrium for c in certs):
        return EXIT_REFUTED
    return EXIT_OK


# ---------------------------------------------------------------------------
# certify / simulate


def cmd_certify(args) -> int:
    sc = read_scenario(args.scenario)
    _check_scope(sc)
    if not math.isfinite(args.t):
        raise CliError(EXIT_INPUT, "--t must be finite")
    cert = certify_symmetric(
        args.t, sc, grid_step=args.grid_step, epsilon=args.epsilon, mc_samples=args.mc_samples, seed=args.seed
    )
    _emit({"schema_version": SCHEMA_VERSION, "certification": _cert_doc(cert)})
    return EXIT_OK if cert.is_equilibrium else EXIT_REFUTED


def _parse_arrivals(raw: str) -> list[float]:
    try:
        vals = [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise CliError(EXIT_INPUT, f"cannot parse arrivals {raw!r}")
    if not vals or not all(math.isfinite(v) for v in vals):
        raise CliError(EXIT_INPUT, "arrivals must be finite numbers")
    return vals


def cmd_simulate(args) -> int:
    sc = read_scenario(args.scenario)
    if not sc.population.is_deterministic:
        raise CliError(EXIT_INPUT, "simulate needs a deterministic population")
    arrivals = _parse_arrivals(args.arrivals)
    if len(arrivals) != sc.population.n:
        raise CliError(EXIT_INPUT, f"{len(arrivals)} arrivals for {sc.population.n} customers")
    if sc.service.kind == "exponential":
        mean, se = mc_profile_cost(arrivals, sc, args.samples, args.seed)
        method = "monte_carlo"
        costs, ses = list(mean), list(se)
    else:
        costs = expected_profile_cost(arrivals, sc)
        ses = [0.0] * len(costs)
        method = "exact"
    summary = schedule_summary(arrivals, sc, args.samples, args.seed)
    _emit(
        {
            "schema_version": SCHEMA_VERSION,
            "method": method,
            "arrivals": [_num(x) for x in arrivals],
            "costs": [_num(c) for c in costs],
            "se": [_num(s) for s in ses],
            "schedule": {k: [_num(x) for x in v] for k, v in summary.items()},
            "meta": {"version": _version(), "seed": args.seed, "samples": args.samples},
        }
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


def _frange(lo, hi, step):
    m = int(round((hi - lo) / step))
    return [lo + k * step for k in range(m + 1)]


def _cost_rows(n, beta, gamma, step):
    step = Fraction(str(step))
    rows = []
    for t in _frange(Fraction(-(n - 1)), Fraction(0), step):
        rows.append((_num(t), _num(symmetric_cost(t, n, beta, gamma)), _num(-gamma * t), _num(beta * (t + n - 1))))
    return ["t", "c_tt", "early_dev", "late_dev"], rows


def sweep_rows(figure: str, step=None, lambda_max=10.0):
    if figure == "fig2":
        return _cost_rows(5, 1, 1, step or 0.05)
    if figure == "fig3":
        return _cost_rows(5, 5, 1, step or 0.05)
    if figure == "fig4":
        rows = [(n, _num(lo), _num(hi)) for n, lo, hi in opt_equilibrium_region(range(2, 21))]
        return ["n", "ratio_lo", "ratio_hi"], rows
    if figure == "fig5":
        step = step or 1.0
        lams = [x for x in _frange(step, lambda_max, step) if x > 0]
        rows = [(_num(lam), "" if r is None else _num(r)) for lam, r in poisson_opt_equilibrium_boundary(lams)]
        return ["lambda", "minimal_ratio"], rows
    raise CliError(EXIT_INPUT, f"unknown figure {figure!r}")


def cmd_sweep(args) -> int:
    if args.step is not None and not args.step > 0:
        raise CliError(EXIT_INPUT, "--step must be positive")
    header, rows = sweep_rows(args.figure, args.step, args.lambda_max)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


# ---------------------------------------------------------------------------


def _emit(doc: dict):
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arrival-game", description="Arrival-timing games at a single server.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mc_default=100_000):
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default: $ETA_SEED or 0)")
        p.add_argument("--mc-samples", type=int, default=mc_default, help="Monte Carlo samples for stochastic service")
        p.add_argument("--grid-step", type=float, default=0.01, help="deviation grid resolution")

    p = sub.add_parser("solve", help="equilibrium interval, social optimum and certification")
    p.add_argument("scenario")
    p.add_argument("--no-certify", action="store_true")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="check whether a common arrival time is an equilibrium")
    p.add_argument("scenario")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="expected cost of every customer for given arrivals")
    p.add_argument("scenario")
    p.add_argument("--arrivals", required=True, help="comma separated arrival times")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=100_000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="data behind the figures as CSV")
    p.add_argument("figure", help="fig2, fig3, fig4 or fig5")
    p.add_argument("--out", default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--lambda-max", type=float, default=10.0)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        if getattr(args, "samples", 1) < 1 or getattr(args, "mc_samples", 1) < 1:
            raise CliError(EXIT_INPUT, "sample counts must be positive")
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except UnsupportedConfiguration as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_SCOPE
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
