"""Command-line front end: simulate / estimate / sweep / region.

Every subcommand is a thin adapter over the library functions with the
same inputs, writes only to paths named on the command line, and reports
diagnostics on standard error.  Exit codes: 0 success, 2 usage error
(flags, files, schema), 1 computation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources

import jsonschema

from .coincidence import empirical_stats
from .estimators import (
    beta_p_known,
    beta_tau_known,
    estimate,
    indeterminacy_region,
    result_to_kv_text,
)
from .harness import ModelSpec, SweepConfig, sweep, write_report_csv
from .model import (
    AprioriDist,
    CategorySet,
    CoderModel,
    TrueLabeling,
    read_ratings_csv,
    sample_ratings,
    write_ratings_csv,
)
from .refine import RefineOptions, refine

__all__ = ["main"]

USAGE_ERROR = 2
COMPUTE_ERROR = 1


class UsageError(Exception):
    pass


def _load_config(path: str, schema_name: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path!r} is not valid JSON: {exc}") from exc
    schema_text = (
        resources.files("coderel.schemas").joinpath(schema_name).read_text("utf-8")
    )
    try:
        jsonschema.validate(config, json.loads(schema_text))
    except jsonschema.ValidationError as exc:
        raise UsageError(f"config file {path!r} violates the schema: {exc.message}") from exc
    return config


def _model_from_config(config: dict) -> CoderModel:
    cats = CategorySet(config["categories"])
    spec = config["model"]
    if "gamma" in spec:
        labeling = TrueLabeling(cats, spec["gamma"])
    else:
        labeling = TrueLabeling.from_frequencies(cats, spec["n_items"], spec["tau"])
    return CoderModel(
        beta=spec["beta"],
        labeling=labeling,
        apriori=AprioriDist(cats, spec["p"]),
    )


def _cmd_simulate(args) -> int:
    config = _load_config(args.config, "simulate.schema.json")
    model = _model_from_config(config)
    ratings = sample_ratings(model, config["n_raters"], config["seed"])
    write_ratings_csv(ratings, args.out)
    print(
        f"wrote {ratings.n_items} items x {ratings.n_raters} raters to {args.out}",
        file=sys.stderr,
    )
    return 0


def _parse_simplex(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"not a comma-separated number list: {text!r}") from exc


def _cmd_estimate(args) -> int:
    if args.tau is not None and args.p is not None:
        raise UsageError("--tau and --p are mutually exclusive")
    try:
        ratings = read_ratings_csv(args.ratings)
    except OSError as exc:
        raise UsageError(f"cannot read ratings file {args.ratings!r}: {exc.strerror}") from exc
    stats = empirical_stats(ratings)
    if args.tau is not None:
        result = beta_tau_known(stats, _parse_simplex(args.tau))
    elif args.p is not None:
        result = beta_p_known(stats, _parse_simplex(args.p))
    else:
        result = estimate(stats, args.eps)
        if not args.no_refine:
            result = refine(stats, result, RefineOptions())
    text = result_to_kv_text(result)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for diag in result.diagnostics:
        print(f"diagnostic: {diag}", file=sys.stderr)
    return 0


def _cmd_sweep(args) -> int:
    config = _load_config(args.config, "sweep.schema.json")
    spec = ModelSpec(
        labels=tuple(config["categories"]),
        beta=config["model"]["beta"],
        tau=tuple(config["model"]["tau"]),
        p=tuple(config["model"]["p"]),
        n_items=config["model"]["n_items"],
    )
    values = config["sweep"]["values"]
    if config["sweep"]["axis"] == "p":
        values = [tuple(v) for v in values]
    sweep_config = SweepConfig(
        base=spec,
        n_raters=config["n_raters"],
        replications=config["replications"],
        master_seed=config["master_seed"],
        sweep_axis=config["sweep"]["axis"],
        sweep_values=tuple(values),
        quantile_levels=tuple(config.get("quantile_levels", (0.5, 0.8, 0.9, 0.95, 0.98, 1.0))),
        include_baselines=config.get("include_baselines", False),
        refine_opts=RefineOptions(**config.get("refine", {})),
        eps=config.get("eps"),
    )
    report = sweep(sweep_config, workers=config.get("workers", 1))
    write_report_csv(report, args.out)
    for row in report.rows:
        if row.flagged:
            print(
                f"warning: sweep value {row.sweep_value} had {row.n_fail} failed replications",
                file=sys.stderr,
            )
    print(f"wrote {len(report.rows)} sweep rows to {args.out}", file=sys.stderr)
    return 0


def _cmd_region(args) -> int:
    region = indeterminacy_region(args.beta, args.tau, args.e1, args.n)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("kind,n,lo,hi,beta_prime\n")
        for lo, hi in region.intervals:
            fh.write(f"interval,,{format(lo, '.17g')},{format(hi, '.17g')},\n")
        for n, bp in region.discrete:
            fh.write(f"discrete,{n},,,{format(bp, '.17g')}\n")
    print(
        f"wrote {len(region.intervals)} interval(s) and {len(region.discrete)} "
        f"admissible point(s) to {args.out}",
        file=sys.stderr,
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coderel",
        description="Simulate nominal-scale rating experiments and estimate coder reliability.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="sample a rating table from a model config")
    sim.add_argument("--config", required=True, help="JSON config file")
    sim.add_argument("--out", required=True, help="output ratings CSV")
    sim.set_defaults(func=_cmd_simulate)

    est = sub.add_parser("estimate", help="estimate reliability from a ratings CSV")
    est.add_argument("--ratings", required=True, help="input ratings CSV")
    est.add_argument("--tau", help="known true-category frequencies (comma list)")
    est.add_argument("--p", help="known a-priori distribution (comma list)")
    est.add_argument("--eps", type=float, default=None, help="active-set threshold")
    est.add_argument("--no-refine", action="store_true", help="skip least-squares refinement")
    est.add_argument("--out", help="output key=value file (default: stdout)")
    est.set_defaults(func=_cmd_estimate)

    swp = sub.add_parser("sweep", help="run a Monte-Carlo accuracy sweep")
    swp.add_argument("--config", required=True, help="JSON config file")
    swp.add_argument("--out", required=True, help="output report CSV")
    swp.set_defaults(func=_cmd_sweep)

    reg = sub.add_parser(
        "region", help="two-category indeterminacy region for pairwise-only data"
    )
    reg.add_argument("--beta", type=float, required=True)
    reg.add_argument("--tau", type=float, required=True, help="one true-category frequency")
    reg.add_argument("--e1", type=float, required=True, help="larger single-rater frequency")
    reg.add_argument("--n", type=int, required=True, help="number of items")
    reg.add_argument("--out", required=True, help="output region CSV")
    reg.set_defaults(func=_cmd_region)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return COMPUTE_ERROR


if __name__ == "__main__":
    sys.exit(main())
