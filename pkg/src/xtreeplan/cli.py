"""Command-line interface: ``xtreeplan {plan,bellwether,evaluate,report}``.

Exit status is 0 on success, 2 for bad input (usage errors, unreadable or
invalid datasets) and 1 for anything unexpected.
"""

from __future__ import annotations

import argparse
import json
import logging
import statistics
import sys
import traceback
from pathlib import Path

from .bellwether import MEASURES, belltree_plan, discover_bellwether
from .dataset_io import DEFAULT_FRACTIONS, atomic_write_text, load_csv, load_project_family
from .errors import InputError, PlanningError
from .experiment import ExperimentParams, ExperimentResult, run_experiment
from .oracle import DEFAULT_TREES
from .planner import TreeParams, build_tree, plan_for
from .report import rank_treatments, render_report, summaries_csv

log = logging.getLogger("xtreeplan")


def _fractions(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}") from None
    if len(parts) != 3 or any(p <= 0 for p in parts) or abs(sum(parts) - 1) > 1e-9:
        raise argparse.ArgumentTypeError("fractions must be three positive numbers summing to 1")
    return parts


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return value


def _odd_int(text: str) -> int:
    value = _positive_int(text)
    if value % 2 == 0:
        raise argparse.ArgumentTypeError(f"expected an odd number, got {value}")
    return value


def _unit(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {value}")
    return value


def _nonneg(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative value, got {value}")
    return value


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("reproducibility and learning parameters")
    g.add_argument("--seed", type=int, default=1, help="master seed for every stochastic step")
    g.add_argument("--target-column", default=None, help="defect column name (default: bug, bugs or defects)")
    g.add_argument("--max-depth", type=int, default=10, help="maximum tree depth")
    g.add_argument("--min-support", type=_positive_int, default=None,
                   help="minimum instances per bin (default: max(4, ceil(sqrt(n))))")
    g.add_argument("--min-gain", type=_nonneg, default=1e-3, help="minimum entropy gain (bits) to split")
    g.add_argument("--planning-threshold", type=_unit, default=0.5,
                   help="plan only for instances whose leaf defect probability is at least this")
    g.add_argument("--n-trees", type=_odd_int, default=DEFAULT_TREES, help="trees in the oracle forest (odd)")
    g.add_argument("--measure", choices=MEASURES, default="g", help="transfer score used for bellwether discovery")
    g.add_argument("--fractions", type=_fractions, default=DEFAULT_FRACTIONS,
                   help="planner-train, oracle-train, test fractions")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="xtreeplan", description="Plan defect-reducing metric changes with XTREE and BELLTREE.", formatter_class=fmt)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="emit plans for a test dataset", formatter_class=fmt)
    p.add_argument("--treatment", choices=("xtree", "belltree"), default="xtree",
                   help="xtree learns from --train; belltree learns from the family's bellwether")
    p.add_argument("--train", help="training CSV (xtree)")
    p.add_argument("--test", help="CSV of instances to plan for (xtree)")
    p.add_argument("--family", help="directory of project CSVs (belltree)")
    p.add_argument("--target", help="target project CSV (belltree); excluded from discovery")
    p.add_argument("--out", required=True, help="output JSON file")
    _add_common(p)

    p = sub.add_parser("bellwether", help="find the bellwether of a project family", formatter_class=fmt)
    p.add_argument("--family", required=True, help="directory of project CSVs")
    p.add_argument("--out", required=True, help="output JSON file")
    _add_common(p)

    p = sub.add_parser("evaluate", help="repeated plan/alter/re-predict experiments", formatter_class=fmt)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--family", help="directory of project CSVs; every project is evaluated")
    src.add_argument("--data", action="append", help="single project CSV (repeatable; xtree only)")
    p.add_argument("--treatments", default="xtree,belltree", help="comma-separated: xtree, belltree")
    p.add_argument("--repeats", type=_positive_int, default=30, help="split/plan/score repetitions per project")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--alpha", type=_unit, default=0.05, help="Mann-Whitney significance level")
    p.add_argument("--effect-threshold", type=_unit, default=0.147, help="negligible Cliff's delta bound")
    _add_common(p)

    p = sub.add_parser("report", help="rank saved experiment results", formatter_class=fmt)
    p.add_argument("results", nargs="+", help="ExperimentResult JSON files")
    p.add_argument("--out", required=True, help="output file")
    p.add_argument("--format", choices=("text", "csv"), default="text", help="ranked table or per-treatment CSV")
    p.add_argument("--alpha", type=_unit, default=0.05, help="Mann-Whitney significance level")
    p.add_argument("--effect-threshold", type=_unit, default=0.147, help="negligible Cliff's delta bound")
    return parser


def _tree_params(args) -> TreeParams:
    return TreeParams(args.max_depth, args.min_support, args.min_gain, args.planning_threshold)


def _experiment_params(args) -> ExperimentParams:
    return ExperimentParams(_tree_params(args), args.n_trees, args.fractions, args.measure)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_plan(args, parser) -> int:
    if args.treatment == "xtree":
        if not args.train or not args.test:
            parser.error("plan --treatment xtree needs --train and --test")
        train = load_csv(args.train, target=args.target_column)
        test = load_csv(args.test, schema_hint=train.schema, target=args.target_column)
        tree = build_tree(train, _tree_params(args))
        pairs = [(z.identifier, plan_for(tree, z)) for z in test.instances]
        pairs = [(i, p) for i, p in pairs if p is not None]
        payload = {"treatment": "XTREE", "train": train.name, "target": test.name}
    else:
        if not args.family or not args.target:
            parser.error("plan --treatment belltree needs --family and --target")
        target = load_csv(args.target, target=args.target_column)
        family = [p for p in load_project_family(args.family, args.target_column) if p.name != target.name]
        outcome = belltree_plan(family, target, _tree_params(args), args.seed,
                                n_trees=args.n_trees, measure=args.measure, fractions=args.fractions)
        print(f"bellwether: {outcome.report.winner}", file=sys.stderr)
        pairs = outcome.plans
        payload = {"treatment": "BELLTREE", "bellwether": outcome.report.winner, "target": target.name}
    payload["plans"] = [plan.to_dict(ident) for ident, plan in pairs]
    atomic_write_text(args.out, _dump(payload))
    drops = [p.expected_probability_drop for _, p in pairs]
    mean_drop = statistics.fmean(drops) if drops else 0.0
    print(f"{len(pairs)} plans written to {args.out}; mean expected probability drop {mean_drop:.3f}")
    return 0


def cmd_bellwether(args, parser) -> int:
    family = load_project_family(args.family, args.target_column)
    report = discover_bellwether(family, args.seed, args.n_trees, args.measure)
    atomic_write_text(args.out, _dump(report.to_dict()))
    print(f"bellwether: {report.winner}")
    return 0


def cmd_evaluate(args, parser) -> int:
    treatments = [t.strip().upper() for t in args.treatments.split(",") if t.strip()]
    unknown = [t for t in treatments if t not in ("XTREE", "BELLTREE")]
    if unknown or not treatments:
        parser.error(f"unknown treatments {unknown}; choose from xtree, belltree")
    if args.family:
        projects = load_project_family(args.family, args.target_column)
        family = projects
    else:
        if "BELLTREE" in treatments:
            parser.error("belltree needs --family")
        projects = [load_csv(p, target=args.target_column) for p in args.data]
        family = None
        if len({p.name for p in projects}) != len(projects):
            parser.error("--data files must have distinct names")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = _experiment_params(args)
    summaries = {}
    for project in projects:
        groups = {}
        for treatment in treatments:
            log.info("%s / %s: %d repeats", project.name, treatment, args.repeats)
            result = run_experiment(project, treatment, params, args.repeats, args.seed, family)
            stem = f"{project.name}_{treatment.lower()}"
            atomic_write_text(out / f"{stem}.json", result.to_json())
            atomic_write_text(out / f"{stem}.csv", result.to_csv())
            if result.scores:
                groups[treatment] = result.scores
        if groups:
            summaries[project.name] = rank_treatments(groups, args.alpha, args.effect_threshold)
    text = render_report(summaries)
    atomic_write_text(out / "report.txt", text)
    atomic_write_text(out / "summary.csv", summaries_csv(summaries))
    sys.stdout.write(text)
    return 0


def cmd_report(args, parser) -> int:
    by_project: dict[str, dict[str, list[float]]] = {}
    for path in args.results:
        try:
            result = ExperimentResult.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, ValueError, KeyError) as exc:
            raise InputError(f"cannot read experiment result {path}: {exc}") from exc
        if result.scores:
            by_project.setdefault(result.project, {})[result.treatment] = result.scores
    summaries = {
        project: rank_treatments(groups, args.alpha, args.effect_threshold)
        for project, groups in sorted(by_project.items())
    }
    text = render_report(summaries) if args.format == "text" else summaries_csv(summaries)
    atomic_write_text(args.out, text)
    sys.stdout.write(text)
    return 0


COMMANDS = {"plan": cmd_plan, "bellwether": cmd_bellwether, "evaluate": cmd_evaluate, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args, parser)
    except (InputError, FileNotFoundError, IsADirectoryError, UnicodeDecodeError) as exc:
        print(f"xtreeplan: error: {exc}", file=sys.stderr)
        return 2
    except PlanningError as exc:
        print(f"xtreeplan: error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
