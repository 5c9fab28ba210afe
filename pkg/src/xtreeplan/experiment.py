"""Repeated plan-alter-repredict experiments scored by percent improvement."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bellwether import discover_bellwether
from .dataset_io import DEFAULT_FRACTIONS, ProjectDataset, ThreeWaySplit, three_way_split
from .errors import InputError, ZeroBaseline
from .oracle import DEFAULT_TREES, improvement, train_forest
from .planner import Plan, TreeParams, XTreePlanner, apply_plan, build_tree
from .seeding import derive_seed

log = logging.getLogger(__name__)

TREATMENTS = ("XTREE", "BELLTREE")

# A planner factory receives one repeat's split and seed and returns the
# planner for that repeat plus the identifiers (project, id) it learned from.
Planner = Callable[..., "Plan | None"]
PlannerFactory = Callable[[ThreeWaySplit, int], "tuple[Planner, set[tuple[str, str]]]"]


@dataclass(frozen=True)
class ExperimentParams:
    tree: TreeParams = TreeParams()
    n_trees: int = DEFAULT_TREES
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS
    measure: str = "g"


@dataclass
class EvaluationRun:
    repeat_index: int
    seed: int
    before: int
    after: int
    R: float | None  # None when the repeat had no predicted defects to reduce
    n_test: int = 0
    n_planned: int = 0
    planner_ids: frozenset = field(default=frozenset(), repr=False, compare=False)
    oracle_ids: frozenset = field(default=frozenset(), repr=False, compare=False)
    changed_ids: frozenset = field(default=frozenset(), repr=False, compare=False)

    @property
    def skipped(self) -> bool:
        return self.R is None


@dataclass
class ExperimentResult:
    treatment: str
    project: str
    runs: list[EvaluationRun]
    bellwether: str | None = None

    @property
    def scores(self) -> list[float]:
        return [r.R for r in self.runs if r.R is not None]

    def to_dict(self) -> dict:
        return {
            "treatment": self.treatment,
            "project": self.project,
            "bellwether": self.bellwether,
            "runs": [
                {
                    "repeat": r.repeat_index,
                    "seed": r.seed,
                    "before": r.before,
                    "after": r.after,
                    "R": r.R,
                    "n_test": r.n_test,
                    "n_planned": r.n_planned,
                }
                for r in self.runs
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["treatment", "project", "repeat", "before", "after", "R"])
        for r in self.runs:
            writer.writerow([self.treatment, self.project, r.repeat_index, r.before, r.after, "" if r.R is None else repr(r.R)])
        return buf.getvalue()

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentResult:
        runs = [
            EvaluationRun(r["repeat"], r["seed"], r["before"], r["after"], r["R"], r.get("n_test", 0), r.get("n_planned", 0))
            for r in d["runs"]
        ]
        return cls(d["treatment"], d["project"], runs, d.get("bellwether"))


def _namespaced(data: ProjectDataset, project: str) -> set[tuple[str, str]]:
    return {(project, i) for i in data.identifiers}


def xtree_factory(params: ExperimentParams, project: str) -> PlannerFactory:
    def factory(split: ThreeWaySplit, seed: int):
        tree = build_tree(split.planner_train, params.tree)
        return XTreePlanner(tree), _namespaced(split.planner_train, project)

    return factory


def null_factory(split: ThreeWaySplit, seed: int):
    """Planner that never proposes a change."""
    return (lambda z: None), set()


def shared_with(target: ProjectDataset, family: Sequence[ProjectDataset]) -> list[str]:
    return [f for f in target.feature_names if all(f in p.feature_names for p in family)]


def belltree_factory(
    family: Sequence[ProjectDataset], target: ProjectDataset, params: ExperimentParams, master_seed: int
) -> tuple[PlannerFactory, str]:
    """Discover the bellwether once; each repeat grows a tree on a fresh split of it."""
    family = [p for p in family if p.name != target.name]
    shared = shared_with(target, family)
    family = [p.restrict_features(shared) for p in family]
    report = discover_bellwether(family, derive_seed(master_seed, "discovery"), params.n_trees, params.measure)
    bell = next(p for p in family if p.name == report.winner)

    def factory(split: ThreeWaySplit, seed: int):
        part = three_way_split(bell, params.fractions, derive_seed(seed, "bellwether-split")).planner_train
        tree = build_tree(part, params.tree)
        return XTreePlanner(tree), _namespaced(part, bell.name)

    return factory, report.winner


def run_repeat(
    target: ProjectDataset,
    factory: PlannerFactory,
    params: ExperimentParams,
    master_seed: int,
    r: int,
) -> EvaluationRun:
    seed = derive_seed(master_seed, "repeat", r)
    split = three_way_split(target, params.fractions, derive_seed(seed, "split"))
    planner, planner_ids = factory(split, seed)
    oracle = train_forest(split.oracle_train, params.n_trees, derive_seed(seed, "oracle"), params.tree)

    test = split.test
    features = list(test.feature_names)
    altered = np.array(test.X, copy=True)
    planned, changed = 0, set()
    for i, z in enumerate(test.instances):
        plan = planner(z)
        if plan is None:
            continue
        planned += 1
        moved = apply_plan(z, plan, features if not plan.feature_names else None)
        altered[i] = moved.features
        if moved.features != z.features:
            changed.add(z.identifier)

    before = int(oracle.predict_many(test.X).sum())
    after = int(oracle.predict_many(altered).sum())
    try:
        R = improvement(before, after)
    except ZeroBaseline:
        log.warning("%s repeat %d: nothing predicted defective before planning; skipped", target.name, r)
        R = None
    return EvaluationRun(
        r,
        seed,
        before,
        after,
        R,
        len(test),
        planned,
        frozenset(planner_ids),
        frozenset(_namespaced(split.oracle_train, target.name)),
        frozenset(changed),
    )


def run_experiment(
    target: ProjectDataset,
    treatment: str | PlannerFactory = "XTREE",
    params: ExperimentParams | None = None,
    repeats: int = 30,
    master_seed: int = 1,
    family: Sequence[ProjectDataset] | None = None,
) -> ExperimentResult:
    """Split, plan, alter the test part, and score with an independent oracle, ``repeats`` times.

    ``treatment`` is ``"XTREE"``, ``"BELLTREE"`` (needs ``family``; the
    target is dropped from it) or a custom planner factory.
    """
    params = params or ExperimentParams()
    if repeats < 1:
        raise InputError(f"repeats must be >= 1, got {repeats}")
    bellwether = None
    if callable(treatment):
        factory, name = treatment, getattr(treatment, "__name__", "custom")
    else:
        name = treatment.upper()
        if name == "XTREE":
            factory = xtree_factory(params, target.name)
        elif name == "BELLTREE":
            if not family:
                raise InputError("BELLTREE needs a project family")
            factory, bellwether = belltree_factory(family, target, params, master_seed)
            target = target.restrict_features(shared_with(target, [p for p in family if p.name != target.name]))
        else:
            raise InputError(f"unknown treatment {treatment!r}; choose from {TREATMENTS}")
    runs = [run_repeat(target, factory, params, master_seed, r) for r in range(repeats)]
    return ExperimentResult(name, target.name, runs, bellwether)
