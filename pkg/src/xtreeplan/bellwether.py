"""Bellwether discovery and BELLTREE (XTREE grown on the bellwether project)."""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset_io import DEFAULT_FRACTIONS, ProjectDataset, common_features, three_way_split
from .errors import FewerThanTwoProjects, IncompatibleSchemas, InputError, SingleClassTraining, TargetInFamily
from .oracle import DEFAULT_TREES, DefectPredictor, train_forest
from .planner import DecisionTree, Plan, TreeParams, build_tree, plan_for
from .seeding import derive_seed

MEASURES = ("g", "recall", "f1")


def score_predictions(actual: np.ndarray, predicted: np.ndarray, measure: str = "g") -> float:
    """Transfer quality of ``predicted`` against ``actual`` labels.

    ``g`` is the harmonic mean of recall and 1 - false alarm rate. Recall is
    taken as 1 when there are no defective instances to find, and the false
    alarm rate as 0 when there are no clean ones.
    """
    actual = np.asarray(actual, dtype=bool)
    predicted = np.asarray(predicted, dtype=bool)
    tp = int(np.sum(actual & predicted))
    fn = int(np.sum(actual & ~predicted))
    fp = int(np.sum(~actual & predicted))
    tn = int(np.sum(~actual & ~predicted))
    recall = tp / (tp + fn) if tp + fn else 1.0
    if measure == "recall":
        return recall
    if measure == "f1":
        precision = tp / (tp + fp) if tp + fp else 0.0
        return 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    if measure != "g":
        raise InputError(f"unknown measure {measure!r}; choose from {MEASURES}")
    pf = fp / (fp + tn) if fp + tn else 0.0
    specificity = 1.0 - pf
    return 2 * recall * specificity / (recall + specificity) if recall + specificity else 0.0


def _check_compatible(train: ProjectDataset, test: ProjectDataset) -> None:
    if train.feature_names != test.feature_names:
        raise IncompatibleSchemas(f"{train.name} and {test.name} have different feature columns")


def transfer_score(
    train: ProjectDataset,
    test: ProjectDataset,
    seed: int = 0,
    n_trees: int = DEFAULT_TREES,
    measure: str = "g",
) -> float:
    """Quality of a forest trained on ``train`` when it predicts ``test``."""
    _check_compatible(train, test)
    forest = train_forest(train, n_trees, seed)
    return score_predictions(test.labels, forest.predict_many(test.X), measure)


@dataclass(frozen=True)
class BellwetherReport:
    projects: tuple[str, ...]
    # scores[i][j]: trained on projects[i], tested on projects[j]; diagonal is None.
    scores: tuple[tuple[float | None, ...], ...]
    summary: dict[str, float]
    winner: str

    def to_dict(self) -> dict:
        return {
            "projects": list(self.projects),
            "matrix": [list(row) for row in self.scores],
            "median_scores": {p: self.summary[p] for p in self.projects},
            "winner": self.winner,
        }


def discover_bellwether(
    family: Sequence[ProjectDataset],
    seed: int = 0,
    n_trees: int = DEFAULT_TREES,
    measure: str = "g",
) -> BellwetherReport:
    """Round-robin transfer: train on each project, test on every other.

    The bellwether is the project with the highest median off-diagonal
    score; ties go to the lexicographically first name.
    """
    family = list(family)
    if len(family) < 2:
        raise FewerThanTwoProjects(f"need at least two projects, got {len(family)}")
    names = [p.name for p in family]
    if len(set(names)) != len(names):
        raise InputError(f"project names must be unique, got {names}")
    shared = common_features(family)
    if not shared:
        raise IncompatibleSchemas("projects share no feature columns")
    family = [p.restrict_features(shared) for p in family]

    # Every project's forest uses the same random stream, so identical data
    # scores identically and only the name tie-break separates copies.
    forest_seed = derive_seed(seed, "bellwether")
    forests: list[DefectPredictor] = []
    for p in family:
        if p.labels.all() or not p.labels.any():
            raise SingleClassTraining(f"project {p.name} has a single class")
        forests.append(train_forest(p, n_trees, forest_seed))

    matrix = []
    for i, forest in enumerate(forests):
        row = []
        for j, test in enumerate(family):
            row.append(None if i == j else score_predictions(test.labels, forest.predict_many(test.X), measure))
        matrix.append(tuple(row))
    summary = {
        names[i]: float(statistics.median(s for s in matrix[i] if s is not None)) for i in range(len(family))
    }
    winner = min(names, key=lambda n: (-summary[n], n))
    return BellwetherReport(tuple(names), tuple(matrix), summary, winner)


@dataclass(eq=False)
class BelltreeOutcome:
    report: BellwetherReport
    bellwether: ProjectDataset
    tree: DecisionTree
    plans: list[tuple[str, Plan]]


def belltree_planner(
    family: Sequence[ProjectDataset],
    target: ProjectDataset,
    params: TreeParams | None = None,
    seed: int = 0,
    n_trees: int = DEFAULT_TREES,
    measure: str = "g",
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
    report: BellwetherReport | None = None,
) -> tuple[BellwetherReport, ProjectDataset, DecisionTree]:
    """Discover the bellwether among ``family`` and grow a tree on its planner-train part.

    The returned tree and bellwether use the features ``target`` shares with
    the family.
    """
    family = list(family)
    if any(p is target or p.name == target.name for p in family):
        raise TargetInFamily(f"target {target.name!r} must not be part of the discovery family")
    shared = common_features([*family, target])
    if not shared:
        raise IncompatibleSchemas(f"{target.name} shares no features with the family")
    family = [p.restrict_features(shared) for p in family]
    if report is None:
        report = discover_bellwether(family, seed, n_trees, measure)
    bell = next(p for p in family if p.name == report.winner)
    split = three_way_split(bell, fractions, derive_seed(seed, "bellwether-split"))
    tree = build_tree(split.planner_train, params)
    return report, bell, tree


def belltree_plan(
    family: Sequence[ProjectDataset],
    target: ProjectDataset,
    params: TreeParams | None = None,
    seed: int = 0,
    **kwargs,
) -> BelltreeOutcome:
    """Plans for every instance of ``target`` from a tree grown on the bellwether."""
    report, bell, tree = belltree_planner(family, target, params, seed, **kwargs)
    target = target.restrict_features(tree.schema.feature_names)
    plans = []
    for z in target.instances:
        plan = plan_for(tree, z)
        if plan is not None:
            plans.append((z.identifier, plan))
    return BelltreeOutcome(report, bell, tree, plans)
