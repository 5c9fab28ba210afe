"""Random-forest defect predictor used as the verification oracle, and the
percent-improvement score computed from its before/after predictions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset_io import Instance, ProjectDataset
from .errors import InputError, SingleClassTraining, ZeroBaseline
from .planner import DecisionTree, TreeParams, build_tree
from .seeding import derive_seed

DEFAULT_TREES = 25


@dataclass(eq=False)
class DefectPredictor:
    trees: list[DecisionTree]
    n_trees: int
    seed: int

    def votes(self, x: Sequence[float]) -> int:
        """Number of trees whose leaf is majority-defective for ``x``."""
        return sum(t.locate_values(x).defect_probability >= 0.5 for t in self.trees)

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        return np.array([2 * self.votes(row) > self.n_trees for row in np.asarray(X, dtype=float)], dtype=bool)


def train_forest(
    oracle_train: ProjectDataset,
    n_trees: int = DEFAULT_TREES,
    seed: int = 0,
    params: TreeParams | None = None,
) -> DefectPredictor:
    """Bag ``n_trees`` XTREE-style trees over bootstrap resamples.

    Each node considers ceil(sqrt(d)) randomly chosen features.
    """
    if n_trees < 1 or n_trees % 2 == 0:
        raise InputError(f"n_trees must be a positive odd number, got {n_trees}")
    labels = oracle_train.labels
    if labels.all() or not labels.any():
        raise SingleClassTraining(f"{oracle_train.name}: oracle training data has a single class")
    d = len(oracle_train.feature_names)
    params = params or TreeParams()
    params = TreeParams(
        max_depth=params.max_depth,
        min_support=params.min_support,
        min_gain=params.min_gain,
        planning_threshold=params.planning_threshold,
        max_features=math.ceil(math.sqrt(d)),
    )
    n = len(oracle_train)
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng(derive_seed(seed, "forest-tree", t))
        sample = oracle_train.subset(rng.integers(0, n, size=n))
        trees.append(build_tree(sample, params, rng))
    return DefectPredictor(trees, n_trees, seed)


def predict(oracle: DefectPredictor, z: Instance | Sequence[float]) -> bool:
    """Majority vote of the trees' leaf majorities."""
    x = z.features if isinstance(z, Instance) else z
    return 2 * oracle.votes(x) > oracle.n_trees


def improvement(before: int, after: int) -> float:
    """Percent reduction in predicted-defective instances: ``(1 - after/before) * 100``.

    0 means no change from the baseline, positive values an improvement,
    negative values an optimization failure.
    """
    if before < 0 or after < 0:
        raise InputError(f"counts must be nonnegative, got before={before}, after={after}")
    if before == 0:
        raise ZeroBaseline("no instance predicted defective before planning")
    return (1.0 - after / before) * 100.0
