"""XTREE: a supervised decision tree whose branches are contrasted into plans.

Each edge carries a ``[low, high)`` interval produced by the entropy/MDL
discretizer. A plan takes an instance from the leaf it falls in to a nearby
leaf with a lower defect probability, by prescribing the intervals on the
target leaf's path that the instance does not already satisfy.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Sequence

import numpy as np

from .dataset_io import Instance, MetricSchema, ProjectDataset
from .discretizer import Interval, default_min_support, mdlp_bins
from .errors import EmptyTrainingSet, InputMismatch, NotALeaf, UnknownFeature


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 10
    min_support: int | None = None  # None: max(4, ceil(sqrt(n)))
    min_gain: float = 1e-3
    planning_threshold: float = 0.5
    max_features: int | None = None  # per-node feature subsample; None uses all

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.min_support is not None and self.min_support < 1:
            raise ValueError("min_support must be >= 1")
        if self.min_gain < 0:
            raise ValueError("min_gain must be >= 0")
        if not 0.0 <= self.planning_threshold <= 1.0:
            raise ValueError("planning_threshold must lie in [0, 1]")


@dataclass(eq=False)
class TreeNode:
    feature: str | None  # feature tested on the edge from the parent
    interval: Interval | None
    n_defective: int
    support: int
    depth: int
    path: tuple[int, ...] = ()
    split_feature: str | None = None
    cuts: tuple[float, ...] = ()
    children: list[TreeNode] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def defect_probability(self) -> float:
        return self.n_defective / self.support

    @property
    def path_id(self) -> str:
        return "/".join(["root", *map(str, self.path)])

    def walk(self) -> Iterator[TreeNode]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(eq=False)
class DecisionTree:
    root: TreeNode
    schema: MetricSchema
    params: TreeParams
    min_support: int
    # Population standard deviation of each training feature; sets the step
    # used when a plan points into an interval unbounded on one side.
    feature_std: tuple[float, ...] = ()

    def __post_init__(self):
        self._by_path = {node.path: node for node in self.root.walk()}
        self.leaves = [node for node in self.root.walk() if node.is_leaf]
        self._index = {f: j for j, f in enumerate(self.schema.feature_names)}

    def node(self, path: Sequence[int]) -> TreeNode:
        return self._by_path[tuple(path)]

    def edges(self, node: TreeNode) -> list[tuple[str, Interval]]:
        """(feature, interval) pairs from the root down to ``node``."""
        out = []
        for i in range(1, len(node.path) + 1):
            n = self._by_path[node.path[:i]]
            out.append((n.feature, n.interval))
        return out

    def locate_values(self, x: Sequence[float]) -> TreeNode:
        node = self.root
        while node.children:
            value = x[self._index[node.split_feature]]
            node = node.children[bisect.bisect_right(node.cuts, value)]
        return node


@dataclass(frozen=True)
class Prescription:
    """What to do with one feature: move into ``interval``, or set ``value``.

    Neither set means keep. ``value`` is the direct-replacement branch for
    non-numeric attributes; every metric handled here is numeric so it is
    unused by the planners themselves.
    """

    feature: str
    interval: Interval | None = None
    value: float | None = None
    spread: float = 0.0

    @property
    def action(self) -> str:
        if self.interval is not None:
            return "move-to"
        if self.value is not None:
            return "replace"
        return "keep"


@dataclass(frozen=True)
class Plan:
    prescriptions: Mapping[str, Prescription]
    source_leaf: str
    target_leaf: str
    expected_probability_drop: float
    feature_names: tuple[str, ...] = ()

    def __len__(self) -> int:
        return sum(p.action != "keep" for p in self.prescriptions.values())

    def to_dict(self, identifier: str) -> dict:
        rows = []
        for name in sorted(self.prescriptions):
            p = self.prescriptions[name]
            if p.interval is None:
                continue
            rows.append(
                {
                    "feature": name,
                    "low": None if math.isinf(p.interval.low) else p.interval.low,
                    "high": None if math.isinf(p.interval.high) else p.interval.high,
                }
            )
        return {
            "identifier": identifier,
            "source_leaf": self.source_leaf,
            "target_leaf": self.target_leaf,
            "expected_probability_drop": self.expected_probability_drop,
            "prescriptions": rows,
        }


def build_tree(
    train: ProjectDataset,
    params: TreeParams | None = None,
    rng: np.random.Generator | None = None,
) -> DecisionTree:
    """Grow an XTREE on ``train``.

    At every node each feature not yet tested on the path is discretized
    on the node's instances; the feature whose bins give the largest
    entropy reduction becomes the split and its bins become the children.
    ``rng`` is only consulted when ``params.max_features`` subsamples features.
    """
    params = params or TreeParams()
    if len(train) == 0:
        raise EmptyTrainingSet("cannot grow a tree on zero instances")
    X, y = train.X, train.labels
    names = train.feature_names
    min_support = params.min_support or default_min_support(len(train))
    if params.max_features is not None and rng is None:
        rng = np.random.default_rng(0)

    def grow(idx: np.ndarray, depth: int, path: tuple[int, ...], used: frozenset, feature, interval) -> TreeNode:
        node = TreeNode(feature, interval, int(y[idx].sum()), len(idx), depth, path)
        if (
            depth >= params.max_depth
            or node.n_defective in (0, node.support)
            or node.support < 2 * min_support
        ):
            return node
        candidates = [j for j in range(len(names)) if names[j] not in used]
        if params.max_features is not None and len(candidates) > params.max_features:
            candidates = sorted(rng.choice(candidates, size=params.max_features, replace=False).tolist())
        best = None
        for j in candidates:
            bins = mdlp_bins(X[idx, j], y[idx], min_support, names[j])
            if bins.cuts and (best is None or bins.gain > best.gain):
                best = bins
        if best is None or best.gain < params.min_gain:
            return node
        j = names.index(best.feature)
        slots = np.searchsorted(best.cuts, X[idx, j], side="right")
        node.split_feature = best.feature
        node.cuts = best.cuts
        for c, iv in enumerate(best.intervals):
            child_idx = idx[slots == c]
            node.children.append(grow(child_idx, depth + 1, path + (c,), used | {best.feature}, best.feature, iv))
        return node

    root = grow(np.arange(len(train)), 0, (), frozenset(), None, None)
    std = tuple(float(s) for s in X.std(axis=0))
    return DecisionTree(root, train.schema, params, min_support, std)


def _values(tree: DecisionTree, z: Instance | Sequence[float]) -> Sequence[float]:
    x = z.features if isinstance(z, Instance) else z
    if len(x) != len(tree.schema.feature_names):
        raise InputMismatch(f"instance has {len(x)} features, tree expects {len(tree.schema.feature_names)}")
    return x


def locate_leaf(tree: DecisionTree, z: Instance | Sequence[float]) -> TreeNode:
    """The leaf whose root path intervals all contain ``z``'s values."""
    return tree.locate_values(_values(tree, z))


def tree_distance(a: TreeNode, b: TreeNode) -> int:
    common = 0
    for u, v in zip(a.path, b.path):
        if u != v:
            break
        common += 1
    return len(a.path) + len(b.path) - 2 * common


def _lower_probability(a: TreeNode, b: TreeNode) -> bool:
    # Exact comparison of a.n_defective / a.support < b.n_defective / b.support.
    return a.n_defective * b.support < b.n_defective * a.support


def select_desired_leaf(tree: DecisionTree, current: TreeNode) -> TreeNode | None:
    """Nearest leaf with a strictly lower defect probability, or None.

    Distance counts edges through the lowest common ancestor. Ties go to
    the lower probability, then the larger support, then the leftmost leaf.
    """
    if not current.is_leaf or tree._by_path.get(current.path) is not current:
        raise NotALeaf(f"{current.path_id} is not a leaf of this tree")
    better = [leaf for leaf in tree.leaves if _lower_probability(leaf, current)]
    if not better:
        return None
    return min(
        better,
        key=lambda leaf: (tree_distance(current, leaf), leaf.defect_probability, -leaf.support, leaf.path),
    )


def delta_plan(tree: DecisionTree, current: TreeNode, desired: TreeNode) -> Plan:
    """Prescriptions that move an instance from ``current`` to ``desired``.

    Every interval on the desired path that the current path does not test
    identically becomes a move-to; everything else is kept.
    """
    here = dict(tree.edges(current))
    std = dict(zip(tree.schema.feature_names, tree.feature_std))
    moves = {}
    for feature, interval in tree.edges(desired):
        if here.get(feature) != interval:
            moves[feature] = Prescription(feature, interval, spread=std.get(feature, 0.0))
    drop = current.defect_probability - desired.defect_probability
    return Plan(moves, current.path_id, desired.path_id, drop, tree.schema.feature_names)


def realize(interval: Interval, current: float, spread: float) -> float:
    """A concrete value inside ``interval`` for a feature currently at ``current``."""
    if current in interval:
        return current
    low, high = interval.low, interval.high
    if interval.bounded:
        mid = (low + high) / 2.0
        return mid if mid < high else low
    if math.isinf(low) and math.isinf(high):
        return current
    if math.isinf(low):
        value = high - spread
        return value if value < high else float(np.nextafter(high, -math.inf))
    return low + max(spread, 0.0)


def apply_plan(z: Instance, plan: Plan | None, feature_names: Sequence[str] | None = None) -> Instance:
    """Return a copy of ``z`` altered as ``plan`` prescribes.

    Bounded targets go to the interval midpoint; half-bounded targets sit
    one training standard deviation inside the finite end. Values already
    inside their target interval are left alone.
    """
    if plan is None or not plan.prescriptions:
        return z
    names = list(feature_names or plan.feature_names)
    if len(names) != len(z.features):
        raise InputMismatch(f"plan covers {len(names)} features, instance has {len(z.features)}")
    values = list(z.features)
    for feature, p in plan.prescriptions.items():
        if feature not in names:
            raise UnknownFeature(f"plan prescribes unknown feature {feature!r}")
        j = names.index(feature)
        if p.interval is not None:
            values[j] = float(realize(p.interval, values[j], p.spread))
        elif p.value is not None:
            values[j] = p.value
    return replace(z, features=tuple(values))


def plan_for(tree: DecisionTree, z: Instance, threshold: float | None = None) -> Plan | None:
    """Locate, pick a better nearby leaf, and contrast the two; None when nothing to do."""
    threshold = tree.params.planning_threshold if threshold is None else threshold
    current = locate_leaf(tree, z)
    if current.defect_probability < threshold:
        return None
    desired = select_desired_leaf(tree, current)
    if desired is None:
        return None
    return delta_plan(tree, current, desired)


def tree_to_dict(tree: DecisionTree) -> dict:
    def node_dict(node: TreeNode) -> dict:
        out = {
            "path": node.path_id,
            "feature": node.feature,
            "low": None if node.interval is None or math.isinf(node.interval.low) else node.interval.low,
            "high": None if node.interval is None or math.isinf(node.interval.high) else node.interval.high,
            "support": node.support,
            "defect_probability": node.defect_probability,
        }
        if node.children:
            out["split_feature"] = node.split_feature
            out["children"] = [node_dict(c) for c in node.children]
        return out

    return {
        "features": list(tree.schema.feature_names),
        "min_support": tree.min_support,
        "params": {
            "max_depth": tree.params.max_depth,
            "min_gain": tree.params.min_gain,
            "planning_threshold": tree.params.planning_threshold,
        },
        "root": node_dict(tree.root),
    }


class XTreePlanner:
    """Callable wrapper so a fitted tree can be used wherever a planner is expected."""

    def __init__(self, tree: DecisionTree):
        self.tree = tree

    def __call__(self, z: Instance) -> Plan | None:
        return plan_for(self.tree, z)
