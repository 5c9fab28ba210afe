"""Defect-reduction planning from decision-tree contrasts, within a project
(XTREE) or transferred from a bellwether project (BELLTREE)."""

from .bellwether import BellwetherReport, belltree_plan, discover_bellwether, transfer_score
from .dataset_io import (
    Instance,
    MetricSchema,
    ProjectDataset,
    ThreeWaySplit,
    load_csv,
    load_project_family,
    three_way_split,
    write_csv,
)
from .discretizer import FeatureBins, Interval, bin_of, mdlp_bins, shannon_entropy
from .experiment import EvaluationRun, ExperimentParams, ExperimentResult, run_experiment
from .oracle import DefectPredictor, improvement, predict, train_forest
from .planner import (
    DecisionTree,
    Plan,
    Prescription,
    TreeNode,
    TreeParams,
    apply_plan,
    build_tree,
    delta_plan,
    locate_leaf,
    plan_for,
    select_desired_leaf,
)
from .report import TreatmentSummary, rank_treatments, render_report, summarize

__version__ = "0.1.0"
