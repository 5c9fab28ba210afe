"""Synthetic project families with CK-style metrics, for tests and demos.

Metrics are log-normal and share a latent "size" factor, so they correlate
the way real object-oriented metrics do. Defect-proneness is a logistic
function of the log metrics.
"""

from __future__ import annotations

import numpy as np

from .dataset_io import ProjectDataset

CK_FEATURES = (
    "wmc", "dit", "noc", "cbo", "rfc", "lcom", "ca", "ce", "npm", "lcom3",
    "loc", "dam", "moa", "mfa", "cam", "ic", "cbm", "amc", "max_cc", "avg_cc",
)  # fmt: skip


def make_project(
    name: str,
    n: int = 300,
    seed: int = 0,
    n_features: int = 6,
    shift: np.ndarray | None = None,
    weights: np.ndarray | None = None,
    label_noise: float = 0.0,
    defect_rate: float = 0.3,
    size_loading: np.ndarray | float = 0.7,
) -> ProjectDataset:
    """One synthetic project.

    ``shift`` moves the log-metric means, ``weights`` sets which metrics
    drive defects, ``size_loading`` how strongly each metric follows the
    latent size, and ``label_noise`` flips that fraction of labels.
    """
    rng = np.random.default_rng(seed)
    d = n_features
    loading = np.broadcast_to(np.asarray(size_loading, dtype=float), (d,))

    def draw(m):
        return loading * rng.normal(0.0, 1.0, (m, 1)) + 0.7 * rng.normal(0.0, 1.0, (m, d))

    logs = draw(n)
    if shift is not None:
        logs = logs + shift
    if weights is None:
        weights = np.zeros(d)
        weights[: min(3, d)] = 1.5
    score = logs @ weights
    # Intercept set so roughly ``defect_rate`` of the unshifted population is defective.
    cut = np.quantile(draw(4000) @ weights, 1 - defect_rate)
    p = 1.0 / (1.0 + np.exp(-3.0 * (score - cut)))
    defective = rng.random(n) < p
    flip = rng.random(n) < label_noise
    defective = defective ^ flip
    counts = np.where(defective, 1 + rng.poisson(0.8, n), 0)
    X = np.round(np.exp(1.5 + logs), 3)
    names = CK_FEATURES[:d] if d <= len(CK_FEATURES) else tuple(f"m{j}" for j in range(d))
    ids = [f"{name}.C{i:04d}" for i in range(n)]
    return ProjectDataset.from_arrays(name, names, X, counts, ids)


def planted_family(
    seed: int,
    n_projects: int = 5,
    n: int = 400,
    n_features: int = 8,
    quirk_weight: float = 6.0,
    shift_scale: float = 0.0,
    label_noise: float = 0.0,
    defect_rate: float = 0.5,
) -> tuple[list[ProjectDataset], str]:
    """A family where one project follows the shared defect model and every
    other project adds its own quirk: one extra metric, unrelated to size,
    that drives its defects. ``shift_scale`` and ``label_noise`` optionally
    perturb the quirky projects further.

    Returns ``(family, planted_name)``.
    """
    rng = np.random.default_rng(seed)
    planted = int(rng.integers(n_projects))
    base = np.zeros(n_features)
    base[:3] = 1.5
    spare = list(range(3, n_features))
    loading = np.full(n_features, 0.7)
    loading[spare] = 0.0
    family = []
    for k in range(n_projects):
        name = f"p{k}"
        sub = int(rng.integers(2**31))
        if k == planted:
            family.append(make_project(name, n, sub, n_features, weights=base, defect_rate=defect_rate, size_loading=loading))
            continue
        weights = base.copy()
        weights[spare[k % len(spare)]] += quirk_weight
        shift = rng.normal(0.0, shift_scale, n_features)
        family.append(make_project(name, n, sub, n_features, shift, weights, label_noise, defect_rate, size_loading=loading))
    return family, f"p{planted}"
