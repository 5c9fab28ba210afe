import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xtreeplan.dataset_io import (
    MetricSchema,
    ProjectDataset,
    load_csv,
    load_project_family,
    three_way_split,
    write_csv,
)
from xtreeplan.errors import (
    EmptyDataset,
    FewerThanTwoProjects,
    IncompatibleSchemas,
    InputError,
    MissingTargetColumn,
    NonNumericFeature,
    TooFewInstances,
)

# Header layout of the PROMISE (Jureczko) CK-metric release files.
PROMISE_HEADER = (
    "name,version,name,wmc,dit,noc,cbo,rfc,lcom,ca,ce,npm,lcom3,loc,dam,moa,mfa,cam,ic,cbm,amc,max_cc,avg_cc,bug"
).split(",")


def test_load_small_csv(write_table):
    path = write_table("p.csv", ["name", "wmc", "rfc", "bug"], [["A", 1, 2, 0], ["B", 3, 4, 2], ["C", 5, 6, 1]])
    data = load_csv(path)
    assert len(data) == 3
    assert [z.defective for z in data.instances] == [False, True, True]
    assert data.feature_names == ("wmc", "rfc")
    assert data.identifiers == ("A", "B", "C")
    assert [z.defect_count for z in data.instances] == [0, 2, 1]


def test_non_numeric_cell_names_row_and_column(write_table):
    path = write_table("p.csv", ["name", "wmc", "rfc", "bug"], [["A", 1, 2, 0], ["B", 3, "n/a", 2], ["C", 5, 6, 1]])
    with pytest.raises(NonNumericFeature) as err:
        load_csv(path)
    assert err.value.row == 2 and err.value.column == "rfc"
    assert "row 2" in str(err.value) and "rfc" in str(err.value)


def test_promise_layout_yields_twenty_metrics(write_table):
    rows = [["ant", "1.7", f"org.apache.C{i}", *range(i, i + 20), i % 3] for i in range(5)]
    data = load_csv(write_table("ant.csv", PROMISE_HEADER, rows))
    assert len(data.feature_names) == 20
    assert data.feature_names == tuple(PROMISE_HEADER[3:23])
    assert data.identifiers[0] == "org.apache.C0"


@pytest.mark.parametrize("target", ["bug", "Bugs", "DEFECTS"])
def test_target_recognized_case_insensitively(write_table, target):
    data = load_csv(write_table("p.csv", ["wmc", target], [[1, 0], [2, 1]]))
    assert data.schema.target_column == target


def test_target_override(write_table):
    data = load_csv(write_table("p.csv", ["wmc", "faults"], [[1, 0], [2, 1]]), target="faults")
    assert data.labels.tolist() == [False, True]


def test_missing_target(write_table):
    with pytest.raises(MissingTargetColumn):
        load_csv(write_table("p.csv", ["wmc", "rfc"], [[1, 2]]))


def test_empty_dataset(write_table):
    with pytest.raises(EmptyDataset):
        load_csv(write_table("p.csv", ["wmc", "bug"], []))


def test_negative_or_fractional_counts_rejected(write_table):
    with pytest.raises(InputError):
        load_csv(write_table("p.csv", ["wmc", "bug"], [[1, -1]]))
    with pytest.raises(InputError):
        load_csv(write_table("p.csv", ["wmc", "bug"], [[1, 0.5]]))


def test_schema_invariants():
    with pytest.raises(InputError):
        MetricSchema(())
    with pytest.raises(InputError):
        MetricSchema(("a", "a"))
    with pytest.raises(InputError):
        MetricSchema(("a", "bug"), target_column="bug")


def test_dataset_is_read_only(project):
    with pytest.raises(ValueError):
        project.X[0, 0] = 1.0


def test_round_trip(tmp_path, project):
    path = tmp_path / "alpha.csv"
    write_csv(project, path)
    back = load_csv(path)
    assert back.schema == project.schema
    assert back.identifiers == project.identifiers
    np.testing.assert_allclose(back.X, project.X, rtol=0, atol=1e-12)
    assert (back.defect_counts == project.defect_counts).all()


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(-1e6, 1e6, allow_nan=False), st.floats(0, 1e3), st.integers(0, 5)),
        min_size=1,
        max_size=30,
    )
)
def test_round_trip_property(tmp_path_factory, rows):
    X = np.array([[a, b] for a, b, _ in rows])
    data = ProjectDataset.from_arrays("r", ["m1", "m2"], X, [c for *_, c in rows])
    path = tmp_path_factory.mktemp("rt") / "r.csv"
    write_csv(data, path)
    back = load_csv(path)
    assert back.feature_names == data.feature_names
    np.testing.assert_allclose(back.X, data.X, rtol=0, atol=1e-12)
    assert back.defect_counts.tolist() == data.defect_counts.tolist()


def _dataset(n_pos, n_neg, seed=0):
    rng = np.random.default_rng(seed)
    counts = np.array([1] * n_pos + [0] * n_neg)
    rng.shuffle(counts)
    return ProjectDataset.from_arrays("s", ["x"], rng.normal(size=(n_pos + n_neg, 1)), counts)


def test_split_sizes_disjoint_exhaustive():
    data = _dataset(30, 70)
    split = three_way_split(data, (0.5, 0.25, 0.25), seed=42)
    parts = [split.planner_train, split.oracle_train, split.test]
    assert [len(p) for p in parts] == [50, 25, 25]
    ids = [set(p.identifiers) for p in parts]
    assert not (ids[0] & ids[1] or ids[0] & ids[2] or ids[1] & ids[2])
    assert ids[0] | ids[1] | ids[2] == set(data.identifiers)


def test_split_empty_part_rejected():
    with pytest.raises(TooFewInstances):
        three_way_split(_dataset(30, 70), (0.5, 0.5, 0.0), seed=1)


def test_split_single_class_part_rejected():
    with pytest.raises(TooFewInstances):
        three_way_split(_dataset(2, 40), (0.5, 0.25, 0.25), seed=1)


def test_split_deterministic():
    data = _dataset(30, 70)
    a = three_way_split(data, seed=42)
    b = three_way_split(data, seed=42)
    for x, y in zip((a.planner_train, a.oracle_train, a.test), (b.planner_train, b.oracle_train, b.test)):
        assert x.identifiers == y.identifiers


def test_split_bad_fractions():
    with pytest.raises(InputError):
        three_way_split(_dataset(30, 70), (0.5, 0.3, 0.3))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.integers(6, 60), st.integers(6, 200))
def test_split_partition_property(seed, n_pos, n_neg):
    data = _dataset(n_pos, n_neg, seed % 1000)
    split = three_way_split(data, seed=seed)
    merged = sorted(split.planner_train.identifiers + split.oracle_train.identifiers + split.test.identifiers)
    assert merged == sorted(data.identifiers)


def test_stratification_over_many_datasets():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for trial in range(1000):
        n_pos, n_neg = int(rng.integers(20, 120)), int(rng.integers(20, 400))
        data = _dataset(n_pos, n_neg, trial)
        split = three_way_split(data, seed=trial)
        for part in (split.planner_train, split.oracle_train, split.test):
            worst = max(worst, abs(part.defect_ratio - data.defect_ratio))
    assert worst <= 0.10


def test_family_intersection_and_order(tmp_path, write_table):
    write_table("poi.csv", ["name", "wmc", "rfc", "loc", "bug"], [["a", 1, 2, 3, 0], ["b", 4, 5, 6, 1]])
    write_table("ant.csv", ["name", "rfc", "wmc", "bug"], [["a", 1, 2, 1], ["b", 4, 5, 0]])
    fam = load_project_family(tmp_path)
    assert [p.name for p in fam] == ["ant", "poi"]
    assert fam[0].feature_names == fam[1].feature_names == ("rfc", "wmc")
    assert fam[1].X[0].tolist() == [2.0, 1.0]


def test_family_loads_four_projects(family_dir):
    fam = load_project_family(family_dir)
    assert [p.name for p in fam] == ["ant", "ivy", "jedit", "poi"]
    assert len({p.schema for p in fam}) == 1


def test_family_needs_two(tmp_path, write_table):
    write_table("ant.csv", ["wmc", "bug"], [[1, 0]])
    with pytest.raises(FewerThanTwoProjects):
        load_project_family(tmp_path)


def test_family_incompatible(tmp_path, write_table):
    write_table("a.csv", ["wmc", "bug"], [[1, 0]])
    write_table("b.csv", ["rfc", "bug"], [[1, 0]])
    with pytest.raises(IncompatibleSchemas):
        load_project_family(tmp_path)
