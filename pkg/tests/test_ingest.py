from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, strategies as st

from topicflow import PublicationRecord, SnapshotGrid, compute_yearly_paper_quantile, ingest_records
from topicflow.errors import EmptyInput, InvalidSpec, MalformedRecord
from topicflow.ingest import iter_records, read_records
from conftest import write_lines


TABLE = {"J1": ["T1", "T2"], "J2": ["T2"], "J3": ["T3"]}
AREAS = {"T1": "A1", "T2": "A2", "T3": "A1"}


@pytest.fixture
def table(make_table):
    return make_table(TABLE, AREAS)


# -- snapshot grid --

def test_grid_1910_2014_has_21_labels(grid_1910_2014):
    labels = grid_1910_2014.labels()
    assert len(labels) == 21
    assert labels[0] == 1910 and labels[-1] == 2010
    assert len(grid_1910_2014.label_pairs()) == 20


def test_year_2003_maps_to_label_2000(grid_1910_2014):
    assert grid_1910_2014.snapshot_of(2003) == 2000


@given(st.integers(min_value=1910, max_value=2014))
def test_snapshot_mapping_idempotent_on_labels(year):
    grid = SnapshotGrid(1910, 2014, 5)
    label = grid.snapshot_of(year)
    assert grid.snapshot_of(label) == label
    assert label <= year < label + grid.width_years


def test_grid_validation():
    with pytest.raises(InvalidSpec):
        SnapshotGrid(2000, 1990, 5)
    with pytest.raises(InvalidSpec):
        SnapshotGrid(1910, 2014, 0)


# -- ingestion --

def test_multiplex_replication(table, make_records, grid_1910_2014):
    records = make_records([("X", "p1", "J1", 2003)])
    profiles, stats = ingest_records(records, table, grid_1910_2014)
    assert len(profiles) == 1
    profile = profiles[0]
    assert profile.snapshot == 2000
    assert profile.topic_counts == {"T1": 1, "T2": 1}
    assert profile.area_set == frozenset({"A1", "A2"})
    assert stats.records_kept == 1


def test_author_over_threshold_excluded_everywhere(table, make_records, grid_1910_2014):
    rows = [("X", f"p{i}", "J2", 2001) for i in range(18)]
    rows.append(("X", "q1", "J2", 1950))  # different snapshot, still excluded
    rows.append(("Y", "r1", "J2", 2001))
    profiles, stats = ingest_records(records_file=make_records(rows), table=table,
                                     grid=grid_1910_2014, max_papers_per_year=17)
    assert {p.author_id for p in profiles} == {"Y"}
    assert stats.authors_excluded == 1


def test_threshold_17_exactly_is_kept(table, make_records, grid_1910_2014):
    rows = [("X", f"p{i}", "J2", 2001) for i in range(17)]
    profiles, stats = ingest_records(make_records(rows), table, grid_1910_2014, 17)
    assert {p.author_id for p in profiles} == {"X"}
    assert stats.authors_excluded == 0


def test_threshold_zero_disables_cut(table, make_records, grid_1910_2014):
    rows = [("X", f"p{i}", "J2", 2001) for i in range(30)]
    profiles, stats = ingest_records(make_records(rows), table, grid_1910_2014, 0)
    assert {p.author_id for p in profiles} == {"X"}
    assert stats.authors_excluded == 0


def test_duplicate_author_paper_counts_once(table, make_records, grid_1910_2014):
    records = make_records([("X", "p1", "J2", 2001), ("X", "p1", "J2", 2001)])
    profiles, stats = ingest_records(records, table, grid_1910_2014)
    assert profiles[0].topic_counts == {"T2": 1}
    assert stats.records_kept == 1
    assert stats.records_read == 2


def test_unclassified_and_out_of_range_drops_counted(table, make_records, grid_1910_2014):
    records = make_records(
        [
            ("X", "p1", "J2", 2001),
            ("X", "p2", "mystery", 2001),
            ("X", "p3", "J2", 1890),
        ]
    )
    profiles, stats = ingest_records(records, table, grid_1910_2014)
    assert stats.records_read == 3
    assert stats.dropped_unclassified == 1
    assert stats.dropped_year == 1
    assert stats.records_kept == 1


def test_malformed_record_names_file_and_line(table, tmp_path, grid_1910_2014):
    records = write_lines(tmp_path / "bad.tsv", ["X\tp1\tJ2\t2001", "X\tp2\tJ2"])
    with pytest.raises(MalformedRecord, match="bad.tsv:2"):
        ingest_records(records, table, grid_1910_2014)


def test_non_integer_year_rejected(table, tmp_path, grid_1910_2014):
    records = write_lines(tmp_path / "bad.tsv", ["X\tp1\tJ2\tMMXX"])
    with pytest.raises(MalformedRecord):
        ingest_records(records, table, grid_1910_2014)


def test_ndjson_records_equivalent(table, tmp_path, make_records, grid_1910_2014):
    rows = [("X", "p1", "J1", 2003), ("Y", "p2", "J2", 1950)]
    tsv = make_records(rows)
    ndjson = write_lines(
        tmp_path / "records.ndjson",
        ["# json records"]
        + [
            json.dumps(
                {"author_id": a, "paper_id": p, "journal_id": j, "year": y}
            )
            for a, p, j, y in rows
        ],
    )
    assert list(iter_records(ndjson)) != []
    got_tsv, _ = ingest_records(tsv, table, grid_1910_2014)
    got_json, _ = ingest_records(ndjson, table, grid_1910_2014)
    assert got_tsv == got_json


def test_ndjson_rejects_missing_field(tmp_path, table, grid_1910_2014):
    path = write_lines(tmp_path / "r.ndjson", [json.dumps({"author_id": "X"})])
    with pytest.raises(MalformedRecord):
        ingest_records(path, table, grid_1910_2014)


def _random_rows(rng, n):
    rows = []
    for i in range(n):
        rows.append(
            (
                f"a{rng.randrange(6)}",
                f"p{rng.randrange(n)}",
                rng.choice(["J1", "J2", "J3", "unknown"]),
                rng.choice([1890, 1912, 1950, 1951, 2001, 2003, 2014]),
            )
        )
    return rows


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_order_independence(table, make_records, grid_1910_2014, seed):
    rng = random.Random(seed)
    rows = _random_rows(rng, 60)
    shuffled = rows[:]
    rng.shuffle(shuffled)
    a, _ = ingest_records(make_records(rows, "a.tsv"), table, grid_1910_2014)
    b, _ = ingest_records(make_records(shuffled, "b.tsv"), table, grid_1910_2014)
    assert a == b


@pytest.mark.parametrize("seed", [3, 4])
def test_topic_count_conservation_against_recount(table, make_records, grid_1910_2014, seed):
    # Independent streaming recount: filter, dedup to the minimal
    # (year, journal) per (author, paper), then sum journal topic counts.
    rng = random.Random(seed)
    rows = _random_rows(rng, 80)
    records = make_records(rows)
    profiles, stats = ingest_records(records, table, grid_1910_2014)

    best: dict[tuple[str, str], tuple[int, str]] = {}
    for author, paper, journal, year in rows:
        if journal not in TABLE or not (1910 <= year <= 2014):
            continue
        key = (author, paper)
        if key not in best or (year, journal) < best[key]:
            best[key] = (year, journal)
    expected_total = sum(len(TABLE[journal]) for (_, journal) in best.values())
    got_total = sum(sum(p.topic_counts.values()) for p in profiles)
    assert got_total == expected_total
    assert stats.records_kept == len(best)


def test_read_records_typed(make_records):
    path = make_records([("X", "p1", "J1", 2003)])
    assert list(read_records(path)) == [PublicationRecord("X", "p1", "J1", 2003)]


# -- quantile --

def test_quantile_by_hand(tmp_path):
    rows = [(f"a{i}", "p0", "J", 2000) for i in range(9)]
    rows.append(("big", "p0", "J", 2000))
    for i in range(1, 100):
        rows.append(("big", f"p{i}", "J", 2000))
    path = write_lines(tmp_path / "r.tsv", [f"{a}\t{p}\t{j}\t{y}" for a, p, j, y in rows])
    assert compute_yearly_paper_quantile(path, 0.9) == 1
    assert compute_yearly_paper_quantile(path, 0.95) == 100


def test_quantile_identical_counts(tmp_path):
    rows = [(f"a{i}", f"p{i}{k}", "J", 2000) for i in range(5) for k in range(3)]
    path = write_lines(tmp_path / "r.tsv", [f"{a}\t{p}\t{j}\t{y}" for a, p, j, y in rows])
    for q in (0.001, 0.5, 0.999):
        assert compute_yearly_paper_quantile(path, q) == 3


def test_quantile_validation(tmp_path):
    path = write_lines(tmp_path / "r.tsv", ["# empty"])
    with pytest.raises(EmptyInput):
        compute_yearly_paper_quantile(path, 0.5)
    path2 = write_lines(tmp_path / "r2.tsv", ["a\tp\tJ\t2000"])
    with pytest.raises(InvalidSpec):
        compute_yearly_paper_quantile(path2, 1.5)


def test_cut_scope_all_counts_unclassified(table, make_records, grid_1910_2014):
    # 18 unclassified papers push the author over the cut only in 'all' scope
    rows = [("X", f"p{i}", "mystery", 2001) for i in range(18)]
    rows.append(("X", "q0", "J2", 2001))
    records = make_records(rows)
    kept, _ = ingest_records(records, table, grid_1910_2014, 17, cut_scope="classified")
    assert {p.author_id for p in kept} == {"X"}
    excluded, stats = ingest_records(records, table, grid_1910_2014, 17, cut_scope="all")
    assert excluded == []
    assert stats.authors_excluded == 1
