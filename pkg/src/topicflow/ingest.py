"""Streaming ingestion of publication records into per-snapshot activity profiles.

Records are ``author<TAB>paper<TAB>journal<TAB>year`` lines (or
newline-delimited JSON objects with the same four fields, auto-detected).
Ingestion runs two passes: the first counts distinct papers per
(author, year) to find authors over the disambiguation cut, the second
accumulates topic activity per (author, snapshot) for everyone else.
"""
from __future__ import annotations

import json
import re
import sys
from collections import Counter
from dataclasses import dataclass
from typing import Iterator

from .classification import AreaId, ClassificationTable, TopicId
from .errors import EmptyInput, InvalidSpec, MalformedRecord
from .util import quantile_cutoff

RECORD_FIELDS = ("author_id", "paper_id", "journal_id", "year")


@dataclass(frozen=True)
class PublicationRecord:
    author_id: str
    paper_id: str
    journal_id: str
    year: int


@dataclass(frozen=True)
class SnapshotGrid:
    """Non-overlapping windows of ``width_years``, labeled by start year.

    Label 2000 with width 5 covers 2000-2004; the grid 1910-2014 has 21
    labels 1910, 1915, ..., 2010.
    """

    start_year: int
    end_year: int
    width_years: int = 5

    def __post_init__(self):
        if self.width_years < 1:
            raise InvalidSpec(f"snapshot width must be >= 1, got {self.width_years}")
        if self.start_year >= self.end_year:
            raise InvalidSpec(
                f"start year {self.start_year} must precede end year {self.end_year}"
            )

    def contains(self, year: int) -> bool:
        return self.start_year <= year <= self.end_year

    def snapshot_of(self, year: int) -> int:
        return self.start_year + self.width_years * (
            (year - self.start_year) // self.width_years
        )

    def labels(self) -> list[int]:
        return list(range(self.start_year, self.end_year + 1, self.width_years))

    def label_pairs(self) -> list[tuple[int, int]]:
        labels = self.labels()
        return list(zip(labels, labels[1:]))


@dataclass(frozen=True)
class ActivityProfile:
    """One author's activity within one snapshot.

    ``topic_counts`` counts paper classifications (a paper in a journal
    with three topics counts once per topic); ``area_set`` is every area
    of every journal the author published in during the snapshot.
    """

    author_id: str
    snapshot: int
    topic_counts: dict[TopicId, int]
    area_set: frozenset[AreaId]


@dataclass
class IngestStats:
    records_read: int = 0
    records_kept: int = 0
    dropped_unclassified: int = 0
    dropped_year: int = 0
    authors_excluded: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "records_read": self.records_read,
            "records_kept": self.records_kept,
            "dropped_unclassified": self.dropped_unclassified,
            "dropped_year": self.dropped_year,
            "authors_excluded": self.authors_excluded,
        }


_WHITESPACE = re.compile(r"\s")


def _bad_token(value) -> bool:
    return not isinstance(value, str) or not value or _WHITESPACE.search(value) is not None


def _parse_year(value, path, lineno) -> int:
    if isinstance(value, bool):
        raise MalformedRecord(f"{path}:{lineno}: year must be an integer, got {value!r}")
    if isinstance(value, int):
        return value
    try:
        return int(str(value))
    except (TypeError, ValueError):
        raise MalformedRecord(
            f"{path}:{lineno}: year must be an integer, got {value!r}"
        ) from None


def iter_records(path) -> Iterator[tuple[int, str, str, str, int]]:
    """Yield (lineno, author, paper, journal, year) from a records file.

    The format is sniffed from the first non-comment line: ``{`` means
    newline-delimited JSON, anything else is four-column TSV. Comment
    lines (``#``) and blank lines are skipped in both modes.
    """
    json_mode = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            if json_mode is None:
                json_mode = line.lstrip()[:1] == "{"
            if json_mode:
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedRecord(f"{path}:{lineno}: invalid JSON record: {exc}") from None
                if not isinstance(obj, dict) or set(obj) != set(RECORD_FIELDS):
                    raise MalformedRecord(
                        f"{path}:{lineno}: record object must have exactly the fields "
                        f"{', '.join(RECORD_FIELDS)}"
                    )
                author, paper, journal = obj["author_id"], obj["paper_id"], obj["journal_id"]
                year = _parse_year(obj["year"], path, lineno)
            else:
                fields = line.split("\t")
                if len(fields) != 4:
                    raise MalformedRecord(
                        f"{path}:{lineno}: expected 4 tab-separated fields, got {len(fields)}"
                    )
                author, paper, journal = fields[0], fields[1], fields[2]
                year = _parse_year(fields[3], path, lineno)
            if _bad_token(author) or _bad_token(paper) or _bad_token(journal):
                raise MalformedRecord(
                    f"{path}:{lineno}: author/paper/journal ids must be non-empty "
                    f"tokens without whitespace"
                )
            # Author and journal ids repeat across millions of lines;
            # interning collapses them to one object each.
            yield lineno, sys.intern(author), paper, sys.intern(journal), year


def read_records(path) -> Iterator[PublicationRecord]:
    """Typed record stream; the pipeline itself uses the raw tuples."""
    for _, author, paper, journal, year in iter_records(path):
        yield PublicationRecord(author, paper, journal, year)


def _over_threshold_authors(
    records_file,
    table: ClassificationTable,
    grid: SnapshotGrid,
    max_papers_per_year: int,
    cut_scope: str,
) -> set[str]:
    """Authors with more than the threshold distinct papers in any single year."""
    journals = table.journal_topics
    papers_by_author_year: dict[tuple[str, int], set[str]] = {}
    for _, author, paper, journal, year in iter_records(records_file):
        if cut_scope == "classified":
            if not grid.contains(year) or journal not in journals:
                continue
        papers_by_author_year.setdefault((author, year), set()).add(paper)
    return {
        author
        for (author, _), papers in papers_by_author_year.items()
        if len(papers) > max_papers_per_year
    }


def ingest_records(
    records_file,
    table: ClassificationTable,
    grid: SnapshotGrid,
    max_papers_per_year: int = 17,
    *,
    cut_scope: str = "classified",
) -> tuple[list[ActivityProfile], IngestStats]:
    """Stream records into activity profiles, applying the corpus filters.

    Filters, in order: records outside the grid's year range are dropped
    (counted in dropped_year); records in journals absent from the table
    are dropped (dropped_unclassified); authors exceeding
    ``max_papers_per_year`` distinct papers in any single calendar year
    are excluded entirely, every record in every year (0 disables the
    cut). Duplicate (author, paper) pairs count once, canonicalized to
    the smallest (year, journal) so the result does not depend on record
    order. ``cut_scope`` controls whether the per-year paper counts that
    feed the cut see only classified in-range records (``classified``,
    the default) or every well-formed record (``all``).

    Returns profiles sorted by (author, snapshot) plus ingest statistics.
    """
    if max_papers_per_year < 0:
        raise InvalidSpec(f"max_papers_per_year must be >= 0, got {max_papers_per_year}")
    if cut_scope not in ("classified", "all"):
        raise InvalidSpec(f"cut_scope must be 'classified' or 'all', got {cut_scope!r}")

    excluded: set[str] = set()
    if max_papers_per_year > 0:
        excluded = _over_threshold_authors(
            records_file, table, grid, max_papers_per_year, cut_scope
        )

    stats = IngestStats(authors_excluded=len(excluded))
    journals = table.journal_topics

    # Canonical (year, journal) per (author, paper): min() keeps the result
    # independent of input order when a pair appears with divergent fields.
    contributions: dict[tuple[str, str], tuple[int, str]] = {}
    for _, author, paper, journal, year in iter_records(records_file):
        stats.records_read += 1
        if not grid.contains(year):
            stats.dropped_year += 1
            continue
        if journal not in journals:
            stats.dropped_unclassified += 1
            continue
        if author in excluded:
            continue
        key = (author, paper)
        candidate = (year, journal)
        previous = contributions.get(key)
        if previous is None or candidate < previous:
            contributions[key] = candidate

    counts: dict[tuple[str, int], Counter[str]] = {}
    for (author, _), (year, journal) in contributions.items():
        bucket = counts.setdefault((author, grid.snapshot_of(year)), Counter())
        for topic in journals[journal]:
            bucket[topic] += 1
    stats.records_kept = len(contributions)

    topic_area = table.topic_area
    profiles = [
        ActivityProfile(
            author_id=author,
            snapshot=snapshot,
            topic_counts=dict(topic_counts),
            area_set=frozenset(topic_area[t] for t in topic_counts),
        )
        for (author, snapshot), topic_counts in sorted(counts.items())
    ]
    return profiles, stats


def compute_yearly_paper_quantile(records_file, q: float) -> int:
    """Threshold k such that a fraction q of (author, year) paper counts are <= k.

    Counts distinct papers per author per calendar year over every
    well-formed record, with no classification or year filtering, so the
    cut can be re-derived on a raw corpus.
    """
    if not 0 < q < 1:
        raise InvalidSpec(f"quantile must be in (0, 1), got {q}")
    papers_by_author_year: dict[tuple[str, int], set[str]] = {}
    for _, author, paper, _, year in iter_records(records_file):
        papers_by_author_year.setdefault((author, year), set()).add(paper)
    if not papers_by_author_year:
        raise EmptyInput(f"{records_file}: no records")
    return quantile_cutoff(
        (len(papers) for papers in papers_by_author_year.values()), q
    )
