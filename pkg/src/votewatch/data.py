"""Election and exit-poll records, CSV ingestion, and bundled datasets.

Input files are long-form CSV (UTF-8, header row required):

* results: ``region,candidate,votes`` — one row per candidate per region;
* polls:   ``region,poll_id,candidate,respondents`` — multiple polls per
  region are pooled by summing counts, assuming the polls were disjoint.

Regions with more than two candidates are reduced to two (an explicit
designation, or the region's top two by votes) and shares renormalized
over that pair, so third-party votes drop out before testing.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import InvalidInputError

RESULT_FIELDS = ["region", "candidate", "votes"]
POLL_FIELDS = ["region", "poll_id", "candidate", "respondents"]


@dataclass(frozen=True)
class ElectionRecord:
    """Final two-candidate result for one region."""

    region: str
    n: int
    first_name: str
    second_name: str
    first_share: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidInputError(f"{self.region}: electorate size must be >= 1")
        if not 0.0 < self.first_share < 1.0:
            raise InvalidInputError(
                f"{self.region}: first-candidate share {self.first_share} "
                "is degenerate after rescaling"
            )
        if self.first_name == self.second_name:
            raise InvalidInputError(f"{self.region}: candidate names must differ")


@dataclass(frozen=True)
class ExitPollRecord:
    """Pooled exit poll for one region; share refers to the region's first candidate."""

    region: str
    k: int
    first_share: float

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvalidInputError(f"{self.region}: poll size must be >= 1")
        if not 0.0 < self.first_share < 1.0:
            raise InvalidInputError(
                f"{self.region}: poll share {self.first_share} is degenerate"
            )


def _read_rows(path, fields: list[str], kind: str) -> list[dict]:
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot open {kind} file {path}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != fields:
            raise InvalidInputError(
                f"{path}: expected header {','.join(fields)}, "
                f"got {','.join(reader.fieldnames or [])}"
            )
        return list(reader)


def _parse_count(raw: str, what: str, path, line: int, errors: list[str]) -> int:
    try:
        value = int(raw)
    except (TypeError, ValueError):
        errors.append(f"{path}:{line}: {what} {raw!r} is not an integer")
        return -1
    if value < 0:
        errors.append(f"{path}:{line}: {what} must be nonnegative, got {value}")
        return -1
    return value


def _pick_pair(
    region: str,
    counts: dict[str, int],
    candidates: tuple[str, str] | None,
    errors: list[str],
) -> tuple[str, str] | None:
    if candidates is not None:
        missing = [c for c in candidates if c not in counts]
        if missing:
            errors.append(f"{region}: designated candidate(s) {missing} not present")
            return None
        return candidates
    if len(counts) < 2:
        errors.append(f"{region}: needs two candidates, found {len(counts)}")
        return None
    if len(counts) == 2:
        names = list(counts)
        return names[0], names[1]
    # Keep the two largest vote-getters; break ties by name for determinism.
    ranked = sorted(counts, key=lambda name: (-counts[name], name))
    top = sorted(ranked[:2], key=lambda name: list(counts).index(name))
    return top[0], top[1]


def ingest(
    results_path,
    polls_path=None,
    candidates: tuple[str, str] | None = None,
) -> tuple[dict[str, ElectionRecord], dict[str, ExitPollRecord]]:
    """Load and validate results (and optionally polls) into record maps.

    Returns ``(results, polls)`` keyed by region, in file order.  All
    validation problems are collected and raised together, each tagged
    with its file and line number.
    """
    errors: list[str] = []
    result_rows = _read_rows(results_path, RESULT_FIELDS, "results")

    counts_by_region: dict[str, dict[str, int]] = {}
    for i, row in enumerate(result_rows, start=2):
        region = (row["region"] or "").strip()
        name = (row["candidate"] or "").strip()
        if not region or not name:
            errors.append(f"{results_path}:{i}: empty region or candidate")
            continue
        votes = _parse_count(row["votes"], "votes", results_path, i, errors)
        if votes < 0:
            continue
        counts_by_region.setdefault(region, {})
        counts_by_region[region][name] = counts_by_region[region].get(name, 0) + votes

    results: dict[str, ElectionRecord] = {}
    pair_by_region: dict[str, tuple[str, str]] = {}
    for region, counts in counts_by_region.items():
        pair = _pick_pair(region, counts, candidates, errors)
        if pair is None:
            continue
        first, second = pair
        v1, v2 = counts[first], counts[second]
        if v1 == 0 or v2 == 0:
            errors.append(f"{region}: zero votes for {first if v1 == 0 else second}")
            continue
        pair_by_region[region] = pair
        results[region] = ElectionRecord(
            region=region,
            n=v1 + v2,
            first_name=first,
            second_name=second,
            first_share=v1 / (v1 + v2),
        )

    polls: dict[str, ExitPollRecord] = {}
    if polls_path is not None:
        poll_rows = _read_rows(polls_path, POLL_FIELDS, "polls")
        resp_by_region: dict[str, dict[str, int]] = {}
        for i, row in enumerate(poll_rows, start=2):
            region = (row["region"] or "").strip()
            name = (row["candidate"] or "").strip()
            if not region or not name:
                errors.append(f"{polls_path}:{i}: empty region or candidate")
                continue
            if region not in counts_by_region:
                errors.append(f"{polls_path}:{i}: poll region {region!r} has no result row")
                continue
            resp = _parse_count(row["respondents"], "respondents", polls_path, i, errors)
            if resp < 0:
                continue
            resp_by_region.setdefault(region, {})
            resp_by_region[region][name] = resp_by_region[region].get(name, 0) + resp

        for region, resp in resp_by_region.items():
            if region not in pair_by_region:
                continue
            first, second = pair_by_region[region]
            r1, r2 = resp.get(first, 0), resp.get(second, 0)
            if r1 == 0 or r2 == 0:
                errors.append(f"{region}: poll has zero respondents for {first if r1 == 0 else second}")
                continue
            polls[region] = ExitPollRecord(
                region=region, k=r1 + r2, first_share=r1 / (r1 + r2)
            )

    if errors:
        raise InvalidInputError("\n".join(errors))
    return results, polls


def write_results_csv(records: dict[str, ElectionRecord], path) -> None:
    """Serialize result records back to the long-form schema."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(RESULT_FIELDS)
        for rec in records.values():
            first_votes = round(rec.first_share * rec.n)
            writer.writerow([rec.region, rec.first_name, first_votes])
            writer.writerow([rec.region, rec.second_name, rec.n - first_votes])


def write_polls_csv(
    polls: dict[str, ExitPollRecord], results: dict[str, ElectionRecord], path
) -> None:
    """Serialize pooled poll records; candidate names come from the result map."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(POLL_FIELDS)
        for rec in polls.values():
            names = results[rec.region]
            first_resp = round(rec.first_share * rec.k)
            writer.writerow([rec.region, "pooled", names.first_name, first_resp])
            writer.writerow([rec.region, "pooled", names.second_name, rec.k - first_resp])


def _dataset_path(stem: str) -> Path:
    return Path(str(resources.files("votewatch.datasets").joinpath(f"{stem}.csv")))


def load_dataset(name: str) -> tuple[dict[str, ElectionRecord], dict[str, ExitPollRecord]]:
    """Load one of the bundled datasets: ``us2016``, ``intl2004`` or ``null50``."""
    if name not in BUNDLED_DATASETS:
        raise InvalidInputError(
            f"unknown dataset {name!r}; available: {', '.join(sorted(BUNDLED_DATASETS))}"
        )
    return ingest(_dataset_path(f"{name}_results"), _dataset_path(f"{name}_polls"))


#: Bundled example data: the five contested 2016 US states, the 2004
#: Ukraine runoff and Venezuela referendum, and a 50-region synthetic
#: null set used for smoke testing.
BUNDLED_DATASETS = ("us2016", "intl2004", "null50")
