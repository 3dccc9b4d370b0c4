"""Text-described asset database with token-overlap retrieval.

Lookup is plain text matching: the query and every record description are
tokenized (lowercase, split on non-alphanumeric runs) and scored by Jaccard
similarity of the token sets. Ties break toward the lexicographically
smallest record id so reordering the catalog file never changes a result.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import IO, Iterable

from .errors import CatalogLoadError, NoMatchError, RetrievalError
from .geometry import BBoxDims

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> frozenset[str]:
    return frozenset(t for t in _TOKEN_SPLIT.split(text.lower()) if t)


def jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a or not b:
        return 0.0
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def slugify(text: str) -> str:
    """Lowercase with spaces collapsed to underscores; used for instance names."""
    return "_".join(text.lower().split())


@dataclass(frozen=True)
class AssetRecord:
    id: str
    description: str
    category: str
    dims: BBoxDims
    path: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("asset id must be non-empty")
        if not self.description:
            raise ValueError("asset description must be non-empty")


@dataclass(frozen=True)
class AssetCatalog:
    records: tuple[AssetRecord, ...]
    index: tuple[frozenset[str], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.index) != len(self.records):
            object.__setattr__(
                self, "index", tuple(tokenize(r.description) for r in self.records)
            )

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class RequestItem:
    quantity: int
    description: str

    def __post_init__(self):
        if self.quantity < 1:
            raise ValueError(f"quantity must be >= 1, got {self.quantity}")
        if not self.description:
            raise ValueError("item description must be non-empty")


@dataclass(frozen=True)
class DesignRequest:
    room_type: str
    items: tuple[RequestItem, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if not self.items:
            raise ValueError("request must contain at least one item")

    @property
    def total_instances(self) -> int:
        return sum(item.quantity for item in self.items)


def load_catalog(source: Iterable[str] | IO[str]) -> AssetCatalog:
    """Parse one JSON asset record per line, preserving file order.

    Raises CatalogLoadError naming the offending line for malformed JSON,
    invalid dims, or duplicate ids.
    """
    records: list[AssetRecord] = []
    seen_ids: set[str] = set()
    for lineno, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise CatalogLoadError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
        try:
            bbox = data["bbox"]
            record = AssetRecord(
                id=str(data["id"]),
                description=str(data["description"]),
                category=str(data.get("category", "")),
                dims=BBoxDims(float(bbox["h"]), float(bbox["w"]), float(bbox["d"])),
                path=str(data.get("path", "")),
            )
        except (KeyError, TypeError) as exc:
            raise CatalogLoadError(f"line {lineno}: missing or malformed field ({exc!r})") from exc
        except ValueError as exc:
            raise CatalogLoadError(f"line {lineno}: invalid dims ({exc})") from exc
        if record.id in seen_ids:
            raise CatalogLoadError(f"line {lineno}: duplicate id {record.id!r}")
        seen_ids.add(record.id)
        records.append(record)
    return AssetCatalog(tuple(records))


def load_catalog_file(path) -> AssetCatalog:
    with open(path, "r", encoding="utf-8") as handle:
        return load_catalog(handle)


def retrieve(description: str, catalog: AssetCatalog) -> AssetRecord:
    """Best Jaccard match for the query; smallest id wins ties."""
    if not len(catalog):
        raise RetrievalError("cannot retrieve from an empty catalog")
    if not description.strip():
        raise RetrievalError("query description must be non-empty")
    query = tokenize(description)
    best: AssetRecord | None = None
    best_score = 0.0
    for record, tokens in zip(catalog.records, catalog.index):
        score = jaccard(query, tokens)
        if score > best_score or (score == best_score and score > 0.0
                                  and best is not None and record.id < best.id):
            best, best_score = record, score
    if best is None or best_score <= 0.0:
        raise NoMatchError(f"no catalog record matches {description!r}")
    return best


def retrieve_many(
    items: Iterable[RequestItem], catalog: AssetCatalog
) -> list[tuple[str, AssetRecord]]:
    """Expand quantities into named instances, retrieving once per description.

    Instance names are the description slug, suffixed `_i` (1-based) when the
    quantity exceeds one. A name already taken by an earlier item gets a
    numeric suffix bump so names stay pairwise distinct.
    """
    cache: dict[str, AssetRecord] = {}
    used: set[str] = set()
    out: list[tuple[str, AssetRecord]] = []
    for item in items:
        if item.description not in cache:
            try:
                cache[item.description] = retrieve(item.description, catalog)
            except RetrievalError as exc:
                raise RetrievalError(f"{exc} (while resolving {item.description!r})") from exc
        record = cache[item.description]
        slug = slugify(item.description)
        for i in range(1, item.quantity + 1):
            name = slug if item.quantity == 1 else f"{slug}_{i}"
            bump = 2
            while name in used:
                name = f"{slug}_{bump}" if item.quantity == 1 else f"{slug}_{i}_{bump}"
                bump += 1
            used.add(name)
            out.append((name, record))
    return out
