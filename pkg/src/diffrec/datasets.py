"""Interaction file ingestion and reproducible train/test splitting.

The split protocol is deliberately boring so it can be replayed anywhere:
raw ids are densified in order of first appearance, duplicate links collapse,
the surviving links are sorted ascending by (user, object), and one uniform
draw per link from a PCG64 stream seeded with ``seed`` sends the link to the
training side when the draw falls below ``ratio``. Split files persist the
exact link partition plus a checksum, so a saved split never depends on this
library's version of the protocol to be read back.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import EmptyDatasetError, SplitCorruptionError, SplitValidationError
from .graph import BipartiteGraph, build_graph

__all__ = [
    "FieldLayout", "InteractionRecord", "IngestResult", "ingest",
    "SplitInfo", "SplitDataset", "split", "save_split", "load_split",
    "SPLIT_FORMAT", "SPLIT_GENERATOR",
]

SPLIT_FORMAT = "diffrec-split-v1"
# Bernoulli draw per link from numpy's default PCG64 bit generator; links are
# visited in ascending (user, object) order. Renaming this tag means the
# protocol changed.
SPLIT_GENERATOR = "numpy-pcg64"

_COLUMN_TOKENS = ("user", "object", "rating", "timestamp", "-")


@dataclass(frozen=True)
class FieldLayout:
    """Column layout of a delimited interaction file.

    ``columns`` names each field in order; ``-`` skips a column. The default
    matches the classic 4-column ratings layout.
    """

    delimiter: str = "\t"
    columns: tuple = ("user", "object", "rating", "timestamp")

    def __post_init__(self):
        for token in self.columns:
            if token not in _COLUMN_TOKENS:
                raise ValueError(f"unknown column token {token!r}; "
                                 f"valid tokens: {', '.join(_COLUMN_TOKENS)}")
        for required in ("user", "object"):
            if self.columns.count(required) != 1:
                raise ValueError(f"layout must name the {required!r} column exactly once")
        for optional in ("rating", "timestamp"):
            if self.columns.count(optional) > 1:
                raise ValueError(f"layout names the {optional!r} column more than once")

    @classmethod
    def from_spec(cls, spec: str, delimiter: str = "\t") -> "FieldLayout":
        """Parse a layout like ``"user,object,rating,timestamp"``."""
        return cls(delimiter=delimiter,
                   columns=tuple(tok.strip() for tok in spec.split(",")))


class InteractionRecord(NamedTuple):
    """One parsed interaction; ids are the raw tokens from the file."""

    user_id: str
    object_id: str
    rating: float | None = None
    timestamp: int | None = None


@dataclass(frozen=True)
class IngestResult:
    records: list
    total_lines: int
    malformed_lines: int


def ingest(source, layout: FieldLayout | None = None,
           rating_threshold: float | None = None) -> IngestResult:
    """Parse an interaction file into records.

    ``source`` is a path or an open text/binary stream. Lines with the wrong
    column count or unparseable rating/timestamp fields are counted as
    malformed and skipped; blank lines are ignored. With ``rating_threshold``
    set, only records rating at or above the threshold survive (the layout
    must then include a rating column).
    """
    layout = layout or FieldLayout()
    positions = {name: i for i, name in enumerate(layout.columns) if name != "-"}
    if rating_threshold is not None and "rating" not in positions:
        raise ValueError("rating_threshold requires a layout with a rating column")

    if isinstance(source, (str, Path)):
        stream = open(source, "r", encoding="utf-8")
        close = True
    elif isinstance(source, (bytes, bytearray)):
        stream = io.StringIO(source.decode("utf-8"))
        close = True
    elif isinstance(source, (io.RawIOBase, io.BufferedIOBase)):
        stream = io.TextIOWrapper(source, encoding="utf-8")
        close = False
    elif hasattr(source, "read") or hasattr(source, "__iter__"):
        stream = source
        close = False
    else:
        raise TypeError(f"unsupported source type {type(source)!r}")

    records = []
    total = 0
    malformed = 0
    ncols = len(layout.columns)
    try:
        for line in stream:
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            total += 1
            fields = line.split(layout.delimiter)
            if len(fields) != ncols:
                malformed += 1
                continue
            user_id = fields[positions["user"]].strip()
            object_id = fields[positions["object"]].strip()
            if not user_id or not object_id:
                malformed += 1
                continue
            rating = None
            if "rating" in positions:
                try:
                    rating = float(fields[positions["rating"]])
                except ValueError:
                    malformed += 1
                    continue
            timestamp = None
            if "timestamp" in positions:
                try:
                    timestamp = int(fields[positions["timestamp"]])
                except ValueError:
                    malformed += 1
                    continue
            if rating_threshold is not None and rating < rating_threshold:
                continue
            records.append(InteractionRecord(user_id, object_id, rating, timestamp))
    finally:
        if close:
            stream.close()

    if not records:
        raise EmptyDatasetError("no usable interaction records after parsing and filtering")
    return IngestResult(records=records, total_lines=total, malformed_lines=malformed)


@dataclass(frozen=True)
class SplitInfo:
    """Compact split descriptor embedded in metric reports."""

    ratio: float
    seed: int
    num_users: int
    num_objects: int
    train_links: int
    test_links: int
    checksum: str
    generator: str = SPLIT_GENERATOR


@dataclass(frozen=True, eq=False)
class SplitDataset:
    """A train/test partition of one bipartite interaction dataset.

    Both sides share the same dense index space; ``user_ids`` and
    ``object_ids`` map dense indices back to the raw file tokens.
    """

    train: BipartiteGraph
    test: BipartiteGraph
    ratio: float
    seed: int
    user_ids: tuple
    object_ids: tuple
    duplicates_dropped: int = 0

    @property
    def num_users(self) -> int:
        return self.train.num_users

    @property
    def num_objects(self) -> int:
        return self.train.num_objects

    @cached_property
    def user_index(self) -> dict:
        return {uid: i for i, uid in enumerate(self.user_ids)}

    @cached_property
    def object_index(self) -> dict:
        return {oid: i for i, oid in enumerate(self.object_ids)}

    @cached_property
    def checksum(self) -> str:
        return _payload_checksum(_payload(self))

    def describe(self) -> SplitInfo:
        return SplitInfo(
            ratio=self.ratio, seed=self.seed,
            num_users=self.num_users, num_objects=self.num_objects,
            train_links=self.train.num_links, test_links=self.test.num_links,
            checksum=self.checksum,
        )


def split(records, ratio: float, seed: int) -> SplitDataset:
    """Partition interaction records into train and test link sets.

    Raw ids densify in first-appearance order, duplicates collapse, and each
    unique link draws once against ``ratio`` from a PCG64 stream seeded with
    ``seed``. The same records, ratio and seed always reproduce the same
    partition.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie strictly between 0 and 1, got {ratio}")
    if not records:
        raise EmptyDatasetError("cannot split an empty record list")

    user_index: dict = {}
    object_index: dict = {}
    pairs = np.empty((len(records), 2), dtype=np.int64)
    for i, rec in enumerate(records):
        pairs[i, 0] = user_index.setdefault(rec.user_id, len(user_index))
        pairs[i, 1] = object_index.setdefault(rec.object_id, len(object_index))

    links = np.unique(pairs, axis=0)
    duplicates = len(records) - links.shape[0]
    m, n = len(user_index), len(object_index)

    draws = np.random.default_rng(seed).random(links.shape[0])
    to_train = draws < ratio
    train = build_graph(links[to_train], num_users=m, num_objects=n)
    test = build_graph(links[~to_train], num_users=m, num_objects=n)
    return SplitDataset(
        train=train, test=test, ratio=float(ratio), seed=int(seed),
        user_ids=tuple(user_index), object_ids=tuple(object_index),
        duplicates_dropped=int(duplicates),
    )


def _payload(ds: SplitDataset) -> dict:
    return {
        "format": SPLIT_FORMAT,
        "generator": SPLIT_GENERATOR,
        "ratio": ds.ratio,
        "seed": ds.seed,
        "duplicates_dropped": ds.duplicates_dropped,
        "user_ids": list(ds.user_ids),
        "object_ids": list(ds.object_ids),
        "train_links": ds.train.links().tolist(),
        "test_links": ds.test.links().tolist(),
    }


def _payload_checksum(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def save_split(ds: SplitDataset, path) -> str:
    """Write ``ds`` to a self-describing JSON split file; returns the checksum."""
    payload = _payload(ds)
    checksum = _payload_checksum(payload)
    payload["checksum"] = checksum
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")
    return checksum


def load_split(path) -> SplitDataset:
    """Read a split file back, verifying checksum and structural invariants.

    Raises SplitCorruptionError when the file is not a well-formed split file
    or its checksum does not match, and SplitValidationError when the content
    parses but violates an invariant (index out of range, duplicate link, or
    train/test overlap).
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SplitCorruptionError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("format") != SPLIT_FORMAT:
        raise SplitCorruptionError(f"{path}: missing or unknown split format tag")

    required = ("generator", "ratio", "seed", "duplicates_dropped",
                "user_ids", "object_ids", "train_links", "test_links", "checksum")
    missing = [key for key in required if key not in payload]
    if missing:
        raise SplitCorruptionError(f"{path}: missing fields: {', '.join(missing)}")

    stored = payload.pop("checksum")
    if _payload_checksum(payload) != stored:
        raise SplitCorruptionError(f"{path}: checksum mismatch, file was modified or truncated")

    ratio = payload["ratio"]
    if not isinstance(ratio, (int, float)) or not 0.0 < ratio < 1.0:
        raise SplitValidationError(f"{path}: ratio {ratio!r} outside (0, 1)")
    user_ids = payload["user_ids"]
    object_ids = payload["object_ids"]
    if len(set(user_ids)) != len(user_ids) or len(set(object_ids)) != len(object_ids):
        raise SplitValidationError(f"{path}: id tables contain duplicates")
    m, n = len(user_ids), len(object_ids)

    def check_links(raw, name):
        try:
            arr = np.asarray(raw, dtype=np.int64).reshape(-1, 2) if raw else \
                np.empty((0, 2), dtype=np.int64)
        except (ValueError, TypeError) as exc:
            raise SplitValidationError(f"{path}: {name} is not a list of index pairs") from exc
        if arr.size and (arr.min() < 0 or arr[:, 0].max() >= m or arr[:, 1].max() >= n):
            raise SplitValidationError(f"{path}: {name} contains out-of-range indices")
        if np.unique(arr, axis=0).shape[0] != arr.shape[0]:
            raise SplitValidationError(f"{path}: {name} contains duplicate links")
        return arr

    train_links = check_links(payload["train_links"], "train_links")
    test_links = check_links(payload["test_links"], "test_links")
    combined = np.concatenate([train_links, test_links])
    if combined.size and np.unique(combined, axis=0).shape[0] != combined.shape[0]:
        raise SplitValidationError(f"{path}: train and test share at least one link")

    return SplitDataset(
        train=build_graph(train_links, num_users=m, num_objects=n),
        test=build_graph(test_links, num_users=m, num_objects=n),
        ratio=float(ratio), seed=int(payload["seed"]),
        user_ids=tuple(user_ids), object_ids=tuple(object_ids),
        duplicates_dropped=int(payload["duplicates_dropped"]),
    )
