"""Reading and filtering list-membership and movie-metadata files.

Two on-disk layouts are supported for each input:

* ``tsv``: memberships are ``list_id <TAB> user_id <TAB> movie_id`` (user_id
  may be empty). Metadata rows are ``movie_id, type, decade, genres,
  countries, languages, directors, actors, rating`` with an optional trailing
  ``title`` column; multi-valued cells are pipe separated and an empty cell
  means missing.
* ``jsonl``: one JSON object per line using the same field names.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ContractError, ParseError, ValidationError

FORMATS = ("tsv", "jsonl")

SINGLE_VALUED = ("type", "decade")
MULTI_VALUED = ("genres", "countries", "languages", "directors", "actors")
ATTRIBUTES = SINGLE_VALUED + MULTI_VALUED
METADATA_COLUMNS = ("movie_id",) + ATTRIBUTES + ("rating",)

MOVIE_TYPES = (
    "TV movie",
    "feature film",
    "short film",
    "TV episode",
    "TV series",
    "mini-series",
    "video",
    "documentary",
    "TV special",
)


def _check_format(fmt):
    if fmt == "json-lines":
        fmt = "jsonl"
    if fmt not in FORMATS:
        raise ContractError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    return fmt


@dataclass(frozen=True)
class ListMembershipTable:
    """Which list holds which movie, plus the optional owner of each list."""

    memberships: frozenset = frozenset()
    list_owner: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def from_rows(cls, rows: Iterable[tuple], owners: Mapping[str, str] | None = None):
        memberships = frozenset((str(l), str(m)) for l, m in rows)
        lists = {l for l, _ in memberships}
        owners = {l: u for l, u in (owners or {}).items() if l in lists and u}
        return cls(memberships, owners)

    def __len__(self):
        return len(self.memberships)

    @cached_property
    def lists(self) -> dict[str, frozenset]:
        """list_id -> set of movies on that list."""
        out = defaultdict(set)
        for l, m in self.memberships:
            out[l].add(m)
        return {l: frozenset(ms) for l, ms in out.items()}

    @cached_property
    def movie_lists(self) -> dict[str, frozenset]:
        """movie_id -> set of lists containing it."""
        out = defaultdict(set)
        for l, m in self.memberships:
            out[m].add(l)
        return {m: frozenset(ls) for m, ls in out.items()}

    @property
    def movies(self) -> frozenset:
        return frozenset(self.movie_lists)

    def restrict(self, memberships) -> "ListMembershipTable":
        memberships = frozenset(memberships)
        lists = {l for l, _ in memberships}
        owners = {l: u for l, u in self.list_owner.items() if l in lists}
        return ListMembershipTable(memberships, owners)


@dataclass(frozen=True)
class MovieMetadata:
    movie_id: str
    type: str | None = None
    decade: str | None = None
    genres: frozenset = frozenset()
    countries: frozenset = frozenset()
    languages: frozenset = frozenset()
    directors: frozenset = frozenset()
    actors: frozenset = frozenset()
    rating: float | None = None
    title: str | None = None

    def __post_init__(self):
        if self.rating is not None and not (1.0 <= self.rating <= 10.0):
            raise ValidationError(
                f"rating {self.rating} for movie {self.movie_id!r} outside [1, 10]"
            )

    def values(self, attribute: str) -> frozenset:
        """Values of a categorical attribute as a set (empty when missing)."""
        if attribute in SINGLE_VALUED:
            v = getattr(self, attribute)
            return frozenset() if v is None else frozenset((v,))
        if attribute in MULTI_VALUED:
            return getattr(self, attribute)
        raise ContractError(f"unknown attribute {attribute!r}")


def _open_lines(path):
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc


def parse_memberships(path, format="tsv") -> ListMembershipTable:
    """Read a membership file; duplicate rows collapse silently."""
    fmt = _check_format(format)
    rows = []
    owners: dict[str, str] = {}
    for lineno, line in enumerate(_open_lines(path), start=1):
        if not line.strip():
            continue
        if fmt == "tsv":
            if lineno == 1 and line.startswith("list_id\t"):
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise ParseError(
                    f"expected 3 tab-separated columns, got {len(cols)}", path, lineno
                )
            list_id, user_id, movie_id = (c.strip() for c in cols)
        else:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path, lineno) from None
            if not isinstance(obj, dict):
                raise ParseError("expected a JSON object", path, lineno)
            list_id = str(obj.get("list_id") or "").strip()
            movie_id = str(obj.get("movie_id") or "").strip()
            user_id = str(obj.get("user_id") or "").strip()
        if not list_id or not movie_id:
            raise ParseError("empty list_id or movie_id", path, lineno)
        if user_id:
            prev = owners.setdefault(list_id, user_id)
            if prev != user_id:
                raise ParseError(
                    f"list {list_id!r} owned by both {prev!r} and {user_id!r}",
                    path,
                    lineno,
                )
        rows.append((list_id, movie_id))
    return ListMembershipTable.from_rows(rows, owners)


def _split_multi(cell):
    if cell is None:
        return frozenset()
    if isinstance(cell, (list, tuple, set, frozenset)):
        items = cell
    else:
        items = str(cell).split("|")
    return frozenset(s.strip() for s in map(str, items) if s.strip())


def _single(cell):
    if cell is None:
        return None
    cell = str(cell).strip()
    return cell or None


def _rating(cell, path, lineno):
    if cell is None or (isinstance(cell, str) and not cell.strip()):
        return None
    try:
        value = float(cell)
    except (TypeError, ValueError):
        raise ParseError(f"rating {cell!r} is not a number", path, lineno) from None
    if math.isnan(value) or not 1.0 <= value <= 10.0:
        raise ValidationError(f"{path}:{lineno}: rating {value} outside [1, 10]")
    return value


def _record_to_metadata(rec, path, lineno):
    movie_id = _single(rec.get("movie_id"))
    if movie_id is None:
        raise ParseError("empty movie_id", path, lineno)
    return MovieMetadata(
        movie_id=movie_id,
        type=_single(rec.get("type")),
        decade=_single(rec.get("decade")),
        genres=_split_multi(rec.get("genres")),
        countries=_split_multi(rec.get("countries")),
        languages=_split_multi(rec.get("languages")),
        directors=_split_multi(rec.get("directors")),
        actors=_split_multi(rec.get("actors")),
        rating=_rating(rec.get("rating"), path, lineno),
        title=_single(rec.get("title")),
    )


def parse_metadata(path, format="tsv") -> dict[str, MovieMetadata]:
    fmt = _check_format(format)
    out: dict[str, MovieMetadata] = {}
    ncols = len(METADATA_COLUMNS)
    for lineno, line in enumerate(_open_lines(path), start=1):
        if not line.strip():
            continue
        if fmt == "tsv":
            if lineno == 1 and line.startswith("movie_id\t"):
                continue
            cols = line.split("\t")
            if len(cols) not in (ncols, ncols + 1):
                raise ParseError(
                    f"expected {ncols} or {ncols + 1} columns, got {len(cols)}",
                    path,
                    lineno,
                )
            rec = dict(zip(METADATA_COLUMNS + ("title",), cols))
        else:
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path, lineno) from None
            if not isinstance(rec, dict):
                raise ParseError("expected a JSON object", path, lineno)
        meta = _record_to_metadata(rec, path, lineno)
        if meta.movie_id in out:
            raise ValidationError(f"{path}:{lineno}: duplicate movie_id {meta.movie_id!r}")
        out[meta.movie_id] = meta
    return out


def write_memberships(table: ListMembershipTable, path, format="tsv"):
    fmt = _check_format(format)
    lines = []
    for list_id, movie_id in sorted(table.memberships):
        owner = table.list_owner.get(list_id, "")
        if fmt == "tsv":
            lines.append(f"{list_id}\t{owner}\t{movie_id}")
        else:
            lines.append(
                json.dumps(
                    {"list_id": list_id, "user_id": owner, "movie_id": movie_id},
                    ensure_ascii=False,
                )
            )
    Path(path).write_text("".join(l + "\n" for l in lines), encoding="utf-8")


def _fmt_rating(r):
    return "" if r is None else repr(float(r))


def write_metadata(meta: Mapping[str, MovieMetadata], path, format="tsv"):
    fmt = _check_format(format)
    with_title = any(m.title for m in meta.values())
    lines = []
    for movie_id in sorted(meta):
        m = meta[movie_id]
        if fmt == "tsv":
            cells = [m.movie_id, m.type or "", m.decade or ""]
            cells += ["|".join(sorted(getattr(m, a))) for a in MULTI_VALUED]
            cells.append(_fmt_rating(m.rating))
            if with_title:
                cells.append(m.title or "")
            lines.append("\t".join(cells))
        else:
            rec = {"movie_id": m.movie_id, "type": m.type, "decade": m.decade}
            rec.update({a: sorted(getattr(m, a)) for a in MULTI_VALUED})
            rec["rating"] = m.rating
            if m.title:
                rec["title"] = m.title
            lines.append(json.dumps(rec, ensure_ascii=False))
    header = ["\t".join(METADATA_COLUMNS + (("title",) if with_title else ()))] if fmt == "tsv" else []
    Path(path).write_text("".join(l + "\n" for l in header + lines), encoding="utf-8")


def filter_lists(table: ListMembershipTable, min_size=5, max_size=100) -> ListMembershipTable:
    """Keep only lists holding between ``min_size`` and ``max_size`` movies inclusive.

    ``max_size=None`` means no upper bound.
    """
    if max_size is None:
        max_size = math.inf
    if min_size < 1 or max_size < min_size:
        raise ContractError(f"invalid list size bounds [{min_size}, {max_size}]")
    keep = {l for l, ms in table.lists.items() if min_size <= len(ms) <= max_size}
    return table.restrict(p for p in table.memberships if p[0] in keep)


def filter_movies(table: ListMembershipTable, min_lists=5) -> ListMembershipTable:
    """Keep only movies that appear on at least ``min_lists`` lists of ``table``."""
    if min_lists < 1:
        raise ContractError(f"min_lists must be >= 1, got {min_lists}")
    keep = {m for m, ls in table.movie_lists.items() if len(ls) >= min_lists}
    return table.restrict(p for p in table.memberships if p[1] in keep)
