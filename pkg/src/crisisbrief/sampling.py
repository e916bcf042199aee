"""Representative post sampling.

The selection pipeline per dimension: measure class frequencies over
argmax assignments, turn them into integer quotas with largest-remainder
rounding, rank each class's posts by per-post confidence, select the top
quota, then union the strata. Everything is deterministic: rounding ties
break lexicographically, ranking ties break on post id, and backfill
walks strata round-robin in spec order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import EmptySampleError, EmptyStratumError, ValidationError
from .schemas import EnrichedPost


@dataclass(frozen=True)
class PreFilter:
    """Declarative filters applied before any stratum is formed."""

    city: Optional[str] = None
    subevent_only: bool = False

    def apply(self, posts: Sequence[EnrichedPost]) -> list[EnrichedPost]:
        kept = list(posts)
        if self.subevent_only and self.city is not None:
            kept = filter_city_subevents(kept, self.city)
        elif self.subevent_only:
            kept = [p for p in kept if p.argmax("sub_event") == "subevent_post"]
        elif self.city is not None:
            city = self.city
            kept = [p for p in kept if any(m.contains_place(city) for m in p.locations)]
        return kept

    def to_dict(self) -> dict:
        return {"city": self.city, "subevent_only": self.subevent_only}


@dataclass(frozen=True)
class SamplingSpec:
    """Which dimensions and classes to represent, and how many posts."""

    dimensions: tuple[tuple[str, tuple[str, ...]], ...]
    target_size: int
    filters: Optional[PreFilter] = None
    cap_to_target: bool = True

    def __post_init__(self):
        object.__setattr__(
            self, "dimensions", tuple((d, tuple(classes)) for d, classes in self.dimensions)
        )
        if not self.dimensions:
            raise ValidationError("sampling spec needs at least one dimension")
        if self.target_size <= 0:
            raise ValidationError("target_size must be positive")
        for dim, classes in self.dimensions:
            if not classes:
                raise ValidationError(f"dimension {dim!r} has an empty class selection")

    def to_dict(self) -> dict:
        return {
            "dimensions": [{"dimension": d, "classes": list(cs)} for d, cs in self.dimensions],
            "target_size": self.target_size,
            "filters": self.filters.to_dict() if self.filters else None,
            "cap_to_target": self.cap_to_target,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SamplingSpec":
        filters = data.get("filters")
        return cls(
            dimensions=tuple((d["dimension"], tuple(d["classes"])) for d in data["dimensions"]),
            target_size=int(data["target_size"]),
            filters=PreFilter(**filters) if filters else None,
            cap_to_target=bool(data.get("cap_to_target", True)),
        )


@dataclass(frozen=True)
class Allocation:
    """Integer quotas per (dimension, class) with the rounding residuals."""

    quotas: Mapping[tuple[str, str], int]
    residuals: Mapping[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "quotas", dict(self.quotas))
        object.__setattr__(self, "residuals", dict(self.residuals))
        if any(q < 0 for q in self.quotas.values()):
            raise ValidationError("quotas must be non-negative")

    def quota(self, dimension: str, cls: str) -> int:
        return self.quotas.get((dimension, cls), 0)


@dataclass(frozen=True)
class Sample:
    """Ordered member ids with per-stratum provenance and unfilled quotas."""

    members: tuple[str, ...]
    provenance: Mapping[str, tuple[tuple[str, str, int], ...]]
    deficits: Mapping[tuple[str, str], int]
    spec: Optional[SamplingSpec] = None

    def __post_init__(self):
        object.__setattr__(self, "provenance", {k: tuple(v) for k, v in self.provenance.items()})
        object.__setattr__(self, "deficits", dict(self.deficits))
        if len(set(self.members)) != len(self.members):
            raise ValidationError("sample members contain duplicates")
        missing = [m for m in self.members if not self.provenance.get(m)]
        if missing:
            raise ValidationError(f"members without provenance: {missing}")

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict() if self.spec else None,
            "members": list(self.members),
            "provenance": {
                pid: [{"dimension": d, "class": c, "rank": r} for d, c, r in entries]
                for pid, entries in self.provenance.items()
            },
            "deficits": [
                {"dimension": d, "class": c, "unfilled": n} for (d, c), n in sorted(self.deficits.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Sample":
        return cls(
            members=tuple(data["members"]),
            provenance={
                pid: tuple((e["dimension"], e["class"], int(e["rank"])) for e in entries)
                for pid, entries in data["provenance"].items()
            },
            deficits={(e["dimension"], e["class"]): int(e["unfilled"]) for e in data["deficits"]},
            spec=SamplingSpec.from_dict(data["spec"]) if data.get("spec") else None,
        )


def class_frequencies(
    posts: Sequence[EnrichedPost], dimension: str, classes: Sequence[str]
) -> dict[str, float]:
    """Share of posts whose argmax lands in each selected class,
    renormalized over the selected class set."""
    selected = list(classes)
    counts = {cls: 0 for cls in selected}
    for post in posts:
        if dimension not in post.distributions:
            raise ValidationError(f"post {post.post.id!r} lacks a {dimension!r} distribution")
        unknown = set(selected) - set(post.distributions[dimension].probs)
        if unknown:
            raise ValidationError(f"classes {sorted(unknown)} not in the {dimension!r} schema")
        top = post.argmax(dimension)
        if top in counts:
            counts[top] += 1
    total = sum(counts.values())
    if total == 0:
        raise EmptyStratumError(f"no post argmax falls in {sorted(selected)} for dimension {dimension!r}")
    return {cls: counts[cls] / total for cls in selected}


def allocate(frequencies: Mapping[str, float], share: int, dimension: str = "") -> Allocation:
    """Largest-remainder rounding of frequency * share into integer quotas.

    Floors each product, then hands the remaining units out by descending
    fractional part, ties to the lexicographically smallest class id. The
    quotas always sum to exactly ``share``.
    """
    if share < 0:
        raise ValidationError("share must be non-negative")
    total = sum(frequencies.values())
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"frequencies sum to {total}, not 1")

    exact = {cls: freq * share for cls, freq in frequencies.items()}
    quotas = {cls: math.floor(v) for cls, v in exact.items()}
    residuals = {cls: exact[cls] - quotas[cls] for cls in exact}
    leftover = share - sum(quotas.values())
    for cls in sorted(residuals, key=lambda c: (-residuals[c], c))[:leftover]:
        quotas[cls] += 1
    return Allocation(
        quotas={(dimension, cls): q for cls, q in quotas.items()},
        residuals={(dimension, cls): r for cls, r in residuals.items()},
    )


@dataclass(frozen=True)
class StratumSelection:
    dimension: str
    cls: str
    selected: tuple[EnrichedPost, ...]
    deficit: int
    ranking: tuple[EnrichedPost, ...]


def rank_and_select(
    posts: Sequence[EnrichedPost], dimension: str, cls: str, quota: int
) -> StratumSelection:
    """Top-quota posts of the class by confidence, ties broken on post id.

    When fewer posts exist than the quota, all are selected and the
    shortfall is recorded as a deficit.
    """
    if quota < 0:
        raise ValidationError("quota must be non-negative")
    eligible = [p for p in posts if p.argmax(dimension) == cls]
    eligible.sort(key=lambda p: (-p.confidence(dimension, cls), p.post.id))
    selected = tuple(eligible[:quota])
    return StratumSelection(
        dimension=dimension,
        cls=cls,
        selected=selected,
        deficit=max(0, quota - len(selected)),
        ranking=tuple(eligible),
    )


def filter_city_subevents(posts: Sequence[EnrichedPost], city: str) -> list[EnrichedPost]:
    """Posts classified as sub-events that mention the city under analysis."""
    return [
        p
        for p in posts
        if p.argmax("sub_event") == "subevent_post"
        and any(m.contains_place(city) for m in p.locations)
    ]


def _dimension_shares(target: int, z: int) -> list[int]:
    base, remainder = divmod(target, z)
    return [base + (1 if i < remainder else 0) for i in range(z)]


def build_sample(posts: Sequence[EnrichedPost], spec: SamplingSpec) -> Sample:
    """Run the full selection: filter, allocate, rank, union, backfill.

    The target size is split evenly across dimensions (remainder to the
    earlier ones). Duplicate selections keep their first position and
    accumulate provenance. When deficits or deduplication leave the
    sample short, strata are drained round-robin from their next-ranked
    posts. With cap_to_target=False each dimension allocates the full
    target and the union is returned uncapped.
    """
    eligible = spec.filters.apply(posts) if spec.filters else list(posts)

    z = len(spec.dimensions)
    shares = (
        _dimension_shares(spec.target_size, z)
        if spec.cap_to_target
        else [spec.target_size] * z
    )

    strata: list[StratumSelection] = []
    deficits: dict[tuple[str, str], int] = {}
    any_nonempty = False
    for (dimension, classes), share in zip(spec.dimensions, shares):
        try:
            freqs = class_frequencies(eligible, dimension, classes)
            any_nonempty = True
        except EmptyStratumError:
            uniform = {cls: 1.0 / len(classes) for cls in classes}
            alloc = allocate(uniform, share, dimension)
            for cls in classes:
                quota = alloc.quota(dimension, cls)
                if quota:
                    deficits[(dimension, cls)] = quota
                strata.append(StratumSelection(dimension, cls, (), quota, ()))
            continue
        alloc = allocate(freqs, share, dimension)
        for cls in classes:
            selection = rank_and_select(eligible, dimension, cls, alloc.quota(dimension, cls))
            if selection.deficit:
                deficits[(dimension, cls)] = selection.deficit
            strata.append(selection)

    if not any_nonempty:
        raise EmptySampleError("every stratum of the sampling spec is empty")

    members: list[str] = []
    provenance: dict[str, list[tuple[str, str, int]]] = {}
    for stratum in strata:
        for rank, post in enumerate(stratum.selected, start=1):
            pid = post.post.id
            if pid not in provenance:
                members.append(pid)
                provenance[pid] = []
            provenance[pid].append((stratum.dimension, stratum.cls, rank))

    if spec.cap_to_target and len(members) < spec.target_size:
        cursors = [len(s.selected) for s in strata]
        progressed = True
        while len(members) < spec.target_size and progressed:
            progressed = False
            for idx, stratum in enumerate(strata):
                if len(members) >= spec.target_size:
                    break
                while cursors[idx] < len(stratum.ranking):
                    post = stratum.ranking[cursors[idx]]
                    cursors[idx] += 1
                    pid = post.post.id
                    if pid not in provenance:
                        members.append(pid)
                        provenance[pid] = [(stratum.dimension, stratum.cls, cursors[idx])]
                        progressed = True
                        break

    return Sample(
        members=tuple(members),
        provenance={pid: tuple(entries) for pid, entries in provenance.items()},
        deficits=deficits,
        spec=spec,
    )
