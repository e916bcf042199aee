"""Classification dimension schemas and per-post enrichment types."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .corpus import HUMAID_CLASSES, NON_SUBEVENT_POST, SUBEVENT_POST, Post
from .errors import ValidationError

PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class DimensionSchema:
    """One classification axis: an ordered class list or an entity extractor."""

    name: str
    classes: tuple[str, ...] = ()
    kind: str = "categorical"

    def __post_init__(self):
        if self.kind not in ("categorical", "entity"):
            raise ValidationError(f"schema {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "categorical":
            if len(set(self.classes)) < 2:
                raise ValidationError(f"schema {self.name!r}: categorical schemas need >= 2 distinct classes")
            if len(set(self.classes)) != len(self.classes):
                raise ValidationError(f"schema {self.name!r}: duplicate class ids")


CONTENT_TYPE = DimensionSchema("content_type", ("news", "opinion"))
SENTIMENT = DimensionSchema("sentiment", ("positive", "negative"))
EMOTION = DimensionSchema(
    "emotion",
    ("anger", "anticipation", "disgust", "fear", "joy", "sadness", "surprise", "trust"),
)
DISASTER_EVENT = DimensionSchema("disaster_event", HUMAID_CLASSES)
SUB_EVENT = DimensionSchema("sub_event", (SUBEVENT_POST, NON_SUBEVENT_POST))
STAKEHOLDER = DimensionSchema(
    "stakeholder",
    ("police", "ems", "firefighter", "media", "government_organization"),
)
LOCATION = DimensionSchema("location", (), kind="entity")

BUILTIN_SCHEMAS: dict[str, DimensionSchema] = {
    s.name: s
    for s in (CONTENT_TYPE, SENTIMENT, EMOTION, DISASTER_EVENT, SUB_EVENT, STAKEHOLDER, LOCATION)
}


def get_schema(name: str, extra: Optional[Mapping[str, DimensionSchema]] = None) -> DimensionSchema:
    if extra and name in extra:
        return extra[name]
    if name in BUILTIN_SCHEMAS:
        return BUILTIN_SCHEMAS[name]
    raise ValidationError(f"unknown dimension schema {name!r}")


@dataclass(frozen=True)
class ClassDistribution:
    """Normalized class probabilities for one post on one dimension."""

    dimension: str
    probs: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "probs", dict(self.probs))
        total = sum(self.probs.values())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"{self.dimension} distribution sums to {total}, not 1")
        for cls, p in self.probs.items():
            if p < 0 or p > 1 + PROB_SUM_TOL:
                raise ValidationError(f"{self.dimension} probability for {cls!r} out of [0, 1]: {p}")

    def validate_against(self, schema: DimensionSchema) -> None:
        if set(self.probs) != set(schema.classes):
            raise ValidationError(
                f"{self.dimension} distribution keys {sorted(self.probs)} "
                f"do not match schema classes {sorted(schema.classes)}"
            )

    def argmax(self) -> str:
        # ties broken toward the lexicographically smallest class id
        return min(self.probs, key=lambda cls: (-self.probs[cls], cls))

    def confidence(self, cls: str) -> float:
        return self.probs[cls]

    @staticmethod
    def from_scores(dimension: str, scores: Mapping[str, float]) -> "ClassDistribution":
        total = sum(scores.values())
        if total <= 0:
            raise ValidationError(f"{dimension}: scores must have a positive sum")
        return ClassDistribution(dimension, {cls: v / total for cls, v in scores.items()})

    @staticmethod
    def one_hot(dimension: str, cls: str, classes: Sequence[str]) -> "ClassDistribution":
        return ClassDistribution(dimension, {c: 1.0 if c == cls else 0.0 for c in classes})

    def to_dict(self) -> dict:
        return {"dimension": self.dimension, "probs": dict(self.probs)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ClassDistribution":
        return cls(data["dimension"], dict(data["probs"]))


@dataclass(frozen=True)
class LocationMention:
    """A matched place span with its resolved component chain.

    resolved holds (kind, name) pairs ordered most-specific first.
    """

    surface: str
    resolved: tuple[tuple[str, str], ...] = ()
    completeness: str = "surface_only"

    def __post_init__(self):
        if self.completeness not in ("full", "partial", "surface_only"):
            raise ValidationError(f"unknown completeness {self.completeness!r}")
        kinds = {kind for kind, _ in self.resolved}
        if self.completeness == "full" and not {"city", "country"} <= kinds:
            raise ValidationError("completeness 'full' requires both city and country components")

    def component(self, kind: str) -> Optional[str]:
        for k, name in self.resolved:
            if k == kind:
                return name
        return None

    def contains_place(self, name: str) -> bool:
        target = name.lower()
        return self.surface.lower() == target or any(n.lower() == target for _, n in self.resolved)

    def to_dict(self) -> dict:
        return {
            "surface": self.surface,
            "resolved": [[kind, name] for kind, name in self.resolved],
            "completeness": self.completeness,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "LocationMention":
        return cls(
            surface=data["surface"],
            resolved=tuple((kind, name) for kind, name in data["resolved"]),
            completeness=data["completeness"],
        )


@dataclass(frozen=True)
class EnrichedPost:
    """A post together with its per-dimension distributions and locations."""

    post: Post
    distributions: Mapping[str, ClassDistribution] = field(default_factory=dict)
    locations: tuple[LocationMention, ...] = ()
    topic_id: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "distributions", dict(self.distributions))
        object.__setattr__(self, "locations", tuple(self.locations))
        for dim, dist in self.distributions.items():
            if dist.dimension != dim:
                raise ValidationError(f"distribution for {dist.dimension!r} filed under {dim!r}")

    def argmax(self, dimension: str) -> str:
        return self.distributions[dimension].argmax()

    def confidence(self, dimension: str, cls: str) -> float:
        return self.distributions[dimension].confidence(cls)

    def to_dict(self) -> dict:
        return {
            "post": self.post.to_dict(),
            "distributions": {dim: dist.to_dict() for dim, dist in self.distributions.items()},
            "locations": [loc.to_dict() for loc in self.locations],
            "topic_id": self.topic_id,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "EnrichedPost":
        return cls(
            post=Post.from_dict(data["post"]),
            distributions={
                dim: ClassDistribution.from_dict(d) for dim, d in data["distributions"].items()
            },
            locations=tuple(LocationMention.from_dict(m) for m in data["locations"]),
            topic_id=data.get("topic_id"),
        )
