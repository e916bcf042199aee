"""Stakeholder report generation and grounded chat.

Renders the versioned prompt templates, drives the generative gateway
under a token budget, parses bibliographic [n] markers back into post
references, and runs append-only chat sessions grounded in one report
and its input posts.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Mapping, Optional, Sequence

from .assets import load_prompt
from .corpus import Corpus, Post
from .errors import BudgetError, GatewayError, GenerationError, ProtocolError, ValidationError
from .gateways import ChatGateway
from .sampling import Sample
from .schemas import EnrichedPost

REPORT_KINDS = ("topics", "opinions", "city_subevents")
MODES = ("basic", "advanced")

INLINE_POSTS_TOKEN = "[post_1, ..., post_N]"
ATTACHMENT_HEADER = "Attached file (JSON-lines):"
SYSTEM_PROMPT = "You are a report writer supporting disaster response stakeholders."

_MARKER = re.compile(r"\[(\d+)\]")


def token_estimate(text: str) -> int:
    """Heuristic token count: one token per started 4 characters."""
    return (len(text) + 3) // 4


@dataclass(frozen=True)
class TokenBudget:
    context_cap: int = 128_000
    output_reserve: int = 16_384
    estimator: Callable[[str], int] = token_estimate

    def __post_init__(self):
        if not self.context_cap > self.output_reserve > 0:
            raise ValidationError("token budget requires context_cap > output_reserve > 0")

    @property
    def input_cap(self) -> int:
        return self.context_cap - self.output_reserve


@dataclass(frozen=True)
class ReportRequest:
    mode: str
    report_kind: str
    event: str
    area: str
    date_range: str
    word_limit: int
    city: Optional[str] = None
    stakeholders: tuple[str, ...] = ()

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.report_kind not in REPORT_KINDS:
            raise ValidationError(f"unknown report kind {self.report_kind!r}")
        if self.word_limit <= 0:
            raise ValidationError("word limit must be positive")
        if self.report_kind == "city_subevents" and not self.city:
            raise ValidationError("city_subevents reports require a city")
        object.__setattr__(self, "stakeholders", tuple(self.stakeholders))

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "report_kind": self.report_kind,
            "event": self.event,
            "area": self.area,
            "date_range": self.date_range,
            "word_limit": self.word_limit,
            "city": self.city,
            "stakeholders": list(self.stakeholders),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ReportRequest":
        return cls(
            mode=data["mode"],
            report_kind=data["report_kind"],
            event=data["event"],
            area=data["area"],
            date_range=data["date_range"],
            word_limit=int(data["word_limit"]),
            city=data.get("city"),
            stakeholders=tuple(data.get("stakeholders") or ()),
        )


@dataclass(frozen=True)
class Reference:
    marker: int
    post_id: str
    excerpt: str


@dataclass(frozen=True)
class Report:
    id: str
    request: ReportRequest
    body: str
    references: tuple[Reference, ...] = ()
    warnings: tuple[str, ...] = ()
    input_manifest: Mapping = field(default_factory=dict)
    created_at: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "request": self.request.to_dict(),
            "body": self.body,
            "references": [
                {"marker": r.marker, "post_id": r.post_id, "excerpt": r.excerpt} for r in self.references
            ],
            "warnings": list(self.warnings),
            "input_manifest": dict(self.input_manifest),
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Report":
        return cls(
            id=data["id"],
            request=ReportRequest.from_dict(data["request"]),
            body=data["body"],
            references=tuple(
                Reference(int(r["marker"]), r["post_id"], r["excerpt"]) for r in data["references"]
            ),
            warnings=tuple(data.get("warnings") or ()),
            input_manifest=dict(data.get("input_manifest") or {}),
            created_at=data.get("created_at", ""),
        )


def _inline_text(text: str) -> str:
    return " ".join(text.split())


def render_prompt(
    kind: str,
    params: Mapping[str, object],
    posts_inline: Optional[Sequence[str]] = None,
) -> str:
    """Substitute $E/$A/$D/$W/$C into the template for the report kind.

    With posts_inline the advanced variant is rendered and the inline
    marker is replaced by numbered post lines; otherwise the basic
    variant keeps its attached-file phrasing.
    """
    if kind not in REPORT_KINDS:
        raise ValidationError(f"unknown report kind {kind!r}")
    variant = "advanced" if posts_inline is not None else "basic"
    template = load_prompt(f"{kind}_{variant}").rstrip("\n")

    placeholders = {"$E": "event", "$A": "area", "$D": "date_range", "$W": "word_limit", "$C": "city"}
    rendered = template
    for token, param in placeholders.items():
        if token not in template:
            continue
        value = params.get(param)
        if value is None or value == "":
            raise ValidationError(f"missing value for placeholder {token}")
        rendered = rendered.replace(token, str(value))

    if posts_inline is not None:
        lines = "\n" + "\n".join(f"{i}. {_inline_text(text)}" for i, text in enumerate(posts_inline, start=1))
        rendered = rendered.replace(INLINE_POSTS_TOKEN, lines)
    return rendered


def _request_params(request: ReportRequest) -> dict:
    return {
        "event": request.event,
        "area": request.area,
        "date_range": request.date_range,
        "word_limit": request.word_limit,
        "city": request.city,
    }


def serialize_post_line(post: Post) -> str:
    """One attached-file line for basic mode: compact id + text JSON."""
    return json.dumps({"id": post.id, "text": post.text}, ensure_ascii=False)


def attach_references(body: str, candidates: Sequence[Post]) -> tuple[list[Reference], list[str]]:
    """Resolve [n] markers to the nth listed source post (1-based).

    Returns the references in first-occurrence order plus warnings for
    markers with no matching candidate.
    """
    references: list[Reference] = []
    warnings: list[str] = []
    seen: set[int] = set()
    for match in _MARKER.finditer(body):
        marker = int(match.group(1))
        if marker in seen:
            continue
        seen.add(marker)
        if 1 <= marker <= len(candidates):
            post = candidates[marker - 1]
            references.append(Reference(marker, post.id, _inline_text(post.text)[:80]))
        else:
            warnings.append(f"dangling reference [{marker}] has no source post")
    return references, warnings


def _hash_id(*parts: str) -> str:
    digest = hashlib.sha256("\x1f".join(parts).encode("utf-8")).hexdigest()
    return digest[:16]


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


def generate_report(
    request: ReportRequest,
    inputs: Corpus | tuple[Sample, Sequence[EnrichedPost]],
    gateway: ChatGateway,
    budget: TokenBudget = TokenBudget(),
    *,
    corpus_id: str = "",
    temperature: float = 0.0,
) -> Report:
    """Generate one report through the gateway.

    Basic mode streams posts in corpus order into the attached-file
    section until the input budget is exhausted and records how many
    were left out. Advanced mode inlines exactly the sample's posts.
    """
    estimate = budget.estimator

    if request.mode == "basic":
        if not isinstance(inputs, Corpus):
            raise ValidationError("basic mode expects a Corpus input")
        prompt = render_prompt(request.report_kind, _request_params(request))
        overhead = estimate(prompt) + estimate(ATTACHMENT_HEADER)
        if overhead > budget.input_cap:
            raise BudgetError(
                f"prompt needs {overhead} tokens, over the input budget of {budget.input_cap}"
            )
        lines: list[str] = []
        included: list[Post] = []
        used = overhead
        for post in inputs.posts:
            line = serialize_post_line(post)
            cost = estimate(line)
            if used + cost > budget.input_cap:
                break
            lines.append(line)
            included.append(post)
            used += cost
        truncated = len(inputs.posts) - len(included)
        content = prompt + "\n\n" + ATTACHMENT_HEADER + "\n" + "\n".join(lines)
        candidates: Sequence[Post] = included
        manifest = {
            "mode": "basic",
            "corpus_id": corpus_id or inputs.corpus_id,
            "included": len(included),
            "truncated": truncated,
        }
    else:
        if not (isinstance(inputs, tuple) and len(inputs) == 2):
            raise ValidationError("advanced mode expects (Sample, enriched posts)")
        sample, enriched = inputs
        if not sample.members:
            raise ValidationError("advanced mode requires a non-empty sample")
        by_id = {e.post.id: e.post for e in enriched}
        missing = [pid for pid in sample.members if pid not in by_id]
        if missing:
            raise ValidationError(f"sample members missing from the post set: {missing[:5]}")
        posts = [by_id[pid] for pid in sample.members]
        content = render_prompt(
            request.report_kind, _request_params(request), posts_inline=[p.text for p in posts]
        )
        if estimate(content) > budget.input_cap:
            raise BudgetError(
                f"prompt needs {estimate(content)} tokens, over the input budget of {budget.input_cap}"
            )
        candidates = posts
        manifest = {
            "mode": "advanced",
            "corpus_id": corpus_id,
            "post_ids": list(sample.members),
        }

    manifest["prompt_hash"] = _hash_id(content)
    messages = [
        {"role": "system", "content": SYSTEM_PROMPT},
        {"role": "user", "content": content},
    ]
    try:
        body = gateway.complete(messages, max_tokens=budget.output_reserve, temperature=temperature)
    except (GatewayError, ProtocolError) as exc:
        raise GenerationError(f"report generation failed: {exc}") from exc

    references, warnings = attach_references(body, candidates)
    return Report(
        id=_hash_id(json.dumps(request.to_dict(), sort_keys=True), json.dumps(manifest, sort_keys=True)),
        request=request,
        body=body,
        references=tuple(references),
        warnings=tuple(warnings),
        input_manifest=manifest,
        created_at=_utcnow(),
    )


@dataclass
class ChatSession:
    """Grounded question-and-answer session over one report.

    Turns are append-only; the grounding text is fixed at creation.
    """

    id: str
    report_id: str
    grounding: str
    turns: list[tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "report_id": self.report_id,
            "grounding": self.grounding,
            "turns": [{"question": q, "answer": a} for q, a in self.turns],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ChatSession":
        return cls(
            id=data["id"],
            report_id=data["report_id"],
            grounding=data["grounding"],
            turns=[(t["question"], t["answer"]) for t in data["turns"]],
        )


def create_chat_session(report: Report, posts: Sequence[Post]) -> ChatSession:
    grounding = (
        load_prompt("chat_system").rstrip("\n")
        + "\n\nREPORT:\n"
        + report.body
        + "\n\nPOSTS:\n"
        + "\n".join(f"{i}. {_inline_text(p.text)}" for i, p in enumerate(posts, start=1))
    )
    return ChatSession(id=_hash_id(report.id, str(len(posts))), report_id=report.id, grounding=grounding)


def chat_turn(
    session: ChatSession,
    question: str,
    gateway: ChatGateway,
    budget: TokenBudget = TokenBudget(),
) -> str:
    """Ask one grounded question; history is trimmed oldest-first to fit.

    The session is only mutated after the gateway answers, so a failed
    turn leaves it unchanged.
    """
    estimate = budget.estimator
    fixed = estimate(session.grounding) + estimate(question)
    if fixed > budget.input_cap:
        raise BudgetError("grounding and question alone exceed the input budget")

    kept = list(session.turns)
    while kept and fixed + sum(estimate(q) + estimate(a) for q, a in kept) > budget.input_cap:
        kept.pop(0)

    messages = [{"role": "system", "content": session.grounding}]
    for q, a in kept:
        messages.append({"role": "user", "content": q})
        messages.append({"role": "assistant", "content": a})
    messages.append({"role": "user", "content": question})

    answer = gateway.complete(messages, max_tokens=budget.output_reserve)
    session.turns.append((question, answer))
    return answer
