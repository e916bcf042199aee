"""Declarative pipeline configuration.

One JSON file describes the whole run: dataset location and mapping,
dimensions with their backends, gazetteer, topic sweep, sampling spec,
budgets, and gateway endpoints. String values may reference environment
variables as ``${VAR}``; unresolved references fail fast so credentials
are never silently empty.
"""

from __future__ import annotations

import json
import os
import re
from pathlib import Path
from typing import Optional

from .assets import load_lexicon
from .classify import (
    ClassifierBackend,
    GroundTruthBackend,
    InferenceEndpoint,
    LexiconBackend,
    RemoteClassifierBackend,
)
from .errors import ConfigurationError
from .gateways import (
    ChatGateway,
    EmbeddingGateway,
    HashingEmbedder,
    HttpChatGateway,
    HttpEmbeddingGateway,
    MockChatGateway,
)
from .gazetteer import Gazetteer
from .reportgen import TokenBudget
from .sampling import SamplingSpec

_ENV_REF = re.compile(r"\$\{([A-Z0-9_]+)\}")


def _expand_env(value):
    if isinstance(value, str):

        def sub(match: re.Match) -> str:
            name = match.group(1)
            if name not in os.environ:
                raise ConfigurationError(f"environment variable {name} referenced in config is not set")
            return os.environ[name]

        return _ENV_REF.sub(sub, value)
    if isinstance(value, list):
        return [_expand_env(v) for v in value]
    if isinstance(value, dict):
        return {k: _expand_env(v) for k, v in value.items()}
    return value


def load_config(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError("config root must be a JSON object")
    return _expand_env(raw)


def build_chat_gateway(config: dict, *, dry_run: bool = False) -> ChatGateway:
    section = config.get("chat_gateway") or {}
    if dry_run or section.get("kind", "mock") == "mock":
        return MockChatGateway()
    if section.get("kind") == "http":
        try:
            return HttpChatGateway(
                base_url=section["base_url"],
                model=section["model"],
                api_key=section.get("api_key"),
                timeout=float(section.get("timeout", 120.0)),
                max_retries=int(section.get("max_retries", 3)),
            )
        except KeyError as exc:
            raise ConfigurationError(f"chat_gateway config missing {exc}") from exc
    raise ConfigurationError(f"unknown chat_gateway kind {section.get('kind')!r}")


def build_embedding_gateway(config: dict, *, dry_run: bool = False) -> EmbeddingGateway:
    section = config.get("embedding_gateway") or {}
    kind = section.get("kind", "hashing")
    if dry_run or kind == "hashing":
        return HashingEmbedder(dim=int(section.get("dim", 256)))
    if kind == "http":
        try:
            return HttpEmbeddingGateway(base_url=section["base_url"])
        except KeyError as exc:
            raise ConfigurationError(f"embedding_gateway config missing {exc}") from exc
    raise ConfigurationError(f"unknown embedding_gateway kind {kind!r}")


def build_backend_registry(config: dict, base_dir: Path) -> dict[str, ClassifierBackend]:
    registry: dict[str, ClassifierBackend] = {}
    for entry in config.get("dimensions", []):
        name = entry.get("name")
        backend_kind = entry.get("backend", "ground-truth")
        if not name:
            raise ConfigurationError("dimension entry without a name")
        if name == "location":
            continue
        if backend_kind == "ground-truth":
            registry[name] = GroundTruthBackend()
        elif backend_kind == "lexicon":
            lexicon_ref = entry.get("lexicon", name)
            if lexicon_ref.endswith(".json"):
                lexicon = json.loads((base_dir / lexicon_ref).read_text(encoding="utf-8"))
            else:
                lexicon = load_lexicon(lexicon_ref)
            registry[name] = LexiconBackend(lexicon)
        elif backend_kind == "remote":
            try:
                registry[name] = RemoteClassifierBackend(InferenceEndpoint(url=entry["endpoint"]))
            except KeyError as exc:
                raise ConfigurationError(f"remote backend for {name!r} missing {exc}") from exc
        else:
            raise ConfigurationError(f"unknown backend kind {backend_kind!r} for dimension {name!r}")
    return registry


def dimension_names(config: dict) -> list[str]:
    return [entry["name"] for entry in config.get("dimensions", []) if entry.get("name")]


def build_gazetteer(config: dict, base_dir: Path) -> Optional[Gazetteer]:
    path = config.get("gazetteer")
    if not path:
        return None
    return Gazetteer.from_jsonl(base_dir / path)


def build_budget(config: dict) -> TokenBudget:
    section = config.get("budget") or {}
    return TokenBudget(
        context_cap=int(section.get("context_cap", 128_000)),
        output_reserve=int(section.get("output_reserve", 16_384)),
    )


def build_sampling_spec(config: dict, *, city: Optional[str] = None) -> SamplingSpec:
    section = config.get("sampling")
    if not section:
        raise ConfigurationError("config has no sampling section")
    spec = SamplingSpec.from_dict(section)
    if city and spec.filters and spec.filters.city is None and spec.filters.subevent_only:
        spec = SamplingSpec(
            dimensions=spec.dimensions,
            target_size=spec.target_size,
            filters=type(spec.filters)(city=city, subevent_only=True),
            cap_to_target=spec.cap_to_target,
        )
    return spec
