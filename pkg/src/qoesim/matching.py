"""Hierarchical semantic matching of queries to servers and tools.

Two-stage retrieval: rank server descriptions against the refined query
text, then rank tool descriptions inside each selected server against the
raw query, and merge the per-server winners into one candidate list.

Ranking uses BM25 (k1=1.2, b=0.75) with the non-negative IDF variant
idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)), so scores are always >= 0
and a query sharing no token with a document scores exactly 0.

All registries are immutable after construction; every operation here is
read-only and deterministic (ties broken by ascending id).
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")

BM25_K1 = 1.2
BM25_B = 0.75


class ConfigurationError(Exception):
    """Registry or retrieval parameters are unusable."""


@dataclass(frozen=True)
class ToolDescriptor:
    tool_id: str
    server_id: str
    name: str
    description: str

    def __post_init__(self) -> None:
        if not self.description:
            raise ValueError(f"tool {self.tool_id!r} has an empty description")


@dataclass(frozen=True)
class ServerDescriptor:
    server_id: str
    topic: str
    description: str
    tool_ids: tuple[str, ...]
    is_real: bool = False
    pattern_id: str = ""

    def __post_init__(self) -> None:
        if not self.tool_ids:
            raise ValueError(f"server {self.server_id!r} declares no tools")


@dataclass(frozen=True)
class RankedCandidate:
    tool_id: str
    server_id: str
    semantic_score: float
    rank: int


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric run; no stemming or stop words."""
    return [tok for tok in _TOKEN_SPLIT.split(text.lower()) if tok]


class Bm25Index:
    """Precomputed BM25 statistics over a fixed corpus of token lists."""

    def __init__(self, corpus: list[list[str]], k1: float = BM25_K1, b: float = BM25_B):
        if not corpus:
            raise ConfigurationError("BM25 corpus must be non-empty")
        self.k1 = k1
        self.b = b
        self.doc_count = len(corpus)
        self.doc_lengths = [len(doc) for doc in corpus]
        total = sum(self.doc_lengths)
        self.avgdl = total / self.doc_count if total else 0.0
        # term -> list of (doc index, term frequency)
        self.postings: dict[str, list[tuple[int, int]]] = {}
        for idx, doc in enumerate(corpus):
            for term, tf in Counter(doc).items():
                self.postings.setdefault(term, []).append((idx, tf))
        self.idf = {
            term: math.log(1.0 + (self.doc_count - len(plist) + 0.5) / (len(plist) + 0.5))
            for term, plist in self.postings.items()
        }

    def scores(self, query_tokens: list[str]) -> list[float]:
        """BM25 score of the query against every document, in corpus order."""
        out = [0.0] * self.doc_count
        for term in query_tokens:
            plist = self.postings.get(term)
            if plist is None:
                continue
            idf = self.idf[term]
            for idx, tf in plist:
                norm = self.k1 * (1.0 - self.b + self.b * self.doc_lengths[idx] / self.avgdl)
                out[idx] += idf * tf * (self.k1 + 1.0) / (tf + norm)
        return out


def bm25_scores(query_tokens: list[str], corpus: list[list[str]]) -> list[float]:
    """One-shot BM25 scoring; builds a throwaway index over the corpus."""
    return Bm25Index(corpus).scores(query_tokens)


class ToolRegistry:
    """Immutable universe of servers and tools, with prebuilt BM25 indexes."""

    def __init__(self, servers: list[ServerDescriptor], tools: list[ToolDescriptor]):
        self.servers: dict[str, ServerDescriptor] = {}
        for server in servers:
            if server.server_id in self.servers:
                raise ConfigurationError(f"duplicate server_id {server.server_id!r}")
            self.servers[server.server_id] = server
        self.tools: dict[str, ToolDescriptor] = {}
        for tool in tools:
            if tool.tool_id in self.tools:
                raise ConfigurationError(f"duplicate tool_id {tool.tool_id!r}")
            self.tools[tool.tool_id] = tool
        for server in servers:
            for tool_id in server.tool_ids:
                if tool_id not in self.tools:
                    raise ConfigurationError(
                        f"server {server.server_id!r} references unknown tool {tool_id!r}"
                    )
        # Canonical orders (ascending id) make every ranking permutation-
        # invariant to construction order.
        self.server_order = sorted(self.servers)
        self.tool_order = sorted(self.tools)
        self._server_index = Bm25Index(
            [tokenize(self.servers[sid].description) for sid in self.server_order]
        )
        self._tool_index_by_server: dict[str, tuple[list[str], Bm25Index]] = {}
        for sid in self.server_order:
            tool_ids = sorted(self.servers[sid].tool_ids)
            index = Bm25Index([tokenize(self.tools[tid].description) for tid in tool_ids])
            self._tool_index_by_server[sid] = (tool_ids, index)
        self._global_index = Bm25Index(
            [tokenize(self.tools[tid].description) for tid in self.tool_order]
        )

    def tools_for_topic(self, topic: str) -> list[ToolDescriptor]:
        out = []
        for sid in self.server_order:
            if self.servers[sid].topic == topic:
                out.extend(self.tools[tid] for tid in sorted(self.servers[sid].tool_ids))
        return out

    def servers_for_topic(self, topic: str) -> list[ServerDescriptor]:
        return [self.servers[sid] for sid in self.server_order if self.servers[sid].topic == topic]

    def topics(self) -> list[str]:
        seen: dict[str, None] = {}
        for sid in self.server_order:
            seen.setdefault(self.servers[sid].topic, None)
        return list(seen)

    def global_tool_scores(self, query_tokens: list[str]) -> list[tuple[str, float]]:
        """(tool_id, score) for every tool in the registry, canonical order."""
        scores = self._global_index.scores(query_tokens)
        return list(zip(self.tool_order, scores))

    def server_scores(self, query_tokens: list[str], server_ids: list[str] | None = None) -> list[tuple[str, float]]:
        scores = self._server_index.scores(query_tokens)
        pairs = list(zip(self.server_order, scores))
        if server_ids is not None:
            allowed = set(server_ids)
            pairs = [p for p in pairs if p[0] in allowed]
        return pairs

    def tool_scores_within(self, query_tokens: list[str], server_id: str) -> list[tuple[str, float]]:
        if server_id not in self._tool_index_by_server:
            raise KeyError(f"unknown server_id {server_id!r}")
        tool_ids, index = self._tool_index_by_server[server_id]
        return list(zip(tool_ids, index.scores(query_tokens)))


def top_k_servers(
    refined_text: str,
    registry: ToolRegistry,
    k: int,
    server_ids: list[str] | None = None,
) -> list[tuple[str, float]]:
    """The min(k, n) servers whose descriptions best match the refined text.

    Optionally restricted to ``server_ids``; ties broken by ascending id.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    pairs = registry.server_scores(tokenize(refined_text), server_ids)
    if not pairs:
        raise ConfigurationError("no servers to rank")
    pairs.sort(key=lambda p: (-p[1], p[0]))
    return pairs[:k]


def top_m_tools(raw_query: str, server_id: str, m: int, registry: ToolRegistry) -> list[tuple[str, float]]:
    """The min(m, tool count) tools of one server best matching the raw query."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    pairs = registry.tool_scores_within(tokenize(raw_query), server_id)
    pairs.sort(key=lambda p: (-p[1], p[0]))
    return pairs[:m]


def candidate_set(
    refined_text: str,
    raw_query: str,
    registry: ToolRegistry,
    k: int,
    m: int,
    server_ids: list[str] | None = None,
    use_refined_for_tools: bool = False,
) -> list[RankedCandidate]:
    """Union of the top-m tools of each top-k server, globally re-ranked.

    Stage one matches the refined text against server descriptions; stage
    two matches the raw query (or, for ablation, the refined text again)
    inside each selected server. Result size is at most k * m.
    """
    tool_query = refined_text if use_refined_for_tools else raw_query
    selected = top_k_servers(refined_text, registry, k, server_ids)
    merged: list[tuple[str, str, float]] = []
    for server_id, _ in selected:
        for tool_id, score in top_m_tools(tool_query, server_id, m, registry):
            merged.append((tool_id, server_id, score))
    merged.sort(key=lambda item: (-item[2], item[0]))
    return [
        RankedCandidate(tool_id=tid, server_id=sid, semantic_score=score, rank=pos + 1)
        for pos, (tid, sid, score) in enumerate(merged)
    ]
