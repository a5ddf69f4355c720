"""Benchmark dataset generation: user profiles and distorted queries.

Profiles follow a constrained random assignment: users cycle through the
topic list (overflow users all land on the first topic), and a personality
type already present on the user's topic is excluded from the draw, so a
topic never repeats a type until all nine are consumed.

Each clear query is then degraded twice: an ambiguity injection (vague
reference, missing detail, colloquial terminology, or a mixed-in second
intent) and a tone rewrite whose style is a deterministic function of the
user's sensitivity pair. Both transforms go through a pluggable rewriter;
the template implementation is fully deterministic for CI, the LLM one
delegates to the gateway.
"""
from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass

from . import vocab
from .matching import ToolRegistry
from .seeding import derived_rng

USER_TYPE_RANGES: dict[str, tuple[tuple[int, int], tuple[int, int]]] = {
    "impulsive": ((9, 10), (2, 4)),
    "efficient": ((7, 9), (5, 7)),
    "meticulous": ((1, 4), (8, 10)),
    "technical": ((4, 6), (7, 9)),
    "analytical": ((5, 7), (9, 10)),
    "practical": ((4, 7), (4, 7)),
    "casual": ((3, 5), (3, 5)),
    "emergency": ((10, 10), (6, 8)),
    "high_pressure": ((9, 10), (9, 10)),
}

CATEGORY_OF = {
    "impulsive": "speed_first",
    "efficient": "speed_first",
    "meticulous": "accuracy_first",
    "technical": "accuracy_first",
    "analytical": "accuracy_first",
    "practical": "balanced",
    "casual": "balanced",
    "emergency": "special",
    "high_pressure": "special",
}

AMBIGUITY_KINDS = (
    "reference_ambiguity",
    "information_missing",
    "terminology_inaccuracy",
    "multi_intent_mixing",
)

TONES = (
    "frustrated_angry",
    "demanding_urgent",
    "methodical_obsessive",
    "casual_indifferent",
)

# accuracy-leaning categories write richer, more verifiable requests
COMPLEXITY_BY_CATEGORY = {
    "speed_first": 1,
    "balanced": 2,
    "special": 2,
    "accuracy_first": 3,
}

TYPE_BLURBS = {
    "impulsive": "wants an answer immediately and rarely rechecks anything",
    "efficient": "keeps things moving quickly but still expects sensible results",
    "meticulous": "happily waits a long time as long as every result is airtight",
    "technical": "asks for precise details and tolerates a moderate wait",
    "analytical": "wants evidence and cross-checked numbers before acting",
    "practical": "weighs speed against correctness depending on the task",
    "casual": "is laid back about both waiting and exactness",
    "emergency": "is in a critical hurry yet still needs dependable answers",
    "high_pressure": "demands instant turnaround and flawless results at once",
}


class TopicCapacityError(Exception):
    """A topic ran out of unused personality types."""


class RewriteError(Exception):
    """A rewriter failed while transforming a specific query."""


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    w1: int
    w2: int
    user_type: str
    category: str
    topic_id: int
    description: str

    def __post_init__(self) -> None:
        ranges = USER_TYPE_RANGES.get(self.user_type)
        if ranges is None:
            raise ValueError(f"unknown user_type {self.user_type!r}")
        (w1_lo, w1_hi), (w2_lo, w2_hi) = ranges
        if not (w1_lo <= self.w1 <= w1_hi and w2_lo <= self.w2 <= w2_hi):
            raise ValueError(
                f"({self.w1}, {self.w2}) outside the {self.user_type} range "
                f"w1 {w1_lo}-{w1_hi} / w2 {w2_lo}-{w2_hi}"
            )
        if CATEGORY_OF[self.user_type] != self.category:
            raise ValueError(
                f"{self.user_type} belongs to {CATEGORY_OF[self.user_type]}, "
                f"not {self.category}"
            )


@dataclass(frozen=True)
class QueryRecord:
    query_id: str
    user_id: str
    topic: str
    clear_text: str
    ambiguous_text: str = ""
    final_text: str = ""
    ambiguity_type: str = ""
    tone: str = ""
    emotional_intensity: float = 0.5
    ground_truth_tool: str = ""
    complexity: int = 1

    def __post_init__(self) -> None:
        if self.emotional_intensity < 0.5:
            raise ValueError(
                f"emotional_intensity must be >= 0.5, got {self.emotional_intensity}"
            )

    @property
    def routed_text(self) -> str:
        """The most-transformed text available; what policies actually see."""
        return self.final_text or self.ambiguous_text or self.clear_text


def category_midpoint(category: str) -> tuple[float, float]:
    """Mean of the member types' rectangle midpoints, on the 1-10 scale."""
    members = [t for t, c in CATEGORY_OF.items() if c == category]
    if not members:
        raise ValueError(f"unknown category {category!r}")
    mids = [
        ((lo1 + hi1) / 2.0, (lo2 + hi2) / 2.0)
        for (lo1, hi1), (lo2, hi2) in (USER_TYPE_RANGES[t] for t in members)
    ]
    return (
        sum(m[0] for m in mids) / len(mids),
        sum(m[1] for m in mids) / len(mids),
    )


def generate_profiles(n: int, topics: list[str], seed: object) -> list[UserProfile]:
    """Constrained random profile generation over the topic cycle."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not topics:
        raise ValueError("topics must be non-empty")
    rng = derived_rng(seed, "profiles")
    used_types: dict[int, set[str]] = {}
    profiles = []
    for i in range(1, n + 1):
        topic_id = (i - 1) % len(topics)
        if i > len(topics):
            topic_id = 0  # overflow users pile onto the first topic
        available = sorted(set(USER_TYPE_RANGES) - used_types.get(topic_id, set()))
        if not available:
            raise TopicCapacityError(
                f"topic {topics[topic_id]!r} has no unused personality types "
                f"(at most {len(USER_TYPE_RANGES)} users per topic)"
            )
        user_type = rng.choice(available)
        used_types.setdefault(topic_id, set()).add(user_type)
        (w1_lo, w1_hi), (w2_lo, w2_hi) = USER_TYPE_RANGES[user_type]
        w1 = rng.randint(w1_lo, w1_hi)
        w2 = rng.randint(w2_lo, w2_hi)
        profiles.append(
            UserProfile(
                user_id=f"user_{i:03d}",
                w1=w1,
                w2=w2,
                user_type=user_type,
                category=CATEGORY_OF[user_type],
                topic_id=topic_id,
                description=(
                    f"{user_type} {topics[topic_id]} user who {TYPE_BLURBS[user_type]}"
                ),
            )
        )
    return profiles


def tone_for(w1: int, w2: int) -> str:
    """Quadrant map from the sensitivity pair to an emotional tone.

    A weight counts as high from 6 upward (7-10 are the declared high
    corners; 6 snaps up, 5 snaps down).
    """
    for name, value in (("w1", w1), ("w2", w2)):
        if not 1 <= value <= 10:
            raise ValueError(f"{name} must be in 1..10, got {value}")
    high1 = w1 >= 6
    high2 = w2 >= 6
    if high1 and high2:
        return "demanding_urgent"
    if high1:
        return "frustrated_angry"
    if high2:
        return "methodical_obsessive"
    return "casual_indifferent"


class TemplateRewriter:
    """Deterministic slot-filling rewriter; the CI-safe default.

    Clear queries are parameterized by the tool's function tokens (taken
    from its name), the topic's phrasing shape, and the profile's
    complexity level. Distortions are plain string transforms over the
    known slot vocabularies.
    """

    name = "template"

    def clear_query(
        self,
        profile: UserProfile,
        topic: str,
        tool_name: str,
        rng: random.Random,
    ) -> str:
        fn = " ".join(tool_name.split("_"))
        verb, place_shape, when_shape = vocab.QUERY_SHAPES.get(
            topic, ("find", "in {place}", "on {date}")
        )
        place = place_shape.format(place=rng.choice(vocab.place_values(topic)))
        when = when_shape.format(date=rng.choice(vocab.DATES))
        complexity = COMPLEXITY_BY_CATEGORY[profile.category]
        if complexity == 1:
            text = f"{verb} the {fn} {place}"
        elif complexity == 2:
            text = f"{verb} the {fn} {place} {when}"
        else:
            parts = tool_name.split("_")
            obj = parts[1] if len(parts) > 1 else parts[0]
            text = (
                f"{verb} the {fn} {place} {when}, "
                f"and double check the exact {obj} figures"
            )
        return text[0].upper() + text[1:] + "."

    def inject_ambiguity(self, text: str, kind: str, topic: str, rng: random.Random) -> str:
        if kind == "reference_ambiguity":
            return self._blur_place(text, topic)
        if kind == "information_missing":
            return self._drop_detail(text, topic)
        if kind == "terminology_inaccuracy":
            return self._misname_terms(text)
        if kind == "multi_intent_mixing":
            return self._mix_intent(text, topic, rng)
        raise ValueError(f"unknown ambiguity kind {kind!r}")

    def apply_tone(self, text: str, tone: str, intensity: float) -> str:
        bangs = "!" * (1 + round(intensity * 2))
        inner = text[0].lower() + text[1:]
        if tone == "frustrated_angry":
            return f"Ugh, {inner} This is beyond annoying{bangs}"
        if tone == "demanding_urgent":
            return f"Listen, I need this handled right away: {inner} No slip ups{bangs}"
        if tone == "methodical_obsessive":
            tail = " I mean every single one." if intensity >= 0.75 else ""
            return f"Please be thorough: {inner} Include all the specifics.{tail}"
        if tone == "casual_indifferent":
            tail = " or not, whatever." if intensity >= 0.75 else ""
            return f"Eh, whenever you get a chance: {inner} No rush at all.{tail}"
        raise ValueError(f"unknown tone {tone!r}")

    def _blur_place(self, text: str, topic: str) -> str:
        for value in vocab.place_values(topic):
            if value in text:
                return text.replace(value, "that same place as before", 1)
        return text + " You know where I mean."

    def _drop_detail(self, text: str, topic: str) -> str:
        _, place_shape, when_shape = vocab.QUERY_SHAPES.get(
            topic, ("find", "in {place}", "on {date}")
        )
        for date in vocab.DATES:
            clause = " " + when_shape.format(date=date)
            if clause in text:
                return text.replace(clause, "", 1)
        for value in vocab.place_values(topic):
            clause = " " + place_shape.format(place=value)
            if clause in text:
                return text.replace(clause, "", 1)
        return text + " Fill in the rest yourself."

    def _misname_terms(self, text: str) -> str:
        for term, slang in vocab.COLLOQUIAL.items():
            if term in text:
                out = text
                # sloppy phrasing swallows the jargon after the term too
                for variant in vocab.VARIANTS:
                    out = out.replace(f"{term} {variant}", slang)
                return out.replace(term, slang)
        return text + " or whatever it is called."

    def _mix_intent(self, text: str, topic: str, rng: random.Random) -> str:
        other_topics = [t for t in vocab.TOPICS if t != topic] or [topic]
        other = rng.choice(other_topics)
        _, aspect, obj, variant = rng.choice(vocab.tools_of_topic(other))
        extra = f", and also sort out {aspect} {obj} {variant}"
        if text.endswith("."):
            return text[:-1] + extra + "."
        return text + extra


class LlmRewriter:
    """Rewriter that asks the LLM gateway for every transform."""

    name = "llm"

    def __init__(self, gateway) -> None:
        self.gateway = gateway

    def _ask(self, instruction: str, payload: str) -> str:
        from .gateway import GenerationRequest

        response = self.gateway.generate(
            GenerationRequest(
                system_text="You rewrite short tool-use requests. Reply with the rewritten request only.",
                user_text=f"{instruction}\n\n{payload}",
                tag="rewrite",
            )
        )
        text = response.text.strip()
        if not text:
            raise RewriteError("rewriter returned empty text")
        return text

    def clear_query(self, profile, topic, tool_name, rng) -> str:
        fn = " ".join(tool_name.split("_"))
        return self._ask(
            f"Write one short, unambiguous request from a {profile.user_type} user "
            f"about {topic}, needing the function: {fn}.",
            fn,
        )

    def inject_ambiguity(self, text, kind, topic, rng) -> str:
        style = kind.replace("_", " ")
        return self._ask(
            f"Rewrite the request to exhibit {style} while keeping its core intent solvable.",
            text,
        )

    def apply_tone(self, text, tone, intensity) -> str:
        style = tone.replace("_", "/")
        return self._ask(
            f"Rewrite the request in a {style} tone at emotional intensity "
            f"{intensity:.2f} on a 0-1 scale.",
            text,
        )


def generate_clear_queries(
    profile: UserProfile,
    registry: ToolRegistry,
    per_user: int,
    rewriter,
    seed: object,
    topics: list[str] | None = None,
) -> list[QueryRecord]:
    """per_user clear queries for one profile, ground truth drawn per query."""
    topics = topics or registry.topics()
    topic = topics[profile.topic_id]
    tools = registry.tools_for_topic(topic)
    if not tools:
        raise ValueError(f"no tools registered for topic {topic!r}")
    records = []
    for j in range(per_user):
        rng = derived_rng(seed, "clear", profile.user_id, j)
        tool = rng.choice(tools)
        text = rewriter.clear_query(profile, topic, tool.name, rng)
        records.append(
            QueryRecord(
                query_id=f"{profile.user_id}_q{j:03d}",
                user_id=profile.user_id,
                topic=topic,
                clear_text=text,
                ground_truth_tool=tool.tool_id,
                complexity=COMPLEXITY_BY_CATEGORY[profile.category],
            )
        )
    return records


def inject_ambiguity(record: QueryRecord, kind: str, rewriter, seed: object) -> QueryRecord:
    """Degrade the clear text; the ground-truth tool never changes."""
    if not record.clear_text:
        raise ValueError(f"query {record.query_id} has no clear_text")
    if kind not in AMBIGUITY_KINDS:
        raise ValueError(f"unknown ambiguity kind {kind!r}")
    rng = derived_rng(seed, "amb", record.query_id)
    try:
        blurred = rewriter.inject_ambiguity(record.clear_text, kind, record.topic, rng)
    except Exception as exc:
        raise RewriteError(f"ambiguity rewrite failed for {record.query_id}: {exc}") from exc
    if blurred == record.clear_text:
        blurred = record.clear_text + " You know what I mean."
    return dataclasses.replace(record, ambiguous_text=blurred, ambiguity_type=kind)


def apply_tone(record: QueryRecord, profile: UserProfile, rewriter, seed: object) -> QueryRecord:
    """Layer the profile-derived emotional tone over the ambiguous text."""
    source = record.ambiguous_text
    if not source:
        raise ValueError(f"query {record.query_id} has no ambiguous_text yet")
    tone = tone_for(profile.w1, profile.w2)
    rng = derived_rng(seed, "tone", record.query_id)
    intensity = rng.uniform(0.5, 1.0)
    try:
        final = rewriter.apply_tone(source, tone, intensity)
    except Exception as exc:
        raise RewriteError(f"tone rewrite failed for {record.query_id}: {exc}") from exc
    return dataclasses.replace(
        record, final_text=final, tone=tone, emotional_intensity=intensity
    )


def build_dataset(
    registry: ToolRegistry,
    topics: list[str],
    n_users: int,
    per_user: int,
    seed: object,
    rewriter=None,
    ambiguity: bool = True,
    tone: bool = True,
) -> tuple[list[UserProfile], list[QueryRecord]]:
    """Full generation pipeline: profiles, clear queries, both distortions."""
    rewriter = rewriter or TemplateRewriter()
    profiles = generate_profiles(n_users, topics, seed)
    queries: list[QueryRecord] = []
    for profile in profiles:
        for record in generate_clear_queries(
            profile, registry, per_user, rewriter, seed, topics
        ):
            if ambiguity:
                kind_rng = derived_rng(seed, "kind", record.query_id)
                kind = kind_rng.choice(AMBIGUITY_KINDS)
                record = inject_ambiguity(record, kind, rewriter, seed)
            else:
                record = dataclasses.replace(record, ambiguous_text=record.clear_text)
            if tone:
                record = apply_tone(record, profile, rewriter, seed)
            else:
                record = dataclasses.replace(
                    record,
                    final_text=record.ambiguous_text,
                    tone=tone_for(profile.w1, profile.w2),
                )
            queries.append(record)
    return profiles, queries


def export_dataset(profiles: list[UserProfile], queries: list[QueryRecord], path) -> None:
    """Write the dataset as one JSON document with profiles and queries arrays."""
    payload = {
        "profiles": [dataclasses.asdict(p) for p in profiles],
        "queries": [dataclasses.asdict(q) for q in queries],
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write dataset to {path}: {exc}") from exc


def import_dataset(path) -> tuple[list[UserProfile], list[QueryRecord]]:
    """Read a dataset written by export_dataset."""
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read dataset from {path}: {exc}") from exc
    profiles = [UserProfile(**entry) for entry in payload["profiles"]]
    queries = [QueryRecord(**entry) for entry in payload["queries"]]
    return profiles, queries
