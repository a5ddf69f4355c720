"""Routing policies and the long-term agent-side user profile.

Four policies share one decision shape:

  dir_rout      global BM25 argmax of the raw query over every tool
  pre_rout      predict the query's topic first, then match hierarchically
                inside that topic and take the top-ranked candidate
  jaunt_greedy  hierarchical candidates, then pure lowest-predicted-latency
  jaunt         hierarchical candidates, then a joint choice trading
                semantic fit against predicted waiting time using the
                agent's *estimated* user sensitivities

Policies only ever see the agent's estimated profile view; the user's true
sensitivities stay inside the harness. In mock mode every decision is a
deterministic rule; in live mode the joint choice renders a four-section
prompt, parses a `SELECTED: <tool_id>` reply, and falls back to the mock
rule when the reply is unusable.
"""
from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass

from . import trip
from .gateway import GatewayError, GenerationRequest
from .matching import ToolRegistry, candidate_set, tokenize
from .qoe import Outcome

POLICY_NAMES = ("dir_rout", "pre_rout", "jaunt_greedy", "jaunt")

OPPOSITE_CATEGORY = {
    "speed_first": "accuracy_first",
    "accuracy_first": "speed_first",
    "balanced": "special",
    "special": "balanced",
}

_SELECTED_RE = re.compile(r"SELECTED:\s*(\S+)")

ROUTE_PROMPT_TEMPLATE = """QUERY:
{query}

CANDIDATES:
{candidates}

USER PROFILE:
latency_sensitivity_1to10: {est_w1}
accuracy_preference_1to10: {est_w2}
notes: {notes}

INSTRUCTIONS:
Pick the single tool that best serves this user, trading semantic fit against expected waiting time.
Reply with exactly one line: SELECTED: <tool_id>"""


@dataclass(frozen=True)
class AgentProfileView:
    """The agent's current belief about one user, on the 1-10 scale."""

    user_id: str
    est_w1: float
    est_w2: float
    preference_notes: str = ""
    update_count: int = 0

    def __post_init__(self) -> None:
        for name in ("est_w1", "est_w2"):
            value = getattr(self, name)
            if not 1.0 <= value <= 10.0:
                raise ValueError(f"{name} must be in [1, 10], got {value}")


def warm_view(user_id: str, category: str) -> AgentProfileView:
    """Belief initialized at the midpoint of the user's declared category."""
    w1, w2 = trip.category_midpoint(category)
    return AgentProfileView(user_id=user_id, est_w1=w1, est_w2=w2,
                            preference_notes=f"assumed {category} user")


def cold_view(user_id: str) -> AgentProfileView:
    return AgentProfileView(user_id=user_id, est_w1=5.0, est_w2=5.0,
                            preference_notes="no interaction history")


def opposite_view(user_id: str, category: str) -> AgentProfileView:
    """Deliberately mismatched belief, for profile-update ablations."""
    return warm_view(user_id, OPPOSITE_CATEGORY[category])


@dataclass(frozen=True)
class CandidateView:
    """One routable candidate as the decision step sees it."""

    tool_id: str
    server_id: str
    semantic_score: float
    predicted_latency: float


@dataclass(frozen=True)
class RoutingContext:
    raw_query: str
    refined_text: str
    candidates: tuple[CandidateView, ...]
    profile_view: AgentProfileView
    l_th: float = 2.0

    def __post_init__(self) -> None:
        if not self.candidates:
            raise ValueError("RoutingContext requires at least one candidate")


@dataclass(frozen=True)
class RoutingDecision:
    selected_tool: str
    ranking: tuple[str, ...]
    rationale: str
    policy_name: str


class IntentModel:
    """Deterministic stand-in for the LLM's language understanding.

    Holds a token -> topic lexicon plus a colloquialism -> canonical-phrase
    map, and supports the two mock rules: query refinement (normalize
    colloquialisms, keep the dominant topic's content tokens) and naive
    topic prediction (bag-of-words vote over raw tokens).
    """

    def __init__(
        self,
        token_topics: dict[str, str],
        colloquial: dict[str, str] | None = None,
        topic_words: dict[str, str] | None = None,
        topic_order: list[str] | None = None,
    ):
        self.token_topics = dict(token_topics)
        # canonical term -> colloquial phrase, applied in reverse
        self.colloquial = dict(colloquial or {})
        self.topic_words = dict(topic_words or {})
        self.topic_order = list(topic_order or sorted({*token_topics.values()}))

    @classmethod
    def from_registry(cls, registry: ToolRegistry, colloquial: dict[str, str] | None = None,
                      topic_words: dict[str, str] | None = None) -> "IntentModel":
        """Derive the lexicon: tokens unique to a single topic's servers."""
        token_topics: dict[str, set[str]] = {}
        for server in registry.servers.values():
            for token in set(tokenize(server.description)):
                token_topics.setdefault(token, set()).add(server.topic)
        unique = {tok: next(iter(ts)) for tok, ts in token_topics.items() if len(ts) == 1}
        return cls(unique, colloquial, topic_words, registry.topics())

    def normalize(self, text: str) -> str:
        """Replace known colloquial phrases with their canonical terms."""
        lowered = text.lower()
        for term, phrase in sorted(self.colloquial.items(), key=lambda kv: -len(kv[1])):
            lowered = lowered.replace(phrase, term)
        return lowered

    def refine(self, raw_query: str) -> str:
        """Core-intent extraction: dominant topic's content tokens, in order."""
        tokens = tokenize(self.normalize(raw_query))
        hits = [(pos, tok) for pos, tok in enumerate(tokens) if tok in self.token_topics]
        if not hits:
            return raw_query
        counts: dict[str, int] = {}
        first_pos: dict[str, int] = {}
        for pos, tok in hits:
            topic = self.token_topics[tok]
            counts[topic] = counts.get(topic, 0) + 1
            first_pos.setdefault(topic, pos)
        # most votes wins; a tie goes to the topic mentioned first
        dominant = min(counts, key=lambda t: (-counts[t], first_pos[t]))
        kept: list[str] = []
        for _, tok in hits:
            if self.token_topics[tok] == dominant and tok not in kept:
                kept.append(tok)
        marker = self.topic_words.get(dominant)
        if marker and marker not in kept:
            kept.append(marker)
        return " ".join(kept)

    def predict_topic(self, raw_query: str) -> str | None:
        """Naive category guess: raw-token vote, ties broken by topic order."""
        votes: dict[str, int] = {}
        for tok in tokenize(raw_query):
            topic = self.token_topics.get(tok)
            if topic is not None:
                votes[topic] = votes.get(topic, 0) + 1
        if not votes:
            return None
        return min(votes, key=lambda t: (-votes[t], self.topic_order.index(t)))


def refine_query(raw_query: str, intent: IntentModel, gateway=None) -> str:
    """Stage-1 rewrite of the raw query into a concise functional description."""
    if not raw_query:
        raise ValueError("raw_query must be non-empty")
    if gateway is None:
        return intent.refine(raw_query)
    try:
        response = gateway.generate(
            GenerationRequest(
                system_text=(
                    "Extract the essential tool function a request asks for. "
                    "Reply with a short keyword description only."
                ),
                user_text=raw_query,
                tag="refine",
            )
        )
        return response.text.strip() or raw_query
    except GatewayError:
        return raw_query


def dir_rout(raw_query: str, registry: ToolRegistry) -> RoutingDecision:
    """Flat BM25 argmax of the raw query over every tool description."""
    scored = registry.global_tool_scores(tokenize(raw_query))
    if not scored:
        raise ValueError("registry has no tools")
    ordered = sorted(scored, key=lambda p: (-p[1], p[0]))
    return RoutingDecision(
        selected_tool=ordered[0][0],
        ranking=tuple(tid for tid, _ in ordered),
        rationale=f"global bm25 top score {ordered[0][1]:.4f}",
        policy_name="dir_rout",
    )


def pre_rout(
    raw_query: str,
    registry: ToolRegistry,
    intent: IntentModel,
    k: int,
    m: int,
    gateway=None,
) -> RoutingDecision:
    """Predict the topic first, then match hierarchically inside it."""
    topic: str | None
    note = ""
    if gateway is None:
        topic = intent.predict_topic(raw_query)
    else:
        try:
            response = gateway.generate(
                GenerationRequest(
                    system_text=(
                        "Classify a request into one of these categories: "
                        + ", ".join(intent.topic_order)
                        + ". Reply with the category name only."
                    ),
                    user_text=raw_query,
                    tag="refine",
                )
            )
            topic = response.text.strip().lower()
        except GatewayError as exc:
            topic = None
            note = f"gateway error: {exc}"
    if topic not in intent.topic_order:
        fallback = dir_rout(raw_query, registry)
        reason = note or f"unusable category prediction {topic!r}"
        return dataclasses.replace(
            fallback,
            policy_name="pre_rout",
            rationale=f"fallback=dir_rout ({reason})",
        )
    server_ids = [s.server_id for s in registry.servers_for_topic(topic)]
    candidates = candidate_set(raw_query, raw_query, registry, k, m, server_ids=server_ids)
    return RoutingDecision(
        selected_tool=candidates[0].tool_id,
        ranking=tuple(c.tool_id for c in candidates),
        rationale=f"category={topic}, top candidate of {len(candidates)}",
        policy_name="pre_rout",
    )


def jaunt_greedy(context: RoutingContext) -> RoutingDecision:
    """Lowest predicted latency wins; ties prefer the better semantic match."""
    ordered = sorted(
        context.candidates,
        key=lambda c: (c.predicted_latency, -c.semantic_score, c.tool_id),
    )
    best = ordered[0]
    return RoutingDecision(
        selected_tool=best.tool_id,
        ranking=tuple(c.tool_id for c in ordered),
        rationale=f"lowest predicted latency {best.predicted_latency:.3f}s",
        policy_name="jaunt_greedy",
    )


def _normalized_scores(candidates: tuple[CandidateView, ...]) -> list[float]:
    scores = [c.semantic_score for c in candidates]
    lo, hi = min(scores), max(scores)
    if hi - lo <= 0.0:
        return [1.0] * len(scores)
    return [(s - lo) / (hi - lo) for s in scores]


def joint_score(est_w1: float, est_w2: float, s_norm: float, predicted_latency: float, l_th: float) -> float:
    """The transparent joint rule: est_w2 * s_norm - est_w1 * ln(1 + L/l_th)."""
    return est_w2 * s_norm - est_w1 * math.log1p(predicted_latency / l_th)


def joint_scores(context: RoutingContext) -> list[tuple[str, float]]:
    view = context.profile_view
    norm = _normalized_scores(context.candidates)
    return [
        (c.tool_id, joint_score(view.est_w1, view.est_w2, s, c.predicted_latency, context.l_th))
        for c, s in zip(context.candidates, norm)
    ]


def _mock_joint_decision(context: RoutingContext, note: str = "") -> RoutingDecision:
    scored = joint_scores(context)
    ordered = sorted(scored, key=lambda p: (-p[1], p[0]))
    rationale = f"joint score {ordered[0][1]:.4f}"
    if note:
        rationale = f"{note}; {rationale}"
    return RoutingDecision(
        selected_tool=ordered[0][0],
        ranking=tuple(tid for tid, _ in ordered),
        rationale=rationale,
        policy_name="jaunt",
    )


def render_route_prompt(context: RoutingContext, registry: ToolRegistry | None = None) -> str:
    lines = []
    for c in context.candidates:
        description = ""
        if registry is not None and c.tool_id in registry.tools:
            description = registry.tools[c.tool_id].description
        lines.append(
            f"{c.tool_id} | {description} | semantic_score={c.semantic_score:.6f} "
            f"| predicted_latency_s={c.predicted_latency:.6f}"
        )
    view = context.profile_view
    return ROUTE_PROMPT_TEMPLATE.format(
        query=context.raw_query,
        candidates="\n".join(lines),
        est_w1=f"{view.est_w1:.2f}",
        est_w2=f"{view.est_w2:.2f}",
        notes=view.preference_notes or "none",
    )


def parse_route_reply(text: str, candidate_ids: set[str]) -> str | None:
    """Accept only `SELECTED: <id>` answers naming a real candidate."""
    matches = _SELECTED_RE.findall(text)
    for token in reversed(matches):
        if token in candidate_ids:
            return token
    return None


def jaunt_decide(context: RoutingContext, gateway=None, registry: ToolRegistry | None = None) -> RoutingDecision:
    """Joint QoE-aware choice; LLM-driven when a gateway is supplied."""
    if gateway is None:
        return _mock_joint_decision(context)
    prompt = render_route_prompt(context, registry)
    candidate_ids = {c.tool_id for c in context.candidates}
    request = GenerationRequest(
        system_text="You route user requests to networked tools to maximize their experience.",
        user_text=prompt,
        tag="route",
    )
    for attempt in range(2):
        try:
            reply = gateway.generate(request)
        except GatewayError as exc:
            return _mock_joint_decision(context, note=f"fallback=rule (gateway: {exc})")
        choice = parse_route_reply(reply.text, candidate_ids)
        if choice is not None:
            ordered = sorted(
                (c.tool_id for c in context.candidates), key=lambda t: (t != choice, t)
            )
            return RoutingDecision(
                selected_tool=choice,
                ranking=tuple(ordered),
                rationale=f"llm pick on attempt {attempt + 1}",
                policy_name="jaunt",
            )
    return _mock_joint_decision(context, note="fallback=rule (unparseable reply)")


def _clamp(value: float) -> float:
    return min(10.0, max(1.0, value))


def _toward(value: float, target: float, step: float) -> float:
    if value > target:
        return max(target, value - step)
    if value < target:
        return min(target, value + step)
    return value


def update_profile(
    view: AgentProfileView,
    query: trip.QueryRecord,
    outcome: Outcome,
    realized_qoe: float,
    gateway=None,
    delta: float = 0.5,
) -> AgentProfileView:
    """Fold one interaction's tone and result into the belief.

    The rule path nudges the latency estimate up on impatient tones, the
    accuracy estimate up on exacting tones, decays both toward neutral on
    indifferent ones, and reinforces the accuracy estimate when a failure
    hits an accuracy-leaning user. The LLM path proposes bounded numeric
    adjustments and fresh notes; any failure degrades to the rule path.
    """
    if gateway is not None:
        try:
            return _llm_update(view, query, outcome, realized_qoe, gateway)
        except (GatewayError, ValueError):
            pass
    w1, w2 = view.est_w1, view.est_w2
    if query.tone in ("frustrated_angry", "demanding_urgent"):
        w1 = _clamp(w1 + delta)
    if query.tone in ("methodical_obsessive", "demanding_urgent"):
        w2 = _clamp(w2 + delta)
    if query.tone == "casual_indifferent":
        w1 = _toward(w1, 5.0, delta)
        w2 = _toward(w2, 5.0, delta)
    if not outcome.success and view.est_w2 > view.est_w1:
        w2 = _clamp(w2 + delta)
    return dataclasses.replace(
        view, est_w1=w1, est_w2=w2, update_count=view.update_count + 1
    )


def _llm_update(
    view: AgentProfileView,
    query: trip.QueryRecord,
    outcome: Outcome,
    realized_qoe: float,
    gateway,
) -> AgentProfileView:
    prompt = (
        f"Current belief: latency_sensitivity={view.est_w1:.2f}, "
        f"accuracy_preference={view.est_w2:.2f}, notes={view.preference_notes!r}.\n"
        f"Latest query tone: {query.tone or 'unknown'} "
        f"(intensity {query.emotional_intensity:.2f}).\n"
        f"Result: {'success' if outcome.success else 'failure'} "
        f"after {outcome.latency:.2f}s, experienced quality {realized_qoe:.2f}.\n"
        "Reply with three lines:\n"
        "W1_ADJUST: <number between -1 and 1>\n"
        "W2_ADJUST: <number between -1 and 1>\n"
        "NOTES: <one-line refreshed preference summary>"
    )
    response = gateway.generate(
        GenerationRequest(
            system_text="You maintain long-term user preference profiles for a tool router.",
            user_text=prompt,
            tag="profile_update",
        )
    )
    adjust = {"W1_ADJUST": 0.0, "W2_ADJUST": 0.0}
    notes = view.preference_notes
    for line in response.text.splitlines():
        key, _, value = line.partition(":")
        key = key.strip().upper()
        if key in adjust:
            adjust[key] = max(-1.0, min(1.0, float(value.strip())))
        elif key == "NOTES" and value.strip():
            notes = value.strip()
    return dataclasses.replace(
        view,
        est_w1=_clamp(view.est_w1 + adjust["W1_ADJUST"]),
        est_w2=_clamp(view.est_w2 + adjust["W2_ADJUST"]),
        preference_notes=notes,
        update_count=view.update_count + 1,
    )
