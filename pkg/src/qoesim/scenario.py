"""Scenario configuration: loading, validation, and the bundled defaults.

A scenario file is one JSON document holding the routable universe
(servers, tools, latency patterns), retrieval and predictor parameters,
the failure model, per-topic QoE parameters, dataset generation settings,
and the experiment matrix (policies x seeds). Validation collects every
referential-integrity violation with its JSON path before giving up.

Two default scenarios are bundled, both 5 topics x 7 servers x 3 tools:

  random  five distinct latency patterns cycled across each topic's servers
  smooth  one pattern per server: topic baseline times a fixed multiplier
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from . import vocab
from .matching import ServerDescriptor, ToolDescriptor, ToolRegistry
from .netsim import DEFAULT_STABILITY, FailureModel, LatencyPattern, ToolBinding
from .seeding import derived_rng

SERVER_ORDINALS = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf"]
RANDOM_KIND_CYCLE = [
    "good_to_bad_jitter",
    "bad_to_good_stable",
    "stable_fluctuating",
    "stable_high",
    "stable_normal",
]
SMOOTH_FACTORS = [0.8, 1.0, 1.2, 1.5, 2.0]
TOPIC_BASE_LATENCY = {
    "accommodation": 0.45,
    "healthcare": 0.5,
    "flight": 0.55,
    "desktop": 0.35,
    "weather": 0.4,
}
PROFILE_INITS = ("warm", "cold", "opposite")
BACKENDS = ("mock", "http")


class ScenarioValidationError(Exception):
    """One or more validation failures; each message carries its JSON path."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("scenario validation failed:\n" + "\n".join(self.errors))


@dataclass(frozen=True)
class TopicParams:
    base_latency_s: float
    l_th_s: float = 2.0
    q_max: float = 1.0


@dataclass
class DatasetParams:
    n_users: int = 9
    queries_per_user: int = 100
    seed: int = 1
    ambiguity: bool = True
    tone: bool = True


@dataclass
class ScenarioConfig:
    name: str
    topics: list[str]
    topic_params: dict[str, TopicParams]
    registry: ToolRegistry
    patterns: dict[str, LatencyPattern]
    pattern_stability: dict[str, float]
    bindings: dict[str, ToolBinding]
    k: int = 3
    m: int = 3
    use_refined_for_tools: bool = False
    ewma_alpha: float = 0.3
    ewma_window: int = 10
    failure: FailureModel = field(default_factory=FailureModel)
    policies: list[str] = field(default_factory=lambda: ["dir_rout", "pre_rout", "jaunt_greedy", "jaunt"])
    seeds: list[int] = field(default_factory=lambda: [101, 102, 103, 104, 105])
    dataset: DatasetParams = field(default_factory=DatasetParams)
    backend: str = "mock"
    profile_update: bool = True
    profile_update_every: int = 1
    profile_init: str = "warm"
    horizon: int | None = None

    def effective_horizon(self) -> int:
        if self.horizon is not None:
            return self.horizon
        return self.dataset.n_users * self.dataset.queries_per_user

    def topic_of_tool(self, tool_id: str) -> str:
        return self.registry.servers[self.registry.tools[tool_id].server_id].topic


def _tool_entries(topic: str, server_id: str, group: int) -> list[dict]:
    word = vocab.TOPIC_WORD[topic]
    entries = []
    assignments = vocab.tools_of_topic(topic)
    for slot in range(3):
        _, aspect, obj, variant = assignments[3 * group + slot]
        entries.append(
            {
                "tool_id": f"{server_id}.{aspect}_{obj}",
                "server_id": server_id,
                "name": f"{aspect}_{obj}_{variant}",
                "description": f"{aspect} {obj} {variant} lookup for {word} requests",
                "exec_median_s": round(0.1 + 0.1 * slot, 3),
                "exec_sigma": 0.25,
            }
        )
    return entries


def _pattern_entry(variant: str, topic: str, ordinal: int, rng) -> dict:
    base = TOPIC_BASE_LATENCY.get(topic, 1.0)
    if variant == "smooth":
        scale = rng.choice(SMOOTH_FACTORS)
        return {
            "pattern_id": f"{topic}_{SERVER_ORDINALS[ordinal]}.smooth",
            "kind": "smooth_scaled",
            "base_latency": base,
            "scale": scale,
            "variance": round((0.03 * base * scale) ** 2, 9),
            "stability": DEFAULT_STABILITY["smooth_scaled"],
        }
    kind = RANDOM_KIND_CYCLE[ordinal % len(RANDOM_KIND_CYCLE)]
    entry = {
        "pattern_id": f"{topic}.{kind}.{ordinal}",
        "kind": kind,
        # stable_high carries its elevated level in base_latency directly
        "base_latency": 5.0 * base if kind == "stable_high" else base,
        "stability": DEFAULT_STABILITY[kind],
    }
    if kind == "good_to_bad_jitter":
        entry.update(variance=round((0.15 * base) ** 2, 9), growth=3.0)
    elif kind == "bad_to_good_stable":
        entry.update(
            variance=round((0.1 * base) ** 2, 9),
            transition_point=0.4,
            bad_factor=4.0,
            spike_prob=0.15,
            spike_scale=2.0,
        )
    elif kind == "stable_fluctuating":
        entry.update(
            variance=round((0.05 * base) ** 2, 9), amplitude=round(0.4 * base, 6), period=40.0
        )
    else:  # stable_high / stable_normal
        entry.update(variance=round((0.05 * base) ** 2, 9))
    return entry


def build_default_scenario(variant: str = "random") -> dict:
    """The bundled 35-server scenario as a JSON-ready dict."""
    if variant not in ("random", "smooth"):
        raise ValueError(f"variant must be 'random' or 'smooth', got {variant!r}")
    rng = derived_rng("default-scenario", variant, "factors")
    servers = []
    tools = []
    patterns = []
    real_quota = {topic: (2 if i < 2 else 1) for i, topic in enumerate(vocab.TOPICS)}
    for topic in vocab.TOPICS:
        word = vocab.TOPIC_WORD[topic]
        for ordinal in range(7):
            server_id = f"{topic}_{SERVER_ORDINALS[ordinal]}"
            pattern = _pattern_entry(variant, topic, ordinal, rng)
            patterns.append(pattern)
            entries = _tool_entries(topic, server_id, ordinal)
            tools.extend(entries)
            functions = ", ".join(
                " ".join(e["name"].split("_")) + " lookup" for e in entries
            )
            servers.append(
                {
                    "server_id": server_id,
                    "topic": topic,
                    "description": f"{word} data server {SERVER_ORDINALS[ordinal]}: {functions}",
                    "tool_ids": [e["tool_id"] for e in entries],
                    "is_real": ordinal < real_quota[topic],
                    "pattern_id": pattern["pattern_id"],
                }
            )
    return {
        "name": variant,
        "topics": list(vocab.TOPICS),
        "topic_params": {
            topic: {
                "base_latency_s": TOPIC_BASE_LATENCY[topic],
                "l_th_s": 2.0,
                "q_max": 1.0,
            }
            for topic in vocab.TOPICS
        },
        "patterns": patterns,
        "servers": servers,
        "tools": tools,
        "retrieval": {"k": 3, "m": 3, "use_refined_for_tools": False},
        "ewma": {"alpha": 0.3, "window": 10},
        "failure": {"timeout_s": 30.0, "tau_net_s": 60.0},
        "policies": ["dir_rout", "pre_rout", "jaunt_greedy", "jaunt"],
        "seeds": [101, 102, 103, 104, 105],
        "dataset": {
            "n_users": 9,
            "queries_per_user": 100,
            "seed": 1,
            "ambiguity": True,
            "tone": True,
        },
        "backend": "mock",
        "profile_update": True,
        "profile_update_every": 1,
        "profile_init": "warm",
        "horizon": None,
    }


def _validate_raw(raw: dict) -> list[str]:
    errors: list[str] = []
    topics = raw.get("topics") or []
    if not topics:
        errors.append("topics: must be a non-empty list")
    if len(set(topics)) != len(topics):
        errors.append("topics: names must be unique")
    topic_params = raw.get("topic_params") or {}
    for topic in topics:
        if topic not in topic_params:
            errors.append(f"topic_params.{topic}: missing")
    pattern_ids = set()
    for i, p in enumerate(raw.get("patterns") or []):
        pid = p.get("pattern_id")
        if not pid:
            errors.append(f"patterns[{i}].pattern_id: missing")
        elif pid in pattern_ids:
            errors.append(f"patterns[{i}].pattern_id: duplicate {pid!r}")
        else:
            pattern_ids.add(pid)
    tool_ids = set()
    tool_server: dict[str, str] = {}
    for i, t in enumerate(raw.get("tools") or []):
        tid = t.get("tool_id")
        if not tid:
            errors.append(f"tools[{i}].tool_id: missing")
            continue
        if tid in tool_ids:
            errors.append(f"tools[{i}].tool_id: duplicate {tid!r}")
        tool_ids.add(tid)
        tool_server[tid] = t.get("server_id", "")
    server_ids = set()
    servers = raw.get("servers") or []
    if not servers:
        errors.append("servers: must be a non-empty list")
    for i, s in enumerate(servers):
        sid = s.get("server_id")
        if not sid:
            errors.append(f"servers[{i}].server_id: missing")
            continue
        if sid in server_ids:
            errors.append(f"servers[{i}].server_id: duplicate {sid!r}")
        server_ids.add(sid)
        if s.get("topic") not in topics:
            errors.append(f"servers[{i}].topic: {s.get('topic')!r} not in topics")
        if s.get("pattern_id") not in pattern_ids:
            errors.append(
                f"servers[{i}].pattern_id: unknown pattern {s.get('pattern_id')!r}"
            )
        declared = s.get("tool_ids") or []
        if not declared:
            errors.append(f"servers[{i}].tool_ids: must be non-empty")
        for j, tid in enumerate(declared):
            if tid not in tool_ids:
                errors.append(f"servers[{i}].tool_ids[{j}]: unknown tool {tid!r}")
            elif tool_server[tid] != sid:
                errors.append(
                    f"servers[{i}].tool_ids[{j}]: tool {tid!r} belongs to "
                    f"server {tool_server[tid]!r}"
                )
    for i, t in enumerate(raw.get("tools") or []):
        if t.get("tool_id") and t.get("server_id") not in server_ids:
            errors.append(
                f"tools[{i}].server_id: tool {t['tool_id']!r} references "
                f"unknown server {t.get('server_id')!r}"
            )
    if not raw.get("policies"):
        errors.append("policies: must list at least one policy")
    else:
        from .routing import POLICY_NAMES

        for i, name in enumerate(raw["policies"]):
            if name not in POLICY_NAMES:
                errors.append(f"policies[{i}]: unknown policy {name!r}")
    if not raw.get("seeds"):
        errors.append("seeds: must list at least one seed")
    backend = raw.get("backend", "mock")
    if backend not in BACKENDS:
        errors.append(f"backend: must be one of {BACKENDS}, got {backend!r}")
    profile_init = raw.get("profile_init", "warm")
    if profile_init not in PROFILE_INITS:
        errors.append(f"profile_init: must be one of {PROFILE_INITS}, got {profile_init!r}")
    if int(raw.get("profile_update_every", 1)) < 1:
        errors.append("profile_update_every: must be >= 1")
    return errors


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    """Validate a raw scenario dict and assemble the runtime config."""
    errors = _validate_raw(raw)
    if errors:
        raise ScenarioValidationError(errors)
    patterns: dict[str, LatencyPattern] = {}
    stability: dict[str, float] = {}
    for entry in raw["patterns"]:
        entry = dict(entry)
        pid = entry.pop("pattern_id")
        stab = entry.pop("stability", None)
        try:
            patterns[pid] = LatencyPattern(**entry)
        except (TypeError, ValueError) as exc:
            raise ScenarioValidationError([f"patterns.{pid}: {exc}"]) from exc
        stability[pid] = stab if stab is not None else DEFAULT_STABILITY[patterns[pid].kind]
    tools = []
    exec_params: dict[str, tuple[float, float]] = {}
    for entry in raw["tools"]:
        tools.append(
            ToolDescriptor(
                tool_id=entry["tool_id"],
                server_id=entry["server_id"],
                name=entry.get("name", entry["tool_id"]),
                description=entry["description"],
            )
        )
        exec_params[entry["tool_id"]] = (
            float(entry.get("exec_median_s", 0.2)),
            float(entry.get("exec_sigma", 0.25)),
        )
    servers = [
        ServerDescriptor(
            server_id=entry["server_id"],
            topic=entry["topic"],
            description=entry["description"],
            tool_ids=tuple(entry["tool_ids"]),
            is_real=bool(entry.get("is_real", False)),
            pattern_id=entry["pattern_id"],
        )
        for entry in raw["servers"]
    ]
    registry = ToolRegistry(servers, tools)
    bindings = {}
    for server in servers:
        pattern = patterns[server.pattern_id]
        stab = stability[server.pattern_id]
        for tool_id in server.tool_ids:
            median, sigma = exec_params[tool_id]
            bindings[tool_id] = ToolBinding(
                tool_id=tool_id,
                server_id=server.server_id,
                pattern=pattern,
                stability=stab,
                exec_median_s=median,
                exec_sigma=sigma,
            )
    retrieval = raw.get("retrieval") or {}
    ewma = raw.get("ewma") or {}
    failure = raw.get("failure") or {}
    dataset = raw.get("dataset") or {}
    return ScenarioConfig(
        name=raw.get("name", "scenario"),
        topics=list(raw["topics"]),
        topic_params={
            topic: TopicParams(**params) for topic, params in raw["topic_params"].items()
        },
        registry=registry,
        patterns=patterns,
        pattern_stability=stability,
        bindings=bindings,
        k=int(retrieval.get("k", 3)),
        m=int(retrieval.get("m", 3)),
        use_refined_for_tools=bool(retrieval.get("use_refined_for_tools", False)),
        ewma_alpha=float(ewma.get("alpha", 0.3)),
        ewma_window=int(ewma.get("window", 10)),
        failure=FailureModel(
            timeout_s=float(failure.get("timeout_s", 30.0)),
            tau_net_s=float(failure.get("tau_net_s", 60.0)),
        ),
        policies=list(raw["policies"]),
        seeds=[int(s) for s in raw["seeds"]],
        dataset=DatasetParams(
            n_users=int(dataset.get("n_users", 9)),
            queries_per_user=int(dataset.get("queries_per_user", 100)),
            seed=int(dataset.get("seed", 7)),
            ambiguity=bool(dataset.get("ambiguity", True)),
            tone=bool(dataset.get("tone", True)),
        ),
        backend=raw.get("backend", "mock"),
        profile_update=bool(raw.get("profile_update", True)),
        profile_update_every=int(raw.get("profile_update_every", 1)),
        profile_init=raw.get("profile_init", "warm"),
        horizon=raw.get("horizon"),
    )


def load_scenario(path: str) -> ScenarioConfig:
    """Load a scenario from a JSON file, or a bundled one by name."""
    if path in ("random", "smooth"):
        text = resources.files("qoesim.data").joinpath(f"scenario_{path}.json").read_text()
        return scenario_from_dict(json.loads(text))
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ScenarioValidationError([f"cannot read {path}: {exc}"]) from exc
    except json.JSONDecodeError as exc:
        raise ScenarioValidationError([f"{path} is not valid JSON: {exc}"]) from exc
    return scenario_from_dict(raw)
