"""Experiment orchestration: episodes, aggregation, CSV emission.

An episode is one (policy, user, seed) replay of the user's query stream.
Users share a global clock, interleaved round-robin (user u's i-th query
runs at step u + i * n_users), and every latency trace and invocation draw
is keyed by (seed, entity, step) alone, so all policies face exactly the
same network trajectory and paired draws.

Per-server latency predictions are derived from passive monitoring: at
each step every server's realized network latency feeds that server's
EWMA state, and a tool's predicted latency is its server's forecast plus
the tool's configured execution median. Predictions are therefore policy
independent, which is what makes policy comparisons paired.

The user's true sensitivities are consumed only here, to score realized
QoE; policies receive nothing but the agent's estimated profile view.
"""
from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import routing, trip, vocab
from .matching import candidate_set
from .netsim import (
    ColdStartError,
    EwmaState,
    NetworkState,
    derived_rng,
    invoke,
    latency_trace,
)
from .qoe import Outcome, QoEParams, conditional_qoe
from .routing import AgentProfileView, CandidateView, IntentModel, RoutingContext
from .scenario import ScenarioConfig

MA_WINDOW = 10

EPISODE_COLUMNS = [
    "seed",
    "policy",
    "user_id",
    "query_id",
    "selected_tool",
    "ground_truth_tool",
    "success",
    "latency_s",
    "qoe",
    "timestamp_index",
]
AGGREGATE_COLUMNS = [
    "scenario",
    "policy",
    "user_id",
    "user_category",
    "mean_qoe",
    "accuracy",
    "mean_latency_s",
    "n_queries",
]
MOVING_AVERAGE_COLUMNS = [
    "scenario",
    "policy",
    "user_id",
    "user_category",
    "query_index",
    "ma_qoe",
]
TRACE_COLUMNS = ["time_index", "server_id", "latency_s"]


class EpisodeError(Exception):
    """An episode aborted; the message names the offending query."""


@dataclass(frozen=True)
class EpisodeResult:
    seed: int
    policy: str
    user_id: str
    query_id: str
    selected_tool: str
    ground_truth_tool: str
    success: bool
    latency_s: float
    qoe: float
    timestamp_index: int


@dataclass
class AggregateMetrics:
    # (policy, user_id) -> summary row and 10-query moving-average series
    rows: dict[tuple[str, str], dict] = field(default_factory=dict)
    moving_averages: dict[tuple[str, str], list[float]] = field(default_factory=dict)


class NetworkEnv:
    """Per-seed realized traces and the monitoring-based latency forecasts."""

    def __init__(self, config: ScenarioConfig, seed: int, horizon: int | None = None):
        self.seed = seed
        horizon = horizon if horizon is not None else config.effective_horizon()
        self.horizon = horizon
        self.traces: dict[str, list[float]] = {}
        self.predictions: dict[str, list[float]] = {}
        for server_id in config.registry.server_order:
            server = config.registry.servers[server_id]
            pattern = config.patterns[server.pattern_id]
            trace = latency_trace(pattern, horizon, seed, key=server_id)
            self.traces[server_id] = trace
            cold = config.topic_params[server.topic].base_latency_s
            state = EwmaState(alpha=config.ewma_alpha, window_size=config.ewma_window)
            preds = []
            for t in range(horizon):
                try:
                    preds.append(state.predict())
                except ColdStartError:
                    preds.append(cold)
                state.observe(trace[t])
            self.predictions[server_id] = preds

    def predicted_tool_latency(self, config: ScenarioConfig, tool_id: str, t: int) -> float:
        binding = config.bindings[tool_id]
        return self.predictions[binding.server_id][t] + binding.exec_median_s


def initial_view(config: ScenarioConfig, profile: trip.UserProfile) -> AgentProfileView:
    if config.profile_init == "cold":
        return routing.cold_view(profile.user_id)
    if config.profile_init == "opposite":
        return routing.opposite_view(profile.user_id, profile.category)
    return routing.warm_view(profile.user_id, profile.category)


def run_episode(
    config: ScenarioConfig,
    policy: str,
    user: trip.UserProfile,
    queries: list[trip.QueryRecord],
    seed: int,
    env: NetworkEnv,
    intent: IntentModel,
    gateway=None,
    time_base: int = 0,
    time_step: int = 1,
) -> list[EpisodeResult]:
    """Replay one user's queries under one policy on one seeded network."""
    if not queries:
        raise ValueError(f"user {user.user_id} has no queries")
    registry = config.registry
    topic = queries[0].topic
    params_topic = config.topic_params[topic]
    view = initial_view(config, user)
    results = []
    for i, query in enumerate(queries):
        t = time_base + i * time_step
        if t >= env.horizon:
            raise EpisodeError(f"query {query.query_id}: step {t} beyond horizon {env.horizon}")
        raw = query.routed_text
        try:
            if policy == "dir_rout":
                decision = routing.dir_rout(raw, registry)
            elif policy == "pre_rout":
                decision = routing.pre_rout(raw, registry, intent, config.k, config.m, gateway)
            elif policy in ("jaunt_greedy", "jaunt"):
                refined = routing.refine_query(raw, intent, gateway)
                ranked = candidate_set(
                    refined,
                    raw,
                    registry,
                    config.k,
                    config.m,
                    use_refined_for_tools=config.use_refined_for_tools,
                )
                views = tuple(
                    CandidateView(
                        tool_id=c.tool_id,
                        server_id=c.server_id,
                        semantic_score=c.semantic_score,
                        predicted_latency=env.predicted_tool_latency(config, c.tool_id, t),
                    )
                    for c in ranked
                )
                context = RoutingContext(
                    raw_query=raw,
                    refined_text=refined,
                    candidates=views,
                    profile_view=view,
                    l_th=params_topic.l_th_s,
                )
                if policy == "jaunt_greedy":
                    decision = routing.jaunt_greedy(context)
                else:
                    decision = routing.jaunt_decide(context, gateway, registry)
            else:
                raise ValueError(f"unknown policy {policy!r}")
        except Exception as exc:
            raise EpisodeError(f"query {query.query_id}: {exc}") from exc
        selected = decision.selected_tool
        binding = config.bindings[selected]
        snapshot = NetworkState(
            time_index=t,
            latency_s={selected: env.traces[binding.server_id][t]},
            stability={selected: binding.stability},
        )
        exec_outcome = invoke(
            selected, snapshot, binding, config.failure,
            derived_rng(seed, "invoke", selected, t),
        )
        routed_correctly = selected == query.ground_truth_tool
        outcome = Outcome(
            success=routed_correctly and exec_outcome.success,
            t_net=exec_outcome.t_net,
            t_tool=exec_outcome.t_tool,
        )
        qoe_params = QoEParams(
            w1=float(user.w1),
            w2=float(user.w2),
            q_max=params_topic.q_max,
            l_th=params_topic.l_th_s,
        )
        qoe = conditional_qoe(outcome, qoe_params)
        if config.profile_update and (i + 1) % config.profile_update_every == 0:
            view = routing.update_profile(view, query, outcome, qoe, gateway)
        results.append(
            EpisodeResult(
                seed=seed,
                policy=policy,
                user_id=user.user_id,
                query_id=query.query_id,
                selected_tool=selected,
                ground_truth_tool=query.ground_truth_tool,
                success=outcome.success,
                latency_s=outcome.latency,
                qoe=qoe,
                timestamp_index=t,
            )
        )
    return results


def build_intent_model(config: ScenarioConfig) -> IntentModel:
    return IntentModel.from_registry(
        config.registry, colloquial=vocab.COLLOQUIAL, topic_words=vocab.TOPIC_WORD
    )


def generate_dataset(config: ScenarioConfig, rewriter=None):
    return trip.build_dataset(
        config.registry,
        config.topics,
        config.dataset.n_users,
        config.dataset.queries_per_user,
        config.dataset.seed,
        rewriter=rewriter,
        ambiguity=config.dataset.ambiguity,
        tone=config.dataset.tone,
    )


def run_matrix(
    config: ScenarioConfig,
    gateway=None,
    parallel: bool = False,
    dataset=None,
) -> tuple[list[EpisodeResult], list[trip.UserProfile]]:
    """Run every (seed, policy, user) episode; rows in canonical order."""
    profiles, queries = dataset if dataset is not None else generate_dataset(config)
    by_user: dict[str, list[trip.QueryRecord]] = {}
    for record in queries:
        by_user.setdefault(record.user_id, []).append(record)
    intent = build_intent_model(config)
    n_users = len(profiles)
    # an externally supplied dataset may be longer than the configured one
    needed = n_users * max((len(qs) for qs in by_user.values()), default=0)
    horizon = max(config.effective_horizon(), needed)
    envs = {seed: NetworkEnv(config, seed, horizon=horizon) for seed in config.seeds}
    tasks = [
        (seed, policy, user)
        for seed in config.seeds
        for policy in config.policies
        for user in profiles
    ]

    def _run(task):
        seed, policy, user = task
        return run_episode(
            config,
            policy,
            user,
            by_user[user.user_id],
            seed,
            envs[seed],
            intent,
            gateway=gateway,
            time_base=profiles.index(user),
            time_step=n_users,
        )

    if parallel:
        with ThreadPoolExecutor(max_workers=min(8, len(tasks))) as pool:
            chunks = list(pool.map(_run, tasks))
    else:
        chunks = [_run(task) for task in tasks]
    results: list[EpisodeResult] = []
    for chunk in chunks:
        results.extend(chunk)
    return results, profiles


def aggregate(results: list[EpisodeResult]) -> AggregateMetrics:
    """Per (policy, user) means and 10-query moving-average QoE series.

    Accuracy counts a query only when it was routed to the ground-truth
    tool *and* executed successfully. Moving averages follow query issue
    order, pooling seeds per position (the paired-seed mean at each index).
    """
    if not results:
        raise ValueError("no results to aggregate")
    grouped: dict[tuple[str, str], list[EpisodeResult]] = {}
    for row in results:
        grouped.setdefault((row.policy, row.user_id), []).append(row)
    metrics = AggregateMetrics()
    for key in sorted(grouped):
        rows = grouped[key]
        n = len(rows)
        mean_qoe = sum(r.qoe for r in rows) / n
        accuracy = sum(
            1 for r in rows if r.success and r.selected_tool == r.ground_truth_tool
        ) / n
        mean_latency = sum(r.latency_s for r in rows) / n
        metrics.rows[key] = {
            "mean_qoe": mean_qoe,
            "accuracy": accuracy,
            "mean_latency_s": mean_latency,
            "n_queries": n,
        }
        # pool seeds: mean QoE per query position, then slide the window
        by_position: dict[str, list[float]] = {}
        order: list[str] = []
        for r in rows:
            if r.query_id not in by_position:
                order.append(r.query_id)
                by_position[r.query_id] = []
            by_position[r.query_id].append(r.qoe)
        series = [sum(by_position[qid]) / len(by_position[qid]) for qid in order]
        ma = [
            sum(series[i : i + MA_WINDOW]) / MA_WINDOW
            for i in range(len(series) - MA_WINDOW + 1)
        ]
        metrics.moving_averages[key] = ma
    return metrics


def representative_trace_servers(config: ScenarioConfig) -> list[str]:
    """First server (canonical order) of each distinct pattern shape."""
    seen: dict[tuple, str] = {}
    for server_id in config.registry.server_order:
        pattern = config.patterns[config.registry.servers[server_id].pattern_id]
        key = (pattern.kind, pattern.scale)
        seen.setdefault(key, server_id)
    return sorted(seen.values())


def emit_csv(
    metrics: AggregateMetrics,
    results: list[EpisodeResult],
    out_dir: str,
    config: ScenarioConfig,
    profiles: list[trip.UserProfile],
    env: NetworkEnv | None = None,
) -> dict[str, str]:
    """Write episodes/aggregates/moving_average/traces CSVs; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    category_of = {p.user_id: p.category for p in profiles}
    paths = {}

    def _open(name):
        path = os.path.join(out_dir, name)
        paths[name[:-4]] = path
        return open(path, "w", newline="", encoding="utf-8")

    try:
        with _open("episodes.csv") as fh:
            writer = csv.writer(fh)
            writer.writerow(EPISODE_COLUMNS)
            for r in results:
                writer.writerow(
                    [
                        r.seed,
                        r.policy,
                        r.user_id,
                        r.query_id,
                        r.selected_tool,
                        r.ground_truth_tool,
                        int(r.success),
                        repr(r.latency_s),
                        repr(r.qoe),
                        r.timestamp_index,
                    ]
                )
        with _open("aggregates.csv") as fh:
            writer = csv.writer(fh)
            writer.writerow(AGGREGATE_COLUMNS)
            for (policy, user_id), row in metrics.rows.items():
                writer.writerow(
                    [
                        config.name,
                        policy,
                        user_id,
                        category_of.get(user_id, ""),
                        repr(row["mean_qoe"]),
                        repr(row["accuracy"]),
                        repr(row["mean_latency_s"]),
                        row["n_queries"],
                    ]
                )
        with _open("moving_average.csv") as fh:
            writer = csv.writer(fh)
            writer.writerow(MOVING_AVERAGE_COLUMNS)
            for (policy, user_id), series in metrics.moving_averages.items():
                for index, value in enumerate(series):
                    writer.writerow(
                        [
                            config.name,
                            policy,
                            user_id,
                            category_of.get(user_id, ""),
                            index + MA_WINDOW,
                            repr(value),
                        ]
                    )
        with _open("traces.csv") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            if env is not None:
                for server_id in representative_trace_servers(config):
                    for t, value in enumerate(env.traces[server_id]):
                        writer.writerow([t, server_id, repr(value)])
    except OSError as exc:
        raise OSError(f"cannot write CSV outputs under {out_dir}: {exc}") from exc
    return paths
