"""Benchmark generation: profile constraints, distortions, golden texts."""
from __future__ import annotations

import dataclasses
import itertools

import pytest

from qoesim import trip
from qoesim.scenario import load_scenario
from qoesim.trip import (
    AMBIGUITY_KINDS,
    CATEGORY_OF,
    USER_TYPE_RANGES,
    QueryRecord,
    RewriteError,
    TemplateRewriter,
    TopicCapacityError,
    UserProfile,
    apply_tone,
    build_dataset,
    export_dataset,
    generate_clear_queries,
    generate_profiles,
    import_dataset,
    inject_ambiguity,
    tone_for,
)

TOPICS = ["accommodation", "healthcare", "flight", "desktop", "weather"]


@pytest.fixture(scope="module")
def registry():
    return load_scenario("random").registry


class TestProfileGeneration:
    def test_single_user_lands_on_first_topic(self):
        profiles = generate_profiles(1, TOPICS, seed=0)
        assert len(profiles) == 1
        assert profiles[0].topic_id == 0

    def test_overflow_users_pile_onto_first_topic(self):
        profiles = generate_profiles(9, TOPICS, seed=123)
        topic0 = [p for i, p in enumerate(profiles, start=1) if i in (1, 6, 7, 8, 9)]
        assert all(p.topic_id == 0 for p in topic0)
        assert [p.topic_id for p in profiles[:5]] == [0, 1, 2, 3, 4]
        types_on_topic0 = [p.user_type for p in profiles if p.topic_id == 0]
        assert len(types_on_topic0) == len(set(types_on_topic0)) == 5

    def test_ranges_uniqueness_and_index_rule_over_seeds(self):
        for seed in range(200):
            profiles = generate_profiles(9, TOPICS, seed=seed)
            used = {}
            for i, p in enumerate(profiles, start=1):
                expected_topic = (i - 1) % 5 if i <= 5 else 0
                assert p.topic_id == expected_topic
                (lo1, hi1), (lo2, hi2) = USER_TYPE_RANGES[p.user_type]
                assert lo1 <= p.w1 <= hi1 and lo2 <= p.w2 <= hi2
                assert p.category == CATEGORY_OF[p.user_type]
                used.setdefault(p.topic_id, set())
                assert p.user_type not in used[p.topic_id]
                used[p.topic_id].add(p.user_type)

    def test_impulsive_rectangle(self):
        for seed in range(50):
            for p in generate_profiles(9, TOPICS, seed=seed):
                if p.user_type == "impulsive":
                    assert p.w1 in (9, 10) and p.w2 in (2, 3, 4)

    def test_capacity_error_names_topic(self):
        with pytest.raises(TopicCapacityError, match="solo"):
            generate_profiles(10, ["solo"], seed=0)

    def test_determinism(self):
        assert generate_profiles(9, TOPICS, seed=5) == generate_profiles(9, TOPICS, seed=5)

    def test_profile_validation(self):
        with pytest.raises(ValueError):
            UserProfile("u", 5, 5, "impulsive", "speed_first", 0, "x")  # w1 out of range
        with pytest.raises(ValueError):
            UserProfile("u", 9, 3, "impulsive", "balanced", 0, "x")  # wrong parent


class TestToneMapping:
    def test_paper_rows(self):
        assert tone_for(9, 3) == "frustrated_angry"
        assert tone_for(2, 9) == "methodical_obsessive"
        assert tone_for(3, 3) == "casual_indifferent"
        assert tone_for(9, 9) == "demanding_urgent"

    def test_total_on_grid_and_corner_rectangles(self):
        for w1, w2 in itertools.product(range(1, 11), repeat=2):
            tone = tone_for(w1, w2)
            assert tone in trip.TONES
            if w1 >= 7 and w2 <= 4:
                assert tone == "frustrated_angry"
            elif w1 >= 7 and w2 >= 7:
                assert tone == "demanding_urgent"
            elif w1 <= 4 and w2 >= 7:
                assert tone == "methodical_obsessive"
            elif w1 <= 4 and w2 <= 4:
                assert tone == "casual_indifferent"

    def test_rejects_out_of_scale(self):
        with pytest.raises(ValueError):
            tone_for(0, 5)
        with pytest.raises(ValueError):
            tone_for(5, 11)


class TestClearQueries:
    def test_topic_closure_and_count(self, registry):
        profile = generate_profiles(9, TOPICS, seed=1)[4]  # weather user
        records = generate_clear_queries(profile, registry, 3, TemplateRewriter(), 1, TOPICS)
        assert len(records) == 3
        topic_tools = {t.tool_id for t in registry.tools_for_topic("weather")}
        assert all(r.ground_truth_tool in topic_tools for r in records)

    def test_complexity_by_category(self, registry):
        by_type = {}
        for seed in range(30):
            for p in generate_profiles(9, TOPICS, seed=seed):
                by_type.setdefault(p.user_type, p)
        meticulous = by_type["meticulous"]
        impulsive = by_type["impulsive"]
        rec_m = generate_clear_queries(meticulous, registry, 1, TemplateRewriter(), 0, TOPICS)[0]
        rec_i = generate_clear_queries(impulsive, registry, 1, TemplateRewriter(), 0, TOPICS)[0]
        assert rec_m.complexity == 3
        assert rec_i.complexity == 1
        assert "double check" in rec_m.clear_text
        assert "double check" not in rec_i.clear_text

    def test_no_tools_for_topic_is_an_error(self, registry):
        profile = dataclasses.replace(
            generate_profiles(1, ["ghost_topic"], seed=0)[0], topic_id=0
        )
        with pytest.raises(ValueError, match="ghost_topic"):
            generate_clear_queries(profile, registry, 1, TemplateRewriter(), 0, ["ghost_topic"])


GOLDEN_CLEAR = (
    "Show the boutique rates digest in oslo for friday, "
    "and double check the exact rates figures."
)


def golden_record(registry) -> QueryRecord:
    profile = generate_profiles(9, TOPICS, seed=1)[0]
    return generate_clear_queries(profile, registry, 1, TemplateRewriter(), 1, TOPICS)[0]


class TestAmbiguity:
    def test_golden_clear_text(self, registry):
        assert golden_record(registry).clear_text == GOLDEN_CLEAR

    def test_information_missing_drops_the_date(self, registry):
        record = golden_record(registry)
        blurred = inject_ambiguity(record, "information_missing", TemplateRewriter(), 1)
        assert blurred.ambiguous_text == (
            "Show the boutique rates digest in oslo, and double check the exact rates figures."
        )
        assert "friday" not in blurred.ambiguous_text

    def test_reference_ambiguity_blurs_the_place(self, registry):
        record = golden_record(registry)
        blurred = inject_ambiguity(record, "reference_ambiguity", TemplateRewriter(), 1)
        assert "oslo" not in blurred.ambiguous_text
        assert "that same place as before" in blurred.ambiguous_text

    def test_terminology_swaps_in_colloquialism(self, registry):
        record = golden_record(registry)
        blurred = inject_ambiguity(record, "terminology_inaccuracy", TemplateRewriter(), 1)
        assert "rates" not in blurred.ambiguous_text
        assert "nightly prices" in blurred.ambiguous_text

    def test_multi_intent_appends_second_clause(self, registry):
        record = golden_record(registry)
        blurred = inject_ambiguity(record, "multi_intent_mixing", TemplateRewriter(), 1)
        assert blurred.ambiguous_text.startswith(record.clear_text[:-1])
        assert ", and also sort out " in blurred.ambiguous_text

    def test_ground_truth_and_text_invariants(self, registry):
        record = golden_record(registry)
        for kind in AMBIGUITY_KINDS:
            blurred = inject_ambiguity(record, kind, TemplateRewriter(), 3)
            assert blurred.ground_truth_tool == record.ground_truth_tool
            assert blurred.ambiguous_text != record.clear_text
            assert blurred.ambiguity_type == kind

    def test_rewriter_failure_carries_query_id(self, registry):
        class Boom:
            def inject_ambiguity(self, *a, **kw):
                raise RuntimeError("nope")

        record = golden_record(registry)
        with pytest.raises(RewriteError, match=record.query_id):
            inject_ambiguity(record, "information_missing", Boom(), 1)

    def test_unknown_kind_rejected(self, registry):
        with pytest.raises(ValueError):
            inject_ambiguity(golden_record(registry), "made_up", TemplateRewriter(), 1)


class TestTone:
    def test_intensity_bounds_and_determinism(self, registry):
        record = inject_ambiguity(
            golden_record(registry), "information_missing", TemplateRewriter(), 1
        )
        profile = generate_profiles(9, TOPICS, seed=1)[0]
        first = apply_tone(record, profile, TemplateRewriter(), 1)
        second = apply_tone(record, profile, TemplateRewriter(), 1)
        assert 0.5 <= first.emotional_intensity <= 1.0
        assert first.final_text == second.final_text
        assert first.tone == tone_for(profile.w1, profile.w2)

    def test_frustrated_marker_phrase(self, registry):
        record = inject_ambiguity(
            golden_record(registry), "information_missing", TemplateRewriter(), 1
        )
        profile = dataclasses.replace(
            generate_profiles(9, TOPICS, seed=1)[0],
            w1=9, w2=3, user_type="impulsive", category="speed_first",
        )
        toned = apply_tone(record, profile, TemplateRewriter(), 1)
        assert toned.tone == "frustrated_angry"
        assert toned.final_text.startswith("Ugh, ")
        assert "beyond annoying" in toned.final_text

    def test_intensity_floor_enforced_by_type(self):
        with pytest.raises(ValueError):
            QueryRecord(query_id="q", user_id="u", topic="t", clear_text="x",
                        emotional_intensity=0.4)


class TestPipelineAndExport:
    def test_counts_and_roundtrip(self, registry, tmp_path):
        profiles, queries = build_dataset(registry, TOPICS, 9, 5, seed=1)
        assert len(profiles) == 9
        assert len(queries) == 45
        path = tmp_path / "dataset.json"
        export_dataset(profiles, queries, path)
        profiles2, queries2 = import_dataset(path)
        assert profiles2 == profiles
        assert queries2 == queries

    def test_empty_queries_roundtrip(self, registry, tmp_path):
        profiles = generate_profiles(2, TOPICS, seed=1)
        path = tmp_path / "empty.json"
        export_dataset(profiles, [], path)
        profiles2, queries2 = import_dataset(path)
        assert profiles2 == profiles and queries2 == []

    def test_dataset_bytes_deterministic(self, registry, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            profiles, queries = build_dataset(registry, TOPICS, 4, 3, seed=9)
            export_dataset(profiles, queries, path)
        assert a.read_bytes() == b.read_bytes()

    def test_transform_toggles(self, registry):
        _, queries = build_dataset(registry, TOPICS, 2, 2, seed=1, ambiguity=False, tone=False)
        for q in queries:
            assert q.ambiguous_text == q.clear_text
            assert q.final_text == q.ambiguous_text

    def test_missing_file_has_path_context(self, tmp_path):
        with pytest.raises(OSError, match="no_such"):
            import_dataset(tmp_path / "no_such.json")
