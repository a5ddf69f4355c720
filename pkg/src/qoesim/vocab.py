"""Word banks shared by the benchmark generator and the scenario builder.

Each topic owns seven "aspect" words and three "object" words; a tool's
function is one (aspect, object) pair, unique across the whole registry,
and the pair's two tokens never repeat inside one server. Vocabularies are
disjoint across topics so token -> topic inference is well defined.

Slot words (cities, dates, machines) and tone filler never appear in any
server or tool description, so they are routing-neutral by construction.
"""
from __future__ import annotations

TOPICS = ["accommodation", "healthcare", "flight", "desktop", "weather"]

# Single-token marker for each topic, used in descriptions and refinement.
TOPIC_WORD = {
    "accommodation": "hotel",
    "healthcare": "health",
    "flight": "flight",
    "desktop": "desktop",
    "weather": "weather",
}

ASPECTS = {
    "accommodation": ["hostel", "boutique", "beachfront", "downtown", "luxury", "budget", "extended"],
    "healthcare": ["pediatric", "cardiology", "dermatology", "pharmacy", "urgent", "dental", "mental"],
    "flight": ["nonstop", "layover", "redeye", "charter", "economy", "business", "standby"],
    "desktop": ["archive", "backup", "registry", "startup", "display", "audio", "network"],
    "weather": ["current", "hourly", "weekly", "overnight", "weekend", "seasonal", "historical"],
}

OBJECTS = {
    "accommodation": ["rooms", "rates", "reviews"],
    "healthcare": ["clinics", "specialists", "appointments"],
    "flight": ["fares", "departures", "seats"],
    "desktop": ["files", "settings", "processes"],
    "weather": ["temperature", "rainfall", "wind"],
}

# Colloquial stand-ins for the object words; none of these tokens appear in
# any description, which is what makes the inaccuracy hurt retrieval.
COLLOQUIAL = {
    "rooms": "places to crash",
    "rates": "nightly prices",
    "reviews": "guest chatter",
    "clinics": "walk in spots",
    "specialists": "expert docs",
    "appointments": "open slots",
    "fares": "price tags",
    "departures": "takeoff times",
    "seats": "spots to sit",
    "files": "my stuff",
    "settings": "knobs and dials",
    "processes": "things running",
    "temperature": "how hot it feels",
    "rainfall": "wet stuff",
    "wind": "gusty air",
}

# One extra function word per tool (21 per topic, same list every topic, so
# the token stays topic-neutral); it sharpens BM25 contrast between a tool
# and its same-aspect or same-object neighbours.
VARIANTS = [
    "summary", "digest", "bulletin", "roundup", "briefing", "overview", "breakdown",
    "rundown", "outline", "chart", "index", "tracker", "planner", "finder", "scanner",
    "browser", "monitor", "ledger", "catalog", "journal", "atlas",
]

CITIES = ["paris", "tokyo", "denver", "oslo", "cairo", "lima", "sydney", "madrid"]
DATES = ["monday", "tuesday", "friday", "saturday", "june", "july", "october", "march"]
MACHINES = ["laptop", "workstation", "tower", "notebook"]

# place-phrase, when-phrase, and verb per topic; {place}/{date} filled from
# the slot lists above.
QUERY_SHAPES = {
    "accommodation": ("show", "in {place}", "for {date}"),
    "healthcare": ("find", "near {place}", "on {date}"),
    "flight": ("find", "to {place}", "on {date}"),
    "desktop": ("show", "on my {place}", "from {date}"),
    "weather": ("check", "in {place}", "for {date}"),
}


def place_values(topic: str) -> list[str]:
    return MACHINES if topic == "desktop" else CITIES


def tools_of_topic(topic: str) -> list[tuple[int, str, str, str]]:
    """The topic's 21 (server ordinal, aspect, object, variant) functions.

    Server g hosts aspects g, g+1, g+2 (mod 7) paired with objects 0, 1, 2,
    so no aspect or object repeats inside a server and every (aspect,
    object) pair exists exactly once in the topic. The variant word is
    unique per tool within the topic.
    """
    aspects = ASPECTS[topic]
    objects = OBJECTS[topic]
    out = []
    for g in range(7):
        for slot in range(3):
            out.append((g, aspects[(g + slot) % 7], objects[slot], VARIANTS[3 * g + slot]))
    return out


def content_token_topics() -> dict[str, str]:
    """token -> topic for every aspect, object, and topic word."""
    mapping: dict[str, str] = {}
    for topic in TOPICS:
        for token in ASPECTS[topic] + OBJECTS[topic] + [TOPIC_WORD[topic]]:
            mapping[token] = topic
    return mapping
