"""Gateway: mock determinism, HTTP round-trip, retry and error taxonomy."""
from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from qoesim.gateway import (
    GatewayFormatError,
    GatewayRetriesExhausted,
    GatewayStatusError,
    GenerationRequest,
    GenerationResponse,
    HttpBackend,
    MockBackend,
)


class ScriptedHandler(BaseHTTPRequestHandler):
    """Plays back a queue of (status, body) responses; records requests."""

    script: list[tuple[int, dict | str]] = []
    seen: list[dict] = []

    def do_POST(self):  # noqa: N802 - stdlib naming
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length) or b"{}")
        type(self).seen.append({"path": self.path, "body": body})
        status, payload = (200, {}) if not self.script else self.script.pop(0)
        raw = payload if isinstance(payload, str) else json.dumps(payload)
        data = raw.encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):  # keep test output clean
        pass


@pytest.fixture()
def stub_server():
    ScriptedHandler.script = []
    ScriptedHandler.seen = []
    server = ThreadingHTTPServer(("127.0.0.1", 0), ScriptedHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
    thread.join(timeout=2)


def chat_body(text: str) -> dict:
    return {
        "choices": [{"message": {"role": "assistant", "content": text}}],
        "usage": {"prompt_tokens": 12, "completion_tokens": 4},
    }


class TestRequestValidation:
    def test_rejects_empty_texts_and_bad_tag(self):
        with pytest.raises(ValueError):
            GenerationRequest(system_text="", user_text="x")
        with pytest.raises(ValueError):
            GenerationRequest(system_text="x", user_text="x", tag="bogus")
        with pytest.raises(ValueError):
            GenerationRequest(system_text="x", user_text="x", max_tokens=0)

    def test_default_temperature_by_tag(self):
        assert GenerationRequest(system_text="s", user_text="u", tag="route").effective_temperature() == 0.0
        assert GenerationRequest(system_text="s", user_text="u", tag="rewrite").effective_temperature() == 0.7
        assert GenerationRequest(system_text="s", user_text="u", tag="route", temperature=0.3).effective_temperature() == 0.3


class TestMockBackend:
    def test_deterministic_dispatch(self):
        backend = MockBackend({"route": lambda req: "SELECTED: " + req.user_text.split()[0]})
        request = GenerationRequest(system_text="s", user_text="tool_a tool_b", tag="route")
        first = backend.generate(request)
        second = backend.generate(request)
        assert first.text == second.text == "SELECTED: tool_a"
        assert first.backend == "mock"
        assert first.token_counts["completion"] == 2

    def test_unhandled_tag_echoes(self):
        response = MockBackend().generate(
            GenerationRequest(system_text="s", user_text="hello there", tag="refine")
        )
        assert response.text == "hello there"


class TestHttpBackend:
    def test_parses_first_choice(self, stub_server):
        ScriptedHandler.script = [(200, chat_body("routed reply"))]
        backend = HttpBackend(base_url=stub_server, api_key="sk-test", model="test-model")
        response = backend.generate(
            GenerationRequest(system_text="sys", user_text="user", tag="route")
        )
        assert isinstance(response, GenerationResponse)
        assert response.text == "routed reply"
        assert response.backend == "http"
        assert response.token_counts == {"prompt_tokens": 12, "completion_tokens": 4}
        sent = ScriptedHandler.seen[0]
        assert sent["path"].endswith("/chat/completions")
        assert sent["body"]["messages"][0]["role"] == "system"
        assert sent["body"]["model"] == "test-model"

    def test_retries_then_succeeds(self, stub_server):
        ScriptedHandler.script = [(500, {}), (200, chat_body("second try"))]
        backend = HttpBackend(base_url=stub_server, retries=2, backoff_s=0.01)
        response = backend.generate(GenerationRequest(system_text="s", user_text="u"))
        assert response.text == "second try"
        assert len(ScriptedHandler.seen) == 2

    def test_persistent_500_exhausts_retries(self, stub_server):
        ScriptedHandler.script = [(500, {}), (500, {}), (500, {})]
        backend = HttpBackend(base_url=stub_server, retries=2, backoff_s=0.01)
        with pytest.raises(GatewayRetriesExhausted) as err:
            backend.generate(GenerationRequest(system_text="s", user_text="u"))
        assert isinstance(err.value.last_error, GatewayStatusError)
        assert err.value.last_error.status == 500
        assert len(ScriptedHandler.seen) == 3

    def test_malformed_body_is_format_error(self, stub_server):
        ScriptedHandler.script = [(200, {"unexpected": True})]
        backend = HttpBackend(base_url=stub_server, retries=0)
        with pytest.raises(GatewayRetriesExhausted) as err:
            backend.generate(GenerationRequest(system_text="s", user_text="u"))
        assert isinstance(err.value.last_error, GatewayFormatError)

    def test_total_time_bounded(self, stub_server):
        ScriptedHandler.script = [(500, {}), (500, {})]
        backend = HttpBackend(base_url=stub_server, timeout_s=5.0, retries=1, backoff_s=0.05)
        start = time.perf_counter()
        with pytest.raises(GatewayRetriesExhausted):
            backend.generate(GenerationRequest(system_text="s", user_text="u"))
        elapsed = time.perf_counter() - start
        # bound: timeout * (retries + 1) + total backoff, with slack
        assert elapsed < 5.0 * 2 + 0.05 + 1.0

    def test_credentials_never_in_repr_or_errors(self, stub_server):
        ScriptedHandler.script = [(500, {})]
        backend = HttpBackend(base_url=stub_server, api_key="sk-secret-123", retries=0)
        assert "sk-secret-123" not in repr(backend)
        with pytest.raises(GatewayRetriesExhausted) as err:
            backend.generate(GenerationRequest(system_text="s", user_text="u"))
        assert "sk-secret-123" not in str(err.value)

    def test_missing_endpoint_configuration(self, monkeypatch):
        monkeypatch.delenv("QOESIM_BASE_URL", raising=False)
        with pytest.raises(Exception, match="QOESIM_BASE_URL"):
            HttpBackend()
