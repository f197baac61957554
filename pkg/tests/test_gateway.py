from __future__ import annotations

import base64
import hashlib
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from ragdrive.errors import (
    BadResponseError,
    ContextTooLargeError,
    DimDriftError,
    TransportError,
)
from ragdrive.gateway import (
    ECHO_IMAGE_ORDER_SYSTEM,
    ChatRequest,
    HttpChatClient,
    HttpEmbedClient,
    MessagePart,
    MockChatClient,
    MockEmbedder,
    call_with_retries,
    chat_fingerprint,
)


class StubHandler(BaseHTTPRequestHandler):
    """Scriptable endpoint: each queued step is (status, body-dict-or-bytes)."""

    script: list[tuple[int, object]] = []
    seen: list[dict] = []

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length)
        try:
            type(self).seen.append(json.loads(raw))
        except ValueError:
            type(self).seen.append({"_raw": raw})
        status, body = (
            type(self).script.pop(0) if type(self).script else (200, {"text": "ok"})
        )
        payload = body if isinstance(body, bytes) else json.dumps(body).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    StubHandler.script = []
    StubHandler.seen = []
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def noop_sleep(_: float) -> None:
    pass


# --- HTTP embed client --------------------------------------------------------


def test_embed_client_happy_path(stub_server):
    StubHandler.script = [(200, {"vector": [1.0, 2.0, 3.0], "dim": 3})]
    client = HttpEmbedClient(stub_server, sleep=noop_sleep)
    vec = client.embed(b"img-bytes", "front_view")
    assert vec.dtype == np.float32
    assert list(vec) == [1.0, 2.0, 3.0]
    sent = StubHandler.seen[0]
    assert base64.b64decode(sent["image"]) == b"img-bytes"
    assert sent["kind"] == "front_view"


def test_embed_client_detects_dim_drift(stub_server):
    StubHandler.script = [
        (200, {"vector": [0.0] * 32, "dim": 32}),
        (200, {"vector": [0.0] * 64, "dim": 64}),
    ]
    client = HttpEmbedClient(stub_server, sleep=noop_sleep)
    client.embed(b"a", "bev")
    with pytest.raises(DimDriftError):
        client.embed(b"b", "bev")


def test_embed_client_schema_violation(stub_server):
    StubHandler.script = [(200, {"vector": [1.0, 2.0], "dim": 3})]
    client = HttpEmbedClient(stub_server, sleep=noop_sleep)
    with pytest.raises(BadResponseError):
        client.embed(b"a", "front_view")


def test_embed_client_input_validation(stub_server):
    client = HttpEmbedClient(stub_server, sleep=noop_sleep)
    with pytest.raises(ValueError):
        client.embed(b"", "front_view")
    with pytest.raises(ValueError):
        client.embed(b"x", "sideways")


# --- HTTP chat client -----------------------------------------------------------


def chat_request(text="hello") -> ChatRequest:
    return ChatRequest(system="sys", messages=(MessagePart(text=text),))


def test_chat_client_returns_text_verbatim(stub_server):
    StubHandler.script = [(200, {"text": "Turn left."})]
    client = HttpChatClient(stub_server, sleep=noop_sleep)
    assert client.chat(chat_request()) == "Turn left."


def test_chat_client_retries_transient_500_then_succeeds(stub_server):
    StubHandler.script = [(500, {"oops": 1}), (502, {"oops": 2}),
                          (200, {"text": "fine"})]
    client = HttpChatClient(stub_server, sleep=noop_sleep)
    assert client.chat(chat_request()) == "fine"
    assert len(StubHandler.seen) == 3


def test_chat_client_transport_error_after_three_attempts(stub_server):
    StubHandler.script = [(500, {}), (500, {}), (500, {}), (500, {})]
    client = HttpChatClient(stub_server, sleep=noop_sleep)
    with pytest.raises(TransportError):
        client.chat(chat_request())
    assert len(StubHandler.seen) == 3  # exactly max_attempts


def test_chat_client_context_too_large(stub_server):
    StubHandler.script = [(413, {})]
    client = HttpChatClient(stub_server, sleep=noop_sleep)
    with pytest.raises(ContextTooLargeError):
        client.chat(chat_request())
    StubHandler.script = [(200, {"error": "context_too_large"})]
    with pytest.raises(ContextTooLargeError):
        client.chat(chat_request())


def test_chat_client_bad_json_body(stub_server):
    StubHandler.script = [(200, b"not json at all")]
    client = HttpChatClient(stub_server, sleep=noop_sleep)
    with pytest.raises(BadResponseError):
        client.chat(chat_request())


def test_connection_refused_is_transport_error():
    client = HttpChatClient("http://127.0.0.1:9", sleep=noop_sleep)
    with pytest.raises(TransportError):
        client.chat(chat_request())


def test_recorder_round_trips_request_bytes(stub_server):
    StubHandler.script = [(200, {"text": "ok"})]
    log: list[tuple[bytes, bytes]] = []
    client = HttpChatClient(
        stub_server, sleep=noop_sleep, recorder=lambda req, resp: log.append((req, resp))
    )
    request = ChatRequest(
        system="sys",
        messages=(MessagePart(text="t"), MessagePart(image=b"\x00\x01")),
    )
    client.chat(request)
    assert len(log) == 1
    sent = json.loads(log[0][0])
    assert sent == request.to_wire()  # gateway never mutates the payload
    assert json.loads(log[0][1]) == {"text": "ok"}


def test_message_part_validation():
    with pytest.raises(ValueError):
        MessagePart()
    with pytest.raises(ValueError):
        MessagePart(text="x", image=b"y")
    with pytest.raises(ValueError):
        ChatRequest(system="s", messages=())


# --- mocks ---------------------------------------------------------------------


def test_mock_embedder_deterministic_and_unit_norm():
    mock = MockEmbedder(dim_front=48, dim_bev=24, seed=3)
    a = mock.embed(b"same bytes", "front_view")
    b = mock.embed(b"same bytes", "front_view")
    assert np.array_equal(a, b)
    assert a.shape == (48,)
    assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-6)
    assert mock.embed(b"same bytes", "bev").shape == (24,)


def test_mock_embedder_distinct_inputs_distinct_directions():
    mock = MockEmbedder(dim_front=64, seed=0)
    corpus = [f"image-{i}".encode() for i in range(1000)]
    vectors = np.stack([mock.embed(img, "front_view") for img in corpus])
    sims = vectors @ vectors.T
    off_diagonal = sims[~np.eye(len(corpus), dtype=bool)]
    assert off_diagonal.max() < 0.99


def test_mock_embedder_seed_changes_vectors():
    a = MockEmbedder(seed=0).embed(b"x", "front_view")
    b = MockEmbedder(seed=1).embed(b"x", "front_view")
    assert not np.array_equal(a, b)


def test_mock_chat_script_by_fingerprint():
    request = ChatRequest(
        system="s", messages=(MessagePart(image=b"img-a"), MessagePart(image=b"img-b"))
    )
    mock = MockChatClient(script={chat_fingerprint(request): "Turn left"})
    assert mock.chat(request) == "Turn left"


def test_mock_chat_echoes_quoted_exemplar_action():
    request = ChatRequest(
        system="s",
        messages=(
            MessagePart(text='In that scene the maneuver was "slow down rapidly".'),
            MessagePart(image=b"img"),
            MessagePart(text="Choose one."),
        ),
    )
    assert MockChatClient().chat(request) == "slow down rapidly"


def test_mock_chat_default_text_when_nothing_matches():
    request = chat_request('nothing quoted, or "gibberish" only')
    assert MockChatClient(default_text="stop").chat(request) == "stop"


def test_mock_chat_image_order_diagnostic():
    images = (b"one", b"two", b"three")
    request = ChatRequest(
        system=ECHO_IMAGE_ORDER_SYSTEM,
        messages=tuple(MessagePart(image=i) for i in images),
    )
    reply = MockChatClient().chat(request)
    assert reply.splitlines() == [hashlib.sha256(i).hexdigest() for i in images]


def test_mock_failure_injection_with_retry_counter():
    mock = MockChatClient(fail_times=10**9)  # 100% failure
    attempts = 0

    def attempt():
        nonlocal attempts
        attempts += 1
        return mock.chat(chat_request())

    with pytest.raises(TransportError):
        call_with_retries(attempt, max_attempts=3, sleep=noop_sleep)
    assert attempts == 3

    flaky = MockChatClient(fail_times=2, default_text="ok")
    assert call_with_retries(
        lambda: flaky.chat(chat_request("zz")), max_attempts=3, sleep=noop_sleep
    ) == "ok"
    assert flaky.calls == 3
