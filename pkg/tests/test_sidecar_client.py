import socketserver
import sys
import threading
from pathlib import Path

import json
import pytest

from explicitation.candidates import ConnectiveInventory, generate_causal
from explicitation.classifier import SidecarClassifier
from explicitation.errors import BackendError, ConfigError
from explicitation.scoring import SidecarBackend, score
from explicitation.senses import default_labels
from explicitation.sidecar_client import SidecarClient

from conftest import make_relation

MOCK = Path(__file__).parent / "mock_sidecar.py"


def client_for(behaviour):
    return SidecarClient.spawn(f"{sys.executable} {MOCK} {behaviour}")


def test_score_roundtrip():
    with client_for("linear") as client:
        scores = client.score(mode="causal", parts=["a", "b"],
                              connectives=["and", "but", "so"])
    assert scores == [-1.0, -2.0, -3.0]


def test_ids_are_matched_not_ordered():
    with client_for("noise-first") as client:
        first = client.score(mode="masked", parts=["a", "b"], connectives=["and"])
        second = client.score(mode="masked", parts=["a", "b"], connectives=["x", "y"])
    assert first == [-1.0]
    assert second == [-1.0, -2.0]


def test_error_response_raises_backend_error():
    with client_for("error") as client:
        with pytest.raises(BackendError, match="scripted failure"):
            client.score(mode="causal", parts=["a", "b"], connectives=["and"])


def test_garbage_line_raises_backend_error():
    with client_for("garbage") as client:
        with pytest.raises(BackendError, match="invalid response"):
            client.score(mode="causal", parts=["a", "b"], connectives=["and"])


def test_hangup_raises_backend_error():
    with client_for("hangup") as client:
        with pytest.raises(BackendError, match="closed"):
            client.score(mode="causal", parts=["a", "b"], connectives=["and"])


def test_classify_roundtrip_validates():
    labels = default_labels(1)
    with client_for("linear") as client:
        clf = SidecarClassifier(client, 1, labels)
        probs = clf.predict_proba("but", "a", "b")
    assert probs.tolist() == [0.25] * 4


def test_classify_bad_sum_rejected():
    with client_for("bad-sum") as client:
        clf = SidecarClassifier(client, 1, default_labels(1))
        with pytest.raises(BackendError, match="sums to"):
            clf.predict_proba("but", "a", "b")


def test_classify_wrong_length_rejected():
    with client_for("short") as client:
        clf = SidecarClassifier(client, 1, default_labels(1))
        with pytest.raises(BackendError, match="entries"):
            clf.predict_proba("but", "a", "b")


def test_sidecar_backend_scores_candidates():
    inv = ConnectiveInventory(("and", "but"))
    rel = make_relation(kind="Implicit", connective="while",
                        senses=("Comparison.Contrast",))
    with client_for("linear") as client:
        vector = score(SidecarBackend(client), generate_causal(rel, inv))
    assert vector.scores.tolist() == [-1.0, -2.0]


def test_endpoint_parsing():
    with pytest.raises(ConfigError):
        SidecarClient.from_endpoint("http://nope")
    with pytest.raises(ConfigError):
        SidecarClient.from_endpoint("tcp:missing-port")


class _TCPHandler(socketserver.StreamRequestHandler):
    def handle(self):
        for raw in self.rfile:
            request = json.loads(raw.decode("utf-8"))
            doc = {"id": request["id"],
                   "log_scores": [-(i + 1.0) for i in range(len(request["connectives"]))]}
            self.wfile.write((json.dumps(doc) + "\n").encode("utf-8"))
            self.wfile.flush()


def test_tcp_transport():
    server = socketserver.ThreadingTCPServer(("127.0.0.1", 0), _TCPHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        host, port = server.server_address
        with SidecarClient.from_endpoint(f"tcp:{host}:{port}") as client:
            scores = client.score(mode="causal", parts=["a", "b"],
                                  connectives=["and", "but"])
        assert scores == [-1.0, -2.0]
    finally:
        server.shutdown()
        server.server_close()
