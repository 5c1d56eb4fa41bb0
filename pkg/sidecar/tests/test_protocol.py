"""Protocol conformance: every request line gets exactly one response with
the matching id, whatever the mix of well-formed and malformed traffic."""

import json

import pytest


def _score_request(rid, mode="masked", connectives=("and", "but")):
    return {"id": rid, "op": "score", "mode": mode,
            "parts": ["Prices rose sharply.", "Demand was strong."],
            "connectives": list(connectives)}


def _classify_request(rid, level=1):
    return {"id": rid, "op": "classify", "connective": "but",
            "arg1": "Prices rose.", "arg2": "Demand was strong.", "level": level}


def scripted_session():
    """50 interleaved requests: sound ones mixed with every malformed shape
    the server must survive. Returns (lines, per-line expectation)."""
    lines = []
    expect = []  # (id or None, kind) with kind in {"scores", "probs", "error"}
    for i in range(50):
        rid = i + 1
        case = i % 10
        if case in (0, 1, 2):
            lines.append(json.dumps(_score_request(rid)))
            expect.append((rid, "scores"))
        elif case == 3:
            lines.append(json.dumps(_classify_request(rid)))
            expect.append((rid, "probs"))
        elif case == 4:  # unsupported mode for this server
            lines.append(json.dumps(_score_request(rid, mode="causal")))
            expect.append((rid, "error"))
        elif case == 5:  # unknown op
            lines.append(json.dumps({"id": rid, "op": "translate"}))
            expect.append((rid, "error"))
        elif case == 6:  # not JSON at all
            lines.append("{this is not json")
            expect.append((None, "error"))
        elif case == 7:  # missing fields
            lines.append(json.dumps({"id": rid, "op": "score", "mode": "masked"}))
            expect.append((rid, "error"))
        elif case == 8:  # wrong classifier level
            lines.append(json.dumps(_classify_request(rid, level=2)))
            expect.append((rid, "error"))
        else:  # empty connective list
            lines.append(json.dumps(_score_request(rid, connectives=())))
            expect.append((rid, "error"))
    return lines, expect


def _check_response(response, rid, kind, n_connectives=2):
    assert response.get("id") == rid
    if kind == "scores":
        assert "error" not in response
        assert len(response["log_scores"]) == n_connectives
    elif kind == "probs":
        assert "error" not in response
        probs = response["probs"]
        assert len(probs) == 4
        assert all(p >= 0 for p in probs)
        assert abs(sum(probs) - 1.0) <= 1e-6
    else:
        assert "error" in response and response["error"]


def test_fifty_request_session_in_process(masked_service):
    lines, expect = scripted_session()
    responses = [masked_service.handle_line(line) for line in lines]
    assert len(responses) == 50
    for response, (rid, kind) in zip(responses, expect):
        _check_response(response, rid, kind)


def test_fifty_request_session_over_stdio(stdio_server):
    lines, expect = scripted_session()
    for line in lines:
        stdio_server.stdin.write(line + "\n")
    stdio_server.stdin.flush()
    responses = [json.loads(stdio_server.stdout.readline()) for _ in range(50)]
    assert len(responses) == 50
    for response, (rid, kind) in zip(responses, expect):
        _check_response(response, rid, kind)


def test_masked_only_server_names_missing_mode(masked_service):
    response = masked_service.handle_line(json.dumps(_score_request(7, mode="causal")))
    assert response["id"] == 7
    assert "causal" in response["error"]


def test_classifier_responses_are_valid_distributions(masked_service):
    for rid in range(3):
        response = masked_service.handle_line(json.dumps(_classify_request(rid)))
        probs = response["probs"]
        assert len(probs) == 4
        assert abs(sum(probs) - 1.0) <= 1e-6
        assert min(probs) >= 0


def test_multi_subword_connective_is_flagged(masked_service):
    request = _score_request(11, connectives=("and", "nevertheless"))
    response = masked_service.handle_line(json.dumps(request))
    assert response["id"] == 11
    assert response["multi_token"] == ["nevertheless"]
    assert len(response["log_scores"]) == 2


def test_non_object_request_is_an_error(masked_service):
    response = masked_service.handle_line("[1, 2, 3]")
    assert response["id"] is None
    assert "error" in response
