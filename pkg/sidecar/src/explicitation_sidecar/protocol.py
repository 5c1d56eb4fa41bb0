"""Request handling for the JSON Lines protocol. Every input line yields
exactly one response carrying the request's id; malformed requests get an
error response and never kill the loop."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .models import CausalScorer, MaskedScorer, PairClassifier, ScoringError


@dataclass
class Service:
    masked: MaskedScorer | None = None
    causal: CausalScorer | None = None
    classifier: PairClassifier | None = None

    def handle_line(self, line: str) -> dict:
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            return {"id": None, "error": f"malformed request line: {exc}"}
        if not isinstance(request, dict):
            return {"id": None, "error": "request must be a JSON object"}
        rid = request.get("id")
        try:
            return {"id": rid, **self._dispatch(request)}
        except ScoringError as exc:
            return {"id": rid, "error": str(exc)}
        except (KeyError, TypeError, ValueError) as exc:
            return {"id": rid, "error": f"bad request: {exc}"}

    def _dispatch(self, request: dict) -> dict:
        op = request.get("op")
        if op == "score":
            return self._score(request)
        if op == "classify":
            return self._classify(request)
        return {"error": f"unknown op {op!r}"}

    def _score(self, request: dict) -> dict:
        mode = request.get("mode")
        if mode not in ("causal", "masked"):
            return {"error": f"mode must be causal or masked, got {mode!r}"}
        parts = request["parts"]
        connectives = request["connectives"]
        if not isinstance(parts, list) or len(parts) != 2:
            return {"error": "parts must be [arg1, arg2]"}
        if not isinstance(connectives, list) or not connectives:
            return {"error": "connectives must be a non-empty list"}
        arg1, arg2 = str(parts[0]), str(parts[1])
        names = [str(c) for c in connectives]
        if mode == "masked":
            if self.masked is None:
                return {"error": "this sidecar serves no masked model"}
            scores, multi = self.masked.score(arg1, arg2, names)
            response = {"log_scores": scores}
            if multi:
                response["multi_token"] = multi
            return response
        if self.causal is None:
            return {"error": "this sidecar serves no causal model"}
        return {"log_scores": self.causal.score(arg1, arg2, names)}

    def _classify(self, request: dict) -> dict:
        if self.classifier is None:
            return {"error": "this sidecar serves no classifier"}
        probs = self.classifier.classify(
            connective=str(request["connective"]), arg1=str(request["arg1"]),
            arg2=str(request["arg2"]), level=int(request["level"]))
        return {"probs": probs}
