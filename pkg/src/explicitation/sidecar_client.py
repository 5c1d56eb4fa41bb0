"""Client for the language-model sidecar service.

Wire protocol: UTF-8 JSON Lines over a stream socket or a child process's
stdio, one object per line. Requests carry a client-chosen integer id;
responses are matched to requests by id, never by arrival order.

    {"id": 7, "op": "score", "mode": "causal", "parts": [arg1, arg2],
     "connectives": ["and", ...]}
    -> {"id": 7, "log_scores": [...]} | {"id": 7, "error": "..."}

    {"id": 8, "op": "classify", "connective": "but", "arg1": ..., "arg2":
     ..., "level": 1}
    -> {"id": 8, "probs": [...]} | {"id": 8, "error": "..."}
"""

from __future__ import annotations

import json
import shlex
import socket
import subprocess
import threading
from itertools import count

from .errors import BackendError, ConfigError


class SidecarClient:
    """Serialized JSON Lines client. Calls are locked, so the client is
    safe to share between threads; responses for other request ids that
    arrive early are parked until their caller claims them."""

    def __init__(self, reader, writer, endpoint: str = "custom", on_close=None):
        self._reader = reader
        self._writer = writer
        self._lock = threading.Lock()
        self._ids = count(1)
        self._pending: dict[int, dict] = {}
        self._on_close = on_close
        self.endpoint = endpoint

    # --- transports ---------------------------------------------------------

    @classmethod
    def from_endpoint(cls, endpoint: str, *, timeout: float = 60.0) -> "SidecarClient":
        """``tcp:HOST:PORT`` connects a socket; ``cmd:SHELL-COMMAND`` spawns
        a child process and speaks over its stdio."""
        if endpoint.startswith("tcp:"):
            _, _, rest = endpoint.partition(":")
            host, _, port = rest.rpartition(":")
            if not host or not port.isdigit():
                raise ConfigError(f"malformed tcp endpoint: {endpoint!r}")
            return cls.connect_tcp(host, int(port), timeout=timeout)
        if endpoint.startswith("cmd:"):
            return cls.spawn(endpoint[4:])
        raise ConfigError(f"sidecar endpoint must start with tcp: or cmd:, got {endpoint!r}")

    @classmethod
    def connect_tcp(cls, host: str, port: int, *, timeout: float = 60.0) -> "SidecarClient":
        try:
            sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise BackendError(f"cannot connect to sidecar at {host}:{port}: {exc}")
        reader = sock.makefile("r", encoding="utf-8")
        writer = sock.makefile("w", encoding="utf-8")

        def close():
            reader.close()
            writer.close()
            sock.close()

        return cls(reader, writer, endpoint=f"tcp:{host}:{port}", on_close=close)

    @classmethod
    def spawn(cls, command: str) -> "SidecarClient":
        try:
            proc = subprocess.Popen(shlex.split(command), stdin=subprocess.PIPE,
                                    stdout=subprocess.PIPE, text=True)
        except OSError as exc:
            raise BackendError(f"cannot spawn sidecar {command!r}: {exc}")

        def close():
            proc.stdin.close()
            proc.stdout.close()
            proc.wait(timeout=10)

        client = cls(proc.stdout, proc.stdin, endpoint=f"cmd:{command}", on_close=close)
        client._proc = proc
        return client

    def close(self):
        if self._on_close is not None:
            try:
                self._on_close()
            finally:
                self._on_close = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # --- protocol -----------------------------------------------------------

    def _roundtrip(self, request: dict) -> dict:
        rid = next(self._ids)
        request = {"id": rid, **request}
        with self._lock:
            try:
                self._writer.write(json.dumps(request) + "\n")
                self._writer.flush()
            except (OSError, ValueError) as exc:
                raise BackendError(f"sidecar request {rid} failed to send: {exc}")
            if rid in self._pending:
                return self._pending.pop(rid)
            while True:
                try:
                    line = self._reader.readline()
                except OSError as exc:
                    raise BackendError(f"sidecar request {rid}: transport error: {exc}")
                if not line:
                    raise BackendError(f"sidecar request {rid}: connection closed")
                try:
                    response = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise BackendError(f"sidecar request {rid}: invalid response line: {exc}")
                got = response.get("id")
                if got == rid:
                    return response
                if isinstance(got, int):
                    self._pending[got] = response

    def _checked(self, request: dict) -> dict:
        response = self._roundtrip(request)
        if "error" in response:
            raise BackendError(f"sidecar error for request {response.get('id')}: "
                               f"{response['error']}")
        return response

    def score(self, *, mode: str, parts: list[str], connectives: list[str]) -> list[float]:
        response = self._checked({"op": "score", "mode": mode, "parts": parts,
                                  "connectives": connectives})
        scores = response.get("log_scores")
        if not isinstance(scores, list):
            raise BackendError(f"sidecar response {response.get('id')} lacks log_scores")
        return [float(s) for s in scores]

    def classify(self, *, connective: str, arg1: str, arg2: str, level: int) -> list[float]:
        response = self._checked({"op": "classify", "connective": connective,
                                  "arg1": arg1, "arg2": arg2, "level": level})
        probs = response.get("probs")
        if not isinstance(probs, list):
            raise BackendError(f"sidecar response {response.get('id')} lacks probs")
        return [float(p) for p in probs]
