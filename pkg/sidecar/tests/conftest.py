import sys

import pytest

from explicitation_sidecar.models import (
    BackendSpec, build_causal, build_masked, build_tiny_classifier,
)
from explicitation_sidecar.protocol import Service

LABELS = ["Temporal", "Contingency", "Comparison", "Expansion"]


@pytest.fixture(scope="session")
def masked_scorer():
    return build_masked(BackendSpec(family="masked", model="tiny"))


@pytest.fixture(scope="session")
def causal_scorer():
    return build_causal(BackendSpec(family="causal", model="tiny"))


@pytest.fixture(scope="session")
def tiny_classifier():
    return build_tiny_classifier(LABELS, level=1)


@pytest.fixture(scope="session")
def masked_service(masked_scorer, tiny_classifier):
    return Service(masked=masked_scorer, classifier=tiny_classifier)


@pytest.fixture(scope="session")
def stdio_server():
    """One long-lived sidecar process (tiny masked model + tiny classifier)
    speaking the protocol over stdio."""
    import subprocess

    proc = subprocess.Popen(
        [sys.executable, "-m", "explicitation_sidecar.server", "--family", "masked",
         "--model", "tiny", "--classifier", "tiny", "--level", "1"],
        stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)
    yield proc
    proc.stdin.close()
    proc.wait(timeout=20)
