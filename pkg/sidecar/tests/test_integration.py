"""End-to-end check against the toolkit's own client: the sidecar must be
drivable through the primary package's wire-protocol surface."""

import sys

import pytest

explicitation = pytest.importorskip(
    "explicitation", reason="primary package not installed")

from explicitation.candidates import ConnectiveInventory, generate_causal, generate_masked  # noqa: E402
from explicitation.classifier import SidecarClassifier  # noqa: E402
from explicitation.corpus import Provenance, Relation  # noqa: E402
from explicitation.scoring import SidecarBackend, normalize, score  # noqa: E402
from explicitation.senses import parse_sense  # noqa: E402
from explicitation.sidecar_client import SidecarClient  # noqa: E402

SERVER = (f"{sys.executable} -m explicitation_sidecar.server "
          "--family masked --model tiny --classifier tiny --level 1")


@pytest.fixture(scope="module")
def client():
    with SidecarClient.spawn(SERVER) as client:
        yield client


def _relation():
    return Relation(
        kind="Implicit", connective="while",
        arg1="Prices rose sharply last year.",
        arg2="Volume stayed flat in most markets.",
        senses=(parse_sense("Comparison.Contrast"),),
        source=Provenance(corpus="t", section=21, file="f", index=0))


def test_masked_scoring_through_primary_backend(client):
    inv = ConnectiveInventory(("and", "but", "because"))
    cands = generate_masked(_relation(), inv)
    vector = score(SidecarBackend(client), cands)
    dist = normalize(vector)
    assert abs(dist.sum() - 1.0) <= 1e-9
    assert len(dist) == 3


def test_causal_mode_rejected_by_masked_server(client):
    from explicitation.errors import BackendError

    inv = ConnectiveInventory(("and", "but"))
    cands = generate_causal(_relation(), inv)
    with pytest.raises(BackendError, match="causal"):
        score(SidecarBackend(client), cands)


def test_classifier_passes_core_validation(client):
    labels = ("Temporal", "Contingency", "Comparison", "Expansion")
    clf = SidecarClassifier(client, 1, labels)
    probs = clf.predict_proba("but", "Prices rose.", "Demand was strong.")
    assert probs.shape == (4,)
    assert abs(float(probs.sum()) - 1.0) <= 1e-6
