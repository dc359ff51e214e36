"""Incident-log mining: leader clustering over tf-idf problem vectors.

Single-pass and order-deterministic: every incident joins the first cluster
whose leader is similar enough, otherwise founds one. The cluster medoid
supplies the representative question, and its resolution the answer when one
exists; otherwise the cluster is flagged for manual curation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from ..retrieval import cosine, idf_weight, weighted_vector
from ..text import tokenize

DEFAULT_SIM_THRESHOLD = 0.6


@dataclass(frozen=True)
class IncidentRecord:
    id: str
    problem_text: str
    resolution_text: str = ""

    def validate(self) -> None:
        if not self.problem_text.strip():
            raise ValueError(f"incident {self.id!r} has empty problem_text")


@dataclass(frozen=True)
class MinedCluster:
    member_ids: tuple[str, ...]
    leader_id: str
    medoid_id: str
    question: str
    answer: str | None
    needs_curation: bool


def load_incidents_csv(path: str | Path) -> list[IncidentRecord]:
    """CSV with columns id,problem,resolution."""
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            records.append(
                IncidentRecord(
                    id=row["id"],
                    problem_text=row.get("problem", ""),
                    resolution_text=row.get("resolution", "") or "",
                )
            )
    return records


def mine_incidents(
    incidents: list[IncidentRecord],
    sim_threshold: float = DEFAULT_SIM_THRESHOLD,
) -> list[MinedCluster]:
    if not incidents:
        raise ValueError("need at least one incident")
    for inc in incidents:
        inc.validate()

    token_lists = [tokenize(inc.problem_text) for inc in incidents]
    n = len(incidents)
    df: dict[str, int] = {}
    for tokens in token_lists:
        for t in set(tokens):
            df[t] = df.get(t, 0) + 1
    idf = {t: idf_weight(n, d) for t, d in df.items()}
    vectors = [weighted_vector(tokens, idf) for tokens in token_lists]

    cluster_members: list[list[int]] = []
    leaders: list[int] = []
    for i in range(n):
        for c, leader in enumerate(leaders):
            if cosine(vectors[leader], vectors[i]) >= sim_threshold:
                cluster_members[c].append(i)
                break
        else:
            leaders.append(i)
            cluster_members.append([i])

    clusters = []
    for leader, members in zip(leaders, cluster_members):
        best = members[0]
        best_mean = -1.0
        for m in members:
            mean = sum(cosine(vectors[m], vectors[o]) for o in members) / len(members)
            if mean > best_mean + 1e-12:
                best, best_mean = m, mean
        medoid = incidents[best]
        answer = medoid.resolution_text.strip() or None
        clusters.append(
            MinedCluster(
                member_ids=tuple(incidents[m].id for m in members),
                leader_id=incidents[leader].id,
                medoid_id=medoid.id,
                question=medoid.problem_text,
                answer=answer,
                needs_curation=answer is None,
            )
        )
    return clusters
