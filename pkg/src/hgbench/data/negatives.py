"""Negative hyperedge sampling: sized (SNS), motif (MNS), and clique (CNS).

All samplers draw through an explicit Generator, never return an existing
hyperedge (rejection capped at 50 attempts), and produce candidates as
sorted unique node-id arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import HgBenchError, SamplingError
from ..hypergraph import Hypergraph

MAX_ATTEMPTS = 50
VARIANT_SEED_OFFSETS = (1001, 1002, 1003, 1004)


@dataclass
class CandidateSet:
    """Node-id sets with 0/1 membership labels (1 = true hyperedge)."""

    candidates: list = field(default_factory=list)
    labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.candidates) != len(self.labels):
            raise HgBenchError("labels length must match candidates")
        for c in self.candidates:
            if len(c) == 0:
                raise HgBenchError("empty candidate")


@dataclass
class NegativeBatch:
    candidates: CandidateSet
    method_tags: list


def _positive_lookup(hg: Hypergraph) -> frozenset:
    return hg.cached(
        "positive_sets",
        lambda: frozenset(
            frozenset(hg.members(e).tolist()) for e in range(hg.num_edges)
        ),
    )


def _node_neighbors(hg: Hypergraph, v: int) -> set:
    """Nodes co-occurring with v in at least one hyperedge (v included)."""
    adj = hg.cached("neighbor_sets", lambda: [None] * hg.num_nodes)
    if adj[v] is None:
        acc = set()
        for e in hg.incident_edges(v):
            acc.update(hg.members(int(e)).tolist())
        adj[v] = acc
    return adj[v]


def _random_positive(hg: Hypergraph, rng) -> np.ndarray:
    return hg.members(int(rng.integers(hg.num_edges)))


def _as_candidate(nodes) -> np.ndarray:
    return np.array(sorted(set(int(v) for v in nodes)), dtype=np.int64)


def sns_sample(hg: Hypergraph, rng) -> np.ndarray:
    """Sized NS: uniform node set matching the size of a random hyperedge."""
    k = len(_random_positive(hg, rng))
    positives = _positive_lookup(hg)
    for _ in range(MAX_ATTEMPTS):
        cand = _as_candidate(rng.choice(hg.num_nodes, size=k, replace=False))
        if frozenset(cand.tolist()) not in positives:
            return cand
    raise SamplingError(f"SNS: no non-hyperedge candidate of size {k} found")


def _grow_motif(hg: Hypergraph, rng, k: int) -> set:
    grown = set(_random_positive(hg, rng).tolist())
    while len(grown) < k:
        # hyperedges intersecting the current set that add at least one node
        # (picking an adding edge uniformly equals redrawing until progress)
        touching = set()
        for v in grown:
            touching.update(hg.incident_edges(v).tolist())
        adding = [
            e for e in sorted(touching)
            if not set(hg.members(e).tolist()) <= grown
        ]
        if not adding:
            # disconnected exhaustion: pad with uniform random fresh nodes
            outside = np.setdiff1d(
                np.arange(hg.num_nodes, dtype=np.int64),
                np.fromiter(grown, dtype=np.int64),
            )
            need = min(k - len(grown), len(outside))
            grown.update(rng.choice(outside, size=need, replace=False).tolist())
            break
        pick = int(adding[int(rng.integers(len(adding)))])
        grown.update(hg.members(pick).tolist())
    return grown


def mns_sample(hg: Hypergraph, rng) -> np.ndarray:
    """Motif NS: grow a connected node pool from a seed hyperedge, then
    subsample to the target size."""
    k = len(_random_positive(hg, rng))
    positives = _positive_lookup(hg)
    for _ in range(MAX_ATTEMPTS):
        grown = _grow_motif(hg, rng, k)
        pool = np.fromiter(sorted(grown), dtype=np.int64)
        take = min(k, len(pool))
        cand = _as_candidate(rng.choice(pool, size=take, replace=False))
        if frozenset(cand.tolist()) not in positives:
            return cand
    raise SamplingError(f"MNS: no non-hyperedge candidate of size {k} found")


def cns_sample(hg: Hypergraph, rng) -> np.ndarray:
    """Clique NS: swap one member of a hyperedge for a common neighbor of
    the remaining members (uniform fallback if none exists)."""
    positives = _positive_lookup(hg)
    all_nodes = np.arange(hg.num_nodes, dtype=np.int64)
    for _ in range(MAX_ATTEMPTS):
        e_members = _random_positive(hg, rng)
        drop = int(e_members[int(rng.integers(len(e_members)))])
        rest = [int(v) for v in e_members if v != drop]
        common = None
        for v in rest:
            nb = _node_neighbors(hg, v)
            common = set(nb) if common is None else common & nb
        if common is None:
            common = set(all_nodes.tolist())
        pool = sorted(common - set(e_members.tolist()))
        if not pool:
            pool = np.setdiff1d(all_nodes, e_members).tolist()
            if not pool:
                continue
        u = int(pool[int(rng.integers(len(pool)))])
        cand = _as_candidate(rest + [u])
        if frozenset(cand.tolist()) not in positives:
            return cand
    raise SamplingError("CNS: no non-hyperedge candidate found")


SAMPLERS = {"SNS": sns_sample, "MNS": mns_sample, "CNS": cns_sample}


def method_counts(n: int) -> dict:
    """Split n negatives as evenly as possible, remainder SNS -> MNS -> CNS."""
    base, rem = divmod(n, 3)
    return {
        "SNS": base + (1 if rem >= 1 else 0),
        "MNS": base + (1 if rem >= 2 else 0),
        "CNS": base,
    }


def build_eval_negatives(hg: Hypergraph, positives_in_split, seed: int) -> NegativeBatch:
    """As many negatives as positives, mixed evenly across the three methods."""
    n = len(positives_in_split)
    rng = np.random.default_rng(seed)
    counts = method_counts(n)
    candidates, tags = [], []
    for method in ("SNS", "MNS", "CNS"):
        sampler = SAMPLERS[method]
        for _ in range(counts[method]):
            candidates.append(sampler(hg, rng))
            tags.append(method)
    labels = np.zeros(len(candidates), dtype=np.int64)
    return NegativeBatch(CandidateSet(candidates, labels), tags)


def build_eval_variants(hg: Hypergraph, positives_in_split, seed: int) -> list:
    """Four independent negative batches from derived seeds."""
    return [
        build_eval_negatives(hg, positives_in_split, seed + off)
        for off in VARIANT_SEED_OFFSETS
    ]


def eval_candidate_set(hg: Hypergraph, positive_edge_ids, batch: NegativeBatch) -> CandidateSet:
    """Positives (label 1) followed by the batch negatives (label 0)."""
    cands = [hg.members(int(e)) for e in positive_edge_ids]
    cands.extend(batch.candidates.candidates)
    labels = np.concatenate(
        [np.ones(len(positive_edge_ids), dtype=np.int64), batch.candidates.labels]
    )
    return CandidateSet(cands, labels)
