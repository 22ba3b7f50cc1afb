"""Synthetic interaction streams for tests, gradient checks and scaling runs."""

from __future__ import annotations

import numpy as np

from .graph import TemporalGraph


def community_stream(num_nodes: int, num_events: int, seed: int = 0, communities: int = 8,
                     repeat_prob: float = 0.5, in_community: float = 0.85,
                     zipf: float = 1.2) -> TemporalGraph:
    """Heavy-tailed, community-structured interaction stream.

    Node activity follows a Zipf law (most nodes are long-tail). Each event
    either repeats one of the source's earlier partners or picks a fresh
    partner, mostly within the source's community, so future links are
    predictable from past structure. Times are sorted uniforms in [0, 1].
    """
    rng = np.random.default_rng(seed)
    activity = 1.0 / np.arange(1, num_nodes + 1) ** zipf
    activity = activity[rng.permutation(num_nodes)]
    activity /= activity.sum()
    community = rng.integers(0, communities, size=num_nodes)
    members = [np.flatnonzero(community == c) for c in range(communities)]
    member_p = [activity[m] / activity[m].sum() for m in members]

    partners: list[list[int]] = [[] for _ in range(num_nodes)]
    src = rng.choice(num_nodes, size=num_events, p=activity)
    dst = np.empty(num_events, dtype=np.int64)
    for e, s in enumerate(src):
        past = partners[s]
        if past and rng.random() < repeat_prob:
            d = past[rng.integers(len(past))]
        elif rng.random() < in_community:
            c = community[s]
            d = rng.choice(members[c], p=member_p[c])
        else:
            d = rng.choice(num_nodes, p=activity)
        if d == s:
            d = (s + 1 + rng.integers(num_nodes - 1)) % num_nodes
        dst[e] = d
        past.append(int(d))
        partners[d].append(int(s))
    times = np.sort(rng.random(num_events))
    times = (times - times[0]) / (times[-1] - times[0])
    return TemporalGraph(num_nodes, src, dst, times, (0.0, 1.0))


def uniform_stream(num_nodes: int, num_events: int, seed: int = 0) -> TemporalGraph:
    """Uniformly random pairs (no structure); used for gradient checks and timing."""
    rng = np.random.default_rng(seed)
    src = rng.integers(0, num_nodes, size=num_events)
    dst = (src + 1 + rng.integers(0, num_nodes - 1, size=num_events)) % num_nodes
    times = np.sort(rng.random(num_events))
    return TemporalGraph(num_nodes, src, dst, times, (0.0, 1.0))


def write_edge_list(g: TemporalGraph, path) -> None:
    with open(path, "w") as fh:
        for s, d, t in zip(g.src, g.dst, g.time):
            fh.write(f"{s} {d} {t:.9f}\n")
