"""Temporal edge lists, neighbor-sequence history and chronological batching."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Optional

import numpy as np

logger = logging.getLogger(__name__)


class ParseError(ValueError):
    """Raised for malformed edge-list input."""


class Interaction(NamedTuple):
    src: int
    dst: int
    time: float


@dataclass
class TemporalGraph:
    """Time-ordered interaction stream over ``num_nodes`` nodes.

    Interactions are held as three parallel arrays; ``interactions`` gives the
    tuple view. Times are normalized unless the graph was parsed with
    ``normalize=False``.
    """

    num_nodes: int
    src: np.ndarray
    dst: np.ndarray
    time: np.ndarray
    raw_time_range: tuple[float, float]
    features: Optional[np.ndarray] = None
    node_ids: Optional[np.ndarray] = None  # original id of each node when relabeled

    def __post_init__(self):
        self.src = np.asarray(self.src, dtype=np.int64)
        self.dst = np.asarray(self.dst, dtype=np.int64)
        self.time = np.asarray(self.time, dtype=np.float64)
        if not (len(self.src) == len(self.dst) == len(self.time)):
            raise ValueError("src, dst and time must have equal length")
        if len(self.time) and np.any(np.diff(self.time) < 0):
            raise ValueError("interactions must be sorted by time")
        if len(self.src) and max(self.src.max(), self.dst.max()) >= self.num_nodes:
            raise ValueError("node id out of range")
        if self.features is not None and len(self.features) != self.num_nodes:
            raise ValueError("features must have one row per node")

    def __len__(self) -> int:
        return len(self.src)

    @property
    def interactions(self) -> list[Interaction]:
        return [Interaction(int(s), int(d), float(t))
                for s, d, t in zip(self.src, self.dst, self.time)]

    @property
    def feature_dim(self) -> Optional[int]:
        return None if self.features is None else self.features.shape[1]

    def degrees(self) -> np.ndarray:
        """Interaction counts per node, both endpoints counted."""
        return (np.bincount(self.src, minlength=self.num_nodes)
                + np.bincount(self.dst, minlength=self.num_nodes))

    def subgraph(self, stop: int) -> "TemporalGraph":
        """Graph made of the first ``stop`` interactions (same node set)."""
        return TemporalGraph(self.num_nodes, self.src[:stop], self.dst[:stop],
                             self.time[:stop], self.raw_time_range, self.features, self.node_ids)


def _normalize_times(raw: np.ndarray) -> np.ndarray:
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        return np.zeros_like(raw)
    return (raw - lo) / (hi - lo)


def parse_edge_list(lines: Iterable[str], normalize: bool = True,
                    features: Optional[np.ndarray] = None, relabel: bool = True) -> TemporalGraph:
    """Parse ``src dst timestamp`` lines into a :class:`TemporalGraph`.

    Blank lines and ``#`` comments are skipped. Extra columns after the
    timestamp are ignored. Interactions are stably sorted by raw timestamp,
    then min-max normalized to [0, 1] (a zero range maps to 0.0).

    With ``relabel`` the ids that occur are mapped, in increasing order, onto
    ``0..n-1`` (1-based or gappy files get no phantom nodes); ``node_ids``
    keeps the original ids and ``features`` rows are indexed by original id.
    """
    src, dst, raw = [], [], []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 3:
            raise ParseError(f"line {lineno}: expected 'src dst timestamp', got {line!r}")
        try:
            s, d = int(parts[0]), int(parts[1])
            t = float(parts[2])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if s < 0 or d < 0:
            raise ParseError(f"line {lineno}: negative node id")
        if not math.isfinite(t):
            raise ParseError(f"line {lineno}: non-finite timestamp {parts[2]!r}")
        src.append(s)
        dst.append(d)
        raw.append(t)
    if not src:
        raise ParseError("empty edge list")

    raw_arr = np.asarray(raw, dtype=np.float64)
    order = np.argsort(raw_arr, kind="stable")
    src_arr = np.asarray(src, dtype=np.int64)[order]
    dst_arr = np.asarray(dst, dtype=np.int64)[order]
    raw_arr = raw_arr[order]
    n_loops = int(np.sum(src_arr == dst_arr))
    if n_loops:
        logger.warning("edge list contains %d self-loop interactions", n_loops)
    times = _normalize_times(raw_arr) if normalize else raw_arr
    max_id = int(max(src_arr.max(), dst_arr.max()))
    if features is not None and len(features) <= max_id:
        raise ValueError(f"features cover {len(features)} nodes, edge list uses id {max_id}")
    node_ids = None
    if relabel:
        node_ids, inverse = np.unique(np.concatenate([src_arr, dst_arr]), return_inverse=True)
        src_arr, dst_arr = inverse[:len(src_arr)], inverse[len(src_arr):]
        num_nodes = len(node_ids)
        rows = node_ids
    else:
        num_nodes = max_id + 1
        rows = np.arange(num_nodes)
    return TemporalGraph(num_nodes, src_arr, dst_arr, times,
                         (float(raw_arr.min()), float(raw_arr.max())),
                         None if features is None else np.asarray(features[rows], dtype=np.float64),
                         node_ids)


def load_edge_list(path, normalize: bool = True, features: Optional[np.ndarray] = None,
                   relabel: bool = True) -> TemporalGraph:
    with open(Path(path)) as fh:
        return parse_edge_list(fh, normalize=normalize, features=features, relabel=relabel)


def chronological_split(g: TemporalGraph, train_fraction: float
                        ) -> tuple[TemporalGraph, list[Interaction]]:
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    cut = math.floor(train_fraction * len(g))
    test = [Interaction(int(s), int(d), float(t))
            for s, d, t in zip(g.src[cut:], g.dst[cut:], g.time[cut:])]
    return g.subgraph(cut), test


# ---------------------------------------------------------------------------
# neighbor sequences

EMPTY_EVENT = -1


@dataclass
class NeighborSequence:
    """The latest ``capacity`` (neighbor, time) pairs of one node.

    ``events`` remembers which stream row produced each entry (-1 when the
    sequence was filled by hand). Slots at or past ``valid_count`` are padding.
    """

    capacity: int
    neighbors: np.ndarray = None
    times: np.ndarray = None
    events: np.ndarray = None
    valid_count: int = 0

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if self.neighbors is None:
            self.neighbors = np.zeros(self.capacity, dtype=np.int64)
            self.times = np.zeros(self.capacity, dtype=np.float64)
            self.events = np.full(self.capacity, EMPTY_EVENT, dtype=np.int64)

    @property
    def mask(self) -> np.ndarray:
        return np.arange(self.capacity) < self.valid_count

    @property
    def last_time(self) -> float:
        return -math.inf if self.valid_count == 0 else float(self.times[self.valid_count - 1])

    def entries(self) -> list[tuple[int, float]]:
        return [(int(n), float(t)) for n, t in
                zip(self.neighbors[:self.valid_count], self.times[:self.valid_count])]

    def record(self, neighbor: int, time: float, event: int = EMPTY_EVENT) -> "NeighborSequence":
        """Append an interaction in place, evicting the oldest entry when full."""
        if time < self.last_time:
            raise ValueError(f"out-of-order interaction: time {time} after {self.last_time}")
        if self.valid_count == self.capacity:
            self.neighbors[:-1] = self.neighbors[1:]
            self.times[:-1] = self.times[1:]
            self.events[:-1] = self.events[1:]
            slot = self.capacity - 1
        else:
            slot = self.valid_count
            self.valid_count += 1
        self.neighbors[slot] = neighbor
        self.times[slot] = time
        self.events[slot] = event
        return self

    def copy(self) -> "NeighborSequence":
        return NeighborSequence(self.capacity, self.neighbors.copy(), self.times.copy(),
                                self.events.copy(), self.valid_count)


def record_interaction(seq: NeighborSequence, neighbor: int, time: float) -> NeighborSequence:
    return seq.record(neighbor, time)


class SequenceStore:
    """Neighbor-sequence state plus the full history of past states.

    Every recorded interaction ``e`` writes two history rows: row ``2e`` holds
    the source's sequence right after the update, row ``2e + 1`` the
    destination's. Any node's sequence as of any stream position is then one
    of these rows (or the empty row, index ``num_rows``), which lets batched
    code gather whole neighborhoods at past times without replaying the stream.
    """

    def __init__(self, num_nodes: int, seq_len: int):
        if seq_len < 1:
            raise ValueError("seq_len must be >= 1")
        self.num_nodes = num_nodes
        self.seq_len = seq_len
        self._live = [None] * num_nodes
        self._row_node: list[int] = []
        self._rows: list[tuple] = []
        self._tables = None
        self.processed = 0

    @classmethod
    def from_graph(cls, g: TemporalGraph, seq_len: int) -> "SequenceStore":
        store = cls(g.num_nodes, seq_len)
        for s, d, t in zip(g.src.tolist(), g.dst.tolist(), g.time.tolist()):
            store.record(s, d, t)
        return store

    def _seq(self, node: int) -> NeighborSequence:
        seq = self._live[node]
        if seq is None:
            seq = self._live[node] = NeighborSequence(self.seq_len)
        return seq

    def record(self, src: int, dst: int, time: float) -> None:
        """Apply one interaction to both endpoints' sequences."""
        e = self.processed
        for row, (owner, other) in enumerate(((src, dst), (dst, src))):
            if not 0 <= owner < self.num_nodes:
                raise IndexError(f"unknown node {owner}")
            seq = self._seq(owner).record(other, time, 2 * e + row)
            self._row_node.append(owner)
            self._rows.append((seq.neighbors.copy(), seq.times.copy(),
                               seq.events.copy(), seq.valid_count))
        self.processed += 1
        self._tables = None

    @property
    def num_rows(self) -> int:
        return len(self._rows)

    def tables(self) -> "HistoryTables":
        if self._tables is None:
            self._tables = HistoryTables.build(self)
        return self._tables

    def neighbors_at(self, node: int, upto: Optional[int] = None) -> NeighborSequence:
        """Sequence of ``node`` after the first ``upto`` interactions (default: all)."""
        if not 0 <= node < self.num_nodes:
            raise IndexError(f"unknown node {node}")
        upto = self.processed if upto is None else upto
        if not 0 <= upto <= self.processed:
            raise ValueError(f"upto={upto} outside [0, {self.processed}]")
        row = int(self.tables().row_before(np.array([node]), np.array([2 * upto]))[0])
        return self.sequence_of_row(row)

    def sequence_of_row(self, row: int) -> NeighborSequence:
        if row >= self.num_rows:
            return NeighborSequence(self.seq_len)
        n, t, ev, c = self._rows[row]
        return NeighborSequence(self.seq_len, n.copy(), t.copy(), ev.copy(), c)


@dataclass
class HistoryTables:
    """Array form of a :class:`SequenceStore` history.

    All per-row tables carry one trailing empty row so that lookups of
    never-seen nodes gather padding. ``sub_row[r, s]`` is the history row of
    neighbor ``nbr[r, s]`` just before the interaction that put it in slot s.
    """

    nbr: np.ndarray
    time: np.ndarray
    mask: np.ndarray
    sub_row: np.ndarray
    row_node: np.ndarray
    _keys: np.ndarray = field(repr=False)
    _order: np.ndarray = field(repr=False)

    @property
    def empty_row(self) -> int:
        return len(self.row_node)

    @classmethod
    def build(cls, store: SequenceStore) -> "HistoryTables":
        n_rows, s_len = store.num_rows, store.seq_len
        nbr = np.zeros((n_rows + 1, s_len), dtype=np.int64)
        time = np.zeros((n_rows + 1, s_len), dtype=np.float64)
        events = np.full((n_rows + 1, s_len), EMPTY_EVENT, dtype=np.int64)
        count = np.zeros(n_rows + 1, dtype=np.int64)
        for r, (n, t, ev, c) in enumerate(store._rows):
            nbr[r], time[r], events[r], count[r] = n, t, ev, c
        mask = np.arange(s_len)[None, :] < count[:, None]
        row_node = np.asarray(store._row_node, dtype=np.int64)
        keys = row_node * (n_rows + 1) + np.arange(n_rows)
        order = np.argsort(keys, kind="stable")
        tables = cls(nbr, time, mask, np.zeros_like(nbr), row_node, keys[order], order)
        before = np.where(mask, 2 * (events // 2), 0)
        sub = tables.row_before(nbr.ravel(), before.ravel()).reshape(nbr.shape)
        tables.sub_row = np.where(mask, sub, tables.empty_row)
        return tables

    def row_before(self, nodes: np.ndarray, before: np.ndarray) -> np.ndarray:
        """History row of each node built from rows strictly below ``before``."""
        nodes = np.asarray(nodes, dtype=np.int64)
        n_rows = self.empty_row
        query = nodes * (n_rows + 1) + np.asarray(before, dtype=np.int64)
        pos = np.searchsorted(self._keys, query, side="left") - 1
        safe = np.clip(pos, 0, max(n_rows - 1, 0))
        hit = (pos >= 0) & (n_rows > 0)
        if n_rows:
            hit &= self.row_node[self._order[safe]] == nodes
            return np.where(hit, self._order[safe], n_rows)
        return np.full(nodes.shape, n_rows)


# ---------------------------------------------------------------------------
# batches

@dataclass
class Batch:
    start: int
    src: np.ndarray
    dst: np.ndarray
    time: np.ndarray
    dynamics: dict[int, int]

    def __len__(self) -> int:
        return len(self.src)

    @property
    def pairs(self) -> list[tuple[int, int, float]]:
        return list(zip(self.src.tolist(), self.dst.tolist(), self.time.tolist()))

    @property
    def events(self) -> np.ndarray:
        return np.arange(self.start, self.start + len(self))

    def dynamics_of(self, nodes: np.ndarray) -> np.ndarray:
        return np.array([self.dynamics.get(int(n), 0) for n in np.ravel(nodes)],
                        dtype=np.int64).reshape(np.shape(nodes))


def batch_dynamics(src: np.ndarray, dst: np.ndarray) -> dict[int, int]:
    """Interactions involving each node; a self-loop counts once."""
    counts: Counter = Counter()
    for s, d in zip(src.tolist(), dst.tolist()):
        counts[s] += 1
        if d != s:
            counts[d] += 1
    return dict(counts)


def iter_batches(g: TemporalGraph, b: int) -> Iterator[Batch]:
    if b < 1:
        raise ValueError("batch size must be >= 1")
    for start in range(0, len(g), b):
        stop = min(start + b, len(g))
        src, dst = g.src[start:stop], g.dst[start:stop]
        yield Batch(start, src, dst, g.time[start:stop], batch_dynamics(src, dst))


def make_batches(g: TemporalGraph, b: int) -> list[Batch]:
    return list(iter_batches(g, b))
