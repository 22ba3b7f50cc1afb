import os
import sys
from pathlib import Path

import numpy as np
import pytest
import torch

sys.path.insert(0, str(Path(__file__).parent))

from tgalign.graph import SequenceStore, TemporalGraph  # noqa: E402
from tgalign.params import init_params  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]

ACCEPTANCE_LINES: list[str] = []


def collegemsg_path():
    env = os.environ.get("TGALIGN_COLLEGEMSG")
    candidates = [Path(env)] if env else []
    candidates += [ROOT / "data" / "CollegeMsg.txt", ROOT / "data" / "collegemsg.txt"]
    for path in candidates:
        if path.is_file():
            return path
    return None


def random_graph(rng, num_nodes, num_events, tie_prob=0.3):
    src = rng.integers(0, num_nodes, size=num_events)
    dst = rng.integers(0, num_nodes, size=num_events)
    steps = np.where(rng.random(num_events) < tie_prob, 0.0, rng.random(num_events))
    times = np.cumsum(steps)
    times = times / times[-1] if times[-1] > 0 else times
    return TemporalGraph(num_nodes, src, dst, times, (0.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_graph():
    rng = np.random.default_rng(7)
    return random_graph(rng, 6, 25)


@pytest.fixture
def small_params(small_graph):
    return init_params(small_graph.num_nodes, None, 4, 2, seed=3, dtype=torch.float64)


@pytest.fixture
def small_store(small_graph):
    return SequenceStore.from_graph(small_graph, 3)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_instance(seed, max_d=8, max_S=4, max_nodes=6, max_events=20):
    """A small random graph, store and double-precision parameters for oracle checks."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_nodes + 1))
    m = int(rng.integers(1, max_events + 1))
    d = int(rng.integers(1, max_d + 1))
    S = int(rng.integers(1, max_S + 1))
    g = random_graph(rng, n, m)
    params = init_params(n, None, d, 2, seed=seed, dtype=torch.float64)
    with torch.no_grad():
        params["W0"].mul_(3.0)  # spread embeddings so the softmax is not flat
        params["delta_t"].fill_(float(rng.uniform(0.0, 3.0)))
    upto = int(rng.integers(0, m + 1))
    t = float(g.time[upto]) if upto < m else 1.0
    x, y = (int(v) for v in rng.integers(0, n, size=2))
    return dict(g=g, params=params, store=SequenceStore.from_graph(g, S), S=S, upto=upto, t=t,
                x=x, y=y, events=list(zip(g.src.tolist(), g.dst.tolist(), g.time.tolist())))


def weights_np(params):
    W0 = params["W0"].detach().numpy()
    W_S = [None] + [params.W_S(k).detach().numpy() for k in range(1, params.num_layers + 1)]
    W_N = [None] + [params.W_N(k).detach().numpy() for k in range(1, params.num_layers + 1)]
    return W0, W_S, W_N
