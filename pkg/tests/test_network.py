from collections import deque

import numpy as np
import pytest

from conftest import DATA
from lexnet.network import (
    DisconnectedError, DuplicateEdgeError, EdgeListParseError, Network, Schedule, SelfLoopError,
    load_edge_list, make_torus, next_vertex, random_connected_graph, read_edge_list,
)
from lexnet.rng import Stream


def all_pairs_diameter(net):
    """Plain BFS from every vertex over an adjacency dict."""
    adj = {u: set(int(v) for v in net.neighbors(u)) for u in range(net.n)}
    best = 0
    for s in adj:
        dist = {s: 0}
        q = deque([s])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    q.append(v)
        best = max(best, max(dist.values()))
    return best


def test_torus_128x128():
    net = make_torus(128, 128)
    assert net.n == 16384
    assert all(net.degree(u) == 4 for u in range(net.n))
    assert net.edge_count == 2 * net.n


def test_torus_3x3_wraparound():
    net = make_torus(3, 3)
    # vertex (0,0) -> id 0; (r,c) -> 3r + c
    assert set(net.neighbors(0).tolist()) == {0 * 3 + 1, 0 * 3 + 2, 1 * 3 + 0, 2 * 3 + 0}


@pytest.mark.parametrize("w,h", [(2, 2), (2, 5), (5, 1)])
def test_torus_too_small(w, h):
    with pytest.raises(ValueError):
        make_torus(w, h)


@pytest.mark.parametrize("w,h", [(3, 3), (3, 4), (4, 4), (5, 3), (6, 7), (8, 8)])
def test_torus_diameter(w, h):
    net = make_torus(w, h)
    assert net.diameter == w // 2 + h // 2 == all_pairs_diameter(net)


@pytest.mark.parametrize("w,h", [(3, 3), (4, 5), (10, 6)])
def test_torus_invariants(w, h):
    net = make_torus(w, h)
    assert net.degree_sum == 2 * net.edge_count
    for u in range(net.n):
        nb = net.neighbors(u).tolist()
        assert u not in nb and len(set(nb)) == len(nb)
        for v in nb:
            assert u in net.neighbors(v)


def test_edge_list_examples():
    path2 = load_edge_list("n 2\n0 1")
    assert path2.n == 2 and path2.edges() == [(0, 1)]
    tri = load_edge_list("n 3\n0 1\n1 2\n0 2\n")
    assert [tri.degree(u) for u in range(3)] == [2, 2, 2]
    assert tri.diameter == 1


def test_edge_list_malformed_fixtures_distinct_errors():
    errors = {}
    for name in ("selfloop", "duplicate", "disconnected"):
        with pytest.raises(Exception) as info:
            read_edge_list(DATA / f"{name}.txt")
        errors[name] = type(info.value)
    assert errors == {"selfloop": SelfLoopError, "duplicate": DuplicateEdgeError,
                      "disconnected": DisconnectedError}


@pytest.mark.parametrize("text", ["0 1\n", "n x\n0 1", "n 2\n0 1 2", "n 2\n0 a", "n 2\n0 5", ""])
def test_edge_list_parse_errors(text):
    with pytest.raises(EdgeListParseError):
        load_edge_list(text)


def test_edge_list_comments_and_file():
    net = read_edge_list(DATA / "cycle5.txt")
    assert net.n == 5 and net.edge_count == 6 and net.name == "cycle5"
    assert net.diameter == all_pairs_diameter(net) == 2


def test_random_connected_graph():
    rng = np.random.default_rng(0)
    for n in range(2, 25):
        net = random_connected_graph(n, 0.2, rng)
        assert net.n == n
        assert net.diameter == all_pairs_diameter(net)


def test_sequential_walkthrough_order():
    sched = Schedule.sequential(5, [4, 3, 2, 1, 0])
    assert [next_vertex(sched, t, None) for t in range(6)] == [4, 3, 2, 1, 0, 4]


def test_sequential_period_and_coverage():
    sched = Schedule.sequential(7, "random", Stream(2))
    for t in range(20):
        assert next_vertex(sched, t, None) == next_vertex(sched, t + 7, None)
    for start in (0, 3, 11):
        assert sorted(next_vertex(sched, t, None) for t in range(start, start + 7)) == list(range(7))


def test_sequential_rejects_non_permutation():
    with pytest.raises(ValueError):
        Schedule.sequential(3, [0, 0, 1])


def test_async_uniform():
    sched = Schedule.asynchronous(16)
    stream = Stream(8)
    draws = np.array([next_vertex(sched, t, stream) for t in range(10**5)])
    freq = np.bincount(draws, minlength=16) / draws.size
    assert np.all(np.abs(freq - 1 / 16) <= 0.02)


def test_network_from_edges_needs_two_vertices():
    with pytest.raises(ValueError):
        Network.from_edges(1, [])
