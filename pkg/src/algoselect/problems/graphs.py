"""Graph problems: single-pair shortest path and minimum spanning tree.

Graphs are Erdos-Renyi G(n, p) with integer weights in [1, 100]; no
connectivity is forced so the edge count stays binomial.  Shortest-path
targets are the node reachable from 0 with the largest hop distance.
"""

from __future__ import annotations

import heapq
from collections import deque

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra as csgraph_dijkstra
from scipy.sparse.csgraph import minimum_spanning_tree

from algoselect.problems.base import Deadline, Problem


def _random_graph(rng: np.random.Generator, n: int, density: float) -> tuple[np.ndarray, np.ndarray]:
    if n < 1:
        raise ValueError("graph needs at least one node")
    if not 0 <= density <= 1:
        raise ValueError("density must lie in [0, 1]")
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < density
    edges = np.stack([iu[keep], ju[keep]], axis=1).astype(np.int64)
    weights = rng.integers(1, 101, size=len(edges)).astype(float)
    return edges.reshape(-1, 2), weights


def _adjacency(n: int, edges, weights) -> list[list[tuple[int, float]]]:
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (u, v), w in zip(edges.tolist(), weights.tolist()):
        adj[u].append((v, w))
        adj[v].append((u, w))
    return adj


def _farthest_by_hops(n: int, edges) -> int:
    adj = _adjacency(n, edges, np.zeros(len(edges)))
    seen = {0: 0}
    q = deque([0])
    far = 0
    while q:
        u = q.popleft()
        for v, _ in adj[u]:
            if v not in seen:
                seen[v] = seen[u] + 1
                if seen[v] > seen[far] or (seen[v] == seen[far] and v > far):
                    far = v
                q.append(v)
    return far


def graph_features(payload) -> dict:
    n = int(payload["n"])
    possible = n * (n - 1) / 2
    return {"size": n, "density": len(payload["edges"]) / possible if possible else 0.0}


def _graph_matrix(payload):
    n = int(payload["n"])
    e = payload["edges"]
    return coo_matrix((payload["weights"], (e[:, 0], e[:, 1])), shape=(n, n)).tocsr()


# -- shortest path ----------------------------------------------------------------------


def _sp_instance(rng: np.random.Generator, params) -> dict:
    n = int(params["n"])
    edges, weights = _random_graph(rng, n, float(params["density"]))
    return {"n": n, "edges": edges, "weights": weights, "source": 0, "target": _farthest_by_hops(n, edges)}


def dijkstra(payload, rng: np.random.Generator, deadline: Deadline) -> dict:
    n, s, t = int(payload["n"]), int(payload["source"]), int(payload["target"])
    adj = _adjacency(n, payload["edges"], payload["weights"])
    dist = [float("inf")] * n
    prev = [-1] * n
    dist[s] = 0.0
    heap = [(0.0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if u == t:
            break
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    path = [t]
    while path[-1] != s and prev[path[-1]] >= 0:
        path.append(prev[path[-1]])
    return {"path": path[::-1]}


def greedy_walk(payload, rng: np.random.Generator, deadline: Deadline) -> dict:
    """Random-restart walks biased toward light edges; keeps the cheapest walk that hits the target."""
    n, s, t = int(payload["n"]), int(payload["source"]), int(payload["target"])
    adj = _adjacency(n, payload["edges"], payload["weights"])
    restarts = int(payload.get("restarts", 4 * n))
    best, best_cost = None, float("inf")
    if s == t:
        return {"path": [s]}
    for _ in range(restarts):
        deadline.check()
        node, path, cost, visited = s, [s], 0.0, {s}
        while node != t:
            options = [(v, w) for v, w in adj[node] if v not in visited]
            if not options:
                break
            inv = np.array([1.0 / w for _, w in options])
            v, w = options[int(rng.choice(len(options), p=inv / inv.sum()))]
            node = v
            path.append(v)
            visited.add(v)
            cost += w
            if cost >= best_cost:
                break
        if node == t and cost < best_cost:
            best, best_cost = path, cost
    return {"path": best}


def path_cost(payload, path) -> float | None:
    """Cost of a path, or None if it is not a valid source-to-target path."""
    if not path or path[0] != payload["source"] or path[-1] != payload["target"]:
        return None
    weight = {}
    for (u, v), w in zip(payload["edges"].tolist(), payload["weights"].tolist()):
        weight[(u, v)] = weight[(v, u)] = w
    total = 0.0
    for u, v in zip(path, path[1:]):
        if (u, v) not in weight:
            return None
        total += weight[(u, v)]
    return total


def shortest_path_quality(payload, result) -> float:
    """optimal / achieved path cost; 0 for a missing or invalid path."""
    if result is None:
        return 0.0
    cost = path_cost(payload, result.get("path"))
    if cost is None:
        return 0.0
    s, t = int(payload["source"]), int(payload["target"])
    if s == t:
        return 1.0
    best = float(csgraph_dijkstra(_graph_matrix(payload), directed=False, indices=s)[t])
    return min(1.0, best / cost) if cost > 0 else 1.0


SHORTEST_PATH = Problem(
    id="shortest-path",
    category="graphs",
    defaults={"n": 60, "density": 0.1},
    generate_fn=_sp_instance,
    features_fn=graph_features,
    quality_fn=shortest_path_quality,
    systematic=("dijkstra", dijkstra),
    randomized=("random_restart_greedy_walk", greedy_walk),
    notes="quality: optimal path cost (scipy csgraph) divided by returned path cost",
)


# -- minimum spanning tree ------------------------------------------------------------


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def _mst_instance(rng: np.random.Generator, params) -> dict:
    n = int(params["n"])
    edges, weights = _random_graph(rng, n, float(params["density"]))
    return {"n": n, "edges": edges, "weights": weights}


def kruskal(payload, rng: np.random.Generator, deadline: Deadline) -> dict:
    n = int(payload["n"])
    edges, weights = payload["edges"].tolist(), payload["weights"].tolist()
    ds = _DisjointSet(n)
    chosen = []
    for i in sorted(range(len(edges)), key=weights.__getitem__):
        u, v = edges[i]
        if ds.union(u, v):
            chosen.append(i)
            if len(chosen) == n - 1:
                break
    return {"edges": chosen}


def sampled_kruskal(payload, rng: np.random.Generator, deadline: Deadline) -> dict:
    """Kruskal on a random edge sample, then patch connectivity with the rest in random order."""
    n = int(payload["n"])
    edges, weights = payload["edges"].tolist(), payload["weights"].tolist()
    m = len(edges)
    order = rng.permutation(m).tolist()
    k = int(m * float(payload.get("sample_fraction", 0.5)))
    sample = sorted(order[:k], key=weights.__getitem__)
    ds = _DisjointSet(n)
    chosen = []
    for i in sample + order[k:]:
        u, v = edges[i]
        if ds.union(u, v):
            chosen.append(i)
    return {"edges": chosen}


def mst_quality(payload, result) -> float:
    """Optimal forest weight divided by the returned forest weight; 0 unless it spans every component."""
    if result is None:
        return 0.0
    n = int(payload["n"])
    idx = list(result.get("edges", []))
    if len(set(idx)) != len(idx) or any(not 0 <= i < len(payload["edges"]) for i in idx):
        return 0.0
    matrix = _graph_matrix(payload)
    best = float(minimum_spanning_tree(matrix).sum())
    ds = _DisjointSet(n)
    for i in idx:
        u, v = payload["edges"][i]
        if not ds.union(int(u), int(v)):
            return 0.0
    # a spanning forest has as many edges as the optimum's
    if len(idx) != minimum_spanning_tree(matrix).nnz:
        return 0.0
    got = float(payload["weights"][idx].sum()) if idx else 0.0
    return 1.0 if got == 0 else min(1.0, best / got)


MST = Problem(
    id="minimum-spanning-tree",
    category="graphs",
    defaults={"n": 80, "density": 0.3},
    generate_fn=_mst_instance,
    features_fn=graph_features,
    quality_fn=mst_quality,
    systematic=("kruskal", kruskal),
    randomized=("sampled_kruskal", sampled_kruskal),
    notes="quality: optimal spanning-forest weight (scipy csgraph) divided by returned weight",
)
