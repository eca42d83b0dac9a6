"""Shared generators and independent mini-oracles for the test suite."""

from __future__ import annotations

import numpy as np

from epschain import Chain, PointCloud


def random_cloud(rng, n_min=3, n_max=8, name="rand") -> PointCloud:
    n = int(rng.integers(n_min, n_max + 1))
    return PointCloud(points=rng.uniform(0.0, 1.0, size=(n, 2)), name=name)


def random_scale(rng, cloud, lo_q=0.2, hi_q=0.95) -> float:
    d = cloud.distances()
    vals = np.sort(d[np.triu_indices(len(cloud), 1)])
    k = int(rng.integers(int(len(vals) * lo_q), max(int(len(vals) * hi_q), 1)))
    return float(vals[min(k, len(vals) - 1)])


def random_walk_chain(rng, cloud, eps, max_len=6) -> Chain | None:
    """A duplicate-free random walk on the epsilon-neighborhood graph."""
    start = int(rng.integers(len(cloud)))
    verts = [start]
    steps = int(rng.integers(0, max_len))
    for _ in range(steps):
        nbrs = [v for v in cloud.neighbors(verts[-1], eps) if v != verts[-1]]
        if not nbrs:
            break
        verts.append(int(nbrs[int(rng.integers(len(nbrs)))]))
    return Chain(cloud, verts, eps)


def random_loop(rng, cloud, eps, max_out=4) -> Chain | None:
    """A random closed chain: walk out, then return by a shortest chain."""
    from epschain import find_chain

    walk = random_walk_chain(rng, cloud, eps, max_len=max_out)
    back = find_chain(cloud, walk.vertices[-1], walk.vertices[0], eps)
    if back is None:
        return None
    if len(walk) == 1:
        return Chain(cloud, (walk.vertices[0], walk.vertices[0]), eps)
    return walk.concat(back)


def brute_force_components(cloud, eps) -> list[list[int]]:
    """Union-find over all close pairs, written independently of the package."""
    n = len(cloud)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    d = cloud.distances()
    for i in range(n):
        for j in range(i + 1, n):
            if d[i, j] <= eps:
                ra, rb = find(i), find(j)
                if ra != rb:
                    parent[ra] = rb
    groups = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return sorted((sorted(g) for g in groups.values()), key=lambda b: b[0])


def brute_force_shortest_hops(cloud, i, j, eps) -> int | None:
    """Plain BFS hop count, independent of the package's bitset graph."""
    from collections import deque

    d = cloud.distances()
    n = len(cloud)
    dist = {i: 0}
    q = deque([i])
    while q:
        u = q.popleft()
        if u == j:
            return dist[u]
        for w in range(n):
            if w != u and d[u, w] <= eps and w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist.get(j)


def enumerate_shortest_chains(cloud, i, j, eps, hops) -> list[tuple[int, ...]]:
    """Every valid chain from i to j with exactly ``hops`` hops (tiny clouds)."""
    d = cloud.distances()
    n = len(cloud)
    out = []

    def extend(prefix):
        if len(prefix) - 1 == hops:
            if prefix[-1] == j:
                out.append(tuple(prefix))
            return
        for w in range(n):
            if w != prefix[-1] and d[prefix[-1], w] <= eps:
                extend(prefix + [w])

    extend([i])
    return out
