"""Triangulated Maximally Filtered Graph.

The graph is grown greedily from a seed tetrahedron. Each step inserts the
(vertex, triangular face) pair with the largest gain, which splits the face
into three new faces. Every insertion adds three edges, one tetrahedral
clique and one triangular separator, so the result is a planar chordal graph
with ``3n - 6`` edges whose cliques and separators form a junction tree.
"""

from __future__ import annotations

import bisect
import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

SCORES = ("sum", "squared")
SEEDS = ("heuristic", "exact")
EXACT_SEED_MAX_N = 30


@dataclass(frozen=True)
class FilteredGraph:
    n: int
    edges: tuple
    cliques: tuple
    separators: tuple
    insertion_order: tuple
    seed_method: str = "heuristic"

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(sorted(tuple(sorted(map(int, e))) for e in self.edges)))
        object.__setattr__(self, "cliques", tuple(tuple(sorted(map(int, c))) for c in self.cliques))
        object.__setattr__(self, "separators", tuple(tuple(sorted(map(int, s))) for s in self.separators))
        object.__setattr__(self, "insertion_order", tuple(int(v) for v in self.insertion_order))

    def adjacency(self):
        adj = [set() for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def to_dict(self):
        return {
            "n": self.n,
            "edges": [list(e) for e in self.edges],
            "cliques": [list(c) for c in self.cliques],
            "separators": [list(s) for s in self.separators],
            "insertion_order": list(self.insertion_order),
            "seed_method": self.seed_method,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data):
        return cls(
            n=int(data["n"]),
            edges=data["edges"],
            cliques=data["cliques"],
            separators=data["separators"],
            insertion_order=data["insertion_order"],
            seed_method=data.get("seed_method", "heuristic"),
        )


def _check_similarity(similarity):
    s = np.asarray(similarity, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValidationError(f"similarity must be square, got shape {s.shape}")
    if s.shape[0] < 2:
        raise ValidationError("need at least 2 vertices")
    if np.isnan(s).any():
        raise ValidationError("similarity contains NaN")
    if not np.all(np.isfinite(s)):
        raise ValidationError("similarity contains infinite values")
    if not np.allclose(s, s.T, rtol=0.0, atol=1e-12):
        raise ValidationError("similarity is not symmetric")
    return s


def gain(similarity, vertex, face) -> float:
    """Score for inserting ``vertex`` into the triangle ``face``."""
    face = tuple(face)
    if len(face) != 3 or len(set(face)) != 3:
        raise ValidationError("face must have three distinct vertices")
    if vertex in face:
        raise ValidationError(f"vertex {vertex} belongs to face {face}")
    s = np.asarray(similarity, dtype=float)
    a, b, c = sorted(face)
    return float(s[vertex, a] + s[vertex, b] + s[vertex, c])


def _seed(w, method):
    n = w.shape[0]
    if method == "heuristic":
        off = w.copy()
        np.fill_diagonal(off, 0.0)
        strength = off.sum(axis=1)
        return [int(v) for v in np.argsort(-strength, kind="stable")[:4]]
    if method == "exact":
        if n > EXACT_SEED_MAX_N:
            raise ValidationError(f"exact seed search is limited to n <= {EXACT_SEED_MAX_N}")
        best, best_score = None, -np.inf
        for quad in itertools.combinations(range(n), 4):
            score = sum(w[i, j] for i, j in itertools.combinations(quad, 2))
            if score > best_score:
                best, best_score = quad, score
        return list(best)
    raise ValidationError(f"unknown seed method {method!r}; expected one of {SEEDS}")


def build_tmfg(similarity, score="sum", seed="heuristic") -> FilteredGraph:
    """Build the TMFG of a symmetric similarity (typically correlation) matrix.

    ``score="squared"`` uses squared similarities as edge weights. ``seed``
    chooses the initial tetrahedron: ``"heuristic"`` takes the four vertices
    with the largest similarity row sums, ``"exact"`` searches every
    quadruple (n <= 30). Ties in the greedy step go to the lowest vertex
    index, then the lexicographically smallest face.
    """
    s = _check_similarity(similarity)
    if score not in SCORES:
        raise ValidationError(f"unknown score {score!r}; expected one of {SCORES}")
    w = s * s if score == "squared" else s
    n = w.shape[0]

    if n < 4:
        vertices = tuple(range(n))
        return FilteredGraph(
            n=n,
            edges=itertools.combinations(vertices, 2),
            cliques=[vertices],
            separators=[],
            insertion_order=vertices,
            seed_method="complete",
        )

    order = _seed(w, seed)
    seed_clique = tuple(sorted(order))
    edges = list(itertools.combinations(seed_clique, 2))
    cliques = [seed_clique]
    separators = []
    faces = sorted(itertools.combinations(seed_clique, 3))
    placed = set(order)
    remaining = [v for v in range(n) if v not in placed]

    while remaining:
        f = np.asarray(faces)
        rows = w[remaining]
        gains = rows[:, f[:, 0]] + rows[:, f[:, 1]] + rows[:, f[:, 2]]
        vi, fi = np.unravel_index(int(np.argmax(gains)), gains.shape)
        v = remaining.pop(vi)
        a, b, c = faces.pop(fi)
        separators.append((a, b, c))
        cliques.append(tuple(sorted((a, b, c, v))))
        edges.extend([(a, v), (b, v), (c, v)])
        for new_face in ((a, b, v), (a, c, v), (b, c, v)):
            bisect.insort(faces, tuple(sorted(new_face)))
        order.append(v)

    return FilteredGraph(
        n=n,
        edges=edges,
        cliques=cliques,
        separators=separators,
        insertion_order=order,
        seed_method=seed,
    )


def verify_chordal(graph):
    """Return ``(is_chordal, elimination_order)``.

    Uses maximum-cardinality search; the reverse visit order is a perfect
    elimination ordering exactly when the graph is chordal. The ordering is
    ``None`` for non-chordal graphs.
    """
    n = graph.n
    adj = graph.adjacency()
    weight = [0] * n
    numbered = [False] * n
    visit = []
    for _ in range(n):
        v = max((u for u in range(n) if not numbered[u]), key=lambda u: (weight[u], -u))
        numbered[v] = True
        visit.append(v)
        for u in adj[v]:
            if not numbered[u]:
                weight[u] += 1
    peo = visit[::-1]
    position = {v: k for k, v in enumerate(peo)}
    for v in peo:
        later = [u for u in adj[v] if position[u] > position[v]]
        if not later:
            continue
        parent = min(later, key=position.__getitem__)
        if any(u != parent and u not in adj[parent] for u in later):
            return False, None
    return True, peo
