"""Simple undirected graphs with edge-list I/O and isomorphism helpers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import networkx as nx
import numpy as np


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices 0..n-1."""

    n: int
    edges: tuple

    def __post_init__(self):
        norm = []
        seen = set()
        for e in self.edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u},{v}) out of range for n={self.n}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
            norm.append(key)
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    # -- constructors ---------------------------------------------------
    @staticmethod
    def complete(n: int) -> "Graph":
        return Graph(n, tuple((u, v) for u in range(n) for v in range(u + 1, n)))

    @staticmethod
    def path(n: int) -> "Graph":
        return Graph(n, tuple((i, i + 1) for i in range(n - 1)))

    @staticmethod
    def cycle(n: int) -> "Graph":
        return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))

    @staticmethod
    def star(n: int) -> "Graph":
        return Graph(n, tuple((0, i) for i in range(1, n)))

    # -- I/O --------------------------------------------------------------
    @staticmethod
    def from_edge_list_text(text: str) -> "Graph":
        """First non-comment line: vertex count; then one 'u v' pair per line."""
        lines = [
            ln.strip() for ln in text.splitlines()
            if ln.strip() and not ln.strip().startswith("#")
        ]
        if not lines:
            raise GraphError("empty edge-list text")
        try:
            n = int(lines[0])
        except ValueError as exc:
            raise GraphError(f"bad vertex count line {lines[0]!r}") from exc
        edges = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise GraphError(f"bad edge line {ln!r}")
            edges.append((int(parts[0]), int(parts[1])))
        return Graph(n, tuple(edges))

    def to_edge_list_text(self) -> str:
        return "\n".join([str(self.n)] + [f"{u} {v}" for u, v in self.edges]) + "\n"

    # -- structure ----------------------------------------------------------
    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=int)
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1
        return a

    def relabel(self, perm) -> "Graph":
        """Vertex i becomes perm[i]."""
        perm = tuple(perm)
        if sorted(perm) != list(range(self.n)):
            raise GraphError(f"not a permutation of range({self.n}): {perm}")
        return Graph(self.n, tuple((perm[u], perm[v]) for u, v in self.edges))

    def degree_sequence(self) -> tuple:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return tuple(sorted(deg))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g


def find_isomorphism(g1: Graph, g2: Graph) -> Optional[tuple]:
    """A relabeling perm with g1.relabel(perm) == g2, or None."""
    if g1.n != g2.n:
        return None
    matcher = nx.algorithms.isomorphism.GraphMatcher(g1.to_networkx(), g2.to_networkx())
    if not matcher.is_isomorphic():
        return None
    mapping = matcher.mapping
    return tuple(mapping[i] for i in range(g1.n))


def are_isomorphic(g1: Graph, g2: Graph) -> bool:
    return find_isomorphism(g1, g2) is not None
