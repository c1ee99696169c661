"""Strongly connected components in topological order (networkx underneath)."""

from __future__ import annotations

from typing import Hashable, Iterable, Mapping, Sequence

import networkx as nx


def scc_topological(nodes: Sequence[Hashable], edges: Iterable[tuple[Hashable, Hashable]]) -> list[list[Hashable]]:
    """SCCs ordered so that every edge goes from an earlier (or the same) SCC to a later one.

    Ties are broken by the position of each SCC's first node in ``nodes``,
    and nodes inside an SCC keep their order from ``nodes``.
    """
    pos = {n: i for i, n in enumerate(nodes)}
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_edges_from(edges)
    comps = [sorted(c, key=pos.__getitem__) for c in nx.strongly_connected_components(g)]
    comps.sort(key=lambda c: pos[c[0]])
    owner = {n: i for i, c in enumerate(comps) for n in c}
    dag = nx.DiGraph()
    dag.add_nodes_from(range(len(comps)))
    dag.add_edges_from((owner[a], owner[b]) for a, b in g.edges if owner[a] != owner[b])
    order = nx.lexicographical_topological_sort(dag, key=lambda i: pos[comps[i][0]])
    return [comps[i] for i in order]


def is_trivial(comp: Sequence[Hashable], edges: Mapping[Hashable, Iterable[Hashable]]) -> bool:
    """A single node without a self loop."""
    return len(comp) == 1 and comp[0] not in set(edges.get(comp[0], ()))


def scc_map(succ: Mapping[Hashable, Iterable[Hashable]]) -> dict[Hashable, frozenset]:
    """Map each node to the node set of its SCC."""
    nodes = list(succ)
    comps = scc_topological(nodes, ((a, b) for a in succ for b in succ[a]))
    return {n: frozenset(c) for c in comps for n in c}
