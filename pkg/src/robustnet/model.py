"""Network data model: self-feedback rates, weighted directed edges, file I/O.

A network of N scalar nodes is the pair (A, M): A = diag(a_1..a_N) holds the
strictly positive self-feedback rates, and M holds the positive edge weights,
where the stored edge (i, j) means node j influences node i with rate m_ij.
Node identity is a stable 1-based index.  Values are immutable after
construction; structural edits go through the change engine, which returns a
new network plus an explicit old-to-new index map whenever indices move.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidNetworkError
from .numfmt import format_decimal, parse_decimal

NodeId = int


@dataclass(frozen=True)
class Violation:
    """One invariant failure, with the location it was found at."""

    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@dataclass(frozen=True)
class Network:
    """Immutable node/edge data.  Construction does not validate semantics;
    run :func:`validate` (or any analysis entry point) for that."""

    self_feedback: tuple[float, ...]
    edges: tuple[tuple[int, int, float], ...]  # (to, from, weight)

    def __post_init__(self):
        object.__setattr__(
            self, "self_feedback", tuple(float(a) for a in self.self_feedback)
        )
        normalized = tuple(
            sorted((int(i), int(j), float(w)) for (i, j, w) in self.edges)
        )
        object.__setattr__(self, "edges", normalized)

    @property
    def node_count(self) -> int:
        return len(self.self_feedback)

    def edge_weight(self, to: NodeId, frm: NodeId) -> float:
        """Weight of edge (to, frm), or 0.0 when absent."""
        for i, j, w in self.edges:
            if i == to and j == frm:
                return w
        return 0.0

    def has_edge(self, to: NodeId, frm: NodeId) -> bool:
        return any(i == to and j == frm for (i, j, _) in self.edges)


def make_network(
    self_feedback: Iterable[float],
    edges: Mapping[tuple[int, int], float] | Iterable[tuple[int, int, float]] = (),
) -> Network:
    """Build a Network from a rate list and either an {(to, from): weight}
    mapping or an iterable of (to, from, weight) triples."""
    if isinstance(edges, Mapping):
        triples = tuple((i, j, w) for (i, j), w in edges.items())
    else:
        triples = tuple(edges)
    return Network(tuple(self_feedback), triples)


def validate(net: Network) -> list[Violation]:
    """Check every model invariant; an empty list means the network is valid.

    Violations are data, not failures: every problem is reported with its
    location so callers can surface all of them at once.
    """
    out: list[Violation] = []
    n = net.node_count
    if n < 1:
        out.append(Violation("node_count", "network must have at least one node"))
    for idx, a in enumerate(net.self_feedback, start=1):
        if not math.isfinite(a):
            out.append(Violation(f"self_feedback[{idx}]", f"must be finite, got {a!r}"))
        elif a <= 0:
            out.append(Violation(f"self_feedback[{idx}]", f"<= 0 (got {format_decimal(a)})"))
    seen: set[tuple[int, int]] = set()
    for i, j, w in net.edges:
        loc = f"edges[({i},{j})]"
        if not (1 <= i <= n) or not (1 <= j <= n):
            out.append(Violation(loc, f"node index out of range [1..{n}]"))
            continue
        if i == j:
            out.append(Violation(loc, "self-loop"))
            continue
        if (i, j) in seen:
            out.append(Violation(loc, "duplicate edge"))
            continue
        seen.add((i, j))
        if not math.isfinite(w):
            out.append(Violation(loc, f"weight must be finite, got {w!r}"))
        elif w <= 0:
            out.append(Violation(loc, f"weight <= 0 (got {format_decimal(w)}); zero means absent"))
    return out


def require_valid(net: Network) -> None:
    violations = validate(net)
    if violations:
        raise InvalidNetworkError(violations)


def neighbors_in(net: Network, i: NodeId) -> frozenset[NodeId]:
    """All in-neighbours of node i: the j with an edge (i, j) present."""
    if not (1 <= i <= net.node_count):
        raise IndexError(f"node {i} out of range [1..{net.node_count}]")
    return frozenset(j for (to, j, _) in net.edges if to == i)


def a_vector(net: Network) -> np.ndarray:
    return np.array(net.self_feedback, dtype=float)


def weighted_adjacency(net: Network) -> np.ndarray:
    """Dense N x N matrix with entry (i, j) = m_ij; zero diagonal."""
    n = net.node_count
    m = np.zeros((n, n), dtype=float)
    for i, j, w in net.edges:
        m[i - 1, j - 1] = w
    return m


def system_matrix(net: Network) -> np.ndarray:
    """diag(a) - M, the matrix whose negation drives the dynamics."""
    x = -weighted_adjacency(net)
    np.fill_diagonal(x, a_vector(net))
    return x


def influence_successors(net: Network) -> list[list[int]]:
    """0-based adjacency in influence direction: succ[j] holds every i
    (as 0-based index) with an edge (i+1, j+1), i.e. nodes that j feeds."""
    succ: list[list[int]] = [[] for _ in range(net.node_count)]
    for i, j, _ in net.edges:
        succ[j - 1].append(i - 1)
    for lst in succ:
        lst.sort()
    return succ


def is_acyclic(net: Network) -> bool:
    """True iff the influence graph has no directed cycle (Kahn's algorithm)."""
    n = net.node_count
    succ = influence_successors(net)
    indeg = [0] * n
    for lst in succ:
        for v in lst:
            indeg[v] += 1
    queue = [v for v in range(n) if indeg[v] == 0]
    removed = 0
    while queue:
        v = queue.pop()
        removed += 1
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return removed == n


# ---------------------------------------------------------------------------
# File format


def network_to_dict(net: Network) -> dict:
    return {
        "nodes": [
            {"id": i, "a": format_decimal(a)}
            for i, a in enumerate(net.self_feedback, start=1)
        ],
        "edges": [
            {"from": j, "to": i, "weight": format_decimal(w)}
            for (i, j, w) in net.edges
        ],
    }


def _require_keys(d: dict, allowed: set[str], what: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"{what}: unknown keys {sorted(unknown)}")
    missing = allowed - set(d)
    if missing:
        raise ValueError(f"{what}: missing keys {sorted(missing)}")


def _require_int(x, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ValueError(f"{what} must be an integer, got {x!r}")
    return x


def network_from_dict(d) -> Network:
    """Strict parse of the network file schema.  Unknown keys are rejected,
    node ids must be exactly 1..N, and all rates/weights are decimal strings."""
    if not isinstance(d, dict):
        raise ValueError("network document must be a JSON object")
    _require_keys(d, {"nodes", "edges"}, "network")
    if not isinstance(d["nodes"], list) or not isinstance(d["edges"], list):
        raise ValueError("network: 'nodes' and 'edges' must be arrays")

    rates: dict[int, float] = {}
    for entry in d["nodes"]:
        if not isinstance(entry, dict):
            raise ValueError("nodes[]: each entry must be an object")
        _require_keys(entry, {"id", "a"}, "nodes[]")
        node = _require_int(entry["id"], "nodes[].id")
        if node in rates:
            raise ValueError(f"nodes[]: duplicate id {node}")
        rates[node] = parse_decimal(entry["a"], f"nodes[{node}].a")
    n = len(rates)
    if sorted(rates) != list(range(1, n + 1)):
        raise ValueError("nodes[]: ids must be exactly 1..N with no gaps")

    triples = []
    seen: set[tuple[int, int]] = set()
    for entry in d["edges"]:
        if not isinstance(entry, dict):
            raise ValueError("edges[]: each entry must be an object")
        _require_keys(entry, {"from", "to", "weight"}, "edges[]")
        j = _require_int(entry["from"], "edges[].from")
        i = _require_int(entry["to"], "edges[].to")
        if (i, j) in seen:
            raise ValueError(f"edges[]: duplicate edge to={i} from={j}")
        seen.add((i, j))
        triples.append((i, j, parse_decimal(entry["weight"], f"edges[({i},{j})].weight")))

    return Network(tuple(rates[k] for k in range(1, n + 1)), tuple(triples))


def dumps_network(net: Network) -> str:
    return json.dumps(network_to_dict(net), indent=2) + "\n"


def loads_network(text: str) -> Network:
    return network_from_dict(json.loads(text))


def save_network(net: Network, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_network(net))


def load_network(path, check: bool = True) -> Network:
    with open(path, "r", encoding="utf-8") as fh:
        net = loads_network(fh.read())
    if check:
        require_valid(net)
    return net
