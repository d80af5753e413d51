"""Undirected weighted graphs plus the deterministic classics built on them.

Every algorithm in this module breaks ties by lowest node id (or by
lexicographic node sequence for whole paths), so two independent
implementations working from the same topology must produce identical
structures, not merely structures of equal weight.  The protocol modules
lean on that heavily when they cross-check each other's routing tables.

Costs, delays and capacities are kept as floats and compared exactly;
the only tolerance used is SUM_EPS, applied where *sums* of attributes
are compared (path lengths, tree costs).
"""

from __future__ import annotations

import heapq
import itertools
import math
import random
from dataclasses import dataclass

SUM_EPS = 1e-9

# hard ceiling for the exhaustive Steiner search; beyond this the subset
# enumeration stops being a practical oracle
STEINER_ORACLE_MAX_NODES = 12


class GraphError(ValueError):
    """Malformed graph input or an unsatisfiable precondition."""


@dataclass(frozen=True)
class EdgeAttrs:
    cost: float
    delay: float
    capacity: float


@dataclass(frozen=True)
class PathRecord:
    """A loopless path with its accumulated cost and delay."""

    nodes: tuple
    cost: float
    delay: float

    def edges(self):
        return [edge_key(a, b) for a, b in zip(self.nodes, self.nodes[1:])]


@dataclass
class TreeRecord:
    """A tree embedded in a graph, rooted, with the terminals it serves.

    cost is the sum of member edge costs; delays maps each terminal to the
    summed edge delay along the unique root-to-terminal tree path.
    """

    root: int
    edges: frozenset
    terminals: frozenset
    cost: float
    delays: dict

    def nodes(self):
        out = {self.root}
        for a, b in self.edges:
            out.add(a)
            out.add(b)
        return out

    def degree(self, node):
        return sum(1 for a, b in self.edges if node in (a, b))

    def adjacency(self):
        adj = {n: set() for n in self.nodes()}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj


def edge_key(u, v):
    """Canonical undirected edge key: ordered pair, low id first."""
    return (u, v) if u <= v else (v, u)


def _metric_getter(metric):
    if metric == "cost":
        return lambda attrs: attrs.cost
    if metric == "delay":
        return lambda attrs: attrs.delay
    raise GraphError("unknown metric: %r" % (metric,))


class NetworkGraph:
    """Undirected graph over integer node ids.

    At most one edge per node pair, no self-loops.  Edge attributes are
    cost, delay (nonnegative, finite) and capacity (strictly positive).
    """

    def __init__(self):
        self._adj = {}

    # -- construction -------------------------------------------------

    def add_node(self, node):
        if not isinstance(node, int):
            raise GraphError("node ids must be integers, got %r" % (node,))
        if node not in self._adj:
            self._adj[node] = {}

    def add_edge(self, u, v, cost, delay=1.0, capacity=1.0):
        if u == v:
            raise GraphError("self-loops are not allowed (node %d)" % u)
        for value, name in ((cost, "cost"), (delay, "delay"), (capacity, "capacity")):
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise GraphError("edge %s must be finite, got %r" % (name, value))
        if cost < 0 or delay < 0:
            raise GraphError("edge cost/delay must be nonnegative")
        if capacity <= 0:
            raise GraphError("edge capacity must be positive")
        self.add_node(u)
        self.add_node(v)
        if v in self._adj[u]:
            raise GraphError("duplicate edge %d-%d" % (u, v))
        attrs = EdgeAttrs(float(cost), float(delay), float(capacity))
        self._adj[u][v] = attrs
        self._adj[v][u] = attrs

    def remove_edge(self, u, v):
        if not self.has_edge(u, v):
            raise GraphError("no such edge %d-%d" % (u, v))
        del self._adj[u][v]
        del self._adj[v][u]

    # -- queries ------------------------------------------------------

    def __contains__(self, node):
        return node in self._adj

    def __len__(self):
        return len(self._adj)

    def nodes(self):
        return sorted(self._adj)

    def neighbors(self, node):
        if node not in self._adj:
            raise GraphError("node not found: %r" % (node,))
        return sorted(self._adj[node])

    def has_edge(self, u, v):
        return u in self._adj and v in self._adj[u]

    def edge(self, u, v):
        if not self.has_edge(u, v):
            raise GraphError("no such edge %d-%d" % (u, v))
        return self._adj[u][v]

    def cost(self, u, v):
        return self.edge(u, v).cost

    def delay(self, u, v):
        return self.edge(u, v).delay

    def capacity(self, u, v):
        return self.edge(u, v).capacity

    def edges(self):
        out = []
        for u in sorted(self._adj):
            for v in sorted(self._adj[u]):
                if u < v:
                    out.append((u, v, self._adj[u][v]))
        return out

    def degree(self, node):
        if node not in self._adj:
            raise GraphError("node not found: %r" % (node,))
        return len(self._adj[node])

    def copy(self):
        g = NetworkGraph()
        for n in self._adj:
            g.add_node(n)
        for u, v, attrs in self.edges():
            g.add_edge(u, v, attrs.cost, attrs.delay, attrs.capacity)
        return g

    def components(self):
        seen = set()
        comps = []
        for start in self.nodes():
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                u = stack.pop()
                for v in self._adj[u]:
                    if v not in comp:
                        comp.add(v)
                        stack.append(v)
            seen |= comp
            comps.append(sorted(comp))
        return comps

    def is_connected(self):
        return len(self.components()) <= 1


# ---------------------------------------------------------------------------
# shortest paths


def dijkstra(graph, root, metric="cost", banned_nodes=(), banned_edges=()):
    """Distances and parents from root.

    Tie rule: among equal-length relaxations the lowest-numbered parent
    wins; the heap orders equal distances by lowest node id.  banned_nodes
    are never entered (root excepted), banned_edges (directed pairs) are
    never traversed.
    """
    if root not in graph:
        raise GraphError("node not found: %r" % (root,))
    weight = _metric_getter(metric)
    banned_nodes = set(banned_nodes)
    banned_edges = set(banned_edges)
    dist = {root: 0.0}
    parent = {root: None}
    done = set()
    heap = [(0.0, root)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v in graph.neighbors(u):
            if v in done or v in banned_nodes:
                continue
            if (u, v) in banned_edges or (v, u) in banned_edges:
                continue
            nd = d + weight(graph.edge(u, v))
            if v not in dist or nd < dist[v] - SUM_EPS:
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
            elif abs(nd - dist[v]) <= SUM_EPS and u < parent[v]:
                parent[v] = u
    return dist, parent


def extract_path(parent, src, dst):
    if dst not in parent:
        return None
    out = [dst]
    while out[-1] != src:
        out.append(parent[out[-1]])
    out.reverse()
    return out


def path_record(graph, nodes, metric="cost"):
    cost = 0.0
    delay = 0.0
    for a, b in zip(nodes, nodes[1:]):
        attrs = graph.edge(a, b)
        cost += attrs.cost
        delay += attrs.delay
    return PathRecord(tuple(nodes), cost, delay)


def shortest_path(graph, src, dst, metric="cost", banned_nodes=(), banned_edges=()):
    """Deterministic single shortest path, or None when unreachable."""
    dist, parent = dijkstra(graph, src, metric, banned_nodes, banned_edges)
    nodes = extract_path(parent, src, dst)
    if nodes is None:
        return None
    return path_record(graph, nodes, metric)


def tree_record_from_edges(graph, root, terminals, edges):
    """Build (and validate) a TreeRecord from an explicit edge set."""
    edges = frozenset(edge_key(a, b) for a, b in edges)
    terminals = frozenset(terminals)
    nodes = {root}
    adj = {root: set()}
    for a, b in edges:
        for n in (a, b):
            nodes.add(n)
            adj.setdefault(n, set())
        adj[a].add(b)
        adj[b].add(a)
    if edges and len(edges) != len(nodes) - 1:
        raise GraphError("edge set is not a tree (%d edges over %d nodes)"
                         % (len(edges), len(nodes)))
    # reach everything from the root, summing delay along the way
    delays = {root: 0.0}
    stack = [root]
    while stack:
        u = stack.pop()
        for v in sorted(adj[u]):
            if v not in delays:
                delays[v] = delays[u] + graph.delay(u, v)
                stack.append(v)
    if len(delays) != len(nodes):
        raise GraphError("tree is not connected to its root")
    missing = terminals - nodes
    if missing:
        raise GraphError("terminals not in tree: %s" % sorted(missing))
    cost = sum(graph.cost(a, b) for a, b in edges)
    return TreeRecord(root=root, edges=edges, terminals=terminals, cost=cost,
                      delays={t: delays[t] for t in sorted(terminals)})


def shortest_path_tree(graph, root, metric="cost"):
    """Dijkstra tree from root; returns (TreeRecord, distance map).

    The tree spans every node reachable from root and those nodes form
    the terminal set.  Per-terminal delays always accumulate the delay
    attribute, whatever metric shaped the tree.
    """
    dist, parent = dijkstra(graph, root, metric)
    edges = [(parent[v], v) for v in dist if parent[v] is not None]
    tree = tree_record_from_edges(graph, root, set(dist), edges)
    return tree, dist


# ---------------------------------------------------------------------------
# spanning and Steiner trees


def prim_mst(graph):
    """Minimum spanning tree; ties go to the lowest (u, v) endpoint pair."""
    nodes = graph.nodes()
    if not nodes:
        raise GraphError("graph not connected: no nodes")
    root = nodes[0]
    in_tree = {root}
    edges = []
    heap = []
    for v in graph.neighbors(root):
        a, b = edge_key(root, v)
        heapq.heappush(heap, (graph.cost(root, v), a, b))
    while heap and len(in_tree) < len(nodes):
        cost, a, b = heapq.heappop(heap)
        if a in in_tree and b in in_tree:
            continue
        new = b if a in in_tree else a
        in_tree.add(new)
        edges.append((a, b))
        for v in graph.neighbors(new):
            if v not in in_tree:
                x, y = edge_key(new, v)
                heapq.heappush(heap, (graph.cost(new, v), x, y))
    if len(in_tree) < len(nodes):
        raise GraphError("graph not connected")
    return tree_record_from_edges(graph, root, set(nodes), edges)


def steiner_optimal(graph, terminals):
    """Exact minimum-cost Steiner tree by Steiner-node subset enumeration.

    For every subset of non-terminals we take the MST of the metric
    closure over terminals plus subset, realize it with real shortest
    paths, re-span and prune; the cheapest realization over all subsets
    is optimal.  Guarded to small graphs; this is the oracle the
    heuristics are measured against, not a production routine.
    """
    terminals = sorted(set(terminals))
    if len(graph) > STEINER_ORACLE_MAX_NODES:
        raise GraphError("oracle size limit: %d nodes (max %d)"
                         % (len(graph), STEINER_ORACLE_MAX_NODES))
    for t in terminals:
        if t not in graph:
            raise GraphError("node not found: %r" % (t,))
    if not terminals:
        raise GraphError("need at least one terminal")
    root = terminals[0]
    dist0, _ = dijkstra(graph, root, "cost")
    unreachable = [t for t in terminals if t not in dist0]
    if unreachable:
        raise GraphError("graph not connected: terminals %s unreachable from %d"
                         % (unreachable, root))
    if len(terminals) == 1:
        return TreeRecord(root=root, edges=frozenset(), terminals=frozenset(terminals),
                          cost=0.0, delays={root: 0.0})

    non_terminals = [n for n in graph.nodes() if n not in terminals]
    best = None
    for k in range(len(non_terminals) + 1):
        for extra in itertools.combinations(non_terminals, k):
            candidate = _realize_closure_tree(graph, root, terminals,
                                              list(terminals) + list(extra))
            if candidate is None:
                continue
            if best is None or candidate.cost < best.cost - SUM_EPS:
                best = candidate
    return best


def _realize_closure_tree(graph, root, terminals, node_set):
    """Closure MST over node_set, expanded to real paths, re-spanned, pruned."""
    node_set = sorted(set(node_set))
    paths = {}
    closure = NetworkGraph()
    for n in node_set:
        closure.add_node(n)
    for i, u in enumerate(node_set):
        dist, parent = dijkstra(graph, u, "cost")
        for v in node_set[i + 1:]:
            if v not in dist:
                return None
            paths[(u, v)] = extract_path(parent, u, v)
            closure.add_edge(u, v, dist[v])
    try:
        closure_mst = prim_mst(closure)
    except GraphError:
        return None
    union = NetworkGraph()
    for a, b in sorted(closure_mst.edges):
        for x, y in zip(paths[(a, b)], paths[(a, b)][1:]):
            if not union.has_edge(x, y):
                attrs = graph.edge(x, y)
                union.add_edge(x, y, attrs.cost, attrs.delay, attrs.capacity)
    spanning = prim_mst(union)
    return prune_non_terminal_leaves(graph, root, terminals, spanning.edges)


def prune_non_terminal_leaves(graph, root, terminals, edges):
    """Iteratively strip leaves that are neither terminals nor the root."""
    keep = set(terminals) | {root}
    adj = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    changed = True
    while changed:
        changed = False
        for n in sorted(adj):
            if n not in keep and len(adj[n]) == 1:
                (peer,) = adj[n]
                adj[peer].discard(n)
                del adj[n]
                changed = True
    pruned = set()
    for a in adj:
        for b in adj[a]:
            pruned.add(edge_key(a, b))
    return tree_record_from_edges(graph, root, terminals, pruned)


# ---------------------------------------------------------------------------
# k shortest loopless paths (Yen)


def _rank_key(record):
    # order by length with SUM_EPS-grouped ties broken lexicographically
    return (record[0], record[1])


def _sorted_by_length_then_lex(items):
    """items: list of (total, node_tuple).  Sort with tolerant grouping."""
    items = sorted(items, key=_rank_key)
    out = []
    i = 0
    while i < len(items):
        j = i
        while j + 1 < len(items) and items[j + 1][0] - items[i][0] <= SUM_EPS:
            j += 1
        out.extend(sorted(items[i:j + 1], key=lambda it: it[1]))
        i = j + 1
    return out


def k_shortest_loopless_paths(graph, src, dst, k, metric="cost"):
    """Yen's algorithm; nondecreasing totals, lexicographic on ties."""
    if src not in graph or dst not in graph:
        raise GraphError("node not found: %r" % (src if src not in graph else dst,))
    if k <= 0:
        return []
    weight = _metric_getter(metric)

    def total(nodes):
        return sum(weight(graph.edge(a, b)) for a, b in zip(nodes, nodes[1:]))

    first = shortest_path(graph, src, dst, metric)
    if first is None:
        return []
    if src == dst:
        return [path_record(graph, [src], metric)]
    accepted = [first.nodes]
    candidates = {}
    while len(accepted) < k:
        prev = accepted[-1]
        for i in range(len(prev) - 1):
            spur = prev[i]
            prefix = prev[:i + 1]
            banned_edges = set()
            for path in accepted:
                if path[:i + 1] == prefix and len(path) > i + 1:
                    banned_edges.add((path[i], path[i + 1]))
            banned_nodes = set(prefix[:-1])
            dist, parent = dijkstra(graph, spur, metric, banned_nodes, banned_edges)
            tail = extract_path(parent, spur, dst)
            if tail is None:
                continue
            nodes = prefix[:-1] + tuple(tail)
            if nodes not in candidates and nodes not in set(accepted):
                candidates[nodes] = total(nodes)
        if not candidates:
            break
        ranked = _sorted_by_length_then_lex(
            [(t, nodes) for nodes, t in candidates.items()])
        _, chosen = ranked[0]
        del candidates[chosen]
        accepted.append(chosen)
    return [path_record(graph, nodes, metric) for nodes in accepted]


# ---------------------------------------------------------------------------
# random topologies


def waxman_random(n, alpha, beta, seed, capacity=1.0):
    """Random geometric topology on the unit square.

    Nodes 0..n-1 get uniform positions; each pair (u, v) becomes an edge
    with probability alpha * exp(-d(u,v) / (beta * L)) where L is the
    maximum possible distance (the square's diagonal).  Cost and delay
    both equal the euclidean distance, capacity is constant.  The same
    seed always yields the bitwise-identical graph.
    """
    if n < 0:
        raise GraphError("n must be nonnegative")
    if not (0 <= alpha <= 1):
        raise GraphError("alpha must lie in [0, 1]")
    if beta <= 0:
        raise GraphError("beta must be positive")
    rng = random.Random(seed)
    pos = [(rng.random(), rng.random()) for _ in range(n)]
    scale = beta * math.sqrt(2.0)
    g = NetworkGraph()
    for i in range(n):
        g.add_node(i)
    for u in range(n):
        for v in range(u + 1, n):
            d = math.dist(pos[u], pos[v])
            p = alpha * math.exp(-d / scale)
            if rng.random() < p:
                g.add_edge(u, v, cost=d, delay=d, capacity=capacity)
    return g


def waxman_edge_probability(pos_u, pos_v, alpha, beta):
    """The acceptance probability the generator applies to one pair."""
    return alpha * math.exp(-math.dist(pos_u, pos_v) / (beta * math.sqrt(2.0)))


def waxman_positions(n, seed):
    """Node placements the generator would draw for this seed."""
    rng = random.Random(seed)
    return [(rng.random(), rng.random()) for _ in range(n)]


# ---------------------------------------------------------------------------
# graph file format
#
#   nodes N
#   u v cost delay capacity     (one line per edge)
#
# Floats are written with repr() so a write/read cycle is bit-exact.


def format_graph(graph):
    lines = ["nodes %d" % len(graph)]
    for u, v, attrs in graph.edges():
        lines.append("%d %d %r %r %r" % (u, v, attrs.cost, attrs.delay,
                                         attrs.capacity))
    return "\n".join(lines) + "\n"


def parse_graph(text):
    lines = text.splitlines()
    header = None
    g = NetworkGraph()
    count = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "nodes":
                raise GraphError("line %d: expected 'nodes N' header, got %r"
                                 % (lineno, raw))
            try:
                count = int(parts[1])
            except ValueError:
                raise GraphError("line %d: bad node count %r" % (lineno, parts[1]))
            if count < 0:
                raise GraphError("line %d: negative node count" % lineno)
            header = lineno
            for i in range(count):
                g.add_node(i)
            continue
        parts = line.split()
        if len(parts) != 5:
            raise GraphError("line %d: expected 'u v cost delay capacity', got %r"
                             % (lineno, raw))
        try:
            u, v = int(parts[0]), int(parts[1])
            cost, delay, capacity = (float(parts[2]), float(parts[3]),
                                     float(parts[4]))
        except ValueError as exc:
            raise GraphError("line %d: %s" % (lineno, exc))
        if not (0 <= u < count and 0 <= v < count):
            raise GraphError("line %d: node id out of range 0..%d"
                             % (lineno, count - 1))
        try:
            g.add_edge(u, v, cost, delay, capacity)
        except GraphError as exc:
            raise GraphError("line %d: %s" % (lineno, exc))
    if header is None:
        raise GraphError("missing 'nodes N' header")
    return g


def write_graph_file(graph, path):
    with open(path, "w") as fh:
        fh.write(format_graph(graph))


def read_graph_file(path):
    with open(path) as fh:
        return parse_graph(fh.read())


# ---------------------------------------------------------------------------
# brute-force oracles (small graphs only; used to pin expected values)


def enumerate_simple_paths(graph, src, dst):
    """All loopless src->dst node sequences, depth-first, sorted branches."""
    out = []
    stack = [(src, [src])]
    while stack:
        u, path = stack.pop()
        if u == dst:
            out.append(tuple(path))
            continue
        for v in sorted(graph.neighbors(u), reverse=True):
            if v not in path:
                stack.append((v, path + [v]))
    return out


def brute_force_distances(graph, root, metric="cost"):
    """Shortest distances by enumerating every simple path."""
    weight = _metric_getter(metric)
    dist = {root: 0.0}
    for dst in graph.nodes():
        if dst == root:
            continue
        best = None
        for nodes in enumerate_simple_paths(graph, root, dst):
            t = sum(weight(graph.edge(a, b)) for a, b in zip(nodes, nodes[1:]))
            if best is None or t < best:
                best = t
        if best is not None:
            dist[dst] = best
    return dist


def enumerate_spanning_trees(graph):
    """Every spanning tree edge set (frozensets).  Exponential; keep tiny."""
    nodes = graph.nodes()
    if not nodes:
        return []
    all_edges = [edge_key(u, v) for u, v, _ in graph.edges()]
    need = len(nodes) - 1
    out = []
    for combo in itertools.combinations(all_edges, need):
        adj = {n: [] for n in nodes}
        for a, b in combo:
            adj[a].append(b)
            adj[b].append(a)
        seen = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if len(seen) == len(nodes):
            out.append(frozenset(combo))
    return out
