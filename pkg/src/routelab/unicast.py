"""Unicast routing protocols cross-checked against each other.

Four node state machines share the simulator kernel:

  dbf   distributed Bellman-Ford distance vectors, distances capped at a
        configurable infinity threshold so counting-to-infinity halts
  ils   sequence-numbered link-state flooding with full-map recomputation
  lpa   loop-free path-finding distance vectors: updates carry the
        second-to-last hop, a feasibility test guards successor changes,
        and an infeasible change triggers a one-hop query/reply cycle
  lva   link-vector exchange: each node tells its neighbors which links
        its own preferred paths use, plus deletions when it stops

Link records are kept per undirected link under a canonical (head, tail)
key with head < tail.  Both endpoints stamp the same record after a local
link event, bumping the sequence number they already hold, so the two
stamps agree bit for bit and the second copy dies as a duplicate wherever
the first has already been.

All protocols answer routes() (destination -> successor) and distances()
so a single oracle can audit any of them, and ils/lva pick next hops by
the same deterministic rule (lowest-id neighbor on a shortest path) so
their routing tables must agree exactly once quiet.

ils, lpa and lva batch their outgoing updates per time instant: handlers
mark state dirty and a zero-delay timer flushes one message per neighbor
after every delivery scheduled for that instant has been processed.  dbf
sends immediately; its message traces are pinned by tests.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .graph import SUM_EPS
from .sim import Protocol

INF = math.inf


# ---------------------------------------------------------------------------
# table helpers shared by the link-state family


def link_key(a, b):
    return (a, b) if a < b else (b, a)


def live_adjacency(db):
    """{node: {neighbor: cost}} from {(head, tail): (cost, seq)} records.
    Records with infinite cost are tombstones and carry no edge."""
    adj = {}
    for (a, b), (cost, _seq) in db.items():
        if math.isfinite(cost):
            adj.setdefault(a, {})[b] = cost
            adj.setdefault(b, {})[a] = cost
    return adj


def table_distances(adj, src):
    """Dijkstra over an adjacency dict.  Ties keep the lowest parent so
    every holder of the same table derives the same tree."""
    if src not in adj:
        return {src: 0.0}
    dist = {src: 0.0}
    parent = {src: None}
    done = set()
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v in sorted(adj.get(u, {})):
            nd = d + adj[u][v]
            if v not in dist or nd < dist[v] - SUM_EPS:
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
            elif abs(nd - dist[v]) <= SUM_EPS and v not in done and u < parent[v]:
                parent[v] = u
    return dist


def table_next_hops(adj, origin):
    """Next hop per destination: the lowest-id neighbor sitting on some
    shortest path.  Derived from distances alone, so two nodes agreeing
    on the topology agree on every hop choice."""
    if origin not in adj:
        return {}
    dist_self = table_distances(adj, origin)
    nbrs = sorted(adj[origin])
    nbr_dist = {y: table_distances(adj, y) for y in nbrs}
    hops = {}
    for dest, dd in dist_self.items():
        if dest == origin:
            continue
        for y in nbrs:
            dy = nbr_dist[y].get(dest)
            if dy is None:
                continue
            if abs(adj[origin][y] + dy - dd) <= SUM_EPS:
                hops[dest] = y
                break
    return hops


def sink_path(adj, dist_to_dest, src, dest):
    """Walk the lowest-id-on-a-shortest-path rule from src to dest.
    dist_to_dest maps node -> distance to dest.  None when unreachable."""
    if src not in dist_to_dest:
        return None
    path = [src]
    cur = src
    while cur != dest:
        nxt = None
        for y in sorted(adj.get(cur, {})):
            dy = dist_to_dest.get(y)
            if dy is None:
                continue
            if abs(adj[cur][y] + dy - dist_to_dest[cur]) <= SUM_EPS:
                nxt = y
                break
        if nxt is None or len(path) > len(dist_to_dest):
            return None
        path.append(nxt)
        cur = nxt
    return path


@dataclass
class LoopCheck:
    acyclic: bool
    cycle: list


def check_loop_freedom(routing_view, destination):
    """Walk the successor graph for one destination; find any cycle.

    routing_view: {node: {dest: successor}} as returned by
    Simulator.routing_view().  The destination itself terminates walks.
    """
    succ = {}
    for node, table in routing_view.items():
        nxt = table.get(destination)
        if node != destination and nxt is not None:
            succ[node] = nxt
    state = {}
    for start in sorted(succ):
        if state.get(start):
            continue
        chain = []
        cur = start
        while True:
            if cur == destination or state.get(cur) == 2 or cur not in succ:
                break
            if state.get(cur) == 1:
                cycle = chain[chain.index(cur):]
                return LoopCheck(False, cycle)
            state[cur] = 1
            chain.append(cur)
            cur = succ[cur]
        for n in chain:
            state[n] = 2
    return LoopCheck(True, [])


# ---------------------------------------------------------------------------
# distributed Bellman-Ford


class DbfNode(Protocol):
    """Plain distance vectors.  No path information, so after a
    disconnection the stale-route bounce runs until the infinity cap."""

    def __init__(self, node_id, infinity_cap=100.0):
        self.id = node_id
        self.cap = float(infinity_cap)
        self.table = {}        # dest -> [dist, successor]
        self.reported = {}     # neighbor -> {dest: dist}

    def export_state(self):
        return {"table": {d: tuple(v) for d, v in self.table.items()}}

    def routes(self):
        return {d: v[1] for d, v in self.table.items() if v[1] is not None}

    def distances(self):
        return {d: v[0] for d, v in self.table.items() if math.isfinite(v[0])}

    def _known_dests(self, api):
        dests = {self.id}
        dests.update(api.neighbors())
        dests.update(self.table)
        for vec in self.reported.values():
            dests.update(vec)
        return sorted(dests)

    def _recompute(self, api):
        """Relax every destination; returns entries whose distance moved."""
        changed = []
        for j in self._known_dests(api):
            if j == self.id:
                continue
            best, succ = INF, None
            for k in api.neighbors():
                via = 0.0 if j == k else self.reported.get(k, {}).get(j, INF)
                d = api.link_cost(k) + via
                if d < best - SUM_EPS:
                    best, succ = d, k
            if best >= self.cap:
                best, succ = INF, None
            old = self.table.get(j)
            if old is None or old[0] != best:
                self.table[j] = [best, succ]
                changed.append((j, best))
            else:
                old[1] = succ
        return changed

    def _announce(self, api, entries, only=None):
        if not entries:
            return
        targets = [only] if only is not None else api.neighbors()
        for k in targets:
            api.send(k, {"vector": list(entries)}, mtype="dbf-update")

    def on_start(self, api):
        self.table[self.id] = [0.0, None]
        changed = self._recompute(api)
        full = sorted((j, v[0]) for j, v in self.table.items())
        for k in api.neighbors():
            api.send(k, {"vector": full}, mtype="dbf-update")
        # boot vectors already carried everything; only announce beyond them
        extra = [e for e in changed if e not in full]
        self._announce(api, extra)

    def on_message(self, api, sender, payload):
        vec = self.reported.setdefault(sender, {})
        for j, dist in payload["vector"]:
            vec[j] = dist
        self._announce(api, self._recompute(api))

    def on_link_down(self, api, neighbor):
        self.reported.pop(neighbor, None)
        self._announce(api, self._recompute(api))

    def on_link_up(self, api, neighbor):
        self.reported.setdefault(neighbor, {})
        full = sorted((j, v[0]) for j, v in self.table.items())
        api.send(neighbor, {"vector": full}, mtype="dbf-update")
        self._announce(api, self._recompute(api))

    def on_link_cost_change(self, api, neighbor, new_cost):
        self._announce(api, self._recompute(api))


# ---------------------------------------------------------------------------
# per-instant update batching


class _BatchingNode(Protocol):
    """Collects outgoing updates per time instant.  Handlers call
    _schedule(api); the zero-delay timer fires after every delivery at
    the current instant (the event queue is FIFO within a timestamp) and
    _flush sends at most one message per neighbor."""

    def __init__(self):
        self._flush_pending = False

    def _schedule(self, api):
        if not self._flush_pending:
            self._flush_pending = True
            api.set_timer(0.0, "flush")

    def on_timer(self, api, data):
        if data != "flush" or not self._flush_pending:
            return
        self._flush_pending = False
        self._flush(api)

    def _flush(self, api):
        raise NotImplementedError


# ---------------------------------------------------------------------------
# link-state flooding


class IlsNode(_BatchingNode):
    """Topology broadcast: every node stamps records for its own adjacent
    links and relays whatever arrives newer than its database.  Both
    endpoints of a link stamp the identical record, so the slower stamp
    is everywhere discarded as a duplicate and one logical record per
    event crosses each link at most twice."""

    def __init__(self, node_id):
        super().__init__()
        self.id = node_id
        self.db = {}           # (head, tail) -> (cost, seq), head < tail
        self._pending = {}     # key -> senders already holding the record
        self._sync = set()     # neighbors owed a full database copy
        self._version = 0
        self._derived = (-1, {}, {})

    def export_state(self):
        return {"db": dict(self.db)}

    def _derive(self):
        if self._derived[0] != self._version:
            adj = live_adjacency(self.db)
            hops = table_next_hops(adj, self.id)
            dist = table_distances(adj, self.id)
            dist.pop(self.id, None)
            self._derived = (self._version, dist, hops)
        return self._derived

    def routes(self):
        return dict(self._derive()[2])

    def distances(self):
        return dict(self._derive()[1])

    def _stamp(self, neighbor, cost):
        key = link_key(self.id, neighbor)
        held = self.db.get(key)
        seq = held[1] + 1 if held else 1
        self.db[key] = (float(cost), seq)
        self._pending[key] = set()
        self._version += 1

    def on_start(self, api):
        for k in api.neighbors():
            self._stamp(k, api.link_cost(k))
        self._schedule(api)

    def on_message(self, api, sender, payload):
        for h, t, cost, seq in payload["records"]:
            key = (h, t)
            held = self.db.get(key)
            if held is None or seq > held[1]:
                self.db[key] = (cost, seq)
                self._pending[key] = {sender}
                self._version += 1
            elif seq == held[1] and key in self._pending:
                # the same copy crossed ours on the wire; no need to echo
                self._pending[key].add(sender)
        if self._pending or self._sync:
            self._schedule(api)

    def on_link_up(self, api, neighbor):
        self._stamp(neighbor, api.link_cost(neighbor))
        self._sync.add(neighbor)
        self._schedule(api)

    def on_link_down(self, api, neighbor):
        self._stamp(neighbor, INF)
        self._schedule(api)

    def on_link_cost_change(self, api, neighbor, new_cost):
        held = self.db.get(link_key(self.id, neighbor))
        if held is not None and held[0] == float(new_cost):
            return     # refresh to the same value carries no news
        self._stamp(neighbor, new_cost)
        self._schedule(api)

    def _flush(self, api):
        neighbors = api.neighbors()
        rows = {}
        for key in sorted(self._pending):
            rec = self.db.get(key)
            if rec is None:
                continue
            exclude = self._pending[key]
            for n in neighbors:
                if n in exclude or n in self._sync:
                    continue
                rows.setdefault(n, []).append((key[0], key[1], rec[0], rec[1]))
        for n in sorted(self._sync):
            if n not in neighbors:
                continue
            full = [(h, t, c, s) for (h, t), (c, s) in sorted(self.db.items())]
            if full:
                api.send(n, {"records": full}, mtype="ils-update")
                api.count("record-transmissions", len(full))
        for n, recs in sorted(rows.items()):
            api.send(n, {"records": recs}, mtype="ils-update")
            api.count("record-transmissions", len(recs))
        self._pending.clear()
        self._sync.clear()


# ---------------------------------------------------------------------------
# loop-free path-finding distance vectors


class _LpaEntry:
    __slots__ = ("dist", "succ", "pred", "fd")

    def __init__(self):
        self.dist = INF
        self.succ = None
        self.pred = None
        self.fd = INF      # smallest distance announced since the last cycle

    def snapshot(self):
        return (self.dist, self.succ, self.pred, self.fd)


class LpaNode(_BatchingNode):
    """Distance vectors that carry the predecessor (second-to-last hop).

    The predecessor chains let a node reconstruct the full path a
    neighbor is offering and reject any that run through itself, and a
    feasibility check (the neighbor's reported distance must undercut
    the smallest distance this node has announced since its last query
    cycle) blocks the successor changes that could close a loop.  When
    no neighbor passes the check the node advertises an infinite
    distance as a query to every neighbor, waits for all replies, and
    only then picks anew.  Queries are answered with the receiver's
    current distance and are never forwarded, so a cycle settles in one
    hop per neighbor.
    """

    def __init__(self, node_id):
        super().__init__()
        self.id = node_id
        self.tables = {}       # neighbor -> {dest: (dist, pred)}
        self.entries = {}      # dest -> _LpaEntry
        self.wait = {}         # dest -> set of neighbors owing replies
        self._announced = {}   # neighbor -> {dest: (dist, pred) it holds}
        self._dirty = set()    # dests to reconsider at flush
        self._queries = set()  # dests whose query goes out at flush
        self._replies = {}     # neighbor -> [dest, ...]
        self._sync = set()     # neighbors owed the full table

    # -- inspection --

    def export_state(self):
        return {"entries": {d: e.snapshot() for d, e in self.entries.items()},
                "wait": {d: sorted(p) for d, p in self.wait.items()}}

    def routes(self):
        return {d: e.succ for d, e in self.entries.items() if e.succ is not None}

    def distances(self):
        return {d: e.dist for d, e in self.entries.items()
                if math.isfinite(e.dist)}

    # -- candidate evaluation --

    def _path_clean(self, k, j):
        """Does neighbor k's offered path to j avoid this node?  Walk the
        predecessor chain in k's reported table back from j to k."""
        if j == k:
            return True
        table = self.tables.get(k, {})
        cur = j
        seen = set()
        while True:
            if cur in seen:
                return False
            seen.add(cur)
            ent = table.get(cur)
            if ent is None or not math.isfinite(ent[0]):
                return False
            pred = ent[1]
            if pred is None or pred == self.id:
                return False
            if pred == k:
                return True
            cur = pred

    def _candidates(self, api, j):
        out = []
        for k in api.neighbors():
            if j == k:
                reported, pred = 0.0, self.id
            else:
                ent = self.tables.get(k, {}).get(j)
                if ent is None or not math.isfinite(ent[0]):
                    continue
                if not self._path_clean(k, j):
                    continue
                reported, pred = ent
            out.append((api.link_cost(k) + reported, k, reported, pred))
        return out

    @staticmethod
    def _best(cands):
        best = min(c[0] for c in cands)
        pool = [c for c in cands if c[0] <= best + SUM_EPS]
        return min(pool, key=lambda c: c[1])

    def _select(self, api, j):
        """Re-evaluate one destination outside a query cycle."""
        entry = self.entries.setdefault(j, _LpaEntry())
        cands = self._candidates(api, j)
        feasible = [c for c in cands if c[2] < entry.fd]
        if feasible:
            d, k, _rep, pred = self._best(feasible)
            if (entry.dist, entry.succ, entry.pred) != (d, k, pred):
                entry.dist, entry.succ, entry.pred = d, k, pred
                entry.fd = min(entry.fd, d)
                self._dirty.add(j)
            return
        if not math.isfinite(entry.dist):
            return     # still unreachable; nothing new to say
        # route must change and nothing passes the feasibility test:
        # advertise infinity and hold a query cycle
        entry.dist, entry.succ, entry.pred = INF, None, None
        pending = set(api.neighbors())
        if pending:
            self.wait[j] = pending
            self._queries.add(j)
        else:
            self._finish_cycle(api, j)

    def _finish_cycle(self, api, j):
        """All replies are in; choose freely and reset feasible distance."""
        self.wait.pop(j, None)
        entry = self.entries.setdefault(j, _LpaEntry())
        cands = self._candidates(api, j)
        if cands:
            d, k, _rep, pred = self._best(cands)
            entry.dist, entry.succ, entry.pred, entry.fd = d, k, pred, d
        else:
            entry.dist, entry.succ, entry.pred, entry.fd = INF, None, None, INF
        self._dirty.add(j)

    def _reevaluate_all(self, api):
        dests = set(self.entries)
        for table in self.tables.values():
            dests.update(table)
        dests.update(api.neighbors())
        dests.discard(self.id)
        for j in sorted(dests):
            if j not in self.wait:
                self._select(api, j)

    def _finish_ready(self, api):
        for j in sorted(self.wait):
            if not self.wait[j]:
                self._finish_cycle(api, j)

    # -- kernel hooks --

    def on_start(self, api):
        self.entries[self.id] = _LpaEntry()
        self.entries[self.id].dist = 0.0
        self.entries[self.id].fd = 0.0
        self._reevaluate_all(api)
        self._schedule(api)

    def on_message(self, api, sender, payload):
        if sender not in api.neighbors():
            api.count("lpa-protocol-errors")
            return
        queried = []
        for j, dist, pred, flag in payload["entries"]:
            table = self.tables.setdefault(sender, {})
            if flag == "query":
                table[j] = (INF, None)
                queried.append(j)
            else:
                table[j] = (dist, pred)
                if flag == "reply" and j in self.wait:
                    self.wait[j].discard(sender)
        self._finish_ready(api)
        self._reevaluate_all(api)
        if queried:
            self._replies.setdefault(sender, []).extend(queried)
        self._schedule(api)

    def on_link_down(self, api, neighbor):
        self.tables.pop(neighbor, None)
        self._replies.pop(neighbor, None)
        self._announced.pop(neighbor, None)
        for j in sorted(self.wait):
            self.wait[j].discard(neighbor)     # implicit reply
        self._finish_ready(api)
        self._reevaluate_all(api)
        self._schedule(api)

    def on_link_up(self, api, neighbor):
        self.tables.setdefault(neighbor, {})
        self._announced[neighbor] = {}     # a rebooted peer holds nothing
        self._sync.add(neighbor)
        self._reevaluate_all(api)
        self._schedule(api)

    def on_link_cost_change(self, api, neighbor, new_cost):
        self._reevaluate_all(api)
        self._schedule(api)

    # -- outgoing --

    def _path_nodes(self, j):
        """Nodes on this node's chosen path to j, walked along its own
        predecessor entries.  Empty when the chain is broken; a row is
        then sent rather than wrongly withheld."""
        nodes = set()
        cur = j
        while cur is not None and cur != self.id:
            if cur in nodes or len(nodes) > len(self.entries):
                return set()
            nodes.add(cur)
            e = self.entries.get(cur)
            if e is None or not math.isfinite(e.dist):
                return set()
            cur = e.pred
        return nodes

    def _flush(self, api):
        neighbors = api.neighbors()
        updates = []
        for j in sorted(self._dirty if not self._sync
                        else set(self._dirty) | set(self.entries)):
            if j in self._queries or j == self.id:
                continue
            e = self.entries.get(j)
            cur = (e.dist, e.pred) if e is not None else (INF, None)
            updates.append((j, cur, self._path_nodes(j)))
        queries = [(j, INF, None, "query") for j in sorted(self._queries)]
        for n in neighbors:
            held = self._announced.setdefault(n, {})
            batch = []
            for j, cur, path in updates:
                # a neighbor on the path never uses this route (it would
                # pass through itself), so the row would only be noise
                if n in path:
                    continue
                if held.get(j, (INF, None)) != cur:
                    batch.append((j, cur[0], cur[1], "update"))
                    held[j] = cur
            batch += queries
            for j, _inf, _none, _flag in queries:
                held[j] = (INF, None)
            for j in self._replies.get(n, ()):
                e = self.entries.get(j)
                dist = e.dist if e is not None else INF
                pred = e.pred if e is not None else None
                batch.append((j, dist, pred, "reply"))
            if batch:
                api.send(n, {"entries": batch}, mtype="lpa-update")
        self._dirty.clear()
        self._queries.clear()
        self._replies.clear()
        self._sync.clear()


# ---------------------------------------------------------------------------
# link-vector exchange


class LvaNode(_BatchingNode):
    """Partial topology dissemination: a node reports to its neighbors
    only the links its own preferred paths use (one add per link entering
    the set, one delete per link leaving it) and remembers who reported
    what, purging links nobody vouches for.  Deletes are records with
    infinite cost: a delete after a local failure carries the freshly
    bumped stamp and so propagates the failure along the chain of nodes
    that used the link, while a delete for a link that merely dropped out
    of the preferred paths carries the held stamp and changes no tables
    elsewhere.

    Reports are tracked per neighbor, so a row goes out only when it is
    news to that neighbor: a membership change is always news, but a pure
    cost refresh the neighbor itself delivered this instant is not, and
    neither is a delete answering the neighbor's own delete."""

    def __init__(self, node_id):
        super().__init__()
        self.id = node_id
        self.db = {}           # (head, tail) -> (cost, seq), head < tail
        self.reporters = {}    # key -> set of neighbors reporting the link
        self.last_report = {}  # key -> (cost, seq), the current report
        self._told = {}        # neighbor -> {key: (cost, seq) it was sent}
        self._del_from = {}    # key -> senders whose delete triggered ours
        self._add_from = {}    # key -> senders already holding the record
        self._content_dirty = False
        self._version = 0
        self._derived = (-1, {}, {})

    def export_state(self):
        return {"db": dict(self.db),
                "reporters": {k: sorted(v) for k, v in self.reporters.items()
                              if v},
                "report": dict(self.last_report)}

    def _derive(self):
        if self._derived[0] != self._version:
            adj = live_adjacency(self.db)
            hops = table_next_hops(adj, self.id)
            dist = table_distances(adj, self.id)
            dist.pop(self.id, None)
            self._derived = (self._version, dist, hops)
        return self._derived

    def routes(self):
        return dict(self._derive()[2])

    def distances(self):
        return dict(self._derive()[1])

    # -- database --

    def _stamp(self, neighbor, cost):
        key = link_key(self.id, neighbor)
        held = self.db.get(key)
        seq = held[1] + 1 if held else 1
        self.db[key] = (float(cost), seq)
        self._content_dirty = True
        self._version += 1

    def _merge(self, key, cost, seq):
        held = self.db.get(key)
        if held is None or seq > held[1]:
            self.db[key] = (cost, seq)
            self._content_dirty = True
            self._version += 1
            return
        if seq == held[1] and held[0] == INF and math.isfinite(cost):
            # a live report at the same stamp beats the delete marker we kept
            self.db[key] = (cost, seq)
            self._content_dirty = True
            self._version += 1

    def _source_graph(self):
        """Union of the links on this node's preferred paths, walked with
        the shared next-hop rule so the reported set matches what the
        routing table will actually use."""
        adj = live_adjacency(self.db)
        links = set()
        for dest in sorted(adj):
            if dest == self.id:
                continue
            dist = table_distances(adj, dest)
            if self.id not in dist:
                continue
            path = sink_path(adj, dist, self.id, dest)
            if path is None:
                continue
            for a, b in zip(path, path[1:]):
                links.add(link_key(a, b))
        return links

    # -- kernel hooks --

    def on_start(self, api):
        for k in api.neighbors():
            self._stamp(k, api.link_cost(k))
        self._schedule(api)

    def on_message(self, api, sender, payload):
        for h, t, cost, seq in payload.get("adds", ()):
            key = (h, t)
            self.reporters.setdefault(key, set()).add(sender)
            self._merge(key, cost, seq)
            if self.db.get(key) == (cost, seq):
                self._add_from.setdefault(key, set()).add(sender)
        for h, t, cost, seq in payload.get("dels", ()):
            key = (h, t)
            self.reporters.setdefault(key, set()).discard(sender)
            self._del_from.setdefault(key, set()).add(sender)
            self._merge(key, INF, seq)
        self._schedule(api)

    def on_link_up(self, api, neighbor):
        self._stamp(neighbor, api.link_cost(neighbor))
        self._sync.add(neighbor)
        self._schedule(api)

    def on_link_down(self, api, neighbor):
        self._stamp(neighbor, INF)
        for holders in self.reporters.values():
            holders.discard(neighbor)
        self._schedule(api)

    def on_link_cost_change(self, api, neighbor, new_cost):
        held = self.db.get(link_key(self.id, neighbor))
        if held is not None and held[0] == float(new_cost):
            return
        self._stamp(neighbor, new_cost)
        self._schedule(api)

    # -- outgoing --

    def _flush(self, api):
        if self._content_dirty:
            report = {key: self.db[key] for key in self._source_graph()}
            self._content_dirty = False
        else:
            report = dict(self.last_report)
        adds = [(h, t, c, s) for (h, t), (c, s) in sorted(report.items())
                if self.last_report.get((h, t)) != (c, s)]
        dels = []
        for key in sorted(self.last_report):
            if key in report:
                continue
            held = self.db.get(key, self.last_report[key])
            dels.append((key[0], key[1], INF, held[1]))
        neighbors = api.neighbors()
        for n in sorted(self._sync):
            if n not in neighbors:
                continue
            full = [(h, t, c, s) for (h, t), (c, s) in sorted(report.items())]
            if full:
                api.send(n, {"adds": full, "dels": []}, mtype="lva-update")
                api.count("record-transmissions", len(full))
        if adds or dels:
            for n in neighbors:
                if n in self._sync:
                    continue
                # whoever sent us a record or a delete already holds it;
                # skip the echo so each report travels a link once
                my_adds = [a for a in adds
                           if n not in self._add_from.get((a[0], a[1]), ())]
                my_dels = [d for d in dels
                           if n not in self._del_from.get((d[0], d[1]), ())]
                if my_adds or my_dels:
                    api.send(n, {"adds": my_adds, "dels": my_dels},
                             mtype="lva-update")
                    api.count("record-transmissions",
                              len(my_adds) + len(my_dels))
        self.last_report = report
        self._sync.clear()
        self._del_from.clear()
        self._add_from.clear()
        # forget links nobody vouches for; own adjacent links keep their
        # stamps so a revived link continues its sequence numbers
        for key in sorted(self.db):
            if key in report or self.id in key:
                continue
            if self.reporters.get(key):
                continue
            del self.db[key]
            self.reporters.pop(key, None)
            self._version += 1


PROTOCOLS = {"dbf": DbfNode, "ils": IlsNode, "lpa": LpaNode, "lva": LvaNode}


def protocol_factory(name, **params):
    """factory(node_id) for a protocol by short name."""
    if name not in PROTOCOLS:
        raise ValueError("unknown protocol %r" % (name,))
    cls = PROTOCOLS[name]

    def make(node_id):
        return cls(node_id, **params)

    return make
