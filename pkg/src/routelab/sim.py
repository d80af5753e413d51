"""Deterministic discrete-event kernel shared by every protocol here.

Events are processed in (time, sequence) order; the sequence number is
assigned at scheduling time, so replaying the same scenario gives the
same trace bit for bit.  Message transfer on a link takes the link's
delay (or exactly 1.0 in unit-delay mode) and each directed link is
FIFO, which follows from the ordering because per-link delay is
constant between topology events.

A message crossing a link that fails before delivery is lost and
counted; so is a message sent on a link that is already down.  Node
failure is modeled as the simultaneous failure of every incident link.
"""

from __future__ import annotations

import copy
import heapq
import json
import math
from dataclasses import dataclass, field

from .graph import NetworkGraph, edge_key

EVENT_KINDS = ("message", "link-up", "link-down", "link-cost-change",
               "node-up", "node-down", "timer")


class SimError(ValueError):
    """Bad scenario input or out-of-order injection."""


@dataclass(frozen=True)
class Event:
    time: float
    seq: int
    kind: str
    payload: dict

    def sort_key(self):
        return (self.time, self.seq)


class EventQueue:
    """Heap of events keyed by (time, seq); seq increases monotonically."""

    def __init__(self):
        self._heap = []
        self._next_seq = 0

    def push(self, time, kind, payload):
        if kind not in EVENT_KINDS:
            raise SimError("unknown event kind %r" % (kind,))
        ev = Event(float(time), self._next_seq, kind, payload)
        self._next_seq += 1
        heapq.heappush(self._heap, (ev.time, ev.seq, ev))
        return ev

    def pop(self):
        return heapq.heappop(self._heap)[2]

    def __len__(self):
        return len(self._heap)

    def peek_time(self):
        return self._heap[0][0] if self._heap else None


@dataclass
class _Link:
    cost: float
    delay: float
    capacity: float
    up: bool = True
    epoch: int = 0


class LiveTopology:
    """Mutable view of the network as the scenario reshapes it."""

    def __init__(self, graph):
        self.node_up = {n: True for n in graph.nodes()}
        self.links = {}
        for u, v, attrs in graph.edges():
            self.links[(u, v)] = _Link(attrs.cost, attrs.delay, attrs.capacity)

    def link(self, u, v):
        return self.links.get(edge_key(u, v))

    def usable(self, u, v):
        ln = self.link(u, v)
        return (ln is not None and ln.up
                and self.node_up.get(u, False) and self.node_up.get(v, False))

    def neighbors(self, node):
        out = []
        for (a, b), ln in self.links.items():
            if node == a and self.usable(a, b):
                out.append(b)
            elif node == b and self.usable(a, b):
                out.append(a)
        return sorted(out)

    def add_link(self, u, v, cost, delay, capacity):
        key = edge_key(u, v)
        if key in self.links:
            raise SimError("link %s already exists" % (key,))
        self.node_up.setdefault(u, True)
        self.node_up.setdefault(v, True)
        self.links[key] = _Link(cost, delay, capacity)

    def as_network_graph(self):
        """Snapshot of the currently usable topology."""
        g = NetworkGraph()
        for n, up in self.node_up.items():
            if up:
                g.add_node(n)
        for (u, v), ln in sorted(self.links.items()):
            if self.usable(u, v):
                g.add_edge(u, v, ln.cost, ln.delay, ln.capacity)
        return g


@dataclass
class MetricsLog:
    """Counters and outcomes for one simulation run.

    Message counters only move for events at or after measure_from, so a
    scenario can boot quietly and measure a later disturbance.
    """

    measure_from: float = 0.0
    events_processed: int = 0
    messages_sent: int = 0
    messages_delivered: int = 0
    messages_dropped: int = 0
    sent_by_type: dict = field(default_factory=dict)
    counters: dict = field(default_factory=dict)
    loop_violations: int = 0
    quiescent: bool = False
    end_time: float = 0.0
    convergence_time: float = 0.0
    latencies: list = field(default_factory=list)

    def bump(self, name, amount=1):
        self.counters[name] = self.counters.get(name, 0) + amount

    def count_send(self, mtype):
        self.messages_sent += 1
        self.sent_by_type[mtype] = self.sent_by_type.get(mtype, 0) + 1

    def to_dict(self):
        return {
            "events_processed": self.events_processed,
            "messages_sent": self.messages_sent,
            "messages_delivered": self.messages_delivered,
            "messages_dropped": self.messages_dropped,
            "sent_by_type": dict(sorted(self.sent_by_type.items())),
            "counters": dict(sorted(self.counters.items())),
            "loop_violations": self.loop_violations,
            "quiescent": self.quiescent,
            "end_time": self.end_time,
            "convergence_time": self.convergence_time,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


class NodeApi:
    """What a protocol instance is allowed to touch."""

    def __init__(self, sim, node):
        self._sim = sim
        self.node_id = node

    def now(self):
        return self._sim.clock

    def neighbors(self):
        return self._sim.topology.neighbors(self.node_id)

    def link_cost(self, neighbor):
        ln = self._sim.topology.link(self.node_id, neighbor)
        if ln is None:
            raise SimError("no link %d-%d" % (self.node_id, neighbor))
        return ln.cost

    def link_delay(self, neighbor):
        ln = self._sim.topology.link(self.node_id, neighbor)
        if ln is None:
            raise SimError("no link %d-%d" % (self.node_id, neighbor))
        return ln.delay

    def send(self, neighbor, payload, mtype="msg"):
        self._sim.send_message(self.node_id, neighbor, payload, mtype)

    def set_timer(self, delay, payload):
        self._sim.queue.push(self._sim.clock + delay, "timer",
                             {"node": self.node_id, "data": payload})

    def count(self, name, amount=1):
        if self._sim.clock >= self._sim.metrics.measure_from:
            self._sim.metrics.bump(name, amount)


class Protocol:
    """Base class: per-node state machine driven by the kernel."""

    def on_start(self, api):
        pass

    def on_message(self, api, sender, payload):
        pass

    def on_link_up(self, api, neighbor):
        pass

    def on_link_down(self, api, neighbor):
        pass

    def on_link_cost_change(self, api, neighbor, new_cost):
        pass

    def on_timer(self, api, data):
        pass

    def export_state(self):
        return {}

    def routes(self):
        """destination -> successor mapping for loop checking."""
        return {}

    def distances(self):
        return {}


class Simulator:
    """Event loop binding a LiveTopology to per-node protocol instances."""

    def __init__(self, graph, protocol_factory, *, delay_mode="unit",
                 horizon=None, measure_from=0.0, invariant_hook=None):
        if delay_mode not in ("unit", "edge"):
            raise SimError("delay_mode must be 'unit' or 'edge'")
        self.graph = graph
        self.topology = LiveTopology(graph)
        self.delay_mode = delay_mode
        self.horizon = horizon
        self.queue = EventQueue()
        self.clock = 0.0
        self.metrics = MetricsLog(measure_from=measure_from)
        self.invariant_hook = invariant_hook
        self.protocol_factory = protocol_factory
        self.nodes = {}
        self.apis = {}
        for n in graph.nodes():
            self.nodes[n] = protocol_factory(n)
            self.apis[n] = NodeApi(self, n)
        self._started = False
        self._any_measured_event = False

    # -- scheduling -----------------------------------------------------

    def inject(self, time, kind, payload):
        if time < self.clock:
            raise SimError("cannot inject event at %r before clock %r"
                           % (time, self.clock))
        return self.queue.push(time, kind, payload)

    def send_message(self, src, dst, payload, mtype="msg"):
        measured = self.clock >= self.metrics.measure_from
        if measured:
            self.metrics.count_send(mtype)
        ln = self.topology.link(src, dst)
        if ln is None or not self.topology.usable(src, dst):
            if measured:
                self.metrics.messages_dropped += 1
            return
        delay = 1.0 if self.delay_mode == "unit" else ln.delay
        self.queue.push(self.clock + delay, "message",
                        {"src": src, "dst": dst, "payload": payload,
                         "mtype": mtype, "epoch": ln.epoch,
                         "measured": measured})

    # -- run loop ---------------------------------------------------------

    def start(self):
        if self._started:
            return
        self._started = True
        for n in sorted(self.nodes):
            if self.topology.node_up[n]:
                self.nodes[n].on_start(self.apis[n])

    def run(self):
        self.start()
        while len(self.queue):
            if self.horizon is not None and self.queue.peek_time() > self.horizon:
                self.metrics.quiescent = False
                self.metrics.end_time = self.clock
                return self.metrics
            ev = self.queue.pop()
            self.clock = ev.time
            self._dispatch(ev)
            self.metrics.events_processed += 1
            if ev.time >= self.metrics.measure_from:
                self._any_measured_event = True
                self.metrics.end_time = ev.time
            if self.invariant_hook is not None:
                self.invariant_hook(self, ev)
        self.metrics.quiescent = True
        if self._any_measured_event:
            self.metrics.convergence_time = (self.metrics.end_time
                                             - self.metrics.measure_from)
        return self.metrics

    def _dispatch(self, ev):
        kind = ev.kind
        p = ev.payload
        if kind == "message":
            self._deliver(ev)
        elif kind == "link-down":
            self._link_down(p["u"], p["v"])
        elif kind == "link-up":
            self._link_up(p)
        elif kind == "link-cost-change":
            self._link_cost_change(p["u"], p["v"], p["cost"])
        elif kind == "node-down":
            self._node_down(p["node"])
        elif kind == "node-up":
            self._node_up(p["node"])
        elif kind == "timer":
            node = p["node"]
            if self.topology.node_up.get(node, False):
                self.nodes[node].on_timer(self.apis[node], p["data"])

    def _deliver(self, ev):
        p = ev.payload
        src, dst = p["src"], p["dst"]
        ln = self.topology.link(src, dst)
        alive = (ln is not None and ln.up and ln.epoch == p["epoch"]
                 and self.topology.node_up.get(src, False)
                 and self.topology.node_up.get(dst, False))
        measured = self.clock >= self.metrics.measure_from and p["measured"]
        if not alive:
            if measured:
                self.metrics.messages_dropped += 1
            return
        if measured:
            self.metrics.messages_delivered += 1
        self.nodes[dst].on_message(self.apis[dst], src, p["payload"])

    def _link_down(self, u, v):
        ln = self.topology.link(u, v)
        if ln is None or not ln.up:
            return
        was_usable = self.topology.usable(u, v)
        ln.up = False
        ln.epoch += 1
        if was_usable:
            for a, b in ((u, v), (v, u)):
                if self.topology.node_up.get(a, False):
                    self.nodes[a].on_link_down(self.apis[a], b)

    def _link_up(self, p):
        u, v = p["u"], p["v"]
        ln = self.topology.link(u, v)
        if ln is None:
            self.topology.add_link(u, v, p["cost"], p.get("delay", 1.0),
                                   p.get("capacity", 1.0))
            ln = self.topology.link(u, v)
            ln.up = True
        else:
            if ln.up:
                return
            ln.up = True
            if "cost" in p:
                ln.cost = p["cost"]
        if self.topology.usable(u, v):
            for a, b in ((u, v), (v, u)):
                self.nodes[a].on_link_up(self.apis[a], b)

    def _link_cost_change(self, u, v, cost):
        ln = self.topology.link(u, v)
        if ln is None:
            raise SimError("cost change on unknown link %d-%d" % (u, v))
        ln.cost = float(cost)
        if self.topology.usable(u, v):
            for a, b in ((u, v), (v, u)):
                self.nodes[a].on_link_cost_change(self.apis[a], b, float(cost))

    def _node_down(self, node):
        if not self.topology.node_up.get(node, False):
            return
        neighbors = self.topology.neighbors(node)
        self.topology.node_up[node] = False
        # every incident link fails at once; fail the links first so the
        # neighbor callbacks observe the post-failure topology
        for nbr in neighbors:
            ln = self.topology.link(node, nbr)
            ln.epoch += 1
        for nbr in neighbors:
            self.nodes[nbr].on_link_down(self.apis[nbr], node)

    def _node_up(self, node):
        if self.topology.node_up.get(node, False):
            return
        self.topology.node_up[node] = True
        # fresh boot: the node restarts with empty protocol state
        self.nodes[node] = self.protocol_factory(node)
        self.nodes[node].on_start(self.apis[node])
        for nbr in self.topology.neighbors(node):
            self.nodes[node].on_link_up(self.apis[node], nbr)
            self.nodes[nbr].on_link_up(self.apis[nbr], node)

    # -- inspection ------------------------------------------------------

    def snapshot(self):
        """Deep copy of every node's exported state; safe to keep."""
        return {n: copy.deepcopy(self.nodes[n].export_state())
                for n in sorted(self.nodes)}

    def routing_view(self):
        """Live successor maps, node -> {dest: successor}.  Read-only."""
        return {n: self.nodes[n].routes() for n in sorted(self.nodes)
                if self.topology.node_up.get(n, False)}


def schedule_scenario_events(sim, events):
    """Push a scenario's event list, validating shape early."""
    for i, ev in enumerate(events):
        if "time" not in ev or "kind" not in ev:
            raise SimError("event %d needs 'time' and 'kind'" % i)
        payload = {k: v for k, v in ev.items() if k not in ("time", "kind")}
        sim.inject(ev["time"], ev["kind"], payload)
