"""Repeater network model: nodes own registers, links carry EPR pairs,
classical bits travel only over declared channels, and every action is
appended to an event trace that can be audited for locality afterwards."""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ChannelError,
    ImpossibleBranch,
    LinkError,
    LocalityError,
    StateError,
    TopologyError,
)
from .stabilizer import StabilizerTableau, stab_make_state
from .statevec import Forced, Random, StateVector, make_state, subset_fidelity

BACKENDS = ("sv", "stab")
INIT_KETS = ("0", "1", "+")
NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


# topology


@dataclass(frozen=True)
class Topology:
    nodes: tuple[str, ...] = ()
    owners: dict = field(default_factory=dict)  # label -> node, declaration order
    links: tuple[tuple[str, str], ...] = ()
    channels: frozenset = frozenset()  # of frozenset({a, b})
    init: dict = field(default_factory=dict)  # label -> "0" | "1" | "+"

    @property
    def registers(self) -> list[str]:
        return list(self.owners)

    def has_channel(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.channels

    def neighbours(self, node: str) -> list[str]:
        return sorted(
            next(iter(ch - {node})) for ch in self.channels if node in ch
        )

    def validate(self) -> "Topology":
        seen = set()
        for node in self.nodes:
            if node in seen:
                raise TopologyError(f"duplicate node {node!r}")
            seen.add(node)
        for label, node in self.owners.items():
            if node not in seen:
                raise TopologyError(f"register {label!r} owned by unknown node {node!r}")
        linked = set()
        for a, b in self.links:
            for q in (a, b):
                if q not in self.owners:
                    raise TopologyError(f"link uses unknown register {q!r}")
                if q in linked:
                    raise TopologyError(f"register {q!r} is in two links")
                linked.add(q)
            if self.owners[a] == self.owners[b]:
                raise TopologyError(f"link {a}-{b} does not span two nodes")
        for ch in self.channels:
            if len(ch) != 2 or not ch <= seen:
                raise TopologyError(f"bad channel {sorted(ch)}")
        for label in self.init:
            if label not in self.owners:
                raise TopologyError(f"init of unknown register {label!r}")
            if label in linked:
                raise TopologyError(f"register {label!r} is both linked and initialized")
        return self


def parse_topology(text: str) -> Topology:
    """Parse the line-oriented topology format.

    Declarations: ``node <name>``, ``own <node> <label>...``,
    ``epr <label> <label>``, ``chan <node> <node>`` and ``init <label> <0|1|+>``.
    ``#`` starts a comment.
    """
    nodes: list[str] = []
    owners: dict[str, str] = {}
    links: list[tuple[str, str]] = []
    channels: set[frozenset] = set()
    init: dict[str, str] = {}

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]
        if not tokens:
            continue
        (kw, kcol), args = tokens[0], tokens[1:]

        def fail(msg, col=kcol):
            raise TopologyError(msg, lineno, col)

        for tok, col in args:
            if kw == "init" and tok in INIT_KETS and (tok, col) == args[-1]:
                continue
            if not NAME_RE.match(tok):
                fail(f"invalid name {tok!r}", col)
        if kw == "node":
            if len(args) != 1:
                fail("'node' takes exactly one name")
            name, col = args[0]
            if name in nodes:
                fail(f"duplicate node {name!r}", col)
            nodes.append(name)
        elif kw == "own":
            if len(args) < 2:
                fail("'own' takes a node and at least one register")
            (node, ncol), labels = args[0], args[1:]
            if node not in nodes:
                fail(f"unknown node {node!r}", ncol)
            for label, col in labels:
                if label in owners:
                    fail(f"register {label!r} already owned by {owners[label]!r}", col)
                owners[label] = node
        elif kw == "epr":
            if len(args) != 2:
                fail("'epr' takes exactly two registers")
            for label, col in args:
                if label not in owners:
                    fail(f"unknown register {label!r}", col)
                if any(label in link for link in links):
                    fail(f"register {label!r} is already linked", col)
                if label in init:
                    fail(f"register {label!r} already has an initial state", col)
            (a, _), (b, bcol) = args
            if owners[a] == owners[b]:
                fail(f"link {a}-{b} joins two registers of node {owners[a]!r}", bcol)
            links.append((a, b))
        elif kw == "chan":
            if len(args) != 2:
                fail("'chan' takes exactly two nodes")
            for node, col in args:
                if node not in nodes:
                    fail(f"unknown node {node!r}", col)
            (a, _), (b, bcol) = args
            if a == b:
                fail("channel endpoints must differ", bcol)
            channels.add(frozenset((a, b)))
        elif kw == "init":
            if len(args) != 2:
                fail("'init' takes a register and one of 0, 1, +")
            (label, lcol), (ket, kcol2) = args
            if label not in owners:
                fail(f"unknown register {label!r}", lcol)
            if ket not in INIT_KETS:
                fail(f"unknown initial state {ket!r}", kcol2)
            if any(label in link for link in links):
                fail(f"register {label!r} is linked and starts in |Psi+>", lcol)
            init[label] = ket
        else:
            fail(f"unknown declaration {kw!r}")

    return Topology(tuple(nodes), owners, tuple(links), frozenset(channels), init).validate()


def format_topology(topo: Topology) -> str:
    lines = [f"node {n}" for n in topo.nodes]
    for node in topo.nodes:
        labels = [q for q, owner in topo.owners.items() if owner == node]
        if labels:
            lines.append(f"own {node} {' '.join(labels)}")
    lines += [f"epr {a} {b}" for a, b in topo.links]
    lines += [f"chan {' '.join(sorted(ch))}" for ch in sorted(topo.channels, key=sorted)]
    lines += [f"init {q} {ket}" for q, ket in topo.init.items()]
    return "\n".join(lines) + "\n"


# events


@dataclass(frozen=True)
class Gate:
    node: str
    gate: str
    labels: tuple[str, ...]
    kind: str = field(default="gate", init=False)


@dataclass(frozen=True)
class Measure:
    node: str
    label: str
    bit: int
    probability: float
    kind: str = field(default="measure", init=False)


@dataclass(frozen=True)
class Message:
    sender: str
    receiver: str
    bit: int
    tag: str
    kind: str = field(default="message", init=False)


@dataclass(frozen=True)
class Correction:
    node: str
    gate: str
    label: str
    conditioned_on: str
    applied: bool
    kind: str = field(default="correction", init=False)


@dataclass(frozen=True)
class Drop:
    node: str
    label: str
    kind: str = field(default="drop", init=False)


EVENT_TYPES = {cls.__dataclass_fields__["kind"].default: cls for cls in (Gate, Measure, Message, Correction, Drop)}


@dataclass
class EventTrace:
    """Append-only event log plus the static facts needed to audit it."""

    owners: dict
    channels: frozenset
    events: list = field(default_factory=list)

    def append(self, event) -> None:
        self.events.append(event)

    def copy(self) -> "EventTrace":
        return EventTrace(self.owners, self.channels, list(self.events))

    def count(self, kind: str) -> int:
        return sum(1 for e in self.events if e.kind == kind)

    def to_json(self) -> str:
        payload = {
            "owners": self.owners,
            "channels": sorted(sorted(ch) for ch in self.channels),
            "events": [asdict(e) for e in self.events],
        }
        return json.dumps(payload, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "EventTrace":
        data = json.loads(text)
        events = []
        for raw in data["events"]:
            raw = dict(raw)
            kind = raw.pop("kind")
            if "labels" in raw:
                raw["labels"] = tuple(raw["labels"])
            events.append(EVENT_TYPES[kind](**raw))
        channels = frozenset(frozenset(ch) for ch in data["channels"])
        return cls(dict(data["owners"]), channels, events)


@dataclass
class AuditReport:
    violations: list = field(default_factory=list)
    gates: int = 0
    messages: int = 0
    corrections: int = 0
    drops: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations

    def __str__(self):
        head = "PASS" if self.passed else "FAIL"
        counts = (
            f"gates={self.gates} messages={self.messages} "
            f"corrections={self.corrections} drops={self.drops}"
        )
        return "\n".join([head, counts] + [f"  {v}" for v in self.violations])


def audit_locc(trace: EventTrace) -> AuditReport:
    """Check that a trace is a genuine LOCC execution.

    Gates, measurements, corrections and drops must touch only registers the
    acting node owns; a correction needs an earlier message with its tag
    delivered to the correcting node; messages must use declared channels; and
    no register outside the initial ownership map may appear, nor be used
    after it has been dropped.
    """
    report = AuditReport()
    owners = trace.owners
    dropped: set[str] = set()
    inbox: set[tuple[str, str]] = set()

    def check_register(i, node, label):
        if label not in owners:
            report.violations.append(f"event {i}: register {label!r} was never declared")
        elif owners[label] != node:
            report.violations.append(
                f"event {i}: node {node!r} touched {label!r} owned by {owners[label]!r}"
            )
        if label in dropped:
            report.violations.append(f"event {i}: register {label!r} used after drop")

    for i, ev in enumerate(trace.events):
        if isinstance(ev, Gate):
            report.gates += 1
            for label in ev.labels:
                check_register(i, ev.node, label)
        elif isinstance(ev, Measure):
            check_register(i, ev.node, ev.label)
        elif isinstance(ev, Message):
            report.messages += 1
            if frozenset((ev.sender, ev.receiver)) not in trace.channels:
                report.violations.append(
                    f"event {i}: no channel {ev.sender}-{ev.receiver}"
                )
            inbox.add((ev.receiver, ev.tag))
        elif isinstance(ev, Correction):
            report.corrections += 1
            check_register(i, ev.node, ev.label)
            if (ev.node, ev.conditioned_on) not in inbox:
                report.violations.append(
                    f"event {i}: correction at {ev.node!r} on {ev.conditioned_on!r} "
                    "without a prior message"
                )
        elif isinstance(ev, Drop):
            report.drops += 1
            check_register(i, ev.node, ev.label)
            dropped.add(ev.label)
        else:
            report.violations.append(f"event {i}: unknown event {ev!r}")
    return report


def traces_equivalent(a: EventTrace, b: EventTrace, tol: float = 1e-9) -> bool:
    """Same events in the same order; probabilities compared within ``tol``."""
    if len(a.events) != len(b.events):
        return False
    for ea, eb in zip(a.events, b.events):
        if isinstance(ea, Measure) and isinstance(eb, Measure):
            if (ea.node, ea.label, ea.bit) != (eb.node, eb.label, eb.bit):
                return False
            if abs(ea.probability - eb.probability) > tol:
                return False
        elif ea != eb:
            return False
    return True


# outcome schedules


class ForcedBits:
    """Hands out Forced(b) policies for successive measurement sites."""

    def __init__(self, bits: Sequence[int], start: int = 0):
        self.bits = tuple(int(b) for b in bits)
        self.position = start

    def next_policy(self):
        if self.position >= len(self.bits):
            self.position += 1
            raise ImpossibleBranch(
                f"forced-bit schedule exhausted after {len(self.bits)} measurements"
            )
        bit = self.bits[self.position]
        self.position += 1
        return Forced(bit)


class RandomOutcomes:
    def __init__(self, seed: int | None = None):
        self.seed = seed
        self.policy = Random(seed)
        self.position = 0

    def next_policy(self):
        self.position += 1
        return self.policy


def as_schedule(outcomes):
    if outcomes is None:
        return RandomOutcomes(0)
    if isinstance(outcomes, (ForcedBits, RandomOutcomes)):
        return outcomes
    if isinstance(outcomes, Random):
        sched = RandomOutcomes(outcomes.seed)
        sched.policy = outcomes
        return sched
    if isinstance(outcomes, str):
        return ForcedBits([int(c) for c in outcomes])
    return ForcedBits(outcomes)


# network


class Network:
    """A quantum repeater network with a live backend state and event trace."""

    def __init__(self, topology: Topology, backend: str = "sv", state=None, outcomes=None):
        if backend not in BACKENDS:
            raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
        self.topology = topology.validate()
        self.backend = backend
        self.links = {frozenset(link) for link in topology.links}
        self.state = state if state is not None else _initial_state(topology, backend)
        if set(self.state.labels) != set(topology.owners):
            raise StateError("state labels do not match the topology registers")
        self.trace = EventTrace(dict(topology.owners), topology.channels)
        self.inbox: dict[str, dict[str, int]] = {n: {} for n in topology.nodes}
        self.outcomes = as_schedule(outcomes)

    def copy(self) -> "Network":
        new = Network.__new__(Network)
        new.topology = self.topology
        new.backend = self.backend
        new.links = set(self.links)
        new.state = self.state.copy()
        new.trace = self.trace.copy()
        new.inbox = {n: dict(box) for n, box in self.inbox.items()}
        new.outcomes = self.outcomes
        return new

    # queries

    def owner(self, label: str) -> str:
        try:
            return self.topology.owners[label]
        except KeyError:
            raise StateError(f"unknown register {label!r}") from None

    def alive(self, label: str) -> bool:
        return label in self.state.labels

    def has_link(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.links

    def require_link(self, a: str, b: str) -> None:
        if not self.has_link(a, b):
            raise LinkError(f"{a}-{b} is not a live EPR link")

    @property
    def messages(self) -> int:
        return self.trace.count("message")

    def fidelity(self, expected: StateVector) -> float:
        return subset_fidelity(self.state.to_statevector(), expected)

    # local actions

    def _require_owned(self, node: str, labels: Iterable[str]) -> None:
        if node not in self.inbox:
            raise LocalityError(f"unknown node {node!r}")
        for label in labels:
            if self.owner(label) != node:
                raise LocalityError(
                    f"node {node!r} cannot act on {label!r} owned by {self.owner(label)!r}"
                )
            if not self.alive(label):
                raise StateError(f"register {label!r} has been dropped")

    def local_gate(self, node: str, gate: str, labels: Sequence[str]) -> "Network":
        labels = tuple(labels)
        self._require_owned(node, labels)
        gate = gate.upper()
        if gate == "CNOT":
            if len(labels) != 2:
                raise ValueError("CNOT takes two registers")
            self.state.cnot(*labels)
        elif gate in ("H", "X", "Z", "S"):
            if len(labels) != 1:
                raise ValueError(f"{gate} takes one register")
            getattr(self.state, gate.lower())(labels[0])
        else:
            raise ValueError(f"unknown gate {gate!r}")
        self.trace.append(Gate(node, gate, labels))
        return self

    def local_unitary(self, node: str, label: str, matrix) -> "Network":
        """Arbitrary single-qubit rotation at one node (statevector backend only)."""
        self._require_owned(node, [label])
        if self.backend != "sv":
            raise StateError("arbitrary unitaries need the statevector backend")
        self.state.unitary(label, matrix)
        self.trace.append(Gate(node, "U", (label,)))
        return self

    def local_measure(self, node: str, label: str, policy=None) -> int:
        self._require_owned(node, [label])
        if policy is None:
            policy = self.outcomes.next_policy()
        outcome = self.state.measure(label, policy)
        self.trace.append(Measure(node, label, outcome.bit, outcome.probability))
        return outcome.bit

    def local_drop(self, node: str, label: str) -> "Network":
        self._require_owned(node, [label])
        self.state.drop(label)
        self.links = {link for link in self.links if label not in link}
        self.trace.append(Drop(node, label))
        return self

    def send_bit(self, sender: str, receiver: str, bit: int, tag: str) -> "Network":
        if not self.topology.has_channel(sender, receiver):
            raise ChannelError(f"no classical channel {sender}-{receiver}")
        self.inbox[receiver][tag] = int(bit)
        self.trace.append(Message(sender, receiver, int(bit), tag))
        return self

    def route_bit(self, sender: str, receiver: str, bit: int, tag: str) -> "Network":
        """Forward a bit hop by hop along a shortest channel path."""
        path = self.channel_path(sender, receiver)
        for a, b in zip(path, path[1:]):
            self.send_bit(a, b, bit, tag)
        return self

    def channel_path(self, sender: str, receiver: str) -> list[str]:
        prev = {sender: None}
        queue = deque([sender])
        while queue:
            node = queue.popleft()
            if node == receiver:
                break
            for nxt in self.topology.neighbours(node):
                if nxt not in prev:
                    prev[nxt] = node
                    queue.append(nxt)
        if receiver not in prev:
            raise ChannelError(f"no channel path {sender} -> {receiver}")
        path = [receiver]
        while path[-1] != sender:
            path.append(prev[path[-1]])
        return path[::-1]

    def local_correct(self, node: str, gate: str, label: str, tag: str) -> bool:
        """Apply ``gate`` to ``label`` iff the bit received under ``tag`` is 1."""
        self._require_owned(node, [label])
        if tag not in self.inbox[node]:
            raise ChannelError(f"node {node!r} has not received {tag!r}")
        applied = bool(self.inbox[node][tag])
        if applied:
            getattr(self.state, gate.lower())(label)
        self.trace.append(Correction(node, gate.upper(), label, tag, applied))
        return applied

    def add_link(self, a: str, b: str) -> None:
        if self.owner(a) == self.owner(b):
            raise LinkError(f"{a}-{b} does not span two nodes")
        self.links.add(frozenset((a, b)))

    def certify_link(self, a: str, b: str, tol: float = 1e-9) -> float:
        """Register (a, b) as an EPR link after checking its reduced state is |Psi+>."""
        f = self.fidelity(make_state(pairs=[(a, b)]))
        if f < 1 - tol:
            raise LinkError(f"{a}-{b} is not an EPR pair (fidelity {f:.6f})")
        self.add_link(a, b)
        return f


def _initial_state(topo: Topology, backend: str):
    singles = [(q, topo.init.get(q, "0")) for q in topo.owners if not any(q in link for link in topo.links)]
    if backend == "sv":
        made = make_state(topo.links, singles)
    else:
        made = stab_make_state(topo.links, singles)
    return _reorder(made, topo.registers, backend)


def _reorder(state, order, backend):
    """Lay the qubits out in register declaration order."""
    if backend == "stab":
        perm = [state.labels[q] for q in order]
        state.xs = [_permute(v, perm) for v in state.xs]
        state.zs = [_permute(v, perm) for v in state.zs]
        state.labels = {q: i for i, q in enumerate(order)}
        return state
    n = len(order)
    if n == 0:
        return state
    t = state.amplitudes.reshape([2] * n)
    axes = [n - 1 - state.labels[q] for q in reversed(order)]
    return StateVector(np.transpose(t, axes).reshape(-1), order)


def _permute(v: int, perm: list[int]) -> int:
    return sum(((v >> old) & 1) << new for new, old in enumerate(perm))


def build_network(topology: Topology, backend: str = "sv", outcomes=None) -> Network:
    return Network(topology, backend, outcomes=outcomes)
