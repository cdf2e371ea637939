import json

import pytest

from qnc import builtin, run
from qnc.errors import ChannelError, LinkError, LocalityError, StateError, TopologyError
from qnc.network import (
    Correction,
    Drop,
    EventTrace,
    Gate,
    Measure,
    Message,
    Network,
    audit_locc,
    build_network,
    format_topology,
    parse_topology,
)
from qnc.statevec import fidelity, make_state

CHAIN = """\
node s
node r
node t
own s A
own r B C
own t D
epr A B
epr C D
chan s r
chan r t
"""


def test_chain_starts_in_two_pairs():
    net = build_network(parse_topology(CHAIN))
    assert fidelity(net.state, make_state([("A", "B"), ("C", "D")])) == pytest.approx(1, abs=1e-12)
    assert len(net.trace.events) == 0


def test_butterfly_topology_shape():
    topo, _ = builtin("butterfly")
    assert len(topo.nodes) == 6
    assert len(topo.links) == 7
    net = build_network(topo)
    assert net.state.num_qubits == 14
    pairs = {frozenset(link) for link in topo.links}
    owners = topo.owners
    expected = {
        ("A", "B"): ("s1", "t2"), ("C", "D"): ("s1", "r1"), ("E", "F"): ("s2", "t1"),
        ("G", "H"): ("s2", "r1"), ("I", "J"): ("r1", "r2"), ("K", "L"): ("r2", "t2"),
        ("M", "N"): ("r2", "t1"),
    }
    for (a, b), (na, nb) in expected.items():
        assert frozenset((a, b)) in pairs
        assert (owners[a], owners[b]) == (na, nb)
    assert not topo.has_channel("s1", "t1")


def test_empty_topology():
    net = build_network(parse_topology(""))
    assert net.state.num_qubits == 0
    assert net.topology.nodes == ()


def test_stab_backend_builds_same_state():
    topo, _ = builtin("butterfly_with_ancilla")
    a = build_network(topo, "sv")
    b = build_network(topo, "stab")
    assert b.state.ordered_labels() == a.state.ordered_labels()
    assert fidelity(b.state.to_statevector(), a.state) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("node s\nnode s\n", 2, 6),
        ("node s\nown x A\n", 2, 5),
        ("node s\nnode t\nown s A\nown t A\n", 4, 7),
        ("node s\nown s A B\nepr A B\n", 3, 7),
        ("node s\nnode t\nown s A\nown t B\nepr A Q\n", 5, 7),
        ("node s\nchan s s\n", 2, 8),
        ("node s\nchan s t\n", 2, 8),
        ("frob s\n", 1, 1),
        ("node\n", 1, 1),
        ("node s\nnode t\nown s A\nown t B\nepr A B\ninit A +\n", 6, 6),
        ("node s\nown s A\ninit A 2\n", 3, 8),
        ("node s t\n", 1, 1),
        ("node s!\n", 1, 6),
        ("node s\nnode t\nown s A C\nown t B\nepr A B\nepr C B\n", 6, 7),
    ],
)
def test_topology_errors_are_positioned(text, line, col):
    with pytest.raises(TopologyError) as err:
        parse_topology(text)
    assert (err.value.line, err.value.column) == (line, col)
    assert str(err.value).startswith(f"{line}:{col}:")


def test_topology_round_trip():
    for name in ("butterfly", "butterfly_with_ancilla", "swap_chain", "single_con"):
        topo, _ = builtin(name)
        assert parse_topology(format_topology(topo)) == topo


def test_comments_and_blank_lines():
    topo = parse_topology("# header\n\nnode s  # trailing\n")
    assert topo.nodes == ("s",)


# locality


def test_local_cnot_allowed():
    topo, _ = builtin("butterfly")
    net = build_network(topo)
    net.local_gate("r1", "CNOT", ("D", "I"))
    net.local_gate("t1", "CNOT", ("N", "F"))
    assert [e.kind for e in net.trace.events] == ["gate", "gate"]
    assert net.trace.events[-1] == Gate("t1", "CNOT", ("N", "F"))


def test_nonlocal_cnot_refused():
    topo, _ = builtin("butterfly")
    net = build_network(topo)
    with pytest.raises(LocalityError):
        net.local_gate("s1", "CNOT", ("A", "B"))
    assert not net.trace.events


def test_measure_logs_and_drop_removes_link():
    net = build_network(parse_topology(CHAIN))
    bit = net.local_measure("s", "A", policy=None)
    ev = net.trace.events[-1]
    assert isinstance(ev, Measure) and ev.bit == bit and ev.probability == pytest.approx(0.5)
    net.local_drop("s", "A")
    assert not net.alive("A")
    assert not net.has_link("A", "B")
    with pytest.raises(StateError):
        net.local_gate("s", "H", ["A"])


def test_send_over_channel():
    topo, _ = builtin("butterfly")
    net = build_network(topo)
    net.send_bit("r2", "r1", 1, "remadd-J")
    assert net.trace.events[-1] == Message("r2", "r1", 1, "remadd-J")
    with pytest.raises(ChannelError):
        net.send_bit("s1", "t1", 0, "x")


def test_route_bit_hops():
    topo, _ = builtin("butterfly")
    net = build_network(topo)
    path = net.channel_path("s1", "t1")
    assert path[0] == "s1" and path[-1] == "t1" and len(path) == 4
    net.route_bit("s1", "t1", 1, "tag")
    assert net.messages == 3
    assert audit_locc(net.trace).passed


def test_correction_needs_message():
    net = build_network(parse_topology(CHAIN))
    with pytest.raises(ChannelError):
        net.local_correct("r", "X", "B", "con-A")


def test_certify_link():
    net = build_network(parse_topology(CHAIN))
    with pytest.raises(LinkError):
        net.certify_link("A", "D")
    net.local_gate("r", "CNOT", ("B", "C"))
    with pytest.raises(LinkError):
        net.certify_link("A", "B")


# audit


def _trace(events, channels=(("s", "r"), ("r", "t"))):
    owners = {"A": "s", "B": "r", "C": "r", "D": "t"}
    return EventTrace(owners, frozenset(frozenset(c) for c in channels), list(events))


def test_audit_butterfly_passes():
    topo, script = builtin("butterfly")
    net, report = run(build_network(topo), script, "0" * 10)
    audit = audit_locc(net.trace)
    assert audit.passed
    assert audit.drops == 10
    assert audit.messages == 10


def test_audit_nonlocal_gate_fails():
    audit = audit_locc(_trace([Gate("s", "CNOT", ("A", "B"))]))
    assert not audit.passed
    assert "owned by 'r'" in audit.violations[0]
    assert str(audit).startswith("FAIL")


def test_audit_unjustified_correction_fails():
    audit = audit_locc(_trace([Correction("t", "X", "D", "swap-B", True)]))
    assert not audit.passed
    assert "without a prior message" in audit.violations[0]


def test_audit_message_to_other_node_does_not_justify():
    events = [Message("s", "r", 1, "con-A"), Correction("t", "X", "D", "con-A", True)]
    assert not audit_locc(_trace(events)).passed


def test_audit_undeclared_register_and_reuse():
    audit = audit_locc(_trace([Gate("s", "H", ("Z",))]))
    assert "never declared" in audit.violations[0]
    audit = audit_locc(_trace([Drop("s", "A"), Gate("s", "H", ("A",))]))
    assert "used after drop" in audit.violations[0]


def test_audit_missing_channel():
    audit = audit_locc(_trace([Message("s", "t", 0, "x")]))
    assert not audit.passed


def test_trace_json_round_trip():
    topo, script = builtin("swap_chain")
    net, _ = run(build_network(topo), script, "11")
    text = net.trace.to_json()
    back = EventTrace.from_json(text)
    assert back.events == net.trace.events
    assert back.owners == net.trace.owners
    assert back.channels == net.trace.channels
    assert json.loads(text)["events"][0]["kind"] == "gate"


def test_ownership_is_static():
    topo, script = builtin("butterfly")
    net, _ = run(build_network(topo), script, "1" * 10)
    assert net.trace.owners == dict(topo.owners)
    for ev in net.trace.events:
        labels = getattr(ev, "labels", None) or ([ev.label] if hasattr(ev, "label") else [])
        for label in labels:
            assert topo.owners[label] == ev.node
