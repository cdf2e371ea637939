import itertools

import numpy as np
import pytest

import oracle
from qnc import locc
from qnc.errors import LinkError, LocalityError
from qnc.network import Network, audit_locc, parse_topology, traces_equivalent
from qnc.stabilizer import StabilizerTableau
from qnc.statevec import from_terms
from qnc.verify import lemma_suite

BACKENDS = ["sv", "stab"]


def topology(owners, links=(), extra=""):
    nodes = sorted(set(owners.values()))
    lines = [f"node {n}" for n in nodes]
    lines += [f"own {owners[q]} {q}" for q in owners]
    lines += [f"epr {a} {b}" for a, b in links]
    lines += [f"chan {a} {b}" for a, b in itertools.combinations(nodes, 2)]
    return parse_topology("\n".join(lines) + "\n" + extra)


def net_with(owners, links, order, v, backend="sv"):
    """Network whose state is the oracle vector ``v`` over ``order``."""
    n = len(order)
    state = from_terms(order, {format(k, f"0{n}b"): a for k, a in enumerate(v) if abs(a) > 1e-15})
    return Network(topology(owners, links), backend, state=state)


def state_fid(net, order, v):
    return oracle.fid(oracle.vec(net.state.to_statevector(), order), v)


def q1(a, b):
    return np.array([a, b], dtype=complex)


# Connection


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("bit", [0, 1])
def test_con_two_pairs_gives_ghz(backend, bit):
    topo = topology({"A": "s1", "C": "s1", "B": "t2", "D": "r1"}, [("A", "B"), ("C", "D")])
    net = Network(topo, backend)
    locc.con(net, "A", "C", "D", outcomes=[bit])
    assert state_fid(net, ["A", "B", "D"], oracle.superpose({"000": 1, "111": 1})) == pytest.approx(1, abs=1e-12)
    assert audit_locc(net.trace).passed
    assert net.messages == 1


def test_con_control_zero():
    topo = topology({"C": "u", "R": "u", "T": "v"}, [("R", "T")], "init C 0\n")
    for bit in (0, 1):
        net = Network(topo)
        locc.con(net, "C", "R", "T", outcomes=[bit])
        assert state_fid(net, ["C", "T"], oracle.ket("00")) == pytest.approx(1, abs=1e-12)


def test_con_requires_link_and_locality():
    topo = topology({"C": "u", "R": "u", "T": "v", "Q": "v"}, [("R", "T")])
    with pytest.raises(LinkError):
        locc.con(Network(topo), "C", "R", "Q")
    with pytest.raises(LocalityError):
        locc.con(Network(topo), "Q", "R", "T")


def test_con_random_inputs_match_formula(rng):
    # (a|p0>|0>_C + b|p1>|1>_C) |Psi+>_RT -> a|p0>|00>_CT + b|p1>|11>_CT
    order_in = ["P", "C", "R", "T"]
    for _ in range(20):
        a, b = oracle.random_vec(rng, 1)
        p0, p1 = oracle.random_vec(rng, 1), oracle.random_vec(rng, 1)
        v = np.kron(a * np.kron(p0, oracle.ket("0")) + b * np.kron(p1, oracle.ket("1")), oracle.superpose({"00": 1, "11": 1}))
        want = a * np.kron(p0, oracle.ket("00")) + b * np.kron(p1, oracle.ket("11"))
        for bit in (0, 1):
            net = net_with({"P": "e", "C": "u", "R": "u", "T": "v"}, [("R", "T")], order_in, v)
            locc.con(net, "C", "R", "T", outcomes=[bit])
            assert state_fid(net, ["P", "C", "T"], want) == pytest.approx(1, abs=1e-9)


# Fanout


def test_fanout_example(rng):
    a, b = oracle.random_vec(rng, 1)
    order = ["A", "B", "C", "D", "E"]
    v = np.kron(q1(a, b), np.kron(oracle.superpose({"00": 1, "11": 1}), oracle.superpose({"00": 1, "11": 1})))
    want = a * oracle.ket("000") + b * oracle.ket("111")
    finals = []
    for bits in itertools.product((0, 1), repeat=2):
        net = net_with({"A": "u", "B": "u", "D": "u", "C": "v", "E": "w"}, [("B", "C"), ("D", "E")], order, v)
        locc.fanout(net, "A", "B", "C", "D", "E", outcomes=list(bits))
        assert state_fid(net, ["A", "C", "E"], want) == pytest.approx(1, abs=1e-9)
        assert audit_locc(net.trace).passed
        finals.append(oracle.vec(net.state, ["A", "C", "E"]))
    for f in finals[1:]:
        assert oracle.fid(f, finals[0]) == pytest.approx(1, abs=1e-12)


def test_fanout_alpha_one():
    topo = topology({"A": "u", "B": "u", "D": "u", "C": "v", "E": "w"}, [("B", "C"), ("D", "E")])
    net = Network(topo)
    locc.fanout(net, "A", "B", "C", "D", "E", outcomes=[1, 0])
    assert state_fid(net, ["A", "C", "E"], oracle.ket("000")) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_fanout_is_con_then_con(backend):
    topo = topology({"A": "u", "B": "u", "D": "u", "C": "v", "E": "w", "Y": "y"}, [("A", "Y"), ("B", "C"), ("D", "E")])
    for bits in itertools.product((0, 1), repeat=2):
        f = Network(topo, backend)
        locc.fanout(f, "A", "B", "C", "D", "E", outcomes=list(bits))
        c = Network(topo, backend)
        locc.con(c, "A", "B", "C", outcomes=[bits[0]])
        locc.con(c, "A", "D", "E", outcomes=[bits[1]])
        assert traces_equivalent(f.trace, c.trace)
        assert oracle.fid(
            oracle.vec(f.state.to_statevector(), ["A", "C", "E", "Y"]),
            oracle.vec(c.state.to_statevector(), ["A", "C", "E", "Y"]),
        ) == pytest.approx(1, abs=1e-12)


# Add


def add_oracle(v, order, c1, c2, r, t, bit):
    """Dense Add: CNOT(c1,r), CNOT(c2,r), project r on ``bit``, X^bit on t, trace r out."""
    v = oracle.cnot(order, c2, r) @ (oracle.cnot(order, c1, r) @ v)
    v = oracle.op(order, r, np.diag([1 - bit, bit])) @ v
    if bit:
        v = oracle.op(order, t, oracle.X) @ v
    v = v / np.linalg.norm(v)
    t_ = v.reshape([2] * len(order))
    k = order.index(r)
    rest = np.take(t_, bit, axis=k).reshape(-1)
    return rest, [q for q in order if q != r]


def test_add_example(rng):
    a, b = oracle.random_vec(rng, 1)
    g, d = oracle.random_vec(rng, 1)
    order = ["A", "B", "C", "D"]
    v = np.kron(np.kron(q1(a, b), q1(g, d)), oracle.superpose({"00": 1, "11": 1}))
    want = (
        a * g * oracle.ket("000") + b * d * oracle.ket("110")
        + a * d * oracle.ket("011") + b * g * oracle.ket("101")
    )
    for bit in (0, 1):
        net = net_with({"A": "u", "B": "u", "C": "u", "D": "v"}, [("C", "D")], order, v)
        locc.add(net, "A", "B", "C", "D", outcomes=[bit])
        assert state_fid(net, ["A", "B", "D"], want) == pytest.approx(1, abs=1e-9)
        ref, ref_order = add_oracle(v, order, "A", "B", "C", "D", bit)
        assert state_fid(net, ref_order, ref) == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_add_on_three_pairs(backend):
    # both F = 1 terms are present, |0011> and |1100>, with equal weight
    order = ["A", "B", "C", "D", "E", "F"]
    v, _ = oracle.epr_product([("A", "B"), ("C", "D"), ("E", "F")])
    want = oracle.superpose({"00000": 1, "11110": 1, "00111": 1, "11001": 1})
    owners = {"A": "a", "B": "u", "C": "c", "D": "u", "E": "u", "F": "v"}
    for bit in (0, 1):
        ref, ref_order = add_oracle(v, order, "B", "D", "E", "F", bit)
        assert ref_order == ["A", "B", "C", "D", "F"]
        assert oracle.fid(ref, want) == pytest.approx(1, abs=1e-12)
        net = Network(topology(owners, [("A", "B"), ("C", "D"), ("E", "F")]), backend)
        locc.add(net, "B", "D", "E", "F", outcomes=[bit])
        assert state_fid(net, ref_order, want) == pytest.approx(1, abs=1e-9)
    doubled = oracle.superpose({"00000": 1, "11110": 1, "11001": 2})
    assert oracle.fid(want, doubled) < 0.9


def test_add_with_basis_control_is_con(rng):
    a, b = oracle.random_vec(rng, 1)
    order = ["A", "B", "C", "D"]
    v = np.kron(np.kron(q1(a, b), oracle.ket("0")), oracle.superpose({"00": 1, "11": 1}))
    owners = {"A": "u", "B": "u", "C": "u", "D": "v"}
    for bit in (0, 1):
        x = net_with(owners, [("C", "D")], order, v)
        locc.add(x, "A", "B", "C", "D", outcomes=[bit])
        y = net_with(owners, [("C", "D")], order, v)
        locc.con(y, "A", "C", "D", outcomes=[bit])
        assert oracle.fid(oracle.vec(x.state, ["A", "B", "D"]), oracle.vec(y.state, ["A", "B", "D"])) == pytest.approx(1, abs=1e-12)


# Removal


@pytest.mark.parametrize("backend", BACKENDS)
def test_rem_on_ghz(backend):
    owners = {"A": "u", "B": "v", "C": "w"}
    for bit in (0, 1):
        net = net_with(owners, [], ["A", "B", "C"], oracle.superpose({"000": 1, "111": 1}))
        if backend == "stab":
            t = StabilizerTableau(["A", "B", "C"])
            t.h("A").cnot("A", "B").cnot("A", "C")
            net = Network(net.topology, "stab", state=t)
        locc.rem(net, "A", "B", outcomes=[bit])
        assert state_fid(net, ["B", "C"], oracle.superpose({"00": 1, "11": 1})) == pytest.approx(1, abs=1e-12)
        msg = [e for e in net.trace.events if e.kind == "message"]
        assert (msg[0].sender, msg[0].receiver) == ("u", "v")
        assert not net.alive("A")


def test_rem_on_product():
    net = net_with({"A": "u", "B": "v"}, [], ["A", "B"], oracle.ket("00"))
    for bit in (0, 1):
        n = net.copy()
        locc.rem(n, "A", "B", outcomes=[bit])
        assert state_fid(n, ["B"], oracle.ket("0")) == pytest.approx(1, abs=1e-12)


def test_con_then_rem_restores(rng):
    order = ["P", "C", "R", "T"]
    owners = {"P": "e", "C": "u", "R": "u", "T": "v"}
    for _ in range(20):
        pc = oracle.random_vec(rng, 2)
        v = np.kron(pc, oracle.superpose({"00": 1, "11": 1}))
        for bits in itertools.product((0, 1), repeat=2):
            net = net_with(owners, [("R", "T")], order, v)
            locc.con(net, "C", "R", "T", outcomes=[bits[0]])
            locc.rem(net, "T", "C", outcomes=[bits[1]])
            assert state_fid(net, ["P", "C"], pc) == pytest.approx(1, abs=1e-9)
            assert audit_locc(net.trace).passed


# Removal with addition


def test_remadd_undoes_add(rng):
    for _ in range(10):
        a, b = oracle.random_vec(rng, 1)
        g, d = oracle.random_vec(rng, 1)
        order = ["A", "B", "C", "D"]
        v = np.kron(np.kron(q1(a, b), q1(g, d)), oracle.superpose({"00": 1, "11": 1}))
        want = np.kron(q1(a, b), q1(g, d))
        for bits in itertools.product((0, 1), repeat=2):
            net = net_with({"A": "u", "B": "u", "C": "u", "D": "v"}, [("C", "D")], order, v)
            locc.add(net, "A", "B", "C", "D", outcomes=[bits[0]])
            locc.rem_add(net, "D", "A", "B", outcomes=[bits[1]])
            assert state_fid(net, ["A", "B"], want) == pytest.approx(1, abs=1e-9)
            # both targets sit at u: one message for the single recipient
            assert [e.receiver for e in net.trace.events if e.kind == "message" and e.tag == "remadd-D"] == ["u"]


def test_remadd_broadcasts_to_each_node():
    owners = {"R": "r", "A": "x", "B": "y"}
    v = oracle.superpose({"000": 1, "011": 1, "101": 1, "110": 1})
    net = net_with(owners, [], ["A", "B", "R"], v)
    locc.rem_add(net, "R", "A", "B", outcomes=[1])
    msgs = [e for e in net.trace.events if e.kind == "message"]
    assert sorted(m.receiver for m in msgs) == ["x", "y"]
    assert {m.tag for m in msgs} == {"remadd-R"}
    assert state_fid(net, ["A", "B"], oracle.superpose({"00": 1, "01": 1, "10": 1, "11": 1})) == pytest.approx(1, abs=1e-12)


def test_remadd_a00_only():
    net = net_with({"R": "r", "A": "x", "B": "x"}, [], ["A", "B", "R"], oracle.ket("000"))
    for bit in (0, 1):
        n = net.copy()
        locc.rem_add(n, "R", "A", "B", outcomes=[bit])
        assert state_fid(n, ["A", "B"], oracle.ket("00")) == pytest.approx(1, abs=1e-12)


# baselines

CHAIN3 = {"A": "s", "B": "r1", "C": "r1", "D": "r2", "E": "r2", "F": "t"}


@pytest.mark.parametrize("backend", BACKENDS)
def test_swap_all_branches(backend):
    topo = topology({"A": "s", "B": "r", "C": "r", "D": "t"}, [("A", "B"), ("C", "D")])
    for bits in itertools.product((0, 1), repeat=2):
        net = Network(topo, backend)
        locc.entanglement_swap(net, "B", "C", "A", "D", outcomes=list(bits))
        assert state_fid(net, ["A", "D"], oracle.superpose({"00": 1, "11": 1})) == pytest.approx(1, abs=1e-12)
        assert net.has_link("A", "D")
        assert audit_locc(net.trace).passed


def test_swap_twice_over_three_links():
    topo = topology(CHAIN3, [("A", "B"), ("C", "D"), ("E", "F")])
    for bits in itertools.product((0, 1), repeat=4):
        net = Network(topo)
        locc.entanglement_swap(net, "B", "C", "A", "D", outcomes=list(bits[:2]))
        locc.entanglement_swap(net, "D", "E", "A", "F", outcomes=list(bits[2:]))
        assert state_fid(net, ["A", "F"], oracle.superpose({"00": 1, "11": 1})) == pytest.approx(1, abs=1e-12)


def test_swap_locality():
    topo = topology({"A": "s", "B": "r", "C": "x", "D": "t"}, [("A", "B"), ("C", "D")])
    with pytest.raises(LocalityError):
        locc.entanglement_swap(Network(topo), "B", "C", "A", "D")


@pytest.mark.parametrize("payload", [np.array([1, 0]), np.array([1, 1]) / np.sqrt(2)])
def test_teleport_basis_states(payload):
    topo = topology({"P": "u", "A": "u", "B": "v"}, [("A", "B")])
    for bits in itertools.product((0, 1), repeat=2):
        v = np.kron(payload, oracle.superpose({"00": 1, "11": 1}))
        net = net_with({"P": "u", "A": "u", "B": "v"}, [("A", "B")], ["P", "A", "B"], v)
        locc.teleport(net, "P", "A", "B", outcomes=list(bits))
        assert state_fid(net, ["B"], payload) == pytest.approx(1, abs=1e-12)
        assert net.state.ordered_labels() == ["B"]
        assert audit_locc(net.trace).passed
    assert topo.has_channel("u", "v")


def test_teleport_random_states(rng):
    order = ["X", "P", "A", "B"]
    for _ in range(25):
        xp = oracle.random_vec(rng, 2)
        v = np.kron(xp, oracle.superpose({"00": 1, "11": 1}))
        for bits in itertools.product((0, 1), repeat=2):
            net = net_with({"X": "e", "P": "u", "A": "u", "B": "v"}, [("A", "B")], order, v)
            locc.teleport(net, "P", "A", "B", outcomes=list(bits))
            # entanglement with the bystander X is carried over too
            assert state_fid(net, ["X", "B"], xp) == pytest.approx(1, abs=1e-9)


def test_lemma_suite_small():
    for result in lemma_suite(trials=10, seed=4):
        assert result.passed, (result.name, result.failures[:2])
