"""Randomized property suites: primitive postconditions, backend agreement,
and the classical-coding correspondence.

Expected primitive outputs are built directly from the closed-form states,
never by running the primitives, so they act as independent oracles.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import locc
from .errors import ImpossibleBranch
from .network import Network, Topology, audit_locc
from .stabilizer import StabilizerTableau
from .statevec import Forced, StateVector, fidelity, make_state, tensor

TOL = 1e-9


@dataclass
class SuiteResult:
    name: str
    runs: int = 0
    min_fidelity: float | None = None
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and self.runs > 0

    def note(self, f: float) -> None:
        self.min_fidelity = f if self.min_fidelity is None else min(self.min_fidelity, f)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        fid = "n/a" if self.min_fidelity is None else f"{self.min_fidelity:.12f}"
        return f"{self.name}\truns={self.runs}\tmin_fidelity={fid}\t{status}"


# random inputs


def random_qubit_state(rng, labels) -> StateVector:
    labels = list(labels)
    v = rng.normal(size=2 ** len(labels)) + 1j * rng.normal(size=2 ** len(labels))
    return StateVector(v / np.linalg.norm(v), labels)


def random_pair(rng) -> tuple[complex, complex]:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return complex(v[0]), complex(v[1])


def basis(label: str, bit: int) -> StateVector:
    return StateVector.basis([label], {label: bit})


def superpose(*terms: tuple[complex, StateVector]) -> StateVector:
    """Linear combination of states sharing one label set (renormalized)."""
    order = terms[0][1].ordered_labels()
    total = np.zeros(2 ** len(order), dtype=complex)
    for coef, st in terms:
        total += coef * _amplitudes_in(st, order)
    return StateVector(total / np.linalg.norm(total), order)


def _amplitudes_in(st: StateVector, order) -> np.ndarray:
    n = len(order)
    if st.ordered_labels() == list(order):
        return st.amplitudes
    t = st.amplitudes.reshape([2] * n)
    axes = [n - 1 - st.labels[q] for q in reversed(order)]
    return np.transpose(t, axes).reshape(-1)


def _topology(owners: dict, links=()) -> Topology:
    nodes = tuple(dict.fromkeys(owners.values()))
    channels = {frozenset((a, b)) for a in nodes for b in nodes if a != b}
    return Topology(nodes, dict(owners), tuple(links), frozenset(channels))


def _environment(rng, size=None):
    size = size or int(rng.integers(1, 3))
    return random_qubit_state(rng, [f"P{k}" for k in range(size)])


# per-lemma cases: (topology, initial state, action, expected state, sites)


def connection_case(rng):
    a, b = random_pair(rng)
    psi0, psi1 = random_qubit_state(rng, ["Q"]), random_qubit_state(rng, ["Q"])
    env = _environment(rng)
    ctrl = superpose((a, tensor(psi0, basis("C", 0))), (b, tensor(psi1, basis("C", 1))))
    init = tensor(ctrl, make_state(pairs=[("R", "T")]), env)
    final = tensor(
        superpose(
            (a, tensor(psi0, basis("C", 0), basis("T", 0))),
            (b, tensor(psi1, basis("C", 1), basis("T", 1))),
        ),
        env,
    )
    owners = {"C": "u", "R": "u", "T": "v", "Q": "w"} | {p: "w" for p in env.labels}
    topo = _topology(owners, [("R", "T")])
    return topo, init, lambda net: locc.con(net, "C", "R", "T"), final, 1


def fanout_case(rng):
    a, b = random_pair(rng)
    psi0, psi1 = random_qubit_state(rng, ["Q"]), random_qubit_state(rng, ["Q"])
    env = _environment(rng)
    ctrl = superpose((a, tensor(psi0, basis("A", 0))), (b, tensor(psi1, basis("A", 1))))
    init = tensor(ctrl, make_state(pairs=[("B", "C"), ("D", "E")]), env)
    final = tensor(
        superpose(
            (a, tensor(psi0, basis("A", 0), basis("C", 0), basis("E", 0))),
            (b, tensor(psi1, basis("A", 1), basis("C", 1), basis("E", 1))),
        ),
        env,
    )
    owners = {"A": "u", "B": "u", "D": "u", "C": "v", "E": "w", "Q": "x"}
    owners |= {p: "x" for p in env.labels}
    topo = _topology(owners, [("B", "C"), ("D", "E")])
    return topo, init, lambda net: locc.fanout(net, "A", "B", "C", "D", "E"), final, 2


def add_case(rng):
    a, b = random_pair(rng)
    g, d = random_pair(rng)
    psi0, psi1 = random_qubit_state(rng, ["Q1"]), random_qubit_state(rng, ["Q1"])
    phi0, phi1 = random_qubit_state(rng, ["Q2"]), random_qubit_state(rng, ["Q2"])
    env = _environment(rng)
    first = superpose((a, tensor(psi0, basis("A", 0))), (b, tensor(psi1, basis("A", 1))))
    second = superpose((g, tensor(phi0, basis("B", 0))), (d, tensor(phi1, basis("B", 1))))
    init = tensor(first, second, make_state(pairs=[("C", "D")]), env)
    psi, phi = (psi0, psi1), (phi0, phi1)
    coef = {(0, 0): a * g, (1, 1): b * d, (0, 1): a * d, (1, 0): b * g}
    terms = [
        (coef[i, j], tensor(psi[i], phi[j], basis("A", i), basis("B", j), basis("D", i ^ j)))
        for i, j in coef
    ]
    final = tensor(superpose(*terms), env)
    owners = {"A": "u", "B": "u", "C": "u", "D": "v", "Q1": "w", "Q2": "w"}
    owners |= {p: "w" for p in env.labels}
    topo = _topology(owners, [("C", "D")])
    return topo, init, lambda net: locc.add(net, "A", "B", "C", "D"), final, 1


def removal_case(rng):
    a, b = random_pair(rng)
    psi00, psi11 = random_qubit_state(rng, ["Q"]), random_qubit_state(rng, ["Q"])
    env = _environment(rng)
    init = tensor(
        superpose(
            (a, tensor(basis("A", 0), basis("B", 0), psi00)),
            (b, tensor(basis("A", 1), basis("B", 1), psi11)),
        ),
        env,
    )
    final = tensor(
        superpose((a, tensor(basis("B", 0), psi00)), (b, tensor(basis("B", 1), psi11))),
        env,
    )
    owners = {"A": "u", "B": "v", "Q": "w"} | {p: "w" for p in env.labels}
    topo = _topology(owners)
    return topo, init, lambda net: locc.rem(net, "A", "B"), final, 1


def removal_add_case(rng):
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    v /= np.linalg.norm(v)
    amps = dict(zip(itertools.product((0, 1), repeat=2), v))
    psis = {ij: random_qubit_state(rng, ["Q"]) for ij in amps}
    env = _environment(rng)
    init = tensor(
        superpose(
            *[
                (amps[i, j], tensor(basis("A", i), basis("B", j), basis("C", i ^ j), psis[i, j]))
                for i, j in amps
            ]
        ),
        env,
    )
    final = tensor(
        superpose(*[(amps[i, j], tensor(basis("A", i), basis("B", j), psis[i, j])) for i, j in amps]),
        env,
    )
    owners = {"C": "u", "A": "v", "B": "w", "Q": "x"} | {p: "x" for p in env.labels}
    topo = _topology(owners)
    return topo, init, lambda net: locc.rem_add(net, "C", "A", "B"), final, 1


LEMMA_CASES = {
    "connection": connection_case,
    "fanout": fanout_case,
    "add": add_case,
    "removal": removal_case,
    "removal_add": removal_add_case,
}


def check_case(topo, init, action, final, sites, result: SuiteResult) -> None:
    for bits in itertools.product((0, 1), repeat=sites):
        net = Network(topo, "sv", state=init.copy(), outcomes=list(bits))
        try:
            action(net)
        except ImpossibleBranch as exc:
            result.failures.append(f"branch {bits} dead: {exc}")
            continue
        f = fidelity(final, net.state)
        result.runs += 1
        result.note(f)
        if f < 1 - TOL:
            result.failures.append(f"branch {bits}: fidelity {f:.12f}")
        audit = audit_locc(net.trace)
        if not audit.passed:
            result.failures.append(f"branch {bits}: audit {audit.violations}")


def lemma_suite(trials: int = 100, seed: int = 1) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    results = []
    for name, make_case in LEMMA_CASES.items():
        result = SuiteResult(name)
        for _ in range(trials):
            check_case(*make_case(rng), result)
        results.append(result)
    return results


# backend agreement


GATES_1Q = ("h", "s", "x", "z")


def random_clifford_check(rng, n: int, depth: int) -> tuple[bool, str, float | None]:
    """Run one random circuit with measurements and drops on both backends.

    Returns (ok, reason, final fidelity); the fidelity is None when the run
    stopped before the final comparison.
    """
    labels = [f"q{k}" for k in range(n)]
    sv = StateVector.basis(labels)
    tab = StabilizerTableau(labels)
    for _ in range(depth):
        live = sv.ordered_labels()
        if not live:
            break
        op = rng.choice(["1q", "1q", "cnot", "cnot", "measure"])
        if op == "1q":
            gate, q = rng.choice(GATES_1Q), rng.choice(live)
            getattr(sv, gate)(q)
            getattr(tab, gate)(q)
        elif op == "cnot" and len(live) > 1:
            c, t = rng.choice(live, size=2, replace=False)
            sv.cnot(c, t)
            tab.cnot(c, t)
        elif op == "measure":
            q = rng.choice(live)
            want = int(rng.integers(2))
            p_sv, p_tab = sv.probability(q, want), tab.probability(q, want)
            if p_tab not in (0.0, 0.5, 1.0):
                return False, f"stabilizer probability {p_tab} on {q}", None
            if abs(p_sv - p_tab) > 1e-12:
                return False, f"probabilities differ on {q}: {p_sv} vs {p_tab}", None
            if p_tab == 0.0:
                for st in (sv.copy(), tab.copy()):
                    try:
                        st.measure(q, Forced(want))
                    except ImpossibleBranch:
                        continue
                    return False, f"forced impossible outcome accepted on {q}", None
                want = 1 - want
            o_sv = sv.measure(q, Forced(want))
            o_tab = tab.measure(q, Forced(want))
            if abs(o_sv.probability - o_tab.probability) > 1e-12:
                return False, "outcome probabilities differ", None
            if rng.random() < 0.3:
                sv.drop(q)
                tab.drop(q)
    if not tab.is_valid():
        return False, "tableau lost validity", None
    f = fidelity(sv, tab.to_statevector())
    if f < 1 - TOL:
        return False, f"final fidelity {f:.12f}", f
    return True, "", f


def backend_suite(trials: int = 200, seed: int = 1, max_qubits: int = 12) -> SuiteResult:
    rng = np.random.default_rng(seed)
    result = SuiteResult("backends")
    for trial in range(trials):
        n = int(rng.integers(1, max_qubits + 1))
        ok, why, f = random_clifford_check(rng, n, depth=4 * n + 4)
        result.runs += 1
        if f is not None:
            result.note(f)
        if not ok:
            result.failures.append(f"circuit {trial} (n={n}): {why}")
    return result


# classical correspondence


def _z_relation_violations(net: Network, labels, relation) -> tuple[int, int]:
    """Force every Z outcome pattern on ``labels``; count live patterns breaking ``relation``."""
    live = violations = 0
    for bits in itertools.product((0, 1), repeat=len(labels)):
        work = net.copy()
        try:
            for label, bit in zip(labels, bits):
                work.local_measure(work.owner(label), label, Forced(bit))
        except ImpossibleBranch:
            continue
        live += 1
        if not relation(*bits):
            violations += 1
    return live, violations


def correspondence_suite(backend: str = "sv") -> list[SuiteResult]:
    parity = SuiteResult("add_parity")
    owners = {"A": "a", "B": "u", "C": "c", "D": "u", "E": "u", "F": "v"}
    links = [("A", "B"), ("C", "D"), ("E", "F")]
    topo = _topology(owners, links)
    for bits in itertools.product((0, 1), repeat=1):
        net = Network(topo, backend, outcomes=list(bits))
        locc.add(net, "B", "D", "E", "F")
        live, bad = _z_relation_violations(net, ["B", "D", "F"], lambda b, d, f: f == b ^ d)
        parity.runs += 1
        if bad or not live:
            parity.failures.append(f"branch {bits}: {bad} violations over {live} live outcomes")

    copy = SuiteResult("fanout_copy")
    owners = {"A": "a", "B": "u", "C": "u", "E": "u", "D": "v", "F": "w"}
    topo = _topology(owners, links)
    for bits in itertools.product((0, 1), repeat=2):
        net = Network(topo, backend, outcomes=list(bits))
        locc.fanout(net, "B", "C", "D", "E", "F")
        live, bad = _z_relation_violations(net, ["B", "D", "F"], lambda b, d, f: b == d == f)
        copy.runs += 1
        if bad or not live:
            copy.failures.append(f"branch {bits}: {bad} violations over {live} live outcomes")
    return [parity, copy]
