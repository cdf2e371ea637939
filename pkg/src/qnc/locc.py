"""Network-coding primitives built from local gates, Z measurements and
classical messages.

Every primitive measures its resource register, ships the outcome to the
nodes that correct, applies the conditional Pauli there and finally drops the
measured register.  Message tags are ``<op>-<measured register>``.
"""

from __future__ import annotations

from .network import Network, as_schedule


def _with_outcomes(net: Network, outcomes):
    """Temporarily swap in a caller-supplied outcome schedule."""
    if outcomes is None:
        return net.outcomes
    previous = net.outcomes
    net.outcomes = as_schedule(outcomes)
    return previous


def _measure_and_send(net: Network, node: str, label: str, receivers, tag: str) -> int:
    bit = net.local_measure(node, label)
    seen = []
    for receiver in receivers:
        if receiver not in seen:
            seen.append(receiver)
            net.send_bit(node, receiver, bit, tag)
    return bit


def con(net: Network, control: str, resource: str, target: str, outcomes=None) -> Network:
    """Connection: entangle ``target`` with ``control`` through the link resource-target."""
    previous = _with_outcomes(net, outcomes)
    try:
        u, v = net.owner(resource), net.owner(target)
        net.require_link(resource, target)
        net.local_gate(u, "CNOT", (control, resource))
        tag = f"con-{resource}"
        _measure_and_send(net, u, resource, [v], tag)
        net.local_correct(v, "X", target, tag)
        net.local_drop(u, resource)
    finally:
        net.outcomes = previous
    return net


def fanout(net: Network, control: str, r1: str, t1: str, r2: str, t2: str, outcomes=None) -> Network:
    """Copy ``control`` into two remote targets: two Connections in sequence."""
    previous = _with_outcomes(net, outcomes)
    try:
        net.require_link(r1, t1)
        net.require_link(r2, t2)
        con(net, control, r1, t1)
        con(net, control, r2, t2)
    finally:
        net.outcomes = previous
    return net


def add(net: Network, c1: str, c2: str, resource: str, target: str, outcomes=None) -> Network:
    """Write the parity of ``c1`` and ``c2`` into a remote target."""
    previous = _with_outcomes(net, outcomes)
    try:
        u = net.owner(resource)
        net.require_link(resource, target)
        net.local_gate(u, "CNOT", (c1, resource))
        con(net, c2, resource, target)
    finally:
        net.outcomes = previous
    return net


def rem(net: Network, resource: str, target: str, outcomes=None) -> Network:
    """Removal: X-basis measure ``resource`` and fix the sign on ``target``."""
    previous = _with_outcomes(net, outcomes)
    try:
        u, v = net.owner(resource), net.owner(target)
        net.local_gate(u, "H", (resource,))
        tag = f"rem-{resource}"
        _measure_and_send(net, u, resource, [v], tag)
        net.local_correct(v, "Z", target, tag)
        net.local_drop(u, resource)
    finally:
        net.outcomes = previous
    return net


def rem_add(net: Network, resource: str, t1: str, t2: str, outcomes=None) -> Network:
    """Remove a parity register; the sign fix lands on both addends.

    One message goes to each distinct receiving node.
    """
    previous = _with_outcomes(net, outcomes)
    try:
        u = net.owner(resource)
        v, w = net.owner(t1), net.owner(t2)
        net.local_gate(u, "H", (resource,))
        tag = f"remadd-{resource}"
        _measure_and_send(net, u, resource, [v, w], tag)
        net.local_correct(v, "Z", t1, tag)
        net.local_correct(w, "Z", t2, tag)
        net.local_drop(u, resource)
    finally:
        net.outcomes = previous
    return net


def local_cnot(net: Network, control: str, target: str) -> Network:
    return net.local_gate(net.owner(control), "CNOT", (control, target))


def _bell_measure(net: Network, node: str, first: str, second: str, prefix: str):
    net.local_gate(node, "CNOT", (first, second))
    net.local_gate(node, "H", (first,))
    m1 = net.local_measure(node, first)
    m2 = net.local_measure(node, second)
    return (m1, f"{prefix}-{first}"), (m2, f"{prefix}-{second}")


def entanglement_swap(net: Network, relay_b: str, relay_c: str, end_a: str, end_d: str, outcomes=None) -> Network:
    """Bell-measure the relay's two halves; end_a and end_d end up sharing |Psi+>.

    Corrections at end_d: X if the CNOT-target bit is 1, then Z if the
    Hadamard bit is 1.
    """
    previous = _with_outcomes(net, outcomes)
    try:
        r, d = net.owner(relay_b), net.owner(end_d)
        net.require_link(end_a, relay_b)
        net.require_link(relay_c, end_d)
        (m1, tag1), (m2, tag2) = _bell_measure(net, r, relay_b, relay_c, "swap")
        net.send_bit(r, d, m1, tag1)
        net.send_bit(r, d, m2, tag2)
        net.local_correct(d, "X", end_d, tag2)
        net.local_correct(d, "Z", end_d, tag1)
        net.local_drop(r, relay_b)
        net.local_drop(r, relay_c)
        net.add_link(end_a, end_d)
    finally:
        net.outcomes = previous
    return net


def teleport(net: Network, payload: str, epr_a: str, epr_b: str, outcomes=None) -> Network:
    """Move the payload's state onto ``epr_b``.

    Bits are routed hop by hop when the two ends share no direct channel.
    """
    previous = _with_outcomes(net, outcomes)
    try:
        u, v = net.owner(epr_a), net.owner(epr_b)
        net.require_link(epr_a, epr_b)
        (m1, tag1), (m2, tag2) = _bell_measure(net, u, payload, epr_a, "tele")
        net.route_bit(u, v, m1, tag1)
        net.route_bit(u, v, m2, tag2)
        net.local_correct(v, "X", epr_b, tag2)
        net.local_correct(v, "Z", epr_b, tag1)
        net.local_drop(u, payload)
        net.local_drop(u, epr_a)
    finally:
        net.outcomes = previous
    return net


# measurement sites consumed by each operation, in execution order
MEASUREMENTS = {
    "con": 1,
    "fanout": 2,
    "add": 1,
    "rem": 1,
    "remadd": 1,
    "cnot": 0,
    "swap": 2,
    "teleport": 2,
}
