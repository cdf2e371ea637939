"""Simulation of LOCC network-coding protocols on quantum repeater networks."""

from .errors import (
    CapacityError,
    ChannelError,
    DisposalError,
    ImpossibleBranch,
    LinkError,
    LocalityError,
    QNCError,
    ScriptError,
    StateError,
    TopologyError,
)
from .locc import add, con, entanglement_swap, fanout, local_cnot, rem, rem_add, teleport
from .network import (
    EventTrace,
    Network,
    Topology,
    audit_locc,
    build_network,
    format_topology,
    parse_topology,
    traces_equivalent,
)
from .protocol import (
    BranchReport,
    ProtocolScript,
    enumerate_branches,
    format_script,
    parse_script,
    run,
    summarize,
)
from .scenarios import builtin
from .stabilizer import StabilizerTableau, canonical_form
from .statevec import Forced, Random, StateVector, fidelity, from_terms, make_state, tensor

__version__ = "0.1.0"
