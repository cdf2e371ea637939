"""Canned topologies and scripts.

The butterfly checkpoints are the intermediate states of the encoding, written
as equal-weight superpositions over the surviving registers.
"""

from __future__ import annotations

from .network import Topology, parse_topology
from .protocol import ProtocolScript, parse_script

BUTTERFLY_TOPOLOGY = """\
# two sources, two relays, two sinks; one EPR pair per adjacent pair
node s1
node s2
node r1
node r2
node t1
node t2
own s1 A C
own s2 E G
own r1 D H I
own r2 J K M
own t1 F N
own t2 B L
epr A B
epr C D
epr E F
epr G H
epr I J
epr K L
epr M N
chan s1 r1
chan s2 r1
chan r1 r2
chan r2 t1
chan r2 t2
chan s1 t2
chan s2 t1
"""

BUTTERFLY_SCRIPT = """\
checkpoint psi0 epr=A,B epr=C,D epr=E,F epr=G,H epr=I,J epr=K,L epr=M,N
# step 1
con ctrl=A res=C tgt=D
con ctrl=E res=G tgt=H
checkpoint psi1 ghz=A,B,D ghz=E,F,H epr=I,J epr=K,L epr=M,N
# step 2
add ctrl=D,H res=I tgt=J
checkpoint psi2 sum=A,B,D,E,F,H,J:0000000|1111110|0001111|1110001 epr=K,L epr=M,N
# step 3
fanout ctrl=J res=K,M tgt=L,N
checkpoint psi3 sum=A,B,D,E,F,H,J,L,N:000000000|111111000|000111111|111000111
# step 4
cnot ctrl=N tgt=F
cnot ctrl=L tgt=B
checkpoint psi4 sum=A,B,D,E,F,H,J,L,N:000000000|111111000|010101111|101010111
# step 5
rem res=L tgt=J
rem res=N tgt=J
checkpoint psi5 sum=A,B,D,E,F,H,J:0000000|1111110|0101011|1010101
# step 6
remadd res=J tgt=D,H
checkpoint psi6 sum=A,B,D,E,F,H:000000|111111|010101|101010
# step 7
rem res=D tgt=A
rem res=H tgt=E
checkpoint psi7 epr=A,F epr=B,E
"""

ANCILLA_TOPOLOGY = BUTTERFLY_TOPOLOGY.replace("own s1 A C", "own s1 A' A C").replace(
    "own s2 E G", "own s2 E' E G"
) + "init A' +\ninit E' +\n"

ANCILLA_SCRIPT = """\
checkpoint psi0 plus=A' epr=A,B epr=C,D plus=E' epr=E,F epr=G,H epr=I,J epr=K,L epr=M,N
# step 1
fanout ctrl=A' res=A,C tgt=B,D
fanout ctrl=E' res=E,G tgt=F,H
checkpoint psi1 ghz=A',B,D ghz=E',F,H epr=I,J epr=K,L epr=M,N
# step 2
add ctrl=D,H res=I tgt=J
checkpoint psi2 sum=A',B,D,E',F,H,J:0000000|1111110|0001111|1110001 epr=K,L epr=M,N
# step 3
fanout ctrl=J res=K,M tgt=L,N
checkpoint psi3 sum=A',B,D,E',F,H,J,L,N:000000000|111111000|000111111|111000111
# step 4
cnot ctrl=N tgt=F
cnot ctrl=L tgt=B
checkpoint psi4 sum=A',B,D,E',F,H,J,L,N:000000000|111111000|010101111|101010111
# step 5
rem res=L tgt=J
rem res=N tgt=J
checkpoint psi5 sum=A',B,D,E',F,H,J:0000000|1111110|0101011|1010101
# step 6
remadd res=J tgt=D,H
checkpoint psi6 sum=A',B,D,E',F,H:000000|111111|010101|101010
# step 7
rem res=D tgt=A'
rem res=H tgt=E'
checkpoint psi7 sum=A',B,E',F:0000|1111|0110|1001
"""

SWAP_CHAIN_TOPOLOGY = """\
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

SWAP_CHAIN_SCRIPT = """\
checkpoint psi0 epr=A,B epr=C,D
swap res=B,C tgt=A,D
checkpoint final epr=A,D
"""

SINGLE_CON_TOPOLOGY = """\
node u
node v
node w
own u A C
own w B
own v D
epr A B
epr C D
chan u v
chan u w
"""

SINGLE_CON_SCRIPT = """\
con ctrl=A res=C tgt=D
checkpoint ghz ghz=A,B,D
"""

SOURCES = {
    "butterfly": (BUTTERFLY_TOPOLOGY, BUTTERFLY_SCRIPT),
    "butterfly_with_ancilla": (ANCILLA_TOPOLOGY, ANCILLA_SCRIPT),
    "swap_chain": (SWAP_CHAIN_TOPOLOGY, SWAP_CHAIN_SCRIPT),
    "single_con": (SINGLE_CON_TOPOLOGY, SINGLE_CON_SCRIPT),
}


def builtin(name: str) -> tuple[Topology, ProtocolScript]:
    try:
        topo_text, script_text = SOURCES[name]
    except KeyError:
        raise KeyError(f"unknown builtin {name!r}; choose from {sorted(SOURCES)}") from None
    topology = parse_topology(topo_text)
    return topology, parse_script(script_text, topology)
