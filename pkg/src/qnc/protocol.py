"""Protocol scripts: parsing, execution and exhaustive branch enumeration.

Script grammar, one step per line (``#`` starts a comment)::

    <op> ctrl=<labels> res=<labels> tgt=<labels>
    checkpoint <name> [<factor> ...]

``op`` is one of con, fanout, add, rem, remadd, cnot, swap, teleport; labels
are comma separated.  A checkpoint's factors describe the expected state as a
tensor product: ``epr=A,B``, ``ghz=A,B,C``, ``zero=A``, ``one=A``,
``plus=A`` or ``sum=A,B,C:000|111`` (equal-weight superposition of the
listed basis strings, read in label order).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import locc
from .errors import CapacityError, ImpossibleBranch, ScriptError, StateError
from .network import ForcedBits, Network, Topology, as_schedule, audit_locc
from .statevec import StateVector, from_terms, subset_fidelity, tensor

FIDELITY_TOL = 1e-9
DEFAULT_BRANCH_CAP = 16

ARITY = {
    "con": {"ctrl": 1, "res": 1, "tgt": 1},
    "fanout": {"ctrl": 1, "res": 2, "tgt": 2},
    "add": {"ctrl": 2, "res": 1, "tgt": 1},
    "rem": {"res": 1, "tgt": 1},
    "remadd": {"res": 1, "tgt": 2},
    "cnot": {"ctrl": 1, "tgt": 1},
    "swap": {"res": 2, "tgt": 2},
    "teleport": {"ctrl": 1, "res": 1, "tgt": 1},
}
KEY_ORDER = ("ctrl", "res", "tgt")
FACTOR_SIZES = {"epr": 2, "ghz": 3, "zero": 1, "one": 1, "plus": 1}
LABEL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")
NAME_RE = re.compile(r"[A-Za-z0-9_.'-]+\Z")


@dataclass(frozen=True)
class PrimitiveCall:
    op: str
    ctrl: tuple[str, ...] = ()
    res: tuple[str, ...] = ()
    tgt: tuple[str, ...] = ()
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.ctrl + self.res + self.tgt

    @property
    def measurements(self) -> int:
        return locc.MEASUREMENTS[self.op]

    def __str__(self):
        parts = [self.op]
        for key in KEY_ORDER:
            if key in ARITY[self.op]:
                parts.append(f"{key}={','.join(getattr(self, key))}")
        return " ".join(parts)


@dataclass(frozen=True)
class Factor:
    kind: str
    labels: tuple[str, ...]
    terms: tuple[str, ...] = ()

    def state(self) -> StateVector:
        n = len(self.labels)
        if self.kind == "epr":
            terms = ("00", "11")
        elif self.kind == "ghz":
            terms = ("000", "111")
        elif self.kind == "zero":
            terms = ("0",)
        elif self.kind == "one":
            terms = ("1",)
        elif self.kind == "plus":
            terms = ("0", "1")
        else:
            terms = self.terms
        return from_terms(self.labels, {t: 1.0 for t in terms} if n else {})

    def __str__(self):
        text = f"{self.kind}={','.join(self.labels)}"
        if self.kind == "sum":
            text += ":" + "|".join(self.terms)
        return text


@dataclass(frozen=True)
class Checkpoint:
    name: str
    factors: tuple[Factor, ...] = ()
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(q for f in self.factors for q in f.labels)

    @cached_property
    def expected(self) -> StateVector | None:
        if not self.factors:
            return None
        return tensor(*(f.state() for f in self.factors))

    def __str__(self):
        return " ".join(["checkpoint", self.name] + [str(f) for f in self.factors])


@dataclass(frozen=True)
class ProtocolScript:
    steps: tuple = ()

    @property
    def calls(self) -> list[PrimitiveCall]:
        return [s for s in self.steps if isinstance(s, PrimitiveCall)]

    @property
    def checkpoints(self) -> list[Checkpoint]:
        return [s for s in self.steps if isinstance(s, Checkpoint)]

    @property
    def measurement_count(self) -> int:
        return sum(c.measurements for c in self.calls)

    def __str__(self):
        return format_script(self)


# parsing


def _tokens(line: str):
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _split_labels(value: str, col: int, lineno: int, known) -> tuple[str, ...]:
    labels = []
    offset = 0
    for part in value.split(","):
        pcol = col + offset
        offset += len(part) + 1
        if not part:
            raise ScriptError("empty register label", lineno, pcol)
        if not LABEL_RE.match(part):
            raise ScriptError(f"invalid register label {part!r}", lineno, pcol)
        if known is not None and part not in known:
            raise ScriptError(f"unknown register {part!r}", lineno, pcol)
        labels.append(part)
    return tuple(labels)


def _parse_call(op, ocol, args, lineno, known) -> PrimitiveCall:
    if op not in ARITY:
        raise ScriptError(f"unknown operation {op!r}", lineno, ocol)
    arity = ARITY[op]
    fields: dict[str, tuple[str, ...]] = {}
    used: dict[str, int] = {}
    for tok, col in args:
        key, eq, value = tok.partition("=")
        if not eq:
            raise ScriptError(f"expected key=value, got {tok!r}", lineno, col)
        if key not in KEY_ORDER:
            raise ScriptError(f"unknown field {key!r}", lineno, col)
        if key not in arity:
            raise ScriptError(f"{op} takes no {key}= field", lineno, col)
        if key in fields:
            raise ScriptError(f"duplicate field {key!r}", lineno, col)
        labels = _split_labels(value, col + len(key) + 1, lineno, known)
        if len(labels) != arity[key]:
            raise ScriptError(
                f"{op} {key}= takes {arity[key]} register(s), got {len(labels)}",
                lineno,
                col,
            )
        fields[key] = labels
        used[key] = col
    missing = [k for k in KEY_ORDER if k in arity and k not in fields]
    if missing:
        col = args[-1][1] if args else ocol
        raise ScriptError(
            f"{op} is missing field(s) {', '.join(k + '=' for k in missing)}",
            lineno,
            col,
        )
    flat = [q for k in KEY_ORDER for q in fields.get(k, ())]
    for q in flat:
        if flat.count(q) > 1:
            col = next(c for k, c in used.items() if q in fields[k])
            raise ScriptError(f"register {q!r} used twice in one step", lineno, col)
    return PrimitiveCall(op, fields.get("ctrl", ()), fields.get("res", ()), fields.get("tgt", ()), lineno, ocol)


def _parse_checkpoint(ccol, args, lineno, known) -> Checkpoint:
    if not args:
        raise ScriptError("checkpoint needs a name", lineno, ccol)
    (name, ncol), rest = args[0], args[1:]
    if "=" in name or not NAME_RE.match(name):
        raise ScriptError(f"invalid checkpoint name {name!r}", lineno, ncol)
    factors = []
    seen: set[str] = set()
    for tok, col in rest:
        kind, eq, value = tok.partition("=")
        if not eq:
            raise ScriptError(f"expected <kind>=<labels>, got {tok!r}", lineno, col)
        if kind not in FACTOR_SIZES and kind != "sum":
            raise ScriptError(f"unknown state factor {kind!r}", lineno, col)
        vcol = col + len(kind) + 1
        terms: tuple[str, ...] = ()
        if kind == "sum":
            value, colon, body = value.partition(":")
            if not colon or not body:
                raise ScriptError("sum= needs ':<bits>|<bits>...'", lineno, col)
        labels = _split_labels(value, vcol, lineno, known)
        if kind == "sum":
            terms = tuple(body.split("|"))
            bcol = vcol + len(value) + 1
            for t in terms:
                if len(t) != len(labels) or set(t) - {"0", "1"}:
                    raise ScriptError(
                        f"basis string {t!r} does not match {len(labels)} registers",
                        lineno,
                        bcol,
                    )
            if len(set(terms)) != len(terms):
                raise ScriptError("repeated basis string in sum=", lineno, bcol)
        elif len(labels) != FACTOR_SIZES[kind]:
            raise ScriptError(
                f"{kind}= takes {FACTOR_SIZES[kind]} register(s), got {len(labels)}",
                lineno,
                col,
            )
        for q in labels:
            if q in seen:
                raise ScriptError(f"register {q!r} appears in two factors", lineno, col)
            seen.add(q)
        factors.append(Factor(kind, labels, terms))
    return Checkpoint(name, tuple(factors), lineno, ccol)


def parse_script(text: str, topology: Topology | None = None) -> ProtocolScript:
    """Parse a protocol script; raises ScriptError with line and column.

    With a topology, every register must be one of its registers.
    """
    known = set(topology.owners) if topology is not None else None
    steps = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        tokens = _tokens(raw.split("#", 1)[0])
        if not tokens:
            continue
        (op, ocol), args = tokens[0], tokens[1:]
        if op == "checkpoint":
            steps.append(_parse_checkpoint(ocol, args, lineno, known))
        else:
            steps.append(_parse_call(op, ocol, args, lineno, known))
    return ProtocolScript(tuple(steps))


def format_script(script: ProtocolScript) -> str:
    return "".join(f"{step}\n" for step in script.steps)


# execution


def execute_call(net: Network, call: PrimitiveCall) -> None:
    c, r, t = call.ctrl, call.res, call.tgt
    if call.op == "con":
        locc.con(net, c[0], r[0], t[0])
    elif call.op == "fanout":
        locc.fanout(net, c[0], r[0], t[0], r[1], t[1])
    elif call.op == "add":
        locc.add(net, c[0], c[1], r[0], t[0])
    elif call.op == "rem":
        locc.rem(net, r[0], t[0])
    elif call.op == "remadd":
        locc.rem_add(net, r[0], t[0], t[1])
    elif call.op == "cnot":
        locc.local_cnot(net, c[0], t[0])
    elif call.op == "swap":
        locc.entanglement_swap(net, r[0], r[1], t[0], t[1])
    elif call.op == "teleport":
        locc.teleport(net, c[0], r[0], t[0])
    else:
        raise ValueError(f"unknown operation {call.op!r}")


def checkpoint_eval(state, checkpoint: Checkpoint) -> float | None:
    """Fidelity of ``state`` (reduced to the checkpoint's registers) with its expectation."""
    if checkpoint.expected is None:
        return None
    missing = set(checkpoint.labels) - set(state.labels)
    if missing:
        raise StateError(f"checkpoint {checkpoint.name}: registers {sorted(missing)} not present")
    return subset_fidelity(state.to_statevector(), checkpoint.expected)


@dataclass
class BranchReport:
    index: int
    bits: tuple[int, ...]
    live: bool = True
    dead_site: int | None = None
    checkpoints: dict = field(default_factory=dict)
    fidelity_final: float | None = None
    messages: int = 0
    drops: int = 0
    audit: bool = True
    error: str = ""

    def passed(self, tol: float = FIDELITY_TOL) -> bool:
        if not self.live or not self.audit:
            return False
        return all(v is None or v >= 1 - tol for v in self.checkpoints.values())

    @property
    def bit_string(self) -> str:
        return "".join(map(str, self.bits))


def _step(net: Network, step, ckpts: dict) -> None:
    if isinstance(step, Checkpoint):
        ckpts[step.name] = checkpoint_eval(net.state, step)
    else:
        execute_call(net, step)


def _finish(report: BranchReport, net: Network, ckpts: dict, script: ProtocolScript) -> BranchReport:
    report.checkpoints = dict(ckpts)
    for cp in reversed(script.checkpoints):
        if ckpts.get(cp.name) is not None:
            report.fidelity_final = ckpts[cp.name]
            break
    audit = audit_locc(net.trace)
    report.audit = audit.passed
    report.messages = audit.messages
    report.drops = audit.drops
    return report


def run(net: Network, script: ProtocolScript, outcomes=None, checkpoints: bool = True) -> tuple[Network, BranchReport]:
    """Execute ``script`` on ``net`` in place.

    ``outcomes`` is a forced-bit sequence (or string) indexed by measurement
    site in execution order, a ``Random`` policy, or None for the network's
    own schedule.  An impossible forced outcome ends the branch with a dead
    report instead of raising.
    """
    if outcomes is not None:
        net.outcomes = as_schedule(outcomes)
    bits = getattr(net.outcomes, "bits", ())
    report = BranchReport(0, tuple(bits))
    ckpts: dict = {}
    try:
        for step in script.steps:
            if isinstance(step, Checkpoint) and not checkpoints:
                continue
            _step(net, step, ckpts)
    except ImpossibleBranch as exc:
        report.live = False
        report.dead_site = net.outcomes.position - 1
        report.error = str(exc)
    if not bits:
        report.bits = tuple(e.bit for e in net.trace.events if e.kind == "measure")
    return net, _finish(report, net, ckpts, script)


def enumerate_branches(
    net: Network,
    script: ProtocolScript,
    cap: int = DEFAULT_BRANCH_CAP,
    checkpoints: bool = True,
) -> list[BranchReport]:
    """One report per outcome assignment in {0,1}^m, lexicographic order.

    Work is shared between branches: a snapshot is kept after every step, and
    each branch resumes from the deepest snapshot whose consumed bits match
    its own prefix.  ``net`` itself is left untouched.
    """
    m = script.measurement_count
    if m > cap:
        raise CapacityError(f"{m} measurement sites exceeds the branch cap of {cap}")
    steps = [s for s in script.steps if checkpoints or not isinstance(s, Checkpoint)]
    stack = [(0, 0, net.copy(), {})]
    reports = []
    prev: tuple[int, ...] | None = None
    for index, bits in enumerate(itertools.product((0, 1), repeat=m)):
        if prev is not None:
            common = next(i for i, (a, b) in enumerate(zip(prev, bits)) if a != b)
            while stack[-1][1] > common:
                stack.pop()
        prev = bits
        step_index, consumed, snapshot, saved = stack[-1]
        work = snapshot.copy()
        work.outcomes = ForcedBits(bits, start=consumed)
        ckpts = dict(saved)
        report = BranchReport(index, bits)
        try:
            for k in range(step_index, len(steps)):
                _step(work, steps[k], ckpts)
                stack.append((k + 1, work.outcomes.position, work.copy(), dict(ckpts)))
        except ImpossibleBranch as exc:
            report.live = False
            report.dead_site = work.outcomes.position - 1
            report.error = str(exc)
        reports.append(_finish(report, work, ckpts, script))
    return reports


def summarize(reports: list[BranchReport], tol: float = FIDELITY_TOL) -> dict:
    live = [r for r in reports if r.live]
    finals = [r.fidelity_final for r in live if r.fidelity_final is not None]
    return {
        "branches": len(reports),
        "live": len(live),
        "min_fidelity": min(finals) if finals else None,
        "messages": sorted({r.messages for r in live}),
        "audit": all(r.audit for r in live),
        "passed": bool(live) and all(r.passed(tol) for r in live),
    }
