"""Dense pure-state simulation over labelled qubits.

Qubit ordering is little-endian: the label stored at index ``i`` is bit ``i``
of the basis-state integer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import DisposalError, ImpossibleBranch, StateError

NORM_TOL = 1e-12
SQRT1_2 = 1 / np.sqrt(2)

SINGLE_STATES = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([SQRT1_2, SQRT1_2], dtype=complex),
    "-": np.array([SQRT1_2, -SQRT1_2], dtype=complex),
}


@dataclass(frozen=True)
class MeasurementOutcome:
    bit: int
    probability: float


@dataclass(frozen=True)
class Forced:
    """Take outcome ``bit``; raises ImpossibleBranch if it has probability zero."""

    bit: int

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError(f"forced bit must be 0 or 1, got {self.bit!r}")


@dataclass
class Random:
    """Sample outcomes from a generator seeded once with ``seed``."""

    seed: int | None = None
    _rng: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self._rng = np.random.default_rng(self.seed)

    def draw(self, p1: float) -> int:
        return int(self._rng.random() < p1)


def choose_outcome(policy, p0: float, p1: float) -> int:
    """Shared outcome selection for both backends."""
    if isinstance(policy, Forced):
        p = p1 if policy.bit else p0
        if p < NORM_TOL:
            raise ImpossibleBranch(f"outcome {policy.bit} has probability {p:.3g}")
        return policy.bit
    if isinstance(policy, Random):
        return policy.draw(p1)
    raise TypeError(f"unsupported outcome policy {policy!r}")


class StateVector:
    """An n-qubit pure state with a label -> qubit index directory.

    Gate methods mutate in place and return ``self``; use :meth:`copy` (or the
    module-level ``apply_*`` functions) to keep the original.
    """

    def __init__(self, amplitudes, labels: Iterable[str]):
        labels = list(labels)
        if len(set(labels)) != len(labels):
            raise StateError(f"duplicate labels in {labels}")
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 ** len(labels):
            raise StateError(
                f"{amps.size} amplitudes do not match {len(labels)} qubits"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > 1e-9:
            raise StateError(f"state is not normalized (norm {norm:.12f})")
        self.amplitudes = amps
        self.labels = {label: i for i, label in enumerate(labels)}

    @classmethod
    def basis(cls, labels: Iterable[str], bits: Mapping[str, int] | None = None):
        labels = list(labels)
        bits = bits or {}
        amps = np.zeros(2 ** len(labels), dtype=complex)
        amps[sum(bits.get(label, 0) << i for i, label in enumerate(labels))] = 1
        return cls(amps, labels)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def ordered_labels(self) -> list[str]:
        return sorted(self.labels, key=self.labels.__getitem__)

    def copy(self) -> "StateVector":
        new = StateVector.__new__(StateVector)
        new.amplitudes = self.amplitudes.copy()
        new.labels = dict(self.labels)
        return new

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def index(self, label: str) -> int:
        try:
            return self.labels[label]
        except KeyError:
            raise StateError(f"unknown qubit label {label!r}") from None

    def _split(self, label: str) -> np.ndarray:
        i = self.index(label)
        return self.amplitudes.reshape(-1, 2, 2**i)

    # gates

    def h(self, label: str) -> "StateVector":
        view = self._split(label)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = (a + b) * SQRT1_2
        view[:, 1, :] = (a - b) * SQRT1_2
        return self

    def x(self, label: str) -> "StateVector":
        view = self._split(label)
        view[:] = view[:, ::-1, :].copy()
        return self

    def z(self, label: str) -> "StateVector":
        self._split(label)[:, 1, :] *= -1
        return self

    def s(self, label: str) -> "StateVector":
        self._split(label)[:, 1, :] *= 1j
        return self

    def cnot(self, control: str, target: str) -> "StateVector":
        c, t = self.index(control), self.index(target)
        if c == t:
            raise StateError("CNOT control and target must differ")
        idx = np.arange(self.amplitudes.size)
        src = idx[((idx >> c) & 1 == 1) & ((idx >> t) & 1 == 0)]
        dst = src | (1 << t)
        amps = self.amplitudes
        amps[src], amps[dst] = amps[dst], amps[src].copy()
        return self

    def unitary(self, label: str, matrix) -> "StateVector":
        """Apply an arbitrary single-qubit unitary (used to load payloads)."""
        m = np.asarray(matrix, dtype=complex)
        if m.shape != (2, 2) or not np.allclose(m.conj().T @ m, np.eye(2), atol=1e-12):
            raise StateError("matrix is not a 2x2 unitary")
        view = self._split(label)
        view[:] = np.einsum("ab,ibj->iaj", m, view)
        return self

    # measurement and disposal

    def probability(self, label: str, bit: int = 1) -> float:
        view = self._split(label)
        part = view[:, bit, :]
        return float(np.vdot(part, part).real)

    def measure(self, label: str, policy) -> MeasurementOutcome:
        p1 = self.probability(label, 1)
        p0 = self.probability(label, 0)
        bit = choose_outcome(policy, p0, p1)
        p = p1 if bit else p0
        view = self._split(label)
        view[:, 1 - bit, :] = 0
        view[:, bit, :] /= np.sqrt(p)
        return MeasurementOutcome(bit, p)

    def drop(self, label: str) -> "StateVector":
        """Remove a qubit that sits in a computational basis state."""
        i = self.index(label)
        view = self._split(label)
        p1 = float(np.vdot(view[:, 1, :], view[:, 1, :]).real)
        if NORM_TOL < p1 < 1 - NORM_TOL:
            raise DisposalError(
                f"qubit {label!r} is not in a basis state (P(1)={p1:.6f})"
            )
        bit = int(p1 > 0.5)
        self.amplitudes = view[:, bit, :].reshape(-1).copy()
        del self.labels[label]
        for other, j in self.labels.items():
            if j > i:
                self.labels[other] = j - 1
        return self

    def to_statevector(self) -> "StateVector":
        return self

    def __repr__(self):
        return f"StateVector(labels={self.ordered_labels()}, n={self.num_qubits})"


# construction


def make_state(pairs=(), singles=()) -> StateVector:
    """Tensor product of |Psi+> on each pair and single-qubit kets.

    ``singles`` holds ``(label, ket)`` with ket one of ``"0"``, ``"1"``, ``"+"``,
    ``"-"``.  Labels are laid out pairs first, then singles.
    """
    labels: list[str] = []
    factors: list[tuple[list[str], np.ndarray]] = []
    for a, b in pairs:
        factors.append(([a, b], np.array([SQRT1_2, 0, 0, SQRT1_2], dtype=complex)))
    for label, ket in singles:
        if ket not in SINGLE_STATES:
            raise StateError(f"unknown single-qubit state {ket!r}")
        factors.append(([label], SINGLE_STATES[ket]))
    amps = np.ones(1, dtype=complex)
    for f_labels, f_amps in factors:
        labels.extend(f_labels)
        # new labels take the higher bit positions
        amps = np.kron(f_amps, amps)
    if len(set(labels)) != len(labels):
        raise StateError(f"duplicate labels in {labels}")
    return StateVector(amps, labels)


def from_terms(labels, terms: Mapping[str, complex]) -> StateVector:
    """Build a normalized state from ``{bitstring: amplitude}``.

    Bitstrings are read left to right in ``labels`` order, the way kets are
    usually written (``"01"`` over ``(A, B)`` means A=0, B=1).
    """
    labels = list(labels)
    amps = np.zeros(2 ** len(labels), dtype=complex)
    for bits, amp in terms.items():
        if len(bits) != len(labels) or set(bits) - {"0", "1"}:
            raise StateError(f"bad basis string {bits!r} for labels {labels}")
        amps[sum(int(b) << i for i, b in enumerate(bits))] += amp
    norm = np.linalg.norm(amps)
    if norm < NORM_TOL:
        raise StateError("expression has zero norm")
    return StateVector(amps / norm, labels)


def tensor(*states: StateVector) -> StateVector:
    labels: list[str] = []
    amps = np.ones(1, dtype=complex)
    for st in states:
        labels.extend(st.ordered_labels())
        amps = np.kron(st.amplitudes, amps)
    return StateVector(amps, labels)


# functional wrappers


def apply_h(s: StateVector, q: str) -> StateVector:
    return s.copy().h(q)


def apply_x(s: StateVector, q: str) -> StateVector:
    return s.copy().x(q)


def apply_z(s: StateVector, q: str) -> StateVector:
    return s.copy().z(q)


def apply_s(s: StateVector, q: str) -> StateVector:
    return s.copy().s(q)


def apply_cnot(s: StateVector, control: str, target: str) -> StateVector:
    return s.copy().cnot(control, target)


def measure_z(s: StateVector, q: str, policy) -> tuple[MeasurementOutcome, StateVector]:
    out = s.copy()
    outcome = out.measure(q, policy)
    return outcome, out


def drop_qubit(s: StateVector, q: str) -> StateVector:
    return s.copy().drop(q)


# comparison


def _tensor_in_order(s: StateVector, order: list[str]) -> np.ndarray:
    """Amplitudes as an n-axis tensor whose axis k is qubit ``order[k]``."""
    n = s.num_qubits
    t = s.amplitudes.reshape([2] * n) if n else s.amplitudes.reshape(())
    # C-order: axis 0 is the most significant bit, i.e. index n-1
    axes = [n - 1 - s.labels[label] for label in order]
    return np.transpose(t, axes)


def fidelity(s1: StateVector, s2: StateVector, relabeling: Mapping[str, str] | None = None) -> float:
    """|<s1|s2>|^2 after renaming s2's labels through ``relabeling``."""
    relabeling = relabeling or {}
    renamed = {relabeling.get(label, label): i for label, i in s2.labels.items()}
    if len(renamed) != len(s2.labels):
        raise StateError("relabeling merges two qubits")
    if set(renamed) != set(s1.labels):
        raise StateError(
            f"label sets differ: {sorted(s1.labels)} vs {sorted(renamed)}"
        )
    order = s1.ordered_labels()
    inv = {v: k for k, v in relabeling.items()}
    a = _tensor_in_order(s1, order)
    b = _tensor_in_order(s2, [inv.get(label, label) for label in order])
    return float(abs(np.vdot(a, b)) ** 2)


def subset_fidelity(s: StateVector, expected: StateVector) -> float:
    """<phi|rho|phi> where rho is ``s`` reduced onto ``expected``'s labels."""
    keep = expected.ordered_labels()
    missing = set(keep) - set(s.labels)
    if missing:
        raise StateError(f"labels {sorted(missing)} not present in state")
    if len(keep) == s.num_qubits:
        return fidelity(expected, s)
    rest = [label for label in s.ordered_labels() if label not in expected.labels]
    m = _tensor_in_order(s, keep + rest).reshape(2 ** len(keep), -1)
    phi = _tensor_in_order(expected, keep).reshape(-1)
    v = phi.conj() @ m
    return float(np.vdot(v, v).real)


def reduced_purity(s: StateVector, subset: Iterable[str]) -> float:
    """Tr(rho^2) of the reduced state on ``subset``."""
    subset = list(subset)
    if not subset or len(set(subset)) >= s.num_qubits:
        raise StateError("subset must be a nonempty proper subset of the qubits")
    for label in subset:
        s.index(label)
    rest = [label for label in s.ordered_labels() if label not in subset]
    m = _tensor_in_order(s, subset + rest).reshape(2 ** len(subset), -1)
    sv = np.linalg.svd(m, compute_uv=False)
    return float(np.sum(sv**4))
