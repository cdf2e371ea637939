"""Stabilizer tableau backend (destabilizer + stabilizer rows, CHP style).

Each row is a Pauli operator stored as two Python ints used as bit sets
(``x`` and ``z``, bit ``i`` for qubit ``i``) plus a sign bit ``r``.  Rows
``0..n-1`` are destabilizers, rows ``n..2n-1`` stabilizers.  Multiplication
tracks powers of ``i`` so products of anticommuting-looking components (Y)
come out with the correct Hermitian sign.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .errors import CapacityError, DisposalError, StateError
from .statevec import MeasurementOutcome, StateVector, choose_outcome

DEFAULT_CAP = 20


def _phase_exponent(x1: int, z1: int, x2: int, z2: int) -> int:
    """Power of i picked up when multiplying P1 * P2 (sum of CHP's g)."""
    y1 = x1 & z1
    xo = x1 & ~z1
    zo = z1 & ~x1
    plus = (y1 & z2 & ~x2) | (xo & z2 & x2) | (zo & x2 & ~z2)
    minus = (y1 & x2 & ~z2) | (xo & z2 & ~x2) | (zo & x2 & z2)
    return plus.bit_count() - minus.bit_count()


class StabilizerTableau:
    def __init__(self, labels: Iterable[str]):
        """The all-zeros state on ``labels``."""
        labels = list(labels)
        if len(set(labels)) != len(labels):
            raise StateError(f"duplicate labels in {labels}")
        n = len(labels)
        self.labels = {label: i for i, label in enumerate(labels)}
        self.xs = [1 << i for i in range(n)] + [0] * n
        self.zs = [0] * n + [1 << i for i in range(n)]
        self.rs = [0] * (2 * n)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def ordered_labels(self) -> list[str]:
        return sorted(self.labels, key=self.labels.__getitem__)

    def copy(self) -> "StabilizerTableau":
        new = StabilizerTableau.__new__(StabilizerTableau)
        new.labels = dict(self.labels)
        new.xs = list(self.xs)
        new.zs = list(self.zs)
        new.rs = list(self.rs)
        return new

    def index(self, label: str) -> int:
        try:
            return self.labels[label]
        except KeyError:
            raise StateError(f"unknown qubit label {label!r}") from None

    # matrix views

    def _bits(self, rows, offset):
        n = self.num_qubits
        return np.array(
            [[(rows[offset + r] >> c) & 1 for c in range(n)] for r in range(n)],
            dtype=np.uint8,
        ).reshape(n, n)

    @property
    def x_bits(self) -> np.ndarray:
        return self._bits(self.xs, self.num_qubits)

    @property
    def z_bits(self) -> np.ndarray:
        return self._bits(self.zs, self.num_qubits)

    @property
    def phases(self) -> np.ndarray:
        n = self.num_qubits
        return np.array([1 - 2 * r for r in self.rs[n:]], dtype=int)

    def _pauli_string(self, row: int) -> str:
        chars = []
        for label in self.ordered_labels():
            i = self.labels[label]
            xb, zb = (self.xs[row] >> i) & 1, (self.zs[row] >> i) & 1
            chars.append("IXZY"[xb + 2 * zb])
        return ("-" if self.rs[row] else "+") + "".join(chars)

    def stabilizers(self) -> list[str]:
        n = self.num_qubits
        return [self._pauli_string(r) for r in range(n, 2 * n)]

    def destabilizers(self) -> list[str]:
        return [self._pauli_string(r) for r in range(self.num_qubits)]

    def _rowsum(self, h: int, i: int) -> None:
        """Row h <- row h * row i."""
        g = _phase_exponent(self.xs[i], self.zs[i], self.xs[h], self.zs[h])
        total = (2 * self.rs[h] + 2 * self.rs[i] + g) % 4
        self.rs[h] = total >> 1
        self.xs[h] ^= self.xs[i]
        self.zs[h] ^= self.zs[i]

    def _swap_pairs(self, a: int, b: int) -> None:
        """Swap stabilizer a with b together with their destabilizers."""
        n = self.num_qubits
        for off in (0, n):
            for arr in (self.xs, self.zs, self.rs):
                arr[off + a], arr[off + b] = arr[off + b], arr[off + a]

    # gates

    def h(self, label: str) -> "StabilizerTableau":
        bit = 1 << self.index(label)
        xs, zs, rs = self.xs, self.zs, self.rs
        for k in range(len(xs)):
            xk, zk = xs[k] & bit, zs[k] & bit
            if xk and zk:
                rs[k] ^= 1
            if xk != 0 and zk == 0 or xk == 0 and zk != 0:
                xs[k] ^= bit
                zs[k] ^= bit
        return self

    def s(self, label: str) -> "StabilizerTableau":
        bit = 1 << self.index(label)
        xs, zs, rs = self.xs, self.zs, self.rs
        for k in range(len(xs)):
            if xs[k] & bit:
                if zs[k] & bit:
                    rs[k] ^= 1
                zs[k] ^= bit
        return self

    def x(self, label: str) -> "StabilizerTableau":
        bit = 1 << self.index(label)
        for k, zk in enumerate(self.zs):
            if zk & bit:
                self.rs[k] ^= 1
        return self

    def z(self, label: str) -> "StabilizerTableau":
        bit = 1 << self.index(label)
        for k, xk in enumerate(self.xs):
            if xk & bit:
                self.rs[k] ^= 1
        return self

    def cnot(self, control: str, target: str) -> "StabilizerTableau":
        c, t = self.index(control), self.index(target)
        if c == t:
            raise StateError("CNOT control and target must differ")
        xs, zs, rs = self.xs, self.zs, self.rs
        for k in range(len(xs)):
            xc, zc = (xs[k] >> c) & 1, (zs[k] >> c) & 1
            xt, zt = (xs[k] >> t) & 1, (zs[k] >> t) & 1
            if xc and zt and not (xt ^ zc):
                rs[k] ^= 1
            if xc:
                xs[k] ^= 1 << t
            if zt:
                zs[k] ^= 1 << c
        return self

    # measurement

    def probability(self, label: str, bit: int = 1) -> float:
        q = self.index(label)
        n = self.num_qubits
        if any((self.xs[n + k] >> q) & 1 for k in range(n)):
            return 0.5
        return 1.0 if self._deterministic_bit(q) == bit else 0.0

    def _deterministic_bit(self, q: int) -> int:
        n = self.num_qubits
        sx, sz, sr = 0, 0, 0
        for i in range(n):
            if (self.xs[i] >> q) & 1:
                row = n + i
                g = _phase_exponent(self.xs[row], self.zs[row], sx, sz)
                sr = ((2 * sr + 2 * self.rs[row] + g) % 4) >> 1
                sx ^= self.xs[row]
                sz ^= self.zs[row]
        return sr

    def measure(self, label: str, policy) -> MeasurementOutcome:
        q = self.index(label)
        n = self.num_qubits
        p = next((n + k for k in range(n) if (self.xs[n + k] >> q) & 1), None)
        if p is None:
            det = self._deterministic_bit(q)
            bit = choose_outcome(policy, float(det == 0), float(det == 1))
            return MeasurementOutcome(bit, 1.0)
        bit = choose_outcome(policy, 0.5, 0.5)
        for i in range(2 * n):
            if i != p and (self.xs[i] >> q) & 1:
                self._rowsum(i, p)
        d = p - n
        self.xs[d], self.zs[d], self.rs[d] = self.xs[p], self.zs[p], self.rs[p]
        self.xs[p], self.zs[p], self.rs[p] = 0, 1 << q, bit
        return MeasurementOutcome(bit, 0.5)

    def drop(self, label: str) -> "StabilizerTableau":
        """Remove a qubit whose Z value is deterministic.

        Row operations are applied in symplectic pairs (stabilizer op mirrored
        on the destabilizers) so the tableau stays complete, then the row pair
        holding Z_q and the qubit's column are deleted.
        """
        q = self.index(label)
        n = self.num_qubits
        bit = 1 << q
        if any(self.xs[n + k] & bit for k in range(n)):
            raise DisposalError(f"qubit {label!r} is not in a Z basis state")
        anti = [i for i in range(n) if self.xs[i] & bit]
        p = anti[0]
        for i in anti[1:]:
            self._rowsum(i, p)
            self._rowsum(n + p, n + i)
        if self.xs[n + p] or self.zs[n + p] != bit:
            raise DisposalError(f"qubit {label!r} could not be isolated")
        for j in range(n):
            if j != p and self.zs[n + j] & bit:
                self._rowsum(n + j, n + p)
                self._rowsum(p, j)
        for i in range(n):
            if i != p and self.zs[i] & bit:
                self._rowsum(i, n + p)
                self._rowsum(p, n + i)
        low = bit - 1

        def squeeze(v: int) -> int:
            return (v & low) | ((v >> (q + 1)) << q)

        keep = [r for r in range(2 * n) if r not in (p, n + p)]
        self.xs = [squeeze(self.xs[r]) for r in keep]
        self.zs = [squeeze(self.zs[r]) for r in keep]
        self.rs = [self.rs[r] for r in keep]
        del self.labels[label]
        for other, j in self.labels.items():
            if j > q:
                self.labels[other] = j - 1
        return self

    # validity and conversion

    def is_valid(self) -> bool:
        """Stabilizers commute, and each destabilizer pairs with its stabilizer."""
        n = self.num_qubits

        def omega(a, b):
            return ((self.xs[a] & self.zs[b]).bit_count() + (self.zs[a] & self.xs[b]).bit_count()) & 1

        for a in range(2 * n):
            for b in range(a + 1, 2 * n):
                expected = 1 if (b - a == n) else 0
                if omega(a, b) != expected:
                    return False
        return True

    def to_statevector(self, cap: int = DEFAULT_CAP) -> StateVector:
        """Dense state fixed by every stabilizer generator (global phase arbitrary)."""
        n = self.num_qubits
        if n > cap:
            raise CapacityError(f"{n} qubits exceeds the statevector cap of {cap}")
        canon = canonical_form(self, sort_labels=False)
        # RREF puts Z-only rows last, each with a private pivot: zero free bits,
        # set the pivot bit where the sign demands odd parity.
        start = 0
        for k in range(n):
            row = canon.xs[n + k]
            if row:
                start = k + 1
        basis = 0
        for k in range(start, n):
            if canon.rs[n + k]:
                zk = canon.zs[n + k]
                basis |= zk & -zk
        idx = np.arange(2**n)
        vec = np.zeros(2**n, dtype=complex)
        vec[basis] = 1
        for k in range(n):
            row = n + k
            vec = 0.5 * (vec + _apply_pauli(vec, idx, canon.xs[row], canon.zs[row], canon.rs[row]))
        vec /= np.linalg.norm(vec)
        return StateVector(vec, self.ordered_labels())

    def __repr__(self):
        return f"StabilizerTableau({', '.join(self.stabilizers())})"


def _apply_pauli(vec, idx, x: int, z: int, r: int):
    phase = (-1) ** r * (1j) ** ((x & z).bit_count())
    signs = 1 - 2 * (np.bitwise_count(idx & z).astype(np.int64) & 1)
    out = np.empty_like(vec)
    out[idx ^ x] = phase * signs * vec
    return out


def canonical_form(t: StabilizerTableau, sort_labels: bool = True) -> StabilizerTableau:
    """Reduced row echelon form of the stabilizer rows.

    Columns are ordered x_0..x_{n-1}, z_0..z_{n-1} (after sorting labels when
    ``sort_labels``), so two tableaus of the same state produce identical
    stabilizer rows.  Destabilizers follow along and stay valid.
    """
    n = t.num_qubits
    out = t.copy()
    if sort_labels:
        order = sorted(t.labels)
        perm = [t.labels[label] for label in order]

        def permute(v):
            return sum(((v >> old) & 1) << new for new, old in enumerate(perm))

        out.xs = [permute(v) for v in out.xs]
        out.zs = [permute(v) for v in out.zs]
        out.labels = {label: i for i, label in enumerate(order)}
    k = 0
    for col in range(2 * n):
        arr, bit = (out.xs, 1 << col) if col < n else (out.zs, 1 << (col - n))
        pivot = next((r for r in range(k, n) if arr[n + r] & bit), None)
        if pivot is None:
            continue
        if pivot != k:
            out._swap_pairs(pivot, k)
        for r in range(n):
            if r != k and arr[n + r] & bit:
                out._rowsum(n + r, n + k)
                out._rowsum(k, r)
        k += 1
        if k == n:
            break
    return out


def stab_make_state(pairs=(), singles=()) -> StabilizerTableau:
    labels = [q for pair in pairs for q in pair] + [label for label, _ in singles]
    t = StabilizerTableau(labels)
    for a, b in pairs:
        t.h(a).cnot(a, b)
    for label, ket in singles:
        if ket == "1":
            t.x(label)
        elif ket == "+":
            t.h(label)
        elif ket == "-":
            t.x(label).h(label)
        elif ket != "0":
            raise StateError(f"unknown single-qubit state {ket!r}")
    return t


def stab_apply_h(t, q):
    return t.copy().h(q)


def stab_apply_x(t, q):
    return t.copy().x(q)


def stab_apply_z(t, q):
    return t.copy().z(q)


def stab_apply_s(t, q):
    return t.copy().s(q)


def stab_apply_cnot(t, control, target):
    return t.copy().cnot(control, target)


def stab_measure_z(t, q, policy):
    out = t.copy()
    outcome = out.measure(q, policy)
    return outcome, out


def stab_drop_qubit(t, q):
    return t.copy().drop(q)


def to_statevector(t: StabilizerTableau, cap: int = DEFAULT_CAP) -> StateVector:
    return t.to_statevector(cap)
