"""Brute-force reference computations, independent of the package internals.

Everything here works on plain numpy vectors in big-endian order over an
explicit label list: ``vec[int("b0 b1 ... b_{n-1}", 2)]`` is the amplitude of
the ket written left to right in ``order``.
"""

import itertools

import numpy as np

I2 = np.eye(2)
H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])
S = np.diag([1, 1j])
PAULI = {"I": I2, "X": X, "Y": np.array([[0, -1j], [1j, 0]]), "Z": Z}


def ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def superpose(terms: dict) -> np.ndarray:
    """Normalized sum of amp * |bits>."""
    v = sum(amp * ket(bits) for bits, amp in terms.items())
    return v / np.linalg.norm(v)


def vec(state, order) -> np.ndarray:
    """Read a StateVector's amplitudes out in ``order`` by explicit indexing."""
    n = len(order)
    out = np.zeros(2**n, dtype=complex)
    pos = [state.labels[label] for label in order]
    for k, bits in enumerate(itertools.product((0, 1), repeat=n)):
        idx = sum(b << p for b, p in zip(bits, pos))
        out[k] = state.amplitudes[idx]
    return out


def op(order, label, m) -> np.ndarray:
    """Full-register matrix of a single-qubit gate."""
    full = np.ones((1, 1))
    for q in order:
        full = np.kron(full, m if q == label else I2)
    return full


def cnot(order, c, t) -> np.ndarray:
    n = len(order)
    ci, ti = order.index(c), order.index(t)
    m = np.zeros((2**n, 2**n))
    for bits in itertools.product((0, 1), repeat=n):
        out = list(bits)
        out[ti] ^= out[ci]
        m[int("".join(map(str, out)), 2), int("".join(map(str, bits)), 2)] = 1
    return m


def pauli_op(order, string) -> np.ndarray:
    """Signed Pauli string like '-XZI' as a matrix over ``order``."""
    sign = -1 if string[0] == "-" else 1
    full = np.ones((1, 1))
    for ch in string.lstrip("+-"):
        full = np.kron(full, PAULI[ch])
    assert full.shape[0] == 2 ** len(order)
    return sign * full


def reduced_density(v, order, keep) -> np.ndarray:
    """Partial trace of |v><v| onto ``keep``: contract the traced indices of ket and bra."""
    n = len(order)
    t = v.reshape([2] * n)
    kept = [order.index(q) for q in keep]
    ket_idx = list(range(n))
    bra_idx = [n + k if k in kept else k for k in range(n)]
    out_idx = kept + [n + k for k in kept]
    r = np.einsum(t, ket_idx, t.conj(), bra_idx, out_idx)
    d = 2 ** len(keep)
    return r.reshape(d, d)


def purity(v, order, keep) -> float:
    rho = reduced_density(v, order, keep)
    return float(np.trace(rho @ rho).real)


def fid(a, b) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def random_vec(rng, n) -> np.ndarray:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def epr_product(pairs) -> tuple[np.ndarray, list]:
    """Tensor product of |Psi+> on each pair, with its label order."""
    v = np.ones(1, dtype=complex)
    order = []
    for a, b in pairs:
        v = np.kron(v, superpose({"00": 1, "11": 1}))
        order += [a, b]
    return v, order
