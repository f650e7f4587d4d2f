"""Independent dense-matrix oracles for small N."""
from functools import reduce
from itertools import product

import numpy as np

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_labels(n):
    return ["".join(p) for p in product("IXYZ", repeat=n)]


def pauli_matrix(label):
    return reduce(np.kron, [SINGLE[c] for c in label])


def expectations(rho):
    n = int(np.log2(rho.shape[0]))
    return np.array([np.trace(rho @ pauli_matrix(p)).real for p in pauli_labels(n)])


def from_expectations(v):
    n = int(round(np.log(len(v)) / np.log(4)))
    return sum(c * pauli_matrix(p) for c, p in zip(v, pauli_labels(n))) / 2**n


def random_density(n, rng, rank=None):
    d = 2**n
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure(n, rng):
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return psi / np.linalg.norm(psi)


def reset_qubit(rho, n, site, ket):
    """Trace out ``site`` and prepare it afresh in the pure state ``ket``."""
    t = rho.reshape([2] * (2 * n))
    # move the site to the end on both the row and the column side
    rows = [i for i in range(n) if i != site] + [site]
    t = t.transpose(rows + [n + i for i in rows])
    d = 2 ** (n - 1)
    reduced = np.einsum("ajbj->ab", t.reshape(d, 2, d, 2))
    out = np.kron(reduced, np.outer(ket, np.conj(ket))).reshape([2] * (2 * n))
    back = np.argsort(rows)
    return out.transpose(list(back) + [n + i for i in back]).reshape(2**n, 2**n)
