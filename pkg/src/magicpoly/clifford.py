"""Clifford generators {H_n, S_n, CNOT_{n,m}} as signed permutations of Pauli indices.

For a generator U the table ``(perm, sign)`` satisfies
``U^dagger P_k U = sign[k] * P_{perm[k]}``. Conjugating a state, ``rho -> U rho U^dagger``,
maps its P-space vector ``v`` to ``sign * v[perm]``; the same rule maps a
hyperplane normal so that dot products are preserved.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pauli import PauliString, pauli_product

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])


@dataclass(frozen=True)
class Generator:
    """``kind`` is "H", "S" or "CNOT"; ``sites`` is (n,) or (control, target)."""

    kind: str
    sites: tuple[int, ...]

    def __post_init__(self):
        expected = {"H": 1, "S": 1, "CNOT": 2}
        if self.kind not in expected:
            raise ValueError(f"unknown generator {self.kind!r}")
        if len(self.sites) != expected[self.kind]:
            raise ValueError(f"{self.kind} takes {expected[self.kind]} site(s)")
        if self.kind == "CNOT" and self.sites[0] == self.sites[1]:
            raise ValueError("CNOT control and target must differ")

    def validate(self, n_qubits: int) -> None:
        if any(not 0 <= s < n_qubits for s in self.sites):
            raise ValueError(f"{self} has a site outside 0..{n_qubits - 1}")

    def __str__(self) -> str:
        return f"{self.kind}{','.join(map(str, self.sites))}"

    def dense(self, n_qubits: int) -> np.ndarray:
        """Unitary matrix on the full register (test oracle, small N only)."""
        self.validate(n_qubits)
        dim = 2**n_qubits
        if self.kind in ("H", "S"):
            gate = _H if self.kind == "H" else _S
            (n,) = self.sites
            return np.kron(np.kron(np.eye(2**n), gate), np.eye(2 ** (n_qubits - n - 1)))
        c, t = self.sites
        u = np.zeros((dim, dim), dtype=complex)
        cbit, tbit = n_qubits - 1 - c, n_qubits - 1 - t
        for j in range(dim):
            k = j ^ (1 << tbit) if (j >> cbit) & 1 else j
            u[k, j] = 1
        return u


def all_generators(n_qubits: int) -> list[Generator]:
    gens = [Generator("H", (n,)) for n in range(n_qubits)]
    gens += [Generator("S", (n,)) for n in range(n_qubits)]
    gens += [
        Generator("CNOT", (c, t)) for c in range(n_qubits) for t in range(n_qubits) if c != t
    ]
    return gens


def _single(n_qubits: int, site: int, op: str) -> PauliString:
    label = ["I"] * n_qubits
    label[site] = op
    return PauliString.from_label("".join(label))


def _images(gen: Generator, n_qubits: int) -> dict[tuple[str, int], tuple[int, PauliString]]:
    """U^dagger X_n U and U^dagger Z_n U as (sign, string) for every site."""
    out = {}
    for n in range(n_qubits):
        out["X", n] = (1, _single(n_qubits, n, "X"))
        out["Z", n] = (1, _single(n_qubits, n, "Z"))
    if gen.kind == "H":
        (n,) = gen.sites
        out["X", n], out["Z", n] = out["Z", n], out["X", n]
    elif gen.kind == "S":
        (n,) = gen.sites
        out["X", n] = (-1, _single(n_qubits, n, "Y"))
    else:
        c, t = gen.sites
        out["X", c] = (1, pauli_product(_single(n_qubits, c, "X"), _single(n_qubits, t, "X"))[1])
        out["Z", t] = (1, pauli_product(_single(n_qubits, c, "Z"), _single(n_qubits, t, "Z"))[1])
    return out


@lru_cache(maxsize=None)
def signed_permutation(gen: Generator, n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays ``(perm, sign)`` with ``U^dagger P_k U = sign[k] P_{perm[k]}``."""
    gen.validate(n_qubits)
    images = _images(gen, n_qubits)
    size = 4**n_qubits
    perm = np.empty(size, dtype=np.int64)
    sign = np.empty(size, dtype=np.int64)
    identity = PauliString(0, n_qubits)
    for k in range(size):
        p = PauliString(k, n_qubits)
        x, z = p.symplectic
        # P = i^{x.z} prod X^x prod Z^z ; conjugation is multiplicative
        turns = bin(x & z).count("1")
        acc = identity
        for op, bits in (("X", x), ("Z", z)):
            for n in range(n_qubits):
                if (bits >> (n_qubits - 1 - n)) & 1:
                    s, img = images[op, n]
                    ph, acc = pauli_product(acc, img)
                    turns += ph.quarter_turns + (0 if s == 1 else 2)
        turns %= 4
        if turns % 2:
            raise AssertionError(f"non-Hermitian image for {p} under {gen}")
        perm[k] = acc.index
        sign[k] = 1 if turns == 0 else -1
    perm.setflags(write=False)
    sign.setflags(write=False)
    return perm, sign


def conjugate_vector(values: np.ndarray, gen: Generator, n_qubits: int) -> np.ndarray:
    """P-space image of a vector under ``rho -> U rho U^dagger``."""
    perm, sign = signed_permutation(gen, n_qubits)
    return sign * np.asarray(values)[perm]


def inverse_permutation(gen: Generator, n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """Table of the inverse action: ``w = sign_inv * v[perm_inv]`` undoes ``conjugate_vector``."""
    perm, sign = signed_permutation(gen, n_qubits)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    return inv, sign[inv]


def random_word(n_qubits: int, length: int, rng: np.random.Generator) -> list[Generator]:
    gens = all_generators(n_qubits)
    return [gens[i] for i in rng.integers(len(gens), size=length)]

