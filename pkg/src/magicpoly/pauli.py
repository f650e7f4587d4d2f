"""N-qubit Pauli strings in symplectic form.

Index convention: the base-4 digits of a Pauli index, most significant digit
first, give the operator on sites 0, 1, ..., N-1 with 0=I, 1=X, 2=Y, 3=Z.
Site 0 is also the most significant qubit of the computational basis, so
``dense_matrix`` is the Kronecker product in site order.

In the symplectic form, site ``n`` owns bit ``N-1-n`` of ``x_bits``/``z_bits``
and a string is ``P(x, z) = prod_n i^(x_n z_n) X^x_n Z^z_n`` (so x=z=1 is Y).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

LABELS = "IXYZ"
MAX_DENSE_QUBITS = 6

# digit -> (x, z) and back
_DIGIT_XZ = ((0, 0), (1, 0), (1, 1), (0, 1))
_XZ_DIGIT = {xz: d for d, xz in enumerate(_DIGIT_XZ)}

_SINGLE = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


class CapacityError(ValueError):
    """Requested size exceeds what is supported."""


@dataclass(frozen=True)
class Phase:
    """The unit complex number i**quarter_turns."""

    quarter_turns: int = 0

    def __post_init__(self):
        object.__setattr__(self, "quarter_turns", self.quarter_turns % 4)

    def __mul__(self, other: "Phase") -> "Phase":
        return Phase(self.quarter_turns + other.quarter_turns)

    @property
    def value(self) -> complex:
        return (1, 1j, -1, -1j)[self.quarter_turns]


@dataclass(frozen=True)
class PauliString:
    index: int
    n_qubits: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if not 0 <= self.index < 4**self.n_qubits:
            raise ValueError(f"index {self.index} out of range for N={self.n_qubits}")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        index = 0
        for ch in label.upper():
            index = 4 * index + LABELS.index(ch)
        return cls(index, len(label))

    @classmethod
    def from_symplectic(cls, x_bits: int, z_bits: int, n_qubits: int) -> "PauliString":
        return cls(symplectic_to_index(x_bits, z_bits, n_qubits), n_qubits)

    @property
    def digits(self) -> tuple[int, ...]:
        return index_digits(self.index, self.n_qubits)

    @property
    def label(self) -> str:
        return "".join(LABELS[d] for d in self.digits)

    @property
    def symplectic(self) -> tuple[int, int]:
        return index_to_symplectic(self.index, self.n_qubits)

    @property
    def x_bits(self) -> int:
        return self.symplectic[0]

    @property
    def z_bits(self) -> int:
        return self.symplectic[1]

    @property
    def weight(self) -> int:
        return sum(d != 0 for d in self.digits)

    def __str__(self) -> str:
        return self.label


def index_digits(index: int, n_qubits: int) -> tuple[int, ...]:
    out = []
    for _ in range(n_qubits):
        out.append(index % 4)
        index //= 4
    return tuple(reversed(out))


def index_to_symplectic(index: int, n_qubits: int) -> tuple[int, int]:
    x = z = 0
    for n, d in enumerate(index_digits(index, n_qubits)):
        xb, zb = _DIGIT_XZ[d]
        bit = n_qubits - 1 - n
        x |= xb << bit
        z |= zb << bit
    return x, z


def symplectic_to_index(x_bits: int, z_bits: int, n_qubits: int) -> int:
    index = 0
    for n in range(n_qubits):
        bit = n_qubits - 1 - n
        index = 4 * index + _XZ_DIGIT[((x_bits >> bit) & 1, (z_bits >> bit) & 1)]
    return index


def _check_same(p: PauliString, q: PauliString) -> None:
    if p.n_qubits != q.n_qubits:
        raise DimensionError(f"{p.n_qubits}-qubit and {q.n_qubits}-qubit strings")


def _popcount(v: int) -> int:
    return bin(v).count("1")


def pauli_product(p: PauliString, q: PauliString) -> tuple[Phase, PauliString]:
    """Return ``(phase, r)`` with ``p @ q == phase.value * r`` as matrices."""
    _check_same(p, q)
    x1, z1 = p.symplectic
    x2, z2 = q.symplectic
    # P(x,z) = i^{x.z} X^x Z^z ; Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1
    x, z = x1 ^ x2, z1 ^ z2
    turns = _popcount(x1 & z1) + _popcount(x2 & z2) + 2 * _popcount(z1 & x2) - _popcount(x & z)
    return Phase(turns), PauliString(symplectic_to_index(x, z, p.n_qubits), p.n_qubits)


def commutes(p: PauliString, q: PauliString) -> bool:
    _check_same(p, q)
    x1, z1 = p.symplectic
    x2, z2 = q.symplectic
    return (_popcount(x1 & z2) + _popcount(z1 & x2)) % 2 == 0


def dense_matrix(p: PauliString) -> np.ndarray:
    if p.n_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense matrices supported up to N={MAX_DENSE_QUBITS}")
    out = np.ones((1, 1), dtype=complex)
    for d in p.digits:
        out = np.kron(out, _SINGLE[d])
    return out


@lru_cache(maxsize=None)
def symplectic_tables(n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """(x_bits, z_bits) arrays over all 4^N indices."""
    idx = np.arange(4**n_qubits)
    x = np.zeros_like(idx)
    z = np.zeros_like(idx)
    for n in range(n_qubits):
        d = (idx >> (2 * (n_qubits - 1 - n))) & 3
        bit = n_qubits - 1 - n
        x |= ((d == 1) | (d == 2)).astype(idx.dtype) << bit
        z |= ((d == 2) | (d == 3)).astype(idx.dtype) << bit
    x.setflags(write=False)
    z.setflags(write=False)
    return x, z


@lru_cache(maxsize=None)
def site_digits(n_qubits: int) -> np.ndarray:
    """Array ``d[k, n]``: the operator digit of index k on site n."""
    idx = np.arange(4**n_qubits)
    d = np.stack([(idx >> (2 * (n_qubits - 1 - n))) & 3 for n in range(n_qubits)], axis=1)
    d.setflags(write=False)
    return d


@dataclass(frozen=True)
class PauliVector:
    """Pauli expectation values <P_k> for k = 0 .. 4^N - 1."""

    values: np.ndarray
    n_qubits: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).copy()
        if values.shape != (4**self.n_qubits,):
            raise DimensionError(f"expected {4**self.n_qubits} components, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def reduced(self) -> np.ndarray:
        """Components without the identity entry."""
        return self.values[1:]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]

    def scaled(self, mu: float) -> "PauliVector":
        """Werner-style mix ``(1-mu) I/D + mu rho`` applied in P-space."""
        v = mu * self.values
        v[0] = 1.0
        return PauliVector(v, self.n_qubits)
