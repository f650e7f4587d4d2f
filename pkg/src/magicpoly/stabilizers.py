"""Enumeration of pure stabilizer states as sparse P-space vectors.

The orbit of |0...0> under {H_n, S_n, CNOT_{n,m}} is grown breadth first.
Each state is a row of 2^N ``(pauli_index, sign)`` entries; inside the search
an entry is packed into one integer code ``2 * index + (sign < 0)`` so that a
generator acts on a whole row by table lookup.
"""
from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from math import prod
from pathlib import Path
from typing import Iterator

import numpy as np

from .clifford import all_generators, inverse_permutation
from .pauli import CapacityError, PauliString, commutes, pauli_product
from .states import DensityState, expectation_values

log = logging.getLogger(__name__)

MAX_EXHAUSTIVE_QUBITS = 4
MAX_LARGE_QUBITS = 5
CACHE_MAGIC = b"STBV1"
_CHUNK_ROWS = 1 << 17


class EnumerationError(RuntimeError):
    """The orbit closed with a count different from 2^N prod(2^n + 1)."""


class NotAStabilizer(ValueError):
    pass


def stabilizer_count(n_qubits: int) -> int:
    return 2**n_qubits * prod(2**n + 1 for n in range(1, n_qubits + 1))


@dataclass(frozen=True)
class StabilizerVector:
    entries: tuple[tuple[int, int], ...]
    n_qubits: int
    id: int = -1

    def dense(self) -> np.ndarray:
        v = np.zeros(4**self.n_qubits)
        for k, s in self.entries:
            v[k] = s
        return v

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.entries)


@dataclass
class StructureReport:
    ok: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def verify_stabilizer_structure(v: StabilizerVector) -> StructureReport:
    n = v.n_qubits
    problems = []
    if len(v.entries) != 2**n:
        problems.append(f"{len(v.entries)} entries, expected {2**n}")
    signs = {}
    for k, s in v.entries:
        if s not in (1, -1):
            problems.append(f"sign {s} on index {k}")
        if k in signs:
            problems.append(f"duplicate index {k}")
        signs[k] = s
    if signs.get(0) != 1:
        problems.append("identity entry missing or not +1")
    if problems:
        return StructureReport(False, problems)
    strings = {k: PauliString(k, n) for k in signs}
    for a, pa in strings.items():
        for b, pb in strings.items():
            if b <= a:
                continue
            if not commutes(pa, pb):
                problems.append(f"{pa} and {pb} anticommute")
                continue
            phase, r = pauli_product(pa, pb)
            if r.index not in signs:
                problems.append(f"{pa}*{pb}={r} not in the set")
            elif phase.value.real * signs[a] * signs[b] != signs[r.index]:
                problems.append(f"sign of {r} inconsistent with {pa}*{pb}")
    return StructureReport(not problems, problems)


class StabilizerSet:
    """All pure stabilizer states of N qubits, id = row position (0-based).

    ``indices[i]`` holds the sorted Pauli indices of state i, ``signs[i]`` the
    matching +-1 values.
    """

    def __init__(self, n_qubits: int, indices: np.ndarray, signs: np.ndarray):
        self.n_qubits = n_qubits
        self.indices = indices
        self.signs = signs
        self.indices.setflags(write=False)
        self.signs.setflags(write=False)

    @property
    def count(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return self.count

    def __getitem__(self, i: int) -> StabilizerVector:
        if not -self.count <= i < self.count:
            raise IndexError(i)
        i %= self.count
        return StabilizerVector(
            tuple(zip(self.indices[i].tolist(), self.signs[i].tolist())), self.n_qubits, i
        )

    def __iter__(self) -> Iterator[StabilizerVector]:
        return (self[i] for i in range(self.count))

    @property
    def vectors(self) -> list[StabilizerVector]:
        return list(self)

    def dense(self, ids=None) -> np.ndarray:
        """Dense (len(ids), 4^N) matrix of stabilizer vectors."""
        idx = self.indices if ids is None else self.indices[np.asarray(ids)]
        sg = self.signs if ids is None else self.signs[np.asarray(ids)]
        out = np.zeros((len(idx), 4**self.n_qubits), dtype=np.int8)
        np.put_along_axis(out, idx.astype(np.int64), sg, axis=1)
        return out

    def chunks(self, size: int = _CHUNK_ROWS) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
        for start in range(0, self.count, size):
            yield start, self.indices[start : start + size], self.signs[start : start + size]

    def dots(self, a: np.ndarray) -> np.ndarray:
        """a . S_i for every state, streamed in row chunks.

        Integer ``a`` gives exact int64 results; anything else float64.
        """
        a = np.asarray(a)
        if a.shape != (4**self.n_qubits,):
            raise ValueError(f"vector of length {a.shape} for N={self.n_qubits}")
        exact = np.issubdtype(a.dtype, np.integer)
        a = a.astype(np.int64 if exact else np.float64)
        out = np.empty(self.count, dtype=a.dtype)
        for start, idx, sg in self.chunks():
            out[start : start + len(idx)] = (a[idx] * sg).sum(axis=1)
        return out

    def index_of(self, v: StabilizerVector) -> int:
        """Row id of a vector given by its entries (linear scan)."""
        idx = np.array([k for k, _ in v.entries])
        sg = np.array([s for _, s in v.entries])
        order = np.argsort(idx)
        hits = np.flatnonzero(
            (self.indices == idx[order]).all(axis=1) & (self.signs == sg[order]).all(axis=1)
        )
        if len(hits) == 0:
            raise KeyError("not an enumerated stabilizer state")
        return int(hits[0])

    def save(self, path) -> None:
        write_cache(self, path)


def _code_tables(n_qubits: int) -> list[np.ndarray]:
    """Per generator, the map old code -> new code for U rho U^dagger."""
    tables = []
    for gen in all_generators(n_qubits):
        inv, sinv = inverse_permutation(gen, n_qubits)
        size = 4**n_qubits
        codes = np.arange(2 * size)
        j, neg = codes >> 1, codes & 1
        new_neg = np.where(sinv[j] < 0, 1 - neg, neg)
        tables.append((2 * inv[j] + new_neg).astype(np.int32))
    return tables


def enumerate_stabilizers(n_qubits: int, allow_large: bool = False) -> StabilizerSet:
    """Breadth-first Clifford orbit of |0...0>; ids follow lexicographic row order."""
    if n_qubits < 1 or n_qubits > MAX_LARGE_QUBITS:
        raise CapacityError(f"N={n_qubits} outside 1..{MAX_LARGE_QUBITS}")
    if n_qubits > MAX_EXHAUSTIVE_QUBITS and not allow_large:
        raise CapacityError(f"N={n_qubits} needs allow_large=True (about 0.3 GB)")
    size = 4**n_qubits
    dim = 2**n_qubits
    expected = stabilizer_count(n_qubits)
    tables = _code_tables(n_qubits)
    rng = np.random.default_rng(0x5EED)
    zobrist = rng.integers(0, 2**63, size=2 * size, dtype=np.uint64)
    hash_tables = [zobrist[t] for t in tables]

    # |0...0>: every product of Z's with sign +1
    digits = np.arange(size)
    z_only = np.ones(size, dtype=bool)
    for n in range(n_qubits):
        d = (digits >> (2 * n)) & 3
        z_only &= (d == 0) | (d == 3)
    start = (2 * np.flatnonzero(z_only)).astype(np.int32)[None, :]

    rows = [start]
    seen = np.sort(zobrist[start].sum(axis=1, dtype=np.uint64))
    frontier = start
    layer = 0
    while len(frontier):
        new_rows, new_hashes = [], np.empty(0, dtype=np.uint64)
        for table, htable in zip(tables, hash_tables):
            for lo in range(0, len(frontier), _CHUNK_ROWS):
                chunk = frontier[lo : lo + _CHUNK_ROWS]
                h = htable[chunk].sum(axis=1, dtype=np.uint64)
                h, first = np.unique(h, return_index=True)
                fresh = ~np.isin(h, seen, assume_unique=True) & ~np.isin(
                    h, new_hashes, assume_unique=True
                )
                if fresh.any():
                    new_hashes = np.concatenate([new_hashes, h[fresh]])
                    new_rows.append(np.sort(table[chunk[first[fresh]]], axis=1))
        frontier = np.concatenate(new_rows) if new_rows else np.empty((0, dim), np.int32)
        seen = np.union1d(seen, new_hashes)
        rows.append(frontier)
        layer += 1
        log.debug("layer %d: %d new, %d total", layer, len(frontier), len(seen))
        if len(seen) > expected:
            break
    codes = np.concatenate(rows)
    if len(codes) != expected:
        raise EnumerationError(f"orbit has {len(codes)} states, expected {expected}")
    codes = codes[np.lexsort(codes.T[::-1])]
    if (codes[1:] == codes[:-1]).all(axis=1).any():
        raise EnumerationError("duplicate rows after closure")
    index_dtype = np.int16 if size <= 2**15 else np.int32
    return StabilizerSet(n_qubits, (codes >> 1).astype(index_dtype), (1 - 2 * (codes & 1)).astype(np.int8))


def stabilizer_vector_of_pure_state(amplitudes, tol: float = 1e-9) -> StabilizerVector:
    """Sparse P-space vector of a pure state, or NotAStabilizer."""
    rho = DensityState.pure(amplitudes)
    vals = expectation_values(rho.matrix, rho.n_qubits).real
    near_one = np.abs(np.abs(vals) - 1) <= tol
    near_zero = np.abs(vals) <= tol
    if near_one.sum() != 2**rho.n_qubits or not (near_one | near_zero).all():
        raise NotAStabilizer("expectation values are not a +-1 pattern on 2^N strings")
    support = np.flatnonzero(near_one)
    return StabilizerVector(
        tuple((int(k), int(np.sign(vals[k]))) for k in support), rho.n_qubits
    )


# --- binary cache -----------------------------------------------------------

_RECORD = np.dtype([("index", "<u4"), ("sign", "i1")])


def write_cache(stabs: StabilizerSet, path) -> None:
    """Header ``STBV1`` + N + D_S (little-endian u64), then 2^N records per state."""
    records = np.empty(stabs.indices.shape, dtype=_RECORD)
    records["index"] = stabs.indices
    records["sign"] = stabs.signs
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<QQ", stabs.n_qubits, stabs.count))
        fh.write(records.tobytes())


def read_cache(path) -> StabilizerSet:
    data = Path(path).read_bytes()
    if data[:5] != CACHE_MAGIC:
        raise ValueError(f"{path}: not a stabilizer cache")
    n, count = struct.unpack_from("<QQ", data, 5)
    if not 1 <= n <= MAX_LARGE_QUBITS:
        raise ValueError(f"{path}: bad qubit count {n}")
    dim = 2**n
    body = np.frombuffer(data, dtype=_RECORD, offset=5 + 16)
    if len(body) != count * dim:
        raise ValueError(f"{path}: truncated, {len(body)} records for {count} states")
    if count != stabilizer_count(n):
        raise EnumerationError(f"{path}: {count} states, expected {stabilizer_count(n)}")
    body = body.reshape(count, dim)
    index_dtype = np.int16 if 4**n <= 2**15 else np.int32
    return StabilizerSet(n, body["index"].astype(index_dtype), body["sign"].astype(np.int8))


def load_or_enumerate(n_qubits: int, cache_path=None, allow_large: bool = False) -> StabilizerSet:
    if cache_path is not None and Path(cache_path).exists():
        stabs = read_cache(cache_path)
        if stabs.n_qubits != n_qubits:
            raise ValueError(f"{cache_path} holds N={stabs.n_qubits}, wanted N={n_qubits}")
        return stabs
    stabs = enumerate_stabilizers(n_qubits, allow_large=allow_large)
    if cache_path is not None:
        write_cache(stabs, cache_path)
    return stabs


_SETS: dict[int, StabilizerSet] = {}


def stabilizer_set(n_qubits: int, allow_large: bool = False) -> StabilizerSet:
    """Process-wide memoized enumeration."""
    if n_qubits not in _SETS:
        _SETS[n_qubits] = enumerate_stabilizers(n_qubits, allow_large=allow_large)
    return _SETS[n_qubits]
