"""Clifford symmetries of a P-space vector and the invariant subspace they cut out.

If a signed permutation G maps the stabilizer family onto itself and fixes v,
then averaging any optimal normal a over the group generated by such G keeps
it feasible and optimal for the gauge and witness LPs. Those LPs can thus be
solved over the G-invariant normals only, which for symmetric states is a
much smaller space.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .clifford import Generator, signed_permutation
from .pauli import symplectic_tables

Table = tuple[np.ndarray, np.ndarray]


def compose(first: Table, second: Table) -> Table:
    """Signed permutation of applying ``first`` then ``second`` to a vector."""
    p1, s1 = first
    p2, s2 = second
    return p1[p2], s2 * s1[p2]


def _closure(gens: list[Table]) -> list[Table]:
    size = len(gens[0][0])
    ident = (np.arange(size), np.ones(size, dtype=np.int64))
    seen = {(ident[0].tobytes(), ident[1].tobytes()): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for h in gens:
                c = compose(g, h)
                key = (c[0].tobytes(), c[1].tobytes())
                if key not in seen:
                    seen[key] = c
                    nxt.append(c)
        frontier = nxt
    return list(seen.values())


@lru_cache(maxsize=None)
def site_group(n_qubits: int, site: int) -> tuple[Table, ...]:
    """The 24 single-qubit Clifford actions on one site."""
    gens = [signed_permutation(Generator(k, (site,)), n_qubits) for k in ("H", "S")]
    return tuple(_closure(gens))


def swap(n_qubits: int, i: int, j: int) -> Table:
    a = signed_permutation(Generator("CNOT", (i, j)), n_qubits)
    b = signed_permutation(Generator("CNOT", (j, i)), n_qubits)
    return compose(compose(a, b), a)


def pauli_signs(n_qubits: int) -> np.ndarray:
    """``out[g, k]`` is +1 if P_g and P_k commute, else -1."""
    x, z = symplectic_tables(n_qubits)
    odd = np.bitwise_count((x[:, None] & z[None, :]) ^ (z[:, None] & x[None, :])) & 1
    return (1 - 2 * odd).astype(np.int8)


def _fixes(t: Table, v: np.ndarray, tol: float) -> bool:
    p, s = t
    return bool(np.abs(s * v[p] - v).max() <= tol)


def fixing_symmetries(v: np.ndarray, n_qubits: int, tol: float = 1e-12) -> tuple[list[Table], np.ndarray]:
    """Clifford signed permutations fixing ``v`` from a fixed candidate pool.

    The pool holds single-site Cliffords, the same Clifford on every site,
    pairs of single-site Cliffords and qubit swaps. Pauli conjugations are
    returned separately as a mask of coordinates they force to zero.
    """
    v = np.asarray(v, dtype=float)
    tol = tol * max(1.0, np.abs(v).max())
    signs = pauli_signs(n_qubits)
    fixing_paulis = np.all(np.abs(signs * v[None, :] - v[None, :]) <= tol, axis=1)
    zero = np.any(signs[fixing_paulis] < 0, axis=0)

    found: list[Table] = []

    def keep(t: Table) -> None:
        if not np.array_equal(t[0], np.arange(len(v))) and _fixes(t, v, tol):
            found.append(t)

    groups = [site_group(n_qubits, i) for i in range(n_qubits)]
    for g in groups:
        for t in g:
            keep(t)
    if n_qubits > 1:
        for k in range(24):
            t = groups[0][k]
            for g in groups[1:]:
                t = compose(t, g[k])
            keep(t)
        for i, j in combinations(range(n_qubits), 2):
            keep(swap(n_qubits, i, j))
            for a in groups[i]:
                for b in groups[j]:
                    keep(compose(a, b))
    return found, zero


@dataclass
class Reduction:
    """Invariant normals ``a = basis @ y``; ``basis`` has one signed orbit per column."""

    n_qubits: int
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def expand(self, y: np.ndarray) -> np.ndarray:
        return self.basis @ y

    def project(self, rows: np.ndarray) -> np.ndarray:
        return rows @ self.basis


def orbit_reduction(tables: list[Table], zero: np.ndarray, n_qubits: int) -> Reduction:
    """Signed orbits of the indices: invariance forces a_k = s_k a_rep within an orbit."""
    size = 4**n_qubits
    parent = list(range(size))
    parity = [1] * size  # a_k = parity[k] * a_parent[k]
    dead = set()

    def find(k):
        s = 1
        path = []
        while parent[k] != k:
            path.append(k)
            s *= parity[k]
            k = parent[k]
        # compress
        acc = s
        for q in path:
            ps = acc
            acc *= parity[q]
            parent[q], parity[q] = k, ps
        return k, s

    for perm, sign in tables:
        moved = np.flatnonzero((perm != np.arange(size)) | (sign < 0))
        for k in moved:
            # invariance: a_k = sign_k * a_perm(k)
            rk, sk = find(int(k))
            rj, sj = find(int(perm[k]))
            rel = int(sign[k])
            if rk == rj:
                if sk != rel * sj:
                    dead.add(rk)
            else:
                parent[rk] = rj
                parity[rk] = sk * rel * sj
                if rk in dead:
                    dead.add(rj)
    roots = {}
    cols = []
    coef = []
    for k in range(1, size):
        r, s = find(k)
        if r in dead or zero[k]:
            dead.add(r)
    for k in range(1, size):
        r, s = find(k)
        if r in dead:
            continue
        if r not in roots:
            roots[r] = len(roots)
        cols.append((k, roots[r]))
        coef.append(s)
    basis = np.zeros((size, len(roots)))
    for (k, c), s in zip(cols, coef):
        basis[k, c] = s
    return Reduction(n_qubits, basis)


def trivial_reduction(n_qubits: int) -> Reduction:
    size = 4**n_qubits
    return Reduction(n_qubits, np.eye(size)[:, 1:])


def reduction_for(v: np.ndarray, n_qubits: int) -> Reduction:
    tables, zero = fixing_symmetries(v, n_qubits)
    if not tables and not zero.any():
        return trivial_reduction(n_qubits)
    return orbit_reduction(tables, zero, n_qubits)
