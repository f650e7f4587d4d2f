"""Stabilizer polytope geometry: the bound b(a), facet solving, face growth and facet symmetries.

Hyperplanes are integer normals ``a`` over all 4^N Pauli indices with ``a[0] = 0``
and an integer bound ``b``; the half-space is ``a . <P> <= b``. Reduced
coordinates drop the identity component.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

import numpy as np

from .clifford import Generator, all_generators, signed_permutation
from .lp import LpProblem, solve
from .pauli import site_digits
from .rational import RationalMatrix, independent_rows, integer_scale
from .stabilizers import StabilizerSet

AXES = {"X": 1, "Y": 2, "Z": 3}


def _gcd_all(values: Iterable[int]) -> int:
    g = 0
    for v in values:
        g = gcd(g, abs(int(v)))
    return g


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """Half-space ``a . <P> <= b`` with integer ``a`` (gcd 1, ``a[0] = 0``) and integer ``b``."""

    a: np.ndarray
    b: int
    n_qubits: int
    verified: bool = False

    def __post_init__(self):
        a = np.asarray(self.a)
        if a.shape != (4**self.n_qubits,):
            raise ValueError(f"normal of length {a.shape} for N={self.n_qubits}")
        if not np.all(np.equal(np.mod(a, 1), 0)):
            raise ValueError("normal must be integer")
        a = a.astype(np.int64)
        if a[0] != 0:
            raise ValueError("identity coefficient a[0] must be 0")
        g = _gcd_all(a)
        if g > 1:
            if int(self.b) % g:
                raise ValueError(f"b={self.b} not divisible by the normal's gcd {g}")
            a = a // g
            object.__setattr__(self, "b", int(self.b) // g)
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", int(self.b))

    @classmethod
    def from_normal(cls, a, stabs: StabilizerSet) -> "Hyperplane":
        """Tight hyperplane for an integer normal: b = max_i a . S_i."""
        a = np.asarray(a, dtype=np.int64)
        g = _gcd_all(a)
        if g > 1:
            a = a // g
        b, _ = bound(a, stabs)
        return cls(a, b, stabs.n_qubits, verified=True)

    @classmethod
    def from_sparse(cls, coeffs: dict, b: int, n_qubits: int, verified: bool = False) -> "Hyperplane":
        a = np.zeros(4**n_qubits, dtype=np.int64)
        for k, v in coeffs.items():
            a[int(k)] = int(v)
        return cls(a, b, n_qubits, verified)

    @property
    def key(self) -> tuple:
        return (self.n_qubits, self.b, self.a.tobytes())

    def __eq__(self, other) -> bool:
        return isinstance(other, Hyperplane) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    @property
    def support(self) -> dict[int, int]:
        return {int(k): int(self.a[k]) for k in np.flatnonzero(self.a)}

    def value(self, v) -> float:
        return float(np.dot(self.a, np.asarray(v, dtype=float)))

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n_qubits, "a": {str(k): c for k, c in self.support.items()}, "b": self.b,
             "verified": self.verified}
        )

    @classmethod
    def from_json(cls, line: str) -> "Hyperplane":
        d = json.loads(line)
        return cls.from_sparse(d["a"], d["b"], d["n"], bool(d.get("verified", False)))

    def __repr__(self) -> str:
        return f"Hyperplane(N={self.n_qubits}, a={self.support}, b={self.b}, verified={self.verified})"


@dataclass(frozen=True)
class FaceCandidate:
    stabilizer_ids: tuple[int, ...]

    def __post_init__(self):
        ids = tuple(int(i) for i in self.stabilizer_ids)
        if not ids:
            raise ValueError("empty face")
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate stabilizer ids in face")
        object.__setattr__(self, "stabilizer_ids", ids)

    def __len__(self) -> int:
        return len(self.stabilizer_ids)


def _check_ids(face: FaceCandidate, stabs: StabilizerSet) -> None:
    bad = [i for i in face.stabilizer_ids if not 0 <= i < stabs.count]
    if bad:
        raise IndexError(f"stabilizer ids {bad} outside 0..{stabs.count - 1}")


# --- bounds ---------------------------------------------------------------

def bound(a, stabs: StabilizerSet) -> tuple:
    """``(max_i a . S_i, lowest maximizing id)``; exact for integer ``a``."""
    a = np.asarray(a)
    if a.shape != (4**stabs.n_qubits,):
        raise ValueError(f"normal of length {a.shape} for N={stabs.n_qubits}")
    if a[0] != 0:
        raise ValueError("identity coefficient a[0] must be 0")
    dots = stabs.dots(a)
    i = int(np.argmax(dots))
    b = dots[i]
    return (int(b) if np.issubdtype(dots.dtype, np.integer) else float(b)), i


def lower_bound(a, stabs: StabilizerSet):
    """``min_i a . S_i``, i.e. ``-bound(-a)``."""
    return -bound(-np.asarray(a), stabs)[0]


def is_boundary(h: Hyperplane, face: FaceCandidate, stabs: StabilizerSet) -> bool:
    """True iff the face lies on ``a . P = b`` and every stabilizer satisfies ``a . S_i <= b``."""
    _check_ids(face, stabs)
    dots = stabs.dots(h.a)
    on_face = dots[list(face.stabilizer_ids)]
    if not np.all(on_face == on_face[0]):
        return False
    return bool(on_face[0] == h.b and dots.max() <= h.b)


# --- facet solving -------------------------------------------------------

@dataclass
class FacetResult:
    """Outcome of ``facet_through``.

    kind is "facet" (fully constrained and verified), "underconstrained"
    (family ``particular + sum_t t_j null_basis[j]`` in reduced coordinates,
    normalized so the face sits at level 1) or "failure".
    """

    kind: str
    hyperplane: Hyperplane | None = None
    particular: list[Fraction] | None = None
    null_basis: list[list[Fraction]] = field(default_factory=list)
    violating_id: int | None = None
    reason: str = ""
    # one free parameter: exact interval of valid t; more: sampled integer points
    t_range: tuple[Fraction | None, Fraction | None] | None = None
    samples: list[tuple[tuple[int, ...], bool]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.kind != "failure"

    def member(self, t: Sequence) -> list[Fraction]:
        """Reduced-coordinate normal for parameters ``t``."""
        a = list(self.particular)
        for tj, vec in zip(t, self.null_basis):
            a = [x + Fraction(tj) * y for x, y in zip(a, vec)]
        return a


def _reduced_rows(stabs: StabilizerSet, ids: Sequence[int]) -> list[list[int]]:
    return stabs.dense(list(ids))[:, 1:].astype(int).tolist()


def _full(reduced: Sequence) -> np.ndarray:
    return np.concatenate([[0], np.asarray(reduced)])


def facet_through(face: FaceCandidate, stabs: StabilizerSet, sample_range: int = 1) -> FacetResult:
    """Hyperplane through every stabilizer of ``face``, checked against all stabilizers.

    Works in exact rationals: solves ``a . S_j = 1`` over the face (the
    difference conditions plus a normalization that is valid because the
    origin is interior to the polytope).
    """
    _check_ids(face, stabs)
    rows = _reduced_rows(stabs, face.stabilizer_ids)
    system = RationalMatrix(rows)
    particular = system.solve([1] * len(rows))
    if particular is None:
        return FacetResult("failure", reason="no hyperplane passes through every face stabilizer")
    null = system.nullspace()
    if null:
        return _family(face, stabs, particular, null, sample_range)

    # fully constrained: the independent-row inverse route must agree
    picked = independent_rows(rows)
    inverse = RationalMatrix([rows[i] for i in picked]).inverse()
    a_frac = inverse @ ([1] * len(picked))
    if a_frac != particular:
        raise AssertionError("rational elimination and matrix inverse disagree")
    a = _full(integer_scale(a_frac))
    level = int(np.dot(stabs.dense([face.stabilizer_ids[0]])[0].astype(np.int64), a))
    b, arg = bound(a, stabs)
    if b > level:
        return FacetResult("failure", violating_id=arg, reason=f"stabilizer {arg} lies above the face")
    return FacetResult("facet", hyperplane=Hyperplane(a, b, stabs.n_qubits, verified=True))


def _family(face, stabs, particular, null, sample_range) -> FacetResult:
    result = FacetResult("underconstrained", particular=particular, null_basis=null)
    dense = stabs.dense()[:, 1:].astype(int)
    if len(null) == 1:
        # a(t) . S_i <= 1 is linear in t: intersect the half-lines exactly
        lo: Fraction | None = None
        hi: Fraction | None = None
        for row in dense:
            pd = sum(Fraction(int(r)) * x for r, x in zip(row, particular) if r)
            nd = sum(Fraction(int(r)) * y for r, y in zip(row, null[0]) if r)
            slack = 1 - pd
            if nd > 0:
                cap = slack / nd
                hi = cap if hi is None else min(hi, cap)
            elif nd < 0:
                cap = slack / nd
                lo = cap if lo is None else max(lo, cap)
            elif slack < 0:
                result.t_range = None
                break
        else:
            result.t_range = (lo, hi)
    grid = range(-sample_range, sample_range + 1)
    for t in itertools.product(grid, repeat=min(len(null), 6)):
        t = t + (0,) * (len(null) - len(t))
        a_red = result.member(t)
        den = lcm(*(x.denominator for x in a_red))
        a = _full([int(x * den) for x in a_red])
        if not a[1:].any():
            continue
        h = Hyperplane(a, int(den), stabs.n_qubits)
        result.samples.append((t, is_boundary(h, face, stabs)))
    return result


# --- face growth ----------------------------------------------------------

def _supporting_normal(ids: Sequence[int], stabs: StabilizerSet, dense: np.ndarray):
    """Some ``a`` with ``a . S_j = 1`` on ids and ``a . S_i <= 1`` everywhere, or None."""
    n = dense.shape[1]
    p = LpProblem(np.zeros(n), "max", lower=-np.ones(n), upper=np.ones(n))
    on = set(ids)
    for i, row in enumerate(dense):
        p.add(row, "=" if i in on else "<=", 1.0)
    sol = solve(p)
    return sol.variable_values if sol.optimal else None


def grow_face(
    seed: FaceCandidate, stabs: StabilizerSet, order: Sequence[int] | None = None
) -> FaceCandidate:
    """Greedily add stabilizers while the face still lies on a common polytope boundary.

    Candidates are tried in ``order`` (ascending id by default). Once the
    hyperplane is pinned down, every stabilizer on it joins the face.
    """
    _check_ids(seed, stabs)
    dense = stabs.dense()[:, 1:].astype(float)
    dim = dense.shape[1]
    face = list(seed.stabilizer_ids)
    if _supporting_normal(face, stabs, dense) is None:
        raise ValueError("seed does not lie on a common polytope boundary")
    # affine rank: rows [S_j, 1]; a stabilizer in the affine hull of the face
    # lies on every hyperplane through it
    lifted = np.hstack([dense, np.ones((len(dense), 1))])
    rank = np.linalg.matrix_rank(dense[face])
    affine = np.linalg.matrix_rank(lifted[face])
    for i in order if order is not None else range(stabs.count):
        if rank == dim:
            break
        if i in face:
            continue
        trial = face + [int(i)]
        new_affine = np.linalg.matrix_rank(lifted[trial])
        if new_affine == affine:
            face = trial
            continue
        if _supporting_normal(trial, stabs, dense) is not None:
            face, affine = trial, new_affine
            rank = np.linalg.matrix_rank(dense[face])
    if rank == dim:
        result = facet_through(FaceCandidate(face), stabs)
        if result.kind == "facet":
            dots = stabs.dots(result.hyperplane.a)
            extra = [int(i) for i in np.flatnonzero(dots == result.hyperplane.b) if i not in face]
            face = face + extra
    return FaceCandidate(tuple(face))


def vicinity_seed(v, stabs: StabilizerSet, size: int = 2) -> FaceCandidate:
    """The ``size`` stabilizers with the largest overlap ``S_i . v``, ties by id."""
    dots = stabs.dots(np.asarray(v, dtype=float) * np.r_[0, np.ones(4**stabs.n_qubits - 1)])
    order = np.lexsort((np.arange(stabs.count), -np.round(dots, 12)))
    return FaceCandidate(tuple(int(i) for i in order[:size]))


# --- symmetries -----------------------------------------------------------

def clifford_map(h: Hyperplane, g: Generator) -> Hyperplane:
    """Image of the hyperplane under conjugation by a Clifford generator; b is unchanged."""
    perm, sign = signed_permutation(g, h.n_qubits)
    return Hyperplane(sign * h.a[perm], h.b, h.n_qubits, h.verified)


def clifford_unmap(h: Hyperplane, g: Generator) -> Hyperplane:
    """Inverse of ``clifford_map`` for the same generator."""
    perm, sign = signed_permutation(g, h.n_qubits)
    a = np.empty_like(h.a)
    a[perm] = sign * h.a
    return Hyperplane(a, h.b, h.n_qubits, h.verified)


def reflect(h: Hyperplane, site: int, axis) -> Hyperplane:
    """Flip the sign of one Pauli axis on one site: P_site^(axis) -> -P_site^(axis).

    On one qubit this maps the octahedron onto itself. On several qubits it
    acts as a partial transpose, which sends entangled stabilizer states
    outside the family, so b is carried over but no longer certified.
    """
    if not 0 <= site < h.n_qubits:
        raise ValueError(f"site {site} outside 0..{h.n_qubits - 1}")
    axis = AXES.get(axis, axis)
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be X, Y or Z, got {axis!r}")
    flip = site_digits(h.n_qubits)[:, site] == axis
    verified = h.verified and h.n_qubits == 1
    return Hyperplane(np.where(flip, -h.a, h.a), h.b, h.n_qubits, verified)


def conjugate(h: Hyperplane) -> Hyperplane:
    """Image under complex conjugation of the state: every Y flips sign on every site.

    Conjugation maps stabilizer states to stabilizer states, so b is kept.
    """
    odd_y = (site_digits(h.n_qubits) == 2).sum(axis=1) % 2 == 1
    return Hyperplane(np.where(odd_y, -h.a, h.a), h.b, h.n_qubits, h.verified)


@dataclass
class Orbit:
    hyperplanes: list[Hyperplane]
    truncated: bool

    def __len__(self) -> int:
        return len(self.hyperplanes)

    def __iter__(self):
        return iter(self.hyperplanes)


def symmetry_orbit(h: Hyperplane, max_size: int = 100000) -> Orbit:
    """Breadth-first closure under every Clifford generator and complex conjugation.

    For one qubit these generate all single-site reflections as well.
    """
    n = h.n_qubits
    moves = [lambda x, g=g: clifford_map(x, g) for g in all_generators(n)]
    moves.append(conjugate)
    seen = {h.key: h}
    frontier = [h]
    while frontier:
        nxt = []
        for x in frontier:
            for move in moves:
                y = move(x)
                if y.key not in seen:
                    if len(seen) >= max_size:
                        return Orbit(list(seen.values()), True)
                    seen[y.key] = y
                    nxt.append(y)
        frontier = nxt
    return Orbit(list(seen.values()), False)


# --- facet library I/O ----------------------------------------------------

def write_facets(hyperplanes: Iterable[Hyperplane], path) -> int:
    count = 0
    with open(path, "w") as fh:
        for h in hyperplanes:
            fh.write(h.to_json() + "\n")
            count += 1
    return count


def read_facets(path) -> list[Hyperplane]:
    with open(path) as fh:
        return [Hyperplane.from_json(line) for line in fh if line.strip()]
