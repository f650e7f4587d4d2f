"""Magic quantifiers on P-space vectors.

All LP routes work in reduced coordinates (identity component dropped) and
query the stabilizer family lazily through ``StabilizerSet.dots``.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .geometry import Hyperplane, bound, symmetry_orbit
from .lp import LpProblem, solve, solve_with_rows
from .pauli import PauliVector
from .rational import integer_scale
from .stabilizers import StabilizerSet
from .symmetry import Reduction, reduction_for, trivial_reduction

log = logging.getLogger(__name__)

ROW_TOL = 1e-9
MAX_ROM_QUBITS = 4
DETECT_TOL = 1e-9


class PolicyError(RuntimeError):
    """Computation refused by policy (e.g. robustness of magic at N >= 5)."""


class ConsistencyError(RuntimeError):
    pass


@dataclass
class Estimate:
    """A quantifier value with the hyperplane that certifies it.

    ``normal`` is the real-valued full-length optimizer; ``hyperplane`` its
    integer rescaling when one reproduces the value (``integer`` True).
    """

    value: float
    hyperplane: Hyperplane | None = None
    normal: np.ndarray | None = None
    integer: bool = False
    rounds: int = 0
    exact: bool = True


@dataclass
class RomDecomposition:
    coefficients: dict[int, float]
    l1_norm: float

    def vector(self, stabs: StabilizerSet) -> np.ndarray:
        out = np.zeros(4**stabs.n_qubits)
        for i, x in self.coefficients.items():
            out[stabs.indices[i].astype(np.int64)] += x * stabs.signs[i]
        return out


def _check(v: PauliVector, stabs: StabilizerSet) -> None:
    if v.n_qubits != stabs.n_qubits:
        raise ValueError(f"{v.n_qubits}-qubit state against {stabs.n_qubits}-qubit stabilizers")


def stabilizer_norm(v: PauliVector) -> float:
    return float(np.abs(v.values).sum() / 2**v.n_qubits)


def _batch(stabs: StabilizerSet) -> int:
    return max(8, min(256, 4**stabs.n_qubits // 4))


def _top_violations(scores: np.ndarray, limit: float, batch: int) -> np.ndarray:
    bad = np.flatnonzero(scores > limit)
    if len(bad) > batch:
        bad = bad[np.argpartition(-scores[bad], batch - 1)[:batch]]
    # most violated first, ties by id
    return bad[np.lexsort((bad, -scores[bad]))]


def rationalize(normal: np.ndarray, stabs: StabilizerSet, max_den: int = 10**6) -> Hyperplane | None:
    """Integer hyperplane through continued-fraction rounding of a real normal."""
    if not np.any(normal):
        return None
    scale = np.abs(normal).max()
    fracs = [Fraction(float(x / scale)).limit_denominator(max_den) for x in normal]
    fracs[0] = Fraction(0)
    ints = integer_scale(fracs)
    if max(abs(x) for x in ints) >= 2**62:
        return None
    a = np.array(ints, dtype=np.int64)
    if not a.any():
        return None
    return Hyperplane.from_normal(a, stabs)


def _reduction(v: PauliVector, symmetric: bool) -> Reduction:
    if symmetric:
        return reduction_for(v.values, v.n_qubits)
    return trivial_reduction(v.n_qubits)


def monotone_M_exact(
    v: PauliVector, stabs: StabilizerSet, max_rounds: int = 10000, symmetric: bool = True
) -> Estimate:
    """Polytope gauge by LP: max a.v' subject to a.S_i' <= 1 for every stabilizer.

    The box |a_k| <= 1 is implied by the stabilizer rows (+-e_k lie in the
    polytope), so adding it leaves the optimum unchanged and gives the row
    generation a bounded start. With ``symmetric`` the normal is restricted
    to the invariant subspace of Clifford symmetries fixing v.
    """
    _check(v, stabs)
    red = _reduction(v, symmetric)
    c = red.project(v.values)
    if red.dim == 0 or not np.any(np.abs(c) > 1e-15):
        return Estimate(1.0, None, np.zeros(len(v.values)))
    batch = _batch(stabs)

    def oracle(y):
        dots = stabs.dots(red.expand(y))
        ids = _top_violations(dots, 1 + ROW_TOL, batch)
        rows = red.project(stabs.dense(ids).astype(float)) if len(ids) else []
        return [(r, 1.0) for r in rows]

    ones = np.ones(red.dim)
    sol = solve_with_rows(LpProblem(c, "max", -ones, ones), oracle, max_rounds=max_rounds)
    normal = red.expand(sol.variable_values)
    gauge = sol.objective_value
    est = Estimate(max(1.0, gauge), None, normal, rounds=sol.rounds)
    h = rationalize(normal, stabs)
    if h is not None and h.b > 0:
        ratio = h.value(v.values) / h.b
        if abs(ratio - gauge) <= 1e-8 * max(1.0, abs(gauge)):
            est.hyperplane, est.integer = h, True
    return est


def witness_W(
    v: PauliVector, stabs: StabilizerSet, max_rounds: int = 10000, symmetric: bool = True
) -> Estimate:
    """max over |a_k| <= 1 of a.v' - b(a), via max t s.t. a.(S_i' - v') + t <= 0."""
    _check(v, stabs)
    red = _reduction(v, symmetric)
    c = red.project(v.values)
    n = red.dim
    if n == 0 or not np.any(np.abs(c) > 1e-15):
        return Estimate(0.0, None, np.zeros(len(v.values)))
    batch = _batch(stabs)

    def oracle(x):
        y, t = x[:n], x[n]
        dots = stabs.dots(red.expand(y))
        ids = _top_violations(dots, y @ c - t + ROW_TOL, batch)
        if not len(ids):
            return []
        rows = red.project(stabs.dense(ids).astype(float)) - c
        return [(np.r_[r, 1.0], 0.0) for r in rows]

    objective = np.r_[np.zeros(n), 1.0]
    lower = np.r_[-np.ones(n), -np.inf]
    upper = np.r_[np.ones(n), np.abs(v.reduced).sum()]
    sol = solve_with_rows(LpProblem(objective, "max", lower, upper), oracle, max_rounds=max_rounds)
    normal = red.expand(sol.variable_values[:n])
    value = max(0.0, sol.objective_value)
    est = Estimate(value, None, normal, rounds=sol.rounds)
    if value > 0:
        est.hyperplane = rationalize(normal, stabs)
        est.integer = est.hyperplane is not None
    return est


def witness_Y(v: PauliVector, stabs: StabilizerSet, norm: str = "linf") -> Estimate:
    """Normalized hyperplane violation (a.v - b(a)) / ||a||.

    For the infinity norm this is exactly W. For the 2-norm the value is a
    lower bound evaluated on the W and M maximizers (``exact`` is False).
    """
    if norm == "linf":
        return witness_W(v, stabs)
    if norm != "l2":
        raise ValueError(f"norm must be 'l2' or 'linf', not {norm!r}")
    best = Estimate(0.0, None, None, exact=False)
    candidates = [witness_W(v, stabs).normal, monotone_M_exact(v, stabs).normal]
    for a in candidates:
        if a is None or not np.any(a):
            continue
        b, _ = bound(a, stabs)
        val = (a @ v.values - b) / np.linalg.norm(a)
        if val > best.value:
            best = Estimate(float(val), None, a, exact=False)
    return best


def robustness(v: PauliVector, stabs: StabilizerSet) -> tuple[float, RomDecomposition]:
    """min sum|x_i| subject to sum_i x_i S_i = v, as an LP over x+ and x-."""
    _check(v, stabs)
    if v.n_qubits > MAX_ROM_QUBITS:
        raise PolicyError(f"robustness of magic is refused for N={v.n_qubits} (limit {MAX_ROM_QUBITS})")
    if v.n_qubits == MAX_ROM_QUBITS:
        log.warning("robustness at N=%d is slow", v.n_qubits)
    S = stabs.dense().astype(float)  # (D_S, 4^N)
    count = len(S)
    p = LpProblem(np.ones(2 * count), "min")
    for k in range(S.shape[1]):
        p.add(np.r_[S[:, k], -S[:, k]], "=", v.values[k])
    sol = solve(p)
    if not sol.optimal:
        raise RuntimeError(f"robustness LP ended {sol.status}")
    x = sol.variable_values[:count] - sol.variable_values[count:]
    coeffs = {int(i): float(x[i]) for i in np.flatnonzero(np.abs(x) > 1e-12)}
    dec = RomDecomposition(coeffs, float(np.abs(x).sum()))
    if np.abs(dec.vector(stabs) - v.values).max() > 1e-8:
        raise RuntimeError("robustness decomposition does not reproduce the state")
    return sol.objective_value, dec


# --- discrete search ------------------------------------------------------

class _MoveEvaluator:
    """Bounds of every single-coordinate change a_k -> a_k + delta, given S.a."""

    def __init__(self, stabs: StabilizerSet):
        self.stabs = stabs
        size = 4**stabs.n_qubits
        flat = stabs.indices.ravel()
        order = np.argsort(flat, kind="stable")
        self.sg = stabs.signs.ravel()[order]
        self.ids = (order // stabs.indices.shape[1]).astype(np.int32)
        del order
        self.starts = np.r_[0, np.cumsum(np.bincount(flat, minlength=size))]

    def bounds(self, dots: np.ndarray, delta: int) -> np.ndarray:
        """``out[k] = max_i (dots_i + delta * S_i[k])``."""
        size = len(self.starts) - 1
        out = np.empty(size)
        top = np.argsort(-dots, kind="stable")[:64]
        contains = np.zeros(len(dots), dtype=bool)
        for k in range(size):
            lo, hi = self.starts[k], self.starts[k + 1]
            ids = self.ids[lo:hi]
            moved = (dots[ids] + delta * self.sg[lo:hi]).max() if hi > lo else -np.inf
            contains[ids] = True
            rest = next((dots[i] for i in top if not contains[i]), None)
            if rest is None:
                rest = np.max(np.where(contains, -np.inf, dots))
            contains[ids] = False
            out[k] = max(moved, rest)
        return out


def _unit_moves(dim: int) -> np.ndarray:
    """Nonzero steps with entries in {-1, 0, 1}; single and paired changes only when dim is large."""
    if dim <= 7:
        return np.array([m for m in product((-1, 0, 1), repeat=dim) if any(m)], dtype=np.int64)
    eye = np.eye(dim, dtype=np.int64)
    steps = [s * eye[j] for j in range(dim) for s in (1, -1)]
    steps += [s * eye[i] + t * eye[j] for i, j in combinations(range(dim), 2) for s in (1, -1) for t in (1, -1)]
    return np.array(steps)


def _orbit_ascent(vals, stabs: StabilizerSet, red: Reduction, budget: int, max_coeff: int, consider) -> None:
    """Integer ascent over symmetric normals ``a = basis @ y``, moving whole orbits.

    Candidates are K y + m for K = 1..4 and unit steps m, so the search can
    refine the current direction as well as move it; y is kept primitive.
    """
    c = red.project(vals)
    y = np.sign(np.where(np.abs(c) > 1e-12, c, 0)).astype(np.int64)
    if not y.any():
        return
    cols = np.stack([stabs.dots(red.basis[:, j].astype(np.int64)) for j in range(red.dim)], axis=1)
    # b(a) only depends on the distinct rows of the orbit dot table
    cols = np.unique(cols.astype(np.int64), axis=0)
    steps = _unit_moves(red.dim)

    def ratios(ys):
        b = (cols @ ys.T).max(axis=0)
        return np.where(b > 0, (ys @ c) / np.where(b > 0, b, 1), -np.inf)

    current = ratios(y[None])[0]
    for _ in range(budget):
        trial = np.concatenate([k * y + steps for k in (1, 2, 3, 4)])
        trial = trial[np.abs(trial).max(axis=1) <= max_coeff]
        if not len(trial):
            return
        r = ratios(trial)
        k = int(np.argmax(r))
        if r[k] <= current + 1e-12:
            return
        y, current = trial[k], r[k]
        y = y // np.gcd.reduce(np.abs(y))
        consider(Hyperplane(red.expand(y).astype(np.int64), int((cols @ y).max()), stabs.n_qubits, verified=True))


def monotone_M_search(
    v: PauliVector,
    stabs: StabilizerSet,
    budget: int = 200,
    library=(),
    max_level: int = 3,
    orbit_size: int = 5000,
    max_coeff: int = 64,
    symmetric: bool = True,
) -> Estimate:
    """Anytime lower bound on M over integer normals a.

    Seeds are sgn(v), any library hyperplanes and symmetry images of the best
    seed; then steepest ascent over single-coordinate moves of a.v'/b(a),
    with the coordinate range widened from 1 up to ``max_level`` when stuck.
    If v has Clifford symmetries, a second ascent moves whole orbits of
    coefficients of a symmetric normal. Every reported value is an exact
    integer hyperplane ratio, so it never exceeds the true M.
    """
    _check(v, stabs)
    vals = v.values
    best = Estimate(1.0, None, None, exact=False)
    if not np.any(v.reduced):
        return best
    # the ascent starts from the best seed even when its ratio is below 1
    start: list = [None, -np.inf]

    def consider(h: Hyperplane):
        nonlocal best
        if h.b > 0:
            r = h.value(vals) / h.b
            if r > start[1]:
                start[:] = [h, r]
            if r > best.value:
                best = Estimate(r, h, h.a.astype(float), integer=True, exact=False)

    sgn = np.sign(np.where(np.abs(vals) > 1e-12, vals, 0)).astype(np.int64)
    sgn[0] = 0
    if sgn.any():
        consider(Hyperplane.from_normal(sgn, stabs))
    for h in library:
        if h.n_qubits == v.n_qubits:
            consider(h if h.verified else Hyperplane.from_normal(h.a, stabs))
    if start[0] is not None:
        # b is invariant on the orbit, so images need no new bound evaluation
        for img in symmetry_orbit(start[0], orbit_size):
            consider(img)
    if start[0] is None:
        return best

    red = _reduction(v, symmetric)
    if symmetric and red.dim < 4**v.n_qubits - 1 and red.dim * stabs.count <= 5 * 10**7:
        _orbit_ascent(vals, stabs, red, budget, max_coeff, consider)

    moves = _MoveEvaluator(stabs)
    a = start[0].a.copy()
    dots = stabs.dots(a).astype(float)
    level = max(1, int(np.abs(a).max()))
    steps = 0
    while steps < budget:
        steps += 1
        current = (a @ vals) / dots.max()
        choice = None
        for delta in (1, -1):
            b_new = moves.bounds(dots, delta)
            num = a @ vals + delta * vals
            ok = (np.abs(a + delta) <= level) & (b_new > 0)
            ok[0] = False
            ratio = np.where(ok, num / np.where(b_new > 0, b_new, 1), -np.inf)
            k = int(np.argmax(ratio))
            if ratio[k] > current + 1e-12 and (choice is None or ratio[k] > choice[0]):
                choice = (ratio[k], k, delta)
        if choice is None:
            if level >= max_level:
                break
            level += 1
            continue
        _, k, delta = choice
        a[k] += delta
        lo, hi = moves.starts[k], moves.starts[k + 1]
        dots[moves.ids[lo:hi]] += delta * moves.sg[lo:hi]
        if a[1:].any():
            consider(Hyperplane.from_normal(a, stabs))
    return best


# --- report ---------------------------------------------------------------

QUANTIFIERS = ("M", "W", "ST", "RoM")


@dataclass
class MagicReport:
    state_label: str
    n_qubits: int
    M: float | None = None
    W: float | None = None
    st_norm: float | None = None
    rom: float | None = None
    witness_hyperplane: Hyperplane | None = None
    method_flags: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def magic_detected(self) -> bool | None:
        if self.M is not None:
            return self.M > 1 + DETECT_TOL
        if self.W is not None:
            return self.W > DETECT_TOL
        return None

    def as_dict(self) -> dict:
        return {
            "state": self.state_label,
            "n_qubits": self.n_qubits,
            "M": self.M,
            "W": self.W,
            "st_norm": self.st_norm,
            "rom": self.rom,
            "magic_detected": self.magic_detected,
            "witness_hyperplane": None
            if self.witness_hyperplane is None
            else {"a": {str(k): c for k, c in self.witness_hyperplane.support.items()},
                  "b": self.witness_hyperplane.b},
            "method_flags": self.method_flags,
            "timings": self.timings,
        }


def check_consistency(M: float, W: float, n_qubits: int, tol: float = 1e-7) -> None:
    """W >= M - 1 and M - 1 >= W / (4^N - 1), both from box-rescaling the optimal normals."""
    if W < M - 1 - tol or M - 1 < W / (4**n_qubits - 1) - tol:
        raise ConsistencyError(f"M={M} and W={W} disagree on magic")


def full_report(
    v: PauliVector,
    stabs: StabilizerSet,
    quantifiers=("M", "W", "ST"),
    label: str = "",
    search_budget: int = 0,
    library=(),
) -> MagicReport:
    _check(v, stabs)
    unknown = set(quantifiers) - set(QUANTIFIERS)
    if unknown:
        raise ValueError(f"unknown quantifiers {sorted(unknown)}")
    rep = MagicReport(label, v.n_qubits)
    if "ST" in quantifiers:
        rep.st_norm = stabilizer_norm(v)
    if "M" in quantifiers:
        t = time.perf_counter()
        est = monotone_M_exact(v, stabs)
        rep.M, rep.witness_hyperplane = est.value, est.hyperplane
        rep.method_flags["M"] = "gauge-lp-rowgen"
        rep.method_flags["witness_integer"] = est.integer
        if search_budget:
            found = monotone_M_search(v, stabs, search_budget, library)
            rep.method_flags["M_search"] = found.value
        rep.timings["M"] = time.perf_counter() - t
    if "W" in quantifiers:
        t = time.perf_counter()
        rep.W = witness_W(v, stabs).value
        rep.method_flags["W"] = "box-lp-rowgen"
        rep.timings["W"] = time.perf_counter() - t
    if "RoM" in quantifiers:
        t = time.perf_counter()
        rep.rom = robustness(v, stabs)[0]
        rep.method_flags["RoM"] = "lp"
        rep.timings["RoM"] = time.perf_counter() - t
    if rep.M is not None and rep.W is not None:
        check_consistency(rep.M, rep.W, v.n_qubits)
    return rep


def werner_quantity(base: PauliVector, stabs: StabilizerSet, quantity: str):
    """``mu -> value`` of one quantifier along the Werner line of ``base``, shifted so magic is > 0."""
    from .states import werner_vector

    def f(mu: float) -> float:
        v = werner_vector(base, mu)
        if quantity == "M":
            return monotone_M_exact(v, stabs).value - 1
        if quantity == "W":
            return witness_W(v, stabs).value
        if quantity == "ST":
            return stabilizer_norm(v) - 1
        if quantity == "RoM":
            return robustness(v, stabs)[0] - 1
        raise ValueError(f"unknown quantity {quantity!r}")

    return f


def threshold(f, lo: float, hi: float, tol: float = 1e-6, level: float = DETECT_TOL) -> float | None:
    """Smallest mu in [lo, hi] with f(mu) > level, by bisection; None if f(hi) stays below.

    Assumes f crosses once, which holds along Werner lines for the convex
    quantifiers used here.
    """
    if f(hi) <= level:
        return None
    if f(lo) > level:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > level:
            hi = mid
        else:
            lo = mid
    return hi
