"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line through the ``acceptance`` fixture; the
lines are printed in the pytest terminal summary.
"""
import io
import itertools
import time
from contextlib import redirect_stdout

import numpy as np
import pytest

from magicpoly.cli import main as cli_main
from magicpoly.geometry import (
    FaceCandidate,
    Hyperplane,
    bound,
    facet_through,
    grow_face,
    is_boundary,
    lower_bound,
    vicinity_seed,
)
from magicpoly.measures import (
    PolicyError,
    monotone_M_exact,
    monotone_M_search,
    robustness,
    stabilizer_norm,
    threshold,
    werner_quantity,
    witness_W,
)
from magicpoly.pauli import PauliVector
from magicpoly.stabilizers import enumerate_stabilizers
from magicpoly.states import named_vector, werner_vector
from helpers import SINGLE, expectations, from_expectations, random_density, random_pure

R2 = np.sqrt(2)


def test_1_stabilizer_counts(acceptance):
    counts = {}
    t = time.perf_counter()
    for n in (1, 2, 3):
        counts[n] = enumerate_stabilizers(n).count
    elapsed = time.perf_counter() - t
    formula = {n: 2**n * int(np.prod([2**k + 1 for k in range(1, n + 1)])) for n in (1, 2, 3)}
    ok = counts == {1: 6, 2: 60, 3: 1080} == formula and elapsed < 10
    acceptance("1 stabilizer counts", ok, f"{counts} in {elapsed:.2f}s")
    assert ok


def test_2_octahedron(acceptance, stabs1):
    t = time.perf_counter()
    found = set()
    for tri in itertools.combinations(range(stabs1.count), 3):
        r = facet_through(FaceCandidate(tri), stabs1)
        if r.kind == "facet":
            found.add(r.hyperplane)
    elapsed = time.perf_counter() - t
    expected = {Hyperplane(np.array([0, *s]), 1, 1) for s in itertools.product((1, -1), repeat=3)}
    ok = found == expected and all(h.b == 1 for h in found) and elapsed < 1
    acceptance("2 octahedron facets", ok, f"{len(found)} facets in {elapsed:.3f}s")
    assert ok


def test_3_underconstrained_edge(acceptance, stabs1):
    plus, plus_i = 0, 2
    assert list(stabs1.dense([plus])[0]) == [1, 1, 0, 0] and list(stabs1.dense([plus_i])[0]) == [1, 0, 1, 0]
    face = FaceCandidate((plus, plus_i))
    r = facet_through(face, stabs1)
    members = {t: r.member((t,)) for t in (-1, 0, 1)}
    # the family is a = (0, 1, 1, t) up to the sign of the free direction
    family_ok = r.kind == "underconstrained" and {tuple(m) for m in members.values()} == {(1, 1, t) for t in (-1, 0, 1)}
    boundary_ok = all(is_boundary(Hyperplane(np.array([0, 1, 1, t]), 1, 1), face, stabs1) for t in (-1, 0, 1))
    outside_ok = not any(is_boundary(Hyperplane(np.array([0, 1, 1, t]), 1, 1), face, stabs1) for t in (-2, 2))
    ok = family_ok and boundary_ok and outside_ok and sorted(map(abs, r.t_range)) == [1, 1]
    acceptance("3 underconstrained family", ok, f"t_range={r.t_range}")
    assert ok


def test_4_two_qubit_facet_family(acceptance, stabs2):
    t = time.perf_counter()
    variants = []
    for s1, s2 in itertools.product((1, -1), repeat=2):
        # XX - YY - ZZ + s1 (XY + YX) + s2 (ZI + IZ)
        h = Hyperplane.from_sparse({5: 1, 10: -1, 15: -1, 6: s1, 9: s1, 12: s2, 3: s2}, 1, 2)
        variants.append((bound(h.a, stabs2)[0], lower_bound(h.a, stabs2)))
    ghz = named_vector("ghz", N=2, phi=np.pi / 4)
    face = grow_face(vicinity_seed(ghz.values, stabs2), stabs2)
    r = facet_through(face, stabs2)
    elapsed = time.perf_counter() - t
    nz = r.hyperplane.a[r.hyperplane.a != 0] if r.kind == "facet" else np.array([])
    ok = (
        variants == [(1, -3)] * 4
        and len(face) == 33
        and r.kind == "facet"
        and len(nz) == 7
        and len(set(np.abs(nz))) == 1
        and r.hyperplane.b == 1
        and elapsed < 5
    )
    acceptance("4 two-qubit facet family", ok, f"variants={variants} face={len(face)} nonzero={len(nz)} {elapsed:.2f}s")
    assert ok


def test_5_t_state(acceptance, stabs1):
    t_state = named_vector("product", N=1, phi=np.pi / 4)
    m = monotone_M_exact(t_state, stabs1).value
    rom = robustness(t_state, stabs1)[0]
    ok = abs(m - R2) < 1e-6 and abs(rom - R2) < 1e-6
    acceptance("5 T-state M and RoM", ok, f"M={m:.10f} RoM={rom:.10f}")
    assert ok


def _sweep(state):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli_main(["sweep", state, "--mu-step", "0.01", "--raw"])
    assert code == 0
    lines = [x for x in buf.getvalue().splitlines() if not x.startswith("#")]
    header = lines[0].split(",")
    table = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    return {name: table[:, i] for i, name in enumerate(header)}


def _grid_threshold(mu, values, level):
    above = np.flatnonzero(values > level)
    return mu[above[0]] if len(above) else None


@pytest.mark.parametrize(
    "label,state,name,kw",
    [
        ("a", "ghz:N=2,phi=0.785398163397448", "ghz", {"N": 2, "phi": np.pi / 4}),
        ("b", "uniform_phase:N=2,phi=1.5707963267949", "uniform_phase", {"N": 2, "phi": np.pi / 2}),
    ],
)
def test_6_werner_sweeps(acceptance, stabs2, label, state, name, kw):
    t = time.perf_counter()
    cols = _sweep(state)
    elapsed = time.perf_counter() - t
    mu = cols["mu"]
    tol = 1e-9
    grid = {
        "M": _grid_threshold(mu, cols["M"], 1 + tol),
        "W": _grid_threshold(mu, cols["W"], tol),
        "RoM": _grid_threshold(mu, cols["RoM"], 1 + tol),
        "ST": _grid_threshold(mu, cols["ST"], 1 + tol),
    }
    base = named_vector(name, **kw)
    exact = {q: threshold(werner_quantity(base, stabs2, q), 0.0, 1.0, tol=1e-7) for q in ("M", "W", "RoM", "ST")}
    step = 0.01 + 1e-9
    at_one = [cols["M"][-1], cols["W"][-1] + 1, cols["RoM"][-1], max(1.0, cols["ST"][-1])]
    ok = (
        None not in grid.values()
        and abs(grid["M"] - grid["W"]) <= step
        and abs(grid["M"] - grid["RoM"]) <= step
        and grid["ST"] >= grid["M"] - step
        and abs(exact["M"] - exact["W"]) <= 1e-6
        and abs(exact["M"] - exact["RoM"]) <= 1e-6
        and exact["ST"] >= exact["M"] - 1e-6
        and all(x > 1 for x in at_one)
        and elapsed < 300
    )
    detail = " ".join(f"{q}={grid[q]}/{exact[q]:.6f}" for q in grid) + f" {elapsed:.1f}s"
    acceptance(f"6{label} Werner sweep thresholds", ok, detail)
    assert ok


@pytest.mark.slow
def test_7_five_qubits(acceptance, stabs5):
    t = time.perf_counter()
    problems = []
    for name in ("ghz", "product"):
        base = named_vector(name, N=5, phi=np.pi / 4)
        for mu in (0.2, 0.6, 1.0):
            v = werner_vector(base, mu)
            exact = monotone_M_exact(v, stabs5).value
            found = monotone_M_search(v, stabs5).value
            w = witness_W(v, stabs5).value
            st = stabilizer_norm(v)
            if abs(exact - found) > 1e-5:
                problems.append(f"{name}@{mu}: exact {exact} search {found}")
            if (w > 1e-9) != (exact > 1 + 1e-9):
                problems.append(f"{name}@{mu}: W={w} M={exact}")
            if st > exact + 1e-9:
                problems.append(f"{name}@{mu}: st={st} > M={exact}")
        try:
            robustness(base, stabs5)
            problems.append(f"{name}: RoM not refused")
        except PolicyError:
            pass
    elapsed = time.perf_counter() - t
    ok = stabs5.count == 2423520 and not problems and elapsed < 1800
    acceptance("7 five-qubit consistency", ok, f"{elapsed:.0f}s " + "; ".join(problems))
    assert ok


# --- criterion 8: dense-matrix channels as independent oracles -------------

H = np.array([[1, 1], [1, -1]]) / R2
S = np.diag([1, 1j])
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])


def _random_clifford(n, rng, length=12):
    u = np.eye(2**n, dtype=complex)
    for _ in range(length):
        kind = rng.integers(3 if n > 1 else 2)
        if kind == 2:
            g = CNOT if rng.random() < 0.5 else np.kron(H, H) @ CNOT @ np.kron(H, H)
        else:
            gate = (H, S)[kind]
            site = rng.integers(n)
            g = np.kron(np.kron(np.eye(2**site), gate), np.eye(2 ** (n - site - 1)))
        u = g @ u
    return u


def _pauli_channel(rho, n, rng):
    probs = rng.dirichlet(np.ones(4**n))
    out = np.zeros_like(rho)
    for p, ops in zip(probs, itertools.product("IXYZ", repeat=n)):
        u = np.array([[1]], dtype=complex)
        for o in ops:
            u = np.kron(u, SINGLE[o])
        out += p * u @ rho @ u.conj().T
    return out


def _random_magic_state(n, rng):
    if rng.random() < 0.5:
        psi = random_pure(n, rng)
        return np.outer(psi, psi.conj())
    return random_density(n, rng, rank=int(rng.integers(1, 2**n + 1)))


def test_8_property_suites(acceptance, stabs1, stabs2, rng):
    stabs = {1: stabs1, 2: stabs2}
    count = 200
    worst = {"M>=1": 0.0, "faithful": 0.0, "clifford": 0.0, "convex": 0.0, "pauli": 0.0, "reset": 0.0, "st": 0.0}

    def M(rho, n):
        return monotone_M_exact(PauliVector(expectations(rho), n), stabs[n]).value

    for i in range(count):
        n = 1 + i % 2
        rho = _random_magic_state(n, rng)
        m = M(rho, n)
        worst["M>=1"] = max(worst["M>=1"], 1 - m)
        v = PauliVector(expectations(rho), n)
        worst["st"] = max(worst["st"], max(1.0, stabilizer_norm(v)) - m)

        weights = rng.dirichlet(np.ones(stabs[n].count) * 0.3)
        mix = PauliVector(weights @ stabs[n].dense().astype(float), n)
        worst["faithful"] = max(
            worst["faithful"], abs(monotone_M_exact(mix, stabs[n]).value - 1), abs(witness_W(mix, stabs[n]).value)
        )

        u = _random_clifford(n, rng)
        worst["clifford"] = max(worst["clifford"], abs(M(u @ rho @ u.conj().T, n) - m))

        sigma = _random_magic_state(n, rng)
        p = rng.random()
        worst["convex"] = max(worst["convex"], M(p * rho + (1 - p) * sigma, n) - p * m - (1 - p) * M(sigma, n))

        worst["pauli"] = max(worst["pauli"], M(_pauli_channel(rho, n, rng), n) - m)
        # replace the whole state by a fixed stabilizer state with probability q
        stab = from_expectations(stabs[n].dense()[rng.integers(stabs[n].count)].astype(float))
        q = rng.random()
        worst["reset"] = max(worst["reset"], M((1 - q) * rho + q * stab, n) - m)

    limits = {"st": 1e-9}
    ok = all(w <= limits.get(k, 1e-7) for k, w in worst.items())
    acceptance("8 property suites", ok, f"{count} instances, worst violations " + " ".join(f"{k}={w:.1e}" for k, w in worst.items()))
    assert ok


def test_9_oracle_equivalence(acceptance, stabs2, rng):
    band = 1e-6
    disagreements = 0
    considered = 0
    magic = 0
    for _ in range(500):
        psi = random_pure(2, rng)
        p = rng.random()
        # pure states diluted towards I/4 straddle the polytope boundary
        rho = p * np.outer(psi, psi.conj()) + (1 - p) * np.eye(4) / 4
        v = PauliVector(expectations(rho), 2)
        m = monotone_M_exact(v, stabs2).value
        rom = robustness(v, stabs2)[0]
        if abs(m - 1) <= band or abs(rom - 1) <= band:
            if (m > 1 + band) != (rom > 1 + band):
                continue
        considered += 1
        magic += m > 1 + band
        disagreements += (m > 1 + band) != (rom > 1 + band)
    ok = disagreements == 0
    acceptance("9 M and RoM agree on magic", ok, f"{disagreements} disagreements, {magic}/{considered} magic")
    assert ok
