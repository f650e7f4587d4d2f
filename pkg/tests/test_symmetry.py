import numpy as np
import pytest

from magicpoly.states import named_vector
from magicpoly.symmetry import (
    compose,
    fixing_symmetries,
    orbit_reduction,
    pauli_signs,
    reduction_for,
    site_group,
    swap,
    trivial_reduction,
)
from helpers import expectations, pauli_labels, pauli_matrix, random_density


def _preserves_stabilizers(table, stabs):
    perm, sign = table
    dense = stabs.dense()
    keys = {row.tobytes() for row in dense}
    return all((sign * row[perm]).astype(dense.dtype).tobytes() in keys for row in dense)


def test_site_group_has_24_elements():
    for n in (1, 2):
        for site in range(n):
            assert len(site_group(n, site)) == 24


def test_swap_exchanges_sites():
    perm, sign = swap(2, 0, 1)
    # XZ (index 1*4+3) <-> ZX (3*4+1)
    v = np.zeros(16)
    v[7] = 1
    assert np.array_equal(sign * v[perm], np.eye(16)[13])
    assert np.all(sign == 1)


def test_compose_order():
    a, b = site_group(1, 0)[3], site_group(1, 0)[7]
    v = np.arange(4.0)
    once = b[1] * (a[1] * v[a[0]])[b[0]]
    p, s = compose(a, b)
    assert np.allclose(s * v[p], once)


def test_pauli_signs_match_commutators():
    n = 2
    signs = pauli_signs(n)
    mats = [pauli_matrix(p) for p in pauli_labels(n)]
    for g in range(16):
        for k in range(16):
            commute = np.allclose(mats[g] @ mats[k], mats[k] @ mats[g])
            assert signs[g, k] == (1 if commute else -1)


@pytest.mark.parametrize("name,kw", [("ghz", {"N": 2, "phi": np.pi / 4}), ("product", {"N": 2, "phi": np.pi / 4}),
                                     ("ghz", {"N": 3, "phi": np.pi / 4})])
def test_found_tables_fix_state_and_polytope(name, kw, stabs2, stabs3):
    v = named_vector(name, **kw)
    stabs = stabs2 if v.n_qubits == 2 else stabs3
    tables, zero = fixing_symmetries(v.values, v.n_qubits)
    assert tables
    for perm, sign in tables:
        assert np.allclose(sign * v.values[perm], v.values)
        assert _preserves_stabilizers((perm, sign), stabs)
    assert np.all(v.values[zero] == 0)


def test_reduction_basis(rng):
    v = named_vector("ghz", N=3, phi=np.pi / 4)
    red = reduction_for(v.values, 3)
    assert 0 < red.dim < 63
    # columns have disjoint supports of +-1 entries and avoid the identity
    assert np.all(np.abs(red.basis).sum(axis=1) <= 1) and not red.basis[0].any()
    # v itself lies in the invariant space
    y = np.linalg.lstsq(red.basis, v.values, rcond=None)[0]
    assert np.allclose(red.expand(y), v.values - np.eye(64)[0])


def test_generic_state_has_trivial_reduction(rng):
    v = expectations(random_density(2, rng))
    red = reduction_for(v, 2)
    assert red.dim == 15
    assert np.array_equal(trivial_reduction(2).basis, np.eye(16)[:, 1:])


def test_orbit_reduction_without_tables_keeps_nonzero():
    zero = np.zeros(16, dtype=bool)
    zero[[3, 5]] = True
    red = orbit_reduction([], zero, 2)
    assert red.dim == 13
