import numpy as np
import pytest

from magicpoly.states import (
    DensityState,
    InvalidStateError,
    StateParseError,
    WernerSpec,
    expectation_vector,
    named_state,
    named_vector,
    parse_state,
    reconstruct,
    werner_state,
    werner_vector,
)
from helpers import expectations, random_density

T = np.pi / 4


def test_expectations_match_trace_oracle(rng):
    for n in (1, 2, 3):
        rho = random_density(n, rng)
        v = expectation_vector(DensityState(rho, n))
        assert np.allclose(v.values, expectations(rho))
        assert np.allclose(reconstruct(v), rho)


def test_named_states_analytic_and_dense_agree():
    for n in (1, 2, 3):
        dense = expectation_vector(named_state("product", N=n, phi=T)).values
        assert np.allclose(named_vector("product", N=n, phi=T).values, dense)
    assert np.allclose(named_vector("uniform_i", N=2).values, np.eye(16)[0])


def test_t_state_components():
    v = named_vector("product", N=1, phi=T).values
    assert np.allclose(v, [1, 1 / np.sqrt(2), 1 / np.sqrt(2), 0])


def test_werner_mixing():
    base = named_state("ghz", N=2, phi=T)
    mixed = werner_state(WernerSpec(base, 0.3))
    expected = 0.3 * base.matrix + 0.7 * np.eye(4) / 4
    assert np.allclose(mixed.matrix, expected)
    assert np.allclose(werner_vector(expectation_vector(base), 0.3).values, expectations(expected))


def test_density_validation():
    with pytest.raises(InvalidStateError):
        DensityState(np.diag([0.7, 0.7]), 1)
    with pytest.raises(InvalidStateError):
        DensityState(np.diag([1.5, -0.5]), 1)
    with pytest.raises(InvalidStateError):
        DensityState(np.array([[0.5, 0.1], [0.2, 0.5]]), 1)
    with pytest.raises(InvalidStateError):
        WernerSpec(DensityState.maximally_mixed(1), 1.5)


def test_parse_grammar():
    e = parse_state("werner:mu=0.25,base=ghz:N=2,phi=0.5")
    assert e.name == "werner" and e.params["mu"] == 0.25
    assert e.base.name == "ghz_phase" and e.base.params == {"N": 2, "phi": 0.5}
    v = e.vector()
    assert np.isclose(v.values[0], 1) and v.n_qubits == 2
    assert np.allclose(e.density().matrix, reconstruct(v))
    assert parse_state("uniform_i:N=3").vector().n_qubits == 3
    assert parse_state("bell:theta=1.0,phi=0.3").vector().n_qubits == 2


@pytest.mark.parametrize(
    "text",
    ["", "ghz", "ghz:N=x", "ghz:N=0", "ghz:N=2,foo=1", "werner:mu=0.5", "werner:mu=2,base=ghz:N=1", "nope:N=1", "ghz:N=2,base=ghz:N=2"],
)
def test_parse_errors(text):
    with pytest.raises(StateParseError):
        parse_state(text)
