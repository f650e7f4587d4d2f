"""Density states, the Werner family, named example states and their P-space vectors.

State expressions used by the CLI::

    expr   := name [":" params]
    params := key "=" value ("," key "=" value)*

``werner`` takes ``mu`` and ``base``; ``base`` must come last and swallows the
rest of the string as a nested expression, e.g.
``werner:mu=0.6,base=ghz:N=2,phi=0.7854``. Angles are in radians.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pauli import MAX_DENSE_QUBITS, CapacityError, PauliVector, symplectic_tables


class InvalidStateError(ValueError):
    pass


class StateParseError(ValueError):
    pass


@dataclass(frozen=True)
class DensityState:
    matrix: np.ndarray
    n_qubits: int

    def __post_init__(self):
        if self.n_qubits > MAX_DENSE_QUBITS:
            raise CapacityError(f"dense states supported up to N={MAX_DENSE_QUBITS}")
        m = np.array(self.matrix, dtype=complex)
        dim = 2**self.n_qubits
        if m.shape != (dim, dim):
            raise InvalidStateError(f"expected a {dim}x{dim} matrix, got {m.shape}")
        if abs(np.trace(m) - 1) > 1e-12:
            raise InvalidStateError(f"trace {np.trace(m)} != 1")
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise InvalidStateError("matrix is not Hermitian")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise InvalidStateError("matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, amplitudes) -> "DensityState":
        psi = np.asarray(amplitudes, dtype=complex)
        n = int(round(np.log2(len(psi))))
        if 2**n != len(psi):
            raise InvalidStateError("amplitude vector length is not a power of 2")
        if abs(np.vdot(psi, psi) - 1) > 1e-9:
            raise InvalidStateError("amplitude vector is not normalized")
        rho = np.outer(psi, psi.conj())
        # remove rounding asymmetry so the strict checks above hold
        rho = (rho + rho.conj().T) / 2
        rho /= np.trace(rho).real
        return cls(rho, n)

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityState":
        dim = 2**n_qubits
        return cls(np.eye(dim) / dim, n_qubits)

    def mix(self, other: "DensityState", weight: float) -> "DensityState":
        """``(1 - weight) * self + weight * other``."""
        return DensityState((1 - weight) * self.matrix + weight * other.matrix, self.n_qubits)


@dataclass(frozen=True)
class WernerSpec:
    base_state: DensityState
    mu: float

    def __post_init__(self):
        if not 0 <= self.mu <= 1:
            raise InvalidStateError(f"mu={self.mu} outside [0, 1]")


@lru_cache(maxsize=None)
def _walsh(n_qubits: int) -> np.ndarray:
    j = np.arange(2**n_qubits)
    parity = np.vectorize(lambda v: bin(v).count("1") & 1)(j[:, None] & j[None, :])
    return 1 - 2 * parity


def expectation_values(matrix: np.ndarray, n_qubits: int) -> np.ndarray:
    """Complex Tr(rho P_k) for every k, without building any Pauli matrix.

    Uses ``Tr(rho P(x,z)) = i^{x.z} sum_j rho[j, j^x] (-1)^{z.j}``.
    """
    dim = 2**n_qubits
    j = np.arange(dim)
    gathered = matrix[j[None, :], j[None, :] ^ j[:, None]]  # row x: rho[j, j^x]
    table = gathered @ _walsh(n_qubits)  # [x, z]
    xs, zs = symplectic_tables(n_qubits)
    turns = np.vectorize(lambda v: bin(v).count("1"))(xs & zs) % 4
    return table[xs, zs] * np.array([1, 1j, -1, -1j])[turns]


def expectation_vector(rho: DensityState) -> PauliVector:
    vals = expectation_values(rho.matrix, rho.n_qubits)
    if np.abs(vals.imag).max() > 1e-8:
        raise InvalidStateError("Pauli expectation has an imaginary part above 1e-8")
    real = vals.real.copy()
    real[0] = 1.0
    return PauliVector(real, rho.n_qubits)


def reconstruct(v: PauliVector) -> np.ndarray:
    """rho = sum_k <P_k> P_k / 2^N (dense; used as a round-trip check)."""
    from .pauli import PauliString, dense_matrix

    dim = 2**v.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for k, val in enumerate(v.values):
        if val != 0:
            out += val * dense_matrix(PauliString(k, v.n_qubits))
    return out / dim


def werner_state(spec: WernerSpec) -> DensityState:
    n = spec.base_state.n_qubits
    if spec.mu == 0:
        return DensityState.maximally_mixed(n)
    dim = 2**n
    return DensityState((1 - spec.mu) * np.eye(dim) / dim + spec.mu * spec.base_state.matrix, n)


def werner_vector(base: PauliVector, mu: float) -> PauliVector:
    """P-space vector of the Werner state, linear in mu."""
    if not 0 <= mu <= 1:
        raise InvalidStateError(f"mu={mu} outside [0, 1]")
    return base.scaled(mu)


# --- named states ---------------------------------------------------------

def ghz_phase_amplitudes(n_qubits: int, phi: float) -> np.ndarray:
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[0] = 1 / np.sqrt(2)
    psi[-1] = np.exp(1j * phi) / np.sqrt(2)
    return psi


def plus_phase_product_amplitudes(n_qubits: int, phi: float) -> np.ndarray:
    single = np.array([1, np.exp(1j * phi)]) / np.sqrt(2)
    psi = np.ones(1, dtype=complex)
    for _ in range(n_qubits):
        psi = np.kron(psi, single)
    return psi


def theta_phi_bell_amplitudes(theta: float, phi: float) -> np.ndarray:
    return np.array([np.cos(theta / 2), 0, 0, np.exp(1j * phi) * np.sin(theta / 2)])


def uniform_phase_amplitudes(n_qubits: int, phi: float) -> np.ndarray:
    psi = np.ones(2**n_qubits, dtype=complex)
    psi[-1] = np.exp(1j * phi)
    return psi / np.sqrt(2**n_qubits)


def _need_n(params: dict) -> int:
    if "N" not in params:
        raise StateParseError("missing N")
    n = int(params["N"])
    if n < 1:
        raise StateParseError(f"N={n} must be >= 1")
    return n


def named_state(name: str, **params) -> DensityState:
    """Pure (or maximally mixed) named states.

    ghz_phase(N, phi)          (|0..0> + e^{i phi}|1..1>)/sqrt 2
    plus_phase_product(N, phi) ((|0> + e^{i phi}|1>)/sqrt 2)^{(x)N}
    theta_phi_bell(theta, phi) cos(theta/2)|00> + e^{i phi} sin(theta/2)|11>
    uniform_phase(N, phi)      uniform superposition with e^{i phi} on |1..1>
    uniform_i(N)               I / 2^N
    """
    name = _ALIASES.get(name, name)
    if name == "uniform_i":
        return DensityState.maximally_mixed(_need_n(params))
    if name == "ghz_phase":
        return DensityState.pure(ghz_phase_amplitudes(_need_n(params), params.get("phi", 0.0)))
    if name == "plus_phase_product":
        return DensityState.pure(
            plus_phase_product_amplitudes(_need_n(params), params.get("phi", 0.0))
        )
    if name == "theta_phi_bell":
        return DensityState.pure(
            theta_phi_bell_amplitudes(params.get("theta", 0.0), params.get("phi", 0.0))
        )
    if name == "uniform_phase":
        return DensityState.pure(
            uniform_phase_amplitudes(_need_n(params), params.get("phi", 0.0))
        )
    raise StateParseError(f"unknown state {name!r}")


def named_vector(name: str, **params) -> PauliVector:
    """P-space vector of a named state; product states skip the dense matrix."""
    name = _ALIASES.get(name, name)
    if name == "plus_phase_product":
        n, phi = _need_n(params), params.get("phi", 0.0)
        single = np.array([1.0, np.cos(phi), np.sin(phi), 0.0])
        v = np.ones(1)
        for _ in range(n):
            v = np.kron(v, single)
        return PauliVector(v, n)
    if name == "uniform_i":
        n = _need_n(params)
        v = np.zeros(4**n)
        v[0] = 1
        return PauliVector(v, n)
    return expectation_vector(named_state(name, **params))


_ALIASES = {
    "ghz": "ghz_phase",
    "product": "plus_phase_product",
    "bell": "theta_phi_bell",
    "mixed": "uniform_i",
}
_INT_KEYS = {"N"}
_FLOAT_KEYS = {"phi", "theta", "mu"}
STATE_NAMES = ("ghz_phase", "plus_phase_product", "theta_phi_bell", "uniform_phase", "uniform_i")


@dataclass(frozen=True)
class StateExpr:
    """Parsed state expression; ``base`` is set only for werner."""

    name: str
    params: dict
    base: "StateExpr | None" = None
    text: str = ""

    @property
    def label(self) -> str:
        return self.text

    def vector(self) -> PauliVector:
        if self.name == "werner":
            return werner_vector(self.base.vector(), self.params["mu"])
        return named_vector(self.name, **self.params)

    def density(self) -> DensityState:
        if self.name == "werner":
            return werner_state(WernerSpec(self.base.density(), self.params["mu"]))
        return named_state(self.name, **self.params)


def parse_state(text: str) -> StateExpr:
    text = text.strip()
    name, _, rest = text.partition(":")
    name = name.strip()
    if not name:
        raise StateParseError(f"empty state name in {text!r}")
    params: dict = {}
    base = None
    while rest:
        key, eq, rest = rest.partition("=")
        key = key.strip()
        if not eq or not key:
            raise StateParseError(f"expected key=value in {text!r}")
        if key == "base":
            base = parse_state(rest)
            rest = ""
            break
        value, _, rest = rest.partition(",")
        if key in _INT_KEYS:
            try:
                params[key] = int(value)
            except ValueError:
                raise StateParseError(f"{key} must be an integer, got {value!r}") from None
        elif key in _FLOAT_KEYS:
            try:
                params[key] = float(value)
            except ValueError:
                raise StateParseError(f"{key} must be a number, got {value!r}") from None
        else:
            raise StateParseError(f"unknown key {key!r} in {text!r}")
    if name == "werner":
        if base is None or "mu" not in params:
            raise StateParseError("werner needs mu=... and base=...")
        if not 0 <= params["mu"] <= 1:
            raise StateParseError(f"mu={params['mu']} outside [0, 1]")
        return StateExpr(name, params, base, text)
    if base is not None:
        raise StateParseError(f"{name} does not take a base state")
    canonical = _ALIASES.get(name, name)
    if canonical not in STATE_NAMES:
        raise StateParseError(f"unknown state {name!r}")
    if canonical != "theta_phi_bell":
        _need_n(params)
    return StateExpr(canonical, params, None, text)
