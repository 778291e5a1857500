"""Channel operators for the two impurity kinds.

Fixed-spin filter: a scatterer whose spin is pinned along an axis.  The
flying-spin component aligned with the axis passes freely; the anti-aligned
component sees a delta barrier of twice the bare coupling (the potential is
coupling * (1 - n.sigma), whose eigenvalues are 0 and 2*coupling), so its
transmission is 1/(1 + 2i r/k).

Exchange (Kondo) channel: a free impurity spin contact-coupled to the
flying spin.  The two-spin space splits into four channel states, the
aligned kets |00> and |11> and the symmetric/antisymmetric combinations
(|01> +- |10>)/sqrt(2); channel c scatters with its own scalar amplitude
S_c = 1/(1 + i r*lambda_c/k) fixed by the channel eigenvalue lambda_c.
On the computational basis this mixes |01> and |10>:

    |01> -> (S_sym+S_anti)/2 |01> + (S_sym-S_anti)/2 |10>
    |10> -> (S_sym-S_anti)/2 |01> + (S_sym+S_anti)/2 |10>

both rows following from expanding against the channel states; at zero
coupling every S_c = 1 and the map is exactly the identity.

Eigenvalue presets: "default" = (1, 1, -2, 0); "standard-pauli" =
(1, 1, 1, -3), the spectrum of the two-spin Pauli exchange operator
sigma.sigma (triplet +1, singlet -3).  Any custom 4-tuple is accepted.
"""

import math
from dataclasses import dataclass

import numpy as np

from .hilbert import SpinState, make_state, pauli_along
from .scattering import OperatorAmplitudes, scalar_amplitudes
from .tolerances import DEFAULT as TOL

EXCHANGE_EIGENVALUE_PRESETS: dict[str, tuple[float, float, float, float]] = {
    "default": (1.0, 1.0, -2.0, 0.0),
    "standard-pauli": (1.0, 1.0, 1.0, -3.0),
}
DEFAULT_EXCHANGE_EIGENVALUES = EXCHANGE_EIGENVALUE_PRESETS["default"]


def _check_eigenvalues(eigenvalues) -> tuple[float, float, float, float]:
    ev = tuple(float(x) for x in eigenvalues)
    if len(ev) != 4 or not all(math.isfinite(x) for x in ev):
        raise ValueError("eigenvalues must be four finite numbers")
    return ev


@dataclass(frozen=True)
class FixedImpurity:
    """Pinned-spin scatterer: bare coupling and spin axis (unit 3-vector)."""

    coupling: float
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if not math.isfinite(self.coupling):
            raise ValueError("coupling must be finite")
        ax = tuple(float(x) for x in self.axis)
        if len(ax) != 3 or not all(math.isfinite(x) for x in ax):
            raise ValueError("axis must be a finite 3-vector")
        if abs(math.sqrt(sum(x * x for x in ax)) - 1.0) > TOL.normalization:
            raise ValueError("axis must be a unit vector (within 1e-10)")
        object.__setattr__(self, "axis", ax)


@dataclass(frozen=True)
class KondoImpurity:
    """Free-spin scatterer: exchange coupling and per-channel eigenvalues."""

    coupling: float
    eigenvalues: tuple[float, float, float, float] = DEFAULT_EXCHANGE_EIGENVALUES

    def __post_init__(self):
        if not math.isfinite(self.coupling):
            raise ValueError("coupling must be finite")
        object.__setattr__(self, "eigenvalues", _check_eigenvalues(self.eigenvalues))


def exchange_eigenbasis(eigenvalues=DEFAULT_EXCHANGE_EIGENVALUES):
    """Orthonormal two-spin channel states paired with their eigenvalues.

    Order: aligned-up |00>, aligned-down |11>, symmetric (|01>+|10>)/sqrt(2),
    antisymmetric (|01>-|10>)/sqrt(2).  Labels mark the flying particle as
    the most significant qubit.
    """
    ev = _check_eigenvalues(eigenvalues)
    rt = math.sqrt(0.5)
    labels = ("particle", "impurity")
    states = (
        make_state([1, 0, 0, 0], labels),
        make_state([0, 0, 0, 1], labels),
        make_state([0, rt, rt, 0], labels),
        make_state([0, rt, -rt, 0], labels),
    )
    return list(zip(states, ev))


def exchange_matrix(eigenvalues=DEFAULT_EXCHANGE_EIGENVALUES) -> np.ndarray:
    """Direction matrix sum_c lambda_c |c><c| of the exchange potential.

    Multiplying by the coupling gives the delta-barrier potential the
    exchange impurity presents to the two-spin space.
    """
    out = np.zeros((4, 4), dtype=complex)
    for state, lam in exchange_eigenbasis(eigenvalues):
        v = state.amplitudes
        out += lam * np.outer(v, v.conj())
    return out


def kondo_channel_amplitudes(spec: KondoImpurity, k: float) -> tuple[complex, ...]:
    """Per-channel scalar transmissions S_c = 1/(1 + i r*lambda_c/k)."""
    return tuple(
        scalar_amplitudes(spec.coupling * lam, k).transmission
        for _, lam in exchange_eigenbasis(spec.eigenvalues)
    )


def kondo_operators(spec: KondoImpurity, k: float) -> OperatorAmplitudes:
    """Two-spin transmission/reflection operators of the exchange impurity.

    Built channel by channel from the eigenbasis (a deliberately different
    route from matrix_amplitudes' linear solve; the two must agree).
    """
    amplitudes = kondo_channel_amplitudes(spec, k)
    t = np.zeros((4, 4), dtype=complex)
    for (state, _), s_c in zip(exchange_eigenbasis(spec.eigenvalues), amplitudes):
        v = state.amplitudes
        t += s_c * np.outer(v, v.conj())
    return OperatorAmplitudes(t, t - np.eye(4))


def fixed_filter_operators(spec: FixedImpurity, k: float) -> OperatorAmplitudes:
    """Single-spin transmission/reflection operators of the pinned-spin filter."""
    # anti-aligned component sees twice the bare coupling
    s = scalar_amplitudes(2.0 * spec.coupling, k).transmission
    sigma = pauli_along(spec.axis)
    eye = np.eye(2, dtype=complex)
    p_plus = 0.5 * (eye + sigma)
    p_minus = 0.5 * (eye - sigma)
    t = p_plus + s * p_minus
    return OperatorAmplitudes(t, t - eye)


def embed(op, total_qubits: int, targets) -> np.ndarray:
    """Extend an operator on the target qubits to the full register by identity.

    targets lists qubit indices in most-significant-first order of the
    operator's own index; qubit q addresses the bit of weight 2**q in the
    register.
    """
    mat = np.asarray(op, dtype=complex)
    targets = [int(q) for q in targets]
    n = int(total_qubits)
    if n < 1 or n > 3:
        raise ValueError("total_qubits must be between 1 and 3")
    if len(set(targets)) != len(targets):
        raise ValueError("targets must be distinct")
    if any(q < 0 or q >= n for q in targets):
        raise ValueError(f"target qubit out of range for a {n}-qubit register")
    m = len(targets)
    if mat.ndim != 2 or mat.shape != (2**m, 2**m):
        raise ValueError(f"operator shape {mat.shape} does not match {m} target qubit(s)")
    if not np.all(np.isfinite(mat)):
        raise ValueError("operator entries must be finite")

    rest = [q for q in range(n - 1, -1, -1) if q not in targets]
    big = np.kron(mat, np.eye(2 ** (n - m), dtype=complex))
    tens = big.reshape((2,) * (2 * n))
    current = targets + rest  # qubit owning each tensor axis, rows then columns
    perm = [current.index(q) for q in range(n - 1, -1, -1)]
    return tens.transpose(perm + [n + i for i in perm]).reshape(2**n, 2**n)
