"""Post-selection protocols built on the impurity channels.

Four protocols, each returning a ProtocolResult:

- concentrate_fixed: a partially entangled pair a|00> + b|11> is filtered by
  scattering one particle off a pinned-spin impurity; transmission damps the
  dominant |11> amplitude toward balance.
- concentrate_kondo: the same goal with a free-spin impurity, which needs an
  extra z measurement on the impurity after scattering.
- entangle_particles: two independent particles scatter one after the other
  off the same free-spin impurity; measuring the impurity projects the
  particles onto an entangled state.
- entangle_impurities: one particle flies past two separated free-spin
  impurities; measuring the particle entangles the impurities.  Runs either
  as the first-order single-pass composition or through the exact two-region
  solver that keeps every back-and-forth reflection.

Probability bookkeeping: branch states carry raw (unnormalized) amplitudes
descended from the normalized initial state, so a branch's squared norm is
its absolute probability; conditional probabilities relative to the parent
branch are reported alongside.  The retry loop ("reflected, start over with
a fresh particle") is reported as per-attempt probabilities and an expected
attempt count 1/p, never simulated stochastically.

Measurements here are in the z basis {|0>, |1>}; arbitrary-axis measurement
is available through hilbert.project for custom pipelines.  Entropy and
concurrence in outcomes always refer to the two undetected qubits.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    DEFAULT_EXCHANGE_EIGENVALUES,
    EXCHANGE_EIGENVALUE_PRESETS,
    FixedImpurity,
    KondoImpurity,
    embed,
    exchange_matrix,
    fixed_filter_operators,
    kondo_channel_amplitudes,
    kondo_operators,
)
from .hilbert import (
    SpinState,
    apply,
    basis_state,
    concurrence,
    drop_qubit,
    make_state,
    normalize,
    partial_trace,
    von_neumann_entropy,
)
from .errors import InternalFaultError
from .scattering import TwoImpurityGeometry, scalar_amplitudes, two_impurity_exact
from .tolerances import DEFAULT as TOL

# Branches whose probability falls at or below this floor are exact arithmetic
# nulls (e.g. the reflected branch at zero coupling), not small physical
# amplitudes; they are pruned from trees and carry no post state.
_NULL = 1e-28


@dataclass(frozen=True)
class EventBranch:
    """One terminal branch: label, absolute probability, raw amplitudes."""

    label: str
    probability: float
    state: SpinState


@dataclass(frozen=True)
class EventTree:
    """Complete enumeration of mutually exclusive terminal branches."""

    branches: tuple[EventBranch, ...]

    def total_probability(self) -> float:
        return float(sum(b.probability for b in self.branches))


@dataclass(frozen=True)
class ProtocolOutcome:
    """A designated measurement branch with its figures of merit.

    branch_probability is absolute (relative to the normalized initial
    state); conditional_probability is relative to the surviving parent
    branch.  post_state is the normalized state of the undetected qubits,
    None when the branch is an exact null.
    """

    branch_label: str
    branch_probability: float
    conditional_probability: float
    post_state: SpinState | None
    entropy_bits: float | None
    concurrence: float | None


@dataclass(frozen=True)
class ProtocolResult:
    outcomes: tuple[ProtocolOutcome, ...]
    tree: EventTree
    metadata: dict[str, float] = field(default_factory=dict)


def _tree(*branches: EventBranch) -> EventTree:
    return EventTree(tuple(b for b in branches if b.probability > _NULL))


def _branch(label: str, state: SpinState) -> EventBranch:
    return EventBranch(label, state.norm_squared, state)


def _pair_outcome(label: str, post_full: SpinState, measured_qubit: int, bit: int,
                  parent_prob: float) -> ProtocolOutcome:
    """Outcome record for a z-collapsed branch, reduced to the unmeasured pair."""
    prob = post_full.norm_squared
    cond = prob / parent_prob if parent_prob > _NULL else 0.0
    if prob <= _NULL:
        return ProtocolOutcome(label, 0.0, cond, None, None, None)
    pair = normalize(drop_qubit(post_full, measured_qubit, bit))
    ent = von_neumann_entropy(partial_trace(pair, {0}))
    return ProtocolOutcome(label, prob, cond, pair, ent, concurrence(pair))


def _measured_branches(state: SpinState, qubit: int, label_prefix: str):
    """Split a branch on a z measurement; returns [(label, bit, post_full), ...]."""
    out = []
    for bit in (0, 1):
        t = state.amplitudes.reshape((2,) * state.num_qubits)
        axis = state.num_qubits - 1 - qubit
        collapsed = np.zeros_like(t)
        idx = [slice(None)] * state.num_qubits
        idx[axis] = bit
        collapsed[tuple(idx)] = t[tuple(idx)]
        post = SpinState(collapsed.reshape(-1), state.labels)
        out.append((f"{label_prefix}|{bit}>", bit, post))
    return out


def _attempts(meta: dict, success_probability: float) -> dict:
    meta["success_probability"] = success_probability
    if success_probability > _NULL:
        meta["expected_attempts"] = 1.0 / success_probability
    return meta


def _check_pair(a: complex, b: complex):
    total = abs(a) ** 2 + abs(b) ** 2
    if abs(total - 1.0) > TOL.normalization:
        raise ValueError(f"|a|^2 + |b|^2 must equal 1 (got {total:.12g})")


def concentrate_fixed(a, b, k: float, coupling: float, axis=(0.0, 0.0, 1.0)) -> ProtocolResult:
    """Filter a|00> + b|11> by scattering particle 1 off a pinned-spin impurity.

    The transmitted branch is proportional to a|00> + b*S|11> for the z axis
    (S the anti-aligned transmission), with probability |a|^2 + |b|^2 |S|^2;
    the reflected branch is recorded in the event tree.  Entropy and
    concurrence refer to the transmitted two-particle state.
    """
    _check_pair(a, b)
    amps = fixed_filter_operators(FixedImpurity(float(coupling), tuple(axis)), k)
    psi0 = make_state([a, 0.0, 0.0, b], ("particle-2", "particle-1"))
    transmit = apply(embed(amps.transmission, 2, (0,)), psi0)
    reflect = apply(embed(amps.reflection, 2, (0,)), psi0)

    prob = transmit.norm_squared
    if prob > _NULL:
        post = normalize(transmit)
        outcome = ProtocolOutcome(
            "transmitted", prob, prob, post,
            von_neumann_entropy(partial_trace(post, {0})), concurrence(post),
        )
    else:
        outcome = ProtocolOutcome("transmitted", 0.0, 0.0, None, None, None)

    meta = _attempts({"coupling": float(coupling), "xi": 2.0 * float(coupling) / k}, prob)
    tree = _tree(_branch("transmitted", transmit), _branch("reflected", reflect))
    return ProtocolResult((outcome,), tree, meta)


def optimal_coupling_fixed(a, b, k: float) -> float:
    """Coupling that balances the filtered pair: |S| = |a/b|, so r = (k/2)sqrt(|b/a|^2 - 1).

    Requires 0 < |a| < |b| (filtering can only damp the larger amplitude).
    The closed form is cross-checked against a numeric root-find in tests.
    """
    if not (isinstance(k, (int, float)) and math.isfinite(k) and k > 0):
        raise ValueError("k must be positive")
    ma, mb = abs(a), abs(b)
    if ma <= 0.0 or ma >= mb:
        raise ValueError("optimal coupling requires 0 < |a| < |b|")
    xi = math.sqrt((mb / ma) ** 2 - 1.0)
    coupling = k * xi / 2.0
    # verify the defining balance |S(2r)| = |a/b| before handing the value out
    attained = abs(scalar_amplitudes(2.0 * coupling, k).transmission)
    if abs(attained - ma / mb) > TOL.algebraic:
        raise InternalFaultError(
            f"optimal coupling balance residual {abs(attained - ma / mb):.3e} exceeds 1e-12"
        )
    return coupling


def concentrate_kondo(a, b, k: float, impurity: KondoImpurity) -> ProtocolResult:
    """Filter a|00> + b|11> by scattering particle 1 off a free-spin impurity.

    The impurity starts in |0> and is measured in the z basis after the
    scattering.  Outcome |0> leaves the particles in a*S1|00> +
    b*(S_sym+S_anti)/2 |11> (up to normalization); outcome |1> leaves the
    product |10> and reveals an impurity flip.  The balance condition
    |a S1| = |b (S_sym+S_anti)/2| makes the |0> branch maximally entangled;
    its residual is reported in metadata.
    """
    _check_pair(a, b)
    amps = kondo_operators(impurity, k)
    psi0 = make_state([a, 0, 0, 0, 0, 0, b, 0], ("particle-2", "particle-1", "impurity-0"))
    transmit = apply(embed(amps.transmission, 3, (1, 0)), psi0)
    reflect = apply(embed(amps.reflection, 3, (1, 0)), psi0)

    p_transmit = transmit.norm_squared
    outcomes = []
    measured = _measured_branches(transmit, 0, "transmitted, impurity measured ")
    for label, bit, post in measured:
        outcomes.append(_pair_outcome(label, post, 0, bit, p_transmit))

    s1, _, s3, s4 = kondo_channel_amplitudes(impurity, k)
    residual = abs(abs(a * s1) - abs(b * (s3 + s4) / 2.0))
    meta = _attempts({"condition_residual": residual}, outcomes[0].branch_probability)
    tree = _tree(
        *[_branch(label, post) for label, _, post in measured],
        _branch("reflected", reflect),
    )
    return ProtocolResult(tuple(outcomes), tree, meta)


def entangle_particles(k: float, impurity: KondoImpurity, initial: SpinState | None = None) -> ProtocolResult:
    """Entangle two flying particles through one free-spin impurity.

    Register order (most significant first): particle-2, particle-1,
    impurity-0.  Particle 1 scatters first, then particle 2; both must
    transmit, after which the impurity is measured in the z basis.  Each
    measurement outcome is reported with the entropy and concurrence of the
    resulting two-particle state; reflected branches terminate the attempt
    and sit in the event tree.
    """
    if initial is None:
        initial = basis_state("001", ("particle-2", "particle-1", "impurity-0"))
    if initial.num_qubits != 3:
        raise ValueError("initial state must have 3 qubits (two particles and the impurity)")
    if not initial.normalized:
        raise ValueError("initial state must be normalized")
    amps = kondo_operators(impurity, k)
    t_first = embed(amps.transmission, 3, (1, 0))
    r_first = embed(amps.reflection, 3, (1, 0))
    t_second = embed(amps.transmission, 3, (2, 0))
    r_second = embed(amps.reflection, 3, (2, 0))

    reflected_1 = apply(r_first, initial)
    after_1 = apply(t_first, initial)
    reflected_2 = apply(r_second, after_1)
    after_2 = apply(t_second, after_1)

    p_both = after_2.norm_squared
    measured = _measured_branches(after_2, 0, "both transmitted, impurity measured ")
    outcomes = tuple(_pair_outcome(label, post, 0, bit, p_both) for label, bit, post in measured)

    meta = _attempts({}, outcomes[0].branch_probability)
    tree = _tree(
        _branch("particle-1 reflected", reflected_1),
        _branch("particle-1 transmitted, particle-2 reflected", reflected_2),
        *[_branch(label, post) for label, _, post in measured],
    )
    return ProtocolResult(outcomes, tree, meta)


def entangle_impurities(k: float, impurity_1: KondoImpurity, impurity_2: KondoImpurity,
                        half_separation: float = 1.0, initial: SpinState | None = None,
                        mode: str = "first-order") -> ProtocolResult:
    """Entangle two separated free-spin impurities with one flying particle.

    Register order (most significant first): particle-0, impurity-1,
    impurity-2.  The particle crosses impurity 1 (at -half_separation) then
    impurity 2 (at +half_separation) and is finally measured in the z basis;
    each outcome is reported with the entropy and concurrence of the
    impurity pair.

    mode "first-order" composes single-impurity transmissions (one pass, no
    revisits) and resolves which impurity reflected; mode "exact" solves the
    full two-impurity problem including all multiple-scattering orders, so
    its tree has a single combined reflected branch.
    """
    if mode not in ("first-order", "exact"):
        raise ValueError(f"mode must be 'first-order' or 'exact', got {mode!r}")
    if initial is None:
        initial = basis_state("100", ("particle-0", "impurity-1", "impurity-2"))
    if initial.num_qubits != 3:
        raise ValueError("initial state must have 3 qubits (particle and two impurities)")
    if not initial.normalized:
        raise ValueError("initial state must be normalized")

    if mode == "first-order":
        amps_1 = kondo_operators(impurity_1, k)
        amps_2 = kondo_operators(impurity_2, k)
        reflected_1 = apply(embed(amps_1.reflection, 3, (2, 1)), initial)
        after_1 = apply(embed(amps_1.transmission, 3, (2, 1)), initial)
        reflected_2 = apply(embed(amps_2.reflection, 3, (2, 0)), after_1)
        after_2 = apply(embed(amps_2.transmission, 3, (2, 0)), after_1)
        failure_branches = [
            _branch("reflected at impurity-1", reflected_1),
            _branch("transmitted impurity-1, reflected at impurity-2", reflected_2),
        ]
        success_prefix = "both transmitted, particle measured "
    else:
        geom = TwoImpurityGeometry(
            half_separation, k,
            embed(impurity_1.coupling * exchange_matrix(impurity_1.eigenvalues), 3, (2, 1)),
            embed(impurity_2.coupling * exchange_matrix(impurity_2.eigenvalues), 3, (2, 0)),
        )
        exact = two_impurity_exact(geom, initial)
        after_2 = exact.transmitted_spin
        failure_branches = [_branch("reflected", exact.reflected_spin)]
        success_prefix = "transmitted, particle measured "

    p_pass = after_2.norm_squared
    measured = _measured_branches(after_2, 2, success_prefix)
    outcomes = tuple(_pair_outcome(label, post, 2, bit, p_pass) for label, bit, post in measured)

    meta = _attempts({}, outcomes[0].branch_probability)
    tree = _tree(*failure_branches, *[_branch(label, post) for label, _, post in measured])
    return ProtocolResult(outcomes, tree, meta)


# ---------------------------------------------------------------------------
# Named-protocol dispatch (event trees, sweeps, CLI)

def _eigenvalues_param(p):
    ev = p.pop("eigenvalues", None)
    if ev is None:
        return DEFAULT_EXCHANGE_EIGENVALUES
    if isinstance(ev, str):
        if ev not in EXCHANGE_EIGENVALUE_PRESETS:
            known = ", ".join(sorted(EXCHANGE_EIGENVALUE_PRESETS))
            raise ValueError(f"unknown eigenvalue preset {ev!r} (known: {known})")
        return EXCHANGE_EIGENVALUE_PRESETS[ev]
    return tuple(float(x) for x in ev)


def _coeff_pair(p):
    if "a" not in p:
        raise ValueError("missing parameter 'a' (magnitude of the |00> amplitude)")
    ma = float(p.pop("a"))
    if not (0.0 <= ma <= 1.0):
        raise ValueError("parameter 'a' must lie in [0, 1]")
    mb = float(p.pop("b")) if "b" in p else math.sqrt(max(0.0, 1.0 - ma * ma))
    pa = float(p.pop("a_phase", 0.0))
    pb = float(p.pop("b_phase", 0.0))
    a = ma * complex(math.cos(pa), math.sin(pa))
    b = mb * complex(math.cos(pb), math.sin(pb))
    return a, b


def _axis_param(p):
    theta = p.pop("axis_theta", None)
    axis = p.pop("axis", None)
    if theta is not None:
        return (math.sin(float(theta)), 0.0, math.cos(float(theta)))
    if axis is not None:
        return tuple(float(x) for x in axis)
    return (0.0, 0.0, 1.0)


def _reject_unknown(p, protocol):
    if p:
        raise ValueError(f"unknown parameter(s) for {protocol}: {', '.join(sorted(p))}")


def _initial_param(p, labels):
    bits = p.pop("initial", None)
    return None if bits is None else basis_state(str(bits), labels)


def _run_concentrate_fixed(p):
    a, b = _coeff_pair(p)
    k = float(p.pop("k", 1.0))
    axis = _axis_param(p)
    r = p.pop("r", None)
    _reject_unknown(p, "concentrate")
    if r is None:
        r = optimal_coupling_fixed(a, b, k)
    return concentrate_fixed(a, b, k, float(r), axis)


def _run_concentrate_kondo(p):
    a, b = _coeff_pair(p)
    k = float(p.pop("k", 1.0))
    ev = _eigenvalues_param(p)
    if "r" not in p:
        raise ValueError("missing parameter 'r' (exchange coupling)")
    r = float(p.pop("r"))
    _reject_unknown(p, "concentrate-kondo")
    return concentrate_kondo(a, b, k, KondoImpurity(r, ev))


def _run_entangle_particles(p):
    k = float(p.pop("k", 1.0))
    ev = _eigenvalues_param(p)
    if "r" not in p:
        raise ValueError("missing parameter 'r' (exchange coupling)")
    r = float(p.pop("r"))
    initial = _initial_param(p, ("particle-2", "particle-1", "impurity-0"))
    _reject_unknown(p, "entangle-particles")
    return entangle_particles(k, KondoImpurity(r, ev), initial)


def _run_entangle_impurities(p):
    k = float(p.pop("k", 1.0))
    ev = _eigenvalues_param(p)
    common = p.pop("r", None)
    r1 = float(p.pop("r1", common if common is not None else float("nan")))
    r2 = float(p.pop("r2", common if common is not None else float("nan")))
    if math.isnan(r1) or math.isnan(r2):
        raise ValueError("missing parameter 'r1'/'r2' (or common 'r') for the two couplings")
    half_separation = float(p.pop("half_separation", 1.0))
    mode = str(p.pop("mode", "first-order"))
    initial = _initial_param(p, ("particle-0", "impurity-1", "impurity-2"))
    _reject_unknown(p, "entangle-impurities")
    return entangle_impurities(k, KondoImpurity(r1, ev), KondoImpurity(r2, ev),
                               half_separation, initial, mode)


_PROTOCOLS = {
    "concentrate": _run_concentrate_fixed,
    "concentrate-kondo": _run_concentrate_kondo,
    "entangle-particles": _run_entangle_particles,
    "entangle-impurities": _run_entangle_impurities,
}


def run_protocol(name: str, params=None) -> ProtocolResult:
    """Run a protocol by name with a flat parameter mapping (CLI/sweep surface)."""
    key = str(name).strip().lower().replace("_", "-")
    if key not in _PROTOCOLS:
        raise ValueError(f"unknown protocol name: {name!r} (known: {', '.join(sorted(_PROTOCOLS))})")
    flat = {str(k).replace("-", "_"): v for k, v in dict(params or {}).items()}
    return _PROTOCOLS[key](flat)


def event_tree(protocol: str, params=None) -> EventTree:
    """Complete branch enumeration of one protocol invocation."""
    return run_protocol(protocol, params).tree


# ---------------------------------------------------------------------------
# Parameter sweeps

@dataclass(frozen=True)
class GridSpec:
    """One swept parameter: name, inclusive range, point count, scale."""

    name: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if not self.name:
            raise ValueError("grid parameter name must be nonempty")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"grid scale must be 'linear' or 'log', got {self.scale!r}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("grid bounds must be finite")
        if self.points < 1:
            raise ValueError("grid needs at least one point")
        if self.points > 1 and not self.start < self.stop:
            raise ValueError("grid start must be below stop for more than one point")
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise ValueError("log grids need positive bounds")

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.start], dtype=float)
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepRecord:
    """One grid point: swept parameter values and success-branch metrics."""

    params: dict
    metrics: dict


@dataclass(frozen=True)
class SweepResult:
    records: tuple[SweepRecord, ...]
    argmax: dict
    fieldnames: tuple[str, ...]


_OBJECTIVES = {"probability": "probability", "entropy": "entropy_bits"}

_METRIC_NAMES = ("probability", "entropy_bits", "concurrence")


def sweep(protocol: str, grids, fixed=None, objective: str = "entropy") -> SweepResult:
    """Evaluate a protocol over the cartesian grid, row-major in grid order.

    Metrics are taken from the protocol's designated success branch (the
    first outcome).  Null branches record entropy/concurrence as 0.0 so that
    every record holds finite values.  The argmax summary reports the first
    grid point maximizing the requested objective.
    """
    grids = list(grids)
    if not grids:
        raise ValueError("sweep needs at least one grid parameter")
    names = [g.name for g in grids]
    if len(set(names)) != len(names):
        raise ValueError("swept parameter names must be distinct")
    if objective not in _OBJECTIVES:
        raise ValueError("objective must be 'probability' or 'entropy'")
    key = _OBJECTIVES[objective]

    records = []
    for combo in itertools.product(*(g.values() for g in grids)):
        params = dict(fixed or {})
        point = {g.name: float(v) for g, v in zip(grids, combo)}
        params.update(point)
        first = run_protocol(protocol, params).outcomes[0]
        metrics = {
            "probability": first.branch_probability,
            "entropy_bits": first.entropy_bits if first.entropy_bits is not None else 0.0,
            "concurrence": first.concurrence if first.concurrence is not None else 0.0,
        }
        records.append(SweepRecord(point, metrics))

    best = max(records, key=lambda rec: rec.metrics[key])
    argmax = {"objective": objective, "value": best.metrics[key], **best.params}
    fieldnames = tuple(g.name for g in grids) + _METRIC_NAMES
    return SweepResult(tuple(records), argmax, fieldnames)
