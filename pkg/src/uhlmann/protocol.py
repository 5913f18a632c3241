"""Monte-Carlo simulation of the 2-round interactive synthesis protocol.

The verifier runs ``m = ceil(8 n (kappa r / eta)^2)`` rounds.  In every
round except a uniformly random slot ``i*`` it prepares ``|C>``, ships
subsystem B to the prover, applies ``D*`` to what comes back, and counts
the all-zeros outcome; in round ``i*`` it routes the actual input through
the prover.  It accepts when the count ``j`` reaches
``m (gamma - eta / (4 kappa r))``.

Two faithful quirks, kept as stated rather than repaired: only ``m - 1``
test rounds occur although the threshold is scaled by ``m``, and the
per-round accept probability of an honest unitary prover is the Born
value ``F(rho, sigma)^2``, so ``gamma`` defaults to that measured value
(``ProtocolParams.for_instance``) instead of guessing a convention.

Per-round measurements are never approximated: the Born probability is
computed exactly from the statevector, then sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matcore, states, uhlmann
from .errors import BadParamsError, DimensionMismatchError, NotUnitaryError
from .matcore import dagger
from .states import BipartitePureState
from .uhlmann import UhlmannInstance

__all__ = [
    "ProtocolParams",
    "ProverStrategy",
    "RunOutcome",
    "SoundnessReport",
    "completeness_experiment",
    "completeness_reference_instance",
    "derangement_prover",
    "epsilon_prover",
    "honest_prover",
    "input_ensemble_state",
    "random_prover",
    "run_protocol",
    "soundness_probe",
]


@dataclass(frozen=True)
class ProtocolParams:
    """Round count and acceptance threshold for one protocol execution."""

    n: int
    r: int
    gamma: float
    eta: float
    kappa: float
    m: int
    threshold: float

    @classmethod
    def create(cls, n: int, r: int, gamma: float, eta: float, kappa: float) -> "ProtocolParams":
        if n < 1 or r < 1:
            raise BadParamsError("n and r must be positive integers")
        if eta <= 0 or kappa < 1 - 1e-9:
            raise BadParamsError("need eta > 0 and kappa >= 1")
        m = int(np.ceil(8 * n * (kappa * r / eta) ** 2))
        margin = gamma - eta / (4 * kappa * r)
        if not 0.0 < margin < 1.0:
            raise BadParamsError(
                f"gamma - eta/(4 kappa r) = {margin} must lie in (0, 1); "
                "raise gamma or r"
            )
        threshold = m * margin
        if threshold >= m:
            raise BadParamsError("threshold must stay below m")
        return cls(n=n, r=r, gamma=gamma, eta=eta, kappa=kappa, m=m, threshold=threshold)

    @classmethod
    def for_instance(
        cls, inst: UhlmannInstance, n: int, r: int, gamma: float | None = None
    ) -> "ProtocolParams":
        """Parameters with gamma defaulting to the honest accept probability."""
        if inst.dim_b != 2**n:
            raise DimensionMismatchError(f"instance dim_b {inst.dim_b} != 2^n = {2**n}")
        eta = uhlmann.spectral_gap_eta(inst)
        kappa = uhlmann.obliqueness_kappa(inst)
        if gamma is None:
            gamma = accept_probability(inst, honest_prover(inst))
        return cls.create(n=n, r=r, gamma=gamma, eta=eta, kappa=kappa)


@dataclass(frozen=True)
class ProverStrategy:
    """A prover acting by a fixed unitary on B' (optionally with ancilla).

    ``channel`` has dimension ``dim_b * ancilla_dim``; the ancilla starts
    in |0> and is traced out of whatever the prover returns.
    """

    label: str
    channel: np.ndarray
    ancilla_dim: int = 1

    def __post_init__(self):
        ch = matcore.as_matrix(self.channel)
        n = ch.shape[0]
        if ch.shape[1] != n or self.ancilla_dim < 1 or n % self.ancilla_dim:
            raise DimensionMismatchError("channel must be square with dim divisible by ancilla_dim")
        if matcore.op_norm(dagger(ch) @ ch - np.eye(n)) > 1e-9:
            raise NotUnitaryError(f"prover channel '{self.label}' is not unitary within 1e-9")
        object.__setattr__(self, "channel", ch)

    @property
    def dim_b(self) -> int:
        return self.channel.shape[0] // self.ancilla_dim


@dataclass(frozen=True)
class RunOutcome:
    accepted: bool
    j: int
    i_star: int
    output_state_fidelity: float


def honest_prover(inst: UhlmannInstance) -> ProverStrategy:
    """Deterministic unitary completion of the canonical transformation."""
    return ProverStrategy("honest", uhlmann.unitary_completion(uhlmann.canonical_w(inst)))


def random_prover(d: int, seed: int) -> ProverStrategy:
    return ProverStrategy("random", uhlmann._haar_unitary(d, np.random.default_rng(seed)))


def derangement_prover(adversary_r: np.ndarray) -> ProverStrategy:
    return ProverStrategy("derangement", adversary_r)


def epsilon_prover(inst: UhlmannInstance, epsilon: float, seed: int) -> ProverStrategy:
    """Near-optimal adversary at overlap deficit close to ``epsilon``."""
    w = uhlmann.canonical_w(inst)
    r, _ = uhlmann.near_optimal_unitary(
        inst, w, epsilon, np.random.default_rng(seed), deficit_fraction=1.0
    )
    return ProverStrategy(f"epsilon:{epsilon:g}", r)


def _with_ancilla(vec_b: np.ndarray, k: int) -> np.ndarray:
    """Tensor a B-vector with the |0> ancilla (B slow, ancilla fast)."""
    out = np.zeros(vec_b.shape[0] * k, dtype=complex)
    out[::k] = vec_b
    return out


def accept_probability(inst: UhlmannInstance, prover: ProverStrategy) -> float:
    """Exact Born probability of the all-zeros outcome in a test round."""
    if prover.dim_b != inst.dim_b:
        raise DimensionMismatchError("prover acts on the wrong dimension")
    k = prover.ancilla_dim
    r = prover.channel
    if k == 1:
        amp = states.overlap(inst.d, r, inst.c)
        return float(abs(amp) ** 2)
    # grid of |C>|0_anc> over A x (B x anc), prover applied on (B x anc)
    mc = inst.c.coeffs
    grid = np.zeros((inst.dim_a, inst.dim_b * k), dtype=complex)
    grid[:, ::k] = mc
    moved = grid @ r.T
    # contract <D| on the A,B legs, leaving an ancilla amplitude vector
    moved = moved.reshape(inst.dim_a, inst.dim_b, k)
    anc_amp = np.einsum("ab,abe->e", inst.d.coeffs.conj(), moved)
    return float(np.linalg.norm(anc_amp) ** 2)


def prover_output_density(prover: ProverStrategy, input_state: np.ndarray) -> np.ndarray:
    """Density matrix the prover returns on the i*-slot input (ancilla traced)."""
    xi = np.asarray(input_state, dtype=complex)
    if xi.ndim != 1 or xi.shape[0] != prover.dim_b:
        raise DimensionMismatchError("input state has the wrong dimension")
    k = prover.ancilla_dim
    out = prover.channel @ _with_ancilla(xi, k)
    grid = out.reshape(prover.dim_b, k)
    return grid @ dagger(grid)


def canonical_output_density(inst: UhlmannInstance, input_state: np.ndarray) -> np.ndarray:
    """Target output: the honest completion applied to the input."""
    u = uhlmann.unitary_completion(uhlmann.canonical_w(inst))
    out = u @ np.asarray(input_state, dtype=complex)
    return np.outer(out, out.conj())


def run_protocol(
    inst: UhlmannInstance,
    params: ProtocolParams,
    prover: ProverStrategy,
    input_state: np.ndarray,
    seed,
    accept_prob: float | None = None,
) -> RunOutcome:
    """Simulate one full protocol execution.

    RNG discipline (fixed, so identical inputs and seed reproduce the
    outcome bit for bit): one draw for ``i*``, then ``m - 1`` uniform
    draws compared against the exact per-round Born probability.
    ``accept_prob`` may carry the precomputed Born value; it is a pure
    cache and never changes the result.
    """
    p = accept_probability(inst, prover) if accept_prob is None else accept_prob
    rng = np.random.default_rng(seed)
    i_star = int(rng.integers(1, params.m + 1))
    j = int((rng.random(params.m - 1) < p).sum())
    accepted = bool(j >= params.threshold)
    out = prover_output_density(prover, input_state)
    target = canonical_output_density(inst, input_state)
    fid = states.fidelity(_as_density(out), _as_density(target))
    return RunOutcome(accepted=accepted, j=j, i_star=i_star, output_state_fidelity=fid)


def _as_density(m: np.ndarray):
    # prover outputs are exactly normalized; guard against 1e-16 dust only
    m = (m + dagger(m)) / 2
    return states.DensityMatrix(m / np.trace(m).real)


def completeness_experiment(
    inst: UhlmannInstance,
    params: ProtocolParams,
    trials: int,
    seed: int,
) -> float:
    """Empirical acceptance frequency of the honest prover."""
    prover = honest_prover(inst)
    p = accept_probability(inst, prover)
    xi = input_ensemble_state(inst, np.random.default_rng((seed, 0xC0)))
    accepted = 0
    for t in range(trials):
        out = run_protocol(inst, params, prover, xi, seed=(seed, t), accept_prob=p)
        accepted += out.accepted
    return accepted / trials


@dataclass(frozen=True)
class SoundnessReport:
    """Acceptance frequency and output deviation per probed prover."""

    r: int
    rows: list = field(default_factory=list)

    @property
    def max_distance_accepted(self) -> float:
        dists = [row["trace_distance"] for row in self.rows if row["acceptance"] >= 0.5]
        return max(dists) if dists else 0.0


def soundness_probe(
    inst: UhlmannInstance,
    params: ProtocolParams,
    prover_family: list[ProverStrategy],
    trials: int,
    seed: int,
) -> SoundnessReport:
    """Check accepted provers against the 1/r output-deviation promise.

    The deviation is the trace distance between the prover's action and
    the canonical map's on the B half of ``|C><C|``, correlations with A
    included, after projecting the input's B side onto the domain of W.
    The projection carries the same disclaimer as the rigidity statement:
    off the domain of W every completion is equally optimal, so behavior
    there is a gauge choice, not a soundness violation.
    """
    if not prover_family:
        raise BadParamsError("prover_family must be nonempty")
    w = uhlmann.canonical_w(inst)
    target = domain_output_density(inst, ProverStrategy("canonical", uhlmann.unitary_completion(w)), w)
    rows = []
    for pi, prover in enumerate(prover_family):
        p = accept_probability(inst, prover)
        xi = input_ensemble_state(inst, np.random.default_rng((seed, pi, 0xC0)))
        accepted = 0
        for t in range(trials):
            out = run_protocol(inst, params, prover, xi, seed=(seed, pi, t), accept_prob=p)
            accepted += out.accepted
        td = 0.5 * matcore.trace_norm(domain_output_density(inst, prover, w) - target)
        rows.append(
            {
                "label": prover.label,
                "acceptance": accepted / trials,
                "accept_probability": p,
                "trace_distance": td,
                "meets_bound": td <= 1.0 / params.r + 1e-9,
            }
        )
    return SoundnessReport(r=params.r, rows=rows)


def domain_output_density(
    inst: UhlmannInstance, prover: ProverStrategy, w: np.ndarray
) -> np.ndarray:
    """Joint AB state after the prover acts on the W-domain part of ``|C>``.

    The B side of ``|C>`` is projected onto ``Dom(W) = Image(W* W)``
    before routing through the prover; the ancilla (initialized to |0>)
    is traced out and the result renormalized by the domain weight
    ``<C|(1 x W* W)|C>``, which is the same for every prover.
    """
    if prover.dim_b != inst.dim_b:
        raise DimensionMismatchError("prover acts on the wrong dimension")
    proj = dagger(w) @ w
    mc = inst.c.coeffs @ proj.T
    weight = float(np.linalg.norm(mc) ** 2)
    if weight <= 0.0:
        raise BadParamsError("|C> has no weight on the domain of W")
    k = prover.ancilla_dim
    if k == 1:
        vec = (mc @ prover.channel.T).ravel()
        return np.outer(vec, vec.conj()) / weight
    grid = np.zeros((inst.dim_a, inst.dim_b * k), dtype=complex)
    grid[:, ::k] = mc
    moved = (grid @ prover.channel.T).reshape(inst.dim_a * inst.dim_b, k)
    return moved @ dagger(moved) / weight


def input_ensemble_state(inst: UhlmannInstance, rng: np.random.Generator) -> np.ndarray:
    """Draw a pure input from the eigen-ensemble of ``reduce_b(C)``."""
    w, v = np.linalg.eigh(states.reduce_b(inst.c).mat)
    w = np.clip(w.real, 0, None)
    w /= w.sum()
    idx = int(rng.choice(w.shape[0], p=w))
    return v[:, idx].copy()


def completeness_reference_instance(n: int) -> UhlmannInstance:
    """Commuting diagonal pair on ``2^n`` dims with kappa = 1.

    ``rho`` is maximally mixed; ``sigma`` moves the weight of the last
    basis state onto the first.  For n >= 2 the mean ``rho^-1 # sigma``
    then has eigenvalues ``{sqrt(2), 1, ..., 1}`` on its support, so the
    gap is exactly 1 while the fidelity stays below 1.
    """
    d = 2**n
    sigma_diag = np.array([2.0 / d] + [1.0 / d] * (d - 2) + [0.0])
    mc = np.eye(d, dtype=complex) / np.sqrt(d)
    md = np.diag(np.sqrt(sigma_diag)).astype(complex)
    return UhlmannInstance.from_states(BipartitePureState(mc), BipartitePureState(md))
