"""Closed-form dual certificate for the rigidity bound, plus a primal probe.

The rigidity bound is not obtained from a numerical SDP solver.  The dual
side has an explicit feasible point: with ``A = sqrt(sigma) sqrt(rho)``,
``P = W*W`` and any real ``alpha``, the blocks

    Y1 = sqrt(T* T),   Y2 = T (sqrt(T* T))^-1 T*,   T = (alpha A* + P rho W*) / 2

are dual-feasible with objective ``2 ||T||_1 + alpha (F - eps)``.  At
``alpha = -kappa/eta`` the objective equals ``(kappa/eta) eps - Tr(P rho)``,
which by weak duality upper-bounds half the worst-case rigidity residual;
the primal side is probed empirically by a constrained unitary search.

All operator formulas live in the identity frame (conjugated reduced
matrices; see the uhlmann module docstring).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore, states, uhlmann
from .errors import ConsistencyError, FrameMismatchError
from .matcore import dagger
from .uhlmann import UhlmannInstance

__all__ = [
    "DualCertificate",
    "PrimalProbe",
    "build_certificate",
    "dual_bound",
    "primal_probe",
    "psd_core_check",
]


@dataclass(frozen=True)
class DualCertificate:
    """Feasible dual point and its objective value."""

    alpha: float
    t: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    value: float
    feasible: bool
    feasibility_margin: float

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "value": self.value,
            "feasible": self.feasible,
            "feasibility_margin": self.feasibility_margin,
        }


@dataclass(frozen=True)
class PrimalProbe:
    """Best residual found by the constrained unitary search."""

    best_residual: float
    best_overlap: float
    trials: int
    seed: int


def _frame_operators(inst: UhlmannInstance, rank_tol):
    fr = inst.frame
    rho, sigma = fr.rho, fr.sigma
    rr = matcore.psd_sqrt(rho, rank_tol=rank_tol)
    sr = matcore.psd_sqrt(sigma, rank_tol=rank_tol)
    w = matcore.matrix_sign(sr @ rr, rank_tol=rank_tol)
    p = dagger(w) @ w
    a = sr @ rr
    return rho, sigma, rr, sr, w, p, a


def build_certificate(
    inst: UhlmannInstance,
    epsilon: float,
    alpha: float,
    rank_tol: float | None = None,
) -> DualCertificate:
    """Assemble the closed-form dual certificate at the given ``alpha``.

    Feasibility is verified two ways: the generalized Schur criterion on
    the constraint block minus its right-hand side, and the direct minimum
    eigenvalue of the same difference; both must agree.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    rho, _sigma, _rr, _sr, w, p, a = _frame_operators(inst, rank_tol)
    t = 0.5 * (alpha * dagger(a) + p @ rho @ dagger(w))
    y1 = matcore.psd_sqrt(dagger(t) @ t, tol=1e-8, rank_tol=rank_tol)
    y2 = t @ matcore.pseudoinverse(y1, rank_tol=rank_tol) @ dagger(t)
    f = inst.fidelity()
    value = 2.0 * matcore.trace_norm(t) + alpha * (f - epsilon)
    # Constraint block minus right-hand side reduces to [[Y1, T*], [T, Y2]].
    block = np.block([[y1, dagger(t)], [t, y2]])
    margin = float(np.linalg.eigvalsh((block + dagger(block)) / 2).min())
    schur_ok = matcore.schur_psd_check(y1, dagger(t), y2, tol=1e-8)
    direct_ok = margin >= -1e-8
    if schur_ok != direct_ok and abs(margin) > 1e-6:
        raise ConsistencyError(
            f"certificate feasibility paths disagree (margin {margin:.3e})"
        )
    return DualCertificate(
        alpha=float(alpha),
        t=t,
        y1=y1,
        y2=y2,
        value=float(value),
        feasible=direct_ok,
        feasibility_margin=margin,
    )


def psd_core_check(inst: UhlmannInstance, rank_tol: float | None = None) -> float:
    """Minimum eigenvalue of ``(kappa/eta) A*W - P rho P``.

    The main theorem rests on this operator being PSD.  Also verifies the
    two structural facts behind it: ``A*W`` is self-adjoint and equals
    ``rho^1/2 (rho^-1 # sigma) rho^1/2``.
    """
    rho, sigma, rr, _sr, w, p, a = _frame_operators(inst, rank_tol)
    aw = dagger(a) @ w
    if matcore.op_norm(aw - dagger(aw)) > 1e-8:
        raise FrameMismatchError("A*W is not self-adjoint within 1e-8")
    mean = uhlmann._mean_rho_inv_sigma(rho, sigma, rank_tol=rank_tol)
    if matcore.op_norm(aw - rr @ mean @ rr) > 1e-8:
        raise FrameMismatchError("A*W does not match rho^1/2 (rho^-1 # sigma) rho^1/2")
    eta = uhlmann.spectral_gap_eta(inst, rank_tol=rank_tol)
    kappa = uhlmann.obliqueness_kappa(inst, rank_tol=rank_tol)
    core = (kappa / eta) * aw - p @ rho @ p
    return float(np.linalg.eigvalsh((core + dagger(core)) / 2).min())


def dual_bound(inst: UhlmannInstance, epsilon: float, rank_tol: float | None = None) -> float:
    """The rigidity bound ``2 (value + Tr(P rho)) = (2 kappa / eta) eps``."""
    eta = uhlmann.spectral_gap_eta(inst, rank_tol=rank_tol)
    kappa = uhlmann.obliqueness_kappa(inst, rank_tol=rank_tol)
    cert = build_certificate(inst, epsilon, alpha=-kappa / eta, rank_tol=rank_tol)
    rho, _sigma, _rr, _sr, _w, p, _a = _frame_operators(inst, rank_tol)
    return float(2.0 * (cert.value + np.trace(p @ rho).real))


def primal_probe(
    inst: UhlmannInstance,
    epsilon: float,
    trials: int,
    seed: int,
    extra_candidates: list[np.ndarray] | None = None,
) -> PrimalProbe:
    """Probe the primal side: maximize the residual over feasible unitaries.

    Candidates are generated by the bisection walk of
    ``near_optimal_unitary`` (independent substream per trial), plus any
    caller-supplied unitaries that satisfy the overlap constraint.  By
    weak duality every probed residual stays below the dual bound.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    w = uhlmann.canonical_w(inst)
    f = inst.fidelity()
    best_res = 0.0
    best_ov = f
    for cand in extra_candidates or []:
        ov = states.overlap(inst.d, cand, inst.c).real
        if ov < f - epsilon - 1e-9:
            continue  # infeasible candidate: not part of the probe
        res = uhlmann.rigidity_residual(inst, w, cand)
        if res > best_res:
            best_res, best_ov = res, float(ov)
    for i in range(trials):
        rng = np.random.default_rng((seed, i))
        r, ov = uhlmann.near_optimal_unitary(inst, w, epsilon, rng)
        res = uhlmann.rigidity_residual(inst, w, r)
        if res > best_res:
            best_res, best_ov = res, ov
    return PrimalProbe(best_residual=best_res, best_overlap=best_ov, trials=trials, seed=seed)
