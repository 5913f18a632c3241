"""Canonical Uhlmann transformations and their robust rigidity.

The canonical transformation of a pair ``(|C>, |D>)`` is the partial
isometry ``W = sgn(Tr_A |D><C|)`` acting on subsystem B.  It achieves the
optimal overlap ``<D|(1 (x) W)|C> = F(rho, sigma)`` (as does every unitary
completion), and any unitary within ``eps`` of that optimum satisfies

    || (1 (x) (W - R) W*W) |C> ||^2  <=  (2 kappa / eta) eps

where ``eta`` is the smallest nonzero eigenvalue of the matrix geometric
mean ``rho^-1 # sigma`` and ``kappa = ||rho^-1/2 P rho^1/2||_inf^2`` with
``P`` the projector onto ``Image(rho^1/2 sigma rho^1/2)``.

Conjugation bookkeeping for the identity frame: rotating a pair so that
its coefficient grids become ``sqrt(rho_A)`` and ``sqrt(sigma_A)`` makes
the B-side reduced matrices the entrywise *conjugates* of the A-side
ones, and it is those conjugates that enter every B-side operator formula
(``W = sgn(sqrt(sigma) sqrt(rho))`` etc.).  ``IdentityFrame`` carries the
conjugated matrices so client code can use the formulas verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import matcore, states
from .errors import (
    DimensionMismatchError,
    FrameMismatchError,
    IllConditionedError,
    NotPartialIsometryError,
    NotPsdError,
    NotUnitaryError,
    ZeroFidelityError,
)
from .matcore import dagger
from .states import BipartitePureState, DensityMatrix

__all__ = [
    "IdentityFrame",
    "RigidityReport",
    "UhlmannInstance",
    "canonical_w",
    "flip",
    "geometric_mean",
    "near_optimal_unitary",
    "obliqueness_kappa",
    "projector_structure_check",
    "random_instance",
    "rigidity_report",
    "rigidity_residual",
    "spectral_gap_eta",
    "three_form_deviation",
    "unitary_completion",
]


@dataclass(frozen=True)
class UhlmannInstance:
    """A pair of bipartite pure states with cached reduced density matrices."""

    c: BipartitePureState
    d: BipartitePureState
    rho: DensityMatrix
    sigma: DensityMatrix

    @classmethod
    def from_states(cls, c: BipartitePureState, d: BipartitePureState) -> "UhlmannInstance":
        if (c.dim_a, c.dim_b) != (d.dim_a, d.dim_b):
            raise DimensionMismatchError("C and D must live on the same product space")
        c = c if c.normalized else c.normalize()
        d = d if d.normalized else d.normalize()
        return cls(c=c, d=d, rho=states.reduce_a(c), sigma=states.reduce_a(d))

    @property
    def dim_a(self) -> int:
        return self.c.dim_a

    @property
    def dim_b(self) -> int:
        return self.c.dim_b

    def fidelity(self) -> float:
        return states.fidelity(self.rho, self.sigma)

    @cached_property
    def frame(self) -> "IdentityFrame":
        return IdentityFrame.of(self)


@dataclass(frozen=True)
class IdentityFrame:
    """Instance data rotated so both coefficient grids are PSD square roots.

    ``x_c``/``x_d`` are the B-side isometries with
    ``C.coeffs = sqrt(rho_A) @ x_c.T`` (same for D), so the original
    canonical transformation is ``x_d @ W_rot @ x_c*``.  ``rho``/``sigma``
    are the *conjugates* of the A-side reduced matrices, i.e. the reduced
    B-side matrices of the rotated pair; all B-side operator formulas use
    these.
    """

    rho: np.ndarray
    sigma: np.ndarray
    x_c: np.ndarray
    x_d: np.ndarray

    @classmethod
    def of(cls, inst: UhlmannInstance) -> "IdentityFrame":
        if inst.dim_a > inst.dim_b:
            raise FrameMismatchError("identity-frame rotation requires dim_a <= dim_b")
        x_c = states.schmidt(inst.c).frame_b
        x_d = states.schmidt(inst.d).frame_b
        frame = cls(
            rho=inst.rho.mat.conj(),
            sigma=inst.sigma.mat.conj(),
            x_c=x_c,
            x_d=x_d,
        )
        for x, red, m in ((x_c, inst.rho.mat, inst.c.coeffs), (x_d, inst.sigma.mat, inst.d.coeffs)):
            if matcore.op_norm(dagger(x) @ x - np.eye(inst.dim_a)) > 1e-8:
                raise FrameMismatchError("frame operator is not an isometry")
            if matcore.op_norm(matcore.psd_sqrt(red) @ x.T - m) > 1e-7:
                raise FrameMismatchError("frame does not reconstruct the state")
        return frame

    def rotate_b_operator(self, w: np.ndarray) -> np.ndarray:
        """Transport a B-side operator of the original pair into this frame."""
        return dagger(self.x_d) @ w @ self.x_c


def canonical_w(inst: UhlmannInstance, rank_tol: float | None = None) -> np.ndarray:
    """Canonical Uhlmann transformation ``sgn(Tr_A |D><C|)`` on subsystem B."""
    return matcore.matrix_sign(states.partial_trace_a_outer(inst.d, inst.c), rank_tol=rank_tol)


def three_form_deviation(inst: UhlmannInstance, rank_tol: float | None = None) -> float:
    """Max pairwise deviation of the equivalent expressions for W.

    Evaluated in the identity frame, where the B-side density matrices are
    the conjugated reductions: (1) the defining sign of the partial trace,
    transported into the frame; (2) ``sgn(sqrt(sigma) sqrt(rho))``;
    (3) ``(rho^1/2 sigma^1/2)^-1 rho^1/2 (rho^-1 # sigma) rho^1/2``.
    """
    fr = inst.frame
    w1 = fr.rotate_b_operator(canonical_w(inst, rank_tol=rank_tol))
    rr = matcore.psd_sqrt(fr.rho, rank_tol=rank_tol)
    sr = matcore.psd_sqrt(fr.sigma, rank_tol=rank_tol)
    w2 = matcore.matrix_sign(sr @ rr, rank_tol=rank_tol)
    mean = _mean_rho_inv_sigma(fr.rho, fr.sigma, rank_tol=rank_tol)
    w3 = matcore.pseudoinverse(rr @ sr, rank_tol=rank_tol) @ rr @ mean @ rr
    return max(
        matcore.op_norm(w1 - w2),
        matcore.op_norm(w2 - w3),
        matcore.op_norm(w1 - w3),
    )


def geometric_mean(a, b, rank_tol: float | None = None) -> np.ndarray:
    """Matrix geometric mean ``A # B`` of two Hermitian PSD matrices.

    ``A # B = A^1/2 (A^-1/2 B A^-1/2)^1/2 A^1/2`` with Moore-Penrose
    pseudoinverses.  For commuting invertible inputs this is
    ``A^1/2 B^1/2``; for invertible inputs it is the unique positive
    solution of ``X A^-1 X = B``.
    """
    a = matcore.as_matrix(a)
    b = matcore.as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shape mismatch {a.shape} vs {b.shape}")
    for m in (a, b):
        if matcore.op_norm(m - dagger(m)) > 1e-9:
            raise NotPsdError("geometric mean requires Hermitian inputs")
    ar = matcore.psd_sqrt(a, rank_tol=rank_tol)
    air = matcore.psd_pinv_sqrt(a, rank_tol=rank_tol)
    inner = matcore.psd_sqrt(air @ b @ air, tol=1e-8, rank_tol=rank_tol)
    return ar @ inner @ ar


def _mean_rho_inv_sigma(rho: np.ndarray, sigma: np.ndarray, rank_tol: float | None = None) -> np.ndarray:
    """``rho^-1 # sigma = rho^-1/2 (rho^1/2 sigma rho^1/2)^1/2 rho^-1/2``."""
    rr = matcore.psd_sqrt(rho, rank_tol=rank_tol)
    rir = matcore.psd_pinv_sqrt(rho, rank_tol=rank_tol)
    return rir @ matcore.psd_sqrt(rr @ sigma @ rr, tol=1e-8, rank_tol=rank_tol) @ rir


def spectral_gap_eta(inst: UhlmannInstance, rank_tol: float | None = None) -> float:
    """Smallest nonzero eigenvalue of ``rho^-1 # sigma``.

    The support decision reuses the rank tolerance, applied to the
    well-scaled inner factor ``rho^1/2 sigma rho^1/2`` whose rank equals
    the rank of the mean; this keeps the cut consistent with the
    pseudoinverse used to build the mean and immune to the noise the
    outer ``rho^-1/2`` products inject into the zero eigenvalues.
    """
    rho, sigma = inst.rho.mat, inst.sigma.mat
    rr = matcore.psd_sqrt(rho, rank_tol=rank_tol)
    rir = matcore.psd_pinv_sqrt(rho, rank_tol=rank_tol)
    h = rr @ sigma @ rr
    eig = matcore.hermitian_eigen((h + dagger(h)) / 2, tol=1e-8)
    top = float(eig.values[0]) if eig.values.size else 0.0
    if top <= 0.0:
        raise ZeroFidelityError("rho^1/2 sigma rho^1/2 vanishes: reduced supports are orthogonal")
    cut = (rank_tol if rank_tol is not None else matcore.default_rank_tol(h)) * top
    rank = int((eig.values > cut).sum())
    if rank == 0:
        raise ZeroFidelityError("rho^-1 # sigma has no eigenvalue above the rank threshold")
    clamped = np.where(eig.values > cut, eig.values, 0.0)
    sqrt_h = (eig.vectors * np.sqrt(clamped)) @ dagger(eig.vectors)
    mean = rir @ sqrt_h @ rir
    w = np.linalg.eigvalsh((mean + dagger(mean)) / 2)[::-1]
    return float(w[rank - 1])


def obliqueness_kappa(inst: UhlmannInstance, rank_tol: float | None = None) -> float:
    """Obliqueness ``kappa = ||rho^-1/2 P rho^1/2||_inf^2``.

    ``P`` projects onto ``Image(rho^1/2 sigma rho^1/2)``, which is always
    contained in ``Image(rho)``; if rounding makes ``P`` leak outside by
    more than 1e-6 the oblique norm is untrustworthy and
    IllConditionedError is raised instead of returning a number.
    """
    rho, sigma = inst.rho.mat, inst.sigma.mat
    rr = matcore.psd_sqrt(rho, rank_tol=rank_tol)
    core = rr @ sigma @ rr
    if matcore.op_norm(core) <= 0.0:
        raise ZeroFidelityError("rho^1/2 sigma rho^1/2 vanishes")
    p = matcore.image_projector(core, rank_tol=rank_tol)
    leak = matcore.op_norm((np.eye(inst.dim_a) - matcore.image_projector(rho, rank_tol=rank_tol)) @ p)
    if leak > 1e-6:
        raise IllConditionedError(f"projector leaks {leak:.3e} outside Image(rho)")
    return float(matcore.op_norm(matcore.psd_pinv_sqrt(rho, rank_tol=rank_tol) @ p @ rr) ** 2)


def projector_structure_check(inst: UhlmannInstance, w: np.ndarray, tol: float = 1e-8) -> bool:
    """Check ``WW* = Proj Image(sigma^1/2 rho sigma^1/2)`` and the W*W twin.

    Evaluated in the identity frame with the conjugated reduced matrices.
    """
    fr = inst.frame
    wr = fr.rotate_b_operator(w)
    rr = matcore.psd_sqrt(fr.rho)
    sr = matcore.psd_sqrt(fr.sigma)
    left = matcore.image_projector(sr @ fr.rho @ sr)
    right = matcore.image_projector(rr @ fr.sigma @ rr)
    return (
        matcore.op_norm(wr @ dagger(wr) - left) <= tol
        and matcore.op_norm(dagger(wr) @ wr - right) <= tol
    )


def unitary_completion(
    w: np.ndarray,
    rank_tol: float | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Extend a partial isometry to a unitary.

    Pairs an orthonormal basis of ``ker(W)`` with one of ``coker(W)``;
    passing ``rng`` mixes the kernel pairing by a Haar-random unitary
    (any such gauge is a valid completion).
    """
    w = matcore.as_matrix(w)
    if w.shape[0] != w.shape[1]:
        raise DimensionMismatchError("only square partial isometries can be completed")
    f = matcore.svd(w)
    s = f.singulars
    if s.size and (np.minimum(np.abs(s - 1.0), s) > 1e-8).any():
        raise NotPartialIsometryError("singular values are not all 0 or 1 within 1e-8")
    cut = 0.5  # singular values are 0/1 up to 1e-8, so any mid cut works
    kernel = f.v[:, s < cut] if s.size else f.v
    coker = f.u[:, s < cut] if s.size else f.u
    n_missing = w.shape[0] - int((s >= cut).sum())
    if kernel.shape[1] != n_missing or coker.shape[1] != n_missing:
        raise NotPartialIsometryError("kernel and cokernel dimensions disagree")
    if n_missing == 0:
        return w.copy()
    gauge = np.eye(n_missing, dtype=complex) if rng is None else _haar_unitary(n_missing, rng)
    u = w + coker @ gauge @ dagger(kernel)
    if matcore.op_norm(dagger(u) @ u - np.eye(w.shape[0])) > 1e-8:
        raise NotPartialIsometryError("completion failed the unitarity check")
    return u


def rigidity_residual(inst: UhlmannInstance, w: np.ndarray, r: np.ndarray) -> float:
    """The squared distance ``|| (1 (x) (W - R) W*W) |C> ||^2``."""
    r = matcore.as_matrix(r)
    if matcore.op_norm(dagger(r) @ r - np.eye(r.shape[0])) > 1e-8:
        raise NotUnitaryError("R must be unitary within 1e-8")
    p = dagger(w) @ w
    moved = inst.c.coeffs @ ((w - r) @ p).T
    return float(np.linalg.norm(moved) ** 2)


@dataclass(frozen=True)
class RigidityReport:
    """Rigidity parameters of an instance at a given overlap deficit."""

    fidelity: float
    eta: float
    kappa: float
    epsilon: float
    delta_bound: float
    weak_bound: float
    empirical_primal: float | None = None

    def to_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "eta": self.eta,
            "kappa": self.kappa,
            "epsilon": self.epsilon,
            "delta_bound": self.delta_bound,
            "weak_bound": self.weak_bound,
            "empirical_primal": self.empirical_primal,
        }


def rigidity_report(
    inst: UhlmannInstance,
    epsilon: float,
    rank_tol: float | None = None,
    empirical_primal: float | None = None,
) -> RigidityReport:
    """Assemble fidelity, eta, kappa, and both robustness bounds."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    f = inst.fidelity()
    eta = spectral_gap_eta(inst, rank_tol=rank_tol)
    kappa = obliqueness_kappa(inst, rank_tol=rank_tol)
    return RigidityReport(
        fidelity=f,
        eta=eta,
        kappa=kappa,
        epsilon=epsilon,
        delta_bound=2.0 * kappa * epsilon / eta,
        weak_bound=8.0 * (1.0 - f + np.sqrt(epsilon)),
        empirical_primal=empirical_primal,
    )


def flip(inst: UhlmannInstance) -> UhlmannInstance:
    """The reversed task (from D to C), whose canonical map is W*."""
    return UhlmannInstance.from_states(inst.d, inst.c)


# ---------------------------------------------------------------------------
# Generators used by tests, probes, and demos.
# ---------------------------------------------------------------------------


def _haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    phase = np.diag(r).copy()
    phase /= np.abs(phase)
    return q * phase


def random_instance(
    d: int,
    rng: np.random.Generator,
    rank_c: int | None = None,
    rank_d: int | None = None,
) -> UhlmannInstance:
    """Random pair of d x d bipartite states with prescribed Schmidt ranks."""

    def grid(rank):
        a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
        b = rng.normal(size=(rank, d)) + 1j * rng.normal(size=(rank, d))
        m = a @ b
        return m / np.linalg.norm(m)

    rank_c = rank_c if rank_c is not None else int(rng.integers(1, d + 1))
    rank_d = rank_d if rank_d is not None else int(rng.integers(1, d + 1))
    return UhlmannInstance.from_states(
        BipartitePureState(grid(rank_c)), BipartitePureState(grid(rank_d))
    )


def near_optimal_unitary(
    inst: UhlmannInstance,
    w: np.ndarray,
    epsilon: float,
    rng: np.random.Generator,
    deficit_fraction: float | None = None,
) -> tuple[np.ndarray, float]:
    """Generate a unitary with overlap ``>= F - epsilon``.

    Walks from a random unitary completion of W along ``U exp(t i H)`` for
    a random Hermitian generator H, bisecting ``t`` until the real overlap
    deficit lands near ``deficit_fraction * epsilon`` (from the feasible
    side, so the constraint always holds).  Returns the unitary and its
    real overlap.
    """
    f = inst.fidelity()
    target = epsilon * (deficit_fraction if deficit_fraction is not None else rng.uniform(0.3, 1.0))
    u0 = unitary_completion(w, rng=rng)
    h = rng.normal(size=w.shape) + 1j * rng.normal(size=w.shape)
    h = (h + dagger(h)) / 2
    h /= max(matcore.op_norm(h), 1e-30)
    eigh = matcore.hermitian_eigen(h)

    def candidate(t):
        rot = (eigh.vectors * np.exp(1j * t * eigh.values)) @ dagger(eigh.vectors)
        return u0 @ rot

    def deficit(t):
        return f - states.overlap(inst.d, candidate(t), inst.c).real

    lo, hi = 0.0, np.pi / 4
    grow = 0
    while deficit(hi) < target and grow < 6:
        lo, hi = hi, hi * 2.0
        grow += 1
    if deficit(hi) < target:
        t_final = hi  # generator barely couples; still feasible, just milder
    else:
        for _ in range(60):
            mid = (lo + hi) / 2
            if deficit(mid) < target:
                lo = mid
            else:
                hi = mid
        t_final = lo  # feasible side: deficit(lo) <= target <= epsilon
    r = candidate(t_final)
    return r, float(states.overlap(inst.d, r, inst.c).real)
