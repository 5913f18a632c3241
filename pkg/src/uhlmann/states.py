"""Bipartite pure states, partial traces, Schmidt frames, and fidelity.

Vectorization convention, fixed once for the whole package: a state on a
``dim_a x dim_b`` product space is stored as its coefficient grid
``coeffs[i, j] = amplitude of |i>_A |j>_B``.  Consequences used below:

* applying an operator ``R`` on subsystem B maps ``coeffs -> coeffs @ R.T``
* ``reduce_a = M M*`` and ``reduce_b = M.T conj(M)``
* ``Tr_A(|D><C|) = D.T conj(C)`` as an operator on B

Each of these is validated against a brute-force index-sum oracle in the
test suite, because a silent transposition is the dominant failure mode
here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import DimensionMismatchError, NotNormalizedError, NotPsdError
from .matcore import as_matrix, dagger

__all__ = [
    "BipartitePureState",
    "DensityMatrix",
    "SchmidtFrame",
    "apply_b",
    "fidelity",
    "omega",
    "overlap",
    "partial_trace_a_outer",
    "read_state",
    "reduce_a",
    "reduce_b",
    "schmidt",
    "write_state",
]

NORM_TOL = 1e-6


@dataclass(frozen=True)
class BipartitePureState:
    """Pure state on a ``dim_a x dim_b`` product space.

    ``normalized=False`` marks deliberately unnormalized vectors (the
    maximally entangled reference); states claiming to be normalized are
    rejected when their norm deviates by more than 1e-6 rather than being
    silently rescaled.
    """

    coeffs: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "coeffs", as_matrix(self.coeffs))
        if self.normalized:
            nrm = float(np.linalg.norm(self.coeffs))
            if abs(nrm - 1.0) > NORM_TOL:
                raise NotNormalizedError(f"state norm {nrm} deviates from 1 by more than {NORM_TOL}")

    @property
    def dim_a(self) -> int:
        return self.coeffs.shape[0]

    @property
    def dim_b(self) -> int:
        return self.coeffs.shape[1]

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def normalize(self) -> "BipartitePureState":
        if self.normalized:
            return self
        nrm = self.norm()
        if nrm == 0.0:
            raise NotNormalizedError("cannot normalize the zero vector")
        return BipartitePureState(self.coeffs / nrm)

    def vector(self) -> np.ndarray:
        """Flat amplitude vector, index = i * dim_b + j."""
        return self.coeffs.ravel()


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, trace-one matrix."""

    mat: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.mat)
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatchError("density matrix must be square")
        if matcore.op_norm(m - dagger(m)) > 1e-10:
            raise NotPsdError("density matrix is not Hermitian within 1e-10")
        w = np.linalg.eigvalsh((m + dagger(m)) / 2)
        if w.size and w[0] < -1e-10:
            raise NotPsdError(f"density matrix min eigenvalue {w[0]:.3e} < -1e-10")
        if abs(np.trace(m).real - 1.0) > 1e-10 or abs(np.trace(m).imag) > 1e-10:
            raise NotPsdError(f"density matrix trace {np.trace(m)} != 1 within 1e-10")
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


@dataclass(frozen=True)
class SchmidtFrame:
    """Schmidt data of a state: ``|s> = sum_i lambda_i |a_i>|b_i>``.

    ``coefficients`` descend; ``basis_a``/``basis_b`` hold the vectors as
    columns.  ``frame_b`` is the unitary (isometry when dim_a < dim_b) X
    with ``coeffs = sqrt(reduce_a) @ X.T``, i.e. the B-side frame of the
    state relative to the maximally entangled reference.
    """

    coefficients: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray
    frame_b: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.basis_a * self.coefficients) @ self.basis_b.T


def omega(d: int) -> BipartitePureState:
    """Unnormalized maximally entangled reference ``sum_i |i>|i>``.

    Stored with ``normalized=False``; operations that need a normalized
    state (reductions, overlaps) normalize on demand.  The reflection
    identity ``(A (x) 1)|Omega> = (1 (x) A.T)|Omega>`` holds exactly in
    the coefficient-grid picture: both sides have grid ``A``.
    """
    if d < 1:
        raise DimensionMismatchError("omega requires d >= 1")
    return BipartitePureState(np.eye(d, dtype=complex), normalized=False)


def apply_b(s: BipartitePureState, r: np.ndarray) -> BipartitePureState:
    """Apply the operator ``r`` on subsystem B: ``(1 (x) r)|s>``."""
    r = as_matrix(r)
    if r.shape[1] != s.dim_b:
        raise DimensionMismatchError(f"operator acts on dim {r.shape[1]}, state has dim_b {s.dim_b}")
    return BipartitePureState(s.coeffs @ r.T, normalized=False)


def apply_a(s: BipartitePureState, a: np.ndarray) -> BipartitePureState:
    """Apply the operator ``a`` on subsystem A: ``(a (x) 1)|s>``."""
    a = as_matrix(a)
    if a.shape[1] != s.dim_a:
        raise DimensionMismatchError(f"operator acts on dim {a.shape[1]}, state has dim_a {s.dim_a}")
    return BipartitePureState(a @ s.coeffs, normalized=False)


def _normalized(s: BipartitePureState) -> BipartitePureState:
    return s if s.normalized else s.normalize()


def reduce_a(s: BipartitePureState) -> DensityMatrix:
    """Reduced density matrix on subsystem A."""
    m = _normalized(s).coeffs
    g = m @ dagger(m)
    return DensityMatrix(g / np.trace(g).real)


def reduce_b(s: BipartitePureState) -> DensityMatrix:
    """Reduced density matrix on subsystem B."""
    m = _normalized(s).coeffs
    g = m.T @ m.conj()
    return DensityMatrix(g / np.trace(g).real)


def partial_trace_a_outer(d: BipartitePureState, c: BipartitePureState) -> np.ndarray:
    """The operator ``Tr_A(|D><C|)`` on subsystem B."""
    if (d.dim_a, d.dim_b) != (c.dim_a, c.dim_b):
        raise DimensionMismatchError("states live on different product spaces")
    dm = _normalized(d).coeffs
    cm = _normalized(c).coeffs
    return dm.T @ cm.conj()


def overlap(d: BipartitePureState, r: np.ndarray, c: BipartitePureState) -> complex:
    """The amplitude ``<D| (1 (x) R) |C>``."""
    r = as_matrix(r)
    if r.shape != (c.dim_b, c.dim_b):
        raise DimensionMismatchError(f"R must be {c.dim_b}x{c.dim_b}, got {r.shape}")
    if (d.dim_a, d.dim_b) != (c.dim_a, c.dim_b):
        raise DimensionMismatchError("states live on different product spaces")
    dm = _normalized(d).coeffs
    cm = _normalized(c).coeffs
    return complex(np.vdot(dm, cm @ r.T))


def fidelity(rho: DensityMatrix | np.ndarray, sigma: DensityMatrix | np.ndarray) -> float:
    """Uhlmann fidelity ``F(rho, sigma) = Tr sqrt(rho^1/2 sigma rho^1/2)``."""
    r = rho.mat if isinstance(rho, DensityMatrix) else as_matrix(rho)
    s = sigma.mat if isinstance(sigma, DensityMatrix) else as_matrix(sigma)
    if r.shape != s.shape:
        raise DimensionMismatchError(f"shape mismatch {r.shape} vs {s.shape}")
    rs = matcore.psd_sqrt(r)
    return float(np.trace(matcore.psd_sqrt(rs @ s @ rs)).real)


def schmidt(s: BipartitePureState) -> SchmidtFrame:
    """Schmidt decomposition plus the B-side frame operator.

    With ``M = U Sigma V*`` the Schmidt vectors are ``a_i = U[:, i]`` and
    ``b_i = conj(V[:, i])``, and the frame is ``X = conj(V) U.T`` extended
    isometrically on the kernel, so that ``M = sqrt(M M*) @ X.T`` exactly
    (also for rank-deficient states).
    """
    m = _normalized(s).coeffs
    if s.dim_a > s.dim_b:
        raise DimensionMismatchError("schmidt frame extraction requires dim_a <= dim_b")
    u, sing, vh = np.linalg.svd(m)  # full matrices: vh is dim_b x dim_b
    x = vh.T[:, : s.dim_a] @ u.T  # conj(V) U^T restricted to dim_a columns
    return SchmidtFrame(
        coefficients=sing,
        basis_a=u,
        basis_b=vh.T[:, : s.dim_a],
        frame_b=x,
    )


# ---------------------------------------------------------------------------
# State files: cmjson of the coefficient grid plus dims and the norm flag.
# ---------------------------------------------------------------------------


def write_state(path, s: BipartitePureState) -> None:
    matcore.write_matrix(
        path,
        s.coeffs,
        extra={"dim_a": s.dim_a, "dim_b": s.dim_b, "normalized": bool(s.normalized)},
    )


def read_state(path) -> BipartitePureState:
    with open(path, "r", encoding="ascii") as fh:
        obj = json.load(fh)
    coeffs = matcore.cmjson_to_matrix(obj)
    dim_a, dim_b = int(obj["dim_a"]), int(obj["dim_b"])
    if coeffs.shape != (dim_a, dim_b):
        raise DimensionMismatchError(
            f"state file dims ({dim_a},{dim_b}) disagree with grid shape {coeffs.shape}"
        )
    return BipartitePureState(coeffs, normalized=bool(obj["normalized"]))
