"""Why the rigidity bound depends on the spectral gap and the obliqueness.

The diagonal family with gap eta admits a derangement adversary whose
residual hits the bound 2 kappa eps / eta exactly, so no dimension-free
bound can do better; reversing the task direction restores robustness.
The pure-target family drives kappa up to ~100 and certifies the
kappa eps^2 lower bound; the gap-rounding construction repairs a bad eta
at the cost of an O(eta^2) state perturbation.
"""

import numpy as np

from uhlmann.adversarial import (
    build_boosted_kappa,
    build_eta_family,
    build_kappa_family,
    eta_family_reverse_probe,
    round_spectral_gap,
)
from uhlmann.states import DensityMatrix
from uhlmann.uhlmann import random_instance, spectral_gap_eta

print("=== spectral-gap family: the bound is tight ===")
print(f"{'d':>3} {'eta':>5} {'tau_eff':>8} {'epsilon':>10} {'residual':>10} {'bound':>10} {'reverse':>10}")
for d, eta, tau in [(4, 0.4, 0.5), (8, 0.2, 0.5), (8, 0.4, 0.25), (16, 0.1, 0.5)]:
    fam = build_eta_family(d, eta, tau)
    rev = eta_family_reverse_probe(fam, count=4, seed=3)
    print(
        f"{d:>3} {eta:>5.2f} {fam.tau_effective:>8.3f} {fam.epsilon:>10.5f}"
        f" {fam.residual:>10.5f} {fam.bound:>10.5f} {rev:>10.2e}"
    )
print("residual = bound exactly (a derangement on the light subspace);")
print("the reversed task (D -> C) stays below 2 sqrt(2) eps regardless of eta")

print()
print("=== obliqueness family: residual >= kappa eps^2 ===")
print(f"{'kappa':>8} {'F':>8} {'epsilon':>9} {'residual':>10} {'kap*eps^2':>10}")
for lam, weight in [(0.05, 0.5), (0.01, 0.05), (1e-3, 0.03), (1e-5, 0.01)]:
    d = 3
    diag = np.full(d, lam)
    diag[0] = 1 - (d - 1) * lam
    rho = DensityMatrix(np.diag(diag).astype(complex))
    vec = np.zeros(d, dtype=complex)
    vec[0], vec[1] = np.sqrt(weight), np.sqrt(1 - weight)
    kap = (vec.conj() @ rho.mat @ rho.mat @ vec).real / (vec.conj() @ rho.mat @ vec).real ** 2
    fam = build_kappa_family(d, rho, vec, 0.8 * kap**-0.5)
    print(
        f"{fam.kappa:>8.2f} {fam.fidelity:>8.4f} {fam.epsilon:>9.5f}"
        f" {fam.residual:>10.5f} {fam.kappa * fam.epsilon**2:>10.5f}"
    )

print()
print("=== boosting the fidelity while keeping kappa ===")
rho = DensityMatrix(np.diag([1 - 2e-5, 1e-5, 1e-5]).astype(complex))
vec = np.array([np.sqrt(0.01), np.sqrt(0.99), 0], dtype=complex)
base = build_kappa_family(3, rho, vec, 0.05)
boosted = build_boosted_kappa(base)
print(f"base:    F = {base.fidelity:.4f}  kappa = {base.kappa:.1f}")
print(f"boosted: F = {boosted.fidelity:.4f}  kappa = {boosted.kappa:.1f}  eta = {boosted.eta:.3f}")
print("(mixing in an orthogonal direction lifts F to (1+F)/2 and eta to 1;")
print(" kappa carries over, and can approach but never exceed 1/F_base^2)")

print()
print("=== rounding the spectral gap ===")
rng = np.random.default_rng(4)
inst = random_instance(5, rng, rank_c=5, rank_d=5)
print(f"original gap = {spectral_gap_eta(inst):.4f}")
for target in (0.2, 0.4, 0.6):
    rounded = round_spectral_gap(inst, eta_target=target)
    print(
        f"target {target:.1f}: rounded gap = {rounded.gap:.4f}, "
        f"|<C~|C>|^2 = {rounded.overlap_c:.6f}, |<D~|D>|^2 = {rounded.overlap_d:.6f} "
        f"(>= {1 - target**2:.3f})"
    )
