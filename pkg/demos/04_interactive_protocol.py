"""The 2-round interactive synthesis protocol, simulated exactly.

A verifier who can prepare |C> and measure against |D> runs m test
rounds and routes the real input through the prover in one random slot.
Rigidity is what makes this sound: any prover accepted with frequency
>= 1/2 must implement something 1/r-close to the canonical map on the
input.  Born probabilities are computed exactly from statevectors and
then sampled, so the only randomness is the verifier's coin.
"""

from uhlmann.adversarial import build_eta_family
from uhlmann.protocol import (
    ProtocolParams,
    accept_probability,
    completeness_experiment,
    completeness_reference_instance,
    derangement_prover,
    epsilon_prover,
    honest_prover,
    random_prover,
    soundness_probe,
)
from uhlmann.uhlmann import obliqueness_kappa, spectral_gap_eta

print("=== completeness at n = 2, r = 2 ===")
inst = completeness_reference_instance(2)
params = ProtocolParams.for_instance(inst, n=2, r=2)
print(f"instance: F = {inst.fidelity():.6f}, eta = {spectral_gap_eta(inst):.3f}, "
      f"kappa = {obliqueness_kappa(inst):.3f}")
print(f"rounds m = {params.m}, per-round accept probability gamma = {params.gamma:.6f}")
print(f"acceptance threshold j >= {params.threshold:.2f} (of {params.m - 1} test rounds)")
rate = completeness_experiment(inst, params, trials=1000, seed=11)
print(f"honest prover accepted in {rate:.1%} of 1000 runs "
      f"(target: at least {1 - 2.0**-2:.0%} minus sampling error)")

print()
print("=== per-round Born probabilities ===")
fam = build_eta_family(4, eta=0.4, tau=0.5)
finst = fam.instance
fparams = ProtocolParams.for_instance(finst, n=2, r=2)
for prover in (honest_prover(finst), derangement_prover(fam.adversary_r),
               random_prover(4, seed=5)):
    print(f"  {prover.label:<12} p = {accept_probability(finst, prover):.6f}")
print(f"(honest p = F^2 = {finst.fidelity()**2:.6f}; the derangement pays "
      f"its overlap deficit {fam.epsilon:.4f} squared)")

print()
print("=== soundness probe ===")
provers = [
    honest_prover(inst),
    epsilon_prover(inst, 0.005, seed=21),
    epsilon_prover(inst, 0.05, seed=22),
    random_prover(inst.dim_b, seed=23),
]
reportx = soundness_probe(inst, params, provers, trials=400, seed=31)
print(f"{'prover':<14} {'accepted':>9} {'output trace distance':>22} {'<= 1/r ?':>9}")
for row in reportx.rows:
    print(
        f"{row['label']:<14} {row['acceptance']:>9.1%} {row['trace_distance']:>22.6f}"
        f" {str(row['meets_bound']):>9}"
    )
print(f"max deviation among provers accepted >= 50%: {reportx.max_distance_accepted:.6f} "
      f"(promise: 1/r = {1 / params.r})")
