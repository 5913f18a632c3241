"""Canonical transformations between bipartite pure states.

Walks through the basic objects: a random pair of states, the optimal
B-side map W = sgn(Tr_A |D><C|), its optimality and the freedom in its
unitary completions, the three equivalent formulas for W, and the
two-qutrit example showing W is wildly discontinuous in the states.
"""

import numpy as np

from uhlmann import canonical_w, overlap, random_instance, unitary_completion
from uhlmann.adversarial import qutrit_sensitivity
from uhlmann.uhlmann import three_form_deviation

rng = np.random.default_rng(1)

print("=== a random 4x4 instance ===")
inst = random_instance(4, rng, rank_c=3, rank_d=4)
w = canonical_w(inst)
f = inst.fidelity()
print(f"fidelity F(rho, sigma)        = {f:.12f}")
print(f"overlap <D|(1 x W)|C>         = {overlap(inst.d, w, inst.c).real:.12f}")
print(f"rank of W (Schmidt-deficient) = {int(round(np.trace(w.conj().T @ w).real))}")

print()
print("every unitary completion achieves the same optimal overlap:")
for k in range(3):
    u = unitary_completion(w, rng=rng)
    print(f"  completion {k}: overlap = {abs(overlap(inst.d, u, inst.c)):.12f}")

print()
print(f"three equivalent formulas for W agree to {three_form_deviation(inst):.2e}")
print("  (defining sign of the partial trace; sgn(sqrt(sigma) sqrt(rho));")
print("   the pseudoinverse geometric-mean expression)")

print()
print("=== sensitivity: nearby states, far-apart transformations ===")
for eps in (0.1, 0.01, 0.0001):
    sens = qutrit_sensitivity(eps)
    print(
        f"eps = {eps:<8g} state distance = {sens.state_distance:.4f} "
        f"(= sqrt(2 eps)), ||W - W~|| = {sens.w_distance:.1f}"
    )
print("the perturbed transformation swaps |1> and |2> no matter how small eps is")
