"""Walk through the coherence measures of a compressive-sensing system.

A CS system pairs an M x N projection matrix with an N x L dictionary;
what the sparse solver actually sees is their product.  This script
builds a random system and prints every statistic the library reports
about it, next to the theoretical floor.
"""

import numpy as np

from csdesign import (
    coherence_report,
    equivalent_dictionary,
    gen_dictionary,
    mutual_coherence,
    random_projection,
    recoverable_sparsity,
    welch_bound,
)

m, n, l = 20, 60, 100

psi = gen_dictionary(n, l, seed=0)
phi = random_projection(m, n, rng_seed=0)
d = equivalent_dictionary(phi, psi)

print(f"system: phi {phi.shape}, psi {psi.shape}, equivalent dictionary {d.shape}")

# worst-case coherence vs the information-theoretic floor
mu = mutual_coherence(d)
floor = welch_bound(m, l)
print(f"mutual coherence        mu = {mu:.4f}")
print(f"welch bound                = {floor:.4f}  (no M x L frame can beat this)")

# the coherence bound on recoverable sparsity is conservative but exact
k_max = recoverable_sparsity(mu)
print(f"guaranteed recoverable K   = {k_max}  (worst case over all K-sparse signals)")

# one call gathers everything, including the averaged coherence above a
# threshold and the energy measures used to compare designed matrices
report = coherence_report(phi, psi, mu_bar=0.2)
print()
print(f"averaged coherence (|g| >= {report.mu_bar_threshold}): "
      f"{report.mu_av:.4f} over {report.n_av} entries")
print(f"gram distortion ||I - G||_F^2 = {report.gram_distortion:.1f}")
print(f"projection energy ||phi||_F^2 = {report.phi_energy:.1f}")

# coherence is scale-free: rescaling any column changes nothing
scaled = d.copy()
scaled[:, 7] *= 123.0
assert abs(mutual_coherence(scaled) - mu) < 1e-12
print()
print("rescaling a column leaves mutual coherence unchanged (checked)")
