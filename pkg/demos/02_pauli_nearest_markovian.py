#!/usr/bin/env python3
"""Pauli channel: project onto the divisible set and build a distance witness.

For rates (1, 1, -0.3) the small-time Choi state sits outside the divisible
family. Projecting onto the frozen Pauli-jump family is a tiny nonnegative
least-squares problem with a known answer: clipped rates (0.9, 0.9, 0) and
squared distance 0.12 * eps^2. The hyperplane through the projection point,

    W = c0 I + C_M* - C_N,     c0 = Tr(C_M* (C_N - C_M*)),

satisfies Tr(W C_N) = -||C_N - C_M*||^2 < 0 while staying nonnegative on the
whole divisible family. The unrestricted projection over all generators
(Hamiltonian + Kossakowski matrix) lands on the same point here.
"""

import numpy as np

from nmwitness import (
    builtin_pauli,
    choi_of_generator,
    expectation,
    nearest_mcs_fixed_basis,
    nearest_mcs_full_gksl,
    pauli_family,
    theorem3_witness,
    uniqueness_check,
    verify_witness,
)

EPS = 1e-3
RATES = (1.0, 1.0, -0.3)

cn = choi_of_generator(builtin_pauli(*RATES), t=0.0, eps=EPS)
print("target rates        :", RATES)
print("Choi eigenvalues    :", np.round(np.linalg.eigvalsh(cn.matrix), 6))

fixed = nearest_mcs_fixed_basis(cn, pauli_family(EPS))
print("\n--- projection onto the frozen Pauli-jump family ---")
print("optimal rates       :", np.round(fixed.rates, 10))
print(f"residual^2          : {fixed.residual**2:.6e}  "
      f"(closed form 0.12*eps^2 = {0.12 * EPS**2:.6e})")
print("KKT certified       :", fixed.kkt_ok, f"({fixed.iterations} active-set steps)")

full = nearest_mcs_full_gksl(cn)
print("\n--- projection onto the full generator family ---")
print(f"residual            : {full.residual:.9e}")
print(f"fixed-basis residual: {fixed.residual:.9e}")
print("Kossakowski spectrum:", np.round(np.linalg.eigvalsh(full.kossakowski), 6))
print(f"converged in {full.iterations} projected-gradient steps")

w = theorem3_witness(cn, fixed.choi_star)
print("\n--- distance witness ---")
print(f"Tr(W C_N)           : {expectation(w, cn):+.6e}  "
      f"(equals -residual^2 = {-fixed.residual**2:+.6e})")

check = verify_witness(w, dim=2, eps=EPS, n_samples=50_000, seed=7)
print(f"verification on 50000 divisible Chois: {check.violations} violations, "
      f"min expectation {check.min_expectation:+.2e}")

unique = uniqueness_check(cn, fixed.choi_star, dim=2, eps=EPS,
                          n_samples=20_000, seed=8)
print(f"variational inequality Tr[(C_N - C_M*)(C_M - C_M*)] <= 0 holds: "
      f"{unique.holds} (sampled max {unique.max_lhs:+.2e})")
