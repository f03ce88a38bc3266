"""Numerical probes of the convex geometry of divisible small-time Choi states.

Convexity is literally assertable (mixtures of divisible first-order Chois
stay positive semidefinite); compactness is probed only through the
boundedness surrogate |  ||C||_2 - 1 | <= 10 eps ||L||_2 (closedness is not
numerically testable and is not claimed by any probe); the non-polytope
evidence is a census of arbitrarily many distinct purity-one extreme points
from Haar-random unitary channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .choi import ChoiMatrix, classify, max_entangled_state
from .channels import haar_unitaries
from .witness import (
    expectation,
    nearest_mcs_full_gksl,
    sample_markovian_chois,
    theorem3_witness,
)


@dataclass(frozen=True)
class ProbeReport:
    """Outcome of one randomized geometry probe.

    details holds one (trial index, value) record per trial; trial draws are
    derived in index order from the probe seed, so a record pins down its
    trial's randomness.
    """

    probe_name: str
    n_trials: int
    failures: int
    worst_value: float
    details: tuple[tuple[int, float], ...]
    summary: dict | None = None


def _detail_tuple(values: np.ndarray) -> tuple[tuple[int, float], ...]:
    return tuple((int(i), float(v)) for i, v in enumerate(values))


def convexity_probe(dim: int, eps: float, n_trials: int, seed: int) -> ProbeReport:
    """Mixtures of two random divisible first-order Chois stay PSD.

    Per trial two divisible Chois and a uniform weight p are drawn; the trial
    fails when the mixture's smallest eigenvalue drops below -1e-12.
    """
    if eps <= 0:
        raise ValueError(f"convexity_probe: eps must be > 0, got {eps}")
    if n_trials < 1:
        raise ValueError(f"convexity_probe: n_trials must be >= 1, got {n_trials}")
    chois = sample_markovian_chois(dim, eps, 2 * n_trials, seed,
                                   include_hamiltonian=False)
    first, second = chois[:n_trials], chois[n_trials:]
    p = np.random.default_rng((seed, 1)).uniform(size=n_trials)
    mixed = p[:, None, None] * first + (1.0 - p)[:, None, None] * second
    min_eigs = np.linalg.eigvalsh(mixed)[:, 0]
    failures = int(np.count_nonzero(min_eigs < -1e-12))
    return ProbeReport(
        probe_name="convexity",
        n_trials=n_trials,
        failures=failures,
        worst_value=float(min_eigs.min()),
        details=_detail_tuple(min_eigs),
    )


def hs_norm_probe(dim: int, eps: float, n_trials: int, seed: int) -> ProbeReport:
    """HS norms of small-time Chois concentrate at 1.

    Samples divisible and (by sign-flipping rates) non-divisible first-order
    Chois; a trial fails when | ||C||_2 - 1 | exceeds 10 * eps * ||L||_2 with
    ||L||_2 the HS norm of that trial's generator superoperator.
    """
    if eps <= 0:
        raise ValueError(f"hs_norm_probe: eps must be > 0, got {eps}")
    if n_trials < 1:
        raise ValueError(f"hs_norm_probe: n_trials must be >= 1, got {n_trials}")
    rng = np.random.default_rng(seed)
    d = dim
    phi = max_entangled_state(d)
    eye = np.eye(d * d, dtype=complex)
    counts = rng.integers(1, d * d + 1, size=n_trials)
    total = int(counts.sum())
    us = haar_unitaries(d, total, rng)
    rates = rng.uniform(0.0, 1.0, size=total)
    rates *= np.where(rng.random(total) < 0.5, 1.0, -1.0)
    uvec = us.transpose(0, 2, 1).reshape(total, d * d) / np.sqrt(d)
    pure = np.einsum("ni,nj->nij", uvec, uvec.conj())
    sup = np.einsum("nij,nkl->nikjl", us.conj(), us).reshape(total, d * d, d * d)
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    gen_super = np.add.reduceat(rates[:, None, None] * (sup - eye), offsets, axis=0)
    chois = phi + eps * np.add.reduceat(
        rates[:, None, None] * (pure - phi), offsets, axis=0)
    deviations = np.abs(np.linalg.norm(chois, axis=(1, 2)) - 1.0)
    bounds = 10.0 * eps * np.linalg.norm(gen_super, axis=(1, 2))
    failures = int(np.count_nonzero(deviations > bounds))
    return ProbeReport(
        probe_name="hsnorm",
        n_trials=n_trials,
        failures=failures,
        worst_value=float(deviations.max()),
        details=_detail_tuple(deviations),
        summary={"max_bound": float(bounds.max()), "min_bound": float(bounds.min())},
    )


def separation_demo(cn: ChoiMatrix, dim: int, eps: float, n_samples: int,
                    seed: int) -> ProbeReport:
    """Separate a non-Markovian Choi state from sampled divisible ones.

    Projects cn onto the full divisible family, builds the distance witness
    and evaluates it on n_samples divisible Chois. A sample counts as a
    failure below -1e-8; a nonnegative expectation on cn itself is a failure
    as well. cn must classify as non-Markovian.
    """
    verdict = classify(cn)
    if verdict.is_markovian:
        raise ValueError(
            f"separation_demo: Choi state classifies as Markovian "
            f"(min eigenvalue {verdict.min_eigenvalue:.3e}); nothing to separate")
    nearest = nearest_mcs_full_gksl(cn, dim, eps)
    w = theorem3_witness(cn, nearest.choi_star)
    chois = sample_markovian_chois(dim, eps, n_samples, seed)
    values = np.einsum("ij,nji->n", w.matrix, chois).real
    failures = int(np.count_nonzero(values < -1e-8))
    on_target = expectation(w, cn)
    if on_target >= 0.0:
        failures += 1
    return ProbeReport(
        probe_name="separation",
        n_trials=n_samples,
        failures=failures,
        worst_value=float(values.min()),
        details=_detail_tuple(values),
        summary={
            "expectation_on_target": float(on_target),
            "residual": float(nearest.residual),
            "solver_converged": bool(nearest.kkt_ok),
            "solver_iterations": int(nearest.iterations),
        },
    )


def extreme_point_probe(dim: int, eps: float, n_unitaries: int,
                        seed: int) -> ProbeReport:
    """Census of pure extreme points from Haar-random unitary channels.

    Every unitary-channel Choi must have purity 1 within 1e-10 and all pairs
    must stay HS-separated by more than 1e-8; each purity deviation and each
    coincident pair counts as a failure. worst_value is the smallest pairwise
    distance. A growing census of distinct purity-one members is the
    assertable surrogate for the set not being a polytope.
    """
    if n_unitaries < 2:
        raise ValueError(
            f"extreme_point_probe: n_unitaries must be >= 2, got {n_unitaries}")
    rng = np.random.default_rng(seed)
    d = dim
    us = haar_unitaries(d, n_unitaries, rng)
    uvec = us.transpose(0, 2, 1).reshape(n_unitaries, d * d) / np.sqrt(d)
    chois = np.einsum("ni,nj->nij", uvec, uvec.conj())
    purities = np.einsum("nij,nji->n", chois, chois).real
    overlaps = np.abs(uvec @ uvec.conj().T) ** 2
    dist_sq = np.clip(2.0 - 2.0 * overlaps, 0.0, None)
    np.fill_diagonal(dist_sq, np.inf)
    distances = np.sqrt(dist_sq)
    min_distance = float(distances.min())
    purity_failures = int(np.count_nonzero(np.abs(purities - 1.0) > 1e-10))
    coincidences = int(np.count_nonzero(distances < 1e-8) // 2)
    return ProbeReport(
        probe_name="extreme",
        n_trials=n_unitaries,
        failures=purity_failures + coincidences,
        worst_value=min_distance,
        details=_detail_tuple(purities),
        summary={"min_pairwise_distance": min_distance},
    )
