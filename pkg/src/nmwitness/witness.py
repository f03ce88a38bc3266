"""Linear non-Markovianity witnesses and nearest-divisible-state projections.

Two witness routes for a non-Markovian Choi state C_N:

* spectral: the orthogonal projectors onto negative eigenspaces of C_N, whose
  expectation on C_N is the (negative) eigenvalue itself;
* distance-based: W = c0 I + C_M* - C_N with c0 = Tr(C_M* (C_N - C_M*)),
  where C_M* is the Hilbert-Schmidt projection of C_N onto a convex family
  of divisible small-time Choi states. Then Tr(W C_S) =
  -Tr[(C_S - C_M*)(C_N - C_M*)] for every trace-one C_S, so
  Tr(W C_N) = -||C_N - C_M*||^2 < 0 while the projection's variational
  inequality keeps Tr(W C_M) >= 0 on the whole family.

Two families are supported: a frozen set of jump operators with nonnegative
rates (a nonnegative least-squares problem, solved by a Lawson-Hanson style
active set on the Gram system), and the full generator family parametrized
by a Hamiltonian vector plus a positive semidefinite Kossakowski matrix
(solved by projected gradient descent).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .channels import haar_unitaries
from .choi import ChoiMatrix, default_classification_tol, max_entangled_ket, max_entangled_state, _superop_to_choi
from .linalg import DEGENERACY_GAP, ShapeError, as_matrix, dagger, hs_inner, hs_norm


@dataclass(frozen=True)
class WitnessOperator:
    """Hermitian witness with a record of how it was built."""

    matrix: np.ndarray
    kind: str  # 'spectral_projector' or 'theorem3'
    provenance: str

    def __post_init__(self):
        m = as_matrix(self.matrix, "WitnessOperator.matrix")
        linalg.require_hermitian(m, 1e-10, "WitnessOperator.matrix")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class MarkovianFamily:
    """A convex family of divisible small-time Choi states at fixed (t, eps)."""

    mode: str  # 'fixed_basis' or 'full_gksl'
    dim: int
    basis_ops: tuple[np.ndarray, ...]
    eps: float
    t: float = 0.0

    def __post_init__(self):
        if self.mode not in ("fixed_basis", "full_gksl"):
            raise ValueError(f"MarkovianFamily: unknown mode {self.mode!r}")
        ops = tuple(as_matrix(op, f"basis_ops[{i}]")
                    for i, op in enumerate(self.basis_ops))
        d = self.dim
        if len(ops) > d * d:
            raise ValueError(
                f"MarkovianFamily: at most dim^2={d*d} basis operators, got {len(ops)}")
        for i, op in enumerate(ops):
            if op.shape != (d, d):
                raise ShapeError(f"basis_ops[{i}]: expected {d}x{d}, got {op.shape}")
        if self.eps <= 0:
            raise ValueError(f"MarkovianFamily: eps must be > 0, got {self.eps}")
        object.__setattr__(self, "basis_ops", ops)


def fixed_basis_family(basis_ops, eps: float, t: float = 0.0) -> MarkovianFamily:
    """Family of Choi states reachable with the given frozen jump operators."""
    ops = tuple(as_matrix(op) for op in basis_ops)
    dim = ops[0].shape[0]
    return MarkovianFamily(mode="fixed_basis", dim=dim, basis_ops=ops, eps=eps, t=t)


def pauli_family(eps: float, t: float = 0.0) -> MarkovianFamily:
    """The qubit family frozen to the sigma_x, sigma_y, sigma_z jumps."""
    return fixed_basis_family(linalg.PAULIS, eps, t)


@dataclass(frozen=True)
class NearestMCSResult:
    """Projection of a Choi state onto a divisible family."""

    choi_star: ChoiMatrix
    residual: float
    kkt_ok: bool
    iterations: int
    rates: np.ndarray | None = None
    kossakowski: np.ndarray | None = None
    hamiltonian: np.ndarray | None = None
    degenerate: bool = False


@dataclass(frozen=True)
class VerificationResult:
    min_expectation: float
    violations: int


@dataclass(frozen=True)
class UniquenessResult:
    max_lhs: float
    holds: bool


# ---------------------------------------------------------------------------
# Witness construction
# ---------------------------------------------------------------------------

def spectral_witnesses(c: ChoiMatrix, tol: float | None = None) -> list[WitnessOperator]:
    """Projectors onto eigenspaces with eigenvalue below -tol.

    Eigenvalues closer than the degeneracy gap are merged into one cluster
    and a single projector onto the whole cluster is emitted. Returns an
    empty list when the spectrum is nonnegative within tol.
    """
    if tol is None:
        tol = default_classification_tol(c.eps)
    eig = linalg.hermitian_eig(c.matrix)
    w, v = eig.eigenvalues, eig.eigenvectors
    negative = np.flatnonzero(w < -tol)
    witnesses: list[WitnessOperator] = []
    cluster: list[int] = []
    for pos, idx in enumerate(negative):
        if cluster and w[idx] - w[cluster[-1]] > DEGENERACY_GAP:
            witnesses.append(_cluster_projector(c, w, v, cluster))
            cluster = []
        cluster.append(int(idx))
    if cluster:
        witnesses.append(_cluster_projector(c, w, v, cluster))
    return witnesses


def _cluster_projector(c: ChoiMatrix, w, v, cluster: list[int]) -> WitnessOperator:
    vectors = v[:, cluster]
    proj = vectors @ dagger(vectors)
    proj = 0.5 * (proj + dagger(proj))
    values = ", ".join(f"{w[i]:.6e}" for i in cluster)
    return WitnessOperator(
        matrix=proj,
        kind="spectral_projector",
        provenance=(f"projector onto eigenvalue cluster [{values}] of Choi state "
                    f"at t={c.t}, eps={c.eps}"),
    )


def expectation(w: WitnessOperator, c: ChoiMatrix) -> float:
    """Tr(W C); the imaginary part must vanish and is checked."""
    value = hs_inner(w.matrix, c.matrix)
    if abs(value.imag) >= 1e-10:
        raise ValueError(f"expectation: non-real value {value!r}")
    return float(value.real)


def theorem3_witness(cn: ChoiMatrix, cm_star: ChoiMatrix) -> WitnessOperator:
    """W = c0 I + C_M* - C_N with c0 = Tr(C_M* (C_N - C_M*)).

    Satisfies Tr(W C_N) = -||C_N - C_M*||^2 for any trace-one C_N.
    """
    if cn.matrix.shape != cm_star.matrix.shape:
        raise ShapeError(
            f"theorem3_witness: shapes differ, {cn.matrix.shape} vs {cm_star.matrix.shape}")
    diff = cn.matrix - cm_star.matrix
    c0 = hs_inner(cm_star.matrix, diff).real
    w = c0 * np.eye(cn.matrix.shape[0], dtype=complex) + cm_star.matrix - cn.matrix
    return WitnessOperator(
        matrix=w,
        kind="theorem3",
        provenance=(f"c0*I + nearest divisible Choi - target Choi; c0={c0:.6e}, "
                    f"t={cn.t}, eps={cn.eps}"),
    )


# ---------------------------------------------------------------------------
# Fixed-basis projection (nonnegative least squares on the Gram system)
# ---------------------------------------------------------------------------

def dissipator_choi_direction(op: np.ndarray, dim: int) -> np.ndarray:
    """Choi-space direction of the unit-rate dissipator of one jump operator."""
    eye = np.eye(dim, dtype=complex)
    ldl = dagger(op) @ op
    s = (np.kron(op.conj(), op)
         - 0.5 * np.kron(eye, ldl)
         - 0.5 * np.kron(ldl.T, eye))
    return _superop_to_choi(s, dim)


def nnls_gram(q: np.ndarray, b: np.ndarray,
              max_iter: int | None = None) -> tuple[np.ndarray, int]:
    """Lawson-Hanson active set for min 1/2 x^T Q x - b^T x with x >= 0.

    Q is the (PSD) Gram matrix of the least-squares design; b the projected
    right-hand side. Sizes here are tiny, so the passive-set systems are
    solved densely; a singular passive block falls back to lstsq.
    """
    m = b.size
    if max_iter is None:
        max_iter = 50 * (m + 1)
    scale = max(1.0, float(np.abs(b).max()), float(np.abs(q).max()))
    tol = 1e-13 * scale
    x = np.zeros(m)
    passive = np.zeros(m, dtype=bool)
    iterations = 0
    w = b - q @ x
    while iterations < max_iter:
        candidates = ~passive & (w > tol)
        if not candidates.any():
            break
        j = int(np.argmax(np.where(candidates, w, -np.inf)))
        passive[j] = True
        while iterations < max_iter:
            iterations += 1
            idx = np.flatnonzero(passive)
            sub = q[np.ix_(idx, idx)]
            try:
                z = np.linalg.solve(sub, b[idx])
            except np.linalg.LinAlgError:
                z = np.linalg.lstsq(sub, b[idx], rcond=None)[0]
            if np.all(z > tol):
                x = np.zeros(m)
                x[idx] = z
                break
            shrink = z <= tol
            denom = x[idx][shrink] - z[shrink]
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = np.where(denom > 0, x[idx][shrink] / denom, np.inf)
            alpha = float(np.min(steps)) if steps.size else 0.0
            if not np.isfinite(alpha):
                alpha = 0.0
            moved = np.zeros(m)
            moved[idx] = x[idx] + alpha * (z - x[idx])
            x = np.clip(moved, 0.0, None)
            drop = idx[x[idx] <= tol]
            passive[drop] = False
            x[~passive] = 0.0
            if not passive.any():
                break
        w = b - q @ x
    return x, iterations


def _kkt_fixed_basis(gram: np.ndarray, proj: np.ndarray, rates: np.ndarray,
                     eps: float, tol: float = 1e-8) -> bool:
    """Certify stationarity of ||r - eps * sum_a rate_a Y_a||^2 at rates >= 0."""
    grad = 2.0 * eps * eps * (gram @ rates) - 2.0 * eps * proj
    active = rates <= 0.0
    if np.any(grad[active] < -tol):
        return False
    return bool(np.all(np.abs(grad[~active]) <= tol))


def nearest_mcs_fixed_basis(cn: ChoiMatrix, fam: MarkovianFamily) -> NearestMCSResult:
    """HS projection of cn onto the frozen-basis divisible family.

    The family Choi map C(rates) = C_id + eps * sum_a rate_a Y_a is affine in
    the rate vector, so the projection is a nonnegative least-squares problem
    with Gram matrix G_ab = Tr(Y_a Y_b).
    """
    if fam.mode != "fixed_basis":
        raise ValueError(f"nearest_mcs_fixed_basis: family mode is {fam.mode!r}")
    if fam.dim != cn.dim:
        raise ValueError(
            f"nearest_mcs_fixed_basis: family dim {fam.dim} != Choi dim {cn.dim}")
    d = cn.dim
    eps = fam.eps
    dirs = np.stack([dissipator_choi_direction(op, d) for op in fam.basis_ops])
    residual_mat = cn.matrix - max_entangled_state(d)
    gram = np.einsum("aij,bji->ab", dirs, dirs).real
    proj = np.einsum("aij,ji->a", dirs, residual_mat).real
    eigs = np.linalg.eigvalsh(gram)
    degenerate = bool(eigs[0] <= 1e-12 * max(1.0, eigs[-1]))
    rates, iterations = nnls_gram(2.0 * eps * eps * gram, 2.0 * eps * proj)
    kkt_ok = _kkt_fixed_basis(gram, proj, rates, eps)
    star = max_entangled_state(d) + eps * np.tensordot(rates, dirs, axes=1)
    choi_star = ChoiMatrix(dim=d, matrix=star, t=cn.t, eps=eps)
    return NearestMCSResult(
        choi_star=choi_star,
        residual=hs_norm(cn.matrix - star),
        kkt_ok=kkt_ok,
        iterations=iterations,
        rates=rates,
        degenerate=degenerate,
    )


# ---------------------------------------------------------------------------
# Full-generator projection (projected gradient on (H, Kossakowski))
# ---------------------------------------------------------------------------

def _gksl_choi_directions(dim: int) -> tuple[np.ndarray, int]:
    """Choi directions of the full generator parametrization.

    Order: m Hamiltonian directions (traceless Hermitian basis F_j), then the
    Kossakowski block over an HS-orthonormal Hermitian matrix basis: m
    diagonals E_jj, then pairs (E_jk + E_kj)/sqrt2, i(E_jk - E_kj)/sqrt2 for
    j < k; m = dim^2 - 1. The orthonormal basis makes the parameter-space
    Euclidean norm of the K block equal to ||K||_F, so clamping negative
    eigenvalues of K is exactly the Euclidean projection of the parameters
    onto the feasible cone (projected gradient needs matching metrics).
    """
    fs = linalg.gell_mann_basis(dim)
    m = len(fs)
    eye = np.eye(dim, dtype=complex)
    dirs: list[np.ndarray] = []
    for f in fs:
        s = -1.0j * (np.kron(eye, f) - np.kron(f.T, eye))
        dirs.append(_superop_to_choi(s, dim))

    def k_term(p: int, q: int) -> np.ndarray:
        # F_p rho F_q - 1/2 {F_q F_p, rho} as a superoperator
        fq_fp = fs[q] @ fs[p]
        return (np.kron(fs[q].T, fs[p])
                - 0.5 * np.kron(eye, fq_fp)
                - 0.5 * np.kron(fq_fp.T, eye))

    root2 = np.sqrt(2.0)
    for j in range(m):
        dirs.append(_superop_to_choi(k_term(j, j), dim))
    for j in range(m):
        for k in range(j + 1, m):
            dirs.append(_superop_to_choi((k_term(j, k) + k_term(k, j)) / root2, dim))
            dirs.append(_superop_to_choi(1.0j * (k_term(j, k) - k_term(k, j)) / root2,
                                         dim))
    return np.stack(dirs), m


def _k_matrix_from_params(theta: np.ndarray, m: int) -> np.ndarray:
    k = np.zeros((m, m), dtype=complex)
    k[np.diag_indices(m)] = theta[:m]
    root2 = np.sqrt(2.0)
    pos = m
    for j in range(m):
        for l in range(j + 1, m):
            k[j, l] = (theta[pos] + 1.0j * theta[pos + 1]) / root2
            k[l, j] = (theta[pos] - 1.0j * theta[pos + 1]) / root2
            pos += 2
    return k


def _k_params_from_matrix(k: np.ndarray, m: int) -> np.ndarray:
    theta = np.empty(m * m)
    theta[:m] = np.diag(k).real
    root2 = np.sqrt(2.0)
    pos = m
    for j in range(m):
        for l in range(j + 1, m):
            theta[pos] = root2 * k[j, l].real
            theta[pos + 1] = root2 * k[j, l].imag
            pos += 2
    return theta


def nearest_mcs_full_gksl(cn: ChoiMatrix, dim: int | None = None,
                          eps: float | None = None, *,
                          max_iter: int = 100_000,
                          step: float | None = None,
                          tol: float = 1e-10) -> NearestMCSResult:
    """HS projection of cn onto the full divisible family at first order.

    Parametrizes the generator by a Hamiltonian coefficient vector h (over the
    traceless Hermitian basis) and a Hermitian Kossakowski matrix K; the
    divisibility constraint is K >= 0. The quadratic objective is minimized by
    projected gradient with a fixed step 0.9 / L (L from the parameter Gram
    matrix), projecting K onto the PSD cone each iteration. On hitting
    max_iter before the gradient-mapping norm drops below tol the result is
    returned with kkt_ok=False rather than raising.
    """
    d = cn.dim if dim is None else dim
    if d != cn.dim:
        raise ValueError(f"nearest_mcs_full_gksl: dim {d} != Choi dim {cn.dim}")
    e = cn.eps if eps is None else eps
    if e <= 0:
        raise ValueError(f"nearest_mcs_full_gksl: eps must be > 0, got {e}")

    dirs, m = _gksl_choi_directions(d)
    n_params = dirs.shape[0]
    phi = max_entangled_state(d)
    target = cn.matrix - phi

    # Real inner products of the Hermitian directions.
    gram = np.einsum("aij,bji->ab", dirs, dirs).real
    proj = np.einsum("aij,ji->a", dirs, target).real

    lam_max = float(np.linalg.eigvalsh(gram)[-1])
    lipschitz = 2.0 * e * e * lam_max
    if step is None:
        step = 0.9 / lipschitz

    x = np.zeros(n_params)
    iterations = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        grad = 2.0 * e * e * (gram @ x) - 2.0 * e * proj
        y = x - step * grad
        # Project the Kossakowski block onto the PSD cone; h stays free.
        kmat = _k_matrix_from_params(y[m:], m)
        w, v = np.linalg.eigh(kmat)
        if w[0] < 0.0:
            kmat = (v * np.clip(w, 0.0, None)) @ v.conj().T
            y[m:] = _k_params_from_matrix(kmat, m)
        gm_norm = float(np.linalg.norm(x - y)) / step
        x = y
        if gm_norm < tol:
            converged = True
            break

    h = x[:m]
    kmat = _k_matrix_from_params(x[m:], m)
    star = phi + e * np.tensordot(x, dirs, axes=1)
    star = 0.5 * (star + dagger(star))
    choi_star = ChoiMatrix(dim=d, matrix=star, t=cn.t, eps=e)
    return NearestMCSResult(
        choi_star=choi_star,
        residual=hs_norm(cn.matrix - star),
        kkt_ok=converged,
        iterations=iterations,
        kossakowski=kmat,
        hamiltonian=h,
    )


# ---------------------------------------------------------------------------
# Monte-Carlo verification
# ---------------------------------------------------------------------------

def sample_markovian_chois(dim: int, eps: float, n_samples: int, seed: int,
                           include_hamiltonian: bool = True) -> np.ndarray:
    """Batch of first-order Choi states of random divisible generators.

    Per sample: 1..dim^2 Haar-unitary jump operators with rates uniform on
    [0, 1]; when include_hamiltonian is set, about half the samples also carry
    a random traceless Hamiltonian (the "unitary part"). All draws come from
    one seeded stream in a fixed order, so output is reproducible.
    Returns an (n_samples, dim^2, dim^2) complex array.
    """
    if n_samples < 1:
        raise ValueError(f"sample_markovian_chois: n_samples must be >= 1, got {n_samples}")
    rng = np.random.default_rng(seed)
    d = dim
    phi = max_entangled_state(d)
    counts = rng.integers(1, d * d + 1, size=n_samples)
    total = int(counts.sum())
    us = haar_unitaries(d, total, rng)
    rates = rng.uniform(0.0, 1.0, size=total)
    uvec = us.transpose(0, 2, 1).reshape(total, d * d) / np.sqrt(d)
    pure = np.einsum("ni,nj->nij", uvec, uvec.conj())
    weighted = rates[:, None, None] * (pure - phi)
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    chois = phi + eps * np.add.reduceat(weighted, offsets, axis=0)
    if include_hamiltonian:
        mask = rng.random(n_samples) < 0.5
        raw = (rng.standard_normal((n_samples, d, d))
               + 1.0j * rng.standard_normal((n_samples, d, d)))
        h = 0.5 * (raw + raw.conj().transpose(0, 2, 1))
        h -= (np.einsum("nii->n", h) / d)[:, None, None].real * np.eye(d)
        hvec = h.transpose(0, 2, 1).reshape(n_samples, d * d) / np.sqrt(d)
        ket = max_entangled_ket(d)
        comm = -1.0j * (np.einsum("ni,j->nij", hvec, ket.conj())
                        - np.einsum("i,nj->nij", ket, hvec.conj()))
        chois = chois + (eps * mask[:, None, None]) * comm
    return chois


def verify_witness(w: WitnessOperator, dim: int, eps: float, n_samples: int,
                   seed: int) -> VerificationResult:
    """Check Tr(W C_M) >= 0 on sampled divisible Choi states.

    A violation is an expectation below -1e-8.
    """
    if n_samples < 1:
        raise ValueError(f"verify_witness: n_samples must be >= 1, got {n_samples}")
    chois = sample_markovian_chois(dim, eps, n_samples, seed)
    values = np.einsum("ij,nji->n", w.matrix, chois).real
    return VerificationResult(
        min_expectation=float(values.min()),
        violations=int(np.count_nonzero(values < -1e-8)),
    )


def uniqueness_check(cn: ChoiMatrix, cm_star: ChoiMatrix, dim: int, eps: float,
                     n_samples: int, seed: int,
                     family: MarkovianFamily | None = None) -> UniquenessResult:
    """Sample the variational inequality Tr[(C_N - C_M*)(C_M - C_M*)] <= 0.

    With family given, samples are drawn from that frozen-basis family
    (rates uniform on [0, 2]); otherwise from the general mixed sampler.
    holds is True when the sampled maximum stays below 1e-8.
    """
    if n_samples < 1:
        raise ValueError(f"uniqueness_check: n_samples must be >= 1, got {n_samples}")
    if family is None:
        chois = sample_markovian_chois(dim, eps, n_samples, seed)
    else:
        if family.mode != "fixed_basis":
            raise ValueError("uniqueness_check: only fixed_basis families can be sampled")
        rng = np.random.default_rng(seed)
        dirs = np.stack([dissipator_choi_direction(op, dim) for op in family.basis_ops])
        rates = rng.uniform(0.0, 2.0, size=(n_samples, dirs.shape[0]))
        chois = max_entangled_state(dim) + eps * np.einsum("na,aij->nij", rates, dirs)
    diff = cn.matrix - cm_star.matrix
    lhs = np.einsum("ij,nji->n", diff, chois - cm_star.matrix).real
    max_lhs = float(lhs.max())
    return UniquenessResult(max_lhs=max_lhs, holds=bool(max_lhs <= 1e-8))
