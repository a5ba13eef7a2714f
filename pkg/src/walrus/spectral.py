"""Eigendecomposition of the state operator and reduction to the
effective number of modes.

The full operator of a redundant frame has many eigen-directions that the
dual-frame synthesis cannot see (their eigenvector components lie outside
the kept singular subspace of the frame).  The reduction scores each mode
by how much it can contribute to a reconstruction,

    score_i = ||P v_i|| * |btilde_i| / max(Re lambda_i, 1e-6),

with P the projector onto the kept singular directions of the frame in
coefficient space, and keeps the n_eff best modes.  Complex-conjugate
pairs are kept or dropped together so real inputs keep real
reconstructions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .frames import DualFrame, Frame
from .safari import MeasureKind, SSMOperator

COND_STABLE_LIMIT = 1e10
_SCORE_EPS = 1e-6


class SpectralError(Exception):
    pass


@dataclass(frozen=True)
class Eigendecomposition:
    lambdas: np.ndarray        # (n,) complex, ascending Re, conjugate pairs adjacent
    v: np.ndarray              # (n, n) complex eigenvector columns
    v_inv: np.ndarray
    cond_v: float
    measure: MeasureKind
    b_vector: np.ndarray

    @property
    def stably_diagonalizable(self) -> bool:
        return self.cond_v < COND_STABLE_LIMIT

    @property
    def b_tilde(self) -> np.ndarray:
        return self.v_inv @ self.b_vector


@dataclass(frozen=True)
class DiagonalSSM:
    """n_eff diagonal modes with the map back to frame coefficients."""

    lambdas: np.ndarray        # (n_eff,)
    b_tilde: np.ndarray        # (n_eff,)
    v_out: np.ndarray          # (n_full, n_eff)
    measure: MeasureKind
    cond_v: float

    @property
    def n_eff(self) -> int:
        return self.lambdas.size

    @property
    def n_full(self) -> int:
        return self.v_out.shape[0]


def _sort_spectrum(lam: np.ndarray, V: np.ndarray):
    """Ascending real part; conjugate pairs adjacent (positive Im first)."""
    order = np.lexsort((-lam.imag, lam.real))
    return lam[order], V[:, order]


def diagonalize(ssm: SSMOperator) -> Eigendecomposition:
    """Full eigendecomposition of A with a conditioning report.

    Raises SpectralError if the factorization does not reproduce A; a
    cond_v above 1e10 marks the operator as not stably diagonalizable
    (expected for the Legendre constructions), which downstream code
    treats as "dense path only".
    """
    A = ssm.a_matrix
    if not np.all(np.isfinite(A)):
        raise SpectralError("operator contains non-finite entries")
    try:
        lam, V = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:   # pragma: no cover - LAPACK failure
        raise SpectralError(f"eigensolver failed to converge: {exc}") from exc
    lam, V = _sort_spectrum(lam, V)
    cond_v = float(np.linalg.cond(V))
    v_inv = np.linalg.inv(V)
    scale = max(float(np.abs(A).max()), 1e-300)
    defect = float(np.abs((V * lam) @ v_inv - A).max()) / scale
    # ill-conditioned eigenbases cannot reproduce A to rounding; gate the
    # factorization check accordingly and leave the cond_v flag to callers
    if defect > max(1e-8, 100.0 * np.finfo(float).eps * cond_v):
        raise SpectralError(
            f"eigendecomposition residual {defect:.2e} inconsistent with cond_v={cond_v:.2e}")
    return Eigendecomposition(lambdas=lam, v=V, v_inv=v_inv, cond_v=cond_v,
                              measure=ssm.measure, b_vector=ssm.b_vector.copy())


def _kept_projector(frame: Frame, dual: DualFrame) -> np.ndarray:
    w = frame.weights
    M = frame.rows * np.sqrt(w)
    U, _, _ = np.linalg.svd(M, full_matrices=False)
    Ur = U[:, : dual.rank_eff]
    return Ur @ Ur.T


def mode_scores(decomp: Eigendecomposition, frame: Frame, dual: DualFrame) -> np.ndarray:
    """Reconstruction-influence score of every eigenmode."""
    P = _kept_projector(frame, dual)
    btil = decomp.b_tilde
    reach = np.linalg.norm(P @ decomp.v, axis=0)
    return reach * np.abs(btil) / np.maximum(decomp.lambdas.real, _SCORE_EPS)


def _pair_partner(lam: np.ndarray, idx: int) -> Optional[int]:
    """Index of the conjugate partner adjacent to ``idx``, if any."""
    li = lam[idx]
    if abs(li.imag) < 1e-14 * max(1.0, abs(li.real)):
        return None
    for j in (idx - 1, idx + 1):
        if 0 <= j < lam.size and np.isclose(lam[j], np.conj(li), rtol=1e-9, atol=1e-12):
            return j
    return None


def reduce_to_effective(decomp: Eigendecomposition, frame: Frame, dual: DualFrame,
                        n_eff: int) -> DiagonalSSM:
    """Keep the n_eff modes with the largest reconstruction influence.

    Conjugate pairs are treated as units; if the requested size splits a
    pair the lower-scoring member of the boundary pair is dropped.
    """
    n = decomp.lambdas.size
    if not (1 <= n_eff <= n):
        raise SpectralError(f"n_eff={n_eff} outside 1..{n}")
    if n_eff > dual.rank_eff and n_eff != n:
        raise SpectralError(
            f"n_eff={n_eff} exceeds the frame's effective rank {dual.rank_eff}")
    scores = mode_scores(decomp, frame, dual)
    order = np.argsort(-scores, kind="stable")
    chosen: list[int] = []
    used = np.zeros(n, dtype=bool)
    for idx in order:
        if used[idx] or len(chosen) >= n_eff:
            continue
        partner = _pair_partner(decomp.lambdas, idx)
        group = [idx] if partner is None or used[partner] else [idx, partner]
        if len(chosen) + len(group) > n_eff:
            group = [idx]          # split pair at the boundary
        for g in group:
            used[g] = True
            chosen.append(g)
    keep = np.sort(np.asarray(chosen[:n_eff]))
    return DiagonalSSM(lambdas=decomp.lambdas[keep],
                       b_tilde=decomp.b_tilde[keep],
                       v_out=decomp.v[:, keep],
                       measure=decomp.measure,
                       cond_v=decomp.cond_v)
