"""Receive combiners, DFT codebooks and OMP hybrid factorisation.

Combiner matrices are ``N_a x K_c``: column ``k`` is the combining vector
``w_k`` applied to the array samples of sub-band ``c`` for UE ``k``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .architectures import StructureMask

__all__ = [
    "COMBINER_METHODS",
    "lmmse_combiner",
    "lmmse_matrix",
    "mrc_combiner",
    "zfc_combiner",
    "zfc_matrix",
    "rzfc_matrix",
    "combiner_matrix",
    "Codebook",
    "dft_codebook",
    "OmpResult",
    "omp_hybrid",
    "CombinerSolution",
    "assemble_combiner",
]

COMBINER_METHODS = ("lmmse", "rzfc", "zfc", "mrc")

_COND_LIMIT = 1e12


# ---------------------------------------------------------------- combiners

def lmmse_matrix(h_est: np.ndarray, powers, noise_var: float) -> np.ndarray:
    """LMMSE combiners of every UE in a band.

    Column ``k`` equals ``(sigma^2 I + sum_{l != k} lambda_l h_l h_l^H)^{-1} h_k``.
    The own-user term is dropped per column through a rank-one downdate of
    the full covariance, which leaves the direction unchanged.
    """
    if noise_var <= 0.0:
        raise ValueError("noise_var must be positive")
    h = np.atleast_2d(np.asarray(h_est, dtype=complex))
    lam = np.asarray(powers, dtype=float).ravel()
    n_a = h.shape[0]
    cov = noise_var * np.eye(n_a) + (h * lam) @ h.conj().T
    # R^{-1} h_k is parallel to (R - lambda_k h_k h_k^H)^{-1} h_k; rescale
    x = np.linalg.solve(cov, h)
    quad = np.real(np.einsum("ik,ik->k", h.conj(), x))
    return x / (1.0 - lam * quad)


def lmmse_combiner(h_est: np.ndarray, k: int, powers, noise_var: float) -> np.ndarray:
    """Single LMMSE column for UE ``k``; see :func:`lmmse_matrix`."""
    if noise_var <= 0.0:
        raise ValueError("noise_var must be positive")
    h = np.atleast_2d(np.asarray(h_est, dtype=complex))
    lam = np.asarray(powers, dtype=float).ravel()
    others = [i for i in range(h.shape[1]) if i != k]
    ho = h[:, others]
    cov = noise_var * np.eye(h.shape[0]) + (ho * lam[others]) @ ho.conj().T
    return np.linalg.solve(cov, h[:, k])


def mrc_combiner(h_est: np.ndarray) -> np.ndarray:
    return np.array(h_est, dtype=complex, copy=True)


def _zf_solve(h: np.ndarray, loading: float) -> np.ndarray:
    gram = h.conj().T @ h
    if loading > 0.0:
        gram = gram + loading * np.eye(gram.shape[0])
    return h @ np.linalg.solve(gram, np.eye(gram.shape[0]))


def zfc_matrix(h_est: np.ndarray) -> np.ndarray:
    """Zero-forcing combiners ``H (H^H H)^{-1}``.

    Falls back to the regularised form, with a warning, when ``H`` is
    rank deficient or too ill-conditioned to invert safely.
    """
    h = np.atleast_2d(np.asarray(h_est, dtype=complex))
    if h.shape[1] > h.shape[0] or np.linalg.cond(h) ** 2 > _COND_LIMIT:
        warnings.warn("rank-deficient channel matrix; using regularised ZF", RuntimeWarning)
        return rzfc_matrix(h)
    return _zf_solve(h, 0.0)


def zfc_combiner(h_est: np.ndarray, k: int) -> np.ndarray:
    return zfc_matrix(h_est)[:, k]


def rzfc_matrix(h_est: np.ndarray, eps_scale: float = 1e-3) -> np.ndarray:
    """Regularised ZF with diagonal loading ``eps = eps_scale * tr(H^H H) / K``."""
    h = np.atleast_2d(np.asarray(h_est, dtype=complex))
    k = h.shape[1]
    eps = eps_scale * float(np.sum(np.abs(h) ** 2)) / k
    if eps == 0.0:
        return np.zeros_like(h)
    return _zf_solve(h, eps)


def combiner_matrix(method: str, h_est: np.ndarray, powers, noise_var: float) -> np.ndarray:
    """Unconstrained combiner of the requested kind for every UE of a band."""
    if method == "lmmse":
        return lmmse_matrix(h_est, powers, noise_var)
    if method == "rzfc":
        return rzfc_matrix(h_est)
    if method == "zfc":
        return zfc_matrix(h_est)
    if method == "mrc":
        return np.array(h_est, dtype=complex, copy=True)
    raise ValueError(f"unknown combiner method {method!r}; expected one of {COMBINER_METHODS}")


# ---------------------------------------------------------------- codebook

@dataclass(frozen=True)
class Codebook:
    """Candidate analog beams, one per column, entries of modulus ``N_a^{-1/2}``."""

    matrix: np.ndarray

    @property
    def n_antennas(self) -> int:
        return self.matrix.shape[0]

    @property
    def size(self) -> int:
        return self.matrix.shape[1]


def _dft_1d(n: int, oversampling: int) -> np.ndarray:
    m = n * oversampling if n > 1 else 1
    return np.exp(2j * np.pi * np.outer(np.arange(n), np.arange(m)) / m)


def dft_codebook(dims: Sequence[int], oversampling: int = 2) -> Codebook:
    """Oversampled DFT codebook for a planar array with ``dims = (n_y, n_z)``.

    The element index runs ``m = iy * n_z + iz``, matching
    :func:`fr3link.channel.upa_layout`, so the beams are Kronecker products
    of the per-axis DFT vectors.  ``oversampling = 2`` on both axes gives
    ``L = 4 N_a`` beams; ``oversampling = 1`` gives a unitary codebook.
    """
    if oversampling < 1 or any(d < 1 for d in dims):
        raise ValueError("dimensions and oversampling must be >= 1")
    mat = np.ones((1, 1), dtype=complex)
    for n in dims:
        mat = np.kron(mat, _dft_1d(n, oversampling))
    return Codebook(mat / np.sqrt(mat.shape[0]))


# ---------------------------------------------------------------- OMP

@dataclass
class OmpResult:
    w_rf: np.ndarray
    w_bb: np.ndarray
    indices: list[int]
    residual_norms: list[float] = field(default_factory=list)

    @property
    def combiner(self) -> np.ndarray:
        return self.w_rf @ self.w_bb


def omp_hybrid(w_opt: np.ndarray, codebook: Codebook | np.ndarray, n_rf: int) -> OmpResult:
    """Factor ``w_opt`` into codebook columns and a least-squares digital part.

    Each pass correlates the normalised residual with the codebook, appends
    the column of largest correlation energy and refits ``W_BB`` by least
    squares.  The same column may be chosen twice; the pseudo-inverse
    absorbs the rank loss.  ``residual_norms`` records the unnormalised
    residual ``||W_opt - W_RF W_BB||_F`` after every pass, starting with
    ``||W_opt||_F``.  A zero residual ends the loop early with fewer than
    ``n_rf`` columns.
    """
    d = codebook.matrix if isinstance(codebook, Codebook) else np.asarray(codebook)
    w_opt = np.atleast_2d(np.asarray(w_opt, dtype=complex))
    if w_opt.shape[0] != d.shape[0]:
        raise ValueError("codebook and combiner row counts differ")
    if not 1 <= n_rf <= d.shape[1]:
        raise ValueError("n_rf must lie in [1, L]")
    scale = np.linalg.norm(w_opt)
    norms = [float(scale)]
    w_rf = np.zeros((d.shape[0], 0), dtype=complex)
    w_bb = np.zeros((0, w_opt.shape[1]), dtype=complex)
    idx: list[int] = []
    if scale == 0.0:
        return OmpResult(w_rf, w_bb, idx, norms)
    res = w_opt / scale
    for _ in range(n_rf):
        gamma = res.conj().T @ d
        q = int(np.argmax(np.sum(np.abs(gamma) ** 2, axis=0)))
        idx.append(q)
        w_rf = d[:, idx]
        w_bb = np.linalg.pinv(w_rf, rcond=1e-12) @ w_opt
        diff = w_opt - w_rf @ w_bb
        r = float(np.linalg.norm(diff))
        norms.append(r)
        if r <= 1e-14 * scale:
            break
        res = diff / r
    return OmpResult(w_rf, w_bb, idx, norms)


# ---------------------------------------------------------------- assembly

@dataclass
class CombinerSolution:
    """Per-band analog and digital combiners of one architecture.

    ``w_rf[c]`` is ``None`` for fully digital bands.  ``mask`` carries the
    block structure used by :meth:`global_matrix`.
    """

    mask: StructureMask
    w_rf: list[np.ndarray | None]
    w_bb: list[np.ndarray]

    def effective(self, c: int) -> np.ndarray:
        if self.mask.partitioned and c != self.mask.active_band:
            return np.zeros(self.mask.combiner_shape(c), dtype=complex)
        rf = self.w_rf[c]
        return self.w_bb[c] if rf is None else rf @ self.w_bb[c]

    def global_matrix(self) -> np.ndarray:
        """Block-diagonal stack of the effective per-band combiners.

        Only meaningful for DRF and FP architectures; blocks of inactive FP
        bands are exactly zero.
        """
        if not (self.mask.block_diagonal or self.mask.partitioned):
            raise ValueError("shared-RF combiners have no global block structure")
        blocks = [self.effective(c) for c in range(self.mask.n_subbands)]
        rows = sum(b.shape[0] for b in blocks)
        cols = sum(b.shape[1] for b in blocks)
        out = np.zeros((rows, cols), dtype=complex)
        r = c0 = 0
        for b in blocks:
            out[r:r + b.shape[0], c0:c0 + b.shape[1]] = b
            r += b.shape[0]
            c0 += b.shape[1]
        return out


def assemble_combiner(mask: StructureMask, w_bb: Sequence[np.ndarray],
                      w_rf: Sequence[np.ndarray | None] | None = None) -> CombinerSolution:
    """Check per-band pieces against ``mask`` and bundle them.

    Fully digital masks ignore (and require absence of) analog pieces.
    Inactive FP bands may be passed as ``None`` and are stored as zeros.
    """
    n = mask.n_subbands
    if len(w_bb) != n:
        raise ValueError("one digital combiner per sub-band required")
    if w_rf is None:
        w_rf = [None] * n
    if len(w_rf) != n:
        raise ValueError("one analog combiner per sub-band required")
    rf_out: list[np.ndarray | None] = []
    bb_out: list[np.ndarray] = []
    for c in range(n):
        inactive = mask.partitioned and c != mask.active_band
        rf_shape = mask.rf_shape(c)
        bb, rf = w_bb[c], w_rf[c]
        if inactive:
            rf_out.append(None if rf_shape is None else np.zeros(rf_shape, dtype=complex))
            bb_out.append(np.zeros(mask.bb_shape(c), dtype=complex))
            continue
        if rf_shape is None:
            if rf is not None:
                raise ValueError("fully digital architecture takes no analog combiner")
        else:
            if rf is None:
                raise ValueError(f"band {c}: hybrid architecture needs an analog combiner")
            rf = np.asarray(rf, dtype=complex)
            if rf.shape[0] != rf_shape[0] or rf.shape[1] > rf_shape[1]:
                raise ValueError(f"band {c}: analog combiner shape {rf.shape} exceeds {rf_shape}")
        bb = np.asarray(bb, dtype=complex)
        rows = mask.n_antennas if rf is None else rf.shape[1]
        if bb.shape != (rows, mask.k_per_subband[c]):
            raise ValueError(f"band {c}: digital combiner shape {bb.shape} does not match mask")
        rf_out.append(rf)
        bb_out.append(bb)
    return CombinerSolution(mask, rf_out, bb_out)
