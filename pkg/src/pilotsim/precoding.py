"""MRT and ZF downlink precoders built from the own-cell channel estimates.

The downlink signal seen by user (j,k) from BS l is ``h[l,j,k]^T y_l``
(uplink channel reused by reciprocity), so MRT steers along
``conj(h_hat)`` and ZF uses ``conj(H) (H^T conj(H))^-1``, which gives
``H^T B = I`` on the estimated channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEstimate, InsufficientAntennas, SingularGram

__all__ = [
    "PrecoderSet",
    "mrt_precoder",
    "zf_precoder",
    "build_precoder",
    "transmit_signal",
    "effective_gains",
    "MAX_GRAM_CONDITION",
]

MAX_GRAM_CONDITION = 1e12


@dataclass
class PrecoderSet:
    """Per-cell precoding matrices ``b[..., l, :, k]`` (column k serves user (l,k))."""

    b: np.ndarray
    mode: str
    normalization: str

    def column(self, l: int, k: int) -> np.ndarray:
        return self.b[..., l, :, k]

    def power(self) -> np.ndarray:
        """Total transmit power per BS, ``sum_k ||b_k||^2``."""
        return np.sum(np.abs(self.b) ** 2, axis=(-2, -1))


def _own_q(est) -> np.ndarray:
    cells = np.arange(est.q.shape[0])
    return est.q[cells, cells, :]  # (L, K)


def _normalize(raw, est, normalization, stat_scale):
    if normalization == "statistical":
        return raw * stat_scale[:, None, :]
    if normalization == "per-realization":
        norms = np.linalg.norm(raw, axis=-2, keepdims=True)
        if np.any(norms == 0):
            raise DegenerateEstimate("zero-norm precoder column")
        return raw / norms
    raise ValueError(f"unknown normalization {normalization!r}")


def mrt_precoder(est, config, normalization: str | None = None) -> PrecoderSet:
    """Maximum-ratio precoder: column k is ``conj(h_hat[l, l, k])``, normalized."""
    normalization = normalization or config.normalization_mode
    M = est.h_hat.shape[-1]
    q_own = _own_q(est)
    raw = np.swapaxes(np.conj(est.own_cell()), -1, -2)  # (..., L, M, K)
    scale = None
    if normalization == "statistical":
        if np.any(q_own <= 0):
            raise DegenerateEstimate("zero estimate variance; cannot normalize MRT")
        scale = 1.0 / np.sqrt(M * q_own)
    return PrecoderSet(_normalize(raw, est, normalization, scale), "MRT", normalization)


def zf_precoder(est, config, normalization: str | None = None) -> PrecoderSet:
    """Zero-forcing precoder; raises instead of regularizing a bad Gram matrix."""
    normalization = normalization or config.normalization_mode
    M = est.h_hat.shape[-1]
    K = est.q.shape[-1]
    if M <= K:
        raise InsufficientAntennas(f"ZF needs M > K, got M={M}, K={K}")
    q_own = _own_q(est)
    H = np.swapaxes(est.own_cell(), -1, -2)  # (..., L, M, K)
    gram = np.swapaxes(H, -1, -2) @ np.conj(H)  # H^T conj(H), Hermitian PSD
    eig = np.linalg.eigvalsh(gram)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(eig[..., 0] > 0, eig[..., -1] / eig[..., 0], np.inf)
    if np.any(cond > MAX_GRAM_CONDITION):
        raise SingularGram(f"Gram condition number {np.max(cond):.3g} exceeds {MAX_GRAM_CONDITION:g}")
    raw_t = np.linalg.solve(np.swapaxes(gram, -1, -2), np.swapaxes(np.conj(H), -1, -2))
    raw = np.swapaxes(raw_t, -1, -2)
    scale = None
    if normalization == "statistical":
        if np.any(q_own <= 0):
            raise DegenerateEstimate("zero estimate variance; cannot normalize ZF")
        scale = np.sqrt((M - K) * q_own)
    return PrecoderSet(_normalize(raw, est, normalization, scale), "ZF", normalization)


def build_precoder(kind: str, est, config, normalization: str | None = None) -> PrecoderSet:
    kind = kind.upper()
    if kind == "MRT":
        return mrt_precoder(est, config, normalization)
    if kind == "ZF":
        return zf_precoder(est, config, normalization)
    raise ValueError(f"unknown precoder {kind!r}")


def transmit_signal(precoders: PrecoderSet, symbols, config) -> np.ndarray:
    """Per-cell transmit vectors ``y_l = sqrt(rho_d) * B_l x_l``, shape ``(..., L, M)``."""
    x = np.asarray(symbols)
    return np.sqrt(config.downlink_snr) * np.einsum("...lmk,...lk->...lm", precoders.b, x)


def effective_gains(h, precoders: PrecoderSet) -> np.ndarray:
    """``g[..., j, k, l, i] = h[..., l, j, k, :]^T b[..., l, :, i]``."""
    return np.einsum("...ljkm,...lmi->...jkli", h, precoders.b, optimize=True)
