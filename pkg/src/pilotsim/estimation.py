"""Pilot allocation, uplink training and MMSE channel estimation.

With i.i.d. Rayleigh fading the MMSE estimator of every channel is a
scalar multiple of the despread pilot observation at the BS::

    xi[l, p]     = sqrt(rho_tr) * sum_{(j,k) on pilot p} h[l, j, k] + n
    h_hat[l,j,k] = c[l,j,k] * xi[l, pilot_of(j,k)]
    c[l,j,k]     = sqrt(rho_tr) * beta[l,j,k] / D[l,j,k]
    q[l,j,k]     = rho_tr * beta[l,j,k]**2 / D[l,j,k]
    D[l,j,k]     = sigma^2 + rho_tr * sum_{(j',k') sharing the pilot} beta[l,j',k']

``q`` is the per-antenna variance of the estimate, so the error variance
is ``beta - q``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .channel import complex_normal
from .errors import ConfigError, PilotOverheadExceedsCoherence, ShapeMismatch

__all__ = [
    "PilotAssignment",
    "ChannelEstimate",
    "allocate_pilots",
    "synthesize_training",
    "training_denominator",
    "mmse_coefficients",
    "mmse_coefficient",
    "estimate_variance",
    "mmse_estimate",
    "write_q_csv",
]


@dataclass(frozen=True)
class PilotAssignment:
    """Orthogonal pilot book and the user-to-pilot map.

    ``pilot_of[j, k]`` is the pilot index of user ``k`` in cell ``j``.
    """

    pilot_of: np.ndarray
    pilot_length: int
    scheme: str = "reuse"
    reuse_factor: int | None = None

    @property
    def num_cells(self) -> int:
        return self.pilot_of.shape[0]

    @property
    def users_per_cell(self) -> int:
        return self.pilot_of.shape[1]

    def pilot_matrix(self) -> np.ndarray:
        """0/1 matrix ``A[p, j*K + k]``: which users transmit pilot ``p``."""
        flat = self.pilot_of.reshape(-1)
        a = np.zeros((self.pilot_length, flat.size))
        a[flat, np.arange(flat.size)] = 1.0
        return a

    def share_mask(self) -> np.ndarray:
        """``mask[j, k, l, i]`` is True when users (j,k) and (l,i) share a pilot."""
        p = self.pilot_of
        return p[:, :, None, None] == p[None, None, :, :]

    def sharers(self, j: int, k: int) -> list[tuple[int, int]]:
        cells, users = np.nonzero(self.pilot_of == self.pilot_of[j, k])
        return list(zip(cells.tolist(), users.tolist()))


@dataclass
class ChannelEstimate:
    """MMSE estimates ``h_hat[..., l, j, k, :]`` with their variances ``q[l, j, k]``."""

    h_hat: np.ndarray
    q: np.ndarray
    coefficient: np.ndarray

    def error(self, h: np.ndarray) -> np.ndarray:
        """Estimation error ``h - h_hat``; uncorrelated with ``h_hat``."""
        return h - self.h_hat

    def own_cell(self) -> np.ndarray:
        """Estimates each BS holds for its own users, shape ``(..., L, K, M)``."""
        L = self.q.shape[0]
        cells = np.arange(L)
        return self.h_hat[..., cells, cells, :, :]


def allocate_pilots(config, grouping=None) -> PilotAssignment:
    """Build the pilot assignment for plain reuse or center/edge grouping.

    Plain reuse colours cell ``j`` with ``j mod f``; users with the same index
    in same-colour cells share a pilot and ``T_p = f * K``.  With a grouping,
    center users of every cell reuse one shared book of ``max_l K_lc`` pilots
    and every edge user gets a pilot of its own.
    """
    L, K = config.num_cells, config.users_per_cell
    if grouping is None:
        f = config.pilot_reuse_factor
        color = np.arange(L) % f
        pilot_of = color[:, None] * K + np.arange(K)[None, :]
        pa = PilotAssignment(pilot_of, f * K, "reuse", f)
    else:
        if not config.grouping_enabled:
            raise ConfigError("a grouping was supplied but grouping_enabled is off")
        center_book = int(max(len(c) for c in grouping.center))
        pilot_of = np.empty((L, K), dtype=int)
        next_edge = center_book
        for l in range(L):
            for slot, k in enumerate(grouping.center[l]):
                pilot_of[l, k] = slot
            for k in grouping.edge[l]:
                pilot_of[l, k] = next_edge
                next_edge += 1
        pa = PilotAssignment(pilot_of, next_edge, "grouped", None)
    if pa.pilot_length >= config.coherence_block:
        raise PilotOverheadExceedsCoherence(
            f"pilot length {pa.pilot_length} >= coherence block {config.coherence_block}")
    return pa


def synthesize_training(h, pa: PilotAssignment, config, stream=None, noise=None) -> np.ndarray:
    """Despread uplink pilot observations ``xi[..., l, p, :]``.

    Pass either a generator ``stream`` or a pre-drawn CN(0, 1) ``noise`` array
    of shape ``(..., L, T_p, M)``.
    """
    h = np.asarray(h)
    L, K = pa.num_cells, pa.users_per_cell
    if h.shape[-4:-1] != (L, L, K):
        raise ShapeMismatch(f"channel shape {h.shape} does not match {L} cells x {K} users")
    M = h.shape[-1]
    flat = h.reshape(*h.shape[:-3], L * K, M)
    xi = np.sqrt(config.uplink_pilot_snr) * np.einsum("pu,...lum->...lpm", pa.pilot_matrix(), flat)
    if noise is None:
        if stream is None:
            raise ValueError("need a random stream or explicit noise")
        noise = complex_normal(stream, xi.shape)
    return xi + np.sqrt(config.noise_power) * noise


def training_denominator(beta, pa: PilotAssignment, config) -> np.ndarray:
    """``D[l, j, k] = sigma^2 + rho_tr * (sum of beta[l, .] over the pilot's users)``."""
    beta = np.asarray(beta, dtype=float)
    L, K = pa.num_cells, pa.users_per_cell
    per_pilot = beta.reshape(L, L * K) @ pa.pilot_matrix().T  # (L, T_p)
    return config.noise_power + config.uplink_pilot_snr * per_pilot[:, pa.pilot_of]


def mmse_coefficients(beta, pa: PilotAssignment, config) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    return np.sqrt(config.uplink_pilot_snr) * beta / training_denominator(beta, pa, config)


def mmse_coefficient(beta, pa: PilotAssignment, config, l: int, j: int, k: int) -> float:
    """Scalar MMSE weight BS ``l`` applies to its observation of pilot ``pilot_of(j, k)``."""
    return float(mmse_coefficients(beta, pa, config)[l, j, k])


def estimate_variance(beta, pa: PilotAssignment, config) -> np.ndarray:
    """Per-antenna estimate variance ``q[l, j, k]``; always ``0 <= q <= beta``."""
    beta = np.asarray(beta, dtype=float)
    return config.uplink_pilot_snr * beta ** 2 / training_denominator(beta, pa, config)


def mmse_estimate(xi, beta, pa: PilotAssignment, config) -> ChannelEstimate:
    """MMSE estimates of every channel from the training observations."""
    coeff = mmse_coefficients(beta, pa, config)
    picked = np.asarray(xi)[..., :, pa.pilot_of, :]  # (..., L, L, K, M)
    return ChannelEstimate(coeff[..., None] * picked, estimate_variance(beta, pa, config), coeff)


def write_q_csv(path, beta, q):
    """Dump ``l, j, k, beta, q`` rows for debugging."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["l", "j", "k", "beta", "q"])
        for (l, j, k), b in np.ndenumerate(beta):
            writer.writerow([l, j, k, repr(float(b)), repr(float(q[l, j, k]))])
