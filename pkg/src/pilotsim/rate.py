"""Downlink SINR and achievable rate: closed forms, Monte Carlo, grouping.

Closed forms ("consistent" mode) are the exact use-and-forget bounds for
statistically normalized precoders under MMSE estimation.  For user (j,k),
with ``C = sum over pilot sharers (l,i) != (j,k) of q[l,j,k]``::

    MRT:  M q_jjk / (M C + K sum_l beta_ljk + sigma^2/rho_d)
    ZF:   (M-K) q_jjk / ((M-K) C + K sum_l (beta_ljk - s_ljk q_ljk) + sigma^2/rho_d)

where ``s_ljk`` is 1 if cell l holds a user on (j,k)'s pilot (the part of
the channel ZF at BS l nulls or steers coherently) and 0 otherwise.
"paper" mode evaluates an alternative form whose non-coherent sum
runs over the estimate variances of the other cells.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .channel import FADING, TRAINING_NOISE, complex_normal, trial_stream
from .errors import ConfigError, InsufficientAntennas
from .estimation import allocate_pilots, estimate_variance, mmse_estimate, synthesize_training
from .precoding import build_precoder, effective_gains

__all__ = [
    "GroupingResult",
    "SinrReport",
    "RateReport",
    "group_users",
    "sinr_closed_form",
    "asymptotic_ceiling",
    "sinr_monte_carlo",
    "rate_lower_bound",
    "rate_with_grouping",
    "MC_CHUNK",
]

# trials per vectorized block; fixed so results never depend on chunking
MC_CHUNK = 256


@dataclass
class GroupingResult:
    """Center/edge split of every cell by serving gain."""

    mu: np.ndarray
    center: list
    edge: list
    threshold: float

    @property
    def k_center(self) -> np.ndarray:
        return np.array([len(c) for c in self.center])

    @property
    def k_edge(self) -> np.ndarray:
        return np.array([len(e) for e in self.edge])

    def is_center(self) -> np.ndarray:
        """Boolean ``(L, K)`` mask of center users."""
        K = len(self.center[0]) + len(self.edge[0])
        mask = np.zeros((len(self.center), K), dtype=bool)
        for l, users in enumerate(self.center):
            mask[l, users] = True
        return mask


@dataclass
class SinrReport:
    """Per-user SINRs (linear), shape ``(L, K)``; ``gamma_mc``/``ci95`` may be absent."""

    gamma_cf: np.ndarray | None
    gamma_inf: np.ndarray
    gamma_mc: np.ndarray | None = None
    ci95: np.ndarray | None = None
    precoder: str = "MRT"
    mode: str = "consistent"


@dataclass
class RateReport:
    prelog: float
    pilot_length: int
    sinr: SinrReport
    rate_cf: np.ndarray | None = None
    rate_mc: np.ndarray | None = None
    grouping: GroupingResult | None = None
    config: dict = field(default_factory=dict)
    seed: int | None = None

    @staticmethod
    def _cell(rate):
        return None if rate is None else rate.sum(axis=1)

    @property
    def per_cell_cf(self):
        return self._cell(self.rate_cf)

    @property
    def per_cell_mc(self):
        return self._cell(self.rate_mc)

    @property
    def total_cf(self):
        return None if self.rate_cf is None else float(self.rate_cf.sum())

    @property
    def total_mc(self):
        return None if self.rate_mc is None else float(self.rate_mc.sum())

    def to_csv(self, path):
        """One row per user."""
        L, K = self.sinr.gamma_inf.shape
        center = self.grouping.is_center() if self.grouping is not None else None

        def val(arr, j, k):
            return "" if arr is None else repr(float(arr[j, k]))

        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["cell", "user", "group", "gamma_cf", "gamma_mc", "ci95",
                        "gamma_inf", "rate_cf", "rate_mc"])
            for j in range(L):
                for k in range(K):
                    group = "" if center is None else ("center" if center[j, k] else "edge")
                    w.writerow([j, k, group, val(self.sinr.gamma_cf, j, k), val(self.sinr.gamma_mc, j, k),
                                val(self.sinr.ci95, j, k), val(self.sinr.gamma_inf, j, k),
                                val(self.rate_cf, j, k), val(self.rate_mc, j, k)])

    def summary(self) -> dict:
        def lst(x):
            return None if x is None else [float(v) for v in x]

        out = {
            "precoder": self.sinr.precoder,
            "sinr_mode": self.sinr.mode,
            "prelog": self.prelog,
            "pilot_length": self.pilot_length,
            "total_cf": self.total_cf,
            "total_mc": self.total_mc,
            "per_cell_cf": lst(self.per_cell_cf),
            "per_cell_mc": lst(self.per_cell_mc),
            "config": self.config,
            "seed": self.seed,
        }
        if self.grouping is not None:
            out["k_center"] = self.grouping.k_center.tolist()
            out["k_edge"] = self.grouping.k_edge.tolist()
        return out

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)


def group_users(beta, config) -> GroupingResult:
    """Split each cell's users by serving gain against ``tau * (max + min) / 2``.

    Ties go to the center group.
    """
    beta = np.asarray(beta, dtype=float)
    cells = np.arange(beta.shape[0])
    serving = beta[cells, cells, :]  # (L, K)
    mu = (serving.max(axis=1) + serving.min(axis=1)) / 2
    is_center = serving >= config.grouping_threshold * mu[:, None]
    center = [np.flatnonzero(row).tolist() for row in is_center]
    edge = [np.flatnonzero(~row).tolist() for row in is_center]
    return GroupingResult(mu, center, edge, config.grouping_threshold)


def _contamination(q, pa) -> np.ndarray:
    """``C[j, k] = sum_{(l,i) sharing (j,k)'s pilot, (l,i) != (j,k)} q[l, j, k]``."""
    mask = pa.share_mask().astype(float)
    L, K = pa.pilot_of.shape
    idx = np.arange(L * K)
    flat = mask.reshape(L * K, L * K)
    flat[idx, idx] = 0.0
    return np.einsum("jkli,ljk->jk", flat.reshape(L, K, L, K), q)


def asymptotic_ceiling(q, pa, config=None) -> np.ndarray:
    """SINR limit as ``M -> inf``; ``inf`` for users without contaminating sharers."""
    L = q.shape[0]
    cells = np.arange(L)
    own = q[cells, cells, :]
    contamination = _contamination(q, pa)
    with np.errstate(divide="ignore"):
        return np.where(contamination > 0, own / np.where(contamination > 0, contamination, 1.0), np.inf)


def sinr_closed_form(beta, q, pa, config, mode: str | None = None, precoder: str = "MRT") -> SinrReport:
    """Closed-form downlink SINR for every user (see module docstring)."""
    mode = mode or config.sinr_mode
    precoder = precoder.upper()
    beta = np.asarray(beta, dtype=float)
    L, K = pa.pilot_of.shape
    M = config.num_antennas
    cells = np.arange(L)
    own = q[cells, cells, :]
    coherent = _contamination(q, pa)
    noise = config.noise_to_signal

    if precoder == "MRT":
        gain = M
    elif precoder == "ZF":
        if M <= K:
            raise InsufficientAntennas(f"ZF needs M > K, got M={M}, K={K}")
        gain = M - K
    else:
        raise ValueError(f"unknown precoder {precoder!r}")

    if mode == "consistent":
        noncoherent = K * beta.sum(axis=0)  # every stream of every BS, (L, K)
        if precoder == "ZF":
            has_sharer = pa.share_mask().any(axis=3)  # (j, k, l)
            nulled = np.einsum("jkl,ljk->jk", has_sharer.astype(float), q)
            noncoherent = noncoherent - K * nulled
    elif mode == "paper":
        other = q.sum(axis=0) - own  # sum over l != j of q[l, j, k]
        noncoherent = K * other
        if precoder == "ZF":
            # per-user power term summed over l != j, normalized by rho_d
            noncoherent = noncoherent + (L - 1)
    else:
        raise ValueError(f"unknown SINR mode {mode!r}")

    gamma = gain * own / (gain * coherent + noncoherent + noise)
    return SinrReport(gamma, asymptotic_ceiling(q, pa), precoder=precoder, mode=mode)


def _mc_block(beta, pa, config, precoder, normalization, seed, trials):
    L, K = pa.pilot_of.shape
    M = config.num_antennas
    theta = np.stack([complex_normal(trial_stream(seed, t, FADING), (L, L, K, M)) for t in trials])
    noise = np.stack([complex_normal(trial_stream(seed, t, TRAINING_NOISE), (L, pa.pilot_length, M))
                      for t in trials])
    h = np.sqrt(beta)[..., None] * theta
    xi = synthesize_training(h, pa, config, noise=noise)
    est = mmse_estimate(xi, beta, pa, config)
    prec = build_precoder(precoder, est, config, normalization)
    g = effective_gains(h, prec).reshape(len(trials), L * K, L * K)
    desired = np.diagonal(g, axis1=1, axis2=2).reshape(len(trials), L, K)
    power = np.sum(np.abs(g) ** 2, axis=2).reshape(len(trials), L, K)
    return desired, power


def _use_and_forget(desired, power, noise):
    mean_gain = desired.mean(axis=0)
    signal = np.abs(mean_gain) ** 2
    return signal / (power.mean(axis=0) - signal + noise)


def sinr_monte_carlo(beta, pa, config, precoder: str = "MRT", n_trials: int = 1000, seed: int = 0,
                     normalization: str | None = None, n_batches: int = 20) -> SinrReport:
    """Use-and-forget SINR estimated from ``n_trials`` channel draws.

    The desired-signal mean gain ``E[h^T b]``, the total received power and
    hence the interference-plus-uncertainty term are sample averages.  The
    95% half-width comes from ``n_batches`` contiguous batch means.
    Closed-form fields are filled in alongside for comparison.
    """
    if n_trials < 100:
        raise ValueError("sinr_monte_carlo needs at least 100 trials")
    beta = np.asarray(beta, dtype=float)
    normalization = normalization or config.normalization_mode
    desired, power = [], []
    for start in range(0, n_trials, MC_CHUNK):
        trials = range(start, min(start + MC_CHUNK, n_trials))
        d, p = _mc_block(beta, pa, config, precoder, normalization, seed, trials)
        desired.append(d)
        power.append(p)
    desired = np.concatenate(desired)
    power = np.concatenate(power)
    noise = config.noise_to_signal

    gamma = _use_and_forget(desired, power, noise)
    batches = np.array_split(np.arange(n_trials), n_batches)
    per_batch = np.stack([_use_and_forget(desired[b], power[b], noise) for b in batches])
    t = stats.t.ppf(0.975, n_batches - 1)
    ci = t * per_batch.std(axis=0, ddof=1) / np.sqrt(n_batches)

    q = estimate_variance(beta, pa, config)
    cf = sinr_closed_form(beta, q, pa, config, "consistent", precoder)
    return SinrReport(cf.gamma_cf, cf.gamma_inf, gamma, ci, precoder.upper(), "consistent")


def rate_lower_bound(sinr: SinrReport, prelog: float, pilot_length: int = 0, **meta) -> RateReport:
    """Per-user rate ``prelog * log2(1 + gamma)`` for every SINR the report carries."""
    # 1 - T_p/T_c lies in (0, 1]; prelog = 1 is the overhead-free bound
    if not 0 <= prelog <= 1:
        raise ValueError(f"prelog must lie in [0, 1], got {prelog}")

    def rate(gamma):
        return None if gamma is None else prelog * np.log2(1 + gamma)

    return RateReport(prelog, pilot_length, sinr, rate(sinr.gamma_cf), rate(sinr.gamma_mc), **meta)


def rate_with_grouping(beta, config, precoder: str = "MRT", seed: int | None = None) -> RateReport:
    """Center/edge grouping, grouped pilots, closed-form SINR and overhead-aware rate."""
    if not config.grouping_enabled:
        raise ConfigError("rate_with_grouping requires grouping_enabled")
    grouping = group_users(beta, config)
    pa = allocate_pilots(config, grouping)
    q = estimate_variance(beta, pa, config)
    sinr = sinr_closed_form(beta, q, pa, config, config.sinr_mode, precoder)
    prelog = 1 - pa.pilot_length / config.coherence_block
    return rate_lower_bound(sinr, prelog, pa.pilot_length, grouping=grouping,
                            config=config.to_dict(), seed=seed)
