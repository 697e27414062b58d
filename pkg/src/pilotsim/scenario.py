"""System configuration, hexagonal wrap-around layout and large-scale fading.

Cells sit on a hexagonal lattice with inter-site distance ``sqrt(3) * R``.
For ``L`` cells the lattice is folded onto a torus: the BS sites are the
cosets of an index-``L`` sublattice, picked to make the cluster as compact
as possible.  For hexagonal cluster sizes (1, 3, 4, 7, 9, 12, 13, 19, ...)
this is the classic wrap-around cluster; other ``L`` get the most compact
torus available.  Every cell sees the same interference neighbourhood.

Large-scale gains follow ``(d / R) ** -alpha * 10 ** (S / 10)`` with i.i.d.
log-normal shadowing ``S``.  Noise is normalized, so the configured SNRs are
the SNRs at the cell edge.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, PilotOverheadExceedsCoherence

__all__ = [
    "SystemConfig",
    "CellGeometry",
    "load_config",
    "build_layout",
    "drop_users",
    "compute_large_scale",
    "wrapped_distance",
    "hexagon_contains",
]

NORMALIZATION_MODES = ("statistical", "per-realization")
SINR_MODES = ("paper", "consistent")

# seed-stream tags; keep distinct from the per-trial tags in channel.py
_DROP_STREAM = 0x44524F50
_SHADOW_STREAM = 0x53484457
_MASK64 = 2**64 - 1


@dataclass(frozen=True)
class SystemConfig:
    """Every knob of one simulated network.

    ``prelog_loss`` is derived from the plain reuse pattern
    (``f * K / T_c``); grouped allocations compute their own overhead.
    """

    num_cells: int = 7
    users_per_cell: int = 10
    num_antennas: int = 128
    uplink_pilot_snr: float = 10.0
    downlink_snr: float = 10.0
    noise_power: float = 1.0
    coherence_block: int = 200
    pilot_reuse_factor: int = 1
    grouping_threshold: float = 1.0
    grouping_enabled: bool = False
    normalization_mode: str = "statistical"
    sinr_mode: str = "consistent"
    cell_radius: float = 500.0
    path_loss_exponent: float = 3.8
    shadowing_db: float = 8.0
    min_distance: float = 35.0

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("num_cells", "users_per_cell", "num_antennas",
                     "coherence_block", "pilot_reuse_factor"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        for name in ("uplink_pilot_snr", "downlink_snr", "noise_power",
                     "grouping_threshold", "cell_radius"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite, got {value!r}")
        if not self.path_loss_exponent > 0:
            raise ConfigError("path_loss_exponent must be positive")
        if self.shadowing_db < 0:
            raise ConfigError("shadowing_db must be non-negative")
        if not 0 <= self.min_distance < self.cell_radius * math.sqrt(3) / 2:
            raise ConfigError("min_distance must lie inside the cell's inscribed circle")
        if self.normalization_mode not in NORMALIZATION_MODES:
            raise ConfigError(f"normalization_mode must be one of {NORMALIZATION_MODES}")
        if self.sinr_mode not in SINR_MODES:
            raise ConfigError(f"sinr_mode must be one of {SINR_MODES}")
        if not isinstance(self.grouping_enabled, bool):
            raise ConfigError("grouping_enabled must be a boolean")
        if not self.grouping_enabled:
            pilot_length = self.pilot_reuse_factor * self.users_per_cell
            if pilot_length >= self.coherence_block:
                raise PilotOverheadExceedsCoherence(
                    f"pilot length f*K = {pilot_length} does not fit in "
                    f"coherence block T_c = {self.coherence_block}")

    @property
    def prelog_loss(self) -> float:
        return self.pilot_reuse_factor * self.users_per_cell / self.coherence_block

    @property
    def noise_to_signal(self) -> float:
        """``sigma^2 / rho_d``, the normalized downlink noise term."""
        return self.noise_power / self.downlink_snr

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SystemConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:  # pragma: no cover - guarded by the key check
            raise ConfigError(str(exc)) from exc


def load_config(path) -> SystemConfig:
    """Read a JSON config file; unknown keys are rejected."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return SystemConfig.from_dict(data)


@dataclass
class CellGeometry:
    """BS sites, wrap-around translations and (optionally) user positions.

    ``user_positions`` has shape ``(L, K, 2)`` once users are dropped.
    """

    cell_radius: float
    min_distance: float
    bs_positions: np.ndarray
    translations: np.ndarray
    user_positions: np.ndarray | None = field(default=None)
    layout: str = "hexagonal-wrap-around"

    @property
    def num_cells(self) -> int:
        return len(self.bs_positions)

    def bs_distances(self) -> np.ndarray:
        """Wrapped BS-to-BS distance matrix, shape ``(L, L)``."""
        return wrapped_distance(self.bs_positions[:, None, :],
                                self.bs_positions[None, :, :],
                                self.translations)

    def user_distances(self) -> np.ndarray:
        """Wrapped distance from BS ``l`` to user ``k`` of cell ``j``, shape ``(L, L, K)``."""
        if self.user_positions is None:
            raise ValueError("users have not been dropped yet")
        return wrapped_distance(self.bs_positions[:, None, None, :],
                                self.user_positions[None, :, :, :],
                                self.translations)

    def scaled(self, factor: float) -> "CellGeometry":
        users = None if self.user_positions is None else self.user_positions * factor
        return CellGeometry(self.cell_radius * factor, self.min_distance * factor,
                            self.bs_positions * factor, self.translations * factor, users)


def wrapped_distance(a, b, translations) -> np.ndarray:
    """Smallest distance between ``a`` and any translated copy of ``b``."""
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    t = np.asarray(translations, dtype=float)
    # |diff + t|^2 expanded so no (..., T, 2) intermediate is built
    sq = np.sum(diff ** 2, axis=-1)[..., None] + 2 * diff @ t.T + np.sum(t ** 2, axis=-1)
    return np.sqrt(np.maximum(np.min(sq, axis=-1), 0.0))


def hexagon_contains(points, cell_radius: float) -> np.ndarray:
    """True for offsets inside the hexagon (circumradius ``R``) around a BS.

    The hexagon has vertices at 30, 90, ... degrees so that neighbouring
    sites lie at distance ``sqrt(3) R`` along 0, 60, ... degrees.
    """
    p = np.asarray(points, dtype=float)
    apothem = cell_radius * math.sqrt(3) / 2
    inside = np.ones(p.shape[:-1], dtype=bool)
    for angle in (0.0, math.pi / 3, 2 * math.pi / 3):
        proj = p[..., 0] * math.cos(angle) + p[..., 1] * math.sin(angle)
        inside &= np.abs(proj) <= apothem * (1 + 1e-12)
    return inside


# -- lattice helpers -------------------------------------------------------

_V1 = np.array([1.0, 0.0])
_V2 = np.array([0.5, math.sqrt(3) / 2])


def _hex_norm2(a: int, b: int) -> int:
    # squared length of a*v1 + b*v2 in units of the site spacing
    return a * a + a * b + b * b


def _shortest_vector(basis) -> int:
    (a1, b1), (a2, b2) = basis
    span = 3
    return min(_hex_norm2(n1 * a1 + n2 * a2, n1 * b1 + n2 * b2)
               for n1 in range(-span, span + 1) for n2 in range(-span, span + 1)
               if n1 or n2)


def _reduce_basis(t1: np.ndarray, t2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Lagrange-Gauss reduction of a 2-D lattice basis
    if t1 @ t1 > t2 @ t2:
        t1, t2 = t2, t1
    while True:
        mu = round(float(t1 @ t2) / float(t1 @ t1))
        t2 = t2 - mu * t1
        if t2 @ t2 >= t1 @ t1:
            return t1, t2
        t1, t2 = t2, t1


@functools.lru_cache(maxsize=None)
def _coset_sites(basis, num_cells: int) -> np.ndarray:
    """One site per coset of the sublattice, each the one closest to the origin."""
    (a, _), (s, d) = basis
    reach = num_cells + 2
    reps: dict = {}
    for x in range(-reach, reach + 1):
        for y in range(-reach, reach + 1):
            n2 = y // d
            key = ((x - n2 * s) % a, y % d)
            pos = x * _V1 + y * _V2
            rank = (round(float(pos @ pos), 9), round(math.atan2(pos[1], pos[0]) % (2 * math.pi), 9), x, y)
            if key not in reps or rank < reps[key]:
                reps[key] = rank
    chosen = sorted(reps.values())
    sites = np.array([x * _V1 + y * _V2 for _, _, x, y in chosen])
    sites.flags.writeable = False  # shared through the cache
    return sites


def _sublattice_translations(basis) -> np.ndarray:
    (a, _), (s, d) = basis
    t1, t2 = _reduce_basis(a * _V1, s * _V1 + d * _V2)
    return np.array([n1 * t1 + n2 * t2 for n1 in range(-2, 3) for n2 in range(-2, 3)])


@functools.lru_cache(maxsize=None)
def _best_sublattice(num_cells: int):
    """Index-``L`` sublattice (Hermite normal form) giving the most compact torus.

    Compactness is the sum of squared wrapped distances from a site to all
    others; ties go to the longer shortest vector.  Compact clusters nest as
    ``L`` grows, so each added cell adds interference.
    """
    best = None
    for a in range(1, num_cells + 1):
        if num_cells % a:
            continue
        d = num_cells // a
        for s in range(a):
            basis = ((a, 0), (s, d))
            sites = _coset_sites(basis, num_cells)
            dist = wrapped_distance(sites[0], sites, _sublattice_translations(basis))
            key = (round(float(np.sum(dist ** 2)), 9), -_shortest_vector(basis), a, s)
            if best is None or key < best[0]:
                best = (key, basis)
    return best[1]


def build_layout(config: SystemConfig) -> CellGeometry:
    """Place ``L`` BSs on the wrap-around hexagonal grid.

    Sites are spaced ``2 R cos(30 deg)``; BS 0 sits at the origin and the
    others are ordered by distance then angle.
    """
    spacing = 2 * config.cell_radius * math.cos(math.pi / 6)
    basis = _best_sublattice(config.num_cells)
    bs = spacing * _coset_sites(basis, config.num_cells)
    translations = spacing * _sublattice_translations(basis)
    return CellGeometry(config.cell_radius, config.min_distance, bs, translations)


def drop_users(geometry: CellGeometry, config: SystemConfig, seed: int) -> CellGeometry:
    """Drop ``K`` users uniformly in every hexagonal cell, outside ``min_distance``.

    Cell ``j`` draws from its own ``(seed, j)`` stream, so a cell's users do
    not move when cells are added to the layout.
    """
    L, K = geometry.num_cells, config.users_per_cell
    R, r_min = geometry.cell_radius, geometry.min_distance
    offsets = np.empty((L, K, 2))
    for j in range(L):
        rng = np.random.default_rng([_DROP_STREAM, seed & _MASK64, j])
        got = 0
        while got < K:
            cand = rng.uniform(-R, R, size=(2 * (K - got) + 8, 2))
            ok = hexagon_contains(cand, R) & (np.hypot(cand[:, 0], cand[:, 1]) >= r_min)
            cand = cand[ok][: K - got]
            offsets[j, got:got + len(cand)] = cand
            got += len(cand)
    users = geometry.bs_positions[:, None, :] + offsets
    return dataclasses.replace(geometry, user_positions=users)


def compute_large_scale(geometry: CellGeometry, config: SystemConfig, seed: int) -> np.ndarray:
    """Large-scale gain tensor ``beta[l, j, k]`` (BS ``l`` to user ``k`` of cell ``j``)."""
    dist = geometry.user_distances()
    beta = (dist / geometry.cell_radius) ** (-config.path_loss_exponent)
    if config.shadowing_db > 0:
        # one stream per BS, read cell by cell: adding cells only appends draws
        L, _, K = dist.shape
        shadow = np.empty(dist.shape)
        for l in range(L):
            rng = np.random.default_rng([_SHADOW_STREAM, seed & _MASK64, l])
            shadow[l] = rng.normal(0.0, config.shadowing_db, size=(L, K))
        beta = beta * 10.0 ** (shadow / 10.0)
    return beta


def make_scenario(config: SystemConfig, seed: int) -> tuple[CellGeometry, np.ndarray]:
    """Layout, user drop and large-scale map for one seed."""
    geometry = drop_users(build_layout(config), config, seed)
    return geometry, compute_large_scale(geometry, config, seed)
