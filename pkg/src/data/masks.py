"""
Seeded pairing masks: which views each sample actually observes.

A sample is "paired" when every view is observed and "unpaired" otherwise;
p + u = n. The paired count is round-half-up(paired_fraction * n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from src.utils.errors import ConfigError

UNPAIRED_POLICIES = ("drop-one", "keep-one")


@dataclass(frozen=True, eq=False)
class PairingMask:
    """Boolean n x V observation matrix."""

    observed: np.ndarray
    paired_fraction: float = 1.0
    seed: int = 0

    def __post_init__(self):
        observed = np.array(self.observed, dtype=bool, copy=True)
        if observed.ndim != 2 or observed.shape[0] < 1 or observed.shape[1] < 1:
            raise ConfigError(f"Pairing mask must be a non-empty n x V matrix, got shape {observed.shape}")
        empty_rows = np.flatnonzero(~observed.any(axis=1))
        if empty_rows.size:
            raise ConfigError(f"Sample {int(empty_rows[0])} has no observed view")
        observed.setflags(write=False)
        object.__setattr__(self, "observed", observed)

    @classmethod
    def complete(cls, n: int, n_views: int) -> "PairingMask":
        return cls(np.ones((n, n_views), dtype=bool), paired_fraction=1.0, seed=0)

    @property
    def n_samples(self) -> int:
        return self.observed.shape[0]

    @property
    def n_views(self) -> int:
        return self.observed.shape[1]

    @property
    def paired(self) -> np.ndarray:
        """Per-sample flag: all views observed."""
        return self.observed.all(axis=1)

    @property
    def paired_indices(self) -> np.ndarray:
        return np.flatnonzero(self.paired)

    @property
    def p(self) -> int:
        return int(self.paired.sum())

    @property
    def u(self) -> int:
        return self.n_samples - self.p

    def co_observed(self, view_a: int, view_b: int) -> np.ndarray:
        """Indices of samples observing both views."""
        return np.flatnonzero(self.observed[:, view_a] & self.observed[:, view_b])


def paired_count(n: int, paired_fraction: float) -> int:
    """round-half-up(paired_fraction * n)."""
    return int(math.floor(paired_fraction * n + 0.5))


def make_pairing_mask(
    n: int,
    paired_fraction: float,
    V: int,
    seed: int,
    unpaired_policy: str = "drop-one",
) -> PairingMask:
    """
    Draw a mask with exactly round-half-up(paired_fraction * n) fully observed rows.

    Unpaired rows follow `unpaired_policy`:
        drop-one: one uniformly chosen view is missing
        keep-one: one uniformly chosen view is observed, the rest are missing
    Both coincide for V = 2.

    Raises:
        ConfigError: paired_fraction outside (0, 1], V < 2, n < 1 or unknown policy.
    """
    if not (0.0 < paired_fraction <= 1.0):
        raise ConfigError(f"paired_fraction must be in (0, 1], got {paired_fraction}")
    if V < 2:
        raise ConfigError(f"Pairing masks need V >= 2, got {V}")
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if unpaired_policy not in UNPAIRED_POLICIES:
        raise ConfigError(f"Unknown unpaired_policy {unpaired_policy!r}; expected one of {UNPAIRED_POLICIES}")

    rng = np.random.default_rng(seed)
    p = paired_count(n, paired_fraction)
    order = rng.permutation(n)
    unpaired_rows = np.sort(order[p:])
    chosen_views = rng.integers(0, V, size=unpaired_rows.size)

    if unpaired_policy == "drop-one":
        observed = np.ones((n, V), dtype=bool)
        observed[unpaired_rows, chosen_views] = False
    else:
        observed = np.ones((n, V), dtype=bool)
        observed[unpaired_rows, :] = False
        observed[unpaired_rows, chosen_views] = True

    return PairingMask(observed=observed, paired_fraction=float(paired_fraction), seed=int(seed))
