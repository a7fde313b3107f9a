"""Shared configuration for all truncation levels.

Every quantity in this package is computed at a finite level chosen up
front: a residue level for power classes, a matrix level for integral
matrices, a valuation window for type classification, and a separation
factor for the scale ladder used by witness constructions.
"""

from __future__ import annotations

from dataclasses import dataclass


def is_prime(k: int) -> bool:
    """Deterministic primality test by trial division (desk-scale inputs)."""
    if k < 2:
        return False
    if k < 4:
        return True
    if k % 2 == 0:
        return False
    d = 3
    while d * d <= k:
        if k % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class GlobalConfig:
    """Immutable bundle of truncation parameters.

    Attributes:
        prime: the residue characteristic p; must be prime.
        residue_level_n: level n of the power-class group K*/(K*)^n.
        matrix_level_m: matrices are tracked modulo p^m.
        valuation_window_w: classification window; differences with
            valuation beyond the window count as infinitesimal.
        ladder_gap: multiplicative separation factor between ladder rungs.
        residue_level_max: upper bound accepted for residue levels.
    """

    prime: int = 5
    residue_level_n: int = 2
    matrix_level_m: int = 1
    valuation_window_w: int = 2
    ladder_gap: int = 8
    residue_level_max: int = 12

    def __post_init__(self) -> None:
        if not is_prime(self.prime):
            raise ValueError(f"prime must be a prime number, got {self.prime}")
        if self.residue_level_n < 1:
            raise ValueError("residue_level_n must be >= 1")
        if self.residue_level_n > self.residue_level_max:
            raise ValueError(
                f"residue_level_n {self.residue_level_n} exceeds the configured "
                f"maximum {self.residue_level_max}"
            )
        if self.matrix_level_m < 1:
            raise ValueError("matrix_level_m must be >= 1")
        if self.valuation_window_w < 1:
            raise ValueError("valuation_window_w must be >= 1")
        if self.ladder_gap < 1:
            raise ValueError("ladder_gap must be >= 1")
