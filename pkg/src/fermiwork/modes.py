"""Mode frequencies shared by the Fock-space and phase-space representations."""

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .exceptions import ValidationError

# structural zeros, energy comparisons, classifier default
ZERO_TOL = 1e-10
ENERGY_TOL = 1e-9
CLASSIFY_TOL = 1e-8


@dataclass(frozen=True)
class ModeSystem:
    """Angular frequencies of ``n`` non-interacting fermionic modes.

    The order of ``omegas`` fixes the mode order everywhere: mode ``k`` owns
    Majorana operators ``2k`` and ``2k + 1`` (zero-based) and is the ``k``-th
    most significant bit of a Fock-basis index.
    """

    omegas: tuple

    def __post_init__(self):
        omegas = tuple(float(w) for w in np.atleast_1d(self.omegas))
        if not omegas:
            raise ValidationError("at least one mode is required")
        if not all(np.isfinite(w) and w > 0 for w in omegas):
            raise ValidationError(f"mode frequencies must be positive and finite, got {omegas}")
        object.__setattr__(self, "omegas", omegas)

    @property
    def n_modes(self) -> int:
        return len(self.omegas)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.omegas, dtype=float)

    def level_energies(self) -> np.ndarray:
        """Energies of all ``2**n`` occupation bitstrings in Fock-index order."""
        return bitstrings(self.n_modes) @ self.as_array()


ModesLike = Union[ModeSystem, Sequence[float], np.ndarray]


def as_modes(modes: ModesLike) -> ModeSystem:
    if isinstance(modes, ModeSystem):
        return modes
    return ModeSystem(tuple(np.atleast_1d(np.asarray(modes, dtype=float))))


def bitstrings(n_modes: int) -> np.ndarray:
    """Occupation table of shape ``(2**n, n)``; row ``i`` is the binary of ``i``, mode 0 first."""
    idx = np.arange(2**n_modes)
    shifts = np.arange(n_modes - 1, -1, -1)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(float)


def check_betas(betas, n_modes: int) -> np.ndarray:
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    if betas.ndim != 1 or betas.size != n_modes:
        raise ValidationError(f"expected {n_modes} inverse temperatures, got {betas.size}")
    if np.any(np.isnan(betas)) or np.any(betas < 0):
        raise ValidationError("inverse temperatures must be non-negative (inf allowed)")
    return betas
