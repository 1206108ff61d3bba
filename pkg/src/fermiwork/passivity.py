"""Passivity and activation of states diagonal in the occupation basis.

Everything here works on populations over the ``2**n`` occupation bitstrings
(mode 0 is the most significant bit) and never builds a density matrix, so
up to 16 modes are practical.
"""

from dataclasses import dataclass, field
from functools import reduce
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import CapacityError, ValidationError
from .fock import thermal_populations
from .modes import ModeSystem, ModesLike, as_modes, bitstrings, check_betas

MAX_BITS = 16
ERGOTROPY_TOL = 1e-12
# relative slack for strict comparisons of sums of floats
_STRICT = 1e-12

Bits = Tuple[int, ...]


def _check_bits(n_modes: int) -> None:
    if n_modes > MAX_BITS:
        raise CapacityError(f"occupation scans support up to {MAX_BITS} modes, got {n_modes}")


@dataclass(frozen=True)
class DiagonalState:
    """Populations of the occupation basis states, normalized and non-negative."""

    populations: np.ndarray
    modes: ModeSystem

    def __post_init__(self):
        modes = as_modes(self.modes)
        _check_bits(modes.n_modes)
        p = np.array(self.populations, dtype=float, copy=True).ravel()
        if p.size != 2**modes.n_modes:
            raise ValidationError(f"{modes.n_modes} modes need {2**modes.n_modes} populations, got {p.size}")
        if np.any(p < 0):
            raise ValidationError("populations must be non-negative")
        if abs(p.sum() - 1) > 1e-12:
            raise ValidationError(f"populations sum to {p.sum():.15g}, expected 1")
        p.setflags(write=False)
        object.__setattr__(self, "populations", p)
        object.__setattr__(self, "modes", modes)

    @property
    def n_modes(self) -> int:
        return self.modes.n_modes

    @classmethod
    def thermal(cls, betas, modes: ModesLike) -> "DiagonalState":
        modes = as_modes(modes)
        _check_bits(modes.n_modes)
        return cls(thermal_populations(betas, modes), modes)

    def energies(self) -> np.ndarray:
        return self.modes.level_energies()

    def tensor_power(self, k: int) -> "DiagonalState":
        """``k`` independent copies, the copies' modes concatenated in order."""
        if k < 1:
            raise ValidationError("copy number must be positive")
        _check_bits(self.n_modes * k)
        pops = reduce(np.kron, [self.populations] * k)
        return DiagonalState(pops / pops.sum(), ModeSystem(self.modes.omegas * k))


@dataclass(frozen=True)
class ActivationReport:
    """Outcome of a passivity query.

    A witness ``(s, s')`` has ``energy(s') > energy(s)`` while
    ``population(s') > population(s)``; exchanging the two releases
    ``work_gain > 0``.
    """

    passive: bool
    witness: Optional[Tuple[Bits, Bits]]
    work_gain: float
    k_used: int
    ergotropy: float = 0.0


@dataclass(frozen=True)
class ProtocolCondition:
    name: str
    status: str  # "satisfied", "violated" or "vacuous"
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "violated"


def to_bits(index: int, n_modes: int) -> Bits:
    return tuple(int(c) for c in format(int(index), f"0{n_modes}b"))


def to_index(bits: Sequence[int]) -> int:
    bits = [int(b) for b in bits]
    if not bits or any(b not in (0, 1) for b in bits):
        raise ValidationError(f"invalid bitstring {bits}")
    return int("".join(map(str, bits)), 2)


def format_bits(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def sorted_ergotropy(populations, energies) -> float:
    """``sum p_k E_k`` minus the energy with populations descending on levels ascending."""
    p = np.asarray(populations, dtype=float).ravel()
    e = np.asarray(energies, dtype=float).ravel()
    if p.shape != e.shape:
        raise ValidationError(f"{p.size} populations for {e.size} levels")
    passive = np.sort(p)[::-1] @ np.sort(e)
    return max(float(p @ e - passive), 0.0)


def diagonal_ergotropy(state: DiagonalState) -> float:
    return sorted_ergotropy(state.populations, state.energies())


def _log_weights(betas, modes: ModeSystem) -> np.ndarray:
    """``sum_i s_i beta_i omega_i`` per bitstring; populations are ``exp(-.) / Z``."""
    betas = check_betas(betas, modes.n_modes)
    bits = bitstrings(modes.n_modes).astype(bool)
    # empty modes contribute nothing even at infinite beta
    return np.where(bits, betas * modes.as_array(), 0.0).sum(axis=1)


def _cluster(v: np.ndarray, tol: float) -> np.ndarray:
    """Integer ids for ``v`` where neighbours closer than ``tol`` share an id (rounding-noise ties)."""
    order = np.argsort(v, kind="stable")
    sv = v[order]
    with np.errstate(invalid="ignore"):
        steps = np.diff(sv) > tol
    ids = np.empty(v.size, dtype=np.int64)
    ids[order] = np.concatenate([[0], np.cumsum(steps)])
    return ids


def _frontier(x: np.ndarray, y: np.ndarray, lower: bool) -> np.ndarray:
    """Indices not strictly dominated (lower-left when ``lower``, else upper-right).

    Of points sharing both coordinates only the smallest index is kept; it is the
    one lexicographic tie-breaking would pick.
    """
    if not lower:
        x, y = -x, -y
    order = np.lexsort((np.arange(x.size), y, x))
    keep = []
    best_y = None  # smallest y among points with strictly smaller x
    i = 0
    while i < order.size:
        j = i
        while j < order.size and x[order[j]] == x[order[i]]:
            j += 1
        first = int(order[i])  # smallest y in the group, then smallest index
        if best_y is None or y[first] < best_y:
            keep.append(first)
            best_y = y[first]
        i = j
    return np.array(sorted(keep), dtype=int)


def nonpassivity_witness(betas, modes: ModesLike) -> Optional[Tuple[Bits, Bits]]:
    """Best population inversion of a product of thermal modes, or ``None``.

    Returns ``(s, s')`` with ``sum s_i beta_i omega_i > sum s'_i beta_i omega_i``
    (so ``s'`` is more populated) and ``sum s'_i omega_i > sum s_i omega_i``.
    Among all such pairs the one with the largest swap work is returned,
    ties going to the lexicographically first ``(s, s')``.
    """
    modes = as_modes(modes)
    _check_bits(modes.n_modes)
    pops = thermal_populations(betas, modes)
    energies = modes.level_energies()
    logw = _log_weights(betas, modes)
    e_tol = _STRICT * max(1.0, np.max(np.abs(energies)))
    w_tol = _STRICT * max(1.0, np.max(np.abs(logw[np.isfinite(logw)]), initial=0.0))

    # a best pair always has s on the low (energy, population) frontier and s' on the high one;
    # coordinates are clustered first so that symmetric ties survive rounding noise
    e_id = _cluster(energies, e_tol)
    p_id = -_cluster(logw, w_tol)
    lows = _frontier(e_id, p_id, lower=True)
    highs = _frontier(e_id, p_id, lower=False)
    e_s, e_p = energies[lows][:, None], energies[highs][None, :]
    w_s, w_p = logw[lows][:, None], logw[highs][None, :]
    with np.errstate(invalid="ignore"):
        valid = (e_p - e_s > e_tol) & (w_s - w_p > w_tol)
    if not valid.any():
        return None
    gain = np.where(valid, (e_p - e_s) * (pops[highs][None, :] - pops[lows][:, None]), -np.inf)
    top = gain.max()
    ties = np.argwhere(gain >= top - 1e-15 * max(1.0, abs(top)))
    pairs = sorted((int(lows[i]), int(highs[j])) for i, j in ties)
    s, s_prime = pairs[0]
    n = modes.n_modes
    return to_bits(s, n), to_bits(s_prime, n)


def activation_work(betas, modes: ModesLike, swap, normalized: bool = True) -> float:
    """Work released by exchanging two occupation states of a thermal product.

    ``W = (E_s' - E_s) (p_s' - p_s)``. With ``normalized=False`` the Boltzmann
    weights ``exp(-sum s_i beta_i omega_i)`` replace the populations, i.e. the
    result is multiplied by the partition function.
    """
    modes = as_modes(modes)
    _check_bits(modes.n_modes)
    s, s_prime = swap
    if len(s) != modes.n_modes or len(s_prime) != modes.n_modes:
        raise ValidationError(f"bitstrings must have {modes.n_modes} entries")
    i, j = to_index(s), to_index(s_prime)
    energies = modes.level_energies()
    if normalized:
        weights = thermal_populations(betas, modes)
    else:
        weights = np.exp(-_log_weights(betas, modes))
    return float((energies[j] - energies[i]) * (weights[j] - weights[i]))


def is_thermal(betas, modes: ModesLike, rtol: float = 1e-12) -> bool:
    """Product of modes sharing one inverse temperature, i.e. a Gibbs state of the total Hamiltonian."""
    modes = as_modes(modes)
    betas = check_betas(betas, modes.n_modes)
    return bool(np.allclose(betas, betas[0], rtol=rtol, atol=0))


def protocol_check(swap, betas, modes: Optional[ModesLike] = None) -> List[ProtocolCondition]:
    """Evaluate the four activation-protocol rules for exchanging ``s`` and ``s'``.

    1. the initial state ``s`` is neither all empty nor all occupied;
    2. the flipped modes exchange population: some go occupied to empty and
       some empty to occupied;
    3. the flipped modes that start empty carry a smaller ``sum beta omega``
       than the flipped modes that start occupied;
    4. modes left alone do not influence whether the exchange releases work.

    ``modes`` defaults to unit frequencies.
    """
    s, s_prime = (tuple(int(b) for b in x) for x in swap)
    n = len(s)
    if len(s_prime) != n:
        raise ValidationError("bitstrings must have equal length")
    to_index(s), to_index(s_prime)
    modes = as_modes(modes if modes is not None else np.ones(n))
    betas = check_betas(betas, n)
    bw = betas * modes.as_array()
    flipped = [i for i in range(n) if s[i] != s_prime[i]]
    untouched = [i for i in range(n) if s[i] == s_prime[i]]
    out = []

    extreme = all(b == 0 for b in s) or all(b == 1 for b in s)
    out.append(
        ProtocolCondition(
            "mixed initial occupation",
            "violated" if extreme else "satisfied",
            f"initial state |{format_bits(s)}>",
        )
    )
    if not flipped:
        for name in ("population exchange", "inverse-temperature ordering", "untouched modes irrelevant"):
            out.append(ProtocolCondition(name, "vacuous", "no mode is flipped"))
        return out

    emptied = [i for i in flipped if s[i] == 1]
    filled = [i for i in flipped if s[i] == 0]
    out.append(
        ProtocolCondition(
            "population exchange",
            "satisfied" if emptied and filled else "violated",
            f"occupied->empty modes {emptied}, empty->occupied modes {filled}",
        )
    )
    cold = float(np.sum(bw[filled]))
    hot = float(np.sum(bw[emptied]))
    out.append(
        ProtocolCondition(
            "inverse-temperature ordering",
            "satisfied" if cold < hot else "violated",
            f"sum over initially empty {cold:.12g} vs initially occupied {hot:.12g}",
        )
    )
    # ratio of the two weights only involves flipped modes
    if untouched:
        ref = activation_work(betas, modes, (s, s_prime))
        perturbed = betas.copy()
        perturbed[untouched] = perturbed[untouched] * 2 + 1
        alt = activation_work(perturbed, modes, (s, s_prime))
        same = np.sign(ref) == np.sign(alt)
        out.append(
            ProtocolCondition(
                "untouched modes irrelevant",
                "satisfied" if same else "violated",
                f"untouched modes {untouched}",
            )
        )
    else:
        out.append(ProtocolCondition("untouched modes irrelevant", "vacuous", "every mode is flipped"))
    return out


def analyze_thermal(betas, modes: ModesLike) -> ActivationReport:
    """Passivity verdict and best witness for a single thermal product."""
    state = DiagonalState.thermal(betas, modes)
    erg = diagonal_ergotropy(state)
    witness = nonpassivity_witness(betas, modes)
    gain = activation_work(betas, modes, witness) if witness else 0.0
    return ActivationReport(passive=witness is None, witness=witness, work_gain=gain, k_used=1, ergotropy=erg)


def activation_number(single_copy: DiagonalState, k_max: int) -> Optional[int]:
    """Smallest ``k <= k_max`` whose ``k``-fold tensor power has positive ergotropy."""
    if k_max < 1:
        raise ValidationError("k_max must be at least 1")
    if single_copy.n_modes * k_max > MAX_BITS:
        raise CapacityError(
            f"{k_max} copies of {single_copy.n_modes} modes exceed the {MAX_BITS}-mode scan limit"
        )
    for k in range(1, k_max + 1):
        if diagonal_ergotropy(single_copy.tensor_power(k)) > ERGOTROPY_TOL:
            return k
    return None
