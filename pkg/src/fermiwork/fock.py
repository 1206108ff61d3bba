"""Dense Fock-space representation of ``n <= 8`` fermionic modes.

Operators are built with the Jordan-Wigner construction: the annihilator of
mode ``k`` acts as ``|0><1|`` on tensor factor ``k`` with ``Z`` strings on the
factors before it. Basis index ``i`` is the bitstring of ``i`` with mode 0 as
the most significant bit. Majorana operators are ``c_{2k} = a_k + a_k^+`` and
``c_{2k+1} = i (a_k - a_k^+)`` (zero-based), so ``c**2 = 1`` and
``i c_{2k} c_{2k+1} = 1 - 2 n_k``.
"""

from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.linalg import expm
from scipy.special import expit

from .covariance import CovarianceMatrix, OrthogonalTransform, as_cm, canonical_form
from .exceptions import CapacityError, FermiworkError, RepresentationError, ValidationError
from .modes import ModesLike, as_modes, bitstrings, check_betas

MAX_MODES = 8
STATE_TOL = 1e-12

_I2 = np.eye(2, dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_LOWER = np.array([[0, 1], [0, 0]], dtype=complex)


def _check_capacity(n_modes: int) -> int:
    n_modes = int(n_modes)
    if not 1 <= n_modes <= MAX_MODES:
        raise CapacityError(
            f"Fock-space routines support 1 to {MAX_MODES} modes, got {n_modes}; "
            "use the covariance-matrix routines for larger systems"
        )
    return n_modes


def _n_from_dim(dim: int) -> int:
    n = int(round(np.log2(dim))) if dim > 0 else -1
    if n < 1 or 2**n != dim:
        raise ValidationError(f"dimension {dim} is not a power of two")
    return _check_capacity(n)


@dataclass(frozen=True)
class FockOperator:
    n_modes: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, copy=True)
        if m.shape != (2**self.n_modes, 2**self.n_modes):
            raise ValidationError(f"operator on {self.n_modes} modes must be {2**self.n_modes}-dimensional")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def H(self) -> "FockOperator":
        return FockOperator(self.n_modes, self.matrix.conj().T)

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.n_modes, self.matrix @ other.matrix)


@dataclass(frozen=True)
class FockState:
    """Density operator: Hermitian, unit trace, positive and parity even."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"density matrix must be square, got {m.shape}")
        n = _n_from_dim(m.shape[0])
        herm = np.max(np.abs(m - m.conj().T))
        if herm > STATE_TOL:
            raise ValidationError(f"density matrix is not Hermitian (deviation {herm:.3g})")
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if abs(tr - 1) > STATE_TOL:
            raise ValidationError(f"density matrix trace is {tr:.15g}, expected 1")
        lo = np.linalg.eigvalsh(m)[0]
        if lo < -STATE_TOL:
            raise ValidationError(f"density matrix has negative eigenvalue {lo:.3g}")
        par = parity_diagonal(n)
        odd = np.max(np.abs(m[np.not_equal.outer(par, par)]), initial=0.0)
        if odd > STATE_TOL:
            raise ValidationError(f"density matrix mixes parity sectors (coherence {odd:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_modes(self) -> int:
        return int(round(np.log2(self.matrix.shape[0])))


StateLike = Union[FockState, np.ndarray]
OperatorLike = Union[FockOperator, np.ndarray]


def as_state(state: StateLike) -> FockState:
    return state if isinstance(state, FockState) else FockState(state)


def _as_matrix(op: OperatorLike) -> np.ndarray:
    return op.matrix if isinstance(op, (FockOperator, FockState)) else np.asarray(op, dtype=complex)


def parity_diagonal(n_modes: int) -> np.ndarray:
    """Diagonal of ``prod_k (1 - 2 n_k)``."""
    return 1 - 2 * (bitstrings(n_modes).sum(axis=1) % 2)


@lru_cache(maxsize=None)
def _annihilators(n_modes: int) -> Tuple[np.ndarray, ...]:
    ops = []
    for k in range(n_modes):
        factors = [_Z] * k + [_LOWER] + [_I2] * (n_modes - k - 1)
        op = reduce(np.kron, factors)
        op.setflags(write=False)
        ops.append(op)
    return tuple(ops)


def annihilation_ops(n_modes: int) -> list:
    n_modes = _check_capacity(n_modes)
    return [FockOperator(n_modes, a) for a in _annihilators(n_modes)]


@lru_cache(maxsize=None)
def _majoranas(n_modes: int) -> Tuple[np.ndarray, ...]:
    out = []
    for a in _annihilators(n_modes):
        ad = a.conj().T
        for op in (a + ad, 1j * (a - ad)):
            op.setflags(write=False)
            out.append(op)
    return tuple(out)


def majorana_ops(n_modes: int) -> list:
    """The ``2n`` Majorana operators in mode-interleaved order."""
    n_modes = _check_capacity(n_modes)
    return [FockOperator(n_modes, c) for c in _majoranas(n_modes)]


def hamiltonian(modes: ModesLike) -> FockOperator:
    """``H = sum_k omega_k a_k^+ a_k``; diagonal with entry ``sum_k s_k omega_k`` on ``|s>``."""
    modes = as_modes(modes)
    n = _check_capacity(modes.n_modes)
    return FockOperator(n, np.diag(modes.level_energies()).astype(complex))


def basis_state(bits: Sequence[int]) -> FockState:
    """Pure occupation-number state ``|s_1 ... s_n>``."""
    bits = [int(b) for b in bits]
    n = _check_capacity(len(bits))
    if any(b not in (0, 1) for b in bits):
        raise ValidationError(f"occupations must be 0 or 1, got {bits}")
    rho = np.zeros((2**n, 2**n), dtype=complex)
    i = int("".join(map(str, bits)), 2)
    rho[i, i] = 1
    return FockState(rho)


def thermal_populations(betas, modes: ModesLike) -> np.ndarray:
    """Fock-basis populations of the thermal product ``tau(beta_1) x ... x tau(beta_n)``."""
    modes = as_modes(modes)
    betas = check_betas(betas, modes.n_modes)
    p1 = expit(-betas * modes.as_array())
    per_mode = [np.array([1 - p, p]) for p in p1]
    return reduce(np.kron, per_mode)


def thermal_state(betas, modes: ModesLike) -> FockState:
    modes = as_modes(modes)
    _check_capacity(modes.n_modes)
    return FockState(np.diag(thermal_populations(betas, modes)).astype(complex))


def _check_dims(state: FockState, modes) -> None:
    if state.n_modes != modes.n_modes:
        raise ValidationError(f"{modes.n_modes} frequencies for a {state.n_modes}-mode state")


def energy(state: StateLike, modes: ModesLike) -> float:
    """``Tr[H rho]``."""
    state, modes = as_state(state), as_modes(modes)
    _check_dims(state, modes)
    return float(np.real(np.diagonal(state.matrix)) @ modes.level_energies())


def passive_energy(state: StateLike, modes: ModesLike) -> float:
    """Energy after sorting eigenvalues descending onto levels ascending."""
    state, modes = as_state(state), as_modes(modes)
    _check_dims(state, modes)
    probs = np.sort(np.linalg.eigvalsh(state.matrix))[::-1]
    return float(probs @ np.sort(modes.level_energies()))


def ergotropy(state: StateLike, modes: ModesLike) -> float:
    """Maximal work extractable by any unitary, ``Tr[H rho] - Tr[H rho_passive]``."""
    return max(energy(state, modes) - passive_energy(state, modes), 0.0)


def is_passive(state: StateLike, modes: ModesLike, tol: float = 1e-8) -> bool:
    """True when no unitary lowers the energy: zero ergotropy and ``[rho, H] = 0``."""
    state, modes = as_state(state), as_modes(modes)
    h = hamiltonian(modes).matrix
    comm = np.max(np.abs(state.matrix @ h - h @ state.matrix))
    return bool(ergotropy(state, modes) <= tol and comm <= tol)


def entropy(state: StateLike) -> float:
    """Von Neumann entropy in nats."""
    p = np.linalg.eigvalsh(as_state(state).matrix)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def free_energy(state: StateLike, modes: ModesLike, temperature: float) -> float:
    """``F = E - T S``."""
    if not temperature > 0:
        raise ValidationError(f"temperature must be positive, got {temperature}")
    return energy(state, modes) - temperature * entropy(state)


def density_to_cm(state: StateLike) -> CovarianceMatrix:
    """Second moments ``G[k, l] = (i/2) Tr(rho [c_k, c_l])``."""
    state = as_state(state)
    rho = state.matrix
    cs = _majoranas(state.n_modes)
    # Tr(rho c_k c_l) for all pairs; rho c_k precomputed once
    rc = [rho @ c for c in cs]
    m = len(cs)
    g = np.zeros((m, m), dtype=complex)
    for k in range(m):
        for l in range(k + 1, m):
            val = 0.5j * (np.sum(rc[k] * cs[l].T) - np.sum(rc[l] * cs[k].T))
            g[k, l], g[l, k] = val, -val
    residue = np.max(np.abs(g.imag))
    if residue > 1e-10:
        raise FermiworkError(f"covariance matrix has imaginary residue {residue:.3g}")
    return CovarianceMatrix(g.real)


def cm_to_density(cm) -> FockState:
    """Gaussian state with covariance matrix ``cm``.

    With ``O G O^T = diag(m_j J)`` from :func:`canonical_form` and rotated
    Majoranas ``d = O c``, the state is ``2^-n prod_j (1 + i m_j d_{2j} d_{2j+1})``.
    """
    cm = as_cm(cm)
    n = _check_capacity(cm.n_modes)
    form = canonical_form(cm)
    o = form.transform.matrix
    cs = np.array(_majoranas(n))
    d = np.tensordot(o, cs, axes=(1, 0))
    dim = 2**n
    rho = np.eye(dim, dtype=complex)
    for j, mj in enumerate(np.clip(form.values, -1, 1)):
        rho = rho @ (np.eye(dim) + 1j * mj * d[2 * j] @ d[2 * j + 1])
    return FockState(rho / dim)


GAUSSIAN_KINDS = ("rotation", "squeeze", "beamsplit")


def fock_gaussian_unitary(kind: str, angle: float, mode_pair, n_modes: int) -> FockOperator:
    """Exponentials of the quadratic generators.

    ``rotation``: ``exp(-i angle a^+ a)`` on ``mode_pair`` (a single index or a
    one-element sequence). ``squeeze``: ``exp(angle (a b - b^+ a^+))``.
    ``beamsplit``: ``exp(angle (a b^+ + a^+ b))``. ``a`` and ``b`` are the
    annihilators of the first and second index of ``mode_pair``.
    """
    n = _check_capacity(n_modes)
    idx = [int(i) for i in np.atleast_1d(mode_pair)]
    if any(not 0 <= i < n for i in idx):
        raise ValidationError(f"mode indices {idx} out of range for {n} modes")
    ops = _annihilators(n)
    if kind == "rotation":
        if len(idx) != 1:
            raise ValidationError("rotation acts on a single mode")
        a = ops[idx[0]]
        gen = -1j * angle * (a.conj().T @ a)
    elif kind in ("squeeze", "beamsplit"):
        if len(idx) != 2 or idx[0] == idx[1]:
            raise ValidationError(f"{kind} needs two distinct modes, got {idx}")
        a, b = ops[idx[0]], ops[idx[1]]
        ad, bd = a.conj().T, b.conj().T
        gen = angle * (a @ b - bd @ ad) if kind == "squeeze" else angle * (a @ bd + ad @ b)
    else:
        raise ValidationError(f"unknown Gaussian unitary kind {kind!r}; expected one of {GAUSSIAN_KINDS}")
    return FockOperator(n, expm(gen))


def extract_orthogonal_action(u: OperatorLike) -> OrthogonalTransform:
    """Matrix ``O`` with ``U^+ c_k U = sum_l O[k, l] c_l``.

    With this ``O`` the state map ``rho -> U rho U^+`` acts on covariance
    matrices as ``G -> O G O^T``.
    """
    u = _as_matrix(u)
    n = _n_from_dim(u.shape[0])
    dim = 2**n
    if np.max(np.abs(u.conj().T @ u - np.eye(dim))) > 1e-10:
        raise ValidationError("operator is not unitary")
    cs = _majoranas(n)
    o = np.zeros((2 * n, 2 * n), dtype=complex)
    for k, ck in enumerate(cs):
        heis = u.conj().T @ ck @ u
        for l, cl in enumerate(cs):
            o[k, l] = np.trace(cl @ heis) / dim
        resid = heis - np.tensordot(o[k], np.array(cs), axes=(0, 0))
        if np.max(np.abs(resid)) > 1e-10:
            raise RepresentationError(f"U^+ c_{k} U leaves the Majorana span (residual {np.max(np.abs(resid)):.3g})")
    if np.max(np.abs(o.imag)) > 1e-10:
        raise RepresentationError("conjugation mixes Majoranas with complex coefficients")
    return OrthogonalTransform(o.real)


def activation_unitary_3mode(n_modes: int = 3) -> FockOperator:
    """Self-inverse permutation exchanging ``|010>`` and ``|101>``."""
    if n_modes != 3:
        raise ValidationError("the activation unitary is defined on three modes")
    u = np.eye(8, dtype=complex)
    u[[2, 5]] = u[[5, 2]]
    return FockOperator(3, u)


def basis_swap(s: Sequence[int], s_prime: Sequence[int]) -> FockOperator:
    """Permutation unitary exchanging two occupation basis states."""
    if len(s) != len(s_prime):
        raise ValidationError("bitstrings must have equal length")
    n = _check_capacity(len(s))
    i = int("".join(str(int(b)) for b in s), 2)
    j = int("".join(str(int(b)) for b in s_prime), 2)
    u = np.eye(2**n, dtype=complex)
    u[[i, j]] = u[[j, i]]
    return FockOperator(n, u)


def work_extracted(state: StateLike, u: OperatorLike, modes: ModesLike) -> float:
    """``Tr[H (rho - U rho U^+)]``; negative when ``U`` charges the system."""
    state, modes = as_state(state), as_modes(modes)
    _check_dims(state, modes)
    u = _as_matrix(u)
    h = hamiltonian(modes).matrix
    after = u @ state.matrix @ u.conj().T
    return float(np.real(np.trace(h @ (state.matrix - after))))
