"""Fermionic covariance matrices and their structural algorithms.

A covariance matrix ``G`` of ``n`` modes is a real antisymmetric ``2n x 2n``
matrix with ``G[k, l] = (i/2) <[c_k, c_l]>`` for Majorana operators normalized
to ``c_k**2 = 1`` and ordered mode by mode, ``(c_1, c_2 | c_3, c_4 | ...)``.
With this normalization the vacuum block is ``[[0, 1], [-1, 0]]``, a thermal
mode has ``tanh(beta * omega / 2)`` in place of the 1, and a state is pure
exactly when ``G @ G.T`` is the identity.
"""

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .exceptions import (
    AsymmetryError,
    ConvergenceError,
    PatternError,
    UnphysicalError,
    ValidationError,
)
from .modes import ZERO_TOL, ModesLike, as_modes, check_betas

logger = logging.getLogger(__name__)

ANTISYMMETRY_TOL = 1e-12
PHYSICALITY_TOL = 1e-10
ORTHOGONALITY_TOL = 1e-12
MAX_SWEEPS = 200
SWEEP_TOL = 1e-12


def _freeze(matrix):
    arr = np.array(matrix, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class OrthogonalTransform:
    """Real orthogonal ``2n x 2n`` matrix acting on a covariance matrix as ``O G O^T``."""

    matrix: np.ndarray
    det_sign: int = field(default=0)

    def __post_init__(self):
        m = _freeze(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValidationError(f"transform must be square of even size, got {m.shape}")
        err = np.max(np.abs(m @ m.T - np.eye(m.shape[0])))
        if err > ORTHOGONALITY_TOL * 10 * m.shape[0]:
            raise ValidationError(f"matrix is not orthogonal (|OO^T - 1|_max = {err:.3g})")
        det = 1 if np.linalg.det(m) > 0 else -1
        if self.det_sign not in (0, det):
            raise ValidationError(f"det_sign {self.det_sign} does not match determinant sign {det}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "det_sign", det)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    @classmethod
    def identity(cls, n_modes: int) -> "OrthogonalTransform":
        return cls(np.eye(2 * n_modes), 1)

    def __matmul__(self, other: "OrthogonalTransform") -> "OrthogonalTransform":
        """Composition; ``(A @ B)`` applies ``B`` first."""
        return OrthogonalTransform(self.matrix @ other.matrix)

    @property
    def T(self) -> "OrthogonalTransform":
        return OrthogonalTransform(self.matrix.T)


@dataclass(frozen=True)
class CovarianceMatrix:
    """Validated covariance matrix; construction enforces antisymmetry and physicality."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 or m.shape[0] == 0:
            raise ValidationError(f"covariance matrix must be square with even size, got {m.shape}")
        asym = np.max(np.abs(m + m.T))
        if asym > ANTISYMMETRY_TOL:
            raise AsymmetryError(f"covariance matrix is not antisymmetric (|G + G^T|_max = {asym:.3g})")
        m = 0.5 * (m - m.T)
        smax = float(np.linalg.norm(m, 2))
        if smax > 1 + PHYSICALITY_TOL:
            raise UnphysicalError(
                f"covariance matrix is unphysical: max singular value {smax:.12g} > 1",
                max_singular_value=smax,
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def block_values(self) -> np.ndarray:
        """The per-mode entries ``G[2j, 2j+1]``."""
        idx = np.arange(self.n_modes)
        return self.matrix[2 * idx, 2 * idx + 1].copy()

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class CanonicalForm:
    """Block-diagonal form ``O G O^T = diag([[0, m_j], [-m_j, 0]])``."""

    transform: OrthogonalTransform
    values: np.ndarray
    det_sign: int


def validate(raw) -> CovarianceMatrix:
    """Check a raw matrix and wrap it as a :class:`CovarianceMatrix`.

    Raises :class:`AsymmetryError` or :class:`UnphysicalError`; the latter
    carries ``max_singular_value``.
    """
    if isinstance(raw, CovarianceMatrix):
        return raw
    return CovarianceMatrix(np.asarray(raw, dtype=float))


as_cm = validate


def block_matrix(values) -> np.ndarray:
    """Direct sum of ``[[0, v], [-v, 0]]`` blocks."""
    values = np.atleast_1d(np.asarray(values, dtype=float))
    n = values.size
    out = np.zeros((2 * n, 2 * n))
    idx = np.arange(n)
    out[2 * idx, 2 * idx + 1] = values
    out[2 * idx + 1, 2 * idx] = -values
    return out


def thermal_cm(betas, modes: ModesLike) -> CovarianceMatrix:
    """Covariance matrix of a product of thermal modes, ``lambda_i = tanh(beta_i omega_i / 2)``.

    ``beta = inf`` gives the vacuum block, ``beta = 0`` the maximally mixed one.
    """
    modes = as_modes(modes)
    betas = check_betas(betas, modes.n_modes)
    with np.errstate(invalid="ignore"):
        x = betas * modes.as_array() / 2
    return CovarianceMatrix(block_matrix(np.tanh(x)))


def energy_cm(cm, modes: ModesLike) -> float:
    """Mean energy ``sum_j (omega_j / 2) (1 - G[2j, 2j+1])`` of ``H = sum omega_j n_j``."""
    cm = as_cm(cm)
    modes = as_modes(modes)
    if modes.n_modes != cm.n_modes:
        raise ValidationError(f"{modes.n_modes} frequencies for a {cm.n_modes}-mode covariance matrix")
    return float(np.sum(modes.as_array() / 2 * (1 - cm.block_values())))


def is_pure(cm, tol: float = ZERO_TOL) -> bool:
    m = as_cm(cm).matrix
    return bool(np.max(np.abs(m @ m.T - np.eye(m.shape[0]))) < tol)


# -- elementary 2x2 / 4x4 actions, written in the mode-interleaved ordering --

def rot2(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def squeeze4(r: float) -> np.ndarray:
    c, s = np.cos(r), np.sin(r)
    sz = np.diag([1.0, -1.0])
    return np.block([[c * np.eye(2), -s * sz], [s * sz, c * np.eye(2)]])


def beamsplit4(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.block([[c * np.eye(2), -s * np.eye(2)], [s * np.eye(2), c * np.eye(2)]])


def embed_pair(block4: np.ndarray, p: int, q: int, n_modes: int) -> np.ndarray:
    """Embed a 4x4 action on modes ``(p, q)`` into the identity of ``2 n_modes``."""
    out = np.eye(2 * n_modes)
    idx = [2 * p, 2 * p + 1, 2 * q, 2 * q + 1]
    out[np.ix_(idx, idx)] = block4
    return out


def two_mode_parameters(matrix) -> Tuple[float, float, float, float]:
    """Read ``(a, b, e1, e2)`` from a 4x4 matrix laid out as the two-mode standard form.

    The layout is ``[[0, a, 0, -e1], [-a, 0, -e2, 0], [0, e2, 0, b], [e1, 0, -b, 0]]``;
    entries outside the pattern are ignored here.
    """
    m = np.asarray(matrix, dtype=float)
    return float(m[0, 1]), float(m[2, 3]), float(-m[0, 3]), float(-m[1, 2])


def from_two_mode_parameters(a: float, b: float, e1: float, e2: float) -> np.ndarray:
    return np.array(
        [
            [0.0, a, 0.0, -e1],
            [-a, 0.0, -e2, 0.0],
            [0.0, e2, 0.0, b],
            [e1, 0.0, -b, 0.0],
        ]
    )


def _wrap_half_pi(x: float) -> float:
    """Reduce an angle modulo pi into ``[-pi/2, pi/2]``."""
    return float(x - np.pi * np.round(x / np.pi))


def local_alignment_angles(corr: np.ndarray) -> Tuple[float, float]:
    """Angles ``(phi_a, phi_b)`` with ``rot2(phi_a) @ corr @ rot2(phi_b).T`` zero on the diagonal.

    ``corr`` is the 2x2 inter-mode block. It splits into a rotation-like part
    ``[[u, v], [-v, u]]`` moved by ``phi_a - phi_b`` and a reflection-like part
    ``[[g, h], [h, -g]]`` moved by ``phi_a + phi_b``; each is turned to be
    purely off-diagonal by the smallest angle, so an already aligned block
    gets zero angles.
    """
    (p, q), (s, t) = np.asarray(corr, dtype=float)
    u, v = (p + t) / 2, (q - s) / 2
    g, h = (p - t) / 2, (q + s) / 2
    diff = _wrap_half_pi(np.pi / 2 - np.arctan2(v, u)) if np.hypot(u, v) > 0 else 0.0
    total = _wrap_half_pi(np.arctan2(h, g) - np.pi / 2) if np.hypot(g, h) > 0 else 0.0
    return (total + diff) / 2, (total - diff) / 2


def _small_root(y: float, x: float) -> float:
    """Angle ``t`` in ``(-pi/2, pi/2]`` with ``x sin t - y cos t = 0``, zero when ``y == 0``."""
    if y == 0:
        return 0.0
    if x == 0:
        return np.pi / 2
    return float(np.arctan(y / x))


def pair_diagonalizer(m4: np.ndarray) -> np.ndarray:
    """Proper orthogonal 4x4 ``O`` with ``O m4 O^T`` block diagonal.

    Composes a local rotation into the standard-form pattern, a squeeze that
    cancels ``e1 + e2`` and a beam splitter that cancels the remaining
    correlation, each by its smallest rotation angle.
    """
    m4 = np.asarray(m4, dtype=float)
    phi_a, phi_b = local_alignment_angles(m4[0:2, 2:4])
    o = np.zeros((4, 4))
    o[0:2, 0:2] = rot2(phi_a)
    o[2:4, 2:4] = rot2(phi_b)
    m = o @ m4 @ o.T
    a, b, e1, e2 = two_mode_parameters(m)
    # squeeze: e1' + e2' = (a + b) sin 2r + (e1 + e2) cos 2r
    r = _small_root(-(e1 + e2), a + b) / 2
    s = squeeze4(r)
    o, m = s @ o, s @ m @ s.T
    a, b = m[0, 1], m[2, 3]
    e = -m[0, 3]
    # beam splitter: D = (a - b)/2 sin 2t - e cos 2t
    theta = _small_root(2 * e, a - b) / 2
    bs = beamsplit4(theta)
    return bs @ o


def _off_block_mass(m: np.ndarray) -> float:
    mask = np.ones_like(m, dtype=bool)
    n = m.shape[0] // 2
    for j in range(n):
        mask[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = False
    return float(np.sqrt(np.sum(m[mask] ** 2)))


def canonical_form(cm) -> CanonicalForm:
    """Block-diagonalize by cyclic two-mode Jacobi sweeps.

    Every sweep visits the mode pairs ``(p, q)``, ``p < q`` in lexicographic
    order and annihilates their 2x2 correlation block exactly with
    :func:`pair_diagonalizer`; the off-block Frobenius mass decreases
    monotonically. Blocks are then ordered by ``|m_j|`` descending (stable in
    the original index) and signs normalized with pairs of reflections so the
    transform stays proper: all ``m_j >= 0``, except the last (smallest) value
    when the Pfaffian is negative.
    """
    cm = as_cm(cm)
    n = cm.n_modes
    m = cm.matrix.copy()
    o_total = np.eye(2 * n)
    sweeps = 0
    while _off_block_mass(m) > SWEEP_TOL:
        if sweeps >= MAX_SWEEPS:
            raise ConvergenceError(f"canonical form did not converge in {MAX_SWEEPS} sweeps")
        for p in range(n - 1):
            for q in range(p + 1, n):
                idx = [2 * p, 2 * p + 1, 2 * q, 2 * q + 1]
                if np.max(np.abs(m[2 * p : 2 * p + 2, 2 * q : 2 * q + 2])) == 0:
                    continue
                o = embed_pair(pair_diagonalizer(m[np.ix_(idx, idx)]), p, q, n)
                m = o @ m @ o.T
                m = 0.5 * (m - m.T)
                o_total = o @ o_total
        sweeps += 1
    logger.debug("canonical form converged after %d sweeps", sweeps)

    values = m[2 * np.arange(n), 2 * np.arange(n) + 1]
    order = np.lexsort((np.arange(n), -np.round(np.abs(values), 12)))
    perm = np.zeros((2 * n, 2 * n))
    for new, old in enumerate(order):
        perm[2 * new, 2 * old] = 1
        perm[2 * new + 1, 2 * old + 1] = 1
    o_total = perm @ o_total
    values = values[order]

    flips = np.flatnonzero(values < 0).tolist()
    if len(flips) % 2:
        # keep a single negative sign, carried by the smallest value
        last = n - 1
        if flips[-1] == last:
            flips.pop()
        else:
            flips.append(last)
    signs = np.ones(2 * n)
    for j in flips:
        signs[2 * j + 1] = -1
        values[j] = -values[j]
    o_total = signs[:, None] * o_total

    transform = OrthogonalTransform(o_total)
    return CanonicalForm(transform=transform, values=values, det_sign=transform.det_sign)


def pfaffian_sign(cm) -> int:
    """Sign of the Pfaffian of ``G``, or 0 when some canonical value vanishes.

    Invariant under proper orthogonal conjugation, flipped by improper ones.
    """
    form = canonical_form(cm)
    if np.any(np.abs(form.values) < ZERO_TOL):
        return 0
    return int(form.det_sign * np.sign(np.prod(form.values)))


def standard_form_two_mode(cm) -> Tuple[OrthogonalTransform, CovarianceMatrix]:
    """Bring a two-mode covariance matrix to standard form with local rotations.

    Returns ``(O_loc, G_sf)`` where ``O_loc = rot2(phi_a) (+) rot2(phi_b)`` and
    ``G_sf = O_loc G O_loc^T`` has the pattern read by :func:`two_mode_parameters`.
    Mode energies are untouched since local rotations commute with each block.
    """
    cm = as_cm(cm)
    if cm.n_modes != 2:
        raise ValidationError(f"standard form needs exactly two modes, got {cm.n_modes}")
    phi_a, phi_b = local_alignment_angles(cm.matrix[0:2, 2:4])
    o = np.zeros((4, 4))
    o[0:2, 0:2] = rot2(phi_a)
    o[2:4, 2:4] = rot2(phi_b)
    m = o @ cm.matrix @ o.T
    for i, j in ((0, 2), (1, 3)):
        if abs(m[i, j]) > ZERO_TOL:
            raise PatternError(f"local alignment left entry ({i}, {j}) = {m[i, j]:.3g}")
        m[i, j] = m[j, i] = 0.0
    return OrthogonalTransform(o), CovarianceMatrix(m)


def is_standard_form(cm, tol: float = ZERO_TOL) -> bool:
    m = as_cm(cm).matrix
    return m.shape == (4, 4) and abs(m[0, 2]) < tol and abs(m[1, 3]) < tol
