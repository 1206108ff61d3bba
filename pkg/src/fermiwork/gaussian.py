"""Gaussian operations on covariance matrices and Gaussian work extraction.

Gaussian unitaries act on a covariance matrix by proper orthogonal
conjugation ``G -> O G O^T``. The three generators below are the phase-space
matrices of phase rotation, two-mode squeezing and beam splitting in the
mode-interleaved ordering. Each one is the action of the *adjoint* of the
corresponding Fock-space exponential from :mod:`fermiwork.fock`, so
``extract_orthogonal_action(fock_gaussian_unitary(kind, t, ...))`` equals the
matrix built here with angle ``-t``.

For two modes the minimum energy is reached in three steps: local rotations
to standard form, a squeeze that maximizes ``a + b``, and a beam splitter
that removes the remaining correlation and orders the two Williamson values
against the frequencies.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import expm

from .covariance import (
    CovarianceMatrix,
    OrthogonalTransform,
    as_cm,
    beamsplit4,
    canonical_form,
    embed_pair,
    energy_cm,
    is_standard_form,
    rot2,
    squeeze4,
    standard_form_two_mode,
    two_mode_parameters,
)
from .exceptions import CapacityError, PatternError, ValidationError
from .modes import CLASSIFY_TOL, ZERO_TOL, ModesLike, as_modes

logger = logging.getLogger(__name__)

MAX_MODES = 8


def _check_index(i: int, n_modes: int) -> int:
    if not 0 <= int(i) < n_modes:
        raise ValidationError(f"mode index {i} out of range for {n_modes} modes")
    return int(i)


def _check_pair(pair, n_modes: int) -> Tuple[int, int]:
    p, q = (int(x) for x in pair)
    _check_index(p, n_modes)
    _check_index(q, n_modes)
    if p == q:
        raise ValidationError(f"two distinct modes required, got ({p}, {q})")
    return p, q


def rotation_matrix(theta: float, mode: int, n_modes: int) -> OrthogonalTransform:
    """``[[cos, sin], [-sin, cos]]`` on the Majorana pair of ``mode``."""
    mode = _check_index(mode, n_modes)
    o = np.eye(2 * n_modes)
    o[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2] = rot2(theta)
    return OrthogonalTransform(o)


def squeeze_matrix(r: float, modes, n_modes: int) -> OrthogonalTransform:
    """Two-mode squeezing ``[[cos r 1, -sin r Z], [sin r Z, cos r 1]]`` on a mode pair."""
    p, q = _check_pair(modes, n_modes)
    return OrthogonalTransform(embed_pair(squeeze4(r), p, q, n_modes))


def beamsplit_matrix(phi: float, modes, n_modes: int) -> OrthogonalTransform:
    """Beam splitter ``[[cos 1, -sin 1], [sin 1, cos 1]]`` on a mode pair.

    At ``phi = pi/2`` it exchanges the two modes' diagonal blocks.
    """
    p, q = _check_pair(modes, n_modes)
    return OrthogonalTransform(embed_pair(beamsplit4(phi), p, q, n_modes))


def apply(o: OrthogonalTransform, cm) -> CovarianceMatrix:
    """``O G O^T``."""
    cm = as_cm(cm)
    m = o.matrix if isinstance(o, OrthogonalTransform) else np.asarray(o, dtype=float)
    if m.shape != cm.matrix.shape:
        raise ValidationError(f"transform of shape {m.shape} for covariance matrix of shape {cm.matrix.shape}")
    out = m @ cm.matrix @ m.T
    return CovarianceMatrix(0.5 * (out - out.T))


def squeeze_stationarity(a: float, b: float, e1: float, e2: float, r: float) -> float:
    """Left side of ``(a + b) sin 2r + (e1 + e2) cos 2r = 0``."""
    return (a + b) * np.sin(2 * r) + (e1 + e2) * np.cos(2 * r)


def beamsplit_stationarity(a: float, b: float, e: float, theta: float) -> float:
    """Left side of ``(b - a) sin 2t + 2e cos 2t = 0``."""
    return (b - a) * np.sin(2 * theta) + 2 * e * np.cos(2 * theta)


def _principal_root(num: float, den: float) -> float:
    """``-arctan(num / den) / 2``, continued to ``-pi/4 sign(num)`` at ``den = 0``."""
    if den != 0:
        return float(-0.5 * np.arctan(num / den))
    if num == 0:
        return 0.0
    return float(-np.pi / 4 * np.sign(num))


def _pick_branch(angles, energies) -> Tuple[float, int]:
    """Lower-energy candidate; near-ties resolve to the smaller angle in ``[0, pi)``."""
    angles = [float(np.mod(t, np.pi)) for t in angles]
    angles = [0.0 if np.isclose(t, np.pi, rtol=0, atol=1e-15) else t for t in angles]
    scale = max(1.0, *(abs(e) for e in energies))
    if abs(energies[0] - energies[1]) <= 1e-13 * scale:
        k = int(np.argmin(angles))
    else:
        k = int(np.argmin(energies))
    return angles[k], k


def optimal_squeeze(cm_sf, modes: ModesLike) -> Tuple[float, CovarianceMatrix]:
    """Energy-minimizing squeeze of a standard-form two-mode covariance matrix.

    Stationary angles solve ``(a + b) sin 2r + (e1 + e2) cos 2r = 0``: the
    principal root ``r0 = -arctan((e1 + e2) / (a + b)) / 2`` and ``r0 + pi/2``.
    ``r0`` is the maximum whenever ``a + b < 0`` (for instance the doubly
    occupied state, where only ``r = pi/2`` empties both modes), so both roots
    are evaluated and the cheaper one is returned, reduced to ``[0, pi)``.
    """
    cm_sf, modes = as_cm(cm_sf), as_modes(modes)
    if cm_sf.n_modes != 2 or not is_standard_form(cm_sf):
        raise PatternError("optimal_squeeze expects a two-mode covariance matrix in standard form")
    a, b, e1, e2 = two_mode_parameters(cm_sf.matrix)
    r0 = _principal_root(e1 + e2, a + b)
    candidates = [r0, r0 + np.pi / 2]
    results = [apply(squeeze_matrix(r, (0, 1), 2), cm_sf) for r in candidates]
    energies = [energy_cm(g, modes) for g in results]
    r_star, k = _pick_branch(candidates, energies)
    return r_star, results[k]


def optimal_beamsplit(cm, modes: ModesLike) -> Tuple[float, CovarianceMatrix]:
    """Energy-minimizing beam splitter on the post-squeeze pattern ``(a, b, e, -e)``.

    Stationary angles solve ``(b - a) sin 2t + 2e cos 2t = 0``; both of them
    zero the inter-mode block. With unequal frequencies the one putting the
    larger Williamson value on the higher frequency is chosen. With equal
    frequencies the energy does not depend on the angle and the smaller
    stationary angle is returned.
    """
    cm, modes = as_cm(cm), as_modes(modes)
    if cm.n_modes != 2 or not is_standard_form(cm):
        raise PatternError("optimal_beamsplit expects a two-mode covariance matrix")
    a, b, e1, e2 = two_mode_parameters(cm.matrix)
    if abs(e1 + e2) > ZERO_TOL:
        raise PatternError(f"correlation block is not of the single-parameter form (e1 + e2 = {e1 + e2:.3g})")
    e = 0.5 * (e1 - e2)
    t0 = _principal_root(2 * e, b - a)
    candidates = [t0, t0 + np.pi / 2]
    results = [apply(beamsplit_matrix(t, (0, 1), 2), cm) for t in candidates]
    energies = [energy_cm(g, modes) for g in results]
    theta_star, k = _pick_branch(candidates, energies)
    return theta_star, results[k]


@dataclass(frozen=True)
class Stage:
    name: str
    param: Optional[float]
    transform: OrthogonalTransform
    cm: CovarianceMatrix
    energy: float


@dataclass(frozen=True)
class MinimizationTrace:
    """Stages of an energy minimization, starting with the untouched input.

    ``operations`` lists the elementary Gaussian steps ``(kind, angle, modes)``
    that the stage transforms are built from.
    """

    stages: List[Stage]
    operations: List[tuple] = field(default_factory=list)

    @property
    def final_cm(self) -> CovarianceMatrix:
        return self.stages[-1].cm

    @property
    def final_energy(self) -> float:
        return self.stages[-1].energy

    @property
    def initial_energy(self) -> float:
        return self.stages[0].energy

    def total_transform(self) -> OrthogonalTransform:
        total = self.stages[0].transform
        for stage in self.stages[1:]:
            total = stage.transform @ total
        return total

    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.stages])


def _two_mode_pipeline(cm: CovarianceMatrix, modes) -> MinimizationTrace:
    stages = [Stage("input", None, OrthogonalTransform.identity(2), cm, energy_cm(cm, modes))]
    o_loc, g_sf = standard_form_two_mode(cm)
    stages.append(Stage("standard_form", None, o_loc, g_sf, energy_cm(g_sf, modes)))
    r_star, g_sq = optimal_squeeze(g_sf, modes)
    stages.append(Stage("squeeze", r_star, squeeze_matrix(r_star, (0, 1), 2), g_sq, energy_cm(g_sq, modes)))
    theta_star, g_bs = optimal_beamsplit(g_sq, modes)
    stages.append(
        Stage("beamsplit", theta_star, beamsplit_matrix(theta_star, (0, 1), 2), g_bs, energy_cm(g_bs, modes))
    )
    phi_a = float(np.arctan2(o_loc.matrix[0, 1], o_loc.matrix[0, 0]))
    phi_b = float(np.arctan2(o_loc.matrix[2, 3], o_loc.matrix[2, 2]))
    ops = [
        ("rotation", phi_a, (0,)),
        ("rotation", phi_b, (1,)),
        ("squeeze", r_star, (0, 1)),
        ("beamsplit", theta_star, (0, 1)),
    ]
    return MinimizationTrace(stages, ops)


def _assignment_pipeline(cm: CovarianceMatrix, modes) -> MinimizationTrace:
    """Canonical form followed by mode exchanges that sort values against frequencies."""
    n = cm.n_modes
    start = Stage("input", None, OrthogonalTransform.identity(n), cm, energy_cm(cm, modes))
    form = canonical_form(cm)
    o = form.transform
    ops = [("canonical", None, tuple(range(n)))]
    # block k holds values[k]; it must end up on the k-th highest frequency
    target = np.argsort(-modes.as_array(), kind="stable")
    where = list(range(n))  # where[k]: block currently holding values[k]
    holder = list(range(n))  # holder[j]: value index sitting on block j
    for k in range(n):
        dest = int(target[k])
        src = where[k]
        if src == dest:
            continue
        swap = beamsplit_matrix(np.pi / 2, (src, dest), n)
        o = swap @ o
        ops.append(("beamsplit", np.pi / 2, (src, dest)))
        other = holder[dest]
        holder[src], holder[dest] = other, k
        where[other], where[k] = src, dest
    final = apply(o, cm)
    stage = Stage("williamson", None, o, final, energy_cm(final, modes))
    return MinimizationTrace([start, stage], ops)


def gaussian_minimize(cm, modes: ModesLike) -> MinimizationTrace:
    """Lower the energy with Gaussian operations until no further drop is possible.

    Two modes use the closed-form standard-form / squeeze / beam-splitter
    pipeline; any other mode count uses the canonical form followed by
    block exchanges. The final covariance matrix is block diagonal.
    """
    cm, modes = as_cm(cm), as_modes(modes)
    if modes.n_modes != cm.n_modes:
        raise ValidationError(f"{modes.n_modes} frequencies for a {cm.n_modes}-mode covariance matrix")
    if cm.n_modes == 2:
        return _two_mode_pipeline(cm, modes)
    return _assignment_pipeline(cm, modes)


def minimal_energy(cm, modes: ModesLike) -> float:
    """Lowest energy reachable by proper orthogonal conjugation.

    Sorting canonical magnitudes against sorted frequencies maximizes
    ``sum omega_j m_j``; a negative Pfaffian forces one sign flip, which lands
    on the smallest product.
    """
    cm, modes = as_cm(cm), as_modes(modes)
    if cm.n_modes > MAX_MODES:
        raise CapacityError(f"Gaussian ergotropy supports up to {MAX_MODES} modes, got {cm.n_modes}")
    if modes.n_modes != cm.n_modes:
        raise ValidationError(f"{modes.n_modes} frequencies for a {cm.n_modes}-mode covariance matrix")
    form = canonical_form(cm)
    nu = np.sort(np.abs(form.values))[::-1]
    w = np.sort(modes.as_array())[::-1]
    gains = w * nu
    if np.all(nu >= ZERO_TOL) and form.det_sign * np.prod(np.sign(form.values)) < 0:
        gains[-1] = -gains[-1]
    return float(np.sum(w) / 2 - np.sum(gains) / 2)


def gaussian_ergotropy(cm, modes: ModesLike) -> float:
    """Maximal energy drop under Gaussian unitaries, ``E(G) - min_O E(O G O^T)``."""
    return max(energy_cm(cm, modes) - minimal_energy(cm, modes), 0.0)


def is_gaussian_passive(cm, modes: ModesLike, tol: float = CLASSIFY_TOL) -> bool:
    return bool(gaussian_ergotropy(cm, modes) <= tol)


def structural_gaussian_passive(cm, modes: ModesLike, tol: float = CLASSIFY_TOL) -> bool:
    """Structural two-mode test for Gaussian passivity, read off the standard form.

    Unequal frequencies: the inter-mode block vanishes and the value on the
    higher-frequency mode dominates the other in magnitude. Equal
    frequencies: the correlation block has the single-parameter pattern
    ``e1 + e2 = 0`` and ``a + b >= 0``.
    """
    cm, modes = as_cm(cm), as_modes(modes)
    if cm.n_modes != 2:
        raise ValidationError("the structural test is defined for two modes")
    _, g_sf = standard_form_two_mode(cm)
    a, b, e1, e2 = two_mode_parameters(g_sf.matrix)
    w_a, w_b = modes.omegas
    if np.isclose(w_a, w_b, rtol=1e-12, atol=0):
        return bool(abs(e1 + e2) <= tol and a + b >= -tol)
    if max(abs(e1), abs(e2)) > tol:
        return False
    low, high = (a, b) if w_b > w_a else (b, a)
    return bool(high >= abs(low) - tol)


# -- stochastic oracle --

def _givens_batch(rng, trials: int, dim: int) -> np.ndarray:
    """Products of Givens rotations over every plane with uniform random angles."""
    o = np.broadcast_to(np.eye(dim), (trials, dim, dim)).copy()
    for i in range(dim - 1):
        for j in range(i + 1, dim):
            t = rng.uniform(0, 2 * np.pi, size=trials)
            c, s = np.cos(t)[:, None], np.sin(t)[:, None]
            ri, rj = o[:, i, :].copy(), o[:, j, :]
            o[:, i, :] = c * ri - s * rj
            o[:, j, :] = s * ri + c * rj
    return o


def _batch_energy(o: np.ndarray, g: np.ndarray, w: np.ndarray) -> np.ndarray:
    n = w.size
    even, odd = o[:, 0 : 2 * n : 2, :], o[:, 1 : 2 * n : 2, :]
    vals = np.einsum("tjk,kl,tjl->tj", even, g, odd)
    return np.sum(w / 2 * (1 - vals), axis=1)


def _energy_of(m: np.ndarray, w: np.ndarray) -> float:
    n = w.size
    return float(np.sum(w / 2 * (1 - m[2 * np.arange(n), 2 * np.arange(n) + 1])))


def _so_basis(dim: int) -> np.ndarray:
    basis = []
    for i in range(dim - 1):
        for j in range(i + 1, dim):
            x = np.zeros((dim, dim))
            x[i, j], x[j, i] = -1.0, 1.0
            basis.append(x)
    return np.array(basis)


def _newton_polish(m: np.ndarray, w: np.ndarray, max_iter: int = 100) -> float:
    """Saddle-free Newton descent of the energy along ``M -> e^X M e^-X``.

    The energy is linear in ``M``, so its gradient and Hessian in ``X`` come
    from one and two commutators with the algebra basis. Negative curvature
    directions use the absolute eigenvalue, and each step is backtracked on
    the exact energy.
    """
    dim = m.shape[0]
    n = w.size
    basis = _so_basis(dim)
    k = np.zeros((dim, dim))
    k[2 * np.arange(n), 2 * np.arange(n) + 1] = -w / 2
    e_now = _energy_of(m, w)
    for _ in range(max_iter):
        first = np.einsum("aij,jk->aik", basis, m) - np.einsum("ij,ajk->aik", m, basis)
        grad = np.einsum("ij,aij->a", k, first)
        second = np.einsum("aij,bjk->abik", basis, first) - np.einsum("bij,ajk->abik", first, basis)
        hess = np.einsum("ij,abij->ab", k, second)
        hess = 0.5 * (hess + hess.T)
        if np.linalg.norm(grad) < 1e-14:
            break
        evals, evecs = np.linalg.eigh(hess)
        floor = max(1e-12, 1e-8 * np.max(np.abs(evals)))
        step = -evecs @ ((evecs.T @ grad) / np.maximum(np.abs(evals), floor))
        improved = False
        for scale in 0.5 ** np.arange(30):
            x = np.tensordot(scale * step, basis, axes=(0, 0))
            u = expm(x)
            cand = u @ m @ u.T
            e_cand = _energy_of(cand, w)
            if e_cand < e_now:
                m, improved = 0.5 * (cand - cand.T), True
                break
        if not improved:
            break
        if e_now - e_cand < 1e-16:
            e_now = e_cand
            break
        e_now = e_cand
    return e_now


def random_orthogonal_search(
    cm, modes: ModesLike, trials: int = 10_000, seed: int = 42, refine: int = 5, batch: int = 20_000
) -> float:
    """Lowest energy found over random proper orthogonal conjugations.

    ``trials`` Givens-product rotations are sampled; the ``refine`` best are
    polished by Newton descent on the rotation group. Every reported energy belongs to an
    actual conjugation, so the result never undercuts the true minimum.
    """
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    cm, modes = as_cm(cm), as_modes(modes)
    if modes.n_modes != cm.n_modes:
        raise ValidationError(f"{modes.n_modes} frequencies for a {cm.n_modes}-mode covariance matrix")
    rng = np.random.default_rng(seed)
    g = cm.matrix
    w = modes.as_array()
    dim = g.shape[0]
    best_e = np.empty(0)
    best_o = np.empty((0, dim, dim))
    done = 0
    while done < trials:
        size = min(batch, trials - done)
        o = _givens_batch(rng, size, dim)
        e = _batch_energy(o, g, w)
        keep = np.argsort(e, kind="stable")[:refine]
        best_e = np.concatenate([best_e, e[keep]])
        best_o = np.concatenate([best_o, o[keep]])
        order = np.argsort(best_e, kind="stable")[:refine]
        best_e, best_o = best_e[order], best_o[order]
        done += size
    result = float(best_e[0])
    for o in best_o:
        result = min(result, _newton_polish(o @ g @ o.T, w))
    return result
