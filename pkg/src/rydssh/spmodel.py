"""Single-particle sector of the dimerized hopping model.

The one-particle Hamiltonian is ``H_ij = -J_ij``. Everything here works on
dense matrices since chains stay below a few hundred sites.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .geometry import CouplingMatrix, build_magic_chain, coupling_matrix, nearest_neighbor_chain


class EdgeModeAmbiguity(ValueError):
    """More than two modes fall inside the requested energy window."""


@dataclass(frozen=True)
class SingleParticleSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    chiral_residual: float

    @property
    def n(self):
        return len(self.eigenvalues)


@dataclass(frozen=True)
class EdgeModeReport:
    indices: tuple
    energies: np.ndarray
    weights: np.ndarray  # shape (n_modes, n_sites)
    localization_length: float
    e_hyb: float

    @property
    def n_modes(self):
        return len(self.indices)


def hamiltonian_matrix(J):
    values = J.values if isinstance(J, CouplingMatrix) else np.asarray(J, dtype=float)
    return -np.array(values, dtype=float)


def chiral_operator(n):
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def chiral_residual(J):
    """Max-norm of ``U_S H U_S + H``: twice the largest same-sublattice hop."""
    H = hamiltonian_matrix(J)
    u = chiral_operator(H.shape[0])
    return float(np.max(np.abs(u[:, None] * H * u[None, :] + H), initial=0.0))


def fix_gauge(vectors):
    """Flip each column so its largest-magnitude component is positive."""
    v = np.array(vectors)
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def diagonalize(J):
    H = hamiltonian_matrix(J)
    w, v = scipy.linalg.eigh(H)
    return SingleParticleSpectrum(w, fix_gauge(v), chiral_residual(J))


def _localization_length(weights):
    """Decay length (sites) of the summed edge weights from the nearest end.

    Fits ``log w`` against the distance to the closer chain end on the
    sublattice carrying each mode, ignoring weights below 1e-12.
    """
    n = weights.shape[1]
    dist, logs = [], []
    for w in weights:
        dominant = 0 if w[0::2].sum() >= w[1::2].sum() else 1
        sites = np.arange(dominant, n, 2)
        # measure distance from the end where the mode sits
        left = w[sites[: len(sites) // 2]].sum() >= w[sites[len(sites) // 2 :]].sum()
        d = sites if left else (n - 1 - sites)
        keep = w[sites] > 1e-12
        dist.extend(d[keep])
        logs.extend(np.log(w[sites][keep]))
    dist, logs = np.asarray(dist, float), np.asarray(logs)
    if len(np.unique(dist)) < 2:
        return 0.0
    slope = np.polyfit(dist, logs, 1)[0]
    if slope >= 0:
        return float("inf")
    # weights decay as |psi|^2 ~ exp(-2 x / xi)
    return float(-2.0 / slope)


def edge_modes(spec, energy_window=None):
    """Mid-gap modes of ``spec``.

    Without a window the two eigenvalues closest to zero are taken, provided
    they sit inside the gap of the remaining spectrum (otherwise the report is
    empty, as for a trivially terminated chain). ``e_hyb`` is their difference.
    """
    w = spec.eigenvalues
    order = np.argsort(np.abs(w), kind="stable")
    if energy_window is not None:
        inside = [int(k) for k in order if abs(w[k]) <= energy_window]
        if len(inside) > 2:
            raise EdgeModeAmbiguity(
                f"{len(inside)} modes within |E| <= {energy_window} MHz; shrink the window"
            )
    else:
        inside = [int(k) for k in order[:2]] if len(w) >= 4 else []
        if inside:
            # isolated mid-gap pair: well separated from the remaining levels
            rest = np.abs(np.delete(w, inside))
            if not np.max(np.abs(w[inside])) < 0.25 * rest.min():
                inside = []
    inside = sorted(inside, key=lambda k: w[k])
    if not inside:
        return EdgeModeReport((), np.zeros(0), np.zeros((0, spec.n)), 0.0, 0.0)
    vecs = spec.eigenvectors[:, inside]
    # rotate the hybridized pair into sublattice-polarized (edge-localized) modes
    if len(inside) == 2:
        u = chiral_operator(spec.n)
        _, rot = np.linalg.eigh(vecs.T @ (u[:, None] * vecs))
        vecs = vecs @ rot
    weights = (np.abs(vecs) ** 2).T
    weights = weights / weights.sum(axis=1, keepdims=True)
    e_hyb = float(w[inside[-1]] - w[inside[0]]) if len(inside) == 2 else 0.0
    return EdgeModeReport(tuple(inside), w[inside].copy(), weights, _localization_length(weights), e_hyb)


def mid_gap_splitting(J):
    """Difference of the two eigenvalues closest to zero."""
    w = np.linalg.eigvalsh(hamiltonian_matrix(J))
    pair = np.sort(w[np.argsort(np.abs(w), kind="stable")[:2]])
    return float(pair[1] - pair[0])


def bloch_hamiltonian(J, k):
    """2x2 Bloch matrix of the two-site unit cell around the chain centre.

    Hoppings are read from the central cell to every other cell, so
    longer-range terms are included up to the chain half-length.
    """
    H = hamiltonian_matrix(J)
    n_cells = H.shape[0] // 2
    m = n_cells // 2
    h = np.zeros((2, 2), dtype=complex)
    for d in range(-m, n_cells - m):
        if abs(d) > min(m, n_cells - 1 - m):
            continue
        h += H[2 * m : 2 * m + 2, 2 * (m + d) : 2 * (m + d) + 2] * np.exp(1j * k * d)
    return h


def band_gap(J, n_k=2049):
    """Gap between the two bulk bands of the periodic extension of ``J``."""
    ks = np.linspace(-np.pi, np.pi, n_k)
    bands = np.array([np.linalg.eigvalsh(bloch_hamiltonian(J, k)) for k in ks])
    k0 = ks[np.argmin(bands[:, 1] - bands[:, 0])]

    def gap(k):
        e = np.linalg.eigvalsh(bloch_hamiltonian(J, k))
        return e[1] - e[0]

    step = ks[1] - ks[0]
    res = scipy.optimize.minimize_scalar(gap, bounds=(k0 - step, k0 + step), method="bounded",
                                         options={"xatol": 1e-12})
    return float(min(gap(k0), res.fun))


def open_chain_gap(J):
    """Gap between the bulk levels of the open chain, skipping a mid-gap pair."""
    w = np.sort(np.linalg.eigvalsh(hamiltonian_matrix(J)))
    half = len(w) // 2
    if edge_modes(SingleParticleSpectrum(w, np.eye(len(w)), 0.0)).n_modes == 2:
        return float(w[half + 1] - w[half - 2])
    return float(w[half] - w[half - 1])


@dataclass(frozen=True)
class HybridizationScan:
    n: np.ndarray
    e_hyb: np.ndarray
    model: str
    exp_slope: float | None = None
    loglog_slope: float | None = None


def _chain_couplings(n, J, J_prime, model):
    if model == "nearest_neighbor":
        return nearest_neighbor_chain(n, J, J_prime, "topological")
    if model == "full_dipolar":
        return coupling_matrix(build_magic_chain(n, J, J_prime, "topological"))
    raise ValueError(f"unknown model {model!r}")


def fit_slope(x, y, log_x=False):
    """Least-squares slope of ``log y`` against ``x`` (or ``log x``)."""
    x = np.log(np.asarray(x, float)) if log_x else np.asarray(x, float)
    return float(np.polyfit(x, np.log(np.asarray(y, float)), 1)[0])


def hybridization_scan(n_max, model="full_dipolar", J=2.42, J_prime=-0.92, n_min=4,
                       exp_range=None, loglog_range=(60, 100)):
    """E_hyb for every even chain length in ``[n_min, n_max]``.

    ``exp_range`` and ``loglog_range`` select the (inclusive) segments used
    for the exponential and algebraic fits; the algebraic fit is only
    reported for the full dipolar model.
    """
    if n_max < 4 or n_max % 2:
        raise ValueError(f"n_max must be even and >= 4, got {n_max}")
    ns = np.arange(n_min + (n_min % 2), n_max + 1, 2)
    e = np.array([mid_gap_splitting(_chain_couplings(int(n), J, J_prime, model)) for n in ns])
    lo, hi = exp_range or (ns[0], min(ns[-1], 20))
    sel = (ns >= lo) & (ns <= hi) & (e > 0)
    exp_slope = fit_slope(ns[sel], e[sel]) if sel.sum() >= 2 else None
    loglog = None
    if model == "full_dipolar":
        sel = (ns >= loglog_range[0]) & (ns <= loglog_range[1]) & (e > 0)
        if sel.sum() >= 2:
            loglog = fit_slope(ns[sel], e[sel], log_x=True)
    return HybridizationScan(ns, e, model, exp_slope, loglog)
