"""Expectation values on many-body states.

``Z_i = 1 - 2 n_i`` and ``X_i = b_i + b_i^+``. Sites are 0-based here;
``string_order`` uses the chain-end convention (second site to second-to-last
site) independent of indexing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .mbcore import ContractViolation, StateVector


class FitError(RuntimeError):
    """Gaussian fit failed to converge."""


def _probabilities(psi):
    return np.abs(psi.amps) ** 2


def occupancies(psi):
    return _probabilities(psi) @ psi.basis.occupations()


def z_values(psi):
    """Per-basis-state table of ``Z_i`` eigenvalues."""
    return 1 - 2 * psi.basis.occupations().astype(np.int8)


def number_distribution(psi):
    p = np.bincount(psi.basis.particle_numbers(), weights=_probabilities(psi), minlength=psi.basis.n_sites + 1)
    return p


def _xx(psi, i, j):
    if not psi.basis.is_full:
        raise ContractViolation("X correlators need the full basis")
    idx = np.arange(psi.basis.dimension) ^ ((1 << i) | (1 << j))
    return complex(np.vdot(psi.amps, psi.amps[idx]))


def correlator(psi, observable, i, j):
    """Unconnected ``<O_i O_j>`` for ``O`` in ``{"Z", "X"}``."""
    if i == j:
        raise ValueError("i and j must differ")
    if observable == "Z":
        z = z_values(psi)
        return float(_probabilities(psi) @ (z[:, i] * z[:, j]))
    if observable == "X":
        return float(_xx(psi, i, j).real)
    raise ValueError(f"unknown observable {observable!r}")


@dataclass(frozen=True)
class CorrelationMap:
    observable: str
    values: np.ndarray
    connected: bool = False


def correlation_map(psi, observable, connected=False):
    n = psi.basis.n_sites
    out = np.eye(n)
    if observable == "Z":
        z = z_values(psi).astype(float)
        p = _probabilities(psi)
        out = (z * p[:, None]).T @ z
        np.fill_diagonal(out, 1.0)
        mean = p @ z
    elif observable == "X":
        for i in range(n):
            for j in range(i + 1, n):
                out[i, j] = out[j, i] = _xx(psi, i, j).real
        if connected:
            mean = np.array([x_expectation(psi, k) for k in range(n)])
    else:
        raise ValueError(f"unknown observable {observable!r}")
    if connected:
        out = out - np.outer(mean, mean)
    return CorrelationMap(observable, out, connected)


def x_expectation(psi, k):
    if not psi.basis.is_full:
        raise ContractViolation("X expectation needs the full basis")
    idx = np.arange(psi.basis.dimension) ^ (1 << k)
    return float(np.vdot(psi.amps, psi.amps[idx]).real)


def rotate_sites(psi, matrix, sites=None):
    """Apply the same single-site 2x2 unitary (rows/cols: empty, particle)."""
    if not psi.basis.is_full:
        raise ContractViolation("single-site rotations need the full basis")
    n = psi.basis.n_sites
    t = psi.amps.reshape((2,) * n)
    for k in range(n) if sites is None else sites:
        # axis 0 of the C-ordered tensor is the most significant bit
        t = np.moveaxis(np.tensordot(matrix, t, axes=([1], [n - 1 - k])), 0, n - 1 - k)
    return StateVector(psi.basis, t.reshape(-1))


def ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rx(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def x_to_z(psi):
    """Exact basis change after which Z statistics equal the X statistics of ``psi``."""
    return rotate_sites(psi, ry(-np.pi / 2))


def string_order_from_z(z, weights):
    """``-<Z_2 exp(i pi/2 sum_{k=3}^{N-2} Z_k) Z_{N-1}>`` over sampled or exact rows."""
    n = z.shape[1]
    phase = np.exp(0.5j * np.pi * z[:, 2 : n - 2].sum(axis=1))
    return -(weights @ (z[:, 1] * z[:, n - 2] * phase))


def string_order(psi, observable="Z", return_imag=False):
    if psi.basis.n_sites < 6:
        raise ValueError("string order needs at least six sites")
    if observable == "X":
        psi = x_to_z(psi)
    elif observable != "Z":
        raise ValueError(f"unknown observable {observable!r}")
    value = complex(string_order_from_z(z_values(psi), _probabilities(psi)))
    if abs(value.imag) > 1e-6:
        warnings.warn(f"string order has imaginary part {value.imag:.3g}", RuntimeWarning, stacklevel=2)
    return (value.real, value.imag) if return_imag else value.real


def intra_dimer_pairs(n_sites):
    """0-based strong-link pairs (2i, 2i+1) in 1-based labels."""
    return [(k, k + 1) for k in range(1, n_sites - 1, 2)]


def overlap(a, b):
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


@dataclass(frozen=True)
class GaussianFit:
    center: float
    center_err: float
    width: float
    amplitude: float
    offset: float


def _gauss(x, a, c, w, b):
    return a * np.exp(-((x - c) ** 2) / (2 * w * w)) + b


def gaussian_fit(x, y):
    """Least-squares ``A exp(-(x-c)^2 / 2w^2) + b`` with moment-based start values."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if len(x) < 5:
        raise ValueError("need at least five points")
    if np.ptp(y) == 0:
        raise ValueError("y is constant")
    b0 = float(np.min(y))
    weight = y - b0
    c0 = float(x[np.argmax(y)])
    w0 = float(np.sqrt(max((weight @ (x - c0) ** 2) / weight.sum(), (np.ptp(x) / len(x)) ** 2)))
    p0 = [float(np.max(y) - b0), c0, w0, b0]
    try:
        popt, pcov = curve_fit(_gauss, x, y, p0=p0, maxfev=20000)
    except RuntimeError as exc:
        raise FitError(f"Gaussian fit failed from start {p0}: {exc}") from exc
    err = float(np.sqrt(pcov[1, 1])) if np.isfinite(pcov[1, 1]) else float("nan")
    return GaussianFit(float(popt[1]), err, float(abs(popt[2])), float(popt[0]), float(popt[3]))
