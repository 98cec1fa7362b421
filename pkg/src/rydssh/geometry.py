"""Atom-array geometries and the resonant dipolar exchange law.

Energies are frequencies in MHz, lengths in micrometres and the dipolar
strength ``d2`` is in MHz um^3, so that ``J = d2 (3 cos^2 theta - 1) / R^3``.
Sites are stored in chain order; site ``k`` (0-based) belongs to sublattice
A when ``k`` is even, B otherwise.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .io import dumps17

MAGIC_ANGLE = float(np.arccos(1.0 / np.sqrt(3.0)))

DEFAULT_STRONG_DISTANCE = 10.0


class GeometryError(ValueError):
    """A requested geometry cannot be constructed."""


class PhysicalRegimeWarning(UserWarning):
    """Couplings outside the regime |J| > |J'| > 0, sign(J) != sign(J')."""


@dataclass(frozen=True)
class Site:
    x: float
    y: float
    sublattice: str

    def __post_init__(self):
        if self.sublattice not in ("A", "B"):
            raise ValueError(f"sublattice must be 'A' or 'B', got {self.sublattice!r}")


def sublattice_of(k):
    """Sublattice tag of 0-based site ``k``."""
    return "A" if k % 2 == 0 else "B"


@dataclass(frozen=True)
class ChainGeometry:
    sites: tuple
    axis_angle: float = 0.0
    d2: float = 1000.0
    notes: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        if len(self.sites) < 2:
            raise GeometryError("a chain needs at least two sites")
        if not self.d2 > 0:
            raise GeometryError(f"d2 must be positive, got {self.d2}")
        pos = self.positions
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(dist, np.inf)
        if dist.min() <= 0:
            raise GeometryError("two sites coincide")

    @classmethod
    def from_positions(cls, positions, axis_angle=0.0, d2=1000.0, **kw):
        sites = [Site(float(x), float(y), sublattice_of(k)) for k, (x, y) in enumerate(positions)]
        return cls(tuple(sites), axis_angle, d2, **kw)

    @property
    def n_sites(self):
        return len(self.sites)

    @property
    def positions(self):
        return np.array([[s.x, s.y] for s in self.sites], dtype=float)

    @property
    def sublattices(self):
        return tuple(s.sublattice for s in self.sites)

    def moved(self, index, x, y):
        sites = list(self.sites)
        sites[index] = replace(sites[index], x=float(x), y=float(y))
        return replace(self, sites=tuple(sites))

    def to_dict(self):
        return {
            "sites": [{"x_um": s.x, "y_um": s.y, "sublattice": s.sublattice} for s in self.sites],
            "axis_deg": float(np.degrees(self.axis_angle)),
            "d2_MHz_um3": self.d2,
        }

    @classmethod
    def from_dict(cls, data):
        sites = tuple(Site(float(s["x_um"]), float(s["y_um"]), s["sublattice"]) for s in data["sites"])
        return cls(sites, float(np.radians(data["axis_deg"])), float(data["d2_MHz_um3"]))


def save_geometry(geom, path):
    Path(path).write_text(dumps17(geom.to_dict()))


def load_geometry(path):
    return ChainGeometry.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric hopping table ``J_ij`` (MHz) with zero diagonal."""

    values: np.ndarray
    sublattice: tuple = ()

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("coupling matrix must be square")
        if not np.array_equal(v, v.T):
            raise ValueError("coupling matrix must be exactly symmetric")
        if np.any(np.diag(v) != 0):
            raise ValueError("coupling matrix must have a zero diagonal")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        sub = tuple(self.sublattice) or tuple(sublattice_of(k) for k in range(v.shape[0]))
        if len(sub) != v.shape[0]:
            raise ValueError("one sublattice tag per site required")
        object.__setattr__(self, "sublattice", sub)

    @property
    def n(self):
        return self.values.shape[0]

    def __getitem__(self, ij):
        return self.values[ij]

    def with_entry(self, i, j, value):
        """Copy with ``J_ij = J_ji = value`` (direct matrix-entry injection)."""
        if i == j:
            raise ValueError("diagonal entries are fixed to zero")
        v = self.values.copy()
        v[i, j] = v[j, i] = value
        return CouplingMatrix(v, self.sublattice)

    def subchain(self, keep):
        """Couplings restricted to the sites flagged in boolean ``keep``."""
        keep = np.asarray(keep, dtype=bool)
        idx = np.flatnonzero(keep)
        return CouplingMatrix(self.values[np.ix_(idx, idx)], tuple(self.sublattice[k] for k in idx))


def nearest_neighbor_chain(n_sites, J, J_prime, config="topological"):
    """Tridiagonal SSH couplings; ``topological`` starts and ends on ``J_prime``."""
    if config not in ("topological", "trivial"):
        raise ValueError(f"unknown configuration {config!r}")
    first, second = (J_prime, J) if config == "topological" else (J, J_prime)
    v = np.zeros((n_sites, n_sites))
    for k in range(n_sites - 1):
        v[k, k + 1] = v[k + 1, k] = first if k % 2 == 0 else second
    return CouplingMatrix(v)


def dipolar_coupling(r_i, r_j, axis_angle, d2):
    """Exchange amplitude ``d2 (3 cos^2 theta - 1) / R^3`` between two points."""
    d = np.asarray(r_j, dtype=float) - np.asarray(r_i, dtype=float)
    R = float(np.hypot(d[0], d[1]))
    if R == 0.0:
        raise ValueError("dipolar coupling is undefined for coincident points")
    cos_t = (d[0] * np.cos(axis_angle) + d[1] * np.sin(axis_angle)) / R
    return float(d2 * (3.0 * cos_t * cos_t - 1.0) / R**3)


def coupling_matrix(geom, cutoff=None, nearest_neighbor_only=False):
    """Evaluate the dipolar law on every pair of ``geom``.

    Entries smaller than ``cutoff`` in magnitude are zeroed; with
    ``nearest_neighbor_only`` only ``|i - j| = 1`` entries survive.
    """
    pos = geom.positions
    n = len(pos)
    v = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            v[i, j] = dipolar_coupling(pos[i], pos[j], geom.axis_angle, geom.d2)
    if nearest_neighbor_only:
        v = np.triu(np.tril(v, 1), 1)
    if cutoff is not None:
        v[np.abs(v) < cutoff] = 0.0
    # mirror the upper triangle so the table is bit-symmetric
    v = v + v.T
    return CouplingMatrix(v, geom.sublattices)


def _roots(f, lo, hi, n_grid=4000):
    xs = np.linspace(lo, hi, n_grid)
    fs = np.array([f(x) for x in xs])
    out = []
    for k in range(n_grid - 1):
        if fs[k] == 0.0:
            out.append(xs[k])
        elif fs[k] * fs[k + 1] < 0:
            out.append(brentq(f, xs[k], xs[k + 1], xtol=1e-14, rtol=1e-15))
    return out


def _solve_period(J, J_prime, strong_distance, strong_angle, axis_angle, spacing_bracket):
    factor = 3.0 * np.cos(strong_angle) ** 2 - 1.0
    if factor == 0.0 or np.sign(factor) != np.sign(J):
        raise GeometryError(
            f"strong_angle={strong_angle:.4f} rad gives an angular factor {factor:+.3g} "
            f"that cannot produce J={J} with d2 > 0"
        )
    d2 = J * strong_distance**3 / factor
    row = np.array([np.cos(axis_angle + MAGIC_ANGLE), np.sin(axis_angle + MAGIC_ANGLE)])
    strong = strong_distance * np.array([np.cos(axis_angle + strong_angle), np.sin(axis_angle + strong_angle)])

    def mismatch(lam):
        w = lam * row - strong
        if np.hypot(*w) < 1e-9:
            return np.inf
        return dipolar_coupling((0.0, 0.0), w, axis_angle, d2) - J_prime

    lo, hi = spacing_bracket[0] * strong_distance, spacing_bracket[1] * strong_distance
    roots = [r for r in _roots(mismatch, lo, hi) if np.isfinite(mismatch(r))]
    if not roots:
        raise GeometryError(
            f"no row period in [{lo:.3g}, {hi:.3g}] um reproduces J'={J_prime} MHz "
            f"(strong_angle={np.degrees(strong_angle):.2f} deg)"
        )
    lam = min(roots, key=lambda r: abs(np.hypot(*(r * row - strong)) - strong_distance))
    return lam, d2, row, strong


def build_magic_chain(
    n_sites,
    J,
    J_prime,
    config="topological",
    strong_distance=DEFAULT_STRONG_DISTANCE,
    strong_angle=None,
    axis_angle=0.0,
    spacing_bracket=(0.05, 8.0),
):
    """Zig-zag chain whose two sublattice rows lie along the magic angle.

    The strong link has length ``strong_distance`` and makes the angle
    ``strong_angle`` with the quantization axis; ``d2`` follows from ``J``.
    The row period ``lam`` is then solved from ``J_prime`` on the bracket
    ``spacing_bracket * strong_distance``. When two periods reproduce
    ``J_prime``, the one whose weak link is closest in length to the strong
    link is used.

    With ``strong_angle=None`` the angle starts at 6 degrees and is raised in
    1 degree steps (up to 50) until ``J_prime`` becomes reachable; the angle
    used is recorded in ``notes``.
    """
    if n_sites < 2 or n_sites % 2:
        raise GeometryError(f"n_sites must be even and >= 2, got {n_sites}")
    if config not in ("topological", "trivial"):
        raise ValueError(f"unknown configuration {config!r}")
    if not (abs(J) > abs(J_prime) > 0 and np.sign(J) != np.sign(J_prime)):
        warnings.warn(
            f"J={J}, J'={J_prime} outside |J| > |J'| > 0 with opposite signs",
            PhysicalRegimeWarning,
            stacklevel=2,
        )
    if strong_angle is None:
        angles = np.radians(np.arange(6.0, 50.5, 1.0))
    else:
        angles = [strong_angle]
    failure = None
    for angle in angles:
        try:
            lam, d2, row, strong = _solve_period(J, J_prime, strong_distance, float(angle), axis_angle, spacing_bracket)
            break
        except GeometryError as exc:
            failure = exc
    else:
        raise failure
    strong_angle = float(angle)
    weak = lam * row - strong
    first, second = (weak, strong) if config == "topological" else (strong, weak)
    pos = [np.zeros(2)]
    for k in range(1, n_sites):
        pos.append(pos[-1] + (first if k % 2 == 1 else second))
    notes = {
        "row_period_um": float(lam),
        "weak_length_um": float(np.hypot(*weak)),
        "strong_angle_deg": float(np.degrees(strong_angle)),
        "config": config,
    }
    return ChainGeometry.from_positions(pos, axis_angle, d2, notes=notes)


@dataclass(frozen=True)
class EdgePerturbation:
    displacement_um: float
    J_pp: float
    before: dict
    after: dict


def perturb_edge(geom, target_Jpp, bracket=6.0):
    """Move the last site across its sublattice row until ``J_{N-2,N} = target_Jpp``.

    The displacement is perpendicular to the line through sites ``N-2`` and
    ``N`` and searched on ``[-bracket, bracket]`` um; the smallest solution
    wins. Returns the new geometry and an :class:`EdgePerturbation` report
    carrying the couplings of site ``N`` to ``N-1`` and ``N-3``.
    """
    n = geom.n_sites
    if n < 4:
        raise GeometryError("perturb_edge needs at least four sites")
    pos = geom.positions
    last, partner = pos[-1], pos[-3]
    row = (last - partner) / np.hypot(*(last - partner))
    normal = np.array([-row[1], row[0]])

    def coupling_to(p, k):
        return dipolar_coupling(pos[k], p, geom.axis_angle, geom.d2)

    # report keys are 1-based site pairs
    before = {(n - 1, n): coupling_to(last, n - 2), (n - 3, n): coupling_to(last, n - 4)}
    if target_Jpp == 0.0:
        return geom, EdgePerturbation(0.0, coupling_to(last, n - 3), before, dict(before))

    def mismatch(delta):
        return coupling_to(last + delta * normal, n - 3) - target_Jpp

    roots = _roots(mismatch, -bracket, bracket, n_grid=6001)
    roots = [r for r in roots if r != 0.0]
    if not roots:
        raise GeometryError(
            f"J''={target_Jpp} MHz unreachable by displacements within +-{bracket} um"
        )
    delta = min(roots, key=abs)
    new = last + delta * normal
    moved = geom.moved(n - 1, *new)
    after = {(n - 1, n): coupling_to(new, n - 2), (n - 3, n): coupling_to(new, n - 4)}
    return moved, EdgePerturbation(float(delta), coupling_to(new, n - 3), before, after)
