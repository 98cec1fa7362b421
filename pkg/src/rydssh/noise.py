"""Preparation and detection errors, sampled by Monte Carlo.

Random numbers come from the counter-based Philox generator. The stream for
``(seed, realization, purpose)`` is ``Philox(SeedSequence(seed,
spawn_key=(realization, purpose)))``, so every realization can be replayed on
its own and the result does not depend on how realizations are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


# purposes inside one realization
DEFECTS, SHOTS = 0, 1


@dataclass(frozen=True)
class ErrorModel:
    eta: float = 0.0
    eps: float = 0.0
    eps_prime: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("eta", "eps", "eps_prime"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} is not a probability")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


def stream(seed, realization, purpose=0):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(realization), int(purpose)))
    return np.random.Generator(np.random.Philox(ss))


def sample_defect_mask(n_sites, eta, rng):
    """Boolean mask, ``True`` where the atom never reached the Rydberg chain."""
    return rng.random(n_sites) < eta


@dataclass(frozen=True)
class MeasurementRecord:
    bits: np.ndarray  # (shots, n_sites) detected particles on the full chain
    defects: np.ndarray

    def z(self):
        return 1 - 2 * self.bits.astype(np.int8)


def sample_bitstrings(psi, shots, rng):
    """Draw ``shots`` occupation rows from ``|psi|^2``."""
    p = np.abs(psi.amps) ** 2
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(shots), side="right")
    idx = np.minimum(idx, len(p) - 1)
    states = psi.basis.unrank(idx)
    return ((states[:, None] >> np.arange(psi.basis.n_sites)[None, :]) & 1).astype(np.int8)


def measure_with_errors(psi, defects, model, rng, shots=1):
    """Sample read-out records of ``psi`` living on the surviving sites.

    Defect sites carry a ground-state atom, which reads as "no particle".
    Every site reading "no particle" is then lost with probability ``eps``
    (false particle); every particle is recaptured with probability
    ``eps_prime`` (false vacuum).
    """
    defects = np.asarray(defects, dtype=bool)
    alive = np.flatnonzero(~defects)
    if psi.basis.n_sites != alive.size:
        raise ValueError(f"state has {psi.basis.n_sites} sites but {alive.size} survive")
    truth = np.zeros((shots, defects.size), dtype=np.int8)
    if alive.size:
        truth[:, alive] = sample_bitstrings(psi, shots, rng)
    u = rng.random(truth.shape)
    flip = np.where(truth == 1, u < model.eps_prime, u < model.eps)
    return MeasurementRecord(truth ^ flip.astype(np.int8), defects)


@dataclass
class MonteCarloResult:
    names: tuple
    per_realization: np.ndarray  # (realizations, n_estimators) realization means
    shots: int
    n_masks: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def mean(self):
        return dict(zip(self.names, self.per_realization.mean(axis=0)))

    @property
    def sem(self):
        r = self.per_realization.shape[0]
        if r < 2:
            return dict.fromkeys(self.names, float("nan"))
        return dict(zip(self.names, self.per_realization.std(axis=0, ddof=1) / np.sqrt(r)))

    def summary(self):
        m, s = self.mean, self.sem
        return {k: (float(m[k]), float(s[k])) for k in self.names}


class Protocol:
    """What ``monte_carlo_experiment`` needs from an experiment.

    ``prepare(defects)`` returns ``{basis_label: StateVector}`` on the
    surviving sites; ``estimate(records)`` maps ``{basis_label:
    MeasurementRecord}`` to per-shot estimator rows ``(shots, len(names))``.
    """

    names: tuple = ()
    n_sites: int = 0

    def prepare(self, defects):
        raise NotImplementedError

    def estimate(self, records):
        raise NotImplementedError


def monte_carlo_experiment(protocol, model, realizations, shots_per_realization=1, progress=None):
    """Average ``protocol`` over defect realizations and noisy shots.

    Prepared states are cached per defect mask. Realization ``r`` draws its
    mask from ``stream(seed, r, DEFECTS)`` and its shots from
    ``stream(seed, r, SHOTS)``; each basis label is measured in sorted order.
    """
    if realizations < 1:
        raise ValueError("need at least one realization")
    cache = {}
    rows = np.zeros((realizations, len(protocol.names)))
    for r in range(realizations):
        defects = sample_defect_mask(protocol.n_sites, model.eta, stream(model.seed, r, DEFECTS))
        key = defects.tobytes()
        if key not in cache:
            cache[key] = protocol.prepare(defects)
        states = cache[key]
        rng = stream(model.seed, r, SHOTS)
        records = {label: measure_with_errors(states[label], defects, model, rng, shots_per_realization)
                   for label in sorted(states)}
        rows[r] = protocol.estimate(records).mean(axis=0)
        if progress is not None:
            progress(r, len(cache))
    return MonteCarloResult(tuple(protocol.names), rows, shots_per_realization, len(cache))


def string_from_records(z):
    """Per-shot ``-Z_2 exp(i pi/2 sum Z_k) Z_{N-1}`` (real for even N)."""
    n = z.shape[1]
    phase = np.exp(0.5j * np.pi * z[:, 2 : n - 2].sum(axis=1))
    return -(z[:, 1] * z[:, n - 2] * phase).real


def contiguous_segments(keep):
    """Maximal runs of surviving sites, as lists of 0-based indices."""
    runs, current = [], []
    for k, alive in enumerate(np.asarray(keep, dtype=bool)):
        if alive:
            current.append(k)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    return runs


def records_csv(record):
    """``shot,site,bit`` rows (1-based sites) of a measurement record."""
    from .io import csv_text

    shots, n = record.bits.shape
    rows = [(s, k + 1, int(record.bits[s, k])) for s in range(shots) for k in range(n)]
    return csv_text(["shot", "site", "bit"], rows)


def pair_average(z, pairs):
    return np.mean([z[:, i] * z[:, j] for i, j in pairs], axis=0)


class CorrelatorProtocol(Protocol):
    """Sweep, optional read-out rotation, and Z/X correlators with string orders.

    ``prepare_state(keep)`` builds the post-sweep state on the surviving
    sites flagged by ``keep``; ``rotate(psi, keep)`` applies the read-out
    pulse. Estimators are the bulk-dimer averages and the two string orders.
    """

    names = ("c_z", "c_x", "cz_string", "cx_string")

    def __init__(self, n_sites, prepare_state, rotate, pairs):
        if len(pairs) == 0:
            raise ValueError(f"no bulk dimer pairs on a {n_sites}-site chain")
        self.n_sites = n_sites
        self._prepare = prepare_state
        self._rotate = rotate
        self.pairs = pairs

    def prepare(self, defects):
        keep = ~np.asarray(defects, dtype=bool)
        if not keep.any():
            # nothing left to simulate: a zero-site state reads all vacuum
            basis = _EmptyBasis()
            psi = _EmptyState(basis)
            return {"x": psi, "z": psi}
        psi = self._prepare(keep)
        return {"z": psi, "x": self._rotate(psi, keep)}

    def estimate(self, records):
        z = records["z"].z()
        x = records["x"].z()
        return np.stack([
            pair_average(z, self.pairs),
            pair_average(x, self.pairs),
            string_from_records(z),
            string_from_records(x),
        ], axis=1)


class _EmptyBasis:
    n_sites = 0


class _EmptyState:
    def __init__(self, basis):
        self.basis = basis
