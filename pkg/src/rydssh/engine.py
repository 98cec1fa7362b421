"""Krylov propagation and Lanczos ground-state search.

Operators only need ``matvec`` and ``dim``. Time runs in microseconds and
Hamiltonians in MHz, so a step of length ``h`` applies ``exp(-2 pi i h H)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .mbcore import ManyBodyOperator, StateVector, drive_operator, number_operator

TWO_PI = 2.0 * np.pi


class NumericalError(ArithmeticError):
    """A kernel failed to reach its tolerance."""


@dataclass(frozen=True)
class EvolutionControls:
    krylov_dim: int = 30
    step_tol: float = 1e-8
    max_substep: float = np.inf
    min_substep: float = 1e-9
    interpolation: str = "piecewise_linear"

    def __post_init__(self):
        if self.krylov_dim < 2:
            raise ValueError("krylov_dim must be >= 2")
        if not self.step_tol > 0:
            raise ValueError("step_tol must be positive")
        if self.interpolation != "piecewise_linear":
            raise ValueError(f"unsupported interpolation {self.interpolation!r}")


@dataclass(frozen=True)
class SweepSchedule:
    """Piecewise-linear ``(t_us, rabi_MHz, detuning_MHz)`` breakpoints."""

    breakpoints: tuple

    def __post_init__(self):
        bp = tuple(tuple(float(x) for x in p) for p in self.breakpoints)
        if not bp:
            raise ValueError("schedule needs at least one breakpoint")
        t = np.array([p[0] for p in bp])
        if np.any(np.diff(t) <= 0):
            raise ValueError("breakpoint times must increase strictly")
        if any(p[1] < 0 for p in bp):
            raise ValueError("Rabi frequency must be >= 0")
        object.__setattr__(self, "breakpoints", bp)

    @property
    def times(self):
        return np.array([p[0] for p in self.breakpoints])

    @property
    def t_start(self):
        return self.breakpoints[0][0]

    @property
    def t_end(self):
        return self.breakpoints[-1][0]

    def __call__(self, t):
        bp = np.array(self.breakpoints)
        return float(np.interp(t, bp[:, 0], bp[:, 1])), float(np.interp(t, bp[:, 0], bp[:, 2]))

    def scaled(self, factor):
        """Same waveform with every duration multiplied by ``factor``."""
        t0 = self.t_start
        return SweepSchedule(tuple((t0 + factor * (t - t0), r, d) for t, r, d in self.breakpoints))

    @classmethod
    def canonical(cls, final_detuning, rabi_max=2.0, start_detuning=-4.0, t_rise=0.5, t_ramp=1.5, t_fall=0.5):
        """Drive rise at large negative detuning, detuning ramp, drive ramp-down."""
        return cls((
            (0.0, 0.0, start_detuning),
            (t_rise, rabi_max, start_detuning),
            (t_rise + t_ramp, rabi_max, final_detuning),
            (t_rise + t_ramp + t_fall, 0.0, final_detuning),
        ))


class LinearCombination:
    """``sum_k c_k A_k`` applied term by term."""

    def __init__(self, terms):
        self.terms = [(c, a) for c, a in terms if c != 0]
        self.dim = terms[0][1].dim

    def matvec(self, v):
        out = np.zeros(v.shape, dtype=complex)
        for c, a in self.terms:
            out += c * a.matvec(v)
        return out

    def norm_bound(self):
        return sum(abs(c) * a.norm_bound() for c, a in self.terms)


class DrivenHamiltonian:
    """``H(t) = H0 + rabi(t) D - detuning(t) N`` with ``D = sum X / 2``.

    ``H0`` must be built without drive and detuning on the full basis.
    """

    def __init__(self, h0, schedule):
        self.h0 = h0
        self.schedule = schedule
        self.drive = drive_operator(h0.basis)
        self.number = number_operator(h0.basis)
        self.dim = h0.dim

    def at(self, t):
        rabi, det = self.schedule(t)
        return LinearCombination([(1.0, self.h0), (rabi, self.drive), (-det, self.number)])

    @property
    def breakpoints(self):
        return tuple(self.schedule.times)


def _krylov_step(op, v, h, m, tol):
    """Advance ``v`` by ``exp(-2 pi i h H)`` in a Krylov space of size <= m.

    Returns ``(w, err)`` with the usual a-posteriori estimate from the
    coupling to the first omitted Krylov vector.
    """
    beta0 = np.linalg.norm(v)
    if beta0 == 0:
        return v.copy(), 0.0
    n = v.shape[0]
    m = min(m, n)
    V = np.empty((m + 1, n), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    V[0] = v / beta0
    for j in range(m):
        w = op.matvec(V[j])
        alpha[j] = np.vdot(V[j], w).real
        w = w - alpha[j] * V[j]
        if j > 0:
            w = w - beta[j - 1] * V[j - 1]
        # full reorthogonalization, two passes
        for _ in range(2):
            w = w - V[: j + 1].T @ (V[: j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        k = j + 1
        T = np.diag(alpha[:k]) + np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
        lam, Q = scipy.linalg.eigh(T)
        c = Q @ (np.exp(-1j * TWO_PI * h * lam) * Q[0].conj())
        err = beta0 * beta[j] * abs(c[-1]) * TWO_PI * h
        if beta[j] <= 1e-14 * max(1.0, abs(alpha[:k]).max()) or k == n:
            return beta0 * (c @ V[:k]), 0.0
        if err <= tol and k >= 2:
            return beta0 * (c @ V[:k]), err
        V[j + 1] = w / beta[j]
    return beta0 * (c @ V[:k]), err


def evolve(H, psi0, t0, t1, controls=EvolutionControls(), sample_times=None, breakpoints=()):
    """Propagate ``psi0`` from ``t0`` to ``t1``.

    ``H`` is an operator or an object with ``at(t)`` (time dependent, then
    each substep uses the midpoint value). Substeps never straddle
    ``breakpoints`` or ``sample_times``. Returns the final state, and with
    ``sample_times`` also the list of states at those times.
    """
    if not t1 >= t0:
        raise ValueError("t1 must not precede t0")
    amps = psi0.amps if isinstance(psi0, StateVector) else np.asarray(psi0, dtype=complex)
    basis = psi0.basis if isinstance(psi0, StateVector) else None
    psi = np.array(amps, dtype=complex)
    dependent = hasattr(H, "at")
    if not dependent and hasattr(H, "breakpoints") and not breakpoints:
        breakpoints = H.breakpoints
    if dependent and not breakpoints and hasattr(H, "breakpoints"):
        breakpoints = H.breakpoints
    samples = sorted(set(float(s) for s in (sample_times if sample_times is not None else ())))
    stops = sorted(set([t1] + [b for b in breakpoints if t0 < b < t1] + [s for s in samples if t0 < s < t1]))
    total = max(t1 - t0, 1e-300)
    recorded = {}
    for s in samples:
        if s <= t0:
            recorded[s] = psi.copy()
    t = t0
    proposal = min(controls.max_substep, total)
    for stop in stops:
        while t < stop:
            h = min(proposal, stop - t)
            if stop - t - h < 1e-12 * total:
                h = stop - t
            clipped = h < proposal
            while True:
                op = H.at(t + 0.5 * h) if dependent else H
                new, err = _krylov_step(op, psi, h, controls.krylov_dim, controls.step_tol * h / total)
                if err <= controls.step_tol * h / total:
                    break
                if h <= controls.min_substep:
                    raise NumericalError(
                        f"Krylov step at t={t:.6g} us failed: error {err:.3g} with substep {h:.3g} us "
                        f"(krylov_dim={controls.krylov_dim})"
                    )
                h *= 0.5
                proposal = h
                clipped = False
            psi = new
            t = stop if abs(stop - (t + h)) <= 1e-12 * total else t + h
            if not clipped:
                proposal = min(1.5 * h, controls.max_substep)
        if stop in samples:
            recorded[stop] = psi.copy()
    norm = np.linalg.norm(psi)
    ref = np.linalg.norm(amps)
    if ref > 0 and abs(norm - ref) > 1e-8 * ref:
        raise NumericalError(f"norm drifted from {ref:.12g} to {norm:.12g}")
    wrap = (lambda a: StateVector(basis, a)) if basis is not None else (lambda a: a)
    if sample_times is None:
        return wrap(psi)
    return wrap(psi), [wrap(recorded[s]) for s in samples if s in recorded]


def _orthonormalize_against(w, V, count):
    for _ in range(2):
        if count:
            w = w - V[:count].T @ (V[:count].conj() @ w)
    return w


def lowest_eigenpairs(op, k=1, seed=12345, tol=1e-8, max_basis=None, max_restarts=500):
    """Lowest ``k`` eigenpairs by thick-restart Lanczos.

    The Krylov basis is kept fully orthogonal (two Gram-Schmidt passes) and
    the Rayleigh-Ritz problem is solved on the stored ``H V``. A restart keeps
    the ``k + extra`` lowest Ritz vectors and continues from the residual of
    the first unconverged one. Pairs are accepted once
    ``||H v - lambda v|| <= tol * ||H||`` with ``||H||`` the row-sum bound.
    Returns ascending eigenvalues and the eigenvectors as columns.
    """
    n = op.dim
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    dtype = np.result_type(getattr(op, "dtype", complex), np.float64)
    scale = max(op.norm_bound(), 1e-300) if hasattr(op, "norm_bound") else 1.0
    m = min(n, max_basis or max(2 * k + 30, 60))
    keep = min(m - 1, k + max(k, 10)) if m < n else m
    rng = np.random.default_rng(seed)
    V = np.zeros((m, n), dtype=dtype)
    AV = np.zeros((m, n), dtype=dtype)
    start = rng.normal(size=n)
    if np.issubdtype(dtype, np.complexfloating):
        start = start + 1j * rng.normal(size=n)
    count = 0
    w = start
    for restart in range(max_restarts):
        while count < m:
            w = _orthonormalize_against(w, V, count)
            nrm = np.linalg.norm(w)
            if nrm < 1e-10:
                # invariant subspace reached: continue with a fresh random direction
                w = rng.normal(size=n).astype(dtype)
                w = _orthonormalize_against(w, V, count)
                nrm = np.linalg.norm(w)
                if nrm < 1e-10:
                    break
            V[count] = w / nrm
            AV[count] = op.matvec(V[count])
            w = AV[count]
            count += 1
        T = V[:count].conj() @ AV[:count].T
        T = 0.5 * (T + T.conj().T)
        theta, Y = scipy.linalg.eigh(T)
        X = Y.T @ V[:count]
        AX = Y.T @ AV[:count]
        R = AX - theta[:, None] * X
        res = np.linalg.norm(R, axis=1)
        converged = res[:k] <= tol * scale
        if np.all(converged) or count == n:
            vals = theta[:k]
            vecs = X[:k].T.copy()
            return vals, _fix_sign(vecs)
        p = min(keep, count - 1)
        first = int(np.flatnonzero(~converged)[0])
        V[:p], AV[:p] = X[:p], AX[:p]
        count = p
        w = R[first]
    raise NumericalError(
        f"Lanczos did not converge: residuals {res[:k]} after {max_restarts} restarts (tol {tol * scale:.3g})"
    )


def _fix_sign(vecs):
    """Make the largest-magnitude entry of each column real and positive."""
    idx = np.argmax(np.abs(vecs), axis=0)
    top = vecs[idx, np.arange(vecs.shape[1])]
    phase = np.where(np.abs(top) > 0, np.conj(top) / np.abs(top), 1.0)
    return vecs * phase


def degenerate_clusters(values, tol=1e-9):
    """Group ascending ``values`` into runs whose neighbours differ by < ``tol``."""
    values = np.asarray(values)
    clusters = [[0]] if len(values) else []
    for i in range(1, len(values)):
        if values[i] - values[i - 1] < tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def lowest_states(op, k=1, **kw):
    """Like :func:`lowest_eigenpairs` but returning :class:`StateVector` objects."""
    vals, vecs = lowest_eigenpairs(op, k, **kw)
    return vals, [StateVector(op.basis, vecs[:, i]) for i in range(vecs.shape[1])]
