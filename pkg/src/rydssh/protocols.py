"""Experiment drivers: spectroscopy, sweeps, transfer, rotation pulses, phase
maps and the ramps between the dimerized chain and the Haldane chain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import observables as obs
from .engine import (
    DrivenHamiltonian,
    EvolutionControls,
    SweepSchedule,
    evolve,
    lowest_eigenpairs,
)
from .geometry import CouplingMatrix
from .mbcore import (
    ContractViolation,
    FockBasis,
    HamiltonianSpec,
    ResourceLimitError,
    StateVector,
    build_boson_hamiltonian,
    build_xxz_hamiltonian,
    drive_operator,
    number_operator,
)

#: substep cap used for driven evolutions (us)
DRIVEN_SUBSTEP = 0.01

#: pinned sweep shapes, see README for how they were chosen
FILLED_EDGE_SWEEP = dict(rabi_max=2.0, start_detuning=-4.0, t_rise=0.5, t_ramp=3.0, t_fall=1.0)
EMPTY_EDGE_SWEEP = dict(rabi_max=1.5, start_detuning=-4.0, t_rise=0.5, t_ramp=3.0, t_fall=1.0)


def _controls(controls):
    return controls or EvolutionControls(max_substep=DRIVEN_SUBSTEP)


def _static(spec, basis):
    """Operator for ``spec`` without drive and detuning."""
    return build_boson_hamiltonian(spec.replace(drive=0.0, detuning=0.0), basis)


# ---------------------------------------------------------------- spectroscopy


@dataclass(frozen=True)
class SpectroscopyResult:
    detunings: np.ndarray
    occupancy: np.ndarray  # (n_detunings, n_sites)
    postselected: np.ndarray | None = None  # occupancy conditioned on <= 1 particle


def spectroscopy_scan(spec, initial, probe_rabi, t_probe, grid, controls=None, postselect=True):
    """Site occupancies after a square probe of length ``t_probe`` at each detuning."""
    if not probe_rabi > 0:
        raise ValueError("probe_rabi must be positive")
    basis = initial.basis
    if not basis.is_full:
        raise ContractViolation("spectroscopy drives particle number; use the full basis")
    h0 = _static(spec, basis)
    drive = drive_operator(basis).scaled(probe_rabi)
    number = number_operator(basis)
    occ_table = basis.occupations()
    few = basis.particle_numbers() <= 1
    occ, post = [], []
    for det in grid:
        H = h0 + drive + number.scaled(-float(det))
        psi = evolve(H, initial, 0.0, t_probe, controls or EvolutionControls())
        p = np.abs(psi.amps) ** 2
        occ.append(p @ occ_table)
        if postselect:
            w = p[few].sum()
            post.append((p[few] @ occ_table[few]) / w if w > 0 else np.zeros(basis.n_sites))
    return SpectroscopyResult(np.asarray(grid, float), np.array(occ), np.array(post) if postselect else None)


# ---------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepResult:
    final: StateVector
    times: np.ndarray
    p_n: np.ndarray  # (n_times, n_sites + 1)
    overlap: np.ndarray | None


def adiabatic_sweep(spec, schedule, target=None, n_samples=0, controls=None):
    """Evolve the empty chain under ``schedule``.

    ``n_samples`` evenly spaced snapshots (besides the end points) feed the
    particle-number and target-overlap trajectories.
    """
    basis = FockBasis(spec.n_sites)
    vac = StateVector.vacuum(basis)
    t0, t1 = schedule.t_start, schedule.t_end
    if t1 == t0:
        final, snaps, times = vac, [vac], np.array([t0])
    else:
        times = np.linspace(t0, t1, n_samples + 2)
        H = DrivenHamiltonian(_static(spec, basis), schedule)
        final, snaps = evolve(H, vac, t0, t1, _controls(controls), sample_times=times)
        snaps = snaps[:-1] + [final]
    p_n = np.array([obs.number_distribution(s) for s in snaps])
    ov = None if target is None else np.array([obs.overlap(target.to_full(), s) for s in snaps])
    return SweepResult(final, times, p_n, ov)


def sweep_target(spec, final_detuning, k=1):
    """Ground state of ``H0 - final_detuning * N`` on the full basis."""
    basis = FockBasis(spec.n_sites)
    op = _static(spec, basis) + number_operator(basis).scaled(-final_detuning)
    vals, vecs = lowest_eigenpairs(op, k)
    return vals, StateVector(basis, vecs[:, 0])


# ---------------------------------------------------------------- transfer


@dataclass(frozen=True)
class TransferResult:
    times: np.ndarray
    occupancy: np.ndarray  # (n_times, n_sites)
    e_hyb: float

    @property
    def left(self):
        return self.occupancy[:, 0]

    @property
    def right(self):
        return self.occupancy[:, -1]

    @property
    def bulk(self):
        return self.occupancy[:, 1:-1].sum(axis=1)


def dominant_frequency(times, series, pad=64):
    """Strongest nonzero frequency of a uniformly sampled series (Hann window)."""
    y = np.asarray(series, float)
    y = (y - y.mean()) * np.hanning(len(y))
    dt = times[1] - times[0]
    n = pad * len(y)
    spec = np.abs(np.fft.rfft(y, n))
    freqs = np.fft.rfftfreq(n, dt)
    k = int(np.argmax(spec[1:]) + 1)
    if 0 < k < len(spec) - 1:
        # parabolic refinement on the log magnitude
        a, b, c = np.log(spec[k - 1 : k + 2] + 1e-300)
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
        return float((k + shift) * (freqs[1] - freqs[0]))
    return float(freqs[k])


def transfer_dynamics(spec, start_site, t_max, samples, controls=None):
    """One particle released on ``start_site`` (0-based) and left to hop."""
    n = spec.n_sites
    if not 0 <= start_site < n:
        raise ValueError(f"start_site {start_site} outside the chain")
    basis = FockBasis(n, 1)
    H = _static(spec, basis)
    psi0 = StateVector.basis_state(basis, [start_site])
    times = np.linspace(0.0, t_max, samples)
    _, snaps = evolve(H, psi0, 0.0, t_max, controls or EvolutionControls(), sample_times=times)
    occ = np.array([obs.occupancies(s) for s in snaps])
    return TransferResult(times, occ, dominant_frequency(times, occ[:, -1]))


# ---------------------------------------------------------------- rotations


def rotation_pulse(psi, spec, pulse_rabi, tau, ideal=False, controls=None):
    """Resonant pulse ``(pulse_rabi/2) sum X`` for ``tau``.

    ``ideal`` rotates every site independently (hopping switched off).
    """
    if not psi.basis.is_full:
        raise ContractViolation("a rotation pulse needs the full basis")
    if ideal:
        return obs.rotate_sites(psi, obs.rx(2 * np.pi * pulse_rabi * tau))
    H = build_boson_hamiltonian(spec.replace(drive=pulse_rabi, detuning=0.0), psi.basis)
    return evolve(H, psi, 0.0, tau, controls or EvolutionControls())


def quarter_pulse_duration(pulse_rabi):
    """``tau`` giving a pulse area of pi/2."""
    return 0.25 / pulse_rabi


# ---------------------------------------------------------------- phase map


@dataclass(frozen=True)
class PhaseMap:
    rabi: np.ndarray
    detuning: np.ndarray
    n_particles: np.ndarray  # (n_rabi, n_detuning)
    gap: np.ndarray


def sector_ground_energies(J, k=2):
    """Lowest ``k`` energies of every particle-number sector at zero drive."""
    spec = HamiltonianSpec(J)
    out = []
    for n in range(spec.n_sites + 1):
        basis = FockBasis(spec.n_sites, n)
        kk = min(k, basis.dimension)
        vals, _ = lowest_eigenpairs(build_boson_hamiltonian(spec, basis), kk)
        out.append(np.pad(vals, (0, k - kk), constant_values=np.inf))
    return np.array(out)


def phase_map(J, rabi_grid, detuning_grid):
    """Ground-state particle number and gap over a drive/detuning grid."""
    J = J if isinstance(J, CouplingMatrix) else CouplingMatrix(J)
    rabi_grid = np.asarray(rabi_grid, float)
    detuning_grid = np.asarray(detuning_grid, float)
    if rabi_grid.size == 0 or detuning_grid.size == 0:
        raise ValueError("grids must be nonempty")
    spec = HamiltonianSpec(J)
    n_sites = spec.n_sites
    npart = np.zeros((rabi_grid.size, detuning_grid.size))
    gap = np.zeros_like(npart)
    sectors = None
    basis = FockBasis(n_sites)
    h0 = build_boson_hamiltonian(spec, basis)
    drive = drive_operator(basis)
    number = number_operator(basis)
    counts = basis.particle_numbers()
    for a, rabi in enumerate(rabi_grid):
        for b, det in enumerate(detuning_grid):
            if rabi == 0:
                if sectors is None:
                    sectors = sector_ground_energies(J, 2)
                e = sectors - det * np.arange(n_sites + 1)[:, None]
                flat = np.sort(e.ravel())
                npart[a, b] = float(np.argmin(e[:, 0]))
                gap[a, b] = float(flat[1] - flat[0])
            else:
                op = h0 + drive.scaled(rabi) + number.scaled(-det)
                vals, vecs = lowest_eigenpairs(op, 2)
                npart[a, b] = float(np.abs(vecs[:, 0]) ** 2 @ counts)
                gap[a, b] = float(max(vals[1] - vals[0], 0.0))
    return PhaseMap(rabi_grid, detuning_grid, npart, gap)


# ---------------------------------------------------------------- Haldane path


@dataclass(frozen=True)
class HaldanePath:
    path: str
    grid: np.ndarray
    energies: np.ndarray  # (n_points, k), ground energy shifted to 0


HALDANE_SITE_CEILING = 20


def haldane_path(path, grid, L, k=5, J=-1.0, J_prime=0.25):
    """Lowest ``k`` levels along a ramp of the XXZ dimer family.

    ``delta_ramp`` uses fixed ``J``, ``J_prime`` with ``delta`` from the grid;
    ``K_ramp`` fixes ``delta = 1`` and sets ``J' = K``, ``J = K - 1``. Levels
    come from the sectors ``N/2 - 1`` to ``N/2 + 1``.
    """
    n = 2 * L
    if n > HALDANE_SITE_CEILING:
        raise ResourceLimitError(f"2L = {n} exceeds the {HALDANE_SITE_CEILING}-site ceiling")
    rows = []
    for x in grid:
        if path == "delta_ramp":
            spec = build_xxz_hamiltonian(J, J_prime, float(x), n)
        elif path == "K_ramp":
            spec = build_xxz_hamiltonian(float(x) - 1.0, float(x), 1.0, n)
        else:
            raise ValueError(f"unknown path {path!r}")
        levels = []
        for m in (n // 2 - 1, n // 2, n // 2 + 1):
            basis = FockBasis(n, m)
            vals, _ = lowest_eigenpairs(build_boson_hamiltonian(spec, basis), min(k, basis.dimension))
            levels.extend(vals)
        levels = np.sort(levels)[:k]
        rows.append(levels - levels[0])
    return HaldanePath(path, np.asarray(grid, float), np.array(rows))


# ---------------------------------------------------------------- correlations


def bulk_dimer_pairs(n_sites):
    """Strong-link pairs away from the two edge-adjacent dimers (0-based)."""
    return obs.intra_dimer_pairs(n_sites)[1:-1]


def correlation_summary(psi, rotated=None, pairs=None):
    """Dimer-averaged ``C^z``, ``C^x`` and both string orders.

    ``rotated`` is the state after the pi/2 read-out rotation; without it the
    X quantities are evaluated exactly.
    """
    n = psi.basis.n_sites
    pairs = pairs or bulk_dimer_pairs(n)
    cz = float(np.mean([obs.correlator(psi, "Z", i, j) for i, j in pairs]))
    sz = obs.string_order(psi, "Z")
    if rotated is None:
        cx = float(np.mean([obs.correlator(psi, "X", i, j) for i, j in pairs]))
        sx = obs.string_order(psi, "X")
    else:
        cx = float(np.mean([obs.correlator(rotated, "Z", i, j) for i, j in pairs]))
        sx = obs.string_order(rotated, "Z")
    return {"c_z": cz, "c_x": cx, "cz_string": sz, "cx_string": sx}


def magic_chain_spec(n_sites, J=2.42, J_prime=-0.92, config="topological"):
    from .geometry import build_magic_chain, coupling_matrix

    return HamiltonianSpec(coupling_matrix(build_magic_chain(n_sites, J, J_prime, config)))


def correlator_protocol(spec, final_detuning=-1.0, sweep=None, pulse_rabi=14.0, ideal_pulse=False,
                        controls=None):
    """Sweep-and-read-out experiment used for the correlation table.

    Defects cut the chain into independent segments. Each segment is swept
    and rotated on its own (the read-out rotation is a resonant pulse of
    area pi/2) and the surviving-site state is their product. Segment
    results are cached by site set.
    """
    from .mbcore import product_state
    from .noise import CorrelatorProtocol, contiguous_segments

    shape = dict(EMPTY_EDGE_SWEEP if sweep is None else sweep)
    schedule = SweepSchedule.canonical(final_detuning, **shape)
    tau = quarter_pulse_duration(pulse_rabi)
    cache = {}

    def segment(sites):
        key = tuple(sites)
        if key not in cache:
            mask = np.zeros(spec.n_sites, dtype=bool)
            mask[list(sites)] = True
            sub = spec.subchain(mask)
            psi = adiabatic_sweep(sub, schedule, controls=controls).final
            cache[key] = (psi, rotation_pulse(psi, sub, pulse_rabi, tau, ideal=ideal_pulse))
        return cache[key]

    def prepare(keep):
        return product_state([segment(s)[0] for s in contiguous_segments(keep)])

    def rotate(psi, keep):
        return product_state([segment(s)[1] for s in contiguous_segments(keep)])

    return CorrelatorProtocol(spec.n_sites, prepare, rotate, bulk_dimer_pairs(spec.n_sites))
