"""Acceptance criteria 1-15, each at its stated tolerance and time budget.

Every check prints one ``ACnn PASS|FAIL`` line (collected again in the
terminal summary by ``conftest.py``). Criteria known to fail under a faithful
implementation are marked ``xfail(strict=True)``: they still run in full and
print FAIL, and an unexpected pass breaks the suite. The reasons are logged
in the decisions ledger and the README.

Run standalone with ``python tests/test_acceptance.py`` to get only the
fifteen lines.
"""

import contextlib
import csv
import io
import json
import time

import numpy as np
import pytest
import scipy.linalg

from rydssh import cli
from rydssh.engine import evolve, lowest_eigenpairs
from rydssh.geometry import (
    MAGIC_ANGLE,
    build_magic_chain,
    coupling_matrix,
    dipolar_coupling,
    nearest_neighbor_chain,
)
from rydssh.mbcore import (
    FockBasis,
    HamiltonianSpec,
    StateVector,
    apply_local_z_rotation,
    build_boson_hamiltonian,
    build_fermion_hamiltonian,
    build_xxz_hamiltonian,
)
from rydssh.protocols import haldane_path, sector_ground_energies
from rydssh.spmodel import band_gap, mid_gap_splitting
from rydssh.sptlab import ProjectiveRep, classify, mps_ground_states, perturbative_oracle, three_site_shifts

RESULTS = {}


def report(ac, ok, detail, elapsed, budget):
    within = elapsed <= budget
    ok = bool(ok) and within
    line = f"AC{ac:02d} {'PASS' if ok else 'FAIL'}  {detail}  [{elapsed:.1f} s of {budget:g} s]"
    RESULTS[ac] = line
    print(line)
    assert ok, line


def known_failure(fn):
    return pytest.mark.xfail(strict=True, reason="fails under the faithful model; see the decisions ledger")(fn)


def run_cli(tmp, *argv):
    with contextlib.redirect_stdout(io.StringIO()):
        code = cli.main([*argv, "--out", str(tmp)])
    assert code == 0, f"rydssh {' '.join(argv)} exited {code}"
    name = argv[1] if argv[0] == "reproduce" else argv[0]
    (path,) = tmp.glob(f"{name}.*")
    return path


def read_csv(path):
    """``(summary, rows)``; summary values come from the ``# key: value`` lines."""
    summary, body = {}, []
    for line in path.read_text().splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition(": ")
            summary[k] = v
        else:
            body.append(line)
    return summary, list(csv.DictReader(io.StringIO("\n".join(body))))


@pytest.fixture
def out(tmp_path):
    return tmp_path


# ---------------------------------------------------------------- 1-3 geometry


def test_ac01_magic_angle_null():
    t = time.perf_counter()
    r = 10.0
    null = abs(dipolar_coupling((0, 0), (r * np.cos(MAGIC_ANGLE), r * np.sin(MAGIC_ANGLE)), 0.0, 5000.0))
    # filled disk (positive) inside the magic cone, empty disk (negative) outside
    degs = np.arange(0, 181, 5)
    signs = [np.sign(dipolar_coupling((0, 0), (r * np.cos(np.radians(d)), r * np.sin(np.radians(d))), 0.0, 5000.0))
             for d in degs]
    m = np.degrees(MAGIC_ANGLE)
    expected = [1 if (d < m or d > 180 - m) else -1 for d in degs]
    ok = null <= 1e-12 and signs == expected
    report(1, ok, f"|J(theta_m)| = {null:.1e} MHz, sign pattern {'matches' if signs == expected else 'differs'}",
           time.perf_counter() - t, 1)


def test_ac02_couplings():
    t = time.perf_counter()
    J = coupling_matrix(build_magic_chain(14, 2.42, -0.92, "topological")).values
    err = max(abs(J[k, k + 1] - (-0.92 if k % 2 == 0 else 2.42)) for k in range(13))
    third = max(abs(J[k, k + 3]) for k in range(11))
    ok = err <= 1e-9 and 0.1 <= third <= 0.3
    report(2, ok, f"max |dJ| = {err:.1e} MHz, third neighbour {third:.3f} MHz", time.perf_counter() - t, 1)


def test_ac03_band_gap():
    t = time.perf_counter()
    gap = band_gap(nearest_neighbor_chain(14, 2.42, -0.92))
    ok = abs(gap - 3.00) <= 1e-9
    report(3, ok, f"band gap {gap:.12f} MHz", time.perf_counter() - t, 1)


# ---------------------------------------------------------------- 4 hybridization


@known_failure
def test_ac04_hybridization_scaling(out):
    t = time.perf_counter()
    near, _ = read_csv(run_cli(out, "hybridization", "--model", "nearest", "--n-max", "20"))
    slope = float(near["exp_slope_per_site"])
    target = np.log(0.92 / 2.42)
    full, rows = read_csv(run_cli(out, "hybridization", "--model", "full", "--n-max", "100"))
    loglog = float(full["loglog_slope"])
    e14 = float(next(r["e_hyb_mhz"] for r in rows if r["n"] == "14"))
    ok_a = abs(slope - target) <= 0.05 * abs(target)
    ok_b = abs(loglog + 4.0) <= 0.2
    ok_c = abs(e14 - 0.020) <= 0.005
    report(4, ok_a and ok_b and ok_c,
           f"ln-slope {slope:.3f} per site vs {target:.3f} ({'ok' if ok_a else 'off'}); "
           f"log-log {loglog:.3f} ({'ok' if ok_b else 'off'}); E_hyb(14) {e14:.4f} MHz ({'ok' if ok_c else 'off'})",
           time.perf_counter() - t, 10)


# ---------------------------------------------------------------- 5-6 many-body spectra


def test_ac05_jordan_wigner():
    t = time.perf_counter()
    worst, least_broken = 0.0, np.inf
    for n in (4, 6, 8, 10):
        J = nearest_neighbor_chain(n, 2.42, -0.92)
        basis = FockBasis(n)
        eb = np.linalg.eigvalsh(build_boson_hamiltonian(HamiltonianSpec(J), basis).to_dense())
        ef = np.linalg.eigvalsh(build_fermion_hamiltonian(J, basis).to_dense())
        worst = max(worst, np.abs(eb - ef).max())
        v = J.values.copy()
        v[0, 2] = v[2, 0] = 0.2
        eb = np.linalg.eigvalsh(build_boson_hamiltonian(HamiltonianSpec(v), basis).to_dense())
        ef = np.linalg.eigvalsh(build_fermion_hamiltonian(v, basis).to_dense())
        least_broken = min(least_broken, np.abs(eb - ef).max())
    ok = worst <= 1e-10 and least_broken > 1e-3
    report(5, ok, f"nearest-neighbour diff {worst:.1e} MHz, with J_13 diff >= {least_broken:.3f} MHz",
           time.perf_counter() - t, 60)


def test_ac06_degeneracy():
    t = time.perf_counter()
    Jt = coupling_matrix(build_magic_chain(14, 2.42, -0.92, "topological"))
    e = np.sort(sector_ground_energies(Jt, 2).ravel())
    spread = e[3] - e[0]
    e_hyb = mid_gap_splitting(Jt)
    Jv = coupling_matrix(build_magic_chain(14, 2.42, -0.92, "trivial"))
    sec = sector_ground_energies(Jv, 2)
    flat = np.sort(sec.ravel())
    n_ground = int(np.argmin(sec[:, 0]))
    gap = flat[1] - flat[0]
    ok = spread <= e_hyb + 1e-6 and n_ground == 7 and gap > 1.0
    report(6, ok, f"topological spread {spread:.5f} <= {e_hyb:.5f} MHz (fifth at +{e[4] - e[0]:.3f}); "
                  f"trivial ground n={n_ground}, gap {gap:.3f} MHz", time.perf_counter() - t, 60)


# ---------------------------------------------------------------- 7-9 protocols


def test_ac07_phase_map(out):
    t = time.perf_counter()
    _, rows = read_csv(run_cli(out, "reproduce", "phase-map-n10"))
    zero = {float(r["delta_mhz"]): float(r["n_particles"]) for r in rows if float(r["rabi_mhz"]) == 0.0}
    deltas = np.array(sorted(zero))
    below = zero[deltas[deltas < 0].max()]
    above = zero[deltas[deltas > 0].min()]
    empty, full = zero[deltas[0]], zero[deltas[-1]]
    # plateaus: the outermost three grid points all sit at 0 and 10
    plateaus = all(zero[d] == 0 for d in deltas[:3]) and all(zero[d] == 10 for d in deltas[-3:])
    ok = below == 4 and above == 6 and plateaus
    report(7, ok, f"<N> {below:g} -> {above:g} across 0, plateaus {empty:g}/{full:g}, {len(rows)} grid points",
           time.perf_counter() - t, 300)


def test_ac08_sweep_fidelity(out):
    t = time.perf_counter()
    s, _ = read_csv(run_cli(out, "reproduce", "fig-s5"))
    ov, modal = float(s["final_overlap"]), int(s["modal_n"])
    ok = 0.955 <= ov <= 0.975 and modal == 6
    report(8, ok, f"final overlap {ov:.4f}, modal n = {modal}", time.perf_counter() - t, 120)


def test_ac09_error_free_correlators(out):
    t = time.perf_counter()
    s, _ = read_csv(run_cli(out, "reproduce", "table-s1-ideal"))
    got = {k: float(s[k]) for k in ("c_z", "c_x", "cz_string", "cx_string")}
    want = dict(c_z=(-0.96, 0.03), c_x=(0.98, 0.03), cz_string=(0.78, 0.05), cx_string=(0.88, 0.05))
    ok = all(abs(got[k] - m) <= tol for k, (m, tol) in want.items())
    report(9, ok, ", ".join(f"{k} {got[k]:+.3f}" for k in want), time.perf_counter() - t, 300)


@pytest.mark.slow
@known_failure
def test_ac10_noisy_correlators(out):
    t = time.perf_counter()
    s, _ = read_csv(run_cli(out, "reproduce", "table-s1"))
    want = dict(c_z=-0.69, c_x=0.68, cz_string=0.11, cx_string=0.10)
    got = {k: float(s[k]) for k in want}
    flags = {k: abs(got[k] - m) <= 0.05 for k, m in want.items()}
    report(10, all(flags.values()),
           ", ".join(f"{k} {got[k]:+.3f}+-{float(s[k + '_sem']):.3f} ({'ok' if flags[k] else 'off'})" for k in want),
           time.perf_counter() - t, 1800)


# ---------------------------------------------------------------- 11-14 symmetry


def test_ac11_symmetry_protection(out):
    t = time.perf_counter()
    doc = json.loads(run_cli(out, "reproduce", "fig-5").read_text())
    sp, mb, res = doc["single_particle_splitting_mhz"], doc["many_body_splitting_mhz"], doc["sb_residual"]
    ok = abs(sp - 0.21) <= 0.05 and mb <= 0.02 and res <= 1e-12
    report(11, ok, f"single-particle {sp:.3f} MHz, many-body {mb:.5f} MHz, S_B residual {res:.1e}",
           time.perf_counter() - t, 300)


def test_ac12_perturbative_oracle():
    t = time.perf_counter()
    J = 2.42
    grid = np.linspace(-0.3, 0.3, 10)
    worst_ratio = 0.0
    for jp in grid:
        for jpp in grid:
            bound = 5 * max(abs(jp), abs(jpp)) ** 3 / J**2
            for stats in ("boson", "fermion"):
                e2 = perturbative_oracle(J, jp, jpp, stats)
                ex = three_site_shifts(J, jp, jpp, stats)
                err = max(abs(ex[0] - e2[0]), abs(ex[1] - e2[1]), abs((ex[1] - ex[0]) - (e2[1] - e2[0])))
                worst_ratio = max(worst_ratio, err / bound if bound else (0.0 if err < 1e-14 else np.inf))

    def split(stats, jp, jpp):
        e = three_site_shifts(J, jp, jpp, stats)
        return e[1] - e[0]

    odd_b = max(abs(split("boson", jp, jpp) - split("boson", jp, -jpp)) for jp in grid for jpp in grid)
    even_f = max(abs(split("fermion", jp, jpp) + split("fermion", jp, -jpp)) for jp in grid for jpp in grid)
    f_size = max(abs(split("fermion", jp, jpp)) for jp in grid for jpp in grid)
    parity_ok = odd_b <= 1e-12 and even_f <= 5 * 0.3**3 / J**2 and f_size > 10 * even_f
    ok = worst_ratio <= 1.0 and parity_ok
    report(12, ok, f"worst error / bound {worst_ratio:.3f}; boson odd part {odd_b:.1e}, "
                   f"fermion even part {even_f:.1e} vs size {f_size:.3f} MHz", time.perf_counter() - t, 30)


def test_ac13_cohomology(out):
    t = time.perf_counter()
    top = json.loads(run_cli(out, "reproduce", "cohomology").read_text())
    chi = np.array([r[1] + 1j * r[2] for r in top["rows"]])
    phis = np.array([r[0] for r in top["rows"]])
    top_err = np.abs(chi - np.exp(1j * phis)).max()
    (out / "triv").mkdir()
    cfg = out / "triv.json"
    cfg.write_text(json.dumps({"command": "classify", "protocol": {"state": "trivial"}}))
    triv = json.loads(run_cli(out / "triv", "classify", "--config", str(cfg)).read_text())
    triv_err = max(abs(complex(r[1], r[2]) - 1) for r in triv["rows"])
    rng = np.random.default_rng(7)
    mps_top, mps_triv = mps_ground_states()
    stable = True
    for _ in range(20):
        phases = {}

        def rephase(g):
            return phases.setdefault(g.key(), np.exp(1j * rng.uniform(0, 2 * np.pi)))

        stable &= classify(ProjectiveRep(mps_top).rephased(rephase), phis) == "topological"
        stable &= classify(ProjectiveRep(mps_triv).rephased(rephase), phis) == "trivial"
    ok = (top_err <= 1e-10 and triv_err <= 1e-10 and top["phase"] == "topological"
          and triv["phase"] == "trivial" and stable)
    report(13, ok, f"|chi - e^(i phi)| {top_err:.1e}, trivial |chi - 1| {triv_err:.1e}, "
                   f"classes {top['phase']}/{triv['phase']}, 20 rephasings {'stable' if stable else 'unstable'}",
           time.perf_counter() - t, 10)


def test_ac14_haldane_path(out):
    t = time.perf_counter()
    _, rows = read_csv(run_cli(out, "reproduce", "haldane-path"))
    levels = {}
    for r in rows:
        levels.setdefault(float(r["x"]), {})[int(r["level"])] = float(r["energy_mhz"])
    spread = max(v[3] for v in levels.values())
    fifth = min(v[4] for v in levels.values())
    covered = min(levels) == 0.0 and max(levels) == 1.0
    k = haldane_path("K_ramp", [0.5], 5).energies[0]
    k_gap = k[4] - k[3]
    spec = build_xxz_hamiltonian(-1.0, 0.25, 0.0, 10)
    op = build_boson_hamiltonian(spec, FockBasis(10, 5))
    flip = np.abs(apply_local_z_rotation(op, range(0, 10, 2), np.pi).to_dense() + op.to_dense()).max()
    J = 1.0
    ok = covered and spread <= 0.05 * J and fifth >= 0.1 * J and k_gap >= 0.05 and flip <= 1e-12
    report(14, ok, f"cluster spread {spread:.4f}, fifth level >= {fifth:.3f}, K=0.5 gap {k_gap:.3f}, "
                   f"gauge flip {flip:.1e}", time.perf_counter() - t, 600)


# ---------------------------------------------------------------- 15 kernels


def test_ac15_kernel_oracles(out):
    t = time.perf_counter()
    J = coupling_matrix(build_magic_chain(8, 2.42, -0.92))
    op = build_boson_hamiltonian(HamiltonianSpec(J, drive=0.8, detuning=0.3))
    rng = np.random.default_rng(0)
    psi = rng.normal(size=op.dim) + 1j * rng.normal(size=op.dim)
    psi /= np.linalg.norm(psi)
    ref = scipy.linalg.expm(-2j * np.pi * 1.3 * op.to_dense()) @ psi
    res = evolve(op, StateVector(op.basis, psi), 0.0, 1.3)
    krylov = np.abs(res.amps - ref).max()
    drift = abs(res.norm - 1)
    big = build_boson_hamiltonian(HamiltonianSpec(coupling_matrix(build_magic_chain(12, 2.42, -0.92)),
                                                  drive=0.5, detuning=-0.2))
    vals, _ = lowest_eigenpairs(big, 4)
    lanczos = np.abs(vals - np.linalg.eigvalsh(big.to_dense())[:4]).max()
    a, b = out / "a", out / "b"
    blobs = []
    for d in (a, b):
        d.mkdir()
        blobs.append(run_cli(d, "reproduce", "cohomology").read_bytes()
                     + run_cli(d, "hybridization", "--n-max", "30").read_bytes())
    same = blobs[0] == blobs[1]
    ok = krylov <= 1e-7 and lanczos <= 1e-8 and drift <= 1e-8 and same
    report(15, ok, f"Krylov {krylov:.1e} (dim {op.dim}), Lanczos {lanczos:.1e} MHz (dim {big.dim}), "
                   f"norm drift {drift:.1e}, reruns {'identical' if same else 'differ'}",
           time.perf_counter() - t, 120)


if __name__ == "__main__":
    import inspect
    import tempfile
    from pathlib import Path

    for name, fn in sorted(globals().items()):
        if not name.startswith("test_ac"):
            continue
        with tempfile.TemporaryDirectory() as d:
            try:
                fn(**({"out": Path(d)} if "out" in inspect.signature(fn).parameters else {}))
            except AssertionError:
                pass
