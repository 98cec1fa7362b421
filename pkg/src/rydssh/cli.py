"""Command-line workbench.

Every subcommand reads an optional JSON config (validated against
``schema/config.schema.json`` plus a few physics rules), merges it over
built-in defaults, runs one pipeline and writes a single CSV or JSON file
into ``--out``. Outputs carry the tool version, the config hash and the seed
and contain no timestamps, so reruns are byte-identical.

Exit codes: 0 success, 2 config or validation error, 3 numerical failure,
4 resource ceiling.
"""

from __future__ import annotations

import argparse
import copy
import json
import re
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .io import config_hash, csv_text, dumps17

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_RESOURCE = 0, 2, 3, 4

COMMANDS = ("spectrum", "spectroscopy", "hybridization", "transfer", "sweep", "phase-map",
            "correlators", "perturbation", "haldane-path", "classify")

CHAIN_DEFAULTS = dict(n_sites=14, J=2.42, J_prime=-0.92, config="topological", model="full_dipolar")

PROTOCOL_DEFAULTS = {
    "spectrum": dict(level="single_particle", levels=3),
    "spectroscopy": dict(probe_rabi=0.1, t_probe=2.5, detuning_grid=dict(start=-4.0, stop=4.0, num=81)),
    "hybridization": dict(n_min=4, n_max=100),
    "transfer": dict(start_site=1, t_max=40.0, samples=801),
    "sweep": dict(final_detuning=1.0, samples=50),
    "phase-map": dict(rabi_grid=dict(start=0.0, stop=2.0, num=11), detuning_grid=dict(start=-4.0, stop=4.0, num=41)),
    "correlators": dict(final_detuning=-1.0, pulse_rabi=14.0, ideal_pulse=False),
    "perturbation": dict(many_body=True),
    "haldane-path": dict(path="delta_ramp", L=5, levels=5, grid=dict(start=0.0, stop=1.0, num=11)),
    "classify": dict(state="topological", gauge_phi=0.0, phi_samples=7),
}

ERROR_DEFAULTS = dict(enabled=False, eta=0.06, eps=0.05, eps_prime=0.05, realizations=1000, shots=10)

# reproduce targets: id -> pinned config file shipped in rydssh/configs
REGISTRY = {
    "table-s1": "table-s1.json",
    "table-s1-ideal": "table-s1-ideal.json",
    "fig-s5": "fig-s5.json",
    "fig-2f": "fig-2f.json",
    "fig-3bc": "fig-3bc.json",
    "fig-5": "fig-5.json",
    "phase-map-n10": "phase-map-n10.json",
    "haldane-path": "haldane-path.json",
    "cohomology": "cohomology.json",
}


class ConfigError(ValueError):
    """Invalid configuration; the message carries the offending line when known."""


# ---------------------------------------------------------------- config handling


def _schema():
    return json.loads(resources.files("rydssh").joinpath("schema/config.schema.json").read_text())


def _line_of(text, path):
    """1-based line of the JSON member addressed by ``path`` (best effort)."""
    if text is None:
        return None
    pos = 0
    for key in path:
        if isinstance(key, int):
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(str(key))).search(text, pos)
        if m is None:
            break
        pos = m.start()
    if not path or pos == 0 and not text.startswith("{"):
        return 1
    return text.count("\n", 0, pos) + 1


def _where(source, text, path):
    line = _line_of(text, path)
    dotted = ".".join(str(p) for p in path) or "<root>"
    loc = f"{source}:{line}" if line else source
    return f"{loc}: {dotted}"


def load_config(path):
    """Parse a config file; returns ``(config, text)``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror or exc})") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}:1: top level must be an object")
    return cfg, text


def schema_diagnostics(cfg, source="<config>", text=None):
    import jsonschema

    validator = jsonschema.Draft202012Validator(_schema())
    out = []
    for err in sorted(validator.iter_errors(cfg), key=lambda e: list(map(str, e.absolute_path))):
        out.append(f"{_where(source, text, list(err.absolute_path))}: {err.message}")
    return out


def physics_diagnostics(cfg, source="<config>", text=None):
    """Rules the schema cannot express."""
    out = []
    chain = cfg.get("chain", {})
    n = chain.get("n_sites")
    if n is not None and n % 2:
        out.append(f"{_where(source, text, ['chain', 'n_sites'])}: odd value {n}; "
                   "the dimerized chain needs an even number of sites")
    J, Jp = chain.get("J"), chain.get("J_prime")
    if J is not None and Jp is not None and not abs(J) > abs(Jp):
        out.append(f"{_where(source, text, ['chain', 'J_prime'])}: |J_prime| = {abs(Jp)} must be "
                   f"smaller than |J| = {abs(J)} (J is the strong intra-dimer coupling)")
    if cfg.get("command") == "correlators" and n is not None and n < 8:
        out.append(f"{_where(source, text, ['chain', 'n_sites'])}: correlators need n_sites >= 8 so that "
                   "a dimer remains between the two edge-adjacent ones")
    proto = cfg.get("protocol", {})
    if proto.get("sector") is not None and proto.get("rabi", 0.0) > 0:
        out.append(f"{_where(source, text, ['protocol', 'rabi'])}: drive {proto['rabi']} MHz with fixed "
                   f"sector {proto['sector']}; a drive does not conserve particle number, so a "
                   "number-conserving sector basis cannot represent it (set sector to null or rabi to 0)")
    if n is not None and proto.get("sector") is not None and proto["sector"] > n:
        out.append(f"{_where(source, text, ['protocol', 'sector'])}: sector {proto['sector']} exceeds "
                   f"n_sites = {n}")
    if n is not None and proto.get("start_site") is not None and proto["start_site"] > n:
        out.append(f"{_where(source, text, ['protocol', 'start_site'])}: start_site "
                   f"{proto['start_site']} outside a {n}-site chain")
    return out


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve(command, user_cfg):
    """Defaults for ``command`` overlaid with ``user_cfg``."""
    base = {
        "command": command,
        "seed": 0,
        "chain": dict(CHAIN_DEFAULTS),
        "protocol": dict(PROTOCOL_DEFAULTS[command]),
        "errors": dict(ERROR_DEFAULTS),
    }
    if command == "sweep":
        base["chain"]["n_sites"] = 10
    return _merge(base, user_cfg)


# ---------------------------------------------------------------- builders


def _grid(g):
    return np.linspace(g["start"], g["stop"], g["num"])


def build_couplings(chain):
    """``(CouplingMatrix, geometry or None, edge report or None)`` for a chain block."""
    from .geometry import (
        build_magic_chain,
        coupling_matrix,
        load_geometry,
        nearest_neighbor_chain,
        perturb_edge,
    )

    geom = None
    if "geometry_file" in chain:
        geom = load_geometry(chain["geometry_file"])
    elif chain["model"] == "nearest_neighbor":
        if chain.get("J_pp"):
            raise ConfigError("chain.J_pp: an edge perturbation needs the full dipolar model")
        return nearest_neighbor_chain(chain["n_sites"], chain["J"], chain["J_prime"], chain["config"]), None, None
    else:
        geom = build_magic_chain(chain["n_sites"], chain["J"], chain["J_prime"], chain["config"])
    report = None
    if chain.get("J_pp"):
        geom, report = perturb_edge(geom, chain["J_pp"])
    return coupling_matrix(geom, nearest_neighbor_only=chain["model"] == "nearest_neighbor"), geom, report


class Output:
    def __init__(self, header=None, rows=(), summary=None):
        self.header = header
        self.rows = list(rows)
        self.summary = summary or {}


def _edge_pairs_1based(report):
    return {f"{i}-{j}": v for (i, j), v in report.items()}


def run_spectrum(cfg, args):
    from .spmodel import band_gap, diagonalize, edge_modes, open_chain_gap

    J, _, _ = build_couplings(cfg["chain"])
    proto = cfg["protocol"]
    if proto["level"] == "single_particle":
        spec = diagonalize(J)
        edge = edge_modes(spec)
        rows = [(k, float(e), int(k in edge.indices)) for k, e in enumerate(spec.eigenvalues)]
        summary = dict(band_gap_mhz=band_gap(J), open_chain_gap_mhz=open_chain_gap(J),
                       e_hyb_mhz=edge.e_hyb, n_edge_modes=edge.n_modes,
                       localization_length_sites=edge.localization_length,
                       chiral_residual=spec.chiral_residual)
        return Output(["index", "energy_mhz", "edge"], rows, summary)
    from .engine import lowest_eigenpairs
    from .mbcore import FockBasis, HamiltonianSpec, build_boson_hamiltonian

    spec = HamiltonianSpec(J)
    rows, ground = [], (None, np.inf)
    for n in range(spec.n_sites + 1):
        basis = FockBasis(spec.n_sites, n)
        vals, _ = lowest_eigenpairs(build_boson_hamiltonian(spec, basis), min(proto["levels"], basis.dimension))
        rows += [(n, lvl, float(v)) for lvl, v in enumerate(vals)]
        if vals[0] < ground[1]:
            ground = (n, float(vals[0]))
    return Output(["n", "level", "energy_mhz"], rows, dict(ground_sector=ground[0], ground_energy_mhz=ground[1]))


def run_spectroscopy(cfg, args):
    from .mbcore import FockBasis, HamiltonianSpec, StateVector
    from .protocols import spectroscopy_scan

    J, _, _ = build_couplings(cfg["chain"])
    p = cfg["protocol"]
    spec = HamiltonianSpec(J)
    basis = FockBasis(spec.n_sites)
    res = spectroscopy_scan(spec, StateVector.vacuum(basis), p["probe_rabi"], p["t_probe"], _grid(p["detuning_grid"]))
    occ = res.postselected if res.postselected is not None else res.occupancy
    rows = [(float(d), site + 1, float(occ[a, site])) for a, d in enumerate(res.detunings)
            for site in range(spec.n_sites)]
    return Output(["delta_mhz", "site", "occupancy"], rows, dict(postselected_max_one=True))


def run_hybridization(cfg, args):
    from .spmodel import hybridization_scan

    c, p = cfg["chain"], cfg["protocol"]
    scan = hybridization_scan(p["n_max"], c["model"], c["J"], c["J_prime"], n_min=p["n_min"])
    rows = [(int(n), float(e)) for n, e in zip(scan.n, scan.e_hyb)]
    summary = dict(model=scan.model, exp_slope_per_site=scan.exp_slope, loglog_slope=scan.loglog_slope)
    return Output(["n", "e_hyb_mhz"], rows, {k: v for k, v in summary.items() if v is not None})


def run_transfer(cfg, args):
    from .mbcore import HamiltonianSpec
    from .protocols import transfer_dynamics
    from .spmodel import mid_gap_splitting

    J, _, _ = build_couplings(cfg["chain"])
    p = cfg["protocol"]
    res = transfer_dynamics(HamiltonianSpec(J), p["start_site"] - 1, p["t_max"], p["samples"])
    rows = [(float(t), site + 1, float(res.occupancy[a, site])) for a, t in enumerate(res.times)
            for site in range(J.n)]
    return Output(["t_us", "site", "occupancy"], rows,
                  dict(e_hyb_transfer_mhz=res.e_hyb, e_hyb_spectrum_mhz=mid_gap_splitting(J)))


def _sweep_schedule(p):
    from .engine import SweepSchedule
    from .protocols import FILLED_EDGE_SWEEP

    shape = _merge(FILLED_EDGE_SWEEP, p.get("sweep", {}))
    return SweepSchedule.canonical(p["final_detuning"], **shape)


def _evolution_controls(p):
    from .engine import EvolutionControls
    from .protocols import DRIVEN_SUBSTEP

    return EvolutionControls(max_substep=p.get("substep_us", DRIVEN_SUBSTEP))


def run_sweep(cfg, args):
    from .mbcore import HamiltonianSpec
    from .protocols import adiabatic_sweep, sweep_target

    J, _, _ = build_couplings(cfg["chain"])
    p = cfg["protocol"]
    spec = HamiltonianSpec(J)
    _, target = sweep_target(spec, p["final_detuning"])
    res = adiabatic_sweep(spec, _sweep_schedule(p), target, p["samples"], _evolution_controls(p))
    rows = [(float(t), n, float(res.p_n[a, n])) for a, t in enumerate(res.times) for n in range(spec.n_sites + 1)]
    final = res.p_n[-1]
    return Output(["t_us", "n", "p_n"], rows,
                  dict(final_overlap=float(res.overlap[-1]), modal_n=int(np.argmax(final)),
                       p_modal=float(final.max()), mean_n=float(final @ np.arange(final.size))))


def run_phase_map(cfg, args):
    from .protocols import phase_map

    J, _, _ = build_couplings(cfg["chain"])
    p = cfg["protocol"]
    pm = phase_map(J, _grid(p["rabi_grid"]), _grid(p["detuning_grid"]))
    rows = [(float(r), float(d), float(pm.n_particles[a, b]), float(pm.gap[a, b]))
            for a, r in enumerate(pm.rabi) for b, d in enumerate(pm.detuning)]
    return Output(["rabi_mhz", "delta_mhz", "n_particles", "gap_mhz"], rows)


def run_correlators(cfg, args):
    from . import observables as obs
    from .mbcore import HamiltonianSpec
    from .noise import ErrorModel, monte_carlo_experiment
    from .protocols import EMPTY_EDGE_SWEEP, correlation_summary, correlator_protocol

    J, _, _ = build_couplings(cfg["chain"])
    p, err = cfg["protocol"], cfg["errors"]
    spec = HamiltonianSpec(J)
    sweep = _merge(EMPTY_EDGE_SWEEP, p.get("sweep", {}))
    protocol = correlator_protocol(spec, p["final_detuning"], sweep, p["pulse_rabi"], p["ideal_pulse"],
                                   _evolution_controls(p))
    keep = np.ones(spec.n_sites, dtype=bool)
    states = protocol.prepare(~keep)
    psi, rotated = states["z"], states["x"]
    rows = []
    for basis, state in (("z", psi), ("x", rotated)):
        m = obs.correlation_map(state, "Z").values
        rows += [(i + 1, j + 1, basis, float(m[i, j])) for i in range(spec.n_sites) for j in range(spec.n_sites)]
    summary = correlation_summary(psi, rotated, protocol.pairs)
    summary["errors"] = "off"
    if err["enabled"]:
        model = ErrorModel(err["eta"], err["eps"], err["eps_prime"], seed=cfg["seed"])
        mc = monte_carlo_experiment(protocol, model, err["realizations"], err["shots"])
        summary = {k: v for k, v in mc.mean.items()}
        summary.update({f"{k}_sem": v for k, v in mc.sem.items()})
        summary.update(errors="on", realizations=err["realizations"], shots=err["shots"],
                       distinct_defect_masks=mc.n_masks)
    return Output(["i", "j", "basis", "value"], rows, summary)


def run_perturbation(cfg, args):
    from .engine import lowest_eigenpairs
    from .mbcore import FockBasis, HamiltonianSpec, build_boson_hamiltonian, symmetry_residual_SB
    from .spmodel import mid_gap_splitting
    from .sptlab import perturbative_oracle, three_site_shifts

    c = dict(cfg["chain"])
    c.setdefault("J_pp", 0.26)
    J, _, report = build_couplings(c)
    summary = dict(J_pp_mhz=c["J_pp"], single_particle_splitting_mhz=mid_gap_splitting(J))
    if report is not None:
        summary.update(displacement_um=report.displacement_um,
                       couplings_before_mhz=_edge_pairs_1based(report.before),
                       couplings_after_mhz=_edge_pairs_1based(report.after))
    spec = HamiltonianSpec(J)
    if cfg["protocol"]["many_body"]:
        n = spec.n_sites
        vals, _ = lowest_eigenpairs(build_boson_hamiltonian(spec, FockBasis(n, n // 2)), 2)
        summary["many_body_splitting_mhz"] = float(vals[1] - vals[0])
        if n <= 16:
            summary["sb_residual"] = symmetry_residual_SB(build_boson_hamiltonian(spec))
    Jp = c["J_prime"]
    for stats in ("boson", "fermion"):
        e2 = perturbative_oracle(c["J"], Jp, c["J_pp"], stats)
        ex = three_site_shifts(c["J"], Jp, c["J_pp"], stats)
        summary[f"three_site_{stats}"] = dict(e2_empty=e2[0], e2_filled=e2[1], exact_empty=ex[0], exact_filled=ex[1])
    return Output(None, (), summary)


def run_haldane_path(cfg, args):
    from .protocols import haldane_path

    p = cfg["protocol"]
    res = haldane_path(p["path"], _grid(p["grid"]), p["L"], k=p["levels"])
    rows = [(float(x), lvl, float(e)) for a, x in enumerate(res.grid) for lvl, e in enumerate(res.energies[a])]
    e = res.energies
    summary = dict(path=res.path, max_cluster_spread=float(e[:, 3].max()), min_gap_above_cluster=float((e[:, 4] - e[:, 3]).min())) \
        if e.shape[1] >= 5 else dict(path=res.path)
    return Output(["x", "level", "energy_mhz"], rows, summary)


def run_classify(cfg, args):
    from .sptlab import R, S, ProjectiveRep, classify, cocycle, gauge_rotate, kramers_index, mps_ground_states

    p = cfg["protocol"]
    top, triv = mps_ground_states()
    mps = top if p["state"] == "topological" else triv
    if p["gauge_phi"]:
        mps = gauge_rotate(mps, p["gauge_phi"])
    phis = np.linspace(0.3, 2 * np.pi - 0.3, p["phi_samples"])
    rep = ProjectiveRep(mps)
    rows = []
    for phi in phis:
        chi = cocycle(rep, S, R(phi)) / cocycle(rep, R(phi), S)
        rows.append((float(phi), float(chi.real), float(chi.imag)))
    return Output(["phi", "chi_re", "chi_im"], rows,
                  dict(state=p["state"], phase=classify(rep, phis), kramers_index=kramers_index(rep)))


RUNNERS = {
    "spectrum": run_spectrum,
    "spectroscopy": run_spectroscopy,
    "hybridization": run_hybridization,
    "transfer": run_transfer,
    "sweep": run_sweep,
    "phase-map": run_phase_map,
    "correlators": run_correlators,
    "perturbation": run_perturbation,
    "haldane-path": run_haldane_path,
    "classify": run_classify,
}

#: format used when ``--format`` is not given
DEFAULT_FORMAT = {name: "csv" for name in COMMANDS} | {"perturbation": "json", "classify": "json"}


# ---------------------------------------------------------------- output


def _meta(cfg):
    return {"tool": f"rydssh {__version__}", "config_hash": config_hash(cfg), "seed": int(cfg["seed"])}


def render(out, cfg, fmt):
    meta = _meta(cfg)
    if fmt == "json":
        doc = {"meta": meta}
        doc.update(out.summary)
        if out.header is not None:
            doc["columns"] = out.header
            doc["rows"] = [list(r) for r in out.rows]
        return dumps17(doc)
    comments = [f"{k}: {v}" for k, v in meta.items()]
    comments += [f"{k}: {v}" for k, v in out.summary.items() if not isinstance(v, dict)]
    if out.header is None:
        flat = []
        for k, v in out.summary.items():
            if isinstance(v, dict):
                flat += [(f"{k}.{kk}", vv) for kk, vv in v.items()]
            else:
                flat.append((k, v))
        return csv_text(["key", "value"], flat, [f"{k}: {v}" for k, v in meta.items()])
    return csv_text(out.header, out.rows, comments)


# ---------------------------------------------------------------- entry point


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--seed", type=int, help="RNG seed (unsigned 64-bit)")
    common.add_argument("--threads", type=int, help="cap on BLAS worker threads")
    common.add_argument("--realizations", type=int, help="defect realizations for noisy runs")
    common.add_argument("--format", choices=("csv", "json"), help="output format")

    ap = argparse.ArgumentParser(prog="rydssh", description="Rydberg SSH-chain simulation workbench")
    ap.add_argument("--version", action="version", version=f"rydssh {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "hybridization":
            sp.add_argument("--n-max", type=int)
            sp.add_argument("--model", choices=("full", "nearest", "full_dipolar", "nearest_neighbor"))
        if name == "correlators":
            sp.add_argument("--errors", choices=("on", "off"))
    rp = sub.add_parser("reproduce", parents=[common], help="run a pinned configuration")
    rp.add_argument("target", choices=sorted(REGISTRY))
    rp.add_argument("--errors", choices=("on", "off"))
    vp = sub.add_parser("validate", help="check a config without running it")
    vp.add_argument("config_path", nargs="?")
    vp.add_argument("--config", dest="config_flag")
    return ap


def _apply_flags(cfg, args):
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError(f"--seed: {args.seed} is not an unsigned 64-bit integer")
        cfg["seed"] = args.seed
    if args.realizations is not None:
        cfg["errors"]["realizations"] = args.realizations
    if getattr(args, "errors", None) is not None:
        cfg["errors"]["enabled"] = args.errors == "on"
    if getattr(args, "n_max", None) is not None:
        cfg["protocol"]["n_max"] = args.n_max
    if getattr(args, "model", None) is not None:
        cfg["chain"]["model"] = {"full": "full_dipolar", "nearest": "nearest_neighbor"}.get(args.model, args.model)
    return cfg


def registry_config(target):
    text = resources.files("rydssh").joinpath(f"configs/{REGISTRY[target]}").read_text()
    return json.loads(text), text


def prepare(args):
    """Resolved config for ``args`` or :class:`ConfigError` with all diagnostics."""
    if args.command == "reproduce":
        user, text = registry_config(args.target)
        source = f"configs/{REGISTRY[args.target]}"
        command = user.get("command")
    else:
        command = args.command
        user, text, source = {}, None, "<defaults>"
        if args.config:
            user, text = load_config(args.config)
            source = args.config
    diags = schema_diagnostics(user, source, text)
    if user.get("command", command) != command:
        diags.append(f"{_where(source, text, ['command'])}: config is for {user['command']!r}, not {command!r}")
    if diags:
        raise ConfigError("\n".join(diags))
    cfg = _apply_flags(resolve(command, user), args)
    diags = schema_diagnostics(cfg, source, text) + physics_diagnostics(cfg, source, text)
    if diags:
        raise ConfigError("\n".join(diags))
    return command, cfg


def _validate(args):
    path = args.config_path or args.config_flag
    if not path:
        raise ConfigError("validate: no config given")
    user, text = load_config(path)
    diags = schema_diagnostics(user, path, text)
    if not diags:
        command = user.get("command", "spectrum")
        diags = physics_diagnostics(resolve(command, user), path, text)
    if diags:
        raise ConfigError("\n".join(diags))


def _limit_threads(n):
    if n is None:
        return None
    if n < 1:
        raise ConfigError(f"--threads: {n} must be positive")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv=None):
    from .engine import NumericalError
    from .geometry import GeometryError
    from .mbcore import ContractViolation, ResourceLimitError

    args = _parser().parse_args(argv)
    try:
        if args.command == "validate":
            _validate(args)
            return EXIT_OK
        command, cfg = prepare(args)
        fmt = args.format or DEFAULT_FORMAT[command]
        limiter = _limit_threads(args.threads)
        try:
            out = RUNNERS[command](cfg, args)
        finally:
            if limiter is not None:
                limiter.unregister()
        name = args.target if args.command == "reproduce" else command
        text = render(out, cfg, fmt)
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / f"{name}.{fmt}"
        path.write_bytes(text.encode())
        print(path)
        return EXIT_OK
    except (ConfigError, GeometryError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ResourceLimitError as exc:
        print(f"resource ceiling: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
