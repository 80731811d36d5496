"""Command-line entry point.

Every subcommand reads an optional TOML config (sections per module, physical
inputs in fF / nH / GHz / MHz / mK / ns), applies flag overrides, writes its
CSV / JSON artifacts into ``--out`` and finishes with ``manifest.json``.

Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy
import tomli

from . import __version__
from . import constants as const
from .circuit import CircuitSpec, Topology, derive_effective_params, oscillator_bound
from .dynamics import NoiseSpec, QSTConfig, simulate_qst, simulate_qst_unitary
from .models import HamiltonianLevelParams, default_n_fock, mediator_operators, usc_mediator
from .optimize import OBJECTIVES, minimize, paper_search_space, qubit_figures
from .spectrum import coupling_ratio_circuit, dress, forbidden_transitions, ratio_sweep, spectrum_sweep

SCHEMA_VERSION = 1
COMMANDS = ("derive", "spectrum", "ratio-sweep", "optimize", "simulate-qst", "forbidden")

CIRCUIT_KEYS = {
    "topology", "Cg", "CJ", "Cc", "Cr", "Cp", "Cg1", "CJ1", "Cg2", "CJ2", "Cc0", "Cc1",
    "Lr", "LJ", "EJ", "EJ1", "EJ2", "ng", "ng1", "ng2",
}

DEFAULTS = {
    "circuit": {},
    "spectrum": {"g_max": 1.0, "points": 101, "levels": 6, "beta": 1.0, "n_fock": 0},
    "ratio_sweep": {"sweep": "ej", "start": 6.0, "stop": 11.0, "points": 51, "qubit": 1},
    "optimize": {"objective": "f1", "restarts": 32, "max_iters": 2000},
    "qst": {
        "g_ratio": 0.3, "omega_r": 8.13, "lambda_ratio": 0.02, "g12_ratio": 0.0, "K": 10,
        "n_fock": 0, "transmon_levels": 2, "alpha_r": -0.096, "unitary": False,
        "dt": 1e-3, "sample_dt": 0.01, "t_final": 0.0, "forbidden": [],
    },
    "noise": {
        "preset": "paper", "temperature": 50.0, "kappa": None, "gamma": None,
        "gamma_phi_cpb": None, "gamma_m": None, "gamma_phi_m": None,
    },
    "forbidden": {"g_ratio": 0.3, "j": 1, "tol": 1e-3, "K": 10, "n_fock": 0, "op": "X", "g12_ratio": 0.0},
}

SECTIONS = {
    "derive": ("circuit",),
    "spectrum": ("spectrum",),
    "ratio-sweep": ("circuit", "ratio_sweep"),
    "optimize": ("optimize",),
    "simulate-qst": ("qst", "noise"),
    "forbidden": ("forbidden",),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    input: Path | None = None
    out: Path = Path("out")
    overrides: dict[str, object] = field(default_factory=dict)
    seed: int = 0
    plot: bool = False


# --- config ------------------------------------------------------------------

def _parse_value(text: str):
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def load_config(cfg: RunConfig) -> dict:
    """Defaults, then file, then overrides; unknown keys raise ConfigError."""
    resolved = copy.deepcopy(DEFAULTS)
    raw = {}
    if cfg.input is not None:
        with open(cfg.input, "rb") as fh:
            raw = tomli.load(fh)
    for section, values in raw.items():
        if section not in resolved:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, val in values.items():
            _assign(resolved, section, key, val)
    for dotted, val in cfg.overrides.items():
        section, _, key = dotted.partition(".")
        if section not in resolved or not key:
            raise ConfigError(f"override {dotted!r} must look like section.key")
        _assign(resolved, section, key, val)
    return resolved


def _assign(resolved, section, key, val):
    allowed = CIRCUIT_KEYS if section == "circuit" else resolved[section].keys()
    if key not in allowed:
        raise ConfigError(f"unknown key {key!r} in [{section}]")
    resolved[section][key] = val


def circuit_from_config(c: dict) -> CircuitSpec:
    """Build a CircuitSpec from fF / nH / GHz values."""
    if "topology" not in c:
        raise ConfigError("[circuit] needs a topology")
    topo = Topology(c["topology"])
    caps = {k: float(v) * const.fF for k, v in c.items() if k.startswith("C")}
    Lr = float(c.get("Lr", 0)) * const.nH
    ng_keys = ("ng",) if topo is not Topology.TWO_CPB else ("ng1", "ng2")
    ng = tuple(float(c.get(k, 0.5)) for k in ng_keys)
    if topo is Topology.TWO_OSCILLATOR:
        return CircuitSpec(topo, caps, Lr, LJ=float(c.get("LJ", 0)) * const.nH)
    ej_keys = ("EJ",) if topo is Topology.ONE_CPB else ("EJ1", "EJ2")
    missing = [k for k in ej_keys if k not in c]
    if missing:
        raise ConfigError(f"[circuit] missing {missing}")
    ej = tuple(const.ghz_to_joule(float(c[k])) for k in ej_keys)
    return CircuitSpec(topo, caps, Lr, ej, ng)


def spec_to_units(spec: CircuitSpec) -> dict:
    """Inverse of circuit_from_config, for manifests and optimizer output."""
    out = {"topology": spec.topology.value}
    out |= {k: v / const.fF for k, v in spec.capacitances.items()}
    out["Lr"] = spec.Lr / const.nH
    if spec.topology is Topology.TWO_OSCILLATOR:
        out["LJ"] = spec.LJ / const.nH
    elif spec.topology is Topology.ONE_CPB:
        out["EJ"], out["ng"] = const.joule_to_ghz(spec.EJ[0]), spec.ng[0]
    else:
        out["EJ1"], out["EJ2"] = (const.joule_to_ghz(x) for x in spec.EJ)
        out["ng1"], out["ng2"] = spec.ng
    return out


def noise_from_config(n: dict) -> NoiseSpec:
    """Rates are given as rate/2pi in MHz; temperature in mK."""
    T = float(n["temperature"]) * const.mK
    if n["preset"] == "paper":
        base = NoiseSpec.paper(T)
    elif n["preset"] == "none":
        base = NoiseSpec(T=T)
    else:
        raise ConfigError(f"unknown noise preset {n['preset']!r}")
    vals = {}
    for key in ("kappa", "gamma", "gamma_phi_cpb", "gamma_m", "gamma_phi_m"):
        if n[key] is not None:
            vals[key] = np.asarray(n[key], dtype=float) * 2 * np.pi * const.MHz
    fields = {k: getattr(base, k) for k in ("kappa", "gamma", "gamma_phi_cpb", "gamma_m", "gamma_phi_m")}
    fields |= {k: (float(v) if v.ndim == 0 else tuple(v)) for k, v in vals.items()}
    return NoiseSpec(**fields, T=T)


# --- output helpers ----------------------------------------------------------

def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


class Outputs:
    def __init__(self, out: Path, plot: bool):
        self.dir = out
        self.plot = plot
        self.files: list[str] = []
        out.mkdir(parents=True, exist_ok=True)

    def csv(self, name, header, rows):
        path = self.dir / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
        self.files.append(name)
        return path

    def json(self, name, payload):
        with open(self.dir / name, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
            fh.write("\n")
        self.files.append(name)

    def svg(self, name, draw):
        if not self.plot:
            return
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        plt.rcParams["svg.hashsalt"] = "chargeusc"
        fig, ax = plt.subplots(figsize=(6, 4))
        draw(ax)
        fig.tight_layout()
        fig.savefig(self.dir / name, format="svg", metadata={"Date": None})
        plt.close(fig)
        self.files.append(name)


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, Path):
        return str(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


# --- commands ----------------------------------------------------------------

def _derived_rows(spec):
    ghz = const.rad_to_ghz
    if spec.topology is Topology.TWO_OSCILLATOR:
        g_o, wq, wr, ratio = oscillator_bound(spec)
        return [
            ("omega_r/2pi", ghz(wr), "GHz"),
            ("omega_q/2pi", ghz(wq), "GHz"),
            ("g_o/2pi", ghz(g_o), "GHz"),
            ("2g_o/sqrt(wq wr)", ratio, ""),
        ], {}
    p = derive_effective_params(spec)
    figs = qubit_figures(p)
    two = len(figs) == 2
    rows = [("omega_r/2pi", ghz(p.omega_r), "GHz")]
    for i, (wq, element) in enumerate(figs):
        tag = str(i + 1) if two else ""
        _, R, beta = coupling_ratio_circuit(p, i)
        rows += [
            (f"omega_q{tag}/2pi", ghz(wq), "GHz"),
            (f"EJ{tag}/EC{tag}", p.ej_over_ec()[i], ""),
            (f"g_tilde{tag}/2pi", ghz(p.g_tilde[i]), "GHz"),
            (f"R{tag}", R, ""),
            (f"beta{tag}", beta, ""),
            (f"|<e|n|g>|{tag}", element, ""),
        ]
    rows.append(("Z_r", p.Z_r / const.kOhm, "kOhm"))
    if two:
        rows.append(("g_tilde12/2pi", ghz(abs(p.g12_tilde)), "GHz"))
    return rows, p


def cmd_derive(conf, out: Outputs, seed):
    spec = circuit_from_config(conf["circuit"])
    rows, _ = _derived_rows(spec)
    out.csv("derived.csv", ("quantity", "value", "unit"), rows)
    out.json("derived.json", {"circuit": spec_to_units(spec), "derived": {q: v for q, v, _ in rows}})
    return {name: val for name, val, _ in rows}


def cmd_spectrum(conf, out: Outputs, seed):
    s = conf["spectrum"]
    points, levels = int(s["points"]), int(s["levels"])
    if points < 1 or levels < 1:
        raise ConfigError("points and levels must be >= 1")
    grid = np.linspace(0.0, float(s["g_max"]), points)
    res = spectrum_sweep(grid, levels, 1.0, float(s["beta"]), int(s["n_fock"]) or None)
    rows = [
        (g, lvl, res["h1"][i, lvl], res["qrm"][i, lvl])
        for i, g in enumerate(grid)
        for lvl in range(levels)
    ]
    out.csv("spectrum.csv", ("g_ratio", "level", "energy_h1", "energy_qrm"), rows)

    def draw(ax):
        for lvl in range(levels):
            ax.plot(grid, res["h1"][:, lvl], "C0-", lw=1)
            ax.plot(grid, res["qrm"][:, lvl], "C1--", lw=1)
        ax.set_xlabel("g~ / omega_r")
        ax.set_ylabel("(E_k - E_0) / hbar omega_r")

    out.svg("spectrum.svg", draw)
    return {"points": points, "levels": levels}


def cmd_ratio_sweep(conf, out: Outputs, seed):
    spec = circuit_from_config(conf["circuit"])
    s = conf["ratio_sweep"]
    grid = np.linspace(float(s["start"]), float(s["stop"]), int(s["points"]))
    qubit = int(s["qubit"]) - 1
    if s["sweep"] == "ej":
        table = ratio_sweep(spec, EJ_grid=const.ghz_to_joule(grid), qubit=qubit)
        table[:, 0] = grid
        xname = "EJ_GHz"
    elif s["sweep"] == "mu":
        table = ratio_sweep(spec, mu_grid=grid, qubit=qubit)
        xname = "mu"
    else:
        raise ConfigError("ratio_sweep.sweep must be 'ej' or 'mu'")
    out.csv("ratio_sweep.csv", (xname, "EJ_over_EC", "R", "beta"), table)

    def draw(ax):
        sc = ax.scatter(table[:, 1], table[:, 2], c=table[:, 3], cmap="viridis", s=12)
        ax.figure.colorbar(sc, ax=ax, label="beta")
        ax.set_xlabel("E_J / E_C")
        ax.set_ylabel("R")

    out.svg("ratio_sweep.svg", draw)
    return {"rows": len(table)}


def cmd_optimize(conf, out: Outputs, seed):
    o = conf["optimize"]
    name = o["objective"]
    if name not in OBJECTIVES:
        raise ConfigError(f"objective must be one of {sorted(OBJECTIVES)}")
    topology = Topology.ONE_CPB if name == "f1" else Topology.TWO_CPB
    res = minimize(name, paper_search_space(topology), seed=seed, restarts=int(o["restarts"]), max_iters=int(o["max_iters"]))
    rows, _ = _derived_rows(res.spec)
    circuit = spec_to_units(res.spec)
    table = [(k, v, "fF" if k.startswith("C") else "nH" if k.startswith("L") else "GHz" if k.startswith("EJ") else "")
             for k, v in circuit.items() if k != "topology"]
    out.csv("optimize.csv", ("quantity", "value", "unit"), table + rows)
    out.csv("convergence.csv", ("restart", "value", "best_so_far"),
            [(i, v, b) for i, (v, b) in enumerate(zip(res.restart_values, res.best_so_far))])
    out.json("optimize.json", {
        "objective": name, "value": res.value, "seed": seed, "restarts": res.restarts,
        "iterations": res.iterations, "circuit": circuit,
        "ratios": list(res.ratios), "betas": list(res.betas),
    })
    return {"value": res.value, "ratios": list(res.ratios), "betas": list(res.betas)}


def _qst_config(q) -> QSTConfig:
    forbidden = tuple(int(x) for x in q["forbidden"]) or None
    if forbidden is not None and len(forbidden) != 2:
        raise ConfigError("qst.forbidden must be a pair [j, k]")
    return QSTConfig(
        g_ratio=float(q["g_ratio"]),
        omega_r=const.ghz_to_rad(float(q["omega_r"])),
        lambda_ratio=float(q["lambda_ratio"]),
        g12=float(q["g12_ratio"]),
        K=int(q["K"]),
        n_fock=int(q["n_fock"]) or None,
        transmon_levels=int(q["transmon_levels"]),
        alpha_r=float(q["alpha_r"]),
        forbidden=forbidden,
        dt=float(q["dt"]) * const.ns,
        sample_dt=float(q["sample_dt"]) * const.ns,
        t_final=float(q["t_final"]) * const.ns or None,
    )


def cmd_simulate_qst(conf, out: Outputs, seed):
    q = conf["qst"]
    cfg = _qst_config(q)
    if q["unitary"]:
        run = simulate_qst_unitary(cfg)
        s = run.trajectory.series
        cols = (s["pop_1ψ0_0"], s["pop_0ψ0_1"], s["pop_1ψ0_0"], s["norm"])
    else:
        run = simulate_qst(cfg, noise_from_config(conf["noise"]))
        s = run.trajectory.series
        cols = (s["pop_1ψ0_0"], s["pop_0ψ0_1"], s["fidelity"], s["trace"])
    t_ns = run.trajectory.times / const.ns
    out.csv("trajectory.csv", ("time_ns", "pop_1ψ0_0", "pop_0ψ0_1", "fidelity", "trace"), zip(t_ns, *cols))

    def draw(ax):
        ax.plot(t_ns, cols[0], label="|1,psi0,0>")
        ax.plot(t_ns, cols[1], label="|0,psi0,1>")
        if not q["unitary"]:
            ax.plot(t_ns, cols[2], "k--", lw=1, label="fidelity")
        ax.set_xlabel("t (ns)")
        ax.legend()

    out.svg("trajectory.svg", draw)
    j, k = run.setup.forbidden
    return {
        "t_peak_ns": run.t_peak / const.ns,
        "peak": run.peak,
        "forbidden": [j, k],
        "omega_01_GHz": const.rad_to_ghz(run.setup.omega_01),
    }


def cmd_forbidden(conf, out: Outputs, seed):
    f = conf["forbidden"]
    g = float(f["g_ratio"])
    n_fock = int(f["n_fock"]) or default_n_fock(g)
    params = HamiltonianLevelParams(1.0, (1.0, 1.0), (g, g), float(f["g12_ratio"]))
    ds = dress(usc_mediator(params, n_fock), mediator_operators(n_fock), int(f["K"]))
    found = forbidden_transitions(ds, f["op"], int(f["j"]), float(f["tol"]))
    out.csv("forbidden.csv", ("j", "k", "delta_over_omega_r", "abs_element"), found)
    O = np.abs(ds.projected[f["op"]])
    out.csv("matrix_elements.csv", ("j", "k", "abs_element"),
            [(a, b, O[a, b]) for a in range(ds.K) for b in range(ds.K)])
    return {"forbidden": [[j, k] for j, k, _, _ in found]}


HANDLERS = {
    "derive": cmd_derive,
    "spectrum": cmd_spectrum,
    "ratio-sweep": cmd_ratio_sweep,
    "optimize": cmd_optimize,
    "simulate-qst": cmd_simulate_qst,
    "forbidden": cmd_forbidden,
}


def run(cfg: RunConfig) -> int:
    start = time.perf_counter()
    try:
        if cfg.command not in HANDLERS:
            raise ConfigError(f"unknown command {cfg.command!r}")
        conf = load_config(cfg)
        out = Outputs(Path(cfg.out), cfg.plot)
        results = HANDLERS[cfg.command](conf, out, cfg.seed)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail(2, "numerical", exc)
    except (ValueError, KeyError, TypeError, OSError, tomli.TOMLDecodeError) as exc:
        return _fail(1, "validation", exc)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "seed": cfg.seed,
        "input": str(cfg.input) if cfg.input else None,
        "parameters": {s: conf[s] for s in SECTIONS[cfg.command]},
        "results": results,
        "outputs": list(out.files),
        "versions": {
            "chargeusc": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "wall_time_s": time.perf_counter() - start,
    }
    with open(out.dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")
    return 0


def _fail(code, kind, exc):
    msg = " ".join(str(exc).split()) or type(exc).__name__
    print(f"error: {kind}: {type(exc).__name__}: {msg}", file=sys.stderr)
    return code


# --- argument parsing --------------------------------------------------------

FLAG_MAP = {
    "spectrum": {"g_max": "spectrum.g_max", "levels": "spectrum.levels", "points": "spectrum.points"},
    "ratio-sweep": {"sweep": "ratio_sweep.sweep", "start": "ratio_sweep.start", "stop": "ratio_sweep.stop", "points": "ratio_sweep.points"},
    "optimize": {"objective": "optimize.objective", "restarts": "optimize.restarts", "max_iters": "optimize.max_iters"},
    "simulate-qst": {
        "g_ratio": "qst.g_ratio", "temperature_mk": "noise.temperature", "k_levels": "qst.K",
        "t_final_ns": "qst.t_final", "dt_ns": "qst.dt", "sample_ns": "qst.sample_dt",
        "transmon_levels": "qst.transmon_levels", "noise": "noise.preset",
    },
    "forbidden": {"g_ratio": "forbidden.g_ratio", "j": "forbidden.j", "tol": "forbidden.tol", "k_levels": "forbidden.K"},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chargeusc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="TOML config file")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override a config value (repeatable)")
        p.add_argument("--plot", action="store_true", help="also write SVG plots")
        return p

    common(sub.add_parser("derive", help="effective parameters of a circuit"))
    p = common(sub.add_parser("spectrum", help="H1 vs QRM levels along g~/omega_r"))
    p.add_argument("--g-max", type=float)
    p.add_argument("--levels", type=int)
    p.add_argument("--points", type=int)
    p = common(sub.add_parser("ratio-sweep", help="R and beta along E_J or impedance scale"))
    p.add_argument("--sweep", choices=("ej", "mu"))
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--points", type=int)
    p = common(sub.add_parser("optimize", help="search circuit values minimizing F1 or F2"))
    p.add_argument("--objective", choices=sorted(OBJECTIVES))
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iters", type=int)
    p = common(sub.add_parser("simulate-qst", help="state transfer through the USC mediator"))
    p.add_argument("--g-ratio", type=float)
    p.add_argument("--temperature-mk", type=float)
    p.add_argument("--k-levels", type=int)
    p.add_argument("--t-final-ns", type=float)
    p.add_argument("--dt-ns", type=float)
    p.add_argument("--sample-ns", type=float)
    p.add_argument("--transmon-levels", type=int, choices=(2, 3))
    p.add_argument("--noise", choices=("paper", "none"))
    p.add_argument("--unitary", action="store_true", help="closed-system run (three-level transmons by default)")
    p = common(sub.add_parser("forbidden", help="selection-rule zeros of the dressed mediator"))
    p.add_argument("--g-ratio", type=float)
    p.add_argument("-j", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--k-levels", type=int)
    return parser


def config_from_args(args) -> RunConfig:
    overrides = {}
    for item in args.set:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        overrides[key.strip()] = _parse_value(val.strip())
    for attr, dotted in FLAG_MAP.get(args.command, {}).items():
        val = getattr(args, attr, None)
        if val is not None:
            overrides[dotted] = val
    if getattr(args, "unitary", False):
        overrides["qst.unitary"] = True
        overrides.setdefault("qst.transmon_levels", 3)
    return RunConfig(args.command, args.config, args.out, overrides, args.seed, args.plot)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        return _fail(1, "validation", exc)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
