"""Command-line front end.

Every output file starts with a commented header that carries the fully
resolved configuration as flat JSON; passing that file back through
``--config`` reproduces the run. Exit codes: 0 success, 1 numeric failure or
failed verification, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .analysis import NoBracketError, critical_coupling_from_circuit, sector_scan
from .circuit import (
    CircuitParams,
    SingularFluxError,
    feasibility_report,
    flux_for_lambda,
    lambda_of_flux,
    map_circuit,
    model_params,
)
from .hamiltonian import KBlockOperator, build_real_space, heb_residual_on_bare
from .hilbert import DimensionError, boson_dimension, translation_operator
from .model import ModelParams
from .protocol import DriveParams, TwoSectorSpace, evolve
from .solver import ConvergenceError, LanczosConfig, lanczos_extremal

COMMANDS = ("spectrum", "sweep", "critical", "prepare", "circuit", "verify")

DEFAULTS = {
    "sites": 8,
    "boson-cutoff": 6,
    "domega-mhz": 300.0,
    "dtheta": 3.5e-3,
    "ej-dphi2-ghz": 100.0,
    "phidc-over-pi": None,
    "lambda": None,
    "grid-param": "lambda",
    "grid-start": None,
    "grid-end": None,
    "grid-steps": None,
    "betap-mhz": 10.0,
    "alpha-mhz": -200.0,
    "gamma-mhz": 0.01,
    "qd-index": 0,
    "shape": "cosine",
    "tmax-ns": 30.0,
    "dt-ps": 1.0,
    "stride": 100,
    "seed": 0,
    "tol": 1e-10,
    "units": "Eu",
    "out": None,
    "format": "csv",
    "threads": None,
}

# grid defaults per command: (start, end, steps)
GRID_DEFAULTS = {
    "sweep": (0.1, 1.4, 14),
    "critical": (0.5, 1.0, 6),
    "verify": (0.0, 2.0, 20),
}

DEFAULT_LAMBDA = 0.3


class UsageError(Exception):
    pass


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return float(format(x, ".12g")) if math.isfinite(x) else str(x)
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wstate-polaron",
        description="Exact diagonalization and W-state preparation for the qubit-resonator lattice model.",
        argument_default=argparse.SUPPRESS,
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS, default=None)
    parser.add_argument("--config", help="flat JSON config, or a previous output file")
    parser.add_argument("--sites", type=int)
    parser.add_argument("--boson-cutoff", type=int)
    parser.add_argument("--domega-mhz", type=float, help="boson detuning delta_omega/2pi in MHz")
    parser.add_argument("--dtheta", type=float)
    parser.add_argument("--ej-dphi2-ghz", type=float, help="dphi0^2 E_J / h in GHz")
    parser.add_argument("--phidc-over-pi", type=float)
    parser.add_argument("--lambda", type=float, dest="lambda", help="effective coupling; sets the flux")
    parser.add_argument("--grid-param", choices=("lambda", "phidc"))
    parser.add_argument("--grid-start", type=float)
    parser.add_argument("--grid-end", type=float)
    parser.add_argument("--grid-steps", type=int)
    parser.add_argument("--betap-mhz", type=float, help="drive amplitude beta_p/h in MHz")
    parser.add_argument("--alpha-mhz", type=float, help="qubit anharmonicity in MHz")
    parser.add_argument("--gamma-mhz", type=float, help="decoherence rate for the feasibility table")
    parser.add_argument("--qd-index", type=int)
    parser.add_argument("--shape", choices=("cosine", "rwa"))
    parser.add_argument("--tmax-ns", type=float)
    parser.add_argument("--dt-ps", type=float)
    parser.add_argument("--stride", type=int, help="record every n-th time step")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--units", choices=("Eu", "GHz"))
    parser.add_argument("--out")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--threads", type=int)
    return parser


def load_config(path: str | Path) -> dict:
    """Read a flat JSON config, or recover the config header of an output file."""
    text = Path(path).read_text(encoding="utf-8")
    for line in text.splitlines():
        if line.startswith("# config: "):
            return json.loads(line[len("# config: "):])
    data = json.loads(text)
    if isinstance(data, dict) and isinstance(data.get("config"), dict):
        return data["config"]
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    return data


def resolve_config(argv=None) -> dict:
    """Merge defaults, config file and explicit flags (flags win)."""
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    explicit = {k.replace("_", "-"): v for k, v in ns.items() if k != "config"}
    if explicit.get("command") is None:
        explicit.pop("command", None)
    config = dict(DEFAULTS)
    if "config" in ns:
        try:
            from_file = load_config(ns["config"])
        except (OSError, ValueError) as err:
            raise UsageError(f"cannot read config {ns['config']}: {err}") from err
        for key, value in from_file.items():
            key = key.replace("_", "-")
            if key == "command":
                config["command"] = value
            elif key in DEFAULTS:
                config[key] = value
            else:
                raise UsageError(f"unknown config key {key!r}")
    config.update(explicit)
    command = config.get("command")
    if command not in COMMANDS:
        raise UsageError(f"a command is required, one of {', '.join(COMMANDS)}")
    start, end, steps = GRID_DEFAULTS.get(command, (None, None, None))
    for key, value in (("grid-start", start), ("grid-end", end), ("grid-steps", steps)):
        if config[key] is None:
            config[key] = value
    if config["sites"] < 2 or config["boson-cutoff"] < 0:
        raise UsageError("need --sites >= 2 and --boson-cutoff >= 0")
    if config["grid-steps"] is not None and config["grid-steps"] < 2:
        raise UsageError("--grid-steps must be at least 2")
    if config["phidc-over-pi"] is not None and config["lambda"] is not None:
        raise UsageError("give either --phidc-over-pi or --lambda, not both")
    return {"command": command, **{k: config[k] for k in DEFAULTS}}


def _circuit(cfg: dict, phi_dc: float = 0.0) -> CircuitParams:
    return CircuitParams(
        delta_theta=cfg["dtheta"],
        delta_omega_over_2pi=cfg["domega-mhz"],
        ej_dphi2_over_2pi=cfg["ej-dphi2-ghz"],
        phi_dc=phi_dc,
        beta_p_over_2pi=cfg["betap-mhz"],
        anharmonicity_over_2pi=cfg["alpha-mhz"],
    )


def _flux(cfg: dict) -> float:
    base = _circuit(cfg)
    if cfg["phidc-over-pi"] is not None:
        return math.pi * cfg["phidc-over-pi"]
    lam = cfg["lambda"] if cfg["lambda"] is not None else DEFAULT_LAMBDA
    return flux_for_lambda(base, lam)


def _lanczos(cfg: dict) -> LanczosConfig:
    return LanczosConfig(tolerance=cfg["tol"], seed=cfg["seed"])


def _energy_label(cfg):
    return "Eu" if cfg["units"] == "Eu" else "GHz"


def _grid(cfg):
    return np.linspace(cfg["grid-start"], cfg["grid-end"], cfg["grid-steps"])


def cmd_spectrum(cfg):
    cp = _circuit(cfg, _flux(cfg))
    params = model_params(cp, cfg["sites"], cfg["boson-cutoff"], cfg["units"])
    spec = sector_scan(params, _lanczos(cfg), threads=cfg["threads"])
    unit = _energy_label(cfg)
    rows = [
        {
            "K_index": s.k.signed_index,
            "K_over_pi": 2.0 * s.k.signed_index / params.n_sites,
            f"E0_over_{unit}": s.energies[0],
            f"E1_over_{unit}": s.energies[1],
            "residue": s.residue,
            "ground": s.k == spec.k_gs,
        }
        for s in spec.sectors
    ]
    summary = {
        "phi_dc_over_pi": cp.phi_dc / math.pi,
        "lambda_eb": spec.lambda_eb,
        f"t0_over_{unit}": params.t_e,
        f"E_gs_over_{unit}": spec.E_gs,
        "K_gs_index": spec.k_gs.signed_index,
        "gap_over_hbar_domega": spec.gap / params.hbar_omega_b,
        "gap_k0_over_hbar_domega": spec.gap_k0 / params.hbar_omega_b,
    }
    return rows, summary, 0


def cmd_sweep(cfg):
    base = _circuit(cfg)
    unit = _energy_label(cfg)
    rows = []
    for x in _grid(cfg):
        phi = flux_for_lambda(base, x) if cfg["grid-param"] == "lambda" else math.pi * x
        cp = base.with_flux(phi)
        params = model_params(cp, cfg["sites"], cfg["boson-cutoff"], cfg["units"])
        spec = sector_scan(params, _lanczos(cfg), threads=cfg["threads"])
        rows.append(
            {
                "phi_dc_over_pi": phi / math.pi,
                "lambda_eb": spec.lambda_eb,
                f"E0_over_{unit}": spec.E_gs,
                "K_gs_index": spec.k_gs.signed_index,
                "residue": spec.residue_gs,
                "gap_over_hbar_domega": spec.gap / params.hbar_omega_b,
            }
        )
    return rows, {}, 0


def cmd_critical(cfg):
    base = _circuit(cfg)
    grid = _grid(cfg)
    if cfg["grid-param"] == "phidc":
        grid = [lambda_of_flux(base.with_flux(math.pi * x)) for x in grid]
    res = critical_coupling_from_circuit(
        base, cfg["sites"], cfg["boson-cutoff"], grid, _lanczos(cfg), tolerance=1e-4, threads=cfg["threads"]
    )
    row = {
        "lambda_c": res.lambda_c,
        "phi_dc_over_pi": res.phi_dc_over_pi,
        "bracket_lo": res.bracket[0],
        "bracket_hi": res.bracket[1],
        "resolution": res.resolution,
        "sites": cfg["sites"],
        "boson_cutoff": cfg["boson-cutoff"],
    }
    return [row], {}, 0


def cmd_prepare(cfg):
    cp = _circuit(cfg, _flux(cfg))
    params = model_params(cp, cfg["sites"], cfg["boson-cutoff"], "Eu")
    space = TwoSectorSpace.k_resolved(params, cfg["qd-index"])
    beta_p = 1e-3 * cfg["betap-mhz"] / params.unit_ghz
    drive = DriveParams(q_d=cfg["qd-index"], beta_p=beta_p, shape=cfg["shape"])
    result = evolve(
        space.vacuum_state(), drive, cfg["tmax-ns"] * 1e-9, cfg["dt-ps"] * 1e-12, record_every=cfg["stride"]
    )
    rows = [
        {"t_ns": t, "fidelity": f, "vacuum_population": v, "norm_drift": d}
        for t, f, v, d in zip(result.times_ns, result.fidelity, result.vacuum_population, result.norm_drift)
    ]
    summary = {
        "tau_first_max_ns": result.tau_first_max * 1e9 if result.tau_first_max is not None else None,
        "max_norm_drift": float(result.norm_drift.max()),
        "leakage_coupling_ratio": result.leakage_coupling_ratio,
    }
    return rows, summary, 0


def cmd_circuit(cfg):
    cp = _circuit(cfg, _flux(cfg))
    mapped = map_circuit(cp)
    report = feasibility_report(cp, cfg["gamma-mhz"])
    rows = [
        {"quantity": "phi_dc_over_pi", "value": cp.phi_dc / math.pi},
        {"quantity": "t0_over_Eu", "value": mapped.t_0},
        {"quantity": "t0_GHz", "value": mapped.t_0_ghz},
        {"quantity": "g", "value": mapped.g},
        {"quantity": "lambda_eb", "value": mapped.lambda_eb},
        {"quantity": "lambda_eb_from_model", "value": mapped.lambda_from_model()},
        {"quantity": "E_u_GHz", "value": mapped.E_u},
        {"quantity": "hbar_domega_over_Eu", "value": mapped.hbar_delta_omega},
        {"quantity": "tau_prep_ns", "value": report.tau_prep_ns},
        {"quantity": "leakage_time_ns", "value": report.leakage_time_ns},
        {"quantity": "leakage_time_ns_alt", "value": report.leakage_time_ns_alt},
        {"quantity": "gap_over_Eu", "value": report.gap_over_Eu},
    ]
    rows += [{"quantity": f"rate_ratio_{k}", "value": v} for k, v in report.rate_ratios.items()]
    return rows, {"note": report.note}, 0


def verification_checks(sites: int, cutoff: int, lambdas, cfg: LanczosConfig, oracle_sizes=((4, 2),)):
    """Exact-identity and oracle-equivalence checks as ``(name, value, bound)`` rows."""
    rows = []
    for lam in lambdas:
        g = math.sqrt(lam / 2.0)  # t_e = hbar*omega_b = 1
        params = ModelParams(1.0, 1.0, g, sites, cutoff)
        bound = 1e-12 * g * math.sqrt(sites)
        rows.append((f"heb_residual_on_bare[lambda={lam:.4g}]", heb_residual_on_bare(params), bound))

    for n, m in oracle_sizes:
        params = ModelParams(1.0, 2.0, 0.5, n, m)
        op = build_real_space(params)
        h = op.matrix
        t = translation_operator(op.basis)
        h_max = abs(h).max()
        rows.append((f"commutator_HT_TH[N={n},M={m}]", abs(h @ t - t @ h).max(), 1e-12 * h_max))
        full = np.linalg.eigvalsh(h.toarray())
        blocks = []
        for k in params.momenta():
            block = KBlockOperator.build(params, k)
            dense = block.to_dense()
            evals = np.linalg.eigvalsh(dense)
            blocks.append(evals)
            n_low = min(3, block.basis.dimension)
            lz = lanczos_extremal(block, cfg.replace(n_eigenpairs=n_low)).eigenvalues
            rows.append((f"lanczos_vs_dense[N={n},M={m},K={k.index}]", np.abs(lz - evals[:n_low]).max(), 1e-10))
        union = np.sort(np.concatenate(blocks))
        rows.append((f"block_union_vs_real_space[N={n},M={m}]", np.abs(union - full).max(), 1e-10))
    return rows


def cmd_verify(cfg):
    sizes = [(4, 2)]
    n, m = cfg["sites"], cfg["boson-cutoff"]
    if (n, m) not in sizes and n * boson_dimension(n, m) <= 2000:
        sizes.append((n, m))
    checks = verification_checks(n, m, _grid(cfg), _lanczos(cfg), sizes)
    rows = [{"check": name, "value": value, "bound": bound, "pass": value <= bound} for name, value, bound in checks]
    status = 0 if all(r["pass"] for r in rows) else 1
    return rows, {"all_pass": status == 0}, status


HANDLERS = {
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "critical": cmd_critical,
    "prepare": cmd_prepare,
    "circuit": cmd_circuit,
    "verify": cmd_verify,
}


def render(cfg: dict, rows: list[dict], summary: dict, timestamp: str) -> str:
    """Serialise a run; only the ``generated`` line depends on the clock."""
    echoed = {k: v for k, v in cfg.items() if k != "out"}
    config_json = json.dumps(_json_value(echoed), sort_keys=True)
    if cfg["format"] == "json":
        payload = {
            "command": cfg["command"],
            "config": _json_value(echoed),
            "summary": _json_value(summary),
            "rows": _json_value(rows),
        }
        body = json.dumps(payload, indent=1, sort_keys=True)
        # timestamp on its own line right after the opening brace
        return "{\n \"generated\": " + json.dumps(timestamp) + ",\n" + body[2:] + "\n"
    buf = io.StringIO()
    buf.write(f"# wstate-polaron {cfg['command']}\n")
    buf.write(f"# config: {config_json}\n")
    if summary:
        buf.write(f"# summary: {json.dumps(_json_value(summary), sort_keys=True)}\n")
    buf.write(f"# generated: {timestamp}\n")
    if rows:
        writer = csv.writer(buf, lineterminator="\n")
        header = list(rows[0])
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


def run(cfg: dict) -> int:
    rows, summary, status = HANDLERS[cfg["command"]](cfg)
    text = render(cfg, rows, summary, datetime.now(timezone.utc).isoformat(timespec="seconds"))
    if cfg["out"]:
        Path(cfg["out"]).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return status


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
    except UsageError as err:
        build_parser().print_usage(sys.stderr)
        print(f"wstate-polaron: error: {err}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except (ConvergenceError, NoBracketError, SingularFluxError, DimensionError, np.linalg.LinAlgError) as err:
        print(f"wstate-polaron: numeric failure: {err}", file=sys.stderr)
        return 1
    except ValueError as err:
        print(f"wstate-polaron: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
