"""
Command-line interface.

``dissipative-spectra --config run.json [--command NAME] [--output PATH]``

The config is JSON with the keys ``command``, ``system`` or ``circuit``,
``beta_grid``, ``response``, ``output`` and an ignored ``metadata`` block.
Complex numbers are ``[re, im]`` pairs and matrices are row-major nested
arrays of them. Exit codes: 0 success, 2 invalid input, 3 resonant
frequency.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import circuit as circ
from .errors import ClassificationFailed, NoMergeInBracket, ResonantFrequency, SpectralError
from .harmonic import respond, response_asymptotes
from .high_loss import degeneracy_report, high_loss_coefficients, low_loss_coefficients
from .small_beta import small_beta_coefficients
from .system import build_system, decompose, eigen_quality_factor, orbit_subspace
from .tracker import classify, detect_overdamping, locate_critical_point, sweep

COMMANDS = ("analyze", "sweep", "respond", "circuit")
TOP_KEYS = {"command", "system", "circuit", "beta_grid", "response", "output", "metadata"}
CIRCUIT_KEYS = {"c1", "c2", "c12", "l1", "l2", "tau", "r2", "beta"}
CIRCUIT_REQUIRED = ("c1", "c2", "c12", "l1", "l2")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- parsing


def _check_keys(block, allowed, where):
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object")
    extra = sorted(set(block) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{where} must be a number, got {x!r}")
    return float(x)


def _complex(x, where):
    if not isinstance(x, list) or len(x) != 2:
        raise ConfigError(f"{where} must be an [re, im] pair")
    return complex(_number(x[0], where), _number(x[1], where))


def parse_vector(data, where):
    if not isinstance(data, list) or not data:
        raise ConfigError(f"{where} must be a non-empty array of [re, im] pairs")
    return np.array([_complex(x, f"{where}[{i}]") for i, x in enumerate(data)])


def parse_matrix(data, where):
    if not isinstance(data, list) or not data:
        raise ConfigError(f"{where} must be a non-empty array of rows")
    rows = [parse_vector(r, f"{where}[{i}]") for i, r in enumerate(data)]
    if any(len(r) != len(rows) for r in rows):
        raise ConfigError(f"{where} must be square")
    return np.array(rows)


def encode_matrix(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def parse_circuit(block):
    _check_keys(block, CIRCUIT_KEYS, "circuit")
    for k in CIRCUIT_REQUIRED:
        if k not in block:
            raise ConfigError(f"circuit is missing field '{k}'")
    vals = {}
    for k, v in block.items():
        if k == "c12" and v in ("inf", "Infinity"):
            vals[k] = math.inf
        else:
            vals[k] = _number(v, f"circuit.{k}")
    if "r2" not in vals and "beta" not in vals:
        vals["beta"] = 0.0
    return circ.CircuitSpec(**vals)


def beta_grid(block):
    _check_keys(block, {"min", "max", "count", "spacing"}, "beta_grid")
    for k in ("min", "max", "count"):
        if k not in block:
            raise ConfigError(f"beta_grid is missing field '{k}'")
    lo, hi = _number(block["min"], "beta_grid.min"), _number(block["max"], "beta_grid.max")
    count = block["count"]
    if isinstance(count, bool) or not isinstance(count, int) or count < 2:
        raise ConfigError("beta_grid.count must be an integer >= 2")
    spacing = block.get("spacing", "linear")
    if lo < 0 or not hi > lo:
        raise ConfigError("beta_grid needs 0 <= min < max")
    if spacing == "linear":
        return np.linspace(lo, hi, count)
    if spacing == "log":
        if lo <= 0:
            raise ConfigError("log spacing needs beta_grid.min > 0")
        return np.geomspace(lo, hi, count)
    raise ConfigError(f"beta_grid.spacing must be 'linear' or 'log', got {spacing!r}")


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    _check_keys(cfg, TOP_KEYS, "config")
    if "output" in cfg:
        _check_keys(cfg["output"], {"path", "format"}, "output")
    if "response" in cfg:
        _check_keys(cfg["response"], {"omega", "f"}, "response")
    return cfg


def resolve_system(cfg):
    """``(system, circuit_spec or None)`` from the input block."""
    if ("system" in cfg) == ("circuit" in cfg):
        raise ConfigError("config needs exactly one of 'system' and 'circuit'")
    if "circuit" in cfg:
        spec = parse_circuit(cfg["circuit"])
        system, _ = circ.canonical_system(spec)
        return system, spec
    block = cfg["system"]
    _check_keys(block, {"omega", "b"}, "system")
    for k in ("omega", "b"):
        if k not in block:
            raise ConfigError(f"system is missing field '{k}'")
    return build_system(parse_matrix(block["omega"], "system.omega"), parse_matrix(block["b"], "system.b")), None


# ---------------------------------------------------------------- formatting


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def _json_value(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def write_csv(header, rows, comments=()):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    for c in comments:
        buf.write(f"# {c}\n")
    return buf.getvalue()


def write_structured(obj):
    return json.dumps(obj, indent=2) + "\n"


def _records(header, rows):
    return [{h: _json_value(_plain(v)) for h, v in zip(header, r)} for r in rows]


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, str):
        return v
    return float(v)


def _emit(fmt_name, header, rows, summary):
    if fmt_name == "csv":
        return write_csv(header, rows, [f"{k},{fmt(v)}" for k, v in summary.items()])
    return write_structured(
        {"rows": _records(header, rows), "summary": {k: _json_value(_plain(v)) for k, v in summary.items()}}
    )


# ---------------------------------------------------------------- commands


def cmd_analyze(cfg, fmt_name):
    system, spec = resolve_system(cfg)
    decomp = decompose(system)
    high = high_loss_coefficients(decomp, system.omega)
    low = low_loss_coefficients(decomp)
    small = small_beta_coefficients(system)
    diag = degeneracy_report(low, system.omega)
    orbit_dim, _ = orbit_subspace(system)

    rows = [
        ("n", 0, system.n),
        ("n_b", 0, system.n_b),
        ("delta_b", 0, system.delta_b),
        ("orbit_dimension", 0, orbit_dim),
    ]
    for m in high:
        rows += [("zeta_ring", m.index, m.zeta_ring), ("rho", m.index, m.rho)]
    for m in low:
        rows += [("rho", m.index, m.rho), ("d", m.index, m.d)]
    for m in small:
        rows += [("omega_j", m.index, m.omega_j), ("sigma_j", m.index, m.sigma_j)]
    for dg in diag:
        rows += [
            ("in_shift_kernel", dg.index, dg.in_shift_kernel),
            ("in_omega_kernel", dg.index, dg.in_omega_kernel),
        ]
    if spec is not None:
        ref = circ.reference_values(spec)
        rows += [
            ("loss_parameter", 0, spec.loss_parameter),
            ("rho3_analytic", 3, ref["rho3_analytic"]),
            ("rho3_observed", 3, ref["rho3_observed"]),
            ("rho3_published", 3, ref["rho3_published"]),
        ]
    header = ("quantity", "index", "value")
    if fmt_name == "csv":
        return write_csv(header, rows)
    return write_structured({"rows": _records(header, rows)})


def _is_reference_circuit(spec):
    ref = circ.paper_example()
    return spec is not None and all(
        getattr(spec, k) == getattr(ref, k) for k in ("c1", "c2", "c12", "l1", "l2", "tau")
    )


def _critical_point(system, branches):
    grid = branches[0].betas
    starts = [b.overdamped_from for b in branches if b.overdamped_from is not None]
    starts = [s for s in starts if s > grid[0]]
    if len(starts) < 2:
        return None
    k = int(np.searchsorted(grid, min(starts)))
    bracket = (grid[k - 1], grid[min(k + 1, len(grid) - 1)])
    try:
        return locate_critical_point(system, bracket, branches)
    except NoMergeInBracket:
        return None


def cmd_sweep(cfg, fmt_name):
    system, spec = resolve_system(cfg)
    if "beta_grid" not in cfg:
        raise ConfigError("sweep needs a beta_grid block")
    grid = beta_grid(cfg["beta_grid"])
    decomp = decompose(system)
    high = high_loss_coefficients(decomp, system.omega)
    low = low_loss_coefficients(decomp)
    branches = sweep(system, grid)
    summary = {}
    try:
        branches = classify(branches, high, low, omega_norm=np.linalg.norm(system.omega, 2))
        summary["classification"] = "ok"
    except ClassificationFailed as exc:
        summary["classification"] = f"unresolved ({exc})".replace(",", ";")
    branches = detect_overdamping(branches)

    rows = []
    for i, b in enumerate(grid):
        for br in branches:
            z = complex(br.zetas[i])
            od = br.overdamped_from is not None and b >= br.overdamped_from
            rows.append((b, br.branch_id, br.klass, z.real, z.imag, eigen_quality_factor(z), od))

    cp = _critical_point(system, branches)
    if cp is not None:
        summary["beta0"] = cp.beta0
        summary["zeta0_im"] = cp.zeta0.imag
        if cp.merging_branches is not None:
            summary["merging_branches"] = "{}-{}".format(*cp.merging_branches)
        if _is_reference_circuit(spec):
            summary["beta0_published"] = circ.PUBLISHED_BETA0
            summary["beta0_deviation"] = cp.beta0 - circ.PUBLISHED_BETA0
    else:
        summary["beta0"] = "none"
    header = ("beta", "branch_id", "class", "re_zeta", "im_zeta", "q_factor", "overdamped")
    return _emit(fmt_name, header, rows, summary)


def cmd_respond(cfg, fmt_name):
    system, _ = resolve_system(cfg)
    for k in ("beta_grid", "response"):
        if k not in cfg:
            raise ConfigError(f"respond needs a {k} block")
    grid = beta_grid(cfg["beta_grid"])
    block = cfg["response"]
    for k in ("omega", "f"):
        if k not in block:
            raise ConfigError(f"response is missing field '{k}'")
    omega = _number(block["omega"], "response.omega")
    f = parse_vector(block["f"], "response.f")
    decomp = decompose(system)
    rows = []
    for b in grid:
        rep = respond(system, f, omega, b, decomp)
        ua, wa, qa = response_asymptotes(decomp, f, omega, b)
        rows.append(
            (b, rep.stored_energy, rep.dissipated_power, rep.quality_factor, rep.regime_class, ua, wa, qa)
        )
    header = ("beta", "U", "W_dis", "Q", "regime_class", "U_asym", "Wdis_asym", "Q_asym")
    return _emit(fmt_name, header, rows, {})


def cmd_circuit(cfg, fmt_name):
    if "circuit" not in cfg:
        raise ConfigError("circuit command needs a circuit block")
    spec = parse_circuit(cfg["circuit"])
    omega, b = circ.canonical_matrices(spec)
    phi2, phi = circ.build_phi(spec)
    out = {
        "command": "analyze",
        "system": {"omega": encode_matrix(omega), "b": encode_matrix(b)},
        "metadata": {
            "source": "circuit",
            "beta": spec.loss_parameter,
            "r2": spec.resistance,
            "phi": phi.tolist(),
            "phi_squared": phi2.tolist(),
        },
    }
    return write_structured(out)


HANDLERS = {"analyze": cmd_analyze, "sweep": cmd_sweep, "respond": cmd_respond, "circuit": cmd_circuit}


def run(cfg, command=None):
    """Execute a parsed config and return the output text."""
    command = command or cfg.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}, got {command!r}")
    fmt_name = cfg.get("output", {}).get("format", "csv")
    if fmt_name not in ("csv", "structured"):
        raise ConfigError(f"output.format must be 'csv' or 'structured', got {fmt_name!r}")
    return HANDLERS[command](cfg, fmt_name)


def build_parser():
    p = argparse.ArgumentParser(
        prog="dissipative-spectra",
        description="Spectral analysis of dissipative linear systems Omega - i beta B.",
    )
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--output", help="output file (overrides output.path; default stdout)")
    p.add_argument("--command", choices=COMMANDS, help="overrides the config command")
    p.add_argument("--seed", type=int, help="reserved; no randomized algorithms are used")
    return p


def _fail(code, exc):
    msg = " ".join(str(exc).split())
    sys.stderr.write(f"error: {type(exc).__name__}: {msg}\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        text = run(cfg, args.command)
    except ResonantFrequency as exc:
        return _fail(3, exc)
    except (ConfigError, SpectralError, OSError) as exc:
        return _fail(2, exc)
    path = args.output or cfg.get("output", {}).get("path")
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
