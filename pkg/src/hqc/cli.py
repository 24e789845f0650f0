"""Command-line entry point ``hqc``: gallery, extend, analyze, verify, report."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import curves, holo, hmap, suite
from .errors import HqcError, InputFormatError
from .grid import DiskGrid
from .output import csv_text, dumps, write_text

TWO_PI = 2.0 * np.pi

DEFAULTS = {
    "alpha": 0.5,
    "p": 2.0,
    "K": 2.0,
    "k": 0.3,
    "modes": 512,
    "grid_radial": 64,
    "grid_angular": 512,
    "depth": 20,
    "n_pairs": 10_000,
    "n_boundary": 2048,
    "seed": 1,
    "exclusion_arc": holo.DEFAULT_EXCLUSION_ARC,
    "hardy_r": 0.99,
    "deltas": [0.5, 0.2, 0.1, 0.05, 0.02, 0.01],
    "format": "json",
    "suite": None,
    "manifest": None,
    "workers": None,
    "input": None,
    "curve": None,
    "map": None,
    "coeffs": None,
    "output": None,
    "inputs": None,
}

MAPS = ("identity", "z2", "z3", "mobius", "f0", "one-plus-z", "linear")


class ParameterError(HqcError):
    def __init__(self, name, message):
        super().__init__(f"invalid parameter {name}: {message}")
        self.parameter = name


def _floats(text):
    return [float(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hqc", description="Harmonic quasiconformal map experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, *names):
        p.add_argument("--config", help="JSON file with parameter values (flags take precedence)")
        for name in names:
            flag = "--" + name.replace("_", "-")
            if name in ("alpha", "p", "K", "k", "exclusion_arc", "hardy_r"):
                p.add_argument(flag, dest=name, type=float, default=None)
            elif name in ("modes", "grid_radial", "grid_angular", "depth", "n_pairs", "n_boundary", "seed",
                          "workers"):
                p.add_argument(flag, dest=name, type=int, default=None)
            elif name == "deltas":
                p.add_argument(flag, dest=name, type=_floats, default=None, help="comma-separated list")
            elif name == "format":
                p.add_argument(flag, dest=name, choices=("json", "csv", "text"), default=None)
            elif name == "inputs":
                p.add_argument("inputs", nargs="*", default=None, help="JSON files or directories")
            else:
                p.add_argument(flag, dest=name, default=None)

    common(sub.add_parser("gallery", help="list built-in functions, maps and curves"), "format", "output")
    common(sub.add_parser("extend", help="harmonic extension of boundary data"),
           "input", "curve", "modes", "grid_radial", "grid_angular", "depth", "seed", "output")
    common(sub.add_parser("analyze", help="fields and norm estimates of a harmonic map"),
           "map", "coeffs", "k", "alpha", "p", "grid_radial", "grid_angular", "depth", "seed", "n_boundary",
           "exclusion_arc", "hardy_r", "deltas", "output")
    common(sub.add_parser("verify", help="run a verification suite"),
           "suite", "manifest", "seed", "format", "workers", "grid_radial", "grid_angular", "depth", "n_pairs",
           "exclusion_arc", "modes", "output")
    common(sub.add_parser("report", help="aggregate JSON outputs into one summary"), "inputs", "output")
    return ap


def resolve(args: argparse.Namespace) -> dict:
    """flags > config file > defaults."""
    given = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as e:
            raise InputFormatError(args.config, e.lineno, e.msg) from None
        except OSError as e:
            raise ParameterError("config", str(e)) from None
        if not isinstance(cfg, dict):
            raise InputFormatError(args.config, 1, "config must be a JSON object")
        unknown = sorted(set(cfg) - set(given))
        if unknown:
            raise ParameterError(unknown[0], f"not accepted by '{args.command}'")
    params = {"command": args.command}
    for key, flag in given.items():
        if flag is not None and flag != []:
            params[key] = flag
        elif key in cfg:
            params[key] = cfg[key]
        else:
            params[key] = DEFAULTS.get(key)
    return params


def _check(cond, name, message):
    if not cond:
        raise ParameterError(name, message)


def _number(params, name, kind=float):
    v = params.get(name)
    if v is None:
        return
    try:
        ok = kind(v) == v if kind is int else math.isfinite(float(v))
    except (TypeError, ValueError):
        ok = False
    _check(ok and not isinstance(v, bool), name, f"expected {kind.__name__}, got {v!r}")


def validate(params: dict) -> dict:
    """Reject out-of-range parameters before any computation."""
    for name in ("alpha", "p", "K", "k", "exclusion_arc", "hardy_r"):
        _number(params, name)
    for name in ("modes", "grid_radial", "grid_angular", "depth", "n_pairs", "n_boundary", "seed", "workers"):
        _number(params, name, int)
    cmd = params["command"]
    if "alpha" in params:
        _check(0 < params["alpha"] < 1, "alpha", f"must lie in (0, 1), got {params['alpha']}")
    if "p" in params:
        _check(params["p"] > 0, "p", f"must be > 0, got {params['p']}")
    if "k" in params:
        _check(abs(params["k"]) < 1, "k", f"|k| must be < 1, got {params['k']}")
    if "modes" in params:
        _check(params["modes"] >= 1, "modes", f"must be >= 1, got {params['modes']}")
    if "depth" in params:
        _check(1 <= params["depth"] <= 44, "depth", f"must lie in [1, 44], got {params['depth']}")
    if "grid_radial" in params:
        need = 2 * (params["depth"] + 1) + 1
        _check(params["grid_radial"] >= need, "grid_radial", f"must be >= {need} for depth {params['depth']}")
    if "grid_angular" in params:
        _check(params["grid_angular"] >= 8, "grid_angular", f"must be >= 8, got {params['grid_angular']}")
    if "n_pairs" in params:
        _check(params["n_pairs"] >= 1, "n_pairs", f"must be >= 1, got {params['n_pairs']}")
    if "n_boundary" in params:
        _check(params["n_boundary"] >= 16, "n_boundary", f"must be >= 16, got {params['n_boundary']}")
    if "seed" in params:
        _check(params["seed"] >= 0, "seed", f"must be >= 0, got {params['seed']}")
    if params.get("workers") is not None:
        _check(params["workers"] >= 1, "workers", f"must be >= 1, got {params['workers']}")
    if "exclusion_arc" in params:
        e = params["exclusion_arc"]
        _check(0 < e < math.pi, "exclusion_arc", f"must lie in (0, pi), got {e}")
    if "hardy_r" in params:
        _check(0 < params["hardy_r"] < 1, "hardy_r", f"must lie in (0, 1), got {params['hardy_r']}")
    if "deltas" in params:
        d = params["deltas"]
        _check(isinstance(d, list) and d and all(isinstance(x, (int, float)) and x > 0 for x in d),
               "deltas", "must be a non-empty list of positive numbers")
    if params.get("format") is not None:
        allowed = ("json", "csv") if cmd == "verify" else ("json", "text")
        _check(params["format"] in allowed, "format", f"must be one of {allowed}")
    if cmd == "extend":
        _check((params["input"] is None) != (params["curve"] is None), "input",
               "give exactly one of --input or --curve")
        _check(params["output"] is not None, "output", "an output directory is required")
    if cmd == "analyze":
        _check((params["map"] is None) != (params["coeffs"] is None), "map", "give exactly one of --map or --coeffs")
        if params["map"] is not None:
            _check(params["map"] in MAPS, "map", f"unknown map {params['map']!r}; choose from {list(MAPS)}")
        _check(params["output"] is not None, "output", "an output directory is required")
    if cmd == "verify":
        _check((params["suite"] is None) != (params["manifest"] is None), "suite",
               "give exactly one of --suite or --manifest")
        if params["suite"] is not None:
            _check(params["suite"] in suite.SUITES, "suite", f"unknown suite {params['suite']!r}")
    if cmd == "report":
        _check(bool(params["inputs"]), "inputs", "at least one input file or directory is required")
    return params


def _grid(params) -> DiskGrid:
    return DiskGrid.build(params["grid_radial"], params["grid_angular"], params["depth"], params["seed"])


def _emit(params, text: str) -> None:
    if params.get("output"):
        write_text(params["output"], text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_gallery(params) -> int:
    entries = {
        "functions": [{"name": k, "closed_form": v[1]} for k, v in holo.GALLERY_FUNCTIONS.items()],
        "maps": [
            {"name": "identity", "closed_form": "z"},
            {"name": "z2", "closed_form": "z^2"},
            {"name": "z3", "closed_form": "z^3"},
            {"name": "mobius", "closed_form": "(z + 0.5)/(1 + 0.5 z)"},
            {"name": "f0", "closed_form": "2z + (1 - z) log(1 - z)"},
            {"name": "one-plus-z", "closed_form": "1 + z"},
            {"name": "linear", "closed_form": "z + k conj(z), k = --k (default 0.3)"},
            {"name": "radial-stretch", "closed_form": "z |z|^(1/K - 1) (verification only)"},
        ],
        "curves": [{"name": k, "closed_form": v[1]} for k, v in curves.GALLERY_CURVES.items()],
    }
    if params["format"] == "text":
        lines = []
        for section, items in entries.items():
            lines.append(f"{section}:")
            width = max(len(e["name"]) for e in items)
            lines += [f"  {e['name']:<{width}}  {e['closed_form']}" for e in items]
        text = "\n".join(lines) + "\n"
    else:
        text = dumps(entries)
    _emit(params, text)
    return 0


def _field_rows(m, grid, U=None):
    z = grid.points()
    gp = np.abs(m.g.d1(z))
    hp = np.abs(m.h.d1(z))
    with np.errstate(all="ignore"):
        mu = np.where(gp > 0, hp / gp, np.nan)
    jac = gp ** 2 - hp ** 2
    rows = []
    for i in range(z.shape[0]):
        for j in range(z.shape[1]):
            row = [float(z[i, j].real), float(z[i, j].imag), float(gp[i, j]), float(hp[i, j]), float(mu[i, j]),
                   float(jac[i, j])]
            if U is not None:
                row.append(float(U[i - 1, j]) if i > 0 else "")
            rows.append(row)
    return rows


FIELD_HEADER = ["z_re", "z_im", "gp_abs", "hp_abs", "mu_abs", "jacobian"]


def cmd_extend(params) -> int:
    out = Path(params["output"])
    grid = _grid(params)
    modes = params["modes"]
    if params["input"] is not None:
        bf = hmap.read_boundary(params["input"])
        m = hmap.poisson_extend(bf, modes)
        jmin, wit = hmap.jacobian_min(m, grid)
        summary = {"source": str(params["input"]), "n_samples": bf.n, "convex": None}
    else:
        name = params["curve"]
        curve = curves.builtin_curve(name) if name in curves.GALLERY_CURVES else curves.read_curve(name)
        n = max(64, 1 << (2 * modes - 1).bit_length())
        param = curves.resample_arclength(curve, n)
        res = hmap.rkc_extend(hmap.BoundaryFunction(param.positions), n, grid)
        m = hmap.poisson_extend(hmap.BoundaryFunction(param.positions), modes)
        jmin, wit = res.jacobian_min, res.witness
        summary = {"source": curve.name, "n_samples": n, "convex": res.convex}
    out.mkdir(parents=True, exist_ok=True)
    holo.write_coefficients(out / "g_coeffs.txt", m.g)
    holo.write_coefficients(out / "h_coeffs.txt", m.h)
    write_text(out / "field.csv", csv_text(FIELD_HEADER, _field_rows(m, grid)))
    summary.update({"modes": modes, "jacobian_min": jmin, "jacobian_min_at": wit, "grid_meta": grid.meta()})
    write_text(out / "extend.json", dumps(summary))
    return 0


def _analyze_map(params):
    if params["coeffs"] is not None:
        d = Path(params["coeffs"])
        return hmap.HarmonicMap(holo.read_coefficients(d / "g_coeffs.txt"), holo.read_coefficients(d / "h_coeffs.txt"),
                                name=str(d))
    name = params["map"]
    if name == "linear":
        return hmap.linear_map(params["k"])
    return hmap.holomorphic(holo.builtin_function("z" if name == "identity" else name))


def _boundary_curve(m, n):
    t = TWO_PI * np.arange(n) / n
    try:
        return curves.polyline(m.boundary_values(t), name="boundary image")
    except HqcError:
        return None


def cmd_analyze(params) -> int:
    m = _analyze_map(params)
    grid = _grid(params)
    alpha, p = params["alpha"], params["p"]
    out = Path(params["output"])
    notes = []

    target = _boundary_curve(m, params["n_boundary"])
    arc = None
    if target is not None:
        try:
            arc = curves.resample_arclength(target, params["n_boundary"])
        except HqcError as e:
            notes.append(f"boundary curve: {e}")
    else:
        notes.append("boundary image is not a simple closed curve; B, omega and the U comparison are skipped")
    try:
        U = hmap.tangent_arg_field(m, grid, arc)
    except HqcError as e:
        U = None
        notes.append(f"tangent argument: {e}")

    Y, Y_at = holo.bloch_alpha_norm(m.g, alpha, grid, with_witness=True)
    sing = set(m.g.singular_points) | set(m.h.singular_points)
    t = TWO_PI * np.arange(params["n_boundary"]) / params["n_boundary"]
    keep = np.ones(len(t), dtype=bool)
    for s in sing:
        keep &= np.abs(np.angle(np.exp(1j * (t - np.angle(s))))) >= params["exclusion_arc"]
    X = holo.boundary_holder_constant(m.boundary_values(t[keep]), alpha, angles=t[keep])
    hardy = holo.hardy_norm(m, p, params["hardy_r"])
    bergman = holo.bergman_norm(lambda z: hmap.df_norms(m, z)[0], p, grid)
    try:
        dil = hmap.qc_constants(m, grid)
        k_hat, K_hat, is_qc = dil.k_hat, dil.K_hat, dil.is_qc
    except HqcError as e:
        k_hat = K_hat = is_qc = None
        notes.append(f"dilatation: {e}")
    jmin, jmin_at = hmap.jacobian_min(m, grid)

    B = None
    omega = []
    if arc is not None:
        B = curves.arc_chord_constant(arc)
        table = curves.modulus_of_continuity(arc, params["deltas"])
        omega = [[float(d), float(table[d])] for d in sorted(table)]

    norms = {
        "map": m.label,
        "alpha": alpha,
        "p": p,
        "Y": Y,
        "Y_at": Y_at,
        "X": X,
        "C_alpha": holo.c_alpha(alpha),
        "hardy": hardy,
        "hardy_r": params["hardy_r"],
        "bergman_df": bergman,
        "k_hat": k_hat,
        "K_hat": K_hat,
        "is_qc": is_qc,
        "jacobian_min": jmin,
        "jacobian_min_at": jmin_at,
        "B": B,
        "U_boundary_error": None if U is None else U.boundary_error,
        "omega": omega,
        "notes": notes,
        "grid_meta": grid.meta(),
    }
    out.mkdir(parents=True, exist_ok=True)
    header = FIELD_HEADER + ["U"]
    write_text(out / "field.csv", csv_text(header, _field_rows(m, grid, None if U is None else U.U)))
    scalar_keys = ["alpha", "p", "Y", "X", "C_alpha", "hardy", "bergman_df", "k_hat", "K_hat", "jacobian_min", "B"]
    row = [m.label] + [float(norms[k]) if norms[k] is not None else "" for k in scalar_keys]
    write_text(out / "norms.csv", csv_text(["map"] + scalar_keys, [row]))
    write_text(out / "omega.csv", csv_text(["delta", "omega"], omega))
    write_text(out / "norms.json", dumps(norms))
    return 0


def cmd_verify(params) -> int:
    items = suite.load_manifest(params["suite"], params["manifest"])
    ctx = suite.Context(seed=params["seed"], grid_radial=params["grid_radial"], grid_angular=params["grid_angular"],
                        depth=params["depth"], n_pairs=params["n_pairs"], exclusion_arc=params["exclusion_arc"],
                        modes=params["modes"])
    verdicts = suite.run_suite(items, ctx, params["workers"])
    text = suite.verdicts_csv(verdicts) if params["format"] == "csv" else suite.verdicts_json(verdicts)
    _emit(params, text)
    failed = [v.name for v in verdicts if not v.passed]
    if failed:
        print(f"hqc: {len(failed)} of {len(verdicts)} verdicts failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def _collect(paths):
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            files += sorted(p.rglob("*.json"))
        elif p.exists():
            files.append(p)
        else:
            raise ParameterError("inputs", f"no such file or directory: {p}")
    return files


def cmd_report(params) -> int:
    entries = []
    n_total = n_failed = 0
    for path in _collect(params["inputs"]):
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise InputFormatError(path, e.lineno, e.msg) from None
        entry = {"path": str(path)}
        if isinstance(data, list) and all(isinstance(v, dict) and "pass" in v for v in data):
            failed = [v.get("name") for v in data if not v["pass"]]
            entry.update({"kind": "verdicts", "n_verdicts": len(data), "n_failed": len(failed), "failed": failed})
            n_total += len(data)
            n_failed += len(failed)
        else:
            entry.update({"kind": "data", "content": data})
        entries.append(entry)
    summary = {"n_files": len(entries), "n_verdicts": n_total, "n_failed": n_failed,
               "all_pass": n_failed == 0, "files": entries}
    _emit(params, dumps(summary))
    return 0


COMMANDS = {"gallery": cmd_gallery, "extend": cmd_extend, "analyze": cmd_analyze, "verify": cmd_verify,
            "report": cmd_report}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        params = validate(resolve(args))
        return COMMANDS[args.command](params)
    except ParameterError as e:
        print(f"hqc {args.command}: {e}", file=sys.stderr)
        return 2
    except InputFormatError as e:
        print(f"hqc {args.command}: {e}", file=sys.stderr)
        return 3
    except (HqcError, OSError) as e:
        print(f"hqc {args.command}: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
