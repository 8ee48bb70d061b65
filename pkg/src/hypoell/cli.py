"""Command-line front end: classify / solve / witness / roundtrip / report.

Configuration is a single JSON document.  Coefficient functions are given
either as coefficient objects ({"k_max": ..., "re": [...], "im": [...]}) or
as expressions in a tiny closed language: numbers, i, +, -, * and the
harmonics sin(n t), cos(n t).  Anything else is rejected.

Exit codes: 0 success, 2 malformed configuration or input, 3 operator not
solvable, 4 near-resonant frequency encountered.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import mixedfft
from .classify import OperatorSpec, is_gs, is_sgh
from .mixedfft import CylinderGrid, Field, decay_report, forward_t, forward_x, inverse_x
from .solve import (
    CompatibilityError,
    NearResonantError,
    NotSolvableError,
    UndeterminedError,
    project_compatible,
    solve as run_solve,
)
from .trigfun import TorusFunction
from .witness import fit_decay_exponent, sign_change_witness

_FMT = "{:.16e}"


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------------
# coefficient expression mini-language
# ----------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)|(?P<imag>i\b)"
    r"|(?P<trig>sin|cos)\s*\(\s*(?P<mult>\d+)?\s*\*?\s*t\s*\)|(?P<op>[+*-]))"
)


def _tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ConfigError(f"cannot parse coefficient expression near: {text[pos:pos+12]!r}")
        if m.group("num") is not None:
            out.append(("num", float(m.group("num"))))
        elif m.group("imag") is not None:
            out.append(("num", 1j))
        elif m.group("trig") is not None:
            out.append(("trig", (m.group("trig"), int(m.group("mult") or 1))))
        else:
            out.append(("op", m.group("op")))
        pos = m.end()
    return out


def _combine(ca, cb):
    out = {}
    for ka, va in ca.items():
        for kb, vb in cb.items():
            out[ka + kb] = out.get(ka + kb, 0) + va * vb
    return out


def parse_coefficient(text: str) -> TorusFunction:
    """Parse the closed expression language into a TorusFunction."""
    tokens = _tokenize(text)
    terms, current, sign, expect_factor = [], None, 1.0, True
    i = 0
    while i < len(tokens):
        kind, val = tokens[i]
        if kind == "op" and val in "+-" and expect_factor:
            sign *= -1.0 if val == "-" else 1.0
            i += 1
            continue
        if kind == "op":
            if val == "*":
                expect_factor = True
                i += 1
                continue
            if current is None:
                raise ConfigError("dangling operator in coefficient expression")
            terms.append(current)
            current, sign, expect_factor = None, -1.0 if val == "-" else 1.0, True
            i += 1
            continue
        if not expect_factor:
            raise ConfigError("missing operator in coefficient expression")
        if kind == "num":
            factor = {0: complex(val)}
        else:
            name, n = val
            half = 0.5 if name == "cos" else -0.5j
            factor = {n: half, -n: half if name == "cos" else 0.5j}
        if sign != 1.0:
            factor = {k: sign * v for k, v in factor.items()}
            sign = 1.0
        current = factor if current is None else _combine(current, factor)
        expect_factor = False
        i += 1
    if current is not None:
        terms.append(current)
    if not terms or expect_factor:
        raise ConfigError("empty or incomplete coefficient expression")
    merged = {}
    for term in terms:
        for k, v in term.items():
            merged[k] = merged.get(k, 0) + v
    k_max = max(1, max(abs(k) for k in merged))
    coeffs = np.zeros(2 * k_max + 1, dtype=complex)
    for k, v in merged.items():
        coeffs[k + k_max] = v
    return TorusFunction(coeffs)


def _coefficient(obj):
    if isinstance(obj, str):
        return parse_coefficient(obj)
    if isinstance(obj, dict):
        return TorusFunction.from_json(obj)
    raise ConfigError("coefficient must be an expression string or a coefficient object")


# ----------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------

def load_config(path):
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for block in ("operator", "grid"):
        if block not in cfg or not isinstance(cfg[block], dict):
            raise ConfigError(f"config is missing the '{block}' block")
    op_block = cfg["operator"]
    for key in ("c", "q"):
        if key not in op_block:
            raise ConfigError(f"operator block is missing '{key}'")
    gb = cfg["grid"]
    try:
        grid = CylinderGrid(int(gb.get("n_t", 64)), int(gb.get("n_x", 512)), float(gb.get("X", 20.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid block: {exc}") from exc
    op = OperatorSpec(_coefficient(op_block["c"]), _coefficient(op_block["q"]))
    tol = cfg.get("tolerances", {})
    if not isinstance(tol, dict) or any(not isinstance(v, (int, float)) or v <= 0 for v in tol.values()):
        raise ConfigError("tolerances must be a block of positive numbers")
    return {
        "operator": op,
        "grid": grid,
        "rhs": cfg.get("rhs", "gaussian"),
        "output_dir": Path(cfg.get("output_dir", ".")),
        "tolerances": tol,
        "project": bool(cfg.get("project", False)),
        "force": bool(cfg.get("force", False)),
    }


def _builtin_rhs(name, grid):
    x = grid.x
    m = re.fullmatch(r"hermite\((\d+)\)", name)
    if name == "gaussian":
        prof = np.exp(-0.5 * x**2)
    elif m:
        n = int(m.group(1))
        prof = np.polynomial.hermite.hermval(x, [0] * n + [1]) * np.exp(-0.5 * x**2)
    elif name == "bump":
        w = grid.X / 2.0
        prof = np.zeros_like(x)
        inside = np.abs(x) < w
        prof[inside] = np.exp(1.0 - 1.0 / (1.0 - (x[inside] / w) ** 2))
    else:
        raise ConfigError(f"unknown rhs '{name}'")
    return Field(grid, np.broadcast_to(prof[None, :], (grid.n_t, grid.n_x)).astype(complex))


def _resolve_rhs(spec, grid):
    if isinstance(spec, str) and (spec.endswith(".csv") or "/" in spec):
        try:
            return mixedfft.read_field_csv(spec, grid)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load rhs CSV: {exc}") from exc
    if isinstance(spec, str):
        return _builtin_rhs(spec, grid)
    raise ConfigError("rhs must be a builtin name or a CSV path")


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_classify(cfg):
    op = cfg["operator"]
    verdict = is_sgh(op)
    solvability = is_gs(op)
    out = verdict.to_json()
    out.update(solvability.to_json())
    outdir = cfg["output_dir"]
    outdir.mkdir(parents=True, exist_ok=True)
    _write_json(outdir / "verdict.json", out)
    print(json.dumps(out))
    return 0


def cmd_solve(cfg, force=False):
    op, grid = cfg["operator"], cfg["grid"]
    f = _resolve_rhs(cfg["rhs"], grid)
    if cfg["project"]:
        f = project_compatible(op, f)
    tol = cfg["tolerances"].get("solve_residual", 1e-6) * (1.0 + float(np.max(np.abs(f.values))))
    try:
        outcome = run_solve(op, f, force=force or cfg["force"])
    except NotSolvableError as exc:
        payload = {"error": "not_solvable", "verdict": exc.verdict.to_json()}
        print(json.dumps(payload))
        return 3
    except UndeterminedError as exc:
        payload = {"error": "undetermined", "verdict": exc.verdict.to_json()}
        print(json.dumps(payload))
        return 3
    except NearResonantError as exc:
        print(json.dumps({"error": "near_resonant", "xi": exc.xi, "factor": exc.factor}))
        return 4
    except CompatibilityError as exc:
        payload = {"error": "incompatible_rhs",
                   "xi": [x for x, _ in exc.entries],
                   "defect": [abs(d) for _, d in exc.entries]}
        print(json.dumps(payload))
        return 2
    outdir = cfg["output_dir"]
    outdir.mkdir(parents=True, exist_ok=True)
    mixedfft.write_field_csv(outdir / "u.csv", outcome.u)
    report = {
        "residual": float(outcome.residual),
        "residual_tolerance": float(tol),
        "condition_report": float(outcome.condition_report) if np.isfinite(outcome.condition_report) else None,
        "sigma_handled": [[float(x), m] for x, m in outcome.sigma_handled],
    }
    _write_json(outdir / "outcome.json", report)
    print(json.dumps({"residual": report["residual"], "ok": outcome.residual <= tol}))
    return 0 if outcome.residual <= tol else 1


def cmd_witness(cfg):
    op, grid = cfg["operator"], cfg["grid"]
    try:
        fhat, eval_u, recipe = sign_change_witness(op, grid)
    except ValueError as exc:
        print(json.dumps({"error": str(exc)}))
        return 2
    slope, xi, vals = fit_decay_exponent(eval_u)
    outdir = cfg["output_dir"]
    outdir.mkdir(parents=True, exist_ok=True)
    mixedfft.write_half_csv(outdir / "fhat.csv", fhat)
    with open(outdir / "uhat_t0.csv", "w", encoding="utf-8") as fh:
        fh.write("xi,re,im\n")
        uv = eval_u(xi)
        for x, v in zip(xi, uv):
            fh.write(",".join(_FMT.format(w) for w in (x, v.real, v.imag)) + "\n")
    payload = recipe.to_json()
    payload["decay_exponent"] = float(slope)
    _write_json(outdir / "recipe.json", payload)
    print(json.dumps({"decay_exponent": slope}))
    return 0


def cmd_roundtrip(cfg):
    grid = cfg["grid"]
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(8):
        k = int(rng.integers(-4, 5))
        shift = float(rng.uniform(-2, 2))
        width = float(rng.uniform(0.8, 1.6))
        prof = np.exp(-0.5 * ((grid.x - shift) / width) ** 2)
        f = Field(grid, np.outer(np.exp(1j * k * grid.t), prof))
        back = inverse_x(forward_x(f))
        worst = max(worst, float(np.max(np.abs(back.values - f.values)) / np.max(np.abs(f.values))))
        spec = forward_t(forward_x(f))
        again = inverse_x(mixedfft.inverse_t(spec))
        worst = max(worst, float(np.max(np.abs(again.values - f.values)) / np.max(np.abs(f.values))))
    print(json.dumps({"max_roundtrip_error": worst}))
    return 0 if worst < 1e-10 else 1


def cmd_report(cfg, field_csv):
    grid = cfg["grid"]
    try:
        f = mixedfft.read_field_csv(field_csv, grid)
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": str(exc)}))
        return 2
    rep = decay_report(forward_t(forward_x(f, check_boundary=False)), n_max=8)
    outdir = cfg["output_dir"]
    outdir.mkdir(parents=True, exist_ok=True)
    _write_json(outdir / "decay_report.json", rep.to_json())
    with open(outdir / "decay.csv", "w", encoding="utf-8") as fh:
        fh.write("n,d\n")
        for n, d in zip(rep.orders, rep.values):
            fh.write(f"{int(n)},{_FMT.format(d)}\n")
    print(json.dumps({"schwartz_like": rep.schwartz_like}))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="hypoell", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("classify", "solve", "witness", "roundtrip", "report"):
        p = sub.add_parser(name)
        p.add_argument("config", help="path to the JSON configuration")
        if name == "solve":
            p.add_argument("--force", action="store_true", help="attempt undetermined operators")
        if name == "report":
            p.add_argument("field_csv", help="field dump to analyze")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "classify":
            return cmd_classify(cfg)
        if args.command == "solve":
            return cmd_solve(cfg, force=args.force)
        if args.command == "witness":
            return cmd_witness(cfg)
        if args.command == "roundtrip":
            return cmd_roundtrip(cfg)
        return cmd_report(cfg, args.field_csv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
