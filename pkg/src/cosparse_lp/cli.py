"""Command line runner: bound tables, figures, recovery, isometry constants, checks.

Usage::

    cosparse-lp <subcommand> [--config FILE] [--out DIR] [--seed N]

Configs are flat ``key = value`` lines with ``#`` comments. Unknown keys are
an error. Every run writes ``config.resolved.txt`` and ``version.txt`` next
to its outputs.

Exit codes: 0 success, 1 usage or I/O error, 2 verification violations,
3 solver failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__, bounds, verify
from .io import atomic_write_text, csv_text, dumps_matrix, dumps_signal, format_float
from .model import build_problem, generate_cosparse_signal, make_gaussian_measurement, \
    make_random_parseval_frame
from .rip import EnumerationCapError, omega_rip_exact, omega_rip_sampled
from .rng import child_seeds
from .solvers import (AdmmOptions, InfeasibleProblemError, IrlsOptions, SolverDivergedError,
                      solve_abp_l1, solve_irls_lp, solve_l0_exhaustive)
from .svg import line_plot

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_SOLVER = 0, 1, 2, 3

P_LIST = "0.1,0.3,0.5,0.7,0.9,1"

DEFAULTS = {
    "table1": {"s": 100, "M": 600, "step": 0.01, "policies": "zero,fixed:0.4,equal",
               "p_list": P_LIST, "seed": 0},
    "figures": {"s": 100, "M": 600, "step": 0.01, "policy": "zero", "sigma": 1e-4,
                "delta_M": 0.4, "delta_sM": 0.5, "p_list": P_LIST, "eta_max": 0.01,
                "eta_samples": 100, "seed": 0},
    "constants": {"p": 0.5, "s": 100, "M": 600, "delta_M": 0.4, "delta_sM": 0.5, "seed": 0},
    "recover": {"d": 8, "n": 10, "m": 6, "cosparsity": 7, "sigma": 0.0, "p": 0.5, "solver": "l0",
                "seed": 3, "s": 2, "M": 3, "deltas": "none",
                "eps0": 1.0, "eps_factor": 0.1, "eps_stages": 6, "lambda0": 1.0,
                "lambda_growth": 10.0, "lambda_cap": 1e16, "feas_tol": 1e-6, "max_outer": 200},
    "rip": {"d": 6, "n": 8, "m": 5, "orders": "1,2,3", "mode": "exhaustive", "trials": 1000,
            "cap": 2_000_000, "seed": 0},
    "verify": {"seed_start": 1, "seed_end": 1000, "families": "tiny,isometric", "block": "true",
               "delta_M": "exact", "delta_sM": "exact", "seed": -1},
}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- configuration -----------------------------------------------------------

def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        values[key] = val
    return values


def _coerce(default, text):
    if isinstance(default, bool):
        return str(text).lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return str(text)


def resolve_config(command: str, raw: dict, seed: Optional[int] = None) -> dict:
    defaults = DEFAULTS[command]
    unknown = sorted(set(raw) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
    cfg = dict(defaults)
    for key, val in raw.items():
        try:
            cfg[key] = _coerce(defaults[key], val)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {val!r}") from exc
    if seed is not None:
        cfg["seed"] = seed
        if command == "verify":
            cfg["seed_start"] = cfg["seed_end"] = seed
    return cfg


def dumps_config(cfg: dict) -> str:
    lines = []
    for key in sorted(cfg):
        val = cfg[key]
        lines.append(f"{key} = {format_float(val) if isinstance(val, float) else val}")
    return "\n".join(lines) + "\n"


def _floats(text: str) -> list[float]:
    return [float(t) for t in str(text).split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in str(text).split(",") if t.strip()]


def _write(out: Path, name: str, text: str) -> Path:
    path = out / name
    atomic_write_text(path, text)
    return path


# --- table1 ----------------------------------------------------------------

TABLE1_HEADER = ("p", "delta_max", "K1", "policy", "ref_delta_max", "ref_K1",
                 "delta_max_diff", "K1_at_ref_delta", "K1_ratio_at_ref_delta")


def table1_rows(cfg: dict, policy: str) -> list[tuple]:
    ref = {round(r["p"], 6): r for r in bounds.reference_values()["table1"]}
    rows = []
    for p in _floats(cfg["p_list"]):
        sweep = bounds.max_delta_sweep(p, cfg["s"], cfg["M"], policy, cfg["step"])
        r = ref.get(round(p, 6))
        ref_d = ref_k = diff = k_at = ratio = None
        if r is not None:
            ref_d, ref_k = r["delta_max"], r["K1"]
            if sweep.delta_max is not None:
                diff = round(sweep.delta_max - ref_d, 12)
            dM = bounds.policy_delta_M(policy, ref_d)
            c = bounds.constants(p, cfg["s"], cfg["M"], dM, ref_d)
            if c.K1_positive:
                k_at = c.K1
                ratio = c.K1 / ref_k
        rows.append((p, sweep.delta_max, sweep.K1_at_max, policy, ref_d, ref_k, diff, k_at, ratio))
    return rows


def truncate_sig(v: float, digits: int = 2) -> float:
    """Cut (not round) ``v`` to ``digits`` significant digits."""
    if v == 0 or not math.isfinite(v):
        return v
    e = math.floor(math.log10(abs(v))) - digits + 1
    return math.trunc(round(v / 10 ** e, 9)) * 10 ** e


def same_printed(k1: float, ref: float) -> tuple[bool, bool]:
    """(agrees when rounded, agrees when truncated) at the precision of ``ref``."""
    rounded = f"{k1:.1e}" == f"{ref:.1e}"
    truncated = f"{truncate_sig(k1):.1e}" == f"{ref:.1e}"
    return rounded, truncated


def table1_mismatches(rows) -> list[str]:
    out = []
    for p, dmax, k1, policy, pd, pk, diff, k_at, ratio in rows:
        if pd is None:
            continue
        if dmax is None:
            out.append(f"p={p} policy={policy}: no feasible delta (reference {pd})")
            continue
        if abs(diff) > 1e-12:
            out.append(f"p={p} policy={policy}: delta_max {dmax} vs reference {pd}")
        if k1 is None:
            continue
        rounded, truncated = same_printed(k1, pk)
        if not rounded:
            note = "agrees when truncated, not when rounded" if truncated else (
                "no agreement" if ratio is None else f"ratio at reference delta {ratio:.3f}")
            out.append(f"p={p} policy={policy}: K1 {k1:.3e} vs reference {pk:.1e} ({note})")
    return out


def _policy_slug(policy: str) -> str:
    return policy.replace(":", "-")


def run_table1(cfg: dict, out: Path) -> int:
    policies = [p.strip() for p in cfg["policies"].split(",") if p.strip()]
    for policy in policies:
        bounds.parse_policy(policy)
    report = []
    for k, policy in enumerate(policies):
        rows = table1_rows(cfg, policy)
        text = csv_text(TABLE1_HEADER, rows)
        if k == 0:
            _write(out, "table1.csv", text)
        _write(out, f"table1_{_policy_slug(policy)}.csv", text)
        mism = table1_mismatches(rows)
        report.append(f"policy {policy}: {len(mism)} mismatch(es) against the reference table")
        report.extend("  " + m for m in mism)
    _write(out, "table1_report.txt", "\n".join(report) + "\n")
    print("\n".join(report))
    return EXIT_OK


# --- figures -----------------------------------------------------------------

def figure1_rows(cfg: dict) -> list[tuple]:
    rows = []
    for p in _floats(cfg["p_list"]):
        sweep = bounds.max_delta_sweep(p, cfg["s"], cfg["M"], cfg["policy"], cfg["step"])
        for dsM, dM, K1, feasible in sweep.curve:
            rows.append((p, dsM, dM, K1, feasible))
    return rows


def figure2_curves(cfg: dict) -> list:
    etas = bounds.eta_samples(cfg["eta_max"], cfg["eta_samples"])
    return bounds.bound_curve(_floats(cfg["p_list"]), etas, cfg["sigma"], cfg["s"], cfg["M"],
                              cfg["delta_M"], cfg["delta_sM"])


def run_figures(cfg: dict, out: Path) -> int:
    f1 = figure1_rows(cfg)
    _write(out, "figure1.csv", csv_text(("p", "delta_sM", "delta_M", "K1", "feasible"), f1))
    series, notes = [], []
    for p in _floats(cfg["p_list"]):
        pts = [(d, k) for q, d, _, k, ok in f1 if q == p and ok]
        if pts:
            series.append((f"p = {p:g}", [d for d, _ in pts], [k for _, k in pts]))
        else:
            notes.append(f"p = {p:g}: no feasible delta")
    _write(out, "figure1.svg", line_plot(series, "K1 against delta_sM", "delta_sM", "K1", notes))

    curves = figure2_curves(cfg)
    rows = [row for c in curves for row in c.rows]
    _write(out, "figure2.csv", csv_text(("p", "eta", "bound"), rows))
    series, notes = [], []
    for c in curves:
        if c.absent:
            notes.append(f"p = {c.p:g}: {c.absent_reason}")
        else:
            series.append((f"p = {c.p:g}", [r[1] for r in c.rows], [r[2] for r in c.rows]))
    title = f"Error bound, delta_M = {cfg['delta_M']:g}, delta_sM = {cfg['delta_sM']:g}"
    _write(out, "figure2.svg", line_plot(series, title, "eta", "error bound", notes))
    for note in notes:
        print(f"figure2: {note}")
    return EXIT_OK


# --- constants ---------------------------------------------------------------

def run_constants(cfg: dict, out: Path) -> int:
    c = bounds.constants(cfg["p"], cfg["s"], cfg["M"], cfg["delta_M"], cfg["delta_sM"])
    ref = bounds.reference_values()["constants"]
    header = bounds.CONSTANTS_HEADER + ("source",)
    rows = [c.csv_row() + ("computed",)]
    _write(out, "constants.csv", csv_text(header, rows))
    cmp_rows = [("computed lp", cfg["p"], c.C0, c.C1)]
    for key, r in ref.items():
        cmp_rows.append((f"reference {key}", None, r["C0"], r["C1"]))
    _write(out, "constants_comparison.csv", csv_text(("label", "p", "C0", "C1"), cmp_rows))
    lines = [f"K1 = {c.K1!r}", f"K2 = {c.K2!r}", f"C0 computed = {c.C0!r}",
             f"C1 computed = {c.C1!r}"]
    r = ref["lp_p0.5"]
    if cfg["p"] == 0.5 and c.C0 is not None:
        flag = "MISMATCH" if (abs(c.C0 - r["C0"]) > 5e-5 or abs(c.C1 - r["C1"]) > 5e-5) else "match"
        lines.append(f"C0 reference = {r['C0']}, C1 reference = {r['C1']} [{flag}]")
    print("\n".join(lines))
    _write(out, "constants_report.txt", "\n".join(lines) + "\n")
    return EXIT_OK


# --- recover -----------------------------------------------------------------

RECOVER_HEADER = ("solver", "p", "seed", "error", "residual", "sigma", "objective", "cosparsity",
                  "converged", "delta_M", "delta_sM", "K1", "K2", "eta", "bound", "bound_dominates")


def _recover_deltas(cfg, problem):
    text = str(cfg["deltas"]).strip()
    if text == "none":
        return None
    if text == "exact":
        return verify.exact_deltas(problem, cfg["s"], cfg["M"])
    vals = _floats(text)
    if len(vals) != 2:
        raise ConfigError("deltas must be 'none', 'exact' or 'delta_M,delta_sM'")
    return vals[0], vals[1]


def run_recover(cfg: dict, out: Path) -> int:
    s_frame, s_signal, s_meas, s_noise = child_seeds(cfg["seed"], 4)
    omega = make_random_parseval_frame(cfg["n"], cfg["d"], s_frame)
    signal = generate_cosparse_signal(omega, cfg["cosparsity"], s_signal)
    A = make_gaussian_measurement(cfg["m"], cfg["d"], s_meas)
    problem = build_problem(A, omega, signal, cfg["sigma"], s_noise)
    solver, p = cfg["solver"], cfg["p"]
    if solver == "l0":
        res = solve_l0_exhaustive(problem, p=p, feas_tol=cfg["feas_tol"])
    elif solver == "irls":
        res = solve_irls_lp(problem, p, IrlsOptions.from_mapping(cfg))
    elif solver == "admm":
        res = solve_abp_l1(problem, AdmmOptions(feas_tol=cfg["feas_tol"]))
        p = 1.0
    else:
        raise ConfigError(f"unknown solver {solver!r} (use l0, irls or admm)")
    err = float(np.linalg.norm(signal.x - res.x_hat))
    deltas = _recover_deltas(cfg, problem)
    dM = dsM = K1 = K2 = eta = bound = dominates = None
    if deltas is not None:
        dM, dsM = deltas
        if dsM < 1 and cfg["s"] < cfg["M"] and 0 < p <= 1:
            c = bounds.constants(p, cfg["s"], cfg["M"], dM, dsM)
            K1, K2 = c.K1, c.K2
            if c.K1_positive and c.gamma_feasible:
                eta = bounds.compute_eta(omega, signal.x, cfg["s"])
                bound = bounds.error_bound(c.K1, c.K2, cfg["sigma"], eta)
                dominates = err <= bound
    row = (solver, p, cfg["seed"], err, res.residual, cfg["sigma"], res.analysis_lp,
           res.cosparsity, res.converged, dM, dsM, K1, K2, eta, bound, dominates)
    _write(out, "recovery.csv", csv_text(RECOVER_HEADER, [row]))
    _write(out, "x_true.csv", dumps_signal(signal.x))
    _write(out, "x_hat.csv", dumps_signal(res.x_hat))
    _write(out, "A.txt", dumps_matrix(A))
    _write(out, "omega.txt", dumps_matrix(omega.matrix))
    print(f"error = {err:.6e}, residual = {res.residual:.6e}, converged = {res.converged}")
    return EXIT_OK


# --- rip ---------------------------------------------------------------------

RIP_HEADER = ("order", "delta", "method", "count", "lambda_min", "lambda_max", "witness_support")


def run_rip(cfg: dict, out: Path) -> int:
    s_frame, s_meas, s_sample = child_seeds(cfg["seed"], 3)
    omega = make_random_parseval_frame(cfg["n"], cfg["d"], s_frame)
    A = make_gaussian_measurement(cfg["m"], cfg["d"], s_meas)
    rows = []
    for k in _ints(cfg["orders"]):
        if cfg["mode"] == "exhaustive":
            est = omega_rip_exact(A, omega, k, cap=cfg["cap"])
        elif cfg["mode"] == "sampled":
            est = omega_rip_sampled(A, omega, k, cfg["trials"], s_sample)
        else:
            raise ConfigError(f"unknown mode {cfg['mode']!r}")
        rows.append(est.csv_row() + (est.lambda_min, est.lambda_max,
                                     " ".join(str(i) for i in est.witness_support)))
    _write(out, "rip.csv", csv_text(RIP_HEADER, rows))
    _write(out, "A.txt", dumps_matrix(A))
    _write(out, "omega.txt", dumps_matrix(omega.matrix))
    for r in rows:
        print(f"order {r[0]}: delta = {r[1]:.6g}")
    return EXIT_OK


# --- verify ------------------------------------------------------------------

def _verify_deltas(cfg):
    dM, dsM = str(cfg["delta_M"]).strip(), str(cfg["delta_sM"]).strip()
    if dM == "exact" and dsM == "exact":
        return None
    if "exact" in (dM, dsM):
        raise ConfigError("delta_M and delta_sM must both be 'exact' or both numeric")
    return float(dM), float(dsM)


def run_verify(cfg: dict, out: Path) -> int:
    families = [f.strip() for f in cfg["families"].split(",") if f.strip()]
    for f in families:
        if f not in verify.DEFAULT_FAMILIES:
            raise ConfigError(f"unknown family {f!r} (known: {', '.join(verify.DEFAULT_FAMILIES)})")
    seeds = range(cfg["seed_start"], cfg["seed_end"] + 1)
    block = str(cfg["block"]).lower() in ("1", "true", "yes")
    summary = verify.run_suite(seeds, families, _verify_deltas(cfg), block=block)
    findings = _write(out, "findings.csv",
                      csv_text(verify.FINDINGS_HEADER, [r.findings_row() for r in summary.findings]))
    lines = summary.lines()
    lines.append(f"seeds {cfg['seed_start']}..{cfg['seed_end']} ({len(seeds)}), "
                 f"contract violations {summary.contract_violations}, "
                 f"logged violations {summary.logged_violations}")
    _write(out, "summary.txt", "\n".join(lines) + "\n")
    print("\n".join(lines))
    if summary.contract_violations:
        print(f"violations written to {findings}")
        return EXIT_VIOLATION
    return EXIT_OK


COMMANDS = {"table1": run_table1, "figures": run_figures, "constants": run_constants,
            "recover": run_recover, "rip": run_rip, "verify": run_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cosparse-lp", description=__doc__.split("\n", 1)[0])
    parser.add_argument("--version", action="version", version=f"cosparse-lp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None)
        p.add_argument("--out", type=Path, default=Path("out") / name)
        p.add_argument("--seed", type=int, default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = parse_config_text(args.config.read_text()) if args.config else {}
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be nonnegative")
        cfg = resolve_config(args.command, raw, args.seed)
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        _write(out, "config.resolved.txt", dumps_config(cfg))
        _write(out, "version.txt", f"cosparse-lp {__version__}\n")
        return COMMANDS[args.command](cfg, out)
    except (ValueError, EnumerationCapError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverDivergedError, InfeasibleProblemError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
