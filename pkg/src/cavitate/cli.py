"""Command line entry point: ``cavitate <command> --config FILE``.

CSV outputs (header row first, columns in this order):

  jacobi          t, f, f_prime, sigma, kappa
  incompressible  A, chi, E, I, T0_residual
  compressible    rho, phi, phi_prime, tau, T, T_tilde
  sweep           lambda, verdict, I_reg, I_cav, A

Exit status: 0 success, 1 configuration error, 2 admissibility gate
failure, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import compressible as comp
from . import incompressible as inc
from .config import COMMANDS, RunConfig, build_curvature, build_law, load_config
from .constitutive import ConstitutiveLaw, check_assumptions, omega
from .errors import AdmissibilityError, ConfigError, ConvergenceError
from .jacobi import solve_jacobi

__all__ = ["main", "run"]

log = logging.getLogger("cavitate")

EXIT_OK, EXIT_CONFIG, EXIT_GATE, EXIT_CONVERGENCE = 0, 1, 2, 3

COLUMNS = {
    "jacobi": ("t", "f", "f_prime", "sigma", "kappa"),
    "incompressible": ("A", "chi", "E", "I", "T0_residual"),
    "compressible": ("rho", "phi", "phi_prime", "tau", "T", "T_tilde"),
    "sweep": ("lambda", "verdict", "I_reg", "I_cav", "A"),
}


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _clean(obj):
    """JSON-safe copy: numpy scalars to floats, non-finite values to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def _write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# model assembly


def _t_max(cfg: RunConfig, need: float) -> float:
    t = cfg.model["t_max"]
    if t is None:
        t = 1.25 * max(need, 1.0) + 0.5
    return float(t)


def _field(cfg: RunConfig, need: float):
    curv = build_curvature(cfg.model["curvature"], cfg.model["n"])
    t_max = min(_t_max(cfg, need), curv.t_max)
    return solve_jacobi(curv, cfg.model["n"], t_max, tol=cfg.model["tol"])


def _law(cfg: RunConfig):
    return build_law(cfg.material, cfg.model["n"])


def _need_full_law(law, what):
    if not isinstance(law, ConstitutiveLaw):
        raise ConfigError(f"$.material: the {what} command needs a full (phi, h) law")


# ---------------------------------------------------------------------------
# commands


def _cmd_jacobi(cfg, out):
    c = cfg.command
    t_end = c["t_max"] if c["t_max"] is not None else _t_max(cfg, 1.0)
    curv = build_curvature(cfg.model["curvature"], cfg.model["n"])
    F = solve_jacobi(curv, cfg.model["n"], min(t_end, curv.t_max), tol=cfg.model["tol"])
    t = np.linspace(0.0, F.t_max, c["points"])
    f, fp = F.f_fp(t)
    rows = zip(t, f, fp, F.sigma(t), np.asarray(F.kappa(t), dtype=float) * np.ones_like(t))
    files = {"jacobi.csv": _csv_text(COLUMNS["jacobi"], rows)}
    summary = {"command": "jacobi", "t_max": F.t_max, "truncated": F.truncated,
               "mu_plus": F.mu_plus(F.t_max), "mu_minus": F.mu_minus(F.t_max)}
    return summary, files, F


def _cmd_pcr(cfg, out):
    law = _law(cfg)
    tol = cfg.command["tol"]
    ok, val42, rep42 = inc.admissibility_42(law, tol)
    if not ok:
        raise AdmissibilityError("tail integrability condition fails: " + rep42.note)
    p, rep = inc.pcr(law, tol, report=True)
    summary = {"command": "pcr", "P_cr": p, "tail": rep, "integrability": val42}
    return summary, {"pcr.json": _json_text(summary)}, None


def _cmd_incompressible(cfg, out):
    c = cfg.command
    law = _law(cfg)
    grid = c["A_grid"]
    F = _field(cfg, 1.0 + grid[-1])
    ok, _, rep42 = inc.admissibility_42(law, c["tol"])
    if not ok:
        raise AdmissibilityError("tail integrability condition fails: " + rep42.note)
    for A in (0.0, grid[-1]):
        inc.incompressible_deformation(F, A)
    has_energy = getattr(law, "phi_hat_fn", True) is not None
    diag = inc.bifurcation_diagram(F, law, grid, c["P"], energies=has_energy)
    n = F.n
    P = diag.P_cr if c["P"] is None else c["P"]
    if not has_energy:
        tau1 = np.array([inc.incompressible_deformation(F, A).tau(1.0) for A in grid])
        E = I = [None] * len(grid)
        T0 = (P - diag.chi_values) / tau1 ** (n - 1)
    else:
        E, I, T0 = diag.E_values, diag.I_values, diag.T0_residuals
    rows = zip(grid, diag.chi_values, E, I, T0)
    summary = {"command": "incompressible", "P_cr": diag.P_cr, "P": P, "gap": diag.gap,
               "omega_n": omega(n), "slope_diag": diag.slope_diag}
    files = {"incompressible.csv": _csv_text(COLUMNS["incompressible"], rows),
             "incompressible.json": _json_text(summary)}
    return summary, files, F


def _profile_rows(F, law, sol, points):
    rho = np.linspace(0.0, 1.0, points)
    rho[0] = sol.rho_start
    rep = comp.stress_report(F, law, sol)
    phi, a, t, _ = sol.state(rho)
    rows = [(r, p, d, tt, rep.T(r), rep.T_tilde(r)) for r, p, d, tt in zip(rho, phi, a, t)]
    return rows, rep


def _solution_record(sol):
    if sol is None:
        return None
    return {"kind": sol.kind, "A": sol.A, "lam": sol.lam, "energy": sol.energy,
            "T0": sol.T0, "residual": sol.residual, "slope0": sol.slope0,
            "flags": sol.flags}


def _cmd_compressible(cfg, out):
    c = cfg.command
    law = _law(cfg)
    _need_full_law(law, "compressible")
    lam = c["lambda"]
    F = _field(cfg, lam)
    reg = cav = None
    if c["branch"] in ("auto", "regular"):
        reg = comp.solve_regular(F, law, lam, c["tol"])
    if c["branch"] in ("auto", "cavitating"):
        cav = comp.solve_cavitating(F, law, lam, c["tol"])
    if c["branch"] == "cavitating" and cav is None:
        raise ConvergenceError(f"no cavitating solution found for lambda={lam:g}")
    cands = [s for s in (reg, cav) if s is not None and s.kind in ("regular", "cavitating")]
    best = min(cands, key=lambda s: s.energy)
    rows, rep = _profile_rows(F, law, best, c["points"])
    summary = {"command": "compressible", "lambda": lam, "verdict": best.kind,
               "solution": _solution_record(best), "regular": _solution_record(reg),
               "cavitating": _solution_record(cav),
               "conservation_residual": rep.conservation_residual,
               "identity_residual": rep.identity_residual}
    files = {"compressible.csv": _csv_text(COLUMNS["compressible"], rows),
             "compressible.json": _json_text(summary)}
    return summary, files, F


def _cmd_minimize(cfg, out):
    c = cfg.command
    law = _law(cfg)
    _need_full_law(law, "minimize")
    lam = c["lambda"]
    F = _field(cfg, lam)
    assumptions = check_assumptions(law)
    r = comp.minimize_energy(F, law, lam, c["grid_size"], c["tol"])
    summary = {"command": "minimize", "lambda": lam, "verdict": r.verdict,
               "regular_energy": r.regular_energy,
               "best_cavitating_energy": r.best_cavitating_energy,
               "direct_min_energy": r.direct_min_energy,
               "direct_coarse_energy": r.direct_coarse_energy,
               "grid_error_bound": r.grid_error_bound,
               "direct_converged": r.direct_converged, "A": r.best.A,
               "assumptions": assumptions.status}
    return summary, {"minimize.json": _json_text(summary)}, F


def _sweep_point(args):
    cfg_dict, lam = args
    from .config import parse_config
    cfg = parse_config(cfg_dict)
    law = _law(cfg)
    F = _field(cfg, lam)
    tol = cfg.command["tol"]
    reg = comp.solve_regular(F, law, lam, tol, check=False)
    cav = comp.solve_cavitating(F, law, lam, tol)
    tol_e = 1e3 * tol * (1 + abs(reg.energy))
    if cav is not None and cav.kind == "cavitating" and cav.energy < reg.energy - tol_e:
        return (lam, "cavitating", reg.energy, cav.energy, cav.A)
    return (lam, "regular", reg.energy, None if cav is None else cav.energy, 0.0)


def _cmd_sweep(cfg, out, jobs=1):
    law = _law(cfg)
    _need_full_law(law, "sweep")
    lams = cfg.command["lambdas"]
    tasks = [(cfg.to_dict(), lam) for lam in lams]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    cav = [r[0] for r in rows if r[1] == "cavitating"]
    summary = {"command": "sweep", "lambdas": lams,
               "verdicts": [r[1] for r in rows],
               "transition": cav[0] if cav else None}
    return summary, {"sweep.csv": _csv_text(COLUMNS["sweep"], rows)}, None


_DISPATCH = {
    "jacobi": _cmd_jacobi,
    "pcr": _cmd_pcr,
    "incompressible": _cmd_incompressible,
    "compressible": _cmd_compressible,
    "minimize": _cmd_minimize,
    "sweep": _cmd_sweep,
}


def run(cfg: RunConfig, out: str = ".", jobs: int = 1, dump_jacobi: bool = False,
        stream=None) -> int:
    """Execute a validated configuration; returns the exit status."""
    stream = sys.stdout if stream is None else stream
    name = cfg.name
    try:
        if name == "sweep":
            summary, files, F = _cmd_sweep(cfg, out, jobs)
        else:
            summary, files, F = _DISPATCH[name](cfg, out)
        if dump_jacobi:
            if F is None:
                F = _field(cfg, 1.0)
            files["jacobi.json"] = _json_text(F.to_dict())
        for fname, text in files.items():
            _write_atomic(os.path.join(out, fname), text)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AdmissibilityError as exc:
        print(json.dumps({"command": name, "status": "gate failure", "error": str(exc)}),
              file=stream)
        return EXIT_GATE
    except ConvergenceError as exc:
        print(json.dumps({"command": name, "status": "no convergence", "error": str(exc)}),
              file=stream)
        return EXIT_CONVERGENCE
    summary["status"] = "ok"
    print(json.dumps(_clean(summary), sort_keys=True), file=stream)
    return EXIT_OK


def _parser():
    p = argparse.ArgumentParser(
        prog="cavitate",
        description="Radial cavitation analyses on model manifolds.",
        epilog=__doc__.split("\n\n", 1)[1],
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON configuration file, or - for stdin")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweep")
    p.add_argument("--dump-jacobi", action="store_true",
                   help="also write the sampled Jacobi field to jacobi.json")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    level = os.environ.get("CAVITATE_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.name != args.command:
        print(f"config error: $.command.name is {cfg.name!r} but {args.command!r} was requested",
              file=sys.stderr)
        return EXIT_CONFIG
    if args.jobs < 1:
        print("config error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg, args.out, args.jobs, args.dump_jacobi)


if __name__ == "__main__":
    sys.exit(main())
