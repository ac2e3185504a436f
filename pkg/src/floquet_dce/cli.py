"""Command-line interface: roots, sweep, phenom, perturb, modes, oracle,
scenario, selfcheck.

A JSON config file supplies RunConfig fields; command-line flags override
file values.  Exit codes: 0 success, 2 solver warnings (empty result sets,
failed expectations), 1 usage/config errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dispersion import SheetPair, solve_roots
from .model import ModelParams, check_rotating_frame_validity, reduce_params
from .modes import export_mode
from .perturbation import NearDegenerateError, perturb_creation, perturb_window_report
from .phenom import PhenomParams, phenom_bifurcation_edges, phenom_eigenvalues, phenom_stationary
from .selfenergy import Sheet
from .sweep import dedupe_critical, emit_sweep_csv, exceptional_candidates, find_exceptional, \
    find_stationary, sweep_branches
from . import bandoracle, scenarios

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_WARN = 2


def max_workers() -> int:
    """Parallelism cap from FLOQUET_DCE_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("FLOQUET_DCE_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class RunConfig:
    omega0: float = 1.0
    Omega: float = 2.0
    f0: float = 0.2
    theta: float = 0.0
    omegaB: float = 1.0
    B: float = 1.0
    g: float = 1.0 / math.pi
    grid_start: float = 0.0
    grid_stop: float = 1.5
    grid_count: int = 1500
    sheet_plus: str = "II"
    sheet_minus: str = "II"
    newton_tol: float = 1e-12
    stationary_tol: float = 1e-9
    dedup_tol: float = 1e-8
    oracle_n: int = 400
    t_end: float = 25.0
    out: str = "out"
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.grid_count < 2:
            raise ValueError("grid-count must be >= 2")
        for name in ("newton_tol", "stationary_tol", "dedup_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name.replace('_', '-')} must be > 0")
        if self.sheet_plus not in ("I", "II") or self.sheet_minus not in ("I", "II"):
            raise ValueError("sheets must be 'I' or 'II'")

    def model(self) -> ModelParams:
        return ModelParams(self.omega0, self.Omega, self.f0, self.theta,
                           self.omegaB, self.B, self.g)

    def sheets(self) -> SheetPair:
        return SheetPair(Sheet(self.sheet_plus), Sheet(self.sheet_minus))

    def grid(self) -> np.ndarray:
        return np.linspace(self.grid_start, self.grid_stop, self.grid_count)


_FLAG_FIELDS = [
    ("omega0", float), ("Omega", float), ("f0", float), ("theta", float),
    ("omegaB", float), ("B", float), ("g", float),
    ("grid-start", float), ("grid-stop", float), ("grid-count", int),
    ("sheet-plus", str), ("sheet-minus", str),
    ("newton-tol", float), ("stationary-tol", float), ("dedup-tol", float),
    ("oracle-n", int), ("t-end", float), ("out", str),
]


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; flags override its values")
    for name, typ in _FLAG_FIELDS:
        p.add_argument(f"--{name}", type=typ, default=None)


def _load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        data = json.loads(Path(args.config).read_text())
        for key, val in data.items():
            attr = key.replace("-", "_")
            if hasattr(cfg, attr) and attr != "extra":
                setattr(cfg, attr, type(getattr(cfg, attr))(val))
            else:
                cfg.extra[key] = val
    for name, _typ in _FLAG_FIELDS:
        attr = name.replace("-", "_")
        val = getattr(args, attr, None)
        if val is not None:
            setattr(cfg, attr, val)
    cfg.validate()
    return cfg


def _emit_json(payload: dict, path: Path | None):
    text = json.dumps(payload, indent=1, default=str)
    if path is None:
        print(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        print(f"wrote {path}")


def cmd_roots(cfg: RunConfig) -> int:
    params = cfg.model()
    rp = reduce_params(params)
    validity = check_rotating_frame_validity(params)
    roots = solve_roots(rp, cfg.sheets(), tol=cfg.newton_tol,
                        dedup_tol=cfg.dedup_tol, stationary_tol=cfg.stationary_tol)
    payload = {
        "reduced": {"omega0p": rp.omega0p, "omegaBp": rp.omegaBp, "f0": rp.f0, "g": rp.g},
        "sheets": str(cfg.sheets()),
        "frame_check": {"ratio": validity.ratio, "ok": validity.ok},
        "roots": [r.to_dict() for r in roots],
    }
    _emit_json(payload, Path(cfg.out) / "roots.json")
    if not validity.ok:
        print(validity.message, file=sys.stderr)
    return EXIT_OK if roots else EXIT_WARN


def cmd_sweep(cfg: RunConfig) -> int:
    rp = reduce_params(cfg.model())
    grid = cfg.grid()
    branches = sweep_branches(rp, grid, cfg.sheets(), tol=cfg.newton_tol,
                              dedup_tol=cfg.dedup_tol)
    crit = []
    for b in branches:
        crit += find_stationary(rp, b)
    for bracket, guess in exceptional_candidates(branches, float(grid[1] - grid[0]), rp):
        cp = find_exceptional(rp, cfg.sheets(), bracket, guess)
        if cp is not None:
            crit.append(cp)
    crit = dedupe_critical(crit)
    sweep_path, crit_path = emit_sweep_csv(branches, crit, cfg.out, "sweep")
    print(f"wrote {sweep_path}\nwrote {crit_path}")
    return EXIT_OK if branches else EXIT_WARN


def cmd_phenom(cfg: RunConfig) -> int:
    gamma = cfg.extra.get("gamma", 1.0 / math.pi)
    rows = []
    for om in cfg.grid():
        zm, zp = phenom_eigenvalues(PhenomParams(float(om), cfg.f0, gamma))
        rows.append((float(om), zm, zp))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "phenom_sweep.csv"
    with open(path, "w") as fh:
        fh.write("omega0_prime,branch_id,re_z,im_z,sheet_plus,sheet_minus,residual\n")
        for om, zm, zp in rows:
            for bid, z in ((0, zm), (1, zp)):
                fh.write(f"{om:.17g},{bid},{z.real:.17g},{z.imag:.17g},NA,NA,0\n")
    crit_path = out / "phenom_critical.csv"
    with open(crit_path, "w") as fh:
        fh.write("kind,omega0_prime,re_z,im_z,branches\n")
        for om in phenom_bifurcation_edges(cfg.f0, gamma):
            fh.write(f"exceptional,{om:.17g},0,{gamma/2:.17g},0;1\n")
        for om in phenom_stationary(cfg.f0, gamma):
            fh.write(f"stationary,{om:.17g},0,0,0\n")
    print(f"wrote {path}\nwrote {crit_path}")
    return EXIT_OK


def cmd_perturb(cfg: RunConfig) -> int:
    rp = reduce_params(cfg.model())
    try:
        res = perturb_creation(rp)
    except NearDegenerateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_WARN
    payload = {
        "zbar2": [res.zbar2.real, res.zbar2.imag],
        "R": res.R,
        "im_dissipation": res.im_dissipation,
        "im_multimode": res.im_multimode,
    }
    if rp.omegaBp <= 0:
        payload["window"] = perturb_window_report(rp).value
    _emit_json(payload, Path(cfg.out) / "perturb.json")
    return EXIT_OK


def cmd_modes(cfg: RunConfig) -> int:
    rp = reduce_params(cfg.model())
    roots = solve_roots(rp, cfg.sheets(), tol=cfg.newton_tol)
    if not roots:
        print("no roots found; nothing to export", file=sys.stderr)
        return EXIT_WARN
    kgrid = (np.arange(1, 402) - 0.5) * math.pi / 401
    paths = []
    for i, root in enumerate(roots):
        path = Path(cfg.out) / f"mode_{i}.json"
        export_mode(root, rp, kgrid, path)
        paths.append(str(path))
    print("\n".join(f"wrote {p}" for p in paths))
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, compare: bool) -> int:
    params = cfg.model()
    rp = reduce_params(params)
    out = Path(cfg.out)
    if compare:
        roots = solve_roots(rp, cfg.sheets(), tol=cfg.newton_tol)
        if not roots:
            print("no effective-solver roots to compare", file=sys.stderr)
            return EXIT_WARN
        report = bandoracle.compare_with_effective(
            rp, roots, N_values=(cfg.oracle_n // 4, cfg.oracle_n // 2, cfg.oracle_n))
        _emit_json(report, out / "oracle_compare.json")
        worst = max(c["distance"] for c in report["per_N"][str(cfg.oracle_n)])
        return EXIT_OK if worst < 0.05 else EXIT_WARN
    band = bandoracle.band_for(rp, cfg.oracle_n)
    L = bandoracle.build_restricted_floquet_matrix(rp, band)
    ev = bandoracle.diagonalize_restricted(L)
    payload = {
        "N": cfg.oracle_n,
        "symplectic_residual": bandoracle.symplectic_residual(L),
        "pairing_residual": bandoracle.pairing_residual(ev),
        "eigenvalues": [[z.real, z.imag] for z in ev],
    }
    _emit_json(payload, out / "oracle_spectrum.json")
    return EXIT_OK


def cmd_scenario(cfg: RunConfig, name: str, list_only: bool) -> int:
    if list_only:
        _emit_json({"scenarios": scenarios.list_scenarios()}, None)
        return EXIT_OK
    try:
        report = scenarios.run_scenario(name, cfg.out)
    except scenarios.UnknownScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    ok = all(c["pass"] for c in report["checks"])
    for c in report["checks"]:
        tag = "PASS" if c["pass"] else "FAIL"
        print(f"[{tag}] {report['scenario']}: {c['descriptor']['name']} "
              f"expected {c['expected']} measured {c['measured']}")
    return EXIT_OK if ok else EXIT_WARN


def cmd_selfcheck(cfg: RunConfig) -> int:
    """Fast invariant suite over the core identities."""
    import cmath
    from .selfenergy import sigma as sg
    g = cfg.g
    pts = [0.3 + 0.5j, -1.4 + 0.2j, 2.0 + 0.0j, 0.1 - 0.7j, -2.5 - 0.3j]
    checks = []
    sum_err = max(abs(sg(z, g, Sheet.I) + sg(z, g, Sheet.II) - 2 * g * g * z) for z in pts)
    checks.append(("self-energy sum rule", sum_err, 1e-12))
    prod_err = max(abs(sg(z, g, Sheet.I) * sg(z, g, Sheet.II) - g ** 4) for z in pts)
    checks.append(("self-energy product rule", prod_err, 1e-12))
    refl_err = max(abs(sg(-z, g, Sheet.I) + sg(z, g, Sheet.I)) for z in pts)
    checks.append(("self-energy reflection (odd)", refl_err, 1e-12))
    rp = reduce_params(cfg.model())
    band = bandoracle.band_for(rp, 64)
    L = bandoracle.build_restricted_floquet_matrix(rp, band)
    checks.append(("symplectic symmetry residual", bandoracle.symplectic_residual(L), 1e-14))
    ev = bandoracle.diagonalize_restricted(L)
    checks.append(("restricted spectrum +- pairing", bandoracle.pairing_residual(ev), 1e-8))
    ok = True
    for name, err, tol in checks:
        state = "PASS" if err <= tol else "FAIL"
        ok &= err <= tol
        print(f"[{state}] {name}: {err:.3e} (tol {tol:.0e})")
    return EXIT_OK if ok else EXIT_WARN


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="floquet-dce",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("roots", "sweep", "phenom", "perturb", "modes", "selfcheck"):
        p = sub.add_parser(name)
        _add_config_flags(p)
    p = sub.add_parser("oracle")
    _add_config_flags(p)
    p.add_argument("--compare", action="store_true",
                   help="match effective-solver roots against the discretized spectrum")
    p = sub.add_parser("scenario")
    _add_config_flags(p)
    p.add_argument("name", nargs="?", default="")
    p.add_argument("--list", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = _load_config(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cmd = args.command
    if cmd == "roots":
        return cmd_roots(cfg)
    if cmd == "sweep":
        return cmd_sweep(cfg)
    if cmd == "phenom":
        return cmd_phenom(cfg)
    if cmd == "perturb":
        return cmd_perturb(cfg)
    if cmd == "modes":
        return cmd_modes(cfg)
    if cmd == "oracle":
        return cmd_oracle(cfg, args.compare)
    if cmd == "scenario":
        if not args.list and not args.name:
            print("usage error: scenario requires a name or --list", file=sys.stderr)
            return EXIT_USAGE
        return cmd_scenario(cfg, args.name, args.list)
    if cmd == "selfcheck":
        return cmd_selfcheck(cfg)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
