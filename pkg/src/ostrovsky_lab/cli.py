"""Batch front-end: ``ostrovsky-lab {simulate,audit,sweep,compare}``.

Exit codes: 0 success, 1 usage/config/data error, 2 numerical failure
(blow-up, failed audit or failed sweep acceptance).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from .convergence import SweepConfig, Window, compare_trajectories, run_sweep
from .errors import BlowUp, ConfigError, OstrovskyError
from .estimates import AuditReport, audit_limit, audit_regularized
from .io import read_trajectory, write_json, write_trajectory
from .limit import fv_simulate
from .nonlocal_terms import make_initial_data, profile_samples
from .regularized import Coupling, RegParams, simulate
from .spectral import make_grid

log = logging.getLogger("ostrovsky_lab")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
TWO_PI = 2.0 * math.pi


@dataclass
class RunConfig:
    """One JSON document describing a run or a sweep (all quantities dimensionless)."""

    kind: str = "regularized"          # regularized | limit
    n: int = 256
    L: float = TWO_PI
    profile: str = "sine"
    eps: Optional[float] = None
    beta: Optional[float] = None
    coupling: Optional[dict] = None    # {"c": .., "p": ..}; beta = c * eps**p
    gamma: float = 1.0
    T: float = 1.0
    save_every: Optional[float] = None
    safety: float = 0.4
    dealias: bool = True
    scheme: str = "rusanov"
    mollifier_width: float = 0.4
    eps_list: Optional[list] = None
    reference: str = "self"
    window: Optional[list] = None
    min_ratio: float = 1.2
    out: Optional[str] = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known - {"comment"})
        if unknown:
            raise ConfigError(f"unknown field(s): {', '.join(unknown)}")
        return cls(**{k: v for k, v in d.items() if k in known})

    def _need(self, name, ok, why):
        if not ok:
            raise ConfigError(f"field {name!r}: {why} (got {getattr(self, name)!r})")

    def validate(self, sweep: bool = False):
        num = (int, float)
        self._need("kind", self.kind in ("regularized", "limit"), "must be 'regularized' or 'limit'")
        self._need("n", isinstance(self.n, int) and self.n >= 8 and self.n % 2 == 0, "even integer >= 8")
        self._need("L", isinstance(self.L, num) and self.L > 0, "positive number")
        self._need("T", isinstance(self.T, num) and self.T > 0, "positive number")
        self._need("gamma", isinstance(self.gamma, num), "number")
        self._need("safety", isinstance(self.safety, num) and 0 < self.safety <= 1, "in (0, 1]")
        self._need("save_every", self.save_every is None or (isinstance(self.save_every, num)
                                                             and self.save_every > 0), "positive number")
        self._need("profile", isinstance(self.profile, str), "profile string")
        self._need("scheme", self.scheme in ("rusanov", "central"), "'rusanov' or 'central'")
        self._need("reference", self.reference in ("self", "limit"), "'self' or 'limit'")
        if self.coupling is not None:
            ok = isinstance(self.coupling, dict) and set(self.coupling) == {"c", "p"} and all(
                isinstance(v, num) for v in self.coupling.values())
            self._need("coupling", ok, "object with numeric 'c' and 'p'")
            try:
                Coupling(self.coupling["c"], self.coupling["p"])
            except ValueError as exc:
                raise ConfigError(f"field 'coupling': {exc}") from exc
        if self.window is not None:
            self._need("window", isinstance(self.window, list) and len(self.window) in (2, 4)
                       and all(isinstance(v, num) for v in self.window), "[t0, t1] or [t0, t1, x0, x1]")
        if self.eps_list is not None:
            ok = isinstance(self.eps_list, list) and self.eps_list and all(
                isinstance(e, num) and e > 0 for e in self.eps_list) and all(
                b < a for a, b in zip(self.eps_list, self.eps_list[1:]))
            self._need("eps_list", ok, "non-empty strictly decreasing list of positive numbers")
        if sweep:
            self._need("eps_list", self.eps_list is not None, "required for a sweep")
            self._need("coupling", self.coupling is not None, "required for a sweep")
        elif self.kind == "regularized":
            self._need("eps", isinstance(self.eps, num) and self.eps >= 0, "non-negative number")
            self._need("beta", self.beta is None or (isinstance(self.beta, num) and self.beta >= 0),
                       "non-negative number")
            self._need("beta", self.beta is not None or self.coupling is not None,
                       "give beta or coupling")

    def grid(self):
        return make_grid(self.n, float(self.L))

    def params(self) -> RegParams:
        if self.coupling is not None:
            return RegParams.coupled(float(self.eps), self.coupling["c"], self.coupling["p"], float(self.gamma))
        return RegParams(float(self.eps), float(self.beta), float(self.gamma))

    def sweep_config(self) -> SweepConfig:
        w = None
        if self.window is not None:
            w = Window(*self.window) if len(self.window) == 4 else Window(self.window[0], self.window[1])
        try:
            return SweepConfig(tuple(self.eps_list), Coupling(self.coupling["c"], self.coupling["p"]),
                               float(self.gamma), float(self.T), self.grid(), self.profile, self.reference,
                               self.save_every, float(self.safety), w, float(self.min_ratio), self.dealias)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path, sweep: bool = False) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        cfg = RunConfig.from_dict(data)
        cfg.validate(sweep=sweep)
    except ConfigError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    except TypeError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    return cfg


def _out_dir(args, cfg: Optional[RunConfig], default: str) -> Path:
    out = args.out or (cfg.out if cfg is not None else None) or default
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _report_exit(report: AuditReport) -> int:
    if report.passed:
        return EXIT_OK
    print("audit failed: " + ", ".join(report.failures()), file=sys.stderr)
    return EXIT_NUMERIC


def _audit_trajectory(traj, mollifier_width=0.4) -> AuditReport:
    if traj.kind == "limit":
        return audit_limit(traj, float(traj.meta.get("gamma", 0.0)), mollifier_width)
    if traj.params is None:
        raise ConfigError("regularized trajectory without parameters in meta.json")
    return audit_regularized(traj, traj.params)


# -- subcommands ---------------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    grid = cfg.grid()
    if cfg.kind == "limit":
        u0 = profile_samples(cfg.profile, grid)
        traj = fv_simulate(u0 - u0.mean(), float(cfg.gamma), float(cfg.T), cfg.save_every, grid=grid,
                           safety=float(cfg.safety), scheme=cfg.scheme)
    else:
        prm = cfg.params()
        init = make_initial_data(cfg.profile, grid, prm.eps, prm.beta)
        traj = simulate(init, prm, float(cfg.T), cfg.save_every, float(cfg.safety), dealias=cfg.dealias)
    out = _out_dir(args, cfg, "run")
    write_trajectory(out, traj)
    report = _audit_trajectory(traj, cfg.mollifier_width)
    write_json(out / "audit.json", report.to_dict())
    log.info("wrote %s (%d saves)", out, len(traj.times))
    print(json.dumps({k: v["pass"] for k, v in report.to_dict()["checks"].items()}, sort_keys=True))
    return EXIT_OK


def cmd_audit(args) -> int:
    traj = read_trajectory(args.trajectory)
    report = _audit_trajectory(traj, args.mollifier_width)
    out = Path(args.out) if args.out else Path(args.trajectory)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "audit.json", report.to_dict())
    for tag, c in report.checks.items():
        print(f"{tag:14s} {'pass' if c['pass'] else 'FAIL'}  value={c['value']!r} tol={c['tol']!r}")
    return _report_exit(report)


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, sweep=True)
    scfg = cfg.sweep_config()
    table = run_sweep(scfg, threads=max(1, args.threads))
    out = _out_dir(args, cfg, "sweep")
    table.write_csv(out / "table.csv")
    table.write_json(out / "table.json")
    table.write_plot_files(out)
    for r in table.rows:
        if r.blew_up:
            print(f"eps={r.eps:<10g} BLOW-UP at t={r.blowup_time}")
        else:
            print(f"eps={r.eps:<10g} err_u_l1={r.err('u_l1'):.4e} err_P_linf={r.err('P_linf'):.4e}")
    print(f"regime={table.regime} regime_ok={table.regime_ok} monotone_ok={table.monotone_ok()}")
    if table.n_blown_up * 2 > len(table.rows):
        print("more than half of the rows blew up", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK if table.monotone_ok() else EXIT_NUMERIC


def cmd_compare(args) -> int:
    a = read_trajectory(args.a)
    b = read_trajectory(args.b)
    if args.window:
        w = Window(*args.window) if len(args.window) == 4 else Window(args.window[0], args.window[1])
    else:
        T = float(min(a.times[-1], b.times[-1]))
        w = Window(0.1 * T, T)
    errs = compare_trajectories(a, b, w)
    doc = {"a": str(args.a), "b": str(args.b), "window": [w.t0, w.t1, w.x0, w.x1], "errors": errs}
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        write_json(d / "compare.json", doc)
    print(json.dumps(doc, indent=1, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ostrovsky-lab", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=1, help="worker threads for sweep rows")
    p.add_argument("--seed", type=int, default=None, help="reserved; all computation is deterministic")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one regularized or limit simulation and audit it")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("audit", help="audit a saved trajectory directory")
    s.add_argument("trajectory")
    s.add_argument("--out")
    s.add_argument("--mollifier-width", type=float, default=0.4)
    s.set_defaults(func=cmd_audit)

    s = sub.add_parser("sweep", help="run an eps-sweep and write the convergence table")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("compare", help="errors between two saved trajectories")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--window", type=float, nargs="+", metavar="V")
    s.add_argument("--out")
    s.set_defaults(func=cmd_compare)

    for name in ("simulate", "audit", "sweep", "compare"):
        sp = sub.choices[name]
        sp.add_argument("--threads", type=int, default=argparse.SUPPRESS)
        sp.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if getattr(args, "window", None) is not None and len(args.window) not in (2, 4):
        print("error: --window takes 2 or 4 values", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except BlowUp as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OstrovskyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
