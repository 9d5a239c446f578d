"""Command-line drivers: profile, qg, ansatz-residual, converge, identities."""
from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace

import numpy as np

from . import ekman, hydrostatic, qg, spectral_ops
from .config import ExperimentConfig
from .io import write_json, write_snapshot
from .pressure import ConfigError, DomainError


def _profile(cfg):
    return hydrostatic.solve_profile(cfg.pressure_law, float(cfg.profile["rho0"]),
                                     int(cfg.profile["N3"]))


def _out(cfg, name):
    d = os.path.join(cfg.out, name)
    os.makedirs(d, exist_ok=True)
    return d


def cmd_profile(cfg, args):
    prof = _profile(cfg)
    d = _out(cfg, "profile")
    hydrostatic.export_csv(prof, os.path.join(d, "profile.csv"))
    exact = hydrostatic.closed_form(cfg.pressure_law, float(cfg.profile["rho0"]), prof.x3)
    av = hydrostatic.vertical_averages(prof)
    report = {
        "N3": prof.N3, "kappa": prof.kappa,
        "closed_form_max_error": float(np.abs(prof.rho_bar - exact).max()),
        "balance_residual": float(hydrostatic.balance_residual(prof)),
        "avg_rho": av.avg_rho, "avg_rho_over_Pprime": av.avg_rho_over_Pprime,
    }
    write_json(os.path.join(d, "profile.json"), report)
    print(f"profile: kappa={prof.kappa:.6g} closed-form error={report['closed_form_max_error']:.3e}")
    return 0


def _qg_params(cfg):
    prof = _profile(cfg)
    return qg.QGParams.from_profile(prof, float(cfg.viscosity["mu"]), L_h=float(cfg.grid["L_h"]),
                                    N_h=int(cfg.grid["N_h"]), dt=cfg.dt)


def mode_table(params, modes, t_end):
    rows = []
    for n1 in range(1, modes + 1):
        for n2 in range(0, n1 + 1):
            Q0 = qg.single_mode(params, n1, n2)
            st = qg.run(qg.initial_state(Q0, params), params, t_end)
            exact = np.exp(-qg.mode_rate(params, n1, n2) * st.t)
            num = float((st.Q * Q0).sum() / (Q0 * Q0).sum())
            rows.append({"n1": n1, "n2": n2, "t": st.t, "numeric": num, "exact": float(exact),
                         "rel_err": float(abs(num - exact) / exact)})
    return rows


def cmd_qg(cfg, args):
    params = _qg_params(cfg)
    d = _out(cfg, "qg")
    if args.modes:
        rows = mode_table(params, args.modes, cfg.t_end)
        with open(os.path.join(d, "modes.csv"), "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            for r in rows:
                w.writerow({k: repr(v) for k, v in r.items()})
        worst = max(r["rel_err"] for r in rows)
        print(f"qg modes<= {args.modes}: max relative error {worst:.3e}")
        return 0 if worst <= 1e-6 else 1
    Q0 = qg.random_field(params, cfg.seed)
    mon = qg.EnergyMonitor(params, 1)
    st = qg.initial_state(Q0, params)
    mon(st)
    st = qg.run(st, params, cfg.t_end, callback=mon)
    mon.write_csv(os.path.join(d, "energy.csv"))
    dx = params.L_h / params.N_h
    write_snapshot(os.path.join(d, "Q_final.bin"), st.Q, (dx, dx), "Q", st.t)
    growth = float(np.max(np.diff(mon.monitored), initial=0.0))
    print(f"qg: t={st.t:.4g} monitored {mon.monitored[0]:.6g} -> {mon.monitored[-1]:.6g}"
          f" (largest increase {growth:.3e})")
    return 0


def cmd_ansatz_residual(cfg, args):
    from . import ansatz
    N_h, L_h = int(cfg.grid["N_h"]), float(cfg.grid["L_h"])
    N_h = min(N_h, 32)

    def Q_fn(n, length):
        x = np.arange(n) * length / n
        X, Y = np.meshgrid(x, x, indexing="ij")
        k = 2 * np.pi / length
        return 0.3 * np.cos(k * X) + 0.2 * np.sin(k * (X + 2 * Y)) + 0.1 * np.cos(2 * k * Y)

    rows = ansatz.residual_sweep(cfg.pressure_law, float(cfg.profile["rho0"]), Q_fn,
                                 [float(e) for e in cfg.eps], N_h, L_h,
                                 float(cfg.viscosity["mu"]), float(cfg.viscosity["lam"]))
    d = _out(cfg, "ansatz")
    ansatz.write_residual_csv(rows, os.path.join(d, "residuals.csv"))
    eps = [e for e, _ in rows]
    report = {"eps": eps, "norms": [n for _, n in rows]}
    if len(eps) > 1:
        report["slope_mass_left"] = ansatz.log_slope(eps, [n["mass_left_Linf"] for _, n in rows])
        report["slope_S_bl"] = ansatz.log_slope(eps, [n["S_bl_L2"] for _, n in rows])
    write_json(os.path.join(d, "residuals.json"), report)
    for e, n in rows:
        print(f"eps={e:g}: mass_left={n['mass_left_Linf']:.3e} S_bl={n['S_bl_L2']:.3e}")
    return 0


def cmd_converge(cfg, args):
    from .entropy_diag import StudyConfig, StudyError, eps_scaling_study
    fields = set(StudyConfig.__dataclass_fields__)
    extra = set(cfg.study) - fields
    if extra:
        raise ConfigError(f"unknown study keys: {sorted(extra)}")
    sc = replace(StudyConfig(), **cfg.study)
    if args.eps:
        sc = replace(sc, eps_list=tuple(args.eps))
    if args.gamma:
        sc = replace(sc, gamma=args.gamma)
    d = _out(cfg, "converge")
    try:
        rep = eps_scaling_study(sc, progress=lambda r: print(
            f"eps={r.eps:g}: functional={r.functional_end:.4e}", flush=True))
    except StudyError as exc:
        write_json(os.path.join(d, "study_partial.json"),
                   {"error": str(exc), "partial": [vars(r) for r in exc.partial]})
        print(f"converge: aborted ({exc}); partial results flagged", file=sys.stderr)
        return 3
    rep.to_json(os.path.join(d, "study.json"))
    rep.to_csv(os.path.join(d, "study.csv"))
    print(f"converge: slope={rep.slope:.3f} monotone={rep.monotone}")
    return 0


def run_identities(seed=0):
    """Property checks of the operator identities; returns ``{name: (value, tol)}``."""
    rng = np.random.default_rng(seed)
    out = {}
    out["pumping_coefficient"] = (abs(ekman.pumping_coefficient(1.0, 1.0) - np.sqrt(2.0)), 1e-12)
    out["pumping_flux"] = (abs(ekman.pumping_flux(2.0, 1.5) + ekman.pumping_coefficient(2.0, 1.5)),
                           1e-12)
    zeta = np.linspace(0.0, 10.0, 2001)
    u0 = rng.standard_normal(2)
    worst_ode, worst_div = 0.0, 0.0
    for layer in ekman.layers(2.0, 1.5):
        worst_ode = max(worst_ode, ekman.spiral_ode_residual(layer, u0[:, None], zeta))
        worst_div = max(worst_div, ekman.divergence_residual(layer, 0.0, 1.3, zeta))
    out["spiral_ode"] = (worst_ode, 1e-12)
    out["layer_divergence"] = (worst_div, 1e-10)

    grid = spectral_ops.Grid((32, 32, 32), (2 * np.pi, 2 * np.pi, 1.0))
    p = spectral_ops.ViscosityParams(1.0, 0.1, 0.5)
    out["commutator"] = (max(spectral_ops.commutator_gap(grid, p, rng) for _ in range(3)), 1e-8)
    u = rng.standard_normal((3,) + grid.shape)
    Qu = spectral_ops.leray_Q(u, grid)
    out["leray_idempotent"] = (float(np.abs(spectral_ops.leray_Q(Qu, grid) - Qu).max()), 1e-10)
    out["leray_divfree"] = (float(np.abs(spectral_ops.divergence(
        spectral_ops.leray_P(u, grid), grid)).max()), 1e-9)
    g2 = spectral_ops.Grid((32, 32), (2 * np.pi, 2 * np.pi))
    X, Y = g2.coords()
    F = spectral_ops.helmholtz_2d(np.sin(X) * np.sin(Y), np.cos(2 * X), g2)
    out["helmholtz_curl"] = (float(np.abs(spectral_ops.curl_2d(F, g2) - np.sin(X) * np.sin(Y)).max()),
                             1e-10)
    return out


def cmd_identities(cfg, args):
    res = run_identities(cfg.seed)
    d = _out(cfg, "identities")
    write_json(os.path.join(d, "identities.json"),
               {k: {"value": float(v), "tol": t, "pass": bool(v <= t)} for k, (v, t) in res.items()})
    ok = True
    for k, (v, t) in res.items():
        flag = "PASS" if v <= t else "FAIL"
        ok &= v <= t
        print(f"{flag} {k}: {v:.3e} (tol {t:g})")
    return 0 if ok else 1


COMMANDS = {
    "profile": cmd_profile,
    "qg": cmd_qg,
    "ansatz-residual": cmd_ansatz_residual,
    "converge": cmd_converge,
    "identities": cmd_identities,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="ekmanqg", description=__doc__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--eps", type=float, nargs="+", help="eps values (override config)")
    ap.add_argument("--gamma", type=float, help="adiabatic exponent (override config)")
    ap.add_argument("--out", help="output directory (override config)")
    ap.add_argument("--seed", type=int, help="random seed (override config)")
    ap.add_argument("--modes", type=int, default=0, help="qg: single-mode table up to this index")
    return ap


def load_config(args):
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    d = cfg.to_dict()
    if args.eps:
        d["eps"] = list(args.eps)
    if args.gamma:
        d["law"] = {**d["law"], "gamma": args.gamma}
    if args.out:
        d["out"] = args.out
    if args.seed is not None:
        d["seed"] = args.seed
    return ExperimentConfig.from_dict(d)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, DomainError) as exc:
        print(f"ekmanqg: configuration error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"ekmanqg: aborted: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
