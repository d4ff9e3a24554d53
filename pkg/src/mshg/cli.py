"""Batch front end: run any pipeline stage from flags or a JSON config and
emit machine-readable results.

Exit codes: 0 success, 2 solver non-convergence, 3 invalid parameters.
Every numeric default lands in the output metadata; outputs are
reproducible bit-for-bit apart from the embedded wall_clock field.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import ddv, local_im, mshg_field, params, qt, schrodinger, shg
from .grid import RapidityGrid

__all__ = ["main", "run"]


def _fmt(x):
    """17 significant digits, round-trip exact."""
    if isinstance(x, complex):
        return {"re": _fmt(x.real), "im": _fmt(x.imag)}
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.17g}")
    if isinstance(x, (np.ndarray, list, tuple)):
        return [_fmt(v) for v in x]
    if isinstance(x, (int, np.integer)):
        return int(x)
    return x


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mshg", description=__doc__)
    ap.add_argument("command", choices=["params", "ddv", "zeros", "qfn", "tfn", "im",
                                        "ycheck", "shg", "field", "oracle", "selftest"])
    ap.add_argument("--config", help="JSON file with the same keys as the flags")
    ap.add_argument("--alpha", type=float)
    ap.add_argument("--nu", type=float)
    ap.add_argument("--k", type=float, default=0.0)
    ap.add_argument("--s", type=float)
    ap.add_argument("--r", type=float)
    ap.add_argument("--rhat", type=float)
    ap.add_argument("--grid-halfwidth", type=float, dest="grid_halfwidth")
    ap.add_argument("--grid-points", type=int, dest="grid_points", default=4096)
    ap.add_argument("--tol", type=float, default=1e-12)
    ap.add_argument("--max-iter", type=int, dest="max_iter", default=400)
    ap.add_argument("--damping", type=float, default=0.5)
    ap.add_argument("--contour-shift", type=float, dest="contour_shift")
    ap.add_argument("--n-range", dest="n_range", default="0..4",
                    help="zero index range lo..hi")
    ap.add_argument("--n-zeros", type=int, dest="n_zeros", default=160)
    ap.add_argument("--j-max", type=float, dest="j_max", default=1.5)
    ap.add_argument("--theta", type=float, default=0.0)
    ap.add_argument("--w1", type=float, default=0.5)
    ap.add_argument("--w2", type=float, default=0.0)
    ap.add_argument("--output", choices=["json", "csv"], default="json")
    ap.add_argument("--out", help="output path (default stdout)")
    return ap


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _load_config(args) -> dict:
    cfg = {}
    if args.config:
        with open(args.config) as f:
            cfg.update(json.load(f))
    # flags override the file
    for key, val in vars(args).items():
        if key in ("config", "command", "output", "out"):
            continue
        if val is not None:
            default = _parser().get_default(key)
            if key not in cfg or val != default:
                cfg[key] = val
    for key in ("alpha", "nu", "k", "s", "r", "rhat"):
        cfg.setdefault(key, None)
    return cfg


def _model(cfg) -> params.ModelParams:
    if cfg.get("alpha") is None:
        raise CliError("--alpha required for sine-side commands", 3)
    try:
        return params.derive_scales(cfg["alpha"], s=cfg.get("s"), r=cfg.get("r"),
                                    k=cfg.get("k") or 0.0)
    except ValueError as e:
        raise CliError(str(e), 3)


def _grid(cfg, p) -> RapidityGrid:
    try:
        if cfg.get("grid_halfwidth"):
            return RapidityGrid(cfg["grid_halfwidth"], cfg.get("grid_points", 4096))
        from .grid import make_grid
        return make_grid(p.r, cfg.get("grid_points", 4096))
    except ValueError as e:
        raise CliError(str(e), 3)


def _solve(cfg, p):
    try:
        return ddv.solve_ddv(p, grid=_grid(cfg, p), damping=cfg.get("damping", 0.5),
                             tol=cfg.get("tol", 1e-12), max_iter=cfg.get("max_iter", 400),
                             gamma=cfg.get("contour_shift"))
    except ddv.DdvConvergenceError as e:
        raise CliError(f"solver did not converge: {e}", 2)
    except ValueError as e:
        raise CliError(str(e), 3)


def _meta(cfg, grid=None, residual=None, t0=None) -> dict:
    meta = {"config": {k: _fmt(v) for k, v in sorted(cfg.items()) if v is not None}}
    if grid is not None:
        meta["grid"] = {"half_width": _fmt(grid.half_width), "n": grid.n,
                        "spacing": _fmt(grid.spacing)}
    if residual is not None:
        meta["residual"] = _fmt(residual)
    meta["wall_clock"] = round(time.time() - t0, 3) if t0 else None
    return meta


def _parse_range(text) -> tuple[int, int]:
    lo, _, hi = str(text).partition("..")
    return int(lo), int(hi or lo)


# ---------------------------------------------------------------------
# command handlers
# ---------------------------------------------------------------------

def _cmd_params(cfg, t0):
    if cfg.get("nu") is not None:
        q = params.shg_params(cfg["nu"], s=cfg.get("s"), rhat=cfg.get("rhat"))
        d = params.dual_map(q)
        body = {"nu": q.nu, "b2": q.b2, "s": q.s, "rhat": q.rhat,
                "dual_nu": d.nu, "dual_s": d.s}
    else:
        p = _model(cfg)
        body = {"alpha": p.alpha, "beta2": p.beta2, "k": p.k, "l": p.l,
                "s": p.s, "r": p.r, "M": p.M, "m": p.m, "R": p.R,
                "mu": p.mu, "rhat": p.rhat, "B": p.B}
    return {"params": {k: _fmt(v) for k, v in body.items()}}, _meta(cfg, t0=t0), None


def _cmd_ddv(cfg, t0):
    p = _model(cfg)
    cf = _solve(cfg, p)
    rows = [(th, e) for th, e in zip(cf.grid.nodes[::16], cf.eps[::16])]
    return ({"iterations": cf.iterations, "gamma": _fmt(cf.gamma),
             "eps": {"theta": _fmt([r[0] for r in rows]),
                     "values": _fmt([r[1] for r in rows])}},
            _meta(cfg, cf.grid, cf.residual, t0),
            [("theta", "eps")] + rows)


def _cmd_zeros(cfg, t0):
    p = _model(cfg)
    cf = _solve(cfg, p)
    lo, hi = _parse_range(cfg.get("n_range", "0..4"))
    zs = qt.find_zeros(cf, (lo, hi))
    rows = [("n", "theta_n", "E")]
    body = []
    for n in range(lo, hi + 1):
        th = zs.theta_n(n)
        e = zs.E_plus[n] if n >= 0 else 1.0 / zs.E_minus[-n - 1] * p.s ** (4 * p.alpha)
        rows.append((n, th, e))
        body.append({"n": n, "theta": _fmt(th), "E": _fmt(e)})
    return {"zeros": body}, _meta(cfg, cf.grid, cf.residual, t0), rows


def _cmd_qfn(cfg, t0):
    p = _model(cfg)
    cf = _solve(cfg, p)
    q = qt.build_q(cf, cfg.get("n_zeros", 160))
    th = cfg.get("theta", 0.0)
    lq = q.log_q(np.array([th + 0j]), +1)[0]
    return ({"S": _fmt(q.S), "eta0": _fmt(q.eta0), "log_C": _fmt(q.log_c),
             "log_q_at_theta": _fmt(lq),
             "wronskian_defect": _fmt(abs(qt.wronskian(q, np.array([0.3 + 0j]))[0]
                                          + 2j * math.sin(2 * math.pi * p.k)))},
            _meta(cfg, cf.grid, cf.residual, t0), None)


def _cmd_tfn(cfg, t0):
    p = _model(cfg)
    cf = _solve(cfg, p)
    q = qt.build_q(cf, cfg.get("n_zeros", 160))
    tf = qt.t_family(q, cfg.get("j_max", 1.5))
    th = np.linspace(-2.0, 2.0, 21)
    rows = [tuple(["theta"] + [f"T_{j}" for j in tf.j_list])]
    table = np.column_stack([tf.t(j, th.astype(complex)).real for j in tf.j_list])
    for i, t in enumerate(th):
        rows.append(tuple([t] + list(table[i])))
    return ({"j_list": tf.j_list,
             "theta": _fmt(th), "T": _fmt(table.T)},
            _meta(cfg, cf.grid, cf.residual, t0), rows)


def _cmd_im(cfg, t0):
    p = _model(cfg)
    cf = _solve(cfg, p)
    i1, i1b = local_im.quantum_local_im(cf, 1)
    try:
        g1, g1b = local_im.nonlocal_im(cf, 1)
    except ValueError:
        g1 = g1b = float("nan")
    c1 = local_im.normalize_to_sg(p.alpha, p.m, 1)
    return ({"I1": _fmt(i1), "Ibar1": _fmt(i1b), "G1": _fmt(g1), "Gbar1": _fmt(g1b),
             "C1": _fmt(c1), "I1_quantum": _fmt(i1 / c1), "Ibar1_quantum": _fmt(i1b / c1)},
            _meta(cfg, cf.grid, cf.residual, t0), None)


def _cmd_ycheck(cfg, t0):
    p = _model(cfg)
    cf = _solve(cfg, p)
    q = qt.build_q(cf, cfg.get("n_zeros", 160))
    tf = qt.t_family(q, max(cfg.get("j_max", 1.5), p.alpha / 2.0 + 1.0))
    checks = qt.functional_checks(q, tf)
    return ({"residuals": {k: _fmt(v) for k, v in checks.items()}},
            _meta(cfg, cf.grid, cf.residual, t0), None)


def _cmd_shg(cfg, t0):
    if cfg.get("nu") is None:
        raise CliError("--nu required for the shg command", 3)
    try:
        q = params.shg_params(cfg["nu"], s=cfg.get("s"), rhat=cfg.get("rhat"))
    except ValueError as e:
        raise CliError(str(e), 3)
    v = shg.solve_tba(q, tol=cfg.get("tol", 1e-12))
    qi, qib = shg.im_quantum(v, 1)
    th = np.linspace(-2.0, 2.0, 9)
    return ({"rhat": _fmt(q.rhat), "C0": _fmt(v.c0), "iterations": v.iterations,
             "C1I1_quantum": _fmt(qi), "C1Ibar1_quantum": _fmt(qib),
             "eps0": _fmt(float(v.eps[v.grid.n // 2])),
             "T_plus": _fmt(shg.t_pm(v, +1, th)),
             "T_minus": _fmt(shg.t_pm(v, -1, th))},
            _meta(cfg, v.grid, v.residual, t0), None)


def _cmd_field(cfg, t0):
    p = _model(cfg)
    cf = _solve(cfg, p)
    q = qt.build_q(cf, cfg.get("n_zeros", 160))
    tf = qt.t_family(q, 1.0)
    ker = mshg_field.FieldKernel(tf)
    w = complex(cfg.get("w1", 0.5), cfg.get("w2", 0.0))
    try:
        st = mshg_field.glm_solve(w, ker)
        ld = mshg_field.eta_logdet(w, ker)
    except ValueError as e:
        raise CliError(str(e), 3)
    fn = lambda ww: mshg_field.eta_hat(ww, ker)
    resid = mshg_field.pde_residual(fn, w, 2e-3)
    rows = [("w1", "w2", "eta_hat", "residual"),
            (w.real, w.imag, float(np.real(st.eta_hat)), resid)]
    return ({"w": {"re": _fmt(w.real), "im": _fmt(w.imag)},
             "eta_hat_glm": _fmt(st.eta_hat), "eta_hat_logdet": _fmt(ld["eta_hat"]),
             "route_difference": _fmt(abs(st.eta_hat - ld["eta_hat"])),
             "spectral_radius": _fmt(ld["spectral_radius"]),
             "d_plus": _fmt(st.d_plus), "pde_residual": _fmt(resid)},
            _meta(cfg, cf.grid, cf.residual, t0), rows)


def _cmd_oracle(cfg, t0):
    if cfg.get("alpha") is None:
        raise CliError("--alpha required", 3)
    lo, hi = _parse_range(cfg.get("n_range", "0..3"))
    l = 2.0 * (cfg.get("k") or 0.0) - 0.5
    try:
        sp = schrodinger.eigenvalues_shooting(cfg["alpha"], l, hi)
    except ValueError as e:
        raise CliError(str(e), 3)
    rows = [("n", "energy")] + [(n, e) for n, e in enumerate(sp.energies)]
    return ({"l": _fmt(l), "energies": _fmt(sp.energies)},
            _meta(cfg, t0=t0), rows)


def _cmd_selftest(cfg, t0):
    lines = []
    ok = True

    def check(name, value, tol):
        nonlocal ok
        good = value < tol
        ok = ok and good
        lines.append({"check": name, "value": _fmt(value), "tol": tol,
                      "pass": bool(good)})
        print(f"{'PASS' if good else 'FAIL'}  {name}: {value:.3e} (tol {tol:g})",
              file=sys.stderr)

    p = params.derive_scales(1.0, s=1.0, k=0.2)
    cf = ddv.solve_ddv(p)
    exact = math.pi * np.sinh(cf.grid.nodes) - 0.4 * math.pi
    check("alpha=1 closed-form counting function", float(np.max(np.abs(cf.eps - exact))), 1e-12)
    zs = qt.find_zeros(cf, (0, 0))
    check("alpha=1 ground energy", abs(zs.E_plus[0] / (1.4 + math.sqrt(1.4 ** 2 + 1)) - 1), 1e-8)

    p2 = params.derive_scales(2.0, s=0.5, k=0.1)
    cf2 = ddv.solve_ddv(p2)
    q2 = qt.build_q(cf2, 160)
    w = qt.wronskian(q2, np.linspace(-1.5, 1.5, 9))
    check("quantum Wronskian", float(np.max(np.abs(w + 2j * math.sin(0.2 * math.pi)))
                                     / abs(2 * math.sin(0.2 * math.pi))), 1e-6)
    tf = qt.t_family(q2, 2.0)
    res = qt.functional_checks(q2, tf)
    for name, val in res.items():
        check(f"functional identity: {name}", float(val), 1e-6)
    return {"checks": lines, "all_pass": bool(ok)}, _meta(cfg, t0=t0), None


_HANDLERS = {
    "params": _cmd_params, "ddv": _cmd_ddv, "zeros": _cmd_zeros, "qfn": _cmd_qfn,
    "tfn": _cmd_tfn, "im": _cmd_im, "ycheck": _cmd_ycheck, "shg": _cmd_shg,
    "field": _cmd_field, "oracle": _cmd_oracle, "selftest": _cmd_selftest,
}


def _emit(body, meta, rows, args):
    if args.output == "csv":
        if rows is None:
            raise CliError("this command has no tabular output; use --output json", 3)
        text = "\n".join(",".join(f"{v:.17g}" if isinstance(v, float) else str(v)
                                  for v in row) for row in rows) + "\n"
    else:
        text = json.dumps({"result": body, "meta": meta}, indent=1) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    t0 = time.time()
    try:
        cfg = _load_config(args)
        body, meta, rows = _HANDLERS[args.command](cfg, t0)
        _emit(body, meta, rows, args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except ddv.DdvConvergenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.command == "selftest" and not body.get("all_pass", True):
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
