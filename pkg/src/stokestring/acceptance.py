"""Acceptance suite: every exit criterion as a callable check.

Each criterion returns (passed, detail); `run_all` prints one line per
criterion and reports overall success.  Long runs are cached module-wide
so criteria can share them.  The same functions back `stokestring verify`
and tests/test_acceptance.py.
"""

import numpy as np

from . import cli as _cli
from . import diagnostics as diag
from . import dynamics as dyn
from . import geometry as geo
from . import kernels as ker
from . import spectral as sp
from . import velocity as vel
from .geometry import ForceParams

N = 256
DT = 1e-3
_cache = {}


def _alpha(n=N):
    return sp.grid_points(n)


def _preset(name, n=N, eps=0.01, k=2, seed=0):
    cfg = dyn.SimConfig(n=n, epsilon=eps, mode_k=k, seed=seed)
    return _cli.preset_state(name, cfg)


def _multi_mode_state(eps, rng, n=N):
    a = _alpha(n)
    c = rng.standard_normal(4)
    ph = rng.uniform(0, 2 * np.pi, 4)
    dev = sum(ci * np.sin((j + 2) * a + p) for j, (ci, p) in enumerate(zip(c, ph)))
    dev *= eps / np.max(np.abs(dev))
    return geo.normalize_initial_data(a + dev, np.zeros(n))


# ----------------------------------------------------------------------
# cached runs
# ----------------------------------------------------------------------

def _norm_record(state, fr, vl, bd):
    return {
        "t": state.time,
        "norm": (sp.sobolev_seminorm(state.theta_osc.samples, 2.5)
                 + sp.sobolev_seminorm(state.stretch.samples, 1.5)),
        "residual": diag.limit_circle(state, fr).residual,
        "defect": fr.defect,
    }


def decay_run(n=N, dt=DT, t_final=5.0):
    """Mixed-preset decay run; records norm, limit-circle residual, defect."""
    key = ("decay", n, dt, t_final)
    if key not in _cache:
        cfg = dyn.SimConfig(n=n, dt=dt, t_final=t_final, output_every=10,
                            preset="mixed", epsilon=0.01, mode_k=2)
        st = _preset("mixed", n=n)
        res = dyn.run_simulation(st, cfg, record_fn=_norm_record)
        if res.termination != "completed":
            raise RuntimeError(f"decay run aborted: {res.message}")
        _cache[key] = {
            "t": np.array([r["t"] for r in res.records]),
            "norm": np.array([r["norm"] for r in res.records]),
            "residual": np.array([r["residual"] for r in res.records]),
            "defect_max": max(r["defect"] for r in res.records),
            "final": res.final_state,
        }
    return _cache[key]


def energy_run(scheme, dt, t_final=0.5, n=N):
    """theta-mode run with per-step energy/dissipation/area records."""
    key = ("energy", scheme, dt, t_final, n)
    if key not in _cache:
        params = ForceParams()
        cfg = dyn.SimConfig(n=n, dt=dt, t_final=t_final, scheme=scheme,
                            output_every=1, preset="theta-mode", epsilon=0.01,
                            mode_k=2)
        st = _preset("theta-mode", n=n)

        def rec(state, fr, vl, bd):
            return {"t": state.time,
                    "energy": diag.energy(state, params, fr),
                    "dissipation": diag.dissipation_rate(state, vl, params, fr),
                    "area": geo.enclosed_area(state, fr),
                    "defect": fr.defect}

        res = dyn.run_simulation(st, cfg, record_fn=rec)
        if res.termination != "completed":
            raise RuntimeError(f"energy run aborted: {res.message}")
        _cache[key] = {k: np.array([r[k] for r in res.records])
                       for k in ("t", "energy", "dissipation", "area", "defect")}
    return _cache[key]


# ----------------------------------------------------------------------
# criteria
# ----------------------------------------------------------------------

def criterion_1():
    """Equilibrium fixed point."""
    st = _preset("equilibrium")
    v = vel.curve_velocity(st, ForceParams())
    u_inf = max(np.max(np.abs(v.u_alpha)), np.max(np.abs(v.u_s)))
    cfg = dyn.SimConfig(n=N, dt=DT, t_final=1.0, output_every=10 ** 9)
    res = dyn.run_simulation(st, cfg)
    fs = res.final_state
    moved = max(np.max(np.abs(fs.theta_osc.samples - st.theta_osc.samples)),
                abs(fs.theta_mean - st.theta_mean),
                np.max(np.abs(fs.stretch.samples - st.stretch.samples)),
                abs(fs.perim - st.perim),
                np.max(np.abs(fs.base_point - st.base_point)))
    ok = u_inf <= 1e-10 and moved < 1e-8 and res.steps == 1000
    return ok, f"|u|_inf = {u_inf:.2e}, drift after 1000 steps = {moved:.2e}"


def criterion_2():
    """Energy dissipation identity and monotonicity."""
    details, ok = [], True
    for scheme, factor in (("imex-euler", 1.8), ("imex-bdf2", 3.5)):
        resids = []
        for dt in (DT, DT / 2):
            run = energy_run(scheme, dt)
            t, e, d = run["t"], run["energy"], run["dissipation"]
            resids.append(abs(e[-1] - e[0] + np.trapezoid(d, t)) / t[-1])
            mono = bool(np.all(np.diff(e) <= 1e-10))
            ok &= mono
        gain = resids[0] / resids[1]
        ok &= gain >= factor
        details.append(f"{scheme}: residual {resids[0]:.2e}->{resids[1]:.2e} "
                       f"({gain:.2f}x, need >= {factor}), monotone = {mono}")
    return ok, "; ".join(details)


def criterion_3():
    """Area conservation under dt refinement."""
    drifts = []
    for dt in (DT, DT / 2):
        run = energy_run("imex-euler", dt, t_final=1.0)
        a = run["area"]
        drifts.append(abs(a[-1] - a[0]) / a[0])
    gain = drifts[0] / drifts[1]
    ok = drifts[0] <= 1e-5 and gain >= 1.7
    return ok, (f"relative drift {drifts[0]:.2e} at dt = {DT} "
                f"(<= 1e-5), refinement gain {gain:.2f}x (order 1)")


def criterion_4():
    """Closure defect stays below 1e-8 on every small-data run."""
    worst = 0.0
    for scheme in ("imex-euler", "imex-bdf2"):
        worst = max(worst, float(np.max(energy_run(scheme, DT)["defect"])))
    worst = max(worst, decay_run()["defect_max"])
    ok = worst <= 1e-8
    return ok, f"max closure defect across runs = {worst:.2e}"


def criterion_5():
    """Hilbert transform vs p.v. oracle; implicit factors vs semigroup."""
    a = _alpha()
    targets = a[:: N // 8]
    m = 8 * N
    h = 2 * np.pi / m
    worst_an, worst_or = 0.0, 0.0
    for k in range(1, N // 2):
        got = sp.hilbert(np.sin(k * a))
        worst_an = max(worst_an, float(np.max(np.abs(got + np.cos(k * a)))))
        for tgt, gval in zip(targets, got[:: N // 8]):
            src = tgt + h * (np.arange(m) + 0.5)
            oracle = np.sum(np.sin(k * src)
                            / (2 * np.pi * np.tan(0.5 * (tgt - src)))) * h
            worst_or = max(worst_or, abs(gval - oracle))
    ok = worst_an <= 1e-12 and worst_or <= 1e-12

    # backward-Euler semigroup error is O(dt) per unit time, per mode
    order_ok = True
    for perim in (1.0, 1.2):
        for k in (1, 2, 5):
            sym = k ** 3 / (4 * perim ** 3)
            errs = []
            for dt in (1e-3, 5e-4):
                steps = round(1.0 / dt)
                errs.append(abs(sp.implicit_factor(N, dt, "bending", perim)[k]
                                ** steps - np.exp(-sym)))
            ratio = errs[0] / errs[1]
            order_ok &= 1.6 <= ratio <= 2.4
    ok &= order_ok
    return ok, (f"max |H(sin ka) + cos ka| = {worst_an:.2e}, vs oracle "
                f"{worst_or:.2e}, semigroup first order = {order_ok}")


def criterion_6():
    """Rotation/translation invariance on random admissible states."""
    rng = np.random.default_rng(2024)
    worst = 0.0
    for trial in range(20):
        eps = float(rng.uniform(0.005, 0.05))
        st = _preset("random", eps=eps, seed=trial)
        params = ForceParams(lam=float(rng.uniform(0, 0.5)))
        v0 = vel.curve_velocity(st, params)
        shift = st.with_(theta_mean=st.theta_mean + float(rng.uniform(0.1, 3.0)),
                         base_point=st.base_point + rng.standard_normal(2))
        v1 = vel.curve_velocity(shift, params)
        worst = max(worst,
                    float(np.max(np.abs(v0.u_dot_n - v1.u_dot_n))),
                    float(np.max(np.abs(v0.u_dot_t - v1.u_dot_t))))
    ok = worst <= 1e-10
    return ok, f"max change of (u.n, u.t) over 20 states = {worst:.2e}"


def criterion_7():
    """Linearized velocity: O(eps^2) remainder and the two printed forms."""
    ratios = {}
    for mode in ("theta", "y"):
        vals = []
        for eps in (1e-1, 1e-2, 1e-3):
            if mode == "theta":
                st = _preset("theta-mode", eps=eps)
            else:
                st = _preset("y-mode", eps=eps)
            vals.append(diag.linearization_error(st, ForceParams()) / eps ** 2)
        ratios[mode] = max(vals) / min(vals)
    dev = 0.02 * np.sin(2 * _alpha()) + 0.01 * np.cos(3 * _alpha()) + 0.004
    y_al = 0.01 * np.sin(3 * _alpha()) - 0.005 * np.cos(2 * _alpha())
    gap = 0.0
    for lam, s in ((0.0, 1.0), (0.5, 1.05)):
        v1 = diag.linearized_velocity(dev, y_al, s, lam)
        v2 = diag.linearized_velocity_modesum(dev, y_al, s, lam)
        gap = max(gap, float(np.max(np.abs(v1 - v2))))
    ok = max(ratios.values()) <= 3.0 and gap <= 1e-12
    return ok, (f"remainder/eps^2 spread: theta {ratios['theta']:.2f}x, "
                f"y {ratios['y']:.2f}x (<= 3); form gap {gap:.2e}")


def criterion_8():
    """Exponential convergence of the mixed preset.

    The residual threshold is currently unattained and reported honestly:
    the slowest linear branch is the stretching mode k = 2 with decay rate
    |k|/4 = 1/2, so the h^{5/2} distance to the limit circle at T = 5 is
    about 0.12 * e^{-2.5} ~ 8e-3; reaching 1e-4 would need T ~ 14.
    """
    base = decay_run(N, DT)
    window = (2.5, 5.0)
    gamma0, r2 = diag.decay_fit(base["t"], base["norm"], window)
    gamma_dt, _ = diag.decay_fit(*[decay_run(N, DT / 2)[k] for k in ("t", "norm")],
                                 window)
    gamma_n, _ = diag.decay_fit(*[decay_run(2 * N, DT)[k] for k in ("t", "norm")],
                                window)
    drift_dt = abs(gamma_dt - gamma0) / gamma0
    drift_n = abs(gamma_n - gamma0) / gamma0
    resid = base["residual"]
    decaying = resid[-1] < resid[resid.size // 2]
    ok = (r2 >= 0.99 and drift_dt <= 0.05 and drift_n <= 0.05
          and resid[-1] <= 1e-4 and decaying)
    return ok, (f"gamma = {gamma0:.4f} (r2 = {r2:.4f}), dt-half drift "
                f"{100 * drift_dt:.2f}%, n-double drift {100 * drift_n:.2f}%, "
                f"final residual {resid[-1]:.2e} (decaying = {decaying})")


def criterion_9():
    """Isoperimetric suite: Gage, Fuglede, perimeter gap, first mode."""
    rep0 = diag.isoperimetric_checks(_preset("equilibrium"))
    gage_circle = abs(rep0.gage_value - np.pi) <= 1e-12
    rng = np.random.default_rng(7)

    gage_ok, fuglede = True, {0.05: [], 0.01: []}
    for eps in fuglede:
        for _ in range(8):
            st = _multi_mode_state(eps, rng)
            rep = diag.isoperimetric_checks(st)
            if rep.gage_applicable:
                gage_ok &= rep.gage_value >= np.pi - 1e-8
            fuglede[eps].append(rep.fuglede_ratio)
    finite = all(np.isfinite(r) for rs in fuglede.values() for r in rs)
    cs = {eps: max(max(r, 1 / r) for r in rs) for eps, rs in fuglede.items()}
    window_ok = finite and all(
        1 / (1.5 * cs[a]) <= r <= 1.5 * cs[a]
        for a, b in ((0.05, 0.01), (0.01, 0.05)) for r in fuglede[b])

    gap_ok = True
    for trial in range(100):
        eps = float(rng.uniform(0.0, 0.05))
        k = int(rng.integers(1, 5))
        ph = float(rng.uniform(0, 2 * np.pi))
        a = _alpha()
        st = geo.normalize_initial_data(a + eps * np.sin(k * a + ph), np.zeros(N))
        rep = diag.isoperimetric_checks(st)
        gap_ok &= rep.perimeter_gap <= rep.perimeter_gap_bound + 1e-12

    firsts = []
    for eps in (0.1, 0.01, 0.001):
        vals = [diag.isoperimetric_checks(_multi_mode_state(eps, rng)).first_mode_ratio
                for _ in range(6)]
        firsts.append(max(vals))
    first_ok = max(firsts) <= 2.0 * min(firsts)

    ok = gage_circle and gage_ok and window_ok and gap_ok and first_ok
    return ok, (f"Gage circle equality = {gage_circle}, convex bound = {gage_ok}, "
                f"Fuglede window C = {cs[0.05]:.2f}/{cs[0.01]:.2f} stable = "
                f"{window_ok}, perimeter gap 100/100 = {gap_ok}, first-mode C "
                f"spread {max(firsts) / min(firsts):.2f}x (<= 2)")


def _pde_residuals(x, h):
    """max |-lap G + grad Q| and max |div G| columnwise, centered stencils."""
    def col(v, j):
        G, _ = ker.fundamental_solution(v)
        return G[..., :, j]

    e1, e2 = np.eye(2)
    worst_pde, worst_div = 0.0, 0.0
    for j in range(2):
        lap = (col(x + h * e1, j) + col(x - h * e1, j) + col(x + h * e2, j)
               + col(x - h * e2, j) - 4 * col(x, j)) / h ** 2
        q = [ker.fundamental_solution(x + s * h * e)[1][..., j]
             for e in (e1, e2) for s in (1, -1)]
        grad_q = np.stack([(q[0] - q[1]) / (2 * h), (q[2] - q[3]) / (2 * h)], -1)
        div = ((col(x + h * e1, j)[..., 0] - col(x - h * e1, j)[..., 0])
               + (col(x + h * e2, j)[..., 1] - col(x - h * e2, j)[..., 1])) / (2 * h)
        worst_pde = max(worst_pde, float(np.max(np.abs(-lap + grad_q))))
        worst_div = max(worst_div, float(np.max(np.abs(div))))
    return worst_pde, worst_div


def criterion_10():
    """Kernel correctness: PDE residuals, divided differences, diagonal."""
    rng = np.random.default_rng(11)
    x = rng.uniform(0.5, 2.0, (15, 2)) * np.sign(rng.standard_normal((15, 2)))
    p1, d1 = _pde_residuals(x, 1e-3)
    p2, d2 = _pde_residuals(x, 5e-4)
    pde_ok = p2 < p1 / 3.0 + 1e-9 and d2 < d1 / 3.0 + 1e-9

    st = _preset("mixed", eps=0.03, k=2)
    fr = geo.reconstruct_curve(st)
    worst_dd = 0.0
    for coord, z1 in (("alpha", fr.z1), ("s", fr.X1)):
        dd = ker.divided_differences(fr, coord)
        recon = dd.L + dd.tau[:, :, None] * (dd.M - dd.N)
        worst_dd = max(worst_dd, float(np.max(np.abs(recon - z1[None, :, :])))
                       / max(1.0, float(np.max(np.abs(z1)))))
    dd_ok = worst_dd <= 1e-10

    table = ker.remainder_kernel(fr)
    worst_diag = 0.0
    for i in range(0, N, 37):
        vals = {o: table[i, (i + o) % N] for o in (-2, -1, 1, 2)}
        extrap = (2.0 / 3.0) * (vals[1] + vals[-1]) \
            - (1.0 / 6.0) * (vals[2] + vals[-2])
        worst_diag = max(worst_diag, float(np.max(np.abs(extrap - table[i, i]))))
    diag_ok = worst_diag <= 1e-6

    ok = pde_ok and dd_ok and diag_ok
    return ok, (f"PDE residual {p1:.1e}->{p2:.1e}, div {d1:.1e}->{d2:.1e} "
                f"(both O(h^2)); divided-difference identity {worst_dd:.1e}; "
                f"diagonal vs extrapolation {worst_diag:.1e}")


def criterion_11():
    """Force sanity: equilibrium value and zero net force."""
    st = _preset("equilibrium")
    fr = geo.reconstruct_curve(st)
    fd = vel.force_density(st, ForceParams(), fr)
    eq_gap = float(np.max(np.abs(fd.F - 0.5 * fr.nor_a)))
    worst_net = 0.0
    rng = np.random.default_rng(5)
    for trial in range(10):
        stt = _preset("random", eps=float(rng.uniform(0.01, 0.05)), seed=trial)
        params = ForceParams(c1=float(rng.uniform(0.5, 2)),
                             c3=float(rng.uniform(0.5, 2)),
                             lam=float(rng.uniform(0, 1)),
                             B=float(rng.uniform(0, 0.5)),
                             s_op=float(rng.uniform(0, 0.5)))
        f = vel.force_density(stt, params)
        worst_net = max(worst_net, float(np.max(np.abs(f.F.mean(axis=0))))
                        * 2 * np.pi)
    ok = eq_gap <= 1e-12 and worst_net <= 1e-10
    return ok, (f"equilibrium |F - n/2| = {eq_gap:.2e}, max |int F ds| = "
                f"{worst_net:.2e}")


def criterion_12():
    """Two-path consistency of the decomposed right-hand sides."""
    st = _preset("mixed", eps=0.01, k=3)
    params = ForceParams()
    fr, v, bundle = dyn.evaluate_rhs(st, params)
    lead, _ = vel.theta_rhs_terms(st, params, fr)
    path1 = lead / st.perim + bundle.g_theta
    du = np.stack([sp.derivative(v.u_alpha[:, 0]),
                   sp.derivative(v.u_alpha[:, 1])], -1)
    raw = (np.sum(du * fr.nor_a, -1) + (v.T - v.u_dot_t) * fr.ta) / st.perim
    gap_theta = float(np.max(np.abs(path1 - (raw - raw.mean()))))

    path1y = -0.25 * sp.hilbert(fr.yss) + bundle.g_y
    ut_s = np.sum(v.u_s * fr.tan_s, -1)
    rawy = sp.derivative(ut_s - sp.eval_series(v.T, fr.alpha_at_s)) / st.perim
    gap_y = float(np.max(np.abs(path1y - (rawy - rawy.mean()))))
    ok = gap_theta <= 1e-7 and gap_y <= 1e-7
    return ok, f"theta path gap = {gap_theta:.2e}, y path gap = {gap_y:.2e}"


CRITERIA = [
    (1, "equilibrium fixed point", criterion_1),
    (2, "energy dissipation identity", criterion_2),
    (3, "area conservation", criterion_3),
    (4, "closed-string preservation", criterion_4),
    (5, "Hilbert transform and implicit solver", criterion_5),
    (6, "rotation/translation invariance", criterion_6),
    (7, "velocity linearization", criterion_7),
    (8, "exponential convergence", criterion_8),
    (9, "isoperimetric suite", criterion_9),
    (10, "kernel correctness", criterion_10),
    (11, "force sanity", criterion_11),
    (12, "two-path consistency", criterion_12),
]


def run_all(fast: bool = False) -> bool:
    """Run every criterion, print one pass/fail line each.

    fast=True skips the criteria that need minutes of time stepping
    (2, 3, 4, 8 report SKIP and do not count as failures); the full suite
    is the normative gate.
    """
    all_ok = True
    for number, name, fn in CRITERIA:
        if fast and number in (2, 3, 4, 8):
            print(f"[SKIP] criterion {number:2d} ({name}): long run")
            continue
        try:
            ok, detail = fn()
        except Exception as exc:   # surface, do not hide
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok &= ok
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} "
              f"({name}): {detail}")
    return all_ok
