"""Acceptance sweep: twelve contract checks, one test and one verdict each.

Every test prints a single ``criterion NN: PASS/FAIL`` line carrying the
measured quantity that drives the verdict, then asserts on it.  Budgeted
checks also enforce their wall-clock limits.
"""

import math
import time

import numpy as np
import pytest

import conefrac as cf
from conefrac import DEFAULT_CONFIG
from conefrac.cli import main as cli_main

S = 0.5


def _report(num: int, ok: bool, detail: str) -> None:
    print("criterion %02d: %s  %s" % (num, "PASS" if ok else "FAIL", detail))
    assert ok, "criterion %02d: %s" % (num, detail)


def test_criterion_01_sign_trichotomy():
    t0 = time.perf_counter()
    fracs = (0.05, 0.15, 0.3, 0.4, 0.45, 0.55, 0.7, 0.8, 0.95)
    bad = []
    worst_zero = 0.0
    for s in (0.3, 0.5, 0.7):
        for fr in fracs:
            alpha = fr * 2.0 * s
            c = cf.c_alpha(alpha, s, DEFAULT_CONFIG)
            if math.copysign(1.0, c.value) != math.copysign(1.0, alpha - s):
                bad.append((alpha, s, c.value))
        cz = cf.c_alpha(s, s, DEFAULT_CONFIG)
        worst_zero = max(worst_zero, abs(cz.value))
    elapsed = time.perf_counter() - t0
    ok = not bad and worst_zero <= 1e-8 and elapsed <= 5.0
    _report(1, ok, "mismatches=%d |c_s|max=%.2e elapsed=%.2fs"
            % (len(bad), worst_zero, elapsed))


def test_criterion_02_closed_vs_generic(const2, cone2, fast_cfg):
    t0 = time.perf_counter()
    tight = DEFAULT_CONFIG.with_tol(5e-9, 1e-7)
    heights = np.linspace(0.1, 5.0, 20)
    worst_rel, worst_abs = 0.0, 0.0
    for a in (const2, cone2):
        for fr in (0.2, 0.5, 0.8):
            alpha = fr * 2.0 * S
            f = cf.HalfSpacePower(2, S, alpha=alpha)
            for k, h in enumerate(heights):
                x = (0.3 * math.sin(1.7 * k), float(h))
                closed = cf.apply_L(a, S, f, x, DEFAULT_CONFIG)
                assert closed.path == "closed_form"
                if abs(closed.value) < 1e-10:
                    num = cf.apply_L(a, S, f, x, tight, force_numeric=True)
                    worst_abs = max(worst_abs,
                                    abs(num.value - closed.value))
                else:
                    num = cf.apply_L(a, S, f, x, fast_cfg,
                                     force_numeric=True)
                    worst_rel = max(worst_rel,
                                    abs(num.value - closed.value)
                                    / abs(closed.value))
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-5 and worst_abs <= 1e-8 and elapsed <= 60.0
    _report(2, ok, "rel=%.2e abs=%.2e elapsed=%.1fs"
            % (worst_rel, worst_abs, elapsed))


def test_criterion_03_scaling_identity(const2):
    center = np.array([0.0, 1.2])
    bump = cf.Bump(2, S, center=(0.0, 1.2), r_in=1.0, r_out=2.0)
    prod = cf.Product(cf.HalfSpacePower(2, S, alpha=0.4), bump)

    def base_point(k):
        t = 0.15 * math.pi + 0.7 * math.pi * k / 9.0
        rho = 0.55 if k % 2 == 0 else 1.5
        return center + rho * np.array([math.cos(t), math.sin(t)])

    worst_err_ratio, worst_rel = 0.0, 0.0
    for f in (bump, prod):
        base = [(base_point(k),
                 cf.apply_L(const2, S, f, base_point(k), DEFAULT_CONFIG))
                for k in range(10)]
        for R in (0.5, 2.0, 10.0):
            fR = cf.Rescale(f, R)
            for y, e0 in base:
                e1 = cf.apply_L(const2, S, fR, R * y, DEFAULT_CONFIG)
                lhs, rhs = e1.value, R ** (-2.0 * S) * e0.value
                resid = abs(lhs - rhs)
                budget = e1.abs_error_estimate \
                    + R ** (-2.0 * S) * e0.abs_error_estimate
                scale = max(abs(lhs), abs(rhs))
                worst_err_ratio = max(worst_err_ratio,
                                      resid / max(budget, 1e-300))
                worst_rel = max(worst_rel, resid / scale)
    ok = worst_err_ratio <= 1.0 and worst_rel <= 1e-8
    _report(3, ok, "resid/budget=%.2e rel=%.2e"
            % (worst_err_ratio, worst_rel))


def test_criterion_04_product_rule(const2, cone2, fast_cfg):
    g = cf.HalfSpacePower(2, S, alpha=0.4)
    h = cf.Bump(2, S, center=(0.0, 1.0), r_in=0.6, r_out=1.4)
    center = np.array([0.0, 1.0])
    rng = np.random.default_rng(20220822)
    pts = []
    while len(pts) < 20:
        x = np.array([rng.uniform(-1.2, 1.2), rng.uniform(0.15, 2.2)])
        rho = float(np.linalg.norm(x - center))
        if abs(rho - 0.6) > 0.08 and abs(rho - 1.4) > 0.08:
            pts.append(x)
    worst = 0.0
    for a in (const2, cone2):
        for x in pts:
            e_gh = cf.apply_L(a, S, cf.Product(g, h), x, fast_cfg)
            e_g = cf.apply_L(a, S, g, x, fast_cfg)
            e_h = cf.apply_L(a, S, h, x, fast_cfg)
            e_l = cf.correction_l(a, S, g, h, x, fast_cfg)
            g0, h0 = float(g.value(x)), float(h.value(x))
            resid = abs(e_gh.value - g0 * e_h.value - h0 * e_g.value
                        - e_l.value)
            scale = max(abs(e_gh.value), abs(g0 * e_h.value),
                        abs(h0 * e_g.value), abs(e_l.value))
            worst = max(worst, resid / scale)
    ok = worst <= 1e-5
    _report(4, ok, "resid/scale=%.2e over 20 points, both densities" % worst)


def test_criterion_05_kelvin_identity(const2):
    kcfg = DEFAULT_CONFIG.with_tol(1e-5, 1e-4)
    w = cf.kelvin(0.25, 2, S)
    worst = 0.0
    for k in range(15):
        r = 0.55 + 1.4 * k / 14.0
        th = math.pi / 8.0 + 0.75 * math.pi * k / 14.0
        x = (r * math.cos(th), r * math.sin(th))
        assert x[1] >= 0.2 and 0.5 <= r <= 2.0
        closed = cf.apply_L(const2, S, w, x, kcfg)
        num = cf.apply_L(const2, S, w, x, kcfg, force_numeric=True)
        worst = max(worst, abs(num.value - closed.value)
                    / abs(closed.value))
    ok = worst <= 1e-4
    _report(5, ok, "rel=%.2e over 15 points" % worst)


def test_criterion_06_pairing(const2):
    t0 = time.perf_counter()
    u = cf.translate_truncate(cf.kelvin(0.25, 2, S))
    v = cf.Product(cf.HalfSpacePower(2, S, alpha=0.4),
                   cf.Bump(2, S, center=(0.0, 1.0), r_in=0.25, r_out=0.5))
    res = cf.pairing(const2, S, u, v, 3000.0, DEFAULT_CONFIG)
    elapsed = time.perf_counter() - t0
    bound = 1e-3 * max(abs(res.I_uLv), abs(res.I_vLu))
    ok = res.residual <= bound and elapsed <= 300.0
    _report(6, ok, "residual=%.3e bound=%.3e elapsed=%.1fs"
            % (res.residual, bound, elapsed))


def test_criterion_07_sharpness_scan(const2):
    t0 = time.perf_counter()
    leaks = []
    for p in (1.2, 1.4, 1.6):
        rows = cf.refute_candidate_family(const2, S, p, "halfspace",
                                          cfg=DEFAULT_CONFIG)
        leaks += [(p, r.alpha) for r in rows if r.certified]
    cert_ok = True
    worst_margin = math.inf
    for p in (1.7, 1.8, 1.9):
        con = cf.construct_supersolution(2, S, p, cfg=DEFAULT_CONFIG)
        pts = cf.default_certification_points(2, "halfspace")
        rep = cf.certify(const2, S, p, con.function, pts, DEFAULT_CONFIG)
        worst_margin = min(worst_margin, rep.min_margin)
        cert_ok = cert_ok and rep.certified and rep.n_points >= 200 \
            and rep.min_margin >= -1e-6
    ws = cf.liouville_scan(const2, S, [2.0, 2.3], "wholespace",
                           DEFAULT_CONFIG)
    ws_ok = [r.certified for r in ws] == [False, True] \
        and ws[1].regime == "translate_truncate"
    elapsed = time.perf_counter() - t0
    ok = not leaks and cert_ok and ws_ok and elapsed <= 600.0
    _report(7, ok, "leaks=%d min_margin=%.2e wholespace=%s elapsed=%.1fs"
            % (len(leaks), worst_margin, ws_ok, elapsed))


def test_criterion_08_step_one_bound(const2, cone2):
    details = []
    ok = True
    for a, name in ((const2, "constant"), (cone2, "cone")):
        rep = cf.step_one_M(a, S, 0.75, 0.25, DEFAULT_CONFIG)
        good = math.isfinite(rep.M_est) and rep.M_est > 0.0 \
            and rep.stability <= 0.05 and rep.audit_max <= 1e-8 \
            and rep.audit_n > 0
        ok = ok and good
        details.append("%s: M=%.4g stab=%.2e audit=%.2e"
                       % (name, rep.M_est, rep.stability, rep.audit_max))
    _report(8, ok, "; ".join(details))


def test_criterion_09_gamma_construction():
    details = []
    ok = True
    for nu, tau in (((0.0, 1.0), 1.0), ((0.0, 1.0), 0.1),
                    ((1.0, 0.0), 0.1)):
        res = cf.gamma_search(nu, tau, DEFAULT_CONFIG)
        good = res.verified and 0.0 < res.gamma < 1.0 \
            and res.n_boundary >= 50 \
            and res.min_volume - res.three_sigma > 0.0
        for row in res.rows:
            if row.verified:
                good = good and row.min_volume - row.three_sigma > 0.0
        ok = ok and good
        details.append("nu=%s tau=%g: gamma=%g vol-3sigma=%.3g"
                       % (nu, tau, res.gamma,
                          res.min_volume - res.three_sigma))
    _report(9, ok, "; ".join(details))


def test_criterion_10_exponent_algebra():
    pairs = [(1, 0.05), (1, 0.15), (1, 0.25), (1, 0.35), (1, 0.45),
             (2, 0.15), (2, 0.35), (2, 0.55), (2, 0.75), (2, 0.9),
             (3, 0.2), (3, 0.5), (3, 0.8),
             (4, 0.3), (4, 0.6), (4, 0.9),
             (5, 0.25), (5, 0.55), (5, 0.7), (5, 0.85)]
    worst = 0.0
    for N, s in pairs:
        ph = (N + s) / (N - s)
        pw = N / (N - 2.0 * s)
        worst = max(worst, abs(cf.halfspace_envelope_exponent(N, s, ph)),
                    abs(cf.wholespace_envelope_exponent(N, s, pw)))
    try:
        cf.construct_supersolution(2, 0.5, (2.0 + 0.5) / (2.0 - 0.5))
        raises_ok = False
    except cf.DegenerateConstructionError:
        raises_ok = True
    ok = worst <= 1e-12 and raises_ok
    _report(10, ok, "worst=%.2e threshold-raise=%s over %d pairs"
            % (worst, raises_ok, len(pairs)))


def test_criterion_11_boundary_continuity_probe(const2, fast_cfg):
    phi = cf.Bump(2, S, center=(0.3, 0.0), r_in=1.5, r_out=2.5)
    ok = True
    details = []
    for alpha in (0.3, 0.45):
        w = cf.HalfSpacePower(2, S, alpha=alpha)
        vals = [cf.correction_l(const2, S, w, phi, (0.3, 2.0 ** -n),
                                fast_cfg).value
                for n in (17, 18, 19, 20, 21)]
        gaps = [abs(b - a) for a, b in zip(vals, vals[1:])]
        decreasing = all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:]))
        ok = ok and decreasing and gaps[-1] <= 1e-4
        details.append("alpha=%g: gap@n=20 %.3e (decreasing=%s)"
                       % (alpha, gaps[-1], decreasing))
    _report(11, ok, "; ".join(details))


def test_criterion_12_cli_determinism(tmp_path):
    runs = [
        ("gamma", ["gamma", "--density.axis", "0,1", "--density.tau", "1.0",
                   "--sampler.grid", "0.5,0.25"]),
        ("calpha", ["calpha", "--s", "0.5", "--alpha", "0.1,0.25,0.4"]),
    ]
    ok = True
    details = []
    for name, argv in runs:
        d1, d2 = tmp_path / (name + "1"), tmp_path / (name + "2")
        assert cli_main([*argv, "--out", str(d1)]) == 0
        assert cli_main([name, "--config", str(d1 / "resolved.cfg"),
                         "--out", str(d2)]) == 0
        same = (d1 / (name + ".csv")).read_bytes() \
            == (d2 / (name + ".csv")).read_bytes()
        ok = ok and same
        details.append("%s=%s" % (name, "identical" if same else "DIFFERS"))
    _report(12, ok, "; ".join(details))
