"""Acceptance checks: one function per criterion, shared by CLI and tests.

Every check pins its tolerance here, computes its own reference values
(iteration oracles, closed forms, exact Gaussian divergences) and returns a
dict {id, name, passed, details}.  All randomness is seed-fixed; results
are deterministic for a given seed.
"""

import json

import numpy as np

from . import bounds, discrete, models, riccati, spd
from . import gaussian as g
from .bounds import CurvatureSpec


def _spd_family(seed):
    """Scalars 0.1, 1, 10, a diagonal, and 20 seed-fixed random SPD, d <= 8."""
    rng = np.random.default_rng(seed)
    fam = [np.array([[0.1]]), np.array([[1.0]]), np.array([[10.0]]), np.diag([1.0, 4.0])]
    for _ in range(20):
        d = int(rng.integers(1, 9))
        q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        fam.append(spd.symmetrize((q * rng.uniform(0.2, 4.0, size=d)) @ q.T))
    return fam


def _gaussian_models(seed, count=10, dmax=4):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = int(rng.integers(1, dmax + 1))
        q1, _ = np.linalg.qr(rng.standard_normal((d, d)))
        q2, _ = np.linalg.qr(rng.standard_normal((d, d)))
        u = spd.symmetrize((q1 * rng.uniform(0.5, 2.0, d)) @ q1.T)
        v = spd.symmetrize((q2 * rng.uniform(0.5, 2.0, d)) @ q2.T)
        mu = g.GaussianMeasure(rng.standard_normal(d), u)
        eta = g.GaussianMeasure(rng.standard_normal(d), v)
        beta = 0.3 * rng.standard_normal((d, d)) + np.eye(d)
        q3, _ = np.linalg.qr(rng.standard_normal((d, d)))
        tau = spd.symmetrize((q3 * rng.uniform(0.5, 2.0, d)) @ q3.T)
        k = g.LinearGaussianKernel(rng.standard_normal(d), beta, tau)
        out.append((mu, eta, k))
    return out


def _std_model():
    mu = g.GaussianMeasure([0.0], [[1.0]])
    eta = g.GaussianMeasure([0.0], [[1.0]])
    k = g.LinearGaussianKernel([0.0], [[1.0]], [[1.0]])
    return mu, eta, k


def criterion_riccati_fixed_point(seed=0, tol_map=1e-10, tol_identity=1e-9):
    worst_map = 0.0
    worst_quad = 0.0
    sandwich_ok = True
    for varpi in _spd_family(seed):
        r = riccati.fixed_point(varpi)
        worst_map = max(worst_map, spd.spectral_norm(riccati.ricc_map(varpi, r) - r))
        rep = riccati.fixed_point_identities(varpi, tol=tol_identity)
        worst_quad = max(worst_quad, rep["quadratic_identity_residual"])
        sandwich_ok = sandwich_ok and rep["sandwich_strict"] and rep["inverse_sandwich_strict"]
    passed = worst_map < tol_map and worst_quad < tol_identity and sandwich_ok
    return {
        "id": 1,
        "name": "riccati-fixed-point",
        "passed": bool(passed),
        "details": {
            "max_map_residual": worst_map,
            "max_identity_residual": worst_quad,
            "sandwich_strict": sandwich_ok,
        },
    }


def criterion_riccati_decay(seed=0, n_max=60, tol_closed_form=1e-12):
    rng = np.random.default_rng(seed + 1)
    envelope_ok = True
    worst_margin = -np.inf
    for varpi in _spd_family(seed):
        d = varpi.shape[0]
        r_star = riccati.fixed_point(varpi)
        delta, c = riccati.decay_params(varpi)
        r0 = spd.clamp_psd(np.diag(rng.uniform(0.0, 2.0, size=d)))
        traj = riccati.iterate(varpi, r0, n_max)
        gap0 = spd.spectral_norm(r0 - r_star)
        for n in range(1, n_max + 1):
            gap = spd.spectral_norm(traj[n] - r_star)
            margin = gap - c * delta**n * gap0
            worst_margin = max(worst_margin, margin)
            envelope_ok = envelope_ok and margin <= 1e-14

    closed_ok = True
    worst_cf = 0.0
    for varpi_s, r0_s in [(0.1, 0.0), (1.0, 0.0), (1.0, 2.0), (10.0, 0.3), (2.0, 5.0)]:
        traj = riccati.iterate(np.array([[varpi_s]]), np.array([[r0_s]]), 100)
        for n in range(101):
            err = abs(riccati.scalar_closed_form(varpi_s, r0_s, n) - traj[n][0, 0])
            worst_cf = max(worst_cf, err)
            closed_ok = closed_ok and err < tol_closed_form
    return {
        "id": 2,
        "name": "riccati-decay",
        "passed": bool(envelope_ok and closed_ok),
        "details": {"worst_envelope_margin": worst_margin, "max_closed_form_error": worst_cf},
    }


def criterion_psi_factorization(seed=0, tol=1e-9, n_cases=50):
    rng = np.random.default_rng(seed + 2)
    worst_fact = 0.0
    worst_transport = 0.0
    for _ in range(n_cases):
        d = int(rng.integers(1, 5))
        q1, _ = np.linalg.qr(rng.standard_normal((d, d)))
        q2, _ = np.linalg.qr(rng.standard_normal((d, d)))
        gamma = (q1 * rng.uniform(0.5, 2.0, size=d)) @ q2.T
        v = spd.clamp_psd(np.diag(rng.uniform(0.0, 2.0, size=d)))
        lhs = riccati.psi_map(gamma, riccati.psi_map(gamma.T, v))
        param = spd.sym_inv(spd.symmetrize(gamma @ gamma.T))
        worst_fact = max(worst_fact, spd.spectral_norm(lhs - riccati.ricc_map(param, v)))
        left = riccati.psi_map(gamma.T, riccati.fixed_point(param))
        right = riccati.fixed_point(spd.sym_inv(spd.symmetrize(gamma.T @ gamma)))
        worst_transport = max(worst_transport, spd.spectral_norm(left - right))
    passed = worst_fact < tol and worst_transport < tol
    return {
        "id": 3,
        "name": "psi-factorization",
        "passed": bool(passed),
        "details": {"max_factorization_residual": worst_fact, "max_transport_residual": worst_transport},
    }


def _bridge_gaps(mu, eta, k, n_pairs):
    plan = g.bridge_plan(mu, eta, k)
    states = g.sinkhorn_run(mu, eta, k, n_pairs)
    return [g.gaussian_kl(plan, g.state_plan(s, mu, eta, k)) for s in states]


def criterion_bridge_vs_sinkhorn(seed=0, tol_sigma=1e-10):
    mu, eta, k = _std_model()
    states = g.sinkhorn_run(mu, eta, k, 25)
    golden = riccati.fixed_point(np.array([[1.0]]))[0, 0]
    sigma_err = max(
        abs(s.tau_n[0, 0] - golden) for s in states if s.n in (50, 51)
    )
    gaps = _bridge_gaps(mu, eta, k, 25)
    monotone = all(b <= a + 1e-14 for a, b in zip(gaps, gaps[1:]))
    envelope = all(gaps[2 * n] <= 0.5**n * gaps[0] + 1e-14 for n in range(1, 26))

    rate_ok = True
    for mu_r, eta_r, k_r in _gaussian_models(seed + 3):
        eps = bounds.eps_lg(k_r, CurvatureSpec.gaussian(mu_r.cov, eta_r.cov))
        rate = 1.0 / (1.0 + 1.0 / eps)
        gaps_r = _bridge_gaps(mu_r, eta_r, k_r, 15)
        mono_r = all(b <= a + 1e-12 for a, b in zip(gaps_r, gaps_r[1:]))
        env_r = all(
            gaps_r[2 * n] <= rate**n * gaps_r[0] * (1.0 + 1e-9) + 1e-13 for n in range(1, 16)
        )
        rate_ok = rate_ok and mono_r and env_r
    passed = sigma_err < tol_sigma and monotone and envelope and rate_ok
    return {
        "id": 4,
        "name": "gaussian-bridge-vs-sinkhorn",
        "passed": bool(passed),
        "details": {
            "sigma_error_at_n50": sigma_err,
            "standard_model_monotone": monotone,
            "standard_model_envelope": envelope,
            "random_models_ok": rate_ok,
        },
    }


def criterion_improved_rate(seed=0):
    arithmetic_ok = True
    for eps in [0.01, 0.25, 1.0, 4.0, 100.0]:
        ph = bounds.phi(eps)
        arithmetic_ok = arithmetic_ok and (1.0 + ph) ** -2 < (1.0 + 1.0 / eps) ** -1

    env_ok = True
    models_list = [_std_model()] + _gaussian_models(seed + 3)
    for mu, eta, k in models_list:
        eps = bounds.eps_lg(k, CurvatureSpec.gaussian(mu.cov, eta.cov))
        ph = bounds.phi(eps)
        gaps = _bridge_gaps(mu, eta, k, 10)
        for n in range(2, len(gaps)):
            env_ok = env_ok and gaps[n] <= (1.0 + ph) ** -(n - 2) * gaps[0] * (1.0 + 1e-9) + 1e-13
    return {
        "id": 5,
        "name": "improved-phi-rate",
        "passed": bool(arithmetic_ok and env_ok),
        "details": {"strict_ordering": arithmetic_ok, "phi_envelope_dominates": env_ok},
    }


def criterion_entropic_map_identities(seed=0, tol=1e-10):
    worst_bary = 0.0
    worst_sandwich = 0.0
    for mu, eta, k in _gaussian_models(seed + 4):
        chi = k.chi
        fwd, bwd = g.bridge_solve(mu, eta, k)
        worst_bary = max(
            worst_bary,
            spd.spectral_norm(chi.T @ fwd.noise_cov @ chi - g.entropic_map_gradient(fwd) @ chi),
            spd.spectral_norm(chi @ bwd.noise_cov @ chi.T - g.entropic_map_gradient(bwd) @ chi.T),
        )
        # equality case: both two-sided bound families collapse onto the gradient
        w0, w1, w0b, w1b = bounds.varpi_family(k, CurvatureSpec.gaussian(mu.cov, eta.cov))
        v_half = spd.principal_sqrt(eta.cov)
        u_half = spd.principal_sqrt(mu.cov)
        for w in (w0, w0b):
            bound = chi.T @ v_half @ riccati.fixed_point(w) @ v_half @ chi
            worst_sandwich = max(
                worst_sandwich, spd.spectral_norm(g.entropic_map_gradient(fwd) @ chi - bound)
            )
        for w in (w1, w1b):
            bound = chi @ u_half @ riccati.fixed_point(w) @ u_half @ chi.T
            worst_sandwich = max(
                worst_sandwich, spd.spectral_norm(g.entropic_map_gradient(bwd) @ chi.T - bound)
            )
    passed = worst_bary < tol and worst_sandwich < tol
    return {
        "id": 6,
        "name": "entropic-map-identities",
        "passed": bool(passed),
        "details": {"max_barycentric_residual": worst_bary, "max_sandwich_residual": worst_sandwich},
    }


def criterion_ot_limit(seed=0, final_gap=5e-3):
    mu = g.GaussianMeasure([0.0], [[4.0]])
    eta = g.GaussianMeasure([0.0], [[1.0]])
    k = g.LinearGaussianKernel([0.0], [[1.0]], [[1.0]])
    lim = g.ot_limit_map(mu, eta, [[1.0]], [[1.0]])
    limit_ok = abs(lim.slope[0, 0] - 0.5) < 1e-12
    gaps = []
    for t in [1.0, 0.1, 0.01, 0.001]:
        fwd, _ = g.bridge_solve(mu, eta, k.rescaled(t))
        gaps.append(abs(fwd.slope[0, 0] - lim.slope[0, 0]))
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
    passed = limit_ok and monotone and gaps[-1] < final_gap
    return {
        "id": 7,
        "name": "ot-limit",
        "passed": bool(passed),
        "details": {"limit_slope_ok": limit_ok, "gaps": gaps, "monotone": monotone},
    }


def criterion_proximal_sampler(seed=0):
    mu = g.GaussianMeasure([0.0], [[1.0]])
    nu = g.GaussianMeasure([3.0], [[2.0]])
    k = g.LinearGaussianKernel([0.0], [[1.0]], [[1.0]])
    spec = CurvatureSpec(u_plus=[[1.0]], v_plus=[[1.0]])
    a, b = bounds.proximal_rates(k, spec)
    rates_ok = a == 1.0 and b == 0.5
    w0 = g.gelbrich_w2(nu, mu)
    h0 = g.gaussian_kl(nu, mu)
    cur = nu
    decay_ok = True
    for n in range(1, 21):
        cur = g.proximal_step(cur, mu, k)
        decay_ok = decay_ok and g.gelbrich_w2(cur, mu) <= b**n * w0 + 1e-13
        decay_ok = decay_ok and g.gaussian_kl(cur, mu) <= a * b ** (2 * (n - 1)) * h0 + 1e-13

    # crossover: the rate comparison must match the exact margin predicate on
    # both sides of the asymmetric-curvature boundary and for both outcomes
    crossover_ok = True
    outcomes = set()
    for t, up, vp in [(1.0, 2.0, 1.0), (1.0, 1.0, 2.0), (10.0, 2.0, 1.0), (10.0, 1.0, 2.0)]:
        spec_x = CurvatureSpec(u_plus=[[up]], v_plus=[[vp]])
        out = bounds.proximal_crossover(k.rescaled(t), spec_x)
        crossover_ok = crossover_ok and out["pair_rate_below"] == out["margin_above_one"]
        outcomes.add(out["pair_rate_below"])
    crossover_ok = crossover_ok and outcomes == {True, False}
    passed = rates_ok and decay_ok and crossover_ok
    return {
        "id": 8,
        "name": "proximal-sampler",
        "passed": bool(passed),
        "details": {"rates_ok": rates_ok, "decay_ok": decay_ok, "crossover_ok": crossover_ok},
    }


def _desk_models():
    grid = discrete.uniform_grid(1, 64, 8.0)
    lg_channel = models.linear_gaussian_channel_potential([0.0], [[1.0]], [[1.0]])
    gauss = discrete.build_model(
        models.quadratic_potential([0.0], [[1.0]]),
        models.quadratic_potential([0.0], [[1.0]]),
        lg_channel,
        grid,
    )
    double_well = discrete.build_model(
        models.quartic_double_well_potential(0.05, 0.8),
        models.quadratic_potential([0.0], [[1.0]]),
        lg_channel,
        grid,
    )
    bimodal = discrete.build_model(
        models.quadratic_potential([0.0], [[1.0]]),
        models.gaussian_mixture_potential([0.5, 0.5], [[-2.0], [2.0]], [[[0.5]], [[0.5]]]),
        lg_channel,
        grid,
    )
    return {"gaussian": gauss, "double-well-u": double_well, "bimodal-v": bimodal}


def criterion_discrete_sinkhorn(seed=0, tol_plans=1e-12):
    scaling_ok = True
    marginal_ok = True
    chains_ok = True
    worst_plan_gap = 0.0
    worst_marginal = 0.0
    for name, model in _desk_models().items():
        plans = discrete.matrix_scaling_plans(model, 10)
        state = discrete.initial_state(model)
        for n in range(11):
            gap = float(np.max(np.abs(discrete.plan_mass(state) - plans[n])))
            worst_plan_gap = max(worst_plan_gap, gap)
            scaling_ok = scaling_ok and gap < tol_plans
            r_mu, r_eta = discrete.marginal_residuals(state)
            res = r_mu if state.n % 2 == 0 else r_eta
            worst_marginal = max(worst_marginal, res)
            marginal_ok = marginal_ok and res < tol_plans
            state = discrete.sinkhorn_step(state)

        trace = discrete.run(model, 300, tol=1e-11)
        oracle = discrete.bridge_oracle(model, tol=1e-13)
        rep = discrete.entropy_report(trace, oracle)
        for key in ("H_pi2n_eta", "H_eta_pi2n", "H_mu_pi2n1", "H_pi2n1_mu", "H_bridge_even", "H_bridge_odd"):
            seq = rep[key]
            chains_ok = chains_ok and all(y <= x + 1e-12 for x, y in zip(seq, seq[1:]))
        for n in range(1, trace.n_sweeps + 1):
            chains_ok = chains_ok and rep["H_pi2n_eta"][n] <= rep["H_mu_pi2n1"][n - 1] + 1e-12
            chains_ok = chains_ok and rep["H_mu_pi2n1"][n - 1] <= rep["H_pi2n_eta"][n - 1] + 1e-12
            chains_ok = chains_ok and rep["H_pi2n1_mu"][n] <= rep["H_eta_pi2n"][n] + 1e-12
            chains_ok = chains_ok and rep["H_eta_pi2n"][n] <= rep["H_pi2n1_mu"][n - 1] + 1e-12
        tele = rep["telescope_even_residuals"] + rep["telescope_odd_residuals"]
        chains_ok = chains_ok and max(abs(x) for x in tele) < 1e-9
    passed = scaling_ok and marginal_ok and chains_ok
    return {
        "id": 9,
        "name": "discrete-sinkhorn-correctness",
        "passed": bool(passed),
        "details": {
            "max_scaling_gap": worst_plan_gap,
            "max_marginal_residual": worst_marginal,
            "entropy_chains_ok": chains_ok,
        },
    }


def criterion_discretization_consistency(seed=0, min_ratio=3.5):
    t = 0.05
    mu = g.GaussianMeasure([0.0], [[1.0]])
    eta = g.GaussianMeasure([0.0], [[1.0]])
    k = g.LinearGaussianKernel([0.0], [[1.0]], [[t]])
    fwd, _ = g.bridge_solve(mu, eta, k)
    errs = []
    for n in (64, 128):
        grid = discrete.uniform_grid(1, n, 8.0)
        model = discrete.build_model(
            models.quadratic_potential([0.0], [[1.0]]),
            models.quadratic_potential([0.0], [[1.0]]),
            models.linear_gaussian_channel_potential([0.0], [[1.0]], [[t]]),
            grid,
        )
        oracle = discrete.bridge_oracle(model, tol=1e-13, max_sweeps=20000)
        cc = discrete.mean_conditional_cov(oracle)
        errs.append(abs(cc[0, 0] - fwd.noise_cov[0, 0]))
    ratio = errs[0] / errs[1] if errs[1] > 0 else np.inf
    passed = ratio >= min_ratio
    return {
        "id": 10,
        "name": "discretization-consistency",
        "passed": bool(passed),
        "details": {"coarse_error": errs[0], "fine_error": errs[1], "ratio": ratio},
    }


CRITERIA = [
    ("riccati-fixed-point", criterion_riccati_fixed_point),
    ("riccati-decay", criterion_riccati_decay),
    ("psi-factorization", criterion_psi_factorization),
    ("gaussian-bridge-vs-sinkhorn", criterion_bridge_vs_sinkhorn),
    ("improved-phi-rate", criterion_improved_rate),
    ("entropic-map-identities", criterion_entropic_map_identities),
    ("ot-limit", criterion_ot_limit),
    ("proximal-sampler", criterion_proximal_sampler),
    ("discrete-sinkhorn-correctness", criterion_discrete_sinkhorn),
    ("discretization-consistency", criterion_discretization_consistency),
]


def run_criteria(
    seed: int = 0, name_filter: str | None = None, tol_overrides: dict | None = None
) -> list[dict]:
    """Run the numbered checks, optionally restricted by a name substring.

    tol_overrides maps "criterion-name.param" to a value forwarded to that
    criterion's keyword argument, e.g. "riccati-fixed-point.tol_map".
    """
    tol_overrides = tol_overrides or {}
    results = []
    for name, fn in CRITERIA:
        if name_filter and name_filter not in name:
            continue
        kwargs = {}
        for key, val in tol_overrides.items():
            crit, _, param = key.partition(".")
            if crit == name and param:
                kwargs[param] = val
        results.append(fn(seed=seed, **kwargs))
    return results


def summary_document(results: list[dict], seed: int) -> str:
    """Canonical machine-readable summary; byte-stable for a fixed seed."""
    doc = {
        "schema": "sinkbridge/v1",
        "seed": seed,
        "all_passed": all(r["passed"] for r in results),
        "criteria": [
            {
                "id": r["id"],
                "name": r["name"],
                "passed": r["passed"],
                "details": {k: _canonical(v) for k, v in sorted(r["details"].items())},
            }
            for r in results
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def _canonical(v):
    if isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (list, tuple)):
        return [_canonical(x) for x in v]
    if isinstance(v, np.generic):
        return _canonical(v.item())
    return str(v)


def criterion_determinism(seed: int = 0) -> dict:
    """Criterion 11: two full runs with one seed serialize identically."""
    first = summary_document(run_criteria(seed=seed), seed)
    second = summary_document(run_criteria(seed=seed), seed)
    passed = first == second
    return {
        "id": 11,
        "name": "determinism",
        "passed": bool(passed),
        "details": {"byte_identical": passed},
    }
