import numpy as np
import pytest

from sinkbridge import gaussian as g
from sinkbridge import riccati, spd
from sinkbridge.errors import DomainError, ShapeError

GOLDEN = 0.6180339887498949


def random_spd(rng, d, lo=0.5, hi=2.0):
    """SPD matrix with eigenvalues drawn uniformly in [lo, hi]."""
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return spd.symmetrize((q * rng.uniform(lo, hi, size=d)) @ q.T)


def random_model(rng, d):
    mu = g.GaussianMeasure(rng.standard_normal(d), random_spd(rng, d))
    eta = g.GaussianMeasure(rng.standard_normal(d), random_spd(rng, d))
    beta = 0.3 * rng.standard_normal((d, d)) + np.eye(d)
    k = g.LinearGaussianKernel(rng.standard_normal(d), beta, random_spd(rng, d))
    return mu, eta, k


def std_model(d=1):
    mu = g.GaussianMeasure(np.zeros(d), np.eye(d))
    eta = g.GaussianMeasure(np.zeros(d), np.eye(d))
    k = g.LinearGaussianKernel(np.zeros(d), np.eye(d), np.eye(d))
    return mu, eta, k


def test_varpi_pair_identity_model():
    w0, w1 = g.varpi_pair(*std_model(2))
    assert np.allclose(w0, np.eye(2), atol=1e-13)
    assert np.allclose(w1, np.eye(2), atol=1e-13)


def test_varpi_pair_scaled_noise():
    mu, eta, k = std_model(2)
    for t in [0.5, 2.0, 10.0]:
        w0, w1 = g.varpi_pair(mu, eta, k.rescaled(t))
        assert np.allclose(w0, t**2 * np.eye(2), atol=1e-10 * t**2)
        assert np.allclose(w1, t**2 * np.eye(2), atol=1e-10 * t**2)


def test_varpi_pair_diagonal_entrywise():
    u = np.diag([1.0, 2.0])
    v = np.diag([3.0, 1.0])
    mu = g.GaussianMeasure(np.zeros(2), u)
    eta = g.GaussianMeasure(np.zeros(2), v)
    k = g.LinearGaussianKernel(np.zeros(2), np.eye(2), np.eye(2))
    w0, w1 = g.varpi_pair(mu, eta, k)
    # entrywise scalar evaluation: w0_ii = 1/(v_ii u_ii), w1_ii = 1/(u_ii v_ii)
    assert np.allclose(w0, np.diag([1.0 / 3.0, 0.5]), atol=1e-13)
    assert np.allclose(w1, np.diag([1.0 / 3.0, 0.5]), atol=1e-13)


def test_bridge_solve_standard_normals():
    fwd, bwd = g.bridge_solve(*std_model())
    assert abs(fwd.noise_cov[0, 0] - GOLDEN) < 1e-12
    assert abs(fwd.slope[0, 0] - GOLDEN) < 1e-12
    assert abs(bwd.slope[0, 0] - GOLDEN) < 1e-12


def test_bridge_identity_transport_limit():
    mu, eta, k = std_model()
    for t in [1e-2, 1e-4]:
        fwd, _ = g.bridge_solve(mu, eta, k.rescaled(t))
        assert abs(fwd.slope[0, 0] - 1.0) < np.sqrt(t)


def test_bridge_marginal_consistency_scalar():
    mu = g.GaussianMeasure([0.0], [[4.0]])
    eta = g.GaussianMeasure([0.0], [[1.0]])
    k = g.LinearGaussianKernel([0.0], [[1.0]], [[1.0]])
    fwd, bwd = g.bridge_solve(mu, eta, k)
    s = fwd.noise_cov[0, 0]
    assert abs(s * 1.0 * 4.0 * 1.0 * s + s - 1.0) < 1e-10
    pushed = g.push_through(mu, fwd)
    assert abs(pushed.cov[0, 0] - 1.0) < 1e-12
    pushed_back = g.push_through(eta, bwd)
    assert abs(pushed_back.cov[0, 0] - 4.0) < 1e-12


def test_bridge_push_forward_random_models():
    rng = np.random.default_rng(314)
    for _ in range(10):
        d = int(rng.integers(1, 5))
        mu, eta, k = random_model(rng, d)
        fwd, bwd = g.bridge_solve(mu, eta, k)
        pushed = g.push_through(mu, fwd)
        assert np.linalg.norm(pushed.mean - eta.mean) < 1e-9
        assert np.linalg.norm(pushed.cov - eta.cov, 2) < 1e-9
        back = g.push_through(eta, bwd)
        assert np.linalg.norm(back.mean - mu.mean) < 1e-9
        assert np.linalg.norm(back.cov - mu.cov, 2) < 1e-9


def test_bridge_cross_covariance_schur_oracle():
    # independent closed form for beta=I, tau=s2*I channels: the joint cross
    # block is  (Sig0^{1/2} (4 Sig0^{1/2} Sig1 Sig0^{1/2} + s2^2 I)^{1/2} Sig0^{-1/2} - s2 I)/2
    rng = np.random.default_rng(2718)
    for _ in range(8):
        d = int(rng.integers(1, 4))
        s2 = float(rng.uniform(0.3, 2.0))
        mu = g.GaussianMeasure(rng.standard_normal(d), random_spd(rng, d, 0.5))
        eta = g.GaussianMeasure(rng.standard_normal(d), random_spd(rng, d, 0.5))
        k = g.LinearGaussianKernel(np.zeros(d), np.eye(d), s2 * np.eye(d))
        plan = g.bridge_plan(mu, eta, k)
        s0h = spd.principal_sqrt(mu.cov)
        s0ih = spd.sym_inv(s0h)
        inner = spd.principal_sqrt(4.0 * s0h @ eta.cov @ s0h + s2**2 * np.eye(d))
        cross_oracle = 0.5 * (s0h @ inner @ s0ih - s2 * np.eye(d))
        assert np.linalg.norm(plan.cov[:d, d:] - cross_oracle, 2) < 1e-9


def test_sinkhorn_initial_state():
    rng = np.random.default_rng(9)
    mu, eta, k = random_model(rng, 3)
    states = g.sinkhorn_run(mu, eta, k, 1)
    s0 = states[0]
    assert s0.n == 0
    assert np.allclose(s0.tau_n, k.tau)
    assert np.allclose(s0.m_n, k.alpha + k.beta @ mu.mean)
    # pi_0 = mu K pushed through the channel
    assert np.allclose(s0.sigma_pi_n, k.beta @ mu.cov @ k.beta.T + k.tau, atol=1e-12)


def test_sinkhorn_standard_model_convergence():
    mu, eta, k = std_model()
    states = g.sinkhorn_run(mu, eta, k, 25)
    for s in states:
        assert abs(s.m_n[0]) < 1e-14
    assert abs(states[-2].tau_n[0, 0] - GOLDEN) < 1e-10
    assert abs(states[-1].tau_n[0, 0] - GOLDEN) < 1e-10


def test_sinkhorn_means_converge_to_targets():
    mu = g.GaussianMeasure([1.0], [[1.0]])
    eta = g.GaussianMeasure([-1.0], [[1.0]])
    k = g.LinearGaussianKernel([0.0], [[1.0]], [[1.0]])
    states = g.sinkhorn_run(mu, eta, k, 60)
    even = [s for s in states if s.n % 2 == 0]
    odd = [s for s in states if s.n % 2 == 1]
    assert abs(even[-1].m_n[0] - (-1.0)) < 1e-10
    assert abs(odd[-1].m_n[0] - 1.0) < 1e-10


def test_sinkhorn_terminal_matches_bridge():
    rng = np.random.default_rng(77)
    for _ in range(5):
        d = int(rng.integers(1, 4))
        mu, eta, k = random_model(rng, d)
        fwd, bwd = g.bridge_solve(mu, eta, k)
        states = g.sinkhorn_run(mu, eta, k, 400, tol=1e-14)
        even = [s for s in states if s.n % 2 == 0][-1]
        odd = [s for s in states if s.n % 2 == 1][-1]
        assert np.linalg.norm(even.tau_n - fwd.noise_cov, 2) < 1e-10
        assert np.linalg.norm(odd.tau_n - bwd.noise_cov, 2) < 1e-10
        assert np.linalg.norm(even.m_n - eta.mean) < 1e-9
        assert np.linalg.norm(odd.m_n - mu.mean) < 1e-9


def test_sinkhorn_rescaled_recursion_exact():
    # the even/odd conditional covariances must satisfy the rescaled Riccati
    # recursions exactly
    rng = np.random.default_rng(55)
    mu, eta, k = random_model(rng, 2)
    w0, w1 = g.varpi_pair(mu, eta, k)
    v_half = spd.principal_sqrt(eta.cov)
    v_ih = spd.sym_inv(v_half)
    u_half = spd.principal_sqrt(mu.cov)
    u_ih = spd.sym_inv(u_half)
    states = g.sinkhorn_run(mu, eta, k, 10)
    taus = {s.n: s.tau_n for s in states}
    for n in range(2, 20, 2):
        lhs = v_ih @ taus[n] @ v_ih
        rhs = riccati.ricc_map(w0, v_ih @ taus[n - 2] @ v_ih)
        assert np.linalg.norm(lhs - rhs, 2) < 1e-10
    for n in range(3, 21, 2):
        lhs = u_ih @ taus[n] @ u_ih
        rhs = riccati.ricc_map(w1, u_ih @ taus[n - 2] @ u_ih)
        assert np.linalg.norm(lhs - rhs, 2) < 1e-10


def test_sinkhorn_rescaled_sandwich():
    # rescaled conditional covariances stay below the identity once the
    # recursion has taken over from the raw channel initialization
    rng = np.random.default_rng(61)
    mu, eta, k = random_model(rng, 3)
    v_ih = spd.sym_inv(spd.principal_sqrt(eta.cov))
    u_ih = spd.sym_inv(spd.principal_sqrt(mu.cov))
    for s in g.sinkhorn_run(mu, eta, k, 8):
        if s.n >= 2:
            scaled = (v_ih if s.n % 2 == 0 else u_ih)
            assert spd.loewner_leq(scaled @ s.tau_n @ scaled, np.eye(3), tol=1e-12)


def test_pi_referenced_fixed_point_identity():
    # each marginal-flow covariance pairs with its conditional covariance as
    # a Riccati fixed point: with W = (S^pi)^{-1/2} (chi u chi')^{-1} (S^pi)^{-1/2},
    # the matrix (S^pi)^{-1/2} tau (S^pi)^{-1/2} is the fixed point of Ricc_W
    rng = np.random.default_rng(71)
    for _ in range(5):
        d = int(rng.integers(1, 4))
        mu, eta, k = random_model(rng, d)
        chi = k.chi
        for s in g.sinkhorn_run(mu, eta, k, 6):
            if s.n % 2 == 0:
                core = spd.sym_inv(spd.require_spd(chi @ mu.cov @ chi.T))
            else:
                core = spd.sym_inv(spd.require_spd(chi.T @ eta.cov @ chi))
            s_ih = spd.sym_inv(spd.principal_sqrt(s.sigma_pi_n))
            w_pi = spd.symmetrize(s_ih @ core @ s_ih)
            r_pi = spd.symmetrize(s_ih @ s.tau_n @ s_ih)
            assert np.linalg.norm(riccati.ricc_map(w_pi, r_pi) - r_pi, 2) < 1e-10


def test_gaussian_kl_values():
    n01 = g.GaussianMeasure([0.0], [[1.0]])
    assert g.gaussian_kl(n01, n01) == 0.0
    assert abs(g.gaussian_kl(g.GaussianMeasure([1.0], [[1.0]]), n01) - 0.5) < 1e-14
    v = g.gaussian_kl(g.GaussianMeasure([0.0], [[2.0]]), n01)
    assert abs(v - 0.5 * (2.0 - 1.0 - np.log(2.0))) < 1e-12
    assert abs(v - 0.15342641) < 1e-8


def test_gelbrich_w2_values():
    rng = np.random.default_rng(4)
    p = g.GaussianMeasure(rng.standard_normal(3), random_spd(rng, 3))
    assert g.gelbrich_w2(p, p) < 1e-7
    a = g.GaussianMeasure([0.0], [[1.0]])
    b = g.GaussianMeasure([0.0], [[4.0]])
    assert abs(g.gelbrich_w2(a, b) - 1.0) < 1e-12
    q = g.GaussianMeasure(p.mean + 2.0, p.cov)
    assert abs(g.gelbrich_w2(p, q) - 2.0 * np.sqrt(3)) < 1e-9
    assert abs(g.gelbrich_w2(a, b) - g.gelbrich_w2(b, a)) < 1e-12


def test_joint_plan_blocks():
    mu = g.GaussianMeasure([0.0], [[1.0]])
    f = g.AffineGaussianMap([0.0], [[1.0]], [[1.0]])
    plan = g.joint_plan(mu, f)
    assert np.allclose(plan.cov, [[1.0, 1.0], [1.0, 2.0]])
    product = g.joint_plan(mu, g.AffineGaussianMap([0.5], [[0.0]], [[2.0]]))
    assert np.allclose(product.cov, np.diag([1.0, 2.0]))


def test_joint_plan_degenerate():
    mu = g.GaussianMeasure([0.0], [[1.0]])
    with pytest.raises(DomainError):
        g.joint_plan(mu, g.AffineGaussianMap([0.0], [[0.0]], [[0.0]]))


def test_bridge_plan_kl_to_reference():
    mu, eta, k = std_model()
    plan = g.bridge_plan(mu, eta, k)
    ref = g.joint_plan(mu, g.AffineGaussianMap(k.alpha, k.beta, k.tau))
    val = g.gaussian_kl(plan, ref)
    assert np.isfinite(val) and val > 0


def test_entropic_map_gradient_values():
    mu, eta, k = std_model()
    fwd, _ = g.bridge_solve(mu, eta, k)
    assert abs(g.entropic_map_gradient(fwd)[0, 0] - GOLDEN) < 1e-10
    fwd_t, _ = g.bridge_solve(mu, eta, k.rescaled(1e-3))
    assert abs(g.entropic_map_gradient(fwd_t)[0, 0] - 1.0) < 2e-3


def test_barycentric_identity():
    # chi' Sigma chi == gradient @ chi, forward and flat
    rng = np.random.default_rng(6021)
    models = [random_model(rng, int(rng.integers(1, 4))) for _ in range(6)]
    mu2 = g.GaussianMeasure(np.zeros(2), np.diag([1.0, 2.0]))
    eta2 = g.GaussianMeasure(np.zeros(2), np.diag([3.0, 1.0]))
    k2 = g.LinearGaussianKernel(np.zeros(2), np.eye(2), np.diag([1.0, 0.5]))
    models.append((mu2, eta2, k2))
    for mu, eta, k in models:
        chi = k.chi
        fwd, bwd = g.bridge_solve(mu, eta, k)
        res_f = chi.T @ fwd.noise_cov @ chi - g.entropic_map_gradient(fwd) @ chi
        assert np.linalg.norm(res_f, 2) < 1e-10
        res_b = chi @ bwd.noise_cov @ chi.T - g.entropic_map_gradient(bwd) @ chi.T
        assert np.linalg.norm(res_b, 2) < 1e-10


def test_ot_limit_identity_and_scalar():
    rng = np.random.default_rng(12)
    cov = random_spd(rng, 2)
    mu = g.GaussianMeasure([0.1, -0.2], cov)
    eta = g.GaussianMeasure([1.0, 2.0], cov)
    lim = g.ot_limit_map(mu, eta, np.eye(2), np.eye(2))
    assert np.allclose(lim.slope, np.eye(2), atol=1e-9)
    assert np.allclose(lim.intercept + lim.slope @ mu.mean, eta.mean)

    mu1 = g.GaussianMeasure([0.0], [[4.0]])
    eta1 = g.GaussianMeasure([0.0], [[1.0]])
    lim1 = g.ot_limit_map(mu1, eta1, [[1.0]], [[1.0]])
    assert abs(lim1.slope[0, 0] - 0.5) < 1e-12


def test_ot_limit_sweep_monotone():
    mu1 = g.GaussianMeasure([0.0], [[4.0]])
    eta1 = g.GaussianMeasure([0.0], [[1.0]])
    k1 = g.LinearGaussianKernel([0.0], [[1.0]], [[1.0]])
    lim = g.ot_limit_map(mu1, eta1, [[1.0]], [[1.0]])
    gaps = []
    for t in [1.0, 0.1, 0.01, 0.001]:
        fwd, _ = g.bridge_solve(mu1, eta1, k1.rescaled(t))
        gaps.append(abs(fwd.slope[0, 0] - lim.slope[0, 0]))
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 5e-3


def test_kernel_costs_values():
    k = g.LinearGaussianKernel([0.0], [[1.0]], [[1.0]])
    assert g.kernel_costs(k, [0.3], [0.3]) == (0.0, 0.0)
    h, j = g.kernel_costs(k, [1.0], [0.0])
    assert (h, j) == (0.5, 1.0)
    k2 = g.LinearGaussianKernel([0.0], [[1.0]], [[2.0]])
    h2, j2 = g.kernel_costs(k2, [1.0], [0.0])
    assert abs(h2 - 0.25) < 1e-15 and abs(j2 - 0.25) < 1e-15
    assert abs(h2 - 0.5 * spd.spectral_norm(k2.tau) * j2) < 1e-15


def test_kernel_costs_inequalities():
    rng = np.random.default_rng(33)
    for _ in range(50):
        d = int(rng.integers(1, 5))
        beta = rng.standard_normal((d, d)) + 2.0 * np.eye(d)
        k = g.LinearGaussianKernel(rng.standard_normal(d), beta, random_spd(rng, d, 0.3))
        x1 = rng.standard_normal(d)
        x2 = rng.standard_normal(d)
        h, j = g.kernel_costs(k, x1, x2)
        assert h >= 0 and j >= 0
        assert h <= 0.5 * spd.spectral_norm(k.tau) * j + 1e-12
        kappa = spd.spectral_norm(k.chi)
        assert j <= kappa**2 * float(np.sum((x1 - x2) ** 2)) + 1e-12


def test_proximal_invariance():
    rng = np.random.default_rng(88)
    for _ in range(5):
        d = int(rng.integers(1, 4))
        mu, _, k = random_model(rng, d)
        out = g.proximal_step(mu, mu, k)
        assert np.linalg.norm(out.mean - mu.mean) < 1e-12
        assert np.linalg.norm(out.cov - mu.cov, 2) < 1e-12


def test_proximal_mean_contraction():
    mu = g.GaussianMeasure([0.0], [[1.0]])
    nu = g.GaussianMeasure([3.0], [[1.0]])
    k = g.LinearGaussianKernel([0.0], [[1.0]], [[1.0]])
    out = g.proximal_step(nu, mu, k)
    assert abs(out.mean[0] - 1.5) < 1e-13


def test_proximal_w2_and_entropy_decay():
    mu = g.GaussianMeasure([0.0], [[1.0]])
    nu = g.GaussianMeasure([3.0], [[2.0]])
    k = g.LinearGaussianKernel([0.0], [[1.0]], [[1.0]])
    b = 0.5  # = ||u||/(t + ||u||) for this channel
    a = 1.0
    w0 = g.gelbrich_w2(nu, mu)
    h0 = g.gaussian_kl(nu, mu)
    cur = nu
    for n in range(1, 21):
        cur = g.proximal_step(cur, mu, k)
        assert g.gelbrich_w2(cur, mu) <= b**n * w0 + 1e-13
        assert g.gaussian_kl(cur, mu) <= a * b ** (2 * (n - 1)) * h0 + 1e-13


def bridge_gap_sequence(mu, eta, k, n_steps):
    plan = g.bridge_plan(mu, eta, k)
    states = g.sinkhorn_run(mu, eta, k, n_steps)
    return [g.gaussian_kl(plan, g.state_plan(s, mu, eta, k)) for s in states]


def test_bridge_entropy_monotone_and_rate():
    mu, eta, k = std_model()
    gaps = bridge_gap_sequence(mu, eta, k, 20)
    for a, b in zip(gaps, gaps[1:]):
        assert b <= a + 1e-14
    # even-subsequence envelope with eps = 1 for the standard model
    for n in range(1, 20):
        assert gaps[2 * n] <= 0.5**n * gaps[0] + 1e-14


def test_bridge_entropy_rate_random_models():
    rng = np.random.default_rng(1001)
    for _ in range(10):
        d = int(rng.integers(1, 5))
        mu, eta, k = random_model(rng, d)
        eps = (
            spd.spectral_norm(k.chi) ** 2
            * spd.spectral_norm(mu.cov)
            * spd.spectral_norm(eta.cov)
        )
        rate = 1.0 / (1.0 + 1.0 / eps)
        gaps = bridge_gap_sequence(mu, eta, k, 15)
        for a, b in zip(gaps, gaps[1:]):
            assert b <= a + 1e-12
        for n in range(1, 15):
            assert gaps[2 * n] <= rate**n * gaps[0] * (1.0 + 1e-9) + 1e-13


def test_marginal_decay_envelopes():
    # relative entropy and W2 of the even marginal flow against eta decay
    # within the eps * (1 + phi(eps)) envelopes
    from sinkbridge.bounds import phi

    rng = np.random.default_rng(515)
    for _ in range(5):
        d = int(rng.integers(1, 4))
        mu, eta, k = random_model(rng, d)
        eps = (
            spd.spectral_norm(k.chi) ** 2
            * spd.spectral_norm(mu.cov)
            * spd.spectral_norm(eta.cov)
        )
        rate = 1.0 + phi(eps)
        states = g.sinkhorn_run(mu, eta, k, 12)
        pis = {s.n: g.GaussianMeasure(s.m_n, s.sigma_pi_n) for s in states}
        h0 = g.gaussian_kl(eta, pis[0])
        w0 = g.gelbrich_w2(eta, pis[0])
        for n in range(1, 13):
            hn = g.gaussian_kl(eta, pis[2 * n])
            wn = g.gelbrich_w2(eta, pis[2 * n])
            assert hn <= eps * rate ** (-2 * (n - 1)) * h0 + 1e-12
            assert wn <= eps * rate ** (-(n - 1)) * w0 + 1e-12


def test_gradient_sandwich_collapses_in_equality_case():
    # with u- = u+ = u and v- = v+ = v both two-sided bounds are equalities
    rng = np.random.default_rng(808)
    for _ in range(5):
        d = int(rng.integers(1, 4))
        mu, eta, k = random_model(rng, d)
        chi = k.chi
        w0, w1 = g.varpi_pair(mu, eta, k)
        v_half = spd.principal_sqrt(eta.cov)
        u_half = spd.principal_sqrt(mu.cov)
        fwd, bwd = g.bridge_solve(mu, eta, k)
        bound_f = chi.T @ v_half @ riccati.fixed_point(w0) @ v_half @ chi
        assert np.linalg.norm(g.entropic_map_gradient(fwd) @ chi - bound_f, 2) < 1e-10
        bound_b = chi @ u_half @ riccati.fixed_point(w1) @ u_half @ chi.T
        assert np.linalg.norm(g.entropic_map_gradient(bwd) @ chi.T - bound_b, 2) < 1e-10


def test_dimension_mismatch_raises():
    mu = g.GaussianMeasure([0.0], [[1.0]])
    eta = g.GaussianMeasure([0.0, 0.0], np.eye(2))
    k = g.LinearGaussianKernel([0.0], [[1.0]], [[1.0]])
    with pytest.raises(ShapeError):
        g.bridge_solve(mu, eta, k)
