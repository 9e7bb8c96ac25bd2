"""Log-domain Sinkhorn on discretized state spaces.

Models are triples of tabulated potentials (U, V, W) on a uniform midpoint
grid: the marginals are the normalized Boltzmann densities exp(-U) and
exp(-V), the reference channel has row densities proportional to exp(-W).
The iteration updates potential tables, never raw kernels, so it survives
sharp channels (W growing like squared distance over a small noise scale)
without overflow.  All quadrature is midpoint-rule with uniform weights.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, ShapeError


@dataclass(frozen=True)
class Grid:
    """Flat list of quadrature nodes with positive weights."""

    points: np.ndarray  # (N, dim)
    weights: np.ndarray  # (N,)

    def __post_init__(self):
        object.__setattr__(self, "points", np.atleast_2d(np.asarray(self.points, dtype=float)))
        object.__setattr__(self, "weights", np.atleast_1d(np.asarray(self.weights, dtype=float)))
        if self.points.shape[0] != self.weights.shape[0]:
            raise ShapeError("points/weights length mismatch")
        if np.any(self.weights <= 0):
            raise DomainError("quadrature weights must be positive")

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def uniform_grid(dim: int, n: int, radius: float) -> Grid:
    """Midpoint-rule grid with n cells per axis on [-radius, radius]^dim."""
    if dim not in (1, 2):
        raise DomainError("only 1- and 2-dimensional grids are supported")
    h = 2.0 * radius / n
    axis = -radius + h * (np.arange(n) + 0.5)
    if dim == 1:
        pts = axis[:, None]
    else:
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
    return Grid(pts, np.full(pts.shape[0], h**dim))


@dataclass(frozen=True)
class DiscreteModel:
    """Normalized potential tables for one Sinkhorn problem."""

    grid: Grid
    u_pot: np.ndarray  # (N,), mu = exp(-u_pot) integrates to 1
    v_pot: np.ndarray  # (N,)
    w_pot: np.ndarray  # (N, N), each channel row integrates to 1

    @property
    def log_mu(self) -> np.ndarray:
        return -self.u_pot

    @property
    def log_eta(self) -> np.ndarray:
        return -self.v_pot

    @property
    def log_w(self) -> np.ndarray:
        return np.log(self.grid.weights)


def _normalize_potential(raw: np.ndarray, log_w: np.ndarray, what: str) -> np.ndarray:
    log_z = logsumexp(-raw + log_w)
    if not np.isfinite(log_z):
        raise DomainError(f"{what} underflows to zero total mass; widen the grid or rescale")
    return raw + log_z


def build_model(u_fn, v_fn, w_fn, grid: Grid) -> DiscreteModel:
    """Tabulate and normalize a potential triple on a grid.

    u_fn and v_fn map an (N, dim) array of points to length-N potential
    values; w_fn maps two point arrays to the (N, N) channel potential
    table.  The marginal potentials are shifted so the densities integrate
    to one; the channel table is shifted row by row so every row of the
    kernel integrates to one (a normalization the recursion tolerates).
    """
    pts = grid.points
    log_w = np.log(grid.weights)
    u_raw = np.asarray(u_fn(pts), dtype=float)
    v_raw = np.asarray(v_fn(pts), dtype=float)
    w_raw = np.asarray(w_fn(pts, pts), dtype=float)
    if u_raw.shape != (grid.size,) or v_raw.shape != (grid.size,):
        raise ShapeError("marginal potential tables must have shape (N,)")
    if w_raw.shape != (grid.size, grid.size):
        raise ShapeError(f"channel table must be (N, N), got {w_raw.shape}")
    # +inf encodes a hard zero of the density and is legal; NaN and -inf are not
    for tab, what in ((u_raw, "U"), (v_raw, "V"), (w_raw, "W")):
        if np.any(np.isnan(tab)) or np.any(tab == -np.inf):
            raise DomainError(f"{what} table contains NaN or -inf entries")

    u_pot = _normalize_potential(u_raw, log_w, "mu")
    v_pot = _normalize_potential(v_raw, log_w, "eta")
    row_log_z = logsumexp(-w_raw + log_w[None, :], axis=1)
    if not np.all(np.isfinite(row_log_z)):
        raise DomainError("a channel row underflows entirely: grid too narrow for this kernel")
    w_pot = w_raw + row_log_z[:, None]
    return DiscreteModel(grid, u_pot, v_pot, w_pot)


@dataclass(frozen=True)
class SinkhornState:
    """Potential tables (U_n, V_n) after n alternating half-steps."""

    model: DiscreteModel
    n: int
    u: np.ndarray
    v: np.ndarray


def _update_u(model: DiscreteModel, v: np.ndarray) -> np.ndarray:
    # U <- U + log K_W(exp(-V))
    return model.u_pot + logsumexp(-model.w_pot - v[None, :] + model.log_w[None, :], axis=1)


def _update_v(model: DiscreteModel, u: np.ndarray) -> np.ndarray:
    # V <- V + log K_{W-flat}(exp(-U))
    return model.v_pot + logsumexp(-model.w_pot - u[:, None] + model.log_w[:, None], axis=0)


def initial_state(model: DiscreteModel) -> SinkhornState:
    """State n = 0: V_0 identically zero, U_0 its induced update."""
    v0 = np.zeros(model.grid.size)
    return SinkhornState(model, 0, _update_u(model, v0), v0)


def sinkhorn_step(state: SinkhornState) -> SinkhornState:
    """One alternating half-step in the log domain.

    Even -> odd updates the second potential (the new plan then has exact
    second marginal eta); odd -> even updates the first (exact first
    marginal mu).  Potentials are shared across the pairing
    U_{2n} = U_{2n+1} and V_{2n+1} = V_{2n+2}.
    """
    model = state.model
    if state.n % 2 == 0:
        return SinkhornState(model, state.n + 1, state.u, _update_v(model, state.u))
    return SinkhornState(model, state.n + 1, _update_u(model, state.v), state.v)


def plan_log_density(state: SinkhornState) -> np.ndarray:
    """Log density table of the coupling described by a state."""
    return -(state.u[:, None] + state.model.w_pot + state.v[None, :])


def plan_marginals(state: SinkhornState) -> tuple[np.ndarray, np.ndarray]:
    """Log densities of the two marginals of the state's coupling."""
    lp = plan_log_density(state)
    log_w = state.model.log_w
    first = logsumexp(lp + log_w[None, :], axis=1)
    second = logsumexp(lp + log_w[:, None], axis=0)
    return first, second


def marginal_residuals(state: SinkhornState) -> tuple[float, float]:
    """Sup-norm of the marginal log-ratios against mu and eta."""
    first, second = plan_marginals(state)
    r_mu = float(np.max(np.abs(first - state.model.log_mu)))
    r_eta = float(np.max(np.abs(second - state.model.log_eta)))
    return r_mu, r_eta


def relative_entropy(log_p: np.ndarray, log_q: np.ndarray, weights: np.ndarray) -> float:
    """KL divergence between two densities tabulated on the same nodes."""
    p = np.exp(log_p)
    val = float(np.sum(weights * p * (log_p - log_q)))
    return max(val, 0.0)


def joint_relative_entropy(log_p: np.ndarray, log_q: np.ndarray, weights: np.ndarray) -> float:
    w2 = weights[:, None] * weights[None, :]
    p = np.exp(log_p)
    return max(float(np.sum(w2 * p * (log_p - log_q))), 0.0)


@dataclass
class SinkhornTrace:
    """Per-half-step potentials and marginal entropies of one run."""

    model: DiscreteModel
    states: list = field(default_factory=list)
    converged: bool = False
    # entropy sequences indexed by sweep n
    h_pi2n_eta: list = field(default_factory=list)
    h_eta_pi2n: list = field(default_factory=list)
    h_mu_pi2n1: list = field(default_factory=list)  # entry n holds H(mu | pi_{2n+1})
    h_pi2n1_mu: list = field(default_factory=list)
    residuals: list = field(default_factory=list)

    @property
    def n_sweeps(self) -> int:
        return len(self.h_pi2n_eta) - 1


def run(model: DiscreteModel, n_sweeps: int, tol: float = 1e-10) -> SinkhornTrace:
    """Alternate potential updates until the marginal flows settle.

    Parameters
    ----------
    model : DiscreteModel
    n_sweeps : int
        Maximum number of update pairs.
    tol : float
        Stop once the sup-norm of both marginal log-ratios falls below tol.

    Returns
    -------
    SinkhornTrace
        States for every half-step plus the four marginal entropy
        sequences.  ``converged`` is False when n_sweeps ran out first; the
        partial trace is still returned.
    """
    if n_sweeps < 1:
        raise DomainError("n_sweeps must be >= 1")
    log_w = model.log_w
    trace = SinkhornTrace(model)
    state = initial_state(model)

    for _ in range(n_sweeps + 1):
        # state has even index 2n here
        trace.states.append(state)
        _, pi_even = plan_marginals(state)
        trace.h_pi2n_eta.append(relative_entropy(pi_even, model.log_eta, model.grid.weights))
        trace.h_eta_pi2n.append(relative_entropy(model.log_eta, pi_even, model.grid.weights))

        state = sinkhorn_step(state)
        trace.states.append(state)
        pi_odd, _ = plan_marginals(state)
        trace.h_mu_pi2n1.append(relative_entropy(model.log_mu, pi_odd, model.grid.weights))
        trace.h_pi2n1_mu.append(relative_entropy(pi_odd, model.log_mu, model.grid.weights))

        r_eta = float(np.max(np.abs(pi_even - model.log_eta)))
        r_mu = float(np.max(np.abs(pi_odd - model.log_mu)))
        trace.residuals.append(max(r_eta, r_mu))
        if trace.residuals[-1] < tol:
            trace.converged = True
            break
        state = sinkhorn_step(state)
    return trace


def bridge_oracle(model: DiscreteModel, tol: float = 1e-13, max_sweeps: int = 100000) -> SinkhornState:
    """Brute-force converged coupling, the reference for bridge-gap entropies.

    Iterates until both marginal residuals of the even-type plan are below
    tol (the first marginal is exact by construction, the second is driven
    to eta).  Raises on non-convergence.
    """
    state = initial_state(model)
    for _ in range(max_sweeps):
        _, second = plan_marginals(state)
        gap = float(np.max(np.abs(np.exp(second - model.log_eta) - 1.0)))
        if gap < tol:
            r_mu, r_eta = marginal_residuals(state)
            if max(r_mu, r_eta) < 10 * tol:
                return state
        state = sinkhorn_step(sinkhorn_step(state))
    raise DomainError(f"bridge oracle did not converge to {tol} in {max_sweeps} sweeps")


def entropy_report(trace: SinkhornTrace, oracle: SinkhornState) -> dict:
    """Assemble the entropy table of a run against a converged reference.

    Returns per-sweep sequences for the four marginal entropies, the
    bridge-gap entropies H(ref | plan_n) for even and odd half-steps, and
    the residuals of the two telescoping identities
        H(ref|P_{2n}) = H(ref|P_{2n-1}) - H(mu|pi_{2n-1})
        H(ref|P_{2n+1}) = H(ref|P_{2n}) - H(eta|pi_{2n}).
    """
    model = trace.model
    w = model.grid.weights
    ref = plan_log_density(oracle)
    h_even = []
    h_odd = []
    for state in trace.states:
        val = joint_relative_entropy(ref, plan_log_density(state), w)
        (h_even if state.n % 2 == 0 else h_odd).append(val)

    tele_even = []  # n >= 1: H(ref|P_2n) vs H(ref|P_{2n-1}) - H(mu|pi_{2n-1})
    for n in range(1, len(h_even)):
        tele_even.append(h_even[n] - (h_odd[n - 1] - trace.h_mu_pi2n1[n - 1]))
    tele_odd = []  # H(ref|P_{2n+1}) vs H(ref|P_{2n}) - H(eta|pi_{2n})
    for n in range(len(h_odd)):
        tele_odd.append(h_odd[n] - (h_even[n] - trace.h_eta_pi2n[n]))

    return {
        "H_pi2n_eta": list(trace.h_pi2n_eta),
        "H_mu_pi2n1": list(trace.h_mu_pi2n1),
        "H_eta_pi2n": list(trace.h_eta_pi2n),
        "H_pi2n1_mu": list(trace.h_pi2n1_mu),
        "H_bridge_even": h_even,
        "H_bridge_odd": h_odd,
        "telescope_even_residuals": tele_even,
        "telescope_odd_residuals": tele_odd,
    }


def matrix_scaling_plans(model: DiscreteModel, n_half_steps: int) -> list[np.ndarray]:
    """Independent oracle: classical row/column scaling in the mass domain.

    Starts from the reference plan mass matrix and alternately rescales
    columns to the eta masses and rows to the mu masses.  Returns the mass
    matrices after 0, 1, ..., n_half_steps corrections; these must match
    the potential-recursion plans exactly.
    """
    w = model.grid.weights
    a = np.exp(model.log_mu) * w
    b = np.exp(model.log_eta) * w
    plan = a[:, None] * np.exp(-model.w_pot) * w[None, :]
    plans = [plan.copy()]
    for n in range(n_half_steps):
        if n % 2 == 0:
            plan = plan * (b / plan.sum(axis=0))[None, :]
        else:
            plan = plan * (a / plan.sum(axis=1))[:, None]
        plans.append(plan.copy())
    return plans


def plan_mass(state: SinkhornState) -> np.ndarray:
    """Mass matrix (density times product weights) of a state's coupling."""
    w = state.model.grid.weights
    return np.exp(plan_log_density(state)) * w[:, None] * w[None, :]


def conditional_moments(state: SinkhornState) -> tuple[np.ndarray, np.ndarray]:
    """Per-row conditional mean and covariance of the second coordinate.

    Returns arrays of shape (N, dim) and (N, dim, dim): the moments of
    y | x = x_i under the coupling.
    """
    model = state.model
    lp = plan_log_density(state)
    log_cond = lp + model.log_w[None, :] - logsumexp(lp + model.log_w[None, :], axis=1, keepdims=True)
    cond = np.exp(log_cond)
    pts = model.grid.points
    means = cond @ pts
    centered = pts[None, :, :] - means[:, None, :]
    covs = np.einsum("ij,ijk,ijl->ikl", cond, centered, centered)
    return means, covs


def mean_conditional_cov(state: SinkhornState) -> np.ndarray:
    """Mu-weighted average conditional covariance of the coupling."""
    model = state.model
    _, covs = conditional_moments(state)
    mass = np.exp(model.log_mu) * model.grid.weights
    return np.einsum("i,ikl->kl", mass, covs) / mass.sum()
