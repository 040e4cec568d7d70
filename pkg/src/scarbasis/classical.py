"""Classical mechanics of the coupled quartic oscillator.

The Hamiltonian is H = (px^2 + py^2)/2 + x^2 y^2 / 2 + (beta/4)(x^4 + y^4)
with unit mass.  Phase-space states are length-4 arrays [x, y, px, py].
The potential is homogeneous of degree four, so all dynamics at one energy
map onto any other energy by power-law scaling of coordinates, momenta,
action and time; orbits are stored at the reference energy E = 1 and scaled
on demand.

Provides flow integration (with accumulated action), mechanical-similarity
scaling, Poincare sections, Newton refinement of periodic orbits with
variational (monodromy) integration, stability exponents, and the
half-turn winding count of the invariant-manifold directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    DegenerateGuessError,
    IntegrationError,
    MarginalOrbitError,
    RefinementError,
    WindingResolutionError,
)

__all__ = [
    "HamiltonianParams",
    "Trajectory",
    "PeriodicOrbit",
    "MonodromyResult",
    "phase_state",
    "potential",
    "potential_gradient",
    "potential_hessian",
    "eval_hamiltonian",
    "flow_field",
    "integrate",
    "scale_state",
    "scale_action",
    "scale_period",
    "scale_orbit",
    "poincare_section",
    "refine_periodic_orbit",
    "compute_monodromy",
    "compute_winding",
    "relevance",
    "load_orbit_table",
    "save_orbit_table",
    "builtin_orbit_table_path",
]


@dataclass(frozen=True)
class HamiltonianParams:
    """Coupling strength and action scale of the model."""

    beta: float = 0.01
    hbar: float = 1.0

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")


def phase_state(x, y, px, py):
    """Pack coordinates into the canonical [x, y, px, py] array."""
    z = np.array([x, y, px, py], dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("phase-space components must be finite")
    return z


def potential(x, y, params):
    return 0.5 * x * x * y * y + 0.25 * params.beta * (x**4 + y**4)


def potential_gradient(x, y, params):
    b = params.beta
    return np.array([x * y * y + b * x**3, x * x * y + b * y**3])


def potential_hessian(x, y, params):
    b = params.beta
    return np.array(
        [
            [y * y + 3.0 * b * x * x, 2.0 * x * y],
            [2.0 * x * y, x * x + 3.0 * b * y * y],
        ]
    )


def eval_hamiltonian(state, params):
    """Total energy of a phase-space state."""
    z = np.asarray(state, dtype=float)
    return 0.5 * (z[2] ** 2 + z[3] ** 2) + potential(z[0], z[1], params)


def flow_field(state, params):
    """Hamiltonian vector field (dx, dy, dpx, dpy)/dt."""
    z = np.asarray(state, dtype=float)
    gx, gy = potential_gradient(z[0], z[1], params)
    return np.array([z[2], z[3], -gx, -gy])


@dataclass
class Trajectory:
    """Densely sampled piece of a classical trajectory.

    ``actions`` holds the accumulated S_t = int_0^t (px^2 + py^2) dtau;
    ``windings`` (when present) holds the accumulated half-turn count mu_t
    of the invariant-manifold directions.
    """

    times: np.ndarray
    states: np.ndarray  # shape (n, 4)
    actions: np.ndarray
    windings: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        self.actions = np.asarray(self.actions, dtype=float)

    def energies(self, params):
        z = self.states
        return 0.5 * (z[:, 2] ** 2 + z[:, 3] ** 2) + potential(z[:, 0], z[:, 1], params)

    def interp_state(self, t):
        """Cubic-Hermite interpolation of the state at arbitrary times."""
        return _hermite_state(self.times, self.states, np.asarray(t, dtype=float), self._params_cache)

    # filled by integrate(); kept out of __init__ on purpose
    _params_cache: HamiltonianParams = field(default=None, repr=False, compare=False)


@dataclass
class MonodromyResult:
    """Transversal monodromy data of a periodic orbit."""

    transversal_matrix: np.ndarray
    eigenvalues: np.ndarray
    lam: float
    hyperbolic_with_reflection: bool
    low_confidence: bool = False


@dataclass
class PeriodicOrbit:
    """Closed trajectory at E = 1 plus its classical metadata."""

    id: int
    initial_state: np.ndarray
    period: float
    action: float
    lam: float
    mu: int
    n_s: int = 1
    n_t: int = 1
    path: Trajectory | None = None

    @property
    def energy(self):
        return 1.0

    def __post_init__(self):
        self.initial_state = np.asarray(self.initial_state, dtype=float)


# ----------------------------------------------------------------------
# flow integration


def _rhs(t, z, params):
    gx, gy = potential_gradient(z[0], z[1], params)
    return (z[2], z[3], -gx, -gy, z[2] ** 2 + z[3] ** 2)


def _rhs_variational(t, w, params):
    # w = [x, y, px, py, S, J11..J44 row-major]
    z = w[:4]
    gx, gy = potential_gradient(z[0], z[1], params)
    hess = potential_hessian(z[0], z[1], params)
    jac = w[5:].reshape(4, 4)
    djac = np.empty((4, 4))
    djac[0] = jac[2]
    djac[1] = jac[3]
    djac[2] = -(hess[0, 0] * jac[0] + hess[0, 1] * jac[1])
    djac[3] = -(hess[1, 0] * jac[0] + hess[1, 1] * jac[1])
    out = np.empty(21)
    out[0] = z[2]
    out[1] = z[3]
    out[2] = -gx
    out[3] = -gy
    out[4] = z[2] ** 2 + z[3] ** 2
    out[5:] = djac.ravel()
    return out


def _hermite_state(times, states, t_query, params):
    """Piecewise-cubic state interpolation using exact flow derivatives."""
    t_query = np.atleast_1d(t_query)
    idx = np.clip(np.searchsorted(times, t_query) - 1, 0, len(times) - 2)
    t0 = times[idx]
    h = times[idx + 1] - t0
    s = (t_query - t0) / h
    z0 = states[idx]
    z1 = states[idx + 1]
    d0 = np.array([flow_field(z, params) for z in z0])
    d1 = np.array([flow_field(z, params) for z in z1])
    s = s[:, None]
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    out = h00 * z0 + h10 * h[:, None] * d0 + h01 * z1 + h11 * h[:, None] * d1
    return out


def integrate(state, t_final, tol=1e-10, params=None, n_samples=None):
    """Integrate the flow over [0, t_final], accumulating the action.

    The adaptive integrator is driven well below ``tol``; afterwards the
    relative energy drift along the returned samples is checked against
    ``tol`` and an :class:`IntegrationError` is raised on violation.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    params = params or HamiltonianParams()
    z0 = np.asarray(state, dtype=float)
    if t_final == 0.0:
        traj = Trajectory(np.array([0.0]), z0[None, :].copy(), np.array([0.0]))
        traj._params_cache = params
        return traj
    if n_samples is None:
        n_samples = max(129, int(np.ceil(64 * abs(t_final))) + 1)
    t_eval = np.linspace(0.0, t_final, n_samples)
    rtol = min(1e-10, 0.01 * tol)
    sol = solve_ivp(
        _rhs,
        (0.0, t_final),
        np.append(z0, 0.0),
        method="DOP853",
        t_eval=t_eval,
        rtol=rtol,
        atol=rtol,
        args=(params,),
        dense_output=False,
    )
    if not sol.success:
        raise IntegrationError(f"flow integration failed: {sol.message}")
    states = sol.y[:4].T.copy()
    actions = sol.y[4].copy()
    traj = Trajectory(sol.t.copy(), states, actions)
    traj._params_cache = params
    e = traj.energies(params)
    e0 = e[0]
    drift = np.max(np.abs(e - e0)) / max(abs(e0), 1.0)
    if drift > tol:
        raise IntegrationError(f"energy drift {drift:.3e} exceeds tolerance {tol:.3e}")
    return traj


def _flow_with_jacobian(z0, t_final, params, t_eval=None, rtol=1e-12):
    w0 = np.concatenate([np.asarray(z0, dtype=float), [0.0], np.eye(4).ravel()])
    sol = solve_ivp(
        _rhs_variational,
        (0.0, t_final),
        w0,
        method="DOP853",
        t_eval=t_eval,
        rtol=rtol,
        atol=rtol,
        args=(params,),
    )
    if not sol.success:
        raise IntegrationError(f"variational integration failed: {sol.message}")
    return sol


# ----------------------------------------------------------------------
# mechanical similarity (homogeneous quartic potential)


def _check_energies(e_from, e_to):
    if e_from <= 0 or e_to <= 0:
        raise ValueError("energies must be positive for similarity scaling")


def scale_state(state, e_from, e_to):
    """Map a state on shell E_from onto shell E_to."""
    _check_energies(e_from, e_to)
    r = e_to / e_from
    z = np.asarray(state, dtype=float)
    out = np.empty_like(z)
    out[..., :2] = r**0.25 * z[..., :2]
    out[..., 2:] = r**0.5 * z[..., 2:]
    return out


def scale_action(s, e_from, e_to):
    _check_energies(e_from, e_to)
    return (e_to / e_from) ** 0.75 * np.asarray(s, dtype=float)


def scale_period(t, e_from, e_to):
    _check_energies(e_from, e_to)
    return (e_to / e_from) ** -0.25 * np.asarray(t, dtype=float)


def scale_orbit(po, e_to):
    """Similarity image of a stored E = 1 orbit at energy ``e_to``.

    The stability exponent scales like 1/time; the winding count is a
    topological invariant and stays fixed.
    """
    r = float(e_to)
    _check_energies(1.0, r)
    path = None
    if po.path is not None:
        path = Trajectory(
            scale_period(po.path.times, 1.0, r),
            scale_state(po.path.states, 1.0, r),
            scale_action(po.path.actions, 1.0, r),
            None if po.path.windings is None else po.path.windings.copy(),
        )
        path._params_cache = po.path._params_cache
    return replace(
        po,
        initial_state=scale_state(po.initial_state, 1.0, r),
        period=scale_period(po.period, 1.0, r),
        action=scale_action(po.action, 1.0, r),
        lam=po.lam * r**0.25,
        path=path,
    )


# ----------------------------------------------------------------------
# Poincare section


_COORD = {"x": 0, "y": 1}


def poincare_section(traj, coord="y", sign=1, value=0.0, params=None):
    """Interpolated crossings of a coordinate plane.

    Returns an array of section states (shape (m, 4)) where the chosen
    coordinate equals ``value`` and its conjugate momentum has the given
    sign.  Crossing times are located on the cubic-Hermite interpolant of
    the stored samples.
    """
    params = params or traj._params_cache or HamiltonianParams()
    i = _COORD[coord]
    q = traj.states[:, i] - value
    p = traj.states[:, i + 2]
    cross = np.nonzero((q[:-1] * q[1:] < 0) | ((q[:-1] == 0) & (q[1:] != 0)))[0]
    hits = []
    times = []
    for k in cross:
        t0, t1 = traj.times[k], traj.times[k + 1]
        # bisection on the Hermite interpolant
        a, b = t0, t1
        fa = q[k]
        for _ in range(60):
            m = 0.5 * (a + b)
            fm = _hermite_state(traj.times, traj.states, m, params)[0, i] - value
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
            if b - a < 1e-14 * max(1.0, abs(t1)):
                break
        t_hit = 0.5 * (a + b)
        z = _hermite_state(traj.times, traj.states, t_hit, params)[0]
        if sign == 0 or np.sign(z[i + 2]) == np.sign(sign) or z[i + 2] == 0:
            hits.append(z)
            times.append(t_hit)
    if not hits:
        return np.empty((0, 4)), np.empty(0)
    return np.array(hits), np.array(times)


# ----------------------------------------------------------------------
# periodic-orbit refinement and stability


def refine_periodic_orbit(
    guess,
    period_guess,
    params=None,
    tol=1e-9,
    max_iter=60,
    orbit_id=0,
    n_s=1,
    n_t=1,
    target_energy=1.0,
    path_samples=4096,
    reject_marginal=True,
):
    """Newton-polish a near-closed orbit into a :class:`PeriodicOrbit`.

    Unknowns are the initial state and the period; the residual couples the
    return-map closure with an energy pin at ``target_energy`` and a phase
    anchor transverse to the flow at the guess.  The Jacobian uses the
    variationally integrated monodromy.  On success the orbit carries its
    action, stability exponent and winding count, and a densely sampled
    path over one period.
    """
    params = params or HamiltonianParams()
    z = np.asarray(guess, dtype=float).copy()
    T = float(period_guess)
    if T <= 0:
        raise ValueError("period guess must be positive")
    f_anchor = flow_field(z, params)
    if np.linalg.norm(f_anchor) == 0:
        raise DegenerateGuessError("guess is an equilibrium point")
    f_anchor = f_anchor / np.linalg.norm(f_anchor)
    z_ref = z.copy()

    converged = False
    for _ in range(max_iter):
        sol = _flow_with_jacobian(z, T, params, t_eval=[0.0, T])
        zT = sol.y[:4, -1]
        jac = sol.y[5:, -1].reshape(4, 4)
        r_close = zT - z
        r_energy = eval_hamiltonian(z, params) - target_energy
        r_anchor = f_anchor @ (z - z_ref)
        res = np.concatenate([r_close, [r_energy, r_anchor]])
        if np.linalg.norm(r_close) <= tol and abs(r_energy) <= tol:
            converged = True
            break
        grad_h = np.array([*potential_gradient(z[0], z[1], params), z[2], z[3]])
        big = np.zeros((6, 5))
        big[:4, :4] = jac - np.eye(4)
        big[:4, 4] = flow_field(zT, params)
        big[4, :4] = grad_h
        big[5, :4] = f_anchor
        try:
            step, *_ = np.linalg.lstsq(big, -res, rcond=None)
        except np.linalg.LinAlgError as exc:
            raise DegenerateGuessError(f"singular refinement system: {exc}") from exc
        if not np.all(np.isfinite(step)):
            raise DegenerateGuessError("refinement step is not finite")
        # damped update, never letting the period collapse
        scale = 1.0
        if abs(step[4]) > 0.2 * T:
            scale = 0.2 * T / abs(step[4])
        z = z + scale * step[:4]
        T = max(T + scale * step[4], 0.05 * float(period_guess))
    if not converged:
        raise RefinementError(
            f"orbit refinement did not converge (closure {np.linalg.norm(r_close):.2e})"
        )

    # dense path with action over one period
    t_eval = np.linspace(0.0, T, path_samples + 1)
    sol = _flow_with_jacobian(z, T, params, t_eval=t_eval)
    path = Trajectory(sol.t.copy(), sol.y[:4].T.copy(), sol.y[4].copy())
    path._params_cache = params
    jac_samples = sol.y[5:].T.reshape(-1, 4, 4)
    action = float(path.actions[-1])

    mono = _monodromy_from_samples(path, jac_samples, params)
    if reject_marginal and abs(np.trace(mono.transversal_matrix)) < 2.0 + 1e-6:
        raise MarginalOrbitError(
            f"orbit is marginal/stable (|tr M| = {abs(np.trace(mono.transversal_matrix)):.6f})"
        )
    mu_t, mu = _winding_from_samples(path, jac_samples, mono, params)
    path.windings = mu_t
    return PeriodicOrbit(
        id=orbit_id,
        initial_state=z,
        period=T,
        action=action,
        lam=mono.lam,
        mu=mu,
        n_s=n_s,
        n_t=n_t,
        path=path,
    )


def _frame_vectors(z, params):
    """Flow direction, shell normal and a symplectic transverse pair at z."""
    f = flow_field(z, params)
    grad_h = np.array([*potential_gradient(z[0], z[1], params), z[2], z[3]])
    # omega(f, g) = 1 for g = grad_h / |grad_h|^2
    g = grad_h / (grad_h @ grad_h)
    v = np.linalg.norm(z[2:4])
    if v > 1e-12:
        n = np.array([-z[3], z[2]]) / v
    else:
        a = potential_gradient(z[0], z[1], params)
        n = np.array([-a[1], a[0]])
        n = n / np.linalg.norm(n)
    t1 = np.array([n[0], n[1], 0.0, 0.0])
    t2 = np.array([0.0, 0.0, n[0], n[1]])
    # omega-orthogonalize against the (f, g) symplectic pair
    for t in (t1, t2):
        t -= _omega(t, g) * f - _omega(t, f) * g
    w = _omega(t1, t2)
    t2 = t2 / w
    return f, g, t1, t2


_J = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])


def _omega(u, v):
    return u @ (_J @ v)


def _reduce_monodromy(jac, z, params):
    """Project the 4x4 monodromy onto the transverse symplectic plane at z."""
    f, g, t1, t2 = _frame_vectors(z, params)
    m1 = jac @ t1
    m2 = jac @ t2
    red = np.array(
        [
            [_omega(m1, t2), _omega(m2, t2)],
            [-_omega(m1, t1), -_omega(m2, t1)],
        ]
    )
    return red, (t1, t2)


def _monodromy_from_samples(path, jac_samples, params):
    # reduce at the sample of largest speed; eigenvalues are base-point free
    speeds = np.linalg.norm(path.states[:, 2:4], axis=1)
    k_ref = int(np.argmax(speeds[:-1]))
    z_ref = path.states[k_ref]
    j_ref = jac_samples[k_ref]
    j_total = jac_samples[-1]
    # monodromy based at z_ref: J(T at ref) = J_ref_fwd = J(t_ref + T) J(t_ref)^-1
    # with J(t_ref + T) = J(T) after one period times J(t_ref)
    m_ref4 = j_ref @ j_total @ np.linalg.inv(j_ref)
    red, _ = _reduce_monodromy(m_ref4, z_ref, params)
    T = path.times[-1]
    eigvals = np.linalg.eigvals(red)
    eigvals = np.real_if_close(eigvals, tol=1e6)
    mags = np.abs(eigvals)
    lam = float(np.log(max(mags.max(), 1.0)) / T)
    trace = np.trace(red)
    low_conf = abs(abs(trace) - 2.0) < 1e-6
    return MonodromyResult(
        transversal_matrix=red,
        eigenvalues=np.sort(np.real(eigvals)),
        lam=lam,
        hyperbolic_with_reflection=bool(np.real(trace) < -2.0),
        low_confidence=low_conf,
    )


def compute_monodromy(po, params=None):
    """Transversal monodromy matrix, eigenvalues and stability exponent."""
    params = params or HamiltonianParams()
    t_eval = np.linspace(0.0, po.period, 2049)
    sol = _flow_with_jacobian(po.initial_state, po.period, params, t_eval=t_eval)
    path = Trajectory(sol.t.copy(), sol.y[:4].T.copy(), sol.y[4].copy())
    path._params_cache = params
    jac_samples = sol.y[5:].T.reshape(-1, 4, 4)
    return _monodromy_from_samples(path, jac_samples, params)


def _turning_times(path, params):
    """Times of momentum reversals (|p| minima near zero) along a closed path.

    The path is treated cyclically, so a reversal sitting exactly at the
    period boundary is counted once (attributed to t = T).
    """
    p2 = np.sum(path.states[:, 2:4] ** 2, axis=1)
    scale = p2.max()
    grads = np.array([potential_gradient(z[0], z[1], params) for z in path.states])
    dp2 = -2.0 * np.einsum("ij,ij->i", path.states[:, 2:4], grads)
    n = len(path.times) - 1  # final sample duplicates the initial one
    period = path.times[-1]
    turns = []
    for k in range(n):
        k2 = (k + 1) % n
        if dp2[k] < 0 <= dp2[k2] and min(p2[k], p2[k2]) < 1e-8 * scale:
            if k2 == 0:  # reversal sitting at the period boundary
                turns.append(period)
            else:
                turns.append(0.5 * (path.times[k] + path.times[k + 1]))
    return sorted(turns)


def _winding_from_samples(path, jac_samples, mono, params):
    """Continuous half-turn count mu_t of the unstable-manifold direction.

    The manifold vector is transported with the linearized flow and charted
    in the co-moving (normal displacement, normal momentum) plane, with the
    flow component projected out.  Momentum reversals of the orbit each
    contribute one half turn (the chart normal flips there).
    """
    n_pts = len(path.times)
    red = mono.transversal_matrix
    eigvals, eigvecs = np.linalg.eig(red)
    k_u = int(np.argmax(np.abs(eigvals)))
    # embed the eigenvector at the monodromy's reference sample
    speeds = np.linalg.norm(path.states[:, 2:4], axis=1)
    k_ref = int(np.argmax(speeds[:-1]))
    _, _, t1r, t2r = _frame_vectors(path.states[k_ref], params)
    vec_ref = np.real(eigvecs[0, k_u]) * t1r + np.real(eigvecs[1, k_u]) * t2r
    # transport back to t = 0
    vec0 = np.linalg.solve(jac_samples[k_ref], vec_ref)

    # normals kept continuous (no flips); reversals handled via turn count
    vels = path.states[:, 2:4]
    normals = np.empty((n_pts, 2))
    prev = None
    for k in range(n_pts):
        v = vels[k]
        nv = np.linalg.norm(v)
        if nv > 1e-9:
            n = np.array([-v[1], v[0]]) / nv
        elif prev is not None:
            n = prev
        else:
            a = potential_gradient(path.states[k, 0], path.states[k, 1], params)
            n = np.array([-a[1], a[0]])
            n = n / np.linalg.norm(n)
        if prev is not None and n @ prev < 0:
            n = -n
        normals[k] = n
        prev = n

    angles = np.empty(n_pts)
    for k in range(n_pts):
        xi = jac_samples[k] @ vec0
        f = flow_field(path.states[k], params)
        fn = f / (f @ f)
        xi = xi - (xi @ f) * fn  # remove flow component (euclidean gauge)
        a = xi[:2] @ normals[k]
        b = xi[2:] @ normals[k]
        angles[k] = np.arctan2(b, a)
    dtheta = np.diff(angles)
    dtheta = (dtheta + np.pi) % (2 * np.pi) - np.pi
    if np.max(np.abs(dtheta)) > 0.5 * np.pi:
        raise WindingResolutionError(
            "angle step exceeds pi/2; increase the path sampling density"
        )
    sweep = np.concatenate([[0.0], np.cumsum(dtheta)])
    total = sweep[-1]
    # conjugate-point rotation is clockwise in this chart; orient the count
    # so it accumulates positively (hyperbolic wobble leaves it near zero)
    orient = -1.0 if total < 0 else 1.0
    mu_cont = orient * sweep / np.pi
    turns = _turning_times(path, params)
    turn_steps = np.searchsorted(turns, path.times, side="right").astype(float)
    # drop a spurious turn registered exactly at t = 0 duplicate of t = T
    mu_t = mu_cont + turn_steps
    mu_final = mu_t[-1]
    mu_int = int(round(mu_final))
    if abs(mu_final - mu_int) > 0.1:
        raise WindingResolutionError(
            f"winding count {mu_final:.4f} is not close to an integer"
        )
    # parity must match the monodromy eigenvalue sign
    negative = mono.hyperbolic_with_reflection
    if (mu_int % 2 == 1) != negative:
        # the sweep orientation was ambiguous; trust parity and re-round
        alt = int(round(-mu_cont[-1] + turn_steps[-1]))
        if (alt % 2 == 1) == negative and abs(-mu_cont[-1] + turn_steps[-1] - alt) <= 0.1:
            mu_t = -mu_cont + turn_steps
            mu_int = alt
        else:
            raise WindingResolutionError(
                f"winding parity ({mu_int}) inconsistent with monodromy sign"
            )
    return mu_t, mu_int


def compute_winding(po, params=None, n_samples=4096):
    """Half-turn samples mu_t over one period and the integer winding mu."""
    params = params or HamiltonianParams()
    t_eval = np.linspace(0.0, po.period, n_samples + 1)
    sol = _flow_with_jacobian(po.initial_state, po.period, params, t_eval=t_eval)
    path = Trajectory(sol.t.copy(), sol.y[:4].T.copy(), sol.y[4].copy())
    path._params_cache = params
    jac_samples = sol.y[5:].T.reshape(-1, 4, 4)
    mono = _monodromy_from_samples(path, jac_samples, params)
    mu_t, mu = _winding_from_samples(path, jac_samples, mono, params)
    return path.times, mu_t, mu


def relevance(po):
    """lambda * T * N_s * N_t with the period taken from T = (3/4) S / E."""
    period = 0.75 * po.action / po.energy
    return po.lam * period * po.n_s * po.n_t


# ----------------------------------------------------------------------
# orbit table I/O


def save_orbit_table(orbits, filepath, header=None):
    """Write orbits as `id S lambda mu N_s N_t x0 y0 px0 py0 T` lines.

    Floats are written with shortest round-trip decimals so the file is
    bit-exact under save/load cycles.
    """
    lines = []
    if header:
        for line in header.splitlines():
            lines.append(f"# {line}")
    for po in orbits:
        z = [float(v) for v in po.initial_state]
        lines.append(
            f"{po.id} {float(po.action)!r} {float(po.lam)!r} {po.mu} {po.n_s} {po.n_t} "
            f"{z[0]!r} {z[1]!r} {z[2]!r} {z[3]!r} {float(po.period)!r}"
        )
    with open(filepath, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_orbit_table(filepath):
    """Read an orbit table written by :func:`save_orbit_table`."""
    orbits = []
    with open(filepath) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 11:
                raise ValueError(f"malformed orbit line: {raw!r}")
            oid, s, lam, mu, n_s, n_t = (
                int(parts[0]),
                float(parts[1]),
                float(parts[2]),
                int(parts[3]),
                int(parts[4]),
                int(parts[5]),
            )
            z = np.array([float(p) for p in parts[6:10]])
            period = float(parts[10])
            orbits.append(
                PeriodicOrbit(
                    id=oid,
                    initial_state=z,
                    period=period,
                    action=s,
                    lam=lam,
                    mu=mu,
                    n_s=n_s,
                    n_t=n_t,
                )
            )
    return orbits


def builtin_orbit_table_path():
    from importlib.resources import files

    return str(files("scarbasis.data").joinpath("orbit_table.txt"))
