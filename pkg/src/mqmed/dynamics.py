"""Population propagation and per-mode dissipated-energy accumulation.

The rate matrix is tiny (a handful of states), so populations are evaluated
from its eigendecomposition, exactly on the requested grid; the dissipated
energies integrate in closed form in the same eigenbasis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import MultipleSteadyStatesError

_EIG_POSITIVE_TOL = 1e-9
_DEGENERATE_EIG = 1e-12


@dataclass
class Trajectory:
    labels: tuple
    times: np.ndarray
    populations: np.ndarray     # (n_t, n_states)
    dissipated: np.ndarray      # (n_t, n_modes), relative to t = 0
    e_sub: np.ndarray
    residual: np.ndarray

    def population(self, label):
        return self.populations[:, self.labels.index(label)]


def rate_matrix(rateset):
    """Generator matrix M with M[j, i] = K(i -> j) and conserving columns."""
    labels = list(rateset.labels)
    n = len(labels)
    m = np.zeros((n, n))
    for (a, b), k in rateset.K.items():
        i, j = labels.index(a), labels.index(b)
        m[j, i] += k
        m[i, i] -= k
    return m


def _dissipation_weights(rateset):
    """w[j, i] such that dE_j/dt = sum_i w[j, i] P_i."""
    labels = list(rateset.labels)
    w = np.zeros((rateset.n_modes, len(labels)))
    for (j, a, b), kd in rateset.Kdiss.items():
        w[j, labels.index(a)] += kd
    return w


def propagate(rateset, p0, times, check_fallback=False):
    """Propagate populations and accumulate per-mode dissipated energies.

    p0 maps labels to initial populations (nonnegative, summing to 1).
    With ``check_fallback`` the closed-form accumulation is verified against
    an adaptive ODE integration to 1e-8 relative.
    """
    labels = tuple(rateset.labels)
    times = np.asarray(times, dtype=float)
    p_vec = np.array([p0.get(lab, 0.0) for lab in labels], dtype=float)
    if np.any(p_vec < -1e-12):
        raise ValueError("initial populations must be nonnegative")
    if abs(p_vec.sum() - 1.0) > 1e-10:
        raise ValueError("initial populations must sum to 1")

    m = rate_matrix(rateset)
    scale = max(np.max(np.abs(m)), 1e-300)
    mu, v = np.linalg.eig(m)
    if np.any(mu.real > _EIG_POSITIVE_TOL * scale):
        raise ValueError("rate matrix has a positive eigenvalue; input is ill-formed")
    v_inv = np.linalg.inv(v)
    c0 = v_inv @ p_vec

    # populations: P(t) = V e^{mu t} V^-1 P0
    phases = np.exp(np.outer(times, mu))                     # (n_t, n)
    pops = np.real((phases * c0[None, :]) @ v.T)

    # closed-form integral of e^{mu t}: (e^{mu t} - 1)/mu, -> t for mu ~ 0
    small = np.abs(mu) < _DEGENERATE_EIG * max(scale, 1.0)
    mu_safe = np.where(small, 1.0, mu)
    integ = np.where(small[None, :], times[:, None],
                     (phases - 1.0) / mu_safe[None, :])       # (n_t, n)
    w = _dissipation_weights(rateset)
    diss = np.real((integ * c0[None, :]) @ (w @ v).T)         # (n_t, n_modes)

    energies = np.array([rateset.energies.get(lab, 0.0) for lab in labels])
    e_sub = pops @ energies
    residual = (e_sub - e_sub[0]) + diss.sum(axis=1)

    traj = Trajectory(labels=labels, times=times, populations=pops,
                      dissipated=diss, e_sub=e_sub, residual=residual)
    if check_fallback:
        diss_ode = _propagate_ode(m, w, p_vec, times)
        ref = max(np.max(np.abs(diss)), 1e-300)
        if np.max(np.abs(diss_ode - diss)) > 1e-8 * ref:
            raise FloatingPointError(
                "closed-form and ODE dissipation accumulations disagree beyond 1e-8"
            )
    return traj


def _propagate_ode(m, w, p0, times):
    """Adaptive-step fallback for the dissipated-energy accumulation."""
    n = len(p0)

    def rhs(_, y):
        p = y[:n]
        return np.concatenate([m @ p, w @ p])

    y0 = np.concatenate([p0, np.zeros(w.shape[0])])
    t_span = (float(times[0]), float(times[-1]))
    sol = solve_ivp(rhs, t_span, y0, t_eval=times, rtol=1e-11, atol=1e-13,
                    method="DOP853")
    return sol.y[n:].T


def energy_ledger(trajectory):
    """Conservation residual series and its maximum magnitude."""
    residual = ((trajectory.e_sub - trajectory.e_sub[0])
                + trajectory.dissipated.sum(axis=1))
    return residual, float(np.max(np.abs(residual)))


def _connected_components(labels, K):
    adj = {lab: set() for lab in labels}
    for (a, b), k in K.items():
        if k > 0.0:
            adj[a].add(b)
            adj[b].add(a)
    seen = set()
    comps = []
    for lab in labels:
        if lab in seen:
            continue
        stack = [lab]
        comp = set()
        while stack:
            x = stack.pop()
            if x in comp:
                continue
            comp.add(x)
            stack.extend(adj[x] - comp)
        seen |= comp
        comps.append(comp)
    return comps


def steady_state(rateset):
    """Stationary populations: normalized null vector of the rate matrix."""
    comps = _connected_components(rateset.labels, rateset.K)
    if len(comps) > 1:
        raise MultipleSteadyStatesError(comps)
    m = rate_matrix(rateset)
    mu, v = np.linalg.eig(m)
    idx = int(np.argmin(np.abs(mu)))
    p = np.real(v[:, idx])
    p = p / p.sum()
    if np.any(p < -1e-10):
        raise ValueError("steady state has negative populations; rates are inconsistent")
    return {lab: float(p[i]) for i, lab in enumerate(rateset.labels)}


def write_trajectory(traj, fh, header_lines=(), mode_names=None, extra_col=None):
    """CSV export: t, P_<state>..., E_<mode>..., E_sub, residual."""
    for line in header_lines:
        fh.write(f"# {line}\n")
    n_modes = traj.dissipated.shape[1]
    if mode_names is None:
        mode_names = [str(j) for j in range(n_modes)]
    cols = (["t"] + [f"P_{lab}" for lab in traj.labels]
            + [f"E_{name}" for name in mode_names] + ["E_sub", "residual"])
    if extra_col is not None:
        cols.append(extra_col[0])
    fh.write(",".join(cols) + "\n")
    for i, t in enumerate(traj.times):
        row = [f"{t:.17g}"]
        row += [f"{x:.17g}" for x in traj.populations[i]]
        row += [f"{x:.17g}" for x in traj.dissipated[i]]
        row += [f"{traj.e_sub[i]:.17g}", f"{traj.residual[i]:.17g}"]
        if extra_col is not None:
            row.append(str(extra_col[1]))
        fh.write(",".join(row) + "\n")
