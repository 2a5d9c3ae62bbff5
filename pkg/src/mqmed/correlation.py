"""Single-mode operator-product traces and time profiles built from them.

All functions use hbar = 1 and accept scalar or array times.  The per-mode
plain trace is Tr_j[e^{-it v_b} r_a e^{+it v_a}] for the transfer a -> b
(the ordering fixed by the analytic closed forms and the derivative
identity weighted = i d/dt plain); the full bath trace multiplies the
per-mode factors with the electronic phase e^{-it(E_b - E_a)}.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .errors import DimensionCapError, NonconvergenceError, UnsupportedBathError
from .model import (
    Bath,
    GenericMode,
    HarmonicMode,
    LocalHarmonicMode,
    SpectralDensityTable,
    SpinMode,
)

GENERIC_DIM_CAP = 512
_COTH_GUARD = 1e-8


def coth_half(thermal, omega):
    """coth(beta*omega/2) with a small-argument series guard; 1 at T = 0."""
    if thermal.zero_temperature:
        return np.ones_like(np.asarray(omega, dtype=float)) if np.ndim(omega) else 1.0
    x = 0.5 * thermal.beta * np.asarray(omega, dtype=float)
    small = np.abs(x) < _COTH_GUARD
    safe = np.where(small, 1.0, x)
    out = np.where(small, 1.0 / np.where(x == 0, 1.0, x) + x / 3.0, 1.0 / np.tanh(safe))
    return out if np.ndim(omega) else float(out)


def tanh_half(thermal, omega):
    """tanh(beta*omega/2); 1 at T = 0."""
    if thermal.zero_temperature:
        return np.ones_like(np.asarray(omega, dtype=float)) if np.ndim(omega) else 1.0
    out = np.tanh(0.5 * thermal.beta * np.asarray(omega, dtype=float))
    return out if np.ndim(omega) else float(out)


# ---------------------------------------------------------------------------
# Per-mode trace factories
# ---------------------------------------------------------------------------

def _ho_functions(mode, a, b, thermal):
    dd = mode.displacement(b) - mode.displacement(a)
    if dd == 0.0:
        return (lambda t: np.ones_like(np.asarray(t, dtype=float), dtype=complex),
                lambda t: np.zeros_like(np.asarray(t, dtype=float), dtype=complex))
    w = mode.omega
    s = 0.5 * w * dd * dd            # lambda_j^{delta} / omega
    lam = s * w                       # omega^2 (d_b - d_a)^2 / 2
    c = coth_half(thermal, w)

    def plain(t):
        wt = w * np.asarray(t, dtype=float)
        return np.exp(-s * (c * (1.0 - np.cos(wt)) + 1j * np.sin(wt)))

    def weighted(t):
        wt = w * np.asarray(t, dtype=float)
        return lam * plain(t) * (np.cos(wt) - 1j * c * np.sin(wt))

    return plain, weighted


def _spin_functions(mode, thermal):
    wt_ = mode.omega_tilde
    s2 = math.sin(2.0 * mode.theta) ** 2
    c2 = 1.0 - s2
    tau = tanh_half(thermal, wt_)

    def plain(t):
        x = wt_ * np.asarray(t, dtype=float)
        return c2 + s2 * (np.cos(x) - 1j * tau * np.sin(x))

    def weighted(t):
        x = wt_ * np.asarray(t, dtype=float)
        return wt_ * s2 * (tau * np.cos(x) - 1j * np.sin(x)) + 0j

    return plain, weighted


def _thermal_weights(eigvals, thermal):
    if thermal.zero_temperature:
        gs = eigvals <= eigvals[0] + 1e-12 * max(1.0, abs(eigvals[0]))
        w = gs.astype(float)
    else:
        w = np.exp(-thermal.beta * (eigvals - eigvals[0]))
    return w / w.sum()


def _generic_functions(mode, a, b, thermal, cap=GENERIC_DIM_CAP):
    if mode.dim > cap:
        raise DimensionCapError(f"generic mode dimension {mode.dim} exceeds cap {cap}")
    va = mode.matrix(a)
    vb = mode.matrix(b)
    for label, m in ((a, va), (b, vb)):
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ValueError(f"bath operator for state {label!r} is not Hermitian")
    lam_a, ua = np.linalg.eigh(va)
    mu_b, ub = np.linalg.eigh(vb)
    w = _thermal_weights(lam_a, thermal)
    x = ub.conj().T @ ua
    p = (np.abs(x) ** 2 * w[None, :]).ravel()
    delta = (lam_a[None, :] - mu_b[:, None]).ravel()
    keep = p > 0.0
    p, delta = p[keep], delta[keep]

    def plain(t):
        t = np.asarray(t, dtype=float)
        return p @ np.exp(1j * np.outer(delta, t))

    def weighted(t):
        t = np.asarray(t, dtype=float)
        return (-p * delta) @ np.exp(1j * np.outer(delta, t))

    return plain, weighted


def mode_trace_functions(mode, a, b, thermal, cap=GENERIC_DIM_CAP):
    """(plain, weighted) evaluators for one bath mode and transfer a -> b."""
    if isinstance(mode, LocalHarmonicMode):
        mode = mode.as_general()
    if isinstance(mode, HarmonicMode):
        return _ho_functions(mode, a, b, thermal)
    if isinstance(mode, SpinMode):
        return _spin_functions(mode, thermal)
    if isinstance(mode, GenericMode):
        return _generic_functions(mode, a, b, thermal, cap=cap)
    raise UnsupportedBathError(f"unknown mode type {type(mode).__name__}")


# ---------------------------------------------------------------------------
# Public single-mode traces
# ---------------------------------------------------------------------------

def ho_trace(mode, a, b, t, thermal):
    """Analytic harmonic-mode trace for the transfer a -> b."""
    plain, _ = _ho_functions(mode if isinstance(mode, HarmonicMode) else mode.as_general(),
                             a, b, thermal)
    out = plain(t)
    return out if np.ndim(t) else complex(out)


def ho_weighted_trace(mode, a, b, t, thermal):
    """Energy-weighted harmonic trace; equals i d/dt of :func:`ho_trace`."""
    _, weighted = _ho_functions(mode if isinstance(mode, HarmonicMode) else mode.as_general(),
                                a, b, thermal)
    out = weighted(t)
    return out if np.ndim(t) else complex(out)


def spin_trace(mode, from_state, to_state, t, thermal):
    """Spin-mode trace; the two transfer directions carry the same value."""
    plain, _ = _spin_functions(mode, thermal)
    out = plain(t)
    return out if np.ndim(t) else complex(out)


def spin_weighted_trace(mode, from_state, to_state, t, thermal):
    """Energy-weighted spin trace; equals i d/dt of :func:`spin_trace`."""
    _, weighted = _spin_functions(mode, thermal)
    out = weighted(t)
    return out if np.ndim(t) else complex(out)


def generic_trace(mode, a, b, t, thermal, cap=GENERIC_DIM_CAP):
    """Numerically exact single-mode trace via eigendecomposition."""
    plain, _ = _generic_functions(mode, a, b, thermal, cap=cap)
    out = plain(t)
    return out if np.ndim(t) else complex(out)


def generic_weighted_trace(mode, a, b, t, thermal, cap=GENERIC_DIM_CAP):
    """(v_b - v_a)-weighted generic trace; equals i d/dt of the plain one."""
    _, weighted = _generic_functions(mode, a, b, thermal, cap=cap)
    out = weighted(t)
    return out if np.ndim(t) else complex(out)


def assemble_full_trace(subsystem, bath, a, b, t, thermal):
    """Full bath trace: e^{-it(E_b - E_a)} times the product of mode traces."""
    t_arr = np.asarray(t, dtype=float)
    de = subsystem.energy(b) - subsystem.energy(a)
    out = np.exp(-1j * de * t_arr).astype(complex)
    for mode in bath.modes:
        plain, _ = mode_trace_functions(mode, a, b, thermal)
        out = out * plain(t_arr)
    return out if np.ndim(t) else complex(out)


# ---------------------------------------------------------------------------
# Line-broadening functions
# ---------------------------------------------------------------------------

def _g_discrete(modes, a, b, t, thermal):
    t = np.asarray(t, dtype=float)
    g = np.zeros(t.shape, dtype=complex)
    for mode in modes:
        dd = mode.displacement(a) * mode.displacement(b)
        if dd == 0.0:
            continue
        w = mode.omega
        pref = 0.5 * w * dd
        c = coth_half(thermal, w)
        wt = w * t
        g += pref * (c * (1.0 - np.cos(wt)) + 1j * np.sin(wt)) - 1j * (pref * w) * t
    return g


def _gl_nodes_for_table(table, t_max, subdiv_scale=1.0, order=8):
    """Gauss-Legendre nodes/weights resolving oscillations up to t_max."""
    xs, ws = np.polynomial.legendre.leggauss(order)
    nodes = []
    weights = []
    for w0, w1 in zip(table.grid[:-1], table.grid[1:]):
        width = w1 - w0
        nsub = max(1, int(math.ceil(subdiv_scale * t_max * width / math.pi)))
        edges = np.linspace(w0, w1, nsub + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        nodes.append((mid[:, None] + half[:, None] * xs[None, :]).ravel())
        weights.append((half[:, None] * ws[None, :]).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def _g_table_once(table, t, thermal, subdiv_scale):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    t_max = float(np.max(np.abs(t))) if t.size else 0.0
    nodes, weights = _gl_nodes_for_table(table, max(t_max, 1e-30), subdiv_scale)
    jw = table(nodes) * weights
    coth = coth_half(thermal, nodes)
    out = np.empty(t.shape, dtype=complex)
    # chunk over t to bound the (n_nodes x n_t) temporaries
    step = max(1, int(2_000_000 / max(1, nodes.size)))
    for i in range(0, t.size, step):
        tt = t[i:i + step]
        wt = np.outer(nodes, tt)
        re = coth[:, None] * (1.0 - np.cos(wt)) / nodes[:, None] ** 2
        im = (np.sin(wt) - wt) / nodes[:, None] ** 2
        out[i:i + step] = jw @ (re + 1j * im)
    return out


def _g_table(table, t, thermal, rel_tol=1e-9):
    g1 = _g_table_once(table, t, thermal, subdiv_scale=1.0)
    g2 = _g_table_once(table, t, thermal, subdiv_scale=2.0)
    scale = 1.0 + np.max(np.abs(g2))
    if np.max(np.abs(g1 - g2)) > rel_tol * scale:
        raise NonconvergenceError("line-broadening quadrature over the table did not converge")
    return g2 if np.ndim(t) else complex(g2[0])


class TableLineBroadening:
    """g(t) for a tabulated J, cached on a dense grid with a cubic spline.

    Rate integrands sample g at thousands of times; evaluating the frequency
    quadrature once per grid knot and interpolating keeps the cost linear in
    the integration horizon.  The grid extends lazily as larger times are
    requested; each build is convergence-checked against a refined rule.
    """

    def __init__(self, table, thermal, oversample=18):
        self.table = table
        self.thermal = thermal
        self.dt = math.pi / (float(table.grid[-1]) * oversample)
        self._t_max = 0.0
        self._spline = None

    _MAX_COST = 1.2e9   # knots x frequency nodes per rebuild

    def _build(self, t_need):
        from scipy.interpolate import CubicSpline
        self._t_max = max(2.0 * t_need + 10.0 * self.dt, 64.0 * self.dt,
                          2.0 * self._t_max)
        n_knots = self._t_max / self.dt
        width = float(self.table.grid[-1] - self.table.grid[0])
        n_nodes = 8.0 * max(self._t_max * width / math.pi,
                            self.table.grid.size - 1)
        if n_knots * n_nodes > self._MAX_COST:
            raise NonconvergenceError(
                "line-broadening evaluation horizon exceeded its cost cap; "
                "the trace likely never decays (e.g. a surviving zero-phonon "
                "line at low temperature) -- set damping_eta to regularize",
                t_end=self._t_max,
            )
        knots = np.arange(0.0, self._t_max + self.dt, self.dt)
        g = _g_table_once(self.table, knots, self.thermal, subdiv_scale=1.0)
        check = knots[:: max(1, knots.size // 64)]
        g_ref = _g_table_once(self.table, check, self.thermal, subdiv_scale=2.0)
        dev = np.max(np.abs(g[:: max(1, knots.size // 64)][:g_ref.size] - g_ref))
        if dev > 1e-9 * (1.0 + np.max(np.abs(g_ref))):
            raise NonconvergenceError(
                "line-broadening quadrature over the table did not converge")
        self._spline = CubicSpline(knots, g)

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        t_top = float(np.max(t_arr)) if t_arr.size else 0.0
        if self._spline is None or t_top > self._t_max:
            self._build(t_top)
        out = self._spline(t_arr)
        return out if np.ndim(t) else complex(out[0])


def line_broadening(source, pair, t, thermal):
    """g_ab(t) from discrete harmonic modes or a tabulated spectral density.

    ``source`` may be a Bath (harmonic or sd-table) or a SpectralDensityTable.
    For sd-table baths the coupling is local, so cross pairs give g = 0.
    """
    a, b = pair
    if isinstance(source, SpectralDensityTable):
        return _g_table(source, t, thermal)
    if isinstance(source, Bath):
        if source.is_harmonic:
            out = _g_discrete(source.harmonic_modes(), a, b, t, thermal)
            return out if np.ndim(t) else complex(out)
        if source.kind == "sd-table":
            if a != b:
                z = np.zeros(np.shape(t), dtype=complex)
                return z if np.ndim(t) else 0j
            return _g_table(source.tables[a], t, thermal)
    raise UnsupportedBathError("line_broadening needs a harmonic bath or a J table")


# ---------------------------------------------------------------------------
# Spectral-time profiles
# ---------------------------------------------------------------------------

def _local_site_quantities(bath, a, thermal):
    """(Lambda_aa, g_aa evaluator) for a locally coupled bath."""
    if bath.kind == "ho-local":
        own = [m for m in bath.modes if m.owner == a]
        lam = sum(m.reorganization for m in own)
        modes = [m.as_general() for m in own]
        return lam, (lambda t: _g_discrete(modes, a, a, t, thermal))
    if bath.kind == "sd-table":
        table = bath.tables.get(a)
        if table is None:
            return 0.0, (lambda t: np.zeros(np.shape(t), dtype=complex))
        cached = TableLineBroadening(table, thermal)
        return table.reorganization_energy(), (lambda t: np.atleast_1d(cached(t)))
    raise UnsupportedBathError("spectral profiles require a locally coupled bath")


def spectral_profiles(subsystem, bath, a, t, thermal):
    """Emission/absorption time profiles (F_a(t), A_a(t)) for a local bath."""
    lam, g_fn = _local_site_quantities(bath, a, thermal)
    t_arr = np.asarray(t, dtype=float)
    g = np.asarray(g_fn(t_arr))
    e = subsystem.energy(a)
    fluor = np.exp(-1j * (e - lam) * t_arr - np.conj(g))
    absorb = np.exp(-1j * (e + lam) * t_arr - g)
    if np.ndim(t):
        return fluor, absorb
    return complex(fluor), complex(absorb)


class SpinBathProfile:
    """Spectral summaries of a spin bath in its weak-coupling description."""

    def __init__(self, js_table, lambdas, total, g_fn):
        self.js_table = js_table      # list of (omega_j, weight = gamma_j^2)
        self.lambdas = lambdas        # per-mode lambda_s^j
        self.total = total            # Lambda_s
        self._g_fn = g_fn

    def g(self, t):
        return self._g_fn(t)


def spin_bath_profiles(bath, thermal):
    """J_s line list, per-mode reorganization energies, their sum, and g_s(t)."""
    if bath.kind != "spin":
        raise UnsupportedBathError("spin_bath_profiles requires a spin bath")
    js = []
    lambdas = []
    finite = []   # (omega, gamma^2, tanh) triples entering g_s
    zero_freq = []
    for mode in bath.modes:
        g2 = mode.gamma ** 2
        js.append((mode.omega, g2))
        if mode.omega == 0.0:
            if thermal.zero_temperature:
                raise UnsupportedBathError(
                    "omega = 0 spin mode has no zero-temperature limit"
                )
            warnings.warn(
                "spin mode with omega = 0: lambda taken as gamma^2 * beta / 2",
                stacklevel=2,
            )
            lambdas.append(g2 * thermal.beta / 2.0)
            zero_freq.append(g2)
        else:
            tau = tanh_half(thermal, mode.omega)
            lambdas.append(g2 / mode.omega * tau)
            finite.append((mode.omega, g2, tau))

    def g_fn(t):
        t = np.asarray(t, dtype=float)
        g = np.zeros(t.shape, dtype=complex)
        for w, g2, tau in finite:
            wt = w * t
            g += g2 * ((1.0 - np.cos(wt)) / w ** 2
                       + 1j * tau * (np.sin(wt) - wt) / w ** 2)
        for g2 in zero_freq:
            g += 0.5 * g2 * t ** 2
        return g

    return SpinBathProfile(js, lambdas, float(sum(lambdas)), g_fn)
