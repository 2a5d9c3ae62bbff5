"""Desk-scale brute force: exact propagation in a truncated product basis.

Builds the dense total Hamiltonian H = H_sub + sum_j h_j with each bath
component realized on a finite local space (Fock-truncated oscillator,
spin-1/2, or generic matrix), propagates rho(t) = e^{-iHt} rho(0) e^{+iHt}
through one eigendecomposition, and reads off Tr[h_j rho(t)] directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionCapError, TruncationTailError, UnsupportedBathError
from .model import GenericMode, HarmonicMode, LocalHarmonicMode, SpinMode

DIM_CAP = 8192
THERMAL_TAIL_LIMIT = 1e-8

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def ladder_operators(n_levels, omega):
    """Mass-weighted (x, p) from truncated ladder operators, hbar = 1."""
    n = np.arange(1, n_levels)
    adag = np.diag(np.sqrt(n), -1).astype(complex)
    a = adag.conj().T
    x = math.sqrt(1.0 / (2.0 * omega)) * (a + adag)
    p = 1j * math.sqrt(omega / 2.0) * (adag - a)
    return x, p


def harmonic_local_operator(omega, displacement, n_levels):
    """v = p^2/2 + (omega^2/2)(x - d)^2 on a truncated Fock space."""
    x, p = ladder_operators(n_levels, omega)
    shift = x - displacement * np.eye(n_levels)
    return 0.5 * (p @ p) + 0.5 * omega ** 2 * (shift @ shift)


def spin_local_operator(omega, gamma, sign):
    """v_(+/-) = (omega/2) sigma_z -/+ gamma sigma_x; sign = +1 or -1."""
    return 0.5 * omega * _SIGMA_Z - sign * gamma * _SIGMA_X


def _mode_local_operators(mode, labels, n_levels):
    """dict label -> local matrix, plus the local dimension."""
    if isinstance(mode, LocalHarmonicMode):
        mode_gen = mode.as_general()
        return _mode_local_operators(mode_gen, labels, n_levels)
    if isinstance(mode, HarmonicMode):
        ops = {lab: harmonic_local_operator(mode.omega, mode.displacement(lab), n_levels)
               for lab in labels}
        return ops, n_levels
    if isinstance(mode, SpinMode):
        if len(labels) != 2:
            raise UnsupportedBathError("spin modes require a two-state subsystem")
        ops = {labels[0]: spin_local_operator(mode.omega, mode.gamma, +1),
               labels[1]: spin_local_operator(mode.omega, mode.gamma, -1)}
        return ops, 2
    if isinstance(mode, GenericMode):
        ops = {lab: mode.matrix(lab) for lab in labels}
        return ops, mode.dim
    raise UnsupportedBathError(f"unknown mode type {type(mode).__name__}")


def _embed(op_local, mode_dims, j):
    """Kronecker-embed a local bath operator at mode slot j."""
    out = np.array([[1.0 + 0j]])
    for k, d in enumerate(mode_dims):
        out = np.kron(out, op_local if k == j else np.eye(d, dtype=complex))
    return out


@dataclass
class TruncatedSystem:
    labels: tuple
    mode_dims: tuple
    dim: int
    h_total: np.ndarray
    h_sub: np.ndarray
    h_modes: list            # dense h_j, one per mode
    local_ops: list          # per mode: dict label -> local matrix
    projectors: dict = field(default_factory=dict)   # label -> |A><A| x I_bath

    def local_operator(self, j, label):
        return self.local_ops[j][label]


def build_truncated(subsystem, bath, n_levels=12, cap=DIM_CAP):
    """Realize the total Hamiltonian in a truncated product basis.

    ``n_levels`` is the Fock-space size of every harmonic mode, or a sequence
    giving one size per mode (spins are 2-level, generic modes keep their own
    dimension).  H is assembled as H_sub + sum_j h_j so the split is exact in
    matrix form.
    """
    labels = tuple(subsystem.labels)
    n_states = len(labels)
    if np.ndim(n_levels) == 0:
        per_mode_levels = [int(n_levels)] * len(bath.modes)
    else:
        per_mode_levels = [int(x) for x in n_levels]
        if len(per_mode_levels) != len(bath.modes):
            raise ValueError("need one truncation level per bath mode")
    local_ops = []
    mode_dims = []
    for mode, nl in zip(bath.modes, per_mode_levels):
        ops, d = _mode_local_operators(mode, labels, nl)
        local_ops.append(ops)
        mode_dims.append(d)
    bath_dim = int(np.prod(mode_dims)) if mode_dims else 1
    dim = n_states * bath_dim
    if dim > cap:
        raise DimensionCapError(f"total dimension {dim} exceeds cap {cap}")

    eye_bath = np.eye(bath_dim, dtype=complex)
    h_sub = np.zeros((dim, dim), dtype=complex)
    projectors = {}
    for i, lab in enumerate(labels):
        proj = np.zeros((n_states, n_states), dtype=complex)
        proj[i, i] = 1.0
        proj_full = np.kron(proj, eye_bath)
        projectors[lab] = proj_full
        h_sub += subsystem.energy(lab) * proj_full
    for i, a in enumerate(labels):
        for k in range(i + 1, n_states):
            b = labels[k]
            v = subsystem.coupling(a, b)
            if v == 0.0:
                continue
            hop = np.zeros((n_states, n_states), dtype=complex)
            hop[i, k] = v
            hop[k, i] = v
            h_sub += np.kron(hop, eye_bath)

    h_modes = []
    for j in range(len(mode_dims)):
        hj = np.zeros((dim, dim), dtype=complex)
        for i, lab in enumerate(labels):
            proj = np.zeros((n_states, n_states), dtype=complex)
            proj[i, i] = 1.0
            hj += np.kron(proj, _embed(local_ops[j][lab], mode_dims, j))
        h_modes.append(hj)

    h_bath = np.zeros((dim, dim), dtype=complex)
    for hj in h_modes:
        h_bath += hj
    h_total = h_sub + h_bath
    return TruncatedSystem(labels=labels, mode_dims=tuple(mode_dims), dim=dim,
                           h_total=h_total, h_sub=h_sub, h_modes=h_modes,
                           local_ops=local_ops, projectors=projectors)


def _thermal_local(v_local, thermal):
    """Thermal density for one local operator; returns (rho, top-level weight)."""
    vals, vecs = np.linalg.eigh(v_local)
    if thermal.zero_temperature:
        w = (vals <= vals[0] + 1e-12 * max(1.0, abs(vals[0]))).astype(float)
    else:
        w = np.exp(-thermal.beta * (vals - vals[0]))
    w = w / w.sum()
    rho = (vecs * w[None, :]) @ vecs.conj().T
    top = float(np.real(rho[-1, -1]))
    return rho, top


@dataclass
class OracleResult:
    labels: tuple
    times: np.ndarray
    populations: np.ndarray
    dissipated: np.ndarray      # relative to t = 0
    e_sub: np.ndarray           # sum_A E_A P_A(t)
    trace_norm: np.ndarray
    total_energy: np.ndarray


def exact_propagation(ts, initial, thermal, times, subsystem=None):
    """Exact P_A(t) and per-mode dissipated energies from dense propagation.

    The initial state is |initial><initial| times the product of local
    thermal densities on the initial state's surface.  Refuses when a
    harmonic mode's top Fock level carries more than 1e-8 thermal weight.
    """
    labels = ts.labels
    if initial not in labels:
        raise ValueError(f"unknown initial state {initial!r}")
    times = np.asarray(times, dtype=float)

    rho_bath = np.array([[1.0 + 0j]])
    for j, ops in enumerate(ts.local_ops):
        rho_j, top = _thermal_local(ops[initial], thermal)
        if ts.mode_dims[j] > 2 and top > THERMAL_TAIL_LIMIT:
            raise TruncationTailError(
                f"mode {j}: top-level thermal weight {top:.3g} > {THERMAL_TAIL_LIMIT:g}; "
                f"raise the truncation level"
            )
        rho_bath = np.kron(rho_bath, rho_j)
    i0 = labels.index(initial)
    sel = np.zeros((len(labels), len(labels)), dtype=complex)
    sel[i0, i0] = 1.0
    rho0 = np.kron(sel, rho_bath)

    evals, w = np.linalg.eigh(ts.h_total)
    rho_t0 = w.conj().T @ rho0 @ w

    def observable_series(op):
        op_t = w.conj().T @ op @ w
        g = op_t.T * rho_t0
        out = np.empty(times.size, dtype=complex)
        for i, t in enumerate(times):
            u = np.exp(-1j * evals * t)
            out[i] = u @ (g @ u.conj())
        return out

    pops = np.column_stack([
        np.real(observable_series(ts.projectors[lab])) for lab in labels
    ])
    ejs = np.column_stack([np.real(observable_series(hj)) for hj in ts.h_modes]) \
        if ts.h_modes else np.zeros((times.size, 0))
    ejs = ejs - ejs[0:1, :]

    trace_norm = np.real(observable_series(np.eye(ts.dim, dtype=complex)))
    total_energy = np.real(observable_series(ts.h_total))

    if subsystem is not None:
        energies = np.array([subsystem.energy(lab) for lab in labels])
    else:
        energies = np.zeros(len(labels))
    e_sub = pops @ energies
    return OracleResult(labels=labels, times=times, populations=pops,
                        dissipated=ejs, e_sub=e_sub, trace_norm=trace_norm,
                        total_energy=total_energy)


def late_window_average(result, fraction=0.25):
    """Time-averaged populations over the trailing window (finite-size t->inf)."""
    n = max(1, int(fraction * result.times.size))
    return result.populations[-n:].mean(axis=0)


# ---------------------------------------------------------------------------
# Comparison against the master-equation trajectory
# ---------------------------------------------------------------------------

@dataclass
class ComparisonRow:
    quantity: str
    deviation: float
    tolerance: float

    @property
    def passed(self):
        return self.deviation <= self.tolerance


@dataclass
class ComparisonReport:
    rows: list
    regime: dict
    regime_ok: bool

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    def format_text(self):
        lines = ["quantity,deviation,tolerance,status"]
        for r in self.rows:
            lines.append(f"{r.quantity},{r.deviation:.6g},{r.tolerance:.6g},"
                         f"{'pass' if r.passed else 'FAIL'}")
        lines.append("")
        lines.append("regime diagnostics:")
        for k, v in self.regime.items():
            lines.append(f"  {k} = {v:.6g}" if isinstance(v, float) else f"  {k} = {v}")
        if not self.regime_ok:
            lines.append("  WARNING: outside the perturbative/Markovian regime; "
                         "deviations above tolerance are expected")
        return "\n".join(lines) + "\n"


def regime_diagnostics(subsystem, bath, thermal):
    """Dimensionless ratios locating the model w.r.t. the theory's premises."""
    diag = {}
    v_ratio = 0.0
    for (a, b) in subsystem.coupled_pairs():
        de = abs(subsystem.energy(a) - subsystem.energy(b))
        v = abs(subsystem.coupling(a, b))
        v_ratio = max(v_ratio, v / de if de > 0 else math.inf)
    diag["max_V_over_dE"] = v_ratio
    freqs = []
    coupling_ratio = 0.0
    for mode in bath.modes:
        if isinstance(mode, LocalHarmonicMode):
            mode = mode.as_general()
        if isinstance(mode, HarmonicMode):
            freqs.append(mode.omega)
            dmax = max((abs(d) for d in mode.displacements.values()), default=0.0)
            coupling_ratio = max(coupling_ratio,
                                 0.5 * mode.omega * dmax ** 2)  # lambda / omega
        elif isinstance(mode, SpinMode):
            freqs.append(mode.omega_tilde)
            if mode.omega > 0:
                coupling_ratio = max(coupling_ratio, abs(mode.gamma) / mode.omega)
    diag["max_coupling_ratio"] = coupling_ratio
    if freqs and not thermal.zero_temperature:
        diag["beta_omega_min"] = thermal.beta * min(freqs)
        diag["beta_omega_max"] = thermal.beta * max(freqs)
    return diag


def compare_report(exact, traj, subsystem=None, bath=None, thermal=None,
                   tol_population=0.2, tol_dissipation=0.2):
    """Per-quantity relative deviations between exact and MQME-D trajectories."""
    if exact.times.shape != traj.times.shape or np.max(
            np.abs(exact.times - traj.times)) > 1e-12 * max(1.0, exact.times[-1]):
        raise ValueError("time grids must match")
    rows = []
    for i, lab in enumerate(exact.labels):
        ref = np.max(np.abs(exact.populations[:, i]))
        dev = np.max(np.abs(exact.populations[:, i] - traj.populations[:, i]))
        rows.append(ComparisonRow(f"P_{lab}", dev / max(ref, 1e-300), tol_population))
    n_modes = min(exact.dissipated.shape[1], traj.dissipated.shape[1])
    for j in range(n_modes):
        ref = np.max(np.abs(exact.dissipated[:, j]))
        dev = np.max(np.abs(exact.dissipated[:, j] - traj.dissipated[:, j]))
        rows.append(ComparisonRow(f"E_{j}", dev / max(ref, 1e-300), tol_dissipation))

    if subsystem is not None and bath is not None and thermal is not None:
        regime = regime_diagnostics(subsystem, bath, thermal)
        regime_ok = (regime.get("max_V_over_dE", 0.0) <= 0.2
                     and regime.get("max_coupling_ratio", 0.0) <= 0.1)
    else:
        regime = {}
        regime_ok = True
    return ComparisonReport(rows=rows, regime=regime, regime_ok=regime_ok)
