"""Population and per-mode dissipation rate constants, and their verifiers.

Keys follow the transfer direction: ``K[(a, b)]`` is the rate of a -> b
population transfer and ``Kdiss[(j, a, b)]`` the matching energy-rate
coefficient of bath mode j, so the spec-level identities read

    sum_j Kdiss[(j, a, b)] = (E_a - E_b) * K[(a, b)]
    Kdiss[(j, b, a)] / Kdiss[(j, a, b)] = -K[(b, a)] / K[(a, b)]
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import correlation as corr
from .errors import UnsupportedBathError
from .model import (
    Bath,
    GenericMode,
    HarmonicMode,
    LocalHarmonicMode,
    SpinMode,
    reorganization_energies,
)
from .quadrature import IntegralResult, QuadratureSettings, half_line_integral

__all__ = [
    "QuadratureSettings",
    "RateSet",
    "half_line_integral",
    "population_rate",
    "dissipation_rate_general",
    "dissipation_rate_harmonic",
    "dissipative_potential",
    "dissipative_spectral_density",
    "dissipation_density",
    "spin_rates",
    "verify_balance",
    "compute_rateset",
    "write_rate_table",
    "read_rate_table",
]


@dataclass
class RateSet:
    """Population rate matrix plus per-mode dissipation coefficients."""

    labels: tuple
    K: dict = field(default_factory=dict)
    Kdiss: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    n_modes: int = 0
    damping_eta: float | None = None
    variant: str = "general"
    energies: dict = field(default_factory=dict)

    def pairs(self):
        return sorted({(a, b) for (a, b) in self.K})


# ---------------------------------------------------------------------------
# Characteristic scales and integrand assembly
# ---------------------------------------------------------------------------

def _mode_char_freq(mode, a, b):
    if isinstance(mode, LocalHarmonicMode):
        return mode.omega
    if isinstance(mode, HarmonicMode):
        return mode.omega
    if isinstance(mode, SpinMode):
        return mode.omega_tilde
    if isinstance(mode, GenericMode):
        ea = np.linalg.eigvalsh(mode.matrix(a))
        eb = np.linalg.eigvalsh(mode.matrix(b))
        return max(ea[-1] - ea[0], eb[-1] - eb[0], 1e-12)
    raise UnsupportedBathError(f"unknown mode type {type(mode).__name__}")


def _pair_scale(subsystem, bath, a, b):
    """(panel width, quiet span) for the pair's trace product.

    The panel width resolves the fastest oscillation; the quiet span covers
    the slowest mode's full period so a transient dip is not mistaken for
    the decayed tail.
    """
    w_hi = abs(subsystem.energy(b) - subsystem.energy(a))
    w_lo = math.inf
    for mode in bath.modes:
        w = _mode_char_freq(mode, a, b)
        w_hi = max(w_hi, w)
        w_lo = min(w_lo, w)
    if bath.kind == "sd-table":
        # a continuum dephases irreversibly: no recurrences to guard against
        for table in bath.tables.values():
            w_hi = max(w_hi, float(table.grid[-1]))
    panel = 2.0 * math.pi / max(w_hi, 1e-8)
    if not math.isfinite(w_lo) or w_lo <= 0:
        quiet = 8.0 * panel
    else:
        quiet = max(8.0 * panel, 2.0 * math.pi / w_lo)
    return panel, quiet


def _product_integrand(subsystem, bath, thermal, a, b, weighted_mode=None):
    de = subsystem.energy(b) - subsystem.energy(a)
    fns = [corr.mode_trace_functions(m, a, b, thermal) for m in bath.modes]

    def f(t):
        t = np.asarray(t, dtype=float)
        out = np.exp(-1j * de * t).astype(complex)
        for j, (plain, wfun) in enumerate(fns):
            out = out * (wfun(t) if j == weighted_mode else plain(t))
        return out

    return f


def _lbf_combination(subsystem, bath, thermal, a, b):
    """(effective gap, combined g(t) evaluator) for the cumulant route."""
    de = subsystem.energy(b) - subsystem.energy(a)
    if bath.is_harmonic:
        lam, _ = reorganization_energies(bath, (a, b))
        lam_c = lam[(a, a)] - 2.0 * lam[(a, b)] + lam[(b, b)]
        modes = bath.harmonic_modes()

        def g_c(t):
            return (corr._g_discrete(modes, a, a, t, thermal)
                    - 2.0 * corr._g_discrete(modes, a, b, t, thermal)
                    + corr._g_discrete(modes, b, b, t, thermal))

    elif bath.kind == "sd-table":
        lam_a = bath.tables[a].reorganization_energy() if a in bath.tables else 0.0
        lam_b = bath.tables[b].reorganization_energy() if b in bath.tables else 0.0
        lam_c = lam_a + lam_b   # cross terms vanish for local coupling
        cached = [corr.TableLineBroadening(bath.tables[x], thermal)
                  for x in (a, b) if x in bath.tables]

        def g_c(t):
            g = np.zeros(np.shape(np.atleast_1d(t)), dtype=complex)
            for fn in cached:
                g = g + np.atleast_1d(fn(t))
            return g

    else:
        raise UnsupportedBathError("cumulant route requires a harmonic bath or J tables")
    return de + lam_c, g_c


def _lbf_integrand(subsystem, bath, thermal, a, b, kernel_omega=None):
    """exp(-it(de + Lambda_c) - g_c(t)), optionally times the mode kernel."""
    gap, g_c = _lbf_combination(subsystem, bath, thermal, a, b)
    if kernel_omega is None:
        def f(t):
            t = np.asarray(t, dtype=float)
            return np.exp(-1j * gap * t - g_c(t))
    else:
        w = kernel_omega
        c = corr.coth_half(thermal, w)

        def f(t):
            t = np.asarray(t, dtype=float)
            wt = w * t
            return np.exp(-1j * gap * t - g_c(t)) * (np.cos(wt) - 1j * c * np.sin(wt))

    return f


def _rate_prefactor(subsystem, a, b):
    v = subsystem.coupling(a, b)
    return 2.0 * abs(v) ** 2


# ---------------------------------------------------------------------------
# Rate constants
# ---------------------------------------------------------------------------

def population_rate(subsystem, bath, thermal, a, b, settings=None,
                    method="auto", full_output=False):
    """Rate constant for the a -> b population transfer.

    method 'product' multiplies per-mode traces; 'lbf' uses the cumulant
    (line-broadening) route available for harmonic and tabulated baths.
    """
    pref = _rate_prefactor(subsystem, a, b)
    if pref == 0.0:
        res = IntegralResult(0j, 0.0, 0.0, 0)
        return (0.0, res) if full_output else 0.0
    settings = settings or QuadratureSettings()
    if method == "auto":
        method = "lbf" if (bath.is_harmonic or bath.kind == "sd-table") else "product"
    if method == "lbf":
        f = _lbf_integrand(subsystem, bath, thermal, a, b)
    elif method == "product":
        f = _product_integrand(subsystem, bath, thermal, a, b)
    else:
        raise ValueError(f"unknown method {method!r}")
    panel, quiet = _pair_scale(subsystem, bath, a, b)
    res = half_line_integral(f, settings, scale=panel, quiet_span=quiet)
    rate = pref * res.value.real
    return (rate, res) if full_output else rate


def _weighted_identically_zero(mode, a, b):
    """True when the mode's energy-weighted trace vanishes for all times."""
    if isinstance(mode, LocalHarmonicMode):
        mode = mode.as_general()
    if isinstance(mode, HarmonicMode):
        return mode.displacement(a) == mode.displacement(b)
    if isinstance(mode, SpinMode):
        return mode.gamma == 0.0
    if isinstance(mode, GenericMode):
        return bool(np.max(np.abs(mode.matrix(a) - mode.matrix(b))) == 0.0)
    return False


def dissipation_rate_general(subsystem, bath, thermal, j, a, b, settings=None,
                             full_output=False):
    """Dissipation rate coefficient of mode j for the a -> b transfer.

    Product route: the full trace with mode j's factor replaced by its
    energy-weighted counterpart.  Valid for every bath family.
    """
    pref = _rate_prefactor(subsystem, a, b)
    if pref == 0.0 or _weighted_identically_zero(bath.modes[j], a, b):
        res = IntegralResult(0j, 0.0, 0.0, 0)
        return (0.0, res) if full_output else 0.0
    settings = settings or QuadratureSettings()
    f = _product_integrand(subsystem, bath, thermal, a, b, weighted_mode=j)
    env = _product_integrand(subsystem, bath, thermal, a, b)
    panel, quiet = _pair_scale(subsystem, bath, a, b)
    res = half_line_integral(f, settings, scale=panel, quiet_span=quiet,
                             envelope=env)
    rate = pref * res.value.real
    return (rate, res) if full_output else rate


def dissipation_rate_harmonic(subsystem, bath, thermal, j, a, b, settings=None,
                              full_output=False):
    """Cumulant-route dissipation coefficient for a general-linear harmonic bath."""
    if not bath.is_harmonic:
        raise UnsupportedBathError("harmonic route requires a discrete harmonic bath")
    pref = _rate_prefactor(subsystem, a, b)
    mode = bath.harmonic_modes()[j]
    da, db = mode.displacement(a), mode.displacement(b)
    lam_c = 0.5 * mode.omega ** 2 * (da - db) ** 2
    if pref == 0.0 or lam_c == 0.0:
        res = IntegralResult(0j, 0.0, 0.0, 0)
        return (0.0, res) if full_output else 0.0
    settings = settings or QuadratureSettings()
    f = _lbf_integrand(subsystem, bath, thermal, a, b, kernel_omega=mode.omega)
    env = _lbf_integrand(subsystem, bath, thermal, a, b)
    panel, quiet = _pair_scale(subsystem, bath, a, b)
    res = half_line_integral(f, settings, scale=panel, quiet_span=quiet,
                             envelope=env)
    rate = pref * lam_c * res.value.real
    return (rate, res) if full_output else rate


def dissipative_potential(subsystem, bath, thermal, a, b, omega, settings=None,
                          full_output=False):
    """Per-unit-reorganization dissipation capacity I_{b<-a}(omega).

    Local baths only: Re of the half-line integral of F*_a(t) A_b(t) times
    the probe-mode kernel at frequency omega.
    """
    if omega <= 0:
        raise ValueError("probe frequency must be positive")
    if bath.kind not in ("ho-local", "sd-table"):
        raise UnsupportedBathError("dissipative potential requires a local bath")
    settings = settings or QuadratureSettings()
    gap, g_c = _lbf_combination(subsystem, bath, thermal, a, b)
    c = corr.coth_half(thermal, omega)

    def base(t):
        t = np.asarray(t, dtype=float)
        return np.exp(-1j * gap * t - g_c(t))

    def f(t):
        t = np.asarray(t, dtype=float)
        wt = omega * t
        return base(t) * (np.cos(wt) - 1j * c * np.sin(wt))

    panel, quiet = _pair_scale(subsystem, bath, a, b)
    panel = min(panel, 2.0 * math.pi / omega)
    res = half_line_integral(f, settings, scale=panel, quiet_span=quiet,
                             envelope=base)
    val = res.value.real
    return (val, res) if full_output else val


@dataclass
class DissipativeSpectralDensity:
    """J^owner_{b<-a} and J^owner_{a<-b} sampled on a frequency grid."""

    owner: str
    partner: str
    omega: np.ndarray
    forward: np.ndarray    # multiplies P_owner in the dissipation density
    backward: np.ndarray   # multiplies P_partner

    def integrated(self):
        return (float(np.trapezoid(self.forward, self.omega)),
                float(np.trapezoid(self.backward, self.omega)))


def dissipative_spectral_density(subsystem, bath, thermal, owner, partner,
                                 omega_grid, settings=None):
    """Frequency-resolved dissipation coefficients for a tabulated local bath."""
    if bath.kind != "sd-table":
        raise UnsupportedBathError("dissipative spectral density requires J tables")
    settings = settings or QuadratureSettings()
    table = bath.tables[owner]
    pref = _rate_prefactor(subsystem, owner, partner)
    omega_grid = np.asarray(omega_grid, dtype=float)
    fwd = np.zeros_like(omega_grid)
    bwd = np.zeros_like(omega_grid)
    if pref == 0.0:
        return DissipativeSpectralDensity(owner, partner, omega_grid, fwd, bwd)
    panel0, quiet = _pair_scale(subsystem, bath, owner, partner)
    for out, (a, b) in ((fwd, (owner, partner)), (bwd, (partner, owner))):
        gap, g_c = _lbf_combination(subsystem, bath, thermal, a, b)

        def base(t, gap=gap, g_c=g_c):
            t = np.asarray(t, dtype=float)
            return np.exp(-1j * gap * t - g_c(t))

        for i, w in enumerate(omega_grid):
            jw = float(table(w))
            if jw == 0.0:
                continue
            c = corr.coth_half(thermal, w)

            def f(t, w=w, c=c, base=base):
                t = np.asarray(t, dtype=float)
                wt = w * t
                return base(t) * (np.cos(wt) - 1j * c * np.sin(wt))

            res = half_line_integral(f, settings,
                                     scale=min(panel0, 2.0 * math.pi / w),
                                     quiet_span=quiet, envelope=base)
            out[i] = pref * jw / w * res.value.real
    return DissipativeSpectralDensity(owner, partner, omega_grid, fwd, bwd)


def dissipation_density(dsd_tables, populations):
    """Rate of dissipation per frequency window for one owner state.

    ``dsd_tables`` share an owner; ``populations`` maps labels to scalars or
    time series.  Returns an (n_omega,) or (n_omega, n_t) array.
    """
    if not dsd_tables:
        raise ValueError("need at least one dissipative spectral density")
    owner = dsd_tables[0].owner
    p_own = np.asarray(populations[owner], dtype=float)
    out = None
    for tab in dsd_tables:
        if tab.owner != owner:
            raise ValueError("all tables must share the same owner state")
        p_par = np.asarray(populations[tab.partner], dtype=float)
        term = (np.multiply.outer(tab.forward, p_own)
                + np.multiply.outer(tab.backward, p_par))
        out = term if out is None else out + term
    return out


# ---------------------------------------------------------------------------
# Spin baths
# ---------------------------------------------------------------------------

WEAK_COUPLING_GUARD = 0.2


def spin_rates(subsystem, bath, thermal, settings=None, variant="exact",
               allow_strong=False):
    """RateSet for a two-state subsystem with a spin bath.

    variant 'exact' integrates products of the exact spin traces; 'weak'
    uses the weak-coupling cumulant forms and refuses gamma/omega > 0.2
    unless ``allow_strong`` is set.
    """
    if bath.kind != "spin":
        raise UnsupportedBathError("spin_rates requires a spin bath")
    if len(subsystem.labels) != 2:
        raise UnsupportedBathError("spin bath rates are defined for two-state subsystems")
    settings = settings or QuadratureSettings()

    if variant == "exact":
        rs = compute_rateset(subsystem, bath, thermal, settings, method="product")
        rs.variant = "spin-exact"
        return rs
    if variant != "weak":
        raise ValueError(f"unknown variant {variant!r}")

    ratios = [abs(m.gamma) / m.omega if m.omega > 0 else math.inf for m in bath.modes]
    if ratios and max(ratios) > WEAK_COUPLING_GUARD and not allow_strong:
        raise UnsupportedBathError(
            f"weak-coupling variant refused: max gamma/omega = {max(ratios):.3g} "
            f"> {WEAK_COUPLING_GUARD} (pass allow_strong=True to override)"
        )

    prof = corr.spin_bath_profiles(bath, thermal)
    labels = tuple(subsystem.labels)
    rs = RateSet(labels=labels, n_modes=bath.n_modes(),
                 damping_eta=settings.damping_eta, variant="spin-weak",
                 energies={lab: subsystem.energy(lab) for lab in labels})
    panel, quiet = _pair_scale(subsystem, bath, *labels)
    for (a, b) in ((labels[0], labels[1]), (labels[1], labels[0])):
        pref = _rate_prefactor(subsystem, a, b)
        de = subsystem.energy(b) - subsystem.energy(a)
        gap = de + 4.0 * prof.total

        def base(t, gap=gap):
            t = np.asarray(t, dtype=float)
            return np.exp(-1j * gap * t - 4.0 * prof.g(t))

        res = half_line_integral(base, settings, scale=panel, quiet_span=quiet)
        rs.K[(a, b)] = pref * res.value.real
        rs.errors[(a, b)] = pref * res.error
        for j, mode in enumerate(bath.modes):
            lam_j = prof.lambdas[j]
            if mode.omega > 0:
                w = mode.omega
                c = corr.coth_half(thermal, w)

                def f(t, w=w, c=c, base=base):
                    t = np.asarray(t, dtype=float)
                    wt = w * t
                    return base(t) * (np.cos(wt) - 1j * c * np.sin(wt))
            else:
                beta = thermal.beta

                def f(t, beta=beta, base=base):
                    t = np.asarray(t, dtype=float)
                    return base(t) * (1.0 - 2j * t / beta)

            resj = half_line_integral(f, settings, scale=panel, quiet_span=quiet,
                                      envelope=base)
            rs.Kdiss[(j, a, b)] = pref * 4.0 * lam_j * resj.value.real
            rs.errors[(j, a, b)] = pref * 4.0 * lam_j * resj.error
    return rs


# ---------------------------------------------------------------------------
# Balance verification
# ---------------------------------------------------------------------------

def _partition_log_ratio(bath, thermal, a, b):
    """log of the bath-space partition ratio Tr e^{-beta sum v_a} / (a -> b)."""
    out = 0.0
    for mode in bath.modes:
        if isinstance(mode, (HarmonicMode, LocalHarmonicMode, SpinMode)):
            continue   # displaced oscillators and field-dressed spins share spectra
        if isinstance(mode, GenericMode):
            ea = np.linalg.eigvalsh(mode.matrix(a))
            eb = np.linalg.eigvalsh(mode.matrix(b))
            ref = min(ea[0], eb[0])
            za = np.sum(np.exp(-thermal.beta * (ea - ref)))
            zb = np.sum(np.exp(-thermal.beta * (eb - ref)))
            out += math.log(za) - math.log(zb)
    return out


@dataclass
class BalanceRow:
    kind: str          # 'population' or 'dissipation'
    pair: tuple
    mode: int | None
    actual: float
    expected: float
    deviation: float


@dataclass
class BalanceReport:
    rows: list
    max_deviation: float
    tolerance: float

    @property
    def passed(self):
        return self.max_deviation <= self.tolerance


def verify_balance(rateset, subsystem, bath, thermal, tolerance=1e-4,
                   min_rate=None):
    """Detailed-balance check for populations and per-mode dissipation.

    Population ratio K(b->a)/K(a->b) is compared against the analytic (or
    numeric, for generic modes) partition-function ratio; dissipation ratios
    against -K(b->a)/K(a->b).  Pairs with rates below ``min_rate`` are skipped.
    """
    if thermal.zero_temperature:
        raise ValueError("balance verification requires a finite temperature")
    if min_rate is None:
        min_rate = 0.0
    rows = []
    for (a, b) in rateset.pairs():
        if (b, a) not in rateset.K:
            continue
        if a > b:
            continue   # one row per unordered pair
        k_ab = rateset.K[(a, b)]
        k_ba = rateset.K[(b, a)]
        if abs(k_ab) <= min_rate or abs(k_ba) <= min_rate:
            continue
        actual = k_ba / k_ab
        log_expected = (-thermal.beta * (subsystem.energy(a) - subsystem.energy(b))
                        + _partition_log_ratio(bath, thermal, a, b))
        expected = math.exp(log_expected)
        rows.append(BalanceRow("population", (a, b), None, actual, expected,
                               abs(actual - expected) / abs(expected)))
        for j in range(rateset.n_modes):
            kd_ab = rateset.Kdiss.get((j, a, b), 0.0)
            kd_ba = rateset.Kdiss.get((j, b, a), 0.0)
            if abs(kd_ab) <= min_rate or abs(kd_ba) <= min_rate:
                continue
            actual_d = kd_ba / kd_ab
            expected_d = -k_ba / k_ab
            rows.append(BalanceRow("dissipation", (a, b), j, actual_d, expected_d,
                                   abs(actual_d - expected_d) / abs(expected_d)))
    max_dev = max((r.deviation for r in rows), default=0.0)
    return BalanceReport(rows=rows, max_deviation=max_dev, tolerance=tolerance)


# ---------------------------------------------------------------------------
# Full sweep (optionally parallel) and the tabular interface
# ---------------------------------------------------------------------------

def _sweep_tasks(subsystem, bath):
    tasks = []
    for (a, b) in subsystem.coupled_pairs():
        for (src, dst) in ((a, b), (b, a)):
            tasks.append(("K", None, src, dst))
            for j in range(bath.n_modes()):
                tasks.append(("D", j, src, dst))
    return tasks


def _run_task(args):
    from .errors import NonconvergenceError
    subsystem, bath, thermal, settings, method, task = args
    kind, j, a, b = task
    try:
        if kind == "K":
            rate, res = population_rate(subsystem, bath, thermal, a, b, settings,
                                        method=method, full_output=True)
        else:
            rate, res = dissipation_rate_general(subsystem, bath, thermal, j, a, b,
                                                 settings, full_output=True)
    except NonconvergenceError as exc:
        which = f"K({a}->{b})" if kind == "K" else f"Kdiss(mode {j}, {a}->{b})"
        raise NonconvergenceError(f"{which}: {exc}", value=exc.value,
                                  t_end=exc.t_end) from None
    pref = _rate_prefactor(subsystem, a, b)
    return task, rate, pref * res.error


def compute_rateset(subsystem, bath, thermal, settings=None, method="auto",
                    workers=1):
    """All population and per-mode dissipation rates for coupled pairs.

    The (pair, mode) sweep is embarrassingly parallel; results are assembled
    in task order so outputs are independent of the worker count.
    """
    settings = settings or QuadratureSettings()
    if method == "auto":
        method = "lbf" if (bath.is_harmonic or bath.kind == "sd-table") else "product"
    tasks = _sweep_tasks(subsystem, bath)
    payloads = [(subsystem, bath, thermal, settings, method, t) for t in tasks]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, payloads, chunksize=1))
    else:
        results = [_run_task(p) for p in payloads]

    rs = RateSet(labels=tuple(subsystem.labels), n_modes=bath.n_modes(),
                 damping_eta=settings.damping_eta, variant=method,
                 energies={lab: subsystem.energy(lab) for lab in subsystem.labels})
    for (kind, j, a, b), rate, err in results:
        if kind == "K":
            rs.K[(a, b)] = rate
            rs.errors[(a, b)] = err
        else:
            rs.Kdiss[(j, a, b)] = rate
            rs.errors[(j, a, b)] = err
    return rs


def default_workers():
    return int(os.environ.get("MQMED_WORKERS", "1"))


def write_rate_table(rateset, fh, header_lines=()):
    """Serialize a RateSet as CSV: from,to,mode,K,Kdiss,err_estimate,damping_eta."""
    for line in header_lines:
        fh.write(f"# {line}\n")
    fh.write("from,to,mode,K,Kdiss,err_estimate,damping_eta\n")
    eta = "" if rateset.damping_eta is None else f"{rateset.damping_eta:.17g}"
    for (a, b) in rateset.pairs():
        k = rateset.K[(a, b)]
        if rateset.n_modes == 0:
            err = rateset.errors.get((a, b), 0.0)
            fh.write(f"{a},{b},,{k:.17g},,{err:.17g},{eta}\n")
        for j in range(rateset.n_modes):
            kd = rateset.Kdiss.get((j, a, b), 0.0)
            err = max(rateset.errors.get((a, b), 0.0), rateset.errors.get((j, a, b), 0.0))
            fh.write(f"{a},{b},{j},{k:.17g},{kd:.17g},{err:.17g},{eta}\n")


def read_rate_table(path):
    """Parse the CSV written by :func:`write_rate_table` back into a RateSet."""
    K = {}
    Kdiss = {}
    errors = {}
    labels = []
    eta = None
    n_modes = 0
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#") or line.startswith("from,"):
                continue
            a, b, j, k, kd, err, eta_s = line.split(",")
            for lab in (a, b):
                if lab not in labels:
                    labels.append(lab)
            K[(a, b)] = float(k)
            errors[(a, b)] = float(err)
            if j != "":
                ji = int(j)
                n_modes = max(n_modes, ji + 1)
                Kdiss[(ji, a, b)] = float(kd)
            if eta_s:
                eta = float(eta_s)
    return RateSet(labels=tuple(labels), K=K, Kdiss=Kdiss, errors=errors,
                   n_modes=n_modes, damping_eta=eta, variant="file")
