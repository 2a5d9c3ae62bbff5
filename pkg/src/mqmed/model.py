"""Domain types for the subsystem/bath split, validation and unit handling.

Internal unit system: hbar = 1 and k_B = 1.  Every energy and angular
frequency is expressed in one common reciprocal-time unit and times in its
inverse; the pinned constants in :func:`unit_convert` translate CLI-facing
quantities (cm^-1, rad/fs, fs, K) into that system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, UnitError, UnsupportedBathError

# Pinned conversion constants (CLI-facing only; internals are hbar = k_B = 1).
KBOLTZ_CM = 0.6950348          # cm^-1 per K
C_CM_PER_FS = 2.99792458e-5    # speed of light in cm/fs
TWO_PI_C = 2.0 * math.pi * C_CM_PER_FS   # rad/fs per cm^-1

HERMITICITY_TOL = 1e-12


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubsystemSpec:
    """Subsystem states with energies E_A and symmetric couplings V_AB.

    ``couplings`` is keyed by ordered (a, b) tuples as ingested; symmetry and
    referential integrity are checked by :func:`validate_model`, not here.
    """

    labels: tuple
    energies: dict
    couplings: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))

    def energy(self, a):
        return self.energies[a]

    def coupling(self, a, b):
        """Inter-state coupling V_ab, 0.0 if the pair is uncoupled."""
        if (a, b) in self.couplings:
            return self.couplings[(a, b)]
        return self.couplings.get((b, a), 0.0)

    def coupled_pairs(self):
        """Ordered (a, b) pairs with a nonzero coupling, a before b in labels."""
        pairs = []
        for i, a in enumerate(self.labels):
            for b in self.labels[i + 1:]:
                if self.coupling(a, b) != 0.0:
                    pairs.append((a, b))
        return pairs


@dataclass(frozen=True)
class HarmonicMode:
    """Harmonic oscillator with per-state displacements d_Aj.

    Mass-weighted coordinates; states missing from ``displacements`` read as 0.
    """

    omega: float
    displacements: dict

    def displacement(self, a):
        return self.displacements.get(a, 0.0)


@dataclass(frozen=True)
class LocalHarmonicMode:
    """Harmonic mode coupled exclusively to one subsystem state."""

    owner: str
    omega: float
    displacement: float

    def as_general(self):
        return HarmonicMode(self.omega, {self.owner: self.displacement})

    @property
    def reorganization(self):
        return 0.5 * self.omega ** 2 * self.displacement ** 2


@dataclass(frozen=True)
class SpinMode:
    """Bath spin-1/2 with Zeeman frequency omega and coupling gamma."""

    omega: float
    gamma: float

    @property
    def omega_tilde(self):
        return math.hypot(self.omega, 2.0 * self.gamma)

    @property
    def theta(self):
        # omega == 0 falls out of arctan2 as pi/4
        return 0.5 * math.atan2(2.0 * self.gamma, self.omega)


@dataclass(frozen=True)
class GenericMode:
    """Finite-dimensional bath component given by per-state Hermitian matrices."""

    dim: int
    vmatrices: dict

    def matrix(self, a):
        return np.asarray(self.vmatrices[a], dtype=complex)


@dataclass(frozen=True)
class ThermalSpec:
    """Inverse temperature; beta = inf is expressed via the zero_temperature flag."""

    beta: float | None = None
    zero_temperature: bool = False


@dataclass(frozen=True)
class SpectralDensityTable:
    """Sampled J(omega); interpreted as piecewise-linear between samples."""

    grid: np.ndarray
    values: np.ndarray
    kind: tuple = ("A", "A")

    def __post_init__(self):
        object.__setattr__(self, "grid", np.asarray(self.grid, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "kind", tuple(self.kind))

    def __call__(self, omega):
        """Linear interpolation of J; zero outside the tabulated range."""
        return np.interp(omega, self.grid, self.values, left=0.0, right=0.0)

    def reorganization_energy(self):
        """Integral of J(w)/w over the table, exact for the linear interpolant.

        Per segment with J = c0 + c1*w the primitive is c0*ln(w) + c1*w.
        """
        w0, w1 = self.grid[:-1], self.grid[1:]
        j0, j1 = self.values[:-1], self.values[1:]
        c1 = (j1 - j0) / (w1 - w0)
        c0 = j0 - c1 * w0
        return float(np.sum(c0 * np.log(w1 / w0) + c1 * (w1 - w0)))


@dataclass(frozen=True)
class Bath:
    """Bath description: a homogeneous family of modes or per-state J tables.

    kind is one of 'ho-general', 'ho-local', 'spin', 'generic', 'sd-table'.
    For 'sd-table', ``tables`` maps owner state -> SpectralDensityTable and
    ``modes`` is empty.
    """

    kind: str
    modes: tuple = ()
    tables: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))

    @property
    def is_harmonic(self):
        return self.kind in ("ho-general", "ho-local")

    def harmonic_modes(self):
        """Discrete harmonic modes in general form (local modes promoted)."""
        if self.kind == "ho-general":
            return list(self.modes)
        if self.kind == "ho-local":
            return [m.as_general() for m in self.modes]
        raise UnsupportedBathError(f"bath kind {self.kind!r} is not harmonic")

    def n_modes(self):
        return len(self.modes)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple

    def __bool__(self):
        return self.ok


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def validate_model(subsystem, bath, thermal):
    """Check every structural invariant; report-style, never raises."""
    v = []
    labels = tuple(subsystem.labels)
    declared = set(labels)

    if len(labels) < 2:
        v.append("subsystem must declare at least 2 states")
    if len(declared) != len(labels):
        v.append("duplicate state labels")
    for a in labels:
        if a not in subsystem.energies:
            v.append(f"state {a!r} has no energy")

    seen = {}
    for (a, b), val in subsystem.couplings.items():
        if a == b:
            v.append(f"self-coupling declared for state {a!r}")
            continue
        if a not in declared or b not in declared:
            v.append(f"coupling ({a!r},{b!r}) references undeclared state")
            continue
        key = frozenset((a, b))
        if key in seen and seen[key] != val:
            v.append(f"asymmetric coupling: V_{a}{b} != V_{b}{a}")
        seen[key] = val

    if bath.kind not in ("ho-general", "ho-local", "spin", "generic", "sd-table"):
        v.append(f"unknown bath kind {bath.kind!r}")
    for j, mode in enumerate(bath.modes):
        if isinstance(mode, HarmonicMode):
            if not mode.omega > 0:
                v.append(f"mode {j}: omega must be > 0")
            for a in mode.displacements:
                if a not in declared:
                    v.append(f"mode {j}: displacement for undeclared state {a!r}")
        elif isinstance(mode, LocalHarmonicMode):
            if not mode.omega > 0:
                v.append(f"mode {j}: omega must be > 0")
            if mode.owner not in declared:
                v.append(f"mode {j}: owner {mode.owner!r} is not a declared state")
        elif isinstance(mode, SpinMode):
            if mode.omega < 0:
                v.append(f"mode {j}: spin omega must be >= 0")
            if not (math.isfinite(mode.omega_tilde) and math.isfinite(mode.theta)):
                v.append(f"mode {j}: derived spin quantities are not finite")
        elif isinstance(mode, GenericMode):
            if mode.dim < 2:
                v.append(f"mode {j}: local dimension must be >= 2")
            for a in declared:
                if a not in mode.vmatrices:
                    v.append(f"mode {j}: no bath operator for state {a!r}")
            for a, m in mode.vmatrices.items():
                m = np.asarray(m)
                if m.shape != (mode.dim, mode.dim):
                    v.append(f"mode {j}: operator for {a!r} has wrong shape")
                    continue
                dev = np.max(np.abs(m - m.conj().T))
                if dev > HERMITICITY_TOL:
                    v.append(
                        f"non-Hermitian bath operator (mode {j}, state {a!r}, "
                        f"max|M-M^+| = {dev:.3g})"
                    )
        else:
            v.append(f"mode {j}: unknown mode type {type(mode).__name__}")

    for a, table in bath.tables.items():
        if a not in declared:
            v.append(f"spectral density table for undeclared state {a!r}")
        if table.grid.ndim != 1 or table.grid.size < 2:
            v.append(f"table {a!r}: grid needs at least 2 ascending points")
            continue
        if not np.all(np.diff(table.grid) > 0):
            v.append(f"table {a!r}: grid must be strictly ascending")
        if not np.all(table.grid > 0):
            v.append(f"table {a!r}: grid frequencies must be > 0")
        if not np.all(np.isfinite(table.values)):
            v.append(f"table {a!r}: J values must be finite")
        if table.kind[0] == table.kind[1] and np.any(table.values < 0):
            v.append(f"table {a!r}: diagonal J must be nonnegative")

    if thermal.zero_temperature:
        pass  # beta unused in the documented limit
    elif thermal.beta is None or not thermal.beta > 0:
        v.append("beta must be strictly positive (use zero_temperature for the limit)")

    return ValidationReport(ok=not v, violations=tuple(v))


def reorganization_energies(bath, labels):
    """Total and per-mode reorganization energies for a harmonic bath.

    Returns (Lambda, lams) where Lambda[(a, b)] = sum_j w_j^2 d_aj d_bj / 2
    and lams[j][(a, b)] is the per-mode term.  Symmetric in (a, b).
    """
    modes = bath.harmonic_modes()
    lams = []
    total = {(a, b): 0.0 for a in labels for b in labels}
    for mode in modes:
        per = {}
        for a in labels:
            for b in labels:
                lam = 0.5 * mode.omega ** 2 * mode.displacement(a) * mode.displacement(b)
                per[(a, b)] = lam
                total[(a, b)] += lam
        lams.append(per)
    return total, lams


def _cumulative_lambda(table):
    """Cumulative integral of J/w over the table grid (linear-interp exact)."""
    w0, w1 = table.grid[:-1], table.grid[1:]
    j0, j1 = table.values[:-1], table.values[1:]
    c1 = (j1 - j0) / (w1 - w0)
    c0 = j0 - c1 * w0
    seg = c0 * np.log(w1 / w0) + c1 * (w1 - w0)
    return np.concatenate([[0.0], np.cumsum(seg)])


def discretize_spectral_density(table, n_modes):
    """Convert a tabulated J(w) into n_modes discrete harmonic modes.

    Equal-lambda partition: the cumulative integral of J/w is split into
    n_modes bins of equal weight; each mode sits at its bin's median
    frequency and carries lambda_j = lambda_total / n_modes, realized as a
    displacement on the table's owner state.
    """
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if table.kind[0] != table.kind[1]:
        raise UnsupportedBathError(
            "only diagonal (A, A) tables can be discretized into local modes"
        )
    cum = _cumulative_lambda(table)
    lam_total = cum[-1]
    if lam_total <= 0.0:
        raise DegenerateInputError("table has zero total reorganization energy")

    owner = table.kind[0]
    lam_j = lam_total / n_modes
    # median of each equal-weight bin in the cumulative measure
    targets = (np.arange(n_modes) + 0.5) * lam_j
    omegas = _invert_cumulative(table, cum, targets)
    modes = []
    for w in omegas:
        d = math.sqrt(2.0 * lam_j) / w
        modes.append(HarmonicMode(omega=float(w), displacements={owner: d}))
    return modes


def _invert_cumulative(table, cum, targets):
    """Frequencies where the cumulative J/w integral reaches given targets."""
    grid = table.grid
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(grid) - 2)
    out = np.empty_like(targets)
    for k, (i, target) in enumerate(zip(idx, targets)):
        # bisection inside segment i on the analytic primitive
        w0, w1 = grid[i], grid[i + 1]
        j0, j1 = table.values[i], table.values[i + 1]
        c1 = (j1 - j0) / (w1 - w0)
        c0 = j0 - c1 * w0
        want = target - cum[i]

        def seg_integral(w):
            return c0 * math.log(w / w0) + c1 * (w - w0)

        lo, hi = w0, w1
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            if seg_integral(mid) < want:
                lo = mid
            else:
                hi = mid
        out[k] = 0.5 * (lo + hi)
    return out


def read_spectral_density_table(path, kind=("A", "A")):
    """Two-column text (omega, J) with '#' comments -> SpectralDensityTable."""
    grid = []
    values = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
            grid.append(float(parts[0]))
            values.append(float(parts[1]))
    return SpectralDensityTable(np.array(grid), np.array(values), kind=kind)


# ---------------------------------------------------------------------------
# Unit handling
# ---------------------------------------------------------------------------

# value_in_to -> factor * value_in_from for the supported directed pairs
_FACTORS = {
    ("cm-1", "rad/fs"): TWO_PI_C,
    ("rad/fs", "cm-1"): 1.0 / TWO_PI_C,
    ("K", "cm-1"): KBOLTZ_CM,          # thermal energy k_B T
    ("cm-1", "K"): 1.0 / KBOLTZ_CM,
    ("fs", "1/cm-1"): TWO_PI_C,        # t*omega stays dimensionless
    ("1/cm-1", "fs"): 1.0 / TWO_PI_C,
    ("fs", "1/(rad/fs)"): 1.0,
    ("1/(rad/fs)", "fs"): 1.0,
}

_DIMENSIONLESS = ("dimensionless", "hbar=1")


def unit_convert(value, from_unit, to_unit):
    """Deterministic conversion between the supported units.

    Supported units: cm-1, rad/fs, fs, K, and their inverses where meaningful,
    plus 'dimensionless' (hbar = 1 internal system, identity map).
    """
    if from_unit == to_unit:
        return value
    if from_unit in _DIMENSIONLESS and to_unit in _DIMENSIONLESS:
        return value
    try:
        factor = _FACTORS[(from_unit, to_unit)]
    except KeyError:
        raise UnitError(f"no conversion from {from_unit!r} to {to_unit!r}") from None
    return value * factor


def beta_from_temperature(temperature, energy_unit):
    """Inverse temperature 1/(k_B T) expressed in 1/<energy_unit>."""
    if temperature <= 0:
        raise UnitError("temperature must be positive; use zero_temperature for T=0")
    if energy_unit == "cm-1":
        kb = KBOLTZ_CM
    elif energy_unit == "rad/fs":
        kb = KBOLTZ_CM * TWO_PI_C
    elif energy_unit in _DIMENSIONLESS:
        kb = 1.0
    else:
        raise UnitError(f"unknown energy unit {energy_unit!r}")
    return 1.0 / (kb * temperature)
