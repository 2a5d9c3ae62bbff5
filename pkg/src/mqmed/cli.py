"""Configuration-driven runs: ``mqmed run <config>`` and ``mqmed describe <config>``.

One YAML document describes the model, the task and the numeric controls;
every output file carries the config hash and tool version in its header so
runs are auditable and byte-reproducible.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys

import numpy as np
import yaml

from . import __version__, dynamics, oracle, svgplot
from . import rates as rates_mod
from .errors import ConfigError, MqmedError, NonconvergenceError
from .model import (
    Bath,
    GenericMode,
    HarmonicMode,
    LocalHarmonicMode,
    SpinMode,
    SubsystemSpec,
    ThermalSpec,
    beta_from_temperature,
    read_spectral_density_table,
    reorganization_energies,
    unit_convert,
    validate_model,
)
from .quadrature import QuadratureSettings

TASKS = ("rates", "dynamics", "dsd", "spin", "verify", "oracle-compare")


# ---------------------------------------------------------------------------
# Config ingestion
# ---------------------------------------------------------------------------

def _require(mapping, key, context):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ConfigError(f"missing required key {context}.{key}")
    return mapping[key]


def load_config(path):
    """Parse the YAML config; errors carry line/key diagnostics."""
    try:
        with open(path) as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        doc = yaml.safe_load(raw)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"config parse error{where}: {exc.problem}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    doc["_sha256"] = hashlib.sha256(raw.encode()).hexdigest()
    doc["_dir"] = os.path.dirname(os.path.abspath(path))
    return doc


class RunConfig:
    """Validated model + task + numeric sections of one config document."""

    def __init__(self, doc):
        self.sha256 = doc["_sha256"]
        self.base_dir = doc["_dir"]
        units = doc.get("units") or {}
        self.energy_unit = units.get("energy", "dimensionless")
        self.time_unit = units.get("time", "dimensionless")
        self.temperature_unit = units.get("temperature", "K")
        self._time_factor = self._time_to_internal()

        self.subsystem = self._subsystem(_require(doc, "subsystem", "config"))
        self.bath = self._bath(_require(doc, "bath", "config"), doc["_dir"])
        self.thermal = self._thermal(_require(doc, "thermal", "config"))

        task = _require(doc, "task", "config")
        self.task = _require(task, "kind", "task")
        if self.task not in TASKS:
            raise ConfigError(f"task.kind must be one of {TASKS}, got {self.task!r}")
        self.task_options = dict(task)

        numeric = doc.get("numeric") or {}
        self.settings = self._quadrature(numeric.get("quadrature") or {})
        self.time_grid = self._grid(numeric.get("time_grid"), "numeric.time_grid",
                                    scale=self._time_factor)
        self.omega_grid = self._grid(numeric.get("omega_grid"), "numeric.omega_grid")
        self.truncation_levels = int(numeric.get("truncation_levels", 10))

        output = doc.get("output") or {}
        self.out_dir = output.get("directory", "mqmed-out")
        self.formats = output.get("formats", ["csv", "svg"])

        report = validate_model(self.subsystem, self.bath, self.thermal)
        if not report.ok:
            raise ConfigError("invalid model: " + "; ".join(report.violations))

    # -- sections ----------------------------------------------------------

    def _time_to_internal(self):
        if self.time_unit in ("dimensionless", "hbar=1"):
            return 1.0
        target = {"cm-1": "1/cm-1", "rad/fs": "1/(rad/fs)"}.get(self.energy_unit)
        if target is None:
            raise ConfigError(f"no time conversion for energy unit {self.energy_unit!r}")
        return unit_convert(1.0, self.time_unit, target)

    def _subsystem(self, sec):
        states = _require(sec, "states", "subsystem")
        labels = []
        energies = {}
        for st in states:
            lab = str(_require(st, "label", "subsystem.states[]"))
            labels.append(lab)
            energies[lab] = float(_require(st, "energy", "subsystem.states[]"))
        couplings = {}
        for cp in sec.get("couplings", []):
            a = str(_require(cp, "a", "subsystem.couplings[]"))
            b = str(_require(cp, "b", "subsystem.couplings[]"))
            couplings[(a, b)] = float(_require(cp, "value", "subsystem.couplings[]"))
        return SubsystemSpec(tuple(labels), energies, couplings)

    def _bath(self, sec, base_dir):
        kind = _require(sec, "kind", "bath")
        if kind == "sd-table":
            sd = _require(sec, "sd_file", "bath")
            if isinstance(sd, str):
                owner = sec.get("sd_owner")
                if owner is None:
                    raise ConfigError("bath.sd_owner required with a single sd_file")
                sd = {owner: sd}
            tables = {}
            for owner, fname in sd.items():
                path = os.path.join(base_dir, fname)
                if not os.path.exists(path):
                    raise ConfigError(f"bath.sd_file: {path} does not exist")
                tables[str(owner)] = read_spectral_density_table(
                    path, kind=(str(owner), str(owner)))
            return Bath(kind="sd-table", tables=tables)
        modes = []
        for i, m in enumerate(sec.get("modes", [])):
            ctx = f"bath.modes[{i}]"
            if kind == "ho-general":
                disp = {str(k): float(v)
                        for k, v in (_require(m, "displacements", ctx) or {}).items()}
                modes.append(HarmonicMode(float(_require(m, "omega", ctx)), disp))
            elif kind == "ho-local":
                modes.append(LocalHarmonicMode(
                    str(_require(m, "owner", ctx)),
                    float(_require(m, "omega", ctx)),
                    float(_require(m, "displacement", ctx))))
            elif kind == "spin":
                modes.append(SpinMode(float(_require(m, "omega", ctx)),
                                      float(_require(m, "gamma", ctx))))
            elif kind == "generic":
                vms = {str(k): np.array(v, dtype=complex)
                       for k, v in _require(m, "vmatrices", ctx).items()}
                modes.append(GenericMode(int(_require(m, "dim", ctx)), vms))
            else:
                raise ConfigError(f"unknown bath.kind {kind!r}")
        return Bath(kind=kind, modes=tuple(modes))

    def _thermal(self, sec):
        if sec.get("zero_temperature"):
            return ThermalSpec(beta=None, zero_temperature=True)
        if "beta" in sec:
            return ThermalSpec(beta=float(sec["beta"]))
        if "temperature" in sec:
            t = float(sec["temperature"])
            if self.temperature_unit != "K":
                raise ConfigError("thermal.temperature requires units.temperature = K")
            return ThermalSpec(beta=beta_from_temperature(t, self.energy_unit))
        raise ConfigError("thermal needs one of: beta, temperature, zero_temperature")

    def _quadrature(self, sec):
        kw = {}
        for key in ("rel_tol", "abs_tol", "tail_eps", "t_max_cap", "damping_eta"):
            if key in sec and sec[key] is not None:
                kw[key] = float(sec[key])
        return QuadratureSettings(**kw)

    def _grid(self, sec, context, scale=1.0):
        if sec is None:
            return None
        if isinstance(sec, list):
            arr = np.asarray([float(x) for x in sec]) * scale
        else:
            start = float(sec.get("start", 0.0))
            stop = float(_require(sec, "stop", context))
            n = int(_require(sec, "n", context))
            arr = np.linspace(start, stop, n) * scale
        if arr.size == 0 or np.any(np.diff(arr) <= 0):
            raise ConfigError(f"{context} must be nonempty and ascending")
        return arr

    # -- helpers -----------------------------------------------------------

    def header_lines(self, task):
        eta = self.settings.damping_eta
        return [
            f"mqmed v{__version__}",
            f"config_sha256: {self.sha256}",
            f"task: {task}",
            f"units: energy={self.energy_unit} time={self.time_unit}",
            f"damping_eta: {'none' if eta is None else f'{eta:.17g}'}",
        ]

    def times_out(self, internal_times):
        return internal_times / self._time_factor

    def workers(self):
        return rates_mod.default_workers()


# ---------------------------------------------------------------------------
# Tasks
# ---------------------------------------------------------------------------

def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _trajectory(cfg, rateset):
    if cfg.time_grid is None:
        raise ConfigError("numeric.time_grid is required for this task")
    initial = cfg.task_options.get("initial")
    if initial is None:
        raise ConfigError("task.initial (state label or mapping) is required")
    if isinstance(initial, str):
        p0 = {initial: 1.0}
    else:
        p0 = {str(k): float(v) for k, v in initial.items()}
    return dynamics.propagate(rateset, p0, cfg.time_grid)


def _task_rates(cfg, out):
    rs = rates_mod.compute_rateset(cfg.subsystem, cfg.bath, cfg.thermal,
                                   cfg.settings, workers=cfg.workers())
    with open(os.path.join(out, "rates.csv"), "w") as fh:
        rates_mod.write_rate_table(rs, fh, cfg.header_lines("rates"))
    return 0


def _task_dynamics(cfg, out):
    rs = rates_mod.compute_rateset(cfg.subsystem, cfg.bath, cfg.thermal,
                                   cfg.settings, workers=cfg.workers())
    traj = _trajectory(cfg, rs)
    t_out = cfg.times_out(traj.times)
    with open(os.path.join(out, "trajectory.csv"), "w") as fh:
        out_traj = dynamics.Trajectory(traj.labels, t_out, traj.populations,
                                       traj.dissipated, traj.e_sub, traj.residual)
        dynamics.write_trajectory(out_traj, fh, cfg.header_lines("dynamics"))
    if "svg" in cfg.formats and traj.dissipated.shape[1]:
        svg = svgplot.stacked_area_svg(
            t_out, traj.dissipated.T,
            [f"mode {j}" for j in range(traj.dissipated.shape[1])],
            title="per-mode dissipated energy",
            xlabel=f"t [{cfg.time_unit}]",
            ylabel=f"E [{cfg.energy_unit}]",
            comments=cfg.header_lines("dynamics"))
        _write(os.path.join(out, "dissipation.svg"), svg)
    _resid, peak = dynamics.energy_ledger(traj)
    lines = cfg.header_lines("dynamics") + [
        f"max_ledger_residual: {peak:.17g}",
        f"final_populations: " + ",".join(
            f"{lab}={traj.populations[-1, i]:.12g}"
            for i, lab in enumerate(traj.labels)),
        f"total_dissipated: {traj.dissipated[-1].sum():.12g}",
    ]
    _write(os.path.join(out, "ledger.txt"), "\n".join(lines) + "\n")
    return 0


def _task_dsd(cfg, out):
    if cfg.bath.kind != "sd-table":
        raise ConfigError("task dsd requires bath.kind = sd-table")
    if cfg.omega_grid is None:
        raise ConfigError("numeric.omega_grid is required for task dsd")
    rs = rates_mod.compute_rateset(cfg.subsystem, cfg.bath, cfg.thermal,
                                   cfg.settings, workers=cfg.workers())
    traj = _trajectory(cfg, rs)
    t_out = cfg.times_out(traj.times)
    pops = {lab: traj.populations[:, i] for i, lab in enumerate(traj.labels)}
    for owner in sorted(cfg.bath.tables):
        partners = [b for (a, b) in
                    [(p if p[0] == owner else (p[1], p[0]))
                     for p in cfg.subsystem.coupled_pairs()
                     if owner in p]]
        if not partners:
            continue
        tables = [rates_mod.dissipative_spectral_density(
            cfg.subsystem, cfg.bath, cfg.thermal, owner, b,
            cfg.omega_grid, cfg.settings) for b in partners]
        with open(os.path.join(out, f"dsd_{owner}.csv"), "w") as fh:
            for line in cfg.header_lines("dsd"):
                fh.write(f"# {line}\n")
            cols = ["omega"]
            for tb in tables:
                cols += [f"J_{tb.partner}<-{owner}", f"J_{owner}<-{tb.partner}"]
            fh.write(",".join(cols) + "\n")
            for i, w in enumerate(cfg.omega_grid):
                row = [f"{w:.17g}"]
                for tb in tables:
                    row += [f"{tb.forward[i]:.17g}", f"{tb.backward[i]:.17g}"]
                fh.write(",".join(row) + "\n")
        density = rates_mod.dissipation_density(tables, pops)
        if "svg" in cfg.formats:
            svg = svgplot.heatmap_svg(
                t_out, cfg.omega_grid, density,
                title=f"dissipation density, bath of {owner}",
                xlabel=f"t [{cfg.time_unit}]",
                ylabel=f"omega [{cfg.energy_unit}]",
                comments=cfg.header_lines("dsd"))
            _write(os.path.join(out, f"dsd_density_{owner}.svg"), svg)
    return 0


def _task_spin(cfg, out):
    exact = rates_mod.spin_rates(cfg.subsystem, cfg.bath, cfg.thermal,
                                 cfg.settings, variant="exact")
    weak = rates_mod.spin_rates(cfg.subsystem, cfg.bath, cfg.thermal,
                                cfg.settings, variant="weak",
                                allow_strong=bool(cfg.task_options.get("allow_strong")))
    with open(os.path.join(out, "spin_rates_exact.csv"), "w") as fh:
        rates_mod.write_rate_table(exact, fh, cfg.header_lines("spin (exact)"))
    with open(os.path.join(out, "spin_rates_weak.csv"), "w") as fh:
        rates_mod.write_rate_table(weak, fh, cfg.header_lines("spin (weak-coupling)"))
    lines = cfg.header_lines("spin") + ["pair,mode,exact,weak,rel_deviation"]
    for key in sorted(exact.K):
        e, w = exact.K[key], weak.K[key]
        dev = abs(e - w) / max(abs(e), 1e-300)
        lines.append(f"{key[0]}->{key[1]},,{e:.12g},{w:.12g},{dev:.6g}")
    for key in sorted(exact.Kdiss):
        e, w = exact.Kdiss[key], weak.Kdiss[key]
        dev = abs(e - w) / max(abs(e), 1e-300)
        lines.append(f"{key[1]}->{key[2]},{key[0]},{e:.12g},{w:.12g},{dev:.6g}")
    _write(os.path.join(out, "spin_comparison.csv"), "\n".join(lines) + "\n")
    return 0


def _task_verify(cfg, out):
    rates_file = cfg.task_options.get("rates_file")
    if rates_file:
        path = rates_file if os.path.isabs(rates_file) \
            else os.path.join(cfg.base_dir, rates_file)
        if not os.path.exists(path):
            raise ConfigError(f"task.rates_file: {path} does not exist")
        rs = rates_mod.read_rate_table(path)
        rs.energies = {lab: cfg.subsystem.energy(lab) for lab in rs.labels}
    else:
        rs = rates_mod.compute_rateset(cfg.subsystem, cfg.bath, cfg.thermal,
                                       cfg.settings, workers=cfg.workers())
    tol = float(cfg.task_options.get("tolerance", 1e-4))
    report = rates_mod.verify_balance(rs, cfg.subsystem, cfg.bath, cfg.thermal,
                                      tolerance=tol)
    lines = cfg.header_lines("verify")
    lines.append("check,pair,mode,actual,expected,rel_deviation,status")
    failed = []
    for row in report.rows:
        ok = row.deviation <= tol
        status = "pass" if ok else "FAIL"
        if not ok:
            failed.append(f"detailed balance ({row.kind}) {row.pair} mode={row.mode}")
        lines.append(f"{row.kind},{row.pair[0]}-{row.pair[1]},"
                     f"{'' if row.mode is None else row.mode},"
                     f"{row.actual:.12g},{row.expected:.12g},{row.deviation:.6g},{status}")
    # energy-conservation sum rule per ordered pair
    for (a, b) in sorted(rs.K):
        if rs.n_modes == 0:
            continue
        lhs = sum(rs.Kdiss.get((j, a, b), 0.0) for j in range(rs.n_modes))
        rhs = (rs.energies[a] - rs.energies[b]) * rs.K[(a, b)]
        if abs(rhs) < 1e-300:
            continue
        dev = abs(lhs - rhs) / abs(rhs)
        ok = dev <= max(tol, 1e-6)
        if not ok:
            failed.append(f"sum rule {a}->{b}")
        lines.append(f"sum-rule,{a}-{b},,{lhs:.12g},{rhs:.12g},{dev:.6g},"
                     f"{'pass' if ok else 'FAIL'}")
    lines.append(f"result: {'PASS' if not failed else 'FAIL: ' + '; '.join(failed)}")
    _write(os.path.join(out, "verify.txt"), "\n".join(lines) + "\n")
    return 0 if not failed else 2


def _task_oracle_compare(cfg, out):
    if cfg.time_grid is None:
        raise ConfigError("numeric.time_grid is required for task oracle-compare")
    initial = cfg.task_options.get("initial")
    if not isinstance(initial, str):
        raise ConfigError("task.initial must be a state label for oracle-compare")
    ts = oracle.build_truncated(cfg.subsystem, cfg.bath,
                                n_levels=cfg.truncation_levels)
    exact = oracle.exact_propagation(ts, initial, cfg.thermal, cfg.time_grid,
                                     subsystem=cfg.subsystem)
    rs = rates_mod.compute_rateset(cfg.subsystem, cfg.bath, cfg.thermal,
                                   cfg.settings, workers=cfg.workers())
    traj = dynamics.propagate(rs, {initial: 1.0}, cfg.time_grid)
    report = oracle.compare_report(
        exact, traj, cfg.subsystem, cfg.bath, cfg.thermal,
        tol_population=float(cfg.task_options.get("tol_population", 0.2)),
        tol_dissipation=float(cfg.task_options.get("tol_dissipation", 0.2)))

    t_out = cfg.times_out(cfg.time_grid)
    with open(os.path.join(out, "trajectory.csv"), "w") as fh:
        out_traj = dynamics.Trajectory(traj.labels, t_out, traj.populations,
                                       traj.dissipated, traj.e_sub, traj.residual)
        dynamics.write_trajectory(out_traj, fh, cfg.header_lines("oracle-compare"),
                                  extra_col=("source", "mqmed"))
    with open(os.path.join(out, "oracle_trajectory.csv"), "w") as fh:
        resid = (exact.e_sub - exact.e_sub[0]) + exact.dissipated.sum(axis=1)
        or_traj = dynamics.Trajectory(exact.labels, t_out, exact.populations,
                                      exact.dissipated, exact.e_sub, resid)
        dynamics.write_trajectory(or_traj, fh, cfg.header_lines("oracle-compare"),
                                  extra_col=("source", "oracle"))
    header = "\n".join(f"# {line}" for line in cfg.header_lines("oracle-compare"))
    _write(os.path.join(out, "comparison.txt"), header + "\n" + report.format_text())
    return 0 if report.passed else 2


_RUNNERS = {
    "rates": _task_rates,
    "dynamics": _task_dynamics,
    "dsd": _task_dsd,
    "spin": _task_spin,
    "verify": _task_verify,
    "oracle-compare": _task_oracle_compare,
}


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def run(config_path):
    cfg = RunConfig(load_config(config_path))
    out = cfg.out_dir
    if not os.path.isabs(out):
        out = os.path.join(os.path.dirname(os.path.abspath(config_path)), out)
    os.makedirs(out, exist_ok=True)
    return _RUNNERS[cfg.task](cfg, out)


def describe(config_path):
    cfg = RunConfig(load_config(config_path))
    sub, bath, th = cfg.subsystem, cfg.bath, cfg.thermal
    print(f"mqmed v{__version__}  config {cfg.sha256[:12]}")
    print(f"states ({len(sub.labels)}):")
    for lab in sub.labels:
        print(f"  {lab}: E = {sub.energy(lab):g} {cfg.energy_unit}")
    pairs = sub.coupled_pairs()
    print(f"coupled pairs ({len(pairs)}):")
    for a, b in pairs:
        print(f"  {a}-{b}: V = {sub.coupling(a, b):g}")
    n = bath.n_modes()
    if bath.kind == "sd-table":
        print(f"bath: tabulated spectral densities for {sorted(bath.tables)}")
        for lab, tb in sorted(bath.tables.items()):
            print(f"  {lab}: {tb.grid.size} points on [{tb.grid[0]:g}, {tb.grid[-1]:g}], "
                  f"reorganization energy {tb.reorganization_energy():g}")
    else:
        print(f"bath: {bath.kind}, {n} modes" + (" (warning: empty bath)" if n == 0 else ""))
    if bath.is_harmonic and n:
        lam, _ = reorganization_energies(bath, sub.labels)
        print("reorganization energies:")
        for lab in sub.labels:
            print(f"  Lambda_{lab}{lab} = {lam[(lab, lab)]:g}")
    diag = oracle.regime_diagnostics(sub, bath, th)
    print("regime diagnostics:")
    for k, v in diag.items():
        print(f"  {k} = {v:g}")
    if bath.kind == "spin" and n:
        ratios = [abs(m.gamma) / m.omega for m in bath.modes if m.omega > 0]
        if ratios:
            flag = "ok" if max(ratios) <= rates_mod.WEAK_COUPLING_GUARD else "VIOLATED"
            print(f"  weak-coupling validity (gamma/omega <= "
                  f"{rates_mod.WEAK_COUPLING_GUARD}): max = {max(ratios):g} [{flag}]")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="mqmed",
        description="mode-resolved dissipation rates for open quantum systems")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute the task in a config document")
    p_run.add_argument("config")
    p_desc = sub.add_parser("describe", help="summarize a model without integrating")
    p_desc.add_argument("config")
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return run(args.config)
        return describe(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NonconvergenceError as exc:
        print(f"numeric nonconvergence: {exc}", file=sys.stderr)
        return 1
    except MqmedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
