"""Command-line experiment runner.

    qratchet run --experiment quantum-chain --preset fig1 --out runs/fig1
    qratchet run --config my_run.json --seed 3
    qratchet plot runs/fig1

Settings resolve in order: built-in defaults, ``--preset``, ``--config``
(a JSON object whose keys are the long option names with ``_`` for ``-``),
then explicit flags. The output directory comes from ``--out``, else
``$QRATCHET_OUTPUT_DIR``, else ``runs/<experiment>``.

Exit status: 0 success, 2 usage, 3 validation, 4 truncation overflow,
5 unstable coupling.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import json
import os
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, bogoliubov, classical, dynamics, fock, output, ratchet, shorttime
from ._accel import default_backend
from .dynamics import Coupling, ModelParams, TruncationGuard
from .errors import (NonPositiveProbability, QRatchetError, TruncationOverflow, TruncationWarning,
                     UnstableCoupling, ValidationError)
from .fock import Space, SpaceSpec

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_TRUNCATION, EXIT_UNSTABLE = 0, 2, 3, 4, 5

EXPERIMENTS = ("quantum-chain", "quantum-ensemble", "shorttime", "bogoliubov-validate",
               "classical-toggle", "classical-freq")
OUTPUT_ENV = "QRATCHET_OUTPUT_DIR"


@dataclass(frozen=True)
class RunConfig:
    experiment: str = "quantum-chain"
    preset: str | None = None
    # model
    omega_a: float = 1.0
    omega_b: float = 2.0
    g: float = 0.2
    coupling: str = "sb"
    # protocol
    contact_time: float = 4.0
    n_encounters: int = 25
    n_a: int = 2
    n_b: int = 1
    z_a: complex | None = None
    z_b: complex | None = None
    levels: int = 21
    pool_size: int = 8
    workers: int = 1
    seed: int = 0
    audit_levels: int | None = None
    t_grid: tuple = shorttime.DEFAULT_T_GRID
    # classical
    gamma: float = 0.3
    omega_prime: float = 1.5
    mean_hold: float = 1.0
    hold_law: str = "exponential"
    hold_lo: float = 0.5
    hold_hi: float = 1.5
    trajectories: int = 10_000
    toggles: int = 200
    kernels: str | None = None
    # tolerances
    tol_hermitian: float = fock.Tolerances.hermitian
    tol_trace: float = fock.Tolerances.trace
    tol_eigen_floor: float = fock.Tolerances.eigenvalue_floor
    tail_warn: float = TruncationGuard.warn
    tail_hard: float = TruncationGuard.hard
    # output
    out_dir: str | None = None
    plot: bool = False

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("z_a", "z_b"):
            if d[key] is not None:
                d[key] = [d[key].real, d[key].imag]
        d["t_grid"] = list(d["t_grid"])
        return d


FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
PRESET_KEYS = ratchet.PRESETS


def _complex(value) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    return complex(str(value).replace(" ", ""))


def _coerce(name: str, value):
    if value is None:
        return None
    kind = FIELDS[name].type
    try:
        if name in ("z_a", "z_b"):
            return _complex(value)
        if name == "t_grid":
            return tuple(float(v) for v in value)
        if name == "plot":
            if not isinstance(value, bool):
                raise TypeError("expected true/false")
            return value
        if "int" in kind:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError("expected an integer")
            return int(value)
        if "float" in kind:
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: cannot use {value!r} ({exc})") from None


def _preset_values(name: str) -> dict:
    if name not in PRESET_KEYS:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESET_KEYS)}")
    return dict(PRESET_KEYS[name])


def load_config_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ValidationError("config file must hold a JSON object")
    unknown = sorted(set(data) - set(FIELDS))
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
    return data


def parse_config(overrides: dict | None = None, config_file=None) -> RunConfig:
    """Merge defaults, preset, config file and explicit overrides; validate."""
    overrides = dict(overrides or {})
    unknown = sorted(set(overrides) - set(FIELDS))
    if unknown:
        raise ValidationError(f"unknown settings: {', '.join(unknown)}")
    from_file = load_config_file(config_file) if config_file else {}
    preset_name = overrides.get("preset", from_file.get("preset"))
    merged = {}
    if preset_name is not None:
        merged.update(_preset_values(preset_name))
        merged["preset"] = preset_name
    merged.update(from_file)
    merged.update(overrides)
    values = {k: _coerce(k, v) for k, v in merged.items()}
    config = RunConfig(**values)
    validate(config)
    return config


def validate(c: RunConfig) -> None:
    def need(cond, message):
        if not cond:
            raise ValidationError(message)

    need(c.experiment in EXPERIMENTS, f"experiment must be one of {EXPERIMENTS}")
    need(c.coupling in ("sb", "jc"), "coupling must be 'sb' or 'jc'")
    need(c.hold_law in ("exponential", "uniform"), "hold_law must be 'exponential' or 'uniform'")
    need(c.kernels in (None, "numba", "numpy"), "kernels must be 'numba' or 'numpy'")
    need(c.omega_a > 0, f"omega_a must be positive, got {c.omega_a}")
    need(c.omega_b > 0, f"omega_b must be positive, got {c.omega_b}")
    need(c.omega_prime > 0, f"omega_prime must be positive, got {c.omega_prime}")
    need(np.isfinite(c.g), "g must be finite")
    need(c.contact_time >= 0, "contact_time must be >= 0")
    need(c.n_encounters >= 1, f"n_encounters must be >= 1, got {c.n_encounters}")
    need(c.levels >= 2, "levels must be >= 2")
    need(0 <= c.n_a < c.levels and 0 <= c.n_b < c.levels, "initial Fock numbers must be below levels")
    need(c.pool_size >= 1, "pool_size must be >= 1")
    need(c.workers >= 1, "workers must be >= 1")
    need(c.audit_levels is None or c.audit_levels >= 2, "audit_levels must be >= 2")
    need(len(c.t_grid) >= 2 and all(t >= 0 for t in c.t_grid), "t_grid needs >= 2 non-negative times")
    need(c.mean_hold > 0, "mean_hold must be positive")
    need(0 <= c.hold_lo < c.hold_hi, "need 0 <= hold_lo < hold_hi")
    need(c.trajectories >= classical.MIN_TRAJECTORIES,
         f"trajectories must be >= {classical.MIN_TRAJECTORIES}")
    need(c.toggles >= 1, "toggles must be >= 1")
    need(c.tol_hermitian > 0 and c.tol_trace > 0 and c.tol_eigen_floor <= 0, "tolerances out of range")
    need(0 < c.tail_warn <= c.tail_hard, "need 0 < tail_warn <= tail_hard")
    # domain objects carry their own invariants
    model_params(c)
    SpaceSpec.square(c.levels)
    for z in (c.z_a, c.z_b):
        if z is not None:
            tail = fock.coherent_tail_mass(z, c.levels)
            need(tail <= fock.tolerances.coherent_tail,
                 f"coherent amplitude {z} leaks {tail:.2e} past {c.levels} levels")


def model_params(c: RunConfig) -> ModelParams:
    return ModelParams(c.omega_a, c.omega_b, c.g, Coupling(c.coupling))


def classical_params(c: RunConfig) -> classical.ClassicalParams:
    law = classical.Exponential() if c.hold_law == "exponential" else classical.UniformRange(c.hold_lo, c.hold_hi)
    return classical.ClassicalParams(c.omega_a, c.omega_b, c.gamma, c.mean_hold, law, c.seed)


def protocol_from_config(c: RunConfig) -> ratchet.ProtocolSpec:
    mode = (ratchet.Ensemble(c.pool_size, c.seed, c.workers)
            if c.experiment == "quantum-ensemble" else ratchet.Chain())
    return ratchet.ProtocolSpec(
        params=model_params(c),
        spec=SpaceSpec.square(c.levels),
        contact_time=c.contact_time,
        n_encounters=c.n_encounters,
        mode=mode,
        initial_a=ratchet.Coherent(c.z_a) if c.z_a is not None else ratchet.Fock(c.n_a),
        initial_b=ratchet.Coherent(c.z_b) if c.z_b is not None else ratchet.Fock(c.n_b),
        guard=TruncationGuard(c.tail_warn, c.tail_hard),
    )


# -- experiments -------------------------------------------------------------


def _stability_quantum(params: ModelParams) -> dict:
    if params.coupling is Coupling.JAYNES_CUMMINGS:
        return {"coupling": "jc", "checked": True, "stable": True,
                "note": "number-conserving coupling has no inverted modes"}
    info = {"coupling": "sb", "checked": True,
            "bound_g_squared": params.omega_a * params.omega_b / 4, "g_squared": params.g**2}
    try:
        modes = bogoliubov.sb_normal_modes(params)
    except UnstableCoupling as exc:
        info.update(stable=False, error=str(exc))
        return info
    info.update(stable=True, omega_A=modes.omega_A, omega_B=modes.omega_B, variant=modes.variant,
                variants=bogoliubov.frequency_variants(params))
    return info


def _fit_row(name, fit_fn):
    try:
        f = fit_fn()
    except (NonPositiveProbability, ValidationError, QRatchetError):
        return (name, float("nan"), float("nan"), float("nan"), 0)
    return (name, f.slope, f.intercept, f.r_squared, f.n_points)


def _write_quantum(run_dir, records, spec: SpaceSpec) -> None:
    output.write_csv(run_dir, "growth.csv", [
        (r.index, r.mean_n_a, r.mean_n_b, r.free_energy, r.purity_a, r.purity_b, r.tail_mass)
        for r in records])
    output.write_csv(run_dir, "energy.csv", [
        (r.index, r.energy_start, r.energy_contact_end, r.energy_after_product, r.interaction_energy,
         r.delta_free, r.delta_h, r.delta_v) for r in records])
    if records:
        last = records[-1]
        n = max(spec.levels_a, spec.levels_b)
        pa = np.pad(last.dist_a, (0, n - spec.levels_a))
        pb = np.pad(last.dist_b, (0, n - spec.levels_b))
        output.write_csv(run_dir, "dist_final.csv", [(i, pa[i], pb[i]) for i in range(n)])
        rows = [
            _fit_row("growth_n_a", lambda: ratchet.fit_linear_growth(records, "mean_n_a")),
            _fit_row("growth_n_b", lambda: ratchet.fit_linear_growth(records, "mean_n_b")),
            _fit_row("dist_a_log", lambda: ratchet.fit_exponential(last.dist_a)),
            _fit_row("dist_b_log", lambda: ratchet.fit_exponential(last.dist_b)),
        ]
        output.write_csv(run_dir, "fits.csv", rows)


def _warnings_from(records) -> list:
    return [{"encounter": r.index, "tail_mass": r.tail_mass} for r in records if r.truncation_warning]


def run_quantum(c: RunConfig, run_dir: Path, meta: dict) -> None:
    protocol = protocol_from_config(c)
    meta["stability"] = _stability_quantum(protocol.params)
    if not meta["stability"]["stable"]:
        raise UnstableCoupling(meta["stability"]["error"])
    if (protocol.params.coupling is Coupling.SPIN_BOSON and c.z_a is None and c.z_b is None):
        audit = bogoliubov.support_audit(protocol.params, c.n_a, c.n_b, c.contact_time,
                                         levels=c.audit_levels or c.levels)
        meta["support_audit"] = dataclasses.asdict(audit)
    try:
        records = ratchet.run(protocol)
    except TruncationOverflow as exc:
        meta["truncation_warnings"] = _warnings_from(exc.records) + [
            {"encounter": exc.index, "tail_mass": exc.tail_mass, "overflow": True}]
        _write_quantum(run_dir, exc.records, protocol.spec)
        raise
    meta["truncation_warnings"] = _warnings_from(records)
    _write_quantum(run_dir, records, protocol.spec)
    print(f"{len(records)} encounters: <n_a> {records[0].mean_n_a:.6g} -> {records[-1].mean_n_a:.6g}, "
          f"<n_b> {records[0].mean_n_b:.6g} -> {records[-1].mean_n_b:.6g}")


def run_shorttime(c: RunConfig, run_dir: Path, meta: dict) -> None:
    factors = shorttime.oscillator_factors(
        c.omega_a, c.omega_b, c.g,
        fock.fock_state(c.n_a, c.levels, Space.A), fock.fock_state(c.n_b, c.levels, Space.B))
    table = shorttime.series_vs_direct(factors, c.t_grid)
    output.write_csv(run_dir, "shorttime.csv",
                     list(zip(table.t, table.direct, table.series, table.ratio)))
    t_min = min(t for t in table.t if t > 0)
    output.write_csv(run_dir, "summary.csv", [
        ("c2_series", table.c2),
        ("c2_fitted", table.fitted_c2),
        ("c3_fitted", table.fitted_c3),
        ("c2_relative_error", table.relative_error),
        ("richardson_remainder_tmin", shorttime.richardson_remainder(factors, t_min)),
    ])
    print(f"c2 series {table.c2:.10g}, fitted {table.fitted_c2:.10g} "
          f"(relative error {table.relative_error:.2e})")


def run_bogoliubov(c: RunConfig, run_dir: Path, meta: dict) -> None:
    params = ModelParams(c.omega_a, c.omega_b, c.g, Coupling.SPIN_BOSON)
    meta["stability"] = _stability_quantum(params)
    modes = bogoliubov.sb_normal_modes(params)
    check = bogoliubov.validate_diagonalization(modes, params, levels=c.levels)
    coeffs = bogoliubov.heisenberg_coeffs(modes, c.contact_time)
    na_an, nb_an = bogoliubov.number_via_coeffs(c.n_a, c.n_b, coeffs)
    spec = SpaceSpec.square(c.levels)
    rho = dynamics.evolve(
        fock.tensor_state(fock.fock_state(c.n_a, c.levels, Space.A), fock.fock_state(c.n_b, c.levels, Space.B)),
        dynamics.cached_propagator(params, spec, c.contact_time))
    ra, rb = fock.marginals(rho, spec)
    audit = bogoliubov.support_audit(params, c.n_a, c.n_b, c.contact_time, levels=c.levels)
    meta["support_audit"] = dataclasses.asdict(audit)
    variants = bogoliubov.frequency_variants(params)
    defect_a, defect_b = coeffs.commutator_defects()
    rows = [
        ("theta", modes.theta), ("omega_A", modes.omega_A), ("omega_B", modes.omega_B),
        ("chi", modes.chi), ("phi", modes.phi), ("phi_prime", modes.phi_prime),
        ("chi_prime", modes.chi_prime), ("gamma", modes.gamma), ("variant", modes.variant),
        ("residual", check.residual), ("gap_mismatch", check.gap_mismatch),
        ("ground_mismatch", check.ground_mismatch),
    ]
    for name, info in variants.items():
        rows += [(f"{name}_omega_A", info["omega_A"]), (f"{name}_omega_B", info["omega_B"]),
                 (f"{name}_residual", info["residual"])]
    rows += [
        ("commutator_defect_a", defect_a), ("commutator_defect_b", defect_b),
        ("n_a_analytic", na_an), ("n_b_analytic", nb_an),
        ("n_a_numeric", fock.mean_number(ra)), ("n_b_numeric", fock.mean_number(rb)),
        ("support_mass_a_above", audit.mass_a_above), ("support_mass_b_above", audit.mass_b_above),
        ("support_mass_either_above", audit.mass_either_above),
    ]
    output.write_csv(run_dir, "summary.csv", rows)
    print(f"W_A={modes.omega_A:.12g} W_B={modes.omega_B:.12g} residual={check.residual:.2e} "
          f"gap mismatch={check.gap_mismatch:.2e}")


def _write_classical(run_dir: Path, ens: classical.EnsembleStats, mean_hold: float) -> None:
    diag = classical.lognormal_diagnostics(ens)
    fits = classical.walk_fits(diag, mean_hold)
    output.write_csv(run_dir, "classical.csv", [
        (k, diag.mean_log[k], diag.var_log[k], diag.mean_energy[k], diag.ratio[k])
        for k in range(len(diag.mean_log))])
    output.write_csv(run_dir, "fits.csv", [
        (name, f.slope, f.intercept, f.r_squared, f.n_points)
        for name, f in (("var_logE", fits.variance), ("log_mean_E", fits.growth),
                        ("mean_logE", fits.drift))])
    output.write_csv(run_dir, "summary.csv", [
        ("diffusion_per_toggle", fits.diffusion_per_toggle),
        ("diffusion_per_time", fits.diffusion_per_time),
        ("drift_per_toggle", fits.drift.slope),
        ("ratio_final", float(diag.ratio[-1])),
        ("predicted_ratio_final", float(diag.predicted[-1])),
        ("lognormal_z_final", diag.z_score(-1)),
    ])
    print(f"var(log E) slope {fits.variance.slope:.4g} (r2 {fits.variance.r_squared:.4f}), "
          f"log<E> slope {fits.growth.slope:.4g} (r2 {fits.growth.r_squared:.4f}), "
          f"lognormal z {diag.z_score(-1):+.2f}")


def run_classical_toggle(c: RunConfig, run_dir: Path, meta: dict) -> None:
    params = classical_params(c)
    meta["stability"] = {"checked": True, "stable": True, "gamma_squared": c.gamma**2,
                         "bound": (c.omega_a * c.omega_b) ** 2}
    ens = classical.run_toggle_ensemble(params, c.trajectories, c.toggles, backend=c.kernels)
    _write_classical(run_dir, ens, c.mean_hold)


def run_classical_freq(c: RunConfig, run_dir: Path, meta: dict) -> None:
    law = classical.Exponential() if c.hold_law == "exponential" else classical.UniformRange(c.hold_lo, c.hold_hi)
    meta["stability"] = {"checked": True, "stable": True}
    ens = classical.run_freq_switch_ensemble(c.omega_a, c.omega_prime, c.trajectories, c.toggles,
                                             mean_hold=c.mean_hold, hold_law=law, seed=c.seed,
                                             backend=c.kernels)
    _write_classical(run_dir, ens, c.mean_hold)


RUNNERS = {
    "quantum-chain": run_quantum,
    "quantum-ensemble": run_quantum,
    "shorttime": run_shorttime,
    "bogoliubov-validate": run_bogoliubov,
    "classical-toggle": run_classical_toggle,
    "classical-freq": run_classical_freq,
}


def resolve_out_dir(c: RunConfig) -> Path:
    if c.out_dir:
        return Path(c.out_dir)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env)
    return Path("runs") / c.experiment


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def run(config: RunConfig) -> int:
    """Execute one experiment; returns the process exit status."""
    if config.kernels is None:
        config = dataclasses.replace(config, kernels=default_backend())
    run_dir = resolve_out_dir(config)
    run_dir.mkdir(parents=True, exist_ok=True)
    output.clear_previous(run_dir)
    meta = {key: None for key in output.METADATA_KEYS}
    meta.update(artifact="qratchet", version=__version__, experiment=config.experiment,
                config=config.echo(), seed=config.seed, started_at=_now(), partial=False,
                truncation_warnings=[])
    previous = fock.set_tolerances(hermitian=config.tol_hermitian, trace=config.tol_trace,
                                   eigenvalue_floor=config.tol_eigen_floor)
    code, status = EXIT_OK, "ok"
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            RUNNERS[config.experiment](config, run_dir, meta)
    except TruncationOverflow as exc:
        code, status = EXIT_TRUNCATION, "truncation_overflow"
        meta.update(partial=True, error=str(exc))
    except UnstableCoupling as exc:
        code, status = EXIT_UNSTABLE, "unstable_coupling"
        meta.update(partial=True, error=str(exc))
    finally:
        fock.set_tolerances(**dataclasses.asdict(previous))
    meta.update(status=status, exit_code=code, finished_at=_now(),
                files=sorted(p.name[: -len(output.PARTIAL_SUFFIX)] for p in output.pending(run_dir)))
    if meta["truncation_warnings"]:
        print(f"warning: cutoff population above {config.tail_warn:g} at "
              f"{len(meta['truncation_warnings'])} encounter(s); see metadata.json", file=sys.stderr)
    output.write_metadata(run_dir, meta)
    output.finalize(run_dir)
    if config.plot and code == EXIT_OK:
        output.emit_plot_script(run_dir)
    if meta["error"]:
        print(f"error: {meta['error']}", file=sys.stderr)
    print(f"results in {run_dir}")
    return code


# -- argument parsing --------------------------------------------------------


def _add_run_options(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--experiment", choices=EXPERIMENTS, default=S)
    p.add_argument("--preset", choices=sorted(PRESET_KEYS), default=S)
    p.add_argument("--config", dest="config_file", metavar="FILE.json", default=None,
                   help="JSON object of settings (keys as below, '-' written '_')")
    m = p.add_argument_group("model")
    m.add_argument("--omega-a", type=float, default=S)
    m.add_argument("--omega-b", type=float, default=S)
    m.add_argument("--g", type=float, default=S, help="coupling strength")
    m.add_argument("--coupling", choices=("sb", "jc"), default=S)
    q = p.add_argument_group("quantum protocol")
    q.add_argument("--contact-time", type=float, default=S)
    q.add_argument("--encounters", dest="n_encounters", type=int, default=S)
    q.add_argument("--n-a", type=int, default=S, help="initial Fock number of A")
    q.add_argument("--n-b", type=int, default=S, help="initial Fock number of B")
    q.add_argument("--z-a", default=S, help="coherent amplitude of A, e.g. 0.3+0.1j (overrides --n-a)")
    q.add_argument("--z-b", default=S, help="coherent amplitude of B (overrides --n-b)")
    q.add_argument("--levels", type=int, default=S, help="levels per oscillator (cutoff + 1)")
    q.add_argument("--pool-size", type=int, default=S)
    q.add_argument("--workers", type=int, default=S)
    q.add_argument("--audit-levels", type=int, default=S)
    q.add_argument("--t-grid", type=float, nargs="+", default=S, help="contact times for shorttime")
    c = p.add_argument_group("classical")
    c.add_argument("--gamma", type=float, default=S, help="x_a x_b coupling")
    c.add_argument("--omega-prime", type=float, default=S, help="second frequency for classical-freq")
    c.add_argument("--mean-hold", type=float, default=S)
    c.add_argument("--hold-law", choices=("exponential", "uniform"), default=S)
    c.add_argument("--hold-lo", type=float, default=S)
    c.add_argument("--hold-hi", type=float, default=S)
    c.add_argument("--trajectories", type=int, default=S)
    c.add_argument("--toggles", type=int, default=S)
    c.add_argument("--kernels", choices=("numba", "numpy"), default=S)
    t = p.add_argument_group("tolerances")
    t.add_argument("--tol-hermitian", type=float, default=S)
    t.add_argument("--tol-trace", type=float, default=S)
    t.add_argument("--tol-eigen-floor", type=float, default=S)
    t.add_argument("--tail-warn", type=float, default=S)
    t.add_argument("--tail-hard", type=float, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--out", dest="out_dir", default=S)
    p.add_argument("--plot", action="store_true", default=S, help="also write plot.gp")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qratchet", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="{run,plot}")
    _add_run_options(sub.add_parser("run", help="run one experiment"))
    plot = sub.add_parser("plot", help="write a gnuplot script for a run directory")
    plot.add_argument("run_dir")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.command == "plot":
        try:
            path = output.emit_plot_script(args.run_dir)
        except FileNotFoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        print(path)
        return EXIT_OK

    settings = vars(args)
    settings.pop("command")
    config_file = settings.pop("config_file")
    try:
        config = parse_config(settings, config_file)
    except UnstableCoupling as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run(config)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
