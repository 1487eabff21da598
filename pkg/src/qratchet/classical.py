"""Classical analogue: two oscillators whose ``gamma x_a x_b`` coupling is
switched on and off at random times.

Each switch moves the phase point onto a torus of the new dynamics, in
general at a different energy. Because the dynamics is linear the walk is
multiplicative, so ``log E`` diffuses and ``<E>`` grows exponentially.
Energies are always the *uncoupled* ``sum p^2/2 + w^2 x^2/2`` at switch
instants; the coupled energy differs by ``gamma x_a x_b`` and is kept too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import kernels
from .errors import UnstableCoupling, ValidationError
from .fits import FitResult, line_fit
from .streams import stream


@dataclass(frozen=True)
class Exponential:
    """Holds ~ Exp with mean ``mean_hold``."""


@dataclass(frozen=True)
class UniformRange:
    lo: float
    hi: float

    def __post_init__(self):
        if not 0 <= self.lo < self.hi:
            raise ValidationError(f"need 0 <= lo < hi, got ({self.lo}, {self.hi})")


@dataclass(frozen=True)
class Fixed:
    """Deterministic holds, cycled: ``durations[k % len(durations)]``."""

    durations: tuple

    def __post_init__(self):
        if not self.durations or any(d < 0 for d in self.durations):
            raise ValidationError("Fixed needs a non-empty tuple of non-negative durations")


HoldLaw = Union[Exponential, UniformRange, Fixed]


@dataclass(frozen=True)
class ClassicalParams:
    omega_a: float
    omega_b: float
    gamma: float
    mean_hold: float = 1.0
    hold_law: HoldLaw = Exponential()
    seed: int = 0

    def __post_init__(self):
        if not (self.omega_a > 0 and self.omega_b > 0):
            raise ValidationError("frequencies must be positive")
        if not self.mean_hold > 0:
            raise ValidationError("mean_hold must be positive")
        if self.gamma**2 >= (self.omega_a * self.omega_b) ** 2:
            raise UnstableCoupling(
                f"gamma^2 = {self.gamma**2:.6g} must stay below w_a^2 w_b^2 = "
                f"{(self.omega_a * self.omega_b) ** 2:.6g}"
            )


@dataclass(frozen=True)
class ClassicalState:
    x_a: float
    p_a: float
    x_b: float
    p_b: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.as_array())):
            raise ValidationError("phase-space coordinates must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x_a, self.p_a, self.x_b, self.p_b], dtype=float)

    def scaled(self, factor: float) -> "ClassicalState":
        return ClassicalState(*(factor * self.as_array()))


DEFAULT_INITIAL = ClassicalState(1.0, 0.0, 1.0, 0.0)


def uncoupled_energy(state: ClassicalState, params: ClassicalParams) -> float:
    x_a, p_a, x_b, p_b = state.as_array()
    return 0.5 * (p_a**2 + p_b**2 + params.omega_a**2 * x_a**2 + params.omega_b**2 * x_b**2)


def coupled_energy(state: ClassicalState, params: ClassicalParams) -> float:
    return uncoupled_energy(state, params) + params.gamma * state.x_a * state.x_b


def configurations(params: ClassicalParams) -> tuple[np.ndarray, np.ndarray]:
    """Mode bases and frequencies: index 0 uncoupled, 1 coupled."""
    k = np.array([[params.omega_a**2, params.gamma], [params.gamma, params.omega_b**2]])
    w2, vecs = np.linalg.eigh(k)
    if np.any(w2 <= 0):
        raise UnstableCoupling(f"coupled stiffness has eigenvalues {w2}")
    bases = np.stack([np.eye(2), vecs])
    freqs = np.array([[params.omega_a, params.omega_b], np.sqrt(w2)])
    return bases, freqs


def segment_matrix(params: ClassicalParams, coupled: bool, duration: float) -> np.ndarray:
    """Linear map of ``(x_a, p_a, x_b, p_b)`` over one segment."""
    bases, freqs = configurations(params)
    r, w = bases[int(coupled)], freqs[int(coupled)]
    # modal rotation in (q1, q2, m1, m2) ordering
    c, s = np.cos(w * duration), np.sin(w * duration)
    rot = np.block([[np.diag(c), np.diag(s / w)], [np.diag(-w * s), np.diag(c)]])
    to_modes = np.block([[r.T, np.zeros((2, 2))], [np.zeros((2, 2)), r.T]])
    xp_map = to_modes.T @ rot @ to_modes  # in (x_a, x_b, p_a, p_b) ordering
    perm = [0, 2, 1, 3]
    return xp_map[np.ix_(perm, perm)]


def evolve_segment(state: ClassicalState, coupled: bool, duration: float,
                   params: ClassicalParams) -> ClassicalState:
    return ClassicalState(*(segment_matrix(params, coupled, duration) @ state.as_array()))


def draw_holds(hold_law: HoldLaw, mean_hold: float, n: int, seed: int, index: int) -> np.ndarray:
    """``n`` hold durations for trajectory ``index``; a pure function of its arguments."""
    if isinstance(hold_law, Fixed):
        d = np.asarray(hold_law.durations, dtype=float)
        return d[np.arange(n) % len(d)]
    rng = stream(seed, index)
    if isinstance(hold_law, Exponential):
        return rng.exponential(mean_hold, n)
    if isinstance(hold_law, UniformRange):
        return rng.uniform(hold_law.lo, hold_law.hi, n)
    raise ValidationError(f"unknown hold law {hold_law!r}")


@dataclass(frozen=True)
class TrajectoryStats:
    energies: np.ndarray = field(repr=False)
    coupled_energies: np.ndarray = field(repr=False)
    holds: np.ndarray = field(repr=False)
    toggle_count: int

    @property
    def log_energies(self) -> np.ndarray:
        return np.log(self.energies)


@dataclass(frozen=True)
class EnsembleStats:
    """Energies of many trajectories, shape ``(n_trajectories, n_toggles + 1)``."""

    energies: np.ndarray = field(repr=False)
    coupled_energies: np.ndarray = field(repr=False)
    toggle_count: int

    @property
    def log_energies(self) -> np.ndarray:
        return np.log(self.energies)

    def trajectory(self, i: int) -> TrajectoryStats:
        return TrajectoryStats(self.energies[i], self.coupled_energies[i], np.empty(0), self.toggle_count)


def _starts(initial: ClassicalState, n: int) -> tuple[np.ndarray, np.ndarray]:
    s = initial.as_array()
    return np.tile(s[[0, 2]], (n, 1)), np.tile(s[[1, 3]], (n, 1))


def run_toggle_ensemble(params: ClassicalParams, n_trajectories: int, n_toggles: int,
                        initial: ClassicalState = DEFAULT_INITIAL, backend: str | None = None) -> EnsembleStats:
    """``n_trajectories`` independent toggle runs starting uncoupled.

    Trajectory ``i`` draws its holds from stream ``(seed, i)``, so any subset
    of the ensemble can be recomputed on its own.
    """
    if n_trajectories < 1 or n_toggles < 1:
        raise ValidationError("need at least one trajectory and one toggle")
    bases, freqs = configurations(params)
    holds = np.stack([draw_holds(params.hold_law, params.mean_hold, n_toggles, params.seed, i)
                      for i in range(n_trajectories)])
    x0, p0 = _starts(initial, n_trajectories)
    energies, cross, _, _ = kernels.propagate(x0, p0, holds, bases, freqs, 0,
                                              freqs[0], backend=backend)
    return EnsembleStats(energies, energies + params.gamma * cross, n_toggles)


def run_toggle_trajectory(params: ClassicalParams, n_toggles: int,
                          initial: ClassicalState = DEFAULT_INITIAL, index: int = 0,
                          backend: str | None = None) -> TrajectoryStats:
    """One toggle run: uncoupled, coupled, uncoupled, ... with random holds."""
    bases, freqs = configurations(params)
    holds = draw_holds(params.hold_law, params.mean_hold, n_toggles, params.seed, index)
    x0, p0 = _starts(initial, 1)
    energies, cross, _, _ = kernels.propagate(x0, p0, holds[None, :], bases, freqs, 0,
                                              freqs[0], backend=backend)
    return TrajectoryStats(energies[0], energies[0] + params.gamma * cross[0], holds, n_toggles)


def _freq_switch_config(omega: float, omega_prime: float) -> tuple[np.ndarray, np.ndarray]:
    if not (omega > 0 and omega_prime > 0):
        raise ValidationError("both frequencies must be positive")
    # second oscillator is an idle placeholder held at rest
    return np.stack([np.eye(2), np.eye(2)]), np.array([[omega, 1.0], [omega_prime, 1.0]])


def run_freq_switch_ensemble(omega: float, omega_prime: float, n_trajectories: int, n_switches: int, *,
                             mean_hold: float = 1.0, hold_law: HoldLaw = Exponential(), seed: int = 0,
                             initial: tuple[float, float] = (1.0, 0.0),
                             backend: str | None = None) -> EnsembleStats:
    """One oscillator jumping between frequencies ``omega`` and ``omega_prime``.

    Energy is measured with ``omega`` throughout.
    """
    bases, freqs = _freq_switch_config(omega, omega_prime)
    holds = np.stack([draw_holds(hold_law, mean_hold, n_switches, seed, i) for i in range(n_trajectories)])
    x0 = np.tile([initial[0], 0.0], (n_trajectories, 1))
    p0 = np.tile([initial[1], 0.0], (n_trajectories, 1))
    energies, _, _, _ = kernels.propagate(x0, p0, holds, bases, freqs, 0,
                                          np.array([omega, 1.0]), backend=backend)
    return EnsembleStats(energies, energies, n_switches)


def run_freq_switch_trajectory(omega: float, omega_prime: float, n_switches: int, *,
                               mean_hold: float = 1.0, hold_law: HoldLaw = Exponential(), seed: int = 0,
                               initial: tuple[float, float] = (1.0, 0.0), index: int = 0,
                               backend: str | None = None) -> TrajectoryStats:
    bases, freqs = _freq_switch_config(omega, omega_prime)
    holds = draw_holds(hold_law, mean_hold, n_switches, seed, index)
    energies, _, _, _ = kernels.propagate([[initial[0], 0.0]], [[initial[1], 0.0]], holds[None, :],
                                          bases, freqs, 0, np.array([omega, 1.0]), backend=backend)
    return TrajectoryStats(energies[0], energies[0], holds, n_switches)


# -- diagnostics -------------------------------------------------------------


@dataclass(frozen=True)
class LognormalDiagnostics:
    """Per-toggle ensemble aggregates.

    ``ratio`` is ``<E> / exp(<log E>)`` and ``predicted`` is
    ``exp(var(log E) / 2)``, equal for exactly lognormal ``E``.
    ``log_gap = log(ratio) - var/2`` and ``log_gap_se`` is its delta-method
    standard error.
    """

    mean_log: np.ndarray = field(repr=False)
    var_log: np.ndarray = field(repr=False)
    mean_energy: np.ndarray = field(repr=False)
    ratio: np.ndarray = field(repr=False)
    predicted: np.ndarray = field(repr=False)
    log_gap: np.ndarray = field(repr=False)
    log_gap_se: np.ndarray = field(repr=False)
    n_trajectories: int

    def z_score(self, index: int = -1) -> float:
        se = self.log_gap_se[index]
        if se == 0:
            return 0.0 if self.log_gap[index] == 0 else float("inf")
        return float(self.log_gap[index] / se)


MIN_TRAJECTORIES = 100


def _energy_matrix(ensemble) -> np.ndarray:
    if isinstance(ensemble, EnsembleStats):
        return ensemble.energies
    if isinstance(ensemble, np.ndarray):
        return np.atleast_2d(ensemble)
    items = list(ensemble)
    if items and isinstance(items[0], TrajectoryStats):
        return np.stack([t.energies for t in items])
    return np.atleast_2d(np.asarray(items, dtype=float))


def lognormal_diagnostics(ensemble: EnsembleStats | Sequence[TrajectoryStats] | np.ndarray) -> LognormalDiagnostics:
    e = _energy_matrix(ensemble)
    n = e.shape[0] if e.size else 0
    if n == 0:
        raise ValidationError("empty ensemble")
    if n < MIN_TRAJECTORIES:
        raise ValidationError(f"need at least {MIN_TRAJECTORIES} trajectories, got {n}")
    u = np.log(e)
    mean_e = e.mean(axis=0)
    mean_u = u.mean(axis=0)
    du = u - mean_u
    var_u = (du**2).mean(axis=0)
    log_gap = np.log(mean_e) - mean_u - 0.5 * var_u
    # influence function of log_gap per sample
    infl = (e / mean_e - 1.0) - du - 0.5 * (du**2 - var_u)
    se = infl.std(axis=0) / np.sqrt(n)
    return LognormalDiagnostics(
        mean_log=mean_u,
        var_log=var_u,
        mean_energy=mean_e,
        ratio=np.exp(np.log(mean_e) - mean_u),
        predicted=np.exp(0.5 * var_u),
        log_gap=log_gap,
        log_gap_se=se,
        n_trajectories=n,
    )


@dataclass(frozen=True)
class WalkFits:
    variance: FitResult  # var(log E) vs toggle
    growth: FitResult  # log <E> vs toggle
    drift: FitResult  # <log E> vs toggle
    diffusion_per_toggle: float  # half the variance slope
    diffusion_per_time: float  # per unit time, using the mean hold


def walk_fits(diag: LognormalDiagnostics, mean_hold: float = 1.0, skip: int = 0) -> WalkFits:
    toggles = np.arange(len(diag.var_log))[skip:]
    var = line_fit(toggles, diag.var_log[skip:])
    return WalkFits(
        variance=var,
        growth=line_fit(toggles, np.log(diag.mean_energy[skip:])),
        drift=line_fit(toggles, diag.mean_log[skip:]),
        diffusion_per_toggle=0.5 * var.slope,
        diffusion_per_time=0.5 * var.slope / mean_hold,
    )
