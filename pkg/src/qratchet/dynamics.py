"""Hamiltonians of the two-oscillator model and exact contact evolution.

Units have hbar = 1. The free part is ``w_a a^dag a + w_b b^dag b`` with no
zero-point term; the contact is a square pulse of constant ``g``.
"""

from __future__ import annotations

import enum
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .errors import TruncationOverflow, TruncationWarning, ValidationError
from .fock import DensityMatrix, Operator, Space, SpaceSpec


class Coupling(enum.Enum):
    SPIN_BOSON = "sb"
    JAYNES_CUMMINGS = "jc"


@dataclass(frozen=True)
class ModelParams:
    omega_a: float
    omega_b: float
    g: float
    coupling: Coupling = Coupling.SPIN_BOSON

    def __post_init__(self):
        if not (self.omega_a > 0 and self.omega_b > 0):
            raise ValidationError(f"frequencies must be positive, got {self.omega_a}, {self.omega_b}")
        if not np.isfinite(self.g):
            raise ValidationError(f"coupling must be finite, got {self.g}")
        object.__setattr__(self, "coupling", Coupling(self.coupling))


@dataclass(frozen=True)
class ModelOperators:
    """Composite-space pieces of ``H = H0 + V`` for one (params, spec)."""

    h0: Operator
    v: Operator
    n_a: Operator
    n_b: Operator
    v_a: Operator  # local factor on A, V = v_a (x) v_b
    v_b: Operator

    @property
    def h(self) -> Operator:
        return self.h0 + self.v


def model_operators(params: ModelParams, spec: SpaceSpec) -> ModelOperators:
    a, b = fock.ladder_pair(spec)
    n_a, n_b = a.dag @ a, b.dag @ b
    h0 = params.omega_a * n_a + params.omega_b * n_b
    if params.coupling is Coupling.SPIN_BOSON:
        v = params.g * ((a.dag + a) @ (b.dag + b))
        la = fock.annihilation(spec.levels_a)
        lb = fock.relabel(fock.annihilation(spec.levels_b), Space.B)
        v_a, v_b = la + la.dag, params.g * (lb + lb.dag)
    else:
        v = params.g * (a.dag @ b + b.dag @ a)
        # JC coupling is a sum of two products; no single-product factors
        v_a = v_b = None
    return ModelOperators(h0=h0, v=v, n_a=n_a, n_b=n_b, v_a=v_a, v_b=v_b)


def build_hamiltonian(params: ModelParams, spec: SpaceSpec) -> Operator:
    return model_operators(params, spec).h


@dataclass(frozen=True)
class Propagator:
    matrix: np.ndarray = field(repr=False)
    t: float
    space: Space = Space.AB

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, copy=True)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def unitarity_error(self) -> float:
        u = self.matrix
        return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def propagator(h: Operator, t: float) -> Propagator:
    """``exp(-i H t)`` through the eigendecomposition of Hermitian ``H``."""
    if not h.is_hermitian(1e-10):
        raise ValidationError("propagator needs a Hermitian generator")
    try:
        energies, vecs = np.linalg.eigh(h.matrix)
    except np.linalg.LinAlgError as exc:
        raise ValidationError(f"eigendecomposition failed: {exc}") from exc
    u = (vecs * np.exp(-1j * energies * t)) @ vecs.conj().T
    return Propagator(u, float(t), h.space)


_cache: dict = {}
_cache_lock = threading.Lock()


def cached_propagator(params: ModelParams, spec: SpaceSpec, t: float) -> Propagator:
    """Propagator memoised on ``(params, spec, t)``.

    Lookups are lock-free dict reads; insertion happens under a lock, and a
    racing second computation is simply discarded.
    """
    key = (params, spec, float(t))
    hit = _cache.get(key)
    if hit is not None:
        return hit
    u = propagator(build_hamiltonian(params, spec), t)
    with _cache_lock:
        return _cache.setdefault(key, u)


def clear_propagator_cache() -> None:
    with _cache_lock:
        _cache.clear()


def evolve(rho: DensityMatrix, u: Propagator) -> DensityMatrix:
    """``U rho U^dag``, re-Hermitised and trace-normalised."""
    if rho.space is not u.space or rho.dim != u.matrix.shape[0]:
        raise ValidationError("state and propagator live on different spaces")
    m = u.matrix @ rho.matrix @ u.matrix.conj().T
    return DensityMatrix.from_raw(rho.space, m)


# -- truncation guard --------------------------------------------------------


def top_level_population(rho: DensityMatrix, spec: SpaceSpec) -> tuple[float, float]:
    """Population of the highest retained level of A and of B."""
    m = rho.matrix.diagonal().real.reshape(spec.levels_a, spec.levels_b)
    return float(m[-1, :].sum()), float(m[:, -1].sum())


@dataclass(frozen=True)
class TruncationGuard:
    warn: float = 1e-6
    hard: float = 1e-3

    def check(self, tail_mass: float, index: int | None = None) -> bool:
        """Raise above ``hard``; warn and return True above ``warn``."""
        where = f" at encounter {index}" if index is not None else ""
        if tail_mass > self.hard:
            raise TruncationOverflow(
                f"cutoff population {tail_mass:.3e}{where} exceeds {self.hard:.1e}; raise the level count",
                tail_mass=tail_mass,
                index=index,
            )
        if tail_mass > self.warn:
            warnings.warn(
                f"cutoff population {tail_mass:.3e}{where} exceeds {self.warn:.1e}",
                TruncationWarning,
                stacklevel=3,
            )
            return True
        return False
