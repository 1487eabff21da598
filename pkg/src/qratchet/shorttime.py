"""Short-time energy gain from dropping correlations, for any bipartite pair.

For ``H = H_A + H_B + V_A (x) V_B`` and a product initial state, the energy
of the re-producted state exceeds that of the exact one by

    dH(t) = c2 t^2 + O(t^3),
    c2 = 1/2 (Var_A(V_A) <[V_B,[H_B,V_B]]>_B + Var_B(V_B) <[V_A,[H_A,V_A]]>_A).

:func:`delta_h_direct` computes ``dH`` by exact evolution; :func:`delta_h_series`
evaluates ``c2``; :func:`series_vs_direct` compares them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dynamics, fock
from .errors import IdentityViolation, ValidationError
from .fock import DensityMatrix, Operator, Space

IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class BipartiteFactors:
    h_a: Operator
    v_a: Operator
    h_b: Operator
    v_b: Operator
    rho_a: DensityMatrix
    rho_b: DensityMatrix

    def __post_init__(self):
        for name, space in (("h_a", Space.A), ("v_a", Space.A), ("rho_a", Space.A),
                            ("h_b", Space.B), ("v_b", Space.B), ("rho_b", Space.B)):
            item = getattr(self, name)
            if item.space is not space:
                raise ValidationError(f"{name} must live on {space.value}")
        for name in ("h_a", "v_a", "h_b", "v_b"):
            if not getattr(self, name).is_hermitian(1e-10):
                raise ValidationError(f"{name} is not Hermitian")
        if not self.h_a.dim == self.v_a.dim == self.rho_a.dim:
            raise ValidationError("A-side dimensions disagree")
        if not self.h_b.dim == self.v_b.dim == self.rho_b.dim:
            raise ValidationError("B-side dimensions disagree")

    @property
    def spec(self) -> fock.SpaceSpec:
        return fock.SpaceSpec(self.rho_a.dim, self.rho_b.dim)

    def hamiltonian(self) -> tuple[Operator, Operator, Operator]:
        """``(H, H_A (x) I + I (x) H_B, V_A (x) V_B)`` on the composite space."""
        spec = self.spec
        free = fock.embed(self.h_a, spec) + fock.embed(self.h_b, spec)
        coupling = fock.tensor_operator(self.v_a, self.v_b)
        return free + coupling, free, coupling


def position_operator(levels: int, omega: float, space: Space = Space.A) -> Operator:
    """``x = (a + a^dag) / sqrt(2 omega)`` for unit mass."""
    a = fock.annihilation(levels)
    return Operator(space, (a.matrix + a.matrix.T) / np.sqrt(2.0 * omega))


def oscillator_factors(omega_a: float, omega_b: float, g: float, rho_a: DensityMatrix,
                       rho_b: DensityMatrix) -> BipartiteFactors:
    """Two oscillators coupled through ``g x_a x_b``.

    ``H = w a^dag a`` per oscillator (the zero-point constant drops out of
    every commutator and of ``dH``). The coupling is split as
    ``V_A = sqrt|g| x_a``, ``V_B = sign(g) sqrt|g| x_b`` so negative ``g``
    keeps ``V_A (x) V_B = g x_a x_b``.
    """
    la, lb = rho_a.dim, rho_b.dim
    root = np.sqrt(abs(g))
    return BipartiteFactors(
        h_a=omega_a * fock.number(la),
        v_a=root * position_operator(la, omega_a),
        h_b=fock.relabel(omega_b * fock.number(lb), Space.B),
        v_b=np.sign(g) * root * position_operator(lb, omega_b, Space.B),
        rho_a=rho_a,
        rho_b=rho_b,
    )


def ladder_factors(params: dynamics.ModelParams, rho_a: DensityMatrix, rho_b: DensityMatrix) -> BipartiteFactors:
    """Factors of the spin-boson model itself: ``V = g (a+a^dag)(b+b^dag)``."""
    mo = dynamics.model_operators(params, fock.SpaceSpec(rho_a.dim, rho_b.dim))
    if mo.v_a is None:
        raise ValidationError("the Jaynes-Cummings coupling is not a single product")
    return BipartiteFactors(
        h_a=params.omega_a * fock.number(rho_a.dim),
        v_a=mo.v_a,
        h_b=fock.relabel(params.omega_b * fock.number(rho_b.dim), Space.B),
        v_b=mo.v_b,
        rho_a=rho_a,
        rho_b=rho_b,
    )


def double_commutator(v: Operator, h: Operator) -> Operator:
    """``[V, [H, V]]``."""
    if v.space is not h.space or v.dim != h.dim:
        raise ValidationError("double_commutator needs operators on the same space")
    inner = h @ v - v @ h
    return v @ inner - inner @ v


@dataclass(frozen=True)
class DirectDelta:
    t: float
    delta_h: float  # Tr[drho H]
    delta_v: float  # Tr[drho V_A (x) V_B]
    delta_free: float  # Tr[drho (H_A + H_B)], zero up to round-off


def delta_h_direct(factors: BipartiteFactors, t: float) -> DirectDelta:
    """Exact ``Tr[(rho_A(t) (x) rho_B(t) - rho(t)) H]``.

    Raises :class:`IdentityViolation` if ``Tr[drho H]`` and
    ``Tr[drho V_A (x) V_B]`` differ by more than 1e-10.
    """
    spec = factors.spec
    h, free, coupling = factors.hamiltonian()
    rho0 = fock.tensor_state(factors.rho_a, factors.rho_b, spec)
    if t == 0:
        return DirectDelta(0.0, 0.0, 0.0, 0.0)
    rho_t = dynamics.evolve(rho0, dynamics.propagator(h, t))
    out_a, out_b = fock.marginals(rho_t, spec)
    delta = np.kron(out_a.matrix, out_b.matrix) - rho_t.matrix

    def tr(op):
        return float(np.einsum("ij,ji->", delta, op.matrix).real)

    result = DirectDelta(float(t), tr(h), tr(coupling), tr(free))
    if abs(result.delta_h - result.delta_v) > IDENTITY_TOL:
        raise IdentityViolation(
            f"Tr[drho H] = {result.delta_h:.6e} but Tr[drho V] = {result.delta_v:.6e} at t={t}"
        )
    return result


def _variance(rho: DensityMatrix, v: Operator) -> float:
    mean = fock.expectation(rho, v).real
    return fock.expectation(rho, v @ v).real - mean**2


def delta_h_series(factors: BipartiteFactors) -> float:
    """Coefficient ``c2`` of ``t^2`` in the short-time expansion of ``dH``."""
    f = factors
    curv_a = fock.expectation(f.rho_a, double_commutator(f.v_a, f.h_a)).real
    curv_b = fock.expectation(f.rho_b, double_commutator(f.v_b, f.h_b)).real
    return 0.5 * (_variance(f.rho_a, f.v_a) * curv_b + _variance(f.rho_b, f.v_b) * curv_a)


@dataclass(frozen=True)
class SeriesTable:
    t: np.ndarray = field(repr=False)
    direct: np.ndarray = field(repr=False)
    series: np.ndarray = field(repr=False)
    ratio: np.ndarray = field(repr=False)
    c2: float
    fitted_c2: float  # t^2 coefficient of a (t^2, t^3) least-squares fit of direct
    fitted_c3: float

    @property
    def relative_error(self) -> float:
        return abs(self.fitted_c2 - self.c2) / abs(self.c2) if self.c2 else float("nan")


DEFAULT_T_GRID = tuple(np.geomspace(1e-3, 1e-2, 7))


def series_vs_direct(factors: BipartiteFactors, t_grid=DEFAULT_T_GRID) -> SeriesTable:
    """Tabulate exact ``dH(t)`` against ``c2 t^2`` and fit the direct curve.

    ``ratio`` is ``direct / (c2 t^2)`` and NaN where the series term is zero.
    """
    ts = np.asarray(t_grid, dtype=float)
    c2 = delta_h_series(factors)
    direct = np.array([delta_h_direct(factors, t).delta_h for t in ts])
    series = c2 * ts**2
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(series != 0, direct / np.where(series != 0, series, 1.0), np.nan)
    nz = ts > 0
    if nz.sum() >= 2:
        design = np.column_stack([ts[nz] ** 2, ts[nz] ** 3])
        # scale columns so the solve is well conditioned at tiny t
        scale = np.abs(design).max(axis=0)
        coef, *_ = np.linalg.lstsq(design / scale, direct[nz], rcond=None)
        fitted_c2, fitted_c3 = coef / scale
    else:
        fitted_c2 = fitted_c3 = float("nan")
    return SeriesTable(ts, direct, series, ratio, float(c2), float(fitted_c2), float(fitted_c3))


def richardson_remainder(factors: BipartiteFactors, t: float) -> float:
    """``(dH(2t) - 4 dH(t)) / t^3``; bounded as t -> 0 iff the t^2 term is exact."""
    return (delta_h_direct(factors, 2 * t).delta_h - 4 * delta_h_direct(factors, t).delta_h) / t**3
