"""Analytic diagonalisation of the coupled-oscillator Hamiltonians.

Spin-boson coupling: with ``a = (sqrt(w) x + i p / sqrt(w)) / sqrt(2)`` the
Hamiltonian is ``p^2/2 + x^T K x / 2 - (w_a + w_b)/2`` with stiffness

    K = [[w_a^2, gamma], [gamma, w_b^2]],   gamma = 2 g sqrt(w_a w_b).

A rotation by ``theta`` (``tan 2theta = 2 gamma / (w_b^2 - w_a^2)``) brings
``K`` to ``diag(W_A^2, W_B^2)`` and a squeeze per mode turns the rotated
coordinates into ladder operators. The normal-mode raising operators in the
basis ``(a^dag, a, b^dag, b)`` are

    A^dag = cos(th)(cosh chi, sinh chi, 0, 0) - sin(th)(0, 0, cosh phi, sinh phi)
    B^dag = sin(th)(cosh phi', sinh phi', 0, 0) + cos(th)(0, 0, cosh chi', sinh chi')

with ``e^chi = sqrt(W_A/w_a)``, ``e^phi = sqrt(W_A/w_b)``,
``e^phi' = sqrt(W_B/w_a)``, ``e^chi' = sqrt(W_B/w_b)``.

Jaynes-Cummings coupling needs only a unitary mode rotation by ``psi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dynamics, fock
from .dynamics import Coupling, ModelParams
from .errors import UnstableCoupling, ValidationError
from .fock import Space, SpaceSpec

# frequency formulas: "stiffness" uses gamma = 2 g sqrt(w_a w_b) in the
# sin(2 theta) term; "printed" uses g there verbatim
VARIANTS = ("stiffness", "printed")
DIAGONALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class NormalModes:
    theta: float
    omega_A: float
    omega_B: float
    chi: float
    phi: float
    phi_prime: float
    chi_prime: float
    gamma: float
    variant: str = "stiffness"


@dataclass(frozen=True)
class HeisenbergCoeffs:
    """Images of ``a^dag`` and ``b^dag`` under ``X -> e^{-iHt} X e^{iHt}``.

    ``alpha[k]``/``beta[k]`` multiply ``(a^dag, a, b^dag, b)`` in that order.
    This is the image that enters the evolved Fock state
    ``e^{-iHt}|n_a, n_b> = N (alpha.v)^n_a (beta.v)^n_b e^{-iHt}|0>``.
    """

    alpha: np.ndarray
    beta: np.ndarray
    t: float

    def commutator_defects(self) -> tuple[float, float]:
        """Deviation of ``[a(t), a^dag(t)]`` and ``[b(t), b^dag(t)]`` from 1."""
        sa = np.abs(self.alpha) ** 2
        sb = np.abs(self.beta) ** 2
        return (
            float(sa[0] - sa[1] + sa[2] - sa[3] - 1.0),
            float(sb[2] - sb[3] + sb[0] - sb[1] - 1.0),
        )


def position_coupling(params: ModelParams) -> float:
    """``gamma`` in ``gamma x_a x_b`` equivalent to ``g (a^dag+a)(b^dag+b)``."""
    return 2.0 * params.g * np.sqrt(params.omega_a * params.omega_b)


def stiffness_matrix(params: ModelParams) -> np.ndarray:
    gamma = position_coupling(params)
    return np.array([[params.omega_a**2, gamma], [gamma, params.omega_b**2]])


def mixing_angle(params: ModelParams) -> float:
    """``theta`` in (-pi/4, pi/4]; ``W_A`` stays attached to ``w_a`` as g -> 0."""
    gamma = position_coupling(params)
    if gamma == 0.0:
        return 0.0
    split = params.omega_b**2 - params.omega_a**2
    if split == 0.0:
        return np.pi / 4
    return 0.5 * np.arctan(2.0 * gamma / split)


def _squared_frequencies(params: ModelParams, theta: float, variant: str) -> tuple[float, float]:
    wa2, wb2 = params.omega_a**2, params.omega_b**2
    coeff = position_coupling(params) if variant == "stiffness" else params.g
    c2, s2 = np.cos(2 * theta), np.sin(2 * theta)
    return (
        0.5 * (wa2 + wb2) + 0.5 * (wa2 - wb2) * c2 - coeff * s2,
        0.5 * (wa2 + wb2) + 0.5 * (wb2 - wa2) * c2 + coeff * s2,
    )


def _modes(params: ModelParams, variant: str) -> NormalModes:
    theta = mixing_angle(params)
    wA2, wB2 = _squared_frequencies(params, theta, variant)
    if wA2 <= 0 or wB2 <= 0:
        raise UnstableCoupling(
            f"inverted normal mode (W_A^2={wA2:.6g}, W_B^2={wB2:.6g}); "
            f"need g^2 < w_a w_b / 4 = {params.omega_a * params.omega_b / 4:.6g}"
        )
    wA, wB = np.sqrt(wA2), np.sqrt(wB2)
    return NormalModes(
        theta=float(theta),
        omega_A=float(wA),
        omega_B=float(wB),
        chi=float(0.5 * np.log(wA / params.omega_a)),
        phi=float(0.5 * np.log(wA / params.omega_b)),
        phi_prime=float(0.5 * np.log(wB / params.omega_a)),
        chi_prime=float(0.5 * np.log(wB / params.omega_b)),
        gamma=float(position_coupling(params)),
        variant=variant,
    )


def _require_sb(params: ModelParams) -> None:
    if params.coupling is not Coupling.SPIN_BOSON:
        raise ValidationError("normal-mode squeezing applies to the spin-boson coupling only")


def frequency_variants(params: ModelParams) -> dict:
    """Both frequency formulas with their diagonalisation residuals.

    An unstable variant is reported with ``residual = inf`` instead of
    raising, so callers can always see both.
    """
    _require_sb(params)
    out = {}
    for variant in VARIANTS:
        try:
            modes = _modes(params, variant)
        except UnstableCoupling as exc:
            out[variant] = {"omega_A": float("nan"), "omega_B": float("nan"),
                            "residual": float("inf"), "error": str(exc)}
            continue
        out[variant] = {"omega_A": modes.omega_A, "omega_B": modes.omega_B,
                        "residual": validate_diagonalization(modes, params).residual}
    return out


def sb_normal_modes(params: ModelParams) -> NormalModes:
    """Normal modes of the spin-boson Hamiltonian.

    Tries the stiffness-consistent frequency formula first, then the printed
    one, and returns whichever diagonalises ``H`` to 1e-10.
    """
    _require_sb(params)
    stability_error = None
    for variant in VARIANTS:
        try:
            modes = _modes(params, variant)
        except UnstableCoupling as exc:
            stability_error = stability_error or exc
            continue
        if validate_diagonalization(modes, params).residual <= DIAGONALIZATION_TOL:
            return modes
    if stability_error is not None:
        raise stability_error
    raise ArithmeticError("no frequency formula diagonalises H")  # pragma: no cover


def check_stability(params: ModelParams) -> None:
    """Raise :class:`UnstableCoupling` if the SB stiffness is not positive definite."""
    if params.coupling is Coupling.SPIN_BOSON:
        sb_normal_modes(params)


def transform_matrix(modes: NormalModes) -> np.ndarray:
    """Rows ``(A^dag, A, B^dag, B)`` in the basis ``(a^dag, a, b^dag, b)``."""
    c, s = np.cos(modes.theta), np.sin(modes.theta)
    ad = np.array([c * np.cosh(modes.chi), c * np.sinh(modes.chi),
                   -s * np.cosh(modes.phi), -s * np.sinh(modes.phi)])
    bd = np.array([s * np.cosh(modes.phi_prime), s * np.sinh(modes.phi_prime),
                   c * np.cosh(modes.chi_prime), c * np.sinh(modes.chi_prime)])
    return np.array([ad, _adjoint_row(ad), bd, _adjoint_row(bd)], dtype=complex)


def _adjoint_row(row: np.ndarray) -> np.ndarray:
    # (c1 a^dag + c2 a + c3 b^dag + c4 b)^dag in the same basis
    return np.conj(row[[1, 0, 3, 2]])


def _quadratic_form(params: ModelParams) -> np.ndarray:
    """Symmetric ``Q`` with ``H = v^T Q v + const``, ``v = (a^dag, a, b^dag, b)``."""
    q = np.zeros((4, 4))
    q[0, 1] = q[1, 0] = params.omega_a / 2
    q[2, 3] = q[3, 2] = params.omega_b / 2
    q[:2, 2:] = q[2:, :2] = params.g / 2
    return q


@dataclass(frozen=True)
class DiagonalizationCheck:
    residual: float  # largest deviation of the transformed form from diag(W_A, W_B)
    gap_mismatch: float | None = None  # truncated low spectrum vs m W_A + n W_B
    ground_mismatch: float | None = None  # truncated E0 vs (W_A + W_B - w_a - w_b)/2


def validate_diagonalization(modes: NormalModes, params: ModelParams, levels: int | None = None,
                             n_compare: int = 6) -> DiagonalizationCheck:
    """Check that ``modes`` diagonalise the spin-boson Hamiltonian.

    The quadratic form of ``H`` is rewritten in the normal-mode operators;
    anything other than ``W_A/2 {A^dag, A} + W_B/2 {B^dag, B}`` counts toward
    the residual. With ``levels`` set, the lowest ``n_compare`` eigenvalues
    of the truncated ``H`` are also compared with the oscillator ladder
    ``E0 + m W_A + n W_B``.
    """
    _require_sb(params)
    inv = np.linalg.inv(transform_matrix(modes))
    transformed = inv.T @ _quadratic_form(params) @ inv
    target = np.zeros((4, 4))
    target[0, 1] = target[1, 0] = modes.omega_A / 2
    target[2, 3] = target[3, 2] = modes.omega_B / 2
    residual = float(np.max(np.abs(transformed - target)))
    if levels is None:
        return DiagonalizationCheck(residual)

    h = dynamics.build_hamiltonian(params, SpaceSpec.square(levels))
    energies = np.linalg.eigvalsh(h.matrix)[:n_compare]
    m = np.arange(n_compare + 1)
    ladder = np.sort((m[:, None] * modes.omega_A + m[None, :] * modes.omega_B).ravel())[:n_compare]
    gaps = energies - energies[0]
    ground = 0.5 * (modes.omega_A + modes.omega_B - params.omega_a - params.omega_b)
    return DiagonalizationCheck(
        residual=residual,
        gap_mismatch=float(np.max(np.abs(gaps - ladder))),
        ground_mismatch=float(abs(energies[0] - ground)),
    )


# -- time evolution of the ladder operators ----------------------------------


def _phases(modes: NormalModes, t: float) -> np.ndarray:
    return np.exp(np.array([-1j, 1j, -1j, 1j]) * np.array(
        [modes.omega_A, modes.omega_A, modes.omega_B, modes.omega_B]) * t)


def heisenberg_coeffs(modes: NormalModes, t: float) -> HeisenbergCoeffs:
    """Transform to normal modes, attach ``e^{-+i W t}``, transform back."""
    m = transform_matrix(modes)
    s = np.linalg.inv(m) @ np.diag(_phases(modes, t)) @ m
    return HeisenbergCoeffs(alpha=s[0].copy(), beta=s[2].copy(), t=float(t))


def _full_map(coeffs: HeisenbergCoeffs) -> np.ndarray:
    a, b = coeffs.alpha, coeffs.beta
    return np.array([a, _adjoint_row(a), b, _adjoint_row(b)])


def number_via_coeffs(n_a: int, n_b: int, coeffs: HeisenbergCoeffs) -> tuple[float, float]:
    """``<a^dag a>`` and ``<b^dag b>`` at time ``t`` starting from ``|n_a, n_b>``.

    Expectations need the Heisenberg image ``e^{iHt} a^dag e^{-iHt}``, i.e.
    the inverse of the stored map. In a Fock state only the diagonal pairs
    survive: ``<a^dag a> = n_a``, ``<a a^dag> = n_a + 1`` and so on.
    """
    occupations = np.array([n_a, n_a + 1, n_b, n_b + 1], dtype=float)
    heis = np.linalg.inv(_full_map(coeffs))
    return (
        float(np.abs(heis[0]) ** 2 @ occupations),
        float(np.abs(heis[2]) ** 2 @ occupations),
    )


@dataclass(frozen=True)
class SupportAudit:
    """Population of an evolved ``|n_a, n_b>`` above ``n_a + n_b`` bosons."""

    n_a: int
    n_b: int
    t: float
    levels: int
    mass_a_above: float
    mass_b_above: float
    mass_either_above: float
    cutoff_population: float


def support_audit(params: ModelParams, n_a: int, n_b: int, t: float, levels: int = 30) -> SupportAudit:
    """Measure how far exact evolution leaves the ``n_a + n_b`` boson bound.

    Nothing is asserted: for the spin-boson coupling the vacuum itself is
    squeezed, so some mass above the bound is expected.
    """
    spec = SpaceSpec.square(levels)
    rho0 = fock.tensor_state(fock.fock_state(n_a, levels, Space.A), fock.fock_state(n_b, levels, Space.B))
    rho = dynamics.evolve(rho0, dynamics.cached_propagator(params, spec, t))
    p = rho.matrix.diagonal().real.reshape(levels, levels)
    bound = n_a + n_b
    idx = np.arange(levels)
    above_a, above_b = idx[:, None] > bound, idx[None, :] > bound
    return SupportAudit(
        n_a=n_a, n_b=n_b, t=float(t), levels=levels,
        mass_a_above=float(p[above_a[:, 0], :].sum()),
        mass_b_above=float(p[:, above_b[0, :]].sum()),
        mass_either_above=float(p[above_a | above_b].sum()),
        cutoff_population=float(p[-1, :].sum() + p[:, -1].sum()),
    )


# -- Jaynes-Cummings -----------------------------------------------------------


def jc_rotation(params: ModelParams) -> float:
    """Angle ``psi`` of ``A = a cos psi + b sin psi``, ``B = -a sin psi + b cos psi``."""
    if params.coupling is not Coupling.JAYNES_CUMMINGS:
        raise ValidationError("jc_rotation needs the Jaynes-Cummings coupling")
    if params.g == 0.0:
        return 0.0
    if params.omega_a == params.omega_b:
        return np.pi / 4
    return 0.5 * np.arctan(2.0 * params.g / (params.omega_a - params.omega_b))


def jc_cross_term(params: ModelParams, psi: float) -> float:
    """Off-diagonal of the rotated single-particle matrix; zero at the right ``psi``."""
    h = np.array([[params.omega_a, params.g], [params.g, params.omega_b]])
    c, s = np.cos(psi), np.sin(psi)
    r = np.array([[c, s], [-s, c]])
    return float((r @ h @ r.T)[0, 1])
