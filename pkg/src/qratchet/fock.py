"""Truncated Fock-space linear algebra for a pair of oscillators.

Composite indices are A-major: basis vector ``|n_a, n_b>`` sits at
``n_a * levels_b + n_b``, which is what ``np.kron(op_a, op_b)`` produces.
All matrices are dense; at the sizes used here (a few hundred to ~1600
states) sparse storage buys nothing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import TruncationOverflow, ValidationError


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-10
    trace: float = 1e-10
    eigenvalue_floor: float = -1e-8
    coherent_tail: float = 1e-10


tolerances = Tolerances()


def set_tolerances(**overrides: float) -> Tolerances:
    """Replace module-wide validation tolerances; returns the previous set."""
    global tolerances
    previous = tolerances
    tolerances = replace(tolerances, **overrides)
    return previous


class Space(enum.Enum):
    A = "A"
    B = "B"
    AB = "AB"


@dataclass(frozen=True)
class SpaceSpec:
    """Retained levels per oscillator (cutoff + 1)."""

    levels_a: int
    levels_b: int

    def __post_init__(self):
        for name in ("levels_a", "levels_b"):
            value = getattr(self, name)
            if int(value) != value or value < 2:
                raise ValidationError(f"{name} must be an integer >= 2, got {value!r}")

    @classmethod
    def square(cls, levels: int) -> "SpaceSpec":
        return cls(levels, levels)

    @property
    def dim(self) -> int:
        return self.levels_a * self.levels_b

    def levels(self, space: Space) -> int:
        return {Space.A: self.levels_a, Space.B: self.levels_b, Space.AB: self.dim}[space]


def _frozen(matrix) -> np.ndarray:
    m = np.array(matrix, dtype=complex, copy=True)
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class Operator:
    space: Space
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"operator matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def __matmul__(self, other: "Operator") -> "Operator":
        _same_space(self, other)
        return Operator(self.space, self.matrix @ other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        _same_space(self, other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        _same_space(self, other)
        return Operator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.space, scalar * self.matrix)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.matrix)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0)) <= tol


def _same_space(x, y) -> None:
    if x.space is not y.space or x.matrix.shape != y.matrix.shape:
        raise ValidationError(
            f"space mismatch: {x.space.value}{x.matrix.shape} vs {y.space.value}{y.matrix.shape}"
        )


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, (numerically) positive matrix on one space.

    Construction validates against :data:`tolerances`; negative eigenvalues
    are never clipped, only checked against the floor.
    """

    space: Space
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"density matrix must be square, got shape {m.shape}")
        tol = tolerances
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > tol.hermitian:
            raise ValidationError(f"density matrix not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(m)
        if abs(tr - 1.0) > tol.trace:
            raise ValidationError(f"density matrix trace {tr.real:.15g} differs from 1")
        lowest = float(np.linalg.eigvalsh(m)[0])
        if lowest < tol.eigenvalue_floor:
            raise ValidationError(f"density matrix has eigenvalue {lowest:.3e} below floor")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_raw(cls, space: Space, matrix) -> "DensityMatrix":
        """Re-Hermitise and trace-normalise ``matrix``, then validate."""
        m = np.asarray(matrix, dtype=complex)
        m = 0.5 * (m + m.conj().T)
        return cls(space, m / np.trace(m).real)


# -- operators ---------------------------------------------------------------


def annihilation(levels: int) -> Operator:
    """Truncated lowering operator, ``a[n-1, n] = sqrt(n)``.

    The returned operator is tagged with space ``A``; use :func:`relabel` to
    move it to ``B``.
    """
    if int(levels) != levels or levels < 2:
        raise ValidationError(f"levels must be an integer >= 2, got {levels!r}")
    return Operator(Space.A, np.diag(np.sqrt(np.arange(1, levels, dtype=float)), 1))


def number(levels: int) -> Operator:
    return Operator(Space.A, np.diag(np.arange(levels, dtype=float)))


def identity(levels: int, space: Space = Space.A) -> Operator:
    return Operator(space, np.eye(levels))


def relabel(op: Operator, space: Space) -> Operator:
    if Space.AB in (op.space, space):
        raise ValidationError("relabel only moves operators between A and B")
    return Operator(space, op.matrix)


def ladder_pair(spec: SpaceSpec) -> tuple[Operator, Operator]:
    """``(a, b)`` already embedded in the composite space."""
    a = annihilation(spec.levels_a)
    b = relabel(annihilation(spec.levels_b), Space.B)
    return embed(a, spec), embed(b, spec)


def embed(op: Operator, spec: SpaceSpec) -> Operator:
    """``op (x) I`` for A-operators, ``I (x) op`` for B-operators."""
    if op.space is Space.AB:
        raise ValidationError("operator is already on the composite space")
    expected = spec.levels(op.space)
    if op.dim != expected:
        raise ValidationError(f"{op.space.value}-operator has dimension {op.dim}, spec says {expected}")
    if op.space is Space.A:
        return Operator(Space.AB, np.kron(op.matrix, np.eye(spec.levels_b)))
    return Operator(Space.AB, np.kron(np.eye(spec.levels_a), op.matrix))


def tensor_operator(op_a: Operator, op_b: Operator) -> Operator:
    if op_a.space is not Space.A or op_b.space is not Space.B:
        raise ValidationError("tensor_operator expects an A-operator and a B-operator")
    return Operator(Space.AB, np.kron(op_a.matrix, op_b.matrix))


# -- states ------------------------------------------------------------------


def tensor_state(rho_a: DensityMatrix, rho_b: DensityMatrix, spec: SpaceSpec | None = None) -> DensityMatrix:
    if rho_a.space is not Space.A or rho_b.space is not Space.B:
        raise ValidationError("tensor_state expects states on A and B")
    if spec is not None and (rho_a.dim, rho_b.dim) != (spec.levels_a, spec.levels_b):
        raise ValidationError(
            f"state dimensions ({rho_a.dim}, {rho_b.dim}) do not match spec "
            f"({spec.levels_a}, {spec.levels_b})"
        )
    return DensityMatrix(Space.AB, np.kron(rho_a.matrix, rho_b.matrix))


def _partial_trace_raw(matrix: np.ndarray, levels_a: int, levels_b: int, keep: Space) -> np.ndarray:
    r = matrix.reshape(levels_a, levels_b, levels_a, levels_b)
    if keep is Space.A:
        return np.einsum("ijkj->ik", r)
    return np.einsum("ijil->jl", r)


def partial_trace(rho: DensityMatrix, keep: Space, spec: SpaceSpec) -> DensityMatrix:
    """Marginal of a composite state on the ``keep`` factor."""
    if rho.space is not Space.AB:
        raise ValidationError("partial_trace needs a composite (AB) state")
    if keep not in (Space.A, Space.B):
        raise ValidationError("keep must be Space.A or Space.B")
    if rho.dim != spec.dim:
        raise ValidationError(f"state dimension {rho.dim} does not match spec {spec.dim}")
    return DensityMatrix(keep, _partial_trace_raw(rho.matrix, spec.levels_a, spec.levels_b, keep))


def marginals(rho: DensityMatrix, spec: SpaceSpec, *, renormalize: bool = True) -> tuple[DensityMatrix, DensityMatrix]:
    """Both marginals, re-Hermitised and trace-renormalised by default.

    Renormalisation matters for the encounter protocol: the map
    ``(rho_a, rho_b) -> marginals of U (rho_a x rho_b) U^dag`` adds the
    trace errors of its two inputs, so an unchecked round-off of 1e-16
    doubles every encounter.
    """
    if rho.space is not Space.AB or rho.dim != spec.dim:
        raise ValidationError("marginals needs a composite state matching spec")
    out = []
    for keep in (Space.A, Space.B):
        raw = _partial_trace_raw(rho.matrix, spec.levels_a, spec.levels_b, keep)
        out.append(DensityMatrix.from_raw(keep, raw) if renormalize else DensityMatrix(keep, raw))
    return out[0], out[1]


def fock_state(n: int, levels: int, space: Space = Space.A) -> DensityMatrix:
    if int(n) != n or not 0 <= n < levels:
        raise ValidationError(f"Fock index {n!r} outside 0..{levels - 1}")
    m = np.zeros((levels, levels), dtype=complex)
    m[n, n] = 1.0
    return DensityMatrix(space, m)


def coherent_tail_mass(z: complex, levels: int) -> float:
    """Poisson mass of ``|z>`` above the cutoff, ``P(N >= levels)``."""
    return float(gammainc(levels, abs(z) ** 2))


def coherent_state(z: complex, levels: int, space: Space = Space.A, *, threshold: float | None = None) -> DensityMatrix:
    threshold = tolerances.coherent_tail if threshold is None else threshold
    tail = coherent_tail_mass(z, levels)
    if tail > threshold:
        raise TruncationOverflow(
            f"coherent state z={z} loses {tail:.3e} probability beyond {levels} levels",
            tail_mass=tail,
        )
    psi = np.zeros(levels, dtype=complex)
    if z == 0:
        psi[0] = 1.0
    else:
        n = np.arange(levels)
        # log space: factorials overflow long before the cutoff does
        log_mag = n * np.log(abs(z)) - 0.5 * gammaln(n + 1) - 0.5 * abs(z) ** 2
        psi = np.exp(log_mag + 1j * n * np.angle(z))
        psi /= np.linalg.norm(psi)
    return DensityMatrix(space, np.outer(psi, psi.conj()))


def pure_state(psi, space: Space) -> DensityMatrix:
    v = np.asarray(psi, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(space, np.outer(v, v.conj()))


# -- observables -------------------------------------------------------------


def expectation(rho: DensityMatrix, op: Operator) -> complex:
    """``Tr(rho op)``."""
    _same_space(rho, op)
    return complex(np.einsum("ij,ji->", rho.matrix, op.matrix))


def purity(rho: DensityMatrix) -> float:
    m = rho.matrix
    return float(np.einsum("ij,ji->", m, m).real)


def number_distribution(rho: DensityMatrix) -> np.ndarray:
    if rho.space is Space.AB:
        raise ValidationError("number_distribution is defined for single-oscillator states")
    return rho.matrix.diagonal().real.copy()


def mean_number(rho: DensityMatrix) -> float:
    return float(number_distribution(rho) @ np.arange(rho.dim))
