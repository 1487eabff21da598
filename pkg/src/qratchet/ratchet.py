"""Repeated encounters with decoherence between them.

One encounter: form ``rho_a (x) rho_b``, evolve it exactly for the contact
time, then keep only the two marginals. The dropped correlations are what
pump energy into the pair under the spin-boson coupling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Sequence, Union

import numpy as np

from . import bogoliubov, dynamics, fock
from .dynamics import Coupling, ModelParams, Propagator, TruncationGuard
from .errors import NonPositiveProbability, TooFewRecords, TruncationOverflow, ValidationError
from .fits import FitResult, line_fit
from .fock import DensityMatrix, Space, SpaceSpec
from .streams import stream


@dataclass(frozen=True)
class Fock:
    n: int


@dataclass(frozen=True)
class Coherent:
    z: complex


StateSpec = Union[Fock, Coherent]


def prepare(state: StateSpec, levels: int, space: Space) -> DensityMatrix:
    if isinstance(state, Fock):
        return fock.fock_state(state.n, levels, space)
    if isinstance(state, Coherent):
        return fock.coherent_state(state.z, levels, space)
    raise ValidationError(f"unknown initial state {state!r}")


@dataclass(frozen=True)
class Chain:
    pass


@dataclass(frozen=True)
class Ensemble:
    """Pools of ``pool_size`` A's and B's paired by a fresh uniform matching
    every round. Repeat pairings are allowed. ``workers > 1`` runs the pairs
    of a round on a thread pool; results do not depend on it."""

    pool_size: int
    seed: int
    workers: int = 1

    def __post_init__(self):
        if self.pool_size < 1:
            raise ValidationError(f"pool_size must be >= 1, got {self.pool_size}")
        if self.workers < 1:
            raise ValidationError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class ProtocolSpec:
    params: ModelParams
    spec: SpaceSpec
    contact_time: float
    n_encounters: int
    mode: Chain | Ensemble = Chain()
    initial_a: StateSpec = Fock(2)
    initial_b: StateSpec = Fock(1)
    guard: TruncationGuard = TruncationGuard()

    def __post_init__(self):
        if int(self.n_encounters) != self.n_encounters or self.n_encounters < 1:
            raise ValidationError(f"n_encounters must be an integer >= 1, got {self.n_encounters!r}")
        if not self.contact_time >= 0:
            raise ValidationError(f"contact_time must be >= 0, got {self.contact_time}")


# fig2b keeps every fig1 setting it does not override.
PRESETS = {
    "fig1": dict(omega_a=1.0, omega_b=2.0, g=0.2, contact_time=4.0, n_a=2, n_b=1,
                 levels=21, n_encounters=25),
    "fig2b": dict(omega_a=1.0, omega_b=3.0, g=0.5, contact_time=15.0, n_a=2, n_b=1,
                  levels=21, n_encounters=25),
}


def preset(name: str, coupling: Coupling = Coupling.SPIN_BOSON, **overrides) -> ProtocolSpec:
    try:
        values = {**PRESETS[name], **overrides}
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    mode = values.pop("mode", Chain())
    return ProtocolSpec(
        params=ModelParams(values["omega_a"], values["omega_b"], values["g"], coupling),
        spec=SpaceSpec.square(values["levels"]),
        contact_time=values["contact_time"],
        n_encounters=values["n_encounters"],
        mode=mode,
        initial_a=Fock(values["n_a"]),
        initial_b=Fock(values["n_b"]),
    )


@dataclass(frozen=True)
class EncounterRecord:
    """Observables of one encounter.

    Number, purity and distribution fields are measured on the outgoing
    marginals. Energies: ``energy_start`` is ``<H>`` on the incoming product,
    ``energy_contact_end`` on the entangled ``rho(t)``, and
    ``energy_after_product`` on the outgoing product. ``delta_*`` are
    ``Tr[(rho_a(t) (x) rho_b(t) - rho(t)) X]`` for ``X = H0, H, V``.
    """

    index: int
    mean_n_a: float
    mean_n_b: float
    free_energy: float
    interaction_energy: float
    purity_a: float
    purity_b: float
    dist_a: np.ndarray = field(repr=False)
    dist_b: np.ndarray = field(repr=False)
    tail_mass: float
    energy_start: float
    energy_contact_end: float
    energy_after_product: float
    delta_free: float
    delta_h: float
    delta_v: float
    truncation_warning: bool = False

    def __eq__(self, other):
        if not isinstance(other, EncounterRecord):
            return NotImplemented
        return all(np.array_equal(getattr(self, f.name), getattr(other, f.name)) for f in fields(self))


@dataclass(frozen=True)
class Contact:
    """Everything one encounter needs, built once per protocol."""

    spec: SpaceSpec
    propagator: Propagator
    ops: dynamics.ModelOperators
    guard: TruncationGuard = TruncationGuard()

    @classmethod
    def build(cls, params: ModelParams, spec: SpaceSpec, t: float,
              guard: TruncationGuard = TruncationGuard()) -> "Contact":
        return cls(spec, dynamics.cached_propagator(params, spec, t),
                   dynamics.model_operators(params, spec), guard)


def _tr(m: np.ndarray, op: fock.Operator) -> float:
    return float(np.einsum("ij,ji->", m, op.matrix).real)


def run_encounter(rho_a: DensityMatrix, rho_b: DensityMatrix, contact: Contact,
                  index: int = 1) -> tuple[DensityMatrix, DensityMatrix, EncounterRecord]:
    spec, ops = contact.spec, contact.ops
    rho0 = fock.tensor_state(rho_a, rho_b, spec)
    rho_t = dynamics.evolve(rho0, contact.propagator)
    out_a, out_b = fock.marginals(rho_t, spec)

    top_a, top_b = dynamics.top_level_population(rho_t, spec)
    tail = top_a + top_b
    warned = contact.guard.check(tail, index)

    # product of validated marginals is valid by construction; skip re-checking
    product = np.kron(out_a.matrix, out_b.matrix)
    delta = product - rho_t.matrix
    h = ops.h
    dist_a, dist_b = fock.number_distribution(out_a), fock.number_distribution(out_b)
    record = EncounterRecord(
        index=index,
        mean_n_a=float(dist_a @ np.arange(spec.levels_a)),
        mean_n_b=float(dist_b @ np.arange(spec.levels_b)),
        free_energy=_tr(product, ops.h0),
        interaction_energy=_tr(rho0.matrix, ops.v),
        purity_a=fock.purity(out_a),
        purity_b=fock.purity(out_b),
        dist_a=dist_a,
        dist_b=dist_b,
        tail_mass=tail,
        energy_start=_tr(rho0.matrix, h),
        energy_contact_end=_tr(rho_t.matrix, h),
        energy_after_product=_tr(product, h),
        delta_free=_tr(delta, ops.h0),
        delta_h=_tr(delta, h),
        delta_v=_tr(delta, ops.v),
        truncation_warning=warned,
    )
    return out_a, out_b, record


def _initial(protocol: ProtocolSpec) -> tuple[DensityMatrix, DensityMatrix]:
    spec = protocol.spec
    return (prepare(protocol.initial_a, spec.levels_a, Space.A),
            prepare(protocol.initial_b, spec.levels_b, Space.B))


def _contact(protocol: ProtocolSpec) -> Contact:
    bogoliubov.check_stability(protocol.params)
    return Contact.build(protocol.params, protocol.spec, protocol.contact_time, protocol.guard)


def run_chain(protocol: ProtocolSpec) -> list[EncounterRecord]:
    """Feed each encounter's marginals straight into the next one."""
    contact = _contact(protocol)
    rho_a, rho_b = _initial(protocol)
    records: list[EncounterRecord] = []
    for k in range(1, protocol.n_encounters + 1):
        try:
            rho_a, rho_b, rec = run_encounter(rho_a, rho_b, contact, k)
        except TruncationOverflow as exc:
            exc.records = records
            raise
        records.append(rec)
    return records


def matching(seed: int, round_index: int, pool_size: int) -> np.ndarray:
    """Uniform random perfect matching for one round: A[i] meets B[perm[i]]."""
    return stream(seed, round_index).permutation(pool_size)


def _aggregate(index: int, recs: Sequence[EncounterRecord]) -> EncounterRecord:
    values = {}
    for f in fields(EncounterRecord):
        column = [getattr(r, f.name) for r in recs]
        if f.name == "index":
            values[f.name] = index
        elif f.name == "tail_mass":
            values[f.name] = max(column)
        elif f.name == "truncation_warning":
            values[f.name] = any(column)
        elif f.name in ("dist_a", "dist_b"):
            values[f.name] = np.mean(np.stack(column), axis=0)
        else:
            values[f.name] = float(np.mean(column))
    return EncounterRecord(**values)


def run_ensemble(protocol: ProtocolSpec) -> list[EncounterRecord]:
    """Pool version of :func:`run_chain`; one pool-averaged record per round.

    ``tail_mass`` is the worst pair of the round rather than the mean.
    """
    mode = protocol.mode
    if not isinstance(mode, Ensemble):
        raise ValidationError("run_ensemble needs an Ensemble mode")
    contact = _contact(protocol)
    a0, b0 = _initial(protocol)
    pool_a, pool_b = [a0] * mode.pool_size, [b0] * mode.pool_size
    records: list[EncounterRecord] = []
    executor = ThreadPoolExecutor(mode.workers) if mode.workers > 1 else None
    try:
        for k in range(1, protocol.n_encounters + 1):
            perm = matching(mode.seed, k, mode.pool_size)

            def pair(i, perm=perm, k=k):
                return run_encounter(pool_a[i], pool_b[perm[i]], contact, k)

            try:
                if executor is None:
                    results = [pair(i) for i in range(mode.pool_size)]
                else:
                    results = list(executor.map(pair, range(mode.pool_size)))
            except TruncationOverflow as exc:
                exc.records = records
                raise
            next_a, next_b = list(pool_a), list(pool_b)
            for i, (ra, rb, _) in enumerate(results):
                next_a[i], next_b[perm[i]] = ra, rb
            pool_a, pool_b = next_a, next_b
            records.append(_aggregate(k, [r for _, _, r in results]))
    finally:
        if executor is not None:
            executor.shutdown()
    return records


def run(protocol: ProtocolSpec) -> list[EncounterRecord]:
    if isinstance(protocol.mode, Ensemble):
        return run_ensemble(protocol)
    return run_chain(protocol)


# -- fits --------------------------------------------------------------------


def default_fit_range(levels: int) -> range:
    """Skip n = 0, 1 and the top quarter of levels, where the cutoff distorts."""
    return range(2, levels - levels // 4)


def fit_exponential(dist, fit_range: range | None = None) -> FitResult:
    """Least-squares line through ``(n, log P(n))`` over ``fit_range``."""
    p = np.asarray(dist, dtype=float)
    n = np.arange(len(p))[fit_range if fit_range is not None else default_fit_range(len(p))]
    if len(n) < 2:
        raise ValidationError("fit range needs at least two points")
    if np.any(p[n] <= 0):
        bad = int(n[np.argmax(p[n] <= 0)])
        raise NonPositiveProbability(f"P({bad}) = {p[bad]:.3e} is not positive")
    return line_fit(n.astype(float), np.log(p[n]))


def fit_linear_growth(records: Sequence[EncounterRecord], field_name: str = "mean_n_a",
                      skip: int = 5) -> FitResult:
    """Line through ``field_name`` vs encounter index after a transient of ``skip``."""
    if len(records) < 5 or len(records) - skip < 2:
        raise TooFewRecords(f"need at least 5 records and 2 after the transient, got {len(records)}")
    kept = records[skip:]
    x = np.array([r.index for r in kept], dtype=float)
    y = np.array([getattr(r, field_name) for r in kept], dtype=float)
    return line_fit(x, y)


__all__ = [
    "Chain", "Coherent", "Contact", "EncounterRecord", "Ensemble", "FitResult", "Fock",
    "PRESETS", "ProtocolSpec", "default_fit_range", "fit_exponential", "fit_linear_growth",
    "matching", "prepare", "preset", "run", "run_chain", "run_encounter", "run_ensemble",
]
