"""Ensemble propagation of two linear oscillators through switched segments.

Each segment is exact free rotation of two normal modes. Configuration ``c``
is described by an orthogonal basis ``bases[c]`` (columns = mode shapes in
``(x_a, x_b)``) and mode frequencies ``freqs[c]``. Segment ``k`` of every
trajectory uses configuration ``(start + k) % 2`` for hold ``holds[:, k]``.

Two interchangeable implementations follow: a scalar loop compiled with
numba and a numpy path vectorised over trajectories.
"""

from __future__ import annotations

import numpy as np

from ._accel import default_backend, njit


def _propagate_loop(x, p, holds, bases, freqs, start, ref_freqs, energies, cross):
    n, n_seg = holds.shape
    wa2 = ref_freqs[0] * ref_freqs[0]
    wb2 = ref_freqs[1] * ref_freqs[1]
    for i in range(n):
        xa, xb, pa, pb = x[i, 0], x[i, 1], p[i, 0], p[i, 1]
        energies[i, 0] = 0.5 * (pa * pa + pb * pb + wa2 * xa * xa + wb2 * xb * xb)
        cross[i, 0] = xa * xb
        for k in range(n_seg):
            c = (start + k) % 2
            r = bases[c]
            h = holds[i, k]
            # into normal coordinates
            q1 = r[0, 0] * xa + r[1, 0] * xb
            q2 = r[0, 1] * xa + r[1, 1] * xb
            m1 = r[0, 0] * pa + r[1, 0] * pb
            m2 = r[0, 1] * pa + r[1, 1] * pb
            w1 = freqs[c, 0]
            w2 = freqs[c, 1]
            c1 = np.cos(w1 * h)
            s1 = np.sin(w1 * h)
            c2 = np.cos(w2 * h)
            s2 = np.sin(w2 * h)
            nq1 = q1 * c1 + m1 / w1 * s1
            nm1 = -q1 * w1 * s1 + m1 * c1
            nq2 = q2 * c2 + m2 / w2 * s2
            nm2 = -q2 * w2 * s2 + m2 * c2
            xa = r[0, 0] * nq1 + r[0, 1] * nq2
            xb = r[1, 0] * nq1 + r[1, 1] * nq2
            pa = r[0, 0] * nm1 + r[0, 1] * nm2
            pb = r[1, 0] * nm1 + r[1, 1] * nm2
            energies[i, k + 1] = 0.5 * (pa * pa + pb * pb + wa2 * xa * xa + wb2 * xb * xb)
            cross[i, k + 1] = xa * xb
        x[i, 0], x[i, 1], p[i, 0], p[i, 1] = xa, xb, pa, pb


_propagate_numba = njit(cache=True)(_propagate_loop)


def _propagate_numpy(x, p, holds, bases, freqs, start, ref_freqs, energies, cross):
    ref2 = ref_freqs**2
    energies[:, 0] = 0.5 * (p**2 + ref2 * x**2).sum(axis=1)
    cross[:, 0] = x[:, 0] * x[:, 1]
    for k in range(holds.shape[1]):
        c = (start + k) % 2
        r, w = bases[c], freqs[c]
        q, m = x @ r, p @ r
        phase = w * holds[:, k : k + 1]
        cs, sn = np.cos(phase), np.sin(phase)
        q, m = q * cs + m / w * sn, -q * w * sn + m * cs
        x[:], p[:] = q @ r.T, m @ r.T
        energies[:, k + 1] = 0.5 * (p**2 + ref2 * x**2).sum(axis=1)
        cross[:, k + 1] = x[:, 0] * x[:, 1]


def propagate(x0, p0, holds, bases, freqs, start=0, ref_freqs=None, backend=None):
    """Run every trajectory through its segments.

    Returns ``(energies, cross, x, p)``: ``energies[:, k]`` is the uncoupled
    energy ``sum p^2/2 + w^2 x^2/2`` (with ``ref_freqs``) after ``k``
    segments, ``cross[:, k]`` is ``x_a x_b`` at the same instant, and
    ``x, p`` are the final coordinates. Inputs are not modified.
    """
    backend = backend or default_backend()
    x = np.array(x0, dtype=float, copy=True).reshape(-1, 2)
    p = np.array(p0, dtype=float, copy=True).reshape(-1, 2)
    holds = np.ascontiguousarray(holds, dtype=float).reshape(x.shape[0], -1)
    bases = np.ascontiguousarray(bases, dtype=float)
    freqs = np.ascontiguousarray(freqs, dtype=float)
    ref = np.asarray(ref_freqs if ref_freqs is not None else freqs[0], dtype=float)
    energies = np.empty((x.shape[0], holds.shape[1] + 1))
    cross = np.empty_like(energies)
    if backend == "numba":
        _propagate_numba(x, p, holds, bases, freqs, int(start), ref, energies, cross)
    elif backend == "numpy":
        _propagate_numpy(x, p, holds, bases, freqs, int(start), ref, energies, cross)
    else:
        raise ValueError(f"unknown kernel backend {backend!r}")
    return energies, cross, x, p
