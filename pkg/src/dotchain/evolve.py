"""Time evolution: exact spectral propagation, RK4 for driven pulses,
no-jump decay, and extremum detection on recorded series.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import (
    DimensionMismatch,
    NegativeRate,
    NoMinimumFound,
    NoResonanceFound,
    NormDriftExceeded,
    ValidationError,
)
from .hamiltonian import DrivenGenerator, check_hermitian
from .model import HBAR, BasisIndex, StateVector

# An observable maps amplitudes (..., dim) to real values (...,).
Observable = Callable[[np.ndarray], np.ndarray]

NORM_TOL_DRIVEN = 1e-7
STEP_FACTOR = 0.02  # dt <= STEP_FACTOR * hbar / ||h||; must stay <= 0.05


def _amplitudes(psi) -> np.ndarray:
    return psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)


def _like(psi, amplitudes: np.ndarray):
    if isinstance(psi, StateVector):
        return StateVector(psi.basis, amplitudes)
    return amplitudes


def _check_dims(h: np.ndarray, amps: np.ndarray) -> None:
    if h.shape != (amps.shape[-1], amps.shape[-1]):
        raise DimensionMismatch(f"generator {h.shape} vs state of length {amps.shape[-1]}")


# ---------------------------------------------------------------------------
# observables


def population(basis: BasisIndex, occupation) -> Observable:
    """Probability of one basis configuration."""
    j = basis.index_of(occupation)
    return lambda a: np.abs(a[..., j]) ** 2


def site_population(basis: BasisIndex, site: int) -> Observable:
    """Mean exciton number on a single dot."""
    mask = basis.occupations[:, site].astype(bool)
    return lambda a: (np.abs(a[..., mask]) ** 2).sum(axis=-1)


def sites_population(basis: BasisIndex, sites: Sequence[int]) -> Observable:
    """Mean total exciton number on a group of dots."""
    weights = basis.occupations[:, list(sites)].sum(axis=1)
    return lambda a: (np.abs(a) ** 2) @ weights


def overlap_with(psi0) -> Observable:
    """``|<psi0|psi(t)>|^2``."""
    ref = _amplitudes(psi0).conj()
    return lambda a: np.abs(a @ ref) ** 2


def norm_squared(a: np.ndarray) -> np.ndarray:
    return (np.abs(a) ** 2).sum(axis=-1)


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    """States and named real series on a strictly increasing time grid."""

    times: np.ndarray
    states: np.ndarray = field(repr=False)
    observables: dict[str, np.ndarray] = field(default_factory=dict)
    basis: BasisIndex | None = field(default=None, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or len(self.times) < 1:
            raise ValidationError("time grid must be a non-empty 1-d array")
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("time grid must be strictly increasing")
        if len(self.states) != len(self.times):
            raise DimensionMismatch("one state per time point expected")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.observables[name]

    @property
    def norms(self) -> np.ndarray:
        return np.sqrt(norm_squared(self.states))

    def state(self, k: int) -> StateVector:
        if self.basis is None:
            raise ValidationError("trajectory has no basis attached")
        return StateVector(self.basis, self.states[k])

    def record(self, name: str, observable: Observable) -> np.ndarray:
        self.observables[name] = np.real(observable(self.states)).astype(float)
        return self.observables[name]

    def csv_text(self, names: Sequence[str] | None = None) -> str:
        names = list(self.observables) if names is None else list(names)
        buf = io.StringIO()
        buf.write(",".join(["t_ps", *names]) + "\n")
        cols = [self.observables[n] for n in names]
        for k, t in enumerate(self.times):
            buf.write(",".join(f"{v:.10g}" for v in [t, *(c[k] for c in cols)]) + "\n")
        return buf.getvalue()

    def to_csv(self, path, names: Sequence[str] | None = None) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.csv_text(names))


def _record_all(traj: Trajectory, observables: Mapping[str, Observable] | None) -> Trajectory:
    for name, obs in (observables or {}).items():
        traj.record(name, obs)
    return traj


# ---------------------------------------------------------------------------
# static evolution


class SpectralPropagator:
    """``exp(-i h t / hbar)`` from a single eigendecomposition of ``h``."""

    def __init__(self, h: np.ndarray):
        check_hermitian(h)
        self.h = h
        self.energies, self.vectors = np.linalg.eigh(h)

    def evolve(self, amps: np.ndarray, t: float) -> np.ndarray:
        c = self.vectors.conj().T @ amps
        return self.vectors @ (np.exp(-1j * self.energies * t / HBAR) * c)

    def series(self, amps: np.ndarray, times: np.ndarray) -> np.ndarray:
        """Amplitudes at every time, shape ``(len(times), dim)``."""
        c = self.vectors.conj().T @ amps
        phases = np.exp(-1j * np.outer(times, self.energies) / HBAR)
        return (phases * c) @ self.vectors.T


def propagate_static(h: np.ndarray, psi0, t: float):
    """Evolve ``psi0`` for time ``t`` (ps) under the time-independent ``h`` (meV)."""
    amps = _amplitudes(psi0)
    _check_dims(h, amps)
    check_hermitian(h)
    if t < 0:
        raise ValidationError("evolution time must be >= 0")
    if t == 0:
        return psi0
    return _like(psi0, SpectralPropagator(h).evolve(amps, t))


def evolve_static(
    h: np.ndarray,
    psi0,
    times: Sequence[float],
    observables: Mapping[str, Observable] | None = None,
) -> Trajectory:
    """Exact trajectory of ``psi0`` under ``h`` sampled on ``times``."""
    amps = _amplitudes(psi0)
    _check_dims(h, amps)
    times = np.asarray(times, dtype=float)
    states = SpectralPropagator(h).series(amps, times)
    if len(times) and times[0] == 0:
        states[0] = amps
    basis = psi0.basis if isinstance(psi0, StateVector) else None
    return _record_all(Trajectory(times, states, basis=basis), observables)


# ---------------------------------------------------------------------------
# driven evolution


def _rk4_step(h_of_t, t: float, psi: np.ndarray, dt: float) -> np.ndarray:
    c = -1j / HBAR
    # endpoint stages are sampled just inside the step so a pulse edge at
    # either end is seen from the correct side
    eps = 1e-9 * dt
    k1 = c * (h_of_t(t + eps) @ psi)
    h_mid = h_of_t(t + 0.5 * dt)
    k2 = c * (h_mid @ (psi + 0.5 * dt * k1))
    k3 = c * (h_mid @ (psi + 0.5 * dt * k2))
    k4 = c * (h_of_t(t + dt - eps) @ (psi + dt * k3))
    return psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def propagate_driven(
    h_of_t: Callable[[float], np.ndarray],
    psi0,
    t_grid: Sequence[float],
    dt_max: float,
    observables: Mapping[str, Observable] | None = None,
    norm_tol: float = NORM_TOL_DRIVEN,
    step_factor: float = STEP_FACTOR,
) -> Trajectory:
    """Integrate the Schrödinger equation with classical RK4.

    ``psi0`` is the state at ``t_grid[0]``. Between grid points the step is
    ``min(dt_max, step_factor * hbar / ||h||)``, and substeps never straddle
    a pulse edge of a :class:`DrivenGenerator`. No renormalisation is
    applied; a norm drift above ``norm_tol`` raises
    :class:`NormDriftExceeded`.
    """
    if not dt_max > 0:
        raise ValidationError("dt_max must be > 0")
    if not 0 < step_factor <= 0.05:
        raise ValidationError("step_factor must lie in (0, 0.05]")
    grid = np.asarray(t_grid, dtype=float)
    amps = _amplitudes(psi0).copy()
    if isinstance(h_of_t, DrivenGenerator):
        norm_bound = h_of_t.norm_bound()
        edges = np.asarray(h_of_t.breakpoints())
    else:
        norm_bound = max(np.linalg.norm(h_of_t(t), 2) for t in np.unique(np.r_[grid, 0.5 * (grid[1:] + grid[:-1])]))
        edges = np.empty(0)
    _check_dims(h_of_t(grid[0]), amps)
    dt_cap = dt_max if norm_bound == 0 else min(dt_max, step_factor * HBAR / norm_bound)

    norm0 = np.linalg.norm(amps)
    states = np.empty((len(grid), len(amps)), dtype=complex)
    states[0] = amps
    psi = amps
    for k in range(1, len(grid)):
        t0, t1 = grid[k - 1], grid[k]
        cuts = np.r_[t0, edges[(edges > t0) & (edges < t1)], t1]
        for a, b in zip(cuts[:-1], cuts[1:]):
            n = max(1, math.ceil((b - a) / dt_cap - 1e-12))
            dt = (b - a) / n
            for m in range(n):
                psi = _rk4_step(h_of_t, a + m * dt, psi, dt)
        drift = abs(np.linalg.norm(psi) - norm0)
        if drift > norm_tol:
            raise NormDriftExceeded(f"norm drifted by {drift:.2e} by t = {t1:.4g} ps")
        states[k] = psi
    basis = psi0.basis if isinstance(psi0, StateVector) else None
    return _record_all(Trajectory(grid, states, basis=basis), observables)


# ---------------------------------------------------------------------------
# decay


def decay_generator(h: np.ndarray, basis: BasisIndex, gammas) -> np.ndarray:
    """``h - i (hbar/2) sum_i gamma_i n_i`` for per-dot rates in 1/ps."""
    gammas = np.broadcast_to(np.asarray(gammas, dtype=float), (basis.n_dots,))
    if np.any(gammas < 0):
        raise NegativeRate("decay rates must be >= 0")
    loss = basis.occupations @ gammas
    return np.asarray(h, dtype=complex) - 0.5j * HBAR * np.diag(loss)


def propagate_decaying(h: np.ndarray, gammas, psi0: StateVector, t: float) -> StateVector:
    """No-jump evolution with exciton recombination.

    The squared norm of the result is the probability that no exciton has
    recombined by time ``t``.
    """
    amps = _amplitudes(psi0)
    _check_dims(h, amps)
    check_hermitian(h)
    h_eff = decay_generator(h, psi0.basis, gammas)
    if t < 0:
        raise ValidationError("evolution time must be >= 0")
    if t == 0:
        return psi0
    if not np.any(h_eff.imag.diagonal()):
        return propagate_static(h, psi0, t)
    return StateVector(psi0.basis, expm(-1j * h_eff * t / HBAR) @ amps)


def evolve_decaying(
    h: np.ndarray,
    gammas,
    psi0: StateVector,
    times: Sequence[float],
    observables: Mapping[str, Observable] | None = None,
) -> Trajectory:
    """Sampled no-jump trajectory (uniform grid steps reuse one propagator)."""
    times = np.asarray(times, dtype=float)
    h_eff = decay_generator(h, psi0.basis, gammas)
    states = np.empty((len(times), psi0.basis.dim), dtype=complex)
    psi = psi0.amplitudes.copy()
    if len(times) and times[0] != 0:
        psi = expm(-1j * h_eff * times[0] / HBAR) @ psi
    states[0] = psi
    cache: dict[float, np.ndarray] = {}
    for k in range(1, len(times)):
        dt = round(float(times[k] - times[k - 1]), 12)
        if dt not in cache:
            cache[dt] = expm(-1j * h_eff * dt / HBAR)
        psi = cache[dt] @ psi
        states[k] = psi
    return _record_all(Trajectory(times, states, basis=psi0.basis), observables)


# ---------------------------------------------------------------------------
# extrema


@dataclass(frozen=True)
class ResonancePoint:
    time: float
    value: float


def _refine(times: np.ndarray, y: np.ndarray, k: int) -> tuple[float, float]:
    """Vertex of the parabola through points ``k-1, k, k+1``."""
    t3, y3 = times[k - 1 : k + 2], y[k - 1 : k + 2]
    a, b, c = np.polyfit(t3 - t3[1], y3, 2)
    if a == 0:
        return float(times[k]), float(y[k])
    dt = -b / (2 * a)
    if not t3[0] - t3[1] <= dt <= t3[2] - t3[1]:
        return float(times[k]), float(y[k])
    return float(t3[1] + dt), float(c - b * b / (4 * a))


def first_resonance(traj: Trajectory, observable: str, floor: float = 1e-3) -> ResonancePoint:
    """First local maximum of a recorded series, parabola-refined.

    Maxima below ``floor`` are ignored so that round-off ripples in a
    series that is still essentially zero do not count.
    """
    if observable not in traj.observables:
        raise ValidationError(f"observable {observable!r} was not recorded")
    t, y = traj.times, traj.observables[observable]
    for k in range(1, len(y) - 1):
        if y[k - 1] < y[k] >= y[k + 1] and y[k] > floor:
            tk, vk = _refine(t, y, k)
            return ResonancePoint(tk, float(np.clip(vk, 0.0, 1.0)))
    raise NoResonanceFound(f"no local maximum of {observable!r} on the grid")


def first_minimum(traj: Trajectory, observable: str, depth: float = 1e-12) -> ResonancePoint:
    """First local minimum lying at least ``depth`` below the initial value."""
    if observable not in traj.observables:
        raise ValidationError(f"observable {observable!r} was not recorded")
    t, y = traj.times, traj.observables[observable]
    for k in range(1, len(y) - 1):
        if y[k - 1] > y[k] <= y[k + 1] and y[k] < y[0] - depth:
            tk, vk = _refine(t, y, k)
            return ResonancePoint(tk, float(np.clip(vk, 0.0, 1.0)))
    raise NoMinimumFound(f"no local minimum of {observable!r} on the grid")


def first_overlap_minimum(traj: Trajectory, observable: str = "overlap") -> ResonancePoint:
    """Point ``a`` of a blocking run: the first dip of the return probability."""
    return first_minimum(traj, observable)


__all__ = [
    "Observable",
    "ResonancePoint",
    "SpectralPropagator",
    "Trajectory",
    "decay_generator",
    "evolve_decaying",
    "evolve_static",
    "first_minimum",
    "first_overlap_minimum",
    "first_resonance",
    "norm_squared",
    "overlap_with",
    "population",
    "propagate_decaying",
    "propagate_driven",
    "propagate_static",
    "site_population",
    "sites_population",
]
