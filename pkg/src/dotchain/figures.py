"""Parameter sweeps behind the control-array, blocking and transfer figures."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import NoMinimumFound, NoResonanceFound
from .evolve import Trajectory, evolve_static, first_resonance, propagate_static, site_population
from .gates import rect_pulse_time
from .hamiltonian import chain_hamiltonian
from .model import HBAR, ChainSpec, Sector, basis_state, build_basis, single_excitation
from .protocol import ArmSpec, blocking_overlap, control_array_run

TARGET_TRANSFER_FIDELITY = 0.94
TARGET_TRANSFER_TIME_PS = 10.0
REFERENCE_BUS_DOTS = 9


def _fmt(v) -> str:
    return f"{v:.10g}" if isinstance(v, float) else str(v)


def _csv(header, rows, footer=()) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    for line in footer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# control-array driving


@dataclass
class RabiCurve:
    rabi_over_vf: float
    rabi: float
    trajectory: Trajectory
    peak: float
    peak_time: float


def control_array_curves(
    n_dots: int = 5,
    v_f: float = 0.2,
    rabi_over_vf=(1, 5, 25, 50),
    dt: float = 0.005,
    t_max: float | None = None,
) -> list[RabiCurve]:
    """Ground and fully-excited populations of a driven control array.

    With ``v_f == 0`` the ratios are read as Rabi couplings in meV. The
    default window is three single-dot pi times of each drive.
    """
    curves = []
    for ratio in rabi_over_vf:
        rabi = ratio * v_f if v_f else float(ratio)
        window = t_max or 3 * rect_pulse_time(rabi, np.pi)
        traj = control_array_run(n_dots, v_f, rabi, window, dt=dt)
        k = int(np.argmax(traj["P_all_excited"]))
        curves.append(RabiCurve(float(ratio), rabi, traj, float(traj["P_all_excited"][k]), float(traj.times[k])))
    return curves


def rabi_summary_csv(curves: list[RabiCurve]) -> str:
    return _csv(["rabi_over_vf", "rabi_meV", "peak_P_all_excited", "peak_time_ps"],
                [(c.rabi_over_vf, c.rabi, c.peak, c.peak_time) for c in curves])


# ---------------------------------------------------------------------------
# blocking


@dataclass
class BlockingPoint:
    n_sites: int
    ratio: float
    time: float | None
    overlap: float | None

    @property
    def flagged(self) -> bool:
        return self.overlap is None


def blocking_sweep(lengths=(5, 7), v_f: float = 0.2, ratios=(0, 2, 5, 10, 20, 40)) -> list[BlockingPoint]:
    """Overlap at point ``a`` for every chain length and shift ratio."""
    points = []
    for n in lengths:
        for ratio in ratios:
            arm = ArmSpec(n - 2, v_f, shift=ratio * v_f)
            try:
                res, _ = blocking_overlap(arm)
                points.append(BlockingPoint(n, float(ratio), res.time, res.value))
            except NoMinimumFound:
                points.append(BlockingPoint(n, float(ratio), None, None))
    return points


def blocking_main_csv(points: list[BlockingPoint]) -> str:
    rows = [
        (p.ratio, p.n_sites, "" if p.flagged else p.time, "" if p.flagged else p.overlap,
         "no_minimum" if p.flagged else "")
        for p in points
    ]
    return _csv(["ratio", "n_sites", "t_a_ps", "overlap_at_ta", "flag"], rows)


def blocking_inset(lengths=(5, 7), v_f: float = 0.2, ratio: float = 20, t_max: float = 3.0, dt: float = 0.005) -> Trajectory:
    """Return-probability curves for several chain lengths on one grid.

    Observables are named ``overlap_N<n>``.
    """
    times = np.arange(0.0, t_max + dt / 2, dt)
    out = None
    for n in lengths:
        arm = ArmSpec(n - 2, v_f, shift=ratio * v_f)
        _, traj = blocking_overlap(arm, dt=dt, t_max=t_max)
        if out is None:
            out = Trajectory(times, np.zeros((len(times), 0)))
        out.observables[f"overlap_N{n}"] = traj["overlap"][: len(times)]
    return out


# ---------------------------------------------------------------------------
# transfer resonances


def average_state_fidelity(amplitude_modulus: float) -> float:
    """Bloch-sphere average of a single-qubit transfer fidelity.

    For an end-site amplitude of modulus ``f`` (phase corrected) this is
    ``1/2 + f/3 + f**2/6``.
    """
    f = amplitude_modulus
    return 0.5 + f / 3 + f * f / 6


@dataclass
class TransferPoint:
    n_sites: int
    time: float
    fidelity: float

    @property
    def average_fidelity(self) -> float:
        return average_state_fidelity(np.sqrt(self.fidelity))


def chain_transfer(n_sites: int, v_f: float = 0.2, dt: float = 0.02) -> TransferPoint:
    """First end-to-end resonance of a uniform chain started on site 0."""
    basis = build_basis(n_sites, Sector.exactly(1))
    h = chain_hamiltonian(ChainSpec.uniform(n_sites, v_f), basis)
    psi0 = basis_state(basis, single_excitation(n_sites, 0))
    t_max = (n_sites + 4) * HBAR / v_f
    traj = evolve_static(h, psi0, np.arange(0.0, t_max + dt / 2, dt),
                         {"P_end": site_population(basis, n_sites - 1)})
    res = first_resonance(traj, "P_end")
    exact = abs(propagate_static(h, psi0, res.time).amplitudes[-1]) ** 2
    return TransferPoint(n_sites, res.time, float(exact))


@dataclass
class TransferClaim:
    """The nine-bus-dot transfer-time claim under both site-count readings."""

    time_bus_only: float  # 9 sites
    time_with_ends: float  # 11 sites
    limit: float = TARGET_TRANSFER_TIME_PS

    @property
    def under_limit(self) -> bool:
        return min(self.time_bus_only, self.time_with_ends) < self.limit

    @property
    def within_factor_two(self) -> bool:
        return min(self.time_bus_only, self.time_with_ends) < 2 * self.limit

    def describe(self) -> str:
        verdict = ("below the 10 ps target" if self.under_limit
                   else "DISCREPANCY: neither reading is below 10 ps"
                   + ("; within a factor of 2" if self.within_factor_two else "; NOT within a factor of 2"))
        return (f"{REFERENCE_BUS_DOTS}-dot bus: {REFERENCE_BUS_DOTS} sites -> {self.time_bus_only:.3f} ps, "
                f"{REFERENCE_BUS_DOTS + 2} sites -> {self.time_with_ends:.3f} ps; {verdict}")


def transfer_scan(n_min: int = 2, n_max: int = 11, v_f: float = 0.2, dt: float = 0.02):
    """Resonance table for ``n_min..n_max`` sites plus the transfer-time claim."""
    points = []
    for n in range(n_min, n_max + 1):
        try:
            points.append(chain_transfer(n, v_f, dt))
        except NoResonanceFound:
            points.append(TransferPoint(n, float("nan"), float("nan")))
    by_n = {p.n_sites: p for p in points}
    t9 = (by_n.get(REFERENCE_BUS_DOTS) or chain_transfer(REFERENCE_BUS_DOTS, v_f, dt)).time
    t11 = (by_n.get(REFERENCE_BUS_DOTS + 2) or chain_transfer(REFERENCE_BUS_DOTS + 2, v_f, dt)).time
    return points, TransferClaim(t9, t11)


def transfer_scan_csv(points: list[TransferPoint], claim: TransferClaim) -> str:
    rows = [(p.n_sites, p.time, p.fidelity, p.average_fidelity) for p in points]
    return _csv(["n_sites", "first_resonance_time_ps", "fidelity", "average_state_fidelity"], rows,
                footer=[claim.describe()])
