"""The six-step entanglement distributor and its fidelity budget.

Each arm is QDA (site 0), a uniform bus (sites 1..bus_length) and the
register end dot QDC (last site). Because the two arms never couple, the
joint evolution is the product of two arm maps on the
{vacuum, one exciton} space of each arm. Recombination is folded in
exactly: an arm that loses its exciton ends in the vacuum.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from math import exp, sqrt
from typing import NamedTuple

import numpy as np

from .errors import ArmMismatch, DimensionMismatch, InvalidDensityMatrix, OutOfRange, ValidationError
from .evolve import (
    ResonancePoint,
    Trajectory,
    evolve_decaying,
    evolve_static,
    first_overlap_minimum,
    first_resonance,
    overlap_with,
    propagate_decaying,
    propagate_driven,
    propagate_static,
    population,
    site_population,
    sites_population,
)
from .gates import PHI_PLUS, BellPrepSpec, bell_prepare_pulsed, rect_pulse_time
from .hamiltonian import BlockSpec, DriveSpec, DrivenGenerator, apply_block, chain_hamiltonian
from .model import HBAR, BasisIndex, ChainSpec, Sector, StateVector, basis_state, build_basis, single_excitation

DENSITY_ATOL = 1e-10
SWAP_GATE_FIDELITY = 0.99
NOMINAL_FACTORS = (0.94, 0.99, 0.99, 0.99)


@dataclass(frozen=True)
class ArmSpec:
    """One distribution arm: QDA + ``bus_length`` bus dots + QDC."""

    bus_length: int
    v_f: float = 0.2
    shift: float = 4.0
    decay_rate: float = 0.0

    def __post_init__(self):
        if self.bus_length < 1:
            raise ValidationError("bus_length must be >= 1")
        if self.decay_rate < 0:
            raise ValidationError("decay_rate must be >= 0")

    @property
    def n_sites(self) -> int:
        return self.bus_length + 2

    @property
    def shift_ratio(self) -> float:
        return self.shift / self.v_f if self.v_f else np.inf

    @property
    def bus_sites(self) -> tuple[int, ...]:
        return tuple(range(1, self.n_sites - 1))

    def chain(self) -> ChainSpec:
        return ChainSpec.uniform(self.n_sites, self.v_f, decay_rate=self.decay_rate)

    def basis(self) -> BasisIndex:
        return build_basis(self.n_sites, Sector.exactly(1))

    def hamiltonian(self, blocked: bool = False) -> np.ndarray:
        basis = self.basis()
        h = chain_hamiltonian(self.chain(), basis)
        if blocked:
            h = apply_block(h, basis, BlockSpec(self.bus_sites, self.shift))
        return h

    def start_state(self) -> StateVector:
        return basis_state(self.basis(), single_excitation(self.n_sites, 0))

    def resonance_window(self) -> float:
        """Scan length that safely contains the first end-site maximum."""
        return (self.n_sites + 4) * HBAR / self.v_f


# ---------------------------------------------------------------------------
# single arm


@dataclass
class ArmTransfer:
    amplitude: complex
    time: float
    trajectory: Trajectory
    state: StateVector
    coherent_fidelity: float

    @property
    def fidelity(self) -> float:
        return abs(self.amplitude) ** 2


def transfer_trajectory(arm: ArmSpec, dt: float = 0.02, t_max: float | None = None) -> Trajectory:
    """Coherent QDA -> QDC scan on the unblocked arm (``P_end``, ``P_start``)."""
    basis = arm.basis()
    times = np.arange(0.0, (t_max or arm.resonance_window()) + dt / 2, dt)
    return evolve_static(
        arm.hamiltonian(), arm.start_state(), times,
        {"P_end": site_population(basis, arm.n_sites - 1), "P_start": site_population(basis, 0)},
    )


def arm_transfer(arm: ArmSpec, dt: float = 0.02) -> ArmTransfer:
    """Amplitude on QDC at the first transfer resonance.

    The resonance time comes from the coherent dynamics; with a decay rate
    the amplitude there carries the recombination envelope.
    """
    traj = transfer_trajectory(arm, dt)
    res = first_resonance(traj, "P_end")
    h, psi0 = arm.hamiltonian(), arm.start_state()
    psi = propagate_decaying(h, arm.decay_rate, psi0, res.time)
    coherent = abs(propagate_static(h, psi0, res.time).amplitudes[-1]) ** 2
    return ArmTransfer(complex(psi.amplitudes[-1]), res.time, traj, psi, float(coherent))


def blocking_overlap(arm: ArmSpec, dt: float | None = None, t_max: float | None = None) -> tuple[ResonancePoint, Trajectory]:
    """Return probability of an exciton held in QDA while the bus is blocked.

    Gives the first minimum of ``|<QDA|psi(t)>|^2`` and the trajectory
    (observables ``overlap`` and ``P_bus``).
    """
    omega = sqrt(arm.shift**2 + 4 * arm.v_f**2)
    period = 2 * np.pi * HBAR / omega
    dt = dt or min(0.005, period / 200)
    t_max = t_max or 1.5 * period
    psi0 = arm.start_state()
    traj = evolve_static(
        arm.hamiltonian(blocked=True), psi0, np.arange(0.0, t_max + dt / 2, dt),
        {"overlap": overlap_with(psi0), "P_bus": sites_population(psi0.basis, arm.bus_sites)},
    )
    return first_overlap_minimum(traj), traj


# ---------------------------------------------------------------------------
# control arrays


def control_pi_time(v_f: float, control_rabi: float | None = None) -> float:
    return rect_pulse_time(control_rabi or 25 * v_f, np.pi)


def control_array_run(
    n_dots: int,
    v_f: float,
    rabi: float,
    t_max: float,
    dt: float = 0.005,
    start: str = "ground",
) -> Trajectory:
    """Drive every dot of a control array at once (full 2^n basis).

    Records ``P_ground`` and ``P_all_excited``.
    """
    basis = build_basis(n_dots)
    h = chain_hamiltonian(ChainSpec.uniform(n_dots, v_f), basis)
    gen = DrivenGenerator(h, basis, [DriveSpec(range(n_dots), rabi, start=0.0)])
    ground, full = "0" * n_dots, "1" * n_dots
    psi0 = basis_state(basis, ground if start == "ground" else full)
    n = int(round(t_max / dt))
    return propagate_driven(
        gen, psi0, np.linspace(0.0, n * dt, n + 1), dt,
        {"P_ground": population(basis, ground), "P_all_excited": population(basis, full)},
    )


def control_switch_fidelity(n_dots: int, v_f: float, rabi: float) -> tuple[float, float]:
    """Fidelity of filling (ground -> all) and emptying (all -> ground) at the pi time."""
    t_pi = rect_pulse_time(rabi, np.pi)
    fill = control_array_run(n_dots, v_f, rabi, t_pi, dt=t_pi / 40, start="ground")
    empty = control_array_run(n_dots, v_f, rabi, t_pi, dt=t_pi / 40, start="excited")
    return float(fill["P_all_excited"][-1]), float(empty["P_ground"][-1])


# ---------------------------------------------------------------------------
# timeline


@dataclass(frozen=True)
class Segment:
    step: int
    configuration: str  # blocked | unblocked | driven
    duration: float
    label: str


@dataclass(frozen=True)
class ProtocolTimeline:
    segments: tuple[Segment, ...]

    def __post_init__(self):
        steps = [s.step for s in self.segments]
        if steps != sorted(steps) or not set(steps) <= set(range(1, 7)):
            raise ValidationError("segments must follow steps 1..6 in order")
        for s in self.segments:
            if not s.duration > 0:
                raise ValidationError(f"segment {s.label!r} has non-positive duration")
            if s.configuration not in ("blocked", "unblocked", "driven"):
                raise ValidationError(f"unknown configuration {s.configuration!r}")

    @property
    def total(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def duration_of(self, step: int) -> float:
        return float(sum(s.duration for s in self.segments if s.step == step))


def build_timeline(t_control: float, t_bell: float, t_transfer: float, t_swap: float) -> ProtocolTimeline:
    return ProtocolTimeline((
        Segment(1, "driven", t_control, "fill control arrays (block buses)"),
        Segment(2, "blocked", t_bell, "prepare Bell pair on QDA, QDB"),
        Segment(3, "driven", t_control, "empty control arrays (unblock)"),
        Segment(4, "unblocked", t_transfer, "transfer along buses"),
        Segment(5, "driven", t_control, "refill control arrays (re-block)"),
        Segment(6, "blocked", t_swap, "SWAP-in to spin storage"),
    ))


# ---------------------------------------------------------------------------
# two-qubit states


def validate_density_matrix(rho: np.ndarray, atol: float = DENSITY_ATOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidDensityMatrix(f"expected a 4x4 matrix, got {rho.shape}")
    if not np.allclose(rho, rho.conj().T, rtol=0, atol=atol):
        raise InvalidDensityMatrix("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > atol:
        raise InvalidDensityMatrix(f"trace is {np.trace(rho).real:.12g}")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -atol:
        raise InvalidDensityMatrix("density matrix has a negative eigenvalue")
    return rho


_YY = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    rho = validate_density_matrix(rho)
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    sqrt_rho = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    rho_tilde = _YY @ rho.conj() @ _YY
    m = sqrt_rho @ rho_tilde @ sqrt_rho
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(0.5 * (m + m.conj().T)), 0, None))[::-1]
    return float(min(1.0, max(0.0, lam[0] - lam[1] - lam[2] - lam[3])))


def bell_fidelity(rho: np.ndarray, correct_phase: bool = True) -> float:
    """Overlap with ``(|00> + |11>)/sqrt(2)``.

    With ``correct_phase`` the relative phase of ``|11>`` is optimised,
    since a local phase gate on either register undoes it.
    """
    rho = np.asarray(rho)
    if correct_phase:
        return float(0.5 * (rho[0, 0] + rho[3, 3]).real + abs(rho[0, 3]))
    return float(np.real(PHI_PLUS.conj() @ rho @ PHI_PLUS))


def pure_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def arm_sector_basis(n_sites: int) -> BasisIndex:
    """Vacuum (index 0) plus one exciton on site ``k`` (index ``k + 1``)."""
    return build_basis(n_sites, Sector.at_most(1))


def reduced_two_qubit_state(
    joint,
    basis_a: BasisIndex,
    basis_b: BasisIndex,
    site_a: int,
    site_b: int,
) -> np.ndarray:
    """Occupations of ``site_a`` (arm A) and ``site_b`` (arm B) as a 4x4 state.

    ``joint`` is a state vector or density matrix over ``basis_a x basis_b``
    (index ``i_a * dim_b + i_b``). Every other site is traced out, so
    amplitude left on the buses only adds mixedness.
    """
    if isinstance(joint, StateVector):
        joint = joint.amplitudes
    joint = np.asarray(joint, dtype=complex)
    rho = pure_density(joint) if joint.ndim == 1 else joint
    dim = basis_a.dim * basis_b.dim
    if rho.shape != (dim, dim):
        raise DimensionMismatch(f"joint state of shape {joint.shape} does not match {dim}-dim product basis")

    def split(basis, site):
        q = basis.occupations[:, site].astype(int)
        rest = basis.states & ~np.uint64(1 << site)
        _, rest_id = np.unique(rest, return_inverse=True)
        return q, rest_id, rest_id.max() + 1

    qa, ra, na = split(basis_a, site_a)
    qb, rb, nb = split(basis_b, site_b)
    q = (2 * qa[:, None] + qb[None, :]).ravel()
    r = (ra[:, None] * nb + rb[None, :]).ravel()
    n_rest = na * nb
    embed = np.zeros((4 * n_rest, dim))
    embed[q * n_rest + r, np.arange(dim)] = 1.0
    big = (embed @ rho @ embed.T).reshape(4, n_rest, 4, n_rest)
    return np.einsum("arbr->ab", big)


# ---------------------------------------------------------------------------
# budget


@dataclass(frozen=True)
class FidelityBudget:
    chain_transfer: float
    blocking: float
    swap_gate: float
    decay: float

    @property
    def factors(self) -> tuple[float, float, float, float]:
        return (self.chain_transfer, self.blocking, self.swap_gate, self.decay)

    @property
    def total(self) -> float:
        return float(np.prod(self.factors))

    def __float__(self):
        return self.total

    def describe(self) -> str:
        product = " x ".join(f"{f:.4g}" for f in self.factors)
        return f"{product} = {self.total:.4f} ({self.total:.0%})"


def fidelity_budget(chain_transfer: float, blocking: float, swap_gate: float, decay: float) -> FidelityBudget:
    """Multiplicative end-to-end fidelity estimate."""
    for name, value in (("chain_transfer", chain_transfer), ("blocking", blocking),
                        ("swap_gate", swap_gate), ("decay", decay)):
        if not 0.0 <= value <= 1.0:
            raise OutOfRange(f"{name} = {value} is not a probability")
    return FidelityBudget(float(chain_transfer), float(blocking), float(swap_gate), float(decay))


class DecayFactors(NamedTuple):
    population: float  # exp(-t / T1)
    amplitude: float  # exp(-t / 2 T1)


def decay_factors(decay_rate: float, elapsed: float) -> DecayFactors:
    return DecayFactors(exp(-decay_rate * elapsed), exp(-0.5 * decay_rate * elapsed))


# ---------------------------------------------------------------------------
# full run


def synchronized_rabi(shift: float, cycles: int = 2) -> float:
    """Rabi coupling for which a resonant pi pulse leaves a line detuned by
    ``shift`` after exactly ``cycles`` full off-resonant oscillations."""
    return shift / sqrt(16 * cycles**2 - 4)


DEFAULT_BELL = BellPrepSpec(coulomb_shift=4.0, rabi_half=2.0, rabi_pi=synchronized_rabi(4.0, 2))


@dataclass
class DistributionReport:
    arm_lengths: tuple[int, int]
    v_f: float
    shift_ratio: float
    decay_rate: float
    resonance_times: tuple[float, float]
    transfer: tuple[float, float]
    transfer_with_decay: tuple[float, float]
    leakage: dict[str, float]
    bell_prep_fidelity: float
    control_switch: tuple[float, float] | None
    blocking_overlap: float
    reduced_state: np.ndarray
    concurrence: float
    bell_fidelity: float
    bell_fidelity_raw: float
    timeline: ProtocolTimeline
    decay: DecayFactors
    budget_nominal: FidelityBudget
    budget_simulated: FidelityBudget
    joint_density: np.ndarray = field(repr=False)
    arm_states: tuple[np.ndarray, np.ndarray] = field(repr=False)

    @property
    def elapsed(self) -> float:
        return self.timeline.total

    @property
    def max_leakage(self) -> float:
        return max(self.leakage.values(), default=0.0)

    def text(self) -> str:
        lines = [
            ("arm_lengths", "x".join(map(str, self.arm_lengths))),
            ("V_F_meV", f"{self.v_f:g}"),
            ("shift_ratio", f"{self.shift_ratio:g}"),
            ("decay_rate_per_ps", f"{self.decay_rate:g}"),
            ("resonance_time_A_ps", f"{self.resonance_times[0]:.6f}"),
            ("resonance_time_B_ps", f"{self.resonance_times[1]:.6f}"),
            ("transfer_A", f"{self.transfer[0]:.6f}"),
            ("transfer_B", f"{self.transfer[1]:.6f}"),
            ("transfer_with_decay_A", f"{self.transfer_with_decay[0]:.6f}"),
            ("transfer_with_decay_B", f"{self.transfer_with_decay[1]:.6f}"),
            ("bell_prep_fidelity", f"{self.bell_prep_fidelity:.6f}"),
            ("blocking_overlap", f"{self.blocking_overlap:.6f}"),
        ]
        if self.control_switch is not None:
            lines += [("control_fill_fidelity", f"{self.control_switch[0]:.6f}"),
                      ("control_empty_fidelity", f"{self.control_switch[1]:.6f}")]
        lines += [(f"leakage_{k}", f"{v:.6g}") for k, v in self.leakage.items()]
        lines += [
            ("concurrence", f"{self.concurrence:.6f}"),
            ("bell_fidelity", f"{self.bell_fidelity:.6f}"),
            ("bell_fidelity_raw", f"{self.bell_fidelity_raw:.6f}"),
        ]
        lines += [(f"step{s.step}_ps", f"{s.duration:.6f}") for s in self.timeline.segments]
        lines += [
            ("elapsed_ps", f"{self.elapsed:.6f}"),
            ("decay_population", f"{self.decay.population:.6f}  # exp(-t/T1)"),
            ("decay_amplitude", f"{self.decay.amplitude:.6f}  # exp(-t/2T1)"),
            ("budget_nominal", self.budget_nominal.describe()),
            ("budget_nominal_population_decay",
             fidelity_budget(*self.budget_nominal.factors[:3], self.decay.population).describe()),
            ("budget_simulated", self.budget_simulated.describe()),
        ]
        return "".join(f"{k} = {v}\n" for k, v in lines)

    def csv_row(self) -> list[str]:
        return [
            "x".join(map(str, self.arm_lengths)),
            f"{self.v_f:g}",
            f"{self.shift_ratio:g}",
            f"{self.transfer[0]:.6f}",
            f"{self.transfer[1]:.6f}",
            f"{self.max_leakage:.6g}",
            f"{self.concurrence:.6f}",
            f"{self.elapsed:.6f}",
            f"{self.budget_simulated.total:.6f}",
        ]


CSV_COLUMNS = ["arm_lengths", "V_F_meV", "shift_ratio", "transfer_A", "transfer_B",
               "leakage", "concurrence", "elapsed_ps", "budget_total"]


def reports_csv(reports) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in reports:
        buf.write(",".join(r.csv_row()) + "\n")
    return buf.getvalue()


def _hold(arm: ArmSpec, psi: StateVector, t: float, blocked: bool, leak_key: str | None,
          leakage: dict[str, float], dt: float = 0.005) -> StateVector:
    """Evolve an arm through a blocked interval.

    ``blocked=False`` is ideal confinement (only recombination acts).
    Otherwise the blocked Hamiltonian runs and the largest rise of the bus
    population above its value at the start of the interval, sampled on a
    ``dt`` grid, is recorded under ``leak_key``. Amplitude already in the
    bus when blocking starts is not leakage.
    """
    if t <= 0:
        return psi
    if not blocked:
        return propagate_decaying(np.zeros((psi.basis.dim,) * 2), arm.decay_rate, psi, t)
    n = max(2, int(np.ceil(t / dt)))
    traj = evolve_decaying(arm.hamiltonian(blocked=True), arm.decay_rate, psi, np.linspace(0, t, n + 1),
                           {"P_bus": sites_population(psi.basis, arm.bus_sites)})
    if leak_key is not None:
        rise = float((traj["P_bus"] - traj["P_bus"][0]).max())
        leakage[leak_key] = max(leakage.get(leak_key, 0.0), rise)
    return traj.state(-1)


def _arm_channel(states: dict[int, np.ndarray], decayed: float) -> list[list[np.ndarray]]:
    """Action of one arm on ``|i><j|`` for i, j in {vacuum, exciton}."""
    phi = [states[0], states[1]]
    out = [[np.outer(phi[i], phi[j].conj()) for j in range(2)] for i in range(2)]
    out[1][1] = out[1][1] + decayed * np.outer(states[0], states[0])
    return out


def run_distribution(
    arm_a: ArmSpec,
    arm_b: ArmSpec,
    ideal_controls: bool = True,
    explicit_blocking: bool = False,
    bell: BellPrepSpec = DEFAULT_BELL,
    control_rabi: float | None = None,
    swap_duration: float = 1.0,
    swap_fidelity: float = SWAP_GATE_FIDELITY,
    strict_timing: bool = False,
    reblock_tolerance: float = 0.5,
) -> DistributionReport:
    """Run steps 1-6 and assess the pair delivered to (QDC, QDD).

    ``ideal_controls`` replaces the pulsed Bell preparation by the ideal
    gates. ``explicit_blocking`` runs the blocked Hamiltonian during every
    confinement interval and simulates the control-array pulses; otherwise
    confinement is perfect and switching instantaneous. Both arms are
    evolved for the slower arm's resonance time unless ``strict_timing``,
    in which case each arm is re-blocked at its own resonance.
    """
    arms = (arm_a, arm_b)
    transfers = [arm_transfer(a) for a in arms]
    t_res = tuple(t.time for t in transfers)
    if strict_timing and abs(t_res[0] - t_res[1]) > reblock_tolerance:
        raise ArmMismatch(f"resonance times {t_res[0]:.3f} and {t_res[1]:.3f} ps differ by more than "
                          f"{reblock_tolerance} ps")
    t_transfer = max(t_res)
    v_f = arm_a.v_f
    rabi_ctrl = control_rabi or 25 * v_f
    t_control = control_pi_time(v_f, rabi_ctrl)
    timeline = build_timeline(t_control, bell.duration, t_transfer, swap_duration)

    if ideal_controls:
        pair, bell_prep = PHI_PLUS.copy(), 1.0
    else:
        pair, bell_prep = bell_prepare_pulsed(bell)

    leakage: dict[str, float] = {}
    channels = []
    finals = []
    for tag, arm, tr in zip("AB", arms, transfers):
        psi = arm.start_state()
        psi = _hold(arm, psi, timeline.duration_of(2) + timeline.duration_of(3), explicit_blocking,
                    f"bell_prep_{tag}", leakage)
        t_own = tr.time if strict_timing else t_transfer
        psi = propagate_decaying(arm.hamiltonian(), arm.decay_rate, psi, t_own)
        psi = _hold(arm, psi, (t_transfer - t_own) + timeline.duration_of(5) + timeline.duration_of(6),
                    explicit_blocking, f"delivery_{tag}", leakage)
        excited = np.concatenate([[0.0], psi.amplitudes])
        vacuum = np.zeros_like(excited)
        vacuum[0] = 1.0
        channels.append(_arm_channel({0: vacuum, 1: excited}, 1.0 - psi.norm**2))
        finals.append(psi.amplitudes)

    ea, eb = channels
    joint = sum(
        pair[2 * a + b] * np.conj(pair[2 * a2 + b2]) * np.kron(ea[a][a2], eb[b][b2])
        for a in range(2) for b in range(2) for a2 in range(2) for b2 in range(2)
    )
    basis_a, basis_b = arm_sector_basis(arm_a.n_sites), arm_sector_basis(arm_b.n_sites)
    rho = reduced_two_qubit_state(joint, basis_a, basis_b, arm_a.n_sites - 1, arm_b.n_sites - 1)

    block_points = [blocking_overlap(a)[0].value for a in arms]
    if explicit_blocking:
        switch = control_switch_fidelity(arm_a.bus_length, v_f, rabi_ctrl)
        blocking_factor = 1.0 - max(leakage.values())
    else:
        switch = None
        blocking_factor = min(block_points)
    decay = decay_factors(max(a.decay_rate for a in arms), timeline.total)
    coherent = tuple(t.coherent_fidelity for t in transfers)
    return DistributionReport(
        arm_lengths=(arm_a.bus_length, arm_b.bus_length),
        v_f=v_f,
        shift_ratio=arm_a.shift_ratio,
        decay_rate=max(a.decay_rate for a in arms),
        resonance_times=t_res,
        transfer=coherent,
        transfer_with_decay=tuple(t.fidelity for t in transfers),
        leakage=leakage,
        bell_prep_fidelity=bell_prep,
        control_switch=switch,
        blocking_overlap=min(block_points),
        reduced_state=rho,
        concurrence=concurrence(rho),
        bell_fidelity=bell_fidelity(rho),
        bell_fidelity_raw=bell_fidelity(rho, correct_phase=False),
        timeline=timeline,
        decay=decay,
        budget_nominal=fidelity_budget(*NOMINAL_FACTORS),
        budget_simulated=fidelity_budget(min(coherent), blocking_factor, swap_fidelity, decay.amplitude),
        joint_density=joint,
        arm_states=tuple(finals),
    )
