"""Ideal one- and two-qubit gates, Bell-pair preparation and the SWAP-in check.

Two-qubit vectors and matrices use the textbook ordering ``|q0 q1>`` with
``q0`` the first tensor factor, i.e. index ``2*q0 + q1``. For the
(QDA, QDB) pair, ``q0`` is QDA.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import erf, sqrt

import numpy as np

from .errors import ValidationError
from .evolve import propagate_driven
from .hamiltonian import DriveSpec, DrivenGenerator, chain_hamiltonian, pair_shift
from .model import HBAR, ChainSpec, DotSpec, basis_state, build_basis

UNITARY_ATOL = 1e-12

PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
KET0 = np.array([1, 0], dtype=complex)


def identity() -> np.ndarray:
    return np.eye(2, dtype=complex)


def hadamard() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def controlled_phase() -> np.ndarray:
    """diag(1, 1, 1, -1): sign flip on ``|11>`` only."""
    return np.diag([1, 1, 1, -1]).astype(complex)


def on_qubit(gate: np.ndarray, qubit: int) -> np.ndarray:
    """Lift a single-qubit gate to the two-qubit register."""
    if qubit == 0:
        return np.kron(gate, identity())
    if qubit == 1:
        return np.kron(identity(), gate)
    raise ValidationError(f"qubit must be 0 or 1, got {qubit}")


def cnot(control: int = 0, target: int = 1) -> np.ndarray:
    """C-NOT built as ``H_target P H_target``."""
    if control == target or {control, target} != {0, 1}:
        raise ValidationError("control and target must be the two distinct qubits 0 and 1")
    h_t = on_qubit(hadamard(), target)
    return h_t @ controlled_phase() @ h_t


def swap_in_sequence(exciton: int = 0, spin: int = 1) -> np.ndarray:
    """``H_i P H_i H_j P H_j`` with ``i`` the exciton and ``j`` the spin qubit.

    The rightmost factor acts first. With the spin prepared in ``|0>`` this
    moves the exciton qubit into the spin; it is not a full SWAP.
    """
    if exciton == spin:
        raise ValidationError("exciton and spin qubits must differ")
    h_i = on_qubit(hadamard(), exciton)
    h_j = on_qubit(hadamard(), spin)
    p = controlled_phase()
    return h_i @ p @ h_i @ h_j @ p @ h_j


def is_unitary(u: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    return np.allclose(u.conj().T @ u, np.eye(u.shape[0]), rtol=0, atol=atol)


def bell_prepare_ideal(first: int = 0) -> np.ndarray:
    """``CNOT_{first -> other} (H_first) |00>``."""
    other = 1 - first
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1
    return cnot(first, other) @ on_qubit(hadamard(), first) @ psi


def state_fidelity(ideal: np.ndarray, actual: np.ndarray) -> float:
    """``|<ideal|actual>|^2``; blind to global phase."""
    return float(abs(np.vdot(ideal, actual)) ** 2)


def phase_aligned_error(target: np.ndarray, actual: np.ndarray) -> float:
    """Distance between two vectors after the best global phase."""
    ov = np.vdot(target, actual)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(actual - phase * target))


def random_qubit_states(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` Haar-random single-qubit states, shape ``(n, 2)``."""
    z = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def swap_in_errors(states: np.ndarray, exciton: int = 0, spin: int = 1) -> np.ndarray:
    """Per-state error of moving ``|psi>`` from the exciton into a ``|0>`` spin."""
    s = swap_in_sequence(exciton, spin)
    errors = np.empty(len(states))
    for k, psi in enumerate(states):
        if exciton == 0:
            start, want = np.kron(psi, KET0), np.kron(KET0, psi)
        else:
            start, want = np.kron(KET0, psi), np.kron(psi, KET0)
        errors[k] = phase_aligned_error(want, s @ start)
    return errors


# ---------------------------------------------------------------------------
# pulsed Bell preparation


@dataclass(frozen=True)
class BellPrepSpec:
    """Two-colour pulse sequence on the stacked (QDA, QDB) pair.

    A pi/2 pulse resonant with QDA is followed by a pi pulse resonant with
    QDB's transition shifted by ``coulomb_shift`` (i.e. conditional on an
    exciton in QDA). Durations default to the values giving the nominal
    pulse areas; for Gaussian pulses ``sigma`` is chosen to match the area
    and the window spans six sigma.
    """

    coulomb_shift: float = 4.0
    rabi_half: float = 1.0
    rabi_pi: float = 0.1
    half_duration: float | None = None
    pi_duration: float | None = None
    envelope: str = "rect"

    def __post_init__(self):
        if self.coulomb_shift < 0:
            raise ValidationError("coulomb_shift must be >= 0")
        if not (self.rabi_half > 0 and self.rabi_pi > 0):
            raise ValidationError("pulse rabi couplings must be > 0")
        for d in (self.half_duration, self.pi_duration):
            if d is not None and not d > 0:
                raise ValidationError("pulse durations must be > 0")

    def pulses(self) -> tuple[DriveSpec, DriveSpec]:
        half = _pulse(0, self.rabi_half, np.pi / 2, 0.0, self.half_duration, self.envelope)
        full = _pulse(1, self.rabi_pi, np.pi, half.end, self.pi_duration, self.envelope)
        return half, full

    @property
    def duration(self) -> float:
        return self.pulses()[1].end


def rect_pulse_time(rabi: float, angle: float) -> float:
    """Rectangular-pulse length rotating a lone dot by ``angle`` on the Bloch sphere."""
    return angle * HBAR / (2 * rabi)


_GAUSS_AREA = sqrt(2 * np.pi) * erf(3 / sqrt(2))  # integral over +-3 sigma, per sigma


def _pulse(site, rabi, angle, start, duration, envelope) -> DriveSpec:
    # phase pi/2 turns the coupling into sigma_y, so |0> -> cos|0> + sin|1>
    # with real, positive amplitudes
    if envelope == "rect":
        return DriveSpec((site,), rabi, start=start, phase=np.pi / 2,
                         duration=duration or rect_pulse_time(rabi, angle))
    sigma = rect_pulse_time(rabi, angle) / _GAUSS_AREA
    return DriveSpec((site,), rabi, start=start, phase=np.pi / 2, envelope="gaussian",
                     sigma=sigma, duration=duration or 6 * sigma)


def bell_generator(spec: BellPrepSpec) -> DrivenGenerator:
    """Rotating-frame generator for the (QDA, QDB) pulse sequence.

    The frame follows QDA's bare line and QDB's conditional line, so the
    only static energy is ``-shift`` on the state with QDB alone excited.
    """
    basis = build_basis(2)
    dots = (DotSpec(0.0), DotSpec(-spec.coulomb_shift))
    static = chain_hamiltonian(ChainSpec(dots, (0.0,)), basis)
    static = static + pair_shift(basis, 0, 1, spec.coulomb_shift)
    return DrivenGenerator(static, basis, spec.pulses())


_DOT_TO_GATE = [0, 2, 1, 3]  # dot index nA + 2 nB -> gate index 2 nA + nB


def bell_prepare_pulsed(spec: BellPrepSpec | None = None, dt_max: float = 0.01) -> tuple[np.ndarray, float]:
    """Simulate the pulse sequence from ``|00>``.

    Returns the final (QDA, QDB) state in gate ordering and its fidelity
    to ``(|00> + |11>)/sqrt(2)``.
    """
    spec = spec or BellPrepSpec()
    gen = bell_generator(spec)
    psi0 = basis_state(gen.basis, "00")
    traj = propagate_driven(gen, psi0, [0.0, spec.duration], dt_max)
    dot_state = traj.states[-1]
    state = np.empty(4, dtype=complex)
    state[_DOT_TO_GATE] = dot_state
    return state, state_fidelity(PHI_PLUS, state)


# ---------------------------------------------------------------------------
# batch check


@dataclass(frozen=True)
class CheckResult:
    name: str
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<40s} error={self.error:.3e}  tol={self.tolerance:.1e}"


def run_gate_checks(seed: int = 0, n_random: int = 1000, tol: float = 1e-10) -> list[CheckResult]:
    """Evaluate every gate identity plus the randomised SWAP-in test."""
    h, p = hadamard(), controlled_phase()
    c01 = cnot(0, 1)
    expected_cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    e = np.eye(4, dtype=complex)
    results = [
        CheckResult("H|0> = (|0>+|1>)/sqrt2", np.abs(h @ [1, 0] - np.array([1, 1]) / np.sqrt(2)).max(), tol),
        CheckResult("H|1> = (|0>-|1>)/sqrt2", np.abs(h @ [0, 1] - np.array([1, -1]) / np.sqrt(2)).max(), tol),
        CheckResult("H H = I", np.abs(h @ h - np.eye(2)).max(), tol),
        CheckResult("P|11> = -|11>", np.abs(p @ e[3] + e[3]).max(), tol),
        CheckResult("P P = I", np.abs(p @ p - e).max(), tol),
        CheckResult("CNOT = H_t P H_t", np.abs(c01 - expected_cnot).max(), tol),
        CheckResult("CNOT|10> = |11>", np.abs(c01 @ e[2] - e[3]).max(), tol),
        CheckResult("CNOT(1->0) = H_0 P H_0", np.abs(cnot(1, 0) - on_qubit(h, 0) @ p @ on_qubit(h, 0)).max(), tol),
        CheckResult("unitarity H, P, CNOT, S", max(
            np.abs(u.conj().T @ u - np.eye(len(u))).max()
            for u in (h, p, c01, swap_in_sequence())
        ), tol),
        CheckResult("S|00> = |00>", phase_aligned_error(e[0], swap_in_sequence() @ e[0]), tol),
        CheckResult("Bell: CNOT H_A |00> = Phi+", np.abs(bell_prepare_ideal(0) - PHI_PLUS).max(), tol),
        CheckResult("Bell: roles of A and B interchanged", np.abs(bell_prepare_ideal(1) - PHI_PLUS).max(), tol),
    ]
    states = random_qubit_states(np.random.default_rng(seed), n_random)
    results.append(CheckResult(f"S(psi x 0) = 0 x psi, {n_random} random", swap_in_errors(states).max(), tol))
    return results
