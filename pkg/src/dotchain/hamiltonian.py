"""Hermitian generators for dot chains, laser drives and blocking shifts.

All matrices are dense complex arrays in meV over a :class:`BasisIndex`.
Drives are written in the rotating frame of their carrier: a drive on dot
``i`` contributes ``delta_i * n_i + f(t) * rabi * (e^{i phase} b_i^+ + h.c.)``
so that a resonant rectangular pulse inverts a lone dot after
``pi * HBAR / (2 * rabi)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NonHermitianInput, SectorViolation, ValidationError
from .model import BasisIndex, ChainSpec

HERMITIAN_ATOL = 1e-12


def is_hermitian(h: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    return h.ndim == 2 and h.shape[0] == h.shape[1] and np.allclose(h, h.conj().T, rtol=0, atol=atol)


def check_hermitian(h: np.ndarray, atol: float = HERMITIAN_ATOL) -> None:
    if not is_hermitian(h, atol):
        raise NonHermitianInput("generator is not conjugate-symmetric")


def _check_sites(sites: Iterable[int], n_dots: int) -> tuple[int, ...]:
    sites = tuple(int(s) for s in sites)
    for s in sites:
        if not 0 <= s < n_dots:
            raise ValidationError(f"site {s} outside a {n_dots}-dot basis")
    return sites


def number_operator(basis: BasisIndex, sites: Sequence[int] | None = None) -> np.ndarray:
    """Diagonal exciton-number operator, summed over ``sites`` (default: all)."""
    occ = basis.occupations
    if sites is not None:
        occ = occ[:, list(_check_sites(sites, basis.n_dots))]
    return np.diag(occ.sum(axis=1).astype(complex))


def hopping_operator(basis: BasisIndex, i: int, j: int) -> np.ndarray:
    """``b_j^+ b_i``: move an exciton from dot ``i`` to dot ``j``.

    Target states outside the basis are dropped.
    """
    i, j = _check_sites((i, j), basis.n_dots)
    s = basis.states
    bi, bj = np.uint64(1 << i), np.uint64(1 << j)
    src = np.flatnonzero(((s & bi) != 0) & ((s & bj) == 0))
    tgt_values = s[src] ^ bi ^ bj
    keep = basis.contains_values(tgt_values)
    op = np.zeros((basis.dim, basis.dim), dtype=complex)
    op[basis.indices_of(tgt_values[keep]), src[keep]] = 1.0
    return op


def raising_operator(basis: BasisIndex, i: int) -> np.ndarray:
    """``b_i^+`` truncated to the basis sector."""
    (i,) = _check_sites((i,), basis.n_dots)
    s = basis.states
    bit = np.uint64(1 << i)
    src = np.flatnonzero((s & bit) == 0)
    tgt_values = s[src] | bit
    keep = basis.contains_values(tgt_values)
    op = np.zeros((basis.dim, basis.dim), dtype=complex)
    op[basis.indices_of(tgt_values[keep]), src[keep]] = 1.0
    return op


def chain_hamiltonian(chain: ChainSpec, basis: BasisIndex) -> np.ndarray:
    """Site energies plus nearest-neighbour Förster hopping.

    The result conserves the total exciton number, so it can be built in
    any sector of the basis.
    """
    if basis.n_dots != chain.n_dots:
        raise DimensionMismatch(f"basis has {basis.n_dots} dots, chain has {chain.n_dots}")
    h = np.diag((basis.occupations @ chain.energies).astype(complex))
    for i, v in enumerate(chain.couplings):
        if v == 0:
            continue
        hop = hopping_operator(basis, i, i + 1)
        h += v * hop + np.conj(v) * hop.T
    return h


@dataclass(frozen=True)
class BlockSpec:
    """Biexcitonic shift (meV) added to every occupied dot in ``blocked_sites``."""

    blocked_sites: tuple[int, ...]
    shift: float

    def __post_init__(self):
        object.__setattr__(self, "blocked_sites", tuple(int(s) for s in self.blocked_sites))
        if not np.isfinite(self.shift):
            raise ValidationError("shift must be finite")


def apply_block(h: np.ndarray, basis: BasisIndex, block: BlockSpec) -> np.ndarray:
    if h.shape != (basis.dim, basis.dim):
        raise DimensionMismatch("matrix does not match basis")
    sites = _check_sites(block.blocked_sites, basis.n_dots)
    out = np.array(h, dtype=complex, copy=True)
    if sites:
        shift = block.shift * basis.occupations[:, list(sites)].sum(axis=1)
        out[np.diag_indices_from(out)] += shift
    return out


def pair_shift(basis: BasisIndex, i: int, j: int, shift: float) -> np.ndarray:
    """Diagonal ``shift * n_i * n_j`` (direct Coulomb coupling of two excitons)."""
    i, j = _check_sites((i, j), basis.n_dots)
    occ = basis.occupations
    return np.diag((shift * occ[:, i] * occ[:, j]).astype(complex))


@dataclass(frozen=True)
class DriveSpec:
    """A laser pulse on a set of dots, in its rotating frame.

    ``detuning`` is either one value for every target or one per target
    (meV). ``envelope`` is ``"rect"`` or ``"gaussian"``; a Gaussian is
    centred in the window with width ``sigma`` (ps) and peak 1.
    """

    target_sites: tuple[int, ...]
    rabi: float
    start: float = 0.0
    duration: float = np.inf
    detuning: float | tuple[float, ...] = 0.0
    envelope: str = "rect"
    sigma: float | None = None
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "target_sites", tuple(int(s) for s in self.target_sites))
        if self.rabi < 0:
            raise ValidationError("rabi coupling must be >= 0")
        if not self.duration > 0:
            raise ValidationError("pulse duration must be > 0")
        if self.envelope not in ("rect", "gaussian"):
            raise ValidationError(f"unknown envelope {self.envelope!r}")
        if self.envelope == "gaussian" and not (self.sigma and self.sigma > 0):
            raise ValidationError("gaussian envelope needs sigma > 0")
        if not np.isscalar(self.detuning):
            det = tuple(float(d) for d in self.detuning)
            if len(det) != len(self.target_sites):
                raise DimensionMismatch("one detuning per target site expected")
            object.__setattr__(self, "detuning", det)

    @property
    def end(self) -> float:
        return self.start + self.duration

    def detunings(self) -> np.ndarray:
        if np.isscalar(self.detuning):
            return np.full(len(self.target_sites), float(self.detuning))
        return np.asarray(self.detuning, dtype=float)

    def active(self, t: float) -> bool:
        return self.start <= t <= self.end

    def envelope_at(self, t: float) -> float:
        if not self.active(t):
            return 0.0
        if self.envelope == "rect":
            return 1.0
        centre = self.start + 0.5 * self.duration
        return float(np.exp(-0.5 * ((t - centre) / self.sigma) ** 2))


def _drive_parts(drive: DriveSpec, basis: BasisIndex) -> tuple[np.ndarray, np.ndarray]:
    """Detuning diagonal and unit-amplitude coupling of one drive."""
    if basis.sector.kind == "exactly":
        raise SectorViolation("drives change the exciton number; use an ALL or AT_MOST basis")
    sites = list(_check_sites(drive.target_sites, basis.n_dots))
    detuning = np.zeros((basis.dim, basis.dim), dtype=complex)
    coupling = np.zeros((basis.dim, basis.dim), dtype=complex)
    if sites:
        detuning[np.diag_indices(basis.dim)] = basis.occupations[:, sites] @ drive.detunings()
    for i in sites:
        coupling += raising_operator(basis, i)
    coupling *= np.exp(1j * drive.phase)
    return detuning, coupling + coupling.conj().T


def drive_hamiltonian(drive: DriveSpec, basis: BasisIndex, t: float) -> np.ndarray:
    """Rotating-frame drive generator at time ``t``; zero outside the pulse."""
    detuning, coupling = _drive_parts(drive, basis)
    if not drive.active(t):
        return np.zeros((basis.dim, basis.dim), dtype=complex)
    return detuning + drive.envelope_at(t) * drive.rabi * coupling


class DrivenGenerator:
    """Callable ``h(t)`` = static part + every active drive.

    Operator pieces are assembled once so evaluation inside an integrator
    is a handful of array additions.
    """

    def __init__(self, static: np.ndarray, basis: BasisIndex, drives: Sequence[DriveSpec] = ()):
        if static.shape != (basis.dim, basis.dim):
            raise DimensionMismatch("static part does not match basis")
        self.static = np.array(static, dtype=complex)
        self.basis = basis
        self.drives = tuple(drives)
        self._parts = []
        for d in self.drives:
            det, cpl = _drive_parts(d, basis)
            self._parts.append((d, det, d.rabi * cpl))

    @property
    def dim(self) -> int:
        return self.basis.dim

    def __call__(self, t: float) -> np.ndarray:
        h = self.static.copy()
        for d, det, cpl in self._parts:
            if d.active(t):
                h += det
                h += d.envelope_at(t) * cpl
        return h

    def norm_bound(self) -> float:
        """Upper bound on the spectral norm of ``h(t)`` over all ``t``."""
        bound = np.linalg.norm(self.static, 2)
        for _, det, cpl in self._parts:
            bound += np.abs(np.diag(det)).max(initial=0.0) + np.linalg.norm(cpl, 2)
        return float(bound)

    def breakpoints(self) -> list[float]:
        """Pulse edges, where the generator may jump."""
        pts = set()
        for d in self.drives:
            pts.add(d.start)
            if np.isfinite(d.end):
                pts.add(d.end)
        return sorted(pts)
