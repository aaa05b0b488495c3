"""Units, chain geometry and the occupation-number basis.

Energies are in meV, times in ps and rates in 1/ps throughout, so that
``exp(-1j * H * t / HBAR)`` needs no further conversion.

Basis states are occupation bitstrings stored as integers with dot 0 as
the least significant bit. Within a sector the states are sorted by that
integer value, so ``|00000>`` is index 0 and, in the full 5-dot basis,
``|11111>`` is index 31.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionOverflow,
    NegativeRate,
    SectorViolation,
    ValidationError,
)

HBAR = 0.6582119569  # meV ps

MAX_DIMENSION = 2**20
MAX_DOTS = 64


@dataclass(frozen=True)
class UnitSystem:
    hbar: float = HBAR
    energy: str = "meV"
    time: str = "ps"
    rate: str = "1/ps"

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValidationError("hbar must be positive")


UNITS = UnitSystem()


@dataclass(frozen=True)
class DotSpec:
    """A single two-level dot: exciton energy (meV) and recombination rate (1/ps)."""

    energy: float = 0.0
    decay_rate: float = 0.0

    def __post_init__(self):
        if self.decay_rate < 0:
            raise NegativeRate(f"decay rate must be >= 0, got {self.decay_rate}")


@dataclass(frozen=True)
class ChainSpec:
    """Ordered dots with nearest-neighbour Förster couplings (meV)."""

    dots: tuple[DotSpec, ...]
    couplings: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "dots", tuple(self.dots))
        object.__setattr__(self, "couplings", tuple(float(v) for v in self.couplings))
        if len(self.dots) < 1:
            raise ValidationError("a chain needs at least one dot")
        if len(self.couplings) != len(self.dots) - 1:
            raise DimensionMismatch(
                f"{len(self.dots)} dots need {len(self.dots) - 1} couplings, "
                f"got {len(self.couplings)}"
            )

    @classmethod
    def uniform(cls, n_dots: int, v_f: float, energy: float = 0.0, decay_rate: float = 0.0):
        dots = tuple(DotSpec(energy, decay_rate) for _ in range(n_dots))
        return cls(dots, (v_f,) * (n_dots - 1))

    @property
    def n_dots(self) -> int:
        return len(self.dots)

    @property
    def energies(self) -> np.ndarray:
        return np.array([d.energy for d in self.dots], dtype=float)

    @property
    def decay_rates(self) -> np.ndarray:
        return np.array([d.decay_rate for d in self.dots], dtype=float)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.energies)) <= 1 and len(set(self.couplings)) <= 1


@dataclass(frozen=True)
class Sector:
    """Excitation-number restriction: ``all``, ``exactly`` k or ``at_most`` k."""

    kind: str = "all"
    k: int | None = None

    def __post_init__(self):
        if self.kind not in ("all", "exactly", "at_most"):
            raise ValidationError(f"unknown sector kind {self.kind!r}")
        if self.kind != "all" and (self.k is None or self.k < 0):
            raise ValidationError(f"sector {self.kind!r} needs k >= 0")

    @classmethod
    def all(cls) -> "Sector":
        return cls("all")

    @classmethod
    def exactly(cls, k: int) -> "Sector":
        return cls("exactly", k)

    @classmethod
    def at_most(cls, k: int) -> "Sector":
        return cls("at_most", k)

    def allowed(self, n_dots: int) -> range:
        if self.kind == "all":
            return range(0, n_dots + 1)
        if self.kind == "exactly":
            return range(self.k, self.k + 1) if self.k <= n_dots else range(0)
        return range(0, min(self.k, n_dots) + 1)

    def contains(self, n_excitations: int, n_dots: int) -> bool:
        return n_excitations in self.allowed(n_dots)

    def dimension(self, n_dots: int) -> int:
        return sum(comb(n_dots, k) for k in self.allowed(n_dots))

    def __str__(self):
        return "ALL" if self.kind == "all" else f"{self.kind.upper()}({self.k})"


Occupation = Union[str, int, Sequence[int]]


def occupation_to_int(occupation: Occupation, n_dots: int) -> int:
    """Convert an occupation to its integer bitstring.

    Strings and sequences list dots in order (character/element ``i`` is
    dot ``i``); a plain ``int`` is taken as the bitmask itself.
    """
    if isinstance(occupation, (int, np.integer)):
        value = int(occupation)
        if value < 0 or value >= 1 << n_dots:
            raise SectorViolation(f"bitmask {value} out of range for {n_dots} dots")
        return value
    bits = [int(c) for c in occupation]
    if len(bits) != n_dots or any(b not in (0, 1) for b in bits):
        raise SectorViolation(f"occupation {occupation!r} is not a {n_dots}-dot bitstring")
    return sum(b << i for i, b in enumerate(bits))


@dataclass(frozen=True, eq=False)
class BasisIndex:
    """Bijection between sector bitstrings and vector indices."""

    n_dots: int
    sector: Sector
    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.states.setflags(write=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def __len__(self):
        return self.dim

    def index_of(self, occupation: Occupation) -> int:
        value = occupation_to_int(occupation, self.n_dots)
        j = int(np.searchsorted(self.states, np.uint64(value)))
        if j >= self.dim or int(self.states[j]) != value:
            raise SectorViolation(f"occupation {occupation!r} lies outside sector {self.sector}")
        return j

    def indices_of(self, values: np.ndarray) -> np.ndarray:
        """Vectorised lookup for integer bitstrings known to be in the basis."""
        return np.searchsorted(self.states, values.astype(np.uint64))

    def contains_values(self, values: np.ndarray) -> np.ndarray:
        j = np.searchsorted(self.states, values.astype(np.uint64))
        j = np.minimum(j, self.dim - 1)
        return self.states[j] == values.astype(np.uint64)

    def bitstring_of(self, j: int) -> str:
        value = int(self.states[j])
        return "".join(str((value >> i) & 1) for i in range(self.n_dots))

    @property
    def occupations(self) -> np.ndarray:
        """(dim, n_dots) array of 0/1 occupations."""
        shifts = np.arange(self.n_dots, dtype=np.uint64)
        return ((self.states[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.int8)

    @property
    def excitation_numbers(self) -> np.ndarray:
        return self.occupations.sum(axis=1)

    def same_as(self, other: "BasisIndex") -> bool:
        return (
            self.n_dots == other.n_dots
            and self.sector == other.sector
            and np.array_equal(self.states, other.states)
        )


def build_basis(n_dots: int, sector: Sector | None = None) -> BasisIndex:
    """Enumerate the bitstrings of ``n_dots`` dots allowed by ``sector``.

    Raises
    ------
    DimensionOverflow
        If the basis would exceed ``2**20`` states or more than 64 dots.
    """
    sector = sector or Sector.all()
    if n_dots < 1:
        raise ValidationError("n_dots must be >= 1")
    if n_dots > MAX_DOTS:
        raise DimensionOverflow(f"at most {MAX_DOTS} dots are representable")
    dim = sector.dimension(n_dots)
    if dim > MAX_DIMENSION:
        raise DimensionOverflow(f"{n_dots}-dot {sector} basis has {dim} > 2^20 states")
    if sector.kind == "all":
        states = np.arange(1 << n_dots, dtype=np.uint64)
    else:
        values = [
            sum(1 << i for i in sites)
            for k in sector.allowed(n_dots)
            for sites in itertools.combinations(range(n_dots), k)
        ]
        states = np.array(sorted(values), dtype=np.uint64)
    return BasisIndex(n_dots, sector, states)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes over a :class:`BasisIndex`.

    The norm may drop below one only for decaying (no-jump) evolution.
    """

    basis: BasisIndex
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dim,):
            raise DimensionMismatch(
                f"amplitudes of shape {amps.shape} do not match basis dimension {self.basis.dim}"
            )
        if np.linalg.norm(amps) > 1 + 1e-9:
            raise ValidationError("state norm exceeds 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def population(self, occupation: Occupation) -> float:
        return float(self.probabilities[self.basis.index_of(occupation)])

    def site_populations(self) -> np.ndarray:
        """Mean exciton number on every dot."""
        return self.probabilities @ self.basis.occupations

    def sector_populations(self) -> np.ndarray:
        """Probability weight in each total-excitation-number sector 0..n_dots."""
        return np.bincount(
            self.basis.excitation_numbers, weights=self.probabilities, minlength=self.basis.n_dots + 1
        )

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def with_amplitudes(self, amplitudes: np.ndarray) -> "StateVector":
        return StateVector(self.basis, amplitudes)


def basis_state(basis: BasisIndex, occupation: Occupation) -> StateVector:
    """Unit vector on the given occupation; raises SectorViolation outside the sector."""
    amps = np.zeros(basis.dim, dtype=complex)
    amps[basis.index_of(occupation)] = 1.0
    return StateVector(basis, amps)


def single_excitation(n_dots: int, site: int) -> str:
    """Bitstring with one exciton on ``site``."""
    if not 0 <= site < n_dots:
        raise SectorViolation(f"site {site} outside a {n_dots}-dot chain")
    return "".join("1" if i == site else "0" for i in range(n_dots))
