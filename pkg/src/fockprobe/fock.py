"""States on truncated single- and multi-mode Fock spaces.

Pure states are dense complex amplitude vectors over the occupation basis
``0..cutoff`` of every mode, flattened in row-major (C) order.  Mixed states
are weighted ensembles of pure states; every mixed state used here is
diagonal in the number basis, so an ensemble is much cheaper than a dense
density matrix on a multi-mode space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import special

from .errors import DomainError, TruncationError

#: Population below which a level counts as empty for truncation guards.
SUPPORT_THRESHOLD = 1e-16

#: Tail mass targeted by :func:`auto_cutoff` when none is given.
DEFAULT_TAIL = 1e-12


@dataclass(frozen=True)
class TruncationReport:
    """Probability weight that a factory dropped by truncating at ``cutoff``."""

    cutoff: int
    tail_mass: float

    def __post_init__(self):
        if not 0.0 <= self.tail_mass <= 1.0:
            raise DomainError(f"tail_mass {self.tail_mass} outside [0, 1]")


@dataclass(frozen=True, eq=False)
class FockState:
    """Pure state on ``modes`` modes, each truncated at occupation ``cutoff``.

    ``amplitudes`` has length ``(cutoff + 1) ** modes``; index ``i`` belongs
    to the occupation tuple ``np.unravel_index(i, shape)``.  The array is
    copied and made read-only on construction.
    """

    amplitudes: np.ndarray
    cutoff: int
    modes: int = 1

    def __post_init__(self):
        if self.modes < 1:
            raise DomainError("modes must be positive")
        if self.cutoff < 0:
            raise DomainError("cutoff must be non-negative")
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != (self.cutoff + 1) ** self.modes:
            raise DomainError(
                f"expected {(self.cutoff + 1) ** self.modes} amplitudes, got {amps.size}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def _adopt(cls, amplitudes: np.ndarray, cutoff: int, modes: int = 1) -> "FockState":
        """Wrap a freshly built complex array without copying it."""
        amps = amplitudes.reshape(-1)
        if amps.dtype != complex or amps.size != (cutoff + 1) ** modes:
            return cls(amplitudes, cutoff, modes)
        self = object.__new__(cls)
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "cutoff", cutoff)
        object.__setattr__(self, "modes", modes)
        return self

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cutoff + 1,) * self.modes

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def index(self, occupation: Sequence[int]) -> int:
        """Flat amplitude index of an occupation tuple."""
        occupation = tuple(int(n) for n in occupation)
        if len(occupation) != self.modes:
            raise DomainError(f"need {self.modes} occupations, got {len(occupation)}")
        if any(n < 0 or n > self.cutoff for n in occupation):
            raise DomainError(f"occupation {occupation} outside cutoff {self.cutoff}")
        return int(np.ravel_multi_index(occupation, self.shape))

    def occupation(self, index: int) -> tuple[int, ...]:
        """Occupation tuple of a flat amplitude index."""
        if not 0 <= index < self.dim:
            raise DomainError(f"index {index} outside 0..{self.dim - 1}")
        return tuple(int(n) for n in np.unravel_index(index, self.shape))

    def amplitude(self, *occupation: int) -> complex:
        return complex(self.amplitudes[self.index(occupation)])

    def tensor_view(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per mode (read-only view)."""
        return self.amplitudes.reshape(self.shape)

    def norm_sq(self) -> float:
        return norm_sq(self)

    def normalized(self) -> "FockState":
        n = norm_sq(self)
        if n == 0.0:
            raise DomainError("cannot normalize the zero vector")
        return FockState(self.amplitudes / math.sqrt(n), self.cutoff, self.modes)

    def populations(self) -> np.ndarray:
        """Number-basis probabilities ``|amplitude|**2``, one axis per mode."""
        return np.abs(self.tensor_view()) ** 2

    def mean_occupation(self, mode: int = 0) -> float:
        """Mean occupation of ``mode`` divided by the squared norm."""
        pops = self.populations()
        other = tuple(ax for ax in range(self.modes) if ax != mode)
        marginal = pops.sum(axis=other) if other else pops
        return float(np.arange(self.cutoff + 1) @ marginal / marginal.sum())

    def with_cutoff(self, cutoff: int) -> "FockState":
        """Embed into a larger truncated space (zero padding)."""
        if cutoff < self.cutoff:
            raise DomainError("with_cutoff only enlarges the space")
        pad = [(0, cutoff - self.cutoff)] * self.modes
        return FockState(np.pad(self.tensor_view(), pad), cutoff, self.modes)


@dataclass(frozen=True, eq=False)
class FockDensity:
    """Mixed state as a list of ``(weight, FockState)`` pairs."""

    ensemble: tuple[tuple[float, FockState], ...] = field(default_factory=tuple)

    def __post_init__(self):
        members = tuple((float(w), s) for w, s in self.ensemble)
        if not members:
            raise DomainError("empty ensemble")
        if any(w < 0 for w, _ in members):
            raise DomainError("ensemble weights must be non-negative")
        first = members[0][1]
        for _, s in members[1:]:
            if s.modes != first.modes or s.cutoff != first.cutoff:
                raise DomainError("ensemble members must share modes and cutoff")
        object.__setattr__(self, "ensemble", members)

    @property
    def cutoff(self) -> int:
        return self.ensemble[0][1].cutoff

    @property
    def modes(self) -> int:
        return self.ensemble[0][1].modes

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.ensemble])

    def populations(self) -> np.ndarray:
        """Diagonal of the density matrix in the number basis."""
        return sum(w * s.populations() for w, s in self.ensemble)

    def mean_occupation(self, mode: int = 0) -> float:
        pops = self.populations()
        other = tuple(ax for ax in range(self.modes) if ax != mode)
        marginal = pops.sum(axis=other) if other else pops
        return float(np.arange(self.cutoff + 1) @ marginal / marginal.sum())

    def to_matrix(self) -> np.ndarray:
        """Dense density matrix; only sensible for small spaces."""
        return sum(w * np.outer(s.amplitudes, s.amplitudes.conj()) for w, s in self.ensemble)


State = FockState | FockDensity


def _check_cutoff(cutoff: int, minimum: int = 0) -> int:
    if int(cutoff) != cutoff or cutoff < minimum:
        raise DomainError(f"cutoff must be an integer >= {minimum}, got {cutoff}")
    return int(cutoff)


def make_number_state(m: int, cutoff: int) -> FockState:
    """Single-mode number state ``|m>``."""
    cutoff = _check_cutoff(cutoff)
    if not 0 <= m <= cutoff:
        raise DomainError(f"occupation {m} outside 0..{cutoff}")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[m] = 1.0
    return FockState(amps, cutoff)


def make_basis_state(occupation: Sequence[int], cutoff: int) -> FockState:
    """Multi-mode number state ``|n_0, n_1, ...>``."""
    cutoff = _check_cutoff(cutoff)
    modes = len(occupation)
    amps = np.zeros((cutoff + 1,) * modes, dtype=complex)
    if any(not 0 <= n <= cutoff for n in occupation):
        raise DomainError(f"occupation {tuple(occupation)} outside cutoff {cutoff}")
    amps[tuple(occupation)] = 1.0
    return FockState._adopt(amps, cutoff, modes)


def coherent_tail(alpha: complex, cutoff: int) -> float:
    """Poisson weight beyond ``cutoff`` for mean ``|alpha|**2``."""
    lam = abs(alpha) ** 2
    if lam == 0.0:
        return 0.0
    # P(N <= cutoff) = Q(cutoff + 1, lam); the lower regularized gamma is the
    # complement without cancellation.
    return float(special.gammainc(cutoff + 1, lam))


def thermal_tail(nbar: float, cutoff: int) -> float:
    """Geometric weight beyond ``cutoff`` for mean ``nbar``."""
    if nbar == 0:
        return 0.0
    return float((nbar / (1.0 + nbar)) ** (cutoff + 1))


def auto_cutoff(
    alpha: complex | None = None,
    nbar: float | None = None,
    tail: float = DEFAULT_TAIL,
    minimum: int = 1,
) -> int:
    """Smallest cutoff whose truncation tail is below ``tail``.

    Exactly one of ``alpha`` (coherent) or ``nbar`` (thermal) must be given.
    """
    if (alpha is None) == (nbar is None):
        raise DomainError("give exactly one of alpha or nbar")
    if nbar is not None:
        if nbar < 0:
            raise DomainError("nbar must be non-negative")
        if nbar == 0:
            return minimum
        q = nbar / (1.0 + nbar)
        n = max(minimum, math.ceil(math.log(tail) / math.log(q)) - 1)
        while thermal_tail(nbar, n) >= tail:
            n += 1
        while n > minimum and thermal_tail(nbar, n - 1) < tail:
            n -= 1
        return n
    n = minimum
    while coherent_tail(alpha, n) >= tail:
        n += 1
    return n


def make_coherent_state(alpha: complex, cutoff: int) -> tuple[FockState, TruncationReport]:
    """Coherent state ``|alpha>`` renormalized on ``0..cutoff``."""
    cutoff = _check_cutoff(cutoff, minimum=1)
    alpha = complex(alpha)
    n = np.arange(cutoff + 1)
    amps = np.zeros(cutoff + 1, dtype=complex)
    if alpha == 0:
        amps[0] = 1.0
    else:
        # log-space keeps alpha**n / sqrt(n!) finite for large cutoffs
        log_mag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * special.gammaln(n + 1)
        amps = np.exp(log_mag + 1j * n * np.angle(alpha))
        amps /= np.linalg.norm(amps)
    return FockState(amps, cutoff), TruncationReport(cutoff, coherent_tail(alpha, cutoff))


def thermal_weights(nbar: float, cutoff: int) -> np.ndarray:
    """Untruncated thermal probabilities for occupations ``0..cutoff``."""
    if nbar < 0:
        raise DomainError(f"nbar must be non-negative, got {nbar}")
    n = np.arange(cutoff + 1)
    if nbar == 0:
        return (n == 0).astype(float)
    q = nbar / (1.0 + nbar)
    return q**n / (1.0 + nbar)


def make_thermal_density(nbar: float, cutoff: int) -> tuple[FockDensity, TruncationReport]:
    """Thermal state with mean occupation ``nbar`` as a number-state ensemble.

    Weights are renormalized over ``0..cutoff``; the dropped geometric tail is
    reported.  Members with exactly zero weight (``nbar == 0``) are omitted.
    """
    cutoff = _check_cutoff(cutoff)
    raw = thermal_weights(nbar, cutoff)
    weights = raw / raw.sum()
    ensemble = tuple(
        (float(w), make_number_state(m, cutoff)) for m, w in enumerate(weights) if w > 0
    )
    return FockDensity(ensemble), TruncationReport(cutoff, thermal_tail(nbar, cutoff))


def make_mixed01(p: float, cutoff: int) -> FockDensity:
    """``(1 - p)|0><0| + p|1><1|``."""
    cutoff = _check_cutoff(cutoff, minimum=1)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    return FockDensity(
        ((1.0 - p, make_number_state(0, cutoff)), (p, make_number_state(1, cutoff)))
    )


def tensor(a: FockState, b: FockState) -> FockState:
    """Tensor product; modes of ``a`` come first in the index order."""
    if a.cutoff != b.cutoff:
        raise DomainError(f"cutoff mismatch: {a.cutoff} vs {b.cutoff}")
    return FockState(np.kron(a.amplitudes, b.amplitudes), a.cutoff, a.modes + b.modes)


def tensor_all(states: Iterable[FockState]) -> FockState:
    states = list(states)
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def norm_sq(s: FockState) -> float:
    return float(np.vdot(s.amplitudes, s.amplitudes).real)


def weighted_norm_sq(d: FockDensity) -> float:
    return float(sum(w * norm_sq(s) for w, s in d.ensemble))


def top_population(state: State, headroom: int = 0) -> float:
    """Largest population found in the top ``headroom + 1`` levels of any mode."""
    pops = state.populations()
    worst = 0.0
    for axis in range(pops.ndim):
        top = np.take(pops, range(pops.shape[axis] - 1 - headroom, pops.shape[axis]), axis=axis)
        worst = max(worst, float(top.sum()))
    return worst


def support_top(state: State, threshold: float = SUPPORT_THRESHOLD) -> int:
    """Highest single-mode occupation whose population exceeds ``threshold``."""
    pops = state.populations()
    if pops.ndim != 1:
        raise DomainError("support_top is defined for single-mode states")
    total = pops.sum()
    occupied = np.nonzero(pops > threshold * total)[0]
    return int(occupied[-1]) if occupied.size else 0


def require_headroom(state: State, levels: int, what: str) -> None:
    """Raise :class:`TruncationError` if the support reaches within ``levels`` of the cutoff."""
    top = support_top(state)
    if top + levels > state.cutoff:
        raise TruncationError(
            f"{what}: support reaches |{top}> but needs {levels} free levels "
            f"below cutoff {state.cutoff}"
        )


# --- JSON ------------------------------------------------------------------


def state_to_dict(s: FockState) -> dict:
    return {
        "modes": s.modes,
        "cutoff": s.cutoff,
        "amplitudes": [[float(a.real), float(a.imag)] for a in s.amplitudes],
    }


def state_from_dict(d: dict) -> FockState:
    amps = np.array([complex(re, im) for re, im in d["amplitudes"]])
    return FockState(amps, int(d["cutoff"]), int(d["modes"]))


def density_to_dict(d: FockDensity) -> dict:
    return {"ensemble": [{"weight": w, "state": state_to_dict(s)} for w, s in d.ensemble]}


def density_from_dict(d: dict) -> FockDensity:
    return FockDensity(
        tuple((float(m["weight"]), state_from_dict(m["state"])) for m in d["ensemble"])
    )


def dumps(state: State) -> str:
    if isinstance(state, FockDensity):
        return json.dumps(density_to_dict(state))
    return json.dumps(state_to_dict(state))


def loads(text: str) -> State:
    d = json.loads(text)
    if "ensemble" in d:
        return density_from_dict(d)
    return state_from_dict(d)
