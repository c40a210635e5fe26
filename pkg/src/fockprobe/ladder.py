"""Generalized subtraction/addition operators and the indistinguishability measure.

A coefficient profile ``k_n`` defines the subtraction operator
``c = sum_{n>=1} k_n |n-1><n|`` and its adjoint, the addition operator.
Three canonical families exist: classical (``|k_n|^2 = 1``), bosonic
(``|k_n|^2 = n``, the photon annihilation operator) and fermionic
(``|k_1| = 1``, ``k_n = 0`` beyond).  The expectation of the
addition-then-subtraction product ``c c^dagger`` is the degree of
indistinguishability ``I_d``.

On a space truncated at ``N`` the addition operator annihilates ``|N>``, so
``c c^dagger`` carries a spurious zero at the top of the diagonal and the
commutator a spurious ``-|k_N|^2``.  Identities are therefore asserted on
the interior block and moment routines refuse states whose support reaches
the top of the space.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, TruncationError
from .fock import (
    SUPPORT_THRESHOLD,
    FockDensity,
    FockState,
    State,
    require_headroom,
)


class ProfileKind(enum.Enum):
    CLASSICAL = "classical"
    BOSONIC = "bosonic"
    FERMIONIC = "fermionic"
    CUSTOM = "custom"


@dataclass(frozen=True)
class CoefficientProfile:
    """Coefficients ``k_n`` (``n >= 1``) of a generalized ladder operator.

    For ``CUSTOM`` profiles ``custom`` holds ``k_1, k_2, ...``; coefficients
    past the end of the list are zero.
    """

    kind: ProfileKind
    custom: tuple[complex, ...] = ()

    def __post_init__(self):
        if self.kind is ProfileKind.CUSTOM:
            object.__setattr__(self, "custom", tuple(complex(k) for k in self.custom))
        elif self.custom:
            raise DomainError("explicit coefficients are only allowed for custom profiles")

    @classmethod
    def classical(cls) -> "CoefficientProfile":
        return cls(ProfileKind.CLASSICAL)

    @classmethod
    def bosonic(cls) -> "CoefficientProfile":
        return cls(ProfileKind.BOSONIC)

    @classmethod
    def fermionic(cls) -> "CoefficientProfile":
        return cls(ProfileKind.FERMIONIC)

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> "CoefficientProfile":
        """Custom profile with real ``k_n = sqrt(|k_n|^2)`` from a list of ``|k_n|^2``."""
        if any(w < 0 for w in weights):
            raise DomainError("|k_n|^2 values must be non-negative")
        return cls(ProfileKind.CUSTOM, tuple(math.sqrt(w) for w in weights))

    @classmethod
    def parse(cls, name: str) -> "CoefficientProfile":
        """Profile from a name, or ``custom:w1,w2,...`` with ``|k_n|^2`` values."""
        if name.startswith("custom:"):
            return cls.from_weights([float(x) for x in name[len("custom:"):].split(",") if x])
        try:
            kind = ProfileKind(name)
        except ValueError:
            raise DomainError(f"unknown profile {name!r}") from None
        if kind is ProfileKind.CUSTOM:
            raise DomainError("custom profiles need weights: custom:w1,w2,...")
        return cls(kind)

    def coefficient(self, n: int) -> complex:
        """``k_n``; ``k_0`` is zero by definition."""
        if n < 1:
            return 0j
        if self.kind is ProfileKind.CLASSICAL:
            return 1 + 0j
        if self.kind is ProfileKind.BOSONIC:
            return complex(math.sqrt(n))
        if self.kind is ProfileKind.FERMIONIC:
            return 1 + 0j if n == 1 else 0j
        return self.custom[n - 1] if n <= len(self.custom) else 0j

    def coefficients(self, cutoff: int) -> np.ndarray:
        """``k_1 .. k_cutoff``."""
        return np.array([self.coefficient(n) for n in range(1, cutoff + 1)], dtype=complex)

    def weights(self, cutoff: int) -> np.ndarray:
        """``|k_1|^2 .. |k_cutoff|^2``, exact for the built-in profiles."""
        n = np.arange(1, cutoff + 1, dtype=float)
        if self.kind is ProfileKind.BOSONIC:
            return n
        if self.kind is ProfileKind.CLASSICAL:
            return np.ones(cutoff)
        if self.kind is ProfileKind.FERMIONIC:
            return (n == 1).astype(float)
        return np.abs(self.coefficients(cutoff)) ** 2

    def __str__(self) -> str:
        if self.kind is ProfileKind.CUSTOM:
            return "custom:" + ",".join(format(abs(k) ** 2, ".15g") for k in self.custom)
        return self.kind.value


BOSONIC = CoefficientProfile.bosonic()
CLASSICAL = CoefficientProfile.classical()
FERMIONIC = CoefficientProfile.fermionic()


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense single-mode operator on occupations ``0..cutoff``."""

    entries: np.ndarray
    cutoff: int

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape != (self.cutoff + 1, self.cutoff + 1):
            raise DomainError(f"matrix shape {m.shape} does not match cutoff {self.cutoff}")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.entries @ other.entries, self.cutoff)

    @property
    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.cutoff)

    def interior(self, margin: int = 2) -> np.ndarray:
        """Leading block ``0..cutoff - margin`` unaffected by the truncation edge."""
        k = self.cutoff - margin + 1
        return self.entries[:k, :k]

    def to_json(self) -> str:
        return json.dumps(
            {
                "cutoff": self.cutoff,
                "entries": [[[z.real, z.imag] for z in row] for row in self.entries.tolist()],
            }
        )


def _check(cutoff: int) -> None:
    if cutoff < 1:
        raise DomainError("operators need cutoff >= 1")


def build_subtraction(profile: CoefficientProfile, cutoff: int) -> OperatorMatrix:
    """Matrix of ``c_k``: entry ``(n - 1, n)`` is ``k_n``."""
    _check(cutoff)
    return OperatorMatrix(np.diag(profile.coefficients(cutoff), k=1), cutoff)


def build_addition(profile: CoefficientProfile, cutoff: int) -> OperatorMatrix:
    """Matrix of ``c_k^dagger``, the conjugate transpose of the subtraction operator."""
    return build_subtraction(profile, cutoff).dag


def add_then_subtract_matrix(profile: CoefficientProfile, cutoff: int) -> OperatorMatrix:
    """``c c^dagger = diag(|k_1|^2, ..., |k_N|^2, 0)``; the final zero is the truncation edge."""
    _check(cutoff)
    diag = np.append(profile.weights(cutoff), 0.0)
    return OperatorMatrix(np.diag(diag).astype(complex), cutoff)


def subtract_then_add_matrix(profile: CoefficientProfile, cutoff: int) -> OperatorMatrix:
    """``c^dagger c = diag(0, |k_1|^2, ..., |k_N|^2)``."""
    _check(cutoff)
    diag = np.insert(profile.weights(cutoff), 0, 0.0)
    return OperatorMatrix(np.diag(diag).astype(complex), cutoff)


def commutator(profile: CoefficientProfile, cutoff: int) -> OperatorMatrix:
    """``[c, c^dagger]`` on the truncated space, top edge included.

    Diagonal entry ``n - 1`` equals ``|k_n|^2 - |k_{n-1}|^2``; the entry at
    ``cutoff`` is the truncation artifact reported by :func:`edge_anomaly`.
    """
    a = add_then_subtract_matrix(profile, cutoff).entries
    b = subtract_then_add_matrix(profile, cutoff).entries
    return OperatorMatrix(a - b, cutoff)


def anticommutator(profile: CoefficientProfile, cutoff: int) -> OperatorMatrix:
    a = add_then_subtract_matrix(profile, cutoff).entries
    b = subtract_then_add_matrix(profile, cutoff).entries
    return OperatorMatrix(a + b, cutoff)


def edge_anomaly(profile: CoefficientProfile, cutoff: int) -> float:
    """Difference between the truncated and infinite-space commutator at ``|cutoff>``."""
    truncated = commutator(profile, cutoff).entries[cutoff, cutoff].real
    k_next = abs(profile.coefficient(cutoff + 1)) ** 2
    k_here = abs(profile.coefficient(cutoff)) ** 2
    return float(truncated - (k_next - k_here))


# --- expectation values -------------------------------------------------------


def _members(state: State) -> list[tuple[float, FockState]]:
    if isinstance(state, FockDensity):
        members = list(state.ensemble)
    else:
        members = [(1.0, state)]
    if members[0][1].modes != 1:
        raise DomainError("ladder expectations are defined for single-mode states")
    return members


def _ensemble_expectation(state: State, fn) -> float:
    """``Tr[rho X] / Tr[rho]`` given ``fn(amplitudes) = <psi|X|psi>``."""
    num = den = 0.0
    for w, s in _members(state):
        num += w * fn(s.amplitudes)
        den += w * float(np.vdot(s.amplitudes, s.amplitudes).real)
    if den == 0.0:
        raise DomainError("zero-norm state")
    return num / den


def indistinguishability(state: State, profile: CoefficientProfile) -> float:
    """Degree of indistinguishability ``<psi| c c^dagger |psi> / <psi|psi>``.

    Densities give the ensemble average ``Tr[rho c c^dagger] / Tr[rho]``.

    Raises
    ------
    TruncationError
        If the profile has a nonzero coefficient just above the cutoff and
        the state populates the top level (amplitude above ``1e-8``).  There
        the truncated operator differs from the infinite-space one.
    """
    members = _members(state)
    cutoff = members[0][1].cutoff
    if abs(profile.coefficient(cutoff + 1)) > 0:
        top = sum(w * abs(s.amplitudes[cutoff]) ** 2 for w, s in members)
        total = sum(w * float(np.vdot(s.amplitudes, s.amplitudes).real) for w, s in members)
        if top > SUPPORT_THRESHOLD * total:
            raise TruncationError(
                f"state populates |{cutoff}> (population {top:.3g}); raise the cutoff"
            )
    diag = np.diag(add_then_subtract_matrix(profile, cutoff).entries).real
    return _ensemble_expectation(state, lambda a: float(diag @ np.abs(a) ** 2))


def higher_moment(state: State, order: int) -> float:
    """Antinormally ordered moment ``<a^n a^dagger^n>`` of a bosonic state.

    Computed as the squared norm of ``a^dagger^n |psi>`` by repeated
    application of the bosonic addition matrix on a space enlarged by
    ``order`` levels.  The state's support plus ``order`` must stay at
    least three levels below its cutoff.
    """
    if order < 0:
        raise DomainError("order must be non-negative")
    members = _members(state)
    cutoff = members[0][1].cutoff
    require_headroom(state, order + 3, f"moment of order {order}")
    big = cutoff + order
    create = build_addition(BOSONIC, big).entries

    def moment(amps):
        v = np.zeros(big + 1, dtype=complex)
        v[: cutoff + 1] = amps
        for _ in range(order):
            v = create @ v
        return float(np.vdot(v, v).real)

    return _ensemble_expectation(state, moment)


def laguerre(n: int, x: float) -> float:
    """Laguerre polynomial ``L_n(x)`` by the three-term recurrence."""
    if n < 0:
        raise DomainError("Laguerre degree must be non-negative")
    prev, cur = 1.0, 1.0 - x
    if n == 0:
        return prev
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur


def laguerre_moment_coherent(alpha: complex, n: int) -> float:
    """``<a^n a^dagger^n>`` for a coherent state: ``n! L_n(-|alpha|^2)``."""
    return math.factorial(n) * laguerre(n, -abs(alpha) ** 2)


def power_moment_thermal(nbar: float, n: int) -> float:
    """``<a^n a^dagger^n>`` for a thermal state: ``n! (1 + nbar)^n``."""
    if n < 0:
        raise DomainError("order must be non-negative")
    return math.factorial(n) * (1.0 + nbar) ** n


# --- Husimi Q quadrature ------------------------------------------------------


@dataclass(frozen=True)
class QMomentResult:
    value: float
    radius: float
    boundary_tail: float
    tolerance: float

    @property
    def tail_warning(self) -> bool:
        return self.boundary_tail > self.tolerance


def _coherent_overlap_coefficients(r: np.ndarray, cutoff: int) -> np.ndarray:
    """``|<alpha|n>| = exp(-r^2/2) r^n / sqrt(n!)`` for ``|alpha| = r``; shape ``r.shape + (cutoff+1,)``."""
    r = np.asarray(r, dtype=float)[..., None]
    n = np.arange(cutoff + 1)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    with np.errstate(divide="ignore"):
        log_r = np.log(r)
    expo = np.where(n == 0, 0.0, n * log_r)
    return np.exp(-0.5 * r * r + expo - 0.5 * log_fact)


def husimi_q(state: State, alpha: complex) -> float:
    """``Q(alpha) = <alpha|rho|alpha> / pi`` at one phase-space point."""
    members = _members(state)
    cutoff = members[0][1].cutoff
    n = np.arange(cutoff + 1)
    bra = _coherent_overlap_coefficients(abs(alpha), cutoff) * np.exp(-1j * n * np.angle(alpha))
    num = sum(w * abs(bra @ s.amplitudes) ** 2 for w, s in members)
    den = sum(w * float(np.vdot(s.amplitudes, s.amplitudes).real) for w, s in members)
    return float(num / (np.pi * den))


def _radial_q(state: State, radii: np.ndarray, n_angle: int) -> np.ndarray:
    """Integral of Q over the angle on each circle ``|alpha| = r``.

    For fixed ``r`` the overlap ``<alpha|psi>`` is a trigonometric polynomial
    in the angle, so its samples on a uniform grid (periodic trapezoid) come
    from one FFT of the coefficients folded modulo ``n_angle``.  Each shell is
    summed independently in a fixed order.
    """
    members = _members(state)
    cutoff = members[0][1].cutoff
    coef = _coherent_overlap_coefficients(radii, cutoff)
    fold = np.arange(cutoff + 1) % n_angle
    den = sum(w * float(np.vdot(s.amplitudes, s.amplitudes).real) for w, s in members)
    acc = np.zeros(radii.size)
    for w, s in members:
        nz = np.flatnonzero(s.amplitudes)
        if nz.size == 1:
            # number state: |<alpha|n>|^2 has no angular dependence
            acc += w * abs(s.amplitudes[nz[0]]) ** 2 * coef[:, nz[0]] ** 2
            continue
        if cutoff < n_angle:
            series = coef * s.amplitudes
        else:
            series = np.zeros((radii.size, n_angle), dtype=complex)
            np.add.at(series.T, fold, (coef * s.amplitudes).T)
        acc += w * np.mean(np.abs(np.fft.fft(series, n=n_angle, axis=-1)) ** 2, axis=-1)
    # circle mean times 2 pi, over pi from the Q normalization
    return 2.0 * acc / den


def q_function_moment(
    state: State,
    order: int,
    n_radial: int = 256,
    n_angle: int = 512,
    radius: float | None = None,
    tolerance: float = 1e-10,
) -> QMomentResult:
    """``<a^n a^dagger^n>`` as the phase-space integral of ``Q(alpha) |alpha|^(2n)``.

    Uses a fixed polar grid: midpoint rule in radius on ``[0, radius]`` and a
    periodic trapezoid in angle.  Without an explicit ``radius`` the disc
    starts at ``max(4, |alpha| + 5)``, with ``|alpha|`` the root mean
    occupation, and grows in steps of 2 until the radial integrand at the
    rim falls below ``tolerance`` relative to the integral.  An explicit
    ``radius`` is used as given; ``tail_warning`` flags an insufficient one.
    """
    if order < 0:
        raise DomainError("order must be non-negative")
    grow = radius is None
    if radius is None:
        radius = max(4.0, math.sqrt(state.mean_occupation()) + 5.0)
    while True:
        h = radius / n_radial
        r = (np.arange(n_radial) + 0.5) * h
        integrand = _radial_q(state, r, n_angle) * r ** (2 * order + 1)
        value = float(np.sum(integrand) * h)
        rim = float(_radial_q(state, np.array([radius]), n_angle)[0]) * radius ** (2 * order + 1)
        tail = rim / value if value > 0 else math.inf
        if not grow or tail <= tolerance or radius >= 200.0:
            return QMomentResult(value, radius, tail, tolerance)
        radius += 2.0
