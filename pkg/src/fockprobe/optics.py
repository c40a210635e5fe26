"""Lossless beam splitters on multimode Fock states and quantum-scissors preparation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegeneratePostSelectionError, DomainError, TruncationError
from .fock import (
    FockDensity,
    FockState,
    auto_cutoff,
    make_basis_state,
    make_mixed01,
    thermal_weights,
)
from .ladder import BOSONIC, FERMIONIC, indistinguishability

#: Which mode's substitution rule carries the minus sign.
#:
#: ``"second"``: ``i+ -> t i+ + r j+`` and ``j+ -> t j+ - r i+``.
#: ``"first"``:  ``i+ -> t i+ - r j+`` and ``j+ -> t j+ + r i+``.
SIGN_CONVENTIONS = ("second", "first")


@dataclass(frozen=True)
class BeamSplitter:
    """Two-mode beam splitter acting on creation operators of modes ``i`` and ``j``.

    With ``minus_on="second"`` the rules are ``a+ -> t a+ + r b+`` and
    ``b+ -> t b+ - r a+`` for ``(i, j) = (a, b)``; ``minus_on="first"`` moves
    the minus sign to the rule for mode ``i``.
    """

    t: float
    r: float
    i: int = 0
    j: int = 1
    minus_on: str = "second"

    def __post_init__(self):
        if abs(self.t**2 + self.r**2 - 1.0) > 1e-12:
            raise DomainError(f"t^2 + r^2 = {self.t**2 + self.r**2}, expected 1")
        if self.i == self.j:
            raise DomainError("beam splitter needs two distinct modes")
        if self.minus_on not in SIGN_CONVENTIONS:
            raise DomainError(f"minus_on must be one of {SIGN_CONVENTIONS}")

    @classmethod
    def from_transmissivity(cls, t2: float, i: int = 0, j: int = 1, minus_on: str = "second"):
        """Beam splitter with intensity transmissivity ``t2 = t**2``."""
        if not 0.0 <= t2 <= 1.0:
            raise DomainError(f"t^2 must lie in [0, 1], got {t2}")
        return cls(math.sqrt(t2), math.sqrt(1.0 - t2), i, j, minus_on)

    @classmethod
    def balanced(cls, i: int = 0, j: int = 1, minus_on: str = "second"):
        h = math.sqrt(0.5)
        return cls(h, h, i, j, minus_on)

    @property
    def cross(self) -> tuple[float, float]:
        """Coefficients ``(j+ in the rule for i+, i+ in the rule for j+)``."""
        if self.minus_on == "second":
            return self.r, -self.r
        return -self.r, self.r

    def inverse(self) -> "BeamSplitter":
        return BeamSplitter(self.t, -self.r, self.i, self.j, self.minus_on)

    def mode_matrix(self) -> np.ndarray:
        """Row ``k`` gives the image of the ``k``-th creation operator in the ``(i, j)`` basis."""
        ri, rj = self.cross
        return np.array([[self.t, ri], [rj, self.t]])


@lru_cache(maxsize=1024)
def _block(total: int, t: float, ri: float, rj: float) -> np.ndarray:
    """Transfer matrix on the block with ``total`` photons in the two modes.

    Column ``m`` is the image of ``|m, total - m>``, row ``p`` the amplitude on
    ``|p, total - p>``.  Creation operators are substituted one at a time,
    ``|m, n> = i+ |m - 1, n> / sqrt(m)`` and ``|0, n> = j+ |0, n - 1> / sqrt(n)``,
    so the image of each block follows from the block below and every
    coefficient stays bounded by one.
    """
    if total == 0:
        return np.ones((1, 1))
    below = _block(total - 1, t, ri, rj)
    out = np.empty((total + 1, total + 1))
    out[:, 0] = _apply_creation(below[:, 0], rj, t) / math.sqrt(total)
    m = np.arange(1, total + 1)
    out[:, 1:] = _apply_creation(below, t, ri) / np.sqrt(m)
    return out


def _apply_creation(v: np.ndarray, ci: float, cj: float) -> np.ndarray:
    """Apply ``ci * i+ + cj * j+`` to block vectors (columns) indexed by the ``i`` occupation."""
    total = v.shape[0] - 1
    p = np.arange(total + 1).reshape((-1,) + (1,) * (v.ndim - 1))
    out = np.zeros((total + 2,) + v.shape[1:])
    out[1:] += ci * np.sqrt(p + 1) * v  # i+ |p, q> = sqrt(p + 1) |p + 1, q>
    out[:-1] += cj * np.sqrt(total - p + 1) * v  # j+ |p, q> = sqrt(q + 1) |p, q + 1>
    return out


def apply_beam_splitter(state: FockState, bs: BeamSplitter) -> FockState:
    """Unitary action of ``bs`` on ``state``.

    Every basis component is re-expanded under the creation-operator
    substitution rules; photon number in the two target modes is conserved.

    Raises
    ------
    TruncationError
        If a populated component has more photons in the two target modes
        than the cutoff can hold.
    """
    if not (0 <= bs.i < state.modes and 0 <= bs.j < state.modes):
        raise DomainError(f"modes ({bs.i}, {bs.j}) outside a {state.modes}-mode state")
    cutoff = state.cutoff
    psi = np.moveaxis(state.tensor_view(), (bs.i, bs.j), (-2, -1))
    rest = psi.shape[:-2]
    psi = psi.reshape(-1, cutoff + 1, cutoff + 1)
    m, n = np.meshgrid(np.arange(cutoff + 1), np.arange(cutoff + 1), indexing="ij")
    totals = m + n
    occupied = np.any(psi != 0, axis=0)
    if np.any(occupied & (totals > cutoff)):
        raise TruncationError(
            f"a component holds {int(totals[occupied].max())} photons in modes "
            f"({bs.i}, {bs.j}), more than cutoff {cutoff}"
        )
    out = np.zeros_like(psi)
    ri, rj = bs.cross
    for total in np.unique(totals[occupied]):
        ms = np.arange(total + 1)
        ns = total - ms
        block = _block(int(total), bs.t, ri, rj)
        out[:, ms, ns] = psi[:, ms, ns] @ block.T
    out = out.reshape(rest + (cutoff + 1, cutoff + 1))
    out = np.ascontiguousarray(np.moveaxis(out, (-2, -1), (bs.i, bs.j)))
    return FockState._adopt(out, cutoff, state.modes)


# --- quantum scissors -----------------------------------------------------------


@dataclass(frozen=True)
class ScissorsResult:
    rho_out: FockDensity
    p: float
    success_probability: float
    p_closed_form: float
    cutoff: int

    @property
    def discrepancy(self) -> float:
        return abs(self.p - self.p_closed_form)


def scissors_p_closed_form(nbar: float, t2: float) -> float:
    """Population of ``|1>`` after scissors post-selection on a thermal input."""
    q = nbar / (1.0 + nbar)
    den = (1.0 - t2) + q * t2
    if den == 0.0:
        raise DegeneratePostSelectionError("closed form undefined: zero denominator")
    return q * t2 / den


def quantum_scissors(
    nbar: float,
    t: float,
    cutoff: int | None = None,
    tail: float = 1e-10,
    tolerance: float = 1e-9,
) -> ScissorsResult:
    """Quantum-scissors output for ``|1>_a |0>_b rho_th^c``.

    Each thermal component ``|1, 0, n>`` passes ``B_ab`` (amplitude
    transmissivity ``t``, minus sign on the ``b`` rule) and then a balanced
    ``B_bc`` (minus sign on the ``b`` rule), is projected on ``<1|_b <0|_c``,
    and the unnormalized mode-``a`` remainders are mixed with the thermal
    weights.

    The per-mode cutoff defaults to the thermal cutoff for ``tail`` plus 2.
    If the simulated ``p`` misses the closed form by more than
    ``tolerance`` the cutoff is doubled, up to three times, before a
    :class:`TruncationError` is raised.
    """
    if nbar < 0:
        raise DomainError("nbar must be non-negative")
    if not 0.0 < t < 1.0:
        raise DomainError(f"t must lie in (0, 1), got {t}")
    if cutoff is None:
        cutoff = auto_cutoff(nbar=nbar, tail=tail) + 2
    closed = scissors_p_closed_form(nbar, t * t)
    for _ in range(4):
        result = _scissors_at(nbar, t, cutoff, closed)
        if result.discrepancy <= tolerance:
            return result
        cutoff *= 2
    raise TruncationError(
        f"scissors p differs from closed form by {result.discrepancy:.3g} at cutoff {cutoff // 2}"
    )


def _scissors_at(nbar: float, t: float, cutoff: int, closed: float) -> ScissorsResult:
    bs_ab = BeamSplitter(t, math.sqrt(1.0 - t * t), 0, 1, minus_on="second")
    bs_bc = BeamSplitter.balanced(1, 2, minus_on="first")
    thermal_cut = cutoff - 2
    raw = thermal_weights(nbar, thermal_cut)
    weights = raw / raw.sum()
    branches = []
    for n, w in enumerate(weights):
        if w == 0.0:
            continue
        psi = make_basis_state((1, 0, n), cutoff)
        psi = apply_beam_splitter(apply_beam_splitter(psi, bs_ab), bs_bc)
        remainder = psi.tensor_view()[:, 1, 0]
        norm = float(np.vdot(remainder, remainder).real)
        if norm > 0.0:
            branches.append((w * norm, remainder / math.sqrt(norm)))
    success = sum(b[0] for b in branches)
    if success == 0.0:
        raise DegeneratePostSelectionError("post-selection never succeeds")
    rho = FockDensity(tuple((pw / success, FockState(v, cutoff)) for pw, v in branches))
    pops = rho.populations()
    return ScissorsResult(rho, float(pops[1]), float(success), closed, cutoff)


def mixed_state_inequality_values(p: float, cutoff: int = 3) -> tuple[float, float]:
    """Bosonic and fermionic ``I_d`` of ``(1 - p)|0><0| + p|1><1|``."""
    rho = make_mixed01(p, cutoff)
    return indistinguishability(rho, BOSONIC), indistinguishability(rho, FERMIONIC)


def hong_ou_mandel(cutoff: int = 2) -> FockState:
    """``|1, 1>`` after a balanced beam splitter."""
    return apply_beam_splitter(make_basis_state((1, 1), cutoff), BeamSplitter.balanced())


def fidelity(a: FockState, b: FockState) -> float:
    """``|<a|b>|^2`` for normalized states."""
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)

