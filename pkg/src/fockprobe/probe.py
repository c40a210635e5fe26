"""Indirect measurement of ``<a a^dagger>`` with a two-level probe.

Two protocols are simulated, each with an exact-probability path and a
Monte Carlo count-sampling path:

* NDPA: the signal enters one mode of a weakly pumped nondegenerate
  parametric amplifier with the idler in vacuum; an on-off detector on the
  idler clicks with probability ``eta * P(idler >= 1)``, and
  ``N(1) / (eta s^2 N(0))`` estimates ``<a a^dagger>``.
* Jaynes-Cummings: an excited two-level atom crosses the cavity; the
  ground/excited counts give ``N_g / ((g tau)^2 N_e)``.

Sampling is counter based: the uniforms of trial ``i`` depend only on the
seed and ``i``, so chunks can be drawn in any order or in parallel and
the tallies are integer sums.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateStatisticsError, DomainError, TruncationError
from .fock import SUPPORT_THRESHOLD, FockDensity, FockState, State, require_headroom
from .ladder import BOSONIC, build_subtraction, indistinguishability

CHUNK = 1 << 20
THREADS_ENV = "FOCKPROBE_THREADS"


def max_workers() -> int:
    """Worker cap from ``FOCKPROBE_THREADS`` (default: CPU count)."""
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {value!r}") from None
    return os.cpu_count() or 1


def counter_uniforms(seed: int, start: int, count: int, per_trial: int = 1) -> np.ndarray:
    """Uniforms on ``[0, 1)`` for trials ``start .. start + count - 1``.

    Row ``i`` holds ``per_trial`` values that are a pure function of
    ``(seed, start + i, per_trial)``: trial ``i`` lives in Philox block
    ``i // CHUNK`` (selected through the top counter word) at a fixed
    offset inside it.
    """
    if count == 0:
        return np.empty((0, per_trial))
    key = int(seed) & ((1 << 64) - 1)
    out = np.empty((count, per_trial))
    done = 0
    while done < count:
        trial = start + done
        chunk, offset = divmod(trial, CHUNK)
        take = min(count - done, CHUNK - offset)
        gen = np.random.Philox(key=key, counter=[0, 0, 0, chunk])
        raw = gen.random_raw((offset + take) * per_trial)[offset * per_trial :]
        out[done : done + take] = ((raw >> np.uint64(11)) * 2.0**-53).reshape(take, per_trial)
        done += take
    return out


def _chunked_tally(seed: int, trials: int, per_trial: int, tally) -> np.ndarray:
    """Sum ``tally(uniforms)`` (an integer vector) over all trials, chunk by chunk."""
    bounds = [(i, min(CHUNK, trials - i)) for i in range(0, trials, CHUNK)]

    def run(b):
        return tally(counter_uniforms(seed, b[0], b[1], per_trial))

    workers = min(max_workers(), len(bounds))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]
    return np.sum(parts, axis=0, dtype=np.int64)


class NdpaMode(enum.Enum):
    FIRST_ORDER = "first-order"
    EXACT = "exact"


class JcMode(enum.Enum):
    LINEARIZED = "linearized"
    EXACT = "exact"


@dataclass(frozen=True)
class NdpaConfig:
    s: float
    eta: float = 1.0
    trials: int = 100_000
    seed: int = 0
    mode: NdpaMode = NdpaMode.FIRST_ORDER

    def __post_init__(self):
        if not self.s > 0:
            raise DomainError("coupling s must be positive")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError("eta must lie in [0, 1]")
        if self.trials < 1:
            raise DomainError("trials must be positive")


@dataclass(frozen=True)
class JcConfig:
    """Resonant atom-cavity probe; ``efficiency`` is shared by both atom detectors."""

    g: float
    tau: float
    trials: int = 100_000
    seed: int = 0
    mode: JcMode = JcMode.LINEARIZED
    efficiency: float = 1.0

    def __post_init__(self):
        if not self.g * self.tau > 0:
            raise DomainError("g * tau must be positive")
        if self.trials < 1:
            raise DomainError("trials must be positive")
        if not 0.0 < self.efficiency <= 1.0:
            raise DomainError("efficiency must lie in (0, 1]")

    @property
    def gt(self) -> float:
        return self.g * self.tau


@dataclass(frozen=True)
class CountRecord:
    """Outcome tallies of a sampled protocol run and the derived estimator.

    ``n0``/``n1`` are ``N_b(0)``/``N_b(1)`` for the NDPA and ``N_e``/``N_g``
    for the atom probe.  ``estimator_expectation`` is the infinite-trial
    value of the estimator from the exact-probability path, so ``bias``
    separates approximation error from sampling noise.
    """

    protocol: str
    n0: int
    n1: int
    trials: int
    estimator: float
    standard_error: float
    exact_expectation: float
    estimator_expectation: float
    estimator_literal: float | None = None
    literal_expectation: float | None = None
    undetected: int = 0

    @property
    def bias(self) -> float:
        return self.estimator_expectation - self.exact_expectation

    @property
    def relative_error(self) -> float:
        if self.estimator == 0.0:
            return math.inf
        return self.standard_error / self.estimator

    def z_score(self, target: float | None = None) -> float:
        """Distance of the estimate from ``target`` in standard errors."""
        target = self.exact_expectation if target is None else target
        if self.standard_error == 0.0:
            return 0.0 if self.estimator == target else math.inf
        return abs(self.estimator - target) / self.standard_error


def _members(state: State) -> list[tuple[float, FockState]]:
    if isinstance(state, FockDensity):
        members = list(state.ensemble)
    else:
        members = [(1.0, state)]
    if members[0][1].modes != 1:
        raise DomainError("probe protocols act on single-mode states")
    mass = [w * float(np.vdot(s.amplitudes, s.amplitudes).real) for w, s in members]
    total = sum(mass)
    # members below the support threshold cannot affect any reported digit
    return [
        (m / total, s.normalized())
        for m, (_, s) in zip(mass, members)
        if m > SUPPORT_THRESHOLD * total
    ]


def _binomial_ratio_se(k: int, n: int, scale: float) -> float:
    """Delta-method standard error of ``k / (scale * (n - k))``."""
    p = k / n
    return math.sqrt(p * (1.0 - p) / n) / (scale * (1.0 - p) ** 2)


# --- NDPA -------------------------------------------------------------------


@dataclass(frozen=True)
class NdpaProbabilities:
    """Idler statistics: ``p0 = P(0)``, ``p1 = P(>=1)``, ``multi_photon = P(>=2)``."""

    p0: float
    p1: float
    multi_photon: float = 0.0
    idler_cutoff: int = 1


def _propagate(generator: np.ndarray, psi: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """``exp(generator) psi`` by Taylor series on ``2**k`` sub-steps.

    ``k`` is increased from a norm-based start until two successive results
    differ by less than ``tol``.
    """
    norm = np.linalg.norm(generator, 1)
    k = max(0, math.ceil(math.log2(norm))) if norm > 1 else 0

    def run(steps):
        g = generator / steps
        v = psi.copy()
        for _ in range(steps):
            term = v
            acc = v.copy()
            for j in range(1, 200):
                term = g @ term / j
                acc += term
                if np.linalg.norm(term) < 1e-17 * np.linalg.norm(acc):
                    break
            v = acc
        return v

    prev = run(2**k)
    while True:
        k += 1
        cur = run(2**k)
        if np.linalg.norm(cur - prev) < tol or k > 20:
            return cur
        prev = cur


def _ndpa_exact(state: FockState, s: float) -> np.ndarray:
    """Idler photon-number distribution after the two-mode squeezing map."""
    require_headroom(state, 0, "NDPA input")
    nb = 4
    while nb <= 64:
        na = state.cutoff + nb
        a = build_subtraction(BOSONIC, na).entries
        b = build_subtraction(BOSONIC, nb).entries
        ab = np.kron(a, b)
        generator = s * (ab - ab.conj().T)  # -s a+ b+ + s a b
        psi = np.zeros((na + 1, nb + 1), dtype=complex)
        psi[: state.cutoff + 1, 0] = state.amplitudes
        out = _propagate(generator, psi.reshape(-1)).reshape(na + 1, nb + 1)
        idler = np.sum(np.abs(out) ** 2, axis=0)
        if idler[-1] <= SUPPORT_THRESHOLD * idler.sum():
            return idler / idler.sum()
        nb *= 2
    raise TruncationError(f"idler population does not decay below cutoff {nb // 2}; s={s} too large")


def ndpa_probabilities(state: State, cfg: NdpaConfig) -> NdpaProbabilities:
    """Idler click statistics for ``state`` in the signal mode.

    ``FIRST_ORDER`` keeps the linear term of the squeezing map, leaving
    only the outcomes 0 and 1 with ``P1 = s^2 E / (1 + s^2 E)`` and
    ``E = <a a^dagger>``.  ``EXACT`` propagates the full map on a truncated
    two-mode space and also reports the multi-photon residue.
    """
    if cfg.mode is NdpaMode.FIRST_ORDER:
        e = indistinguishability(state, BOSONIC)
        x = cfg.s**2 * e
        return NdpaProbabilities(1.0 / (1.0 + x), x / (1.0 + x))
    p0 = p1 = multi = 0.0
    width = 1
    for w, s in _members(state):
        idler = _ndpa_exact(s, cfg.s)
        width = max(width, idler.size - 1)
        p0 += w * idler[0]
        p1 += w * idler[1:].sum()
        multi += w * idler[2:].sum()
    return NdpaProbabilities(float(p0), float(p1), float(multi), width)


def ndpa_sample(state: State, cfg: NdpaConfig) -> CountRecord:
    """Sample ``cfg.trials`` on-off idler detections and estimate ``<a a^dagger>``.

    A click occurs with probability ``eta * P1``.  The reported estimator
    is ``N(1) / (eta s^2 N(0))``; ``estimator_literal`` carries
    ``eta N(1) / (s^2 N(0))``, which converges to ``eta^2`` times the
    target.

    Raises
    ------
    DegenerateStatisticsError
        If ``eta`` is zero or no trial is click-free.
    """
    if cfg.eta == 0.0:
        raise DegenerateStatisticsError("eta = 0: the detector never clicks")
    probs = ndpa_probabilities(state, cfg)
    p_click = cfg.eta * probs.p1
    clicks = int(
        _chunked_tally(cfg.seed, cfg.trials, 1, lambda u: np.array([np.sum(u[:, 0] < p_click)]))[0]
    )
    n0 = cfg.trials - clicks
    if n0 == 0:
        raise DegenerateStatisticsError("N_b(0) = 0")
    s2 = cfg.s**2
    return CountRecord(
        protocol="ndpa",
        n0=n0,
        n1=clicks,
        trials=cfg.trials,
        estimator=clicks / (cfg.eta * s2 * n0),
        standard_error=_binomial_ratio_se(clicks, cfg.trials, cfg.eta * s2),
        exact_expectation=indistinguishability(state, BOSONIC),
        estimator_expectation=p_click / (cfg.eta * s2 * (1.0 - p_click)),
        estimator_literal=cfg.eta * clicks / (s2 * n0),
        literal_expectation=cfg.eta * p_click / (s2 * (1.0 - p_click)),
    )


# --- Jaynes-Cummings ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AtomFieldState:
    """Joint state ``|e> (x) excited + |g> (x) ground`` on field levels ``0..cutoff``."""

    excited: np.ndarray
    ground: np.ndarray
    cutoff: int

    def norm_sq(self) -> float:
        return float(np.vdot(self.excited, self.excited).real + np.vdot(self.ground, self.ground).real)

    def branch_weights(self) -> tuple[float, float]:
        """Normalized ``(P_e, P_g)``."""
        pe = float(np.vdot(self.excited, self.excited).real)
        pg = float(np.vdot(self.ground, self.ground).real)
        return pe / (pe + pg), pg / (pe + pg)

    def normalized(self) -> "AtomFieldState":
        n = math.sqrt(self.norm_sq())
        return AtomFieldState(self.excited / n, self.ground / n, self.cutoff)

    def overlap(self, other: "AtomFieldState") -> complex:
        return complex(np.vdot(self.excited, other.excited) + np.vdot(self.ground, other.ground))


def jc_evolve(state: FockState, cfg: JcConfig) -> AtomFieldState:
    """Evolve ``|e> (x) |psi>`` under the resonant Jaynes-Cummings coupling.

    ``EXACT`` uses the dressed-state solution,
    ``c_n cos(g tau sqrt(n+1))`` on ``|e, n>`` and
    ``-i c_n sin(g tau sqrt(n+1))`` on ``|g, n+1>``.  ``LINEARIZED`` keeps the
    first-order term, ``|e>|psi> - i g tau |g> a^dagger |psi>``, and is not
    normalized.
    """
    if state.modes != 1:
        raise DomainError("jc_evolve acts on single-mode states")
    require_headroom(state, 1, "Jaynes-Cummings field")
    c = state.amplitudes
    root = np.sqrt(np.arange(1, state.cutoff + 2))  # sqrt(n + 1)
    ground = np.zeros(state.cutoff + 1, dtype=complex)
    if cfg.mode is JcMode.EXACT:
        theta = cfg.gt * root
        excited = c * np.cos(theta)
        ground[1:] = (-1j * c * np.sin(theta))[:-1]
    else:
        excited = c.copy()
        ground[1:] = (-1j * cfg.gt * root * c)[:-1]
    return AtomFieldState(excited, ground, state.cutoff)


@dataclass(frozen=True)
class JcProbabilities:
    """Atom outcome probabilities; ``efficiency`` thins both detectors alike."""

    pe: float
    pg: float
    efficiency: float = 1.0

    @property
    def detected_e(self) -> float:
        return self.efficiency * self.pe

    @property
    def detected_g(self) -> float:
        return self.efficiency * self.pg


def jc_probabilities(state: State, cfg: JcConfig) -> JcProbabilities:
    """Atom outcome probabilities.

    Branch weights are summed over the ensemble before normalizing, so a
    linearized run normalizes the output density as a whole.
    """
    pe = pg = 0.0
    for w, s in _members(state):
        out = jc_evolve(s, cfg)
        pe += w * float(np.vdot(out.excited, out.excited).real)
        pg += w * float(np.vdot(out.ground, out.ground).real)
    total = pe + pg
    return JcProbabilities(pe / total, pg / total, cfg.efficiency)


def jc_estimator_expectation(state: State, cfg: JcConfig) -> float:
    """Infinite-trial value of ``N_g / ((g tau)^2 N_e)`` including detector efficiency."""
    p = jc_probabilities(state, cfg)
    return p.detected_g / (cfg.gt**2 * p.detected_e)


def jc_sample(state: State, cfg: JcConfig) -> CountRecord:
    """Sample atom detections; ``n0 = N_e``, ``n1 = N_g``.

    Trials lost to a finite ``efficiency`` are counted in ``undetected``.
    An all-excited run yields estimator 0 with an infinite relative error.
    """
    probs = jc_probabilities(state, cfg)
    per_trial = 1 if cfg.efficiency == 1.0 else 2
    pg, eff = probs.pg, cfg.efficiency

    def tally(u):
        ground = u[:, 0] < pg
        seen = u[:, 1] < eff if per_trial == 2 else np.ones(len(u), dtype=bool)
        return np.array([np.sum(~ground & seen), np.sum(ground & seen)])

    n_e, n_g = (int(x) for x in _chunked_tally(cfg.seed, cfg.trials, per_trial, tally))
    if n_e == 0:
        raise DegenerateStatisticsError("N_e = 0")
    gt2 = cfg.gt**2
    detected = n_e + n_g
    return CountRecord(
        protocol="jc",
        n0=n_e,
        n1=n_g,
        trials=cfg.trials,
        estimator=n_g / (gt2 * n_e),
        standard_error=_binomial_ratio_se(n_g, detected, gt2),
        exact_expectation=indistinguishability(state, BOSONIC),
        estimator_expectation=probs.detected_g / (gt2 * probs.detected_e),
        undetected=cfg.trials - detected,
    )


# --- bias ---------------------------------------------------------------------


@dataclass(frozen=True)
class BiasRow:
    protocol: str
    param: float
    estimator_expectation: float
    exact_expectation: float

    @property
    def bias(self) -> float:
        return abs(self.estimator_expectation - self.exact_expectation)


def protocol_bias_report(
    state: State,
    s_grid: Sequence[float] = (0.3, 0.1, 0.03, 0.01),
    gt_grid: Sequence[float] = (0.2, 0.1, 0.05, 0.02),
) -> list[BiasRow]:
    """Approximation bias of both estimators from the exact-probability paths.

    NDPA rows use the exact squeezing map with a perfect detector; JC rows
    use the exact dressed-state evolution.  No sampling is involved.
    """
    true = indistinguishability(state, BOSONIC)
    rows = []
    for s in s_grid:
        p = ndpa_probabilities(state, NdpaConfig(s=s, mode=NdpaMode.EXACT))
        rows.append(BiasRow("ndpa", s, p.p1 / (s * s * p.p0), true))
    for gt in gt_grid:
        est = jc_estimator_expectation(state, JcConfig(g=gt, tau=1.0, mode=JcMode.EXACT))
        rows.append(BiasRow("jc", gt, est, true))
    return rows
