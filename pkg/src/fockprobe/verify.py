"""Self-check suite: every stated invariant as a named, toleranced measurement."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import fock, ladder, optics, probe
from .ladder import BOSONIC, CLASSICAL, FERMIONIC


@dataclass(frozen=True)
class Check:
    name: str
    tolerance: float
    measured: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<58s} tol={self.tolerance:.1e}  measured={self.measured:.3e}"


def _below(name: str, tol: float, measured: float) -> Check:
    return Check(name, tol, float(measured), bool(measured <= tol))


def _true(name: str, ok: bool, measured: float = 0.0) -> Check:
    return Check(name, 0.0, float(measured), bool(ok))


def check_index_bijection() -> Check:
    s = fock.make_basis_state((0, 0, 0), 3)
    worst = max(abs(s.index(s.occupation(i)) - i) for i in range(s.dim))
    return _below("fock: index encode/decode bijection", 0, worst)


def check_coherent_tail() -> list[Check]:
    tails = [fock.make_coherent_state(1.5, n)[1].tail_mass for n in range(1, 30)]
    mono = all(b <= a for a, b in zip(tails, tails[1:]))
    worst = max(fock.make_coherent_state(a, 30)[1].tail_mass for a in (0.5, 1.0, 2.0))
    return [
        _true("fock: coherent tail_mass decreases with cutoff", mono),
        _below("fock: coherent tail_mass at |alpha|<=2, cutoff 30", 1e-10, worst),
    ]


def check_thermal_weights() -> Check:
    worst = max(abs(fock.make_thermal_density(n, 20)[0].weights.sum() - 1) for n in (0, 0.5, 2, 4))
    return _below("fock: thermal weights sum to 1", 1e-12, worst)


def check_tensor_norm() -> Check:
    a = fock.make_coherent_state(0.7, 12)[0]
    b = fock.make_coherent_state(0.3j, 12)[0]
    c = fock.make_number_state(2, 12)
    left = fock.tensor(fock.tensor(a, b), c)
    right = fock.tensor(a, fock.tensor(b, c))
    return _below(
        "fock: tensor associative and norm multiplicative",
        1e-12,
        max(abs(fock.norm_sq(left) - 1), np.max(np.abs(left.amplitudes - right.amplitudes))),
    )


def check_operator_algebra(cutoff: int = 12) -> list[Check]:
    interior = ladder.commutator(BOSONIC, cutoff).interior()
    anti = ladder.anticommutator(FERMIONIC, cutoff).entries
    two_level = np.zeros_like(anti)
    two_level[0, 0] = two_level[1, 1] = 1
    classical = ladder.add_then_subtract_matrix(CLASSICAL, cutoff).interior(margin=1)
    product = ladder.build_subtraction(BOSONIC, cutoff) @ ladder.build_addition(BOSONIC, cutoff)
    return [
        _below("ladder: bosonic commutator interior = identity", 1e-14,
               np.max(np.abs(interior - np.eye(len(interior))))),
        _below("ladder: fermionic anticommutator = two-level identity", 1e-14,
               np.max(np.abs(anti - two_level))),
        _below("ladder: classical c c^dagger interior = identity", 1e-14,
               np.max(np.abs(classical - np.eye(len(classical))))),
        _below("ladder: c c^dagger equals subtraction @ addition", 1e-14,
               np.max(np.abs(product.entries - ladder.add_then_subtract_matrix(BOSONIC, cutoff).entries))),
    ]


def check_number_state_id() -> Check:
    worst = 0.0
    for m in range(11):
        s = fock.make_number_state(m, 13)
        worst = max(worst, abs(ladder.indistinguishability(s, BOSONIC) - (m + 1)))
        worst = max(worst, abs(ladder.indistinguishability(s, CLASSICAL) - 1))
    for m, want in ((0, 1.0), (1, 0.0)):
        worst = max(worst, abs(ladder.indistinguishability(fock.make_number_state(m, 1), FERMIONIC) - want))
    return _below("ladder: I_d of number states (m+1, 1, {1,0})", 1e-12, worst)


def check_closed_forms() -> list[Check]:
    worst = 0.0
    coh, th = [], []
    for a in np.linspace(0, 2, 9):
        s, _ = fock.make_coherent_state(a, fock.auto_cutoff(alpha=a, tail=1e-16) + 2)
        coh.append(ladder.indistinguishability(s, BOSONIC))
        worst = max(worst, abs(coh[-1] - (1 + a * a)))
    for n in np.linspace(0, 4, 9):
        d, _ = fock.make_thermal_density(n, fock.auto_cutoff(nbar=n, tail=1e-16) + 2)
        th.append(ladder.indistinguishability(d, BOSONIC))
        worst = max(worst, abs(th[-1] - (1 + n)))
    mono = all(np.diff(coh) > 0) and all(np.diff(th) > 0)
    return [
        _below("ladder: I_d coherent/thermal = 1+|alpha|^2, 1+nbar", 1e-8, worst),
        _true("ladder: I_d strictly increasing in |alpha|^2 and nbar", mono),
    ]


def check_inequalities() -> list[Check]:
    rng = np.random.default_rng(1)
    margin = math.inf
    for _ in range(50):
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        v[-3:] = 0
        s = fock.FockState(v / np.linalg.norm(v), 7)
        margin = min(margin, ladder.indistinguishability(s, BOSONIC) - 1)
    fermi = -math.inf
    for _ in range(50):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        s = fock.FockState(v / np.linalg.norm(v), 1)
        fermi = max(fermi, ladder.indistinguishability(s, FERMIONIC) - 1)
    vac = ladder.indistinguishability(fock.make_number_state(0, 4), BOSONIC) - 1
    return [
        _true("ladder: bosonic I_d >= 1 (random states)", margin > 0, margin),
        _below("ladder: bosonic I_d = 1 on vacuum", 1e-15, abs(vac)),
        _true("ladder: fermionic I_d <= 1 (random states)", fermi <= 1e-15, fermi),
    ]


def check_moments() -> list[Check]:
    worst_rel = worst_q = 0.0
    for a in (0.5, 1.0, 2.0):
        s, _ = fock.make_coherent_state(a, fock.auto_cutoff(alpha=a, tail=1e-16) + 7)
        for n in range(1, 5):
            want = ladder.laguerre_moment_coherent(a, n)
            worst_rel = max(worst_rel, abs(ladder.higher_moment(s, n) / want - 1))
            worst_q = max(worst_q, abs(ladder.q_function_moment(s, n).value / want - 1))
    for nb in (0.5, 1.0, 4.0):
        d, _ = fock.make_thermal_density(nb, fock.auto_cutoff(nbar=nb, tail=1e-16) + 7)
        for n in range(1, 5):
            want = ladder.power_moment_thermal(nb, n)
            worst_rel = max(worst_rel, abs(ladder.higher_moment(d, n) / want - 1))
            worst_q = max(worst_q, abs(ladder.q_function_moment(d, n).value / want - 1))
    # number-diagonal oracle
    d, _ = fock.make_thermal_density(1.0, 64)
    pops = d.populations()
    diag = max(
        abs(ladder.higher_moment(d, n)
            - sum(p * math.factorial(m + n) / math.factorial(m) for m, p in enumerate(pops)))
        for n in range(1, 5)
    )
    return [
        _below("ladder: matrix moments vs n!L_n(-|a|^2), n!(1+nbar)^n (rel)", 1e-8, worst_rel),
        _below("ladder: Q-function quadrature vs closed forms (rel)", 1e-3, worst_q),
        _below("ladder: moments vs sum P(m)(m+n)!/m!", 1e-10, diag),
    ]


def check_beam_splitter() -> list[Check]:
    hom = optics.hong_ou_mandel()
    target = fock.FockState(np.array([[0, 0, -1], [0, 0, 0], [1, 0, 0]]) / math.sqrt(2), 2, 2)
    rng = np.random.default_rng(2)
    worst_norm = worst_inv = 0.0
    for _ in range(10):
        v = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7))
        v[np.add.outer(np.arange(7), np.arange(7)) > 6] = 0
        s = fock.FockState(v / np.linalg.norm(v), 6, 2)
        bs = optics.BeamSplitter.from_transmissivity(rng.uniform())
        out = optics.apply_beam_splitter(s, bs)
        back = optics.apply_beam_splitter(out, bs.inverse())
        worst_norm = max(worst_norm, abs(fock.norm_sq(out) - 1))
        worst_inv = max(worst_inv, np.max(np.abs(back.amplitudes - s.amplitudes)))
    return [
        _below("optics: Hong-Ou-Mandel infidelity", 1e-12, 1 - optics.fidelity(hom, target)),
        _below("optics: beam splitter preserves norm", 1e-12, worst_norm),
        _below("optics: (t, r) then (t, -r) is identity", 1e-10, worst_inv),
    ]


def check_scissors() -> list[Check]:
    worst = support = 0.0
    for t2 in np.arange(1, 10) / 10:
        for nb in (0.25, 0.5, 1, 2, 4):
            res = optics.quantum_scissors(nb, math.sqrt(t2))
            worst = max(worst, res.discrepancy)
            support = max(support, float(res.rho_out.populations()[2:].sum()))
    vals = [optics.mixed_state_inequality_values(p) for p in (0, 1 / 3, 0.5, 1)]
    mixed = max(max(abs(b - (1 + p)), abs(f - (1 - p))) for p, (b, f) in zip((0, 1 / 3, 0.5, 1), vals))
    return [
        _below("optics: scissors p vs closed form on t^2 x nbar grid", 1e-9, worst),
        _below("optics: scissors output beyond |1>", 1e-12, support),
        _below("optics: mixed01 inequality values (1+p, 1-p)", 1e-15, mixed),
    ]


def check_probes(trials: int) -> list[Check]:
    coh, _ = fock.make_coherent_state(1.0, 30)
    vac = fock.make_number_state(0, 4)
    out = []
    ndpa = probe.NdpaConfig(s=0.1, trials=trials, seed=11)
    first = probe.ndpa_probabilities(coh, ndpa)
    exact = probe.ndpa_probabilities(coh, probe.NdpaConfig(s=0.1, mode=probe.NdpaMode.EXACT))
    rec = probe.ndpa_sample(coh, ndpa)
    out.append(_below("probe: NDPA FirstOrder P1 vs 0.02/1.02", 1e-9, abs(first.p1 - 0.02 / 1.02)))
    out.append(_below("probe: NDPA P0 + P1 = 1 (both modes)", 1e-12,
                      max(abs(first.p0 + first.p1 - 1), abs(exact.p0 + exact.p1 - 1))))
    out.append(_below("probe: NDPA exact multi-photon residue", 5e-4, exact.multi_photon))
    out.append(_below("probe: NDPA estimator z-score (eta=1)", 4.0, rec.z_score(2.0)))
    half = probe.ndpa_sample(coh, probe.NdpaConfig(s=0.1, eta=0.5, trials=trials, seed=12))
    out.append(_below("probe: NDPA corrected estimator z-score (eta=0.5)", 4.0, half.z_score(2.0)))
    again = probe.ndpa_sample(coh, ndpa)
    out.append(_true("probe: identical seed gives identical counts", again == rec))

    small = fock.make_coherent_state(0.3, 20)[0]
    jc = probe.JcConfig(g=0.02, tau=1.0, trials=trials, seed=13)
    jrec = probe.jc_sample(small, jc)
    out.append(_below("probe: JC estimator z-score", 4.0, jrec.z_score(1.09)))
    p = probe.jc_probabilities(coh, jc)
    out.append(_below("probe: JC Pe + Pg = 1", 1e-12, abs(p.pe + p.pg - 1)))
    gt = 0.02
    bias = probe.jc_estimator_expectation(vac, probe.JcConfig(g=gt, tau=1, mode=probe.JcMode.EXACT)) - 1
    out.append(_below("probe: JC vacuum bias = tan^2/(g tau)^2 - 1", 1e-10,
                      abs(bias - (math.tan(gt) ** 2 / gt**2 - 1))))
    e1 = probe.jc_estimator_expectation(small, jc)
    e2 = probe.jc_estimator_expectation(small, probe.JcConfig(g=0.02, tau=1.0, efficiency=0.37))
    out.append(_below("probe: JC estimator invariant to shared efficiency", 1e-12, abs(e1 - e2)))
    rows = probe.protocol_bias_report(coh, s_grid=(0.3, 0.1, 0.03, 0.01), gt_grid=())
    biases = [r.bias for r in rows]
    out.append(_true("probe: NDPA bias decreases as s -> 0", all(np.diff(biases) < 0), biases[-1]))
    return out


CHECKS: list[Callable[[], Check | list[Check]]] = [
    check_index_bijection,
    check_coherent_tail,
    check_thermal_weights,
    check_tensor_norm,
    check_operator_algebra,
    check_number_state_id,
    check_closed_forms,
    check_inequalities,
    check_moments,
    check_beam_splitter,
    check_scissors,
]


def run_all(quick: bool = False) -> list[Check]:
    results: list[Check] = []
    for fn in CHECKS:
        got = fn()
        results.extend(got if isinstance(got, list) else [got])
    results.extend(check_probes(100_000 if quick else 1_000_000))
    return results
