"""Measuring the indistinguishability with photon counting or atoms.

A weakly pumped parametric amplifier seeded by the state heralds an idler
click with probability proportional to <a a^dagger>.  A two-level atom that
barely interacts with the field drops to the ground state at a rate
proportional to the same quantity.  Both estimators are sampled from
reproducible counter-based random streams.
"""

from fockprobe.fock import auto_cutoff, make_coherent_state
from fockprobe.probe import JcConfig, NdpaConfig, NdpaMode, jc_sample, ndpa_probabilities, ndpa_sample

alpha = 1.0
state = make_coherent_state(alpha, auto_cutoff(alpha=alpha, tail=1e-16) + 4)[0]
print(f"Target <a a^dagger> = {1 + alpha**2}")

exact = ndpa_probabilities(state, NdpaConfig(s=0.1, mode=NdpaMode.EXACT))
print(f"\nAmplifier at s = 0.1: multi-photon idler probability {exact.multi_photon:.2e}")
for eta in (1.0, 0.5):
    rec = ndpa_sample(state, NdpaConfig(s=0.1, eta=eta, trials=1_000_000, seed=1))
    print(f"  eta={eta}: corrected {rec.estimator:.4f} +- {rec.standard_error:.4f}, "
          f"uncorrected {rec.estimator_literal:.4f}")

alpha = 0.3
state = make_coherent_state(alpha, auto_cutoff(alpha=alpha, tail=1e-16) + 4)[0]
print(f"\nAtom probe, target {1 + alpha**2:.2f}")
for eff in (1.0, 0.6):
    rec = jc_sample(state, JcConfig(g=0.02, tau=1.0, trials=1_000_000, seed=1, efficiency=eff))
    print(f"  detector efficiency {eff}: {rec.estimator:.4f} +- {rec.standard_error:.4f} "
          f"({rec.undetected} atoms missed)")
