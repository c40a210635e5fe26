"""How distinguishable is a single added excitation?

The degree of indistinguishability compares the norm of a state after one
generalized creation operator with its norm before.  For bosons it exceeds
one whenever a photon is present, for fermions it never does, and for
classical particles it is exactly one.
"""

import numpy as np

from fockprobe.fock import auto_cutoff, make_coherent_state, make_mixed01, make_number_state, make_thermal_density
from fockprobe.ladder import BOSONIC, CLASSICAL, FERMIONIC, CoefficientProfile, commutator, indistinguishability

print("Commutator interior on a 12-level space")
print("  bosonic  :", np.allclose(commutator(BOSONIC, 12).interior(), np.eye(11)))
print("  classical:", np.diag(commutator(CLASSICAL, 12).interior()).real[:4], "...")

print("\nNumber states |m>")
for m in range(6):
    s = make_number_state(m, 10)
    print(f"  m={m}: bosonic {indistinguishability(s, BOSONIC):.0f}, classical {indistinguishability(s, CLASSICAL):.0f}")

print("\nCoherent and thermal states grow with the mean photon number")
for x in (0.0, 0.5, 1.0, 2.0):
    coh = make_coherent_state(np.sqrt(x), auto_cutoff(alpha=np.sqrt(x), tail=1e-16) + 2)[0]
    th = make_thermal_density(x, auto_cutoff(nbar=x, tail=1e-16) + 2)[0]
    print(f"  mean {x:.1f}: coherent {indistinguishability(coh, BOSONIC):.6f}, "
          f"thermal {indistinguishability(th, BOSONIC):.6f}")

print("\nA vacuum/one-photon mixture sits on either side of one")
for p in (0.0, 0.25, 0.5, 1.0):
    rho = make_mixed01(p, 3)
    print(f"  p={p:.2f}: bosonic {indistinguishability(rho, BOSONIC):.2f}, "
          f"fermionic {indistinguishability(rho, FERMIONIC):.2f}")

custom = CoefficientProfile.parse("custom:1,1.5,1.5,1.5")
print("\nA made-up profile saturating after two quanta:", custom)
print("  |2> ->", indistinguishability(make_number_state(2, 8), custom))
