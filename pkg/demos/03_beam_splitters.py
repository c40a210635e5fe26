"""Beam splitters, two-photon interference and quantum scissors.

Two photons meeting on a balanced beam splitter always leave together.
Chaining two beam splitters with a heralded single photon truncates a thermal
input to a vacuum/one-photon mixture whose one-photon weight is tunable.
"""

import math

from fockprobe.fock import make_basis_state
from fockprobe.optics import BeamSplitter, apply_beam_splitter, hong_ou_mandel, quantum_scissors

out = hong_ou_mandel()
print("Hong-Ou-Mandel output amplitudes")
for occ in [(2, 0), (1, 1), (0, 2)]:
    print(f"  |{occ[0]},{occ[1]}>: {out.amplitude(*occ).real:+.6f}")

bs = BeamSplitter.from_transmissivity(0.3)
single = apply_beam_splitter(make_basis_state((1, 0), 1), bs)
print(f"\nOne photon on a t^2 = 0.3 splitter: |1,0> {single.amplitude(1, 0).real:.4f}, "
      f"|0,1> {single.amplitude(0, 1).real:.4f}")

print("\nQuantum scissors on thermal light: simulated vs closed-form one-photon weight")
print("  t^2   nbar   p_sim          p_closed       herald rate")
for t2 in (0.1, 0.5, 0.9):
    for nbar in (0.25, 1.0, 4.0):
        res = quantum_scissors(nbar, math.sqrt(t2))
        print(f"  {t2:.1f}   {nbar:<5}  {res.p:.12f} {res.p_closed_form:.12f} {res.success_probability:.5f}")
