"""Where the weak-coupling approximations break down.

Both estimators assume first-order dynamics.  Propagating the full
squeezing map and the full atom-field evolution shows how large the coupling
can be before the bias exceeds a given budget, independent of sampling noise.
"""

from fockprobe.fock import auto_cutoff, make_coherent_state
from fockprobe.probe import protocol_bias_report

for alpha in (0.3, 1.0):
    state = make_coherent_state(alpha, auto_cutoff(alpha=alpha, tail=1e-16) + 4)[0]
    print(f"coherent |alpha| = {alpha}, target {1 + alpha**2:.2f}")
    for row in protocol_bias_report(state):
        print(f"  {row.protocol:<4} coupling {row.param:<5} -> {row.estimator_expectation:.6f} "
              f"(bias {row.bias:.2e})")
