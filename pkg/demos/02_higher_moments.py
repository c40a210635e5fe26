"""Higher-order antinormally ordered moments, three ways.

The matrix path applies the creation operator repeatedly on an enlarged
space.  Closed forms exist for coherent and thermal states.  The phase-space
path integrates |alpha|^(2n) against the Husimi Q function on a polar grid.
"""

from fockprobe.fock import auto_cutoff, make_coherent_state, make_thermal_density
from fockprobe.ladder import higher_moment, laguerre_moment_coherent, power_moment_thermal, q_function_moment

alpha = 1.0
state = make_coherent_state(alpha, auto_cutoff(alpha=alpha, tail=1e-16) + 8)[0]
print(f"Coherent state, |alpha|^2 = {alpha**2}")
print("  order   matrix          Laguerre        Q quadrature   radius")
for n in range(5):
    q = q_function_moment(state, n)
    print(f"  {n:>5}   {higher_moment(state, n):<14.10g}  {laguerre_moment_coherent(alpha, n):<14.10g}  "
          f"{q.value:<13.8g}  {q.radius:.0f}")

nbar = 1.0
rho = make_thermal_density(nbar, auto_cutoff(nbar=nbar, tail=1e-16) + 8)[0]
print(f"\nThermal state, nbar = {nbar}: closed form n! (1 + nbar)^n")
for n in range(5):
    print(f"  {n}: matrix {higher_moment(rho, n):.10g}, closed {power_moment_thermal(nbar, n):.10g}, "
          f"Q {q_function_moment(rho, n).value:.8g}")
