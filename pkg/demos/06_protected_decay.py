"""Driving a lossy level protects its neighbor from decaying into it.

Level |1> spontaneously emits into a continuum through level |2>, which
carries the effective width.  Resonantly driving |2> <-> |3> with strength
K splits the lossy level and builds up a dark state with almost no |2>
component: the stronger the drive, the slower |1> decays.
"""

import numpy as np

from zenosim import decay_model, expm

tau_z, gamma = 1.0, 0.5
ts = np.linspace(0.0, 10.0, 501)


def survival(k):
    hk = decay_model(tau_z, gamma, float(k))
    return np.array([abs(expm(hk.total(), t).matrix[0, 0]) ** 2 for t in ts])


def fitted_rate(p):
    return -np.polyfit(ts, np.log(p), 1)[0]


print(f"free decay rate gamma = {gamma}, quadratic scale tau_z = {tau_z}")
print()
print(f"{'K':>4} {'p1(t=10)':>10} {'fitted rate':>12} {'suppression':>12}")
r0 = None
for k in (0, 1, 2, 4, 8, 16):
    p = survival(k)
    r = fitted_rate(p)
    r0 = r if r0 is None else r0
    print(f"{k:>4} {p[-1]:>10.5f} {r:>12.6f} {1 - r / r0:>11.1%}")

print()
print("the protection mechanism is a dark state (K|1> - |3>)/sqrt(K^2+1):")
for k in (1, 4, 16):
    weight = k * k / (k * k + 1)
    print(f"K = {k:>2}: dark-state weight of |1> = {weight:.4f} "
          f"-> long-time survival ~ {weight ** 2:.4f}")
