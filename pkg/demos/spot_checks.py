"""Two-finger box grasp: what holds, what slips, and why.

Each finger has a side pad 9 cm below its proximal joint and a hook under
the box.  Squeezing with 0.1 N m at both proximal joints gives 1.11 N of
normal force per pad; with mu = 1 the pads can hold up to 2.22 N of
upward pull between them.
"""
import numpy as np

from passivegrasp import check_stability, max_disturbance, optimal_torques
from passivegrasp.fixtures import two_finger

up = np.array([0, 1.0, 0, 0, 0, 0])

print("no preload, 1 N pull up")
print(check_stability(two_finger(0.0), wrench=up).summary(), "\n")

for load in (2.2, 2.5):
    print(f"0.1 N m preload, {load} N pull up")
    print(check_stability(two_finger(0.1), wrench=load * up).summary(), "\n")

res = max_disturbance(two_finger(0.1), up)
print("largest pull the preload resists")
print(res.summary())
print(res.outcome.trace(), "\n")

print("pushing down needs no preload: the hooks take it")
print(max_disturbance(two_finger(0.0), -up).summary(), "\n")

print("smallest preload for a 2.2 N pull")
print(optimal_torques(two_finger(0.0), 2.2 * up).summary())
