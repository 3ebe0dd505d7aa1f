"""Preloading a third finger helps against one load and hurts another.

Two side fingers squeeze the object; a third pushes up from below.  Its
push must be carried by side friction, which leaves less for an upward
pull, while its own friction adds grip against a moment about x.
"""
from passivegrasp import max_disturbance
from passivegrasp.fixtures import three_finger

print("tau3   s*(+z)   s*(Mx)")
for t3 in (0.0, 0.03, 0.06, 0.09, 0.12):
    g = three_finger(t3)
    fz = max_disturbance(g, [0, 0, 1, 0, 0, 0])
    mx = max_disturbance(g, [0, 0, 0, 1, 0, 0])
    show = lambda r: "unstable" if r.status == "unstable" else f"{r.value:.4g}"
    print(f"{t3:4.2f}  {show(fz):>8}  {show(mx):>8}")
