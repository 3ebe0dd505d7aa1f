"""Resistible forces in the grasp plane, nominal and with 2.5 deg normal error.

Prints the largest resisted force along every 30 degrees in the xy plane
for the offset two-finger grasp.  Allowing the contact normals to be off by
2.5 degrees can only remove resisted loads; here the sideways pulls shrink
while loads balanced by moving joints are unchanged.  Use the CLI for
finer maps (this script takes a few minutes), e.g. ``passivegrasp force-map grasp.json --resolution-deg 1``.
"""
import math

from passivegrasp import force_map
from passivegrasp.fixtures import offset_two_finger
from passivegrasp.queries import force_map_csv, plane_basis

g = offset_two_finger(0.1)
u, v = plane_basis("xy")
nominal = force_map(g, u, v, resolution_deg=30)
robust = force_map(g, u, v, resolution_deg=30, eta=math.radians(2.5))
print(force_map_csv(nominal))
print("theta  nominal  eta=2.5deg")
for (th, a, _), (_, b, st) in zip(nominal.entries, robust.entries):
    print(f"{th:5g}  {a or 0:8.4g}  {b or 0:8.4g}  {st}")
