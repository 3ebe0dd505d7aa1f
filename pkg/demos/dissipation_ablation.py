"""Dropping maximum dissipation lets friction do impossible work.

With the side pads offset along z the box can be wedged between them.
If friction may point anywhere inside its cone, the solver "holds" a
100 N pull-out with no preload at all; the witness has friction
pushing along the slip at some contact, i.e. it injects energy.
"""
import numpy as np

from passivegrasp import ablation_no_mdp, check_stability
from passivegrasp.encoding import mdp_gap
from passivegrasp.fixtures import offset_two_finger

g = offset_two_finger(0.0)
pull = np.array([0, 100.0, 0, 0, 0, 0])

abl = ablation_no_mdp(g, wrench=pull)
print("without dissipation:", abl.summary().splitlines()[0])
for i, (work, _) in enumerate(mdp_gap(abl.witness, g)):
    if not np.isnan(work):
        print(f"  contact {i}: dissipated power {work:+.3f}" + ("  <- negative" if work < 0 else ""))

print("full model:", check_stability(g, wrench=pull).summary().splitlines()[0])
