"""
Numeric ranges versus a closed-form answer
==========================================

The quadrangle model is simple enough to solve by hand: with its two
fixed struts of length 10 meeting at a right angle, the reachable values
of d3 after committing d1 form the interval

    [sqrt(d1^2 + 100) - 10,  sqrt(d1^2 + 100) + 10].

The swarm knows nothing of this formula, so matching it to a few decimal
places is strong evidence the endpoint search is finding true extrema.
"""

import math

from prange import model
from prange.ranges import compute_range
from prange.settings import SolverSettings

quadrangle = model.load("models/quadrangle.json")
settings = SolverSettings(particles=600, iterations=150, seed=1)

for d1 in (10.0, 30.0):
    result = compute_range(quadrangle, "d3",
                           {"d1": d1, "d2": 10.0, "d4": 10.0}, [], settings)
    iv = result.intervals[0]
    mid = math.sqrt(d1 * d1 + 100.0)
    print(f"d1 = {d1:g}")
    print(f"  computed  [{iv.lo:.7f}, {iv.hi:.7f}]")
    print(f"  closed    [{mid - 10.0:.7f}, {mid + 10.0:.7f}]")
    print(f"  error     {abs(iv.lo - mid + 10.0):.2e}, {abs(iv.hi - mid - 10.0):.2e}")
