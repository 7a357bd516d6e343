"""
Open endpoints from degenerating geometry
=========================================

A line through two distinct points stops being well defined when the
points merge. The slider model drives exactly that: the distance d1
between the two defining points can get arbitrarily close to 0, but at 0
the line's direction is no longer pinned down, so 0 itself is invalid.
The computed range must therefore be OPEN at 0 - a fact no amount of
plain root-finding at d1 = 0 would reveal, because the degenerate
configuration still solves.
"""

from prange import model
from prange.ranges import compute_range
from prange.settings import SolverSettings

slider = model.load("models/slider.json")
settings = SolverSettings(particles=400, iterations=200, seed=0)

result = compute_range(slider, "d1", {}, [], settings)
iv = result.intervals[0]
bracket = "[" if iv.lo_closed else "("
print(f"d1 range: {bracket}{iv.lo:g}, +inf)")
print("endpoint candidates considered:")
for cand in result.provenance["candidates"]:
    value = "unbounded" if cand["value"] is None else f"{cand['value']:g}"
    print(f"  {value:>10}  closed={cand['closed']}  source={cand['source']}")

# The open endpoint is found by shrinking the degeneracy: the pipeline
# solves ranges of the system restricted to point separation delta and
# delta/4, then extrapolates the trend to the true limit value.
print(f"\nextrapolated limit sits at {iv.lo:.2e} (exact limit is 0)")

# When a fixed dimension contradicts the collapse, the limit analysis
# drops the endpoint: d2 = 10 keeps the two points 10 apart, so d1 can
# never approach 0 and its range simply starts at a closed minimum.
conflict = model.load("models/slider_conflict.json")
result = compute_range(conflict, "d1", {"d2": 10.0}, [],
                       SolverSettings(particles=300, iterations=120, seed=0))
iv = result.intervals[0]
bracket = "[" if iv.lo_closed else "("
print(f"\nwith the conflicting strut: {bracket}{iv.lo:g}, +inf)")
