"""
Sessions survive process boundaries
===================================

An editing session serializes to plain JSON: the system, the selection,
the assignment history, and the solver settings. Resuming reconstructs
the exact state, and identical seeds make the recomputed ranges
bit-identical to the originals, so an editor can quit and relaunch
without the user noticing. Undo pops one assignment at a time.
"""

from prange import model
from prange.session import EditingSession, select
from prange.settings import SolverSettings

triangle = model.load("models/triangle.json")
settings = SolverSettings(particles=300, iterations=120, seed=0)

first = select(triangle, ["d2", "d3"], settings=settings, eager=False)
first.ranges()
first.assign("d2", 20.0)
before = {n: [iv.to_report() for iv in r.intervals] for n, r in first.ranges().items()}
print("ranges before the round trip:", before)

# ... the process could end here; only this string needs to survive
payload = first.save()
print(f"\nsession serialized to {len(payload)} bytes of JSON")

second = EditingSession.resume(payload)
after = {n: [iv.to_report() for iv in r.intervals] for n, r in second.ranges().items()}
print("ranges after the round trip: ", after)
print("identical:", before == after)

# undo reverts d2 := 20 and the wide first-stage ranges come back
second.undo()
print("\nafter undo:")
for name, rng in sorted(second.ranges().items()):
    print(f"  {name}: {[iv.to_report() for iv in rng.intervals]}")
