"""
Editing a triangle one dimension at a time
==========================================

A triangle is dimensioned by its three side lengths d1, d2, d3. We fix
d1 = 10, declare the other two editable, and watch how the valid range
of d3 contracts once d2 is committed.
"""

from prange import model
from prange.session import select
from prange.settings import SolverSettings


def show(ranges):
    for name in sorted(ranges):
        pieces = ", ".join(
            f"{'[' if iv.lo_closed else '('}{iv.lo:g}, "
            f"{'+inf)' if iv.hi is None else f'{iv.hi:g}' + (']' if iv.hi_closed else ')')}"
            for iv in ranges[name].intervals)
        print(f"  {name}: {pieces}")


triangle = model.load("models/triangle.json")
settings = SolverSettings(particles=400, iterations=150, seed=0)
session = select(triangle, ["d2", "d3"], settings=settings, eager=False)

# Before anything is assigned, both sides are free: any nonnegative length
# can be completed to a valid triangle by the remaining free side.
print("nothing assigned yet:")
show(session.ranges())

# Commit d2 = 20. The triangle inequality now couples d3 to the two known
# sides: |20 - 10| <= d3 <= 20 + 10, endpoints included because degenerate
# (flat) triangles still solve.
session.assign("d2", 20.0)
print("\nafter d2 := 20:")
show(session.ranges())

# Values straying outside are rejected before they can corrupt the model.
try:
    session.assign("d3", 55.0)
except Exception as err:
    print(f"\nassigning d3 := 55 fails: {err}")

# A value inside the range is accepted and the full system solves.
session.assign("d3", 25.0)
solution, residual = session.finalize()
print(f"\nfinalized with residual {residual:.2e}")
for name in ("P1", "P2", "P3"):
    print(f"  {name} = ({solution[name + '.x']:.4f}, {solution[name + '.y']:.4f})")
