"""
Nine coupled dimensions of a hexagon
====================================

The hexagon model cannot be decomposed into triangles: six sides, one
diagonal and two corner angles all interact through twelve point-on-line
incidences. All nine dimensions are selected for editing at once, and
the session recomputes every remaining range after each commitment.

Early on the system is floppy enough that nothing constrains anything:
every distance can take any nonnegative value and every angle anything
in [0, pi). The interesting part is WHERE the first contraction appears:
only after the fourth side is pinned does the diagonal d7 see a ceiling,
because the chain of committed sides P3-P2-P1-P6 can stretch no further
than their sum.
"""

from prange import model
from prange.session import select
from prange.settings import SolverSettings


def fmt(rng):
    return ", ".join(
        f"{'[' if iv.lo_closed else '('}{iv.lo:g}, "
        f"{'+inf)' if iv.hi is None else f'{iv.hi:g}' + (']' if iv.hi_closed else ')')}"
        for iv in rng.intervals)


hexagon = model.load("models/hexagon.json")
settings = SolverSettings(particles=200, iterations=60, seed=0)
session = select(hexagon, hexagon.parameter_names(), settings=settings, eager=False)

plan = [("d1", 10.0), ("d2", 10.0), ("d3", 10.0), ("d6", 10.0)]
for step, assignment in enumerate([None] + plan, start=1):
    if assignment is not None:
        session.assign(*assignment)
        print(f"\nstep {step}: after {assignment[0]} := {assignment[1]:g}")
    else:
        print(f"step {step}: nothing assigned")
    for name, rng in sorted(session.ranges().items()):
        print(f"  {name}: {fmt(rng)}")
