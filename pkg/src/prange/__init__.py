"""Complete valid parameter ranges for 2D geometric constraint systems.

The usual entry points:

    from prange import model, select, SolverSettings

    system = model.load("models/triangle.json")
    session = select(system, ["d2", "d3"], settings=SolverSettings(seed=0))
"""

from . import model
from .errors import (
    ModelError,
    OutOfRange,
    PrangeError,
    SelectionError,
    SolveFailure,
    StaleRanges,
)
from .ranges import ParameterRange, compute_range
from .session import EditingSession, select
from .settings import SolverSettings

__version__ = "0.1.0"

__all__ = [
    "EditingSession",
    "ModelError",
    "OutOfRange",
    "ParameterRange",
    "PrangeError",
    "SelectionError",
    "SolveFailure",
    "SolverSettings",
    "StaleRanges",
    "compute_range",
    "model",
    "select",
    "__version__",
]
