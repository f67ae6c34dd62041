"""Toric Deligne-Mumford stacks, their integral structures and Landau-Ginzburg mirrors."""

__version__ = "0.1.0"

from .errors import ToricError  # noqa: E402
from .stack import StackInitialData, select_nef_basis, validate  # noqa: E402
from .cohomology import OrbifoldCohomology  # noqa: E402
from .chern import Chern, KClass  # noqa: E402

__all__ = ["ToricError", "StackInitialData", "validate", "select_nef_basis",
           "OrbifoldCohomology", "Chern", "KClass", "__version__"]
