"""Invariant Yang-Mills profiles on the four-sphere, their twistor-line
Fuchsian residue families, isomonodromy verification and the induced sixth
Painleve transcendent and parameters."""

from . import (errors, instanton, isomonodromy, liealg, painleve, report,
               stepper, twistor)

__version__ = "0.1.0"

__all__ = ["errors", "instanton", "isomonodromy", "liealg", "painleve",
           "report", "stepper", "twistor", "__version__"]
