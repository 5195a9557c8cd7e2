"""Numerical toolkit for amplifying cross-Kerr phase shifts with squeezing.

Subpackages:
  fock      truncated multimode Fock-space operators and states
  su11      SU(1,1) angle relations and group-identity verification
  circuits  gate builders and the two-/three-mode amplification circuits
  loss      beam-splitter loss model and lossy fidelity runs
  cli       batch command-line front end
"""

__version__ = "0.1.0"

from . import circuits, fock, loss, su11  # noqa: F401
