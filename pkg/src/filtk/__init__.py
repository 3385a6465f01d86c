"""filtk: exact ideal-filtered K-theory computations over finite T0-spaces.

The layers, bottom up:

* :mod:`filtk.intlin` - exact integer matrices, Smith/Hermite normal forms,
  Diophantine solving with certificates.
* :mod:`filtk.fgab` - finitely generated abelian groups presented by relation
  matrices, homomorphisms, exactness, and a matrix-equation solver.
* :mod:`filtk.finspace` - finite T0-spaces as open-set families, with the
  built-in four-point spaces ``CSP`` and ``S21``.
* :mod:`filtk.diagram` - six-term diagram shapes and modules, naturality
  solving, suspension, tensor/dual, corner extensions, and the reduced
  invariant.
* :mod:`filtk.ckk` - K-theory diagram modules of Cuntz-Krieger block matrices.
* :mod:`filtk.caselib` - frozen case data plus the non-lifting counterexample
  driver and the pseudo-circle reduction battery.
* :mod:`filtk.cli` - the ``filtk`` command.
"""

from .intlin import IntMatrix, Infeasible, Solution, hermite_normal_form, smith_normal_form, solve_linear
from .fgab import GroupHom, PresentedGroup, hom_solve, is_exact_at
from .finspace import FiniteSpace, builtin_space
from .diagram import DiagramHom, DiagramModule, DiagramShape, generic_shape
from .ckk import BlockMatrix, filtered_k, realize_space_random, subquotient_groups

__version__ = "0.1.0"

__all__ = [
    "IntMatrix", "Infeasible", "Solution",
    "smith_normal_form", "hermite_normal_form", "solve_linear",
    "PresentedGroup", "GroupHom", "hom_solve", "is_exact_at",
    "FiniteSpace", "builtin_space",
    "DiagramShape", "DiagramModule", "DiagramHom", "generic_shape",
    "BlockMatrix", "filtered_k", "subquotient_groups", "realize_space_random",
    "__version__",
]
