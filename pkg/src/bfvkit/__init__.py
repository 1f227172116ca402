"""Exact graded-symplectic computer algebra for constrained systems.

The package builds BFV resolutions of nested coisotropic embeddings,
stacks a second resolution on top of the first, quantises the result
to formal-hbar operator algebras, and instantiates the machinery on a
finite-dimensional model of 3d BF theory, including the change of
variables to metric (ADM-like) data.  Everything symbolic is exact
over the Gaussian rationals; floating point appears only in the
numerical frame-fixing layer.
"""

from .galg import GaussRat, GradedAlgebra, GradedPoly, ParseError
from .phase import (
    PhaseChart,
    VectorFieldRep,
    check_cme,
    check_nilpotent,
    ham_vf,
    poisson,
)
from .bfv import (
    BfvData,
    ConstraintSystem,
    SecondaryData,
    StructureReport,
    build_bfv,
    build_secondary,
    h0_truncated,
    invariant_oracle,
    validate_structure,
)
from .dbfv import (
    BodyState,
    DoubleBfvData,
    build_double,
    flow_reduce_body,
    residual_bfv_compare,
)
from .registry import get_system, system_names

__version__ = "0.1.0"
