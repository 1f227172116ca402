"""Finite-dimensional 3d gravity application.

Everything upstream of this subpackage is signature-agnostic algebra;
here the machinery is pointed at a concrete theory: BF theory with
gauge algebra so(2,1) on a finite surface model, its two-layer
resolution, its quantisation, and the pointwise change of variables
to metric (ADM-like) data with the frame-fixing flows that make the
reduced structure visible.

The symbolic route (dga, lie, fields, theory) is exact over the
Gaussian rationals.  The pointwise route (points, frames) is the one
place in the package where floating point is allowed, because the
frame normalisation needs arctangents and square roots.
"""

from .dga import DgaModel, torus_fourier, torus_h, validate_dga
from .fields import (FieldVec, build_base, field_views, flow_views, fv_add,
                     fv_bracket, fv_d, fv_pair_int, fv_scale, moments)
from .frames import (constraint_flow_invariance, lorentz_flow, lorentz_rhs,
                     normalize_frame, omega_bf, random_euclidean_gauge,
                     reduced_pattern, reduced_structure_check,
                     resolve_dependents, residual_bridge, residual_density)
from .lie import bracket_vec, mat_bracket, mat_to_vec, pair_vec, vec_to_mat
from .points import (EhPoint, FramePoint, bf_to_eh, extrinsic, solve_torsion,
                     torsion)
from .theory import (BfTheory, build_bf_theory, double_layer,
                     double_layer_report, first_layer, first_layer_report,
                     leaf_dimension, quantum_layer, quantum_report,
                     sample_states, structure_report)

__all__ = [
    "DgaModel",
    "torus_h",
    "torus_fourier",
    "validate_dga",
    "bracket_vec",
    "pair_vec",
    "vec_to_mat",
    "mat_to_vec",
    "mat_bracket",
    "FieldVec",
    "build_base",
    "field_views",
    "flow_views",
    "fv_add",
    "fv_scale",
    "fv_bracket",
    "fv_d",
    "fv_pair_int",
    "moments",
    "BfTheory",
    "build_bf_theory",
    "structure_report",
    "first_layer",
    "first_layer_report",
    "double_layer",
    "double_layer_report",
    "quantum_layer",
    "quantum_report",
    "leaf_dimension",
    "sample_states",
    "FramePoint",
    "EhPoint",
    "torsion",
    "extrinsic",
    "solve_torsion",
    "bf_to_eh",
    "normalize_frame",
    "resolve_dependents",
    "random_euclidean_gauge",
    "lorentz_rhs",
    "lorentz_flow",
    "constraint_flow_invariance",
    "omega_bf",
    "reduced_pattern",
    "reduced_structure_check",
    "residual_bridge",
    "residual_density",
]
