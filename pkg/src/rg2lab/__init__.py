"""rg2lab: curvature tensors, flow symbols, and parabolicity analysis.

The package computes curvature of Riemannian metrics from exact 2-jets,
assembles the principal symbol of the gauge-modified second-order
curvature flow, classifies its parabolicity by sampling 1 + alpha*K
over tangent planes, and integrates the flow in reduced settings
(constant-curvature ansatz and periodic grids).
"""

__version__ = "0.1.0"

from .errors import (
    ConsistencyError,
    DegeneratePlaneError,
    ParabolicityError,
    PositivityLossError,
    RG2Error,
    SingularMetricError,
    ValenceError,
    ZeroVectorError,
)
from .geometry import (
    CurvatureBundle,
    Frame,
    MetricJet2,
    Plane,
    christoffel,
    curvature,
    frame_transform_tensor,
    orthonormal_frame,
    ricci_and_scalar,
    riemann,
    riemann_symmetry_residuals,
    rm_squared,
    sectional_curvature,
)
from .families import (
    BumpyFamily,
    FlatFamily,
    HyperbolicFamily,
    MetricFamily,
    ProductSpheresFamily,
    SphereFamily,
    WarpedTorusFamily,
    builtin_families,
    make_family,
)
from .kernels import active_backend, curvature_batch
from .linearize import (
    SecondDerivativeSlot,
    SymmetricPerturbation,
    covariant_hessian_of_wave,
    d_inverse_metric,
    d_riemann_principal,
    d_rmsq_principal,
)
from .symbol import (
    IndexMap,
    ParabolicityReport,
    SymbolMatrix,
    assemble_symbol,
    assemble_symbol_in_frame,
    block_decompose,
    case_split_rows,
    classify_parabolicity,
    diagonalize_R1m1n,
    golden_nu_4d,
)
from .flow import (
    AnsatzState,
    FlowTrace,
    GridState,
    ansatz_rhs,
    deturck_vector_field,
    grid_rhs,
    load_grid_snapshot,
    reference_ansatz_solution,
    ricci_flow_sphere_scale,
    run_with_monitor,
    save_grid_snapshot,
    step,
)
from .oracle import (
    PlaneWavePerturbation,
    fd_convergence_order,
    fd_variation,
    naive_contractions,
    naive_deturck_vector,
    naive_flow_rhs,
    naive_ricci,
    naive_riemann_low,
    naive_rm_sq,
    symbol_from_plane_waves,
)
