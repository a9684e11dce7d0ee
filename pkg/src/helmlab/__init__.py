"""helmlab: near-zero eigenvalues of the truncated exterior Helmholtz
Dirichlet problem on horseshoe cavities, with ellipse-mode cross-checks."""

from .geometry import (BoundaryCurveSet, CavitySpec, DomainSpec, build_cavity,
                       contains, curve_point, geometry_json, truncation_circle)
from .mesh import (Mesh, QualityReport, generate_mesh, mesh_interior,
                   meshwidth_rule, read_mesh, validate_mesh, write_mesh)
from .specfun import (bessel_jy, bessel_j_root, hankel1, mathieu_char,
                      radial_mathieu, angular_mathieu)
from .fem import AssembledFem, assemble_fem, assemble_trace
from .bem_dtn import (BemOperators, FourierDtn, assemble_adjoint_double_layer,
                      assemble_bem, assemble_single_layer, dtn_apply,
                      fourier_dtn, fourier_dtn_symbol)
from .eigsolve import (CoupledSystem, EigenRecord, dense_pencil_eigs,
                       eig_residual, lu_factor, shift_invert_arnoldi)
from .ellipse_modes import (EllipseMode, ellipse_mode_field,
                            ellipse_mode_frequency, ellipse_mode_gradient,
                            fem_ellipse_oracle)
from .spectral_lab import (BoxSpec, CutoffSpec, FemCache, QuasimodeReport,
                           TrajectorySet, assemble_coupled, box_count,
                           default_cutoff, lab_domain, multiplicity_in_window,
                           quasimode_quality, spectrum_near_zero, sweep,
                           theorem1_check)

__version__ = "0.1.0"