"""Weakly nonlinear plane-wave analysis for anisotropic hyperelastic solids.

For any material (second- plus third-order elastic constants) and
propagation direction, the toolkit computes phase speeds and polarizations,
finds acoustic axes, derives the quadratic/cubic coefficients of the
amplitude evolution equations — including the coupled pair on degenerate
axes — classifies the coupled system by its symmetry pattern, tests the
decoupling criterion, and integrates the resulting conservation laws.
"""

__version__ = "0.1.0"

from .acoustics import (
    AcousticModeSet,
    Christoffel,
    Degeneracy,
    ScanResult,
    christoffel,
    eigenmodes,
    modes_for_direction,
    scan_acoustic_axes,
    system_eigenstructure,
)
from .errors import (
    BlowupError,
    CFLError,
    DirectionError,
    ElastwaveError,
    MaterialError,
    NotAcousticAxisError,
    NotDecoupledError,
    NumericalError,
    ValidationError,
)
from .evolution import (
    EvolutionSystem,
    WaveField,
    build_system,
    decouple_transform,
    initial_profile,
    integrate,
    step,
    uniform_grid,
)
from .moduli import (
    Moduli,
    as_direction,
    load_material,
    make_cubic_m3m,
    make_isotropic,
    rotate_moduli,
    save_material,
    strain_energy,
    strain_from_gradient,
)
from .nonlinearity import (
    DirectionReport,
    GTensor,
    NonlinearityProfile,
    Tolerances,
    analyze_direction,
    classify_axis,
    decompose_g,
    decoupling_invariant,
    g_cubic_coefficient,
    g_tensor,
    gamma_interaction,
    gamma_single,
    mode_profile,
    q_vector,
    rotate_g,
    v_derivatives,
)

__all__ = [name for name in dir() if not name.startswith("_")]
