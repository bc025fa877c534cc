"""Thomas-Fermi functionals, Fermi-box recovery sequences and semiclassical diagnostics."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .densities import (
    Cube,
    CubePartition,
    Grid,
    GridDensity,
    RadialDensity,
    StepDensity,
    lp_distance,
    mass,
    step_approximate,
)
from .errors import (
    ConvergenceError,
    NumericalError,
    TFGammaError,
    ToleranceNotMetError,
    ValidationError,
)
from .fermi_box import (
    FermiSea,
    Ladder,
    ScalingRegime,
    allocate_particles,
    build_recovery,
    diagonal_sequence,
    gram_matrix,
    hoffmann_ostenhof_gap,
    lowest_modes,
    sea_density,
    sea_kinetic,
    slater_direct_interaction,
    slater_exchange_interaction,
)
from .potentials import (
    BallChiFamily,
    ChiFamily,
    RadialKernel,
    ZeroChiFamily,
    coulomb_chi,
    coulomb_kernel,
    fdll_reconstruct,
    load_kernel,
)
from .tf import (
    TFProblem,
    TFSolution,
    atomic_energy_oracle,
    convexity_margin,
    kcl,
    relaxed_constraint_gap,
    tf_atom_shoot,
    tf_energy,
    tf_minimize,
)
from .spectral import (
    SchrodingerGrid,
    dual_lower_bound,
    negative_sum,
    weyl_convergence_table,
    weyl_term,
)
from .bounds import (
    ChannelResult,
    hartree_direct,
    interaction_channel,
    lieb_oxford_rhs,
    march_young_upper,
)
