"""Vortex dynamics of the nonlinear wave equation on the unit torus.

Library layout:

- ``green``     : torus Green function F and its gradient (Ewald split)
- ``energy``    : renormalized energy W(a; q), its gradient, core profile
- ``dynamics``  : RK4 integration of the reduced second-order vortex law
- ``harmonic``  : canonical harmonic map grids and prepared initial fields
- ``wave``      : pseudo-spectral solver, diagnostics, detection, tracking
- ``scenarios`` / ``runner`` / ``plots`` / ``cli`` : experiment surface
"""

from .green import GreenEvaluator, SingularPointError, build_green
from .energy import (
    CoreProfile,
    NearCollisionError,
    VortexConfig,
    augmented_energy,
    branch_momentum,
    core_energy_constant,
    energy_gradient,
    pair_energy,
    renormalized_energy,
)
from .dynamics import (
    COLLISION_THRESHOLD,
    ReducedState,
    Trajectory,
    conserved_energy,
    derivatives,
    integrate,
    rk4_step,
)
from .harmonic import (
    PhaseClosureError,
    PhaseGrid,
    ResolutionError,
    canonical_current,
    initial_data,
    reconstruct_phase,
)
from .wave import (
    BlowUpError,
    DetectedVortex,
    FieldState,
    PdeRun,
    TrackingError,
    VortexTrack,
    detect_vortices,
    energy,
    hamiltonian,
    jacobian_grid,
    load_snapshot,
    momentum,
    pde_step,
    run_pde,
    save_snapshot,
    track,
)

__version__ = "0.1.0"
