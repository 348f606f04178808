"""Purity of localized thermal field modes and harvesting with mixed detectors."""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DomainError,
    IRDivergenceError,
    LocalPurityError,
    NumericalError,
    UVDivergenceError,
    ValidationError,
)
from .harvesting import (  # noqa: E402
    DetectorSpec,
    HarvestElements,
    TwoDetectorState,
    assemble_state,
    boltzmann_z,
    compute_elements,
    detector_purity,
    negativity,
    pt_negativity_oracle,
    threshold,
)
from .profiles import ModeProfile, make_profile, numbered_profile  # noqa: E402
from .symplectic import (  # noqa: E402
    CovarianceMatrix,
    GaussianState,
    QuadraticGenerator,
    evolve,
    symplectic_spectrum,
    williamson,
)
from .thermal import (  # noqa: E402
    FieldSpec,
    PurityGrid,
    QuadratureConfig,
    min_mixedness_scan,
    mode_purity,
    purity_grid,
    u_objective,
)
