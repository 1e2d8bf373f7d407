"""Simulation and analysis of feedback-driven nonlinear spin ensembles.

Integrates the feedback Bloch equations for a continuum (or comb) of Larmor
frequencies, solves limit cycles self-consistently, tests their linear
stability, classifies stable dynamics (no-signal / limit cycle /
quasi-periodic / chaos), and measures noise robustness.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    DEFAULT_OMEGA_C,
    DEFAULT_PARAMS,
    AveragePolarization,
    DiracComb,
    DiscretizedEnsemble,
    PhysicalParams,
    Root,
    SpinEnsembleState,
    Tabulated,
    Uniform,
    average_polarization,
    density,
    discretize,
    equilibrium_state,
)
from .integrate import (  # noqa: F401
    BlowUpError,
    IntegrationConfig,
    Trajectory,
    derivative,
    simulate,
    step,
)
from .limitcycle import (  # noqa: F401
    LimitCycleSolution,
    NoSolution,
    lorentz_weight,
    profile,
    solve,
)
from .stability import (  # noqa: F401
    StabilityVerdict,
    characteristic,
    limit_cycle_stable,
    m_matrix,
    no_signal_threshold,
)
